use crate::{Error, Result};

pub const BESSEL_MAX_ARG: f64 = 1e4;

/// `J_k(x)` for integer `k`.
pub fn bessel_j(k: i32, x: f64) -> Result<f64> {
    let n = k.unsigned_abs() as usize;
    let v = bessel_j_orders(n, x)?[n];
    Ok(if k < 0 && n % 2 == 1 { -v } else { v })
}

/// `[J_0(x), …, J_kmax(x)]`.
pub fn bessel_j_orders(kmax: usize, x: f64) -> Result<Vec<f64>> {
    if !x.is_finite() || x.abs() >= BESSEL_MAX_ARG {
        return Err(Error::Range(format!("Bessel argument {x} (|x| must be < {BESSEL_MAX_ARG})")));
    }
    let ax = x.abs();
    let mut out = if ax <= 1.0 { series(kmax, ax) } else { miller(kmax, ax) };
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    Ok(out)
}

fn series(kmax: usize, x: f64) -> Vec<f64> {
    let h = 0.5 * x;
    let q = -h * h;
    let mut lead = 1.0; // (x/2)^k / k!
    let mut out = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        if k > 0 {
            lead *= h / k as f64;
        }
        let mut term = lead;
        let mut sum = lead;
        let mut m = 1.0;
        while term.abs() > 1e-18 * sum.abs() && m < 60.0 {
            term *= q / (m * (m + k as f64));
            sum += term;
            m += 1.0;
        }
        out.push(sum);
    }
    out
}

// backward recurrence normalized by J0 + 2ΣJ_2m = 1
fn miller(kmax: usize, x: f64) -> Vec<f64> {
    let top = (kmax as f64).max(x);
    let mut start = (top + 30.0 + (60.0 * top).sqrt()).ceil() as usize;
    start += start % 2;
    let mut out = vec![0.0; kmax + 1];
    let (mut jp, mut j) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    for m in (1..=start).rev() {
        let jm = 2.0 * m as f64 / x * j - jp;
        jp = j;
        j = jm;
        let order = m - 1;
        if order <= kmax {
            out[order] = j;
        }
        if order % 2 == 0 {
            norm += if order == 0 { j } else { 2.0 * j };
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}
