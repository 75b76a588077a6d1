use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// stop when an accepted step lowers the rss by less than this fraction
    pub rel_rss_tol: f64,
    /// stop when the parameter step is shorter than this
    pub step_tol: f64,
    /// relative forward-difference step for the Jacobian
    pub fd_step: f64,
    /// condition number of the Jacobian above which the simplex takes over
    pub max_condition: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iter: 10_000, rel_rss_tol: 1e-12, step_tol: 1e-10, fd_step: 1e-7, max_condition: 1e10 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub used_simplex: bool,
}

fn rss_of(r: &[f64]) -> f64 {
    let s: f64 = r.iter().map(|v| v * v).sum();
    if s.is_finite() {
        s
    } else {
        f64::INFINITY
    }
}

/// Levenberg–Marquardt on `Σ rᵢ(x)²` with a forward-difference Jacobian.
/// Falls back to Nelder–Mead when the Jacobian is numerically rank deficient.
pub fn levenberg_marquardt<F>(f: &F, m: usize, x0: &[f64], opts: &LmOptions) -> Minimum
where
    F: Fn(&[f64], &mut [f64]),
{
    let k = x0.len();
    let mut x = x0.to_vec();
    let mut r = vec![0.0; m];
    f(&x, &mut r);
    let mut rss = rss_of(&r);
    if !rss.is_finite() {
        return Minimum { x, rss, iterations: 0, converged: false, used_simplex: false };
    }
    let mut lambda = 1e-3;
    let mut rp = vec![0.0; m];
    let mut trial = vec![0.0; k];
    for it in 1..=opts.max_iter {
        let mut jac = DMatrix::<f64>::zeros(m, k);
        for j in 0..k {
            let h = opts.fd_step * x[j].abs().max(1e-2);
            let mut xp = x.clone();
            xp[j] += h;
            f(&xp, &mut rp);
            for i in 0..m {
                jac[(i, j)] = (rp[i] - r[i]) / h;
            }
        }
        let sv = jac.clone().singular_values();
        let (smax, smin) = (sv.max(), sv.min());
        if !(smin.is_finite() && smax.is_finite()) || smin <= smax / opts.max_condition {
            let mut out = nelder_mead(&|p: &[f64]| {
                let mut buf = vec![0.0; m];
                f(p, &mut buf);
                rss_of(&buf)
            }, &x, opts.max_iter * k);
            out.iterations += it;
            return out;
        }
        let rv = DVector::from_column_slice(&r);
        let a = jac.transpose() * &jac;
        let g = jac.transpose() * rv;
        loop {
            let mut damped = a.clone();
            for i in 0..k {
                damped[(i, i)] += lambda * a[(i, i)].max(1e-12);
            }
            let step = match damped.clone().cholesky() {
                Some(c) => c.solve(&(-&g)),
                None => match damped.lu().solve(&(-&g)) {
                    Some(s) => s,
                    None => {
                        lambda *= 10.0;
                        continue;
                    }
                },
            };
            for i in 0..k {
                trial[i] = x[i] + step[i];
            }
            f(&trial, &mut rp);
            let rss_t = rss_of(&rp);
            let step_norm = step.norm();
            if rss_t < rss {
                let rel = (rss - rss_t) / rss;
                x.copy_from_slice(&trial);
                r.copy_from_slice(&rp);
                rss = rss_t;
                lambda = (lambda / 10.0).max(1e-15);
                if rel < opts.rel_rss_tol || step_norm < opts.step_tol {
                    return Minimum { x, rss, iterations: it, converged: true, used_simplex: false };
                }
                break;
            }
            if step_norm < opts.step_tol || lambda > 1e20 {
                // no descent left along any damped Gauss–Newton direction
                return Minimum { x, rss, iterations: it, converged: true, used_simplex: false };
            }
            lambda *= 10.0;
        }
    }
    Minimum { x, rss, iterations: opts.max_iter, converged: false, used_simplex: false }
}

/// Derivative-free simplex minimization of `f` from `x0`.
pub fn nelder_mead<F>(f: &F, x0: &[f64], max_evals: usize) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let k = x0.len();
    let eval = |p: &[f64]| {
        let v = f(p);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for j in 0..k {
        let mut p = x0.to_vec();
        p[j] += if p[j] != 0.0 { 0.05 * p[j] } else { 2.5e-4 };
        simplex.push(p);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|p| eval(p)).collect();
    let mut evals = k + 1;
    let mut iterations = 0;
    let mut converged = false;
    while evals < max_evals {
        iterations += 1;
        let mut idx: Vec<usize> = (0..=k).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();

        let spread = vals[k] - vals[0];
        let size = simplex[1..]
            .iter()
            .map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= 1e-14 * vals[0].abs() + 1e-300 && size < 1e-10 {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..k).map(|j| simplex[..k].iter().map(|p| p[j]).sum::<f64>() / k as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..k).map(|j| centroid[j] + t * (simplex[k][j] - centroid[j])).collect() };
        let xr = along(-1.0);
        let fr = eval(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = eval(&xe);
            evals += 1;
            if fe < fr {
                simplex[k] = xe;
                vals[k] = fe;
            } else {
                simplex[k] = xr;
                vals[k] = fr;
            }
        } else if fr < vals[k - 1] {
            simplex[k] = xr;
            vals[k] = fr;
        } else {
            let (xc, fc) = if fr < vals[k] {
                let xc = along(-0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < vals[k].min(fr) {
                simplex[k] = xc;
                vals[k] = fc;
            } else {
                for i in 1..=k {
                    let p: Vec<f64> = (0..k).map(|j| simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j])).collect();
                    vals[i] = eval(&p);
                    simplex[i] = p;
                }
                evals += k;
            }
        }
    }
    let best = (0..=k).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    Minimum { x: simplex[best].clone(), rss: vals[best], iterations, converged, used_simplex: true }
}
