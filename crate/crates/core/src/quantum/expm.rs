use nalgebra::DMatrix;

use super::ComplexMatrix;
use crate::{Error, Result, C64};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// `exp(scale · m)` by degree-13 Padé approximation with scaling and squaring.
pub fn matexp(m: &ComplexMatrix, scale: f64) -> Result<ComplexMatrix> {
    if !scale.is_finite() {
        return Err(Error::Numeric(format!("matexp scale {scale}")));
    }
    if !m.is_finite() {
        return Err(Error::Numeric("matexp input has non-finite entries".into()));
    }
    let d = m.dim();
    let a = m.as_matrix() * C64::new(scale, 0.0);
    let norm = m.norm_1() * scale.abs();
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a * C64::new(0.5f64.powi(s), 0.0);

    let id = DMatrix::<C64>::identity(d, d);
    let c = |k: usize| C64::new(PADE13[k], 0.0);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * c(13) + &a4 * c(11) + &a2 * c(9))
        + &a6 * c(7)
        + &a4 * c(5)
        + &a2 * c(3)
        + &id * c(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * c(12) + &a4 * c(10) + &a2 * c(8))
        + &a6 * c(6)
        + &a4 * c(4)
        + &a2 * c(2)
        + &id * c(0);

    let num = &v + &u;
    let den = v - u;
    let mut r = den
        .lu()
        .solve(&num)
        .ok_or_else(|| Error::Numeric("singular Padé denominator".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    let out = ComplexMatrix::new(r)?;
    if !out.is_finite() {
        return Err(Error::Numeric("matrix exponential overflowed".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn taylor(m: &ComplexMatrix, terms: usize) -> DMatrix<C64> {
        let d = m.dim();
        let mut term = DMatrix::<C64>::identity(d, d);
        let mut sum = term.clone();
        for k in 1..terms {
            term = &term * m.as_matrix() * C64::new(1.0 / k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    fn rel_err(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).norm() / b.norm()
    }

    fn arb_matrix(d: usize, max_entry: f64) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec((-max_entry..max_entry, -max_entry..max_entry), d * d).prop_map(move |v| {
            ComplexMatrix::from_fn(d, |i, j| C64::new(v[i * d + j].0, v[i * d + j].1))
        })
    }

    #[test]
    fn zero_gives_identity() {
        let e = matexp(&ComplexMatrix::zeros(4), 1.0).unwrap();
        assert_eq!(e, ComplexMatrix::identity(4));
    }

    #[test]
    fn diagonal_input() {
        let m = ComplexMatrix::from_diagonal(&[C64::new(0.3, 0.0), C64::new(-1.2, 0.7)]);
        let e = matexp(&m, 1.0).unwrap();
        assert!((e[(0, 0)] - C64::new(0.3, 0.0).exp()).norm() < 1e-15);
        assert!((e[(1, 1)] - C64::new(-1.2, 0.7).exp()).norm() < 1e-15);
        assert_eq!(e[(0, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn rotation_generator() {
        // exp(θ[[0,−1],[1,0]]) is a rotation by θ
        let m = ComplexMatrix::from_row_slice(&[C64::new(0.0, 0.0), C64::new(-1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
            .unwrap();
        let e = matexp(&m, 2.5).unwrap();
        assert!((e[(0, 0)].re - 2.5f64.cos()).abs() < 1e-14);
        assert!((e[(1, 0)].re - 2.5f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(matexp(&m, 1.0), Err(Error::Numeric(_))));
        assert!(matches!(matexp(&ComplexMatrix::zeros(2), f64::INFINITY), Err(Error::Numeric(_))));
    }

    #[test]
    fn large_norm_uses_squaring() {
        // nilpotent part plus a big diagonal shift: exp(aI + N) = e^a (I + N)
        let mut m = ComplexMatrix::identity(3).scale(C64::new(-40.0, 3.0));
        m[(0, 2)] = C64::new(25.0, 0.0);
        let e = matexp(&m, 1.0).unwrap();
        let ea = C64::new(-40.0, 3.0).exp();
        assert!((e[(0, 0)] - ea).norm() < 1e-12 * ea.norm());
        assert!((e[(0, 2)] - ea * 25.0).norm() < 1e-12 * (ea * 25.0).norm());
    }

    proptest! {
        #[test]
        fn matches_taylor_series(m in arb_matrix(4, 0.6)) {
            // entries ≤ 0.6·√2 keep the spectral norm below ~3.4
            let e = matexp(&m, 1.0).unwrap();
            prop_assert!(rel_err(e.as_matrix(), &taylor(&m, 30)) < 1e-12);
        }

        #[test]
        fn matches_taylor_series_9x9(m in arb_matrix(9, 0.25)) {
            let e = matexp(&m, 1.0).unwrap();
            prop_assert!(rel_err(e.as_matrix(), &taylor(&m, 30)) < 1e-12);
        }

        #[test]
        fn additive_on_commuting_inputs(m in arb_matrix(3, 0.8), a in -1.5..1.5f64, b in -1.5..1.5f64) {
            // polynomials in the same matrix commute
            let sq = &m * &m;
            let x = &m.scale(C64::new(a, 0.0)) + &sq.scale(C64::new(0.1, 0.0));
            let y = m.scale(C64::new(b, 0.0));
            let lhs = matexp(&x, 1.0).unwrap() * matexp(&y, 1.0).unwrap();
            let rhs = matexp(&(&x + &y), 1.0).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-11 * (1.0 + rhs.norm_1()));
        }
    }
}
