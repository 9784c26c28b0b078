//! Complex polynomial utilities: evaluation, deflation-free simultaneous
//! root finding (Aberth-Ehrlich), and double-double Newton polishing for
//! real-coefficient polynomials.

use num_complex::Complex64;

use crate::dd::{Dd, DdComplex};

/// Evaluate p(z) for ascending real coefficients.
pub fn eval(coeffs: &[f64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    if coeffs.len() <= 1 {
        return vec![0.0];
    }
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// All complex roots of a real-coefficient polynomial by Aberth-Ehrlich
/// simultaneous iteration. Coefficients ascending; leading nonzero.
pub fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.len() > 1 && c.last() == Some(&0.0) {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let deriv = derivative(&c);
    // initial guesses on a circle scaled by the Cauchy bound
    let lead = c[n];
    let bound = 1.0
        + c[..n]
            .iter()
            .map(|t| (t / lead).abs())
            .fold(0.0f64, f64::max);
    let radius = 0.7 * bound;
    let mut zs: Vec<Complex64> = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.41;
            Complex64::from_polar(radius, th)
        })
        .collect();
    for _ in 0..200 {
        let mut moved = 0.0f64;
        let snapshot = zs.clone();
        for i in 0..n {
            let zi = snapshot[i];
            let p = eval(&c, zi);
            let dp = eval(&deriv, zi);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            for (j, &zj) in snapshot.iter().enumerate() {
                if j != i {
                    s += 1.0 / (zi - zj);
                }
            }
            let denom = 1.0 - newton * s;
            let step = newton / denom;
            zs[i] = zi - step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-14 {
            break;
        }
    }
    // final Newton polish
    for z in zs.iter_mut() {
        for _ in 0..4 {
            let p = eval(&c, *z);
            let dp = eval(&deriv, *z);
            if dp.norm() > 0.0 {
                *z -= p / dp;
            }
        }
    }
    zs
}

/// Newton refinement of a real root in double-double precision from an f64
/// seed, for integer or f64 coefficients (ascending).
pub fn polish_real_root_dd(coeffs: &[f64], seed: f64) -> Dd {
    let c: Vec<Dd> = coeffs.iter().map(|&t| Dd::from_f64(t)).collect();
    let dc: Vec<Dd> = c
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &t)| t * Dd::from_f64(k as f64))
        .collect();
    let mut x = Dd::from_f64(seed);
    for _ in 0..60 {
        let mut p = Dd::ZERO;
        for &t in c.iter().rev() {
            p = p * x + t;
        }
        let mut dp = Dd::ZERO;
        for &t in dc.iter().rev() {
            dp = dp * x + t;
        }
        if dp.is_zero() {
            break;
        }
        let step = p / dp;
        x = x - step;
        if step.to_f64().abs() < 1e-31 * (x.to_f64().abs() + 1.0) {
            break;
        }
    }
    x
}

/// Newton refinement of a complex root in double-double precision.
pub fn polish_complex_root_dd(coeffs: &[f64], seed: Complex64) -> DdComplex {
    let c: Vec<DdComplex> = coeffs
        .iter()
        .map(|&t| DdComplex::new(Dd::from_f64(t), Dd::ZERO))
        .collect();
    let dc: Vec<DdComplex> = c
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &t)| t * DdComplex::from_f64(k as f64, 0.0))
        .collect();
    let mut z = DdComplex::from_f64(seed.re, seed.im);
    for _ in 0..60 {
        let mut p = DdComplex::ZERO;
        for &t in c.iter().rev() {
            p = p * z + t;
        }
        let mut dp = DdComplex::ZERO;
        for &t in dc.iter().rev() {
            dp = dp * z + t;
        }
        if dp.abs().is_zero() {
            break;
        }
        let step = p / dp;
        z = z - step;
        if step.abs().to_f64() < 1e-31 * (z.abs().to_f64() + 1.0) {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_roots_match_known_factorization() {
        // (x-1)(x+2)(x^2+1) = x^4 + x^3 - x^2 + x - 2
        let c = [-2.0, 1.0, -1.0, 1.0, 1.0];
        let mut rs = roots(&c);
        rs.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let expect = [
            Complex64::new(-2.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 0.0),
        ];
        for e in expect {
            assert!(
                rs.iter().any(|r| (r - e).norm() < 1e-10),
                "missing root {e}, got {rs:?}"
            );
        }
    }

    #[test]
    fn dd_polish_sqrt2() {
        // x^2 - 2
        let r = polish_real_root_dd(&[-2.0, 0.0, 1.0], 1.4);
        let resid = r * r - Dd::from_f64(2.0);
        assert!(resid.to_f64().abs() < 1e-30);
    }
}
