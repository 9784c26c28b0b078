//! The function F_lambda(x) = sum a_n(x) (beta lambda)^-n: the value an
//! eigenfunctional assigns to the indicator of [0, x], normalized so that
//! F_lambda(1) = 1 at eigenvalues. Its one-sided continuity encodes whether
//! lambda is an isolated eigenvalue, which makes it an independent detector.

use num_complex::Complex64;

use crate::beta::{BetaSpec, Point};
use crate::error::{Error, Result};
use crate::expansion::{greedy_digits, quasi_greedy_digits, Simplicity};
use crate::series::{horizon_for_tol, phi_hat};

/// One evaluation of F with a certified tail bound.
#[derive(Clone, Copy, Debug)]
pub struct FunctionalEval {
    pub value: Complex64,
    pub tail_bound: f64,
    pub x: f64,
    pub lambda: Complex64,
}

fn check_lambda(beta: &BetaSpec, lambda: Complex64) -> Result<f64> {
    let q = 1.0 / (beta.value() * lambda.norm());
    if !q.is_finite() || q >= 1.0 {
        return Err(Error::DomainError(format!(
            "|lambda| = {} at or below the essential radius 1/beta",
            lambda.norm()
        )));
    }
    Ok(q)
}

fn digit_sum(digits: &[u32], u: Complex64) -> Complex64 {
    // sum a_n u^n by backward Horner
    let mut acc = Complex64::new(0.0, 0.0);
    for &d in digits.iter().rev() {
        acc = (acc + d as f64) * u;
    }
    acc
}

/// F_lambda(x) over greedy digits of x, with tail bound at most `tol` when
/// achievable at the certified digit horizon.
pub fn eval_f(beta: &BetaSpec, lambda: Complex64, x: &Point, tol: f64) -> Result<FunctionalEval> {
    let q = check_lambda(beta, lambda)?;
    let want = horizon_for_tol(beta.digit_cap(), q, tol);
    let horizon = if beta.is_exact() { want } else { beta.trust_horizon(want).max(1) };
    let seq = greedy_digits(beta, x, horizon.max(4))?;
    let u = 1.0 / (beta.value() * lambda);
    let (value, tail) = match seq.simple {
        Simplicity::Simple { index } => (digit_sum(&seq.greedy[..index], u), 0.0),
        Simplicity::NotDetected { .. } => (
            digit_sum(&seq.greedy, u),
            geometric_tail(beta.digit_cap() as f64, q, seq.greedy.len()),
        ),
    };
    Ok(FunctionalEval { value, tail_bound: tail, x: seq.point, lambda })
}

fn geometric_tail(cap: f64, q: f64, n: usize) -> f64 {
    cap * q.powi(n as i32 + 1) / (1.0 - q)
}

/// Left limit of F at x, evaluated over the quasi-greedy digits of x.
pub fn left_limit_f(
    beta: &BetaSpec,
    lambda: Complex64,
    x: &Point,
    tol: f64,
) -> Result<FunctionalEval> {
    let q = check_lambda(beta, lambda)?;
    let want = horizon_for_tol(beta.digit_cap(), q, tol);
    let horizon = if beta.is_exact() { want } else { beta.trust_horizon(want).max(1) };
    let seq = quasi_greedy_digits(beta, x, horizon.max(4))?;
    let u = 1.0 / (beta.value() * lambda);
    let value = digit_sum(&seq.quasi_greedy, u);
    let tail = geometric_tail(beta.digit_cap() as f64, q, seq.quasi_greedy.len());
    Ok(FunctionalEval { value, tail_bound: tail, x: seq.point, lambda })
}

/// |1 - phi_hat(1/lambda)|: zero exactly when lambda is an isolated
/// eigenvalue; this quantity controls the left-continuity defect of F at
/// every simple point.
pub fn continuity_residual(beta: &BetaSpec, lambda: Complex64, tol: f64) -> Result<f64> {
    if lambda.norm() == 0.0 {
        return Err(Error::DomainError("lambda must be nonzero".into()));
    }
    let q = 1.0 / (beta.value() * lambda.norm());
    let horizon = horizon_for_tol(beta.digit_cap(), q.min(0.999), tol);
    let e = phi_hat(beta, 1.0 / lambda, horizon)?;
    Ok((Complex64::new(1.0, 0.0) - e.value).norm())
}

/// One step of the divergence probe for the Lipschitz property of F.
#[derive(Clone, Copy, Debug)]
pub struct LipschitzStep {
    pub x_k: f64,
    pub f_gap: f64,
    pub x_gap: f64,
    pub quotient: f64,
}

/// Difference quotients |F(x_k) - F(x0)| / |x_k - x0| along the points
/// x_k = sum_{n <= l(k)} d_n(x0) beta^-n built from the nonzero quasi-greedy
/// digits of x0. At x0 = 0 the probe uses x_k = beta^-k, for which the
/// quotient is exactly |lambda|^-k.
pub fn lipschitz_probe(
    beta: &BetaSpec,
    lambda: Complex64,
    x0: &Point,
    depth: usize,
) -> Result<Vec<LipschitzStep>> {
    check_lambda(beta, lambda)?;
    let b = beta.value();
    let u = 1.0 / (b * lambda);
    let x0f = x0.to_f64();
    let mut out = Vec::with_capacity(depth);
    if x0f == 0.0 {
        for k in 1..=depth {
            let xk = b.powi(-(k as i32));
            let f_gap = u.powu(k as u32).norm();
            out.push(LipschitzStep {
                x_k: xk,
                f_gap,
                x_gap: xk,
                quotient: f_gap / xk,
            });
        }
        return Ok(out);
    }
    // horizon generous enough to reach `depth` nonzero digits
    let mut horizon = 64.max(depth * 8);
    let (digits, f0) = loop {
        let seq = quasi_greedy_digits(beta, x0, horizon)?;
        let nonzero = seq.quasi_greedy.iter().filter(|&&d| d > 0).count();
        if nonzero >= depth || horizon > 1 << 14 {
            if nonzero < depth {
                return Err(Error::InsufficientDigits(format!(
                    "only {nonzero} nonzero digits within horizon {horizon}"
                )));
            }
            let f0 = eval_f(beta, lambda, x0, 1e-12)?;
            break (seq.quasi_greedy, f0);
        }
        horizon *= 2;
    };
    let mut partial_f = Complex64::new(0.0, 0.0);
    let mut partial_x = 0.0f64;
    let mut upow = Complex64::new(1.0, 0.0);
    let mut bpow = 1.0f64;
    let mut hits = 0usize;
    for (i, &d) in digits.iter().enumerate() {
        upow *= u;
        bpow /= b;
        partial_f += d as f64 * upow;
        partial_x += d as f64 * bpow;
        if d > 0 {
            hits += 1;
            let f_gap = (partial_f - f0.value).norm();
            let x_gap = (x0f - partial_x).abs();
            if x_gap > 0.0 {
                out.push(LipschitzStep {
                    x_k: partial_x,
                    f_gap,
                    x_gap,
                    quotient: f_gap / x_gap,
                });
            }
            if hits == depth {
                break;
            }
        }
        let _ = i;
    }
    Ok(out)
}

/// Independent eigenvalue detector: scan a grid over the annulus
/// 1/beta < |lambda| <= 1 for local minima of the continuity residual
/// |1 - phi_hat(1/lambda)|, refine each by Newton, and keep the refined
/// points whose residual falls below the threshold. The zero set found this
/// way must coincide with the spectrum reported by the winding search.
pub fn detector_grid(beta: &BetaSpec, grid: usize, threshold: f64) -> Result<Vec<Complex64>> {
    use crate::series::{DigitKind, SpectralFunction};
    let f = SpectralFunction::new(beta, DigitKind::QuasiGreedy)?;
    let b = beta.value();
    let floor = 1.0 / b;
    let g = |lam: Complex64| -> f64 {
        let (v, _) = f.eval(1.0 / lam);
        v.norm()
    };
    let n = grid;
    let coord = |k: usize| -> f64 { -1.0 + 2.0 * k as f64 / (n - 1) as f64 };
    let mut vals = vec![f64::INFINITY; n * n];
    for i in 0..n {
        for j in 0..n {
            let lam = Complex64::new(coord(i), coord(j));
            let m = lam.norm();
            if m > floor * 1.02 && m <= 1.0 + 1e-9 {
                vals[i * n + j] = g(lam);
            }
        }
    }
    let mut found: Vec<Complex64> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = vals[i * n + j];
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let ii = i as i64 + di;
                    let jj = j as i64 + dj;
                    if ii < 0 || jj < 0 || ii >= n as i64 || jj >= n as i64 {
                        continue;
                    }
                    let w = vals[ii as usize * n + jj as usize];
                    if w < v {
                        is_min = false;
                    }
                }
            }
            if !is_min {
                continue;
            }
            // Newton on lambda -> 1 - phi_hat(1/lambda)
            let mut lam = Complex64::new(coord(i), coord(j));
            let mut ok = false;
            for _ in 0..60 {
                let (v, _) = f.eval(1.0 / lam);
                let (dv, _) = f.eval_deriv(1.0 / lam);
                let deriv = -dv / (lam * lam);
                if deriv.norm() == 0.0 {
                    break;
                }
                let step = v / deriv;
                lam -= step;
                if step.norm() < 1e-15 * (1.0 + lam.norm()) {
                    ok = true;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let m = lam.norm();
            if g(lam) <= threshold && m > floor * (1.0 + 1e-9) && m <= 1.0 + 1e-9 {
                if !found.iter().any(|z| (z - lam).norm() < 1e-6) {
                    found.push(lam);
                }
            }
        }
    }
    found.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    Ok(found)
}

/// The orbit-weighted companion rho(x) = sum tau^n(x) (beta lambda)^-n and
/// the residual of the reconstruction F(x) = x/lambda + (1/lambda - 1) rho(x).
pub fn takagi_decomposition(
    beta: &BetaSpec,
    lambda: Complex64,
    x: &Point,
    tol: f64,
) -> Result<(Complex64, f64)> {
    let q = check_lambda(beta, lambda)?;
    let want = horizon_for_tol(1, q, tol).max(4);
    let horizon = if beta.is_exact() { want } else { beta.trust_horizon(want).max(1) };
    let seq = greedy_digits(beta, x, horizon)?;
    // orbit values from digit tails (backward stable)
    let b = beta.value();
    let u = 1.0 / (b * lambda);
    let mut rho = Complex64::new(0.0, 0.0);
    let mut upow = Complex64::new(1.0, 0.0);
    for n in 1..=horizon {
        let t = crate::beta::tail_value(&seq.greedy, n, b);
        upow *= u;
        rho += t * upow;
    }
    let rho_tail = geometric_tail(1.0, q, horizon);
    let f = eval_f(beta, lambda, x, tol)?;
    let recon = seq.point / lambda + (1.0 / lambda - 1.0) * rho;
    let budget = f.tail_bound + (1.0 / lambda - 1.0).norm() * rho_tail + 1e-10;
    let err = (f.value - recon).norm();
    if err > budget.max(tol * 10.0) {
        return Err(Error::VerificationFailure {
            clause: "takagi-decomposition".into(),
            detail: format!("residual {err} above budget {budget}"),
        });
    }
    Ok((rho, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta::Precision;
    use crate::spectra::{locate_eigenvalues, LocateOptions};

    fn p3() -> BetaSpec {
        BetaSpec::from_poly(&[1, -3, -2, 0, -3], 3.0, 4.0, Precision::Double).unwrap()
    }

    fn phi_base() -> BetaSpec {
        BetaSpec::from_poly(&[1, -1, -1], 1.0, 2.0, Precision::Double).unwrap()
    }

    #[test]
    fn identity_at_leading_eigenvalue() {
        let b = BetaSpec::from_value(2.37, Precision::Double).unwrap();
        let one = Complex64::new(1.0, 0.0);
        for k in 1..50 {
            let x = k as f64 / 50.0;
            let f = eval_f(&b, one, &Point::Float(x), 1e-10).unwrap();
            assert!(
                (f.value - x).norm() <= f.tail_bound + 1e-9,
                "F_1({x}) = {} != x",
                f.value
            );
        }
    }

    #[test]
    fn f_at_zero_vanishes() {
        let b = p3();
        let f = eval_f(&b, Complex64::new(-0.4, 0.1), &Point::zero(), 1e-10).unwrap();
        assert_eq!(f.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn normalization_at_eigenvalue() {
        let b = p3();
        let rep = locate_eigenvalues(&b, LocateOptions::default()).unwrap();
        for e in rep.eigenvalues.iter() {
            let f = eval_f(&b, e.lambda(), &Point::one(), 1e-11).unwrap();
            assert!(
                (f.value - 1.0).norm() < 1e-9,
                "F(1) = {} at eigenvalue {}",
                f.value,
                e.lambda()
            );
        }
    }

    #[test]
    fn detector_zero_iff_eigenvalue() {
        let b = phi_base();
        // leading eigenvalue detected
        assert!(continuity_residual(&b, Complex64::new(1.0, 0.0), 1e-11).unwrap() < 1e-10);
        // no non-leading spectrum at the golden ratio
        assert!(continuity_residual(&b, Complex64::new(-0.5, 0.0), 1e-11).unwrap() > 0.01);
        assert!(continuity_residual(&b, Complex64::new(0.9, 0.0), 1e-11).unwrap() > 0.01);
    }

    #[test]
    fn left_limit_defect_at_non_eigenvalue() {
        let b = phi_base();
        let lam = Complex64::new(0.9, 0.0);
        // x = 1 is simple with L = 2; the left limit differs from F by
        // |1 - phi_hat(1/lambda)| * |beta lambda|^-L
        let f = eval_f(&b, lam, &Point::one(), 1e-12).unwrap();
        let g = left_limit_f(&b, lam, &Point::one(), 1e-12).unwrap();
        let defect = (f.value - g.value).norm();
        let resid = continuity_residual(&b, lam, 1e-12).unwrap();
        let expect = resid * (b.value() * lam.norm()).powi(-2);
        assert!(
            (defect - expect).abs() < 1e-8,
            "defect {defect} vs formula {expect}"
        );
    }

    #[test]
    fn lipschitz_probe_at_origin() {
        let b = p3();
        let rep = locate_eigenvalues(&b, LocateOptions::default()).unwrap();
        let lam = rep.non_leading().next().unwrap().lambda();
        let probes = lipschitz_probe(&b, lam, &Point::zero(), 12).unwrap();
        for (k, p) in probes.iter().enumerate() {
            let expect = lam.norm().powi(-(k as i32 + 1));
            assert!(
                (p.quotient - expect).abs() <= 1e-9 * expect,
                "quotient {} vs |lambda|^-{}: {}",
                p.quotient,
                k + 1,
                expect
            );
        }
    }

    #[test]
    fn detector_grid_matches_spectrum() {
        let b = p3();
        let found = detector_grid(&b, 120, 1e-9).unwrap();
        let rep = locate_eigenvalues(&b, LocateOptions::default()).unwrap();
        assert_eq!(found.len(), rep.eigenvalues.len());
        for e in &rep.eigenvalues {
            assert!(found.iter().any(|z| (z - e.lambda()).norm() < 1e-6));
        }
    }

    #[test]
    fn takagi_identity() {
        let b = p3();
        let lam = Complex64::new(-0.303, 0.0);
        for k in 1..10 {
            let x = 0.09 * k as f64;
            let (_, err) = takagi_decomposition(&b, lam, &Point::Float(x), 1e-10).unwrap();
            assert!(err < 1e-8);
        }
    }
}
