//! Regularity of an eigenvalue branch in the base parameter: continuation of
//! lambda(beta), Holder-exponent constants, increasing approximant bases from
//! truncations of the quasi-greedy expansion, and the divergence probe for
//! difference quotients that witnesses non-differentiability.

use num_complex::Complex64;
use serde::Serialize;

use crate::beta::{BetaSpec, Precision};
use crate::dd::{Dd, DdComplex};
use crate::error::{Error, Result};
use crate::expansion::beta_from_digits;
use crate::poly::{polish_complex_root_dd, polish_real_root_dd};
use crate::series::{one_minus_phi_dd, DigitKind, SpectralFunction};
use crate::transfer::linear_fit;

/// A continued eigenvalue branch over a beta interval.
#[derive(Clone, Debug, Serialize)]
pub struct EigenCurve {
    pub betas: Vec<f64>,
    pub lambda_re: Vec<f64>,
    pub lambda_im: Vec<f64>,
    pub residuals: Vec<f64>,
    pub base_beta: f64,
    pub base_lambda_re: f64,
    pub base_lambda_im: f64,
    pub multiplicity: u32,
    pub truncated_low: bool,
    pub truncated_high: bool,
}

fn newton_zero(f: &SpectralFunction, seed: Complex64) -> Result<(Complex64, f64)> {
    let mut z = seed;
    for _ in 0..60 {
        let (v, _) = f.eval(z);
        let (dv, _) = f.eval_deriv(z);
        if dv.norm() == 0.0 {
            return Err(Error::NonConvergence("zero derivative in corrector".into()));
        }
        let step = v / dv;
        z -= step;
        if step.norm() < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    let (v, tail) = f.eval(z);
    let resid = v.norm() + tail;
    if !resid.is_finite() {
        return Err(Error::NonConvergence(
            "corrector left the certified evaluation region".into(),
        ));
    }
    Ok((z, resid))
}

/// Predictor-corrector continuation of the zero 1/lambda across a beta
/// interval containing beta0. A corrector step is accepted only if it moves
/// less than half the distance to the nearest other zero of the base
/// spectrum; rejected steps halve the beta increment down to a floor, after
/// which the curve is truncated on that side.
pub fn track(
    beta0: &BetaSpec,
    lambda0: Complex64,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<EigenCurve> {
    if !(lo <= beta0.value() && beta0.value() <= hi) {
        return Err(Error::InvalidInput("interval must contain beta0".into()));
    }
    if steps == 0 {
        return Err(Error::InvalidInput("steps must be >= 1".into()));
    }
    // correct the anchor first: the supplied eigenvalue may be rounded
    let base_fn = SpectralFunction::new(beta0, DigitKind::Greedy)?;
    let (z0, anchor_resid) = newton_zero(&base_fn, 1.0 / lambda0)?;
    let lambda0 = 1.0 / z0;
    // reference set: other zeros of the base (z plane), for step acceptance
    let base_report =
        crate::spectra::locate_eigenvalues(beta0, crate::spectra::LocateOptions::default())?;
    let others: Vec<Complex64> = base_report
        .eigenvalues
        .iter()
        .map(|e| 1.0 / e.lambda())
        .filter(|z| (z - z0).norm() > 1e-6)
        .collect();
    let guard = others
        .iter()
        .map(|z| (z - z0).norm())
        .fold(f64::INFINITY, f64::min);
    let mult = base_report
        .eigenvalues
        .iter()
        .find(|e| (1.0 / e.lambda() - z0).norm() <= 1e-6)
        .map(|e| e.multiplicity)
        .unwrap_or(1);

    let grid: Vec<f64> = if steps == 1 || lo == hi {
        vec![beta0.value()]
    } else {
        (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect()
    };
    let anchor = grid
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1 - beta0.value())
                .abs()
                .partial_cmp(&(b.1 - beta0.value()).abs())
                .unwrap()
        })
        .map(|(i, _)| i)
        .unwrap();

    let mut lam = vec![None::<(Complex64, f64)>; grid.len()];
    lam[anchor] = Some((lambda0, anchor_resid));
    let mut truncated_high = false;
    let mut truncated_low = false;

    // walk outward from the anchor in both directions
    for dir in [1i64, -1i64] {
        let mut idx = anchor as i64;
        let mut cur_beta = beta0.value();
        let mut cur_z = z0;
        loop {
            let next = idx + dir;
            if next < 0 || next as usize >= grid.len() {
                break;
            }
            let target = grid[next as usize];
            match continue_to(cur_beta, cur_z, target, guard, beta0.precision()) {
                Ok((z, resid)) => {
                    lam[next as usize] = Some((1.0 / z, resid));
                    cur_beta = target;
                    cur_z = z;
                    idx = next;
                }
                Err(_) => {
                    if dir > 0 {
                        truncated_high = true;
                    } else {
                        truncated_low = true;
                    }
                    break;
                }
            }
        }
    }

    let mut betas = Vec::new();
    let mut lambda_re = Vec::new();
    let mut lambda_im = Vec::new();
    let mut residuals = Vec::new();
    for (i, b) in grid.iter().enumerate() {
        if let Some((l, r)) = lam[i] {
            betas.push(*b);
            lambda_re.push(l.re);
            lambda_im.push(l.im);
            residuals.push(r);
        }
    }
    Ok(EigenCurve {
        betas,
        lambda_re,
        lambda_im,
        residuals,
        base_beta: beta0.value(),
        base_lambda_re: lambda0.re,
        base_lambda_im: lambda0.im,
        multiplicity: mult,
        truncated_low,
        truncated_high,
    })
}

/// Continue the zero from (beta, z) to beta = target with adaptive
/// sub-stepping; returns the zero at the target.
fn continue_to(
    mut beta: f64,
    mut z: Complex64,
    target: f64,
    guard: f64,
    precision: Precision,
) -> Result<(Complex64, f64)> {
    let total = target - beta;
    if total == 0.0 {
        return Ok((z, 0.0));
    }
    let mut step = total;
    let floor = total.abs() / 1024.0;
    let mut resid = 0.0;
    while (beta - target).abs() > 1e-15 {
        let next = if (step.abs() >= (target - beta).abs()) || step == 0.0 {
            target
        } else {
            beta + step
        };
        let cand = BetaSpec::from_value(next, precision);
        let accepted = match cand {
            Ok(bspec) => {
                let f = SpectralFunction::new(&bspec, DigitKind::Greedy)?;
                match newton_zero(&f, z) {
                    Ok((znew, r)) => {
                        if (znew - z).norm() < 0.5 * guard {
                            z = znew;
                            resid = r;
                            beta = next;
                            true
                        } else {
                            false
                        }
                    }
                    Err(_) => false,
                }
            }
            // integer grid point: perturb by the smallest representable step
            Err(_) => {
                beta = next + f64::EPSILON * next;
                true
            }
        };
        if !accepted {
            step *= 0.5;
            if step.abs() < floor {
                return Err(Error::BranchLoss(format!(
                    "sub-step underflow near beta = {beta}"
                )));
            }
        } else {
            step = (target - beta).clamp(-step.abs().max(floor), step.abs().max(floor));
        }
    }
    Ok((z, resid))
}

/// The Holder-exponent constants of an eigenvalue branch at beta0.
#[derive(Clone, Debug, Serialize)]
pub struct HolderEstimate {
    pub gamma1: f64,
    pub gamma2: f64,
    /// true when the gammas are exact liminf values (Parry base), false for
    /// finite-horizon lower estimates
    pub gamma_exact: bool,
    pub alpha0: f64,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub fitted_left: Option<f64>,
    pub horizon: usize,
    pub multiplicity: u32,
}

/// gamma_1 = liminf (lim_{x->1^-} tau^n(x))^{1/n},
/// gamma_2 = liminf (1 - tau^n(1))^{1/n}; for a Parry base both orbits are
/// finite sets bounded away from the bad values, so the liminfs are exactly 1.
/// Otherwise a min over the finite horizon gives a conservative lower bound.
pub fn holder_constants(
    beta0: &BetaSpec,
    lambda0: Complex64,
    multiplicity: u32,
    horizon: usize,
) -> Result<HolderEstimate> {
    let m = multiplicity.max(1) as f64;
    let b = beta0.value();
    let scale = (b * lambda0.norm()).ln();
    if scale <= 0.0 {
        return Err(Error::DomainError(
            "|beta * lambda| <= 1: not a non-leading eigenvalue".into(),
        ));
    }
    let alpha0 = scale / (m * b.ln());
    let parry = beta0.is_exact()
        && (beta0.simple_index_of_one(256)?.is_some()
            || beta0.periodicity_of_one(256)?.is_some());
    let (gamma1, gamma2, gamma_exact) = if parry {
        (1.0, 1.0, true)
    } else {
        let left = beta0.left_orbit_of_one_f64(horizon)?;
        let fwd = beta0.orbit_of_one_f64(horizon)?;
        let mut g1 = f64::INFINITY;
        let mut g2 = f64::INFINITY;
        for n in 1..=horizon {
            let v1 = left[n];
            let v2 = 1.0 - fwd[n];
            if v1 <= 0.0 || v2 <= 0.0 {
                return Err(Error::DegenerateOrbit(format!(
                    "orbit value vanished at n = {n}"
                )));
            }
            g1 = g1.min(v1.powf(1.0 / n as f64));
            g2 = g2.min(v2.powf(1.0 / n as f64));
        }
        (g1, g2, false)
    };
    let alpha_from = |gamma: f64| -> Option<f64> {
        if gamma <= 0.0 {
            None
        } else {
            Some(scale / (m * (b.ln() + (1.0 / gamma).ln())))
        }
    };
    Ok(HolderEstimate {
        gamma1,
        gamma2,
        gamma_exact,
        alpha0,
        alpha1: alpha_from(gamma1),
        alpha2: alpha_from(gamma2),
        fitted_left: None,
        horizon,
        multiplicity: multiplicity.max(1),
    })
}

/// An approximant base from a truncation of the quasi-greedy expansion of 1.
#[derive(Clone, Debug)]
pub struct Approximant {
    /// truncation length l(N): index of the last (nonzero) digit kept
    pub length: usize,
    pub beta: BetaSpec,
}

/// The increasing sequence beta_N < beta0 solving
/// 1 = sum_{n <= l(N)} d_n(beta0, 1) beta_N^-n over nonzero-digit indices
/// l(N). Truncations defining an integer or degenerate base are skipped.
pub fn left_parry_approximants(beta0: &BetaSpec, count: usize) -> Result<Vec<Approximant>> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be >= 1".into()));
    }
    let mut horizon = 64.max(8 * count);
    loop {
        let d = beta0.quasi_digits_of_one(horizon)?;
        let mut out = Vec::with_capacity(count);
        for l in nonzero_indices(&d) {
            let word = &d[..l];
            match beta_from_digits(word, beta0.precision()) {
                Ok(b) => {
                    if b.value() < beta0.value() {
                        out.push(Approximant { length: l, beta: b });
                    }
                }
                Err(Error::InadmissibleWord(m)) => {
                    return Err(Error::InadmissibleWord(format!(
                        "quasi-greedy truncation at {l} inadmissible: {m}"
                    )))
                }
                Err(_) => {} // integer/degenerate truncation: skipped
            }
            if out.len() == count {
                return Ok(out);
            }
        }
        horizon *= 2;
        if horizon > 1 << 15 {
            return Err(Error::InsufficientDigits(format!(
                "could not build {count} approximants within horizon {horizon}"
            )));
        }
    }
}

fn nonzero_indices(d: &[u32]) -> impl Iterator<Item = usize> + '_ {
    d.iter()
        .enumerate()
        .filter(|(_, &v)| v > 0)
        .map(|(i, _)| i + 1)
}

/// One probe of the difference quotient along an approximant.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeStep {
    pub length: usize,
    pub beta_n: f64,
    pub gap: f64,
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub lambda_gap: f64,
    pub quotient: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NondiffProbe {
    pub steps: Vec<ProbeStep>,
    /// least-squares exponent of log |lambda gap| against log |beta gap|
    /// over the last (up to) 5 probes
    pub fitted_exponent: Option<f64>,
}

/// Difference quotients |lambda0 - lambda_N| / |beta0 - beta_N| along left
/// approximants. For a Parry base the probe takes whole-period truncations
/// beyond a burn-in, the canonical subsequence along which the quotients
/// blow up; everything runs in double-double because the deep gaps fall far
/// below binary64 resolution.
pub fn nondiff_probe(
    beta0: &BetaSpec,
    lambda0: Complex64,
    count: usize,
) -> Result<NondiffProbe> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be >= 1".into()));
    }
    // leading branch: lambda = 1 at every base, quotients are exactly zero
    if (lambda0 - Complex64::new(1.0, 0.0)).norm() < 1e-12 {
        let approx = left_parry_approximants(beta0, count)?;
        let steps = approx
            .iter()
            .map(|a| ProbeStep {
                length: a.length,
                beta_n: a.beta.value(),
                gap: beta0.value() - a.beta.value(),
                lambda_re: 1.0,
                lambda_im: 0.0,
                lambda_gap: 0.0,
                quotient: 0.0,
            })
            .collect();
        return Ok(NondiffProbe { steps, fitted_exponent: None });
    }

    let lengths = probe_lengths(beta0, count)?;
    // double-double base value and eigenvalue
    let (b0_dd, lam0_dd) = if beta0.is_exact() {
        let form = one_minus_phi_dd(beta0)?;
        let z = form.polish(1.0 / lambda0);
        (beta0.value_dd(), z.inv())
    } else {
        (beta0.value_dd(), DdComplex::from_f64(lambda0.re, lambda0.im))
    };

    let horizon = lengths.last().copied().unwrap_or(8) + 8;
    let d = beta0.quasi_digits_of_one(horizon)?;
    let mut steps = Vec::with_capacity(lengths.len());
    for l in lengths {
        let word = &d[..l];
        debug_assert!(word.last().map_or(false, |&t| t > 0));
        // Parry polynomial of the truncated word, exactly representable in f64
        let mut coeffs: Vec<f64> = vec![0.0; l + 1];
        coeffs[l] = 1.0;
        for (i, &w) in word.iter().enumerate() {
            coeffs[l - 1 - i] = -(w as f64);
        }
        // dominant real root: Newton from above is monotone
        let seed = newton_real_from_above(&coeffs, word[0] as f64 + 1.0);
        let bn = polish_real_root_dd(&coeffs, seed);
        // branch zero in w = beta_N / z = beta_N * lambda, seeded at beta_N * lambda0
        let seed_w = Complex64::new(bn.to_f64() * lambda0.re, bn.to_f64() * lambda0.im);
        let w = refine_then_polish(&coeffs, seed_w);
        let lam_n = w.scale(Dd::ONE / bn);
        let gap_dd = b0_dd - bn;
        let lgap_dd = (lam0_dd - lam_n).abs();
        let gap = gap_dd.to_f64();
        if gap <= 0.0 {
            return Err(Error::BranchLoss(format!(
                "approximant of length {l} not strictly below the base"
            )));
        }
        steps.push(ProbeStep {
            length: l,
            beta_n: bn.to_f64(),
            gap,
            lambda_re: lam_n.re.to_f64(),
            lambda_im: lam_n.im.to_f64(),
            lambda_gap: lgap_dd.to_f64(),
            quotient: lgap_dd.to_f64() / gap,
        });
    }
    let fitted_exponent = if steps.len() >= 3 {
        let tail = &steps[steps.len().saturating_sub(5)..];
        let pts: Vec<(f64, f64)> = tail
            .iter()
            .filter(|s| s.lambda_gap > 0.0)
            .map(|s| (s.gap.ln(), s.lambda_gap.ln()))
            .collect();
        if pts.len() >= 3 {
            Some(linear_fit(&pts).0)
        } else {
            None
        }
    } else {
        None
    };
    Ok(NondiffProbe { steps, fitted_exponent })
}

/// Truncation lengths for the probe. Parry bases use whole-period lengths
/// (shifted down to the nearest nonzero digit) after a three-period burn-in;
/// otherwise the first `count` nonzero-digit truncations serve.
fn probe_lengths(beta0: &BetaSpec, count: usize) -> Result<Vec<usize>> {
    const BURN_IN: usize = 3;
    let period = if beta0.is_exact() {
        match (
            beta0.simple_index_of_one(256)?,
            beta0.periodicity_of_one(256)?,
        ) {
            (Some(l), _) => Some(l),
            (None, Some((_, per))) => Some(per),
            _ => None,
        }
    } else {
        None
    };
    match period {
        Some(p) if p >= 1 => {
            let horizon = p * (BURN_IN + count) + p + 8;
            let d = beta0.quasi_digits_of_one(horizon)?;
            let mut out = Vec::with_capacity(count);
            for k in 1..=count {
                let target = p * (BURN_IN + k);
                let l = (1..=target)
                    .rev()
                    .find(|&i| d[i - 1] > 0)
                    .ok_or_else(|| Error::InsufficientDigits("all-zero prefix".into()))?;
                out.push(l);
            }
            out.dedup();
            if out.len() < count {
                return Err(Error::InsufficientDigits(
                    "period truncations collide; raise count".into(),
                ));
            }
            Ok(out)
        }
        _ => {
            let approx = left_parry_approximants(beta0, count)?;
            Ok(approx.into_iter().map(|a| a.length).collect())
        }
    }
}

fn newton_real_from_above(coeffs: &[f64], start: f64) -> f64 {
    let dc: Vec<f64> = crate::poly::derivative(coeffs);
    let mut x = start;
    for _ in 0..200 {
        let p = crate::poly::eval(coeffs, Complex64::new(x, 0.0)).re;
        let dp = crate::poly::eval(&dc, Complex64::new(x, 0.0)).re;
        if dp == 0.0 {
            break;
        }
        let step = p / dp;
        x -= step;
        if step.abs() < 1e-14 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

fn refine_then_polish(coeffs: &[f64], seed: Complex64) -> DdComplex {
    // f64 Newton to get near the root, then double-double polish
    let dc: Vec<f64> = crate::poly::derivative(coeffs);
    let mut z = seed;
    for _ in 0..80 {
        let p = crate::poly::eval(coeffs, z);
        let dp = crate::poly::eval(&dc, z);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        z -= step;
        if step.norm() < 1e-14 * (1.0 + z.norm()) {
            break;
        }
    }
    polish_complex_root_dd(coeffs, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{locate_eigenvalues, LocateOptions};

    fn p3() -> BetaSpec {
        BetaSpec::from_poly(&[1, -3, -2, 0, -3], 3.0, 4.0, Precision::Double).unwrap()
    }

    fn p3_lambda(b: &BetaSpec) -> Complex64 {
        locate_eigenvalues(b, LocateOptions::default())
            .unwrap()
            .non_leading()
            .next()
            .unwrap()
            .lambda()
    }

    #[test]
    fn holder_constants_parry_case() {
        let b = p3();
        let lam = p3_lambda(&b);
        let h = holder_constants(&b, lam, 1, 64).unwrap();
        assert_eq!(h.gamma1, 1.0);
        assert_eq!(h.gamma2, 1.0);
        assert!(h.gamma_exact);
        let alpha0 = (b.value() * lam.norm()).ln() / b.value().ln();
        assert!((h.alpha0 - alpha0).abs() < 1e-12);
        assert_eq!(h.alpha1, Some(h.alpha0));
        assert_eq!(h.alpha2, Some(h.alpha0));
    }

    #[test]
    fn alpha0_monotone_in_modulus() {
        let b = p3();
        let mut prev = 0.0;
        for k in 1..9 {
            let lam = Complex64::new(0.3 + 0.08 * k as f64, 0.0);
            let h = holder_constants(&b, lam, 1, 16).unwrap();
            assert!(h.alpha0 > prev);
            prev = h.alpha0;
        }
    }

    #[test]
    fn approximants_increase_to_base() {
        let b = p3();
        let approx = left_parry_approximants(&b, 5).unwrap();
        assert_eq!(approx.len(), 5);
        let mut prev = 1.0;
        for a in &approx {
            assert!(a.beta.value() > prev);
            assert!(a.beta.value() < b.value());
            prev = a.beta.value();
        }
        // gap bound: beta0 - beta_N <= cap/(1 - 1/beta0) * beta0^{1 - l(N+1)}
        // (the tail of the expansion of 1 weighted by beta^{-(n-1)})
        let e1 = b.digit_cap() as f64 / (1.0 - 1.0 / b.value());
        for w in approx.windows(2) {
            let gap = b.value() - w[0].beta.value();
            let bound = e1 * b.value().powi(1 - w[1].length as i32);
            assert!(gap <= bound * (1.0 + 1e-9), "gap {gap} above bound {bound}");
        }
    }

    #[test]
    fn track_single_point() {
        let b = p3();
        let lam = p3_lambda(&b);
        let c = track(&b, lam, b.value(), b.value(), 1).unwrap();
        assert_eq!(c.betas.len(), 1);
        assert!((c.lambda_re[0] - lam.re).abs() < 1e-12);
    }

    #[test]
    fn track_real_branch_stays_real() {
        // a float base with a strong real non-leading zero
        let bv = 2.65;
        let b = BetaSpec::from_value(bv, Precision::Double).unwrap();
        let rep = locate_eigenvalues(&b, LocateOptions::default()).unwrap();
        let lam = rep
            .non_leading()
            .find(|e| e.lambda_im.abs() < 1e-9)
            .expect("real branch")
            .lambda();
        let c = track(&b, lam, bv - 1e-6, bv + 1e-6, 15).unwrap();
        // the branch is Holder-rough, so the corrector may lose the far ends;
        // whatever is kept must be real, accurate, and honestly flagged
        assert!(c.betas.len() >= 8, "kept {} points", c.betas.len());
        assert!(c.betas.len() == 15 || c.truncated_low || c.truncated_high);
        for im in &c.lambda_im {
            assert!(im.abs() < 1e-12, "imaginary drift {im}");
        }
        for r in &c.residuals {
            assert!(*r < 1e-6, "residual {r}");
        }
    }

    #[test]
    fn track_conjugate_branches_are_conjugate() {
        let bv = 2.86;
        let b = BetaSpec::from_value(bv, Precision::Double).unwrap();
        let rep = locate_eigenvalues(&b, LocateOptions::default()).unwrap();
        let up = rep
            .non_leading()
            .find(|e| e.lambda_im > 0.0)
            .expect("complex pair")
            .lambda();
        let c1 = track(&b, up, bv - 1e-5, bv + 1e-5, 9).unwrap();
        let c2 = track(&b, up.conj(), bv - 1e-5, bv + 1e-5, 9).unwrap();
        assert_eq!(c1.betas.len(), c2.betas.len());
        for k in 0..c1.betas.len() {
            let a = Complex64::new(c1.lambda_re[k], c1.lambda_im[k]);
            let bb = Complex64::new(c2.lambda_re[k], c2.lambda_im[k]);
            assert!((a - bb.conj()).norm() < 1e-10);
        }
    }

    #[test]
    fn probe_quotients_blow_up() {
        let b = p3();
        let lam = p3_lambda(&b);
        let probe = nondiff_probe(&b, lam, 6).unwrap();
        assert_eq!(probe.steps.len(), 6);
        let q: Vec<f64> = probe.steps.iter().map(|s| s.quotient).collect();
        for w in q.windows(2) {
            assert!(w[1] > w[0], "quotients not increasing: {q:?}");
        }
        assert!(q[5] > 10.0 * q[0]);
        let alpha0 = (b.value() * lam.norm()).ln() / b.value().ln();
        let fit = probe.fitted_exponent.unwrap();
        assert!(
            (fit - alpha0).abs() < 0.25 * alpha0,
            "fitted {fit} vs alpha0 {alpha0}"
        );
    }

    #[test]
    fn leading_branch_probe_is_zero() {
        let b = p3();
        let probe = nondiff_probe(&b, Complex64::new(1.0, 0.0), 4).unwrap();
        assert!(probe.steps.iter().all(|s| s.quotient == 0.0));
    }
}
