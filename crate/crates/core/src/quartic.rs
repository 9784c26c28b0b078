//! Three quartic families of bases with fully known digit profiles and
//! spectra, used as ground truth: an independent quartic solver supplies the
//! expected non-leading eigenvalues, and a verification harness checks the
//! digit, spectral, and factorization claims across modules.

use num_complex::Complex64;
use serde::Serialize;

use crate::beta::{BetaSpec, Precision};
use crate::dd::{Dd, DdComplex};
use crate::error::{Error, Result};
use crate::poly::{polish_complex_root_dd, polish_real_root_dd, roots};
use crate::series::phi;
use crate::spectra::{locate_eigenvalues, LocateOptions};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Family {
    P,
    Q,
    R,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P" | "p" => Ok(Family::P),
            "Q" | "q" => Ok(Family::Q),
            "R" | "r" => Ok(Family::R),
            other => Err(Error::InvalidInput(format!("unknown family `{other}`"))),
        }
    }
}

/// One member of a quartic family: the base lives in (n, n+1).
#[derive(Copy, Clone, Debug, Serialize)]
pub struct QuarticFamily {
    pub family: Family,
    pub n: u32,
}

impl QuarticFamily {
    pub fn new(family: Family, n: u32) -> Result<QuarticFamily> {
        let min = match family {
            Family::P => 3,
            Family::Q | Family::R => 4,
        };
        if n < min {
            return Err(Error::InvalidInput(format!(
                "family {family:?} requires n >= {min}, got {n}"
            )));
        }
        Ok(QuarticFamily { family, n })
    }

    /// Integer coefficients, leading term first.
    pub fn coefficients(&self) -> [i64; 5] {
        let n = self.n as i64;
        match self.family {
            // x^4 - n x^3 - (n-1) x^2 - n
            Family::P => [1, -n, -(n - 1), 0, -n],
            // x^4 - n x^3 - (n-1) x - n
            Family::Q => [1, -n, 0, -(n - 1), -n],
            // x^4 - (n+1) x^3 + n x - (n-1)
            Family::R => [1, -(n + 1), 0, n, -(n - 1)],
        }
    }

    pub fn beta_spec(&self, precision: Precision) -> Result<BetaSpec> {
        let c = self.coefficients();
        BetaSpec::from_poly(&c, self.n as f64, self.n as f64 + 1.0, precision)
    }
}

/// All four roots of the quartic, polished to double-double: the base, the
/// second real root, and the conjugate pair (positive imaginary part first).
#[derive(Clone, Debug)]
pub struct QuarticRoots {
    pub beta: Dd,
    pub real_other: Dd,
    pub pair: (DdComplex, DdComplex),
}

pub fn quartic_roots(fam: &QuarticFamily) -> Result<QuarticRoots> {
    let c = fam.coefficients();
    let asc: Vec<f64> = c.iter().rev().map(|&t| t as f64).collect();
    let rs = roots(&asc);
    let mut reals: Vec<f64> = rs.iter().filter(|z| z.im.abs() < 1e-7).map(|z| z.re).collect();
    let complexes: Vec<Complex64> = rs.iter().filter(|z| z.im > 1e-7).cloned().collect();
    if reals.len() != 2 || complexes.len() != 1 {
        return Err(Error::NonConvergence(format!(
            "unexpected root structure for {fam:?}: {rs:?}"
        )));
    }
    reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let beta_seed = reals[1];
    let other_seed = reals[0];
    if !(fam.n as f64 ) .lt(&beta_seed) || beta_seed >= fam.n as f64 + 1.0 {
        return Err(Error::NonConvergence(format!(
            "dominant root {beta_seed} outside ({}, {})",
            fam.n,
            fam.n + 1
        )));
    }
    let beta = polish_real_root_dd(&asc, beta_seed);
    let real_other = polish_real_root_dd(&asc, other_seed);
    let up = polish_complex_root_dd(&asc, complexes[0]);
    Ok(QuarticRoots { beta, real_other, pair: (up, up.conj()) })
}

/// Vieta residuals of a computed root set (internal solver check).
pub fn vieta_residual(fam: &QuarticFamily, r: &QuarticRoots) -> (f64, f64) {
    let c = fam.coefficients();
    let sum = r.beta + r.real_other + r.pair.0.re + r.pair.1.re;
    let sum_res = (sum.to_f64() + c[1] as f64).abs();
    let prod_c = r.pair.0 * r.pair.1;
    let prod = prod_c.re * r.beta * r.real_other;
    let prod_res = (prod.to_f64() - c[4] as f64).abs();
    (sum_res, prod_res)
}

/// What the family predicts: the digit profile of 1 and the non-leading
/// spectrum as quartic roots over beta.
#[derive(Clone, Debug, Serialize)]
pub struct ExpectedProfile {
    /// leading digits of the expansion of 1
    pub head: Vec<u32>,
    /// digit repeated forever after the head (None: expansion terminates)
    pub repeating: Option<u32>,
    pub simple: bool,
    pub nonleading_count: usize,
    pub nonleading_real: bool,
}

pub fn expected_profile(fam: &QuarticFamily) -> ExpectedProfile {
    let n = fam.n;
    match fam.family {
        Family::P => ExpectedProfile {
            head: vec![n, n - 1, 0, n],
            repeating: None,
            simple: true,
            nonleading_count: 1,
            nonleading_real: true,
        },
        Family::Q => ExpectedProfile {
            head: vec![n, 0, n - 1, n],
            repeating: None,
            simple: true,
            nonleading_count: 2,
            nonleading_real: false,
        },
        Family::R => ExpectedProfile {
            head: vec![n, n, 0],
            repeating: Some(n - 1),
            simple: false,
            nonleading_count: 1,
            nonleading_real: true,
        },
    }
}

/// The expected non-leading eigenvalues: r / beta over the quartic roots r
/// with 1 < |r| < beta (the factorization of 1 - phi forces exactly these).
pub fn expected_nonleading(r: &QuarticRoots) -> Vec<Complex64> {
    let beta = r.beta.to_f64();
    let mut out = Vec::new();
    let cand = [
        DdComplex::new(r.real_other, Dd::ZERO),
        r.pair.0,
        r.pair.1,
    ];
    for c in cand {
        let m = c.abs().to_f64();
        if 1.0 < m && m < beta {
            out.push((c.scale(Dd::ONE / r.beta)).to_c64());
        }
    }
    out.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    out
}

/// Report of the four verification clauses for one family member.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub family: Family,
    pub n: u32,
    pub beta: f64,
    pub digits_checked: usize,
    pub digits_ok: bool,
    pub eigenvalues_ok: bool,
    pub eigenvalue_error: f64,
    pub factorization_ok: bool,
    pub factorization_error: f64,
    pub simplicity_ok: bool,
    pub subleading_modulus: Option<f64>,
}

impl VerifyReport {
    pub fn all_ok(&self) -> bool {
        self.digits_ok && self.eigenvalues_ok && self.factorization_ok && self.simplicity_ok
    }
}

/// Run the four clauses: (a) exact digits of 1 match the predicted profile,
/// (b) located non-leading eigenvalues match the quartic-root oracle to tol,
/// (c) the factorization identity holds at 50 sample points, (d) every
/// sub-leading eigenvalue is simple.
pub fn verify_family(fam: &QuarticFamily, tol: f64) -> Result<VerifyReport> {
    let beta = fam.beta_spec(Precision::Double)?;
    let profile = expected_profile(fam);
    let qr = quartic_roots(fam)?;

    // (a) digit profile, at least 20 repeating digits for the periodic family
    let check_len = profile.head.len() + if profile.repeating.is_some() { 20 } else { 4 };
    let digits = beta.digits_of_one(check_len)?;
    let mut digits_ok = digits[..profile.head.len()] == profile.head[..];
    match profile.repeating {
        Some(rep) => {
            digits_ok &= digits[profile.head.len()..].iter().all(|&d| d == rep);
            digits_ok &= beta.simple_index_of_one(64)?.is_none();
            digits_ok &= beta.periodicity_of_one(64)?.is_some();
        }
        None => {
            digits_ok &= digits[profile.head.len()..].iter().all(|&d| d == 0);
            let idx = beta.simple_index_of_one(64)?;
            digits_ok &= idx == Some(profile.head.len());
        }
    }

    // (b) spectrum against the oracle, matched by nearest neighbor
    let report = locate_eigenvalues(&beta, LocateOptions { tol: 1e-10, ceiling: 0.95 })?;
    let located: Vec<Complex64> = report.non_leading().map(|e| e.lambda()).collect();
    let expected = expected_nonleading(&qr);
    let mut eigenvalue_error = 0.0f64;
    let eigenvalues_ok = located.len() == expected.len() && {
        let mut ok = located.len() == profile.nonleading_count;
        let mut pool = located.clone();
        for e in &expected {
            let (k, d) = pool
                .iter()
                .enumerate()
                .map(|(k, l)| (k, (l - e).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            eigenvalue_error = eigenvalue_error.max(d);
            ok &= d <= tol;
            pool.swap_remove(k);
        }
        if profile.nonleading_real {
            ok &= located.iter().all(|l| l.im.abs() <= tol && l.re < 0.0);
        }
        ok
    };

    // (c) factorization identity at 50 real sample points with 1 < |x| < beta
    let bv = beta.value();
    let coeffs = fam.coefficients();
    let poly_at = |x: f64| -> f64 {
        coeffs.iter().fold(0.0, |acc, &c| acc * x + c as f64)
    };
    let mut factorization_error = 0.0f64;
    for k in 0..50 {
        let x = if k < 25 {
            1.05 + (0.95 * bv - 1.1) * k as f64 / 24.0
        } else {
            -(1.05 + (0.95 * bv - 1.1) * (k - 25) as f64 / 24.0)
        };
        let z = Complex64::new(bv / x, 0.0);
        let ph = phi(&beta, z, 2000)?;
        let one_minus = Complex64::new(1.0, 0.0) - ph.value;
        let lhs = poly_at(x);
        let scale = match fam.family {
            Family::P | Family::Q => x.powi(4),
            Family::R => x.powi(4) - x.powi(3),
        };
        let rhs = scale * one_minus.re;
        let denom = 1.0 + lhs.abs();
        factorization_error = factorization_error.max((lhs - rhs).abs() / denom);
    }
    let factorization_ok = factorization_error <= tol.max(1e-9) * 10.0;

    // (d) sub-leading simplicity
    let simplicity_ok = report.non_leading().all(|e| e.multiplicity == 1);

    Ok(VerifyReport {
        family: fam.family,
        n: fam.n,
        beta: bv,
        digits_checked: check_len,
        digits_ok,
        eigenvalues_ok,
        eigenvalue_error,
        factorization_ok,
        factorization_error,
        simplicity_ok,
        subleading_modulus: report.subleading_modulus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_guards() {
        assert!(QuarticFamily::new(Family::P, 2).is_err());
        assert!(QuarticFamily::new(Family::P, 3).is_ok());
        assert!(QuarticFamily::new(Family::Q, 3).is_err());
        assert!(QuarticFamily::new(Family::R, 4).is_ok());
    }

    #[test]
    fn root_structure_and_vieta() {
        for (fam, modulus_inside) in [
            (QuarticFamily::new(Family::P, 3).unwrap(), true),
            (QuarticFamily::new(Family::Q, 4).unwrap(), false),
            (QuarticFamily::new(Family::R, 4).unwrap(), true),
        ] {
            let r = quartic_roots(&fam).unwrap();
            let (s, p) = vieta_residual(&fam, &r);
            assert!(s < 1e-9 && p < 1e-8, "vieta residuals {s}, {p}");
            let g = r.pair.0.abs().to_f64();
            if modulus_inside {
                assert!(g < 1.0, "pair modulus {g}");
            } else {
                assert!(g > 1.0, "pair modulus {g}");
            }
            let b = r.beta.to_f64();
            assert!(fam.n as f64 <= b && b <= fam.n as f64 + 1.0);
        }
    }

    #[test]
    fn expected_nonleading_strictly_inside() {
        for fam in [
            QuarticFamily::new(Family::P, 4).unwrap(),
            QuarticFamily::new(Family::Q, 5).unwrap(),
            QuarticFamily::new(Family::R, 6).unwrap(),
        ] {
            let r = quartic_roots(&fam).unwrap();
            let b = r.beta.to_f64();
            for lam in expected_nonleading(&r) {
                let m = lam.norm();
                assert!(1.0 / b < m && m < 1.0);
            }
        }
    }

    #[test]
    fn verify_smallest_members() {
        for fam in [
            QuarticFamily::new(Family::P, 3).unwrap(),
            QuarticFamily::new(Family::Q, 4).unwrap(),
            QuarticFamily::new(Family::R, 4).unwrap(),
        ] {
            let rep = verify_family(&fam, 1e-9).unwrap();
            assert!(rep.all_ok(), "{rep:?}");
        }
    }
}
