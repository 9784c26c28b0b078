//! The generating functions attached to a base: phi (greedy digits of 1),
//! phi_hat (quasi-greedy digits), psi (orbit of 1), and the dynamical zeta
//! function, all with certified truncation tails. Parry bases get exact
//! rational closed forms with rounding-only error.

use num_complex::Complex64;

use crate::beta::BetaSpec;
use crate::dd::{Dd, DdComplex};
use crate::error::{Error, Result};

/// Relative rounding allowance attached to closed-form evaluations.
const ROUND_REL: f64 = 1e-13;

/// Hard ceiling on series horizons.
const MAX_HORIZON: usize = 20_000;

/// One evaluation of a power series with a certified tail bound.
#[derive(Clone, Copy, Debug)]
pub struct SeriesEval {
    pub value: Complex64,
    pub tail_bound: f64,
    pub terms_used: usize,
}

/// A real-coefficient rational function num(z)/den(z), coefficients ascending.
#[derive(Clone, Debug)]
pub struct RationalForm {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

fn poly_eval(c: &[f64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        acc = acc * z + ck;
    }
    acc
}

fn poly_deriv(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| ck * k as f64)
        .collect()
}

impl RationalForm {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        poly_eval(&self.num, z) / poly_eval(&self.den, z)
    }

    pub fn eval_deriv(&self, z: Complex64) -> Complex64 {
        let n = poly_eval(&self.num, z);
        let d = poly_eval(&self.den, z);
        let np = poly_eval(&poly_deriv(&self.num), z);
        let dp = poly_eval(&poly_deriv(&self.den), z);
        (np * d - n * dp) / (d * d)
    }
}

/// Which digit sequence of 1 drives the series.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DigitKind {
    Greedy,
    QuasiGreedy,
}

enum Form {
    Rational(RationalForm),
    Truncated { digits: Vec<u32>, horizon: usize },
}

/// The analytic function z -> 1 - phi(z) (or the quasi-greedy variant),
/// evaluated with a certified error bound. This is the object whose zeros in
/// 1 <= |z| < beta are reciprocals of the isolated eigenvalues.
pub struct SpectralFunction {
    beta: f64,
    cap: f64,
    form: Form,
}

impl SpectralFunction {
    pub fn new(beta: &BetaSpec, kind: DigitKind) -> Result<SpectralFunction> {
        let cap = beta.digit_cap() as f64;
        // exact closed form whenever the digit sequence has finite description
        if beta.is_exact() {
            let probe = 256;
            let cache = beta.one_cache(probe)?;
            if let Some(l) = cache.simple_index {
                let word = &cache.digits[..l];
                return Ok(SpectralFunction {
                    beta: beta.value(),
                    cap,
                    form: Form::Rational(rational_form(beta.value(), word, 0, kind, l)),
                });
            }
            if let Some((pre, per)) = cache.eventually_periodic {
                let word = &cache.digits[..pre + per];
                return Ok(SpectralFunction {
                    beta: beta.value(),
                    cap,
                    form: Form::Rational(rational_form(beta.value(), word, per, kind, 0)),
                });
            }
        }
        // digits of 1 are exact for every base definition, so the horizon is
        // a pure truncation choice
        let horizon = 600;
        let digits = match kind {
            DigitKind::Greedy => beta.digits_of_one(horizon)?,
            DigitKind::QuasiGreedy => beta.quasi_digits_of_one(horizon)?,
        };
        Ok(SpectralFunction {
            beta: beta.value(),
            cap,
            form: Form::Truncated { digits, horizon },
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.form, Form::Rational(_))
    }

    /// Value together with a certified bound on the truncation/rounding error.
    pub fn eval(&self, z: Complex64) -> (Complex64, f64) {
        match &self.form {
            Form::Rational(r) => {
                let v = r.eval(z);
                (v, ROUND_REL * (1.0 + v.norm()))
            }
            Form::Truncated { digits, horizon } => {
                let w = z / self.beta;
                let mut acc = Complex64::new(0.0, 0.0);
                for &d in digits.iter().rev() {
                    acc = (acc + d as f64) * w;
                }
                let q = w.norm();
                let tail = geometric_tail(self.cap, q, *horizon) + summation_round(self.cap, q, *horizon);
                (Complex64::new(1.0, 0.0) - acc, tail)
            }
        }
    }

    /// Derivative, with its own (coarser) certified tail bound.
    pub fn eval_deriv(&self, z: Complex64) -> (Complex64, f64) {
        match &self.form {
            Form::Rational(r) => {
                let v = r.eval_deriv(z);
                (v, ROUND_REL * (1.0 + v.norm()))
            }
            Form::Truncated { digits, horizon } => {
                // d/dz [1 - sum a_n (z/b)^n] = -(1/b) sum n a_n w^{n-1}
                let w = z / self.beta;
                let mut acc = Complex64::new(0.0, 0.0);
                for (n, &d) in digits.iter().enumerate().rev() {
                    acc = acc * w + ((n + 1) as f64) * d as f64;
                }
                let q = w.norm();
                let tail = deriv_tail(self.cap, q, *horizon) / self.beta;
                (-acc / self.beta, tail)
            }
        }
    }

    /// Largest radius at which the certified error stays below `tol`
    /// (capped at 0.97 beta, where honest evaluation becomes hopeless).
    pub fn certified_radius(&self, tol: f64) -> f64 {
        let hard = 0.97 * self.beta;
        match &self.form {
            Form::Rational(_) => hard,
            Form::Truncated { horizon, .. } => {
                let mut lo = 0.0f64;
                let mut hi = hard;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if geometric_tail(self.cap, mid / self.beta, *horizon) <= tol {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        }
    }
}

/// cap * q^{N+1} / (1-q)
fn geometric_tail(cap: f64, q: f64, n: usize) -> f64 {
    if q >= 1.0 {
        return f64::INFINITY;
    }
    cap * q.powi(n as i32 + 1) / (1.0 - q)
}

/// Bound on the floating-point summation error of an n-term Horner pass
/// whose partial sums are bounded by cap/(1-q).
fn summation_round(cap: f64, q: f64, n: usize) -> f64 {
    if q >= 1.0 {
        return f64::INFINITY;
    }
    4.0 * n as f64 * f64::EPSILON * (1.0 + cap / (1.0 - q))
}

/// cap * sum_{n>N} n q^{n-1} = cap * q^N ((N+1)(1-q) + q) / (1-q)^2
fn deriv_tail(cap: f64, q: f64, n: usize) -> f64 {
    if q >= 1.0 {
        return f64::INFINITY;
    }
    cap * q.powi(n as i32) * ((n as f64 + 1.0) * (1.0 - q) + q) / ((1.0 - q) * (1.0 - q))
}

/// Closed rational form of 1 - phi for a terminating (period = 0) or
/// eventually periodic digit sequence of 1.
fn rational_form(beta: f64, word: &[u32], period: usize, kind: DigitKind, simple_l: usize) -> RationalForm {
    let bw = |n: usize| beta.powi(-(n as i32));
    match (kind, period) {
        (DigitKind::Greedy, 0) => {
            // 1 - sum_{n<=L} a_n (z/b)^n
            let mut num = vec![0.0; word.len() + 1];
            num[0] = 1.0;
            for (i, &a) in word.iter().enumerate() {
                num[i + 1] = -(a as f64) * bw(i + 1);
            }
            RationalForm { num, den: vec![1.0] }
        }
        (DigitKind::QuasiGreedy, 0) => {
            // simple base: 1 - phi_hat = (1 - phi) / (1 - (z/b)^L)
            let l = simple_l;
            let base = rational_form(beta, word, 0, DigitKind::Greedy, l);
            let mut den = vec![0.0; l + 1];
            den[0] = 1.0;
            den[l] = -bw(l);
            RationalForm { num: base.num, den }
        }
        (_, per) => {
            // eventually periodic digits (quasi-greedy equals greedy here):
            // phi = A(z) + B(z)/(1 - (z/b)^per), with A over the preperiod;
            // 1 - phi = ((1 - A)(1 - v) - B)/(1 - v)
            let pre = word.len() - per;
            let mut one_minus_a = vec![0.0; pre + 1];
            one_minus_a[0] = 1.0;
            for i in 0..pre {
                one_minus_a[i + 1] = -(word[i] as f64) * bw(i + 1);
            }
            let mut b = vec![0.0; word.len() + 1];
            for i in pre..word.len() {
                b[i + 1] = word[i] as f64 * bw(i + 1);
            }
            let mut one_minus_v = vec![0.0; per + 1];
            one_minus_v[0] = 1.0;
            one_minus_v[per] = -bw(per);
            // num = (1-A)(1-v) - B
            let mut num = vec![0.0; one_minus_a.len() + per];
            for (i, &ai) in one_minus_a.iter().enumerate() {
                for (j, &vj) in one_minus_v.iter().enumerate() {
                    num[i + j] += ai * vj;
                }
            }
            for (i, &bi) in b.iter().enumerate() {
                if i < num.len() {
                    num[i] -= bi;
                } else {
                    num.push(-bi);
                }
            }
            RationalForm { num, den: one_minus_v }
        }
    }
}

fn require_inside(beta: &BetaSpec, z: Complex64) -> Result<()> {
    if z.norm() > 0.97 * beta.value() {
        return Err(Error::DomainError(format!(
            "|z| = {} beyond the certified evaluation region 0.97*beta = {}",
            z.norm(),
            0.97 * beta.value()
        )));
    }
    Ok(())
}

/// phi(z) = sum a_n(1) (z/beta)^n with a certified tail bound.
pub fn phi(beta: &BetaSpec, z: Complex64, horizon: usize) -> Result<SeriesEval> {
    eval_phi_kind(beta, z, horizon, DigitKind::Greedy)
}

/// phi_hat(z): the quasi-greedy counterpart.
pub fn phi_hat(beta: &BetaSpec, z: Complex64, horizon: usize) -> Result<SeriesEval> {
    eval_phi_kind(beta, z, horizon, DigitKind::QuasiGreedy)
}

fn eval_phi_kind(
    beta: &BetaSpec,
    z: Complex64,
    horizon: usize,
    kind: DigitKind,
) -> Result<SeriesEval> {
    let f = SpectralFunction::new(beta, kind)?;
    if f.is_rational() {
        // closed form: defined beyond the series radius as well
        let (omp, tail) = f.eval(z);
        return Ok(SeriesEval {
            value: Complex64::new(1.0, 0.0) - omp,
            tail_bound: tail,
            terms_used: 0,
        });
    }
    require_inside(beta, z)?;
    let n = horizon.min(MAX_HORIZON).max(1);
    let digits = match kind {
        DigitKind::Greedy => beta.digits_of_one(n)?,
        DigitKind::QuasiGreedy => beta.quasi_digits_of_one(n)?,
    };
    let w = z / beta.value();
    let mut acc = Complex64::new(0.0, 0.0);
    for &d in digits.iter().rev() {
        acc = (acc + d as f64) * w;
    }
    Ok(SeriesEval {
        value: acc,
        tail_bound: geometric_tail(beta.digit_cap() as f64, w.norm(), n)
            + summation_round(beta.digit_cap() as f64, w.norm(), n),
        terms_used: n,
    })
}

/// psi(z) = 1 + sum tau^n(1) (z/beta)^n, tail bounded by coefficient bound 1.
pub fn psi(beta: &BetaSpec, z: Complex64, horizon: usize) -> Result<SeriesEval> {
    require_inside(beta, z)?;
    let n = horizon.min(MAX_HORIZON).max(1);
    let orbit = beta.orbit_of_one_f64(n)?;
    let w = z / beta.value();
    let mut acc = Complex64::new(0.0, 0.0);
    for &t in orbit.iter().skip(1).rev() {
        acc = (acc + t) * w;
    }
    let q = w.norm();
    Ok(SeriesEval {
        value: acc + 1.0,
        // coefficient bound 1 for the orbit series; orbit values carry an
        // extra reconstruction error absorbed in the rounding allowance
        tail_bound: geometric_tail(1.0, q, n) + 4.0 * summation_round(1.0, q, n),
        terms_used: n,
    })
}

/// zeta(z) = p(z) / (1 - phi(z)) on the unit disk, where p(z) = 1 - (z/b)^L(1)
/// for a simple base and 1 otherwise.
pub fn zeta(beta: &BetaSpec, z: Complex64, horizon: usize) -> Result<Complex64> {
    if z.norm() >= 1.0 {
        return Err(Error::DomainError("zeta is evaluated on |z| < 1".into()));
    }
    let p = zeta_numerator(beta, z)?;
    let phi_v = phi(beta, z, horizon)?;
    let denom = Complex64::new(1.0, 0.0) - phi_v.value;
    if denom.norm() <= phi_v.tail_bound {
        return Err(Error::NearPole);
    }
    Ok(p / denom)
}

fn zeta_numerator(beta: &BetaSpec, z: Complex64) -> Result<Complex64> {
    let horizon = 256;
    match beta.simple_index_of_one(horizon)? {
        Some(l) => Ok(Complex64::new(1.0, 0.0) - (z / beta.value()).powu(l as u32)),
        None => Ok(Complex64::new(1.0, 0.0)),
    }
}

/// Number of fixed points of tau^n. A fixed point whose digit path is the
/// word (a_1, ..., a_n) equals (sum_i a_i beta^{n-i}) / (beta^n - 1), so the
/// candidates are digit words; each is verified exactly by checking that the
/// digit sequence of the candidate reproduces the word.
pub fn fix_count(beta: &BetaSpec, n: u32) -> Result<u64> {
    if n == 0 || n > 8 {
        return Err(Error::TooLarge(format!("fixed-point order {n} not in 1..=8")));
    }
    if let Some(c) = beta.cached_fix_count(n) {
        return Ok(c);
    }
    let cap = beta.digit_cap() as u64;
    let words = (cap + 1).pow(n);
    if words >= 1_000_000 {
        return Err(Error::TooLarge(format!(
            "({cap}+1)^{n} = {words} candidate words to enumerate"
        )));
    }
    // fast screen in f64: the error of the n-step float recursion is below
    // margin, so words whose candidate stays margin-far from every branch
    // boundary are decided here; the rest go to exact arithmetic
    let bv = beta.value();
    let margin = 1e-7;
    let denom_f = bv.powi(n as i32) - 1.0;
    let mut count = 0u64;
    let mut ambiguous: Vec<Vec<u32>> = Vec::new();
    for w in 0..words {
        let word = unpack_word(w, cap as u32, n);
        let mut kf = 0.0f64;
        for &a in &word {
            kf = kf * bv + a as f64;
        }
        let x = kf / denom_f;
        if x < -margin || x > 1.0 - margin {
            if x < margin || (x - 1.0).abs() < margin {
                ambiguous.push(word);
            }
            continue;
        }
        let mut y = x;
        let mut clear = true;
        let mut matches = true;
        for &a in &word {
            let by = bv * y;
            let fl = by.floor();
            if (by - by.round()).abs() < margin {
                clear = false;
                break;
            }
            if fl as i64 != a as i64 {
                matches = false;
                break;
            }
            y = by - fl;
        }
        if !clear {
            ambiguous.push(word);
        } else if matches {
            count += 1;
        }
    }
    count += fix_count_exact(beta, &ambiguous)?;
    beta.store_fix_count(n, count);
    return Ok(count);
}

/// Exact verification of boundary-ambiguous candidate words.
fn fix_count_exact(beta: &BetaSpec, words: &[Vec<u32>]) -> Result<u64> {
    if words.is_empty() {
        return Ok(0);
    }
    let n = words[0].len() as u32;
    let mut count = 0u64;
    match beta.field() {
        Some(field) => {
            use crate::algebraic::AlgElem;
            let root = AlgElem::root(field);
            let denom_inv = (&root.pow(n) - &AlgElem::one(field)).inv()?;
            let one = AlgElem::one(field);
            for word in words {
                // K = sum a_i beta^{n-i} by Horner
                let mut k = AlgElem::zero(field);
                for &a in word {
                    k = &(&k * &root) + &AlgElem::from_i64(field, a as i64);
                }
                let x = &k * &denom_inv;
                if x.sign() < 0 || x.cmp_elem(&one) != std::cmp::Ordering::Less {
                    continue;
                }
                let mut y = x;
                let mut ok = true;
                for &a in word {
                    let by = &root * &y;
                    let fl = by.floor_i64();
                    if fl != a as i64 {
                        ok = false;
                        break;
                    }
                    y = &by - &AlgElem::from_i64(field, fl);
                }
                if ok {
                    count += 1;
                }
            }
        }
        None => {
            use num_bigint::BigInt;
            use num_rational::BigRational;
            use num_traits::{One, Zero};
            let b = BigRational::from_float(beta.value()).unwrap();
            let mut bpow = BigRational::one();
            for _ in 0..n {
                bpow *= &b;
            }
            let denom = &bpow - BigRational::one();
            for word in words {
                let mut k = BigRational::zero();
                for &a in word {
                    k = k * &b + BigRational::from_integer(BigInt::from(a));
                }
                if k < BigRational::zero() || k >= denom {
                    continue;
                }
                let x = &k / &denom;
                let mut y = x.clone();
                let mut ok = true;
                for &a in word {
                    let by = &b * &y;
                    let fl = by.floor();
                    if fl != BigRational::from_integer(BigInt::from(a)) {
                        ok = false;
                        break;
                    }
                    y = &by - &fl;
                }
                if ok {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

fn unpack_word(mut w: u64, cap: u32, n: u32) -> Vec<u32> {
    let base = cap as u64 + 1;
    let mut out = vec![0u32; n as usize];
    for slot in out.iter_mut().rev() {
        *slot = (w % base) as u32;
        w /= base;
    }
    out
}

/// Truncated exponential form of the dynamical zeta function, used as an
/// independent oracle for `zeta`. Returns the value and a certified bound on
/// the truncation effect.
pub fn zeta_series(beta: &BetaSpec, z: Complex64, n_max: u32) -> Result<(Complex64, f64)> {
    if z.norm() >= 1.0 {
        return Err(Error::DomainError("zeta series needs |z| < 1".into()));
    }
    if n_max == 0 || n_max > 8 {
        return Err(Error::TooLarge("n_max must be in 1..=8".into()));
    }
    let mut s = Complex64::new(0.0, 0.0);
    for n in 1..=n_max {
        let cnt = fix_count(beta, n)? as f64;
        s += z.powu(n) / n as f64 * (cnt / beta.value().powi(n as i32));
    }
    let v = s.exp();
    // #Fix(tau^n) <= beta^n + 1, so the dropped exponent mass is at most
    // (1 + beta^-(N+1)) |z|^{N+1} / ((N+1)(1-|z|))
    let q = z.norm();
    let nn = n_max as f64;
    let tail_exp =
        (1.0 + beta.value().powi(-(n_max as i32 + 1))) * q.powi(n_max as i32 + 1) / ((nn + 1.0) * (1.0 - q));
    let bound = v.norm() * (tail_exp.exp() - 1.0);
    Ok((v, bound))
}

/// Double-double rational form of 1 - phi for a Parry base, for eigenvalue
/// polishing beyond f64 accuracy.
pub struct RationalFormDd {
    pub num: Vec<Dd>,
    pub den: Vec<Dd>,
}

impl RationalFormDd {
    pub fn eval(&self, z: DdComplex) -> DdComplex {
        let n = Self::poly(&self.num, z);
        let d = Self::poly(&self.den, z);
        n / d
    }

    pub fn eval_deriv(&self, z: DdComplex) -> DdComplex {
        let n = Self::poly(&self.num, z);
        let d = Self::poly(&self.den, z);
        let np = Self::poly(&Self::deriv(&self.num), z);
        let dp = Self::poly(&Self::deriv(&self.den), z);
        (np * d - n * dp) / (d * d)
    }

    fn poly(c: &[Dd], z: DdComplex) -> DdComplex {
        let mut acc = DdComplex::ZERO;
        for &ck in c.iter().rev() {
            acc = acc * z + DdComplex::new(ck, Dd::ZERO);
        }
        acc
    }

    fn deriv(c: &[Dd]) -> Vec<Dd> {
        if c.len() <= 1 {
            return vec![Dd::ZERO];
        }
        c.iter()
            .enumerate()
            .skip(1)
            .map(|(k, &ck)| ck * Dd::from_f64(k as f64))
            .collect()
    }

    /// Newton-polish a zero of 1 - phi from an f64 seed.
    pub fn polish(&self, seed: Complex64) -> DdComplex {
        let mut z = DdComplex::from_f64(seed.re, seed.im);
        for _ in 0..40 {
            let f = self.eval(z);
            let fp = self.eval_deriv(z);
            let step = f / fp;
            z = z - step;
            if step.abs().to_f64() < 1e-30 * (z.abs().to_f64() + 1.0) {
                break;
            }
        }
        z
    }
}

/// Build the double-double closed form of 1 - phi for a Parry base.
pub fn one_minus_phi_dd(beta: &BetaSpec) -> Result<RationalFormDd> {
    if !beta.is_exact() {
        return Err(Error::InvalidInput(
            "double-double closed form needs a polynomial-defined base".into(),
        ));
    }
    let cache = beta.one_cache(256)?;
    let b = beta.value_dd();
    let binv = Dd::ONE / b;
    if let Some(l) = cache.simple_index {
        let mut num = vec![Dd::ZERO; l + 1];
        num[0] = Dd::ONE;
        let mut p = Dd::ONE;
        for i in 0..l {
            p = p * binv;
            num[i + 1] = -(Dd::from_f64(cache.digits[i] as f64) * p);
        }
        return Ok(RationalFormDd { num, den: vec![Dd::ONE] });
    }
    if let Some((pre, per)) = cache.eventually_periodic {
        let word = &cache.digits[..pre + per];
        let mut one_minus_a = vec![Dd::ZERO; pre + 1];
        one_minus_a[0] = Dd::ONE;
        let mut p = Dd::ONE;
        for i in 0..pre {
            p = p * binv;
            one_minus_a[i + 1] = -(Dd::from_f64(word[i] as f64) * p);
        }
        let mut b_coef = vec![Dd::ZERO; word.len() + 1];
        let mut p = binv.powi(pre as u32);
        for i in pre..word.len() {
            p = p * binv;
            b_coef[i + 1] = Dd::from_f64(word[i] as f64) * p;
        }
        let mut one_minus_v = vec![Dd::ZERO; per + 1];
        one_minus_v[0] = Dd::ONE;
        one_minus_v[per] = -binv.powi(per as u32);
        let mut num = vec![Dd::ZERO; one_minus_a.len() + per];
        for (i, &ai) in one_minus_a.iter().enumerate() {
            for (j, &vj) in one_minus_v.iter().enumerate() {
                num[i + j] = num[i + j] + ai * vj;
            }
        }
        for (i, &bi) in b_coef.iter().enumerate() {
            if i < num.len() {
                num[i] = num[i] - bi;
            } else {
                num.push(-bi);
            }
        }
        return Ok(RationalFormDd { num, den: one_minus_v });
    }
    Err(Error::InvalidInput(
        "digit sequence of 1 not detected eventually periodic".into(),
    ))
}

/// Smallest horizon with geometric tail below tol at radius ratio q.
pub fn horizon_for_tol(cap: u32, q: f64, tol: f64) -> usize {
    if q <= 0.0 {
        return 1;
    }
    if q >= 1.0 {
        return MAX_HORIZON;
    }
    let n = ((tol * (1.0 - q) / cap as f64).ln() / q.ln()).ceil();
    if n.is_finite() && n > 0.0 {
        (n as usize).clamp(1, MAX_HORIZON)
    } else {
        1
    }
}
