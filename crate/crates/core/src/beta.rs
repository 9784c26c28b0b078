//! The base type: a real number beta > 1 with a chosen working precision and,
//! optionally, an exact definition as the root of an integer polynomial.
//!
//! Digit extraction runs in the configured float precision and escalates
//! automatically when a floor decision falls inside the certified error
//! radius: binary64 -> double-double -> exact arithmetic (algebraic when the
//! base is polynomial-defined, big-rational otherwise, since a float base is
//! itself an exact rational).

use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::algebraic::{rat_to_dd, AlgElem, NumberField};
use crate::dd::Dd;
use crate::error::{Error, Result};

/// Working float precision for digit recursions and series sums.
#[derive(Copy, Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Precision {
    Double,
    DoubleDouble,
}

impl Precision {
    pub fn bits(self) -> u32 {
        match self {
            Precision::Double => 53,
            Precision::DoubleDouble => 106,
        }
    }
}

impl std::str::FromStr for Precision {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double" => Ok(Precision::Double),
            "double-double" | "dd" => Ok(Precision::DoubleDouble),
            other => Err(Error::InvalidInput(format!("unknown precision `{other}`"))),
        }
    }
}

const GUARD_DIGITS: usize = 8;

/// A point of [0,1] handed to digit routines.
#[derive(Clone, Debug)]
pub enum Point {
    /// Exact element of the base's number field (polynomial-defined base only).
    Exact(AlgElem),
    /// Exact rational.
    Rational(BigRational),
    /// Binary64 value, treated as the exact rational it represents when an
    /// exact decision is required.
    Float(f64),
}

impl Point {
    pub fn one() -> Self {
        Point::Rational(BigRational::from_integer(BigInt::from(1)))
    }

    pub fn zero() -> Self {
        Point::Rational(BigRational::from_integer(BigInt::from(0)))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Point::Exact(e) => e.to_f64(),
            Point::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Point::Float(x) => *x,
        }
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::Float(x)
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Definition {
    Numeric(BigRational),
    Polynomial(Arc<NumberField>),
}

/// Result of one digit step.
pub(crate) enum StepOutcome {
    Digit(u32),
    /// The scaled value was exactly an integer >= 1: the orbit hits zero and
    /// the point is simple with index = current position.
    ExactHit(u32),
}

/// Orbit engine carrying the running remainder in one of the precisions.
pub(crate) enum Engine {
    F64 { beta: f64, y: f64, err: f64 },
    Dd { beta: Dd, y: Dd, err: f64 },
    Rat { beta: BigRational, y: BigRational },
    /// Exact engine for dyadic data (every f64 is a dyadic rational):
    /// y = num / 2^e with no gcd reduction, so steps stay linear-time.
    Dyadic { m: BigInt, s: u32, num: BigInt, e: u32 },
    Alg { beta: AlgElem, y: AlgElem },
}

/// Split a finite positive f64 into (mantissa, shift) with x = m / 2^s.
fn dyadic_parts(x: f64) -> Option<(BigInt, u32)> {
    if !x.is_finite() || x < 0.0 {
        return None;
    }
    let r = BigRational::from_float(x)?;
    let den = r.denom();
    let bits = den.bits();
    // denominator of a float is a power of two
    if den != &(BigInt::from(1) << (bits - 1)) {
        return None;
    }
    Some((r.numer().clone(), (bits - 1) as u32))
}

impl Engine {
    fn step(&mut self, digit_cap: u32) -> Result<StepOutcome> {
        match self {
            Engine::F64 { beta, y, err } => {
                let by = *beta * *y;
                *err = *err * *beta + f64::EPSILON * (by.abs() + 1.0);
                let a = by.floor();
                let frac = by - a;
                let margin = *err * 8.0;
                if frac < margin || frac > 1.0 - margin {
                    return Err(Error::AmbiguousDigit {
                        step: 0,
                        detail: "binary64 floor undecided".into(),
                    });
                }
                *y = frac;
                let d = a as i64;
                if d < 0 || d as u32 > digit_cap {
                    return Err(Error::DomainError(format!("digit {d} out of range")));
                }
                Ok(StepOutcome::Digit(d as u32))
            }
            Engine::Dd { beta, y, err } => {
                let by = *beta * *y;
                *err = *err * beta.to_f64() + Dd::EPS * (by.to_f64().abs() + 1.0);
                let a = by.floor();
                let frac = by - a;
                let margin = *err * 8.0;
                if frac.to_f64() < margin || frac.to_f64() > 1.0 - margin {
                    return Err(Error::AmbiguousDigit {
                        step: 0,
                        detail: "double-double floor undecided".into(),
                    });
                }
                *y = frac;
                let d = a.to_f64() as i64;
                if d < 0 || d as u32 > digit_cap {
                    return Err(Error::DomainError(format!("digit {d} out of range")));
                }
                Ok(StepOutcome::Digit(d as u32))
            }
            Engine::Dyadic { m, s, num, e } => {
                use num_traits::Signed as _;
                // beta*y = (m*num) / 2^(s+e)
                let prod = &*m * &*num;
                let shift = *s + *e;
                let a_big = &prod >> shift;
                let rem = prod - (&a_big << shift);
                let d = a_big.to_i64().unwrap_or(-1);
                if d < 0 || d as u32 > digit_cap {
                    return Err(Error::DomainError(format!("digit {d} out of range")));
                }
                debug_assert!(!rem.is_negative());
                *num = rem;
                *e = shift;
                if num.is_zero() && d >= 1 {
                    return Ok(StepOutcome::ExactHit(d as u32));
                }
                Ok(StepOutcome::Digit(d as u32))
            }
            Engine::Rat { beta, y } => {
                let by = &*beta * &*y;
                let a = by.floor();
                let frac = &by - &a;
                let d = a.to_integer().to_i64().unwrap_or(-1);
                if d < 0 || d as u32 > digit_cap {
                    return Err(Error::DomainError(format!("digit {d} out of range")));
                }
                if frac.is_zero() && d >= 1 {
                    *y = frac;
                    return Ok(StepOutcome::ExactHit(d as u32));
                }
                *y = frac;
                Ok(StepOutcome::Digit(d as u32))
            }
            Engine::Alg { beta, y } => {
                let by = &*beta * &*y;
                let a = by.floor_i64();
                if a < 0 || a as u32 > digit_cap {
                    return Err(Error::DomainError(format!("digit {a} out of range")));
                }
                let rem = &by - &AlgElem::from_i64(by.field(), a);
                if a >= 1 && rem.is_zero() {
                    *y = rem;
                    return Ok(StepOutcome::ExactHit(a as u32));
                }
                *y = rem;
                Ok(StepOutcome::Digit(a as u32))
            }
        }
    }

    fn is_exact(&self) -> bool {
        matches!(self, Engine::Rat { .. } | Engine::Dyadic { .. } | Engine::Alg { .. })
    }
}

/// Digits of 1, cached per base, with periodicity metadata.
#[derive(Clone, Debug, Default)]
pub(crate) struct OneCache {
    pub digits: Vec<u32>,
    /// L(1) when the expansion of 1 terminates (simple base).
    pub simple_index: Option<usize>,
    /// (preperiod, period) of the digit sequence for an eventually periodic
    /// (Parry) base, detected in exact mode.
    pub eventually_periodic: Option<(usize, usize)>,
    #[allow(dead_code)]
    pub exact: bool,
    pub horizon: usize,
}

pub(crate) struct BetaInner {
    value: f64,
    value_dd: Dd,
    precision: Precision,
    definition: Definition,
    one: RwLock<OneCache>,
    fix_counts: RwLock<std::collections::HashMap<u32, u64>>,
}

/// A base beta > 1 (non-integer), shareable across threads.
#[derive(Clone)]
pub struct BetaSpec(pub(crate) Arc<BetaInner>);

impl std::fmt::Debug for BetaSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BetaSpec({:.12})", self.0.value)
    }
}

impl BetaSpec {
    /// Base given numerically. Rejects beta <= 1 and integer beta.
    pub fn from_value(x: f64, precision: Precision) -> Result<BetaSpec> {
        if !(x > 1.0) || !x.is_finite() {
            return Err(Error::InvalidInput(format!("base must be > 1, got {x}")));
        }
        if x.fract() == 0.0 {
            return Err(Error::InvalidInput(format!(
                "integer base {x} rejected: the spectral theory here assumes a non-integer base"
            )));
        }
        let r = BigRational::from_float(x).unwrap();
        Ok(BetaSpec(Arc::new(BetaInner {
            value: x,
            value_dd: Dd::from_f64(x),
            precision,
            definition: Definition::Numeric(r),
            one: RwLock::new(OneCache::default()),
            fix_counts: RwLock::new(Default::default()),
        })))
    }

    /// Base given as the distinguished root of an integer polynomial over an
    /// isolating interval (coefficients leading-first).
    pub fn from_poly(coeffs: &[i64], lo: f64, hi: f64, precision: Precision) -> Result<BetaSpec> {
        let field = NumberField::from_i64_coeffs(coeffs, lo, hi)?;
        Self::from_field(field, precision)
    }

    pub fn from_field(field: Arc<NumberField>, precision: Precision) -> Result<BetaSpec> {
        let root = AlgElem::root(&field);
        let value = root.to_f64();
        if !(value > 1.0) {
            return Err(Error::InvalidInput(format!(
                "polynomial root {value} is not a base > 1"
            )));
        }
        // integer roots are rejected exactly
        let fl = root.floor_i64();
        if (&root - &AlgElem::from_i64(&field, fl)).is_zero() {
            return Err(Error::InvalidInput(format!("integer base {fl} rejected")));
        }
        let value_dd = root.to_dd();
        Ok(BetaSpec(Arc::new(BetaInner {
            value,
            value_dd,
            precision,
            definition: Definition::Polynomial(field),
            one: RwLock::new(OneCache::default()),
            fix_counts: RwLock::new(Default::default()),
        })))
    }

    pub fn value(&self) -> f64 {
        self.0.value
    }

    pub fn value_dd(&self) -> Dd {
        self.0.value_dd
    }

    pub fn precision(&self) -> Precision {
        self.0.precision
    }

    pub fn precision_bits(&self) -> u32 {
        self.0.precision.bits()
    }

    /// Integer part of the base: the digit alphabet is {0, ..., digit_cap}.
    pub fn digit_cap(&self) -> u32 {
        self.0.value.floor() as u32
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.0.definition, Definition::Polynomial(_))
    }

    /// Digits of 1 are always computed exactly (a float base is the exact
    /// rational its bits represent), so series over them carry
    /// truncation-only tails.
    pub fn one_digits_exact(&self) -> bool {
        true
    }

    pub fn field(&self) -> Option<&Arc<NumberField>> {
        match &self.0.definition {
            Definition::Polynomial(f) => Some(f),
            Definition::Numeric(_) => None,
        }
    }

    /// The base as an exact element, when polynomial-defined.
    pub fn as_elem(&self) -> Option<AlgElem> {
        self.field().map(AlgElem::root)
    }

    /// Number of digits guaranteed correct at the configured float precision:
    /// floor(bits * ln 2 / ln beta) - guard. Exact mode has no such cap.
    pub fn trust_horizon(&self, horizon: usize) -> usize {
        let b = self.precision_bits() as f64;
        let t = (b * std::f64::consts::LN_2 / self.0.value.ln()).floor() as isize
            - GUARD_DIGITS as isize;
        horizon.min(t.max(0) as usize)
    }

    pub(crate) fn cached_fix_count(&self, n: u32) -> Option<u64> {
        self.0.fix_counts.read().unwrap().get(&n).copied()
    }

    pub(crate) fn store_fix_count(&self, n: u32, count: u64) {
        self.0.fix_counts.write().unwrap().insert(n, count);
    }

    /// Build the preferred engine chain for a starting point.
    pub(crate) fn engines(&self, x: &Point) -> Vec<Engine> {
        let mut chain = Vec::new();
        // exact points under an exact base go straight to the exact engine:
        // their orbits routinely sit on branch endpoints where float floors
        // are undecidable
        if let (Definition::Polynomial(field), Point::Exact(e)) = (&self.0.definition, x) {
            return vec![Engine::Alg { beta: AlgElem::root(field), y: e.clone() }];
        }
        let xf = x.to_f64();
        if self.0.precision == Precision::Double {
            chain.push(Engine::F64 {
                beta: self.0.value,
                y: xf,
                err: f64::EPSILON * (xf.abs() + 1.0),
            });
        }
        chain.push(Engine::Dd {
            beta: self.0.value_dd,
            y: match x {
                Point::Exact(e) => e.to_dd(),
                Point::Rational(r) => rat_to_dd(r),
                Point::Float(v) => Dd::from_f64(*v),
            },
            err: Dd::EPS * (xf.abs() + 1.0),
        });
        match (&self.0.definition, x) {
            (Definition::Polynomial(field), Point::Exact(e)) => chain.push(Engine::Alg {
                beta: AlgElem::root(field),
                y: e.clone(),
            }),
            (Definition::Polynomial(field), Point::Rational(r)) => chain.push(Engine::Alg {
                beta: AlgElem::root(field),
                y: AlgElem::from_rational(field, r.clone()),
            }),
            (Definition::Polynomial(field), Point::Float(v)) => chain.push(Engine::Alg {
                beta: AlgElem::root(field),
                y: AlgElem::from_f64(field, *v),
            }),
            (Definition::Numeric(_), _) => {
                let (m, s) = dyadic_parts(self.0.value).expect("base is a finite float");
                let dy = match x {
                    Point::Float(v) => dyadic_parts(*v),
                    Point::Rational(r) => {
                        let bits = r.denom().bits();
                        if r.denom() == &(BigInt::from(1) << (bits - 1)) {
                            Some((r.numer().clone(), (bits - 1) as u32))
                        } else {
                            None
                        }
                    }
                    Point::Exact(_) => unreachable!("exact point on numeric base"),
                };
                match dy {
                    Some((num, e)) => chain.push(Engine::Dyadic { m, s, num, e }),
                    None => {
                        let b = BigRational::from_float(self.0.value).unwrap();
                        let y = match x {
                            Point::Rational(r) => r.clone(),
                            Point::Float(v) => BigRational::from_float(*v).unwrap(),
                            Point::Exact(_) => unreachable!(),
                        };
                        chain.push(Engine::Rat { beta: b, y });
                    }
                }
            }
        }
        chain
    }

    /// Greedy digits of the point, escalating precision on ambiguous floors.
    /// Returns (digits, simple_index, whether the digits are exact).
    pub(crate) fn run_digits(
        &self,
        x: &Point,
        horizon: usize,
    ) -> Result<(Vec<u32>, Option<usize>, bool)> {
        let cap = self.digit_cap();
        let mut last_err = None;
        for mut engine in self.engines(x) {
            let exact = engine.is_exact();
            let mut digits = Vec::with_capacity(horizon);
            let mut simple = None;
            let mut failed = false;
            for n in 0..horizon {
                match engine.step(cap) {
                    Ok(StepOutcome::Digit(d)) => digits.push(d),
                    Ok(StepOutcome::ExactHit(d)) => {
                        digits.push(d);
                        simple = Some(n + 1);
                        digits.resize(horizon, 0);
                        break;
                    }
                    Err(e @ Error::AmbiguousDigit { .. }) => {
                        last_err = Some(Error::AmbiguousDigit {
                            step: n + 1,
                            detail: format!("{e}"),
                        });
                        failed = true;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if !failed {
                return Ok((digits, simple, exact));
            }
        }
        Err(last_err.unwrap_or_else(|| Error::NonConvergence("digit escalation exhausted".into())))
    }

    /// Greedy digits of 1 from the shared cache, extended as needed.
    pub(crate) fn one_cache(&self, horizon: usize) -> Result<OneCache> {
        {
            let c = self.0.one.read().unwrap();
            if c.horizon >= horizon {
                return Ok(self.extract_one(&c, horizon));
            }
        }
        let mut c = self.0.one.write().unwrap();
        if c.horizon >= horizon {
            let snap = c.clone();
            return Ok(self.extract_one(&snap, horizon));
        }
        // recompute from scratch at the larger horizon (cheap relative to use)
        let goal = horizon.max(c.horizon * 2).max(64);
        let computed = self.compute_one(goal)?;
        *c = computed;
        let snap = c.clone();
        Ok(self.extract_one(&snap, horizon))
    }

    fn extract_one(&self, c: &OneCache, horizon: usize) -> OneCache {
        let mut out = c.clone();
        if out.digits.len() > horizon {
            out.digits.truncate(horizon);
        } else {
            self.unroll(&mut out.digits, horizon, c);
        }
        out.horizon = horizon;
        out
    }

    /// Extend a digit prefix using the structural tail (zeros after a simple
    /// hit, cycle for an eventually periodic base).
    fn unroll(&self, digits: &mut Vec<u32>, horizon: usize, c: &OneCache) {
        if let Some((pre, per)) = c.eventually_periodic {
            while digits.len() < horizon {
                let k = digits.len();
                let idx = pre + (k - pre) % per;
                let d = c.digits[idx];
                digits.push(d);
            }
        } else if c.simple_index.is_some() {
            digits.resize(horizon, 0);
        } else {
            // float-mode cache without structure: nothing to unroll beyond
            // what was computed; callers cap at trust anyway
            digits.resize(horizon, 0);
        }
    }

    fn compute_one(&self, horizon: usize) -> Result<OneCache> {
        let cap = self.digit_cap();
        if let Definition::Numeric(b) = &self.0.definition {
            // a float base is an exact rational: its digits of 1 are computed
            // exactly. No cycle detection: for a reduced non-integer p/q the
            // orbit denominators grow strictly, so the expansion of 1 never
            // terminates or cycles.
            let _ = b;
            let (m, s) = dyadic_parts(self.0.value).expect("base is a finite float");
            let mut eng = Engine::Dyadic { m, s, num: BigInt::from(1), e: 0 };
            let mut digits = Vec::with_capacity(horizon);
            let mut simple_index = None;
            for n in 0..horizon {
                match eng.step(cap)? {
                    StepOutcome::Digit(d) => digits.push(d),
                    StepOutcome::ExactHit(d) => {
                        digits.push(d);
                        simple_index = Some(n + 1);
                        break;
                    }
                }
            }
            let mut c = OneCache {
                digits,
                simple_index,
                eventually_periodic: None,
                exact: true,
                horizon,
            };
            let digits = {
                let mut d = c.digits.clone();
                self.unroll(&mut d, horizon, &c);
                d
            };
            c.digits = digits;
            return Ok(c);
        }
        if self.is_exact() {
            // exact orbit with cycle detection
            let field = self.field().unwrap();
            let mut eng = Engine::Alg {
                beta: AlgElem::root(field),
                y: AlgElem::one(field),
            };
            let mut digits = Vec::with_capacity(horizon);
            let mut seen: std::collections::HashMap<String, usize> = Default::default();
            let mut simple_index = None;
            let mut eventually_periodic = None;
            for n in 0..horizon {
                if let Engine::Alg { y, .. } = &eng {
                    let key = y.key();
                    if let Some(&first) = seen.get(&key) {
                        eventually_periodic = Some((first, n - first));
                        break;
                    }
                    seen.insert(key, n);
                }
                match eng.step(cap)? {
                    StepOutcome::Digit(d) => digits.push(d),
                    StepOutcome::ExactHit(d) => {
                        digits.push(d);
                        simple_index = Some(n + 1);
                        break;
                    }
                }
            }
            let mut c = OneCache {
                digits,
                simple_index,
                eventually_periodic,
                exact: true,
                horizon,
            };
            let digits = {
                let mut d = c.digits.clone();
                self.unroll(&mut d, horizon, &c);
                d
            };
            c.digits = digits;
            Ok(c)
        } else {
            unreachable!("every base definition has an exact digit engine")
        }
    }

    /// Greedy digits of 1.
    pub fn digits_of_one(&self, horizon: usize) -> Result<Vec<u32>> {
        Ok(self.one_cache(horizon)?.digits)
    }

    /// L(1) when 1 is simple (detected exactly), with the detection horizon.
    pub fn simple_index_of_one(&self, horizon: usize) -> Result<Option<usize>> {
        Ok(self.one_cache(horizon)?.simple_index)
    }

    /// (preperiod, period) of the digit sequence of 1 for a Parry base.
    /// A simple base reports (L(1), 0) conventionally via `simple_index_of_one`.
    pub fn periodicity_of_one(&self, horizon: usize) -> Result<Option<(usize, usize)>> {
        Ok(self.one_cache(horizon)?.eventually_periodic)
    }

    /// Quasi-greedy digits of 1: for a simple base the cyclic word
    /// a_1 .. a_{L-1} (a_L - 1) repeated; otherwise the greedy digits.
    pub fn quasi_digits_of_one(&self, horizon: usize) -> Result<Vec<u32>> {
        let c = self.one_cache(horizon.max(8))?;
        match c.simple_index {
            Some(l) => {
                let mut word: Vec<u32> = c.digits[..l].to_vec();
                let last = word.last_mut().unwrap();
                debug_assert!(*last >= 1);
                *last -= 1;
                let mut out = Vec::with_capacity(horizon);
                for k in 0..horizon {
                    out.push(word[k % l]);
                }
                Ok(out)
            }
            None => Ok(c.digits[..horizon.min(c.digits.len())].to_vec()),
        }
    }

    /// Forward orbit of 1 as f64 values: tau^0(1) = 1, tau^{n+1} = beta tau^n - a_{n+1}.
    pub fn orbit_of_one_f64(&self, horizon: usize) -> Result<Vec<f64>> {
        // backward-stable reconstruction from digit tails: tau^n(1) equals the
        // value of the digit tail starting at n+1
        let need = horizon + tail_terms(self.0.value);
        let c = self.one_cache(need)?;
        let mut out = Vec::with_capacity(horizon + 1);
        out.push(1.0);
        for n in 1..=horizon {
            out.push(tail_value(&c.digits, n, self.0.value));
        }
        Ok(out)
    }

    /// Left-limit orbit lim_{x->1^-} tau^n(x) as f64, via quasi-greedy tails.
    pub fn left_orbit_of_one_f64(&self, horizon: usize) -> Result<Vec<f64>> {
        let need = horizon + tail_terms(self.0.value);
        let d = self.quasi_digits_of_one(need)?;
        let mut out = Vec::with_capacity(horizon + 1);
        for n in 0..=horizon {
            out.push(tail_value(&d, n, self.0.value));
        }
        Ok(out)
    }
}

/// Sum_{k>=1} digits[n+k-1] * beta^-k over available digits (backward Horner).
pub(crate) fn tail_value(digits: &[u32], n: usize, beta: f64) -> f64 {
    let mut acc = 0.0f64;
    for &d in digits.iter().skip(n).rev() {
        acc = (acc + d as f64) / beta;
    }
    acc
}

/// Number of terms so that the geometric tail is below 2^-70.
pub(crate) fn tail_terms(beta: f64) -> usize {
    ((70.0 * std::f64::consts::LN_2) / beta.ln()).ceil() as usize + 4
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi_poly() -> BetaSpec {
        BetaSpec::from_poly(&[1, -1, -1], 1.0, 2.0, Precision::Double).unwrap()
    }

    #[test]
    fn rejects_integer_and_small_bases() {
        assert!(BetaSpec::from_value(3.0, Precision::Double).is_err());
        assert!(BetaSpec::from_value(0.5, Precision::Double).is_err());
        assert!(BetaSpec::from_poly(&[1, -3], 2.5, 3.5, Precision::Double).is_err());
    }

    #[test]
    fn golden_digits_of_one() {
        let b = phi_poly();
        let d = b.digits_of_one(10).unwrap();
        assert_eq!(d, vec![1, 1, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(b.simple_index_of_one(10).unwrap(), Some(2));
        let q = b.quasi_digits_of_one(8).unwrap();
        assert_eq!(q, vec![1, 0, 1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn float_base_digits_match_exact_rational_recursion() {
        // a truncated golden ratio is just a rational base; its digits of 1
        // must agree with the plain exact recursion on that rational
        let v = 1.6180339887f64;
        let b = BetaSpec::from_value(v, Precision::Double).unwrap();
        let d = b.digits_of_one(40).unwrap();
        let br = BigRational::from_float(v).unwrap();
        let mut y = BigRational::from_integer(BigInt::from(1));
        for &got in &d {
            let by = &br * &y;
            let fl = by.floor();
            let a = fl.to_integer().to_i64().unwrap();
            assert_eq!(got as i64, a);
            y = &by - &fl;
        }
    }

    #[test]
    fn trust_horizon_formula() {
        let b = BetaSpec::from_value(2.5, Precision::Double).unwrap();
        let expect = ((53.0 * std::f64::consts::LN_2) / 2.5f64.ln()).floor() as usize - 8;
        assert_eq!(b.trust_horizon(1000), expect);
        assert_eq!(b.trust_horizon(3), 3);
    }

    #[test]
    fn eventually_periodic_detection() {
        // x^4 - 5x^3 + 4x - 3 has a root in (4,5) with digits 4,4,0,3,3,3,...
        let b = BetaSpec::from_poly(&[1, -5, 0, 4, -3], 4.0, 5.0, Precision::Double).unwrap();
        let c = b.one_cache(30).unwrap();
        assert!(c.simple_index.is_none());
        let (pre, per) = c.eventually_periodic.expect("periodic");
        assert!(pre <= 3 && per >= 1);
        let d = b.digits_of_one(24).unwrap();
        assert_eq!(&d[..4], &[4, 4, 0, 3]);
        assert!(d[4..].iter().all(|&t| t == 3));
    }
}
