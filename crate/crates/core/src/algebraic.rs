//! Exact arithmetic in Q[x]/(p) for a base defined as a polynomial root.
//!
//! An element is a rational-coefficient polynomial in the root, reduced modulo
//! the defining polynomial. Sign, floor and equality queries are decided by
//! interval evaluation over an isolating interval of the root, refined by
//! bisection on demand; exact-zero decisions fall back to a gcd test so the
//! answers are correct even when the defining polynomial is reducible (Parry
//! polynomials of truncated words often are).

use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::dd::Dd;
use crate::error::{Error, Result};

type Rat = BigRational;

fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn rat_to_dd(r: &Rat) -> Dd {
    let hi = rat_to_f64(r);
    if !hi.is_finite() {
        return Dd::from_f64(hi);
    }
    let rem = r - Rat::from_float(hi).unwrap();
    Dd::new(hi, rat_to_f64(&rem))
}

fn f64_to_rat(x: f64) -> Rat {
    Rat::from_float(x).expect("finite float")
}

// ---- dense polynomial helpers over Q, coefficients ascending ----

fn ptrim(c: &mut Vec<Rat>) {
    while c.len() > 1 && c.last().map_or(false, |t| t.is_zero()) {
        c.pop();
    }
}

fn pdeg(c: &[Rat]) -> usize {
    c.len() - 1
}

fn pis_zero(c: &[Rat]) -> bool {
    c.iter().all(|t| t.is_zero())
}

fn padd(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len().max(b.len())];
    for (i, t) in a.iter().enumerate() {
        out[i] += t;
    }
    for (i, t) in b.iter().enumerate() {
        out[i] += t;
    }
    ptrim(&mut out);
    out
}

fn psub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len().max(b.len())];
    for (i, t) in a.iter().enumerate() {
        out[i] += t;
    }
    for (i, t) in b.iter().enumerate() {
        out[i] -= t;
    }
    ptrim(&mut out);
    out
}

fn pmul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    if pis_zero(a) || pis_zero(b) {
        return vec![Rat::zero()];
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    ptrim(&mut out);
    out
}

fn pscale(a: &[Rat], s: &Rat) -> Vec<Rat> {
    let mut out: Vec<Rat> = a.iter().map(|t| t * s).collect();
    ptrim(&mut out);
    out
}

/// Remainder of a by b (b need not be monic).
fn prem(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let db = pdeg(b);
    let lead = b[db].clone();
    let mut r: Vec<Rat> = a.to_vec();
    while !pis_zero(&r) && pdeg(&r) >= db {
        let dr = pdeg(&r);
        let q = &r[dr] / &lead;
        for k in 0..=db {
            let t = &b[k] * &q;
            r[dr - db + k] -= t;
        }
        r[dr] = Rat::zero();
        ptrim(&mut r);
    }
    r
}

/// Quotient of a by b, assuming exact division.
fn pdiv_exact(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let db = pdeg(b);
    let lead = b[db].clone();
    let mut r: Vec<Rat> = a.to_vec();
    let mut q = vec![Rat::zero(); a.len().saturating_sub(db)];
    while !pis_zero(&r) && pdeg(&r) >= db {
        let dr = pdeg(&r);
        let c = &r[dr] / &lead;
        q[dr - db] = c.clone();
        for k in 0..=db {
            let t = &b[k] * &c;
            r[dr - db + k] -= t;
        }
        r[dr] = Rat::zero();
        ptrim(&mut r);
    }
    ptrim(&mut q);
    q
}

fn pmonic(a: &[Rat]) -> Vec<Rat> {
    let d = pdeg(a);
    let lead = a[d].clone();
    pscale(a, &(Rat::one() / lead))
}

fn pgcd(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    while !pis_zero(&y) {
        let r = prem(&x, &y);
        x = y;
        y = r;
    }
    if pis_zero(&x) {
        x
    } else {
        pmonic(&x)
    }
}

fn pderiv(a: &[Rat]) -> Vec<Rat> {
    if a.len() <= 1 {
        return vec![Rat::zero()];
    }
    let mut out = Vec::with_capacity(a.len() - 1);
    for (i, c) in a.iter().enumerate().skip(1) {
        out.push(c * rat(i as i64));
    }
    ptrim(&mut out);
    out
}

fn peval(a: &[Rat], x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for c in a.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Extended gcd step: returns (g, u) monic-normalized with u*a = g (mod b).
fn pxgcd_u(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let mut r0 = a.to_vec();
    let mut r1 = b.to_vec();
    let mut u0 = vec![Rat::one()];
    let mut u1 = vec![Rat::zero()];
    while !pis_zero(&r1) {
        // q, r = divmod(r0, r1)
        let db = pdeg(&r1);
        let lead = r1[db].clone();
        let mut r = r0.clone();
        let mut q = vec![Rat::zero(); r0.len().max(db + 1)];
        while !pis_zero(&r) && pdeg(&r) >= db {
            let dr = pdeg(&r);
            let c = &r[dr] / &lead;
            q[dr - db] = c.clone();
            for k in 0..=db {
                let t = &r1[k] * &c;
                r[dr - db + k] -= t;
            }
            r[dr] = Rat::zero();
            ptrim(&mut r);
        }
        ptrim(&mut q);
        let u2 = psub(&u0, &pmul(&q, &u1));
        r0 = std::mem::replace(&mut r1, r);
        u0 = std::mem::replace(&mut u1, u2);
    }
    // normalize to monic gcd
    let d = pdeg(&r0);
    let lead = r0[d].clone();
    if lead.is_zero() {
        return (r0, u0);
    }
    let inv = Rat::one() / lead;
    (pscale(&r0, &inv), pscale(&u0, &inv))
}

// interval helpers: closed rational intervals
#[derive(Clone, Debug)]
struct RIv(Rat, Rat);

impl RIv {
    fn point(r: Rat) -> Self {
        RIv(r.clone(), r)
    }
    fn add(&self, o: &RIv) -> RIv {
        RIv(&self.0 + &o.0, &self.1 + &o.1)
    }
    fn mul(&self, o: &RIv) -> RIv {
        let c1 = &self.0 * &o.0;
        let c2 = &self.0 * &o.1;
        let c3 = &self.1 * &o.0;
        let c4 = &self.1 * &o.1;
        let mut lo = c1.clone();
        let mut hi = c1;
        for c in [c2, c3, c4] {
            if c < lo {
                lo = c.clone();
            }
            if c > hi {
                hi = c;
            }
        }
        RIv(lo, hi)
    }
    fn contains_zero(&self) -> bool {
        !self.0.is_positive() && !self.1.is_negative()
    }
}

fn interval_eval(coeffs: &[Rat], x: &RIv) -> RIv {
    let mut acc = RIv::point(Rat::zero());
    for c in coeffs.iter().rev() {
        acc = acc.mul(x).add(&RIv::point(c.clone()));
    }
    acc
}

struct Enclosure {
    lo: Rat,
    hi: Rat,
    sign_lo: i32,
}

/// A real algebraic number: the unique root of `monic` inside the enclosure.
pub struct NumberField {
    monic: Vec<Rat>,
    /// Original integer coefficients, leading term first (for display/round trips).
    int_coeffs: Vec<BigInt>,
    enclosure: RwLock<Enclosure>,
}

impl fmt::Debug for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NumberField(deg {})", pdeg(&self.monic))
    }
}

impl NumberField {
    /// Build from integer coefficients (leading first) and an isolating
    /// interval. The polynomial is made square-free; the interval must
    /// exhibit a sign change.
    pub fn new(int_coeffs: &[BigInt], lo: Rat, hi: Rat) -> Result<Arc<Self>> {
        if int_coeffs.len() < 2 || int_coeffs[0].is_zero() {
            return Err(Error::InvalidInput(
                "defining polynomial must have degree >= 1 with nonzero leading coefficient"
                    .into(),
            ));
        }
        let mut asc: Vec<Rat> = int_coeffs
            .iter()
            .rev()
            .map(|c| Rat::from_integer(c.clone()))
            .collect();
        ptrim(&mut asc);
        let monic0 = pmonic(&asc);
        // square-free part
        let g = pgcd(&monic0, &pderiv(&monic0));
        let monic = if pdeg(&g) >= 1 {
            pmonic(&pdiv_exact(&monic0, &g))
        } else {
            monic0
        };
        let slo = peval(&monic, &lo);
        let shi = peval(&monic, &hi);
        if slo.is_zero() || shi.is_zero() {
            return Err(Error::InvalidInput(
                "isolating interval endpoint is a root; perturb the interval".into(),
            ));
        }
        if slo.is_positive() == shi.is_positive() {
            return Err(Error::InvalidInput(
                "no sign change over the isolating interval".into(),
            ));
        }
        let sign_lo = if slo.is_positive() { 1 } else { -1 };
        Ok(Arc::new(NumberField {
            monic,
            int_coeffs: int_coeffs.to_vec(),
            enclosure: RwLock::new(Enclosure { lo, hi, sign_lo }),
        }))
    }

    pub fn from_i64_coeffs(coeffs: &[i64], lo: f64, hi: f64) -> Result<Arc<Self>> {
        let big: Vec<BigInt> = coeffs.iter().map(|&c| BigInt::from(c)).collect();
        NumberField::new(&big, f64_to_rat(lo), f64_to_rat(hi))
    }

    pub fn degree(&self) -> usize {
        pdeg(&self.monic)
    }

    pub fn int_coeffs(&self) -> &[BigInt] {
        &self.int_coeffs
    }

    fn with_enclosure<T>(&self, f: impl FnOnce(&Enclosure) -> T) -> T {
        f(&self.enclosure.read().unwrap())
    }

    fn bisect(&self) {
        let mut e = self.enclosure.write().unwrap();
        if e.lo == e.hi {
            return;
        }
        let mid = (&e.lo + &e.hi) / rat(2);
        let s = peval(&self.monic, &mid);
        if s.is_zero() {
            e.lo = mid.clone();
            e.hi = mid;
            return;
        }
        let smid = if s.is_positive() { 1 } else { -1 };
        if smid == e.sign_lo {
            e.lo = mid;
        } else {
            e.hi = mid;
        }
    }

    /// Shrink the enclosure until its width is at most 2^-bits.
    pub fn refine_to_bits(&self, bits: u32) {
        let target = Rat::new(BigInt::one(), BigInt::one() << bits);
        loop {
            let done = self.with_enclosure(|e| &e.hi - &e.lo <= target);
            if done {
                return;
            }
            self.bisect();
        }
    }

    /// Approximate value of the root as f64.
    pub fn root_f64(&self) -> f64 {
        self.refine_to_bits(70);
        self.with_enclosure(|e| rat_to_f64(&((&e.lo + &e.hi) / rat(2))))
    }

    /// Approximate value of the root as double-double.
    pub fn root_dd(&self) -> Dd {
        self.refine_to_bits(130);
        self.with_enclosure(|e| rat_to_dd(&((&e.lo + &e.hi) / rat(2))))
    }

    /// Does `poly` (a divisor of the defining polynomial) vanish at the root?
    fn divisor_vanishes(&self, poly: &[Rat]) -> bool {
        if pdeg(poly) == 0 {
            return false;
        }
        self.with_enclosure(|e| {
            let a = peval(poly, &e.lo);
            let b = peval(poly, &e.hi);
            // endpoints cannot be roots of a divisor of p (p is nonzero there)
            a.is_positive() != b.is_positive()
        })
    }
}

/// Element of Q[x]/(p) evaluated at the distinguished root.
#[derive(Clone)]
pub struct AlgElem {
    field: Arc<NumberField>,
    c: Vec<Rat>, // ascending, length <= deg(p)
}

impl fmt::Debug for AlgElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgElem{:?}", self.c.iter().map(rat_to_f64).collect::<Vec<_>>())
    }
}

impl PartialEq for AlgElem {
    fn eq(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }
}

impl AlgElem {
    fn reduce(field: &Arc<NumberField>, mut c: Vec<Rat>) -> AlgElem {
        ptrim(&mut c);
        if pdeg(&c) >= field.degree() {
            c = prem(&c, &field.monic);
        }
        AlgElem { field: field.clone(), c }
    }

    pub fn zero(field: &Arc<NumberField>) -> AlgElem {
        AlgElem { field: field.clone(), c: vec![Rat::zero()] }
    }

    pub fn one(field: &Arc<NumberField>) -> AlgElem {
        AlgElem { field: field.clone(), c: vec![Rat::one()] }
    }

    pub fn from_rational(field: &Arc<NumberField>, r: Rat) -> AlgElem {
        AlgElem { field: field.clone(), c: vec![r] }
    }

    pub fn from_f64(field: &Arc<NumberField>, x: f64) -> AlgElem {
        AlgElem::from_rational(field, f64_to_rat(x))
    }

    pub fn from_i64(field: &Arc<NumberField>, n: i64) -> AlgElem {
        AlgElem::from_rational(field, rat(n))
    }

    /// The distinguished root itself.
    pub fn root(field: &Arc<NumberField>) -> AlgElem {
        if field.degree() == 1 {
            // x = -c0 (monic linear)
            let v = -field.monic[0].clone();
            return AlgElem { field: field.clone(), c: vec![v] };
        }
        AlgElem { field: field.clone(), c: vec![Rat::zero(), Rat::one()] }
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        if pis_zero(&self.c) {
            return true;
        }
        if pdeg(&self.c) == 0 {
            return false;
        }
        // gcd test: the value vanishes iff the minimal polynomial of the root
        // divides the representative, iff gcd(c, p) vanishes at the root.
        let g = pgcd(&self.c, &self.field.monic);
        self.field.divisor_vanishes(&g)
    }

    /// Sign of the value: -1, 0, +1.
    pub fn sign(&self) -> i32 {
        if self.is_zero() {
            return 0;
        }
        if pdeg(&self.c) == 0 {
            return if self.c[0].is_positive() { 1 } else { -1 };
        }
        loop {
            let decided = self.field.with_enclosure(|e| {
                let iv = interval_eval(&self.c, &RIv(e.lo.clone(), e.hi.clone()));
                if iv.contains_zero() {
                    None
                } else {
                    Some(if iv.0.is_positive() { 1 } else { -1 })
                }
            });
            if let Some(s) = decided {
                return s;
            }
            self.field.bisect();
        }
    }

    /// Exact floor of the value.
    pub fn floor_i64(&self) -> i64 {
        if pdeg(&self.c) == 0 {
            return self.c[0].floor().to_integer().to_i64().expect("floor fits i64");
        }
        loop {
            let bracket = self.field.with_enclosure(|e| {
                let iv = interval_eval(&self.c, &RIv(e.lo.clone(), e.hi.clone()));
                let fl = iv.0.floor().to_integer();
                let fh = iv.1.floor().to_integer();
                (fl, fh)
            });
            let (fl, fh) = bracket;
            if fl == fh {
                return fl.to_i64().expect("floor fits i64");
            }
            if &fh - &fl == BigInt::one() {
                // candidate exact-integer boundary
                let k = Rat::from_integer(fh.clone());
                let diff = self - &AlgElem::from_rational(&self.field, k);
                if diff.is_zero() {
                    return fh.to_i64().expect("floor fits i64");
                }
            }
            self.field.bisect();
        }
    }

    pub fn cmp_rational(&self, r: &Rat) -> std::cmp::Ordering {
        let d = self - &AlgElem::from_rational(&self.field, r.clone());
        match d.sign() {
            0 => std::cmp::Ordering::Equal,
            s if s < 0 => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Greater,
        }
    }

    pub fn cmp_elem(&self, other: &AlgElem) -> std::cmp::Ordering {
        let d = self - other;
        match d.sign() {
            0 => std::cmp::Ordering::Equal,
            s if s < 0 => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Greater,
        }
    }

    /// f64 approximation accurate to the last bit or so.
    pub fn to_f64(&self) -> f64 {
        if pdeg(&self.c) == 0 {
            return rat_to_f64(&self.c[0]);
        }
        rat_to_f64(&self.tight_value(75))
    }

    /// Double-double approximation.
    pub fn to_dd(&self) -> Dd {
        if pdeg(&self.c) == 0 {
            return rat_to_dd(&self.c[0]);
        }
        rat_to_dd(&self.tight_value(135))
    }

    /// Midpoint of an interval enclosure of width <= 2^-bits.
    fn tight_value(&self, bits: u32) -> Rat {
        let target = Rat::new(BigInt::one(), BigInt::one() << bits);
        loop {
            let got = self.field.with_enclosure(|e| {
                let iv = interval_eval(&self.c, &RIv(e.lo.clone(), e.hi.clone()));
                if &iv.1 - &iv.0 <= target {
                    Some((&iv.0 + &iv.1) / rat(2))
                } else {
                    None
                }
            });
            if let Some(v) = got {
                return v;
            }
            self.field.bisect();
        }
    }

    /// Multiplicative inverse of the value (value-correct for reducible
    /// defining polynomials as well).
    pub fn inv(&self) -> Result<AlgElem> {
        if self.is_zero() {
            return Err(Error::DomainError("inverse of zero".into()));
        }
        if pdeg(&self.c) == 0 {
            let v = Rat::one() / self.c[0].clone();
            return Ok(AlgElem::from_rational(&self.field, v));
        }
        let rep = inv_mod(&self.field, &self.c, &self.field.monic)?;
        Ok(AlgElem::reduce(&self.field, rep))
    }

    pub fn pow(&self, mut n: u32) -> AlgElem {
        let mut base = self.clone();
        let mut acc = AlgElem::one(&self.field);
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            n >>= 1;
        }
        acc
    }

    /// Stable key for hash-based cycle detection.
    pub fn key(&self) -> String {
        let mut s = String::new();
        for c in &self.c {
            s.push_str(&c.to_string());
            s.push(';');
        }
        s
    }
}

/// 1/g at the root, working modulo `modulus` (a polynomial vanishing at the
/// root). Recursion on gcd factors keeps values correct when p is reducible.
fn inv_mod(field: &Arc<NumberField>, g: &[Rat], modulus: &[Rat]) -> Result<Vec<Rat>> {
    let (e, u) = pxgcd_u(g, modulus);
    if pdeg(&e) == 0 {
        // u*g = e (mod modulus), e a nonzero constant
        return Ok(pscale(&u, &(Rat::one() / e[0].clone())));
    }
    if field.divisor_vanishes(&e) {
        return Err(Error::DomainError("inverse of zero (gcd factor vanishes)".into()));
    }
    let reduced_mod = pdiv_exact(modulus, &e);
    let inv_e = inv_mod(field, &e, &reduced_mod)?;
    Ok(pmul(&u, &inv_e))
}

impl std::ops::Add for &AlgElem {
    type Output = AlgElem;
    fn add(self, rhs: &AlgElem) -> AlgElem {
        AlgElem::reduce(&self.field, padd(&self.c, &rhs.c))
    }
}

impl std::ops::Sub for &AlgElem {
    type Output = AlgElem;
    fn sub(self, rhs: &AlgElem) -> AlgElem {
        AlgElem::reduce(&self.field, psub(&self.c, &rhs.c))
    }
}

impl std::ops::Mul for &AlgElem {
    type Output = AlgElem;
    fn mul(self, rhs: &AlgElem) -> AlgElem {
        AlgElem::reduce(&self.field, pmul(&self.c, &rhs.c))
    }
}

impl std::ops::Neg for &AlgElem {
    type Output = AlgElem;
    fn neg(self) -> AlgElem {
        AlgElem { field: self.field.clone(), c: pscale(&self.c, &rat(-1)) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> Arc<NumberField> {
        NumberField::from_i64_coeffs(&[1, -1, -1], 1.0, 2.0).unwrap()
    }

    #[test]
    fn golden_ratio_value() {
        let f = golden();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((f.root_f64() - phi).abs() < 1e-15);
        let b = AlgElem::root(&f);
        // b^2 - b - 1 == 0
        let e = &(&b.pow(2) - &b) - &AlgElem::one(&f);
        assert!(e.is_zero());
    }

    #[test]
    fn floor_and_sign() {
        let f = golden();
        let b = AlgElem::root(&f);
        assert_eq!(b.floor_i64(), 1);
        assert_eq!(b.pow(2).floor_i64(), 2);
        assert_eq!((&b - &AlgElem::from_i64(&f, 2)).sign(), -1);
        // b*(b-1) = 1 exactly
        let prod = &b * &(&b - &AlgElem::one(&f));
        assert_eq!(prod.cmp_rational(&Rat::one()), std::cmp::Ordering::Equal);
    }

    #[test]
    fn inverse_in_reducible_quotient() {
        // (x+1)(x^3-4x^2+2x-2): root near 3.59; invert (x+1) which does not
        // vanish at the root even though it divides the modulus.
        let f = NumberField::from_i64_coeffs(&[1, -3, -2, 0, -2], 3.0, 4.0).unwrap();
        let b = AlgElem::root(&f);
        let g = &b + &AlgElem::one(&f);
        let gi = g.inv().unwrap();
        let check = &(&g * &gi) - &AlgElem::one(&f);
        assert!(check.is_zero());
    }

    #[test]
    fn exact_integer_floor_detected() {
        // at the root of x^2-x-1, b^2 - b = 1 exactly: floor must be 1
        let f = golden();
        let b = AlgElem::root(&f);
        let e = &b.pow(2) - &b;
        assert_eq!(e.floor_i64(), 1);
    }

    #[test]
    fn dd_conversion_tight() {
        let f = golden();
        let b = AlgElem::root(&f);
        let d = b.to_dd();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((d.hi - phi).abs() < 1e-15);
        // residual of the defining polynomial in dd
        let r = d * d - d - Dd::ONE;
        assert!(r.to_f64().abs() < 1e-30);
    }
}
