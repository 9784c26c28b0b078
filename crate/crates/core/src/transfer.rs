//! Exact action of the transfer operator on step functions spanned by
//! indicators 1_{[0,x]}: each application maps a term to a multiple of the
//! constant function plus a term at the image breakpoint, so iteration is
//! closed and free of discretization error. Norms live on the quotient space
//! where countable sets are invisible: point masses and breakpoint-0 terms
//! are dropped.
//!
//! Coefficients are generic: binary64 complex for ordinary use, double-double
//! complex for decay measurements, whose signal drops far below the f64
//! noise floor of the iteration.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebraic::AlgElem;
use crate::beta::{BetaSpec, Point};
use crate::dd::{Dd, DdComplex};
use crate::error::{Error, Result};
use crate::expansion::greedy_digits;
use crate::series::one_minus_phi_dd;
use crate::spectra::Eigenvalue;

/// Coefficient field of a step function.
pub trait Coef: Copy + std::fmt::Debug {
    fn zero() -> Self;
    fn is_zero(self) -> bool;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn scale_f64(self, s: f64) -> Self;
    /// c * d / beta for a digit d.
    fn digit_over_beta(self, d: u32, beta: &BetaSpec) -> Self;
    /// c / beta.
    fn over_beta(self, beta: &BetaSpec) -> Self;
    fn abs(self) -> f64;
    fn from_c64(c: Complex64) -> Self;
    fn to_c64(self) -> Complex64;
}

impl Coef for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn is_zero(self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn scale_f64(self, s: f64) -> Self {
        self * s
    }
    fn digit_over_beta(self, d: u32, beta: &BetaSpec) -> Self {
        self * (d as f64 / beta.value())
    }
    fn over_beta(self, beta: &BetaSpec) -> Self {
        self / beta.value()
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn from_c64(c: Complex64) -> Self {
        c
    }
    fn to_c64(self) -> Complex64 {
        self
    }
}

impl Coef for DdComplex {
    fn zero() -> Self {
        DdComplex::ZERO
    }
    fn is_zero(self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn scale_f64(self, s: f64) -> Self {
        self.scale(Dd::from_f64(s))
    }
    fn digit_over_beta(self, d: u32, beta: &BetaSpec) -> Self {
        self.scale(Dd::from_f64(d as f64) / beta.value_dd())
    }
    fn over_beta(self, beta: &BetaSpec) -> Self {
        self.scale(Dd::ONE / beta.value_dd())
    }
    fn abs(self) -> f64 {
        DdComplex::abs(self).to_f64()
    }
    fn from_c64(c: Complex64) -> Self {
        DdComplex::from_f64(c.re, c.im)
    }
    fn to_c64(self) -> Complex64 {
        DdComplex::to_c64(self)
    }
}

/// A breakpoint in [0,1]: exact for polynomial-defined bases, binary64
/// otherwise. Step functions keep their breakpoints homogeneous.
#[derive(Clone, Debug)]
pub enum Breakpoint {
    Exact(AlgElem),
    Float(f64),
}

impl Breakpoint {
    pub fn to_f64(&self) -> f64 {
        match self {
            Breakpoint::Exact(e) => e.to_f64(),
            Breakpoint::Float(x) => *x,
        }
    }

    pub fn to_dd(&self) -> Dd {
        match self {
            Breakpoint::Exact(e) => e.to_dd(),
            Breakpoint::Float(x) => Dd::from_f64(*x),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Breakpoint::Exact(e) => e.is_zero(),
            Breakpoint::Float(x) => *x == 0.0,
        }
    }

    fn cmp_key(&self, other: &Breakpoint) -> std::cmp::Ordering {
        match (self, other) {
            (Breakpoint::Exact(a), Breakpoint::Exact(b)) => {
                let fa = a.to_f64();
                let fb = b.to_f64();
                if (fa - fb).abs() > 1e-13 {
                    fa.partial_cmp(&fb).unwrap()
                } else {
                    a.cmp_elem(b)
                }
            }
            _ => self
                .to_f64()
                .partial_cmp(&other.to_f64())
                .unwrap_or(std::cmp::Ordering::Equal),
        }
    }

    fn same_as(&self, other: &Breakpoint) -> bool {
        self.cmp_key(other) == std::cmp::Ordering::Equal
    }
}

/// f(x) = sum_i c_i 1_{[0, x_i]}(x), canonical: breakpoints sorted, distinct,
/// inside (0,1], zero coefficients dropped.
#[derive(Clone, Debug)]
pub struct StepFn<C: Coef> {
    terms: Vec<(Breakpoint, C)>,
}

pub type StepFunction = StepFn<Complex64>;

impl<C: Coef> StepFn<C> {
    pub fn from_terms(terms: Vec<(Breakpoint, C)>) -> StepFn<C> {
        let mut f = StepFn { terms };
        f.canonicalize();
        f
    }

    pub fn zero() -> StepFn<C> {
        StepFn { terms: Vec::new() }
    }

    /// The indicator of [0, x].
    pub fn indicator(x: Breakpoint) -> StepFn<C> {
        StepFn::from_terms(vec![(x, C::from_c64(Complex64::new(1.0, 0.0)))])
    }

    pub fn terms(&self) -> &[(Breakpoint, C)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn map_coefs<D: Coef>(&self, f: impl Fn(C) -> D) -> StepFn<D> {
        StepFn {
            terms: self.terms.iter().map(|(b, c)| (b.clone(), f(*c))).collect(),
        }
    }

    fn canonicalize(&mut self) {
        self.terms.sort_by(|a, b| a.0.cmp_key(&b.0));
        let mut out: Vec<(Breakpoint, C)> = Vec::with_capacity(self.terms.len());
        for (bp, c) in self.terms.drain(..) {
            if bp.is_zero() {
                continue;
            }
            if let Some(last) = out.last_mut() {
                if last.0.same_as(&bp) {
                    last.1 = last.1.add(c);
                    continue;
                }
            }
            out.push((bp, c));
        }
        out.retain(|(_, c)| !c.is_zero());
        self.terms = out;
    }

    pub fn add(&self, other: &StepFn<C>) -> StepFn<C> {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        StepFn::from_terms(terms)
    }

    pub fn scale(&self, s: C) -> StepFn<C>
    where
        C: std::ops::Mul<Output = C>,
    {
        StepFn {
            terms: self.terms.iter().map(|(b, c)| (b.clone(), *c * s)).collect(),
        }
    }

    /// Total variation on the quotient space: jumps strictly inside (0,1).
    pub fn var(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(b, _)| b.to_f64() < 1.0 - 1e-15)
            .map(|(_, c)| c.abs())
            .sum()
    }

    /// Essential sup: maximum of |suffix sums| over intervals of positive length.
    pub fn sup(&self) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let mut best = 0.0f64;
        let mut suffix = C::zero();
        // suffix sums from the top; the interval above the largest breakpoint
        // has value 0 and is nonempty only if x_max < 1
        for k in (0..self.terms.len()).rev() {
            suffix = suffix.add(self.terms[k].1);
            // interval (x_{k-1}, x_k) is nonempty since breakpoints are distinct
            best = best.max(suffix.abs());
        }
        best
    }

    pub fn bv_norm(&self) -> f64 {
        self.var() + self.sup()
    }

    /// Lebesgue integral: sum c_i x_i.
    pub fn integral(&self) -> Complex64 {
        let mut acc = C::zero();
        for (b, c) in &self.terms {
            acc = acc.add(c.scale_f64(b.to_f64()));
        }
        acc.to_c64()
    }

    /// Interval form: breakpoints 0 < t_1 < ... < t_m (t_m may be 1) and the
    /// value on each interval (t_{k-1}, t_k), plus the trailing value past t_m.
    fn interval_values(&self) -> (Vec<f64>, Vec<C>) {
        let m = self.terms.len();
        let mut values = vec![C::zero(); m + 1];
        let mut suffix = C::zero();
        for k in (0..m).rev() {
            suffix = suffix.add(self.terms[k].1);
            values[k] = suffix;
        }
        let ts: Vec<f64> = self.terms.iter().map(|(b, _)| b.to_f64()).collect();
        (ts, values)
    }

    /// Pointwise value as f64-grade complex (interior points).
    pub fn value_at(&self, x: f64) -> Complex64 {
        let mut acc = C::zero();
        for (b, c) in &self.terms {
            if b.to_f64() >= x {
                acc = acc.add(*c);
            }
        }
        acc.to_c64()
    }
}

/// Exact branch data of one breakpoint: the first digit and the image point.
fn branch_step(beta: &BetaSpec, bp: &Breakpoint) -> Result<(u32, Breakpoint)> {
    match bp {
        Breakpoint::Exact(e) => {
            let field = e.field();
            let root = AlgElem::root(field);
            let by = &root * e;
            let a = by.floor_i64();
            if a < 0 {
                return Err(Error::DomainError("negative digit".into()));
            }
            let rem = &by - &AlgElem::from_i64(field, a);
            Ok((a as u32, Breakpoint::Exact(rem)))
        }
        Breakpoint::Float(x) => {
            let by = beta.value() * x;
            let a = by.floor();
            let frac = by - a;
            let margin = 8.0 * f64::EPSILON * (by.abs() + 1.0);
            if frac < margin || frac > 1.0 - margin {
                // decide exactly over the rationals the floats represent
                use num_rational::BigRational;
                use num_traits::{Signed as _, ToPrimitive};
                let bb = BigRational::from_float(beta.value()).unwrap();
                let xx = BigRational::from_float(*x).unwrap();
                let prod = &bb * &xx;
                let fl = prod.floor();
                let rem = &prod - &fl;
                let a = fl.to_integer().to_i64().unwrap_or(-1);
                if a < 0 {
                    return Err(Error::AmbiguousDigit {
                        step: 1,
                        detail: format!("breakpoint {x} too close to a branch boundary"),
                    });
                }
                let remf = if rem.is_positive() { rem.to_f64().unwrap_or(0.0) } else { 0.0 };
                return Ok((a as u32, Breakpoint::Float(remf)));
            }
            Ok((a as u32, Breakpoint::Float(frac)))
        }
    }
}

/// One exact application of the transfer operator.
pub fn apply_l<C: Coef>(beta: &BetaSpec, f: &StepFn<C>) -> Result<StepFn<C>> {
    let mut terms: Vec<(Breakpoint, C)> = Vec::with_capacity(f.terms.len() + 1);
    let mut const_coef = C::zero();
    let one_bp = one_breakpoint(beta);
    for (bp, c) in &f.terms {
        let (a, image) = branch_step(beta, bp)?;
        const_coef = const_coef.add(c.digit_over_beta(a, beta));
        if !image.is_zero() {
            terms.push((image, c.over_beta(beta)));
        }
    }
    if !const_coef.is_zero() {
        terms.push((one_bp, const_coef));
    }
    Ok(StepFn::from_terms(terms))
}

pub fn one_breakpoint(beta: &BetaSpec) -> Breakpoint {
    match beta.field() {
        Some(field) => Breakpoint::Exact(AlgElem::one(field)),
        None => Breakpoint::Float(1.0),
    }
}

/// Breakpoint at the exact rational an f64 represents, exact whenever the
/// base is: float breakpoints re-round their orbit every operator step and
/// the rounding feeds a non-decaying component, which matters for decay
/// measurements far below 1e-15.
pub fn breakpoint_at(beta: &BetaSpec, x: f64) -> Breakpoint {
    match beta.field() {
        Some(field) => Breakpoint::Exact(AlgElem::from_f64(field, x)),
        None => Breakpoint::Float(x),
    }
}

/// |integral((L f) g) - integral(f (g o tau))|, both sides by exact piecewise
/// integration. The dual property makes this zero.
pub fn duality_check(
    beta: &BetaSpec,
    f: &StepFn<Complex64>,
    g: &StepFn<Complex64>,
) -> Result<f64> {
    let lf = apply_l(beta, f)?;
    let lhs = product_integral(&lf, g);
    let rhs = pullback_integral(beta, f, g);
    Ok((lhs - rhs).norm())
}

/// integral of f*g via min-breakpoint pairing: sum c_i e_j min(x_i, y_j).
pub fn product_integral(f: &StepFn<Complex64>, g: &StepFn<Complex64>) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (xb, c) in f.terms() {
        let x = xb.to_f64();
        for (yb, e) in g.terms() {
            acc += c * e * x.min(yb.to_f64());
        }
    }
    acc
}

/// integral of f * (g o tau) over [0,1]: per branch i the set {tau <= y}
/// is [i/beta, (i+y)/beta] intersected with [0,1].
fn pullback_integral(beta: &BetaSpec, f: &StepFn<Complex64>, g: &StepFn<Complex64>) -> Complex64 {
    let b = beta.value();
    let cap = beta.digit_cap();
    let anti = |t: f64| -> Complex64 {
        // integral of f on [0, t]
        let mut acc = Complex64::new(0.0, 0.0);
        for (xb, c) in f.terms() {
            acc += c * t.min(xb.to_f64());
        }
        acc
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for (yb, e) in g.terms() {
        let y = yb.to_f64();
        for i in 0..=cap {
            let lo = i as f64 / b;
            if lo > 1.0 {
                break;
            }
            let hi = ((i as f64 + y) / b).min(1.0);
            if hi > lo {
                acc += e * (anti(hi) - anti(lo));
            }
        }
    }
    acc
}

/// The invariant density h = C sum_n beta^-n 1_{[0, tau^n(1)]} with
/// integral 1. Exact closed form for a Parry base; truncated otherwise.
pub fn parry_density(beta: &BetaSpec, horizon: usize, tol: f64) -> Result<StepFunction> {
    let b = beta.value();
    if beta.is_exact() {
        let cache = beta.one_cache(horizon.max(64))?;
        if cache.simple_index.is_some() || cache.eventually_periodic.is_some() {
            let field = beta.field().unwrap();
            let root = AlgElem::root(field);
            let mut terms: Vec<(Breakpoint, Complex64)> = Vec::new();
            let mut orbit_val = AlgElem::one(field);
            match (cache.simple_index, cache.eventually_periodic) {
                (Some(l), _) => {
                    for n in 0..l {
                        if n > 0 {
                            let by = &root * &orbit_val;
                            let a = by.floor_i64();
                            orbit_val = &by - &AlgElem::from_i64(field, a);
                        }
                        terms.push((
                            Breakpoint::Exact(orbit_val.clone()),
                            Complex64::new(b.powi(-(n as i32)), 0.0),
                        ));
                    }
                }
                (None, Some((pre, per))) => {
                    let cycle_weight = 1.0 / (1.0 - b.powi(-(per as i32)));
                    for n in 0..pre + per {
                        if n > 0 {
                            let by = &root * &orbit_val;
                            let a = by.floor_i64();
                            orbit_val = &by - &AlgElem::from_i64(field, a);
                        }
                        let w = if n < pre {
                            b.powi(-(n as i32))
                        } else {
                            b.powi(-(n as i32)) * cycle_weight
                        };
                        terms.push((Breakpoint::Exact(orbit_val.clone()), Complex64::new(w, 0.0)));
                    }
                }
                _ => unreachable!(),
            }
            let h = StepFn::from_terms(terms);
            let mass = h.integral();
            return Ok(h.scale(1.0 / mass));
        }
    }
    // truncated series with certified sup-norm error tol/(1 - 1/beta)
    if b.powi(-(horizon as i32)) >= tol {
        return Err(Error::InvalidInput(format!(
            "horizon {horizon} too small for tolerance {tol}"
        )));
    }
    let orbit = beta.orbit_of_one_f64(horizon)?;
    let terms: Vec<(Breakpoint, Complex64)> = orbit
        .iter()
        .enumerate()
        .filter(|(_, &t)| t > 0.0)
        .map(|(n, &t)| (Breakpoint::Float(t), Complex64::new(b.powi(-(n as i32)), 0.0)))
        .collect();
    let h = StepFn::from_terms(terms);
    let mass = h.integral();
    Ok(h.scale(1.0 / mass))
}

/// Values of F_lambda at a breakpoint in double-double precision. Digits of
/// the breakpoint come from the exact engine; the sum is finite for simple
/// points and closed-form for eventually periodic digit tails.
fn f_value_dd(beta: &BetaSpec, x: &Breakpoint, u: DdComplex) -> Result<DdComplex> {
    let horizon = 4096;
    let point = match x {
        Breakpoint::Exact(e) => Point::Exact(e.clone()),
        Breakpoint::Float(v) => Point::Float(*v),
    };
    let seq = greedy_digits(beta, &point, 512.min(horizon))?;
    use crate::expansion::Simplicity;
    match seq.simple {
        Simplicity::Simple { index } => {
            let mut acc = DdComplex::ZERO;
            for &d in seq.greedy[..index].iter().rev() {
                acc = (acc + DdComplex::from_f64(d as f64, 0.0)) * u;
            }
            Ok(acc)
        }
        Simplicity::NotDetected { .. } => {
            // detect a periodic tail against the base's cycle structure
            if let Some((pre0, per)) = beta.periodicity_of_one(256)? {
                let _ = pre0;
                // the orbit of any exact point falls into the same cycle in
                // exact mode; find the entry by scanning for digit periodicity
                let d = &seq.greedy;
                let mut entry = None;
                'outer: for s in 0..d.len().saturating_sub(3 * per) {
                    for k in 0..per.min(d.len() - s - per) {
                        if d[s + k] != d[s + k + per] {
                            continue 'outer;
                        }
                    }
                    entry = Some(s);
                    break;
                }
                if let Some(s) = entry {
                    let mut head = DdComplex::ZERO;
                    for &dv in d[..s].iter().rev() {
                        head = (head + DdComplex::from_f64(dv as f64, 0.0)) * u;
                    }
                    let mut cyc = DdComplex::ZERO;
                    for &dv in d[s..s + per].iter().rev() {
                        cyc = (cyc + DdComplex::from_f64(dv as f64, 0.0)) * u;
                    }
                    let upre = u.powi(s as u32);
                    let uper = u.powi(per as u32);
                    let tail = cyc * upre / (DdComplex::ONE - uper);
                    return Ok(head + tail);
                }
            }
            // plain truncation at dd roundoff scale
            let mut acc = DdComplex::ZERO;
            for &dv in seq.greedy.iter().rev() {
                acc = (acc + DdComplex::from_f64(dv as f64, 0.0)) * u;
            }
            Ok(acc)
        }
    }
}

/// An observable produced by the null-space construction.
#[derive(Clone, Debug)]
pub struct ConstructedObservable {
    pub step: StepFunction,
    pub step_dd: StepFn<DdComplex>,
    /// |sum c_i x_i| and |sum c_i F_j(x_i)| for each annihilated row.
    pub constraint_residuals: Vec<f64>,
    pub breakpoints: Vec<f64>,
    pub coefficients: Vec<Complex64>,
}

/// Default breakpoints for the construction: 1 together with the forward
/// orbit of 1 (exact, finitely many for a Parry base), extended by i/beta
/// points when more are needed.
pub fn default_breakpoints(beta: &BetaSpec, count: usize) -> Result<Vec<Breakpoint>> {
    match beta.field() {
        Some(field) => {
            let root = AlgElem::root(field);
            let mut pts: Vec<AlgElem> = vec![AlgElem::one(field)];
            let mut y = AlgElem::one(field);
            for _ in 0..count * 4 + 8 {
                let by = &root * &y;
                let a = by.floor_i64();
                y = &by - &AlgElem::from_i64(field, a);
                if y.is_zero() {
                    break;
                }
                if pts.iter().all(|p| !(p - &y).is_zero()) {
                    pts.push(y.clone());
                }
                if pts.len() >= count {
                    break;
                }
            }
            let inv = root.inv()?;
            let mut i = 1i64;
            while pts.len() < count && i <= beta.digit_cap() as i64 {
                let cand = &AlgElem::from_i64(field, i) * &inv;
                if pts.iter().all(|p| !(p - &cand).is_zero()) {
                    pts.push(cand);
                }
                i += 1;
            }
            if pts.len() < count {
                return Err(Error::DegenerateBreakpoints(format!(
                    "only {} distinct exact breakpoints available",
                    pts.len()
                )));
            }
            Ok(pts.into_iter().take(count).map(Breakpoint::Exact).collect())
        }
        None => {
            // Chebyshev-like nodes in (0,1) plus the endpoint 1
            let mut pts = vec![Breakpoint::Float(1.0)];
            let m = count - 1;
            for k in 0..m {
                let t = 0.5 - 0.5 * ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * m) as f64).cos();
                pts.push(Breakpoint::Float(0.05 + 0.9 * t));
            }
            Ok(pts)
        }
    }
}

/// Build a step function annihilating the Lebesgue functional and the
/// eigenfunctionals of the given simple sub-leading eigenvalues: solve the
/// (N+1) x (N+K+1) system with rows (x_i) and (F_{lambda_j}(x_i)) for a
/// null vector, scaled to unit maximal coefficient.
pub fn good_decay_construct(
    beta: &BetaSpec,
    subleading: &[Eigenvalue],
    breakpoints: Option<Vec<Breakpoint>>,
    tol: f64,
) -> Result<ConstructedObservable> {
    for e in subleading {
        if e.multiplicity != 1 {
            return Err(Error::NotSimple(format!(
                "eigenvalue {} has winding multiplicity {}",
                e.lambda(),
                e.multiplicity
            )));
        }
    }
    let n = subleading.len();
    let k = 1usize;
    let bps = match breakpoints {
        Some(b) => b,
        None => default_breakpoints(beta, n + k + 1)?,
    };
    if bps.len() < n + 2 {
        return Err(Error::DegenerateBreakpoints(format!(
            "need at least {} breakpoints, got {}",
            n + 2,
            bps.len()
        )));
    }
    // polish eigenvalues to double-double against the exact closed form
    let lambdas_dd: Vec<DdComplex> = if beta.is_exact() {
        let form = one_minus_phi_dd(beta)?;
        subleading
            .iter()
            .map(|e| {
                let z = form.polish(1.0 / e.lambda());
                z.inv()
            })
            .collect()
    } else {
        subleading
            .iter()
            .map(|e| DdComplex::from_f64(e.lambda_re, e.lambda_im))
            .collect()
    };
    let cols = bps.len();
    let rows = n + 1;
    let mut mat: Vec<Vec<DdComplex>> = Vec::with_capacity(rows);
    mat.push(
        bps.iter()
            .map(|b| DdComplex::new(b.to_dd(), Dd::ZERO))
            .collect(),
    );
    let bdd = beta.value_dd();
    for lam in &lambdas_dd {
        let u = (DdComplex::new(bdd, Dd::ZERO) * *lam).inv();
        let mut row = Vec::with_capacity(cols);
        for bp in &bps {
            row.push(f_value_dd(beta, bp, u)?);
        }
        mat.push(row);
    }
    let null = null_vector_dd(&mat, cols).ok_or_else(|| {
        Error::DegenerateBreakpoints("construction matrix has full column rank".into())
    })?;
    // residuals of the annihilation constraints
    let mut residuals = Vec::with_capacity(rows);
    for row in &mat {
        let mut acc = DdComplex::ZERO;
        for (a, c) in row.iter().zip(&null) {
            acc = acc + *a * *c;
        }
        residuals.push(acc.abs().to_f64());
    }
    if residuals.iter().any(|&r| r > tol) {
        return Err(Error::DegenerateBreakpoints(format!(
            "constraint residuals {residuals:?} above tolerance {tol}"
        )));
    }
    let step_dd = StepFn::from_terms(
        bps.iter()
            .cloned()
            .zip(null.iter().copied())
            .collect::<Vec<_>>(),
    );
    let step = step_dd.map_coefs(|c| c.to_c64());
    Ok(ConstructedObservable {
        breakpoints: bps.iter().map(|b| b.to_f64()).collect(),
        coefficients: null.iter().map(|c| c.to_c64()).collect(),
        step,
        step_dd,
        constraint_residuals: residuals,
    })
}

/// One null vector of a rows x cols (rows < cols) matrix by Gaussian
/// elimination with partial pivoting, scaled to unit maximal coefficient.
/// For a one-dimensional null space this is the smallest-singular-direction
/// up to phase, which the unit-max scaling fixes.
fn null_vector_dd(mat: &[Vec<DdComplex>], cols: usize) -> Option<Vec<DdComplex>> {
    let rows = mat.len();
    let mut a: Vec<Vec<DdComplex>> = mat.to_vec();
    let mut pivot_col: Vec<usize> = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        // pivot: largest modulus in column c at or below row r
        let (best, bestval) = (r..rows)
            .map(|i| (i, a[i][c].abs().to_f64()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
        if bestval < 1e-26 {
            continue; // free column
        }
        a.swap(r, best);
        let inv = a[r][c].inv();
        for cc in 0..cols {
            a[r][cc] = a[r][cc] * inv;
        }
        for i in 0..rows {
            if i != r {
                let factor = a[i][c];
                if factor.abs().to_f64() > 0.0 {
                    for cc in 0..cols {
                        let t = factor * a[r][cc];
                        a[i][cc] = a[i][cc] - t;
                    }
                }
            }
        }
        pivot_col.push(c);
        r += 1;
    }
    // free column: the first non-pivot column
    let free = (0..cols).find(|c| !pivot_col.contains(c))?;
    let mut v = vec![DdComplex::ZERO; cols];
    v[free] = DdComplex::ONE;
    for (ri, &pc) in pivot_col.iter().enumerate() {
        v[pc] = -a[ri][free];
    }
    // unit-max scaling with deterministic phase
    let (imax, _) = v
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.abs().to_f64().partial_cmp(&y.1.abs().to_f64()).unwrap())?;
    let scale = v[imax].inv();
    for t in v.iter_mut() {
        *t = *t * scale;
    }
    Some(v)
}

/// Measured decay of BV norms under iteration.
#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub rates: Vec<(usize, f64)>,
    pub fitted_alpha: f64,
    pub fit_window: (usize, usize),
    pub r_squared: f64,
}

/// Iterate the operator exactly and fit log ||L^n f||_BV ~ n log alpha over
/// the window. Iteration runs in double-double so the measured decay is not
/// limited by the binary64 noise floor.
pub fn decay_fit_dd(
    beta: &BetaSpec,
    f: &StepFn<DdComplex>,
    n_max: usize,
    window: Option<(usize, usize)>,
) -> Result<DecayFit> {
    if n_max < 10 {
        return Err(Error::InvalidInput("n_max must be >= 10".into()));
    }
    let (lo, hi) = window.unwrap_or((n_max / 2, n_max));
    let mut rates = Vec::new();
    let mut g = f.clone();
    for n in 1..=n_max.max(hi) {
        g = apply_l(beta, &g)?;
        let norm = g.bv_norm();
        rates.push((n, norm));
    }
    let mut pts: Vec<(f64, f64)> = rates
        .iter()
        .filter(|(n, v)| *n >= lo && *n <= hi && *v > 0.0)
        .map(|(n, v)| (*n as f64, v.ln()))
        .collect();
    // underflow guard: drop the flat floor below representable decay
    pts.retain(|&(_, l)| l > (-650.0));
    if pts.len() < 4 {
        return Err(Error::Underflow(lo));
    }
    let (slope, intercept, r2) = linear_fit(&pts);
    let _ = intercept;
    Ok(DecayFit {
        rates,
        fitted_alpha: slope.exp(),
        fit_window: (lo, hi),
        r_squared: r2,
    })
}

/// Convenience wrapper for binary64 observables.
pub fn decay_fit(
    beta: &BetaSpec,
    f: &StepFunction,
    n_max: usize,
    window: Option<(usize, usize)>,
) -> Result<DecayFit> {
    let fdd = f.map_coefs(DdComplex::from_c64);
    decay_fit_dd(beta, &fdd, n_max, window)
}

pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let ybar = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - ybar).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (slope, intercept, r2)
}

/// Correlation integral f (g o tau^n) dmu - (f dmu)(g dmu) with mu the
/// invariant measure, computed as L^n(f h) integrated against g.
pub fn correlation(
    beta: &BetaSpec,
    f: &StepFunction,
    g: &StepFunction,
    n: usize,
    tol: f64,
) -> Result<Complex64> {
    let h = parry_density(beta, 256, tol)?;
    let fh = pointwise_product(f, &h);
    let mean_f = fh.integral();
    let gh = pointwise_product(g, &h);
    let mean_g = gh.integral();
    let mut iterated = fh;
    for _ in 0..n {
        iterated = apply_l(beta, &iterated)?;
    }
    let lhs = product_integral(&iterated, g);
    Ok(lhs - mean_f * mean_g)
}

/// Product of two indicator-span step functions, re-expressed in the span:
/// values multiply on the common interval partition, then telescope back.
pub fn pointwise_product(f: &StepFunction, g: &StepFunction) -> StepFunction {
    let (tf, vf) = f.interval_values();
    let (tg, vg) = g.interval_values();
    // merged breakpoint set
    let mut ts: Vec<(f64, Option<Breakpoint>)> = Vec::new();
    for (i, t) in tf.iter().enumerate() {
        ts.push((*t, Some(f.terms[i].0.clone())));
    }
    for (j, t) in tg.iter().enumerate() {
        ts.push((*t, Some(g.terms[j].0.clone())));
    }
    ts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    ts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-15);
    // value of the product on each interval, walked left to right
    let value_on = |t_mid: f64| -> Complex64 {
        let vi = tf.iter().position(|&t| t_mid <= t).unwrap_or(tf.len());
        let vj = tg.iter().position(|&t| t_mid <= t).unwrap_or(tg.len());
        let a = vf.get(vi).copied().unwrap_or(Complex64::new(0.0, 0.0));
        let b = vg.get(vj).copied().unwrap_or(Complex64::new(0.0, 0.0));
        a * b
    };
    let mut terms: Vec<(Breakpoint, Complex64)> = Vec::new();
    let mut prev_t = 0.0f64;
    let mut vals: Vec<(Breakpoint, Complex64)> = Vec::new();
    for (t, bp) in &ts {
        if *t <= prev_t {
            continue;
        }
        let mid = 0.5 * (prev_t + t);
        vals.push((bp.clone().unwrap(), value_on(mid)));
        prev_t = *t;
    }
    // telescoping: coefficient at t_k is value_k - value_{k+1}
    for k in 0..vals.len() {
        let next = if k + 1 < vals.len() {
            vals[k + 1].1
        } else {
            Complex64::new(0.0, 0.0)
        };
        let coef = vals[k].1 - next;
        terms.push((vals[k].0.clone(), coef));
    }
    StepFn::from_terms(terms)
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

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn norms_of_simple_examples() {
        // 1_{[0,1]}: var 0, sup 1, integral 1
        let one: StepFunction = StepFn::indicator(Breakpoint::Float(1.0));
        assert_eq!(one.var(), 0.0);
        assert_eq!(one.sup(), 1.0);
        assert!((one.integral() - c(1.0)).norm() < 1e-15);
        // 1_{[0,1/2]} - 1_{[0,1/4]}: var 2, sup 1, integral 1/4
        let f = StepFn::from_terms(vec![
            (Breakpoint::Float(0.5), c(1.0)),
            (Breakpoint::Float(0.25), c(-1.0)),
        ]);
        assert!((f.var() - 2.0).abs() < 1e-15);
        assert!((f.sup() - 1.0).abs() < 1e-15);
        assert!((f.integral() - c(0.25)).norm() < 1e-15);
    }

    #[test]
    fn apply_l_on_the_constant() {
        // L 1_{[0,1]} = (cap/beta) 1_{[0,1]} + (1/beta) 1_{[0,tau(1)]}
        let b = p3();
        let one: StepFunction = StepFn::indicator(one_breakpoint(&b));
        let lf = apply_l(&b, &one).unwrap();
        assert_eq!(lf.len(), 2);
        let tau1 = b.value() - 3.0;
        let t0 = &lf.terms()[0];
        let t1 = &lf.terms()[1];
        assert!((t0.0.to_f64() - tau1).abs() < 1e-12);
        assert!((t0.1 - c(1.0 / b.value())).norm() < 1e-14);
        assert!((t1.0.to_f64() - 1.0).abs() < 1e-15);
        assert!((t1.1 - c(3.0 / b.value())).norm() < 1e-14);
    }

    #[test]
    fn degenerate_indicator_of_a_point_is_null() {
        let b = p3();
        // breakpoint at an exact branch endpoint maps to the class of zero
        let field = b.field().unwrap();
        let x = &AlgElem::from_i64(field, 3) * &AlgElem::root(field).inv().unwrap();
        let f: StepFunction = StepFn::indicator(Breakpoint::Exact(x));
        let lf = apply_l(&b, &f).unwrap();
        // only the constant term survives: (3/beta) 1_{[0,1]}
        assert_eq!(lf.len(), 1);
        assert!((lf.terms()[0].1 - c(3.0 / b.value())).norm() < 1e-14);
    }

    #[test]
    fn integral_preserved_by_l() {
        let b = p3();
        let f = StepFn::from_terms(vec![
            (Breakpoint::Float(0.37), Complex64::new(1.1, -0.3)),
            (Breakpoint::Float(0.82), Complex64::new(-0.4, 0.9)),
            (Breakpoint::Float(1.0), Complex64::new(0.25, 0.0)),
        ]);
        let lf = apply_l(&b, &f).unwrap();
        assert!((lf.integral() - f.integral()).norm() < 1e-13);
    }

    #[test]
    fn duality_on_random_pairs() {
        let b = p3();
        let f = StepFn::from_terms(vec![
            (Breakpoint::Float(0.21), c(0.7)),
            (Breakpoint::Float(0.64), c(-1.2)),
        ]);
        let g = StepFn::from_terms(vec![
            (Breakpoint::Float(0.45), c(1.0)),
            (Breakpoint::Float(0.9), c(0.5)),
        ]);
        assert!(duality_check(&b, &f, &g).unwrap() < 1e-13);
        // constant g: pure integral preservation
        let gone: StepFunction = StepFn::indicator(Breakpoint::Float(1.0));
        assert!(duality_check(&b, &f, &gone).unwrap() < 1e-13);
    }

    #[test]
    fn invariant_density_fixed_point() {
        for b in [phi_base(), p3()] {
            let h = parry_density(&b, 200, 1e-10).unwrap();
            assert!((h.integral() - c(1.0)).norm() < 1e-12);
            let lh = apply_l(&b, &h).unwrap();
            let diff = lh.add(&h.scale(c(-1.0)));
            assert!(diff.sup() < 1e-12, "density not fixed: {}", diff.sup());
        }
    }

    #[test]
    fn golden_density_single_interior_breakpoint() {
        let h = parry_density(&phi_base(), 200, 1e-10).unwrap();
        assert_eq!(h.len(), 2);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((h.terms()[0].0.to_f64() - 1.0 / phi).abs() < 1e-12);
    }

    #[test]
    fn construction_annihilates_rows() {
        let b = p3();
        let rep = locate_eigenvalues(&b, LocateOptions::default()).unwrap();
        let sub: Vec<Eigenvalue> = rep.non_leading().cloned().collect();
        let obs = good_decay_construct(&b, &sub, None, 1e-20).unwrap();
        assert_eq!(obs.step.len(), 3);
        for r in &obs.constraint_residuals {
            assert!(*r < 1e-25, "residual {r}");
        }
        assert!(obs.step.integral().norm() < 1e-13);
    }

    #[test]
    fn breakpoint_growth_bound() {
        let b = BetaSpec::from_value(2.71, Precision::Double).unwrap();
        let mut f: StepFunction = StepFn::from_terms(vec![
            (Breakpoint::Float(0.3), c(1.0)),
            (Breakpoint::Float(0.77), c(-0.4)),
        ]);
        let k = f.len();
        for n in 1..=25 {
            f = apply_l(&b, &f).unwrap();
            assert!(f.len() <= k + n + 1, "terms {} at step {n}", f.len());
        }
    }

    #[test]
    fn product_roundtrip() {
        let f = StepFn::from_terms(vec![
            (Breakpoint::Float(0.5), c(2.0)),
            (Breakpoint::Float(1.0), c(-1.0)),
        ]);
        let g = StepFn::from_terms(vec![(Breakpoint::Float(0.25), c(1.0)), (Breakpoint::Float(0.75), c(1.0))]);
        let p = pointwise_product(&f, &g);
        for &x in &[0.1, 0.3, 0.6, 0.8, 0.95] {
            let expect = f.value_at(x) * g.value_at(x);
            assert!(
                (p.value_at(x) - expect).norm() < 1e-12,
                "product wrong at {x}"
            );
        }
    }
}
