//! Isolated eigenvalues of the transfer operator, located as reciprocals of
//! zeros of 1 - phi inside the annulus 1 <= |z| < beta via the argument
//! principle: certified winding numbers over annular sector contours,
//! recursive subdivision, and Newton refinement with winding multiplicities.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::beta::{BetaSpec, Precision};
use crate::error::{Error, Result};
use crate::series::{DigitKind, SpectralFunction};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum EigenvalueKind {
    Leading,
    NonLeading,
}

/// One isolated eigenvalue with its winding multiplicity and a certified
/// residual of the defining equation at 1/lambda.
#[derive(Clone, Debug, Serialize)]
pub struct Eigenvalue {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub multiplicity: u32,
    pub residual: f64,
    pub kind: EigenvalueKind,
}

impl Eigenvalue {
    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.lambda_re, self.lambda_im)
    }
}

/// Full spectral report for one base.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub schema: u32,
    pub beta: f64,
    pub eigenvalues: Vec<Eigenvalue>,
    pub r_inner: f64,
    pub r_outer_requested: f64,
    pub r_outer_certified: f64,
    pub contour_winding_total: i64,
    pub subleading_modulus: Option<f64>,
    /// The annulus [r_outer_certified, beta) was not searched; completeness
    /// of the report is conditional on this uncovered ring.
    pub uncovered_outer: (f64, f64),
}

impl SpectrumReport {
    pub fn non_leading(&self) -> impl Iterator<Item = &Eigenvalue> {
        self.eigenvalues
            .iter()
            .filter(|e| e.kind == EigenvalueKind::NonLeading)
    }
}

const SAFETY: f64 = 3.0;
const MAX_SEG_DEPTH: u32 = 52;

#[derive(Copy, Clone, Debug)]
enum Seg {
    Arc { r: f64, th0: f64, th1: f64 },
    Radial { th: f64, r0: f64, r1: f64 },
}

impl Seg {
    fn point(&self, t: f64) -> Complex64 {
        match *self {
            Seg::Arc { r, th0, th1 } => Complex64::from_polar(r, th0 + t * (th1 - th0)),
            Seg::Radial { th, r0, r1 } => Complex64::from_polar(r0 + t * (r1 - r0), th),
        }
    }
}

struct Probe {
    v: Complex64,
    unc: f64, // certified phase uncertainty (radians)
}

fn probe(f: &SpectralFunction, z: Complex64) -> Result<Probe> {
    let (v, tail) = f.eval(z);
    let bound = tail + 1e-14 * (1.0 + v.norm());
    if v.norm() <= SAFETY * bound {
        return Err(Error::BoundaryZero { radius: z.norm() });
    }
    let ratio = (bound / v.norm()).min(1.0);
    Ok(Probe { v, unc: ratio.asin() })
}

fn darg_segment(
    f: &SpectralFunction,
    seg: Seg,
    t0: f64,
    p0: &Probe,
    t1: f64,
    p1: &Probe,
    depth: u32,
) -> Result<f64> {
    let delta = (p1.v / p0.v).arg();
    // accept only when the phase step is certifiably small AND the values
    // are close in relative terms, so the function cannot have looped
    // around the origin between the samples
    let close = (p1.v - p0.v).norm() <= 0.75 * p0.v.norm().min(p1.v.norm());
    if close && delta.abs() + p0.unc + p1.unc < 1.0 {
        return Ok(delta);
    }
    if depth >= MAX_SEG_DEPTH {
        return Err(Error::BoundaryZero {
            radius: seg.point(0.5 * (t0 + t1)).norm(),
        });
    }
    let tm = 0.5 * (t0 + t1);
    let pm = probe(f, seg.point(tm))?;
    Ok(darg_segment(f, seg, t0, p0, tm, &pm, depth + 1)?
        + darg_segment(f, seg, tm, &pm, t1, p1, depth + 1)?)
}

fn darg_over(f: &SpectralFunction, seg: Seg, initial: usize) -> Result<f64> {
    let mut total = 0.0;
    let mut prev_t = 0.0;
    let mut prev_p = probe(f, seg.point(0.0))?;
    for k in 1..=initial {
        let t = k as f64 / initial as f64;
        let p = probe(f, seg.point(t))?;
        total += darg_segment(f, seg, prev_t, &prev_p, t, &p, 0)?;
        prev_t = t;
        prev_p = p;
    }
    Ok(total)
}

#[derive(Copy, Clone, Debug)]
struct Cell {
    r0: f64,
    r1: f64,
    th0: f64,
    th1: f64,
}

impl Cell {
    fn winding(&self, f: &SpectralFunction) -> Result<i64> {
        // Sampling density must outrun the phase speed: near |z| = q beta the
        // series oscillates on the angular scale (1 - q), so endpoint tests
        // alone would be blind to whole hidden turns.
        let beta = f.beta();
        let density = |r: f64| -> f64 {
            let q = (r / beta).min(0.995);
            2.0 + 3.0 / (1.0 - q)
        };
        let arc_samples = |r: f64| -> usize {
            ((self.th1 - self.th0).abs() * density(r)).ceil() as usize + 2
        };
        let radial_samples = ((self.r1 / self.r0).ln() * density(self.r1)).ceil() as usize + 2;
        let mut total = 0.0;
        total += darg_over(
            f,
            Seg::Arc { r: self.r1, th0: self.th0, th1: self.th1 },
            arc_samples(self.r1),
        )?;
        total += darg_over(
            f,
            Seg::Radial { th: self.th1, r0: self.r1, r1: self.r0 },
            radial_samples,
        )?;
        total += darg_over(
            f,
            Seg::Arc { r: self.r0, th0: self.th1, th1: self.th0 },
            arc_samples(self.r0),
        )?;
        total += darg_over(
            f,
            Seg::Radial { th: self.th0, r0: self.r0, r1: self.r1 },
            radial_samples,
        )?;
        let w = total / (2.0 * std::f64::consts::PI);
        let rounded = w.round();
        if (w - rounded).abs() > 0.25 {
            return Err(Error::NonConvergence(format!(
                "winding {w} not close to an integer"
            )));
        }
        Ok(rounded as i64)
    }

    fn center(&self) -> Complex64 {
        Complex64::from_polar(0.5 * (self.r0 + self.r1), 0.5 * (self.th0 + self.th1))
    }

    fn diameter(&self) -> f64 {
        let radial = self.r1 - self.r0;
        let angular = self.r1 * (self.th1 - self.th0);
        radial.hypot(angular)
    }

    fn contains(&self, z: Complex64, slack: f64) -> bool {
        // slack is an absolute fuzz on both the radial and angular walls
        let tau = 2.0 * std::f64::consts::PI;
        let r = z.norm();
        if r < self.r0 - slack || r > self.r1 + slack {
            return false;
        }
        let ang_slack = slack / r.max(1e-9);
        let mut th = z.arg();
        while th < self.th0 - ang_slack {
            th += tau;
        }
        while th >= self.th0 - ang_slack + tau {
            th -= tau;
        }
        th <= self.th1 + ang_slack
    }
}

/// Count zeros of 1 - phi in the open annulus r_inner < |z| < r_outer by the
/// winding number of its boundary values.
pub fn count_zeros(beta: &BetaSpec, r_inner: f64, r_outer: f64) -> Result<i64> {
    if !(1.0 <= r_inner && r_inner < r_outer && r_outer <= 0.97 * beta.value()) {
        return Err(Error::DomainError(format!(
            "annulus [{r_inner}, {r_outer}] outside [1, 0.97*beta]"
        )));
    }
    let f = SpectralFunction::new(beta, DigitKind::Greedy)?;
    annulus_winding(&f, r_inner, r_outer)
}

fn annulus_winding(f: &SpectralFunction, r_inner: f64, r_outer: f64) -> Result<i64> {
    let cell = Cell { r0: r_inner, r1: r_outer, th0: 0.31, th1: 0.31 + 2.0 * std::f64::consts::PI };
    cell.winding(f)
}

struct ZeroHit {
    z: Complex64,
    multiplicity: u32,
    residual: f64,
}

fn newton_refine(
    f: &SpectralFunction,
    seed: Complex64,
    mult: u32,
    tol: f64,
) -> Result<(Complex64, f64)> {
    let mut z = seed;
    let m = mult.max(1) as f64;
    let mut last_step = f64::INFINITY;
    for _ in 0..80 {
        let (v, _) = f.eval(z);
        let (dv, _) = f.eval_deriv(z);
        if dv.norm() == 0.0 {
            return Err(Error::NonConvergence("vanishing derivative".into()));
        }
        let step = m * v / dv;
        z -= step;
        last_step = step.norm();
        if last_step < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    let (v, tail) = f.eval(z);
    let residual = v.norm() + tail;
    if residual > tol.max(1e-7) && last_step > 1e-10 {
        return Err(Error::NonConvergence(format!(
            "Newton stagnated with residual {residual}"
        )));
    }
    Ok((z, residual))
}

/// Fractions tried for a split line when a zero sits on (or too near) it.
const SPLIT_FRACTIONS: [f64; 8] = [0.5, 0.5625, 0.4375, 0.625, 0.375, 0.53125, 0.46875, 0.578125];

/// Split the cell along its longer side so that both children have certified
/// windings summing to the parent's. The split line is moved when a zero
/// obstructs it.
fn split_certified(
    f: &SpectralFunction,
    cell: Cell,
    w_parent: i64,
) -> Result<((Cell, i64), (Cell, i64))> {
    let radial = cell.r1 - cell.r0;
    let angular = 0.5 * (cell.r0 + cell.r1) * (cell.th1 - cell.th0);
    for &frac in SPLIT_FRACTIONS.iter() {
        let (c1, c2) = if angular >= radial {
            let thm = cell.th0 + frac * (cell.th1 - cell.th0);
            (Cell { th1: thm, ..cell }, Cell { th0: thm, ..cell })
        } else {
            let rm = cell.r0 + frac * (cell.r1 - cell.r0);
            (Cell { r1: rm, ..cell }, Cell { r0: rm, ..cell })
        };
        let w1 = match c1.winding(f) {
            Ok(w) => w,
            Err(Error::BoundaryZero { .. }) => continue,
            Err(e) => return Err(e),
        };
        let w2 = match c2.winding(f) {
            Ok(w) => w,
            Err(Error::BoundaryZero { .. }) => continue,
            Err(e) => return Err(e),
        };
        if w1 + w2 != w_parent {
            // a phase slipped through between the shared samples; move the wall
            continue;
        }
        return Ok(((c1, w1), (c2, w2)));
    }
    Err(Error::BoundaryZero { radius: cell.center().norm() })
}

fn locate_in_cell(
    f: &SpectralFunction,
    cell: Cell,
    w: i64,
    tol: f64,
    out: &mut Vec<ZeroHit>,
    depth: u32,
) -> Result<()> {
    if w == 0 {
        return Ok(());
    }
    let tiny = cell.diameter() < 1e-5;
    if w == 1 || tiny {
        if let Ok((z, residual)) = newton_refine(f, cell.center(), w.max(1) as u32, tol) {
            // strict containment: split walls were jittered off zeros, so a
            // zero of this cell lies strictly inside; anything else is an
            // escape to a neighboring basin and forces further splitting
            if cell.contains(z, 1e-10) {
                out.push(ZeroHit { z, multiplicity: w.max(1) as u32, residual });
                return Ok(());
            }
        }
        if depth > 52 || (tiny && cell.diameter() < 1e-9) {
            return Err(Error::NonConvergence(format!(
                "cell at {:?} kept winding {w} without a locatable zero",
                cell.center()
            )));
        }
    }
    let ((c1, w1), (c2, w2)) = split_certified(f, cell, w)?;
    locate_in_cell(f, c1, w1, tol, out, depth + 1)?;
    locate_in_cell(f, c2, w2, tol, out, depth + 1)?;
    Ok(())
}

/// Options for the eigenvalue search.
#[derive(Copy, Clone, Debug)]
pub struct LocateOptions {
    pub tol: f64,
    /// Outer search radius as a fraction of beta.
    pub ceiling: f64,
}

impl Default for LocateOptions {
    fn default() -> Self {
        LocateOptions { tol: 1e-10, ceiling: 0.95 }
    }
}

/// Locate every isolated eigenvalue with 1/beta < |lambda| <= 1: the leading
/// eigenvalue 1 (guaranteed) plus all zeros of 1 - phi in the searched
/// annulus, with winding multiplicities.
pub fn locate_eigenvalues(beta: &BetaSpec, opts: LocateOptions) -> Result<SpectrumReport> {
    let f = SpectralFunction::new(beta, DigitKind::Greedy)?;
    let tol = if f.is_rational() { opts.tol } else { opts.tol.max(1e-8) };
    let r_outer_requested = opts.ceiling * beta.value();
    let mut r_outer = r_outer_requested.min(f.certified_radius(1e-9));
    // clearance from the universal zero at z = 1; the thin ring
    // (1, r_inner] is excluded and reported as part of the search region
    let mut r_inner = 1.001;
    if r_outer <= r_inner * 1.0001 {
        return Err(Error::DomainError(format!(
            "certified search region empty: outer {r_outer} vs inner {r_inner}"
        )));
    }

    // the annulus as a single cell (the radial walls coincide and cancel);
    // jitter the radii and the wall angle on boundary hits
    let tau = 2.0 * std::f64::consts::PI;
    let mut theta = 0.31f64;
    let mut eps = 7.3e-4;
    let mut annulus = None;
    for _ in 0..10 {
        let cell = Cell { r0: r_inner, r1: r_outer, th0: theta, th1: theta + tau };
        match cell.winding(&f) {
            Ok(w) => {
                annulus = Some((cell, w));
                break;
            }
            Err(Error::BoundaryZero { radius }) => {
                let d_out = (radius - r_outer).abs();
                let d_in = (radius - r_inner).abs();
                let width = r_outer - r_inner;
                if d_out.min(d_in) > 0.05 * width {
                    // the obstruction sits on the radial wall, not a circle
                    theta += 0.37;
                } else if d_out <= d_in {
                    r_outer *= 1.0 - eps;
                    eps *= 2.0;
                } else {
                    r_inner *= 1.0 + eps;
                    eps *= 2.0;
                }
            }
            Err(e) => return Err(e),
        }
    }
    let (cell, total) = annulus.ok_or(Error::BoundaryZero { radius: r_outer })?;

    let mut hits: Vec<ZeroHit> = Vec::new();
    if total != 0 {
        locate_in_cell(&f, cell, total, tol, &mut hits, 0)?;
        hits.sort_by(|a, b| {
            (a.z.re, a.z.im)
                .partial_cmp(&(b.z.re, b.z.im))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let found: i64 = hits.iter().map(|h| h.multiplicity as i64).sum();
        if found != total {
            return Err(Error::NonConvergence(format!(
                "winding total {total} but located multiplicity sum {found}"
            )));
        }
    }

    let mut eigenvalues: Vec<Eigenvalue> = Vec::new();
    // the leading eigenvalue: z = 1 is always a zero (the expansion of 1 sums to 1)
    let (v1, t1) = f.eval(Complex64::new(1.0, 0.0));
    eigenvalues.push(Eigenvalue {
        lambda_re: 1.0,
        lambda_im: 0.0,
        multiplicity: 1,
        residual: v1.norm() + t1,
        kind: EigenvalueKind::Leading,
    });
    for h in &hits {
        let lam = 1.0 / h.z;
        eigenvalues.push(Eigenvalue {
            lambda_re: lam.re,
            lambda_im: lam.im,
            multiplicity: h.multiplicity,
            residual: h.residual,
            kind: EigenvalueKind::NonLeading,
        });
    }
    eigenvalues.sort_by(|a, b| {
        (b.lambda_re.hypot(b.lambda_im), a.lambda_re, a.lambda_im)
            .partial_cmp(&(a.lambda_re.hypot(a.lambda_im), b.lambda_re, b.lambda_im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let subleading_modulus = eigenvalues
        .iter()
        .filter(|e| e.kind == EigenvalueKind::NonLeading)
        .map(|e| e.lambda().norm())
        .fold(None, |acc: Option<f64>, m| {
            Some(acc.map_or(m, |a| a.max(m)))
        });
    Ok(SpectrumReport {
        schema: 1,
        beta: beta.value(),
        eigenvalues,
        r_inner,
        r_outer_requested,
        r_outer_certified: r_outer,
        contour_winding_total: total,
        subleading_modulus,
        uncovered_outer: (r_outer, beta.value()),
    })
}

/// Sub-leading data: the maximal modulus among non-leading eigenvalues and
/// every eigenvalue attaining it, or None when the searched annulus is clean.
pub fn subleading(beta: &BetaSpec) -> Result<Option<(f64, Vec<Eigenvalue>)>> {
    let report = locate_eigenvalues(beta, LocateOptions::default())?;
    Ok(subleading_of(&report))
}

pub fn subleading_of(report: &SpectrumReport) -> Option<(f64, Vec<Eigenvalue>)> {
    let m = report.subleading_modulus?;
    let attaining: Vec<Eigenvalue> = report
        .non_leading()
        .filter(|e| e.lambda().norm() >= m * (1.0 - 1e-9))
        .cloned()
        .collect();
    Some((m, attaining))
}

/// One record of a parameter scan.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRecord {
    pub index: usize,
    pub beta: f64,
    pub report: Option<SpectrumReport>,
    pub error: Option<String>,
}

/// Spectra over an even grid on [lo, hi]; per-point failures are recorded and
/// the scan continues. The output order is the grid order regardless of the
/// number of worker threads.
pub fn scan_beta_range(lo: f64, hi: f64, grid: usize, precision: Precision) -> Result<Vec<ScanRecord>> {
    if !(1.0 < lo && lo < hi) || grid < 2 {
        return Err(Error::InvalidInput(
            "scan needs 1 < lo < hi and grid >= 2".into(),
        ));
    }
    let points: Vec<(usize, f64)> = (0..grid)
        .map(|i| (i, lo + (hi - lo) * i as f64 / (grid - 1) as f64))
        .collect();
    let records: Vec<ScanRecord> = points
        .par_iter()
        .map(|&(index, b)| {
            let run = BetaSpec::from_value(b, precision)
                .and_then(|beta| locate_eigenvalues(&beta, LocateOptions { tol: 1e-8, ceiling: 0.95 }));
            match run {
                Ok(report) => ScanRecord { index, beta: b, report: Some(report), error: None },
                Err(e) => ScanRecord { index, beta: b, report: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    Ok(records)
}
