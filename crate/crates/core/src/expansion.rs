//! Greedy and quasi-greedy digit expansions, admissibility checks, and the
//! inverse problem of recovering a base from a digit word.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::beta::{tail_value, BetaSpec, Point, Precision};
use crate::error::{Error, Result};

/// Simplicity classification of a point: the orbit hit a branch endpoint at
/// step `index` (so the expansion terminates), or no hit was detected up to
/// the examined horizon. Non-simplicity is never asserted.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Simplicity {
    Simple { index: usize },
    NotDetected { horizon: usize },
}

impl Simplicity {
    pub fn is_simple(&self) -> bool {
        matches!(self, Simplicity::Simple { .. })
    }
}

/// Digit data of one point under one base.
#[derive(Clone, Debug)]
pub struct DigitSequence {
    pub beta: f64,
    pub point: f64,
    pub greedy: Vec<u32>,
    pub quasi_greedy: Vec<u32>,
    pub simple: Simplicity,
    /// Number of leading digits guaranteed correct. Exact-mode digits are
    /// trusted to the full horizon.
    pub trust_horizon: usize,
}

/// Forward orbit of 1 and its left-limit counterpart.
#[derive(Clone, Debug)]
pub struct OrbitOfOne {
    pub beta: f64,
    pub forward: Vec<f64>,
    pub left_limits: Vec<f64>,
}

fn check_unit_interval(xf: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&xf) {
        return Err(Error::DomainError(format!("point {xf} outside [0,1]")));
    }
    Ok(())
}

/// Greedy digits a_1..a_horizon of x: a_n = floor(beta * tau^{n-1}(x)).
pub fn greedy_digits(beta: &BetaSpec, x: &Point, horizon: usize) -> Result<DigitSequence> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be >= 1".into()));
    }
    let xf = x.to_f64();
    check_unit_interval(xf)?;
    let (greedy, simple_idx, exact) = beta.run_digits(x, horizon)?;
    let trust = if exact { horizon } else { beta.trust_horizon(horizon) };
    let simple = match simple_idx {
        Some(l) => Simplicity::Simple { index: l },
        None => Simplicity::NotDetected { horizon },
    };
    let quasi = quasi_from_greedy(beta, &greedy, &simple, horizon)?;
    Ok(DigitSequence {
        beta: beta.value(),
        point: xf,
        greedy,
        quasi_greedy: quasi,
        simple,
        trust_horizon: trust,
    })
}

/// Quasi-greedy digits of x in (0,1]: the left-limit digit sequence. For a
/// simple point with index L the word a_1..a_{L-1}(a_L - 1) is followed by
/// the quasi-greedy digits of 1; otherwise it coincides with the greedy one.
pub fn quasi_greedy_digits(beta: &BetaSpec, x: &Point, horizon: usize) -> Result<DigitSequence> {
    let xf = x.to_f64();
    if xf <= 0.0 {
        return Err(Error::DomainError(
            "quasi-greedy expansion requires x in (0,1]".into(),
        ));
    }
    greedy_digits(beta, x, horizon)
}

fn quasi_from_greedy(
    beta: &BetaSpec,
    greedy: &[u32],
    simple: &Simplicity,
    horizon: usize,
) -> Result<Vec<u32>> {
    match simple {
        Simplicity::Simple { index: l } => {
            let mut out: Vec<u32> = greedy[..l - 1].to_vec();
            debug_assert!(greedy[l - 1] >= 1);
            out.push(greedy[l - 1] - 1);
            if out.len() < horizon {
                let rest = beta.quasi_digits_of_one(horizon - out.len())?;
                out.extend_from_slice(&rest);
            }
            out.truncate(horizon);
            Ok(out)
        }
        Simplicity::NotDetected { .. } => Ok(greedy.to_vec()),
    }
}

/// Simplicity of a point: exact detection when the base (or the point) admits
/// exact arithmetic; float precisions never assert a hit.
pub fn classify_simple(beta: &BetaSpec, x: &Point, horizon: usize) -> Result<Simplicity> {
    Ok(greedy_digits(beta, x, horizon)?.simple)
}

fn cmp_digit(a: u32, b: u32) -> std::cmp::Ordering {
    a.cmp(&b)
}

enum LexOutcome {
    Less,
    GreaterOrEqualBlocked, // word is not strictly below the reference
    Undecided,             // reference digits exhausted while comparing
}

/// Strict lexicographic test: word (zero-padded) < reference sequence.
/// `ref_eventually_zero` tells whether the reference is known to vanish past
/// its stored digits (finite greedy word) or known to contain further nonzero
/// digits (quasi-greedy sequences never die out).
fn word_strictly_below(word: &[u32], reference: &[u32], ref_eventually_zero: Option<bool>) -> LexOutcome {
    for (k, &w) in word.iter().enumerate() {
        if k >= reference.len() {
            return LexOutcome::Undecided;
        }
        match cmp_digit(w, reference[k]) {
            std::cmp::Ordering::Less => return LexOutcome::Less,
            std::cmp::Ordering::Greater => return LexOutcome::GreaterOrEqualBlocked,
            std::cmp::Ordering::Equal => {}
        }
    }
    // equal on the word's length: the zero-padded word is strictly smaller
    // unless the reference is also eventually zero there
    if let Some(&d) = reference[word.len()..].iter().find(|&&d| d > 0) {
        let _ = d;
        return LexOutcome::Less;
    }
    match ref_eventually_zero {
        Some(true) => LexOutcome::GreaterOrEqualBlocked, // equal, not strictly below
        Some(false) => LexOutcome::Less,
        None => LexOutcome::Undecided,
    }
}

/// Is `word` a valid greedy-digit prefix for some point of [0,1] under the
/// base that produced `one`? Every proper shift must lie strictly below the
/// quasi-greedy sequence of 1; the word itself may not exceed the greedy
/// sequence of 1.
pub fn is_admissible(word: &[u32], one: &DigitSequence) -> Result<bool> {
    let cap = one.greedy.first().copied().unwrap_or(0);
    if word.iter().any(|&d| d > cap) {
        return Ok(false);
    }
    // shift 0 against the greedy expansion of 1; equality as a prefix is
    // allowed (the word then describes x = 1 or a truncation of it)
    for (k, &w) in word.iter().enumerate() {
        if k >= one.greedy.len() {
            return Err(Error::InsufficientDigits(
                "expansion of 1 too short for the comparison".into(),
            ));
        }
        match cmp_digit(w, one.greedy[k]) {
            std::cmp::Ordering::Less => break,
            std::cmp::Ordering::Greater => return Ok(false),
            std::cmp::Ordering::Equal => {}
        }
    }
    // proper shifts against the quasi-greedy sequence of 1 (strict)
    for i in 1..word.len() {
        match word_strictly_below(&word[i..], &one.quasi_greedy, Some(false)) {
            LexOutcome::Less => {}
            LexOutcome::GreaterOrEqualBlocked => return Ok(false),
            LexOutcome::Undecided => {
                return Err(Error::InsufficientDigits(format!(
                    "shift {i} undecided within available digits"
                )))
            }
        }
    }
    Ok(true)
}

/// The unique base beta > 1 whose greedy expansion of 1 is the given word
/// (delivered as a polynomial-defined base over an isolating interval).
/// Requires the self-admissibility condition: every proper shift of the
/// zero-padded word is strictly below the word itself, and w_1 >= 1.
pub fn beta_from_digits(word: &[u32], precision: Precision) -> Result<BetaSpec> {
    if word.is_empty() || word[0] == 0 {
        return Err(Error::InadmissibleWord("word must start with a digit >= 1".into()));
    }
    if word.last() == Some(&0) {
        return Err(Error::InadmissibleWord(
            "word must end with a nonzero digit (trailing zeros change nothing)".into(),
        ));
    }
    let padded: Vec<u32> = word.to_vec();
    for i in 1..padded.len() {
        // compare shift_i of the zero-padded word against the word itself
        let mut decided = false;
        for k in 0..padded.len() {
            let a = if i + k < padded.len() { padded[i + k] } else { 0 };
            let b = padded[k];
            match cmp_digit(a, b) {
                std::cmp::Ordering::Less => {
                    decided = true;
                    break;
                }
                std::cmp::Ordering::Greater => {
                    return Err(Error::InadmissibleWord(format!(
                        "shift {i} is lexicographically above the word"
                    )))
                }
                std::cmp::Ordering::Equal => {}
            }
        }
        if !decided {
            return Err(Error::InadmissibleWord(format!(
                "shift {i} equals the word's tail; the expansion would not be greedy"
            )));
        }
    }
    if word.len() == 1 {
        return Err(Error::InvalidInput(format!(
            "word ({}) defines the integer base {}, which is rejected",
            word[0], word[0]
        )));
    }
    // Parry polynomial x^L - w_1 x^{L-1} - ... - w_L on (w_1, w_1 + 1)
    let mut coeffs: Vec<i64> = Vec::with_capacity(word.len() + 1);
    coeffs.push(1);
    for &w in word {
        coeffs.push(-(w as i64));
    }
    BetaSpec::from_poly(&coeffs, word[0] as f64, word[0] as f64 + 1.0, precision)
}

/// Forward orbit of 1 together with the left-limit orbit.
pub fn orbit_of_one(beta: &BetaSpec, horizon: usize) -> Result<OrbitOfOne> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be >= 1".into()));
    }
    Ok(OrbitOfOne {
        beta: beta.value(),
        forward: beta.orbit_of_one_f64(horizon)?,
        left_limits: beta.left_orbit_of_one_f64(horizon)?,
    })
}

/// Reconstruct the point value from a digit prefix: sum of a_n beta^-n.
pub fn partial_value(beta: f64, digits: &[u32]) -> f64 {
    tail_value(digits, 0, beta)
}

/// Exact partial value as a rational in the base element (polynomial mode).
pub fn partial_value_point(beta: &BetaSpec, digits: &[u32]) -> Result<Point> {
    match beta.field() {
        Some(field) => {
            use crate::algebraic::AlgElem;
            let root = AlgElem::root(field);
            let inv = root.inv()?;
            let mut acc = AlgElem::zero(field);
            for &d in digits.iter().rev() {
                acc = &(&acc + &AlgElem::from_i64(field, d as i64)) * &inv;
            }
            Ok(Point::Exact(acc))
        }
        None => {
            let b = BigRational::from_float(beta.value()).unwrap();
            let mut acc = BigRational::from_integer(BigInt::from(0));
            for &d in digits.iter().rev() {
                acc = (acc + BigRational::from_integer(BigInt::from(d))) / &b;
            }
            Ok(Point::Rational(acc))
        }
    }
}
