//! Property tests for the structural invariants: digit reconstruction,
//! admissibility, monotonicity, series identities, spectral symmetry, and
//! the exactness guarantees of the transfer action.

use num_complex::Complex64;
use proptest::prelude::*;

use betamap::beta::{BetaSpec, Point, Precision};
use betamap::expansion::{beta_from_digits, greedy_digits, is_admissible};
use betamap::series::{phi, psi};
use betamap::transfer::{apply_l, pointwise_product, Breakpoint, StepFn, StepFunction};

fn arb_beta() -> impl Strategy<Value = f64> {
    (1.06f64..5.94).prop_filter("away from integers", |b| {
        b.fract() > 0.03 && b.fract() < 0.97
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn digit_reconstruction_brackets_the_point(bv in arb_beta(), x in 0.0f64..1.0) {
        let b = BetaSpec::from_value(bv, Precision::Double).unwrap();
        let seq = greedy_digits(&b, &Point::Float(x), 36).unwrap();
        let mut acc = 0.0f64;
        for n in 1..=seq.trust_horizon.min(36) {
            acc += seq.greedy[n - 1] as f64 * bv.powi(-(n as i32));
            let gap = x - acc;
            prop_assert!(gap >= -1e-11, "partial sum exceeded the point at n={n}: {gap}");
            prop_assert!(gap < bv.powi(-(n as i32)) + 1e-11, "remainder too large at n={n}");
        }
    }

    #[test]
    fn computed_sequences_are_admissible(bv in arb_beta(), x in 0.0f64..1.0) {
        let b = BetaSpec::from_value(bv, Precision::Double).unwrap();
        let one = greedy_digits(&b, &Point::one(), 160).unwrap();
        let seq = greedy_digits(&b, &Point::Float(x), 24).unwrap();
        let trusted = &seq.greedy[..seq.trust_horizon.min(24)];
        prop_assert!(is_admissible(trusted, &one).unwrap());
    }

    #[test]
    fn digit_order_follows_point_order(bv in arb_beta(), x in 0.0f64..1.0, y in 0.0f64..1.0) {
        prop_assume!((x - y).abs() > 1e-9);
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        let b = BetaSpec::from_value(bv, Precision::Double).unwrap();
        let n = b.trust_horizon(24).max(1);
        let sl = greedy_digits(&b, &Point::Float(lo), n).unwrap();
        let sh = greedy_digits(&b, &Point::Float(hi), n).unwrap();
        prop_assert!(sl.greedy <= sh.greedy, "digits not monotone: {:?} vs {:?}", sl.greedy, sh.greedy);
    }

    #[test]
    fn quasi_greedy_expansion_of_one_sums_to_one(bv in arb_beta()) {
        let b = BetaSpec::from_value(bv, Precision::Double).unwrap();
        let n = 48;
        let d = b.quasi_digits_of_one(n).unwrap();
        let mut acc = 0.0f64;
        for (k, &dk) in d.iter().enumerate() {
            acc += dk as f64 * bv.powi(-(k as i32 + 1));
        }
        let cap = b.digit_cap() as f64;
        let bound = cap * bv.powi(-(n as i32)) / (1.0 - 1.0 / bv) + 1e-12;
        prop_assert!((1.0 - acc).abs() <= bound, "|1 - sum| = {} > {bound}", (1.0 - acc).abs());
    }

    #[test]
    fn factorization_identity_within_tails(bv in arb_beta(), r in 0.0f64..0.9, th in 0.0f64..std::f64::consts::TAU) {
        let b = BetaSpec::from_value(bv, Precision::Double).unwrap();
        let z = Complex64::from_polar(r * bv, th);
        let p = phi(&b, z, 3000).unwrap();
        let s = psi(&b, z, 3000).unwrap();
        let lhs = Complex64::new(1.0, 0.0) - p.value;
        let rhs = (Complex64::new(1.0, 0.0) - z) * s.value;
        let budget = p.tail_bound + (Complex64::new(1.0, 0.0) - z).norm() * s.tail_bound;
        prop_assert!((lhs - rhs).norm() <= budget);
    }

    #[test]
    fn psi_at_least_one_on_the_unit_interval(bv in arb_beta(), t in 0.0f64..1.0) {
        let b = BetaSpec::from_value(bv, Precision::Double).unwrap();
        let e = psi(&b, Complex64::new(t, 0.0), 2000).unwrap();
        prop_assert!(e.value.im.abs() < 1e-12);
        prop_assert!(e.value.re >= 1.0 - e.tail_bound - 1e-12);
    }

    #[test]
    fn parry_word_round_trip(bv in arb_beta()) {
        // truncating the expansion of 1 at a nonzero digit yields a valid
        // word whose base reproduces the word as its expansion of 1
        let b = BetaSpec::from_value(bv, Precision::Double).unwrap();
        let d = b.digits_of_one(14).unwrap();
        let l = (2..=14).rev().find(|&k| d[k - 1] > 0);
        prop_assume!(l.is_some());
        let word = &d[..l.unwrap()];
        let back = beta_from_digits(word, Precision::Double).unwrap();
        let again = back.digits_of_one(word.len()).unwrap();
        prop_assert_eq!(&again[..], word);
        prop_assert!(back.value() <= bv + 1e-12);
    }

    #[test]
    fn transfer_preserves_integral_and_grows_slowly(
        bv in arb_beta(),
        bps in proptest::collection::vec((0.01f64..0.999, -1.0f64..1.0, -1.0f64..1.0), 1..5),
    ) {
        let b = BetaSpec::from_value(bv, Precision::Double).unwrap();
        let terms: Vec<(Breakpoint, Complex64)> = bps
            .iter()
            .map(|&(x, cr, ci)| (Breakpoint::Float(x), Complex64::new(cr, ci)))
            .collect();
        let mut f: StepFunction = StepFn::from_terms(terms);
        let k = f.len();
        let mass = f.integral();
        for n in 1..=10 {
            f = apply_l(&b, &f).unwrap();
            prop_assert!(f.len() <= k + n + 1);
            prop_assert!((f.integral() - mass).norm() < 1e-11);
        }
    }

    #[test]
    fn step_product_matches_pointwise(
        xs in proptest::collection::vec((0.05f64..0.95, -1.0f64..1.0), 1..4),
        ys in proptest::collection::vec((0.05f64..0.95, -1.0f64..1.0), 1..4),
        t in 0.001f64..0.999,
    ) {
        let f: StepFunction = StepFn::from_terms(
            xs.iter().map(|&(x, c)| (Breakpoint::Float(x), Complex64::new(c, 0.3 * c))).collect(),
        );
        let g: StepFunction = StepFn::from_terms(
            ys.iter().map(|&(y, c)| (Breakpoint::Float(y), Complex64::new(c, -0.2 * c))).collect(),
        );
        // stay away from breakpoints where pointwise values are convention
        prop_assume!(xs.iter().all(|&(x, _)| (x - t).abs() > 1e-6));
        prop_assume!(ys.iter().all(|&(y, _)| (y - t).abs() > 1e-6));
        let p = pointwise_product(&f, &g);
        let expect = f.value_at(t) * g.value_at(t);
        prop_assert!((p.value_at(t) - expect).norm() < 1e-10);
    }
}

#[test]
fn conjugate_symmetry_of_located_spectra() {
    // all series coefficients are real, so non-real eigenvalues pair up
    for bv in [2.09, 2.44, 2.72, 3.37, 4.51] {
        let b = BetaSpec::from_value(bv, Precision::Double).unwrap();
        let rep = match betamap::spectra::locate_eigenvalues(&b, Default::default()) {
            Ok(r) => r,
            Err(_) => continue,
        };
        for e in rep.non_leading() {
            if e.lambda_im.abs() > 1e-9 {
                let found = rep
                    .non_leading()
                    .any(|o| (o.lambda() - e.lambda().conj()).norm() < 1e-8);
                assert!(found, "missing conjugate of {} at beta {}", e.lambda(), bv);
            }
        }
    }
}

#[test]
fn winding_totals_match_multiplicity_sums() {
    for bv in [2.16, 2.51, 2.65, 3.05] {
        let b = BetaSpec::from_value(bv, Precision::Double).unwrap();
        let rep = betamap::spectra::locate_eigenvalues(&b, Default::default()).unwrap();
        let sum: i64 = rep.non_leading().map(|e| e.multiplicity as i64).sum();
        assert_eq!(sum, rep.contour_winding_total, "at beta {}", bv);
    }
}
