//! Property tests for the arithmetic kernel, the parser and the geometric
//! iteration.

use proptest::prelude::*;

use overtile_core::geometry::{apply, realize};
use overtile_core::num::{rat, rat_int, FieldContext, QPoly, Rational, Scalar};
use overtile_core::rules::{parse_rules, RuleError};
use overtile_core::spectral::{pf_data, substitution_matrix};

fn silver_ctx() -> FieldContext {
    FieldContext::for_dominant_root(&QPoly::from_ints(&[-1, -2, 1])).unwrap()
}

fn cubic_ctx() -> FieldContext {
    FieldContext::for_dominant_root(&QPoly::from_ints(&[2, -1, -4, 1])).unwrap()
}

prop_compose! {
    fn small_rational()(n in -40i64..=40, d in 1i64..=12) -> Rational {
        rat(n, d)
    }
}

fn element(
    ctx: &FieldContext,
    coeffs: &[Rational],
) -> overtile_core::num::FieldElement {
    ctx.from_poly(&QPoly::new(coeffs.to_vec()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn addition_is_associative(
        a in prop::collection::vec(small_rational(), 3),
        b in prop::collection::vec(small_rational(), 3),
        c in prop::collection::vec(small_rational(), 3),
    ) {
        let ctx = cubic_ctx();
        let (x, y, z) = (element(&ctx, &a), element(&ctx, &b), element(&ctx, &c));
        let left = x.try_add(&y).unwrap().try_add(&z).unwrap();
        let right = x.try_add(&y.try_add(&z).unwrap()).unwrap();
        prop_assert!(left.try_sub(&right).unwrap().is_zero_value());
    }

    #[test]
    fn multiplication_distributes(
        a in prop::collection::vec(small_rational(), 3),
        b in prop::collection::vec(small_rational(), 3),
        c in prop::collection::vec(small_rational(), 3),
    ) {
        let ctx = cubic_ctx();
        let (x, y, z) = (element(&ctx, &a), element(&ctx, &b), element(&ctx, &c));
        let left = x.try_mul(&y.try_add(&z).unwrap()).unwrap();
        let right = x.try_mul(&y).unwrap().try_add(&x.try_mul(&z).unwrap()).unwrap();
        prop_assert!(left.try_sub(&right).unwrap().is_zero_value());
    }

    #[test]
    fn inverse_multiplies_to_one(a in prop::collection::vec(small_rational(), 2)) {
        let ctx = silver_ctx();
        let x = element(&ctx, &a);
        if !x.is_zero_value() {
            match x.inv() {
                Ok(inv) => {
                    let prod = x.try_mul(&inv).unwrap();
                    prop_assert!(prod.try_sub(&ctx.one()).unwrap().is_zero_value());
                }
                // x was a zero divisor that became zero after a split
                Err(_) => prop_assert!(x.is_zero_value()),
            }
        }
    }

    #[test]
    fn float_value_tracks_midpoint_evaluation(
        coeffs in prop::collection::vec(-1000i64..=1000, 3),
    ) {
        // |f64 Horner at the midpoint - exact evaluation| <= 2^-40 for
        // coefficient height <= 10^3
        let ctx = cubic_ctx();
        let qs: Vec<Rational> = coeffs.iter().map(|&c| rat_int(c)).collect();
        let x = element(&ctx, &qs);
        let (lo, hi) = ctx.interval();
        let mid = (lo + hi) / Rational::from_integer(2.into());
        let mid_f = Scalar::from_rational_f64(&mid);
        let horner = qs.iter().rev().fold(0.0_f64, |acc, c| {
            acc * mid_f + Scalar::from_rational_f64(c)
        });
        let exact = x.to_f64();
        prop_assert!((horner - exact).abs() <= (2.0_f64).powi(-40) * (1.0 + exact.abs()));
    }

    #[test]
    fn interior_fractional_weight_is_always_rejected(
        head in 0usize..3,
        position in 0usize..3,
        num in 1i64..=3,
    ) {
        // mutate a valid document by inserting a sub-1 weight at an interior
        // position of one image
        let den = num + 1; // weight in (0, 1)
        let base = [
            vec!["[a:1/2]", "b", "a"],
            vec!["c", "b", "[a:1/2]"],
            vec!["b", "c", "[a:1/2]"],
        ];
        let mut images = base.map(|v| v.iter().map(|s| s.to_string()).collect::<Vec<_>>());
        let interior = 1 + position.min(images[head].len().saturating_sub(3));
        images[head][interior] = format!("[b:{num}/{den}]");
        let doc = format!(
            "alphabet a b c; a -> {}; b -> {}; c -> {};",
            images[0].join(" "),
            images[1].join(" "),
            images[2].join(" "),
        );
        match parse_rules(&doc) {
            Err(RuleError::InteriorWeightNotOne { .. }) => {}
            other => prop_assert!(false, "expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn apply_commutes_with_translation(n in -60i64..=60, d in 1i64..=9) {
        let sub = parse_rules(
            "alphabet a b c; a -> [a:1/2] b a; b -> c [a:1/2]; c -> b [a:1/2];",
        ).unwrap();
        let m = substitution_matrix(&sub);
        let pf = pf_data(&m).unwrap();
        let g = realize(&sub, &pf).unwrap();
        let x = g.scalar_from_rational(&rat(n, d));
        let p = g.patch_from_word(&[1, 0], g.zero());
        let lhs = apply(&g, &p.translate(&x)).unwrap();
        let rhs = apply(&g, &p).unwrap().translate(&g.beta.mul(&x));
        prop_assert_eq!(lhs.len(), rhs.len());
        for (s, t) in lhs.tiles().iter().zip(rhs.tiles()) {
            prop_assert_eq!(s.label, t.label);
            prop_assert!(s.left.sub(&t.left).sign() == 0);
        }
    }

    #[test]
    fn patch_invariant_maintained_after_apply(word in prop::collection::vec(0usize..3, 1..6)) {
        // admissible words only: consecutive pairs must be adjacency edges
        let sub = parse_rules(
            "alphabet a b c; a -> [a:1/2] b a; b -> c [a:1/2]; c -> b [a:1/2];",
        ).unwrap();
        let edges = [(0, 1), (1, 0), (2, 0), (0, 2)];
        let mut admissible = vec![word[0]];
        for &w in &word[1..] {
            let prev = *admissible.last().unwrap();
            if edges.contains(&(prev, w)) {
                admissible.push(w);
            }
        }
        let m = substitution_matrix(&sub);
        let pf = pf_data(&m).unwrap();
        let g = realize(&sub, &pf).unwrap();
        let mut p = g.patch_from_word(&admissible, g.zero());
        for _ in 0..3 {
            p = apply(&g, &p).unwrap();
            // sorted with non-overlapping interiors
            for pair in p.tiles().windows(2) {
                let right = g.right_end(&pair[0]);
                prop_assert!(right.sub(&pair[1].left).sign() <= 0
                    || right.approx_eq(&pair[1].left, g.eps));
                prop_assert!(pair[0].left.cmp_value(&pair[1].left) != std::cmp::Ordering::Greater);
            }
        }
    }
}

/// sign(a·b) = sign(a)·sign(b) over a deterministic sweep of 1000 pairs.
#[test]
fn sign_is_multiplicative_over_thousand_pairs() {
    let ctx = silver_ctx();
    let mut state = 0x2545F4914F6CDD1Du64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    let mut checked = 0;
    while checked < 1000 {
        let coeffs_a = vec![
            rat((next() % 41) as i64 - 20, 1 + (next() % 7) as i64),
            rat((next() % 41) as i64 - 20, 1 + (next() % 7) as i64),
        ];
        let coeffs_b = vec![
            rat((next() % 41) as i64 - 20, 1 + (next() % 7) as i64),
            rat((next() % 41) as i64 - 20, 1 + (next() % 7) as i64),
        ];
        let a = ctx.from_poly(&QPoly::new(coeffs_a));
        let b = ctx.from_poly(&QPoly::new(coeffs_b));
        if a.is_zero_value() || b.is_zero_value() {
            continue;
        }
        let prod = a.try_mul(&b).unwrap();
        assert_eq!(prod.sign(), a.sign() * b.sign());
        checked += 1;
    }
}

/// Every context keeps a sign change of the modulus across its interval.
#[test]
fn contexts_bracket_their_root() {
    use num_traits::{Signed, Zero};
    for poly in [
        QPoly::from_ints(&[-1, -2, 1]),
        QPoly::from_ints(&[2, -1, -4, 1]),
        QPoly::from_ints(&[-1, -1, 1]),
    ] {
        let ctx = FieldContext::for_dominant_root(&poly).unwrap();
        let m = ctx.modulus();
        let (lo, hi) = ctx.interval();
        if lo == hi {
            assert!(m.eval(&lo).is_zero());
        } else {
            assert!(m.eval(&lo).is_negative() != m.eval(&hi).is_negative());
            // interior rational points split the interval into one side
            // with the root: the modulus changes sign on exactly one half
            let mid = (&lo + &hi) / Rational::from_integer(2.into());
            let vm = m.eval(&mid);
            if !vm.is_zero() {
                let lo_change = m.eval(&lo).is_negative() != vm.is_negative();
                let hi_change = vm.is_negative() != m.eval(&hi).is_negative();
                assert!(lo_change != hi_change);
            }
        }
    }
}

/// Scale invariance: rescaling the length vector by c rescales frequencies
/// by 1/c and leaves the realization similar.
#[test]
fn pf_rescaling_scales_geometry() {
    let sub = parse_rules(
        "alphabet a b c; a -> [a:1/2] b a; b -> c [a:1/2]; c -> b [a:1/2];",
    )
    .unwrap();
    let m = substitution_matrix(&sub);
    let pf = pf_data(&m).unwrap();
    let ctx = pf.context.clone().unwrap();
    let c = Scalar::Exact(ctx.from_rational(rat(7, 3)));
    let scaled = pf.rescale(&c);
    let g1 = realize(&sub, &pf).unwrap();
    let g2 = realize(&sub, &scaled).unwrap();
    for (r1, r2) in g1.rules.iter().zip(&g2.rules) {
        for (t1, t2) in r1.tiles().iter().zip(r2.tiles()) {
            assert_eq!(t1.label, t2.label);
            // positions scale exactly by c
            let scaled_left = t1.left.mul(&c);
            assert_eq!(scaled_left.sub(&t2.left).sign(), 0);
        }
    }
}
