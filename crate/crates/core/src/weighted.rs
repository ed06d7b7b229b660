//! Weighted patterns and the lifted substitution.
//!
//! A weighted pattern assigns a nonnegative weight to finitely many tiles;
//! tiles outside the support carry weight 0. The lift of a geometric
//! overlapping substitution weights every rule tile by the fraction of its
//! volume covered by the inflated proto-tile support, which makes boundary
//! stick-outs carry fractional weights and reproduces the substitution
//! matrix through the translate-sum functionals `τ`. Weighted patterns of
//! coinciding tiles add, so the two halves of a shared stick-out merge to
//! a full tile under iteration.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{GeomSubstitution, Patch, Tile};
use crate::num::{Mode, Rational, Scalar};
use crate::spectral::PFData;

#[derive(Debug, Error)]
pub enum WeightedError {
    #[error("window [{lo}, {hi}] is not covered by the patch")]
    WindowNotCovered { lo: f64, hi: f64 },
}

/// Sparse weighted pattern: tiles with nonzero weights, sorted by
/// (left, label). In float mode positions are quantized to a 2⁻³⁰ grid
/// before merging so that weight addition is well-defined under rounding.
#[derive(Debug, Clone, Default)]
pub struct WeightedPattern {
    entries: Vec<(Tile, Scalar)>,
}

const FLOAT_GRID: f64 = 1073741824.0; // 2^30

fn quantize(tile: &Tile, mode: Mode) -> Tile {
    match (mode, &tile.left) {
        (Mode::Float, Scalar::Float(v)) => Tile {
            label: tile.label,
            left: Scalar::Float((v * FLOAT_GRID).round() / FLOAT_GRID),
        },
        _ => tile.clone(),
    }
}

fn normalize_entries(g: &GeomSubstitution, raw: Vec<(Tile, Scalar)>) -> WeightedPattern {
    let mut entries: Vec<(Tile, Scalar)> = raw
        .into_iter()
        .map(|(t, w)| (quantize(&t, g.mode), w))
        .collect();
    entries.sort_by(|(s, _), (t, _)| {
        s.left.cmp_value(&t.left).then(s.label.cmp(&t.label))
    });
    let mut out: Vec<(Tile, Scalar)> = Vec::with_capacity(entries.len());
    for (tile, weight) in entries {
        if let Some((prev, acc)) = out.last_mut() {
            if prev.label == tile.label
                && prev.left.cmp_value(&tile.left) == Ordering::Equal
            {
                *acc = acc.add(&weight);
                continue;
            }
        }
        out.push((tile, weight));
    }
    out.retain(|(_, w)| !w.is_zero_value());
    WeightedPattern { entries: out }
}

impl WeightedPattern {
    pub fn zero() -> Self {
        WeightedPattern { entries: Vec::new() }
    }

    /// Point mass δ_T.
    pub fn delta(g: &GeomSubstitution, tile: Tile) -> Self {
        let one = g.scalar_from_rational(&Rational::from_integer(1.into()));
        normalize_entries(g, vec![(tile, one)])
    }

    /// Indicator of a patch: weight 1 on every tile.
    pub fn indicator(g: &GeomSubstitution, patch: &Patch) -> Self {
        let one = g.scalar_from_rational(&Rational::from_integer(1.into()));
        normalize_entries(
            g,
            patch.tiles().iter().map(|t| (t.clone(), one.clone())).collect(),
        )
    }

    pub fn entries(&self) -> &[(Tile, Scalar)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Support pattern SP(v): the tiles carrying nonzero weight.
    pub fn support_pattern(&self) -> Vec<&Tile> {
        self.entries.iter().map(|(t, _)| t).collect()
    }

    /// Support region SR(v) as (min left, max right).
    pub fn support_region(&self, g: &GeomSubstitution) -> Option<(Scalar, Scalar)> {
        let first = self.entries.first()?;
        let mut hi = g.right_end(&first.0);
        for (t, _) in &self.entries {
            let r = g.right_end(t);
            if r.cmp_value(&hi) == Ordering::Greater {
                hi = r;
            }
        }
        Some((first.0.left.clone(), hi))
    }

    pub fn scale(&self, c: &Scalar) -> WeightedPattern {
        WeightedPattern {
            entries: self
                .entries
                .iter()
                .map(|(t, w)| (t.clone(), w.mul(c)))
                .collect(),
        }
    }

    /// Weight of a specific tile (0 if absent).
    pub fn weight_of(&self, g: &GeomSubstitution, tile: &Tile) -> Scalar {
        for (t, w) in &self.entries {
            if t.label == tile.label && t.left.approx_eq(&tile.left, g.eps) {
                return w.clone();
            }
        }
        g.zero()
    }
}

/// The lifted (weighted) substitution ξ: per-letter weighted patterns in
/// rule coordinates.
#[derive(Debug, Clone)]
pub struct LiftedSubstitution {
    pub patterns: Vec<WeightedPattern>,
}

/// Weight each rule tile by `vol(φ(supp T_i) ∩ supp S) / vol(supp S)`:
/// interior tiles get weight 1, stick-outs their covered fraction.
pub fn lift(g: &GeomSubstitution) -> LiftedSubstitution {
    let zero = g.zero();
    let mut patterns = Vec::with_capacity(g.kappa());
    for (i, rule) in g.rules.iter().enumerate() {
        let inflated_hi = g.beta.mul(&g.lengths[i]);
        let mut entries = Vec::with_capacity(rule.len());
        for tile in rule.tiles() {
            let right = g.right_end(tile);
            // |[0, βl_i] ∩ [left, right]|
            let lo = if tile.left.sub(&zero).sign() > 0 { tile.left.clone() } else { zero.clone() };
            let hi = if right.sub(&inflated_hi).sign() < 0 { right.clone() } else { inflated_hi.clone() };
            let overlap = hi.sub(&lo);
            if overlap.sign() <= 0 {
                continue;
            }
            let weight = overlap.div(&g.lengths[tile.label]).expect("positive length");
            entries.push((tile.clone(), weight));
        }
        patterns.push(normalize_entries(g, entries));
    }
    LiftedSubstitution { patterns }
}

/// Apply ξ to a weighted pattern: `ξ(v) = Σ_T v(T) ξ(T)` with
/// `ξ(T + x) = ξ(T) + φ(x)`; weights of coinciding tiles add.
pub fn xi_apply(
    g: &GeomSubstitution,
    xi: &LiftedSubstitution,
    v: &WeightedPattern,
) -> WeightedPattern {
    let mut raw = Vec::new();
    for (tile, weight) in v.entries() {
        let shift = g.beta.mul(&tile.left);
        for (rt, rw) in xi.patterns[tile.label].entries() {
            raw.push((
                Tile { label: rt.label, left: rt.left.add(&shift) },
                rw.mul(weight),
            ));
        }
    }
    normalize_entries(g, raw)
}

pub fn xi_apply_n(
    g: &GeomSubstitution,
    xi: &LiftedSubstitution,
    v: &WeightedPattern,
    n: usize,
) -> WeightedPattern {
    let mut current = v.clone();
    for _ in 0..n {
        current = xi_apply(g, xi, &current);
    }
    current
}

/// Cut-off `v ∧ K`: keep entries with `supp T ⊆ [lo, hi]`.
pub fn cutoff(
    g: &GeomSubstitution,
    v: &WeightedPattern,
    lo: &Scalar,
    hi: &Scalar,
) -> WeightedPattern {
    WeightedPattern {
        entries: v
            .entries
            .iter()
            .filter(|(t, _)| {
                let right = g.right_end(t);
                t.left.sub(lo).sign() >= 0 && right.sub(hi).sign() <= 0
            })
            .cloned()
            .collect(),
    }
}

/// `τ_{T_i}(v) = Σ_x v(T_i + x)`: total weight of all translates of the
/// proto-tile with the given letter.
pub fn tau(g: &GeomSubstitution, v: &WeightedPattern, letter: usize) -> Scalar {
    let mut acc = g.zero();
    for (t, w) in &v.entries {
        if t.label == letter {
            acc = acc.add(w);
        }
    }
    acc
}

/// The substitution matrix recovered from the lift:
/// `M[i][j] = τ_{T_i}(ξ(T_j))`.
pub fn lifted_matrix(g: &GeomSubstitution, xi: &LiftedSubstitution) -> Vec<Vec<Scalar>> {
    (0..g.kappa())
        .map(|i| {
            (0..g.kappa())
                .map(|j| tau(g, &xi.patterns[j], i))
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Van Hove windows and empirical frequencies
// ---------------------------------------------------------------------------

/// An averaging window `A = [lo, hi]` with a margin `L` splitting it into
/// the interior `A^{-L} = [lo+L, hi-L]` and the boundary
/// `∂^L A = [lo-L, lo+L] ∪ [hi-L, hi+L]`.
#[derive(Debug, Clone)]
pub struct VanHoveWindow {
    pub lo: Rational,
    pub hi: Rational,
    pub margin: Rational,
}

impl VanHoveWindow {
    pub fn new(lo: Rational, hi: Rational, margin: Rational) -> Self {
        assert!(hi > lo, "window must have positive length");
        VanHoveWindow { lo, hi, margin }
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// `A^{-L}`, or None when degenerate.
    pub fn interior(&self) -> Option<(Rational, Rational)> {
        let lo = &self.lo + &self.margin;
        let hi = &self.hi - &self.margin;
        (hi > lo).then_some((lo, hi))
    }

    /// Lebesgue measure of `∂^L A` (the two margin intervals may overlap).
    pub fn boundary_measure(&self) -> Rational {
        let four_l = Rational::from_integer(4.into()) * &self.margin;
        let merged = self.length() + Rational::from_integer(2.into()) * &self.margin;
        if four_l < merged {
            four_l
        } else {
            merged
        }
    }

    /// The diagnostic ratio `|∂^L A| / |A|` controlling the boundary error
    /// of window averages.
    pub fn boundary_ratio(&self) -> f64 {
        Scalar::from_rational_f64(&(self.boundary_measure() / self.length()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LetterStats {
    pub letter: String,
    pub count: usize,
    pub density: f64,
    pub target: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowStats {
    pub lo: f64,
    pub hi: f64,
    pub length: f64,
    pub boundary_ratio: f64,
    pub letters: Vec<LetterStats>,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrequencyReport {
    pub windows: Vec<WindowStats>,
}

impl FrequencyReport {
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("window,letter,count,density,r_i,deviation\n");
        for w in &self.windows {
            for l in &w.letters {
                let _ = writeln!(
                    out,
                    "[{:.6};{:.6}],{},{},{:.12},{:.12},{:.12}",
                    w.lo, w.hi, l.letter, l.count, l.density, l.target, l.deviation
                );
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable report")
    }
}

/// Count tiles per letter inside each window and compare the densities
/// `count_i / |A|` against the normalized right eigenvector.
pub fn empirical_frequency(
    g: &GeomSubstitution,
    pf: &PFData,
    patch: &Patch,
    windows: &[VanHoveWindow],
) -> Result<FrequencyReport, WeightedError> {
    let mut out = Vec::with_capacity(windows.len());
    for w in windows {
        let lo = g.scalar_from_rational(&w.lo);
        let hi = g.scalar_from_rational(&w.hi);
        let covered = patch.support(g).is_some_and(|(slo, shi)| {
            slo.sub(&lo).sign() <= 0 && shi.sub(&hi).sign() >= 0
        });
        if !covered {
            return Err(WeightedError::WindowNotCovered {
                lo: lo.to_f64(),
                hi: hi.to_f64(),
            });
        }
        let inside = patch.cut_contained(g, &lo, &hi);
        let length = Scalar::from_rational_f64(&w.length());
        let mut letters = Vec::with_capacity(g.kappa());
        let mut max_deviation = 0.0_f64;
        for i in 0..g.kappa() {
            let count = inside.tiles().iter().filter(|t| t.label == i).count();
            let density = count as f64 / length;
            let target = pf.right[i].to_f64();
            let deviation = (density - target).abs();
            max_deviation = max_deviation.max(deviation);
            letters.push(LetterStats {
                letter: g.labels[i].clone(),
                count,
                density,
                target,
                deviation,
            });
        }
        out.push(WindowStats {
            lo: lo.to_f64(),
            hi: hi.to_f64(),
            length,
            boundary_ratio: w.boundary_ratio(),
            letters,
            max_deviation,
        });
    }
    Ok(FrequencyReport { windows: out })
}

/// Maximal diameter of the level-`n` images `SR(ξ^n(δ_{T_i}))`, the margin
/// below which window interiors are unaffected by boundary effects.
pub fn image_diameter(g: &GeomSubstitution, xi: &LiftedSubstitution, n: usize) -> f64 {
    let mut max = 0.0_f64;
    for i in 0..g.kappa() {
        let v = xi_apply_n(g, xi, &WeightedPattern::delta(g, Tile { label: i, left: g.zero() }), n);
        if let Some((lo, hi)) = v.support_region(g) {
            max = max.max(hi.to_f64() - lo.to_f64());
        }
    }
    max
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tests::geom_of;
    use crate::geometry::{apply_n, fixed_point_seed, generate_tiling};
    use crate::num::{rat, rat_int};
    use crate::spectral::{pf_data, substitution_matrix};

    const EX11: &str = "alphabet a b c; a -> [a:1/2] b a; b -> c [a:1/2]; c -> b [a:1/2];";
    const EX52_HALF: &str = "alphabet a b c d;
        a -> [a:1/2] b c a; b -> b c; c -> d [a:1/2]; d -> [a:1/2] b c [a:1/2];";
    const EX53_HALF: &str = "alphabet a b c d e;
        a -> [c:1/2] a b c a d e [a:1/2];
        b -> [a:1/2] d e [c:1/2];
        c -> [c:1/2] a b [c:1/2];
        d -> [a:1/2] d;
        e -> e a b [c:1/2];";

    fn exact_eq(g: &GeomSubstitution, s: &Scalar, q: Rational) -> bool {
        s.sub(&g.scalar_from_rational(&q)).sign() == 0
    }

    #[test]
    fn lift_weights_of_three_letter_example() {
        let (_, g) = geom_of(EX11);
        let xi = lift(&g);
        // T_a: {[-1,1]a: 1/2, [1,2]b: 1, [2,4]a: 1}
        let pats = &xi.patterns[0];
        assert_eq!(pats.entries().len(), 3);
        assert!(exact_eq(&g, &pats.entries()[0].1, rat(1, 2)));
        assert!(exact_eq(&g, &pats.entries()[1].1, rat_int(1)));
        assert!(exact_eq(&g, &pats.entries()[2].1, rat_int(1)));
    }

    #[test]
    fn lift_weights_of_doubling() {
        let (_, g) = geom_of("alphabet a; a -> a a;");
        let xi = lift(&g);
        for (_, w) in xi.patterns[0].entries() {
            assert!(exact_eq(&g, w, rat_int(1)));
        }
    }

    #[test]
    fn lift_reproduces_matrix_column_float() {
        let (_, g) = geom_of(
            "alphabet a b c d; param r = sqrt(2)/2;
             a -> [a:r] b c a; b -> b c; c -> d [a:1-r]; d -> [a:r] b c [a:1-r];",
        );
        let xi = lift(&g);
        let r = 0.5_f64 * 2.0_f64.sqrt();
        let expected = [1.0 + r, 1.0, 1.0, 0.0];
        for (i, e) in expected.iter().enumerate() {
            let got = tau(&g, &xi.patterns[0], i).to_f64();
            assert!((got - e).abs() < 1e-9, "tau_{i} = {got}, expected {e}");
        }
    }

    #[test]
    fn matrix_cross_check_exact_fixtures() {
        for text in [EX11, EX52_HALF, EX53_HALF] {
            let sub = crate::rules::parse_rules(text).unwrap();
            let m = substitution_matrix(&sub);
            let pf = pf_data(&m).unwrap();
            let g = crate::geometry::realize(&sub, &pf).unwrap();
            let xi = lift(&g);
            let lifted = lifted_matrix(&g, &xi);
            let exact = m.exact.as_ref().unwrap();
            for i in 0..g.kappa() {
                for j in 0..g.kappa() {
                    assert!(
                        exact_eq(&g, &lifted[i][j], exact[i][j].clone()),
                        "entry ({i},{j}) mismatch in {text}"
                    );
                }
            }
        }
    }

    #[test]
    fn column_mass_conservation() {
        // Σ_i l_i M[i][j] = β l_j
        let (_, g) = geom_of(EX11);
        let xi = lift(&g);
        let lifted = lifted_matrix(&g, &xi);
        for j in 0..g.kappa() {
            let mut acc = g.zero();
            for i in 0..g.kappa() {
                acc = acc.add(&g.lengths[i].mul(&lifted[i][j]));
            }
            let expected = g.beta.mul(&g.lengths[j]);
            assert_eq!(acc.sub(&expected).sign(), 0, "column {j}");
        }
    }

    #[test]
    fn xi_delta_equals_lift() {
        let (_, g) = geom_of(EX11);
        let xi = lift(&g);
        let v = WeightedPattern::delta(&g, Tile { label: 0, left: g.zero() });
        let image = xi_apply(&g, &xi, &v);
        assert_eq!(image.entries().len(), xi.patterns[0].entries().len());
        for ((t1, w1), (t2, w2)) in image.entries().iter().zip(xi.patterns[0].entries()) {
            assert_eq!(t1.label, t2.label);
            assert_eq!(t1.left.sub(&t2.left).sign(), 0);
            assert_eq!(w1.sub(w2).sign(), 0);
        }
    }

    #[test]
    fn xi_merges_stickout_halves() {
        let (_, g) = geom_of(EX11);
        let xi = lift(&g);
        let ba = g.patch_from_word(&[1, 0], g.zero());
        let v = WeightedPattern::indicator(&g, &ba);
        let image = xi_apply(&g, &xi, &v);
        // the merged a-tile at [1,3] has weight 1/2 + 1/2 = 1
        let merged = image.weight_of(
            &g,
            &Tile { label: 0, left: g.scalar_from_rational(&rat_int(1)) },
        );
        assert!(exact_eq(&g, &merged, rat_int(1)));
        // every weight of the image of an indicator along the tiling is <= 1
        for (_, w) in image.entries() {
            assert!(w.sub(&g.scalar_from_rational(&rat_int(1))).sign() <= 0);
        }
    }

    #[test]
    fn xi_is_linear() {
        let (_, g) = geom_of(EX11);
        let xi = lift(&g);
        let v = WeightedPattern::delta(&g, Tile { label: 1, left: g.zero() });
        let two = g.scalar_from_rational(&rat_int(2));
        let lhs = xi_apply(&g, &xi, &v.scale(&two));
        let rhs = xi_apply(&g, &xi, &v).scale(&two);
        assert_eq!(lhs.entries().len(), rhs.entries().len());
        for ((t1, w1), (t2, w2)) in lhs.entries().iter().zip(rhs.entries()) {
            assert_eq!(t1.label, t2.label);
            assert_eq!(w1.sub(w2).sign(), 0);
        }
    }

    #[test]
    fn tau_matches_matrix_entries() {
        let (_, g) = geom_of(EX11);
        let xi = lift(&g);
        // τ_a over ξ(T_a) = 3/2
        assert!(exact_eq(&g, &tau(&g, &xi.patterns[0], 0), rat(3, 2)));
        // zero pattern
        assert!(tau(&g, &WeightedPattern::zero(), 0).is_zero_value());
        // τ_b(ξ²(δ_{T_a})) = (M²)[b][a], via an exact matrix-square oracle
        let sub = crate::rules::parse_rules(EX11).unwrap();
        let m = substitution_matrix(&sub);
        let exact = m.exact.as_ref().unwrap();
        let mut m2 = rat_int(0);
        for k in 0..3 {
            m2 += &exact[1][k] * &exact[k][0];
        }
        let v = WeightedPattern::delta(&g, Tile { label: 0, left: g.zero() });
        let two_steps = xi_apply_n(&g, &xi, &v, 2);
        assert!(exact_eq(&g, &tau(&g, &two_steps, 1), m2));
    }

    #[test]
    fn cutoff_examples() {
        let (_, g) = geom_of(EX11);
        let ba = g.patch_from_word(&[1, 0], g.zero());
        let v = WeightedPattern::indicator(&g, &ba); // tiles [0,1]b, [1,3]a
        let full = cutoff(&g, &v, &g.zero(), &g.scalar_from_rational(&rat_int(8)));
        assert_eq!(full.entries().len(), 2);
        let partial = cutoff(
            &g,
            &v,
            &g.zero(),
            &g.scalar_from_rational(&rat_int(1)),
        );
        assert_eq!(partial.entries().len(), 1); // only [0,1]b survives
        let empty = cutoff(
            &g,
            &v,
            &g.scalar_from_rational(&rat_int(5)),
            &g.scalar_from_rational(&rat_int(5)),
        );
        assert!(empty.is_zero());
    }

    #[test]
    fn fixed_point_identity_on_interior() {
        let (_, g) = geom_of(EX11);
        let xi = lift(&g);
        let seed = fixed_point_seed(&g, 6).unwrap();
        let k = seed.0;
        let tiling = generate_tiling(&g, &seed, &rat_int(40)).unwrap();
        let v = WeightedPattern::indicator(&g, &tiling);
        let image = xi_apply_n(&g, &xi, &v, k);
        let margin = image_diameter(&g, &xi, k).ceil() as i64;
        let lo = g.scalar_from_rational(&rat_int(-40 + margin));
        let hi = g.scalar_from_rational(&rat_int(40 - margin));
        let inner_image = cutoff(&g, &image, &lo, &hi);
        let inner_v = cutoff(&g, &v, &lo, &hi);
        assert!(!inner_v.is_zero());
        assert_eq!(inner_image.entries().len(), inner_v.entries().len());
        for ((t1, w1), (t2, w2)) in inner_image.entries().iter().zip(inner_v.entries()) {
            assert_eq!(t1.label, t2.label);
            assert_eq!(t1.left.sub(&t2.left).sign(), 0);
            assert_eq!(w1.sub(w2).sign(), 0, "weight at {}", t1.left.to_f64());
        }
    }

    #[test]
    fn frequency_over_known_word() {
        // σ³(ba) = cabacabababacaba occupies [8, 32] in the fixed tiling;
        // its letter counts are a: 8, b: 5, c: 3 over length 24.
        let (_, g) = geom_of(EX11);
        let sub = crate::rules::parse_rules(EX11).unwrap();
        let m = substitution_matrix(&sub);
        let pf = pf_data(&m).unwrap();
        let seed = fixed_point_seed(&g, 6).unwrap();
        let tiling = generate_tiling(&g, &seed, &rat_int(40)).unwrap();
        let report = empirical_frequency(
            &g,
            &pf,
            &tiling,
            &[VanHoveWindow::new(rat_int(8), rat_int(32), rat_int(4))],
        )
        .unwrap();
        let stats = &report.windows[0];
        let counts: Vec<usize> = stats.letters.iter().map(|l| l.count).collect();
        assert_eq!(counts, vec![8, 5, 3]);
        assert!((stats.letters[0].density - 8.0 / 24.0).abs() < 1e-12);
        assert!((stats.letters[0].target - 1.0 / 3.0).abs() < 1e-12);
        assert!((stats.boundary_ratio - 16.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn frequency_of_single_tile_window() {
        let (_, g) = geom_of(EX11);
        let sub = crate::rules::parse_rules(EX11).unwrap();
        let m = substitution_matrix(&sub);
        let pf = pf_data(&m).unwrap();
        let p = g.proto(0); // T_a on [0, 2]
        let report = empirical_frequency(
            &g,
            &pf,
            &p,
            &[VanHoveWindow::new(rat_int(0), rat_int(2), rat(1, 2))],
        )
        .unwrap();
        let letters = &report.windows[0].letters;
        assert!((letters[0].density - 0.5).abs() < 1e-12); // 1/l_a
        assert_eq!(letters[1].count, 0);
        assert_eq!(letters[2].count, 0);
    }

    #[test]
    fn window_not_covered_is_an_error() {
        let (_, g) = geom_of(EX11);
        let sub = crate::rules::parse_rules(EX11).unwrap();
        let m = substitution_matrix(&sub);
        let pf = pf_data(&m).unwrap();
        let p = g.proto(0);
        let err = empirical_frequency(
            &g,
            &pf,
            &p,
            &[VanHoveWindow::new(rat_int(-5), rat_int(5), rat_int(1))],
        );
        assert!(matches!(err, Err(WeightedError::WindowNotCovered { .. })));
    }

    #[test]
    fn deviation_decreases_along_window_tower() {
        let (_, g) = geom_of(EX11);
        let sub = crate::rules::parse_rules(EX11).unwrap();
        let m = substitution_matrix(&sub);
        let pf = pf_data(&m).unwrap();
        let seed = fixed_point_seed(&g, 6).unwrap();
        let tiling = generate_tiling(&g, &seed, &rat_int(200)).unwrap();
        let windows: Vec<VanHoveWindow> = [12i64, 48, 192]
            .iter()
            .map(|&w| VanHoveWindow::new(rat_int(-w), rat_int(w), rat_int(4)))
            .collect();
        let report = empirical_frequency(&g, &pf, &tiling, &windows).unwrap();
        let devs: Vec<f64> = report.windows.iter().map(|w| w.max_deviation).collect();
        assert!(
            devs[0] > devs[1] && devs[1] > devs[2],
            "deviations not strictly decreasing: {devs:?}"
        );
    }

    #[test]
    fn csv_report_has_expected_columns() {
        let (_, g) = geom_of(EX11);
        let sub = crate::rules::parse_rules(EX11).unwrap();
        let m = substitution_matrix(&sub);
        let pf = pf_data(&m).unwrap();
        let p = g.proto(0);
        let report = empirical_frequency(
            &g,
            &pf,
            &p,
            &[VanHoveWindow::new(rat_int(0), rat_int(2), rat(1, 2))],
        )
        .unwrap();
        let csv = report.to_csv();
        assert!(csv.starts_with("window,letter,count,density,r_i,deviation\n"));
        assert_eq!(csv.lines().count(), 1 + 3);
    }

    #[test]
    fn float_mode_quantizes_positions_before_merging() {
        let (_, g) = geom_of(
            "alphabet a b c; a -> [a:0.5] b a; b -> c [a:0.5]; c -> b [a:0.5];",
        );
        let xi = lift(&g);
        let ba = g.patch_from_word(&[1, 0], g.zero());
        let v = WeightedPattern::indicator(&g, &ba);
        let image = xi_apply(&g, &xi, &v);
        // the two half-weights land on the same grid point and add to 1
        // (up to the float-mode comparison tolerance)
        let merged = image.weight_of(&g, &Tile { label: 0, left: Scalar::Float(1.0) });
        assert!((merged.to_f64() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn xi_iterates_match_patch_iterates_on_support() {
        let (_, g) = geom_of(EX11);
        let xi = lift(&g);
        let p = g.proto(2);
        let v = WeightedPattern::delta(&g, p.tiles()[0].clone());
        for n in 1..=3 {
            let patch_image = apply_n(&g, &p, n).unwrap();
            let weighted_image = xi_apply_n(&g, &xi, &v, n);
            assert_eq!(weighted_image.entries().len(), patch_image.len());
        }
    }
}
