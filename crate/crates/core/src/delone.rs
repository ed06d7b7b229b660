//! Overlapping substitutions from one-dimensional Delone sets with
//! inflation symmetry.
//!
//! The point sets are spectra `X = {Σ ε_j λ^j : ε_j ∈ {0,…,m}}` in
//! `Ω = [0, ∞)`, which satisfy `X = ⋃_{i=0}^m λX + i`. Voronoi cells of X
//! are labeled by their collar (the relative point configuration within
//! radius L) together with the clipped Ω-trace near the origin; when the
//! window and L are large enough, inflating a cell and reading off the
//! cells its image meets is independent of the class representative, which
//! yields a rule table importable as a geometric overlapping substitution.
//! For non-Pisot λ the collar classes keep growing with the window and the
//! derivation reports a no-FLC diagnostic instead of a rule table.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{apply, GeomError, GeomSubstitution, Patch, Tile};
use crate::num::{FieldContext, Mode, NumError, Rational, Scalar};

#[derive(Debug, Error)]
pub enum DeloneError {
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("rule is not well-defined for class {class}: {witnesses} representatives disagree")]
    NotWellDefined { class: usize, witnesses: usize },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// A spectrum point set restricted to `[0, W]`, sorted and deduplicated.
#[derive(Debug, Clone)]
pub struct SpectrumSet {
    pub lambda: Scalar,
    pub m: u32,
    pub window: Rational,
    pub points: Vec<Scalar>,
    floats: Vec<f64>,
    pub mode: Mode,
    pub eps: f64,
    pub context: Option<FieldContext>,
}

/// Separation below which two float positions are considered candidates
/// for exact-equality confirmation during deduplication.
const DEDUP_GUARD: f64 = 1e-6;

/// Inclusion snap for radius and cell-boundary tests. Collar radii often
/// coincide exactly with realized inter-point distances (for the golden
/// spectrum, R₃ = φ⁴ + 1); snapping by an amount far above float noise but
/// far below the minimal distance separation makes boundary membership
/// deterministic across windows.
const RADIUS_SNAP: f64 = 1e-6;

impl SpectrumSet {
    /// Exact spectrum for λ = the distinguished root of the context.
    pub fn new_exact(ctx: FieldContext, m: u32, window: Rational) -> Result<Self, DeloneError> {
        let lambda = Scalar::Exact(ctx.beta());
        Self::enumerate(lambda, Some(ctx), m, window, crate::num::scalar::DEFAULT_EPSILON)
    }

    /// Float spectrum for an arbitrary real λ > 1.
    pub fn new_float(lambda: f64, m: u32, window: Rational, eps: f64) -> Result<Self, DeloneError> {
        Self::enumerate(Scalar::Float(lambda), None, m, window, eps)
    }

    fn enumerate(
        lambda: Scalar,
        context: Option<FieldContext>,
        m: u32,
        window: Rational,
        eps: f64,
    ) -> Result<Self, DeloneError> {
        let lam = lambda.to_f64();
        if lam <= 1.0 {
            return Err(DeloneError::InvalidParameters(format!("λ = {lam} must exceed 1")));
        }
        if (m as f64) < lam - 1.0 {
            return Err(DeloneError::InvalidParameters(format!(
                "m = {m} must be at least λ - 1 = {}",
                lam - 1.0
            )));
        }
        let mode = if context.is_some() { Mode::Exact } else { Mode::Float };
        let ctx2 = context.clone();
        let from_int = move |n: i64| -> Scalar {
            match (&ctx2, mode) {
                (Some(ctx), Mode::Exact) => Scalar::Exact(ctx.from_int(n)),
                _ => Scalar::Float(n as f64),
            }
        };
        let w_scalar = match (&context, mode) {
            (Some(ctx), Mode::Exact) => Scalar::Exact(ctx.from_rational(window.clone())),
            _ => Scalar::Float(Scalar::from_rational_f64(&window)),
        };
        let mut set = SpectrumSet {
            lambda,
            m,
            window,
            points: Vec::new(),
            floats: Vec::new(),
            mode,
            eps,
            context,
        };
        // breadth-first closure of {0..m} under x -> λx + i, pruned at W
        let mut queue: Vec<Scalar> = Vec::new();
        for i in 0..=m as i64 {
            let v = from_int(i);
            if v.sub(&w_scalar).sign() <= 0 && set.insert(v.clone()) {
                queue.push(v);
            }
        }
        while let Some(x) = queue.pop() {
            for i in 0..=m as i64 {
                let v = set.lambda.mul(&x).add(&from_int(i));
                if v.sub(&w_scalar).sign() <= 0 && set.insert(v.clone()) {
                    queue.push(v);
                }
            }
        }
        Ok(set)
    }

    /// Insert keeping sort order; returns false when the value is already
    /// present. Floating positions are compared with the session epsilon;
    /// exact positions are confirmed exactly after a float pre-filter.
    fn insert(&mut self, v: Scalar) -> bool {
        let f = v.to_f64();
        let idx = self.floats.partition_point(|&x| x < f - DEDUP_GUARD);
        let mut i = idx;
        while i < self.floats.len() && self.floats[i] <= f + DEDUP_GUARD {
            let equal = match self.mode {
                Mode::Exact => self.points[i].sub(&v).sign() == 0,
                Mode::Float => (self.floats[i] - f).abs() <= self.eps,
            };
            if equal {
                return false;
            }
            i += 1;
        }
        let pos = self.floats.partition_point(|&x| x < f);
        self.floats.insert(pos, f);
        self.points.insert(pos, v);
        true
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn float_points(&self) -> &[f64] {
        &self.floats
    }

    fn contains(&self, v: &Scalar) -> bool {
        let f = v.to_f64();
        let idx = self.floats.partition_point(|&x| x < f - DEDUP_GUARD);
        let mut i = idx;
        while i < self.floats.len() && self.floats[i] <= f + DEDUP_GUARD {
            let equal = match self.mode {
                Mode::Exact => self.points[i].sub(v).sign() == 0,
                Mode::Float => (self.floats[i] - f).abs() <= self.eps,
            };
            if equal {
                return true;
            }
            i += 1;
        }
        false
    }

    /// Verify `X ∩ [0, (W - m)/λ] = (⋃_i λX + i) ∩ [0, (W - m)/λ]` on the
    /// part of the window where the enumeration is complete.
    pub fn verify_set_equation(&self) -> bool {
        let lam = self.lambda.to_f64();
        let safe = (Scalar::from_rational_f64(&self.window) - self.m as f64) / lam;
        // every point in the safe region is λy + i for some y ∈ X, i <= m
        for (k, x) in self.points.iter().enumerate() {
            if self.floats[k] > safe {
                continue;
            }
            let mut witnessed = false;
            for i in 0..=self.m as i64 {
                let shifted = match (&self.context, self.mode) {
                    (Some(ctx), Mode::Exact) => x.sub(&Scalar::Exact(ctx.from_int(i))),
                    _ => x.sub(&Scalar::Float(i as f64)),
                };
                if shifted.sign() < 0 {
                    continue;
                }
                let y = shifted.div(&self.lambda).expect("λ > 1");
                if self.contains(&y) {
                    witnessed = true;
                    break;
                }
            }
            if !witnessed {
                return false;
            }
        }
        // and every λy + i in the safe region is a point
        for y in &self.points {
            for i in 0..=self.m as i64 {
                let v = match (&self.context, self.mode) {
                    (Some(ctx), Mode::Exact) => {
                        self.lambda.mul(y).add(&Scalar::Exact(ctx.from_int(i)))
                    }
                    _ => self.lambda.mul(y).add(&Scalar::Float(i as f64)),
                };
                if v.to_f64() <= safe && !self.contains(&v) {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,position\n");
        for (i, f) in self.floats.iter().enumerate() {
            let _ = writeln!(out, "{i},{f:.15}");
        }
        out
    }
}

/// Voronoi cells of the restricted point set: consecutive midpoints, the
/// first cell clipped at 0 and the last at the last point.
pub fn voronoi_cells(x: &SpectrumSet) -> Vec<(Scalar, Scalar)> {
    let n = x.points.len();
    assert!(n >= 2, "voronoi cells need at least two points");
    let half = Rational::new(1.into(), 2.into());
    let mid = |a: &Scalar, b: &Scalar| a.add(b).scale_rational(&half);
    let mut cells = Vec::with_capacity(n);
    for i in 0..n {
        let lo = if i == 0 {
            match (&x.context, x.mode) {
                (Some(ctx), Mode::Exact) => Scalar::Exact(ctx.zero()),
                _ => Scalar::Float(0.0),
            }
        } else {
            mid(&x.points[i - 1], &x.points[i])
        };
        let hi = if i + 1 == n {
            x.points[i].clone()
        } else {
            mid(&x.points[i], &x.points[i + 1])
        };
        cells.push((lo, hi));
    }
    cells
}

/// The constants controlling collar labels and local derivability, either
/// computed from the inflation inequalities or measured from the window.
#[derive(Debug, Clone)]
pub struct RadiiBundle {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r_d: f64,
    pub r_l: f64,
    pub l: f64,
}

/// Compute the radii chain:
/// `R₁ = λ(R₀+1)`, `λR₂ ≥ max(R₁+2R₀+2, R₀+R₁+R₂+1)`,
/// `R₃ = max(2R₀+2, R₀+R₂+1)`, `R_L = max(3R₀+3, L+R₀+1)`,
/// with `R₀` the measured covering radius, `R_D` the measured local
/// derivability radius, and `L` at least the theorem bound
/// `λ(L-R₀-1) ≥ R₁+R_L+R_D`.
pub fn radii(x: &SpectrumSet, l_request: f64) -> Result<RadiiBundle, DeloneError> {
    if x.points.len() < 2 {
        return Err(DeloneError::WindowTooSmall(
            "need at least two points to measure R₀".into(),
        ));
    }
    let lam = x.lambda.to_f64();
    let mut max_gap = x.floats[0]; // distance from the Ω boundary at 0
    for w in x.floats.windows(2) {
        max_gap = max_gap.max(w[1] - w[0]);
    }
    let r0 = max_gap / 2.0;
    let r1 = lam * (r0 + 1.0);
    let r2 = ((r1 + 2.0 * r0 + 2.0) / lam).max((r0 + r1 + 1.0) / (lam - 1.0));
    let r3 = (2.0 * r0 + 2.0).max(r0 + r2 + 1.0);
    let r_d = measure_derivability_radius(x)?;
    // smallest L with λ(L - R₀ - 1) ≥ R₁ + max(3R₀+3, L+R₀+1) + R_D
    let l_branch1 = (r1 + 3.0 * r0 + 3.0 + r_d) / lam + r0 + 1.0;
    let l_branch2 = (r1 + r0 + 1.0 + r_d + lam * (r0 + 1.0)) / (lam - 1.0);
    let feasible = |l: f64| {
        lam * (l - r0 - 1.0) + 1e-9 >= r1 + (3.0 * r0 + 3.0).max(l + r0 + 1.0) + r_d
    };
    let mut forced = f64::INFINITY;
    if feasible(l_branch1) {
        forced = forced.min(l_branch1);
    }
    if feasible(l_branch2) {
        forced = forced.min(l_branch2);
    }
    if !forced.is_finite() {
        return Err(DeloneError::WindowTooSmall("no feasible collar radius L".into()));
    }
    let l = l_request.max(forced);
    let r_l = (3.0 * r0 + 3.0).max(l + r0 + 1.0);
    Ok(RadiiBundle { r0, r1, r2, r3, r_d, r_l, l })
}

/// Collar of `λX` around a position `z`, as sorted relative float offsets.
fn inflated_collar(x: &SpectrumSet, z: f64, radius: f64) -> Vec<f64> {
    let lam = x.lambda.to_f64();
    let mut out = Vec::new();
    for &p in &x.floats {
        let q = lam * p;
        if q >= z - radius - RADIUS_SNAP && q <= z + radius + RADIUS_SNAP {
            out.push(q - z);
        }
        if q > z + radius + RADIUS_SNAP {
            break;
        }
    }
    out
}

fn collars_equal(a: &[f64], b: &[f64], eps: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= eps)
}

/// Measure the smallest radius at which the map from the inflated-set
/// collar of a position to its membership in X is single-valued over the
/// window. Candidates are tested on all points and all inter-point
/// midpoints whose collars are fully visible.
fn measure_derivability_radius(x: &SpectrumSet) -> Result<f64, DeloneError> {
    let w = Scalar::from_rational_f64(&x.window);
    let lam = x.lambda.to_f64();
    let mut min_gap = f64::INFINITY;
    for pair in x.floats.windows(2) {
        min_gap = min_gap.min(pair[1] - pair[0]);
    }
    let mut candidate = (min_gap / 2.0).max(x.eps * 16.0);
    let cap = w / 4.0;
    while candidate <= cap {
        // test positions: members, midpoints and quarter-points (non-members)
        let mut samples: Vec<(f64, bool)> = Vec::new();
        for (i, &p) in x.floats.iter().enumerate() {
            if p - candidate >= 0.0 && p + candidate <= lam * w {
                samples.push((p, true));
                if i + 1 < x.floats.len() {
                    let gap = x.floats[i + 1] - p;
                    samples.push((p + gap / 2.0, false));
                    samples.push((p + gap / 4.0, false));
                    samples.push((p + 3.0 * gap / 4.0, false));
                }
            }
        }
        let collars: Vec<Vec<f64>> = samples
            .iter()
            .map(|&(z, _)| inflated_collar(x, z, candidate))
            .collect();
        let mut single_valued = true;
        'outer: for i in 0..samples.len() {
            for j in i + 1..samples.len() {
                if samples[i].1 != samples[j].1
                    && collars_equal(&collars[i], &collars[j], x.eps)
                {
                    single_valued = false;
                    break 'outer;
                }
            }
        }
        if single_valued {
            return Ok(candidate);
        }
        candidate *= 2.0;
    }
    Err(DeloneError::WindowTooSmall(
        "local derivability radius not certifiable within the window".into(),
    ))
}

// ---------------------------------------------------------------------------
// Collar classification and rule derivation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    NoFlc,
}

/// Result of the derivation: collar class statistics, the no-FLC
/// diagnostic, and (for `Pass`) the rule table as a geometric substitution
/// plus the fixed-point identity check on the shrunken window.
#[derive(Debug)]
pub struct DerivedRule {
    pub verdict: Verdict,
    pub class_count_half: usize,
    pub class_count_full: usize,
    pub class_sizes: Vec<usize>,
    pub boundary_points: usize,
    pub geom: Option<GeomSubstitution>,
    pub fixed_point: bool,
}

/// The collar label of a point: relative offsets of window points within
/// radius `l`, the relative cell, and the clipped Ω-trace.
struct PointLabel {
    collar: Vec<f64>,
    cell: (f64, f64),
    omega_near: Option<f64>,
}

fn label_of(x: &SpectrumSet, cells: &[(Scalar, Scalar)], i: usize, l: f64, r2: f64) -> PointLabel {
    let p = x.floats[i];
    let collar = x
        .floats
        .iter()
        .filter(|&&q| q >= p - l - RADIUS_SNAP && q <= p + l + RADIUS_SNAP)
        .map(|&q| q - p)
        .collect();
    let cell = (cells[i].0.to_f64() - p, cells[i].1.to_f64() - p);
    let omega_near = (p < r2).then_some(p);
    PointLabel { collar, cell, omega_near }
}

fn labels_equal(a: &PointLabel, b: &PointLabel, eps: f64) -> bool {
    collars_equal(&a.collar, &b.collar, eps)
        && (a.cell.0 - b.cell.0).abs() <= eps
        && (a.cell.1 - b.cell.1).abs() <= eps
        && match (a.omega_near, b.omega_near) {
            (None, None) => true,
            (Some(x), Some(y)) => (x - y).abs() <= eps,
            _ => false,
        }
}

/// Group eligible point indices by label equality; returns class ids per
/// eligible index.
fn classify(
    x: &SpectrumSet,
    cells: &[(Scalar, Scalar)],
    eligible: &[usize],
    l: f64,
    r2: f64,
) -> (Vec<usize>, usize) {
    let labels: Vec<PointLabel> = eligible
        .iter()
        .map(|&i| label_of(x, cells, i, l, r2))
        .collect();
    let mut class_of = vec![usize::MAX; eligible.len()];
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..eligible.len() {
        let mut found = None;
        for (c, &r) in reps.iter().enumerate() {
            if labels_equal(&labels[i], &labels[r], x.eps) {
                found = Some(c);
                break;
            }
        }
        match found {
            Some(c) => class_of[i] = c,
            None => {
                reps.push(i);
                class_of[i] = reps.len() - 1;
            }
        }
    }
    let count = reps.len();
    (class_of, count)
}

/// Derive the substitution rule table from the collar classes.
pub fn derive_substitution(
    x: &SpectrumSet,
    bundle: &RadiiBundle,
) -> Result<DerivedRule, DeloneError> {
    if x.points.len() < 4 {
        return Err(DeloneError::WindowTooSmall("too few points to classify".into()));
    }
    let w = Scalar::from_rational_f64(&x.window);
    let lam = x.lambda.to_f64();
    let cells = voronoi_cells(x);

    // no-FLC diagnostic: distinct collar counts at radius R₃ over the half
    // and full windows
    let l_diag = bundle.r3;
    let eligible_at = |hi: f64| -> Vec<usize> {
        (0..x.points.len())
            .filter(|&i| x.floats[i] - l_diag >= 0.0 && x.floats[i] + l_diag <= hi)
            .collect()
    };
    let half_idx = eligible_at(w / 2.0);
    let full_idx = eligible_at(w);
    if half_idx.is_empty() || full_idx.is_empty() {
        return Err(DeloneError::WindowTooSmall(
            "diagnostic collar radius exceeds the window".into(),
        ));
    }
    let (_, count_half) = classify(x, &cells, &half_idx, l_diag, bundle.r2);
    let (_, count_full) = classify(x, &cells, &full_idx, l_diag, bundle.r2);
    let boundary_points = x.floats.iter().filter(|&&p| p < bundle.r2).count();
    if count_full > count_half {
        return Ok(DerivedRule {
            verdict: Verdict::NoFlc,
            class_count_half: count_half,
            class_count_full: count_full,
            class_sizes: Vec::new(),
            boundary_points,
            geom: None,
            fixed_point: false,
        });
    }

    // full classification at the theorem radius L, restricted to points
    // whose own collar and whole inflated image stay inside the window
    let l = bundle.l;
    let eligible: Vec<usize> = (0..x.points.len())
        .filter(|&i| x.floats[i] - l >= 0.0 && x.floats[i] + l <= w)
        .collect();
    if eligible.is_empty() {
        return Err(DeloneError::WindowTooSmall(
            "no point has a fully visible collar at radius L".into(),
        ));
    }
    let (class_of, class_count) = classify(x, &cells, &eligible, l, bundle.r2);
    let eligible_pos: std::collections::HashMap<usize, usize> = eligible
        .iter()
        .enumerate()
        .map(|(slot, &i)| (i, slot))
        .collect();
    // a representative is usable when its inflated cell is fully covered by
    // window cells and every tile it meets is itself eligible
    let first_cell_lo = cells.first().unwrap().0.to_f64();
    let last_cell_hi = cells.last().unwrap().1.to_f64();
    let image_tile_indices = |i: usize| -> Option<Vec<usize>> {
        let lo = lam * cells[i].0.to_f64() - RADIUS_SNAP;
        let hi = lam * cells[i].1.to_f64() + RADIUS_SNAP;
        if lo < first_cell_lo - x.eps || hi > last_cell_hi + x.eps {
            return None;
        }
        let mut out = Vec::new();
        for (j, cell) in cells.iter().enumerate() {
            let (clo, chi) = (cell.0.to_f64(), cell.1.to_f64());
            if chi >= lo && clo <= hi {
                if !eligible_pos.contains_key(&j) {
                    return None;
                }
                out.push(j);
            }
        }
        (!out.is_empty()).then_some(out)
    };

    // well-definedness: all usable representatives of a class yield the
    // same relative patch (class ids and exact relative cell positions)
    let mut class_sizes = vec![0usize; class_count];
    for &c in &class_of {
        class_sizes[c] += 1;
    }
    let rel_patch = |i: usize, tiles: &[usize]| -> Vec<(usize, Scalar)> {
        let anchor = x.lambda.mul(&cells[i].0);
        tiles
            .iter()
            .map(|&j| (class_of[eligible_pos[&j]], cells[j].0.sub(&anchor)))
            .collect()
    };
    let mut class_patch: Vec<Option<(usize, Vec<(usize, Scalar)>)>> = vec![None; class_count];
    let mut checked = vec![0usize; class_count];
    for (slot, &i) in eligible.iter().enumerate() {
        let c = class_of[slot];
        if checked[c] >= 8 {
            continue;
        }
        let Some(tiles) = image_tile_indices(i) else { continue };
        let patch = rel_patch(i, &tiles);
        checked[c] += 1;
        match &class_patch[c] {
            None => class_patch[c] = Some((i, patch)),
            Some((_, reference)) => {
                let same = reference.len() == patch.len()
                    && reference.iter().zip(&patch).all(|((ca, pa), (cb, pb))| {
                        ca == cb && pa.approx_eq(pb, x.eps)
                    });
                if !same {
                    return Err(DeloneError::NotWellDefined {
                        class: c,
                        witnesses: checked[c],
                    });
                }
            }
        }
    }
    if class_patch.iter().any(Option::is_none) {
        return Err(DeloneError::WindowTooSmall(
            "a collar class has no representative with a fully visible image".into(),
        ));
    }

    // assemble the geometric substitution: one proto-tile per class
    let half = Rational::new(1.into(), 2.into());
    let _ = half;
    let lengths: Vec<Scalar> = (0..class_count)
        .map(|c| {
            let rep = class_patch[c].as_ref().unwrap().0;
            cells[rep].1.sub(&cells[rep].0)
        })
        .collect();
    let rules: Vec<Vec<Tile>> = (0..class_count)
        .map(|c| {
            class_patch[c]
                .as_ref()
                .unwrap()
                .1
                .iter()
                .map(|(cls, left)| Tile { label: *cls, left: left.clone() })
                .collect()
        })
        .collect();
    let geom = build_geom(x, lengths, rules)?;

    // fixed-point identity on the shrunken window: applying the rule to
    // the eligible tiles reproduces the Voronoi tiling on the core
    let e_lo = x.floats[eligible[0]];
    let e_hi = x.floats[*eligible.last().unwrap()];
    let margin = bundle.r0 + 1.0;
    let core_lo = lam * (e_lo + margin);
    let core_hi = e_hi - margin;
    let mut fixed_point = core_hi > core_lo;
    if fixed_point {
        let input = Patch::from_tiles_unchecked(
            eligible
                .iter()
                .enumerate()
                .map(|(slot, &i)| Tile { label: class_of[slot], left: cells[i].0.clone() })
                .collect(),
        );
        let image = apply(&geom, &input)?;
        let lo_s = Scalar::Float(core_lo);
        let hi_s = Scalar::Float(core_hi);
        let to_float = |p: &Patch| -> Vec<(usize, f64)> {
            p.tiles().iter().map(|t| (t.label, t.left.to_f64())).collect()
        };
        let image_core: Vec<(usize, f64)> = to_float(&image)
            .into_iter()
            .filter(|(_, left)| *left >= lo_s.to_f64() - x.eps && *left <= hi_s.to_f64() + x.eps)
            .collect();
        let target_core: Vec<(usize, f64)> = to_float(&input)
            .into_iter()
            .filter(|(_, left)| *left >= lo_s.to_f64() - x.eps && *left <= hi_s.to_f64() + x.eps)
            .collect();
        fixed_point = image_core.len() == target_core.len()
            && image_core
                .iter()
                .zip(&target_core)
                .all(|((c1, l1), (c2, l2))| c1 == c2 && (l1 - l2).abs() <= 1e-6);
    }

    Ok(DerivedRule {
        verdict: Verdict::Pass,
        class_count_half: count_half,
        class_count_full: count_full,
        class_sizes,
        boundary_points,
        geom: Some(geom),
        fixed_point,
    })
}

fn build_geom(
    x: &SpectrumSet,
    lengths: Vec<Scalar>,
    rules: Vec<Vec<Tile>>,
) -> Result<GeomSubstitution, DeloneError> {
    let labels: Vec<String> = (0..lengths.len()).map(|c| format!("t{c}")).collect();
    let rule_patches: Vec<Patch> = rules
        .into_iter()
        .map(Patch::from_tiles_unchecked)
        .collect();
    Ok(GeomSubstitution {
        labels,
        lengths,
        beta: x.lambda.clone(),
        rules: rule_patches,
        mode: x.mode,
        eps: x.eps,
        context: x.context.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{rat_int, FieldContext, QPoly};

    fn golden_ctx() -> FieldContext {
        FieldContext::for_dominant_root(&QPoly::from_ints(&[-1, -1, 1])).unwrap()
    }

    /// Brute-force digit-string enumeration, independent of the BFS.
    fn enumerate_oracle(lambda: f64, m: u32, w: f64, max_len: usize) -> Vec<f64> {
        let mut values = vec![0.0f64];
        let mut out: Vec<f64> = Vec::new();
        for _ in 0..=max_len {
            let mut next = Vec::new();
            for &v in &values {
                for d in 0..=m {
                    let nv = v * lambda + d as f64;
                    if nv <= w + 1e-9 {
                        next.push(nv);
                    }
                }
            }
            out.extend_from_slice(&next);
            values = next;
            if values.is_empty() {
                break;
            }
        }
        out.push(0.0);
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        out
    }

    #[test]
    fn binary_spectrum_is_the_integers() {
        let ctx = FieldContext::rational_point(rat_int(2));
        let x = SpectrumSet::new_exact(ctx, 1, rat_int(16)).unwrap();
        let expected: Vec<f64> = (0..=16).map(|n| n as f64).collect();
        assert_eq!(x.len(), 17);
        for (p, e) in x.float_points().iter().zip(expected) {
            assert!((p - e).abs() < 1e-12);
        }
        assert!(x.verify_set_equation());
    }

    #[test]
    fn golden_spectrum_matches_enumeration_oracle() {
        let x = SpectrumSet::new_exact(golden_ctx(), 1, rat_int(20)).unwrap();
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        let oracle = enumerate_oracle(phi, 1, 20.0, 8);
        assert_eq!(x.len(), oracle.len(), "point counts differ");
        for (p, e) in x.float_points().iter().zip(oracle) {
            assert!((p - e).abs() < 1e-9, "{p} vs {e}");
        }
        assert!(x.verify_set_equation());
    }

    #[test]
    fn golden_spectrum_has_two_gap_lengths() {
        let x = SpectrumSet::new_exact(golden_ctx(), 1, rat_int(20)).unwrap();
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        let mut gaps: Vec<f64> = x.float_points().windows(2).map(|w| w[1] - w[0]).collect();
        gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        gaps.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        assert_eq!(gaps.len(), 2, "gaps: {gaps:?}");
        assert!((gaps[0] - (phi - 1.0)).abs() < 1e-9);
        assert!((gaps[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn window_zero_keeps_only_origin() {
        let ctx = FieldContext::rational_point(rat_int(2));
        let x = SpectrumSet::new_exact(ctx, 1, rat_int(0)).unwrap();
        assert_eq!(x.len(), 1);
        assert_eq!(x.float_points()[0], 0.0);
    }

    #[test]
    fn invalid_parameters_rejected() {
        let ctx = FieldContext::rational_point(rat_int(3));
        assert!(matches!(
            SpectrumSet::new_exact(ctx, 1, rat_int(10)),
            Err(DeloneError::InvalidParameters(_))
        ));
        let ctx1 = FieldContext::rational_point(rat_int(1));
        assert!(matches!(
            SpectrumSet::new_exact(ctx1, 1, rat_int(10)),
            Err(DeloneError::InvalidParameters(_))
        ));
    }

    #[test]
    fn voronoi_of_integer_lattice() {
        let ctx = FieldContext::rational_point(rat_int(2));
        let x = SpectrumSet::new_exact(ctx, 1, rat_int(3)).unwrap();
        let cells = voronoi_cells(&x);
        let expected = [(0.0, 0.5), (0.5, 1.5), (1.5, 2.5), (2.5, 3.0)];
        for ((lo, hi), (elo, ehi)) in cells.iter().zip(expected) {
            assert!((lo.to_f64() - elo).abs() < 1e-12);
            assert!((hi.to_f64() - ehi).abs() < 1e-12);
        }
    }

    #[test]
    fn voronoi_of_two_points() {
        let mut x = SpectrumSet::new_float(2.0, 1, rat_int(5), 1e-9).unwrap();
        // keep only {0, 5}
        x.points = vec![Scalar::Float(0.0), Scalar::Float(5.0)];
        x.floats = vec![0.0, 5.0];
        let cells = voronoi_cells(&x);
        assert_eq!(cells.len(), 2);
        assert!((cells[0].0.to_f64() - 0.0).abs() < 1e-12);
        assert!((cells[0].1.to_f64() - 2.5).abs() < 1e-12);
        assert!((cells[1].1.to_f64() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn voronoi_cells_tile_the_window() {
        let x = SpectrumSet::new_exact(golden_ctx(), 1, rat_int(20)).unwrap();
        let cells = voronoi_cells(&x);
        for w in cells.windows(2) {
            assert_eq!(w[0].1.sub(&w[1].0).sign(), 0, "cells must abut");
        }
        // every cell sits inside B(x, R₀ + 1)
        let bundle = radii(&x, 0.0).unwrap();
        for (i, (lo, hi)) in cells.iter().enumerate() {
            let p = x.float_points()[i];
            assert!(lo.to_f64() >= p - bundle.r0 - 1.0 - 1e-9);
            assert!(hi.to_f64() <= p + bundle.r0 + 1.0 + 1e-9);
        }
    }

    #[test]
    fn radii_chain_for_binary_lattice() {
        let ctx = FieldContext::rational_point(rat_int(2));
        let x = SpectrumSet::new_exact(ctx, 1, rat_int(60)).unwrap();
        let bundle = radii(&x, 0.0).unwrap();
        assert!((bundle.r0 - 0.5).abs() < 1e-12);
        assert!((bundle.r1 - 3.0).abs() < 1e-12);
        // λR₂ covers both demands
        assert!(2.0 * bundle.r2 >= bundle.r1 + 2.0 * bundle.r0 + 2.0 - 1e-12);
        assert!(2.0 * bundle.r2 >= bundle.r0 + bundle.r1 + bundle.r2 + 1.0 - 1e-12);
        assert!((bundle.r3 - (bundle.r0 + bundle.r2 + 1.0)).abs() < 1e-12);
        assert!((bundle.r_d - 1.0).abs() < 1e-12);
        // theorem bound satisfied
        assert!(2.0 * (bundle.l - bundle.r0 - 1.0) >= bundle.r1 + bundle.r_l + bundle.r_d - 1e-9);
        assert!((bundle.r_l - (bundle.l + bundle.r0 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn one_point_window_is_too_small() {
        let ctx = FieldContext::rational_point(rat_int(2));
        let x = SpectrumSet::new_exact(ctx, 1, rat_int(0)).unwrap();
        assert!(matches!(radii(&x, 0.0), Err(DeloneError::WindowTooSmall(_))));
    }

    #[test]
    fn binary_lattice_derives_single_interior_class() {
        let ctx = FieldContext::rational_point(rat_int(2));
        let x = SpectrumSet::new_exact(ctx, 1, rat_int(80)).unwrap();
        let bundle = radii(&x, 0.0).unwrap();
        let rule = derive_substitution(&x, &bundle).unwrap();
        assert_eq!(rule.verdict, Verdict::Pass);
        assert_eq!(rule.class_count_full, 1, "single interior collar class");
        assert!(rule.fixed_point, "fixed-point identity must hold");
        let geom = rule.geom.as_ref().unwrap();
        assert_eq!(geom.kappa(), 1);
        // the unit cell inflates to cover two unit cells plus stick-outs
        assert!((geom.lengths[0].to_f64() - 1.0).abs() < 1e-9);
        let rule_patch = &geom.rules[0];
        assert!(rule_patch.len() >= 2);
    }

    #[test]
    fn golden_rule_table_is_stable_under_window_doubling() {
        let x1 = SpectrumSet::new_exact(golden_ctx(), 1, rat_int(100)).unwrap();
        let b1 = radii(&x1, 0.0).unwrap();
        let r1 = derive_substitution(&x1, &b1).unwrap();
        assert_eq!(r1.verdict, Verdict::Pass);
        assert!(r1.fixed_point);

        let x2 = SpectrumSet::new_exact(golden_ctx(), 1, rat_int(200)).unwrap();
        let b2 = radii(&x2, 0.0).unwrap();
        let r2 = derive_substitution(&x2, &b2).unwrap();
        assert_eq!(r2.verdict, Verdict::Pass);
        assert!(r2.fixed_point);
        assert_eq!(
            r1.class_count_full, r2.class_count_full,
            "alphabet must be stable under window doubling"
        );
    }

    #[test]
    fn non_pisot_ratio_reports_growing_classes() {
        let x = SpectrumSet::new_float(1.5, 1, rat_int(120), 1e-9).unwrap();
        let bundle = radii(&x, 0.0).unwrap();
        let rule = derive_substitution(&x, &bundle).unwrap();
        assert_eq!(rule.verdict, Verdict::NoFlc);
        assert!(rule.class_count_full > rule.class_count_half);
        assert!(rule.geom.is_none());
    }

    #[test]
    fn csv_export_lists_points() {
        let ctx = FieldContext::rational_point(rat_int(2));
        let x = SpectrumSet::new_exact(ctx, 1, rat_int(4)).unwrap();
        let csv = x.to_csv();
        assert!(csv.starts_with("index,position\n"));
        assert_eq!(csv.lines().count(), 6);
    }
}
