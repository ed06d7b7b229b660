//! One-dimensional geometric realization of a symbolic overlapping
//! substitution, and iteration of the resulting rule patches.
//!
//! Tile lengths are the entries of the Perron-Frobenius left eigenvector;
//! the rule patch of a letter juxtaposes the image tiles and shifts them by
//! `-(1-r)·l_{a₁}` so that the fraction `1-r` of the first tile sticks out
//! of the inflated support `[0, β l_i]`, and likewise fraction `1-s` of the
//! last tile. Applying the substitution to a patch expands positions by β
//! and merges coinciding tiles; any two distinct tiles with intersecting
//! interiors are an illegal overlap and abort the iteration.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde_json::{json, Value};
use thiserror::Error;

use crate::adjacency::{check_graph_consistency, AdjacencyGraph, ConsistencyReport};
use crate::num::{parse_rational, FieldContext, Mode, NumError, QPoly, Rational, Scalar};
use crate::rules::SymbolicSubstitution;
use crate::spectral::PFData;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("length identity violated for letter {letter}: βl = {expected}, rule length = {actual}")]
    LengthIdentityViolation { letter: String, expected: f64, actual: f64 },
    #[error("substitution is not expanding (β = {0})")]
    NotExpanding(f64),
    #[error("illegal overlap between tile {label1}@{left1} and tile {label2}@{left2} on [{overlap_lo}, {overlap_hi}]{context}")]
    IllegalOverlap {
        label1: String,
        left1: f64,
        label2: String,
        left2: f64,
        overlap_lo: f64,
        overlap_hi: f64,
        context: String,
    },
    #[error("no fixed-point seed found for k <= {0}")]
    NoSeedFound(usize),
    #[error("iteration is not nested: a tile of the previous level disappeared")]
    NonNested,
    #[error("window not covered after {0} iterations")]
    WindowNotCovered(usize),
    #[error("patch is not contiguous at {0}")]
    NotContiguous(f64),
    #[error("invalid geometry JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// An interval tile: a letter label and the exact position of its left
/// endpoint. Its length is implied by the label.
#[derive(Debug, Clone)]
pub struct Tile {
    pub label: usize,
    pub left: Scalar,
}

/// A finite set of tiles, kept sorted by (left, label), with no two
/// distinct tiles sharing interior points.
#[derive(Debug, Clone, Default)]
pub struct Patch {
    tiles: Vec<Tile>,
}

impl Patch {
    pub fn empty() -> Self {
        Patch { tiles: Vec::new() }
    }

    pub fn single(tile: Tile) -> Self {
        Patch { tiles: vec![tile] }
    }

    /// Construct from tiles already known to be pairwise compatible
    /// (sorted here, but not checked for overlaps).
    pub fn from_tiles_unchecked(mut tiles: Vec<Tile>) -> Patch {
        tiles.sort_by(|s, t| scalar_cmp(&s.left, &t.left).then(s.label.cmp(&t.label)));
        Patch { tiles }
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn letters(&self) -> Vec<usize> {
        self.tiles.iter().map(|t| t.label).collect()
    }
}

/// A geometric overlapping substitution over interval tiles.
#[derive(Debug, Clone)]
pub struct GeomSubstitution {
    pub labels: Vec<String>,
    pub lengths: Vec<Scalar>,
    pub beta: Scalar,
    /// Rule patch per letter, in rule coordinates (proto-tile at `[0, l_i]`).
    pub rules: Vec<Patch>,
    pub mode: Mode,
    pub eps: f64,
    pub context: Option<FieldContext>,
}

impl GeomSubstitution {
    pub fn kappa(&self) -> usize {
        self.labels.len()
    }

    pub fn length(&self, label: usize) -> &Scalar {
        &self.lengths[label]
    }

    pub fn right_end(&self, tile: &Tile) -> Scalar {
        tile.left.add(&self.lengths[tile.label])
    }

    pub fn scalar_from_rational(&self, q: &Rational) -> Scalar {
        match self.mode {
            Mode::Exact => Scalar::Exact(
                self.context
                    .as_ref()
                    .expect("exact mode has a context")
                    .from_rational(q.clone()),
            ),
            Mode::Float => Scalar::Float(Scalar::from_rational_f64(q)),
        }
    }

    pub fn zero(&self) -> Scalar {
        self.scalar_from_rational(&Rational::from_integer(0.into()))
    }

    /// Proto-tile patch `{T_i}` at position 0.
    pub fn proto(&self, label: usize) -> Patch {
        Patch::single(Tile { label, left: self.zero() })
    }

    /// Realize a word of full letters as a contiguous patch starting at `start`.
    pub fn patch_from_word(&self, word: &[usize], start: Scalar) -> Patch {
        let mut tiles = Vec::with_capacity(word.len());
        let mut pos = start;
        for &w in word {
            tiles.push(Tile { label: w, left: pos.clone() });
            pos = pos.add(&self.lengths[w]);
        }
        Patch { tiles }
    }
}

fn scalar_cmp(a: &Scalar, b: &Scalar) -> Ordering {
    a.cmp_value(b)
}

/// Sort, merge identical tiles, and verify the patch invariant. The
/// `context` string tags overlap errors with their provenance.
fn normalize_tiles(
    g: &GeomSubstitution,
    mut tiles: Vec<Tile>,
    context: &str,
) -> Result<Patch, GeomError> {
    tiles.sort_by(|s, t| scalar_cmp(&s.left, &t.left).then(s.label.cmp(&t.label)));
    let mut out: Vec<Tile> = Vec::with_capacity(tiles.len());
    // the tile reaching furthest right so far, for the overlap sweep
    let mut max_right: Option<(Scalar, Tile)> = None;
    for tile in tiles {
        if let Some(prev) = out.last() {
            if prev.label == tile.label && prev.left.approx_eq(&tile.left, g.eps) {
                continue; // identical tile, set semantics
            }
        }
        if let Some((right, owner)) = &max_right {
            // interiors intersect iff tile.left < right (strictly, beyond eps)
            let gap = tile.left.sub(right);
            let overlapping = match g.mode {
                Mode::Exact => gap.sign() < 0,
                Mode::Float => gap.to_f64() < -g.eps,
            };
            if overlapping {
                return Err(GeomError::IllegalOverlap {
                    label1: g.labels[owner.label].clone(),
                    left1: owner.left.to_f64(),
                    label2: g.labels[tile.label].clone(),
                    left2: tile.left.to_f64(),
                    overlap_lo: tile.left.to_f64(),
                    overlap_hi: right.to_f64().min(g.right_end(&tile).to_f64()),
                    context: context.to_string(),
                });
            }
        }
        let right = g.right_end(&tile);
        let further = match &max_right {
            None => true,
            Some((r, _)) => scalar_cmp(&right, r) == Ordering::Greater,
        };
        if further {
            max_right = Some((right, tile.clone()));
        }
        out.push(tile);
    }
    Ok(Patch { tiles: out })
}

/// Build the geometric realization from the symbolic rules and the
/// Perron-Frobenius data: tile lengths from the left eigenvector, rule
/// patches by juxtaposition with the left stick-out shift.
pub fn realize(sub: &SymbolicSubstitution, pf: &PFData) -> Result<GeomSubstitution, GeomError> {
    let one = match &pf.beta {
        Scalar::Exact(_) => Scalar::Exact(pf.context.as_ref().unwrap().one()),
        Scalar::Float(_) => Scalar::Float(1.0),
    };
    if pf.beta.sub(&one).sign() <= 0 {
        return Err(GeomError::NotExpanding(pf.beta.to_f64()));
    }
    let eps = crate::num::scalar::DEFAULT_EPSILON;
    let weight_scalar = |w: &crate::rules::Weight| -> Scalar {
        match (&pf.beta, &w.exact) {
            (Scalar::Exact(_), Some(q)) => {
                Scalar::Exact(pf.context.as_ref().unwrap().from_rational(q.clone()))
            }
            (Scalar::Exact(_), None) => panic!("exact mode requires exact weights"),
            (Scalar::Float(_), _) => Scalar::Float(w.value),
        }
    };
    let mut g = GeomSubstitution {
        labels: sub.alphabet.names().to_vec(),
        lengths: pf.left.clone(),
        beta: pf.beta.clone(),
        rules: Vec::new(),
        mode: match &pf.beta {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float(_) => Mode::Float,
        },
        eps,
        context: pf.context.clone(),
    };
    let mut rules = Vec::with_capacity(sub.kappa());
    for (i, image) in sub.images.iter().enumerate() {
        let first = &image[0];
        let r = weight_scalar(&first.weight);
        // shift = -(1-r) l_{a1}
        let shift = one.sub(&r).mul(&pf.left[first.letter]).neg();
        let mut tiles = Vec::with_capacity(image.len());
        let mut pos = shift.clone();
        for wl in image {
            tiles.push(Tile { label: wl.letter, left: pos.clone() });
            pos = pos.add(&pf.left[wl.letter]);
        }
        // length identity: β l_i = r l_{a1} + Σ interior l + s l_{ak}
        let s = weight_scalar(&image.last().unwrap().weight);
        let mut rule_len = r.mul(&pf.left[first.letter]);
        if image.len() > 1 {
            for wl in &image[1..image.len() - 1] {
                rule_len = rule_len.add(&pf.left[wl.letter]);
            }
            rule_len = rule_len.add(&s.mul(&pf.left[image.last().unwrap().letter]));
        }
        let expected = pf.beta.mul(&pf.left[i]);
        let identity_holds = match g.mode {
            Mode::Exact => expected.sub(&rule_len).sign() == 0,
            Mode::Float => (expected.to_f64() - rule_len.to_f64()).abs() <= eps,
        };
        if !identity_holds {
            return Err(GeomError::LengthIdentityViolation {
                letter: sub.alphabet.name(i).to_string(),
                expected: expected.to_f64(),
                actual: rule_len.to_f64(),
            });
        }
        rules.push(normalize_tiles(&g, tiles, &format!(" in rule for {}", g.labels[i]))?);
    }
    // expanding inclusion: supp ρ(T_i) ⊇ [0, β l_i]
    for (i, rule) in rules.iter().enumerate() {
        let lo = &rule.tiles.first().unwrap().left;
        let hi = g.right_end(rule.tiles.last().unwrap());
        let target = g.beta.mul(&g.lengths[i]);
        let bad = match g.mode {
            Mode::Exact => lo.sign() > 0 || hi.sub(&target).sign() < 0,
            Mode::Float => lo.to_f64() > eps || hi.to_f64() - target.to_f64() < -eps,
        };
        if bad {
            return Err(GeomError::NotExpanding(g.beta.to_f64()));
        }
    }
    g.rules = rules;
    Ok(g)
}

/// Apply the substitution to a patch: each tile maps to its rule patch
/// shifted by `β · left`, images are merged, and the result is checked for
/// illegal overlaps.
pub fn apply(g: &GeomSubstitution, p: &Patch) -> Result<Patch, GeomError> {
    apply_tagged(g, p, "")
}

fn apply_tagged(g: &GeomSubstitution, p: &Patch, tag: &str) -> Result<Patch, GeomError> {
    let mut tiles = Vec::new();
    for tile in &p.tiles {
        let shift = g.beta.mul(&tile.left);
        for rt in g.rules[tile.label].tiles() {
            tiles.push(Tile { label: rt.label, left: rt.left.add(&shift) });
        }
    }
    normalize_tiles(g, tiles, tag)
}

/// Apply the substitution `n` times.
pub fn apply_n(g: &GeomSubstitution, p: &Patch, n: usize) -> Result<Patch, GeomError> {
    let mut current = p.clone();
    for _ in 0..n {
        current = apply(g, &current)?;
    }
    Ok(current)
}

impl Patch {
    /// Support as (min left, max right).
    pub fn support(&self, g: &GeomSubstitution) -> Option<(Scalar, Scalar)> {
        let first = self.tiles.first()?;
        let mut hi = g.right_end(first);
        for t in &self.tiles {
            let r = g.right_end(t);
            if scalar_cmp(&r, &hi) == Ordering::Greater {
                hi = r;
            }
        }
        Some((first.left.clone(), hi))
    }

    /// Translate by `x`.
    pub fn translate(&self, x: &Scalar) -> Patch {
        Patch {
            tiles: self
                .tiles
                .iter()
                .map(|t| Tile { label: t.label, left: t.left.add(x) })
                .collect(),
        }
    }

    /// Tiles whose support intersects the closed interval `[lo, hi]`.
    pub fn cut_intersecting(&self, g: &GeomSubstitution, lo: &Scalar, hi: &Scalar) -> Patch {
        Patch {
            tiles: self
                .tiles
                .iter()
                .filter(|t| {
                    let right = g.right_end(t);
                    right.sub(lo).sign() >= 0 && t.left.sub(hi).sign() <= 0
                })
                .cloned()
                .collect(),
        }
    }

    /// Tiles whose support is contained in `[lo, hi]` (the cut-off
    /// convention used for weighted patterns).
    pub fn cut_contained(&self, g: &GeomSubstitution, lo: &Scalar, hi: &Scalar) -> Patch {
        Patch {
            tiles: self
                .tiles
                .iter()
                .filter(|t| {
                    let right = g.right_end(t);
                    t.left.sub(lo).sign() >= 0 && right.sub(hi).sign() <= 0
                })
                .cloned()
                .collect(),
        }
    }

    /// True if the tiles abut with no gaps over the whole support.
    pub fn is_contiguous(&self, g: &GeomSubstitution) -> bool {
        for w in self.tiles.windows(2) {
            let right = g.right_end(&w[0]);
            if right.sub(&w[1].left).sign() < 0 && !right.approx_eq(&w[1].left, g.eps) {
                return false;
            }
        }
        true
    }

    /// Membership test up to position tolerance.
    pub fn contains_tile(&self, g: &GeomSubstitution, tile: &Tile) -> bool {
        self.tiles
            .iter()
            .any(|t| t.label == tile.label && t.left.approx_eq(&tile.left, g.eps))
    }

    pub fn is_subset_of(&self, g: &GeomSubstitution, other: &Patch) -> bool {
        self.tiles.iter().all(|t| other.contains_tile(g, t))
    }
}

/// Consistency certificate: the geometric adjacency edges collected from
/// `ρ^ν(T_a)`, `ν ≤ k*`, must reproduce the stabilized symbolic graph, and
/// every iterate must be a patch. By induction this implies consistency
/// for all higher levels.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub pass: bool,
    pub stage: CertStage,
    pub stabilized_at: usize,
    pub graph_edges: BTreeSet<(usize, usize)>,
    pub geometric_edges: BTreeSet<(usize, usize)>,
    pub graph_report: ConsistencyReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertStage {
    Graph,
    Geometric,
    Complete,
}

pub fn certify_consistency(
    g: &GeomSubstitution,
    sub: &SymbolicSubstitution,
    graph: &AdjacencyGraph,
) -> Result<Certificate, GeomError> {
    let graph_report = check_graph_consistency(sub, graph, g.eps);
    if !graph_report.pass() {
        return Ok(Certificate {
            pass: false,
            stage: CertStage::Graph,
            stabilized_at: graph.stabilized_at,
            graph_edges: graph.edges().clone(),
            geometric_edges: BTreeSet::new(),
            graph_report,
        });
    }
    let kstar = graph.stabilized_at;
    let mut geometric_edges = BTreeSet::new();
    for a in 0..g.kappa() {
        let mut p = g.proto(a);
        for level in 1..=kstar {
            p = apply_tagged(
                g,
                &p,
                &format!(" at level {level} from seed {}", g.labels[a]),
            )?;
            for w in p.tiles.windows(2) {
                let right = g.right_end(&w[0]);
                if right.approx_eq(&w[1].left, g.eps) {
                    geometric_edges.insert((w[0].label, w[1].label));
                }
            }
        }
    }
    let pass = geometric_edges == *graph.edges();
    Ok(Certificate {
        pass,
        stage: if pass { CertStage::Complete } else { CertStage::Geometric },
        stabilized_at: kstar,
        graph_edges: graph.edges().clone(),
        geometric_edges,
        graph_report,
    })
}

/// Search for `k <= k_max` and a tile `T_i + c ∈ ρ^k(T_i)` lying strictly
/// inside the support of `ρ^k(T_i)`; the seed position `x = c / (1 - β^k)`
/// then satisfies `T_i + x ∈ ρ^k(T_i + x)`, and iterating `ρ^k` from the
/// seed exhausts the line in both directions.
pub fn fixed_point_seed(
    g: &GeomSubstitution,
    k_max: usize,
) -> Result<(usize, Tile), GeomError> {
    for k in 1..=k_max {
        for label in 0..g.kappa() {
            let p = apply_n(g, &g.proto(label), k)?;
            let (lo, hi) = p.support(g).expect("nonempty rule image");
            for t in p.tiles() {
                if t.label != label {
                    continue;
                }
                let right = g.right_end(t);
                let interior = t.left.sub(&lo).sign() > 0 && right.sub(&hi).sign() < 0;
                if !interior {
                    continue;
                }
                // solve β^k x + c = x
                let mut beta_k = g.beta.clone();
                for _ in 1..k {
                    beta_k = beta_k.mul(&g.beta);
                }
                let one = g.scalar_from_rational(&Rational::from_integer(1.into()));
                let denom = one.sub(&beta_k);
                let x = t.left.div(&denom)?;
                return Ok((k, Tile { label, left: x }));
            }
        }
    }
    Err(GeomError::NoSeedFound(k_max))
}

/// Iterate `ρ^k` from the seed until the support covers `[-w, w]`,
/// verifying the nesting `ρ^{kn}(seed) ⊆ ρ^{k(n+1)}(seed)` at every step,
/// then return the tiles meeting the window.
pub fn generate_tiling(
    g: &GeomSubstitution,
    seed: &(usize, Tile),
    w: &Rational,
) -> Result<Patch, GeomError> {
    let (k, tile) = seed;
    let lo = g.scalar_from_rational(&-w);
    let hi = g.scalar_from_rational(w);
    let mut p = Patch::single(tile.clone());
    let max_rounds = 64;
    for _ in 0..max_rounds {
        let (slo, shi) = p.support(g).expect("nonempty");
        if slo.sub(&lo).sign() <= 0 && shi.sub(&hi).sign() >= 0 {
            return Ok(p.cut_intersecting(g, &lo, &hi));
        }
        let next = apply_n(g, &p, *k)?;
        if !p.is_subset_of(g, &next) {
            return Err(GeomError::NonNested);
        }
        p = next;
    }
    Err(GeomError::WindowNotCovered(max_rounds))
}

// ---------------------------------------------------------------------------
// JSON import/export (also the interchange format for rule tables derived
// from Delone sets and for hand-authored substitutions)
// ---------------------------------------------------------------------------

fn scalar_to_json(s: &Scalar) -> Value {
    match s {
        Scalar::Exact(e) => json!({
            "coeffs": e.coeffs().iter().map(|q| q.to_string()).collect::<Vec<_>>(),
            "decimal": e.to_f64(),
        }),
        Scalar::Float(v) => json!({ "decimal": v }),
    }
}

fn scalar_from_json(v: &Value, ctx: Option<&FieldContext>) -> Result<Scalar, GeomError> {
    let obj = v
        .as_object()
        .ok_or_else(|| GeomError::Json("scalar must be an object".into()))?;
    match (obj.get("coeffs"), ctx) {
        (Some(coeffs), Some(ctx)) => {
            let arr = coeffs
                .as_array()
                .ok_or_else(|| GeomError::Json("coeffs must be an array".into()))?;
            let mut qs = Vec::with_capacity(arr.len());
            for c in arr {
                let s = c
                    .as_str()
                    .ok_or_else(|| GeomError::Json("coeff must be a string".into()))?;
                qs.push(
                    parse_rational(s)
                        .ok_or_else(|| GeomError::Json(format!("bad rational `{s}`")))?,
                );
            }
            Ok(Scalar::Exact(ctx.from_poly(&QPoly::new(qs))))
        }
        _ => {
            let d = obj
                .get("decimal")
                .and_then(Value::as_f64)
                .ok_or_else(|| GeomError::Json("scalar needs a decimal".into()))?;
            Ok(Scalar::Float(d))
        }
    }
}

/// Serialize a geometric substitution, exact coefficients included.
pub fn geom_to_json(g: &GeomSubstitution) -> Value {
    let context = g.context.as_ref().map(|ctx| {
        let (lo, hi) = ctx.interval();
        json!({
            "modulus": ctx.modulus().coeffs().iter().map(|q| q.to_string()).collect::<Vec<_>>(),
            "interval": [lo.to_string(), hi.to_string()],
        })
    });
    json!({
        "mode": g.mode.to_string(),
        "eps": g.eps,
        "labels": g.labels,
        "context": context,
        "beta": scalar_to_json(&g.beta),
        "lengths": g.lengths.iter().map(scalar_to_json).collect::<Vec<_>>(),
        "rules": g
            .rules
            .iter()
            .map(|p| {
                p.tiles()
                    .iter()
                    .map(|t| json!({ "label": t.label, "left": scalar_to_json(&t.left) }))
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>(),
    })
}

/// Load a geometric substitution (hand-authored or exported).
pub fn geom_from_json(v: &Value) -> Result<GeomSubstitution, GeomError> {
    let mode = match v.get("mode").and_then(Value::as_str) {
        Some("exact") => Mode::Exact,
        Some("float") => Mode::Float,
        other => return Err(GeomError::Json(format!("bad mode {other:?}"))),
    };
    let eps = v
        .get("eps")
        .and_then(Value::as_f64)
        .unwrap_or(crate::num::scalar::DEFAULT_EPSILON);
    let labels: Vec<String> = v
        .get("labels")
        .and_then(Value::as_array)
        .ok_or_else(|| GeomError::Json("labels missing".into()))?
        .iter()
        .map(|x| x.as_str().map(str::to_string))
        .collect::<Option<_>>()
        .ok_or_else(|| GeomError::Json("labels must be strings".into()))?;
    let context = match v.get("context") {
        Some(Value::Object(obj)) => {
            let coeffs = obj
                .get("modulus")
                .and_then(Value::as_array)
                .ok_or_else(|| GeomError::Json("context.modulus missing".into()))?;
            let mut qs = Vec::new();
            for c in coeffs {
                let s = c.as_str().ok_or_else(|| GeomError::Json("modulus coeff".into()))?;
                qs.push(parse_rational(s).ok_or_else(|| GeomError::Json("bad modulus".into()))?);
            }
            let interval = obj
                .get("interval")
                .and_then(Value::as_array)
                .ok_or_else(|| GeomError::Json("context.interval missing".into()))?;
            let lo = interval
                .first()
                .and_then(Value::as_str)
                .and_then(parse_rational)
                .ok_or_else(|| GeomError::Json("bad interval".into()))?;
            let hi = interval
                .get(1)
                .and_then(Value::as_str)
                .and_then(parse_rational)
                .ok_or_else(|| GeomError::Json("bad interval".into()))?;
            Some(FieldContext::new(QPoly::new(qs), lo, hi)?)
        }
        _ => None,
    };
    if mode == Mode::Exact && context.is_none() {
        return Err(GeomError::Json("exact mode requires a context".into()));
    }
    let beta = scalar_from_json(
        v.get("beta").ok_or_else(|| GeomError::Json("beta missing".into()))?,
        context.as_ref(),
    )?;
    let lengths: Vec<Scalar> = v
        .get("lengths")
        .and_then(Value::as_array)
        .ok_or_else(|| GeomError::Json("lengths missing".into()))?
        .iter()
        .map(|x| scalar_from_json(x, context.as_ref()))
        .collect::<Result<_, _>>()?;
    let mut g = GeomSubstitution {
        labels,
        lengths,
        beta,
        rules: Vec::new(),
        mode,
        eps,
        context,
    };
    let rules_json = v
        .get("rules")
        .and_then(Value::as_array)
        .ok_or_else(|| GeomError::Json("rules missing".into()))?;
    if rules_json.len() != g.kappa() {
        return Err(GeomError::Json("one rule patch per label required".into()));
    }
    let mut rules = Vec::with_capacity(rules_json.len());
    for (i, rp) in rules_json.iter().enumerate() {
        let arr = rp
            .as_array()
            .ok_or_else(|| GeomError::Json("rule patch must be an array".into()))?;
        let mut tiles = Vec::with_capacity(arr.len());
        for t in arr {
            let label = t
                .get("label")
                .and_then(Value::as_u64)
                .ok_or_else(|| GeomError::Json("tile label missing".into()))? as usize;
            if label >= g.kappa() {
                return Err(GeomError::Json(format!("tile label {label} out of range")));
            }
            let left = scalar_from_json(
                t.get("left")
                    .ok_or_else(|| GeomError::Json("tile left missing".into()))?,
                g.context.as_ref(),
            )?;
            tiles.push(Tile { label, left });
        }
        rules.push(normalize_tiles(&g, tiles, &format!(" in imported rule {i}"))?);
    }
    g.rules = rules;
    Ok(g)
}

/// Patch export: one record per tile with exact coefficients and a decimal
/// rendering, plus the label name and length index.
pub fn patch_to_json(g: &GeomSubstitution, p: &Patch) -> Value {
    json!({
        "mode": g.mode.to_string(),
        "tiles": p
            .tiles()
            .iter()
            .map(|t| {
                json!({
                    "label": g.labels[t.label],
                    "length_index": t.label,
                    "left": scalar_to_json(&t.left),
                })
            })
            .collect::<Vec<_>>(),
    })
}
