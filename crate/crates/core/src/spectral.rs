//! Substitution matrix and Perron-Frobenius data.
//!
//! The matrix entry `M[i][j]` counts occurrences of letter `i` in the image
//! of letter `j`, with the two boundary occurrences counted by their
//! weights, so entries may be non-integer rationals. For a primitive matrix
//! the dominant eigenvalue β and its positive left/right eigenvectors are
//! computed exactly in ℚ(β) (exact mode) or by shifted power iteration
//! (float mode). The left eigenvector is scaled to end in 1 and serves as
//! the tile length vector; the right eigenvector is scaled so that
//! `Σ l_i r_i = 1` and gives tile frequencies per unit length.

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::num::{
    decimal_digits, FieldContext, FieldElement, Mode, NumError, QPoly, Rational, Scalar,
};
use crate::rules::SymbolicSubstitution;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("characteristic polynomial requires exact rational entries")]
    FloatModeUnsupported,
    #[error("matrix is not primitive")]
    NotPrimitive,
    #[error("power iteration did not reach residual {0}")]
    PowerIterationDiverged(f64),
    #[error("eigenvector solve produced an unexpected kernel dimension {0}")]
    KernelDimension(usize),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// κ×κ substitution matrix; float entries always present, exact rational
/// entries whenever every contributing weight has a known rational value.
#[derive(Debug, Clone)]
pub struct SubstMatrix {
    pub kappa: usize,
    pub mode: Mode,
    pub float: Vec<Vec<f64>>,
    pub exact: Option<Vec<Vec<Rational>>>,
}

impl SubstMatrix {
    pub fn exact_entry(&self, i: usize, j: usize) -> Option<&Rational> {
        self.exact.as_ref().map(|m| &m[i][j])
    }
}

/// `M[i][j]` = sum of weights of occurrences of letter `i` in the image of `j`.
pub fn substitution_matrix(sub: &SymbolicSubstitution) -> SubstMatrix {
    let kappa = sub.kappa();
    let mut float = vec![vec![0.0; kappa]; kappa];
    let mut exact = if sub.has_exact_weights() {
        Some(vec![vec![Rational::zero(); kappa]; kappa])
    } else {
        None
    };
    for (j, image) in sub.images.iter().enumerate() {
        for wl in image {
            float[wl.letter][j] += wl.weight.value;
            if let Some(m) = exact.as_mut() {
                m[wl.letter][j] += wl.weight.exact.as_ref().unwrap();
            }
        }
    }
    SubstMatrix { kappa, mode: sub.mode, float, exact }
}

/// Exact monic characteristic polynomial `det(xI - M)` by the
/// Faddeev-LeVerrier recurrence over ℚ.
pub fn char_poly(m: &SubstMatrix) -> Result<QPoly, SpectralError> {
    let entries = m.exact.as_ref().ok_or(SpectralError::FloatModeUnsupported)?;
    Ok(char_poly_of_rational_matrix(entries))
}

/// Faddeev-LeVerrier on an arbitrary square rational matrix.
pub fn char_poly_of_rational_matrix(entries: &[Vec<Rational>]) -> QPoly {
    let n = entries.len();
    let mut b: Vec<Vec<Rational>> = identity(n);
    let mut cs = Vec::with_capacity(n);
    for k in 1..=n {
        let a = mat_mul(entries, &b);
        let ck = trace(&a) / Rational::from_integer((k as i64).into());
        b = a;
        for (i, row) in b.iter_mut().enumerate() {
            row[i] -= &ck;
        }
        cs.push(ck);
    }
    // x^n - c1 x^{n-1} - ... - cn
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[n] = Rational::one();
    for (k, c) in cs.iter().enumerate() {
        coeffs[n - 1 - k] = -c;
    }
    QPoly::new(coeffs)
}

fn identity(n: usize) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect()
}

fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = a.len();
    let mut out = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                let term = &a[i][k] * &b[k][j];
                out[i][j] += term;
            }
        }
    }
    out
}

fn trace(a: &[Vec<Rational>]) -> Rational {
    let mut t = Rational::zero();
    for (i, row) in a.iter().enumerate() {
        t += &row[i];
    }
    t
}

/// Primitivity test on the boolean support matrix: returns the smallest
/// `n <= κ² - 2κ + 2` (Wielandt bound) with `M^n` strictly positive.
pub fn is_primitive(m: &SubstMatrix) -> (bool, Option<usize>) {
    let n = m.kappa;
    let support: Vec<Vec<bool>> = m
        .float
        .iter()
        .map(|row| row.iter().map(|&v| v > 0.0).collect())
        .collect();
    let bound = if n <= 1 { 1 } else { n * n - 2 * n + 2 };
    let mut power = support.clone();
    for step in 1..=bound {
        if power.iter().all(|row| row.iter().all(|&v| v)) {
            return (true, Some(step));
        }
        power = bool_mul(&power, &support);
    }
    (false, None)
}

fn bool_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    let mut out = vec![vec![false; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] {
                for j in 0..n {
                    if b[k][j] {
                        out[i][j] = true;
                    }
                }
            }
        }
    }
    out
}

/// Perron-Frobenius data: dominant eigenvalue β, left eigenvector `l`
/// (tile lengths, scaled to `l_κ = 1`), right eigenvector `r` (frequencies,
/// scaled so `Σ l_i r_i = 1`), and the primitivity witness.
#[derive(Debug, Clone)]
pub struct PFData {
    pub beta: Scalar,
    pub left: Vec<Scalar>,
    pub right: Vec<Scalar>,
    pub primitivity_witness: usize,
    /// Field context housing β in exact mode.
    pub context: Option<FieldContext>,
}

impl PFData {
    pub fn kappa(&self) -> usize {
        self.left.len()
    }

    /// Rescale the length vector by `c > 0`; the frequency vector scales by
    /// `1/c`, preserving `Σ l_i r_i = 1`.
    pub fn rescale(&self, c: &Scalar) -> PFData {
        PFData {
            beta: self.beta.clone(),
            left: self.left.iter().map(|l| l.mul(c)).collect(),
            right: self
                .right
                .iter()
                .map(|r| r.div(c).expect("positive scale"))
                .collect(),
            primitivity_witness: self.primitivity_witness,
            context: self.context.clone(),
        }
    }

    /// The alternative normalization `Σ r_i = 1` (frequency per tile rather
    /// than per unit length).
    pub fn right_sum_normalized(&self) -> Vec<Scalar> {
        let mut total = self.right[0].clone();
        for r in &self.right[1..] {
            total = total.add(r);
        }
        self.right
            .iter()
            .map(|r| r.div(&total).expect("positive sum"))
            .collect()
    }
}

/// Compute Perron-Frobenius data for a primitive substitution matrix.
pub fn pf_data(m: &SubstMatrix) -> Result<PFData, SpectralError> {
    let (primitive, witness) = is_primitive(m);
    if !primitive {
        return Err(SpectralError::NotPrimitive);
    }
    let witness = witness.unwrap();
    match m.mode {
        Mode::Exact => pf_data_exact(m, witness),
        Mode::Float => pf_data_float(m, witness),
    }
}

fn pf_data_exact(m: &SubstMatrix, witness: usize) -> Result<PFData, SpectralError> {
    let poly = char_poly(m)?;
    let ctx = FieldContext::for_dominant_root(&poly)?;
    let beta = ctx.beta();
    let entries = m.exact.as_ref().expect("exact mode has rational entries");
    let n = m.kappa;
    let to_field = |i: usize, j: usize| ctx.from_rational(entries[i][j].clone());
    // (M - βI) r = 0
    let a_right: Vec<Vec<FieldElement>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let e = to_field(i, j);
                    if i == j {
                        e.try_sub(&beta).expect("same context")
                    } else {
                        e
                    }
                })
                .collect()
        })
        .collect();
    // (Mᵀ - βI) lᵀ = 0
    let a_left: Vec<Vec<FieldElement>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let e = to_field(j, i);
                    if i == j {
                        e.try_sub(&beta).expect("same context")
                    } else {
                        e
                    }
                })
                .collect()
        })
        .collect();
    let right = positive_kernel_vector(&ctx, a_right)?;
    let left = positive_kernel_vector(&ctx, a_left)?;
    // scale l to end in 1
    let last = left[n - 1].clone();
    let left: Vec<FieldElement> = left
        .iter()
        .map(|l| l.try_div(&last).expect("positive last entry"))
        .collect();
    // scale r so Σ l_i r_i = 1
    let mut dot = ctx.zero();
    for (l, r) in left.iter().zip(right.iter()) {
        dot = dot.try_add(&l.try_mul(r).unwrap()).unwrap();
    }
    let right: Vec<FieldElement> = right
        .iter()
        .map(|r| r.try_div(&dot).expect("positive normalizer"))
        .collect();
    Ok(PFData {
        beta: Scalar::Exact(beta),
        left: left.into_iter().map(Scalar::Exact).collect(),
        right: right.into_iter().map(Scalar::Exact).collect(),
        primitivity_witness: witness,
        context: Some(ctx),
    })
}

/// Solve `A x = 0` for a one-dimensional kernel over ℚ(β), returning the
/// vector scaled to have all entries strictly positive.
fn positive_kernel_vector(
    ctx: &FieldContext,
    mut a: Vec<Vec<FieldElement>>,
) -> Result<Vec<FieldElement>, SpectralError> {
    let n = a.len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; n];
    let mut row = 0usize;
    for col in 0..n {
        let Some(pr) = (row..n).find(|&r| a[r][col].sign() != 0) else {
            continue;
        };
        a.swap(row, pr);
        let inv = a[row][col].inv()?;
        for j in 0..n {
            a[row][j] = a[row][j].try_mul(&inv).unwrap();
        }
        for r in 0..n {
            if r != row && a[r][col].sign() != 0 {
                let factor = a[r][col].clone();
                for j in 0..n {
                    let delta = factor.try_mul(&a[row][j]).unwrap();
                    a[r][j] = a[r][j].try_sub(&delta).unwrap();
                }
            }
        }
        pivot_of_col[col] = Some(row);
        row += 1;
    }
    let free_cols: Vec<usize> = (0..n).filter(|&c| pivot_of_col[c].is_none()).collect();
    if free_cols.len() != 1 {
        return Err(SpectralError::KernelDimension(free_cols.len()));
    }
    let free = free_cols[0];
    let mut x: Vec<FieldElement> = (0..n).map(|_| ctx.zero()).collect();
    x[free] = ctx.one();
    for col in 0..n {
        if let Some(r) = pivot_of_col[col] {
            x[col] = a[r][free].neg();
        }
    }
    let signs: Vec<i8> = x.iter().map(|e| e.sign()).collect();
    if signs.iter().all(|&s| s > 0) {
        Ok(x)
    } else if signs.iter().all(|&s| s < 0) {
        Ok(x.iter().map(|e| e.neg()).collect())
    } else {
        Err(SpectralError::NotPrimitive)
    }
}

const FLOAT_RESIDUAL: f64 = 1e-12;

fn pf_data_float(m: &SubstMatrix, witness: usize) -> Result<PFData, SpectralError> {
    let n = m.kappa;
    let transpose: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| m.float[j][i]).collect())
        .collect();
    let (beta_r, right) = power_iteration(&m.float)?;
    let (beta_l, left) = power_iteration(&transpose)?;
    let beta = 0.5 * (beta_r + beta_l);
    // scale l to end in 1
    let last = left[n - 1];
    let left: Vec<f64> = left.iter().map(|l| l / last).collect();
    let dot: f64 = left.iter().zip(right.iter()).map(|(l, r)| l * r).sum();
    let right: Vec<f64> = right.iter().map(|r| r / dot).collect();
    Ok(PFData {
        beta: Scalar::Float(beta),
        left: left.into_iter().map(Scalar::Float).collect(),
        right: right.into_iter().map(Scalar::Float).collect(),
        primitivity_witness: witness,
        context: None,
    })
}

/// Power iteration on `M + I` (the shift keeps the dominant eigenvalue
/// strictly separated for nonnegative primitive matrices).
fn power_iteration(m: &[Vec<f64>]) -> Result<(f64, Vec<f64>), SpectralError> {
    let n = m.len();
    let mut v = vec![1.0; n];
    for _ in 0..200_000 {
        let mv = mat_vec(m, &v);
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let lambda: f64 = mv.iter().zip(v.iter()).map(|(a, b)| a * b).sum::<f64>() / vv;
        let residual = mv
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a - lambda * b).abs())
            .fold(0.0_f64, f64::max);
        if residual <= FLOAT_RESIDUAL * lambda.max(1.0) {
            return Ok((lambda, v));
        }
        // shifted step and sup-norm renormalization
        let mut next: Vec<f64> = mv.iter().zip(v.iter()).map(|(a, b)| a + b).collect();
        let norm = next.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        for x in &mut next {
            *x /= norm;
        }
        v = next;
    }
    Err(SpectralError::PowerIterationDiverged(FLOAT_RESIDUAL))
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v.iter()).map(|(a, b)| a * b).sum())
        .collect()
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct MatrixReport {
    pub mode: String,
    pub kappa: usize,
    pub letters: Vec<String>,
    pub matrix: Vec<Vec<String>>,
    pub char_poly: Option<Vec<String>>,
    pub beta_decimal: String,
    pub primitivity_witness: usize,
    pub left: Vec<String>,
    pub right: Vec<String>,
}

fn scalar_string(s: &Scalar, digits: usize) -> String {
    match s {
        Scalar::Exact(e) => match e.as_rational() {
            Some(q) => decimal_digits(&q, digits),
            None => format!("{:.*}", digits, e.to_f64()),
        },
        Scalar::Float(v) => format!("{:.*}", digits, v),
    }
}

/// Deterministic report of matrix and eigendata for JSON/CSV export.
/// β is rendered with 30 significant digits.
pub fn matrix_report(
    sub: &SymbolicSubstitution,
    m: &SubstMatrix,
    pf: &PFData,
) -> MatrixReport {
    let rational_matrix = m.exact.as_ref().map(|rows| {
        rows.iter()
            .map(|row| row.iter().map(|q| q.to_string()).collect())
            .collect::<Vec<Vec<String>>>()
    });
    let matrix = rational_matrix.unwrap_or_else(|| {
        m.float
            .iter()
            .map(|row| row.iter().map(|v| format!("{v:.15}")).collect())
            .collect()
    });
    let beta_decimal = match (&pf.beta, &pf.context) {
        (Scalar::Exact(_), Some(ctx)) => ctx.beta_decimal(30),
        (s, _) => format!("{:.15}", s.to_f64()),
    };
    MatrixReport {
        mode: m.mode.to_string(),
        kappa: m.kappa,
        letters: sub.alphabet.names().to_vec(),
        matrix,
        char_poly: char_poly(m)
            .ok()
            .map(|p| p.coeffs().iter().map(|c| c.to_string()).collect()),
        beta_decimal,
        primitivity_witness: pf.primitivity_witness,
        left: pf.left.iter().map(|s| scalar_string(s, 15)).collect(),
        right: pf.right.iter().map(|s| scalar_string(s, 15)).collect(),
    }
}

impl MatrixReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable report")
    }

    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        out.push_str("row");
        for name in &self.letters {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, row) in self.matrix.iter().enumerate() {
            out.push_str(&self.letters[i]);
            for v in row {
                out.push(',');
                out.push_str(v);
            }
            out.push('\n');
        }
        let _ = writeln!(out, "beta,{}", self.beta_decimal);
        let _ = writeln!(out, "left,{}", self.left.join(","));
        let _ = writeln!(out, "right,{}", self.right.join(","));
        if let Some(cp) = &self.char_poly {
            let _ = writeln!(out, "char_poly,{}", cp.join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{rat, rat_int};
    use crate::rules::parse_rules;

    const EX11: &str = "alphabet a b c; a -> [a:1/2] b a; b -> c [a:1/2]; c -> b [a:1/2];";
    const EX52: &str = "alphabet a b c d; param r = 1/2;
        a -> [a:r] b c a; b -> b c; c -> d [a:1-r]; d -> [a:r] b c [a:1-r];";
    const EX53: &str = "alphabet a b c d e; param r = 1/2; param s = 1/2;
        a -> [c:1-s] a b c a d e [a:r];
        b -> [a:1-r] d e [c:s];
        c -> [c:1-s] a b [c:s];
        d -> [a:1-r] d;
        e -> e a b [c:s];";

    fn ex52_at(r: &str) -> SubstMatrix {
        let sub = crate::rules::parse_rules_with_overrides(
            EX52,
            &[("r".to_string(), r.to_string())],
        )
        .unwrap();
        substitution_matrix(&sub)
    }

    #[test]
    fn matrix_of_three_letter_example() {
        let sub = parse_rules(EX11).unwrap();
        let m = substitution_matrix(&sub);
        let exact = m.exact.as_ref().unwrap();
        let expected = [
            [rat(3, 2), rat(1, 2), rat(1, 2)],
            [rat_int(1), rat_int(0), rat_int(1)],
            [rat_int(0), rat_int(1), rat_int(0)],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(exact[i][j], expected[i][j], "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn matrix_of_silver_family() {
        // columns follow the images: (1+r,1,1,0), (0,1,1,0), (1-r,0,0,1), (1,1,1,0)
        let m = ex52_at("1/3");
        let exact = m.exact.as_ref().unwrap();
        let r = rat(1, 3);
        let one = rat_int(1);
        let expected = [
            [&one + &r, rat_int(0), &one - &r, one.clone()],
            [one.clone(), one.clone(), rat_int(0), one.clone()],
            [one.clone(), one.clone(), rat_int(0), one.clone()],
            [rat_int(0), rat_int(0), one.clone(), rat_int(0)],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(exact[i][j], expected[i][j], "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn identity_matrix() {
        let sub = parse_rules("alphabet a; a -> [a:1];").unwrap();
        let m = substitution_matrix(&sub);
        assert_eq!(m.exact.as_ref().unwrap()[0][0], rat_int(1));
    }

    #[test]
    fn char_poly_of_silver_family_samples() {
        // x^4 - (2+r) x^3 + (2r-1) x^2 + r x
        for r in ["1/4", "1/3", "2/3"] {
            let m = ex52_at(r);
            let p = char_poly(&m).unwrap();
            let rq = crate::num::parse_rational(r).unwrap();
            let expected = QPoly::new(vec![
                rat_int(0),
                rq.clone(),
                rat_int(2) * &rq - rat_int(1),
                -(rat_int(2) + &rq),
                rat_int(1),
            ]);
            assert_eq!(p, expected, "r = {r}");
        }
    }

    #[test]
    fn char_poly_scalar_matrix() {
        let sub = parse_rules("alphabet a; a -> a a;").unwrap();
        let m = substitution_matrix(&sub);
        assert_eq!(char_poly(&m).unwrap(), QPoly::from_ints(&[-2, 1]));
    }

    #[test]
    fn char_poly_of_five_letter_family() {
        // (x - 1/2)(x - 1)(x^3 - 4x^2 - x + 2), monic form
        let sub = parse_rules(EX53).unwrap();
        let m = substitution_matrix(&sub);
        let p = char_poly(&m).unwrap();
        let expected = QPoly::new(vec![rat(-1, 2), rat_int(1)])
            .mul(&QPoly::from_ints(&[-1, 1]))
            .mul(&QPoly::from_ints(&[2, -1, -4, 1]));
        assert_eq!(p, expected);
        let (_, rem) = p.div_rem(&QPoly::from_ints(&[2, -1, -4, 1]));
        assert!(rem.is_zero());
    }

    #[test]
    fn char_poly_unsupported_for_irrational_weights() {
        let sub = parse_rules(
            "alphabet a b c d; param r = sqrt(2)/2;
             a -> [a:r] b c a; b -> b c; c -> d [a:1-r]; d -> [a:r] b c [a:1-r];",
        )
        .unwrap();
        let m = substitution_matrix(&sub);
        assert!(matches!(char_poly(&m), Err(SpectralError::FloatModeUnsupported)));
    }

    /// Boolean matrix power oracle, independent of `is_primitive`.
    fn min_positive_power(m: &SubstMatrix, cap: usize) -> Option<usize> {
        let n = m.kappa;
        let support: Vec<Vec<bool>> = m
            .float
            .iter()
            .map(|row| row.iter().map(|&v| v > 0.0).collect())
            .collect();
        let mut p = identity_bool(n);
        for step in 1..=cap {
            p = super::bool_mul(&p, &support);
            if p.iter().all(|row| row.iter().all(|&v| v)) {
                return Some(step);
            }
        }
        None
    }

    fn identity_bool(n: usize) -> Vec<Vec<bool>> {
        (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect()
    }

    #[test]
    fn primitivity_of_fixtures() {
        let sub = parse_rules(EX11).unwrap();
        let m = substitution_matrix(&sub);
        let (p, w) = is_primitive(&m);
        assert!(p);
        assert!(w.unwrap() <= 6);
        assert_eq!(w, min_positive_power(&m, 16));

        let sub = parse_rules(EX53).unwrap();
        let m = substitution_matrix(&sub);
        let (p, w) = is_primitive(&m);
        assert!(p);
        assert_eq!(w, min_positive_power(&m, 32));
    }

    #[test]
    fn reducible_matrix_is_not_primitive() {
        let sub = parse_rules("alphabet a b; a -> a; b -> b;").unwrap();
        let m = substitution_matrix(&sub);
        let (p, w) = is_primitive(&m);
        assert!(!p);
        assert!(w.is_none());
        assert!(matches!(pf_data(&m), Err(SpectralError::NotPrimitive)));
    }

    #[test]
    fn pf_data_of_three_letter_example() {
        let sub = parse_rules(EX11).unwrap();
        let m = substitution_matrix(&sub);
        let pf = pf_data(&m).unwrap();
        let ctx = pf.context.as_ref().unwrap();
        // β = 2 exactly
        let Scalar::Exact(beta) = &pf.beta else { panic!("exact mode") };
        assert!(beta.try_sub(&ctx.from_int(2)).unwrap().is_zero_value());
        // l = (2, 1, 1) with the trailing-1 scaling
        let expected_l = [2i64, 1, 1];
        for (l, e) in pf.left.iter().zip(expected_l) {
            let Scalar::Exact(l) = l else { panic!() };
            assert!(l.try_sub(&ctx.from_int(e)).unwrap().is_zero_value());
        }
        // r = (1/3, 2/9, 1/9) after Σ l_i r_i = 1
        let expected_r = [rat(1, 3), rat(2, 9), rat(1, 9)];
        for (r, e) in pf.right.iter().zip(expected_r) {
            let Scalar::Exact(r) = r else { panic!() };
            assert!(r.try_sub(&ctx.from_rational(e)).unwrap().is_zero_value());
        }
    }

    #[test]
    fn eigen_identities_exact() {
        for text in [EX11, "alphabet a; a -> a a;"] {
            let sub = parse_rules(text).unwrap();
            let m = substitution_matrix(&sub);
            let pf = pf_data(&m).unwrap();
            let ctx = pf.context.clone().unwrap();
            let exact = m.exact.as_ref().unwrap();
            let n = m.kappa;
            for j in 0..n {
                // (lM)_j = β l_j
                let mut acc = Scalar::Exact(ctx.zero());
                for i in 0..n {
                    acc = acc.add(
                        &pf.left[i]
                            .mul(&Scalar::Exact(ctx.from_rational(exact[i][j].clone()))),
                    );
                }
                assert_eq!(acc.sub(&pf.beta.mul(&pf.left[j])).sign(), 0);
            }
            for i in 0..n {
                // (Mr)_i = β r_i
                let mut acc = Scalar::Exact(ctx.zero());
                for j in 0..n {
                    acc = acc.add(
                        &pf.right[j]
                            .mul(&Scalar::Exact(ctx.from_rational(exact[i][j].clone()))),
                    );
                }
                assert_eq!(acc.sub(&pf.beta.mul(&pf.right[i])).sign(), 0);
            }
        }
    }

    #[test]
    fn char_poly_vanishes_at_beta() {
        let sub = parse_rules(EX11).unwrap();
        let m = substitution_matrix(&sub);
        let pf = pf_data(&m).unwrap();
        let ctx = pf.context.as_ref().unwrap();
        let p = char_poly(&m).unwrap();
        assert!(ctx.from_poly(&p).is_zero_value());
    }

    #[test]
    fn float_silver_mean_eigendata() {
        let sub = parse_rules(
            "alphabet a b c d; param r = sqrt(2)/2;
             a -> [a:r] b c a; b -> b c; c -> d [a:1-r]; d -> [a:r] b c [a:1-r];",
        )
        .unwrap();
        let m = substitution_matrix(&sub);
        let pf = pf_data(&m).unwrap();
        let sqrt2 = 2.0_f64.sqrt();
        assert!((pf.beta.to_f64() - (1.0 + sqrt2)).abs() < 1e-10);
        let expected = [sqrt2, sqrt2 - 1.0, 2.0 - sqrt2, 1.0];
        for (l, e) in pf.left.iter().zip(expected) {
            assert!((l.to_f64() - e).abs() < 1e-8, "left {} vs {e}", l.to_f64());
        }
    }

    #[test]
    fn float_five_letter_right_eigenvector() {
        let sub = parse_rules(EX53).unwrap();
        let m = substitution_matrix(&sub);
        let pf = pf_data(&m).unwrap();
        let p = pf.beta.to_f64();
        assert!(p > 4.12 && p < 4.13);
        // right eigenvector proportional to (p, p-2, p²-3p-2, 2, 2)
        let expected = [p, p - 2.0, p * p - 3.0 * p - 2.0, 2.0, 2.0];
        let scale = 2.0 / pf.right[4].to_f64();
        for (r, e) in pf.right.iter().zip(expected) {
            assert!(
                (r.to_f64() * scale - e).abs() < 1e-8,
                "right {} vs {e}",
                r.to_f64() * scale
            );
        }
    }

    #[test]
    fn rescale_keeps_normalization() {
        let sub = parse_rules(EX11).unwrap();
        let m = substitution_matrix(&sub);
        let pf = pf_data(&m).unwrap();
        let ctx = pf.context.clone().unwrap();
        let scaled = pf.rescale(&Scalar::Exact(ctx.from_rational(rat(5, 3))));
        let mut dot = scaled.left[0].mul(&scaled.right[0]);
        for i in 1..3 {
            dot = dot.add(&scaled.left[i].mul(&scaled.right[i]));
        }
        assert_eq!(dot.sub(&Scalar::Exact(ctx.one())).sign(), 0);
    }

    #[test]
    fn sum_normalized_right_adds_to_one() {
        let sub = parse_rules(EX11).unwrap();
        let m = substitution_matrix(&sub);
        let pf = pf_data(&m).unwrap();
        let r = pf.right_sum_normalized();
        let mut total = r[0].clone();
        for x in &r[1..] {
            total = total.add(x);
        }
        let ctx = pf.context.as_ref().unwrap();
        assert_eq!(total.sub(&Scalar::Exact(ctx.one())).sign(), 0);
    }

    #[test]
    fn report_is_deterministic() {
        let sub = parse_rules(EX11).unwrap();
        let m = substitution_matrix(&sub);
        let pf = pf_data(&m).unwrap();
        let a = matrix_report(&sub, &m, &pf).to_json();
        let b = matrix_report(&sub, &m, &pf).to_json();
        assert_eq!(a, b);
        assert!(a.contains("2.0000000000000000000000000000"), "{a}");
    }
}
