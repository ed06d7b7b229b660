//! Certification of the expansion constant as an algebraic integer.
//!
//! Positions of same-label tiles in a tiling window yield return vectors
//! `x - y`; written in the power basis of ℚ(β) they generate a finitely
//! generated ℤ-module `v_1 ℤ + … + v_k ℤ` (computed via an integer Hermite
//! normal form after clearing denominators). Multiplication by β maps the
//! module into itself for a genuine substitution tiling, so `β v_i =
//! Σ a_ij v_j` with integer `a_ij`, and β is a root of the monic integer
//! characteristic polynomial of `(a_ij)`. The verification that the
//! polynomial vanishes at β is exact.
//!
//! Finite local complexity and repetitivity are not decidable from a
//! finite window; the operational surrogate is stability of the module
//! and its certificate under window enlargement, which the caller checks
//! by recomputing on a doubled window.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::geometry::{GeomSubstitution, Patch};
use crate::num::{FieldContext, FieldElement, Mode, NumError, QPoly, Rational};

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("return modules require exact arithmetic")]
    FloatModeUnsupported,
    #[error("patch has no return vectors")]
    EmptyModule,
    #[error("module is not invariant under β (basis element {basis_index}); enlarge the patch")]
    ModuleNotInvariant { basis_index: usize },
    #[error("certificate verification failed: polynomial does not vanish at β")]
    VerificationFailed,
    #[error(transparent)]
    Num(#[from] NumError),
}

/// ℤ-module of return vectors inside ℚ(β), with a Hermite-normal-form
/// basis over a common denominator.
#[derive(Debug, Clone)]
pub struct ReturnModule {
    pub context: FieldContext,
    /// HNF basis rows, numerators over `denominator`.
    pub basis_int: Vec<Vec<BigInt>>,
    pub denominator: BigInt,
    pub basis_elements: Vec<FieldElement>,
    pub generator_count: usize,
    /// Support of the window the module was computed from.
    pub window: (f64, f64),
}

/// Row-style Hermite normal form of an integer matrix; returns the nonzero
/// rows (pivot entries positive, entries above pivots reduced).
pub fn hermite_normal_form(mut rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    if rows.is_empty() {
        return rows;
    }
    let cols = rows[0].len();
    let mut pivot_row = 0usize;
    for col in 0..cols {
        // gcd-eliminate below pivot_row in this column
        loop {
            let mut best: Option<usize> = None;
            for r in pivot_row..rows.len() {
                if !rows[r][col].is_zero() {
                    best = match best {
                        None => Some(r),
                        Some(b) => {
                            if rows[r][col].abs() < rows[b][col].abs() {
                                Some(r)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
            }
            let Some(b) = best else { break };
            rows.swap(pivot_row, b);
            let mut done = true;
            for r in pivot_row + 1..rows.len() {
                if !rows[r][col].is_zero() {
                    let q = rows[r][col].div_floor(&rows[pivot_row][col]);
                    for c in 0..cols {
                        let sub = &q * &rows[pivot_row][c];
                        rows[r][c] -= sub;
                    }
                    if !rows[r][col].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if rows[pivot_row..].iter().all(|r| r[col].is_zero()) {
            continue;
        }
        if rows[pivot_row][col].is_negative() {
            for c in 0..cols {
                rows[pivot_row][c] = -rows[pivot_row][c].clone();
            }
        }
        // reduce entries above the pivot
        for r in 0..pivot_row {
            if !rows[r][col].is_zero() {
                let q = rows[r][col].div_floor(&rows[pivot_row][col]);
                for c in 0..cols {
                    let sub = &q * &rows[pivot_row][c];
                    rows[r][c] -= sub;
                }
            }
        }
        pivot_row += 1;
        if pivot_row == rows.len() {
            break;
        }
    }
    rows.truncate(pivot_row);
    rows
}

fn lcm_bigint(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_zero() || b.is_zero() {
        return BigInt::one();
    }
    (a * b).abs() / a.gcd(b)
}

/// Collect the ℤ-module generated by position differences of same-label
/// tiles across the whole patch (all labels jointly).
pub fn return_module(g: &GeomSubstitution, patch: &Patch) -> Result<ReturnModule, AlgebraError> {
    if g.mode != Mode::Exact {
        return Err(AlgebraError::FloatModeUnsupported);
    }
    let ctx = g.context.as_ref().expect("exact mode has a context").clone();
    let dim = ctx.degree();
    // differences to the first occurrence generate the same module as all
    // pairwise differences
    let mut generators: Vec<Vec<Rational>> = Vec::new();
    for label in 0..g.kappa() {
        let mut first: Option<&crate::geometry::Tile> = None;
        for t in patch.tiles().iter().filter(|t| t.label == label) {
            match first {
                None => first = Some(t),
                Some(f) => {
                    let crate::num::Scalar::Exact(a) = &t.left else { unreachable!() };
                    let crate::num::Scalar::Exact(b) = &f.left else { unreachable!() };
                    let diff = a.try_sub(b)?;
                    let mut coeffs = diff.coeffs();
                    coeffs.resize(dim, Rational::zero());
                    generators.push(coeffs);
                }
            }
        }
    }
    if generators.is_empty() {
        return Err(AlgebraError::EmptyModule);
    }
    let mut denom = BigInt::one();
    for gen in &generators {
        for q in gen {
            denom = lcm_bigint(&denom, q.denom());
        }
    }
    let int_rows: Vec<Vec<BigInt>> = generators
        .iter()
        .map(|gen| {
            gen.iter()
                .map(|q| (q * Rational::from_integer(denom.clone())).to_integer())
                .collect()
        })
        .collect();
    let generator_count = int_rows.len();
    let basis_int = hermite_normal_form(int_rows);
    let denom_rat = Rational::from_integer(denom.clone());
    let basis_elements: Vec<FieldElement> = basis_int
        .iter()
        .map(|row| {
            let coeffs: Vec<Rational> = row
                .iter()
                .map(|n| Rational::from_integer(n.clone()) / &denom_rat)
                .collect();
            ctx.from_poly(&QPoly::new(coeffs))
        })
        .collect();
    let window = patch
        .support(g)
        .map(|(lo, hi)| (lo.to_f64(), hi.to_f64()))
        .unwrap_or((0.0, 0.0));
    Ok(ReturnModule {
        context: ctx,
        basis_int,
        denominator: denom,
        basis_elements,
        generator_count,
        window,
    })
}

/// Build a module directly from field elements (used for stability checks
/// and adversarial tests).
pub fn module_from_elements(
    ctx: &FieldContext,
    elements: &[FieldElement],
) -> Result<ReturnModule, AlgebraError> {
    if elements.is_empty() {
        return Err(AlgebraError::EmptyModule);
    }
    let dim = ctx.degree();
    let mut denom = BigInt::one();
    let coeff_rows: Vec<Vec<Rational>> = elements
        .iter()
        .map(|e| {
            let mut c = e.coeffs();
            c.resize(dim, Rational::zero());
            c
        })
        .collect();
    for row in &coeff_rows {
        for q in row {
            denom = lcm_bigint(&denom, q.denom());
        }
    }
    let int_rows: Vec<Vec<BigInt>> = coeff_rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|q| (q * Rational::from_integer(denom.clone())).to_integer())
                .collect()
        })
        .collect();
    let generator_count = int_rows.len();
    let basis_int = hermite_normal_form(int_rows);
    let denom_rat = Rational::from_integer(denom.clone());
    let basis_elements = basis_int
        .iter()
        .map(|row| {
            let coeffs: Vec<Rational> = row
                .iter()
                .map(|n| Rational::from_integer(n.clone()) / &denom_rat)
                .collect();
            ctx.from_poly(&QPoly::new(coeffs))
        })
        .collect();
    Ok(ReturnModule {
        context: ctx.clone(),
        basis_int,
        denominator: denom,
        basis_elements,
        generator_count,
        window: (0.0, 0.0),
    })
}

impl ReturnModule {
    pub fn rank(&self) -> usize {
        self.basis_int.len()
    }

    /// Express a rational coefficient vector in the HNF basis; returns the
    /// integer coordinates when they exist.
    fn integer_coordinates(&self, target: &[Rational]) -> Option<Vec<BigInt>> {
        let denom = Rational::from_integer(self.denominator.clone());
        let mut t: Vec<Rational> = target.to_vec();
        let dim = t.len();
        let mut coords = vec![BigInt::zero(); self.basis_int.len()];
        for (i, row) in self.basis_int.iter().enumerate() {
            let pivot_col = row.iter().position(|x| !x.is_zero())?;
            let pivot = Rational::from_integer(row[pivot_col].clone()) / &denom;
            let y = &t[pivot_col] / &pivot;
            if !y.denom().is_one() {
                return None;
            }
            coords[i] = y.to_integer();
            let y_rat = Rational::from_integer(coords[i].clone());
            for c in 0..dim {
                let sub = &y_rat * &(Rational::from_integer(row[c].clone()) / &denom);
                t[c] -= sub;
            }
        }
        t.iter().all(Zero::is_zero).then_some(coords)
    }

    /// True if every basis element of `other` lies in this module.
    pub fn contains(&self, other: &ReturnModule) -> bool {
        other.basis_elements.iter().all(|e| {
            let mut coeffs = e.coeffs();
            coeffs.resize(self.context.degree(), Rational::zero());
            self.integer_coordinates(&coeffs).is_some()
        })
    }
}

/// Certificate that β is an algebraic integer: the integer matrix `A` of
/// the β-action on the module basis, its monic integer characteristic
/// polynomial, and an exact verification that it vanishes at β.
#[derive(Debug, Clone)]
pub struct IntegerCertificate {
    pub matrix: Vec<Vec<BigInt>>,
    pub poly: Vec<BigInt>,
    pub monic: bool,
    pub verified_zero: bool,
    pub rank: usize,
    pub window: (f64, f64),
    pub generator_count: usize,
}

pub fn certify_algebraic_integer(
    g: &GeomSubstitution,
    module: &ReturnModule,
) -> Result<IntegerCertificate, AlgebraError> {
    let ctx = &module.context;
    let beta = ctx.beta();
    let k = module.rank();
    let dim = ctx.degree();
    let mut matrix: Vec<Vec<BigInt>> = Vec::with_capacity(k);
    for (i, v) in module.basis_elements.iter().enumerate() {
        let image = beta.try_mul(v)?;
        let mut coeffs = image.coeffs();
        coeffs.resize(dim, Rational::zero());
        let coords = module
            .integer_coordinates(&coeffs)
            .ok_or(AlgebraError::ModuleNotInvariant { basis_index: i })?;
        matrix.push(coords);
    }
    // characteristic polynomial of the integer matrix, exactly
    let rational: Vec<Vec<Rational>> = matrix
        .iter()
        .map(|row| row.iter().map(|n| Rational::from_integer(n.clone())).collect())
        .collect();
    let poly = crate::spectral::char_poly_of_rational_matrix(&rational);
    let monic = poly.is_monic();
    let int_coeffs: Vec<BigInt> = poly
        .coeffs()
        .iter()
        .map(|q| {
            debug_assert!(q.denom().is_one(), "char poly of an integer matrix is integral");
            q.to_integer()
        })
        .collect();
    let value = ctx.from_poly(&poly);
    let verified_zero = value.is_zero_value();
    if !verified_zero {
        return Err(AlgebraError::VerificationFailed);
    }
    let _ = g;
    Ok(IntegerCertificate {
        matrix,
        poly: int_coeffs,
        monic,
        verified_zero,
        rank: k,
        window: module.window,
        generator_count: module.generator_count,
    })
}

impl IntegerCertificate {
    /// The certificate polynomial as an exact rational-coefficient
    /// polynomial (monic with integer coefficients).
    pub fn poly_qpoly(&self) -> QPoly {
        QPoly::new(
            self.poly
                .iter()
                .map(|n| Rational::from_integer(n.clone()))
                .collect(),
        )
    }

    pub fn to_json(&self, module: &ReturnModule) -> Value {
        json!({
            "rank": self.rank,
            "window": [self.window.0, self.window.1],
            "generators": self.generator_count,
            "basis": module
                .basis_elements
                .iter()
                .map(|e| e.coeffs().iter().map(|q| q.to_string()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "matrix": self
                .matrix
                .iter()
                .map(|row| row.iter().map(|n| n.to_string()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "poly": self.poly.iter().map(|n| n.to_string()).collect::<Vec<_>>(),
            "monic": self.monic,
            "verified_zero": self.verified_zero,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tests::geom_of;
    use crate::geometry::{fixed_point_seed, generate_tiling};
    use crate::num::rat_int;

    const EX11: &str = "alphabet a b c; a -> [a:1/2] b a; b -> c [a:1/2]; c -> b [a:1/2];";
    const EX52_HALF: &str = "alphabet a b c d;
        a -> [a:1/2] b c a; b -> b c; c -> d [a:1/2]; d -> [a:1/2] b c [a:1/2];";

    #[test]
    fn hnf_of_simple_lattice() {
        let rows = vec![
            vec![BigInt::from(4), BigInt::from(0)],
            vec![BigInt::from(6), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(5)],
        ];
        let h = hermite_normal_form(rows);
        assert_eq!(h.len(), 2);
        assert_eq!(h[0], vec![BigInt::from(2), BigInt::from(0)]);
        assert_eq!(h[1], vec![BigInt::from(0), BigInt::from(5)]);
    }

    #[test]
    fn hnf_handles_negative_and_dependent_rows() {
        let rows = vec![
            vec![BigInt::from(-3), BigInt::from(3)],
            vec![BigInt::from(6), BigInt::from(-6)],
        ];
        let h = hermite_normal_form(rows);
        assert_eq!(h.len(), 1);
        assert_eq!(h[0], vec![BigInt::from(3), BigInt::from(-3)]);
    }

    #[test]
    fn integer_positions_give_rank_one_module() {
        let (_, g) = geom_of(EX11);
        let seed = fixed_point_seed(&g, 6).unwrap();
        let tiling = generate_tiling(&g, &seed, &rat_int(20)).unwrap();
        let module = return_module(&g, &tiling).unwrap();
        assert_eq!(module.rank(), 1);
        // all positions are integers, and same-label distances are in fact
        // multiples of 3 (letter a occupies residue 1 mod 3 throughout)
        let ctx = &module.context;
        assert!(module.basis_elements[0]
            .try_sub(&ctx.from_int(3))
            .unwrap()
            .is_zero_value());
        let cert = certify_algebraic_integer(&g, &module).unwrap();
        assert_eq!(cert.matrix, vec![vec![BigInt::from(2)]]);
        assert_eq!(cert.poly, vec![BigInt::from(-2), BigInt::from(1)]); // x - 2
        assert!(cert.monic && cert.verified_zero);
    }

    #[test]
    fn single_tile_patch_has_no_return_vectors() {
        let (_, g) = geom_of(EX11);
        let p = g.proto(0);
        assert!(matches!(return_module(&g, &p), Err(AlgebraError::EmptyModule)));
    }

    #[test]
    fn float_mode_is_unsupported() {
        let (_, g) = geom_of(
            "alphabet a b c; a -> [a:0.5] b a; b -> c [a:0.5]; c -> b [a:0.5];",
        );
        let p = g.proto(0);
        assert!(matches!(
            return_module(&g, &p),
            Err(AlgebraError::FloatModeUnsupported)
        ));
    }

    #[test]
    fn silver_mean_variant_certifies() {
        let (_, g) = geom_of(EX52_HALF);
        let seed = fixed_point_seed(&g, 6).unwrap();
        let tiling = generate_tiling(&g, &seed, &rat_int(30)).unwrap();
        let module = return_module(&g, &tiling).unwrap();
        assert_eq!(module.rank(), 2, "positions span a rank-2 module");
        let cert = certify_algebraic_integer(&g, &module).unwrap();
        assert!(cert.monic && cert.verified_zero);
        // the certificate polynomial is divisible by x² - 2x - 1
        let poly = cert.poly_qpoly();
        let (_, rem) = poly.div_rem(&QPoly::from_ints(&[-1, -2, 1]));
        assert!(rem.is_zero(), "poly {poly:?} not divisible by x²-2x-1");
    }

    #[test]
    fn certificate_stable_under_window_doubling() {
        let (_, g) = geom_of(EX52_HALF);
        let seed = fixed_point_seed(&g, 6).unwrap();
        let small = generate_tiling(&g, &seed, &rat_int(30)).unwrap();
        let large = generate_tiling(&g, &seed, &rat_int(60)).unwrap();
        let m_small = return_module(&g, &small).unwrap();
        let m_large = return_module(&g, &large).unwrap();
        assert!(m_large.contains(&m_small));
        let c_small = certify_algebraic_integer(&g, &m_small).unwrap();
        let c_large = certify_algebraic_integer(&g, &m_large).unwrap();
        assert_eq!(c_small.poly, c_large.poly);
    }

    #[test]
    fn missing_generator_breaks_invariance() {
        let (_, g) = geom_of(EX52_HALF);
        let ctx = g.context.as_ref().unwrap();
        // ℤ·1 alone is not β-invariant since β = 1 + √2 is irrational
        let module = module_from_elements(ctx, &[ctx.one()]).unwrap();
        assert!(matches!(
            certify_algebraic_integer(&g, &module),
            Err(AlgebraError::ModuleNotInvariant { basis_index: 0 })
        ));
    }

    #[test]
    fn certificate_json_is_complete() {
        let (_, g) = geom_of(EX11);
        let seed = fixed_point_seed(&g, 6).unwrap();
        let tiling = generate_tiling(&g, &seed, &rat_int(20)).unwrap();
        let module = return_module(&g, &tiling).unwrap();
        let cert = certify_algebraic_integer(&g, &module).unwrap();
        let v = cert.to_json(&module);
        assert_eq!(v["poly"][1], "1");
        assert_eq!(v["monic"], true);
        assert!(v["basis"].as_array().unwrap().len() == 1);
    }
}
