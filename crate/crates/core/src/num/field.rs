//! Elements of ℚ(β) presented as residues modulo a square-free polynomial
//! with a distinguished real root β, isolated by a rational interval.
//!
//! The modulus is only required to be square-free, not irreducible. A failed
//! inversion (the residue shares a factor with the modulus) dynamically
//! splits the context: the modulus is replaced by its factor that still
//! brackets β, all elements are lazily re-reduced, and the operation is
//! retried. Sign determination combines an exact gcd test with interval
//! refinement of the isolating interval and is exact: zero is only ever
//! reported from an exact all-zero-coefficients test.

use num_traits::{Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, RwLock};
use thiserror::Error;

use super::poly::{rational_to_f64, QPoly};
use super::sturm::{isolate_largest_positive_root, sturm_count};
use super::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumError {
    #[error("polynomial has no positive real root")]
    NoPositiveRoot,
    #[error("two positive roots could not be separated at width 2^-256")]
    RootTieUnresolved,
    #[error("division by zero element")]
    DivisionByZero,
    #[error("operands belong to different field contexts")]
    ContextMismatch,
    #[error("modulus is not square-free")]
    NotSquareFree,
    #[error("interval does not isolate a root of the modulus")]
    InvalidInterval,
}

struct CtxState {
    modulus: QPoly,
    lo: Rational,
    hi: Rational,
    generation: u64,
}

pub struct CtxShared {
    state: RwLock<CtxState>,
}

/// Shared handle to a number-field context. Cloning is cheap; all clones
/// observe the same dynamically split modulus.
#[derive(Clone)]
pub struct FieldContext {
    shared: Arc<CtxShared>,
}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let st = self.shared.state.read().unwrap();
        write!(
            f,
            "FieldContext(modulus: {:?}, interval: [{}, {}])",
            st.modulus, st.lo, st.hi
        )
    }
}

impl FieldContext {
    /// Context with the given square-free monic modulus and an interval
    /// `[lo, hi]` isolating exactly one real root. A degenerate interval
    /// `lo == hi` is allowed when that point is an exact rational root.
    pub fn new(modulus: QPoly, lo: Rational, hi: Rational) -> Result<Self, NumError> {
        let modulus = modulus.make_monic();
        if modulus.is_zero() || modulus.degree() == 0 {
            return Err(NumError::InvalidInterval);
        }
        if !modulus.is_squarefree() {
            return Err(NumError::NotSquareFree);
        }
        let (mut lo, mut hi) = (lo, hi);
        if lo == hi {
            if !modulus.eval(&lo).is_zero() {
                return Err(NumError::InvalidInterval);
            }
        } else {
            if lo > hi {
                return Err(NumError::InvalidInterval);
            }
            let a = modulus.eval(&lo);
            let b = modulus.eval(&hi);
            if a.is_zero() || b.is_zero() || a.is_positive() == b.is_positive() {
                return Err(NumError::InvalidInterval);
            }
            if sturm_count(&modulus, &lo, &hi) != 1 {
                return Err(NumError::InvalidInterval);
            }
            // snap to an exact rational root if one lies in the interval
            let candidate = simplest_rational_between(&lo, &hi);
            if modulus.eval(&candidate).is_zero() {
                lo = candidate.clone();
                hi = candidate;
            }
        }
        Ok(FieldContext {
            shared: Arc::new(CtxShared {
                state: RwLock::new(CtxState {
                    modulus,
                    lo,
                    hi,
                    generation: 0,
                }),
            }),
        })
    }

    /// Context for the largest positive real root of `p` (taken square-free).
    pub fn for_dominant_root(p: &QPoly) -> Result<Self, NumError> {
        let q = p.squarefree_part();
        let (lo, hi) = isolate_largest_positive_root(&q)?;
        FieldContext::new(q, lo, hi)
    }

    /// Degenerate context whose single value is the rational `c`.
    pub fn rational_point(c: Rational) -> Self {
        let modulus = QPoly::new(vec![-&c, Rational::from_integer(1.into())]);
        FieldContext::new(modulus, c.clone(), c).expect("linear modulus is always valid")
    }

    pub fn modulus(&self) -> QPoly {
        self.shared.state.read().unwrap().modulus.clone()
    }

    pub fn interval(&self) -> (Rational, Rational) {
        let st = self.shared.state.read().unwrap();
        (st.lo.clone(), st.hi.clone())
    }

    pub fn degree(&self) -> usize {
        self.shared.state.read().unwrap().modulus.degree()
    }

    pub fn same_context(&self, other: &FieldContext) -> bool {
        Arc::ptr_eq(&self.shared, &other.shared)
    }

    /// The distinguished root β as an element.
    pub fn beta(&self) -> FieldElement {
        self.from_poly(&QPoly::x())
    }

    pub fn from_rational(&self, q: Rational) -> FieldElement {
        self.from_poly(&QPoly::constant(q))
    }

    pub fn from_int(&self, n: i64) -> FieldElement {
        self.from_rational(Rational::from_integer(n.into()))
    }

    pub fn zero(&self) -> FieldElement {
        self.from_rational(Rational::zero())
    }

    pub fn one(&self) -> FieldElement {
        self.from_int(1)
    }

    /// Residue of an arbitrary rational polynomial.
    pub fn from_poly(&self, p: &QPoly) -> FieldElement {
        let st = self.shared.state.read().unwrap();
        let (_, r) = p.div_rem(&st.modulus);
        FieldElement {
            ctx: self.clone(),
            coeffs: r.coeffs().to_vec(),
            generation: st.generation,
        }
    }

    /// Refine the isolating interval by bisection until its width is at
    /// most `width`. Returns the refined endpoints.
    pub fn refine_interval(&self, width: &Rational) -> (Rational, Rational) {
        let mut st = self.shared.state.write().unwrap();
        let two = Rational::from_integer(2.into());
        while &(&st.hi - &st.lo) > width {
            let mid = (&st.lo + &st.hi) / &two;
            let v = st.modulus.eval(&mid);
            if v.is_zero() {
                st.lo = mid.clone();
                st.hi = mid;
                break;
            }
            let at_lo = st.modulus.eval(&st.lo);
            if at_lo.is_positive() != v.is_positive() {
                st.hi = mid;
            } else {
                st.lo = mid;
            }
        }
        (st.lo.clone(), st.hi.clone())
    }

    /// β rendered with `digits` significant decimal digits.
    pub fn beta_decimal(&self, digits: usize) -> String {
        let width = Rational::new(
            1.into(),
            num_bigint::BigInt::from(10).pow(digits as u32 + 2),
        );
        let (lo, hi) = self.refine_interval(&width);
        let mid = (lo + hi) / Rational::from_integer(2.into());
        super::decimal_digits(&mid, digits)
    }

    /// Replace the modulus by its divisor that still brackets β, triggered
    /// when `trigger` shares a nontrivial factor with the modulus. Returns
    /// true if a split happened.
    fn split_on(&self, trigger: &QPoly) -> bool {
        let mut st = self.shared.state.write().unwrap();
        let (_, reduced) = trigger.div_rem(&st.modulus);
        if reduced.is_zero() {
            return false;
        }
        let g = reduced.gcd(&st.modulus);
        if g.degree() == 0 {
            return false;
        }
        let (h, rem) = st.modulus.div_rem(&g);
        debug_assert!(rem.is_zero());
        let g_has_root = if st.lo == st.hi {
            g.eval(&st.lo).is_zero()
        } else {
            g.eval(&st.lo).is_positive() != g.eval(&st.hi).is_positive()
        };
        st.modulus = if g_has_root { g } else { h.make_monic() };
        st.generation += 1;
        true
    }
}

/// An element of ℚ(β): a rational-coefficient residue of degree less than
/// the context modulus. Values are immutable; re-reduction after context
/// splits happens lazily and does not change the represented real number.
#[derive(Clone)]
pub struct FieldElement {
    ctx: FieldContext,
    coeffs: Vec<Rational>,
    generation: u64,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement({:?} ~ {})", self.as_poly(), self.to_f64())
    }
}

impl FieldElement {
    pub fn context(&self) -> &FieldContext {
        &self.ctx
    }

    fn as_poly(&self) -> QPoly {
        QPoly::new(self.coeffs.clone())
    }

    /// Coefficients reduced modulo the current modulus, constant term first,
    /// padded to the context degree.
    pub fn coeffs(&self) -> Vec<Rational> {
        let st = self.ctx.shared.state.read().unwrap();
        let (_, r) = self.as_poly().div_rem(&st.modulus);
        let mut out = r.coeffs().to_vec();
        out.resize(st.modulus.degree(), Rational::zero());
        out
    }

    fn canonical_poly(&self) -> QPoly {
        let st = self.ctx.shared.state.read().unwrap();
        if self.generation == st.generation {
            return self.as_poly();
        }
        let (_, r) = self.as_poly().div_rem(&st.modulus);
        r
    }

    /// Exact zero test: reduce modulo the current modulus, then split off
    /// any factor of the modulus dividing the residue, and test for the
    /// all-zero coefficient vector.
    pub fn is_zero_value(&self) -> bool {
        let p = self.canonical_poly();
        if p.is_zero() {
            return true;
        }
        if self.ctx.split_on(&p) {
            return self.canonical_poly().is_zero();
        }
        false
    }

    fn checked_pair(&self, other: &FieldElement) -> Result<(), NumError> {
        if self.ctx.same_context(&other.ctx) {
            Ok(())
        } else {
            Err(NumError::ContextMismatch)
        }
    }

    pub fn try_add(&self, other: &FieldElement) -> Result<FieldElement, NumError> {
        self.checked_pair(other)?;
        Ok(self.ctx.from_poly(&self.as_poly().add(&other.as_poly())))
    }

    pub fn try_sub(&self, other: &FieldElement) -> Result<FieldElement, NumError> {
        self.checked_pair(other)?;
        Ok(self.ctx.from_poly(&self.as_poly().sub(&other.as_poly())))
    }

    pub fn try_mul(&self, other: &FieldElement) -> Result<FieldElement, NumError> {
        self.checked_pair(other)?;
        Ok(self.ctx.from_poly(&self.as_poly().mul(&other.as_poly())))
    }

    /// Multiplicative inverse. A residue sharing a factor with the modulus
    /// first splits the context and retries; inverting a value that is zero
    /// at β fails with `DivisionByZero`.
    pub fn inv(&self) -> Result<FieldElement, NumError> {
        loop {
            let p = self.canonical_poly();
            if p.is_zero() {
                return Err(NumError::DivisionByZero);
            }
            let modulus = self.ctx.modulus();
            let (g, s, _) = p.extended_gcd(&modulus);
            if g.degree() == 0 {
                return Ok(self.ctx.from_poly(&s));
            }
            // zero divisor: split and retry against the surviving factor
            if !self.ctx.split_on(&p) {
                // the residue became zero under a concurrent split
                return Err(NumError::DivisionByZero);
            }
            if self.canonical_poly().is_zero() {
                return Err(NumError::DivisionByZero);
            }
        }
    }

    pub fn try_div(&self, other: &FieldElement) -> Result<FieldElement, NumError> {
        self.checked_pair(other)?;
        self.try_mul(&other.inv()?)
    }

    pub fn neg(&self) -> FieldElement {
        self.ctx.from_poly(&self.as_poly().neg())
    }

    pub fn scale(&self, q: &Rational) -> FieldElement {
        self.ctx.from_poly(&self.as_poly().scale(q))
    }

    pub fn pow(&self, n: u32) -> FieldElement {
        let mut acc = self.ctx.one();
        for _ in 0..n {
            acc = acc.try_mul(self).expect("same context");
        }
        acc
    }

    /// Sign of the real number this element represents: -1, 0 or +1.
    ///
    /// Zero is decided purely by the exact coefficient test (after context
    /// splits make the element canonical); a nonzero value is signed by
    /// exact interval evaluation with bisection refinement of the isolating
    /// interval, which terminates because the residue is then coprime to
    /// the modulus.
    pub fn sign(&self) -> i8 {
        if self.is_zero_value() {
            return 0;
        }
        let p = self.canonical_poly();
        // ensure the residue shares no root with the modulus
        let modulus = self.ctx.modulus();
        let g = p.gcd(&modulus);
        if g.degree() >= 1 {
            self.ctx.split_on(&p);
            return self.sign();
        }
        let (mut lo, mut hi) = self.ctx.interval();
        if lo == hi {
            let v = p.eval(&lo);
            return sign_of_rational(&v);
        }
        let modulus = self.ctx.modulus();
        let two = Rational::from_integer(2.into());
        for _ in 0..256 {
            let (vlo, vhi) = p.eval_interval(&lo, &hi);
            if vlo.is_positive() {
                return 1;
            }
            if vhi.is_negative() {
                return -1;
            }
            if vlo.is_zero() && vhi.is_zero() {
                unreachable!("exact zero must be caught by the coefficient test");
            }
            let mid = (&lo + &hi) / &two;
            let vm = modulus.eval(&mid);
            if vm.is_zero() {
                // β is exactly this rational point
                return sign_of_rational(&p.eval(&mid));
            }
            if modulus.eval(&lo).is_positive() != vm.is_positive() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        unreachable!("interval refinement budget exhausted for a residue coprime to the modulus")
    }

    /// Total order by the represented real value.
    pub fn cmp_value(&self, other: &FieldElement) -> Ordering {
        match self.try_sub(other).expect("same context").sign() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }

    pub fn is_positive_value(&self) -> bool {
        self.sign() > 0
    }

    /// Approximate value: evaluation at the midpoint of the isolating
    /// interval (refined to width 2^-64 at construction time).
    pub fn to_f64(&self) -> f64 {
        let (lo, hi) = self.ctx.interval();
        let mid = (lo + hi) / Rational::from_integer(2.into());
        let p = self.canonical_poly();
        let mut acc = Rational::zero();
        for c in p.coeffs().iter().rev() {
            acc = acc * &mid + c;
        }
        rational_to_f64(&acc)
    }

    /// Exact rational value, if the element is a constant residue.
    pub fn as_rational(&self) -> Option<Rational> {
        let p = self.canonical_poly();
        if p.is_zero() {
            return Some(Rational::zero());
        }
        if p.degree() == 0 {
            return Some(p.coeffs()[0].clone());
        }
        None
    }
}

/// The rational with smallest denominator (then smallest numerator) in the
/// closed interval `[lo, hi]`, by Stern-Brocot descent. A rational root of
/// the modulus inside a narrow isolating interval is always this number
/// once the interval is narrower than `1/q²`.
fn simplest_rational_between(lo: &Rational, hi: &Rational) -> Rational {
    use num_traits::One;
    let c = lo.ceil();
    if &c <= hi {
        return c;
    }
    let f = lo.floor();
    let one = Rational::one();
    // invert the fractional parts; both are in (0, 1) here
    let inner = simplest_rational_between(&(&one / &(hi - &f)), &(&one / &(lo - &f)));
    f + one / inner
}

fn sign_of_rational(v: &Rational) -> i8 {
    if v.is_zero() {
        0
    } else if v.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::super::{rat, rat_int};
    use super::*;

    fn silver_ctx() -> FieldContext {
        // x^2 - 2x - 1, β = 1 + sqrt(2)
        FieldContext::for_dominant_root(&QPoly::from_ints(&[-1, -2, 1])).unwrap()
    }

    #[test]
    fn beta_squared_reduces() {
        let ctx = silver_ctx();
        let b = ctx.beta();
        let b2 = b.try_mul(&b).unwrap();
        // β² = 2β + 1
        assert_eq!(b2.coeffs(), vec![rat_int(1), rat_int(2)]);
    }

    #[test]
    fn rational_context_arithmetic() {
        let ctx = FieldContext::rational_point(rat_int(2));
        let a = ctx.from_rational(rat(3, 2));
        let b = ctx.from_rational(rat(1, 2));
        let s = a.try_add(&b).unwrap();
        assert_eq!(s.as_rational().unwrap(), rat_int(2));
        assert_eq!(ctx.beta().as_rational().unwrap(), rat_int(2));
    }

    #[test]
    fn inversion_splits_reducible_modulus() {
        // (x-2)(x^2+1) is square-free with single real root 2
        let m = QPoly::from_ints(&[-2, 1]).mul(&QPoly::from_ints(&[1, 0, 1]));
        let ctx = FieldContext::new(m, rat(19, 10), rat(21, 10)).unwrap();
        // β² + 1 is a zero divisor: gcd((x²+1), m) = x²+1, split to x - 2
        let e = ctx.beta().pow(2).try_add(&ctx.one()).unwrap();
        let inv = e.inv().unwrap();
        assert_eq!(ctx.degree(), 1);
        assert_eq!(inv.as_rational().unwrap(), rat(1, 5));
    }

    #[test]
    fn sign_of_examples() {
        let ctx = silver_ctx();
        assert_eq!(ctx.zero().sign(), 0);
        // β - 2 > 0 since β = 1 + sqrt(2) ≈ 2.414
        let e = ctx.beta().try_sub(&ctx.from_int(2)).unwrap();
        assert_eq!(e.sign(), 1);
        // the modulus itself is the zero element
        let m = ctx
            .beta()
            .pow(2)
            .try_sub(&ctx.beta().scale(&rat_int(2)))
            .unwrap()
            .try_sub(&ctx.one())
            .unwrap();
        assert_eq!(m.sign(), 0);
    }

    #[test]
    fn sign_zero_at_root_but_nonzero_residue() {
        // modulus (x-2)(x-1/2)(x²-2x-1), β = 1+sqrt(2); the residue x²-2x-1
        // is nonzero but vanishes at β: sign must be 0 via a context split.
        let m = QPoly::from_ints(&[-2, 1])
            .mul(&QPoly::new(vec![rat(-1, 2), rat_int(1)]))
            .mul(&QPoly::from_ints(&[-1, -2, 1]));
        let ctx = FieldContext::new(m, rat(24, 10), rat(25, 10)).unwrap();
        let e = ctx
            .beta()
            .pow(2)
            .try_sub(&ctx.beta().scale(&rat_int(2)))
            .unwrap()
            .try_sub(&ctx.one())
            .unwrap();
        assert_eq!(e.sign(), 0);
        assert!(e.is_zero_value());
    }

    #[test]
    fn context_mismatch_detected() {
        let a = silver_ctx().one();
        let b = silver_ctx().one();
        assert!(matches!(a.try_add(&b), Err(NumError::ContextMismatch)));
    }

    #[test]
    fn division_by_zero() {
        let ctx = silver_ctx();
        assert!(matches!(ctx.zero().inv(), Err(NumError::DivisionByZero)));
    }

    #[test]
    fn cmp_orders_by_value() {
        let ctx = silver_ctx();
        let b = ctx.beta(); // 2.414...
        let halves = ctx.from_rational(rat(5, 2)); // 2.5
        assert_eq!(b.cmp_value(&halves), Ordering::Less);
        assert_eq!(halves.cmp_value(&b), Ordering::Greater);
        assert_eq!(b.cmp_value(&b.clone()), Ordering::Equal);
    }

    #[test]
    fn decimal_rendering_of_beta() {
        let ctx = silver_ctx();
        let s = ctx.beta_decimal(20);
        assert!(s.starts_with("2.4142135623730950488"), "{s}");
    }

    #[test]
    fn values_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<FieldContext>();
        assert_send_sync::<FieldElement>();
        let ctx = silver_ctx();
        let b = ctx.beta();
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let b = b.clone();
                std::thread::spawn(move || b.pow(3).sign())
            })
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), 1);
        }
    }
}
