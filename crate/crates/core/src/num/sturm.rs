//! Sturm-sequence real root counting and isolation of the dominant
//! positive root of a rational polynomial.

use num_traits::{Signed, Zero};

use super::field::NumError;
use super::poly::QPoly;
use super::Rational;

/// Sturm chain of a square-free polynomial.
fn sturm_chain(p: &QPoly) -> Vec<QPoly> {
    let mut chain = vec![p.clone(), p.derivative()];
    loop {
        let n = chain.len();
        if chain[n - 1].is_zero() {
            chain.pop();
            break;
        }
        let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
        if r.is_zero() {
            break;
        }
        chain.push(r.neg());
    }
    chain
}

fn sign_changes(chain: &[QPoly], x: &Rational) -> usize {
    let mut count = 0;
    let mut prev = 0i8;
    for p in chain {
        let v = p.eval(x);
        let s = if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        };
        if s != 0 {
            if prev != 0 && s != prev {
                count += 1;
            }
            prev = s;
        }
    }
    count
}

/// Number of distinct real roots of square-free `p` in the half-open
/// interval `(lo, hi]`.
pub fn sturm_count(p: &QPoly, lo: &Rational, hi: &Rational) -> usize {
    let chain = sturm_chain(p);
    sign_changes(&chain, lo).saturating_sub(sign_changes(&chain, hi))
}

/// Target width for isolating intervals: 2^-64.
fn target_width() -> Rational {
    Rational::new(1.into(), num_bigint::BigInt::from(2).pow(64))
}

/// Isolate the largest positive real root of `p`.
///
/// Returns `(lo, hi)` with either `lo == hi` an exact rational root, or
/// `p(lo)·p(hi) < 0`, exactly one root of the square-free part of `p` in
/// `[lo, hi]`, and `hi - lo <= 2^-64`. Fails with `NoPositiveRoot` when `p`
/// has no root in `(0, ∞)`, and with `RootTieUnresolved` if two positive
/// roots cannot be separated at width 2^-256.
pub fn isolate_largest_positive_root(p: &QPoly) -> Result<(Rational, Rational), NumError> {
    let q = p.squarefree_part();
    if q.is_zero() || q.degree() == 0 {
        return Err(NumError::NoPositiveRoot);
    }
    if q.degree() == 1 {
        let root = -&q.coeffs()[0] / &q.coeffs()[1];
        if root.is_positive() {
            return Ok((root.clone(), root));
        }
        return Err(NumError::NoPositiveRoot);
    }
    let chain = sturm_chain(&q);
    let mut lo = Rational::zero();
    let mut hi = q.cauchy_bound();
    let total = sign_changes(&chain, &lo).saturating_sub(sign_changes(&chain, &hi));
    if total == 0 {
        return Err(NumError::NoPositiveRoot);
    }
    // Shrink (lo, hi] keeping the largest root, until exactly one root remains.
    let mut count = total;
    let hard_width = Rational::new(1.into(), num_bigint::BigInt::from(2).pow(256));
    while count > 1 {
        let mid = (&lo + &hi) / Rational::from_integer(2.into());
        if q.eval(&mid).is_zero() {
            // mid is itself a root; the ones we want are at or above mid
            let above = sign_changes(&chain, &mid).saturating_sub(sign_changes(&chain, &hi));
            if above > 0 {
                lo = mid;
                count = above;
            } else {
                return Ok((mid.clone(), mid));
            }
        } else {
            let upper = sign_changes(&chain, &mid).saturating_sub(sign_changes(&chain, &hi));
            if upper > 0 {
                lo = mid;
                count = upper;
            } else {
                hi = mid;
                count = sign_changes(&chain, &lo).saturating_sub(sign_changes(&chain, &hi));
            }
        }
        if &hi - &lo < hard_width {
            return Err(NumError::RootTieUnresolved);
        }
    }
    // Refine the isolating interval to the target width.
    let width = target_width();
    while &hi - &lo > width {
        let mid = (&lo + &hi) / Rational::from_integer(2.into());
        let v = q.eval(&mid);
        if v.is_zero() {
            return Ok((mid.clone(), mid));
        }
        if sign_changes(&chain, &mid).saturating_sub(sign_changes(&chain, &hi)) > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Endpoints may be roots of dropped factors of p, never of q itself.
    debug_assert!(q.eval(&lo).signum() != q.eval(&hi).signum());
    Ok((lo, hi))
}
