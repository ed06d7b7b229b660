//! Exact arithmetic kernel: rationals, polynomials over the rationals,
//! Sturm-sequence root isolation, and elements of a real algebraic number
//! field presented as a quotient ring with dynamic splitting.

mod field;
mod poly;
pub mod scalar;
mod sturm;

pub use field::{FieldContext, FieldElement, NumError};
pub use poly::QPoly;
pub use scalar::{Mode, Scalar};
pub use sturm::{isolate_largest_positive_root, sturm_count};

use num_bigint::BigInt;
use num_rational::BigRational;

/// Exact rational number, always stored reduced with a positive denominator.
pub type Rational = BigRational;

/// Shorthand for an integer rational.
pub fn rat_int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Shorthand for `p/q`.
pub fn rat(p: i64, q: i64) -> Rational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Parse "3", "-3/4" or a plain decimal like "0.25" into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d == BigInt::from(0) {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int_part.trim_start().starts_with('-');
        let int: BigInt = if int_part == "-" || int_part.is_empty() {
            BigInt::from(0)
        } else {
            int_part.parse().ok()?
        };
        let scale = BigInt::from(10).pow(frac_part.len() as u32);
        let frac: BigInt = frac_part.parse().ok()?;
        let signed_frac = if negative { -frac } else { frac };
        return Some(BigRational::new(int * &scale + signed_frac, scale));
    }
    let n: BigInt = s.parse().ok()?;
    Some(BigRational::from_integer(n))
}

/// Render a positive rational with `digits` significant decimal digits.
pub fn decimal_digits(q: &Rational, digits: usize) -> String {
    use num_traits::{Signed, Zero};
    if q.is_zero() {
        return "0".to_string();
    }
    let sign = if q.is_negative() { "-" } else { "" };
    let q = q.abs();
    let int = q.to_integer();
    let int_str = int.to_string();
    let int_len = if int == BigInt::from(0) { 0 } else { int_str.len() };
    let frac_digits = digits.saturating_sub(int_len).max(1);
    let scale = BigInt::from(10).pow(frac_digits as u32);
    let scaled = (&q * BigRational::from_integer(scale.clone())).to_integer();
    let scaled_str = scaled.to_string();
    let (ip, fp) = if scaled_str.len() > frac_digits {
        let split = scaled_str.len() - frac_digits;
        (scaled_str[..split].to_string(), scaled_str[split..].to_string())
    } else {
        ("0".to_string(), format!("{:0>width$}", scaled_str, width = frac_digits))
    };
    format!("{sign}{ip}.{fp}")
}
