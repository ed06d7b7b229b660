//! Session arithmetic mode and the scalar type shared by the geometric
//! modules: an exact element of ℚ(β), or a plain `f64` in float mode.

use std::cmp::Ordering;
use std::fmt;

use super::field::{FieldElement, NumError};
use super::poly::rational_to_f64;
use super::Rational;

/// Arithmetic mode, fixed per session at parse time. Rule weights written
/// as exact rationals keep the whole pipeline exact; decimal literals and
/// named parameters switch the session to float arithmetic with an
/// epsilon-tolerant comparison discipline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => write!(f, "exact"),
            Mode::Float => write!(f, "float"),
        }
    }
}

/// Default comparison tolerance in float mode.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// A number in the session's arithmetic: exact or floating-point.
/// Mixing the two variants is a programming error and panics.
#[derive(Clone)]
pub enum Scalar {
    Exact(FieldElement),
    Float(f64),
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(e) => write!(f, "Scalar({} exact)", e.to_f64()),
            Scalar::Float(v) => write!(f, "Scalar({v})"),
        }
    }
}

impl Scalar {
    pub fn from_rational_f64(q: &Rational) -> f64 {
        rational_to_f64(q)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(e) => e.to_f64(),
            Scalar::Float(v) => *v,
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                Scalar::Exact(a.try_add(b).expect("same context"))
            }
            (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a + b),
            _ => panic!("mixed exact/float scalars"),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                Scalar::Exact(a.try_sub(b).expect("same context"))
            }
            (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a - b),
            _ => panic!("mixed exact/float scalars"),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                Scalar::Exact(a.try_mul(b).expect("same context"))
            }
            (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a * b),
            _ => panic!("mixed exact/float scalars"),
        }
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar, NumError> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a.try_div(b)?)),
            (Scalar::Float(a), Scalar::Float(b)) => {
                if b.abs() == 0.0 {
                    Err(NumError::DivisionByZero)
                } else {
                    Ok(Scalar::Float(a / b))
                }
            }
            _ => panic!("mixed exact/float scalars"),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.neg()),
            Scalar::Float(v) => Scalar::Float(-v),
        }
    }

    pub fn scale_rational(&self, q: &Rational) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.scale(q)),
            Scalar::Float(v) => Scalar::Float(v * rational_to_f64(q)),
        }
    }

    /// Exact sign for exact scalars; float sign without tolerance.
    pub fn sign(&self) -> i8 {
        match self {
            Scalar::Exact(a) => a.sign(),
            Scalar::Float(v) => {
                if *v > 0.0 {
                    1
                } else if *v < 0.0 {
                    -1
                } else {
                    0
                }
            }
        }
    }

    /// Total order by real value (exact comparison in exact mode).
    pub fn cmp_value(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp_value(b),
            (Scalar::Float(a), Scalar::Float(b)) => {
                a.partial_cmp(b).expect("NaN in float scalar")
            }
            _ => panic!("mixed exact/float scalars"),
        }
    }

    /// Equality up to `eps` in float mode, exact equality in exact mode.
    pub fn approx_eq(&self, other: &Scalar, eps: f64) -> bool {
        match (self, other) {
            (Scalar::Exact(_), Scalar::Exact(_)) => {
                self.cmp_value(other) == Ordering::Equal
            }
            (Scalar::Float(a), Scalar::Float(b)) => (a - b).abs() <= eps,
            _ => panic!("mixed exact/float scalars"),
        }
    }

    pub fn is_zero_value(&self) -> bool {
        match self {
            Scalar::Exact(a) => a.is_zero_value(),
            Scalar::Float(v) => *v == 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::field::FieldContext;
    use super::super::poly::QPoly;
    use super::super::rat_int;
    use super::*;

    #[test]
    fn exact_scalar_ops() {
        let ctx = FieldContext::for_dominant_root(&QPoly::from_ints(&[-1, -2, 1])).unwrap();
        let b = Scalar::Exact(ctx.beta());
        let one = Scalar::Exact(ctx.one());
        let s = b.add(&one);
        assert!((s.to_f64() - (2.0 + 2.0_f64.sqrt())).abs() < 1e-12);
        assert_eq!(s.sub(&s).sign(), 0);
    }

    #[test]
    fn float_scalar_ops() {
        let a = Scalar::Float(0.5);
        let b = Scalar::Float(0.25);
        assert_eq!(a.add(&b).to_f64(), 0.75);
        assert!(a.approx_eq(&Scalar::Float(0.5 + 1e-12), 1e-9));
        assert!(!a.approx_eq(&b, 1e-9));
    }

    #[test]
    fn scale_by_rational() {
        let a = Scalar::Float(0.5);
        assert_eq!(a.scale_rational(&rat_int(4)).to_f64(), 2.0);
    }
}
