//! Dense univariate polynomials over the rationals.

use num_traits::{One, Zero};
use std::fmt;

use super::Rational;

/// Polynomial with rational coefficients, `coeffs[i]` the coefficient of `x^i`.
/// The zero polynomial is the empty coefficient vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QPoly {
    coeffs: Vec<Rational>,
}

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("{c}*x"),
                _ => format!("{c}*x^{i}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn zero() -> Self {
        QPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        QPoly::new(vec![Rational::one()])
    }

    pub fn x() -> Self {
        QPoly::new(vec![Rational::zero(), Rational::one()])
    }

    pub fn constant(c: Rational) -> Self {
        QPoly::new(vec![c])
    }

    /// Build from integer coefficients, constant term first.
    pub fn from_ints(coeffs: &[i64]) -> Self {
        QPoly::new(coeffs.iter().map(|&c| super::rat_int(c)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports degree 0 here, guard with `is_zero`.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_one()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Evaluate on an interval `[lo, hi]` with exact interval arithmetic,
    /// returning an interval containing `p([lo, hi])`.
    pub fn eval_interval(&self, lo: &Rational, hi: &Rational) -> (Rational, Rational) {
        let mut acc_lo = Rational::zero();
        let mut acc_hi = Rational::zero();
        for c in self.coeffs.iter().rev() {
            // [acc_lo, acc_hi] * [lo, hi] + c
            let candidates = [
                &acc_lo * lo,
                &acc_lo * hi,
                &acc_hi * lo,
                &acc_hi * hi,
            ];
            let mut new_lo = candidates[0].clone();
            let mut new_hi = candidates[0].clone();
            for cand in &candidates[1..] {
                if cand < &new_lo {
                    new_lo = cand.clone();
                }
                if cand > &new_hi {
                    new_hi = cand.clone();
                }
            }
            acc_lo = new_lo + c;
            acc_hi = new_hi + c;
        }
        (acc_lo, acc_hi)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + rational_to_f64(c);
        }
        acc
    }

    pub fn derivative(&self) -> QPoly {
        if self.coeffs.len() <= 1 {
            return QPoly::zero();
        }
        QPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer(i.into()))
                .collect(),
        )
    }

    pub fn neg(&self) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Rational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        QPoly::new(out)
    }

    pub fn sub(&self, other: &QPoly) -> QPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }

    pub fn scale(&self, c: &Rational) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Euclidean division: returns `(quotient, remainder)` with
    /// `self = q * divisor + r`, `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &QPoly) -> (QPoly, QPoly) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let dlead = divisor.leading();
        let dn = divisor.coeffs.len();
        let mut rem = self.coeffs.clone();
        if rem.len() < dn {
            return (QPoly::zero(), self.clone());
        }
        let mut quot = vec![Rational::zero(); rem.len() - dn + 1];
        for k in (0..quot.len()).rev() {
            let coef = &rem[k + dn - 1] / &dlead;
            if !coef.is_zero() {
                for (j, d) in divisor.coeffs.iter().enumerate() {
                    let val = &coef * d;
                    rem[k + j] -= val;
                }
            }
            quot[k] = coef;
        }
        (QPoly::new(quot), QPoly::new(rem))
    }

    /// Monic gcd via the Euclidean algorithm.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.make_monic()
        }
    }

    pub fn make_monic(&self) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        let lead = self.leading();
        self.scale(&(Rational::one() / lead))
    }

    /// Square-free part `p / gcd(p, p')`, made monic.
    pub fn squarefree_part(&self) -> QPoly {
        if self.is_zero() || self.degree() == 0 {
            return self.make_monic();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == 0 {
            return self.make_monic();
        }
        let (q, r) = self.div_rem(&g);
        debug_assert!(r.is_zero());
        q.make_monic()
    }

    pub fn is_squarefree(&self) -> bool {
        self.is_zero() || self.degree() == 0 || self.gcd(&self.derivative()).degree() == 0
    }

    /// Cauchy root bound: all real roots lie within `[-B, B]`.
    pub fn cauchy_bound(&self) -> Rational {
        use num_traits::Signed;
        if self.is_zero() || self.degree() == 0 {
            return Rational::one();
        }
        let lead = self.leading().abs();
        let mut max = Rational::zero();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let v = c.abs() / &lead;
            if v > max {
                max = v;
            }
        }
        Rational::one() + max
    }

    /// Extended Euclid: returns `(g, s, t)` monic `g = gcd(a, b)` with
    /// `s*a + t*b = g`.
    pub fn extended_gcd(&self, other: &QPoly) -> (QPoly, QPoly, QPoly) {
        let mut r0 = self.clone();
        let mut r1 = other.clone();
        let mut s0 = QPoly::one();
        let mut s1 = QPoly::zero();
        let mut t0 = QPoly::zero();
        let mut t1 = QPoly::one();
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let s = s0.sub(&q.mul(&s1));
            let t = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
            t0 = t1;
            t1 = t;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let lead = r0.leading();
        let inv = Rational::one() / lead;
        (
            r0.scale(&inv),
            s0.scale(&inv),
            t0.scale(&inv),
        )
    }
}

pub(crate) fn rational_to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or_else(|| {
        // fall back through a scaled integer division for huge operands
        let n = q.numer().to_f64().unwrap_or(f64::MAX);
        let d = q.denom().to_f64().unwrap_or(f64::MAX);
        n / d
    })
}
