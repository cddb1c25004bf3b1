//! Scalar arithmetic: the ring/field abstraction shared by polynomials,
//! exact surds, floats and forward-mode duals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of a negative number")]
    NegativeRadicand,
    #[error("value not exactly representable: {0}")]
    NotRepresentable(String),
}

/// Commutative ring with a rational embedding.
pub trait Ring:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_rational(q: &Rational) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }

    fn from_ratio(p: i64, q: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(p), BigInt::from(q)))
    }

    fn scale(&self, q: &Rational) -> Self {
        self.clone() * Self::from_rational(q)
    }
}

/// A ring with division and square roots where they exist.
pub trait Field: Ring {
    /// True when arithmetic is exact and residuals can be tested against literal zero.
    const EXACT: bool;

    fn inv(&self) -> Result<Self, ArithError>;
    fn sqrt(&self) -> Result<Self, ArithError>;
    /// Nearest double-precision value.
    fn approx(&self) -> f64;

    /// Whether `self` and `other` live in a common number field, so that
    /// combining them is well defined.
    fn compatible(&self, _other: &Self) -> bool {
        true
    }

    fn div(&self, other: &Self) -> Result<Self, ArithError> {
        Ok(self.clone() * other.inv()?)
    }

    /// Exact textual form (rationals as `p/q`).
    fn exact_repr(&self) -> String;
}

pub fn rational(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// `p/q` string form (`p` alone when the denominator is one).
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid rational literal `{literal}`: {reason}")]
pub struct RationalParseError {
    pub literal: String,
    pub reason: &'static str,
}

/// Parse `p`, `-p`, `p/q` with decimal integers.
pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let err = |reason| RationalParseError { literal: text.to_string(), reason };
    let s = text.trim();
    if s.is_empty() {
        return Err(err("empty"));
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let parse_int = |t: &str, signed: bool| -> Result<BigInt, RationalParseError> {
        let digits = if signed { t.strip_prefix(['-', '+']).unwrap_or(t) } else { t };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("expected decimal integer"));
        }
        t.parse::<BigInt>().map_err(|_| err("expected decimal integer"))
    };
    let p = parse_int(num, true)?;
    let q = match den {
        Some(d) => parse_int(d, false)?,
        None => BigInt::one(),
    };
    if q.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(Rational::new(p, q))
}

/// Exact square root of a rational when it is a perfect square.
pub fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| Rational::new(n, d))
}

impl Ring for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
}

impl Ring for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn from_rational(q: &Rational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }
}

impl Field for f64 {
    const EXACT: bool = false;

    fn inv(&self) -> Result<Self, ArithError> {
        if *self == 0.0 {
            Err(ArithError::DivisionByZero)
        } else {
            Ok(1.0 / self)
        }
    }
    fn sqrt(&self) -> Result<Self, ArithError> {
        if *self < 0.0 {
            Err(ArithError::NegativeRadicand)
        } else {
            Ok(f64::sqrt(*self))
        }
    }
    fn approx(&self) -> f64 {
        *self
    }
    fn exact_repr(&self) -> String {
        format!("{self:e}")
    }
}

/// Element `rat + irr·√radicand` of a quadratic extension of the rationals.
///
/// Elements with `irr = 0` carry no radicand and combine with any other element.
/// Combining two elements with different radicands is a logic error and panics;
/// callers guard with [`Field::compatible`].
#[derive(Clone, Debug, PartialEq)]
pub struct Surd {
    rat: Rational,
    irr: Rational,
    radicand: Option<Arc<Rational>>,
}

impl Surd {
    pub fn rational(q: Rational) -> Self {
        Surd { rat: q, irr: <Rational as Zero>::zero(), radicand: None }
    }

    pub fn rational_part(&self) -> &Rational {
        &self.rat
    }

    pub fn irrational_part(&self) -> &Rational {
        &self.irr
    }

    pub fn radicand(&self) -> Option<&Rational> {
        self.radicand.as_deref()
    }

    /// The value as a plain rational, if it has no irrational part.
    pub fn as_rational(&self) -> Option<&Rational> {
        Zero::is_zero(&self.irr).then_some(&self.rat)
    }

    fn build(rat: Rational, irr: Rational, radicand: Option<Arc<Rational>>) -> Self {
        if Zero::is_zero(&irr) {
            Surd { rat, irr, radicand: None }
        } else {
            Surd { rat, irr, radicand }
        }
    }

    fn common(a: &Option<Arc<Rational>>, b: &Option<Arc<Rational>>) -> Option<Arc<Rational>> {
        match (a, b) {
            (Some(x), Some(y)) => {
                assert!(x == y, "mixed radicands {x} and {y}");
                Some(x.clone())
            }
            (Some(x), None) | (None, Some(x)) => Some(x.clone()),
            (None, None) => None,
        }
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(self, o: Surd) -> Surd {
        let r = Surd::common(&self.radicand, &o.radicand);
        Surd::build(self.rat + o.rat, self.irr + o.irr, r)
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, o: Surd) -> Surd {
        let r = Surd::common(&self.radicand, &o.radicand);
        Surd::build(self.rat - o.rat, self.irr - o.irr, r)
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd { rat: -self.rat, irr: -self.irr, radicand: self.radicand }
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, o: Surd) -> Surd {
        let r = Surd::common(&self.radicand, &o.radicand);
        let cross = match &r {
            Some(d) => &self.irr * &o.irr * d.as_ref(),
            None => <Rational as Zero>::zero(),
        };
        let rat = &self.rat * &o.rat + cross;
        let irr = &self.rat * &o.irr + &self.irr * &o.rat;
        Surd::build(rat, irr, r)
    }
}

impl Ring for Surd {
    fn zero() -> Self {
        Surd::rational(<Rational as Zero>::zero())
    }
    fn one() -> Self {
        Surd::rational(<Rational as One>::one())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.rat) && Zero::is_zero(&self.irr)
    }
    fn from_rational(q: &Rational) -> Self {
        Surd::rational(q.clone())
    }
    fn scale(&self, q: &Rational) -> Self {
        Surd::build(&self.rat * q, &self.irr * q, self.radicand.clone())
    }
}

impl Field for Surd {
    const EXACT: bool = true;

    fn inv(&self) -> Result<Self, ArithError> {
        match &self.radicand {
            None => {
                if Zero::is_zero(&self.rat) {
                    Err(ArithError::DivisionByZero)
                } else {
                    Ok(Surd::rational(self.rat.recip()))
                }
            }
            Some(d) => {
                let norm = &self.rat * &self.rat - &self.irr * &self.irr * d.as_ref();
                if Zero::is_zero(&norm) {
                    return Err(ArithError::DivisionByZero);
                }
                Ok(Surd::build(&self.rat / &norm, -(&self.irr / &norm), Some(d.clone())))
            }
        }
    }

    fn sqrt(&self) -> Result<Self, ArithError> {
        let q = self.as_rational().ok_or_else(|| {
            ArithError::NotRepresentable(format!("square root of {}", self.exact_repr()))
        })?;
        if q.is_negative() {
            return Err(ArithError::NegativeRadicand);
        }
        match rational_sqrt(q) {
            Some(r) => Ok(Surd::rational(r)),
            None => Ok(Surd {
                rat: <Rational as Zero>::zero(),
                irr: <Rational as One>::one(),
                radicand: Some(Arc::new(q.clone())),
            }),
        }
    }

    fn approx(&self) -> f64 {
        let base = self.rat.to_f64().unwrap_or(f64::NAN);
        match &self.radicand {
            None => base,
            Some(d) => base + self.irr.to_f64().unwrap_or(f64::NAN) * d.to_f64().unwrap_or(f64::NAN).sqrt(),
        }
    }

    fn compatible(&self, other: &Self) -> bool {
        match (&self.radicand, &other.radicand) {
            (Some(a), Some(b)) => a == b,
            _ => true,
        }
    }

    fn exact_repr(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.radicand {
            None => write!(f, "{}", format_rational(&self.rat)),
            Some(d) if Zero::is_zero(&self.rat) => {
                write!(f, "{}*sqrt({})", format_rational(&self.irr), format_rational(d))
            }
            Some(d) => write!(
                f,
                "{} + {}*sqrt({})",
                format_rational(&self.rat),
                format_rational(&self.irr),
                format_rational(d)
            ),
        }
    }
}

/// Forward-mode dual number carrying a value and its gradient in ℝ³.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<S> {
    pub value: S,
    pub grad: [S; 3],
}

impl<S: Ring> Dual<S> {
    pub fn constant(value: S) -> Self {
        Dual { value, grad: [S::zero(), S::zero(), S::zero()] }
    }

    /// The coordinate function `x_axis` evaluated at `value`.
    pub fn variable(value: S, axis: usize) -> Self {
        let mut grad = [S::zero(), S::zero(), S::zero()];
        grad[axis] = S::one();
        Dual { value, grad }
    }
}

impl<S: Ring> Add for Dual<S> {
    type Output = Dual<S>;
    fn add(self, o: Dual<S>) -> Dual<S> {
        let [a0, a1, a2] = self.grad;
        let [b0, b1, b2] = o.grad;
        Dual { value: self.value + o.value, grad: [a0 + b0, a1 + b1, a2 + b2] }
    }
}

impl<S: Ring> Sub for Dual<S> {
    type Output = Dual<S>;
    fn sub(self, o: Dual<S>) -> Dual<S> {
        let [a0, a1, a2] = self.grad;
        let [b0, b1, b2] = o.grad;
        Dual { value: self.value - o.value, grad: [a0 - b0, a1 - b1, a2 - b2] }
    }
}

impl<S: Ring> Neg for Dual<S> {
    type Output = Dual<S>;
    fn neg(self) -> Dual<S> {
        let [a0, a1, a2] = self.grad;
        Dual { value: -self.value, grad: [-a0, -a1, -a2] }
    }
}

impl<S: Ring> Mul for Dual<S> {
    type Output = Dual<S>;
    fn mul(self, o: Dual<S>) -> Dual<S> {
        let grad = std::array::from_fn(|p| {
            self.grad[p].clone() * o.value.clone() + self.value.clone() * o.grad[p].clone()
        });
        Dual { value: self.value * o.value, grad }
    }
}

impl<S: Ring> Ring for Dual<S> {
    fn zero() -> Self {
        Dual::constant(S::zero())
    }
    fn one() -> Self {
        Dual::constant(S::one())
    }
    fn is_zero(&self) -> bool {
        self.value.is_zero() && self.grad.iter().all(Ring::is_zero)
    }
    fn from_rational(q: &Rational) -> Self {
        Dual::constant(S::from_rational(q))
    }
    fn scale(&self, q: &Rational) -> Self {
        Dual { value: self.value.scale(q), grad: std::array::from_fn(|p| self.grad[p].scale(q)) }
    }
}

impl<S: Field> Field for Dual<S> {
    const EXACT: bool = S::EXACT;

    fn inv(&self) -> Result<Self, ArithError> {
        let r = self.value.inv()?;
        let r2 = r.clone() * r.clone();
        let grad = std::array::from_fn(|p| -(self.grad[p].clone() * r2.clone()));
        Ok(Dual { value: r, grad })
    }

    fn sqrt(&self) -> Result<Self, ArithError> {
        let r = self.value.sqrt()?;
        let half_inv = (r.clone() + r.clone()).inv()?;
        let grad = std::array::from_fn(|p| self.grad[p].clone() * half_inv.clone());
        Ok(Dual { value: r, grad })
    }

    fn approx(&self) -> f64 {
        self.value.approx()
    }

    fn compatible(&self, other: &Self) -> bool {
        self.value.compatible(&other.value)
    }

    fn exact_repr(&self) -> String {
        format!(
            "({}; {}, {}, {})",
            self.value.exact_repr(),
            self.grad[0].exact_repr(),
            self.grad[1].exact_repr(),
            self.grad[2].exact_repr()
        )
    }
}
