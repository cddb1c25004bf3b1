//! Multivariate polynomials over the rationals in x1, x2, x3, and the row-wise
//! differential operators acting on polynomial vector and matrix fields.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::Signed;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{format_rational, parse_rational, Rational, Ring};
use crate::tensor_core::{levi_civita, Mat3, Ten3, Ten4, Vec3};

/// Exponent triple, ordered graded-lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial(pub [u32; 3]);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial with no zero coefficients stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

pub type PolyVec = Vec3<Poly>;
pub type PolyMat = Mat3<Poly>;
pub type PolyTen3 = Ten3<Poly>;

impl Poly {
    pub fn constant(c: Rational) -> Self {
        Poly::monomial([0, 0, 0], c)
    }

    pub fn monomial(exps: [u32; 3], c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial(exps), c);
        }
        Poly { terms }
    }

    /// The coordinate function x_{axis+1}.
    pub fn var(axis: usize) -> Self {
        let mut e = [0; 3];
        e[axis] = 1;
        Poly::monomial(e, Rational::one())
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exps: [u32; 3]) -> Rational {
        self.terms.get(&Monomial(exps)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn max_abs_coefficient(&self) -> Rational {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Partial derivative with respect to x_{axis+1}.
    pub fn diff(&self, axis: usize) -> Poly {
        let mut out = Poly::default();
        for (m, c) in &self.terms {
            let e = m.0[axis];
            if e > 0 {
                let mut exps = m.0;
                exps[axis] -= 1;
                out.add_term(Monomial(exps), c * Rational::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    /// Evaluate at a point of any ring containing the rationals.
    pub fn eval<S: Ring>(&self, x: &Vec3<S>) -> S {
        let Some(deg) = self.degree() else {
            return S::zero();
        };
        let powers: [Vec<S>; 3] = std::array::from_fn(|axis| {
            let mut p = Vec::with_capacity(deg as usize + 1);
            p.push(S::one());
            for k in 1..=deg as usize {
                let next = p[k - 1].clone() * x[axis].clone();
                p.push(next);
            }
            p
        });
        let mut acc = S::zero();
        for (m, c) in &self.terms {
            let mut term = S::from_rational(c);
            for axis in 0..3 {
                let e = m.0[axis] as usize;
                if e > 0 {
                    term = term * powers[axis][e].clone();
                }
            }
            acc = acc + term;
        }
        acc
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, o: Poly) -> Poly {
        for (m, c) in o.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, o: Poly) -> Poly {
        for (m, c) in o.terms {
            self.add_term(m, -c);
        }
        self
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect() }
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, o: Poly) -> Poly {
        let mut out = Poly::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let e = [ma.0[0] + mb.0[0], ma.0[1] + mb.0[1], ma.0[2] + mb.0[2]];
                out.add_term(Monomial(e), ca * cb);
            }
        }
        out
    }
}

impl Ring for Poly {
    fn zero() -> Self {
        Poly::default()
    }
    fn one() -> Self {
        Poly::constant(Rational::one())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn from_rational(q: &Rational) -> Self {
        Poly::constant(q.clone())
    }
    fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Poly::default();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, c * q)).collect() }
    }
}

/// Serialized as terms `c * x1^a x2^b x3^c` joined by ` + `, highest degree first.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", format_rational(c))?;
            let factors: Vec<String> = (0..3)
                .filter(|&a| m.0[a] > 0)
                .map(|a| if m.0[a] == 1 { format!("x{}", a + 1) } else { format!("x{}^{}", a + 1, m.0[a]) })
                .collect();
            if !factors.is_empty() {
                write!(f, " * {}", factors.join(" "))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LiteralError {
    #[error("empty field literal")]
    Empty,
    #[error("bad term `{term}`: {reason}")]
    BadTerm { term: String, reason: String },
    #[error("expected 3 components separated by `;`, found {0}")]
    ComponentCount(usize),
}

const MAX_EXPONENT: u32 = 64;

/// Parse a polynomial literal such as `3/2 * x1^2 x3 + -1 * x2 - 4`.
///
/// Terms are separated by `+` or `-`; a term is an optional rational
/// coefficient, an optional `*`, and factors `x1`, `x2^3`, ... separated by
/// whitespace or `*`.
pub fn parse_poly(text: &str) -> Result<Poly, LiteralError> {
    if text.trim().is_empty() {
        return Err(LiteralError::Empty);
    }
    let mut out = Poly::default();
    for (negative, term) in split_terms(text)? {
        let (exps, mut coef) = parse_term(term)?;
        if negative {
            coef = -coef;
        }
        out.add_term(Monomial(exps), coef);
    }
    Ok(out)
}

fn split_terms(text: &str) -> Result<Vec<(bool, &str)>, LiteralError> {
    let mut out = Vec::new();
    let mut negative = false;
    let mut start = 0;
    let mut expect_term = true;
    let bytes = text.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b != b'+' && b != b'-' {
            if !b.is_ascii_whitespace() {
                expect_term = false;
            }
            continue;
        }
        if expect_term {
            // sign prefix of the next term
            if b == b'-' {
                negative = !negative;
            }
            start = i + 1;
            continue;
        }
        out.push((negative, text[start..i].trim()));
        negative = b == b'-';
        start = i + 1;
        expect_term = true;
    }
    if expect_term {
        let tail = text[start..].trim();
        let term = if tail.is_empty() { text.trim() } else { tail };
        return Err(LiteralError::BadTerm { term: term.to_string(), reason: "dangling operator".into() });
    }
    out.push((negative, text[start..].trim()));
    Ok(out)
}

fn parse_term(term: &str) -> Result<([u32; 3], Rational), LiteralError> {
    let bad = |reason: &str| LiteralError::BadTerm { term: term.to_string(), reason: reason.to_string() };
    let mut exps = [0u32; 3];
    let mut coef = Rational::one();
    let mut saw_coef = false;
    let mut saw_factor = false;
    for token in term.split(|c: char| c.is_whitespace() || c == '*').filter(|t| !t.is_empty()) {
        if let Some(rest) = token.strip_prefix('x') {
            let (axis, power) = match rest.split_once('^') {
                Some((a, p)) => (a, p.parse::<u32>().map_err(|_| bad("bad exponent"))?),
                None => (rest, 1),
            };
            let axis = match axis {
                "1" => 0,
                "2" => 1,
                "3" => 2,
                _ => return Err(bad("unknown variable; expected x1, x2 or x3")),
            };
            exps[axis] = exps[axis].checked_add(power).ok_or_else(|| bad("exponent overflow"))?;
            if exps[axis] > MAX_EXPONENT {
                return Err(bad("exponent too large"));
            }
            saw_factor = true;
        } else {
            if saw_coef || saw_factor {
                return Err(bad("coefficient must come first and appear once"));
            }
            coef = parse_rational(token).map_err(|e| bad(&e.to_string()))?;
            saw_coef = true;
        }
    }
    if !saw_coef && !saw_factor {
        return Err(bad("empty term"));
    }
    Ok((exps, coef))
}

/// Parse a vector field literal `u1; u2; u3`.
pub fn parse_poly_vec(text: &str) -> Result<PolyVec, LiteralError> {
    let parts: Vec<&str> = text.split(';').collect();
    if parts.len() != 3 {
        return Err(LiteralError::ComponentCount(parts.len()));
    }
    Ok(Vec3([parse_poly(parts[0])?, parse_poly(parts[1])?, parse_poly(parts[2])?]))
}

pub fn format_poly_vec(u: &PolyVec) -> String {
    format!("{}; {}; {}", u[0], u[1], u[2])
}

pub fn eval_vec<S: Ring>(u: &PolyVec, x: &Vec3<S>) -> Vec3<S> {
    u.map(|p| p.eval(x))
}

pub fn eval_mat<S: Ring>(m: &PolyMat, x: &Vec3<S>) -> Mat3<S> {
    m.map(|p| p.eval(x))
}

pub fn eval_ten3<S: Ring>(t: &PolyTen3, x: &Vec3<S>) -> Ten3<S> {
    t.map(|p| p.eval(x))
}

/// `∇φ`
pub fn grad_scalar(phi: &Poly) -> PolyVec {
    Vec3::from_fn(|j| phi.diff(j))
}

/// `(∇u)_ij = ∂_j u_i`
pub fn grad_vec(u: &PolyVec) -> PolyMat {
    Mat3::from_fn(|i, j| u[i].diff(j))
}

/// `(curl u)_i = ε_ijk ∂_j u_k`
pub fn curl_vec(u: &PolyVec) -> PolyVec {
    Vec3::from_fn(|i| {
        let mut acc = Poly::zero();
        for j in 0..3 {
            for k in 0..3 {
                match levi_civita(i, j, k) {
                    1 => acc = acc + u[k].diff(j),
                    -1 => acc = acc - u[k].diff(j),
                    _ => {}
                }
            }
        }
        acc
    })
}

pub fn div_vec(u: &PolyVec) -> Poly {
    (0..3).fold(Poly::zero(), |acc, i| acc + u[i].diff(i))
}

pub fn laplacian(p: &Poly) -> Poly {
    (0..3).fold(Poly::zero(), |acc, k| acc + p.diff(k).diff(k))
}

pub fn laplacian_vec(u: &PolyVec) -> PolyVec {
    u.map(laplacian)
}

/// Row-wise curl: row i of `Curl P` is `curl` of row i of `P`.
pub fn curl_mat(p: &PolyMat) -> PolyMat {
    let rows: [PolyVec; 3] = std::array::from_fn(|i| curl_vec(&p.row(i)));
    Mat3::from_fn(|i, j| rows[i][j].clone())
}

/// Row-wise divergence `(Div P)_i = ∂_j P_ij`.
pub fn div_mat(p: &PolyMat) -> PolyVec {
    Vec3::from_fn(|i| (0..3).fold(Poly::zero(), |acc, j| acc + p.0[i][j].diff(j)))
}

/// `(∇P)_ijk = ∂_k P_ij`
pub fn grad_mat(p: &PolyMat) -> PolyTen3 {
    Ten3::from_fn(|i, j, k| p.0[i][j].diff(k))
}

/// Divergence over the last index `(Div C)_ij = ∂_k C_ijk`.
pub fn div_ten3(c: &PolyTen3) -> PolyMat {
    Mat3::from_fn(|i, j| (0..3).fold(Poly::zero(), |acc, k| acc + c.0[i][j][k].diff(k)))
}

pub fn laplacian_mat(p: &PolyMat) -> PolyMat {
    p.map(laplacian)
}

/// Derivatives of a displacement field up to third order.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<R> {
    /// `u_{i,j}`
    pub grad: Mat3<R>,
    /// `u_{i,jk}`
    pub hess: Ten3<R>,
    /// `u_{i,jkl}`
    pub third: Ten4<R>,
}

impl Jet<Poly> {
    pub fn of(u: &PolyVec) -> Self {
        let grad = grad_vec(u);
        let hess = Ten3::from_fn(|i, j, k| grad.0[i][j].diff(k));
        let third = Ten4::from_fn(|i, j, k, l| hess.0[i][j][k].diff(l));
        Jet { grad, hess, third }
    }

    pub fn eval<S: Ring>(&self, x: &Vec3<S>) -> Jet<S> {
        Jet {
            grad: self.grad.map(|p| p.eval(x)),
            hess: self.hess.map(|p| p.eval(x)),
            third: self.third.map(|p| p.eval(x)),
        }
    }
}

/// Random polynomial vector field with all monomials up to `degree_max`.
///
/// Coefficients are `p/q` with `|p| ≤ coeff_bound` and `1 ≤ q ≤ coeff_bound`.
pub fn random_field(seed: u64, degree_max: u32, coeff_bound: u32) -> PolyVec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = i64::from(coeff_bound.max(1));
    let mut component = || {
        let mut p = Poly::zero();
        for d in 0..=degree_max {
            for a in (0..=d).rev() {
                for b in (0..=d - a).rev() {
                    let num = rng.random_range(-bound..=bound);
                    let den = rng.random_range(1..=bound);
                    p.add_term(Monomial([a, b, d - a - b]), Rational::new(num.into(), den.into()));
                }
            }
        }
        p
    };
    Vec3([component(), component(), component()])
}

/// Random rational in `[-bound, bound]` with denominator at most `den_max`.
pub fn random_rational(rng: &mut impl rand::Rng, bound: i64, den_max: i64) -> Rational {
    let den = rng.random_range(1..=den_max);
    let num = rng.random_range(-bound * den..=bound * den);
    Rational::new(num.into(), den.into())
}
