//! Small dense tensors over a [`Ring`]: vectors, 3×3 matrices and 3×3×3 tensors,
//! with the contraction conventions used throughout the crate.
//!
//! Conventions (0-based internally):
//! * `colon(A, B) = A_ij B_ji`, `inner(A, B) = A_ij B_ij`
//! * `(C : B)_i = C_ijp B_pj`, `(C · n)_ij = C_ijk n_k`
//! * `anti(v)_ij = −ε_ijk v_k`, `axl(A)_k = −½ ε_ijk A_ij`

use std::ops::{Add, Index, IndexMut, Neg, Sub};

use crate::scalar::{rational, Field, Rational, Ring};

/// Levi-Civita symbol on 0-based indices.
pub fn levi_civita(i: usize, j: usize, k: usize) -> i64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
        _ => 0,
    }
}

pub fn kronecker(i: usize, j: usize) -> i64 {
    i64::from(i == j)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TensorError {
    #[error("matrix is not skew-symmetric (max |A + Aᵀ| = {violation:e})")]
    NotSkew { violation: f64 },
}

fn sum<R: Ring>(iter: impl IntoIterator<Item = R>) -> R {
    iter.into_iter().fold(R::zero(), |acc, x| acc + x)
}

fn times<R: Ring>(x: &R, n: i64) -> R {
    match n {
        0 => R::zero(),
        1 => x.clone(),
        -1 => -x.clone(),
        _ => x.clone() * R::from_int(n),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vec3<T>(pub [T; 3]);

#[derive(Debug, Clone, PartialEq)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

#[derive(Debug, Clone, PartialEq)]
pub struct Ten3<T>(pub [[[T; 3]; 3]; 3]);

/// Fourth-order array, used for third derivatives `u_{i,jkl}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ten4<T>(pub [[[[T; 3]; 3]; 3]; 3]);

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Vec3<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T> Vec3<T> {
    pub fn from_fn(mut f: impl FnMut(usize) -> T) -> Self {
        Vec3(std::array::from_fn(&mut f))
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Vec3<U> {
        Vec3::from_fn(|i| f(&self.0[i]))
    }
}

impl<T> Mat3<T> {
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> T) -> Self {
        Mat3(std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))))
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Mat3<U> {
        Mat3::from_fn(|i, j| f(&self.0[i][j]))
    }

    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.0[i][j]
    }

    pub fn row(&self, i: usize) -> Vec3<T>
    where
        T: Clone,
    {
        Vec3(self.0[i].clone())
    }
}

impl<T> Ten3<T> {
    pub fn from_fn(mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        Ten3(std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| f(i, j, k)))))
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Ten3<U> {
        Ten3::from_fn(|i, j, k| f(&self.0[i][j][k]))
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> &T {
        &self.0[i][j][k]
    }
}

impl<T> Ten4<T> {
    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        Ten4(std::array::from_fn(|i| {
            std::array::from_fn(|j| std::array::from_fn(|k| std::array::from_fn(|l| f(i, j, k, l))))
        }))
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Ten4<U> {
        Ten4::from_fn(|i, j, k, l| f(&self.0[i][j][k][l]))
    }

    pub fn at(&self, i: usize, j: usize, k: usize, l: usize) -> &T {
        &self.0[i][j][k][l]
    }

    /// The third-order slice with the last index fixed.
    pub fn slice_last(&self, l: usize) -> Ten3<T>
    where
        T: Clone,
    {
        Ten3::from_fn(|i, j, k| self.0[i][j][k][l].clone())
    }
}

impl<R: Ring> Vec3<R> {
    pub fn zero() -> Self {
        Vec3::from_fn(|_| R::zero())
    }

    pub fn basis(axis: usize) -> Self {
        Vec3::from_fn(|i| if i == axis { R::one() } else { R::zero() })
    }

    pub fn from_rationals(v: &Vec3<Rational>) -> Self {
        v.map(R::from_rational)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Ring::is_zero)
    }

    pub fn dot(&self, o: &Vec3<R>) -> R {
        sum((0..3).map(|i| self[i].clone() * o[i].clone()))
    }

    pub fn norm_sq(&self) -> R {
        self.dot(self)
    }

    /// `(a × b)_i = ε_ijk a_j b_k`
    pub fn cross(&self, o: &Vec3<R>) -> Vec3<R> {
        Vec3([
            self[1].clone() * o[2].clone() - self[2].clone() * o[1].clone(),
            self[2].clone() * o[0].clone() - self[0].clone() * o[2].clone(),
            self[0].clone() * o[1].clone() - self[1].clone() * o[0].clone(),
        ])
    }

    pub fn scale(&self, s: &R) -> Vec3<R> {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn scale_q(&self, q: &Rational) -> Vec3<R> {
        self.map(|x| x.scale(q))
    }

    /// `(a ⊗ b)_ij = a_i b_j`
    pub fn outer(&self, o: &Vec3<R>) -> Mat3<R> {
        Mat3::from_fn(|i, j| self[i].clone() * o[j].clone())
    }

    /// `(v ⊗ 𝟙)_ijk = v_i δ_jk`
    pub fn outer_identity(&self) -> Ten3<R> {
        Ten3::from_fn(|i, j, k| if j == k { self[i].clone() } else { R::zero() })
    }

    /// `anti(v)_ij = −ε_ijk v_k`, so that `anti(v)·w = v × w`.
    pub fn anti(&self) -> Mat3<R> {
        Mat3::from_fn(|i, j| sum((0..3).map(|k| times(&self[k], -levi_civita(i, j, k)))))
    }
}

impl<R: Ring> Mat3<R> {
    pub fn zero() -> Self {
        Mat3::from_fn(|_, _| R::zero())
    }

    pub fn identity() -> Self {
        Mat3::from_fn(|i, j| if i == j { R::one() } else { R::zero() })
    }

    pub fn from_rationals(m: &Mat3<Rational>) -> Self {
        m.map(R::from_rational)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(Ring::is_zero)
    }

    pub fn transpose(&self) -> Mat3<R> {
        Mat3::from_fn(|i, j| self.0[j][i].clone())
    }

    pub fn trace(&self) -> R {
        sum((0..3).map(|i| self.0[i][i].clone()))
    }

    pub fn sym(&self) -> Mat3<R> {
        let half = rational(1, 2);
        Mat3::from_fn(|i, j| (self.0[i][j].clone() + self.0[j][i].clone()).scale(&half))
    }

    pub fn skew(&self) -> Mat3<R> {
        let half = rational(1, 2);
        Mat3::from_fn(|i, j| (self.0[i][j].clone() - self.0[j][i].clone()).scale(&half))
    }

    /// `dev X = X − ⅓ tr(X) 𝟙`
    pub fn dev(&self) -> Mat3<R> {
        let third = self.trace().scale(&rational(1, 3));
        Mat3::from_fn(|i, j| {
            if i == j {
                self.0[i][j].clone() - third.clone()
            } else {
                self.0[i][j].clone()
            }
        })
    }

    pub fn scale(&self, s: &R) -> Mat3<R> {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn scale_q(&self, q: &Rational) -> Mat3<R> {
        self.map(|x| x.scale(q))
    }

    /// Matrix product `(A·B)_ij = A_ik B_kj`.
    pub fn dot(&self, o: &Mat3<R>) -> Mat3<R> {
        Mat3::from_fn(|i, j| sum((0..3).map(|k| self.0[i][k].clone() * o.0[k][j].clone())))
    }

    /// `(A·v)_i = A_ij v_j`
    pub fn apply(&self, v: &Vec3<R>) -> Vec3<R> {
        Vec3::from_fn(|i| sum((0..3).map(|j| self.0[i][j].clone() * v[j].clone())))
    }

    /// `A : B = A_ij B_ji`
    pub fn colon(&self, o: &Mat3<R>) -> R {
        sum((0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| self.0[i][j].clone() * o.0[j][i].clone()))
    }

    /// `⟨A, B⟩ = A_ij B_ij`
    pub fn inner(&self, o: &Mat3<R>) -> R {
        sum((0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| self.0[i][j].clone() * o.0[i][j].clone()))
    }

    pub fn norm_sq(&self) -> R {
        self.inner(self)
    }

    /// `axl(A)_k = −½ ε_ijk A_ij`, without checking skew-symmetry.
    pub fn axl_unchecked(&self) -> Vec3<R> {
        let half = rational(-1, 2);
        Vec3::from_fn(|k| {
            sum((0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| times(&self.0[i][j], levi_civita(i, j, k))))
                .scale(&half)
        })
    }
}

impl<S: Field> Mat3<S> {
    /// Axial vector of a skew-symmetric matrix. In exact arithmetic any
    /// symmetric residue is rejected; in floating point the residue must stay
    /// within `tolerance`.
    pub fn axl(&self, tolerance: f64) -> Result<Vec3<S>, TensorError> {
        let sym_part = self.clone() + self.transpose();
        let violation = sym_part.0.iter().flatten().map(|x| x.approx().abs()).fold(0.0, f64::max);
        let ok = if S::EXACT { sym_part.is_zero() } else { violation <= tolerance };
        if ok {
            Ok(self.axl_unchecked())
        } else {
            Err(TensorError::NotSkew { violation })
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|x| x.approx().abs()).fold(0.0, f64::max)
    }
}

impl<S: Field> Vec3<S> {
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|x| x.approx().abs()).fold(0.0, f64::max)
    }

    pub fn approx(&self) -> Vec3<f64> {
        self.map(Field::approx)
    }
}

impl<R: Ring> Ten3<R> {
    pub fn zero() -> Self {
        Ten3::from_fn(|_, _, _| R::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().flatten().all(Ring::is_zero)
    }

    /// `(X^{T12})_ijk = X_jik`
    pub fn transpose12(&self) -> Ten3<R> {
        Ten3::from_fn(|i, j, k| self.0[j][i][k].clone())
    }

    /// `(C · n)_ij = C_ijk n_k`
    pub fn dot_vec(&self, n: &Vec3<R>) -> Mat3<R> {
        Mat3::from_fn(|i, j| sum((0..3).map(|k| self.0[i][j][k].clone() * n[k].clone())))
    }

    /// `(C : B)_i = C_ijp B_pj`
    pub fn colon_mat(&self, b: &Mat3<R>) -> Vec3<R> {
        Vec3::from_fn(|i| {
            sum((0..3).flat_map(|j| (0..3).map(move |p| (j, p))).map(|(j, p)| self.0[i][j][p].clone() * b.0[p][j].clone()))
        })
    }

    pub fn scale_q(&self, q: &Rational) -> Ten3<R> {
        self.map(|x| x.scale(q))
    }
}

fn zip_map<T, U, const N: usize>(a: [T; N], b: [T; N], mut f: impl FnMut(T, T) -> U) -> [U; N] {
    let mut b = b.into_iter();
    a.map(|x| f(x, b.next().expect("equal lengths")))
}

impl<R: Ring> Add for Vec3<R> {
    type Output = Vec3<R>;
    fn add(self, o: Vec3<R>) -> Vec3<R> {
        Vec3(zip_map(self.0, o.0, |x, y| x + y))
    }
}

impl<R: Ring> Sub for Vec3<R> {
    type Output = Vec3<R>;
    fn sub(self, o: Vec3<R>) -> Vec3<R> {
        Vec3(zip_map(self.0, o.0, |x, y| x - y))
    }
}

impl<R: Ring> Neg for Vec3<R> {
    type Output = Vec3<R>;
    fn neg(self) -> Vec3<R> {
        Vec3(self.0.map(|x| -x))
    }
}

impl<R: Ring> Add for Mat3<R> {
    type Output = Mat3<R>;
    fn add(self, o: Mat3<R>) -> Mat3<R> {
        Mat3(zip_map(self.0, o.0, |a, b| zip_map(a, b, |x, y| x + y)))
    }
}

impl<R: Ring> Sub for Mat3<R> {
    type Output = Mat3<R>;
    fn sub(self, o: Mat3<R>) -> Mat3<R> {
        Mat3(zip_map(self.0, o.0, |a, b| zip_map(a, b, |x, y| x - y)))
    }
}

impl<R: Ring> Neg for Mat3<R> {
    type Output = Mat3<R>;
    fn neg(self) -> Mat3<R> {
        Mat3(self.0.map(|row| row.map(|x| -x)))
    }
}

impl<R: Ring> Add for Ten3<R> {
    type Output = Ten3<R>;
    fn add(self, o: Ten3<R>) -> Ten3<R> {
        Ten3(zip_map(self.0, o.0, |a, b| zip_map(a, b, |c, d| zip_map(c, d, |x, y| x + y))))
    }
}

impl<R: Ring> Sub for Ten3<R> {
    type Output = Ten3<R>;
    fn sub(self, o: Ten3<R>) -> Ten3<R> {
        Ten3(zip_map(self.0, o.0, |a, b| zip_map(a, b, |c, d| zip_map(c, d, |x, y| x - y))))
    }
}

impl<R: Ring> Neg for Ten3<R> {
    type Output = Ten3<R>;
    fn neg(self) -> Ten3<R> {
        Ten3(self.0.map(|m| m.map(|row| row.map(|x| -x))))
    }
}
