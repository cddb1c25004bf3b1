//! Energies and stress-like tensors of the isotropic indeterminate couple
//! stress model.
//!
//! Every formula is generic over [`Ring`], so the same code yields polynomial
//! fields (with `R = Poly`) or point values (with a scalar type). Quantities
//! that need derivatives of a stress take the next-order jet slice.

use num_traits::Signed;

use crate::poly_fields::{self as pf, Jet, Poly, PolyMat, PolyTen3, PolyVec};
use crate::scalar::{format_rational, rational, Rational, Ring};
use crate::tensor_core::{kronecker, levi_civita, Mat3, Ten3, Ten4, Vec3};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("shear modulus mu must be positive, got {0}")]
    NonPositiveShear(String),
}

/// Material constants. The bulk modulus and Koiter's ratio are derived.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialParams {
    mu: Rational,
    lambda: Rational,
    alpha1: Rational,
    alpha2: Rational,
}

/// Pointwise definiteness class of the curvature energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    PositiveDefinite,
    /// `α₂ = 0`: the couple stress is symmetric and the energy only semidefinite.
    Conformal,
    Indefinite,
}

impl MaterialParams {
    pub fn new(mu: Rational, lambda: Rational, alpha1: Rational, alpha2: Rational) -> Result<Self, ParamError> {
        if !mu.is_positive() {
            return Err(ParamError::NonPositiveShear(format_rational(&mu)));
        }
        Ok(MaterialParams { mu, lambda, alpha1, alpha2 })
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }
    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }
    pub fn alpha1(&self) -> &Rational {
        &self.alpha1
    }
    pub fn alpha2(&self) -> &Rational {
        &self.alpha2
    }

    /// `κ = (2μ + 3λ)/3`
    pub fn bulk_modulus(&self) -> Rational {
        (&self.mu * rational(2, 1) + &self.lambda * rational(3, 1)) / rational(3, 1)
    }

    /// `η = (α₁ − α₂)/(α₁ + α₂)`, when the denominator is nonzero.
    pub fn eta(&self) -> Option<Rational> {
        let s = &self.alpha1 + &self.alpha2;
        (!s.is_zero()).then(|| (&self.alpha1 - &self.alpha2) / s)
    }

    pub fn is_conformal(&self) -> bool {
        self.alpha2.is_zero()
    }

    pub fn definiteness(&self) -> Definiteness {
        if self.alpha1.is_positive() && self.alpha2.is_positive() {
            Definiteness::PositiveDefinite
        } else if self.alpha1.is_positive() && self.alpha2.is_zero() {
            Definiteness::Conformal
        } else {
            Definiteness::Indefinite
        }
    }

    fn sum_half(&self) -> Rational {
        (&self.alpha1 + &self.alpha2) / rational(2, 1)
    }

    fn diff_half(&self) -> Rational {
        (&self.alpha1 - &self.alpha2) / rational(2, 1)
    }
}

/// Constants of Grioli's curvature energy.
#[derive(Debug, Clone, PartialEq)]
pub struct GrioliParams {
    pub eta: Rational,
    pub length_scale: Rational,
}

impl GrioliParams {
    /// Whether `−1 < η < 1`; outside this range the form is still evaluated.
    pub fn eta_admissible(&self) -> bool {
        self.eta.abs() < Rational::from_integer(1.into())
    }
}

fn q(p: i64, d: i64) -> Rational {
    rational(p, d)
}

fn sum<R: Ring>(iter: impl IntoIterator<Item = R>) -> R {
    iter.into_iter().fold(R::zero(), |acc, x| acc + x)
}

fn eps_times<R: Ring>(x: &R, i: usize, j: usize, k: usize) -> R {
    match levi_civita(i, j, k) {
        1 => x.clone(),
        -1 => -x.clone(),
        _ => R::zero(),
    }
}

/// `σ = 2μ sym∇u + λ tr(∇u) 𝟙`
pub fn cauchy_stress<R: Ring>(p: &MaterialParams, grad: &Mat3<R>) -> Mat3<R> {
    let tr = grad.trace().scale(&p.lambda);
    grad.sym().scale_q(&(&p.mu * q(2, 1))) + Mat3::identity().scale(&tr)
}

/// Both forms of the linear elastic energy:
/// `μ‖sym∇u‖² + λ/2 tr²` and `μ‖dev sym∇u‖² + κ/2 tr²`.
pub fn energy_lin<R: Ring>(p: &MaterialParams, grad: &Mat3<R>) -> [R; 2] {
    let e = grad.sym();
    let tr2 = e.trace() * e.trace();
    [
        e.norm_sq().scale(&p.mu) + tr2.scale(&(&p.lambda / q(2, 1))),
        e.dev().norm_sq().scale(&p.mu) + tr2.scale(&(p.bulk_modulus() / q(2, 1))),
    ]
}

/// `G = ∇ curl u`, i.e. `G_ij = ε_ikl u_{l,kj}`.
pub fn curl_gradient<R: Ring>(hess: &Ten3<R>) -> Mat3<R> {
    Mat3::from_fn(|i, j| {
        sum((0..3).flat_map(|k| (0..3).map(move |l| (k, l))).map(|(k, l)| eps_times(hess.at(l, k, j), i, k, l)))
    })
}

/// `∇ axl(skew ∇u)`, computed from the second derivatives without passing through the curl.
pub fn rotation_gradient<R: Ring>(hess: &Ten3<R>) -> Mat3<R> {
    let quarter = q(-1, 4);
    Mat3::from_fn(|i, j| {
        sum((0..3).flat_map(|k| (0..3).map(move |l| (k, l))).map(|(k, l)| {
            eps_times(&(hess.at(k, l, j).clone() - hess.at(l, k, j).clone()), k, l, i)
        }))
        .scale(&quarter)
    })
}

/// The three forms of the curvature energy: in `∇curl u`, in `∇axl(skew∇u)`,
/// and with the deviatoric projection.
pub fn energy_curv<R: Ring>(p: &MaterialParams, hess: &Ten3<R>) -> [R; 3] {
    let g = curl_gradient(hess);
    let k = rotation_gradient(hess);
    let a1 = &p.alpha1 / q(4, 1);
    let a2 = &p.alpha2 / q(4, 1);
    [
        g.sym().norm_sq().scale(&a1) + g.skew().norm_sq().scale(&a2),
        k.sym().norm_sq().scale(&p.alpha1) + k.skew().norm_sq().scale(&p.alpha2),
        g.sym().dev().norm_sq().scale(&a1) + g.skew().norm_sq().scale(&a2),
    ]
}

/// The four lines of Grioli's curvature energy, all scaled by `μ L_c² α₁ / 4`.
///
/// The second line is written in `K = ∇axl(skew∇u) = G/2`; since every term is
/// quadratic its bracket is multiplied by 4 to stay on the same scale as the
/// others (see [`grioli_rotation_bracket`] for the unscaled bracket).
pub fn energy_grioli<R: Ring>(p: &MaterialParams, g: &GrioliParams, hess: &Ten3<R>) -> [R; 4] {
    let big_g = curl_gradient(hess);
    let pre = &p.mu * &g.length_scale * &g.length_scale * &p.alpha1 / q(4, 1);
    let eta = &g.eta;
    let line1 = big_g.norm_sq() + big_g.dot(&big_g).trace().scale(eta);
    let line2 = grioli_rotation_bracket(g, hess).scale(&q(4, 1));
    let line3 = big_g.sym().dev().norm_sq() + big_g.skew().norm_sq() + big_g.inner(&big_g.transpose()).scale(eta);
    let one = Rational::from_integer(1.into());
    let line4 = big_g.sym().dev().norm_sq().scale(&(&one + eta)) + big_g.skew().norm_sq().scale(&(&one - eta));
    [line1, line2, line3, line4].map(|x| x.scale(&pre))
}

/// `‖dev sym K‖² + ‖skew K‖² + η⟨K, Kᵀ⟩` with `K = ∇axl(skew∇u)`, unscaled.
pub fn grioli_rotation_bracket<R: Ring>(g: &GrioliParams, hess: &Ten3<R>) -> R {
    let k = rotation_gradient(hess);
    k.sym().dev().norm_sq() + k.skew().norm_sq() + k.inner(&k.transpose()).scale(&g.eta)
}

/// `m̃ = α₁ dev sym G + α₂ skew G`
pub fn couple_stress<R: Ring>(p: &MaterialParams, hess: &Ten3<R>) -> Mat3<R> {
    couple_stress_of(p, &curl_gradient(hess))
}

fn couple_stress_of<R: Ring>(p: &MaterialParams, g: &Mat3<R>) -> Mat3<R> {
    g.sym().dev().scale_q(&p.alpha1) + g.skew().scale_q(&p.alpha2)
}

/// Four representations of `m̃`: the deviatoric form, `(α₁+α₂)/2 G + (α₁−α₂)/2 Gᵀ`,
/// the form in `∇axl(skew∇u)`, and the index form
/// `m̃_il = (α₁+α₂)/2 ε_ijk u_{k,jl} + (α₁−α₂)/2 ε_ljk u_{k,ji}`.
pub fn couple_stress_forms<R: Ring>(p: &MaterialParams, hess: &Ten3<R>) -> [Mat3<R>; 4] {
    let g = curl_gradient(hess);
    let k = rotation_gradient(hess);
    let two_a1 = &p.alpha1 * q(2, 1);
    let two_a2 = &p.alpha2 * q(2, 1);
    let index = Mat3::from_fn(|i, l| {
        let first = sum((0..3).flat_map(|j| (0..3).map(move |k| (j, k))).map(|(j, k)| eps_times(hess.at(k, j, l), i, j, k)));
        let second = sum((0..3).flat_map(|j| (0..3).map(move |k| (j, k))).map(|(j, k)| eps_times(hess.at(k, j, i), l, j, k)));
        first.scale(&p.sum_half()) + second.scale(&p.diff_half())
    });
    [
        couple_stress_of(p, &g),
        g.scale_q(&p.sum_half()) + g.transpose().scale_q(&p.diff_half()),
        k.sym().dev().scale_q(&two_a1) + k.skew().scale_q(&two_a2),
        index,
    ]
}

/// `𝔪̃_ijk = α₁/2 ε_pji S_pk + α₂/2 ε_pji A_pk` with `S = sym G`, `A = skew G`.
pub fn hyperstress<R: Ring>(p: &MaterialParams, hess: &Ten3<R>) -> Ten3<R> {
    let g = curl_gradient(hess);
    let s = g.sym();
    let a = g.skew();
    let a1 = &p.alpha1 / q(2, 1);
    let a2 = &p.alpha2 / q(2, 1);
    Ten3::from_fn(|i, j, k| {
        let sp = sum((0..3).map(|pp| eps_times(s.at(pp, k), pp, j, i)));
        let ap = sum((0..3).map(|pp| eps_times(a.at(pp, k), pp, j, i)));
        sp.scale(&a1) + ap.scale(&a2)
    })
}

/// Three representations of `𝔪̃`: the ε form, the expanded index form
/// `α₁/2 (u_{i,jk} − u_{j,ik}) + (α₁−α₂)/4 [u_{p,ip}δ_jk − u_{i,pp}δ_jk + u_{j,pp}δ_ik − u_{p,jp}δ_ik]`,
/// and the compact tensor form built from `∇(skew∇u)`, `∇div u ⊗ 𝟙`, `Δu ⊗ 𝟙`
/// and the transposition over the first two indices.
pub fn hyperstress_forms<R: Ring>(p: &MaterialParams, hess: &Ten3<R>) -> [Ten3<R>; 3] {
    let a1h = &p.alpha1 / q(2, 1);
    let c = (&p.alpha1 - &p.alpha2) / q(4, 1);
    let grad_div = Vec3::from_fn(|i| sum((0..3).map(|pp| hess.at(pp, pp, i).clone())));
    let lap = Vec3::from_fn(|i| sum((0..3).map(|pp| hess.at(i, pp, pp).clone())));
    let expanded = Ten3::from_fn(|i, j, k| {
        let d_jk = kronecker(j, k) == 1;
        let d_ik = kronecker(i, k) == 1;
        let mut bracket = R::zero();
        if d_jk {
            bracket = bracket + grad_div[i].clone() - lap[i].clone();
        }
        if d_ik {
            bracket = bracket + lap[j].clone() - grad_div[j].clone();
        }
        (hess.at(i, j, k).clone() - hess.at(j, i, k).clone()).scale(&a1h) + bracket.scale(&c)
    });
    let grad_skew = Ten3::from_fn(|i, j, k| (hess.at(i, j, k).clone() - hess.at(j, i, k).clone()).scale(&q(1, 2)));
    let gd = grad_div.outer_identity();
    let lp = lap.outer_identity();
    let compact = grad_skew.scale_q(&p.alpha1)
        + (gd.clone() - lp.clone()).scale_q(&c)
        + (lp.transpose12() - gd.transpose12()).scale_q(&c);
    [hyperstress(p, hess), expanded, compact]
}

/// `Div m̃`, from third derivatives.
pub fn couple_stress_div<R: Ring>(p: &MaterialParams, third: &Ten4<R>) -> Vec3<R> {
    let slices: [Mat3<R>; 3] = std::array::from_fn(|j| couple_stress(p, &third.slice_last(j)));
    Vec3::from_fn(|i| sum((0..3).map(|j| slices[j].at(i, j).clone())))
}

/// `Div 𝔪̃` (contracting the last index), from third derivatives.
pub fn hyperstress_div<R: Ring>(p: &MaterialParams, third: &Ten4<R>) -> Mat3<R> {
    let slices: [Ten3<R>; 3] = std::array::from_fn(|k| hyperstress(p, &third.slice_last(k)));
    Mat3::from_fn(|i, j| sum((0..3).map(|k| slices[k].at(i, j, k).clone())))
}

/// `τ̃ = ½ anti(Div m̃)`
pub fn nonlocal_stress<R: Ring>(p: &MaterialParams, third: &Ten4<R>) -> Mat3<R> {
    couple_stress_div(p, third).anti().scale_q(&q(1, 2))
}

/// Three representations of `τ̃`: `Div 𝔪̃`, `½ anti(Div m̃)` and `(α₁+α₂)/2 Δ(skew∇u)`.
pub fn nonlocal_stress_forms<R: Ring>(p: &MaterialParams, third: &Ten4<R>) -> [Mat3<R>; 3] {
    let lap_skew = Mat3::from_fn(|i, j| {
        sum((0..3).map(|pp| third.at(i, j, pp, pp).clone() - third.at(j, i, pp, pp).clone())).scale(&q(1, 2))
    });
    [hyperstress_div(p, third), nonlocal_stress(p, third), lap_skew.scale_q(&p.sum_half())]
}

/// Point value of `σ`, `m̃`, `𝔪̃`, `τ̃` from a jet.
#[derive(Debug, Clone, PartialEq)]
pub struct StressState<R> {
    pub cauchy: Mat3<R>,
    pub couple: Mat3<R>,
    pub hyper: Ten3<R>,
    pub nonlocal: Mat3<R>,
    pub couple_div: Vec3<R>,
}

impl<R: Ring> StressState<R> {
    pub fn from_jet(p: &MaterialParams, jet: &Jet<R>) -> Self {
        let couple_div = couple_stress_div(p, &jet.third);
        StressState {
            cauchy: cauchy_stress(p, &jet.grad),
            couple: couple_stress(p, &jet.hess),
            hyper: hyperstress(p, &jet.hess),
            nonlocal: couple_div.anti().scale_q(&q(1, 2)),
            couple_div,
        }
    }
}

/// Field-level constructions that differentiate polynomial stresses directly,
/// independent of the jet-slice formulas above.
pub mod fields {
    use super::*;

    pub fn cauchy_stress(p: &MaterialParams, u: &PolyVec) -> PolyMat {
        super::cauchy_stress(p, &pf::grad_vec(u))
    }

    /// `m̃` built from `∇ curl u` computed by polynomial differentiation.
    pub fn couple_stress(p: &MaterialParams, u: &PolyVec) -> PolyMat {
        super::couple_stress_of(p, &pf::grad_vec(&pf::curl_vec(u)))
    }

    pub fn hyperstress(p: &MaterialParams, u: &PolyVec) -> PolyTen3 {
        let grad = pf::grad_vec(u);
        super::hyperstress(p, &Ten3::from_fn(|i, j, k| grad.0[i][j].diff(k)))
    }

    /// `Div 𝔪̃` by differentiating the polynomial hyperstress.
    pub fn nonlocal_stress_third_order(p: &MaterialParams, u: &PolyVec) -> PolyMat {
        pf::div_ten3(&hyperstress(p, u))
    }

    /// `½ anti(Div m̃)` by differentiating the polynomial couple stress.
    pub fn nonlocal_stress(p: &MaterialParams, u: &PolyVec) -> PolyMat {
        pf::div_mat(&couple_stress(p, u)).anti().scale_q(&q(1, 2))
    }

    /// `(α₁+α₂)/2 Δ(skew∇u)`
    pub fn nonlocal_stress_laplacian(p: &MaterialParams, u: &PolyVec) -> PolyMat {
        pf::laplacian_mat(&pf::grad_vec(u).skew()).scale_q(&p.sum_half())
    }

    /// Both bulk operators `Div(σ − Div 𝔪̃)` and `Div(σ − ½ anti Div m̃)`.
    pub fn bulk_operator(p: &MaterialParams, u: &PolyVec) -> [PolyVec; 2] {
        let sigma = cauchy_stress(p, u);
        [
            pf::div_mat(&(sigma.clone() - nonlocal_stress_third_order(p, u))),
            pf::div_mat(&(sigma - nonlocal_stress(p, u))),
        ]
    }

    /// `Div(σ − τ̃) + f`
    pub fn bulk_residual(p: &MaterialParams, u: &PolyVec, body_force: &PolyVec) -> PolyVec {
        let [op, _] = bulk_operator(p, u);
        op + body_force.clone()
    }

    /// Body force that makes `u` an exact solution of the bulk equation.
    pub fn manufactured_body_force(p: &MaterialParams, u: &PolyVec) -> PolyVec {
        let [op, _] = bulk_operator(p, u);
        -op
    }

    /// `Div{anti Div[(∇axl(skew∇u))ᵀ]}`, the bulk contribution of Grioli's η term.
    pub fn grioli_bulk_contribution(u: &PolyVec) -> PolyVec {
        let k = pf::grad_vec(&pf::curl_vec(u)).scale_q(&q(1, 2));
        pf::div_mat(&pf::div_mat(&k.transpose()).anti())
    }

    pub fn zero_field() -> PolyVec {
        Vec3::from_fn(|_| Poly::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly_fields::parse_poly_vec;

    fn params(mu: i64, lambda: i64, a1: i64, a2: i64) -> MaterialParams {
        MaterialParams::new(q(mu, 1), q(lambda, 1), q(a1, 1), q(a2, 1)).unwrap()
    }

    fn at_origin(u: &str) -> Jet<Rational> {
        Jet::of(&parse_poly_vec(u).unwrap()).eval(&Vec3::<Rational>::zero())
    }

    #[test]
    fn uniaxial_stress() {
        let jet = at_origin("x1; 0; 0");
        let s = cauchy_stress(&params(1, 2, 1, 1), &jet.grad);
        assert_eq!(s, Mat3::from_fn(|i, j| if i != j { q(0, 1) } else if i == 0 { q(4, 1) } else { q(2, 1) }));
    }

    #[test]
    fn quadratic_shear_couple_stress() {
        let jet = at_origin("x2^2; 0; 0");
        let p = params(1, 0, 1, 2);
        let expected = Mat3::from_fn(|i, j| match (i, j) {
            (1, 2) => q(1, 1),
            (2, 1) => q(-3, 1),
            _ => q(0, 1),
        });
        for form in couple_stress_forms(&p, &jet.hess) {
            assert_eq!(form, expected);
        }
        let w = energy_curv(&params(1, 0, 2, 2), &jet.hess);
        assert!(w.iter().all(|x| *x == q(2, 1)));
    }

    #[test]
    fn cubic_shear_nonlocal_stress() {
        let jet = at_origin("x2^3; 0; 0");
        let p = params(1, 0, 1, 1);
        let expected = Mat3::from_fn(|i, j| match (i, j) {
            (0, 1) => q(3, 1),
            (1, 0) => q(-3, 1),
            _ => q(0, 1),
        });
        for form in nonlocal_stress_forms(&p, &jet.third) {
            assert_eq!(form, expected);
        }
    }

    #[test]
    fn derived_constants() {
        let p = params(2, 3, 3, 1);
        assert_eq!(p.bulk_modulus(), q(13, 3));
        assert_eq!(p.eta(), Some(q(1, 2)));
        assert_eq!(p.definiteness(), Definiteness::PositiveDefinite);
        assert_eq!(params(1, 1, 1, 0).definiteness(), Definiteness::Conformal);
        assert!(MaterialParams::new(q(0, 1), q(1, 1), q(1, 1), q(1, 1)).is_err());
    }
}
