//! Surface and line tractions in the weakly independent, strongly independent
//! and third-order formulations, the maps between them, and the conversion
//! between curl and normal-derivative kinematic data.

use serde::Serialize;

use crate::constitutive::{self as cst, MaterialParams, StressState};
use crate::poly_fields::{Jet, Poly, PolyVec};
use crate::scalar::{rational, Dual, Field, Ring};
use crate::surface_geom::{
    grad_colon, projectors, tangential_gradient_contraction, CurvePoint, GeometryError, LevelSurface, SurfacePoint,
};
use crate::tensor_core::{Mat3, Ten3, Ten4, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Formulation {
    MindlinTiersten,
    StronglyIndependent,
    ThirdOrder,
}

impl Formulation {
    pub const ALL: [Formulation; 3] =
        [Formulation::MindlinTiersten, Formulation::StronglyIndependent, Formulation::ThirdOrder];

    pub fn tag(&self) -> &'static str {
        match self {
            Formulation::MindlinTiersten => "mindlin-tiersten",
            Formulation::StronglyIndependent => "strongly-independent",
            Formulation::ThirdOrder => "third-order",
        }
    }
}

/// Line traction variants on a curve separating two boundary regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LineForm {
    /// `½⟦anti(m̃·n)·ν⟧`
    Skew,
    /// `½⟦anti(T·m̃·n)·ν⟧`
    SkewTangential,
    /// `⟦anti(T·m̃·n)·ν⟧`, as printed in the final strongly independent set.
    SkewTangentialUnscaled,
    /// `⟦(𝔪̃·n)·ν⟧`
    ThirdOrder,
}

impl LineForm {
    pub const ALL: [LineForm; 4] =
        [LineForm::Skew, LineForm::SkewTangential, LineForm::SkewTangentialUnscaled, LineForm::ThirdOrder];
}

/// Tractions of one formulation at a boundary point.
///
/// `g_normal` is the normal component `⟨g, n⟩`. It is kept for reporting only:
/// it does no work against any admissible variation and never enters a traction formula.
#[derive(Debug, Clone, PartialEq)]
pub struct TractionSet<S> {
    pub formulation: Formulation,
    pub t: Vec3<S>,
    pub g: Vec3<S>,
    pub g_normal: S,
    pub line: Option<Vec3<S>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvertDirection {
    /// Tangential normal derivative `T·∇u·n` to tangential curl `T·curl u`.
    NormalToCurl,
    /// Tangential curl to tangential normal derivative.
    CurlToNormal,
}

fn half() -> crate::scalar::Rational {
    rational(1, 2)
}

fn lift_mat<S: Ring>(value: &Mat3<S>, deriv: &Ten3<S>) -> Mat3<Dual<S>> {
    Mat3::from_fn(|i, j| Dual {
        value: value.at(i, j).clone(),
        grad: std::array::from_fn(|p| deriv.at(i, j, p).clone()),
    })
}

fn lift_ten3<S: Ring>(value: &Ten3<S>, deriv: &Ten4<S>) -> Ten3<Dual<S>> {
    Ten3::from_fn(|i, j, k| Dual {
        value: value.at(i, j, k).clone(),
        grad: std::array::from_fn(|p| deriv.at(i, j, k, p).clone()),
    })
}

fn values<S: Clone>(v: &Vec3<Dual<S>>) -> Vec3<S> {
    v.map(|d| d.value.clone())
}

/// Field and geometry data at one regular boundary point, with the first
/// derivatives of `∇u` and `∇∇u` carried along so that surface composites
/// can be differentiated exactly.
#[derive(Debug, Clone)]
pub struct BoundaryState<S> {
    pub point: SurfacePoint<S>,
    pub jet: Jet<S>,
    pub stress: StressState<S>,
    params: MaterialParams,
    couple_dual: Mat3<Dual<S>>,
    hyper_dual: Ten3<Dual<S>>,
}

impl<S: Field> BoundaryState<S> {
    pub fn new(params: &MaterialParams, jet: &Jet<Poly>, surface: &LevelSurface, x: Vec3<S>) -> Result<Self, GeometryError> {
        let point = surface.point(x)?;
        let jet = jet.eval(&point.x);
        Ok(Self::from_parts(params, point, jet))
    }

    pub fn from_field(params: &MaterialParams, u: &PolyVec, surface: &LevelSurface, x: Vec3<S>) -> Result<Self, GeometryError> {
        Self::new(params, &Jet::of(u), surface, x)
    }

    pub fn from_parts(params: &MaterialParams, point: SurfacePoint<S>, jet: Jet<S>) -> Self {
        let hess_dual = lift_ten3(&jet.hess, &jet.third);
        let stress = StressState::from_jet(params, &jet);
        BoundaryState {
            couple_dual: cst::couple_stress(params, &hess_dual),
            hyper_dual: cst::hyperstress(params, &hess_dual),
            stress,
            jet,
            point,
            params: params.clone(),
        }
    }

    pub fn params(&self) -> &MaterialParams {
        &self.params
    }

    /// `∇u` carrying its gradient.
    pub fn grad_dual(&self) -> Mat3<Dual<S>> {
        lift_mat(&self.jet.grad, &self.jet.hess)
    }

    fn n(&self) -> &Vec3<S> {
        &self.point.normal
    }

    fn t_proj(&self) -> &Mat3<S> {
        &self.point.tangential
    }

    /// `m̃·n`
    pub fn couple_normal(&self) -> Vec3<S> {
        self.stress.couple.apply(self.n())
    }

    /// `T·m̃·n` with its gradient.
    fn tangential_couple_dual(&self) -> Vec3<Dual<S>> {
        self.point.dual_tangential().apply(&self.couple_dual.apply(&self.point.dual_normal))
    }

    /// `ψ = ⟨n, (sym m̃)·n⟩` with its gradient.
    pub fn normal_couple_dual(&self) -> Dual<S> {
        let n = &self.point.dual_normal;
        n.dot(&self.couple_dual.sym().apply(n))
    }

    /// `(σ − ½ anti Div m̃)·n`
    fn reduced_stress_normal(&self) -> Vec3<S> {
        (self.stress.cauchy.clone() - self.stress.nonlocal.clone()).apply(self.n())
    }

    /// `n × ∇ψ`
    pub fn normal_curvature_term(&self) -> Vec3<S> {
        self.n().cross(&Vec3(self.normal_couple_dual().grad))
    }

    /// `t̃^int = (σ − ½anti Div m̃)·n − ½ n×∇ψ`
    pub fn traction_mindlin(&self) -> Vec3<S> {
        self.reduced_stress_normal() - self.normal_curvature_term().scale_q(&half())
    }

    /// `g̃^int = T·m̃·n`
    pub fn doubleforce_mindlin(&self) -> Vec3<S> {
        self.t_proj().apply(&self.couple_normal())
    }

    /// `∇[anti(T·m̃·n)·T] : T`
    pub fn strong_correction(&self) -> Vec3<S> {
        tangential_gradient_contraction(&self.tangential_couple_dual().anti(), &self.point)
    }

    /// `∇[anti(m̃·n)·T] : T`
    pub fn skew_correction(&self) -> Vec3<S> {
        tangential_gradient_contraction(&self.couple_dual.apply(&self.point.dual_normal).anti(), &self.point)
    }

    /// `∇[(𝔪̃·n)·T] : T`
    pub fn third_order_correction(&self) -> Vec3<S> {
        tangential_gradient_contraction(&self.hyper_dual.dot_vec(&self.point.dual_normal), &self.point)
    }

    /// `t^int = t̃^int − ½∇[anti(T·m̃·n)·T] : T`
    pub fn traction_strong(&self) -> Vec3<S> {
        self.traction_mindlin() - self.strong_correction().scale_q(&half())
    }

    /// `(σ − ½anti Div m̃)·n − ½∇[anti(m̃·n)·T] : T`
    pub fn traction_strong_skew(&self) -> Vec3<S> {
        self.reduced_stress_normal() - self.skew_correction().scale_q(&half())
    }

    /// `(σ − Div 𝔪̃)·n − ∇[(𝔪̃·n)·T] : T`
    pub fn traction_third_order(&self) -> Vec3<S> {
        let div_hyper = cst::hyperstress_div(&self.params, &self.jet.third);
        (self.stress.cauchy.clone() - div_hyper).apply(self.n()) - self.third_order_correction()
    }

    /// `g^int = (T·m̃·n) × n`
    pub fn doubleforce_strong(&self) -> Vec3<S> {
        self.doubleforce_mindlin().cross(self.n())
    }

    /// `anti(T·m̃·n)·n`
    pub fn doubleforce_strong_anti(&self) -> Vec3<S> {
        self.doubleforce_mindlin().anti().apply(self.n())
    }

    /// `T·(𝔪̃·n)·n`
    pub fn doubleforce_third_order(&self) -> Vec3<S> {
        self.t_proj().apply(&self.stress.hyper.dot_vec(self.n()).apply(self.n()))
    }

    /// `t^int − t̃^int`
    pub fn mixed_case_residual(&self) -> Vec3<S> {
        -self.strong_correction().scale_q(&half())
    }

    /// `½∇[anti(m̃·n)·T]:T − ½ n×∇ψ − ½∇[anti(T·m̃·n)·T]:T`
    pub fn comparison_residual(&self) -> Vec3<S> {
        (self.skew_correction() - self.normal_curvature_term() - self.strong_correction()).scale_q(&half())
    }

    /// The three expressions of `B`: `𝔪̃·n`, `½ anti(m̃·n)`, and the index form
    /// `α₁/2 (u_{i,j}−u_{j,i})_{,p} n_p + (α₁−α₂)/4 [(u_{p,i}−u_{i,p})_{,p} n_j + (u_{j,p}−u_{p,j})_{,p} n_i]`,
    /// followed by `α₁[∇(skew∇u)]·n + (α₁−α₂)/2 skew[∇(div u)⊗n − Div(∇u)⊗n]`.
    pub fn b_tensor_forms(&self) -> [Mat3<S>; 4] {
        b_tensor_forms(&self.params, &self.jet.hess, self.n())
    }

    /// All three traction sets at this point.
    pub fn traction_sets(&self) -> [TractionSet<S>; 3] {
        Formulation::ALL.map(|f| self.traction_set(f))
    }

    pub fn traction_set(&self, formulation: Formulation) -> TractionSet<S> {
        let (t, g) = match formulation {
            Formulation::MindlinTiersten => (self.traction_mindlin(), self.doubleforce_mindlin()),
            Formulation::StronglyIndependent => (self.traction_strong(), self.doubleforce_strong()),
            Formulation::ThirdOrder => (self.traction_third_order(), self.doubleforce_third_order()),
        };
        let g_normal = g.dot(self.n());
        TractionSet { formulation, t, g, g_normal, line: None }
    }
}

pub fn b_tensor_forms<S: Ring>(params: &MaterialParams, hess: &Ten3<S>, n: &Vec3<S>) -> [Mat3<S>; 4] {
    let a1 = params.alpha1();
    let c = (params.alpha1() - params.alpha2()) / rational(4, 1);
    let sum3 = |f: &dyn Fn(usize) -> S| (0..3).fold(S::zero(), |acc, p| acc + f(p));
    let grad_div = Vec3::from_fn(|i| sum3(&|p| hess.at(p, p, i).clone()));
    let lap = Vec3::from_fn(|i| sum3(&|p| hess.at(i, p, p).clone()));
    let index = Mat3::from_fn(|i, j| {
        let first = sum3(&|p| (hess.at(i, j, p).clone() - hess.at(j, i, p).clone()) * n[p].clone());
        let second = (grad_div[i].clone() - lap[i].clone()) * n[j].clone()
            + (lap[j].clone() - grad_div[j].clone()) * n[i].clone();
        first.scale(&(a1 / rational(2, 1))) + second.scale(&c)
    });
    let grad_skew_n = Mat3::from_fn(|i, j| {
        sum3(&|p| (hess.at(i, j, p).clone() - hess.at(j, i, p).clone()) * n[p].clone()).scale(&half())
    });
    let split = grad_skew_n.scale_q(a1) + (grad_div - lap).outer(n).skew().scale_q(&(c * rational(2, 1)));
    [
        cst::hyperstress(params, hess).dot_vec(n),
        cst::couple_stress(params, hess).apply(n).anti().scale_q(&half()),
        index,
        split,
    ]
}

/// `B = 𝔪̃·n`
pub fn b_tensor<S: Field>(u: &PolyVec, params: &MaterialParams, surface: &LevelSurface, x: Vec3<S>) -> Result<Mat3<S>, GeometryError> {
    let n = surface.normal_at(&x)?;
    let hess = Jet::of(u).eval(&x).hess;
    Ok(cst::hyperstress(params, &hess).dot_vec(&n))
}

pub fn traction_mindlin<S: Field>(u: &PolyVec, params: &MaterialParams, surface: &LevelSurface, x: Vec3<S>) -> Result<Vec3<S>, GeometryError> {
    Ok(BoundaryState::from_field(params, u, surface, x)?.traction_mindlin())
}

pub fn doubleforce_mindlin<S: Field>(u: &PolyVec, params: &MaterialParams, surface: &LevelSurface, x: Vec3<S>) -> Result<Vec3<S>, GeometryError> {
    Ok(BoundaryState::from_field(params, u, surface, x)?.doubleforce_mindlin())
}

pub fn traction_strong<S: Field>(u: &PolyVec, params: &MaterialParams, surface: &LevelSurface, x: Vec3<S>) -> Result<Vec3<S>, GeometryError> {
    Ok(BoundaryState::from_field(params, u, surface, x)?.traction_strong())
}

pub fn doubleforce_strong<S: Field>(u: &PolyVec, params: &MaterialParams, surface: &LevelSurface, x: Vec3<S>) -> Result<Vec3<S>, GeometryError> {
    Ok(BoundaryState::from_field(params, u, surface, x)?.doubleforce_strong())
}

pub fn mixed_case_residual<S: Field>(u: &PolyVec, params: &MaterialParams, surface: &LevelSurface, x: Vec3<S>) -> Result<Vec3<S>, GeometryError> {
    Ok(BoundaryState::from_field(params, u, surface, x)?.mixed_case_residual())
}

/// Line traction from two-sided data at a curve point; `ν` is the conormal of the `+` side.
pub fn line_traction<S: Ring>(
    params: &MaterialParams,
    hess_plus: &Ten3<S>,
    hess_minus: &Ten3<S>,
    curve: &CurvePoint<S>,
    form: LineForm,
) -> Vec3<S> {
    let n = &curve.normal;
    let (t, _) = projectors(n);
    let side = |hess: &Ten3<S>| -> Mat3<S> {
        match form {
            LineForm::Skew => cst::couple_stress(params, hess).apply(n).anti().scale_q(&half()),
            LineForm::SkewTangential => t.apply(&cst::couple_stress(params, hess).apply(n)).anti().scale_q(&half()),
            LineForm::SkewTangentialUnscaled => t.apply(&cst::couple_stress(params, hess).apply(n)).anti(),
            LineForm::ThirdOrder => cst::hyperstress(params, hess).dot_vec(n),
        }
    };
    (side(hess_plus) - side(hess_minus)).apply(&curve.conormal)
}

/// `anti[(n⊗n)·m̃·n]·ν` and `⟨n, m̃·n⟩ n×ν` for one side of a curve.
pub fn normal_part_line_terms<S: Ring>(couple: &Mat3<S>, curve: &CurvePoint<S>) -> [Vec3<S>; 2] {
    let n = &curve.normal;
    let (_, q) = projectors(n);
    let mn = couple.apply(n);
    [q.apply(&mn).anti().apply(&curve.conormal), n.cross(&curve.conormal).scale(&n.dot(&mn))]
}

/// `(t, g)` for the strongly independent set equivalent to given weakly independent data:
/// `g = g̃ × n`, `t = t̃ − ½∇[anti(g̃)·T] : T`. The double force `g̃` must be supplied with
/// its gradient since its tangential derivatives enter the force.
pub fn map_tractions_m2s<S: Field>(
    t_tilde: &Vec3<S>,
    g_tilde: &Vec3<Dual<S>>,
    point: &SurfacePoint<S>,
) -> (Vec3<S>, Vec3<S>) {
    let correction = grad_colon(&g_tilde.anti().dot(&point.dual_tangential()), &point.tangential);
    let g = values(g_tilde).cross(&point.normal);
    (t_tilde.clone() - correction.scale_q(&half()), g)
}

/// Inverse of [`map_tractions_m2s`] on tangential double forces: `g̃ = n × g`,
/// `t̃ = t + ½∇[anti(g̃)·T] : T`.
pub fn map_tractions_s2m<S: Field>(
    t: &Vec3<S>,
    g: &Vec3<Dual<S>>,
    point: &SurfacePoint<S>,
) -> (Vec3<S>, Vec3<Dual<S>>) {
    let g_tilde = point.dual_normal.cross(g);
    let correction = grad_colon(&g_tilde.anti().dot(&point.dual_tangential()), &point.tangential);
    (t.clone() + correction.scale_q(&half()), g_tilde)
}

impl<S: Field> BoundaryState<S> {
    /// `g̃^int` carrying its gradient, as input to [`map_tractions_m2s`].
    pub fn doubleforce_mindlin_dual(&self) -> Vec3<Dual<S>> {
        self.tangential_couple_dual()
    }
}

/// Convert between the tangential normal derivative and the tangential curl
/// of `u` at a surface point, using the tangential derivatives of `u` along
/// the frame `f₁ = T·hint`, `f₂ = n × f₁`:
///
/// `⟨f₁, curl u⟩ = ∂_{f₂}u_n − ⟨f₂, ∇u·n⟩`, `⟨f₂, curl u⟩ = ⟨f₁, ∇u·n⟩ − ∂_{f₁}u_n`.
///
/// Only `∇u·f₁` and `∇u·f₂` are read from `grad`, so the normal derivative
/// of the ambient field never enters.
pub fn kinematic_convert<S: Field>(
    grad: &Mat3<S>,
    extra: &Vec3<S>,
    direction: ConvertDirection,
    normal: &Vec3<S>,
    hint: &Vec3<S>,
) -> Result<Vec3<S>, GeometryError> {
    let (t, _) = projectors(normal);
    let f1 = t.apply(hint);
    let s2 = f1.norm_sq();
    let degenerate = if S::EXACT { s2.is_zero() } else { s2.approx() < 1e-24 };
    if degenerate {
        return Err(GeometryError::FrameDegenerate);
    }
    let f2 = normal.cross(&f1);
    let dn1 = normal.dot(&grad.apply(&f1));
    let dn2 = normal.dot(&grad.apply(&f2));
    let (a, b) = match direction {
        ConvertDirection::NormalToCurl => (dn2 - f2.dot(extra), f1.dot(extra) - dn1),
        ConvertDirection::CurlToNormal => (f2.dot(extra) + dn1, dn2 - f1.dot(extra)),
    };
    let inv = s2.inv()?;
    Ok((f1.scale(&a) + f2.scale(&b)).scale(&inv))
}

/// [`kinematic_convert`] for an ambient polynomial field at a surface point.
pub fn kinematic_convert_field<S: Field>(
    u: &PolyVec,
    extra: &Vec3<S>,
    direction: ConvertDirection,
    surface: &LevelSurface,
    x: &Vec3<S>,
    hint: &Vec3<S>,
) -> Result<Vec3<S>, GeometryError> {
    let normal = surface.normal_at(x)?;
    let grad = crate::poly_fields::grad_vec(u).map(|p| p.eval(x));
    kinematic_convert(&grad, extra, direction, &normal, hint)
}
