//! Level-set surfaces, tangential projectors, tangential differential
//! operators, and quadrature for the surface integral theorems.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::poly_fields::{self as pf, random_rational, Poly, PolyVec};
use crate::scalar::{rational, ArithError, Dual, Field, Rational, Ring};
use crate::tensor_core::{Mat3, Vec3};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("point {point} is not on surface `{surface}` (|F| = {residual:e})")]
    OffSurface { surface: String, point: String, residual: f64 },
    #[error("surface `{surface}` is singular at {point} (∇F = 0)")]
    Singular { surface: String, point: String },
    #[error("frame hint is collinear with the normal")]
    FrameDegenerate,
    #[error("patch has zero measure")]
    DegeneratePatch,
    #[error("surface `{0}` has no built-in point sampler; supply points explicitly")]
    NoSampler(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Built-in level sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    /// `x3 = 0`
    Plane,
    /// `x·x − 1 = 0`
    UnitSphere,
    /// `x1²/4 + x2² + x3² − 1 = 0`
    Ellipsoid,
    /// `x3 − x1 x2 = 0`
    Saddle,
    Custom,
}

/// Zero level set of a polynomial `F`, with normal `n = s ∇F/‖∇F‖` for orientation sign `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSurface {
    name: String,
    kind: SurfaceKind,
    level: Poly,
    level_grad: PolyVec,
    flipped: bool,
}

fn describe<S: Field>(x: &Vec3<S>) -> String {
    let v = x.approx();
    format!("({:.6}, {:.6}, {:.6})", v[0], v[1], v[2])
}

impl LevelSurface {
    pub fn new(name: impl Into<String>, level: Poly) -> Self {
        LevelSurface::with_kind(name.into(), SurfaceKind::Custom, level)
    }

    fn with_kind(name: String, kind: SurfaceKind, level: Poly) -> Self {
        let level_grad = pf::grad_scalar(&level);
        LevelSurface { name, kind, level, level_grad, flipped: false }
    }

    pub fn plane() -> Self {
        LevelSurface::with_kind("plane".into(), SurfaceKind::Plane, Poly::var(2))
    }

    pub fn unit_sphere() -> Self {
        let f = (0..3).fold(Poly::constant(rational(-1, 1)), |acc, i| acc + Poly::var(i) * Poly::var(i));
        LevelSurface::with_kind("sphere".into(), SurfaceKind::UnitSphere, f)
    }

    pub fn ellipsoid() -> Self {
        let f = Poly::monomial([2, 0, 0], rational(1, 4))
            + Poly::monomial([0, 2, 0], rational(1, 1))
            + Poly::monomial([0, 0, 2], rational(1, 1))
            - Poly::constant(rational(1, 1));
        LevelSurface::with_kind("ellipsoid".into(), SurfaceKind::Ellipsoid, f)
    }

    pub fn saddle() -> Self {
        let f = Poly::var(2) - Poly::var(0) * Poly::var(1);
        LevelSurface::with_kind("saddle".into(), SurfaceKind::Saddle, f)
    }

    /// Reverse the orientation of the normal.
    pub fn flipped(mut self) -> Self {
        self.flipped = !self.flipped;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn level(&self) -> &Poly {
        &self.level
    }

    pub fn level_gradient<S: Ring>(&self, x: &Vec3<S>) -> Vec3<S> {
        self.level_grad.map(|p| p.eval(x))
    }

    /// Exact membership for exact scalars; `|F| < 1e−12 (1 + ‖x‖^deg F)` otherwise.
    pub fn check_membership<S: Field>(&self, x: &Vec3<S>) -> Result<(), GeometryError> {
        let value = self.level.eval(x);
        let ok = if S::EXACT {
            value.is_zero()
        } else {
            let norm = x.approx().norm_sq().sqrt();
            let deg = self.level.degree().unwrap_or(0) as i32;
            value.approx().abs() < 1e-12 * (1.0 + norm.powi(deg))
        };
        if ok {
            Ok(())
        } else {
            Err(GeometryError::OffSurface {
                surface: self.name.clone(),
                point: describe(x),
                residual: value.approx().abs(),
            })
        }
    }

    /// Unit normal extended off the surface as `±∇F/‖∇F‖`, for any point where `∇F ≠ 0`.
    pub fn normal_field<S: Field>(&self, x: &Vec3<S>) -> Result<Vec3<S>, GeometryError> {
        let g = self.level_gradient(x);
        let norm_sq = g.norm_sq();
        if norm_sq.is_zero() {
            return Err(GeometryError::Singular { surface: self.name.clone(), point: describe(x) });
        }
        let mut inv = norm_sq.sqrt()?.inv()?;
        if self.flipped {
            inv = -inv;
        }
        Ok(g.scale(&inv))
    }

    pub fn normal_at<S: Field>(&self, x: &Vec3<S>) -> Result<Vec3<S>, GeometryError> {
        self.check_membership(x)?;
        self.normal_field(x)
    }

    pub fn projectors_at<S: Field>(&self, x: &Vec3<S>) -> Result<(Mat3<S>, Mat3<S>), GeometryError> {
        let n = self.normal_at(x)?;
        Ok(projectors(&n))
    }

    pub fn point<S: Field>(&self, x: Vec3<S>) -> Result<SurfacePoint<S>, GeometryError> {
        self.check_membership(&x)?;
        let dual_x = dual_point(&x);
        let dual_normal = self.normal_field(&dual_x)?;
        let normal = dual_normal.map(|d| d.value.clone());
        let (tangential, normal_proj) = projectors(&normal);
        Ok(SurfacePoint { x, normal, tangential, normal_proj, dual_x, dual_normal })
    }

    /// Orthonormal triad `(τ, ν, n)` with `ν` along the tangential part of `hint`
    /// and `τ = n × ν`.
    pub fn triad_at<S: Field>(&self, x: &Vec3<S>, hint: &Vec3<S>) -> Result<Triad<S>, GeometryError> {
        let n = self.normal_at(x)?;
        let (t, _) = projectors(&n);
        let v = t.apply(hint);
        let len_sq = v.norm_sq();
        let degenerate = if S::EXACT { len_sq.is_zero() } else { len_sq.approx() < 1e-24 };
        if degenerate {
            return Err(GeometryError::FrameDegenerate);
        }
        let len = len_sq.sqrt()?;
        if n.0.iter().any(|c| !c.compatible(&len)) {
            return Err(ArithError::NotRepresentable("unit conormal needs a second radicand".into()).into());
        }
        let conormal = v.scale(&len.inv()?);
        let tangent = n.cross(&conormal);
        Ok(Triad { tangent, conormal, normal: n })
    }

    /// Exact rational points on a built-in surface, drawn deterministically from `seed`.
    pub fn sample_points(&self, seed: u64, count: usize) -> Result<Vec<Vec3<Rational>>, GeometryError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts = Vec::with_capacity(count);
        while pts.len() < count {
            let a = random_rational(&mut rng, 3, 7);
            let b = random_rational(&mut rng, 3, 7);
            let x = match self.kind {
                SurfaceKind::Plane => Vec3([a, b, Rational::from_integer(0.into())]),
                SurfaceKind::Saddle => Vec3([a.clone(), b.clone(), a * b]),
                SurfaceKind::UnitSphere => sphere_point(&a, &b),
                SurfaceKind::Ellipsoid => {
                    let s = sphere_point(&a, &b);
                    Vec3([s[0].clone() * rational(2, 1), s[1].clone(), s[2].clone()])
                }
                SurfaceKind::Custom => return Err(GeometryError::NoSampler(self.name.clone())),
            };
            if self.level_gradient(&x).is_zero() {
                continue;
            }
            pts.push(x);
        }
        Ok(pts)
    }
}

/// Inverse stereographic projection from the south pole onto the unit sphere.
pub fn sphere_point(s: &Rational, t: &Rational) -> Vec3<Rational> {
    let r2 = s * s + t * t;
    let den = &r2 + rational(1, 1);
    Vec3([s * rational(2, 1) / &den, t * rational(2, 1) / &den, (r2 - rational(1, 1)) / den])
}

/// `T = 𝟙 − n⊗n`, `Q = n⊗n`
pub fn projectors<R: Ring>(n: &Vec3<R>) -> (Mat3<R>, Mat3<R>) {
    let q = n.outer(n);
    (Mat3::identity() - q.clone(), q)
}

/// The point lifted to dual numbers seeded with the coordinate directions.
pub fn dual_point<S: Ring>(x: &Vec3<S>) -> Vec3<Dual<S>> {
    Vec3::from_fn(|i| Dual::variable(x[i].clone(), i))
}

/// Regular surface point with normal, projectors, and their first-order jets.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint<S> {
    pub x: Vec3<S>,
    pub normal: Vec3<S>,
    pub tangential: Mat3<S>,
    pub normal_proj: Mat3<S>,
    pub dual_x: Vec3<Dual<S>>,
    pub dual_normal: Vec3<Dual<S>>,
}

impl<S: Field> SurfacePoint<S> {
    pub fn dual_tangential(&self) -> Mat3<Dual<S>> {
        projectors(&self.dual_normal).0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triad<S> {
    pub tangent: Vec3<S>,
    pub conormal: Vec3<S>,
    pub normal: Vec3<S>,
}

/// `(∇M : T)_i = ∂_p M_ij T_pj` for a matrix field given with its gradient.
pub fn grad_colon<S: Ring>(m: &Mat3<Dual<S>>, t: &Mat3<S>) -> Vec3<S> {
    Vec3::from_fn(|i| {
        let mut acc = S::zero();
        for j in 0..3 {
            for p in 0..3 {
                acc = acc + m.0[i][j].grad[p].clone() * t.0[p][j].clone();
            }
        }
        acc
    })
}

/// `∇[M·T] : T` at a surface point, with `T` differentiated along with `M`.
pub fn tangential_gradient_contraction<S: Field>(m: &Mat3<Dual<S>>, p: &SurfacePoint<S>) -> Vec3<S> {
    grad_colon(&m.dot(&p.dual_tangential()), &p.tangential)
}

/// `∇[anti(n)] : T`
pub fn anti_normal_vanishing<S: Field>(surface: &LevelSurface, x: &Vec3<S>) -> Result<Vec3<S>, GeometryError> {
    let p = surface.point(x.clone())?;
    Ok(grad_colon(&p.dual_normal.anti(), &p.tangential))
}

/// Surface divergence `⟨T, ∇(T·v)⟩` of a vector field given with its gradient.
pub fn surface_divergence_density<S: Field>(v: &Vec3<Dual<S>>, p: &SurfacePoint<S>) -> S {
    let tv = p.dual_tangential().apply(v);
    let mut acc = S::zero();
    for i in 0..3 {
        for j in 0..3 {
            acc = acc + p.tangential.0[i][j].clone() * tv[i].grad[j].clone();
        }
    }
    acc
}

/// `⟦⟨a, ν⟩⟧ = ⟨a⁺ − a⁻, ν⟩`
pub fn jump<S: Ring>(a_plus: &Vec3<S>, a_minus: &Vec3<S>, conormal: &Vec3<S>) -> S {
    (a_plus.clone() - a_minus.clone()).dot(conormal)
}

/// `⟦A·ν⟧ = (A⁺ − A⁻)·ν`
pub fn jump_mat<S: Ring>(a_plus: &Mat3<S>, a_minus: &Mat3<S>, conormal: &Vec3<S>) -> Vec3<S> {
    (a_plus.clone() - a_minus.clone()).apply(conormal)
}

/// Point on the boundary curve of a patch with its Darboux-type frame:
/// `ν` points out of the patch and `τ = n × ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint<S> {
    pub x: Vec3<S>,
    pub normal: Vec3<S>,
    pub conormal: Vec3<S>,
    pub tangent: Vec3<S>,
}

/// Rational point on the unit circle `x3 = 0`, seen as the boundary of the
/// upper (`upper = true`) or lower hemisphere. Every frame vector is rational.
pub fn equator_point<S: Ring>(s: &Rational, upper: bool) -> CurvePoint<S> {
    let den = s * s + rational(1, 1);
    let x: Vec3<S> = Vec3([
        S::from_rational(&((rational(1, 1) - s * s) / &den)),
        S::from_rational(&(s * rational(2, 1) / &den)),
        S::zero(),
    ]);
    let sign = if upper { -1 } else { 1 };
    let conormal: Vec3<S> = Vec3([S::zero(), S::zero(), S::from_int(sign)]);
    let tangent = x.cross(&conormal);
    CurvePoint { normal: x.clone(), x, conormal, tangent }
}

/// Patches with a boundary curve, used for the integral theorems.
#[derive(Debug, Clone, PartialEq)]
pub enum Patch {
    /// Half of the unit sphere bounded by the equator.
    Hemisphere { upper: bool },
    /// Disc of the given radius centred at the origin in the plane `x3 = 0`.
    Disc { radius: Rational },
}

/// Quadrature node on a patch.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchNode {
    pub x: Vec3<f64>,
    pub weight: f64,
}

impl Patch {
    pub fn surface(&self) -> LevelSurface {
        match self {
            Patch::Hemisphere { .. } => LevelSurface::unit_sphere(),
            Patch::Disc { .. } => LevelSurface::plane(),
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        match self {
            Patch::Disc { radius } if !radius.is_positive() => Err(GeometryError::DegeneratePatch),
            _ => Ok(()),
        }
    }

    /// Tensor-product Gauss–Legendre nodes with `nodes` points per parameter.
    pub fn surface_nodes(&self, nodes: usize) -> Result<Vec<PatchNode>, GeometryError> {
        self.validate()?;
        let (a_range, b_range) = match self {
            Patch::Hemisphere { upper: true } => ((0.0, PI / 2.0), (0.0, 2.0 * PI)),
            Patch::Hemisphere { upper: false } => ((PI / 2.0, PI), (0.0, 2.0 * PI)),
            Patch::Disc { radius } => ((0.0, f64::from_rational(radius)), (0.0, 2.0 * PI)),
        };
        let ra = gauss_rule(nodes, a_range);
        let rb = gauss_rule(nodes, b_range);
        let mut out = Vec::with_capacity(nodes * nodes);
        for &(a, wa) in &ra {
            for &(b, wb) in &rb {
                let (x, jac) = match self {
                    Patch::Hemisphere { .. } => {
                        (Vec3([a.sin() * b.cos(), a.sin() * b.sin(), a.cos()]), a.sin())
                    }
                    Patch::Disc { .. } => (Vec3([a * b.cos(), a * b.sin(), 0.0]), a),
                };
                out.push(PatchNode { x, weight: wa * wb * jac });
            }
        }
        Ok(out)
    }

    pub fn boundary_point(&self, angle: f64) -> (CurvePoint<f64>, f64) {
        let (c, s) = (angle.cos(), angle.sin());
        match self {
            Patch::Hemisphere { upper } => {
                let x = Vec3([c, s, 0.0]);
                let conormal = Vec3([0.0, 0.0, if *upper { -1.0 } else { 1.0 }]);
                let tangent = x.cross(&conormal);
                (CurvePoint { normal: x.clone(), x, conormal, tangent }, 1.0)
            }
            Patch::Disc { radius } => {
                let radius = f64::from_rational(radius);
                let normal = Vec3([0.0, 0.0, 1.0]);
                let conormal = Vec3([c, s, 0.0]);
                let tangent = normal.cross(&conormal);
                (CurvePoint { x: conormal.scale(&radius), normal, conormal, tangent }, radius)
            }
        }
    }

    /// Gauss–Legendre nodes on the boundary curve, weights include the arc-length factor.
    pub fn boundary_nodes(&self, nodes: usize) -> Result<Vec<(CurvePoint<f64>, f64)>, GeometryError> {
        self.validate()?;
        Ok(gauss_rule(nodes, (0.0, 2.0 * PI))
            .into_iter()
            .map(|(t, w)| {
                let (p, speed) = self.boundary_point(t);
                (p, w * speed)
            })
            .collect())
    }
}

/// Gauss–Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss_rule(nodes: usize, (a, b): (f64, f64)) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(nodes.max(1)).expect("nonzero"));
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.into_node_weight_pairs().iter().map(|&(x, w)| (mid + half * x, half * w)).collect()
}

/// Sum in a fixed pairwise tree so results do not depend on thread scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Both sides of an integral identity.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IntegralPair {
    pub surface: f64,
    pub boundary: f64,
}

impl IntegralPair {
    pub fn residual(&self) -> f64 {
        (self.surface - self.boundary).abs()
    }
}

fn integrate_surface(
    patch: &Patch,
    nodes: usize,
    f: impl Fn(&SurfacePoint<f64>) -> Result<f64, GeometryError> + Sync,
) -> Result<f64, GeometryError> {
    let surface = patch.surface();
    let values: Vec<f64> = patch
        .surface_nodes(nodes)?
        .par_iter()
        .map(|node| {
            let p = surface.point(node.x.clone())?;
            Ok(f(&p)? * node.weight)
        })
        .collect::<Result<_, GeometryError>>()?;
    Ok(pairwise_sum(&values))
}

fn integrate_boundary(
    patch: &Patch,
    nodes: usize,
    f: impl Fn(&CurvePoint<f64>) -> f64 + Sync,
) -> Result<f64, GeometryError> {
    let values: Vec<f64> = patch.boundary_nodes(nodes)?.par_iter().map(|(c, w)| f(c) * w).collect();
    Ok(pairwise_sum(&values))
}

/// `∫_S ⟨T, ∇(T·v)⟩ da` against `∫_∂S ⟨v, ν⟩ ds`.
pub fn surface_divergence(patch: &Patch, v: &PolyVec, nodes: usize) -> Result<IntegralPair, GeometryError> {
    let surface = integrate_surface(patch, nodes, |p| {
        let vd = pf::eval_vec(v, &p.dual_x);
        Ok(surface_divergence_density(&vd, p))
    })?;
    let boundary = integrate_boundary(patch, nodes, |c| pf::eval_vec(v, &c.x).dot(&c.conormal))?;
    Ok(IntegralPair { surface, boundary })
}

/// Closed sphere split along the equator: `∫_Γ Div^S v⁺ + ∫_{S∖Γ} Div^S v⁻`
/// against `∮ ⟦⟨v, ν⟩⟧ ds` with `ν` pointing out of the upper hemisphere `Γ`.
pub fn surface_divergence_split(v_plus: &PolyVec, v_minus: &PolyVec, nodes: usize) -> Result<IntegralPair, GeometryError> {
    let upper = Patch::Hemisphere { upper: true };
    let lower = Patch::Hemisphere { upper: false };
    let density = |v: &PolyVec| {
        let v = v.clone();
        move |p: &SurfacePoint<f64>| Ok(surface_divergence_density(&pf::eval_vec(&v, &p.dual_x), p))
    };
    let surface = integrate_surface(&upper, nodes, density(v_plus))? + integrate_surface(&lower, nodes, density(v_minus))?;
    let boundary = integrate_boundary(&upper, nodes, |c| {
        jump(&pf::eval_vec(v_plus, &c.x), &pf::eval_vec(v_minus, &c.x), &c.conormal)
    })?;
    Ok(IntegralPair { surface, boundary })
}

/// `∫_Γ ⟨curl u, n⟩ da` against `∮_∂Γ ⟨u, τ⟩ ds`.
pub fn stokes_circulation(patch: &Patch, u: &PolyVec, nodes: usize) -> Result<IntegralPair, GeometryError> {
    let curl = pf::curl_vec(u);
    let surface = integrate_surface(patch, nodes, |p| Ok(pf::eval_vec(&curl, &p.x).dot(&p.normal)))?;
    let boundary = integrate_boundary(patch, nodes, |c| pf::eval_vec(u, &c.x).dot(&c.tangent))?;
    Ok(IntegralPair { surface, boundary })
}

/// `∮ ⟨τ, ψ δu⟩ ds` against `∫ ⟨n, curl(ψ δu)⟩ da`, where `ψ` is an arbitrary
/// scalar composite supplied together with its gradient.
pub fn stokes_scalar_weighted(
    patch: &Patch,
    psi: impl Fn(&SurfacePoint<f64>) -> Result<Dual<f64>, GeometryError> + Sync,
    psi_on_curve: impl Fn(&CurvePoint<f64>) -> Result<f64, GeometryError> + Sync,
    du: &PolyVec,
    nodes: usize,
) -> Result<IntegralPair, GeometryError> {
    let curl_du = pf::curl_vec(du);
    let surface = integrate_surface(patch, nodes, |p| {
        let w = psi(p)?;
        let grad = Vec3(w.grad);
        let field = pf::eval_vec(du, &p.x);
        let curl = grad.cross(&field) + pf::eval_vec(&curl_du, &p.x).scale(&w.value);
        Ok(curl.dot(&p.normal))
    })?;
    let boundary_values: Vec<f64> = patch
        .boundary_nodes(nodes)?
        .par_iter()
        .map(|(c, w)| Ok(psi_on_curve(c)? * pf::eval_vec(du, &c.x).dot(&c.tangent) * w))
        .collect::<Result<_, GeometryError>>()?;
    Ok(IntegralPair { surface, boundary: pairwise_sum(&boundary_values) })
}

/// Both sides of an integral identity over polynomial integrands, each stored
/// as the rational coefficient `c` of the exact value `c·π`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPair {
    pub surface: Rational,
    pub boundary: Rational,
}

impl ExactPair {
    pub fn residual(&self) -> Rational {
        &self.surface - &self.boundary
    }
}

fn double_factorial(n: i64) -> Rational {
    let mut acc = rational(1, 1);
    let mut k = n;
    while k > 1 {
        acc *= rational(k, 1);
        k -= 2;
    }
    acc
}

/// `(1/π) ∫₀^{2π} cos^a φ sin^b φ dφ`
fn circle_moment(a: u32, b: u32) -> Rational {
    if a % 2 == 1 || b % 2 == 1 {
        return rational(0, 1);
    }
    let (a, b) = (a as i64, b as i64);
    double_factorial(a - 1) * double_factorial(b - 1) * rational(2, 1) / double_factorial(a + b)
}

/// `∫ sin^p θ cos^c θ dθ` over the polar range of a hemisphere, for odd `p`.
fn polar_moment(p: u32, c: u32, upper: bool) -> Rational {
    debug_assert!(p % 2 == 1);
    let m = (p - 1) / 2;
    let mut binom = rational(1, 1);
    let mut acc = rational(0, 1);
    for k in 0..=m {
        let term = &binom / rational(c as i64 + 2 * k as i64 + 1, 1);
        if k % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
        binom = binom * rational((m - k) as i64, (k + 1) as i64);
    }
    if !upper && c % 2 == 1 {
        -acc
    } else {
        acc
    }
}

fn rational_pow(r: &Rational, e: u32) -> Rational {
    (0..e).fold(rational(1, 1), |acc, _| acc * r)
}

fn poly_vec(v: [Poly; 3]) -> PolyVec {
    Vec3(v)
}

impl Patch {
    /// Unit normal as a polynomial field that agrees with the true normal and
    /// its tangential derivatives on the patch.
    pub fn normal_poly(&self) -> PolyVec {
        match self {
            Patch::Hemisphere { .. } => Vec3::from_fn(Poly::var),
            Patch::Disc { .. } => Vec3::basis(2),
        }
    }

    /// Outward conormal along the boundary curve, as a polynomial field.
    pub fn conormal_poly(&self) -> PolyVec {
        match self {
            Patch::Hemisphere { upper } => {
                let sign = if *upper { -1 } else { 1 };
                poly_vec([Poly::zero(), Poly::zero(), Poly::from_int(sign)])
            }
            Patch::Disc { radius } => {
                let inv = rational(1, 1) / radius;
                poly_vec([Poly::var(0).scale(&inv), Poly::var(1).scale(&inv), Poly::zero()])
            }
        }
    }

    /// `τ = n × ν` along the boundary curve, as a polynomial field.
    pub fn tangent_poly(&self) -> PolyVec {
        self.normal_poly().cross(&self.conormal_poly())
    }

    /// `(1/π) ∫_S f da` for a polynomial `f`.
    pub fn integrate_exact(&self, f: &Poly) -> Result<Rational, GeometryError> {
        self.validate()?;
        let mut acc = rational(0, 1);
        for (m, coeff) in f.terms() {
            let [a, b, c] = m.0;
            let around = circle_moment(a, b);
            if around.is_zero() {
                continue;
            }
            let moment = match self {
                Patch::Hemisphere { upper } => around * polar_moment(a + b + 1, c, *upper),
                Patch::Disc { radius } if c == 0 => {
                    around * rational_pow(radius, a + b + 2) / rational((a + b + 2) as i64, 1)
                }
                Patch::Disc { .. } => rational(0, 1),
            };
            acc += coeff * moment;
        }
        Ok(acc)
    }

    /// `(1/π) ∮_∂S f ds` for a polynomial `f`.
    pub fn integrate_boundary_exact(&self, f: &Poly) -> Result<Rational, GeometryError> {
        self.validate()?;
        let scale = match self {
            Patch::Hemisphere { .. } => rational(1, 1),
            Patch::Disc { radius } => radius.clone(),
        };
        let mut acc = rational(0, 1);
        for (m, coeff) in f.terms() {
            let [a, b, c] = m.0;
            if c == 0 {
                acc += coeff * circle_moment(a, b) * rational_pow(&scale, a + b + 1);
            }
        }
        Ok(acc)
    }
}

/// `⟨T, ∇(T·v)⟩` as a polynomial, with `T` built from a polynomial normal extension.
pub fn surface_divergence_poly(v: &PolyVec, normal: &PolyVec) -> Poly {
    let t = Mat3::identity() - normal.outer(normal);
    let tv = t.apply(v);
    let mut acc = Poly::zero();
    for i in 0..3 {
        for j in 0..3 {
            acc = acc + t.0[i][j].clone() * tv[i].diff(j);
        }
    }
    acc
}

pub fn surface_divergence_exact(patch: &Patch, v: &PolyVec) -> Result<ExactPair, GeometryError> {
    let surface = patch.integrate_exact(&surface_divergence_poly(v, &patch.normal_poly()))?;
    let boundary = patch.integrate_boundary_exact(&v.dot(&patch.conormal_poly()))?;
    Ok(ExactPair { surface, boundary })
}

pub fn surface_divergence_split_exact(v_plus: &PolyVec, v_minus: &PolyVec) -> Result<ExactPair, GeometryError> {
    let upper = Patch::Hemisphere { upper: true };
    let lower = Patch::Hemisphere { upper: false };
    let n = upper.normal_poly();
    let surface = upper.integrate_exact(&surface_divergence_poly(v_plus, &n))?
        + lower.integrate_exact(&surface_divergence_poly(v_minus, &n))?;
    let jump = (v_plus.clone() - v_minus.clone()).dot(&upper.conormal_poly());
    let boundary = upper.integrate_boundary_exact(&jump)?;
    Ok(ExactPair { surface, boundary })
}

pub fn stokes_circulation_exact(patch: &Patch, u: &PolyVec) -> Result<ExactPair, GeometryError> {
    let surface = patch.integrate_exact(&pf::curl_vec(u).dot(&patch.normal_poly()))?;
    let boundary = patch.integrate_boundary_exact(&u.dot(&patch.tangent_poly()))?;
    Ok(ExactPair { surface, boundary })
}

/// `∮ ⟨τ, ψ δu⟩ ds` against `∫ ⟨n, curl(ψ δu)⟩ da` for a polynomial weight `ψ`.
pub fn stokes_scalar_weighted_exact(patch: &Patch, psi: &Poly, du: &PolyVec) -> Result<ExactPair, GeometryError> {
    let weighted = du.scale(psi);
    stokes_circulation_exact(patch, &weighted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Surd;

    #[test]
    fn sphere_north_pole() {
        let s = LevelSurface::unit_sphere();
        let x: Vec3<Surd> = Vec3([Surd::zero(), Surd::zero(), Surd::one()]);
        let (t, q) = s.projectors_at(&x).unwrap();
        assert_eq!(s.normal_at(&x).unwrap(), Vec3([Surd::zero(), Surd::zero(), Surd::one()]));
        assert_eq!(t, Mat3::from_fn(|i, j| if i == j && i < 2 { Surd::one() } else { Surd::zero() }));
        assert_eq!(t + q, Mat3::identity());
    }

    #[test]
    fn ellipsoid_tip() {
        let s = LevelSurface::ellipsoid();
        let x: Vec3<Surd> = Vec3([Surd::from_int(2), Surd::zero(), Surd::zero()]);
        assert_eq!(s.normal_at(&x).unwrap(), Vec3::basis(0));
    }

    #[test]
    fn membership_and_singularity() {
        let s = LevelSurface::unit_sphere();
        let off: Vec3<Surd> = Vec3([Surd::one(), Surd::one(), Surd::zero()]);
        assert!(matches!(s.normal_at(&off), Err(GeometryError::OffSurface { .. })));
        let cone = LevelSurface::new("cone", crate::poly_fields::parse_poly("x1^2 + x2^2 - x3^2").unwrap());
        let apex: Vec3<Surd> = Vec3::zero();
        assert!(matches!(cone.normal_at(&apex), Err(GeometryError::Singular { .. })));
    }

    #[test]
    fn sampled_points_lie_on_surfaces() {
        for s in [LevelSurface::plane(), LevelSurface::unit_sphere(), LevelSurface::ellipsoid(), LevelSurface::saddle()] {
            for x in s.sample_points(11, 10).unwrap() {
                let xs: Vec3<Surd> = Vec3::from_rationals(&x);
                s.check_membership(&xs).unwrap();
            }
        }
    }

    #[test]
    fn triad_degenerate_hint() {
        let s = LevelSurface::plane();
        let x: Vec3<f64> = Vec3([0.3, 0.2, 0.0]);
        assert!(matches!(s.triad_at(&x, &Vec3([0.0, 0.0, 2.0])), Err(GeometryError::FrameDegenerate)));
        let t = s.triad_at(&x, &Vec3([1.0, 1.0, 5.0])).unwrap();
        assert!((t.tangent.cross(&t.conormal).dot(&t.normal) + 1.0).abs() < 1e-14);
        assert!((t.normal.cross(&t.conormal).dot(&t.tangent) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn disc_circulation_is_two_pi() {
        let u = crate::poly_fields::parse_poly_vec("-x2; x1; 0").unwrap();
        let pair = stokes_circulation(&Patch::Disc { radius: rational(1, 1) }, &u, 16).unwrap();
        assert!((pair.surface - 2.0 * PI).abs() < 1e-12);
        assert!((pair.boundary - 2.0 * PI).abs() < 1e-12);
        assert!(Patch::Disc { radius: rational(0, 1) }.surface_nodes(4).is_err());
    }

    #[test]
    fn exact_moments() {
        let upper = Patch::Hemisphere { upper: true };
        let one = Poly::one();
        assert_eq!(upper.integrate_exact(&one).unwrap(), rational(2, 1));
        assert_eq!(upper.integrate_boundary_exact(&one).unwrap(), rational(2, 1));
        let z = Poly::var(2);
        assert_eq!(upper.integrate_exact(&z).unwrap(), rational(1, 1));
        assert_eq!(Patch::Hemisphere { upper: false }.integrate_exact(&z).unwrap(), rational(-1, 1));
        let disc = Patch::Disc { radius: rational(2, 1) };
        assert_eq!(disc.integrate_exact(&one).unwrap(), rational(4, 1));
        let u = crate::poly_fields::parse_poly_vec("-x2; x1; 0").unwrap();
        let pair = stokes_circulation_exact(&Patch::Disc { radius: rational(1, 1) }, &u).unwrap();
        assert_eq!(pair.surface, rational(2, 1));
        assert_eq!(pair.boundary, rational(2, 1));
    }
}
