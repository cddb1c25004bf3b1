//! The verification suite: every identity bound to a named, runnable check.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary_tractions::{line_traction, map_tractions_s2m, map_tractions_m2s, normal_part_line_terms};
use crate::boundary_tractions::{kinematic_convert, BoundaryState, ConvertDirection, LineForm};
use crate::config::{field_seed, Config, ConfigError, Mode};
use crate::constitutive::{self as cst, fields, GrioliParams, MaterialParams};
use crate::poly_fields::{self as pf, random_rational, Jet, Poly, PolyVec};
use crate::scalar::{format_rational, rational, Field, Rational, Ring, Surd};
use crate::surface_geom::{
    self as geom, anti_normal_vanishing, equator_point, projectors, GeometryError, LevelSurface, Patch, SurfaceKind,
};
use crate::tensor_core::{Mat3, Ten3, Vec3};

/// How a check obtains its residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Pointwise,
    Integral,
    /// Passes when a nonzero witness is found.
    Witness,
}

#[derive(Debug, Clone, Copy)]
pub struct CheckSpec {
    pub id: &'static str,
    pub anchor: &'static str,
    pub kind: CheckKind,
}

const fn spec(id: &'static str, anchor: &'static str, kind: CheckKind) -> CheckSpec {
    CheckSpec { id, anchor, kind }
}

use CheckKind::{Integral, Pointwise};

pub const CATALOGUE: [CheckSpec; 16] = [
    spec("I01_energy_forms", "elastic and curvature energy densities, all written forms", Pointwise),
    spec("I02_grioli", "Grioli curvature energy lines and eta-free bulk equation", Pointwise),
    spec("I03_Mn", "hyperstress contracted with the normal equals half anti of couple traction", Pointwise),
    spec("I04_bulk_reduction", "divergence of hyperstress equals nonlocal stress and its Laplacian form", Pointwise),
    spec("I05_reduction_identities", "tangential gradient, double force and line jump reductions", Pointwise),
    spec("I06_direct_tensors", "couple stress, hyperstress, nonlocal stress and B tensor representations", Pointwise),
    spec("I07_comparison", "comparison of strongly and weakly independent tractions", Pointwise),
    spec("I08_anti_normal", "tangential divergence of anti of the unit normal vanishes", Pointwise),
    spec("I09_normal_part", "normal part of the couple traction in double force and line terms", Pointwise),
    spec("I10_projectors", "tangential and normal projector algebra", Pointwise),
    spec("I11_surface_divergence", "surface divergence theorem on patches and split closed surface", Integral),
    spec("I12_stokes", "Stokes circulation and scalar-weighted closed-surface identity", Integral),
    spec("I13_bulk_equation", "equivalent bulk operators and manufactured body force", Pointwise),
    spec("I14_fully_traction", "fully traction boundary data map between formulations", Pointwise),
    spec("I15_mixed2_witness", "force plus normal-derivative data admit no a priori map", CheckKind::Witness),
    spec("I16_kinematic", "tangential curl and tangential normal derivative conversion", Pointwise),
];

const ANCHOR_TABLE: &str = include_str!("../checks.md");

/// Points at which bulk and constitutive identities are evaluated.
pub const BULK_POINTS: usize = 20;
/// Parameters of the equator points used for line terms.
pub const CURVE_POINTS: usize = 6;
/// Float-mode threshold for the non-equivalence witness.
pub const WITNESS_THRESHOLD: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("check catalogue and anchor table disagree: {0}")]
    CatalogueDrift(String),
    #[error("unknown check id `{0}`")]
    UnknownCheck(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Compare the built-in catalogue with the documented anchor table.
pub fn validate_catalogue() -> Result<(), SuiteError> {
    let documented: Vec<(String, String)> = ANCHOR_TABLE
        .lines()
        .filter(|l| l.trim_start().starts_with("| I"))
        .map(|l| {
            let cells: Vec<&str> = l.split('|').map(str::trim).collect();
            (cells.get(1).unwrap_or(&"").to_string(), cells.get(2).unwrap_or(&"").to_string())
        })
        .collect();
    if documented.len() != CATALOGUE.len() {
        return Err(SuiteError::CatalogueDrift(format!(
            "{} documented entries, {} checks",
            documented.len(),
            CATALOGUE.len()
        )));
    }
    for (spec, (id, anchor)) in CATALOGUE.iter().zip(&documented) {
        if spec.id != id || spec.anchor != anchor {
            return Err(SuiteError::CatalogueDrift(format!("`{}` documented as `{id}`", spec.id)));
        }
    }
    let mut ids: Vec<_> = CATALOGUE.iter().map(|c| c.id).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != CATALOGUE.len() {
        return Err(SuiteError::CatalogueDrift("duplicate check id".into()));
    }
    Ok(())
}

pub fn find_check(id: &str) -> Result<&'static CheckSpec, SuiteError> {
    CATALOGUE.iter().find(|c| c.id == id || c.id.split('_').next() == Some(id)).ok_or_else(|| SuiteError::UnknownCheck(id.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureLevel {
    pub nodes: usize,
    pub max_relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub field: usize,
    pub surface: String,
    pub point: [String; 3],
    pub residual: [String; 3],
    pub norm_f64: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputsDigest {
    pub seed: u64,
    pub fields: usize,
    pub degree: u32,
    pub coeff_bound: u32,
    pub surfaces: Vec<String>,
    pub points_per_surface: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: String,
    pub anchor: String,
    pub mode: String,
    pub status: Status,
    pub evaluations: usize,
    pub nonzero_residuals: usize,
    pub max_residual: String,
    pub max_residual_f64: f64,
    pub max_relative_residual: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub quadrature: Vec<QuadratureLevel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub inputs: InputsDigest,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaterialSummary {
    pub mu: String,
    pub lambda: String,
    pub alpha1: String,
    pub alpha2: String,
    pub eta: String,
    #[serde(rename = "Lc")]
    pub length_scale: String,
    pub definiteness: cst::Definiteness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TractionSample {
    pub surface: String,
    pub field: usize,
    pub point: [String; 3],
    pub formulation: &'static str,
    pub t: [String; 3],
    pub g: [String; 3],
    /// Recorded for completeness; does no work in any formulation.
    pub g_normal: String,
    pub line: Option<[String; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub report_version: u32,
    pub mode: Mode,
    pub tolerance: f64,
    pub quadrature_tolerance: f64,
    pub seed: u64,
    pub material: MaterialSummary,
    pub corpus: InputsDigest,
    pub checks: Vec<CheckOutcome>,
    pub tractions: Vec<TractionSample>,
    pub warnings: Vec<String>,
    pub all_passed: bool,
    pub wall_clock_ms: u64,
}

impl SuiteReport {
    pub fn check(&self, id: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

/// Running maximum of residuals for one check.
#[derive(Debug, Clone)]
struct Acc<S> {
    evaluations: usize,
    nonzero: usize,
    worst: Option<(f64, f64, S)>,
}

impl<S: Field> Default for Acc<S> {
    fn default() -> Self {
        Acc { evaluations: 0, nonzero: 0, worst: None }
    }
}

impl<S: Field> Acc<S> {
    fn offer(&mut self, rel: f64, abs: f64, d: S) {
        if self.worst.as_ref().is_none_or(|w| rel > w.0) {
            self.worst = Some((rel, abs, d));
        }
    }

    fn compare(&mut self, lhs: &[S], rhs: &[S]) {
        debug_assert_eq!(lhs.len(), rhs.len());
        let scale = lhs.iter().chain(rhs).map(|v| v.approx().abs()).fold(1.0, f64::max);
        self.evaluations += 1;
        for (a, b) in lhs.iter().zip(rhs) {
            let d = a.clone() - b.clone();
            if !d.is_zero() {
                self.nonzero += 1;
            }
            let abs = d.approx().abs();
            self.offer(abs / scale, abs, d);
        }
    }

    fn zero_poly(&mut self, polys: &[Poly]) {
        self.evaluations += 1;
        let mut any = false;
        for p in polys {
            for (_, c) in p.terms() {
                any = true;
                self.nonzero += 1;
                let d = S::from_rational(c);
                let abs = d.approx().abs();
                self.offer(abs, abs, d);
            }
        }
        if !any {
            self.offer(0.0, 0.0, S::zero());
        }
    }

    fn merge(&mut self, o: Acc<S>) {
        self.evaluations += o.evaluations;
        self.nonzero += o.nonzero;
        if let Some((rel, abs, d)) = o.worst {
            self.offer(rel, abs, d);
        }
    }
}

#[derive(Debug, Clone)]
struct Candidate<S> {
    field: usize,
    surface: String,
    on_sphere: bool,
    point: Vec3<S>,
    residual: Vec3<S>,
    norm: f64,
}

#[derive(Debug, Clone)]
struct Tally<S> {
    accs: BTreeMap<&'static str, Acc<S>>,
    quad: BTreeMap<&'static str, BTreeMap<usize, f64>>,
    witness: Option<Candidate<S>>,
}

impl<S: Field> Default for Tally<S> {
    fn default() -> Self {
        Tally { accs: BTreeMap::new(), quad: BTreeMap::new(), witness: None }
    }
}

impl<S: Field> Tally<S> {
    fn acc(&mut self, id: &'static str) -> &mut Acc<S> {
        self.accs.entry(id).or_default()
    }

    fn quad(&mut self, id: &'static str, nodes: usize, rel: f64) {
        let e = self.quad.entry(id).or_default().entry(nodes).or_insert(0.0);
        *e = e.max(rel);
    }

    fn offer_witness(&mut self, c: Candidate<S>) {
        let better = match &self.witness {
            None => true,
            Some(w) => (c.on_sphere && !w.on_sphere) || (c.on_sphere == w.on_sphere && c.norm > w.norm),
        };
        if better {
            self.witness = Some(c);
        }
    }

    fn merge(&mut self, o: Tally<S>) {
        for (id, a) in o.accs {
            self.acc(id).merge(a);
        }
        for (id, levels) in o.quad {
            for (n, r) in levels {
                self.quad(id, n, r);
            }
        }
        if let Some(w) = o.witness {
            self.offer_witness(w);
        }
    }
}

fn flat_v<S: Clone>(v: &Vec3<S>) -> Vec<S> {
    v.0.to_vec()
}

fn flat_m<S: Clone>(m: &Mat3<S>) -> Vec<S> {
    m.0.iter().flatten().cloned().collect()
}

fn flat_t<S: Clone>(t: &Ten3<S>) -> Vec<S> {
    t.0.iter().flatten().flatten().cloned().collect()
}

fn flat_pv(v: &PolyVec) -> Vec<Poly> {
    v.0.to_vec()
}

fn flat_pm(m: &Mat3<Poly>) -> Vec<Poly> {
    m.0.iter().flatten().cloned().collect()
}

/// Everything derived from the configuration before any check runs.
struct Corpus {
    params: MaterialParams,
    grioli: GrioliParams,
    fields: Vec<PolyVec>,
    jets: Vec<Jet<Poly>>,
    surfaces: Vec<(LevelSurface, Vec<Vec3<Rational>>)>,
    lemma_surfaces: Vec<(LevelSurface, Vec<Vec3<Rational>>)>,
    curve_params: Vec<Rational>,
    bulk_points: Vec<Vec3<Rational>>,
    patches: Vec<Patch>,
    quad_levels: [usize; 2],
    exact: bool,
}

impl Corpus {
    fn build(config: &Config) -> Result<Self, SuiteError> {
        config.validate()?;
        let params = config.material.params().map_err(ConfigError::from)?;
        let grioli = config.material.grioli()?;
        let fields = config.fields()?;
        let jets = fields.iter().map(Jet::of).collect();
        let k = config.corpus.points_per_surface;
        let sample = |s: LevelSurface, salt: usize| -> Result<_, SuiteError> {
            let pts = s.sample_points(field_seed(config.seed, 10_000 + salt), k)?;
            Ok((s, pts))
        };
        let surfaces = config
            .surfaces
            .iter()
            .enumerate()
            .map(|(i, c)| sample(c.surface(), i))
            .collect::<Result<Vec<_>, _>>()?;
        let mut lemma_surfaces = surfaces.clone();
        for extra in [LevelSurface::saddle(), LevelSurface::plane(), LevelSurface::unit_sphere(), LevelSurface::ellipsoid()] {
            if !lemma_surfaces.iter().any(|(s, _)| s.kind() == extra.kind()) {
                lemma_surfaces.push(sample(extra, 100 + lemma_surfaces.len())?);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(field_seed(config.seed, 20_000));
        let curve_params = (0..CURVE_POINTS).map(|_| random_rational(&mut rng, 4, 9)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(field_seed(config.seed, 30_000));
        let bulk_points = (0..BULK_POINTS)
            .map(|_| Vec3::from_fn(|_| random_rational(&mut rng, 2, 7)))
            .collect();
        Ok(Corpus {
            params,
            grioli,
            fields,
            jets,
            surfaces,
            lemma_surfaces,
            curve_params,
            bulk_points,
            patches: config.patches.iter().map(|p| p.patch()).collect(),
            quad_levels: [config.quadrature.nodes, config.quadrature.check_nodes],
            exact: config.mode == Mode::Rational,
        })
    }
}

/// Which catalogue items to run.
#[derive(Debug, Clone, Copy)]
struct Selection(Option<&'static str>);

impl Selection {
    fn wants(&self, id: &str) -> bool {
        self.0.is_none_or(|s| s == id)
    }

    fn any(&self, ids: &[&str]) -> bool {
        ids.iter().any(|id| self.wants(id))
    }
}

fn lift<S: Field>(x: &Vec3<Rational>) -> Vec3<S> {
    Vec3::from_rationals(x)
}

fn bulk_checks<S: Field>(c: &Corpus, i: usize, sel: Selection, t: &mut Tally<S>) {
    if !sel.any(&["I01_energy_forms", "I02_grioli", "I04_bulk_reduction", "I06_direct_tensors"]) {
        return;
    }
    let p = &c.params;
    for x in &c.bulk_points {
        let jet: Jet<S> = c.jets[i].eval(&lift(x));
        if sel.wants("I01_energy_forms") {
            let lin = cst::energy_lin(p, &jet.grad);
            t.acc("I01_energy_forms").compare(&lin[1..], &lin[..1]);
            let curv = cst::energy_curv(p, &jet.hess);
            for form in &curv[1..] {
                t.acc("I01_energy_forms").compare(std::slice::from_ref(form), &curv[..1]);
            }
        }
        if sel.wants("I02_grioli") {
            let lines = cst::energy_grioli(p, &c.grioli, &jet.hess);
            for line in &lines[1..] {
                t.acc("I02_grioli").compare(std::slice::from_ref(line), &lines[..1]);
            }
        }
        let tau = cst::nonlocal_stress_forms(p, &jet.third);
        if sel.wants("I04_bulk_reduction") {
            for form in &tau[1..] {
                t.acc("I04_bulk_reduction").compare(&flat_m(form), &flat_m(&tau[0]));
            }
        }
        if sel.wants("I06_direct_tensors") {
            let acc = t.acc("I06_direct_tensors");
            let m = cst::couple_stress_forms(p, &jet.hess);
            for form in &m[1..] {
                acc.compare(&flat_m(form), &flat_m(&m[0]));
            }
            let h = cst::hyperstress_forms(p, &jet.hess);
            for form in &h[1..] {
                acc.compare(&flat_t(form), &flat_t(&h[0]));
            }
            for form in &tau[1..] {
                acc.compare(&flat_m(form), &flat_m(&tau[0]));
            }
        }
    }
}

fn field_level_checks<S: Field>(c: &Corpus, i: usize, sel: Selection, t: &mut Tally<S>) {
    let p = &c.params;
    let u = &c.fields[i];
    if sel.wants("I02_grioli") {
        t.acc("I02_grioli").zero_poly(&flat_pv(&fields::grioli_bulk_contribution(u)));
    }
    if sel.wants("I04_bulk_reduction") {
        let third = fields::nonlocal_stress_third_order(p, u);
        let skew = fields::nonlocal_stress(p, u);
        let lap = fields::nonlocal_stress_laplacian(p, u);
        t.acc("I04_bulk_reduction").zero_poly(&flat_pm(&(third - skew.clone())));
        t.acc("I04_bulk_reduction").zero_poly(&flat_pm(&(skew - lap)));
    }
    if sel.wants("I13_bulk_equation") {
        let [op_third, op_skew] = fields::bulk_operator(p, u);
        t.acc("I13_bulk_equation").zero_poly(&flat_pv(&(op_third - op_skew.clone())));
        let force = fields::manufactured_body_force(p, u);
        for x in &c.bulk_points {
            let x: Vec3<S> = lift(x);
            let lhs = pf::eval_vec(&op_skew, &x) + pf::eval_vec(&force, &x);
            t.acc("I13_bulk_equation").compare(&flat_v(&lhs), &flat_v(&Vec3::zero()));
        }
    }
}

/// Axis whose tangential projection is longest, used as the frame hint.
fn frame_hint<S: Field>(normal: &Vec3<S>) -> Vec3<S> {
    let (tp, _) = projectors(normal);
    let best = (0..3)
        .max_by(|&a, &b| {
            let la = tp.apply(&Vec3::basis(a)).norm_sq().approx();
            let lb = tp.apply(&Vec3::basis(b)).norm_sq().approx();
            la.partial_cmp(&lb).unwrap_or(std::cmp::Ordering::Equal).then(b.cmp(&a))
        })
        .unwrap_or(0);
    Vec3::basis(best)
}

fn surface_state_checks<S: Field>(
    b: &BoundaryState<S>,
    field: usize,
    surface: &LevelSurface,
    sel: Selection,
    t: &mut Tally<S>,
) -> Result<(), SuiteError> {
    let half = rational(1, 2);
    let n = &b.point.normal;
    let tp = &b.point.tangential;
    let bforms = b.b_tensor_forms();
    if sel.wants("I03_Mn") {
        t.acc("I03_Mn").compare(&flat_m(&bforms[0]), &flat_m(&bforms[1]));
    }
    if sel.wants("I06_direct_tensors") {
        for form in &bforms[1..] {
            t.acc("I06_direct_tensors").compare(&flat_m(form), &flat_m(&bforms[0]));
        }
    }
    let anti_mn_n = tp.apply(&b.couple_normal().anti().apply(n));
    if sel.wants("I05_reduction_identities") {
        let acc = t.acc("I05_reduction_identities");
        acc.compare(&flat_v(&b.third_order_correction()), &flat_v(&b.skew_correction().scale_q(&half)));
        acc.compare(&flat_v(&b.doubleforce_third_order()), &flat_v(&anti_mn_n.scale_q(&half)));
    }
    let strong = b.traction_strong();
    let third = b.traction_third_order();
    if sel.wants("I07_comparison") {
        let acc = t.acc("I07_comparison");
        acc.compare(&flat_v(&b.comparison_residual()), &flat_v(&Vec3::zero()));
        acc.compare(&flat_v(&strong), &flat_v(&third));
        acc.compare(&flat_v(&b.traction_strong_skew()), &flat_v(&third));
    }
    if sel.wants("I09_normal_part") {
        let lhs = tp.apply(&b.doubleforce_strong_anti());
        t.acc("I09_normal_part").compare(&flat_v(&lhs), &flat_v(&anti_mn_n));
    }
    if sel.wants("I14_fully_traction") {
        let t_tilde = b.traction_mindlin();
        let g_tilde = b.doubleforce_mindlin_dual();
        let (t_mapped, g_mapped) = map_tractions_m2s(&t_tilde, &g_tilde, &b.point);
        let acc = t.acc("I14_fully_traction");
        acc.compare(&flat_v(&t_mapped), &flat_v(&third));
        acc.compare(&flat_v(&g_mapped), &flat_v(&b.doubleforce_strong_anti()));
        let g_dual = g_tilde.cross(&b.point.dual_normal);
        let (t_back, g_back) = map_tractions_s2m(&t_mapped, &g_dual, &b.point);
        acc.compare(&flat_v(&t_back), &flat_v(&t_tilde));
        acc.compare(&flat_v(&g_back.map(|d| d.value.clone())), &flat_v(&b.doubleforce_mindlin()));
    }
    if sel.wants("I15_mixed2_witness") {
        let residual = b.mixed_case_residual();
        let direct = strong.clone() - b.traction_mindlin();
        t.acc("I15_mixed2_witness").compare(&flat_v(&residual), &flat_v(&direct));
        let norm = residual.approx().norm_sq().sqrt();
        let nonzero = if S::EXACT { !residual.is_zero() } else { norm > WITNESS_THRESHOLD };
        if nonzero {
            t.offer_witness(Candidate {
                field,
                surface: surface.name().to_string(),
                on_sphere: surface.kind() == SurfaceKind::UnitSphere,
                point: b.point.x.clone(),
                residual,
                norm,
            });
        }
    }
    if sel.wants("I16_kinematic") {
        let grad = &b.jet.grad;
        let curl = Vec3::from_fn(|i| {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            grad.at(k, j).clone() - grad.at(j, k).clone()
        });
        let t_curl = tp.apply(&curl);
        let t_normal = tp.apply(&grad.apply(n));
        let hint = frame_hint(n);
        let to_curl = kinematic_convert(grad, &t_normal, ConvertDirection::NormalToCurl, n, &hint)?;
        let to_normal = kinematic_convert(grad, &t_curl, ConvertDirection::CurlToNormal, n, &hint)?;
        let round = kinematic_convert(grad, &to_normal, ConvertDirection::NormalToCurl, n, &hint)?;
        let acc = t.acc("I16_kinematic");
        acc.compare(&flat_v(&to_curl), &flat_v(&t_curl));
        acc.compare(&flat_v(&to_normal), &flat_v(&t_normal));
        acc.compare(&flat_v(&round), &flat_v(&t_curl));
    }
    Ok(())
}

const SURFACE_IDS: [&str; 9] = [
    "I03_Mn",
    "I05_reduction_identities",
    "I06_direct_tensors",
    "I07_comparison",
    "I09_normal_part",
    "I14_fully_traction",
    "I15_mixed2_witness",
    "I16_kinematic",
    "I10_projectors",
];

fn surface_checks<S: Field>(c: &Corpus, i: usize, sel: Selection, t: &mut Tally<S>) -> Result<(), SuiteError> {
    if !sel.any(&SURFACE_IDS[..8]) {
        return Ok(());
    }
    for (surface, points) in &c.surfaces {
        for x in points {
            let b = BoundaryState::<S>::new(&c.params, &c.jets[i], surface, lift(x))?;
            surface_state_checks(&b, i, surface, sel, t)?;
        }
    }
    Ok(())
}

fn curve_checks<S: Field>(c: &Corpus, i: usize, sel: Selection, t: &mut Tally<S>) {
    if !sel.any(&["I05_reduction_identities", "I09_normal_part"]) {
        return;
    }
    let j = (i + 1) % c.fields.len();
    let p = &c.params;
    for s in &c.curve_params {
        let curve = equator_point::<S>(s, true);
        let hess_plus = c.jets[i].hess.map(|q| q.eval(&curve.x));
        let hess_minus = c.jets[j].hess.map(|q| q.eval(&curve.x));
        if sel.wants("I05_reduction_identities") {
            let third = line_traction(p, &hess_plus, &hess_minus, &curve, LineForm::ThirdOrder);
            let skew = line_traction(p, &hess_plus, &hess_minus, &curve, LineForm::Skew);
            t.acc("I05_reduction_identities").compare(&flat_v(&third), &flat_v(&skew));
        }
        if sel.wants("I09_normal_part") {
            let m_plus = cst::couple_stress(p, &hess_plus);
            let m_minus = cst::couple_stress(p, &hess_minus);
            let acc = t.acc("I09_normal_part");
            for m in [&m_plus, &m_minus] {
                let [lhs, rhs] = normal_part_line_terms(m, &curve);
                acc.compare(&flat_v(&lhs), &flat_v(&rhs));
            }
            let n = &curve.normal;
            let psi = |m: &Mat3<S>| n.dot(&m.apply(n));
            let skew = line_traction(p, &hess_plus, &hess_minus, &curve, LineForm::Skew);
            let tangential = line_traction(p, &hess_plus, &hess_minus, &curve, LineForm::SkewTangential);
            let normal_jump = curve.tangent.scale(&(psi(&m_plus) - psi(&m_minus))).scale_q(&rational(1, 2));
            acc.compare(&flat_v(&skew), &flat_v(&(tangential + normal_jump)));
        }
    }
}

fn rel(pair: &geom::IntegralPair) -> f64 {
    (pair.surface - pair.boundary).abs() / pair.surface.abs().max(pair.boundary.abs()).max(1.0)
}

/// Residuals below this are treated as converged regardless of ordering.
pub const QUADRATURE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactIntegral {
    /// Coefficients of π.
    pub surface: String,
    pub boundary: String,
    pub residual: String,
    pub is_zero: bool,
    #[serde(skip)]
    pub residual_exact: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRow {
    pub nodes: usize,
    pub surface: f64,
    pub boundary: f64,
    pub relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralRow {
    pub check: &'static str,
    pub identity: &'static str,
    pub patch: String,
    pub field: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactIntegral>,
    pub levels: Vec<QuadratureRow>,
    pub converged: bool,
}

/// Finest level below `tolerance` and no worse than any coarser level, with
/// residuals under [`QUADRATURE_FLOOR`] treated as equal.
pub fn quadrature_converged(levels: &[QuadratureRow], tolerance: f64) -> bool {
    let Some(last) = levels.last() else { return false };
    let finest = last.relative_residual;
    finest < tolerance && levels.iter().all(|l| finest <= l.relative_residual.max(QUADRATURE_FLOOR))
}

pub fn patch_label(patch: &Patch) -> String {
    match patch {
        Patch::Hemisphere { upper: true } => "upper-hemisphere".into(),
        Patch::Hemisphere { upper: false } => "lower-hemisphere".into(),
        Patch::Disc { radius } => format!("disc(R={})", format_rational(radius)),
    }
}

struct RowBuilder<'a> {
    params: &'a MaterialParams,
    levels: &'a [usize],
    exact: bool,
    tolerance: f64,
    field: String,
}

impl RowBuilder<'_> {
    fn row(
        &self,
        check: &'static str,
        identity: &'static str,
        patch: String,
        exact: Option<Result<geom::ExactPair, GeometryError>>,
        quad: impl Fn(usize) -> Result<geom::IntegralPair, GeometryError>,
    ) -> Result<IntegralRow, SuiteError> {
        let exact = match exact.filter(|_| self.exact) {
            Some(pair) => {
                let pair = pair?;
                let residual = pair.residual();
                Some(ExactIntegral {
                    surface: format_rational(&pair.surface),
                    boundary: format_rational(&pair.boundary),
                    is_zero: residual == rational(0, 1),
                    residual: format_rational(&residual),
                    residual_exact: residual,
                })
            }
            None => None,
        };
        let levels = self
            .levels
            .iter()
            .map(|&nodes| {
                let pair = quad(nodes)?;
                Ok(QuadratureRow { nodes, surface: pair.surface, boundary: pair.boundary, relative_residual: rel(&pair) })
            })
            .collect::<Result<Vec<_>, SuiteError>>()?;
        let converged = quadrature_converged(&levels, self.tolerance) && exact.as_ref().is_none_or(|e| e.is_zero);
        Ok(IntegralRow { check, identity, patch, field: self.field.clone(), exact, levels, converged })
    }

    fn weighted(&self, patch: &Patch, jet: &Jet<Poly>, du: &PolyVec, nodes: usize) -> Result<geom::IntegralPair, GeometryError> {
        geom::stokes_scalar_weighted(
            patch,
            |p| Ok(BoundaryState::from_parts(self.params, p.clone(), jet.eval(&p.x)).normal_couple_dual()),
            |curve| {
                let m = cst::couple_stress(self.params, &jet.hess.map(|q| q.eval(&curve.x)));
                Ok(curve.normal.dot(&m.apply(&curve.normal)))
            },
            du,
            nodes,
        )
    }
}

/// Both sides of every integral identity for one field and its partner.
#[allow(clippy::too_many_arguments)]
fn integral_rows(
    params: &MaterialParams,
    patches: &[Patch],
    u: &PolyVec,
    partner: &PolyVec,
    label: String,
    levels: &[usize],
    exact: bool,
    tolerance: f64,
    sel: Selection,
) -> Result<Vec<IntegralRow>, SuiteError> {
    let b = RowBuilder { params, levels, exact, tolerance, field: label };
    let jet = Jet::of(u);
    let mut rows = Vec::new();
    const DIV: &str = "I11_surface_divergence";
    const STOKES: &str = "I12_stokes";
    if sel.wants(DIV) {
        for patch in patches {
            rows.push(b.row(DIV, "surface-divergence", patch_label(patch), Some(geom::surface_divergence_exact(patch, u)), |n| {
                geom::surface_divergence(patch, u, n)
            })?);
        }
        rows.push(b.row(
            DIV,
            "split-sphere-divergence",
            "unit-sphere".into(),
            Some(geom::surface_divergence_split_exact(u, partner)),
            |n| geom::surface_divergence_split(u, partner, n),
        )?);
    }
    if sel.wants(STOKES) {
        let couple = fields::couple_stress(params, u);
        let psi_of = |n: &PolyVec| n.dot(&couple.sym().apply(n));
        for patch in patches {
            rows.push(b.row(STOKES, "stokes-circulation", patch_label(patch), Some(geom::stokes_circulation_exact(patch, u)), |n| {
                geom::stokes_circulation(patch, u, n)
            })?);
            let psi = psi_of(&patch.normal_poly());
            rows.push(b.row(
                STOKES,
                "normal-couple-weighted-stokes",
                patch_label(patch),
                Some(geom::stokes_scalar_weighted_exact(patch, &psi, partner)),
                |n| b.weighted(patch, &jet, partner, n),
            )?);
        }
        let halves = [Patch::Hemisphere { upper: true }, Patch::Hemisphere { upper: false }];
        let psi = psi_of(&halves[0].normal_poly());
        let closed_exact = || -> Result<geom::ExactPair, GeometryError> {
            let upper = geom::stokes_scalar_weighted_exact(&halves[0], &psi, partner)?.surface;
            let lower = geom::stokes_scalar_weighted_exact(&halves[1], &psi, partner)?.surface;
            Ok(geom::ExactPair { surface: upper, boundary: -lower })
        };
        rows.push(b.row(STOKES, "closed-sphere-weighted-curl", "unit-sphere".into(), Some(closed_exact()), |n| {
            let upper = b.weighted(&halves[0], &jet, partner, n)?.surface;
            let lower = b.weighted(&halves[1], &jet, partner, n)?.surface;
            Ok(geom::IntegralPair { surface: upper, boundary: -lower })
        })?);
    }
    Ok(rows)
}

fn integral_checks<S: Field>(c: &Corpus, i: usize, sel: Selection, t: &mut Tally<S>) -> Result<(), SuiteError> {
    if !sel.any(&["I11_surface_divergence", "I12_stokes"]) {
        return Ok(());
    }
    let partner = &c.fields[(i + 1) % c.fields.len()];
    let rows = integral_rows(&c.params, &c.patches, &c.fields[i], partner, String::new(), &c.quad_levels, c.exact, f64::INFINITY, sel)?;
    for row in rows {
        if let Some(e) = &row.exact {
            t.acc(row.check).compare(&[S::from_rational(&e.residual_exact)], &[S::zero()]);
        }
        for l in &row.levels {
            t.quad(row.check, l.nodes, l.relative_residual);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralsReport {
    pub report_version: u32,
    pub mode: Mode,
    pub tolerance: f64,
    pub refinement: Vec<usize>,
    pub rows: Vec<IntegralRow>,
    pub all_converged: bool,
}

/// Reference fields with known integrals, run ahead of the corpus.
pub const REFERENCE_FIELDS: [(&str, &str); 2] = [("constant", "1; 2; 3"), ("rotation", "-x2; x1; 0")];

/// Integral identities under quadrature refinement for reference and corpus fields.
pub fn run_integrals(config: &Config) -> Result<IntegralsReport, SuiteError> {
    config.validate()?;
    let params = config.material.params().map_err(ConfigError::from)?;
    let patches: Vec<Patch> = config.patches.iter().map(|p| p.patch()).collect();
    for p in &patches {
        p.validate()?;
    }
    let mut labelled: Vec<(String, PolyVec)> = REFERENCE_FIELDS
        .iter()
        .map(|(name, lit)| (name.to_string(), pf::parse_poly_vec(lit).expect("reference literal")))
        .collect();
    labelled.extend(config.fields()?.into_iter().enumerate().map(|(i, u)| (format!("corpus[{i}]"), u)));
    let levels = &config.quadrature.refinement;
    let exact = config.mode == Mode::Rational;
    let tol = config.quadrature.tolerance;
    let per_field: Vec<Vec<IntegralRow>> = (0..labelled.len())
        .into_par_iter()
        .map(|i| {
            let partner = &labelled[(i + 1) % labelled.len()].1;
            integral_rows(&params, &patches, &labelled[i].1, partner, labelled[i].0.clone(), levels, exact, tol, Selection(None))
        })
        .collect::<Result<_, _>>()?;
    let mut rows: Vec<IntegralRow> = per_field.into_iter().flatten().collect();
    let rotation = &labelled[1].1;
    for patch in &patches {
        if let Patch::Disc { radius } = patch {
            let expected = 2.0 * std::f64::consts::PI * f64::from_rational(radius).powi(2);
            let quad = levels
                .iter()
                .map(|&nodes| {
                    let pair = geom::stokes_circulation(patch, rotation, nodes)?;
                    let err = (pair.boundary - expected).abs().max((pair.surface - expected).abs());
                    Ok(QuadratureRow { nodes, surface: pair.surface, boundary: expected, relative_residual: err / expected.max(1.0) })
                })
                .collect::<Result<Vec<_>, SuiteError>>()?;
            rows.push(IntegralRow {
                check: "I12_stokes",
                identity: "closed-form-disc-circulation",
                patch: patch_label(patch),
                field: "rotation".into(),
                exact: None,
                converged: quadrature_converged(&quad, tol),
                levels: quad,
            });
        }
    }
    Ok(IntegralsReport {
        report_version: 1,
        mode: config.mode,
        tolerance: tol,
        refinement: levels.clone(),
        all_converged: rows.iter().all(|r| r.converged),
        rows,
    })
}

fn lemma_checks<S: Field>(c: &Corpus, sel: Selection, t: &mut Tally<S>) -> Result<(), SuiteError> {
    if !sel.any(&["I08_anti_normal", "I10_projectors"]) {
        return Ok(());
    }
    for (surface, points) in &c.lemma_surfaces {
        for x in points {
            let x: Vec3<S> = lift(x);
            if sel.wants("I08_anti_normal") {
                let v = anti_normal_vanishing(surface, &x)?;
                t.acc("I08_anti_normal").compare(&flat_v(&v), &flat_v(&Vec3::zero()));
            }
            if sel.wants("I10_projectors") {
                let n = surface.normal_at(&x)?;
                let (tp, qp) = projectors(&n);
                let acc = t.acc("I10_projectors");
                acc.compare(&flat_m(&tp.dot(&tp)), &flat_m(&tp));
                acc.compare(&flat_m(&qp.dot(&qp)), &flat_m(&qp));
                acc.compare(&flat_m(&tp.dot(&qp)), &flat_m(&Mat3::zero()));
                acc.compare(&flat_m(&(tp.clone() + qp.clone())), &flat_m(&Mat3::identity()));
                acc.compare(&flat_v(&tp.apply(&n)), &flat_v(&Vec3::zero()));
                acc.compare(&flat_v(&qp.apply(&n)), &flat_v(&n));
                acc.compare(&[tp.trace()], &[S::from_int(2)]);
            }
        }
    }
    Ok(())
}

fn digest(config: &Config, c: &Corpus) -> InputsDigest {
    InputsDigest {
        seed: config.seed,
        fields: c.fields.len(),
        degree: c.fields.iter().filter_map(|u| u.0.iter().filter_map(Poly::degree).max()).max().unwrap_or(0),
        coeff_bound: config.corpus.coeff_bound,
        surfaces: c.surfaces.iter().map(|(s, _)| s.name().to_string()).collect(),
        points_per_surface: config.corpus.points_per_surface,
    }
}

fn strings<S: Field>(v: &Vec3<S>) -> [String; 3] {
    std::array::from_fn(|i| v[i].exact_repr())
}

fn traction_samples<S: Field>(c: &Corpus) -> Result<Vec<TractionSample>, SuiteError> {
    let mut out = Vec::new();
    if c.fields.is_empty() {
        return Ok(out);
    }
    for (surface, points) in &c.surfaces {
        let Some(x) = points.first() else { continue };
        let b = BoundaryState::<S>::new(&c.params, &c.jets[0], surface, lift(x))?;
        for set in b.traction_sets() {
            out.push(TractionSample {
                surface: surface.name().to_string(),
                field: 0,
                point: strings(&b.point.x),
                formulation: set.formulation.tag(),
                t: strings(&set.t),
                g: strings(&set.g),
                g_normal: set.g_normal.exact_repr(),
                line: set.line.as_ref().map(strings),
            });
        }
    }
    Ok(out)
}

fn outcome<S: Field>(
    spec: &CheckSpec,
    config: &Config,
    tally: &mut Tally<S>,
    inputs: &InputsDigest,
    degenerate: bool,
) -> CheckOutcome {
    let acc = tally.accs.remove(spec.id).unwrap_or_default();
    let quadrature: Vec<QuadratureLevel> = tally
        .quad
        .remove(spec.id)
        .map(|levels| levels.into_iter().map(|(nodes, r)| QuadratureLevel { nodes, max_relative_residual: r }).collect())
        .unwrap_or_default();
    let (rel, abs, exact) = match &acc.worst {
        Some((r, a, d)) => (*r, *a, d.exact_repr()),
        None => (0.0, 0.0, "0".to_string()),
    };
    let exact_mode = S::EXACT;
    let mode = match (spec.kind, exact_mode) {
        (CheckKind::Integral, _) => "integral-quadrature",
        (_, true) => "pointwise-exact",
        (_, false) => "pointwise-float",
    };
    let residual_ok = if exact_mode { acc.nonzero == 0 } else { rel <= config.tolerance };
    let quad_ok = quadrature.iter().all(|q| q.max_relative_residual < config.quadrature.tolerance);
    let mut notes = Vec::new();
    let mut witness = None;
    let status = match spec.kind {
        _ if acc.evaluations == 0 && quadrature.is_empty() => {
            notes.push("no evaluations for this configuration".into());
            Status::Skipped
        }
        CheckKind::Pointwise => pass_if(residual_ok),
        CheckKind::Integral => {
            if !exact_mode {
                notes.push("float mode: quadrature residuals only".into());
            }
            pass_if((!exact_mode || residual_ok) && quad_ok)
        }
        CheckKind::Witness => match tally.witness.take() {
            Some(w) => {
                if !w.on_sphere {
                    notes.push("no witness on the unit sphere; reporting another surface".into());
                }
                let ok = residual_ok && (w.on_sphere || !inputs.surfaces.iter().any(|s| s == "sphere"));
                witness = Some(Witness {
                    field: w.field,
                    surface: w.surface,
                    point: strings(&w.point),
                    residual: strings(&w.residual),
                    norm_f64: w.norm,
                });
                pass_if(ok)
            }
            None if degenerate => {
                notes.push("degenerate corpus: couple stresses vanish, no witness can exist".into());
                Status::Skipped
            }
            None => {
                notes.push("no nonzero witness found".into());
                Status::Fail
            }
        },
    };
    CheckOutcome {
        id: spec.id.to_string(),
        anchor: spec.anchor.to_string(),
        mode: mode.to_string(),
        status,
        evaluations: acc.evaluations,
        nonzero_residuals: acc.nonzero,
        max_residual: exact,
        max_residual_f64: abs,
        max_relative_residual: rel,
        quadrature,
        witness,
        notes,
        inputs: inputs.clone(),
    }
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn run_with<S: Field>(config: &Config, only: Option<&'static CheckSpec>) -> Result<SuiteReport, SuiteError> {
    let start = Instant::now();
    validate_catalogue()?;
    let corpus = Corpus::build(config)?;
    let sel = Selection(only.map(|c| c.id));
    let inputs = digest(config, &corpus);
    let mut warnings = Vec::new();
    let degenerate = corpus.fields.iter().all(|u| u.0.iter().all(|p| p.degree().unwrap_or(0) <= 1));
    if degenerate {
        warnings.push("degenerate corpus: every field has degree at most 1, so all curvature terms vanish".into());
    }
    if corpus.fields.is_empty() {
        warnings.push("empty corpus: field-dependent checks are skipped".into());
    }

    let per_field: Vec<Tally<S>> = (0..corpus.fields.len())
        .into_par_iter()
        .map(|i| {
            let mut t = Tally::default();
            bulk_checks(&corpus, i, sel, &mut t);
            field_level_checks(&corpus, i, sel, &mut t);
            surface_checks(&corpus, i, sel, &mut t)?;
            curve_checks(&corpus, i, sel, &mut t);
            integral_checks(&corpus, i, sel, &mut t)?;
            Ok(t)
        })
        .collect::<Result<_, SuiteError>>()?;
    let mut tally = Tally::default();
    lemma_checks(&corpus, sel, &mut tally)?;
    for t in per_field {
        tally.merge(t);
    }

    let checks: Vec<CheckOutcome> = CATALOGUE
        .iter()
        .filter(|s| sel.wants(s.id))
        .map(|s| outcome(s, config, &mut tally, &inputs, degenerate))
        .collect();
    let all_passed = checks.iter().all(CheckOutcome::passed);
    let eta = corpus.grioli.eta.clone();
    Ok(SuiteReport {
        report_version: 1,
        mode: config.mode,
        tolerance: config.tolerance,
        quadrature_tolerance: config.quadrature.tolerance,
        seed: config.seed,
        material: MaterialSummary {
            mu: format_rational(corpus.params.mu()),
            lambda: format_rational(corpus.params.lambda()),
            alpha1: format_rational(corpus.params.alpha1()),
            alpha2: format_rational(corpus.params.alpha2()),
            eta: format_rational(&eta),
            length_scale: format_rational(&corpus.grioli.length_scale),
            definiteness: corpus.params.definiteness(),
        },
        corpus: inputs,
        tractions: traction_samples::<S>(&corpus)?,
        checks,
        warnings,
        all_passed,
        wall_clock_ms: start.elapsed().as_millis() as u64,
    })
}

/// Run the whole catalogue.
pub fn run_suite(config: &Config) -> Result<SuiteReport, SuiteError> {
    run_selected(config, None)
}

/// Run the catalogue, or the single check `only` (full id or its `Inn` prefix).
pub fn run_selected(config: &Config, only: Option<&str>) -> Result<SuiteReport, SuiteError> {
    let only = only.map(find_check).transpose()?;
    match config.mode {
        Mode::Rational => run_with::<Surd>(config, only),
        Mode::Float => run_with::<f64>(config, only),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_matches_table() {
        validate_catalogue().unwrap();
        assert_eq!(find_check("I07").unwrap().id, "I07_comparison");
        assert!(find_check("I99").is_err());
    }

    fn small(mode: Mode) -> Config {
        let mut c = Config::default();
        c.mode = mode;
        c.corpus.count = 3;
        c.corpus.points_per_surface = 3;
        c
    }

    #[test]
    fn small_corpus_passes_in_both_modes() {
        for mode in [Mode::Rational, Mode::Float] {
            let r = run_suite(&small(mode)).unwrap();
            for c in &r.checks {
                assert!(c.passed(), "{} failed: {c:?}", c.id);
            }
            assert_eq!(r.checks.len(), CATALOGUE.len());
        }
    }
}
