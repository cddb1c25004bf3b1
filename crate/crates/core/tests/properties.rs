use couple_stress::boundary_tractions::{map_tractions_m2s, BoundaryState};
use couple_stress::config::{Config, Mode};
use couple_stress::constitutive::{self as cst, fields, GrioliParams, MaterialParams};
use couple_stress::identity_suite::run_suite;
use couple_stress::poly_fields::{self as pf, random_field, Jet, Poly, PolyVec};
use couple_stress::report::to_json;
use couple_stress::scalar::{rational, Field, Rational, Ring, Surd};
use couple_stress::surface_geom::{grad_colon, projectors, sphere_point, tangential_gradient_contraction, LevelSurface};
use couple_stress::tensor_core::{kronecker, levi_civita, Mat3, Vec3};
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 1i64..=9).prop_map(|(p, q)| rational(p, q))
}

fn rat_vec() -> impl Strategy<Value = Vec3<Rational>> {
    [small_rational(), small_rational(), small_rational()].prop_map(Vec3)
}

fn rat_mat() -> impl Strategy<Value = Mat3<Rational>> {
    [rat_vec(), rat_vec(), rat_vec()].prop_map(|rows| Mat3::from_fn(|i, j| rows[i][j].clone()))
}

fn quartic() -> impl Strategy<Value = PolyVec> {
    any::<u64>().prop_map(|seed| random_field(seed, 4, 10))
}

fn params() -> impl Strategy<Value = MaterialParams> {
    (1i64..=9, -5i64..=9, -9i64..=9, -9i64..=9, 1i64..=4).prop_map(|(mu, la, a1, a2, d)| {
        MaterialParams::new(rational(mu, d), rational(la, d), rational(a1, d), rational(a2, d)).unwrap()
    })
}

fn zero_polys(polys: impl IntoIterator<Item = Poly>) -> bool {
    polys.into_iter().all(|p| p.is_empty())
}

fn mat_polys(m: Mat3<Poly>) -> Vec<Poly> {
    m.0.into_iter().flatten().collect()
}

#[test]
fn epsilon_delta_identities_exhaustive() {
    let d = |a, b| kronecker(a, b);
    for j in 0..3 {
        for k in 0..3 {
            for m in 0..3 {
                for n in 0..3 {
                    let lhs: i64 = (0..3).map(|i| levi_civita(i, j, k) * levi_civita(i, m, n)).sum();
                    assert_eq!(lhs, d(j, m) * d(k, n) - d(j, n) * d(k, m));
                    for i in 0..3 {
                        for l in 0..3 {
                            let full = levi_civita(i, j, k) * levi_civita(l, m, n);
                            let det = d(i, l) * (d(j, m) * d(k, n) - d(j, n) * d(k, m))
                                - d(i, m) * (d(j, l) * d(k, n) - d(j, n) * d(k, l))
                                + d(i, n) * (d(j, l) * d(k, m) - d(j, m) * d(k, l));
                            assert_eq!(full, det);
                        }
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn anti_axl_round_trip(v in rat_vec(), a in rat_mat()) {
        prop_assert_eq!(v.anti().axl_unchecked(), v.clone());
        let skew = a.skew();
        prop_assert_eq!(skew.axl_unchecked().anti(), skew);
    }

    #[test]
    fn cartan_decomposition(x in rat_mat()) {
        let third = x.trace() * rational(1, 3);
        let vol = Mat3::identity().scale(&third);
        let dev = x.sym().dev();
        let skew = x.skew();
        prop_assert_eq!(dev.clone() + skew.clone() + vol.clone(), x);
        let zero = rational(0, 1);
        prop_assert_eq!(dev.inner(&skew), zero.clone());
        prop_assert_eq!(dev.inner(&vol), zero.clone());
        prop_assert_eq!(skew.inner(&vol), zero);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn differential_operator_identities(u in quartic()) {
        prop_assert!(pf::div_vec(&pf::curl_vec(&u)).is_empty());
        prop_assert!(pf::grad_vec(&pf::curl_vec(&u)).trace().is_empty());
        let g = pf::grad_vec(&u);
        prop_assert!(zero_polys(pf::div_mat(&pf::curl_mat(&g)).0));
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    prop_assert_eq!(u[i].diff(j).diff(k), u[i].diff(k).diff(j));
                }
            }
        }
    }

    #[test]
    fn derivatives_agree_with_finite_differences(u in quartic(), x in rat_vec(), axis in 0usize..3) {
        let xf: Vec3<f64> = Vec3::from_rationals(&x).map(|v: &f64| v / 8.0);
        let h = 1e-5;
        for i in 0..3 {
            let exact = u[i].diff(axis).eval(&xf);
            let mut plus = xf.clone();
            let mut minus = xf.clone();
            plus.0[axis] += h;
            minus.0[axis] -= h;
            let fd = (u[i].eval(&plus) - u[i].eval(&minus)) / (2.0 * h);
            let scale = exact.abs().max(1.0);
            prop_assert!((fd - exact).abs() / scale < 1e-6, "component {} exact {} fd {}", i, exact, fd);
        }
    }

    #[test]
    fn constitutive_forms_agree(p in params(), u in quartic(), x in rat_vec()) {
        let jet: Jet<Rational> = Jet::of(&u).eval(&x);
        let lin = cst::energy_lin(&p, &jet.grad);
        prop_assert_eq!(&lin[0], &lin[1]);
        let curv = cst::energy_curv(&p, &jet.hess);
        prop_assert!(curv.iter().all(|w| w == &curv[0]));
        let m = cst::couple_stress_forms(&p, &jet.hess);
        prop_assert!(m.iter().all(|f| f == &m[0]));
        let h = cst::hyperstress_forms(&p, &jet.hess);
        prop_assert!(h.iter().all(|f| f == &h[0]));
        let tau = cst::nonlocal_stress_forms(&p, &jet.third);
        prop_assert!(tau.iter().all(|f| f == &tau[0]));
        let g = GrioliParams { eta: rational(1, 3), length_scale: rational(2, 1) };
        let lines = cst::energy_grioli(&p, &g, &jet.hess);
        prop_assert!(lines.iter().all(|l| l == &lines[0]));
    }

    #[test]
    fn field_level_reductions(p in params(), u in quartic()) {
        prop_assert!(zero_polys(fields::grioli_bulk_contribution(&u).0));
        let third = fields::nonlocal_stress_third_order(&p, &u);
        let skew = fields::nonlocal_stress(&p, &u);
        let lap = fields::nonlocal_stress_laplacian(&p, &u);
        prop_assert!(zero_polys(mat_polys(third - skew.clone())));
        prop_assert!(zero_polys(mat_polys(skew - lap)));
        let [a, b] = fields::bulk_operator(&p, &u);
        prop_assert!(zero_polys((a - b).0));
    }

    #[test]
    fn hyperstress_normal_contraction(p in params(), u in quartic(), x in rat_vec(), s in small_rational(), t in small_rational()) {
        let jet: Jet<Rational> = Jet::of(&u).eval(&x);
        let n = sphere_point(&s, &t);
        let lhs = cst::hyperstress(&p, &jet.hess).dot_vec(&n);
        let rhs = cst::couple_stress(&p, &jet.hess).apply(&n).anti().scale_q(&rational(1, 2));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn low_degree_fields(p in params(), seed in any::<u64>(), x in rat_vec()) {
        let u = random_field(seed, 1, 10);
        let jet: Jet<Rational> = Jet::of(&u).eval(&x);
        let state = cst::StressState::from_jet(&p, &jet);
        prop_assert!(state.couple.is_zero());
        prop_assert!(state.hyper.is_zero());
        prop_assert!(state.nonlocal.is_zero());
        let w = Vec3::from_fn(|i| Poly::constant(x[i].clone()));
        let rigid = w.cross(&Vec3::from_fn(Poly::var)) + Vec3::from_fn(|i| Poly::constant(rational(i as i64 + 1, 1)));
        let jet: Jet<Rational> = Jet::of(&rigid).eval(&x);
        prop_assert!(cst::cauchy_stress(&p, &jet.grad).is_zero());
    }
}

fn surfaces() -> [LevelSurface; 3] {
    [LevelSurface::plane(), LevelSurface::unit_sphere(), LevelSurface::ellipsoid()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn boundary_relations_exact(p in params(), u in quartic(), seed in any::<u64>(), which in 0usize..3) {
        let surface = &surfaces()[which];
        let x = surface.sample_points(seed, 1).unwrap().remove(0);
        let b = BoundaryState::<Surd>::from_field(&p, &u, surface, Vec3::from_rationals(&x)).unwrap();
        let n = b.point.normal.clone();
        let g = b.doubleforce_strong();
        prop_assert_eq!(g.clone(), b.doubleforce_mindlin().cross(&n));
        prop_assert!(g.dot(&n).is_zero());
        prop_assert!(b.comparison_residual().is_zero());
        prop_assert_eq!(b.traction_strong(), b.traction_third_order());
        let (t_mapped, g_mapped) = map_tractions_m2s(&b.traction_mindlin(), &b.doubleforce_mindlin_dual(), &b.point);
        prop_assert_eq!(t_mapped, b.traction_strong());
        prop_assert_eq!(g_mapped, b.doubleforce_strong_anti());
    }

    #[test]
    fn projector_algebra_and_inserted_projectors(u in quartic(), seed in any::<u64>(), which in 0usize..3) {
        let surface = &surfaces()[which];
        let x = surface.sample_points(seed, 1).unwrap().remove(0);
        let point = surface.point::<Surd>(Vec3::from_rationals(&x)).unwrap();
        let (t, q) = projectors(&point.normal);
        prop_assert_eq!(t.dot(&t), t.clone());
        prop_assert_eq!(q.dot(&q), q.clone());
        prop_assert!(t.dot(&q).is_zero());
        prop_assert!(t.apply(&point.normal).is_zero());
        let m = pf::eval_mat(&pf::grad_vec(&u), &point.dual_x);
        let td = point.dual_tangential();
        let base = tangential_gradient_contraction(&m, &point);
        prop_assert_eq!(grad_colon(&m.dot(&td).dot(&td), &point.tangential), base.clone());
        prop_assert_eq!(grad_colon(&m.dot(&td), &point.tangential.dot(&point.tangential)), base);
    }
}

#[test]
fn anti_normal_vanishes_on_custom_level_set() {
    // x1² + 2 x2² − x3 = 0, a paraboloid not among the built-in surfaces
    let level = pf::parse_poly("x1^2 + 2 x2^2 - x3").unwrap();
    let surface = LevelSurface::new("paraboloid", level);
    for (a, b) in [(1, 2), (-3, 1), (2, -5), (1, 7), (4, 3), (-2, -2), (5, 1), (0, 3), (3, 0), (-1, 4)] {
        let (x1, x2) = (rational(a, 3), rational(b, 5));
        let x3 = &x1 * &x1 + &x2 * &x2 * rational(2, 1);
        let x = Vec3::from_rationals(&Vec3([x1, x2, x3]));
        let v = couple_stress::surface_geom::anti_normal_vanishing::<Surd>(&surface, &x).unwrap();
        assert!(v.is_zero(), "{v:?}");
    }
}

fn small_config(mode: Mode) -> Config {
    let mut c = Config::default();
    c.mode = mode;
    c.corpus.count = 4;
    c.corpus.points_per_surface = 3;
    c
}

#[test]
fn suite_is_deterministic() {
    for mode in [Mode::Rational, Mode::Float] {
        let mut a = run_suite(&small_config(mode)).unwrap();
        let mut b = run_suite(&small_config(mode)).unwrap();
        a.wall_clock_ms = 0;
        b.wall_clock_ms = 0;
        assert_eq!(to_json(&a), to_json(&b));
    }
}

#[test]
fn float_mode_residuals_are_small_but_exact_mode_zero() {
    let exact = run_suite(&small_config(Mode::Rational)).unwrap();
    let float = run_suite(&small_config(Mode::Float)).unwrap();
    for (e, f) in exact.checks.iter().zip(&float.checks) {
        assert_eq!(e.id, f.id);
        if e.id != "I15_mixed2_witness" {
            assert_eq!(e.nonzero_residuals, 0, "{}", e.id);
        }
        assert!(f.max_relative_residual < 1e-10, "{} {}", f.id, f.max_relative_residual);
    }
    assert!(Surd::EXACT && !f64::EXACT);
}
