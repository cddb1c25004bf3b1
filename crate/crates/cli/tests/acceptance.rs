//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use couple_stress::boundary_tractions::BoundaryState;
use couple_stress::config::{Config, Mode};
use couple_stress::constitutive::{fields, MaterialParams};
use couple_stress::poly_fields::{eval_vec, random_field, random_rational, Poly};
use couple_stress::scalar::{rational, Ring, Surd};
use couple_stress::surface_geom::{anti_normal_vanishing, LevelSurface};
use couple_stress::tensor_core::Vec3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_couple-stress");

type Verdict = Result<String, String>;

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn default_config_path() -> PathBuf {
    repo_root().join("configs/default.json")
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn couple-stress")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

struct DefaultRun {
    exit: i32,
    elapsed: Duration,
    report: Value,
}

fn default_run(dir: &Path) -> Result<DefaultRun, String> {
    let out = dir.join("default");
    let start = Instant::now();
    let o = run(&["verify", "--config", default_config_path().to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let elapsed = start.elapsed();
    let text = std::fs::read_to_string(out.join("report.json")).map_err(|e| format!("no report: {e}"))?;
    let report = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    Ok(DefaultRun { exit: code(&o), elapsed, report })
}

fn check<'a>(report: &'a Value, id: &str) -> Result<&'a Value, String> {
    report["checks"]
        .as_array()
        .and_then(|cs| cs.iter().find(|c| c["id"] == id))
        .ok_or_else(|| format!("{id} missing from report"))
}

fn exact_zero(report: &Value, id: &str) -> Result<u64, String> {
    let c = check(report, id)?;
    let evals = c["evaluations"].as_u64().unwrap_or(0);
    ensure(c["status"] == "pass", format!("{id} status {}", c["status"]))?;
    ensure(c["nonzero_residuals"] == 0, format!("{id} has {} nonzero residuals", c["nonzero_residuals"]))?;
    ensure(c["max_residual"] == "0", format!("{id} max residual {}", c["max_residual"]))?;
    ensure(evals > 0, format!("{id} ran no evaluations"))?;
    Ok(evals)
}

fn criterion_1(d: &DefaultRun) -> Verdict {
    let r = &d.report;
    ensure(r["mode"] == "rational", "default mode is not rational")?;
    ensure(r["corpus"]["fields"] == 20 && r["corpus"]["degree"] == 4, "default corpus is not 20 quartic fields")?;
    ensure(r["corpus"]["surfaces"].as_array().map(Vec::len) == Some(3), "default corpus is not 3 surfaces")?;
    ensure(r["corpus"]["points_per_surface"] == 10, "default corpus is not 10 points per surface")?;
    let mut total = 0;
    for id in [
        "I01_energy_forms",
        "I02_grioli",
        "I03_Mn",
        "I04_bulk_reduction",
        "I05_reduction_identities",
        "I06_direct_tensors",
        "I07_comparison",
        "I08_anti_normal",
        "I09_normal_part",
        "I10_projectors",
        "I11_surface_divergence",
        "I12_stokes",
        "I13_bulk_equation",
        "I16_kinematic",
    ] {
        total += exact_zero(r, id)?;
    }
    ensure(d.elapsed < Duration::from_secs(300), format!("took {:?}", d.elapsed))?;
    Ok(format!("14 checks, {total} evaluations, all residuals literally zero, {:.1}s", d.elapsed.as_secs_f64()))
}

fn criterion_2() -> Verdict {
    let p = MaterialParams::new(rational(1, 1), rational(1, 2), rational(3, 1), rational(1, 1)).unwrap();
    let fields_checked = 100;
    for seed in 0..fields_checked {
        let u = random_field(0xc2_0000 + seed, 4, 10);
        ensure(u.0.iter().filter_map(Poly::degree).max() == Some(4), format!("field {seed} is not quartic"))?;
        let div_hyper = fields::nonlocal_stress_third_order(&p, &u);
        let half_anti = fields::nonlocal_stress(&p, &u);
        let diff = div_hyper - half_anti;
        ensure(diff.0.iter().flatten().all(Poly::is_empty), format!("nonzero difference polynomial for field {seed}"))?;
    }
    Ok(format!("zero difference polynomial on {fields_checked} quartic fields"))
}

fn criterion_3() -> Verdict {
    let p = MaterialParams::new(rational(2, 1), rational(-1, 3), rational(5, 2), rational(-3, 4)).unwrap();
    let mut asymmetric = 0;
    let mut count = 0;
    for (k, surface) in [LevelSurface::unit_sphere(), LevelSurface::ellipsoid()].iter().enumerate() {
        let points = surface.sample_points(0xc3 + k as u64, 30).map_err(|e| e.to_string())?;
        ensure(points.len() >= 30, "too few points")?;
        for (i, x) in points.iter().enumerate() {
            let u = random_field(0xc3_0000 + (k * 100 + i) as u64, 4, 10);
            let b = BoundaryState::<Surd>::from_field(&p, &u, surface, Vec3::from_rationals(x)).map_err(|e| e.to_string())?;
            let r = b.comparison_residual();
            ensure(r.is_zero(), format!("nonzero residual on {} at point {i}: {r:?}", surface.name()))?;
            let mags: Vec<_> = x.0.iter().map(|c| num_traits::Signed::abs(c)).collect();
            if x.0.iter().all(|c| !num_traits::Zero::is_zero(c)) && mags[0] != mags[1] && mags[1] != mags[2] && mags[0] != mags[2] {
                asymmetric += 1;
            }
            count += 1;
        }
    }
    ensure(asymmetric >= 10, format!("only {asymmetric} points off the symmetry planes"))?;
    Ok(format!("zero residual at {count} points on sphere and ellipsoid ({asymmetric} with no axis symmetry)"))
}

fn criterion_4() -> Verdict {
    let mut n = 0;
    let surfaces = [LevelSurface::plane(), LevelSurface::unit_sphere(), LevelSurface::ellipsoid(), LevelSurface::saddle()];
    for (k, s) in surfaces.iter().enumerate() {
        for x in s.sample_points(0xc4 + k as u64, 10).map_err(|e| e.to_string())? {
            let v = anti_normal_vanishing::<Surd>(s, &Vec3::from_rationals(&x)).map_err(|e| e.to_string())?;
            ensure(v.is_zero(), format!("nonzero on {} at {x:?}", s.name()))?;
            n += 1;
        }
    }
    Ok(format!("exact zero on {} level sets, {n} points", surfaces.len()))
}

fn criterion_5(d: &DefaultRun) -> Verdict {
    let evals = exact_zero(&d.report, "I14_fully_traction")?;
    let c = &d.report["corpus"];
    let expected = c["fields"].as_u64().unwrap_or(0) * c["points_per_surface"].as_u64().unwrap_or(0) * 3;
    ensure(evals == expected * 4, format!("{evals} comparisons, expected {}", expected * 4))?;
    Ok(format!("map reproduces strong tractions exactly at all {expected} field/point pairs"))
}

fn criterion_6(d: &DefaultRun) -> Verdict {
    let c = check(&d.report, "I15_mixed2_witness")?;
    ensure(c["status"] == "pass", "witness check did not pass")?;
    let w = &c["witness"];
    ensure(w["surface"] == "sphere", format!("witness on {}", w["surface"]))?;
    let norm = w["norm_f64"].as_f64().unwrap_or(0.0);
    ensure(norm > 1e-6, format!("witness norm {norm}"))?;
    ensure(w["residual"].as_array().is_some_and(|r| r.iter().any(|x| x != "0")), "witness residual is zero")?;
    Ok(format!("field {} on the unit sphere, exact nonzero residual, norm {norm:.4e}", w["field"]))
}

fn criterion_7(dir: &Path) -> Verdict {
    let out = dir.join("integrals");
    let o = run(&["integrals", "--config", default_config_path().to_str().unwrap(), "--out", out.to_str().unwrap()]);
    ensure(code(&o) == 0, format!("integrals exited {}: {}", code(&o), String::from_utf8_lossy(&o.stderr)))?;
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out.join("integrals.json")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let rows = r["rows"].as_array().ok_or("no rows")?;
    let mut worst: f64 = 0.0;
    for row in rows {
        let levels = row["levels"].as_array().ok_or("no levels")?;
        let last = levels.last().ok_or("empty levels")?;
        ensure(last["nodes"] == 64, "finest level is not 64 nodes per direction")?;
        let res = last["relative_residual"].as_f64().unwrap_or(f64::INFINITY);
        ensure(res < 1e-8, format!("{} {} {}: residual {res}", row["identity"], row["patch"], row["field"]))?;
        ensure(row["converged"] == true, format!("{} {} {} did not converge", row["identity"], row["patch"], row["field"]))?;
        worst = worst.max(res);
    }
    let disc = rows
        .iter()
        .find(|row| row["identity"] == "closed-form-disc-circulation")
        .ok_or("no closed-form disc row")?;
    let approx = disc["levels"].as_array().unwrap().last().unwrap()["surface"].as_f64().unwrap();
    let err = (approx - 2.0 * std::f64::consts::PI).abs();
    ensure(err < 1e-8, format!("disc circulation off by {err}"))?;
    Ok(format!("{} rows converged, worst residual at 64² nodes {worst:.2e}, disc |Δ2π| = {err:.1e}", rows.len()))
}

fn criterion_8() -> Verdict {
    let cases = 120;
    let runs: [(&str, fn(usize)); 4] = [
        ("contractions", oracle::contractions_match_index_loops),
        ("jets", oracle::jets_match_term_by_term_derivatives),
        ("constitutive tensors", oracle::constitutive_tensors_match_oracles),
        ("hyperstress work pairing", oracle::hyperstress_matches_work_pairing),
    ];
    for (name, f) in runs {
        catch_unwind(AssertUnwindSafe(|| f(cases))).map_err(|e| {
            let msg = e.downcast_ref::<String>().cloned().unwrap_or_default();
            format!("{name} oracle mismatch: {msg}")
        })?;
    }
    Ok(format!("4 oracle families, {cases} random rational inputs each, exact equality"))
}

fn criterion_9(d: &DefaultRun) -> Verdict {
    exact_zero(&d.report, "I13_bulk_equation")?;
    let p = MaterialParams::new(rational(1, 1), rational(1, 2), rational(3, 1), rational(1, 1)).unwrap();
    let u = random_field(0xc9, 4, 10);
    let [form_third, form_skew] = fields::bulk_operator(&p, &u);
    ensure((form_third.clone() - form_skew.clone()).0.iter().all(Poly::is_empty), "bulk forms differ")?;
    let f = fields::manufactured_body_force(&p, &u);
    let mut rng = ChaCha8Rng::seed_from_u64(0xc9);
    for _ in 0..20 {
        let x = Vec3::from_fn(|_| random_rational(&mut rng, 3, 11));
        let residual = eval_vec(&form_skew, &x) + eval_vec(&f, &x);
        ensure(residual.0.iter().all(Ring::is_zero), format!("nonzero residual at {x:?}"))?;
    }
    Ok("residual exactly zero at 20 random points; both bulk forms agree".into())
}

fn criterion_10(d: &DefaultRun, dir: &Path) -> Verdict {
    ensure(d.exit == 0, format!("default verify exited {}", d.exit))?;

    let corrupt = dir.join("corrupt.json");
    let mut config = Config::default();
    config.corpus.fields = Some(vec!["x1^2; 3 x2 ^^ 2; 0".into()]);
    std::fs::write(&corrupt, config.to_json()).map_err(|e| e.to_string())?;
    let o = run(&["verify", "--config", corrupt.to_str().unwrap(), "--out", dir.join("c").to_str().unwrap()]);
    let stderr = String::from_utf8_lossy(&o.stderr);
    ensure(code(&o) == 2, format!("corrupted config exited {}", code(&o)))?;
    ensure(stderr.contains("x2 ^^ 2"), format!("diagnostic does not name the term: {stderr}"))?;

    let zero_tol = dir.join("float0.json");
    let mut config = Config::default();
    config.mode = Mode::Float;
    config.tolerance = 0.0;
    std::fs::write(&zero_tol, config.to_json()).map_err(|e| e.to_string())?;
    let o = run(&["verify", "--config", zero_tol.to_str().unwrap(), "--out", dir.join("f").to_str().unwrap()]);
    ensure(code(&o) == 1, format!("float tolerance 0 exited {}", code(&o)))?;
    ensure(String::from_utf8_lossy(&o.stderr).contains("FAIL"), "no residual listing")?;
    Ok("verify exits 0 / 2 / 1 for default / corrupted / float tolerance 0".into())
}

fn main() {
    let dir = tempfile::tempdir().expect("tempdir");
    let default = default_run(dir.path());
    let from_default = |f: &dyn Fn(&DefaultRun) -> Verdict| match &default {
        Ok(d) => f(d),
        Err(e) => Err(format!("default verify run failed: {e}")),
    };
    let results: Vec<(u32, &str, Verdict)> = vec![
        (1, "exact identity suite", from_default(&criterion_1)),
        (2, "reduction theorem on 100 quartic fields", criterion_2()),
        (3, "comparison proposition on sphere and ellipsoid", criterion_3()),
        (4, "anti-normal lemma on level sets", criterion_4()),
        (5, "fully traction equivalence", from_default(&criterion_5)),
        (6, "mixed-2 non-equivalence witness", from_default(&criterion_6)),
        (7, "integral theorems under refinement", criterion_7(dir.path())),
        (8, "oracle equivalence", criterion_8()),
        (9, "manufactured bulk solution", from_default(&criterion_9)),
        (10, "CLI exit-code contract", from_default(&|d| criterion_10(d, dir.path()))),
    ];
    let mut failed = 0;
    for (n, name, verdict) in &results {
        match verdict {
            Ok(detail) => println!("PASS criterion {n:>2} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n:>2} {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
