//! Brute-force index-loop oracles for tensors and contractions, with
//! derivatives taken term by term from the monomial list. Each check panics on
//! the first mismatch.

use couple_stress::constitutive::{self as cst, MaterialParams, StressState};
use couple_stress::poly_fields::{random_field, random_rational, Jet, PolyVec};
use couple_stress::scalar::{rational, Rational};
use couple_stress::tensor_core::{Mat3, Ten3, Vec3};
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn eps(i: usize, j: usize, k: usize) -> Rational {
    let v = match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
        _ => 0,
    };
    rational(v, 1)
}

fn delta(i: usize, j: usize) -> Rational {
    rational((i == j) as i64, 1)
}

fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + salt)
}

fn rq(rng: &mut ChaCha8Rng) -> Rational {
    random_rational(rng, 9, 7)
}

fn rvec(rng: &mut ChaCha8Rng) -> Vec3<Rational> {
    Vec3::from_fn(|_| rq(rng))
}

fn rmat(rng: &mut ChaCha8Rng) -> Mat3<Rational> {
    Mat3::from_fn(|_, _| rq(rng))
}

fn rten(rng: &mut ChaCha8Rng) -> Ten3<Rational> {
    Ten3::from_fn(|_, _, _| rq(rng))
}

fn params(rng: &mut ChaCha8Rng) -> MaterialParams {
    let mu = random_rational(rng, 9, 7).abs() + rational(1, 7);
    MaterialParams::new(mu, rq(rng), rq(rng), rq(rng)).unwrap()
}

/// `∂^orders u_i (x)` by the power rule applied to each stored monomial.
fn derivative(u: &PolyVec, i: usize, axes: &[usize], x: &Vec3<Rational>) -> Rational {
    let mut total = Rational::zero();
    for (mono, coef) in u[i].terms() {
        let mut exps = mono.0;
        let mut c = coef.clone();
        for &a in axes {
            if exps[a] == 0 {
                c = Rational::zero();
                break;
            }
            c *= rational(exps[a] as i64, 1);
            exps[a] -= 1;
        }
        if c.is_zero() {
            continue;
        }
        let mut v = c;
        for (a, &e) in exps.iter().enumerate() {
            for _ in 0..e {
                v *= &x[a];
            }
        }
        total += v;
    }
    total
}

struct Derivs {
    d1: [[Rational; 3]; 3],
    d2: [[[Rational; 3]; 3]; 3],
    d3: [[[[Rational; 3]; 3]; 3]; 3],
}

fn derivs(u: &PolyVec, x: &Vec3<Rational>) -> Derivs {
    Derivs {
        d1: std::array::from_fn(|i| std::array::from_fn(|j| derivative(u, i, &[j], x))),
        d2: std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| derivative(u, i, &[j, k], x)))),
        d3: std::array::from_fn(|i| {
            std::array::from_fn(|j| std::array::from_fn(|k| std::array::from_fn(|l| derivative(u, i, &[j, k, l], x))))
        }),
    }
}

/// `G_ij = ∂_j (curl u)_i` from second derivatives.
fn curl_grad(d2: &[[[Rational; 3]; 3]; 3]) -> [[Rational; 3]; 3] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut s = Rational::zero();
            for k in 0..3 {
                for l in 0..3 {
                    s += eps(i, k, l) * &d2[l][k][j];
                }
            }
            s
        })
    })
}

/// Curvature energy `α₁/4 ‖dev sym G‖² + α₂/4 ‖skew G‖²` by index loops.
fn curvature_energy(p: &MaterialParams, g: &[[Rational; 3]; 3]) -> Rational {
    let tr = (0..3).fold(Rational::zero(), |a, i| a + &g[i][i]);
    let mut sym2 = Rational::zero();
    let mut skew2 = Rational::zero();
    for i in 0..3 {
        for j in 0..3 {
            let s = (&g[i][j] + &g[j][i]) / rational(2, 1) - delta(i, j) * &tr / rational(3, 1);
            let a = (&g[i][j] - &g[j][i]) / rational(2, 1);
            sym2 += &s * &s;
            skew2 += &a * &a;
        }
    }
    p.alpha1() * sym2 / rational(4, 1) + p.alpha2() * skew2 / rational(4, 1)
}

/// `m̃ = 2 ∂W/∂G`, read off by polarization on the basis matrices.
fn couple_oracle(p: &MaterialParams, g: &[[Rational; 3]; 3]) -> [[Rational; 3]; 3] {
    let w0 = curvature_energy(p, g);
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut e = std::array::from_fn::<[Rational; 3], 3, _>(|_| std::array::from_fn(|_| Rational::zero()));
            e[a][b] = Rational::one();
            let shifted: [[Rational; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| &g[i][j] + &e[i][j]));
            (curvature_energy(p, &shifted) - &w0 - curvature_energy(p, &e)) * rational(2, 1)
        })
    })
}

fn mat_eq(lib: &Mat3<Rational>, oracle: &[[Rational; 3]; 3], what: &str) {
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(lib.at(i, j), &oracle[i][j], "{what} entry ({i},{j})");
        }
    }
}

pub fn contractions_match_index_loops(cases: usize) {
    let mut r = rng(1);
    for _ in 0..cases {
        let (a, b) = (rmat(&mut r), rmat(&mut r));
        let (v, w) = (rvec(&mut r), rvec(&mut r));
        let c = rten(&mut r);

        let mut colon = Rational::zero();
        let mut inner = Rational::zero();
        for i in 0..3 {
            for j in 0..3 {
                colon += a.at(i, j) * b.at(j, i);
                inner += a.at(i, j) * b.at(i, j);
            }
        }
        assert_eq!(a.colon(&b), colon);
        assert_eq!(a.inner(&b), inner);

        for i in 0..3 {
            let mut av = Rational::zero();
            let mut cross = Rational::zero();
            for j in 0..3 {
                av += a.at(i, j) * &v[j];
                for k in 0..3 {
                    cross += eps(i, j, k) * &v[j] * &w[k];
                }
                let mut prod = Rational::zero();
                let mut anti = Rational::zero();
                let mut cn = Rational::zero();
                for k in 0..3 {
                    prod += a.at(i, k) * b.at(k, j);
                    anti -= eps(i, j, k) * &v[k];
                    cn += c.at(i, j, k) * &v[k];
                }
                assert_eq!(a.dot(&b).at(i, j), &prod);
                assert_eq!(v.anti().at(i, j), &anti);
                assert_eq!(c.dot_vec(&v).at(i, j), &cn);
                assert_eq!(v.outer(&w).at(i, j), &(&v[i] * &w[j]));
                for k in 0..3 {
                    assert_eq!(c.transpose12().at(i, j, k), c.at(j, i, k));
                    assert_eq!(v.outer_identity().at(i, j, k), &(&v[i] * delta(j, k)));
                }
            }
            assert_eq!(a.apply(&v)[i], av);
            assert_eq!(v.cross(&w)[i], cross);
            let mut cb = Rational::zero();
            for j in 0..3 {
                for q in 0..3 {
                    cb += c.at(i, j, q) * b.at(q, j);
                }
            }
            assert_eq!(c.colon_mat(&b)[i], cb);
        }
        assert_eq!(v.anti().apply(&w), v.cross(&w));
        let skew = a.skew();
        let axl = skew.axl_unchecked();
        assert_eq!(axl.anti(), skew);
    }
}

pub fn jets_match_term_by_term_derivatives(cases: usize) {
    for case in 0..cases as u64 {
        let mut r = rng(100 + case);
        let u = random_field(0xabc0 + case, 4, 12);
        let x = rvec(&mut r);
        let jet: Jet<Rational> = Jet::of(&u).eval(&x);
        let d = derivs(&u, &x);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(jet.grad.at(i, j), &d.d1[i][j]);
                for k in 0..3 {
                    assert_eq!(jet.hess.at(i, j, k), &d.d2[i][j][k]);
                    for l in 0..3 {
                        assert_eq!(jet.third.at(i, j, k, l), &d.d3[i][j][k][l]);
                    }
                }
            }
        }
    }
}

pub fn constitutive_tensors_match_oracles(cases: usize) {
    for case in 0..cases as u64 {
        let mut r = rng(1000 + case);
        let p = params(&mut r);
        let u = random_field(0xdef0 + case, 4, 12);
        let x = rvec(&mut r);
        let d = derivs(&u, &x);
        let jet: Jet<Rational> = Jet::of(&u).eval(&x);
        let state = StressState::from_jet(&p, &jet);

        let div: Rational = (0..3).fold(Rational::zero(), |s, k| s + &d.d1[k][k]);
        let sigma: [[Rational; 3]; 3] = std::array::from_fn(|i| {
            std::array::from_fn(|j| p.mu() * (&d.d1[i][j] + &d.d1[j][i]) + p.lambda() * delta(i, j) * &div)
        });
        mat_eq(&state.cauchy, &sigma, "cauchy stress");

        let g = curl_grad(&d.d2);
        let m = couple_oracle(&p, &g);
        mat_eq(&state.couple, &m, "couple stress");
        for form in cst::couple_stress_forms(&p, &jet.hess) {
            mat_eq(&form, &m, "couple stress form");
        }

        // Div m̃ from the x-derivative of G, then τ̃ = ½ anti(Div m̃).
        let div_m: [Rational; 3] = std::array::from_fn(|i| {
            let mut s = Rational::zero();
            for l in 0..3 {
                let dg: [[Rational; 3]; 3] = std::array::from_fn(|a| {
                    std::array::from_fn(|b| {
                        let mut t = Rational::zero();
                        for k in 0..3 {
                            for q in 0..3 {
                                t += eps(a, k, q) * &d.d3[q][k][b][l];
                            }
                        }
                        t
                    })
                });
                s += &couple_oracle(&p, &dg)[i][l];
            }
            s
        });
        let tau: [[Rational; 3]; 3] = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..3).fold(Rational::zero(), |s, k| s - eps(i, j, k) * &div_m[k]) / rational(2, 1)
            })
        });
        mat_eq(&state.nonlocal, &tau, "nonlocal stress");
        for (k, form) in cst::nonlocal_stress_forms(&p, &jet.third).iter().enumerate() {
            mat_eq(form, &tau, &format!("nonlocal stress form {k}"));
        }
    }
}

/// The hyperstress paired with `∇∇δu` gives `½⟨m̃, ∇curl δu⟩`, and is skew in
/// its first two indices.
pub fn hyperstress_matches_work_pairing(cases: usize) {
    for case in 0..cases as u64 {
        let mut r = rng(5000 + case);
        let p = params(&mut r);
        let hess: Ten3<Rational> = {
            let raw = rten(&mut r);
            Ten3::from_fn(|i, j, k| (raw.at(i, j, k) + raw.at(i, k, j)) / rational(2, 1))
        };
        let virt = {
            let raw = rten(&mut r);
            Ten3::from_fn(|i, j, k| (raw.at(i, j, k) + raw.at(i, k, j)) / rational(2, 1))
        };
        let g_virt: [[Rational; 3]; 3] = {
            let d2: [[[Rational; 3]; 3]; 3] =
                std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| virt.at(i, j, k).clone())));
            curl_grad(&d2)
        };
        let d2: [[[Rational; 3]; 3]; 3] =
            std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| hess.at(i, j, k).clone())));
        let m = couple_oracle(&p, &curl_grad(&d2));
        let mut work_couple = Rational::zero();
        for i in 0..3 {
            for j in 0..3 {
                work_couple += &m[i][j] * &g_virt[i][j];
            }
        }
        for form in cst::hyperstress_forms(&p, &hess) {
            let mut work = Rational::zero();
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        work += form.at(i, j, k) * virt.at(i, j, k);
                        assert_eq!(form.at(i, j, k), &-form.at(j, i, k).clone());
                    }
                }
            }
            assert_eq!(work * rational(2, 1), work_couple);
        }
    }
}
