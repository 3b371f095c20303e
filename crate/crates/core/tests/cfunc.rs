mod common;

use std::f64::consts::PI;

use common::*;
use hypergeo::cfunc::*;
use hypergeo::hyper::Hypergeometric;
use hypergeo::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn imag(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|t| c(0.0, *t)).collect()
}

#[test]
fn log_gamma_examples() {
    assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-15);
    assert!((log_gamma(c(5.0, 0.0)).unwrap() - 24f64.ln()).norm() < 1e-13 * 24f64.ln());
    let half = log_gamma(c(0.5, 0.0)).unwrap();
    // 0.5 log(pi) = 0.57236494292470008707171367567652935582...
    assert!((half.re - 0.572_364_942_924_700_087).abs() < 1e-13 * 0.5724);
    assert!(half.im.abs() < 1e-15);
    for n in [0i32, -1, -7] {
        assert!(matches!(log_gamma(c(n as f64, 0.0)), Err(CFunctionError::GammaPole(_))));
    }
}

#[test]
fn log_gamma_relative_accuracy_on_reference_values() {
    let mut fact = 1.0f64;
    for n in 1..=19 {
        // Gamma(n + 1) = n!, Gamma(n + 1/2) = (2n)! sqrt(pi) / (4^n n!)
        fact *= n as f64;
        let g = gamma(c(n as f64 + 1.0, 0.0)).unwrap();
        assert!(rel_err(g, c(fact, 0.0)) < 1e-13, "n = {n}");
        let mut half = PI.sqrt();
        for k in 0..n {
            half *= k as f64 + 0.5;
        }
        assert!(rel_err(gamma(c(n as f64 + 0.5, 0.0)).unwrap(), c(half, 0.0)) < 1e-13, "n = {n}");
    }
}

proptest! {
    #[test]
    fn gamma_recurrence_and_reflection(re in -6.0f64..20.0, im in -8.0f64..8.0) {
        let z = c(re, im);
        prop_assume!((z - z.re.round()).norm() > 1e-3);
        let g = gamma(z).unwrap();
        let g1 = gamma(z + 1.0).unwrap();
        prop_assert!(rel_err(g1, z * g) < 1e-12);
        let refl = gamma(1.0 - z).unwrap() * g;
        let expected = Complex64::new(PI, 0.0) / (z * PI).sin();
        prop_assert!(rel_err(refl, expected) < 1e-11);
        prop_assert!((rgamma(z) * g - 1.0).norm() < 1e-13);
    }
}

#[test]
fn rank_one_factor_example() {
    let rs = bc1(1.0, 0.0);
    let ctx = CFunctionContext::new(&rs);
    let v = match ctx.c_alpha(0, &[c(0.5, 0.0)]) {
        CValue::Finite(v) => v,
        other => panic!("{other:?}"),
    };
    // 2^{-1/2} Gamma(1/2) / (Gamma(1) Gamma(1/2))
    assert!(rel_err(v, c(0.5f64.sqrt(), 0.0)) < 1e-13);
    let CValue::Finite(w) = ctx.c_alpha(0, &[c(1.5, 0.0)]) else { panic!() };
    // 2^{-3/2} Gamma(3/2) / (Gamma(3/2) Gamma(1))
    assert!(rel_err(w, c(0.125f64.sqrt(), 0.0)) < 1e-13);
}

#[test]
fn factor_poles_are_descriptors() {
    // With m = 2 the denominator cancels every pole except the one at 0.
    for (rs, levels) in [(bc1(1.0, 0.0), &[0.0, 1.0, 2.0][..]), (bc1(2.5, 0.7), &[0.0, 1.0, 2.0]), (a1(2.0), &[0.0])] {
        let ctx = CFunctionContext::new(&rs);
        let alpha = rs.positive_roots()[0].clone();
        for &n in levels {
            let lam: Vec<Complex64> = alpha.vector.iter().map(|a| c(-n * a, 0.0)).collect();
            match ctx.c_alpha(0, &lam) {
                CValue::Pole(p) => {
                    assert_eq!(p.hyperplanes[0].level, -n);
                    assert_eq!(p.hyperplanes[0].kind, HyperplaneKind::Pole);
                }
                other => panic!("{}: expected pole at -{n}, got {other:?}", rs.label()),
            }
            assert!(matches!(ctx.value(&lam), Err(CFunctionError::Pole(_))));
        }
    }
}

#[test]
fn complex_case_factor_is_inverse_linear() {
    let rs = a1(2.0);
    let ctx = CFunctionContext::new(&rs);
    let alpha = rs.positive_roots()[0].clone();
    let mut constant = None;
    for lam in [c(0.3, 0.0), c(1.7, -2.2), c(-0.4, 0.9), c(5.0, 3.0)] {
        let v: Vec<Complex64> = alpha.vector.iter().map(|a| lam * *a / alpha.norm2).collect();
        let la = alpha.coroot_coord(&v);
        let CValue::Finite(f) = ctx.c_alpha(0, &v) else { panic!() };
        let k = la * f;
        let k0 = *constant.get_or_insert(k);
        assert!(rel_err(k, k0) < 1e-12);
    }
}

#[test]
fn normalized_at_rho_for_every_system() {
    for rs in all_systems() {
        let ctx = CFunctionContext::new(&rs);
        let v = ctx.value(&rs.rho_complex()).unwrap();
        assert!((v - 1.0).norm() < 1e-12, "{}: {v}", rs.label());
    }
}

#[test]
fn finite_at_minus_rho_in_rank_one() {
    let rs = bc1(1.0, 0.0);
    let ctx = CFunctionContext::new(&rs);
    let v = ctx.value(&[c(-rs.rho()[0], 0.0)]).unwrap();
    assert!(v.norm().is_finite());
    // At -rho the argument lambda_alpha/2 + m/4 + m2/2 is 0, so c vanishes for every rank-one system.
    assert_eq!(v, c(0.0, 0.0));
    let rs = bc1(2.5, 0.7);
    assert_eq!(CFunctionContext::new(&rs).value(&[c(-rs.rho()[0], 0.0)]).unwrap(), c(0.0, 0.0));
}

fn slope(ts: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = ts.iter().map(|t| f(*t).ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

#[test]
fn density_growth_and_vanishing_in_rank_one() {
    let rs = bc1(1.0, 0.0);
    let ctx = CFunctionContext::new(&rs);
    let big: Vec<f64> = (0..10).map(|k| 200.0 * 1.4f64.powi(k)).collect();
    let s = slope(&big, |t| ctx.plancherel_density(&[c(0.0, t)]));
    assert!((s - 1.0).abs() < 1e-2, "slope {s}");
    assert_eq!(ctx.plancherel_density(&[c(0.0, 0.0)]), 0.0);
    let ratios: Vec<f64> = (3..8).map(|k| {
        let t = 10f64.powi(-k);
        ctx.plancherel_density(&[c(0.0, t)]) / (t * t)
    }).collect();
    for w in ratios.windows(2) {
        assert!(((w[1] - w[0]) / w[1]).abs() < 1e-4);
    }
    assert!(ratios[4] > 0.0);

    let complex = CFunctionContext::new(&a1(2.0));
    let alpha = a1(2.0).positive_roots()[0].vector.clone();
    let k0 = complex.plancherel_density(&imag(&[0.7 * alpha[0]])) / 0.49;
    for t in [0.01, 0.3, 2.0, 40.0] {
        let d = complex.plancherel_density(&imag(&[t * alpha[0]]));
        assert!(((d / (t * t)) - k0).abs() < 1e-12 * k0);
    }
}

#[test]
fn density_is_weyl_invariant() {
    for rs in small_systems() {
        let ctx = CFunctionContext::new(&rs);
        for v in [[0.3, 1.1], [-2.0, 0.45], [4.0, -3.3]] {
            let lam = imag(&v[..rs.rank()]);
            let d = ctx.plancherel_density(&lam);
            let neg: Vec<Complex64> = lam.iter().map(|z| -z).collect();
            assert!(((ctx.plancherel_density(&neg) - d) / d).abs() < 1e-11);
            for w in rs.weyl_group() {
                let wl = w.apply_complex(&lam);
                assert!(((ctx.plancherel_density(&wl) - d) / d).abs() < 1e-11, "{}", rs.label());
            }
        }
    }
}

#[test]
fn log_space_matches_direct_products() {
    for rs in small_systems() {
        let ctx = CFunctionContext::new(&rs);
        for v in [[0.3, 1.1], [1.2, 0.45], [0.7, -0.3]] {
            let lam: Vec<Complex64> = v[..rs.rank()].iter().map(|x| c(*x, 0.6 * x)).collect();
            let rho = rs.rho_complex();
            let mut direct = c(1.0, 0.0);
            let mut at_rho = c(1.0, 0.0);
            for r in rs.positive_roots().iter().filter(|r| r.indivisible) {
                let m2 = rs.double_multiplicity(r);
                let raw = |s: Complex64| {
                    Complex64::new(2.0, 0.0).powc(-s) * gamma(s).unwrap()
                        / (gamma(s / 2.0 + r.multiplicity / 4.0 + 0.5).unwrap() * gamma(s / 2.0 + r.multiplicity / 4.0 + m2 / 2.0).unwrap())
                };
                direct *= raw(r.coroot_coord(&lam));
                at_rho *= raw(r.coroot_coord(&rho));
            }
            assert!(rel_err(ctx.value(&lam).unwrap(), direct / at_rho) < 1e-10, "{}", rs.label());
        }
    }
}

#[test]
fn nearby_hyperplane_examples() {
    let rs = bc1(1.0, 0.0);
    let ctx = CFunctionContext::new(&rs);
    let at_zero = ctx.singular_hyperplanes_near(&[c(0.0, 0.0)], 0.4);
    assert_eq!(at_zero, vec![HyperplaneDescriptor { root: 0, level: 0.0, kind: HyperplaneKind::Pole }]);
    assert!(ctx.singular_hyperplanes_near(&[c(0.37, 2.1)], 0.05).is_empty());

    let a2 = a2(1.0);
    let ctx2 = CFunctionContext::new(&a2);
    let far = real(&a2.from_chamber_coordinates(&[0.63, 0.77]));
    assert!(ctx2.singular_hyperplanes_near(&far, 0.1).is_empty());
}

#[test]
fn zero_hyperplanes_sit_at_the_predicted_levels() {
    for rs in [bc1(1.0, 0.0), bc1(2.5, 0.7), a2(1.0)] {
        let ctx = CFunctionContext::new(&rs);
        let alpha = rs.simple_root(0).clone();
        let lam: Vec<Complex64> = alpha.vector.iter().map(|a| c(-6.0 * a, 0.0)).collect();
        let m = alpha.multiplicity;
        let m2 = rs.double_multiplicity(&alpha);
        for h in ctx.singular_hyperplanes_near(&lam, 6.0) {
            match h.kind {
                HyperplaneKind::Pole => assert!(h.level <= 0.0 && h.level.fract() == 0.0),
                HyperplaneKind::Zero => {
                    let ok = [-(m / 2.0 + m2), -m / 2.0 - 1.0].iter().any(|base| {
                        let k = (base - h.level) / 2.0;
                        k >= -1e-12 && (k - k.round()).abs() < 1e-12
                    });
                    assert!(ok, "{}: zero at {}", rs.label(), h.level);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn poles_are_simple(dir in prop::collection::vec(-1.0f64..1.0, 4), n in 0u32..3, other in 0.2f64..0.8) {
        let rs = [a2(1.0), system(hypergeo::rootsys::Family::B, 2, &[(hypergeo::rootsys::Orbit::Short, 1.0), (hypergeo::rootsys::Orbit::Long, 1.5)])][(n % 2) as usize].clone();
        let ctx = CFunctionContext::new(&rs);
        let alpha = rs.simple_root(0).clone();
        let base: Vec<Complex64> = real(&rs.from_chamber_coordinates(&[-(n as f64) * alpha.norm2, other * rs.simple_root(1).norm2]));
        let nu: Vec<Complex64> = (0..2).map(|k| c(dir[k], dir[k + 2])).collect();
        prop_assume!(alpha.coroot_coord(&nu).norm() > 0.1);
        // Stay clear of every other singular hyperplane.
        let near = ctx.singular_hyperplanes_near(&base, 0.05);
        prop_assume!(near.len() == 1);
        let residue = |eps: f64| {
            let lam: Vec<Complex64> = base.iter().zip(&nu).map(|(b, v)| b + v * eps).collect();
            ctx.value(&lam).unwrap() * (alpha.coroot_coord(&lam) + n as f64)
        };
        let (r1, r2) = (residue(1e-5), residue(1e-7));
        prop_assert!(r2.norm() > 1e-8 && r2.norm().is_finite());
        prop_assert!((r1 - r2).norm() < 1e-3 * r2.norm());
    }

    #[test]
    fn regularized_c_is_direction_independent(dir in prop::collection::vec(-1.0f64..1.0, 4), which in 0usize..3) {
        let rs = a2(1.0);
        let h = Hypergeometric::new(rs.clone());
        // Dominant real points: the origin and two wall points.
        let lambda0 = real(&[vec![0.0, 0.0], rs.from_chamber_coordinates(&[0.0, 0.7]), rs.from_chamber_coordinates(&[1.3, 0.0])][which]);
        let bundle = h.regularizers(&lambda0).unwrap();
        let b0 = h.b0(&lambda0, &bundle.pi0).unwrap();
        prop_assert!(b0.re > 0.0 && b0.im.abs() < 1e-10 * b0.re);
        let nu: Vec<Complex64> = (0..2).map(|k| c(dir[k], dir[k + 2])).collect();
        prop_assume!(nu.iter().map(|z| z.norm_sqr()).sum::<f64>() > 0.05);
        let lam: Vec<Complex64> = lambda0.iter().zip(&nu).map(|(b, v)| b + v * 1e-6).collect();
        let limit = bundle.pi0.eval(&lam) * h.c_function().value(&lam).unwrap();
        prop_assert!(rel_err(limit, b0) < 1e-4, "{} vs {}", limit, b0);
    }
}
