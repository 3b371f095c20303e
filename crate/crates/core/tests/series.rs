mod common;

use std::sync::Arc;

use common::*;
use hypergeo::series::*;
use hypergeo::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn odd_coefficients_vanish_on_the_full_lattice() {
    for rs in small_systems() {
        let data = RecursionData::new(&rs);
        let level = if rs.rank() == 1 { 30 } else { 14 };
        let index = Arc::new(LatticeIndex::new(rs.rank(), level, false));
        let lam: Vec<Complex64> = (0..rs.rank()).map(|k| c(0.31 + 0.2 * k as f64, -0.45)).collect();
        let table = gamma_on_index(&data, index.clone(), &lam, 1e-10);
        assert_eq!(table.values[0], c(1.0, 0.0));
        for i in 0..index.len() {
            if index.point(i).iter().any(|n| n % 2 == 1) {
                assert_eq!(table.values[i], c(0.0, 0.0), "{} at {:?}", rs.label(), index.point(i));
            }
        }
        let even = gamma_coefficients(&rs, &lam, level, &SeriesConfig::default());
        for i in 0..even.index.len() {
            let n: Vec<i64> = even.index.point(i).iter().map(|v| *v as i64).collect();
            assert!((table.get(&n) - even.values[i]).norm() <= 1e-12 * even.values[i].norm().max(1.0));
        }
        assert!(!table.singular);
    }
}

#[test]
fn singular_flag_on_a_pole() {
    let rs = a1(1.0);
    let t = gamma_coefficients(&rs, &[c(2.0, 0.0)], 8, &SeriesConfig::default());
    assert!(t.singular);
}

#[test]
fn complex_case_has_no_poles() {
    // With all multiplicities 2 the coefficients are polynomial in lambda.
    let rs = a2(2.0);
    let at = |eps: f64| {
        let lam: Vec<Complex64> = rs.from_chamber_coordinates(&[2.0 + eps, 0.3]).into_iter().map(|v| c(v, 0.0)).collect();
        gamma_coefficients(&rs, &lam, 6, &SeriesConfig::default()).values
    };
    let (near, far) = (at(1e-7), at(1e-3));
    for (a, b) in near.iter().zip(&far) {
        assert!((a - b).norm() <= 1e-2 * b.norm().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn coefficients_grow_at_most_exponentially() {
    for (rs, level, s0) in [(a1(1.0), 200, vec![0.5]), (bc1(2.5, 0.7), 200, vec![0.5]), (a2(1.0), 40, vec![0.6, 0.6])] {
        let x0 = chamber_point(&rs, &s0);
        for lam in [c(0.4, 0.3), c(1.6, -1.1), c(-0.7, 2.0)] {
            let lam = vec![lam; rs.rank()];
            let t = gamma_coefficients(&rs, &lam, level, &SeriesConfig::default());
            let mut low = 0.0f64;
            let mut high = 0.0f64;
            for i in 0..t.index.len() {
                let n = t.index.point(i);
                let c: Vec<f64> = n.iter().map(|v| *v as f64).collect();
                let mu = rs.from_simple_coefficients(&c);
                let scaled = t.values[i].norm() * (-hypergeo::linalg::dot(&mu, &x0)).exp();
                if t.index.point_level(i) <= level / 2 {
                    low = low.max(scaled);
                } else {
                    high = high.max(scaled);
                }
            }
            assert!(high <= low, "{}: {high} > {low}", rs.label());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn simple_poles_along_hyperplanes(
        sys in 0usize..3,
        dir in prop::collection::vec(-1.0f64..1.0, 4),
        other in 0.1f64..0.4,
    ) {
        let rs = [a1(1.0), bc1(1.5, 0.5), a2(1.0)][sys].clone();
        let alpha = rs.simple_root(0).clone();
        let n = 1.0;
        // Base point with lambda_alpha = n; the other simple coordinate stays generic.
        let base = if rs.rank() == 1 {
            vec![c(n * alpha.norm2 / alpha.vector[0], 0.0)]
        } else {
            let s = [n * alpha.norm2, other * rs.simple_root(1).norm2];
            rs.from_chamber_coordinates(&s).into_iter().map(|v| c(v, 0.0)).collect()
        };
        let nu: Vec<Complex64> = (0..rs.rank()).map(|k| c(dir[k], dir[k + 2])).collect();
        let nu_alpha = alpha.coroot_coord(&nu);
        prop_assume!(nu_alpha.norm() > 0.1);
        let level = 4;
        let coefficient = |eps: f64| {
            let lam: Vec<Complex64> = base.iter().zip(&nu).map(|(b, v)| b + v * eps).collect();
            let t = gamma_coefficients(&rs, &lam, level, &SeriesConfig::default());
            let dist = alpha.coroot_coord(&lam) - n;
            let point: Vec<i64> = (0..rs.rank()).map(|k| if k == 0 { 2 } else { 0 }).collect();
            (t.get(&point), t.get(&point) * dist)
        };
        let (g3, r3) = coefficient(1e-3);
        let (g5, r5) = coefficient(1e-5);
        let (_, r6) = coefficient(1e-6);
        // Blow-up at rate 1/dist with a finite residue.
        prop_assert!(g5.norm() > 50.0 * g3.norm());
        prop_assert!(r6.norm() > 0.0 && r6.norm().is_finite());
        prop_assert!((r5 - r6).norm() <= 1e-3 * r6.norm());
        prop_assert!((r3 - r6).norm() <= 0.1 * r6.norm());
    }

    #[test]
    fn raising_the_level_changes_the_series_by_less_than_the_tail(
        sys in 0usize..4,
        re in -2.0f64..2.0,
        im in -2.0f64..2.0,
        s in prop::collection::vec(0.4f64..3.0, 2),
    ) {
        let rs = [a1(1.0), bc1(2.5, 0.7), a2(1.0), a2(2.0)][sys].clone();
        let lam: Vec<Complex64> = (0..rs.rank()).map(|k| c(re + 0.37 * k as f64, im)).collect();
        let x = chamber_point(&rs, &s[..rs.rank()]);
        let cfg = SeriesConfig::default();
        let low_level = if rs.rank() == 1 { 20 } else { 12 };
        let low = gamma_coefficients(&rs, &lam, low_level, &cfg);
        prop_assume!(!low.singular);
        let high = gamma_coefficients(&rs, &lam, 4 * low_level, &cfg);
        let a = hc_series_weighted(&rs, &low, &PointWeights::new(&rs, &low.index, &x), cfg.tail_tol);
        let b = hc_series_weighted(&rs, &high, &PointWeights::new(&rs, &high.index, &x), cfg.tail_tol);
        prop_assert!((a.value - b.value).norm() <= a.tail_bound + 1e-13 * b.value.norm(),
            "change {} tail {}", (a.value - b.value).norm(), a.tail_bound);
    }
}
