#![allow(dead_code)]

use hypergeo::rootsys::{Family, Multiplicities, Orbit, RootSystem};
use hypergeo::Complex64;

pub fn system(family: Family, rank: usize, entries: &[(Orbit, f64)]) -> RootSystem {
    let mult = entries.iter().fold(Multiplicities::new(), |m, (o, v)| m.with(*o, *v));
    RootSystem::new(family, rank, mult).expect("valid test system")
}

pub fn a1(m: f64) -> RootSystem {
    system(Family::A, 1, &[(Orbit::Short, m)])
}

pub fn bc1(m: f64, m2: f64) -> RootSystem {
    system(Family::BC, 1, &[(Orbit::Short, m), (Orbit::Double, m2)])
}

pub fn a2(m: f64) -> RootSystem {
    system(Family::A, 2, &[(Orbit::Short, m)])
}

/// Rank one and two systems with cheap evaluation, including non-geometric multiplicities.
pub fn small_systems() -> Vec<RootSystem> {
    vec![
        a1(1.0),
        a1(2.0),
        bc1(1.5, 0.5),
        bc1(2.5, 0.7),
        a2(1.0),
        a2(2.0),
        system(Family::B, 2, &[(Orbit::Short, 1.0), (Orbit::Long, 2.0)]),
        system(Family::C, 2, &[(Orbit::Short, 0.5), (Orbit::Long, 1.5)]),
        system(Family::BC, 2, &[(Orbit::Short, 1.0), (Orbit::Long, 1.0), (Orbit::Double, 0.5)]),
        system(Family::G, 2, &[(Orbit::Short, 1.0), (Orbit::Long, 1.0)]),
    ]
}

/// Every supported family at its smallest rank plus the rank-three systems.
pub fn all_systems() -> Vec<RootSystem> {
    let mut out = small_systems();
    out.push(system(Family::A, 3, &[(Orbit::Short, 1.0)]));
    out.push(system(Family::B, 3, &[(Orbit::Short, 1.0), (Orbit::Long, 1.0)]));
    out.push(system(Family::D, 3, &[(Orbit::Short, 1.0)]));
    out
}

pub fn real(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|x| Complex64::new(*x, 0.0)).collect()
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// Interior point with chamber coordinates `s`.
pub fn chamber_point(rs: &RootSystem, s: &[f64]) -> Vec<f64> {
    rs.from_chamber_coordinates(s)
}
