//! Root systems, multiplicity functions and Weyl groups.
//!
//! Vectors of `a*` and `a` are stored in one orthonormal basis, so that
//! `alpha(x)` is the Euclidean dot product and every Weyl group element is
//! an orthogonal matrix acting identically on both spaces.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootSystemError {
    #[error("unsupported root system {family} of rank {rank}")]
    Unsupported { family: Family, rank: usize },
    #[error("unknown root system family `{0}`")]
    UnknownFamily(String),
    #[error("multiplicity orbit `{orbit}` does not exist for {family}")]
    UnknownOrbit { family: Family, orbit: String },
    #[error("missing multiplicity for orbit `{0}`")]
    MissingOrbit(String),
    #[error("multiplicity for orbit `{orbit}` must be positive, got {value}")]
    NonPositive { orbit: String, value: f64 },
    #[error("vector has dimension {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    BC,
    G,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::BC => "BC",
            Family::G => "G",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = RootSystemError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            "BC" => Ok(Family::BC),
            "G" | "G2" => Ok(Family::G),
            _ => Err(RootSystemError::UnknownFamily(s.to_string())),
        }
    }
}

/// Weyl orbit of a root. Simply laced families have the single orbit `Short`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orbit {
    Short,
    Long,
    Double,
}

impl Orbit {
    pub fn name(self) -> &'static str {
        match self {
            Orbit::Short => "short",
            Orbit::Long => "long",
            Orbit::Double => "double",
        }
    }
}

impl FromStr for Orbit {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "short" => Ok(Orbit::Short),
            "long" => Ok(Orbit::Long),
            "double" => Ok(Orbit::Double),
            other => Err(other.to_string()),
        }
    }
}

/// Multiplicity function, constant on Weyl orbits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Multiplicities(BTreeMap<Orbit, f64>);

impl Multiplicities {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, orbit: Orbit, value: f64) -> Self {
        self.0.insert(orbit, value);
        self
    }

    /// Parses `{"short": m, ...}` style maps keyed by orbit name.
    pub fn from_named<'a, I>(family: Family, entries: I) -> Result<Self, RootSystemError>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut out = Self::new();
        for (name, value) in entries {
            let orbit = name.parse::<Orbit>().map_err(|orbit| RootSystemError::UnknownOrbit {
                family,
                orbit,
            })?;
            out.0.insert(orbit, value);
        }
        Ok(out)
    }

    pub fn get(&self, orbit: Orbit) -> Option<f64> {
        self.0.get(&orbit).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Orbit, f64)> + '_ {
        self.0.iter().map(|(o, v)| (*o, *v))
    }
}

/// Orbits present in a family. `Double` is optional for `BC`.
pub fn orbits_of(family: Family, rank: usize) -> Vec<Orbit> {
    match family {
        Family::A | Family::D => vec![Orbit::Short],
        Family::B | Family::C | Family::G => vec![Orbit::Short, Orbit::Long],
        Family::BC if rank == 1 => vec![Orbit::Short, Orbit::Double],
        Family::BC => vec![Orbit::Short, Orbit::Long, Orbit::Double],
    }
}

#[derive(Debug, Clone)]
pub struct Root {
    pub vector: Vec<f64>,
    /// Coefficients in the basis of simple roots (nonnegative for positive roots).
    pub coeffs: Vec<i64>,
    pub multiplicity: f64,
    pub orbit: Orbit,
    /// False exactly for the roots `2 alpha` of a nonreduced system.
    pub indivisible: bool,
    pub norm2: f64,
}

impl Root {
    pub fn eval(&self, x: &[f64]) -> f64 {
        linalg::dot(&self.vector, x)
    }

    pub fn pair(&self, lambda: &[Complex64]) -> Complex64 {
        lambda.iter().zip(&self.vector).map(|(l, a)| l * a).sum()
    }

    /// `lambda_alpha = <lambda, alpha> / <alpha, alpha>`.
    pub fn coroot_coord(&self, lambda: &[Complex64]) -> Complex64 {
        self.pair(lambda) / self.norm2
    }
}

#[derive(Debug, Clone)]
pub struct WeylElement {
    /// Row-major orthogonal matrix.
    pub matrix: Vec<f64>,
    pub det: i8,
}

impl WeylElement {
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        (0..n).map(|i| linalg::dot(&self.matrix[i * n..(i + 1) * n], v)).collect()
    }

    pub fn apply_complex(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len();
        (0..n)
            .map(|i| (0..n).map(|j| v[j] * self.matrix[i * n + j]).sum())
            .collect()
    }
}

/// JSON form `{"family":"BC","rank":1,"multiplicities":{"short":1.0,"double":0.5}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub family: String,
    pub rank: usize,
    pub multiplicities: BTreeMap<String, f64>,
}

impl SystemConfig {
    pub fn build(&self) -> Result<RootSystem, RootSystemError> {
        let family: Family = self.family.parse()?;
        let mult = Multiplicities::from_named(family, self.multiplicities.iter().map(|(k, v)| (k.as_str(), *v)))?;
        RootSystem::new(family, self.rank, mult)
    }

    pub fn of(rs: &RootSystem) -> Self {
        Self {
            family: rs.family().to_string(),
            rank: rs.rank(),
            multiplicities: rs.multiplicities().iter().map(|(o, v)| (o.name().to_string(), v)).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RootSystem {
    family: Family,
    rank: usize,
    multiplicities: Multiplicities,
    positive: Vec<Root>,
    simple: Vec<usize>,
    gram: Vec<f64>,
    weyl: Vec<WeylElement>,
    rho: Vec<f64>,
}

const WEYL_TOL: f64 = 1e-12;

impl RootSystem {
    pub fn new(family: Family, rank: usize, mult: Multiplicities) -> Result<Self, RootSystemError> {
        let supported = match family {
            Family::A | Family::BC => rank >= 1,
            Family::B | Family::C => rank >= 2,
            Family::D => rank >= 3,
            Family::G => rank == 2,
        };
        if !supported {
            return Err(RootSystemError::Unsupported { family, rank });
        }
        let orbits = orbits_of(family, rank);
        for (orbit, value) in mult.iter() {
            if !orbits.contains(&orbit) {
                return Err(RootSystemError::UnknownOrbit { family, orbit: orbit.name().into() });
            }
            let allowed_zero = orbit == Orbit::Double;
            if !(value > 0.0 || (allowed_zero && value == 0.0)) || !value.is_finite() {
                return Err(RootSystemError::NonPositive { orbit: orbit.name().into(), value });
            }
        }
        for orbit in &orbits {
            if *orbit != Orbit::Double && mult.get(*orbit).is_none() {
                return Err(RootSystemError::MissingOrbit(orbit.name().into()));
            }
        }

        let mut raw = positive_root_vectors(family, rank);
        let with_double = mult.get(Orbit::Double).unwrap_or(0.0) > 0.0;
        raw.retain(|(_, orbit)| *orbit != Orbit::Double || with_double);

        let positive_vectors: Vec<Vec<f64>> = raw.iter().map(|(v, _)| v.clone()).collect();
        let simple = simple_indices(&positive_vectors, &raw, rank);
        let gram: Vec<f64> = simple
            .iter()
            .flat_map(|&i| simple.iter().map(move |&j| (i, j)))
            .map(|(i, j)| linalg::dot(&positive_vectors[i], &positive_vectors[j]))
            .collect();

        let mut positive = Vec::with_capacity(raw.len());
        for (vector, orbit) in raw {
            let rhs: Vec<f64> = simple
                .iter()
                .map(|&s| linalg::dot(&vector, &positive_vectors[s]))
                .collect();
            let c = linalg::solve(&gram, &rhs, rank).expect("simple roots are a basis");
            let coeffs: Vec<i64> = c.iter().map(|v| v.round() as i64).collect();
            debug_assert!(c.iter().zip(&coeffs).all(|(a, b)| (a - *b as f64).abs() < 1e-9));
            let norm2 = linalg::dot(&vector, &vector);
            positive.push(Root {
                vector,
                coeffs,
                multiplicity: mult.get(orbit).unwrap_or(0.0),
                orbit,
                indivisible: orbit != Orbit::Double,
                norm2,
            });
        }
        // A simple root index refers into `positive`; order is preserved from `raw`.
        let simple_vectors: Vec<Vec<f64>> =
            simple.iter().map(|&i| positive[i].vector.clone()).collect();
        let weyl = weyl_closure(&simple_vectors, rank);

        let mut rho = vec![0.0; rank];
        for r in &positive {
            for (k, v) in r.vector.iter().enumerate() {
                rho[k] += 0.5 * r.multiplicity * v;
            }
        }

        Ok(Self { family, rank, multiplicities: mult, positive, simple, gram, weyl, rho })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn multiplicities(&self) -> &Multiplicities {
        &self.multiplicities
    }

    /// Label like `BC2(short=1,long=2,double=0.5)`.
    pub fn label(&self) -> String {
        let m: Vec<String> = self
            .multiplicities
            .iter()
            .map(|(o, v)| format!("{}={}", o.name(), v))
            .collect();
        format!("{}{}({})", self.family, self.rank, m.join(","))
    }

    /// All positive roots, including `2 alpha` roots of nonreduced systems.
    pub fn positive_roots(&self) -> &[Root] {
        &self.positive
    }

    /// Indivisible positive roots.
    pub fn indivisible_positive(&self) -> impl Iterator<Item = &Root> {
        self.positive.iter().filter(|r| r.indivisible)
    }

    /// Multiplicity of `2 alpha` for an indivisible root, zero if absent.
    pub fn double_multiplicity(&self, root: &Root) -> f64 {
        if !root.indivisible {
            return 0.0;
        }
        self.positive
            .iter()
            .find(|r| {
                !r.indivisible && r.vector.iter().zip(&root.vector).all(|(a, b)| (a - 2.0 * b).abs() < 1e-12)
            })
            .map(|r| r.multiplicity)
            .unwrap_or(0.0)
    }

    pub fn simple_roots(&self) -> impl Iterator<Item = &Root> {
        self.simple.iter().map(move |&i| &self.positive[i])
    }

    pub fn simple_root(&self, j: usize) -> &Root {
        &self.positive[self.simple[j]]
    }

    /// Gram matrix of the simple roots, row-major.
    pub fn simple_gram(&self) -> &[f64] {
        &self.gram
    }

    pub fn weyl_group(&self) -> &[WeylElement] {
        &self.weyl
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn rho_complex(&self) -> Vec<Complex64> {
        self.rho.iter().map(|&v| Complex64::new(v, 0.0)).collect()
    }

    pub fn check_dim(&self, len: usize) -> Result<(), RootSystemError> {
        if len != self.rank {
            return Err(RootSystemError::Dimension { expected: self.rank, got: len });
        }
        Ok(())
    }

    /// `min_j alpha_j(x)` over simple roots.
    pub fn beta(&self, x: &[f64]) -> f64 {
        self.simple_roots().map(|r| r.eval(x)).fold(f64::INFINITY, f64::min)
    }

    /// Coordinates of `v` in the simple-root basis.
    pub fn simple_coefficients(&self, v: &[f64]) -> Vec<f64> {
        let rhs: Vec<f64> = self.simple_roots().map(|r| linalg::dot(&r.vector, v)).collect();
        linalg::solve(&self.gram, &rhs, self.rank).expect("simple roots are a basis")
    }

    /// Vector with the given simple-root coordinates.
    pub fn from_simple_coefficients(&self, c: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.rank];
        for (j, cj) in c.iter().enumerate() {
            for (k, a) in self.simple_root(j).vector.iter().enumerate() {
                v[k] += cj * a;
            }
        }
        v
    }

    /// Point of `a` with prescribed simple-root values `alpha_j(x) = s_j`.
    pub fn from_chamber_coordinates(&self, s: &[f64]) -> Vec<f64> {
        // x = sum_j c_j alpha_j with G c = s.
        let c = linalg::solve(&self.gram, s, self.rank).expect("simple roots are a basis");
        self.from_simple_coefficients(&c)
    }

    /// Reflects a real vector into the closed positive chamber.
    pub fn to_chamber(&self, x: &[f64]) -> Vec<f64> {
        let mut v = x.to_vec();
        for _ in 0..10_000 {
            let neg = self.simple_roots().find(|r| r.eval(&v) < -1e-15).cloned();
            match neg {
                None => break,
                Some(r) => {
                    let k = 2.0 * r.eval(&v) / r.norm2;
                    for (vi, ai) in v.iter_mut().zip(&r.vector) {
                        *vi -= k * ai;
                    }
                }
            }
        }
        v
    }

    pub fn is_dominant(&self, v: &[f64], tol: f64) -> bool {
        self.simple_roots().all(|r| r.eval(v) >= -tol)
    }

    /// Weyl image of `lambda` with dominant real part; ties among images with
    /// equal real part are broken by the lexicographically largest imaginary part.
    pub fn dominant_representative(&self, lambda: &[Complex64]) -> (Vec<Complex64>, usize) {
        let tol = 1e-10 * (1.0 + lambda.iter().map(|z| z.norm()).fold(0.0, f64::max));
        let mut best: Option<(Vec<Complex64>, usize, f64)> = None;
        for (idx, w) in self.weyl.iter().enumerate() {
            let image = w.apply_complex(lambda);
            let re: Vec<f64> = image.iter().map(|z| z.re).collect();
            let dom = self.simple_roots().map(|r| r.eval(&re)).fold(f64::INFINITY, f64::min);
            let better = match &best {
                None => true,
                Some((b, _, bdom)) => {
                    if dom >= -tol && *bdom < -tol {
                        true
                    } else if dom < -tol && *bdom >= -tol {
                        false
                    } else if dom < -tol {
                        dom > *bdom
                    } else {
                        lex_greater(
                            &image.iter().map(|z| z.im).collect::<Vec<_>>(),
                            &b.iter().map(|z| z.im).collect::<Vec<_>>(),
                            tol,
                        )
                    }
                }
            };
            if better {
                best = Some((image, idx, dom));
            }
        }
        let (v, idx, _) = best.expect("Weyl group is nonempty");
        (v, idx)
    }

    /// Simple-root coordinates of `rho - dom(Re lambda)`; all nonnegative
    /// exactly when `Re lambda` lies in the convex hull of the Weyl orbit of `rho`.
    pub fn hull_slack(&self, lambda: &[Complex64]) -> Vec<f64> {
        let re: Vec<f64> = lambda.iter().map(|z| z.re).collect();
        let dom = self.to_chamber(&re);
        let diff: Vec<f64> = self.rho.iter().zip(&dom).map(|(r, m)| r - m).collect();
        self.simple_coefficients(&diff)
    }

    pub fn is_bounded(&self, lambda: &[Complex64], tol: f64) -> bool {
        self.hull_slack(lambda).iter().all(|&c| c >= -tol)
    }

    pub fn weyl_order(&self) -> usize {
        self.weyl.len()
    }
}

fn lex_greater(a: &[f64], b: &[f64], tol: f64) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x - y > tol {
            return true;
        }
        if y - x > tol {
            return false;
        }
    }
    false
}

fn unit(n: usize, i: usize, s: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = s;
    v
}

fn pair_vec(n: usize, i: usize, si: f64, j: usize, sj: f64, scale: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = si * scale;
    v[j] = sj * scale;
    v
}

/// Positive roots in orthonormal coordinates, tagged by orbit.
fn positive_root_vectors(family: Family, rank: usize) -> Vec<(Vec<f64>, Orbit)> {
    let n = rank;
    let mut out = Vec::new();
    match family {
        Family::A if rank == 1 => out.push((vec![1.0], Orbit::Short)),
        Family::A => {
            // Helmert basis of the sum-zero hyperplane in R^{n+1}.
            let basis: Vec<Vec<f64>> = (1..=n)
                .map(|k| {
                    let s = 1.0 / ((k * (k + 1)) as f64).sqrt();
                    let mut u = vec![0.0; n + 1];
                    for ui in u.iter_mut().take(k) {
                        *ui = s;
                    }
                    u[k] = -(k as f64) * s;
                    u
                })
                .collect();
            for i in 0..=n {
                for j in i + 1..=n {
                    let mut amb = vec![0.0; n + 1];
                    amb[i] = 1.0;
                    amb[j] = -1.0;
                    let v: Vec<f64> = basis.iter().map(|u| linalg::dot(u, &amb)).collect();
                    out.push((v, Orbit::Short));
                }
            }
        }
        Family::B | Family::C | Family::D | Family::BC => {
            let (short_scale, long_scale) = match family {
                Family::C => (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::SQRT_2),
                _ => (1.0, 1.0),
            };
            let pair_orbit = match family {
                Family::C => Orbit::Short,
                Family::D => Orbit::Short,
                _ => Orbit::Long,
            };
            let pair_scale = if family == Family::C { short_scale } else { 1.0 };
            for i in 0..n {
                for j in i + 1..n {
                    out.push((pair_vec(n, i, 1.0, j, -1.0, pair_scale), pair_orbit));
                    out.push((pair_vec(n, i, 1.0, j, 1.0, pair_scale), pair_orbit));
                }
            }
            for i in 0..n {
                match family {
                    Family::B => out.push((unit(n, i, 1.0), Orbit::Short)),
                    Family::C => out.push((unit(n, i, long_scale), Orbit::Long)),
                    Family::BC => {
                        out.push((unit(n, i, 1.0), Orbit::Short));
                        out.push((unit(n, i, 2.0), Orbit::Double));
                    }
                    _ => {}
                }
            }
        }
        Family::G => {
            let deg = std::f64::consts::PI / 180.0;
            let f = [(80.0f64 * deg).cos(), (80.0f64 * deg).sin()];
            for k in 0..6 {
                let a = (60.0 * k as f64) * deg;
                let v = vec![a.cos(), a.sin()];
                if linalg::dot(&v, &f) > 0.0 {
                    out.push((v, Orbit::Short));
                }
                let b = (30.0 + 60.0 * k as f64) * deg;
                let s3 = 3.0f64.sqrt();
                let v = vec![s3 * b.cos(), s3 * b.sin()];
                if linalg::dot(&v, &f) > 0.0 {
                    out.push((v, Orbit::Long));
                }
            }
        }
    }
    for (v, _) in out.iter_mut() {
        for c in v.iter_mut() {
            if c.abs() < 1e-15 {
                *c = 0.0;
            }
        }
    }
    out
}

/// Positive roots that are not a sum of two positive roots.
fn simple_indices(vectors: &[Vec<f64>], raw: &[(Vec<f64>, Orbit)], rank: usize) -> Vec<usize> {
    let mut simple = Vec::new();
    'outer: for (k, v) in vectors.iter().enumerate() {
        if raw[k].1 == Orbit::Double {
            continue;
        }
        for a in vectors {
            for b in vectors {
                if v.iter().zip(a).zip(b).all(|((vi, ai), bi)| (vi - ai - bi).abs() < 1e-9) {
                    continue 'outer;
                }
            }
        }
        simple.push(k);
    }
    assert_eq!(simple.len(), rank, "simple root detection failed");
    simple
}

fn matrix_key(m: &[f64]) -> Vec<i64> {
    m.iter().map(|v| (v * 1e9).round() as i64).collect()
}

fn weyl_closure(simple: &[Vec<f64>], n: usize) -> Vec<WeylElement> {
    let gens: Vec<Vec<f64>> = simple
        .iter()
        .map(|a| {
            let na = linalg::dot(a, a);
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    m[i * n + j] = if i == j { 1.0 } else { 0.0 } - 2.0 * a[i] * a[j] / na;
                }
            }
            m
        })
        .collect();
    let mut identity = vec![0.0; n * n];
    for i in 0..n {
        identity[i * n + i] = 1.0;
    }
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut elems: Vec<(Vec<f64>, i8)> = vec![(identity.clone(), 1)];
    seen.insert(matrix_key(&identity), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(idx) = queue.pop_front() {
        let (cur, det) = elems[idx].clone();
        for g in &gens {
            let mut prod = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    prod[i * n + j] = (0..n).map(|k| g[i * n + k] * cur[k * n + j]).sum();
                }
            }
            for v in prod.iter_mut() {
                if v.abs() < WEYL_TOL {
                    *v = 0.0;
                }
            }
            let key = matrix_key(&prod);
            if !seen.contains_key(&key) {
                seen.insert(key, elems.len());
                elems.push((prod, -det));
                queue.push_back(elems.len() - 1);
            }
        }
    }
    elems.into_iter().map(|(matrix, det)| WeylElement { matrix, det }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(f: Family, r: usize, m: &[(Orbit, f64)]) -> RootSystem {
        let mut mm = Multiplicities::new();
        for (o, v) in m {
            mm = mm.with(*o, *v);
        }
        RootSystem::new(f, r, mm).unwrap()
    }

    #[test]
    fn weyl_orders() {
        assert_eq!(sys(Family::A, 1, &[(Orbit::Short, 1.0)]).weyl_order(), 2);
        assert_eq!(sys(Family::A, 2, &[(Orbit::Short, 1.0)]).weyl_order(), 6);
        assert_eq!(sys(Family::A, 3, &[(Orbit::Short, 1.0)]).weyl_order(), 24);
        let b = [(Orbit::Short, 1.0), (Orbit::Long, 1.0)];
        assert_eq!(sys(Family::B, 2, &b).weyl_order(), 8);
        assert_eq!(sys(Family::C, 3, &b).weyl_order(), 48);
        assert_eq!(sys(Family::D, 3, &[(Orbit::Short, 1.0)]).weyl_order(), 24);
        assert_eq!(sys(Family::G, 2, &b).weyl_order(), 12);
        assert_eq!(sys(Family::BC, 2, &[(Orbit::Short, 1.0), (Orbit::Long, 1.0), (Orbit::Double, 1.0)]).weyl_order(), 8);
    }

    #[test]
    fn root_counts_and_rho() {
        let a2 = sys(Family::A, 2, &[(Orbit::Short, 1.0)]);
        assert_eq!(a2.positive_roots().len(), 3);
        // rho = alpha1 + alpha2 when m = 1
        let c = a2.simple_coefficients(a2.rho());
        assert!((c[0] - 1.0).abs() < 1e-12 && (c[1] - 1.0).abs() < 1e-12);
        let bc1 = sys(Family::BC, 1, &[(Orbit::Short, 2.0), (Orbit::Double, 1.0)]);
        assert_eq!(bc1.positive_roots().len(), 2);
        assert!((bc1.rho()[0] - 2.0).abs() < 1e-12);
        let bc1z = sys(Family::BC, 1, &[(Orbit::Short, 2.0), (Orbit::Double, 0.0)]);
        assert_eq!(bc1z.positive_roots().len(), 1);
        let g2 = sys(Family::G, 2, &[(Orbit::Short, 1.0), (Orbit::Long, 1.0)]);
        assert_eq!(g2.positive_roots().len(), 6);
        assert!(g2.positive_roots().iter().all(|r| r.coeffs.iter().all(|&c| c >= 0)));
    }

    #[test]
    fn rejects_bad_multiplicities() {
        let e = RootSystem::new(Family::A, 2, Multiplicities::new().with(Orbit::Long, 1.0));
        assert!(matches!(e, Err(RootSystemError::UnknownOrbit { .. })));
        let e = RootSystem::new(Family::B, 2, Multiplicities::new().with(Orbit::Short, 1.0));
        assert!(matches!(e, Err(RootSystemError::MissingOrbit(_))));
        let e = RootSystem::new(Family::A, 2, Multiplicities::new().with(Orbit::Short, -1.0));
        assert!(matches!(e, Err(RootSystemError::NonPositive { .. })));
        assert!(RootSystem::new(Family::G, 3, Multiplicities::new()).is_err());
    }

    #[test]
    fn dominant_representative_is_dominant() {
        let a2 = sys(Family::A, 2, &[(Orbit::Short, 1.0)]);
        let lam = vec![Complex64::new(-0.7, 0.3), Complex64::new(0.2, -1.1)];
        let (d, _) = a2.dominant_representative(&lam);
        let re: Vec<f64> = d.iter().map(|z| z.re).collect();
        assert!(a2.is_dominant(&re, 1e-12));
    }

    #[test]
    fn bounded_at_rho_and_not_beyond() {
        let a2 = sys(Family::A, 2, &[(Orbit::Short, 1.0)]);
        let rho = a2.rho_complex();
        assert!(a2.is_bounded(&rho, 1e-9));
        let big: Vec<Complex64> = rho.iter().map(|z| z * 1.01).collect();
        assert!(!a2.is_bounded(&big, 1e-9));
    }
}
