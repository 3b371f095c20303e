//! Harish-Chandra series: the coefficient recursion and truncated evaluation.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::rootsys::RootSystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesConfig {
    /// Minimum truncation level. Raised automatically when `adaptive` is set
    /// and the requested tail tolerance needs more terms at the given `x`.
    pub max_level: u32,
    pub denom_threshold: f64,
    pub tail_tol: f64,
    pub beta_min: f64,
    pub adaptive: bool,
    /// Hard ceiling for adaptive levels; `0` picks a rank-dependent default.
    pub level_cap: u32,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            max_level: 40,
            denom_threshold: 1e-10,
            tail_tol: 1e-12,
            beta_min: 0.1,
            adaptive: true,
            level_cap: 0,
        }
    }
}

impl SeriesConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.denom_threshold > 0.0 && self.tail_tol > 0.0 && self.beta_min > 0.0) {
            return Err("series tolerances must be positive".into());
        }
        if self.tail_tol >= 1.0 {
            return Err("tail_tol must be below 1".into());
        }
        Ok(())
    }

    pub fn cap_for_rank(&self, rank: usize) -> u32 {
        if self.level_cap > 0 {
            return self.level_cap.max(self.max_level);
        }
        let cap = match rank {
            1 => 4000,
            2 => 480,
            3 => 140,
            _ => 60,
        };
        cap.max(self.max_level)
    }

    /// Smallest even level (rounded up to a multiple of 8, at least `max_level`)
    /// whose estimated tail at `beta` is below `tail_tol / 1000` for every growth profile.
    pub fn level_for(&self, rank: usize, growth: &[ShellGrowth], beta: f64) -> u32 {
        let base = self.max_level + (self.max_level & 1);
        if !self.adaptive || beta <= 0.0 || growth.is_empty() {
            return base;
        }
        let cap = self.cap_for_rank(rank);
        let target = self.tail_tol * 1e-3;
        let mut level = base;
        while level < cap && growth.iter().any(|g| !(g.tail(rank, level, beta) <= target)) {
            level += 2;
        }
        level = level.div_ceil(8) * 8;
        level.clamp(base, cap.max(base))
    }
}

/// Growth profile of `|Gamma_mu|` read off a computed table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellGrowth {
    pub top: u32,
    /// Largest modulus over the two outermost shells.
    pub g_top: f64,
    /// Effective polynomial exponent, with one unit of headroom.
    pub exponent: f64,
}

impl ShellGrowth {
    pub fn from_values(index: &LatticeIndex, values: &[Complex64]) -> Self {
        let top = index.level();
        let half = (top / 4) * 2;
        let mut g_top = 0.0f64;
        let mut g_half = 0.0f64;
        for (i, v) in values.iter().enumerate() {
            let l = index.point_level(i);
            let m = v.norm();
            if !m.is_finite() {
                continue;
            }
            if l + 2 >= top {
                g_top = g_top.max(m);
            }
            if l == half || l == half + 2 {
                g_half = g_half.max(m);
            }
        }
        let exponent = if top >= 8 && g_half > 0.0 && g_top > 0.0 {
            let ratio = (top as f64) / (half as f64 + 1.0);
            ((g_top / g_half).ln() / ratio.ln()).clamp(0.0, 60.0) + 1.0
        } else {
            8.0
        };
        Self { top, g_top: g_top.max(f64::MIN_POSITIVE), exponent }
    }

    /// Bound for `sum_{m > level} m^{rank-1} g_top (m/top)^p e^{-beta m}` over even `m`.
    pub fn tail(&self, rank: usize, level: u32, beta: f64) -> f64 {
        let l0 = (self.top as f64).max(1.0);
        let mut total = 0.0;
        let mut m = level as f64 + 2.0;
        loop {
            let growth = (m / l0).max(1.0).powf(self.exponent);
            let term = m.powi(rank as i32 - 1) * self.g_top * growth * (-beta * m).exp();
            total += term;
            if term < 1e-18 * total || m > level as f64 + 20_000.0 {
                break;
            }
            m += 2.0;
        }
        total
    }
}

/// Points `mu = sum_j n_j alpha_j` with `sum_j n_j <= level`, in level order.
#[derive(Debug, Clone)]
pub struct LatticeIndex {
    rank: usize,
    level: u32,
    step: u32,
    coords: Vec<u32>,
    levels: Vec<u32>,
    side: usize,
    lookup: Vec<i32>,
}

impl LatticeIndex {
    pub fn new(rank: usize, level: u32, even_only: bool) -> Self {
        let step = if even_only { 2 } else { 1 };
        let side = (level / step) as usize + 1;
        let mut coords = Vec::new();
        let mut levels = Vec::new();
        let mut lookup = vec![-1i32; side.pow(rank as u32)];
        let mut count = 0i32;
        for lv in (0..=level).step_by(step as usize) {
            let q_sum = lv / step;
            let mut q = vec![0u32; rank];
            compositions(q_sum, rank, 0, &mut q, &mut |q| {
                coords.extend(q.iter().map(|v| v * step));
                levels.push(lv);
                let mut key = 0usize;
                for v in q {
                    key = key * side + *v as usize;
                }
                lookup[key] = count;
                count += 1;
            });
        }
        Self { rank, level, step, coords, levels, side, lookup }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn point(&self, i: usize) -> &[u32] {
        &self.coords[i * self.rank..(i + 1) * self.rank]
    }

    pub fn point_level(&self, i: usize) -> u32 {
        self.levels[i]
    }

    /// Position of the point with coefficients `n`, if enumerated.
    pub fn find(&self, n: &[i64]) -> Option<usize> {
        let mut key = 0usize;
        let mut total = 0i64;
        for &v in n {
            if v < 0 || v % self.step as i64 != 0 {
                return None;
            }
            total += v;
            let q = (v / self.step as i64) as usize;
            if q >= self.side {
                return None;
            }
            key = key * self.side + q;
        }
        if total > self.level as i64 {
            return None;
        }
        let pos = self.lookup[key];
        (pos >= 0).then_some(pos as usize)
    }
}

/// Visits all compositions of `total` into `parts` ordered lexicographically
/// with the first coordinate largest first.
fn compositions(total: u32, parts: usize, pos: usize, buf: &mut [u32], f: &mut dyn FnMut(&[u32])) {
    if pos + 1 == parts {
        buf[pos] = total;
        f(buf);
        return;
    }
    for v in 0..=total {
        buf[pos] = v;
        compositions(total - v, parts, pos + 1, buf, f);
    }
}

/// All lattice points of level at most `max_level`, as coefficient vectors.
pub fn enumerate_lattice(rank: usize, max_level: u32, even_only: bool) -> Vec<Vec<u32>> {
    let idx = LatticeIndex::new(rank, max_level, even_only);
    (0..idx.len()).map(|i| idx.point(i).to_vec()).collect()
}

#[derive(Debug, Clone)]
pub struct GammaTable {
    pub lambda: Vec<Complex64>,
    pub index: Arc<LatticeIndex>,
    pub values: Vec<Complex64>,
    pub singular: bool,
    /// Points whose denominator fell below the threshold.
    pub singular_points: Vec<usize>,
    pub growth: ShellGrowth,
}

impl GammaTable {
    pub fn max_level(&self) -> u32 {
        self.index.level()
    }

    pub fn get(&self, n: &[i64]) -> Complex64 {
        self.index.find(n).map(|i| self.values[i]).unwrap_or_default()
    }
}

/// Precomputed data for running the recursion on one root system.
#[derive(Debug, Clone)]
pub struct RecursionData {
    rank: usize,
    gram: Vec<f64>,
    /// Per positive root: simple coefficients, multiplicity, `<alpha_j, alpha>` for each j,
    /// `<rho, alpha>` and the root vector.
    roots: Vec<RootData>,
}

#[derive(Debug, Clone)]
struct RootData {
    coeffs: Vec<i64>,
    mult: f64,
    simple_pair: Vec<f64>,
    rho_pair: f64,
    vector: Vec<f64>,
}

impl RecursionData {
    pub fn new(rs: &RootSystem) -> Self {
        let rank = rs.rank();
        let gram = rs.simple_gram().to_vec();
        let roots = rs
            .positive_roots()
            .iter()
            .map(|r| RootData {
                coeffs: r.coeffs.clone(),
                mult: r.multiplicity,
                simple_pair: rs.simple_roots().map(|s| crate::linalg::dot(&s.vector, &r.vector)).collect(),
                rho_pair: r.eval(rs.rho()),
                vector: r.vector.clone(),
            })
            .collect();
        Self { rank, gram, roots }
    }
}

/// Lambda-independent part of the recursion on one lattice: for each point
/// `<mu, mu>`, `<mu + rho, alpha>` per root, and the position of `mu + 2 alpha`.
#[derive(Debug)]
pub struct RecursionPlan {
    index: Arc<LatticeIndex>,
    n_roots: usize,
    quad: Vec<f64>,
    shifted_pair: Vec<f64>,
    forward: Vec<i32>,
    simple_vectors: Vec<Vec<f64>>,
    root_vectors: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl RecursionPlan {
    pub fn new(data: &RecursionData, index: Arc<LatticeIndex>) -> Self {
        let rank = data.rank;
        let n_roots = data.roots.len();
        let n_pts = index.len();
        let mut quad = Vec::with_capacity(n_pts);
        let mut shifted_pair = Vec::with_capacity(n_pts * n_roots);
        let mut forward = Vec::with_capacity(n_pts * n_roots);
        let mut shifted = vec![0i64; rank];
        for i in 0..n_pts {
            let n = index.point(i);
            let mut q = 0.0;
            for a in 0..rank {
                for b in 0..rank {
                    q += n[a] as f64 * n[b] as f64 * data.gram[a * rank + b];
                }
            }
            quad.push(q);
            for r in &data.roots {
                let mu_pair: f64 = (0..rank).map(|j| n[j] as f64 * r.simple_pair[j]).sum();
                shifted_pair.push(mu_pair + r.rho_pair);
                for j in 0..rank {
                    shifted[j] = n[j] as i64 + 2 * r.coeffs[j];
                }
                forward.push(index.find(&shifted).map_or(-1, |p| p as i32));
            }
        }
        let simple_vectors = (0..rank)
            .map(|j| {
                data.roots
                    .iter()
                    .find(|r| r.coeffs.iter().enumerate().all(|(i, &c)| c == (i == j) as i64))
                    .expect("simple root present")
                    .vector
                    .clone()
            })
            .collect();
        Self {
            index,
            n_roots,
            quad,
            shifted_pair,
            forward,
            simple_vectors,
            root_vectors: data.roots.iter().map(|r| r.vector.clone()).collect(),
            weights: data.roots.iter().map(|r| 2.0 * r.mult).collect(),
        }
    }

    pub fn index(&self) -> &Arc<LatticeIndex> {
        &self.index
    }
}

/// Runs the coefficient recursion over the lattice `index` (even or full).
pub fn gamma_on_index(
    data: &RecursionData,
    index: Arc<LatticeIndex>,
    lambda: &[Complex64],
    denom_threshold: f64,
) -> GammaTable {
    gamma_on_plan(&RecursionPlan::new(data, index), lambda, denom_threshold)
}

/// Runs the recursion with a precomputed plan.
pub fn gamma_on_plan(plan: &RecursionPlan, lambda: &[Complex64], denom_threshold: f64) -> GammaTable {
    let index = plan.index.clone();
    let rank = index.rank();
    let pair = |v: &Vec<f64>| -> Complex64 { lambda.iter().zip(v).map(|(l, a)| l * a).sum() };
    let lam_simple: Vec<Complex64> = plan.simple_vectors.iter().map(pair).collect();
    let lam_root: Vec<Complex64> = plan.root_vectors.iter().map(pair).collect();
    let lam_norm = lambda.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let threshold = denom_threshold * (1.0 + lam_norm).powi(2);

    let n_pts = index.len();
    let n_roots = plan.n_roots;
    let mut values = vec![Complex64::new(0.0, 0.0); n_pts];
    // Per point and root: running sum of `Gamma_nu <nu + rho - lambda, alpha>` along
    // `nu = mu - 2 alpha, mu - 4 alpha, ...`, so each inner sum is one read.
    let mut running = vec![Complex64::new(0.0, 0.0); n_pts * n_roots];
    let mut singular_points = Vec::new();
    values[0] = Complex64::new(1.0, 0.0);
    for i in 0..n_pts {
        let row = i * n_roots;
        if i > 0 {
            let n = index.point(i);
            let lin: Complex64 = (0..rank).map(|j| lam_simple[j] * n[j] as f64).sum();
            let denom = Complex64::new(plan.quad[i], 0.0) - lin * 2.0;
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, w) in running[row..row + n_roots].iter().zip(&plan.weights) {
                acc += s * w;
            }
            if denom.norm() < threshold {
                singular_points.push(i);
            }
            values[i] = if denom.norm() == 0.0 {
                Complex64::new(f64::NAN, f64::NAN)
            } else {
                acc / denom
            };
        }
        let v = values[i];
        for ri in 0..n_roots {
            let target = plan.forward[row + ri];
            if target >= 0 {
                let base = Complex64::new(plan.shifted_pair[row + ri], 0.0) - lam_root[ri];
                running[target as usize * n_roots + ri] = v * base + running[row + ri];
            }
        }
    }
    let growth = ShellGrowth::from_values(&index, &values);
    GammaTable {
        lambda: lambda.to_vec(),
        index,
        values,
        singular: !singular_points.is_empty(),
        singular_points,
        growth,
    }
}

/// Coefficients `Gamma_mu(lambda)` for even `mu` up to `level`.
pub fn gamma_coefficients(rs: &RootSystem, lambda: &[Complex64], level: u32, cfg: &SeriesConfig) -> GammaTable {
    let data = RecursionData::new(rs);
    let index = Arc::new(LatticeIndex::new(rs.rank(), level, true));
    gamma_on_index(&data, index, lambda, cfg.denom_threshold)
}

/// Precomputed `e^{-mu(x)}` over a lattice index, plus `rho(x)` and `beta(x)`.
#[derive(Debug, Clone)]
pub struct PointWeights {
    pub x: Vec<f64>,
    /// Weights for the prefix of the index up to `level`.
    pub weights: Vec<f64>,
    pub level: u32,
    pub beta: f64,
    pub rho_x: f64,
}

impl PointWeights {
    pub fn new(rs: &RootSystem, index: &LatticeIndex, x: &[f64]) -> Self {
        Self::truncated(rs, index, x, index.level())
    }

    /// Weights for the points of `index` with level at most `level` (a prefix, since
    /// the index is level-ordered).
    pub fn truncated(rs: &RootSystem, index: &LatticeIndex, x: &[f64], level: u32) -> Self {
        let level = level.min(index.level());
        let simple_vals: Vec<f64> = rs.simple_roots().map(|r| r.eval(x)).collect();
        let powers: Vec<Vec<f64>> = simple_vals
            .iter()
            .map(|s| {
                let q = (-s).exp();
                let mut p = Vec::with_capacity(level as usize + 1);
                let mut cur = 1.0;
                for _ in 0..=level {
                    p.push(cur);
                    cur *= q;
                }
                p
            })
            .collect();
        let count = (0..index.len()).take_while(|&i| index.point_level(i) <= level).count();
        let weights = (0..count)
            .map(|i| index.point(i).iter().zip(&powers).map(|(n, p)| p[*n as usize]).product())
            .collect();
        Self {
            x: x.to_vec(),
            weights,
            level,
            beta: simple_vals.iter().cloned().fold(f64::INFINITY, f64::min),
            rho_x: crate::linalg::dot(rs.rho(), x),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail_bound: f64,
    pub converged: bool,
}

/// Truncated series `e^{(lambda-rho)(x)} sum Gamma_mu e^{-mu(x)}` with a tail estimate.
pub fn hc_series_weighted(
    rs: &RootSystem,
    table: &GammaTable,
    pw: &PointWeights,
    tail_tol: f64,
) -> SeriesValue {
    let mut sum = Complex64::new(0.0, 0.0);
    for (v, w) in table.values.iter().zip(&pw.weights) {
        sum += v * w;
    }
    let lam_x: Complex64 = table.lambda.iter().zip(&pw.x).map(|(l, x)| l * x).sum();
    let prefactor = (lam_x - pw.rho_x).exp();
    let value = prefactor * sum;
    let tail = if pw.level == 0 {
        f64::INFINITY
    } else {
        table.growth.tail(rs.rank(), pw.level, pw.beta) * prefactor.norm()
    };
    let converged = tail <= tail_tol * value.norm().max(f64::MIN_POSITIVE);
    SeriesValue { value, tail_bound: tail, converged }
}

/// `Phi_lambda(x)` for one point; the level is chosen from a probe table at `max_level`.
pub fn hc_series(rs: &RootSystem, lambda: &[Complex64], x: &[f64], cfg: &SeriesConfig) -> (SeriesValue, GammaTable) {
    let beta = rs.beta(x);
    let probe = gamma_coefficients(rs, lambda, cfg.max_level + (cfg.max_level & 1), cfg);
    let level = cfg.level_for(rs.rank(), &[probe.growth], beta);
    let table = if level == probe.index.level() { probe } else { gamma_coefficients(rs, lambda, level, cfg) };
    let pw = PointWeights::new(rs, &table.index, x);
    (hc_series_weighted(rs, &table, &pw, cfg.tail_tol), table)
}
