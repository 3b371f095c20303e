//! Evaluation of the hypergeometric function `phi_lambda(x)` at arbitrary
//! spectral parameters, and the estimates built on it.
//!
//! Generic `lambda` use the c-function expansion over the Weyl group. On
//! singular hyperplanes the regularizing polynomial `p` makes `p(lambda) phi_lambda`
//! usable at contour nodes, and the value at `lambda0` is recovered from the
//! mixed derivative `d(pi)[p phi](lambda0) / c0` by trapezoid sums on circles.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cfunc::CFunctionContext;
use crate::linalg;
use crate::rootsys::{RootSystem, RootSystemError};
use crate::series::{gamma_on_plan, hc_series_weighted, LatticeIndex, PointWeights, RecursionData, RecursionPlan, SeriesConfig, ShellGrowth};

const GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HyperError {
    #[error(transparent)]
    RootSystem(#[from] RootSystemError),
    #[error("lambda is within {distance:e} of a singular hyperplane; the generic expansion does not apply")]
    NearSingular { distance: f64 },
    #[error("x is too close to a chamber wall (beta = {beta}) to evaluate at complex lambda")]
    NearWall { beta: f64 },
    #[error("c-function pole at lambda")]
    CPole,
    #[error("coefficient recursion hit a vanishing denominator")]
    SingularTable,
    #[error("no admissible contour: {0}")]
    Contour(String),
    #[error("lambda must be real and dominant")]
    NotRealDominant,
    #[error("invalid input: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HyperConfig {
    pub series: SeriesConfig,
    /// Distance to an integer below which `lambda_alpha` counts as an integer.
    pub integer_tol: f64,
    /// Below this distance (and above `integer_tol`) the generic expansion is
    /// avoided and a mean-value contour is used.
    pub near_tol: f64,
    pub nodes_per_circle: usize,
    pub max_radius: f64,
    /// Rank one only: below this `t` the power series about the origin is used.
    pub near_origin_t: f64,
    /// Largest number of regularizing factors handled by the product-of-circles rule.
    pub tensor_max_order: usize,
    /// Largest number handled by the polarized line rule; above it the mean-value rule is used.
    pub polarized_max_order: usize,
}

impl Default for HyperConfig {
    fn default() -> Self {
        Self {
            series: SeriesConfig::default(),
            integer_tol: 1e-9,
            near_tol: 1e-6,
            nodes_per_circle: 16,
            max_radius: 0.25,
            near_origin_t: 0.5,
            tensor_max_order: 2,
            polarized_max_order: 4,
        }
    }
}

impl HyperConfig {
    pub fn validate(&self) -> Result<(), HyperError> {
        self.series.validate().map_err(HyperError::Invalid)?;
        if !(self.integer_tol > 0.0 && self.near_tol >= self.integer_tol) {
            return Err(HyperError::Invalid("need 0 < integer_tol <= near_tol".into()));
        }
        if self.nodes_per_circle < 4 || self.nodes_per_circle > 256 {
            return Err(HyperError::Invalid("nodes_per_circle must lie in [4, 256]".into()));
        }
        if !(self.max_radius > 0.0 && self.max_radius <= 1.0) {
            return Err(HyperError::Invalid("max_radius must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Generic,
    Regularized,
    MeanValue,
    NearOrigin,
    Bracketed,
    Origin,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub value: Complex64,
    pub branch: Branch,
    pub tail_bound: f64,
    pub nodes: usize,
    pub radius: f64,
    pub max_integrand: f64,
    pub warnings: Vec<String>,
    /// Lower and upper bounds when the value is bridged from an interior point.
    pub bracket: Option<(f64, f64)>,
}

impl EvaluationReport {
    fn plain(value: Complex64, branch: Branch, tail_bound: f64) -> Self {
        Self {
            value,
            branch,
            tail_bound,
            nodes: 0,
            radius: 0.0,
            max_integrand: 0.0,
            warnings: Vec::new(),
            bracket: None,
        }
    }
}

/// Root of `Sigma_lambda` with its integer level `n_alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularRoot {
    pub root: usize,
    pub level: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralClass {
    pub dominant: Vec<Complex64>,
    pub weyl_index: usize,
    /// `Sigma_lambda` for the dominant representative.
    pub singular: Vec<SingularRoot>,
    /// Smallest distance of `lambda_alpha` to an integer among roots not in `Sigma_lambda`.
    pub min_distance: f64,
    pub generic: bool,
    pub near_singular: bool,
    /// Weyl elements fixing the dominant representative.
    pub stabilizer: Vec<usize>,
}

/// Product of shifted linear forms `prod (<lambda, alpha> - shift)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactoredPolynomial {
    pub factors: Vec<(Vec<f64>, f64)>,
}

impl FactoredPolynomial {
    pub fn one() -> Self {
        Self { factors: Vec::new() }
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn eval(&self, lambda: &[Complex64]) -> Complex64 {
        self.factors
            .iter()
            .map(|(a, s)| lambda.iter().zip(a).map(|(l, v)| l * v).sum::<Complex64>() - s)
            .product()
    }

    pub fn eval_real(&self, v: &[f64]) -> f64 {
        self.factors.iter().map(|(a, s)| linalg::dot(a, v) - s).product()
    }
}

/// Permanent by Ryser's formula; `m` is row-major `n x n`.
pub fn permanent(m: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut total = 0.0;
    for mask in 1u64..(1u64 << n) {
        let mut prod = 1.0;
        for row in 0..n {
            let s: f64 = (0..n).filter(|c| mask & (1 << c) != 0).map(|c| m[row * n + c]).sum();
            prod *= s;
        }
        let bits = mask.count_ones() as usize;
        if (n - bits) % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    total
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularizerBundle {
    pub lambda0: Vec<Complex64>,
    pub items: Vec<SingularRoot>,
    pub pi0: FactoredPolynomial,
    pub pi1: FactoredPolynomial,
    pub pi: FactoredPolynomial,
    pub p: FactoredPolynomial,
    pub c0: f64,
    pub rho0: Vec<f64>,
    /// Distance from `lambda0` to the nearest singular hyperplane not through it.
    pub gap: f64,
    pub contour_radii: Vec<f64>,
    pub nodes_per_circle: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct HullCertificate {
    pub bounded: bool,
    /// Simple-root coordinates of `rho - dom(Re lambda)`.
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticReport {
    pub ts: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `2^{|Sigma0|} b0(lambda0) / pi0(rho0)`.
    pub predicted_limit: f64,
    pub b0: f64,
    pub pi0_rho0: f64,
    pub orbit_factor: f64,
    pub deviations: Vec<f64>,
    /// Limit estimate at each `t` from polynomial extrapolation in `1/t` of
    /// the ratios at `t` and the preceding points.
    pub extrapolated: Vec<Option<f64>>,
    pub correction_degree: usize,
}

#[derive(Debug, Clone)]
struct Prepared {
    plan: Arc<RecursionPlan>,
    points: Vec<PointWeights>,
    x_scale: f64,
}

/// Evaluator bundling a root system with its c-function and recursion data.
#[derive(Debug)]
pub struct Hypergeometric {
    rs: RootSystem,
    ctx: CFunctionContext,
    data: RecursionData,
    cfg: HyperConfig,
    plans: Mutex<HashMap<u32, Arc<RecursionPlan>>>,
}

impl Clone for Hypergeometric {
    fn clone(&self) -> Self {
        Self::with_config(self.rs.clone(), self.cfg).expect("config already validated")
    }
}

struct NodeSum {
    values: Vec<Complex64>,
    tails: Vec<f64>,
}

fn dist_to_int(z: Complex64) -> (f64, i64) {
    let n = z.re.round();
    ((z - n).norm(), n as i64)
}

impl Hypergeometric {
    pub fn new(rs: RootSystem) -> Self {
        Self::with_config(rs, HyperConfig::default()).expect("default config is valid")
    }

    pub fn with_config(rs: RootSystem, cfg: HyperConfig) -> Result<Self, HyperError> {
        cfg.validate()?;
        let ctx = CFunctionContext::new(&rs);
        let data = RecursionData::new(&rs);
        Ok(Self { rs, ctx, data, cfg, plans: Mutex::new(HashMap::new()) })
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.rs
    }

    pub fn c_function(&self) -> &CFunctionContext {
        &self.ctx
    }

    pub fn config(&self) -> &HyperConfig {
        &self.cfg
    }

    fn check_lambda(&self, lambda: &[Complex64]) -> Result<(), HyperError> {
        self.rs.check_dim(lambda.len())?;
        if lambda.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(HyperError::Invalid("lambda must be finite".into()));
        }
        Ok(())
    }

    fn check_x(&self, x: &[f64]) -> Result<(), HyperError> {
        self.rs.check_dim(x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(HyperError::Invalid("x must be finite".into()));
        }
        Ok(())
    }

    /// Smallest distance of `lambda_alpha` to the integers over indivisible roots.
    pub fn node_margin(&self, lambda: &[Complex64]) -> f64 {
        self.rs
            .indivisible_positive()
            .map(|r| dist_to_int(r.coroot_coord(lambda)).0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_generic(&self, lambda: &[Complex64], tol: f64) -> bool {
        self.node_margin(lambda) >= tol
    }

    pub fn classify(&self, lambda: &[Complex64]) -> SpectralClass {
        let (dominant, weyl_index) = self.rs.dominant_representative(lambda);
        let mut singular = Vec::new();
        let mut min_distance = f64::INFINITY;
        for (idx, r) in self.rs.positive_roots().iter().enumerate() {
            if !r.indivisible {
                continue;
            }
            let (d, n) = dist_to_int(r.coroot_coord(&dominant));
            if d < self.cfg.integer_tol {
                singular.push(SingularRoot { root: idx, level: n });
            } else {
                min_distance = min_distance.min(d);
            }
        }
        let generic = singular.is_empty();
        let near_singular = min_distance < self.cfg.near_tol;
        let stabilizer = self
            .rs
            .weyl_group()
            .iter()
            .enumerate()
            .filter(|(_, w)| {
                w.apply_complex(&dominant)
                    .iter()
                    .zip(&dominant)
                    .all(|(a, b)| (a - b).norm() < 1e-9 * (1.0 + b.norm()))
            })
            .map(|(i, _)| i)
            .collect();
        SpectralClass { dominant, weyl_index, singular, min_distance, generic, near_singular, stabilizer }
    }

    fn plan(&self, level: u32) -> Arc<RecursionPlan> {
        let mut guard = self.plans.lock().expect("plan cache poisoned");
        guard
            .entry(level)
            .or_insert_with(|| {
                let index = Arc::new(LatticeIndex::new(self.rs.rank(), level, true));
                Arc::new(RecursionPlan::new(&self.data, index))
            })
            .clone()
    }

    /// Picks the truncation level from probe tables at `max_level` for every
    /// Weyl image of `probe`, and precomputes the weights at each point.
    fn prepare(&self, xs: &[Vec<f64>], probe: &[Complex64]) -> Prepared {
        let series = &self.cfg.series;
        let probe = self.probe_point(probe);
        let base = self.plan(series.max_level + (series.max_level & 1));
        let growth: Vec<ShellGrowth> = self
            .rs
            .weyl_group()
            .iter()
            .map(|w| gamma_on_plan(&base, &w.apply_complex(&probe), series.denom_threshold).growth)
            .collect();
        let levels: Vec<u32> = xs
            .iter()
            .map(|x| series.level_for(self.rs.rank(), &growth, self.rs.beta(x)))
            .collect();
        let plan = self.plan(levels.iter().copied().max().unwrap_or(series.max_level));
        let points = xs
            .iter()
            .zip(&levels)
            .map(|(x, l)| PointWeights::truncated(&self.rs, plan.index(), x, *l))
            .collect();
        let x_scale = xs.iter().map(|x| linalg::norm(x)).fold(0.0, f64::max);
        Prepared { plan, points, x_scale }
    }

    /// `lambda` itself when generic, otherwise a nearby generic point.
    fn probe_point(&self, lambda: &[Complex64]) -> Vec<Complex64> {
        if self.node_margin(lambda) >= 0.05 {
            return lambda.to_vec();
        }
        let mut best = lambda.to_vec();
        let mut best_margin = self.node_margin(lambda);
        for seed in 0..8 {
            let v = self.oblique_direction(seed);
            let cand: Vec<Complex64> = lambda.iter().zip(&v).map(|(l, a)| l + 0.3 * self.cfg.max_radius * a).collect();
            let margin = self.node_margin(&cand);
            if margin > best_margin {
                best_margin = margin;
                best = cand;
            }
            if margin >= 0.02 {
                break;
            }
        }
        best
    }

    /// `sum_w c(w lambda) Phi_{w lambda}(x)` at every prepared point.
    fn generic_sum(&self, lambda: &[Complex64], prep: &Prepared) -> Result<NodeSum, HyperError> {
        let n = prep.points.len();
        let mut values = vec![Complex64::new(0.0, 0.0); n];
        let mut tails = vec![0.0; n];
        for w in self.rs.weyl_group() {
            let wl = w.apply_complex(lambda);
            let cval = self.ctx.value(&wl).map_err(|_| HyperError::CPole)?;
            if !cval.re.is_finite() || !cval.im.is_finite() {
                return Err(HyperError::CPole);
            }
            let table = gamma_on_plan(&prep.plan, &wl, self.cfg.series.denom_threshold);
            if table.singular {
                return Err(HyperError::SingularTable);
            }
            for (i, pw) in prep.points.iter().enumerate() {
                let s = hc_series_weighted(&self.rs, &table, pw, self.cfg.series.tail_tol);
                values[i] += cval * s.value;
                tails[i] += cval.norm() * s.tail_bound;
            }
        }
        Ok(NodeSum { values, tails })
    }

    fn series_warnings(&self, value: Complex64, tail: f64, beta: f64) -> Vec<String> {
        let mut w = Vec::new();
        if tail > self.cfg.series.tail_tol * value.norm().max(1e-300) {
            w.push(format!("series tail bound {tail:.3e} exceeds tolerance"));
        }
        if beta < self.cfg.series.beta_min {
            w.push(format!("beta(x) = {beta:.3e} is below beta_min; series converges slowly"));
        }
        w
    }

    /// Generic expansion. Requires `lambda` at distance at least `near_tol`
    /// from every singular hyperplane and `x` inside the open chamber.
    pub fn phi_generic(&self, lambda: &[Complex64], x: &[f64]) -> Result<EvaluationReport, HyperError> {
        Ok(self.phi_generic_many(lambda, &[x.to_vec()])?.remove(0))
    }

    pub fn phi_generic_many(&self, lambda: &[Complex64], xs: &[Vec<f64>]) -> Result<Vec<EvaluationReport>, HyperError> {
        self.check_lambda(lambda)?;
        for x in xs {
            self.check_x(x)?;
            if self.rs.beta(x) <= 0.0 {
                return Err(HyperError::Invalid("x must lie inside the open positive chamber".into()));
            }
        }
        let margin = self.node_margin(lambda);
        if margin < self.cfg.near_tol {
            return Err(HyperError::NearSingular { distance: margin });
        }
        let prep = self.prepare(xs, lambda);
        let sum = self.generic_sum(lambda, &prep)?;
        Ok(sum
            .values
            .iter()
            .zip(&sum.tails)
            .zip(&prep.points)
            .map(|((v, t), pw)| {
                let mut r = EvaluationReport::plain(*v, Branch::Generic, *t);
                r.warnings = self.series_warnings(*v, *t, pw.beta);
                r
            })
            .collect())
    }

    /// Evaluates `phi_lambda` at one point for any `lambda`.
    pub fn phi(&self, lambda: &[Complex64], x: &[f64]) -> Result<EvaluationReport, HyperError> {
        Ok(self.phi_many(lambda, &[x.to_vec()])?.remove(0))
    }

    /// Value only.
    pub fn value(&self, lambda: &[Complex64], x: &[f64]) -> Result<Complex64, HyperError> {
        self.phi(lambda, x).map(|r| r.value)
    }

    /// Evaluates `phi_lambda` at several points sharing one spectral parameter.
    pub fn phi_many(&self, lambda: &[Complex64], xs: &[Vec<f64>]) -> Result<Vec<EvaluationReport>, HyperError> {
        self.check_lambda(lambda)?;
        for x in xs {
            self.check_x(x)?;
        }
        let class = self.classify(lambda);
        let lp = class.dominant.clone();
        let mut out: Vec<Option<EvaluationReport>> = vec![None; xs.len()];
        let mut main = Vec::new();
        let mut walls = Vec::new();
        for (i, x) in xs.iter().enumerate() {
            let xc = self.rs.to_chamber(x);
            if linalg::norm(&xc) == 0.0 {
                out[i] = Some(EvaluationReport::plain(Complex64::new(1.0, 0.0), Branch::Origin, 0.0));
            } else if self.rs.rank() == 1 && xc[0] < self.cfg.near_origin_t {
                out[i] = Some(self.near_origin_rank_one(lambda[0], xc[0]));
            } else if self.rs.rank() > 1 && self.rs.beta(&xc) < self.cfg.series.beta_min {
                walls.push((i, xc));
            } else {
                main.push((i, xc));
            }
        }
        if !main.is_empty() {
            let pts: Vec<Vec<f64>> = main.iter().map(|(_, x)| x.clone()).collect();
            let reports = self.evaluate_interior(&class, &pts)?;
            for ((i, _), r) in main.into_iter().zip(reports) {
                out[i] = Some(r);
            }
        }
        for (i, xc) in walls {
            out[i] = Some(self.bridge_near_wall(&lp, &class, &xc)?);
        }
        Ok(out.into_iter().map(|r| r.expect("every point handled")).collect())
    }

    fn evaluate_interior(&self, class: &SpectralClass, xs: &[Vec<f64>]) -> Result<Vec<EvaluationReport>, HyperError> {
        let lp = &class.dominant;
        let prep = self.prepare(xs, lp);
        if class.generic && !class.near_singular {
            match self.generic_sum(lp, &prep) {
                Ok(sum) => {
                    return Ok(sum
                        .values
                        .iter()
                        .zip(&sum.tails)
                        .zip(&prep.points)
                        .map(|((v, t), pw)| {
                            let mut r = EvaluationReport::plain(*v, Branch::Generic, *t);
                            r.warnings = self.series_warnings(*v, *t, pw.beta);
                            r
                        })
                        .collect())
                }
                Err(HyperError::CPole) | Err(HyperError::SingularTable) => {
                    let mut r = self.mean_value(lp, &prep)?;
                    for rep in r.iter_mut() {
                        rep.warnings.push("apparent singularity in the generic expansion; mean-value contour used".into());
                    }
                    return Ok(r);
                }
                Err(e) => return Err(e),
            }
        }
        if class.generic {
            return self.mean_value(lp, &prep);
        }
        let k = class.singular.len();
        let attempt = if k <= self.cfg.tensor_max_order {
            self.regularized_tensor(class, &prep)
        } else if k <= self.cfg.polarized_max_order {
            self.regularized_polarized(class, &prep)
        } else {
            Err(HyperError::Contour(format!("{k} regularizing factors exceed the polarized rule")))
        };
        match attempt {
            Ok(r) => Ok(r),
            Err(HyperError::Contour(reason)) => {
                let mut r = self.mean_value(lp, &prep)?;
                for rep in r.iter_mut() {
                    rep.warnings.push(format!("regularized contour unavailable ({reason}); mean-value contour used"));
                }
                Ok(r)
            }
            Err(e) => Err(e),
        }
    }

    /// Forces a contour evaluation even at generic `lambda`: the regularized rule
    /// when `Sigma_lambda` is nonempty, the mean-value circle otherwise.
    pub fn phi_contour(&self, lambda: &[Complex64], xs: &[Vec<f64>]) -> Result<Vec<EvaluationReport>, HyperError> {
        self.check_lambda(lambda)?;
        let class = self.classify(lambda);
        let pts: Vec<Vec<f64>> = xs.iter().map(|x| self.rs.to_chamber(x)).collect();
        let prep = self.prepare(&pts, &class.dominant);
        match class.singular.len() {
            0 => self.mean_value(&class.dominant, &prep),
            k if k <= self.cfg.tensor_max_order => self.regularized_tensor(&class, &prep),
            _ => self.regularized_polarized(&class, &prep),
        }
    }

    /// Regularizing polynomials and contour radii at a dominant `lambda0`.
    pub fn regularizers(&self, lambda0: &[Complex64]) -> Result<RegularizerBundle, HyperError> {
        self.check_lambda(lambda0)?;
        let re: Vec<f64> = lambda0.iter().map(|z| z.re).collect();
        if !self.rs.is_dominant(&re, 1e-10) {
            return Err(HyperError::Invalid("lambda0 must have dominant real part".into()));
        }
        let class = self.classify(lambda0);
        Ok(self.bundle_for(&class))
    }

    fn bundle_for(&self, class: &SpectralClass) -> RegularizerBundle {
        let roots = self.rs.positive_roots();
        let mut pi0 = FactoredPolynomial::one();
        let mut pi1 = FactoredPolynomial::one();
        let mut p_extra = FactoredPolynomial::one();
        let mut rho0 = vec![0.0; self.rs.rank()];
        for s in &class.singular {
            let r = &roots[s.root];
            if s.level == 0 {
                pi0.factors.push((r.vector.clone(), 0.0));
                for (a, b) in rho0.iter_mut().zip(&r.vector) {
                    *a += b;
                }
            } else {
                pi1.factors.push((r.vector.clone(), 0.0));
                p_extra.factors.push((r.vector.clone(), s.level as f64 * r.norm2));
            }
        }
        let mut pi = pi0.clone();
        pi.factors.extend(pi1.factors.iter().cloned());
        let mut p = pi0.clone();
        p.factors.extend(p_extra.factors);
        let k = class.singular.len();
        let gram: Vec<f64> = (0..k * k)
            .map(|ij| {
                let (i, j) = (ij / k, ij % k);
                linalg::dot(&roots[class.singular[i].root].vector, &roots[class.singular[j].root].vector)
            })
            .collect();
        let c0 = permanent(&gram, k);
        let gap = self.foreign_gap(class);
        let contour_radii = self.tensor_radii(class, gap, 0.0);
        RegularizerBundle {
            lambda0: class.dominant.clone(),
            items: class.singular.clone(),
            pi0,
            pi1,
            pi,
            p,
            c0,
            rho0,
            gap,
            contour_radii,
            nodes_per_circle: self.cfg.nodes_per_circle,
        }
    }

    /// Euclidean distance from `lambda0` to the closest hyperplane
    /// `lambda_alpha = n` that does not contain it.
    fn foreign_gap(&self, class: &SpectralClass) -> f64 {
        let mut gap = f64::INFINITY;
        for (idx, r) in self.rs.positive_roots().iter().enumerate() {
            if !r.indivisible {
                continue;
            }
            let s = r.coroot_coord(&class.dominant);
            let own = class.singular.iter().find(|q| q.root == idx).map(|q| q.level);
            let base = s.re.round() as i64;
            for n in base - 2..=base + 2 {
                if Some(n) == own {
                    continue;
                }
                gap = gap.min((s - n as f64).norm() * r.norm2.sqrt());
            }
        }
        gap
    }

    fn tensor_radii(&self, class: &SpectralClass, gap: f64, x_scale: f64) -> Vec<f64> {
        let roots = self.rs.positive_roots();
        let lens: Vec<f64> = class.singular.iter().map(|s| roots[s.root].norm2.sqrt()).collect();
        let k = lens.len();
        if k == 0 {
            return Vec::new();
        }
        // Geometric spread keeps different factors from cancelling at a node.
        let ratios: Vec<f64> = (0..k).map(|j| 0.45f64.powi(j as i32)).collect();
        let weighted: f64 = ratios.iter().zip(&lens).map(|(q, l)| q * l).sum();
        let mut base = self.cfg.max_radius.min(0.5 * gap / weighted);
        if x_scale > 0.0 {
            base = base.min(1.0 / (x_scale * lens.iter().cloned().fold(0.0, f64::max)));
        }
        ratios.iter().map(|q| base * q).collect()
    }

    fn eval_nodes(&self, nodes: &[Vec<Complex64>], prep: &Prepared) -> Result<Vec<NodeSum>, HyperError> {
        nodes.par_iter().map(|lam| self.generic_sum(lam, prep)).collect()
    }

    fn regularized_tensor(&self, class: &SpectralClass, prep: &Prepared) -> Result<Vec<EvaluationReport>, HyperError> {
        let bundle = self.bundle_for(class);
        let k = bundle.items.len();
        let roots = self.rs.positive_roots();
        let dirs: Vec<&[f64]> = bundle.items.iter().map(|s| roots[s.root].vector.as_slice()).collect();
        let mut n_per = self.cfg.nodes_per_circle;
        let mut shrink = 1.0;
        for attempt in 0..4 {
            let radii: Vec<f64> = self
                .tensor_radii(class, bundle.gap, prep.x_scale)
                .iter()
                .map(|r| r * shrink)
                .collect();
            if radii.iter().any(|r| !(*r > 1e-8)) {
                return Err(HyperError::Contour("foreign hyperplane too close".into()));
            }
            let offsets: Vec<f64> = (0..k).map(|j| ((j + 1 + attempt) as f64 * GOLDEN).fract()).collect();
            let total = n_per.pow(k as u32);
            let mut nodes = Vec::with_capacity(total);
            let mut weights = Vec::with_capacity(total);
            for flat in 0..total {
                let mut rem = flat;
                let mut lam = bundle.lambda0.clone();
                let mut weight = Complex64::new(1.0, 0.0);
                for j in 0..k {
                    let idx = rem % n_per;
                    rem /= n_per;
                    let theta = 2.0 * PI * (idx as f64 + offsets[j]) / n_per as f64;
                    let z = Complex64::from_polar(radii[j], theta);
                    for (l, a) in lam.iter_mut().zip(dirs[j]) {
                        *l += z * a;
                    }
                    weight *= Complex64::from_polar(1.0, -theta);
                }
                nodes.push(lam);
                weights.push(weight);
            }
            let min_r = radii.iter().cloned().fold(f64::INFINITY, f64::min);
            let margin = nodes.iter().map(|l| self.node_margin(l)).fold(f64::INFINITY, f64::min);
            if margin < 0.02 * min_r {
                shrink *= 0.8;
                continue;
            }
            let sums = match self.eval_nodes(&nodes, prep) {
                Ok(s) => s,
                Err(HyperError::SingularTable) | Err(HyperError::CPole) => {
                    shrink *= 0.8;
                    n_per *= 2;
                    if n_per.pow(k as u32) > 70_000 {
                        n_per /= 2;
                    }
                    continue;
                }
                Err(e) => return Err(e),
            };
            let scale = radii.iter().product::<f64>() * bundle.c0 * total as f64;
            return Ok(self.assemble(&bundle, &nodes, &weights, &sums, scale, prep, min_r));
        }
        Err(HyperError::Contour("no admissible polydisk after retries".into()))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        &self,
        bundle: &RegularizerBundle,
        nodes: &[Vec<Complex64>],
        weights: &[Complex64],
        sums: &[NodeSum],
        scale: f64,
        prep: &Prepared,
        radius: f64,
    ) -> Vec<EvaluationReport> {
        let n_x = prep.points.len();
        let pvals: Vec<Complex64> = nodes.iter().map(|l| bundle.p.eval(l)).collect();
        (0..n_x)
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut tail = 0.0;
                let mut max_g = 0.0f64;
                for ((s, w), p) in sums.iter().zip(weights).zip(&pvals) {
                    let g = p * s.values[i];
                    acc += g * w;
                    tail += (p.norm() * s.tails[i]).abs();
                    max_g = max_g.max(g.norm());
                }
                let value = acc / scale;
                let tail = tail / scale;
                let mut r = EvaluationReport::plain(value, Branch::Regularized, tail);
                r.nodes = nodes.len();
                r.radius = radius;
                r.max_integrand = max_g;
                r.warnings = self.series_warnings(value, tail, prep.points[i].beta);
                r
            })
            .collect()
    }

    fn regularized_polarized(&self, class: &SpectralClass, prep: &Prepared) -> Result<Vec<EvaluationReport>, HyperError> {
        let bundle = self.bundle_for(class);
        let k = bundle.items.len();
        let roots = self.rs.positive_roots();
        let dirs: Vec<Vec<f64>> = bundle.items.iter().map(|s| roots[s.root].vector.clone()).collect();
        let max_len = dirs.iter().map(|d| linalg::norm(d)).fold(0.0, f64::max);
        let n_line = self.cfg.nodes_per_circle + 2 * k;
        for attempt in 0..6 {
            // t_j in {-b_j, b_j}. Lines v and -v give the same k-th coefficient up to
            // (-1)^k, so only masks with the last bit set are kept, at double weight.
            let spans: Vec<f64> = (0..k)
                .map(|j| if j == 0 { 1.0 } else { 0.6 + 0.8 * (((j + 1) * (attempt + 3)) as f64 * GOLDEN).fract() })
                .collect();
            let mut lines = Vec::with_capacity(1 << (k - 1));
            let mut ok = true;
            for mask in (1usize << (k - 1))..(1usize << k) {
                let mut v = vec![0.0; self.rs.rank()];
                for (j, d) in dirs.iter().enumerate() {
                    let t = if mask & (1 << j) != 0 { spans[j] } else { -spans[j] };
                    for (vi, di) in v.iter_mut().zip(d) {
                        *vi += t * di;
                    }
                }
                let nv = linalg::norm(&v);
                let obliq = dirs
                    .iter()
                    .map(|d| (linalg::dot(&v, d) / (nv * linalg::norm(d))).abs())
                    .fold(f64::INFINITY, f64::min);
                if !(obliq > 0.05) {
                    ok = false;
                    break;
                }
                let mut r = (self.cfg.max_radius * max_len).min(0.5 * bundle.gap) / nv;
                if prep.x_scale > 0.0 {
                    r = r.min(1.0 / (prep.x_scale * nv));
                }
                let sign = if (k - mask.count_ones() as usize) % 2 == 0 { 2.0 } else { -2.0 };
                lines.push((v, r, sign));
            }
            if !ok {
                continue;
            }
            let offset = ((attempt + 1) as f64 * GOLDEN).fract();
            let mut nodes = Vec::with_capacity(lines.len() * n_line);
            let mut weights = Vec::with_capacity(nodes.capacity());
            for (v, r, sign) in &lines {
                for q in 0..n_line {
                    let theta = 2.0 * PI * (q as f64 + offset) / n_line as f64;
                    let s = Complex64::from_polar(*r, theta);
                    let lam: Vec<Complex64> = bundle.lambda0.iter().zip(v).map(|(l, a)| l + s * a).collect();
                    nodes.push(lam);
                    // [s^k] coefficient weight, with the polarization sign and 1/r^k.
                    weights.push(Complex64::from_polar(sign / (r.powi(k as i32) * n_line as f64), -(k as f64) * theta));
                }
            }
            let min_r = lines.iter().map(|(v, r, _)| r * linalg::norm(v)).fold(f64::INFINITY, f64::min);
            let margin = nodes.iter().map(|l| self.node_margin(l)).fold(f64::INFINITY, f64::min);
            if margin < 0.01 * min_r / max_len.max(1.0) {
                continue;
            }
            let sums = match self.eval_nodes(&nodes, prep) {
                Ok(s) => s,
                Err(HyperError::SingularTable) | Err(HyperError::CPole) => continue,
                Err(e) => return Err(e),
            };
            let denom: f64 = spans.iter().map(|b| 2.0 * b).product::<f64>() * bundle.c0;
            return Ok(self.assemble(&bundle, &nodes, &weights, &sums, denom, prep, min_r));
        }
        Err(HyperError::Contour("no admissible polarized lines".into()))
    }

    /// Direction in `a*` whose pairing with every root is bounded away from zero.
    fn oblique_direction(&self, seed: usize) -> Vec<f64> {
        let n = self.rs.rank();
        let mut best = vec![1.0; n];
        let mut best_score = -1.0;
        for trial in 0..48 {
            let v: Vec<f64> = (0..n)
                .map(|k| (((trial + 7 * seed + 1) * (k + 2)) as f64 * GOLDEN).fract() - 0.5 + 0.05 * k as f64)
                .collect();
            let nv = linalg::norm(&v);
            if nv == 0.0 {
                continue;
            }
            let score = self
                .rs
                .positive_roots()
                .iter()
                .map(|r| (r.eval(&v) / (nv * r.norm2.sqrt())).abs())
                .fold(f64::INFINITY, f64::min);
            if score > best_score {
                best_score = score;
                best = v.iter().map(|c| c / nv).collect();
            }
        }
        best
    }

    /// Mean of `phi` over a circle centred at `lambda` in a complex line with oblique direction.
    fn mean_value(&self, lambda: &[Complex64], prep: &Prepared) -> Result<Vec<EvaluationReport>, HyperError> {
        // The integrand is entire of exponential type |x|, so the aliasing error is
        // about (r |x|)^N / N!; a wide circle keeps cancellation between Weyl terms small.
        let n_nodes = 2 * self.cfg.nodes_per_circle;
        for attempt in 0..6 {
            let v = self.oblique_direction(attempt);
            let mut r = 0.85f64.powi(attempt as i32);
            if prep.x_scale > 0.0 {
                r = r.min(0.125 * n_nodes as f64 / prep.x_scale);
            }
            let nodes: Vec<Vec<Complex64>> = (0..n_nodes)
                .map(|q| {
                    let theta = 2.0 * PI * (q as f64 + 0.5) / n_nodes as f64;
                    let s = Complex64::from_polar(r, theta);
                    lambda.iter().zip(&v).map(|(l, a)| l + s * a).collect()
                })
                .collect();
            let margin = nodes.iter().map(|l| self.node_margin(l)).fold(f64::INFINITY, f64::min);
            if margin < 0.01 * r {
                continue;
            }
            let sums = match self.eval_nodes(&nodes, prep) {
                Ok(s) => s,
                Err(HyperError::SingularTable) | Err(HyperError::CPole) => continue,
                Err(e) => return Err(e),
            };
            let n_x = prep.points.len();
            return Ok((0..n_x)
                .map(|i| {
                    let value = sums.iter().map(|s| s.values[i]).sum::<Complex64>() / n_nodes as f64;
                    let tail = sums.iter().map(|s| s.tails[i]).sum::<f64>() / n_nodes as f64;
                    let mut rep = EvaluationReport::plain(value, Branch::MeanValue, tail);
                    rep.nodes = n_nodes;
                    rep.radius = r;
                    rep.max_integrand = sums.iter().map(|s| s.values[i].norm()).fold(0.0, f64::max);
                    rep.warnings = self.series_warnings(value, tail, prep.points[i].beta);
                    rep
                })
                .collect());
        }
        Err(HyperError::Contour("no admissible mean-value circle".into()))
    }

    /// Rank one: power series of the regular solution about the origin in `-sinh^2 t`.
    fn near_origin_rank_one(&self, lambda: Complex64, t: f64) -> EvaluationReport {
        let short = &self.rs.positive_roots()[0];
        let m = short.multiplicity;
        let m2 = self.rs.double_multiplicity(short);
        let rho = m / 2.0 + m2;
        let a = (lambda + rho) / 2.0;
        let b = (-lambda + rho) / 2.0;
        let c = (m + m2 + 1.0) / 2.0;
        let z = -t.sinh().powi(2);
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        let mut last = f64::INFINITY;
        for k in 0..2000 {
            let kf = k as f64;
            term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
            sum += term;
            last = term.norm();
            if last < 1e-17 * sum.norm() && kf > (a.norm() + b.norm()) {
                break;
            }
        }
        let mut r = EvaluationReport::plain(sum, Branch::NearOrigin, last);
        if last > 1e-12 * sum.norm() {
            r.warnings.push("near-origin series did not reach full precision".into());
        }
        r
    }

    /// Near-wall value for real `lambda` from subadditivity brackets at an interior point.
    fn bridge_near_wall(&self, lp: &[Complex64], class: &SpectralClass, x: &[f64]) -> Result<EvaluationReport, HyperError> {
        let beta = self.rs.beta(x);
        if lp.iter().any(|z| z.im.abs() > 1e-14) {
            return Err(HyperError::NearWall { beta });
        }
        let lam: Vec<f64> = lp.iter().map(|z| z.re).collect();
        let shift = self.wall_shift(x);
        let inner: Vec<f64> = x.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let far = self.evaluate_interior(class, &[inner])?.remove(0);
        let (lo_exp, hi_exp) = self.subadditivity_exponents(&lam, &shift);
        let far_v = far.value.re;
        // Widen by the numerical error of the interior value.
        let slack = far.tail_bound + 1e-12 * far_v.abs();
        let lo = (far_v - slack) * (-lo_exp).exp();
        let hi = (far_v + slack) * hi_exp.exp();
        let mut r = EvaluationReport::plain(Complex64::new((lo * hi).sqrt(), 0.0), Branch::Bracketed, far.tail_bound);
        r.bracket = Some((lo, hi));
        r.warnings.push(format!(
            "beta(x) = {beta:.3e} below beta_min; value bridged from an interior point, bracket [{lo:.6e}, {hi:.6e}]"
        ));
        Ok(r)
    }

    /// Smallest multiple of the chamber direction `rho` that moves `x` to `beta >= beta_min`.
    fn wall_shift(&self, x: &[f64]) -> Vec<f64> {
        let ones = vec![1.0; self.rs.rank()];
        let dir = self.rs.from_chamber_coordinates(&ones);
        let need = (self.cfg.series.beta_min - self.rs.beta(x)).max(0.0) * 1.05;
        dir.iter().map(|d| d * need).collect()
    }

    /// `(max_w (lambda - rho)(w x1), max_w (rho - lambda)(w x1))`.
    fn subadditivity_exponents(&self, lam: &[f64], x1: &[f64]) -> (f64, f64) {
        let diff: Vec<f64> = lam.iter().zip(self.rs.rho()).map(|(l, r)| l - r).collect();
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for w in self.rs.weyl_group() {
            let wx = w.apply(x1);
            let d = linalg::dot(&diff, &wx);
            lo = lo.max(d);
            hi = hi.max(-d);
        }
        (lo, hi)
    }

    /// Checks `phi(x+x1) e^{-max_w (lambda-rho)(w x1)} <= phi(x) <= phi(x+x1) e^{max_w (rho-lambda)(w x1)}`.
    pub fn subadditivity_check(&self, lambda: &[f64], x: &[f64], x1: &[f64]) -> Result<bool, HyperError> {
        let lam: Vec<Complex64> = lambda.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        let sum: Vec<f64> = x.iter().zip(x1).map(|(a, b)| a + b).collect();
        let vals = self.phi_many(&lam, &[x.to_vec(), sum])?;
        let (lo_exp, hi_exp) = self.subadditivity_exponents(lambda, x1);
        let at_x = vals[0].value.re;
        let at_sum = vals[1].value.re;
        let tol = 1e-9 * at_x.abs().max(at_sum.abs()).max(1e-300);
        Ok(at_sum * (-lo_exp).exp() <= at_x + tol && at_x <= at_sum * hi_exp.exp() + tol)
    }

    /// `|phi_lambda(x)| <= phi_{Re lambda}(x) (1 + 1e-8)`.
    pub fn schapira_bound_check(&self, lambda: &[Complex64], x: &[f64]) -> Result<bool, HyperError> {
        let (lhs, rhs) = self.schapira_sides(lambda, x)?;
        Ok(lhs <= rhs * (1.0 + 1e-8))
    }

    pub fn schapira_sides(&self, lambda: &[Complex64], x: &[f64]) -> Result<(f64, f64), HyperError> {
        let re: Vec<Complex64> = lambda.iter().map(|z| Complex64::new(z.re, 0.0)).collect();
        let lhs = self.value(lambda, x)?.norm();
        let rhs = self.value(&re, x)?.re;
        Ok((lhs, rhs))
    }

    pub fn is_bounded(&self, lambda: &[Complex64]) -> HullCertificate {
        let coefficients = self.rs.hull_slack(lambda);
        let tol = 1e-10 * (1.0 + linalg::norm(self.rs.rho()));
        HullCertificate { bounded: coefficients.iter().all(|c| *c >= -tol), coefficients }
    }

    /// `|L phi - (<lambda,lambda> - <rho,rho>) phi|` with `L` applied by central differences.
    pub fn eigen_residual(&self, lambda: &[Complex64], x: &[f64], h: f64) -> Result<f64, HyperError> {
        self.check_x(x)?;
        let n = self.rs.rank();
        let mut pts = vec![x.to_vec()];
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut p = x.to_vec();
                p[i] += s * h;
                pts.push(p);
            }
        }
        let vals: Vec<Complex64> = self.phi_many(lambda, &pts)?.iter().map(|r| r.value).collect();
        let f0 = vals[0];
        let mut lap = Complex64::new(0.0, 0.0);
        let mut grad = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let fp = vals[1 + 2 * i];
            let fm = vals[2 + 2 * i];
            lap += (fp - 2.0 * f0 + fm) / (h * h);
            grad[i] = (fp - fm) / (2.0 * h);
        }
        let mut drift = Complex64::new(0.0, 0.0);
        for r in self.rs.positive_roots() {
            let a = r.eval(x);
            let d: Complex64 = grad.iter().zip(&r.vector).map(|(g, v)| g * v).sum();
            drift += d * (r.multiplicity / a.tanh());
        }
        let ll: Complex64 = lambda.iter().map(|z| z * z).sum();
        let rr: f64 = linalg::dot(self.rs.rho(), self.rs.rho());
        Ok((lap + drift - (ll - rr) * f0).norm())
    }

    /// Holomorphic extension of `pi0(lambda) c(lambda)` evaluated at `lambda0` as a circle mean.
    pub fn b0(&self, lambda0: &[Complex64], pi0: &FactoredPolynomial) -> Result<Complex64, HyperError> {
        let v = self.oblique_direction(3);
        let n_nodes = 48;
        // Half the distance along v to the nearest pole hyperplane lambda_alpha = -n
        // that does not pass through lambda0.
        let min_len = self.rs.positive_roots().iter().map(|r| r.norm2.sqrt()).fold(f64::INFINITY, f64::min);
        let mut r = 0.25 * min_len;
        for root in self.rs.positive_roots().iter().filter(|a| a.indivisible) {
            let s = root.coroot_coord(lambda0);
            let speed = (root.eval(&v) / root.norm2).abs();
            let (d0, n0) = dist_to_int(s);
            let mut foreign = f64::INFINITY;
            for n in [n0 - 1, n0, n0 + 1] {
                let d = (s - n as f64).norm();
                if n <= 0 && !(n == n0 && d0 < self.cfg.integer_tol) {
                    foreign = foreign.min(d);
                }
            }
            r = r.min(0.5 * foreign / speed);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for q in 0..n_nodes {
            let theta = 2.0 * PI * (q as f64 + 0.5) / n_nodes as f64;
            let s = Complex64::from_polar(r, theta);
            let lam: Vec<Complex64> = lambda0.iter().zip(&v).map(|(l, a)| l + s * a).collect();
            let c = self.ctx.value(&lam).map_err(|_| HyperError::CPole)?;
            acc += pi0.eval(&lam) * c;
        }
        Ok(acc / n_nodes as f64)
    }

    /// Ratios `phi(t x1) / [pi0(t x1) e^{(lambda0 - rho)(t x1)}]` along a ray and
    /// their predicted limit.
    pub fn leading_asymptotic(&self, lambda0: &[f64], x1: &[f64], ts: &[f64]) -> Result<AsymptoticReport, HyperError> {
        self.rs.check_dim(lambda0.len())?;
        self.check_x(x1)?;
        if !self.rs.is_dominant(lambda0, 1e-12) {
            return Err(HyperError::NotRealDominant);
        }
        if self.rs.beta(x1) <= 0.0 {
            return Err(HyperError::Invalid("ray direction must lie inside the positive chamber".into()));
        }
        let lam: Vec<Complex64> = lambda0.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        let class = self.classify(&lam);
        let bundle = self.bundle_for(&class);
        let d = bundle.pi0.degree();
        let pts: Vec<Vec<f64>> = ts.iter().map(|t| x1.iter().map(|v| v * t).collect()).collect();
        let vals = self.phi_many(&lam, &pts)?;
        let shift: Vec<f64> = lambda0.iter().zip(self.rs.rho()).map(|(l, r)| l - r).collect();
        let ratios: Vec<f64> = vals
            .iter()
            .zip(&pts)
            .map(|(v, x)| v.value.re / (bundle.pi0.eval_real(x) * linalg::dot(&shift, x).exp()))
            .collect();
        let b0 = self.b0(&lam, &bundle.pi0)?.re;
        let pi0_rho0 = bundle.pi0.eval_real(&bundle.rho0);
        let orbit_factor = 2f64.powi(d as i32);
        let predicted_limit = orbit_factor * b0 / pi0_rho0;
        let deviations = ratios.iter().map(|r| (r - predicted_limit).abs()).collect();
        let extrapolated = (0..ts.len())
            .map(|i| (i >= d).then(|| extrapolate_inverse(&ts[i - d..=i], &ratios[i - d..=i])))
            .collect();
        Ok(AsymptoticReport {
            ts: ts.to_vec(),
            ratios,
            predicted_limit,
            b0,
            pi0_rho0,
            orbit_factor,
            deviations,
            extrapolated,
            correction_degree: d,
        })
    }

    /// Ratio `phi(x) / [prod_{Sigma0} (1 + alpha(x)) e^{(lambda0 - rho)(x)}]` at each point.
    pub fn sharp_ratio(&self, lambda0: &[f64], xs: &[Vec<f64>]) -> Result<Vec<f64>, HyperError> {
        if !self.rs.is_dominant(lambda0, 1e-12) {
            return Err(HyperError::NotRealDominant);
        }
        let lam: Vec<Complex64> = lambda0.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        let class = self.classify(&lam);
        let zero_roots: Vec<&[f64]> = class
            .singular
            .iter()
            .filter(|s| s.level == 0)
            .map(|s| self.rs.positive_roots()[s.root].vector.as_slice())
            .collect();
        let shift: Vec<f64> = lambda0.iter().zip(self.rs.rho()).map(|(l, r)| l - r).collect();
        let vals = self.phi_many(&lam, xs)?;
        Ok(vals
            .iter()
            .zip(xs)
            .map(|(v, x)| {
                let poly: f64 = zero_roots.iter().map(|a| 1.0 + linalg::dot(a, x)).product();
                v.value.re / (poly * linalg::dot(&shift, x).exp())
            })
            .collect())
    }

    /// Symmetric two-step limit of the generic expansion along `direction`,
    /// Richardson-extrapolated from `eps` in `{1e-2, 1e-3}`.
    pub fn plain_limit(&self, lambda0: &[Complex64], direction: &[f64], xs: &[Vec<f64>]) -> Result<Vec<Complex64>, HyperError> {
        let at = |eps: f64| -> Result<Vec<Complex64>, HyperError> {
            let plus: Vec<Complex64> = lambda0.iter().zip(direction).map(|(l, v)| l + eps * v).collect();
            let minus: Vec<Complex64> = lambda0.iter().zip(direction).map(|(l, v)| l - eps * v).collect();
            let a = self.phi_generic_many(&plus, xs)?;
            let b = self.phi_generic_many(&minus, xs)?;
            Ok(a.iter().zip(&b).map(|(p, m)| (p.value + m.value) / 2.0).collect())
        };
        let coarse = at(1e-2)?;
        let fine = at(1e-3)?;
        Ok(coarse.iter().zip(&fine).map(|(c, f)| (100.0 * f - c) / 99.0).collect())
    }
}

/// Value at `1/t = 0` of the polynomial in `1/t` through the given points.
pub fn extrapolate_inverse(ts: &[f64], vals: &[f64]) -> f64 {
    let s: Vec<f64> = ts.iter().map(|t| 1.0 / t).collect();
    let n = s.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut l = 1.0;
        for j in 0..n {
            if i != j {
                l *= (0.0 - s[j]) / (s[i] - s[j]);
            }
        }
        total += l * vals[i];
    }
    total
}
