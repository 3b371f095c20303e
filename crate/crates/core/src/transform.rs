//! Desk-scale hypergeometric Fourier transform in rank one and two.
//!
//! Space integrals run over the positive chamber times `|W|`, parametrized by
//! chamber coordinates `s_j = alpha_j(x)`; spectral integrals run over
//! `i` times the dual chamber in the same coordinates. Integrands are
//! W-invariant in both variables, so nothing is lost.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hyper::{HyperError, Hypergeometric};
use crate::linalg;
use crate::rootsys::RootSystem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error(transparent)]
    Hyper(#[from] HyperError),
    #[error("lambda = {0:?} lies outside the tube C(rho) + i a*; the transform of an integrable function is undefined there")]
    OutsideTube(Vec<Complex64>),
    #[error("sigma lies outside the interior of C(eps_p rho) for p = {0}")]
    OutsideStrip(f64),
    #[error("transforms are implemented for rank 1 and 2, got rank {0}")]
    Rank(usize),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid transform configuration: {0}")]
    Config(String),
    #[error("spectral tail estimate {tail:e} exceeds tolerance {tol:e}")]
    Tail { tail: f64, tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransformConfig {
    /// Space truncation: integrals cover `|x| <= space_radius`.
    pub space_radius: f64,
    /// Spectral truncation: integrals cover `|tau| <= spectral_radius`.
    pub spectral_radius: f64,
    /// Gauss-Legendre cells per axis.
    pub space_cells: usize,
    /// Defaults to 32 in rank one and 16 in rank two. The Plancherel density has
    /// poles at distance 1/2 from `i a*`, which limits how wide cells can be.
    pub spectral_cells: Option<usize>,
    /// Gauss-Legendre points per cell.
    pub order: usize,
    /// Multiplier in the inversion formula; `None` until calibrated.
    pub plancherel_constant: Option<f64>,
    /// Rank two: width of the strip along the walls left out of space integrals
    /// (series evaluation there is out of contract). Defaults to `beta_min`.
    pub wall_margin: Option<f64>,
    /// Largest acceptable spectral tail relative to the integral scale.
    pub tail_tol: f64,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self {
            space_radius: 6.0,
            spectral_radius: 12.0,
            space_cells: 16,
            spectral_cells: None,
            order: 8,
            plancherel_constant: None,
            wall_margin: None,
            tail_tol: 1e-6,
        }
    }
}

impl TransformConfig {
    pub fn spectral_cells_for(&self, rank: usize) -> usize {
        self.spectral_cells.unwrap_or(if rank == 1 { 32 } else { 16 })
    }

    pub fn validate(&self, rank: usize) -> Result<(), TransformError> {
        if !(rank == 1 || rank == 2) {
            return Err(TransformError::Rank(rank));
        }
        if !(self.space_radius > 0.0 && self.spectral_radius > 0.0 && self.tail_tol > 0.0) {
            return Err(TransformError::Config("radii and tail_tol must be positive".into()));
        }
        let spectral_cells = self.spectral_cells_for(rank);
        if self.space_cells == 0 || spectral_cells == 0 || self.order == 0 {
            return Err(TransformError::Config("cells and order must be positive".into()));
        }
        if let Some(k) = self.plancherel_constant {
            if !(k > 0.0 && k.is_finite()) {
                return Err(TransformError::Config("plancherel_constant must be positive".into()));
            }
        }
        if rank == 2 && (self.space_cells * self.order > 128 || spectral_cells * self.order > 128) {
            return Err(TransformError::Config("rank-two grids are limited to 128 points per axis".into()));
        }
        Ok(())
    }
}

/// `prod_{alpha > 0} |e^{alpha(x)} - e^{-alpha(x)}|^{m_alpha}`.
pub fn mu_density(rs: &RootSystem, x: &[f64]) -> f64 {
    rs.positive_roots()
        .iter()
        .map(|r| (2.0 * r.eval(x).sinh()).abs().powf(r.multiplicity))
        .product()
}

/// Values on a tensor grid in chamber coordinates, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub axes: Vec<Vec<f64>>,
    pub values: Vec<Complex64>,
    /// Quadrature weights per axis when known (Gauss-Legendre output); otherwise
    /// composite Simpson or trapezoid weights are derived from the axes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_weights: Option<Vec<Vec<f64>>>,
}

impl SampledFunction {
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<Complex64>) -> Result<Self, TransformError> {
        let s = Self { axes, values, axis_weights: None };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), TransformError> {
        if self.axes.is_empty() {
            return Err(TransformError::Grid("no axes".into()));
        }
        for axis in &self.axes {
            if axis.len() < 2 {
                return Err(TransformError::Grid("each axis needs at least two points".into()));
            }
            if axis.windows(2).any(|w| !(w[1] > w[0])) || axis.iter().any(|v| !v.is_finite()) {
                return Err(TransformError::Grid("axes must be finite and strictly increasing".into()));
            }
        }
        let n: usize = self.axes.iter().map(|a| a.len()).product();
        if n != self.values.len() {
            return Err(TransformError::Grid(format!("{} values for {} grid points", self.values.len(), n)));
        }
        if self.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(TransformError::Grid("values must be finite".into()));
        }
        if let Some(w) = &self.axis_weights {
            if w.len() != self.axes.len() || w.iter().zip(&self.axes).any(|(a, b)| a.len() != b.len()) {
                return Err(TransformError::Grid("axis weights do not match the axes".into()));
            }
        }
        Ok(())
    }

    /// Rebuilds a tensor grid from unordered `(coordinates, value)` rows.
    pub fn from_rows(rank: usize, rows: &[(Vec<f64>, Complex64)]) -> Result<Self, TransformError> {
        if rank == 0 || rows.iter().any(|(c, _)| c.len() != rank) {
            return Err(TransformError::Grid(format!("every row needs {rank} coordinates")));
        }
        let axes: Vec<Vec<f64>> = (0..rank)
            .map(|k| {
                let mut a: Vec<f64> = rows.iter().map(|(c, _)| c[k]).collect();
                a.sort_by(f64::total_cmp);
                a.dedup();
                a
            })
            .collect();
        let n: usize = axes.iter().map(|a| a.len()).product();
        if n != rows.len() {
            return Err(TransformError::Grid(format!("{} rows do not form a full tensor grid of {} points", rows.len(), n)));
        }
        let mut values = vec![None; n];
        for (c, v) in rows {
            let mut flat = 0;
            for (k, axis) in axes.iter().enumerate() {
                let i = axis.binary_search_by(|a| a.total_cmp(&c[k])).expect("value taken from this axis");
                flat = flat * axis.len() + i;
            }
            if values[flat].replace(*v).is_some() {
                return Err(TransformError::Grid("duplicate grid point".into()));
            }
        }
        let values = values.into_iter().map(|v| v.expect("counted")).collect();
        Self::new(axes, values)
    }

    /// Chamber coordinates of every grid point in storage order.
    pub fn coordinates(&self) -> Vec<Vec<f64>> {
        tensor(&self.axes)
    }

    fn weights(&self) -> Vec<f64> {
        let per_axis: Vec<Vec<f64>> = match &self.axis_weights {
            Some(w) => w.clone(),
            None => self.axes.iter().map(|a| sampled_weights(a)).collect(),
        };
        tensor(&per_axis).iter().map(|w| w.iter().product()).collect()
    }
}

fn tensor(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for v in axis {
                let mut p = prefix.clone();
                p.push(*v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Composite Simpson weights on a uniform grid with an odd number of points,
/// trapezoid weights otherwise.
fn sampled_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    let h = (axis[n - 1] - axis[0]) / (n - 1) as f64;
    let uniform = axis.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1.0));
    if uniform && n % 2 == 1 && n >= 3 {
        (0..n)
            .map(|i| {
                let c = if i == 0 || i == n - 1 {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                c * h / 3.0
            })
            .collect()
    } else {
        (0..n)
            .map(|i| {
                let left = if i > 0 { axis[i] - axis[i - 1] } else { 0.0 };
                let right = if i + 1 < n { axis[i + 1] - axis[i] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect()
    }
}

/// Composite Gauss-Legendre rule on `[a, b]`.
fn composite_rule(a: f64, b: f64, cells: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(NonZeroUsize::new(order).expect("order validated"));
    let h = (b - a) / cells as f64;
    let mut nodes = Vec::with_capacity(cells * order);
    let mut weights = Vec::with_capacity(cells * order);
    for c in 0..cells {
        let lo = a + c as f64 * h;
        for (x, w) in rule.as_node_weight_pairs() {
            nodes.push(lo + 0.5 * h * (x + 1.0));
            weights.push(0.5 * h * w);
        }
    }
    (nodes, weights)
}

/// Quadrature nodes with total weights (including `|W|` and the Jacobian).
#[derive(Debug, Clone)]
pub struct Grid {
    pub axes: Vec<Vec<f64>>,
    pub axis_weights: Vec<Vec<f64>>,
    /// Points in `a` (or `a*`), storage order as in [`SampledFunction`].
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Rank two: true for nodes inside the excluded wall strip.
    pub in_strip: Vec<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ForwardReport {
    pub lambdas: Vec<Vec<Complex64>>,
    pub values: Vec<Complex64>,
    /// Bound for the part of the integral beyond the space radius, from `|phi| <= 1`.
    pub truncation_tail: f64,
    /// Rank two: bound for the excluded wall strip, from `|phi| <= 1`.
    pub strip_bound: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseReport {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Complex64>,
    pub spectral_tail: f64,
    pub plancherel_constant: f64,
    pub calibrated: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PlancherelReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs / lhs`; equals the reciprocal of the Plancherel constant.
    pub ratio: f64,
    /// `constant * rhs / lhs` when a constant is set.
    pub calibrated_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub sigma: Vec<f64>,
    pub direction: Vec<f64>,
    pub s: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// `max_{s' >= s} |F(sigma + i s' u)|`.
    pub envelope: Vec<f64>,
    /// Least-squares slope of `-ln |F|` against `s` over the second half of the samples.
    pub decay_rate: f64,
    pub max: f64,
    pub decays: bool,
}

/// Smooth radial bump `exp(-|x|^2 / (2 width^2)) * exp(1 - 1/(1 - (|x|/radius)^2))`.
pub fn smooth_bump(width: f64, radius: f64) -> impl Fn(&[f64]) -> f64 + Sync {
    move |x: &[f64]| {
        let r2 = x.iter().map(|v| v * v).sum::<f64>();
        let u2 = r2 / (radius * radius);
        if u2 >= 1.0 {
            0.0
        } else {
            (-r2 / (2.0 * width * width)).exp() * (1.0 - 1.0 / (1.0 - u2)).exp()
        }
    }
}

pub struct HypergeometricTransform<'a> {
    hyp: &'a Hypergeometric,
    cfg: TransformConfig,
    /// `x = chamber_map * s`, column-major by chamber coordinate.
    chamber_map: Vec<Vec<f64>>,
    jacobian: f64,
    weyl_order: f64,
}

impl<'a> HypergeometricTransform<'a> {
    pub fn new(hyp: &'a Hypergeometric, cfg: TransformConfig) -> Result<Self, TransformError> {
        let rs = hyp.root_system();
        cfg.validate(rs.rank())?;
        let n = rs.rank();
        let chamber_map: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                rs.from_chamber_coordinates(&e)
            })
            .collect();
        let flat: Vec<f64> = (0..n * n).map(|ij| chamber_map[ij % n][ij / n]).collect();
        let jacobian = linalg::determinant(&flat, n).abs();
        Ok(Self { hyp, cfg, chamber_map, jacobian, weyl_order: rs.weyl_order() as f64 })
    }

    pub fn config(&self) -> &TransformConfig {
        &self.cfg
    }

    pub fn with_constant(mut self, constant: f64) -> Result<Self, TransformError> {
        self.cfg.plancherel_constant = Some(constant);
        self.cfg.validate(self.hyp.root_system().rank())?;
        Ok(self)
    }

    fn rs(&self) -> &RootSystem {
        self.hyp.root_system()
    }

    fn to_space(&self, s: &[f64]) -> Vec<f64> {
        let n = s.len();
        (0..n).map(|i| (0..n).map(|j| self.chamber_map[j][i] * s[j]).sum()).collect()
    }

    /// Largest chamber coordinate reachable within `|x| <= radius`.
    fn box_side(&self, radius: f64) -> f64 {
        self.rs().simple_roots().map(|r| r.norm2.sqrt()).fold(0.0, f64::max) * radius
    }

    fn grid_between(&self, inner: f64, outer: f64, cells: usize, with_strip: bool) -> Grid {
        let n = self.rs().rank();
        let side = self.box_side(outer);
        let (nodes, w) = composite_rule(0.0, side, cells, self.cfg.order);
        let axes = vec![nodes; n];
        let axis_weights = vec![w; n];
        let coords = tensor(&axes);
        let wts = tensor(&axis_weights);
        let margin = self.cfg.wall_margin.unwrap_or(self.hyp.config().series.beta_min);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut in_strip = Vec::new();
        for (s, w) in coords.iter().zip(&wts) {
            let x = self.to_space(s);
            let r = linalg::norm(&x);
            if r > outer || r < inner {
                continue;
            }
            points.push(x);
            weights.push(w.iter().product::<f64>() * self.jacobian * self.weyl_order);
            in_strip.push(with_strip && n > 1 && s.iter().cloned().fold(f64::INFINITY, f64::min) < margin);
        }
        Grid { axes, axis_weights, points, weights, in_strip }
    }

    /// Space quadrature over `|x| <= space_radius`.
    pub fn space_grid(&self) -> Grid {
        self.grid_between(0.0, self.cfg.space_radius, self.cfg.space_cells, true)
    }

    /// Spectral quadrature over `|tau| <= spectral_radius`; weights exclude the density.
    pub fn spectral_grid(&self) -> Grid {
        self.grid_between(0.0, self.cfg.spectral_radius, self.cfg.spectral_cells_for(self.rs().rank()), false)
    }

    fn check_tube(&self, lambda: &[Complex64]) -> Result<(), TransformError> {
        if !self.hyp.is_bounded(lambda).bounded {
            return Err(TransformError::OutsideTube(lambda.to_vec()));
        }
        Ok(())
    }

    /// `f^(lambda) = |W| int_{a+} f phi_lambda dmu` for a W-invariant closure `f`.
    pub fn forward_fn<F>(&self, f: F, lambdas: &[Vec<Complex64>]) -> Result<ForwardReport, TransformError>
    where
        F: Fn(&[f64]) -> f64,
    {
        let grid = self.space_grid();
        let fx: Vec<f64> = grid.points.iter().map(|x| f(x)).collect();
        let shell = self.grid_between(self.cfg.space_radius, 1.25 * self.cfg.space_radius, self.cfg.space_cells, false);
        let truncation_tail: f64 = shell
            .points
            .iter()
            .zip(&shell.weights)
            .map(|(x, w)| (f(x) * mu_density(self.rs(), x)).abs() * w)
            .sum();
        let fx: Vec<Complex64> = fx.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        self.forward_on(&grid, &fx, lambdas, truncation_tail)
    }

    /// Forward transform of sampled values; the grid is in chamber coordinates.
    pub fn forward_sampled(&self, f: &SampledFunction, lambdas: &[Vec<Complex64>]) -> Result<ForwardReport, TransformError> {
        f.validate()?;
        let rs = self.rs();
        if f.axes.len() != rs.rank() {
            return Err(TransformError::Grid(format!("expected {} axes", rs.rank())));
        }
        if f.axes.iter().any(|a| a[0] < 0.0) {
            return Err(TransformError::Grid("space grid must lie in the closed chamber".into()));
        }
        let margin = self.cfg.wall_margin.unwrap_or(self.hyp.config().series.beta_min);
        let coords = f.coordinates();
        let weights = f.weights();
        let points: Vec<Vec<f64>> = coords.iter().map(|s| self.to_space(s)).collect();
        let in_strip = coords
            .iter()
            .map(|s| rs.rank() > 1 && s.iter().cloned().fold(f64::INFINITY, f64::min) < margin)
            .collect();
        let grid = Grid {
            axes: f.axes.clone(),
            axis_weights: Vec::new(),
            points,
            weights: weights.iter().map(|w| w * self.jacobian * self.weyl_order).collect(),
            in_strip,
        };
        // Edge contribution as a proxy for what lies beyond the sampled range.
        let last = f.axes.iter().map(|a| a.len()).product::<usize>() - 1;
        let edge = f.values[last].norm() * mu_density(rs, &grid.points[last]) * grid.weights[last];
        self.forward_on(&grid, &f.values, lambdas, edge)
    }

    fn forward_on(
        &self,
        grid: &Grid,
        fx: &[Complex64],
        lambdas: &[Vec<Complex64>],
        truncation_tail: f64,
    ) -> Result<ForwardReport, TransformError> {
        let rs = self.rs();
        for l in lambdas {
            rs.check_dim(l.len()).map_err(HyperError::from)?;
            self.check_tube(l)?;
        }
        let mut active_pts = Vec::new();
        let mut active_w = Vec::new();
        let mut strip_bound = 0.0;
        for ((x, w), (f, strip)) in grid.points.iter().zip(&grid.weights).zip(fx.iter().zip(&grid.in_strip)) {
            let fm = f * mu_density(rs, x) * *w;
            if *strip {
                strip_bound += fm.norm();
            } else if fm.norm() > 0.0 {
                active_pts.push(x.clone());
                active_w.push(fm);
            }
        }
        let mut values = Vec::with_capacity(lambdas.len());
        let mut warnings = Vec::new();
        for l in lambdas {
            if active_pts.is_empty() {
                values.push(Complex64::new(0.0, 0.0));
                continue;
            }
            let reports = self.hyp.phi_many(l, &active_pts)?;
            let mut acc = Complex64::new(0.0, 0.0);
            for (r, w) in reports.iter().zip(&active_w) {
                acc += r.value * w;
            }
            if reports.iter().any(|r| !r.warnings.is_empty()) {
                warnings.push(format!("phi evaluations at lambda = {l:?} reported warnings"));
            }
            values.push(acc);
        }
        if strip_bound > 0.0 {
            warnings.push(format!("wall strip excluded; contribution bounded by {strip_bound:.3e}"));
        }
        Ok(ForwardReport { lambdas: lambdas.to_vec(), values, truncation_tail, strip_bound, warnings })
    }

    /// Forward transform of `f` on the spectral grid, as a sampled function of `tau`.
    pub fn spectrum<F>(&self, f: F) -> Result<SampledFunction, TransformError>
    where
        F: Fn(&[f64]) -> f64,
    {
        let grid = self.spectral_grid();
        let lambdas: Vec<Vec<Complex64>> = tensor(&grid.axes)
            .iter()
            .map(|s| self.to_space(s).iter().map(|t| Complex64::new(0.0, *t)).collect())
            .collect();
        let report = self.forward_fn(f, &lambdas)?;
        Ok(SampledFunction { axes: grid.axes, values: report.values, axis_weights: Some(grid.axis_weights) })
    }

    /// `K int_{i a*} F(lambda) phi_{-lambda}(x) |c(lambda)|^{-2} dlambda` at each point,
    /// with `F` sampled on a tensor grid of chamber coordinates of `tau`.
    pub fn inverse(&self, spectrum: &SampledFunction, xs: &[Vec<f64>]) -> Result<InverseReport, TransformError> {
        spectrum.validate()?;
        let rs = self.rs();
        if spectrum.axes.len() != rs.rank() {
            return Err(TransformError::Grid(format!("expected {} axes", rs.rank())));
        }
        for x in xs {
            rs.check_dim(x.len()).map_err(HyperError::from)?;
        }
        let (constant, calibrated) = match self.cfg.plancherel_constant {
            Some(k) => (k, true),
            None => (1.0, false),
        };
        let ctx = self.hyp.c_function();
        let coords = spectrum.coordinates();
        let weights = spectrum.weights();
        let mut density_weights = Vec::with_capacity(coords.len());
        let mut taus = Vec::with_capacity(coords.len());
        for (s, w) in coords.iter().zip(&weights) {
            let tau = self.to_space(s);
            let lam: Vec<Complex64> = tau.iter().map(|t| Complex64::new(0.0, *t)).collect();
            density_weights.push(ctx.plancherel_density(&lam) * w * self.jacobian * self.weyl_order);
            taus.push(tau);
        }
        let spectral_tail = self.spectral_tail(&taus, &spectrum.values, &density_weights);
        let scale: f64 = spectrum.values.iter().zip(&density_weights).map(|(v, w)| v.norm() * w).sum();
        if spectral_tail > self.cfg.tail_tol * scale.max(f64::MIN_POSITIVE) {
            return Err(TransformError::Tail { tail: spectral_tail, tol: self.cfg.tail_tol * scale });
        }
        let mut values = vec![Complex64::new(0.0, 0.0); xs.len()];
        for ((tau, f), w) in taus.iter().zip(&spectrum.values).zip(&density_weights) {
            if f.norm() * w == 0.0 {
                continue;
            }
            let lam: Vec<Complex64> = tau.iter().map(|t| Complex64::new(0.0, *t)).collect();
            let phis = self.hyp.phi_many(&lam, xs)?;
            for (acc, p) in values.iter_mut().zip(&phis) {
                // phi_{-i tau}(x) = conj(phi_{i tau}(x)) for real x.
                *acc += f * p.value.conj() * *w;
            }
        }
        for v in values.iter_mut() {
            *v *= constant;
        }
        Ok(InverseReport { points: xs.to_vec(), values, spectral_tail, plancherel_constant: constant, calibrated })
    }

    /// Extrapolated spectral tail from an exponential fit of `|F| |c|^{-2}` in `|tau|`
    /// over the outer quarter of the grid.
    fn spectral_tail(&self, taus: &[Vec<f64>], values: &[Complex64], weights: &[f64]) -> f64 {
        let r_max = taus.iter().map(|t| linalg::norm(t)).fold(0.0, f64::max);
        let mut pts = Vec::new();
        for ((t, v), w) in taus.iter().zip(values).zip(weights) {
            let r = linalg::norm(t);
            let g = v.norm() * w;
            if r >= 0.75 * r_max && g > 0.0 {
                pts.push((r, g.ln()));
            }
        }
        let edge: f64 = taus
            .iter()
            .zip(values)
            .zip(weights)
            .filter(|((t, _), _)| linalg::norm(t) >= 0.9 * r_max)
            .map(|((_, v), w)| v.norm() * w)
            .sum();
        if pts.len() < 2 {
            return edge;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let width = 0.1 * r_max;
        if slope >= 0.0 {
            // Flat outer data (a noise floor): continue it over one more radius.
            return edge * r_max / width;
        }
        // Mass per unit radius decays like e^{slope r}; integrate past the edge.
        edge / width / (-slope)
    }

    /// `(||f||^2, int |f^|^2 |c|^{-2}, ratio)` for a real W-invariant `f`.
    pub fn plancherel_check<F>(&self, f: F) -> Result<PlancherelReport, TransformError>
    where
        F: Fn(&[f64]) -> f64,
    {
        let rs = self.rs();
        let grid = self.space_grid();
        let lhs: f64 = grid
            .points
            .iter()
            .zip(&grid.weights)
            .map(|(x, w)| f(x).powi(2) * mu_density(rs, x) * w)
            .sum();
        let spec = self.spectrum(&f)?;
        let ctx = self.hyp.c_function();
        let rhs: f64 = spec
            .coordinates()
            .iter()
            .zip(spec.weights())
            .zip(&spec.values)
            .map(|((s, w), v)| {
                let lam: Vec<Complex64> = self.to_space(s).iter().map(|t| Complex64::new(0.0, *t)).collect();
                v.norm_sqr() * ctx.plancherel_density(&lam) * w * self.jacobian * self.weyl_order
            })
            .sum();
        let ratio = rhs / lhs;
        Ok(PlancherelReport { lhs, rhs, ratio, calibrated_ratio: self.cfg.plancherel_constant.map(|k| k * ratio) })
    }

    /// Plancherel sides for sampled space values.
    pub fn plancherel_sampled(&self, f: &SampledFunction) -> Result<PlancherelReport, TransformError> {
        f.validate()?;
        let rs = self.rs();
        let lhs: f64 = f
            .coordinates()
            .iter()
            .zip(f.weights())
            .zip(&f.values)
            .map(|((s, w), v)| v.norm_sqr() * mu_density(rs, &self.to_space(s)) * w * self.jacobian * self.weyl_order)
            .sum();
        let grid = self.spectral_grid();
        let lambdas: Vec<Vec<Complex64>> = grid
            .points
            .iter()
            .map(|t| t.iter().map(|v| Complex64::new(0.0, *v)).collect())
            .collect();
        let spec = self.forward_sampled(f, &lambdas)?;
        let ctx = self.hyp.c_function();
        let rhs: f64 = spec
            .values
            .iter()
            .zip(&lambdas)
            .zip(&grid.weights)
            .map(|((v, l), w)| v.norm_sqr() * ctx.plancherel_density(l) * w)
            .sum();
        let ratio = rhs / lhs;
        Ok(PlancherelReport { lhs, rhs, ratio, calibrated_ratio: self.cfg.plancherel_constant.map(|k| k * ratio) })
    }

    /// Uniform grid of `points` per axis in chamber coordinates covering the given radius,
    /// suited to Simpson weights when `points` is odd.
    pub fn uniform_axes(&self, radius: f64, points: usize) -> Vec<Vec<f64>> {
        let side = self.box_side(radius);
        let axis: Vec<f64> = (0..points).map(|k| side * k as f64 / (points - 1).max(1) as f64).collect();
        vec![axis; self.rs().rank()]
    }

    /// Maps chamber coordinates to `a`.
    pub fn chamber_to_space(&self, s: &[f64]) -> Vec<f64> {
        self.to_space(s)
    }

    /// Reference bump used to fix the Plancherel constant.
    pub fn reference_bump(&self) -> impl Fn(&[f64]) -> f64 + Sync {
        smooth_bump(self.cfg.space_radius / 6.0, self.cfg.space_radius)
    }

    /// `||f0||^2 / int |f0^|^2 |c|^{-2}` for the reference bump.
    pub fn calibrate(&self) -> Result<f64, TransformError> {
        let report = self.plancherel_check(self.reference_bump())?;
        Ok(1.0 / report.ratio)
    }

    /// `|f^(sigma + i s u)|` for `s` in `[0, s_max]`, with `sigma` in the interior of
    /// `C(eps_p rho)`, `eps_p = 2/p - 1`.
    pub fn tube_decay_probe<F>(
        &self,
        f: F,
        sigma: &[f64],
        p: f64,
        direction: &[f64],
        s_max: f64,
        samples: usize,
    ) -> Result<DecayReport, TransformError>
    where
        F: Fn(&[f64]) -> f64,
    {
        let rs = self.rs();
        rs.check_dim(sigma.len()).map_err(HyperError::from)?;
        rs.check_dim(direction.len()).map_err(HyperError::from)?;
        if !(p > 1.0 && p <= 2.0) || samples < 4 || !(s_max > 0.0) {
            return Err(TransformError::Config("need 1 < p <= 2, s_max > 0 and at least 4 samples".into()));
        }
        let eps = 2.0 / p - 1.0;
        let inside = if eps == 0.0 {
            linalg::norm(sigma) < 1e-12
        } else {
            let scaled: Vec<Complex64> = sigma.iter().map(|v| Complex64::new(v / eps, 0.0)).collect();
            rs.hull_slack(&scaled).iter().all(|c| *c > 1e-12)
        };
        if !inside {
            return Err(TransformError::OutsideStrip(p));
        }
        let nu = linalg::norm(direction);
        if nu == 0.0 {
            return Err(TransformError::Config("direction must be nonzero".into()));
        }
        let u: Vec<f64> = direction.iter().map(|v| v / nu).collect();
        let s: Vec<f64> = (0..samples).map(|k| s_max * k as f64 / (samples - 1) as f64).collect();
        let lambdas: Vec<Vec<Complex64>> = s
            .iter()
            .map(|t| sigma.iter().zip(&u).map(|(a, b)| Complex64::new(*a, t * b)).collect())
            .collect();
        let report = self.forward_fn(f, &lambdas)?;
        let magnitudes: Vec<f64> = report.values.iter().map(|v| v.norm()).collect();
        let mut envelope = magnitudes.clone();
        for k in (0..samples - 1).rev() {
            envelope[k] = envelope[k].max(envelope[k + 1]);
        }
        let max = envelope[0];
        let half = samples / 2;
        let pts: Vec<(f64, f64)> = (half..samples)
            .filter(|&k| magnitudes[k] > 0.0)
            .map(|k| (s[k], -magnitudes[k].ln()))
            .collect();
        let decay_rate = if pts.len() >= 2 {
            let n = pts.len() as f64;
            let mx = pts.iter().map(|q| q.0).sum::<f64>() / n;
            let my = pts.iter().map(|q| q.1).sum::<f64>() / n;
            let sxx: f64 = pts.iter().map(|q| (q.0 - mx).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
            if sxx > 0.0 {
                sxy / sxx
            } else {
                0.0
            }
        } else {
            f64::INFINITY
        };
        let decays = envelope[samples - 1] < 1e-3 * max;
        Ok(DecayReport { sigma: sigma.to_vec(), direction: u, s, magnitudes, envelope, decay_rate, max, decays })
    }
}
