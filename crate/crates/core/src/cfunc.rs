//! Complex log-gamma, the Harish-Chandra c-function and the Plancherel density.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::rootsys::RootSystem;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Distance below which an argument counts as sitting exactly on a gamma pole.
const POLE_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CFunctionError {
    #[error("c-function has a pole at the requested point")]
    Pole(PoleDescriptor),
    #[error("log-gamma evaluated at a pole z = {0}")]
    GammaPole(Complex64),
}

fn lanczos(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += *c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Complex64::new(0.5 * (2.0 * PI).ln(), 0.0) + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Nearest nonpositive integer to `z` when `z` lies on a gamma pole.
fn gamma_pole_index(z: Complex64) -> Option<u64> {
    let r = z.re.round();
    if r <= 0.0 && (z - r).norm() < POLE_TOL * (1.0 + r.abs()) {
        Some((-r) as u64)
    } else {
        None
    }
}

/// `log Gamma(z)`. Lanczos approximation for `Re z >= 1/2`, upward recurrence
/// below that, and reflection only far into the left half plane.
pub fn log_gamma(z: Complex64) -> Result<Complex64, CFunctionError> {
    if gamma_pole_index(z).is_some() {
        return Err(CFunctionError::GammaPole(z));
    }
    if z.re >= 0.5 {
        return Ok(lanczos(z));
    }
    if z.re > -40.0 {
        let n = (0.5 - z.re).ceil() as usize;
        let mut acc = lanczos(z + n as f64);
        for k in 0..n {
            acc -= (z + k as f64).ln();
        }
        return Ok(acc);
    }
    let s = (Complex64::new(PI, 0.0) * z).sin();
    Ok(Complex64::new(PI.ln(), 0.0) - s.ln() - lanczos(1.0 - z))
}

pub fn gamma(z: Complex64) -> Result<Complex64, CFunctionError> {
    log_gamma(z).map(|l| l.exp())
}

/// `1 / Gamma(z)`, entire.
pub fn rgamma(z: Complex64) -> Complex64 {
    match log_gamma(z) {
        Ok(l) => (-l).exp(),
        Err(_) => Complex64::new(0.0, 0.0),
    }
}

/// Hyperplane `lambda_alpha = level` for an indivisible positive root.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperplaneDescriptor {
    pub root: usize,
    pub level: f64,
    pub kind: HyperplaneKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HyperplaneKind {
    Pole,
    Zero,
}

/// Pole of `c` at a point on `lambda_alpha = -n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleDescriptor {
    pub hyperplanes: Vec<HyperplaneDescriptor>,
    /// Limit of `(lambda_alpha + n) c(lambda)` when the pole is simple and isolated.
    pub residue: Option<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CValue {
    Finite(Complex64),
    Pole(PoleDescriptor),
}

#[derive(Debug, Clone)]
struct CRoot {
    index: usize,
    vector: Vec<f64>,
    norm2: f64,
    /// `m_alpha/4 + 1/2`
    shift_a: f64,
    /// `m_alpha/4 + m_{2 alpha}/2`
    shift_b: f64,
}

/// Per-root parameters and the normalizing constant.
#[derive(Debug, Clone)]
pub struct CFunctionContext {
    roots: Vec<CRoot>,
    log_c_hc: Complex64,
}

/// Factor of one root: `coeff * eps^order` along a line crossing the point.
struct Factor {
    log: Complex64,
    order: i32,
    pole_level: Option<u64>,
}

impl CFunctionContext {
    pub fn new(rs: &RootSystem) -> Self {
        let roots: Vec<CRoot> = rs
            .positive_roots()
            .iter()
            .enumerate()
            .filter(|(_, r)| r.indivisible)
            .map(|(index, r)| {
                let m2 = rs.double_multiplicity(r);
                CRoot {
                    index,
                    vector: r.vector.clone(),
                    norm2: r.norm2,
                    shift_a: r.multiplicity / 4.0 + 0.5,
                    shift_b: r.multiplicity / 4.0 + m2 / 2.0,
                }
            })
            .collect();
        let mut ctx = Self { roots, log_c_hc: Complex64::new(0.0, 0.0) };
        let rho = rs.rho_complex();
        let mut log_rho = Complex64::new(0.0, 0.0);
        for r in &ctx.roots {
            log_rho += ctx.factor(r, &rho).log;
        }
        ctx.log_c_hc = -log_rho;
        ctx
    }

    pub fn log_c_hc(&self) -> Complex64 {
        self.log_c_hc
    }

    fn lambda_alpha(r: &CRoot, lambda: &[Complex64]) -> Complex64 {
        lambda.iter().zip(&r.vector).map(|(l, a)| l * a).sum::<Complex64>() / r.norm2
    }

    /// Log of the factor with poles and zeros split off as powers of a common
    /// parameter `eps` along `lambda_alpha = s0 + eps`.
    fn factor(&self, r: &CRoot, lambda: &[Complex64]) -> Factor {
        let s = Self::lambda_alpha(r, lambda);
        let a = s / 2.0 + r.shift_a;
        let b = s / 2.0 + r.shift_b;
        let mut log = -s * LN_2;
        let mut order = 0;
        let mut pole_level = None;
        match gamma_pole_index(s) {
            Some(n) => {
                // Gamma(-n + eps) ~ (-1)^n / (n! eps)
                log += Complex64::new(sign(n) / factorial(n), 0.0).ln();
                order -= 1;
                pole_level = Some(n);
            }
            None => log += log_gamma(s).expect("checked"),
        }
        for arg in [a, b] {
            match gamma_pole_index(arg) {
                Some(k) => {
                    // 1/Gamma(-k + eps/2) ~ (-1)^k k! eps / 2
                    log += Complex64::new(sign(k) * factorial(k) * 0.5, 0.0).ln();
                    order += 1;
                }
                None => log -= log_gamma(arg).expect("checked"),
            }
        }
        Factor { log, order, pole_level }
    }

    /// `c_alpha(lambda)` for the indivisible root with position `root` in the context.
    pub fn c_alpha(&self, root: usize, lambda: &[Complex64]) -> CValue {
        let r = &self.roots[root];
        let f = self.factor(r, lambda);
        if f.order < 0 {
            CValue::Pole(PoleDescriptor {
                hyperplanes: vec![HyperplaneDescriptor {
                    root: r.index,
                    level: -(f.pole_level.unwrap_or(0) as f64),
                    kind: HyperplaneKind::Pole,
                }],
                residue: Some(f.log.exp()),
            })
        } else if f.order > 0 {
            CValue::Finite(Complex64::new(0.0, 0.0))
        } else {
            CValue::Finite(f.log.exp())
        }
    }

    /// Full c-function, normalized by `c(rho) = 1`.
    pub fn eval(&self, lambda: &[Complex64]) -> CValue {
        let mut total = self.log_c_hc;
        let mut pole_planes = Vec::new();
        let mut zeros = 0;
        let mut poles = 0;
        for r in &self.roots {
            let f = self.factor(r, lambda);
            total += f.log;
            if f.order < 0 {
                poles += 1;
                pole_planes.push(HyperplaneDescriptor {
                    root: r.index,
                    level: -(f.pole_level.unwrap_or(0) as f64),
                    kind: HyperplaneKind::Pole,
                });
            } else if f.order > 0 {
                zeros += f.order;
            }
        }
        if poles == 0 {
            if zeros > 0 {
                return CValue::Finite(Complex64::new(0.0, 0.0));
            }
            return CValue::Finite(total.exp());
        }
        let residue = (poles == 1 && zeros == 0).then_some(total.exp());
        if zeros >= poles && residue.is_none() {
            // Direction-dependent limit at an intersection; report the pole structure.
            return CValue::Pole(PoleDescriptor { hyperplanes: pole_planes, residue: None });
        }
        CValue::Pole(PoleDescriptor { hyperplanes: pole_planes, residue })
    }

    pub fn value(&self, lambda: &[Complex64]) -> Result<Complex64, CFunctionError> {
        match self.eval(lambda) {
            CValue::Finite(v) => Ok(v),
            CValue::Pole(p) => Err(CFunctionError::Pole(p)),
        }
    }

    /// `1 / c(lambda)`; zero on poles of `c`, infinite on its zeros.
    pub fn inverse(&self, lambda: &[Complex64]) -> Complex64 {
        let mut log = -self.log_c_hc;
        let mut order = 0;
        for r in &self.roots {
            let f = self.factor(r, lambda);
            log -= f.log;
            order += f.order;
        }
        match order {
            0 => log.exp(),
            o if o < 0 => Complex64::new(0.0, 0.0),
            _ => Complex64::new(f64::INFINITY, 0.0),
        }
    }

    /// `|c(lambda)|^{-2}`; finite on `i a*` including the origin.
    pub fn plancherel_density(&self, lambda: &[Complex64]) -> f64 {
        self.inverse(lambda).norm_sqr()
    }

    /// Hyperplanes `lambda_alpha = -n` (poles) and the zero hyperplanes of `c`
    /// whose distance to `lambda0` (in the `lambda_alpha` coordinate) is below `radius`.
    pub fn singular_hyperplanes_near(&self, lambda0: &[Complex64], radius: f64) -> Vec<HyperplaneDescriptor> {
        let mut out = Vec::new();
        for r in &self.roots {
            let s = Self::lambda_alpha(r, lambda0);
            let lo = (s.re - radius).floor() as i64;
            let hi = (s.re + radius).ceil() as i64;
            for n in lo..=hi {
                if n <= 0 {
                    let d = (s - n as f64).norm();
                    if d <= radius {
                        out.push(HyperplaneDescriptor { root: r.index, level: n as f64, kind: HyperplaneKind::Pole });
                    }
                }
            }
            for shift in [r.shift_a, r.shift_b] {
                // s/2 + shift = -k  <=>  s = -2k - 2 shift
                let kmin = ((-(s.re + radius) / 2.0 - shift).floor()).max(0.0) as i64;
                let kmax = (-(s.re - radius) / 2.0 - shift).ceil() as i64;
                for k in kmin..=kmax.max(kmin - 1) {
                    let level = -2.0 * k as f64 - 2.0 * shift;
                    if (s - level).norm() <= radius {
                        out.push(HyperplaneDescriptor { root: r.index, level, kind: HyperplaneKind::Zero });
                    }
                }
            }
        }
        out
    }

    pub fn root_count(&self) -> usize {
        self.roots.len()
    }
}

fn sign(n: u64) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn factorial(n: u64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
