//! Independent reference values: Gauss hypergeometric sums, rank-one Jacobi
//! functions, closed forms for even multiplicity two, brute-force hull
//! membership and finite-difference derivatives.
//!
//! Nothing here calls into the series or contour machinery.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg;
use crate::rootsys::RootSystem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("argument z = {0} outside the supported range [-999, 0]")]
    Domain(f64),
    #[error("c = {0} is a nonpositive integer")]
    BadDenominator(Complex64),
    #[error("series did not converge after {0} terms")]
    NoConvergence(usize),
    #[error("closed form needs a reduced system with every multiplicity equal to 2")]
    NotComplexCase,
}

const MAX_TERMS: usize = 5_000_000;

fn series_2f1(a: Complex64, b: Complex64, c: Complex64, w: f64) -> Result<Complex64, OracleError> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut small = 0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * w;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            small += 1;
            if small > 4 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
        if term.norm() == 0.0 {
            return Ok(sum);
        }
    }
    Err(OracleError::NoConvergence(MAX_TERMS))
}

/// `2F1(a, b; c; z)` for real `-999 <= z <= 0` via a Pfaff transformation
/// to `w = z/(z-1)` in `[0, 0.999]` followed by direct summation.
pub fn gauss_2f1(a: Complex64, b: Complex64, c: Complex64, z: f64) -> Result<Complex64, OracleError> {
    if !(z <= 0.0 && z >= -999.0) {
        return Err(OracleError::Domain(z));
    }
    let cr = c.re.round();
    if cr <= 0.0 && (c - cr).norm() < 1e-14 {
        return Err(OracleError::BadDenominator(c));
    }
    if z == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let w = z / (z - 1.0);
    let one_minus_z = Complex64::new(1.0 - z, 0.0);
    // Use the variant whose transformed terms decay fastest in k.
    if (a - b).re >= 0.0 {
        Ok(one_minus_z.powc(-b) * series_2f1(b, c - a, c, w)?)
    } else {
        Ok(one_minus_z.powc(-a) * series_2f1(a, c - b, c, w)?)
    }
}

/// Rank-one multiplicity parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiParams {
    pub m_short: f64,
    pub m_double: f64,
}

impl JacobiParams {
    pub fn new(m_short: f64, m_double: f64) -> Self {
        Self { m_short, m_double }
    }

    pub fn rho(&self) -> f64 {
        self.m_short / 2.0 + self.m_double
    }
}

/// Spherical Jacobi function of the first kind.
pub fn jacobi_phi_first(p: JacobiParams, lambda: Complex64, t: f64) -> Result<Complex64, OracleError> {
    let rho = p.rho();
    let a = (lambda + rho) / 2.0;
    let b = (-lambda + rho) / 2.0;
    let c = Complex64::new((p.m_short + p.m_double + 1.0) / 2.0, 0.0);
    gauss_2f1(a, b, c, -t.sinh().powi(2))
}

/// Jacobi function of the second kind, asymptotic to `e^{(lambda-rho)t}`.
pub fn jacobi_phi_second(p: JacobiParams, lambda: Complex64, t: f64) -> Result<Complex64, OracleError> {
    let rho = p.rho();
    let a = (Complex64::new(rho, 0.0) - lambda) / 2.0;
    let b = (Complex64::new(-p.m_short / 2.0 + 1.0, 0.0) - lambda) / 2.0;
    let c = Complex64::new(1.0, 0.0) - lambda;
    let s = t.sinh();
    let pref = Complex64::new(2.0 * s, 0.0).powc(lambda - rho);
    Ok(pref * gauss_2f1(a, b, c, -1.0 / (s * s))?)
}

fn require_complex_case(rs: &RootSystem) -> Result<(), OracleError> {
    let ok = rs.positive_roots().iter().all(|r| r.indivisible && (r.multiplicity - 2.0).abs() < 1e-15);
    if ok {
        Ok(())
    } else {
        Err(OracleError::NotComplexCase)
    }
}

/// Direction with no small pairing against any root, used for l'Hopital limits.
fn oblique_direction(rs: &RootSystem) -> Vec<f64> {
    let n = rs.rank();
    let mut best = vec![0.0; n];
    let mut best_score = -1.0;
    for trial in 0..64u32 {
        let v: Vec<f64> = (0..n)
            .map(|k| {
                let s = ((trial as f64 + 1.0) * 0.618_033_988_749_895 * (k as f64 + 1.3)).fract();
                s - 0.3 + 0.1 * k as f64
            })
            .collect();
        let nv = linalg::norm(&v);
        let score = rs
            .positive_roots()
            .iter()
            .map(|r| (r.eval(&v) / (nv * r.norm2.sqrt())).abs())
            .fold(f64::INFINITY, f64::min);
        if score > best_score {
            best_score = score;
            best = v;
        }
    }
    best
}

/// Closed form `pi(rho)/pi(lambda) * sum_w det(w) e^{w lambda(x)} / Delta(x)` for all
/// multiplicities equal to 2; on `pi(lambda) = 0` the limit is taken exactly by
/// differentiating numerator and denominator along a fixed oblique line.
pub fn complex_case_phi(rs: &RootSystem, lambda: &[Complex64], x: &[f64]) -> Result<Complex64, OracleError> {
    require_complex_case(rs)?;
    let scale = 1.0 + lambda.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pairings: Vec<Complex64> = rs.positive_roots().iter().map(|r| r.pair(lambda)).collect();
    let vanishing: Vec<bool> = pairings.iter().map(|p| p.norm() < 1e-12 * scale).collect();
    let order = vanishing.iter().filter(|v| **v).count() as i32;
    let nu = oblique_direction(rs);
    let pi_rho: f64 = rs.positive_roots().iter().map(|r| r.eval(rs.rho())).product();
    let delta: f64 = rs
        .positive_roots()
        .iter()
        .map(|r| {
            let a = r.eval(x);
            a.exp() - (-a).exp()
        })
        .product();
    let mut numer = Complex64::new(0.0, 0.0);
    for w in rs.weyl_group() {
        // <w lambda, x> = <lambda, w^{-1} x>; w is orthogonal so apply the transpose.
        let n = rs.rank();
        let winv_x: Vec<f64> = (0..n).map(|j| (0..n).map(|i| w.matrix[i * n + j] * x[i]).sum()).collect();
        let lx: Complex64 = lambda.iter().zip(&winv_x).map(|(l, v)| l * v).sum();
        let nux = linalg::dot(&nu, &winv_x);
        numer += lx.exp() * nux.powi(order) * w.det as f64;
    }
    let mut denom = Complex64::new(1.0, 0.0);
    for (r, (p, v)) in rs.positive_roots().iter().zip(pairings.iter().zip(&vanishing)) {
        denom *= if *v { Complex64::new(r.eval(&nu), 0.0) } else { *p };
    }
    let fact: f64 = (1..=order).map(|k| k as f64).product();
    Ok(numer / (denom * fact) * pi_rho / delta)
}

/// Convex-hull membership of `mu` in the hull of the Weyl orbit of `rho`, by
/// trying every simplex spanned by orbit points.
#[derive(Debug, Clone)]
pub struct HullOracle {
    rank: usize,
    simplices: Vec<Vec<f64>>,
}

impl HullOracle {
    pub fn new(rs: &RootSystem) -> Self {
        let n = rs.rank();
        let mut verts: Vec<Vec<f64>> = Vec::new();
        for w in rs.weyl_group() {
            let v = w.apply(rs.rho());
            if !verts.iter().any(|u| u.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-9)) {
                verts.push(v);
            }
        }
        let mut simplices = Vec::new();
        let mut chosen = Vec::with_capacity(n + 1);
        choose(verts.len(), n + 1, 0, &mut chosen, &mut |idx| {
            let d = n + 1;
            let mut m = vec![0.0; d * d];
            for (col, &vi) in idx.iter().enumerate() {
                for row in 0..n {
                    m[row * d + col] = verts[vi][row];
                }
                m[n * d + col] = 1.0;
            }
            if linalg::determinant(&m, d).abs() > 1e-9 {
                if let Some(inv) = linalg::inverse(&m, d) {
                    simplices.push(inv);
                }
            }
        });
        Self { rank: n, simplices }
    }

    pub fn contains(&self, mu: &[f64], tol: f64) -> bool {
        let d = self.rank + 1;
        let mut rhs = mu.to_vec();
        rhs.push(1.0);
        self.simplices.iter().any(|inv| {
            (0..d).all(|i| linalg::dot(&inv[i * d..(i + 1) * d], &rhs) >= -tol)
        })
    }
}

fn choose(n: usize, k: usize, start: usize, buf: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if buf.len() == k {
        f(buf);
        return;
    }
    for i in start..n {
        if n - i < k - buf.len() {
            break;
        }
        buf.push(i);
        choose(n, k, i + 1, buf, f);
        buf.pop();
    }
}

pub fn hull_membership_bruteforce(rs: &RootSystem, mu: &[f64]) -> bool {
    HullOracle::new(rs).contains(mu, 1e-9)
}

/// Mixed first-order derivative `D_{v_1} ... D_{v_k} f(lambda0)` by nested central differences.
pub fn derivative_bruteforce<F>(f: F, lambda0: &[Complex64], directions: &[Vec<f64>], h: f64) -> Complex64
where
    F: Fn(&[Complex64]) -> Complex64,
{
    let k = directions.len();
    let mut total = Complex64::new(0.0, 0.0);
    for mask in 0..(1u32 << k) {
        let mut point = lambda0.to_vec();
        let mut sign = 1.0;
        for (j, d) in directions.iter().enumerate() {
            let s = if mask & (1 << j) != 0 { 1.0 } else { -1.0 };
            if s < 0.0 {
                sign = -sign;
            }
            for (p, v) in point.iter_mut().zip(d) {
                *p += s * h * v;
            }
        }
        total += f(&point) * sign;
    }
    total / (2.0 * h).powi(k as i32)
}
