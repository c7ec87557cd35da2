//! Equilibrium measure of the arrival-time ensemble and the unfolding map.
//!
//! With `n / N -> nu` and `(x - 1) / N -> eta`, the arrival points (in
//! `y = 2t/T - 1`) fill `[a, b]` with probability density
//!
//! `psi(y) = eta sqrt((y - a)(b - y)) / (nu pi sqrt((1 + a)(1 + b)) (1 - y^2))`,
//!
//! and the endpoints obey
//!
//! `eta / sqrt((1+a)(1+b)) = (1 - nu - eta) / sqrt((1-a)(1-b))`,
//! `1 + nu = eta / sqrt((1+a)(1+b)) + (1 - nu - eta) / sqrt((1-a)(1-b))`.
//!
//! The solver imposes the first relation together with unit mass of `psi`;
//! the second relation and the closed form that the pair implies are kept
//! as independent checks.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model_line::ModelParams;
use crate::numeric::Rule;
use crate::orthopoly::OrthoBasis;

const MASS_NODES: usize = 200;

#[derive(Debug, Clone)]
pub struct EquilibriumData {
    nu: f64,
    eta: f64,
    a: f64,
    b: f64,
    rule: Rule,
}

fn check_nu_eta(nu: f64, eta: f64) -> Result<()> {
    if !(nu > 0.0 && eta > 0.0 && nu + eta < 1.0) {
        return Err(Error::domain(format!(
            "need 0 < nu, 0 < eta, nu + eta < 1 (nu={nu}, eta={eta})"
        )));
    }
    Ok(())
}

/// Endpoints implied by the two endpoint relations: with
/// `u = sqrt((1+a)(1+b))`, `v = sqrt((1-a)(1-b))` they give
/// `u = 2 eta / (1 + nu)`, `v = 2 (1 - nu - eta) / (1 + nu)`, hence
/// `a + b = (u^2 - v^2) / 2` and `ab = (u^2 + v^2) / 2 - 1`.
pub fn endpoints_closed_form(nu: f64, eta: f64) -> Result<(f64, f64)> {
    check_nu_eta(nu, eta)?;
    let u = 2.0 * eta / (1.0 + nu);
    let v = 2.0 * (1.0 - nu - eta) / (1.0 + nu);
    let sum = 0.5 * (u * u - v * v);
    let prod = 0.5 * (u * u + v * v) - 1.0;
    let disc = sum * sum - 4.0 * prod;
    if disc <= 0.0 {
        return Err(Error::domain("endpoint relations have no real solution"));
    }
    let d = disc.sqrt();
    Ok((0.5 * (sum - d), 0.5 * (sum + d)))
}

/// The symmetric case `eta = (1 - nu) / 2`: `b = -a = sqrt(1 - ((1-nu)/(1+nu))^2)`.
pub fn symmetric_endpoint(nu: f64) -> f64 {
    let r = (1.0 - nu) / (1.0 + nu);
    (1.0 - r * r).sqrt()
}

/// Residuals `(lhs - rhs)` of the two printed endpoint relations.
pub fn endpoint_relation_residuals(nu: f64, eta: f64, a: f64, b: f64) -> (f64, f64) {
    let u = ((1.0 + a) * (1.0 + b)).sqrt();
    let v = ((1.0 - a) * (1.0 - b)).sqrt();
    let first = eta / u + (eta + nu - 1.0) / v;
    let second = (1.0 + nu) - (eta / u - (eta + nu - 1.0) / v);
    (first, second)
}

fn density_at(nu: f64, eta: f64, a: f64, b: f64, y: f64) -> f64 {
    if y <= a || y >= b {
        return 0.0;
    }
    eta * ((y - a) * (b - y)).sqrt() / (nu * PI * ((1.0 + a) * (1.0 + b)).sqrt() * (1.0 - y * y))
}

/// `int_a^y psi` with `y = a + (b - a) sin^2 theta`, which turns the
/// square-root edge into a smooth integrand.
fn cdf_at(rule: &Rule, nu: f64, eta: f64, a: f64, b: f64, y: f64) -> f64 {
    if y <= a {
        return 0.0;
    }
    let theta_max = if y >= b {
        0.5 * PI
    } else {
        ((y - a) / (b - a)).sqrt().asin()
    };
    let scale = eta / (nu * PI * ((1.0 + a) * (1.0 + b)).sqrt());
    let w = b - a;
    rule.integrate(0.0, theta_max, |th| {
        let (s, c) = th.sin_cos();
        let x = a + w * s * s;
        // sqrt((x-a)(b-x)) dx = 2 w^2 s^2 c^2 dtheta
        scale * 2.0 * w * w * s * s * c * c / (1.0 - x * x)
    })
}

/// Solves for the support `[a, b]`: damped Newton in `(atanh a, atanh b)` on
/// the first endpoint relation and unit mass of `psi`.
pub fn solve_endpoints(nu: f64, eta: f64) -> Result<(f64, f64)> {
    check_nu_eta(nu, eta)?;
    let rule = Rule::new(MASS_NODES);
    let residual = |p: [f64; 2]| -> Option<[f64; 2]> {
        let (a, b) = (p[0].tanh(), p[1].tanh());
        if !(a < b) || a <= -1.0 || b >= 1.0 {
            return None;
        }
        let (first, _) = endpoint_relation_residuals(nu, eta, a, b);
        Some([first, cdf_at(&rule, nu, eta, a, b, b) - 1.0])
    };
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    // centre the initial interval at the mass-weighted guess 2 eta/(1-nu) - 1
    let c0 = (2.0 * eta / (1.0 - nu) - 1.0).clamp(-0.9, 0.9);
    let starts = [(c0, 0.5), (c0, 0.2), (0.0, 0.8), (c0, 0.05)];
    for &(centre, half) in &starts {
        let lo = (centre - half).max(-0.99);
        let hi = (centre + half).min(0.99);
        let mut p = [lo.atanh(), hi.atanh()];
        let Some(mut r) = residual(p) else { continue };
        for _ in 0..100 {
            if norm(r) < 1e-14 {
                let (a, b) = (p[0].tanh(), p[1].tanh());
                if a > -1.0 && b < 1.0 {
                    return Ok((a, b));
                }
            }
            let h = 1e-7;
            let mut jac = [[0.0; 2]; 2];
            let mut ok = true;
            for k in 0..2 {
                let mut q = p;
                q[k] += h;
                match residual(q) {
                    Some(rq) => {
                        jac[0][k] = (rq[0] - r[0]) / h;
                        jac[1][k] = (rq[1] - r[1]) / h;
                    }
                    None => ok = false,
                }
            }
            if !ok {
                break;
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let dx = [
                (jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
                (jac[0][0] * r[1] - jac[1][0] * r[0]) / det,
            ];
            let mut step = 1.0;
            let mut improved = false;
            while step > 1e-6 {
                let q = [p[0] - step * dx[0], p[1] - step * dx[1]];
                if let Some(rq) = residual(q) {
                    if norm(rq) < norm(r) {
                        p = q;
                        r = rq;
                        improved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !improved {
                if norm(r) < 1e-12 {
                    return Ok((p[0].tanh(), p[1].tanh()));
                }
                break;
            }
        }
    }
    Err(Error::domain(format!(
        "no admissible endpoints in (-1, 1) for nu={nu}, eta={eta}"
    )))
}

impl EquilibriumData {
    pub fn new(nu: f64, eta: f64) -> Result<Self> {
        let (a, b) = solve_endpoints(nu, eta)?;
        Ok(EquilibriumData {
            nu,
            eta,
            a,
            b,
            rule: Rule::new(MASS_NODES),
        })
    }

    /// Limits for a finite model: `nu = n / N`, `eta = (x - 1) / N`.
    pub fn for_params(params: &ModelParams) -> Result<Self> {
        let big_n = f64::from(params.route_len());
        Self::new(
            f64::from(params.buses()) / big_n,
            f64::from(params.site() - 1) / big_n,
        )
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// `psi(y)`; zero outside `[a, b]`.
    pub fn density(&self, y: f64) -> Result<f64> {
        if !(y.abs() < 1.0) {
            return Err(Error::domain(format!("density needs |y| < 1, got {y}")));
        }
        Ok(density_at(self.nu, self.eta, self.a, self.b, y))
    }

    /// `int_{-1}^{y} psi`.
    pub fn cdf(&self, y: f64) -> f64 {
        cdf_at(&self.rule, self.nu, self.eta, self.a, self.b, y)
    }

    /// `int psi`, by quadrature.
    pub fn mass(&self) -> f64 {
        self.cdf(self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnfoldMode {
    /// `u = int_{-1}^{y} K_{N,n,x}(s, s) ds` from the exact finite-`n` kernel.
    #[default]
    ExactFiniteN,
    /// `u = n int_{-1}^{y} psi`.
    Equilibrium,
}

impl std::str::FromStr for UnfoldMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "exact-finite-n" => Ok(UnfoldMode::ExactFiniteN),
            "equilibrium" => Ok(UnfoldMode::Equilibrium),
            other => Err(Error::Config(format!("unknown unfolding mode `{other}`"))),
        }
    }
}

/// Maps arrival points `y in [-1, 1]` to a scale of unit mean density.
#[derive(Debug, Clone)]
pub enum Unfolder {
    Exact(OrthoBasis),
    Equilibrium { n: f64, eq: EquilibriumData },
}

impl Unfolder {
    pub fn new(params: &ModelParams, mode: UnfoldMode) -> Result<Self> {
        Ok(match mode {
            UnfoldMode::ExactFiniteN => Unfolder::Exact(OrthoBasis::for_params(params)),
            UnfoldMode::Equilibrium => Unfolder::Equilibrium {
                n: f64::from(params.buses()),
                eq: EquilibriumData::for_params(params)?,
            },
        })
    }

    /// Unfolded coordinate of a single point.
    pub fn map(&self, y: f64) -> Result<f64> {
        match self {
            Unfolder::Exact(basis) => basis.counting_function(y),
            Unfolder::Equilibrium { n, eq } => {
                if !(-1.0..=1.0).contains(&y) {
                    return Err(Error::domain(format!("point {y} outside [-1, 1]")));
                }
                Ok(n * eq.cdf(y))
            }
        }
    }

    /// Unfolds a sorted list of points. The exact map is strictly
    /// increasing on `(-1, 1)`; the equilibrium map is flat outside `[a, b]`.
    pub fn unfold(&self, points: &[f64]) -> Result<Vec<f64>> {
        if points.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::domain("points to unfold must be sorted"));
        }
        match self {
            Unfolder::Exact(basis) => {
                // accumulate over consecutive gaps
                let mut out = Vec::with_capacity(points.len());
                let mut prev = -1.0;
                let mut acc = 0.0;
                for &y in points {
                    if !(-1.0..=1.0).contains(&y) {
                        return Err(Error::domain(format!("point {y} outside [-1, 1]")));
                    }
                    acc += basis.integrate_diagonal(prev, y);
                    prev = y;
                    out.push(acc);
                }
                Ok(out)
            }
            Unfolder::Equilibrium { .. } => points.iter().map(|&y| self.map(y)).collect(),
        }
    }
}
