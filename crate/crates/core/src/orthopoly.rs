//! Orthonormal Jacobi and Krawtchouk functions and their
//! Christoffel–Darboux kernels.
//!
//! The arrival times at a site are a Jacobi unitary ensemble on `[-1, 1]`
//! with weight `(1-y)^alpha (1+y)^beta`, `alpha = N - n - x + 1`,
//! `beta = x - 1`; the positions at a fixed time are a Krawtchouk ensemble on
//! `{0, .., N + n - 1}`. Both kernels are projections onto the first `n`
//! orthonormal functions. All evaluation runs through the orthonormal
//! three-term recurrence
//!
//! `y p_k = b_{k+1} p_{k+1} + a_k p_k + b_k p_{k-1}`,
//!
//! carried on the weighted functions `phi_k = p_k w^{1/2}` directly.

use libm::lgamma as ln_gamma;

use crate::error::{Error, Result};
use crate::model_line::ModelParams;
use crate::numeric::{det, ln_binomial, Rule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiWeight {
    alpha: f64,
    beta: f64,
}

impl JacobiWeight {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0 && beta > -1.0) {
            return Err(Error::invalid(format!(
                "Jacobi exponents must exceed -1 (alpha={alpha}, beta={beta})"
            )));
        }
        Ok(JacobiWeight { alpha, beta })
    }

    /// The weight of the arrival-time ensemble at `params.site()`.
    pub fn for_params(params: &ModelParams) -> Self {
        let (alpha, beta) = params.jacobi_exponents();
        JacobiWeight {
            alpha: f64::from(alpha),
            beta: f64::from(beta),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `ln w(y)`; `-inf` where the weight vanishes.
    pub fn ln_weight(&self, y: f64) -> f64 {
        let mut l = 0.0;
        if self.alpha != 0.0 {
            l += self.alpha * (1.0 - y).ln();
        }
        if self.beta != 0.0 {
            l += self.beta * (1.0 + y).ln();
        }
        l
    }

    /// `ln int_{-1}^{1} w`.
    pub fn ln_mass(&self) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        (a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
            - ln_gamma(a + b + 2.0)
    }

    /// Orthonormal recurrence coefficients `(a_k, b_k)`; `b_0` is unused and
    /// reported as 0.
    pub fn recurrence(&self, k: usize) -> (f64, f64) {
        let (a, b) = (self.alpha, self.beta);
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let diag = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        let off = if k == 0 {
            0.0
        } else if k == 1 {
            // the general expression has a removable 0/0 at a + b = 0
            (4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))).sqrt()
        } else {
            (4.0 * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
        };
        (diag, off)
    }

    /// `ln h_j`: squared norm of the classical Jacobi polynomial `P_j^{(alpha,beta)}`.
    pub fn ln_classical_norm(&self, j: usize) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        let jf = j as f64;
        (a + b + 1.0) * std::f64::consts::LN_2 - (2.0 * jf + a + b + 1.0).ln()
            + ln_gamma(jf + a + 1.0)
            + ln_gamma(jf + b + 1.0)
            - ln_gamma(jf + 1.0)
            - ln_gamma(jf + a + b + 1.0)
    }

    /// `ln k_j`: leading coefficient of the classical `P_j^{(alpha,beta)}`.
    pub fn ln_classical_leading(&self, j: usize) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        let jf = j as f64;
        ln_gamma(2.0 * jf + a + b + 1.0)
            - jf * std::f64::consts::LN_2
            - ln_gamma(jf + 1.0)
            - ln_gamma(jf + a + b + 1.0)
    }
}

/// The first `n + 1` orthonormal Jacobi functions `phi_0 .. phi_n`, enough
/// for the rank-`n` Christoffel–Darboux kernel.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    weight: JacobiWeight,
    size: usize,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    ln_h0: f64,
    rule: Rule,
}

impl OrthoBasis {
    pub fn new(weight: JacobiWeight, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("basis size must be at least 1"));
        }
        let diag = (0..=size).map(|k| weight.recurrence(k).0).collect();
        let offdiag = (1..=size + 1).map(|k| weight.recurrence(k).1).collect();
        // integrands are polynomial of degree <= 2n + alpha + beta times
        // (for integer exponents) nothing else
        let poly_nodes = ((weight.alpha + weight.beta) / 2.0).ceil() as usize + size + 8;
        let nodes = (4 * size + 50).max(poly_nodes);
        Ok(OrthoBasis {
            weight,
            size,
            diag,
            offdiag,
            ln_h0: weight.ln_mass(),
            rule: Rule::new(nodes),
        })
    }

    /// Basis for the arrival-time ensemble of `params`.
    pub fn for_params(params: &ModelParams) -> Self {
        Self::new(JacobiWeight::for_params(params), params.buses() as usize)
            .expect("model parameters give admissible Jacobi exponents")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weight(&self) -> &JacobiWeight {
        &self.weight
    }

    pub fn quadrature_nodes(&self) -> usize {
        self.rule.len()
    }

    /// `b_k`, the off-diagonal recurrence coefficient (`k >= 1`).
    fn b(&self, k: usize) -> f64 {
        self.offdiag[k - 1]
    }

    /// `ln gamma_j`, the leading coefficient of the orthonormal polynomial
    /// `p_j`, accumulated from the recurrence (`gamma_j = gamma_{j-1} / b_j`).
    pub fn ln_leading_coefficient(&self, j: usize) -> f64 {
        assert!(j <= self.size + 1);
        -0.5 * self.ln_h0 - (1..=j).map(|k| self.b(k).ln()).sum::<f64>()
    }

    /// Constant `l_n = gamma_{n-1} / gamma_n` in front of the
    /// Christoffel–Darboux quotient for `phi_n, phi_{n-1}`.
    pub fn cd_constant(&self) -> f64 {
        self.b(self.size)
    }

    /// The same constant from the classical norms and leading coefficients,
    /// `(k_{n-1} / k_n) sqrt(h_n / h_{n-1})`.
    pub fn cd_constant_classical(&self) -> f64 {
        let (n, w) = (self.size, &self.weight);
        (w.ln_classical_leading(n - 1) - w.ln_classical_leading(n)
            + 0.5 * (w.ln_classical_norm(n) - w.ln_classical_norm(n - 1)))
        .exp()
    }

    fn check_point(y: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&y) {
            return Err(Error::domain(format!("point {y} outside [-1, 1]")));
        }
        Ok(())
    }

    fn phi0(&self, y: f64) -> f64 {
        let l = self.weight.ln_weight(y);
        if l == f64::NEG_INFINITY {
            0.0
        } else {
            (0.5 * (l - self.ln_h0)).exp()
        }
    }

    /// `phi_0(y), .., phi_n(y)`.
    pub fn phi_all(&self, y: f64) -> Result<Vec<f64>> {
        Self::check_point(y)?;
        Ok(self.phi_unchecked(y))
    }

    fn phi_unchecked(&self, y: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.size + 1);
        out.push(self.phi0(y));
        for k in 0..self.size {
            let prev = if k == 0 { 0.0 } else { self.b(k) * out[k - 1] };
            out.push(((y - self.diag[k]) * out[k] - prev) / self.b(k + 1));
        }
        out
    }

    /// Weighted derivatives `p_k'(y) w^{1/2}(y)` alongside `phi_k(y)`.
    fn phi_with_derivative(&self, y: f64) -> (Vec<f64>, Vec<f64>) {
        let phi = self.phi_unchecked(y);
        let mut dphi = Vec::with_capacity(self.size + 1);
        dphi.push(0.0);
        for k in 0..self.size {
            let prev = if k == 0 { 0.0 } else { self.b(k) * dphi[k - 1] };
            dphi.push(((y - self.diag[k]) * dphi[k] + phi[k] - prev) / self.b(k + 1));
        }
        (phi, dphi)
    }

    /// `phi_j(y) = p_j(y) w(y)^{1/2}`.
    pub fn phi_eval(&self, j: usize, y: f64) -> Result<f64> {
        if j > self.size {
            return Err(Error::domain(format!("degree {j} beyond basis size {}", self.size)));
        }
        Ok(self.phi_all(y)?[j])
    }

    /// Christoffel–Darboux kernel
    /// `K(z, z2) = l_n (phi_n(z) phi_{n-1}(z2) - phi_n(z2) phi_{n-1}(z)) / (z - z2)`,
    /// with the derivative limit on the diagonal.
    pub fn cd_kernel(&self, z: f64, z2: f64) -> Result<f64> {
        Self::check_point(z)?;
        Self::check_point(z2)?;
        let n = self.size;
        if z == z2 {
            let (phi, dphi) = self.phi_with_derivative(z);
            return Ok(self.cd_constant() * (dphi[n] * phi[n - 1] - dphi[n - 1] * phi[n]));
        }
        let a = self.phi_unchecked(z);
        let b = self.phi_unchecked(z2);
        if (z - z2).abs() < 1e-6 {
            // quotient loses digits to cancellation this close to the diagonal
            return Ok((0..n).map(|k| a[k] * b[k]).sum());
        }
        Ok(self.cd_constant() * (a[n] * b[n - 1] - b[n] * a[n - 1]) / (z - z2))
    }

    /// `K(y, y) = sum_{k<n} phi_k(y)^2`, the one-point density (integrates to n).
    pub fn kernel_diagonal(&self, y: f64) -> Result<f64> {
        Self::check_point(y)?;
        Ok(self.diagonal_unchecked(y))
    }

    fn diagonal_unchecked(&self, y: f64) -> f64 {
        self.phi_unchecked(y)[..self.size].iter().map(|v| v * v).sum()
    }

    /// Expected number of particles in `[-1, y]`, `int_{-1}^{y} K(u, u) du`.
    pub fn counting_function(&self, y: f64) -> Result<f64> {
        Self::check_point(y)?;
        Ok(self.integrate_diagonal(-1.0, y))
    }

    /// `int_lo^hi K(u, u) du`; exact for integer exponents.
    pub(crate) fn integrate_diagonal(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        self.rule.integrate(lo, hi, |u| self.diagonal_unchecked(u))
    }

    /// Gram matrix `G_{jk} = int_c^d phi_j phi_k` for `j, k < n` (row-major).
    pub fn gram_matrix(&self, c: f64, d: f64) -> Result<Vec<f64>> {
        Self::check_point(c)?;
        Self::check_point(d)?;
        if c > d {
            return Err(Error::domain(format!("inverted interval ({c}, {d})")));
        }
        let n = self.size;
        let mut g = vec![0.0; n * n];
        if c == d {
            return Ok(g);
        }
        let (xs, ws) = self.rule.mapped(c, d);
        for (&x, &w) in xs.iter().zip(&ws) {
            let phi = self.phi_unchecked(x);
            for j in 0..n {
                let wj = w * phi[j];
                for k in j..n {
                    g[j * n + k] += wj * phi[k];
                }
            }
        }
        for j in 0..n {
            for k in 0..j {
                g[j * n + k] = g[k * n + j];
            }
        }
        Ok(g)
    }

    /// Probability that no particle falls in `(c, d)`:
    /// `det(I - K)` on `L^2(c, d)`, reduced to the `n x n` determinant
    /// `det(I - G)` of the Gram matrix above.
    pub fn gap_probability(&self, c: f64, d: f64) -> Result<f64> {
        let n = self.size;
        let mut m = self.gram_matrix(c, d)?;
        for (idx, v) in m.iter_mut().enumerate() {
            *v = if idx % (n + 1) == 0 { 1.0 - *v } else { -*v };
        }
        Ok(det(&m, n).clamp(0.0, 1.0))
    }

    /// `int phi_j phi_k` over `[-1, 1]` for `j, k <= n`, for diagnostics.
    pub fn orthonormality_matrix(&self) -> Vec<f64> {
        let m = self.size + 1;
        let mut g = vec![0.0; m * m];
        let (xs, ws) = self.rule.mapped(-1.0, 1.0);
        for (&x, &w) in xs.iter().zip(&ws) {
            let phi = self.phi_unchecked(x);
            for j in 0..m {
                for k in 0..m {
                    g[j * m + k] += w * phi[j] * phi[k];
                }
            }
        }
        g
    }
}

/// Orthonormal Krawtchouk functions on `{0, .., top}` for the binomial
/// weight `C(top, y) p^y (1-p)^{top-y}`, tabulated at every support point.
#[derive(Debug, Clone)]
pub struct KrawtchoukBasis {
    top: usize,
    p: f64,
    size: usize,
    // row-major (top + 1) x size
    table: Vec<f64>,
}

impl KrawtchoukBasis {
    pub fn new(top: usize, p: f64, size: usize) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("Krawtchouk parameter p must lie in (0, 1), got {p}")));
        }
        if size == 0 || size > top + 1 {
            return Err(Error::invalid(format!(
                "basis size {size} must lie in 1..={}",
                top + 1
            )));
        }
        let mut table = vec![0.0; (top + 1) * size];
        let q = 1.0 - p;
        let diag = |k: usize| k as f64 * q + (top - k) as f64 * p;
        let off = |k: usize| (k as f64 * (top + 1 - k) as f64 * p * q).sqrt();
        for y in 0..=top {
            let row = &mut table[y * size..(y + 1) * size];
            let lw = ln_binomial(top as u64, y as u64) + y as f64 * p.ln() + (top - y) as f64 * q.ln();
            row[0] = (0.5 * lw).exp();
            let yf = y as f64;
            for k in 0..size - 1 {
                let prev = if k == 0 { 0.0 } else { off(k) * row[k - 1] };
                row[k + 1] = ((yf - diag(k)) * row[k] - prev) / off(k + 1);
            }
        }
        Ok(KrawtchoukBasis {
            top,
            p,
            size,
            table,
        })
    }

    /// The position ensemble of `params` at time `t`.
    pub fn for_params(params: &ModelParams, t: f64) -> Result<Self> {
        Self::new(
            params.krawtchouk_top() as usize,
            t / params.horizon(),
            params.buses() as usize,
        )
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `phi_0(y) .. phi_{n-1}(y)`.
    pub fn row(&self, y: usize) -> &[f64] {
        &self.table[y * self.size..(y + 1) * self.size]
    }

    pub fn phi(&self, k: usize, y: usize) -> f64 {
        self.row(y)[k]
    }

    /// Rank-`n` projection kernel `K(x, y) = sum_{k<n} phi_k(x) phi_k(y)`.
    pub fn kernel(&self, x: usize, y: usize) -> f64 {
        self.row(x).iter().zip(self.row(y)).map(|(a, b)| a * b).sum()
    }

    pub fn one_point(&self, y: usize) -> f64 {
        self.kernel(y, y)
    }
}
