//! Gauss-Jacobi rules and the orthonormal Jacobi basis of the trigonometric
//! comparison operator.
//!
//! With `y = cos(2rx)` the trigonometric weight `sin^{2g0}(rx) cos^{2g1}(rx)`
//! on `[0, pi/2r]` becomes, up to a constant, the Jacobi weight
//! `(1-y)^a (1+y)^b` with `a = g0 - 1/2`, `b = g1 - 1/2`. All rules here are
//! built once in `y` and mapped to `x`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
#[allow(unused_imports)] // float methods without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::sym_eigen;

/// Three-term recurrence of the orthonormal Jacobi polynomials
/// `sqrt(b_{k+1}) p_{k+1} = (y - a_k) p_k - sqrt(b_k) p_{k-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiRecurrence {
    a: f64,
    b: f64,
    diag: Vec<f64>,
    /// `sqrt(beta_k)`, index `k - 1` for `k >= 1`.
    off: Vec<f64>,
    mu0: f64,
}

impl JacobiRecurrence {
    /// Coefficients for degrees `0..=n`.
    pub fn new(n: usize, a: f64, b: f64) -> Result<Self> {
        if !(a > -1.0 && b > -1.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Domain(format!(
                "Jacobi weight (1-y)^{a} (1+y)^{b} is not integrable"
            )));
        }
        let ab = a + b;
        let mut diag = Vec::with_capacity(n + 1);
        let mut off = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let kk = k as f64;
            let s = 2.0 * kk + ab;
            let d = if k == 0 {
                (b - a) / (ab + 2.0)
            } else {
                (b * b - a * a) / (s * (s + 2.0))
            };
            diag.push(d);
            let kk = (k + 1) as f64;
            let s = 2.0 * kk + ab;
            let beta = if k == 0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * kk * (kk + a) * (kk + b) * (kk + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            off.push(beta.sqrt());
        }
        let mu0 = ((ab + 1.0) * 2f64.ln() + libm::lgamma(a + 1.0) + libm::lgamma(b + 1.0)
            - libm::lgamma(ab + 2.0))
        .exp();
        Ok(Self {
            a,
            b,
            diag,
            off,
            mu0,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `int_{-1}^{1} (1-y)^a (1+y)^b dy`.
    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn max_degree(&self) -> usize {
        self.diag.len() - 1
    }

    /// Values `p_0(y), ..., p_{count-1}(y)` written into `out`.
    pub fn eval_into(&self, y: f64, out: &mut [f64]) {
        let count = out.len();
        assert!(count <= self.diag.len(), "degree beyond precomputed recurrence");
        if count == 0 {
            return;
        }
        out[0] = 1.0 / self.mu0.sqrt();
        if count > 1 {
            out[1] = (y - self.diag[0]) * out[0] / self.off[0];
        }
        for k in 1..count.saturating_sub(1) {
            out[k + 1] = ((y - self.diag[k]) * out[k] - self.off[k - 1] * out[k - 1]) / self.off[k];
        }
    }

    pub fn eval(&self, y: f64, count: usize) -> Vec<f64> {
        let mut out = vec![0.0; count];
        self.eval_into(y, &mut out);
        out
    }

    /// `p_n(y)` and `p_n'(y)`.
    fn value_and_derivative(&self, n: usize, y: f64) -> (f64, f64) {
        let mut p_prev = 0.0;
        let mut p = 1.0 / self.mu0.sqrt();
        let mut d_prev = 0.0;
        let mut d = 0.0;
        for k in 0..n {
            let back = if k == 0 { 0.0 } else { self.off[k - 1] };
            let p_next = ((y - self.diag[k]) * p - back * p_prev) / self.off[k];
            let d_next = (p + (y - self.diag[k]) * d - back * d_prev) / self.off[k];
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
        }
        (p, d)
    }
}

/// Gauss-Jacobi rule in `y` on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

/// `n`-point Gauss rule for `(1-y)^a (1+y)^b`, exact through degree `2n - 1`.
///
/// Golub-Welsch for the initial nodes, then a Newton polish on `p_n` and
/// Christoffel weights `1 / sum_k p_k(y_i)^2`, which keeps the small
/// endpoint weights accurate to full relative precision.
pub fn jacobi_rule(n: usize, a: f64, b: f64) -> Result<JacobiRule> {
    if n == 0 {
        return Err(Error::Domain("quadrature needs at least one node".into()));
    }
    let rec = JacobiRecurrence::new(n, a, b)?;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jac[(k, k)] = rec.diag[k];
        if k + 1 < n {
            jac[(k, k + 1)] = rec.off[k];
            jac[(k + 1, k)] = rec.off[k];
        }
    }
    let (mut nodes, _) = sym_eigen(jac);
    let mut buf = vec![0.0; n];
    let mut weights = Vec::with_capacity(n);
    for y in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, d) = rec.value_and_derivative(n, *y);
            if d == 0.0 {
                break;
            }
            let step = p / d;
            *y = (*y - step).clamp(-1.0, 1.0);
            if step.abs() < 1e-17 {
                break;
            }
        }
        rec.eval_into(*y, &mut buf);
        weights.push(1.0 / buf.iter().map(|v| v * v).sum::<f64>());
    }
    Ok(JacobiRule {
        nodes,
        weights,
        a,
        b,
    })
}

impl JacobiRule {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(|(&y, &w)| w * f(y))
            .sum()
    }
}

/// Rule on `[0, pi/2r]` for `int sin^{2g0}(rx) cos^{2g1}(rx) f(x) dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// Ascending, strictly inside `(0, pi/2r)`.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `cos(2 r x_i)`, kept to avoid recomputing the map.
    pub y: Vec<f64>,
    /// `(g0, g1)`: the endpoint powers `x^{2 g0}`, `(pi/2r - x)^{2 g1}` absorbed.
    pub endpoint_exponents: (f64, f64),
    pub order: usize,
    pub r: f64,
}

impl QuadratureRule {
    pub fn new(n: usize, g0: f64, g1: f64, r: f64) -> Result<Self> {
        let rule = jacobi_rule(n, g0 - 0.5, g1 - 0.5)?;
        // dx = dy / (2r sqrt(1-y^2)), sin^2 = (1-y)/2, cos^2 = (1+y)/2.
        let scale = 1.0 / (2.0 * r * 2f64.powf(g0 + g1));
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for (&y, &w) in rule.nodes.iter().zip(rule.weights.iter()).rev() {
            // asin form keeps the nodes near x = 0 accurate
            nodes.push(((0.5 * (1.0 - y)).sqrt()).asin() / r);
            weights.push(w * scale);
            ys.push(y);
        }
        Ok(Self {
            nodes,
            weights,
            y: ys,
            endpoint_exponents: (g0, g1),
            order: n,
            r,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Normalized eigenfunctions of the trigonometric comparison operator,
/// `phi_m(x) = N w_t(x)^{1/2} p_m(cos 2rx)`, orthonormal in `L^2([0, pi/2r], dx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigBasis {
    pub g0: f64,
    pub g1: f64,
    pub r: f64,
    rec: JacobiRecurrence,
    norm: f64,
}

impl TrigBasis {
    pub fn new(g0: f64, g1: f64, r: f64, size: usize) -> Result<Self> {
        if !(g0 > -0.5 && g1 > -0.5) {
            return Err(Error::Domain(format!(
                "basis needs g0, g1 > -1/2, got ({g0}, {g1})"
            )));
        }
        let rec = JacobiRecurrence::new(size.max(1), g0 - 0.5, g1 - 0.5)?;
        let norm = (2.0 * r * 2f64.powf(g0 + g1)).sqrt();
        Ok(Self {
            g0,
            g1,
            r,
            rec,
            norm,
        })
    }

    pub fn size(&self) -> usize {
        self.rec.max_degree()
    }

    /// `r^2 (g0 + g1 + 2m)^2`.
    pub fn eigenvalue(&self, m: usize) -> f64 {
        let v = self.r * (self.g0 + self.g1 + 2.0 * m as f64);
        v * v
    }

    /// Polynomial parts `N p_k(y)` for `k < count`: the basis functions with
    /// the weight `w_t^{1/2}` divided out.
    pub fn reduced(&self, y: f64, count: usize) -> Vec<f64> {
        let mut v = self.rec.eval(y, count);
        for e in v.iter_mut() {
            *e *= self.norm;
        }
        v
    }

    pub fn reduced_into(&self, y: f64, out: &mut [f64]) {
        self.rec.eval_into(y, out);
        for e in out.iter_mut() {
            *e *= self.norm;
        }
    }

    /// `w_t(x)^{1/2} = sin^{g0}(rx) cos^{g1}(rx)`.
    pub fn sqrt_weight(&self, x: f64) -> f64 {
        let t = self.r * x;
        t.sin().powf(self.g0) * t.cos().powf(self.g1)
    }

    pub fn eval(&self, m: usize, x: f64) -> f64 {
        let y = (2.0 * self.r * x).cos();
        self.sqrt_weight(x) * self.reduced(y, m + 1)[m]
    }
}

/// Value of the `m`-th normalized comparison eigenfunction at `x`.
pub fn trig_basis(g0: f64, g1: f64, r: f64, m: usize, x: f64) -> Result<f64> {
    Ok(TrigBasis::new(g0, g1, r, m + 1)?.eval(m, x))
}

/// Chebyshev nodes of the first kind, `cos((2k-1) pi / 2n)`, ascending.
pub fn chebyshev_nodes(n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (1..=n)
        .map(|k| ((2 * k - 1) as f64 * PI / (2 * n) as f64).cos())
        .collect();
    v.reverse();
    v
}
