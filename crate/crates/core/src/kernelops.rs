//! Weights, kernels and potentials on `[0, pi/2r]`.
//!
//! The kernel of `I(g)` is `Psi(g;x,y) = w(g;x)^{1/2} S(g;x,y) w(g';y)^{1/2}`
//! with `S(g;x,y) = exp(-s_g ln[R(x+y) R(x-y)])`. Everything is accumulated in
//! log space and exponentiated once.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods without std
use num_traits::Float;

use crate::couplings::CouplingVector;
use crate::elliptic::EllipticParams;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

/// A kernel or weight value; endpoint limits may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelValue {
    Finite(f64),
    Infinite,
}

impl KernelValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Infinite => None,
        }
    }

    fn from_log(ln: f64) -> Self {
        if ln == f64::INFINITY {
            Self::Infinite
        } else {
            Self::Finite(ln.exp())
        }
    }
}

/// Representation used for `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SForm {
    /// Double-cosine series `exp(2 s_g sum cos(2nrx) cos(2nry) / (n sinh(n r alpha)))`.
    #[default]
    Fourier,
    /// `R` from its infinite product.
    Product,
}

/// `ln(w(g;x) / w_t(g0,g1;x))`: the weight with its endpoint powers
/// `sin^{2g0}(rx) cos^{2g1}(rx)` divided out. Smooth on the closed interval.
pub fn ln_weight_ratio(params: &EllipticParams, g: &CouplingVector, x: f64) -> f64 {
    let [g0, g1, g2, g3] = g.0;
    let w1 = params.omega1();
    let ln_pr = (params.p() / params.r()).ln();
    2.0 * g0 * params.ln_s_ratio(x)
        + 2.0 * g1 * params.ln_s_ratio(w1 - x)
        + 2.0 * g2 * params.ln_r_real(x)
        + 2.0 * g3 * params.ln_r_real(w1 - x)
        + 2.0 * (g0 + g1) * ln_pr
}

/// `ln w(g;x)`; `-inf`/`+inf` at an endpoint with nonzero exponent.
pub fn ln_weight(params: &EllipticParams, g: &CouplingVector, x: f64) -> f64 {
    let [g0, g1, ..] = g.0;
    let t = params.r() * x;
    let edge = |exponent: f64, v: f64| -> f64 {
        if exponent == 0.0 {
            0.0
        } else {
            2.0 * exponent * v.ln()
        }
    };
    edge(g0, t.sin()) + edge(g1, t.cos()) + ln_weight_ratio(params, g, x)
}

/// `w(g;x) = p^{2g0+2g1} s(x)^{2g0} s(w1-x)^{2g1} R(x)^{2g2} R(w1-x)^{2g3}`
/// on the closed interval, with endpoint limits.
pub fn weight(params: &EllipticParams, g: &CouplingVector, x: f64) -> Result<KernelValue> {
    let w1 = params.omega1();
    if !(0.0..=w1).contains(&x) {
        return Err(Error::Domain(alloc::format!("x = {x} outside [0, {w1}]")));
    }
    let [g0, g1, ..] = g.0;
    if (x == 0.0 && g0 < 0.0) || (x == w1 && g1 < 0.0) {
        return Ok(KernelValue::Infinite);
    }
    let x = if x == w1 { w1 } else { x };
    let t = params.r() * x;
    // cos(pi/2) is not exactly zero in floating point
    let cos = if x == w1 { 0.0 } else { t.cos() };
    let edge = |exponent: f64, v: f64| -> f64 {
        if exponent == 0.0 {
            0.0
        } else {
            2.0 * exponent * v.ln()
        }
    };
    let ln = edge(g0, t.sin()) + edge(g1, cos) + ln_weight_ratio(params, g, x);
    Ok(KernelValue::from_log(ln))
}

/// `w(g;x) = 1 / (c(g;x) c(g;-x))` with `c` assembled from complex values of
/// `R` on the shifted lines `x + i alpha/2`, `x + i alpha/2 - w1`, `x`, `x - w1`.
/// Each factor is paired with its reflection first, so only real positive
/// numbers are raised to the powers `g_t`.
pub fn weight_from_c(params: &EllipticParams, g: &CouplingVector, x: f64) -> f64 {
    let half = Complex64::new(0.0, 0.5 * params.alpha());
    let w1 = Complex64::new(params.omega1(), 0.0);
    let shifts = [half, half - w1, Complex64::new(0.0, 0.0), -w1];
    let z = Complex64::new(x, 0.0);
    let mut ln = 0.0;
    for (gt, a) in g.0.iter().zip(shifts) {
        if *gt == 0.0 {
            continue;
        }
        let pair = params.r_product(z + a) * params.r_product(-z + a);
        ln += gt * pair.re.ln();
    }
    ln.exp()
}

/// `ln S(g;x,y)`.
pub fn ln_s_kernel(params: &EllipticParams, g: &CouplingVector, x: f64, y: f64, form: SForm) -> f64 {
    ln_s_kernel_sg(params, g.s_g(), x, y, form)
}

pub(crate) fn ln_s_kernel_sg(params: &EllipticParams, s_g: f64, x: f64, y: f64, form: SForm) -> f64 {
    if s_g == 0.0 {
        return 0.0;
    }
    let ln_rr = match form {
        SForm::Fourier => params.ln_r_real(x + y) + params.ln_r_real(x - y),
        SForm::Product => {
            let a = params.r_product(Complex64::new(x + y, 0.0)).re;
            let b = params.r_product(Complex64::new(x - y, 0.0)).re;
            (a * b).ln()
        }
    };
    -s_g * ln_rr
}

/// `S(g;x,y)`; depends on `g` only through `s_g`.
pub fn s_kernel(params: &EllipticParams, g: &CouplingVector, x: f64, y: f64, form: SForm) -> f64 {
    ln_s_kernel(params, g, x, y, form).exp()
}

/// Evaluator for `Psi(g;.,.)` with the dual couplings cached.
#[derive(Debug, Clone)]
pub struct Kernel<'a> {
    params: &'a EllipticParams,
    g: CouplingVector,
    dual: CouplingVector,
    form: SForm,
}

impl<'a> Kernel<'a> {
    pub fn new(params: &'a EllipticParams, g: CouplingVector) -> Self {
        Self {
            params,
            g,
            dual: g.dual(),
            form: SForm::Fourier,
        }
    }

    pub fn with_form(mut self, form: SForm) -> Self {
        self.form = form;
        self
    }

    pub fn g(&self) -> CouplingVector {
        self.g
    }

    pub fn dual(&self) -> CouplingVector {
        self.dual
    }

    /// `Psi(g;x,y)`; infinite at an endpoint where a weight exponent is negative.
    pub fn psi(&self, x: f64, y: f64) -> Result<KernelValue> {
        let left = weight(self.params, &self.g, x)?;
        let right = weight(self.params, &self.dual, y)?;
        match (left, right) {
            (KernelValue::Finite(a), KernelValue::Finite(b)) => {
                let s = ln_s_kernel(self.params, &self.g, x, y, self.form).exp();
                Ok(KernelValue::Finite(a.sqrt() * s * b.sqrt()))
            }
            _ => Ok(KernelValue::Infinite),
        }
    }

    /// `Psi / (w_t(g0,g1;x) w_t(g0',g1';y))^{1/2}`: the smooth factor left over
    /// once the endpoint powers are absorbed into quadrature weights.
    pub fn psi_regular(&self, x: f64, y: f64) -> f64 {
        self.psi_regular_parts(
            0.5 * ln_weight_ratio(self.params, &self.g, x),
            0.5 * ln_weight_ratio(self.params, &self.dual, y),
            x,
            y,
        )
    }

    fn psi_regular_parts(&self, half_left: f64, half_right: f64, x: f64, y: f64) -> f64 {
        (half_left + ln_s_kernel(self.params, &self.g, x, y, self.form) + half_right).exp()
    }

    /// Samples `Psi_reg(x_i, y_j)` on the product of two rules.
    pub fn regular_grid(&self, left: &QuadratureRule, right: &QuadratureRule) -> Vec<Vec<f64>> {
        let hl: Vec<f64> = left
            .nodes
            .iter()
            .map(|&x| 0.5 * ln_weight_ratio(self.params, &self.g, x))
            .collect();
        let hr: Vec<f64> = right
            .nodes
            .iter()
            .map(|&y| 0.5 * ln_weight_ratio(self.params, &self.dual, y))
            .collect();
        left.nodes
            .iter()
            .zip(hl.iter())
            .map(|(&x, &a)| {
                right
                    .nodes
                    .iter()
                    .zip(hr.iter())
                    .map(|(&y, &b)| self.psi_regular_parts(a, b, x, y))
                    .collect()
            })
            .collect()
    }
}

/// `Psi(g;x,y)`.
pub fn psi_kernel(params: &EllipticParams, g: &CouplingVector, x: f64, y: f64) -> Result<KernelValue> {
    Kernel::new(params, *g).psi(x, y)
}

/// Outcome of the square-integrability test for `Psi(g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HsNorm {
    pub finite: bool,
    /// `int int Psi^2` by quadrature, when finite.
    pub estimate: Option<f64>,
    /// Observed power-law exponents of `w(g)` at `0`, `w(g)` at `pi/2r`,
    /// `w(g')` at `0`, `w(g')` at `pi/2r`.
    pub endpoint_exponents: [f64; 4],
}

/// Exponents closer to `-1` than this are treated as on the boundary.
const EXPONENT_RESOLUTION: f64 = 1e-8;

/// Decide whether `Psi(g)` is square integrable from the observed endpoint
/// behaviour of the two weights, and integrate `Psi^2` when it is.
pub fn hs_norm_finite(params: &EllipticParams, g: &CouplingVector, quad_size: usize) -> Result<HsNorm> {
    let dual = g.dual();
    let w1 = params.omega1();
    let (h1, h2) = (1e-5 * w1, 2e-5 * w1);
    let slope = |c: &CouplingVector, at_right: bool| {
        let pick = |h: f64| if at_right { w1 - h } else { h };
        (ln_weight(params, c, pick(h1)) - ln_weight(params, c, pick(h2))) / (h1 / h2).ln()
    };
    let exps = [slope(g, false), slope(g, true), slope(&dual, false), slope(&dual, true)];
    // Psi^2 ~ w(g;x) w(g';y): integrable iff every exponent exceeds -1.
    let finite = exps.iter().all(|&e| e > -1.0 + EXPONENT_RESOLUTION);
    if !finite {
        return Ok(HsNorm {
            finite,
            estimate: None,
            endpoint_exponents: exps,
        });
    }
    let [g0, g1, ..] = g.0;
    let left = QuadratureRule::new(quad_size, g0, g1, params.r())?;
    let right = QuadratureRule::new(quad_size, dual.0[0], dual.0[1], params.r())?;
    let kernel = Kernel::new(params, *g);
    let grid = kernel.regular_grid(&left, &right);
    let mut total = 0.0;
    for (row, u) in grid.iter().zip(left.weights.iter()) {
        for (v, w) in row.iter().zip(right.weights.iter()) {
            total += u * w * v * v;
        }
    }
    Ok(HsNorm {
        finite,
        estimate: Some(total),
        endpoint_exponents: exps,
    })
}

fn pole_check(coupling: f64, at_pole: bool, x: f64) -> Result<()> {
    if at_pole && coupling * (coupling - 1.0) != 0.0 {
        Err(Error::Pole { re: x, im: 0.0 })
    } else {
        Ok(())
    }
}

/// `V(g;x) = sum_t g_t (g_t - 1) wp(x + omega_t)` for real `x`.
pub fn potential(params: &EllipticParams, g: &CouplingVector, x: f64) -> Result<f64> {
    let [g0, g1, g2, g3] = g.0;
    let w1 = params.omega1();
    let r2 = params.r() * params.r();
    let t = params.r() * x;
    let sin = t.sin();
    let cos = if x == w1 { 0.0 } else { t.cos() };
    pole_check(g0, sin == 0.0, x)?;
    pole_check(g1, cos == 0.0, x)?;
    let k = |c: f64| c * (c - 1.0);
    let mut v = k(g2) * params.wp_tilde_real(x) + k(g3) * params.wp_tilde_real(w1 - x);
    if k(g0) != 0.0 {
        v += k(g0) * (r2 / (sin * sin) + params.wp_regularized(x));
    }
    if k(g1) != 0.0 {
        v += k(g1) * (r2 / (cos * cos) + params.wp_regularized(w1 - x));
    }
    Ok(v)
}

/// `V_t(g0,g1;x) = r^2 g0(g0-1)/sin^2(rx) + r^2 g1(g1-1)/cos^2(rx)`.
pub fn potential_trig(g0: f64, g1: f64, r: f64, x: f64) -> Result<f64> {
    let t = r * x;
    let sin = t.sin();
    let cos = if t == core::f64::consts::FRAC_PI_2 { 0.0 } else { t.cos() };
    pole_check(g0, sin == 0.0, x)?;
    pole_check(g1, cos == 0.0, x)?;
    let mut v = 0.0;
    if g0 * (g0 - 1.0) != 0.0 {
        v += r * r * g0 * (g0 - 1.0) / (sin * sin);
    }
    if g1 * (g1 - 1.0) != 0.0 {
        v += r * r * g1 * (g1 - 1.0) / (cos * cos);
    }
    Ok(v)
}

/// `V_d = V_t - V`, assembled from pole-free pieces; bounded and smooth on
/// the closed interval.
pub fn potential_diff(params: &EllipticParams, g: &CouplingVector, x: f64) -> f64 {
    let [g0, g1, g2, g3] = g.0;
    let w1 = params.omega1();
    let k = |c: f64| c * (c - 1.0);
    -(k(g0) * params.wp_regularized(x)
        + k(g1) * params.wp_regularized(w1 - x)
        + k(g2) * params.wp_tilde_real(x)
        + k(g3) * params.wp_tilde_real(w1 - x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::lattice_constants;

    fn params() -> EllipticParams {
        lattice_constants(1.0, 1.0, 1e-15).unwrap()
    }

    #[test]
    fn weight_endpoints() {
        let pr = params();
        let g = CouplingVector::new(0.7, -0.3, 0.4, 1.2);
        assert_eq!(weight(&pr, &g, 0.0).unwrap(), KernelValue::Finite(0.0));
        assert_eq!(weight(&pr, &g, pr.omega1()).unwrap(), KernelValue::Infinite);
        assert!(weight(&pr, &g, -0.1).is_err());
        let flat = CouplingVector::new(0.0, 0.0, 1.0, 1.0);
        let w0 = weight(&pr, &flat, 0.0).unwrap().finite().unwrap();
        let expect = pr.r_real(0.0).powi(2) * pr.r_real(pr.omega1()).powi(2);
        assert!((w0 - expect).abs() < 1e-14);
    }

    #[test]
    fn weight_routes_agree() {
        let pr = params();
        let g = CouplingVector::new(0.7, -0.3, 0.4, 1.2);
        for k in 1..20 {
            let x = k as f64 * pr.omega1() / 20.0;
            let a = weight(&pr, &g, x).unwrap().finite().unwrap();
            let b = weight_from_c(&pr, &g, x);
            assert!(((a - b) / a).abs() < 1e-12, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn s_kernel_trivial_when_sg_zero() {
        let pr = params();
        let g = CouplingVector::new(0.3, -0.3, 0.2, -0.2);
        assert_eq!(s_kernel(&pr, &g, 0.2, 0.9, SForm::Fourier), 1.0);
        assert_eq!(s_kernel(&pr, &g, 0.2, 0.9, SForm::Product), 1.0);
    }

    #[test]
    fn s_kernel_symmetry_and_sg_dependence() {
        let pr = params();
        let g = CouplingVector::new(0.9, 0.3, 0.7, 0.2);
        let h = CouplingVector::new(0.1, 1.1, 0.2, 0.7);
        assert_eq!(g.s_g(), h.s_g());
        for &(x, y) in &[(0.1, 0.5), (0.3, 1.2), (1.5, 0.0)] {
            let a = s_kernel(&pr, &g, x, y, SForm::Fourier);
            assert!((a - s_kernel(&pr, &g, y, x, SForm::Fourier)).abs() < 1e-14 * a);
            assert_eq!(a, s_kernel(&pr, &h, x, y, SForm::Fourier));
        }
    }

    #[test]
    fn potential_poles() {
        let pr = params();
        let g = CouplingVector::new(1.5, 0.5, 0.5, 0.5);
        assert!(matches!(potential(&pr, &g, 0.0), Err(Error::Pole { .. })));
        assert!(matches!(potential(&pr, &g, pr.omega1()), Err(Error::Pole { .. })));
        let g = CouplingVector::new(1.0, 0.0, 0.5, 0.5);
        assert!(potential(&pr, &g, 0.0).is_ok());
        assert!(potential_trig(1.5, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn potential_identity_on_interior() {
        let pr = params();
        let g = CouplingVector::new(1.5, 0.5, 0.5, 0.5);
        for k in 1..30 {
            let x = k as f64 * pr.omega1() / 30.0;
            let v = potential(&pr, &g, x).unwrap();
            let vt = potential_trig(g.0[0], g.0[1], pr.r(), x).unwrap();
            let vd = potential_diff(&pr, &g, x);
            assert!((v - (vt - vd)).abs() < 1e-12 * vt.abs().max(1.0));
        }
    }

    #[test]
    fn sixteen_free_cases() {
        let pr = params();
        for bits in 0..16u32 {
            let g = CouplingVector(core::array::from_fn(|t| ((bits >> t) & 1) as f64));
            for k in 1..10 {
                let x = k as f64 * pr.omega1() / 10.0;
                assert_eq!(potential(&pr, &g, x).unwrap(), 0.0);
            }
        }
    }
}
