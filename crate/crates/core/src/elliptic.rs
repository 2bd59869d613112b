//! Theta-type functions of the rectangular lattice with half-periods
//! `omega_1 = pi/2r` and `omega_2 = i alpha/2`.
//!
//! Two entire functions carry everything:
//!
//! * `R(z) = prod_{l>=0} (1 - q^{2l+1} e^{2irz}) (1 - q^{2l+1} e^{-2irz})`, even and
//!   `pi/r`-periodic, with `ln R(z) = -sum_n cos(2nrz) / (n sinh(n r alpha))` on
//!   the strip `|Im z| < alpha/2`;
//! * `s(z) = R(z + i alpha/2) / (i p e^{-irz})`, odd, with `s(x)/x -> 1`.
//!
//! The Weierstrass function follows from `wp(z) = -(ln s)''(z) - 2 eta r / pi`,
//! and its half-period shift from `wp(z + i alpha/2) = -(ln R)''(z) - 2 eta r / pi`.
//!
//! Real-line evaluators (`*_real`, [`EllipticParams::wp_regularized`]) use
//! precomputed cosine coefficients and Clenshaw summation; they are the hot
//! path for kernel and potential assembly. The complex evaluators pick their
//! truncation per call from the imaginary part of the argument.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods without std
use num_traits::Float;

use crate::error::{Error, Result};

/// Below this value of `r * alpha` the nome is refused.
pub const MIN_R_ALPHA: f64 = 0.05;

const MAX_TERMS: usize = 20_000;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Period data of the lattice plus everything derived from it.
///
/// Immutable after construction; every evaluator is a pure function of its
/// arguments and `self`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticParams {
    r: f64,
    alpha: f64,
    epsilon: f64,
    nome: f64,
    p: f64,
    eta: f64,
    e: [f64; 3],
    fourier_truncation: usize,
    product_truncation: usize,
    tail_bound: f64,
    ln_s_scale: f64,
    coef: Coefficients,
}

/// Cosine/sine coefficients of the real-line series, index `n - 1`.
#[derive(Debug, Clone, PartialEq)]
struct Coefficients {
    ln_r: Vec<f64>,
    ln_s: Vec<f64>,
    wp_reg: Vec<f64>,
    wp_tilde: Vec<f64>,
    dlog_r: Vec<f64>,
    dlog_s: Vec<f64>,
}

/// Which representation of `R` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RForm {
    Auto,
    Product,
    Fourier,
}

/// Build the lattice constants for `(r, alpha)` at precision `epsilon`.
pub fn lattice_constants(r: f64, alpha: f64, epsilon: f64) -> Result<EllipticParams> {
    EllipticParams::new(r, alpha, epsilon)
}

impl EllipticParams {
    pub fn new(r: f64, alpha: f64, epsilon: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Domain(alloc::format!("r must be positive, got {r}")));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Domain(alloc::format!("alpha must be positive, got {alpha}")));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Domain(alloc::format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        let ra = r * alpha;
        if ra < MIN_R_ALPHA {
            return Err(Error::IllConditioned(ra));
        }
        let q = (-ra).exp();
        let cut = epsilon * 1e-2;

        // The slowest real-line family is n^2 q^n (derivative of wp~).
        let mut nf = 1usize;
        while 8.0 * (nf as f64).powi(2) * q.powi(nf as i32) / (1.0 - q) >= cut {
            nf += 1;
            if nf > MAX_TERMS {
                return Err(Error::IllConditioned(ra));
            }
        }
        let next = (nf + 1) as f64;
        let tail_bound = 8.0 * next * next * (-next * ra).exp() / ((1.0 - q) * (1.0 - q));

        let mut np = 1usize;
        while (-2.0 * np as f64 * ra).exp() >= cut {
            np += 1;
        }
        let ln_prod: f64 = (1..=np)
            .map(|k| (-(-2.0 * k as f64 * ra).exp()).ln_1p())
            .sum();
        let p = 2.0 * r * (2.0 * ln_prod).exp();
        let ln_s_scale = -2.0 * ln_prod;

        let mut coef = Coefficients {
            ln_r: Vec::with_capacity(nf),
            ln_s: Vec::with_capacity(nf),
            wp_reg: Vec::with_capacity(nf),
            wp_tilde: Vec::with_capacity(nf),
            dlog_r: Vec::with_capacity(nf),
            dlog_s: Vec::with_capacity(nf),
        };
        let r2 = r * r;
        for n in 1..=nf {
            let nn = n as f64;
            let decay = (-nn * ra).exp();
            // 1/sinh(t) = 2 e^{-t} / (1 - e^{-2t})
            let csch = 2.0 * decay / (-(-2.0 * nn * ra).exp()).ln_1p().exp();
            coef.ln_r.push(csch / nn);
            coef.ln_s.push(decay * csch / nn);
            coef.wp_reg.push(4.0 * r2 * nn * decay * csch);
            coef.wp_tilde.push(4.0 * r2 * nn * csch);
            coef.dlog_r.push(2.0 * r * csch);
            coef.dlog_s.push(2.0 * r * decay * csch);
        }

        // Constant term of wp(z) - 1/z^2 must vanish:
        // r^2/3 - sum 4 r^2 n e^{-n r alpha}/sinh(n r alpha) - 2 eta r/pi = 0.
        let wp_shift = r2 / 3.0 - coef.wp_reg.iter().sum::<f64>();
        let eta = wp_shift * PI / (2.0 * r);

        let mut params = Self {
            r,
            alpha,
            epsilon,
            nome: q,
            p,
            eta,
            e: [0.0; 3],
            fourier_truncation: nf,
            product_truncation: np,
            tail_bound,
            ln_s_scale,
            coef,
        };
        let omega1 = params.omega1();
        params.e = [
            r2 + params.wp_regularized(omega1),
            params.wp_tilde_real(0.0),
            params.wp_tilde_real(omega1),
        ];
        Ok(params)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `q = exp(-r alpha)`.
    pub fn nome(&self) -> f64 {
        self.nome
    }

    /// `p = 2r prod_{k>=1} (1 - q^{2k})^2`.
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `(e1, e2, e3) = (wp(omega1), wp(omega2), wp(omega3))`.
    pub fn e(&self) -> [f64; 3] {
        self.e
    }

    pub fn fourier_truncation(&self) -> usize {
        self.fourier_truncation
    }

    pub fn product_truncation(&self) -> usize {
        self.product_truncation
    }

    /// Bound on the dropped tail of the real-line series, relative to `r^2`.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// The real half-period `pi / 2r`.
    pub fn omega1(&self) -> f64 {
        PI / (2.0 * self.r)
    }

    /// `2 eta r / pi`, the constant separating `-(ln s)''` from `wp`.
    pub fn wp_shift(&self) -> f64 {
        2.0 * self.eta * self.r / PI
    }

    // ---- real line ----------------------------------------------------

    /// `ln R(x)` for real `x`.
    pub fn ln_r_real(&self, x: f64) -> f64 {
        -cos_series(&self.coef.ln_r, 2.0 * self.r * x)
    }

    pub fn r_real(&self, x: f64) -> f64 {
        self.ln_r_real(x).exp()
    }

    /// `ln(r s(x) / sin(rx))`, smooth and even on the whole real line.
    pub fn ln_s_ratio(&self, x: f64) -> f64 {
        self.ln_s_scale - cos_series(&self.coef.ln_s, 2.0 * self.r * x)
    }

    /// `ln s(x)` for `x` in `(0, pi/r)`.
    pub fn ln_s_real(&self, x: f64) -> f64 {
        (self.r * x).sin().ln() - self.r.ln() + self.ln_s_ratio(x)
    }

    pub fn s_real(&self, x: f64) -> f64 {
        (self.r * x).sin() / self.r * self.ln_s_ratio(x).exp()
    }

    /// `wp(x) - r^2 / sin^2(rx)`: the pole at the origin subtracted term by
    /// term, so the result is an entire cosine series, finite at `x = 0`.
    pub fn wp_regularized(&self, x: f64) -> f64 {
        -cos_series(&self.coef.wp_reg, 2.0 * self.r * x) - self.wp_shift()
    }

    /// `wp(x + i alpha/2)` for real `x`.
    pub fn wp_tilde_real(&self, x: f64) -> f64 {
        -cos_series(&self.coef.wp_tilde, 2.0 * self.r * x) - self.wp_shift()
    }

    /// `wp(x)` for real non-lattice `x`.
    pub fn wp_real(&self, x: f64) -> f64 {
        let s = (self.r * x).sin();
        self.r * self.r / (s * s) + self.wp_regularized(x)
    }

    /// `R'(x)/R(x)` for real `x`.
    pub fn dlog_r_real(&self, x: f64) -> f64 {
        sin_series(&self.coef.dlog_r, 2.0 * self.r * x)
    }

    /// `s'(x)/s(x)` for real non-lattice `x`.
    pub fn dlog_s_real(&self, x: f64) -> f64 {
        let t = self.r * x;
        self.r * t.cos() / t.sin() + sin_series(&self.coef.dlog_s, 2.0 * t)
    }

    /// `s'/s` minus its pole part `r cot(rx)`.
    pub fn dlog_s_regular(&self, x: f64) -> f64 {
        sin_series(&self.coef.dlog_s, 2.0 * self.r * x)
    }

    // ---- complex plane -------------------------------------------------

    /// `R(z)` from the infinite product; valid for every `z`.
    pub fn r_product(&self, z: Complex64) -> Complex64 {
        let ra = self.r * self.alpha;
        let iz = 2.0 * self.r * z * I;
        let cut = self.epsilon * 1e-3;
        let mut acc = Complex64::new(1.0, 0.0);
        let mut l = 0usize;
        loop {
            let decay = -((2 * l + 1) as f64) * ra;
            let a = (iz + decay).exp();
            let b = (-iz + decay).exp();
            acc *= (1.0 - a) * (1.0 - b);
            if a.norm() < cut && b.norm() < cut {
                break;
            }
            l += 1;
            if l > MAX_TERMS {
                break;
            }
        }
        acc
    }

    /// `R(z)` from the exponentiated cosine series; needs `|Im z| < alpha/2`.
    pub fn r_fourier(&self, z: Complex64) -> Result<Complex64> {
        let mut ln = Complex64::new(0.0, 0.0);
        self.fourier_terms(z, 0, |n, c, _| ln -= c / n as f64)?;
        Ok(ln.exp())
    }

    /// `R(z)`; cosine series well inside the strip, product elsewhere.
    pub fn r_function(&self, z: Complex64) -> Complex64 {
        self.r_with(z, RForm::Auto)
            .expect("automatic form never leaves its domain")
    }

    pub fn r_with(&self, z: Complex64, form: RForm) -> Result<Complex64> {
        match form {
            RForm::Product => Ok(self.r_product(z)),
            RForm::Fourier => self.r_fourier(z),
            RForm::Auto => {
                if z.im.abs() <= 0.25 * self.alpha {
                    self.r_fourier(z)
                } else {
                    Ok(self.r_product(z))
                }
            }
        }
    }

    /// `s(z) = (sin rz / r) prod_{k>=1} (1 - q^{2k} e^{2irz})(1 - q^{2k} e^{-2irz}) / (1 - q^{2k})^2`.
    pub fn s_function(&self, z: Complex64) -> Complex64 {
        let ra = self.r * self.alpha;
        let iz = 2.0 * self.r * z * I;
        let cut = self.epsilon * 1e-3;
        let mut acc = (self.r * z).sin() / self.r;
        let mut k = 1usize;
        loop {
            let decay = -2.0 * k as f64 * ra;
            let a = (iz + decay).exp();
            let b = (-iz + decay).exp();
            acc *= (1.0 - a) * (1.0 - b);
            if a.norm() < cut && b.norm() < cut {
                break;
            }
            k += 1;
            if k > MAX_TERMS {
                break;
            }
        }
        acc * self.ln_s_scale.exp()
    }

    /// `(s'/s)(z)` and `(R'/R)(z)`.
    pub fn log_derivatives(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        Ok((self.dlog_s(z)?, self.dlog_r(z)?))
    }

    /// `R'(z)/R(z)`: the differentiated cosine series well inside the strip,
    /// `s'/s(z - i alpha/2) - i r` elsewhere.
    pub fn dlog_r(&self, z: Complex64) -> Result<Complex64> {
        if z.im.abs() <= 0.25 * self.alpha {
            let mut acc = Complex64::new(0.0, 0.0);
            self.fourier_terms(z, 0, |_, _, s| acc += s)?;
            Ok(acc * (2.0 * self.r))
        } else {
            Ok(self.dlog_s(z - I * (0.5 * self.alpha))? - I * self.r)
        }
    }

    /// `s'(z)/s(z)`, using `s'/s(z + i alpha) = s'/s(z) - 2ir` to reduce `Im z`.
    pub fn dlog_s(&self, z: Complex64) -> Result<Complex64> {
        let k = (z.im / self.alpha).round();
        let z0 = z - I * (k * self.alpha);
        let t = self.r * z0;
        let sin = t.sin();
        if sin.norm() < 1e-15 {
            return Err(Error::Pole { re: z.re, im: z.im });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        self.fourier_terms(z0, 1, |_, _, s| acc += s)?;
        Ok(self.r * t.cos() / sin + acc * (2.0 * self.r) - I * (2.0 * self.r * k))
    }

    /// Reduce `z` into the fundamental box `|Re z| <= pi/2r`, `|Im z| <= alpha/2`.
    fn reduce(&self, z: Complex64) -> Complex64 {
        let period = PI / self.r;
        let k = (z.im / self.alpha).round();
        let j = (z.re / period).round();
        Complex64::new(z.re - j * period, z.im - k * self.alpha)
    }

    /// Weierstrass `wp(z)` for the lattice `(pi/2r, i alpha/2)`.
    pub fn wp(&self, z: Complex64) -> Result<Complex64> {
        let z0 = self.reduce(z);
        if z0.norm() < 1e-15 * self.omega1() {
            return Err(Error::Pole { re: z.re, im: z.im });
        }
        let sin = (self.r * z0).sin();
        let mut acc = Complex64::new(0.0, 0.0);
        self.fourier_terms(z0, 1, |n, c, _| acc += c * n as f64)?;
        let r2 = self.r * self.r;
        Ok(r2 / (sin * sin) - acc * (4.0 * r2) - self.wp_shift())
    }

    /// Derivative of [`Self::wp`].
    pub fn wp_prime(&self, z: Complex64) -> Result<Complex64> {
        let z0 = self.reduce(z);
        if z0.norm() < 1e-15 * self.omega1() {
            return Err(Error::Pole { re: z.re, im: z.im });
        }
        let t = self.r * z0;
        let sin = t.sin();
        let mut acc = Complex64::new(0.0, 0.0);
        self.fourier_terms(z0, 1, |n, _, s| acc += s * (n * n) as f64)?;
        let r3 = self.r.powi(3);
        Ok(-2.0 * r3 * t.cos() / (sin * sin * sin) + acc * (8.0 * r3))
    }

    /// `wp(z + i alpha/2) = -(ln R)''(z) - 2 eta r / pi`.
    pub fn wp_tilde(&self, z: Complex64) -> Result<Complex64> {
        if z.im.abs() <= 0.25 * self.alpha {
            let mut acc = Complex64::new(0.0, 0.0);
            self.fourier_terms(z, 0, |n, c, _| acc += c * n as f64)?;
            Ok(-acc * (4.0 * self.r * self.r) - self.wp_shift())
        } else {
            self.wp(z + I * (0.5 * self.alpha))
        }
    }

    /// Walk the terms `cos(2nrz)/sinh(n r alpha) * q^{n*extra}` and the matching
    /// sine terms until their size drops below the working precision.
    fn fourier_terms<F>(&self, z: Complex64, extra: u32, mut visit: F) -> Result<()>
    where
        F: FnMut(usize, Complex64, Complex64),
    {
        let ra = self.r * self.alpha;
        let rate = ra * (1 + extra) as f64;
        let kappa = rate - 2.0 * self.r * z.im.abs();
        if kappa <= 0.0 {
            return Err(Error::OutsideStrip {
                im: z.im,
                limit: 0.5 * self.alpha * (1 + extra) as f64,
            });
        }
        let cut = self.epsilon * 1e-2;
        let iz = 2.0 * self.r * z * I;
        let mut n = 1usize;
        loop {
            let nn = n as f64;
            let denom = 1.0 - (-2.0 * nn * ra).exp();
            let plus = (iz * nn - nn * rate).exp();
            let minus = (-iz * nn - nn * rate).exp();
            visit(n, (plus + minus) / denom, (plus - minus) / (I * denom));
            if nn * nn * (-nn * kappa).exp() < cut {
                return Ok(());
            }
            n += 1;
            if n > MAX_TERMS {
                return Err(Error::OutsideStrip {
                    im: z.im,
                    limit: 0.5 * self.alpha * (1 + extra) as f64,
                });
            }
        }
    }
}

/// `sum_{n>=1} a_n cos(n theta)` by Clenshaw recurrence.
pub(crate) fn cos_series(a: &[f64], theta: f64) -> f64 {
    let c2 = 2.0 * theta.cos();
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ak in a.iter().rev() {
        let b0 = ak + c2 * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    // b1 = b_1, b2 = b_2
    0.5 * c2 * b1 - b2
}

/// `sum_{n>=1} a_n sin(n theta)` by Clenshaw recurrence.
pub(crate) fn sin_series(a: &[f64], theta: f64) -> f64 {
    let c2 = 2.0 * theta.cos();
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ak in a.iter().rev() {
        let b0 = ak + c2 * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    b1 * theta.sin()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> EllipticParams {
        lattice_constants(1.0, 1.0, 1e-15).unwrap()
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(lattice_constants(0.0, 1.0, 1e-15), Err(Error::Domain(_))));
        assert!(matches!(lattice_constants(1.0, -1.0, 1e-15), Err(Error::Domain(_))));
        assert!(matches!(lattice_constants(1.0, 1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(
            lattice_constants(1.0, 0.01, 1e-15),
            Err(Error::IllConditioned(_))
        ));
    }

    #[test]
    fn clenshaw_matches_direct_sum() {
        let a = [0.3, -1.2, 0.7, 0.01];
        for &t in &[0.0, 0.4, 1.3, 3.0] {
            let direct: f64 = a
                .iter()
                .enumerate()
                .map(|(k, c)| c * ((k + 1) as f64 * t).cos())
                .sum();
            let sdirect: f64 = a
                .iter()
                .enumerate()
                .map(|(k, c)| c * ((k + 1) as f64 * t).sin())
                .sum();
            assert!((cos_series(&a, t) - direct).abs() < 1e-14);
            assert!((sin_series(&a, t) - sdirect).abs() < 1e-14);
        }
    }

    #[test]
    fn large_alpha_limit() {
        let pr = lattice_constants(1.0, 40.0, 1e-15).unwrap();
        assert!((pr.p() - 2.0).abs() < 1e-15);
        assert!(pr.nome() < 1e-17);
    }

    #[test]
    fn real_and_complex_paths_agree() {
        let pr = params();
        for &x in &[0.1, 0.5, 1.0, 1.4] {
            let z = Complex64::new(x, 0.0);
            assert!((pr.r_real(x) - pr.r_function(z).re).abs() < 1e-14);
            assert!((pr.s_real(x) - pr.s_function(z).re).abs() < 1e-14);
            assert!((pr.wp_real(x) - pr.wp(z).unwrap().re).abs() < 1e-12);
            assert!((pr.wp_tilde_real(x) - pr.wp_tilde(z).unwrap().re).abs() < 1e-12);
            let (ds, dr) = pr.log_derivatives(z).unwrap();
            assert!((ds.re - pr.dlog_s_real(x)).abs() < 1e-13);
            assert!((dr.re - pr.dlog_r_real(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn fourier_refuses_outside_strip() {
        let pr = params();
        let err = pr.r_fourier(Complex64::new(0.2, 0.6)).unwrap_err();
        assert!(matches!(err, Error::OutsideStrip { .. }));
    }

    #[test]
    fn log_derivative_zeros_and_pole() {
        let pr = params();
        let origin = Complex64::new(0.0, 0.0);
        assert!(pr.dlog_r(origin).unwrap().norm() < 1e-15);
        assert!(matches!(pr.log_derivatives(origin), Err(Error::Pole { .. })));
        let (ds1, dr1) = pr.log_derivatives(Complex64::new(pr.omega1(), 0.0)).unwrap();
        assert!(ds1.norm() < 1e-14, "s'(omega1) = 0");
        assert!(dr1.norm() < 1e-14);
        for &x in &[1e-3, 1e-5, 1e-7] {
            let v = pr.dlog_s_real(x) - 1.0 / x;
            assert!(v.abs() < 1.0);
        }
    }

    #[test]
    fn wp_pole_is_reported() {
        let pr = params();
        assert!(matches!(pr.wp(Complex64::new(0.0, 0.0)), Err(Error::Pole { .. })));
        let lattice = Complex64::new(PI, 2.0);
        assert!(matches!(pr.wp(lattice), Err(Error::Pole { .. })));
    }

    #[test]
    fn half_period_values() {
        let pr = params();
        let e = pr.e();
        let w1 = pr.wp(Complex64::new(pr.omega1(), 0.0)).unwrap();
        let w2 = pr.wp(Complex64::new(0.0, 0.5)).unwrap();
        let w3 = pr.wp(Complex64::new(-pr.omega1(), -0.5)).unwrap();
        assert!((w1.re - e[0]).abs() < 1e-13 && w1.im.abs() < 1e-13);
        assert!((w2.re - e[1]).abs() < 1e-13 && w2.im.abs() < 1e-13);
        assert!((w3.re - e[2]).abs() < 1e-13 && w3.im.abs() < 1e-13);
        assert!(e[0] > e[2] && e[2] > e[1]);
    }
}
