#![allow(dead_code)]

use heun_core::{lattice_constants, CouplingVector, EllipticParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn params() -> EllipticParams {
    lattice_constants(1.0, 1.0, 1e-15).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

pub fn crel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

/// `R(z)` by multiplying product factors until they stop changing the result.
pub fn r_direct(r: f64, alpha: f64, z: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let mut acc = Complex64::new(1.0, 0.0);
    for l in 0..10_000 {
        let q = (-((2 * l + 1) as f64) * r * alpha).exp();
        let a = q * (2.0 * i * r * z).exp();
        let b = q * (-2.0 * i * r * z).exp();
        if a.norm() < 1e-18 && b.norm() < 1e-18 {
            break;
        }
        acc *= (1.0 - a) * (1.0 - b);
    }
    acc
}

/// `p = 2r prod (1 - e^{-2k r alpha})^2` by direct multiplication.
pub fn p_direct(r: f64, alpha: f64) -> f64 {
    let mut acc = 2.0 * r;
    for k in 1..10_000 {
        let f = 1.0 - (-2.0 * k as f64 * r * alpha).exp();
        if 1.0 - f < 1e-18 {
            break;
        }
        acc *= f * f;
    }
    acc
}

/// Double-exponential quadrature on `[a, b]`; tolerates integrable endpoint
/// singularities.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let h = 1.0 / 64.0;
    let half = 0.5 * (b - a);
    let pi2 = std::f64::consts::FRAC_PI_2;
    let mut sum = 0.0;
    for k in -448i32..=448 {
        let t = k as f64 * h;
        let u = pi2 * t.sinh();
        let x = u.tanh();
        let w = pi2 * t.cosh() / (u.cosh() * u.cosh());
        // distance to the nearer endpoint, computed without cancellation
        let gap = 1.0 / (u.abs().exp() * u.cosh());
        if gap * half <= 0.0 {
            continue;
        }
        let y = if x >= 0.0 { b - half * gap } else { a + half * gap };
        if y <= a || y >= b {
            continue;
        }
        sum += w * f(y);
    }
    sum * h * half
}

pub fn random_g<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> CouplingVector {
    CouplingVector(std::array::from_fn(|_| rng.random_range(lo..hi)))
}

/// Rejection sample from `Pi_r` with components in a moderate box.
pub fn random_pi_r<R: Rng>(rng: &mut R) -> CouplingVector {
    loop {
        let g = random_g(rng, -0.45, 1.8);
        if g.membership().in_pi_r {
            return g;
        }
    }
}

pub fn random_pi_g<R: Rng>(rng: &mut R) -> CouplingVector {
    loop {
        let g = random_g(rng, -0.45, 1.8);
        if g.membership().in_pi_g {
            return g;
        }
    }
}

/// Random point of `Pi` on the hyperplane `s_g = 0`.
pub fn random_rank_one<R: Rng>(rng: &mut R) -> CouplingVector {
    loop {
        let g0 = rng.random_range(-0.45..1.2);
        let g1 = rng.random_range(-0.45..1.2);
        let g2 = rng.random_range(-1.2..1.2);
        let g = CouplingVector::new(g0, g1, g2, -(g0 + g1 + g2));
        if g.membership().in_pi {
            return g;
        }
    }
}
