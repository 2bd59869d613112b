//! Acceptance suite. Prints one line per criterion and exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use common::*;
use heun_core::couplings::s4_orbit;
use heun_core::elliptic::RForm;
use heun_core::kernelops::{hs_norm_finite, potential, psi_kernel};
use heun_core::linalg::svd;
use heun_core::spectra::*;
use heun_core::CouplingVector;
use num_complex::Complex64;
use rand::Rng;

type Nu = Box<dyn Fn(f64) -> f64>;
type Check = fn() -> Outcome;

const N: usize = 48;
const M: usize = 48;
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(checks: &[(&str, f64, f64)]) -> Outcome {
    let pass = checks.iter().all(|(_, v, tol)| v.is_finite() && v < tol);
    let detail = checks
        .iter()
        .map(|(name, v, tol)| format!("{name} {v:.2e} (< {tol:.0e})"))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome { pass, detail }
}

fn max(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
}

fn elliptic_identities() -> Outcome {
    let pr = params();
    let mut rng = rng(1);
    let mut point = |re: f64, im: f64| Complex64::new(rng.random_range(-re..re), rng.random_range(-im..im));
    let w1 = pr.omega1();
    let quarter = 0.25 * I * pr.alpha();
    let mut dupl = 0.0f64;
    let mut quasi = 0.0f64;
    let mut rs = 0.0f64;
    for _ in 0..20 {
        let z = point(1.5, 0.12);
        let rhs: Complex64 = [quarter, -quarter]
            .iter()
            .map(|&d| pr.r_function(z + d) * pr.r_function(z + w1 + d))
            .product();
        dupl = dupl.max(crel(pr.r_function(2.0 * z), rhs));

        let z = point(1.5, 0.2);
        let factor = -(pr.r() * pr.alpha() - 2.0 * I * pr.r() * z).exp();
        quasi = quasi.max(crel(pr.s_function(z + I * pr.alpha()), factor * pr.s_function(z)));
        quasi = quasi.max(crel(pr.r_product(z + I * pr.alpha()), factor * pr.r_product(z)));

        let lhs = pr.r_function(z + 0.5 * I * pr.alpha());
        rs = rs.max(crel(lhs, I * pr.p() * (-I * pr.r() * z).exp() * pr.s_function(z)));
    }
    let mut forms = 0.0f64;
    for i in 0..32 {
        for j in 0..8 {
            let z = Complex64::new(-w1 + 2.0 * w1 * i as f64 / 31.0, -0.45 + 0.9 * j as f64 / 7.0);
            let a = pr.r_with(z, RForm::Fourier).unwrap();
            let b = pr.r_with(z, RForm::Product).unwrap();
            forms = forms.max(crel(a, b));
        }
    }
    let [e1, e2, e3] = pr.e();
    let esum = (e1 + e2 + e3).abs() / e1.abs().max(e2.abs()).max(e3.abs());
    let laurent = max([1e-3, 1e-4].map(|h: f64| (h * h * pr.wp(Complex64::new(h, 0.0)).unwrap().re - 1.0).abs()));
    let rem = |h: f64| pr.wp(Complex64::new(h, 0.0)).unwrap().re - 1.0 / (h * h);
    let order = ((rem(0.04) / rem(0.02)).log2() - 2.0).abs();
    outcome(&[
        ("duplication", dupl, 1e-12),
        ("quasi-periodicity", quasi, 1e-12),
        ("R/s half shift", rs, 1e-12),
        ("product vs cosine series", forms, 1e-12),
        ("e1+e2+e3", esum, 1e-10),
        ("z^2 wp - 1", laurent, 1e-10),
        ("|order - 2|", order, 1e-2),
    ])
}

fn closed_form_nu() -> Outcome {
    let pr = params();
    let (p, ra) = (pr.p(), pr.r() * pr.alpha());
    let r = pr.r();
    let cases: Vec<(&str, [f64; 4], Nu)> = vec![
        ("(0,0,1,1)", [0.0, 0.0, 1.0, 1.0], Box::new(move |n| PI / (p * (n * ra).cosh()))),
        ("(1,1,0,0)", [1.0, 1.0, 0.0, 0.0], Box::new(move |n| PI * ra.exp() / (p * ((n + 1.0) * ra).cosh()))),
        (
            "(1,1,1,1)",
            [1.0, 1.0, 1.0, 1.0],
            Box::new(move |n| 2.0 * PI * (n + 1.0) * r * ra.exp() / (p * p * ((n + 1.0) * ra).sinh())),
        ),
        (
            "(1,0,0,1)",
            [1.0, 0.0, 0.0, 1.0],
            Box::new(move |n| PI * (0.5 * ra).exp() / (p * ((n + 0.5) * ra).cosh())),
        ),
        (
            "(1,0,1,0)",
            [1.0, 0.0, 1.0, 0.0],
            Box::new(move |n| PI * (0.5 * ra).exp() / (p * ((n + 0.5) * ra).sinh())),
        ),
    ];
    let mut checks = Vec::new();
    for (name, g, nu) in &cases {
        let res = hs_svd(&pr, &CouplingVector(*g), N).unwrap();
        let err = if res.converged_count < 9 {
            f64::INFINITY
        } else {
            max((0..=8).map(|n| rel(res.singular_values[n], nu(n as f64))))
        };
        checks.push((*name, err, 1e-8));
    }
    outcome(&checks)
}

fn closed_form_energies() -> Outcome {
    let pr = params();
    let r2 = pr.r() * pr.r();
    let cases = [
        ("(3,1,1,1)/2", [1.5, 0.5, 0.5, 0.5], 2.0),
        ("(1,1,1,3)/2", [0.5, 0.5, 0.5, 1.5], 1.0),
        ("(1,1,-1,1)/2", [0.5, 0.5, -0.5, 0.5], 1.0),
    ];
    let mut checks = Vec::new();
    for (name, g, off) in cases {
        let g = CouplingVector(g);
        let v = max((1..50).map(|k| potential(&pr, &g, pr.omega1() * k as f64 / 50.0).unwrap().abs()));
        let s = heun_spectrum(&pr, &g, M).unwrap();
        let err = if s.converged_count < 7 || v < 1e-3 {
            f64::INFINITY
        } else {
            max((0..=6).map(|n| rel(s.eigenvalues[n], (2.0 * n as f64 + off).powi(2) * r2)))
        };
        checks.push((name, err, 1e-8));
    }
    outcome(&checks)
}

fn spectra_agree(a: &SpectrumResult, b: &SpectrumResult, k: usize) -> f64 {
    if a.converged_count < k || b.converged_count < k {
        return f64::INFINITY;
    }
    max((0..k).map(|n| rel(b.eigenvalues[n], a.eigenvalues[n])))
}

fn duality() -> Outcome {
    let pr = params();
    let mut rng = rng(4);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let g = random_pi_r(&mut rng);
        let a = heun_spectrum(&pr, &g, M).unwrap();
        let b = heun_spectrum(&pr, &g.dual(), M).unwrap();
        worst = worst.max(spectra_agree(&a, &b, 6));
    }
    outcome(&[("max rel dev (10 g, 6 eigenvalues)", worst, 1e-8)])
}

fn s4_invariance() -> Outcome {
    let pr = params();
    let mut rng = rng(5);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let g = random_pi_g(&mut rng);
        let orbit = s4_orbit(&g);
        if !orbit.iter().all(|o| o.membership.in_pi_g) {
            worst = f64::INFINITY;
            continue;
        }
        let spectra: Vec<_> = orbit.iter().map(|o| heun_spectrum(&pr, &o.image, M).unwrap()).collect();
        for a in &spectra {
            for b in &spectra {
                worst = worst.max(spectra_agree(a, b, 6));
            }
        }
    }
    outcome(&[("max pairwise rel dev (5 g, 24 spectra)", worst, 1e-8)])
}

fn rank_one() -> Outcome {
    let pr = params();
    let mut rng = rng(6);
    let (mut ident, mut routes) = (0.0f64, 0.0f64);
    for _ in 0..5 {
        let g = random_rank_one(&mut rng);
        let res = rank_one_case(&pr, &g, M).unwrap();
        let scale = res.e0.abs().max(pr.r() * pr.r());
        ident = ident.max(res.identity_residual / scale);
        routes = routes.max(
            max([res.e0_dual, res.galerkin_e0, res.identity_value].map(|v| (v - res.e0).abs())) / scale,
        );
    }
    outcome(&[("identity residual", ident, 1e-10), ("E0 routes", routes, 1e-8)])
}

fn structural() -> Outcome {
    let pr = params();
    let mut rng = rng(7);

    // Parseval: converged sum <= quadrature of Psi^2 <= converged sum + tail
    let mut parseval = 0.0f64;
    let mut gs = vec![CouplingVector::new(0.0, 0.0, 1.0, 1.0), CouplingVector::new(1.0, 1.0, 1.0, 1.0)];
    gs.extend((0..3).map(|_| random_pi_r(&mut rng)));
    for g in &gs {
        let res = hs_svd(&pr, g, N).unwrap();
        let est = hs_norm_finite(&pr, g, 64).unwrap().estimate.unwrap();
        let c = res.converged_count;
        let nu = &res.singular_values;
        let head: f64 = nu[..c].iter().map(|v| v * v).sum();
        let rho = (nu[N - 1] / nu[N - 2]).min(0.999);
        let tail: f64 = nu[c..].iter().map(|v| v * v).sum::<f64>() + nu[N - 1].powi(2) * rho * rho / (1.0 - rho * rho);
        let slack = 1e-12 * est;
        let excess = if est + slack < head { head - est } else { (est - head - tail - slack).max(0.0) };
        parseval = parseval.max(excess / est);
    }

    let mut adjoint = 0.0f64;
    let mut gs: Vec<CouplingVector> = (0..3).map(|_| random_pi_r(&mut rng)).collect();
    gs.push(CouplingVector::new(0.2, 0.2, -0.3, -0.2));
    gs.push(CouplingVector::new(1.0, 1.0, 0.0, 1.0));
    for g in &gs {
        let d = g.dual();
        for _ in 0..20 {
            let x: f64 = rng.random_range(0.0..pr.omega1());
            for _ in 0..20 {
                let y: f64 = rng.random_range(0.0..pr.omega1());
                let a = psi_kernel(&pr, g, x, y).unwrap().finite().unwrap();
                let b = psi_kernel(&pr, &d, y, x).unwrap().finite().unwrap();
                adjoint = adjoint.max(rel(b, a));
            }
        }
    }

    let mut minors = 0.0f64;
    for _ in 0..3 {
        let g = random_rank_one(&mut rng);
        let xs: Vec<f64> = (1..16).map(|k| pr.omega1() * k as f64 / 16.0).collect();
        let psi: Vec<Vec<f64>> = xs
            .iter()
            .map(|&x| xs.iter().map(|&y| psi_kernel(&pr, &g, x, y).unwrap().finite().unwrap()).collect())
            .collect();
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                for k in 0..xs.len() {
                    for l in 0..xs.len() {
                        let m = psi[i][j] * psi[k][l] - psi[i][l] * psi[k][j];
                        minors = minors.max(m.abs() / (psi[i][j] * psi[k][l]).abs().max(1e-300));
                    }
                }
            }
        }
        let nu = svd(hs_matrix(&pr, &g, 32).unwrap().matrix).0;
        minors = minors.max(nu[1] / nu[0]);
    }

    let mut mismatches = 0usize;
    for k in 0..100 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let delta = sign * 10f64.powf(-rng.random_range(0.5..3.5));
        let jitter: f64 = rng.random_range(0.0..0.5);
        let edge = -0.5 + delta;
        let g = match (k / 2) % 4 {
            0 => CouplingVector::new(edge, 0.6 + jitter, 0.3, 0.4),
            1 => CouplingVector::new(0.6 + jitter, edge, 0.4, 0.3),
            // g0' = (g0 + g1 - g2 + g3)/2
            2 => {
                let g2 = 1.0 + jitter;
                CouplingVector::new(0.5, 0.2, g2, g2 - 1.7 + 2.0 * delta)
            }
            // g1' = (g0 + g1 + g2 - g3)/2
            _ => {
                let g3 = 1.0 + jitter;
                CouplingVector::new(0.5, 0.2, g3 - 1.7 + 2.0 * delta, g3)
            }
        };
        if hs_norm_finite(&pr, &g, 24).unwrap().finite != g.membership().in_pi {
            mismatches += 1;
        }
    }

    let mut asym = 0.0f64;
    let mut gs = vec![CouplingVector::new(1.5, 0.5, 0.5, 0.5)];
    gs.extend((0..2).map(|_| random_pi_r(&mut rng)));
    for g in &gs {
        let s = heun_spectrum(&pr, g, M).unwrap();
        if s.converged_count <= 10 {
            asym = f64::INFINITY;
            continue;
        }
        for m in 10..s.converged_count {
            let ratio = (s.eigenvalues[m] / (4.0 * pr.r() * pr.r() * (m * m) as f64) - 1.0).abs();
            asym = asym.max(ratio * m as f64 / 5.0);
        }
    }

    outcome(&[
        ("Parseval excess", parseval, 1e-10),
        ("adjoint symmetry", adjoint, 1e-12),
        ("rank-one minors", minors, 1e-12),
        ("membership/finiteness mismatches", mismatches as f64, 0.5),
        ("max m|E_m/4r^2m^2 - 1|/5", asym, 1.0),
    ])
}

fn transport() -> Outcome {
    let pr = params();
    let (mut residual, mut negative) = (0.0f64, 0.0f64);
    for g in [[1.0, 1.0, 0.0, 1.0], [1.0, 0.0, 1.0, 1.0], [1.0, 0.0, 0.0, 0.0]] {
        for m in 0..=5 {
            match eigenfunction_transport(&pr, &CouplingVector(g), m, N, M) {
                Ok(t) => {
                    residual = residual.max(t.residual);
                    if t.mu <= 0.0 {
                        negative += 1.0;
                    }
                }
                Err(_) => residual = f64::INFINITY,
            }
        }
    }
    outcome(&[("residual", residual, 1e-8), ("non-positive mu", negative, 0.5)])
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 8] = [
        ("elliptic identities", elliptic_identities),
        ("closed-form singular values", closed_form_nu),
        ("closed-form eigenvalues", closed_form_energies),
        ("duality", duality),
        ("S4 invariance", s4_invariance),
        ("rank-one case", rank_one),
        ("structural properties", structural),
        ("transport", transport),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let status = if out.pass { "PASS" } else { "FAIL" };
        if !out.pass {
            failed += 1;
        }
        println!(
            "criterion {} {name}: {status} [{:.1}s] {}",
            k + 1,
            start.elapsed().as_secs_f64(),
            out.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
