//! Named coupling vectors and the closed-form spectra attached to them.

use std::f64::consts::PI;

use heun_core::{CouplingVector, EllipticParams};

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub g: [f64; 4],
    pub summary: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset { name: "free", g: [0.0, 0.0, 1.0, 1.0], summary: "self-dual, V = 0, nu_n = pi/(p cosh(n r alpha))" },
    Preset { name: "trig", g: [1.0, 1.0, 0.0, 0.0], summary: "V = 0, E_n = (2n+2)^2 r^2" },
    Preset { name: "full", g: [1.0, 1.0, 1.0, 1.0], summary: "nu_n = 2 pi (n+1) r e^{r alpha}/(p^2 sinh((n+1) r alpha))" },
    Preset { name: "crossed-cosh", g: [1.0, 0.0, 0.0, 1.0], summary: "nu_n = pi e^{r alpha/2}/(p cosh((n+1/2) r alpha))" },
    Preset { name: "crossed-sinh", g: [1.0, 0.0, 1.0, 0.0], summary: "nu_n = pi e^{r alpha/2}/(p sinh((n+1/2) r alpha))" },
    Preset { name: "even", g: [1.0, 1.0, 0.0, 1.0], summary: "dual (3,1,1,1)/2, E_n = (2n+2)^2 r^2" },
    Preset { name: "even-dual", g: [1.5, 0.5, 0.5, 0.5], summary: "E_n = (2n+2)^2 r^2 with V != 0" },
    Preset { name: "odd", g: [1.0, 0.0, 1.0, 1.0], summary: "dual (1,1,1,3)/2, E_n = (2n+1)^2 r^2" },
    Preset { name: "odd-dual", g: [0.5, 0.5, 0.5, 1.5], summary: "E_n = (2n+1)^2 r^2 with V != 0" },
    Preset { name: "single", g: [1.0, 0.0, 0.0, 0.0], summary: "dual (1,1,-1,1)/2, E_n = (2n+1)^2 r^2" },
    Preset { name: "single-dual", g: [0.5, 0.5, -0.5, 0.5], summary: "E_n = (2n+1)^2 r^2 with V != 0" },
    Preset { name: "zero", g: [0.0, 0.0, 0.0, 0.0], summary: "s_g = 0, rank one, E_0 = 0" },
    Preset { name: "generic", g: [0.9, 0.8, 0.7, 0.6], summary: "generic point with a full orbit" },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

/// A reference sequence with the formula it evaluates.
pub struct ClosedForm {
    pub formula: String,
    values: Box<dyn Fn(usize) -> f64 + Send + Sync>,
}

impl ClosedForm {
    pub fn at(&self, n: usize) -> f64 {
        (self.values)(n)
    }
}

fn is_free(g: &[f64; 4]) -> bool {
    g.iter().all(|&v| v == 0.0 || v == 1.0)
}

/// `E_m = r^2 (g0 + g1 + 2m)^2` whenever `g` or its dual has entries in `{0, 1}`
/// (the potential then vanishes identically).
pub fn closed_form_energy(g: &CouplingVector, r: f64) -> Option<ClosedForm> {
    let (source, formula) = if is_free(&g.0) {
        (g.0, "E_m = r^2 (g0 + g1 + 2m)^2, V = 0")
    } else if is_free(&g.dual().0) {
        (g.dual().0, "E_m = r^2 (g0' + g1' + 2m)^2, dual with V = 0")
    } else {
        return None;
    };
    let s = source[0] + source[1];
    Some(ClosedForm {
        formula: formula.into(),
        values: Box::new(move |m| (r * (s + 2.0 * m as f64)).powi(2)),
    })
}

/// Closed-form singular values for the five self-dual or crossed cases.
pub fn closed_form_nu(g: &CouplingVector, params: &EllipticParams) -> Option<ClosedForm> {
    let (p, r, ra) = (params.p(), params.r(), params.r() * params.alpha());
    let (formula, values): (&str, Box<dyn Fn(usize) -> f64 + Send + Sync>) = match g.0 {
        [0.0, 0.0, 1.0, 1.0] => (
            "nu_n = pi/(p cosh(n r alpha))",
            Box::new(move |n| PI / (p * (n as f64 * ra).cosh())),
        ),
        [1.0, 1.0, 0.0, 0.0] => (
            "nu_n = pi e^{r alpha}/(p cosh((n+1) r alpha))",
            Box::new(move |n| PI * ra.exp() / (p * ((n as f64 + 1.0) * ra).cosh())),
        ),
        [1.0, 1.0, 1.0, 1.0] => (
            "nu_n = 2 pi (n+1) r e^{r alpha}/(p^2 sinh((n+1) r alpha))",
            Box::new(move |n| {
                let k = n as f64 + 1.0;
                2.0 * PI * k * r * ra.exp() / (p * p * (k * ra).sinh())
            }),
        ),
        [1.0, 0.0, 0.0, 1.0] => (
            "nu_n = pi e^{r alpha/2}/(p cosh((n+1/2) r alpha))",
            Box::new(move |n| PI * (0.5 * ra).exp() / (p * ((n as f64 + 0.5) * ra).cosh())),
        ),
        [1.0, 0.0, 1.0, 0.0] => (
            "nu_n = pi e^{r alpha/2}/(p sinh((n+1/2) r alpha))",
            Box::new(move |n| PI * (0.5 * ra).exp() / (p * ((n as f64 + 0.5) * ra).sinh())),
        ),
        _ => return None,
    };
    Some(ClosedForm {
        formula: formula.into(),
        values,
    })
}
