//! Finite discretizations of `H(g)` and `I(g)`.
//!
//! `H(g)` is represented in the eigenbasis of the trigonometric comparison
//! operator, where it becomes `diag(r^2 (g0+g1+2m)^2) - <phi_m, V_d phi_n>`.
//! `I(g)` is sampled on a pair of Gauss-Jacobi rules whose weights absorb the
//! endpoint powers of `w(g;x)^{1/2}` and `w(g';y)^{1/2}`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // float methods without std
use num_traits::Float;

use crate::couplings::CouplingVector;
use crate::elliptic::EllipticParams;
use crate::error::{Error, Result};
use crate::kernelops::{ln_weight_ratio, potential_diff, Kernel};
use crate::linalg::{svd, sym_eigen};
use crate::quadrature::{QuadratureRule, TrigBasis};

/// Relative tolerance used to certify eigenvalues and singular values.
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-9;

/// Extra Gauss-Jacobi nodes beyond `2M` when projecting `V_d`.
const PROJECTION_PAD: usize = 32;

/// `s_g` below this in magnitude counts as the rank-one case.
const RANK_ONE_TOL: f64 = 1e-12;

/// Resize used for the convergence re-solve.
pub fn refined_size(m: usize) -> usize {
    (3 * m).div_ceil(2)
}

/// What the rows and columns of a [`DiscretizedOperator`] index.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisTag {
    /// Comparison eigenbasis with endpoint exponents `(g0, g1)`.
    Jacobi { g0: f64, g1: f64 },
    /// Quadrature samples; left rule `(g0, g1)`, right rule `(g0', g1')`.
    Nystrom {
        size: usize,
        left: (f64, f64),
        right: (f64, f64),
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedOperator {
    pub matrix: DMatrix<f64>,
    pub basis: BasisTag,
}

impl DiscretizedOperator {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// `||A - A^T|| / ||A||` in the Frobenius norm.
    pub fn symmetry_defect(&self) -> f64 {
        let a = &self.matrix;
        let norm = a.norm();
        if norm == 0.0 {
            return 0.0;
        }
        (a - a.transpose()).norm() / norm
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub g: CouplingVector,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Leading eigenvalues that moved by less than the tolerance at the refined size.
    pub converged_count: usize,
    pub basis_size: usize,
    /// Coefficient columns in the comparison basis, signed so that the
    /// eigenfunction divided by `w_t^{1/2}` is positive at `x = 0`.
    pub eigenvectors: DMatrix<f64>,
    /// `g` lies in `Pi_r`; outside it the eigenvector structure is conjectural.
    pub in_proven_regime: bool,
}

impl SpectrumResult {
    pub fn converged(&self) -> &[f64] {
        &self.eigenvalues[..self.converged_count]
    }

    /// Smallest gap among the converged eigenvalues.
    pub fn min_gap(&self) -> Option<f64> {
        self.converged()
            .windows(2)
            .map(|w| w[1] - w[0])
            .reduce(f64::min)
    }
}

fn check_tilde_pi(g: &CouplingVector) -> Result<()> {
    if g.membership().in_tilde_pi {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "g = {:?} outside Pi~: comparison basis is not square integrable",
            g.0
        )))
    }
}

/// Galerkin matrix of `H(g)` on the first `m` comparison eigenfunctions.
pub fn heun_matrix(params: &EllipticParams, g: &CouplingVector, m: usize) -> Result<DiscretizedOperator> {
    check_tilde_pi(g)?;
    if m < 2 {
        return Err(Error::Domain(format!("basis size {m} < 2")));
    }
    let [g0, g1, ..] = g.0;
    let basis = TrigBasis::new(g0, g1, params.r(), m)?;
    let rule = QuadratureRule::new(2 * m + PROJECTION_PAD, g0, g1, params.r())?;
    let mut phi = vec![0.0; m];
    let mut a = DMatrix::<f64>::zeros(m, m);
    for ((&x, &y), &u) in rule.nodes.iter().zip(rule.y.iter()).zip(rule.weights.iter()) {
        basis.reduced_into(y, &mut phi);
        let wv = u * potential_diff(params, g, x);
        for i in 0..m {
            let s = wv * phi[i];
            for j in i..m {
                a[(i, j)] -= s * phi[j];
            }
        }
    }
    for i in 0..m {
        a[(i, i)] += basis.eigenvalue(i);
        for j in 0..i {
            a[(i, j)] = a[(j, i)];
        }
    }
    Ok(DiscretizedOperator {
        matrix: a,
        basis: BasisTag::Jacobi { g0, g1 },
    })
}

/// Value at `x = 0` of each comparison basis function with `w_t^{1/2}` removed.
fn reduced_at_origin(g: &CouplingVector, r: f64, m: usize) -> Result<Vec<f64>> {
    Ok(TrigBasis::new(g.0[0], g.0[1], r, m)?.reduced(1.0, m))
}

fn fix_column_signs(vectors: &mut DMatrix<f64>, at_origin: &[f64]) {
    for mut col in vectors.column_iter_mut() {
        let d: f64 = col.iter().zip(at_origin).map(|(c, p)| c * p).sum();
        if d < 0.0 {
            col.neg_mut();
        }
    }
}

fn leading_agreement(a: &[f64], b: &[f64], tol: f64, scale: impl Fn(f64) -> f64) -> usize {
    a.iter()
        .zip(b.iter())
        .take_while(|(x, y)| (*x - *y).abs() <= tol * scale(**x))
        .count()
}

/// Eigenvalues of `H(g)` with the default certification tolerance.
pub fn heun_spectrum(params: &EllipticParams, g: &CouplingVector, m: usize) -> Result<SpectrumResult> {
    heun_spectrum_with(params, g, m, DEFAULT_CONVERGENCE_TOL)
}

pub fn heun_spectrum_with(
    params: &EllipticParams,
    g: &CouplingVector,
    m: usize,
    tol: f64,
) -> Result<SpectrumResult> {
    let op = heun_matrix(params, g, m)?;
    let (eigenvalues, mut eigenvectors) = sym_eigen(op.matrix);
    let (fine, _) = sym_eigen(heun_matrix(params, g, refined_size(m))?.matrix);
    let r2 = params.r() * params.r();
    let mut converged_count = leading_agreement(&eigenvalues, &fine, tol, |e| e.abs().max(r2));
    // a converged list must also be simple
    if let Some(k) = eigenvalues[..converged_count]
        .windows(2)
        .position(|w| w[1] - w[0] <= tol * w[1].abs().max(r2))
    {
        converged_count = k;
    }
    fix_column_signs(&mut eigenvectors, &reduced_at_origin(g, params.r(), m)?);
    Ok(SpectrumResult {
        g: *g,
        eigenvalues,
        converged_count,
        basis_size: m,
        eigenvectors,
        in_proven_regime: g.membership().in_pi_r,
    })
}

fn check_pi(g: &CouplingVector) -> Result<()> {
    if g.membership().in_pi {
        Ok(())
    } else {
        Err(Error::NotSquareIntegrable(g.0))
    }
}

/// Sampled kernel of `I(g)` on its two rules.
struct Nystrom {
    left: QuadratureRule,
    right: QuadratureRule,
    matrix: DMatrix<f64>,
}

fn nystrom(params: &EllipticParams, g: &CouplingVector, n: usize) -> Result<Nystrom> {
    check_pi(g)?;
    let dual = g.dual();
    let left = QuadratureRule::new(n, g.0[0], g.0[1], params.r())?;
    let right = QuadratureRule::new(n, dual.0[0], dual.0[1], params.r())?;
    let grid = Kernel::new(params, *g).regular_grid(&left, &right);
    let su: Vec<f64> = left.weights.iter().map(|u| u.sqrt()).collect();
    let sv: Vec<f64> = right.weights.iter().map(|v| v.sqrt()).collect();
    let matrix = DMatrix::from_fn(n, n, |i, j| su[i] * grid[i][j] * sv[j]);
    Ok(Nystrom { left, right, matrix })
}

/// `Q[i,k] = sqrt(u_i) N p_k(y_i)`: maps basis coefficients to weighted samples.
fn sample_map(rule: &QuadratureRule, g0: f64, g1: f64, m: usize) -> Result<DMatrix<f64>> {
    let basis = TrigBasis::new(g0, g1, rule.r, m)?;
    let mut q = DMatrix::zeros(rule.len(), m);
    let mut phi = vec![0.0; m];
    for (i, (&y, &u)) in rule.y.iter().zip(rule.weights.iter()).enumerate() {
        basis.reduced_into(y, &mut phi);
        let su = u.sqrt();
        for k in 0..m {
            q[(i, k)] = su * phi[k];
        }
    }
    Ok(q)
}

/// Nystrom matrix `A_ij = sqrt(u_i) Psi(x_i, y_j) sqrt(v_j)`, with the endpoint
/// powers carried by the rules.
pub fn hs_matrix(params: &EllipticParams, g: &CouplingVector, n: usize) -> Result<DiscretizedOperator> {
    let ny = nystrom(params, g, n)?;
    Ok(DiscretizedOperator {
        matrix: ny.matrix,
        basis: BasisTag::Nystrom {
            size: n,
            left: ny.left.endpoint_exponents,
            right: ny.right.endpoint_exponents,
        },
    })
}

/// Galerkin matrix `<phi_k(g), I(g) phi_l(g')>` with `m_left` rows and
/// `m_right` columns, integrals by an `n`-point rule on each side.
pub fn galerkin_hs(
    params: &EllipticParams,
    g: &CouplingVector,
    m_left: usize,
    m_right: usize,
    n: usize,
) -> Result<DMatrix<f64>> {
    let ny = nystrom(params, g, n)?;
    let dual = g.dual();
    let ql = sample_map(&ny.left, g.0[0], g.0[1], m_left)?;
    let qr = sample_map(&ny.right, dual.0[0], dual.0[1], m_right)?;
    Ok(ql.transpose() * ny.matrix * qr)
}

/// One signed coupling `mu_m = <b_m(g'), I(g') b_m(g)>`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedCoupling {
    pub m: usize,
    pub mu: f64,
    /// Index `n` with `nu_n` closest to `|mu_m|`.
    pub pairing: usize,
    /// `nu_{pairing}` has a neighbour within resolution.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    pub g: CouplingVector,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub converged_count: usize,
    pub quad_size: usize,
    pub left_nodes: Vec<f64>,
    pub right_nodes: Vec<f64>,
    /// Columns: left singular functions divided by `w_t(g0,g1)^{1/2}`, at `left_nodes`.
    pub left_reduced: DMatrix<f64>,
    /// Columns: right singular functions divided by `w_t(g0',g1')^{1/2}`, at `right_nodes`.
    pub right_reduced: DMatrix<f64>,
    /// Interpolated reduced left function at `x = 0`; positive after sign fixing.
    pub d_at_origin: Vec<f64>,
    pub signed: Vec<SignedCoupling>,
    pub rank_one: bool,
    pub in_proven_regime: bool,
}

impl SvdResult {
    pub fn converged(&self) -> &[f64] {
        &self.singular_values[..self.converged_count]
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.singular_values.iter().map(|v| v * v).sum()
    }

    /// `nu_n` strictly decreasing over the converged range.
    pub fn strictly_decreasing(&self) -> bool {
        self.converged().windows(2).all(|w| w[1] < w[0])
    }

    /// Every signed coupling pairs with its own index and is positive.
    pub fn pairing_is_identity(&self) -> bool {
        self.signed.iter().all(|s| s.pairing == s.m && s.mu > 0.0)
    }

    pub fn sign_convention_holds(&self) -> bool {
        self.d_at_origin[..self.converged_count].iter().all(|&d| d > 0.0)
    }
}

fn svd_values(params: &EllipticParams, g: &CouplingVector, n: usize) -> Result<Vec<f64>> {
    Ok(svd(nystrom(params, g, n)?.matrix).0)
}

/// Singular value decomposition of `I(g)` on `n`-point rules. For `s_g = 0`
/// the exact rank-one factorization is returned.
pub fn hs_svd(params: &EllipticParams, g: &CouplingVector, n: usize) -> Result<SvdResult> {
    hs_svd_with(params, g, n, DEFAULT_CONVERGENCE_TOL)
}

pub fn hs_svd_with(params: &EllipticParams, g: &CouplingVector, n: usize, tol: f64) -> Result<SvdResult> {
    check_pi(g)?;
    if n < 2 {
        return Err(Error::Domain(format!("quadrature size {n} < 2")));
    }
    if g.s_g().abs() <= RANK_ONE_TOL {
        return rank_one_svd(params, g, n);
    }
    let dual = g.dual();
    let ny = nystrom(params, g, n)?;
    let (values, mut u, mut v) = svd(ny.matrix.clone());
    let fine = svd_values(params, g, refined_size(n))?;
    let nu0 = values[0];
    let converged_count = leading_agreement(&values, &fine, tol, |x| x)
        .min(values.iter().take_while(|&&x| x > 0.0 && x > nu0 * 1e-14).count());

    let ql = sample_map(&ny.left, g.0[0], g.0[1], n)?;
    let at_origin = reduced_at_origin(g, params.r(), n)?;
    let coeffs = ql.transpose() * &u;
    let mut d_at_origin = Vec::with_capacity(n);
    for k in 0..n {
        let d: f64 = coeffs.column(k).iter().zip(&at_origin).map(|(c, p)| c * p).sum();
        if d < 0.0 {
            u.column_mut(k).neg_mut();
            v.column_mut(k).neg_mut();
        }
        d_at_origin.push(d.abs());
    }
    let left_reduced = DMatrix::from_fn(n, n, |i, k| u[(i, k)] / ny.left.weights[i].sqrt());
    let right_reduced = DMatrix::from_fn(n, n, |j, k| v[(j, k)] / ny.right.weights[j].sqrt());

    let signed = signed_couplings(params, g, &dual, &ny, &values[..converged_count], tol)?;
    Ok(SvdResult {
        g: *g,
        singular_values: values,
        converged_count,
        quad_size: n,
        left_nodes: ny.left.nodes.clone(),
        right_nodes: ny.right.nodes.clone(),
        left_reduced,
        right_reduced,
        d_at_origin,
        signed,
        rank_one: false,
        in_proven_regime: g.membership().in_pi_r,
    })
}

fn pair_index(nu: &[f64], mu: f64, tol: f64) -> (usize, bool) {
    let target = mu.abs();
    let (best, _) = nu
        .iter()
        .enumerate()
        .map(|(i, v)| (i, (v - target).abs()))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    // degeneracy is relative: nu_n decays geometrically, so an absolute
    // resolution would merge the whole tail
    let miss = (nu[best] - target).abs();
    let close = |i: usize| {
        let gap = (nu[i] - nu[best]).abs();
        gap <= tol.sqrt() * nu[best] || miss >= 0.25 * gap
    };
    let ambiguous = (best > 0 && close(best - 1)) || (best + 1 < nu.len() && close(best + 1));
    (best, ambiguous)
}

fn signed_couplings(
    params: &EllipticParams,
    g: &CouplingVector,
    dual: &CouplingVector,
    ny: &Nystrom,
    nu: &[f64],
    tol: f64,
) -> Result<Vec<SignedCoupling>> {
    let n = ny.left.len();
    let h = heun_spectrum_with(params, g, n, tol)?;
    let hd = heun_spectrum_with(params, dual, n, tol)?;
    let ql = sample_map(&ny.left, g.0[0], g.0[1], n)?;
    let qr = sample_map(&ny.right, dual.0[0], dual.0[1], n)?;
    // <b_m(g'), I(g') b_m(g)> = <b_m(g), I(g) b_m(g')>
    let galerkin = ql.transpose() * &ny.matrix * qr;
    let count = h.converged_count.min(hd.converged_count).min(nu.len());
    Ok((0..count)
        .map(|m| {
            let mu = h.eigenvectors.column(m).dot(&(&galerkin * hd.eigenvectors.column(m)));
            let (pairing, ambiguous) = pair_index(nu, mu, tol);
            SignedCoupling {
                m,
                mu,
                pairing,
                ambiguous,
            }
        })
        .collect())
}

/// `||w(g)^{1/2}||^2` and the reduced samples `(w/w_t)^{1/2}` on `rule`.
fn sqrt_weight_samples(params: &EllipticParams, g: &CouplingVector, rule: &QuadratureRule) -> (f64, Vec<f64>) {
    let samples: Vec<f64> = rule
        .nodes
        .iter()
        .map(|&x| (0.5 * ln_weight_ratio(params, g, x)).exp())
        .collect();
    let norm2 = samples.iter().zip(&rule.weights).map(|(s, u)| u * s * s).sum();
    (norm2, samples)
}

fn rank_one_svd(params: &EllipticParams, g: &CouplingVector, n: usize) -> Result<SvdResult> {
    let dual = g.dual();
    let left = QuadratureRule::new(n, g.0[0], g.0[1], params.r())?;
    let right = QuadratureRule::new(n, dual.0[0], dual.0[1], params.r())?;
    let (nl, sl) = sqrt_weight_samples(params, g, &left);
    let (nr, sr) = sqrt_weight_samples(params, &dual, &right);
    let (nl, nr) = (nl.sqrt(), nr.sqrt());
    let left_reduced = DMatrix::from_fn(n, 1, |i, _| sl[i] / nl);
    let right_reduced = DMatrix::from_fn(n, 1, |j, _| sr[j] / nr);
    // (w/w_t)^{1/2} at x = 0 is the positive limit of the smooth factor
    let d0 = (0.5 * ln_weight_ratio(params, g, 0.0)).exp() / nl;
    Ok(SvdResult {
        g: *g,
        singular_values: vec![nl * nr],
        converged_count: 1,
        quad_size: n,
        left_nodes: left.nodes,
        right_nodes: right.nodes,
        left_reduced,
        right_reduced,
        d_at_origin: vec![d0],
        signed: vec![SignedCoupling {
            m: 0,
            mu: nl * nr,
            pairing: 0,
            ambiguous: false,
        }],
        rank_one: true,
        in_proven_regime: false,
    })
}

/// Result of pushing `b_m(g)` through `I(g')`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transport {
    pub m: usize,
    /// `E_m(g)`.
    pub energy: f64,
    /// Nodes of the `g'` rule.
    pub nodes: Vec<f64>,
    /// Normalized `I(g') b_m(g)` divided by `w_t(g0',g1')^{1/2}`, at `nodes`.
    pub reduced_samples: Vec<f64>,
    /// Normalized coefficients in the `g'` comparison basis, signed by the origin convention.
    pub coefficients: Vec<f64>,
    /// `mu_m`: the coefficient of the transported vector along `b_m(g')`.
    pub mu: f64,
    /// `||I(g') b_m(g)||`.
    pub norm: f64,
    /// `||(H(g') - E_m(g)) t|| / max(|E_m|, r^2)` for the normalized transport `t`.
    pub residual: f64,
    /// Distance from the signed eigenvector `b_m(g')`.
    pub eigenvector_distance: f64,
    /// The matching singular value has a near-degenerate neighbour.
    pub ambiguous: bool,
}

/// Apply the discretized `I(g')` to the `m`-th eigenvector of `H(g)` and test
/// whether the image is an eigenvector of `H(g')` with the same eigenvalue.
pub fn eigenfunction_transport(
    params: &EllipticParams,
    g: &CouplingVector,
    m: usize,
    n: usize,
    basis_size: usize,
) -> Result<Transport> {
    check_pi(g)?;
    let dual = g.dual();
    let h = heun_spectrum(params, g, basis_size)?;
    let hd = heun_spectrum(params, &dual, basis_size)?;
    if m >= h.converged_count.min(hd.converged_count) {
        return Err(Error::Precondition(format!(
            "m = {m} beyond the converged range ({}, {})",
            h.converged_count, hd.converged_count
        )));
    }
    // I(g') has left rule (g0', g1') and right rule (g0, g1)
    let ny = nystrom(params, &dual, n)?;
    let ql = sample_map(&ny.left, dual.0[0], dual.0[1], basis_size)?;
    let qr = sample_map(&ny.right, g.0[0], g.0[1], basis_size)?;
    let weighted = &ny.matrix * (&qr * h.eigenvectors.column(m));
    let mut t: DVector<f64> = ql.transpose() * &weighted;
    let norm = t.norm();
    if norm == 0.0 {
        return Err(Error::IllConditioned(0.0));
    }
    t /= norm;
    let at_origin = reduced_at_origin(&dual, params.r(), basis_size)?;
    let d: f64 = t.iter().zip(&at_origin).map(|(c, p)| c * p).sum();
    if d < 0.0 {
        t.neg_mut();
    }
    let mut samples: Vec<f64> = weighted
        .iter()
        .zip(&ny.left.weights)
        .map(|(s, u)| s / (u.sqrt() * norm))
        .collect();
    if d < 0.0 {
        samples.iter_mut().for_each(|s| *s = -*s);
    }
    let target = hd.eigenvectors.column(m);
    let mu = target.dot(&t) * norm * if d < 0.0 { -1.0 } else { 1.0 };
    let energy = h.eigenvalues[m];
    let b = heun_matrix(params, &dual, basis_size)?.matrix;
    let r2 = params.r() * params.r();
    let residual = (&b * &t - &t * energy).norm() / energy.abs().max(r2);
    let eigenvector_distance = (&t - target).norm();

    let nu = svd_values(params, g, n)?;
    let (_, ambiguous) = pair_index(&nu, mu, DEFAULT_CONVERGENCE_TOL);
    Ok(Transport {
        m,
        energy,
        nodes: ny.left.nodes.clone(),
        reduced_samples: samples,
        coefficients: t.iter().copied().collect(),
        mu,
        norm,
        residual,
        eigenvector_distance,
        ambiguous,
    })
}

/// `(wp(x), wp(x + w1), wp(x + w2), wp(x + w3))` for interior real `x`.
fn shifted_wp(params: &EllipticParams, x: f64) -> [f64; 4] {
    let w1 = params.omega1();
    let r2 = params.r() * params.r();
    let t = params.r() * x;
    [
        r2 / (t.sin() * t.sin()) + params.wp_regularized(x),
        r2 / (t.cos() * t.cos()) + params.wp_regularized(w1 - x),
        params.wp_tilde_real(x),
        params.wp_tilde_real(w1 - x),
    ]
}

/// Checks for the rank-one couplings `s_g = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOne {
    /// `sum_{j=1}^3 g_j e_j (g_j + 2 g0)`.
    pub e0: f64,
    /// Same formula at `g'`.
    pub e0_dual: f64,
    /// Lowest Galerkin eigenvalue of `H(g)`.
    pub galerkin_e0: f64,
    /// Spread (max minus min) of the constant function over an interior grid.
    pub identity_residual: f64,
    /// Mean of the same function over the grid.
    pub identity_value: f64,
    /// `||(H(g) - E_0) w^{1/2}|| / max(|E_0|, r^2)` in the comparison basis.
    pub ground_state_residual: f64,
}

/// The closed-form ground energy `sum_{j=1}^3 g_j e_j (g_j + 2 g0)`.
pub fn rank_one_energy(params: &EllipticParams, g: &CouplingVector) -> f64 {
    let e = params.e();
    let g0 = g.0[0];
    (1..4).map(|j| g.0[j] * e[j - 1] * (g.0[j] + 2.0 * g0)).sum()
}

/// `sum g_t^2 wp(x+w_t) - (g0 s'/s(x) + g1 s'/s(x+w1) + g2 R'/R(x) + g3 R'/R(x+w1))^2`.
pub fn rank_one_identity(params: &EllipticParams, g: &CouplingVector, x: f64) -> f64 {
    let [g0, g1, g2, g3] = g.0;
    let w1 = params.omega1();
    let wp = shifted_wp(params, x);
    let quad: f64 = g.0.iter().zip(wp.iter()).map(|(c, p)| c * c * p).sum();
    // s'/s and R'/R are odd with period pi/r, so their value at x + w1 is minus that at w1 - x
    let lin = g0 * params.dlog_s_real(x) - g1 * params.dlog_s_real(w1 - x) + g2 * params.dlog_r_real(x)
        - g3 * params.dlog_r_real(w1 - x);
    quad - lin * lin
}

/// Grid points in `[0.1 w1, 0.9 w1]` used for the functional identity.
const IDENTITY_GRID: usize = 81;

pub fn rank_one_case(params: &EllipticParams, g: &CouplingVector, basis_size: usize) -> Result<RankOne> {
    if g.s_g().abs() > RANK_ONE_TOL {
        return Err(Error::Precondition(format!("s_g = {} is not zero", g.s_g())));
    }
    check_pi(g)?;
    let w1 = params.omega1();
    let values: Vec<f64> = (0..IDENTITY_GRID)
        .map(|k| {
            let x = w1 * (0.1 + 0.8 * k as f64 / (IDENTITY_GRID - 1) as f64);
            rank_one_identity(params, g, x)
        })
        .collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let identity_value = values.iter().sum::<f64>() / values.len() as f64;

    let e0 = rank_one_energy(params, g);
    let e0_dual = rank_one_energy(params, &g.dual());
    let b = heun_matrix(params, g, basis_size)?.matrix;
    let (eig, _) = sym_eigen(b.clone());

    let rule = QuadratureRule::new(2 * basis_size + PROJECTION_PAD, g.0[0], g.0[1], params.r())?;
    let (_, samples) = sqrt_weight_samples(params, g, &rule);
    let q = sample_map(&rule, g.0[0], g.0[1], basis_size)?;
    let weighted = DVector::from_iterator(
        rule.len(),
        samples.iter().zip(&rule.weights).map(|(s, u)| s * u.sqrt()),
    );
    let mut c: DVector<f64> = q.transpose() * weighted;
    c /= c.norm();
    let r2 = params.r() * params.r();
    let ground_state_residual = (&b * &c - &c * e0).norm() / e0.abs().max(r2);
    Ok(RankOne {
        e0,
        e0_dual,
        galerkin_e0: eig[0],
        identity_residual: hi - lo,
        identity_value,
        ground_state_residual,
    })
}

/// Relative commutator `||[(B + s)^{-1}, T]|| / (||(B + s)^{-1}|| ||T||)` of the
/// Galerkin `H(g)` matrix with `T = I(g) I(g)^*` compressed to the same basis.
pub fn commutator_defect(params: &EllipticParams, g: &CouplingVector, m: usize, n: usize) -> Result<f64> {
    let b = heun_matrix(params, g, m)?.matrix;
    let gm = galerkin_hs(params, g, m, n, n)?;
    let t = &gm * gm.transpose();
    let (eig, _) = sym_eigen(b.clone());
    let shift = (-eig[0]).max(0.0) + params.r() * params.r();
    let resolvent = (b + DMatrix::identity(m, m) * shift)
        .cholesky()
        .ok_or(Error::IllConditioned(shift))?
        .inverse();
    let comm = &resolvent * &t - &t * &resolvent;
    Ok(comm.norm() / (resolvent.norm() * t.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::lattice_constants;
    use core::f64::consts::PI;

    fn params() -> EllipticParams {
        lattice_constants(1.0, 1.0, 1e-15).unwrap()
    }

    #[test]
    fn pairing_resolves_geometric_tails() {
        let nu: Vec<f64> = (0..30).map(|n| (-(n as f64)).exp()).collect();
        assert_eq!(pair_index(&nu, -nu[25] * (1.0 + 1e-9), 1e-9), (25, false));
        assert!(pair_index(&nu, 0.5 * (nu[3] + nu[4]), 1e-9).1);
        let cluster = [1.0, 0.5, 0.5 * (1.0 + 1e-6), 0.1];
        assert!(pair_index(&cluster, 0.5, 1e-9).1);
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn free_case_is_diagonal() {
        let pr = params();
        let a = heun_matrix(&pr, &CouplingVector::new(0.0, 0.0, 1.0, 1.0), 12).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                let expect = if i == j { 4.0 * (i * i) as f64 } else { 0.0 };
                assert_eq!(a.matrix[(i, j)], expect);
            }
        }
        let a = heun_matrix(&pr, &CouplingVector::new(1.0, 1.0, 0.0, 0.0), 12).unwrap();
        for i in 0..12 {
            assert_eq!(a.matrix[(i, i)], (2.0 * i as f64 + 2.0).powi(2));
        }
    }

    #[test]
    fn outside_tilde_pi_rejected() {
        let pr = params();
        let g = CouplingVector::new(-0.6, 0.0, 0.0, 0.0);
        assert!(matches!(heun_matrix(&pr, &g, 8), Err(Error::Domain(_))));
        assert!(heun_matrix(&pr, &CouplingVector::new(0.0, 0.0, 0.0, 0.0), 1).is_err());
    }

    #[test]
    fn heun_matrix_symmetric() {
        let pr = params();
        let a = heun_matrix(&pr, &CouplingVector::new(1.5, 0.5, 0.5, 0.5), 48).unwrap();
        assert!(a.symmetry_defect() < 1e-13);
    }

    #[test]
    fn isospectral_case() {
        let pr = params();
        let s = heun_spectrum(&pr, &CouplingVector::new(1.5, 0.5, 0.5, 0.5), 48).unwrap();
        assert!(s.converged_count >= 7);
        for n in 0..7 {
            let e = (2.0 * n as f64 + 2.0).powi(2);
            assert!(rel(s.eigenvalues[n], e) < 1e-8, "n={n}: {}", s.eigenvalues[n]);
        }
        assert!(s.in_proven_regime);
    }

    #[test]
    fn free_singular_values() {
        let pr = params();
        let res = hs_svd(&pr, &CouplingVector::new(0.0, 0.0, 1.0, 1.0), 48).unwrap();
        for n in 0..9 {
            let expect = PI / (pr.p() * (n as f64).cosh());
            assert!(rel(res.singular_values[n], expect) < 1e-8);
        }
        assert!(res.sign_convention_holds());
        assert!(res.strictly_decreasing());
        assert!(res.pairing_is_identity());
    }

    #[test]
    fn refuses_outside_pi() {
        let pr = params();
        let g = CouplingVector::new(0.0, 0.0, 0.0, 1.0);
        assert!(matches!(hs_svd(&pr, &g, 16), Err(Error::NotSquareIntegrable(_))));
    }

    #[test]
    fn rank_one_precondition() {
        let pr = params();
        let g = CouplingVector::new(0.5, 0.0, 0.0, 0.0);
        assert!(matches!(rank_one_case(&pr, &g, 16), Err(Error::Precondition(_))));
        let zero = rank_one_case(&pr, &CouplingVector::new(0.0, 0.0, 0.0, 0.0), 16).unwrap();
        assert_eq!(zero.e0, 0.0);
        assert_eq!(zero.identity_residual, 0.0);
    }

    #[test]
    fn rank_one_svd_matches_quadrature() {
        let pr = params();
        let g = CouplingVector::new(0.3, -0.3, 0.3, -0.3);
        let res = hs_svd(&pr, &g, 32).unwrap();
        assert!(res.rank_one);
        let a = svd(hs_matrix(&pr, &g, 32).unwrap().matrix).0;
        assert!(rel(a[0], res.singular_values[0]) < 1e-12);
        assert!(a[1] < 1e-12 * a[0]);
    }

    #[test]
    fn transport_ground_state() {
        let pr = params();
        let t = eigenfunction_transport(&pr, &CouplingVector::new(1.0, 1.0, 0.0, 1.0), 0, 48, 48).unwrap();
        assert!(rel(t.energy, 4.0) < 1e-8);
        assert!(t.residual < 1e-8);
        assert!(t.mu > 0.0);
        assert!(t.eigenvector_distance < 1e-6);
    }

    #[test]
    fn commutator_shrinks() {
        // at alpha = 1 the defect reaches rounding level by M = 24
        let pr = lattice_constants(1.0, 0.5, 1e-15).unwrap();
        let g = CouplingVector::new(0.9, 0.3, 0.7, 0.2);
        let d: Vec<f64> = [16, 24, 32]
            .iter()
            .map(|&m| commutator_defect(&pr, &g, m, 96).unwrap())
            .collect();
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    }
}
