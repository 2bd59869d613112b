//! Coupling algebra: `g <-> lambda <-> c`, the dual map, the permutation
//! group acting on `c`, and the nested admissible parameter sets.

use alloc::vec::Vec;

/// The four couplings `(g0, g1, g2, g3)` of the Heun potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingVector(pub [f64; 4]);

/// Rows of the reflection `1 - 2 u u^T` with `u = (1,-1,1,-1)/2`.
const DUAL_MATRIX: [[f64; 4]; 4] = [
    [0.5, 0.5, -0.5, 0.5],
    [0.5, 0.5, 0.5, -0.5],
    [-0.5, 0.5, 0.5, 0.5],
    [0.5, -0.5, 0.5, 0.5],
];

impl CouplingVector {
    pub const fn new(g0: f64, g1: f64, g2: f64, g3: f64) -> Self {
        Self([g0, g1, g2, g3])
    }

    pub fn g(&self) -> [f64; 4] {
        self.0
    }

    /// `lambda = g - (1,1,1,1)/2`.
    pub fn lambda(&self) -> [f64; 4] {
        self.0.map(|g| g - 0.5)
    }

    /// `c = (l0 + l3, l1 + l2, l1 - l2, l0 - l3)`.
    pub fn to_c(&self) -> [f64; 4] {
        let l = self.lambda();
        [l[0] + l[3], l[1] + l[2], l[1] - l[2], l[0] - l[3]]
    }

    /// Inverse of [`Self::to_c`]. Exact for dyadic input.
    pub fn from_c(c: [f64; 4]) -> Self {
        let l0 = 0.5 * (c[0] + c[3]);
        let l3 = 0.5 * (c[0] - c[3]);
        let l1 = 0.5 * (c[1] + c[2]);
        let l2 = 0.5 * (c[1] - c[2]);
        Self([l0 + 0.5, l1 + 0.5, l2 + 0.5, l3 + 0.5])
    }

    /// `s_g = (g0 + g1 + g2 + g3) / 2`; shared by `g` and its dual.
    pub fn s_g(&self) -> f64 {
        0.5 * self.0.iter().sum::<f64>()
    }

    /// The dual couplings `g' = J g`.
    pub fn dual(&self) -> Self {
        let mut out = [0.0; 4];
        for (o, row) in out.iter_mut().zip(DUAL_MATRIX.iter()) {
            *o = row.iter().zip(self.0.iter()).map(|(a, b)| a * b).sum();
        }
        Self(out)
    }

    pub fn is_self_dual(&self) -> bool {
        self.0[0] + self.0[2] == self.0[1] + self.0[3]
    }

    /// `(g0, g1, g2, g3) -> (g1, g0, g3, g2)`.
    pub fn mirror(&self) -> Self {
        let g = self.0;
        Self([g[1], g[0], g[3], g[2]])
    }

    /// `g2 -> 1 - g2`.
    pub fn flip_g2(&self) -> Self {
        let mut g = self.0;
        g[2] = 1.0 - g[2];
        Self(g)
    }

    /// `g3 -> 1 - g3`.
    pub fn flip_g3(&self) -> Self {
        let mut g = self.0;
        g[3] = 1.0 - g[3];
        Self(g)
    }

    /// Image under the third coset representative `(c0,c1,c2,c3) -> (c0,c2,c3,c1)`,
    /// written out directly in `g`.
    pub fn tilde(&self) -> Self {
        let [g0, g1, g2, g3] = self.0;
        Self([
            0.5 * (g0 + g1 + g2 + g3 - 1.0),
            0.5 * (g0 + g1 - g2 - g3 + 1.0),
            0.5 * (-g0 + g1 - g2 + g3 + 1.0),
            0.5 * (g0 - g1 - g2 + g3 + 1.0),
        ])
    }

    /// Apply a permutation of the `c` couplings.
    pub fn act(&self, w: &GroupElement) -> Self {
        Self::from_c(w.apply(self.to_c()))
    }

    pub fn membership(&self) -> MembershipFlags {
        membership(self)
    }
}

impl From<[f64; 4]> for CouplingVector {
    fn from(g: [f64; 4]) -> Self {
        Self(g)
    }
}

/// Slack of the defining strict inequalities of each parameter set.
/// A set contains `g` exactly when its margin is positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margins {
    pub tilde_pi: f64,
    pub pi: f64,
    pub pi_r: f64,
    pub pi_g: f64,
}

/// Membership in the chain `Pi_G < Pi_r < Pi < tilde Pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipFlags {
    pub in_tilde_pi: bool,
    pub in_pi: bool,
    pub in_pi_r: bool,
    pub in_pi_g: bool,
    /// `Pi_G` decided from the six symmetric constraints `c_mu + c_nu > -2`.
    pub in_pi_g_from_c: bool,
    pub margins: Margins,
}

/// Evaluate the defining inequalities in `g`-form and, for `Pi_G`, also in
/// `c`-form.
pub fn membership(g: &CouplingVector) -> MembershipFlags {
    let [g0, g1, g2, g3] = g.0;
    let dual = g.dual().0;
    // Each slack is scaled so that it equals the corresponding c-pair sum + 2.
    let tilde_pi = (2.0 * g0 + 1.0).min(2.0 * g1 + 1.0);
    let pi = tilde_pi.min(2.0 * dual[0] + 1.0).min(2.0 * dual[1] + 1.0);
    let pi_r = pi.min(2.0 * g.s_g());
    let pi_g = pi_r.min(g0 + g1 - g2 - g3 + 2.0);

    let c = g.to_c();
    let mut c_margin = f64::INFINITY;
    for mu in 0..4 {
        for nu in (mu + 1)..4 {
            c_margin = c_margin.min(c[mu] + c[nu] + 2.0);
        }
    }

    let in_tilde_pi = tilde_pi > 0.0;
    let in_pi = pi > 0.0;
    let in_pi_r = pi_r > 0.0;
    let in_pi_g = pi_g > 0.0;
    MembershipFlags {
        in_tilde_pi,
        in_pi,
        in_pi_r,
        in_pi_g,
        in_pi_g_from_c: c_margin > 0.0,
        margins: Margins {
            tilde_pi,
            pi,
            pi_r,
            pi_g,
        },
    }
}

/// The dual map `g -> J g`.
pub fn dual(g: &CouplingVector) -> CouplingVector {
    g.dual()
}

/// A permutation of the four `c` couplings, in one-line notation:
/// the image of `c` has `c[perm[i]]` in slot `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    pub perm: [u8; 4],
}

impl GroupElement {
    pub const IDENTITY: Self = Self { perm: [0, 1, 2, 3] };
    /// `c2 <-> c3`, the dual map.
    pub const DUAL: Self = Self { perm: [0, 1, 3, 2] };
    /// `c1 <-> c2`, i.e. `g2 -> 1 - g2`.
    pub const FLIP_G2: Self = Self { perm: [0, 2, 1, 3] };
    /// `c0 <-> c3`, i.e. `g3 -> 1 - g3`.
    pub const FLIP_G3: Self = Self { perm: [3, 1, 2, 0] };
    /// `(c0,c1,c2,c3) -> (c1,c0,c3,c2)`.
    pub const MIRROR: Self = Self { perm: [1, 0, 3, 2] };
    /// `(c0,c1,c2,c3) -> (c0,c2,c3,c1)`.
    pub const TILDE: Self = Self { perm: [0, 2, 3, 1] };

    pub fn apply(&self, c: [f64; 4]) -> [f64; 4] {
        self.perm.map(|i| c[i as usize])
    }

    /// Permutation product `self o other`. Acting on `c`, this applies
    /// `self` first and `other` second.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            perm: other.perm.map(|i| self.perm[i as usize]),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut perm = [0u8; 4];
        for (i, &p) in self.perm.iter().enumerate() {
            perm[p as usize] = i as u8;
        }
        Self { perm }
    }

    /// Name of the distinguished elements, if any.
    pub fn name(&self) -> Option<&'static str> {
        match *self {
            Self::IDENTITY => Some("identity"),
            Self::DUAL => Some("dual"),
            Self::FLIP_G2 => Some("flip-g2"),
            Self::FLIP_G3 => Some("flip-g3"),
            Self::MIRROR => Some("mirror"),
            Self::TILDE => Some("tilde"),
            _ => None,
        }
    }

    /// All 24 permutations, lexicographic in one-line notation.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::with_capacity(24);
        for a in 0..4u8 {
            for b in 0..4u8 {
                for c in 0..4u8 {
                    for d in 0..4u8 {
                        let perm = [a, b, c, d];
                        let mut seen = [false; 4];
                        if perm.iter().all(|&x| !core::mem::replace(&mut seen[x as usize], true)) {
                            out.push(Self { perm });
                        }
                    }
                }
            }
        }
        out
    }
}

/// One image in an orbit, with its membership recorded rather than assumed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitElement {
    pub element: GroupElement,
    pub image: CouplingVector,
    pub membership: MembershipFlags,
}

/// The 24 images of `g` under all `c`-permutations, in lexicographic order.
pub fn s4_orbit(g: &CouplingVector) -> Vec<OrbitElement> {
    GroupElement::all()
        .into_iter()
        .map(|element| {
            let image = g.act(&element);
            OrbitElement {
                element,
                image,
                membership: image.membership(),
            }
        })
        .collect()
}
