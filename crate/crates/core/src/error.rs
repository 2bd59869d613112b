use alloc::string::String;

/// Everything that can go wrong while building or evaluating an operator.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// `r * alpha` is so small that the nome is too close to 1.
    #[error("ill-conditioned lattice: r*alpha = {0} is below the supported minimum {min}", min = crate::elliptic::MIN_R_ALPHA)]
    IllConditioned(f64),

    #[error("Fourier series evaluated outside its strip of convergence (Im z = {im}, limit {limit})")]
    OutsideStrip { im: f64, limit: f64 },

    #[error("pole at z = {re} + {im}i")]
    Pole { re: f64, im: f64 },

    #[error("kernel is not square integrable for g = {0:?}")]
    NotSquareIntegrable([f64; 4]),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;
