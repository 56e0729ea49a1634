use thiserror::Error;

/// Failure modes of the solver. `Config` maps to CLI exit code 1, the
/// numerical variants to exit code 2.
#[derive(Error, Debug)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error(
        "velocity-domain overflow: u = ({u1:.6}, {u2:.6}) at x = ({x:.4}, {y:.4}) \
         leaves the safe margin [{lo:.4}, {hi:.4}]; enlarge the velocity domain"
    )]
    VelocityDomainOverflow {
        u1: f64,
        u2: f64,
        x: f64,
        y: f64,
        lo: f64,
        hi: f64,
    },

    #[error("S-step matrix singular (est. condition number {cond:.3e}); dt*rho/eps is too close to 1")]
    SStepSingular { cond: f64 },

    #[error("density positivity lost: min rho = {min_rho:.6e} at step time t = {t:.6}")]
    DensityPositivity { min_rho: f64, t: f64 },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
