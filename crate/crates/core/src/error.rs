use crate::materials::MaterialError;
use crate::optics::OpticsError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("accuracy not reached: best estimate {value:e} with error {error:e}")]
    AccuracyNotReached { value: f64, error: f64 },
    #[error("matsubara divergence: sum not converged after {terms} terms")]
    MatsubaraDivergence { terms: u64 },
    #[error("velocity guard: |V| = {speed} m/s exceeds {limit} m/s")]
    VelocityGuard { speed: f64, limit: f64 },
    #[error("not in rarified regime: {0}")]
    NotRarified(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
