//! Crate-level error with the CLI exit-code mapping.

use thiserror::Error;

use crate::config::ConfigError;
use crate::dual::DualError;
use crate::exprfield::ExprError;
use crate::groundstate::GroundStateError;
use crate::landscape::LandscapeError;
use crate::model::ModelError;
use crate::perturb::PerturbError;
use crate::radial::RadialError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_FAIL: i32 = 4;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error(transparent)]
    GroundState(#[from] GroundStateError),
    #[error(transparent)]
    Dual(#[from] DualError),
    #[error(transparent)]
    Landscape(#[from] LandscapeError),
    #[error(transparent)]
    Perturb(#[from] PerturbError),
    #[error("io: {context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(ConfigError::Read { .. }) | Error::Io { .. } => EXIT_IO,
            Error::Config(_) | Error::Model(_) | Error::Expr(_) => EXIT_VALIDATION,
            Error::Radial(e) => match e {
                RadialError::SingularSystem => EXIT_DIVERGENCE,
                _ => EXIT_VALIDATION,
            },
            Error::GroundState(e) => groundstate_code(e),
            Error::Dual(e) => match e {
                DualError::Radial { .. } | DualError::RootSearch { .. } => EXIT_DIVERGENCE,
                DualError::NotInHPlus { .. } => EXIT_VALIDATION,
            },
            Error::Landscape(e) => match e {
                LandscapeError::GroundState { source, .. } => groundstate_code(source),
                LandscapeError::NoConvergedRoots { .. } | LandscapeError::Dual { .. } => EXIT_DIVERGENCE,
                _ => EXIT_VALIDATION,
            },
            Error::Perturb(e) => match e {
                PerturbError::Newton { .. } | PerturbError::SpikeLost { .. } => EXIT_DIVERGENCE,
                PerturbError::Landscape { source, .. } => Error::Landscape(source.clone()).exit_code(),
                _ => EXIT_VALIDATION,
            },
        }
    }
}

fn groundstate_code(e: &GroundStateError) -> i32 {
    match e {
        GroundStateError::Newton { .. }
        | GroundStateError::PositivityLost { .. }
        | GroundStateError::WindowTooNoisy { .. } => EXIT_DIVERGENCE,
        _ => EXIT_VALIDATION,
    }
}

pub type Result<T> = std::result::Result<T, Error>;
