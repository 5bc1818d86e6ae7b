use thiserror::Error;

use crate::real::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("jet centers differ: {left} vs {right}")]
    CenterMismatch { left: C64, right: C64 },

    #[error("jet has no derivative information left to differentiate")]
    OrderExhausted,

    #[error("division by a jet whose value is zero")]
    ZeroDivisor,

    #[error("{function}: value {value} lies on the branch cut (-inf, 0]")]
    BranchCut { function: &'static str, value: C64 },

    #[error("map `{map}`: point {point} is outside its domain {domain}")]
    Domain {
        map: String,
        point: C64,
        domain: &'static str,
    },

    #[error("map `{map}`: pole at {point}")]
    Pole { map: String, point: C64 },

    #[error("invalid map parameters: {0}")]
    InvalidParameter(String),

    #[error("first derivative vanishes at {0}")]
    VanishingDerivative(C64),

    #[error("horizon violation at z = {z}, t = {t}: {reason}")]
    HorizonViolation { z: C64, t: f64, reason: String },

    #[error("no horizon at level {k}")]
    NoHorizon { k: f64 },

    #[error("RK4 stage left the half-plane at t = {t}: {z}")]
    StepRejected { z: C64, t: f64 },

    #[error("degenerate sample at {z}: |dF/dz| = {d_z:.3e}")]
    Degenerate { z: C64, d_z: f64 },

    #[error("quadrature did not converge: last estimates {previous:.12e} and {last:.12e}")]
    Quadrature { previous: f64, last: f64 },

    #[error("outer extension not configured (Re z = {0} lies beyond the inner strip)")]
    OuterNotConfigured(f64),

    #[error("evaluation failed at {point}: {source}")]
    At {
        point: C64,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Parse(String),
}

impl Error {
    pub fn at(self, point: C64) -> Self {
        match self {
            e @ Error::At { .. } => e,
            other => Error::At {
                point,
                source: Box::new(other),
            },
        }
    }

    /// Strips location wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::At { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
