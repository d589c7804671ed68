//! Coframe exterior calculus.
//!
//! The crate is layered: [`expr`] is a small symbolic scalar kernel, [`forms`]
//! builds the exterior algebra of a coframe on top of it, [`frames`] derives
//! connections, torsion, curvature and nonmetricity, [`dynamics`] evaluates
//! the teleparallel Lagrangian and field equations, and [`transport`]
//! integrates parallel transport and geodesics. [`models`], [`checks`] and
//! [`report`] back the command-line front end.

pub mod checks;
pub mod dynamics;
pub mod expr;
pub mod forms;
pub mod frames;
pub mod models;
pub mod par;
pub mod report;
pub mod transport;

use expr::ExprError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("operands live on different coframes")]
    CoframeMismatch,
    #[error("operation needs dimension {expected}, coframe has {found}")]
    Dimension { expected: usize, found: usize },
    #[error("singular coframe: {0}")]
    Singular(String),
    #[error("invalid chart: {0}")]
    Chart(String),
    #[error("form is not homogeneous")]
    Inhomogeneous,
    #[error("curve leaves the valid region at s = {s}")]
    DomainExit { s: f64 },
    #[error("loop is not closed: endpoints differ by {gap:e}")]
    OpenLoop { gap: f64 },
    #[error("invalid model: {0}")]
    Model(String),
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
