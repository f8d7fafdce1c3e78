use thiserror::Error;

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("trust delta {0} outside [-0.1, 0.1]")]
    DeltaOutOfRange(f64),

    #[error("defense plan violates stage discipline: {0}")]
    StageViolation(String),

    #[error("defense registry is empty")]
    EmptyRegistry,

    #[error("trust store: {0}")]
    TrustStore(String),

    #[error(transparent)]
    Core(#[from] ragward_core::CoreError),

    #[error(transparent)]
    Defense(#[from] ragward_defense::DefenseError),
}
