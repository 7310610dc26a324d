use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("validation failed:\n{0}")]
    Invalid(String),
    #[error(transparent)]
    Library(#[from] aperiodic_spectra::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl Failure {
    /// 2 for rules that fail validation, 1 otherwise.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Invalid(_) | Failure::Library(aperiodic_spectra::Error::Validation(_)) => ExitCode::from(2),
            _ => ExitCode::from(1),
        }
    }
}
