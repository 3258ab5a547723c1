//! File formats, verification suites, errata report and command-line front
//! end for `gtl-core`.

pub mod cli;
pub mod doc;
pub mod errata;
pub mod export;
pub mod report;
pub mod suite;

/// Failure classes of the command-line tool, each with its exit status.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    /// Usage, configuration or input-format problem (exit 2).
    #[error("{0}")]
    Config(String),
    /// An asserted check, monitor bound or run failed (exit 1).
    #[error("{0}")]
    Failed(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Failed(_) => 1,
        }
    }

    /// Classifies a library error: malformed input is a configuration error,
    /// anything raised while running is a failure.
    pub fn from_core(context: &str, e: gtl_core::Error) -> Self {
        use gtl_core::Error as E;
        let msg = format!("{context}: {e}");
        match e {
            E::InvalidConfig(_) | E::KindMismatch { .. } | E::Dimension(_) | E::UnknownCoordinate(_) => {
                LabError::Config(msg)
            }
            _ => LabError::Failed(msg),
        }
    }
}
