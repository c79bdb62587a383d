use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Model(#[from] fpam_exo::error::Error),
}

impl CliError {
    /// 2 usage/input, 3 numerical failure, 4 infeasible geometry.
    pub fn exit_code(&self) -> u8 {
        use fpam_exo::error::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Csv { .. } | CliError::Json { .. } => 2,
            CliError::Model(e) => match e {
                E::InvalidInput(_) | E::OutOfCalibratedRange { .. } | E::Domain(_) => 2,
                E::FitFailure(_) | E::NoCrossing(_) | E::Instability { .. } => 3,
                E::Geometry(_) | E::Regime(_) | E::Infeasible(_) => 4,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
