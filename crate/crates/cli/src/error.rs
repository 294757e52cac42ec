use inftorus::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    /// A numerically infeasible request, such as eps below the tail budget.
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    /// Attributes a library error to the config field that caused it.
    pub fn at(field: &str) -> impl Fn(Error) -> CliError + '_ {
        move |e| match e {
            Error::ToleranceBelowTail { eps, min_eps } => CliError::Infeasible(format!(
                "{field}: eps = {eps} does not exceed the tail budget; use eps > {min_eps}"
            )),
            Error::InsufficientPrecision { .. } | Error::TailBoundUnavailable { .. } => {
                CliError::Infeasible(format!("{field}: {e}"))
            }
            other => CliError::Config(format!("{field}: {other}")),
        }
    }
}
