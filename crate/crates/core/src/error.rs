use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("game too large to enumerate: {profiles} profiles exceeds the limit of {limit}")]
    GameTooLarge { profiles: u128, limit: u128 },
    #[error("too many vehicles to enumerate priority orders: {count} (at most {limit})")]
    TooManyVehicles { count: usize, limit: usize },
    #[error("unknown case {0:?}")]
    UnknownCase(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
