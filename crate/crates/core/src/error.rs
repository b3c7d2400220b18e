use thiserror::Error;

/// Errors raised by the auction engine and its tooling.
#[derive(Debug, Error)]
pub enum AuctionError {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o failure at episode {episode}: {source}")]
    EpisodeIo {
        episode: u64,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = AuctionError> = std::result::Result<T, E>;

pub(crate) fn input(msg: impl Into<String>) -> AuctionError {
    AuctionError::Input(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> AuctionError {
    AuctionError::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> AuctionError {
    AuctionError::Config(msg.into())
}
