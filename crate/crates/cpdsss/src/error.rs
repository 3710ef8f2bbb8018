use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ZC length must be at least 2, got {0}")]
    InvalidLength(usize),
    #[error("ZC root {root} is not coprime with length {n}")]
    InvalidRoot { root: usize, n: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: {a} vs {b}")]
    DimensionMismatch { a: usize, b: usize },
    #[error("impulse response of length {len} exceeds frame length {n}")]
    ImpulseTooLong { len: usize, n: usize },
    #[error("factor {l} does not divide frame length {n}")]
    BadFactor { l: usize, n: usize },
    #[error("user index {user} out of range for {k} users")]
    UserOutOfRange { user: usize, k: usize },
    #[error("pilot window overruns frame: shift {shift} + window {window} > {n}")]
    WindowOverrun {
        shift: usize,
        window: usize,
        n: usize,
    },
    #[error("missing channel estimate for user {user}, antenna {antenna}")]
    MissingEstimate { user: usize, antenna: usize },
    #[error("no detection results to measure")]
    EmptyStream,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
