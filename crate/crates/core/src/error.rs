use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("song has no lyric lines")]
    EmptySong,
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("not enough data: {0}")]
    Insufficient(String),
    #[error("empty audio span [{start_ms}, {end_ms}) ms")]
    EmptySpan { start_ms: u64, end_ms: u64 },
    #[error("audio too short: {samples} samples, need at least {needed}")]
    TooShort { samples: usize, needed: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("missing embedding for key `{0}`")]
    MissingEmbedding(String),
    #[error("missing prediction for {song}:{line}")]
    MissingPrediction { song: String, line: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}
