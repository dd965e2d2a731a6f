use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: file not found")]
    NotFound { path: PathBuf },
    #[error("image decode failed: {0}")]
    ImageDecode(String),
    #[error("unsupported image bit depth: {0}")]
    UnsupportedBitDepth(u8),
    #[error("unsupported image channel layout: {0}")]
    UnsupportedLayout(String),
    #[error("image encode failed: {0}")]
    ImageEncode(String),
    #[error("bad container magic: expected FTC1")]
    BadMagic,
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("json error at byte {offset} (line {line}, column {column}): {message}")]
    Json {
        message: String,
        line: usize,
        column: usize,
        offset: usize,
    },
    #[error("ply schema error: {0}")]
    PlySchema(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("missing mask for frame {0}")]
    MissingMask(usize),
    #[error("frame {0} was skipped by identity-drift acceptance")]
    FrameNotAccepted(usize),
    #[error("manifest error: {0}")]
    Manifest(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::NotFound { path }
        } else {
            Error::Io { path, source }
        }
    }

    /// Converts a serde_json error, recovering the byte offset from `text`.
    pub fn json(err: serde_json::Error, text: &str) -> Self {
        let (line, column) = (err.line(), err.column());
        let offset = byte_offset(text, line, column);
        Error::Json {
            message: err.to_string(),
            line,
            column,
            offset,
        }
    }

    /// Short machine-readable tag for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::NotFound { .. } => "not_found",
            Error::ImageDecode(_) => "image_decode",
            Error::UnsupportedBitDepth(_) => "unsupported_bit_depth",
            Error::UnsupportedLayout(_) => "unsupported_layout",
            Error::ImageEncode(_) => "image_encode",
            Error::BadMagic => "bad_magic",
            Error::SizeMismatch(_) => "size_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::Json { .. } => "json",
            Error::PlySchema(_) => "ply_schema",
            Error::Invalid(_) => "invalid",
            Error::MissingMask(_) => "missing_mask",
            Error::FrameNotAccepted(_) => "frame_not_accepted",
            Error::Manifest(_) => "manifest",
        }
    }
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut offset = 0;
    for (i, l) in text.split_inclusive('\n').enumerate() {
        if i + 1 == line {
            return offset + column.saturating_sub(1).min(l.len());
        }
        offset += l.len();
    }
    text.len()
}

/// Parses JSON text, mapping failures to [`Error::Json`] with a byte offset.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::json(e, text))
}
