//! Error type shared by every stage of the codec.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// More distinct symbols than quantization slots.
    #[error("alphabet has {present} symbols but only {slots} quantization slots")]
    AlphabetTooLarge { present: usize, slots: u32 },

    /// A model was requested for data with no symbols.
    #[error("cannot build a frequency model from empty input")]
    EmptyInput,

    /// The symbol is absent from the model and therefore unencodable.
    #[error("symbol {0} has zero frequency in the model")]
    ZeroFrequencySymbol(u16),

    /// A decoder tried to read below the start of the word stream.
    #[error("bitstream underflow while refilling a decoder state")]
    BitstreamUnderflow,

    /// No usable renormalization event exists for a lane at or before the
    /// requested boundary, so no split point can be formed there.
    #[error("lane {lane} has no renormalization event at or before the boundary")]
    IncompleteCoverage { lane: u16 },

    /// A series element does not fit the declared maximum element width.
    #[error("value {value} does not fit in {max_bits}-bit series elements")]
    ValueOverflow { value: u64, max_bits: u8 },

    /// A bit-packed series ended before all elements were read.
    #[error("bit-packed series truncated")]
    TruncatedSeries,

    /// The input does not start with a known container magic.
    #[error("unrecognized container magic")]
    BadMagic,

    /// The container was written by an incompatible format revision.
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),

    /// The container is shorter than its own headers claim.
    #[error("container truncated: {0}")]
    TruncatedContainer(&'static str),

    /// Decoded metadata violates a structural rule of the format.
    #[error("inconsistent container metadata: {0}")]
    InconsistentMetadata(&'static str),

    /// A split decoder reached a committed symbol while one of its lanes was
    /// still uninitialized; the split metadata cannot be trusted.
    #[error("synchronization failed: lane {lane} uninitialized at symbol {index}")]
    SyncFailure { lane: u16, index: u64 },

    /// A caller-supplied parameter is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

impl Error {
    /// Stable process exit code for each error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::AlphabetTooLarge { .. }
            | Error::EmptyInput
            | Error::ZeroFrequencySymbol(_)
            | Error::InvalidParameter(_) => 2,
            Error::ValueOverflow { .. }
            | Error::TruncatedSeries
            | Error::BadMagic
            | Error::UnsupportedVersion(_)
            | Error::TruncatedContainer(_)
            | Error::InconsistentMetadata(_) => 3,
            Error::BitstreamUnderflow
            | Error::IncompleteCoverage { .. }
            | Error::SyncFailure { .. } => 4,
        }
    }
}
