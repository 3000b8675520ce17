use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("{field} is {len} bytes long, limit is {max}")]
    FieldTooLong {
        field: &'static str,
        len: usize,
        max: usize,
    },
    #[error("smpCnt {smp_cnt} out of range for {samples_per_second} samples/s")]
    SmpCntOutOfRange {
        smp_cnt: u16,
        samples_per_second: u16,
    },
    #[error("{field} contains non-ASCII characters")]
    NotVisibleString { field: &'static str },
    #[error("timestamp fraction {0:#x} does not fit in 24 bits")]
    TimestampFraction(u32),
    #[error("encoded frame is {0} bytes, exceeds the Ethernet limit")]
    FrameTooLong(usize),
}

/// What went wrong while decoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeErrorKind {
    TruncatedHeader,
    WrongEtherType { found: u16, expected: u16 },
    BadLengthField { length: u16 },
    Truncated,
    UnexpectedTag { expected: u8, found: u8 },
    IndefiniteLength,
    UnsupportedLengthForm(u8),
    InvalidValueLength { tag: u8, len: usize },
    IntegerOverflow { tag: u8 },
    InvalidString { tag: u8 },
    UnsupportedAsduCount(u32),
    ChannelCount(usize),
    SmpCntOutOfRange(u16),
    DatasetCountMismatch { declared: u32, found: usize },
    UnsupportedData { tag: u8 },
    TrailingData,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("decode error at offset {offset}: {kind:?}")]
pub struct DecodeError {
    pub offset: usize,
    pub kind: DecodeErrorKind,
}

impl DecodeError {
    pub(crate) fn new(offset: usize, kind: DecodeErrorKind) -> Self {
        Self { offset, kind }
    }
}
