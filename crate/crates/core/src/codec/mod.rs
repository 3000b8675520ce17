//! Process-bus frame codec.
//!
//! Sampled Values follow the 9-2LE profile: one ASDU per frame, 80 samples
//! per nominal cycle and a fixed eight-channel dataset. GOOSE carries a flat
//! boolean dataset. All lengths are BER definite-form and every multi-byte
//! integer on the wire is big-endian.
//!
//! Decoders are total: any byte slice yields either a frame or a
//! [`DecodeError`] pointing at the offending offset.

mod ber;
mod error;
mod ethernet;
pub mod goose;
pub mod prp;
pub mod sv;

pub use error::{DecodeError, DecodeErrorKind, EncodeError};
pub use ethernet::{MacAddr, ETHERTYPE_GOOSE, ETHERTYPE_SV, ETHERTYPE_VLAN, MAX_FRAME_LEN};
pub use goose::{decode_goose, encode_goose, DatasetSchema, GooseFrame, UtcTime};
pub use prp::{prp_send, Delivery, DiscardTable, Lan, PrpError, PrpFrame, PrpSender};
pub use goose::{DEFAULT_GOOSE_APP_ID, MAX_REFERENCE_LEN};
pub use sv::{
    decode_sv, encode_sv, SampledValueFrame, SvProfile, CURRENT_LSB_A, DEFAULT_SV_APP_ID, MAX_SV_ID_LEN, VOLTAGE_LSB_V,
};
