//! IEC 61850-9-2 Sampled Values, 9-2LE profile.
//!
//! APDU layout produced by the encoder (tags are context-specific):
//!
//! ```text
//! 60 savPdu
//!   80 01 01            noASDU = 1
//!   A2 seqASDU
//!     30 ASDU
//!       80 svID         VisibleString, at most 34 bytes
//!       82 02 smpCnt    INT16U
//!       83 04 confRev   INT32U
//!       85 01 smpSynch  INT8U
//!       87 40 seqData   8 x (INT32 value, 32-bit quality)
//! ```
//!
//! The decoder also skips the optional datSet (81), refrTm (84) and
//! smpRate (86) fields that other publishers include.

use super::ber::{self, Reader};
use super::error::{DecodeError, DecodeErrorKind, EncodeError};
use super::ethernet::{self, MacAddr, ETHERTYPE_SV, MAX_FRAME_LEN};

pub const SV_CHANNELS: usize = 8;
pub const MAX_SV_ID_LEN: usize = 34;
pub const DEFAULT_SV_APP_ID: u16 = 0x4000;

/// Current LSB: 1 mA per count.
pub const CURRENT_LSB_A: f64 = 0.001;
/// Voltage LSB: 10 mV per count.
pub const VOLTAGE_LSB_V: f64 = 0.01;

const TAG_SAV_PDU: u8 = 0x60;
const TAG_NO_ASDU: u8 = 0x80;
const TAG_SEQ_ASDU: u8 = 0xA2;
const TAG_ASDU: u8 = 0x30;
const TAG_SV_ID: u8 = 0x80;
const TAG_DAT_SET: u8 = 0x81;
const TAG_SMP_CNT: u8 = 0x82;
const TAG_CONF_REV: u8 = 0x83;
const TAG_REFR_TM: u8 = 0x84;
const TAG_SMP_SYNCH: u8 = 0x85;
const TAG_SMP_RATE: u8 = 0x86;
const TAG_SEQ_DATA: u8 = 0x87;

/// One SV frame carrying a single ASDU of the fixed 8-channel dataset.
///
/// Channel order is IA, IB, IC, IN, VA, VB, VC, VN. Currents are counts of
/// 1 mA, voltages counts of 10 mV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledValueFrame {
    pub dst_mac: MacAddr,
    pub src_mac: MacAddr,
    pub app_id: u16,
    pub sv_id: String,
    pub smp_cnt: u16,
    pub conf_rev: u32,
    pub smp_synch: u8,
    pub channels: [i32; SV_CHANNELS],
    pub quality: [u32; SV_CHANNELS],
}

impl Default for SampledValueFrame {
    fn default() -> Self {
        Self {
            dst_mac: MacAddr([0x01, 0x0C, 0xCD, 0x04, 0x00, 0x01]),
            src_mac: MacAddr([0x00, 0x00, 0x00, 0x00, 0x00, 0x01]),
            app_id: DEFAULT_SV_APP_ID,
            sv_id: "VIED_MU0101".to_string(),
            smp_cnt: 0,
            conf_rev: 1,
            smp_synch: 2,
            channels: [0; SV_CHANNELS],
            quality: [0; SV_CHANNELS],
        }
    }
}

/// Sample-rate profile used to validate `smpCnt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SvProfile {
    pub samples_per_second: u16,
}

impl SvProfile {
    /// 80 samples per cycle at 60 Hz.
    pub const LE_60HZ: SvProfile = SvProfile {
        samples_per_second: 4800,
    };

    pub fn encode(&self, frame: &SampledValueFrame) -> Result<Vec<u8>, EncodeError> {
        let mut out = Vec::with_capacity(160);
        self.encode_into(frame, &mut out)?;
        Ok(out)
    }

    /// Encodes into `out`, replacing its contents.
    pub fn encode_into(&self, frame: &SampledValueFrame, out: &mut Vec<u8>) -> Result<(), EncodeError> {
        if frame.sv_id.len() > MAX_SV_ID_LEN {
            return Err(EncodeError::FieldTooLong {
                field: "svID",
                len: frame.sv_id.len(),
                max: MAX_SV_ID_LEN,
            });
        }
        if !frame.sv_id.bytes().all(|b| (0x20..0x7F).contains(&b)) {
            return Err(EncodeError::NotVisibleString { field: "svID" });
        }
        if frame.smp_cnt >= self.samples_per_second {
            return Err(EncodeError::SmpCntOutOfRange {
                smp_cnt: frame.smp_cnt,
                samples_per_second: self.samples_per_second,
            });
        }

        let mut seq_data = [0u8; SV_CHANNELS * 8];
        for (i, chunk) in seq_data.chunks_exact_mut(8).enumerate() {
            chunk[..4].copy_from_slice(&frame.channels[i].to_be_bytes());
            chunk[4..].copy_from_slice(&frame.quality[i].to_be_bytes());
        }

        let mut asdu = Vec::with_capacity(120);
        ber::write_tlv(&mut asdu, TAG_SV_ID, frame.sv_id.as_bytes());
        ber::write_tlv(&mut asdu, TAG_SMP_CNT, &frame.smp_cnt.to_be_bytes());
        ber::write_tlv(&mut asdu, TAG_CONF_REV, &frame.conf_rev.to_be_bytes());
        ber::write_tlv(&mut asdu, TAG_SMP_SYNCH, &[frame.smp_synch]);
        ber::write_tlv(&mut asdu, TAG_SEQ_DATA, &seq_data);

        let mut seq_asdu = Vec::with_capacity(asdu.len() + 4);
        ber::write_tlv(&mut seq_asdu, TAG_ASDU, &asdu);

        let mut pdu = Vec::with_capacity(seq_asdu.len() + 8);
        ber::write_tlv(&mut pdu, TAG_NO_ASDU, &[1]);
        ber::write_tlv(&mut pdu, TAG_SEQ_ASDU, &seq_asdu);

        out.clear();
        ethernet::write_header(out, frame.dst_mac, frame.src_mac, ETHERTYPE_SV, frame.app_id);
        ber::write_tlv(out, TAG_SAV_PDU, &pdu);
        ethernet::finish_frame(out);
        if out.len() > MAX_FRAME_LEN {
            return Err(EncodeError::FrameTooLong(out.len()));
        }
        Ok(())
    }

    pub fn decode(&self, bytes: &[u8]) -> Result<SampledValueFrame, DecodeError> {
        let header = ethernet::read_header(bytes, ETHERTYPE_SV)?;
        let mut apdu = Reader::new(&bytes[header.apdu_start..header.apdu_end], header.apdu_start);
        let pdu = apdu.expect(TAG_SAV_PDU)?;

        let mut fields = pdu.children();
        let no_asdu_tlv = fields.expect(TAG_NO_ASDU)?;
        let no_asdu = no_asdu_tlv.as_u32()?;
        if no_asdu != 1 {
            return Err(DecodeError::new(
                no_asdu_tlv.value_offset,
                DecodeErrorKind::UnsupportedAsduCount(no_asdu),
            ));
        }
        let seq_asdu = fields.expect(TAG_SEQ_ASDU)?;
        let mut asdus = seq_asdu.children();
        let asdu = asdus.expect(TAG_ASDU)?;
        asdus.finish()?;

        let mut r = asdu.children();
        let sv_id = r.expect(TAG_SV_ID)?.as_visible_string(MAX_SV_ID_LEN)?;
        r.optional(TAG_DAT_SET)?;
        let smp_cnt_tlv = r.expect(TAG_SMP_CNT)?;
        let smp_cnt = u16::from_be_bytes(smp_cnt_tlv.fixed::<2>()?);
        if smp_cnt >= self.samples_per_second {
            return Err(DecodeError::new(
                smp_cnt_tlv.value_offset,
                DecodeErrorKind::SmpCntOutOfRange(smp_cnt),
            ));
        }
        let conf_rev = u32::from_be_bytes(r.expect(TAG_CONF_REV)?.fixed::<4>()?);
        r.optional(TAG_REFR_TM)?;
        let smp_synch = r.expect(TAG_SMP_SYNCH)?.fixed::<1>()?[0];
        r.optional(TAG_SMP_RATE)?;
        let data = r.expect(TAG_SEQ_DATA)?;
        if data.value.len() != SV_CHANNELS * 8 {
            let kind = if data.value.len() % 8 == 0 {
                DecodeErrorKind::ChannelCount(data.value.len() / 8)
            } else {
                DecodeErrorKind::InvalidValueLength {
                    tag: TAG_SEQ_DATA,
                    len: data.value.len(),
                }
            };
            return Err(DecodeError::new(data.value_offset, kind));
        }

        let mut channels = [0i32; SV_CHANNELS];
        let mut quality = [0u32; SV_CHANNELS];
        for (i, chunk) in data.value.chunks_exact(8).enumerate() {
            channels[i] = i32::from_be_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            quality[i] = u32::from_be_bytes([chunk[4], chunk[5], chunk[6], chunk[7]]);
        }

        Ok(SampledValueFrame {
            dst_mac: header.dst,
            src_mac: header.src,
            app_id: header.app_id,
            sv_id,
            smp_cnt,
            conf_rev,
            smp_synch,
            channels,
            quality,
        })
    }
}

impl Default for SvProfile {
    fn default() -> Self {
        Self::LE_60HZ
    }
}

/// Encodes with the default 4800 samples/s profile.
pub fn encode_sv(frame: &SampledValueFrame) -> Result<Vec<u8>, EncodeError> {
    SvProfile::LE_60HZ.encode(frame)
}

/// Decodes with the default 4800 samples/s profile.
pub fn decode_sv(bytes: &[u8]) -> Result<SampledValueFrame, DecodeError> {
    SvProfile::LE_60HZ.decode(bytes)
}
