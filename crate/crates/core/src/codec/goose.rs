//! GOOSE frames with a flat boolean dataset.
//!
//! The member names of a dataset are configuration, not wire data: a
//! subscriber pairs the decoded values with a [`DatasetSchema`].

use super::ber::{self, Reader};
use super::error::{DecodeError, DecodeErrorKind, EncodeError};
use super::ethernet::{self, MacAddr, ETHERTYPE_GOOSE, MAX_FRAME_LEN};

pub const DEFAULT_GOOSE_APP_ID: u16 = 0x0001;
pub const MAX_REFERENCE_LEN: usize = 65;

const TAG_GOOSE_PDU: u8 = 0x61;
const TAG_GOCB_REF: u8 = 0x80;
const TAG_TTL: u8 = 0x81;
const TAG_DAT_SET: u8 = 0x82;
const TAG_GO_ID: u8 = 0x83;
const TAG_T: u8 = 0x84;
const TAG_ST_NUM: u8 = 0x85;
const TAG_SQ_NUM: u8 = 0x86;
const TAG_SIMULATION: u8 = 0x87;
const TAG_CONF_REV: u8 = 0x88;
const TAG_NDS_COM: u8 = 0x89;
const TAG_NUM_ENTRIES: u8 = 0x8A;
const TAG_ALL_DATA: u8 = 0xAB;
const TAG_DATA_BOOLEAN: u8 = 0x83;

/// IEC 61850 UtcTime: seconds since the epoch, a 24-bit binary fraction of a
/// second and a quality octet.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UtcTime {
    pub seconds: u32,
    pub fraction: u32,
    pub quality: u8,
}

impl UtcTime {
    pub fn from_nanos(nanos: u64) -> Self {
        let seconds = (nanos / 1_000_000_000) as u32;
        let sub = nanos % 1_000_000_000;
        let fraction = ((sub << 24) / 1_000_000_000) as u32;
        Self {
            seconds,
            fraction,
            quality: 0x0A,
        }
    }

    pub fn as_nanos(&self) -> u64 {
        self.seconds as u64 * 1_000_000_000 + ((self.fraction as u64 * 1_000_000_000) >> 24)
    }

    fn to_bytes(self) -> [u8; 8] {
        let s = self.seconds.to_be_bytes();
        let f = self.fraction.to_be_bytes();
        [s[0], s[1], s[2], s[3], f[1], f[2], f[3], self.quality]
    }

    fn from_bytes(b: [u8; 8]) -> Self {
        Self {
            seconds: u32::from_be_bytes([b[0], b[1], b[2], b[3]]),
            fraction: u32::from_be_bytes([0, b[4], b[5], b[6]]),
            quality: b[7],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GooseFrame {
    pub dst_mac: MacAddr,
    pub src_mac: MacAddr,
    pub app_id: u16,
    pub gocb_ref: String,
    pub ttl_ms: u32,
    pub dataset_ref: String,
    /// Omitted from the wire when empty.
    pub go_id: String,
    pub timestamp: UtcTime,
    pub st_num: u32,
    pub sq_num: u32,
    pub simulation: bool,
    pub conf_rev: u32,
    pub nds_com: bool,
    pub values: Vec<bool>,
}

impl Default for GooseFrame {
    fn default() -> Self {
        Self {
            dst_mac: MacAddr([0x01, 0x0C, 0xCD, 0x01, 0x00, 0x01]),
            src_mac: MacAddr([0x00, 0x00, 0x00, 0x00, 0x00, 0x02]),
            app_id: DEFAULT_GOOSE_APP_ID,
            gocb_ref: "VIEDPROT/LLN0$GO$gcbTrip".to_string(),
            ttl_ms: 2000,
            dataset_ref: "VIEDPROT/LLN0$dsTrip".to_string(),
            go_id: "VIED_TRIP".to_string(),
            timestamp: UtcTime::default(),
            st_num: 1,
            sq_num: 0,
            simulation: false,
            conf_rev: 1,
            nds_com: false,
            values: Vec::new(),
        }
    }
}

impl GooseFrame {
    /// Value of the dataset member `name` under `schema`.
    pub fn value_of(&self, schema: &DatasetSchema, name: &str) -> Option<bool> {
        schema.position(name).and_then(|i| self.values.get(i).copied())
    }

    /// Pairs the decoded values with the member names of `schema`.
    pub fn entries<'a>(&'a self, schema: &'a DatasetSchema) -> impl Iterator<Item = (&'a str, bool)> + 'a {
        schema.names.iter().map(String::as_str).zip(self.values.iter().copied())
    }
}

/// Ordered member names of a boolean dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSchema {
    pub names: Vec<String>,
}

impl DatasetSchema {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            names: names.into_iter().map(Into::into).collect(),
        }
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

fn check_reference(field: &'static str, value: &str) -> Result<(), EncodeError> {
    if value.len() > MAX_REFERENCE_LEN {
        return Err(EncodeError::FieldTooLong {
            field,
            len: value.len(),
            max: MAX_REFERENCE_LEN,
        });
    }
    if !value.bytes().all(|b| (0x20..0x7F).contains(&b)) {
        return Err(EncodeError::NotVisibleString { field });
    }
    Ok(())
}

pub fn encode_goose(frame: &GooseFrame) -> Result<Vec<u8>, EncodeError> {
    check_reference("gocbRef", &frame.gocb_ref)?;
    check_reference("datSet", &frame.dataset_ref)?;
    check_reference("goID", &frame.go_id)?;
    if frame.timestamp.fraction >= 1 << 24 {
        return Err(EncodeError::TimestampFraction(frame.timestamp.fraction));
    }

    let mut all_data = Vec::with_capacity(frame.values.len() * 3);
    for &v in &frame.values {
        ber::write_bool(&mut all_data, TAG_DATA_BOOLEAN, v);
    }

    let mut pdu = Vec::with_capacity(128 + all_data.len());
    ber::write_tlv(&mut pdu, TAG_GOCB_REF, frame.gocb_ref.as_bytes());
    ber::write_unsigned(&mut pdu, TAG_TTL, frame.ttl_ms);
    ber::write_tlv(&mut pdu, TAG_DAT_SET, frame.dataset_ref.as_bytes());
    if !frame.go_id.is_empty() {
        ber::write_tlv(&mut pdu, TAG_GO_ID, frame.go_id.as_bytes());
    }
    ber::write_tlv(&mut pdu, TAG_T, &frame.timestamp.to_bytes());
    ber::write_unsigned(&mut pdu, TAG_ST_NUM, frame.st_num);
    ber::write_unsigned(&mut pdu, TAG_SQ_NUM, frame.sq_num);
    ber::write_bool(&mut pdu, TAG_SIMULATION, frame.simulation);
    ber::write_unsigned(&mut pdu, TAG_CONF_REV, frame.conf_rev);
    ber::write_bool(&mut pdu, TAG_NDS_COM, frame.nds_com);
    ber::write_unsigned(&mut pdu, TAG_NUM_ENTRIES, frame.values.len() as u32);
    ber::write_tlv(&mut pdu, TAG_ALL_DATA, &all_data);

    let mut out = Vec::with_capacity(pdu.len() + 32);
    ethernet::write_header(&mut out, frame.dst_mac, frame.src_mac, ETHERTYPE_GOOSE, frame.app_id);
    ber::write_tlv(&mut out, TAG_GOOSE_PDU, &pdu);
    ethernet::finish_frame(&mut out);
    if out.len() > MAX_FRAME_LEN {
        return Err(EncodeError::FrameTooLong(out.len()));
    }
    Ok(out)
}

pub fn decode_goose(bytes: &[u8]) -> Result<GooseFrame, DecodeError> {
    let header = ethernet::read_header(bytes, ETHERTYPE_GOOSE)?;
    let mut apdu = Reader::new(&bytes[header.apdu_start..header.apdu_end], header.apdu_start);
    let pdu = apdu.expect(TAG_GOOSE_PDU)?;
    let mut r = pdu.children();

    let gocb_ref = r.expect(TAG_GOCB_REF)?.as_visible_string(MAX_REFERENCE_LEN)?;
    let ttl_ms = r.expect(TAG_TTL)?.as_u32()?;
    let dataset_ref = r.expect(TAG_DAT_SET)?.as_visible_string(MAX_REFERENCE_LEN)?;
    let go_id = match r.optional(TAG_GO_ID)? {
        Some(tlv) => tlv.as_visible_string(MAX_REFERENCE_LEN)?,
        None => String::new(),
    };
    let timestamp = UtcTime::from_bytes(r.expect(TAG_T)?.fixed::<8>()?);
    let st_num = r.expect(TAG_ST_NUM)?.as_u32()?;
    let sq_num = r.expect(TAG_SQ_NUM)?.as_u32()?;
    let simulation = r.expect(TAG_SIMULATION)?.as_bool()?;
    let conf_rev = r.expect(TAG_CONF_REV)?.as_u32()?;
    let nds_com = r.expect(TAG_NDS_COM)?.as_bool()?;
    let declared_tlv = r.expect(TAG_NUM_ENTRIES)?;
    let declared = declared_tlv.as_u32()?;
    let all_data = r.expect(TAG_ALL_DATA)?;

    let mut values = Vec::new();
    let mut data = all_data.children();
    while !data.is_empty() {
        let offset = data.offset();
        let tlv = data.read()?;
        if tlv.tag != TAG_DATA_BOOLEAN {
            return Err(DecodeError::new(offset, DecodeErrorKind::UnsupportedData { tag: tlv.tag }));
        }
        values.push(tlv.as_bool()?);
    }
    if declared as usize != values.len() {
        return Err(DecodeError::new(
            declared_tlv.value_offset,
            DecodeErrorKind::DatasetCountMismatch {
                declared,
                found: values.len(),
            },
        ));
    }

    Ok(GooseFrame {
        dst_mac: header.dst,
        src_mac: header.src,
        app_id: header.app_id,
        gocb_ref,
        ttl_ms,
        dataset_ref,
        go_id,
        timestamp,
        st_num,
        sq_num,
        simulation,
        conf_rev,
        nds_com,
        values,
    })
}
