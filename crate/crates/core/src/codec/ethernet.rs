use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::error::{DecodeError, DecodeErrorKind};

pub const ETHERTYPE_SV: u16 = 0x88BA;
pub const ETHERTYPE_GOOSE: u16 = 0x88B8;
pub const ETHERTYPE_VLAN: u16 = 0x8100;

/// Largest frame accepted on the process bus, 802.1Q tag included, FCS excluded.
pub const MAX_FRAME_LEN: usize = 1522;

/// Destination + source + EtherType.
pub(crate) const ETH_HEADER_LEN: usize = 14;
/// APPID, Length, Reserved1, Reserved2.
pub(crate) const APP_HEADER_LEN: usize = 8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MacAddr(pub [u8; 6]);

impl MacAddr {
    pub const fn new(bytes: [u8; 6]) -> Self {
        Self(bytes)
    }

    pub const fn octets(&self) -> [u8; 6] {
        self.0
    }
}

impl fmt::Display for MacAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.0;
        write!(
            f,
            "{:02X}:{:02X}:{:02X}:{:02X}:{:02X}:{:02X}",
            b[0], b[1], b[2], b[3], b[4], b[5]
        )
    }
}

impl FromStr for MacAddr {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = [0u8; 6];
        let mut parts = s.split(|c| c == ':' || c == '-');
        for byte in out.iter_mut() {
            let part = parts.next().ok_or_else(|| format!("invalid MAC address '{s}'"))?;
            *byte = u8::from_str_radix(part, 16).map_err(|_| format!("invalid MAC address '{s}'"))?;
        }
        if parts.next().is_some() {
            return Err(format!("invalid MAC address '{s}'"));
        }
        Ok(MacAddr(out))
    }
}

impl Serialize for MacAddr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MacAddr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub(crate) struct FrameHeader {
    pub dst: MacAddr,
    pub src: MacAddr,
    pub app_id: u16,
    /// Byte offset of the APDU inside the frame.
    pub apdu_start: usize,
    pub apdu_end: usize,
}

/// Writes the Ethernet and IEC 61850 application headers. The Length field
/// is patched by [`finish_frame`] once the APDU is known.
pub(crate) fn write_header(out: &mut Vec<u8>, dst: MacAddr, src: MacAddr, ethertype: u16, app_id: u16) {
    out.extend_from_slice(&dst.0);
    out.extend_from_slice(&src.0);
    out.extend_from_slice(&ethertype.to_be_bytes());
    out.extend_from_slice(&app_id.to_be_bytes());
    out.extend_from_slice(&[0, 0, 0, 0, 0, 0]);
}

pub(crate) fn finish_frame(out: &mut [u8]) {
    let length = (out.len() - ETH_HEADER_LEN) as u16;
    out[16..18].copy_from_slice(&length.to_be_bytes());
}

pub(crate) fn read_header(bytes: &[u8], expected_ethertype: u16) -> Result<FrameHeader, DecodeError> {
    if bytes.len() < ETH_HEADER_LEN {
        return Err(DecodeError::new(bytes.len(), DecodeErrorKind::TruncatedHeader));
    }
    let mut dst = [0u8; 6];
    let mut src = [0u8; 6];
    dst.copy_from_slice(&bytes[0..6]);
    src.copy_from_slice(&bytes[6..12]);

    let mut pos = 12;
    let mut ethertype = be16(bytes, pos);
    if ethertype == ETHERTYPE_VLAN {
        // 802.1Q tag is passed through untouched.
        pos += 4;
        if bytes.len() < pos + 2 {
            return Err(DecodeError::new(bytes.len(), DecodeErrorKind::TruncatedHeader));
        }
        ethertype = be16(bytes, pos);
    }
    if ethertype != expected_ethertype {
        return Err(DecodeError::new(
            pos,
            DecodeErrorKind::WrongEtherType {
                found: ethertype,
                expected: expected_ethertype,
            },
        ));
    }
    pos += 2;
    if bytes.len() < pos + APP_HEADER_LEN {
        return Err(DecodeError::new(bytes.len(), DecodeErrorKind::TruncatedHeader));
    }
    let app_id = be16(bytes, pos);
    let length = be16(bytes, pos + 2);
    if (length as usize) < APP_HEADER_LEN || pos + length as usize > bytes.len() {
        return Err(DecodeError::new(pos + 2, DecodeErrorKind::BadLengthField { length }));
    }
    Ok(FrameHeader {
        dst: MacAddr(dst),
        src: MacAddr(src),
        app_id,
        apdu_start: pos + APP_HEADER_LEN,
        apdu_end: pos + length as usize,
    })
}

#[inline]
fn be16(bytes: &[u8], pos: usize) -> u16 {
    u16::from_be_bytes([bytes[pos], bytes[pos + 1]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mac_parse_and_display() {
        let mac: MacAddr = "01-0c-cd-04-00-01".parse().unwrap();
        assert_eq!(mac.0, [0x01, 0x0C, 0xCD, 0x04, 0x00, 0x01]);
        assert_eq!(mac.to_string(), "01:0C:CD:04:00:01");
        assert!("01:02:03".parse::<MacAddr>().is_err());
        assert!("01:02:03:04:05:06:07".parse::<MacAddr>().is_err());
    }

    #[test]
    fn empty_input_is_truncated_header() {
        let err = read_header(&[], ETHERTYPE_SV).err().unwrap();
        assert_eq!(err.kind, DecodeErrorKind::TruncatedHeader);
    }
}
