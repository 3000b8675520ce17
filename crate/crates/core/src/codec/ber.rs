//! The small subset of BER needed by SV and GOOSE: definite lengths,
//! context-specific primitive tags and one level of constructed nesting.

use super::error::{DecodeError, DecodeErrorKind};

pub(crate) fn write_len(out: &mut Vec<u8>, len: usize) {
    if len < 0x80 {
        out.push(len as u8);
    } else if len <= 0xFF {
        out.extend_from_slice(&[0x81, len as u8]);
    } else {
        debug_assert!(len <= 0xFFFF);
        out.push(0x82);
        out.extend_from_slice(&(len as u16).to_be_bytes());
    }
}

pub(crate) fn write_tlv(out: &mut Vec<u8>, tag: u8, value: &[u8]) {
    out.push(tag);
    write_len(out, value.len());
    out.extend_from_slice(value);
}

/// Unsigned value as a minimal BER INTEGER (a leading zero is kept when the
/// top bit would otherwise read as a sign).
pub(crate) fn write_unsigned(out: &mut Vec<u8>, tag: u8, value: u32) {
    let bytes = value.to_be_bytes();
    let mut start = bytes.iter().position(|&b| b != 0).unwrap_or(3);
    let mut buf = [0u8; 5];
    let mut n = 0;
    if bytes[start] & 0x80 != 0 {
        buf[0] = 0;
        n = 1;
    }
    while start < 4 {
        buf[n] = bytes[start];
        n += 1;
        start += 1;
    }
    write_tlv(out, tag, &buf[..n]);
}

pub(crate) fn write_bool(out: &mut Vec<u8>, tag: u8, value: bool) {
    write_tlv(out, tag, &[value as u8]);
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tlv<'a> {
    pub tag: u8,
    pub value: &'a [u8],
    /// Absolute offset of the first value byte.
    pub value_offset: usize,
}

/// Cursor over a run of TLVs. Offsets are reported relative to the start of
/// the whole frame so errors can point at the exact byte.
pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    base: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8], base: usize) -> Self {
        Self { buf, pos: 0, base }
    }

    pub fn is_empty(&self) -> bool {
        self.pos >= self.buf.len()
    }

    pub fn offset(&self) -> usize {
        self.base + self.pos
    }

    pub fn peek_tag(&self) -> Option<u8> {
        self.buf.get(self.pos).copied()
    }

    pub fn read(&mut self) -> Result<Tlv<'a>, DecodeError> {
        let start = self.pos;
        let tag = *self
            .buf
            .get(self.pos)
            .ok_or_else(|| DecodeError::new(self.base + start, DecodeErrorKind::Truncated))?;
        self.pos += 1;
        let len = self.read_len()?;
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| DecodeError::new(self.base + start, DecodeErrorKind::Truncated))?;
        let tlv = Tlv {
            tag,
            value: &self.buf[self.pos..end],
            value_offset: self.base + self.pos,
        };
        self.pos = end;
        Ok(tlv)
    }

    pub fn expect(&mut self, tag: u8) -> Result<Tlv<'a>, DecodeError> {
        let offset = self.offset();
        let tlv = self.read()?;
        if tlv.tag != tag {
            return Err(DecodeError::new(
                offset,
                DecodeErrorKind::UnexpectedTag {
                    expected: tag,
                    found: tlv.tag,
                },
            ));
        }
        Ok(tlv)
    }

    /// Reads the next TLV only if it carries `tag`.
    pub fn optional(&mut self, tag: u8) -> Result<Option<Tlv<'a>>, DecodeError> {
        if self.peek_tag() == Some(tag) {
            self.read().map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn finish(&self) -> Result<(), DecodeError> {
        if self.is_empty() {
            Ok(())
        } else {
            Err(DecodeError::new(self.offset(), DecodeErrorKind::TrailingData))
        }
    }

    fn read_len(&mut self) -> Result<usize, DecodeError> {
        let at = self.base + self.pos;
        let first = *self
            .buf
            .get(self.pos)
            .ok_or_else(|| DecodeError::new(at, DecodeErrorKind::Truncated))?;
        self.pos += 1;
        if first < 0x80 {
            return Ok(first as usize);
        }
        if first == 0x80 {
            return Err(DecodeError::new(at, DecodeErrorKind::IndefiniteLength));
        }
        let n = (first & 0x7F) as usize;
        if n > 3 {
            return Err(DecodeError::new(at, DecodeErrorKind::UnsupportedLengthForm(first)));
        }
        let bytes = self
            .buf
            .get(self.pos..self.pos + n)
            .ok_or_else(|| DecodeError::new(at, DecodeErrorKind::Truncated))?;
        self.pos += n;
        Ok(bytes.iter().fold(0usize, |acc, &b| (acc << 8) | b as usize))
    }
}

impl Tlv<'_> {
    pub fn children(&self) -> Reader<'_> {
        Reader::new(self.value, self.value_offset)
    }

    pub fn as_u32(&self) -> Result<u32, DecodeError> {
        let v = self.value;
        if v.is_empty() {
            return Err(self.bad_len());
        }
        // Allow one leading zero octet for values with the top bit set.
        let trimmed = if v.len() == 5 && v[0] == 0 { &v[1..] } else { v };
        if trimmed.len() > 4 || (trimmed.len() == v.len() && v[0] & 0x80 != 0) {
            return Err(DecodeError::new(
                self.value_offset,
                DecodeErrorKind::IntegerOverflow { tag: self.tag },
            ));
        }
        Ok(trimmed.iter().fold(0u32, |acc, &b| (acc << 8) | b as u32))
    }

    pub fn as_bool(&self) -> Result<bool, DecodeError> {
        match self.value {
            [b] => Ok(*b != 0),
            _ => Err(self.bad_len()),
        }
    }

    pub fn as_visible_string(&self, max: usize) -> Result<String, DecodeError> {
        if self.value.len() > max || !self.value.iter().all(|b| (0x20..0x7F).contains(b)) {
            return Err(DecodeError::new(
                self.value_offset,
                DecodeErrorKind::InvalidString { tag: self.tag },
            ));
        }
        // ASCII checked above.
        Ok(self.value.iter().map(|&b| b as char).collect())
    }

    pub fn fixed<const N: usize>(&self) -> Result<[u8; N], DecodeError> {
        self.value.try_into().map_err(|_| self.bad_len())
    }

    pub fn bad_len(&self) -> DecodeError {
        DecodeError::new(
            self.value_offset,
            DecodeErrorKind::InvalidValueLength {
                tag: self.tag,
                len: self.value.len(),
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn long_form_lengths() {
        let mut out = Vec::new();
        write_len(&mut out, 0x7F);
        write_len(&mut out, 0x80);
        write_len(&mut out, 0x1234);
        assert_eq!(out, [0x7F, 0x81, 0x80, 0x82, 0x12, 0x34]);
    }

    #[test]
    fn unsigned_minimal_form() {
        let cases: [(u32, &[u8]); 5] = [
            (0, &[0x00]),
            (0x7F, &[0x7F]),
            (0x80, &[0x00, 0x80]),
            (0x1234, &[0x12, 0x34]),
            (u32::MAX, &[0x00, 0xFF, 0xFF, 0xFF, 0xFF]),
        ];
        for (value, expected) in cases {
            let mut out = Vec::new();
            write_unsigned(&mut out, 0x85, value);
            assert_eq!(&out[2..], expected, "value {value:#x}");
            let tlv = Reader::new(&out, 0).read().unwrap();
            assert_eq!(tlv.as_u32().unwrap(), value);
        }
    }

    #[test]
    fn negative_integer_rejected() {
        let tlv = Reader::new(&[0x85, 0x01, 0xFF], 0).read().unwrap();
        assert!(matches!(
            tlv.as_u32().unwrap_err().kind,
            DecodeErrorKind::IntegerOverflow { .. }
        ));
    }

    #[test]
    fn truncated_value_reports_tag_offset() {
        let err = Reader::new(&[0x80, 0x05, 0x01], 10).read().unwrap_err();
        assert_eq!(err, DecodeError::new(10, DecodeErrorKind::Truncated));
    }

    #[test]
    fn indefinite_length_rejected() {
        let err = Reader::new(&[0x30, 0x80, 0x00, 0x00], 0).read().unwrap_err();
        assert_eq!(err.kind, DecodeErrorKind::IndefiniteLength);
    }
}
