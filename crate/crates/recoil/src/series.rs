//! Bit-packed integer series used by the container metadata.
//!
//! A series is a width field followed by fixed-width elements. The width
//! field holds `w - 1` where `w` is the bit width of the largest magnitude in
//! the series; it occupies 4 bits when elements may need up to 16 bits and
//! 5 bits when they may need up to 32. Each element stores its magnitude
//! big-bit-first in `w` bits; signed series append one sign bit per element
//! (1 = negative), and a negative zero is malformed. Bits fill each byte from
//! the most significant end.

use crate::error::{Error, Result};

/// Maximum element width a series may declare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxWidth {
    /// Elements up to 16 bits; 4-bit width field.
    U16,
    /// Elements up to 32 bits; 5-bit width field.
    U32,
}

impl MaxWidth {
    fn field_bits(self) -> u8 {
        match self {
            MaxWidth::U16 => 4,
            MaxWidth::U32 => 5,
        }
    }

    fn max_element_bits(self) -> u8 {
        match self {
            MaxWidth::U16 => 16,
            MaxWidth::U32 => 32,
        }
    }
}

/// Bits needed for a magnitude: `ceil(log2(v + 1))`, with zero needing one.
#[inline]
pub fn magnitude_bits(v: u64) -> u8 {
    if v == 0 {
        1
    } else {
        (64 - v.leading_zeros()) as u8
    }
}

/// Most-significant-bit-first writer.
#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    /// Bits already used in the final byte, 0..8.
    used: u8,
}

impl BitWriter {
    pub fn new() -> Self {
        BitWriter::default()
    }

    pub fn write_bits(&mut self, value: u64, bits: u8) {
        debug_assert!(bits <= 64);
        debug_assert!(bits == 64 || value < (1u64 << bits));
        for i in (0..bits).rev() {
            let bit = ((value >> i) & 1) as u8;
            if self.used == 0 {
                self.bytes.push(0);
            }
            let last = self.bytes.last_mut().unwrap();
            *last |= bit << (7 - self.used);
            self.used = (self.used + 1) % 8;
        }
    }

    /// Zero-fill to the next byte boundary.
    pub fn pad_to_byte(&mut self) {
        self.used = 0;
    }

    pub fn bit_len(&self) -> usize {
        if self.used == 0 {
            self.bytes.len() * 8
        } else {
            (self.bytes.len() - 1) * 8 + self.used as usize
        }
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

/// Most-significant-bit-first reader over a byte slice.
#[derive(Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    bit_pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, bit_pos: 0 }
    }

    pub fn read_bits(&mut self, bits: u8) -> Result<u64> {
        debug_assert!(bits <= 64);
        if self.bit_pos + bits as usize > self.bytes.len() * 8 {
            return Err(Error::TruncatedSeries);
        }
        let mut v = 0u64;
        for _ in 0..bits {
            let byte = self.bytes[self.bit_pos / 8];
            let bit = (byte >> (7 - self.bit_pos % 8)) & 1;
            v = (v << 1) | bit as u64;
            self.bit_pos += 1;
        }
        Ok(v)
    }

    /// Skip forward to the next byte boundary.
    pub fn align_to_byte(&mut self) {
        self.bit_pos = (self.bit_pos + 7) / 8 * 8;
    }

    /// Bytes fully or partially consumed so far.
    pub fn bytes_consumed(&self) -> usize {
        (self.bit_pos + 7) / 8
    }
}

/// Append one series. Unsigned series must hold no negative values.
pub fn pack_series(
    values: &[i64],
    width: MaxWidth,
    signed: bool,
    out: &mut BitWriter,
) -> Result<()> {
    let mut elem_bits = 1u8;
    for &v in values {
        debug_assert!(signed || v >= 0);
        let mag = v.unsigned_abs();
        let need = magnitude_bits(mag);
        if need > width.max_element_bits() {
            return Err(Error::ValueOverflow {
                value: mag,
                max_bits: width.max_element_bits(),
            });
        }
        elem_bits = elem_bits.max(need);
    }
    out.write_bits((elem_bits - 1) as u64, width.field_bits());
    for &v in values {
        out.write_bits(v.unsigned_abs(), elem_bits);
        if signed {
            out.write_bits((v < 0) as u64, 1);
        }
    }
    Ok(())
}

/// Read back one series of `count` elements.
pub fn unpack_series(
    reader: &mut BitReader,
    count: usize,
    width: MaxWidth,
    signed: bool,
) -> Result<Vec<i64>> {
    let elem_bits = reader.read_bits(width.field_bits())? as u8 + 1;
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        let mag = reader.read_bits(elem_bits)?;
        if signed {
            let neg = reader.read_bits(1)? == 1;
            if neg && mag == 0 {
                return Err(Error::InconsistentMetadata("negative zero in series"));
            }
            values.push(if neg { -(mag as i64) } else { mag as i64 });
        } else {
            values.push(mag as i64);
        }
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pack_to_bytes(values: &[i64], width: MaxWidth, signed: bool) -> Vec<u8> {
        let mut w = BitWriter::new();
        pack_series(values, width, signed, &mut w).unwrap();
        w.pad_to_byte();
        w.into_bytes()
    }

    #[test]
    fn unsigned_one_bit_example() {
        // {1, 0, 1, 0}: width field 0000, then the four element bits.
        assert_eq!(pack_to_bytes(&[1, 0, 1, 0], MaxWidth::U16, false), vec![0x0A]);
    }

    #[test]
    fn signed_one_bit_example() {
        // {+1, -1} with a 5-bit width field: 00000 | 1,0 | 1,1 | padding.
        assert_eq!(
            pack_to_bytes(&[1, -1], MaxWidth::U32, true),
            vec![0x05, 0x80]
        );
    }

    #[test]
    fn empty_series_is_width_field_only() {
        assert_eq!(pack_to_bytes(&[], MaxWidth::U16, false), vec![0x00]);
        let mut r = BitReader::new(&[0x00]);
        assert_eq!(unpack_series(&mut r, 0, MaxWidth::U16, false).unwrap(), Vec::<i64>::new());
    }

    #[test]
    fn magnitude_bits_examples() {
        assert_eq!(magnitude_bits(0), 1);
        assert_eq!(magnitude_bits(1), 1);
        assert_eq!(magnitude_bits(2), 2);
        assert_eq!(magnitude_bits(3), 2);
        assert_eq!(magnitude_bits(4), 3);
        assert_eq!(magnitude_bits(65535), 16);
        assert_eq!(magnitude_bits(65536), 17);
    }

    #[test]
    fn overflow_is_rejected() {
        let mut w = BitWriter::new();
        let err = pack_series(&[70000], MaxWidth::U16, false, &mut w).unwrap_err();
        assert!(matches!(err, crate::error::Error::ValueOverflow { max_bits: 16, .. }));
        assert!(pack_series(&[70000], MaxWidth::U32, false, &mut BitWriter::new()).is_ok());
    }

    #[test]
    fn negative_zero_is_rejected() {
        // Width field 00000, magnitude 0, sign 1.
        let bytes = {
            let mut w = BitWriter::new();
            w.write_bits(0, 5);
            w.write_bits(0, 1);
            w.write_bits(1, 1);
            w.pad_to_byte();
            w.into_bytes()
        };
        let mut r = BitReader::new(&bytes);
        assert!(unpack_series(&mut r, 1, MaxWidth::U32, true).is_err());
    }

    #[test]
    fn truncation_is_detected() {
        let bytes = pack_to_bytes(&[1000, 2000, 3000], MaxWidth::U16, false);
        let mut r = BitReader::new(&bytes[..bytes.len() - 1]);
        assert!(matches!(
            unpack_series(&mut r, 3, MaxWidth::U16, false),
            Err(crate::error::Error::TruncatedSeries)
        ));
    }

    #[test]
    fn max_width_elements_roundtrip() {
        for (vals, width, signed) in [
            (vec![0i64, 65535, 1], MaxWidth::U16, false),
            (vec![0i64, 0, 0], MaxWidth::U16, false),
            (vec![(1i64 << 32) - 1, 0], MaxWidth::U32, false),
            (vec![-((1i64 << 32) - 1), (1i64 << 32) - 1], MaxWidth::U32, true),
            (vec![-32768i64, 32767], MaxWidth::U32, true),
        ] {
            let bytes = pack_to_bytes(&vals, width, signed);
            let mut r = BitReader::new(&bytes);
            assert_eq!(unpack_series(&mut r, vals.len(), width, signed).unwrap(), vals);
        }
    }

    #[test]
    fn consumed_byte_count_tracks_padding() {
        // 4-bit field + 4 one-bit elements = 8 bits exactly.
        let mut w = BitWriter::new();
        pack_series(&[1, 0, 1, 0], MaxWidth::U16, false, &mut w).unwrap();
        assert_eq!(w.bit_len(), 8);
        // 4-bit field + 3 two-bit elements = 10 bits, 2 bytes after padding.
        let mut w = BitWriter::new();
        pack_series(&[2, 1, 0], MaxWidth::U16, false, &mut w).unwrap();
        assert_eq!(w.bit_len(), 10);
        w.pad_to_byte();
        assert_eq!(w.into_bytes().len(), 2);
    }

    proptest! {
        #[test]
        fn roundtrip_unsigned(vals in proptest::collection::vec(0i64..=(u32::MAX as i64), 0..50)) {
            let bytes = pack_to_bytes(&vals, MaxWidth::U32, false);
            let mut r = BitReader::new(&bytes);
            prop_assert_eq!(unpack_series(&mut r, vals.len(), MaxWidth::U32, false).unwrap(), vals);
        }

        #[test]
        fn roundtrip_signed(vals in proptest::collection::vec(-(u32::MAX as i64)..=(u32::MAX as i64), 0..50)) {
            let bytes = pack_to_bytes(&vals, MaxWidth::U32, true);
            let mut r = BitReader::new(&bytes);
            prop_assert_eq!(unpack_series(&mut r, vals.len(), MaxWidth::U32, true).unwrap(), vals);
        }

        #[test]
        fn writer_reader_mirror(chunks in proptest::collection::vec((0u64..=u64::MAX, 1u8..=64), 0..40)) {
            let mut w = BitWriter::new();
            let mut expect = Vec::new();
            for &(v, bits) in &chunks {
                let v = if bits == 64 { v } else { v & ((1u64 << bits) - 1) };
                w.write_bits(v, bits);
                expect.push((v, bits));
            }
            w.pad_to_byte();
            let bytes = w.into_bytes();
            let mut r = BitReader::new(&bytes);
            for (v, bits) in expect {
                prop_assert_eq!(r.read_bits(bits).unwrap(), v);
            }
        }
    }
}
