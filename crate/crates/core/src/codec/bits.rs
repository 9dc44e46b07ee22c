//! MSB-first bit-level reading and writing with exact bit accounting.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitReadError {
    #[error("bitstream ended inside a code word")]
    UnexpectedEnd,
}

#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    /// Total bits written.
    bit_len: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write_bit(&mut self, bit: bool) {
        let offset = (self.bit_len % 8) as u8;
        if offset == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> offset;
        }
        self.bit_len += 1;
    }

    /// Writes the low `count` bits of `value`, most significant first.
    pub fn write_bits(&mut self, value: u64, count: u32) {
        debug_assert!(count <= 64);
        for i in (0..count).rev() {
            self.write_bit((value >> i) & 1 == 1);
        }
    }

    /// Appends whole bytes; the writer must be byte-aligned.
    pub fn write_bytes(&mut self, bytes: &[u8]) {
        assert_eq!(self.bit_len % 8, 0, "unaligned byte write");
        self.bytes.extend_from_slice(bytes);
        self.bit_len += bytes.len() as u64 * 8;
    }

    pub fn bit_len(&self) -> u64 {
        self.bit_len
    }

    /// Final byte buffer, zero-padded to a byte boundary.
    pub fn into_bytes(self) -> (Vec<u8>, u64) {
        (self.bytes, self.bit_len)
    }
}

pub struct BitReader<'a> {
    bytes: &'a [u8],
    /// Next bit to read.
    pos: u64,
    /// Reads at or past this bit index fail.
    bit_limit: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8], bit_limit: u64) -> Self {
        debug_assert!(bit_limit <= bytes.len() as u64 * 8);
        Self {
            bytes,
            pos: 0,
            bit_limit,
        }
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn remaining(&self) -> u64 {
        self.bit_limit - self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool, BitReadError> {
        if self.pos >= self.bit_limit {
            return Err(BitReadError::UnexpectedEnd);
        }
        let byte = self.bytes[(self.pos / 8) as usize];
        let bit = (byte >> (7 - (self.pos % 8) as u8)) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, count: u32) -> Result<u64, BitReadError> {
        debug_assert!(count <= 64);
        let mut value = 0u64;
        for _ in 0..count {
            value = (value << 1) | self.read_bit()? as u64;
        }
        Ok(value)
    }

    /// Reads whole bytes; the reader must be byte-aligned.
    pub fn read_bytes(&mut self, count: usize) -> Result<&'a [u8], BitReadError> {
        assert_eq!(self.pos % 8, 0, "unaligned byte read");
        let start = (self.pos / 8) as usize;
        if self.pos + count as u64 * 8 > self.bit_limit {
            return Err(BitReadError::UnexpectedEnd);
        }
        self.pos += count as u64 * 8;
        Ok(&self.bytes[start..start + count])
    }
}
