//! Little byte-level writer/reader pair used by every wire-visible struct.
//!
//! Integers are big-endian; variable-length fields carry a u32 length
//! prefix; points and scalars are 32-byte canonical encodings and decoding
//! validates them.

use pep3_group::{GroupElement, Scalar};

use crate::error::{Error, Result};

#[derive(Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Writer {
        Writer::default()
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn bytes(&mut self, v: &[u8]) {
        self.buf.extend_from_slice(v);
    }

    /// u32 length prefix, then the bytes.
    pub fn var_bytes(&mut self, v: &[u8]) {
        self.u32(v.len() as u32);
        self.bytes(v);
    }

    pub fn string(&mut self, v: &str) {
        self.var_bytes(v.as_bytes());
    }

    pub fn point(&mut self, p: &GroupElement) {
        self.bytes(&p.encode());
    }

    pub fn scalar(&mut self, s: &Scalar) {
        self.bytes(&s.to_bytes());
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Reader<'a> {
        Reader { buf, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(Error::Encoding("length overflow"))?;
        let s = self.buf.get(self.pos..end).ok_or(Error::Encoding("truncated"))?;
        self.pos = end;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn var_bytes(&mut self) -> Result<&'a [u8]> {
        let n = self.u32()? as usize;
        self.take(n)
    }

    pub fn string(&mut self) -> Result<String> {
        let b = self.var_bytes()?;
        String::from_utf8(b.to_vec()).map_err(|_| Error::Encoding("invalid utf-8"))
    }

    pub fn point(&mut self) -> Result<GroupElement> {
        let b: [u8; 32] = self.take(32)?.try_into().unwrap();
        GroupElement::decode(&b).ok_or(Error::Encoding("invalid group element"))
    }

    pub fn scalar(&mut self) -> Result<Scalar> {
        let b: [u8; 32] = self.take(32)?.try_into().unwrap();
        Scalar::from_canonical_bytes(&b).ok_or(Error::Encoding("non-canonical scalar"))
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    /// Fails unless every byte was consumed.
    pub fn finish(self) -> Result<()> {
        if self.remaining() == 0 {
            Ok(())
        } else {
            Err(Error::Encoding("trailing bytes"))
        }
    }
}
