//! Length-prefixed field concatenation.
//!
//! Every composite payload, signed message and hash input is a sequence of
//! fields, each written as a big-endian `u16` length followed by the bytes.

use crate::{CryptoError, Group};

#[derive(Debug, Default, Clone)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts a payload with a raw (unprefixed) tag byte.
    pub fn tagged(tag: u8) -> Self {
        Self { buf: vec![tag] }
    }

    pub fn field(&mut self, bytes: &[u8]) -> &mut Self {
        let len = u16::try_from(bytes.len()).expect("field longer than 65535 bytes");
        self.buf.extend_from_slice(&len.to_be_bytes());
        self.buf.extend_from_slice(bytes);
        self
    }

    /// Field with a `u32` length prefix, for blobs that may exceed 64 KiB.
    pub fn long_field(&mut self, bytes: &[u8]) -> &mut Self {
        let len = u32::try_from(bytes.len()).expect("blob longer than 4 GiB");
        self.buf.extend_from_slice(&len.to_be_bytes());
        self.buf.extend_from_slice(bytes);
        self
    }

    pub fn u64(&mut self, value: u64) -> &mut Self {
        self.field(&value.to_be_bytes())
    }

    pub fn element<G: Group>(&mut self, e: &G::Element) -> &mut Self {
        self.field(&G::encode_element(e))
    }

    pub fn scalar<G: Group>(&mut self, s: &G::Scalar) -> &mut Self {
        self.field(&G::encode_scalar(s))
    }

    pub fn finish(&mut self) -> Vec<u8> {
        std::mem::take(&mut self.buf)
    }
}

/// Concatenates `fields` with length prefixes.
pub fn concat(fields: &[&[u8]]) -> Vec<u8> {
    let mut w = Writer::new();
    for f in fields {
        w.field(f);
    }
    w.finish()
}

#[derive(Debug)]
pub struct Reader<'a> {
    buf: &'a [u8],
    what: &'static str,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8], what: &'static str) -> Self {
        Self { buf, what }
    }

    fn malformed(&self) -> CryptoError {
        CryptoError::Malformed(self.what)
    }

    /// Consumes a raw tag byte and checks it.
    pub fn expect_tag(&mut self, tag: u8) -> Result<(), CryptoError> {
        match self.buf.split_first() {
            Some((&t, rest)) if t == tag => {
                self.buf = rest;
                Ok(())
            }
            _ => Err(self.malformed()),
        }
    }

    pub fn field(&mut self) -> Result<&'a [u8], CryptoError> {
        if self.buf.len() < 2 {
            return Err(self.malformed());
        }
        let len = usize::from(u16::from_be_bytes([self.buf[0], self.buf[1]]));
        let rest = &self.buf[2..];
        if rest.len() < len {
            return Err(self.malformed());
        }
        let (field, rest) = rest.split_at(len);
        self.buf = rest;
        Ok(field)
    }

    pub fn long_field(&mut self) -> Result<&'a [u8], CryptoError> {
        if self.buf.len() < 4 {
            return Err(self.malformed());
        }
        let len = u32::from_be_bytes([self.buf[0], self.buf[1], self.buf[2], self.buf[3]]) as usize;
        let rest = &self.buf[4..];
        if rest.len() < len {
            return Err(self.malformed());
        }
        let (field, rest) = rest.split_at(len);
        self.buf = rest;
        Ok(field)
    }

    pub fn u64(&mut self) -> Result<u64, CryptoError> {
        let bytes: [u8; 8] = self.field()?.try_into().map_err(|_| self.malformed())?;
        Ok(u64::from_be_bytes(bytes))
    }

    pub fn element<G: Group>(&mut self) -> Result<G::Element, CryptoError> {
        let bytes = self.field()?;
        G::decode_element(bytes).ok_or(CryptoError::Malformed("group element"))
    }

    pub fn scalar<G: Group>(&mut self) -> Result<G::Scalar, CryptoError> {
        let bytes = self.field()?;
        G::decode_scalar(bytes).ok_or(CryptoError::Malformed("scalar"))
    }

    pub fn utf8(&mut self) -> Result<&'a str, CryptoError> {
        std::str::from_utf8(self.field()?).map_err(|_| self.malformed())
    }

    /// Fails unless every byte has been consumed.
    pub fn finish(self) -> Result<(), CryptoError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(self.malformed())
        }
    }
}
