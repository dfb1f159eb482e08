//! Record framing and persistence backends.
//!
//! A record is `len:u32 ‖ index:u64 ‖ entry ‖ checksum`, where `len` counts
//! everything after itself and `checksum = H(tag ‖ index ‖ entry)`. The
//! checksum lets an audit pin any corruption to one record before the
//! signatures are even looked at.

use std::{
    fs::{File, OpenOptions},
    io::{self, Write},
    path::Path,
};

use trip_core::{codec::Writer, hash};

use crate::{AuditFailure, AuditFault};

const CHECKSUM_TAG: &[u8] = b"trip/ledger/record";
const HEADER_LEN: usize = 4;
const INDEX_LEN: usize = 8;
const CHECKSUM_LEN: usize = 32;

fn checksum(index: u64, entry: &[u8]) -> [u8; 32] {
    let mut w = Writer::new();
    w.field(CHECKSUM_TAG).u64(index).long_field(entry);
    hash(&w.finish())
}

/// Frames an encoded entry as the record at `index`.
pub fn encode_record(index: u64, entry: &[u8]) -> Vec<u8> {
    let len = u32::try_from(INDEX_LEN + entry.len() + CHECKSUM_LEN).expect("entry longer than 4 GiB");
    let mut out = Vec::with_capacity(HEADER_LEN + len as usize);
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(&index.to_be_bytes());
    out.extend_from_slice(entry);
    out.extend_from_slice(&checksum(index, entry));
    out
}

/// Splits a ledger file into entry payloads, checking framing, index
/// sequence and checksums.
pub(crate) fn split_records(bytes: &[u8]) -> Result<Vec<&[u8]>, AuditFailure> {
    let mut out = Vec::new();
    let mut rest = bytes;
    while !rest.is_empty() {
        let index = out.len() as u64;
        let fail = |fault| AuditFailure { index, fault };
        if rest.len() < HEADER_LEN {
            return Err(fail(AuditFault::Framing));
        }
        let len = u32::from_be_bytes(rest[..HEADER_LEN].try_into().unwrap()) as usize;
        let body = &rest[HEADER_LEN..];
        if len < INDEX_LEN + CHECKSUM_LEN || body.len() < len {
            return Err(fail(AuditFault::Framing));
        }
        let (record, tail) = body.split_at(len);
        let found = u64::from_be_bytes(record[..INDEX_LEN].try_into().unwrap());
        let (entry, sum) = record[INDEX_LEN..].split_at(len - INDEX_LEN - CHECKSUM_LEN);
        if sum != checksum(found, entry) {
            return Err(fail(AuditFault::Checksum));
        }
        if found != index {
            return Err(fail(AuditFault::IndexMismatch { found }));
        }
        out.push(entry);
        rest = tail;
    }
    Ok(out)
}

/// Where appended records go. Records are kept in memory by the ledger
/// regardless; a store only adds durability.
pub trait Store: Send {
    fn persist(&mut self, record: &[u8]) -> io::Result<()>;
}

#[derive(Debug, Default)]
pub struct MemoryStore;

impl Store for MemoryStore {
    fn persist(&mut self, _record: &[u8]) -> io::Result<()> {
        Ok(())
    }
}

/// Append-only file of records.
#[derive(Debug)]
pub struct FileStore {
    file: File,
}

impl FileStore {
    pub fn open(path: &Path) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { file })
    }
}

impl Store for FileStore {
    fn persist(&mut self, record: &[u8]) -> io::Result<()> {
        self.file.write_all(record)?;
        self.file.flush()
    }
}
