//! EMB1 reader and writer. All integers and floats are little-endian.
//!
//! ```text
//! "EMB1"                      magic
//! u16                         version (1)
//! [u8; 32]                    corpus fingerprint
//! u16                         number of roles R
//! R × { u16 len, len bytes of UTF-8 role name, u32 dim }
//! u64                         number of records N
//! N × { u32 sentence, u16 role id, u64 payload offset }
//! N × { u32 count, count × f32 }    payload, in index order
//! ```
//!
//! Payload offsets count from the first payload byte and must describe the
//! records back to back. A record's count must equal its role's dim.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use super::EmbeddingDataset;
use crate::error::{Error, Result};
use crate::fingerprint::Fingerprint;
use crate::role::Role;

pub const MAGIC: &[u8; 4] = b"EMB1";
pub const VERSION: u16 = 1;

/// One index entry: where a (sentence, role) vector lives in the payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexEntry {
    pub sentence: u32,
    pub role: Role,
    pub offset: u64,
}

pub fn write_dataset<W: Write>(ds: &EmbeddingDataset, mut out: W) -> std::io::Result<()> {
    let roles: Vec<(Role, u32)> = ds.dims().iter().map(|(&r, &d)| (r, d)).collect();
    let role_id: BTreeMap<Role, u16> =
        roles.iter().enumerate().map(|(i, (r, _))| (*r, i as u16)).collect();

    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&ds.fingerprint().0)?;
    out.write_all(&(roles.len() as u16).to_le_bytes())?;
    for (role, dim) in &roles {
        let name = role.as_str().as_bytes();
        out.write_all(&(name.len() as u16).to_le_bytes())?;
        out.write_all(name)?;
        out.write_all(&dim.to_le_bytes())?;
    }
    out.write_all(&(ds.len() as u64).to_le_bytes())?;
    let mut offset = 0u64;
    for ((sentence, role), v) in ds.iter() {
        out.write_all(&sentence.to_le_bytes())?;
        out.write_all(&role_id[&role].to_le_bytes())?;
        out.write_all(&offset.to_le_bytes())?;
        offset += 4 + 4 * v.len() as u64;
    }
    let mut buf = Vec::new();
    for (_, v) in ds.iter() {
        buf.clear();
        buf.extend_from_slice(&(v.len() as u32).to_le_bytes());
        for x in v {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    out.flush()
}

pub fn save_dataset(ds: &EmbeddingDataset, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(ds, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn read_dataset<R: Read>(input: R) -> Result<EmbeddingDataset> {
    let mut reader = DatasetReader::new(input)?;
    let mut ds = EmbeddingDataset::new(reader.fingerprint(), reader.dims().clone());
    while let Some((sentence, role, v)) = reader.next_record()? {
        ds.insert(sentence, role, v)?;
    }
    Ok(ds)
}

pub fn load_dataset(path: &Path) -> Result<EmbeddingDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(std::io::BufReader::new(file))
}

/// Streaming reader: parses the header and index up front, then yields one
/// record at a time.
pub struct DatasetReader<R> {
    input: R,
    pos: u64,
    fingerprint: Fingerprint,
    dims: BTreeMap<Role, u32>,
    index: Vec<IndexEntry>,
    next: usize,
    payload_start: u64,
}

impl<R: Read> DatasetReader<R> {
    pub fn new(input: R) -> Result<Self> {
        let mut r = DatasetReader {
            input,
            pos: 0,
            fingerprint: Fingerprint::default(),
            dims: BTreeMap::new(),
            index: Vec::new(),
            next: 0,
            payload_start: 0,
        };
        let magic: [u8; 4] = r.array("magic")?;
        if &magic != MAGIC {
            return Err(Error::Dataset { offset: 0, message: format!("bad magic {magic:02x?}") });
        }
        let version = u16::from_le_bytes(r.array("version")?);
        if version != VERSION {
            return Err(Error::Dataset {
                offset: 4,
                message: format!("unsupported version {version}"),
            });
        }
        r.fingerprint = Fingerprint(r.array("fingerprint")?);

        let n_roles = u16::from_le_bytes(r.array("role count")?);
        let mut roles = Vec::with_capacity(n_roles as usize);
        for _ in 0..n_roles {
            let at = r.pos;
            let len = u16::from_le_bytes(r.array("role name length")?) as usize;
            let mut name = vec![0u8; len];
            r.fill(&mut name, "role name")?;
            let role: Role = std::str::from_utf8(&name)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Dataset {
                    offset: at,
                    message: format!("unknown role name {:?}", String::from_utf8_lossy(&name)),
                })?;
            let dim = u32::from_le_bytes(r.array("role dim")?);
            if dim == 0 {
                return Err(Error::Dataset { offset: r.pos - 4, message: format!("role {role} has dim 0") });
            }
            if r.dims.insert(role, dim).is_some() {
                return Err(Error::Dataset { offset: at, message: format!("role {role} declared twice") });
            }
            roles.push(role);
        }

        let n_records = u64::from_le_bytes(r.array("record count")?);
        let mut keys = HashSet::new();
        let mut expected = 0u64;
        for _ in 0..n_records {
            let at = r.pos;
            let sentence = u32::from_le_bytes(r.array("index sentence")?);
            let role_id = u16::from_le_bytes(r.array("index role")?);
            let offset = u64::from_le_bytes(r.array("index offset")?);
            let role = *roles.get(role_id as usize).ok_or_else(|| Error::Dataset {
                offset: at + 4,
                message: format!("role id {role_id} out of range ({n_roles} roles)"),
            })?;
            if offset != expected {
                return Err(Error::Dataset {
                    offset: at + 6,
                    message: format!("payload offset {offset}, expected {expected}"),
                });
            }
            if !keys.insert((sentence, role)) {
                return Err(Error::Dataset {
                    offset: at,
                    message: format!("duplicate record for sentence {sentence}, role {role}"),
                });
            }
            expected += 4 + 4 * r.dims[&role] as u64;
            r.index.push(IndexEntry { sentence, role, offset });
        }
        r.payload_start = r.pos;
        Ok(r)
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    pub fn dims(&self) -> &BTreeMap<Role, u32> {
        &self.dims
    }

    pub fn index(&self) -> &[IndexEntry] {
        &self.index
    }

    /// Byte offset of the first payload record.
    pub fn payload_start(&self) -> u64 {
        self.payload_start
    }

    /// Reads the next record, or checks for a clean end of file after the last.
    pub fn next_record(&mut self) -> Result<Option<(u32, Role, Vec<f32>)>> {
        let Some(&entry) = self.index.get(self.next) else {
            let mut probe = [0u8; 1];
            let n = self.input.read(&mut probe).map_err(|e| self.io_err(e))?;
            if n != 0 {
                return Err(Error::Dataset { offset: self.pos, message: "trailing bytes after payload".into() });
            }
            return Ok(None);
        };
        self.next += 1;
        let start = self.pos;
        let count = u32::from_le_bytes(self.array("record length")?);
        let dim = self.dims[&entry.role];
        if count != dim {
            return Err(Error::Dataset {
                offset: start,
                message: format!(
                    "record (sentence {}, {}) has {count} components, role declares {dim}",
                    entry.sentence, entry.role
                ),
            });
        }
        let mut bytes = vec![0u8; 4 * dim as usize];
        self.fill(&mut bytes, "vector")?;
        let mut v = Vec::with_capacity(dim as usize);
        for (i, chunk) in bytes.chunks_exact(4).enumerate() {
            let x = f32::from_le_bytes(chunk.try_into().unwrap());
            if !x.is_finite() {
                return Err(Error::Dataset {
                    offset: start + 4 + 4 * i as u64,
                    message: format!(
                        "non-finite component {i} in record (sentence {}, {})",
                        entry.sentence, entry.role
                    ),
                });
            }
            v.push(x);
        }
        Ok(Some((entry.sentence, entry.role, v)))
    }

    fn io_err(&self, e: std::io::Error) -> Error {
        Error::Dataset { offset: self.pos, message: e.to_string() }
    }

    fn fill(&mut self, buf: &mut [u8], what: &str) -> Result<()> {
        let mut got = 0;
        while got < buf.len() {
            match self.input.read(&mut buf[got..]) {
                Ok(0) => {
                    return Err(Error::Dataset {
                        offset: self.pos + got as u64,
                        message: format!("file ends inside {what}"),
                    })
                }
                Ok(n) => got += n,
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
                Err(e) => return Err(self.io_err(e)),
            }
        }
        self.pos += buf.len() as u64;
        Ok(())
    }

    fn array<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.fill(&mut b, what)?;
        Ok(b)
    }
}
