//! Output directory handling: CSV tables with fixed float formatting, JSON
//! reports and SHA-256 digests of everything written.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Float rendering used in every CSV: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileDigest {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

struct HashingWriter<W> {
    inner: W,
    hasher: Sha256,
    bytes: u64,
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        self.bytes += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Streaming CSV table; every row must match the header width.
pub struct Table {
    name: String,
    path: PathBuf,
    writer: csv::Writer<HashingWriter<BufWriter<File>>>,
}

impl Table {
    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        Ok(self.writer.write_record(fields)?)
    }
}

/// The output directory of one run.
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<FileDigest>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn digests(&self) -> &[FileDigest] {
        &self.written
    }

    pub fn table(&self, name: &str, header: &[String]) -> Result<Table, CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut writer = csv::Writer::from_writer(HashingWriter {
            inner: BufWriter::new(file),
            hasher: Sha256::new(),
            bytes: 0,
        });
        writer.write_record(header)?;
        Ok(Table {
            name: name.to_string(),
            path,
            writer,
        })
    }

    pub fn finish(&mut self, table: Table) -> Result<(), CliError> {
        let Table { name, path, writer } = table;
        let mut inner = writer.into_inner().map_err(|e| CliError::io(&path, e.into_error()))?;
        inner.flush().map_err(|e| CliError::io(&path, e))?;
        self.written.push(FileDigest {
            file: name,
            bytes: inner.bytes,
            sha256: hex::encode(inner.hasher.finalize()),
        });
        Ok(())
    }

    /// Pretty-printed JSON followed by a newline.
    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut bytes =
            serde_json::to_vec_pretty(value).map_err(|e| CliError::Input(format!("serializing {name}: {e}")))?;
        bytes.push(b'\n');
        self.raw(name, &bytes)
    }

    fn raw(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.written.push(FileDigest {
            file: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }
}

/// `prefix_1, ..., prefix_n`.
pub fn numbered(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}_{i}"))
}
