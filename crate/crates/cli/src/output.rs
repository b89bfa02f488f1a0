//! Files written by a run: per-study CSVs, trajectory snapshots, the
//! manifest and the summary.
//!
//! Snapshot binary layout, all little-endian:
//!
//! | bytes | content |
//! |---|---|
//! | 8 | magic `TWSNAP\0\0` |
//! | 4 | format version (`u32`, currently 1) |
//! | 8 | `n` (`u64`) |
//! | 8 | half length `L` (`f64`) |
//! | 8 | number of saved times `m` (`u64`) |
//! | 8 m | times (`f64`) |
//! | 8 m n | values, time-major (`f64`) |
//!
//! Node `j` sits at `x_j = -L + 2 L j / n`.

use crate::config::ExperimentConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

pub const SNAPSHOT_MAGIC: [u8; 8] = *b"TWSNAP\0\0";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Int(v) => write!(out, "{v}"),
            Cell::Float(v) => write!(out, "{v:.16e}"),
            Cell::Text(s) => write!(out, "{s}"),
        }
        .expect("write to string");
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// A CSV table with a fixed column order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                c.render(&mut out);
            }
            out.push('\n');
        }
        out
    }
}

/// Saved states of one run on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub n: usize,
    pub half_length: f64,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn x(&self, j: usize) -> f64 {
        -self.half_length + 2.0 * self.half_length * j as f64 / self.n as f64
    }

    /// Long format with columns `t, x, value`.
    pub fn to_csv(&self) -> String {
        let mut table = Table::new(vec!["t", "x", "value"]);
        for (t, row) in self.times.iter().zip(&self.values) {
            for (j, v) in row.iter().enumerate() {
                table.push(vec![(*t).into(), self.x(j).into(), (*v).into()]);
            }
        }
        table.to_csv()
    }

    pub fn write_binary(&self, w: &mut impl Write) -> io::Result<()> {
        w.write_all(&SNAPSHOT_MAGIC)?;
        w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&self.half_length.to_le_bytes())?;
        w.write_all(&(self.times.len() as u64).to_le_bytes())?;
        for t in &self.times {
            w.write_all(&t.to_le_bytes())?;
        }
        for row in &self.values {
            for v in row {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> io::Result<Self> {
        let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if magic != SNAPSHOT_MAGIC {
            return Err(bad("not a snapshot file"));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != SNAPSHOT_VERSION {
            return Err(bad(&format!("unsupported snapshot version {version}")));
        }
        let mut b8 = [0u8; 8];
        let mut next = |r: &mut dyn Read| -> io::Result<[u8; 8]> {
            r.read_exact(&mut b8)?;
            Ok(b8)
        };
        let n = u64::from_le_bytes(next(r)?) as usize;
        let half_length = f64::from_le_bytes(next(r)?);
        let m = u64::from_le_bytes(next(r)?) as usize;
        let times = (0..m).map(|_| next(r).map(f64::from_le_bytes)).collect::<io::Result<Vec<_>>>()?;
        let values = (0..m)
            .map(|_| (0..n).map(|_| next(r).map(f64::from_le_bytes)).collect::<io::Result<Vec<_>>>())
            .collect::<io::Result<Vec<_>>>()?;
        Ok(Snapshot { n, half_length, times, values })
    }
}

/// One tolerance check; `lo <= value <= hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub pass: bool,
}

impl Check {
    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Check { name: name.into(), value, lo, hi, pass: value >= lo && value <= hi }
    }

    pub fn at_most(name: &str, value: f64, hi: f64) -> Self {
        Check::within(name, value, f64::NEG_INFINITY, hi)
    }

    /// A yes/no outcome recorded as 1 or 0 against the window `[1, 1]`.
    pub fn holds(name: &str, ok: bool) -> Self {
        Check::within(name, if ok { 1.0 } else { 0.0 }, 1.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub study: String,
    pub passed: bool,
    pub members: usize,
    pub checks: Vec<Check>,
    /// Free-form notes, e.g. the breaking classification per member.
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub versions: BTreeMap<String, String>,
    /// File name to lowercase hex SHA-256.
    pub checksums: BTreeMap<String, String>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        write!(s, "{b:02x}").expect("write to string");
        s
    })
}

/// Writes files into one directory and remembers their checksums.
pub struct OutputDir {
    root: PathBuf,
    checksums: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> io::Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), checksums: BTreeMap::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> io::Result<PathBuf> {
        let path = self.root.join(name);
        std::fs::write(&path, bytes)?;
        self.checksums.insert(name.to_string(), sha256_hex(bytes));
        Ok(path)
    }

    pub fn write_snapshot(&mut self, stem: &str, snap: &Snapshot) -> io::Result<()> {
        self.write(&format!("{stem}.csv"), snap.to_csv().as_bytes())?;
        let mut bin = Vec::new();
        snap.write_binary(&mut bin)?;
        self.write(&format!("{stem}.bin"), &bin)?;
        Ok(())
    }

    /// Writes `summary.toml` and then `manifest.toml`, which covers every
    /// file written before it.
    pub fn finish(mut self, config: &ExperimentConfig, summary: &Summary) -> io::Result<Manifest> {
        let text = toml::to_string(summary).map_err(io::Error::other)?;
        self.write("summary.toml", text.as_bytes())?;
        let mut versions = BTreeMap::new();
        versions.insert("topowave".to_string(), topowave::VERSION.to_string());
        versions.insert("topowave-cli".to_string(), env!("CARGO_PKG_VERSION").to_string());
        versions.insert("snapshot-format".to_string(), SNAPSHOT_VERSION.to_string());
        let manifest = Manifest { config: config.clone(), versions, checksums: self.checksums };
        let text = toml::to_string(&manifest).map_err(io::Error::other)?;
        std::fs::write(self.root.join("manifest.toml"), text)?;
        Ok(manifest)
    }
}
