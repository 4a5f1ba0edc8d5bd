//! Binary snapshot format.
//!
//! ```text
//! offset  size  content
//! 0       6     magic "HFNS1\0"
//! 6       8     n (u64 LE)
//! 14      8     number of retained modes (n-1)³ (u64 LE)
//! 22      8     L (f64 LE)
//! 30      8     alpha (f64 LE)
//! 38      8     nu (f64 LE)
//! 46      8     time (f64 LE)
//! 54      48·M  coefficients in lexicographic k order (k1 slowest), per mode
//!               the three components as (re, im) pairs of f64 LE
//! ```
//!
//! A trajectory file is a plain concatenation of snapshot records.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::IoError;
use crate::spectral::{Grid, SpectralVectorField};

pub const MAGIC: &[u8; 6] = b"HFNS1\0";
const HEADER_LEN: usize = 6 + 6 * 8;

/// One stored state with the parameters needed to interpret it.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: SpectralVectorField,
    pub alpha: f64,
    pub nu: f64,
    pub time: f64,
}

impl Snapshot {
    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        let grid = self.field.grid();
        let mut buf = Vec::with_capacity(HEADER_LEN + 48 * grid.mode_count());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&(grid.n() as u64).to_le_bytes());
        buf.extend_from_slice(&(grid.mode_count() as u64).to_le_bytes());
        for x in [grid.period_scale(), self.alpha, self.nu, self.time] {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        for c in self.field.coeffs() {
            for z in c {
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        out.write_all(&buf)
    }

    /// Read one record. `Ok(None)` at a clean end of input.
    pub fn read_from<R: Read>(mut input: R) -> Result<Option<Self>, IoError> {
        let mut header = [0u8; HEADER_LEN];
        let got = read_up_to(&mut input, &mut header)?;
        if got == 0 {
            return Ok(None);
        }
        if got < MAGIC.len() || &header[..6] != MAGIC {
            return Err(IoError::BadMagic);
        }
        if got < HEADER_LEN {
            return Err(IoError::ShortRead);
        }
        let u = |i: usize| u64::from_le_bytes(header[6 + 8 * i..14 + 8 * i].try_into().unwrap());
        let f = |i: usize| f64::from_le_bytes(header[6 + 8 * i..14 + 8 * i].try_into().unwrap());
        let (n, modes) = (u(0), u(1));
        let grid = usize::try_from(n)
            .ok()
            .and_then(|n| Grid::new(n, f(2)).ok())
            .ok_or_else(|| IoError::DimensionMismatch(format!("header n = {n} with L = {} is not a valid grid", f(2))))?;
        if modes != grid.mode_count() as u64 {
            return Err(IoError::DimensionMismatch(format!(
                "header n = {n} implies {} modes, payload declares {modes}",
                grid.mode_count()
            )));
        }
        let mut payload = vec![0u8; 48 * grid.mode_count()];
        if read_up_to(&mut input, &mut payload)? < payload.len() {
            return Err(IoError::ShortRead);
        }
        let coeffs = payload
            .chunks_exact(48)
            .map(|c| {
                let v = |i: usize| f64::from_le_bytes(c[8 * i..8 * i + 8].try_into().unwrap());
                [
                    Complex64::new(v(0), v(1)),
                    Complex64::new(v(2), v(3)),
                    Complex64::new(v(4), v(5)),
                ]
            })
            .collect();
        let field = SpectralVectorField::from_coeffs(grid, coeffs).map_err(|e| IoError::InvalidPayload(e.to_string()))?;
        Ok(Some(Snapshot {
            field,
            alpha: f(3),
            nu: f(4),
            time: f(5),
        }))
    }
}

fn read_up_to<R: Read>(input: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match input.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(k) => filled += k,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

pub fn store_snapshot(snapshot: &Snapshot, path: &Path) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    snapshot.write_to(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Load a file holding exactly one snapshot.
pub fn load_snapshot(path: &Path) -> Result<Snapshot, IoError> {
    let mut r = BufReader::new(File::open(path)?);
    let snap = Snapshot::read_from(&mut r)?.ok_or(IoError::ShortRead)?;
    let mut rest = [0u8; 1];
    if read_up_to(&mut r, &mut rest)? != 0 {
        return Err(IoError::DimensionMismatch("bytes after the declared payload".into()));
    }
    Ok(snap)
}

/// Appends snapshots to a trajectory file.
pub struct TrajectoryWriter {
    out: BufWriter<File>,
}

impl TrajectoryWriter {
    pub fn create(path: &Path) -> Result<Self, IoError> {
        Ok(Self {
            out: BufWriter::new(File::create(path)?),
        })
    }

    pub fn append(&mut self, snapshot: &Snapshot) -> Result<(), IoError> {
        snapshot.write_to(&mut self.out)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), IoError> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn load_trajectory_file(path: &Path) -> Result<Vec<Snapshot>, IoError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    while let Some(s) = Snapshot::read_from(&mut r)? {
        out.push(s);
    }
    if out.is_empty() {
        return Err(IoError::ShortRead);
    }
    Ok(out)
}
