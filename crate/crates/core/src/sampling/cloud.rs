use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a cloud was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessTag {
    Binomial,
    Poissonized,
    Homogeneous,
    Manifold,
    /// Read from a file or assembled by hand.
    File,
}

impl ProcessTag {
    fn code(self) -> u8 {
        match self {
            ProcessTag::Binomial => 0,
            ProcessTag::Poissonized => 1,
            ProcessTag::Homogeneous => 2,
            ProcessTag::Manifold => 3,
            ProcessTag::File => 4,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        Ok(match c {
            0 => ProcessTag::Binomial,
            1 => ProcessTag::Poissonized,
            2 => ProcessTag::Homogeneous,
            3 => ProcessTag::Manifold,
            4 => ProcessTag::File,
            other => return Err(Error::Parse(format!("unknown process tag {other}"))),
        })
    }
}

/// Finite point set in ℝᵈ stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    seed: u64,
    process: ProcessTag,
}

pub const BINARY_MAGIC: &[u8; 8] = b"CECHPC01";

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>, seed: u64, process: ProcessTag) -> Result<Self> {
        if dim == 0 && !coords.is_empty() {
            return Err(Error::InvalidArgument("zero-dimensional cloud with coordinates".into()));
        }
        if dim > 0 && !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates do not split into dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        Ok(Self { dim, coords, seed, process })
    }

    pub fn from_points(dim: usize, points: &[Vec<f64>], seed: u64, process: ProcessTag) -> Result<Self> {
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidArgument("point dimension mismatch".into()));
        }
        Self::new(dim, points.concat(), seed, process)
    }

    pub fn empty(dim: usize, seed: u64, process: ProcessTag) -> Self {
        Self { dim, coords: Vec::new(), seed, process }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn process(&self) -> ProcessTag {
        self.process
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim.max(1))
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { coords: self.coords.iter().map(|c| c * factor).collect(), ..self.clone() }
    }

    /// First `n` points (all of them if fewer).
    pub fn prefix(&self, n: usize) -> Self {
        let end = (n * self.dim).min(self.coords.len());
        Self { coords: self.coords[..end].to_vec(), ..self.clone() }
    }

    /// Writes `# key=value` header lines followed by one comma-separated row per point.
    pub fn write_csv<W: Write>(&self, mut w: W, header: &[String]) -> Result<()> {
        for line in header {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "# dim={} count={} seed={} process={:?}", self.dim, self.len(), self.seed, self.process)?;
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|v| format!("{v:?}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Parses the CSV format; `#` lines and blank lines are skipped.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut dim = 0usize;
        let mut coords = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if dim == 0 {
                dim = row.len();
            } else if row.len() != dim {
                return Err(Error::Parse(format!("line {}: expected {dim} columns, found {}", lineno + 1, row.len())));
            }
            coords.extend(row);
        }
        Self::new(dim, coords, 0, ProcessTag::File)
    }

    /// Binary layout (little endian): magic `CECHPC01`, dim u32, count u64,
    /// seed u64, process tag u8, then `count·dim` f64 coordinates.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&[self.process.code()])?;
        for c in &self.coords {
            w.write_all(&c.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::Parse("bad magic in binary cloud".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        let mut b1 = [0u8; 1];
        r.read_exact(&mut b4)?;
        let dim = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8)?;
        let count = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let seed = u64::from_le_bytes(b8);
        r.read_exact(&mut b1)?;
        let process = ProcessTag::from_code(b1[0])?;
        let mut coords = Vec::with_capacity(count * dim);
        for _ in 0..count * dim {
            r.read_exact(&mut b8)?;
            coords.push(f64::from_le_bytes(b8));
        }
        Self::new(dim, coords, seed, process)
    }
}
