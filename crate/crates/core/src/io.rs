//! `.ansf` binary field files and small CSV helpers.
//!
//! Layout (little endian):
//!
//! ```text
//! offset  size  content
//!      0     4  magic "ANSF"
//!      4     4  version (u32) = 1
//!      8    12  n1, n2, n3 (u32)
//!     20     4  component count (u32): 1 scalar, 3 vector
//!     24     8  reserved, zero
//!     32    24  L1, L2, L3 (f64)
//!     56     …  per component, row-major (i1, i2, i3) coefficients in FFT
//!               order as (re, im) f64 pairs
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array3;
use num_complex::Complex64;

use crate::error::{AnsError, Result};
use crate::field::{SpectralField, VectorField};
use crate::grid::Grid;

pub const MAGIC: &[u8; 4] = b"ANSF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

/// Contents of a field file.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldData {
    Scalar(SpectralField),
    Vector(VectorField),
}

impl FieldData {
    pub fn grid(&self) -> &Grid {
        match self {
            FieldData::Scalar(f) => f.grid(),
            FieldData::Vector(v) => v.grid(),
        }
    }

    pub fn components(&self) -> Vec<&SpectralField> {
        match self {
            FieldData::Scalar(f) => vec![f],
            FieldData::Vector(v) => v.components().iter().collect(),
        }
    }
}

pub fn encode(components: &[&SpectralField]) -> Result<Vec<u8>> {
    let first = components
        .first()
        .ok_or_else(|| AnsError::Format("no components to encode".into()))?;
    for c in components {
        first.check_same_grid(c)?;
    }
    let grid = *first.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 24 + components.len() * grid.len() * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for n in grid.n() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    out.extend_from_slice(&(components.len() as u32).to_le_bytes());
    out.extend_from_slice(&[0u8; 8]);
    for l in grid.lengths() {
        out.extend_from_slice(&l.to_le_bytes());
    }
    for c in components {
        for v in c.data() {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    Ok(out)
}

fn u32_at(bytes: &[u8], off: usize) -> u32 {
    u32::from_le_bytes(bytes[off..off + 4].try_into().expect("length checked"))
}

fn f64_at(bytes: &[u8], off: usize) -> f64 {
    f64::from_le_bytes(bytes[off..off + 8].try_into().expect("length checked"))
}

pub fn decode(bytes: &[u8]) -> Result<FieldData> {
    if bytes.len() < HEADER_LEN + 24 {
        return Err(AnsError::Format("file shorter than header".into()));
    }
    if &bytes[0..4] != MAGIC {
        return Err(AnsError::Format("bad magic, expected ANSF".into()));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(AnsError::Format(format!("unsupported version {version}")));
    }
    let n = [
        u32_at(bytes, 8) as usize,
        u32_at(bytes, 12) as usize,
        u32_at(bytes, 16) as usize,
    ];
    let ncomp = u32_at(bytes, 20) as usize;
    let lengths = [f64_at(bytes, 32), f64_at(bytes, 40), f64_at(bytes, 48)];
    let grid = Grid::new(n, lengths).map_err(|e| AnsError::Format(e.to_string()))?;
    if ncomp != 1 && ncomp != 3 {
        return Err(AnsError::Format(format!(
            "component count {ncomp} must be 1 or 3"
        )));
    }
    let expected = HEADER_LEN + 24 + ncomp * grid.len() * 16;
    if bytes.len() != expected {
        return Err(AnsError::Format(format!(
            "payload is {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let mut off = HEADER_LEN + 24;
    let mut fields = Vec::with_capacity(ncomp);
    for _ in 0..ncomp {
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            values.push(Complex64::new(f64_at(bytes, off), f64_at(bytes, off + 8)));
            off += 16;
        }
        let arr = Array3::from_shape_vec(grid.shape(), values)
            .map_err(|e| AnsError::Format(e.to_string()))?;
        fields.push(SpectralField::from_coeffs(grid, arr)?);
    }
    if ncomp == 1 {
        Ok(FieldData::Scalar(fields.pop().expect("one component")))
    } else {
        let u3 = fields.pop().expect("three components");
        let u2 = fields.pop().expect("three components");
        let u1 = fields.pop().expect("three components");
        Ok(FieldData::Vector(VectorField::new(u1, u2, u3)?))
    }
}

/// Writes `bytes` to a sibling temporary file, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| AnsError::Format(format!("{} has no file name", path.display())))?
        .to_string_lossy()
        .into_owned();
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_scalar(path: &Path, f: &SpectralField) -> Result<()> {
    write_atomic(path, &encode(&[f])?)
}

pub fn write_vector(path: &Path, u: &VectorField) -> Result<()> {
    let [a, b, c] = u.components();
    write_atomic(path, &encode(&[a, b, c])?)
}

pub fn read_field(path: &Path) -> Result<FieldData> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

/// Float formatting used by every CSV: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    // adding +0.0 turns -0.0 into 0.0
    format!("{:.16e}", v + 0.0)
}

/// A CSV table with a fixed header, rendered in one piece.
#[derive(Clone, Debug, Default)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.render().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn header_layout() {
        let g = Grid::new([4, 6, 8], [1.0, 2.0, 3.0]).unwrap();
        let f = SpectralField::from_fn(g, |x, _, _| (2.0 * PI * x).cos());
        let bytes = encode(&[&f]).unwrap();
        assert_eq!(&bytes[0..4], b"ANSF");
        assert_eq!(u32_at(&bytes, 4), 1);
        assert_eq!(u32_at(&bytes, 8), 4);
        assert_eq!(u32_at(&bytes, 12), 6);
        assert_eq!(u32_at(&bytes, 16), 8);
        assert_eq!(u32_at(&bytes, 20), 1);
        assert_eq!(f64_at(&bytes, 40), 2.0);
        assert_eq!(bytes.len(), 56 + 4 * 6 * 8 * 16);
        assert_eq!(decode(&bytes).unwrap(), FieldData::Scalar(f));
    }

    #[test]
    fn rejects_corrupt_input() {
        assert!(decode(b"ANSF").is_err());
        let g = Grid::cube(4).unwrap();
        let mut bytes = encode(&[&SpectralField::zeros(g)]).unwrap();
        bytes[0] = b'X';
        assert!(decode(&bytes).is_err());
        let mut bytes = encode(&[&SpectralField::zeros(g)]).unwrap();
        bytes.pop();
        assert!(decode(&bytes).is_err());
    }

    #[test]
    fn csv_formatting() {
        let mut t = CsvTable::new(["a", "b"]);
        t.push_row(vec![fmt_f64(0.1), fmt_f64(-2.0)]);
        let s = t.render();
        assert_eq!(s, "a,b\n1.0000000000000001e-1,-2.0000000000000000e0\n");
        let back: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(back, 0.1);
    }
}
