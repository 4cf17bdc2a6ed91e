//! Matrix file ingestion and emission (headerless CSV, Matrix Market, and a
//! lossless binary sidecar format), plus the ground-truth sidecar schema for
//! generated instances.
//!
//! CSV and Matrix Market values are written with 17 significant digits,
//! which round-trips every finite f64. All indices in files are 0-based.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dense::{self, DenseMatrix};
use crate::error::{Error, Result};
use crate::synth::{InteriorModel, NoiseSpec, SeparableInstance};

const BINARY_MAGIC: &[u8; 8] = b"SEPNMF1\0";
pub const SIDECAR_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    /// Headerless comma-separated rows.
    Csv,
    /// Matrix Market: array or coordinate, real or integer, general.
    MatrixMarket,
    /// Magic + dimensions + little-endian f64 column-major payload;
    /// bit-exact round trips.
    Binary,
}

impl MatrixFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("csv") => Some(Self::Csv),
            Some("mtx") | Some("mm") => Some(Self::MatrixMarket),
            Some("bin") => Some(Self::Binary),
            _ => None,
        }
    }
}

impl std::str::FromStr for MatrixFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "mm" | "mtx" | "matrix-market" => Ok(Self::MatrixMarket),
            "bin" | "binary" => Ok(Self::Binary),
            other => Err(Error::Parse(format!("unknown matrix format '{other}'"))),
        }
    }
}

/// Reads a matrix file, inferring the format from the extension unless one
/// is given. Parsed matrices must be nonempty and finite.
pub fn read_matrix(path: &Path, format: Option<MatrixFormat>) -> Result<DenseMatrix> {
    let format = format
        .or_else(|| MatrixFormat::from_path(path))
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "cannot infer matrix format from '{}'; pass --format",
                path.display()
            ))
        })?;
    let matrix = match format {
        MatrixFormat::Csv => parse_csv(&fs::read_to_string(path)?),
        MatrixFormat::MatrixMarket => parse_matrix_market(&fs::read_to_string(path)?),
        MatrixFormat::Binary => parse_binary(&fs::read(path)?),
    }
    .map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    if matrix.rows() == 0 || matrix.cols() == 0 {
        return Err(Error::Parse(format!("{}: empty matrix", path.display())));
    }
    Ok(matrix)
}

pub fn write_matrix(path: &Path, m: &DenseMatrix, format: Option<MatrixFormat>) -> Result<()> {
    let format = format
        .or_else(|| MatrixFormat::from_path(path))
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "cannot infer matrix format from '{}'; pass --format",
                path.display()
            ))
        })?;
    let mut file = fs::File::create(path)?;
    match format {
        MatrixFormat::Csv => write_csv(&mut file, m)?,
        MatrixFormat::MatrixMarket => write_matrix_market(&mut file, m)?,
        MatrixFormat::Binary => write_binary(&mut file, m)?,
    }
    Ok(())
}

fn parse_csv(text: &str) -> Result<DenseMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| parse_f64(tok.trim(), lineno + 1))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("no data rows".into()));
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(Error::Parse("rows have inconsistent lengths".into()));
    }
    DenseMatrix::from_rows(&rows).map_err(|e| Error::Parse(e.to_string()))
}

fn write_csv(out: &mut impl Write, m: &DenseMatrix) -> Result<()> {
    let mut buf = String::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                buf.push(',');
            }
            buf.push_str(&format!("{:.16e}", m.get(i, j)));
        }
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

fn parse_f64(tok: &str, lineno: usize) -> Result<f64> {
    let value: f64 = tok
        .parse()
        .map_err(|_| Error::Parse(format!("line {lineno}: invalid number '{tok}'")))?;
    if !value.is_finite() {
        return Err(Error::Parse(format!(
            "line {lineno}: non-finite value '{tok}'"
        )));
    }
    Ok(value)
}

fn parse_matrix_market(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))?;
    let fields: Vec<String> = header
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::Parse("missing %%MatrixMarket matrix header".into()));
    }
    let layout = fields[2].as_str();
    if !matches!(layout, "array" | "coordinate") {
        return Err(Error::Parse(format!("unsupported layout '{layout}'")));
    }
    if !matches!(fields[3].as_str(), "real" | "integer") {
        return Err(Error::Parse(format!(
            "unsupported field type '{}', expected real",
            fields[3]
        )));
    }
    if fields[4] != "general" {
        return Err(Error::Parse(format!(
            "unsupported symmetry '{}', expected general",
            fields[4]
        )));
    }

    let mut data_lines = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_lineno, size_line) = data_lines
        .next()
        .ok_or_else(|| Error::Parse("missing size line".into()))?;
    let dims: Vec<&str> = size_line.split_whitespace().collect();

    match layout {
        "array" => {
            if dims.len() != 2 {
                return Err(Error::Parse(format!(
                    "line {}: array size line needs 2 fields",
                    size_lineno + 1
                )));
            }
            let rows = parse_dim(dims[0], size_lineno + 1)?;
            let cols = parse_dim(dims[1], size_lineno + 1)?;
            let mut values = Vec::with_capacity(rows * cols);
            for (lineno, line) in data_lines {
                for tok in line.split_whitespace() {
                    values.push(parse_f64(tok, lineno + 1)?);
                }
            }
            if values.len() != rows * cols {
                return Err(Error::Parse(format!(
                    "expected {} values, found {}",
                    rows * cols,
                    values.len()
                )));
            }
            // array format lists entries column by column
            DenseMatrix::from_column_major(rows, cols, values)
                .map_err(|e| Error::Parse(e.to_string()))
        }
        _ => {
            if dims.len() != 3 {
                return Err(Error::Parse(format!(
                    "line {}: coordinate size line needs 3 fields",
                    size_lineno + 1
                )));
            }
            let rows = parse_dim(dims[0], size_lineno + 1)?;
            let cols = parse_dim(dims[1], size_lineno + 1)?;
            let nnz = parse_dim(dims[2], size_lineno + 1)?;
            let mut values = vec![0.0; rows * cols];
            let mut seen = vec![false; rows * cols];
            let mut count = 0usize;
            for (lineno, line) in data_lines {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 3 {
                    return Err(Error::Parse(format!(
                        "line {}: coordinate entries need 'i j value'",
                        lineno + 1
                    )));
                }
                let i = parse_dim(toks[0], lineno + 1)?;
                let j = parse_dim(toks[1], lineno + 1)?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(Error::Parse(format!(
                        "line {}: coordinate ({i}, {j}) out of bounds",
                        lineno + 1
                    )));
                }
                let idx = (j - 1) * rows + (i - 1);
                if seen[idx] {
                    return Err(Error::Parse(format!(
                        "line {}: duplicate coordinate ({i}, {j})",
                        lineno + 1
                    )));
                }
                seen[idx] = true;
                values[idx] = parse_f64(toks[2], lineno + 1)?;
                count += 1;
            }
            if count != nnz {
                return Err(Error::Parse(format!(
                    "expected {nnz} entries, found {count}"
                )));
            }
            DenseMatrix::from_column_major(rows, cols, values)
                .map_err(|e| Error::Parse(e.to_string()))
        }
    }
}

fn parse_dim(tok: &str, lineno: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::Parse(format!("line {lineno}: invalid integer '{tok}'")))
}

fn write_matrix_market(out: &mut impl Write, m: &DenseMatrix) -> Result<()> {
    let mut buf = String::from("%%MatrixMarket matrix array real general\n");
    buf.push_str(&format!("{} {}\n", m.rows(), m.cols()));
    for value in m.data() {
        buf.push_str(&format!("{value:.16e}\n"));
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

fn parse_binary(bytes: &[u8]) -> Result<DenseMatrix> {
    if bytes.len() < 24 || &bytes[0..8] != BINARY_MAGIC {
        return Err(Error::Parse("not a sepnmf binary matrix".into()));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let need = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(24))
        .ok_or_else(|| Error::Parse("dimension overflow".into()))?;
    if bytes.len() != need {
        return Err(Error::Parse(format!(
            "payload length {} does not match {}x{}",
            bytes.len() - 24,
            rows,
            cols
        )));
    }
    let data: Vec<f64> = bytes[24..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DenseMatrix::from_column_major(rows, cols, data).map_err(|e| Error::Parse(e.to_string()))
}

fn write_binary(out: &mut impl Write, m: &DenseMatrix) -> Result<()> {
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&(m.rows() as u64).to_le_bytes())?;
    out.write_all(&(m.cols() as u64).to_le_bytes())?;
    for value in m.data() {
        out.write_all(&value.to_le_bytes())?;
    }
    Ok(())
}

/// FNV-1a over the shape and the little-endian payload; stable across runs.
pub fn matrix_digest(m: &DenseMatrix) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let eat = |h: &mut u64, bytes: &[u8]| {
        for &b in bytes {
            *h ^= b as u64;
            *h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(&mut h, &(m.rows() as u64).to_le_bytes());
    eat(&mut h, &(m.cols() as u64).to_le_bytes());
    for value in m.data() {
        eat(&mut h, &value.to_le_bytes());
    }
    format!("fnv1a64:{h:016x}")
}

/// Ground-truth sidecar written next to generated instances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthSidecar {
    pub schema_version: u32,
    pub d: usize,
    pub m: usize,
    pub r: usize,
    /// Condition number of the generated basis, recomputed at write time.
    pub kappa_f: f64,
    pub sigma_min_f: f64,
    /// 0-based positions of the basis columns in the written matrix.
    pub true_indices: Vec<usize>,
    pub interior_model: InteriorModel,
    pub seed: u64,
    pub noise: Option<NoiseSpec>,
    pub noise_seed: Option<u64>,
    /// Relative or absolute path of the matrix file this sidecar describes.
    pub matrix_path: Option<String>,
    /// Path of the basis matrix file, when one was written.
    pub basis_path: Option<String>,
}

impl GroundTruthSidecar {
    pub fn from_instance(
        inst: &SeparableInstance,
        matrix_path: Option<String>,
        basis_path: Option<String>,
    ) -> Result<Self> {
        let (d, m, r) = inst.dims();
        let sv = dense::svd(&inst.f)?;
        Ok(Self {
            schema_version: SIDECAR_SCHEMA_VERSION,
            d,
            m,
            r,
            kappa_f: sv.sigma_max() / sv.sigma_min(),
            sigma_min_f: sv.sigma_min(),
            true_indices: inst.true_indices.clone(),
            interior_model: if inst.k.data().iter().any(|&x| x != 0.0 && x != 0.5) {
                InteriorModel::Dirichlet
            } else {
                InteriorModel::Midpoints
            },
            seed: inst.seed,
            noise: inst.noise,
            noise_seed: inst.noise_seed,
            matrix_path,
            basis_path,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Numerical(format!("sidecar serialization: {e}")))?;
        fs::write(path, json + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}
