//! File formats: CSV for humans and scripts, small binary containers for
//! bulk data, and directories of blocks for symbol and operator fields.
//!
//! Both binary formats are little-endian with a 16-byte header:
//!
//! | bytes | `LOCF` (functions, masks) | `LOCM` (matrices) |
//! |-------|---------------------------|-------------------|
//! | 0..4  | magic `LOCF`              | magic `LOCM`      |
//! | 4..8  | version (u32)             | version (u32)     |
//! | 8..12 | coordinate count `m`      | rows              |
//! | 12..16| point count `N`           | columns           |
//!
//! followed by the payload as IEEE-754 doubles (matrices row-major).

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{GridSpec, RegionMask, SampledFunction, DEFAULT_POINT_CAP};
use crate::group::{GroupDescriptor, GroupElement};
use crate::localization::SymbolField;
use crate::operator::{OperatorMatrix, WindowShape, WindowSpec};
use crate::synthesis::{ConvergenceRow, FieldEntry, OperatorField};

pub const FORMAT_VERSION: u32 = 1;
const FUNCTION_MAGIC: &[u8; 4] = b"LOCF";
const MATRIX_MAGIC: &[u8; 4] = b"LOCM";

fn write_container(path: &Path, magic: &[u8; 4], a: usize, b: usize, data: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(magic)?;
    for v in [FORMAT_VERSION, a as u32, b as u32] {
        w.write_all(&v.to_le_bytes())?;
    }
    for v in data {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_container(path: &Path, magic: &[u8; 4]) -> Result<(usize, usize, Vec<f64>)> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.len() < 16 || &bytes[..4] != magic {
        return Err(Error::Format(format!(
            "{}: missing {} header",
            path.display(),
            String::from_utf8_lossy(magic)
        )));
    }
    let word = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().unwrap());
    if word(4) != FORMAT_VERSION {
        return Err(Error::Format(format!("{}: unsupported version {}", path.display(), word(4))));
    }
    let (a, b) = (word(8) as usize, word(12) as usize);
    let payload = &bytes[16..];
    if payload.len() % 8 != 0 {
        return Err(Error::Format(format!("{}: truncated payload", path.display())));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((a, b, data))
}

pub fn write_function_binary(path: &Path, f: &SampledFunction) -> Result<()> {
    write_container(path, FUNCTION_MAGIC, f.grid.dim(), f.grid.len(), &f.values)
}

/// Reads values written by [`write_function_binary`] onto `grid`.
pub fn read_function_binary(path: &Path, grid: &GridSpec, p: f64) -> Result<SampledFunction> {
    let (m, n, values) = read_container(path, FUNCTION_MAGIC)?;
    if m != grid.dim() || n != grid.len() || values.len() != n {
        return Err(Error::Format(format!(
            "{}: header ({m}, {n}) does not match the grid ({}, {})",
            path.display(),
            grid.dim(),
            grid.len()
        )));
    }
    SampledFunction::new(grid.clone(), values, p)
}

pub fn write_mask_binary(path: &Path, mask: &RegionMask) -> Result<()> {
    write_function_binary(path, &mask.indicator(2.0))
}

pub fn read_mask_binary(path: &Path, grid: &GridSpec) -> Result<RegionMask> {
    let f = read_function_binary(path, grid, 2.0)?;
    RegionMask::new(grid.clone(), f.values.iter().map(|&v| v != 0.0).collect())
}

pub fn write_matrix_binary(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let row_major: Vec<f64> = m.transpose().iter().copied().collect();
    write_container(path, MATRIX_MAGIC, m.nrows(), m.ncols(), &row_major)
}

pub fn read_matrix_binary(path: &Path) -> Result<DMatrix<f64>> {
    let (rows, cols, data) = read_container(path, MATRIX_MAGIC)?;
    if data.len() != rows * cols {
        return Err(Error::Format(format!(
            "{}: expected {rows}×{cols} values, found {}",
            path.display(),
            data.len()
        )));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

/// Columns `x1, …, xm, value`.
pub fn write_function_csv(path: &Path, f: &SampledFunction) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=f.grid.dim()).map(|c| format!("x{c}")).collect();
    header.push("value".into());
    w.write_record(&header)?;
    for (x, v) in f.grid.points().zip(&f.values) {
        let mut rec: Vec<String> = x.iter().map(|c| c.to_string()).collect();
        rec.push(v.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_function_csv`]; rows may come in any order
/// but must be grid points, and missing points are zero.
pub fn read_function_csv(path: &Path, grid: &GridSpec, p: f64) -> Result<SampledFunction> {
    let mut r = csv::Reader::from_path(path)?;
    let mut values = vec![0.0; grid.len()];
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != grid.dim() + 1 {
            return Err(Error::Format(format!("row has {} fields", rec.len())));
        }
        let nums = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format(e.to_string()))?;
        let (x, v) = nums.split_at(grid.dim());
        match grid.locate(x) {
            crate::function_space::Locate::Inside(i) => values[i] = v[0],
            _ => return Err(Error::Format(format!("{x:?} is not a grid point"))),
        }
    }
    SampledFunction::new(grid.clone(), values, p)
}

pub fn write_mask_csv(path: &Path, mask: &RegionMask) -> Result<()> {
    write_function_csv(path, &mask.indicator(2.0))
}

/// One matrix row per line, no header.
pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_singular_values_csv(path: &Path, sigma: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["index", "sigma"])?;
    for (i, s) in sigma.iter().enumerate() {
        w.write_record([i.to_string(), s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Grid parameters from which a [`GridSpec`] is rebuilt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridManifest {
    pub group: GroupDescriptor,
    pub spacing: Vec<f64>,
    pub extent: Vec<f64>,
}

impl GridManifest {
    pub fn of(grid: &GridSpec) -> Self {
        GridManifest {
            group: grid.group,
            spacing: grid.spacing().to_vec(),
            extent: grid.extent().to_vec(),
        }
    }

    pub fn build(&self) -> Result<GridSpec> {
        GridSpec::new(self.group, self.spacing.clone(), self.extent.clone(), DEFAULT_POINT_CAP)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WindowManifest {
    Box { radius: f64 },
    Mask { indices: Vec<usize> },
}

impl WindowManifest {
    pub fn of(window: &WindowSpec) -> Self {
        match &window.shape {
            WindowShape::HomogeneousBox { radius, .. } => WindowManifest::Box { radius: *radius },
            WindowShape::Mask(m) => WindowManifest::Mask { indices: m.indices() },
        }
    }

    pub fn build(&self, grid: &GridSpec) -> Result<WindowSpec> {
        match self {
            WindowManifest::Box { radius } => WindowSpec::homogeneous_box(grid, *radius),
            WindowManifest::Mask { indices } => {
                let mut member = vec![false; grid.len()];
                for &i in indices {
                    *member
                        .get_mut(i)
                        .ok_or_else(|| Error::Format(format!("window index {i} out of range")))? = true;
                }
                WindowSpec::from_mask(RegionMask::new(grid.clone(), member)?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    SymbolField,
    OperatorField,
}

/// Where the operator of one `(t, g)` of an operator field is stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EntryManifest {
    Local { support: Vec<usize> },
    Shared { file: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldManifest {
    pub kind: FieldKind,
    pub version: u32,
    pub grid: GridManifest,
    pub window: WindowManifest,
    pub t_levels: Vec<f64>,
    pub lattice: Vec<GroupElement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entries: Vec<Vec<EntryManifest>>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn block_file_name(level: usize, g: usize) -> String {
    format!("t{level}_g{g}.locm")
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<FieldManifest> {
    let file = File::open(dir.join(MANIFEST_FILE))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

pub fn save_symbol_field(dir: &Path, field: &SymbolField) -> Result<()> {
    fs::create_dir_all(dir)?;
    let manifest = FieldManifest {
        kind: FieldKind::SymbolField,
        version: FORMAT_VERSION,
        grid: GridManifest::of(&field.window.mask.grid),
        window: WindowManifest::of(&field.window),
        t_levels: field.t_levels.clone(),
        lattice: field.lattice.clone(),
        p: Some(field.p),
        entries: Vec::new(),
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    for (level, row) in field.blocks.iter().enumerate() {
        for (g, block) in row.iter().enumerate() {
            write_matrix_binary(&dir.join(block_file_name(level, g)), block)?;
        }
    }
    Ok(())
}

pub fn load_symbol_field(dir: &Path) -> Result<SymbolField> {
    let m = read_manifest(dir)?;
    if m.kind != FieldKind::SymbolField {
        return Err(Error::Format(format!("{} is not a symbol field", dir.display())));
    }
    let grid = m.grid.build()?;
    let window = m.window.build(&grid)?;
    let w = window.size();
    let mut blocks = Vec::with_capacity(m.t_levels.len());
    for level in 0..m.t_levels.len() {
        let mut row = Vec::with_capacity(m.lattice.len());
        for g in 0..m.lattice.len() {
            let b = read_matrix_binary(&dir.join(block_file_name(level, g)))?;
            if b.nrows() != w || b.ncols() != w {
                return Err(Error::Format(format!("block t{level}_g{g} is not {w}×{w}")));
            }
            row.push(b);
        }
        blocks.push(row);
    }
    Ok(SymbolField {
        window,
        t_levels: m.t_levels,
        lattice: m.lattice,
        blocks,
        p: m.p.ok_or_else(|| Error::Format("symbol field manifest lacks p".into()))?,
    })
}

/// Shared full-size operators are written once each as `shared<k>.locm`.
pub fn save_operator_field(dir: &Path, field: &OperatorField) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut shared: Vec<Arc<OperatorMatrix>> = Vec::new();
    let mut entries = Vec::with_capacity(field.entries.len());
    for (level, row) in field.entries.iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (g, e) in row.iter().enumerate() {
            out.push(match e {
                FieldEntry::Local { support, block } => {
                    write_matrix_binary(&dir.join(block_file_name(level, g)), block)?;
                    EntryManifest::Local { support: support.clone() }
                }
                FieldEntry::Shared(a) => {
                    let k = match shared.iter().position(|s| Arc::ptr_eq(s, a)) {
                        Some(k) => k,
                        None => {
                            let k = shared.len();
                            write_matrix_binary(&dir.join(format!("shared{k}.locm")), &a.entries)?;
                            shared.push(a.clone());
                            k
                        }
                    };
                    EntryManifest::Shared { file: format!("shared{k}.locm") }
                }
            });
        }
        entries.push(out);
    }
    let manifest = FieldManifest {
        kind: FieldKind::OperatorField,
        version: FORMAT_VERSION,
        grid: GridManifest::of(&field.grid),
        window: WindowManifest::of(&field.window),
        t_levels: field.t_levels.clone(),
        lattice: field.lattice.clone(),
        p: None,
        entries,
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)
}

pub fn load_operator_field(dir: &Path) -> Result<OperatorField> {
    let m = read_manifest(dir)?;
    if m.kind != FieldKind::OperatorField {
        return Err(Error::Format(format!("{} is not an operator field", dir.display())));
    }
    let grid = m.grid.build()?;
    let window = m.window.build(&grid)?;
    let mut shared: Vec<(String, Arc<OperatorMatrix>)> = Vec::new();
    let mut entries = Vec::with_capacity(m.entries.len());
    for (level, row) in m.entries.iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (g, e) in row.iter().enumerate() {
            out.push(match e {
                EntryManifest::Local { support } => {
                    let block = read_matrix_binary(&dir.join(block_file_name(level, g)))?;
                    if block.nrows() != support.len() || block.ncols() != support.len() {
                        return Err(Error::Format(format!("block t{level}_g{g} has the wrong size")));
                    }
                    FieldEntry::Local { support: support.clone(), block }
                }
                EntryManifest::Shared { file } => {
                    let a = match shared.iter().find(|(f, _)| f == file) {
                        Some((_, a)) => a.clone(),
                        None => {
                            let entries = read_matrix_binary(&dir.join(file))?;
                            let a = Arc::new(OperatorMatrix::new(grid.clone(), entries)?);
                            shared.push((file.clone(), a.clone()));
                            a
                        }
                    };
                    FieldEntry::Shared(a)
                }
            });
        }
        entries.push(out);
    }
    if entries.len() != m.t_levels.len() || entries.iter().any(|r| r.len() != m.lattice.len()) {
        return Err(Error::Format("entry table does not match levels × lattice".into()));
    }
    Ok(OperatorField {
        grid,
        window,
        t_levels: m.t_levels,
        lattice: m.lattice,
        entries,
    })
}

/// Writes a CSV twin of every binary file in a field directory, plus
/// `lattice.csv` (index, coordinates…). Returns the files written.
pub fn export_field_csv(dir: &Path) -> Result<Vec<PathBuf>> {
    let m = read_manifest(dir)?;
    let mut written = Vec::new();
    let mut names: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    names.retain(|p| p.extension().is_some_and(|e| e == "locm"));
    names.sort();
    for path in names {
        let out = path.with_extension("csv");
        write_matrix_csv(&out, &read_matrix_binary(&path)?)?;
        written.push(out);
    }
    let lattice = dir.join("lattice.csv");
    let mut w = csv::Writer::from_path(&lattice)?;
    let dim = m.lattice.first().map_or(0, |g| g.0.len());
    let mut header = vec!["index".to_string()];
    header.extend((1..=dim).map(|c| format!("x{c}")));
    w.write_record(&header)?;
    for (i, g) in m.lattice.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(g.0.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    written.push(lattice);
    Ok(written)
}
