//! Run configuration and CSV data files.
//!
//! A grid function is one value per line, complex values as `re,im`. A
//! sequence is either a directory of `term_0001.csv, term_0002.csv, ...` or a
//! single CSV with one column per term (real values only). Grid parameters
//! come from the config, never from the data files.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::besov::FilterShape;
use crate::domain::{FuncSequence, Grid, GridFunction};
use crate::error::{Error, Result};
use crate::exponents::{make_exponent_field, Exponent, ExponentClass, ExponentField, ExponentSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub half_length: f64,
    pub n_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            half_length: 2.0,
            n_points: 1024,
        }
    }
}

fn constant_spec(v: f64) -> ExponentSpec {
    ExponentSpec::Constant {
        value: Exponent::Finite(v),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsConfig {
    pub p: ExponentSpec,
    pub q: ExponentSpec,
    #[serde(default)]
    pub s: Option<ExponentSpec>,
    /// Lower bound for `p` in class `P0`; class `P` when absent.
    #[serde(default)]
    pub p_floor: Option<f64>,
    #[serde(default)]
    pub q_floor: Option<f64>,
}

impl Default for ExponentsConfig {
    fn default() -> Self {
        Self {
            p: constant_spec(2.0),
            q: constant_spec(2.0),
            s: None,
            p_floor: None,
            q_floor: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub inner: f64,
    pub outer: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            inner: 1e-10,
            outer: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceLayout {
    /// One CSV with a column per term.
    #[default]
    Columns,
    /// A directory of `term_0001.csv, ...`.
    Directory,
}

/// The JSON run configuration; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub exponents: ExponentsConfig,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub suite: Vec<String>,
    pub samples: usize,
    pub sequence_layout: SequenceLayout,
    pub filter_shape: FilterShape,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            exponents: ExponentsConfig::default(),
            tolerances: Tolerances::default(),
            seed: 42,
            suite: vec!["all".to_string()],
            samples: 50,
            sequence_layout: SequenceLayout::Columns,
            filter_shape: FilterShape::Standard,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.tolerances;
        if !(t.inner > 0.0 && t.outer > 0.0) {
            return Err(Error::Config(format!("tolerances must be positive, got {t:?}")));
        }
        self.grid().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.half_length, self.grid.n_points)
    }

    fn class(floor: Option<f64>) -> ExponentClass {
        floor.map_or(ExponentClass::P, |floor| ExponentClass::P0 { floor })
    }

    pub fn p_field(&self) -> Result<ExponentField> {
        make_exponent_field(self.grid()?, &self.exponents.p, Self::class(self.exponents.p_floor))
    }

    pub fn q_field(&self) -> Result<ExponentField> {
        make_exponent_field(self.grid()?, &self.exponents.q, Self::class(self.exponents.q_floor))
    }

    /// `s(.)`, zero when not configured.
    pub fn s_field(&self) -> Result<ExponentField> {
        let spec = self.exponents.s.clone().unwrap_or_else(|| constant_spec(0.0));
        make_exponent_field(self.grid()?, &spec, ExponentClass::Real)
    }
}

fn reader_for(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn parse_value(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: cannot parse {field:?} as a number")))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("line {line}: non-finite value {field:?}")));
    }
    Ok(v)
}

/// Reads a grid function; every line must have the same arity (1 real, 2 complex).
pub fn read_grid_function(path: &Path, grid: Grid) -> Result<GridFunction> {
    let mut re = Vec::new();
    let mut im = Vec::new();
    let mut complex = None;
    for (line, rec) in reader_for(path)?.records().enumerate() {
        let rec = rec?;
        let is_complex = match rec.len() {
            1 => false,
            2 => true,
            k => {
                return Err(Error::Config(format!(
                    "{}: line {}: expected 1 or 2 fields, got {k}",
                    path.display(),
                    line + 1
                )))
            }
        };
        if *complex.get_or_insert(is_complex) != is_complex {
            return Err(Error::Config(format!(
                "{}: line {}: mixed real and complex lines",
                path.display(),
                line + 1
            )));
        }
        re.push(parse_value(&rec[0], line + 1)?);
        if is_complex {
            im.push(parse_value(&rec[1], line + 1)?);
        }
    }
    if re.len() != grid.len() {
        return Err(Error::Config(format!(
            "{}: {} values for a grid of {} points",
            path.display(),
            re.len(),
            grid.len()
        )));
    }
    if complex == Some(true) {
        GridFunction::from_complex(
            grid,
            re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect(),
        )
    } else {
        GridFunction::new(grid, re)
    }
}

pub fn write_grid_function(path: &Path, f: &GridFunction) -> Result<()> {
    let mut out = String::with_capacity(f.len() * 24);
    match f.imag() {
        None => f.values().iter().for_each(|v| out.push_str(&format!("{v:e}\n"))),
        Some(im) => f
            .values()
            .iter()
            .zip(im)
            .for_each(|(a, b)| out.push_str(&format!("{a:e},{b:e}\n"))),
    }
    fs::write(path, out)?;
    Ok(())
}

fn term_path(dir: &Path, nu: usize) -> PathBuf {
    dir.join(format!("term_{:04}.csv", nu + 1))
}

pub fn read_sequence(path: &Path, grid: Grid, layout: SequenceLayout) -> Result<FuncSequence> {
    match layout {
        SequenceLayout::Directory => {
            if !path.is_dir() {
                return Err(Error::Config(format!("{} is not a directory", path.display())));
            }
            let mut terms = Vec::new();
            while term_path(path, terms.len()).exists() {
                terms.push(read_grid_function(&term_path(path, terms.len()), grid)?);
            }
            if terms.is_empty() {
                return Err(Error::Config(format!("{} has no term_0001.csv", path.display())));
            }
            FuncSequence::new(grid, terms)
        }
        SequenceLayout::Columns => {
            let mut columns: Vec<Vec<f64>> = Vec::new();
            for (line, rec) in reader_for(path)?.records().enumerate() {
                let rec = rec?;
                if columns.is_empty() {
                    columns = vec![Vec::with_capacity(grid.len()); rec.len()];
                }
                if rec.len() != columns.len() {
                    return Err(Error::Config(format!(
                        "{}: line {}: {} columns, expected {}",
                        path.display(),
                        line + 1,
                        rec.len(),
                        columns.len()
                    )));
                }
                for (c, field) in columns.iter_mut().zip(rec.iter()) {
                    c.push(parse_value(field, line + 1)?);
                }
            }
            if columns.first().map_or(0, Vec::len) != grid.len() {
                return Err(Error::Config(format!(
                    "{}: {} rows for a grid of {} points",
                    path.display(),
                    columns.first().map_or(0, Vec::len),
                    grid.len()
                )));
            }
            let terms = columns
                .into_iter()
                .map(|c| GridFunction::new(grid, c))
                .collect::<Result<Vec<_>>>()?;
            FuncSequence::new(grid, terms)
        }
    }
}

pub fn write_sequence(path: &Path, f: &FuncSequence, layout: SequenceLayout) -> Result<()> {
    match layout {
        SequenceLayout::Directory => {
            fs::create_dir_all(path)?;
            for (nu, t) in f.terms().iter().enumerate() {
                write_grid_function(&term_path(path, nu), t)?;
            }
            Ok(())
        }
        SequenceLayout::Columns => {
            if !f.is_real() {
                return Err(Error::Config("the column layout holds real sequences only".into()));
            }
            let mut out = String::new();
            for i in 0..f.grid().len() {
                let row: Vec<String> = f.terms().iter().map(|t| format!("{:e}", t.values()[i])).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
            fs::write(path, out)?;
            Ok(())
        }
    }
}
