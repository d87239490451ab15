//! Grids, grid functions and finite function sequences.
//!
//! The real line is truncated to the periodic interval `[-L, L)` and sampled
//! at `x_i = -L + i * dx`. Integrals are rectangle-rule sums `dx * sum f_i`,
//! which on a periodic grid coincide with the trapezoidal rule.

pub use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Uniform periodic grid on `[-half_length, half_length)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_length: f64,
    n_points: usize,
    dx: f64,
}

impl Grid {
    pub fn new(half_length: f64, n_points: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half length must be positive and finite, got {half_length}"
            )));
        }
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points must be a power of two >= 8, got {n_points}"
            )));
        }
        Ok(Self {
            half_length,
            n_points,
            dx: 2.0 * half_length / n_points as f64,
        })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.dx
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.point(i))
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "[-{}, {}) with {} points vs [-{}, {}) with {} points",
                self.half_length, self.half_length, self.n_points, other.half_length, other.half_length, other.n_points
            )))
        }
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self::new(2.0, 1024).expect("default grid is valid")
    }
}

/// Samples of a real- or complex-valued function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    re: Vec<f64>,
    im: Option<Vec<f64>>,
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        check_finite(&values)?;
        Ok(Self {
            grid,
            re: values,
            im: None,
        })
    }

    pub fn from_complex(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        let re: Vec<f64> = values.iter().map(|z| z.re).collect();
        let im: Vec<f64> = values.iter().map(|z| z.im).collect();
        let mut f = Self::new(grid, re)?;
        check_finite(&im)?;
        f.im = Some(im);
        Ok(f)
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            re: vec![0.0; grid.len()],
            im: None,
        }
    }

    /// Samples `f` at every grid point. Non-finite samples are an error.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.points().map(f).collect())
    }

    /// `height` on `[a, b)`, zero elsewhere.
    pub fn indicator(grid: Grid, a: f64, b: f64, height: f64) -> Self {
        let re = grid
            .points()
            .map(|x| if x >= a && x < b { height } else { 0.0 })
            .collect();
        Self { grid, re, im: None }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    /// Real parts.
    pub fn values(&self) -> &[f64] {
        &self.re
    }

    pub fn imag(&self) -> Option<&[f64]> {
        self.im.as_deref()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_none()
    }

    #[inline]
    pub fn at(&self, i: usize) -> Complex64 {
        Complex64::new(self.re[i], self.im.as_ref().map_or(0.0, |im| im[i]))
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        (0..self.len()).map(|i| self.at(i)).collect()
    }

    #[inline]
    pub fn abs_at(&self, i: usize) -> f64 {
        match &self.im {
            None => self.re[i].abs(),
            Some(im) => self.re[i].hypot(im[i]),
        }
    }

    /// Pointwise modulus `|f|` as a real function.
    pub fn abs(&self) -> GridFunction {
        Self {
            grid: self.grid,
            re: (0..self.len()).map(|i| self.abs_at(i)).collect(),
            im: None,
        }
    }

    pub fn max_abs(&self) -> f64 {
        (0..self.len()).map(|i| self.abs_at(i)).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.re.iter().all(|&v| v == 0.0) && self.im.as_ref().is_none_or(|im| im.iter().all(|&v| v == 0.0))
    }

    /// Number of samples with nonzero modulus.
    pub fn support_size(&self) -> usize {
        (0..self.len()).filter(|&i| self.abs_at(i) != 0.0).count()
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        Self {
            grid: self.grid,
            re: self.re.iter().map(|v| v * c).collect(),
            im: self.im.as_ref().map(|im| im.iter().map(|v| v * c).collect()),
        }
    }

    /// Applies a real pointwise map to the modulus, dropping phases.
    pub fn map_abs(&self, f: impl Fn(usize, f64) -> f64) -> GridFunction {
        Self {
            grid: self.grid,
            re: (0..self.len()).map(|i| f(i, self.abs_at(i))).collect(),
            im: None,
        }
    }

    /// Multiplies pointwise by a real weight.
    pub fn weighted(&self, w: impl Fn(usize) -> f64) -> GridFunction {
        Self {
            grid: self.grid,
            re: self.re.iter().enumerate().map(|(i, v)| v * w(i)).collect(),
            im: self
                .im
                .as_ref()
                .map(|im| im.iter().enumerate().map(|(i, v)| v * w(i)).collect()),
        }
    }

    fn zip_with(&self, other: &GridFunction, op: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        self.grid.ensure_same(&other.grid)?;
        let re = self.re.iter().zip(&other.re).map(|(a, b)| op(*a, *b)).collect();
        let im = match (&self.im, &other.im) {
            (None, None) => None,
            _ => {
                let zero = vec![0.0; self.len()];
                let a = self.im.as_ref().unwrap_or(&zero);
                let b = other.im.as_ref().unwrap_or(&zero);
                Some(a.iter().zip(b).map(|(x, y)| op(*x, *y)).collect())
            }
        };
        Ok(GridFunction {
            grid: self.grid,
            re,
            im,
        })
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product `f * g` (complex multiplication when either is complex).
    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.grid.ensure_same(&other.grid)?;
        if self.is_real() && other.is_real() {
            return Ok(GridFunction {
                grid: self.grid,
                re: self.re.iter().zip(&other.re).map(|(a, b)| a * b).collect(),
                im: None,
            });
        }
        let prod: Vec<Complex64> = (0..self.len()).map(|i| self.at(i) * other.at(i)).collect();
        GridFunction::from_complex(self.grid, prod)
    }
}

/// Rectangle-rule integral `dx * sum f_i` of a real grid function.
pub fn integrate(f: &GridFunction) -> Result<f64> {
    if !f.is_real() {
        return Err(Error::ComplexIntegrand);
    }
    Ok(f.grid.dx() * f.values().iter().sum::<f64>())
}

/// A finite sequence `(f_1, ..., f_N)` of grid functions sharing one grid.
/// Terms past `N` are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FuncSequence {
    grid: Grid,
    terms: Vec<GridFunction>,
}

impl FuncSequence {
    pub fn new(grid: Grid, terms: Vec<GridFunction>) -> Result<Self> {
        for t in &terms {
            grid.ensure_same(t.grid())?;
        }
        Ok(Self { grid, terms })
    }

    pub fn zeros(grid: Grid, n_terms: usize) -> Self {
        Self {
            grid,
            terms: vec![GridFunction::zeros(grid); n_terms],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[GridFunction] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<GridFunction> {
        self.terms
    }

    /// Term `nu` (0-based); `None` past the stored length, where the term is zero.
    pub fn term(&self, nu: usize) -> Option<&GridFunction> {
        self.terms.get(nu)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(GridFunction::is_zero)
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(GridFunction::is_real)
    }

    pub fn scaled(&self, c: f64) -> FuncSequence {
        Self {
            grid: self.grid,
            terms: self.terms.iter().map(|t| t.scaled(c)).collect(),
        }
    }

    pub fn abs(&self) -> FuncSequence {
        Self {
            grid: self.grid,
            terms: self.terms.iter().map(GridFunction::abs).collect(),
        }
    }

    fn zip_padded(
        &self,
        other: &FuncSequence,
        op: impl Fn(&GridFunction, &GridFunction) -> Result<GridFunction>,
    ) -> Result<FuncSequence> {
        self.grid.ensure_same(&other.grid)?;
        let n = self.len().max(other.len());
        let zero = GridFunction::zeros(self.grid);
        let terms = (0..n)
            .map(|nu| op(self.term(nu).unwrap_or(&zero), other.term(nu).unwrap_or(&zero)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid: self.grid, terms })
    }

    pub fn add(&self, other: &FuncSequence) -> Result<FuncSequence> {
        self.zip_padded(other, GridFunction::add)
    }

    pub fn sub(&self, other: &FuncSequence) -> Result<FuncSequence> {
        self.zip_padded(other, GridFunction::sub)
    }

    /// `f - P_n f`: the first `n` terms replaced by zero, length kept.
    pub fn tail(&self, n: usize) -> FuncSequence {
        let terms = self
            .terms
            .iter()
            .enumerate()
            .map(|(nu, t)| {
                if nu < n {
                    GridFunction::zeros(self.grid)
                } else {
                    t.clone()
                }
            })
            .collect();
        Self { grid: self.grid, terms }
    }

    /// `P_n f`: keeps the first `n` terms.
    pub fn project(&self, n: usize) -> FuncSequence {
        Self {
            grid: self.grid,
            terms: self.terms.iter().take(n).cloned().collect(),
        }
    }
}

/// Shape of a random test function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionKind {
    /// Band-limited random Fourier series.
    Smooth,
    /// Compactly supported `C^inf` bump at a random centre.
    Bump,
    /// Single-cell indicator.
    Spike,
}

/// Highest Fourier mode used by [`FunctionKind::Smooth`].
pub const SMOOTH_MODES: usize = 8;

/// Normalised `C^inf` bump `exp(1 - 1/(1 - t^2))` on `|t| < 1`, peak 1 at 0.
pub(crate) fn unit_bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Deterministic random test function with `max |f| = amplitude`.
pub fn random_function(grid: Grid, kind: FunctionKind, amplitude: f64, seed: u64) -> Result<GridFunction> {
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "amplitude must be positive, got {amplitude}"
        )));
    }
    let mut rng = rng::seeded(seed);
    let l = grid.half_length();
    let raw: Vec<f64> = match kind {
        FunctionKind::Smooth => {
            let modes: Vec<(f64, f64)> = (1..=SMOOTH_MODES)
                .map(|k| {
                    let w = 1.0 / k as f64;
                    (w * rng.random_range(-1.0..1.0), w * rng.random_range(-1.0..1.0))
                })
                .collect();
            let offset = rng.random_range(-0.5..0.5);
            grid.points()
                .map(|x| {
                    offset
                        + modes
                            .iter()
                            .enumerate()
                            .map(|(k, (a, b))| {
                                let w = std::f64::consts::PI * (k + 1) as f64 * x / l;
                                a * w.cos() + b * w.sin()
                            })
                            .sum::<f64>()
                })
                .collect()
        }
        FunctionKind::Bump => {
            let centre = rng.random_range(-0.5 * l..0.5 * l);
            let radius = rng.random_range(l / 8.0..l / 4.0);
            grid.points().map(|x| unit_bump((x - centre) / radius)).collect()
        }
        FunctionKind::Spike => {
            let n = grid.len();
            let idx = rng.random_range(n / 4..3 * n / 4);
            (0..n).map(|i| if i == idx { 1.0 } else { 0.0 }).collect()
        }
    };
    let peak = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(GridFunction::zeros(grid));
    }
    let scale = amplitude / peak;
    GridFunction::new(grid, raw.into_iter().map(|v| v * scale).collect())
}
