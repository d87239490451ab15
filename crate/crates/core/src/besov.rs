//! Littlewood-Paley filter bank on the periodic grid and the variable Besov
//! norm `|| (2^{nu s(.)} phi_nu * f)_nu ||_{l^{q(.)}(L^{p(.)})}`.
//!
//! Filters live on DFT bins. With `xi = min(k, n - k)` the distance of bin `k`
//! from zero frequency, band `nu >= 1` is a bump in `log2 xi - nu` supported in
//! `(2^{nu-1}, 2^{nu+1})`, and band 0 is 1 on `xi <= 1`, decaying to 0 at
//! `xi = 2`. All filters are divided by the square root of the pointwise sum of
//! squares, so `Phi^2 + sum_nu phi_nu^2 = 1` below Nyquist. The Nyquist bin is
//! zero in every filter.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::domain::{FuncSequence, Grid, GridFunction};
use crate::error::{Error, Result};
use crate::exponents::{Exponent, ExponentField};
use crate::lebesgue::NormResult;
use crate::mixed::mixed_norm;
use crate::rng::seeded;

/// Profile of the dyadic bump as a function of `u = log2(xi / 2^nu)` in `(-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterShape {
    /// `exp(-1 / (1 - u^2))`.
    #[default]
    Standard,
    /// The standard bump tilted by `1 + 0.6 u`.
    Skewed,
}

impl FilterShape {
    fn bump(self, u: f64) -> f64 {
        if u.abs() >= 1.0 {
            return 0.0;
        }
        let base = (-1.0 / (1.0 - u * u)).exp();
        match self {
            FilterShape::Standard => base,
            FilterShape::Skewed => base * (1.0 + 0.6 * u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterOptions {
    pub shape: FilterShape,
    /// Divide by the pointwise root sum of squares. Off only for fault injection.
    pub normalize: bool,
}

impl Default for FilterOptions {
    fn default() -> Self {
        Self {
            shape: FilterShape::Standard,
            normalize: true,
        }
    }
}

/// Fourier-side multipliers `Phi_hat, phi_hat[1..=nu_max]` on the DFT bins of a grid.
#[derive(Clone)]
pub struct FilterPair {
    grid: Grid,
    /// `filters[0]` is `Phi_hat`, `filters[nu]` is `phi_hat[nu]`; indexed by DFT bin.
    filters: Vec<Vec<f64>>,
    options: FilterOptions,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FilterPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FilterPair")
            .field("grid", &self.grid)
            .field("nu_max", &self.nu_max())
            .field("options", &self.options)
            .finish_non_exhaustive()
    }
}

/// `|xi|` of DFT bin `k` in units of the base frequency (one bin).
fn bin_frequency(k: usize, n: usize) -> usize {
    k.min(n - k)
}

pub fn build_filter_pair(grid: Grid) -> Result<FilterPair> {
    build_filter_pair_with(grid, FilterOptions::default())
}

pub fn build_filter_pair_with(grid: Grid, options: FilterOptions) -> Result<FilterPair> {
    let n = grid.len();
    let nu_max = n.trailing_zeros() as i64 - 2;
    if nu_max < 3 {
        return Err(Error::GridTooSmall(nu_max));
    }
    let nu_max = nu_max as usize;
    let shape = options.shape;
    let nyquist = n / 2;
    let mut filters = vec![vec![0.0; n]; nu_max + 1];
    for k in 0..n {
        let xi = bin_frequency(k, n);
        if xi == nyquist {
            continue;
        }
        let xf = xi as f64;
        filters[0][k] = if xi <= 1 {
            1.0
        } else {
            shape.bump(xf.log2()) / shape.bump(0.0)
        };
        if xi > 0 {
            for (nu, row) in filters.iter_mut().enumerate().skip(1) {
                row[k] = shape.bump(xf.log2() - nu as f64);
            }
        }
        if options.normalize {
            let total: f64 = filters.iter().map(|row| row[k] * row[k]).sum();
            let scale = total.sqrt();
            for row in filters.iter_mut() {
                row[k] /= scale;
            }
        }
    }
    let mut planner = FftPlanner::new();
    Ok(FilterPair {
        grid,
        filters,
        options,
        forward: planner.plan_fft_forward(n),
        inverse: planner.plan_fft_inverse(n),
    })
}

impl FilterPair {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn nu_max(&self) -> usize {
        self.filters.len() - 1
    }

    pub fn options(&self) -> FilterOptions {
        self.options
    }

    /// Filter `nu` on the DFT bins; `0` is `Phi_hat`.
    pub fn filter(&self, nu: usize) -> &[f64] {
        &self.filters[nu]
    }

    pub fn filters(&self) -> &[Vec<f64>] {
        &self.filters
    }

    /// `max_k |Phi_hat^2 + sum phi_hat^2 - 1|` over bins below Nyquist.
    pub fn partition_of_unity_error(&self) -> f64 {
        let n = self.grid.len();
        (0..n)
            .filter(|&k| bin_frequency(k, n) < n / 2)
            .map(|k| (self.filters.iter().map(|row| row[k] * row[k]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    fn spectrum(&self, f: &GridFunction) -> Vec<Complex64> {
        let mut buf = f.to_complex();
        self.forward.process(&mut buf);
        buf
    }

    /// `IFFT(multiplier * spectrum) / n`, real part kept when `real`.
    fn apply(&self, spectrum: &[Complex64], multiplier: &[f64], real: bool) -> Result<GridFunction> {
        let n = self.grid.len() as f64;
        let mut buf: Vec<Complex64> = spectrum.iter().zip(multiplier).map(|(z, m)| z * *m).collect();
        self.inverse.process(&mut buf);
        if real {
            GridFunction::new(self.grid, buf.iter().map(|z| z.re / n).collect())
        } else {
            GridFunction::from_complex(self.grid, buf.iter().map(|z| z / n).collect())
        }
    }

    /// Writes `bin, frequency, Phi_hat, phi_hat_1, ...` for bins `0..=n/2`;
    /// frequency is in cycles per unit length.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["bin".to_string(), "frequency".to_string(), "Phi_hat".to_string()];
        header.extend((1..=self.nu_max()).map(|nu| format!("phi_hat_{nu}")));
        w.write_record(&header)?;
        let period = 2.0 * self.grid.half_length();
        for k in 0..=self.grid.len() / 2 {
            let mut row = vec![k.to_string(), format!("{:.12e}", k as f64 / period)];
            row.extend(self.filters.iter().map(|f| format!("{:.17e}", f[k])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Weighted bands `(2^{nu s(.)} phi_nu * f)_{nu = 0..=nu_max}` of a function.
#[derive(Debug, Clone, PartialEq)]
pub struct BesovDecomposition {
    pub bands: FuncSequence,
    pub s_field: ExponentField,
}

fn smoothness_values(s: &ExponentField) -> Result<Vec<f64>> {
    s.values()
        .iter()
        .enumerate()
        .map(|(i, v)| match v {
            Exponent::Finite(x) => Ok(*x),
            Exponent::Infinite => Err(Error::UnsupportedExponent(format!(
                "smoothness is infinite at index {i}"
            ))),
        })
        .collect()
}

/// The analysis operator `A`.
pub fn analyze(f: &GridFunction, s: &ExponentField, filters: &FilterPair) -> Result<BesovDecomposition> {
    filters.grid.ensure_same(f.grid())?;
    filters.grid.ensure_same(s.grid())?;
    let sv = smoothness_values(s)?;
    let spectrum = filters.spectrum(f);
    let real = f.is_real();
    let ln2 = std::f64::consts::LN_2;
    let mut bands = Vec::with_capacity(filters.filters.len());
    for (nu, m) in filters.filters.iter().enumerate() {
        let band = filters.apply(&spectrum, m, real)?;
        bands.push(if nu == 0 {
            band
        } else {
            band.weighted(|i| (nu as f64 * sv[i] * ln2).exp())
        });
    }
    Ok(BesovDecomposition {
        bands: FuncSequence::new(filters.grid, bands)?,
        s_field: s.clone(),
    })
}

/// The synthesis operator `B`: `sum_nu phi_nu * (2^{-nu s(.)} f_nu)`, summed in ascending `nu`.
pub fn synthesize(bands: &BesovDecomposition, filters: &FilterPair) -> Result<GridFunction> {
    filters.grid.ensure_same(bands.bands.grid())?;
    filters.grid.ensure_same(bands.s_field.grid())?;
    let sv = smoothness_values(&bands.s_field)?;
    let ln2 = std::f64::consts::LN_2;
    let real = bands.bands.is_real();
    let n = filters.grid.len();
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    for (nu, term) in bands.bands.terms().iter().enumerate().take(filters.filters.len()) {
        let unweighted = if nu == 0 {
            term.clone()
        } else {
            term.weighted(|i| (-(nu as f64) * sv[i] * ln2).exp())
        };
        let spectrum = filters.spectrum(&unweighted);
        for ((a, z), m) in acc.iter_mut().zip(&spectrum).zip(&filters.filters[nu]) {
            *a += z * *m;
        }
    }
    filters.inverse.process(&mut acc);
    let nf = n as f64;
    if real {
        GridFunction::new(filters.grid, acc.iter().map(|z| z.re / nf).collect())
    } else {
        GridFunction::from_complex(filters.grid, acc.iter().map(|z| z / nf).collect())
    }
}

/// Mixed norm of [`analyze`]; the `nu = 0` band is the first sequence entry.
pub fn besov_norm(
    f: &GridFunction,
    s: &ExponentField,
    p: &ExponentField,
    q: &ExponentField,
    filters: &FilterPair,
    tol: f64,
) -> Result<NormResult> {
    if q.has_infinite() {
        return Err(Error::QPlusInfinite);
    }
    let d = analyze(f, s, filters)?;
    mixed_norm(p, q, &d.bands, tol)
}

/// Removes the Nyquist component of `f`.
pub fn strip_nyquist(f: &GridFunction) -> Result<GridFunction> {
    let n = f.len();
    let mut planner = FftPlanner::new();
    let mut buf = f.to_complex();
    planner.plan_fft_forward(n).process(&mut buf);
    buf[n / 2] = Complex64::new(0.0, 0.0);
    planner.plan_fft_inverse(n).process(&mut buf);
    let nf = n as f64;
    if f.is_real() {
        GridFunction::new(*f.grid(), buf.iter().map(|z| z.re / nf).collect())
    } else {
        GridFunction::from_complex(*f.grid(), buf.iter().map(|z| z / nf).collect())
    }
}

/// Real trigonometric polynomial with random coefficients on bins `lo..=hi`,
/// scaled to unit maximum. Requires `1 <= lo <= hi < n/2`.
pub fn random_band_limited(grid: Grid, lo: usize, hi: usize, seed: u64) -> Result<GridFunction> {
    let n = grid.len();
    if !(1 <= lo && lo <= hi && hi < n / 2) {
        return Err(Error::InvalidArgument(format!("bins {lo}..={hi} outside 1..{}", n / 2)));
    }
    let mut rng = seeded(seed);
    let coeffs: Vec<(usize, f64, f64)> = (lo..=hi)
        .map(|k| (k, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let tau = std::f64::consts::TAU;
    let values: Vec<f64> = (0..n)
        .map(|i| {
            coeffs
                .iter()
                .map(|&(k, a, b)| {
                    let t = tau * (k * i % n) as f64 / n as f64;
                    a * t.cos() + b * t.sin()
                })
                .sum()
        })
        .collect();
    let m = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    GridFunction::new(grid, values.iter().map(|v| v / m).collect())
}
