//! The variable-exponent Lebesgue modular and its Luxemburg norm.
//!
//! `rho(f) = dx * sum_{p_i < inf} |f_i|^{p_i} + max_{p_i = inf} |f_i|` and
//! `||f|| = inf { lambda > 0 : rho(f / lambda) <= 1 }`.

use serde::Serialize;

use crate::bisect;
use crate::domain::GridFunction;
use crate::error::{Error, Result};
use crate::exponents::{Exponent, ExponentField};

/// A norm value with the diagnostics of the bisection that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormResult {
    pub value: f64,
    /// Modular of `f / value`; at most 1 whenever `value > 0`.
    pub modular_at_value: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub tolerance: f64,
}

impl NormResult {
    pub(crate) fn zero(tolerance: f64) -> Self {
        Self {
            value: 0.0,
            modular_at_value: 0.0,
            bracket: (0.0, 0.0),
            iterations: 0,
            tolerance,
        }
    }
}

/// Nonzero samples of `|f|` in log form, split by whether `p` is finite there.
#[derive(Debug, Clone)]
pub(crate) struct LogSamples {
    /// `(ln |f_i|, p_i)` where `p_i < inf`.
    finite: Vec<(f64, f64)>,
    /// `max |f_i|` over `Omega_inf`, 0 when empty.
    inf_max: f64,
    ln_dx: f64,
}

impl LogSamples {
    pub(crate) fn new(p: &ExponentField, f: &GridFunction) -> Result<Self> {
        p.grid().ensure_same(f.grid())?;
        let mut finite = Vec::new();
        let mut inf_max = 0.0f64;
        for i in 0..f.len() {
            let a = f.abs_at(i);
            if !a.is_finite() {
                return Err(Error::NonFinite(i));
            }
            if a == 0.0 {
                continue;
            }
            match p.at(i) {
                Exponent::Finite(pi) => finite.push((a.ln(), pi)),
                Exponent::Infinite => inf_max = inf_max.max(a),
            }
        }
        Ok(Self {
            finite,
            inf_max,
            ln_dx: f.grid().dx().ln(),
        })
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.finite.is_empty() && self.inf_max == 0.0
    }

    pub(crate) fn support_len(&self) -> usize {
        self.finite.len() + usize::from(self.inf_max > 0.0)
    }

    pub(crate) fn max_abs(&self) -> f64 {
        self.finite.iter().map(|(la, _)| la.exp()).fold(self.inf_max, f64::max)
    }

    pub(crate) fn p_minus(&self) -> f64 {
        self.finite.iter().map(|(_, p)| *p).fold(f64::INFINITY, f64::min)
    }

    /// `rho(f / lambda)`; each power is `exp(p (ln|f| - ln lambda))`, so large
    /// values overflow to `+inf` instead of wrapping through `powf`.
    pub(crate) fn modular_scaled(&self, lambda: f64) -> f64 {
        let ln_l = lambda.ln();
        let integral: f64 = self
            .finite
            .iter()
            .map(|&(la, p)| (self.ln_dx + p * (la - ln_l)).exp())
            .sum();
        integral + self.inf_max / lambda
    }
}

/// `rho_{L^{p(.)}}(f)`; `+inf` when the integral overflows.
pub fn modular_lp(p: &ExponentField, f: &GridFunction) -> Result<f64> {
    Ok(LogSamples::new(p, f)?.modular_scaled(1.0))
}

/// `rho_{L^{p(.)}}(f / lambda)`, evaluated without forming `f / lambda`.
pub fn modular_lp_scaled(p: &ExponentField, f: &GridFunction, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("scale must be positive, got {lambda}")));
    }
    Ok(LogSamples::new(p, f)?.modular_scaled(lambda))
}

/// Luxemburg norm by bracketing from `max|f| * |supp f|^{1/p_-}` and bisecting
/// to relative bracket width `tol`. The returned value is the feasible end of
/// the bracket, so `rho(f / value) <= 1` always holds.
pub fn luxemburg_norm(p: &ExponentField, f: &GridFunction, tol: f64) -> Result<NormResult> {
    let samples = LogSamples::new(p, f)?;
    norm_of_samples(&samples, f.grid().dx(), tol)
}

pub(crate) fn norm_of_samples(samples: &LogSamples, dx: f64, tol: f64) -> Result<NormResult> {
    if samples.is_zero() {
        return Ok(NormResult::zero(tol));
    }
    let measure = dx * samples.support_len() as f64;
    let p_minus = samples.p_minus();
    let spread = if p_minus.is_finite() {
        measure.powf(1.0 / p_minus)
    } else {
        1.0
    };
    let seed = samples.max_abs() * spread;
    let seed = if seed > 0.0 && seed.is_finite() { seed } else { 1.0 };
    let b = bisect::infimum(seed, tol, |l| samples.modular_scaled(l) <= 1.0)?;
    if b.lo == 0.0 {
        // Cannot happen for f != 0: rho(f/lambda) -> inf as lambda -> 0.
        return Err(Error::BracketFailure(bisect::MAX_BRACKET_STEPS));
    }
    Ok(NormResult {
        value: b.hi,
        modular_at_value: samples.modular_scaled(b.hi),
        bracket: (b.lo, b.hi),
        iterations: b.iterations,
        tolerance: tol,
    })
}

/// `int f g dx` (real part of the product when complex).
pub fn pairing_l1(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    f.grid().ensure_same(g.grid())?;
    let sum: f64 = (0..f.len()).map(|i| (f.at(i) * g.at(i)).re).sum();
    Ok(f.grid().dx() * sum)
}
