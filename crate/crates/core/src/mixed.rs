//! The variable mixed Lebesgue-sequence space `l^{q(.)}(L^{p(.)})`.
//!
//! The modular is the sum over terms of the per-term infima
//!
//! ```text
//! lambda_nu = inf { lambda > 0 : rho_p(lambda^{-1/q(.)} |f_nu|) <= 1 },
//! ```
//!
//! with `lambda^{-1/inf} = 1`. When `q_+ < inf` the same quantity equals
//! `sum_nu || |f_nu|^{q(.)} ||_{L^{p(.)/q(.)}}`; both routes are implemented
//! independently.

use serde::Serialize;

use crate::bisect;
use crate::domain::{FuncSequence, GridFunction};
use crate::error::{Error, Result};
use crate::exponents::{Exponent, ExponentClass, ExponentField};
use crate::lebesgue::{luxemburg_norm, NormResult};

/// How `lambda^{-1/q(x)}` is evaluated where `q(x) = inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InfiniteQScaling {
    /// `lambda^{-1/inf} = 1`.
    #[default]
    Unit,
    /// Fault injection for the verification harness: treats `q = inf` as `q = 1`.
    Reciprocal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedOptions {
    /// Relative bracket width for each per-term infimum.
    pub inner_tol: f64,
    /// Relative bracket width for the outer Luxemburg bisection.
    pub outer_tol: f64,
    pub infinite_q: InfiniteQScaling,
}

impl MixedOptions {
    /// Outer tolerance `tol`, inner two orders tighter.
    pub fn from_outer(tol: f64) -> Self {
        Self {
            inner_tol: (tol * 1e-2).max(1e-14),
            outer_tol: tol,
            infinite_q: InfiniteQScaling::Unit,
        }
    }
}

impl Default for MixedOptions {
    fn default() -> Self {
        Self {
            inner_tol: 1e-10,
            outer_tol: 1e-8,
            infinite_q: InfiniteQScaling::Unit,
        }
    }
}

/// Per-term infima of the mixed modular and their sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedModularBreakdown {
    pub per_term: Vec<f64>,
    /// Final bisection bracket of each term; `per_term` holds its midpoint.
    pub brackets: Vec<(f64, f64)>,
    pub total: f64,
}

/// One term of a sequence, reduced to its nonzero samples.
#[derive(Debug, Clone)]
pub(crate) struct TermSamples {
    /// `(ln dx + p ln|f|, p, p/q)` where `p < inf`.
    finite: Vec<(f64, f64, f64)>,
    /// `(ln|f|, 1/q)` where `p = inf`.
    inf: Vec<(f64, f64)>,
}

impl TermSamples {
    pub(crate) fn new(
        p: &ExponentField,
        q: &ExponentField,
        f: &GridFunction,
        scaling: InfiniteQScaling,
    ) -> Result<Self> {
        let ln_dx = f.grid().dx().ln();
        let mut finite = Vec::new();
        let mut inf = Vec::new();
        for i in 0..f.len() {
            let a = f.abs_at(i);
            if !a.is_finite() {
                return Err(Error::NonFinite(i));
            }
            if a == 0.0 {
                continue;
            }
            let inv_q = match (q.at(i), scaling) {
                (Exponent::Finite(qi), _) => 1.0 / qi,
                (Exponent::Infinite, InfiniteQScaling::Unit) => 0.0,
                (Exponent::Infinite, InfiniteQScaling::Reciprocal) => 1.0,
            };
            match p.at(i) {
                Exponent::Finite(pi) => finite.push((ln_dx + pi * a.ln(), pi, pi * inv_q)),
                Exponent::Infinite => inf.push((a.ln(), inv_q)),
            }
        }
        Ok(Self { finite, inf })
    }

    /// Builds from raw `(value, p, q)` triples with `p, q` finite; used by the
    /// brute-force dual search on a handful of coordinates.
    pub(crate) fn from_triples(ln_dx: f64, triples: &[(f64, f64, f64)]) -> Self {
        Self {
            finite: triples
                .iter()
                .filter(|(a, _, _)| *a != 0.0)
                .map(|&(a, p, q)| (ln_dx + p * a.abs().ln(), p, p / q))
                .collect(),
            inf: Vec::new(),
        }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.finite.is_empty() && self.inf.is_empty()
    }

    fn max_abs(&self) -> f64 {
        let a = self
            .finite
            .iter()
            .map(|&(lw, p, _)| lw / p)
            .fold(f64::NEG_INFINITY, f64::max);
        let b = self.inf.iter().map(|&(la, _)| la).fold(f64::NEG_INFINITY, f64::max);
        a.max(b).exp()
    }

    fn support_len(&self) -> usize {
        self.finite.len() + self.inf.len()
    }

    /// `rho_p(mu^{-1/q} |f| / lambda)` with `sigma = ln lambda`, `t = ln mu`.
    #[inline]
    fn modular(&self, sigma: f64, t: f64) -> f64 {
        let integral: f64 = self
            .finite
            .iter()
            .map(|&(lw, p, r)| (lw - p * sigma - r * t).exp())
            .sum();
        let sup = self
            .inf
            .iter()
            .map(|&(la, s)| (la - sigma - s * t).exp())
            .fold(0.0, f64::max);
        integral + sup
    }

    fn independent_of_mu(&self) -> bool {
        self.finite.iter().all(|&(_, _, r)| r == 0.0) && self.inf.iter().all(|&(_, s)| s == 0.0)
    }

    /// Per-term infimum for `f / lambda`; returns `(midpoint, bracket)`.
    fn infimum(&self, sigma: f64, tol: f64) -> Result<(f64, (f64, f64))> {
        if self.is_zero() {
            return Ok((0.0, (0.0, 0.0)));
        }
        if self.independent_of_mu() {
            // Every sample sits where q = inf: the constraint does not involve mu.
            return Ok(if self.modular(sigma, 0.0) <= 1.0 {
                (0.0, (0.0, 0.0))
            } else {
                (f64::INFINITY, (f64::INFINITY, f64::INFINITY))
            });
        }
        let rates = self
            .finite
            .iter()
            .map(|&(_, _, r)| r)
            .chain(self.inf.iter().map(|&(_, s)| s))
            .filter(|&r| r > 0.0);
        let (sum, count) = rates.fold((0.0, 0usize), |(s, c), r| (s + r, c + 1));
        let m0 = self.modular(sigma, 0.0);
        let seed = if m0 > 0.0 && m0.is_finite() {
            (m0.ln() / (sum / count as f64)).clamp(-690.0, 690.0).exp()
        } else {
            1.0
        };
        let b = bisect::infimum(seed, tol, |mu| self.modular(sigma, mu.ln()) <= 1.0)?;
        Ok((b.midpoint(), (b.lo, b.hi)))
    }
}

/// A whole sequence prepared for repeated modular evaluations.
#[derive(Debug, Clone)]
pub(crate) struct SequenceSamples {
    terms: Vec<TermSamples>,
    dx: f64,
    p_minus: f64,
    q_minus: f64,
}

impl SequenceSamples {
    pub(crate) fn new(
        p: &ExponentField,
        q: &ExponentField,
        f: &FuncSequence,
        scaling: InfiniteQScaling,
    ) -> Result<Self> {
        p.grid().ensure_same(q.grid())?;
        p.grid().ensure_same(f.grid())?;
        let terms = f
            .terms()
            .iter()
            .map(|t| TermSamples::new(p, q, t, scaling))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            terms,
            dx: f.grid().dx(),
            p_minus: p.p_minus().as_f64(),
            q_minus: q.p_minus().as_f64(),
        })
    }

    pub(crate) fn from_terms(terms: Vec<TermSamples>, dx: f64, p_minus: f64, q_minus: f64) -> Self {
        Self {
            terms,
            dx,
            p_minus,
            q_minus,
        }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.iter().all(TermSamples::is_zero)
    }

    /// Modular of `f / lambda`, summed in term order.
    pub(crate) fn breakdown(&self, lambda: f64, tol: f64) -> Result<MixedModularBreakdown> {
        let sigma = lambda.ln();
        let mut per_term = Vec::with_capacity(self.terms.len());
        let mut brackets = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let (v, b) = t.infimum(sigma, tol)?;
            per_term.push(v);
            brackets.push(b);
        }
        let total = per_term.iter().sum();
        Ok(MixedModularBreakdown {
            per_term,
            brackets,
            total,
        })
    }

    pub(crate) fn total(&self, lambda: f64, tol: f64) -> Result<f64> {
        let sigma = lambda.ln();
        let mut total = 0.0;
        for t in &self.terms {
            total += t.infimum(sigma, tol)?.0;
        }
        Ok(total)
    }

    pub(crate) fn norm(&self, opts: &MixedOptions) -> Result<NormResult> {
        if self.is_zero() {
            return Ok(NormResult::zero(opts.outer_tol));
        }
        let max_abs = self.terms.iter().map(TermSamples::max_abs).fold(0.0, f64::max);
        let measure = self.dx * self.terms.iter().map(TermSamples::support_len).sum::<usize>() as f64;
        let e = self.p_minus.min(self.q_minus);
        let spread = if e.is_finite() && e > 0.0 {
            measure.powf(1.0 / e)
        } else {
            1.0
        };
        let seed = max_abs * spread;
        let seed = if seed > 0.0 && seed.is_finite() { seed } else { 1.0 };
        let mut failure = None;
        let b = bisect::infimum(seed, opts.outer_tol, |l| match self.total(l, opts.inner_tol) {
            Ok(t) => t <= 1.0,
            Err(e) => {
                failure.get_or_insert(e);
                true
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        if b.lo == 0.0 {
            return Err(Error::BracketFailure(bisect::MAX_BRACKET_STEPS));
        }
        Ok(NormResult {
            value: b.hi,
            modular_at_value: self.total(b.hi, opts.inner_tol)?,
            bracket: (b.lo, b.hi),
            iterations: b.iterations,
            tolerance: opts.outer_tol,
        })
    }
}

/// The mixed modular by per-term bisection in `lambda_nu`, inner tolerance `tol`.
pub fn mixed_modular_p1(
    p: &ExponentField,
    q: &ExponentField,
    f: &FuncSequence,
    tol: f64,
) -> Result<MixedModularBreakdown> {
    mixed_modular_p1_with(p, q, f, tol, InfiniteQScaling::Unit)
}

pub fn mixed_modular_p1_with(
    p: &ExponentField,
    q: &ExponentField,
    f: &FuncSequence,
    tol: f64,
    scaling: InfiniteQScaling,
) -> Result<MixedModularBreakdown> {
    SequenceSamples::new(p, q, f, scaling)?.breakdown(1.0, tol)
}

/// Modular of `f / lambda` through the same code path the norm bisection uses.
pub fn mixed_modular_scaled(
    p: &ExponentField,
    q: &ExponentField,
    f: &FuncSequence,
    lambda: f64,
    opts: &MixedOptions,
) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("scale must be positive, got {lambda}")));
    }
    SequenceSamples::new(p, q, f, opts.infinite_q)?.total(lambda, opts.inner_tol)
}

/// `p(.)/q(.)` pointwise, with `inf / q = inf`.
pub fn quotient_exponent(p: &ExponentField, q: &ExponentField) -> Result<ExponentField> {
    p.grid().ensure_same(q.grid())?;
    if q.has_infinite() {
        return Err(Error::QPlusInfinite);
    }
    let values: Vec<Exponent> = p
        .values()
        .iter()
        .zip(q.values())
        .map(|(pi, qi)| match (pi, qi) {
            (Exponent::Infinite, _) => Exponent::Infinite,
            (Exponent::Finite(a), Exponent::Finite(b)) => Exponent::Finite(a / b),
            (Exponent::Finite(_), Exponent::Infinite) => unreachable!("q checked finite"),
        })
        .collect();
    let floor = values.iter().map(|v| v.as_f64()).fold(f64::INFINITY, f64::min);
    if !(floor > 0.0) {
        return Err(Error::UnsupportedExponent(format!(
            "p/q must be positive, minimum is {floor}"
        )));
    }
    let floor = if floor.is_finite() { floor } else { 1.0 };
    ExponentField::new(*p.grid(), values, ExponentClass::P0 { floor })
}

/// The mixed modular as `sum_nu || |f_nu|^{q(.)} ||_{L^{p(.)/q(.)}}` (needs `q_+ < inf`).
pub fn mixed_modular_p1a(p: &ExponentField, q: &ExponentField, f: &FuncSequence, tol: f64) -> Result<f64> {
    p.grid().ensure_same(f.grid())?;
    let quotient = quotient_exponent(p, q)?;
    let qv = q.finite_values().ok_or(Error::QPlusInfinite)?;
    let mut total = 0.0;
    for term in f.terms() {
        let powered = term.map_abs(|i, a| if a == 0.0 { 0.0 } else { a.powf(qv[i]) });
        total += luxemburg_norm(&quotient, &powered, tol)?.value;
    }
    Ok(total)
}

/// `inf { lambda : rho(f / lambda) <= 1 }` for the mixed modular, outer
/// tolerance `tol` (inner bisections two orders tighter).
pub fn mixed_norm(p: &ExponentField, q: &ExponentField, f: &FuncSequence, tol: f64) -> Result<NormResult> {
    mixed_norm_with(p, q, f, &MixedOptions::from_outer(tol))
}

pub fn mixed_norm_with(
    p: &ExponentField,
    q: &ExponentField,
    f: &FuncSequence,
    opts: &MixedOptions,
) -> Result<NormResult> {
    SequenceSamples::new(p, q, f, opts.infinite_q)?.norm(opts)
}

/// `P_n f`.
pub fn project(n: usize, f: &FuncSequence) -> FuncSequence {
    f.project(n)
}

/// Norm of `l^{q_-}(L^{p(.)})`: `(sum_nu ||f_nu||_{p(.)}^{q_-})^{1/q_-}`.
pub fn lqminus_norm(p: &ExponentField, q_minus: f64, f: &FuncSequence, tol: f64) -> Result<f64> {
    if !(q_minus >= 1.0 && q_minus.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "q_minus must be finite and >= 1, got {q_minus}"
        )));
    }
    p.grid().ensure_same(f.grid())?;
    let mut sum = 0.0;
    for t in f.terms() {
        sum += luxemburg_norm(p, t, tol)?.value.powf(q_minus);
    }
    Ok(sum.powf(1.0 / q_minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{random_function, FunctionKind, Grid};
    use crate::exponents::{check_normability, random_log_holder};
    use crate::lebesgue::luxemburg_norm;
    use proptest::prelude::*;

    fn cst(g: Grid, v: f64) -> ExponentField {
        ExponentField::constant(g, Exponent::Finite(v), ExponentClass::P0 { floor: v.min(1.0) }).unwrap()
    }

    fn seq(g: Grid, terms: Vec<GridFunction>) -> FuncSequence {
        FuncSequence::new(g, terms).unwrap()
    }

    #[test]
    fn p1_examples() {
        let g = Grid::new(2.0, 1024).unwrap();
        let (p, q) = (cst(g, 2.0), cst(g, 2.0));
        let one = GridFunction::indicator(g, 0.0, 1.0, 1.0);
        let b = mixed_modular_p1(&p, &q, &seq(g, vec![one.clone()]), 1e-10).unwrap();
        assert!((b.total - 1.0).abs() < 1e-9);
        let zero = seq(g, vec![GridFunction::zeros(g); 3]);
        assert_eq!(mixed_modular_p1(&p, &q, &zero, 1e-10).unwrap().total, 0.0);
        let two = seq(g, vec![one.scaled(2.0), one.clone()]);
        let b = mixed_modular_p1(&p, &q, &two, 1e-10).unwrap();
        assert!((b.per_term[0] - 4.0).abs() < 1e-9 && (b.per_term[1] - 1.0).abs() < 1e-9);
        assert!((b.total - 5.0).abs() < 1e-9);
        assert!((mixed_modular_p1a(&p, &q, &two, 1e-10).unwrap() - 5.0).abs() < 1e-9);
        for (v, (lo, hi)) in b.per_term.iter().zip(&b.brackets) {
            assert!(lo <= v && v <= hi);
        }
    }

    #[test]
    fn p1a_examples_and_errors() {
        let g = Grid::new(2.0, 1024).unwrap();
        let (p, q) = (cst(g, 2.0), cst(g, 2.0));
        let one = GridFunction::indicator(g, 0.0, 1.0, 1.0);
        assert!((mixed_modular_p1a(&p, &q, &seq(g, vec![one]), 1e-10).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(
            mixed_modular_p1a(&p, &q, &FuncSequence::zeros(g, 2), 1e-10).unwrap(),
            0.0
        );
        let qi = ExponentField::constant(g, Exponent::Infinite, ExponentClass::P).unwrap();
        assert!(matches!(
            mixed_modular_p1a(&p, &qi, &FuncSequence::zeros(g, 1), 1e-10),
            Err(Error::QPlusInfinite)
        ));
    }

    #[test]
    fn infinite_q_uses_unit_scaling() {
        let g = Grid::new(2.0, 256).unwrap();
        let p = cst(g, 2.0);
        let qi = ExponentField::constant(g, Exponent::Infinite, ExponentClass::P).unwrap();
        let small = seq(g, vec![GridFunction::indicator(g, 0.0, 1.0, 0.5)]);
        let big = seq(g, vec![GridFunction::indicator(g, 0.0, 1.0, 2.0)]);
        assert_eq!(mixed_modular_p1(&p, &qi, &small, 1e-10).unwrap().total, 0.0);
        assert_eq!(mixed_modular_p1(&p, &qi, &big, 1e-10).unwrap().total, f64::INFINITY);
        // l^inf(L^2): the norm is the largest term norm.
        let f = seq(
            g,
            vec![
                GridFunction::indicator(g, 0.0, 1.0, 0.5),
                GridFunction::indicator(g, -1.0, 0.0, 3.0),
            ],
        );
        let n = mixed_norm(&p, &qi, &f, 1e-8).unwrap().value;
        assert!((n - 3.0).abs() < 1e-7, "{n}");
        let broken = mixed_norm_with(
            &p,
            &qi,
            &f,
            &MixedOptions {
                infinite_q: InfiniteQScaling::Reciprocal,
                ..MixedOptions::default()
            },
        )
        .unwrap()
        .value;
        assert!((broken - 3.0).abs() > 1e-3);
    }

    #[test]
    fn mixed_norm_examples() {
        let g = Grid::new(2.0, 1024).unwrap();
        let (p, q) = (cst(g, 2.0), cst(g, 2.0));
        let one = GridFunction::indicator(g, 0.0, 1.0, 1.0);
        let f = seq(g, vec![one.clone(), one.clone()]);
        let n = mixed_norm(&p, &q, &f, 1e-8).unwrap();
        assert!((n.value - 2f64.sqrt()).abs() < 1e-7);
        assert!(n.modular_at_value <= 1.0);
        assert!((lqminus_norm(&p, 2.0, &f, 1e-10).unwrap() - 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(mixed_norm(&p, &q, &FuncSequence::zeros(g, 4), 1e-8).unwrap().value, 0.0);
    }

    /// One term: `lambda_1(f/l) <= 1` iff `rho_p(f/l) <= 1`, so both norms agree.
    #[test]
    fn single_term_reduces_to_luxemburg() {
        let g = Grid::new(2.0, 512).unwrap();
        for seed in 0..5u64 {
            let p = random_log_holder(g, 1.3, 3.5, 4, seed).unwrap().field;
            let q = random_log_holder(g, 1.1, 4.0, 3, seed + 100).unwrap().field;
            let f = random_function(g, FunctionKind::Smooth, 2.0, seed).unwrap();
            let lux = luxemburg_norm(&p, &f, 1e-11).unwrap().value;
            let mixed = mixed_norm(&p, &q, &seq(g, vec![f.clone()]), 1e-9).unwrap().value;
            assert!((lux - mixed).abs() <= 1e-8 * lux, "{lux} vs {mixed}");
            let lq = lqminus_norm(&p, q.p_minus().as_f64(), &seq(g, vec![f]), 1e-11).unwrap();
            assert!((lux - lq).abs() <= 1e-10 * lux);
        }
    }

    /// Brute-force lambda scan: 500 geometric samples around the answer; the
    /// smallest feasible sample must sit within one ladder step of the bisection.
    #[test]
    fn norm_agrees_with_lambda_scan() {
        let g = Grid::new(2.0, 256).unwrap();
        let p = random_log_holder(g, 1.5, 3.0, 4, 5).unwrap().field;
        let q = cst(g, 2.0);
        let terms = (0..4)
            .map(|k| random_function(g, FunctionKind::Smooth, 1.0 / (k + 1) as f64, 5 + k).unwrap())
            .collect();
        let f = seq(g, terms);
        let v = mixed_norm(&p, &q, &f, 1e-8).unwrap().value;
        let opts = MixedOptions::default();
        let (lo, hi) = (0.999 * v, 1.001 * v);
        let ratio = (hi / lo).powf(1.0 / 499.0);
        let first_feasible = (0..500)
            .map(|k| lo * ratio.powi(k))
            .find(|&l| mixed_modular_scaled(&p, &q, &f, l, &opts).unwrap() <= 1.0)
            .unwrap();
        assert!((first_feasible - v).abs() <= 1e-4 * v, "{first_feasible} vs {v}");
        assert!(first_feasible >= v * (1.0 - 1e-7));
    }

    fn instance(seed: u64, n_terms: usize) -> (ExponentField, ExponentField, FuncSequence) {
        let g = Grid::new(2.0, 128).unwrap();
        let p = random_log_holder(g, 1.2, 4.0, 4, seed).unwrap().field;
        let q = random_log_holder(g, 1.1, 3.0, 3, seed ^ 0xabcd).unwrap().field;
        let terms = (0..n_terms)
            .map(|k| {
                let kind = if k % 2 == 0 {
                    FunctionKind::Smooth
                } else {
                    FunctionKind::Bump
                };
                random_function(g, kind, 1.5 * 0.7f64.powi(k as i32), seed * 17 + k as u64).unwrap()
            })
            .collect();
        (p, q, FuncSequence::new(g, terms).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn p1_equals_p1a(seed in 0u64..10_000) {
            let (p, q, f) = instance(seed, 4);
            let a = mixed_modular_p1(&p, &q, &f, 1e-10).unwrap().total;
            let b = mixed_modular_p1a(&p, &q, &f, 1e-10).unwrap();
            prop_assert!((a - b).abs() <= 1e-6 * a.max(b));
        }

        #[test]
        fn norm_properties(seed in 0u64..10_000, c in 0.05f64..20.0) {
            let tol = 1e-8;
            let opts = MixedOptions::from_outer(tol);
            let (p, q, f) = instance(seed, 4);
            let v = mixed_norm(&p, &q, &f, tol).unwrap().value;
            prop_assert!(mixed_modular_scaled(&p, &q, &f, v, &opts).unwrap() <= 1.0);
            prop_assert!(mixed_modular_scaled(&p, &q, &f, 0.999 * v, &opts).unwrap() > 1.0);
            let vc = mixed_norm(&p, &q, &f.scaled(c), tol).unwrap().value;
            prop_assert!((vc - c * v).abs() <= 10.0 * tol * c * v);
            for n in 0..=4 {
                prop_assert!(mixed_norm(&p, &q, &f.project(n), tol).unwrap().value <= v + 10.0 * tol);
            }
            let lq = lqminus_norm(&p, q.p_minus().as_f64(), &f, 1e-10).unwrap();
            prop_assert!(v <= lq + 10.0 * tol);
        }

        #[test]
        fn triangle_when_normable(seed in 0u64..10_000) {
            let tol = 1e-8;
            let (p, _, f) = instance(seed, 3);
            // q <= p pointwise: condition (1).
            let q = ExponentField::from_finite(
                *p.grid(),
                p.values().iter().map(|v| 1.0 + 0.8 * (v.as_f64() - 1.0)).collect(),
                ExponentClass::P,
            ).unwrap();
            prop_assert!(check_normability(&p, &q).unwrap().is_normable());
            let (_, _, h) = instance(seed + 1, 3);
            let a = mixed_norm(&p, &q, &f, tol).unwrap().value;
            let b = mixed_norm(&p, &q, &h, tol).unwrap().value;
            let s = mixed_norm(&p, &q, &f.add(&h).unwrap(), tol).unwrap().value;
            prop_assert!(s <= a + b + 10.0 * tol);
        }

        #[test]
        fn constant_exponent_oracle(seed in 0u64..10_000, p0 in 1.0f64..5.0, q0 in 1.0f64..5.0) {
            let (_, _, f) = instance(seed, 4);
            let g = *f.grid();
            let expected = f
                .terms()
                .iter()
                .map(|t| (g.dx() * t.values().iter().map(|v| v.abs().powf(p0)).sum::<f64>()).powf(q0 / p0))
                .sum::<f64>()
                .powf(1.0 / q0);
            let got = mixed_norm(&cst(g, p0), &cst(g, q0), &f, 1e-8).unwrap().value;
            prop_assert!((got - expected).abs() <= 1e-6 * expected);
        }
    }
}
