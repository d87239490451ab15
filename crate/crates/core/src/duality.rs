//! The Köthe dual of `l^{q(.)}(L^{p(.)})`: the pairing, the dual norm
//!
//! ```text
//! ||g||' = sup { sum_nu int f_nu g_nu dx : ||f|| <= 1 },
//! ```
//!
//! tails of the dual norm, and the norming check `sup_{||g||' <= 1} <f, g> = ||f||`.
//!
//! The supremum is attained on nonnegative `f` against `|g|` (multiply each
//! term by the phase of `conj(g)`), so both solvers work with `a = |g|`.
//!
//! ASCENT splits the unit ball by the per-term budgets of the modular: with
//! `mu` on the simplex, term `nu` may use any `h >= 0` with
//! `dx sum_i h_i^{p_i} mu_nu^{-p_i/q_i} <= 1`. Each block has a closed-form
//! maximizer up to one scalar multiplier, and the outer problem over `mu` is
//! solved by multiplicative (mirror) ascent with a Frank-Wolfe gap as
//! certificate. BRUTE enumerates directions on an angular product grid.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::domain::{FuncSequence, GridFunction};
use crate::error::{Error, Result};
use crate::exponents::{check_normability, Exponent, ExponentField};
use crate::lebesgue::pairing_l1;
use crate::mixed::{mixed_norm, MixedOptions, SequenceSamples, TermSamples};
use crate::rng::{hash_f64s, Streams};

/// Most nonzero coordinates of `g` that BRUTE accepts.
pub const BRUTE_DOF_LIMIT: usize = 6;
/// Angular levels per coordinate in the BRUTE direction grid.
pub const BRUTE_LEVELS: usize = 20;
/// Most grid directions BRUTE evaluates; fewer levels are used past it.
pub const BRUTE_BUDGET: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Brute,
    Ascent,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Brute => "BRUTE",
            Method::Ascent => "ASCENT",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualOptions {
    /// Relative stopping tolerance of the ascent and of the final renormalisation.
    pub tol: f64,
    pub starts: usize,
    pub max_iterations: usize,
    /// Stop when the objective improves by less than `tol` over this many iterations.
    pub stall_window: usize,
    pub brute_levels: usize,
}

impl DualOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

impl Default for DualOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            starts: 5,
            max_iterations: 2000,
            stall_window: 25,
            brute_levels: BRUTE_LEVELS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualNormResult {
    pub value: f64,
    /// Near-optimal `f` with `||f|| <= 1`, phase-aligned with `g`.
    pub maximizer: FuncSequence,
    pub method: Method,
    /// ASCENT: Frank-Wolfe gap relative to the value. BRUTE: relative
    /// difference to the ASCENT answer when that one is available.
    pub certificate_gap: Option<f64>,
    pub iterations: usize,
    pub starts: usize,
}

/// `sum_nu int f_nu g_nu dx`; the shorter sequence is padded with zeros.
pub fn pairing(f: &FuncSequence, g: &FuncSequence) -> Result<f64> {
    f.grid().ensure_same(g.grid())?;
    let mut total = 0.0;
    for (a, b) in f.terms().iter().zip(g.terms()) {
        total += pairing_l1(a, b)?;
    }
    Ok(total)
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// One term of `|g|` restricted to its support.
#[derive(Debug, Clone)]
struct Block {
    idx: Vec<usize>,
    ln_a: Vec<f64>,
    p: Vec<f64>,
    r: Vec<f64>,
}

#[derive(Debug, Clone)]
struct BlockSolution {
    ln_value: f64,
    ln_slope: f64,
    /// `r`-weighted over `p`-weighted constraint mass; `m V'(m) / V(m)`.
    elasticity: f64,
    beta: f64,
}

impl Block {
    /// Maximizer of `dx sum a_i h_i` subject to `dx sum h_i^{p_i} m^{-r_i} <= 1`:
    /// `h_i = (a_i m^{r_i} / (theta p_i))^{1/(p_i - 1)}`, with `beta = ln theta`
    /// the root of the convex decreasing `ln C(beta)`, found by Newton.
    fn solve(&self, ln_dx: f64, ln_m: f64, beta0: f64) -> BlockSolution {
        let k = self.idx.len();
        let mut c = Vec::with_capacity(k);
        let mut s = Vec::with_capacity(k);
        for j in 0..k {
            let (p, r) = (self.p[j], self.r[j]);
            c.push(ln_dx + p * (self.ln_a[j] + r * ln_m - p.ln()) / (p - 1.0) - r * ln_m);
            s.push(p / (p - 1.0));
        }
        let mut beta = beta0;
        for _ in 0..200 {
            let terms = (0..k).map(|j| c[j] - s[j] * beta);
            let f = log_sum_exp(terms.clone());
            let mean_s: f64 = terms.clone().zip(&s).map(|(t, sj)| (t - f).exp() * sj).sum();
            let step = f / mean_s;
            beta += step;
            if step.abs() <= 1e-15 * (1.0 + beta.abs()) {
                break;
            }
        }
        let f = log_sum_exp((0..k).map(|j| c[j] - s[j] * beta));
        let (mut wr, mut wp) = (0.0, 0.0);
        for j in 0..k {
            let w = (c[j] - s[j] * beta - f).exp();
            wr += w * self.r[j];
            wp += w * self.p[j];
        }
        let ln_value = log_sum_exp((0..k).map(|j| ln_dx + self.ln_a[j] + self.ln_h(j, ln_m, beta)));
        let elasticity = wr / wp;
        BlockSolution {
            ln_value,
            ln_slope: ln_value - ln_m + elasticity.ln(),
            elasticity,
            beta,
        }
    }

    fn ln_h(&self, j: usize, ln_m: f64, beta: f64) -> f64 {
        (self.ln_a[j] + self.r[j] * ln_m - self.p[j].ln() - beta) / (self.p[j] - 1.0)
    }
}

/// `|g|` split into blocks, with the exponent data needed by both solvers.
struct DualProblem<'a> {
    p: &'a ExponentField,
    q: &'a ExponentField,
    g: &'a FuncSequence,
    ln_dx: f64,
    /// `(term index, block)` for every nonzero term.
    blocks: Vec<(usize, Block)>,
}

impl<'a> DualProblem<'a> {
    fn new(p: &'a ExponentField, q: &'a ExponentField, g: &'a FuncSequence) -> Result<Self> {
        p.grid().ensure_same(q.grid())?;
        p.grid().ensure_same(g.grid())?;
        if !check_normability(p, q)?.is_normable() {
            return Err(Error::NotNormable);
        }
        let mut blocks = Vec::new();
        for (nu, term) in g.terms().iter().enumerate() {
            let mut b = Block {
                idx: Vec::new(),
                ln_a: Vec::new(),
                p: Vec::new(),
                r: Vec::new(),
            };
            for i in 0..term.len() {
                let a = term.abs_at(i);
                if !a.is_finite() {
                    return Err(Error::NonFinite(i));
                }
                if a == 0.0 {
                    continue;
                }
                b.idx.push(i);
                b.ln_a.push(a.ln());
                b.p.push(p.at(i).as_f64());
                b.r.push(p.at(i).as_f64() * q.at(i).recip());
            }
            if !b.idx.is_empty() {
                blocks.push((nu, b));
            }
        }
        Ok(Self {
            p,
            q,
            g,
            ln_dx: g.grid().dx().ln(),
            blocks,
        })
    }

    fn dof(&self) -> usize {
        self.blocks.iter().map(|(_, b)| b.idx.len()).sum()
    }

    fn ensure_interior_exponents(&self) -> Result<()> {
        for (_, b) in &self.blocks {
            for (j, &i) in b.idx.iter().enumerate() {
                let (p, q) = (self.p.at(i), self.q.at(i));
                if !(b.p[j] > 1.0 && p.finite().is_some() && q.finite().is_some()) {
                    return Err(Error::UnsupportedExponent(format!(
                        "the dual solvers need 1 < p < inf and q < inf on the support of g; \
                         found p = {p}, q = {q} at index {i}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Places nonnegative magnitudes `h[nu][j]` on the support of `g`, rotated
    /// by the phase of `conj(g)` so the pairing with `g` is `dx sum h |g|`.
    fn aligned(&self, h: &[Vec<f64>], scale: f64) -> Result<FuncSequence> {
        let grid = *self.g.grid();
        let real = self.g.is_real();
        let mut terms = vec![GridFunction::zeros(grid); self.g.len()];
        for ((nu, b), hv) in self.blocks.iter().zip(h) {
            let gt = &self.g.terms()[*nu];
            if real {
                let mut v = vec![0.0; grid.len()];
                for (j, &i) in b.idx.iter().enumerate() {
                    v[i] = hv[j] * scale * gt.values()[i].signum();
                }
                terms[*nu] = GridFunction::new(grid, v)?;
            } else {
                let mut v = vec![Complex64::new(0.0, 0.0); grid.len()];
                for (j, &i) in b.idx.iter().enumerate() {
                    let z = gt.at(i);
                    v[i] = z.conj() / z.norm() * (hv[j] * scale);
                }
                terms[*nu] = GridFunction::from_complex(grid, v)?;
            }
        }
        FuncSequence::new(grid, terms)
    }

    /// Mixed norm of the nonnegative magnitudes `h` placed on the support.
    fn magnitude_norm(&self, h: &[Vec<f64>], tol: f64) -> Result<f64> {
        let terms = self
            .blocks
            .iter()
            .zip(h)
            .map(|((_, b), hv)| {
                let triples: Vec<(f64, f64, f64)> = b
                    .idx
                    .iter()
                    .enumerate()
                    .map(|(j, &i)| (hv[j], b.p[j], self.q.at(i).as_f64()))
                    .collect();
                TermSamples::from_triples(self.ln_dx, &triples)
            })
            .collect();
        let samples = SequenceSamples::from_terms(
            terms,
            self.ln_dx.exp(),
            self.p.p_minus().as_f64(),
            self.q.p_minus().as_f64(),
        );
        Ok(samples.norm(&MixedOptions::from_outer(tol))?.value)
    }

    fn pairing_with_magnitudes(&self, h: &[Vec<f64>]) -> f64 {
        let dx = self.ln_dx.exp();
        self.blocks
            .iter()
            .zip(h)
            .map(|((_, b), hv)| dx * b.ln_a.iter().zip(hv).map(|(la, x)| la.exp() * x).sum::<f64>())
            .sum()
    }

    fn instance_seed(&self) -> u64 {
        let data: Vec<f64> = self
            .blocks
            .iter()
            .flat_map(|(nu, b)| {
                std::iter::once(*nu as f64)
                    .chain(b.ln_a.iter().copied())
                    .chain(b.p.iter().copied())
                    .chain(b.r.iter().copied())
            })
            .collect();
        hash_f64s(&data)
    }
}

struct AscentRun {
    objective: f64,
    ln_mu: Vec<f64>,
    sols: Vec<BlockSolution>,
    gap: f64,
    iterations: usize,
}

fn evaluate(problem: &DualProblem, ln_mu: &[f64], warm: Option<&[BlockSolution]>) -> Vec<BlockSolution> {
    problem
        .blocks
        .iter()
        .enumerate()
        .map(|(k, (_, b))| b.solve(problem.ln_dx, ln_mu[k], warm.map_or(0.0, |w| w[k].beta)))
        .collect()
}

fn objective(sols: &[BlockSolution]) -> f64 {
    sols.iter().map(|s| s.ln_value.exp()).sum()
}

fn normalise(ln_mu: &mut [f64]) {
    let z = log_sum_exp(ln_mu.iter().copied());
    for x in ln_mu.iter_mut() {
        *x -= z;
    }
}

fn fw_gap(ln_mu: &[f64], sols: &[BlockSolution]) -> f64 {
    let best = sols.iter().map(|s| s.ln_slope.exp()).fold(0.0, f64::max);
    let mean: f64 = ln_mu.iter().zip(sols).map(|(m, s)| (m + s.ln_slope).exp()).sum();
    (best - mean).max(0.0)
}

/// `ln mu + tau gamma (ln V' - L)` with the level `L` chosen so the result
/// sums to 1. With `gamma = 1 / (1 - m V'/V)` this is the exact optimum when
/// every `V_nu` is a power of `m`; for general `gamma > 0` it is an ascent
/// direction, since `sum mu gamma (V' - e^L)(ln V' - L) >= 0`.
fn mirror_step(ln_mu: &[f64], ln_slope: &[f64], gamma: &[f64], tau: f64) -> Vec<f64> {
    let at = |level: f64| -> Vec<f64> {
        (0..ln_mu.len())
            .map(|k| ln_mu[k] + tau * gamma[k] * (ln_slope[k] - level))
            .collect()
    };
    let mut level = ln_mu.iter().zip(ln_slope).map(|(m, s)| m.exp() * s).sum::<f64>();
    for _ in 0..200 {
        let x = at(level);
        let f = log_sum_exp(x.iter().copied());
        let w = x.iter().zip(gamma).map(|(xi, g)| (xi - f).exp() * g).sum::<f64>();
        let step = f / (tau * w);
        level += step;
        if step.abs() <= 1e-15 * (1.0 + level.abs()) {
            break;
        }
    }
    let mut out = at(level);
    normalise(&mut out);
    out
}

fn ascend(problem: &DualProblem, mut ln_mu: Vec<f64>, opts: &DualOptions) -> AscentRun {
    normalise(&mut ln_mu);
    let mut sols = evaluate(problem, &ln_mu, None);
    let mut value = objective(&sols);
    let mut history = vec![value];
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        if fw_gap(&ln_mu, &sols) <= 0.1 * opts.tol * value {
            break;
        }
        let exponents: Vec<f64> = sols.iter().map(|s| s.ln_slope).collect();
        let gammas: Vec<f64> = sols
            .iter()
            .map(|s| 1.0 / (1.0 - s.elasticity).clamp(1e-6, 1.0))
            .collect();
        let mut tau = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = mirror_step(&ln_mu, &exponents, &gammas, tau);
            let trial_sols = evaluate(problem, &trial, Some(&sols));
            let trial_value = objective(&trial_sols);
            if trial_value >= value {
                ln_mu = trial;
                sols = trial_sols;
                value = trial_value;
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
        history.push(value);
        let w = opts.stall_window;
        if history.len() > w && value - history[history.len() - 1 - w] <= opts.tol * value {
            break;
        }
    }
    AscentRun {
        gap: fw_gap(&ln_mu, &sols),
        objective: value,
        ln_mu,
        sols,
        iterations,
    }
}

fn start_points(problem: &DualProblem, opts: &DualOptions) -> Vec<Vec<f64>> {
    let k = problem.blocks.len();
    let at_one = evaluate(problem, &vec![0.0; k], None);
    let mut starts = vec![vec![0.0; k]];
    starts.push(at_one.iter().map(|s| s.ln_value).collect());
    // Exact for constant exponents: mu_nu proportional to V_nu(1)^{q'}.
    starts.push(
        at_one
            .iter()
            .map(|s| s.ln_value / (1.0 - s.elasticity).clamp(1e-6, 1.0))
            .collect(),
    );
    let streams = Streams::new(problem.instance_seed());
    let mut index = 0;
    while starts.len() < opts.starts.max(1) {
        let mut rng = streams.sample("dual-start", index);
        starts.push((0..k).map(|_| (-(1.0 - rng.random::<f64>()).ln()).ln()).collect());
        index += 1;
    }
    starts.truncate(opts.starts.max(1));
    starts
}

fn solve_ascent(problem: &DualProblem, opts: &DualOptions) -> Result<DualNormResult> {
    problem.ensure_interior_exponents()?;
    let starts = start_points(problem, opts);
    let n_starts = starts.len();
    let mut best: Option<AscentRun> = None;
    let mut iterations = 0;
    for s in starts {
        let run = ascend(problem, s, opts);
        iterations += run.iterations;
        if best.as_ref().is_none_or(|b| run.objective > b.objective) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    let h: Vec<Vec<f64>> = problem
        .blocks
        .iter()
        .zip(best.ln_mu.iter().zip(&best.sols))
        .map(|((_, b), (m, s))| (0..b.idx.len()).map(|j| b.ln_h(j, *m, s.beta).exp()).collect())
        .collect();
    let norm = problem.magnitude_norm(&h, opts.tol * 1e-2)?;
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::NonFinite(0));
    }
    let value = problem.pairing_with_magnitudes(&h) / norm;
    Ok(DualNormResult {
        value,
        maximizer: problem.aligned(&h, 1.0 / norm)?,
        method: Method::Ascent,
        certificate_gap: Some(best.gap / best.objective),
        iterations,
        starts: n_starts,
    })
}

/// Unit vector in the nonnegative orthant from `dim - 1` angles in `[0, pi/2]`.
fn direction(angles: &[f64], out: &mut [f64]) {
    let mut sin_prod = 1.0;
    for (k, a) in angles.iter().enumerate() {
        out[k] = sin_prod * a.cos();
        sin_prod *= a.sin();
    }
    out[angles.len()] = sin_prod;
}

/// Ratio, per-block magnitudes and their norm for one BRUTE direction.
type BruteCandidate = (f64, Vec<Vec<f64>>, f64);

fn solve_brute(problem: &DualProblem, opts: &DualOptions) -> Result<DualNormResult> {
    let dof = problem.dof();
    if dof > BRUTE_DOF_LIMIT {
        return Err(Error::TooLargeForBrute {
            dof,
            limit: BRUTE_DOF_LIMIT,
        });
    }
    for (_, b) in &problem.blocks {
        for &i in &b.idx {
            if problem.p.at(i).is_infinite() || problem.q.at(i).is_infinite() {
                return Err(Error::UnsupportedExponent(format!(
                    "BRUTE needs finite p and q on the support of g (index {i})"
                )));
            }
        }
    }
    let n_angles = dof - 1;
    let mut levels = opts.brute_levels.max(2);
    while levels > 2 && levels.pow(n_angles as u32) > BRUTE_BUDGET {
        levels -= 1;
    }
    let step = std::f64::consts::FRAC_PI_2 / (levels - 1) as f64;
    let total = levels.pow(n_angles as u32);
    let mut d = vec![0.0; dof];
    let split = |d: &[f64]| -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(problem.blocks.len());
        let mut k = 0;
        for (_, b) in &problem.blocks {
            out.push(d[k..k + b.idx.len()].to_vec());
            k += b.idx.len();
        }
        out
    };
    let norm_tol = opts.tol.max(1e-9);
    let mut evaluations = 0;
    let mut eval = |angles: &[f64]| -> Result<Option<BruteCandidate>> {
        evaluations += 1;
        direction(angles, &mut d);
        let h = split(&d);
        let n = problem.magnitude_norm(&h, norm_tol)?;
        if n == 0.0 {
            return Ok(None);
        }
        Ok(Some((problem.pairing_with_magnitudes(&h) / n, h, n)))
    };
    let mut best = (f64::NEG_INFINITY, Vec::new(), 1.0);
    let mut best_angles = vec![0.0; n_angles];
    let mut angles = vec![0.0; n_angles];
    for code in 0..total {
        let mut c = code;
        for a in angles.iter_mut() {
            *a = (c % levels) as f64 * step;
            c /= levels;
        }
        if let Some(cand) = eval(&angles)? {
            if cand.0 > best.0 {
                best = cand;
                best_angles.copy_from_slice(&angles);
            }
        }
    }
    // Polish the best cell: 3^(dof-1) stencil, halving the step when no
    // neighbour improves.
    let mut s = step / 2.0;
    let stencil = 3usize.pow(n_angles as u32);
    while s > 1e-6 {
        let mut moved = false;
        for code in 0..stencil {
            let mut c = code;
            for (a, b) in angles.iter_mut().zip(&best_angles) {
                *a = (b + ((c % 3) as f64 - 1.0) * s).clamp(0.0, std::f64::consts::FRAC_PI_2);
                c /= 3;
            }
            if let Some(cand) = eval(&angles)? {
                if cand.0 > best.0 * (1.0 + 1e-14) {
                    best = cand;
                    best_angles.copy_from_slice(&angles);
                    moved = true;
                }
            }
        }
        if !moved {
            s /= 2.0;
        }
    }
    let (value, h, n) = best;
    let certificate_gap = match solve_ascent(problem, &DualOptions::with_tol(opts.tol)) {
        Ok(a) if a.value > 0.0 => Some((a.value - value).abs() / a.value),
        _ => None,
    };
    Ok(DualNormResult {
        value,
        maximizer: problem.aligned(&h, 1.0 / n)?,
        method: Method::Brute,
        certificate_gap,
        iterations: evaluations,
        starts: 1,
    })
}

/// `||g||'` by the chosen method, relative tolerance `tol`.
pub fn kothe_dual_norm(
    p: &ExponentField,
    q: &ExponentField,
    g: &FuncSequence,
    method: Method,
    tol: f64,
) -> Result<DualNormResult> {
    kothe_dual_norm_with(p, q, g, method, &DualOptions::with_tol(tol))
}

pub fn kothe_dual_norm_with(
    p: &ExponentField,
    q: &ExponentField,
    g: &FuncSequence,
    method: Method,
    opts: &DualOptions,
) -> Result<DualNormResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let problem = DualProblem::new(p, q, g)?;
    if problem.blocks.is_empty() {
        return Ok(DualNormResult {
            value: 0.0,
            maximizer: FuncSequence::zeros(*g.grid(), g.len()),
            method,
            certificate_gap: Some(0.0),
            iterations: 0,
            starts: 0,
        });
    }
    match method {
        Method::Ascent => solve_ascent(&problem, opts),
        Method::Brute => solve_brute(&problem, opts),
    }
}

/// `||g - P_n g||'`.
pub fn dual_tail_norm(
    p: &ExponentField,
    q: &ExponentField,
    g: &FuncSequence,
    n: usize,
    method: Method,
    tol: f64,
) -> Result<f64> {
    Ok(kothe_dual_norm(p, q, &g.tail(n), method, tol)?.value)
}

/// The gradient of `||.||` at `f` (on `|f|`): `grad rho(u) / <grad rho(u), u>`
/// with `u = |f| / ||f||`. It has dual norm 1 and pairs with `|f|` to `||f||`.
pub fn supporting_functional(p: &ExponentField, q: &ExponentField, f: &FuncSequence, tol: f64) -> Result<FuncSequence> {
    let grid = *f.grid();
    let opts = MixedOptions::from_outer(tol);
    let samples = SequenceSamples::new(p, q, f, opts.infinite_q)?;
    let norm = samples.norm(&opts)?.value;
    if norm == 0.0 {
        return Ok(FuncSequence::zeros(grid, f.len()));
    }
    let mu = samples.breakdown(norm, opts.inner_tol)?.per_term;
    let ln_dx = grid.dx().ln();
    let mut terms = Vec::with_capacity(f.len());
    for (term, &m) in f.terms().iter().zip(&mu) {
        if m == 0.0 || term.is_zero() {
            terms.push(GridFunction::zeros(grid));
            continue;
        }
        let ln_m = m.ln();
        let mut ln_num = vec![f64::NEG_INFINITY; grid.len()];
        let mut ln_den = Vec::new();
        for (i, num) in ln_num.iter_mut().enumerate() {
            let u = term.abs_at(i) / norm;
            if u == 0.0 {
                continue;
            }
            let (pi, qi) = match (p.at(i), q.at(i)) {
                (Exponent::Finite(a), Exponent::Finite(b)) => (a, b),
                _ => {
                    return Err(Error::UnsupportedExponent(format!(
                        "supporting functional needs finite p and q (index {i})"
                    )))
                }
            };
            let r = pi / qi;
            *num = pi.ln() + (pi - 1.0) * u.ln() - r * ln_m;
            ln_den.push(ln_dx + r.ln() + pi * u.ln() - (r + 1.0) * ln_m);
        }
        let ln_d = log_sum_exp(ln_den.iter().copied());
        terms.push(GridFunction::new(
            grid,
            ln_num.iter().map(|x| (x - ln_d).exp()).collect(),
        )?);
    }
    // Divide by <grad rho(u), u> = <grad rho(u), |f|> / ||f||.
    let grad = FuncSequence::new(grid, terms)?;
    let z = pairing(&f.abs(), &grad)? / norm;
    Ok(grad.scaled(1.0 / z))
}

/// Outcome of [`norming_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormingReport {
    /// Best `<|f|, g> / ||g||'` found.
    pub sup_pairing: f64,
    pub primal_norm: f64,
    /// `sup_pairing / primal_norm`; `None` when `f = 0`.
    pub ratio: Option<f64>,
    pub zero_case: bool,
    pub dual_evaluations: usize,
    pub iterations: usize,
}

struct Candidate {
    value: f64,
    g: FuncSequence,
    h: FuncSequence,
}

/// `sup { |<f, g>| : ||g||' <= 1 }` by ascent in `g`, compared with `||f||`.
pub fn norming_check(
    p: &ExponentField,
    q: &ExponentField,
    f: &FuncSequence,
    method: Method,
    tol: f64,
) -> Result<NormingReport> {
    let primal_norm = mixed_norm(p, q, f, tol * 1e-2)?.value;
    if primal_norm == 0.0 {
        return Ok(NormingReport {
            sup_pairing: 0.0,
            primal_norm: 0.0,
            ratio: None,
            zero_case: true,
            dual_evaluations: 0,
            iterations: 0,
        });
    }
    let a = f.abs();
    let mut evaluations = 0;
    let mut eval = |g: FuncSequence| -> Result<Option<Candidate>> {
        evaluations += 1;
        let d = kothe_dual_norm(p, q, &g, method, tol * 1e-1)?;
        if d.value == 0.0 {
            return Ok(None);
        }
        Ok(Some(Candidate {
            value: pairing(&a, &g)? / d.value,
            g,
            h: d.maximizer.abs(),
        }))
    };
    let p_minus_one = |i: usize| p.at(i).finite().map_or(1.0, |v| v - 1.0);
    let seeds = [
        supporting_functional(p, q, f, tol * 1e-2)?,
        a.clone(),
        FuncSequence::new(
            *f.grid(),
            a.terms()
                .iter()
                .map(|t| t.map_abs(|i, x| x.powf(p_minus_one(i))))
                .collect(),
        )?,
    ];
    let target = primal_norm * (1.0 - tol);
    let mut best: Option<Candidate> = None;
    for s in seeds {
        if let Some(c) = eval(s)? {
            if best.as_ref().is_none_or(|b| c.value > b.value) {
                best = Some(c);
            }
        }
        if best.as_ref().is_some_and(|b| b.value >= target) {
            break;
        }
    }
    let mut best = best.ok_or(Error::NonFinite(0))?;
    let mut iterations = 0;
    // Danskin: the gradient of <a, g> / ||g||' is proportional to a - J h*.
    while best.value < target && iterations < 50 {
        iterations += 1;
        let dir = a.sub(&best.h.scaled(best.value))?;
        let scale = best.g.terms().iter().map(GridFunction::max_abs).fold(0.0, f64::max)
            / dir
                .terms()
                .iter()
                .map(GridFunction::max_abs)
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE);
        let mut eta = scale;
        let mut improved = false;
        for _ in 0..20 {
            let trial = best
                .g
                .add(&dir.scaled(eta))?
                .terms()
                .iter()
                .map(|t| GridFunction::new(*t.grid(), t.values().iter().map(|v| v.max(0.0)).collect()))
                .collect::<Result<Vec<_>>>()?;
            let trial = FuncSequence::new(*f.grid(), trial)?;
            if let Some(c) = eval(trial)? {
                if c.value > best.value {
                    best = c;
                    improved = true;
                    break;
                }
            }
            eta *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(NormingReport {
        sup_pairing: best.value,
        primal_norm,
        ratio: Some(best.value / primal_norm),
        zero_case: false,
        dual_evaluations: evaluations,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{random_function, FunctionKind, Grid};
    use crate::exponents::{random_log_holder, ExponentClass};
    use crate::mixed::mixed_norm;
    use proptest::prelude::*;

    fn cst(g: Grid, v: f64) -> ExponentField {
        ExponentField::constant(g, Exponent::Finite(v), ExponentClass::P).unwrap()
    }

    fn seq(g: Grid, terms: Vec<GridFunction>) -> FuncSequence {
        FuncSequence::new(g, terms).unwrap()
    }

    /// `(sum_nu ||g_nu||_{p'}^{q'})^{1/q'}` for constant exponents.
    fn conjugate_oracle(g: &FuncSequence, p: f64, q: f64) -> f64 {
        let (pc, qc) = (p / (p - 1.0), q / (q - 1.0));
        let dx = g.grid().dx();
        g.terms()
            .iter()
            .map(|t| {
                let s: f64 = (0..t.len()).map(|i| t.abs_at(i).powf(pc)).sum::<f64>() * dx;
                s.powf(1.0 / pc).powf(qc)
            })
            .sum::<f64>()
            .powf(1.0 / qc)
    }

    #[test]
    fn pairing_examples() {
        let g = Grid::new(2.0, 64).unwrap();
        let one = seq(g, vec![GridFunction::indicator(g, 0.0, 1.0, 1.0)]);
        assert!((pairing(&one, &one).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(pairing(&one, &FuncSequence::zeros(g, 3)).unwrap(), 0.0);
        let other = seq(g, vec![GridFunction::indicator(g, -1.0, 0.0, 5.0)]);
        assert_eq!(pairing(&one, &other).unwrap(), 0.0);
    }

    #[test]
    fn zero_and_hilbert_cases() {
        let g = Grid::new(2.0, 256).unwrap();
        let (p, q) = (cst(g, 2.0), cst(g, 2.0));
        let z = kothe_dual_norm(&p, &q, &FuncSequence::zeros(g, 2), Method::Ascent, 1e-8).unwrap();
        assert_eq!(z.value, 0.0);
        let one = seq(g, vec![GridFunction::indicator(g, 0.0, 1.0, 1.0)]);
        let d = kothe_dual_norm(&p, &q, &one, Method::Ascent, 1e-8).unwrap();
        assert!((d.value - 1.0).abs() < 1e-7, "{}", d.value);
        assert!(mixed_norm(&p, &q, &d.maximizer, 1e-10).unwrap().value <= 1.0 + 1e-6);
    }

    #[test]
    fn constant_exponents_match_the_conjugate_space() {
        let g = Grid::new(2.0, 256).unwrap();
        for (k, (pv, qv)) in [(2.0, 3.0), (3.0, 1.5), (1.5, 4.0), (4.0, 4.0)].into_iter().enumerate() {
            let terms = (0..4)
                .map(|nu| {
                    random_function(g, FunctionKind::Smooth, 1.0 / (1.0 + nu as f64), 10 * k as u64 + nu).unwrap()
                })
                .collect();
            let s = seq(g, terms);
            let d = kothe_dual_norm(&cst(g, pv), &cst(g, qv), &s, Method::Ascent, 1e-9).unwrap();
            let want = conjugate_oracle(&s, pv, qv);
            assert!(
                (d.value - want).abs() / want < 1e-6,
                "p={pv} q={qv}: {} vs {want}",
                d.value
            );
        }
    }

    #[test]
    fn ascent_matches_brute_on_a_tiny_instance() {
        let g = Grid::new(1.0, 8).unwrap();
        let mut v1 = vec![0.0; 8];
        let mut v2 = vec![0.0; 8];
        v1[2] = 1.0;
        v1[5] = -0.5;
        v2[2] = 0.3;
        v2[5] = 2.0;
        let s = seq(
            g,
            vec![GridFunction::new(g, v1).unwrap(), GridFunction::new(g, v2).unwrap()],
        );
        let p =
            ExponentField::from_finite(g, (0..8).map(|i| 2.0 + 0.2 * i as f64).collect(), ExponentClass::P).unwrap();
        let q = cst(g, 2.0);
        let a = kothe_dual_norm(&p, &q, &s, Method::Ascent, 1e-8).unwrap();
        let b = kothe_dual_norm(&p, &q, &s, Method::Brute, 1e-8).unwrap();
        assert!(
            a.value >= b.value * 0.98 && a.value <= b.value * 1.02,
            "{} vs {}",
            a.value,
            b.value
        );
        assert!(b.value <= a.value * (1.0 + 1e-6));
    }

    #[test]
    fn brute_refuses_large_instances() {
        let g = Grid::new(1.0, 8).unwrap();
        let s = seq(g, vec![GridFunction::from_fn(g, |_| 1.0).unwrap()]);
        let r = kothe_dual_norm(&cst(g, 2.0), &cst(g, 2.0), &s, Method::Brute, 1e-8);
        assert!(matches!(r, Err(Error::TooLargeForBrute { dof: 8, limit: 6 })));
    }

    #[test]
    fn not_normable_is_rejected() {
        let g = Grid::new(1.0, 8).unwrap();
        let p = cst(g, 1.2);
        let q =
            ExponentField::from_finite(g, (0..8).map(|i| 1.5 + 0.01 * i as f64).collect(), ExponentClass::P).unwrap();
        let s = seq(g, vec![GridFunction::from_fn(g, |_| 1.0).unwrap()]);
        assert!(matches!(
            kothe_dual_norm(&p, &q, &s, Method::Ascent, 1e-8),
            Err(Error::NotNormable)
        ));
    }

    #[test]
    fn complex_maximizer_is_phase_aligned() {
        let g = Grid::new(1.0, 16).unwrap();
        let v: Vec<Complex64> = (0..16)
            .map(|i| Complex64::from_polar(1.0 + i as f64 * 0.1, i as f64))
            .collect();
        let s = seq(g, vec![GridFunction::from_complex(g, v).unwrap()]);
        let (p, q) = (cst(g, 3.0), cst(g, 2.0));
        let d = kothe_dual_norm(&p, &q, &s, Method::Ascent, 1e-9).unwrap();
        let pr = pairing(&d.maximizer, &s).unwrap();
        assert!((pr - d.value).abs() < 1e-9 * d.value);
    }

    #[test]
    fn supporting_functional_norms_f() {
        let g = Grid::new(2.0, 256).unwrap();
        let lh = random_log_holder(g, 1.5, 3.0, 4, 3).unwrap();
        let q = cst(g, 2.0);
        let f = seq(
            g,
            (0..3)
                .map(|k| random_function(g, FunctionKind::Bump, 1.0, k).unwrap())
                .collect(),
        );
        let s = supporting_functional(&lh.field, &q, &f, 1e-10).unwrap();
        let n = mixed_norm(&lh.field, &q, &f, 1e-10).unwrap().value;
        let pr = pairing(&f.abs(), &s).unwrap();
        assert!((pr - n).abs() < 1e-8 * n, "{pr} vs {n}");
        let d = kothe_dual_norm(&lh.field, &q, &s, Method::Ascent, 1e-9).unwrap().value;
        assert!((d - 1.0).abs() < 1e-6, "{d}");
    }

    #[test]
    fn norming_hilbert_and_zero() {
        let g = Grid::new(2.0, 256).unwrap();
        let (p, q) = (cst(g, 2.0), cst(g, 2.0));
        let f = seq(
            g,
            (0..3)
                .map(|k| random_function(g, FunctionKind::Smooth, 1.0, k).unwrap())
                .collect(),
        );
        let r = norming_check(&p, &q, &f, Method::Ascent, 1e-7).unwrap();
        assert!((r.ratio.unwrap() - 1.0).abs() < 1e-3);
        let z = norming_check(&p, &q, &FuncSequence::zeros(g, 2), Method::Ascent, 1e-7).unwrap();
        assert!(z.zero_case && z.ratio.is_none());
    }

    #[test]
    fn norming_variable_exponents() {
        let g = Grid::new(2.0, 1024).unwrap();
        for seed in 0..4u64 {
            let p = random_log_holder(g, 1.4, 3.5, 4, seed).unwrap().field;
            let q = random_log_holder(g, 1.2, 1.4, 3, seed + 100).unwrap().field;
            let f = seq(
                g,
                (0..8)
                    .map(|k| random_function(g, FunctionKind::Smooth, 0.7f64.powi(k as i32), seed * 31 + k).unwrap())
                    .collect(),
            );
            let r = norming_check(&p, &q, &f, Method::Ascent, 1e-7).unwrap();
            let ratio = r.ratio.unwrap();
            assert!((0.95..=1.0 + 1e-6).contains(&ratio), "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn tail_norms_shrink() {
        let g = Grid::new(2.0, 256).unwrap();
        let lh = random_log_holder(g, 1.5, 3.0, 4, 9).unwrap();
        let q = cst(g, 2.5);
        let s = seq(
            g,
            (0..6)
                .map(|k| random_function(g, FunctionKind::Smooth, 0.3f64.powi(k as i32), k).unwrap())
                .collect(),
        );
        let tails: Vec<f64> = (0..=6)
            .map(|n| dual_tail_norm(&lh.field, &q, &s, n, Method::Ascent, 1e-8).unwrap())
            .collect();
        for w in tails.windows(2) {
            assert!(w[1] <= w[0] * 1.02, "{tails:?}");
        }
        assert_eq!(tails[6], 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn holder_bound(seed in 0u64..10_000, qv in 1.2f64..4.0) {
            let g = Grid::new(2.0, 128).unwrap();
            let p = random_log_holder(g, 1.3, 3.5, 4, seed).unwrap().field;
            let q = cst(g, qv);
            let mk = |s: u64| seq(g, (0..3).map(|k| random_function(g, FunctionKind::Smooth, 1.0, s * 7 + k).unwrap()).collect());
            let (f, h) = (mk(seed), mk(seed + 5_000));
            let d = kothe_dual_norm(&p, &q, &h, Method::Ascent, 1e-8).unwrap().value;
            let n = mixed_norm(&p, &q, &f, 1e-8).unwrap().value;
            prop_assert!(pairing(&f, &h).unwrap().abs() <= n * d * (1.0 + 1e-6));
        }
    }
}
