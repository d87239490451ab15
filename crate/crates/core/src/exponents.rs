//! Variable exponents `p(.)`, their bounds, conjugates and admissibility checks.

use std::f64::consts::E;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::rng;

/// An exponent value: a finite real or the dedicated infinity sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(v) => Some(v),
            Exponent::Infinite => None,
        }
    }

    /// `1/p`, with `1/inf = 0`.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(v) => 1.0 / v,
            Exponent::Infinite => 0.0,
        }
    }

    /// Maps the sentinel to `f64::INFINITY`, for comparisons only.
    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(v) => v,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    pub fn max(self, other: Exponent) -> Exponent {
        if self.as_f64() >= other.as_f64() {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Exponent) -> Exponent {
        if self.as_f64() <= other.as_f64() {
            self
        } else {
            other
        }
    }
}

impl From<f64> for Exponent {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            Exponent::Infinite
        } else {
            Exponent::Finite(v)
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(v) => s.serialize_f64(*v),
            Exponent::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v.is_finite() => Ok(Exponent::Finite(v)),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("non-finite exponent {v}"))),
            Raw::Str(s) if s == "inf" => Ok(Exponent::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "exponent must be a number or \"inf\", got {s:?}"
            ))),
        }
    }
}

/// Admissible range of an exponent field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExponentClass {
    /// Values in `[floor, inf]` with `floor > 0`.
    P0 { floor: f64 },
    /// Values in `[1, inf]`.
    P,
    /// Finite real values of either sign (smoothness indices `s(.)`).
    Real,
}

impl ExponentClass {
    fn floor(self) -> f64 {
        match self {
            ExponentClass::P0 { floor } => floor,
            ExponentClass::P => 1.0,
            ExponentClass::Real => f64::NEG_INFINITY,
        }
    }
}

/// How to build an exponent field; the JSON form is tagged by `"kind"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExponentSpec {
    Constant {
        value: Exponent,
    },
    /// `a + b x` on the closed interval `on` (whole grid when absent), `outside`
    /// elsewhere, then clipped into `[min, max]` when given.
    Affine {
        a: f64,
        b: f64,
        #[serde(default)]
        on: Option<[f64; 2]>,
        #[serde(default)]
        outside: Option<Exponent>,
        #[serde(default)]
        min: Option<f64>,
        #[serde(default)]
        max: Option<f64>,
    },
    Table {
        values: Vec<Exponent>,
    },
    Random {
        lo: f64,
        hi: f64,
        bandwidth: usize,
        seed: u64,
    },
}

/// A variable exponent sampled on a grid, with cached bounds and the `Omega_inf` mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentField {
    grid: Grid,
    values: Vec<Exponent>,
    class: ExponentClass,
    p_minus: Exponent,
    p_plus: Exponent,
    omega_inf: Vec<bool>,
}

impl ExponentField {
    pub fn new(grid: Grid, values: Vec<Exponent>, class: ExponentClass) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} exponent values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let ExponentClass::P0 { floor } = class {
            if !(floor > 0.0) {
                return Err(Error::BadBounds(format!(
                    "class P0 needs a positive floor, got {floor}"
                )));
            }
        }
        let floor = class.floor();
        for (index, v) in values.iter().enumerate() {
            match *v {
                Exponent::Finite(x) if !x.is_finite() => return Err(Error::NonFinite(index)),
                Exponent::Finite(x) if x < floor => return Err(Error::SpecOutOfRange { index, value: x, floor }),
                Exponent::Infinite if class == ExponentClass::Real => {
                    return Err(Error::SpecOutOfRange {
                        index,
                        value: f64::INFINITY,
                        floor,
                    })
                }
                _ => {}
            }
        }
        let p_minus = values.iter().copied().fold(Exponent::Infinite, Exponent::min);
        let p_plus = values
            .iter()
            .copied()
            .fold(Exponent::Finite(f64::NEG_INFINITY), Exponent::max);
        let omega_inf = values.iter().map(|v| v.is_infinite()).collect();
        Ok(Self {
            grid,
            values,
            class,
            p_minus,
            p_plus,
            omega_inf,
        })
    }

    pub fn constant(grid: Grid, value: Exponent, class: ExponentClass) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()], class)
    }

    pub fn from_finite(grid: Grid, values: Vec<f64>, class: ExponentClass) -> Result<Self> {
        Self::new(grid, values.into_iter().map(Exponent::Finite).collect(), class)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Exponent] {
        &self.values
    }

    #[inline]
    pub fn at(&self, i: usize) -> Exponent {
        self.values[i]
    }

    pub fn class(&self) -> ExponentClass {
        self.class
    }

    pub fn p_minus(&self) -> Exponent {
        self.p_minus
    }

    pub fn p_plus(&self) -> Exponent {
        self.p_plus
    }

    pub fn omega_inf_mask(&self) -> &[bool] {
        &self.omega_inf
    }

    pub fn has_infinite(&self) -> bool {
        self.p_plus.is_infinite()
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    /// Finite values as plain floats; `None` when `Omega_inf` is nonempty.
    pub fn finite_values(&self) -> Option<Vec<f64>> {
        self.values.iter().map(|v| v.finite()).collect()
    }

    pub fn in_class_p(&self) -> bool {
        self.p_minus.as_f64() >= 1.0
    }

    pub(crate) fn ensure_class_p(&self) -> Result<()> {
        match self.values.iter().position(|v| v.as_f64() < 1.0) {
            Some(index) => Err(Error::NotInClassP {
                index,
                value: self.values[index].as_f64(),
            }),
            None => Ok(()),
        }
    }
}

/// Builds an exponent field from a spec and validates it against `class`.
pub fn make_exponent_field(grid: Grid, spec: &ExponentSpec, class: ExponentClass) -> Result<ExponentField> {
    let values = match spec {
        ExponentSpec::Constant { value } => vec![*value; grid.len()],
        ExponentSpec::Affine {
            a,
            b,
            on,
            outside,
            min,
            max,
        } => grid
            .points()
            .map(|x| {
                let inside = on.is_none_or(|[lo, hi]| x >= lo && x <= hi);
                let v = if inside {
                    Exponent::Finite(a + b * x)
                } else {
                    outside.unwrap_or(Exponent::Finite(a + b * x))
                };
                match v {
                    Exponent::Finite(mut y) => {
                        if let Some(m) = min {
                            y = y.max(*m);
                        }
                        if let Some(m) = max {
                            y = y.min(*m);
                        }
                        Exponent::Finite(y)
                    }
                    Exponent::Infinite => Exponent::Infinite,
                }
            })
            .collect(),
        ExponentSpec::Table { values } => values.clone(),
        ExponentSpec::Random {
            lo,
            hi,
            bandwidth,
            seed,
        } => {
            let generated = random_log_holder(grid, *lo, *hi, *bandwidth, *seed)?;
            if class == generated.field.class {
                return Ok(generated.field);
            }
            generated.field.values
        }
    };
    ExponentField::new(grid, values, class)
}

/// Pointwise conjugate exponent `p'` with `1/p + 1/p' = 1`.
pub fn conjugate(p: &ExponentField) -> Result<ExponentField> {
    p.ensure_class_p()?;
    let values = p
        .values
        .iter()
        .map(|v| match *v {
            Exponent::Infinite => Exponent::Finite(1.0),
            Exponent::Finite(1.0) => Exponent::Infinite,
            Exponent::Finite(x) => Exponent::Finite(x / (x - 1.0)),
        })
        .collect();
    ExponentField::new(p.grid, values, ExponentClass::P)
}

/// Which of the three normability conditions holds (first one wins).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionTag {
    #[serde(rename = "COND1")]
    Cond1,
    #[serde(rename = "COND2")]
    Cond2,
    #[serde(rename = "COND3")]
    Cond3,
    #[serde(rename = "NONE")]
    None,
}

impl fmt::Display for ConditionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionTag::Cond1 => "COND1",
            ConditionTag::Cond2 => "COND2",
            ConditionTag::Cond3 => "COND3",
            ConditionTag::None => "NONE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormabilityCondition {
    pub tag: ConditionTag,
    pub witness: String,
}

impl NormabilityCondition {
    pub fn is_normable(&self) -> bool {
        self.tag != ConditionTag::None
    }
}

/// Slack allowed in `1/p + 1/q <= 1` for rounding in the reciprocals.
const COND3_SLACK: f64 = 1e-12;

/// Reports the first normability condition that holds at every grid point:
/// COND1 `1 <= q <= p`, COND2 `p_- >= 1` with `q` constant, COND3
/// `1/p + 1/q <= 1`.
pub fn check_normability(p: &ExponentField, q: &ExponentField) -> Result<NormabilityCondition> {
    p.grid.ensure_same(&q.grid)?;
    p.ensure_class_p()?;
    q.ensure_class_p()?;
    let n = p.values.len();
    let first_fail_1 = (0..n).find(|&i| q.at(i).as_f64() > p.at(i).as_f64());
    if first_fail_1.is_none() {
        return Ok(NormabilityCondition {
            tag: ConditionTag::Cond1,
            witness: format!("1 <= q(x) <= p(x) at all {n} grid points"),
        });
    }
    if p.p_minus.as_f64() >= 1.0 && q.is_constant() {
        return Ok(NormabilityCondition {
            tag: ConditionTag::Cond2,
            witness: format!("p_- = {} >= 1 and q is constant {}", p.p_minus, q.at(0)),
        });
    }
    let first_fail_3 = (0..n).find(|&i| p.at(i).recip() + q.at(i).recip() > 1.0 + COND3_SLACK);
    match first_fail_3 {
        None => Ok(NormabilityCondition {
            tag: ConditionTag::Cond3,
            witness: format!("1/p(x) + 1/q(x) <= 1 at all {n} grid points"),
        }),
        Some(j) => {
            let i = first_fail_1.unwrap_or(0);
            let x = p.grid.point(i);
            let y = p.grid.point(j);
            Ok(NormabilityCondition {
                tag: ConditionTag::None,
                witness: format!(
                    "q > p at x = {x} (q = {}, p = {}); q not constant; 1/p + 1/q > 1 at x = {y}",
                    q.at(i),
                    p.at(i)
                ),
            })
        }
    }
}

/// Exhaustive pairwise checking up to this many grid points, sampling above.
pub const LOG_HOLDER_EXACT_LIMIT: usize = 4096;
/// Number of random pairs checked above [`LOG_HOLDER_EXACT_LIMIT`] (adjacent pairs are always checked).
pub const LOG_HOLDER_PAIR_SAMPLES: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub passed: bool,
    /// Grid index with the smallest decay margin `c/log(e+|x|) - |p(x) - p_inf|`.
    pub worst_decay_index: usize,
    pub worst_decay_margin: f64,
    /// Pair with the smallest local margin `c/log(e + 1/|x-y|) - |p(x) - p(y)|`.
    pub worst_pair: (usize, usize),
    pub worst_pair_margin: f64,
    pub pairs_checked: usize,
    pub exhaustive: bool,
}

/// Checks the decay and local log-Hölder conditions with constant `c` on the grid.
pub fn check_log_holder(p: &ExponentField, c: f64, p_infinity: f64) -> CheckReport {
    let grid = p.grid;
    let n = grid.len();
    let val = |i: usize| p.at(i).as_f64();

    let mut worst_decay = (0, f64::INFINITY);
    for i in 0..n {
        let x = grid.point(i);
        let margin = c / (E + x.abs()).ln() - (val(i) - p_infinity).abs();
        let margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        if margin < worst_decay.1 {
            worst_decay = (i, margin);
        }
    }

    let mut worst_pair = ((0, 0), f64::INFINITY);
    let mut pairs = 0usize;
    let mut visit = |i: usize, j: usize| {
        let d = (grid.point(i) - grid.point(j)).abs();
        let bound = c / (E + 1.0 / d).ln();
        let diff = (val(i) - val(j)).abs();
        let margin = if diff.is_nan() { f64::NEG_INFINITY } else { bound - diff };
        pairs += 1;
        if margin < worst_pair.1 {
            worst_pair = ((i, j), margin);
        }
    };
    let exhaustive = n <= LOG_HOLDER_EXACT_LIMIT;
    if exhaustive {
        for i in 0..n {
            for j in (i + 1)..n {
                visit(i, j);
            }
        }
    } else {
        for i in 0..n - 1 {
            visit(i, i + 1);
        }
        let mut rng = rng::seeded(0x10_9401);
        for _ in 0..LOG_HOLDER_PAIR_SAMPLES {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i != j {
                visit(i.min(j), i.max(j));
            }
        }
    }
    CheckReport {
        passed: worst_decay.1 >= 0.0 && worst_pair.1 >= 0.0,
        worst_decay_index: worst_decay.0,
        worst_decay_margin: worst_decay.1,
        worst_pair: worst_pair.0,
        worst_pair_margin: worst_pair.1,
        pairs_checked: pairs,
        exhaustive,
    }
}

/// A generated exponent together with the log-Hölder constant it satisfies.
#[derive(Debug, Clone, PartialEq)]
pub struct LogHolderField {
    pub field: ExponentField,
    /// Constant `c` for both the decay and the local condition.
    pub constant: f64,
    /// Limit value `p_inf` used in the decay condition.
    pub p_infinity: f64,
}

/// `C^inf` step, 0 for `t <= 0` and 1 for `t >= 1`.
fn smooth_step(t: f64) -> f64 {
    let h = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        h(t) / (h(t) + h(1.0 - t))
    }
}

/// Smallest `c` such that the sampled field satisfies both log-Hölder
/// conditions around `p_infinity`, from its measured Lipschitz modulus and range.
///
/// For a discrete field with adjacent slope at most `K` and range `R`,
/// `|p(x) - p(y)| <= min(K t, R)` with `t = |x - y|`, and
/// `sup_t min(K t, R) log(e + 1/t) = R log(e + K/R)`.
pub fn implied_log_holder_constant(p: &ExponentField, p_infinity: f64) -> Option<f64> {
    let v = p.finite_values()?;
    let grid = p.grid;
    let lip = v
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / grid.dx())
        .fold(0.0, f64::max);
    let range = v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min);
    let local = if range > 0.0 {
        range * (E + lip / range).ln()
    } else {
        0.0
    };
    let decay = v
        .iter()
        .enumerate()
        .map(|(i, &pi)| (pi - p_infinity).abs() * (E + grid.point(i).abs()).ln())
        .fold(0.0, f64::max);
    Some((local.max(decay) * (1.0 + 1e-9)).max(1e-12))
}

/// Smooth random exponent with values in `[lo, hi]`, constant `(lo + hi)/2`
/// outside `[-L/2, L/2]`.
pub fn random_log_holder(grid: Grid, lo: f64, hi: f64, bandwidth: usize, seed: u64) -> Result<LogHolderField> {
    if !(lo > 1.0 && lo < hi && hi.is_finite()) {
        return Err(Error::BadBounds(format!(
            "need 1 < lo < hi < inf, got lo = {lo}, hi = {hi}"
        )));
    }
    if bandwidth == 0 {
        return Err(Error::BadBounds("bandwidth must be at least 1".into()));
    }
    let mut rng = rng::seeded(seed);
    let l = grid.half_length();
    let modes: Vec<(f64, f64)> = (0..bandwidth)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let raw: Vec<f64> = grid
        .points()
        .map(|x| {
            modes
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let w = std::f64::consts::PI * (k + 1) as f64 * x / l;
                    a * w.cos() + b * w.sin()
                })
                .sum()
        })
        .collect();
    let rmin = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let rmax = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (rmax - rmin).max(f64::MIN_POSITIVE);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let values: Vec<f64> = grid
        .points()
        .zip(&raw)
        .map(|(x, r)| {
            let unit = 2.0 * (r - rmin) / span - 1.0;
            let blend = 1.0 - smooth_step((x.abs() - 0.25 * l) / (0.25 * l));
            (mid + half * blend * unit).clamp(lo, hi)
        })
        .collect();
    let field = ExponentField::from_finite(grid, values, ExponentClass::P)?;
    let constant = implied_log_holder_constant(&field, mid).expect("finite field");
    Ok(LogHolderField {
        field,
        constant,
        p_infinity: mid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> Grid {
        Grid::new(2.0, 1024).unwrap()
    }

    #[test]
    fn constant_field_bounds() {
        let p = make_exponent_field(
            grid(),
            &ExponentSpec::Constant {
                value: Exponent::Finite(2.0),
            },
            ExponentClass::P,
        )
        .unwrap();
        assert_eq!(p.p_minus(), Exponent::Finite(2.0));
        assert_eq!(p.p_plus(), Exponent::Finite(2.0));
        assert!(p.omega_inf_mask().iter().all(|m| !m));
    }

    #[test]
    fn affine_on_unit_interval() {
        let spec = ExponentSpec::Affine {
            a: 2.0,
            b: 1.0,
            on: Some([0.0, 1.0]),
            outside: Some(Exponent::Finite(2.0)),
            min: None,
            max: None,
        };
        let p = make_exponent_field(grid(), &spec, ExponentClass::P).unwrap();
        assert_eq!(p.p_minus(), Exponent::Finite(2.0));
        assert_eq!(p.p_plus(), Exponent::Finite(3.0));
    }

    #[test]
    fn table_with_one_infinity() {
        let g = Grid::new(1.0, 8).unwrap();
        let mut values = vec![Exponent::Finite(2.0); 8];
        values[5] = Exponent::Infinite;
        let p = make_exponent_field(g, &ExponentSpec::Table { values }, ExponentClass::P).unwrap();
        assert_eq!(p.omega_inf_mask().iter().filter(|m| **m).count(), 1);
        assert!(p.omega_inf_mask()[5]);
        assert_eq!(p.p_plus(), Exponent::Infinite);
    }

    #[test]
    fn spec_errors() {
        let g = Grid::new(1.0, 8).unwrap();
        let low = ExponentSpec::Constant {
            value: Exponent::Finite(0.5),
        };
        assert!(matches!(
            make_exponent_field(g, &low, ExponentClass::P),
            Err(Error::SpecOutOfRange { .. })
        ));
        assert!(make_exponent_field(g, &low, ExponentClass::P0 { floor: 0.25 }).is_ok());
        let short = ExponentSpec::Table {
            values: vec![Exponent::Finite(2.0); 7],
        };
        assert!(matches!(
            make_exponent_field(g, &short, ExponentClass::P),
            Err(Error::GridMismatch(_))
        ));
        let inf_s = ExponentSpec::Constant {
            value: Exponent::Infinite,
        };
        assert!(make_exponent_field(g, &inf_s, ExponentClass::Real).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let json = r#"{"kind": "table", "values": [2, "inf", 1.5]}"#;
        let spec: ExponentSpec = serde_json::from_str(json).unwrap();
        assert_eq!(
            spec,
            ExponentSpec::Table {
                values: vec![Exponent::Finite(2.0), Exponent::Infinite, Exponent::Finite(1.5)]
            }
        );
        let back: ExponentSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        assert!(serde_json::from_str::<ExponentSpec>(r#"{"kind": "constant", "value": "infinity"}"#).is_err());
    }

    #[test]
    fn conjugate_examples() {
        let g = grid();
        let two = ExponentField::constant(g, Exponent::Finite(2.0), ExponentClass::P).unwrap();
        assert_eq!(conjugate(&two).unwrap(), two);
        let one = ExponentField::constant(g, Exponent::Finite(1.0), ExponentClass::P).unwrap();
        assert!(conjugate(&one).unwrap().values().iter().all(|v| v.is_infinite()));
        let inf = ExponentField::constant(g, Exponent::Infinite, ExponentClass::P).unwrap();
        assert!(conjugate(&inf)
            .unwrap()
            .values()
            .iter()
            .all(|v| *v == Exponent::Finite(1.0)));
        let spec = ExponentSpec::Affine {
            a: 2.0,
            b: 1.0,
            on: Some([0.0, 1.0]),
            outside: Some(Exponent::Finite(2.0)),
            min: None,
            max: None,
        };
        let p = make_exponent_field(g, &spec, ExponentClass::P).unwrap();
        let idx = g.points().position(|x| x == 1.0).unwrap();
        assert_eq!(conjugate(&p).unwrap().at(idx), Exponent::Finite(1.5));
        let p0 = ExponentField::constant(g, Exponent::Finite(0.5), ExponentClass::P0 { floor: 0.5 }).unwrap();
        assert!(matches!(conjugate(&p0), Err(Error::NotInClassP { .. })));
    }

    #[test]
    fn normability_examples() {
        let g = grid();
        let c = |v: f64| ExponentField::constant(g, Exponent::Finite(v), ExponentClass::P).unwrap();
        assert_eq!(check_normability(&c(3.0), &c(2.0)).unwrap().tag, ConditionTag::Cond1);
        assert_eq!(check_normability(&c(3.0), &c(3.0)).unwrap().tag, ConditionTag::Cond1);
        let p =
            ExponentField::from_finite(g, g.points().map(|x| 2.0 + x.sin().abs()).collect(), ExponentClass::P).unwrap();
        assert_eq!(check_normability(&p, &c(2.0)).unwrap().tag, ConditionTag::Cond1);
        assert_eq!(check_normability(&p, &c(2.5)).unwrap().tag, ConditionTag::Cond2);
        // q > p somewhere, q variable, 1/p + 1/q <= 1 everywhere.
        let q = ExponentField::from_finite(g, g.points().map(|x| 3.0 + x.cos()).collect(), ExponentClass::P).unwrap();
        assert_eq!(check_normability(&c(2.0), &q).unwrap().tag, ConditionTag::Cond3);
        let q_bad =
            ExponentField::from_finite(g, g.points().map(|x| 1.5 + 0.1 * x.cos()).collect(), ExponentClass::P).unwrap();
        let r = check_normability(&c(1.2), &q_bad).unwrap();
        assert_eq!(r.tag, ConditionTag::None);
        assert!(!r.witness.is_empty());
    }

    #[test]
    fn log_holder_constant_field_passes() {
        let p = ExponentField::constant(grid(), Exponent::Finite(2.5), ExponentClass::P).unwrap();
        let r = check_log_holder(&p, 0.1, 2.5);
        assert!(r.passed);
        assert!(r.worst_pair_margin > 0.0 && r.worst_decay_margin > 0.0);
    }

    #[test]
    fn log_holder_jump_fails_at_the_jump() {
        let g = Grid::new(2.0, 256).unwrap();
        let values = (0..256).map(|i| if i < 128 { 2.0 } else { 3.0 }).collect();
        let p = ExponentField::from_finite(g, values, ExponentClass::P).unwrap();
        let r = check_log_holder(&p, 1.0, 2.5);
        assert!(!r.passed);
        assert_eq!(r.worst_pair, (127, 128));
        assert!(r.worst_pair_margin < 0.0);
    }

    #[test]
    fn log_holder_subsamples_large_grids() {
        let g = Grid::new(2.0, 8192).unwrap();
        let p = random_log_holder(g, 1.5, 3.0, 4, 7).unwrap();
        let r = check_log_holder(&p.field, p.constant, p.p_infinity);
        assert!(!r.exhaustive);
        assert!(r.passed);
    }

    #[test]
    fn random_log_holder_contract() {
        let g = grid();
        let a = random_log_holder(g, 1.5, 3.0, 4, 7).unwrap();
        assert!(a.field.p_minus().as_f64() >= 1.5);
        assert!(a.field.p_plus().as_f64() <= 3.0);
        assert_eq!(a, random_log_holder(g, 1.5, 3.0, 4, 7).unwrap());
        let r = check_log_holder(&a.field, a.constant, a.p_infinity);
        assert!(r.passed, "{r:?}");
        // Constant near the boundary.
        assert_eq!(a.field.at(0), Exponent::Finite(2.25));
        assert!(matches!(random_log_holder(g, 1.0, 3.0, 4, 7), Err(Error::BadBounds(_))));
        assert!(matches!(random_log_holder(g, 3.0, 2.0, 4, 7), Err(Error::BadBounds(_))));
    }

    #[test]
    fn implied_constant_is_tight_against_a_smaller_one() {
        let g = Grid::new(2.0, 512).unwrap();
        let a = random_log_holder(g, 1.5, 3.0, 6, 3).unwrap();
        // Halving the declared constant must break at least one condition.
        let r = check_log_holder(&a.field, 0.5 * a.constant, a.p_infinity);
        assert!(!r.passed);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn conjugate_is_an_involution(seed in 0u64..10_000, bw in 1usize..8) {
            let g = Grid::new(2.0, 128).unwrap();
            let p = random_log_holder(g, 1.1, 6.0, bw, seed).unwrap().field;
            let pp = conjugate(&conjugate(&p).unwrap()).unwrap();
            let p1 = conjugate(&p).unwrap();
            for i in 0..g.len() {
                let (a, b) = (p.at(i).as_f64(), pp.at(i).as_f64());
                prop_assert!((a - b).abs() <= 1e-12 * a);
                prop_assert!((p.at(i).recip() + p1.at(i).recip() - 1.0).abs() <= 1e-12);
            }
        }

        #[test]
        fn random_field_passes_its_own_constant(seed in 0u64..10_000, bw in 1usize..10) {
            let g = Grid::new(2.0, 256).unwrap();
            let a = random_log_holder(g, 1.2, 4.0, bw, seed).unwrap();
            prop_assert!(check_log_holder(&a.field, a.constant, a.p_infinity).passed);
        }

        #[test]
        fn normability_is_total(seed in 0u64..10_000) {
            let g = Grid::new(2.0, 64).unwrap();
            let p = random_log_holder(g, 1.1, 4.0, 3, seed).unwrap().field;
            let q = random_log_holder(g, 1.1, 4.0, 3, seed + 1).unwrap().field;
            prop_assert!(check_normability(&p, &q).is_ok());
        }
    }
}
