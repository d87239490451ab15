//! Bracketing and bisection for monotone feasibility predicates.
//!
//! All norms here are infima `inf { lambda > 0 : rho(lambda) <= 1 }` of a
//! non-increasing function `rho`. The predicate `feasible(lambda)` answers
//! `rho(lambda) <= 1`, so the feasible set is an interval `[lambda*, inf)`.

use crate::error::{Error, Result};

/// Maximum number of doublings or halvings while searching for a bracket.
pub const MAX_BRACKET_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    /// Infeasible end (`rho(lo) > 1`), or 0 when every tried value was feasible.
    pub lo: f64,
    /// Feasible end (`rho(hi) <= 1`).
    pub hi: f64,
    pub iterations: usize,
}

impl Bracket {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Outcome of the search before bisection.
enum Search {
    Found {
        lo: f64,
        hi: f64,
        steps: usize,
    },
    /// Feasible down to the smallest tried value.
    FeasibleToZero {
        hi: f64,
        steps: usize,
    },
}

fn search(seed: f64, feasible: &mut impl FnMut(f64) -> bool) -> Result<Search> {
    let mut steps = 0;
    if feasible(seed) {
        let mut hi = seed;
        loop {
            let lo = 0.5 * hi;
            steps += 1;
            if lo == 0.0 || steps > MAX_BRACKET_STEPS {
                return Ok(Search::FeasibleToZero { hi, steps });
            }
            if !feasible(lo) {
                return Ok(Search::Found { lo, hi, steps });
            }
            hi = lo;
        }
    } else {
        let mut lo = seed;
        loop {
            let hi = 2.0 * lo;
            steps += 1;
            if !hi.is_finite() || steps > MAX_BRACKET_STEPS {
                return Err(Error::BracketFailure(MAX_BRACKET_STEPS));
            }
            if feasible(hi) {
                return Ok(Search::Found { lo, hi, steps });
            }
            lo = hi;
        }
    }
}

/// Brackets the infimum starting from `seed`, then bisects until
/// `(hi - lo) / hi <= tol`. A predicate feasible all the way down to the
/// underflow limit yields `lo = 0` with `hi` the last feasible value; the
/// caller decides whether that means "the infimum is 0".
pub fn infimum(seed: f64, tol: f64, mut feasible: impl FnMut(f64) -> bool) -> Result<Bracket> {
    if !(seed > 0.0 && seed.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bisection seed must be positive, got {seed}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let (mut lo, mut hi, mut iterations) = match search(seed, &mut feasible)? {
        Search::Found { lo, hi, steps } => (lo, hi, steps),
        Search::FeasibleToZero { hi, steps } => {
            return Ok(Bracket {
                lo: 0.0,
                hi,
                iterations: steps,
            })
        }
    };
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(Bracket { lo, hi, iterations })
}
