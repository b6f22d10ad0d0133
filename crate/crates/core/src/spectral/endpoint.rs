//! Convergence of `∫_a^{a′} f` for positive `f` that may blow up at `a`.

use alloc::format;
use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quad::integrate;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convergence {
    Convergent,
    Divergent,
}

/// Evidence for a convergence verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct EndpointStudy {
    pub verdict: Convergence,
    /// `∫_{a+ε_k}^{a′} f` at the last refinement.
    pub value: f64,
    /// `(ε_k, ∫_{a+ε_k}^{a′} f)` for `ε_k = (a′ − a) 2^{−k}`.
    pub partials: Vec<(f64, f64)>,
}

const MAX_HALVINGS: usize = 1000;
const STABLE_REL: f64 = 1e-6;
const STABLE_RUNS: usize = 3;
const GROWTH_WINDOW: usize = 40;
const GROWTH_RATIO: f64 = 0.999;
const BLOWUP: f64 = 1e12;

/// Decide whether `∫_a^{a′} f` converges, for `f ≥ 0`.
///
/// The integral over `(a + ε_k, a′)` is refined with `ε_k` halving.  It is
/// convergent when three successive refinements change it by less than
/// `1e−6` relative, and divergent when it exceeds `10^12` times its first
/// value or the added pieces stop shrinking over 40 refinements.
pub fn endpoint_integral(f: impl Fn(f64) -> f64, a: f64, a_prime: f64) -> Result<EndpointStudy> {
    if !(a_prime > a) || !a_prime.is_finite() {
        return Err(Error::Domain(format!("endpoint study needs a < a′, got ({a}, {a_prime})")));
    }
    let len = a_prime - a;
    let mut partials = Vec::new();
    let mut total = 0.0;
    let mut first = 0.0;
    let mut stable = 0;
    let mut pieces: Vec<f64> = Vec::new();
    for k in 0..MAX_HALVINGS {
        let hi = a + len * 0.5f64.powi(k as i32);
        let lo = a + len * 0.5f64.powi(k as i32 + 1);
        if !(lo > a) {
            break;
        }
        let piece = integrate(&f, lo, hi, 0.0, 1e-10)?.value;
        if !piece.is_finite() || piece < 0.0 {
            return Err(Error::InconclusiveNearEndpoint(format!(
                "integrand not finite and non-negative on ({lo:e}, {hi:e})"
            )));
        }
        total += piece;
        partials.push((lo - a, total));
        pieces.push(piece);
        if first == 0.0 {
            first = total;
        }
        if first > 0.0 && total > BLOWUP * first {
            return Ok(EndpointStudy { verdict: Convergence::Divergent, value: total, partials });
        }
        if piece <= STABLE_REL * total {
            stable += 1;
            if stable >= STABLE_RUNS {
                return Ok(EndpointStudy { verdict: Convergence::Convergent, value: total, partials });
            }
        } else {
            stable = 0;
        }
        let n = pieces.len();
        if n > GROWTH_WINDOW
            && pieces[n - 1] > 0.0
            && (n - GROWTH_WINDOW..n).all(|j| pieces[j] >= GROWTH_RATIO * pieces[j - 1])
        {
            return Ok(EndpointStudy { verdict: Convergence::Divergent, value: total, partials });
        }
        if total == 0.0 && k >= 60 {
            return Ok(EndpointStudy { verdict: Convergence::Convergent, value: 0.0, partials });
        }
    }
    Err(Error::InconclusiveNearEndpoint(format!(
        "integral {total:e} still changing after {} refinements",
        partials.len()
    )))
}
