//! Regularly varying comparison functions.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quad::integrate;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A positive function `g` on `(0, ∞)`, regularly varying at `∞` with a
/// declared index `α`: `g(λr)/g(r) → λ^α`.
#[derive(Clone)]
pub struct RegVarFunction {
    g: RealFn,
    index: f64,
    /// `g = c r^α` exactly.
    power: Option<f64>,
    g_star: Option<RealFn>,
}

impl fmt::Debug for RegVarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RegVarFunction")
            .field("index", &self.index)
            .field("power_coefficient", &self.power)
            .finish_non_exhaustive()
    }
}

impl RegVarFunction {
    /// `g(r) = r^α`.
    pub fn power(alpha: f64) -> Self {
        Self::scaled_power(1.0, alpha)
    }

    /// `g(r) = c r^α`.
    pub fn scaled_power(c: f64, alpha: f64) -> Self {
        RegVarFunction { g: Arc::new(move |r: f64| c * r.powf(alpha)), index: alpha, power: Some(c), g_star: None }
    }

    pub fn new(index: f64, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RegVarFunction { g: Arc::new(g), index, power: None, g_star: None }
    }

    /// Supply `g_⋆(r) = ∫₁^r t/g(t) dt` in closed form.
    pub fn with_g_star(mut self, gs: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.g_star = Some(Arc::new(gs));
        self
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.g)(r)
    }

    pub fn index(&self) -> f64 {
        self.index
    }

    /// `Some(c)` when `g = c r^α` exactly.
    pub fn power_coefficient(&self) -> Option<f64> {
        self.power
    }

    /// Check `g(λr)/g(r) ≈ λ^α` for `λ ∈ {2, 5}` at `r = 10^6, 10^7, 10^8`
    /// within 10%.
    pub fn validate(&self) -> Result<()> {
        for k in 6..=8 {
            let r = 10f64.powi(k);
            let gr = self.eval(r);
            if !(gr > 0.0 && gr.is_finite()) {
                return Err(Error::InvalidInput(format!("g({r:e}) = {gr} is not positive")));
            }
            for lam in [2.0f64, 5.0] {
                let ratio = self.eval(lam * r) / gr;
                let want = lam.powf(self.index);
                if !((ratio / want - 1.0).abs() <= 0.1) {
                    return Err(Error::InvalidInput(format!(
                        "g({lam}r)/g(r) = {ratio} at r = {r:e}, index {} predicts {want}",
                        self.index
                    )));
                }
            }
        }
        Ok(())
    }

    /// `g_⋆(r) = ∫₁^r t/g(t) dt` for `r ≥ 1`.
    pub fn g_star(&self, r: f64) -> Result<f64> {
        if !(r >= 1.0) {
            return Err(Error::Domain(format!("g_star needs r >= 1, got {r}")));
        }
        if let Some(gs) = &self.g_star {
            return Ok(gs(r));
        }
        if let Some(c) = self.power {
            let e = 2.0 - self.index;
            return Ok(if e.abs() < 1e-15 { r.ln() / c } else { (r.powf(e) - 1.0) / (e * c) });
        }
        // Integrate in log r so long ranges stay well resolved.
        let f = |u: f64| {
            let t = u.exp();
            t * t / self.eval(t)
        };
        let lr = r.ln();
        let mut total = 0.0;
        let n = (lr.ceil() as usize).max(1);
        for k in 0..n {
            let (u0, u1) = (lr * k as f64 / n as f64, lr * (k + 1) as f64 / n as f64);
            total += integrate(f, u0, u1, 0.0, 1e-12)?.value;
        }
        Ok(total)
    }
}

/// Result of [`karamata_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct KaramataReport {
    pub delta: f64,
    /// `|δ + α + 1|`, the predicted limit.
    pub expected: f64,
    /// Whether the tail integral `∫_x^∞` was used (`δ + α + 1 < 0`).
    pub tail: bool,
    /// `(x, ratio)` at `x = 10^2, 10^3, …, 10^60`.
    pub ratios: Vec<(f64, f64)>,
    pub pass: bool,
}

/// Check the Karamata limits: `x^{δ+1} g(x) / ∫₁^x t^δ g → δ+α+1` when
/// `δ+α+1 ≥ 0`, and `x^{δ+1} g(x) / ∫_x^∞ t^δ g → −(δ+α+1)` otherwise.
///
/// Slowly varying corrections decay like `1/log x`, so the grid runs to
/// `x = 10^60`; the check passes when the last ratio is within 1%.
pub fn karamata_check(g: &RegVarFunction, delta: f64) -> Result<KaramataReport> {
    let e = delta + g.index() + 1.0;
    let tail = e < 0.0;
    let f = |u: f64| {
        let t = u.exp();
        t.powf(delta + 1.0) * g.eval(t)
    };
    let mut ratios = Vec::new();
    let mut acc = 0.0;
    let mut u_prev = 0.0;
    for k in 1..=120 {
        let x = 10f64.powf(0.5 * k as f64);
        let u = x.ln();
        let denom = if tail {
            // The tail integrand decays; overflow far out means 0 · ∞.
            let tail_f = |v: f64| {
                let y = f(u + v);
                if y.is_finite() { y } else { 0.0 }
            };
            crate::quad::integrate_to_infinity(tail_f, 0.0, 0.0, 1e-12)?.value
        } else {
            acc += integrate(f, u_prev, u, 0.0, 1e-12)?.value;
            u_prev = u;
            acc
        };
        if k >= 4 && k % 2 == 0 {
            ratios.push((x, x.powf(delta + 1.0) * g.eval(x) / denom));
        }
    }
    let expected = e.abs();
    let last = ratios.last().unwrap().1;
    let pass = if expected > 0.0 { (last / expected - 1.0).abs() <= 0.01 } else { last.abs() <= 0.01 };
    Ok(KaramataReport { delta, expected, tail, ratios, pass })
}

/// Result of [`regvar_index_estimate`].
#[derive(Clone, Debug, PartialEq)]
pub struct IndexEstimate {
    /// Least-squares slope of `log g` against `log r` over the top decade.
    pub index: f64,
    /// `r^{α−0.1} ≲ g ≲ r^{α+0.1}` across the sampled range: the spread of
    /// `log(g r^{−α})` is at most `0.1·log(r_max/r_min)` plus `log 10`.
    pub potter_ok: bool,
    /// For `α > 0`: `sup_{s≤r} g(s) / g(r)` at the largest sample.
    pub running_max_ratio: Option<f64>,
}

/// Estimate the index of regular variation from samples on a geometric
/// grid (at least 10).
pub fn regvar_index_estimate(samples: &[(f64, f64)]) -> Result<IndexEstimate> {
    if samples.len() < 10 {
        return Err(Error::InsufficientSamples { got: samples.len(), need: 10 });
    }
    let mut s: Vec<(f64, f64)> = samples.to_vec();
    s.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    for &(r, g) in &s {
        if !(r > 0.0 && g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidInput(format!("sample ({r}, {g}) not positive")));
        }
    }
    let r_max = s.last().unwrap().0;
    let mut top: Vec<(f64, f64)> =
        s.iter().filter(|(r, _)| *r >= r_max / 10.0).map(|&(r, g)| (r.ln(), g.ln())).collect();
    if top.len() < 2 {
        top = s.iter().rev().take(2).map(|&(r, g)| (r.ln(), g.ln())).collect();
    }
    let n = top.len() as f64;
    let mx = top.iter().map(|p| p.0).sum::<f64>() / n;
    let my = top.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = top.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = top.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let index = if sxx > 0.0 { sxy / sxx } else { 0.0 };

    let resid: Vec<f64> = s.iter().map(|&(r, g)| g.ln() - index * r.ln()).collect();
    let spread = resid.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - resid.iter().cloned().fold(f64::INFINITY, f64::min);
    let span = (r_max / s[0].0).ln();
    let potter_ok = spread <= 0.1 * span + 10f64.ln();

    let running_max_ratio = if index > 0.0 {
        let gmax = s.iter().map(|p| p.1).fold(0.0, f64::max);
        Some(gmax / s.last().unwrap().1)
    } else {
        None
    };
    Ok(IndexEstimate { index, potter_ok, running_max_ratio })
}
