//! Abelian–Tauberian comparisons between `P_μ(ir)` and `↔μ(r)`.

use alloc::vec::Vec;
use num_traits::Float;

use super::endpoint::{endpoint_integral, EndpointStudy};
use super::measure::SyntheticMeasure;
use super::regvar::RegVarFunction;
use crate::error::Result;
use crate::linalg::C64;
use crate::quad::beta;

/// Grid for limsups as `r → ∞`: 400 geometric points on `[1, 10^8]`,
/// maximum over `[10^6, 10^8]`.
pub const R_GRID_POINTS: usize = 400;
pub const R_GRID_DECADES: f64 = 8.0;
pub const R_WINDOW_DECADES: f64 = 2.0;

/// Equalities are accepted up to this relative slack.
const EQUALITY_REL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct TauberianReport {
    pub alpha: f64,
    /// `(1−α/2)^{1−α/2} (α/2)^{α/2}`, or `1` for `α ∈ {0, 2}`.
    pub lower_constant: f64,
    /// `B(1+α/2, 1−α/2)` when `α < 2`.
    pub upper_constant: Option<f64>,
    /// Grid limsup of `(r/g) P_μ(ir)`.
    pub poisson_limsup: f64,
    /// Grid limsup of `↔μ(r)/g(r)`.
    pub arrow_limsup: f64,
    /// `poisson_limsup − lower_constant · arrow_limsup`.
    pub lower_slack: f64,
    /// `upper_constant · arrow_limsup − poisson_limsup`.
    pub upper_slack: Option<f64>,
    pub lower_holds: bool,
    pub upper_holds: Option<bool>,
    /// `(r, (r/g) P_μ(ir), ↔μ(r)/g(r))`.
    pub grid: Vec<(f64, f64, f64)>,
}

pub fn lower_constant(alpha: f64) -> f64 {
    if alpha <= 0.0 || alpha >= 2.0 {
        return 1.0;
    }
    let h = alpha / 2.0;
    (1.0 - h).powf(1.0 - h) * h.powf(h)
}

pub fn upper_constant(alpha: f64) -> f64 {
    beta(1.0 + alpha / 2.0, 1.0 - alpha / 2.0)
}

/// Compare the grid limsups of `(r/g) P_μ(ir)` and `↔μ/g` with the two
/// Tauberian constants.
pub fn tauberian_check(mu: &SyntheticMeasure, g: &RegVarFunction) -> Result<TauberianReport> {
    let alpha = g.index();
    let mut grid = Vec::with_capacity(R_GRID_POINTS);
    for k in 0..R_GRID_POINTS {
        let r = 10f64.powf(R_GRID_DECADES * k as f64 / (R_GRID_POINTS - 1) as f64);
        let gr = g.eval(r);
        let p = mu.poisson_integral(C64::new(0.0, r))?;
        grid.push((r, r / gr * p, mu.double_arrow(r) / gr));
    }
    let cut = 10f64.powf(R_GRID_DECADES - R_WINDOW_DECADES) * (1.0 - 1e-12);
    let window = grid.iter().filter(|p| p.0 >= cut);
    let (poisson_limsup, arrow_limsup) = window.fold((0.0f64, 0.0f64), |m, p| (m.0.max(p.1), m.1.max(p.2)));
    let lc = lower_constant(alpha);
    let lower_slack = poisson_limsup - lc * arrow_limsup;
    let tol = EQUALITY_REL * poisson_limsup.max(arrow_limsup);
    let (upper_constant, upper_slack, upper_holds) = if alpha < 2.0 {
        let uc = upper_constant(alpha);
        let s = uc * arrow_limsup - poisson_limsup;
        (Some(uc), Some(s), Some(s >= -tol))
    } else {
        (None, None, None)
    };
    Ok(TauberianReport {
        alpha,
        lower_constant: lc,
        upper_constant,
        poisson_limsup,
        arrow_limsup,
        lower_slack,
        upper_slack,
        lower_holds: lower_slack >= -tol,
        upper_holds,
        grid,
    })
}

/// The two sides of the Abelian–Tauberian integral equivalence on
/// `[r0, ∞)` for `dξ = ξ′(r) dr`.
#[derive(Clone, Debug, PartialEq)]
pub struct AbelianComparison {
    /// `∫ (1/r) P_μ(ir) dξ(r)`.
    pub poisson_side: EndpointStudy,
    /// `∫ ↔μ(r) ξ⃗(r)/r³ dr`, `ξ⃗(r) = ξ([r0, r))`.
    pub arrow_side: EndpointStudy,
    pub agree: bool,
}

/// Study both integrals with `r = r0/s`, `s ∈ (0, 1]`.
pub fn abelian_comparison(
    mu: &SyntheticMeasure,
    r0: f64,
    xi_density: impl Fn(f64) -> f64,
    xi_cumulative: impl Fn(f64) -> f64,
) -> Result<AbelianComparison> {
    let poisson_side = endpoint_integral(
        |s| {
            let r = r0 / s;
            mu.poisson_integral(C64::new(0.0, r)).unwrap_or(f64::NAN) / r * xi_density(r) * r0 / (s * s)
        },
        0.0,
        1.0,
    )?;
    let arrow_side = endpoint_integral(
        |s| {
            let r = r0 / s;
            mu.double_arrow(r) * xi_cumulative(r) / (r * r * r) * r0 / (s * s)
        },
        0.0,
        1.0,
    )?;
    let agree = poisson_side.verdict == arrow_side.verdict;
    Ok(AbelianComparison { poisson_side, arrow_side, agree })
}

/// Both sides of `∫ μ([a,t)) dν(t) = ∫ ν((t,b)) dμ(t)` for finitely
/// supported `μ`, `ν` given as `(location, mass)`.
pub fn parts_identity(mu: &[(f64, f64)], nu: &[(f64, f64)]) -> (f64, f64) {
    let below = |m: &[(f64, f64)], t: f64| m.iter().filter(|p| p.0 < t).map(|p| p.1).sum::<f64>();
    let above = |m: &[(f64, f64)], t: f64| m.iter().filter(|p| p.0 > t).map(|p| p.1).sum::<f64>();
    let lhs = nu.iter().map(|&(t, w)| below(mu, t) * w).sum();
    let rhs = mu.iter().map(|&(t, w)| above(nu, t) * w).sum();
    (lhs, rhs)
}
