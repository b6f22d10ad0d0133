//! Growth classes of the spectral measure read off from `M` near `a`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_traits::Float;

use super::endpoint::{endpoint_integral, Convergence, EndpointStudy};
use super::regvar::RegVarFunction;
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;

/// Geometric grid toward `a`: `t = a + (a′ − a) 10^{−8k/399}`.
pub const LIMSUP_POINTS: usize = 400;
pub const LIMSUP_DECADES: f64 = 8.0;
/// The limsup is the maximum over the last two decades of the grid.
pub const LIMSUP_WINDOW_DECADES: f64 = 2.0;
/// Log-log slopes of a ratio beyond this are read as `→ 0` or `→ ∞`.
pub const SLOPE_TOL: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowthClass {
    /// `ℳ_g`: `∫_{[1,∞)} dμ̃/g < ∞`.
    M,
    /// `ℳ̂_g`: `∫_1^∞ ↔μ(r) g_⋆(r)/r³ dr < ∞`.
    MHat,
    /// `𝓕_g`: `↔μ = O(g)`.
    F,
    /// `𝓕_g⁰`: `↔μ = o(g)`.
    F0,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Member,
    NotMember,
    Undetermined,
}

/// Behaviour of a positive ratio as `t → a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RatioLimit {
    Zero,
    BoundedPositive,
    Unbounded,
}

/// `max` and log-log slope of a ratio over the last two grid decades.
#[derive(Clone, Debug, PartialEq)]
pub struct LimsupEstimate {
    pub limsup: f64,
    /// Slope of `ln ratio` against `ln(t − a)`.
    pub slope: f64,
    pub limit: RatioLimit,
    /// `(t, ratio)` over the whole grid.
    pub grid: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Evidence {
    Integral(EndpointStudy),
    Limsup(LimsupEstimate),
    Failed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub label: &'static str,
    /// `None` when the study stayed inconclusive.
    pub verdict: Option<Convergence>,
    pub evidence: Evidence,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthClassReport {
    pub alpha: f64,
    pub classes: Vec<(GrowthClass, Membership)>,
    pub conditions: Vec<ConditionReport>,
    /// `limsup m3²/(m1 m2) < 1` near `a`, when it was estimated.
    pub diagonally_dominant: Option<bool>,
    /// No implication arrow is contradicted by the verdicts.
    pub consistent: bool,
    pub notes: Vec<String>,
}

impl GrowthClassReport {
    pub fn membership(&self, class: GrowthClass) -> Membership {
        self.classes.iter().find(|(c, _)| *c == class).map_or(Membership::Undetermined, |(_, m)| *m)
    }

    pub fn condition(&self, label: &str) -> Option<&ConditionReport> {
        self.conditions.iter().find(|c| c.label == label)
    }

    pub fn verdict(&self, label: &str) -> Option<Convergence> {
        self.condition(label).and_then(|c| c.verdict)
    }

    /// Merge class tags from another report on the same `H` and `g` and
    /// close them under `ℳ_g ⊆ 𝓕_g⁰ ⊆ 𝓕_g`.
    pub fn merge(mut self, other: GrowthClassReport) -> GrowthClassReport {
        for (c, m) in other.classes {
            set_class(&mut self.classes, &mut self.consistent, c, m);
        }
        self.conditions.extend(other.conditions);
        self.notes.extend(other.notes);
        self.consistent &= other.consistent;
        if self.diagonally_dominant.is_none() {
            self.diagonally_dominant = other.diagonally_dominant;
        }
        close_chain(&mut self.classes, &mut self.consistent);
        self
    }
}

fn set_class(classes: &mut Vec<(GrowthClass, Membership)>, consistent: &mut bool, c: GrowthClass, m: Membership) {
    if m == Membership::Undetermined {
        if !classes.iter().any(|(k, _)| *k == c) {
            classes.push((c, m));
        }
        return;
    }
    match classes.iter_mut().find(|(k, _)| *k == c) {
        Some((_, old)) if *old == Membership::Undetermined => *old = m,
        Some((_, old)) if *old != m => *consistent = false,
        Some(_) => {}
        None => classes.push((c, m)),
    }
}

fn close_chain(classes: &mut Vec<(GrowthClass, Membership)>, consistent: &mut bool) {
    use GrowthClass::*;
    use Membership::*;
    let get = |cl: &Vec<(GrowthClass, Membership)>, c| cl.iter().find(|(k, _)| *k == c).map(|(_, m)| *m);
    for _ in 0..3 {
        let chain = [M, F0, F];
        for w in chain.windows(2) {
            if get(classes, w[0]) == Some(Member) {
                set_class(classes, consistent, w[1], Member);
            }
            if get(classes, w[1]) == Some(NotMember) {
                set_class(classes, consistent, w[0], NotMember);
            }
        }
    }
}

fn check_g(g: &RegVarFunction) -> Result<()> {
    let alpha = g.index();
    if !(alpha <= 2.0) || alpha < 0.0 {
        return Err(Error::ParameterOutOfRange { name: "alpha", value: alpha });
    }
    if !(g.eval(1e12) > g.eval(1e6)) {
        return Err(Error::InvalidInput(String::from("g must tend to infinity")));
    }
    Ok(())
}

/// `(m1, m2, m3, h1, h2, h3, det M)` at `t`.
fn moments(h: &Hamiltonian, t: f64) -> [f64; 7] {
    let m = h.m(t);
    let hh = h.h(t);
    [m.h1, m.h2, m.h3, hh.h1, hh.h2, hh.h3, h.det_m(t)]
}

fn integral_condition(
    label: &'static str,
    f: impl Fn(f64) -> f64,
    a: f64,
    a_prime: f64,
) -> ConditionReport {
    match endpoint_integral(f, a, a_prime) {
        Ok(study) => ConditionReport { label, verdict: Some(study.verdict), evidence: Evidence::Integral(study) },
        Err(e) => ConditionReport { label, verdict: None, evidence: Evidence::Failed(format!("{e}")) },
    }
}

fn grid_toward(a: f64, a_prime: f64) -> Vec<f64> {
    (0..LIMSUP_POINTS)
        .map(|k| a + (a_prime - a) * 10f64.powf(-LIMSUP_DECADES * k as f64 / (LIMSUP_POINTS - 1) as f64))
        .collect()
}

/// Estimate `limsup_{t→a}` of a positive ratio on the standard grid.
pub fn limsup_toward(ratio: impl Fn(f64) -> f64, a: f64, a_prime: f64) -> Result<LimsupEstimate> {
    if !(a_prime > a) {
        return Err(Error::Domain(format!("limsup grid needs a < a′, got ({a}, {a_prime})")));
    }
    let grid: Vec<(f64, f64)> = grid_toward(a, a_prime).into_iter().map(|t| (t, ratio(t))).collect();
    let cut = (a_prime - a) * 10f64.powf(-(LIMSUP_DECADES - LIMSUP_WINDOW_DECADES));
    let window: Vec<(f64, f64)> = grid.iter().copied().filter(|(t, _)| *t - a <= cut * (1.0 + 1e-12)).collect();
    if window.iter().any(|(_, r)| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::InconclusiveNearEndpoint(String::from("ratio not finite and non-negative on the grid")));
    }
    let limsup = window.iter().map(|p| p.1).fold(0.0, f64::max);
    if limsup == 0.0 {
        return Ok(LimsupEstimate { limsup, slope: f64::INFINITY, limit: RatioLimit::Zero, grid });
    }
    // Least squares of ln ratio on ln(t − a), zeros excluded.
    let pts: Vec<(f64, f64)> =
        window.iter().filter(|(_, r)| *r > 0.0).map(|(t, r)| ((t - a).ln(), r.ln())).collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |s, p| (s.0 + p.0, s.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |s, p| (s.0 + (p.0 - mx) * (p.1 - my), s.1 + (p.0 - mx).powi(2)));
    let slope = sxy / sxx;
    let limit = if slope > SLOPE_TOL {
        RatioLimit::Zero
    } else if slope < -SLOPE_TOL {
        RatioLimit::Unbounded
    } else {
        RatioLimit::BoundedPositive
    };
    Ok(LimsupEstimate { limsup, slope, limit, grid })
}

/// `limsup m3²/(m1 m2) < 1` near `a`, judged on the standard grid.
pub fn diagonal_dominance(h: &Hamiltonian, a_prime: f64) -> Result<(bool, LimsupEstimate)> {
    let est = limsup_toward(
        |t| {
            let m = h.m(t);
            m.h3 * m.h3 / (m.h1 * m.h2)
        },
        h.a(),
        a_prime,
    )?;
    // Off-diagonal ratios converging to 1 are not dominated.
    Ok((est.limsup < 1.0 - 1e-6, est))
}

/// Conditions (i), (i)′, (i)″, (iii), (iii)′, (iii)″ of the Kac-class
/// criterion on `(a, a′)`, and the implied memberships in `ℳ̂_g`, `ℳ_g`.
///
/// `g_⋆` is evaluated at `max(1, (m1 m2)^{−1/2})`, which changes none of
/// the integrals near `a`.
pub fn kac_criterion(h: &Hamiltonian, g: &RegVarFunction, a_prime: f64) -> Result<GrowthClassReport> {
    use Convergence::*;
    check_g(g)?;
    let a = h.a();
    if !(a_prime > a && a_prime < h.b()) {
        return Err(Error::Domain(format!("a′ = {a_prime} must lie in ({a}, {})", h.b())));
    }
    let alpha = g.index();
    let gs = |p: f64| g.g_star(p.powf(-0.5).max(1.0)).unwrap_or(f64::NAN);
    let gg = |p: f64| g.eval(p.powf(-0.5));
    // Quadratic form (m2, −m3) H (m2, −m3)ᵀ / m2².
    let quad = |x: &[f64; 7]| (x[3] * x[1] * x[1] - 2.0 * x[5] * x[1] * x[2] + x[4] * x[2] * x[2]) / (x[1] * x[1]);
    let dp = |x: &[f64; 7]| x[3] * x[1] + x[0] * x[4];
    let conds = alloc::vec![
        integral_condition("(i)", |t| {
            let x = moments(h, t);
            x[3] * gs(x[0] * x[1])
        }, a, a_prime),
        integral_condition("(i)'", |t| {
            let x = moments(h, t);
            let p = x[0] * x[1];
            x[0] * dp(&x) / (p * p * gg(p))
        }, a, a_prime),
        integral_condition("(i)''", |t| {
            let x = moments(h, t);
            let p = x[0] * x[1];
            x[3] / (p * gg(p))
        }, a, a_prime),
        integral_condition("(iii)", |t| {
            let x = moments(h, t);
            quad(&x).max(0.0) * gs(x[0] * x[1])
        }, a, a_prime),
        integral_condition("(iii)'", |t| {
            let x = moments(h, t);
            let p = x[0] * x[1];
            x[6].max(0.0) / x[1] * dp(&x) / (p * p * gg(p))
        }, a, a_prime),
        integral_condition("(iii)''", |t| {
            let x = moments(h, t);
            let p = x[0] * x[1];
            quad(&x).max(0.0) / (p * gg(p))
        }, a, a_prime),
    ];
    if conds.iter().all(|c| c.verdict.is_none()) {
        return Err(Error::InconclusiveNearEndpoint(format!(
            "no condition stabilised on ({a}, {a_prime})"
        )));
    }
    let v = |k: usize| conds[k].verdict;
    let (dominant, _) = diagonal_dominance(h, a_prime)?;

    let mut consistent = true;
    let mut notes = Vec::new();
    let mut arrow = |ok: bool, what: &str| {
        if !ok {
            consistent = false;
            notes.push(format!("verdicts contradict {what}"));
        }
    };
    let eq = |x: Option<Convergence>, y: Option<Convergence>| x.is_none() || y.is_none() || x == y;
    let implies = |x: Option<Convergence>, y: Option<Convergence>| !(x == Some(Convergent) && y == Some(Divergent));
    arrow(eq(v(0), v(1)), "(i) <=> (i)'");
    arrow(eq(v(3), v(4)), "(iii) <=> (iii)'");
    if alpha < 2.0 {
        arrow(eq(v(1), v(2)), "(i)' <=> (i)''");
        arrow(eq(v(4), v(5)), "(iii)' <=> (iii)''");
    } else {
        arrow(implies(v(1), v(2)), "(i)' => (i)''");
        arrow(implies(v(4), v(5)), "(iii)' => (iii)''");
    }
    arrow(implies(v(0), v(3)), "(i) => (iii)");
    arrow(implies(v(1), v(3)), "(i)' => (iii)");
    if dominant {
        arrow(eq(v(0), v(3)), "(i) <=> (iii) for diagonally dominant H");
    }

    let any = |ks: &[usize], c: Convergence| ks.iter().any(|&k| v(k) == Some(c));
    let i_conv = any(&[0, 1], Convergent) || (alpha < 2.0 && v(2) == Some(Convergent));
    let iii_div = any(&[3, 4, 5], Divergent);
    let i_div = any(&[0, 1, 2], Divergent);
    let iii_conv = any(&[3, 4], Convergent) || (alpha < 2.0 && v(5) == Some(Convergent));
    let member = i_conv || (dominant && iii_conv);
    let not_member = iii_div || (dominant && i_div);
    let m_hat = match (member, not_member) {
        (true, false) => Membership::Member,
        (false, true) => Membership::NotMember,
        (true, true) => {
            consistent = false;
            notes.push(String::from("both membership and non-membership in M^_g implied"));
            Membership::Undetermined
        }
        (false, false) => Membership::Undetermined,
    };
    let m = if alpha > 0.0 && alpha < 2.0 {
        m_hat
    } else if m_hat == Membership::Member {
        notes.push(String::from("alpha in {0, 2}: only M^_g ⊆ M_g is available"));
        Membership::Member
    } else {
        Membership::Undetermined
    };
    let mut classes = alloc::vec![(GrowthClass::MHat, m_hat), (GrowthClass::M, m)];
    close_chain(&mut classes, &mut consistent);
    Ok(GrowthClassReport { alpha, classes, conditions: conds, diagonally_dominant: Some(dominant), consistent, notes })
}

/// Tail criteria: `m1/((m1 m2) g((m1 m2)^{−1/2}))` for sufficiency and, when
/// `α < 2`, `(det M/m2)/((m1 m2) g(·))` for necessity.
pub fn fg_criterion(h: &Hamiltonian, g: &RegVarFunction, a_prime: f64) -> Result<GrowthClassReport> {
    use Membership::*;
    check_g(g)?;
    let a = h.a();
    if !(a_prime > a && a_prime < h.b()) {
        return Err(Error::Domain(format!("a′ = {a_prime} must lie in ({a}, {})", h.b())));
    }
    let alpha = g.index();
    let denom = |m1: f64, m2: f64| {
        let p = m1 * m2;
        p * g.eval(p.powf(-0.5))
    };
    let upper = limsup_toward(
        |t| {
            let m = h.m(t);
            m.h1 / denom(m.h1, m.h2)
        },
        a,
        a_prime,
    )?;
    let lower = limsup_toward(
        |t| {
            let m = h.m(t);
            (h.det_m(t).max(0.0) / m.h2) / denom(m.h1, m.h2)
        },
        a,
        a_prime,
    )?;
    let (dominant, _) = diagonal_dominance(h, a_prime)?;
    let mut notes = Vec::new();
    let mut consistent = true;

    let mut f = if upper.limit != RatioLimit::Unbounded { Member } else { Undetermined };
    let mut f0 = if upper.limit == RatioLimit::Zero { Member } else { Undetermined };
    if alpha < 2.0 {
        let mut refute = |slot: &mut Membership, refuted: bool| {
            if refuted {
                if *slot == Member {
                    consistent = false;
                    *slot = Undetermined;
                } else {
                    *slot = NotMember;
                }
            }
        };
        refute(&mut f, lower.limit == RatioLimit::Unbounded);
        refute(&mut f0, lower.limit != RatioLimit::Zero);
        if dominant {
            notes.push(String::from("diagonally dominant: the m1-ratio decides both classes"));
            refute(&mut f, upper.limit == RatioLimit::Unbounded);
            refute(&mut f0, upper.limit != RatioLimit::Zero);
        }
    }
    if !consistent {
        notes.push(String::from("sufficient and necessary ratios disagree"));
    }
    let mut classes = alloc::vec![(GrowthClass::F, f), (GrowthClass::F0, f0)];
    close_chain(&mut classes, &mut consistent);
    let conditions = alloc::vec![
        ConditionReport { label: "m1-ratio", verdict: None, evidence: Evidence::Limsup(upper) },
        ConditionReport { label: "detM/m2-ratio", verdict: None, evidence: Evidence::Limsup(lower) },
    ];
    Ok(GrowthClassReport { alpha, classes, conditions, diagonally_dominant: Some(dominant), consistent, notes })
}

/// Both criteria, merged and closed under the class inclusions.
pub fn growth_classes(h: &Hamiltonian, g: &RegVarFunction, a_prime: f64) -> Result<GrowthClassReport> {
    Ok(kac_criterion(h, g, a_prime)?.merge(fg_criterion(h, g, a_prime)?))
}

impl ConditionReport {
    pub fn limsup(&self) -> Option<&LimsupEstimate> {
        match &self.evidence {
            Evidence::Limsup(l) => Some(l),
            _ => None,
        }
    }
}
