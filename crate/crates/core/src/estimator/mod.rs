//! The critical point `t̂(r)`, the quantities `A(r)` and `L(r)`, and the
//! angle-dependent envelope for `q_H(re^{iθ})`.
//!
//! `t̂(r)` solves `(m₁m₂)(t̂) = q²/(4r²)`.  With `σ = 1/(1−q)² − 1`,
//! `A = √(m₁/m₂)(t̂)` and `L = A·det M/(m₁m₂)(t̂)`, the envelope is
//!
//! * `A/K_θ ≤ |q_H| ≤ K_θ A` with `K_θ = (1+σ+2/(q sin θ))/(1−σ)`,
//! * `|Re q_H| ≤ (1+σ+1/(q sin θ))/(1−σ)·A`,
//! * `(q sin θ/2)/(1+|cos θ|)·(1−σ)/(1+σ)·L ≤ Im q_H ≤ (σ+2/(q sin θ))/(1−σ)·A`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::quad::bisect_increasing;

/// Upper end of the admissible range for `q`: `1 − 1/√2`.
pub const Q_MAX: f64 = 1.0 - FRAC_1_SQRT_2;

/// `σ = 1/(1−q)² − 1`.
pub fn sigma(q: f64) -> f64 {
    1.0 / ((1.0 - q) * (1.0 - q)) - 1.0
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q < Q_MAX) {
        return Err(Error::ParameterOutOfRange { name: "q", value: q });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorConfig {
    /// In `(0, 1 − 1/√2)`.
    pub q: f64,
    /// Relative width of the final bracket for `t̂ − a`.
    pub root_tol: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig { q: 0.2, root_tol: 1e-13 }
    }
}

impl EstimatorConfig {
    pub fn new(q: f64) -> Result<Self> {
        check_q(q)?;
        Ok(EstimatorConfig { q, ..Default::default() })
    }

    pub fn sigma(&self) -> f64 {
        sigma(self.q)
    }
}

/// Multipliers of `A` and `L` in the envelope at one angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeConstants {
    /// `K_θ`: `A/K_θ ≤ |q_H| ≤ K_θ A`.
    pub abs: f64,
    pub re: f64,
    /// Multiplier of `L` in the lower bound of `Im q_H`.
    pub im_lower: f64,
    /// Multiplier of `A` in the upper bound of `Im q_H`.
    pub im_upper: f64,
}

/// Envelope constants for `θ ∈ (0, π)`.
///
/// `θ > π/2` is reflected to `π − θ` first, so mirrored angles give
/// identical constants whenever the reflection is exact.
pub fn envelope_constants(q: f64, theta: f64) -> Result<EnvelopeConstants> {
    check_q(q)?;
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::ParameterOutOfRange { name: "theta", value: theta });
    }
    let u = if theta > 0.5 * PI { PI - theta } else { theta };
    let (s, c) = (u.sin(), u.cos().abs());
    let sg = sigma(q);
    let qs = q * s;
    Ok(EnvelopeConstants {
        abs: (1.0 + sg + 2.0 / qs) / (1.0 - sg),
        re: (1.0 + sg + 1.0 / qs) / (1.0 - sg),
        im_lower: (0.5 * qs) / (1.0 + c) * (1.0 - sg) / (1.0 + sg),
        im_upper: (sg + 2.0 / qs) / (1.0 - sg),
    })
}

/// The envelope at one angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    pub theta: f64,
    pub lower_abs: f64,
    pub upper_abs: f64,
    pub upper_re: f64,
    pub lower_im: f64,
    pub upper_im: f64,
}

impl Envelope {
    pub fn new(q: f64, theta: f64, a: f64, l: f64) -> Result<Self> {
        let k = envelope_constants(q, theta)?;
        Ok(Envelope {
            theta,
            lower_abs: a / k.abs,
            upper_abs: k.abs * a,
            upper_re: k.re * a,
            lower_im: k.im_lower * l,
            upper_im: k.im_upper * a,
        })
    }

    /// Whether `w` satisfies every bound, each relaxed by `eps`.
    pub fn contains(&self, w: num_complex::Complex<f64>, eps: f64) -> bool {
        let n = w.norm();
        self.lower_abs - eps <= n
            && n <= self.upper_abs + eps
            && w.re.abs() <= self.upper_re + eps
            && self.lower_im - eps <= w.im
            && w.im <= self.upper_im + eps
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateBundle {
    pub r: f64,
    pub q: f64,
    pub sigma: f64,
    pub t_crit: f64,
    pub a: f64,
    pub l: f64,
    pub envelopes: Vec<Envelope>,
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::ParameterOutOfRange { name: "r", value: r });
    }
    Ok(())
}

fn product(h: &Hamiltonian, t: f64) -> f64 {
    let m = h.m(t);
    m.h1 * m.h2
}

/// `r̂(t) = (q/2)(m₁m₂)^{−1/2}(t)`, the inverse of `t̂`.
pub fn r_hat(h: &Hamiltonian, t: f64, q: f64) -> f64 {
    0.5 * q / product(h, t).sqrt()
}

/// Solve `(m₁m₂)(t̂) = q²/(4r²)` by bisection in `t − a`.
pub fn t_crit(h: &Hamiltonian, r: f64, cfg: &EstimatorConfig) -> Result<f64> {
    check_q(cfg.q)?;
    check_r(r)?;
    let (a, b) = (h.a(), h.b());
    if let Some(p) = h.leading_prefix(a)? {
        return Err(Error::IndivisibleStart { kind: p.kind, endpoint: p.endpoint });
    }
    let target = cfg.q * cfg.q / (4.0 * r * r);
    let g = |t: f64| product(h, t);
    let mut hi = if b.is_finite() { a + 0.5 * (b - a) } else { a + 1.0 };
    while g(hi) < target {
        let next = if b.is_finite() { hi + 0.5 * (b - hi) } else { a + 2.0 * (hi - a) };
        if !(next > hi) || next - a > 1e300 || (b.is_finite() && b - next <= 1e-15 * b.abs().max(1.0)) {
            return Err(Error::Bracket(format!(
                "(m1 m2)(t) stays below {target:e} up to t = {next}"
            )));
        }
        hi = next;
    }
    let mut u = hi - a;
    loop {
        u *= 0.5;
        if !(a + u > a) {
            return Err(Error::Bracket(format!("(m1 m2)(t) does not fall below {target:e} near a")));
        }
        if g(a + u) < target {
            break;
        }
    }
    let lo = a + u;
    let hi = (a + 2.0 * u).min(hi);
    Ok(bisect_increasing(g, a, lo, hi, target, cfg.root_tol))
}

/// `(A, L)` evaluated at a given `t̂`.
pub fn a_and_l(h: &Hamiltonian, t: f64) -> Result<(f64, f64)> {
    let m = h.m(t);
    if !(m.h1 > 0.0 && m.h2 > 0.0) {
        let kind = if m.h2 > 0.0 {
            crate::error::PrefixKind::TypeHalfPi
        } else {
            crate::error::PrefixKind::TypeZero
        };
        return Err(Error::IndivisibleStart { kind, endpoint: t });
    }
    let a = (m.h1 / m.h2).sqrt();
    let l = a * h.det_m(t).max(0.0) / (m.h1 * m.h2);
    Ok((a, l))
}

/// `t̂(r)`, `A(r)`, `L(r)` and the envelope at each angle.
pub fn estimate_bundle(h: &Hamiltonian, r: f64, angles: &[f64], cfg: &EstimatorConfig) -> Result<EstimateBundle> {
    let t = t_crit(h, r, cfg)?;
    let (a, l) = a_and_l(h, t)?;
    let envelopes = angles.iter().map(|&th| Envelope::new(cfg.q, th, a, l)).collect::<Result<Vec<_>>>()?;
    Ok(EstimateBundle { r, q: cfg.q, sigma: cfg.sigma(), t_crit: t, a, l, envelopes })
}

/// Bounds from a bracket `t_lo < t̂(r) < t_hi` without solving for `t̂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracketBounds {
    /// `(2/q) r m₁(t_lo) ≤ A`.
    pub a_lower_lo: f64,
    /// `A ≤ (q/2)/(r m₂(t_lo))`.
    pub a_upper_lo: f64,
    /// `(2/q) r det M(t_lo)/m₂(t_lo) ≤ L`.
    pub l_lower: f64,
    /// `(q/2)/(r m₂(t_hi)) ≤ A`.
    pub a_lower_hi: f64,
    /// `A ≤ (2/q) r m₁(t_hi)`.
    pub a_upper_hi: f64,
    /// `L ≤ (2/q) r det M(t_hi)/m₂(t_hi)`.
    pub l_upper: f64,
    /// Envelope for `q_H(re^{iθ})` from the best of these bounds.
    pub lower_abs: f64,
    pub upper_abs: f64,
    pub upper_re: f64,
    pub lower_im: f64,
    pub upper_im: f64,
}

impl BracketBounds {
    pub fn a_lower(&self) -> f64 {
        self.a_lower_lo.max(self.a_lower_hi)
    }

    pub fn a_upper(&self) -> f64 {
        self.a_upper_lo.min(self.a_upper_hi)
    }
}

/// Bounds on `A(r)`, `L(r)` and `q_H(re^{iθ})` from `t_lo ≤ t̂(r) ≤ t_hi`.
///
/// The bracket is checked through `r̂`: `r ≤ r̂(t_lo)` and `r ≥ r̂(t_hi)`.
pub fn bracket_bounds(
    h: &Hamiltonian,
    r: f64,
    bracket: (f64, f64),
    theta: f64,
    cfg: &EstimatorConfig,
) -> Result<BracketBounds> {
    check_q(cfg.q)?;
    check_r(r)?;
    let (t_lo, t_hi) = bracket;
    if !(t_lo > h.a() && t_lo < t_hi && t_hi < h.b()) {
        return Err(Error::Domain(format!("bracket ({t_lo}, {t_hi}) not inside ({}, {})", h.a(), h.b())));
    }
    let q = cfg.q;
    let r_max = r_hat(h, t_lo, q);
    if !(r <= r_max) {
        return Err(Error::InvalidBracket { r, r_max });
    }
    let r_min = r_hat(h, t_hi, q);
    if !(r >= r_min) {
        return Err(Error::Bracket(format!("t_hi = {t_hi} lies below t̂({r}); need r ≥ {r_min}")));
    }
    let (ml, mh) = (h.m(t_lo), h.m(t_hi));
    let k = 2.0 / q * r;
    let b = BracketBounds {
        a_lower_lo: k * ml.h1,
        a_upper_lo: 0.5 * q / (r * ml.h2),
        l_lower: k * h.det_m(t_lo).max(0.0) / ml.h2,
        a_lower_hi: 0.5 * q / (r * mh.h2),
        a_upper_hi: k * mh.h1,
        l_upper: k * h.det_m(t_hi).max(0.0) / mh.h2,
        lower_abs: 0.0,
        upper_abs: 0.0,
        upper_re: 0.0,
        lower_im: 0.0,
        upper_im: 0.0,
    };
    let c = envelope_constants(q, theta)?;
    let (al, au) = (b.a_lower(), b.a_upper());
    Ok(BracketBounds {
        lower_abs: al / c.abs,
        upper_abs: c.abs * au,
        upper_re: c.re * au,
        lower_im: c.im_lower * b.l_lower,
        upper_im: c.im_upper * au,
        ..b
    })
}

/// The constant `C` with `|q_H(ir)| ≤ C |q_H̃(ir)|`, and its ingredients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComparisonConstant {
    pub c: f64,
    /// The three terms whose maximum is `C`.
    pub terms: [f64; 3],
    pub q_i: [f64; 2],
    pub sigma_i: [f64; 2],
    pub delta_i: [f64; 2],
}

/// `C` for trace constants `c₁, c₂` and diagonal constants `γ₁, γ₂`:
/// `(1/c₁) tr M ≤ tr M̃ ≤ c₂ tr M`, `m₁ ≤ γ₁ m̃₁`, `m̃₂ ≤ γ₂ m₂`.
pub fn comparison_constant(c1: f64, c2: f64, g1: f64, g2: f64, q: f64) -> Result<ComparisonConstant> {
    for (name, v) in [("c1", c1), ("c2", c2), ("gamma1", g1), ("gamma2", g2)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::ParameterOutOfRange { name, value: v });
        }
    }
    check_q(q)?;
    let q_i = [q * (2.0 * c1 * g1).sqrt(), q * (2.0 * c2 * g2).sqrt()];
    for &qi in &q_i {
        if !(qi < Q_MAX) {
            return Err(Error::ParameterOutOfRange { name: "q", value: q });
        }
    }
    let kq = |q: f64| {
        let s = sigma(q);
        (1.0 + s + 2.0 / q) / (1.0 - s)
    };
    let sigma_i = [sigma(q_i[0]), sigma(q_i[1])];
    let delta_i = [2.0 / q_i[0] / kq(q_i[0]), 2.0 / q_i[1] / kq(q_i[1])];
    let k = kq(q);
    let terms = [g1 / delta_i[1] * (2.0 / q) * k, g2 / delta_i[0] * (2.0 / q) * k, k * k];
    let c = terms.iter().cloned().fold(0.0, f64::max);
    Ok(ComparisonConstant { c, terms, q_i, sigma_i, delta_i })
}

/// `r₀ = max(r̂(a′), r̂̃(a′))` for the comparison on `(a, a′)`; zero when
/// `a′ = b`.
pub fn comparison_r0(h: &Hamiltonian, h_tilde: &Hamiltonian, a_prime: f64, q: f64) -> f64 {
    if a_prime >= h.b() {
        return 0.0;
    }
    r_hat(h, a_prime, q).max(r_hat(h_tilde, a_prime, q))
}

/// `A(r)` through the associated string: `(2r/q)·f⁻(q²/(4r²))` with
/// `f(x) = x 𝔪(x)`.
pub fn a_via_string(h: &Hamiltonian, r: f64, cfg: &EstimatorConfig) -> Result<f64> {
    check_q(cfg.q)?;
    check_r(r)?;
    if let Some(p) = h.leading_prefix(h.a())? {
        return Err(Error::IndivisibleStart { kind: p.kind, endpoint: p.endpoint });
    }
    let s = crate::strings::string_from_hamiltonian(h);
    let y = cfg.q * cfg.q / (4.0 * r * r);
    let x = s.f_inverse(y)?;
    Ok(2.0 * r / cfg.q * x)
}
