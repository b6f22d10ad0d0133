//! Generalised inverses, Krein strings and their diagonal canonical
//! systems, the principal Titchmarsh–Weyl coefficient `q_S`, and
//! Sturm–Liouville envelopes.
//!
//! The string of a Hamiltonian is `L = lim m₁`, `𝔪 = m₂ ∘ m₁⁻`.  Conversely
//! a string defines the trace-normed Hamiltonian
//! `H = diag(d m̃⁻/dt, 1 − d m̃⁻/dt)` with `m̃(x) = x + 𝔪(x)`, extended by
//! `m̃(L) = L + 𝔪(L−)` and `m̃ = ∞` beyond `L`.  For diagonal `H`,
//! `q_H(z) = z q_S(z²)`.

mod monotone;
mod sl;

pub use monotone::{MonotoneFunction, Piece};
pub use sl::{sl_constants, sl_envelope, PotentialData, SlEnvelope, SlProblem, X0Choice};

use alloc::format;
use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, Interval};
use crate::linalg::{Sym2, C64};
use crate::quad::{integrate, integrate_left_singular};
use crate::spectral::{endpoint_integral, Convergence, EndpointStudy, RegVarFunction};
use crate::weyl::{weyl_coefficient, CertifiedValue};
use monotone::inf_where;

/// A Krein string: a length `L ∈ [0, ∞]` and a non-decreasing,
/// left-continuous mass function `𝔪 ≥ 0` on `[0, L)` with `𝔪(0) = 0`.
#[derive(Clone, Debug)]
pub struct KreinString {
    length: f64,
    mass: MonotoneFunction,
    m_tilde: MonotoneFunction,
}

impl KreinString {
    pub fn new(length: f64, mass: MonotoneFunction) -> Result<Self> {
        if !(length >= 0.0) {
            return Err(Error::InvalidInput(format!("string length {length}")));
        }
        if mass.start() != 0.0 || mass.end() < length {
            return Err(Error::InvalidInput(format!(
                "mass defined on [{}, {}), string length {length}",
                mass.start(),
                mass.end()
            )));
        }
        if length > 0.0 && mass.eval(0.0) != 0.0 {
            return Err(Error::InvalidInput(format!("mass at 0 is {}", mass.eval(0.0))));
        }
        let m_tilde = build_m_tilde(length, &mass)?;
        Ok(KreinString { length, mass, m_tilde })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn mass(&self) -> &MonotoneFunction {
        &self.mass
    }

    /// `𝔪(x)` for `x ∈ [0, L)`.
    pub fn mass_at(&self, x: f64) -> f64 {
        self.mass.eval(x)
    }

    /// `𝔪(L−)`; infinite when `L = ∞` and the mass is unbounded.
    pub fn mass_end(&self) -> f64 {
        mass_end(self.length, &self.mass)
    }

    /// Regular: `L < ∞` and `𝔪(L−) < ∞`.
    pub fn is_regular(&self) -> bool {
        self.length.is_finite() && self.mass_end().is_finite()
    }

    /// `f(x) = x 𝔪(x)` on `[0, L)`, `f(L) = L 𝔪(L−)`, `f = ∞` beyond.
    pub fn f(&self, x: f64) -> f64 {
        if x < self.length {
            if x == 0.0 {
                0.0
            } else {
                x * self.mass.eval(x)
            }
        } else if x == self.length {
            self.length * self.mass_end()
        } else {
            f64::INFINITY
        }
    }

    /// `f⁻(y) = inf{x ≥ 0 : f(x) ≥ y}` for `y ≥ 0`.
    pub fn f_inverse(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return Err(Error::Domain(format!("f⁻ needs y ≥ 0, got {y}")));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let pred = |x: f64| self.f(x) >= y;
        if self.length.is_finite() {
            if !pred(self.length) {
                return Ok(self.length);
            }
            return Ok(inf_where(pred, 0.0, self.length));
        }
        let mut hi = 1.0;
        let mut n = 0;
        while !pred(hi) {
            hi *= 2.0;
            n += 1;
            if n > 1020 {
                return Err(Error::Domain(format!("{y} exceeds the range of f")));
            }
        }
        Ok(inf_where(pred, 0.0, hi))
    }

    /// `m̃(x) = x + 𝔪(x)` with its extension at and beyond `L`.
    pub fn m_tilde(&self, x: f64) -> f64 {
        self.m_tilde.eval(x)
    }

    /// `m̃⁻(t)` for `t ≥ 0`.
    pub fn m_tilde_inverse(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if self.length.is_finite() && t > self.length + self.mass_end() {
            return self.length;
        }
        self.m_tilde.inverse_at(t).unwrap_or(self.length)
    }

    /// `∫₀^x 𝔪`.
    pub fn mass_integral(&self, x: f64) -> Result<f64> {
        self.mass.integral(x.min(self.length))
    }

    /// `𝔪(0+) = 0` and `𝔪 > 0` on `(0, L)`, checked exactly for piecewise
    /// masses and at `x = 10^{−12} min(L, 1)` otherwise.
    pub fn has_positive_mass_from_origin(&self) -> bool {
        if !(self.length > 0.0) {
            return false;
        }
        match self.mass.pieces() {
            Some(p) => p[0].base == 0.0 && (p[0].slope > 0.0 || p[0].coef > 0.0),
            None => self.mass.eval(1e-12 * self.length.min(1.0)) > 0.0,
        }
    }
}

fn mass_end(length: f64, mass: &MonotoneFunction) -> f64 {
    if length == 0.0 {
        return 0.0;
    }
    if mass.end() == length {
        mass.sup()
    } else {
        mass.left_limit(length)
    }
}

fn build_m_tilde(length: f64, mass: &MonotoneFunction) -> Result<MonotoneFunction> {
    let end_value = length + mass_end(length, mass);
    if length == 0.0 {
        return Ok(MonotoneFunction::from_pieces(
            alloc::vec![Piece { start: 0.0, at_start: 0.0, base: f64::INFINITY, slope: 0.0, coef: 0.0, power: 1.0 }],
            f64::INFINITY,
        )?);
    }
    if let Some(p) = mass.pieces() {
        let mut out: Vec<Piece> = p
            .iter()
            .filter(|q| q.start < length)
            .map(|q| Piece { at_start: q.start + q.at_start, base: q.start + q.base, slope: q.slope + 1.0, ..*q })
            .collect();
        if length.is_finite() {
            out.push(Piece { start: length, at_start: end_value, base: f64::INFINITY, slope: 0.0, coef: 0.0, power: 1.0 });
        }
        return MonotoneFunction::from_pieces(out, f64::INFINITY);
    }
    let m = mass.clone();
    let f = move |x: f64| {
        if x < length {
            x + m.eval(x)
        } else if x == length {
            end_value
        } else {
            f64::INFINITY
        }
    };
    let m2 = mass.clone();
    Ok(MonotoneFunction::callable(0.0, f64::INFINITY, f).with_derivative(move |x| 1.0 + m2.derivative(x)))
}

/// `lim_{t→b} m₁(t)`.
///
/// Exact for piecewise, power and constant-tail Hamiltonians.  Otherwise
/// `m₁` is compared at `a + 2^{40}` and `a + 2^{80}`: growth means `L = ∞`,
/// else the later value is taken.
fn m1_limit(h: &Hamiltonian) -> f64 {
    let (a, b) = (h.a(), h.b());
    if b.is_finite() {
        return h.m(b).h1;
    }
    if let Some((c, t)) = h.exact_tail() {
        return if t.h1 > 0.0 { f64::INFINITY } else { h.m(c).h1 };
    }
    if let Some(terms) = h.power_terms() {
        let s: f64 = terms.iter().map(|(_, c)| c.h1).sum();
        return if s > 0.0 { f64::INFINITY } else { 0.0 };
    }
    let v1 = h.m(a + 2f64.powi(40)).h1;
    let v2 = h.m(a + 2f64.powi(80)).h1;
    if v2 > v1 * (1.0 + 1e-9) {
        f64::INFINITY
    } else {
        v2
    }
}

/// `m₁⁻(x) = inf{t : m₁(t) ≥ x}` for `0 ≤ x < L`.
fn m1_inverse(h: &Hamiltonian, x: f64) -> f64 {
    let a = h.a();
    let pred = |t: f64| h.m(t).h1 >= x;
    let hi = if h.b().is_finite() {
        h.b()
    } else {
        let mut hi = a + 1.0;
        while !pred(hi) && hi - a < 1e300 {
            hi = a + 2.0 * (hi - a);
        }
        hi
    };
    inf_where(pred, a, hi)
}

/// The string `L = lim m₁`, `𝔪 = m₂ ∘ m₁⁻` associated with `H`.
///
/// Piecewise constant Hamiltonians give an exact piecewise linear mass
/// with a jump for every panel with `h₁ = 0`; other Hamiltonians give a
/// mass evaluated through `m₁⁻` by bisection.  The off-diagonal entry is
/// not used.
pub fn string_from_hamiltonian(h: &Hamiltonian) -> KreinString {
    if let Some(panels) = h.panels_until(h.b()) {
        let mut x = 0.0;
        let mut m2 = 0.0;
        let mut at = 0.0;
        let mut pieces: Vec<Piece> = Vec::new();
        for (s, e, hk) in panels {
            let len = e - s;
            if hk.h1 > 0.0 {
                pieces.push(Piece::linear(x, at, m2, hk.h2 / hk.h1));
                x += hk.h1 * len;
                m2 += hk.h2 * len;
                at = m2;
            } else {
                m2 += hk.h2 * len;
            }
        }
        if pieces.is_empty() {
            return KreinString::new(0.0, MonotoneFunction::callable(0.0, 0.0, |_| 0.0)).unwrap();
        }
        let mass = MonotoneFunction::from_pieces(pieces, x).expect("panel masses are monotone");
        return KreinString::new(x, mass).expect("panel strings are valid");
    }
    let length = m1_limit(h);
    if length == 0.0 {
        return KreinString::new(0.0, MonotoneFunction::callable(0.0, 0.0, |_| 0.0)).unwrap();
    }
    let hh = h.clone();
    let mass = MonotoneFunction::callable(0.0, length, move |x| {
        if x <= 0.0 {
            0.0
        } else {
            hh.m(m1_inverse(&hh, x)).h2
        }
    });
    KreinString::new(length, mass).expect("m₂ ∘ m₁⁻ vanishes at 0")
}

/// The trace-normed diagonal Hamiltonian on `[0, ∞)` of a string.
///
/// Piecewise linear masses give a piecewise constant `H`, with a
/// `diag(0, 1)` panel for each jump and after `L + 𝔪(L−)`.  Other masses
/// give a callable `H` with the exact primitive `diag(m̃⁻(t), t − m̃⁻(t))`.
pub fn hamiltonian_from_string(s: &KreinString) -> Hamiltonian {
    let length = s.length;
    let half_pi = Sym2::diag(0.0, 1.0);
    if length == 0.0 {
        return Hamiltonian::constant(0.0, half_pi).unwrap();
    }
    if let Some(p) = s.mass.pieces().filter(|_| s.mass.is_piecewise_linear()) {
        let mut breaks = alloc::vec![0.0];
        let mut values: Vec<Sym2> = Vec::new();
        let mut t = 0.0;
        let mut left = 0.0;
        for (k, q) in p.iter().enumerate() {
            if q.start >= length {
                break;
            }
            let slope = q.slope + if q.power == 1.0 { q.coef } else { 0.0 };
            let jump = q.base - left;
            if jump > 0.0 {
                t += jump;
                breaks.push(t);
                values.push(half_pi);
            }
            let next = p.get(k + 1).map_or(length, |r| r.start).min(length);
            let len = next - q.start;
            let d = 1.0 / (1.0 + slope);
            values.push(Sym2::diag(d, 1.0 - d));
            if len.is_infinite() {
                breaks.push(f64::INFINITY);
                break;
            }
            t += (1.0 + slope) * len;
            breaks.push(t);
            left = q.base + slope * len;
        }
        if length.is_finite() {
            values.push(half_pi);
            breaks.push(f64::INFINITY);
        }
        let mut b2: Vec<f64> = alloc::vec![breaks[0]];
        let mut v2: Vec<Sym2> = Vec::new();
        for (k, v) in values.iter().enumerate() {
            if breaks[k + 1] > *b2.last().unwrap() {
                if v2.last() == Some(v) {
                    *b2.last_mut().unwrap() = breaks[k + 1];
                } else {
                    v2.push(*v);
                    b2.push(breaks[k + 1]);
                }
            }
        }
        return Hamiltonian::piecewise(b2, v2).expect("string panels are valid");
    }
    let st = s.clone();
    let h = move |t: f64| {
        let x = st.m_tilde_inverse(t);
        // Inside a jump of m̃ the inverse is flat: m̃(x−) < t < m̃(x+).
        if x >= st.length || (st.m_tilde(x) - t).abs() > 1e-9 * t.max(1.0) {
            return Sym2::diag(0.0, 1.0);
        }
        let d = 1.0 / st.m_tilde.derivative(x);
        Sym2::diag(d, 1.0 - d)
    };
    let st2 = s.clone();
    let m = move |t: f64| {
        let x = st2.m_tilde_inverse(t);
        Sym2::diag(x, t - x)
    };
    let mut breaks = Vec::new();
    if let Some(p) = s.mass.pieces() {
        let mut left = 0.0;
        for (k, q) in p.iter().enumerate() {
            if q.base > left {
                breaks.push(q.start + left);
                breaks.push(q.start + q.base);
            }
            let next = p.get(k + 1).map_or(length, |r| r.start);
            if next.is_finite() {
                left = s.mass.left_limit(next);
            }
        }
    }
    let mut hc = Hamiltonian::callable(Interval::half_line(0.0), h, true).with_primitive(m);
    if length.is_finite() {
        let c = length + s.mass_end();
        breaks.push(c);
        hc = hc.with_constant_tail(c, half_pi);
    }
    hc.with_breaks(breaks)
}

/// `√w` in the closed upper half-plane.
fn sqrt_upper(w: C64) -> C64 {
    let z = w.sqrt();
    if z.im < 0.0 {
        -z
    } else {
        z
    }
}

/// `q_S(w) = q_H(√w)/√w` for `w ∉ [0, ∞)`, with `H` the diagonal
/// Hamiltonian of the string and the root taken in `ℂ⁺`.
pub fn q_string(s: &KreinString, w: C64, eps: f64) -> Result<CertifiedValue> {
    q_string_for(&hamiltonian_from_string(s), w, eps)
}

/// [`q_string`] for a given diagonal Hamiltonian.
pub fn q_string_for(h: &Hamiltonian, w: C64, eps: f64) -> Result<CertifiedValue> {
    if w.im == 0.0 && w.re >= 0.0 {
        return Err(Error::Domain(format!("q_S is not evaluated on [0, ∞) (w = {w})")));
    }
    let z = sqrt_upper(w);
    let n = z.norm();
    let v = weyl_coefficient(h, z, eps * n)?;
    Ok(CertifiedValue { value: v.value / z, radius: v.radius / n })
}

/// `[q/(2K), 2K/q]` with `K = (1+σ+2/q)/(1−σ)` at `q = 0.2`: the band for
/// `q_S(−y)/f⁻(1/y)`.
///
/// `|q_H(i√y)|/A(√y) ∈ [1/K, K]`, `A(√y)/√y = (2/q) f⁻(q²/(4y))`, and since
/// `f(x)/x = 𝔪(x)` is non-decreasing, `c f⁻(u) ≤ f⁻(cu) ≤ f⁻(u)` for
/// `c = q²/4 < 1`.
pub const KASAHARA_BAND: (f64, f64) = (0.1 / KASAHARA_K, 10.0 * KASAHARA_K);

/// `K` at `q = 0.2`: `σ = 0.5625`, `K = 11.5625/0.4375`.
const KASAHARA_K: f64 = 11.5625 / 0.4375;

/// The band of [`KASAHARA_BAND`] for another `q`.
pub fn kasahara_band(q: f64) -> Result<(f64, f64)> {
    let c = crate::estimator::envelope_constants(q, core::f64::consts::FRAC_PI_2)?;
    Ok((0.5 * q / c.abs, 2.0 * c.abs / q))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KasaharaEstimate {
    pub y: f64,
    /// `f⁻(1/y)`.
    pub f_inv: f64,
    /// Certified `q_S(−y)`.
    pub q_s: CertifiedValue,
    /// `q_S(−y)/f⁻(1/y)`.
    pub ratio: f64,
}

/// `f⁻(1/y)` and the ratio `q_S(−y)/f⁻(1/y)`.
pub fn kasahara_estimate(s: &KreinString, y: f64) -> Result<KasaharaEstimate> {
    kasahara_estimate_for(s, &hamiltonian_from_string(s), y)
}

/// [`kasahara_estimate`] with the string's Hamiltonian supplied.
pub fn kasahara_estimate_for(s: &KreinString, h: &Hamiltonian, y: f64) -> Result<KasaharaEstimate> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::ParameterOutOfRange { name: "y", value: y });
    }
    if !s.has_positive_mass_from_origin() {
        return Err(Error::Domain(alloc::string::String::from("need m(0+) = 0 and m > 0 on (0, L)")));
    }
    let f_inv = s.f_inverse(1.0 / y)?;
    let q_s = q_string_for(h, C64::new(-y, 0.0), 1e-9 * f_inv)?;
    Ok(KasaharaEstimate { y, f_inv, q_s, ratio: q_s.value.re / f_inv })
}

#[derive(Clone, Debug, PartialEq)]
pub struct KacStringVerdict {
    pub x0: f64,
    pub verdict: Convergence,
    pub study: EndpointStudy,
}

/// Whether `∫₀^{x₀} g(1/∫₀^x 𝔪) dx` converges, with `x₀ = min(1, L/2)`.
pub fn kac_string_criterion(s: &KreinString, g: &RegVarFunction) -> Result<KacStringVerdict> {
    if !s.has_positive_mass_from_origin() {
        return Err(Error::Domain(alloc::string::String::from("need m(0+) = 0 and m > 0 on (0, L)")));
    }
    let x0 = if s.length.is_finite() { (0.5 * s.length).min(1.0) } else { 1.0 };
    let study = endpoint_integral(
        |x| {
            let i = s.mass_integral(x).unwrap_or(f64::NAN);
            g.eval(1.0 / i)
        },
        0.0,
        x0,
    )?;
    Ok(KacStringVerdict { x0, verdict: study.verdict, study })
}

/// The three integrals bounding `∫_a^c F(m₁m₂) h₁` from both sides.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sandwich {
    /// `½ ∫₀^{2m₁(c)} F(∫₀^x 𝔪) dx`.
    pub lower: f64,
    /// `∫_a^c F((m₁m₂)(t)) h₁(t) dt`.
    pub middle: f64,
    /// `∫₀^{m₁(c)} F(∫₀^x 𝔪) dx`.
    pub upper: f64,
}

impl Sandwich {
    pub fn holds(&self, rel: f64) -> bool {
        self.lower <= self.middle * (1.0 + rel) && self.middle <= self.upper * (1.0 + rel)
    }
}

/// The sandwich for a non-increasing `F: (0, ∞) → (0, ∞)` and a cut point
/// `c`, using the string of `H`.  Requires `2 m₁(c) ≤ L`.
pub fn kac_sandwich(h: &Hamiltonian, big_f: impl Fn(f64) -> f64, c: f64) -> Result<Sandwich> {
    if !(c > h.a() && c < h.b()) {
        return Err(Error::Domain(format!("cut point {c} outside ({}, {})", h.a(), h.b())));
    }
    let s = string_from_hamiltonian(h);
    let m1c = h.m(c).h1;
    if 2.0 * m1c > s.length {
        return Err(Error::Domain(format!("2 m1(c) = {} exceeds the string length {}", 2.0 * m1c, s.length)));
    }
    let outer = |x: f64| big_f(s.mass_integral(x).unwrap_or(f64::NAN));
    let lower = 0.5 * integrate_left_singular(outer, 0.0, 2.0 * m1c, 0.0, 1e-10)?.value;
    let upper = integrate_left_singular(outer, 0.0, m1c, 0.0, 1e-10)?.value;
    let inner = |t: f64| {
        let m = h.m(t);
        big_f(m.h1 * m.h2) * h.h(t).h1
    };
    let middle = match h.panels_until(c) {
        Some(panels) => {
            let mut total = 0.0;
            for (k, (s0, e0, _)) in panels.iter().enumerate() {
                total += if k == 0 {
                    integrate_left_singular(inner, *s0, *e0, 0.0, 1e-10)?.value
                } else {
                    integrate(inner, *s0, *e0, 0.0, 1e-10)?.value
                };
            }
            total
        }
        None => integrate_left_singular(inner, h.a(), c, 0.0, 1e-10)?.value,
    };
    Ok(Sandwich { lower, middle, upper })
}

#[cfg(test)]
mod tests;
