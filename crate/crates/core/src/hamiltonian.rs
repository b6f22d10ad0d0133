//! Hamiltonians `H` on `[a, b)` and their primitives `M(t) = ∫_a^t H`.
//!
//! Entries are written `H = [[h1, h3], [h3, h2]]` and likewise
//! `M = [[m1, m3], [m3, m2]]`.  A [`Hamiltonian`] is an immutable, cheaply
//! clonable handle; transforms ([`Hamiltonian::rotate`],
//! [`Hamiltonian::invert_jhj`], [`Hamiltonian::reparameterize`]) wrap the
//! original without copying it.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex;
use num_traits::Float;

use crate::error::{Error, PrefixKind, Result};
use crate::linalg::{Mat2, Sym2, C64};
use crate::quad;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SymFn = Arc<dyn Fn(f64) -> Sym2 + Send + Sync>;

/// `[a, b)` with finite `a` and `b ∈ (a, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || b.is_nan() || !(a < b) {
            return Err(Error::InvalidInput(format!("interval [{a}, {b}) is empty or invalid")));
        }
        Ok(Interval { a, b })
    }

    pub fn half_line(a: f64) -> Self {
        Interval { a, b: f64::INFINITY }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.a && t < self.b
    }
}

/// Where the values of a primitive come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimitiveSource {
    Exact,
    Quadrature,
}

#[derive(Clone)]
enum Kind {
    /// Constant panels `[breaks[k], breaks[k+1])`; `cum[k] = M(breaks[k])`.
    Piecewise { breaks: Vec<f64>, values: Vec<Sym2>, cum: Vec<Sym2> },
    /// Panels `(β^{k−1}, β^k]`, `k ∈ ℤ`, on `(0, ∞)`; even `k` carries `even`.
    Alternating { beta: f64, even: Sym2, odd: Sym2 },
    /// `M(t) = Σ (t−a)^ρ C_ρ`, with `det M` expanded the same way.
    Powers { terms: Vec<(f64, Sym2)>, det_terms: Vec<(f64, f64)> },
    Callable { h: SymFn, m: Option<SymFn>, breaks: Vec<f64>, tail: Option<(f64, Sym2)> },
    /// `Q H Qᵀ`.
    Congruence { base: Hamiltonian, q: Mat2 },
    /// `(H∘φ)·φ'`, optionally with `φ⁻¹` to map panel breaks.
    Reparam { base: Hamiltonian, phi: ScalarFn, dphi: ScalarFn, inv: Option<ScalarFn> },
    /// `H` on `[c, b)` with the primitive restarted at `c`.
    Restrict { base: Hamiltonian },
}

/// An immutable Hamiltonian.  Clones share the underlying data.
#[derive(Clone)]
pub struct Hamiltonian {
    interval: Interval,
    kind: Arc<Kind>,
    limit_point: bool,
}

impl fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &*self.kind {
            Kind::Piecewise { .. } => "Piecewise",
            Kind::Alternating { .. } => "Alternating",
            Kind::Powers { .. } => "Powers",
            Kind::Callable { .. } => "Callable",
            Kind::Congruence { .. } => "Congruence",
            Kind::Reparam { .. } => "Reparam",
            Kind::Restrict { .. } => "Restrict",
        };
        f.debug_struct("Hamiltonian")
            .field("kind", &name)
            .field("interval", &self.interval)
            .field("limit_point", &self.limit_point)
            .finish()
    }
}

/// A leading interval on which one diagonal entry of `H` vanishes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndivisiblePrefix {
    pub kind: PrefixKind,
    pub start: f64,
    pub endpoint: f64,
    /// `∫ tr H` over the prefix.
    pub weight: f64,
}

impl IndivisiblePrefix {
    /// Weyl coefficient of the whole system from that of the remainder.
    pub fn compose(&self, z: C64, q_rest: C64) -> C64 {
        let l = self.weight;
        match self.kind {
            PrefixKind::TypeZero => {
                if q_rest.is_infinite() {
                    q_rest
                } else {
                    z * l + q_rest
                }
            }
            PrefixKind::TypeHalfPi => {
                let inv = if q_rest.is_infinite() { Complex::new(0.0, 0.0) } else { q_rest.inv() };
                -(z * l - inv).inv()
            }
        }
    }
}

/// Result of splitting off leading indivisible intervals.
#[derive(Clone, Debug)]
pub struct Split {
    pub prefixes: Vec<IndivisiblePrefix>,
    pub tail: Hamiltonian,
}

impl Split {
    pub fn prefix(&self) -> Option<&IndivisiblePrefix> {
        self.prefixes.first()
    }

    /// `q_H(z)` from `q_tail(z)`, applying the prefixes innermost first.
    pub fn compose(&self, z: C64, q_tail: C64) -> C64 {
        self.prefixes.iter().rev().fold(q_tail, |q, p| p.compose(z, q))
    }
}

const SPLIT_CAP: usize = 16;

fn check_psd(s: &Sym2, what: &str) -> Result<()> {
    if !s.is_finite() || !s.is_psd() {
        return Err(Error::InvalidInput(format!("{what}: {s:?} is not positive semidefinite")));
    }
    Ok(())
}

impl Hamiltonian {
    // ----- constructors -------------------------------------------------

    /// Constant panels.  `breaks` has one more entry than `values`; its last
    /// entry may be `+∞`.
    pub fn piecewise(breaks: Vec<f64>, values: Vec<Sym2>) -> Result<Self> {
        if breaks.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::InvalidInput(String::from("need n+1 breaks for n panels")));
        }
        for w in breaks.windows(2) {
            if !(w[0] < w[1]) || !w[0].is_finite() {
                return Err(Error::InvalidInput(format!("breaks not increasing at {}", w[0])));
            }
        }
        for (k, v) in values.iter().enumerate() {
            check_psd(v, &format!("panel {k}"))?;
        }
        let mut cum = Vec::with_capacity(values.len());
        let mut acc = Sym2::ZERO;
        for (k, v) in values.iter().enumerate() {
            cum.push(acc);
            if breaks[k + 1].is_finite() {
                acc += v.scale(breaks[k + 1] - breaks[k]);
            }
        }
        let a = breaks[0];
        let b = *breaks.last().unwrap();
        let last = values.last().unwrap();
        let limit_point = b.is_infinite() && last.trace() > 0.0;
        Ok(Hamiltonian {
            interval: Interval::new(a, b)?,
            kind: Arc::new(Kind::Piecewise { breaks, values, cum }),
            limit_point,
        })
    }

    /// `H ≡ h` on `[a, ∞)`.
    pub fn constant(a: f64, h: Sym2) -> Result<Self> {
        Self::piecewise(alloc::vec![a, f64::INFINITY], alloc::vec![h])
    }

    /// Geometric alternating pattern on `[0, ∞)`: `H = even` on
    /// `(β^{2n−1}, β^{2n}]` and `H = odd` on `(β^{2n}, β^{2n+1}]`.
    pub fn alternating(beta: f64, even: Sym2, odd: Sym2) -> Result<Self> {
        if !(beta > 1.0) || !beta.is_finite() {
            return Err(Error::InvalidInput(format!("pattern base {beta} must exceed 1")));
        }
        check_psd(&even, "even panels")?;
        check_psd(&odd, "odd panels")?;
        Ok(Hamiltonian {
            interval: Interval::half_line(0.0),
            kind: Arc::new(Kind::Alternating { beta, even, odd }),
            limit_point: even.trace() + odd.trace() > 0.0,
        })
    }

    /// Hamiltonian on `[a, ∞)` given by its primitive
    /// `M(t) = Σ (t−a)^ρ C_ρ` with `ρ > 0`.
    pub fn primitive_powers(a: f64, terms: Vec<(f64, Sym2)>) -> Result<Self> {
        let mut merged: Vec<(f64, Sym2)> = Vec::new();
        for (rho, c) in terms {
            if !(rho > 0.0) || !rho.is_finite() || !c.is_finite() {
                return Err(Error::InvalidInput(format!("power term ({rho}, {c:?})")));
            }
            match merged.iter_mut().find(|(r, _)| (*r - rho).abs() < 1e-14) {
                Some(e) => e.1 += c,
                None => merged.push((rho, c)),
            }
        }
        if merged.is_empty() {
            return Err(Error::InvalidInput(String::from("no power terms")));
        }
        merged.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut det_terms: Vec<(f64, f64)> = Vec::new();
        let mut scale = 0.0f64;
        for i in 0..merged.len() {
            for j in i..merged.len() {
                let (ri, ci) = merged[i];
                let (rj, cj) = merged[j];
                let (coef, mag) = if i == j {
                    (ci.det(), (ci.h1 * ci.h2).abs() + ci.h3 * ci.h3)
                } else {
                    let v = ci.h1 * cj.h2 + ci.h2 * cj.h1 - 2.0 * ci.h3 * cj.h3;
                    (v, (ci.h1 * cj.h2).abs() + (ci.h2 * cj.h1).abs() + 2.0 * (ci.h3 * cj.h3).abs())
                };
                scale = scale.max(mag);
                let e = ri + rj;
                match det_terms.iter_mut().find(|(x, _)| (*x - e).abs() < 1e-14) {
                    Some(d) => d.1 += coef,
                    None => det_terms.push((e, coef)),
                }
            }
        }
        det_terms.retain(|(_, c)| c.abs() > 1e-14 * scale);
        let h = Hamiltonian {
            interval: Interval::half_line(a),
            kind: Arc::new(Kind::Powers { terms: merged, det_terms }),
            limit_point: true,
        };
        // H = Σ ρ s^{ρ−1} C_ρ must be PSD; sample it over many decades.
        for k in -30..=30 {
            let s = 10f64.powf(k as f64 * 0.5);
            let hv = h.h(a + s);
            let n = hv.trace().abs().max(1e-300);
            if !hv.scale(1.0 / n).is_psd() {
                return Err(Error::InvalidInput(format!("H(a+{s:e}) = {hv:?} is not PSD")));
            }
        }
        Ok(h)
    }

    /// Hamiltonian given by evaluators for `H`; the primitive is computed by
    /// adaptive quadrature unless supplied with [`Hamiltonian::with_primitive`].
    pub fn callable(
        interval: Interval,
        h: impl Fn(f64) -> Sym2 + Send + Sync + 'static,
        limit_point: bool,
    ) -> Self {
        Hamiltonian {
            interval,
            kind: Arc::new(Kind::Callable { h: Arc::new(h), m: None, breaks: Vec::new(), tail: None }),
            limit_point,
        }
    }

    /// `H = diag(w, 1/p)`, the canonical system of `−(py')' = λwy`.
    pub fn from_sl(
        interval: Interval,
        w: impl Fn(f64) -> f64 + Send + Sync + 'static,
        p: impl Fn(f64) -> f64 + Send + Sync + 'static,
        limit_point: bool,
    ) -> Self {
        Self::callable(interval, move |t| Sym2::diag(w(t), 1.0 / p(t)), limit_point)
    }

    fn map_callable(self, f: impl FnOnce(&mut Option<SymFn>, &mut Vec<f64>, &mut Option<(f64, Sym2)>)) -> Self {
        let mut kind = (*self.kind).clone();
        if let Kind::Callable { m, breaks, tail, .. } = &mut kind {
            f(m, breaks, tail);
        }
        Hamiltonian { kind: Arc::new(kind), ..self }
    }

    /// Supply an exact primitive for a callable Hamiltonian.
    pub fn with_primitive(self, m: impl Fn(f64) -> Sym2 + Send + Sync + 'static) -> Self {
        self.map_callable(|slot, _, _| *slot = Some(Arc::new(m)))
    }

    /// Declare points where a callable `H` may be discontinuous.
    pub fn with_breaks(self, mut br: Vec<f64>) -> Self {
        br.sort_by(|x, y| x.partial_cmp(y).unwrap());
        self.map_callable(|_, slot, _| *slot = br)
    }

    /// Declare that a callable `H` equals `h` on `[c, ∞)`.
    pub fn with_constant_tail(self, c: f64, h: Sym2) -> Self {
        self.map_callable(|_, _, slot| *slot = Some((c, h)))
    }

    // ----- basic accessors ----------------------------------------------

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn a(&self) -> f64 {
        self.interval.a
    }

    pub fn b(&self) -> f64 {
        self.interval.b
    }

    /// Whether `tr M(t) → ∞` as `t → b`.
    pub fn is_limit_point(&self) -> bool {
        self.limit_point
    }

    /// `H(t)`, checking `t ∈ [a, b)`.
    pub fn eval_h(&self, t: f64) -> Result<Sym2> {
        if !self.interval.contains(t) {
            return Err(Error::Domain(format!("t = {t} outside [{}, {})", self.a(), self.b())));
        }
        Ok(self.h(t))
    }

    /// `M(t)`, checking `t ∈ [a, b]`.
    pub fn eval_m(&self, t: f64) -> Result<Sym2> {
        if !(t >= self.a() && t <= self.b()) || t.is_infinite() {
            return Err(Error::Domain(format!("t = {t} outside [{}, {}]", self.a(), self.b())));
        }
        Ok(self.m(t))
    }

    /// `H(t)` without a domain check.
    pub fn h(&self, t: f64) -> Sym2 {
        match &*self.kind {
            Kind::Piecewise { breaks, values, .. } => values[panel_index(breaks, t)],
            Kind::Alternating { beta, even, odd } => {
                if t <= 0.0 {
                    return Sym2::ZERO;
                }
                if geometric_panel(*beta, t) % 2 == 0 {
                    *even
                } else {
                    *odd
                }
            }
            Kind::Powers { terms, .. } => {
                let s = t - self.a();
                terms.iter().fold(Sym2::ZERO, |acc, (rho, c)| acc + c.scale(rho * s.powf(rho - 1.0)))
            }
            Kind::Callable { h, .. } => h(t),
            Kind::Congruence { base, q } => base.h(t).congruence(q),
            Kind::Reparam { base, phi, dphi, .. } => base.h(phi(t)).scale(dphi(t)),
            Kind::Restrict { base } => base.h(t),
        }
    }

    /// `M(t) = ∫_a^t H` without a domain check.
    pub fn m(&self, t: f64) -> Sym2 {
        self.m_with_error(t).0
    }

    /// `M(t)` together with an absolute error bound (zero for exact sources).
    pub fn m_with_error(&self, t: f64) -> (Sym2, f64) {
        let a = self.a();
        if t <= a {
            return (Sym2::ZERO, 0.0);
        }
        match &*self.kind {
            Kind::Piecewise { breaks, values, cum } => {
                let k = panel_index(breaks, t);
                (cum[k] + values[k].scale(t - breaks[k]), 0.0)
            }
            Kind::Alternating { beta, even, odd } => {
                let j = geometric_panel(*beta, t);
                let lo = beta.powi(j - 1);
                let hj = if j % 2 == 0 { *even } else { *odd };
                (alternating_at_power(*beta, j - 1, even, odd) + hj.scale(t - lo), 0.0)
            }
            Kind::Powers { terms, .. } => {
                let s = t - a;
                (terms.iter().fold(Sym2::ZERO, |acc, (rho, c)| acc + c.scale(s.powf(*rho))), 0.0)
            }
            Kind::Callable { h, m, breaks, tail } => {
                if let Some(m) = m {
                    return (m(t), 0.0);
                }
                let mut nodes: Vec<f64> = Vec::new();
                nodes.push(a);
                nodes.extend(breaks.iter().copied().filter(|&x| x > a && x < t));
                let (tail_start, tail_h) = match tail {
                    Some((c, th)) if *c < t => {
                        if *c > a {
                            nodes.push(*c);
                        }
                        (Some(c.max(a)), *th)
                    }
                    _ => (None, Sym2::ZERO),
                };
                let end = tail_start.unwrap_or(t);
                nodes.push(end);
                let (mut acc, mut err) = (Sym2::ZERO, 0.0);
                for (i, w) in nodes.windows(2).enumerate() {
                    if w[1] <= w[0] {
                        continue;
                    }
                    let (v, e) = integrate_sym(&**h, w[0], w[1], i == 0);
                    acc += v;
                    err += e;
                }
                if let Some(c) = tail_start {
                    acc += tail_h.scale(t - c);
                }
                (acc, err)
            }
            Kind::Congruence { base, q } => {
                let (m, e) = base.m_with_error(t);
                (m.congruence(q), e * q.max_abs() * q.max_abs() * 4.0)
            }
            Kind::Reparam { base, phi, .. } => base.m_with_error(phi(t)),
            Kind::Restrict { base } => {
                let (m0, e0) = base.m_with_error(a);
                let (m1, e1) = base.m_with_error(t);
                (base.increment(a, t).unwrap_or(m1 - m0), e0 + e1)
            }
        }
    }

    /// Where the values of [`Hamiltonian::m`] come from.
    pub fn primitive_source(&self) -> PrimitiveSource {
        match &*self.kind {
            Kind::Piecewise { .. } | Kind::Alternating { .. } | Kind::Powers { .. } => PrimitiveSource::Exact,
            Kind::Callable { m, .. } => {
                if m.is_some() {
                    PrimitiveSource::Exact
                } else {
                    PrimitiveSource::Quadrature
                }
            }
            Kind::Congruence { base, .. } | Kind::Reparam { base, .. } | Kind::Restrict { base } => {
                base.primitive_source()
            }
        }
    }

    /// `M(t1) − M(t0)` computed without cancellation where the structure
    /// allows it; `None` falls back to the difference of primitives.
    fn increment(&self, t0: f64, t1: f64) -> Option<Sym2> {
        match &*self.kind {
            Kind::Piecewise { breaks, values, .. } => {
                let mut k = panel_index(breaks, t0);
                let mut acc = Sym2::ZERO;
                let mut s = t0;
                loop {
                    let e = breaks[k + 1].min(t1);
                    acc += values[k].scale(e - s);
                    if e >= t1 || k + 1 >= values.len() {
                        break;
                    }
                    s = e;
                    k += 1;
                }
                Some(acc)
            }
            Kind::Alternating { .. } => {
                let c = self.constant_on(t0, t1)?;
                Some(c.scale(t1 - t0))
            }
            Kind::Powers { terms, .. } => {
                let (s0, s1) = (t0 - self.a(), t1 - self.a());
                Some(terms.iter().fold(Sym2::ZERO, |acc, (rho, c)| {
                    acc + c.scale(s1.powf(*rho) - s0.max(0.0).powf(*rho))
                }))
            }
            Kind::Congruence { base, q } => base.increment(t0, t1).map(|m| m.congruence(q)),
            Kind::Restrict { base } => base.increment(t0, t1),
            Kind::Reparam { base, phi, .. } => base.increment(phi(t0), phi(t1)),
            Kind::Callable { m: None, .. } => {
                let (v, _) = integrate_sym(&|t| self.h(t), t0, t1, false);
                Some(v)
            }
            Kind::Callable { .. } => None,
        }
    }

    /// `∫_{t0}^{t1} H`.
    pub fn integral(&self, t0: f64, t1: f64) -> Sym2 {
        self.increment(t0, t1).unwrap_or_else(|| self.m(t1) - self.m(t0))
    }

    /// `det M(t)`, expanded exactly for power primitives.
    pub fn det_m(&self, t: f64) -> f64 {
        match &*self.kind {
            Kind::Powers { det_terms, .. } => {
                let s = t - self.a();
                if s <= 0.0 {
                    return 0.0;
                }
                det_terms.iter().map(|(e, c)| c * s.powf(*e)).sum()
            }
            Kind::Congruence { base, q } => {
                let d = q.det();
                d * d * base.det_m(t)
            }
            Kind::Reparam { base, phi, .. } => base.det_m(phi(t)),
            _ => self.m(t).det(),
        }
    }

    pub fn tr_m(&self, t: f64) -> f64 {
        self.m(t).trace()
    }

    /// Smallest point `> t` where `H` may jump, if known.
    pub fn next_break(&self, t: f64) -> Option<f64> {
        match &*self.kind {
            Kind::Piecewise { breaks, .. } => {
                let k = breaks.partition_point(|&x| x <= t);
                breaks.get(k).copied().filter(|x| x.is_finite())
            }
            Kind::Alternating { beta, .. } => {
                if t <= 0.0 {
                    None
                } else {
                    Some(beta.powi(geometric_panel(*beta, t)))
                        .map(|x| if x > t { x } else { x * beta })
                }
            }
            Kind::Powers { .. } => None,
            Kind::Callable { breaks, tail, .. } => {
                let k = breaks.partition_point(|&x| x <= t);
                let nb = breaks.get(k).copied();
                let tc = tail.map(|(c, _)| c).filter(|&c| c > t);
                match (nb, tc) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, y) => x.or(y),
                }
            }
            Kind::Congruence { base, .. } | Kind::Restrict { base } => base.next_break(t),
            Kind::Reparam { base, phi, inv, .. } => {
                let inv = inv.as_ref()?;
                base.next_break(phi(t)).map(|x| inv(x)).filter(|&u| u > t)
            }
        }
    }

    /// `Some(H)` if `H` is constant on `[t0, t1]` (up to a null set).
    pub fn constant_on(&self, t0: f64, t1: f64) -> Option<Sym2> {
        match &*self.kind {
            Kind::Piecewise { breaks, values, .. } => {
                let k = panel_index(breaks, t0);
                if t1 <= breaks[k + 1] {
                    Some(values[k])
                } else {
                    None
                }
            }
            Kind::Alternating { beta, even, odd } => {
                if t0 <= 0.0 {
                    return None;
                }
                // Panels are (β^{k−1}, β^k]; [t0, t1] may touch a left endpoint.
                let k = geometric_panel(*beta, t1);
                if t0 >= beta.powi(k - 1) {
                    Some(if k % 2 == 0 { *even } else { *odd })
                } else {
                    None
                }
            }
            Kind::Powers { terms, .. } => {
                if terms.iter().all(|(r, _)| *r == 1.0) {
                    Some(terms.iter().fold(Sym2::ZERO, |acc, (_, c)| acc + *c))
                } else {
                    None
                }
            }
            Kind::Callable { tail: Some((c, h)), .. } if t0 >= *c => Some(*h),
            Kind::Callable { .. } => None,
            Kind::Congruence { base, q } => base.constant_on(t0, t1).map(|h| h.congruence(q)),
            Kind::Restrict { base } => base.constant_on(t0, t1),
            Kind::Reparam { .. } => None,
        }
    }

    /// `(c, h)` with `H ≡ h` on `[c, ∞)`, when `b = ∞` and this is known.
    pub fn exact_tail(&self) -> Option<(f64, Sym2)> {
        if self.b().is_finite() {
            return None;
        }
        match &*self.kind {
            Kind::Piecewise { breaks, values, .. } => {
                Some((breaks[breaks.len() - 2], *values.last().unwrap()))
            }
            Kind::Powers { .. } => self.constant_on(self.a(), self.a() + 1.0).map(|h| (self.a(), h)),
            Kind::Callable { tail, .. } => *tail,
            Kind::Congruence { base, q } => base.exact_tail().map(|(c, h)| (c, h.congruence(q))),
            Kind::Restrict { base } => base.exact_tail().map(|(c, h)| (c.max(self.a()), h)),
            Kind::Alternating { .. } | Kind::Reparam { .. } => None,
        }
    }

    /// `(ρ, C_ρ)` with `M(t) = Σ (t−a)^ρ C_ρ`, when the primitive is a
    /// power sum.
    pub fn power_terms(&self) -> Option<Vec<(f64, Sym2)>> {
        match &*self.kind {
            Kind::Powers { terms, .. } => Some(terms.clone()),
            Kind::Congruence { base, q } => {
                base.power_terms().map(|v| v.into_iter().map(|(r, c)| (r, c.congruence(q))).collect())
            }
            _ => None,
        }
    }

    /// `(e, c)` with `det M(t) = Σ c (t−a)^e`, alongside [`Hamiltonian::power_terms`].
    pub fn det_power_terms(&self) -> Option<Vec<(f64, f64)>> {
        match &*self.kind {
            Kind::Powers { det_terms, .. } => Some(det_terms.clone()),
            Kind::Congruence { base, q } => {
                let d = q.det();
                base.det_power_terms().map(|v| v.into_iter().map(|(e, c)| (e, c * d * d)).collect())
            }
            _ => None,
        }
    }

    /// Constant panels `(start, end, H)` covering `[a, t]`, when `H` is
    /// piecewise constant with finitely many panels there.
    pub fn panels_until(&self, t: f64) -> Option<Vec<(f64, f64, Sym2)>> {
        match &*self.kind {
            Kind::Piecewise { breaks, values, .. } => {
                let mut out = Vec::new();
                for (k, v) in values.iter().enumerate() {
                    let (s, e) = (breaks[k], breaks[k + 1].min(t));
                    if e > s {
                        out.push((s, e, *v));
                    }
                    if breaks[k + 1] >= t {
                        break;
                    }
                }
                Some(out)
            }
            Kind::Congruence { base, q } => base
                .panels_until(t)
                .map(|v| v.into_iter().map(|(s, e, h)| (s, e, h.congruence(q))).collect()),
            _ => None,
        }
    }

    // ----- transforms -----------------------------------------------------

    /// `Q H Qᵀ`; nested congruences are composed into one.
    pub fn congruence(&self, q: Mat2) -> Hamiltonian {
        let (base, q) = match &*self.kind {
            Kind::Congruence { base, q: q0 } => (base.clone(), q * *q0),
            _ => (self.clone(), q),
        };
        Hamiltonian {
            interval: self.interval,
            kind: Arc::new(Kind::Congruence { base, q }),
            limit_point: self.limit_point,
        }
    }

    /// `Q H Qᵀ` with `Q = [[sin φ, −cos φ], [cos φ, sin φ]]`.
    pub fn rotate(&self, phi: f64) -> Hamiltonian {
        self.congruence(rotation_matrix(phi))
    }

    /// `−JHJ = [[h2, −h3], [−h3, h1]]`, whose Weyl coefficient is `−1/q_H`.
    pub fn invert_jhj(&self) -> Hamiltonian {
        self.congruence(Mat2::J)
    }

    /// `(H∘φ)·φ'` on `[ã, b̃)` for an increasing bijection `φ: [ã, b̃) → [a, b)`.
    ///
    /// `φ` is sampled at 257 points to reject decreasing maps.  Supplying
    /// `φ⁻¹` lets the solver see the panel breaks of `H`.
    pub fn reparameterize(
        &self,
        domain: Interval,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dphi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        inverse: Option<ScalarFn>,
    ) -> Result<Hamiltonian> {
        let hi = if domain.b.is_finite() { domain.b } else { domain.a + 1e6 };
        let mut prev = phi(domain.a);
        for k in 1..=256 {
            let u = domain.a + (hi - domain.a) * (k as f64 / 256.0).powi(3);
            let u = if u >= domain.b { domain.a + (domain.b - domain.a) * (1.0 - 1e-12) } else { u };
            let v = phi(u);
            if !(v >= prev) {
                return Err(Error::NotMonotone { at: u });
            }
            prev = v;
        }
        Ok(Hamiltonian {
            interval: domain,
            kind: Arc::new(Kind::Reparam {
                base: self.clone(),
                phi: Arc::new(phi),
                dphi: Arc::new(dphi),
                inv: inverse,
            }),
            limit_point: self.limit_point,
        })
    }

    /// Reparameterisation with `tr H̃ ≡ 1`: `φ` is the inverse of
    /// `t ↦ tr M(t)`, found by bisection.
    pub fn trace_normalize(&self) -> Result<Hamiltonian> {
        let base = self.clone();
        let total = if self.b().is_finite() { self.tr_m(self.b()) } else { f64::INFINITY };
        let b0 = base.clone();
        let phi = move |u: f64| trace_inverse(&b0, u);
        let b1 = base.clone();
        let dphi = move |u: f64| {
            let t = trace_inverse(&b1, u);
            let tr = b1.h(t).trace();
            if tr > 0.0 {
                1.0 / tr
            } else {
                0.0
            }
        };
        let b2 = base.clone();
        let inv: ScalarFn = Arc::new(move |t: f64| b2.tr_m(t));
        self.reparameterize(Interval::new(0.0, total)?, phi, dphi, Some(inv))
    }

    /// `H` restricted to `[c, b)`, with the primitive restarted at `c`.
    pub fn restrict(&self, c: f64) -> Result<Hamiltonian> {
        if !(c >= self.a() && c < self.b()) {
            return Err(Error::Domain(format!("restriction point {c} outside [{}, {})", self.a(), self.b())));
        }
        if c == self.a() {
            return Ok(self.clone());
        }
        let base = match &*self.kind {
            Kind::Restrict { base } => base.clone(),
            _ => self.clone(),
        };
        Ok(Hamiltonian {
            interval: Interval::new(c, self.b())?,
            kind: Arc::new(Kind::Restrict { base }),
            limit_point: self.limit_point,
        })
    }

    // ----- indivisible prefixes -------------------------------------------

    /// The maximal interval `[from, e)` on which `h2 ≡ 0` or `h1 ≡ 0`.
    pub fn leading_prefix(&self, from: f64) -> Result<Option<IndivisiblePrefix>> {
        let exact = self.primitive_source() == PrimitiveSource::Exact && !matches!(&*self.kind, Kind::Callable { .. });
        let entry = |s: &Sym2, k: PrefixKind| match k {
            PrefixKind::TypeZero => s.h2,
            PrefixKind::TypeHalfPi => s.h1,
        };
        let vanishing = |inc: &Sym2, len: f64, k: PrefixKind| {
            let v = entry(inc, k);
            if exact {
                v <= 1e-14 * inc.trace()
            } else {
                v <= 1e-12 * len
            }
        };

        // Panel walk while H is piecewise constant.
        let mut t = from;
        let mut kind: Option<PrefixKind> = None;
        loop {
            let nb = self.next_break(t).unwrap_or(self.b());
            let Some(c) = self.constant_on(t, nb) else { break };
            if c.trace() > 0.0 {
                let len = nb - t;
                let inc = if len.is_finite() { c.scale(len) } else { c };
                let this = [PrefixKind::TypeZero, PrefixKind::TypeHalfPi]
                    .into_iter()
                    .find(|&k| vanishing(&inc, len.min(1.0), k));
                match (kind, this) {
                    (None, None) => return Ok(None),
                    (None, Some(k)) => kind = Some(k),
                    (Some(k0), Some(k)) if k0 == k => {}
                    (Some(k0), _) => return self.finish_prefix(from, t, k0),
                }
            }
            if !nb.is_finite() || nb >= self.b() {
                return match kind {
                    Some(_) => Err(Error::NotSupported(String::from(
                        "Hamiltonian is indivisible on its whole interval",
                    ))),
                    None => Ok(None),
                };
            }
            t = nb;
        }
        // The walk reached a region where H is not piecewise constant.
        match kind {
            Some(k) if self.vanishes_near(t, k, &vanishing) => self.generic_prefix_end(from, t, k, &vanishing),
            Some(k) => self.finish_prefix(from, t, k),
            None => {
                for k in [PrefixKind::TypeZero, PrefixKind::TypeHalfPi] {
                    if self.vanishes_near(t, k, &vanishing) {
                        return self.generic_prefix_end(from, t, k, &vanishing);
                    }
                }
                Ok(None)
            }
        }
    }

    fn vanishes_near(&self, t: f64, k: PrefixKind, vanishing: &impl Fn(&Sym2, f64, PrefixKind) -> bool) -> bool {
        let span = if self.b().is_finite() { self.b() - t } else { 1.0 + t.abs() };
        let d = (span * 1e-9).max(1e-300);
        let inc = self.integral(t, t + d);
        inc.trace() > 0.0 && vanishing(&inc, d, k)
    }

    /// The integral test on `[from, t]` together with a pointwise test at
    /// `t`, so that a jump the quadrature nodes straddle is not missed.
    fn vanishing_up_to(
        &self,
        from: f64,
        t: f64,
        k: PrefixKind,
        vanishing: &impl Fn(&Sym2, f64, PrefixKind) -> bool,
    ) -> bool {
        let h = self.h(t);
        let v = match k {
            PrefixKind::TypeZero => h.h2,
            PrefixKind::TypeHalfPi => h.h1,
        };
        v <= 1e-12 * h.trace() && vanishing(&self.integral(from, t), t - from, k)
    }

    fn generic_prefix_end(
        &self,
        from: f64,
        start: f64,
        k: PrefixKind,
        vanishing: &impl Fn(&Sym2, f64, PrefixKind) -> bool,
    ) -> Result<Option<IndivisiblePrefix>> {
        let span = if self.b().is_finite() { self.b() - start } else { 1.0 + start.abs() };
        let mut lo = start;
        let mut d = span * 1e-9;
        let mut hi = f64::NAN;
        for _ in 0..2000 {
            let t = start + d;
            if t >= self.b() {
                break;
            }
            if self.vanishing_up_to(from, t, k, vanishing) {
                lo = t;
                d *= 2.0;
            } else {
                hi = t;
                break;
            }
        }
        if hi.is_nan() {
            return Err(Error::NotSupported(String::from("Hamiltonian is indivisible on its whole interval")));
        }
        for _ in 0..200 {
            if hi - lo <= 1e-14 * hi.abs().max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.vanishing_up_to(from, mid, k, vanishing) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Snap to a declared break if one is this close.
        let mut e = lo;
        if let Some(nb) = self.next_break(lo - 1e-12 * lo.abs().max(1.0)) {
            if (nb - lo).abs() <= 1e-10 * lo.abs().max(1.0) {
                e = nb;
            }
        }
        self.finish_prefix(from, e, k)
    }

    fn finish_prefix(&self, from: f64, e: f64, k: PrefixKind) -> Result<Option<IndivisiblePrefix>> {
        let weight = self.integral(from, e).trace();
        Ok(Some(IndivisiblePrefix { kind: k, start: from, endpoint: e, weight }))
    }

    /// Split off leading indivisible intervals of type `0` (`h2 ≡ 0`) and
    /// `π/2` (`h1 ≡ 0`).  Alternating prefixes are followed up to 16 times.
    pub fn split_indivisible(&self) -> Result<Split> {
        let mut prefixes = Vec::new();
        let mut start = self.a();
        loop {
            match self.leading_prefix(start)? {
                Some(p) => {
                    if prefixes.len() >= SPLIT_CAP {
                        return Err(Error::NotSupported(format!(
                            "more than {SPLIT_CAP} alternating indivisible prefixes"
                        )));
                    }
                    start = p.endpoint;
                    prefixes.push(p);
                }
                None => break,
            }
        }
        let tail = self.restrict(start)?;
        Ok(Split { prefixes, tail })
    }

    // ----- rotation of the leading direction -----------------------------

    /// The limit `c = lim_{t→a} M(t)/tr M(t)`, which must be rank one, and
    /// the angle `φ ∈ (0, π)` with `ξ_φ ξ_φᵀ = c`.
    pub fn derive_rotation(&self) -> Result<(Sym2, f64)> {
        let a = self.a();
        let s0 = if self.b().is_finite() { 0.5 * (self.b() - a) } else { 1.0 };
        let sample = |s: f64| {
            let m = self.m(a + s);
            m.scale(1.0 / m.trace())
        };
        let c = sample(s0 * 1e-13);
        let c_prev = sample(s0 * 1e-12);
        if (c - c_prev).max_abs() > 1e-6 {
            return Err(Error::InconclusiveNearEndpoint(format!(
                "M/tr M still moving near a: {c_prev:?} vs {c:?}"
            )));
        }
        if !c.is_finite() {
            return Err(Error::NoRankOneLimit { defect: f64::NAN });
        }
        let defect = c.h1 * c.h2 - c.h3 * c.h3;
        if defect.abs() > 1e-6 {
            return Err(Error::NoRankOneLimit { defect });
        }
        if !(c.h2 > 1e-12) {
            return Err(Error::NotSupported(String::from("limit direction is of type 0")));
        }
        let sin = c.h2.sqrt();
        let cos = c.h3 / sin;
        Ok((c, sin.atan2(cos)))
    }

    /// Check the structural invariants at `samples` points (plus `a`).
    pub fn validate(&self, samples: &[f64]) -> Result<()> {
        let mut prev: Option<(f64, Sym2, f64)> = None;
        let mut sorted: Vec<f64> = samples.iter().copied().filter(|&t| self.interval.contains(t)).collect();
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for &t in &sorted {
            let h = self.h(t);
            let scale = h.trace().abs().max(1e-300);
            if !h.scale(1.0 / scale).is_psd() {
                return Err(Error::InvalidInput(format!("H({t}) = {h:?} not PSD")));
            }
            let m = self.m(t);
            let tol = 1e-12 * (1.0 + m.h1 * m.h2);
            if m.h3 * m.h3 > m.h1 * m.h2 + tol {
                return Err(Error::InvalidInput(format!("M({t}) not PSD")));
            }
            let ratio = if m.h2 > 0.0 { self.det_m(t) / m.h2 } else { 0.0 };
            if let Some((t0, m0, r0)) = prev {
                let slack = 1e-9 * (1.0 + m.trace());
                if m.h1 + slack < m0.h1 || m.h2 + slack < m0.h2 {
                    return Err(Error::InvalidInput(format!("M not non-decreasing on [{t0}, {t}]")));
                }
                if m.h2 > 0.0 && m0.h2 > 0.0 && ratio + 1e-9 * (1.0 + ratio.abs()) < r0 {
                    return Err(Error::InvalidInput(format!("det M/m2 decreases on [{t0}, {t}]")));
                }
            }
            prev = Some((t, m, ratio));
        }
        Ok(())
    }
}

/// `Q = [[sin φ, −cos φ], [cos φ, sin φ]]`.
pub fn rotation_matrix(phi: f64) -> Mat2 {
    let (s, c) = phi.sin_cos();
    Mat2::new(s, -c, c, s)
}

fn panel_index(breaks: &[f64], t: f64) -> usize {
    let k = breaks.partition_point(|&x| x <= t);
    k.saturating_sub(1).min(breaks.len() - 2)
}

/// The `k` with `t ∈ (β^{k−1}, β^k]`.
fn geometric_panel(beta: f64, t: f64) -> i32 {
    let mut k = (t.ln() / beta.ln()).ceil() as i32;
    while beta.powi(k - 1) >= t {
        k -= 1;
    }
    while beta.powi(k) < t {
        k += 1;
    }
    k
}

/// `M(β^j) = β/(β+1)·(β^j H_{p(j)} + β^{j−1} H_{p(j−1)})`.
fn alternating_at_power(beta: f64, j: i32, even: &Sym2, odd: &Sym2) -> Sym2 {
    let pick = |k: i32| if k % 2 == 0 { *even } else { *odd };
    let f = beta / (beta + 1.0);
    (pick(j).scale(beta.powi(j)) + pick(j - 1).scale(beta.powi(j - 1))).scale(f)
}

fn integrate_sym(h: &dyn Fn(f64) -> Sym2, t0: f64, t1: f64, singular_left: bool) -> (Sym2, f64) {
    let mut out = [0.0; 3];
    let mut err = 0.0;
    for (i, slot) in out.iter_mut().enumerate() {
        let f = |t: f64| {
            let s = h(t);
            [s.h1, s.h2, s.h3][i]
        };
        let est = if singular_left {
            quad::integrate_left_singular(f, t0, t1, 1e-15, 1e-13)
        } else {
            quad::integrate(f, t0, t1, 1e-15, 1e-13)
        };
        match est {
            Ok(e) => {
                *slot = e.value;
                err += e.error;
            }
            Err(Error::Quadrature { achieved, .. }) => {
                *slot = f64::NAN;
                err = err.max(achieved);
            }
            Err(_) => *slot = f64::NAN,
        }
    }
    (Sym2::new(out[0], out[1], out[2]), err)
}

fn trace_inverse(h: &Hamiltonian, u: f64) -> f64 {
    let a = h.a();
    if u <= 0.0 {
        return a;
    }
    let mut hi = a + 1.0;
    while h.tr_m(hi) < u && hi < h.b() {
        hi = a + 2.0 * (hi - a);
        if !hi.is_finite() {
            break;
        }
    }
    let hi = hi.min(h.b());
    quad::bisect_increasing(|t| h.tr_m(t), a, a, hi, u, 1e-15)
}

/// `M(t)` at `t` with its error, checked against a tolerance.
pub fn primitive_checked(h: &Hamiltonian, t: f64, tol: f64) -> Result<Sym2> {
    let (m, e) = h.m_with_error(t);
    if !m.is_finite() || e > tol * (1.0 + m.max_abs()) {
        return Err(Error::Quadrature { achieved: e, requested: tol });
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: Sym2, b: Sym2, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn identity_h_and_m() {
        let h = Hamiltonian::constant(0.0, Sym2::IDENTITY).unwrap();
        assert_eq!(h.eval_h(3.0).unwrap(), Sym2::IDENTITY);
        assert_eq!(h.m(2.5), Sym2::diag(2.5, 2.5));
        assert!(matches!(h.eval_h(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn alternating_membership_matches_loop_oracle() {
        let plus = Sym2::dyad(PI / 4.0);
        let minus = Sym2::dyad(-PI / 4.0);
        let h = Hamiltonian::alternating(2.0, plus, minus).unwrap();
        // Oracle: walk the dyadic panels (2^{k-1}, 2^k] upwards from 2^-60.
        let oracle = |t: f64| {
            let mut k = -60i32;
            while 2f64.powi(k) < t {
                k += 1;
            }
            k.rem_euclid(2) == 0
        };
        for &t in &[0.75, 1.0, 1.5, 2.0, 3.0, 0.3, 1e-5, 7.9, 100.0] {
            let want = if oracle(t) { plus } else { minus };
            assert_eq!(h.h(t), want, "t = {t}");
        }
        assert_eq!(h.h(0.75), plus);
        // Primitive: m1 = t cos²φ, m2 = t sin²φ.
        for &t in &[0.1, 0.75, 1.0, 5.5, 1e3] {
            let m = h.m(t);
            assert!((m.h1 - t / 2.0).abs() < 1e-12 * t);
            assert!((m.h2 - t / 2.0).abs() < 1e-12 * t);
        }
    }

    #[test]
    fn alternating_primitive_matches_panel_sum() {
        let even = Sym2::new(1.0, 0.2, 0.3);
        let odd = Sym2::new(0.1, 2.0, -0.2);
        let h = Hamiltonian::alternating(3.0, even, odd).unwrap();
        for &t in &[0.01, 0.5, 1.0, 2.0, 9.0, 10.0, 50.0] {
            let mut acc = Sym2::ZERO;
            for k in -80..10 {
                let lo = 3f64.powi(k - 1);
                let hi = 3f64.powi(k).min(t);
                if hi > lo {
                    acc += (if k % 2 == 0 { even } else { odd }).scale(hi - lo);
                }
            }
            assert!(close(h.m(t), acc, 1e-12 * t), "t = {t}");
        }
    }

    #[test]
    fn example_powers_primitive_and_det() {
        let h = Hamiltonian::primitive_powers(
            0.0,
            alloc::vec![(1.0, Sym2::new(4.0, 1.0, 2.0)), (2.0, Sym2::new(1.0, 1.0, 1.0))],
        )
        .unwrap();
        for &t in &[1e-6, 0.3, 1.0, 7.0] {
            let m = h.m(t);
            assert!(close(m, Sym2::new(4.0 * t + t * t, t + t * t, 2.0 * t + t * t), 1e-12 * (1.0 + t * t)));
            assert!((h.det_m(t) - t.powi(3)).abs() <= 1e-14 * t.powi(3));
        }
    }

    #[test]
    fn callable_primitive_matches_high_order_oracle() {
        let h = Hamiltonian::callable(Interval::half_line(0.0), |t| Sym2::diag(2.0 * t, 1.0), true);
        assert!((h.m(1.0).h1 - 1.0).abs() < 1e-12);
        assert_eq!(h.primitive_source(), PrimitiveSource::Quadrature);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rule = quad::gauss_legendre(40);
        for _ in 0..20 {
            let t: f64 = rng.gen_range(0.01..20.0);
            let oracle: f64 = rule.iter().map(|(x, w)| w * 0.5 * t * 2.0 * (0.5 * t * (x + 1.0))).sum();
            assert!((h.m(t).h1 - oracle).abs() < 1e-12 * (1.0 + oracle));
            assert!((h.m(t).h2 - t).abs() < 1e-12 * (1.0 + t));
        }
    }

    #[test]
    fn split_type_zero_prefix() {
        let h = Hamiltonian::piecewise(
            alloc::vec![0.0, 1.0, f64::INFINITY],
            alloc::vec![Sym2::diag(3.0, 0.0), Sym2::IDENTITY],
        )
        .unwrap();
        let s = h.split_indivisible().unwrap();
        let p = s.prefix().unwrap();
        assert_eq!(p.kind, PrefixKind::TypeZero);
        assert_eq!(p.endpoint, 1.0);
        assert_eq!(p.weight, 3.0);
        assert_eq!(s.tail.a(), 1.0);
        assert_eq!(s.tail.m(2.0), Sym2::diag(1.0, 1.0));
    }

    #[test]
    fn split_type_half_pi_prefix_callable() {
        let h = Hamiltonian::callable(
            Interval::half_line(0.0),
            |t| if t < 1.0 { Sym2::diag(0.0, 1.0) } else { Sym2::IDENTITY },
            true,
        );
        let s = h.split_indivisible().unwrap();
        let p = s.prefix().unwrap();
        assert_eq!(p.kind, PrefixKind::TypeHalfPi);
        assert!((p.endpoint - 1.0).abs() < 1e-11, "{p:?}");
        assert!((p.weight - 1.0).abs() < 1e-10);
    }

    #[test]
    fn no_prefix_for_positive_diagonal() {
        let h = Hamiltonian::constant(0.0, Sym2::new(2.0, 1.0, 0.5)).unwrap();
        assert!(h.split_indivisible().unwrap().prefixes.is_empty());
        let h = Hamiltonian::callable(Interval::half_line(0.0), |t| Sym2::diag(1.0 + t, 2.0), true);
        assert!(h.split_indivisible().unwrap().prefixes.is_empty());
    }

    #[test]
    fn alternating_prefixes_capped() {
        let mut breaks = alloc::vec![0.0];
        let mut vals = alloc::vec![];
        for k in 0..40 {
            breaks.push(k as f64 + 1.0);
            vals.push(if k % 2 == 0 { Sym2::diag(1.0, 0.0) } else { Sym2::diag(0.0, 1.0) });
        }
        breaks.push(f64::INFINITY);
        vals.push(Sym2::IDENTITY);
        let h = Hamiltonian::piecewise(breaks, vals).unwrap();
        assert!(matches!(h.split_indivisible(), Err(Error::NotSupported(_))));
    }

    #[test]
    fn two_prefixes_compose() {
        let h = Hamiltonian::piecewise(
            alloc::vec![0.0, 1.0, 3.0, f64::INFINITY],
            alloc::vec![Sym2::diag(1.0, 0.0), Sym2::diag(0.0, 2.0), Sym2::IDENTITY],
        )
        .unwrap();
        let s = h.split_indivisible().unwrap();
        assert_eq!(s.prefixes.len(), 2);
        assert_eq!(s.prefixes[1].kind, PrefixKind::TypeHalfPi);
        assert_eq!(s.prefixes[1].weight, 4.0);
        let z = Complex::new(0.0, 1.0);
        let q = s.compose(z, Complex::new(0.0, 1.0));
        let inner = -(z * 4.0 - Complex::new(0.0, 1.0).inv()).inv();
        assert!((q - (z + inner)).norm() < 1e-15);
    }

    #[test]
    fn rotation_of_example_powers() {
        let h = Hamiltonian::primitive_powers(
            0.0,
            alloc::vec![(1.0, Sym2::new(4.0, 1.0, 2.0)), (2.0, Sym2::new(1.0, 1.0, 1.0))],
        )
        .unwrap();
        let (c, phi) = h.derive_rotation().unwrap();
        assert!(close(c, Sym2::new(0.8, 0.2, 0.4), 1e-9));
        assert!((1.0 / phi.tan() - 2.0).abs() < 1e-9);
        let r = h.rotate(phi);
        for &t in &[1e-3, 0.5, 2.0] {
            let want = Sym2::new(t * t / 5.0, 5.0 * t + 9.0 * t * t / 5.0, -3.0 * t * t / 5.0);
            assert!(close(r.m(t), want, 1e-8 * (1.0 + t * t)), "{:?}", r.m(t));
            assert!((r.det_m(t) - h.det_m(t)).abs() < 1e-12 * t.powi(3));
            assert!((r.tr_m(t) - h.tr_m(t)).abs() < 1e-12 * (1.0 + t * t));
        }
    }

    #[test]
    fn rotation_by_half_pi_is_identity() {
        let h = Hamiltonian::constant(0.0, Sym2::new(2.0, 1.0, 0.5)).unwrap();
        let r = h.rotate(PI / 2.0);
        assert!(close(r.h(1.0), h.h(1.0), 1e-15));
    }

    #[test]
    fn derive_rotation_rejects_full_rank_limit() {
        let h = Hamiltonian::constant(0.0, Sym2::IDENTITY).unwrap();
        match h.derive_rotation() {
            Err(Error::NoRankOneLimit { defect }) => assert!((defect - 0.25).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let d = Hamiltonian::constant(0.0, Sym2::dyad(0.3)).unwrap();
        let (c, _) = d.derive_rotation().unwrap();
        assert!((c.h3 / c.h2 - 1.0 / 0.3f64.tan()).abs() < 1e-10);
    }

    #[test]
    fn jhj_swaps_and_is_involution() {
        let h = Hamiltonian::constant(0.0, Sym2::diag(4.0, 1.0)).unwrap();
        assert_eq!(h.invert_jhj().h(1.0), Sym2::diag(1.0, 4.0));
        let g = Hamiltonian::constant(0.0, Sym2::new(0.7, 1.3, -0.4)).unwrap();
        let back = g.invert_jhj().invert_jhj();
        assert!(close(back.h(2.0), g.h(2.0), 1e-15));
        assert!(close(back.m(2.0), g.m(2.0), 1e-15));
    }

    #[test]
    fn random_rotation_preserves_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x: f64 = rng.gen_range(0.0..3.0);
            let y: f64 = rng.gen_range(0.0..3.0);
            let c = rng.gen_range(-1.0..1.0) * (x * y).sqrt();
            let h = Hamiltonian::constant(0.0, Sym2::new(x, y, c)).unwrap();
            let r = h.rotate(0.7);
            assert!((r.m(1.0).det() - h.m(1.0).det()).abs() < 1e-12);
        }
    }

    #[test]
    fn reparameterize_by_doubling() {
        let h = Hamiltonian::constant(0.0, Sym2::IDENTITY).unwrap();
        let g = h.reparameterize(Interval::half_line(0.0), |u| 2.0 * u, |_| 2.0, None).unwrap();
        assert_eq!(g.h(1.0), Sym2::diag(2.0, 2.0));
        assert_eq!(g.m(1.5).h1, 3.0);
        assert!(matches!(
            h.reparameterize(Interval::half_line(0.0), |u| -u, |_| -1.0, None),
            Err(Error::NotMonotone { .. })
        ));
    }

    #[test]
    fn trace_normalization_of_powers() {
        let h = Hamiltonian::primitive_powers(
            0.0,
            alloc::vec![(1.0, Sym2::new(4.0, 1.0, 2.0)), (2.0, Sym2::new(1.0, 1.0, 1.0))],
        )
        .unwrap();
        let g = h.trace_normalize().unwrap();
        for k in 1..=50 {
            let u = 0.2 * k as f64;
            assert!((g.h(u).trace() - 1.0).abs() < 1e-9, "u = {u}");
            assert!((g.tr_m(u) - u).abs() < 1e-9 * (1.0 + u));
        }
    }

    #[test]
    fn validate_corpus_like_fixtures() {
        let grid: Vec<f64> = (0..60).map(|k| 10f64.powf(-6.0 + 0.2 * k as f64)).collect();
        let a = Hamiltonian::alternating(2.0, Sym2::dyad(0.4), Sym2::dyad(-0.4)).unwrap();
        a.validate(&grid).unwrap();
        let p = Hamiltonian::primitive_powers(0.0, alloc::vec![(0.5, Sym2::new(1.0, 0.0, 0.0)), (1.5, Sym2::diag(0.0, 1.0))])
            .unwrap();
        p.validate(&grid).unwrap();
    }

    #[test]
    fn piecewise_rejects_bad_input() {
        assert!(Hamiltonian::piecewise(alloc::vec![0.0, 1.0], alloc::vec![Sym2::new(1.0, 1.0, 2.0)]).is_err());
        assert!(Hamiltonian::piecewise(alloc::vec![1.0, 0.0], alloc::vec![Sym2::IDENTITY]).is_err());
    }
}
