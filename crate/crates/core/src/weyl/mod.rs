//! Fundamental solutions, Weyl discs and certified Weyl coefficients.
//!
//! `W(t,z)` solves `W' = −z W H J`, `W(a) = I`.  Constant panels are
//! propagated with the closed-form exponential; elsewhere a fourth-order
//! Magnus step with step doubling is used.  `W` is carried as
//! `e^{s} Ŵ` so that solutions growing like `e^{|z| t}` do not overflow.

mod series;

pub use series::{
    series_coefficients, series_coefficients_with_forms, verify_coefficient_bounds, m_plus, CheckKind,
    GenPoly, SeriesCoefficients, SeriesMethod, VerificationCheck, VerificationReport, VERIFY_CAP,
};

use num_complex::Complex;
use alloc::format;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, PrimitiveSource};
use crate::linalg::{CMat2, Mat2, Sym2, C64};
use crate::quad::{bisect_increasing, GL8_W, GL8_X};

const EPS: f64 = f64::EPSILON;
const SQRT3_6: f64 = 0.288_675_134_594_812_9;
const SQRT3_12: f64 = 0.144_337_567_297_406_43;
/// Rescale `Ŵ` when its largest entry leaves `[1/RESCALE, RESCALE]`.
const RESCALE: f64 = 1e64;
/// Largest `|√δ|` of a single closed-form panel exponential.
const MAX_EXP_ARG: f64 = 300.0;
/// `|z|·tr M` reached by the initial step on a non-constant Hamiltonian.
const HEAD_WEIGHT: f64 = 1e-8;

/// Closed Weyl disc `{w : |w − centre| ≤ radius}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylDisc {
    pub centre: C64,
    pub radius: f64,
}

impl WeylDisc {
    pub fn contains(&self, w: C64, tol: f64) -> bool {
        (w - self.centre).norm() <= self.radius + tol
    }

    /// `other ⊆ self` up to `tol`.
    pub fn contains_disc(&self, other: &WeylDisc, tol: f64) -> bool {
        (other.centre - self.centre).norm() + other.radius <= self.radius + tol
    }
}

/// A value with a certified enclosure radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifiedValue {
    pub value: C64,
    pub radius: f64,
}

/// Propagator settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Local relative error per adaptive step.
    pub tol: f64,
    pub max_steps: usize,
    /// [`weyl_coefficient`] gives up with `SlowShrink` once `|z|·tr M(t)`
    /// exceeds this.
    pub shrink_cap: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-13, max_steps: 2_000_000, shrink_cap: 1e6 }
    }
}

struct Magnus {
    e: CMat2,
    tr_max: f64,
    dm: Sym2,
}

/// Incremental solver for `W(t,z)`.
pub struct Propagator<'h> {
    h: &'h Hamiltonian,
    z: C64,
    cfg: SolverConfig,
    t: f64,
    w: CMat2,
    log_scale: f64,
    eta: f64,
    steps: usize,
    trace: f64,
    hprop: f64,
    exact_inc: bool,
    started: bool,
    nabla: Option<CMat2>,
}

fn gen(z: C64, m: &Sym2) -> CMat2 {
    // −z·M·J
    let hj = Mat2::new(m.h3, -m.h1, m.h2, -m.h3);
    hj.to_complex().scale(-z)
}

impl<'h> Propagator<'h> {
    pub fn new(h: &'h Hamiltonian, z: C64, cfg: SolverConfig) -> Self {
        Propagator {
            h,
            z,
            cfg,
            t: h.a(),
            w: CMat2::IDENTITY,
            log_scale: 0.0,
            eta: 0.0,
            steps: 0,
            trace: 0.0,
            hprop: f64::INFINITY,
            exact_inc: h.primitive_source() == PrimitiveSource::Exact,
            started: false,
            nabla: None,
        }
    }

    /// Also accumulate `∫ W H W*` by Gauss–Legendre quadrature.
    pub fn track_nabla(mut self) -> Self {
        self.nabla = Some(CMat2::ZERO);
        self
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `∫_a^t tr H`.
    pub fn trace(&self) -> f64 {
        self.trace
    }

    /// `(Ŵ, s)` with `W = e^s Ŵ`.
    pub fn scaled(&self) -> (CMat2, f64) {
        (self.w, self.log_scale)
    }

    /// `W(t,z)`; entries may overflow for large `|z| t`.
    pub fn matrix(&self) -> CMat2 {
        self.w.scale(C64::from(self.log_scale.exp()))
    }

    /// Estimated relative error of `W`: step estimates plus rounding.
    pub fn relative_error(&self) -> f64 {
        self.eta + 4.0 * EPS * self.steps as f64 + 16.0 * EPS
    }

    /// Quadrature value of `∇(t,z)`, if tracking.
    pub fn nabla(&self) -> Option<CMat2> {
        let s = (2.0 * self.log_scale).exp();
        self.nabla.map(|n| n.scale(C64::from(s)))
    }

    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        while self.t < t {
            self.step(t)?;
        }
        Ok(())
    }

    /// One step towards `limit`.
    pub fn step(&mut self, limit: f64) -> Result<()> {
        if self.z == C64::from(0.0) {
            self.t = limit;
            return Ok(());
        }
        if self.steps >= self.cfg.max_steps {
            return Err(Error::StepFailure { t: self.t });
        }
        if !self.started {
            self.started = true;
            if self.head_step(limit) {
                return Ok(());
            }
        }
        let nb = self.h.next_break(self.t).unwrap_or(self.h.b());
        let end = nb.min(limit).min(self.h.b());
        if let Some(c) = self.h.constant_on(self.t, end) {
            self.exact_step(c, end)
        } else {
            self.adaptive_step(end)
        }
    }

    fn head_step(&mut self, limit: f64) -> bool {
        let (a, b) = (self.h.a(), self.h.b());
        let nb = self.h.next_break(a).unwrap_or(b).min(limit);
        if self.h.constant_on(a, nb).is_some() {
            return false;
        }
        let tau = HEAD_WEIGHT / self.z.norm();
        let f = |t: f64| self.h.tr_m(t);
        let span = nb - a;
        let mut hi = if span.is_finite() { a + 0.5 * span } else { a + 1.0 };
        if f(hi) > tau {
            let mut lo_s = (hi - a) * 1e-3;
            let mut found = false;
            for _ in 0..110 {
                if f(a + lo_s) < tau {
                    found = true;
                    break;
                }
                lo_s *= 1e-3;
                if !(lo_s > 0.0) || a + lo_s <= a {
                    break;
                }
            }
            if !found {
                return false;
            }
            hi = bisect_increasing(f, a, a + lo_s, hi, tau, 1e-3);
        }
        if !(hi > a) {
            return false;
        }
        let m = self.h.m(hi);
        self.w = gen(self.z, &m).exp_traceless();
        if let Some(n) = self.nabla.as_mut() {
            *n = *n + m.to_mat().to_complex();
        }
        self.t = hi;
        self.trace += m.trace();
        self.eta += 1e-15;
        self.steps += 1;
        true
    }

    fn exact_step(&mut self, c: Sym2, end: f64) -> Result<()> {
        let zn = self.z.norm();
        let mut len = end - self.t;
        let sd = c.det().max(0.0).sqrt();
        if sd > 0.0 {
            len = len.min(MAX_EXP_ARG / (zn * sd));
        }
        if self.nabla.is_some() && c.trace() > 0.0 {
            len = len.min(0.5 / (zn * c.trace()));
        }
        if len.is_infinite() {
            if c.trace() == 0.0 {
                return Err(Error::SlowShrink { radius: f64::INFINITY, t: self.t });
            }
            len = 8.0 / (zn * c.trace());
        }
        let t1 = if self.t + len >= end || (end.is_finite() && end - (self.t + len) <= 4.0 * EPS * end.abs()) {
            end
        } else {
            self.t + len
        };
        let len = t1 - self.t;
        let g = gen(self.z, &c);
        if let Some(mut n) = self.nabla {
            let (mid, half) = (0.5 * len, 0.5 * len);
            let hc = c.to_mat().to_complex();
            for (x, wt) in GL8_X.iter().zip(GL8_W.iter()) {
                let s = mid + half * x;
                let wk = self.w * g.scale(C64::from(s)).exp_traceless();
                n += (wk * hc * wk.adjoint()).scale(C64::from(wt * half));
            }
            self.nabla = Some(n);
        }
        let omega = g.scale(C64::from(len));
        self.w = self.w * omega.exp_traceless();
        self.eta += 8.0 * EPS * (1.0 + (-omega.det()).sqrt().norm());
        self.trace += len * c.trace();
        self.t = t1;
        self.steps += 1;
        self.renormalise();
        Ok(())
    }

    fn magnus(&self, t0: f64, hs: f64) -> Magnus {
        let (s1, s2) = (t0 + hs * (0.5 - SQRT3_6), t0 + hs * (0.5 + SQRT3_6));
        let (h1, h2) = (self.h.h(s1), self.h.h(s2));
        let (a1, a2) = (gen(self.z, &h1), gen(self.z, &h2));
        let dm = if self.exact_inc { self.h.integral(t0, t0 + hs) } else { (h1 + h2).scale(0.5 * hs) };
        let comm = a1 * a2 - a2 * a1;
        let omega = gen(self.z, &dm) + comm.scale(C64::from(SQRT3_12 * hs * hs));
        Magnus { e: omega.exp_traceless(), tr_max: h1.trace().max(h2.trace()), dm }
    }

    fn adaptive_step(&mut self, end: f64) -> Result<()> {
        let t0 = self.t;
        let zn = self.z.norm();
        let tol = self.cfg.tol;
        let rem = end - t0;
        let mut hs = self.hprop.min(rem);
        if !hs.is_finite() {
            hs = 1.0;
        }
        if self.nabla.is_some() {
            // Geometric grading keeps Gauss–Legendre accurate near a singular `a`.
            if t0 > self.h.a() {
                hs = hs.min(t0 - self.h.a());
            }
        }
        for _ in 0..200 {
            if !(t0 + hs > t0) {
                return Err(Error::StepFailure { t: t0 });
            }
            let full = self.magnus(t0, hs);
            if !(full.tr_max.is_finite()) {
                hs *= 0.25;
                continue;
            }
            if hs * zn * full.tr_max > 0.5 {
                hs = 0.45 / (zn * full.tr_max);
                continue;
            }
            let p1 = self.magnus(t0, 0.5 * hs);
            let p2 = self.magnus(t0 + 0.5 * hs, 0.5 * hs);
            let e = p1.e * p2.e;
            let err = (full.e - e).max_abs() / e.max_abs() / 15.0;
            if !err.is_finite() {
                hs *= 0.25;
                continue;
            }
            if err <= tol {
                if let Some(mut n) = self.nabla {
                    let half = 0.5 * hs;
                    for (x, wt) in GL8_X.iter().zip(GL8_W.iter()) {
                        let ds = half * (1.0 + x);
                        let wk = self.w * self.magnus(t0, ds).e;
                        let hk = self.h.h(t0 + ds).to_mat().to_complex();
                        n += (wk * hk * wk.adjoint()).scale(C64::from(wt * half));
                    }
                    self.nabla = Some(n);
                }
                self.w = self.w * e;
                self.t = if hs >= rem || (end.is_finite() && rem - hs <= 4.0 * EPS * end.abs()) { end } else { t0 + hs };
                self.trace += (p1.dm + p2.dm).trace();
                self.eta += err + 8.0 * EPS;
                self.steps += 1;
                let grow = if err > 0.0 { 0.9 * (tol / err).powf(0.2) } else { 4.0 };
                self.hprop = hs * grow.clamp(0.2, 4.0);
                self.renormalise();
                return Ok(());
            }
            hs *= (0.9 * (tol / err).powf(0.2)).max(0.1);
        }
        Err(Error::StepFailure { t: t0 })
    }

    fn renormalise(&mut self) {
        let s = self.w.max_abs();
        if s > RESCALE || (s < 1.0 / RESCALE && s > 0.0) {
            let inv = C64::from(1.0 / s);
            self.w = self.w.scale(inv);
            self.log_scale += s.ln();
            if let Some(n) = self.nabla.as_mut() {
                *n = n.scale(inv * inv);
            }
        }
    }

    /// Weyl disc at the current `t`.
    pub fn disc(&self) -> Result<WeylDisc> {
        let [[a, b], [c, d]] = self.w.a;
        let im = (d * c.conj()).im;
        if !(im > 1e-300 && im > 1e-15 * (c.norm_sqr() + d.norm_sqr()) * EPS) {
            return Err(Error::DegenerateDisc { t: self.t });
        }
        let den = C64::new(0.0, 2.0 * im);
        let centre = (b * c.conj() - a * d.conj()) / den;
        let radius = (-2.0 * self.log_scale).exp() / den.norm();
        Ok(WeylDisc { centre, radius })
    }

    /// Bound on the error of the disc centre from the error in `W`.
    pub fn centre_error(&self, disc: &WeylDisc) -> f64 {
        let [[a, b], [c, d]] = self.w.a;
        let eta = self.relative_error();
        let den = 2.0 * (d * c.conj()).im.abs();
        let num = 2.0 * eta * (b.norm() * c.norm() + a.norm() * d.norm());
        let dd = disc.centre.norm() * 4.0 * eta * c.norm() * d.norm();
        2.0 * (num + dd) / den
    }

    /// `(w11 ζ + w12)/(w21 ζ + w22)` with its error bound; `ζ = ∞` allowed.
    fn mobius(&self, zeta: C64) -> CertifiedValue {
        let [[a, b], [c, d]] = self.w.a;
        let eta = 2.0 * self.relative_error();
        if zeta.is_infinite() {
            let q = a / c;
            let err = eta * (a.norm() + q.norm() * c.norm()) / c.norm();
            return CertifiedValue { value: q, radius: err };
        }
        let den = c * zeta + d;
        let q = (a * zeta + b) / den;
        let err = eta * ((a * zeta).norm() + b.norm() + q.norm() * ((c * zeta).norm() + d.norm())) / den.norm();
        CertifiedValue { value: q, radius: err }
    }
}

/// Weyl coefficient of the constant system `H ≡ h` on a half-line, in `C⁺`
/// (`∞` when `h2 = 0`).
pub fn constant_weyl_coefficient(h: &Sym2) -> C64 {
    if h.h2 == 0.0 {
        return C64::new(f64::INFINITY, 0.0);
    }
    C64::new(h.h3, h.det().max(0.0).sqrt()) / h.h2
}

fn check_t(h: &Hamiltonian, t: f64) -> Result<()> {
    if !(t >= h.a() && t < h.b()) || !t.is_finite() {
        return Err(Error::Domain(format!("t = {t} outside [{}, {})", h.a(), h.b())));
    }
    Ok(())
}

fn check_z(z: C64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("z = {z} is not finite")));
    }
    Ok(())
}

/// `W(t,z)`.  Fails with `StepFailure` if `|det W − 1|` exceeds `tol`
/// beyond the rounding of the determinant itself.
pub fn fundamental_solution(h: &Hamiltonian, t: f64, z: C64, tol: f64) -> Result<CMat2> {
    check_t(h, t)?;
    check_z(z)?;
    let mut p = Propagator::new(h, z, SolverConfig::default());
    p.advance_to(t)?;
    let w = p.matrix();
    let det_err = (w.det() - 1.0).norm();
    if !w.is_finite() || det_err > tol + 8.0 * EPS * w.norm_sqr() {
        return Err(Error::StepFailure { t });
    }
    Ok(w)
}

/// `(W J W* − J)/(2i Im z)` from `W = e^s Ŵ`.
pub fn nabla_algebraic(w_scaled: &CMat2, log_scale: f64, z: C64) -> CMat2 {
    let j = Mat2::J.to_complex();
    let s = C64::from((2.0 * log_scale).exp());
    let g = (*w_scaled * j * w_scaled.adjoint()).scale(s) - j;
    g.scale(C64::new(0.0, 2.0 * z.im).inv())
}

/// `∇(t,z) = ∫_a^t W H W*` by quadrature along the propagation.
pub fn nabla(h: &Hamiltonian, t: f64, z: C64) -> Result<CMat2> {
    check_t(h, t)?;
    check_z(z)?;
    if z.im == 0.0 {
        return Err(Error::Domain("nabla needs z off the real axis".into()));
    }
    let mut p = Propagator::new(h, z, SolverConfig::default()).track_nabla();
    p.advance_to(t)?;
    Ok(p.nabla().unwrap_or(CMat2::ZERO))
}

/// `∇(t,z)` by the algebraic identity.
pub fn nabla_via_identity(h: &Hamiltonian, t: f64, z: C64) -> Result<CMat2> {
    check_t(h, t)?;
    check_z(z)?;
    if z.im == 0.0 {
        return Err(Error::Domain("nabla needs z off the real axis".into()));
    }
    let mut p = Propagator::new(h, z, SolverConfig::default());
    p.advance_to(t)?;
    let (w, s) = p.scaled();
    Ok(nabla_algebraic(&w, s, z))
}

/// The Weyl disc `Ω_{t,z}` for `z ∈ C⁺`.
pub fn weyl_disc(h: &Hamiltonian, t: f64, z: C64) -> Result<WeylDisc> {
    check_t(h, t)?;
    check_z(z)?;
    if !(z.im > 0.0) {
        return Err(Error::Domain(format!("Weyl discs need z in the upper half-plane, got {z}")));
    }
    let mut p = Propagator::new(h, z, SolverConfig::default());
    p.advance_to(t)?;
    p.disc()
}

/// Certified `q_H(z)` with the default configuration.
pub fn weyl_coefficient(h: &Hamiltonian, z: C64, eps: f64) -> Result<CertifiedValue> {
    weyl_coefficient_with(h, z, eps, &SolverConfig::default())
}

/// Certified `q_H(z)`: propagate until the Weyl disc has radius `≤ eps/2`
/// (or switch to the closed form on a known constant tail).  The returned
/// radius is the disc radius plus the numerical error of its centre.
pub fn weyl_coefficient_with(
    h: &Hamiltonian,
    z: C64,
    eps: f64,
    cfg: &SolverConfig,
) -> Result<CertifiedValue> {
    check_z(z)?;
    if z.im == 0.0 {
        return Err(Error::Domain(format!("q_H is not evaluated on the real axis (z = {z})")));
    }
    if !(eps > 0.0) {
        return Err(Error::ParameterOutOfRange { name: "eps", value: eps });
    }
    if z.im < 0.0 {
        let v = weyl_coefficient_with(h, z.conj(), eps, cfg)?;
        return Ok(CertifiedValue { value: v.value.conj(), radius: v.radius });
    }
    let tail = if h.is_limit_point() { h.exact_tail() } else { None };
    let target = tail.map(|(c, _)| c.max(h.a())).unwrap_or(h.b());
    let mut p = Propagator::new(h, z, *cfg);
    let mut radius = f64::INFINITY;
    loop {
        if let Some((_, th)) = tail {
            if p.t() >= target {
                return Ok(p.mobius(constant_weyl_coefficient(&th)));
            }
        }
        if p.t() >= target {
            return Err(Error::SlowShrink { radius, t: p.t() });
        }
        p.step(target)?;
        if let Ok(d) = p.disc() {
            radius = d.radius;
            if d.radius <= 0.5 * eps {
                let cert = p.centre_error(&d);
                return Ok(CertifiedValue { value: d.centre, radius: d.radius + cert });
            }
        }
        if tail.is_none() && (z.norm() * p.trace() > cfg.shrink_cap || p.steps() >= cfg.max_steps) {
            return Err(Error::SlowShrink { radius, t: p.t() });
        }
    }
}

/// `z` on the ray `r e^{iθ}`.
pub fn polar(r: f64, theta: f64) -> C64 {
    Complex::from_polar(r, theta)
}
