//! Envelopes for the Dirichlet Titchmarsh–Weyl coefficient `q_D` of
//! `−(py′)′ + qy = λwy` on `(a, b)`.
//!
//! Without potential, with `x̂(r)` solving `∫_a^{x̂} w · ∫_a^{x̂} 1/p = κ²/r`
//! and `B(r) = (r/κ)∫_a^{x̂} w = κ/∫_a^{x̂} 1/p`,
//! `C₁ B(r) ≤ |q_D(re^{iθ})| ≤ C₂ B(r)` with
//! `C₂ = (1+σ+1/(κ sin(θ/2)))/(1−σ)`, `C₁ = 1/C₂`, `σ = 1/(1−2κ)² − 1`.
//! With a potential and `λ₀` below the Neumann spectrum,
//! `(C₁/36) B(9r) ≤ |q_D(λ₀ + re^{iθ})| ≤ (9C₂/4) B(9r)` for `r ≥ r₀`.

use alloc::format;
use alloc::sync::Arc;
use core::f64::consts::{FRAC_1_SQRT_2, PI};
use core::fmt;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, Interval};
use crate::linalg::{cosh_sinhc, Mat2, C64};
use crate::quad::{bisect_increasing, integrate};
use crate::weyl::{weyl_coefficient, CertifiedValue};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How to pick `x₀` for the potential case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum X0Choice {
    /// Use this `x₀`; fail if the integral conditions do not hold there.
    Fixed(f64),
    /// Halve `x₀ − a` from this seed until the conditions hold.
    Search(f64),
}

#[derive(Clone)]
pub struct PotentialData {
    pub q: RealFn,
    /// A lower bound for the Neumann operator, supplied by the caller.
    pub lambda0: f64,
    pub x0: X0Choice,
}

/// `−(py′)′ + qy = λwy` on `(a, b)`, limit point at `b`.
#[derive(Clone)]
pub struct SlProblem {
    pub interval: Interval,
    pub p: RealFn,
    pub w: RealFn,
    pub potential: Option<PotentialData>,
}

impl fmt::Debug for SlProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SlProblem")
            .field("interval", &self.interval)
            .field("lambda0", &self.potential.as_ref().map(|p| p.lambda0))
            .finish_non_exhaustive()
    }
}

impl SlProblem {
    pub fn new(
        interval: Interval,
        p: impl Fn(f64) -> f64 + Send + Sync + 'static,
        w: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SlProblem { interval, p: Arc::new(p), w: Arc::new(w), potential: None }
    }

    pub fn with_potential(
        mut self,
        q: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lambda0: f64,
        x0: X0Choice,
    ) -> Self {
        self.potential = Some(PotentialData { q: Arc::new(q), lambda0, x0 });
        self
    }

    /// `H = diag(w, 1/p)`, whose Weyl coefficient satisfies
    /// `q_D(z²) = z q_H(z)` when there is no potential.
    pub fn hamiltonian(&self) -> Hamiltonian {
        let (p, w) = (self.p.clone(), self.w.clone());
        Hamiltonian::from_sl(self.interval, move |t| w(t), move |t| p(t), true)
    }

    fn a(&self) -> f64 {
        self.interval.a
    }

    /// `∫_a^x w`.
    pub fn w_integral(&self, x: f64) -> Result<f64> {
        let w = &self.w;
        Ok(integrate(|t| w(t), self.a(), x, 0.0, 1e-12)?.value)
    }

    /// `∫_a^x 1/p`.
    pub fn p_inv_integral(&self, x: f64) -> Result<f64> {
        let p = &self.p;
        Ok(integrate(|t| 1.0 / p(t), self.a(), x, 0.0, 1e-12)?.value)
    }

    fn product(&self, x: f64) -> f64 {
        match (self.w_integral(x), self.p_inv_integral(x)) {
            (Ok(u), Ok(v)) => u * v,
            _ => f64::NAN,
        }
    }

    /// `x̂(r)` solving `∫_a^{x̂} w · ∫_a^{x̂} 1/p = κ²/r`.
    pub fn x_hat(&self, kappa: f64, r: f64) -> Result<f64> {
        let (a, b) = (self.interval.a, self.interval.b);
        let target = kappa * kappa / r;
        let mut hi = if b.is_finite() { a + 0.5 * (b - a) } else { a + 1.0 };
        let mut n = 0;
        while !(self.product(hi) >= target) {
            hi = if b.is_finite() { hi + 0.5 * (b - hi) } else { a + 2.0 * (hi - a) };
            n += 1;
            if n > 200 {
                return Err(Error::Bracket(format!("∫w·∫1/p stays below {target:e}")));
            }
        }
        let mut u = hi - a;
        loop {
            u *= 0.5;
            if !(a + u > a) {
                return Err(Error::Bracket(format!("∫w·∫1/p does not fall below {target:e}")));
            }
            if self.product(a + u) < target {
                break;
            }
        }
        Ok(bisect_increasing(|x| self.product(x), a, a + u, (a + 2.0 * u).min(hi), target, 1e-13))
    }

    /// `B(r)` in both forms, with `x̂(r)`.
    pub fn b_of_r(&self, kappa: f64, r: f64) -> Result<(f64, f64, f64)> {
        let x = self.x_hat(kappa, r)?;
        let b1 = r / kappa * self.w_integral(x)?;
        let b2 = kappa / self.p_inv_integral(x)?;
        Ok((b1, b2, x))
    }

    /// Certified `q_D(λ)` for `λ ∉ [0, ∞)` without potential, through the
    /// canonical system.
    pub fn q_dirichlet(&self, lambda: C64, eps: f64) -> Result<CertifiedValue> {
        if self.potential.is_some() {
            return Err(Error::NotSupported(format!("q_D with a potential")));
        }
        let mut z = lambda.sqrt();
        if z.im < 0.0 {
            z = -z;
        }
        let v = weyl_coefficient(&self.hamiltonian(), z, eps / z.norm())?;
        Ok(CertifiedValue { value: z * v.value, radius: z.norm() * v.radius })
    }
}

/// Upper end of the admissible range of `κ`: `½ − 1/(2√2)`.
pub const KAPPA_MAX: f64 = 0.5 - 0.5 * FRAC_1_SQRT_2;

/// `(C₁, C₂)` for `κ ∈ (0, ½ − 1/(2√2))` and `θ ∈ (0, 2π)`.
///
/// `θ > π` is reflected to `2π − θ`, so `θ` and `2π − θ` give identical
/// constants.
pub fn sl_constants(kappa: f64, theta: f64) -> Result<(f64, f64)> {
    if !(kappa > 0.0 && kappa < KAPPA_MAX) {
        return Err(Error::ParameterOutOfRange { name: "kappa", value: kappa });
    }
    if !(theta > 0.0 && theta < 2.0 * PI) {
        return Err(Error::ParameterOutOfRange { name: "theta", value: theta });
    }
    let h = if theta > PI { 2.0 * PI - theta } else { theta };
    let s = (0.5 * h).sin();
    let sigma = 1.0 / ((1.0 - 2.0 * kappa) * (1.0 - 2.0 * kappa)) - 1.0;
    let c2 = (1.0 + sigma + 1.0 / (kappa * s)) / (1.0 - sigma);
    Ok((1.0 / c2, c2))
}

/// Data of the potential case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialEnvelope {
    pub lambda0: f64,
    pub x0: f64,
    /// `∫_a^{x₀} 1/p` and `∫_a^{x₀} |q − λ₀w|`, both at most `1/3`.
    pub p_inv_integral: f64,
    pub potential_integral: f64,
    pub r0: f64,
    /// Range of `v` on `[a, x₀]`, inside `[½, 3/2]`.
    pub v_min: f64,
    pub v_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlEnvelope {
    pub r: f64,
    pub theta: f64,
    pub kappa: f64,
    pub sigma: f64,
    pub c1: f64,
    pub c2: f64,
    /// `x̂` at the argument of `B` (`r`, or `9r` with a potential).
    pub x_hat: f64,
    /// `B` in its two forms.
    pub b: f64,
    pub b_alt: f64,
    /// Bounds for `|q_D(λ₀ + re^{iθ})|` (`λ₀ = 0` without potential).
    pub lower: f64,
    pub upper: f64,
    pub potential: Option<PotentialEnvelope>,
}

/// The envelope for `|q_D|` at `re^{iθ}` (shifted by `λ₀` with a potential).
pub fn sl_envelope(prob: &SlProblem, r: f64, theta: f64, kappa: f64) -> Result<SlEnvelope> {
    let (c1, c2) = sl_constants(kappa, theta)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::ParameterOutOfRange { name: "r", value: r });
    }
    let sigma = 1.0 / ((1.0 - 2.0 * kappa) * (1.0 - 2.0 * kappa)) - 1.0;
    match &prob.potential {
        None => {
            let (b, b_alt, x_hat) = prob.b_of_r(kappa, r)?;
            Ok(SlEnvelope { r, theta, kappa, sigma, c1, c2, x_hat, b, b_alt, lower: c1 * b, upper: c2 * b, potential: None })
        }
        Some(pd) => {
            let pot = potential_setup(prob, pd, kappa)?;
            if r < pot.r0 {
                return Err(Error::ParameterOutOfRange { name: "r", value: r });
            }
            let (b, b_alt, x_hat) = prob.b_of_r(kappa, 9.0 * r)?;
            Ok(SlEnvelope {
                r,
                theta,
                kappa,
                sigma,
                c1,
                c2,
                x_hat,
                b,
                b_alt,
                lower: c1 / 36.0 * b,
                upper: 9.0 * c2 / 4.0 * b,
                potential: Some(pot),
            })
        }
    }
}

fn potential_integrals(prob: &SlProblem, pd: &PotentialData, x0: f64) -> Result<(f64, f64)> {
    let a = prob.a();
    let pi = prob.p_inv_integral(x0)?;
    let (q, w, l0) = (&pd.q, &prob.w, pd.lambda0);
    let qi = integrate(|t| (q(t) - l0 * w(t)).abs(), a, x0, 0.0, 1e-12)?.value;
    Ok((pi, qi))
}

fn potential_setup(prob: &SlProblem, pd: &PotentialData, kappa: f64) -> Result<PotentialEnvelope> {
    let a = prob.a();
    let third = 1.0 / 3.0;
    let (x0, pi, qi) = match pd.x0 {
        X0Choice::Fixed(x0) => {
            let (pi, qi) = potential_integrals(prob, pd, x0)?;
            if !(pi <= third && qi <= third) {
                return Err(Error::PotentialTooLarge { x0 });
            }
            (x0, pi, qi)
        }
        X0Choice::Search(seed) => {
            let mut x0 = seed;
            let mut found = None;
            for _ in 0..200 {
                let (pi, qi) = potential_integrals(prob, pd, x0)?;
                if pi <= third && qi <= third {
                    found = Some((x0, pi, qi));
                    break;
                }
                x0 = a + 0.5 * (x0 - a);
            }
            found.ok_or(Error::PotentialTooLarge { x0 })?
        }
    };
    if !(x0 > a && x0 < prob.interval.b) {
        return Err(Error::Domain(format!("x0 = {x0} outside ({a}, {})", prob.interval.b)));
    }
    let (v_min, v_max) = solve_v(prob, pd, x0)?;
    if !(v_min >= 0.5 && v_max <= 1.5) {
        return Err(Error::IvpFailure(format!("v ranges over [{v_min}, {v_max}] on [a, x0], outside [1/2, 3/2]")));
    }
    let r0 = 9.0 * kappa * kappa / (prob.w_integral(x0)? * pi);
    Ok(PotentialEnvelope { lambda0: pd.lambda0, x0, p_inv_integral: pi, potential_integral: qi, r0, v_min, v_max })
}

const SQRT3_12: f64 = 0.144_337_567_297_406_43;
const SQRT3_6: f64 = 0.288_675_134_594_812_9;

fn exp_traceless_real(m: &Mat2) -> Mat2 {
    let (c, s) = cosh_sinhc(C64::new(-m.det(), 0.0));
    let (c, s) = (c.re, s.re);
    Mat2::new(c + s * m.a[0][0], s * m.a[0][1], s * m.a[1][0], c + s * m.a[1][1])
}

/// One fourth-order Magnus step for `u′ = A u`, `A = [[0, 1/p], [q − λ₀w, 0]]`.
fn magnus_step(prob: &SlProblem, pd: &PotentialData, x: f64, h: f64) -> Mat2 {
    let gen = |t: f64| Mat2::new(0.0, 1.0 / (prob.p)(t), (pd.q)(t) - pd.lambda0 * (prob.w)(t), 0.0);
    let c = x + 0.5 * h;
    let (a1, a2) = (gen(c - SQRT3_6 * h), gen(c + SQRT3_6 * h));
    let comm = a2 * a1 - a1 * a2;
    let omega = (a1 + a2).scale(0.5 * h) + comm.scale(SQRT3_12 * h * h);
    exp_traceless_real(&omega)
}

/// `min v` and `max v` on `[a, x₀]` for `−(pv′)′ + qv = λ₀wv`, `v(a) = 1`,
/// `(pv′)(a) = 0`, by Magnus steps with step doubling.
fn solve_v(prob: &SlProblem, pd: &PotentialData, x0: f64) -> Result<(f64, f64)> {
    let a = prob.a();
    let (mut x, mut u) = (a, [1.0f64, 0.0]);
    let (mut vmin, mut vmax) = (1.0f64, 1.0f64);
    let mut h = (x0 - a) / 64.0;
    let apply = |m: &Mat2, u: [f64; 2]| [m.a[0][0] * u[0] + m.a[0][1] * u[1], m.a[1][0] * u[0] + m.a[1][1] * u[1]];
    let mut steps = 0;
    while x < x0 {
        h = h.min(x0 - x);
        let full = apply(&magnus_step(prob, pd, x, h), u);
        let mid = apply(&magnus_step(prob, pd, x, 0.5 * h), u);
        let half = apply(&magnus_step(prob, pd, x + 0.5 * h, 0.5 * h), mid);
        let scale = half[0].abs() + half[1].abs() + 1.0;
        let err = ((full[0] - half[0]).abs() + (full[1] - half[1]).abs()) / 15.0;
        if !err.is_finite() {
            return Err(Error::IvpFailure(format!("non-finite solution near x = {x}")));
        }
        if err <= 1e-12 * scale {
            for v in [mid[0], half[0]] {
                vmin = vmin.min(v);
                vmax = vmax.max(v);
            }
            u = half;
            x = if x0 - x <= h { x0 } else { x + h };
            h *= if err < 1e-14 * scale { 2.0 } else { 1.0 };
        } else {
            h *= 0.5;
            if !(x + h > x) {
                return Err(Error::IvpFailure(format!("step size underflow at x = {x}")));
            }
        }
        steps += 1;
        if steps > 2_000_000 {
            return Err(Error::IvpFailure(format!("too many steps before x0 = {x0}")));
        }
    }
    Ok((vmin, vmax))
}
