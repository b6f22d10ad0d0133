//! Synthetic positive measures on `ℝ` with closed-form pieces.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::quad::{integrate, integrate_left_singular};

/// Density `Σ c_k |t|^{p_k}` on `(lo, hi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityPiece {
    pub lo: f64,
    pub hi: f64,
    /// `(c_k, p_k)`.
    pub terms: Vec<(f64, f64)>,
}

impl DensityPiece {
    pub fn new(lo: f64, hi: f64, terms: Vec<(f64, f64)>) -> Self {
        DensityPiece { lo, hi, terms }
    }

    /// `c |t|^p` on `(lo, hi)`.
    pub fn power(lo: f64, hi: f64, c: f64, p: f64) -> Self {
        DensityPiece { lo, hi, terms: alloc::vec![(c, p)] }
    }
}

/// One-signed piece `c |t|^p` on `(lo, hi)` with `lo, hi` of one sign.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Part {
    lo: f64,
    hi: f64,
    c: f64,
    p: f64,
}

/// Atoms plus piecewise power densities, optionally mirrored to `t < 0`,
/// together with the linear coefficient of a Herglotz representation.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticMeasure {
    atoms: Vec<(f64, f64)>,
    densities: Vec<DensityPiece>,
    symmetric: bool,
    linear: f64,
    parts: Vec<Part>,
    all_atoms: Vec<(f64, f64)>,
}

impl SyntheticMeasure {
    /// With `symmetric`, the data must live on `[0, ∞)` and is reflected to
    /// the negative axis; an atom at `0` is counted once.
    pub fn new(atoms: Vec<(f64, f64)>, densities: Vec<DensityPiece>, symmetric: bool) -> Result<Self> {
        let mut all_atoms = Vec::new();
        for &(x, m) in &atoms {
            if !(m >= 0.0 && m.is_finite() && x.is_finite()) {
                return Err(Error::InvalidInput(format!("atom ({x}, {m}) needs finite location and mass >= 0")));
            }
            if symmetric && x < 0.0 {
                return Err(Error::InvalidInput(format!("symmetric measure with atom at {x} < 0")));
            }
            all_atoms.push((x, m));
            if symmetric && x > 0.0 {
                all_atoms.push((-x, m));
            }
        }
        let mut parts = Vec::new();
        for d in &densities {
            if !(d.lo < d.hi) || d.lo.is_nan() || d.hi.is_nan() {
                return Err(Error::InvalidInput(format!("density interval ({}, {}) is empty", d.lo, d.hi)));
            }
            if symmetric && d.lo < 0.0 {
                return Err(Error::InvalidInput(format!("symmetric measure with density on ({}, ..)", d.lo)));
            }
            for &(c, p) in &d.terms {
                if !(c >= 0.0 && c.is_finite() && p.is_finite()) {
                    return Err(Error::InvalidInput(format!("density term {c}|t|^{p} needs c >= 0")));
                }
                let mut push = |lo: f64, hi: f64| -> Result<()> {
                    if lo == 0.0 || hi == 0.0 {
                        if !(p > -1.0) {
                            return Err(Error::InvalidInput(format!("|t|^{p} is not integrable at 0")));
                        }
                    }
                    if lo.is_infinite() || hi.is_infinite() {
                        if !(p < 1.0) {
                            return Err(Error::InvalidInput(format!(
                                "|t|^{p} on an unbounded interval violates ∫ dμ/(1+t²) < ∞"
                            )));
                        }
                    }
                    parts.push(Part { lo, hi, c, p });
                    Ok(())
                };
                if d.lo < 0.0 && d.hi > 0.0 {
                    push(d.lo, 0.0)?;
                    push(0.0, d.hi)?;
                } else {
                    push(d.lo, d.hi)?;
                }
            }
        }
        if symmetric {
            let mirrored: Vec<Part> =
                parts.iter().map(|q| Part { lo: -q.hi, hi: -q.lo, c: q.c, p: q.p }).collect();
            parts.extend(mirrored);
        }
        Ok(SyntheticMeasure { atoms, densities, symmetric, linear: 0.0, parts, all_atoms })
    }

    /// Lebesgue measure on `ℝ`.
    pub fn lebesgue() -> Self {
        Self::power_density(1.0, 0.0).expect("valid")
    }

    /// Unit mass at `x`.
    pub fn unit_atom(x: f64) -> Self {
        Self::new(alloc::vec![(x, 1.0)], Vec::new(), false).expect("valid")
    }

    /// `c |t|^p dt` on `ℝ`, `p ∈ (−1, 1)`.
    pub fn power_density(c: f64, p: f64) -> Result<Self> {
        Self::new(Vec::new(), alloc::vec![DensityPiece::power(0.0, f64::INFINITY, c, p)], true)
    }

    /// Set the linear coefficient `β` of the Herglotz function.
    pub fn with_linear(mut self, beta: f64) -> Self {
        self.linear = beta;
        self
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn densities(&self) -> &[DensityPiece] {
        &self.densities
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn linear(&self) -> f64 {
        self.linear
    }

    /// `∫ Im(1/(t−z)) dμ(t)` for `Im z > 0`.
    pub fn poisson_integral(&self, z: C64) -> Result<f64> {
        if !(z.im > 0.0) {
            return Err(Error::Domain(format!("Poisson integral needs Im z > 0, got {z}")));
        }
        let (x, y) = (z.re, z.im);
        let mut total: f64 = self.all_atoms.iter().map(|&(t, m)| m * y / ((t - x) * (t - x) + y * y)).sum();
        for q in &self.parts {
            total += part_poisson(q, x, y)?;
        }
        Ok(total)
    }

    /// `β Im z + P_μ(z)`, the imaginary part of the Herglotz function.
    pub fn herglotz_imag(&self, z: C64) -> Result<f64> {
        Ok(self.linear * z.im + self.poisson_integral(z)?)
    }

    /// `↔μ(r) = μ((−r, r))`.
    pub fn double_arrow(&self, r: f64) -> f64 {
        if !(r > 0.0) {
            return 0.0;
        }
        let atoms: f64 = self.all_atoms.iter().filter(|(t, _)| t.abs() < r).map(|(_, m)| m).sum();
        let dens: f64 = self
            .parts
            .iter()
            .map(|q| {
                let (lo, hi) = (q.lo.max(-r), q.hi.min(r));
                if lo >= hi {
                    0.0
                } else {
                    q.c * (signed_power_primitive(hi, q.p) - signed_power_primitive(lo, q.p))
                }
            })
            .sum();
        atoms + dens
    }
}

/// `∫_0^t |s|^p ds` with sign, i.e. `sign(t) |t|^{p+1}/(p+1)`.
fn signed_power_primitive(t: f64, p: f64) -> f64 {
    t.signum() * t.abs().powf(p + 1.0) / (p + 1.0)
}

/// `∫_lo^hi c|t|^p y/((t−x)²+y²) dt` for a one-signed interval.
fn part_poisson(q: &Part, x: f64, y: f64) -> Result<f64> {
    // Reflect negative parts onto the positive axis.
    let (lo, hi, x) = if q.hi <= 0.0 { (-q.hi, -q.lo, -x) } else { (q.lo, q.hi, x) };
    if q.c == 0.0 {
        return Ok(0.0);
    }
    let at = |t: f64| {
        if t.is_infinite() {
            FRAC_PI_2.copysign(t)
        } else {
            ((t - x) / y).atan()
        }
    };
    if q.p == 0.0 {
        return Ok(q.c * (at(hi) - at(lo)));
    }
    if q.p == 1.0 {
        // Bounded by construction.
        let prim = |t: f64| 0.5 * y * ((t - x) * (t - x) + y * y).ln() + x * at(t);
        return Ok(q.c * (prim(hi) - prim(lo)));
    }
    if lo == 0.0 && hi.is_infinite() && x == 0.0 {
        return Ok(q.c * y.powf(q.p) * FRAC_PI_2 / (FRAC_PI_2 * q.p).cos());
    }
    let f = |t: f64| q.c * t.powf(q.p) * y / ((t - x) * (t - x) + y * y);
    let mut cuts: Vec<f64> = alloc::vec![lo];
    for c in [x - y, x, x + y] {
        if c > lo && c < hi {
            cuts.push(c);
        }
    }
    let scale = x.abs() + y;
    if hi.is_infinite() {
        let last = *cuts.last().unwrap();
        if scale > last {
            cuts.push(scale);
        }
    } else {
        cuts.push(hi);
    }
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        total += if a == 0.0 {
            integrate_left_singular(&f, a, b, 0.0, 1e-12)?.value
        } else {
            integrate(&f, a, b, 0.0, 1e-12)?.value
        };
    }
    if hi.is_infinite() {
        // ∫_L^∞ f = ∫_0^1 f(L/s) L/s² ds.
        let l = *cuts.last().unwrap();
        let g = |s: f64| f(l / s) * l / (s * s);
        total += integrate_left_singular(g, 0.0, 1.0, 0.0, 1e-12)?.value;
    }
    Ok(total)
}
