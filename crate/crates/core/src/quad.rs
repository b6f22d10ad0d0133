//! Quadrature and monotone root finding.

use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, 8 points.
pub const GL8_X: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
pub const GL8_W: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Gauss–Legendre rule with `n` points on `[-1, 1]` by Newton iteration on
/// `P_n`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        let mut x = -(core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 0 {
                break;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Fixed 8-point rule on `[a, b]`.
pub fn gl8(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    h * GL8_X.iter().zip(GL8_W.iter()).map(|(x, w)| w * f(c + h * x)).sum::<f64>()
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Integral with its estimated absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive Gauss–Kronrod (7/15) on a finite interval.
///
/// Stops when the summed error is below `max(abs_tol, rel_tol·|I|)`.
/// Endpoints are never evaluated, so integrable endpoint singularities are
/// tolerated (with slower convergence).
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let (v, e) = gk15(&f, a, b);
    let mut segs: Vec<(f64, f64, f64, f64)> = alloc::vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    const MAX_SEGS: usize = 4000;
    while err > abs_tol.max(rel_tol * total.abs()) || !err.is_finite() {
        if segs.len() >= MAX_SEGS || !total.is_finite() {
            return Err(Error::Quadrature {
                achieved: err,
                requested: abs_tol.max(rel_tol * total.abs()),
            });
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, be), (i, s)| if s.3 > be { (i, s.3) } else { (bi, be) });
        let (s0, s1, sv, se) = segs.swap_remove(idx);
        let m = 0.5 * (s0 + s1);
        if !(m > s0 && m < s1) {
            // Interval cannot be split further in floating point.
            return Err(Error::Quadrature { achieved: err, requested: abs_tol.max(rel_tol * total.abs()) });
        }
        let (v1, e1) = gk15(&f, s0, m);
        let (v2, e2) = gk15(&f, m, s1);
        total += v1 + v2 - sv;
        err += e1 + e2 - se;
        segs.push((s0, m, v1, e1));
        segs.push((m, s1, v2, e2));
        if segs.len() % 64 == 0 {
            // Resum to avoid drift from incremental updates.
            total = segs.iter().map(|s| s.2).sum();
            err = segs.iter().map(|s| s.3).sum();
        }
    }
    Ok(Estimate { value: total, error: err })
}

/// `∫_a^b f` for `f` with a possible integrable singularity at `a`.
///
/// The interval is cut geometrically, `(a + (b−a)2^{−k−1}, a + (b−a)2^{−k}]`,
/// and pieces are added until their contribution is negligible.
pub fn integrate_left_singular(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    let len = b - a;
    let mut total = 0.0;
    let mut error = 0.0;
    let mut small = 0;
    for k in 0..1000 {
        let hi = a + len * 0.5f64.powi(k);
        let lo = a + len * 0.5f64.powi(k + 1);
        if lo <= a {
            break;
        }
        let piece = integrate(&f, lo, hi, abs_tol * 1e-3, rel_tol)?;
        total += piece.value;
        error += piece.error;
        if piece.value.abs() <= 1e-3 * rel_tol * total.abs() + 1e-3 * abs_tol {
            small += 1;
            if small >= 3 {
                // Geometric tail: bound the remainder by the last piece.
                error += piece.value.abs();
                break;
            }
        } else {
            small = 0;
        }
    }
    Ok(Estimate { value: total, error })
}

/// `∫_a^∞ f` by the substitution `t = a + u/(1−u)`.
pub fn integrate_to_infinity(
    f: impl Fn(f64) -> f64,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    let g = |u: f64| {
        let d = 1.0 - u;
        f(a + u / d) / (d * d)
    };
    integrate(g, 0.0, 1.0, abs_tol, rel_tol)
}

/// Solve `f(t) = target` for a non-decreasing `f` on `[lo, hi]` with
/// `f(lo) ≤ target ≤ f(hi)`.
///
/// Bisects geometrically in `t − origin` while the bracket spans more than a
/// factor of 4, then arithmetically.  Stops at relative width `rel_tol`.
pub fn bisect_increasing(
    f: impl Fn(f64) -> f64,
    origin: f64,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    rel_tol: f64,
) -> f64 {
    for _ in 0..400 {
        let (slo, shi) = (lo - origin, hi - origin);
        if shi - slo <= rel_tol * shi.abs() {
            break;
        }
        let mid = if slo > 0.0 && shi > 4.0 * slo {
            origin + (slo * shi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if !(mid > lo && mid < hi) {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Natural log of the Beta function.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}

/// Euler's Beta function.
pub fn beta(a: f64, b: f64) -> f64 {
    ln_beta(a, b).exp()
}
