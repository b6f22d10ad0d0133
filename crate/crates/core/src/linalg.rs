//! Small fixed-size matrices.
//!
//! `Sym2` stores a real symmetric matrix as `(h1, h2, h3)` with `h3` the
//! off-diagonal entry, matching the way Hamiltonians are written.  `Mat2`
//! is a general real 2×2 matrix and `CMat2` its complex counterpart.

use core::ops::{Add, AddAssign, Mul, Neg, Sub};
use num_complex::Complex;
use num_traits::Float;

pub type C64 = Complex<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Sym2 {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 { h1: 0.0, h2: 0.0, h3: 0.0 };
    pub const IDENTITY: Sym2 = Sym2 { h1: 1.0, h2: 1.0, h3: 0.0 };

    pub const fn new(h1: f64, h2: f64, h3: f64) -> Self {
        Sym2 { h1, h2, h3 }
    }

    pub const fn diag(h1: f64, h2: f64) -> Self {
        Sym2 { h1, h2, h3: 0.0 }
    }

    /// `ξ_φ ξ_φᵀ` with `ξ_φ = (cos φ, sin φ)`.
    pub fn dyad(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Sym2 { h1: c * c, h2: s * s, h3: c * s }
    }

    pub fn det(&self) -> f64 {
        self.h1 * self.h2 - self.h3 * self.h3
    }

    pub fn trace(&self) -> f64 {
        self.h1 + self.h2
    }

    pub fn scale(&self, s: f64) -> Self {
        Sym2 { h1: s * self.h1, h2: s * self.h2, h3: s * self.h3 }
    }

    /// Positive semidefinite up to `1e-10·(1 + h1 h2)` on the determinant.
    pub fn is_psd(&self) -> bool {
        let tol = 1e-10 * (1.0 + (self.h1 * self.h2).abs());
        self.h1 >= -tol && self.h2 >= -tol && self.det() >= -tol
    }

    pub fn to_mat(&self) -> Mat2 {
        Mat2::new(self.h1, self.h3, self.h3, self.h2)
    }

    /// `Q S Qᵀ`.
    pub fn congruence(&self, q: &Mat2) -> Sym2 {
        let m = *q * self.to_mat() * q.transpose();
        Sym2 { h1: m.a[0][0], h2: m.a[1][1], h3: 0.5 * (m.a[0][1] + m.a[1][0]) }
    }

    pub fn is_finite(&self) -> bool {
        self.h1.is_finite() && self.h2.is_finite() && self.h3.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.h1.abs().max(self.h2.abs()).max(self.h3.abs())
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, o: Sym2) -> Sym2 {
        Sym2 { h1: self.h1 + o.h1, h2: self.h2 + o.h2, h3: self.h3 + o.h3 }
    }
}

impl AddAssign for Sym2 {
    fn add_assign(&mut self, o: Sym2) {
        *self = *self + o;
    }
}

impl Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, o: Sym2) -> Sym2 {
        Sym2 { h1: self.h1 - o.h1, h2: self.h2 - o.h2, h3: self.h3 - o.h3 }
    }
}

/// Real 2×2 matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat2 {
    pub a: [[f64; 2]; 2],
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2 { a: [[0.0; 2]; 2] };
    pub const IDENTITY: Mat2 = Mat2 { a: [[1.0, 0.0], [0.0, 1.0]] };
    /// `J = [[0, -1], [1, 0]]`.
    pub const J: Mat2 = Mat2 { a: [[0.0, -1.0], [1.0, 0.0]] };

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a: [[a11, a12], [a21, a22]] }
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a[0][0], self.a[1][0], self.a[0][1], self.a[1][1])
    }

    pub fn det(&self) -> f64 {
        self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.a[0][0] + self.a[1][1]
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        self.map(|x| s * x)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat2 {
        Mat2::new(f(self.a[0][0]), f(self.a[0][1]), f(self.a[1][0]), f(self.a[1][1]))
    }

    /// Entrywise modulus `|U|`.
    pub fn abs(&self) -> Mat2 {
        self.map(f64::abs)
    }

    /// Entrywise order `U ⪯ V`.
    pub fn preceq(&self, other: &Mat2) -> bool {
        self.entries().zip(other.entries()).all(|(u, v)| u <= v)
    }

    /// `U ⪯ V` allowing a slack of `tol·(1 + |v_ij|)` per entry.
    pub fn preceq_tol(&self, other: &Mat2, tol: f64) -> bool {
        self.entries()
            .zip(other.entries())
            .all(|(u, v)| u <= v + tol * (1.0 + v.abs()))
    }

    pub fn entries(&self) -> impl Iterator<Item = f64> {
        let a = self.a;
        [a[0][0], a[0][1], a[1][0], a[1][1]].into_iter()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.entries().all(f64::is_finite)
    }

    pub fn sym(&self) -> Sym2 {
        Sym2::new(self.a[0][0], self.a[1][1], 0.5 * (self.a[0][1] + self.a[1][0]))
    }

    pub fn to_complex(&self) -> CMat2 {
        CMat2 { a: [[self.a[0][0].into(), self.a[0][1].into()], [self.a[1][0].into(), self.a[1][1].into()]] }
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a[0][0] + o.a[0][0],
            self.a[0][1] + o.a[0][1],
            self.a[1][0] + o.a[1][0],
            self.a[1][1] + o.a[1][1],
        )
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, o: Mat2) {
        *self = *self + o;
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.a;
        let b = &o.a;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// Complex 2×2 matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat2 {
    pub a: [[C64; 2]; 2],
}

impl Default for CMat2 {
    fn default() -> Self {
        CMat2::ZERO
    }
}

const CZ: C64 = Complex { re: 0.0, im: 0.0 };
const CO: C64 = Complex { re: 1.0, im: 0.0 };

impl CMat2 {
    pub const ZERO: CMat2 = CMat2 { a: [[CZ, CZ], [CZ, CZ]] };
    pub const IDENTITY: CMat2 = CMat2 { a: [[CO, CZ], [CZ, CO]] };

    pub const fn new(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        CMat2 { a: [[a11, a12], [a21, a22]] }
    }

    pub fn det(&self) -> C64 {
        self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.a[0][0] + self.a[1][1]
    }

    pub fn adjoint(&self) -> CMat2 {
        let a = &self.a;
        CMat2::new(a[0][0].conj(), a[1][0].conj(), a[0][1].conj(), a[1][1].conj())
    }

    pub fn scale(&self, s: C64) -> CMat2 {
        let a = &self.a;
        CMat2::new(s * a[0][0], s * a[0][1], s * a[1][0], s * a[1][1])
    }

    pub fn mul_real(&self, m: &Mat2) -> CMat2 {
        *self * m.to_complex()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().fold(0.0, |m, x| m.max(x.norm()))
    }

    /// Frobenius norm squared.
    pub fn norm_sqr(&self) -> f64 {
        self.entries().map(|x| x.norm_sqr()).sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = C64> {
        let a = self.a;
        [a[0][0], a[0][1], a[1][0], a[1][1]].into_iter()
    }

    pub fn abs(&self) -> Mat2 {
        let a = &self.a;
        Mat2::new(a[0][0].norm(), a[0][1].norm(), a[1][0].norm(), a[1][1].norm())
    }

    pub fn is_finite(&self) -> bool {
        self.entries().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    pub fn re(&self) -> Mat2 {
        let a = &self.a;
        Mat2::new(a[0][0].re, a[0][1].re, a[1][0].re, a[1][1].re)
    }

    /// Exponential of a trace-free matrix: with `Ω² = δI`,
    /// `exp Ω = cosh(√δ) I + sinh(√δ)/√δ · Ω`.
    pub fn exp_traceless(&self) -> CMat2 {
        let delta = -self.det();
        let (c, s) = cosh_sinhc(delta);
        let a = &self.a;
        CMat2::new(c + s * a[0][0], s * a[0][1], s * a[1][0], c + s * a[1][1])
    }
}

/// `(cosh √δ, sinh √δ / √δ)` as entire functions of `δ`.
pub fn cosh_sinhc(delta: C64) -> (C64, C64) {
    if delta.norm() < 1e-3 {
        // Taylor series to eighth order in √δ; the remainder is below 1e-19.
        let d = delta;
        let c = CO + d * (0.5 + d * (1.0 / 24.0 + d * (1.0 / 720.0 + d / 40320.0)));
        let s = CO + d * (1.0 / 6.0 + d * (1.0 / 120.0 + d * (1.0 / 5040.0 + d / 362880.0)));
        (c, s)
    } else {
        let r = delta.sqrt();
        (r.cosh(), r.sinh() / r)
    }
}

impl Add for CMat2 {
    type Output = CMat2;
    fn add(self, o: CMat2) -> CMat2 {
        let (a, b) = (&self.a, &o.a);
        CMat2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl AddAssign for CMat2 {
    fn add_assign(&mut self, o: CMat2) {
        *self = *self + o;
    }
}

impl Sub for CMat2 {
    type Output = CMat2;
    fn sub(self, o: CMat2) -> CMat2 {
        let (a, b) = (&self.a, &o.a);
        CMat2::new(a[0][0] - b[0][0], a[0][1] - b[0][1], a[1][0] - b[1][0], a[1][1] - b[1][1])
    }
}

impl Mul for CMat2 {
    type Output = CMat2;
    fn mul(self, o: CMat2) -> CMat2 {
        let (a, b) = (&self.a, &o.a);
        CMat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_example() {
        let u = Mat2::new(-1.0, 2.0, 3.0, -4.0);
        assert_eq!(u.abs(), Mat2::new(1.0, 2.0, 3.0, 4.0));
    }

    #[test]
    fn j_squares_to_minus_identity() {
        assert_eq!(Mat2::J * Mat2::J, -Mat2::IDENTITY);
        assert_eq!(Mat2::J.transpose(), -Mat2::J);
    }

    #[test]
    fn congruence_preserves_det_and_trace_for_orthogonal_q() {
        let s = Sym2::new(2.0, 0.5, 0.3);
        let (sn, cs) = 0.7f64.sin_cos();
        let q = Mat2::new(sn, -cs, cs, sn);
        let t = s.congruence(&q);
        assert!((t.det() - s.det()).abs() < 1e-14);
        assert!((t.trace() - s.trace()).abs() < 1e-14);
    }

    #[test]
    fn exp_traceless_small_and_large_agree_with_series() {
        // Ω = x·[[0, 1], [1, 0]] has exp Ω = cosh x I + sinh x Ω/x.
        for &x in &[1e-6, 1e-2, 0.5, 3.0] {
            let o = CMat2::new(CZ, C64::new(x, 0.0), C64::new(x, 0.0), CZ);
            let e = o.exp_traceless();
            let ch = libm::cosh(x);
            let sh = libm::sinh(x);
            assert!((e.a[0][0].re - ch).abs() < 1e-14 * ch);
            assert!((e.a[0][1].re - sh).abs() < 1e-14 * ch);
            assert!((e.det() - CO).norm() < 1e-13);
        }
    }
}
