//! Non-decreasing functions with values in `(−∞, ∞]` and their generalised
//! inverses `f⁻(y) = inf{x : f(x) ≥ y}`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use num_traits::Float;

use crate::error::{Error, Result};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One piece on `[start, next start)`: the value `at_start` at `start` and
/// `base + slope·u + coef·u^power` with `u = x − start` inside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub at_start: f64,
    pub base: f64,
    pub slope: f64,
    pub coef: f64,
    pub power: f64,
}

impl Piece {
    /// `f ≡ v` on the piece, including its start.
    pub fn constant(start: f64, v: f64) -> Self {
        Piece { start, at_start: v, base: v, slope: 0.0, coef: 0.0, power: 1.0 }
    }

    /// `f(x) = at_start` at `start`, then `base + slope (x − start)`.
    pub fn linear(start: f64, at_start: f64, base: f64, slope: f64) -> Self {
        Piece { start, at_start, base, slope, coef: 0.0, power: 1.0 }
    }

    fn interior(&self, u: f64) -> f64 {
        if self.base == f64::INFINITY {
            return f64::INFINITY;
        }
        if u == f64::INFINITY {
            return if self.slope > 0.0 || self.coef > 0.0 { f64::INFINITY } else { self.base };
        }
        let mut v = self.base + self.slope * u;
        if self.coef != 0.0 {
            v += self.coef * u.powf(self.power);
        }
        v
    }

    fn derivative(&self, u: f64) -> f64 {
        let mut d = self.slope;
        if self.coef != 0.0 {
            d += self.coef * self.power * u.powf(self.power - 1.0);
        }
        d
    }

    fn is_linear(&self) -> bool {
        self.coef == 0.0 || self.power == 1.0
    }

    /// Smallest `u > 0` with `interior(u) ≥ y`, given
    /// `interior(0+) < y < interior(len−)`.
    fn solve(&self, y: f64, len: f64) -> f64 {
        let d = y - self.base;
        if self.coef == 0.0 {
            return d / self.slope;
        }
        if self.slope == 0.0 {
            return (d / self.coef).powf(1.0 / self.power);
        }
        if self.power == 1.0 {
            return d / (self.slope + self.coef);
        }
        let hi = if len.is_finite() { len } else { (d / self.slope).min((d / self.coef).powf(1.0 / self.power)) };
        inf_where(|u| self.interior(u) >= y, 0.0, hi)
    }
}

#[derive(Clone)]
enum Repr {
    Pieces(Vec<Piece>),
    Callable { f: RealFn, df: Option<RealFn> },
}

/// A non-decreasing function `[x₀, x₁) → (−∞, ∞]`, or `[x₀, x₁]` when
/// `closed` is set.
#[derive(Clone)]
pub struct MonotoneFunction {
    repr: Repr,
    start: f64,
    end: f64,
    closed: bool,
}

impl fmt::Debug for MonotoneFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("MonotoneFunction");
        d.field("start", &self.start).field("end", &self.end).field("closed", &self.closed);
        if let Repr::Pieces(p) = &self.repr {
            d.field("pieces", p);
        }
        d.finish_non_exhaustive()
    }
}

/// Smallest `x ∈ [lo, hi]` with `pred(x)`, for a predicate that is false
/// then true; `hi` is taken as true.  Steps toward `lo` by factors of 1024
/// first, then bisects geometrically in `x − lo`, then arithmetically.
pub(crate) fn inf_where(pred: impl Fn(f64) -> bool, lo: f64, hi: f64) -> f64 {
    if pred(lo) {
        return lo;
    }
    let (mut l, mut h) = (lo, hi);
    for _ in 0..4000 {
        let mid = if l == lo {
            lo + (h - lo) / 1024.0
        } else if h - lo > 4.0 * (l - lo) {
            lo + (l - lo).sqrt() * (h - lo).sqrt()
        } else {
            0.5 * (l + h)
        };
        if !(mid > l && mid < h) {
            break;
        }
        if pred(mid) {
            h = mid;
        } else {
            l = mid;
        }
    }
    h
}

impl MonotoneFunction {
    /// Pieces with strictly increasing starts on `[pieces[0].start, end)`.
    pub fn from_pieces(pieces: Vec<Piece>, end: f64) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidInput(String::from("no pieces")));
        }
        for (k, p) in pieces.iter().enumerate() {
            let next = pieces.get(k + 1).map_or(end, |q| q.start);
            if !(p.start < next) || !p.start.is_finite() {
                return Err(Error::InvalidInput(format!("piece starts not increasing at {}", p.start)));
            }
            if !(p.slope >= 0.0 && p.coef >= 0.0 && p.power > 0.0) || p.slope.is_infinite() {
                return Err(Error::InvalidInput(format!("piece at {} is not non-decreasing", p.start)));
            }
            if !(p.at_start <= p.base) || p.at_start.is_nan() || p.base.is_nan() {
                return Err(Error::NotMonotone { at: p.start });
            }
            if k > 0 {
                let q = &pieces[k - 1];
                // Allow rounding in the left limit of linear pieces.
                let left = q.interior(p.start - q.start);
                if !(left <= p.at_start + 1e-12 * left.abs().max(1.0)) {
                    return Err(Error::NotMonotone { at: p.start });
                }
            }
        }
        let start = pieces[0].start;
        Ok(MonotoneFunction { repr: Repr::Pieces(pieces), start, end, closed: false })
    }

    /// Piecewise linear with jumps on `[x₀, x_n)`: `f(x_k) = at[k]`,
    /// `f(x_k+) = right[k]`, linear from `right[k]` to `at[k+1]` on
    /// `(x_k, x_{k+1})`, so `f` is left-continuous.  With a tail slope the
    /// last value continues linearly to `∞`.
    pub fn linear_with_jumps(knots: &[f64], at: &[f64], right: &[f64], tail_slope: Option<f64>) -> Result<Self> {
        let n = knots.len();
        if n < 2 || at.len() != n || right.len() != n - 1 {
            return Err(Error::InvalidInput(String::from("need n knots, n values and n−1 right limits")));
        }
        let mut pieces = Vec::with_capacity(n);
        for k in 0..n - 1 {
            let len = knots[k + 1] - knots[k];
            if !(len > 0.0) {
                return Err(Error::InvalidInput(format!("knots not increasing at {}", knots[k])));
            }
            let slope = (at[k + 1] - right[k]) / len;
            pieces.push(Piece::linear(knots[k], at[k], right[k], slope));
        }
        let end = match tail_slope {
            Some(s) => {
                pieces.push(Piece::linear(knots[n - 1], at[n - 1], at[n - 1], s));
                f64::INFINITY
            }
            None => knots[n - 1],
        };
        Self::from_pieces(pieces, end)
    }

    /// `c x^ρ` on `[0, ∞)`.
    pub fn power(c: f64, rho: f64) -> Result<Self> {
        Self::from_pieces(alloc::vec![Piece { start: 0.0, at_start: 0.0, base: 0.0, slope: 0.0, coef: c, power: rho }], f64::INFINITY)
    }

    /// A function given by an evaluator, assumed non-decreasing.
    pub fn callable(start: f64, end: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        MonotoneFunction { repr: Repr::Callable { f: Arc::new(f), df: None }, start, end, closed: false }
    }

    /// Attach the derivative of a callable function.
    pub fn with_derivative(mut self, df: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        if let Repr::Callable { df: slot, .. } = &mut self.repr {
            *slot = Some(Arc::new(df));
        }
        self
    }

    /// Include the right end of the domain.
    pub fn closed(mut self) -> Self {
        self.closed = true;
        self
    }

    /// Reject the function unless it is non-decreasing on `n` sample points.
    pub fn check_samples(&self, n: usize) -> Result<()> {
        let hi = if self.end.is_finite() { self.end } else { self.start + 1e6 };
        let mut prev = f64::NEG_INFINITY;
        for k in 0..n {
            let x = self.start + (hi - self.start) * k as f64 / n as f64;
            let v = self.eval(x);
            if v < prev {
                return Err(Error::NotMonotone { at: x });
            }
            prev = v;
        }
        Ok(())
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn pieces(&self) -> Option<&[Piece]> {
        match &self.repr {
            Repr::Pieces(p) => Some(p),
            Repr::Callable { .. } => None,
        }
    }

    /// Whether every piece is linear, so the function is piecewise linear
    /// with jumps.
    pub fn is_piecewise_linear(&self) -> bool {
        self.pieces().is_some_and(|p| p.iter().all(Piece::is_linear))
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.start && (x < self.end || (self.closed && x == self.end))
    }

    /// `f(x)` with a domain check.
    pub fn value(&self, x: f64) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::Domain(format!("x = {x} outside [{}, {})", self.start, self.end)));
        }
        Ok(self.eval(x))
    }

    fn piece_index(p: &[Piece], x: f64) -> usize {
        p.partition_point(|q| q.start <= x).saturating_sub(1)
    }

    /// `f(x)` without a domain check.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Pieces(p) => {
                let q = &p[Self::piece_index(p, x)];
                if x <= q.start {
                    q.at_start
                } else {
                    q.interior(x - q.start)
                }
            }
            Repr::Callable { f, .. } => f(x),
        }
    }

    /// `f(x−)`.
    pub fn left_limit(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Pieces(p) => {
                let k = p.partition_point(|q| q.start < x).saturating_sub(1);
                let q = &p[k];
                if x <= q.start {
                    q.at_start
                } else {
                    q.interior(x - q.start)
                }
            }
            Repr::Callable { f, .. } => {
                let h = 1e-12 * x.abs().max(1.0);
                f(x - h)
            }
        }
    }

    /// `f(x+)`.
    pub fn right_limit(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Pieces(p) => {
                let q = &p[Self::piece_index(p, x)];
                if x <= q.start {
                    q.base
                } else {
                    q.interior(x - q.start)
                }
            }
            Repr::Callable { f, .. } => {
                let h = 1e-12 * x.abs().max(1.0);
                f(x + h)
            }
        }
    }

    /// `f′(x)` away from jumps; callable functions without a supplied
    /// derivative use a central difference.
    pub fn derivative(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Pieces(p) => {
                let q = &p[Self::piece_index(p, x)];
                q.derivative((x - q.start).max(0.0))
            }
            Repr::Callable { f, df } => match df {
                Some(d) => d(x),
                None => {
                    let h = 1e-6 * x.abs().max(1e-6);
                    let lo = (x - h).max(self.start);
                    (f(x + h) - f(lo)) / (x + h - lo)
                }
            },
        }
    }

    /// `∫_{x₀}^x f`, for finite `f`.
    pub fn integral(&self, x: f64) -> Result<f64> {
        match &self.repr {
            Repr::Pieces(p) => {
                let mut total = 0.0;
                for (k, q) in p.iter().enumerate() {
                    let next = p.get(k + 1).map_or(self.end, |r| r.start);
                    let e = next.min(x);
                    if e <= q.start {
                        break;
                    }
                    let u = e - q.start;
                    let mut v = q.base * u + 0.5 * q.slope * u * u;
                    if q.coef != 0.0 {
                        v += q.coef * u.powf(q.power + 1.0) / (q.power + 1.0);
                    }
                    total += v;
                }
                Ok(total)
            }
            Repr::Callable { f, .. } => {
                if x <= self.start {
                    return Ok(0.0);
                }
                Ok(crate::quad::integrate(|s| f(s), self.start, x, 0.0, 1e-12)?.value)
            }
        }
    }

    /// `lim_{x→x₁} f(x)`; for callable functions on an infinite domain the
    /// value at `x₀ + 2^{1000}`.
    pub fn sup(&self) -> f64 {
        if self.closed {
            return self.eval(self.end);
        }
        match &self.repr {
            Repr::Pieces(p) => {
                let q = p.last().unwrap();
                if self.end.is_infinite() {
                    if q.slope > 0.0 || q.coef > 0.0 {
                        f64::INFINITY
                    } else {
                        q.base
                    }
                } else {
                    q.interior(self.end - q.start)
                }
            }
            Repr::Callable { f, .. } => {
                if self.end.is_finite() {
                    f(self.end)
                } else {
                    f(self.start + 2f64.powi(1000))
                }
            }
        }
    }

    /// `f⁻(y) = inf{x : f(x) ≥ y}` for `y` in the convex hull of the range.
    pub fn inverse_at(&self, y: f64) -> Result<f64> {
        let f0 = self.eval(self.start);
        if y <= f0 {
            if y < f0 {
                return Err(Error::Domain(format!("{y} below the range, which starts at {f0}")));
            }
            return Ok(self.start);
        }
        if y.is_nan() {
            return Err(Error::Domain(String::from("NaN")));
        }
        match &self.repr {
            Repr::Pieces(p) => {
                for (k, q) in p.iter().enumerate() {
                    if q.at_start >= y || q.base >= y {
                        return Ok(q.start);
                    }
                    let next = p.get(k + 1).map_or(self.end, |r| r.start);
                    let len = next - q.start;
                    let left = q.interior(len);
                    if left > y {
                        let x = q.start + q.solve(y, len);
                        return Ok(x.min(next));
                    }
                }
                if self.closed && self.eval(self.end) >= y {
                    return Ok(self.end);
                }
                Err(Error::Domain(format!("{y} not in the range, whose supremum is {}", self.sup())))
            }
            Repr::Callable { f, .. } => {
                let pred = |x: f64| f(x) >= y;
                let hi = if self.end.is_finite() {
                    if !(self.closed && pred(self.end)) {
                        let x = inf_where(pred, self.start, self.end);
                        if x >= self.end || !pred(x) {
                            return Err(Error::Domain(format!("{y} at or beyond the supremum of the range")));
                        }
                        return Ok(x);
                    }
                    self.end
                } else {
                    let mut h = self.start + 1.0;
                    let mut n = 0;
                    while !pred(h) {
                        h = self.start + 2.0 * (h - self.start);
                        n += 1;
                        if n > 1000 {
                            return Err(Error::Domain(format!("{y} beyond the range")));
                        }
                    }
                    h
                };
                Ok(inf_where(pred, self.start, hi))
            }
        }
    }

    /// The generalised inverse as a function on the convex hull of the range.
    ///
    /// Piecewise linear functions are inverted piece by piece: plateaus
    /// become jumps and jumps become plateaus.
    pub fn gen_inverse(&self) -> Result<MonotoneFunction> {
        let y0 = self.eval(self.start);
        let sup = self.sup();
        let attained = self.closed
            || match &self.repr {
                Repr::Pieces(p) => {
                    let q = p.last().unwrap();
                    q.base == f64::INFINITY || (q.slope == 0.0 && q.coef == 0.0)
                }
                Repr::Callable { .. } => false,
            };
        if let Repr::Pieces(p) = &self.repr {
            if p.iter().all(|q| q.coef == 0.0 && q.base.is_finite()) {
                let mut out: Vec<Piece> = Vec::new();
                let mut y = y0;
                for (k, q) in p.iter().enumerate() {
                    let next = p.get(k + 1).map_or(self.end, |r| r.start);
                    if q.base > y {
                        out.push(Piece::constant(y, q.start));
                        y = q.base;
                    }
                    let left = q.interior(next - q.start);
                    if q.slope > 0.0 && left > y {
                        out.push(Piece::linear(y, q.start, q.start, 1.0 / q.slope));
                        y = left;
                    }
                }
                if out.is_empty() {
                    let s0 = self.start;
                    return Ok(MonotoneFunction::callable(y0, y0, move |_| s0).closed());
                }
                for q in out.iter_mut() {
                    q.at_start = self.inverse_at(q.start)?;
                }
                let inv = MonotoneFunction::from_pieces(out, y)?;
                return Ok(if attained { inv.closed() } else { inv });
            }
        }
        let me = self.clone();
        let inv = MonotoneFunction::callable(y0, sup, move |y| me.inverse_at(y).unwrap_or(f64::NAN));
        Ok(if attained { inv.closed() } else { inv })
    }
}
