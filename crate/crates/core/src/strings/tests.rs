use super::*;
use crate::estimator::{a_via_string, estimate_bundle, EstimatorConfig};
use crate::weyl::polar;
use alloc::sync::Arc;
use alloc::vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn linear_mass() -> MonotoneFunction {
    MonotoneFunction::from_pieces(vec![Piece::linear(0.0, 0.0, 0.0, 1.0)], f64::INFINITY).unwrap()
}

fn linear_string() -> KreinString {
    KreinString::new(f64::INFINITY, linear_mass()).unwrap()
}

/// Random left-continuous piecewise linear function on `[0, n)` with
/// plateaus and jumps.
fn random_monotone(rng: &mut ChaCha8Rng, n: usize, tail: bool) -> MonotoneFunction {
    random_pieces(rng, n, tail, false)
}

/// A random mass on `[0, ∞)` that is positive on `(0, ∞)` with no jump at 0.
fn random_mass(rng: &mut ChaCha8Rng, n: usize) -> MonotoneFunction {
    random_pieces(rng, n, true, true)
}

fn random_pieces(rng: &mut ChaCha8Rng, n: usize, tail: bool, rising_start: bool) -> MonotoneFunction {
    let mut knots = vec![0.0];
    for _ in 0..n {
        let last = *knots.last().unwrap();
        knots.push(last + rng.gen_range(0.25..2.0));
    }
    let mut at = vec![0.0];
    let mut right = Vec::new();
    for k in 0..n {
        let first = rising_start && k == 0;
        let jump = if !first && rng.gen_bool(0.4) { rng.gen_range(0.1..1.5) } else { 0.0 };
        let r = at[k] + jump;
        right.push(r);
        let slope = if !first && rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.5..2.0) };
        at.push(r + slope * (knots[k + 1] - knots[k]));
    }
    let tail_slope = if tail { Some(rng.gen_range(0.5..2.0)) } else { None };
    MonotoneFunction::linear_with_jumps(&knots, &at, &right, tail_slope).unwrap()
}

// ----- generalised inverse ------------------------------------------------

#[test]
fn inverse_of_square() {
    let f = MonotoneFunction::power(1.0, 2.0).unwrap();
    assert!(rel(f.inverse_at(4.0).unwrap(), 2.0) < 1e-14);
    let g = f.gen_inverse().unwrap();
    assert!(rel(g.eval(4.0), 2.0) < 1e-12);
    assert!(rel(g.eval(0.09), 0.3) < 1e-12);
}

#[test]
fn inverse_with_plateau() {
    let f = MonotoneFunction::from_pieces(
        vec![Piece::constant(0.0, 0.0), Piece::linear(1.0, 0.0, 0.0, 1.0)],
        f64::INFINITY,
    )
    .unwrap();
    assert_eq!(f.inverse_at(0.0).unwrap(), 0.0);
    for y in [1e-9, 0.5, 3.0] {
        assert!(rel(f.inverse_at(y).unwrap(), 1.0 + y) < 1e-14);
    }
    let g = f.gen_inverse().unwrap();
    assert_eq!(g.eval(0.0), 0.0);
    for y in [1e-9, 0.5, 3.0] {
        assert!(rel(g.eval(y), 1.0 + y) < 1e-14);
    }
}

#[test]
fn inverse_below_range_is_an_error() {
    let f = MonotoneFunction::from_pieces(vec![Piece::linear(0.0, 1.0, 1.0, 1.0)], 2.0).unwrap();
    assert!(matches!(f.inverse_at(0.5), Err(Error::Domain(_))));
    assert!(matches!(f.inverse_at(5.0), Err(Error::Domain(_))));
}

#[test]
fn inverse_of_step_function_matches_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    // Steps at multiples of 1/8 on [0, 4); left-continuous.
    let mut pieces = vec![Piece::constant(0.0, 0.0)];
    let mut v = 0.0;
    for k in 1..32 {
        let prev = v;
        if rng.gen_bool(0.5) {
            v += rng.gen_range(0.1..1.0);
        }
        pieces.push(Piece::linear(k as f64 / 8.0, prev, v, 0.0));
    }
    let f = MonotoneFunction::from_pieces(pieces, 4.0).unwrap();
    let g = f.gen_inverse().unwrap();
    let h = 1.0 / 65536.0;
    for _ in 0..100 {
        let y = rng.gen_range(0.0..v);
        let mut x = 0.0;
        while f.eval(x) < y {
            x += h;
        }
        let inv = f.inverse_at(y).unwrap();
        assert!(inv <= x && x - inv <= h + 1e-12, "y = {y}: {inv} vs grid {x}");
        assert_eq!(g.eval(y), inv);
    }
}

#[test]
fn gen_inverse_agrees_with_pointwise_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let tail = rng.gen_bool(0.5);
        let f = random_monotone(&mut rng, 6, tail);
        let g = f.gen_inverse().unwrap();
        let top = f.eval(f.end().min(1e3) - 1e-9);
        for _ in 0..50 {
            let y = rng.gen_range(0.0..top);
            let a = f.inverse_at(y).unwrap();
            assert!((g.eval(y) - a).abs() <= 1e-12 * a.max(1.0), "y = {y}");
        }
    }
}

fn arb_monotone() -> impl Strategy<Value = MonotoneFunction> {
    (any::<u64>(), 1usize..8).prop_map(|(seed, n)| random_monotone(&mut ChaCha8Rng::seed_from_u64(seed), n, false))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Values in the domain, monotone, left-continuous.
    #[test]
    fn inverse_laws_range_and_monotone(f in arb_monotone(), us in prop::collection::vec(0.0f64..1.0, 2..20)) {
        let top = f.left_limit(f.end());
        let mut ys: Vec<f64> = us.iter().map(|u| u * top).collect();
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut prev = f64::NEG_INFINITY;
        for &y in &ys {
            let x = f.inverse_at(y).unwrap();
            prop_assert!(x >= f.start() && x < f.end());
            prop_assert!(x >= prev);
            prev = x;
            if y > 1e-6 {
                let xl = f.inverse_at(y - 1e-10).unwrap();
                prop_assert!(x - xl <= 1e-8);
            }
        }
    }

    // f⁻(f(x)) is the start of the level set of f(x) and at most x.
    #[test]
    fn inverse_laws_level_sets(f in arb_monotone(), u in 0.0f64..1.0) {
        let x = f.start() + u * (f.end() - f.start()) * (1.0 - 1e-9);
        let v = f.eval(x);
        let back = f.inverse_at(v).unwrap();
        prop_assert!(back <= x + 1e-12);
        let below = back * (1.0 - 1e-9) - 1e-12;
        if below >= 0.0 {
            prop_assert!(f.eval(below) < v);
        }
        if x - back > 1e-9 {
            prop_assert!(f.eval(0.5 * (back + x)) == v);
        }
        if f.derivative(x) > 0.0 {
            prop_assert!((back - x).abs() <= 1e-9 * x.max(1.0));
        }
    }

    // f(f⁻(y)) ≤ y by left-continuity; ≥ y where f is right-continuous.
    #[test]
    fn inverse_laws_round_trip(f in arb_monotone(), u in 0.0f64..1.0) {
        let y = u * f.left_limit(f.end());
        let x = f.inverse_at(y).unwrap();
        prop_assert!(f.eval(x) <= y * (1.0 + 1e-12) + 1e-12);
        if f.right_limit(x) == f.eval(x) {
            prop_assert!(f.eval(x) >= y * (1.0 - 1e-12) - 1e-12);
        }
    }

    // f ≤ g implies f⁻ ≥ g⁻.
    #[test]
    fn inverse_laws_order_reversal(f in arb_monotone(), c in 0.0f64..2.0, u in 0.0f64..1.0) {
        let me = f.clone();
        let g = MonotoneFunction::callable(f.start(), f.end(), move |x| me.eval(x) + c * x);
        let y = u * f.left_limit(f.end());
        prop_assert!(f.inverse_at(y).unwrap() >= g.inverse_at(y).unwrap() - 1e-9);
    }

    // (ψ∘f∘φ)⁻ = φ⁻¹∘f⁻∘ψ⁻¹ for φ(x) = 2x, ψ(y) = 3y + 1.
    #[test]
    fn inverse_laws_composition(f in arb_monotone(), u in 0.0f64..1.0) {
        let me = f.clone();
        let comp = MonotoneFunction::callable(0.0, 0.5 * f.end(), move |x| 3.0 * me.eval(2.0 * x) + 1.0);
        let y = u * f.left_limit(f.end());
        let v = 3.0 * y + 1.0;
        let lhs = comp.inverse_at(v).unwrap();
        let rhs = 0.5 * f.inverse_at(y).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0), "{} vs {}", lhs, rhs);
    }

    // Extending the domain leaves f⁻ unchanged on the old range.
    #[test]
    fn inverse_laws_extension(seed in any::<u64>(), u in 0.0f64..1.0) {
        let f = random_monotone(&mut ChaCha8Rng::seed_from_u64(seed), 5, true);
        let me = f.clone();
        let end = 7.0;
        let restricted = MonotoneFunction::callable(0.0, end, move |x| me.eval(x));
        let y = u * f.left_limit(end);
        let a = restricted.inverse_at(y).unwrap();
        let b = f.inverse_at(y).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * b.max(1.0));
    }

    // f(x) = x m(x) with m non-decreasing: 1 ≤ f⁻(cy)/f⁻(y) ≤ c.
    #[test]
    fn f_inverse_ratio_bounds(seed in any::<u64>(), ly in -4.0f64..2.0) {
        let m = random_mass(&mut ChaCha8Rng::seed_from_u64(seed), 5);
        let s = KreinString::new(f64::INFINITY, m).unwrap();
        let y = 10f64.powf(ly);
        let base = s.f_inverse(y).unwrap();
        for c in [2.0, 10.0] {
            let ratio = s.f_inverse(c * y).unwrap() / base;
            prop_assert!(ratio >= 1.0 - 1e-9 && ratio <= c * (1.0 + 1e-9), "c = {}: {}", c, ratio);
        }
    }
}

// ----- strings of Hamiltonians ----------------------------------------------

#[test]
fn string_of_identity() {
    let s = string_from_hamiltonian(&Hamiltonian::constant(0.0, Sym2::IDENTITY).unwrap());
    assert_eq!(s.length(), f64::INFINITY);
    for x in [0.0, 0.3, 7.0, 1e4] {
        assert!((s.mass_at(x) - x).abs() <= 1e-14 * x);
    }
    assert!(!s.is_regular());
}

#[test]
fn string_with_mass_at_origin() {
    let h = Hamiltonian::piecewise(vec![0.0, 1.0, f64::INFINITY], vec![Sym2::diag(0.0, 1.0), Sym2::IDENTITY]).unwrap();
    let s = string_from_hamiltonian(&h);
    assert_eq!(s.mass_at(0.0), 0.0);
    for x in [1e-12, 0.5, 3.0] {
        assert!(rel(s.mass_at(x), 1.0 + x) < 1e-14);
    }
}

#[test]
fn string_of_alternating_example() {
    let h = Hamiltonian::alternating(2.0, Sym2::dyad(FRAC_PI_4), Sym2::dyad(-FRAC_PI_4)).unwrap();
    let s = string_from_hamiltonian(&h);
    assert_eq!(s.length(), f64::INFINITY);
    for x in [0.01, 0.37, 1.0, 5.5, 300.0] {
        assert!(rel(s.mass_at(x), x) < 1e-9, "x = {x}: {}", s.mass_at(x));
    }
}

#[test]
fn regular_string_from_trailing_type_half_pi() {
    let h = Hamiltonian::piecewise(vec![0.0, 2.0, f64::INFINITY], vec![Sym2::diag(1.0, 3.0), Sym2::diag(0.0, 1.0)]).unwrap();
    let s = string_from_hamiltonian(&h);
    assert_eq!(s.length(), 2.0);
    assert!(rel(s.mass_end(), 6.0) < 1e-14);
    assert!(s.is_regular());
    let h2 = Hamiltonian::constant(0.0, Sym2::diag(1.0, 3.0)).unwrap();
    assert!(!string_from_hamiltonian(&h2).is_regular());
}

#[test]
fn string_ignores_off_diagonal() {
    let h = Hamiltonian::piecewise(
        vec![0.0, 1.0, 3.0, f64::INFINITY],
        vec![Sym2::new(1.0, 1.0, 0.5), Sym2::new(2.0, 1.0, -1.0), Sym2::new(1.0, 4.0, 1.5)],
    )
    .unwrap();
    let d = Hamiltonian::piecewise(
        vec![0.0, 1.0, 3.0, f64::INFINITY],
        vec![Sym2::diag(1.0, 1.0), Sym2::diag(2.0, 1.0), Sym2::diag(1.0, 4.0)],
    )
    .unwrap();
    let (s, sd) = (string_from_hamiltonian(&h), string_from_hamiltonian(&d));
    for x in [0.2, 1.0, 2.5, 5.0, 9.0] {
        assert_eq!(s.mass_at(x), sd.mass_at(x));
    }
}

#[test]
fn string_is_reparameterization_invariant() {
    let h = Hamiltonian::piecewise(
        vec![0.0, 1.0, 2.0, f64::INFINITY],
        vec![Sym2::diag(1.0, 2.0), Sym2::diag(0.0, 1.0), Sym2::diag(3.0, 1.0)],
    )
    .unwrap();
    let inv: crate::hamiltonian::ScalarFn = Arc::new(|t: f64| t.sqrt());
    let hr = h.reparameterize(Interval::half_line(0.0), |u| u * u, |u| 2.0 * u, Some(inv)).unwrap();
    let (s, sr) = (string_from_hamiltonian(&h), string_from_hamiltonian(&hr));
    assert_eq!(sr.length(), f64::INFINITY);
    for x in [0.1, 0.6, 0.999, 1.001, 2.0, 10.0] {
        assert!(rel(sr.mass_at(x), s.mass_at(x)) < 1e-9, "x = {x}");
    }
}

#[test]
fn hamiltonian_of_linear_mass() {
    let h = hamiltonian_from_string(&linear_string());
    for t in [0.1, 1.0, 50.0] {
        assert_eq!(h.h(t), Sym2::diag(0.5, 0.5));
    }
}

#[test]
fn mass_jump_gives_indivisible_interval() {
    // m(x) = x on [0, 1], 2 + x after.
    let mass = MonotoneFunction::from_pieces(
        vec![Piece::linear(0.0, 0.0, 0.0, 1.0), Piece::linear(1.0, 1.0, 3.0, 1.0)],
        f64::INFINITY,
    )
    .unwrap();
    let h = hamiltonian_from_string(&KreinString::new(f64::INFINITY, mass).unwrap());
    assert_eq!(h.h(1.0), Sym2::diag(0.5, 0.5));
    for t in [2.01, 3.0, 3.99] {
        assert_eq!(h.h(t), Sym2::diag(0.0, 1.0));
    }
    assert_eq!(h.h(4.5), Sym2::diag(0.5, 0.5));
    // The callable path finds the same interval.
    let ml = linear_mass();
    let s = KreinString::new(
        f64::INFINITY,
        MonotoneFunction::callable(0.0, f64::INFINITY, move |x| if x <= 1.0 { ml.eval(x) } else { 2.0 + x }),
    )
    .unwrap();
    let hc = hamiltonian_from_string(&s);
    assert_eq!(hc.h(3.0), Sym2::diag(0.0, 1.0));
    assert!((hc.h(1.5).h1 - 0.5).abs() < 1e-6);
}

#[test]
fn round_trip_on_random_strings() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..20 {
        let infinite = k % 2 == 0;
        let m = random_monotone(&mut rng, 5, infinite);
        let length = if infinite { f64::INFINITY } else { m.end() };
        let s = KreinString::new(length, m.clone()).unwrap();
        let back = string_from_hamiltonian(&hamiltonian_from_string(&s));
        assert_eq!(back.length() == f64::INFINITY, infinite);
        if !infinite {
            assert!(rel(back.length(), length) < 1e-12);
        }
        let top = if infinite { 14.0 } else { length };
        let knots: Vec<f64> = m.pieces().unwrap().iter().map(|p| p.start).collect();
        // Knots of the reconstruction may move by rounding; sample beside them.
        let mut xs: Vec<f64> = knots.iter().flat_map(|&x| [x * (1.0 - 1e-10), x * (1.0 + 1e-10) + 1e-10]).collect();
        for _ in 0..20 {
            xs.push(rng.gen_range(0.0..top));
        }
        for x in xs.into_iter().filter(|&x| x < top) {
            let (a, b) = (back.mass_at(x), s.mass_at(x));
            assert!((a - b).abs() <= 1e-9 * b.max(1.0), "string {k}, x = {x}: {a} vs {b}");
        }
    }
}

// ----- q_S and the Kasahara estimate ---------------------------------------

#[test]
fn q_string_of_linear_mass() {
    let v = q_string(&linear_string(), C64::new(-4.0, 0.0), 1e-10).unwrap();
    assert!((v.value - C64::new(0.5, 0.0)).norm() < 1e-9);
    let e = kasahara_estimate(&linear_string(), 4.0).unwrap();
    assert!((e.f_inv - 0.5).abs() < 1e-15);
    assert!((e.ratio - 1.0).abs() < 1e-8);
    assert!(q_string(&linear_string(), C64::new(2.0, 0.0), 1e-10).is_err());
}

#[test]
fn q_string_is_positive_on_negative_axis() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..5 {
        let m = random_monotone(&mut rng, 4, true);
        let s = KreinString::new(f64::INFINITY, m).unwrap();
        let v = q_string(&s, C64::new(-1.0, 0.0), 1e-9).unwrap();
        assert!(v.value.re > 0.0);
        assert!(v.value.im.abs() <= v.radius + 1e-12);
    }
    let h = Hamiltonian::constant(0.0, Sym2::diag(4.0, 1.0)).unwrap();
    let v = q_string_for(&h, C64::new(-1.0, 0.0), 1e-10).unwrap();
    assert!((v.value.re - 2.0).abs() < 1e-8 && v.value.im.abs() < 1e-8);
}

#[test]
fn kasahara_band_constant() {
    let (lo, hi) = KASAHARA_BAND;
    assert!(rel(lo, 0.1 * 0.4375 / 11.5625) < 1e-15);
    assert!(rel(hi, 10.0 * 11.5625 / 0.4375) < 1e-15);
    let (l2, h2) = kasahara_band(0.2).unwrap();
    assert!(rel(l2, lo) < 1e-14 && rel(h2, hi) < 1e-14);
}

#[test]
fn kasahara_cubic_mass() {
    let s = KreinString::new(f64::INFINITY, MonotoneFunction::power(1.0, 3.0).unwrap()).unwrap();
    for y in [1.0, 1e2, 1e4] {
        let e = kasahara_estimate(&s, y).unwrap();
        assert!(rel(e.f_inv, y.powf(-0.25)) < 1e-9);
        assert!(e.ratio >= 1.0 / 30.0 && e.ratio <= 30.0, "y = {y}: {}", e.ratio);
        assert!(e.ratio >= KASAHARA_BAND.0 && e.ratio <= KASAHARA_BAND.1);
    }
}

#[test]
fn regular_string_f_inverse_saturates() {
    let mass = MonotoneFunction::from_pieces(vec![Piece::linear(0.0, 0.0, 0.0, 1.0)], 2.0).unwrap();
    let s = KreinString::new(2.0, mass).unwrap();
    assert_eq!(s.f(2.0), 4.0);
    assert_eq!(s.f(2.5), f64::INFINITY);
    for y in [1e-1, 1e-3, 1e-6] {
        assert_eq!(s.f_inverse(1.0 / y).unwrap(), 2.0);
    }
    assert!(rel(s.f_inverse(1.0).unwrap(), 1.0) < 1e-14);
}

#[test]
fn a_via_string_matches_on_string_hamiltonians() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let cfg = EstimatorConfig::default();
    let m = random_mass(&mut rng, 5);
    let h = hamiltonian_from_string(&KreinString::new(f64::INFINITY, m).unwrap());
    for _ in 0..20 {
        let r = 10f64.powf(rng.gen_range(-1.0..3.0));
        let a = estimate_bundle(&h, r, &[], &cfg).unwrap().a;
        assert!(rel(a_via_string(&h, r, &cfg).unwrap(), a) < 1e-9);
    }
}

// ----- Kac-type criteria ----------------------------------------------------

#[test]
fn kac_string_power_threshold() {
    let s = linear_string();
    for (gamma, want) in [(0.3, Convergence::Convergent), (0.45, Convergence::Convergent), (0.5, Convergence::Divergent), (0.7, Convergence::Divergent)] {
        let v = kac_string_criterion(&s, &RegVarFunction::power(gamma)).unwrap();
        assert_eq!(v.verdict, want, "γ = {gamma}");
        assert_eq!(v.x0, 1.0);
    }
    // ∫₀¹ (2/x²)^{0.3} dx = 2^{0.3}/0.4.
    let v = kac_string_criterion(&s, &RegVarFunction::power(0.3)).unwrap();
    assert!(rel(v.study.value, 2f64.powf(0.3) / 0.4) < 1e-4);
}

#[test]
fn kac_sandwich_on_identity() {
    // m(x) = x, F(u) = u^{−1/4}: lower 2^{3/4}√c, middle 2√c, upper 2^{5/4}√c.
    let h = Hamiltonian::constant(0.0, Sym2::IDENTITY).unwrap();
    for c in [0.01, 0.1, 0.5, 1.0, 4.0] {
        let s = kac_sandwich(&h, |u| u.powf(-0.25), c).unwrap();
        assert!(rel(s.lower, 2f64.powf(0.75) * c.sqrt()) < 1e-6, "{s:?}");
        assert!(rel(s.middle, 2.0 * c.sqrt()) < 1e-6, "{s:?}");
        assert!(rel(s.upper, 2f64.powf(1.25) * c.sqrt()) < 1e-6, "{s:?}");
        assert!(s.holds(0.0));
    }
}

#[test]
fn kac_sandwich_on_piecewise() {
    let h = Hamiltonian::piecewise(
        vec![0.0, 0.5, 1.0, 2.0, f64::INFINITY],
        vec![Sym2::diag(1.0, 3.0), Sym2::diag(0.0, 1.0), Sym2::diag(2.0, 0.5), Sym2::diag(1.0, 1.0)],
    )
    .unwrap();
    for c in [0.2, 0.7, 1.5, 3.0, 6.0] {
        let s = kac_sandwich(&h, |u| 1.0 / (1.0 + u), c).unwrap();
        assert!(s.holds(1e-9), "c = {c}: {s:?}");
    }
    let r = Hamiltonian::piecewise(vec![0.0, 1.0, f64::INFINITY], vec![Sym2::IDENTITY, Sym2::diag(0.0, 1.0)]).unwrap();
    assert!(kac_sandwich(&r, |u| 1.0 / (1.0 + u), 0.75).is_err());
}

// ----- Sturm–Liouville ------------------------------------------------------

fn free_problem() -> SlProblem {
    SlProblem::new(Interval::half_line(0.0), |_| 1.0, |_| 1.0)
}

#[test]
fn sl_free_half_line() {
    let prob = free_problem();
    let kappa = 0.1;
    for r in [1.0, 10.0, 1e3] {
        for theta in [FRAC_PI_4, FRAC_PI_2, PI, 1.5 * PI] {
            let e = sl_envelope(&prob, r, theta, kappa).unwrap();
            assert!(rel(e.x_hat, kappa / r.sqrt()) < 1e-9);
            assert!(rel(e.b, r.sqrt()) < 1e-9 && rel(e.b_alt, r.sqrt()) < 1e-9);
            if theta < PI {
                let v = prob.q_dirichlet(polar(r, theta), 1e-8 * r.sqrt()).unwrap();
                let oracle = C64::new(0.0, 1.0) * polar(r, theta).sqrt();
                assert!((v.value - oracle).norm() < 1e-6 * r.sqrt());
            }
            let abs = r.sqrt();
            assert!(e.lower <= abs && abs <= e.upper);
        }
    }
    assert!(sl_envelope(&prob, 1.0, 1.0, sl::KAPPA_MAX).is_err());
    assert!(sl_envelope(&prob, 1.0, 0.0, 0.1).is_err());
}

#[test]
fn sl_constants_symmetric() {
    for k in 1..100 {
        let theta = PI + PI * k as f64 / 100.0 - 1e-3;
        let other = 2.0 * PI - theta;
        assert_eq!(sl_constants(0.1, theta).unwrap(), sl_constants(0.1, other).unwrap());
    }
    let (c1, c2) = sl_constants(0.1, PI).unwrap();
    let sigma = 1.0 / 0.64 - 1.0;
    assert!(rel(c2, (1.0 + sigma + 10.0) / (1.0 - sigma)) < 1e-14);
    assert!(rel(c1 * c2, 1.0) < 1e-15);
}

/// `ψ′(0)/ψ(0)` for `−ψ″ + qψ = λψ` with `q` supported in `[0, 1]` and
/// `ψ = e^{i√λ x}` beyond, by RK4 from `x = 1` back to `0`.
fn shooting_m(q: impl Fn(f64) -> f64, lambda: C64, n: usize) -> C64 {
    let k = {
        let s = lambda.sqrt();
        if s.im < 0.0 {
            -s
        } else {
            s
        }
    };
    let i = C64::new(0.0, 1.0);
    let f = |x: f64, y: [C64; 2]| [y[1], (C64::from(q(x)) - lambda) * y[0]];
    let mut y = [C64::new(1.0, 0.0), i * k];
    let h = -1.0 / n as f64;
    let mut x = 1.0;
    for _ in 0..n {
        let add = |a: [C64; 2], b: [C64; 2], s: f64| [a[0] + b[0] * s, a[1] + b[1] * s];
        let k1 = f(x, y);
        let k2 = f(x + 0.5 * h, add(y, k1, 0.5 * h));
        let k3 = f(x + 0.5 * h, add(y, k2, 0.5 * h));
        let k4 = f(x + h, add(y, k3, h));
        y = [
            y[0] + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * (h / 6.0),
            y[1] + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * (h / 6.0),
        ];
        x += h;
    }
    y[1] / y[0]
}

#[test]
fn shooting_oracle_reproduces_free_case() {
    let lambda = C64::new(3.0, 4.0);
    let m = shooting_m(|_| 0.0, lambda, 2000);
    assert!((m - C64::new(0.0, 1.0) * lambda.sqrt()).norm() < 1e-9);
}

#[test]
fn sl_bump_potential() {
    let bump = |x: f64| if x <= 1.0 { 2.0 } else { 0.0 };
    let prob = free_problem().with_potential(bump, -1.0, X0Choice::Search(1.0));
    let kappa = 0.1;
    let e0 = sl_envelope(&prob, 1e6, FRAC_PI_2, kappa).unwrap();
    let pot = e0.potential.unwrap();
    assert!(rel(pot.x0, 1.0 / 16.0) < 1e-15);
    assert!(pot.p_inv_integral <= 1.0 / 3.0 && pot.potential_integral <= 1.0 / 3.0);
    assert!(rel(pot.r0, 9.0 * kappa * kappa * 256.0) < 1e-9);
    assert!(pot.v_min >= 1.0 && pot.v_max <= (3f64.sqrt() / 16.0).cosh() + 1e-9);
    for r in [pot.r0, 10.0 * pot.r0, 100.0 * pot.r0] {
        for theta in [FRAC_PI_4, FRAC_PI_2, PI, 1.75 * PI] {
            let e = sl_envelope(&prob, r, theta, kappa).unwrap();
            let m = shooting_m(bump, C64::from(-1.0) + polar(r, theta), 20000);
            assert!(e.lower <= m.norm() && m.norm() <= e.upper, "r = {r}, θ = {theta}: {} vs {e:?}", m.norm());
        }
    }
    assert!(sl_envelope(&prob, 0.5 * pot.r0, FRAC_PI_2, kappa).is_err());
}

#[test]
fn sl_potential_too_large() {
    let prob = free_problem().with_potential(|_| 10.0, -1.0, X0Choice::Fixed(0.5));
    assert!(matches!(sl_envelope(&prob, 1e3, FRAC_PI_2, 0.1), Err(Error::PotentialTooLarge { .. })));
}

#[test]
fn sl_weighted_problem() {
    // p = 1, w = 4: x̂ = κ/(2√r), B = 2√r, and |q_D(re^{iθ})| = 2√r.
    let prob = SlProblem::new(Interval::half_line(0.0), |_| 1.0, |_| 4.0);
    let e = sl_envelope(&prob, 9.0, FRAC_PI_2, 0.1).unwrap();
    assert!(rel(e.x_hat, 0.1 / 6.0) < 1e-9);
    assert!(rel(e.b, 6.0) < 1e-9);
    let v = prob.q_dirichlet(polar(9.0, FRAC_PI_2), 1e-8).unwrap();
    assert!(rel(v.value.norm(), 6.0) < 1e-7);
    assert!(e.lower <= 6.0 && 6.0 <= e.upper);
}
