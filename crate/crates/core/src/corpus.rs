//! Reference Hamiltonians shared by the tests and the CLI.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use num_traits::Float;

use crate::error::Result;
use crate::hamiltonian::Hamiltonian;
use crate::linalg::Sym2;

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub hamiltonian: Hamiltonian,
}

/// `H = I` on `[0, ∞)`; `q_H ≡ i`.
pub fn identity() -> Hamiltonian {
    Hamiltonian::constant(0.0, Sym2::IDENTITY).expect("valid")
}

/// `H = diag(h1, h2)` on `[0, ∞)`; `q_H ≡ i√(h1/h2)`.
pub fn diagonal(h1: f64, h2: f64) -> Hamiltonian {
    Hamiltonian::constant(0.0, Sym2::diag(h1, h2)).expect("valid")
}

/// `ξ_φξ_φᵀ` on `(β^{2n−1}, β^{2n}]` and `ξ_{−φ}ξ_{−φ}ᵀ` on
/// `(β^{2n}, β^{2n+1}]`.
pub fn alternating_dyads(beta: f64, phi: f64) -> Result<Hamiltonian> {
    Hamiltonian::alternating(beta, Sym2::dyad(phi), Sym2::dyad(-phi))
}

/// The base-2 pattern, for which `L(2r) = L(r)` and `q_H(2z) = −q_H(−z)`.
pub fn log_periodic(phi: f64) -> Result<Hamiltonian> {
    alternating_dyads(2.0, phi)
}

/// `M(t) = t [[4,2],[2,1]] + t^α [[1,1],[1,1]]`, `α > 1`.
pub fn quadratic_primitive(alpha: f64) -> Result<Hamiltonian> {
    Hamiltonian::primitive_powers(0.0, vec![(1.0, Sym2::new(4.0, 1.0, 2.0)), (alpha, Sym2::new(1.0, 1.0, 1.0))])
}

/// [`quadratic_primitive`] rotated so that the limit direction of
/// `M/tr M` at `0` becomes `(0, 1)`.
pub fn rotated_quadratic_primitive(alpha: f64) -> Result<Hamiltonian> {
    let h = quadratic_primitive(alpha)?;
    let (_, phi) = h.derive_rotation()?;
    Ok(h.rotate(phi))
}

/// `diag(1, 0)` on `[0, 1]` followed by `I`; `q_H(z) = z + i`.
pub fn split_prefix() -> Hamiltonian {
    Hamiltonian::piecewise(vec![0.0, 1.0, f64::INFINITY], vec![Sym2::diag(1.0, 0.0), Sym2::IDENTITY]).expect("valid")
}

/// `φ_1 = 1`, then sweeps between `±1` with steps `1/2, 1/3, 1/4, …` in
/// alternating direction.
pub fn dense_sweep(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(1.0);
    let mut k = 2usize;
    let mut down = true;
    while out.len() < n {
        for j in 1..=2 * k {
            if out.len() >= n {
                break;
            }
            let x = j as f64 / k as f64;
            out.push(if down { 1.0 - x } else { -1.0 + x });
        }
        down = !down;
        k += 1;
    }
    out
}

/// Number of explicit panels in [`dense_oscillation`].
pub const DENSE_PANELS: usize = 12;

/// `t_n = 2^{1−n²}`.
pub fn dense_knot(n: usize) -> f64 {
    2f64.powi(1 - (n * n) as i32)
}

/// `½[[1, s_n], [s_n, 1]]` with `s_n = sin(πφ_n/2)` on `(t_{n+1}, t_n]`,
/// `diag(0, 1)` on `(1, ∞)`.  The panels `n ≤ 12` are explicit and the
/// twelfth is continued down to `0`.
pub fn dense_oscillation() -> Hamiltonian {
    let phis = dense_sweep(DENSE_PANELS);
    let mut breaks = vec![0.0];
    let mut values = Vec::new();
    for n in (1..=DENSE_PANELS).rev() {
        let s = (FRAC_PI_2 * phis[n - 1]).sin();
        breaks.push(dense_knot(n));
        values.push(Sym2::new(0.5, 0.5, 0.5 * s));
    }
    breaks.push(f64::INFINITY);
    values.push(Sym2::diag(0.0, 1.0));
    Hamiltonian::piecewise(breaks, values).expect("valid")
}

/// The envelope corpus.
pub fn envelope_corpus() -> Vec<CorpusEntry> {
    vec![
        CorpusEntry { name: "identity", hamiltonian: identity() },
        CorpusEntry { name: "diag(4,1)", hamiltonian: diagonal(4.0, 1.0) },
        CorpusEntry { name: "alternating-beta3", hamiltonian: alternating_dyads(3.0, FRAC_PI_4).expect("valid") },
        CorpusEntry { name: "log-periodic", hamiltonian: log_periodic(FRAC_PI_4).expect("valid") },
        CorpusEntry { name: "quadratic-primitive", hamiltonian: quadratic_primitive(2.0).expect("valid") },
        CorpusEntry {
            name: "quadratic-primitive-rotated",
            hamiltonian: rotated_quadratic_primitive(2.0).expect("valid"),
        },
        CorpusEntry { name: "split-prefix", hamiltonian: split_prefix() },
    ]
}

/// Look up a corpus Hamiltonian by name, including [`dense_oscillation`].
pub fn by_name(name: &str) -> Option<Hamiltonian> {
    if name == "dense-oscillation" {
        return Some(dense_oscillation());
    }
    envelope_corpus().into_iter().find(|e| e.name == name).map(|e| e.hamiltonian)
}

pub const NAMES: [&str; 8] = [
    "identity",
    "diag(4,1)",
    "alternating-beta3",
    "log-periodic",
    "quadratic-primitive",
    "quadratic-primitive-rotated",
    "split-prefix",
    "dense-oscillation",
];
