//! TOML run configuration.
//!
//! ```toml
//! command = "sweep"            # optional; the subcommand wins
//! q = 0.2
//! angles = [0.785398, 1.570796, 2.356194]
//! format = "csv"
//! output = "rows.csv"          # optional
//!
//! [tolerances]
//! eps = 1e-8                   # certificate target for q_H
//! root_tol = 1e-13             # bisection tolerance for t̂
//!
//! [grid]
//! r_min = 1.0
//! r_max = 1e3
//! points = 12
//! geometric = true
//!
//! [hamiltonian]
//! kind = "corpus"              # corpus | constant | piecewise | alternating | primitive-powers
//! name = "identity"
//! ```
//!
//! Optional sections `[string]`, `[sl]`, `[spectral]` and `[series]` feed
//! the subcommands of the same names.  Unknown keys are rejected.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::path::PathBuf;

use canonical_weyl::estimator::Q_MAX;
use canonical_weyl::strings::{KreinString, MonotoneFunction, SlProblem, X0Choice};
use canonical_weyl::{corpus, Hamiltonian, Interval, Sym2};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Estimate,
    Weyl,
    BoundsCheck,
    SeriesCheck,
    Spectral,
    String,
    Sl,
    Sweep,
    Corpus,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default = "default_angles")]
    pub angles: Vec<f64>,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub string: Option<StringSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sl: Option<SlSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesSpec>,
}

pub const DEFAULT_Q: f64 = 0.2;
pub const DEFAULT_EPS: f64 = 1e-8;
pub const DEFAULT_ROOT_TOL: f64 = 1e-13;
pub const DEFAULT_ANGLES: [f64; 3] = [FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4];

fn default_q() -> f64 {
    DEFAULT_Q
}

fn default_angles() -> Vec<f64> {
    DEFAULT_ANGLES.to_vec()
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            q: DEFAULT_Q,
            angles: default_angles(),
            format: Format::Csv,
            output: None,
            tolerances: Tolerances::default(),
            grid: GridSpec::default(),
            hamiltonian: None,
            string: None,
            sl: None,
            spectral: None,
            series: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_root_tol")]
    pub root_tol: f64,
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

fn default_root_tol() -> f64 {
    DEFAULT_ROOT_TOL
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eps: DEFAULT_EPS, root_tol: DEFAULT_ROOT_TOL }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_r_min")]
    pub r_min: f64,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_geometric")]
    pub geometric: bool,
}

fn default_r_min() -> f64 {
    1.0
}

fn default_r_max() -> f64 {
    1e3
}

fn default_points() -> usize {
    12
}

fn default_geometric() -> bool {
    true
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { r_min: default_r_min(), r_max: default_r_max(), points: default_points(), geometric: true }
    }
}

impl GridSpec {
    /// `MIN:MAX:N`, geometric.
    pub fn parse_flag(s: &str) -> Result<GridSpec, CliError> {
        let bad = || CliError::schema("grid", format!("expected MIN:MAX:N, got {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let r_min = parts[0].trim().parse::<f64>().map_err(|_| bad())?;
        let r_max = parts[1].trim().parse::<f64>().map_err(|_| bad())?;
        let points = parts[2].trim().parse::<usize>().map_err(|_| bad())?;
        Ok(GridSpec { r_min, r_max, points, geometric: true })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.r_min];
        }
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                let s = k as f64 / n;
                if k + 1 == self.points {
                    self.r_max
                } else if self.geometric {
                    self.r_min * (self.r_max / self.r_min).powf(s)
                } else {
                    self.r_min + (self.r_max - self.r_min) * s
                }
            })
            .collect()
    }
}

/// `[h1, h2, h3]` for `[[h1, h3], [h3, h2]]`.
pub type SymEntries = [f64; 3];

fn sym(e: &SymEntries) -> Sym2 {
    Sym2::new(e[0], e[1], e[2])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerTerm {
    pub power: f64,
    pub m: SymEntries,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HamiltonianSpec {
    /// A named reference Hamiltonian.
    Corpus { name: String },
    /// `H` constant on `[0, ∞)`.
    Constant { h: SymEntries },
    /// `values[k]` on `(breaks[k], breaks[k+1])`; the last break may be `inf`.
    Piecewise { breaks: Vec<f64>, values: Vec<SymEntries> },
    /// `ξ_φξ_φᵀ` and `ξ_{−φ}ξ_{−φ}ᵀ` on alternating geometric intervals.
    Alternating { beta: f64, phi: f64 },
    /// `M(t) = Σ t^{power} m`.
    PrimitivePowers { terms: Vec<PowerTerm> },
}

impl HamiltonianSpec {
    pub fn build(&self) -> Result<Hamiltonian, CliError> {
        let invalid = |e: canonical_weyl::Error| CliError::schema("hamiltonian", e.to_string());
        match self {
            HamiltonianSpec::Corpus { name } => corpus::by_name(name).ok_or_else(|| {
                CliError::schema("hamiltonian.name", format!("unknown corpus entry {name:?}; known: {}", corpus::NAMES.join(", ")))
            }),
            HamiltonianSpec::Constant { h } => Hamiltonian::constant(0.0, sym(h)).map_err(invalid),
            HamiltonianSpec::Piecewise { breaks, values } => {
                Hamiltonian::piecewise(breaks.clone(), values.iter().map(sym).collect()).map_err(invalid)
            }
            HamiltonianSpec::Alternating { beta, phi } => corpus::alternating_dyads(*beta, *phi).map_err(invalid),
            HamiltonianSpec::PrimitivePowers { terms } => {
                Hamiltonian::primitive_powers(0.0, terms.iter().map(|t| (t.power, sym(&t.m))).collect()).map_err(invalid)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MassSpec {
    /// `c x^ρ` on `[0, ∞)`.
    Power { c: f64, rho: f64 },
    /// Linear between knots with values `at` (left limits) and `right`
    /// (right limits), optionally continued linearly.
    LinearWithJumps {
        knots: Vec<f64>,
        at: Vec<f64>,
        right: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail_slope: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StringSpec {
    pub mass: MassSpec,
    /// Defaults to the end of the mass function's domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
}

impl StringSpec {
    pub fn build(&self) -> Result<KreinString, CliError> {
        let invalid = |e: canonical_weyl::Error| CliError::schema("string.mass", e.to_string());
        let m = match &self.mass {
            MassSpec::Power { c, rho } => MonotoneFunction::power(*c, *rho),
            MassSpec::LinearWithJumps { knots, at, right, tail_slope } => {
                MonotoneFunction::linear_with_jumps(knots, at, right, *tail_slope)
            }
        }
        .map_err(invalid)?;
        let length = self.length.unwrap_or(m.end());
        KreinString::new(length, m).map_err(|e| CliError::schema("string.length", e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    /// `q = height` on `[0, width]`, `0` beyond.
    pub height: f64,
    pub width: f64,
    pub lambda0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlSpec {
    /// Constant coefficients on `[0, ∞)`.
    #[serde(default = "one")]
    pub p: f64,
    #[serde(default = "one")]
    pub w: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bump: Option<BumpSpec>,
}

fn one() -> f64 {
    1.0
}

fn default_kappa() -> f64 {
    0.1
}

impl SlSpec {
    pub fn build(&self) -> SlProblem {
        let (p, w) = (self.p, self.w);
        let prob = SlProblem::new(Interval::half_line(0.0), move |_| p, move |_| w);
        match self.bump {
            None => prob,
            Some(b) => {
                let (h, width) = (b.height, b.width);
                prob.with_potential(move |x| if x <= width { h } else { 0.0 }, b.lambda0, X0Choice::Search(width))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureSpec {
    Lebesgue,
    Atom { x: f64 },
    /// `c |t|^p dt` on `ℝ`.
    Power { c: f64, p: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSpec {
    /// `g(r) = c r^α`.
    pub alpha: f64,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "default_a_prime")]
    pub a_prime: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
}

fn default_a_prime() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    #[serde(default = "default_order")]
    pub order: usize,
    /// Points `t`; defaults to the grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
}

fn default_order() -> usize {
    8
}

/// Parse and validate a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        let (line, column) = e.span().map(|s| line_col(text, s.start)).unwrap_or((0, 0));
        CliError::Parse { line, column, message: e.message().to_string() }
    })?;
    let cfg: RunConfig = serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        let key = match unknown_field(&inner) {
            Some(f) if path == "." => f,
            Some(f) if !path.ends_with(&f) => format!("{path}.{f}"),
            _ => path,
        };
        let message = inner.lines().next().unwrap_or_default().trim().to_string();
        CliError::schema(key, message)
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Serialize with every default spelled out.
pub fn serialize_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("RunConfig serializes")
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map(|l| l.chars().count()).unwrap_or(0) + 1;
    (line, column)
}

fn unknown_field(msg: &str) -> Option<String> {
    let rest = msg.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.q > 0.0 && self.q < Q_MAX) {
            return Err(CliError::schema("q", format!("q = {} must lie in (0, 1 - 1/sqrt 2)", self.q)));
        }
        let t = &self.tolerances;
        for (key, v) in [("tolerances.eps", t.eps), ("tolerances.root_tol", t.root_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::schema(key, format!("{v} must be positive")));
            }
        }
        let g = &self.grid;
        if !(g.r_min > 0.0 && g.r_min.is_finite()) {
            return Err(CliError::schema("grid.r_min", format!("{} must be positive", g.r_min)));
        }
        if g.points == 0 {
            return Err(CliError::schema("grid.points", "at least one point"));
        }
        if g.points > 1 && !(g.r_max > g.r_min && g.r_max.is_finite()) {
            return Err(CliError::schema("grid.r_max", format!("{} must exceed r_min = {}", g.r_max, g.r_min)));
        }
        if self.angles.is_empty() {
            return Err(CliError::schema("angles", "at least one angle"));
        }
        if let Some(&bad) = self.angles.iter().find(|a| !(**a > 0.0 && **a < 2.0 * PI)) {
            return Err(CliError::schema("angles", format!("{bad} outside (0, 2π)")));
        }
        if let Some(sl) = &self.sl {
            for (key, v) in [("sl.p", sl.p), ("sl.w", sl.w), ("sl.kappa", sl.kappa)] {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::schema(key, format!("{v} must be positive")));
                }
            }
            if let Some(b) = &sl.bump {
                if !(b.width > 0.0 && b.width.is_finite()) {
                    return Err(CliError::schema("sl.bump.width", format!("{} must be positive", b.width)));
                }
            }
        }
        if let Some(s) = &self.series {
            if s.order == 0 || s.order > canonical_weyl::weyl::VERIFY_CAP {
                return Err(CliError::schema(
                    "series.order",
                    format!("{} outside 1..={}", s.order, canonical_weyl::weyl::VERIFY_CAP),
                ));
            }
        }
        Ok(())
    }

    /// Angles for Hamiltonian commands must lie in `(0, π)`.
    pub fn check_upper_half_plane(&self) -> Result<(), CliError> {
        match self.angles.iter().find(|a| !(**a > 0.0 && **a < PI)) {
            Some(bad) => Err(CliError::schema("angles", format!("{bad} outside (0, π)"))),
            None => Ok(()),
        }
    }

    pub fn hamiltonian(&self) -> Result<Hamiltonian, CliError> {
        self.hamiltonian
            .as_ref()
            .ok_or_else(|| CliError::schema("hamiltonian", "this command needs a [hamiltonian] section"))?
            .build()
    }
}

/// Comma-separated angles in radians; `pi`, `pi/4`, `3pi/4` are accepted.
pub fn parse_angles(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|a| parse_angle(a.trim())).collect()
}

fn parse_angle(s: &str) -> Result<f64, CliError> {
    let bad = || CliError::schema("angles", format!("cannot read angle {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (s, 1.0),
    };
    let value = match num.strip_suffix("pi") {
        Some("") => PI,
        Some(c) => c.trim().trim_end_matches('*').parse::<f64>().map_err(|_| bad())? * PI,
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(value / den)
}
