//! Command execution and output.

use std::io::Write;

use canonical_weyl::estimator::{bracket_bounds, estimate_bundle, EstimatorConfig};
use canonical_weyl::spectral::{growth_classes, tauberian_check, Evidence, RegVarFunction, SyntheticMeasure};
use canonical_weyl::strings::{kasahara_band, kasahara_estimate, sl_envelope};
use canonical_weyl::weyl::{polar, verify_coefficient_bounds, weyl_coefficient};
use canonical_weyl::{corpus, Hamiltonian};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Command, Format, MeasureSpec, RunConfig};
use crate::error::CliError;

pub const THREADS_ENV: &str = "CANONICAL_WEYL_THREADS";

/// A pool sized by `CANONICAL_WEYL_THREADS`, or the machine default.
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n = v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::schema(THREADS_ENV, format!("expected a positive integer, got {v:?}")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Io(std::io::Error::other(e)))
}

fn estimator_config(cfg: &RunConfig) -> EstimatorConfig {
    EstimatorConfig { q: cfg.q, root_tol: cfg.tolerances.root_tol, ..EstimatorConfig::default() }
}

fn sorted_angles(cfg: &RunConfig) -> Vec<f64> {
    let mut a = cfg.angles.clone();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    a.dedup();
    a
}

/// The part of `h` the envelope applies to: the tail after any leading
/// indivisible intervals, and where that tail starts.
pub fn envelope_hamiltonian(h: &Hamiltonian) -> Result<(Hamiltonian, Option<f64>), CliError> {
    let split = h.split_indivisible()?;
    let start = (!split.prefixes.is_empty()).then(|| split.tail.a());
    Ok((split.tail, start))
}

/// Evaluate `f` at every grid point in parallel, keeping grid order.
fn per_r<T: Send>(
    pool: &rayon::ThreadPool,
    rs: &[f64],
    f: impl Fn(f64) -> Result<Vec<T>, CliError> + Sync,
) -> Result<Vec<T>, CliError> {
    let blocks: Vec<Vec<T>> = pool.install(|| rs.par_iter().map(|&r| f(r)).collect::<Result<_, _>>())?;
    Ok(blocks.into_iter().flatten().collect())
}

// ----- sweep ----------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub r: f64,
    pub theta: f64,
    pub t_crit: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub lower_abs: f64,
    pub upper_abs: f64,
    pub abs_q: f64,
    pub re_q: f64,
    pub im_q: f64,
    pub eps_cert: f64,
    pub envelope_ok: bool,
    /// Smallest relative margin over the five inequalities; negative when
    /// one fails.
    #[serde(skip)]
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleSlope {
    pub theta: f64,
    pub slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub rows: usize,
    pub violations: usize,
    pub min_slack: f64,
    pub max_slack: f64,
    /// Start of the tail when a leading indivisible prefix was split off.
    pub prefix_end: Option<f64>,
    pub slope_a: Option<f64>,
    pub slope_l: Option<f64>,
    pub slope_abs_q: Vec<AngleSlope>,
    pub slope_im_q: Vec<AngleSlope>,
}

pub fn sweep_rows(h: &Hamiltonian, cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<Vec<SweepRow>, CliError> {
    cfg.check_upper_half_plane()?;
    let ecfg = estimator_config(cfg);
    let angles = sorted_angles(cfg);
    let eps = cfg.tolerances.eps;
    per_r(pool, &cfg.grid.values(), |r| {
        let b = estimate_bundle(h, r, &angles, &ecfg)?;
        b.envelopes
            .iter()
            .map(|env| {
                let q = weyl_coefficient(h, polar(r, env.theta), eps)?;
                let w = q.value;
                let n = w.norm();
                let slack = [
                    (n - env.lower_abs) / n,
                    (env.upper_abs - n) / env.upper_abs,
                    (env.upper_re - w.re.abs()) / env.upper_re,
                    (w.im - env.lower_im) / w.im,
                    (env.upper_im - w.im) / env.upper_im,
                ]
                .into_iter()
                .fold(f64::INFINITY, f64::min);
                Ok(SweepRow {
                    r,
                    theta: env.theta,
                    t_crit: b.t_crit,
                    a: b.a,
                    l: b.l,
                    lower_abs: env.lower_abs,
                    upper_abs: env.upper_abs,
                    abs_q: n,
                    re_q: w.re,
                    im_q: w.im,
                    eps_cert: q.radius,
                    envelope_ok: env.contains(w, q.radius),
                    slack,
                })
            })
            .collect()
    })
}

/// Least-squares slope of `ln y` against `ln x`; `None` without two
/// distinct positive samples.
pub fn loglog_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 || pts.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (mx / n, my / n);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| {
        let dx = x.ln() - mx;
        (a + dx * (y.ln() - my), b + dx * dx)
    });
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn summarize(rows: &[SweepRow], prefix_end: Option<f64>) -> SweepSummary {
    let mut angles: Vec<f64> = rows.iter().map(|r| r.theta).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    angles.dedup();
    let first = angles.first().copied();
    let per_r: Vec<&SweepRow> = rows.iter().filter(|r| Some(r.theta) == first).collect();
    let slope_of = |f: &dyn Fn(&SweepRow) -> f64, th: Option<f64>| {
        let pts: Vec<(f64, f64)> =
            rows.iter().filter(|r| th.map_or(Some(r.theta) == first, |t| r.theta == t)).map(|r| (r.r, f(r))).collect();
        loglog_slope(&pts)
    };
    SweepSummary {
        rows: rows.len(),
        violations: rows.iter().filter(|r| !r.envelope_ok).count(),
        min_slack: rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min),
        max_slack: rows.iter().map(|r| r.slack).fold(f64::NEG_INFINITY, f64::max),
        prefix_end,
        slope_a: loglog_slope(&per_r.iter().map(|r| (r.r, r.a)).collect::<Vec<_>>()),
        slope_l: loglog_slope(&per_r.iter().map(|r| (r.r, r.l)).collect::<Vec<_>>()),
        slope_abs_q: angles.iter().map(|&t| AngleSlope { theta: t, slope: slope_of(&|r| r.abs_q, Some(t)) }).collect(),
        slope_im_q: angles.iter().map(|&t| AngleSlope { theta: t, slope: slope_of(&|r| r.im_q, Some(t)) }).collect(),
    }
}

fn summary_text(s: &SweepSummary) -> String {
    let opt = |v: Option<f64>| v.map_or_else(|| String::from("n/a"), |x| format!("{x:.6}"));
    let per = |v: &[AngleSlope]| v.iter().map(|a| format!("θ={:.6}: {}", a.theta, opt(a.slope))).collect::<Vec<_>>().join(", ");
    let mut out = format!(
        "rows {}, envelope violations {}, slack min {:.6e} max {:.6e}\nslopes: A {}, L {}\nslopes |q|: {}\nslopes Im q: {}\n",
        s.rows,
        s.violations,
        s.min_slack,
        s.max_slack,
        opt(s.slope_a),
        opt(s.slope_l),
        per(&s.slope_abs_q),
        per(&s.slope_im_q)
    );
    if let Some(t) = s.prefix_end {
        out.push_str(&format!("indivisible prefix split off; tail starts at t = {t}\n"));
    }
    out
}

// ----- estimate and weyl --------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateRow {
    pub r: f64,
    pub theta: f64,
    pub t_crit: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub lower_abs: f64,
    pub upper_abs: f64,
    pub upper_re: f64,
    pub lower_im: f64,
    pub upper_im: f64,
}

pub fn estimate_rows(h: &Hamiltonian, cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<Vec<EstimateRow>, CliError> {
    cfg.check_upper_half_plane()?;
    let ecfg = estimator_config(cfg);
    let angles = sorted_angles(cfg);
    per_r(pool, &cfg.grid.values(), |r| {
        let b = estimate_bundle(h, r, &angles, &ecfg)?;
        Ok(b.envelopes
            .iter()
            .map(|e| EstimateRow {
                r,
                theta: e.theta,
                t_crit: b.t_crit,
                a: b.a,
                l: b.l,
                lower_abs: e.lower_abs,
                upper_abs: e.upper_abs,
                upper_re: e.upper_re,
                lower_im: e.lower_im,
                upper_im: e.upper_im,
            })
            .collect())
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylRow {
    pub r: f64,
    pub theta: f64,
    pub re_q: f64,
    pub im_q: f64,
    pub abs_q: f64,
    pub eps_cert: f64,
}

pub fn weyl_rows(h: &Hamiltonian, cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<Vec<WeylRow>, CliError> {
    let angles = sorted_angles(cfg);
    per_r(pool, &cfg.grid.values(), |r| {
        angles
            .iter()
            .map(|&theta| {
                let q = weyl_coefficient(h, polar(r, theta), cfg.tolerances.eps)?;
                Ok(WeylRow { r, theta, re_q: q.value.re, im_q: q.value.im, abs_q: q.value.norm(), eps_cert: q.radius })
            })
            .collect()
    })
}

// ----- bounds-check ---------------------------------------------------------

/// Factor between `t̂ − a` and the ends of the bracket used by
/// `bounds-check`.
pub const BRACKET_FACTOR: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsRow {
    pub r: f64,
    pub theta: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub a_lower: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub a_upper: f64,
    pub l_lower: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub l_upper: f64,
    pub lower_abs: f64,
    pub upper_abs: f64,
    pub abs_q: f64,
    pub eps_cert: f64,
    pub ok: bool,
}

/// Bracket bounds from `(a + (t̂−a)/2, a + 2(t̂−a))` against the bundle and
/// the solver value.
pub fn bounds_rows(h: &Hamiltonian, cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<Vec<BoundsRow>, CliError> {
    cfg.check_upper_half_plane()?;
    let ecfg = estimator_config(cfg);
    let angles = sorted_angles(cfg);
    let a0 = h.a();
    per_r(pool, &cfg.grid.values(), |r| {
        let b = estimate_bundle(h, r, &[], &ecfg)?;
        let d = b.t_crit - a0;
        let (t_lo, t_hi) = (a0 + d / BRACKET_FACTOR, (a0 + d * BRACKET_FACTOR).min(0.5 * (b.t_crit + h.b())));
        angles
            .iter()
            .map(|&theta| {
                let bb = bracket_bounds(h, r, (t_lo, t_hi), theta, &ecfg)?;
                let q = weyl_coefficient(h, polar(r, theta), cfg.tolerances.eps)?;
                let (n, e) = (q.value.norm(), q.radius);
                let tol = 1e-12;
                let ok = bb.a_lower() <= b.a * (1.0 + tol)
                    && b.a <= bb.a_upper() * (1.0 + tol)
                    && bb.l_lower <= b.l * (1.0 + tol) + tol
                    && b.l <= bb.l_upper * (1.0 + tol) + tol
                    && bb.lower_abs - e <= n
                    && n <= bb.upper_abs + e
                    && q.value.re.abs() <= bb.upper_re + e
                    && bb.lower_im - e <= q.value.im
                    && q.value.im <= bb.upper_im + e;
                Ok(BoundsRow {
                    r,
                    theta,
                    t_lo,
                    t_hi,
                    a_lower: bb.a_lower(),
                    a: b.a,
                    a_upper: bb.a_upper(),
                    l_lower: bb.l_lower,
                    l: b.l,
                    l_upper: bb.l_upper,
                    lower_abs: bb.lower_abs,
                    upper_abs: bb.upper_abs,
                    abs_q: n,
                    eps_cert: e,
                    ok,
                })
            })
            .collect()
    })
}

// ----- series-check ---------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesRow {
    pub t: f64,
    pub order: usize,
    pub method: String,
    pub checks: usize,
    pub failures: usize,
    /// Kinds of the failed checks, `;`-separated.
    pub failed_kinds: String,
}

pub fn series_rows(h: &Hamiltonian, cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<Vec<SeriesRow>, CliError> {
    let order = cfg.series.as_ref().map_or(8, |s| s.order);
    let ts = cfg.series.as_ref().and_then(|s| s.t.clone()).unwrap_or_else(|| cfg.grid.values());
    per_r(pool, &ts, |t| {
        let rep = verify_coefficient_bounds(h, t, order)?;
        let mut kinds: Vec<String> = rep.failures().map(|f| format!("{:?}", f.kind)).collect();
        kinds.dedup();
        Ok(vec![SeriesRow {
            t,
            order,
            method: format!("{:?}", rep.method),
            checks: rep.checks.len(),
            failures: rep.failures().count(),
            failed_kinds: kinds.join(";"),
        }])
    })
}

// ----- spectral -----------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralRow {
    pub section: String,
    pub key: String,
    pub value: String,
}

fn row(section: &str, key: impl Into<String>, value: impl Into<String>) -> SpectralRow {
    SpectralRow { section: section.into(), key: key.into(), value: value.into() }
}

pub fn spectral_rows(cfg: &RunConfig) -> Result<Vec<SpectralRow>, CliError> {
    let section = cfg.spectral.as_ref().ok_or_else(|| CliError::schema("spectral", "this command needs a [spectral] section"))?;
    let g = RegVarFunction::scaled_power(section.c, section.alpha);
    let mut rows = Vec::new();
    if cfg.hamiltonian.is_none() && section.measure.is_none() {
        return Err(CliError::schema("spectral", "give a [hamiltonian] section, spectral.measure, or both"));
    }
    if cfg.hamiltonian.is_some() {
        let h = cfg.hamiltonian()?;
        let rep = growth_classes(&h, &g, section.a_prime)?;
        for c in &rep.conditions {
            let detail = match &c.evidence {
                Evidence::Integral(s) => format!("integral {:e}", s.value),
                Evidence::Limsup(l) => format!("limsup {:e} ({:?})", l.limsup, l.limit),
                Evidence::Failed(m) => format!("failed: {m}"),
            };
            let verdict = c.verdict.map_or_else(|| String::from("Inconclusive"), |v| format!("{v:?}"));
            rows.push(row("condition", c.label, format!("{verdict}; {detail}")));
        }
        for (class, m) in &rep.classes {
            rows.push(row("class", format!("{class:?}"), format!("{m:?}")));
        }
        rows.push(row("report", "diagonally_dominant", format!("{:?}", rep.diagonally_dominant)));
        rows.push(row("report", "consistent", rep.consistent.to_string()));
        for n in &rep.notes {
            rows.push(row("note", "", n.clone()));
        }
    }
    if let Some(m) = &section.measure {
        let mu = match m {
            MeasureSpec::Lebesgue => SyntheticMeasure::lebesgue(),
            MeasureSpec::Atom { x } => SyntheticMeasure::unit_atom(*x),
            MeasureSpec::Power { c, p } => {
                SyntheticMeasure::power_density(*c, *p).map_err(|e| CliError::schema("spectral.measure", e.to_string()))?
            }
        };
        let t = tauberian_check(&mu, &g)?;
        let f = |v: f64| format!("{v:e}");
        rows.push(row("tauberian", "alpha", f(t.alpha)));
        rows.push(row("tauberian", "poisson_limsup", f(t.poisson_limsup)));
        rows.push(row("tauberian", "arrow_limsup", f(t.arrow_limsup)));
        rows.push(row("tauberian", "lower_constant", f(t.lower_constant)));
        rows.push(row("tauberian", "lower_holds", t.lower_holds.to_string()));
        if let (Some(c), Some(ok)) = (t.upper_constant, t.upper_holds) {
            rows.push(row("tauberian", "upper_constant", f(c)));
            rows.push(row("tauberian", "upper_holds", ok.to_string()));
        }
    }
    Ok(rows)
}

fn spectral_violations(rows: &[SpectralRow]) -> usize {
    rows.iter()
        .filter(|r| {
            (r.key == "consistent" || r.key == "lower_holds" || r.key == "upper_holds") && r.value == "false"
        })
        .count()
}

// ----- string and sl --------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StringRow {
    pub y: f64,
    pub f_inv: f64,
    pub q_s: f64,
    pub eps_cert: f64,
    pub ratio: f64,
    pub band_ok: bool,
}

/// `q_S(−y)` against `f⁻(1/y)` with the grid read as values of `y`.
pub fn string_rows(cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<Vec<StringRow>, CliError> {
    let s = cfg.string.as_ref().ok_or_else(|| CliError::schema("string", "this command needs a [string] section"))?.build()?;
    let (lo, hi) = kasahara_band(cfg.q)?;
    per_r(pool, &cfg.grid.values(), |y| {
        let e = kasahara_estimate(&s, y)?;
        Ok(vec![StringRow {
            y,
            f_inv: e.f_inv,
            q_s: e.q_s.value.re,
            eps_cert: e.q_s.radius,
            ratio: e.ratio,
            band_ok: e.ratio >= lo && e.ratio <= hi,
        }])
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlRow {
    pub r: f64,
    pub theta: f64,
    pub lower: f64,
    pub upper: f64,
    /// `|q_D|` where the solver applies (no potential).
    pub abs_q: Option<f64>,
    pub eps_cert: Option<f64>,
    pub ok: Option<bool>,
}

pub fn sl_rows(cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<Vec<SlRow>, CliError> {
    let section = cfg.sl.ok_or_else(|| CliError::schema("sl", "this command needs an [sl] section"))?;
    let prob = section.build();
    let angles = sorted_angles(cfg);
    per_r(pool, &cfg.grid.values(), |r| {
        angles
            .iter()
            .map(|&theta| {
                let e = sl_envelope(&prob, r, theta, section.kappa)?;
                let (abs_q, eps_cert, ok) = if section.bump.is_none() {
                    let v = prob.q_dirichlet(polar(r, theta), cfg.tolerances.eps * r.sqrt().max(1.0))?;
                    let n = v.value.norm();
                    (Some(n), Some(v.radius), Some(e.lower - v.radius <= n && n <= e.upper + v.radius))
                } else {
                    (None, None, None)
                };
                Ok(SlRow { r, theta, lower: e.lower, upper: e.upper, abs_q, eps_cert, ok })
            })
            .collect()
    })
}

// ----- corpus -------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusRow {
    pub name: String,
    pub a: f64,
    pub b: f64,
    pub limit_point: bool,
    /// Start of the tail after leading indivisible intervals.
    pub tail_start: f64,
}

pub fn corpus_rows() -> Result<Vec<CorpusRow>, CliError> {
    corpus::NAMES
        .iter()
        .map(|&name| {
            let h = corpus::by_name(name).expect("corpus name resolves");
            let (tail, _) = envelope_hamiltonian(&h)?;
            Ok(CorpusRow { name: name.to_string(), a: h.a(), b: h.b(), limit_point: h.is_limit_point(), tail_start: tail.a() })
        })
        .collect()
}

// ----- output ---------------------------------------------------------------

pub fn write_rows<R: Serialize>(out: &mut dyn Write, format: Format, rows: &[R], summary: Option<&SweepSummary>) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a, R> {
                rows: &'a [R],
                #[serde(skip_serializing_if = "Option::is_none")]
                summary: Option<&'a SweepSummary>,
            }
            serde_json::to_writer_pretty(&mut *out, &Doc { rows, summary })?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Header written for an empty CSV result, so the column contract holds.
pub const SWEEP_HEADER: &str = "r,theta,t_crit,A,L,lower_abs,upper_abs,abs_q,re_q,im_q,eps_cert,envelope_ok";

/// Run `cmd`, writing rows to `out` and diagnostics to `diag`.  Returns
/// [`CliError::Violation`] when any checked law fails.
pub fn run(cmd: Command, cfg: &RunConfig, out: &mut dyn Write, diag: &mut dyn Write) -> Result<(), CliError> {
    let pool = thread_pool()?;
    let f = cfg.format;
    let violations = match cmd {
        Command::Sweep => {
            let (h, prefix_end) = envelope_hamiltonian(&cfg.hamiltonian()?)?;
            let rows = sweep_rows(&h, cfg, &pool)?;
            let s = summarize(&rows, prefix_end);
            if rows.is_empty() && f == Format::Csv {
                writeln!(out, "{SWEEP_HEADER}")?;
            }
            write_rows(out, f, &rows, (f == Format::Json).then_some(&s))?;
            write!(diag, "{}", summary_text(&s))?;
            s.violations
        }
        Command::Estimate => {
            let (h, _) = envelope_hamiltonian(&cfg.hamiltonian()?)?;
            write_rows(out, f, &estimate_rows(&h, cfg, &pool)?, None)?;
            0
        }
        Command::Weyl => {
            write_rows(out, f, &weyl_rows(&cfg.hamiltonian()?, cfg, &pool)?, None)?;
            0
        }
        Command::BoundsCheck => {
            let (h, _) = envelope_hamiltonian(&cfg.hamiltonian()?)?;
            let rows = bounds_rows(&h, cfg, &pool)?;
            write_rows(out, f, &rows, None)?;
            rows.iter().filter(|r| !r.ok).count()
        }
        Command::SeriesCheck => {
            let rows = series_rows(&cfg.hamiltonian()?, cfg, &pool)?;
            write_rows(out, f, &rows, None)?;
            rows.iter().map(|r| r.failures).sum()
        }
        Command::Spectral => {
            let rows = spectral_rows(cfg)?;
            write_rows(out, f, &rows, None)?;
            spectral_violations(&rows)
        }
        Command::String => {
            let rows = string_rows(cfg, &pool)?;
            write_rows(out, f, &rows, None)?;
            rows.iter().filter(|r| !r.band_ok).count()
        }
        Command::Sl => {
            let rows = sl_rows(cfg, &pool)?;
            write_rows(out, f, &rows, None)?;
            rows.iter().filter(|r| r.ok == Some(false)).count()
        }
        Command::Corpus => {
            write_rows(out, f, &corpus_rows()?, None)?;
            0
        }
    };
    out.flush()?;
    if violations > 0 {
        return Err(CliError::Violation { count: violations });
    }
    Ok(())
}
