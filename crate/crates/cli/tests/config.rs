use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use canonical_weyl_cli::config::{parse_angles, GridSpec, HamiltonianSpec, RunConfig};
use canonical_weyl_cli::{parse_config, serialize_config, CliError, Format};
use toml::{Table, Value};

fn schema_key(r: Result<RunConfig, CliError>) -> String {
    match r {
        Err(CliError::Schema { key, .. }) => key,
        other => panic!("expected a schema error, got {other:?}"),
    }
}

#[test]
fn empty_file_gives_defaults() {
    let c = parse_config("").unwrap();
    assert_eq!(c, RunConfig::default());
    assert_eq!(c.q, 0.2);
    assert_eq!(c.angles, vec![FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4]);
    assert_eq!(c.format, Format::Csv);
    assert_eq!(c.tolerances.eps, 1e-8);
    assert_eq!(c.tolerances.root_tol, 1e-13);
    assert_eq!((c.grid.r_min, c.grid.r_max, c.grid.points, c.grid.geometric), (1.0, 1e3, 12, true));
    assert!(c.hamiltonian.is_none() && c.command.is_none() && c.output.is_none());
}

#[test]
fn q_outside_range_is_a_schema_error() {
    for q in ["0.5", "0.0", "-0.1", "0.3"] {
        assert_eq!(schema_key(parse_config(&format!("q = {q}\n"))), "q", "q = {q}");
    }
    assert!(parse_config("q = 0.29\n").is_ok());
}

#[test]
fn unknown_keys_report_their_path() {
    assert_eq!(schema_key(parse_config("bogus = 1\n")), "bogus");
    assert_eq!(schema_key(parse_config("[grid]\nr_mn = 1.0\n")), "grid.r_mn");
    assert_eq!(schema_key(parse_config("[hamiltonian]\nkind = \"constant\"\nh = [1.0, 1.0, 0.0]\nextra = 2\n")), "hamiltonian.extra");
    assert_eq!(schema_key(parse_config("[sl]\nkapa = 0.1\n")), "sl.kapa");
}

#[test]
fn wrong_types_report_their_path() {
    assert_eq!(schema_key(parse_config("[grid]\npoints = \"x\"\n")), "grid.points");
    assert_eq!(schema_key(parse_config("q = \"big\"\n")), "q");
}

#[test]
fn syntax_errors_carry_line_and_column() {
    match parse_config("q = 0.2\n[grid\nr_min = 1.0\n") {
        Err(CliError::Parse { line, column, .. }) => assert_eq!((line, column), (2, 6)),
        other => panic!("{other:?}"),
    }
    match parse_config("q = 0.2\nangles = [1.0,\n") {
        Err(CliError::Parse { line, .. }) => assert!(line >= 2, "line {line}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn validation_rules() {
    assert_eq!(schema_key(parse_config("[tolerances]\neps = 0.0\n")), "tolerances.eps");
    assert_eq!(schema_key(parse_config("[tolerances]\nroot_tol = -1.0\n")), "tolerances.root_tol");
    assert_eq!(schema_key(parse_config("[grid]\nr_min = 0.0\n")), "grid.r_min");
    assert_eq!(schema_key(parse_config("[grid]\npoints = 0\n")), "grid.points");
    assert_eq!(schema_key(parse_config("[grid]\nr_min = 5.0\nr_max = 2.0\n")), "grid.r_max");
    assert!(parse_config("[grid]\nr_min = 5.0\nr_max = 2.0\npoints = 1\n").is_ok());
    assert_eq!(schema_key(parse_config("angles = []\n")), "angles");
    assert_eq!(schema_key(parse_config("angles = [7.0]\n")), "angles");
    assert_eq!(schema_key(parse_config("[sl]\nkappa = 0.0\n")), "sl.kappa");
    assert_eq!(schema_key(parse_config("[series]\norder = 11\n")), "series.order");
    assert_eq!(schema_key(parse_config("[series]\norder = 0\n")), "series.order");
}

#[test]
fn upper_half_plane_check() {
    let c = parse_config("angles = [4.0]\n").unwrap();
    assert!(matches!(c.check_upper_half_plane(), Err(CliError::Schema { key, .. }) if key == "angles"));
    assert!(RunConfig::default().check_upper_half_plane().is_ok());
}

#[test]
fn grid_values() {
    let g = GridSpec { r_min: 1.0, r_max: 1e3, points: 4, geometric: true };
    let v = g.values();
    assert_eq!(v.len(), 4);
    assert_eq!(v[0], 1.0);
    assert_eq!(v[3], 1e3);
    assert!((v[1] - 10.0).abs() < 1e-12 && (v[2] - 100.0).abs() < 1e-10);
    let lin = GridSpec { geometric: false, ..g }.values();
    for (got, want) in lin.iter().zip([1.0, 334.0, 667.0, 1000.0]) {
        assert!((got - want).abs() < 1e-12 * want, "{got} vs {want}");
    }
    assert_eq!(GridSpec { points: 1, ..g }.values(), vec![1.0]);
}

#[test]
fn grid_flag() {
    let g = GridSpec::parse_flag("0.5:2e3:7").unwrap();
    assert_eq!((g.r_min, g.r_max, g.points, g.geometric), (0.5, 2e3, 7, true));
    for bad in ["1:2", "a:2:3", "1:2:x", "1:2:3:4"] {
        assert!(matches!(GridSpec::parse_flag(bad), Err(CliError::Schema { .. })), "{bad}");
    }
}

#[test]
fn angle_flag() {
    assert_eq!(parse_angles("pi/4, pi/2,3pi/4").unwrap(), vec![FRAC_PI_4, FRAC_PI_2, 3.0 * PI / 4.0]);
    assert_eq!(parse_angles("1.2,pi").unwrap(), vec![1.2, PI]);
    assert!(parse_angles("quarter").is_err());
}

#[test]
fn hamiltonian_specs_build() {
    let c = parse_config("[hamiltonian]\nkind = \"corpus\"\nname = \"split-prefix\"\n").unwrap();
    assert_eq!(c.hamiltonian().unwrap().split_indivisible().unwrap().tail.a(), 1.0);
    let c = parse_config("[hamiltonian]\nkind = \"piecewise\"\nbreaks = [0.0, 1.0, inf]\nvalues = [[1.0, 0.0, 0.0], [1.0, 1.0, 0.0]]\n").unwrap();
    assert!(c.hamiltonian().unwrap().is_limit_point());
    let c = parse_config("[hamiltonian]\nkind = \"corpus\"\nname = \"nope\"\n").unwrap();
    assert!(matches!(c.hamiltonian(), Err(CliError::Schema { key, .. }) if key == "hamiltonian.name"));
    let c = parse_config("[hamiltonian]\nkind = \"constant\"\nh = [1.0, 1.0, 2.0]\n").unwrap();
    assert!(matches!(c.hamiltonian(), Err(CliError::Schema { key, .. }) if key == "hamiltonian"));
    assert!(matches!(RunConfig::default().hamiltonian(), Err(CliError::Schema { key, .. }) if key == "hamiltonian"));
}

/// Insert every defaulted key into a parsed fixture, independently of the
/// serde attributes.
fn normalize(text: &str) -> Table {
    let mut t: Table = text.parse().unwrap();
    let f = Value::Float;
    let put = |t: &mut Table, k: &str, v: Value| {
        t.entry(k.to_string()).or_insert(v);
    };
    put(&mut t, "q", f(0.2));
    put(&mut t, "angles", Value::Array(vec![f(FRAC_PI_4), f(FRAC_PI_2), f(3.0 * FRAC_PI_4)]));
    put(&mut t, "format", Value::String("csv".into()));
    put(&mut t, "tolerances", Value::Table(Table::new()));
    put(&mut t, "grid", Value::Table(Table::new()));
    let sub = |t: &mut Table, k: &str| -> Option<Table> { t.get(k).and_then(|v| v.as_table()).cloned() };
    let mut tol = sub(&mut t, "tolerances").unwrap();
    put(&mut tol, "eps", f(1e-8));
    put(&mut tol, "root_tol", f(1e-13));
    t.insert("tolerances".into(), Value::Table(tol));
    let mut g = sub(&mut t, "grid").unwrap();
    put(&mut g, "r_min", f(1.0));
    put(&mut g, "r_max", f(1e3));
    put(&mut g, "points", Value::Integer(12));
    put(&mut g, "geometric", Value::Boolean(true));
    t.insert("grid".into(), Value::Table(g));
    if let Some(mut s) = sub(&mut t, "sl") {
        put(&mut s, "p", f(1.0));
        put(&mut s, "w", f(1.0));
        put(&mut s, "kappa", f(0.1));
        t.insert("sl".into(), Value::Table(s));
    }
    if let Some(mut s) = sub(&mut t, "spectral") {
        put(&mut s, "c", f(1.0));
        put(&mut s, "a_prime", f(0.5));
        t.insert("spectral".into(), Value::Table(s));
    }
    if let Some(mut s) = sub(&mut t, "series") {
        put(&mut s, "order", Value::Integer(8));
        t.insert("series".into(), Value::Table(s));
    }
    t
}

const FIXTURES: [&str; 20] = [
    "",
    "q = 0.1\n",
    "command = \"sweep\"\nformat = \"json\"\noutput = \"out.json\"\n",
    "angles = [0.5, 1.0, 2.5]\n[tolerances]\neps = 1e-10\n",
    "[tolerances]\nroot_tol = 1e-11\n",
    "[grid]\nr_min = 0.01\nr_max = 1e6\npoints = 40\ngeometric = false\n",
    "[grid]\npoints = 1\n",
    "[hamiltonian]\nkind = \"corpus\"\nname = \"identity\"\n",
    "[hamiltonian]\nkind = \"corpus\"\nname = \"diag(4,1)\"\n",
    "[hamiltonian]\nkind = \"constant\"\nh = [2.0, 0.5, 0.25]\n",
    "[hamiltonian]\nkind = \"piecewise\"\nbreaks = [0.0, 1.0, inf]\nvalues = [[1.0, 0.0, 0.0], [1.0, 1.0, 0.0]]\n",
    "[hamiltonian]\nkind = \"alternating\"\nbeta = 3.0\nphi = 0.7853981633974483\n",
    "[hamiltonian]\nkind = \"primitive-powers\"\n[[hamiltonian.terms]]\npower = 1.0\nm = [4.0, 1.0, 2.0]\n[[hamiltonian.terms]]\npower = 2.0\nm = [1.0, 1.0, 1.0]\n",
    "[string.mass]\nkind = \"power\"\nc = 1.0\nrho = 3.0\n",
    "[string]\nlength = 5.0\n[string.mass]\nkind = \"linear-with-jumps\"\nknots = [0.0, 1.0, 2.0]\nat = [0.0, 1.0, 3.0]\nright = [0.0, 2.0, 3.0]\ntail_slope = 1.5\n",
    "[sl]\n",
    "[sl]\np = 2.0\nkappa = 0.05\n[sl.bump]\nheight = 5.0\nwidth = 1.0\nlambda0 = 1.0\n",
    "[spectral]\nalpha = 1.5\n[spectral.measure]\nkind = \"lebesgue\"\n",
    "[spectral]\nalpha = 0.5\nc = 2.0\na_prime = 0.25\n[spectral.measure]\nkind = \"power\"\nc = 1.0\np = 0.5\n",
    "[series]\norder = 6\nt = [0.5, 1.0]\n[hamiltonian]\nkind = \"corpus\"\nname = \"quadratic-primitive\"\n",
];

#[test]
fn round_trip_matches_normalized_fixture() {
    for (i, text) in FIXTURES.iter().enumerate() {
        let cfg = parse_config(text).unwrap_or_else(|e| panic!("fixture {i}: {e}"));
        let out = serialize_config(&cfg);
        let got: Table = out.parse().unwrap_or_else(|e| panic!("fixture {i}: {e}\n{out}"));
        assert_eq!(got, normalize(text), "fixture {i}:\n{out}");
        assert_eq!(parse_config(&out).unwrap(), cfg, "fixture {i}");
    }
}

#[test]
fn command_line_style_overrides_validate() {
    let mut c = parse_config("[hamiltonian]\nkind = \"corpus\"\nname = \"identity\"\n").unwrap();
    c.q = 0.4;
    assert!(matches!(c.validate(), Err(CliError::Schema { key, .. }) if key == "q"));
    c.q = 0.1;
    c.hamiltonian = Some(HamiltonianSpec::Corpus { name: "log-periodic".into() });
    assert!(c.validate().is_ok());
}
