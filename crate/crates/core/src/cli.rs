//! Command-line front end: a TOML config per run, JSON or CSV reports out.
//!
//! Exit codes: 0 when every check passes, 1 when a mathematical check fails (a
//! counterexample record is printed to stderr), 2 for usage and schema errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{self, VolumeScenario};
use crate::growth::{self, GradedWindow};
use crate::loopcore::{self, BilinearBracket, LoopAlgebra};
use crate::parahoric;
use crate::rootsys::{build_affine_datum, build_root_datum, CartanType};

#[derive(Parser, Debug)]
#[command(
    name = "lattice-growth",
    version,
    about = "Graded Lie algebra, covolume and subgroup-growth calculators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML config for the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for randomized runs; overrides the config value.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Type data rows.
    Tables,
    /// Covolume, Euler product and lower-bound ledger for one scenario.
    Volume,
    /// Effective-divisor counts and their bounds.
    Divisors,
    /// Randomized commutator-codimension trials.
    LoopCheck,
    /// Exhaustive two-subspace sweeps.
    TwoSubspace,
    /// Parahoric graded algebra with relation audit and structure checks.
    Parahoric,
    /// Graded subalgebra counts and growth envelope.
    Growth,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Tables => "tables",
            Command::Volume => "volume",
            Command::Divisors => "divisors",
            Command::LoopCheck => "loop-check",
            Command::TwoSubspace => "two-subspace",
            Command::Parahoric => "parahoric",
            Command::Growth => "growth",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Usage or schema error; exits with status 2.
#[derive(Debug)]
struct Failure(String);

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure(e.to_string())
}

/// Result of one subcommand.
struct Outcome {
    json: Value,
    csv: String,
    /// First counterexample, if any check failed.
    violation: Option<Value>,
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Failure> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let de = toml::de::Deserializer::parse(&text)
        .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        usage(format!(
            "{}: invalid field `{field}`: {}",
            path.display(),
            e.inner()
        ))
    })
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(usage)?;
    }
    String::from_utf8(w.into_inner().map_err(usage)?).map_err(usage)
}

/// `path,value` rows of a JSON document, in document order.
fn flatten(v: &Value, prefix: &str, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(x, &key, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(x, &format!("{prefix}[{i}]"), out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn csv_flat(v: &Value) -> Result<String, Failure> {
    let mut rows = Vec::new();
    flatten(v, "", &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "value"]).map_err(usage)?;
    for (k, x) in rows {
        w.write_record([k, x]).map_err(usage)?;
    }
    String::from_utf8(w.into_inner().map_err(usage)?).map_err(usage)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

// ---- tables ----

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct TablesConfig {}

#[derive(Serialize)]
struct TableRow {
    label: String,
    degree: u32,
    dim: i64,
    s: i64,
    s_prime: i64,
    epsilon: i64,
    t: i64,
    sigma7: Option<i64>,
    sigma8: Option<i64>,
    exponents: String,
}

fn run_tables(_: TablesConfig) -> Result<Outcome, Failure> {
    let rows: Vec<TableRow> = arith::all_type_data()
        .into_iter()
        .map(|d| TableRow {
            label: d.label,
            degree: d.degree,
            dim: d.dim,
            s: d.s,
            s_prime: d.s_prime,
            epsilon: d.epsilon,
            t: d.t,
            sigma7: d.sigma7,
            sigma8: d.sigma8,
            exponents: d
                .exponents
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        })
        .collect();
    Ok(Outcome {
        json: to_value(&rows),
        csv: csv_rows(&rows)?,
        violation: None,
    })
}

/// The `tables` CSV, as written by the CLI.
pub fn tables_csv() -> String {
    match run_tables(TablesConfig {}) {
        Ok(o) => o.csv,
        Err(_) => unreachable!("the type table always renders"),
    }
}

// ---- volume ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct VolumeConfig {
    scenario: VolumeScenario,
    sigma: String,
    cutoff: u32,
}

impl Default for VolumeConfig {
    fn default() -> Self {
        VolumeConfig {
            scenario: VolumeScenario {
                type_label: "A1".into(),
                q_k: 5,
                g_k: 0,
                l_poly_k: None,
                q_l: None,
                g_l: None,
                ramified_degrees: vec![],
                local_overrides: vec![],
                tau: None,
            },
            sigma: "1".into(),
            cutoff: 20,
        }
    }
}

fn run_volume(c: VolumeConfig) -> Result<Outcome, Failure> {
    let r = c.scenario.resolve().map_err(usage)?;
    let sigma: BigRational = c
        .sigma
        .parse()
        .map_err(|_| usage(format!("sigma: {:?} is not a rational", c.sigma)))?;
    let (_, b) = arith::b_of_g(&r);
    let euler = arith::euler_z(&r, c.cutoff);
    let cov = arith::covolume(&r);
    let ledger = arith::main_inequality_lower_bound(&r, &sigma);
    let weil = r.zeta_k.as_ref().map(|z| z.weil_bounds_hold());
    let mut violation = None;
    if let Ok((_, rep)) = &euler {
        if rep.within_tail_bound == Some(false) {
            violation = Some(json!({"check": "euler tail bound", "report": rep}));
        }
    }
    if weil == Some(false) {
        violation = Some(json!({"check": "weil class-number bounds"}));
    }
    let err = |e: &arith::ArithError| json!({ "unsupported": e.to_string() });
    let json = json!({
        "type": r.td.label,
        "b": b,
        "euler": euler.as_ref().map(|(_, rep)| to_value(rep)).unwrap_or_else(err),
        "covolume": cov.as_ref().map(|(_, rep)| to_value(rep)).unwrap_or_else(err),
        "ledger": ledger,
        "weil_bounds": weil,
    });
    Ok(Outcome {
        csv: csv_flat(&json)?,
        json,
        violation,
    })
}

// ---- divisors ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct DivisorsConfig {
    q: u64,
    genus: u32,
    l_poly: Option<Vec<i64>>,
    point_counts: Option<Vec<i64>>,
    max_n: usize,
}

impl Default for DivisorsConfig {
    fn default() -> Self {
        DivisorsConfig {
            q: 2,
            genus: 0,
            l_poly: None,
            point_counts: None,
            max_n: 12,
        }
    }
}

#[derive(Serialize)]
struct DivisorRow {
    n: usize,
    b_n: String,
    cumulative: String,
    bound_b: String,
    bound_cumulative: String,
    ok: bool,
}

fn run_divisors(c: DivisorsConfig) -> Result<Outcome, Failure> {
    let z = match (&c.l_poly, &c.point_counts) {
        (Some(p), None) => arith::CurveZeta::from_coefficients(c.q, c.genus, p),
        (None, Some(n)) => arith::zeta_from_point_counts(c.q, c.genus, n),
        (None, None) if c.genus == 0 => arith::CurveZeta::projective_line(c.q),
        _ => {
            return Err(usage(
                "give exactly one of l_poly and point_counts (or neither in genus 0)",
            ))
        }
    }
    .map_err(usage)?;
    let h = z.class_number();
    let series = z.divisor_series(c.max_n);
    let q = num_bigint::BigInt::from(c.q);
    let mut rows = Vec::new();
    let mut cum = num_bigint::BigInt::from(0);
    let mut qp = num_bigint::BigInt::from(1);
    let mut violation = None;
    for (n, b) in series.iter().enumerate() {
        cum += b;
        let (bb, bc) = (2 * &h * &qp, 4 * &h * &qp);
        let ok = *b <= bb && cum <= bc;
        if !ok && violation.is_none() {
            violation = Some(json!({"check": "divisor bounds", "n": n, "b_n": b.to_string()}));
        }
        rows.push(DivisorRow {
            n,
            b_n: b.to_string(),
            cumulative: cum.to_string(),
            bound_b: bb.to_string(),
            bound_cumulative: bc.to_string(),
            ok,
        });
        qp *= &q;
    }
    if !z.weil_bounds_hold() {
        violation = Some(json!({"check": "weil class-number bounds"}));
    }
    let json = json!({
        "q": c.q,
        "genus": c.genus,
        "l_poly": z.l_poly().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "class_number": h.to_string(),
        "places": z.place_counts(c.max_n).iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "rows": rows,
    });
    Ok(Outcome {
        csv: csv_rows(&rows)?,
        json,
        violation,
    })
}

// ---- loop-check ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct LoopCheckConfig {
    seed: Option<u64>,
    algebras: Vec<String>,
    primes: Vec<u32>,
    copies: Vec<usize>,
    trials: usize,
    max_n0: usize,
}

impl Default for LoopCheckConfig {
    fn default() -> Self {
        LoopCheckConfig {
            seed: None,
            algebras: ["A1", "A2", "2A2", "2D4", "3D4"].map(String::from).to_vec(),
            primes: vec![5, 7],
            copies: vec![1, 2, 3],
            trials: 1000,
            max_n0: 3,
        }
    }
}

/// Every trial of the configured grid, in grid order.
fn loop_trials(c: &LoopCheckConfig, seed: u64) -> Result<Vec<loopcore::TrialReport>, Failure> {
    let mut out = Vec::new();
    for label in &c.algebras {
        for &p in &c.primes {
            let ghat = loopcore::ghat_from_label(label, p).map_err(usage)?;
            for &d in &c.copies {
                let parent = LoopAlgebra::new(ghat.clone(), d);
                out.extend(loopcore::run_bound_trials(
                    &parent, label, c.trials, seed, c.max_n0,
                ));
            }
        }
    }
    Ok(out)
}

fn run_loop_check(c: LoopCheckConfig, seed: u64) -> Result<Outcome, Failure> {
    let rows = loop_trials(&c, seed)?;
    let violation = rows
        .iter()
        .find(|r| !r.holds)
        .map(|r| json!({"check": "commutator codimension bound", "trial": r}));
    let json = json!({
        "seed": seed,
        "trials": rows.len(),
        "violations": rows.iter().filter(|r| !r.holds).count(),
        "rows": rows,
    });
    Ok(Outcome {
        csv: csv_rows(&rows)?,
        json,
        violation,
    })
}

// ---- two-subspace ----

#[derive(Deserialize, Serialize, Clone)]
#[serde(deny_unknown_fields)]
struct SweepSpec {
    algebra: String,
    p: u32,
    d: usize,
    max_codim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct TwoSubspaceConfig {
    runs: Vec<SweepSpec>,
}

impl Default for TwoSubspaceConfig {
    fn default() -> Self {
        TwoSubspaceConfig {
            runs: vec![SweepSpec {
                algebra: "sl2".into(),
                p: 2,
                d: 1,
                max_codim: 2,
            }],
        }
    }
}

fn run_two_subspace(c: TwoSubspaceConfig) -> Result<Outcome, Failure> {
    let mut reports = Vec::new();
    let mut violation = None;
    for s in &c.runs {
        let br = BilinearBracket::named(&s.algebra, s.p).map_err(usage)?;
        let rep = loopcore::two_subspace_sweep(&br, s.d, s.max_codim).map_err(usage)?;
        if rep.violations > 0 && violation.is_none() {
            violation = Some(json!({"check": "two-subspace bound", "run": s, "report": rep}));
        }
        reports.push(json!({"run": s, "report": rep}));
    }
    let json = Value::Array(reports);
    Ok(Outcome {
        csv: csv_flat(&json)?,
        json,
        violation,
    })
}

// ---- parahoric ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ParahoricConfig {
    #[serde(rename = "type")]
    type_label: String,
    twist: u32,
    xi: Option<Vec<usize>>,
    p: u32,
    window: Option<usize>,
}

impl Default for ParahoricConfig {
    fn default() -> Self {
        ParahoricConfig {
            type_label: "A2".into(),
            twist: 2,
            xi: None,
            p: 7,
            window: None,
        }
    }
}

fn run_parahoric(c: ParahoricConfig) -> Result<Outcome, Failure> {
    let t: CartanType = c.type_label.parse().map_err(usage)?;
    let ad = build_affine_datum(&build_root_datum(t).map_err(usage)?, c.twist).map_err(usage)?;
    let xi = c.xi.clone().unwrap_or_else(|| vec![ad.special_index()]);
    let window = c.window.unwrap_or_else(|| parahoric::default_window(&ad));
    let g = parahoric::build_parahoric_graded(&ad, &xi, c.p, window).map_err(usage)?;
    let audit = parahoric::audit_relations(&g);
    let jacobi = g.jacobi_holds();
    let comparison = parahoric::check_comparison_embedding(&ad, &xi, c.p, window).map_err(usage)?;
    let special = if xi == [ad.special_index()] {
        Some(parahoric::check_special_isomorphism(&ad, c.p, window).map_err(usage)?)
    } else {
        None
    };
    let reduced = ad.relative().is_reduced();
    let mut violation = None;
    if !jacobi {
        violation = Some(json!({"check": "jacobi"}));
    } else if reduced && audit.iter().any(|t| !t.all_match()) {
        violation = Some(json!({"check": "relations", "audit": audit}));
    } else if !comparison.homomorphism || !comparison.within_bound {
        violation = Some(json!({"check": "comparison embedding", "report": comparison}));
    } else if let Some(s) = special
        .as_ref()
        .filter(|s| !(s.dims_agree && s.rescaled_map_homomorphism && s.jacobi))
    {
        violation = Some(json!({"check": "special isomorphism", "report": s}));
    }
    let json = json!({
        "golden": g.to_golden(),
        "normalization_skipped": g.normalization().skipped,
        "jacobi": jacobi,
        "audit": audit,
        "comparison": comparison,
        "special": special,
    });
    Ok(Outcome {
        csv: csv_flat(&json)?,
        json,
        violation,
    })
}

// ---- growth ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GrowthConfig {
    /// `loop` (grades of a loop algebra) or `abelian`.
    source: String,
    algebra: String,
    p: u32,
    window: usize,
    dims: Vec<usize>,
    max_codim: usize,
    /// Constant of the bound chain; defaults to `4 m dim ĝ`.
    c: Option<f64>,
    /// Also run the unpruned filter count and compare.
    verify: bool,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig {
            source: "loop".into(),
            algebra: "A1".into(),
            p: 2,
            window: 3,
            dims: vec![],
            max_codim: 4,
            c: None,
            verify: true,
        }
    }
}

fn run_growth(c: GrowthConfig) -> Result<Outcome, Failure> {
    let (w, default_c) = match c.source.as_str() {
        "loop" => {
            let ghat = loopcore::ghat_any_characteristic(&c.algebra, c.p).map_err(usage)?;
            let parent = LoopAlgebra::new(ghat, 1);
            let cst = parent.bound_constant() as f64;
            (GradedWindow::from_loop(&parent, c.window), cst)
        }
        "abelian" => (
            GradedWindow::abelian(c.p, c.dims.clone()),
            4.0 * c.dims.iter().sum::<usize>() as f64,
        ),
        other => {
            return Err(usage(format!(
                "source: unknown value {other:?} (expected loop or abelian)"
            )))
        }
    };
    let seq = growth::enumerate_graded_subalgebras(&w, c.max_codim).map_err(usage)?;
    let table = growth::growth_table(&seq, c.c.unwrap_or(default_c)).map_err(usage)?;
    let env = growth::growth_envelope_check(&seq);
    let oracle = if c.verify {
        Some(growth::count_by_filter(&w, c.max_codim).map_err(usage)?)
    } else {
        None
    };
    let mut violation = None;
    if let Some(o) = &oracle {
        if o.a != seq.a {
            violation = Some(json!({"check": "filter oracle", "exact": seq.a, "oracle": o.a}));
        }
    }
    if let Some(r) = table.iter().find(|r| !r.within_bound) {
        violation = Some(json!({"check": "bound chain", "row": r}));
    }
    let json = json!({
        "dims": w.dims(),
        "sequence": seq,
        "oracle_agrees": oracle.map(|o| o.a == seq.a),
        "table": table,
        "envelope": env,
    });
    Ok(Outcome {
        csv: csv_rows(&table)?,
        json,
        violation,
    })
}

// ---- driver ----

fn dispatch(cli: &Cli) -> Result<(Outcome, u64), Failure> {
    let path = cli.config.as_deref();
    let plain = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Tables => Ok((run_tables(load_config(path)?)?, plain)),
        Command::Volume => Ok((run_volume(load_config(path)?)?, plain)),
        Command::Divisors => Ok((run_divisors(load_config(path)?)?, plain)),
        Command::LoopCheck => {
            let c: LoopCheckConfig = load_config(path)?;
            let seed = cli.seed.or(c.seed).ok_or_else(|| {
                usage("loop-check is randomized: pass --seed or set `seed` in the config")
            })?;
            Ok((run_loop_check(c, seed)?, seed))
        }
        Command::TwoSubspace => Ok((run_two_subspace(load_config(path)?)?, plain)),
        Command::Parahoric => Ok((run_parahoric(load_config(path)?)?, plain)),
        Command::Growth => Ok((run_growth(load_config(path)?)?, plain)),
    }
}

/// Output path `<out-dir>/<subcommand>-<seed>.<ext>`.
pub fn output_path(out_dir: &Path, command: Command, seed: u64, format: Format) -> PathBuf {
    let ext = match format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    out_dir.join(format!("{}-{seed}.{ext}", command.name()))
}

fn execute(cli: &Cli) -> i32 {
    let (outcome, seed) = match dispatch(cli) {
        Ok(x) => x,
        Err(Failure(m)) => {
            eprintln!("error: {m}");
            return 2;
        }
    };
    let body = match cli.format {
        Format::Json => {
            serde_json::to_string_pretty(&outcome.json).expect("reports serialize") + "\n"
        }
        Format::Csv => outcome.csv,
    };
    let path = output_path(&cli.out_dir, cli.command, seed, cli.format);
    if let Err(e) = fs::create_dir_all(&cli.out_dir).and_then(|_| fs::write(&path, body)) {
        eprintln!("error: {}: {e}", path.display());
        return 2;
    }
    match outcome.violation {
        Some(v) => {
            eprintln!("{}", serde_json::to_string(&v).expect("records serialize"));
            1
        }
        None => 0,
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        // a pool may already exist when called repeatedly in one process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    execute(&cli)
}
