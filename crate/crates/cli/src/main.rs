//! `fracrisk` command-line front end.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use fracrisk::acceptance::{run_with, Level};
use fracrisk::empirics::{
    compare_curves, fit_exponential, fit_mittag_leffler, kolmogorov_band, load_interarrivals,
    TimeUnit, CURVE_HEADER,
};
use fracrisk::mc::map_paths;
use fracrisk::processes::{fpp_cov, fpp_mean, fpp_pmf, fpp_var, simulate_fpp_renewal};
use fracrisk::risk::{
    bailout_capital_limit, mean_clock, risk_cov, risk_mean, risk_var, ruin_curve, simulate_minima,
    simulate_risk_path, ClaimLaw, Horizon, RiskModel,
};
use fracrisk::risk_measures::premium_comparison;
use fracrisk::specfun::gamma;
use fracrisk::{Error, McConfig, Tolerance};

const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Parser, Debug)]
#[command(
    name = "fracrisk",
    version,
    about = "Fractional Poisson and fractional Cramer-Lundberg risk tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads, 0 for all cores. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Random seed.
    #[arg(long, global = true, env = "FRACRISK_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate counting or surplus paths on a time grid.
    Simulate(SimulateArgs),
    /// Fractional Poisson probabilities P(N(t) = k).
    Pmf(PmfArgs),
    /// Closed-form moments of the counts and of the surplus.
    Moments(MomentsArgs),
    /// Monte Carlo ruin probabilities.
    Ruin(RuinArgs),
    /// Monte Carlo bailout capital.
    Capital(CapitalArgs),
    /// EVaR premiums, classical against fractional.
    Premium(PremiumArgs),
    /// Fit exponential and Mittag-Leffler laws to inter-arrival data.
    Fit(DataArgs),
    /// Empirical and fitted survival curves of inter-arrival data.
    Curves(CurvesArgs),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Serialize)]
struct ModelArgs {
    /// Fractional order in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Claim intensity.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Safety loading.
    #[arg(long, default_value_t = 0.1)]
    rho: f64,
    /// Mean claim size, used by `--claims exp`.
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Claim law: exp, exp:mean=1, lognorm:mlog=0,slog=0.5,
    /// pareto:shape=2.5,scale=1 or point:value=1.
    #[arg(long, default_value = "exp")]
    claims: String,
}

impl ModelArgs {
    fn claim_law(&self) -> Result<ClaimLaw, Error> {
        if self.claims.trim() == "exp" {
            ClaimLaw::exponential(self.mu)
        } else {
            self.claims.parse()
        }
    }

    fn model(&self, u: f64) -> Result<RiskModel, Error> {
        RiskModel::with_claims(u, self.rho, self.lambda, self.alpha, self.claim_law()?)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Process {
    Fpp,
    Surplus,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = Process::Fpp)]
    process: Process,
    #[command(flatten)]
    model: ModelArgs,
    /// Initial capital of the surplus.
    #[arg(long, default_value_t = 0.0)]
    u: f64,
    /// Final time.
    #[arg(long, default_value_t = 10.0)]
    t: f64,
    /// Number of grid points in (0, t].
    #[arg(long, default_value_t = 10)]
    points: usize,
    #[arg(long, default_value_t = 1)]
    npaths: usize,
}

#[derive(Args, Debug, Serialize)]
struct PmfArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long)]
    t: f64,
    /// Largest k; chosen from the mass deficit when omitted.
    #[arg(long)]
    kmax: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct MomentsArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0.0)]
    u: f64,
    #[arg(long)]
    t: f64,
    /// Earlier time for covariances.
    #[arg(long)]
    s: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct RuinArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Initial capitals, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    u: Vec<f64>,
    /// Ruin level.
    #[arg(long, default_value_t = 0.0)]
    v: f64,
    /// Calendar horizon, a number or `inf`.
    #[arg(long, default_value = "inf")]
    horizon: String,
    #[arg(long, default_value_t = 100_000)]
    npaths: usize,
}

#[derive(Args, Debug, Serialize)]
struct CapitalArgs {
    #[command(flatten)]
    ruin: RuinArgs,
    /// Apply the diffusion scaling with this factor before simulating.
    #[arg(long)]
    diffusion_scale: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct PremiumArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Classical intensity; defaults to the calibration boundary.
    #[arg(long)]
    lambda2: Option<f64>,
    /// Classical horizon.
    #[arg(long, default_value_t = 1.0)]
    t2: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value = "point:value=1")]
    claims: String,
    /// Confidence levels, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.9")]
    kappa: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "gap")]
    column: String,
    /// seconds or days.
    #[arg(long, default_value = "seconds")]
    unit: String,
}

#[derive(Args, Debug, Serialize)]
struct CurvesArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Number of log-spaced abscissae.
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Also write a log-scale SVG chart here.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SelftestArgs {
    #[arg(value_enum, default_value_t = LevelArg::Quick)]
    level: LevelArg,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum LevelArg {
    Quick,
    Full,
}

/// A command's result: rows for CSV, a JSON value for JSON, and extra
/// metadata entries.
struct Output {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
    json: Option<Value>,
    meta: Vec<(&'static str, Value)>,
    failed: bool,
}

impl Output {
    fn table(columns: Vec<&'static str>, rows: Vec<Vec<Value>>) -> Self {
        Self {
            columns,
            rows,
            json: None,
            meta: Vec::new(),
            failed: false,
        }
    }

    fn record(fields: Vec<(&'static str, Value)>) -> Self {
        let json = Value::Object(
            fields
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
        );
        let rows = fields.into_iter().map(|(k, v)| vec![json!(k), v]).collect();
        Self {
            json: Some(json),
            ..Self::table(vec!["key", "value"], rows)
        }
    }

    fn with_meta(mut self, key: &'static str, v: Value) -> Self {
        self.meta.push((key, v));
        self
    }

    fn json_result(&self) -> Value {
        self.json.clone().unwrap_or_else(|| {
            Value::Array(
                self.rows
                    .iter()
                    .map(|r| {
                        Value::Object(
                            self.columns
                                .iter()
                                .zip(r)
                                .map(|(c, v)| (c.to_string(), v.clone()))
                                .collect(),
                        )
                    })
                    .collect(),
            )
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let cfg = McConfig::new(cli.seed).with_threads(cli.threads);
    let (name, params, result) = match &cli.command {
        Command::Simulate(a) => ("simulate", to_value(a), simulate(a, &cfg)),
        Command::Pmf(a) => ("pmf", to_value(a), pmf(a)),
        Command::Moments(a) => ("moments", to_value(a), moments(a)),
        Command::Ruin(a) => ("ruin", to_value(a), ruin(a, &cfg)),
        Command::Capital(a) => ("capital", to_value(a), capital(a, &cfg)),
        Command::Premium(a) => ("premium", to_value(a), premium(a)),
        Command::Fit(a) => ("fit", to_value(a), fit(a)),
        Command::Curves(a) => ("curves", to_value(a), curves(a)),
        Command::Selftest(a) => ("selftest", to_value(a), selftest(a, &cfg)),
    };
    let out = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("fracrisk {name}: {e}");
            return ExitCode::from(if e.is_accuracy() { 3 } else { 2 });
        }
    };
    let mut meta: Vec<(&str, Value)> = vec![
        ("version", json!(env!("CARGO_PKG_VERSION"))),
        ("command", json!(name)),
        ("seed", json!(cli.seed)),
        ("params", params),
    ];
    meta.extend(out.meta.iter().cloned());
    meta.push(("wall_time_s", json!(start.elapsed().as_secs_f64())));
    let text = match cli.format {
        Format::Csv => render_csv(&meta, &out),
        Format::Json => render_json(&meta, &out),
    };
    let written = match &cli.output {
        Some(p) => fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("fracrisk {name}: cannot write output: {e}");
        return ExitCode::from(2);
    }
    if out.failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => {
            n.as_f64().map_or_else(String::new, |x| format!("{x:.16e}"))
        }
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render_csv(meta: &[(&str, Value)], out: &Output) -> String {
    let mut s = String::new();
    for (k, v) in meta {
        let v = match v {
            Value::String(x) => x.clone(),
            other => other.to_string(),
        };
        s.push_str(&format!("# {k}={v}\n"));
    }
    s.push_str(&out.columns.join(","));
    s.push('\n');
    for row in &out.rows {
        let cells: Vec<String> = row.iter().map(|v| csv_field(&cell(v))).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn render_json(meta: &[(&str, Value)], out: &Output) -> String {
    let meta: Map<String, Value> = meta
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect();
    let doc = json!({ "metadata": meta, "result": out.json_result() });
    let mut s = serde_json::to_string_pretty(&doc).unwrap_or_default();
    s.push('\n');
    s
}

fn parse_horizon(s: &str) -> Result<Horizon, Error> {
    match s.trim() {
        "inf" | "infinite" => Ok(Horizon::Infinite),
        x => match x.parse::<f64>() {
            Ok(v) if v > 0.0 => Ok(Horizon::Finite(v)),
            _ => Err(Error::Input(format!(
                "--horizon must be a positive number or `inf`, got `{s}`"
            ))),
        },
    }
}

fn simulate(a: &SimulateArgs, cfg: &McConfig) -> Result<Output, Error> {
    if a.points == 0 || a.npaths == 0 || !(a.t > 0.0) {
        return Err(Error::Domain(
            "--t must be positive and --points, --npaths at least 1".into(),
        ));
    }
    let grid: Vec<f64> = (1..=a.points)
        .map(|j| a.t * j as f64 / a.points as f64)
        .collect();
    let m = &a.model;
    let paths: Vec<Vec<f64>> = match a.process {
        Process::Fpp => map_paths(cfg, a.npaths, |s| {
            let ev = simulate_fpp_renewal(m.alpha, m.lambda, a.t, &mut s.rng())?;
            Ok(grid.iter().map(|&t| ev.count(t) as f64).collect())
        }),
        Process::Surplus => {
            let model = m.model(a.u)?;
            map_paths(cfg, a.npaths, |s| {
                simulate_risk_path(&model, &grid, None, &mut s.rng())
            })
        }
    }
    .into_iter()
    .collect::<Result<_, Error>>()?;
    let mut rows = Vec::new();
    for (i, p) in paths.iter().enumerate() {
        for (t, v) in grid.iter().zip(p) {
            let v = match a.process {
                Process::Fpp => json!(*v as u64),
                Process::Surplus => json!(v),
            };
            rows.push(vec![json!(i), json!(t), v]);
        }
    }
    Ok(Output::table(vec!["path", "t", "value"], rows))
}

fn pmf(a: &PmfArgs) -> Result<Output, Error> {
    let table = fpp_pmf(a.alpha, a.lambda, a.t, a.kmax, &Tolerance::default())?;
    let rows = table
        .probs
        .iter()
        .enumerate()
        .map(|(k, p)| vec![json!(k), json!(p)])
        .collect();
    Ok(Output::table(vec!["k", "probability"], rows)
        .with_meta("mass_deficit", json!(table.mass_deficit())))
}

fn moments(a: &MomentsArgs) -> Result<Output, Error> {
    let md = a.model.model(a.u)?;
    let m = &a.model;
    let mut f = vec![
        ("clock_mean", json!(mean_clock(m.alpha, a.t))),
        ("count_mean", json!(fpp_mean(m.alpha, m.lambda, a.t)?)),
        ("count_var", json!(fpp_var(m.alpha, m.lambda, a.t)?)),
        ("surplus_mean", json!(risk_mean(&md, a.t)?)),
        ("surplus_var", json!(risk_var(&md, a.t)?)),
    ];
    if let Some(s) = a.s {
        f.push(("count_cov", json!(fpp_cov(m.alpha, m.lambda, s, a.t)?)));
        f.push(("surplus_cov", json!(risk_cov(&md, s, a.t)?)));
    }
    Ok(Output::record(f))
}

fn ruin(a: &RuinArgs, cfg: &McConfig) -> Result<Output, Error> {
    let m = a.model.model(0.0)?;
    let curve = ruin_curve(&m, &a.u, a.v, parse_horizon(&a.horizon)?, a.npaths, cfg)?;
    let rows =
        a.u.iter()
            .zip(&curve)
            .map(|(u, e)| {
                vec![
                    json!(u),
                    json!(e.probability),
                    json!(e.half_width_95),
                    json!(e.truncation_bound),
                ]
            })
            .collect();
    Ok(Output::table(
        vec!["u", "probability", "half_width_95", "truncation_bound"],
        rows,
    ))
}

fn capital(a: &CapitalArgs, cfg: &McConfig) -> Result<Output, Error> {
    let r = &a.ruin;
    let mut m = r.model.model(0.0)?;
    if let Some(n) = a.diffusion_scale {
        m = m.diffusion_scaled(n)?;
    }
    let sample = simulate_minima(&m, parse_horizon(&r.horizon)?, r.npaths, cfg)?;
    let mut rows = Vec::new();
    for &u in &r.u {
        let k = sample.capital(u, r.v)?;
        rows.push(vec![
            json!(u),
            json!(k.kappa),
            json!(k.std_error),
            json!(k.kappa_integral),
            json!(k.kappa_avar),
            json!(k.ruin.probability),
            json!(k.n_ruined),
        ]);
    }
    let limit = bailout_capital_limit(r.v, m.rho, m.mu, m.claims.ex2())?;
    Ok(Output::table(
        vec![
            "u",
            "kappa",
            "std_error",
            "kappa_integral",
            "kappa_avar",
            "ruin_probability",
            "n_ruined",
        ],
        rows,
    )
    .with_meta("diffusion_limit", json!(limit)))
}

fn premium(a: &PremiumArgs) -> Result<Output, Error> {
    let law = if a.claims.trim() == "exp" {
        ClaimLaw::exponential(a.mu)?
    } else {
        a.claims.parse()?
    };
    let lambda2 = match a.lambda2 {
        Some(l) => l,
        None => a.lambda * a.t.powf(a.alpha) / gamma(1.0 + a.alpha) / a.t2,
    };
    let mut rows = Vec::new();
    for &k in &a.kappa {
        let p = premium_comparison(a.alpha, a.lambda, a.t, lambda2, a.t2, &law, k)?;
        rows.push(vec![json!(k), json!(p.classical), json!(p.fractional)]);
    }
    Ok(
        Output::table(vec!["kappa", "classical", "fractional"], rows)
            .with_meta("lambda2", json!(lambda2)),
    )
}

fn fit(a: &DataArgs) -> Result<Output, Error> {
    let unit: TimeUnit = a.unit.parse()?;
    let s = load_interarrivals(&a.input, &a.column, unit)?;
    let rate = fit_exponential(&s);
    let f = fit_mittag_leffler(&s)?;
    let (d, band) = kolmogorov_band(&s, f.alpha, f.lambda);
    Ok(Output::record(vec![
        ("n", json!(s.len())),
        ("unit", json!(unit)),
        ("exponential_rate", json!(rate)),
        ("alpha", json!(f.alpha)),
        ("lambda", json!(f.lambda)),
        ("residual", json!(f.residual)),
        ("iterations", json!(f.iterations)),
        ("kolmogorov_distance", json!(d)),
        ("kolmogorov_band_99", json!(band)),
    ]))
}

fn curves(a: &CurvesArgs) -> Result<Output, Error> {
    let unit: TimeUnit = a.data.unit.parse()?;
    let s = load_interarrivals(&a.data.input, &a.data.column, unit)?;
    if a.points < 2 {
        return Err(Error::Domain("--points must be at least 2".into()));
    }
    let lo = s.gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.gaps.iter().copied().fold(0.0, f64::max).max(lo * 10.0);
    let n = a.points;
    let grid: Vec<f64> = (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect();
    let (c, rate, f) = compare_curves(&s, &grid)?;
    if let Some(p) = &a.svg {
        fs::write(p, fracrisk::empirics::curves_svg(&c))?;
    }
    let rows = (0..n)
        .map(|i| {
            vec![
                json!(c.t[i]),
                json!(c.empirical[i]),
                json!(c.exponential_model[i]),
                json!(c.ml_model[i]),
            ]
        })
        .collect();
    Ok(Output::table(CURVE_HEADER.to_vec(), rows)
        .with_meta("exponential_rate", json!(rate))
        .with_meta("alpha", json!(f.alpha))
        .with_meta("lambda", json!(f.lambda)))
}

fn selftest(a: &SelftestArgs, cfg: &McConfig) -> Result<Output, Error> {
    let level = match a.level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let report = run_with(level, cfg, |c| eprintln!("{c}"));
    let rows = report
        .checks
        .iter()
        .map(|c| {
            vec![
                json!(c.id),
                json!(c.title),
                json!(if c.passed { "PASS" } else { "FAIL" }),
                json!(c.detail),
                json!(c.seconds),
            ]
        })
        .collect();
    let mut out = Output::table(
        vec!["criterion", "title", "status", "detail", "seconds"],
        rows,
    );
    out.json = Some(to_value(&report));
    out.failed = !report.all_passed();
    Ok(out)
}
