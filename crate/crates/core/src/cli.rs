//! The `doeblin` command-line tool.
//!
//! Every command writes CSV with a `#`-commented metadata header, or JSON
//! with a `metadata` object, to `--out` or standard output. Relative output
//! paths are resolved against `DOEBLIN_OUT_DIR` when it is set. Exit codes:
//! 0 on success (censored runs included), 1 on usage errors, 2 on runtime
//! or resource errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bridge::{build_bridge_with_budget, DEFAULT_VERTEX_BUDGET};
use crate::distribution::{DistributionSpec, JumpDistribution};
use crate::error::{Error, Result};
use crate::estimators::{invariant_measure_oracle, k_function, mean_measure, replicate, KConvention};
use crate::measure::CountingMeasure;
use crate::model::{ChainModel, State};
use crate::noise::{derive_seed, CouplingMode, NoiseField};
use crate::renewal::meeting_experiment;
use crate::sampler::{sample_potential, sample_taboo, Sample, SampleStatus, SearchStrategy};

/// Environment variable naming the default directory for relative `--out`.
pub const OUT_DIR_ENV: &str = "DOEBLIN_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "doeblin", version, about = "Doeblin graphs and perfect samples of taboo and potential point processes")]
pub struct Cli {
    /// Worker threads for replications (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Clone)]
pub struct Output {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args, Clone)]
pub struct SampleArgs {
    /// Model spec: renewal:<dist>, reflectedrw, queue:<dist>:<dist>.
    #[arg(long)]
    pub model: String,

    /// totally_independent, common or maximal_shift.
    #[arg(long, default_value = "common")]
    pub coupling: String,

    /// Region bound K: samples live on [0, K].
    #[arg(long, visible_alias = "K", default_value_t = 100)]
    pub region: State,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[arg(long, default_value_t = 1)]
    pub replications: u64,

    /// Depth cap: largest backward index (or renewal window depth).
    #[arg(long, default_value_t = 10_000_000)]
    pub max_n: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Linear,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Taboo,
    Potential,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Perfect samples of the taboo process on [0, K].
    SampleTaboo {
        #[command(flatten)]
        sample: SampleArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Samples of the potential process on [0, K].
    SamplePotential {
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long, value_enum, default_value = "exponential")]
        strategy: Strategy,
        #[command(flatten)]
        output: Output,
    },
    /// Per-state mean of taboo or potential samples.
    MeanMeasure {
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long, value_enum, default_value = "taboo")]
        kind: Kind,
        #[command(flatten)]
        output: Output,
    },
    /// Invariant measure from excursions away from s*.
    InvariantOracle {
        #[arg(long)]
        model: String,
        #[arg(long, visible_alias = "K", default_value_t = 10)]
        region: State,
        /// Number of excursions.
        #[arg(long, short = 'n', default_value_t = 100_000)]
        n: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Meeting frequency of two walks on the renewal family forest.
    EftConnectivity {
        #[arg(long)]
        dist: String,
        #[arg(long, default_value_t = 1)]
        z0: i64,
        #[arg(long, default_value_t = 100_000)]
        horizon: u64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// K_i(r) for r = 1..=r-max from taboo samples.
    KFunction {
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long)]
        i: State,
        #[arg(long, default_value_t = 100)]
        r_max: State,
        #[arg(long, value_enum, default_value = "inclusive")]
        convention: Convention,
        #[command(flatten)]
        output: Output,
    },
    /// Taboo and potential samples of a queue on the same noise.
    QueueDemo {
        #[arg(long, default_value = "queue:geo:0.2:geo:0.2")]
        model: String,
        #[arg(long, visible_alias = "K", default_value_t = 1000)]
        region: State,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10_000_000)]
        max_n: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Vertices of a windowed bridge graph.
    BridgeDump {
        #[arg(long)]
        model: String,
        #[arg(long, default_value = "totally_independent")]
        coupling: String,
        #[arg(long, allow_hyphen_values = true, default_value_t = -50)]
        t_min: i64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
        t_max: i64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Fail with a resource error past this many stored vertices.
        #[arg(long, default_value_t = DEFAULT_VERTEX_BUDGET)]
        max_vertices: usize,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    Inclusive,
    Punctured,
}

impl From<Convention> for KConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Inclusive => KConvention::Inclusive,
            Convention::Punctured => KConvention::Punctured,
        }
    }
}

/// Metadata plus tabular rows, rendered as CSV or JSON.
struct Report {
    meta: BTreeMap<String, Value>,
    header: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
    json_body: Option<Value>,
}

impl Report {
    fn new(command: &str, header: Vec<&'static str>) -> Self {
        let mut meta = BTreeMap::new();
        meta.insert("command".into(), json!(command));
        meta.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        Report {
            meta,
            header,
            rows: Vec::new(),
            json_body: None,
        }
    }

    fn meta(&mut self, key: &str, value: impl Into<Value>) {
        self.meta.insert(key.to_string(), value.into());
    }

    fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => {
                let mut s = String::new();
                for (k, v) in &self.meta {
                    let v = match v {
                        Value::String(x) => x.clone(),
                        other => other.to_string(),
                    };
                    writeln!(s, "# {k}: {v}").expect("write to string");
                }
                writeln!(s, "{}", self.header.join(",")).expect("write to string");
                for row in &self.rows {
                    let cells: Vec<String> = row
                        .iter()
                        .map(|v| match v {
                            Value::String(x) => x.clone(),
                            Value::Null => String::new(),
                            other => other.to_string(),
                        })
                        .collect();
                    writeln!(s, "{}", cells.join(",")).expect("write to string");
                }
                Ok(s)
            }
            Format::Json => {
                let data = match &self.json_body {
                    Some(b) => b.clone(),
                    None => Value::Array(
                        self.rows
                            .iter()
                            .map(|r| {
                                Value::Object(
                                    self.header
                                        .iter()
                                        .zip(r)
                                        .map(|(h, v)| (h.to_string(), v.clone()))
                                        .collect(),
                                )
                            })
                            .collect(),
                    ),
                };
                let v = json!({ "metadata": self.meta, "data": data });
                Ok(serde_json::to_string_pretty(&v)? + "\n")
            }
        }
    }
}

fn emit(report: &Report, output: &Output) -> Result<()> {
    let text = report.render(output.format)?;
    match &output.out {
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
        Some(p) => {
            let path = match std::env::var_os(OUT_DIR_ENV) {
                Some(dir) if p.is_relative() => PathBuf::from(dir).join(p),
                _ => p.clone(),
            };
            if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, text)?;
        }
    }
    Ok(())
}

fn parse_model(s: &str) -> Result<ChainModel> {
    s.parse()
}

impl SampleArgs {
    fn validate(&self) -> Result<(ChainModel, CouplingMode)> {
        if self.replications == 0 {
            return Err(Error::Usage("--replications must be positive".into()));
        }
        if self.region < 0 {
            return Err(Error::Usage("--region must be nonnegative".into()));
        }
        Ok((parse_model(&self.model)?, self.coupling.parse()?))
    }

    fn echo(&self, r: &mut Report) {
        r.meta("model", self.model.clone());
        r.meta("coupling", self.coupling.clone());
        r.meta("region", self.region);
        r.meta("seed", self.seed);
        r.meta("replications", self.replications);
        r.meta("max_n", self.max_n);
    }

    fn noise(&self, model: &ChainModel, mode: CouplingMode, index: u64) -> NoiseField {
        model.noise(derive_seed(self.seed, index), mode)
    }
}

fn collect_samples<F>(args: &SampleArgs, f: F) -> Result<Vec<Sample>>
where
    F: Fn(u64) -> Result<Sample> + Sync + Send,
{
    replicate(args.replications, args.seed, |i, _| f(i))
        .into_iter()
        .collect()
}

fn sample_report(command: &str, args: &SampleArgs, samples: &[Sample]) -> Report {
    let mut r = Report::new(command, vec!["replication", "state", "count"]);
    args.echo(&mut r);
    let censored = samples.iter().filter(|s| s.status == SampleStatus::Censored).count();
    r.meta("censored", censored as u64);
    for (i, s) in samples.iter().enumerate() {
        for (state, count) in s.atoms.iter() {
            r.rows.push(vec![json!(i), json!(state), json!(count)]);
        }
    }
    r.json_body = Some(
        samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut v = serde_json::to_value(s).expect("samples serialize");
                v["replication"] = json!(i);
                v
            })
            .collect(),
    );
    r
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.threads {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Resource(e.to_string()))?;
            pool.install(|| run_command(cli.command))
        }
        Some(_) => Err(Error::Usage("--threads must be positive".into())),
        None => run_command(cli.command),
    }
}

fn run_command(command: Command) -> Result<()> {
    match command {
        Command::SampleTaboo { sample, output } => {
            let (model, mode) = sample.validate()?;
            let samples = collect_samples(&sample, |i| {
                sample_taboo(&model, &sample.noise(&model, mode, i), sample.region, sample.max_n)
            })?;
            emit(&sample_report("sample-taboo", &sample, &samples), &output)
        }
        Command::SamplePotential {
            sample,
            strategy,
            output,
        } => {
            let (model, mode) = sample.validate()?;
            let strategy = match strategy {
                Strategy::Linear => SearchStrategy::Linear,
                Strategy::Exponential => SearchStrategy::ExponentialSearch,
            };
            let samples = collect_samples(&sample, |i| {
                sample_potential(
                    &model,
                    &sample.noise(&model, mode, i),
                    sample.region,
                    sample.max_n,
                    strategy,
                )
            })?;
            let mut r = sample_report("sample-potential", &sample, &samples);
            r.meta("strategy", format!("{strategy:?}"));
            emit(&r, &output)
        }
        Command::MeanMeasure {
            sample,
            kind,
            output,
        } => {
            let (model, mode) = sample.validate()?;
            let samples = collect_samples(&sample, |i| {
                let noise = sample.noise(&model, mode, i);
                match kind {
                    Kind::Taboo => sample_taboo(&model, &noise, sample.region, sample.max_n),
                    Kind::Potential => sample_potential(
                        &model,
                        &noise,
                        sample.region,
                        sample.max_n,
                        SearchStrategy::ExponentialSearch,
                    ),
                }
            })?;
            let atoms: Vec<CountingMeasure> = samples.iter().map(|s| s.atoms.clone()).collect();
            let rep = mean_measure(&atoms, sample.region)?;
            let censored = samples.iter().filter(|s| s.status == SampleStatus::Censored).count();
            let mut r = Report::new(
                "mean-measure",
                vec!["state", "estimate", "stderr", "n", "censored_fraction"],
            );
            sample.echo(&mut r);
            r.meta("kind", format!("{kind:?}").to_lowercase());
            r.meta("censored", censored as u64);
            let frac = censored as f64 / samples.len() as f64;
            for row in rep.rows {
                r.rows.push(vec![
                    json!(row.state),
                    json!(row.estimate),
                    json!(row.stderr),
                    json!(row.n),
                    json!(frac),
                ]);
            }
            emit(&r, &output)
        }
        Command::InvariantOracle {
            model,
            region,
            n,
            seed,
            output,
        } => {
            let m = parse_model(&model)?;
            if region < 0 {
                return Err(Error::Usage("--region must be nonnegative".into()));
            }
            let noise = m.noise(seed, CouplingMode::TotallyIndependent);
            let rep = invariant_measure_oracle(&m, region, n, &noise)?;
            let mut r = Report::new(
                "invariant-oracle",
                vec!["state", "estimate", "stderr", "n", "censored_fraction"],
            );
            r.meta("model", model);
            r.meta("region", region);
            r.meta("excursions", n);
            r.meta("seed", seed);
            let censored = rep.rows.first().map_or(0.0, |x| x.censored_fraction);
            r.meta("censored", (censored * n as f64).round() as u64);
            for row in rep.rows {
                r.rows.push(vec![
                    json!(row.state),
                    json!(row.estimate),
                    json!(row.stderr),
                    json!(row.n),
                    json!(row.censored_fraction),
                ]);
            }
            emit(&r, &output)
        }
        Command::EftConnectivity {
            dist,
            z0,
            horizon,
            trials,
            seed,
            output,
        } => {
            let d: JumpDistribution = dist.parse()?;
            let noise = NoiseField::new(seed, CouplingMode::TotallyIndependent, 1);
            let e = meeting_experiment(&d, z0, horizon, trials, &noise)?;
            let alpha = match d.spec() {
                DistributionSpec::Zeta(a) => json!(a),
                other => json!(other.to_string()),
            };
            let mut r = Report::new(
                "eft-connectivity",
                vec!["alpha", "z0", "horizon", "trials", "meeting_frequency", "ci_low", "ci_high"],
            );
            r.meta("dist", dist);
            r.meta("seed", seed);
            r.meta("censored", e.trials - e.meetings);
            r.rows.push(vec![
                alpha,
                json!(e.z0),
                json!(e.horizon),
                json!(e.trials),
                json!(e.frequency),
                json!(e.ci_low),
                json!(e.ci_high),
            ]);
            emit(&r, &output)
        }
        Command::KFunction {
            sample,
            i,
            r_max,
            convention,
            output,
        } => {
            let (model, mode) = sample.validate()?;
            if r_max < 1 {
                return Err(Error::Usage("--r-max must be at least 1".into()));
            }
            let region = sample.region.max(i + r_max);
            let samples = collect_samples(&sample, |k| {
                sample_taboo(&model, &sample.noise(&model, mode, k), region, sample.max_n)
            })?;
            let censored = samples.iter().filter(|s| s.status == SampleStatus::Censored).count();
            let atoms: Vec<CountingMeasure> = samples.into_iter().map(|s| s.atoms).collect();
            let mut r = Report::new("k-function", vec!["r", "k", "stderr", "conditioned", "samples"]);
            sample.echo(&mut r);
            r.meta("region", region);
            r.meta("i", i);
            r.meta("convention", format!("{convention:?}").to_lowercase());
            r.meta("censored", censored as u64);
            for rad in 1..=r_max {
                match k_function(&atoms, i, rad, convention.into()) {
                    Ok(k) => r.rows.push(vec![
                        json!(rad),
                        json!(k.value),
                        json!(k.stderr),
                        json!(k.conditioned),
                        json!(k.samples),
                    ]),
                    Err(Error::Undefined(_)) => r.rows.push(vec![
                        json!(rad),
                        json!("undefined"),
                        Value::Null,
                        json!(0),
                        json!(atoms.len()),
                    ]),
                    Err(e) => return Err(e),
                }
            }
            emit(&r, &output)
        }
        Command::QueueDemo {
            model,
            region,
            seed,
            max_n,
            output,
        } => {
            let m = parse_model(&model)?;
            let noise = m.noise(derive_seed(seed, 0), CouplingMode::Common);
            let t = sample_taboo(&m, &noise, region, max_n)?;
            let p = sample_potential(&m, &noise, region, max_n, SearchStrategy::ExponentialSearch)?;
            let mut r = Report::new("queue-demo", vec!["state", "taboo", "potential"]);
            r.meta("model", model);
            r.meta("region", region);
            r.meta("seed", seed);
            r.meta("max_n", max_n);
            r.meta("status", format!("{:?}", t.status).to_lowercase());
            r.meta("depth_used", t.depth_used);
            r.meta("censored", u64::from(t.status == SampleStatus::Censored));
            for (s, c) in p.atoms.iter() {
                r.rows.push(vec![json!(s), json!(t.atoms.get(s)), json!(c)]);
            }
            emit(&r, &output)
        }
        Command::BridgeDump {
            model,
            coupling,
            t_min,
            t_max,
            seed,
            max_vertices,
            output,
        } => {
            let m = parse_model(&model)?;
            let mode: CouplingMode = coupling.parse()?;
            let g = build_bridge_with_budget(&m, &m.noise(seed, mode), t_min, t_max, max_vertices)?;
            let mut r = Report::new(
                "bridge-dump",
                vec!["time", "state", "parent_time", "parent_state", "n_starts_through", "taboo_flag"],
            );
            r.meta("model", model);
            r.meta("coupling", coupling);
            r.meta("t_min", t_min);
            r.meta("t_max", t_max);
            r.meta("seed", seed);
            r.meta("censored", 0u64);
            for t in t_min..=t_max {
                for (&x, v) in g.column(t)? {
                    r.rows.push(vec![
                        json!(t),
                        json!(x),
                        v.next.map_or(Value::Null, |_| json!(t + 1)),
                        v.next.map_or(Value::Null, |y| json!(y)),
                        json!(v.starts),
                        json!(u8::from(v.unreturned > 0)),
                    ]);
                }
            }
            emit(&r, &output)
        }
    }
}

/// Exit code for an error: 1 for usage problems, 2 for runtime failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Parse { .. } | Error::InvalidParameter(_) => 1,
        _ => 2,
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("doeblin: {e}");
            exit_code(&e)
        }
    }
}
