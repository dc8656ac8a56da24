//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::approximation::{
    app_error_bound, app_exp_params, app_spt_params, apply_algorithm, approx_report, auto_box,
    card_bound, index_set, wce_app_oracle, ApproxParams,
};
use crate::config::{spec_hash, SpecConfig};
use crate::cosine_space::sample_unit_ball;
use crate::error::{Error, Result};
use crate::integration::{error_report, exp_rule_params, min_error_search, spt_rule_params, GridRule};
use crate::report::{fmt_f64, write_csv, write_json, CsvRow, IndexRow, IndexSetRow, OracleRow};
use crate::tractability::{
    classify_approximation, classify_integration, complexity_table, InfoClass, Problem,
};
use crate::weights::{MultiIndex, WeightSpec};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "COSINE_EC_OUT_DIR";
/// Seed used by `approx --samples` when `--seed` is absent.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "cosine-ec", version, about = "Error analysis in weighted half-period cosine spaces")]
pub struct Cli {
    #[command(flatten)]
    pub spec: SpecArgs,

    /// Output file. Defaults to `$COSINE_EC_OUT_DIR/<command>-<spec_hash>.<ext>`, else stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Weight parameters. Flags override values read from `--config`.
#[derive(Debug, Args)]
pub struct SpecArgs {
    /// Flat `key = value` spec document.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base ω in (0,1).
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// Generator family of a_j.
    #[arg(long, global = true)]
    pub a_kind: Option<String>,
    /// Comma-separated generator parameters of a_j.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub a_params: Option<Vec<f64>>,
    /// Generator family of b_j.
    #[arg(long, global = true)]
    pub b_kind: Option<String>,
    /// Comma-separated generator parameters of b_j.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub b_params: Option<Vec<f64>>,
    /// Largest admissible dimension.
    #[arg(long, global = true)]
    pub s_max: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleMethod {
    Exp,
    Spt,
    Search,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ApproxMethod {
    Exp,
    Spt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemArg {
    Integration,
    Approximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InfoArg {
    All,
    Std,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact, upper and lower worst-case error of a midpoint product rule.
    Wce {
        #[arg(long)]
        s: usize,
        /// Points per coordinate; a single value is used for every coordinate.
        #[arg(long, value_delimiter = ',', required = true)]
        mesh: Vec<u64>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Build an integration rule for a target error, or tabulate the best rules up to a budget.
    Rule {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_enum, default_value_t = RuleMethod::Exp)]
        method: RuleMethod,
        #[arg(long, default_value_t = 1000)]
        budget: u64,
    },
    /// Approximation parameters, error bound and optionally the exact worst-case error.
    Approx {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_enum, default_value_t = ApproxMethod::Exp)]
        method: ApproxMethod,
        /// Explicit mesh; requires `--M`.
        #[arg(long, value_delimiter = ',')]
        mesh: Option<Vec<u64>>,
        #[arg(long = "M")]
        m: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// Also compute the exact worst-case error.
        #[arg(long)]
        oracle: bool,
        /// Apply the algorithm to this many random unit-ball polynomials on A(s, M).
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Cardinality (and optionally members) of A(s, M).
    Indexset {
        #[arg(long)]
        s: usize,
        #[arg(long = "M")]
        m: f64,
        #[arg(long)]
        list: bool,
    },
    /// Tractability verdict (always JSON).
    Tract {
        #[arg(long, value_enum, default_value_t = ProblemArg::Integration)]
        problem: ProblemArg,
        #[arg(long, value_enum, default_value_t = InfoArg::Std)]
        info: InfoArg,
    },
    /// Complexity table over the Cartesian product of `--s` and `--eps`.
    Sweep {
        #[arg(long, value_enum, default_value_t = ProblemArg::Integration)]
        problem: ProblemArg,
        #[arg(long, value_enum, default_value_t = InfoArg::Std)]
        info: InfoArg,
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
    },
    /// Exact worst-case approximation error of a given mesh and M.
    Oracle {
        #[arg(long)]
        s: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        mesh: Vec<u64>,
        #[arg(long = "M")]
        m: f64,
        /// Truncation box; chosen automatically when absent.
        #[arg(long = "box", value_delimiter = ',')]
        box_: Option<Vec<usize>>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Wce { .. } => "wce",
            Command::Rule { .. } => "rule",
            Command::Approx { .. } => "approx",
            Command::Indexset { .. } => "indexset",
            Command::Tract { .. } => "tract",
            Command::Sweep { .. } => "sweep",
            Command::Oracle { .. } => "oracle",
        }
    }
}

impl SpecArgs {
    pub fn resolve(&self) -> Result<WeightSpec> {
        let base = match &self.config {
            Some(path) => SpecConfig::parse(&std::fs::read_to_string(path)?)?,
            None => SpecConfig::default(),
        };
        let flags = SpecConfig {
            omega: self.omega,
            a_kind: self.a_kind.clone(),
            a_params: self.a_params.clone(),
            b_kind: self.b_kind.clone(),
            b_params: self.b_params.clone(),
            s_max: self.s_max,
        };
        base.merged(flags).build()
    }
}

fn expand_mesh(mesh: &[u64], s: usize) -> Result<GridRule> {
    if s == 0 {
        return Err(Error::Domain("s must be positive".into()));
    }
    match mesh.len() {
        1 => GridRule::new(vec![mesh[0]; s]),
        l if l == s => GridRule::new(mesh.to_vec()),
        l => Err(Error::Domain(format!("mesh has {l} entries, expected 1 or {s}"))),
    }
}

fn need_eps(eps: Option<f64>) -> Result<f64> {
    eps.ok_or_else(|| Error::Domain("--eps is required".into()))
}

fn emit<T: CsvRow + Serialize>(format: Format, spec: &WeightSpec, rows: &[T]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(&mut buf, spec, rows)?,
        Format::Json => write_json(&mut buf, spec, &rows)?,
    }
    Ok(buf)
}

#[derive(Debug, Serialize)]
struct SampleRow {
    sample: usize,
    seed: u64,
    terms: usize,
    l2_error: f64,
}

impl CsvRow for SampleRow {
    fn header() -> &'static [&'static str] {
        &["sample", "seed", "terms", "l2_error"]
    }
    fn fields(&self) -> Vec<String> {
        vec![
            self.sample.to_string(),
            self.seed.to_string(),
            self.terms.to_string(),
            fmt_f64(self.l2_error),
        ]
    }
}

/// Runs the command and returns the rendered artifact.
pub fn render(cli: &Cli, spec: &WeightSpec) -> Result<Vec<u8>> {
    let format = cli.format;
    match &cli.command {
        Command::Wce { s, mesh, eps } => {
            spec.check_dim(*s)?;
            let rule = expand_mesh(mesh, *s)?;
            emit(format, spec, &[error_report(spec, &rule, *eps, "midpoint")?])
        }
        Command::Rule { s, eps, method, budget } => {
            spec.check_dim(*s)?;
            match method {
                RuleMethod::Exp => {
                    let eps = need_eps(*eps)?;
                    let (_, rule) = exp_rule_params(spec, *s, eps)?;
                    emit(format, spec, &[error_report(spec, &rule, Some(eps), "exp_rule")?])
                }
                RuleMethod::Spt => {
                    let eps = need_eps(*eps)?;
                    let rule = spt_rule_params(spec, *s, eps)?;
                    emit(format, spec, &[error_report(spec, &rule, Some(eps), "spt_rule")?])
                }
                RuleMethod::Search => emit(format, spec, &min_error_search(spec, *s, *budget)?),
            }
        }
        Command::Approx { s, eps, method, mesh, m, beta, delta, oracle, samples, seed } => {
            spec.check_dim(*s)?;
            let (params, name) = match (mesh, m) {
                (Some(mesh), Some(m)) => (ApproxParams::new(expand_mesh(mesh, *s)?, *m)?, "given"),
                (Some(_), None) | (None, Some(_)) => {
                    return Err(Error::Domain("--mesh and --M must be given together".into()))
                }
                (None, None) => {
                    let eps = need_eps(*eps)?;
                    match method {
                        ApproxMethod::Exp => (app_exp_params(spec, *s, eps)?, "app_exp"),
                        ApproxMethod::Spt => (app_spt_params(spec, *s, eps, *beta, *delta)?, "app_spt"),
                    }
                }
            };
            if *samples > 0 {
                let set = index_set(spec, *s, params.m)?;
                if set.is_empty() {
                    return Err(Error::Domain("A(s, M) is empty; nothing to sample".into()));
                }
                let mut rows = Vec::with_capacity(*samples);
                for i in 0..*samples {
                    let sd = seed.wrapping_add(i as u64);
                    let f = sample_unit_ball(spec, &set.members, sd)?;
                    let g = apply_algorithm(spec, &f, &params)?;
                    rows.push(SampleRow { sample: i, seed: sd, terms: f.len(), l2_error: f.sub(&g)?.l2_norm() });
                }
                return emit(format, spec, &rows);
            }
            emit(format, spec, &[approx_report(spec, &params, *oracle, *eps, name)?])
        }
        Command::Indexset { s, m, list } => {
            if *list {
                let set = index_set(spec, *s, *m)?;
                let rows = set
                    .members
                    .iter()
                    .map(|k| Ok(IndexRow { index: k.to_string(), weight: spec.weight(k)? }))
                    .collect::<Result<Vec<_>>>()?;
                emit(format, spec, &rows)
            } else {
                let set = index_set(spec, *s, *m)?;
                let row = IndexSetRow { s: *s, m: *m, cardinality: set.len(), card_bound: card_bound(spec, *s, *m)? };
                emit(format, spec, &[row])
            }
        }
        Command::Tract { problem, info } => {
            let v = match problem {
                ProblemArg::Integration => classify_integration(spec),
                ProblemArg::Approximation => classify_approximation(spec, info_class(*info)),
            };
            let mut buf = Vec::new();
            write_json(&mut buf, spec, &v)?;
            Ok(buf)
        }
        Command::Sweep { problem, info, s, eps, budget } => {
            let problem = match problem {
                ProblemArg::Integration => Problem::Integration,
                ProblemArg::Approximation => Problem::Approximation,
            };
            let rows = complexity_table(spec, problem, info_class(*info), eps, s, *budget)?;
            emit(format, spec, &rows)
        }
        Command::Oracle { s, mesh, m, box_ } => {
            spec.check_dim(*s)?;
            let rule = expand_mesh(mesh, *s)?;
            let bx = match box_ {
                Some(b) => MultiIndex::new(b.clone()),
                None => auto_box(spec, &rule, &index_set(spec, *s, *m)?)?,
            };
            let result = wce_app_oracle(spec, &rule, *m, &bx)?;
            let row = OracleRow {
                s: *s,
                mesh: rule.label(),
                m: *m,
                box_: bx.to_string(),
                result,
                bound: app_error_bound(spec, *s, &rule, *m)?,
            };
            emit(format, spec, &[row])
        }
    }
}

fn info_class(i: InfoArg) -> InfoClass {
    match i {
        InfoArg::All => InfoClass::All,
        InfoArg::Std => InfoClass::Std,
    }
}

/// Resolves the spec, renders the artifact and writes it. Returns the file
/// written, if any.
pub fn run(cli: &Cli) -> Result<Option<PathBuf>> {
    let spec = cli.spec.resolve()?;
    let bytes = render(cli, &spec)?;
    let json = cli.format == Format::Json || matches!(cli.command, Command::Tract { .. });
    let path = match (&cli.out, std::env::var_os(OUT_DIR_ENV)) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => {
            let ext = if json { "json" } else { "csv" };
            Some(PathBuf::from(dir).join(format!("{}-{}.{ext}", cli.command.name(), spec_hash(&spec))))
        }
        (None, None) => None,
    };
    match &path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(p, &bytes)?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes)?;
            out.flush()?;
        }
    }
    Ok(path)
}

/// Machine-readable error record for stderr.
pub fn error_record(e: &Error) -> String {
    serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } }).to_string()
}

/// Process exit code for an error: 2 for invalid input, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        2
    } else {
        1
    }
}
