//! Command-line front end for `exante-core`.
//!
//! Every report is a JSON object (or CSV table) that echoes the inputs
//! needed to re-run it: command, seed, profile cap, crate version and a
//! SHA-256 digest of the canonical instance encoding.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use exante_core::dist::{hard_family, make_truncated_er_iid, truncated_er_spa, HardKind};
use exante_core::engine::{mc_mean, stats_mc};
use exante_core::mech::{
    iid_tam_revenue, peer_max_revenue, peer_welfare_revenue, MechanismConfig, PeerReport,
};
use exante_core::rng::substream;
use exante_core::verify::{
    concentration_audit, ic_audit, posted_price_cap, sweep, upper_bound_audit, GuaranteeReport,
    SweepConfig, REGRET_TOL,
};
use exante_core::{Distribution, Error, ExactEngine, Instance, Model, DEFAULT_CAP};

/// Environment variable that overrides the default joint-support cap.
pub const CAP_ENV: &str = "EXANTE_CAP";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_AUDIT: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("invalid JSON in {what}: {source}")]
    Json {
        what: String,
        source: serde_json::Error,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write output: {0}")]
    Write(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(Error::Capacity { .. }) => EXIT_CAPACITY,
            CliError::Core(_) | CliError::Json { .. } | CliError::Read { .. } => EXIT_VALIDATION,
            CliError::Write(_) => EXIT_VALIDATION,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "exante", version, about = "Simulate and audit distribution-reporting auctions")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Maximum number of enumerated joint profiles [default: $EXANTE_CAP or 1000000].
    #[arg(long, global = true)]
    pub cap: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Spa,
    Vcg,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Spa => Model::SingleItemSpa,
            ModelArg::Vcg => Model::MultiUnitVcg,
        }
    }
}

#[derive(Debug, Args)]
pub struct InstanceArg {
    /// Instance JSON file, or inline JSON.
    #[arg(long)]
    pub instance: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Welfare, base revenue and per-buyer w, s, r.
    Stats {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long, value_enum, default_value_t = EngineKind::Exact)]
        engine: EngineKind,
        /// Monte Carlo sample count.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Base mechanism [default: spa for single-item instances, else vcg].
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
    },
    /// Peer-Max revenue and its either-or bound.
    RunPm {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long)]
        k: u32,
    },
    /// Peer-Welfare revenue and its either-or bound.
    RunPw {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long)]
        k: u32,
    },
    /// Revenue of the i.i.d. full-extraction mechanism.
    RunIid {
        #[command(flatten)]
        instance: InstanceArg,
    },
    /// Largest gain from misreporting within a finite class.
    IcAudit {
        /// Mechanism config JSON (file or inline).
        #[arg(long)]
        mech: String,
        /// JSON array of distributions (file or inline).
        #[arg(long)]
        class: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        /// Comma-separated demand caps [default: all 1].
        #[arg(long, value_delimiter = ',')]
        demands: Option<Vec<f64>>,
    },
    /// Re-run one of the named experiments.
    Reproduce {
        #[command(subcommand)]
        which: Reproduce,
    },
    /// Either-or bound check on random instances.
    Sweep(SweepArgs),
}

#[derive(Debug, Subcommand)]
pub enum Reproduce {
    /// Full extraction on `n` copies of one distribution.
    Iid {
        #[arg(long)]
        n: usize,
        /// Distribution JSON (file or inline).
        #[arg(long)]
        dist: String,
    },
    /// Monte Carlo check of the truncated equal-revenue closed forms.
    Lower {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 4.0)]
        h: f64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Hard-family revenue ceiling and posted-price cap.
    Upper {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 300)]
        trials: u64,
        /// Mechanism config JSON [default: Peer-Max with K = 1].
        #[arg(long)]
        mech: Option<String>,
    },
    /// Frequency of the hard-family concentration event.
    Concentration {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 2000)]
        trials: u64,
    },
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 1000)]
    pub count: u64,
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 5)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1)]
    pub atoms_min: usize,
    #[arg(long, default_value_t = 3)]
    pub atoms_max: usize,
    /// Comma-separated K values; one is drawn per instance.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub k: Vec<u32>,
    #[arg(long, value_enum, default_value_t = ModelArg::Spa)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 10.0)]
    pub vmax: f64,
    #[arg(long, default_value_t = 3)]
    pub m_max: u32,
    #[arg(long, default_value_t = 2)]
    pub d_max: u32,
}

/// Read `arg` as a file when it names one, otherwise as inline JSON.
fn read_json_arg(arg: &str) -> CliResult<String> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(Path::new(arg)).map_err(|source| CliError::Read {
        path: PathBuf::from(arg),
        source,
    })
}

fn parse_json<T: serde::de::DeserializeOwned>(arg: &str, what: &str) -> CliResult<T> {
    let text = read_json_arg(arg)?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        what: what.to_string(),
        source,
    })
}

/// Parse and validate an instance from a path or inline JSON.
pub fn parse_instance(arg: &str) -> CliResult<Instance> {
    parse_json(arg, "instance")
}

/// Hex SHA-256 of the canonical JSON encoding of `instance`.
pub fn instance_hash(instance: &Instance) -> String {
    let canonical = serde_json::to_string(instance).expect("instances serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Cap from the flag, then the environment, then the default.
fn resolve_cap(flag: Option<u64>) -> CliResult<u64> {
    if let Some(c) = flag {
        return Ok(c);
    }
    match std::env::var(CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{CAP_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_CAP),
    }
}

/// A finished report: JSON envelope, optional table for CSV, audit verdict.
struct Report {
    command: &'static str,
    input: Value,
    result: Value,
    table: Option<Table>,
    ok: bool,
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn num(x: f64) -> String {
    // Shortest round-trip form, identical to the JSON encoding.
    serde_json::to_string(&x).unwrap_or_else(|_| x.to_string())
}

fn guarantee_table(reports: &[GuaranteeReport]) -> Table {
    Table {
        header: vec!["id", "n", "wel", "base_rev", "bound", "revenue", "margin", "satisfied"],
        rows: reports
            .iter()
            .map(|r| {
                vec![
                    r.instance_id.to_string(),
                    r.n.to_string(),
                    num(r.wel),
                    num(r.base_rev),
                    num(r.bound),
                    num(r.revenue),
                    num(r.margin),
                    r.satisfied.to_string(),
                ]
            })
            .collect(),
    }
}

fn alpha_table(peer: &PeerReport) -> Table {
    let w = 0.5 / peer.per_alpha.len() as f64;
    let mut rows: Vec<Vec<String>> = peer
        .per_alpha
        .iter()
        .map(|a| vec![num(a.alpha), num(w), num(a.rev)])
        .collect();
    rows.push(vec![num(peer.high.alpha), num(0.5), num(peer.high.rev)]);
    Table {
        header: vec!["alpha", "weight", "rev"],
        rows,
    }
}

fn peer_report(
    command: &'static str,
    instance: &Instance,
    k: u32,
    peer: PeerReport,
) -> Report {
    let g = GuaranteeReport::new(0, instance.n(), k, peer.stats.wel, peer.stats.base_rev, peer.revenue);
    Report {
        command,
        input: json!({ "instance_sha256": instance_hash(instance), "k": k }),
        table: Some(alpha_table(&peer)),
        ok: g.satisfied,
        result: json!({
            "revenue": peer.revenue,
            "bound": g.bound,
            "margin": g.margin,
            "satisfied": g.satisfied,
            "wel": peer.stats.wel,
            "base_rev": peer.stats.base_rev,
            "l": peer.l,
            "per_alpha": peer.per_alpha,
            "high": peer.high,
            "stats": peer.stats,
        }),
    }
}

fn iid_report(command: &'static str, engine: &ExactEngine, instance: &Instance) -> CliResult<Report> {
    let revenue = iid_tam_revenue(engine, instance)?;
    let stats = engine.stats(instance, Model::SingleItemSpa)?;
    let identical = instance.buyers().windows(2).all(|w| w[0] == w[1]);
    let gap = revenue - stats.wel;
    Ok(Report {
        command,
        input: json!({ "instance_sha256": instance_hash(instance) }),
        table: None,
        ok: !identical || gap.abs() <= 1e-9,
        result: json!({
            "revenue": revenue,
            "wel": stats.wel,
            "base_rev": stats.base_rev,
            "gap": gap,
            "identical": identical,
        }),
    })
}

fn stats_table(stats: &exante_core::PerBuyerStats) -> Table {
    let mut header = vec!["buyer", "w", "s", "r"];
    if stats.stderr.is_some() {
        header.extend(["w_stderr", "s_stderr", "r_stderr"]);
    }
    let rows = (0..stats.n())
        .map(|i| {
            let mut row = vec![i.to_string(), num(stats.w[i]), num(stats.s[i]), num(stats.r[i])];
            if let Some(se) = &stats.stderr {
                row.extend([num(se.w[i]), num(se.s[i]), num(se.r[i])]);
            }
            row
        })
        .collect();
    Table { header, rows }
}

fn execute(cfg: &RunConfig, engine: &ExactEngine) -> CliResult<Report> {
    let seed = cfg.seed;
    Ok(match &cfg.command {
        Command::Stats {
            instance,
            engine: kind,
            samples,
            model,
        } => {
            let inst = parse_instance(&instance.instance)?;
            let model = model.map(Model::from).unwrap_or_else(|| Model::default_for(&inst));
            let stats = match kind {
                EngineKind::Exact => engine.stats(&inst, model)?,
                EngineKind::Mc => stats_mc(&inst, model, *samples, &mut substream(seed, 0))?,
            };
            Report {
                command: "stats",
                input: json!({
                    "instance_sha256": instance_hash(&inst),
                    "engine": kind,
                    "model": model,
                    "samples": if *kind == EngineKind::Mc { Some(*samples) } else { None },
                }),
                table: Some(stats_table(&stats)),
                ok: true,
                result: to_value(&stats),
            }
        }
        Command::RunPm { instance, k } => {
            let inst = parse_instance(&instance.instance)?;
            peer_report("run-pm", &inst, *k, peer_max_revenue(engine, &inst, *k)?)
        }
        Command::RunPw { instance, k } => {
            let inst = parse_instance(&instance.instance)?;
            peer_report("run-pw", &inst, *k, peer_welfare_revenue(engine, &inst, *k)?)
        }
        Command::RunIid { instance } => {
            let inst = parse_instance(&instance.instance)?;
            iid_report("run-iid", engine, &inst)?
        }
        Command::IcAudit {
            mech,
            class,
            n,
            m,
            demands,
        } => {
            let mech: MechanismConfig = parse_json(mech, "mechanism config")?;
            let class: Vec<Distribution> = parse_json(class, "class")?;
            let demands = demands.clone().unwrap_or_else(|| vec![1.0; *n]);
            if demands.len() != *n {
                return Err(CliError::Usage(format!(
                    "--demands has {} entries, expected {n}",
                    demands.len()
                )));
            }
            let audit = ic_audit(engine, &mech, &class, *m, &demands)?;
            Report {
                command: "ic-audit",
                input: json!({ "mech": mech, "class": class, "n": n, "m": m, "demands": demands }),
                table: None,
                ok: audit.max_regret <= REGRET_TOL,
                result: to_value(&audit),
            }
        }
        Command::Reproduce { which } => reproduce(which, engine, seed)?,
        Command::Sweep(a) => {
            let config = SweepConfig {
                count: a.count,
                n_min: a.n_min,
                n_max: a.n_max,
                atoms_min: a.atoms_min,
                atoms_max: a.atoms_max,
                ks: a.k.clone(),
                seed,
                model: a.model.into(),
                vmax: a.vmax,
                m_max: a.m_max,
                d_max: a.d_max,
            };
            let rep = sweep(engine, &config)?;
            Report {
                command: "sweep",
                input: to_value(&rep.config),
                table: Some(guarantee_table(&rep.reports)),
                ok: rep.summary.violations == 0,
                result: json!({ "summary": rep.summary, "reports": rep.reports }),
            }
        }
    })
}

fn reproduce(which: &Reproduce, engine: &ExactEngine, seed: u64) -> CliResult<Report> {
    Ok(match which {
        Reproduce::Iid { n, dist } => {
            let d: Distribution = parse_json(dist, "distribution")?;
            let inst = Instance::single_item(vec![d; *n])?;
            iid_report("reproduce iid", engine, &inst)?
        }
        Reproduce::Lower {
            n,
            h,
            scale,
            samples,
        } => {
            let inst = make_truncated_er_iid(*n, *h, *scale)?;
            let spa = truncated_er_spa(*n, *h, *scale);
            let mean = inst.buyers()[0].mean();
            let mc = stats_mc(&inst, Model::SingleItemSpa, *samples, &mut substream(seed, 0))?;
            let se = mc.stderr.clone().expect("Monte Carlo stats carry standard errors");
            let (mc_m, mc_m_se) = mc_mean(&inst.buyers()[0], *samples, &mut substream(seed, 1))?;
            let spa_ok = (mc.base_rev - spa).abs() <= 4.0 * se.base_rev;
            let mean_ok = (mc_m - mean).abs() <= 4.0 * mc_m_se;
            Report {
                command: "reproduce lower",
                input: json!({
                    "instance_sha256": instance_hash(&inst),
                    "n": n, "h": h, "scale": scale, "samples": samples,
                }),
                table: None,
                ok: spa_ok && mean_ok,
                result: json!({
                    "spa_closed_form": spa,
                    "spa_mc": mc.base_rev,
                    "spa_stderr": se.base_rev,
                    "spa_ok": spa_ok,
                    "mean_closed_form": mean,
                    "mean_mc": mc_m,
                    "mean_stderr": mc_m_se,
                    "mean_ok": mean_ok,
                    "wel_mc": mc.wel,
                    "wel_stderr": se.wel,
                }),
            }
        }
        Reproduce::Upper { n, trials, mech } => {
            let mech: MechanismConfig = match mech {
                Some(m) => parse_json(m, "mechanism config")?,
                None => MechanismConfig::PeerMax { k: 1 },
            };
            let family = hard_family(HardKind::General, *n)?;
            let cap = posted_price_cap(&family);
            let audit = upper_bound_audit(engine, &mech, *n, *trials, seed)?;
            Report {
                command: "reproduce upper",
                input: json!({ "n": n, "trials": trials, "mech": mech }),
                table: None,
                ok: cap.ok && audit.ok,
                result: json!({
                    "family": {
                        "levels": family.levels,
                        "eps": family.eps,
                        "delta": family.delta,
                        "weights": family.members.iter().map(|m| m.weight).collect::<Vec<_>>(),
                    },
                    "posted_price": cap,
                    "upper_bound": audit,
                }),
            }
        }
        Reproduce::Concentration { n, trials } => {
            let rep = concentration_audit(*n, *trials, seed)?;
            Report {
                command: "reproduce concentration",
                input: json!({ "n": n, "trials": trials }),
                table: None,
                ok: rep.ok,
                result: to_value(&rep),
            }
        }
    })
}

fn scalar_table(result: &Value) -> Table {
    let rows = match result {
        Value::Object(map) => map
            .iter()
            .filter(|(_, v)| !v.is_object() && !v.is_array())
            .map(|(k, v)| {
                let text = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                vec![k.clone(), text]
            })
            .collect(),
        _ => Vec::new(),
    };
    Table {
        header: vec!["field", "value"],
        rows,
    }
}

fn render(report: &Report, cfg: &RunConfig, cap: u64) -> CliResult<Vec<u8>> {
    match cfg.format {
        Format::Json => {
            let envelope = json!({
                "command": report.command,
                "version": env!("CARGO_PKG_VERSION"),
                "seed": cfg.seed,
                "cap": cap,
                "input": report.input,
                "ok": report.ok,
                "result": report.result,
            });
            let mut out = serde_json::to_vec_pretty(&envelope).expect("reports serialize");
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let fallback;
            let table = match &report.table {
                Some(t) => t,
                None => {
                    fallback = scalar_table(&report.result);
                    &fallback
                }
            };
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Write(e.to_string());
            w.write_record(&table.header).map_err(io)?;
            for row in &table.rows {
                w.write_record(row).map_err(io)?;
            }
            w.into_inner().map_err(|e| CliError::Write(e.to_string()))
        }
    }
}

fn run_config(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<bool> {
    let cap = resolve_cap(cfg.cap)?;
    let engine = ExactEngine::new(cap).map_err(|e| CliError::Usage(e.to_string()))?;
    let report = execute(cfg, &engine)?;
    let bytes = render(&report, cfg, cap)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| CliError::Write(format!("{}: {e}", path.display())))?,
        None => stdout
            .write_all(&bytes)
            .map_err(|e| CliError::Write(e.to_string()))?,
    }
    Ok(report.ok)
}

/// Parse `args` (program name first), run, and return the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    match run_config(&cfg, stdout) {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            let _ = writeln!(stderr, "audit failed");
            EXIT_AUDIT
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
