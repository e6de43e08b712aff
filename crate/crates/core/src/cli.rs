//! Command-line front end: argument parsing, subcommand dispatch and the
//! JSON/CSV writers.
//!
//! JSON output has sorted keys, a top-level `"schema": 1`, and floats rounded
//! to 12 significant digits. Exit codes: 0 success, 2 domain error,
//! 3 capacity error, 4 failed verification or bound check.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::construct::{sweep, target_grid, Constructor};
use crate::error::{Error, Result};
use crate::gadgets::{star_convergence, tree_convergence, DEFAULT_MATERIALIZE_LIMIT};
use crate::random;
use crate::recursion::{
    decay_constants, fixed_point_iterates, hardness_thresholds, uniqueness_threshold, RecursionParams,
};
use crate::reductions::{
    bipartite_transform, contract_degree_one, contract_then_ising, realize_field_selfloops, to_ising,
    two_coloring, ReductionCertificate, Verifiable,
};
use crate::scalar::{Scalar, Surd};
use crate::spin::{Enumerator, FieldedGraph, GraphDocument, SpinParams, DEFAULT_ENUMERATION_LIMIT};

pub const SCHEMA_VERSION: u32 = 1;
pub const JSON_SIGNIFICANT_DIGITS: usize = 12;
pub const THRESHOLD_SIGNIFICANT_DIGITS: usize = 6;

/// Exit code for a completed run whose verification or bound check failed.
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "twospin",
    version,
    about = "Partition functions, field gadgets and reductions for two-spin systems"
)]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand; each subcommand checks the ones it needs.
#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Edge weight for two adjacent 0 spins.
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Edge weight for two adjacent 1 spins.
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Uniform external field.
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    /// Arity of the tree recursion.
    #[arg(long, global = true)]
    pub d: Option<u32>,
    /// Recursion depth of the gadget construction.
    #[arg(long, global = true)]
    pub ell: Option<u32>,
    /// Field to realize.
    #[arg(long, global = true)]
    pub target: Option<f64>,
    /// Precision: realize the target within a factor exp(1/m).
    #[arg(long, global = true)]
    pub m: Option<u64>,
    /// Degree of the regular tree for uniqueness thresholds.
    #[arg(long = "delta-reg", global = true)]
    pub delta_reg: Option<u32>,
    /// Graph JSON to read.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Float)]
    pub mode: Mode,
    /// Seed for random instances (ChaCha8) when no --input is given.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest graph evaluated by exhaustive enumeration.
    #[arg(long = "enum-limit", global = true, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
    pub enum_limit: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Float,
    /// Exact arithmetic in Q(sqrt(r)); inputs are read as exact decimals.
    Rational,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact partition function of the graph in --input.
    Eval,
    /// Largest fixed point mu* of mu h(x)^d, its bounds and the decay constants.
    Fixpoint {
        /// Number of iterates x_0 = mu, x_(i+1) = f(x_i) to print.
        #[arg(long, default_value_t = 5)]
        iterates: usize,
    },
    /// Build a gadget realizing --target at depth --ell and certify its error.
    Construct {
        /// Write the gadget description here.
        #[arg(long)]
        gadget_output: Option<PathBuf>,
        /// Materialize the gadget (at most 10^6 vertices) and write its graph here.
        #[arg(long)]
        graph_output: Option<PathBuf>,
    },
    /// Apply a reduction and verify its partition-function identity.
    ///
    /// Without --input, bipartite/contract/ising/pipeline draw a random
    /// instance from --seed.
    Reduce {
        #[arg(value_enum)]
        kind: ReduceKind,
        /// Emit the certificate without evaluating both sides.
        #[arg(long)]
        skip_verify: bool,
        /// Vertex cap for random instances.
        #[arg(long, default_value_t = 10)]
        max_n: usize,
    },
    /// Degree and field thresholds for the hardness constructions.
    Thresholds,
    /// Tabulate a convergence quantity as CSV.
    ///
    /// Columns: star: w,field,bound; tree: t,field,log_ratio,log_bound;
    /// construct-error: ell,target,achieved,log_error,bound,within_bound,log_size;
    /// uniqueness: beta,mu_c.
    Sweep {
        #[arg(value_enum)]
        kind: SweepKind,
        #[arg(long, default_value_t = 20)]
        w_max: u64,
        #[arg(long, default_value_t = 20)]
        t_max: u32,
        #[arg(long, default_value_t = 8)]
        ell_max: u32,
        /// Number of targets mu* j / n, j = 1..n.
        #[arg(long, default_value_t = 100)]
        targets: usize,
        /// Number of beta values for the uniqueness sweep.
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReduceKind {
    /// Anti-ferromagnetic Ising on a bipartite graph to (beta, gamma).
    Bipartite,
    /// Field realized by self-loops and bristles (gamma > beta > 1).
    Selfloop,
    /// Fold degree-one vertices into their neighbours.
    Contract,
    /// Rewrite as a ferromagnetic Ising instance.
    Ising,
    /// Contract, then rewrite as Ising.
    Pipeline,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    Star,
    Tree,
    ConstructError,
    Uniqueness,
}

/// Rendered output and the exit code it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub exit_code: i32,
}

impl Outcome {
    fn new(text: String, ok: bool) -> Self {
        Outcome {
            text,
            exit_code: if ok { 0 } else { EXIT_VERIFICATION },
        }
    }
}

/// Parses `args` (program name first), runs, prints, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli).and_then(|out| emit(&cli.config, &out).map(|()| out.exit_code)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(cfg: &RunConfig, out: &Outcome) -> Result<()> {
    match &cfg.output {
        Some(path) => fs::write(path, &out.text)?,
        None => std::io::stdout().write_all(out.text.as_bytes())?,
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Eval => cmd_eval(cfg),
        Command::Fixpoint { iterates } => cmd_fixpoint(cfg, *iterates),
        Command::Construct {
            gadget_output,
            graph_output,
        } => cmd_construct(cfg, gadget_output.as_deref(), graph_output.as_deref()),
        Command::Reduce {
            kind,
            skip_verify,
            max_n,
        } => cmd_reduce(cfg, *kind, !*skip_verify, *max_n),
        Command::Thresholds => cmd_thresholds(cfg),
        Command::Sweep {
            kind,
            w_max,
            t_max,
            ell_max,
            targets,
            points,
        } => match kind {
            SweepKind::Star => sweep_star(cfg, *w_max),
            SweepKind::Tree => sweep_tree(cfg, *t_max),
            SweepKind::ConstructError => sweep_construct(cfg, *ell_max, *targets),
            SweepKind::Uniqueness => sweep_uniqueness(cfg, *points),
        },
    }
}

fn require<T: Copy>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Domain(format!("--{flag} is required for this subcommand")))
}

fn spin_params(cfg: &RunConfig) -> Result<SpinParams> {
    SpinParams::new(require(cfg.beta, "beta")?, require(cfg.gamma, "gamma")?, require(cfg.mu, "mu")?)
}

fn recursion_params(cfg: &RunConfig) -> Result<RecursionParams> {
    RecursionParams::new(spin_params(cfg)?, require(cfg.d, "d")?)
}

/// Graph and parameters from --input; parameter flags override the file.
fn read_instance(cfg: &RunConfig, path: &Path) -> Result<(FieldedGraph, SpinParams)> {
    let doc: GraphDocument = serde_json::from_str(&fs::read_to_string(path)?)?;
    let (g, p) = doc.to_instance()?;
    let p = SpinParams::new(
        cfg.beta.unwrap_or(p.beta),
        cfg.gamma.unwrap_or(p.gamma),
        cfg.mu.unwrap_or(p.mu),
    )?;
    Ok((g, p))
}

fn exact(x: f64) -> Result<Surd> {
    Surd::from_f64_decimal(x)
}

fn exact_graph(g: &FieldedGraph) -> Result<FieldedGraph<Surd>> {
    g.try_map_fields(|&f| exact(f))
}

fn exact_params(p: &SpinParams) -> Result<SpinParams<Surd>> {
    SpinParams::new(exact(p.beta)?, exact(p.gamma)?, exact(p.mu)?)
}

/// Rounds `x` to `digits` significant digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

fn round_floats(value: &mut Value, digits: usize) {
    match value {
        Value::Number(n) if !n.is_i64() && !n.is_u64() => {
            if let Some(r) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round_significant(x, digits))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|v| round_floats(v, digits)),
        Value::Object(map) => map.values_mut().for_each(|v| round_floats(v, digits)),
        _ => {}
    }
}

/// Canonical JSON text: schema tag, sorted keys, 12-digit floats.
pub fn render_json(mut value: Value) -> Result<String> {
    if let Value::Object(map) = &mut value {
        map.insert("schema".into(), json!(SCHEMA_VERSION));
    }
    round_floats(&mut value, JSON_SIGNIFICANT_DIGITS);
    // re-parse so the keys of nested objects come out sorted
    let sorted: Value = serde_json::from_str(&value.to_string())?;
    Ok(serde_json::to_string_pretty(&sorted)? + "\n")
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    Ok(serde_json::to_value(x)?)
}

fn render_csv<const N: usize>(header: [&str; N], rows: Vec<[String; N]>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e)))
}

fn num(x: f64) -> String {
    round_significant(x, JSON_SIGNIFICANT_DIGITS).to_string()
}

fn cmd_eval(cfg: &RunConfig) -> Result<Outcome> {
    let path = cfg.input.as_deref().ok_or_else(|| Error::Domain("--input is required for eval".into()))?;
    let (g, p) = read_instance(cfg, path)?;
    let en = Enumerator::with_limit(cfg.enum_limit);
    let mut out = json!({
        "vertices": g.len(),
        "edges": g.edges().len(),
        "mode": match cfg.mode { Mode::Float => "float", Mode::Rational => "rational" },
    });
    match cfg.mode {
        Mode::Float => {
            out["z"] = json!(en.partition_function(&g, &p)?);
            out["ln_z"] = json!(en.ln_partition_function(&g, &p)?);
            if g.output().is_some() {
                out["effective_field"] = json!(en.effective_field(&g, &p)?);
            }
        }
        Mode::Rational => {
            let (gx, px) = (exact_graph(&g)?, exact_params(&p)?);
            let z = en.partition_function(&gx, &px)?;
            out["z"] = json!(z.to_f64());
            out["z_exact"] = json!(z.to_string());
            if g.output().is_some() {
                let field = en.effective_field(&gx, &px)?;
                out["effective_field"] = json!(field.to_f64());
                out["effective_field_exact"] = json!(field.to_string());
            }
        }
    }
    Ok(Outcome::new(render_json(out)?, true))
}

fn cmd_fixpoint(cfg: &RunConfig, iterates: usize) -> Result<Outcome> {
    let rp = recursion_params(cfg)?;
    let dc = decay_constants(&rp)?;
    let (beta, gamma, mu, d) = (rp.params.beta, rp.params.gamma, rp.mu(), rp.d as i32);
    let lower = mu / gamma.powi(d);
    let upper = beta.powi(d) * mu;
    let holds = lower < dc.mu_star && dc.mu_star < upper;
    let out = json!({
        "mu_star": dc.mu_star,
        "iterates": fixed_point_iterates(&rp, iterates),
        "lower_bound": lower,
        "upper_bound": upper,
        "bounds_hold": holds,
        "decay_constants": to_value(&dc)?,
        "construction_field_bound": rp.construction_field_bound(),
        "construction_field_ok": rp.require_construction_field().is_ok(),
    });
    Ok(Outcome::new(render_json(out)?, holds))
}

fn cmd_construct(cfg: &RunConfig, gadget_output: Option<&Path>, graph_output: Option<&Path>) -> Result<Outcome> {
    let rp = recursion_params(cfg)?;
    let ell = require(cfg.ell, "ell")?;
    let target = require(cfg.target, "target")?;
    let mut ctx = Constructor::new(&rp)?;
    let report = ctx.certify(ell, target)?;
    if let Some(path) = gadget_output {
        fs::write(path, serde_json::to_string_pretty(&report.gadget)? + "\n")?;
    }
    if let Some(path) = graph_output {
        let g = report.gadget.materialize(rp.mu(), DEFAULT_MATERIALIZE_LIMIT)?;
        let doc = to_value(&GraphDocument::from_graph(&g, &rp.params))?;
        fs::write(path, render_json(doc)?)?;
    }
    let ok = report.within_bound && report.trace_consistent;
    let mut out = to_value(&report)?;
    out["decay_constants"] = to_value(ctx.constants())?;
    Ok(Outcome::new(render_json(out)?, ok))
}

fn certificate_json<W: Verifiable>(cert: &ReductionCertificate<W>) -> Result<Value> {
    let float = cert.to_float();
    Ok(json!({
        "input": to_value(&GraphDocument::from_graph(&float.input.graph, &float.input.params))?,
        "output": to_value(&GraphDocument::from_graph(&float.output.graph, &float.output.params))?,
        "scale": float.scale,
        "scale_exact": cert.scale.exact_text(),
        "orientation": to_value(&cert.orientation)?,
        "verification": to_value(&cert.verification)?,
    }))
}

fn finish<W: Verifiable>(cert: ReductionCertificate<W>, en: &Enumerator, verify: bool) -> Result<(Value, bool)> {
    let cert = if verify { cert.verify(en)? } else { cert };
    let ok = !verify || cert.verification.passed();
    Ok((certificate_json(&cert)?, ok))
}

/// Instance from --input, or a random one built by `shape` with uniform field `mu`.
fn instance_or_random(
    cfg: &RunConfig,
    shape: impl FnOnce(&mut rand_chacha::ChaCha8Rng) -> random::GraphShape,
) -> Result<(FieldedGraph, SpinParams)> {
    match &cfg.input {
        Some(path) => read_instance(cfg, path),
        None => {
            let p = spin_params(cfg)?;
            let g = shape(&mut random::rng(cfg.seed)).with_field(p.mu)?;
            Ok((g, p))
        }
    }
}

fn cmd_reduce(cfg: &RunConfig, kind: ReduceKind, verify: bool, max_n: usize) -> Result<Outcome> {
    let en = Enumerator::with_limit(cfg.enum_limit);
    let rational = cfg.mode == Mode::Rational;
    let (value, ok) = match kind {
        ReduceKind::Selfloop => return cmd_selfloop(cfg, &en),
        ReduceKind::Bipartite => {
            let p = spin_params(cfg)?;
            let (g, left) = match &cfg.input {
                Some(path) => {
                    let (g, _) = read_instance(cfg, path)?;
                    let left = two_coloring(&g)?;
                    (g, left)
                }
                None => {
                    let (shape, left) = random::random_bipartite(&mut random::rng(cfg.seed), max_n, 5);
                    (shape.with_field(1.0)?, left)
                }
            };
            if rational {
                finish(bipartite_transform(&exact_graph(&g)?, &left, &exact_params(&p)?)?, &en, verify)?
            } else {
                finish(bipartite_transform(&g, &left, &p)?, &en, verify)?
            }
        }
        ReduceKind::Contract => {
            let (g, p) = instance_or_random(cfg, |r| random::random_graph(r, max_n, 5))?;
            if rational {
                finish(contract_degree_one(&exact_graph(&g)?, &exact_params(&p)?)?, &en, verify)?
            } else {
                finish(contract_degree_one(&g, &p)?, &en, verify)?
            }
        }
        ReduceKind::Ising => {
            let (g, p) = instance_or_random(cfg, |r| random::random_min_degree_two(r, max_n))?;
            if rational {
                finish(to_ising(&exact_graph(&g)?, &exact_params(&p)?)?, &en, verify)?
            } else {
                finish(to_ising(&g, &p)?, &en, verify)?
            }
        }
        ReduceKind::Pipeline => {
            let (g, p) = instance_or_random(cfg, |r| random::random_graph(r, max_n, 5))?;
            if rational {
                pipeline_json(contract_then_ising(&exact_graph(&g)?, &exact_params(&p)?)?, &en, verify)?
            } else {
                pipeline_json(contract_then_ising(&g, &p)?, &en, verify)?
            }
        }
    };
    Ok(Outcome::new(render_json(value)?, ok))
}

fn pipeline_json<W: Verifiable>(
    run: crate::reductions::Pipeline<W>,
    en: &Enumerator,
    verify: bool,
) -> Result<(Value, bool)> {
    let (contraction, ok1) = finish(run.contraction, en, verify)?;
    let (ising, ok2) = finish(run.ising, en, verify)?;
    let (composed, ok3) = finish(run.composed, en, verify)?;
    let value = json!({ "contraction": contraction, "ising": ising, "composed": composed });
    Ok((value, ok1 && ok2 && ok3))
}

fn cmd_selfloop(cfg: &RunConfig, en: &Enumerator) -> Result<Outcome> {
    let p = spin_params(cfg)?;
    let target = require(cfg.target, "target")?;
    let m = require(cfg.m, "m")?;
    let r = realize_field_selfloops(target, m, &p)?;
    let mut out = to_value(&r)?;
    out["target"] = json!(target);
    out["m"] = json!(m);
    out["within_tolerance"] = json!(r.log_residual.abs() <= 1.0 / m as f64);
    out["gadget"] = to_value(&GraphDocument::from_graph(&r.gadget, &p))?;
    let mut ok = r.log_residual.abs() <= 1.0 / m as f64;
    if r.gadget.len() <= en.limit {
        let brute = en.effective_field(&r.gadget, &p)?;
        let agrees = (brute - r.achieved).abs() <= 1e-9 * r.achieved;
        out["brute_force_field"] = json!(brute);
        out["brute_force_agrees"] = json!(agrees);
        ok &= agrees;
    }
    Ok(Outcome::new(render_json(out)?, ok))
}

fn cmd_thresholds(cfg: &RunConfig) -> Result<Outcome> {
    let p = SpinParams::new(require(cfg.beta, "beta")?, require(cfg.gamma, "gamma")?, cfg.mu.unwrap_or(1.0))?;
    let mut out = to_value(&hardness_thresholds(&p)?)?;
    round_floats(&mut out, THRESHOLD_SIGNIFICANT_DIGITS);
    Ok(Outcome::new(render_json(out)?, true))
}

fn sweep_star(cfg: &RunConfig, w_max: u64) -> Result<Outcome> {
    let rows = star_convergence(&spin_params(cfg)?, w_max)?;
    let text = render_csv(
        ["w", "field", "bound"],
        rows.iter().map(|r| [r.w.to_string(), num(r.field), num(r.bound)]).collect(),
    )?;
    Ok(Outcome::new(text, true))
}

fn sweep_tree(cfg: &RunConfig, t_max: u32) -> Result<Outcome> {
    let rows = tree_convergence(&recursion_params(cfg)?, t_max)?;
    let text = render_csv(
        ["t", "field", "log_ratio", "log_bound"],
        rows.iter()
            .map(|r| [r.t.to_string(), num(r.field), num(r.log_ratio), num(r.log_bound)])
            .collect(),
    )?;
    Ok(Outcome::new(text, true))
}

fn sweep_construct(cfg: &RunConfig, ell_max: u32, targets: usize) -> Result<Outcome> {
    let rp = recursion_params(cfg)?;
    let mu_star = decay_constants(&rp)?.mu_star;
    let ells: Vec<u32> = (0..=ell_max).collect();
    let s = sweep(&rp, &ells, &target_grid(mu_star, targets))?;
    let text = render_csv(
        ["ell", "target", "achieved", "log_error", "bound", "within_bound", "log_size"],
        s.rows
            .iter()
            .map(|r| {
                [
                    r.ell.to_string(),
                    num(r.target),
                    num(r.achieved),
                    num(r.log_error),
                    num(r.bound),
                    r.within_bound.to_string(),
                    num(r.log_size),
                ]
            })
            .collect(),
    )?;
    Ok(Outcome::new(text, s.all_within_bound()))
}

fn sweep_uniqueness(cfg: &RunConfig, points: usize) -> Result<Outcome> {
    let delta = require(cfg.delta_reg, "delta-reg")?;
    let top = (delta as f64 - 1.0) / (delta as f64 + 1.0);
    let mut rows = Vec::with_capacity(points);
    for j in 1..=points {
        let beta = top * j as f64 / (points + 1) as f64;
        rows.push([num(beta), num(uniqueness_threshold(beta, delta)?)]);
    }
    Ok(Outcome::new(render_csv(["beta", "mu_c"], rows)?, true))
}
