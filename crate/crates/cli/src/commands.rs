//! Subcommand implementations. Each prints one JSON document on stdout.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use kantorovich::certify::{default_eps_grid, DriftObjective};
use kantorovich::contraction::{
    dobrushin, fixed_point, fixed_point_certificate, invariant_measure, theorem1_bounds, FixedPointStatus,
};
use kantorovich::kernels::{AffineMap, BuiltModel, ModelSpec};
use kantorovich::measures::MeasureFile;
use kantorovich::semidistance::CostSpec;
use kantorovich::transport::kantorovich as optimal_transport;
use kantorovich::WeightFunction;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, MIN_HORIZON};
use crate::error::{CliError, CliResult};
use crate::pipeline::{
    self, alpha_rows, decay_rows, theorem_curve, write_artifacts, write_csv, ALPHA_HEADER, DECAY_HEADER,
};
use crate::specs::{parse_spec, read_json, RSweep, StartSpec, WeightSpec};

/// Kantorovich semi-distances, Dobrushin coefficients and drift/contraction
/// certificates for discretized Markov kernels.
///
/// SPEC arguments accept inline JSON, a path to a JSON file, or a bare tag
/// (`arcsine`, `phi0`, `phiV`, ...). Exit codes: 0 success, 2 configuration
/// error, 3 stage failure.
#[derive(Debug, Parser)]
#[command(name = "kantorovich", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal transport cost D_φ(μ1, μ2) between two measure files.
    Transport(TransportArgs),
    /// Drift and local contraction certificates over an r-sweep.
    Certify(CertifyArgs),
    /// Explicit contraction bounds from ε, r, ι and a tabulated α(r).
    Bounds(BoundsArgs),
    /// Dirac-pair Dobrushin coefficient β_{ψ,φ}(P).
    Beta(BetaArgs),
    /// Distance between two chains over n steps.
    Decay(DecayArgs),
    /// Invariant measure by power iteration.
    Invariant(InvariantArgs),
    /// Fixed point of a scalar map, optionally with a certificate.
    Fixpoint(FixpointArgs),
    /// Full pipeline from a JSON experiment config.
    Run(RunArgs),
    /// Model families with their default parameters.
    ListModels,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model SPEC, e.g. `arcsine` or '{"model":"half_line","n":100}'.
    #[arg(long)]
    pub model: String,
    /// Weight SPEC: `model` (default), or e.g. '{"kind":"polynomial","p":2}'.
    #[arg(long, visible_alias = "V", default_value = "model")]
    pub weight: String,
}

impl ModelArgs {
    fn load(&self) -> CliResult<(BuiltModel, WeightFunction)> {
        let spec: ModelSpec = parse_spec(&self.model, "model")?;
        let model = spec.build()?;
        let weight: WeightSpec = parse_spec(&self.weight, "kind")?;
        let v = weight.build(&model.grid, Some(&model.weight))?;
        Ok((model, v))
    }
}

#[derive(Debug, Args)]
pub struct TransportArgs {
    /// Measure file: {"points", "cell_volumes", "weights", "domain"?}.
    #[arg(long)]
    pub mu1: PathBuf,
    #[arg(long)]
    pub mu2: PathBuf,
    /// Cost SPEC, e.g. `phi0` or '{"label":"powerMetric","params":{"p":1}}'.
    #[arg(long)]
    pub cost: String,
    /// Weight SPEC for weighted costs; `model` is not available here.
    #[arg(long)]
    pub weight: Option<String>,
    /// Write the optimal plan as CSV (i, j, mass, cost).
    #[arg(long)]
    pub plan_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Levels on the rescaled weight, `lo:hi:points` (geometric).
    #[arg(long)]
    pub r_sweep: Option<RSweep>,
    /// Drift objective SPEC: `small_set`, '{"kind":"fixed","epsilon":0.5}', ...
    #[arg(long, default_value = "small_set")]
    pub objective: String,
    /// Write (r, alpha, minorization_alpha) as CSV.
    #[arg(long)]
    pub alpha_csv: Option<PathBuf>,
    /// Write the kernel matrix as dense CSV.
    #[arg(long)]
    pub kernel_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub r: f64,
    /// CSV with columns r and alpha. α at r is read from the smallest
    /// tabulated level at or above r.
    #[arg(long)]
    pub alpha_file: PathBuf,
    #[arg(long)]
    pub iota: f64,
    #[arg(long, default_value_t = 0.0)]
    pub r0: f64,
    /// ‖φ/φ_V‖ for the corrected bound.
    #[arg(long)]
    pub phi_ratio: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BetaArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub psi: String,
    #[arg(long)]
    pub phi: String,
}

#[derive(Debug, Args)]
pub struct DecayArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "phiV")]
    pub phi: String,
    /// Horizon.
    #[arg(long, default_value_t = 30)]
    pub n: usize,
    /// CSV with columns n, d_phi, d_V, theorem_bound.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// ι for the reference curve.
    #[arg(long, default_value_t = 0.5)]
    pub iota: f64,
    /// Start SPEC: '{"kind":"diracs","a":0.2,"b":0.8}' (default) or `random`.
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct InvariantArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FixpointArgs {
    /// Map SPEC: '{"kind":"affine","a":0.5,"b":1}' or '{"kind":"tanh","a":0.5,"b":0.3}'.
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub y0: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Also certify drift and local contraction of δ_{F(x)} on a grid.
    #[arg(long)]
    pub certify: bool,
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 10.0)]
    pub hi: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Rate of the weight ½exp(δ|x|).
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Default output directory of `run`.
pub const DEFAULT_OUT_DIR: &str = "kantorovich-run";

fn emit<T: Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Stage(e.to_string()))?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("<stdout>", e)),
        _ => Ok(()),
    }
}

pub fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Transport(a) => transport(a),
        Command::Certify(a) => certify(a),
        Command::Bounds(a) => bounds(a),
        Command::Beta(a) => beta(a),
        Command::Decay(a) => decay(a),
        Command::Invariant(a) => invariant(a),
        Command::Fixpoint(a) => fixpoint(a),
        Command::Run(a) => run(a),
        Command::ListModels => emit(&catalog()),
    }
}

#[derive(Serialize)]
struct PlanRow {
    i: usize,
    j: usize,
    mass: f64,
    cost: f64,
}

fn transport(a: TransportArgs) -> CliResult<()> {
    let (g1, mu1) = read_json::<MeasureFile>(&a.mu1)?.into_parts()?;
    let (g2, mu2) = read_json::<MeasureFile>(&a.mu2)?.into_parts()?;
    if g1.points() != g2.points() {
        return Err(CliError::Config("mu1 and mu2 are not on the same grid".into()));
    }
    let v = match &a.weight {
        Some(w) => Some(parse_spec::<WeightSpec>(w, "kind")?.build(&g1, None)?),
        None => None,
    };
    let cost = parse_spec::<CostSpec>(&a.cost, "label")?.build(&g1, v.as_ref())?;
    let res = optimal_transport(&mu1, &mu2, &cost)?;
    if let Some(path) = &a.plan_csv {
        let rows: Vec<PlanRow> =
            res.plan.entries.iter().map(|&(i, j, mass)| PlanRow { i, j, mass, cost: cost.evaluate(i, j) }).collect();
        write_csv(path, &["i", "j", "mass", "cost"], &rows)?;
    }
    emit(&serde_json::json!({ "value": res.value, "solver_tag": res.solver_tag }))
}

fn certify(a: CertifyArgs) -> CliResult<()> {
    let (model, v) = a.model.load()?;
    let objective: DriftObjective = parse_spec(&a.objective, "kind")?;
    let c = pipeline::certify(&model.kernel, &v, &default_eps_grid(), objective, a.r_sweep.as_ref())?;
    let section = c.section(&model.kernel)?;
    if let Some(path) = &a.alpha_csv {
        write_csv(path, &ALPHA_HEADER, &alpha_rows(&section))?;
    }
    if let Some(path) = &a.kernel_csv {
        write_dense(path, &model)?;
    }
    let any = section.levels.iter().any(|l| l.alpha > 0.0);
    emit(&serde_json::json!({ "model": model.tag, "certificates": section }))?;
    if any {
        Ok(())
    } else {
        Err(CliError::Stage("no level of the sweep admits local contraction".into()))
    }
}

fn write_dense(path: &Path, model: &BuiltModel) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for i in 0..model.kernel.len() {
        w.serialize(model.kernel.row(i))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Deserialize)]
struct AlphaEntry {
    r: f64,
    alpha: f64,
}

/// α at the smallest tabulated level ≥ r. Larger levels contain more
/// pairs, so this never overstates α(r) for a non-increasing profile.
pub fn alpha_at(table: &[(f64, f64)], r: f64) -> Option<f64> {
    table.iter().filter(|(rk, _)| *rk >= r).min_by(|a, b| a.0.total_cmp(&b.0)).map(|e| e.1)
}

fn bounds(a: BoundsArgs) -> CliResult<()> {
    let mut reader = csv::Reader::from_path(&a.alpha_file)?;
    let table: Vec<(f64, f64)> =
        reader.deserialize::<AlphaEntry>().map(|e| e.map(|e| (e.r, e.alpha))).collect::<Result<_, _>>()?;
    let alpha = alpha_at(&table, a.r)
        .ok_or_else(|| CliError::Config(format!("{} has no level at or above r = {}", a.alpha_file.display(), a.r)))?;
    let report = theorem1_bounds(a.eps, alpha, a.r, a.iota, a.r0, a.phi_ratio)?;
    emit(&report)
}

fn beta(a: BetaArgs) -> CliResult<()> {
    let (model, v) = a.model.load()?;
    let psi = parse_spec::<CostSpec>(&a.psi, "label")?.build(&model.grid, Some(&v))?;
    let phi = parse_spec::<CostSpec>(&a.phi, "label")?.build(&model.grid, Some(&v))?;
    emit(&dobrushin(&model.kernel, &psi, &phi)?)
}

fn decay(a: DecayArgs) -> CliResult<()> {
    if a.n < MIN_HORIZON {
        return Err(CliError::Config(format!("--n {} below {MIN_HORIZON}", a.n)));
    }
    let (model, v) = a.model.load()?;
    let start: StartSpec = match &a.start {
        Some(s) => parse_spec(s, "kind")?,
        None => StartSpec::default(),
    };
    start.validate()?;
    let phi = parse_spec::<CostSpec>(&a.phi, "label")?.build(&model.grid, Some(&v))?;
    let p = &model.kernel;
    let theorem = pipeline::certify(p, &v, &default_eps_grid(), DriftObjective::default(), None)
        .and_then(|c| pipeline::bounds(&c, pipeline::sweep(&c, a.iota)).map(|b| theorem_curve(&c, &b.best_re3, &v)));
    let (theorem, theorem_error) = match theorem {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let (mu1, mu2) = start.build(p.len(), a.seed);
    let curve = kantorovich::contraction::decay_curve(p, &mu1, &mu2, &phi, &v, a.n, theorem)?;
    if let Some(path) = &a.out {
        write_csv(path, &DECAY_HEADER, &decay_rows(&curve))?;
    }
    emit(&serde_json::json!({ "theorem": theorem, "theorem_error": theorem_error, "curve": curve }))
}

fn invariant(a: InvariantArgs) -> CliResult<()> {
    let (model, _) = a.model.load()?;
    let rep = invariant_measure(&model.kernel, a.tol, a.max_iter, a.seed)?;
    emit(&rep)?;
    if rep.converged {
        Ok(())
    } else {
        Err(CliError::Stage(format!("no convergence in {} iterations", a.max_iter)))
    }
}

fn fixpoint(a: FixpointArgs) -> CliResult<()> {
    let map: AffineMap = parse_spec(&a.f, "kind")?;
    let rep = fixed_point(&|x| map.apply(x), a.y0, a.tol, a.max_iter)?;
    let cert = if a.certify {
        Some(fixed_point_certificate(|x| map.apply(x), a.lo, a.hi, a.points, a.delta)?)
    } else {
        None
    };
    emit(&serde_json::json!({ "report": rep, "certificate": cert }))?;
    match rep.status {
        FixedPointStatus::Converged => Ok(()),
        s => Err(CliError::Stage(format!("fixed-point iteration status {s:?}"))),
    }
}

fn run(a: RunArgs) -> CliResult<()> {
    let cfg = ExperimentConfig::from_path(&a.config)?;
    let dir = a.out_dir.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let art = pipeline::run_experiment(&cfg);
    write_artifacts(&dir, &art)?;
    let failed = art.report.failed_stages();
    emit(&serde_json::json!({
        "out_dir": dir,
        "outputs": art.report.outputs,
        "failed_stages": failed,
    }))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Stage(format!("stages failed: {}", failed.join(", "))))
    }
}

#[derive(Debug, Serialize)]
pub struct CatalogEntry {
    pub tag: &'static str,
    /// Default parameters; any subset may be overridden in a model spec.
    pub defaults: ModelSpec,
}

pub fn catalog() -> Vec<CatalogEntry> {
    ModelSpec::catalog().into_iter().map(|m| CatalogEntry { tag: m.tag(), defaults: m }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_lookup_is_conservative() {
        let t = [(1.0, 0.5), (2.0, 0.4), (4.0, 0.2)];
        assert_eq!(alpha_at(&t, 1.5), Some(0.4));
        assert_eq!(alpha_at(&t, 2.0), Some(0.4));
        assert_eq!(alpha_at(&t, 5.0), None);
    }

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
