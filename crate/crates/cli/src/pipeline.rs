//! The staged experiment: build → certify → bounds → beta → decay → report.

use std::path::Path;
use std::time::Instant;

use kantorovich::certify::{
    certify_drift_with, contraction_profile, minorization, ContractionProfile, DriftCertificate, DriftObjective,
    LocalContractionCertificate,
};
use kantorovich::contraction::{
    bound_sweep, decay_curve, dobrushin, sweep_levels, BoundReport, BoundSweep, ContractionEstimate, DecayCurve,
    TheoremCurve,
};
use kantorovich::measures::rescale_weight;
use kantorovich::semidistance::{discrete_metric, rho_family};
use kantorovich::{Error as CoreError, KernelMatrix, Result as CoreResult, WeightFunction};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::specs::RSweep;

/// Outcome of one stage. Every stage appears in the report in one of
/// these three forms.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Stage<T> {
    Ok { wall_ms: f64, result: T },
    Error { wall_ms: f64, message: String },
    Skipped { reason: String },
}

impl<T> Stage<T> {
    pub fn result(&self) -> Option<&T> {
        match self {
            Stage::Ok { result, .. } => Some(result),
            _ => None,
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, Stage::Error { .. })
    }

    fn skipped(after: &str) -> Self {
        Stage::Skipped { reason: format!("requires the {after} stage") }
    }
}

fn timed<T, X>(f: impl FnOnce() -> CoreResult<(T, X)>) -> (Stage<T>, Option<X>) {
    let start = Instant::now();
    let out = f();
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    match out {
        Ok((result, extra)) => (Stage::Ok { wall_ms, result }, Some(extra)),
        Err(e) => (Stage::Error { wall_ms, message: e.to_string() }, None),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BuildSection {
    pub tag: String,
    pub n_points: usize,
    pub weight_label: String,
    pub predicted_epsilon: Option<f64>,
    pub step: Option<f64>,
    pub clamped_fraction: f64,
}

/// Drift certificate, the rescaled weight V̄ = 1/2 + sV with s = ε/(2c),
/// and the local total-variation contraction profile on V̄.
pub struct Certified {
    pub drift: DriftCertificate,
    pub c_used: f64,
    pub scale: f64,
    pub v_bar: WeightFunction,
    pub profile: ContractionProfile,
    pub levels: Vec<f64>,
}

/// Number of levels in the default sweep.
pub const DEFAULT_SWEEP_POINTS: usize = 25;

pub fn certify(
    p: &KernelMatrix,
    v: &WeightFunction,
    eps_grid: &[f64],
    objective: DriftObjective,
    sweep: Option<&RSweep>,
) -> CoreResult<Certified> {
    let drift = certify_drift_with(p, v, eps_grid, objective)?;
    let c_used = drift.c.max(1.0);
    let v_bar = rescale_weight(v, drift.epsilon, c_used)?;
    let profile = contraction_profile(p, &discrete_metric(p.len()), &v_bar)?;
    let levels = match sweep {
        Some(s) => s.levels(),
        None => sweep_levels(1.0 / (1.0 - drift.epsilon), profile.r0(), profile.max_level(), DEFAULT_SWEEP_POINTS),
    };
    Ok(Certified { scale: drift.epsilon / (2.0 * c_used), drift, c_used, v_bar, profile, levels })
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelRow {
    pub r: f64,
    /// Local total-variation contraction α(r); zero when none.
    pub alpha: f64,
    /// Mass of the common component on {V̄ ≤ r}; empty when the level is empty.
    pub minorization_alpha: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifySection {
    pub drift: DriftCertificate,
    pub c_used: f64,
    pub scale: f64,
    pub v_bar_label: String,
    pub r0: f64,
    pub max_level: f64,
    pub levels: Vec<LevelRow>,
}

impl Certified {
    pub fn section(&self, p: &KernelMatrix) -> CoreResult<CertifySection> {
        let levels = self
            .levels
            .iter()
            .map(|&r| {
                let minor = match minorization(p, &self.v_bar, r) {
                    Ok(m) => Some(m.alpha),
                    Err(CoreError::EmptyLevel(_)) => None,
                    Err(e) => return Err(e),
                };
                Ok(LevelRow { r, alpha: self.profile.alpha(r).unwrap_or(0.0), minorization_alpha: minor })
            })
            .collect::<CoreResult<Vec<_>>>()?;
        Ok(CertifySection {
            drift: self.drift.clone(),
            c_used: self.c_used,
            scale: self.scale,
            v_bar_label: self.v_bar.label().to_string(),
            r0: self.profile.r0(),
            max_level: self.profile.max_level(),
            levels,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsSection {
    pub sweep: BoundSweep,
    /// Level with the smallest bound on β_{φ_ρ}.
    pub best_re3: BoundReport,
    pub best_reupsilon: BoundReport,
    pub local: LocalContractionCertificate,
}

pub fn sweep(c: &Certified, iota: f64) -> BoundSweep {
    bound_sweep(c.drift.epsilon, |r| c.profile.alpha(r), c.profile.r0(), iota, &c.levels)
}

/// Best levels of a sweep; an error when no level admits the bounds.
pub fn bounds(c: &Certified, sweep: BoundSweep) -> CoreResult<BoundsSection> {
    let (Some(k3), Some(ku)) = (sweep.best_re3, sweep.best_reupsilon) else {
        let first = sweep.entries.first().and_then(|e| e.error.clone()).unwrap_or_else(|| "empty r-sweep".into());
        return Err(CoreError::OutOfRange(format!("no level in the r-sweep admits the bounds ({first})")));
    };
    let best_re3 = sweep.entries[k3].report.clone().expect("indexed entry has a report");
    let best_reupsilon = sweep.entries[ku].report.clone().expect("indexed entry has a report");
    let local = c.profile.certificate(best_re3.r)?;
    Ok(BoundsSection { sweep, best_re3, best_reupsilon, local })
}

/// The bound ‖μ1Pⁿ − μ2Pⁿ‖_V ≤ C λⁿ ‖μ1 − μ2‖_V implied by β_{φ_ρ} ≤ λ
/// on V̄_ρ = 1/2 + ρV̄ = (1+ρ)/2 + ρsV, using ρsV ≤ V̄_ρ ≤ ((1+ρ)/(2 V_min) + ρs)V.
pub fn theorem_curve(c: &Certified, b: &BoundReport, v: &WeightFunction) -> TheoremCurve {
    let v_min = v.values().iter().copied().fold(f64::INFINITY, f64::min);
    let rs = b.rho * c.scale;
    TheoremCurve { lambda: b.bound_re3, prefactor: ((1.0 + b.rho) / (2.0 * v_min) + rs) / rs }
}

/// β_{φ_ρ}(P) on V̄ at the best level, next to its bound.
#[derive(Debug, Clone, Serialize)]
pub struct PhiRhoCheck {
    pub r: f64,
    pub rho: f64,
    pub beta: f64,
    pub bound_re3: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaSection {
    pub pairs: Vec<ContractionEstimate>,
    pub phi_rho: Option<PhiRhoCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecaySection {
    pub mu1_support: Vec<usize>,
    pub mu2_support: Vec<usize>,
    pub theorem: Option<TheoremCurve>,
    pub curve: DecayCurve,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub toolkit_version: String,
    pub config: ExperimentConfig,
    pub build: Stage<BuildSection>,
    pub certify: Stage<CertifySection>,
    pub bounds: Stage<BoundsSection>,
    pub beta: Stage<BetaSection>,
    pub decay: Stage<DecaySection>,
    pub outputs: Vec<String>,
}

impl RunReport {
    pub fn failed_stages(&self) -> Vec<&'static str> {
        let flags = [
            ("build", self.build.is_error()),
            ("certify", self.certify.is_error()),
            ("bounds", self.bounds.is_error()),
            ("beta", self.beta.is_error()),
            ("decay", self.decay.is_error()),
        ];
        flags.iter().filter(|f| f.1).map(|f| f.0).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaRow {
    pub r: f64,
    pub alpha: f64,
    pub minorization_alpha: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsRow {
    pub r: f64,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    pub bound_re3: Option<f64>,
    pub bound_reupsilon: Option<f64>,
    pub bound_pregibbs: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRow {
    pub n: usize,
    pub d_phi: f64,
    #[serde(rename = "d_V")]
    pub d_v: f64,
    pub theorem_bound: Option<f64>,
}

pub const ALPHA_HEADER: [&str; 3] = ["r", "alpha", "minorization_alpha"];
pub const BOUNDS_HEADER: [&str; 7] = ["r", "alpha", "delta", "rho", "bound_re3", "bound_reupsilon", "bound_pregibbs"];
pub const DECAY_HEADER: [&str; 4] = ["n", "d_phi", "d_V", "theorem_bound"];

pub fn decay_rows(curve: &DecayCurve) -> Vec<DecayRow> {
    curve
        .samples
        .iter()
        .map(|s| DecayRow { n: s.n, d_phi: s.d_phi, d_v: s.d_v, theorem_bound: s.theorem_bound })
        .collect()
}

pub fn alpha_rows(section: &CertifySection) -> Vec<AlphaRow> {
    section
        .levels
        .iter()
        .map(|l| AlphaRow { r: l.r, alpha: l.alpha, minorization_alpha: l.minorization_alpha })
        .collect()
}

pub fn bounds_rows(sweep: &BoundSweep) -> Vec<BoundsRow> {
    sweep
        .entries
        .iter()
        .map(|e| {
            let b = e.report.as_ref();
            BoundsRow {
                r: e.r,
                alpha: b.map(|b| b.alpha),
                delta: b.map(|b| b.delta),
                rho: b.map(|b| b.rho),
                bound_re3: b.map(|b| b.bound_re3),
                bound_reupsilon: b.map(|b| b.bound_reupsilon),
                bound_pregibbs: b.map(|b| b.bound_pregibbs),
            }
        })
        .collect()
}

/// Report plus the tables written next to it.
pub struct RunArtifacts {
    pub report: RunReport,
    pub alpha: Vec<AlphaRow>,
    pub bounds: Vec<BoundsRow>,
    pub decay: Vec<DecayRow>,
}

pub const REPORT_FILE: &str = "report.json";
pub const ALPHA_FILE: &str = "alpha.csv";
pub const BOUNDS_FILE: &str = "bounds.csv";
pub const DECAY_FILE: &str = "decay.csv";

pub fn run_experiment(cfg: &ExperimentConfig) -> RunArtifacts {
    let (build, model) = timed(|| {
        let model = cfg.model.build()?;
        let v = cfg.weight.build(&model.grid, Some(&model.weight)).map_err(|e| match e {
            CliError::Config(m) => CoreError::Config(m),
            other => CoreError::Config(other.to_string()),
        })?;
        let section = BuildSection {
            tag: model.tag.clone(),
            n_points: model.kernel.len(),
            weight_label: v.label().to_string(),
            predicted_epsilon: model.predicted_epsilon,
            step: model.step,
            clamped_fraction: model.kernel.diagnostics().clamped_fraction,
        };
        Ok((section, (model, v)))
    });
    let mut report = RunReport {
        toolkit_version: kantorovich::VERSION.to_string(),
        config: cfg.clone(),
        build,
        certify: Stage::skipped("build"),
        bounds: Stage::skipped("certify"),
        beta: Stage::skipped("build"),
        decay: Stage::skipped("build"),
        outputs: vec![REPORT_FILE.into(), ALPHA_FILE.into(), BOUNDS_FILE.into(), DECAY_FILE.into()],
    };
    let mut art = RunArtifacts { report: report.clone(), alpha: vec![], bounds: vec![], decay: vec![] };
    let Some((model, v)) = model else {
        art.report = report;
        return art;
    };
    let p = &model.kernel;

    let (certify_stage, certified) = timed(|| {
        let c = certify(p, &v, &cfg.eps_grid, cfg.drift_objective, cfg.r_sweep.as_ref())?;
        Ok((c.section(p)?, c))
    });
    report.certify = certify_stage;
    if let Some(section) = report.certify.result() {
        art.alpha = alpha_rows(section);
    }

    let mut bounds_found = None;
    if let Some(c) = &certified {
        let rows = &mut art.bounds;
        let (stage, found) = timed(|| {
            let s = sweep(c, cfg.iota);
            *rows = bounds_rows(&s);
            let b = bounds(c, s)?;
            Ok((b.clone(), b))
        });
        report.bounds = stage;
        bounds_found = found;
    }

    report.beta = timed(|| {
        let pairs = cfg
            .costs
            .iter()
            .map(|pair| dobrushin(p, &pair.psi.build(&model.grid, Some(&v))?, &pair.phi.build(&model.grid, Some(&v))?))
            .collect::<CoreResult<Vec<_>>>()?;
        let phi_rho = match (&certified, &bounds_found) {
            (Some(c), Some(b)) => {
                let fam = rho_family(&c.v_bar, b.best_re3.rho)?;
                let beta = dobrushin(p, &fam.phi_rho, &fam.phi_rho)?.value;
                let bound = b.best_re3.bound_re3;
                Some(PhiRhoCheck { r: b.best_re3.r, rho: b.best_re3.rho, beta, bound_re3: bound, holds: beta <= bound + 1e-6 })
            }
            _ => None,
        };
        Ok((BetaSection { pairs, phi_rho }, ()))
    })
    .0;

    report.decay = timed(|| {
        let n = p.len();
        let (mu1, mu2) = cfg.start.build(n, cfg.seed);
        let phi = cfg.decay_cost.build(&model.grid, Some(&v))?;
        let theorem = match (&certified, &bounds_found) {
            (Some(c), Some(b)) => Some(theorem_curve(c, &b.best_re3, &v)),
            _ => None,
        };
        let curve = decay_curve(p, &mu1, &mu2, &phi, &v, cfg.horizon, theorem)?;
        Ok((DecaySection { mu1_support: mu1.support(), mu2_support: mu2.support(), theorem, curve }, ()))
    })
    .0;
    if let Some(d) = report.decay.result() {
        art.decay = decay_rows(&d.curve);
    }
    art.report = report;
    art
}

/// Writes `rows` under `header`. Floats use the shortest round-trip
/// representation, so equal inputs give byte-identical files.
pub fn write_csv<S: Serialize>(path: &Path, header: &[&str], rows: &[S]) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_artifacts(dir: &Path, art: &RunArtifacts) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_csv(&dir.join(ALPHA_FILE), &ALPHA_HEADER, &art.alpha)?;
    write_csv(&dir.join(BOUNDS_FILE), &BOUNDS_HEADER, &art.bounds)?;
    write_csv(&dir.join(DECAY_FILE), &DECAY_HEADER, &art.decay)?;
    let path = dir.join(REPORT_FILE);
    let json = serde_json::to_string_pretty(&art.report).map_err(|e| CliError::Stage(e.to_string()))?;
    std::fs::write(&path, json + "\n").map_err(|e| CliError::io(path, e))
}
