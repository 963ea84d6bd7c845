//! Configuration-driven scenario runner: parses a TOML scenario description,
//! evaluates the requested interference models over the sweep grid, and
//! writes CSV tables plus an optional SVG sweep chart.
//!
//! CSV dialect is pinned for reproducibility: comma separators, `.` decimal
//! point, one header row, LF line endings, UTF-8.

use crate::analytic::{
    eta_ratio, interference_aaecc, interference_aaecc_approx, interference_cbc,
    interference_cbc_approx, AnalyticError, InterferenceModel, InterferenceResult,
    NetworkScenario, DEFAULT_TOLERANCE,
};
use crate::array::{ArrayGeometry, BeamDirection};
use crate::channel::{DownlinkConfig, PathlossModel};
use crate::geometry::CircumradiusDistribution;
use crate::montecarlo::{
    sweep, BoundaryFallback, BoundaryPolicy, CircumradiusMode, SimulationPlan,
};
use crate::svg;
use crate::watts_to_dbm;
use serde::Deserialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    /// Unreadable or schema-invalid configuration; maps to exit code 2.
    #[error("config error: {0}")]
    Schema(String),
    /// Numerical non-convergence in one or more sweep points; maps to exit
    /// code 3. Successful rows are still written.
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Structured scenario document. Unknown keys are rejected; every section
/// defaults to the reference deployment (40x40 radar at 20 m scanning
/// (60, -10) degrees, 10x10 BS at 50 m, 100 km network, 1 W over 4 users,
/// UMa LoS pathloss at 5 GHz).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub fc_ghz: f64,
    pub radar: RadarSection,
    pub bs: BsSection,
    pub network: NetworkSection,
    pub downlink: DownlinkSection,
    pub pathloss: PathlossSection,
    pub distribution: DistributionSection,
    pub simulation: SimulationSection,
    pub output: OutputSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            fc_ghz: 5.0,
            radar: RadarSection::default(),
            bs: BsSection::default(),
            network: NetworkSection::default(),
            downlink: DownlinkSection::default(),
            pathloss: PathlossSection::default(),
            distribution: DistributionSection::default(),
            simulation: SimulationSection::default(),
            output: OutputSection::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadarSection {
    pub n_az: usize,
    pub n_el: usize,
    pub height_m: f64,
    pub scan_az_deg: f64,
    pub scan_el_deg: f64,
}

impl Default for RadarSection {
    fn default() -> Self {
        Self { n_az: 40, n_el: 40, height_m: 20.0, scan_az_deg: 60.0, scan_el_deg: -10.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BsSection {
    pub n_az: usize,
    pub n_el: usize,
    pub height_m: f64,
}

impl Default for BsSection {
    fn default() -> Self {
        Self { n_az: 10, n_el: 10, height_m: 50.0 }
    }
}

/// Sweep values: a plain list or an inclusive arithmetic range.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ListOrRange {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl ListOrRange {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        match self {
            ListOrRange::List(v) => Ok(v.clone()),
            ListOrRange::Range { start, stop, step } => {
                if !(*step > 0.0) || stop < start {
                    return Err(format!("bad range: start={start} stop={stop} step={step}"));
                }
                let mut out = Vec::new();
                let mut x = *start;
                while x <= stop + 1e-9 * step {
                    out.push(x);
                    x += step;
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkSection {
    pub lambda_bs_per_km2: Vec<f64>,
    pub r_exc_km: ListOrRange,
    /// `inf` is accepted for an unbounded network (analytic models only).
    pub r_net_km: f64,
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self {
            lambda_bs_per_km2: vec![0.01, 0.1],
            r_exc_km: ListOrRange::Range { start: 5.0, stop: 30.0, step: 5.0 },
            r_net_km: 100.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DownlinkSection {
    pub k_users: usize,
    pub p_bs_watts: f64,
}

impl Default for DownlinkSection {
    fn default() -> Self {
        Self { k_users: 4, p_bs_watts: 1.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathlossSection {
    /// "uma-los" or "reference-exponent".
    pub variant: String,
    /// Exponent for the reference-exponent variant (must exceed 2).
    pub alpha: f64,
    /// Reference pathloss at 1 m in dB (signed; a loss is negative) for the
    /// reference-exponent variant.
    pub pl_r0_db: f64,
}

impl Default for PathlossSection {
    fn default() -> Self {
        Self { variant: "uma-los".into(), alpha: 4.0, pl_r0_db: -46.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DistributionSection {
    pub k_max: usize,
    pub simplex_samples: usize,
    pub diff_step: f64,
}

impl Default for DistributionSection {
    fn default() -> Self {
        Self { k_max: 8, simplex_samples: 200_000, diff_step: 1e-4 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub n_realizations: usize,
    pub master_seed: u64,
    /// "true-voronoi", "iid-analytic", or "fixed-average-area".
    pub circumradius_mode: String,
    /// Boundary guard depth in units of `1/sqrt(pi*lambda)`.
    pub guard_factor: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            n_realizations: 200,
            master_seed: 1,
            circumradius_mode: "true-voronoi".into(),
            guard_factor: 3.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: String,
    pub formats: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: "out".into(), formats: vec!["csv".into(), "svg".into()] }
    }
}

/// CLI-level overrides applied on top of the parsed config.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub models: Option<Vec<InterferenceModel>>,
    pub no_mc: bool,
}

/// One output record of the sweep.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub model: InterferenceModel,
    pub lambda_bs_per_km2: f64,
    pub r_exc_km: f64,
    pub mean_dbm: f64,
    pub error_db: f64,
    pub elevation_parameter: f64,
    pub eta: Option<f64>,
    pub wall_time_s: f64,
}

#[derive(Debug)]
pub struct RunSummary {
    pub results_csv: PathBuf,
    pub eta_csv: PathBuf,
    pub svg: Option<PathBuf>,
    pub rows: usize,
    pub failures: usize,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| RunError::Schema(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let mut problems = Vec::new();
        if self.network.lambda_bs_per_km2.is_empty() {
            problems.push("network.lambda_bs_per_km2 must list at least one density".to_string());
        }
        if self.network.lambda_bs_per_km2.iter().any(|&l| !(l > 0.0)) {
            problems.push("BS densities must be positive".to_string());
        }
        match self.network.r_exc_km.values() {
            Ok(v) if v.is_empty() => problems.push("network.r_exc_km is empty".to_string()),
            Ok(v) => {
                if v.iter().any(|&r| !(r > 0.0)) {
                    problems.push("exclusion radii must be positive".to_string());
                }
                if v.iter().any(|&r| r >= self.network.r_net_km) {
                    problems.push("exclusion radii must stay below network.r_net_km".to_string());
                }
            }
            Err(e) => problems.push(e),
        }
        let alpha = match self.pathloss.variant.as_str() {
            "uma-los" => {
                if self.bs.height_m == self.radar.height_m {
                    problems.push("uma-los pathloss needs distinct BS and radar heights".into());
                }
                4.0
            }
            "reference-exponent" => self.pathloss.alpha,
            other => {
                problems.push(format!(
                    "unknown pathloss.variant '{other}' (expected 'uma-los' or 'reference-exponent')"
                ));
                f64::NAN
            }
        };
        if alpha.is_finite() && alpha <= 2.0 {
            if self.network.r_net_km.is_infinite() {
                problems.push(format!(
                    "pathloss exponent alpha = {alpha} with an infinite network: the radial \
                     interference integral diverges unless alpha > 2"
                ));
            } else {
                problems.push(format!(
                    "pathloss exponent alpha = {alpha} must exceed 2 (the closed-form \
                     approximations and the exclusion-radius inversion diverge otherwise)"
                ));
            }
        }
        if self.downlink.k_users == 0 {
            problems.push("downlink.k_users must be at least 1".into());
        }
        if !(self.downlink.p_bs_watts > 0.0) {
            problems.push("downlink.p_bs_watts must be positive".into());
        }
        if !(self.fc_ghz > 0.0) {
            problems.push("fc_ghz must be positive".into());
        }
        if self.distribution.k_max == 0 || self.distribution.simplex_samples == 0 {
            problems.push("distribution.k_max and distribution.simplex_samples must be >= 1".into());
        }
        if CircumradiusMode::parse(&self.simulation.circumradius_mode).is_none() {
            problems.push(format!(
                "unknown simulation.circumradius_mode '{}'",
                self.simulation.circumradius_mode
            ));
        }
        for f in &self.output.formats {
            if f != "csv" && f != "svg" {
                problems.push(format!("unknown output format '{f}'"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(RunError::Schema(problems.join("; ")))
        }
    }

    /// Scenario at one sweep point.
    pub fn scenario(&self, lambda_per_km2: f64, r_exc_km: f64) -> Result<NetworkScenario, RunError> {
        let bs = ArrayGeometry::new(self.bs.n_az, self.bs.n_el, self.bs.height_m)
            .map_err(|e| RunError::Schema(e.to_string()))?;
        let radar = ArrayGeometry::new(self.radar.n_az, self.radar.n_el, self.radar.height_m)
            .map_err(|e| RunError::Schema(e.to_string()))?;
        let scan = BeamDirection::from_degrees(self.radar.scan_az_deg, self.radar.scan_el_deg)
            .map_err(|e| RunError::Schema(e.to_string()))?;
        let pathloss = match self.pathloss.variant.as_str() {
            "uma-los" => PathlossModel::uma_los(self.fc_ghz, self.bs.height_m, self.radar.height_m),
            _ => PathlossModel::reference_exponent(
                10f64.powf(self.pathloss.pl_r0_db / 10.0),
                self.pathloss.alpha,
                self.fc_ghz,
                self.bs.height_m,
                self.radar.height_m,
            ),
        }
        .map_err(|e| RunError::Schema(e.to_string()))?;
        // the dominant cluster beam is a placeholder for network models: they
        // sweep the worst-case beam internally
        let dl = DownlinkConfig::new(
            self.downlink.k_users,
            self.downlink.p_bs_watts,
            BeamDirection::new(0.0, 0.0).unwrap(),
        )
        .map_err(|e| RunError::Schema(e.to_string()))?;
        Ok(NetworkScenario {
            bs_array: bs,
            radar_array: radar,
            radar_scan: scan,
            dl,
            pathloss,
            intensity_bs: lambda_per_km2 * 1e-6,
            r_exc_m: r_exc_km * 1e3,
            r_net_m: self.network.r_net_km * 1e3,
        })
    }

    fn distribution(&self, lambda_per_km2: f64) -> Result<CircumradiusDistribution, RunError> {
        CircumradiusDistribution::new(
            lambda_per_km2 * 1e-6,
            self.distribution.k_max,
            self.distribution.simplex_samples,
            self.distribution.diff_step,
        )
        .map_err(|e| RunError::Numeric(e.to_string()))
    }
}

impl CircumradiusMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "true-voronoi" => Some(Self::TrueVoronoi),
            "iid-analytic" => Some(Self::IidAnalytic),
            "fixed-average-area" => Some(Self::FixedAverageArea),
            _ => None,
        }
    }
}

const ANALYTIC_MODELS: [InterferenceModel; 4] = [
    InterferenceModel::Cbc,
    InterferenceModel::CbcApprox,
    InterferenceModel::Aaecc,
    InterferenceModel::AaeccApprox,
];

/// Loads, validates, and runs a scenario config, writing `results.csv`,
/// `eta_table.csv`, and optionally `fig_sweep.svg` into the output directory.
/// Idempotent given the seed. Numerical failures skip their row, land in
/// `failures.log`, and surface as [`RunError::Numeric`] after all other rows
/// are written.
pub fn run_config(path: &Path, opts: &RunOptions) -> Result<RunSummary, RunError> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::Schema(format!("cannot read {}: {e}", path.display())))?;
    let mut config = ScenarioConfig::from_toml(&text)?;
    if let Some(seed) = opts.seed {
        config.simulation.master_seed = seed;
    }
    config.validate()?;

    let out_dir = opts
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output.directory));
    fs::create_dir_all(&out_dir)?;

    let mut models: Vec<InterferenceModel> = match &opts.models {
        Some(m) => m.clone(),
        None => {
            let mut all = ANALYTIC_MODELS.to_vec();
            all.push(InterferenceModel::MonteCarlo);
            all
        }
    };
    if opts.no_mc {
        models.retain(|m| *m != InterferenceModel::MonteCarlo);
    }
    let mut seen = Vec::new();
    models.retain(|m| {
        let fresh = !seen.contains(m);
        seen.push(*m);
        fresh
    });
    if config.network.r_net_km.is_infinite() && models.contains(&InterferenceModel::MonteCarlo) {
        return Err(RunError::Schema(
            "the monte-carlo model needs a finite network.r_net_km; set a radius or pass --no-mc"
                .into(),
        ));
    }

    let lambdas = config.network.lambda_bs_per_km2.clone();
    let r_excs = config.network.r_exc_km.values().map_err(RunError::Schema)?;

    let mut rows: Vec<ResultRow> = Vec::new();
    let mut failures: Vec<String> = Vec::new();
    let mut eta_rows: Vec<(f64, f64)> = Vec::new();

    for &lambda in &lambdas {
        let scenario0 = config.scenario(lambda, r_excs[0])?;
        let elevation = scenario0.elevation_parameter();
        // the eta table is emitted on every run, so the distribution is
        // always needed
        let dist = config.distribution(lambda)?;
        let dist_ref = &dist;

        let eta = eta_ratio(&scenario0, dist_ref).map_err(|e| RunError::Numeric(e.to_string()))?;
        eta_rows.push((elevation, eta));

        for &r_exc in &r_excs {
            let scenario = config.scenario(lambda, r_exc)?;
            for model in models.iter().filter(|m| **m != InterferenceModel::MonteCarlo) {
                let started = Instant::now();
                let result: Result<InterferenceResult, AnalyticError> = match model {
                    InterferenceModel::Cbc => interference_cbc(&scenario, dist_ref, DEFAULT_TOLERANCE),
                    InterferenceModel::CbcApprox => interference_cbc_approx(&scenario, dist_ref),
                    InterferenceModel::Aaecc => interference_aaecc(&scenario, DEFAULT_TOLERANCE),
                    InterferenceModel::AaeccApprox => interference_aaecc_approx(&scenario),
                    InterferenceModel::MonteCarlo => unreachable!(),
                };
                match result {
                    Ok(res) => rows.push(make_row(
                        *model,
                        lambda,
                        r_exc,
                        res.mean_watts,
                        res.error_estimate,
                        elevation,
                        (*model == InterferenceModel::CbcApprox
                            || *model == InterferenceModel::AaeccApprox)
                            .then_some(eta),
                        started.elapsed().as_secs_f64(),
                    )),
                    Err(e) => failures.push(format!(
                        "{} lambda={lambda} r_exc_km={r_exc}: {e}",
                        model.name()
                    )),
                }
            }
        }

        if models.contains(&InterferenceModel::MonteCarlo) {
            let mode = CircumradiusMode::parse(&config.simulation.circumradius_mode)
                .expect("mode validated");
            let plan = SimulationPlan {
                scenario: scenario0,
                n_realizations: config.simulation.n_realizations,
                master_seed: config.simulation.master_seed,
                circumradius_mode: mode,
                boundary_policy: BoundaryPolicy {
                    guard_factor: config.simulation.guard_factor,
                    fallback: BoundaryFallback::AnalyticDraw,
                },
            };
            let started = Instant::now();
            let r_exc_m: Vec<f64> = r_excs.iter().map(|r| r * 1e3).collect();
            match sweep(&plan, &r_exc_m, &[lambda * 1e-6]) {
                Ok(table) => {
                    let wall = started.elapsed().as_secs_f64() / table.rows.len() as f64;
                    for row in table.rows {
                        // a zero estimate has no decibel representation; keep
                        // the dBm column finite by routing it to the log
                        if row.estimate.mean_watts <= 0.0 {
                            failures.push(format!(
                                "monte-carlo lambda={lambda} r_exc_km={}: zero-mean estimate \
                                 (no transmitters observed)",
                                row.r_exc_m / 1e3
                            ));
                            continue;
                        }
                        rows.push(make_row(
                            InterferenceModel::MonteCarlo,
                            lambda,
                            row.r_exc_m / 1e3,
                            row.estimate.mean_watts,
                            1.96 * row.estimate.std_error_watts,
                            elevation,
                            None,
                            wall,
                        ));
                    }
                }
                Err(e) => failures.push(format!("monte-carlo lambda={lambda}: {e}")),
            }
        }
    }

    // deterministic row order: model, then density, then radius
    rows.sort_by(|a, b| {
        a.model
            .name()
            .cmp(b.model.name())
            .then(a.lambda_bs_per_km2.total_cmp(&b.lambda_bs_per_km2))
            .then(a.r_exc_km.total_cmp(&b.r_exc_km))
    });

    let results_csv = out_dir.join("results.csv");
    fs::write(&results_csv, render_results_csv(&rows))?;

    eta_rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let eta_csv = out_dir.join("eta_table.csv");
    fs::write(&eta_csv, render_eta_csv(&eta_rows))?;

    let svg_path = if config.output.formats.iter().any(|f| f == "svg") {
        let p = out_dir.join("fig_sweep.svg");
        fs::write(&p, svg::sweep_chart(&rows))?;
        Some(p)
    } else {
        None
    };

    if !failures.is_empty() {
        fs::write(out_dir.join("failures.log"), failures.join("\n") + "\n")?;
        return Err(RunError::Numeric(format!(
            "{} sweep point(s) failed; see failures.log",
            failures.len()
        )));
    }

    Ok(RunSummary {
        results_csv,
        eta_csv,
        svg: svg_path,
        rows: rows.len(),
        failures: failures.len(),
    })
}

#[allow(clippy::too_many_arguments)]
fn make_row(
    model: InterferenceModel,
    lambda: f64,
    r_exc_km: f64,
    mean_watts: f64,
    error_watts: f64,
    elevation: f64,
    eta: Option<f64>,
    wall_time_s: f64,
) -> ResultRow {
    let error_db = if mean_watts > 0.0 {
        10.0 * (1.0 + error_watts / mean_watts).log10()
    } else {
        0.0
    };
    ResultRow {
        model,
        lambda_bs_per_km2: lambda,
        r_exc_km,
        mean_dbm: watts_to_dbm(mean_watts),
        error_db,
        elevation_parameter: elevation,
        eta,
        wall_time_s,
    }
}

/// Renders the results table; all numeric columns use fixed six-decimal
/// formatting except the wall clock (three decimals, excluded from
/// reproducibility comparisons).
pub fn render_results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(128 + rows.len() * 96);
    out.push_str(
        "model,lambda_bs_per_km2,r_exc_km,mean_dbm,error_db,elevation_parameter,eta,wall_time_s\n",
    );
    for r in rows {
        let eta = r.eta.map(|e| format!("{e:.6}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{},{:.3}",
            r.model.name(),
            r.lambda_bs_per_km2,
            r.r_exc_km,
            r.mean_dbm,
            r.error_db,
            r.elevation_parameter,
            eta,
            r.wall_time_s
        );
    }
    out
}

/// Renders the worst-case to nominal ratio table, ascending in the elevation
/// parameter.
pub fn render_eta_csv(rows: &[(f64, f64)]) -> String {
    let mut out = String::from("elevation_parameter,eta\n");
    for (p, eta) in rows {
        let _ = writeln!(out, "{p:.6},{eta:.6}");
    }
    out
}

/// Computes the `(elevation parameter, eta)` table for a config without
/// running the interference sweep.
pub fn emit_eta_table(config: &ScenarioConfig) -> Result<String, RunError> {
    config.validate()?;
    let r_excs = config.network.r_exc_km.values().map_err(RunError::Schema)?;
    let mut rows = Vec::new();
    for &lambda in &config.network.lambda_bs_per_km2 {
        let scenario = config.scenario(lambda, r_excs[0])?;
        let dist = config.distribution(lambda)?;
        let eta = eta_ratio(&scenario, &dist).map_err(|e| RunError::Numeric(e.to_string()))?;
        rows.push((scenario.elevation_parameter(), eta));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(render_eta_csv(&rows))
}

/// Exit code mapping used by the CLI: 2 for schema problems, 3 for numerical
/// failures.
pub fn exit_code(err: &RunError) -> i32 {
    match err {
        RunError::Schema(_) => 2,
        RunError::Numeric(_) => 3,
        RunError::Io(_) => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config_toml() -> String {
        r#"
fc_ghz = 5.0

[network]
lambda_bs_per_km2 = [0.1]
r_exc_km = [5.0, 10.0]
r_net_km = 100.0

[distribution]
simplex_samples = 20000

[simulation]
n_realizations = 8
master_seed = 7
"#
        .to_string()
    }

    #[test]
    fn default_config_validates() {
        let c = ScenarioConfig::default();
        c.validate().unwrap();
        let v = c.network.r_exc_km.values().unwrap();
        assert_eq!(v, vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0]);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ScenarioConfig::from_toml("nonsense_key = 1").unwrap_err();
        assert!(matches!(err, RunError::Schema(_)));
        let err =
            ScenarioConfig::from_toml("[radar]\nn_az = 4\nbogus = 2").unwrap_err();
        assert!(matches!(err, RunError::Schema(_)));
    }

    #[test]
    fn alpha_two_with_infinite_network_is_schema_error() {
        let text = r#"
[network]
lambda_bs_per_km2 = [0.1]
r_exc_km = [5.0]
r_net_km = inf

[pathloss]
variant = "reference-exponent"
alpha = 2.0
pl_r0_db = -46.0
"#;
        let c = ScenarioConfig::from_toml(text).unwrap();
        let err = c.validate().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("diverges") && msg.contains("alpha"), "{msg}");
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn empty_lambda_list_is_schema_error() {
        let text = "[network]\nlambda_bs_per_km2 = []\nr_exc_km = [5.0]\nr_net_km = 100.0";
        let c = ScenarioConfig::from_toml(text).unwrap();
        let err = c.validate().unwrap_err();
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn range_expands_inclusively() {
        let r = ListOrRange::Range { start: 5.0, stop: 30.0, step: 5.0 };
        assert_eq!(r.values().unwrap().len(), 6);
        let bad = ListOrRange::Range { start: 5.0, stop: 1.0, step: 5.0 };
        assert!(bad.values().is_err());
    }

    #[test]
    fn csv_rendering_is_pinned() {
        let rows = vec![ResultRow {
            model: InterferenceModel::Cbc,
            lambda_bs_per_km2: 0.1,
            r_exc_km: 5.0,
            mean_dbm: -87.654321,
            error_db: 0.01,
            elevation_parameter: 0.028,
            eta: None,
            wall_time_s: 0.5,
        }];
        let text = render_results_csv(&rows);
        assert!(text.starts_with("model,lambda_bs_per_km2,"));
        assert!(text.contains("cbc,0.100000,5.000000,-87.654321,0.010000,0.028000,,0.500"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn end_to_end_run_writes_artifacts() {
        let dir = std::env::temp_dir().join(format!("exzone-test-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        let config_path = dir.join("scenario.toml");
        fs::write(&config_path, small_config_toml()).unwrap();

        let opts = RunOptions {
            out_dir: Some(dir.join("out")),
            seed: None,
            models: None,
            no_mc: false,
        };
        let summary = run_config(&config_path, &opts).unwrap();
        assert_eq!(summary.failures, 0);
        let text = fs::read_to_string(&summary.results_csv).unwrap();
        for model in ["cbc", "cbc-approx", "aaecc", "aaecc-approx", "monte-carlo"] {
            assert!(text.contains(&format!("\n{model},")), "missing rows for {model}");
        }
        // 5 models x 1 lambda x 2 radii
        assert_eq!(text.lines().count(), 1 + 10);
        let eta_text = fs::read_to_string(&summary.eta_csv).unwrap();
        assert!(eta_text.starts_with("elevation_parameter,eta\n"));
        assert_eq!(eta_text.lines().count(), 2);
        assert!(summary.svg.is_some());
        let svg_text = fs::read_to_string(summary.svg.unwrap()).unwrap();
        assert!(svg_text.starts_with("<svg"));
        assert!(svg_text.contains("polyline"));

        // determinism: a second run reproduces every column except wall time
        let opts2 = RunOptions { out_dir: Some(dir.join("out2")), ..opts.clone() };
        let summary2 = run_config(&config_path, &opts2).unwrap();
        let strip = |t: &str| -> String {
            t.lines()
                .map(|l| l.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap_or_default())
                .collect::<Vec<_>>()
                .join("\n")
        };
        let a = strip(&text);
        let b = strip(&fs::read_to_string(&summary2.results_csv).unwrap());
        assert_eq!(a, b);
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn eta_table_emitter_sorted_and_monotone() {
        let mut c = ScenarioConfig::default();
        c.network.lambda_bs_per_km2 = vec![0.1, 0.01];
        c.distribution.simplex_samples = 20_000;
        let csv = emit_eta_table(&c).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "elevation_parameter,eta");
        assert_eq!(lines.len(), 3);
        let parse = |line: &str| -> (f64, f64) {
            let mut it = line.split(',');
            (it.next().unwrap().parse().unwrap(), it.next().unwrap().parse().unwrap())
        };
        let (p1, eta1) = parse(lines[1]);
        let (p2, eta2) = parse(lines[2]);
        assert!(p1 < p2, "rows must ascend in the elevation parameter");
        assert!(eta2 >= eta1, "eta must be non-decreasing in the elevation parameter");
        assert!(eta1 >= 1.0);
    }

    #[test]
    fn monte_carlo_on_infinite_network_is_schema_error() {
        let dir = std::env::temp_dir().join(format!("exzone-infmc-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        let config_path = dir.join("scenario.toml");
        fs::write(
            &config_path,
            "[network]\nlambda_bs_per_km2 = [0.1]\nr_exc_km = [5.0]\nr_net_km = inf\n",
        )
        .unwrap();
        let err = run_config(
            &config_path,
            &RunOptions { out_dir: Some(dir.join("out")), ..Default::default() },
        )
        .unwrap_err();
        assert_eq!(exit_code(&err), 2, "{err}");
        assert!(err.to_string().contains("monte-carlo"), "{err}");
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn numeric_failure_exits_with_code_three() {
        // one series term cannot represent the circumradius density; the
        // distribution build fails and surfaces as a numerical error
        let dir = std::env::temp_dir().join(format!("exzone-numfail-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        let config_path = dir.join("scenario.toml");
        fs::write(
            &config_path,
            "[network]\nlambda_bs_per_km2 = [0.1]\nr_exc_km = [5.0]\nr_net_km = 100.0\n\n[distribution]\nk_max = 1\nsimplex_samples = 1000\n",
        )
        .unwrap();
        let err = run_config(
            &config_path,
            &RunOptions { out_dir: Some(dir.join("out")), ..Default::default() },
        )
        .unwrap_err();
        assert_eq!(exit_code(&err), 3, "{err}");
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn single_lambda_gives_single_valid_eta_row() {
        let mut c = ScenarioConfig::default();
        c.network.lambda_bs_per_km2 = vec![0.05];
        c.distribution.simplex_samples = 20_000;
        let csv = emit_eta_table(&c).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.ends_with('\n'));
    }
}
