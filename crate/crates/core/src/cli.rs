//! Command-line driver: reads a JSON run configuration, runs one pipeline and
//! writes CSV/JSON artifacts into the output directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bloch::{bloch_to_density, BlochVector, DensityMatrix};
use crate::dephasing::{
    analytic_fields, format_f64, synthesize, verify_equivalence, DecoherenceTrace,
    EquivalenceReport, FieldPair, VerifyOptions,
};
use crate::depolarize::{
    analytic_nz, clifford_depolarize, find_nz_root, haar_isotropy_check, haar_mc_depolarize,
    CliffordTable, DepolarizeResult, IsotropyReport, UnitarySource,
};
use crate::error::{validation, Error, Result};
use crate::models::ModelSpec;
use crate::multiqubit::{check_transitivity, gamma_matrix, BellBasisSpec, TransitivityReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SINGULARITY: i32 = 2;
pub const EXIT_VALIDITY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "rcsim",
    version,
    about = "Classical random-field simulation of qubit decoherence"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize random fields for a dephasing model and check equivalence.
    Synthesize(CommonArgs),
    /// Haar or Clifford depolarization sweep.
    Depolarize(CommonArgs),
    /// Bell-basis multiqubit dephasing model.
    Multiqubit(CommonArgs),
    /// Check a tabulated decoherence trace against the classical model.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Existing fields CSV to check instead of synthesizing new fields.
        #[arg(long)]
        fields: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t_max: f64,
    pub points: usize,
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        if self.points < 3 {
            return Err(validation("grid needs at least 3 points"));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(validation("t_max must be positive"));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.points)
            .map(|k| self.t_max * k as f64 / (self.points - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    #[default]
    Angles,
    Fields,
}

/// Contents of the `--config` file. Command-line flags override the
/// corresponding fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Model document, inline or as a path relative to the config file.
    #[serde(default)]
    pub model: Option<Value>,
    #[serde(default)]
    pub grid: Option<Grid>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub route: Route,
    /// Initial Bloch vector for the dephasing pipelines.
    #[serde(default)]
    pub initial_bloch: Option<[f64; 3]>,
    /// Hilbert-space dimension for `depolarize`.
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub mode: UnitarySource,
    /// Time at which the isotropy check runs.
    #[serde(default)]
    pub isotropy_t: Option<f64>,
    #[serde(skip)]
    pub base_dir: PathBuf,
    #[serde(skip, default = "fallback_grid")]
    pub default_grid: Grid,
}

fn fallback_grid() -> Grid {
    Grid {
        t_max: 1.0,
        points: 3,
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn apply(&mut self, args: &CommonArgs, default_grid: Grid) {
        if let Some(s) = args.seed {
            self.seed = s;
        }
        if let Some(n) = args.samples {
            self.samples = Some(n);
        }
        self.default_grid = default_grid;
        if self.grid.is_none() && args.grid_points.is_none() && args.t_max.is_none() {
            return;
        }
        let mut grid = self.grid.unwrap_or(default_grid);
        if let Some(p) = args.grid_points {
            grid.points = p;
        }
        if let Some(t) = args.t_max {
            grid.t_max = t;
        }
        self.grid = Some(grid);
    }

    /// The configured grid, or the command's default.
    pub fn grid(&self) -> Result<Grid> {
        let g = self.grid.unwrap_or(self.default_grid);
        g.validate()?;
        Ok(g)
    }

    pub fn samples(&self, default: usize) -> Result<usize> {
        let n = self.samples.unwrap_or(default);
        if n == 0 {
            return Err(validation("samples must be at least 1"));
        }
        Ok(n)
    }

    fn model_value(&self) -> Result<(Value, PathBuf)> {
        match &self.model {
            Some(Value::String(p)) => {
                let path = self.base_dir.join(p);
                let text = fs::read_to_string(&path)?;
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                Ok((serde_json::from_str(&text)?, base))
            }
            Some(v) => Ok((v.clone(), self.base_dir.clone())),
            None => Err(validation("config has no model")),
        }
    }

    pub fn dephasing_model(&self) -> Result<ModelSpec> {
        let (v, base) = self.model_value()?;
        Ok(serde_json::from_value::<ModelSpec>(v)?.resolve_paths(&base))
    }

    pub fn bell_model(&self) -> Result<BellBasisSpec> {
        let (v, _) = self.model_value()?;
        Ok(serde_json::from_value(v)?)
    }

    fn initial_state(&self) -> Result<DensityMatrix> {
        let [x, y, z] = self.initial_bloch.unwrap_or([1.0, 0.0, 0.0]);
        bloch_to_density(&BlochVector::new(x, y, z)?)
    }
}

/// Parse arguments, run, and map the outcome to an exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {e}");
            code
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Singularity { .. } => EXIT_SINGULARITY,
        Error::Model(_) | Error::Structural(_) => EXIT_VALIDITY,
        _ => EXIT_CONFIG,
    }
}

fn dispatch(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Synthesize(a) => cmd_synthesize(
            &load(
                a,
                Grid {
                    t_max: 5.0,
                    points: 201,
                },
            )?,
            &a.out,
        ),
        Command::Depolarize(a) => cmd_depolarize(
            &load(
                a,
                Grid {
                    t_max: 1.5,
                    points: 21,
                },
            )?,
            &a.out,
        ),
        Command::Multiqubit(a) => cmd_multiqubit(
            &load(
                a,
                Grid {
                    t_max: 3.0,
                    points: 31,
                },
            )?,
            &a.out,
        ),
        Command::Verify { common, fields } => cmd_verify(
            &load(
                common,
                Grid {
                    t_max: 5.0,
                    points: 201,
                },
            )?,
            fields.as_deref(),
            &common.out,
        ),
    }
}

fn load(args: &CommonArgs, default_grid: Grid) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config)?;
    cfg.apply(args, default_grid);
    Ok(cfg)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut f = fs::File::create(&path)?;
    f.write_all(bytes)?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(dir, name, text.as_bytes())
}

fn verify_options(cfg: &RunConfig) -> VerifyOptions {
    let mut opts = match cfg.route {
        Route::Angles => VerifyOptions::angles(),
        Route::Fields => VerifyOptions::fields(),
    };
    if let Some(t) = cfg.tolerance {
        opts.tolerance = t;
    }
    opts
}

/// Trace, fields and the quantum reference states for a dephasing model.
fn dephasing_pipeline(
    cfg: &RunConfig,
) -> Result<(DecoherenceTrace, FieldPair, Vec<DensityMatrix>)> {
    let spec = cfg.dephasing_model()?;
    let times = match spec {
        ModelSpec::Tabulated { .. } => Vec::new(),
        _ => cfg.grid()?.times(),
    };
    let trace = spec.trace(&times, cfg.seed)?;
    if !trace.flagged().is_empty() {
        log::warn!(
            "{} grid points lie outside the model's validity range (first at t = {})",
            trace.flagged().len(),
            trace.times()[trace.flagged()[0]]
        );
    }
    let fields = match spec.analytic() {
        Some(m) => analytic_fields(m.as_ref(), trace.times())?,
        None => synthesize(&trace)?,
    };
    let rho0 = cfg.initial_state()?;
    let states = match spec.finite_bath(cfg.seed)? {
        Some(bath) => bath.reduced_states(&rho0, trace.times())?,
        None => (0..trace.len())
            .map(|k| trace.apply(&rho0, k))
            .collect::<Result<_>>()?,
    };
    Ok((trace, fields, states))
}

fn finish_equivalence(report: &EquivalenceReport, out: &Path) -> Result<i32> {
    write_json(out, "equivalence.json", report)?;
    if report.pass {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "equivalence failed: max trace distance {:e} exceeds {:e}",
            report.max_trace_distance, report.tolerance
        );
        Ok(EXIT_VALIDITY)
    }
}

pub fn cmd_synthesize(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let (trace, fields, states) = dephasing_pipeline(cfg)?;
    let mut csv = Vec::new();
    fields.write_csv(&mut csv)?;
    write_file(out, "fields.csv", &csv)?;
    let report = verify_equivalence(trace.times(), &states, &fields, verify_options(cfg))?;
    finish_equivalence(&report, out)
}

pub fn cmd_verify(cfg: &RunConfig, fields_csv: Option<&Path>, out: &Path) -> Result<i32> {
    let spec = cfg.dephasing_model()?;
    if !matches!(spec, ModelSpec::Tabulated { .. }) {
        return Err(validation("verify expects a tabulated model"));
    }
    let (trace, synthesized, states) = dephasing_pipeline(cfg)?;
    let fields = match fields_csv {
        Some(p) => FieldPair::read_csv(fs::File::open(p)?, trace.static_field())?,
        None => synthesized,
    };
    let report = verify_equivalence(trace.times(), &states, &fields, verify_options(cfg))?;
    finish_equivalence(&report, out)
}

#[derive(Debug, Serialize)]
struct DepolarizeReport {
    mode: UnitarySource,
    dim: usize,
    samples: usize,
    seed: u64,
    /// Trace distance to `I/N` at the grid time closest to 1.
    t_mixed: f64,
    distance_to_mixed: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    nz_root: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    points_within_3sigma: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    isotropy: Option<IsotropyReport>,
}

fn write_components_csv(res: &DepolarizeResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let na = res.components.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    for a in 1..=na {
        header.push(format!("n{a}"));
        header.push(format!("n{a}_err"));
    }
    w.write_record(&header)?;
    for (k, &t) in res.times.iter().enumerate() {
        let mut row = vec![format_f64(t)];
        for a in 0..na {
            row.push(format_f64(res.components[k][a]));
            row.push(format_f64(res.stderr[k][a]));
        }
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn cmd_depolarize(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let dim = cfg.dim.unwrap_or(2);
    if dim < 2 {
        return Err(validation("dimension must be at least 2"));
    }
    let times = cfg.grid()?.times();
    let rho0 = DensityMatrix::basis_state(dim, 0);
    let (res, samples) = match cfg.mode {
        UnitarySource::Haar => {
            let samples = cfg.samples(100_000)?;
            (
                haar_mc_depolarize(&rho0, &times, samples, cfg.seed)?,
                samples,
            )
        }
        UnitarySource::Clifford => {
            if !dim.is_power_of_two() {
                return Err(validation("Clifford mode needs a qubit register"));
            }
            let table = CliffordTable::generate(dim.trailing_zeros() as usize)?;
            let n = table.len();
            (clifford_depolarize(&rho0, &times, &table)?, n)
        }
    };
    let csv = if dim == 2 {
        let mut buf = Vec::new();
        res.write_nz_csv(&mut buf)?;
        buf
    } else {
        write_components_csv(&res)?
    };
    write_file(out, "depolarize.csv", &csv)?;

    let k1 = (0..times.len())
        .min_by(|&a, &b| (times[a] - 1.0).abs().total_cmp(&(times[b] - 1.0).abs()))
        .expect("non-empty grid");
    let mixed = DensityMatrix::maximally_mixed(dim);
    let points_within = (dim == 2 && cfg.mode == UnitarySource::Haar).then(|| {
        (0..times.len())
            .filter(|&k| {
                let (nz, err) = res.nz(k).expect("qubit");
                (nz - analytic_nz(times[k])).abs() <= 3.0 * err + 1e-12
            })
            .count()
    });
    let isotropy = match cfg.mode {
        UnitarySource::Haar => {
            let t = cfg.isotropy_t.unwrap_or(0.5);
            Some(haar_isotropy_check(
                &rho0,
                t,
                samples,
                cfg.seed.wrapping_add(1),
            )?)
        }
        UnitarySource::Clifford => None,
    };
    let report = DepolarizeReport {
        mode: cfg.mode,
        dim,
        samples,
        seed: cfg.seed,
        t_mixed: times[k1],
        distance_to_mixed: res.state(k1)?.trace_distance(&mixed),
        nz_root: (dim == 2).then(find_nz_root),
        points_within_3sigma: points_within,
        isotropy,
    };
    write_json(out, "depolarize.json", &report)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct TimeValidity {
    t: f64,
    transitivity: TransitivityReport,
}

#[derive(Debug, Serialize)]
struct McSummary {
    samples: usize,
    seed: u64,
    max_deviation_sigma: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct ValidityReport {
    transitive: bool,
    positive: bool,
    worst_transitivity_violation: f64,
    per_time: Vec<TimeValidity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    positivity_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<McSummary>,
}

fn r_matrix_csv(times: &[f64], r: &[crate::linalg::CMatrix]) -> Result<Vec<u8>> {
    let n = r.first().map_or(0, |m| m.nrows());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    for i in 0..n {
        for j in i + 1..n {
            header.push(format!("r{i}{j}_re"));
            header.push(format!("r{i}{j}_im"));
        }
    }
    w.write_record(&header)?;
    for (t, m) in times.iter().zip(r) {
        let mut row = vec![format_f64(*t)];
        for i in 0..n {
            for j in i + 1..n {
                row.push(format_f64(m[(i, j)].re));
                row.push(format_f64(m[(i, j)].im));
            }
        }
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn cmd_multiqubit(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let spec = cfg.bell_model()?;
    let grid_override = match cfg.grid {
        Some(g) => {
            g.validate()?;
            Some((g.t_max, g.points))
        }
        None => None,
    };
    let model = spec.build(grid_override)?;
    let dim = model.dim();

    // Directly supplied γ matrices take precedence over θ differences.
    let (times, gammas): (Vec<f64>, Vec<Vec<Vec<f64>>>) = match &spec.gamma {
        Some(g) => {
            if g.grid.len() != g.values.len() {
                return Err(validation("γ table grid and values differ in length"));
            }
            (g.grid.clone(), g.values.clone())
        }
        None => (
            model.times().to_vec(),
            (0..model.times().len())
                .map(|k| gamma_matrix(model.theta(k)))
                .collect(),
        ),
    };
    let mut per_time = Vec::with_capacity(times.len());
    for (t, g) in times.iter().zip(&gammas) {
        if g.len() != dim {
            return Err(validation(format!("γ at t = {t} is not {dim} × {dim}")));
        }
        per_time.push(TimeValidity {
            t: *t,
            transitivity: check_transitivity(g)?,
        });
    }
    let r: Vec<_> = gammas
        .iter()
        .map(|g| {
            crate::linalg::CMatrix::from_fn(dim, dim, |i, j| {
                if i == j {
                    crate::linalg::c(1.0, 0.0)
                } else {
                    model.distribution().characteristic(g[i][j])
                }
            })
        })
        .collect();
    write_file(out, "r_matrix.csv", &r_matrix_csv(&times, &r)?)?;

    // By the Schur product theorem, positivity of r/N covers every initial state.
    let all_ones =
        crate::linalg::CMatrix::from_element(dim, dim, crate::linalg::c(1.0 / dim as f64, 0.0));
    let mut positivity_error = None;
    for (t, m) in times.iter().zip(&r) {
        let evolved = all_ones.component_mul(m);
        let min = crate::linalg::Hermitian::hermitize(&evolved).eigh().0[0];
        if min < -crate::multiqubit::POSITIVITY_TOL {
            positivity_error = Some(format!(
                "state lost positivity at t = {t} (eigenvalue {min:e})"
            ));
            break;
        }
    }

    let monte_carlo = match (&spec.gamma, cfg.samples) {
        (None, Some(samples)) if samples > 0 => {
            let mc = model.monte_carlo_r(cfg.seed, samples);
            let mut worst: f64 = 0.0;
            for (k, rk) in r.iter().enumerate() {
                let mean = mc.mean(k);
                let se = mc.stderr(k);
                for i in 0..dim {
                    for j in 0..dim {
                        let d = (mean[(i, j)] - rk[(i, j)]).norm();
                        if d > 1e-12 {
                            worst = worst.max(if se[i][j] > 0.0 {
                                d / se[i][j]
                            } else {
                                f64::INFINITY
                            });
                        }
                    }
                }
            }
            Some(McSummary {
                samples,
                seed: cfg.seed,
                max_deviation_sigma: worst,
                pass: worst <= 3.0,
            })
        }
        _ => None,
    };

    let transitive = per_time.iter().all(|p| p.transitivity.transitive);
    let report = ValidityReport {
        transitive,
        positive: positivity_error.is_none(),
        worst_transitivity_violation: per_time
            .iter()
            .map(|p| p.transitivity.worst_violation)
            .fold(0.0, f64::max),
        per_time,
        positivity_error: positivity_error.clone(),
        monte_carlo,
    };
    write_json(out, "validity.json", &report)?;
    if let Some(msg) = positivity_error {
        eprintln!("{msg}");
        return Ok(EXIT_VALIDITY);
    }
    if !transitive {
        eprintln!(
            "γ violates transitivity (worst {:e})",
            report.worst_transitivity_violation
        );
        return Ok(EXIT_VALIDITY);
    }
    Ok(EXIT_OK)
}
