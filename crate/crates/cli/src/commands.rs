use clap::{Args, ValueEnum};
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use soliton_core::dressing::{self, jost_seed, vacuum_seed};
use soliton_core::io as nlsf;
use soliton_core::scattering::{self, params_from_scattering, ScatteringData};
use soliton_core::stability::{self, ConstantFit, ExperimentConfig, StabilityReport};
use soliton_core::{
    evolve as run_evolve, l2_norm, n_soliton, ComplexField, Error, EvolveConfig, Grid, Scheme, SearchRegion,
    SolitonParams, SpectralPoint,
};

pub enum Failure {
    /// Bad command line or configuration document.
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

impl Failure {
    pub fn report(self) -> ExitCode {
        match self {
            Failure::Usage(msg) => {
                let _ = writeln!(std::io::stderr(), "error: {msg}\n\n{}", schema());
                ExitCode::from(1)
            }
            Failure::Core(e) => {
                let _ = writeln!(std::io::stderr(), "error: {e}");
                if e.is_validation() {
                    ExitCode::from(1)
                } else {
                    ExitCode::from(2)
                }
            }
        }
    }
}

pub fn schema() -> String {
    let example = ExperimentConfig {
        base: vec![
            SolitonParams::new(1.0, 1.0, 0.0, 0.0).expect("valid"),
            SolitonParams::new(-1.0, 1.5, 0.0, 0.0).expect("valid"),
        ],
        perturbation: stability::PerturbationConfig {
            shape: stability::Shape::Gaussian { center: 1.0, width: 3.0, phase: 0.5 },
            epsilon: 1e-2,
            seed: 0,
            weight: 1.0,
        },
        evolve: EvolveConfig::new(512.0, 16384, 1e-3, 20.0),
        search: SearchRegion::new(-2.0, 2.0, 0.2, 2.5).expect("valid"),
        sample_times: vec![],
        undress: true,
    };
    format!(
        "Configuration documents are JSON; unknown keys are rejected.\n\
         ExperimentConfig (stability, sweep):\n\
         {}\n\
         perturbation.shape.kind is one of \"gaussian\" {{center, width, phase}}, \
         \"random-band\" {{center, width, k_min, k_max, modes}}, \"xi-split\" {{delta}}.\n\
         EvolveConfig (evolve --config) is the \"evolve\" object above; scheme is \"strang\" or \"suzuki4\".\n\
         sample_times defaults to every 0.5 up to t_end; \"undress\" defaults to true.\n\
         Soliton flags --eta/--xi/--x0/--theta are zipped by position; --xi, --x0 and --theta \
         may be omitted (zero) or repeated once per --eta.\n\
         Exit codes: 0 success, 1 invalid input, 2 numerical failure.",
        serde_json::to_string_pretty(&example).expect("serializable")
    )
}

pub fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("NLSF_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Usage(format!("NLSF_THREADS must be a positive integer, got {v:?}")))?;
    // Already initialized only when called twice in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

#[derive(Args)]
pub struct ParamArgs {
    /// Soliton amplitude parameter η > 0; one per soliton
    #[arg(long, required = true)]
    eta: Vec<f64>,
    /// Velocity parameter ξ
    #[arg(long, allow_negative_numbers = true)]
    xi: Vec<f64>,
    /// Position offset
    #[arg(long, allow_negative_numbers = true)]
    x0: Vec<f64>,
    /// Phase offset
    #[arg(long, allow_negative_numbers = true)]
    theta: Vec<f64>,
}

impl ParamArgs {
    pub fn params(&self) -> Result<Vec<SolitonParams>, Failure> {
        let n = self.eta.len();
        let pick = |v: &[f64], name: &str| -> Result<Vec<f64>, Failure> {
            match v.len() {
                0 => Ok(vec![0.0; n]),
                k if k == n => Ok(v.to_vec()),
                k => Err(Failure::Usage(format!("{k} --{name} values for {n} --eta values"))),
            }
        };
        let (xi, x0, th) = (pick(&self.xi, "xi")?, pick(&self.x0, "x0")?, pick(&self.theta, "theta")?);
        (0..n)
            .map(|j| SolitonParams::new(xi[j], self.eta[j], x0[j], th[j]).map_err(Failure::from))
            .collect()
    }
}

#[derive(Args)]
pub struct GridArgs {
    #[arg(long, default_value = "2048")]
    grid_n: usize,
    #[arg(long, default_value = "80")]
    grid_l: f64,
}

impl GridArgs {
    fn grid(&self) -> Result<Grid, Failure> {
        Ok(Grid::centered(self.grid_l, self.grid_n)?)
    }
}

#[derive(Args)]
pub struct RegionArgs {
    /// Search rectangle ξ_min ξ_max η_min η_max
    #[arg(long, num_args = 4, allow_negative_numbers = true, value_names = ["XI_MIN", "XI_MAX", "ETA_MIN", "ETA_MAX"],
          default_values = ["-2", "2", "0.1", "2.5"])]
    region: Vec<f64>,
    /// Scan points per side
    #[arg(long, default_value = "40")]
    resolution: usize,
}

impl RegionArgs {
    fn region(&self) -> Result<SearchRegion, Failure> {
        let r = &self.region;
        Ok(SearchRegion::new(r[0], r[1], r[2], r[3])?.with_resolution(self.resolution))
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    Strang,
    Suzuki4,
}

pub struct StepFlags {
    pub t_end: Option<f64>,
    pub dt: f64,
    pub scheme: SchemeArg,
    pub sample: Vec<f64>,
    pub dealias: bool,
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(path)?))
}

fn emit_json(value: &impl Serialize, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))? + "\n";
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn write_surface(path: &Path, frames: &[ComplexField]) -> Result<(), Failure> {
    let mut w = create(path)?;
    nlsf::surface_csv(&mut w, frames)?;
    w.flush()?;
    Ok(())
}

pub fn soliton(params: &ParamArgs, grid: &GridArgs, t: &[f64], out: &Path) -> Result<(), Failure> {
    let ps = params.params()?;
    let grid = grid.grid()?;
    if is_csv(out) {
        let frames = t.iter().map(|t| n_soliton(&ps, grid, *t)).collect::<Result<Vec<_>, _>>()?;
        return write_surface(out, &frames);
    }
    let [t] = t else {
        return Err(Failure::Usage("field files hold one time; use a .csv output for several --t".into()));
    };
    nlsf::save(out, &n_soliton(&ps, grid, *t)?)?;
    Ok(())
}

pub fn dress(
    params: &ParamArgs,
    grid: &GridArgs,
    t: f64,
    input: Option<&Path>,
    out: &Path,
    log_det: Option<&Path>,
) -> Result<(), Failure> {
    let ps = params.params()?;
    let (q0, seeds) = match input {
        Some(p) => {
            let q0 = nlsf::load(p)?;
            let seeds = jost_seed(&q0, &ps, q0.t)?;
            (q0, seeds)
        }
        None => {
            let g = grid.grid()?;
            (ComplexField::zeros(g, t), vacuum_seed(&ps, t, g)?)
        }
    };
    let d = dressing::dress_detailed(&q0, &seeds)?;
    nlsf::save(out, &d.q)?;
    if let Some(path) = log_det {
        let mut w = create(path)?;
        writeln!(w, "x,log_det")?;
        for (x, l) in d.q.grid.points().zip(&d.log_det) {
            writeln!(w, "{x:?},{l:?}")?;
        }
        w.flush()?;
    }
    Ok(())
}

#[derive(Serialize)]
struct EvolveSummary {
    steps: usize,
    l2_drift: f64,
    diagnostics: Vec<soliton_core::evolve::Diagnostics>,
}

pub fn evolve(
    input: &Path,
    config: Option<&Path>,
    flags: StepFlags,
    out: &Path,
    surface: Option<&Path>,
) -> Result<(), Failure> {
    let q0 = nlsf::load(input)?;
    let cfg = match config {
        Some(p) => read_json::<EvolveConfig>(p)?,
        None => {
            let t_end = flags.t_end.ok_or_else(|| Failure::Usage("--t-end or --config is required".into()))?;
            let mut cfg = EvolveConfig::new(q0.grid.length(), q0.len(), flags.dt, t_end);
            cfg.dealias = flags.dealias;
            cfg.scheme = match flags.scheme {
                SchemeArg::Strang => Scheme::Strang,
                SchemeArg::Suzuki4 => Scheme::Suzuki4,
            };
            cfg.sample_times = flags.sample;
            if !cfg.sample_times.is_empty() && !cfg.sample_times.contains(&t_end) {
                cfg.sample_times.push(t_end);
            }
            cfg
        }
    };
    let traj = run_evolve(&q0, &cfg)?;
    nlsf::save(out, traj.last())?;
    if let Some(path) = surface {
        write_surface(path, &traj.snapshots)?;
    }
    emit_json(
        &EvolveSummary { steps: traj.steps, l2_drift: traj.l2_drift, diagnostics: traj.diagnostics.clone() },
        None,
    )
}

#[derive(Serialize)]
struct ScatterOutput {
    #[serde(flatten)]
    data: ScatteringData,
    params: Vec<SolitonParams>,
}

pub fn scatter(input: &Path, region: &RegionArgs, real_samples: usize, out: Option<&Path>) -> Result<(), Failure> {
    let q = nlsf::load(input)?;
    let data = scattering::scatter(&q, &region.region()?, real_samples)?;
    let params = params_from_scattering(&data)?;
    emit_json(&ScatterOutput { data, params }, out)
}

#[derive(Serialize)]
struct UndressOutput {
    eigenvalues: Vec<[f64; 2]>,
    residual_norm: f64,
    residual_eigenvalues: usize,
}

pub fn undress(input: &Path, region: &RegionArgs, out: &Path) -> Result<(), Failure> {
    let q = nlsf::load(input)?;
    let region = region.region()?;
    let (rest, zs) = scattering::strip_solitons(&q, &region)?;
    let left = scattering::residual_eigenvalues(&rest, &q, &region)?;
    nlsf::save(out, &rest)?;
    emit_json(
        &UndressOutput {
            eigenvalues: zs.iter().map(|z: &SpectralPoint| [z.xi, z.eta]).collect(),
            residual_norm: l2_norm(&rest),
            residual_eigenvalues: left.len(),
        },
        None,
    )
}

pub fn stability(config: &Path, out: Option<&Path>, csv: Option<&Path>) -> Result<(), Failure> {
    let cfg: ExperimentConfig = read_json(config)?;
    let report = stability::run_experiment(&cfg)?;
    if let Some(p) = csv {
        std::fs::write(p, report.series_csv())?;
    }
    emit_json(&report, out)
}

#[derive(Serialize)]
struct SweepOutput {
    reports: Vec<StabilityReport>,
    distance_fit: ConstantFit,
    parameter_fit: ConstantFit,
}

pub fn sweep(config: &Path, eps: &[f64], out: Option<&Path>, csv_dir: Option<&Path>) -> Result<(), Failure> {
    let cfg: ExperimentConfig = read_json(config)?;
    let reports = stability::sweep(&cfg, eps)?;
    let distance_fit = stability::fit_constant(&reports)?;
    let parameter_fit = stability::fit_param_constant(&reports)?;
    if let Some(dir) = csv_dir {
        std::fs::create_dir_all(dir)?;
        for (k, r) in reports.iter().enumerate() {
            std::fs::write(dir.join(format!("series_{k}_eps_{:e}.csv", r.epsilon)), r.series_csv())?;
        }
    }
    emit_json(&SweepOutput { reports, distance_fit, parameter_fit }, out)
}
