use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use gpr_core::bias::{pure_bias_predict, BiasProvider, BiharmonicInpaint};
use gpr_core::energy::{FieldMode, ModelParams};
use gpr_core::grid::GridDims;
use gpr_core::harness::{angle_histogram, find_optima, run_sweep, write_result_csv, SweepConfig};
use gpr_core::io;
use gpr_core::metrics::Metric;
use gpr_core::numeric::parse_extended;
use gpr_core::potential::Order;
use gpr_core::sampler::{conditional_predict, unconditional_simulate, McSchedule};
use gpr_core::synthdata::{generate_field, make_mask, Law, MaskSpec, WmSpec, DEFAULT_MODES};
use gpr_core::transform::to_spin_angles;
use gpr_core::{GprError, Result};

#[derive(Parser)]
#[command(name = "gpr", version, about = "Gap filling of gridded data with a planar rotator random field")]
struct Cli {
    /// Random seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Whittle-Matérn random field.
    Generate(GenerateArgs),
    /// Draw a missing-data mask.
    Mask(MaskArgs),
    /// Fill the gaps of a sample by conditional simulation.
    Predict(PredictArgs),
    /// Run a parameter sweep from a JSON config.
    Sweep(SweepArgs),
    /// Fill the gaps with the biharmonic interpolant only.
    BaselineBc(BaselineArgs),
    /// Angle histogram of an unconditional simulation.
    Histogram(HistogramArgs),
}

#[derive(Args)]
struct Size {
    #[arg(long, default_value_t = 64)]
    lx: usize,
    #[arg(long, default_value_t = 64)]
    ly: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum LawArg {
    Gaussian,
    Lognormal,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    size: Size,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    m: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    nu: f64,
    #[arg(long, default_value_t = 2.0)]
    xi1: f64,
    #[arg(long, default_value_t = 2.0)]
    xi2: f64,
    #[arg(long, value_enum, default_value = "gaussian")]
    law: LawArg,
    #[arg(long, default_value_t = DEFAULT_MODES)]
    modes: usize,
    #[arg(long, default_value = "field.csv")]
    name: String,
}

#[derive(Args)]
struct MaskArgs {
    #[command(flatten)]
    size: Size,
    /// Remove this percentage of sites at random.
    #[arg(long, conflicts_with = "block")]
    thinning: Option<f64>,
    /// Remove a square block of this side length.
    #[arg(long)]
    block: Option<usize>,
    #[arg(long, default_value = "mask.csv")]
    name: String,
}

#[derive(Args)]
struct ModelArgs {
    /// JSON file with model parameters; flags below override it.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long = "T")]
    temperature: Option<f64>,
    /// Number of harmonics, or `inf`.
    #[arg(long)]
    n: Option<String>,
    /// Potential sharpness, or `inf`.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long = "J-nn")]
    j_nn: Option<f64>,
    #[arg(long = "J-fn", allow_hyphen_values = true)]
    j_fn: Option<f64>,
    /// Bias field strength.
    #[arg(long = "K", conflicts_with = "k_prime", allow_hyphen_values = true)]
    k: Option<f64>,
    /// Uniform field strength.
    #[arg(long = "K-prime", allow_hyphen_values = true)]
    k_prime: Option<f64>,
}

impl ModelArgs {
    fn resolve(&self) -> Result<ModelParams> {
        let mut p = match &self.params {
            Some(path) => io::read_json(path)?,
            None => ModelParams::default(),
        };
        let extended = |name: &'static str, s: &str| {
            parse_extended(s).ok_or_else(|| GprError::Config(format!("--{name}: `{s}` is not a number")))
        };
        if let Some(t) = self.temperature {
            p.temperature = t;
        }
        if let Some(n) = &self.n {
            p.potential.n = Order::from_f64(extended("n", n)?)?;
        }
        if let Some(a) = &self.alpha {
            p.potential.alpha = extended("alpha", a)?;
        }
        if let Some(v) = self.j_nn {
            p.j_nn = v;
        }
        if let Some(v) = self.j_fn {
            p.j_fn = v;
        }
        if let Some(k) = self.k {
            p.field = FieldMode::Bias { k };
        }
        if let Some(k_prime) = self.k_prime {
            p.field = FieldMode::Uniform { k_prime };
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long, default_value_t = 200)]
    burn_in: usize,
    #[arg(long, default_value_t = 300)]
    averaging: usize,
    /// Initial proposal half-width in radians.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    width: f64,
    /// Tune the proposal width during burn-in towards this acceptance rate.
    #[arg(long)]
    adapt: Option<f64>,
}

impl ScheduleArgs {
    fn schedule(&self, seed: u64) -> McSchedule {
        McSchedule {
            burn_in: self.burn_in,
            averaging: self.averaging,
            proposal_width: self.width,
            target_acceptance: self.adapt,
            seed,
        }
    }
}

#[derive(Args)]
struct PredictArgs {
    /// Sample grid; gap cells may hold any number, `NaN` or nothing.
    #[arg(long)]
    sample: PathBuf,
    /// 1 = observed, 0 = predict.
    #[arg(long)]
    mask: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    schedule: ScheduleArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep config, or a previous result file to re-run.
    #[arg(long)]
    config: PathBuf,
    /// Report the optimum of this metric on stderr.
    #[arg(long, default_value = "MAAE")]
    metric: String,
    #[arg(long, default_value = "sweep")]
    name: String,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    sample: PathBuf,
    #[arg(long)]
    mask: PathBuf,
}

#[derive(Args)]
struct HistogramArgs {
    #[command(flatten)]
    size: Size,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long, default_value_t = 36)]
    bins: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("gpr: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gpr: {e}");
            ExitCode::FAILURE
        }
    }
}

fn out_path(cli: &Cli, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(&cli.out)?;
    Ok(cli.out.join(name))
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => generate(cli, a),
        Command::Mask(a) => mask(cli, a),
        Command::Predict(a) => predict(cli, a),
        Command::Sweep(a) => sweep(cli, a),
        Command::BaselineBc(a) => baseline(cli, a),
        Command::Histogram(a) => histogram(cli, a),
    }
}

fn generate(cli: &Cli, a: &GenerateArgs) -> Result<()> {
    let dims = GridDims::new(a.size.lx, a.size.ly)?;
    let spec = WmSpec {
        m: a.m,
        sigma: a.sigma,
        nu: a.nu,
        xi1: a.xi1,
        xi2: a.xi2,
        law: match a.law {
            LawArg::Gaussian => Law::Gaussian,
            LawArg::Lognormal => Law::Lognormal,
        },
    };
    let field = generate_field(dims, &spec, a.modes, &mut ChaCha8Rng::seed_from_u64(cli.seed))?;
    let path = out_path(cli, &a.name)?;
    io::write_grid(&path, &field)?;
    let provenance = io::FieldProvenance {
        dims,
        spec,
        n_modes: a.modes,
        seed: cli.seed,
    };
    io::write_json(&path.with_extension("json"), &provenance)
}

fn mask(cli: &Cli, a: &MaskArgs) -> Result<()> {
    let dims = GridDims::new(a.size.lx, a.size.ly)?;
    let spec = match (a.thinning, a.block) {
        (Some(p), None) => MaskSpec::Thinning { p },
        (None, Some(lb)) => MaskSpec::Block { lb },
        _ => return Err(GprError::Config("give exactly one of --thinning or --block".into())),
    };
    let m = make_mask(dims, &spec, &mut ChaCha8Rng::seed_from_u64(cli.seed))?;
    io::write_mask(&out_path(cli, &a.name)?, &m)
}

fn predict(cli: &Cli, a: &PredictArgs) -> Result<()> {
    let sample = io::read_sample(&a.sample)?;
    let m = io::read_mask(&a.mask)?;
    let params = a.model.resolve()?;
    let schedule = a.schedule.schedule(cli.seed);
    let result = conditional_predict(&sample, &m, &params, &schedule, &BiharmonicInpaint::default())?;
    io::write_predictions(&out_path(cli, "predictions.csv")?, sample.dims, &result.sites, &result.values)?;
    io::write_energy_trace(&out_path(cli, "energy_trace.csv")?, &result.energy_trace)?;
    if !result.sites.is_empty() {
        io::write_grid(&out_path(cli, "filled.csv")?, &result.fill(&sample))?;
        eprintln!(
            "predicted {} sites, acceptance {:.3}, final width {:.4}",
            result.sites.len(),
            result.acceptance_rate,
            result.final_width
        );
    }
    Ok(())
}

fn load_sweep_config(path: &Path) -> Result<SweepConfig> {
    let value: serde_json::Value = io::read_json(path)?;
    match value.get("config") {
        Some(c) if value.get("rows").is_some() => serde_json::from_value(c.clone())
            .map_err(|e| GprError::Config(format!("{}: `config`: {e}", path.display()))),
        _ => io::read_json(path),
    }
}

fn sweep(cli: &Cli, a: &SweepArgs) -> Result<()> {
    let metric: Metric = a.metric.parse()?;
    let config = load_sweep_config(&a.config)?;
    let result = run_sweep(&config)?;
    write_result_csv(&out_path(cli, &format!("{}.csv", a.name))?, &result)?;
    io::write_json(&out_path(cli, &format!("{}.json", a.name))?, &result)?;
    eprintln!("{} cells in {:.2?}", result.rows.len(), result.wall_time);
    if let Some(o) = find_optima(&result, metric) {
        let axes: Vec<String> = config
            .sweep_axes
            .iter()
            .zip(&o.axis_values)
            .map(|(ax, v)| format!("{}={v}", ax.name.name()))
            .collect();
        eprintln!("optimum {}: {} at {}", a.metric.to_uppercase(), o.value, axes.join(", "));
    }
    Ok(())
}

fn baseline(cli: &Cli, a: &BaselineArgs) -> Result<()> {
    let sample = io::read_sample(&a.sample)?;
    let m = io::read_mask(&a.mask)?;
    let provider = BiharmonicInpaint::default();
    let filled = pure_bias_predict(&sample, &m, &provider)?;
    let sites: Vec<usize> = m.missing_sites().collect();
    let values: Vec<f64> = sites.iter().map(|&s| filled.values[s]).collect();
    io::write_predictions(&out_path(cli, "predictions_bc.csv")?, sample.dims, &sites, &values)?;
    if !sites.is_empty() {
        let (spins, _) = to_spin_angles(&sample, &m)?;
        io::write_bias(&out_path(cli, "bias.csv")?, sample.dims, &provider.bias_field(&spins)?.h)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct HistogramSummary {
    params: ModelParams,
    schedule: McSchedule,
    mean: f64,
    std_dev: f64,
}

fn histogram(cli: &Cli, a: &HistogramArgs) -> Result<()> {
    let dims = GridDims::new(a.size.lx, a.size.ly)?;
    let params = a.model.resolve()?;
    if matches!(params.field, FieldMode::Bias { .. }) {
        return Err(GprError::Config("unconditional runs support only the uniform field".into()));
    }
    let schedule = a.schedule.schedule(cli.seed);
    let run = unconditional_simulate(dims, &params, &schedule, None)?;
    let h = angle_histogram(&run.snapshots, a.bins)?;
    let path = out_path(cli, "histogram.csv")?;
    let mut w = csv::Writer::from_path(&path).map_err(io::csv_io)?;
    w.write_record(["bin_lo", "bin_hi", "count"])
        .map_err(io::csv_io)?;
    for (k, c) in h.counts.iter().enumerate() {
        w.write_record([h.edges[k].to_string(), h.edges[k + 1].to_string(), c.to_string()])
            .map_err(io::csv_io)?;
    }
    w.flush()?;
    let summary = HistogramSummary {
        params,
        schedule,
        mean: h.mean,
        std_dev: h.std_dev,
    };
    io::write_json(&out_path(cli, "histogram.json")?, &summary)
}
