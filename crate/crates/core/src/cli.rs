//! The `symverify` command line.
//!
//! Exit codes: 0 success, 1 run failure, 2 usage error, 3 data error,
//! 4 validation failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::chemdata::{load_dataset, Encoding, MoleculeDataset};
use crate::circuitlib::Topology;
use crate::densim::NoiseModel;
use crate::error::Error;
use crate::experiments::{
    decoherence_scan, dissociation_sweep, engineering_comparison, select_points, ExperimentConfig, Mitigation,
    OptimizeOn, ScanRow, SweepRecord,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

/// Environment variable naming the dataset file.
pub const DATASET_ENV: &str = "SYMVERIFY_DATASET";

pub const SWEEP_HEADER: &str =
    "distance_angstrom,method,theta_star,energy_hartree,exact_hartree,abs_error_hartree,acceptance_probability";
pub const SCAN_HEADER: &str = "time_us,swept_channel,mitigation,abs_error_hartree";

#[derive(Parser, Debug)]
#[command(name = "symverify", version, about = "Symmetry-verified VQE on a noisy density-matrix simulator")]
struct Cli {
    /// Coefficient dataset (JSON); defaults to $SYMVERIFY_DATASET, then the built-in set.
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize the ansatz at every distance and report energies.
    Sweep(SweepArgs),
    /// Two-qubit error against T1 and Tphi with all other noise off.
    NoiseScan(ScanArgs),
    /// Two-qubit, four-qubit and rotated four-qubit runs with and without S-QSE.
    Compare(CompareArgs),
    /// Check dataset invariants and cross-encoding ground energies.
    Validate,
}

#[derive(clap::Args, Debug, Clone, Serialize)]
struct RunArgs {
    /// JSON noise profile; defaults to the built-in model.
    #[arg(long)]
    noise_profile: Option<PathBuf>,
    /// Disable all noise.
    #[arg(long, conflicts_with = "noise_profile")]
    noiseless: bool,
    #[arg(long, value_enum, default_value = "mitigated")]
    optimize_on: OptimizeOnArg,
    /// Worker threads; output order does not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output prefix; writes `<out>.csv` and `<out>.manifest.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args, Debug, Clone, Serialize)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "2q")]
    encoding: EncodingArg,
    #[arg(long, value_enum, default_value = "all")]
    mitigation: MitigationArg,
    /// Rotated symmetries (four-qubit only).
    #[arg(long)]
    rotated: bool,
    /// Nearest-neighbour ancilla circuit.
    #[arg(long)]
    local_ancilla: bool,
    #[arg(long, value_enum, default_value = "tree")]
    topology: TopologyArg,
    #[arg(long, default_value_t = 0.0)]
    r_min: f64,
    #[arg(long, default_value_t = f64::INFINITY)]
    r_max: f64,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(clap::Args, Debug, Clone, Serialize)]
struct ScanArgs {
    /// Comma-separated times in microseconds.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    times: Vec<f64>,
    /// Bond distance in ångström.
    #[arg(long, default_value_t = 0.75)]
    distance: f64,
    #[arg(long, value_enum, default_value = "mitigated")]
    optimize_on: OptimizeOnArg,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args, Debug, Clone, Serialize)]
struct CompareArgs {
    #[arg(long, default_value_t = 0.0)]
    r_min: f64,
    #[arg(long, default_value_t = f64::INFINITY)]
    r_max: f64,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
enum EncodingArg {
    #[value(name = "2q")]
    TwoQubit,
    #[value(name = "4q")]
    FourQubit,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
enum MitigationArg {
    None,
    Ancilla,
    Inline,
    Sqse,
    All,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
enum TopologyArg {
    Tree,
    Linear,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
enum OptimizeOnArg {
    Raw,
    Mitigated,
}

impl From<OptimizeOnArg> for OptimizeOn {
    fn from(a: OptimizeOnArg) -> Self {
        match a {
            OptimizeOnArg::Raw => OptimizeOn::Raw,
            OptimizeOnArg::Mitigated => OptimizeOn::Mitigated,
        }
    }
}

/// Failure carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }

    fn run(e: Error) -> Failure {
        Failure::new(EXIT_RUN, e.to_string())
    }
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    command: &'a str,
    arguments: Vec<String>,
    config: C,
    dataset_source: String,
    dataset_provenance: &'a str,
    tool_version: &'static str,
    wall_clock_seconds: f64,
}

/// Formats with 12 significant digits, `%g` style.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let s = format!("{:.11e}", x);
    let (mant, e) = s.split_once('e').expect("scientific format");
    let e: i32 = e.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) || !(-5..12).contains(&e) {
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        return format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs());
    }
    let decimals = (11 - e).max(0) as usize;
    let fixed = format!("{:.*}", decimals, x);
    if fixed.contains('.') {
        fixed.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        fixed
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let argv: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(&cli, argv) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: &Cli, argv: Vec<String>) -> Result<(), Failure> {
    let (source, loaded) = dataset_source(cli.dataset.as_deref());
    match &cli.command {
        Command::Validate => {
            let ds = loaded.map_err(|e| match e {
                Error::Load(m) => Failure::new(EXIT_VALIDATION, m),
                e => Failure::new(EXIT_DATA, e.to_string()),
            })?;
            validate(&ds)
        }
        Command::Sweep(a) => {
            let ds = loaded.map_err(|e| Failure::new(EXIT_DATA, e.to_string()))?;
            cmd_sweep(a, &ds, &source, argv)
        }
        Command::NoiseScan(a) => {
            let ds = loaded.map_err(|e| Failure::new(EXIT_DATA, e.to_string()))?;
            cmd_noise_scan(a, &ds, &source, argv)
        }
        Command::Compare(a) => {
            let ds = loaded.map_err(|e| Failure::new(EXIT_DATA, e.to_string()))?;
            cmd_compare(a, &ds, &source, argv)
        }
    }
}

fn dataset_source(flag: Option<&Path>) -> (String, crate::error::Result<MoleculeDataset>) {
    let path = flag.map(Path::to_path_buf).or_else(|| std::env::var_os(DATASET_ENV).map(PathBuf::from));
    match path {
        Some(p) => (p.display().to_string(), load_dataset(&p)),
        None => ("builtin".to_string(), MoleculeDataset::from_json_str(crate::chemdata::BUILTIN_DATASET)),
    }
}

fn validate(ds: &MoleculeDataset) -> Result<(), Failure> {
    let issues = ds.consistency_report().map_err(Failure::run)?;
    if issues.is_empty() {
        println!("dataset ok: {} points ({})", ds.points.len(), ds.provenance);
        Ok(())
    } else {
        for i in &issues {
            eprintln!("{i}");
        }
        Err(Failure::new(EXIT_VALIDATION, format!("{} consistency failure(s)", issues.len())))
    }
}

fn noise_model(run: &RunArgs) -> Result<Option<NoiseModel>, Failure> {
    if run.noiseless {
        return Ok(None);
    }
    let Some(path) = &run.noise_profile else {
        return Ok(Some(NoiseModel::default()));
    };
    let text = fs::read_to_string(path).map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", path.display())))?;
    let model: NoiseModel =
        serde_json::from_str(&text).map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", path.display())))?;
    model.validate().map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", path.display())))?;
    Ok(Some(model))
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(Failure::new(EXIT_USAGE, "--jobs must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::new(EXIT_RUN, e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in records {
        let fields = [
            format_number(r.distance),
            r.method.clone(),
            format_number(r.theta_star),
            format_number(r.energy),
            format_number(r.exact_energy),
            format_number(r.error.abs()),
            format_number(r.acceptance_probability),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from(SCAN_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            format_number(r.time * 1e6),
            r.swept_channel.label().to_string(),
            r.mitigation.label().to_string(),
            format_number(r.abs_error),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn write_outputs<C: Serialize>(out: &Path, csv: &str, manifest: &Manifest<'_, C>) -> Result<(), Failure> {
    let csv_path = suffixed(out, "csv");
    let man_path = suffixed(out, "manifest.json");
    let io = |p: &Path, e: std::io::Error| Failure::new(EXIT_RUN, format!("{}: {e}", p.display()));
    fs::write(&csv_path, csv).map_err(|e| io(&csv_path, e))?;
    let json = serde_json::to_string_pretty(manifest).expect("manifests serialize");
    fs::write(&man_path, json + "\n").map_err(|e| io(&man_path, e))?;
    Ok(())
}

fn suffixed(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn cmd_sweep(a: &SweepArgs, ds: &MoleculeDataset, source: &str, argv: Vec<String>) -> Result<(), Failure> {
    let started = Instant::now();
    let encoding = match a.encoding {
        EncodingArg::TwoQubit => Encoding::TwoQubitBk,
        EncodingArg::FourQubit => Encoding::FourQubitJw,
    };
    if a.rotated && encoding != Encoding::FourQubitJw {
        return Err(Failure::new(EXIT_USAGE, "--rotated requires --encoding 4q"));
    }
    let methods: Vec<Mitigation> = match a.mitigation {
        MitigationArg::None => vec![Mitigation::None],
        MitigationArg::Ancilla => vec![Mitigation::Ancilla],
        MitigationArg::Inline => vec![Mitigation::Inline],
        MitigationArg::Sqse => vec![Mitigation::Sqse],
        MitigationArg::All => Mitigation::ALL.to_vec(),
    };
    let base = ExperimentConfig {
        encoding,
        rotated: a.rotated,
        noise: noise_model(&a.run)?,
        optimize_on: a.run.optimize_on.into(),
        local_ancilla: a.local_ancilla,
        inline_topology: match a.topology {
            TopologyArg::Tree => Topology::Tree,
            TopologyArg::Linear => Topology::Linear,
        },
        ..ExperimentConfig::default()
    };
    let points = select_points(ds, a.r_min, a.r_max);
    if points.is_empty() {
        return Err(Failure::new(EXIT_USAGE, "no dataset points in the requested distance range"));
    }
    let mut records = Vec::new();
    let mut configs = Vec::new();
    for m in methods {
        let cfg = ExperimentConfig { mitigation: m, ..base.clone() };
        let recs = with_pool(a.run.jobs, || dissociation_sweep(&cfg, &points))?.map_err(Failure::run)?;
        records.extend(recs);
        configs.push(cfg);
    }
    let manifest = Manifest {
        command: "sweep",
        arguments: argv,
        config: configs,
        dataset_source: source.to_string(),
        dataset_provenance: &ds.provenance,
        tool_version: env!("CARGO_PKG_VERSION"),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    write_outputs(&a.run.out, &sweep_csv(&records), &manifest)
}

fn cmd_noise_scan(a: &ScanArgs, ds: &MoleculeDataset, source: &str, argv: Vec<String>) -> Result<(), Failure> {
    let started = Instant::now();
    if a.times.is_empty() {
        return Err(Failure::new(EXIT_USAGE, "--times needs at least one value"));
    }
    if let Some(t) = a.times.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Failure::new(EXIT_USAGE, format!("time {t} μs is not positive")));
    }
    let point = ds
        .point_at(a.distance)
        .ok_or_else(|| Failure::new(EXIT_DATA, format!("dataset has no point at {} Å", a.distance)))?;
    let times: Vec<f64> = a.times.iter().map(|t| t * 1e-6).collect();
    let base = ExperimentConfig { optimize_on: a.optimize_on.into(), ..ExperimentConfig::default() };
    let rows = with_pool(a.jobs, || decoherence_scan(point, &times, &base))?.map_err(Failure::run)?;
    let manifest = Manifest {
        command: "noise-scan",
        arguments: argv,
        config: a,
        dataset_source: source.to_string(),
        dataset_provenance: &ds.provenance,
        tool_version: env!("CARGO_PKG_VERSION"),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    write_outputs(&a.out, &scan_csv(&rows), &manifest)
}

fn cmd_compare(a: &CompareArgs, ds: &MoleculeDataset, source: &str, argv: Vec<String>) -> Result<(), Failure> {
    let started = Instant::now();
    let base = ExperimentConfig {
        noise: noise_model(&a.run)?,
        optimize_on: a.run.optimize_on.into(),
        ..ExperimentConfig::default()
    };
    let points = select_points(ds, a.r_min, a.r_max);
    if points.is_empty() {
        return Err(Failure::new(EXIT_USAGE, "no dataset points in the requested distance range"));
    }
    let records = with_pool(a.run.jobs, || engineering_comparison(&points, &base))?.map_err(Failure::run)?;
    let manifest = Manifest {
        command: "compare",
        arguments: argv,
        config: &base,
        dataset_source: source.to_string(),
        dataset_provenance: &ds.provenance,
        tool_version: env!("CARGO_PKG_VERSION"),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    write_outputs(&a.run.out, &sweep_csv(&records), &manifest)
}
