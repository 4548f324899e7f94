//! Command-line front end: configuration from flags and an optional flat
//! `key = value` file, one command per run, CSV or JSON output.
//!
//! Configuration file keys mirror the long flags (`M`, `omega0`, `lambda`,
//! `d`, `k0d`, `tol`, `out`, `format`, `sequential`, `window`, `resolution`,
//! `var`, `values`, `energy`, `eta`, `method`, `criteria`). Blank lines and
//! lines starting with `#` are ignored. Flags given on the command line
//! override the file.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::acceptance::{run_suite, AcceptanceOptions, CriterionOutcome};
use crate::analysis::{EmissionOptions, EmissionReport, GridWindow, SpectralGrid, SweepResult, SweepSpec, SweepVariable};
use crate::error::{Error, Result};
use crate::model::{on_shell, ModelParams, SymmetrySector};
use crate::par::{init_thread_pool, Parallelism};
use crate::selfenergy::{
    sector_rates, sigma2_onshell, sigma_s_analytic, sigma_s_numeric, tau2, ComplexEnergy, SelfEnergyValue,
};
use crate::system::PairSystem;

const DEFAULT_OMEGA0: f64 = 1.1;
const DEFAULT_LAMBDA: f64 = 1e-2;
const DEFAULT_K0D_PI: f64 = 0.5;
const DEFAULT_RESOLUTION: usize = 201;

#[derive(Parser, Debug)]
#[command(name = "waveguide-pair", version, about = "Two-photon emission from a pair of excited atoms in a waveguide")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// One-excitation self-energies Σ_± at a complex energy.
    Selfenergy {
        #[command(flatten)]
        common: CommonArgs,
        /// Real part of the energy.
        #[arg(long, allow_hyphen_values = true)]
        energy: Option<f64>,
        /// Imaginary part of the energy; 0 means the limit from above.
        #[arg(long, allow_hyphen_values = true)]
        eta: Option<f64>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Lifetime of the doubly excited state.
    Lifetime {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Two-photon density P(k1, k2) on a grid.
    Density {
        #[command(flatten)]
        common: CommonArgs,
        /// `lo,hi` (square) or `k1lo,k1hi,k2lo,k2hi`, physical momentum units.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        /// Points per axis: `N` or `N1xN2`.
        #[arg(long)]
        resolution: Option<String>,
    },
    /// Parallel and antiparallel emission probabilities and their ratio.
    Ratio {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Ratio along one parameter.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        var: Option<VarArg>,
        /// Comma-separated values; `k0d` values are in units of π.
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
    },
    /// Runs the acceptance suite.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated criterion numbers; all when omitted.
        #[arg(long)]
        criteria: Option<String>,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Mode cutoff.
    #[arg(long = "M")]
    pub m: Option<f64>,
    #[arg(long)]
    pub omega0: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Interatomic distance.
    #[arg(long, conflicts_with = "k0d")]
    pub d: Option<f64>,
    /// Phase k0·d in units of π.
    #[arg(long)]
    pub k0d: Option<f64>,
    /// Absolute tolerance of the emission integrals.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Disable data parallelism.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Numeric,
    Analytic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VarArg {
    Lambda,
    Distance,
    K0d,
    Omega0,
}

impl From<VarArg> for SweepVariable {
    fn from(v: VarArg) -> Self {
        match v {
            VarArg::Lambda => SweepVariable::Lambda,
            VarArg::Distance => SweepVariable::Distance,
            VarArg::K0d => SweepVariable::K0d,
            VarArg::Omega0 => SweepVariable::Omega0,
        }
    }
}

/// Fully resolved command with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Task {
    SelfEnergy { energy: C64, method: MethodArg },
    Lifetime,
    Density { window: GridWindow, resolution: (usize, usize) },
    Ratio,
    Sweep { variable: SweepVariable, values: Vec<f64> },
    Validate { criteria: Vec<u8> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub task: Task,
    pub tol: f64,
    pub parallelism: Parallelism,
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// Flat `key = value` pairs.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected key = value", n + 1)));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", n + 1)));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {key}", n + 1)));
        }
    }
    Ok(map)
}

const KNOWN_KEYS: [&str; 17] = [
    "M", "omega0", "lambda", "d", "k0d", "tol", "out", "format", "sequential", "window", "resolution", "var", "values",
    "energy", "eta", "method", "criteria",
];

/// Configuration file values, consumed key by key.
struct FileValues(BTreeMap<String, String>);

impl FileValues {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self(BTreeMap::new()));
        };
        let map = parse_config_file(&fs::read_to_string(path)?)?;
        if let Some(bad) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key {bad} in {}", path.display())));
        }
        Ok(Self(map))
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn num(&self, key: &str) -> Result<Option<f64>> {
        self.str(key)
            .map(|v| v.parse::<f64>().map_err(|_| Error::Config(format!("{key}: not a number: {v}"))))
            .transpose()
    }

    fn choice<T: ValueEnum>(&self, key: &str) -> Result<Option<T>> {
        self.str(key)
            .map(|v| T::from_str(v, true).map_err(|_| Error::Config(format!("{key}: unknown value {v}"))))
            .transpose()
    }
}

fn parse_list(key: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Config(format!("{key}: not a number: {v}"))))
        .collect()
}

fn parse_resolution(text: &str) -> Result<(usize, usize)> {
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| Error::Config(format!("resolution: invalid {text}")));
    match text.split_once(['x', 'X']) {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => {
            let n = parse(text)?;
            Ok((n, n))
        }
    }
}

fn parse_window(text: &str) -> Result<GridWindow> {
    let v = parse_list("window", text)?;
    match v.as_slice() {
        [lo, hi] => Ok(GridWindow::square(*lo, *hi)),
        [a, b, c, d] => Ok(GridWindow { k1: (*a, *b), k2: (*c, *d) }),
        _ => Err(Error::Config(format!("window needs 2 or 4 values, got {}", v.len()))),
    }
}

impl CommonArgs {
    fn model(&self, file: &FileValues) -> Result<ModelParams> {
        let m = self.m.or(file.num("M")?).unwrap_or(1.0);
        let omega0 = self.omega0.or(file.num("omega0")?).unwrap_or(DEFAULT_OMEGA0 * m);
        let lambda = self.lambda.or(file.num("lambda")?).unwrap_or(DEFAULT_LAMBDA * m);
        // a flag for either geometry key overrides both file keys
        let (d, k0d) = if self.d.is_some() || self.k0d.is_some() {
            (self.d, self.k0d)
        } else {
            (file.num("d")?, file.num("k0d")?)
        };
        match (d, k0d) {
            (Some(_), Some(_)) => Err(Error::Config("give either d or k0d, not both".into())),
            (Some(d), None) => ModelParams::new(m, omega0, lambda, d),
            (None, k) => ModelParams::with_k0d(m, omega0, lambda, k.unwrap_or(DEFAULT_K0D_PI) * PI),
        }
    }
}

impl Cli {
    /// Resolves flags and configuration file into a validated run.
    pub fn resolve(&self) -> Result<RunConfig> {
        let common = match &self.command {
            Command::Selfenergy { common, .. }
            | Command::Lifetime { common }
            | Command::Density { common, .. }
            | Command::Ratio { common }
            | Command::Sweep { common, .. }
            | Command::Validate { common, .. } => common,
        };
        let file = FileValues::load(common.config.as_deref())?;
        let model = common.model(&file)?;
        let tol = common.tol.or(file.num("tol")?).unwrap_or(EmissionOptions::default().tol);
        if !(tol > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
        }
        let sequential = common.sequential
            || match file.str("sequential") {
                None => false,
                Some(v) => v.parse::<bool>().map_err(|_| Error::Config(format!("sequential: expected true or false, got {v}")))?,
            };
        let out = common.out.clone().or_else(|| file.str("out").map(PathBuf::from));
        if let Some(path) = &out {
            let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
            if !parent.is_dir() {
                return Err(Error::Config(format!("output directory {} does not exist", parent.display())));
            }
        }
        let format = common.format.or(file.choice("format")?).unwrap_or(Format::Csv);
        let task = match &self.command {
            Command::Selfenergy { energy, eta, method, .. } => {
                let re = energy.or(file.num("energy")?).unwrap_or(model.omega0);
                let im = eta.or(file.num("eta")?).unwrap_or(0.0);
                let method = method.or(file.choice("method")?).unwrap_or(MethodArg::Numeric);
                Task::SelfEnergy { energy: C64::new(re, im), method }
            }
            Command::Lifetime { .. } => Task::Lifetime,
            Command::Density { window, resolution, .. } => {
                let window = match window.as_deref().or(file.str("window")) {
                    Some(w) => parse_window(w)?,
                    None => {
                        let k0 = on_shell(&model)?.k0;
                        GridWindow::square(-1.5 * k0, 1.5 * k0)
                    }
                };
                let resolution = match resolution.as_deref().or(file.str("resolution")) {
                    Some(r) => parse_resolution(r)?,
                    None => (DEFAULT_RESOLUTION, DEFAULT_RESOLUTION),
                };
                Task::Density { window, resolution }
            }
            Command::Ratio { .. } => Task::Ratio,
            Command::Sweep { var, values, .. } => {
                let var = var
                    .or(file.choice("var")?)
                    .ok_or_else(|| Error::Config("sweep needs --var".into()))?;
                let text = values
                    .as_deref()
                    .or(file.str("values"))
                    .ok_or_else(|| Error::Config("sweep needs --values".into()))?;
                let mut values = parse_list("values", text)?;
                if var == VarArg::K0d {
                    values.iter_mut().for_each(|v| *v *= PI);
                }
                Task::Sweep { variable: var.into(), values }
            }
            Command::Validate { criteria, .. } => {
                let criteria = match criteria.as_deref().or(file.str("criteria")) {
                    None => Vec::new(),
                    Some(text) => text
                        .split(',')
                        .map(|c| c.trim().parse::<u8>().map_err(|_| Error::Config(format!("criteria: invalid {c}"))))
                        .collect::<Result<_>>()?,
                };
                Task::Validate { criteria }
            }
        };
        Ok(RunConfig {
            model,
            task,
            tol,
            parallelism: if sequential { Parallelism::Sequential } else { Parallelism::Rayon },
            out,
            format,
        })
    }
}

/// Floating-point text with 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct SelfEnergyRow {
    sector: SymmetrySector,
    energy: C64,
    #[serde(flatten)]
    value: SelfEnergyValue,
}

#[derive(Serialize)]
struct LifetimeReport {
    params: ModelParams,
    tau2: f64,
    gamma_atom: f64,
    sigma2: C64,
    /// `τ₂·2γ_atom`.
    product: f64,
    delta_s: [f64; 2],
    gamma_s: [f64; 2],
}

/// Output of one run, before serialization.
enum Output {
    SelfEnergy(Vec<SelfEnergyRow>),
    Lifetime(LifetimeReport),
    Density(SpectralGrid),
    Ratio(EmissionReport),
    Sweep(SweepResult),
    Validate(Vec<CriterionOutcome>),
}

impl Output {
    fn json(&self) -> Result<String> {
        let text = match self {
            Output::SelfEnergy(v) => serde_json::to_string_pretty(v)?,
            Output::Lifetime(v) => serde_json::to_string_pretty(v)?,
            Output::Density(v) => serde_json::to_string_pretty(v)?,
            Output::Ratio(v) => serde_json::to_string_pretty(v)?,
            Output::Sweep(v) => serde_json::to_string_pretty(v)?,
            Output::Validate(v) => serde_json::to_string_pretty(v)?,
        };
        Ok(text + "\n")
    }

    fn table(&self) -> Table {
        match self {
            Output::SelfEnergy(rows) => {
                let mut t = Table::new(&["sector", "re_z", "im_z", "re_sigma", "im_sigma", "error"]);
                for r in rows {
                    t.push(vec![
                        format!("{:+}", r.sector.sign() as i32),
                        num(r.energy.re),
                        num(r.energy.im),
                        num(r.value.sigma.re),
                        num(r.value.sigma.im),
                        num(r.value.error_estimate),
                    ]);
                }
                t
            }
            Output::Lifetime(r) => {
                let mut t = Table::new(&["tau2", "gamma_atom", "re_sigma2", "im_sigma2", "product"]);
                t.push(vec![num(r.tau2), num(r.gamma_atom), num(r.sigma2.re), num(r.sigma2.im), num(r.product)]);
                t
            }
            Output::Density(g) => {
                let mut t = Table::new(&["k1", "k2", "P"]);
                for (a, b, p) in g.triples() {
                    t.push(vec![num(a), num(b), num(p)]);
                }
                t
            }
            Output::Ratio(r) => {
                let mut t = Table::new(&["P_par", "P_anti", "R", "dR", "norm", "flagged"]);
                t.push(vec![num(r.p_parallel), num(r.p_antiparallel), num(r.ratio), num(r.ratio_error), num(r.norm), r.flagged.to_string()]);
                t
            }
            Output::Sweep(s) => {
                let mut t = Table::new(&["param", "P_par", "P_anti", "R", "dR", "norm", "status"]);
                for row in &s.rows {
                    match (&row.report, &row.error) {
                        (Some(r), _) => t.push(vec![
                            num(row.value),
                            num(r.p_parallel),
                            num(r.p_antiparallel),
                            num(r.ratio),
                            num(r.ratio_error),
                            num(r.norm),
                            if r.flagged { format!("flagged: {}", r.flags.join("; ")) } else { "ok".into() },
                        ]),
                        (None, err) => {
                            let mut cells = vec![num(row.value)];
                            cells.extend(std::iter::repeat_n(String::new(), 5));
                            cells.push(format!("error: {}", err.as_deref().unwrap_or("unknown")));
                            t.push(cells);
                        }
                    }
                }
                t
            }
            Output::Validate(outcomes) => {
                let mut t = Table::new(&["criterion", "name", "passed", "detail", "seconds"]);
                for o in outcomes {
                    t.push(vec![o.id.to_string(), o.name.clone(), o.passed.to_string(), o.detail.clone(), format!("{:.3}", o.seconds)]);
                }
                t
            }
        }
    }

    /// Whether the run should end with a nonzero status despite producing output.
    fn failed(&self) -> bool {
        match self {
            Output::Sweep(s) => s.rows.iter().any(|r| r.report.is_none()),
            Output::Validate(v) => v.iter().any(|o| !o.passed),
            _ => false,
        }
    }
}

fn compute(cfg: &RunConfig) -> Result<Output> {
    let params = &cfg.model;
    let emission = EmissionOptions { tol: cfg.tol, parallelism: cfg.parallelism, ..EmissionOptions::default() };
    Ok(match &cfg.task {
        Task::SelfEnergy { energy, method } => {
            let z = if energy.im == 0.0 { ComplexEnergy::upper(energy.re) } else { ComplexEnergy::plain(*energy) };
            let mut rows = Vec::new();
            for sector in SymmetrySector::BOTH {
                let value = match method {
                    MethodArg::Numeric => sigma_s_numeric(params, sector, z)?,
                    MethodArg::Analytic => sigma_s_analytic(params, sector, z)?,
                };
                rows.push(SelfEnergyRow { sector, energy: *energy, value });
            }
            Output::SelfEnergy(rows)
        }
        Task::Lifetime => {
            let os = on_shell(params)?;
            let tau = tau2(params)?;
            let rates = SymmetrySector::BOTH.map(|s| sector_rates(params, s));
            let [plus, minus] = rates;
            let (plus, minus) = (plus?, minus?);
            Output::Lifetime(LifetimeReport {
                params: *params,
                tau2: tau,
                gamma_atom: os.gamma_atom,
                sigma2: sigma2_onshell(params)?,
                product: tau * 2.0 * os.gamma_atom,
                delta_s: [plus.delta_s, minus.delta_s],
                gamma_s: [plus.gamma_s, minus.gamma_s],
            })
        }
        Task::Density { window, resolution } => {
            Output::Density(PairSystem::new(params)?.density_grid(*window, *resolution, cfg.parallelism)?)
        }
        Task::Ratio => Output::Ratio(PairSystem::new(params)?.emission(&emission)?),
        Task::Sweep { variable, values } => {
            let spec = SweepSpec { variable: *variable, values: values.clone(), fixed: *params, options: emission };
            Output::Sweep(crate::analysis::sweep(&spec)?)
        }
        Task::Validate { criteria } => {
            let opts = AcceptanceOptions { emission_tol: cfg.tol, parallelism: cfg.parallelism };
            Output::Validate(run_suite(criteria, &opts, |o| log::info!("{o}")))
        }
    })
}

fn emit(cfg: &RunConfig, output: &Output) -> Result<()> {
    let sink: Box<dyn Write> = match &cfg.out {
        Some(path) => Box::new(io::BufWriter::new(fs::File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    match cfg.format {
        Format::Json => {
            let mut sink = sink;
            sink.write_all(output.json()?.as_bytes())?;
            sink.flush()?;
        }
        Format::Csv => output.table().write(sink)?,
    }
    Ok(())
}

/// Runs a resolved configuration and writes its output.
pub fn run(cfg: &RunConfig) -> Result<bool> {
    let threads = init_thread_pool();
    log::debug!("{threads} worker threads, {:?}", cfg.parallelism);
    let output = compute(cfg)?;
    emit(cfg, &output)?;
    Ok(!output.failed())
}

/// Entry point of the binary: 0 on success, 1 when validation or a sweep
/// row failed, 2 on errors.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = cli.resolve().and_then(|cfg| run(&cfg));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(args: &[&str]) -> Result<RunConfig> {
        Cli::try_parse_from(std::iter::once("waveguide-pair").chain(args.iter().copied()))
            .map_err(|e| Error::Config(e.to_string()))?
            .resolve()
    }

    #[test]
    fn config_file_format() {
        let map = parse_config_file("# comment\nlambda = 0.02\n\n k0d=1.5 \n").unwrap();
        assert_eq!(map["lambda"], "0.02");
        assert_eq!(map["k0d"], "1.5");
        assert!(parse_config_file("lambda 0.02").is_err());
        assert!(parse_config_file("a = 1\na = 2").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "lambda = 0.02\nk0d = 1.5\nformat = json\n").unwrap();
        let cfg = resolve(&["ratio", "--config", path.to_str().unwrap(), "--lambda", "0.005"]).unwrap();
        assert_eq!(cfg.model.lambda, 0.005);
        assert!((cfg.model.k0d() - 1.5 * PI).abs() < 1e-12);
        assert_eq!(cfg.format, Format::Json);
        let cfg = resolve(&["ratio", "--config", path.to_str().unwrap(), "--d", "3"]).unwrap();
        assert_eq!(cfg.model.d, 3.0);
    }

    #[test]
    fn defaults_and_geometry() {
        let cfg = resolve(&["lifetime"]).unwrap();
        assert_eq!(cfg.model.omega0, 1.1);
        assert_eq!(cfg.model.lambda, 1e-2);
        assert!((cfg.model.k0d() - 0.5 * PI).abs() < 1e-12);
        assert!(resolve(&["lifetime", "--d", "1", "--k0d", "0.5"]).is_err());
        assert!(resolve(&["ratio", "--tol", "0"]).is_err());
        assert!(resolve(&["ratio", "--out", "/nonexistent/dir/r.csv"]).is_err());
    }

    #[test]
    fn sweep_values_in_pi_units() {
        let cfg = resolve(&["sweep", "--var", "k0d", "--values", "0.5,1.5"]).unwrap();
        match cfg.task {
            Task::Sweep { variable, values } => {
                assert_eq!(variable, SweepVariable::K0d);
                assert!((values[1] - 1.5 * PI).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        assert!(resolve(&["sweep", "--var", "lambda"]).is_err());
    }

    #[test]
    fn window_and_resolution_parsing() {
        assert_eq!(parse_resolution("64x32").unwrap(), (64, 32));
        assert_eq!(parse_resolution("50").unwrap(), (50, 50));
        assert!(parse_resolution("a").is_err());
        assert_eq!(parse_window("-1,1").unwrap(), GridWindow::square(-1.0, 1.0));
        assert_eq!(parse_window("0,1,2,3").unwrap().k2, (2.0, 3.0));
        assert!(parse_window("0,1,2").is_err());
    }

    #[test]
    fn seventeen_significant_digits() {
        let x = 0.1 + 0.2;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
        assert_eq!(num(x), "3.0000000000000004e-1");
    }
}
