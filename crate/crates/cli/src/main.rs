use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use thiserror::Error;

use fermi_bisect::bogoliubov::{BogolubovPair, Calibration};
use fermi_bisect::detector::{write_correlation_csv, write_registration_csv};
use fermi_bisect::field::{FieldConfig, Region};
use fermi_bisect::povm::{entangled_table, product_table, JointTable};
use fermi_bisect::spectrum::{correlation_matrix, probe_truncation, spectrum, write_spectra_csv, AlphaContraction};
use fermi_bisect::verify;

#[derive(Debug, Error)]
enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("compute error: {0}")]
    Compute(#[from] fermi_bisect::Error),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "fermi-bisect", version, about = "Vacuum noise of a bisected massive Fermi field, and smeared detectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output file (stdout if absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format; povm defaults to json, everything else to csv
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Side {
    Left,
    Right,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Vacuum occupation of subsection modes k = 1..k_max, one column per muL
    Spectrum(SpectrumArgs),
    /// Left/Right filling-number correlation matrix
    Correlation(CorrelationArgs),
    /// Truncated transform coefficients for one subsection
    Bogoliubov(BogoliubovArgs),
    /// One- and two-particle registration probability versus detector offset
    Detector(DetectorArgs),
    /// Joint registration correlation on an (a, b) grid
    JointCorrelation(JointArgs),
    /// Joint probability table for two measured subsystems
    Povm(PovmArgs),
    /// Run the invariant suite; exit 2 on any failure
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    /// Section sizes in Compton units, comma separated
    #[arg(long = "mu-l", value_delimiter = ',', default_values_t = [0.1, 1.0, 10.0])]
    mu_l: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    k_max: usize,
    /// Section cutoff N (default: convergence probe)
    #[arg(long)]
    truncation: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    time: f64,
}

#[derive(Args, Debug)]
struct CorrelationArgs {
    #[arg(long = "mu-l", default_value_t = 1.0)]
    mu_l: f64,
    #[arg(long, default_value_t = 16)]
    k_max: usize,
    #[arg(long)]
    truncation: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    time: f64,
    /// Contract alpha over even section columns only
    #[arg(long)]
    even_columns: bool,
}

#[derive(Args, Debug)]
struct BogoliubovArgs {
    #[arg(long = "mu-l", default_value_t = 1.0)]
    mu_l: f64,
    #[arg(long, default_value_t = 16)]
    truncation: usize,
    #[arg(long, default_value_t = 0.0)]
    time: f64,
    #[arg(long, value_enum, default_value_t = Side::Left)]
    region: Side,
}

#[derive(Args, Debug)]
struct DetectorArgs {
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Detector offsets |beta| as start:stop:count
    #[arg(long, default_value = "0:4:50")]
    grid: String,
}

#[derive(Args, Debug)]
struct JointArgs {
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Axis values for both a and b, as start:stop:count
    #[arg(long, default_value = "0:3:13")]
    grid: String,
}

#[derive(Args, Debug)]
struct PovmArgs {
    /// Entangled mixture with weight p on (a1, b1)
    #[arg(long, conflicts_with = "product")]
    entangled: Option<f64>,
    /// Product state: pa,pb
    #[arg(long, value_delimiter = ',')]
    product: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 20_240_601)]
    seed: u64,
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || CliError::Config(format!("--grid expects start:stop:count, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok((0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect())
}

/// Metadata plus a CSV body, renderable as CSV or JSON.
struct Table {
    meta: Vec<(&'static str, String)>,
    body: String,
}

impl Table {
    fn new(command: &str) -> Self {
        Self {
            meta: vec![("command", command.to_string()), ("version", env!("CARGO_PKG_VERSION").to_string())],
            body: String::new(),
        }
    }

    fn meta(&mut self, key: &'static str, value: impl ToString) {
        self.meta.push((key, value.to_string()));
    }

    fn fill(&mut self, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.body = String::from_utf8(buf).expect("writers emit ascii");
        Ok(())
    }

    fn render(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Csv => {
                for (k, v) in &self.meta {
                    writeln!(out, "# {k} = {v}")?;
                }
                out.write_all(self.body.as_bytes())?;
            }
            Format::Json => {
                let mut lines = self.body.lines();
                let columns: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
                let rows: Vec<Value> = lines
                    .map(|l| {
                        Value::Array(
                            l.split(',')
                                .map(|c| c.parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number))
                                .collect(),
                        )
                    })
                    .collect();
                let meta: Map<String, Value> =
                    self.meta.iter().map(|(k, v)| (k.to_string(), Value::String(v.clone()))).collect();
                let doc = json!({ "meta": meta, "columns": columns, "rows": rows });
                serde_json::to_writer(&mut *out, &doc).map_err(io::Error::from)?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn run_spectrum(a: &SpectrumArgs) -> Result<Table> {
    if a.k_max < 1 || a.mu_l.is_empty() {
        return Err(CliError::Config("need --k-max >= 1 and at least one --mu-l".into()));
    }
    let cal = Calibration::default();
    let ks: Vec<i64> = (1..=a.k_max as i64).collect();
    let mut spectra = Vec::new();
    for &mu in &a.mu_l {
        let base = FieldConfig::with_mu_l(mu, 1)?.at_time(a.time);
        let n = match a.truncation {
            Some(n) => n,
            None => probe_truncation(&ks, &base, &cal, 1e-3)?,
        };
        spectra.push(spectrum(a.k_max, &base.with_truncation(n), &cal)?);
    }
    let mut t = Table::new("spectrum");
    t.meta("mu_l", list(&a.mu_l));
    t.meta("k_max", a.k_max);
    t.meta("truncation", spectra.iter().map(|s| s.truncation_used.to_string()).collect::<Vec<_>>().join(","));
    t.meta("time", a.time);
    t.meta("half_length", 1);
    t.meta("occupation", "normalized quasi-mode");
    t.fill(|buf| Ok(write_spectra_csv(&spectra, buf)?))?;
    Ok(t)
}

fn run_correlation(a: &CorrelationArgs) -> Result<Table> {
    if a.k_max < 1 {
        return Err(CliError::Config("--k-max must be >= 1".into()));
    }
    let cal = Calibration::default();
    let base = FieldConfig::with_mu_l(a.mu_l, 1)?.at_time(a.time);
    let n = match a.truncation {
        Some(n) => n,
        None => probe_truncation(&(1..=a.k_max as i64).collect::<Vec<_>>(), &base, &cal, 1e-3)?,
    };
    let contraction = if a.even_columns { AlphaContraction::EvenColumns } else { AlphaContraction::Full };
    let d = correlation_matrix(a.k_max, &base.with_truncation(n), &cal, contraction)?;
    let mut t = Table::new("correlation");
    t.meta("mu_l", a.mu_l);
    t.meta("k_max", a.k_max);
    t.meta("truncation", n);
    t.meta("time", a.time);
    t.meta("contraction", if a.even_columns { "even-columns" } else { "full" });
    t.meta("near_diagonal_ratio", format!("{:.6e}", d.near_diagonal_ratio()));
    t.fill(|buf| Ok(d.write_csv(buf)?))?;
    Ok(t)
}

fn run_bogoliubov(a: &BogoliubovArgs) -> Result<Table> {
    let region = match a.region {
        Side::Left => Region::Left,
        Side::Right => Region::Right,
    };
    let cfg = FieldConfig::with_mu_l(a.mu_l, a.truncation)?.at_time(a.time);
    let pair = BogolubovPair::build(region, &cfg, &Calibration::default())?;
    let mut t = Table::new("bogoliubov");
    t.meta("mu_l", a.mu_l);
    t.meta("truncation", a.truncation);
    t.meta("time", a.time);
    t.meta("region", format!("{:?}", a.region).to_lowercase());
    t.fill(|buf| Ok(pair.write_csv(buf)?))?;
    Ok(t)
}

fn run_detector(a: &DetectorArgs) -> Result<Table> {
    let grid = parse_grid(&a.grid)?;
    let mut t = Table::new("detector");
    t.meta("sigma", a.sigma);
    t.meta("grid", &a.grid);
    t.meta("state", "origin level 0 (p_one); origin levels 0 and 1 (p_two)");
    t.fill(|buf| Ok(write_registration_csv(a.sigma, &grid, buf)?))?;
    Ok(t)
}

fn run_joint(a: &JointArgs) -> Result<Table> {
    let grid = parse_grid(&a.grid)?;
    let mut t = Table::new("joint-correlation");
    t.meta("sigma", a.sigma);
    t.meta("grid", &a.grid);
    t.meta("radial_mean_samples", 64);
    t.fill(|buf| Ok(write_correlation_csv(a.sigma, &grid, buf)?))?;
    Ok(t)
}

fn povm_table(a: &PovmArgs) -> Result<JointTable> {
    match (a.entangled, &a.product) {
        (Some(p), None) => Ok(entangled_table(p)?),
        (None, Some(v)) if v.len() == 2 => Ok(product_table(v[0], v[1])?),
        _ => Err(CliError::Config("povm needs --entangled P or --product PA,PB".into())),
    }
}

fn run(cli: &Cli, out: &mut dyn Write) -> Result<bool> {
    let format = cli.format.unwrap_or(Format::Csv);
    let table = match &cli.command {
        Command::Spectrum(a) => run_spectrum(a)?,
        Command::Correlation(a) => run_correlation(a)?,
        Command::Bogoliubov(a) => run_bogoliubov(a)?,
        Command::Detector(a) => run_detector(a)?,
        Command::JointCorrelation(a) => run_joint(a)?,
        Command::Povm(a) => {
            let table = povm_table(a)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => {
                    serde_json::to_writer(&mut *out, &table).map_err(io::Error::from)?;
                    writeln!(out)?;
                }
                Format::Csv => {
                    writeln!(out, "p11,p12,p21,p22")?;
                    writeln!(out, "{},{},{},{}", table.p11, table.p12, table.p21, table.p22)?;
                }
            }
            return Ok(true);
        }
        Command::Verify(a) => {
            let reports = verify::run_all(a.seed);
            for r in &reports {
                writeln!(out, "{}", r.line())?;
            }
            return Ok(reports.iter().all(|r| r.passed));
        }
    };
    table.render(format, out)?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = (|| -> Result<bool> {
        let ok = match &cli.out {
            Some(path) => {
                let mut w = BufWriter::new(File::create(path)?);
                let ok = run(&cli, &mut w)?;
                w.flush()?;
                ok
            }
            None => {
                let stdout = io::stdout();
                let mut w = stdout.lock();
                let ok = run(&cli, &mut w)?;
                w.flush()?;
                ok
            }
        };
        Ok(ok)
    })();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("2:9:1").unwrap(), vec![2.0]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a:1:3").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
