//! `wkbtm`: transmission sweeps and error studies from the command line.
//!
//! Exit codes: 0 on success, 2 for bad configuration, 3 for numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wkbtm::experiments::{
    error_csv, run_error_analysis, run_n_sweep, run_tc_sweep, tc_csv, to_json, write_output, Averaging,
    EnergyGrid, ErrorConfig, OutputFormat, PotentialSpec, SweepConfig,
};
use wkbtm::polar::DEFAULT_STEPS;
use wkbtm::{Domain, Error, Method};

#[derive(Parser, Debug)]
#[command(name = "wkbtm", version, about = "Transmission coefficients of 1-D barriers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// TC versus energy for one method.
    Tc {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "tm-wkb1")]
        method: String,
    },
    /// Relative errors against the exact reference, with averages and ratios.
    Error {
        #[command(flatten)]
        common: Common,
        /// Comma-separated methods; defaults to the five numerical solvers.
        #[arg(long)]
        method: Option<String>,
        #[arg(long, default_value = "arithmetic")]
        average: String,
    },
    /// Error versus segment count for one transfer-matrix method.
    Nsweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "tm-wkb1")]
        method: String,
        /// Ascending comma-separated segment counts.
        #[arg(long, default_value = "1000,5000,10000,50000,100000")]
        nlist: String,
        #[arg(long, default_value = "arithmetic")]
        average: String,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// parabolic, sech2, constant or table:<path>
    #[arg(long, default_value = "parabolic")]
    potential: String,
    /// Parabola curvature (J/m²).
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// sech² depth (J).
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<f64>,
    /// sech² width (m).
    #[arg(long, allow_hyphen_values = true)]
    width: Option<f64>,
    /// Constant potential level (J).
    #[arg(long, allow_hyphen_values = true)]
    level: Option<f64>,
    #[arg(long, default_value_t = -2e-9, allow_hyphen_values = true)]
    xmin: f64,
    #[arg(long, default_value_t = 2e-9, allow_hyphen_values = true)]
    xmax: f64,
    #[arg(long, default_value_t = -2e-19, allow_hyphen_values = true)]
    emin: f64,
    #[arg(long, default_value_t = 2e-19, allow_hyphen_values = true)]
    emax: f64,
    #[arg(long, default_value_t = 101)]
    epoints: usize,
    /// Transfer-matrix segments.
    #[arg(long, default_value_t = 100_000)]
    nsteps: usize,
    /// RK4 steps for de-pw and de-wkb.
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    de_steps: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
}

impl Common {
    fn potential(&self) -> Result<PotentialSpec, Error> {
        let mut spec: PotentialSpec = self.potential.parse()?;
        match &mut spec {
            PotentialSpec::Parabolic { alpha } => {
                if let Some(a) = self.alpha {
                    *alpha = a;
                }
            }
            PotentialSpec::Sech2 { v0, width } => {
                if let Some(v) = self.v0 {
                    *v0 = v;
                }
                if let Some(w) = self.width {
                    *width = w;
                }
            }
            PotentialSpec::Constant { level } => {
                if let Some(l) = self.level {
                    *level = l;
                }
            }
            PotentialSpec::Table { .. } => {}
        }
        Ok(spec)
    }

    fn domain(&self) -> Result<Domain, Error> {
        Domain::new(self.xmin, self.xmax)
    }

    fn energies(&self) -> EnergyGrid {
        EnergyGrid {
            min: self.emin,
            max: self.emax,
            count: self.epoints,
        }
    }

    fn sweep(&self, method: Method) -> Result<SweepConfig, Error> {
        Ok(SweepConfig {
            potential: self.potential()?,
            domain: self.domain()?,
            method,
            n_steps: self.nsteps,
            de_steps: self.de_steps,
            energies: self.energies(),
            output: self.out.clone(),
        })
    }

    fn emit(&self, text: String) -> Result<(), Error> {
        match &self.out {
            Some(path) => write_output(path, &text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn parse_methods(list: &str) -> Result<Vec<Method>, Error> {
    list.split(',').map(|m| m.trim().parse()).collect()
}

fn parse_nlist(list: &str) -> Result<Vec<usize>, Error> {
    list.split(',')
        .map(|n| {
            let n = n.trim().replace('_', "");
            n.parse::<usize>()
                .or_else(|_| n.parse::<f64>().map(|f| f as usize))
                .map_err(|_| Error::Config(format!("bad segment count `{n}`")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Tc { common, method } => {
            let format: OutputFormat = common.format.parse()?;
            let rows = run_tc_sweep(&common.sweep(method.parse()?)?)?;
            let failed = rows.iter().filter(|r| r.tc.is_none()).count();
            if failed > 0 {
                eprintln!("{failed} of {} energies failed", rows.len());
                if let Some(r) = rows.iter().find(|r| r.error.is_some()) {
                    eprintln!(
                        "first failure at E = {:e} J: {}",
                        r.energy,
                        r.error.as_deref().unwrap_or("")
                    );
                }
            }
            let text = match format {
                OutputFormat::Csv => tc_csv(&rows),
                OutputFormat::Json => to_json(&rows)?,
            };
            common.emit(text)?;
            if failed == rows.len() {
                return Err(Error::SweepFailed { failed });
            }
            Ok(())
        }
        Command::Error {
            common,
            method,
            average,
        } => {
            let format: OutputFormat = common.format.parse()?;
            let methods = match method {
                Some(m) => parse_methods(&m)?,
                None => Method::NUMERICAL.to_vec(),
            };
            let cfg = ErrorConfig {
                potential: common.potential()?,
                domain: common.domain()?,
                methods,
                n_steps: common.nsteps,
                de_steps: common.de_steps,
                energies: common.energies(),
                averaging: average.parse::<Averaging>()?,
            };
            let report = run_error_analysis(&cfg)?;
            for s in &report.summaries {
                match s.average {
                    Some(a) => eprintln!(
                        "{:<8} N={:<7} avg {:.4e}  ({} points)",
                        s.method, s.n_steps, a, s.used
                    ),
                    None => eprintln!("{:<8} N={:<7} no usable points", s.method, s.n_steps),
                }
            }
            for r in &report.ratios {
                eprintln!("{}/{} = {:.2}", r.numerator, r.denominator, r.value);
            }
            let text = match format {
                OutputFormat::Csv => error_csv(&report.rows),
                OutputFormat::Json => to_json(&report)?,
            };
            common.emit(text)
        }
        Command::Nsweep {
            common,
            method,
            nlist,
            average,
        } => {
            let format: OutputFormat = common.format.parse()?;
            let cfg = common.sweep(method.parse()?)?;
            let report = run_n_sweep(&cfg, &parse_nlist(&nlist)?, average.parse()?)?;
            for s in &report.summaries {
                if let Some(a) = s.average {
                    eprintln!("{:<8} N={:<7} avg {:.4e}", s.method, s.n_steps, a);
                }
            }
            let text = match format {
                OutputFormat::Csv => error_csv(&report.rows),
                OutputFormat::Json => to_json(&report)?,
            };
            common.emit(text)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
