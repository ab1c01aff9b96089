//! Energy sweeps, error statistics against the closed-form references, and
//! their CSV/JSON serialization.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{exact_tc_for, wkb_tc};
use crate::method::{Method, TcResult};
use crate::polar::{compute_tc_de, PolarBoundary, DEFAULT_STEPS};
use crate::potential::{load_table, make_constant, make_parabolic, make_sech2, Domain, Potential};
use crate::transfer::{compute_tc_tm, BoundaryKind};

/// Exact values below this are left out of averaged errors.
pub const EXACT_FLOOR: f64 = 1e-12;

/// Which potential to build. Parameters are in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PotentialSpec {
    Parabolic { alpha: f64 },
    Sech2 { v0: f64, width: f64 },
    Constant { level: f64 },
    Table { path: PathBuf },
}

impl PotentialSpec {
    pub fn parabolic() -> Self {
        PotentialSpec::Parabolic { alpha: 1.0 }
    }

    pub fn sech2() -> Self {
        PotentialSpec::Sech2 {
            v0: 1e-18,
            width: 1e-9,
        }
    }

    /// Builds the potential. Tables carry their own domain and ignore `domain`.
    pub fn build(&self, domain: Domain) -> Result<Box<dyn Potential>> {
        Ok(match self {
            PotentialSpec::Parabolic { alpha } => Box::new(make_parabolic(*alpha, domain)?),
            PotentialSpec::Sech2 { v0, width } => Box::new(make_sech2(*v0, *width, domain)?),
            PotentialSpec::Constant { level } => Box::new(make_constant(*level, domain)?),
            PotentialSpec::Table { path } => Box::new(load_table(path)?),
        })
    }
}

impl FromStr for PotentialSpec {
    type Err = Error;

    /// `parabolic`, `sech2`, `constant` or `table:<path>`, with default parameters.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parabolic" => Ok(Self::parabolic()),
            "sech2" => Ok(Self::sech2()),
            "constant" => Ok(PotentialSpec::Constant { level: 0.0 }),
            _ => match s.strip_prefix("table:") {
                Some(p) if !p.is_empty() => Ok(PotentialSpec::Table { path: p.into() }),
                _ => Err(Error::Config(format!(
                    "unknown potential `{s}`; expected parabolic, sech2, constant or table:<path>"
                ))),
            },
        }
    }
}

/// `count` uniform energies from `min` to `max`, both included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for EnergyGrid {
    fn default() -> Self {
        EnergyGrid {
            min: -2e-19,
            max: 2e-19,
            count: 101,
        }
    }
}

impl EnergyGrid {
    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::Config(format!(
                "energy grid needs at least 2 points, got {}",
                self.count
            )));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::Config(format!(
                "energy grid must be increasing: min = {:e}, max = {:e}",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / last;
                // two-sided form: exact endpoints, exact zero midpoint on symmetric grids
                self.min * (1.0 - t) + self.max * t
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub potential: PotentialSpec,
    pub domain: Domain,
    pub method: Method,
    /// transfer-matrix segment count
    pub n_steps: usize,
    /// RK4 steps for the polar-form solvers
    pub de_steps: usize,
    pub energies: EnergyGrid,
    pub output: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            potential: PotentialSpec::parabolic(),
            domain: Domain::standard(),
            method: Method::TmWkb1,
            n_steps: 100_000,
            de_steps: DEFAULT_STEPS,
            energies: EnergyGrid::default(),
            output: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.energies.validate()?;
        if self.n_steps == 0 {
            return Err(Error::Config("n_steps must be at least 1".into()));
        }
        if self.de_steps == 0 {
            return Err(Error::Config("de_steps must be at least 1".into()));
        }
        Ok(())
    }

    /// Step count recorded for this config's method.
    pub fn steps_for(&self, method: Method) -> usize {
        if method.is_polar_ode() {
            self.de_steps
        } else if method.is_transfer_matrix() {
            self.n_steps
        } else {
            0
        }
    }
}

/// One transmission coefficient by any method.
pub fn compute_tc(
    potential: &dyn Potential,
    method: Method,
    energy: f64,
    n_steps: usize,
    de_steps: usize,
) -> Result<TcResult> {
    if let Some(kind) = BoundaryKind::from_method(method) {
        return compute_tc_tm(potential, energy, n_steps, kind);
    }
    if let Some(kind) = PolarBoundary::from_method(method) {
        return compute_tc_de(potential, energy, kind, de_steps);
    }
    let tc = match method {
        Method::WkbFormula => wkb_tc(potential, energy)?,
        _ => exact_tc_for(potential, energy)?,
    };
    Ok(TcResult {
        energy,
        method,
        n_steps: 0,
        tc,
    })
}

/// A sweep row; failed energies keep their error message and the sweep goes on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub energy: f64,
    pub method: Method,
    pub n_steps: usize,
    pub tc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRow {
    fn from_result(energy: f64, method: Method, n_steps: usize, r: Result<TcResult>) -> Self {
        match r {
            Ok(t) => SweepRow {
                energy,
                method,
                n_steps,
                tc: Some(t.tc),
                error: None,
            },
            Err(e) => SweepRow {
                energy,
                method,
                n_steps,
                tc: None,
                error: Some(e.to_string()),
            },
        }
    }
}

fn sweep_with(
    potential: &dyn Potential,
    method: Method,
    energies: &[f64],
    n_steps: usize,
    de_steps: usize,
) -> Vec<SweepRow> {
    let steps = if method.is_polar_ode() {
        de_steps
    } else if method.is_transfer_matrix() {
        n_steps
    } else {
        0
    };
    energies
        .par_iter()
        .map(|&e| {
            SweepRow::from_result(
                e,
                method,
                steps,
                compute_tc(potential, method, e, n_steps, de_steps),
            )
        })
        .collect()
}

/// Transmission coefficient at every grid energy, in grid order.
pub fn run_tc_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let pot = config.potential.build(config.domain)?;
    if config.method == Method::Exact {
        // refuse up front rather than filling the table with error rows
        exact_tc_for(pot.as_ref(), config.energies.min)?;
    }
    Ok(sweep_with(
        pot.as_ref(),
        config.method,
        &config.energies.points(),
        config.n_steps,
        config.de_steps,
    ))
}

/// How per-energy errors are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    #[default]
    Arithmetic,
    Geometric,
}

impl FromStr for Averaging {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arithmetic" => Ok(Averaging::Arithmetic),
            "geometric" => Ok(Averaging::Geometric),
            _ => Err(Error::Config(format!(
                "unknown averaging `{s}`; expected arithmetic or geometric"
            ))),
        }
    }
}

impl Averaging {
    /// `None` for an empty set.
    pub fn mean(self, values: &[f64]) -> Option<f64> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        Some(match self {
            Averaging::Arithmetic => values.iter().sum::<f64>() / n,
            Averaging::Geometric => {
                if values.contains(&0.0) {
                    0.0
                } else {
                    (values.iter().map(|v| v.ln()).sum::<f64>() / n).exp()
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub energy: f64,
    pub method: Method,
    pub n_steps: usize,
    pub tc: Option<f64>,
    pub tc_exact: f64,
    /// `|TC - TC_exact| / TC_exact`
    pub rel_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub n_steps: usize,
    /// energy-averaged relative error over the usable points
    pub average: Option<f64>,
    pub max: Option<f64>,
    /// points that entered the average
    pub used: usize,
    /// failed points plus points with `TC_exact < EXACT_FLOOR`
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRatio {
    pub numerator: Method,
    pub denominator: Method,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub averaging: Averaging,
    pub rows: Vec<ErrorRow>,
    pub summaries: Vec<MethodSummary>,
    /// `avg(numerator) / avg(denominator)`: how much smaller the second method's error is
    pub ratios: Vec<ErrorRatio>,
}

impl ErrorReport {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    pub fn average(&self, method: Method) -> Option<f64> {
        self.summary(method).and_then(|s| s.average)
    }

    pub fn ratio(&self, numerator: Method, denominator: Method) -> Option<f64> {
        Some(self.average(numerator)? / self.average(denominator)?)
    }
}

/// Method pairs reported as improvement ratios.
pub const RATIO_PAIRS: [(Method, Method); 3] = [
    (Method::TmPw, Method::TmWkb1),
    (Method::TmWkb1, Method::TmWkb3),
    (Method::TmPw, Method::TmWkb3),
];

/// Inputs of [`run_error_analysis`]: one potential, several methods, one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorConfig {
    pub potential: PotentialSpec,
    pub domain: Domain,
    pub methods: Vec<Method>,
    pub n_steps: usize,
    pub de_steps: usize,
    pub energies: EnergyGrid,
    pub averaging: Averaging,
}

impl Default for ErrorConfig {
    fn default() -> Self {
        ErrorConfig {
            potential: PotentialSpec::parabolic(),
            domain: Domain::standard(),
            methods: Method::NUMERICAL.to_vec(),
            n_steps: 100_000,
            de_steps: DEFAULT_STEPS,
            energies: EnergyGrid::default(),
            averaging: Averaging::Arithmetic,
        }
    }
}

fn exact_values(pot: &dyn Potential, energies: &[f64]) -> Result<Vec<f64>> {
    energies.iter().map(|&e| exact_tc_for(pot, e)).collect()
}

fn error_rows(rows: Vec<SweepRow>, exact: &[f64]) -> Vec<ErrorRow> {
    rows.into_iter()
        .zip(exact)
        .map(|(r, &x)| ErrorRow {
            energy: r.energy,
            method: r.method,
            n_steps: r.n_steps,
            tc: r.tc,
            tc_exact: x,
            rel_error: r.tc.map(|t| ((t - x) / x).abs()),
            error: r.error,
        })
        .collect()
}

fn summarize(method: Method, n_steps: usize, rows: &[ErrorRow], averaging: Averaging) -> MethodSummary {
    let usable: Vec<f64> = rows
        .iter()
        .filter(|r| r.tc_exact >= EXACT_FLOOR)
        .filter_map(|r| r.rel_error)
        .collect();
    MethodSummary {
        method,
        n_steps,
        average: averaging.mean(&usable),
        max: usable.iter().cloned().reduce(f64::max),
        used: usable.len(),
        excluded: rows.len() - usable.len(),
    }
}

/// Relative errors of each method against the exact reference, their
/// energy averages and the standard improvement ratios.
pub fn run_error_analysis(config: &ErrorConfig) -> Result<ErrorReport> {
    config.energies.validate()?;
    if config.methods.is_empty() {
        return Err(Error::Config("no methods selected".into()));
    }
    let pot = config.potential.build(config.domain)?;
    let energies = config.energies.points();
    let exact = exact_values(pot.as_ref(), &energies)?;

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &method in &config.methods {
        let sweep = sweep_with(pot.as_ref(), method, &energies, config.n_steps, config.de_steps);
        let steps = sweep.first().map_or(0, |r| r.n_steps);
        let mrows = error_rows(sweep, &exact);
        summaries.push(summarize(method, steps, &mrows, config.averaging));
        rows.extend(mrows);
    }
    let mut report = ErrorReport {
        averaging: config.averaging,
        rows,
        summaries,
        ratios: Vec::new(),
    };
    report.ratios = RATIO_PAIRS
        .iter()
        .filter_map(|&(a, b)| {
            report.ratio(a, b).map(|value| ErrorRatio {
                numerator: a,
                denominator: b,
                value,
            })
        })
        .collect();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NSweepSummary {
    pub method: Method,
    pub n_steps: usize,
    pub average: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NSweepReport {
    pub averaging: Averaging,
    /// rows for every N in order, then the polar-form reference rows
    pub rows: Vec<ErrorRow>,
    pub summaries: Vec<NSweepSummary>,
}

impl NSweepReport {
    pub fn average(&self, method: Method, n_steps: usize) -> Option<f64> {
        self.summaries
            .iter()
            .find(|s| s.method == method && s.n_steps == n_steps)
            .and_then(|s| s.average)
    }
}

/// Error versus segment count for `config.method`, with a DE-WKB reference
/// run at `config.de_steps`.
pub fn run_n_sweep(config: &SweepConfig, n_list: &[usize], averaging: Averaging) -> Result<NSweepReport> {
    config.validate()?;
    if n_list.is_empty() {
        return Err(Error::Config("empty N list".into()));
    }
    if n_list.contains(&0) || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!(
            "N list must be positive and strictly ascending: {n_list:?}"
        )));
    }
    let pot = config.potential.build(config.domain)?;
    let energies = config.energies.points();
    let exact = exact_values(pot.as_ref(), &energies)?;

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let mut push = |method: Method, steps: usize, sweep: Vec<SweepRow>| {
        let r = error_rows(sweep, &exact);
        summaries.push(NSweepSummary {
            method,
            n_steps: steps,
            average: summarize(method, steps, &r, averaging).average,
        });
        rows.extend(r);
    };
    for &n in n_list {
        push(
            config.method,
            n,
            sweep_with(pot.as_ref(), config.method, &energies, n, config.de_steps),
        );
    }
    let reference = Method::DeWkb;
    push(
        reference,
        config.de_steps,
        sweep_with(pot.as_ref(), reference, &energies, 0, config.de_steps),
    );
    Ok(NSweepReport {
        averaging,
        rows,
        summaries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!(
                "unknown format `{s}`; expected csv or json"
            ))),
        }
    }
}

pub const TC_HEADER: &str = "energy_J,method,n_steps,tc";
pub const ERROR_HEADER: &str = "energy_J,method,n_steps,tc,tc_exact,rel_error";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), num)
}

/// Failed points are written with `tc = nan`.
pub fn tc_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(TC_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", num(r.energy), r.method, r.n_steps, opt(r.tc));
    }
    out
}

pub fn error_csv(rows: &[ErrorRow]) -> String {
    let mut out = String::from(ERROR_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            num(r.energy),
            r.method,
            r.n_steps,
            opt(r.tc),
            num(r.tc_exact),
            opt(r.rel_error)
        );
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Config(format!("json encoding failed: {e}")))
}

pub fn write_output(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(method: Method) -> SweepConfig {
        SweepConfig {
            method,
            n_steps: 2000,
            de_steps: 20_000,
            energies: EnergyGrid {
                min: -2e-19,
                max: 2e-19,
                count: 5,
            },
            ..Default::default()
        }
    }

    #[test]
    fn grid_points() {
        let g = EnergyGrid::default().points();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], -2e-19);
        assert_eq!(g[50], 0.0);
        assert_eq!(g[100], 2e-19);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        for count in [3, 11, 21, 41] {
            let g = EnergyGrid {
                count,
                ..EnergyGrid::default()
            }
            .points();
            assert_eq!(g[count / 2], 0.0, "count {count}");
        }
    }

    #[test]
    fn grid_validation() {
        for bad in [
            EnergyGrid {
                min: 0.0,
                max: 1.0,
                count: 1,
            },
            EnergyGrid {
                min: 1.0,
                max: 0.0,
                count: 5,
            },
            EnergyGrid {
                min: f64::NAN,
                max: 1.0,
                count: 5,
            },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))));
        }
        let mut c = quick(Method::Exact);
        c.energies.count = 0;
        assert!(run_tc_sweep(&c).unwrap_err().is_config());
    }

    #[test]
    fn exact_sweep_endpoints() {
        let rows = run_tc_sweep(&quick(Method::Exact)).unwrap();
        assert_eq!(rows.len(), 5);
        assert!((rows[0].tc.unwrap() - 3.2e-4).abs() < 0.05e-4);
        assert!((rows[4].tc.unwrap() - 0.9997).abs() < 1e-4);
    }

    #[test]
    fn failed_points_become_rows() {
        // the WKB formula has no barrier above its top
        let rows = run_tc_sweep(&quick(Method::WkbFormula)).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows[0].tc.is_some());
        assert!(rows[4].tc.is_none() && rows[4].error.is_some());
        let csv = tc_csv(&rows);
        assert!(csv.lines().last().unwrap().ends_with(",nan"));
    }

    #[test]
    fn potential_spec_parsing() {
        assert_eq!(
            "parabolic".parse::<PotentialSpec>().unwrap(),
            PotentialSpec::parabolic()
        );
        assert_eq!("sech2".parse::<PotentialSpec>().unwrap(), PotentialSpec::sech2());
        assert_eq!(
            "table:/tmp/v.dat".parse::<PotentialSpec>().unwrap(),
            PotentialSpec::Table {
                path: "/tmp/v.dat".into()
            }
        );
        assert!("table:".parse::<PotentialSpec>().is_err());
        assert!("square".parse::<PotentialSpec>().is_err());
    }

    #[test]
    fn no_reference_for_constant() {
        let cfg = ErrorConfig {
            potential: PotentialSpec::Constant { level: 0.0 },
            ..Default::default()
        };
        let err = run_error_analysis(&cfg).unwrap_err();
        assert!(err.to_string().contains("parabolic, sech2"));
        assert!(err.is_config());
    }

    #[test]
    fn csv_shape_and_determinism() {
        let cfg = quick(Method::TmWkb1);
        let a = tc_csv(&run_tc_sweep(&cfg).unwrap());
        let b = tc_csv(&run_tc_sweep(&cfg).unwrap());
        assert_eq!(a, b);
        let mut lines = a.lines();
        assert_eq!(lines.next(), Some(TC_HEADER));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "-2.0000000000000000e-19");
        assert_eq!(first[1], "tm-wkb1");
        assert_eq!(first[2], "2000");
        assert_eq!(
            first[3].parse::<f64>().unwrap().to_bits(),
            first[3].parse::<f64>().unwrap().to_bits()
        );
    }

    #[test]
    fn small_error_report() {
        let cfg = ErrorConfig {
            n_steps: 2000,
            de_steps: 20_000,
            energies: EnergyGrid {
                min: -1e-19,
                max: 1e-19,
                count: 5,
            },
            ..Default::default()
        };
        let rep = run_error_analysis(&cfg).unwrap();
        assert_eq!(rep.rows.len(), 25);
        assert_eq!(rep.summaries.len(), 5);
        assert_eq!(rep.ratios.len(), 3);
        assert!(rep.rows.iter().all(|r| r.rel_error.unwrap() >= 0.0));
        assert!(rep.average(Method::TmWkb1).unwrap() < rep.average(Method::TmPw).unwrap());
        let csv = error_csv(&rep.rows);
        assert_eq!(csv.lines().next(), Some(ERROR_HEADER));
        assert_eq!(csv.lines().count(), 26);
        let json = to_json(&rep).unwrap();
        let back: ErrorReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn averaging_modes() {
        assert_eq!(Averaging::Arithmetic.mean(&[1.0, 4.0]), Some(2.5));
        assert_eq!(Averaging::Geometric.mean(&[1.0, 4.0]), Some(2.0));
        assert_eq!(Averaging::Geometric.mean(&[0.0, 4.0]), Some(0.0));
        assert_eq!(Averaging::Arithmetic.mean(&[]), None);
    }

    #[test]
    fn n_sweep_shape() {
        let cfg = quick(Method::TmPw);
        let rep = run_n_sweep(&cfg, &[100], Averaging::Arithmetic).unwrap();
        // one N plus the reference
        assert_eq!(rep.summaries.len(), 2);
        assert_eq!(rep.rows.len(), 10);
        assert_eq!(rep.summaries[1].method, Method::DeWkb);
        assert!(run_n_sweep(&cfg, &[100, 100], Averaging::Arithmetic).is_err());
        assert!(run_n_sweep(&cfg, &[], Averaging::Arithmetic).is_err());
    }
}
