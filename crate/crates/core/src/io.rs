//! File formats: price CSV in, JSON config in, report/chain/histogram CSVs out.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::calibrate::CalibrationReport;
use crate::error::{Error, Result};
use crate::priors::PriorConfig;
use crate::sde::SimulatedPath;

/// Step size implied by an integer `step` column.
pub const TRADING_DAY: f64 = 1.0 / 252.0;
pub const DEFAULT_BINS: usize = 50;
const SPACING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub prices: Vec<f64>,
    pub dt: f64,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io { path: path.display().to_string(), msg: e.to_string() }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Parses `time,price` (years) or `step,price` (integer steps of 1/252 year).
/// Other columns are ignored; `time` wins when both index columns exist.
/// Row numbers in errors count data rows from 1.
pub fn parse_prices<R: std::io::Read>(reader: R) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Ingestion { row: 0, msg: e.to_string() })?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let (time_col, by_step) = match (find("time"), find("step")) {
        (Some(c), _) => (c, false),
        (None, Some(c)) => (c, true),
        (None, None) => (usize::MAX, false),
    };
    let price_col = find("price");
    let (time_col, price_col) = match price_col {
        Some(p) if time_col != usize::MAX => (time_col, p),
        _ => {
            return Err(Error::Ingestion {
                row: 0,
                msg: format!(
                    "header needs a `time` or `step` column and a `price` column, got `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            })
        }
    };
    let mut times = Vec::new();
    let mut prices = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Ingestion { row, msg: e.to_string() })?;
        let field = |j: usize| rec.get(j).unwrap_or("");
        let (tf, pf) = (field(time_col), field(price_col));
        let t = if by_step {
            tf.parse::<i64>()
                .map(|s| s as f64)
                .map_err(|e| Error::Ingestion { row, msg: format!("step `{tf}`: {e}") })?
        } else {
            tf.parse::<f64>().map_err(|e| Error::Ingestion { row, msg: format!("time `{tf}`: {e}") })?
        };
        let p: f64 = pf.parse().map_err(|e| Error::Ingestion { row, msg: format!("price `{pf}`: {e}") })?;
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Ingestion { row, msg: format!("price must be > 0, got {p}") });
        }
        if let Some(&prev) = times.last() {
            if !(t > prev) {
                return Err(Error::Ingestion { row, msg: format!("time {t} does not increase") });
            }
        }
        times.push(t);
        prices.push(p);
    }
    if prices.len() < 3 {
        return Err(Error::Ingestion { row: prices.len(), msg: format!("need at least 3 rows, got {}", prices.len()) });
    }
    let gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let spacing = median(gaps.clone());
    for (i, g) in gaps.iter().enumerate() {
        if (g - spacing).abs() > SPACING_TOL * spacing {
            return Err(Error::Ingestion {
                row: i + 2,
                msg: format!("spacing {g} differs from median spacing {spacing}"),
            });
        }
    }
    let dt = if by_step { spacing * TRADING_DAY } else { spacing };
    Ok(PriceSeries { prices, dt })
}

pub fn load_prices(path: &Path) -> Result<PriceSeries> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    parse_prices(file)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Heston,
    Bates,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: Mode,
    /// Overrides the step size inferred from the price file.
    pub dt: Option<f64>,
    pub seed: Option<u64>,
    pub burn_in: Option<usize>,
    pub out: Option<PathBuf>,
    pub bins: Option<usize>,
    pub priors: PriorConfig,
}

const JUMP_PRIOR_KEYS: [&str; 3] = ["lambda_th", "mu0_j", "sigma0_j"];

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let value: Value = if text.trim().is_empty() {
        json!({})
    } else {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?
    };
    let cfg: RunConfig = serde_json::from_value(value.clone()).map_err(|e| Error::Config(e.to_string()))?;
    if cfg.mode == Mode::Bates {
        let priors = value.get("priors").and_then(Value::as_object);
        let missing: Vec<&str> = JUMP_PRIOR_KEYS
            .into_iter()
            .filter(|k| !priors.is_some_and(|p| p.contains_key(*k)))
            .collect();
        if !missing.is_empty() {
            return Err(Error::Config(format!("bates mode requires priors {}", missing.join(", "))));
        }
    }
    if let Some(dt) = cfg.dt {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("dt must be > 0, got {dt}")));
        }
    }
    if cfg.bins == Some(0) {
        return Err(Error::Config("bins must be >= 1".into()));
    }
    cfg.priors.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_config(&text)
}

pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Shortest round-trip text, in exponent form for very small or large magnitudes.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// `(bin_left, bin_right, count)` over `[min, max]`; a constant sample fills one
/// zero-width bin.
pub fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![(lo, hi, values.len())];
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(b, c)| (lo + b as f64 * width, if b + 1 == bins { hi } else { lo + (b + 1) as f64 * width }, c))
        .collect()
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| io_err(path, e))
}

fn flush(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| io_err(path, e))
}

fn write_record<I, T>(w: &mut csv::Writer<fs::File>, path: &Path, rec: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    w.write_record(rec).map_err(|e| io_err(path, e))
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = writer(path)?;
    for r in rows {
        w.serialize(r).map_err(|e| io_err(path, e))?;
    }
    flush(w, path)
}

pub fn write_chain(path: &Path, report: &CalibrationReport) -> Result<()> {
    let mut w = writer(path)?;
    write_record(
        &mut w,
        path,
        ["cycle", "mu", "kappa", "theta", "sigma", "rho", "lambda", "mu_j", "sigma_j", "filter_rerun", "degenerate"],
    )?;
    for r in &report.chain {
        write_record(
            &mut w,
            path,
            [
                r.cycle.to_string(),
                fmt_f64(r.mu),
                fmt_f64(r.kappa),
                fmt_f64(r.theta),
                fmt_f64(r.sigma),
                fmt_f64(r.rho),
                opt(r.jumps.map(|j| j.lambda)),
                opt(r.jumps.map(|j| j.mu_j)),
                opt(r.jumps.map(|j| j.sigma_j)),
                u8::from(r.filter_rerun).to_string(),
                u8::from(r.degenerate).to_string(),
            ],
        )?;
    }
    flush(w, path)
}

pub fn write_trace(path: &Path, report: &CalibrationReport) -> Result<()> {
    let f = &report.filter;
    let mut w = writer(path)?;
    write_record(&mut w, path, ["step", "vol_estimate", "jump_prob", "jump_size"])?;
    for (k, v) in f.vol_estimate.iter().enumerate() {
        let (p, z) = if k == 0 || report.chain.first().and_then(|r| r.jumps).is_none() {
            (String::new(), String::new())
        } else {
            (fmt_f64(f.jump_prob[k - 1]), fmt_f64(f.jump_size[k - 1]))
        };
        write_record(&mut w, path, [k.to_string(), fmt_f64(*v), p, z])?;
    }
    flush(w, path)
}

pub fn report_json(report: &CalibrationReport) -> Value {
    let errors = report
        .relative_errors
        .as_ref()
        .map(|m| m.iter().map(|(k, v)| (k.clone(), json!(round2(*v)))).collect::<serde_json::Map<_, _>>());
    json!({
        "seed": report.seed,
        "dt": report.dt,
        "burn_in": report.burn_in,
        "n_cycles": report.chain.len(),
        "degenerate_cycles": report.chain.iter().filter(|r| r.degenerate).count(),
        "point_estimates": report.point_estimates,
        "relative_errors_pct": errors,
        "config": report.config_echo,
    })
}

/// Writes `report.json`, `chain.csv`, `volatility.csv` and one `hist_<param>.csv`
/// per parameter into `out_dir`; `trace.csv` too when `trace` is set.
pub fn emit_report(report: &CalibrationReport, out_dir: &Path, bins: usize, trace: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let mut written = Vec::new();

    let path = out_dir.join("report.json");
    let text = serde_json::to_string_pretty(&report_json(report)).map_err(|e| io_err(&path, e))?;
    fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
    written.push(path);

    let path = out_dir.join("chain.csv");
    write_chain(&path, report)?;
    written.push(path);

    let path = out_dir.join("volatility.csv");
    let mut w = writer(&path)?;
    write_record(&mut w, &path, ["step", "estimate"])?;
    for (k, v) in report.filter.vol_estimate.iter().enumerate() {
        write_record(&mut w, &path, [k.to_string(), fmt_f64(*v)])?;
    }
    flush(w, &path)?;
    written.push(path);

    let kept = &report.chain[report.burn_in.min(report.chain.len())..];
    for (name, _) in report.point_estimates.entries() {
        let values: Vec<f64> = kept
            .iter()
            .filter_map(|r| match name {
                "mu" => Some(r.mu),
                "kappa" => Some(r.kappa),
                "theta" => Some(r.theta),
                "sigma" => Some(r.sigma),
                "rho" => Some(r.rho),
                "lambda" => r.jumps.map(|j| j.lambda),
                "mu_j" => r.jumps.map(|j| j.mu_j),
                "sigma_j" => r.jumps.map(|j| j.sigma_j),
                _ => None,
            })
            .collect();
        let path = out_dir.join(format!("hist_{name}.csv"));
        let mut w = writer(&path)?;
        write_record(&mut w, &path, ["bin_left", "bin_right", "count"])?;
        for (l, r, c) in histogram(&values, bins) {
            write_record(&mut w, &path, [fmt_f64(l), fmt_f64(r), c.to_string()])?;
        }
        flush(w, &path)?;
        written.push(path);
    }

    if trace {
        let path = out_dir.join("trace.csv");
        write_trace(&path, report)?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_simulation(path: &Path, sim: &SimulatedPath) -> Result<()> {
    let mut w = writer(path)?;
    write_record(&mut w, path, ["step", "time", "price", "true_vol", "jump_flag", "jump_size"])?;
    for (k, (p, v)) in sim.prices.iter().zip(&sim.true_vol).enumerate() {
        let z = sim.jumps.get(&k);
        write_record(
            &mut w,
            path,
            [
                k.to_string(),
                fmt_f64(k as f64 * sim.grid.dt),
                fmt_f64(*p),
                fmt_f64(*v),
                u8::from(z.is_some()).to_string(),
                z.copied().map(fmt_f64).unwrap_or_default(),
            ],
        )?;
    }
    flush(w, path)
}

/// Truth/estimate/error table; errors are rounded to two decimals.
pub fn write_exemplary_table(path: &Path, rows: &[crate::experiments::ExemplaryRow]) -> Result<()> {
    let mut w = writer(path)?;
    write_record(&mut w, path, ["parameter", "true_value", "estimated_value", "relative_error_pct"])?;
    for r in rows {
        write_record(
            &mut w,
            path,
            [r.parameter.clone(), fmt_f64(r.true_value), fmt_f64(r.estimate), format!("{:.2}", r.relative_error_pct)],
        )?;
    }
    flush(w, path)
}
