//! Config-driven experiments behind the `hypspeeds` command.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::conformal::slit_sqrt_forward;
use crate::domains::DomainDescriptor;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::harmonic::{
    check_inclusion, mc_arc_exit, projection_bound_check_with, semidisk_bisection_check_with, theorem4_scan_with,
    ArcOnCircle, WOS_EPS,
};
use crate::hyp::{region_density, RoundRegion};
use crate::qh::{rho_bounds, theorem3_table, theorem3_trend_flags, THEOREM3_ALPHA};
use crate::semigroup::{
    dip_search, monotonicity_scan_with, slit_inequality_on_k, SemigroupModel, SpeedKind, VIOLATION_SLACK,
};
use crate::ComplexPoint;

pub const EXPERIMENTS: [&str; 7] = ["dist", "speeds", "thm1", "thm2", "thm3", "thm4", "hm"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl TimeGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        let TimeGrid { start, stop, step } = *self;
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(Error::Config("t_grid values must be finite".into()));
        }
        if !(step > 0.0) {
            return Err(Error::Config(format!("t_grid step must be positive, got {step}")));
        }
        if !(stop >= start) || start < 0.0 {
            return Err(Error::Config(format!("t_grid needs 0 ≤ start ≤ stop, got [{start}, {stop}]")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if n > 10_000_000 {
            return Err(Error::Config(format!("t_grid would have {n} points")));
        }
        Ok((0..n).map(|i| start + i as f64 * step).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed decrease between adjacent grid points.
    pub violation_slack: f64,
    /// Width, in standard errors, of every Monte Carlo comparison.
    pub mc_sigma: f64,
    /// Slack on the lower bounds `-log 2` and `1/4` of the domain
    /// comparison experiment.
    pub bound_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { violation_slack: VIOLATION_SLACK, mc_sigma: 3.0, bound_slack: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thm2Params {
    pub r: f64,
    pub a0_start: f64,
    pub a0_stop: f64,
    /// Number of logarithmically spaced grid points.
    pub a0_count: usize,
    pub k_radii: Vec<f64>,
    pub k_samples: usize,
    pub min_dip: f64,
}

impl Default for Thm2Params {
    fn default() -> Self {
        Thm2Params {
            r: 100.0,
            a0_start: 1e3,
            a0_stop: 1e5,
            a0_count: 41,
            k_radii: vec![10.0, 100.0, 1000.0],
            k_samples: 1000,
            min_dip: 0.01,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thm3Params {
    pub n_lo: u32,
    pub n_hi: u32,
    pub alpha: f64,
    /// Accepted range of `Q(t_{n-1}, t_n) / t_n^{1-a_n}`.
    pub step_ratio_min: f64,
    pub step_ratio_max: f64,
}

impl Default for Thm3Params {
    fn default() -> Self {
        Thm3Params { n_lo: 2, n_hi: 6, alpha: THEOREM3_ALPHA, step_ratio_min: 0.5, step_ratio_max: 2.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HmParams {
    pub t_values: Vec<f64>,
    pub semidisk_t0: f64,
    /// Arc `[0, arc_length]` used to calibrate exit sampling from 0.
    pub arc_length: f64,
}

impl Default for HmParams {
    fn default() -> Self {
        HmParams { t_values: vec![1.0, 5.0, 20.0], semidisk_t0: 0.5, arc_length: 0.5 * std::f64::consts::PI }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; the command line names the experiment and must agree.
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub domain: Option<DomainDescriptor>,
    #[serde(default)]
    pub domain_tilde: Option<DomainDescriptor>,
    #[serde(default)]
    pub t_grid: Option<TimeGrid>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub n_samples: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Option<String>,
    /// Base points `[re, im]` for the generalised speed scans.
    #[serde(default)]
    pub base_points: Vec<[f64; 2]>,
    #[serde(default)]
    pub thm2: Thm2Params,
    #[serde(default)]
    pub thm3: Thm3Params,
    #[serde(default)]
    pub hm: HmParams,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    fn domain(&self) -> Result<&DomainDescriptor> {
        self.domain.as_ref().ok_or_else(|| Error::Config("missing [domain] table".into()))
    }

    fn grid(&self) -> Result<Vec<f64>> {
        self.t_grid.ok_or_else(|| Error::Config("missing [t_grid] table".into()))?.points()
    }

    fn mc(&self) -> Result<(u64, u64)> {
        let seed = self.seed.ok_or_else(|| Error::Config("Monte Carlo experiments need a seed".into()))?;
        let n = self.n_samples.ok_or_else(|| Error::Config("Monte Carlo experiments need n_samples".into()))?;
        if n == 0 {
            return Err(Error::Config("n_samples must be positive".into()));
        }
        Ok((seed, n))
    }

    fn model(&self) -> Result<SemigroupModel> {
        SemigroupModel::new(self.domain()?)
    }
}

/// A CSV table with a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&x| fmt12(x)).collect());
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for line in std::iter::once(&self.header).chain(&self.rows) {
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Decimal notation with 12 significant digits and trailing zeros trimmed.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.11e}", x);
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let point = exp + 1;
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    if point <= 0 {
        s.push_str("0.");
        s.push_str(&"0".repeat((-point) as usize));
        s.push_str(&digits);
    } else if point as usize >= digits.len() {
        s.push_str(&digits);
        s.push_str(&"0".repeat(point as usize - digits.len()));
    } else {
        s.push_str(&digits[..point as usize]);
        s.push('.');
        s.push_str(&digits[point as usize..]);
    }
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.');
        s = trimmed.to_string();
    }
    s
}

pub fn emit_csv(table: &CsvTable, path: &Path) -> Result<()> {
    std::fs::write(path, table.to_csv_string()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub experiment: String,
    pub pass: bool,
    /// Failed assertions, empty on a pass.
    pub failures: Vec<String>,
    pub summary: Value,
    pub table: CsvTable,
    pub provenance: Value,
}

impl RunReport {
    pub fn to_json(&self) -> Value {
        json!({
            "experiment": self.experiment,
            "pass": self.pass,
            "failures": self.failures,
            "summary": self.summary,
            "provenance": self.provenance,
        })
    }
}

struct Checks(Vec<String>);

impl Checks {
    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.0.push(what());
        }
    }
}

/// Run the experiment `name` (or the one named in the config).
pub fn run_named(name: Option<&str>, config: &ExperimentConfig, exec: Exec) -> Result<RunReport> {
    let name = match (name, config.experiment.as_deref()) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::Config(format!("command line asks for `{a}` but the config names `{b}`")))
        }
        (Some(a), _) => a.to_string(),
        (None, Some(b)) => b.to_string(),
        (None, None) => return Err(Error::Config("no experiment named".into())),
    };
    let mut checks = Checks(Vec::new());
    let (summary, table) = match name.as_str() {
        "dist" => run_dist(config, &mut checks)?,
        "speeds" => run_speeds(config, &mut checks, exec)?,
        "thm1" => run_thm1(config, &mut checks, exec)?,
        "thm2" => run_thm2(config, &mut checks)?,
        "thm3" => run_thm3(config, &mut checks)?,
        "thm4" => run_thm4(config, &mut checks, exec)?,
        "hm" => run_hm(config, &mut checks, exec)?,
        other => {
            return Err(Error::Config(format!(
                "unknown experiment `{other}`; expected one of {}",
                EXPERIMENTS.join(", ")
            )))
        }
    };
    let provenance = json!({
        "config": serde_json::to_value(config).map_err(|e| Error::Config(e.to_string()))?,
        "seed": config.seed,
        "tool": concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")),
    });
    Ok(RunReport { experiment: name, pass: checks.0.is_empty(), failures: checks.0, summary, table, provenance })
}

pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    run_named(None, config, Exec::default())
}

fn run_dist(cfg: &ExperimentConfig, checks: &mut Checks) -> Result<(Value, CsvTable)> {
    let model = cfg.model()?;
    let d = cfg.domain()?;
    let mut table = CsvTable::new(&["t", "rho", "q_lower", "q_upper", "certified_lower"]);
    for t in cfg.grid()? {
        let rho = crate::conformal::domain_distance(&model.koenigs, Complex64::new(0.0, 0.0), Complex64::new(t, 0.0))?;
        let b = rho_bounds(d, 0.0, t)?;
        let slack = 1e-12 * b.upper.max(1.0);
        checks.require(rho <= b.upper + slack, || format!("ρ(0, {t}) = {rho} exceeds Q = {}", b.upper));
        if b.certified_lower {
            checks.require(rho >= b.lower - slack, || format!("ρ(0, {t}) = {rho} is below Q/4 = {}", b.lower));
        }
        table.push_numbers(&[t, rho, b.lower, b.upper, b.certified_lower as u8 as f64]);
    }
    let summary = json!({ "domain": d.name(), "rows": table.rows.len() });
    Ok((summary, table))
}

fn run_speeds(cfg: &ExperimentConfig, checks: &mut Checks, exec: Exec) -> Result<(Value, CsvTable)> {
    let model = cfg.model()?;
    let grid = cfg.grid()?;
    let samples = exec.try_map(grid.len(), |i| model.speeds(grid[i]))?;
    let mut table = CsvTable::new(&["t", "v", "v_o", "v_T", "pi_t"]);
    for s in &samples {
        if let Err(e) = s.check_invariants(1e-12) {
            checks.require(false, || e.to_string());
        }
        table.push_numbers(&[s.t, s.v, s.v_o, s.v_t, s.pi_t]);
    }
    let summary = json!({ "domain": model.koenigs.domain.name(), "samples": samples.len() });
    Ok((summary, table))
}

fn run_thm1(cfg: &ExperimentConfig, checks: &mut Checks, exec: Exec) -> Result<(Value, CsvTable)> {
    let model = cfg.model()?;
    let grid = cfg.grid()?;
    let slack = cfg.tolerances.violation_slack;
    let mut kinds = vec![SpeedKind::Orthogonal, SpeedKind::Foot];
    kinds.extend(cfg.base_points.iter().map(|p| SpeedKind::Generalized(Complex64::new(p[0], p[1]))));
    let mut table = CsvTable::new(&["scan", "t0", "t1", "delta"]);
    let mut counts = BTreeMap::new();
    for kind in kinds {
        let report = monotonicity_scan_with(&model, &grid, kind, slack, exec)?;
        checks.require(report.violations.is_empty(), || {
            format!("{} speed decreases at {} grid steps", report.kind, report.violations.len())
        });
        for v in &report.violations {
            let mut row = vec![report.kind.clone()];
            row.extend([v.t0, v.t1, v.delta].iter().map(|&x| fmt12(x)));
            table.rows.push(row);
        }
        counts.insert(report.kind, report.violations.len());
    }
    // total speed is reported, not asserted
    let total = monotonicity_scan_with(&model, &grid, SpeedKind::Total, slack, exec)?;
    let summary = json!({
        "domain": model.koenigs.domain.name(),
        "grid_points": grid.len(),
        "violations": counts,
        "total_speed_decreases": total.violations.len(),
    });
    Ok((summary, table))
}

fn log_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop >= start && count >= 1) {
        return Err(Error::Config("a0 grid needs 0 < a0_start ≤ a0_stop and a0_count ≥ 1".into()));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let (l0, l1) = (start.ln(), stop.ln());
    Ok((0..count).map(|i| (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp()).collect())
}

fn run_thm2(cfg: &ExperimentConfig, checks: &mut Checks) -> Result<(Value, CsvTable)> {
    let p = &cfg.thm2;
    let grid = log_grid(p.a0_start, p.a0_stop, p.a0_count)?;
    let dip = dip_search(p.r, &grid)?;
    checks.require(dip.dip >= p.min_dip, || format!("best dip {} at a0 = {} is below {}", dip.dip, dip.a0, p.min_dip));
    let mut etas = Vec::new();
    for &r in &p.k_radii {
        let k = slit_inequality_on_k(r, p.k_samples)?;
        checks.require(k.min_gap > 0.0, || format!("η({r}) = {} is not positive", k.min_gap));
        etas.push(json!({ "r": r, "eta": k.min_gap, "argmin": [k.argmin_re, k.argmin_im] }));
    }
    let h = RoundRegion::right_half_plane();
    let lam_a = region_density(&h, slit_sqrt_forward(Complex64::new(-1.0, 0.0))?)?;
    let lam_b = region_density(&h, slit_sqrt_forward(Complex64::new(1.0, 0.0))?)?;
    checks.require(lam_a > lam_b, || format!("density at φ(-1) = {lam_a} does not exceed density at φ(1) = {lam_b}"));
    let mut table = CsvTable::new(&["a0", "delta"]);
    for &(a0, d) in &dip.values {
        table.push_numbers(&[a0, d]);
    }
    let summary = json!({
        "r": p.r,
        "best_a0": dip.a0,
        "dip": dip.dip,
        "min_dip_over_grid": dip.values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min),
        "eta": etas,
        "density_at_phi_minus_one": lam_a,
        "density_at_phi_one": lam_b,
    });
    Ok((summary, table))
}

fn run_thm3(cfg: &ExperimentConfig, checks: &mut Checks) -> Result<(Value, CsvTable)> {
    let p = cfg.thm3;
    let rows = theorem3_table(p.n_lo, p.n_hi, p.alpha)?;
    let mut table = CsvTable::new(&["n", "t_n", "Q", "upper_ratio", "lower_ratio"]);
    for r in &rows {
        table.push_numbers(&[r.n as f64, r.t_n, r.q, r.upper_ratio, r.lower_ratio]);
        checks.require(p.step_ratio_min <= r.step_ratio && r.step_ratio <= p.step_ratio_max, || {
            format!(
                "step ratio {} at n = {} is outside [{}, {}]",
                r.step_ratio, r.n, p.step_ratio_min, p.step_ratio_max
            )
        });
    }
    let flagged = theorem3_trend_flags(&rows);
    let summary = json!({
        "alpha": p.alpha,
        "step_ratios": rows.iter().map(|r| json!({ "n": r.n, "r_n": r.step_ratio })).collect::<Vec<_>>(),
        "trend_flags": flagged,
    });
    Ok((summary, table))
}

fn run_thm4(cfg: &ExperimentConfig, checks: &mut Checks, exec: Exec) -> Result<(Value, CsvTable)> {
    let m = cfg.model()?;
    let d_tilde = cfg.domain_tilde.as_ref().ok_or_else(|| Error::Config("thm4 needs a [domain_tilde] table".into()))?;
    let mt = SemigroupModel::new(d_tilde)?;
    check_inclusion(&m, &mt, 1000)?;
    let report = theorem4_scan_with(&m, &mt, &cfg.grid()?, exec)?;
    let slack = cfg.tolerances.bound_slack;
    let diff_floor = -std::f64::consts::LN_2 - slack;
    let ratio_floor = 0.25 - slack;
    checks.require(report.tail_min_diff >= diff_floor, || {
        format!("tail minimum of v_o - ṽ_o = {} is below {diff_floor}", report.tail_min_diff)
    });
    checks.require(report.tail_min_ratio >= ratio_floor, || {
        format!("tail minimum of the foot ratio = {} is below {ratio_floor}", report.tail_min_ratio)
    });
    let mut table = CsvTable::new(&["t", "v_o", "v_o_tilde", "diff", "ratio"]);
    for r in &report.rows {
        table.push_numbers(&[r.t, r.v_o, r.v_o_tilde, r.diff, r.ratio]);
    }
    let summary = json!({
        "domain": m.koenigs.domain.name(),
        "domain_tilde": mt.koenigs.domain.name(),
        "tail_min_diff": report.tail_min_diff,
        "tail_min_ratio": report.tail_min_ratio,
    });
    Ok((summary, table))
}

fn run_hm(cfg: &ExperimentConfig, checks: &mut Checks, exec: Exec) -> Result<(Value, CsvTable)> {
    let (seed, n) = cfg.mc()?;
    let k = cfg.tolerances.mc_sigma;
    let p = &cfg.hm;
    let mut table = CsvTable::new(&["label", "value", "std_error", "n_samples", "seed", "reference"]);
    let mut row = |label: String, e: &crate::harmonic::HmEstimate, reference: f64| {
        let mut r = vec![label];
        r.extend([e.value, e.std_error].iter().map(|&x| fmt12(x)));
        r.push(e.n_samples.to_string());
        r.push(e.seed.to_string());
        r.push(fmt12(reference));
        table.rows.push(r);
    };

    let arc = ArcOnCircle::new(0.0, p.arc_length)?;
    let exact = p.arc_length / std::f64::consts::TAU;
    let est = mc_arc_exit(Complex64::new(0.0, 0.0), &arc, n, WOS_EPS, seed, exec)?;
    let sigma = est.std_error.max((exact * (1.0 - exact) / n as f64).sqrt());
    checks.require((est.value - exact).abs() <= k * sigma, || format!("arc exit {} vs exact {exact}", est.value));
    row("arc_exit".into(), &est, exact);

    let mut projections = Vec::new();
    if cfg.domain.is_some() {
        let model = cfg.model()?;
        for &t in &p.t_values {
            let c = projection_bound_check_with(&model, t, n, seed, exec)?;
            checks.require(c.lhs.value >= c.rhs - k * c.sigma, || {
                format!("hitting estimate {} at t = {t} is below the bound {}", c.lhs.value, c.rhs)
            });
            row(format!("projection_t={}", fmt12(t)), &c.lhs, c.rhs);
            projections.push(
                json!({ "t": t, "pi_t": c.pi_t, "lhs": c.lhs.value, "std_error": c.lhs.std_error, "rhs": c.rhs }),
            );
        }
    }

    let s = semidisk_bisection_check_with(p.semidisk_t0, n, seed, exec)?;
    let diff = s.left.value - s.right.value;
    checks.require(diff.abs() <= k * s.diff_sigma, || format!("semidisk halves differ by {diff} (σ {})", s.diff_sigma));
    row("semidisk_left".into(), &s.left, s.right.value);
    row("semidisk_right".into(), &s.right, s.left.value);
    row("semidisk_arc".into(), &s.arc, 1.0 - s.left.value - s.right.value);

    let summary = json!({
        "arc_exit": { "value": est.value, "exact": exact },
        "projection": projections,
        "semidisk": { "left": s.left.value, "right": s.right.value, "diff_sigma": s.diff_sigma },
    });
    Ok((summary, table))
}

/// Run and write `<experiment>.csv` and `<experiment>.json` into `out_dir`.
pub fn run_to_dir(name: Option<&str>, config: &ExperimentConfig, out_dir: &Path) -> Result<RunReport> {
    let report = run_named(name, config, Exec::default())?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::Io(format!("{}: {e}", out_dir.display())))?;
    emit_csv(&report.table, &out_dir.join(format!("{}.csv", report.experiment)))?;
    let mut text = serde_json::to_string_pretty(&report.to_json()).map_err(|e| Error::Io(e.to_string()))?;
    let _ = writeln!(text);
    std::fs::write(out_dir.join(format!("{}.json", report.experiment)), text)
        .map_err(|e| Error::Io(format!("{}: {e}", out_dir.display())))?;
    Ok(report)
}

pub fn point(p: [f64; 2]) -> ComplexPoint {
    Complex64::new(p[0], p[1])
}
