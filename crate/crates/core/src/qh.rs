//! Quasihyperbolic length along the real axis and the bounds
//! `Q/4 ≤ ρ ≤ Q` it yields.
//!
//! On ℝ the boundary distance of every supported domain is the lower envelope
//! of pieces that are either constant or of the form `√((x-x0)² + c²)`, so
//! `∫ dx / dist(x)` is a finite sum of closed-form terms.

use serde::Serialize;

use crate::conformal::{domain_distance, KoenigsMap};
use crate::domains::{chain_exponent, chain_log2_t, chain_t, rectangle_chain, AxisProfile, DomainDescriptor, Profile};
use crate::error::{Error, Result};
use crate::exec::CompensatedSum;
use crate::ComplexPoint;

/// Default exponent for the rectangle-chain table.
pub const THEOREM3_ALPHA: f64 = 7.0 / 12.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisQh {
    pub value: f64,
    /// True when the real segment is a quasihyperbolic geodesic (the domain
    /// is symmetric in ℝ), so `value` is `Q` itself rather than an upper
    /// bound for it.
    pub minimizing: bool,
}

fn shape_integral(shape: Profile, p: f64, q: f64) -> f64 {
    match shape {
        Profile::Const(c) => (q - p) / c,
        Profile::Radial { x0, c: 0.0 } => ((q - x0).abs() / (p - x0).abs()).ln().abs(),
        Profile::Radial { x0, c } => ((q - x0) / c).asinh() - ((p - x0) / c).asinh(),
    }
}

fn crossings(a: Profile, b: Profile, out: &mut Vec<f64>) {
    match (a, b) {
        (Profile::Const(_), Profile::Const(_)) => {}
        (Profile::Const(h), Profile::Radial { x0, c }) | (Profile::Radial { x0, c }, Profile::Const(h)) => {
            if h > c {
                let s = ((h - c) * (h + c)).sqrt();
                out.push(x0 - s);
                out.push(x0 + s);
            }
        }
        (Profile::Radial { x0, c: ca }, Profile::Radial { x0: x1, c: cb }) => {
            if x0 != x1 {
                out.push(0.5 * (x0 + x1) + (cb - ca) * (cb + ca) / (2.0 * (x1 - x0)));
            }
        }
    }
}

/// `∫_{x1}^{x2} dx / dist(x, ∂Ω)` along the real axis, exact up to rounding.
pub fn quasihyperbolic_axis(d: &DomainDescriptor, x1: f64, x2: f64) -> Result<AxisQh> {
    d.validate()?;
    let minimizing = d.is_conjugation_symmetric();
    for x in [x1, x2] {
        // also rejects points beyond a truncation
        d.dist_to_boundary(ComplexPoint::new(x, 0.0))?;
    }
    if x1 == x2 {
        return Ok(AxisQh { value: 0.0, minimizing });
    }
    let (lo, hi) = (x1.min(x2), x1.max(x2));

    let mut profiles: Vec<AxisProfile> = Vec::new();
    for p in d.axis_profiles() {
        if p.hi >= lo && p.lo <= hi && !profiles.contains(&p) {
            profiles.push(p);
        }
    }
    if profiles.iter().any(|p| matches!(p.shape, Profile::Radial { x0, c } if c == 0.0 && lo <= x0 && x0 <= hi)) {
        return Err(Error::outside(ComplexPoint::new(lo, 0.0), "domain: the real segment meets the boundary"));
    }

    let mut cuts = vec![lo, hi];
    for (i, p) in profiles.iter().enumerate() {
        cuts.extend([p.lo, p.hi]);
        for q in &profiles[i + 1..] {
            crossings(p.shape, q.shape, &mut cuts);
        }
    }
    cuts.retain(|&x| x.is_finite() && lo <= x && x <= hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut sum = CompensatedSum::default();
    for w in cuts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let m = 0.5 * (p + q);
        let best = profiles
            .iter()
            .filter(|pr| pr.lo <= m && m <= pr.hi)
            .min_by(|a, b| a.shape.eval(m).total_cmp(&b.shape.eval(m)))
            .ok_or_else(|| Error::InvalidDomain("no boundary piece visible from the axis".into()))?;
        sum.add(shape_integral(best.shape, p, q));
    }
    Ok(AxisQh { value: sum.value(), minimizing })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RhoBounds {
    pub lower: f64,
    pub upper: f64,
    /// False when `upper` is only the length of the real segment, which
    /// over-estimates `Q`; then `lower = upper/4` is not a lower bound for ρ.
    pub certified_lower: bool,
}

pub fn rho_bounds(d: &DomainDescriptor, x1: f64, x2: f64) -> Result<RhoBounds> {
    let q = quasihyperbolic_axis(d, x1, x2)?;
    Ok(RhoBounds { lower: 0.25 * q.value, upper: q.value, certified_lower: q.minimizing })
}

/// Bounds together with the exact distance of an explicitly mapped domain;
/// fails if the distance escapes the bounds that are certified.
pub fn rho_bounds_checked(k: &KoenigsMap, x1: f64, x2: f64) -> Result<(RhoBounds, f64)> {
    let b = rho_bounds(&k.domain, x1, x2)?;
    let rho = domain_distance(k, ComplexPoint::new(x1, 0.0), ComplexPoint::new(x2, 0.0))?;
    let slack = 1e-12 * b.upper.max(1.0);
    if rho > b.upper + slack || (b.certified_lower && rho < b.lower - slack) {
        return Err(Error::Precondition(format!(
            "ρ = {rho} escapes [{}, {}] on {}",
            b.lower,
            b.upper,
            k.domain.name()
        )));
    }
    Ok((b, rho))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Theorem3Row {
    pub n: u32,
    pub t_n: f64,
    /// `Q(0, t_n)`
    pub q: f64,
    /// `Q(0, t_n) / t_n^α`
    pub upper_ratio: f64,
    /// `Q(0, t_n) / (4 t_n^α)`
    pub lower_ratio: f64,
    /// `Q(t_{n-1}, t_n)`
    pub step_q: f64,
    /// `Q(t_{n-1}, t_n) / t_n^{1-a_n}`
    pub step_ratio: f64,
}

pub fn theorem3_table(n_lo: u32, n_hi: u32, alpha: f64) -> Result<Vec<Theorem3Row>> {
    if !(2 <= n_lo && n_lo <= n_hi && n_hi <= 6) {
        return Err(Error::Parameter(format!("need 2 ≤ n_lo ≤ n_hi ≤ 6, got [{n_lo}, {n_hi}]")));
    }
    if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let d = rectangle_chain(n_hi)?;
    let mut total = CompensatedSum::default();
    total.add(quasihyperbolic_axis(&d, 0.0, chain_t(0))?.value);
    let mut rows = Vec::new();
    for n in 1..=n_hi {
        let step = quasihyperbolic_axis(&d, chain_t(n - 1), chain_t(n))?.value;
        total.add(step);
        if n < n_lo {
            continue;
        }
        let q = total.value();
        let log2_t = chain_log2_t(n);
        let upper_ratio = (q.log2() - alpha * log2_t).exp2();
        let step_ratio = (step.log2() - (1.0 - chain_exponent(n)) * log2_t).exp2();
        rows.push(Theorem3Row {
            n,
            t_n: chain_t(n),
            q,
            upper_ratio,
            lower_ratio: 0.25 * upper_ratio,
            step_q: step,
            step_ratio,
        });
    }
    Ok(rows)
}

/// Rows whose ratio moves against the expected trend: `upper_ratio` should
/// fall from one odd `n` to the next and `lower_ratio` should rise from one
/// even `n` to the next. Returns the offending `n`.
pub fn theorem3_trend_flags(rows: &[Theorem3Row]) -> Vec<u32> {
    let mut flags = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if let Some(prev) = rows[..i].iter().rev().find(|p| p.n + 2 == r.n) {
            let ok = if r.n % 2 == 1 { r.upper_ratio < prev.upper_ratio } else { r.lower_ratio > prev.lower_ratio };
            if !ok {
                flags.push(r.n);
            }
        }
    }
    flags
}
