//! Semigroups `φ_t(z) = h⁻¹(h(z) + t)` in the Koenigs model and their speeds.
//!
//! Orbit points are produced in the band coordinate `ζ` (see [`crate::hyp`]).
//! In the band the projection onto the diameter is `Re ζ`, so all three
//! speeds come out without forming `1 - |φ_t(0)|`, which for a strip
//! underflows once `t` is a few dozen.

use std::f64::consts::{FRAC_PI_2, LN_2};

use num_complex::Complex64;
use serde::Serialize;

use crate::conformal::{build_koenigs, slit_sqrt_forward, KoenigsMap};
use crate::domains::DomainDescriptor;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hyp::{
    self, band_distance, disk_distance, disk_to_band, foot_on_diameter, geodesic_to_boundary, project_to_geodesic,
    region_distance, RoundRegion,
};
use crate::ComplexPoint;

/// Default slack below which a decrease counts as a violation.
pub const VIOLATION_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SemigroupModel {
    pub koenigs: KoenigsMap,
}

/// One point of the speed curves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpeedSample {
    pub t: f64,
    /// total speed `ρ(0, φ_t(0))`
    pub v: f64,
    /// orthogonal speed `ρ(0, π_t)`
    pub v_o: f64,
    /// tangential speed `ρ(φ_t(0), π_t)`
    pub v_t: f64,
    /// projection of `φ_t(0)` onto the diameter
    pub pi_t: f64,
    /// `Re ζ` of the orbit point, i.e. `log((1+π_t)/(1-π_t))`
    pub foot_band: f64,
}

impl SpeedSample {
    /// `v_o ≤ v`, `v_T ≤ v` and `v ≤ v_o + v_T`, up to a relative slack.
    pub fn check_invariants(&self, rel: f64) -> Result<()> {
        let tol = rel * self.v.max(1.0);
        let ok = self.v_o <= self.v + tol && self.v_t <= self.v + tol && self.v <= self.v_o + self.v_t + tol;
        if !ok {
            return Err(Error::Precondition(format!(
                "speed invariants fail at t = {}: v = {}, v_o = {}, v_T = {}",
                self.t, self.v, self.v_o, self.v_t
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpeedKind {
    Total,
    Orthogonal,
    /// The foot `π_t`, scanned through the increasing transform
    /// `-log(1 - π_t)` so that ties from rounding `π_t` to 1 do not hide
    /// movement.
    Foot,
    Generalized(ComplexPoint),
}

impl SpeedKind {
    pub fn label(&self) -> String {
        match self {
            SpeedKind::Total => "total".into(),
            SpeedKind::Orthogonal => "orthogonal".into(),
            SpeedKind::Foot => "foot".into(),
            SpeedKind::Generalized(z) => format!("generalized({}, {})", z.re, z.im),
        }
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

impl SemigroupModel {
    pub fn new(d: &DomainDescriptor) -> Result<Self> {
        Ok(SemigroupModel { koenigs: build_koenigs(d)? })
    }

    /// The Denjoy–Wolff point.
    pub fn denjoy_wolff(&self) -> ComplexPoint {
        Complex64::new(1.0, 0.0)
    }

    fn koenigs_image(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        if z == Complex64::new(0.0, 0.0) {
            Ok(z)
        } else {
            self.koenigs.forward(z)
        }
    }

    fn check_time(t: f64) -> Result<()> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Parameter(format!("time must be finite and nonnegative, got {t}")));
        }
        Ok(())
    }

    /// Band coordinate of `φ_t(z)`.
    pub fn orbit_band(&self, z: ComplexPoint, t: f64) -> Result<ComplexPoint> {
        Self::check_time(t)?;
        if t == 0.0 {
            return disk_to_band(z);
        }
        let w = self.koenigs_image(z)?;
        Ok(self.koenigs.pull_band(w + t)?.0)
    }

    /// `φ_t(z)` in disk coordinates; fails once the point is too close to 1
    /// to be told apart from the boundary (use [`Self::orbit_band`] then).
    pub fn orbit(&self, z: ComplexPoint, t: f64) -> Result<ComplexPoint> {
        Self::check_time(t)?;
        hyp::check_in_disk(z)?;
        if t == 0.0 {
            return Ok(z);
        }
        self.koenigs.inverse(self.koenigs_image(z)? + t)
    }

    pub fn speeds(&self, t: f64) -> Result<SpeedSample> {
        Self::check_time(t)?;
        if t == 0.0 {
            return Ok(SpeedSample { t, v: 0.0, v_o: 0.0, v_t: 0.0, pi_t: 0.0, foot_band: 0.0 });
        }
        let zeta = self.orbit_band(Complex64::new(0.0, 0.0), t)?;
        let (x, y) = (zeta.re, zeta.im);
        let v = band_distance(Complex64::new(0.0, 0.0), zeta)?;
        let cos_y = (FRAC_PI_2 - y.abs()).sin();
        Ok(SpeedSample {
            t,
            v,
            v_o: 0.5 * x.abs(),
            v_t: ((0.5 * y).sin().abs() / cos_y.sqrt()).asinh(),
            pi_t: (0.5 * x).tanh(),
            foot_band: x,
        })
    }

    /// `v^z(t)`: distance from `z` to the projection of `φ_t(z)` onto the
    /// geodesic from `z` to 1.
    pub fn generalized_speed(&self, z: ComplexPoint, t: f64) -> Result<f64> {
        hyp::check_in_disk(z)?;
        Self::check_time(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        // With u = e^ζ the disk becomes the right half-plane and the geodesic
        // to 1 the horizontal ray Im u = b through u_z = a + ib. The nearest
        // point of that ray to u' is ib + |u' - ib|.
        let uz = disk_to_band(z)?.exp();
        let (a, b) = (uz.re, uz.im);
        let zeta = self.orbit_band(z, t)?;
        let ln_p = if zeta.re > 40.0 {
            zeta.re + (Complex64::new(1.0, 0.0) - Complex64::new(0.0, b) * (-zeta).exp()).norm().ln()
        } else {
            (zeta.exp() - Complex64::new(0.0, b)).norm().ln()
        };
        Ok(0.5 * (ln_p - a.ln()).abs())
    }

    /// Same quantity through disk coordinates and the general projection;
    /// usable while `φ_t(z)` is resolvable in the disk.
    pub fn generalized_speed_disk(&self, z: ComplexPoint, t: f64) -> Result<f64> {
        let zt = self.orbit(z, t)?;
        if zt == z {
            return Ok(0.0);
        }
        let g = geodesic_to_boundary(z, self.denjoy_wolff())?;
        disk_distance(z, project_to_geodesic(zt, &g)?)
    }

    /// Speeds through disk coordinates, for cross-checking.
    pub fn speeds_disk(&self, t: f64) -> Result<SpeedSample> {
        let z = self.orbit(Complex64::new(0.0, 0.0), t)?;
        let o = Complex64::new(0.0, 0.0);
        let pi_t = foot_on_diameter(z)?;
        let p = Complex64::new(pi_t, 0.0);
        Ok(SpeedSample {
            t,
            v: disk_distance(o, z)?,
            v_o: disk_distance(o, p)?,
            v_t: disk_distance(z, p)?,
            pi_t,
            foot_band: disk_to_band(p)?.re,
        })
    }

    pub fn speed_value(&self, kind: SpeedKind, t: f64) -> Result<f64> {
        Ok(match kind {
            SpeedKind::Total => self.speeds(t)?.v,
            SpeedKind::Orthogonal => self.speeds(t)?.v_o,
            SpeedKind::Foot => {
                // 1 - tanh(x/2) = 2/(e^x + 1)
                let x = self.speeds(t)?.foot_band;
                softplus(x) - LN_2
            }
            SpeedKind::Generalized(z) => self.generalized_speed(z, t)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub t0: f64,
    pub t1: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub kind: String,
    pub n_points: usize,
    pub violations: Vec<Violation>,
}

pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Parameter("empty grid".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Parameter("grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Adjacent grid pairs where the selected speed drops by more than `slack`.
pub fn monotonicity_scan_with(
    m: &SemigroupModel,
    grid: &[f64],
    kind: SpeedKind,
    slack: f64,
    exec: Exec,
) -> Result<ScanReport> {
    check_grid(grid)?;
    let values = exec.try_map(grid.len(), |i| m.speed_value(kind, grid[i]))?;
    let violations = grid
        .windows(2)
        .zip(values.windows(2))
        .filter_map(|(t, v)| {
            let delta = v[1] - v[0];
            (delta < -slack).then_some(Violation { t0: t[0], t1: t[1], delta })
        })
        .collect();
    Ok(ScanReport { kind: kind.label(), n_points: grid.len(), violations })
}

pub fn monotonicity_scan(m: &SemigroupModel, grid: &[f64], kind: SpeedKind) -> Result<ScanReport> {
    monotonicity_scan_with(m, grid, kind, VIOLATION_SLACK, Exec::default())
}

/// Image of `z` under `√(z+i)` as a point of the right half-plane, and the
/// distance that map transports.
fn slit_distance(z: ComplexPoint, w: ComplexPoint) -> Result<f64> {
    region_distance(&RoundRegion::right_half_plane(), slit_sqrt_forward(z)?, slit_sqrt_forward(w)?)
}

/// `ρ(z, -1) - ρ(z, 1)` in ℂ minus `{Re ≤ 0, Im = -1}`.
pub fn slit_gap(z: ComplexPoint) -> Result<f64> {
    Ok(slit_distance(z, Complex64::new(-1.0, 0.0))? - slit_distance(z, Complex64::new(1.0, 0.0))?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KGap {
    pub r: f64,
    pub min_gap: f64,
    pub argmin_re: f64,
    pub argmin_im: f64,
}

/// Sampled minimum of [`slit_gap`] over the arc `|z + i| = R, Im z ≥ 0`.
pub fn slit_inequality_on_k(r: f64, n_samples: usize) -> Result<KGap> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::Parameter(format!("R = {r} must exceed 1")));
    }
    if n_samples < 2 {
        return Err(Error::Parameter("need at least two samples on K".into()));
    }
    let t0 = (1.0 / r).asin();
    let t1 = std::f64::consts::PI - t0;
    let mut best = KGap { r, min_gap: f64::INFINITY, argmin_re: 0.0, argmin_im: 0.0 };
    for i in 0..n_samples {
        let theta = t0 + (t1 - t0) * i as f64 / (n_samples - 1) as f64;
        let mut z = Complex64::new(0.0, -1.0) + Complex64::from_polar(r, theta);
        z.im = z.im.max(0.0);
        let g = slit_gap(z)?;
        if g < best.min_gap {
            best = KGap { r, min_gap: g, argmin_re: z.re, argmin_im: z.im };
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DipResult {
    pub a0: f64,
    pub dip: f64,
    /// `(a0, Δ(a0))` over the whole grid
    pub values: Vec<(f64, f64)>,
}

/// `Δ(a0) = ρ(-a0, -1) - ρ(-a0, 1)` in ℂ minus `{Re ≤ 0, Im = -1}`.
pub fn dip_value(a0: f64) -> Result<f64> {
    slit_gap(Complex64::new(-a0, 0.0))
}

pub fn dip_search(r: f64, a0_grid: &[f64]) -> Result<DipResult> {
    if a0_grid.is_empty() {
        return Err(Error::Parameter("empty a0 grid".into()));
    }
    let mut values = Vec::with_capacity(a0_grid.len());
    for &a0 in a0_grid {
        if !(a0 > r) {
            return Err(Error::Parameter(format!("a0 = {a0} must exceed R = {r}")));
        }
        values.push((a0, dip_value(a0)?));
    }
    let &(a0, dip) = values.iter().max_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty");
    Ok(DipResult { a0, dip, values })
}

/// `½ log[(1-π̃²)/(1-π²) · ((1+π)/(1+π̃))²]`.
pub fn speed_difference_identity(pi: f64, pi_tilde: f64) -> Result<f64> {
    for p in [pi, pi_tilde] {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Parameter(format!("{p} is not in (0, 1)")));
        }
    }
    let ratio = ((1.0 - pi_tilde) * (1.0 + pi_tilde)) / ((1.0 - pi) * (1.0 + pi));
    Ok(0.5 * (ratio.ln() + 2.0 * ((1.0 + pi) / (1.0 + pi_tilde)).ln()))
}
