//! Harmonic measure: closed forms in the disk and walk-on-spheres estimates.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rstar::primitives::Line;
use rstar::{PointDistance, RTree};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hyp::{band_to_disk, perpendicular_geodesic};
use crate::semigroup::{check_grid, SemigroupModel};
use crate::ComplexPoint;

/// Absorption distance of the walks.
pub const WOS_EPS: f64 = 1e-4;

/// A walk still alive after this many jumps is counted as a miss.
const MAX_JUMPS: usize = 100_000;

/// Maximum spacing between consecutive vertices of a discretised orbit curve.
const CURVE_SPACING: f64 = 1e-3;

/// `{e^{iθ} : θ1 ≤ θ ≤ θ2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ArcOnCircle {
    pub theta1: f64,
    pub theta2: f64,
}

impl ArcOnCircle {
    pub fn new(theta1: f64, theta2: f64) -> Result<Self> {
        if !(theta1.is_finite() && theta2.is_finite() && theta1 < theta2 && theta2 <= theta1 + TAU) {
            return Err(Error::Parameter(format!("arc [{theta1}, {theta2}] needs θ1 < θ2 ≤ θ1 + 2π")));
        }
        Ok(ArcOnCircle { theta1, theta2 })
    }

    pub fn full() -> Self {
        ArcOnCircle { theta1: 0.0, theta2: TAU }
    }

    pub fn length(&self) -> f64 {
        self.theta2 - self.theta1
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        (theta - self.theta1).rem_euclid(TAU) <= self.length()
    }
}

/// Monte Carlo estimate of a harmonic measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HmEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl HmEstimate {
    pub fn from_counts(hits: u64, n: u64, seed: u64) -> Self {
        let p = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
        let std_error = if n == 0 { 0.0 } else { (p * (1.0 - p) / n as f64).sqrt() };
        HmEstimate { value: p, std_error, n_samples: n, seed }
    }
}

/// Harmonic measure of an arc seen from `z`, i.e. its Poisson integral.
pub fn disk_arc_measure(z: ComplexPoint, arc: &ArcOnCircle) -> Result<f64> {
    crate::hyp::check_in_disk(z)?;
    if arc.length() >= TAU {
        return Ok(1.0);
    }
    // Each piece is seen from z under an angle α ∈ (0, 2π), measured
    // counterclockwise from a to b, with ω = α/π - Δθ/(2π). α passes π when z
    // crosses the chord.
    let n = (arc.length() / (0.5 * PI)).ceil().max(1.0) as usize;
    let step = arc.length() / n as f64;
    let mut total = 0.0;
    for k in 0..n {
        let a = Complex64::from_polar(1.0, arc.theta1 + k as f64 * step);
        let b = Complex64::from_polar(1.0, arc.theta1 + (k + 1) as f64 * step);
        total += ((b - z) / (a - z)).arg().rem_euclid(TAU) / PI - step / TAU;
    }
    Ok(total.clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CutMeasure {
    /// Arc of ∂𝔻 cut off by the perpendicular geodesic, on the side of 1.
    pub arc: ArcOnCircle,
    /// Harmonic measure of `arc` from 0, computed from its endpoints.
    pub value: f64,
    /// `(1/π)·arctan((1-π_t²)/(2π_t))`
    pub closed_form: f64,
}

pub fn geodesic_cut_measure(pi_t: f64) -> Result<CutMeasure> {
    if !(pi_t > 0.0 && pi_t < 1.0) {
        return Err(Error::Parameter(format!("π_t = {pi_t} is not in (0, 1)")));
    }
    let (e1, e2) = perpendicular_geodesic(pi_t)?.endpoints();
    let arc = ArcOnCircle::new(e1.arg(), e2.arg())?;
    let value = disk_arc_measure(Complex64::new(0.0, 0.0), &arc)?;
    let closed_form = ((1.0 - pi_t) * (1.0 + pi_t) / (2.0 * pi_t)).atan() / PI;
    Ok(CutMeasure { arc, value, closed_form })
}

/// Union of polylines in the closed disk, indexed for nearest-segment queries.
#[derive(Clone, Debug)]
pub struct Obstacle {
    tree: RTree<Line<[f64; 2]>>,
}

impl Obstacle {
    pub fn empty() -> Self {
        Obstacle { tree: RTree::new() }
    }

    pub fn from_polylines(lines: &[Vec<ComplexPoint>]) -> Result<Self> {
        let mut segs = Vec::new();
        for line in lines {
            for z in line {
                crate::hyp::check_finite(*z)?;
                if z.norm() > 1.0 + 1e-12 {
                    return Err(Error::Parameter(format!("obstacle vertex {z} lies outside the closed disk")));
                }
            }
            if line.len() == 1 {
                segs.push(Line::new([line[0].re, line[0].im], [line[0].re, line[0].im]));
            }
            for w in line.windows(2) {
                segs.push(Line::new([w[0].re, w[0].im], [w[1].re, w[1].im]));
            }
        }
        Ok(Obstacle { tree: RTree::bulk_load(segs) })
    }

    pub fn segment(a: ComplexPoint, b: ComplexPoint) -> Result<Self> {
        Obstacle::from_polylines(&[vec![a, b]])
    }

    pub fn is_empty(&self) -> bool {
        self.tree.size() == 0
    }

    pub fn distance(&self, z: ComplexPoint) -> f64 {
        let p = [z.re, z.im];
        self.tree.nearest_neighbor(&p).map(|l| l.distance_2(&p).sqrt()).unwrap_or(f64::INFINITY)
    }
}

fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Walk on spheres until within `eps` of the absorbing set. `geom` returns
/// the distance to the absorbing set and the label of its nearest part.
fn walk<F>(z0: ComplexPoint, eps: f64, rng: &mut ChaCha8Rng, geom: &F) -> Option<(ComplexPoint, u8)>
where
    F: Fn(ComplexPoint) -> (f64, u8),
{
    let mut x = z0;
    for _ in 0..MAX_JUMPS {
        let (r, label) = geom(x);
        if r < eps {
            return Some((x, label));
        }
        x += Complex64::from_polar(r, TAU * rng.random::<f64>());
    }
    None
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 0.1) {
        return Err(Error::Parameter(format!("absorption eps = {eps} must lie in (0, 0.1)")));
    }
    Ok(())
}

const HIT: u8 = 1;
const CIRCLE: u8 = 0;

/// Probability that Brownian motion from `z0` meets `obstacle` before ∂𝔻.
pub fn mc_first_hit_with(
    obstacle: &Obstacle,
    z0: ComplexPoint,
    n: u64,
    eps: f64,
    seed: u64,
    exec: Exec,
) -> Result<HmEstimate> {
    check_eps(eps)?;
    crate::hyp::check_in_disk(z0)?;
    let clearance = obstacle.distance(z0).min(1.0 - z0.norm());
    if clearance <= eps {
        return Err(Error::Parameter(format!(
            "start point is within eps = {eps} of the obstacle or the circle (clearance {clearance:e})"
        )));
    }
    if obstacle.is_empty() {
        return Ok(HmEstimate::from_counts(0, n, seed));
    }
    let geom = |x: ComplexPoint| {
        let (d_obs, d_bdy) = (obstacle.distance(x), 1.0 - x.norm());
        if d_obs < d_bdy {
            (d_obs, HIT)
        } else {
            (d_bdy, CIRCLE)
        }
    };
    let hits = exec.sum_u64(n as usize, |i| {
        let mut rng = sample_rng(seed, i);
        matches!(walk(z0, eps, &mut rng, &geom), Some((_, HIT))) as u64
    });
    Ok(HmEstimate::from_counts(hits, n, seed))
}

pub fn mc_first_hit(obstacle: &Obstacle, z0: ComplexPoint, n: u64, eps: f64, seed: u64) -> Result<HmEstimate> {
    mc_first_hit_with(obstacle, z0, n, eps, seed, Exec::default())
}

/// Probability that Brownian motion from `z0` leaves 𝔻 through `arc`.
pub fn mc_arc_exit(z0: ComplexPoint, arc: &ArcOnCircle, n: u64, eps: f64, seed: u64, exec: Exec) -> Result<HmEstimate> {
    check_eps(eps)?;
    crate::hyp::check_in_disk(z0)?;
    let geom = |x: ComplexPoint| (1.0 - x.norm(), CIRCLE);
    let hits = exec.sum_u64(n as usize, |i| {
        let mut rng = sample_rng(seed, i);
        walk(z0, eps, &mut rng, &geom).is_some_and(|(x, _)| arc.contains_angle(x.arg())) as u64
    });
    Ok(HmEstimate::from_counts(hits, n, seed))
}

/// The curve `h⁻¹([t, ∞))` as a polyline ending at 1, with vertex spacing
/// below `1e-3`. Vertices come from band coordinates, so the curve is
/// available even when its start is closer to 1 than disk coordinates
/// resolve.
pub fn arc_polyline(m: &SemigroupModel, t: f64) -> Result<Vec<ComplexPoint>> {
    let point = |s: f64| -> Result<ComplexPoint> { band_to_disk(m.koenigs.pull_band(Complex64::new(t + s, 0.0))?.0) };
    let mut pts = vec![point(0.0)?];
    let (mut s, mut ds) = (0.0, 1e-3);
    while 1.0 - pts.last().expect("nonempty").norm() >= 1e-9 {
        let last = *pts.last().expect("nonempty");
        let next = point(s + ds)?;
        let gap = (next - last).norm();
        if gap > CURVE_SPACING {
            ds *= 0.5;
            if ds < 1e-12 {
                return Err(Error::Numeric { what: "orbit curve cannot be resolved".into(), residual: gap });
            }
            continue;
        }
        s += ds;
        pts.push(next);
        if gap < 0.25 * CURVE_SPACING {
            ds *= 2.0;
        }
    }
    pts.push(Complex64::new(1.0, 0.0));
    Ok(pts)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Theorem4Row {
    pub t: f64,
    pub v_o: f64,
    pub v_o_tilde: f64,
    pub diff: f64,
    /// `(1-π̃_t²)/(1-π_t²)`
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem4Report {
    pub rows: Vec<Theorem4Row>,
    /// Minima over the second half of the grid.
    pub tail_min_diff: f64,
    pub tail_min_ratio: f64,
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Checks `Ω ⊂ Ω̃` on images of quasi-random disk points.
pub fn check_inclusion(m: &SemigroupModel, m_tilde: &SemigroupModel, n: usize) -> Result<()> {
    for i in 0..n {
        // golden-angle spiral filling the disk of radius 0.999
        let r = 0.999 * ((i as f64 + 0.5) / n as f64).sqrt();
        let z = Complex64::from_polar(r, i as f64 * 2.399_963_229_728_653);
        let w = m.koenigs.forward(z)?;
        if !m_tilde.koenigs.domain.contains(w) {
            return Err(Error::Precondition(format!(
                "{} is not contained in {}: {w} escapes",
                m.koenigs.domain.name(),
                m_tilde.koenigs.domain.name()
            )));
        }
    }
    Ok(())
}

pub fn theorem4_scan_with(
    m: &SemigroupModel,
    m_tilde: &SemigroupModel,
    grid: &[f64],
    exec: Exec,
) -> Result<Theorem4Report> {
    check_grid(grid)?;
    check_inclusion(m, m_tilde, 1000)?;
    let rows = exec.try_map(grid.len(), |i| {
        let t = grid[i];
        let (s, st) = (m.speeds(t)?, m_tilde.speeds(t)?);
        // 1 - π² = sech²(x/2) with x the band abscissa
        let ratio = (2.0 * (ln_cosh(0.5 * s.foot_band) - ln_cosh(0.5 * st.foot_band))).exp();
        Ok(Theorem4Row { t, v_o: s.v_o, v_o_tilde: st.v_o, diff: s.v_o - st.v_o, ratio })
    })?;
    let tail = &rows[rows.len() / 2..];
    let tail_min_diff = tail.iter().map(|r| r.diff).fold(f64::INFINITY, f64::min);
    let tail_min_ratio = tail.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    Ok(Theorem4Report { rows, tail_min_diff, tail_min_ratio })
}

pub fn theorem4_scan(m: &SemigroupModel, m_tilde: &SemigroupModel, grid: &[f64]) -> Result<Theorem4Report> {
    theorem4_scan_with(m, m_tilde, grid, Exec::default())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProjectionCheck {
    pub t: f64,
    pub pi_t: f64,
    pub lhs: HmEstimate,
    /// `(1/2π)·arctan((1-π_t²)/(2π_t))`
    pub rhs: f64,
    /// `max(lhs σ, null σ of rhs)`; the second term keeps the test
    /// meaningful when the estimate is exactly 0.
    pub sigma: f64,
    pub pass: bool,
}

pub fn projection_bound_check_with(
    m: &SemigroupModel,
    t: f64,
    n: u64,
    seed: u64,
    exec: Exec,
) -> Result<ProjectionCheck> {
    if !(t > 0.0) {
        return Err(Error::Parameter(format!("t = {t} must be positive")));
    }
    let s = m.speeds(t)?;
    let curve = arc_polyline(m, t)?;
    let obstacle = Obstacle::from_polylines(&[curve])?;
    let lhs = mc_first_hit_with(&obstacle, Complex64::new(0.0, 0.0), n, WOS_EPS, seed, exec)?;
    // (1-π²)/(2π) = 1/sinh x
    let rhs = (1.0 / s.foot_band.sinh()).atan() / TAU;
    let sigma = lhs.std_error.max((rhs * (1.0 - rhs) / n as f64).sqrt());
    Ok(ProjectionCheck { t, pi_t: s.pi_t, lhs, rhs, sigma, pass: lhs.value >= rhs - 3.0 * sigma })
}

pub fn projection_bound_check(m: &SemigroupModel, t: f64, n: u64, seed: u64) -> Result<ProjectionCheck> {
    projection_bound_check_with(m, t, n, seed, Exec::default())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SemidiskCheck {
    pub t0: f64,
    /// exit through (-1, 0]
    pub left: HmEstimate,
    /// exit through [0, 1)
    pub right: HmEstimate,
    /// exit through the lower half circle
    pub arc: HmEstimate,
    /// standard error of `left - right` under the joint multinomial law
    pub diff_sigma: f64,
    pub pass: bool,
}

/// Exits of Brownian motion from `-i·t0` out of the lower half disk.
pub fn semidisk_bisection_check_with(t0: f64, n: u64, seed: u64, exec: Exec) -> Result<SemidiskCheck> {
    if !(t0 > 0.0 && t0 < 1.0) {
        return Err(Error::Parameter(format!("t0 = {t0} is not in (0, 1)")));
    }
    const LEFT: u8 = 1;
    const RIGHT: u8 = 2;
    let geom = |x: ComplexPoint| {
        let (d_axis, d_circle) = (-x.im, 1.0 - x.norm());
        if d_axis < d_circle {
            (d_axis, if x.re <= 0.0 { LEFT } else { RIGHT })
        } else {
            (d_circle, CIRCLE)
        }
    };
    let z0 = Complex64::new(0.0, -t0);
    let outcomes = exec.map(n as usize, |i| {
        let mut rng = sample_rng(seed, i);
        walk(z0, WOS_EPS, &mut rng, &geom).map_or(CIRCLE, |(_, l)| l)
    });
    let count = |l: u8| outcomes.iter().filter(|&&o| o == l).count() as u64;
    let (nl, nr) = (count(LEFT), count(RIGHT));
    let left = HmEstimate::from_counts(nl, n, seed);
    let right = HmEstimate::from_counts(nr, n, seed);
    let arc = HmEstimate::from_counts(n - nl - nr, n, seed);
    let (p1, p2) = (left.value, right.value);
    let diff_sigma = ((p1 + p2 - (p1 - p2).powi(2)) / n as f64).sqrt();
    let pass = (p1 - p2).abs() <= 3.0 * diff_sigma;
    Ok(SemidiskCheck { t0, left, right, arc, diff_sigma, pass })
}

pub fn semidisk_bisection_check(t0: f64, n: u64, seed: u64) -> Result<SemidiskCheck> {
    semidisk_bisection_check_with(t0, n, seed, Exec::default())
}
