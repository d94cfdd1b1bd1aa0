//! Hyperbolic geometry of the unit disk, round disks and half-planes.
//!
//! The metric is normalised so that `λ_𝔻(z) = 1/(1-|z|²)`, i.e.
//! `ρ(0, r) = atanh r`. Besides disk coordinates the module offers the band
//! coordinate `ζ = log((1+z)/(1-z))`, which maps 𝔻 onto
//! `{|Im ζ| < π/2}` with the diameter going to ℝ and `1` to `+∞`. Orbits that
//! converge to 1 exponentially fast stay resolvable there long after
//! `1 - |z|` underflows.

use std::f64::consts::{FRAC_PI_2, LN_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad;
use crate::ComplexPoint;

/// Points closer than this to ∂𝔻 are rejected rather than clamped.
pub const BOUNDARY_TOL: f64 = 1e-12;

const QUAD_TOL: f64 = 1e-10;

pub fn check_finite(z: ComplexPoint) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("non-finite point ({}, {})", z.re, z.im)))
    }
}

pub fn check_in_disk(z: ComplexPoint) -> Result<()> {
    check_finite(z)?;
    if 1.0 - z.norm() < BOUNDARY_TOL {
        return Err(Error::outside(z, "the unit disk"));
    }
    Ok(())
}

/// `1 - |z|²` without cancellation for `|z|` near 1.
fn one_minus_sq(z: ComplexPoint) -> f64 {
    let r = z.norm();
    (1.0 - r) * (1.0 + r)
}

/// Hyperbolic distance in 𝔻.
pub fn disk_distance(z: ComplexPoint, w: ComplexPoint) -> Result<f64> {
    check_in_disk(z)?;
    check_in_disk(w)?;
    if z == w {
        return Ok(0.0);
    }
    // ½log((1+|T|)/(1-|T|)) rewritten with 1-|T|² = (1-|z|²)(1-|w|²)/|1-z w̄|²,
    // which stays accurate when both points sit near the boundary.
    let den = (Complex64::new(1.0, 0.0) - z * w.conj()).norm();
    let t = ((z - w).norm() / den).min(1.0);
    let rho = t.ln_1p() - 0.5 * (one_minus_sq(z).ln() + one_minus_sq(w).ln() - 2.0 * den.ln());
    Ok(rho.max(0.0))
}

/// Open disk or open half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RoundRegion {
    Disk {
        center: ComplexPoint,
        radius: f64,
    },
    /// `{z : Re((z - point)·conj(normal)) > 0}`
    HalfPlane {
        point: ComplexPoint,
        normal: ComplexPoint,
    },
}

impl RoundRegion {
    pub fn unit_disk() -> Self {
        RoundRegion::Disk { center: Complex64::new(0.0, 0.0), radius: 1.0 }
    }

    pub fn right_half_plane() -> Self {
        RoundRegion::HalfPlane { point: Complex64::new(0.0, 0.0), normal: Complex64::new(1.0, 0.0) }
    }

    pub fn upper_half_plane() -> Self {
        RoundRegion::HalfPlane { point: Complex64::new(0.0, 0.0), normal: Complex64::new(0.0, 1.0) }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RoundRegion::Disk { center, radius } => {
                check_finite(center)?;
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(Error::Parameter(format!("disk radius must be positive, got {radius}")));
                }
            }
            RoundRegion::HalfPlane { point, normal } => {
                check_finite(point)?;
                check_finite(normal)?;
                if (normal.norm() - 1.0).abs() > 1e-14 {
                    return Err(Error::Parameter("half-plane normal must have unit modulus".into()));
                }
            }
        }
        Ok(())
    }

    /// Euclidean distance from an interior point to the boundary.
    pub fn boundary_distance(&self, z: ComplexPoint) -> Result<f64> {
        self.validate()?;
        check_finite(z)?;
        match *self {
            RoundRegion::Disk { center, radius } => {
                let d = radius - (z - center).norm();
                if d < BOUNDARY_TOL * radius {
                    return Err(Error::outside(z, "disk"));
                }
                Ok(d)
            }
            RoundRegion::HalfPlane { point, normal } => {
                let d = ((z - point) * normal.conj()).re;
                if d <= 0.0 {
                    return Err(Error::outside(z, "half-plane"));
                }
                Ok(d)
            }
        }
    }
}

/// Hyperbolic density of a disk or half-plane.
pub fn region_density(region: &RoundRegion, z: ComplexPoint) -> Result<f64> {
    let d = region.boundary_distance(z)?;
    Ok(match *region {
        RoundRegion::Disk { center, radius } => {
            let s = (z - center).norm();
            // r / (r² - s²) written with the boundary gap d = r - s
            radius / (d * (radius + s))
        }
        RoundRegion::HalfPlane { .. } => 0.5 / d,
    })
}

/// Distance in a disk or half-plane from `sinh²ρ = |z-w|²λ(z)λ(w)`.
pub fn region_distance(region: &RoundRegion, z: ComplexPoint, w: ComplexPoint) -> Result<f64> {
    let lz = region_density(region, z)?;
    let lw = region_density(region, w)?;
    Ok(((z - w).norm() * lz.sqrt() * lw.sqrt()).asinh())
}

/// `z ↦ (az+b)/(cz+d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoebiusMap {
    pub a: ComplexPoint,
    pub b: ComplexPoint,
    pub c: ComplexPoint,
    pub d: ComplexPoint,
}

impl MoebiusMap {
    pub fn new(a: ComplexPoint, b: ComplexPoint, c: ComplexPoint, d: ComplexPoint) -> Result<Self> {
        for q in [a, b, c, d] {
            check_finite(q)?;
        }
        let scale = [a, b, c, d].iter().map(|q| q.norm()).fold(0.0, f64::max);
        if scale == 0.0 || (a * d - b * c).norm() <= 1e-14 * scale * scale {
            return Err(Error::DegenerateMap);
        }
        Ok(MoebiusMap { a, b, c, d })
    }

    pub fn identity() -> Self {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        MoebiusMap { a: l, b: o, c: o, d: l }
    }

    /// `z ↦ (1+z)/(1-z)`, from 𝔻 onto the right half-plane.
    pub fn cayley() -> Self {
        let l = Complex64::new(1.0, 0.0);
        MoebiusMap { a: l, b: l, c: -l, d: l }
    }

    /// `z ↦ e^{iθ}(z-p)/(1-p̄z)`.
    pub fn disk_automorphism(p: ComplexPoint, theta: f64) -> Result<Self> {
        check_in_disk(p)?;
        let rot = Complex64::from_polar(1.0, theta);
        MoebiusMap::new(rot, -rot * p, -p.conj(), Complex64::new(1.0, 0.0))
    }

    pub fn apply(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        check_finite(z)?;
        let den = self.c * z + self.d;
        if den.norm() == 0.0 {
            return Err(Error::Pole);
        }
        let w = (self.a * z + self.b) / den;
        if !(w.re.is_finite() && w.im.is_finite()) {
            return Err(Error::Pole);
        }
        Ok(w)
    }

    pub fn inverse(&self) -> Self {
        MoebiusMap { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MoebiusMap) -> Self {
        MoebiusMap {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }
}

pub fn apply_mobius(m: &MoebiusMap, z: ComplexPoint) -> Result<ComplexPoint> {
    m.apply(z)
}

/// A complete geodesic of 𝔻.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GeodesicArcD {
    /// Diameter through `e^{i·angle}` and `-e^{i·angle}`.
    Diameter { angle: f64 },
    /// Circle orthogonal to ∂𝔻.
    OrthoCircle { center: ComplexPoint, radius: f64 },
}

impl GeodesicArcD {
    pub fn ortho_circle(center: ComplexPoint, radius: f64) -> Result<Self> {
        check_finite(center)?;
        let c2 = center.norm_sqr();
        if !(radius > 0.0) || c2 <= 1.0 || (c2 - 1.0 - radius * radius).abs() > 1e-12 * c2 {
            return Err(Error::Parameter("circle is not orthogonal to the unit circle".into()));
        }
        Ok(GeodesicArcD::OrthoCircle { center, radius })
    }

    /// The geodesic joining two distinct points of ∂𝔻.
    pub fn from_endpoints(e1: ComplexPoint, e2: ComplexPoint) -> Result<Self> {
        let (e1, e2) = (e1 / e1.norm(), e2 / e2.norm());
        if (e1 - e2).norm() < BOUNDARY_TOL {
            return Err(Error::Parameter("geodesic endpoints coincide".into()));
        }
        let k = 1.0 + (e1 * e2.conj()).re;
        if k < 1e-14 {
            return Ok(GeodesicArcD::Diameter { angle: e1.arg() });
        }
        let center = (e1 + e2) / k;
        let radius = (center.norm_sqr() - 1.0).max(0.0).sqrt();
        Ok(GeodesicArcD::OrthoCircle { center, radius })
    }

    pub fn endpoints(&self) -> (ComplexPoint, ComplexPoint) {
        match *self {
            GeodesicArcD::Diameter { angle } => {
                let e = Complex64::from_polar(1.0, angle);
                (-e, e)
            }
            GeodesicArcD::OrthoCircle { center, radius } => {
                // cos = 1/|c| and sin = r/|c|
                let half = radius.atan();
                let dir = center.arg();
                (Complex64::from_polar(1.0, dir - half), Complex64::from_polar(1.0, dir + half))
            }
        }
    }

    /// Euclidean distance from `z` to the carrier line or circle.
    pub fn carrier_distance(&self, z: ComplexPoint) -> f64 {
        match *self {
            GeodesicArcD::Diameter { angle } => (z * Complex64::from_polar(1.0, -angle)).im.abs(),
            GeodesicArcD::OrthoCircle { center, radius } => ((z - center).norm() - radius).abs(),
        }
    }
}

/// Hyperbolic projection of `z` onto the real diameter.
pub fn foot_on_diameter(z: ComplexPoint) -> Result<f64> {
    check_in_disk(z)?;
    // c - √(c²-1), c = (|z|²+1)/(2 Re z), multiplied through by its conjugate
    // root so that Re z = 0 needs no special case.
    let s = one_minus_sq(z);
    let den = 1.0 + z.norm_sqr() + (s * s + 4.0 * z.im * z.im).sqrt();
    Ok(2.0 * z.re / den)
}

/// The geodesic crossing the real diameter perpendicularly at `x`.
pub fn perpendicular_geodesic(x: f64) -> Result<GeodesicArcD> {
    if !(x.abs() < 1.0) {
        return Err(Error::Parameter(format!("foot {x} is not in (-1, 1)")));
    }
    if x == 0.0 {
        return Ok(GeodesicArcD::Diameter { angle: FRAC_PI_2 });
    }
    let center = (x * x + 1.0) / (2.0 * x);
    let radius = (1.0 - x * x) / (2.0 * x.abs());
    Ok(GeodesicArcD::OrthoCircle { center: Complex64::new(center, 0.0), radius })
}

/// The geodesic through `z` that ends at the boundary point `end`.
pub fn geodesic_to_boundary(z: ComplexPoint, end: ComplexPoint) -> Result<GeodesicArcD> {
    check_in_disk(z)?;
    let end = end / end.norm();
    // Move z to the origin, extend the diameter through the image of `end`,
    // and map the opposite endpoint back.
    let m = MoebiusMap::disk_automorphism(z, 0.0)?;
    let far = m.inverse().apply(-m.apply(end)?)?;
    GeodesicArcD::from_endpoints(end, far)
}

/// Nearest point of `g` to `z` in the hyperbolic metric.
pub fn project_to_geodesic(z: ComplexPoint, g: &GeodesicArcD) -> Result<ComplexPoint> {
    check_in_disk(z)?;
    match *g {
        GeodesicArcD::Diameter { angle } => {
            let rot = Complex64::from_polar(1.0, angle);
            Ok(rot * foot_on_diameter(z / rot)?)
        }
        GeodesicArcD::OrthoCircle { center, radius } => {
            // Conjugate by the automorphism taking the Euclidean midpoint of g
            // to 0; g becomes a diameter there.
            let p = center * (1.0 - radius / center.norm());
            let m = MoebiusMap::disk_automorphism(p, 0.0)?;
            let (e1, _) = g.endpoints();
            let rot = m.apply(e1)?;
            let rot = rot / rot.norm();
            let x = foot_on_diameter(m.apply(z)? / rot)?;
            m.inverse().apply(rot * x)
        }
    }
}

/// Length of a polyline in the metric `density(z)|dz|`.
pub fn integrate_density_along<F>(path: &[ComplexPoint], density: F) -> Result<f64>
where
    F: Fn(ComplexPoint) -> Result<f64>,
{
    if path.len() < 2 {
        if let Some(&z) = path.first() {
            density(z)?;
        }
        return Ok(0.0);
    }
    let tol = QUAD_TOL / (path.len() - 1) as f64;
    let mut total = 0.0;
    for seg in path.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let len = (b - a).norm();
        if len == 0.0 {
            continue;
        }
        total += quad::integrate(|s| Ok(density(a + (b - a) * s)? * len), 0.0, 1.0, tol)?;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Band coordinate ζ = log((1+z)/(1-z)).

pub fn check_in_band(zeta: ComplexPoint) -> Result<()> {
    check_finite(zeta)?;
    if zeta.im.abs() >= FRAC_PI_2 {
        return Err(Error::outside(zeta, "the band |Im| < π/2"));
    }
    Ok(())
}

pub fn disk_to_band(z: ComplexPoint) -> Result<ComplexPoint> {
    check_in_disk(z)?;
    let one = Complex64::new(1.0, 0.0);
    Ok(((one + z) / (one - z)).ln())
}

/// `tanh(ζ/2)`, evaluated without overflow for large `|Re ζ|`.
pub fn band_to_disk(zeta: ComplexPoint) -> Result<ComplexPoint> {
    check_in_band(zeta)?;
    let e = (-zeta.re.abs()).exp();
    let sech = 2.0 * e / (1.0 + e * e);
    let th = zeta.re.signum() * (1.0 - e) * (1.0 + e) / (1.0 + e * e);
    let den = 1.0 + zeta.im.cos() * sech;
    Ok(Complex64::new(th / den, zeta.im.sin() * sech / den))
}

/// `cos y` for `|y| < π/2`, accurate near the band edges.
fn band_cos(y: f64) -> f64 {
    (FRAC_PI_2 - y.abs()).sin()
}

/// Hyperbolic distance between band points (equal to the disk distance of
/// their images).
pub fn band_distance(z1: ComplexPoint, z2: ComplexPoint) -> Result<f64> {
    check_in_band(z1)?;
    check_in_band(z2)?;
    if z1 == z2 {
        return Ok(0.0);
    }
    let dx = (z1.re - z2.re).abs();
    let dy = z1.im - z2.im;
    let c = band_cos(z1.im) * band_cos(z2.im);
    if dx <= 60.0 {
        let num = (0.5 * dx).sinh().powi(2) + (0.5 * dy).sin().powi(2);
        return Ok((num / c).sqrt().asinh());
    }
    // sinh s ≈ e^{dx/2} / (2√c) to full precision; stay in logs.
    let ln_s = 0.5 * dx - LN_2 - 0.5 * c.ln();
    Ok(ln_s + LN_2 + (0.5 * (1.0 + (1.0 + (-2.0 * ln_s).exp()).sqrt())).ln())
}
