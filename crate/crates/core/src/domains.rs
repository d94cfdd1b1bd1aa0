//! Koenigs domains convex in the positive direction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyp::check_finite;
use crate::ComplexPoint;

/// Largest supported rectangle-chain index; `t_6 = 2^64`.
pub const RECTANGLE_CHAIN_MAX: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Above,
    Below,
}

/// A removed half-line `{Re z ≤ a, Im z = -b}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slit {
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawDomain {
    HalfPlane { boundary_height: f64, side: Side },
    Strip { y_low: f64, y_high: f64 },
    RectangleChain { n_max: u32 },
    SlitPlane { slits: Vec<Slit> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDomain", into = "RawDomain")]
pub enum DomainDescriptor {
    /// `{Im z > h}` (above) or `{Im z < h}` (below).
    HalfPlaneDom { boundary_height: f64, side: Side },
    /// `{y_low < Im z < y_high}`.
    StripDom { y_low: f64, y_high: f64 },
    /// The rectangle chain cut after rectangle `n_max` and continued to the
    /// right by the last rectangle's strip.
    RectangleChain { n_max: u32 },
    /// ℂ minus the slits.
    SlitPlane { slits: Vec<Slit> },
}

impl TryFrom<RawDomain> for DomainDescriptor {
    type Error = Error;

    fn try_from(raw: RawDomain) -> Result<Self> {
        let d = match raw {
            RawDomain::HalfPlane { boundary_height, side } => DomainDescriptor::HalfPlaneDom { boundary_height, side },
            RawDomain::Strip { y_low, y_high } => DomainDescriptor::StripDom { y_low, y_high },
            RawDomain::RectangleChain { n_max } => DomainDescriptor::RectangleChain { n_max },
            RawDomain::SlitPlane { slits } => DomainDescriptor::SlitPlane { slits },
        };
        d.validate()?;
        Ok(d)
    }
}

impl From<DomainDescriptor> for RawDomain {
    fn from(d: DomainDescriptor) -> Self {
        match d {
            DomainDescriptor::HalfPlaneDom { boundary_height, side } => RawDomain::HalfPlane { boundary_height, side },
            DomainDescriptor::StripDom { y_low, y_high } => RawDomain::Strip { y_low, y_high },
            DomainDescriptor::RectangleChain { n_max } => RawDomain::RectangleChain { n_max },
            DomainDescriptor::SlitPlane { slits } => RawDomain::SlitPlane { slits },
        }
    }
}

/// A straight piece of boundary. Rays start at `origin` and run to infinity
/// along `direction`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Piece {
    Segment { a: ComplexPoint, b: ComplexPoint },
    Ray { origin: ComplexPoint, direction: ComplexPoint },
    Line { point: ComplexPoint, direction: ComplexPoint },
}

impl Piece {
    pub fn distance(&self, z: ComplexPoint) -> f64 {
        match *self {
            Piece::Segment { a, b } => {
                let ab = b - a;
                let len2 = ab.norm_sqr();
                let s = if len2 == 0.0 { 0.0 } else { ((z - a) * ab.conj()).re / len2 };
                (z - (a + ab * s.clamp(0.0, 1.0))).norm()
            }
            Piece::Ray { origin, direction } => {
                let s = ((z - origin) * direction.conj()).re.max(0.0);
                (z - (origin + direction * s)).norm()
            }
            Piece::Line { point, direction } => ((z - point) * direction.conj()).im.abs(),
        }
    }

    fn mirrored(&self) -> Piece {
        match *self {
            Piece::Segment { a, b } => Piece::Segment { a: a.conj(), b: b.conj() },
            Piece::Ray { origin, direction } => Piece::Ray { origin: origin.conj(), direction: direction.conj() },
            Piece::Line { point, direction } => Piece::Line { point: point.conj(), direction: direction.conj() },
        }
    }
}

/// Distance from the real point `x` to one boundary piece, valid for
/// `lo ≤ x ≤ hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisProfile {
    pub lo: f64,
    pub hi: f64,
    pub shape: Profile,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    /// `c`
    Const(f64),
    /// `√((x-x0)² + c²)`
    Radial { x0: f64, c: f64 },
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Const(c) => c,
            Profile::Radial { x0, c } => (x - x0).hypot(c),
        }
    }
}

/// `log2 t_n` for the rectangle chain, `t_n = 2^{2^n}`.
pub fn chain_log2_t(n: u32) -> f64 {
    2f64.powi(n as i32)
}

pub fn chain_t(n: u32) -> f64 {
    2f64.powf(chain_log2_t(n))
}

/// Exponent `a_n` of the half-height `t_n^{a_n}` (1/2 for odd n, 1/3 for
/// even n ≥ 2).
pub fn chain_exponent(n: u32) -> f64 {
    if n % 2 == 1 {
        0.5
    } else {
        1.0 / 3.0
    }
}

pub fn chain_log2_height(n: u32) -> f64 {
    if n == 0 {
        0.0
    } else {
        chain_exponent(n) * chain_log2_t(n)
    }
}

pub fn chain_height(n: u32) -> f64 {
    2f64.powf(chain_log2_height(n))
}

pub fn rectangle_chain(n_max: u32) -> Result<DomainDescriptor> {
    let d = DomainDescriptor::RectangleChain { n_max };
    d.validate()?;
    Ok(d)
}

pub fn slit_plane(slits: Vec<Slit>) -> Result<DomainDescriptor> {
    let d = DomainDescriptor::SlitPlane { slits };
    d.validate()?;
    Ok(d)
}

impl DomainDescriptor {
    pub fn half_plane_above(boundary_height: f64) -> Result<Self> {
        let d = DomainDescriptor::HalfPlaneDom { boundary_height, side: Side::Above };
        d.validate()?;
        Ok(d)
    }

    pub fn strip(y_low: f64, y_high: f64) -> Result<Self> {
        let d = DomainDescriptor::StripDom { y_low, y_high };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDomain(m));
        match self {
            &DomainDescriptor::HalfPlaneDom { boundary_height: h, side } => {
                let ok = h.is_finite()
                    && match side {
                        Side::Above => h < 0.0,
                        Side::Below => h > 0.0,
                    };
                if !ok {
                    return bad(format!("half-plane {side:?} height {h} must keep 0 inside"));
                }
            }
            &DomainDescriptor::StripDom { y_low, y_high } => {
                if !(y_low.is_finite() && y_high.is_finite() && y_low < 0.0 && 0.0 < y_high) {
                    return bad(format!("strip ({y_low}, {y_high}) must satisfy y_low < 0 < y_high"));
                }
            }
            &DomainDescriptor::RectangleChain { n_max } => {
                if !(1..=RECTANGLE_CHAIN_MAX).contains(&n_max) {
                    return bad(format!("rectangle chain n_max = {n_max} outside 1..={RECTANGLE_CHAIN_MAX}"));
                }
            }
            DomainDescriptor::SlitPlane { slits } => {
                if slits.is_empty() {
                    return bad("slit plane needs at least one slit".into());
                }
                for s in slits {
                    if !(s.a.is_finite() && s.b.is_finite() && s.b > 0.0) {
                        return bad(format!("slit ({}, {}) needs finite a and b > 0", s.a, s.b));
                    }
                }
                for w in slits.windows(2) {
                    if !(w[0].a + w[0].b < w[1].a - w[1].b) {
                        return bad(format!(
                            "slits ({}, {}) and ({}, {}) are out of order",
                            w[0].a, w[0].b, w[1].a, w[1].b
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        match self {
            DomainDescriptor::HalfPlaneDom { boundary_height, side } => {
                format!("half_plane({boundary_height}, {side:?})")
            }
            DomainDescriptor::StripDom { y_low, y_high } => format!("strip({y_low}, {y_high})"),
            DomainDescriptor::RectangleChain { n_max } => format!("rectangle_chain({n_max})"),
            DomainDescriptor::SlitPlane { slits } => {
                let s: Vec<String> = slits.iter().map(|s| format!("({}, {})", s.a, s.b)).collect();
                format!("slit_plane[{}]", s.join(", "))
            }
        }
    }

    pub fn is_conjugation_symmetric(&self) -> bool {
        match *self {
            DomainDescriptor::StripDom { y_low, y_high } => y_low == -y_high,
            DomainDescriptor::RectangleChain { .. } => true,
            _ => false,
        }
    }

    /// Right end of the region where distance queries are answered.
    pub fn query_limit(&self) -> f64 {
        match *self {
            DomainDescriptor::RectangleChain { n_max } => chain_t(n_max),
            _ => f64::INFINITY,
        }
    }

    pub fn contains(&self, z: ComplexPoint) -> bool {
        if check_finite(z).is_err() {
            return false;
        }
        match self {
            &DomainDescriptor::HalfPlaneDom { boundary_height: h, side } => match side {
                Side::Above => z.im > h,
                Side::Below => z.im < h,
            },
            &DomainDescriptor::StripDom { y_low, y_high } => y_low < z.im && z.im < y_high,
            &DomainDescriptor::RectangleChain { n_max } => z.im.abs() < chain_height(chain_index(n_max, z.re)),
            DomainDescriptor::SlitPlane { slits } => slits.iter().all(|s| !(z.re <= s.a && z.im == -s.b)),
        }
    }

    /// Boundary as straight pieces (slits count once; rectangle-chain pieces
    /// are listed for both half planes).
    pub fn boundary_pieces(&self) -> Vec<Piece> {
        let c = ComplexPoint::new;
        let east = c(1.0, 0.0);
        match self {
            &DomainDescriptor::HalfPlaneDom { boundary_height: h, .. } => {
                vec![Piece::Line { point: c(0.0, h), direction: east }]
            }
            &DomainDescriptor::StripDom { y_low, y_high } => vec![
                Piece::Line { point: c(0.0, y_low), direction: east },
                Piece::Line { point: c(0.0, y_high), direction: east },
            ],
            &DomainDescriptor::RectangleChain { n_max } => {
                let mut upper = vec![Piece::Ray { origin: c(chain_t(0), 1.0), direction: -east }];
                for j in 1..=n_max {
                    let x = chain_t(j - 1);
                    upper.push(Piece::Segment { a: c(x, chain_height(j - 1)), b: c(x, chain_height(j)) });
                    upper.push(Piece::Segment { a: c(x, chain_height(j)), b: c(chain_t(j), chain_height(j)) });
                }
                upper.push(Piece::Ray { origin: c(chain_t(n_max), chain_height(n_max)), direction: east });
                let lower: Vec<Piece> = upper.iter().map(Piece::mirrored).collect();
                upper.into_iter().chain(lower).collect()
            }
            DomainDescriptor::SlitPlane { slits } => {
                slits.iter().map(|s| Piece::Ray { origin: c(s.a, -s.b), direction: -east }).collect()
            }
        }
    }

    /// Exact Euclidean distance to the boundary.
    pub fn dist_to_boundary(&self, z: ComplexPoint) -> Result<f64> {
        if !self.contains(z) {
            return Err(Error::outside(z, self.name()));
        }
        if z.re > self.query_limit() {
            return Err(Error::BeyondTruncation { re: z.re, limit: self.query_limit() });
        }
        let d = match *self {
            DomainDescriptor::HalfPlaneDom { boundary_height: h, .. } => (z.im - h).abs(),
            DomainDescriptor::StripDom { y_low, y_high } => (z.im - y_low).min(y_high - z.im),
            _ => self.boundary_pieces().iter().map(|p| p.distance(z)).fold(f64::INFINITY, f64::min),
        };
        Ok(d)
    }

    /// Distance from real points to each boundary piece, as closed-form
    /// profiles on subintervals of ℝ.
    pub fn axis_profiles(&self) -> Vec<AxisProfile> {
        let inf = f64::INFINITY;
        let whole = |shape| AxisProfile { lo: -inf, hi: inf, shape };
        let mut out = Vec::new();
        for piece in self.boundary_pieces() {
            match piece {
                Piece::Line { point, .. } => out.push(whole(Profile::Const(point.im.abs()))),
                Piece::Ray { origin, direction } => {
                    let (x0, h) = (origin.re, origin.im.abs());
                    if direction.re < 0.0 {
                        out.push(AxisProfile { lo: -inf, hi: x0, shape: Profile::Const(h) });
                        out.push(AxisProfile { lo: x0, hi: inf, shape: Profile::Radial { x0, c: h } });
                    } else {
                        out.push(AxisProfile { lo: -inf, hi: x0, shape: Profile::Radial { x0, c: h } });
                        out.push(AxisProfile { lo: x0, hi: inf, shape: Profile::Const(h) });
                    }
                }
                Piece::Segment { a, b } if a.re == b.re => {
                    // vertical, on one side of the axis
                    let c = a.im.abs().min(b.im.abs());
                    out.push(whole(Profile::Radial { x0: a.re, c }));
                }
                Piece::Segment { a, b } => {
                    let (xa, xb) = (a.re.min(b.re), a.re.max(b.re));
                    let h = a.im.abs();
                    out.push(AxisProfile { lo: -inf, hi: xa, shape: Profile::Radial { x0: xa, c: h } });
                    out.push(AxisProfile { lo: xa, hi: xb, shape: Profile::Const(h) });
                    out.push(AxisProfile { lo: xb, hi: inf, shape: Profile::Radial { x0: xb, c: h } });
                }
            }
        }
        out
    }
}

/// Index `j` with `t_{j-1} < x ≤ t_j` (0 for `x ≤ 2`), capped at `n_max`.
pub fn chain_index(n_max: u32, x: f64) -> u32 {
    (0..n_max).find(|&j| x <= chain_t(j)).unwrap_or(n_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im)
    }

    #[test]
    fn contains_examples() {
        let s = slit_plane(vec![Slit { a: 0.0, b: 1.0 }]).unwrap();
        assert!(s.contains(c(0.0, 0.0)));
        assert!(!s.contains(c(-1.0, -1.0)));
        assert!(s.contains(c(0.5, -1.0)));
        let r = rectangle_chain(2).unwrap();
        assert!(!r.contains(c(3.0, 2.0)));
        assert!(r.contains(c(3.0, 1.9)));
        assert!(r.contains(c(2.0, 0.99)));
        assert!(!r.contains(c(2.0, 1.0)));
        assert!(r.contains(c(4.0, 1.99)));
    }

    #[test]
    fn chain_geometry() {
        assert_eq!(chain_t(1), 4.0);
        assert_eq!(chain_t(2), 16.0);
        assert_eq!(chain_t(6), 2f64.powi(64));
        assert_eq!(chain_height(1), 2.0);
        assert!((chain_height(2) - 16f64.cbrt()).abs() < 1e-15);
        let r = rectangle_chain(2).unwrap();
        assert!(r.contains(c(10.0, 16f64.cbrt() - 1e-9)));
        assert!(!r.contains(c(10.0, 16f64.cbrt())));
        for n in 1..=6 {
            assert!(chain_height(n) > chain_height(n - 1));
        }
        let pieces = r.boundary_pieces();
        for p in &pieces {
            assert!(pieces.contains(&p.mirrored()));
        }
    }

    #[test]
    fn distance_examples() {
        let s = DomainDescriptor::strip(-1.0, 1.0).unwrap();
        assert_eq!(s.dist_to_boundary(c(0.0, 0.0)).unwrap(), 1.0);
        let sl = slit_plane(vec![Slit { a: 0.0, b: 1.0 }]).unwrap();
        assert_eq!(sl.dist_to_boundary(c(0.0, 0.0)).unwrap(), 1.0);
        assert!((sl.dist_to_boundary(c(3.0, 3.0)).unwrap() - 5.0).abs() < 1e-15);
        let r = rectangle_chain(6).unwrap();
        for n in 1..=6 {
            let h = chain_height(n);
            for x in [chain_t(n - 1) + h, 0.5 * (chain_t(n - 1) + h + chain_t(n)), chain_t(n)] {
                if x <= chain_t(n) {
                    assert_eq!(r.dist_to_boundary(c(x, 0.0)).unwrap(), h, "n={n} x={x}");
                }
            }
        }
        assert!(matches!(
            rectangle_chain(2).unwrap().dist_to_boundary(c(17.0, 0.0)),
            Err(Error::BeyondTruncation { .. })
        ));
        assert!(s.dist_to_boundary(c(0.0, 1.0)).is_err());
    }

    #[test]
    fn construction_errors() {
        assert!(slit_plane(vec![]).is_err());
        assert!(slit_plane(vec![Slit { a: 0.0, b: 1.0 }, Slit { a: 1.5, b: 1.0 }]).is_err());
        assert!(slit_plane(vec![Slit { a: 0.0, b: 1.0 }, Slit { a: 2.5, b: 1.0 }]).is_ok());
        assert!(slit_plane(vec![Slit { a: 0.0, b: 0.0 }]).is_err());
        assert!(rectangle_chain(0).is_err());
        assert!(rectangle_chain(7).is_err());
        assert!(DomainDescriptor::strip(0.5, 1.0).is_err());
        assert!(DomainDescriptor::half_plane_above(1.0).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let d = DomainDescriptor::HalfPlaneDom { boundary_height: -1.0, side: Side::Above };
        let s = toml::to_string(&d).unwrap();
        assert!(s.contains("kind = \"half_plane\""));
        let back: DomainDescriptor = toml::from_str(&s).unwrap();
        assert_eq!(back, d);
        let bad: std::result::Result<DomainDescriptor, _> =
            toml::from_str("kind = \"strip\"\ny_low = 1.0\ny_high = 2.0\n");
        assert!(bad.is_err());
        let sl: DomainDescriptor = toml::from_str("kind = \"slit_plane\"\nslits = [{ a = 20.0, b = 1.0 }]\n").unwrap();
        assert_eq!(sl, DomainDescriptor::SlitPlane { slits: vec![Slit { a: 20.0, b: 1.0 }] });
    }

    #[test]
    fn axis_profiles_match_distance() {
        let r = rectangle_chain(4).unwrap();
        let profiles = r.axis_profiles();
        for k in 0..2000 {
            let x = -3.0 + k as f64 * (chain_t(4) + 3.0) / 1999.0;
            let env = profiles
                .iter()
                .filter(|p| p.lo <= x && x <= p.hi)
                .map(|p| p.shape.eval(x))
                .fold(f64::INFINITY, f64::min);
            let d = r.dist_to_boundary(c(x, 0.0)).unwrap();
            assert!((env - d).abs() <= 1e-12 * d.max(1.0), "x={x} {env} {d}");
        }
    }
}
