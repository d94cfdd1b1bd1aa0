//! Explicit Riemann maps onto the supported Koenigs domains.
//!
//! A map handle is a chain of primitive links read from the domain side:
//! applying the links in order takes `w ∈ Ω` to the disk. Values travel
//! through the chain as [`Lifted`] numbers, which switch to a logarithmic
//! representation once an intermediate (for instance `exp` of a far point of
//! a strip) would overflow. The last link of a Koenigs chain is always the
//! Cayley map from the right half-plane, so the band coordinate
//! `ζ = log((1+z)/(1-z))` is just the logarithm of the value entering it.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::domains::{DomainDescriptor, Side};
use crate::error::{Error, Result};
use crate::hyp::{self, check_finite, check_in_band, check_in_disk, MoebiusMap, BOUNDARY_TOL};
use crate::ComplexPoint;

/// Primitive conformal maps, each stated in the domain-to-disk direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Link {
    /// `w ↦ a w + b`
    Affine {
        a: ComplexPoint,
        b: ComplexPoint,
    },
    /// `s ↦ e^s`, from `{|Im s| < π/2}` onto the right half-plane.
    ExpStrip,
    /// `s ↦ √(s+i)` on ℂ minus `{Re s ≤ 0, Im s = -1}`, principal branch.
    SlitSqrt,
    /// `u ↦ (u-1)/(u+1)`, from the right half-plane onto 𝔻.
    Cayley,
    Moebius(MoebiusMap),
}

/// Above this real part a value is carried by its logarithm.
const LOG_SWITCH: f64 = 40.0;

/// A complex number `Plain(c)` or `Log(ℓ) = e^ℓ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lifted {
    Plain(ComplexPoint),
    Log(ComplexPoint),
}

fn wrap_angle(t: f64) -> f64 {
    if t > -PI && t <= PI {
        return t;
    }
    let r = (t + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

fn wrap(l: ComplexPoint) -> ComplexPoint {
    Complex64::new(l.re, wrap_angle(l.im))
}

/// `log(1+q)` without cancellation for small `q`.
fn ln1p(q: ComplexPoint) -> ComplexPoint {
    Complex64::new(0.5 * (2.0 * q.re + q.norm_sqr()).ln_1p(), q.im.atan2(1.0 + q.re))
}

/// Principal square root, accurate on both sides of the negative axis.
pub(crate) fn principal_sqrt(z: ComplexPoint) -> ComplexPoint {
    let r = z.norm();
    if r == 0.0 {
        return z;
    }
    if z.re >= 0.0 {
        let t = (0.5 * (r + z.re)).sqrt();
        Complex64::new(t, z.im / (2.0 * t))
    } else {
        let t = (0.5 * (r - z.re)).sqrt();
        Complex64::new(z.im.abs() / (2.0 * t), t.copysign(z.im))
    }
}

impl Lifted {
    fn tidy(self) -> Self {
        match self {
            Lifted::Log(l) if l.re < LOG_SWITCH => Lifted::Plain(l.exp()),
            Lifted::Plain(c) if c.norm() > LOG_SWITCH.exp() => Lifted::Log(c.ln()),
            other => other,
        }
    }

    /// Principal logarithm.
    pub fn ln(self) -> ComplexPoint {
        match self {
            Lifted::Plain(c) => c.ln(),
            Lifted::Log(l) => wrap(l),
        }
    }

    pub fn plain(self) -> Result<ComplexPoint> {
        match self {
            Lifted::Plain(c) => Ok(c),
            Lifted::Log(l) => {
                let c = l.exp();
                if c.re.is_finite() && c.im.is_finite() {
                    Ok(c)
                } else {
                    Err(Error::Numeric { what: "intermediate value overflows".into(), residual: l.re })
                }
            }
        }
    }

    fn affine(self, a: ComplexPoint, b: ComplexPoint) -> Self {
        match self {
            Lifted::Plain(c) => Lifted::Plain(a * c + b).tidy(),
            Lifted::Log(l) => {
                let big = a.ln() + l;
                Lifted::Log(big + ln1p(b * (-big).exp())).tidy()
            }
        }
    }
}

/// Ordered chain of links, applied first to last from the domain side.
#[derive(Clone, Debug, PartialEq)]
pub struct MapHandle {
    pub links: Vec<Link>,
}

impl MapHandle {
    /// Domain side to disk side. Returns the value and `log` of the
    /// derivative of the composed map.
    pub fn pull(&self, w: ComplexPoint) -> Result<(Lifted, ComplexPoint)> {
        self.pull_prefix(w, self.links.len())
    }

    fn pull_prefix(&self, w: ComplexPoint, upto: usize) -> Result<(Lifted, ComplexPoint)> {
        let mut v = Lifted::Plain(w);
        let mut lnd = Complex64::new(0.0, 0.0);
        for link in &self.links[..upto] {
            (v, lnd) = step_forward(link, v, lnd)?;
        }
        Ok((v, lnd))
    }

    /// Disk side to domain side.
    pub fn push(&self, z: Lifted) -> Result<Lifted> {
        self.push_from(z, self.links.len())
    }

    fn push_from(&self, z: Lifted, from: usize) -> Result<Lifted> {
        let mut v = z;
        for link in self.links[..from].iter().rev() {
            v = step_inverse(link, v)?;
        }
        Ok(v)
    }

    fn ends_with_cayley(&self) -> Result<usize> {
        match self.links.last() {
            Some(Link::Cayley) => Ok(self.links.len() - 1),
            _ => Err(Error::Precondition("band coordinates need a chain ending in the Cayley link".into())),
        }
    }

    /// Band coordinate of the image of `w` and `log dζ/dw`.
    pub fn pull_band(&self, w: ComplexPoint) -> Result<(ComplexPoint, ComplexPoint)> {
        let k = self.ends_with_cayley()?;
        let (u, lnd) = self.pull_prefix(w, k)?;
        let zeta = u.ln();
        check_in_band(zeta)?;
        Ok((zeta, lnd - zeta))
    }

    pub fn push_band(&self, zeta: ComplexPoint) -> Result<ComplexPoint> {
        let k = self.ends_with_cayley()?;
        check_in_band(zeta)?;
        self.push_from(Lifted::Log(zeta).tidy(), k)?.plain()
    }
}

fn step_forward(link: &Link, v: Lifted, lnd: ComplexPoint) -> Result<(Lifted, ComplexPoint)> {
    Ok(match *link {
        Link::Affine { a, b } => (v.affine(a, b), lnd + a.ln()),
        Link::ExpStrip => {
            let s = v.plain()?;
            if s.im.abs() >= FRAC_PI_2 {
                return Err(Error::outside(s, "the strip |Im| < π/2"));
            }
            (Lifted::Log(s).tidy(), lnd + s)
        }
        Link::SlitSqrt => {
            let out = slit_sqrt_lifted(v)?;
            (out, lnd - out.ln() - std::f64::consts::LN_2)
        }
        Link::Cayley => {
            // (u-1)/(u+1) = 1 - 2/(u+1); derivative 2/(u+1)²
            let lu1 = match v {
                Lifted::Plain(u) => (u + 1.0).ln(),
                Lifted::Log(l) => wrap(l) + ln1p((-l).exp()),
            };
            let z = Complex64::new(1.0, 0.0) - 2.0 * (-lu1).exp();
            (Lifted::Plain(z), lnd + std::f64::consts::LN_2 - 2.0 * lu1)
        }
        Link::Moebius(m) => {
            let z = v.plain()?;
            let den = m.c * z + m.d;
            (Lifted::Plain(m.apply(z)?), lnd + (m.a * m.d - m.b * m.c).ln() - 2.0 * den.ln())
        }
    })
}

fn step_inverse(link: &Link, v: Lifted) -> Result<Lifted> {
    Ok(match *link {
        Link::Affine { a, b } => v.affine(1.0 / a, -b / a),
        Link::ExpStrip => Lifted::Plain(v.ln()),
        Link::SlitSqrt => match v {
            Lifted::Plain(u) => Lifted::Plain(u * u - Complex64::new(0.0, 1.0)).tidy(),
            Lifted::Log(l) => Lifted::Log(2.0 * l + ln1p(Complex64::new(0.0, -1.0) * (-2.0 * l).exp())).tidy(),
        },
        Link::Cayley => {
            let z = v.plain()?;
            let one = Complex64::new(1.0, 0.0);
            if z == one {
                return Err(Error::Pole);
            }
            Lifted::Plain((one + z) / (one - z)).tidy()
        }
        Link::Moebius(m) => Lifted::Plain(m.inverse().apply(v.plain()?)?),
    })
}

fn slit_sqrt_lifted(v: Lifted) -> Result<Lifted> {
    match v {
        Lifted::Plain(z) => slit_sqrt_forward(z).map(Lifted::Plain),
        Lifted::Log(l) => {
            // √(e^ℓ + i) = e^{ℓ/2} √(1 + i e^{-ℓ})
            let shifted = wrap(l + ln1p(Complex64::new(0.0, 1.0) * (-l).exp()));
            let gap = shifted.re.exp() * (PI - shifted.im.abs()).min(FRAC_PI_2).sin();
            if shifted.im.abs() > FRAC_PI_2 && gap < BOUNDARY_TOL {
                return Err(Error::outside(Complex64::new(f64::INFINITY, -1.0), "the slit plane"));
            }
            Ok(Lifted::Log(0.5 * shifted).tidy())
        }
    }
}

/// `√(z+i)` with positive real part on ℂ minus `{Re z ≤ 0, Im z = -1}`.
pub fn slit_sqrt_forward(z: ComplexPoint) -> Result<ComplexPoint> {
    check_finite(z)?;
    let s = z + Complex64::new(0.0, 1.0);
    let gap = if s.re <= 0.0 { s.im.abs() } else { s.norm() };
    if gap < BOUNDARY_TOL {
        return Err(Error::outside(z, "the slit plane minus {Re ≤ 0, Im = -1}"));
    }
    Ok(principal_sqrt(s))
}

/// Normalised Riemann map `h: 𝔻 → Ω` with `h(0) = 0` and `h(1) = P_∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct KoenigsMap {
    pub domain: DomainDescriptor,
    /// Chain from Ω to 𝔻, normalisation included.
    pub handle: MapHandle,
    /// Disk automorphism fixing 1 that was appended to the raw chain.
    pub normalization: MoebiusMap,
}

pub fn build_koenigs(d: &DomainDescriptor) -> Result<KoenigsMap> {
    d.validate()?;
    let c = Complex64::new;
    let mut links = match *d {
        DomainDescriptor::HalfPlaneDom { boundary_height: h, side: Side::Above } => {
            vec![Link::Affine { a: c(0.0, -1.0), b: c(-h, 0.0) }]
        }
        DomainDescriptor::HalfPlaneDom { boundary_height: h, side: Side::Below } => {
            vec![Link::Affine { a: c(0.0, 1.0), b: c(h, 0.0) }]
        }
        DomainDescriptor::StripDom { y_low, y_high } => {
            let width = y_high - y_low;
            let mid = 0.5 * (y_low + y_high);
            vec![Link::Affine { a: c(PI / width, 0.0), b: c(0.0, -PI * mid / width) }, Link::ExpStrip]
        }
        DomainDescriptor::SlitPlane { ref slits } if slits.len() == 1 => {
            let s = slits[0];
            vec![Link::Affine { a: c(1.0 / s.b, 0.0), b: c(-s.a / s.b, 0.0) }, Link::SlitSqrt]
        }
        DomainDescriptor::SlitPlane { .. } => {
            return Err(Error::Unsupported("no explicit Riemann map for slit planes with more than one slit".into()))
        }
        DomainDescriptor::RectangleChain { .. } => {
            return Err(Error::Unsupported("no explicit Riemann map for the rectangle chain".into()))
        }
    };
    // Every raw chain sends Ω onto the right half-plane with P_∞ going to ∞.
    // Translating along iℝ and scaling by a positive factor keeps ∞ fixed;
    // choose them so that 0 lands on 1, i.e. on the disk origin.
    let raw = MapHandle { links: links.clone() };
    let u0 = raw.pull(c(0.0, 0.0))?.0.plain()?;
    let (alpha, beta) = (u0.re, u0.im);
    if !(alpha > 0.0) {
        return Err(Error::Numeric { what: "image of 0 left the right half-plane".into(), residual: alpha });
    }
    links.push(Link::Affine { a: c(1.0 / alpha, 0.0), b: c(0.0, -beta / alpha) });
    links.push(Link::Cayley);

    let to_disk = MoebiusMap::new(c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0))?;
    let shift = MoebiusMap::new(c(1.0 / alpha, 0.0), c(0.0, -beta / alpha), c(0.0, 0.0), c(1.0, 0.0))?;
    let normalization = to_disk.compose(&shift).compose(&to_disk.inverse());
    Ok(KoenigsMap { domain: d.clone(), handle: MapHandle { links }, normalization })
}

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 50;

impl KoenigsMap {
    fn check_domain_point(&self, w: ComplexPoint) -> Result<()> {
        check_finite(w)?;
        if !self.domain.contains(w) || self.domain.dist_to_boundary(w)? < BOUNDARY_TOL {
            return Err(Error::outside(w, self.domain.name()));
        }
        Ok(())
    }

    /// `h(z)`.
    pub fn forward(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        check_in_disk(z)?;
        self.handle.push(Lifted::Plain(z))?.plain()
    }

    /// `h⁻¹(w)`, in closed form with a Newton polish if the round trip is off.
    pub fn inverse(&self, w: ComplexPoint) -> Result<ComplexPoint> {
        self.check_domain_point(w)?;
        let (z, _) = self.handle.pull(w)?;
        let mut z = z.plain()?;
        if 1.0 - z.norm() < BOUNDARY_TOL {
            return Err(Error::Numeric {
                what: "pullback is too close to the unit circle for disk coordinates".into(),
                residual: 1.0 - z.norm(),
            });
        }
        let scale = 1.0 + w.norm();
        if (self.forward(z)? - w).norm() <= 1e-10 * scale {
            return Ok(z);
        }
        for _ in 0..NEWTON_MAX_ITER {
            let hz = self.forward(z)?;
            let r = hz - w;
            if r.norm() <= NEWTON_TOL * scale {
                return Ok(z);
            }
            // h'(z) = 1 / (d h⁻¹/dw) at w = h(z)
            let (_, lnd) = self.handle.pull(hz)?;
            z -= r * lnd.exp();
            check_in_disk(z)?;
        }
        Err(Error::Numeric {
            what: "Newton refinement of h⁻¹ did not converge".into(),
            residual: (self.forward(z)? - w).norm(),
        })
    }

    /// Band coordinate of `h⁻¹(w)` plus `log dζ/dw`.
    pub fn pull_band(&self, w: ComplexPoint) -> Result<(ComplexPoint, ComplexPoint)> {
        self.check_domain_point(w)?;
        self.handle.pull_band(w)
    }

    /// `h(tanh(ζ/2))`.
    pub fn push_band(&self, zeta: ComplexPoint) -> Result<ComplexPoint> {
        self.handle.push_band(zeta)
    }

    /// Hyperbolic density of Ω.
    pub fn density(&self, w: ComplexPoint) -> Result<f64> {
        let (zeta, lnd) = self.pull_band(w)?;
        Ok(lnd.re.exp() / (2.0 * (FRAC_PI_2 - zeta.im.abs()).sin()))
    }

    /// `log |1 - h⁻¹(x)|` for real `x`, finite even when the gap underflows.
    pub fn log_boundary_gap(&self, x: f64) -> Result<f64> {
        let (zeta, _) = self.pull_band(Complex64::new(x, 0.0))?;
        // 1 - z = 2/(u+1) with u = e^ζ
        let l = if zeta.re > LOG_SWITCH { zeta + ln1p((-zeta).exp()) } else { (zeta.exp() + 1.0).ln() };
        Ok(std::f64::consts::LN_2 - l.re)
    }
}

pub fn map_forward(k: &KoenigsMap, z: ComplexPoint) -> Result<ComplexPoint> {
    k.forward(z)
}

pub fn map_inverse(k: &KoenigsMap, w: ComplexPoint) -> Result<ComplexPoint> {
    k.inverse(w)
}

/// `ρ_Ω(w1, w2)` as the disk distance of the pullbacks.
pub fn domain_distance(k: &KoenigsMap, w1: ComplexPoint, w2: ComplexPoint) -> Result<f64> {
    if w1 == w2 {
        k.check_domain_point(w1)?;
        return Ok(0.0);
    }
    let (a, _) = k.pull_band(w1)?;
    let (b, _) = k.pull_band(w2)?;
    hyp::band_distance(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{slit_plane, Slit};

    fn c(re: f64, im: f64) -> ComplexPoint {
        Complex64::new(re, im)
    }

    fn models() -> Vec<KoenigsMap> {
        [
            DomainDescriptor::half_plane_above(-1.0).unwrap(),
            DomainDescriptor::HalfPlaneDom { boundary_height: 2.0, side: Side::Below },
            DomainDescriptor::strip(-1.0, 1.0).unwrap(),
            DomainDescriptor::strip(-0.5, 2.0).unwrap(),
            slit_plane(vec![Slit { a: 20.0, b: 1.0 }]).unwrap(),
            slit_plane(vec![Slit { a: -3.0, b: 0.5 }]).unwrap(),
        ]
        .iter()
        .map(|d| build_koenigs(d).unwrap())
        .collect()
    }

    #[test]
    fn slit_sqrt_examples() {
        let r = 2f64.powf(0.25);
        let a = slit_sqrt_forward(c(-1.0, 0.0)).unwrap();
        assert!((a - Complex64::from_polar(r, 3.0 * PI / 8.0)).norm() < 1e-15);
        let b = slit_sqrt_forward(c(1.0, 0.0)).unwrap();
        assert!((b - Complex64::from_polar(r, PI / 8.0)).norm() < 1e-15);
        assert_eq!(slit_sqrt_forward(c(4.0, -1.0)).unwrap(), c(2.0, 0.0));
        let s = slit_sqrt_forward(c(0.0, 0.0)).unwrap();
        assert!((s - Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
        assert!(slit_sqrt_forward(c(-2.0, -1.0)).is_err());
        assert!(slit_sqrt_forward(c(-2.0, -1.0 + 1e-13)).is_err());
        // just above and below the cut
        let up = slit_sqrt_forward(c(-2.0, -1.0 + 1e-9)).unwrap();
        let dn = slit_sqrt_forward(c(-2.0, -1.0 - 1e-9)).unwrap();
        assert!(up.re > 0.0 && dn.re > 0.0 && up.im > 1.4 && dn.im < -1.4);
    }

    #[test]
    fn normalisation() {
        for k in models() {
            assert!(k.forward(c(0.0, 0.0)).unwrap().norm() < 1e-10, "{}", k.domain.name());
            assert!(k.inverse(c(0.0, 0.0)).unwrap().norm() < 1e-12);
            // normalising automorphism fixes 1
            let one = k.normalization.apply(c(1.0 - 1e-9, 0.0)).unwrap();
            assert!((one - 1.0).norm() < 1e-8);
        }
    }

    #[test]
    fn pullbacks_approach_one() {
        for k in models() {
            let g5 = k.log_boundary_gap(1e5).unwrap();
            let g6 = k.log_boundary_gap(1e6).unwrap();
            assert!(g6 < g5 && g6 < -5.0, "{} {g5} {g6}", k.domain.name());
            let mut prev = 0.0;
            for x in [10.0, 100.0, 1000.0] {
                let g = k.log_boundary_gap(x).unwrap();
                assert!(g < prev);
                prev = g;
            }
        }
    }

    #[test]
    fn round_trip() {
        for k in models() {
            for i in 0..200 {
                let r = 0.97 * ((i as f64 * 0.618_033_988_75) % 1.0).sqrt();
                let z = Complex64::from_polar(r, i as f64 * 2.399_963);
                let w = k.forward(z).unwrap();
                let back = k.inverse(w).unwrap();
                assert!((back - z).norm() < 1e-10, "{} {z} {back}", k.domain.name());
            }
        }
    }

    #[test]
    fn strip_axis_pullback_is_real() {
        let k = build_koenigs(&DomainDescriptor::strip(-1.0, 1.0).unwrap()).unwrap();
        let mut prev = 0.0;
        for t in [0.5, 1.0, 2.0, 5.0, 10.0] {
            let z = k.inverse(c(t, 0.0)).unwrap();
            assert!(z.im.abs() < 1e-15 && z.re > prev && z.re < 1.0);
            prev = z.re;
        }
        // far along the strip only the band coordinate is resolvable
        assert!(k.inverse(c(1000.0, 0.0)).is_err());
        let (zeta, _) = k.pull_band(c(1000.0, 0.0)).unwrap();
        assert!((zeta.re - PI * 1000.0 / 2.0).abs() < 1e-9);
        let back = k.push_band(zeta).unwrap();
        assert!((back - 1000.0).norm() < 1e-9);
    }

    #[test]
    fn distance_examples() {
        let hp = build_koenigs(&DomainDescriptor::half_plane_above(-1.0).unwrap()).unwrap();
        let d = domain_distance(&hp, c(0.0, 0.0), c(0.0, 1.0)).unwrap();
        assert!((d - 0.5 * 2f64.ln()).abs() < 1e-14);
        for k in models() {
            assert_eq!(domain_distance(&k, c(0.3, 0.2), c(0.3, 0.2)).unwrap(), 0.0);
        }
        assert!(domain_distance(&hp, c(0.0, -1.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn unsupported_domains() {
        let two = slit_plane(vec![Slit { a: 0.0, b: 1.0 }, Slit { a: 5.0, b: 1.0 }]).unwrap();
        assert!(matches!(build_koenigs(&two), Err(Error::Unsupported(_))));
        let rc = crate::domains::rectangle_chain(3).unwrap();
        assert!(matches!(build_koenigs(&rc), Err(Error::Unsupported(_))));
    }

    #[test]
    fn density_matches_disk_pullback() {
        for k in models() {
            for w in [c(0.0, 0.0), c(1.5, 0.3), c(-2.0, 0.1), c(7.0, -0.2)] {
                let z = k.inverse(w).unwrap();
                let (_, lnd) = k.handle.pull(w).unwrap();
                let expect = lnd.re.exp() / (1.0 - z.norm_sqr());
                let got = k.density(w).unwrap();
                assert!(((got - expect) / expect).abs() < 1e-10, "{} {w} {got} {expect}", k.domain.name());
            }
        }
    }
}
