//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use hypspeeds_core::Exec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Minimise a unimodal `f` on `[a, b]`: 64-point bracketing grid, then
/// golden-section search.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    const GRID: usize = 64;
    let step = (b - a) / GRID as f64;
    let best = (0..=GRID).min_by(|&i, &j| f(a + i as f64 * step).total_cmp(&f(a + j as f64 * step))).unwrap();
    let (mut lo, mut hi) = (a + best.saturating_sub(1) as f64 * step, a + (best + 1).min(GRID) as f64 * step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Gaussian random walk from 0 with per-coordinate step `h`, stopped on the
/// slit `[r, 1]` or on leaving the unit disk. Crossings between steps are
/// caught with the Brownian-bridge probability for a flat barrier.
fn slit_walk(r: f64, h: f64, rng: &mut ChaCha8Rng) -> bool {
    let inv = 2.0 / (h * h);
    let mut x = c(0.0, 0.0);
    loop {
        let dx: f64 = rng.sample(StandardNormal);
        let dy: f64 = rng.sample(StandardNormal);
        let y = x + c(h * dx, h * dy);
        let (y0, y1) = (x.im, y.im);
        if y0 * y1 <= 0.0 {
            let f = y0.abs() / (y0.abs() + y1.abs());
            let xc = x.re + f * (y.re - x.re);
            if r <= xc && xc <= 1.0 {
                return true;
            }
        } else {
            let e = inv * (y0 * y1).abs();
            if e < 40.0 && rng.random::<f64>() < (-e).exp() {
                let xc = 0.5 * (x.re + y.re);
                if r <= xc && xc <= 1.0 {
                    return true;
                }
            }
        }
        let d1 = 1.0 - y.norm();
        if d1 <= 0.0 {
            return false;
        }
        let e = inv * (1.0 - x.norm()) * d1;
        if e < 40.0 && rng.random::<f64>() < (-e).exp() {
            return false;
        }
        x = y;
    }
}

fn slit_level(r: f64, h: f64, n: u64, seed: u64) -> (f64, f64) {
    let hits = Exec::Parallel.sum_u64(n as usize, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        slit_walk(r, h, &mut rng) as u64
    });
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Probability that Brownian motion from 0 hits `[r, 1]` before the unit
/// circle, by Richardson extrapolation of two step sizes (the walk's bias is
/// linear in the step). Returns (value, standard error).
pub fn radial_slit_oracle(r: f64, h: f64, n_coarse: u64, n_fine: u64, seed: u64) -> (f64, f64) {
    let (vc, sc) = slit_level(r, h, n_coarse, seed);
    let (vf, sf) = slit_level(r, 0.5 * h, n_fine, seed ^ 0x9e37_79b9_7f4a_7c15);
    (2.0 * vf - vc, (4.0 * sf * sf + sc * sc).sqrt())
}
