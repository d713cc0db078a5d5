//! Adaptive Simpson quadrature, used to check the sinc-sum moments
//! against direct integration of the array response.

use std::f64::consts::PI;

use iucorr_core::geometry::ArrayGeometry;
use num_complex::Complex64;

const PANELS: usize = 16;
const MAX_DEPTH: u32 = 40;

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + refine(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// `∫_a^b f`, starting from a fixed panel split so that symmetric or
/// periodic integrands cannot fool the first error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let h = (b - a) / PANELS as f64;
    let ptol = tol / PANELS as f64;
    (0..PANELS)
        .map(|i| {
            let (x0, x1) = (a + h * i as f64, a + h * (i + 1) as f64);
            let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
            refine(&f, x0, x1, f0, fm, f1, simpson(f0, fm, f1, x1 - x0), ptol, MAX_DEPTH)
        })
        .sum()
}

pub fn integrate_2d<F: Fn(f64, f64) -> f64>(f: F, x: (f64, f64), y: (f64, f64), tol: f64) -> f64 {
    let inner_tol = tol / (x.1 - x.0).abs().max(1.0);
    integrate(|u| integrate(|v| f(u, v), y.0, y.1, inner_tol), x.0, x.1, tol)
}

/// `Σ_{a,b} exp(j 2π/λ (d_x a δx + d_y b δy))`, summed term by term.
fn response_sum(geom: &ArrayGeometry, wavelength: f64, dx: f64, dy: f64) -> Complex64 {
    let k = 2.0 * PI / wavelength;
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..geom.m_x() {
        for b in 0..geom.m_y() {
            let phase = k * (geom.d_x() * a as f64 * dx + geom.d_y() * b as f64 * dy);
            acc += Complex64::from_polar(1.0, phase);
        }
    }
    acc
}

/// Mean and variance of `aᴴ(θ) a(θ')` for sine differences uniform on
/// `[-αx, αx] × [-αy, αy]`, by direct integration. Needs `α > 0`.
pub fn dot_moments_quadrature(
    geom: &ArrayGeometry,
    wavelength: f64,
    alpha_x: f64,
    alpha_y: f64,
    tol: f64,
) -> (f64, f64) {
    assert!(alpha_x > 0.0 && alpha_y > 0.0, "quadrature needs a non-degenerate box");
    let area = 4.0 * alpha_x * alpha_y;
    let bx = (-alpha_x, alpha_x);
    let by = (-alpha_y, alpha_y);
    let mean = integrate_2d(|u, v| response_sum(geom, wavelength, u, v).re, bx, by, tol) / area;
    let second = integrate_2d(|u, v| response_sum(geom, wavelength, u, v).norm_sqr(), bx, by, tol) / area;
    (mean, second - mean * mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_trig() {
        assert!((integrate(|x| x * x, 0.0, 3.0, 1e-12) - 9.0).abs() < 1e-11);
        assert!((integrate(f64::sin, 0.0, PI, 1e-12) - 2.0).abs() < 1e-11);
        // a full period sampled only at its zeros by a single panel
        assert!(integrate(|x| (16.0 * x).sin().powi(2), 0.0, PI, 1e-10) > 1.5);
        let v = integrate_2d(|x, y| x * y.cos(), (0.0, 1.0), (0.0, PI / 2.0), 1e-12);
        assert!((v - 0.5).abs() < 1e-11);
    }

    #[test]
    fn single_antenna_moments() {
        let g = ArrayGeometry::new(1, 1, 0.5, 0.5).unwrap();
        let (m, v) = dot_moments_quadrature(&g, 1.0, 0.3, 0.7, 1e-10);
        assert!((m - 1.0).abs() < 1e-12 && v.abs() < 1e-12);
    }
}
