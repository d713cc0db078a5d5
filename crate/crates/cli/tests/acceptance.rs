//! Acceptance criteria, one test per criterion, each printing a status line.
//!
//! Criterion 14 reads an imported measured dataset from the directory named
//! by `IUCORR_MEASURED_DATASET` and prints SKIP when it is not set.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;
use std::path::PathBuf;

use iucorr_cli::verify::*;
use iucorr_core::geometry::ArrayGeometry;
use iucorr_core::theory::{eta, lemma_2d_finite, response_dot_moments};

fn print_line(r: &CheckResult) {
    // bypasses the harness capture so the report shows in plain `cargo test`
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", r.line());
}

fn gate(r: CheckResult) {
    print_line(&r);
    assert_eq!(r.status, Status::Pass, "{}", r.line());
}

#[test]
fn criterion_01_rayleigh_baseline() {
    gate(check_rayleigh(DEFAULT_SEED));
}

#[test]
fn criterion_02_closed_form_matches_monte_carlo() {
    gate(check_closed_form_vs_mc(DEFAULT_SEED));
}

#[test]
fn criterion_03_large_array_window() {
    gate(check_asymptotic_window());
}

#[test]
fn criterion_04_spacing_alpha_offset() {
    gate(check_spacing_offset());
}

#[test]
fn criterion_05_keyhole_identity() {
    gate(check_keyhole_identity());
}

#[test]
fn criterion_06_uniform_random_los() {
    gate(check_uniform_los());
}

#[test]
fn criterion_07_single_sinc_series() {
    gate(check_cesaro_series());
}

#[test]
fn criterion_08_double_sinc_sum() {
    gate(check_double_sinc_sum());
}

#[test]
fn criterion_09_moments_vs_quadrature() {
    gate(check_moments_quadrature());
}

#[test]
fn criterion_10_subcarrier_flatness() {
    gate(check_subcarrier_flatness(DEFAULT_SEED));
}

#[test]
fn criterion_11_music_recovery() {
    gate(check_music(DEFAULT_SEED));
}

#[test]
fn criterion_12_calibration_round_trip() {
    gate(check_calibration(DEFAULT_SEED));
}

#[test]
fn criterion_13_dataset_container() {
    let tmp = tempfile::tempdir().unwrap();
    gate(check_container(DEFAULT_SEED, Some(&tmp.path().join("ds"))));
}

#[test]
fn criterion_14_measured_dataset() {
    let path = std::env::var_os("IUCORR_MEASURED_DATASET").map(PathBuf::from);
    let r = check_measured(path.as_deref());
    print_line(&r);
    assert!(!r.gating);
    if path.is_none() {
        assert_eq!(r.status, Status::Skip);
    }
}

#[test]
fn negative_control_corrupted_kernel_fails() {
    let r = check_closed_form_vs_mc_with(DEFAULT_SEED, |c, m| 1.1 * eta(c, m));
    assert_eq!(r.status, Status::Fail, "{}", r.line());
}

#[test]
fn seed_perturbation_keeps_statistical_checks_green() {
    let seed = DEFAULT_SEED + 7919;
    for r in [
        check_rayleigh(seed),
        check_closed_form_vs_mc(seed),
        check_subcarrier_flatness(seed),
        check_music(seed),
    ] {
        assert_eq!(r.status, Status::Pass, "seed {seed}: {}", r.line());
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn composite_gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = a + h * (p as f64 + 0.5);
            rule.iter().map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

// Per-axis moments of Σ_a e^{jπ a δ}, δ uniform on [-α, α], with half-wavelength spacing.
fn axis_moments(m: usize, alpha: f64, rule: &[(f64, f64)]) -> (f64, f64) {
    let s = |d: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for a in 0..m {
            re += (PI * a as f64 * d).cos();
            im += (PI * a as f64 * d).sin();
        }
        (re, im)
    };
    let mean = composite_gl(|d| s(d).0, -alpha, alpha, 64, rule) / (2.0 * alpha);
    let second = composite_gl(
        |d| {
            let (r, i) = s(d);
            r * r + i * i
        },
        -alpha,
        alpha,
        64,
        rule,
    ) / (2.0 * alpha);
    (mean, second)
}

#[test]
fn oracle_moments_by_gauss_legendre() {
    let rule = gauss_legendre(12);
    for (mx, my) in [(4usize, 1usize), (4, 4), (3, 5)] {
        let g = ArrayGeometry::new(mx, my, 0.5, 0.5).unwrap();
        for alpha in [0.25, 0.5, 1.0] {
            let (mxm, mxs) = axis_moments(mx, alpha, &rule);
            let (mym, mys) = axis_moments(my, alpha, &rule);
            let (mean, var) = response_dot_moments(alpha, alpha, &g, 1.0).unwrap();
            assert!((mean - mxm * mym).abs() < 1e-9, "{mx}x{my} a={alpha}");
            assert!(
                (var - (mxs * mys - (mxm * mym).powi(2))).abs() < 1e-9,
                "{mx}x{my} a={alpha}"
            );
        }
    }
}

#[test]
fn oracle_cesaro_by_running_partial_sums() {
    for g in [0.5, 1.0, FRAC_PI_2] {
        let n = 1_000_000usize;
        let (mut s, mut acc) = (0.0f64, 0.0f64);
        for m in 0..=n {
            s += if m == 0 {
                1.0
            } else {
                (g * m as f64).sin() / (g * m as f64)
            };
            acc += s;
        }
        let cesaro = acc / (n + 1) as f64;
        assert!((cesaro - (PI + g) / (2.0 * g)).abs() < 1e-3, "g={g}: {cesaro}");
    }
}

#[test]
fn oracle_double_sum_naive() {
    for g in [0.5, 1.0, FRAC_PI_2, PI] {
        let m = 1500;
        let mut naive = 0.0;
        for a in 0..m {
            for b in 0..m {
                let x = g * (a as f64 - b as f64);
                naive += if x == 0.0 { 1.0 } else { x.sin() / x };
            }
        }
        naive /= m as f64;
        let grouped = lemma_2d_finite(g, m).unwrap();
        assert!(
            (naive - grouped).abs() <= 1e-9 * grouped.abs(),
            "g={g}: {naive} vs {grouped}"
        );
    }
}
