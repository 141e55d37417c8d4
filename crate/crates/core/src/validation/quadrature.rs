//! Adaptive Gauss-Kronrod integration of `phi^(1+beta)` over a box of twelve
//! standard deviations, as an independent check of the closed-form integral.
//! The densities here are written out by hand for p = 1, 2 so the oracle does
//! not share code with the library's density evaluation.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

const BOX_HALF_WIDTH: f64 = 12.0;
const REL_TOL: f64 = 1e-9;
const MAX_INTERVALS: usize = 4000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// One 15-point Kronrod panel; returns `(estimate, error estimate)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, &x) in XGK.iter().take(7).enumerate() {
        let pair = f(c - h * x) + f(c + h * x);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive integration: repeatedly bisects the panel with the
/// largest error until the total error is below `rel_tol * |estimate|`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let mut panels = vec![{
        let (v, e) = gk15(&f, a, b);
        (a, b, v, e)
    }];
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let error: f64 = panels.iter().map(|p| p.3).sum();
        if error <= rel_tol * total.abs() || error < f64::MIN_POSITIVE {
            return Ok(total);
        }
        if panels.len() >= MAX_INTERVALS {
            return Err(Error::NoConvergence { what: "adaptive quadrature", iterations: panels.len() });
        }
        let worst =
            panels.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).map(|(i, _)| i).expect("non-empty");
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

/// Numerical `int phi(x; 0, sigma)^(1+beta) dx` for `p` in {1, 2}.
pub fn quadrature_oracle(sigma: &SymMatrix, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgs(format!("beta must be positive, got {beta}")));
    }
    let power = 1.0 + beta;
    match sigma.dim() {
        1 => {
            let var = sigma.get(0, 0);
            if !(var > 0.0) {
                return Err(Error::NotPositiveDefinite { index: 0, pivot: var });
            }
            let norm = 1.0 / (2.0 * PI * var).sqrt();
            let half = BOX_HALF_WIDTH * var.sqrt();
            integrate(|x| (norm * (-0.5 * x * x / var).exp()).powf(power), -half, half, REL_TOL)
        }
        2 => {
            let (a, b, c) = (sigma.get(0, 0), sigma.get(0, 1), sigma.get(1, 1));
            let det = a * c - b * b;
            if !(a > 0.0 && det > 0.0) {
                return Err(Error::NotPositiveDefinite { index: 1, pivot: det });
            }
            let norm = 1.0 / (2.0 * PI * det.sqrt());
            let density = |x: f64, y: f64| norm * (-0.5 * (c * x * x - 2.0 * b * x * y + a * y * y) / det).exp();
            let hx = BOX_HALF_WIDTH * a.sqrt();
            let hy = BOX_HALF_WIDTH * c.sqrt();
            let inner_failed = std::cell::Cell::new(false);
            let outer = integrate(
                |x| match integrate(|y| density(x, y).powf(power), -hy, hy, REL_TOL * 1e-2) {
                    Ok(v) => v,
                    Err(_) => {
                        inner_failed.set(true);
                        0.0
                    }
                },
                -hx,
                hx,
                REL_TOL,
            )?;
            if inner_failed.get() {
                return Err(Error::NoConvergence { what: "adaptive quadrature", iterations: MAX_INTERVALS });
            }
            Ok(outer)
        }
        p => Err(Error::InvalidArgs(format!("quadrature oracle supports p in {{1, 2}}, got {p}"))),
    }
}
