//! Shared oracles for integration tests: special functions computed by
//! routes independent of the library, a Kolmogorov-Smirnov statistic, and a
//! restarted-Polyak projected-subgradient reference minimizer.

#![allow(dead_code)]

use nalgebra::DVector;

/// Error function by Taylor series (small x) and continued fraction
/// (large x); absolute error around 1e-14.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x < 2.0 {
        let mut term = x;
        let mut sum = x;
        let x2 = x * x;
        for k in 1..300 {
            term *= -x2 / k as f64;
            let add = term / (2 * k + 1) as f64;
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        2.0 / std::f64::consts::PI.sqrt() * sum
    } else {
        1.0 - erfc_cf(x)
    }
}

fn erfc_cf(x: f64) -> f64 {
    // Modified Lentz evaluation of the classical continued fraction.
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..400 {
        let a = 0.5 * k as f64;
        d = x + a * d;
        if d == 0.0 {
            d = 1e-300;
        }
        d = 1.0 / d;
        c = x + a / c;
        if c == 0.0 {
            c = 1e-300;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    (-x * x).exp() / std::f64::consts::PI.sqrt() / f
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc_cf_signed(-x / std::f64::consts::SQRT_2)
}

fn erfc_cf_signed(x: f64) -> f64 {
    if x < 0.0 {
        2.0 - erfc_cf_signed(-x)
    } else if x < 2.0 {
        1.0 - erf(x)
    } else {
        erfc_cf(x)
    }
}

/// Inverse standard normal CDF by bisection on `normal_cdf`, an
/// implementation-independent oracle accurate to ~1e-12.
pub fn probit_oracle(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Half-normal CDF: `P(|Z| <= x)`.
pub fn half_normal_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        erf(x / std::f64::consts::SQRT_2)
    }
}

/// Chi-square with one degree of freedom: `P(Z^2 <= x)`.
pub fn chi2_1_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        erf((x / 2.0).sqrt())
    }
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut worst: f64 = 0.0;
    for (i, s) in samples.iter().enumerate() {
        let f = cdf(*s);
        worst = worst.max((f - i as f64 / n).abs());
        worst = worst.max(((i + 1) as f64 / n - f).abs());
    }
    worst
}

/// Generic convex minimizer: plain subgradient descent with a
/// diminishing-step warmup followed by restarted Polyak steps against a
/// shrinking optimistic target. Independent of every solver in the library.
pub fn subgradient_minimize(
    objective: &dyn Fn(&DVector<f64>) -> f64,
    subgradient: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    start: DVector<f64>,
    iterations: usize,
) -> (DVector<f64>, f64) {
    let mut x = start.clone();
    let mut best_x = x.clone();
    let mut best_f = objective(&x);

    // Warmup: diminishing steps to localize the minimizer.
    let warmup = iterations / 5;
    let scale = {
        let g = subgradient(&x);
        (best_f.abs() / (g.norm() + 1e-12)).clamp(1e-4, 10.0)
    };
    for k in 1..=warmup {
        let g = subgradient(&x);
        let gn = g.norm();
        if gn < 1e-14 {
            break;
        }
        x.axpy(-scale / (k as f64).sqrt() / gn, &g, 1.0);
        let f = objective(&x);
        if f < best_f {
            best_f = f;
            best_x = x.clone();
        }
    }

    // Restarted Polyak: chase best - eps, shrinking eps when a block of
    // iterations fails to reach it, re-centering on the incumbent between
    // blocks to suppress zigzag on kinks.
    x = best_x.clone();
    let mut eps = (best_f.abs() * 1e-2).max(1e-6);
    let block = 1_000usize;
    let mut since_restart = 0usize;
    let mut reached = false;
    for _ in warmup..iterations {
        let f = objective(&x);
        if f < best_f - 1e-16 * (1.0 + best_f.abs()) {
            best_f = f;
            best_x = x.clone();
            reached = true;
        }
        let g = subgradient(&x);
        let gn2 = g.norm_squared();
        if gn2 < 1e-28 {
            break;
        }
        let target = best_f - eps;
        let step = ((f - target) / gn2).max(0.0);
        x.axpy(-step, &g, 1.0);
        since_restart += 1;
        if since_restart >= block {
            if !reached {
                eps *= 0.5;
            }
            x = best_x.clone();
            reached = false;
            since_restart = 0;
            if eps < 1e-15 {
                break;
            }
        }
    }
    (best_x, best_f)
}
