//! Shared concave maximizer: Barzilai-Borwein steps safeguarded by an
//! Armijo backtracking line search, with stall detection for nonsmooth
//! objectives and a divergence ceiling.

use nalgebra::DVector;

/// Value and supergradient of the objective at a point.
pub type ValueGrad = (f64, DVector<f64>);

pub struct AscentOutcome {
    pub point: DVector<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// Reached the first-order tolerance (smooth problems) or no ascent
    /// step of any size improved the objective (nonsmooth stall at the
    /// maximum).
    pub converged: bool,
    /// Objective exceeded the ceiling: the problem is unbounded above.
    pub diverged: bool,
}

/// Maximizes a concave objective from `start`. `objective_grad` returns the
/// value and a supergradient.
pub fn ascend(
    objective_grad: &dyn Fn(&DVector<f64>) -> ValueGrad,
    start: DVector<f64>,
    tol: f64,
    max_iterations: usize,
    ceiling: f64,
) -> AscentOutcome {
    let mut x = start;
    let (mut value, mut grad) = objective_grad(&x);
    let mut step = 1.0;
    let mut iterations = 0;
    // Nonsmooth objectives zigzag with ever-smaller gains instead of
    // driving the supergradient to zero; a progress window over the value
    // terminates that phase.
    let mut window_best = value;
    let mut window_len = 0usize;
    const WINDOW: usize = 30;
    loop {
        if value > ceiling {
            return AscentOutcome {
                point: x,
                value,
                grad_norm: grad.norm(),
                iterations,
                converged: false,
                diverged: true,
            };
        }
        let gnorm = grad.norm();
        if gnorm <= tol {
            return AscentOutcome {
                point: x,
                value,
                grad_norm: gnorm,
                iterations,
                converged: true,
                diverged: false,
            };
        }
        let stalled = window_len >= WINDOW;
        if iterations >= max_iterations || stalled {
            return AscentOutcome {
                point: x,
                value,
                grad_norm: gnorm,
                iterations,
                converged: stalled,
                diverged: false,
            };
        }
        iterations += 1;
        let mut t = step;
        let mut accepted = false;
        while t > 1e-18 {
            let candidate = &x + &grad * t;
            let (cv, cg) = objective_grad(&candidate);
            if cv >= value + 1e-4 * t * gnorm * gnorm {
                if cv > window_best + 1e-7 * (1.0 + window_best.abs()) {
                    window_best = cv;
                    window_len = 0;
                } else {
                    window_len += 1;
                }
                let dx = &candidate - &x;
                let dg = &cg - &grad;
                let curvature = -dx.dot(&dg);
                step = if curvature > 0.0 {
                    (dx.norm_squared() / curvature).clamp(1e-12, 1e9)
                } else {
                    (t * 2.0).min(1e9)
                };
                x = candidate;
                value = cv;
                grad = cg;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // No improving step at any scale: at a nonsmooth maximum.
            return AscentOutcome {
                point: x,
                value,
                grad_norm: grad.norm(),
                iterations,
                converged: true,
                diverged: false,
            };
        }
    }
}
