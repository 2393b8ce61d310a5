//! Bound-constrained Nelder-Mead simplex minimiser.
//!
//! A small derivative-free optimiser used by the calibration layer. Box
//! constraints are enforced by projecting every trial point onto the feasible
//! box before evaluation, and the reflection/expansion/contraction/shrink
//! coefficients follow the dimension-adaptive choice of Gao & Han (2012),
//! which behaves noticeably better than the classic constants once the
//! parameter count goes beyond two or three.
//!
//! The driver restarts the simplex from the incumbent best point (with a
//! smaller initial spread) a fixed number of times, which cheaply undoes the
//! simplex collapse that plain Nelder-Mead is prone to near a minimiser.

/// Result of a simplex minimisation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome {
    /// Best point found (always inside the bounds).
    pub x: Vec<f64>,
    /// Objective value at `x`.
    pub value: f64,
    /// Total number of objective evaluations.
    pub evals: u64,
    /// Total number of simplex iterations across restarts.
    pub iterations: u64,
    /// Whether the function-value spread met the tolerance before the
    /// iteration budget ran out.
    pub converged: bool,
}

/// Fraction of each bound range used to seed the initial simplex.
const INITIAL_STEP_FRACTION: f64 = 0.10;
/// Smaller spread for post-restart simplexes.
const RESTART_STEP_FRACTION: f64 = 0.05;
/// Number of restarts from the incumbent best point.
const RESTARTS: usize = 2;

/// Minimises `f` over the box `bounds`, starting from `x0`.
///
/// `bounds` pairs are `(lo, hi)` with `lo < hi`; `x0` is clamped into the box
/// before use. Convergence is declared when the simplex function-value spread
/// satisfies `f_worst - f_best <= tolerance * (1 + |f_best|)`.
pub fn nelder_mead_bounded(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    bounds: &[(f64, f64)],
    max_iterations: u64,
    tolerance: f64,
) -> SimplexOutcome {
    let n = x0.len();
    assert_eq!(n, bounds.len(), "x0 and bounds dimension mismatch");
    assert!(n > 0, "cannot optimise a zero-dimensional problem");
    for &(lo, hi) in bounds {
        assert!(lo < hi, "invalid bound ({lo}, {hi})");
    }

    // Dimension-adaptive coefficients (Gao & Han 2012).
    let nf = n as f64;
    let alpha = 1.0; // reflection
    let beta = 1.0 + 2.0 / nf; // expansion
    let gamma = 0.75 - 1.0 / (2.0 * nf); // contraction
    let delta = 1.0 - 1.0 / nf; // shrink

    let clamp = |x: &mut [f64]| {
        for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
            *xi = xi.clamp(lo, hi);
        }
    };

    let mut start = x0.to_vec();
    clamp(&mut start);

    let mut evals: u64 = 0;
    let mut iterations: u64 = 0;
    let mut converged = false;

    let mut eval = |x: &[f64], evals: &mut u64| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            1e100
        }
    };

    let mut best_x = start.clone();
    let mut best_value = eval(&best_x, &mut evals);

    for restart in 0..=RESTARTS {
        let step_fraction = if restart == 0 {
            INITIAL_STEP_FRACTION
        } else {
            RESTART_STEP_FRACTION
        };

        // Initial simplex: the start point plus one axis step per dimension,
        // flipped inward when the step would leave the box.
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((best_x.clone(), best_value));
        for i in 0..n {
            let (lo, hi) = bounds[i];
            let step = step_fraction * (hi - lo);
            let mut v = best_x.clone();
            v[i] = if v[i] + step <= hi { v[i] + step } else { v[i] - step };
            clamp(&mut v);
            let fv = eval(&v, &mut evals);
            simplex.push((v, fv));
        }

        converged = false;
        while iterations < max_iterations {
            iterations += 1;
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            let f_best = simplex[0].1;
            let f_worst = simplex[n].1;
            if f_worst - f_best <= tolerance * (1.0 + f_best.abs()) {
                converged = true;
                break;
            }
            // Guard against a fully collapsed simplex: no point continuing
            // when every vertex coordinate agrees to machine precision.
            let collapsed = (0..n).all(|i| {
                let lo = simplex.iter().map(|v| v.0[i]).fold(f64::INFINITY, f64::min);
                let hi = simplex
                    .iter()
                    .map(|v| v.0[i])
                    .fold(f64::NEG_INFINITY, f64::max);
                hi - lo <= f64::EPSILON * (1.0 + hi.abs())
            });
            if collapsed {
                converged = true;
                break;
            }

            // Centroid of all vertices except the worst.
            let mut centroid = vec![0.0; n];
            for vertex in simplex.iter().take(n) {
                for (c, xi) in centroid.iter_mut().zip(&vertex.0) {
                    *c += xi / nf;
                }
            }

            let worst = simplex[n].0.clone();
            let mut reflected: Vec<f64> = centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c + alpha * (c - w))
                .collect();
            clamp(&mut reflected);
            let f_reflected = eval(&reflected, &mut evals);

            if f_reflected < simplex[0].1 {
                // Try to expand past the reflected point.
                let mut expanded: Vec<f64> = centroid
                    .iter()
                    .zip(&worst)
                    .map(|(c, w)| c + beta * (c - w))
                    .collect();
                clamp(&mut expanded);
                let f_expanded = eval(&expanded, &mut evals);
                simplex[n] = if f_expanded < f_reflected {
                    (expanded, f_expanded)
                } else {
                    (reflected, f_reflected)
                };
            } else if f_reflected < simplex[n - 1].1 {
                simplex[n] = (reflected, f_reflected);
            } else {
                // Contract, outside or inside depending on the reflection.
                let (towards, f_towards) = if f_reflected < simplex[n].1 {
                    (&reflected, f_reflected)
                } else {
                    (&worst, simplex[n].1)
                };
                let mut contracted: Vec<f64> = centroid
                    .iter()
                    .zip(towards)
                    .map(|(c, t)| c + gamma * (t - c))
                    .collect();
                clamp(&mut contracted);
                let f_contracted = eval(&contracted, &mut evals);
                if f_contracted < f_towards {
                    simplex[n] = (contracted, f_contracted);
                } else {
                    // Shrink everything towards the best vertex.
                    let anchor = simplex[0].0.clone();
                    for vertex in simplex.iter_mut().skip(1) {
                        for (xi, ai) in vertex.0.iter_mut().zip(&anchor) {
                            *xi = ai + delta * (*xi - ai);
                        }
                        clamp(&mut vertex.0);
                        vertex.1 = eval(&vertex.0, &mut evals);
                    }
                }
            }
        }

        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        if simplex[0].1 < best_value {
            best_value = simplex[0].1;
            best_x = simplex[0].0.clone();
        }
        if iterations >= max_iterations {
            break;
        }
    }

    SimplexOutcome {
        x: best_x,
        value: best_value,
        evals,
        iterations,
        converged,
    }
}
