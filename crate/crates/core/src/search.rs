//! Derivative-free compass (coordinate pattern) search.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Options for [`compass_search`].
#[derive(Clone, Debug)]
pub struct CompassOptions {
    pub initial_step: f64,
    /// Converged once the step drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub expand: f64,
    pub contract: f64,
    pub max_step: f64,
    /// When set, poll along a fresh random orthonormal basis after every
    /// unsuccessful iteration instead of the coordinate axes.
    pub rotation_seed: Option<u64>,
}

impl Default for CompassOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            tolerance: 1e-6,
            max_iterations: 2000,
            expand: 2.0,
            contract: 0.5,
            max_step: 4.0,
            rotation_seed: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CompassResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub final_step: f64,
    pub converged: bool,
}

/// Minimises `f` by polling `x ± step·e_i`.
pub fn compass_search<F>(f: F, x0: &[f64], opts: &CompassOptions) -> CompassResult
where
    F: Fn(&[f64]) -> f64,
{
    compass_search_bounded(|x, _| f(x), x0, opts)
}

/// Compass search for objectives that can stop early.
///
/// `f(x, incumbent)` must return the exact value when it is below
/// `incumbent`; otherwise any value `>= incumbent` is acceptable. Polling is
/// opportunistic and the last successful direction is tried first.
pub fn compass_search_bounded<F>(f: F, x0: &[f64], opts: &CompassOptions) -> CompassResult
where
    F: Fn(&[f64], f64) -> f64,
{
    let dim = x0.len();
    let mut x = x0.to_vec();
    let mut value = f(&x, f64::INFINITY);
    let mut evaluations = 1;
    let mut step = opts.initial_step;
    let mut iterations = 0;
    let mut last_success: Option<usize> = None;
    let mut trial = x.clone();

    if dim == 0 {
        return CompassResult {
            x,
            value,
            iterations,
            evaluations,
            final_step: 0.0,
            converged: true,
        };
    }

    let mut rng = opts.rotation_seed.map(ChaCha8Rng::seed_from_u64);
    // Householder reflector I − 2vvᵀ; identity when v is empty
    let mut v: Vec<f64> = Vec::new();
    while iterations < opts.max_iterations && step >= opts.tolerance {
        iterations += 1;
        let mut improved = false;
        let order = last_success
            .into_iter()
            .chain((0..2 * dim).filter(|&d| Some(d) != last_success));
        for d in order {
            let axis = d / 2;
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            trial.copy_from_slice(&x);
            if v.is_empty() {
                trial[axis] += sign * step;
            } else {
                for (i, t) in trial.iter_mut().enumerate() {
                    let h = if i == axis { 1.0 } else { 0.0 } - 2.0 * v[i] * v[axis];
                    *t += sign * step * h;
                }
            }
            let fv = f(&trial, value);
            evaluations += 1;
            if fv < value {
                value = fv;
                x.copy_from_slice(&trial);
                last_success = Some(d);
                improved = true;
                break;
            }
        }
        if improved {
            step = (step * opts.expand).min(opts.max_step);
        } else {
            step *= opts.contract;
            last_success = None;
            if let Some(rng) = rng.as_mut() {
                v = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
                let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                v.iter_mut().for_each(|a| *a /= norm);
            }
        }
    }

    CompassResult {
        x,
        value,
        iterations,
        evaluations,
        final_step: step,
        converged: step < opts.tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimises_quadratic() {
        let r = compass_search(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            &CompassOptions::default(),
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-5);
        assert!((r.x[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn respects_iteration_cap() {
        let r = compass_search(
            |x| x[0].abs(),
            &[1000.0],
            &CompassOptions {
                max_iterations: 3,
                ..Default::default()
            },
        );
        assert_eq!(r.iterations, 3);
        assert!(!r.converged);
    }

    #[test]
    fn bounded_objective_matches_plain() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] - 0.7).abs();
        let plain = compass_search(f, &[0.0, 0.0], &CompassOptions::default());
        let bounded = compass_search_bounded(
            |x, inc| {
                let v = f(x);
                if v >= inc {
                    inc
                } else {
                    v
                }
            },
            &[0.0, 0.0],
            &CompassOptions::default(),
        );
        assert_eq!(plain.x, bounded.x);
    }

    #[test]
    fn rotated_polling_follows_a_ridge() {
        // narrow diagonal valley
        let f = |x: &[f64]| (x[0] - x[1]).powi(2) * 1e4 + (x[0] + x[1] - 2.0).powi(2);
        let opts = CompassOptions {
            rotation_seed: Some(3),
            tolerance: 1e-9,
            max_iterations: 20_000,
            ..Default::default()
        };
        let r = compass_search(f, &[-3.0, 4.0], &opts);
        assert!(r.value < 1e-8, "{}", r.value);
        let again = compass_search(f, &[-3.0, 4.0], &opts);
        assert_eq!(r.x, again.x);
    }
}
