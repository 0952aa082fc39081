//! Derivative-free Nelder-Mead minimization with seeded restarts and an
//! optional wall-clock deadline.
//!
//! Dimension-adaptive coefficients (Gao & Han, 2012) are used for n >= 2.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    /// Function evaluations per run (restarts get a fresh budget).
    pub max_evals: usize,
    /// Convergence when every vertex is within `xatol` of the best (max-norm)...
    pub xatol: f64,
    /// ...and every vertex value is within `fatol` of the best.
    pub fatol: f64,
    /// Initial simplex edge lengths, one per coordinate (or a single value for all).
    pub initial_step: Vec<f64>,
    /// Restarts from the best point when a run exhausts its budget.
    pub restarts: usize,
    pub seed: u64,
    pub deadline: Option<Instant>,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            xatol: 1e-7,
            fatol: 1e-9,
            initial_step: vec![0.1],
            restarts: 3,
            seed: 0,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxEvals,
    Deadline,
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub restarts_used: usize,
    pub termination: Termination,
}

impl Minimum {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

struct Coefficients {
    reflect: f64,
    expand: f64,
    contract: f64,
    shrink: f64,
}

impl Coefficients {
    fn for_dim(n: usize) -> Self {
        if n < 2 {
            return Self {
                reflect: 1.0,
                expand: 2.0,
                contract: 0.5,
                shrink: 0.5,
            };
        }
        let n = n as f64;
        Self {
            reflect: 1.0,
            expand: 1.0 + 2.0 / n,
            contract: 0.75 - 1.0 / (2.0 * n),
            shrink: 1.0 - 1.0 / n,
        }
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` starting from `x0`. Non-finite values are treated as `+inf`.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    if n == 0 {
        return Minimum {
            x: Vec::new(),
            f: sanitize(f(x0)),
            evals: 1,
            restarts_used: 0,
            termination: Termination::Converged,
        };
    }
    let base_step: Vec<f64> = (0..n)
        .map(|i| {
            let s = if opts.initial_step.len() == n {
                opts.initial_step[i]
            } else {
                opts.initial_step.first().copied().unwrap_or(0.1)
            };
            if s == 0.0 {
                0.1
            } else {
                s
            }
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best_x = x0.to_vec();
    let mut best_f = sanitize(f(x0));
    evals += 1;
    let mut termination = Termination::MaxEvals;
    let mut restarts_used = 0;

    for run in 0..=opts.restarts {
        let step: Vec<f64> = if run == 0 {
            base_step.clone()
        } else {
            base_step
                .iter()
                .map(|s| {
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    sign * s * rng.gen_range(0.5..1.5)
                })
                .collect()
        };
        let (x, fx, used, term) = run_simplex(&mut f, &best_x, best_f, &step, opts);
        evals += used;
        if fx <= best_f {
            best_x = x;
            best_f = fx;
        }
        termination = term;
        restarts_used = run;
        if term != Termination::MaxEvals {
            break;
        }
    }

    Minimum {
        x: best_x,
        f: best_f,
        evals,
        restarts_used,
        termination,
    }
}

fn run_simplex<F>(
    f: &mut F,
    x0: &[f64],
    f0: f64,
    step: &[f64],
    opts: &NelderMeadOptions,
) -> (Vec<f64>, f64, usize, Termination)
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let c = Coefficients::for_dim(n);
    let mut evals = 0usize;
    let expired = || opts.deadline.is_some_and(|d| Instant::now() >= d);

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        if expired() {
            return best_of(simplex, evals, Termination::Deadline);
        }
        let mut x = x0.to_vec();
        x[i] += step[i];
        let fx = sanitize(f(&x));
        evals += 1;
        simplex.push((x, fx));
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (&simplex[0], &simplex[n]);
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&best.0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let f_spread = (worst.1 - best.1).abs();
        if best.1.is_finite() && x_spread <= opts.xatol && f_spread <= opts.fatol {
            return best_of(simplex, evals, Termination::Converged);
        }
        if evals >= opts.max_evals {
            return best_of(simplex, evals, Termination::MaxEvals);
        }
        if expired() {
            return best_of(simplex, evals, Termination::Deadline);
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (ci, xi) in centroid.iter_mut().zip(x) {
                *ci += xi / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(ci, wi)| ci + t * (ci - wi))
                .collect()
        };

        let xr = along(c.reflect);
        let fr = sanitize(f(&xr));
        evals += 1;

        if fr < simplex[0].1 {
            let xe = along(c.reflect * c.expand);
            let fe = sanitize(f(&xe));
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let xc = along(c.reflect * c.contract);
            let fc = sanitize(f(&xc));
            (xc, fc)
        } else {
            let xc = along(-c.contract);
            let fc = sanitize(f(&xc));
            (xc, fc)
        };
        evals += 1;
        if fc < fr.min(simplex[n].1) {
            simplex[n] = (xc, fc);
            continue;
        }
        // shrink towards the best vertex
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            for (xi, bi) in vertex.0.iter_mut().zip(&best) {
                *xi = bi + c.shrink * (*xi - bi);
            }
            vertex.1 = sanitize(f(&vertex.0));
            evals += 1;
        }
    }
}

fn best_of(
    mut simplex: Vec<(Vec<f64>, f64)>,
    evals: usize,
    term: Termination,
) -> (Vec<f64>, f64, usize, Termination) {
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    (x, f, evals, term)
}
