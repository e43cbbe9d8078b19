//! Derivative-free local search with deterministic multi-starts.
//!
//! The local method is Nelder–Mead with dimension-adapted coefficients
//! (reflection 1, expansion 1 + 2/n, contraction 3/4 − 1/(2n), shrink
//! 1 − 1/n), restarted around the incumbent whenever the simplex collapses.
//! Each start draws from its own ChaCha stream keyed by the start index, and
//! results are merged by `(value, start index)`, so the outcome does not
//! depend on how many threads run the starts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Budget and seeding for the unitary searches.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Number of independent local searches.
    pub starts: usize,
    /// Simplex iterations per start.
    pub max_iterations: usize,
    pub seed: u64,
    /// Initial generator coordinates are drawn from `[-init_scale, init_scale]`.
    pub init_scale: f64,
    /// Weight of the energy-cap and energy-leak penalties.
    pub penalty_weight: f64,
    /// Tolerated `|energy_leak| / |dQ|` for anomalous heat flow.
    pub leak_fraction: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            starts: 20,
            max_iterations: 2000,
            seed: 0xC0FFEE,
            init_scale: std::f64::consts::PI,
            penalty_weight: 1e3,
            leak_fraction: 0.01,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::InvalidParameter("search needs at least one start".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("search needs at least one iteration".into()));
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("init_scale must be positive, got {}", self.init_scale)));
        }
        if !(self.penalty_weight >= 0.0 && self.penalty_weight.is_finite()) {
            return Err(Error::InvalidParameter(format!("penalty_weight must be non-negative, got {}", self.penalty_weight)));
        }
        if !(self.leak_fraction >= 0.0 && self.leak_fraction.is_finite()) {
            return Err(Error::InvalidParameter(format!("leak_fraction must be non-negative, got {}", self.leak_fraction)));
        }
        Ok(())
    }

    /// RNG for start `index`; independent of scheduling.
    pub fn rng_for_start(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }
}

#[derive(Debug, Clone)]
pub struct LocalOptions {
    pub max_iterations: usize,
    /// Initial simplex edge length.
    pub step: f64,
    /// Stop as soon as the best value drops to this level.
    pub stop_below: f64,
    /// Collapse criterion on the value spread across the simplex.
    pub f_tol: f64,
    /// Collapse criterion on the simplex diameter.
    pub x_tol: f64,
}

impl Default for LocalOptions {
    fn default() -> Self {
        Self { max_iterations: 2000, step: 0.5, stop_below: f64::NEG_INFINITY, f_tol: 1e-15, x_tol: 1e-12 }
    }
}

#[derive(Debug, Clone)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Nelder–Mead minimisation of `f` starting from `x0`.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], opts: &LocalOptions) -> LocalResult {
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        sanitize(f(x))
    };
    if n == 0 {
        let v = eval(x0);
        return LocalResult { x: vec![], f: v, iterations: 0, evaluations };
    }
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);

    let build = |center: &[f64], step: f64| -> Vec<Vec<f64>> {
        let mut s = vec![center.to_vec()];
        for k in 0..n {
            let mut p = center.to_vec();
            p[k] += step;
            s.push(p);
        }
        s
    };

    let mut simplex = build(x0, opts.step);
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(p)).collect();
    let mut step = opts.step;
    let mut iterations = 0usize;
    let mut last_restart_best = f64::INFINITY;

    while iterations < opts.max_iterations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if values[0] <= opts.stop_below {
            break;
        }

        let spread = values[n] - values[0];
        let diameter = simplex[1..]
            .iter()
            .map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread.abs() <= opts.f_tol * (1.0 + values[0].abs()) && diameter <= opts.x_tol.max(step * 1e-9) {
            // collapsed: restart around the incumbent unless the last restart bought nothing
            if values[0] >= last_restart_best {
                break;
            }
            last_restart_best = values[0];
            step = (step * 0.5).max(diameter * 10.0).max(1e-6);
            let best = simplex[0].clone();
            let best_v = values[0];
            simplex = build(&best, step);
            values = std::iter::once(best_v).chain(simplex[1..].iter().map(|p| eval(p))).collect();
            iterations += 1;
            continue;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for p in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect()
        };

        let xr = along(alpha);
        let fr = eval(&xr);
        if fr < values[0] {
            let xe = along(alpha * gamma);
            let fe = eval(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(alpha * rho);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for k in 1..=n {
            let shrunk: Vec<f64> = best.iter().zip(&simplex[k]).map(|(b, p)| b + sigma * (p - b)).collect();
            values[k] = eval(&shrunk);
            simplex[k] = shrunk;
        }
    }

    let (best, _) = values.iter().enumerate().fold((0, f64::INFINITY), |(bi, bv), (i, &v)| {
        if v < bv {
            (i, v)
        } else {
            (bi, bv)
        }
    });
    LocalResult { x: simplex[best].clone(), f: values[best], iterations, evaluations }
}

#[derive(Debug, Clone)]
pub struct MultiStartResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub best_start: usize,
    /// Best value reached by each start, in start order.
    pub per_start: Vec<f64>,
    /// Full local results, in start order.
    pub runs: Vec<LocalResult>,
}

/// Runs `config.starts` independent local searches and keeps the
/// lexicographically smallest `(value, start index)`.
///
/// `init` receives the start index and that start's RNG and returns the
/// starting point.
pub fn multi_start<F, I>(config: &SearchConfig, local: &LocalOptions, init: I, objective: F) -> MultiStartResult
where
    F: Fn(&[f64]) -> f64 + Sync,
    I: Fn(usize, &mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    let runs: Vec<LocalResult> = (0..config.starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = config.rng_for_start(k);
            let x0 = init(k, &mut rng);
            nelder_mead(&objective, &x0, local)
        })
        .collect();
    let per_start: Vec<f64> = runs.iter().map(|r| r.f).collect();
    let mut best = 0;
    for (k, r) in runs.iter().enumerate() {
        if r.f < runs[best].f {
            best = k;
        }
    }
    MultiStartResult { x: runs[best].x.clone(), f: runs[best].f, best_start: best, per_start, runs }
}
