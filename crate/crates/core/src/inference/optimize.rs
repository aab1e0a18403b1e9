//! Box-projected Nelder–Mead and Latin-hypercube start generation.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadSettings {
    pub max_iterations: usize,
    /// Stop once every vertex lies within this sup-distance of the best one.
    pub tolerance: f64,
    pub initial_step: f64,
}

impl Default for NelderMeadSettings {
    fn default() -> Self {
        NelderMeadSettings {
            max_iterations: 10_000,
            tolerance: 1e-8,
            initial_step: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(*lo, *hi);
    }
}

fn combine(a: &[f64], b: &[f64], coefficient: f64) -> Vec<f64> {
    // a + coefficient·(a − b)
    a.iter()
        .zip(b)
        .map(|(x, y)| x + coefficient * (x - y))
        .collect()
}

/// Minimizes `f` over the box [lower, upper]. NaN objective values are treated
/// as +∞. Candidate points are projected onto the box before evaluation.
pub fn nelder_mead<F>(
    f: F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    settings: &NelderMeadSettings,
) -> NelderMeadResult
where
    F: Fn(&[f64]) -> f64,
{
    let d = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut start = x0.to_vec();
    project(&mut start, lower, upper);
    let mut simplex = vec![start.clone()];
    for i in 0..d {
        let mut v = start.clone();
        v[i] += settings.initial_step;
        if v[i] > upper[i] {
            v[i] = start[i] - settings.initial_step;
        }
        project(&mut v, lower, upper);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();

    let mut iterations = 0;
    let mut converged = false;
    loop {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter < settings.tolerance {
            converged = true;
            break;
        }
        if iterations >= settings.max_iterations {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; d];
        for v in &simplex[..d] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / d as f64;
            }
        }
        let worst = simplex[d].clone();
        let mut reflected = combine(&centroid, &worst, 1.0);
        project(&mut reflected, lower, upper);
        let fr = eval(&reflected);

        if fr < values[0] {
            let mut expanded = combine(&centroid, &worst, 2.0);
            project(&mut expanded, lower, upper);
            let fe = eval(&expanded);
            if fe < fr {
                simplex[d] = expanded;
                values[d] = fe;
            } else {
                simplex[d] = reflected;
                values[d] = fr;
            }
            continue;
        }
        if fr < values[d - 1] {
            simplex[d] = reflected;
            values[d] = fr;
            continue;
        }
        let (contracted, fc, accept) = if fr < values[d] {
            let mut c = combine(&centroid, &worst, 0.5);
            project(&mut c, lower, upper);
            let fc = eval(&c);
            (c, fc, fc <= fr)
        } else {
            let mut c = combine(&centroid, &worst, -0.5);
            project(&mut c, lower, upper);
            let fc = eval(&c);
            (c, fc, fc < values[d])
        };
        if accept {
            simplex[d] = contracted;
            values[d] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=d {
            let shrunk: Vec<f64> = best
                .iter()
                .zip(&simplex[i])
                .map(|(b, x)| b + 0.5 * (x - b))
                .collect();
            values[i] = eval(&shrunk);
            simplex[i] = shrunk;
        }
    }

    NelderMeadResult {
        x: simplex.swap_remove(0),
        value: values[0],
        iterations,
        evaluations,
        converged,
    }
}

/// `m` Latin-hypercube points in the box ∏ [lowerᵢ, upperᵢ].
pub fn latin_hypercube(m: usize, lower: &[f64], upper: &[f64], seed: u64) -> Vec<Vec<f64>> {
    let d = lower.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![vec![0.0; d]; m];
    for k in 0..d {
        let mut strata: Vec<usize> = (0..m).collect();
        strata.shuffle(&mut rng);
        for (point, stratum) in points.iter_mut().zip(strata) {
            let u: f64 = rng.random();
            point[k] = lower[k] + (upper[k] - lower[k]) * (stratum as f64 + u) / m as f64;
        }
    }
    points
}
