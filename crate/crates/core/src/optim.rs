//! Derivative-free minimization.
//!
//! A plain Nelder-Mead simplex with the dimension-adaptive coefficients of
//! Gao & Han (2012). Non-finite objective values are treated as `+inf`, which
//! lets callers encode hard constraints by returning `f64::INFINITY`.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Edge length of the initial simplex along each coordinate.
    pub initial_step: f64,
    /// Stop when the best value improved by less than this over one full
    /// cycle of `n + 1` iterations and the simplex values agree to `spread_tol`.
    pub cycle_tol: f64,
    pub spread_tol: f64,
    pub max_iter: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            cycle_tol: 1e-9,
            spread_tol: 1e-9,
            max_iter: 5000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

pub fn nelder_mead<F>(f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let eval = |x: &[f64]| sanitize(f(x));
    if n == 0 {
        return Minimum {
            x: vec![],
            value: eval(x0),
            iterations: 0,
            converged: true,
        };
    }
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = if n > 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];
    let mut checkpoint = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        if iterations % (n + 1) == 0 {
            let spread = values[worst] - values[best];
            let improvement = checkpoint - values[best];
            if values[best].is_finite()
                && improvement < opts.cycle_tol
                && spread <= opts.spread_tol * values[best].abs().max(1.0)
            {
                converged = true;
                break;
            }
            checkpoint = values[best];
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x / nf;
            }
        }

        let along = |coef: f64, out: &mut Vec<f64>| {
            for ((o, c), w) in out.iter_mut().zip(&centroid).zip(&simplex[worst]) {
                *o = c + coef * (c - w);
            }
        };

        along(alpha, &mut trial);
        let fr = eval(&trial);
        if fr < values[best] {
            along(alpha * gamma, &mut trial2);
            let fe = eval(&trial2);
            if fe < fr {
                simplex[worst].copy_from_slice(&trial2);
                values[worst] = fe;
            } else {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second_worst] {
            simplex[worst].copy_from_slice(&trial);
            values[worst] = fr;
            continue;
        }
        let (coef, threshold) = if fr < values[worst] {
            (alpha * rho, fr)
        } else {
            (-rho, values[worst])
        };
        along(coef, &mut trial2);
        let fc = eval(&trial2);
        if fc < threshold {
            simplex[worst].copy_from_slice(&trial2);
            values[worst] = fc;
            continue;
        }
        // shrink toward the best vertex
        let anchor = simplex[best].clone();
        for &i in &order[1..] {
            for (x, b) in simplex[i].iter_mut().zip(&anchor) {
                *x = b + sigma * (*x - b);
            }
            values[i] = eval(&simplex[i]);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
    }
}
