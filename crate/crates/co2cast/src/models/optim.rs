//! Derivative-free minimization for the CSS objectives.
//!
//! Nelder-Mead simplex with deterministic multi-start: 5 fixed start
//! points, 500 iterations per start, relative tolerance 1e-8 on the
//! objective spread. No randomness anywhere, so a fit is reproducible
//! from its inputs alone.

/// Outcome of one simplex run.
#[derive(Debug, Clone)]
pub struct NmOutcome {
    pub x: Vec<f64>,
    pub fx: f64,
    pub converged: bool,
}

pub const MAX_ITERS: usize = 500;
pub const TOLERANCE: f64 = 1e-8;
pub const NUM_STARTS: usize = 5;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn guard(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// Minimizes `f` from `x0` with a fixed initial simplex step.
pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], step: f64) -> NmOutcome {
    let dim = x0.len();
    if dim == 0 {
        let fx = guard(f(x0));
        return NmOutcome {
            x: Vec::new(),
            fx,
            converged: true,
        };
    }

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| guard(f(v))).collect();

    let mut converged = false;
    for _ in 0..MAX_ITERS {
        // order best..worst
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let spread = values[worst] - values[best];
        if spread.abs() <= TOLERANCE * (values[best].abs() + TOLERANCE) {
            converged = true;
            break;
        }

        // centroid of all but the worst
        let mut centroid = vec![0.0; dim];
        for (i, v) in simplex.iter().enumerate() {
            if i == worst {
                continue;
            }
            for (c, &x) in centroid.iter_mut().zip(v) {
                *c += x;
            }
        }
        for c in centroid.iter_mut() {
            *c /= dim as f64;
        }

        let blend = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(&c, &w)| c + coef * (c - w))
                .collect()
        };

        let reflected = blend(REFLECT);
        let f_reflected = guard(f(&reflected));

        if f_reflected < values[best] {
            let expanded = blend(EXPAND);
            let f_expanded = guard(f(&expanded));
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
        } else if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
        } else {
            let contracted = if f_reflected < values[worst] {
                blend(CONTRACT)
            } else {
                blend(-CONTRACT)
            };
            let f_contracted = guard(f(&contracted));
            if f_contracted < values[worst].min(f_reflected) {
                simplex[worst] = contracted;
                values[worst] = f_contracted;
            } else {
                // shrink toward the best vertex
                let anchor = simplex[best].clone();
                for (i, v) in simplex.iter_mut().enumerate() {
                    if i == best {
                        continue;
                    }
                    for (x, &a) in v.iter_mut().zip(&anchor) {
                        *x = a + SHRINK * (*x - a);
                    }
                    values[i] = guard(f(v));
                }
            }
        }
    }

    let best = (0..=dim)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("non-empty simplex");
    NmOutcome {
        x: simplex[best].clone(),
        fx: values[best],
        converged,
    }
}

/// Deterministic start points for run `s` in a `dim`-dimensional search.
pub fn start_point(s: usize, dim: usize) -> Vec<f64> {
    const BASES: [f64; NUM_STARTS] = [0.0, 0.5, -0.5, 1.0, -1.0];
    let base = BASES[s % NUM_STARTS];
    (0..dim)
        .map(|i| base * (1.0 - 0.1 * (i % 4) as f64))
        .collect()
}

/// Runs all starts and keeps the best objective seen. `None` when no start
/// converged; the caller turns that into a convergence error carrying the
/// best point found.
pub fn multi_start(
    mut f: impl FnMut(&[f64]) -> f64,
    dim: usize,
) -> (NmOutcome, bool) {
    let mut best: Option<NmOutcome> = None;
    let mut any_converged = false;
    for s in 0..NUM_STARTS {
        let outcome = nelder_mead(&mut f, &start_point(s, dim), 0.5);
        any_converged |= outcome.converged;
        let replace = match &best {
            None => true,
            Some(b) => outcome.fx < b.fx,
        };
        if replace {
            best = Some(outcome);
        }
        if dim == 0 {
            break;
        }
    }
    (best.expect("at least one start"), any_converged)
}
