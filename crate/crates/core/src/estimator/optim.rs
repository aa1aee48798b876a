//! Box-constrained derivative-free minimizers: golden-section search for
//! one parameter and multistart Nelder-Mead for several.

use rayon::prelude::*;

use crate::ode::ParamBox;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeOptions {
    /// Number of starting points; `None` means `3^p` capped at 81.
    pub multistart: Option<usize>,
    /// Final bracket width (golden section) or simplex size (Nelder-Mead).
    pub tol: f64,
    /// Iteration budget per local run.
    pub max_iter: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            multistart: None,
            tol: 1e-8,
            max_iter: 5000,
        }
    }
}

impl MinimizeOptions {
    pub fn starts_for(&self, p: usize) -> usize {
        self.multistart
            .unwrap_or_else(|| 3usize.saturating_pow(p as u32).min(81))
            .max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Golden-section search for a unimodal `f` on `[a, b]` until the bracket
/// is no wider than `tol`.
pub fn golden_section(
    f: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iter: usize,
) -> Minimum {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while (b - a) > tol && iterations < max_iter {
        iterations += 1;
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let (x, value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    Minimum {
        x: vec![x],
        value,
        iterations,
        converged: (b - a) <= tol,
    }
}

/// Nelder-Mead with standard coefficients (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2). Stops when every vertex lies within `tol`
/// (max-norm) of the best one, or after `max_iter` iterations.
pub fn nelder_mead(
    f: &impl Fn(&[f64]) -> f64,
    x0: &[f64],
    steps: &[f64],
    tol: f64,
    max_iter: usize,
) -> Minimum {
    let p = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(p + 1);
    simplex.push(x0.to_vec());
    for i in 0..p {
        let mut v = x0.to_vec();
        v[i] += steps[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut iterations = 0;
    let mut converged = false;

    let mut order: Vec<usize> = (0..=p).collect();
    loop {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[p];
        let second_worst = order[p - 1];

        let spread = simplex
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= tol && values[best].is_finite() {
            converged = true;
            break;
        }
        if iterations >= max_iter {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; p];
        for &idx in &order[..p] {
            for (c, v) in centroid.iter_mut().zip(&simplex[idx]) {
                *c += v / p as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < values[best] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second_worst] {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[worst] {
            let xc = along(-0.5);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(0.5);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < values[worst].min(fr) {
            simplex[worst] = xc;
            values[worst] = fc;
            continue;
        }
        let anchor = simplex[best].clone();
        for &idx in &order[1..] {
            for (v, a) in simplex[idx].iter_mut().zip(&anchor) {
                *v = a + 0.5 * (*v - a);
            }
            values[idx] = f(&simplex[idx]);
        }
    }
    let best = (0..=p)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("nonempty simplex");
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
    }
}

/// First `count` points of the smallest `L^p` lattice of cell centres with
/// `L^p >= count`, in lexicographic order.
pub fn lattice_starts(param_box: &ParamBox, count: usize) -> Vec<Vec<f64>> {
    let p = param_box.dim();
    let mut per_axis = 1usize;
    while per_axis.saturating_pow(p as u32) < count {
        per_axis += 1;
    }
    (0..count)
        .map(|mut idx| {
            let mut point = vec![0.0; p];
            for axis in (0..p).rev() {
                let cell = idx % per_axis;
                idx /= per_axis;
                let (lo, hi) = param_box.bounds()[axis];
                point[axis] = lo + (cell as f64 + 0.5) / per_axis as f64 * (hi - lo);
            }
            point
        })
        .collect()
}

fn initial_steps(param_box: &ParamBox, x0: &[f64], fraction: f64) -> Vec<f64> {
    x0.iter()
        .zip(param_box.bounds())
        .map(|(&x, &(lo, hi))| {
            let s = fraction * (hi - lo);
            if x + s <= hi {
                s
            } else {
                -s
            }
        })
        .collect()
}

/// Minimizes `f` over `param_box`. Points outside the box and non-finite
/// values count as `+inf`.
///
/// One parameter: a coarse scan of `max(starts, 32)` points brackets the
/// best cell, then golden-section search refines it. Several parameters:
/// Nelder-Mead from each lattice start, restarted once at its optimum;
/// the best value wins, ties going to the lowest start index.
pub fn minimize_in_box(
    f: impl Fn(&[f64]) -> f64 + Sync,
    param_box: &ParamBox,
    opts: &MinimizeOptions,
    explicit_starts: Option<&[Vec<f64>]>,
) -> Minimum {
    let guarded = |x: &[f64]| -> f64 {
        if !param_box.contains(x) {
            return f64::INFINITY;
        }
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let p = param_box.dim();

    if p == 1 && explicit_starts.is_none() {
        let (lo, hi) = param_box.bounds()[0];
        let cells = opts.starts_for(1).max(32);
        let h = (hi - lo) / cells as f64;
        let scan: Vec<f64> = (0..=cells)
            .map(|k| guarded(&[if k == cells { hi } else { lo + k as f64 * h }]))
            .collect();
        let best = (0..=cells)
            .min_by(|&a, &b| scan[a].total_cmp(&scan[b]))
            .expect("nonempty scan");
        let a = lo + best.saturating_sub(1) as f64 * h;
        let b = (lo + (best + 1).min(cells) as f64 * h).min(hi);
        let mut m = golden_section(|x| guarded(&[x]), a, b, opts.tol, opts.max_iter);
        if scan[best] < m.value {
            m.x = vec![lo + best as f64 * h];
            m.value = scan[best];
        }
        return m;
    }

    let starts = match explicit_starts {
        Some(s) => s.to_vec(),
        None => lattice_starts(param_box, opts.starts_for(p)),
    };
    let runs: Vec<Minimum> = starts
        .par_iter()
        .map(|x0| {
            let first = nelder_mead(
                &guarded,
                x0,
                &initial_steps(param_box, x0, 0.05),
                opts.tol,
                opts.max_iter,
            );
            if !first.value.is_finite() {
                return first;
            }
            let second = nelder_mead(
                &guarded,
                &first.x,
                &initial_steps(param_box, &first.x, 1e-3),
                opts.tol,
                opts.max_iter,
            );
            let iterations = first.iterations + second.iterations;
            let best = if second.value <= first.value {
                second
            } else {
                first.clone()
            };
            Minimum {
                iterations,
                converged: best.converged,
                ..best
            }
        })
        .collect();
    let total_iterations = runs.iter().map(|r| r.iterations).sum();
    let best = runs
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.value.total_cmp(&b.value).then(ia.cmp(ib)))
        .map(|(_, m)| m)
        .expect("at least one start");
    Minimum {
        iterations: total_iterations,
        ..best
    }
}
