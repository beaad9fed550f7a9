//! Box-bounded Nelder–Mead minimiser.
//!
//! Each coordinate lives in `[lo, hi]` through a logistic map from an
//! unbounded working coordinate, so the simplex never has to be projected.

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub max_iterations: usize,
    /// Convergence when the simplex's value spread falls below
    /// `f_tol * (1 + |f_best|)`.
    pub f_tol: f64,
    /// Initial simplex edge in working coordinates.
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            max_iterations: 2_000,
            f_tol: 1e-10,
            initial_step: 0.5,
        }
    }
}

fn to_bounded(u: f64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) / (1.0 + (-u).exp())
}

fn to_working(x: f64, lo: f64, hi: f64) -> f64 {
    let t = ((x - lo) / (hi - lo)).clamp(1e-9, 1.0 - 1e-9);
    (t / (1.0 - t)).ln()
}

impl NelderMead {
    /// Minimises `f` over the box `bounds` starting at `start`.
    ///
    /// Non-finite objective values are treated as `+inf`.
    pub fn minimize<F>(&self, f: F, start: &[f64], bounds: &[(f64, f64)]) -> Minimum
    where
        F: Fn(&[f64]) -> f64,
    {
        let dim = start.len();
        assert_eq!(dim, bounds.len());
        let mut evaluations = 0usize;
        let map = |u: &[f64]| -> Vec<f64> {
            u.iter()
                .zip(bounds)
                .map(|(&u, &(lo, hi))| to_bounded(u, lo, hi))
                .collect()
        };
        let mut eval = |u: &[f64]| {
            evaluations += 1;
            let v = f(&map(u));
            if v.is_finite() {
                v
            } else {
                f64::INFINITY
            }
        };

        let u0: Vec<f64> = start
            .iter()
            .zip(bounds)
            .map(|(&x, &(lo, hi))| to_working(x, lo, hi))
            .collect();
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        let v0 = eval(&u0);
        simplex.push((u0.clone(), v0));
        for i in 0..dim {
            let mut u = u0.clone();
            u[i] += self.initial_step;
            let v = eval(&u);
            simplex.push((u, v));
        }

        let mut converged = false;
        for _ in 0..self.max_iterations {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            let worst = simplex[dim].1;
            if (worst - best).abs() <= self.f_tol * (1.0 + best.abs()) {
                converged = true;
                break;
            }

            let centroid: Vec<f64> = (0..dim)
                .map(|j| simplex[..dim].iter().map(|(u, _)| u[j]).sum::<f64>() / dim as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[dim].0)
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };

            let reflected = along(-1.0);
            let fr = eval(&reflected);
            if fr < simplex[0].1 {
                let expanded = along(-2.0);
                let fe = eval(&expanded);
                simplex[dim] = if fe < fr {
                    (expanded, fe)
                } else {
                    (reflected, fr)
                };
                continue;
            }
            if fr < simplex[dim - 1].1 {
                simplex[dim] = (reflected, fr);
                continue;
            }
            let (contracted, fc) = if fr < simplex[dim].1 {
                let c = along(-0.5);
                let fc = eval(&c);
                (c, fc)
            } else {
                let c = along(0.5);
                let fc = eval(&c);
                (c, fc)
            };
            if fc < fr.min(simplex[dim].1) {
                simplex[dim] = (contracted, fc);
                continue;
            }
            // Shrink toward the best vertex.
            let best_u = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let u: Vec<f64> = best_u
                    .iter()
                    .zip(&vertex.0)
                    .map(|(b, x)| b + 0.5 * (x - b))
                    .collect();
                let v = eval(&u);
                *vertex = (u, v);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (u, value) = simplex.swap_remove(0);
        Minimum {
            x: map(&u),
            value,
            converged,
            evaluations,
        }
    }
}
