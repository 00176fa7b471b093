//! Derivative-free local minimization (Nelder–Mead) used by the GPD fitter.

pub(crate) struct NelderMead {
    pub max_iterations: usize,
    pub initial_step: f64,
    pub f_tol: f64,
    pub x_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            initial_step: 0.25,
            f_tol: 1e-10,
            x_tol: 1e-9,
        }
    }
}

pub(crate) struct NmOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl NelderMead {
    /// Minimizes `f` starting from `x0`. The objective may return
    /// `f64::INFINITY` to mark infeasible points.
    pub fn minimize<F: Fn(&[f64]) -> f64>(&self, f: F, x0: &[f64]) -> NmOutcome {
        let d = x0.len();
        assert!(d >= 1, "need at least one coordinate");

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
        simplex.push(x0.to_vec());
        for i in 0..d {
            let mut v = x0.to_vec();
            v[i] += if v[i].abs() > 1.0 {
                self.initial_step * v[i].abs()
            } else {
                self.initial_step
            };
            simplex.push(v);
        }
        let mut fx: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iterations {
            iterations += 1;

            // order: best first, worst last
            let mut idx: Vec<usize> = (0..=d).collect();
            idx.sort_by(|&a, &b| fx[a].partial_cmp(&fx[b]).unwrap_or(std::cmp::Ordering::Equal));
            let reordered: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
            let refx: Vec<f64> = idx.iter().map(|&i| fx[i]).collect();
            simplex = reordered;
            fx = refx;

            let f_best = fx[0];
            let f_worst = fx[d];
            let spread = (f_worst - f_best).abs();
            let x_spread = (0..d)
                .map(|j| {
                    let col: Vec<f64> = simplex.iter().map(|v| v[j]).collect();
                    let mx = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let mn = col.iter().cloned().fold(f64::INFINITY, f64::min);
                    mx - mn
                })
                .fold(0.0f64, f64::max);
            if spread <= self.f_tol * (f_best.abs() + self.f_tol) || x_spread <= self.x_tol {
                converged = true;
                break;
            }

            // centroid of all but the worst
            let mut centroid = vec![0.0; d];
            for v in simplex.iter().take(d) {
                for (c, &vi) in centroid.iter_mut().zip(v.iter()) {
                    *c += vi;
                }
            }
            for c in centroid.iter_mut() {
                *c /= d as f64;
            }

            let blend = |a: f64, b: f64, t: f64| a + t * (b - a);
            let point =
                |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[d]).map(|(&c, &w)| blend(c, w, t)).collect() };

            let reflected = point(-1.0);
            let f_ref = f(&reflected);

            if f_ref < fx[0] {
                let expanded = point(-2.0);
                let f_exp = f(&expanded);
                if f_exp < f_ref {
                    simplex[d] = expanded;
                    fx[d] = f_exp;
                } else {
                    simplex[d] = reflected;
                    fx[d] = f_ref;
                }
            } else if f_ref < fx[d - 1] {
                simplex[d] = reflected;
                fx[d] = f_ref;
            } else {
                // contraction: outside when reflection improved the worst,
                // inside otherwise
                let (candidate, f_cand) = if f_ref < fx[d] {
                    let c = point(-0.5);
                    let fc = f(&c);
                    (c, fc)
                } else {
                    let c = point(0.5);
                    let fc = f(&c);
                    (c, fc)
                };
                if f_cand < fx[d].min(f_ref) {
                    simplex[d] = candidate;
                    fx[d] = f_cand;
                } else {
                    // shrink toward the best vertex
                    let best = simplex[0].clone();
                    for v in simplex.iter_mut().skip(1) {
                        for (vi, &bi) in v.iter_mut().zip(best.iter()) {
                            *vi = bi + 0.5 * (*vi - bi);
                        }
                    }
                    for (i, v) in simplex.iter().enumerate().skip(1) {
                        fx[i] = f(v);
                    }
                }
            }
        }

        let (mut best_i, mut best_f) = (0, fx[0]);
        for (i, &v) in fx.iter().enumerate() {
            if v < best_f {
                best_f = v;
                best_i = i;
            }
        }
        NmOutcome {
            x: simplex[best_i].clone(),
            f: best_f,
            iterations,
            converged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_shifted_quadratic() {
        let nm = NelderMead::default();
        let out = nm.minimize(
            |x| x.iter().enumerate().map(|(i, &v)| (v - i as f64).powi(2)).sum(),
            &[5.0, 5.0, 5.0, 5.0],
        );
        assert!(out.converged);
        for (i, &v) in out.x.iter().enumerate() {
            assert!((v - i as f64).abs() < 1e-4, "coord {i}: {v}");
        }
    }

    #[test]
    fn minimizes_rosenbrock() {
        let nm = NelderMead {
            max_iterations: 5000,
            ..Default::default()
        };
        let out = nm.minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
        );
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-4 && (out.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn tolerates_infinite_regions() {
        let nm = NelderMead::default();
        let out = nm.minimize(
            |x| {
                if x[0] <= 0.0 {
                    f64::INFINITY
                } else {
                    (x[0].ln()).powi(2)
                }
            },
            &[3.0],
        );
        assert!((out.x[0] - 1.0).abs() < 1e-3);
    }
}
