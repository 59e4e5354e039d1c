//! Nelder–Mead direct search with dimension-adaptive coefficients.

#[derive(Debug, Clone)]
pub struct NelderMead {
    pub max_evals: usize,
    pub initial_step: f64,
    /// Stop as soon as a value at or below this is seen.
    pub target: f64,
    /// Simplex collapse criterion on the spread of values.
    pub f_tol: f64,
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

impl NelderMead {
    /// Minimizes `f` from `x0`. When the simplex collapses above `target`
    /// and budget remains, a fresh simplex is built around the best point.
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let mut evals = 0usize;
        let mut best = Minimum {
            x: x0.to_vec(),
            value: f64::INFINITY,
            evals: 0,
        };
        if n == 0 || self.max_evals == 0 {
            best.value = f(x0);
            best.evals = 1;
            return best;
        }
        let nf = n as f64;
        let alpha = 1.0;
        let beta = 1.0 + 2.0 / nf;
        let gamma = 0.75 - 1.0 / (2.0 * nf);
        let delta = 1.0 - 1.0 / nf;

        let max_evals = self.max_evals;
        let mut eval = |x: &[f64], evals: &mut usize, best: &mut Minimum| -> f64 {
            if *evals >= max_evals {
                return f64::INFINITY;
            }
            *evals += 1;
            let v = f(x);
            let v = if v.is_nan() { f64::INFINITY } else { v };
            if v < best.value {
                best.value = v;
                best.x = x.to_vec();
            }
            v
        };

        let mut step = self.initial_step;
        let mut center = x0.to_vec();
        'outer: while evals < self.max_evals {
            let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
            let mut values: Vec<f64> = Vec::with_capacity(n + 1);
            simplex.push(center.clone());
            values.push(eval(&center, &mut evals, &mut best));
            for k in 0..n {
                let mut p = center.clone();
                p[k] += step;
                values.push(eval(&p, &mut evals, &mut best));
                simplex.push(p);
            }
            if best.value <= self.target {
                break;
            }

            loop {
                if evals >= self.max_evals {
                    break 'outer;
                }
                let mut order: Vec<usize> = (0..=n).collect();
                order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
                simplex = order.iter().map(|&i| simplex[i].clone()).collect();
                values = order.iter().map(|&i| values[i]).collect();

                let spread = values[n] - values[0];
                if spread <= self.f_tol * (values[0].abs() + self.f_tol) {
                    break;
                }

                let mut centroid = vec![0.0; n];
                for p in &simplex[..n] {
                    for (c, v) in centroid.iter_mut().zip(p) {
                        *c += v / nf;
                    }
                }
                let along = |t: f64| -> Vec<f64> {
                    centroid
                        .iter()
                        .zip(&simplex[n])
                        .map(|(c, w)| c + t * (c - w))
                        .collect()
                };

                let xr = along(alpha);
                let fr = eval(&xr, &mut evals, &mut best);
                if fr < values[0] {
                    let xe = along(beta);
                    let fe = eval(&xe, &mut evals, &mut best);
                    if fe < fr {
                        simplex[n] = xe;
                        values[n] = fe;
                    } else {
                        simplex[n] = xr;
                        values[n] = fr;
                    }
                } else if fr < values[n - 1] {
                    simplex[n] = xr;
                    values[n] = fr;
                } else {
                    let (xc, fc) = if fr < values[n] {
                        let xc = along(gamma);
                        let fc = eval(&xc, &mut evals, &mut best);
                        (xc, fc)
                    } else {
                        let xc = along(-gamma);
                        let fc = eval(&xc, &mut evals, &mut best);
                        (xc, fc)
                    };
                    if fc < values[n].min(fr) {
                        simplex[n] = xc;
                        values[n] = fc;
                    } else {
                        let x0 = simplex[0].clone();
                        for i in 1..=n {
                            let p: Vec<f64> = x0
                                .iter()
                                .zip(&simplex[i])
                                .map(|(a, b)| a + delta * (b - a))
                                .collect();
                            values[i] = eval(&p, &mut evals, &mut best);
                            simplex[i] = p;
                        }
                    }
                }
                if best.value <= self.target {
                    break 'outer;
                }
            }
            center = best.x.clone();
            step = (step * 0.5).max(1e-6);
        }
        best.evals = evals;
        best
    }
}
