//! Unconstrained minimizers used by the likelihood fits. Constraints are
//! handled by the callers through parameter transforms.

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    /// Max-norm of the central-difference gradient at `x`.
    pub grad_max: f64,
    pub evaluations: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub grad_tol: f64,
    pub rel_f_tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub max_step_norm: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-4,
            rel_f_tol: 1e-8,
            max_iter: 500,
            fd_step: 1e-5,
            max_step_norm: 2.0,
        }
    }
}

struct Counted<F> {
    f: F,
    calls: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.calls += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// Central-difference gradient.
pub fn numerical_gradient<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let step = h * (1.0 + x[i].abs());
            xp[i] = x[i] + step;
            let fp = f(&xp);
            xp[i] = x[i] - step;
            let fm = f(&xp);
            xp[i] = x[i];
            (fp - fm) / (2.0 * step)
        })
        .collect()
}

/// Central-difference Hessian, symmetrized.
pub fn numerical_hessian<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let steps: Vec<f64> = x.iter().map(|v| h * (1.0 + v.abs())).collect();
    let f0 = f(x);
    let mut hess = vec![vec![0.0; n]; n];
    let mut xp = x.to_vec();
    for i in 0..n {
        xp[i] = x[i] + steps[i];
        let fp = f(&xp);
        xp[i] = x[i] - steps[i];
        let fm = f(&xp);
        xp[i] = x[i];
        hess[i][i] = (fp - 2.0 * f0 + fm) / (steps[i] * steps[i]);
        for j in 0..i {
            let mut eval = |si: f64, sj: f64| {
                xp[i] = x[i] + si * steps[i];
                xp[j] = x[j] + sj * steps[j];
                let v = f(&xp);
                xp[i] = x[i];
                xp[j] = x[j];
                v
            };
            let v =
                (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0)) / (4.0 * steps[i] * steps[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    hess
}

/// Quasi-Newton minimization with finite-difference gradients and an
/// Armijo backtracking line search.
pub fn bfgs<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], opts: &BfgsOptions) -> Minimum {
    let n = x0.len();
    let mut obj = Counted { f, calls: 0 };
    let mut x = x0.to_vec();
    let mut fx = obj.eval(&x);
    let mut g = numerical_gradient(&mut |p: &[f64]| obj.eval(p), &x, opts.fd_step);
    let mut h_inv = identity(n);
    let mut iterations = 0;
    let mut restarted = false;

    while iterations < opts.max_iter {
        let gmax = max_abs(&g);
        if gmax < opts.grad_tol || !fx.is_finite() {
            break;
        }
        iterations += 1;

        let mut dir: Vec<f64> = (0..n)
            .map(|i| -(0..n).map(|j| h_inv[i][j] * g[j]).sum::<f64>())
            .collect();
        let mut slope: f64 = dot(&dir, &g);
        if slope >= 0.0 {
            h_inv = identity(n);
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&dir, &g);
        }
        let norm = dot(&dir, &dir).sqrt();
        if norm > opts.max_step_norm {
            let s = opts.max_step_norm / norm;
            dir.iter_mut().for_each(|d| *d *= s);
            slope *= s;
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
            let ft = obj.eval(&trial);
            if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let (x_new, f_new) = match accepted {
            Some(v) => v,
            None => {
                if restarted {
                    break;
                }
                restarted = true;
                h_inv = identity(n);
                continue;
            }
        };

        let g_new = numerical_gradient(&mut |p: &[f64]| obj.eval(p), &x_new, opts.fd_step);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h_inv[i][j] * y[j]).sum()).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h_inv[i][j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }

        let rel_change = (fx - f_new).abs() / fx.abs().max(1.0);
        x = x_new;
        fx = f_new;
        g = g_new;
        if rel_change < opts.rel_f_tol && max_abs(&g) < opts.grad_tol.sqrt() {
            // Flat in value; take a couple more cheap iterations only if the
            // gradient is still far from the tolerance.
            if max_abs(&g) < opts.grad_tol {
                break;
            }
        }
    }

    Minimum {
        grad_max: max_abs(&g),
        value: fx,
        x,
        evaluations: obj.calls,
        iterations,
    }
}

/// Nelder-Mead simplex search, used to get close before the quasi-Newton
/// polish on rough objectives.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    initial_step: f64,
    max_evals: usize,
    rel_f_tol: f64,
) -> Minimum {
    let n = x0.len();
    let mut obj = Counted { f, calls: 0 };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = obj.eval(x0);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += initial_step;
        let v = obj.eval(&p);
        simplex.push((p, v));
    }
    let mut iterations = 0;
    while obj.calls < max_evals {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if worst.is_finite() && (worst - best).abs() <= rel_f_tol * best.abs().max(1.0) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(p, _)| p[j]).sum::<f64>() / n as f64)
            .collect();
        let along =
            |t: f64, worst: &[f64]| -> Vec<f64> { centroid.iter().zip(worst).map(|(c, w)| c + t * (w - c)).collect() };
        let worst_pt = simplex[n].0.clone();
        let refl = along(-1.0, &worst_pt);
        let fr = obj.eval(&refl);
        if fr < simplex[0].1 {
            let exp = along(-2.0, &worst_pt);
            let fe = obj.eval(&exp);
            simplex[n] = if fe < fr { (exp, fe) } else { (refl, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (refl, fr);
        } else {
            let t = if fr < simplex[n].1 { -0.5 } else { 0.5 };
            let con = along(t, &worst_pt);
            let fc = obj.eval(&con);
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (con, fc);
            } else {
                let best_pt = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let p: Vec<f64> = best_pt.iter().zip(&vertex.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
                    let v = obj.eval(&p);
                    *vertex = (p, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum {
        x,
        value,
        grad_max: f64::NAN,
        evaluations: obj.calls,
        iterations,
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
