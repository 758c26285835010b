//! Linear quantile regression by a primal-dual interior-point method on the
//! bounded dual LP, finished by moving to an exact basic solution.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::garch::{parse_record, record_num};
use crate::risk::check_alpha;

use super::regressors::QrDesign;

pub const INTERCEPT: &str = "intercept";
/// Minimum rows per estimated coefficient.
pub const ROWS_PER_COEFFICIENT: usize = 10;

const STEP_DAMPING: f64 = 0.9995;
const MAX_ITER: usize = 100;
const GAP_TOL: f64 = 1e-12;
const COLLINEAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct QrFit {
    pub alpha: f64,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub names: Vec<String>,
    /// Sum of check losses at the solution.
    pub pinball_loss: f64,
}

/// Check loss `u * (alpha - 1{u < 0})`.
pub fn pinball(u: f64, alpha: f64) -> f64 {
    if u < 0.0 {
        u * (alpha - 1.0)
    } else {
        u * alpha
    }
}

fn total_loss(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, alpha: f64) -> f64 {
    (y - x * beta).iter().map(|u| pinball(*u, alpha)).sum()
}

fn design_matrix(d: &QrDesign) -> DMatrix<f64> {
    let p = d.n_regressors() + 1;
    DMatrix::from_fn(d.len(), p, |i, j| if j == 0 { 1.0 } else { d.rows[i][j - 1] })
}

/// Rejects designs whose columns (intercept first) are linearly dependent,
/// naming the first dependent column and the columns that span it.
fn check_rank(x: &DMatrix<f64>, names: &[String]) -> Result<()> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    for j in 0..x.ncols() {
        let col = x.column(j).into_owned();
        let norm = col.norm();
        let mut v = col.clone();
        for q in &basis {
            let c = q.dot(&v);
            v.axpy(-c, q, 1.0);
        }
        if norm == 0.0 || v.norm() <= COLLINEAR_TOL * norm {
            let others = if norm == 0.0 || kept.is_empty() {
                Vec::new()
            } else {
                let a = DMatrix::from_fn(x.nrows(), kept.len(), |i, k| x[(i, kept[k])]);
                let coef = a
                    .clone()
                    .svd(true, true)
                    .solve(&col, 1e-12)
                    .unwrap_or_else(|_| DVector::zeros(kept.len()));
                kept.iter()
                    .zip(coef.iter())
                    .filter(|(&k, c)| (*c * x.column(k).norm()).abs() > 1e-8 * norm)
                    .map(|(&k, _)| names[k].clone())
                    .collect()
            };
            return Err(Error::RankDeficient {
                column: names[j].clone(),
                others,
            });
        }
        basis.push(v.normalize());
        kept.push(j);
    }
    Ok(())
}

fn step_bound(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(x, d)| -x / d)
        .fold(f64::INFINITY, f64::min)
}

fn solve_normal(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    m.clone()
        .cholesky()
        .map(|c| c.solve(rhs))
        .or_else(|| m.clone().lu().solve(rhs))
}

/// Frisch-Newton interior point: minimize `c'x` subject to `A x = b`,
/// `0 <= x <= 1`, with `A = X'`, `c = -y`, `b = (1 - alpha) X'1`. The
/// regression coefficients are the negated dual variables.
fn interior_point(x: &DMatrix<f64>, y: &DVector<f64>, alpha: f64) -> Option<DVector<f64>> {
    let n = x.nrows();
    let c = -y;
    let xt = x.transpose();
    let b = &xt * DVector::from_element(n, 1.0 - alpha);
    let mut px = DVector::from_element(n, 1.0 - alpha);
    let mut s = DVector::from_element(n, alpha);
    let mut dual = solve_normal(&(&xt * x), &(&xt * &c))?;
    let mut r = &c - x * &dual;
    r.iter_mut().for_each(|v| {
        if *v == 0.0 {
            *v = 1e-3;
        }
    });
    let mut z = r.map(|v| v.max(0.0));
    let mut w = &z - &r;
    let scale = 1.0 + c.abs().sum();
    let gap = |px: &DVector<f64>, dual: &DVector<f64>, w: &DVector<f64>| c.dot(px) - b.dot(dual) + w.sum();

    for _ in 0..MAX_ITER {
        if gap(&px, &dual, &w) <= GAP_TOL * scale {
            break;
        }
        let q = DVector::from_fn(n, |i, _| 1.0 / (z[i] / px[i] + w[i] / s[i]));
        let r = &z - &w;
        let xq = DMatrix::from_fn(n, x.ncols(), |i, j| x[(i, j)] * q[i]);
        let normal = &xt * &xq;
        let mut rhs = q.component_mul(&r);
        let mut dy = solve_normal(&normal, &(&xt * &rhs))?;
        let mut dx = q.component_mul(&(x * &dy - &r));
        let mut ds = -&dx;
        let mut dz = DVector::from_fn(n, |i, _| -z[i] * (dx[i] / px[i] + 1.0));
        let mut dw = DVector::from_fn(n, |i, _| -w[i] * (ds[i] / s[i] + 1.0));
        let mut fp = (STEP_DAMPING * step_bound(&px, &dx).min(step_bound(&s, &ds))).min(1.0);
        let mut fd = (STEP_DAMPING * step_bound(&w, &dw).min(step_bound(&z, &dz))).min(1.0);

        if fp.min(fd) < 1.0 {
            // Mehrotra corrector with an adaptive centering target
            let mu0 = z.dot(&px) + w.dot(&s);
            let g = (&z + fd * &dz).dot(&(&px + fp * &dx)) + (&w + fd * &dw).dot(&(&s + fp * &ds));
            let mu = mu0 * (g / mu0).powi(3) / (2.0 * n as f64);
            let dxdz = dx.component_mul(&dz);
            let dsdw = ds.component_mul(&dw);
            let xinv = px.map(|v| 1.0 / v);
            let sinv = s.map(|v| 1.0 / v);
            let xi = mu * (&xinv - &sinv);
            rhs += q.component_mul(&(&dxdz - &dsdw - &xi));
            dy = solve_normal(&normal, &(&xt * &rhs))?;
            dx = q.component_mul(&(x * &dy + &xi - &r - &dxdz + &dsdw));
            ds = -&dx;
            dz = DVector::from_fn(n, |i, _| mu * xinv[i] - z[i] - xinv[i] * z[i] * dx[i] - dxdz[i]);
            dw = DVector::from_fn(n, |i, _| mu * sinv[i] - w[i] - sinv[i] * w[i] * ds[i] - dsdw[i]);
            fp = (STEP_DAMPING * step_bound(&px, &dx).min(step_bound(&s, &ds))).min(1.0);
            fd = (STEP_DAMPING * step_bound(&w, &dw).min(step_bound(&z, &dz))).min(1.0);
        }
        px += fp * &dx;
        s += fp * &ds;
        dual += fd * &dy;
        w += fd * &dw;
        z += fd * &dz;
    }
    Some(-dual)
}

/// Moves an interior solution to the basic solution interpolating the
/// `p` observations with the smallest residuals, if that is no worse.
fn purify(x: &DMatrix<f64>, y: &DVector<f64>, beta: DVector<f64>, alpha: f64) -> DVector<f64> {
    let p = x.ncols();
    let resid = y - x * &beta;
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&i, &j| resid[i].abs().total_cmp(&resid[j].abs()));
    let h = &order[..p];
    let xh = DMatrix::from_fn(p, p, |i, j| x[(h[i], j)]);
    let yh = DVector::from_fn(p, |i, _| y[h[i]]);
    match xh.lu().solve(&yh) {
        Some(vertex) if vertex.iter().all(|v| v.is_finite()) => {
            if total_loss(x, y, &vertex, alpha) <= total_loss(x, y, &beta, alpha) {
                vertex
            } else {
                beta
            }
        }
        _ => beta,
    }
}

/// Minimizes the summed check loss of `response - intercept - rows * coefficients`.
pub fn qr_fit(d: &QrDesign, alpha: f64) -> Result<QrFit> {
    check_alpha(alpha)?;
    let p = d.n_regressors() + 1;
    let needed = ROWS_PER_COEFFICIENT * p;
    if d.len() < needed {
        return Err(Error::TooShort { needed, have: d.len() });
    }
    let x = design_matrix(d);
    let mut names = vec![INTERCEPT.to_string()];
    names.extend(d.names.iter().cloned());
    check_rank(&x, &names)?;
    let y = DVector::from_column_slice(&d.response);
    let beta = interior_point(&x, &y, alpha)
        .ok_or_else(|| Error::Degenerate("singular normal equations in quantile regression".into()))?;
    let beta = purify(&x, &y, beta, alpha);
    Ok(QrFit {
        alpha,
        intercept: beta[0],
        coefficients: beta.iter().skip(1).copied().collect(),
        names: d.names.clone(),
        pinball_loss: total_loss(&x, &y, &beta, alpha),
    })
}

/// `intercept + coefficients . row`.
pub fn qr_predict(f: &QrFit, row: &[f64]) -> Result<f64> {
    if row.len() != f.coefficients.len() {
        return Err(Error::LengthMismatch {
            left: row.len(),
            right: f.coefficients.len(),
        });
    }
    Ok(f.intercept + f.coefficients.iter().zip(row).map(|(b, x)| b * x).sum::<f64>())
}

impl QrFit {
    pub fn to_record(&self) -> String {
        let mut out = format!("alpha = {}\nintercept = {}\n", self.alpha, self.intercept);
        for (n, b) in self.names.iter().zip(&self.coefficients) {
            out.push_str(&format!("coef_{n} = {b}\n"));
        }
        out.push_str(&format!(
            "regressors = {}\npinball_loss = {}\n",
            self.names.join(","),
            self.pinball_loss
        ));
        out
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let map = parse_record(text)?;
        let names: Vec<String> = map
            .get("regressors")
            .map(|s| s.split(',').filter(|n| !n.is_empty()).map(str::to_string).collect())
            .unwrap_or_default();
        let coefficients = names
            .iter()
            .map(|n| record_num(&map, &format!("coef_{n}")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            alpha: record_num(&map, "alpha")?,
            intercept: record_num(&map, "intercept")?,
            coefficients,
            names,
            pinball_loss: record_num(&map, "pinball_loss")?,
        })
    }
}
