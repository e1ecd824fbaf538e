//! Small dense linear-algebra kernels: a cyclic Jacobi eigensolver for real
//! symmetric matrices and a diagonally preconditioned conjugate-gradient solver.

use crate::error::{Error, Result};

/// Off-diagonal Frobenius norm (relative to the full norm) at which the
/// Jacobi iteration stops.
pub const JACOBI_TOLERANCE: f64 = 1e-12;

/// Upper bound on Jacobi sweeps before giving up.
pub const JACOBI_MAX_SWEEPS: usize = 60;

/// Eigen-decomposition of a real symmetric matrix.
///
/// `vectors` is stored mode-major: entries `[k * n .. (k + 1) * n]` hold the
/// unit eigenvector belonging to `values[k]`. Values are sorted ascending.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub n: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

impl SymmetricEigen {
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.n..(k + 1) * self.n]
    }
}

/// Cyclic Jacobi rotations on a dense symmetric matrix given in row-major
/// order. The input is consumed as workspace.
///
/// Each rotation annihilates one off-diagonal pair; sweeps repeat until the
/// off-diagonal Frobenius norm drops below [`JACOBI_TOLERANCE`] times the
/// Frobenius norm of the input.
pub fn jacobi_eigen(mut a: Vec<f64>, n: usize) -> Result<SymmetricEigen> {
    assert_eq!(a.len(), n * n, "matrix storage does not match dimension");
    let mut vt = vec![0.0; n * n];
    for k in 0..n {
        vt[k * n + k] = 1.0;
    }
    if n <= 1 {
        return Ok(SymmetricEigen {
            n,
            values: a,
            vectors: vt,
        });
    }

    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if total == 0.0 {
        return Ok(SymmetricEigen {
            n,
            values: vec![0.0; n],
            vectors: vt,
        });
    }
    let target = JACOBI_TOLERANCE * total;

    let mut row_p = vec![0.0; n];
    let mut row_q = vec![0.0; n];
    let mut off = off_norm(&a, n);
    let mut sweeps = 0;
    while off > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigensolverNoConvergence {
                sweeps,
                off_norm: off / total,
            });
        }
        // Early sweeps skip small entries; later ones rotate everything nonzero.
        let threshold = if sweeps < 3 { 0.2 * off / (n * n) as f64 } else { 0.0 };
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 || apq.abs() <= threshold {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // Entry negligible against both diagonals: drop it.
                if sweeps > 3 && apq.abs() < 1e-18 * app.abs() && apq.abs() < 1e-18 * aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                row_p.copy_from_slice(&a[p * n..(p + 1) * n]);
                row_q.copy_from_slice(&a[q * n..(q + 1) * n]);
                for k in 0..n {
                    let akp = row_p[k];
                    let akq = row_q[k];
                    row_p[k] = c * akp - s * akq;
                    row_q[k] = s * akp + c * akq;
                }
                row_p[p] = app - t * apq;
                row_q[q] = aqq + t * apq;
                row_p[q] = 0.0;
                row_q[p] = 0.0;
                a[p * n..(p + 1) * n].copy_from_slice(&row_p);
                a[q * n..(q + 1) * n].copy_from_slice(&row_q);
                for k in 0..n {
                    a[k * n + p] = row_p[k];
                    a[k * n + q] = row_q[k];
                }

                let (head, tail) = vt.split_at_mut(q * n);
                let vp = &mut head[p * n..(p + 1) * n];
                let vq = &mut tail[..n];
                for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
                    let (g, h) = (*x, *y);
                    *x = c * g - s * h;
                    *y = s * g + c * h;
                }
            }
        }
        sweeps += 1;
        off = off_norm(&a, n);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &i in &order {
        vectors.extend_from_slice(&vt[i * n..(i + 1) * n]);
    }
    Ok(SymmetricEigen { n, values, vectors })
}

fn off_norm(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            sum += a[p * n + q] * a[p * n + q];
        }
    }
    (2.0 * sum).sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Largest absolute difference divided by the largest reference magnitude.
pub fn max_relative_error(approx: &[f64], reference: &[f64]) -> f64 {
    let scale = norm_inf(reference);
    let diff = approx
        .iter()
        .zip(reference)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Outcome of a conjugate-gradient solve.
#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Preconditioned conjugate gradients for a symmetric positive definite
/// operator, with the diagonal `diag` as a Jacobi preconditioner.
pub fn conjugate_gradient<F>(
    apply: F,
    diag: &[f64],
    rhs: &[f64],
    tolerance: f64,
    max_iterations: usize,
) -> Result<CgOutcome>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = rhs.len();
    let bnorm = dot(rhs, rhs).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(CgOutcome {
            solution: x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut residual = 1.0;
    for it in 1..=max_iterations {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::SingularSystem(
                "conjugate gradients met a non-positive curvature direction".into(),
            ));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        residual = dot(&r, &r).sqrt() / bnorm;
        if residual <= tolerance {
            return Ok(CgOutcome {
                solution: x,
                iterations: it,
                relative_residual: residual,
            });
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::CgNoConvergence {
        iterations: max_iterations,
        residual,
    })
}

/// Ordinary least-squares fit `y ≈ intercept + slope * x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(e: &SymmetricEigen) -> Vec<f64> {
        let n = e.n;
        let mut out = vec![0.0; n * n];
        for k in 0..n {
            let v = e.vector(k);
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] += e.values[k] * v[i] * v[j];
                }
            }
        }
        out
    }

    #[test]
    fn two_by_two() {
        let e = jacobi_eigen(vec![2.0, 1.0, 1.0, 2.0], 2).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_random_symmetric() {
        let n = 17;
        let mut a = vec![0.0; n * n];
        let mut seed = 12345u64;
        for i in 0..n {
            for j in i..n {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let v = ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let e = jacobi_eigen(a.clone(), n).unwrap();
        let back = reconstruct(&e);
        assert!(max_relative_error(&back, &a) < 1e-12);
        for w in e.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
        for i in 0..n {
            for j in 0..n {
                let d = dot(e.vector(i), e.vector(j));
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cg_solves_tridiagonal() {
        let n = 50;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut v = 2.5 * x[i];
                if i > 0 {
                    v -= x[i - 1];
                }
                if i + 1 < n {
                    v -= x[i + 1];
                }
                y[i] = v;
            }
        };
        let b = vec![1.0; n];
        let out = conjugate_gradient(apply, &vec![2.5; n], &b, 1e-12, 500).unwrap();
        let mut check = vec![0.0; n];
        apply(&out.solution, &mut check);
        assert!(max_relative_error(&check, &b) < 1e-10);
    }

    #[test]
    fn fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 - 2.0 * v).collect();
        let (c, m) = linear_fit(&x, &y);
        assert!((c - 0.5).abs() < 1e-12 && (m + 2.0).abs() < 1e-12);
    }
}
