use std::sync::Arc;

use nalgebra::DMatrix;

use super::space::DirichletSpace;
use crate::error::{check_len, Error, Result};
use crate::linalg::jacobi_eigen;

/// Default vertex cap for the dense eigensolver.
pub const DEFAULT_DENSE_CAP: usize = 2000;

/// Relative size (against `λ_max`) below which an eigenvalue counts as zero.
pub const ZERO_EIGENVALUE_TOLERANCE: f64 = 1e-10;

/// `μ`-orthonormal eigenpairs of `-L`.
///
/// Eigenvalues are nondecreasing. Each eigenvector's first entry that is not
/// negligible is positive, which makes the decomposition deterministic up to
/// rotations inside degenerate eigenspaces; everything downstream is
/// invariant under those rotations.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    space: Arc<DirichletSpace>,
    values: Vec<f64>,
    vectors: Vec<f64>,
    zero_modes: usize,
}

impl SpectralDecomposition {
    pub fn compute(space: Arc<DirichletSpace>) -> Result<Self> {
        Self::compute_with_cap(space, DEFAULT_DENSE_CAP)
    }

    /// Jacobi eigensolve of the symmetrized generator
    /// `S = D^{1/2}(-L)D^{-1/2}`, `D = diag μ`, whose entries are
    /// `S_xx = deg(x)/μ(x)` and `S_xy = -w_xy/√(μ(x)μ(y))`.
    pub fn compute_with_cap(space: Arc<DirichletSpace>, cap: usize) -> Result<Self> {
        let n = space.len();
        if n > cap {
            return Err(Error::TooLarge { n, cap });
        }
        let mu = space.measure();
        let mut s = vec![0.0; n * n];
        for x in 0..n {
            s[x * n + x] = space.degree(x) / mu[x];
            for &(y, w) in space.neighbors(x) {
                s[x * n + y] = -w / (mu[x] * mu[y]).sqrt();
            }
        }
        let eig = jacobi_eigen(s, n)?;
        let mut vectors = eig.vectors;
        for k in 0..n {
            let v = &mut vectors[k * n..(k + 1) * n];
            for (x, e) in v.iter_mut().enumerate() {
                *e /= mu[x].sqrt();
            }
        }
        Ok(Self::finish(space, eig.values, vectors))
    }

    /// Decomposition of a Cartesian product `a × b` (built with
    /// [`DirichletSpace::cartesian_product`]) from decompositions of its
    /// factors: eigenpairs are `(λ_i + λ'_j, φ_i ⊗ φ'_j)`.
    ///
    /// This avoids a dense eigensolve on the product, whose size is the
    /// product of the factor sizes.
    pub fn tensor(product: Arc<DirichletSpace>, a: &Self, b: &Self) -> Result<Self> {
        let (na, nb) = (a.len(), b.len());
        check_len(na * nb, product.len())?;
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(na * nb);
        for i in 0..na {
            for j in 0..nb {
                pairs.push((a.values[i] + b.values[j], i, j));
            }
        }
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
        let n = na * nb;
        let mut values = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n * n);
        for &(lambda, i, j) in &pairs {
            values.push(lambda);
            let (u, v) = (a.vector(i), b.vector(j));
            for &ux in u {
                vectors.extend(v.iter().map(|vy| ux * vy));
            }
        }
        Ok(Self::finish(product, values, vectors))
    }

    fn finish(space: Arc<DirichletSpace>, mut values: Vec<f64>, mut vectors: Vec<f64>) -> Self {
        let n = space.len();
        let top = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let zero_tol = ZERO_EIGENVALUE_TOLERANCE * top.max(f64::MIN_POSITIVE);
        let mut zero_modes = 0;
        for v in &mut values {
            if v.abs() <= zero_tol {
                *v = 0.0;
                zero_modes += 1;
            }
        }
        // The kernel of L is known exactly: locally constant functions. Pin
        // the zero modes to normalized component indicators and remove their
        // rounding-level shadows from the other modes, so that P_t 1 = 1 to
        // machine precision even for strongly varying measures.
        let labels = space.component_labels();
        let components = labels.iter().max().map_or(0, |m| m + 1);
        if zero_modes == components {
            let mu = space.measure();
            let mut mass = vec![0.0; components];
            for (x, &c) in labels.iter().enumerate() {
                mass[c] += mu[x];
            }
            for c in 0..components {
                let v = &mut vectors[c * n..(c + 1) * n];
                for (x, e) in v.iter_mut().enumerate() {
                    *e = if labels[x] == c { mass[c].sqrt().recip() } else { 0.0 };
                }
            }
            for k in components..n {
                let mut along = vec![0.0; components];
                for x in 0..n {
                    along[labels[x]] += vectors[k * n + x] * mu[x];
                }
                for x in 0..n {
                    let c = labels[x];
                    vectors[k * n + x] -= along[c] / mass[c];
                }
            }
        }
        for k in 0..n {
            let v = &mut vectors[k * n..(k + 1) * n];
            let scale = v.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
            if let Some(first) = v.iter().find(|e| e.abs() > 1e-8 * scale) {
                if *first < 0.0 {
                    v.iter_mut().for_each(|e| *e = -*e);
                }
            }
        }
        Self {
            space,
            values,
            vectors,
            zero_modes,
        }
    }

    pub fn space(&self) -> &Arc<DirichletSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        let n = self.len();
        &self.vectors[k * n..(k + 1) * n]
    }

    /// Number of zero eigenvalues, i.e. of connected components.
    pub fn zero_modes(&self) -> usize {
        self.zero_modes
    }

    pub fn lambda_max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Smallest positive eigenvalue (the spectral gap), if any.
    pub fn spectral_gap(&self) -> Option<f64> {
        self.values.get(self.zero_modes).copied()
    }

    /// Coefficients `⟨f, φ_i⟩_μ`.
    pub fn project(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len(self.len(), f.len())?;
        let mu = self.space.measure();
        let weighted: Vec<f64> = f.iter().zip(mu).map(|(a, m)| a * m).collect();
        Ok((0..self.len())
            .map(|k| self.vector(k).iter().zip(&weighted).map(|(p, g)| p * g).sum())
            .collect())
    }

    /// `Σ_i c_i φ_i`.
    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        check_len(n, coeffs.len())?;
        let mut out = vec![0.0; n];
        for (k, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                for (o, p) in out.iter_mut().zip(self.vector(k)) {
                    *o += c * p;
                }
            }
        }
        Ok(out)
    }

    /// `g(-L) f = Σ_i g(λ_i) ⟨f, φ_i⟩_μ φ_i`.
    pub fn apply_function<G: Fn(f64) -> f64>(&self, g: G, f: &[f64]) -> Result<Vec<f64>> {
        let mut c = self.project(f)?;
        for (ci, &l) in c.iter_mut().zip(&self.values) {
            *ci *= g(l);
        }
        self.synthesize(&c)
    }

    /// Dense matrix of `g(-L)` as an integral operator against `μ`:
    /// `k(x, y) = Σ_i g(λ_i) φ_i(x) φ_i(y)`, so `g(-L)f(x) = Σ_y k(x,y) f(y) μ(y)`.
    pub fn kernel_matrix<G: Fn(f64) -> f64>(&self, g: G) -> DMatrix<f64> {
        let n = self.len();
        let phi = DMatrix::from_column_slice(n, n, &self.vectors);
        let mut scaled = phi.clone();
        for k in 0..n {
            let gk = g(self.values[k]);
            scaled.column_mut(k).scale_mut(gk);
        }
        &scaled * phi.transpose()
    }

    /// Heat semigroup `P_t f`.
    pub fn heat_apply(&self, t: f64, f: &[f64]) -> Result<Vec<f64>> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeTime(t));
        }
        if t == 0.0 {
            check_len(self.len(), f.len())?;
            return Ok(f.to_vec());
        }
        self.apply_function(|l| (-t * l).exp(), f)
    }

    /// Heat kernel `p_t(x, y)` with respect to `μ`.
    pub fn heat_kernel(&self, t: f64) -> Result<DMatrix<f64>> {
        if !(t > 0.0) {
            return Err(Error::NonPositiveTime(t));
        }
        Ok(self.kernel_matrix(|l| (-t * l).exp()))
    }

    /// Projection of `f` onto the null space of `L` (locally constant
    /// functions), i.e. `P_∞ f`.
    pub fn zero_projection(&self, f: &[f64]) -> Result<Vec<f64>> {
        let zero = self.zero_modes;
        let mut c = self.project(f)?;
        c.iter_mut().skip(zero).for_each(|v| *v = 0.0);
        self.synthesize(&c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn decomp(space: DirichletSpace) -> SpectralDecomposition {
        SpectralDecomposition::compute(Arc::new(space)).unwrap()
    }

    #[test]
    fn cycle_matches_circulant_spectrum() {
        let d = decomp(DirichletSpace::ring(10).unwrap());
        let mut expect: Vec<f64> = (0..10)
            .map(|k| 2.0 - 2.0 * (2.0 * PI * k as f64 / 10.0).cos())
            .collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in d.eigenvalues().iter().zip(&expect) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        assert_eq!(d.zero_modes(), 1);
    }

    #[test]
    fn two_point_kernel_closed_form() {
        let s = DirichletSpace::path(2).unwrap();
        let d = decomp(s);
        assert_eq!(d.eigenvalues(), &[0.0, 2.0]);
        let p = d.heat_kernel(1.0).unwrap();
        let expect = (1.0 - (-2.0_f64).exp()) / 2.0;
        assert!((p[(0, 1)] - expect).abs() < 1e-14);
        let v = d.vector(1);
        assert!((v[0] - 1.0 / 2f64.sqrt()).abs() < 1e-14 && (v[1] + 1.0 / 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn eigenpairs_are_mu_orthonormal_with_small_residual() {
        let space = DirichletSpace::from_parts(
            (0..6).map(|i| i.to_string()).collect(),
            vec![0.5, 1.0, 2.0, 1.5, 0.7, 3.0],
            &[
                (0, 1, 1.0),
                (1, 2, 0.3),
                (2, 3, 2.0),
                (3, 4, 0.9),
                (4, 5, 1.1),
                (5, 0, 0.2),
                (1, 4, 0.5),
            ],
            None,
        )
        .unwrap();
        let d = decomp(space.clone());
        for i in 0..6 {
            let lv = space.apply_generator(d.vector(i)).unwrap();
            for x in 0..6 {
                assert!((lv[x] + d.eigenvalues()[i] * d.vector(i)[x]).abs() < 1e-10);
            }
            for j in 0..6 {
                let ip = space.inner(d.vector(i), d.vector(j));
                assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn disconnected_has_repeated_zero() {
        let s = DirichletSpace::from_parts(
            (0..4).map(|i| i.to_string()).collect(),
            vec![1.0; 4],
            &[(0, 1, 1.0), (2, 3, 1.0)],
            None,
        )
        .unwrap();
        let d = decomp(s);
        assert_eq!(d.zero_modes(), 2);
        assert_eq!(&d.eigenvalues()[..2], &[0.0, 0.0]);
    }

    #[test]
    fn tensor_matches_direct() {
        let a = Arc::new(DirichletSpace::path(4).unwrap());
        let b = Arc::new(DirichletSpace::ring(5).unwrap());
        let p = Arc::new(DirichletSpace::cartesian_product(&a, &b, None).unwrap());
        let da = SpectralDecomposition::compute(a).unwrap();
        let db = SpectralDecomposition::compute(b).unwrap();
        let t = SpectralDecomposition::tensor(p.clone(), &da, &db).unwrap();
        let direct = SpectralDecomposition::compute(p).unwrap();
        for (x, y) in t.eigenvalues().iter().zip(direct.eigenvalues()) {
            assert!((x - y).abs() < 1e-10);
        }
        let ka = t.heat_kernel(0.4).unwrap();
        let kb = direct.heat_kernel(0.4).unwrap();
        assert!((ka - kb).amax() < 1e-12);
    }

    #[test]
    fn time_validation() {
        let d = decomp(DirichletSpace::ring(4).unwrap());
        assert!(matches!(d.heat_apply(-1.0, &[0.0; 4]), Err(Error::NegativeTime(_))));
        assert!(matches!(d.heat_kernel(0.0), Err(Error::NonPositiveTime(_))));
    }
}
