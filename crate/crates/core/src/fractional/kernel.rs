use nalgebra::DMatrix;
use serde::Serialize;

use super::FracConfig;
use crate::dirichlet::SpectralDecomposition;
use crate::error::{check_len, Error, Result};
use crate::special::gamma_neg;

/// Off-diagonal jump kernel `K(x,y) = ∫₀^∞ p_t(x,y) t^{-1-s} dt`.
///
/// Stored without the `1/Γ(-s)` factor (`normalized == false`), so entries
/// are positive; [`frac_kernel_apply`] supplies the factor, giving
/// `(-L)^s f(x) = Γ(-s)⁻¹ Σ_y K(x,y)(f(y)-f(x)) μ(y)`.
#[derive(Clone, Debug, Serialize)]
pub struct JumpKernel {
    pub s: f64,
    pub normalized: bool,
    /// Set when the space has several components; entries between
    /// components are then zero and the operator acts blockwise.
    pub disconnected: bool,
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    pub measure: Vec<f64>,
}

impl JumpKernel {
    pub fn len(&self) -> usize {
        self.measure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measure.is_empty()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.matrix[(x, y)]
    }

    /// Fails with `DisconnectedSpace` when the kernel was built on a space
    /// with several components.
    pub fn require_connected(&self, components: usize) -> Result<()> {
        if self.disconnected {
            Err(Error::DisconnectedSpace { components })
        } else {
            Ok(())
        }
    }
}

/// Builds `K` mode by mode: since `Σ_i φ_i(x)φ_i(y) = 0` off the diagonal,
/// `K(x,y) = Σ_i q_i φ_i(x) φ_i(y)` with `q_i` the log-trapezoid value of
/// `∫ (e^{-tλ_i} - 1) t^{-1-s} dt`. This is the same quadrature applied to
/// `p_t(x,y)` with the sums over nodes and modes exchanged.
pub fn build_jump_kernel(decomp: &SpectralDecomposition, cfg: &FracConfig) -> Result<JumpKernel> {
    let n = decomp.len();
    let measure = decomp.space().measure().to_vec();
    let disconnected = decomp.zero_modes() > 1;
    if disconnected {
        log::warn!(
            "jump kernel on a space with {} components; the operator block-decomposes",
            decomp.zero_modes()
        );
    }
    let Some(gap) = decomp.spectral_gap() else {
        return Ok(JumpKernel {
            s: cfg.s,
            normalized: false,
            disconnected,
            matrix: DMatrix::zeros(n, n),
            measure,
        });
    };
    let rule = cfg.rule(gap, decomp.lambda_max());
    let mut k = decomp.kernel_matrix(|l| rule.mode_integral(l));
    for x in 0..n {
        k[(x, x)] = 0.0;
        for y in x + 1..n {
            let v = 0.5 * (k[(x, y)] + k[(y, x)]);
            k[(x, y)] = v;
            k[(y, x)] = v;
        }
    }
    Ok(JumpKernel {
        s: cfg.s,
        normalized: false,
        disconnected,
        matrix: k,
        measure,
    })
}

/// `Γ(-s)⁻¹ Σ_y K(x,y)(f(y) - f(x)) μ(y)`.
pub fn frac_kernel_apply(kernel: &JumpKernel, f: &[f64]) -> Result<Vec<f64>> {
    let n = kernel.len();
    check_len(n, f.len())?;
    let factor = if kernel.normalized {
        1.0
    } else {
        1.0 / gamma_neg(kernel.s)
    };
    Ok((0..n)
        .map(|x| {
            let fx = f[x];
            let sum: f64 = (0..n)
                .map(|y| kernel.matrix[(x, y)] * (f[y] - fx) * kernel.measure[y])
                .sum();
            factor * sum
        })
        .collect())
}
