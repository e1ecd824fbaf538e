use serde::{Deserialize, Serialize};

use super::KreinString;
use crate::error::{Error, Result};

/// `√(λ A(Z)) Z` required at the truncation point.
pub const TRUNCATION_DECAY: f64 = 20.0;
/// Largest relative change of `ψ` tolerated when the truncation is doubled.
pub const TRUNCATION_SENSITIVITY: f64 = 1e-6;

const RTOL: f64 = 1e-12;
const ATOL: f64 = 1e-14;
/// For strings singular at 0 the integration stops at `Z · ORIGIN_CUTOFF` and
/// the remaining piece uses the local closed form.
const ORIGIN_CUTOFF: f64 = 1e-10;
const MAX_STEPS: usize = 1_000_000;

/// `R(z, λ)` on a z-grid together with `ψ(λ) = -R_z(0, λ)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StringSolution {
    pub lambda: f64,
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    pub psi: f64,
    /// Truncation length actually used.
    pub z_max: f64,
    /// Relative change of `ψ` when integrating from half the truncation.
    pub truncation_shift: f64,
}

impl StringSolution {
    pub fn derivative_at_zero(&self) -> f64 {
        -self.psi
    }
}

/// Where the string is truncated for spectral parameter `lambda`, and the
/// terminal value of `W = -R_z/R` there.
fn truncation(string: &KreinString, lambda: f64) -> Result<(f64, f64)> {
    if let KreinString::Sampled { z, a } = string {
        // A string that ends in a zero tail is finite: R is constant beyond
        // its last mass point, so W vanishes there exactly.
        if *a.last().expect("validated") == 0.0 {
            return Ok((*z.last().expect("validated"), 0.0));
        }
    }
    let mut top = 1e-3;
    for _ in 0..400 {
        let a = string.eval(top);
        if (lambda * a).sqrt() * top >= TRUNCATION_DECAY {
            return Ok((top, (lambda * a).sqrt()));
        }
        top *= 2.0;
    }
    Err(Error::TruncationTooShort { shift: f64::INFINITY })
}

/// State `(W, I)` with `I(z) = ∫_z^Z W`, stepped toward decreasing `z`.
struct Integrator<'a> {
    string: &'a KreinString,
    lambda: f64,
    step: f64,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

impl Integrator<'_> {
    /// Derivative in `τ = -z`: `dW/dτ = λA - W²`, `dI/dτ = W`.
    fn rhs(&self, z: f64, w: f64) -> [f64; 2] {
        [self.lambda * self.string.eval(z) - w * w, w]
    }

    /// Advance from `z0` down to `z1 < z0`.
    fn advance(&mut self, z0: f64, z1: f64, mut y: [f64; 2]) -> Result<[f64; 2]> {
        let mut z = z0;
        let mut steps = 0;
        while z > z1 {
            steps += 1;
            let h = self.step.min(z - z1);
            if steps > MAX_STEPS || !(h > 1e-15 * z.abs().max(1e-300)) || !y[0].is_finite() {
                return Err(Error::RiccatiBlowup { lambda: self.lambda, z });
            }
            let mut k = [[0.0; 2]; 7];
            for stage in 0..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(stage) {
                    ys[0] += h * A[stage][j] * kj[0];
                    ys[1] += h * A[stage][j] * kj[1];
                }
                k[stage] = self.rhs(z - C[stage] * h, ys[0]);
            }
            let mut hi = y;
            let mut lo = y;
            for s in 0..7 {
                for c in 0..2 {
                    hi[c] += h * B5[s] * k[s][c];
                    lo[c] += h * B4[s] * k[s][c];
                }
            }
            let err = (0..2)
                .map(|c| (hi[c] - lo[c]).abs() / (ATOL + RTOL * hi[c].abs().max(y[c].abs())))
                .fold(0.0_f64, f64::max);
            if err.is_finite() && err <= 1.0 {
                z -= h;
                if z - z1 < 1e-14 * z0.abs() {
                    z = z1;
                }
                y = hi;
                self.step = h * (0.9 * err.max(1e-10).powf(-0.2)).min(5.0);
            } else {
                let factor = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).max(0.1)
                } else {
                    0.1
                };
                self.step = h * factor;
            }
        }
        Ok(y)
    }
}

/// Integrates from `top` to 0, recording `(W, I)` at the requested points
/// (any order); returns `(W(0), I(0), samples)`.
fn sweep(string: &KreinString, lambda: f64, top: f64, w_top: f64, points: &[f64]) -> Result<(f64, f64, Vec<[f64; 2]>)> {
    let mut stops: Vec<f64> = points.iter().copied().filter(|z| *z > 0.0 && *z < top).collect();
    if let KreinString::Sampled { z, .. } = string {
        stops.extend(z.iter().copied().filter(|v| *v > 0.0 && *v < top));
    }
    let floor = if string.singular_at_origin() {
        top * ORIGIN_CUTOFF
    } else {
        0.0
    };
    stops.push(floor);
    stops.sort_by(|a, b| b.total_cmp(a));
    stops.dedup();

    let mut integrator = Integrator {
        string,
        lambda,
        step: 0.1 / (w_top + 1.0 / top),
    };
    let mut visited = vec![(top, [w_top, 0.0])];
    let mut y = [w_top, 0.0];
    let mut z = top;
    for &next in &stops {
        if next >= z {
            continue;
        }
        y = integrator.advance(z, next, y)?;
        z = next;
        visited.push((z, y));
    }
    // Local closed form on [0, floor]: W(0) = W(ε) - ∫₀^ε (W² - λA), with W²
    // frozen at its value at ε.
    let (w0, i0) = if floor > 0.0 {
        let w0 = y[0] - y[0] * y[0] * floor + lambda * string.cumulative(floor);
        (w0, y[1] + 0.5 * (y[0] + w0) * floor)
    } else {
        (y[0], y[1])
    };
    visited.push((0.0, [w0, i0]));

    let lookup = |p: f64| -> [f64; 2] {
        if p >= top {
            // Beyond the truncation W is frozen at its terminal value.
            return [w_top, -(p - top) * w_top];
        }
        if let Some((_, v)) = visited.iter().find(|(zv, _)| *zv == p) {
            return *v;
        }
        // Only points below the cutoff remain: interpolate linearly to 0.
        let (zf, yf) = visited[visited.len() - 2];
        let t = p / zf;
        [w0 + t * (yf[0] - w0), i0 + t * (yf[1] - i0)]
    };
    Ok((w0, i0, points.iter().map(|&p| lookup(p.max(0.0))).collect()))
}

/// Solves `R_zz = λ A R`, `R(0) = 1`, `R` bounded and non-increasing, by
/// integrating the Riccati equation `W' = W² - λA` for `W = -R_z/R` backward
/// from a truncation point where `W` is set to its frozen-coefficient value
/// `√(λ A)`. Backward integration is stable: it is attracted to the
/// decaying branch. `R(z) = exp(-∫₀^z W)`, `ψ(λ) = W(0)`.
///
/// The truncation is chosen so that `√(λ A(Z)) Z ≥ 20`; the solve is
/// repeated from `Z/2` and a relative change of `ψ` above `1e-6` is
/// reported as [`Error::TruncationTooShort`].
pub fn solve_string(string: &KreinString, lambda: f64, z_grid: &[f64]) -> Result<StringSolution> {
    string.validate()?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )));
    }
    if lambda == 0.0 {
        return Ok(StringSolution {
            lambda,
            z: z_grid.to_vec(),
            r: vec![1.0; z_grid.len()],
            psi: 0.0,
            z_max: 0.0,
            truncation_shift: 0.0,
        });
    }
    let (half, _) = truncation(string, lambda)?;
    let finite = matches!(string, KreinString::Sampled { a, .. } if *a.last().expect("validated") == 0.0);
    let top = if finite { half } else { 2.0 * half };
    let w_top = if finite {
        0.0
    } else {
        (lambda * string.eval(top)).sqrt()
    };
    let (psi, i0, samples) = sweep(string, lambda, top, w_top, z_grid)?;

    let shift = if finite {
        0.0
    } else {
        let (psi_half, _, _) = sweep(string, lambda, half, (lambda * string.eval(half)).sqrt(), &[])?;
        (psi - psi_half).abs() / psi.abs().max(f64::MIN_POSITIVE)
    };
    if shift > TRUNCATION_SENSITIVITY {
        return Err(Error::TruncationTooShort { shift });
    }
    let r = samples.iter().map(|[_, i]| (-(i0 - i)).exp().min(1.0)).collect();
    Ok(StringSolution {
        lambda,
        z: z_grid.to_vec(),
        r,
        psi,
        z_max: top,
        truncation_shift: shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_lambda() {
        let s = solve_string(&KreinString::Constant { c: 1.0 }, 0.0, &[0.0, 1.0]).unwrap();
        assert_eq!(s.psi, 0.0);
        assert_eq!(s.r, vec![1.0, 1.0]);
    }

    #[test]
    fn constant_string_closed_form() {
        for &c in &[1.0, 2.5] {
            let zs = [0.0, 0.1, 0.5, 1.0, 3.0];
            let sol = solve_string(&KreinString::Constant { c }, 4.0, &zs).unwrap();
            let root = (4.0 * c).sqrt();
            assert!((sol.psi - root).abs() < 1e-8);
            for (z, r) in zs.iter().zip(&sol.r) {
                assert!((r - (-z * root).exp()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn linear_string_matches_airy_ratio() {
        // A(z) = z: R = Ai(λ^{1/3} z)/Ai(0), ψ = -λ^{1/3} Ai'(0)/Ai(0).
        let ai0 = 0.355_028_053_887_817_2;
        let aip0 = -0.258_819_403_792_806_8;
        let s = KreinString::PowerLaw { c: 1.0, beta: 1.0 };
        for &l in &[0.1_f64, 1.0, 8.0] {
            let psi = solve_string(&s, l, &[]).unwrap().psi;
            let exact = -l.cbrt() * aip0 / ai0;
            assert!((psi / exact - 1.0).abs() < 1e-9, "{psi} vs {exact}");
        }
    }

    #[test]
    fn finite_string_is_exact_at_its_end() {
        // A = 1 on [0, 1], 0 after: R = cosh-type with R'(1) = 0, ψ = √λ tanh √λ.
        let s = KreinString::Sampled {
            z: vec![1.0, 1.0 + 1e-9],
            a: vec![1.0, 0.0],
        };
        let psi = solve_string(&s, 2.0, &[]).unwrap().psi;
        let r = 2f64.sqrt();
        assert!((psi - r * r.tanh()).abs() < 1e-7, "{psi}");
    }
}
