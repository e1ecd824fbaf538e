use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient `A(z) ≥ 0` of a string `R_zz = λ A(z) R` on `[0, ∞)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KreinString {
    Constant {
        #[serde(default = "one")]
        c: f64,
    },
    /// `A(z) = c z^β`, `β > -1`.
    PowerLaw {
        #[serde(default = "one")]
        c: f64,
        beta: f64,
    },
    /// Samples `A(z_k)` interpolated log-linearly between positive samples
    /// and linearly where a sample is zero; constant before the first and
    /// after the last sample.
    Sampled { z: Vec<f64>, a: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl KreinString {
    pub fn validate(&self) -> Result<()> {
        match self {
            KreinString::Constant { c } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(Error::InvalidInput(format!("constant string needs c > 0, got {c}")));
                }
            }
            KreinString::PowerLaw { c, beta } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(Error::InvalidInput(format!("power-law string needs c > 0, got {c}")));
                }
                if !(*beta > -1.0 && beta.is_finite()) {
                    return Err(Error::WeightNotIntegrable(format!(
                        "A(z) = c z^{beta} is not integrable at 0"
                    )));
                }
            }
            KreinString::Sampled { z, a } => {
                if z.len() != a.len() || z.is_empty() {
                    return Err(Error::InvalidInput(
                        "sampled string needs matching, nonempty z and a".into(),
                    ));
                }
                if z[0] < 0.0 || z.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidInput(
                        "sampled string grid must be increasing from z ≥ 0".into(),
                    ));
                }
                if a.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(Error::InvalidInput(
                        "sampled string values must be finite and nonnegative".into(),
                    ));
                }
                if a.iter().all(|v| *v == 0.0) {
                    return Err(Error::InvalidInput("sampled string is identically zero".into()));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self {
            KreinString::Constant { c } => *c,
            KreinString::PowerLaw { c, beta } => {
                if z <= 0.0 {
                    if *beta > 0.0 {
                        0.0
                    } else if *beta == 0.0 {
                        *c
                    } else {
                        f64::INFINITY
                    }
                } else {
                    c * z.powf(*beta)
                }
            }
            KreinString::Sampled { z: zs, a } => {
                let k = zs.partition_point(|&v| v <= z);
                if k == 0 {
                    return a[0];
                }
                if k == zs.len() {
                    return a[k - 1];
                }
                let t = (z - zs[k - 1]) / (zs[k] - zs[k - 1]);
                let (lo, hi) = (a[k - 1], a[k]);
                if lo > 0.0 && hi > 0.0 {
                    lo * (hi / lo).powf(t)
                } else {
                    lo + t * (hi - lo)
                }
            }
        }
    }

    /// `∫₀^z A`.
    pub fn cumulative(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        match self {
            KreinString::Constant { c } => c * z,
            KreinString::PowerLaw { c, beta } => c * z.powf(beta + 1.0) / (beta + 1.0),
            KreinString::Sampled { z: zs, a } => {
                let mut total = a[0] * z.min(zs[0]);
                for k in 1..zs.len() {
                    if zs[k - 1] >= z {
                        break;
                    }
                    let hi = zs[k].min(z);
                    total += segment_integral(zs[k - 1], hi, self.eval(zs[k - 1]), self.eval(hi), 1.0);
                }
                if z > zs[zs.len() - 1] {
                    total += a[a.len() - 1] * (z - zs[zs.len() - 1]);
                }
                total
            }
        }
    }

    /// Whether this is the constant string `A ≡ c`.
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            KreinString::Constant { c } => Some(*c),
            KreinString::PowerLaw { c, beta } if *beta == 0.0 => Some(*c),
            _ => None,
        }
    }

    /// Whether `A` may be unbounded near 0, which calls for the local
    /// closed-form step there.
    pub(crate) fn singular_at_origin(&self) -> bool {
        matches!(self, KreinString::PowerLaw { beta, .. } if *beta < 0.0)
    }
}

/// `∫ g^p` over `[z0, z1]` where `g` interpolates log-linearly between the
/// positive endpoint values `g0`, `g1` (linearly if one is zero).
fn segment_integral(z0: f64, z1: f64, g0: f64, g1: f64, p: f64) -> f64 {
    let dz = z1 - z0;
    if dz <= 0.0 {
        return 0.0;
    }
    if g0 > 0.0 && g1 > 0.0 {
        let (a0, a1) = (g0.powf(p), g1.powf(p));
        let r = (a1 / a0).ln();
        if r.abs() < 1e-12 {
            0.5 * dz * (a0 + a1)
        } else {
            dz * (a1 - a0) / r
        }
    } else {
        // g linear; ∫ g^p for g from g0 to g1.
        if (g1 - g0).abs() < f64::MIN_POSITIVE {
            return dz * g0.powf(p);
        }
        dz * (g1.powf(p + 1.0) - g0.powf(p + 1.0)) / ((p + 1.0) * (g1 - g0))
    }
}

/// Positive weight `w(y)` on `(0, y_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Weight {
    Constant {
        #[serde(default = "one")]
        c: f64,
    },
    /// `w(y) = c y^p`.
    Power {
        #[serde(default = "one")]
        c: f64,
        exponent: f64,
    },
    /// Samples `w(y_k)`, log-linear in between, `w ≡ w(y_0)` on `[0, y_0]`.
    Sampled { y: Vec<f64>, w: Vec<f64> },
}

impl Weight {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Weight::Constant { c } => *c,
            Weight::Power { c, exponent } => c * y.powf(*exponent),
            Weight::Sampled { y: ys, w } => KreinString::Sampled {
                z: ys.clone(),
                a: w.clone(),
            }
            .eval(y),
        }
    }
}

/// Change of variables `z = σ(y) = ∫₀^y dr / w(r)`, `A(σ(y)) = w(y)²`.
///
/// Power weights map to power-law strings in closed form:
/// `w = c y^p` gives `A(z) = c² (c(1-p) z)^{2p/(1-p)}`. Sampled weights map
/// to sampled strings; `σ` integrates `1/w` cell by cell using the
/// logarithmic mean of the endpoint weights.
pub fn string_from_weight(weight: &Weight) -> Result<KreinString> {
    match weight {
        Weight::Constant { c } => {
            if !(*c > 0.0) {
                return Err(Error::WeightNotIntegrable(format!(
                    "constant weight {c} must be positive"
                )));
            }
            Ok(KreinString::Constant { c: c * c })
        }
        Weight::Power { c, exponent: p } => {
            if !(*c > 0.0) {
                return Err(Error::WeightNotIntegrable(format!(
                    "weight coefficient {c} must be positive"
                )));
            }
            if *p >= 1.0 {
                return Err(Error::WeightNotIntegrable(format!(
                    "1/w = y^{} is not integrable at 0",
                    -p
                )));
            }
            if *p <= -1.0 {
                return Err(Error::WeightNotIntegrable(format!(
                    "w² = y^{} gives a string that is not integrable at 0",
                    2.0 * p
                )));
            }
            let beta = 2.0 * p / (1.0 - p);
            let string = KreinString::PowerLaw {
                c: c * c * (c * (1.0 - p)).powf(beta),
                beta,
            };
            Ok(string)
        }
        Weight::Sampled { y, w } => {
            if y.is_empty() || y.len() != w.len() || y[0] <= 0.0 {
                return Err(Error::InvalidInput(
                    "sampled weight needs matching samples starting at y > 0".into(),
                ));
            }
            if w.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::WeightNotIntegrable("sampled weight must be positive".into()));
            }
            if y.windows(2).any(|p| !(p[1] > p[0])) {
                return Err(Error::InvalidInput("sampled weight grid must be increasing".into()));
            }
            let mut z = Vec::with_capacity(y.len());
            let mut acc = y[0] / w[0];
            z.push(acc);
            for k in 1..y.len() {
                // Cell length in z is chosen so that the log-linear string
                // interpolant of √A carries exactly the y-length of the cell;
                // this makes weight_from_string an exact inverse on the grid.
                let (w0, w1) = (w[k - 1], w[k]);
                let log_mean = if (w1 / w0 - 1.0).abs() < 1e-12 {
                    w0
                } else {
                    (w1 - w0) / (w1 / w0).ln()
                };
                acc += (y[k] - y[k - 1]) / log_mean;
                z.push(acc);
            }
            let a = w.iter().map(|v| v * v).collect();
            Ok(KreinString::Sampled { z, a })
        }
    }
}

/// Inverse change of variables: samples `(y(z_k), w(y(z_k)))` with
/// `y(z) = ∫₀^z √A` and `w = √A(z)`.
pub fn weight_from_string(string: &KreinString, z_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    string.validate()?;
    Ok(z_grid
        .iter()
        .map(|&z| {
            let y = match string {
                KreinString::Constant { c } => c.sqrt() * z,
                KreinString::PowerLaw { c, beta } => c.sqrt() * z.powf(1.0 + beta / 2.0) / (1.0 + beta / 2.0),
                KreinString::Sampled { z: zs, a } => {
                    let mut total = a[0].sqrt() * z.min(zs[0]);
                    for k in 1..zs.len() {
                        if zs[k - 1] >= z {
                            break;
                        }
                        let hi = zs[k].min(z);
                        total += segment_integral(zs[k - 1], hi, string.eval(zs[k - 1]), string.eval(hi), 0.5);
                    }
                    if z > zs[zs.len() - 1] {
                        total += a[a.len() - 1].sqrt() * (z - zs[zs.len() - 1]);
                    }
                    total
                }
            };
            (y, string.eval(z).sqrt())
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_weight() {
        assert_eq!(
            string_from_weight(&Weight::Constant { c: 1.0 }).unwrap(),
            KreinString::Constant { c: 1.0 }
        );
        let s = string_from_weight(&Weight::Power { c: 1.0, exponent: 0.0 }).unwrap();
        assert_eq!(s, KreinString::PowerLaw { c: 1.0, beta: 0.0 });
    }

    #[test]
    fn power_round_trip() {
        let p = 0.4;
        let string = string_from_weight(&Weight::Power { c: 1.0, exponent: p }).unwrap();
        let ys: Vec<f64> = (1..50).map(|k| 0.1 * k as f64).collect();
        let zs: Vec<f64> = ys.iter().map(|y| y.powf(1.0 - p) / (1.0 - p)).collect();
        for ((y, w), y0) in weight_from_string(&string, &zs).unwrap().into_iter().zip(&ys) {
            assert!((y - y0).abs() < 1e-12 * y0.max(1.0));
            assert!((w - y0.powf(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_round_trip() {
        let ys: Vec<f64> = (1..=40).map(|k| 0.05 * k as f64).collect();
        let ws: Vec<f64> = ys.iter().map(|y| 1.0 + y * y).collect();
        let string = string_from_weight(&Weight::Sampled {
            y: ys.clone(),
            w: ws.clone(),
        })
        .unwrap();
        let KreinString::Sampled { z, .. } = &string else {
            panic!()
        };
        let back = weight_from_string(&string, z).unwrap();
        for ((y, w), (y0, w0)) in back.iter().zip(ys.iter().zip(&ws)) {
            assert!((y - y0).abs() < 1e-8, "{y} vs {y0}");
            assert!((w - w0).abs() < 1e-8);
        }
    }

    #[test]
    fn nonintegrable_weights() {
        assert!(matches!(
            string_from_weight(&Weight::Power { c: 1.0, exponent: 1.2 }),
            Err(Error::WeightNotIntegrable(_))
        ));
        assert!(matches!(
            KreinString::PowerLaw { c: 1.0, beta: -1.5 }.validate(),
            Err(Error::WeightNotIntegrable(_))
        ));
    }

    #[test]
    fn cumulative_matches_eval() {
        let s = KreinString::Sampled {
            z: vec![0.5, 1.0, 2.0, 3.0],
            a: vec![1.0, 2.0, 0.0, 4.0],
        };
        let n = 200_000;
        let top = 3.5;
        let h = top / n as f64;
        let numeric: f64 = (0..n).map(|k| s.eval((k as f64 + 0.5) * h)).sum::<f64>() * h;
        assert!((numeric - s.cumulative(top)).abs() < 1e-8);
    }
}
