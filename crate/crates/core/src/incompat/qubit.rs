//! Closed-form joint measurability of two qubit effects.

use serde::{Deserialize, Serialize};

use crate::effects::Effect;
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, HermitianMatrix, C64};

/// Bloch parameters of `E = ½(e0 I + e·σ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitEffectParams {
    pub e0: f64,
    pub evec: [f64; 3],
}

impl QubitEffectParams {
    pub fn bloch_norm(&self) -> f64 {
        self.evec.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn complement(&self) -> Self {
        Self {
            e0: 2.0 - self.e0,
            evec: self.evec.map(|x| -x),
        }
    }

    /// `¼(e0 f0 - e·f)`.
    pub fn form(&self, other: &Self) -> f64 {
        let dot: f64 = self
            .evec
            .iter()
            .zip(other.evec.iter())
            .map(|(a, b)| a * b)
            .sum();
        0.25 * (self.e0 * other.e0 - dot)
    }

    pub fn to_effect(&self) -> Result<Effect> {
        qubit_effect(self.e0, self.evec)
    }
}

/// Pauli matrices `σx, σy, σz`.
pub fn pauli() -> [CMatrix; 3] {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    ]
}

/// `½(e0 I + e·σ)`, rejected unless it is an effect.
pub fn qubit_effect(e0: f64, evec: [f64; 3]) -> Result<Effect> {
    let mut m = CMatrix::identity(2, 2) * C64::new(e0, 0.0);
    for (s, &c) in pauli().iter().zip(evec.iter()) {
        m += s * C64::new(c, 0.0);
    }
    Effect::from_matrix(HermitianMatrix::new(m * C64::new(0.5, 0.0))?)
}

pub fn qubit_params(e: &Effect) -> Result<QubitEffectParams> {
    if e.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: e.dim(),
        });
    }
    let m = e.matrix().matrix();
    let evec = pauli().map(|s| (m * s).trace().re);
    Ok(QubitEffectParams {
        e0: e.trace(),
        evec,
    })
}

/// Closed-form verdict with its slack (non-negative iff compatible).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitCompatibility {
    pub compatible: bool,
    /// Right-hand side minus left-hand side of the criterion.
    pub slack: f64,
}

/// `E` and `F` are jointly measurable iff
/// `⟨E|E⊥⟩⟨F|F⊥⟩ - √(⟨E|E⟩⟨F|F⟩⟨E⊥|E⊥⟩⟨F⊥|F⊥⟩) ≤ ⟨E|F⊥⟩⟨E⊥|F⟩ + ⟨E|F⟩⟨E⊥|F⊥⟩`.
pub fn qubit_compat(e: &Effect, f: &Effect) -> Result<QubitCompatibility> {
    let ep = qubit_params(e)?;
    let fp = qubit_params(f)?;
    let (ec, fc) = (ep.complement(), fp.complement());
    let radicand = ep.form(&ep) * fp.form(&fp) * ec.form(&ec) * fc.form(&fc);
    let lhs = ep.form(&ec) * fp.form(&fc) - radicand.max(0.0).sqrt();
    let rhs = ep.form(&fc) * ec.form(&fp) + ep.form(&fp) * ec.form(&fc);
    let slack = rhs - lhs;
    Ok(QubitCompatibility {
        compatible: slack >= 0.0,
        slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_examples() {
        let p = qubit_params(&Effect::identity(2)).unwrap();
        assert_eq!(
            p,
            QubitEffectParams {
                e0: 2.0,
                evec: [0.0; 3]
            }
        );
        let p = qubit_params(&Effect::from_diagonal(&[1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(
            p,
            QubitEffectParams {
                e0: 1.0,
                evec: [0.0, 0.0, 1.0]
            }
        );
        let e = qubit_effect(1.0, [0.5, 0.0, 0.0]).unwrap();
        let p = qubit_params(&e).unwrap();
        assert!((p.e0 - 1.0).abs() < 1e-15 && (p.evec[0] - 0.5).abs() < 1e-15);
        assert!(qubit_params(&Effect::identity(3)).is_err());
    }

    #[test]
    fn params_reconstruct() {
        let e = qubit_effect(0.9, [0.1, -0.3, 0.4]).unwrap();
        let back = qubit_params(&e).unwrap().to_effect().unwrap();
        assert!(e.matrix().distance(back.matrix()) < 1e-12);
        assert!(qubit_effect(1.0, [0.0, 0.0, 1.5]).is_err());
    }

    #[test]
    fn sharp_pair_is_incompatible() {
        let z = qubit_effect(1.0, [0.0, 0.0, 1.0]).unwrap();
        let x = qubit_effect(1.0, [1.0, 0.0, 0.0]).unwrap();
        let r = qubit_compat(&z, &x).unwrap();
        assert!(!r.compatible);
        assert!((r.slack - (0.125 - 0.25)).abs() < 1e-15);
        assert!(qubit_compat(&z, &z).unwrap().compatible);
    }

    #[test]
    fn smeared_threshold() {
        for (lambda, expect) in [(0.5, true), (0.70, true), (0.72, false), (0.9, false)] {
            let z = qubit_effect(1.0, [0.0, 0.0, lambda]).unwrap();
            let x = qubit_effect(1.0, [lambda, 0.0, 0.0]).unwrap();
            let r = qubit_compat(&z, &x).unwrap();
            assert_eq!(r.compatible, expect, "lambda = {lambda}");
            assert!((r.slack - (0.125 - lambda * lambda / 4.0)).abs() < 1e-15);
        }
    }
}
