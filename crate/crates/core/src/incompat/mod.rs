//! Quantitative incompatibility: common lower bounds, binary joint
//! measurability, noise models, the qubit criterion and noise thresholds.

mod dykstra;
mod qubit;
mod region;

pub use dykstra::{
    dykstra_feasible, feasible_with_fallback, infeasibility_certificate, DykstraOptions,
    FeasibilityResult, FeasibilityStatus, SpectrahedralConstraint, CERTIFICATE_TOL,
};
pub use qubit::{
    pauli, qubit_compat, qubit_effect, qubit_params, QubitCompatibility, QubitEffectParams,
};
pub use region::{
    delta_joint, jm_threshold, region_sample, Oracle, OracleStats, RegionCell, RegionMap,
    ThresholdOptions, ThresholdReport,
};

use serde::{Deserialize, Serialize};

use crate::effects::{restricted_inverse, support_basis, Effect};
use crate::error::{Error, Result};
use crate::numerics::{
    eig_hermitian, subspace_intersection, CMatrix, HermitianMatrix, TolerancePolicy,
};
use crate::observables::{BinaryObservable, ProductObservable};

/// Options for [`max_joint_lower_bound`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundOptions {
    /// Bisection stops once the bracket is narrower than `tol * max(1, lower)`.
    pub tol: f64,
    /// Oracle calls allowed for the bisection.
    pub max_evaluations: usize,
    pub dykstra: DykstraOptions,
}

impl Default for LowerBoundOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_evaluations: 40,
            dykstra: DykstraOptions::default(),
        }
    }
}

/// `max{tr A : 0 ⪯ A ⪯ E, A ⪯ F}` bracketed by certified values.
#[derive(Clone, Debug)]
pub struct JointLowerBound {
    /// Trace of `witness`, a common lower bound certified by rescaling the
    /// oracle's iterate until both orders hold exactly.
    pub value: f64,
    /// Smallest trace shown to be unattainable (or the certified cap).
    pub upper: f64,
    /// Trace of the parallel sum `E : F`, a common lower bound in closed form.
    pub parallel_sum_trace: f64,
    /// Dimension of the support intersection.
    pub overlap_dim: usize,
    pub evaluations: usize,
    /// The bisection stopped at an inconclusive oracle call.
    pub inconclusive: bool,
    /// A common lower bound with trace `value`.
    pub witness: HermitianMatrix,
}

fn inverse_pd(m: &HermitianMatrix) -> HermitianMatrix {
    eig_hermitian(m).map(|x| if x > 0.0 { 1.0 / x } else { 0.0 })
}

/// Every common lower bound of `E` and `F` lives on `S = supp E ∩ supp F`.
/// With `W` an orthonormal basis of `S`, `W B W* ⪯ E` iff `B ⪯ (W* E⁺ W)⁻¹`,
/// so the problem is solved on `S`. The parallel sum `(Ẽ⁻¹ + F̃⁻¹)⁻¹` is a
/// feasible point and half of any feasible point lies below it, which
/// brackets the optimum within a factor of two before bisection.
pub fn max_joint_lower_bound(
    e: &Effect,
    f: &Effect,
    pol: &TolerancePolicy,
    opts: &LowerBoundOptions,
) -> Result<JointLowerBound> {
    if e.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: f.dim(),
        });
    }
    if !(opts.tol > 0.0) {
        return Err(Error::ParameterOutOfRange("tol must be positive".into()));
    }
    let n = e.dim();
    let w = subspace_intersection(&support_basis(e, pol), &support_basis(f, pol), pol)?;
    let k = w.ncols();
    if k == 0 {
        return Ok(JointLowerBound {
            value: 0.0,
            upper: 0.0,
            parallel_sum_trace: 0.0,
            overlap_dim: 0,
            evaluations: 0,
            inconclusive: false,
            witness: HermitianMatrix::zeros(n),
        });
    }
    let ei = restricted_inverse(e, pol)?.congruence(&w);
    let fi = restricted_inverse(f, pol)?.congruence(&w);
    let e_red = inverse_pd(&ei);
    let f_red = inverse_pd(&fi);
    let par = inverse_pd(&(&ei + &fi));
    let lift = |b: &HermitianMatrix| b.conjugate_by(&w);

    let e_root = eig_hermitian(&ei).map(|x| x.max(0.0).sqrt());
    let f_root = eig_hermitian(&fi).map(|x| x.max(0.0).sqrt());
    // Rescales an approximate solution into an exact common lower bound.
    let certify = |b: &HermitianMatrix| -> HermitianMatrix {
        let pos = eig_hermitian(b).map(|x| x.max(0.0));
        let excess = [&e_root, &f_root]
            .iter()
            .map(|r| eig_hermitian(&pos.congruence(r.matrix())).max())
            .fold(1.0, f64::max);
        pos.scale(1.0 / excess)
    };

    // If one reduced effect lies below the other it is the optimum.
    for (low, high) in [(&e_red, &f_red), (&f_red, &e_red)] {
        if eig_hermitian(&(high - low)).min() >= 0.0 {
            let best = certify(low);
            return Ok(JointLowerBound {
                value: best.trace(),
                upper: low.trace(),
                parallel_sum_trace: par.trace(),
                overlap_dim: k,
                evaluations: 0,
                inconclusive: false,
                witness: lift(&best),
            });
        }
    }
    let mut lo = par.trace();
    let mut hi = (2.0 * lo).min(e_red.trace()).min(f_red.trace()).max(lo);
    let mut best = par.clone();
    let mut evaluations = 0;
    let mut inconclusive = false;
    let zero = HermitianMatrix::zeros(k);
    while hi - lo > opts.tol * lo.max(1.0) && evaluations < opts.max_evaluations {
        let mid = 0.5 * (lo + hi);
        let constraints = [
            SpectrahedralConstraint::LowerBound(zero.clone()),
            SpectrahedralConstraint::UpperBound(e_red.clone()),
            SpectrahedralConstraint::UpperBound(f_red.clone()),
            SpectrahedralConstraint::TraceFloor(mid),
        ];
        let r = feasible_with_fallback(&constraints, k, Some(&best), &opts.dykstra)?;
        evaluations += 1;
        let candidate = certify(&r.iterate);
        if candidate.trace() > lo {
            lo = candidate.trace();
            best = candidate;
        }
        match r.status {
            FeasibilityStatus::Feasible => {}
            FeasibilityStatus::Infeasible => hi = mid,
            FeasibilityStatus::Inconclusive => {
                inconclusive = true;
                break;
            }
        }
        hi = hi.max(lo);
    }
    Ok(JointLowerBound {
        value: lo,
        upper: hi,
        parallel_sum_trace: par.trace(),
        overlap_dim: k,
        evaluations,
        inconclusive,
        witness: lift(&best),
    })
}

/// Parallel sum `E : F = (E⁺ + F⁺)⁺` restricted to the support intersection.
pub fn parallel_sum(e: &Effect, f: &Effect, pol: &TolerancePolicy) -> Result<HermitianMatrix> {
    let w: CMatrix = subspace_intersection(&support_basis(e, pol), &support_basis(f, pol), pol)?;
    if w.ncols() == 0 {
        return Ok(HermitianMatrix::zeros(e.dim()));
    }
    let ei = restricted_inverse(e, pol)?.congruence(&w);
    let fi = restricted_inverse(f, pol)?.congruence(&w);
    Ok(inverse_pd(&(&ei + &fi)).conjugate_by(&w))
}

/// Outcome of the binary joint-measurability oracle.
#[derive(Clone, Debug)]
pub struct JointMeasurability {
    pub status: FeasibilityStatus,
    /// The four-outcome joint observable rebuilt from `G₁₁`, when feasible.
    pub joint: Option<ProductObservable>,
    pub residual: f64,
    pub iterations: usize,
}

impl JointMeasurability {
    /// The verdict, or [`Error::Inconclusive`].
    pub fn decided(&self) -> Result<bool> {
        match self.status {
            FeasibilityStatus::Feasible => Ok(true),
            FeasibilityStatus::Infeasible => Ok(false),
            FeasibilityStatus::Inconclusive => Err(Error::Inconclusive(format!(
                "residual {:.3e} after {} cycles",
                self.residual, self.iterations
            ))),
        }
    }
}

/// Searches `G₁₁` with `0 ⪯ G₁₁`, `G₁₁ ⪯ Q1(1)`, `G₁₁ ⪯ Q2(1)` and
/// `Q1(1) + Q2(1) - I ⪯ G₁₁`, starting from the symmetrised product, with
/// [`feasible_with_fallback`].
pub fn binary_jointly_measurable(
    q1: &BinaryObservable,
    q2: &BinaryObservable,
    pol: &TolerancePolicy,
    opts: &DykstraOptions,
) -> Result<JointMeasurability> {
    let n = q1.dim();
    if q2.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: q2.dim(),
        });
    }
    let a = q1.yes().matrix();
    let b = q2.yes().matrix();
    let floor = &(a + b) - &HermitianMatrix::identity(n);
    let constraints = [
        SpectrahedralConstraint::LowerBound(HermitianMatrix::zeros(n)),
        SpectrahedralConstraint::UpperBound(a.clone()),
        SpectrahedralConstraint::UpperBound(b.clone()),
        SpectrahedralConstraint::LowerBound(floor),
    ];
    let start = HermitianMatrix::hermitian_part(&(a.matrix() * b.matrix()));
    let r = feasible_with_fallback(&constraints, n, Some(&start), opts)?;
    let joint = if r.feasible() {
        Some(joint_from_corner(q1, q2, &r.iterate, pol)?)
    } else {
        None
    };
    Ok(JointMeasurability {
        status: r.status,
        joint,
        residual: r.residual,
        iterations: r.iterations,
    })
}

/// The four effects `G₁₁`, `Q1(1) - G₁₁`, `Q2(1) - G₁₁`, `I - Q1(1) - Q2(1) + G₁₁`,
/// indexed `[q1][q2]` with outcome `1` first.
pub fn joint_from_corner(
    q1: &BinaryObservable,
    q2: &BinaryObservable,
    g11: &HermitianMatrix,
    pol: &TolerancePolicy,
) -> Result<ProductObservable> {
    let a = q1.yes().matrix();
    let b = q2.yes().matrix();
    let id = HermitianMatrix::identity(q1.dim());
    let g10 = a - g11;
    let g01 = b - g11;
    let g00 = &(&(&id - a) - b) + g11;
    let cells = vec![
        vec![Effect::new(g11.clone(), pol)?, Effect::new(g10, pol)?],
        vec![Effect::new(g01, pol)?, Effect::new(g00, pol)?],
    ];
    ProductObservable::new(
        vec!["1".into(), "0".into()],
        vec!["1".into(), "0".into()],
        cells,
    )
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange(format!(
            "{name} = {v} must lie in (0, 1)"
        )))
    }
}

/// `(1 - λ) E + λ p I`; its spectrum lies in `[λ min(p, 1-p), 1 - λ min(p, 1-p)]`.
pub fn noise_add(e: &Effect, lambda: f64, p: f64) -> Result<Effect> {
    open_unit("lambda", lambda)?;
    open_unit("p", p)?;
    let m = &(e.matrix() * (1.0 - lambda)) + &HermitianMatrix::scalar(e.dim(), lambda * p);
    Effect::from_matrix(m)
}

/// `p (I - E) + (1 - p) E`.
pub fn noise_flip(e: &Effect, p: f64) -> Result<Effect> {
    open_unit("p", p)?;
    let m = &(e.matrix() * (1.0 - 2.0 * p)) + &HermitianMatrix::scalar(e.dim(), p);
    Effect::from_matrix(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::{below, effects_disjoint, support_projection};
    use crate::numerics::{eig_hermitian, real_vector};
    use crate::observables::{coarse_grain, qubit_sharp_x, qubit_sharp_z};

    fn pol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn lower_bound_examples() {
        let opts = LowerBoundOptions::default();
        let id = Effect::identity(3);
        let r = max_joint_lower_bound(&id, &id, &pol(), &opts).unwrap();
        assert!(
            r.value <= 3.0 + 1e-12 && r.value >= 3.0 * (1.0 - 2.0 * opts.tol),
            "{}",
            r.value
        );

        let up = Effect::from_diagonal(&[1.0, 0.0]).unwrap();
        let down = Effect::from_diagonal(&[0.0, 1.0]).unwrap();
        let r = max_joint_lower_bound(&up, &down, &pol(), &opts).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.overlap_dim, 0);

        let half = Effect::trivial(2, 0.5).unwrap();
        let r = max_joint_lower_bound(&half, &half, &pol(), &opts).unwrap();
        assert!(r.value <= 1.0 + 1e-12 && r.value >= 1.0 - 2.0 * opts.tol);
        assert!(r.upper <= 1.0 + 1e-12);

        let small = Effect::trivial(4, 0.001).unwrap();
        let big = Effect::from_diagonal(&[0.5, 0.2, 0.9, 0.001]).unwrap();
        let r = max_joint_lower_bound(&small, &big, &pol(), &opts).unwrap();
        assert_eq!(r.evaluations, 0);
        assert!((r.value - 0.004).abs() < 1e-15 && r.upper >= r.value);
        let r = max_joint_lower_bound(&small, &small, &pol(), &opts).unwrap();
        assert!((r.value - 2.0 * r.parallel_sum_trace).abs() < 1e-15);
    }

    #[test]
    fn lower_bound_witness_is_common_lower_bound() {
        let e = Effect::from_diagonal(&[0.9, 0.2, 0.5]).unwrap();
        let v = real_vector(&[0.6, 0.0, 0.8]);
        let f = Effect::from_matrix(
            &HermitianMatrix::outer(&v).scale(0.7)
                + &HermitianMatrix::from_diagonal(&[0.1, 0.3, 0.1]),
        )
        .unwrap();
        let r = max_joint_lower_bound(&e, &f, &pol(), &LowerBoundOptions::default()).unwrap();
        let w = Effect::new(r.witness.clone(), &pol()).unwrap();
        let slack = TolerancePolicy {
            psd_slack: 1e-7,
            ..pol()
        };
        assert!(below(&w, &e, &slack).unwrap());
        assert!(below(&w, &f, &slack).unwrap());
        assert!(r.value >= r.parallel_sum_trace - 1e-12);
        assert!(r.value <= 2.0 * r.parallel_sum_trace + 1e-9);
        assert!(r.upper - r.value <= 1e-3, "{} {}", r.value, r.upper);
    }

    #[test]
    fn binary_joint_measurability_examples() {
        let opts = DykstraOptions::default();
        let a = BinaryObservable::new(Effect::from_diagonal(&[0.8, 0.3]).unwrap());
        let b = BinaryObservable::new(Effect::from_diagonal(&[0.5, 0.9]).unwrap());
        let r = binary_jointly_measurable(&a, &b, &pol(), &opts).unwrap();
        assert!(r.decided().unwrap());
        let g = r.joint.unwrap();
        assert!(g.first_marginal(0).distance(a.yes().matrix()) < 1e-8);
        assert!(g.second_marginal(0).distance(b.yes().matrix()) < 1e-8);

        let z = coarse_grain(&qubit_sharp_z(), &["+1"]).unwrap();
        let x = coarse_grain(&qubit_sharp_x(), &["+1"]).unwrap();
        assert!(!binary_jointly_measurable(&z, &x, &pol(), &opts)
            .unwrap()
            .decided()
            .unwrap());

        let zs = BinaryObservable::new(qubit_effect(1.0, [0.0, 0.0, 0.5]).unwrap());
        let xs = BinaryObservable::new(qubit_effect(1.0, [0.5, 0.0, 0.0]).unwrap());
        assert!(binary_jointly_measurable(&zs, &xs, &pol(), &opts)
            .unwrap()
            .decided()
            .unwrap());
    }

    #[test]
    fn noise_examples() {
        let r = noise_add(&Effect::zero(2), 0.5, 0.5).unwrap();
        assert!(r.matrix().distance(&HermitianMatrix::scalar(2, 0.25)) < 1e-15);
        let p0 = Effect::from_diagonal(&[1.0, 0.0]).unwrap();
        let r = noise_add(&p0, 0.1, 0.5).unwrap();
        assert!(
            r.matrix()
                .distance(&HermitianMatrix::from_diagonal(&[0.95, 0.05]))
                < 1e-15
        );
        assert_eq!(support_projection(&r, &pol()).rank(), 2);
        assert!(noise_add(&p0, 0.0, 0.5).is_err());
        assert!(noise_add(&p0, 0.5, 1.0).is_err());

        let r = noise_flip(&Effect::identity(2), 0.3).unwrap();
        assert!(r.matrix().distance(&HermitianMatrix::scalar(2, 0.7)) < 1e-15);
        let r = noise_flip(&p0, 0.2).unwrap();
        let spec = eig_hermitian(r.matrix());
        assert!(
            (spec.eigenvalues[0] - 0.2).abs() < 1e-15 && (spec.eigenvalues[1] - 0.8).abs() < 1e-15
        );
        // flipping twice is the flip with p' = 2p(1-p)
        let twice = noise_flip(&noise_flip(&p0, 0.2).unwrap(), 0.2).unwrap();
        let once = noise_flip(&p0, 0.32).unwrap();
        assert!(twice.matrix().distance(once.matrix()) < 1e-15);
        assert!(noise_flip(&p0, 0.0).is_err());
    }

    #[test]
    fn noise_destroys_disjointness() {
        let up = Effect::from_diagonal(&[1.0, 0.0]).unwrap();
        let down = Effect::from_diagonal(&[0.0, 1.0]).unwrap();
        assert!(effects_disjoint(&up, &down, &pol()).unwrap().disjoint);
        let a = noise_add(&up, 0.01, 0.01).unwrap();
        let b = noise_add(&down, 0.01, 0.01).unwrap();
        assert!(!effects_disjoint(&a, &b, &pol()).unwrap().disjoint);
    }
}
