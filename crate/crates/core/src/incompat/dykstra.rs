//! Cyclic Dykstra projections onto intersections of matrix intervals and
//! trace half-spaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{eig_hermitian, min_eigenvalue, HermitianMatrix};

/// One convex constraint on a Hermitian unknown `A`.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectrahedralConstraint {
    /// `L ⪯ A`
    LowerBound(HermitianMatrix),
    /// `A ⪯ U`
    UpperBound(HermitianMatrix),
    /// `tr A >= t`
    TraceFloor(f64),
}

impl SpectrahedralConstraint {
    fn dim(&self) -> Option<usize> {
        match self {
            Self::LowerBound(m) | Self::UpperBound(m) => Some(m.dim()),
            Self::TraceFloor(_) => None,
        }
    }

    /// Frobenius-nearest point of the constraint set.
    pub fn project(&self, a: &HermitianMatrix) -> HermitianMatrix {
        match self {
            Self::LowerBound(l) => {
                let gap = eig_hermitian(&(a - l)).map(|x| x.max(0.0));
                l + &gap
            }
            Self::UpperBound(u) => {
                let gap = eig_hermitian(&(u - a)).map(|x| x.max(0.0));
                u - &gap
            }
            Self::TraceFloor(t) => {
                let n = a.dim();
                let deficit = t - a.trace();
                if deficit > 0.0 && n > 0 {
                    a + &HermitianMatrix::scalar(n, deficit / n as f64)
                } else {
                    a.clone()
                }
            }
        }
    }

    /// The constraint pushed `margin` into its own interior.
    pub fn tightened(&self, margin: f64) -> Self {
        match self {
            Self::LowerBound(l) => Self::LowerBound(l + &HermitianMatrix::scalar(l.dim(), margin)),
            Self::UpperBound(u) => Self::UpperBound(u - &HermitianMatrix::scalar(u.dim(), margin)),
            Self::TraceFloor(t) => Self::TraceFloor(t + margin),
        }
    }

    /// Amount by which `a` violates the constraint (zero when satisfied).
    pub fn violation(&self, a: &HermitianMatrix) -> f64 {
        match self {
            Self::LowerBound(l) => (-min_eigenvalue(&(a - l))).max(0.0),
            Self::UpperBound(u) => (-min_eigenvalue(&(u - a))).max(0.0),
            Self::TraceFloor(t) => (t - a.trace()).max(0.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct FeasibilityResult {
    pub status: FeasibilityStatus,
    pub iterate: HermitianMatrix,
    /// Largest constraint violation of `iterate`.
    pub residual: f64,
    pub iterations: usize,
}

impl FeasibilityResult {
    pub fn feasible(&self) -> bool {
        self.status == FeasibilityStatus::Feasible
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DykstraOptions {
    /// Feasibility threshold on the cycle residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Cycles without progress, above `10 * tol`, before the run is checked
    /// for an infeasibility certificate.
    pub plateau_window: usize,
    /// Relative decrease of the best residual that counts as progress.
    pub plateau_rel: f64,
    /// The projections target constraints tightened by this margin, so that
    /// iterates reach the interior of the original set in finitely many
    /// cycles; the residual is always measured on the original constraints.
    pub margin: f64,
    /// Keep Dykstra's correction terms. Without them the iteration is plain
    /// cyclic projection, which finds some common point instead of the
    /// nearest one.
    pub corrections: bool,
    /// Over-relaxation `x + w (P x - x)` of plain cyclic projections, in
    /// `[1, 2)`. Ignored while corrections are on.
    pub relaxation: f64,
}

impl Default for DykstraOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 50_000,
            plateau_window: 200,
            plateau_rel: 1e-2,
            margin: 1e-7,
            corrections: true,
            relaxation: 1.9,
        }
    }
}

impl DykstraOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 || self.plateau_window == 0 {
            return Err(Error::ParameterOutOfRange(
                "oracle needs tol > 0 and positive iteration limits".into(),
            ));
        }
        if !(self.margin >= 0.0) {
            return Err(Error::ParameterOutOfRange(
                "margin must be non-negative".into(),
            ));
        }
        if !(1.0..2.0).contains(&self.relaxation) {
            return Err(Error::ParameterOutOfRange(
                "relaxation must lie in [1, 2)".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.plateau_rel) {
            return Err(Error::ParameterOutOfRange(
                "plateau_rel must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Certificates whose normalised gap falls below this are not trusted.
pub const CERTIFICATE_TOL: f64 = 1e-10;

fn trace_product(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    b.matrix().dotc(a.matrix()).re
}

/// Reads normal displacements `d_i`, one per constraint, as a Farkas
/// certificate. Lower bounds contribute `P = (d)_+`, upper bounds
/// `Q = (-d)_+` and trace floors `s I` with `s = max(tr d / n, 0)`; once
/// `ΣP + Σ s I = ΣQ` is closed exactly, any common point `G` would give
/// `Σ tr(P L) + Σ s t <= tr(ΣQ G) <= Σ tr(Q U)`, so a positive difference
/// proves infeasibility. Returns that difference over the total trace of the
/// certificate when it exceeds [`CERTIFICATE_TOL`].
pub fn infeasibility_certificate(
    constraints: &[SpectrahedralConstraint],
    displacements: &[HermitianMatrix],
) -> Option<f64> {
    certificate_gap(constraints, displacements).filter(|&gap| gap > CERTIFICATE_TOL)
}

fn certificate_gap(
    constraints: &[SpectrahedralConstraint],
    displacements: &[HermitianMatrix],
) -> Option<f64> {
    let n = displacements.first()?.dim();
    let mut closure = HermitianMatrix::zeros(n);
    let (mut value, mut scale) = (0.0, 0.0);
    for (c, d) in constraints.iter().zip(displacements) {
        match c {
            SpectrahedralConstraint::LowerBound(l) => {
                let p = eig_hermitian(d).map(|v| v.max(0.0));
                value += trace_product(&p, l);
                scale += p.trace();
                closure = &closure + &p;
            }
            SpectrahedralConstraint::UpperBound(u) => {
                let q = eig_hermitian(d).map(|v| (-v).max(0.0));
                value -= trace_product(&q, u);
                scale += q.trace();
                closure = &closure - &q;
            }
            SpectrahedralConstraint::TraceFloor(floor) => {
                let s = (d.trace() / n as f64).max(0.0);
                value += s * floor;
                scale += s * n as f64;
                closure = &closure + &HermitianMatrix::scalar(n, s);
            }
        }
    }
    // Close the certificate: the positive part of the mismatch goes to the
    // cheapest upper bound, the negative part to the best lower bound.
    let spec = eig_hermitian(&closure);
    let excess = spec.map(|v| v.max(0.0));
    let deficit = spec.map(|v| (-v).max(0.0));
    let fix_upper = if excess.trace() > 0.0 {
        constraints
            .iter()
            .filter_map(|c| match c {
                SpectrahedralConstraint::UpperBound(u) => Some(trace_product(&excess, u)),
                _ => None,
            })
            .reduce(f64::min)?
    } else {
        0.0
    };
    let fix_lower = if deficit.trace() > 0.0 {
        constraints
            .iter()
            .filter_map(|c| match c {
                SpectrahedralConstraint::LowerBound(l) => Some(trace_product(&deficit, l)),
                _ => None,
            })
            .reduce(f64::max)?
    } else {
        0.0
    };
    value += fix_lower - fix_upper;
    scale += excess.trace() + deficit.trace();
    if scale <= 0.0 {
        return None;
    }
    Some(value / scale)
}

/// Plateau checks without progress in the certificate a corrected run makes
/// before handing over as inconclusive.
const PLATEAU_CHECKS: usize = 5;

/// Decides whether the constraints have a common point, starting from `start`
/// (zero when `None`).
///
/// `Feasible` means the iterate violates no original constraint by more than
/// `tol`. `Infeasible` is only returned with a verified
/// [`infeasibility_certificate`]. With corrections on, a run that stalls
/// repeatedly without a certificate stops early as `Inconclusive`; plain runs
/// keep going until `max_iter`.
pub fn dykstra_feasible(
    constraints: &[SpectrahedralConstraint],
    dim: usize,
    start: Option<&HermitianMatrix>,
    opts: &DykstraOptions,
) -> Result<FeasibilityResult> {
    opts.validate()?;
    for c in constraints {
        if let Some(n) = c.dim() {
            if n != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: n,
                });
            }
        }
    }
    let mut x = match start {
        Some(s) if s.dim() != dim => {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.dim(),
            })
        }
        Some(s) => s.clone(),
        None => HermitianMatrix::zeros(dim),
    };
    let residual_of = |a: &HermitianMatrix| {
        constraints
            .iter()
            .map(|c| c.violation(a))
            .fold(0.0, f64::max)
    };

    let mut residual = residual_of(&x);
    if residual <= opts.tol || constraints.is_empty() {
        return Ok(FeasibilityResult {
            status: FeasibilityStatus::Feasible,
            iterate: x,
            residual,
            iterations: 0,
        });
    }
    let targets: Vec<SpectrahedralConstraint> = constraints
        .iter()
        .map(|c| c.tightened(opts.margin))
        .collect();
    let mut increments = vec![HermitianMatrix::zeros(dim); constraints.len()];
    let mut best = residual;
    let mut window_start_best = residual;
    let mut stalled = 0;
    let mut displacements = vec![HermitianMatrix::zeros(dim); constraints.len()];
    let mut snapshot = displacements.clone();
    let mut last_gap = f64::NEG_INFINITY;
    let mut checks = 0;
    for iter in 1..=opts.max_iter {
        for ((c, p), d) in targets
            .iter()
            .zip(increments.iter_mut())
            .zip(displacements.iter_mut())
        {
            let shifted = &x + p;
            let y = c.project(&shifted);
            let step = if opts.corrections {
                *p = &shifted - &y;
                &y - &x
            } else {
                (&y - &x).scale(opts.relaxation)
            };
            *d = &*d + &step;
            x = &x + &step;
        }
        residual = residual_of(&x);
        if residual <= opts.tol {
            return Ok(FeasibilityResult {
                status: FeasibilityStatus::Feasible,
                iterate: x,
                residual,
                iterations: iter,
            });
        }
        best = best.min(residual);
        if residual > 10.0 * opts.tol {
            stalled += 1;
            if stalled >= opts.plateau_window {
                if best >= (1.0 - opts.plateau_rel) * window_start_best {
                    // Accumulated displacements sum to `x - x0`, which stays
                    // bounded while each grows along an infeasible limit
                    // cycle. Those of the last window sum to the drift of a
                    // converging iterate, so their closure error vanishes.
                    let window: Vec<HermitianMatrix> = displacements
                        .iter()
                        .zip(&snapshot)
                        .map(|(d, s)| d - s)
                        .collect();
                    let gap = [&displacements, &window]
                        .into_iter()
                        .filter_map(|ds| certificate_gap(constraints, ds))
                        .fold(f64::NEG_INFINITY, f64::max);
                    snapshot.clone_from(&displacements);
                    if gap <= last_gap {
                        checks += 1;
                    }
                    last_gap = last_gap.max(gap);
                    let status = if gap > CERTIFICATE_TOL {
                        Some(FeasibilityStatus::Infeasible)
                    } else if opts.corrections && checks >= PLATEAU_CHECKS {
                        Some(FeasibilityStatus::Inconclusive)
                    } else {
                        None
                    };
                    if let Some(status) = status {
                        return Ok(FeasibilityResult {
                            status,
                            iterate: x,
                            residual,
                            iterations: iter,
                        });
                    }
                }
                stalled = 0;
                window_start_best = best;
            }
        } else {
            stalled = 0;
            window_start_best = best;
        }
    }
    Ok(FeasibilityResult {
        status: FeasibilityStatus::Inconclusive,
        iterate: x,
        residual,
        iterations: opts.max_iter,
    })
}

/// Dykstra first; an inconclusive run is resumed from its last iterate with
/// plain over-relaxed cyclic projections onto the untightened constraints.
/// These settle thin feasible sets much faster, including sets without
/// interior where every tightened target is empty, and their limit cycles
/// yield infeasibility certificates.
pub fn feasible_with_fallback(
    constraints: &[SpectrahedralConstraint],
    dim: usize,
    start: Option<&HermitianMatrix>,
    opts: &DykstraOptions,
) -> Result<FeasibilityResult> {
    let first = dykstra_feasible(constraints, dim, start, opts)?;
    if first.status != FeasibilityStatus::Inconclusive || !opts.corrections {
        return Ok(first);
    }
    let plain = DykstraOptions {
        corrections: false,
        margin: 0.0,
        ..opts.clone()
    };
    let mut second = dykstra_feasible(constraints, dim, Some(&first.iterate), &plain)?;
    second.iterations += first.iterations;
    Ok(second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{is_psd, HermitianMatrix};

    #[test]
    fn effect_interval_projects_start() {
        let start = HermitianMatrix::from_diagonal(&[-0.5, 0.3, 1.7]);
        let cs = [
            SpectrahedralConstraint::LowerBound(HermitianMatrix::zeros(3)),
            SpectrahedralConstraint::UpperBound(HermitianMatrix::identity(3)),
        ];
        let exact = DykstraOptions {
            margin: 0.0,
            ..DykstraOptions::default()
        };
        let target = HermitianMatrix::from_diagonal(&[0.0, 0.3, 1.0]);
        let r = dykstra_feasible(&cs, 3, Some(&start), &exact).unwrap();
        assert!(r.feasible());
        assert!(r.iterate.distance(&target) < 1e-12);
        let r = dykstra_feasible(&cs, 3, Some(&start), &DykstraOptions::default()).unwrap();
        assert!(r.feasible());
        assert!(r.iterate.distance(&target) < 1e-6);
    }

    #[test]
    fn empty_interval_is_infeasible() {
        let cs = [
            SpectrahedralConstraint::UpperBound(HermitianMatrix::zeros(2)),
            SpectrahedralConstraint::LowerBound(HermitianMatrix::identity(2)),
        ];
        let r = dykstra_feasible(&cs, 2, None, &DykstraOptions::default()).unwrap();
        assert_eq!(r.status, FeasibilityStatus::Infeasible);
        assert!(r.residual > 0.1);
    }

    #[test]
    fn trace_floor_shift() {
        let c = SpectrahedralConstraint::TraceFloor(3.0);
        let p = c.project(&HermitianMatrix::zeros(3));
        assert!(p.distance(&HermitianMatrix::identity(3)) < 1e-15);
        let r = dykstra_feasible(
            &[
                c,
                SpectrahedralConstraint::UpperBound(HermitianMatrix::scalar(3, 0.5)),
            ],
            3,
            None,
            &DykstraOptions::default(),
        )
        .unwrap();
        assert_eq!(r.status, FeasibilityStatus::Infeasible);
    }

    #[test]
    fn feasible_iterate_is_within_tolerance() {
        let e = HermitianMatrix::from_diagonal(&[1.0, 0.25]);
        let cs = [
            SpectrahedralConstraint::LowerBound(HermitianMatrix::zeros(2)),
            SpectrahedralConstraint::UpperBound(e.clone()),
            SpectrahedralConstraint::TraceFloor(1.2),
        ];
        let r = dykstra_feasible(&cs, 2, None, &DykstraOptions::default()).unwrap();
        assert!(r.feasible());
        assert!(r.residual <= 1e-9);
        assert!(is_psd(&(&e - &r.iterate), 1e-8));
    }

    #[test]
    fn rejects_mismatched_dimensions() {
        let cs = [SpectrahedralConstraint::UpperBound(HermitianMatrix::zeros(
            3,
        ))];
        assert!(dykstra_feasible(&cs, 2, None, &DykstraOptions::default()).is_err());
    }
}
