//! Noise robustness: the joint-measurability region `J(E1, E2)` and the
//! threshold `j(E1, E2)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dykstra::{DykstraOptions, FeasibilityStatus};
use super::qubit::qubit_compat;
use super::{binary_jointly_measurable, joint_from_corner};
use crate::effects::Effect;
use crate::error::{Error, Result};
use crate::numerics::{HermitianMatrix, TolerancePolicy};
use crate::observables::{BinaryObservable, ProductObservable, MARGINAL_TOL};

/// Decision procedure for binary joint measurability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    Dykstra(DykstraOptions),
    /// Closed-form criterion, qubits only.
    QubitClosedForm,
}

impl Default for Oracle {
    fn default() -> Self {
        Self::Dykstra(DykstraOptions::default())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleStats {
    pub evaluations: usize,
    pub feasible: usize,
    pub infeasible: usize,
    pub inconclusive: usize,
}

impl OracleStats {
    fn record(&mut self, status: FeasibilityStatus) {
        self.evaluations += 1;
        match status {
            FeasibilityStatus::Feasible => self.feasible += 1,
            FeasibilityStatus::Infeasible => self.infeasible += 1,
            FeasibilityStatus::Inconclusive => self.inconclusive += 1,
        }
    }

    fn merge(&mut self, other: &Self) {
        self.evaluations += other.evaluations;
        self.feasible += other.feasible;
        self.infeasible += other.infeasible;
        self.inconclusive += other.inconclusive;
    }
}

/// Options shared by [`jm_threshold`] and [`region_sample`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOptions {
    /// Points per axis of the trivial-noise grid over `(t1, t2)`.
    pub trivial_grid: usize,
    /// Local refinement rounds around the best grid point.
    pub refinements: usize,
    /// Target bracket width for the threshold.
    pub tol: f64,
    pub oracle: Oracle,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            trivial_grid: 5,
            refinements: 2,
            tol: 1e-3,
            oracle: Oracle::default(),
        }
    }
}

/// `λ E + (1 - λ) t I`.
fn mix(e: &Effect, lambda: f64, t: f64) -> Result<BinaryObservable> {
    let m = &(e.matrix() * lambda) + &HermitianMatrix::scalar(e.dim(), (1.0 - lambda) * t);
    Ok(BinaryObservable::new(Effect::from_matrix(m)?))
}

/// Oracle verdict with a score that is smaller the closer the point is to
/// being feasible.
fn evaluate(
    e1: &Effect,
    e2: &Effect,
    lambda: f64,
    mu: f64,
    t: (f64, f64),
    oracle: &Oracle,
    pol: &TolerancePolicy,
) -> Result<(FeasibilityStatus, f64)> {
    let a = mix(e1, lambda, t.0)?;
    let b = mix(e2, mu, t.1)?;
    match oracle {
        Oracle::Dykstra(opts) => {
            let r = binary_jointly_measurable(&a, &b, pol, opts)?;
            Ok((r.status, r.residual))
        }
        Oracle::QubitClosedForm => {
            let r = qubit_compat(a.yes(), b.yes())?;
            let status = if r.compatible {
                FeasibilityStatus::Feasible
            } else {
                FeasibilityStatus::Infeasible
            };
            Ok((status, -r.slack))
        }
    }
}

fn grid_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Is `(λ, μ)` in the region for some trivial noise `(t1, t2)`? Tries
/// `(½, ½)`, then scans the grid and refines around the best-scoring point.
fn search_trivial_noise(
    e1: &Effect,
    e2: &Effect,
    lambda: f64,
    mu: f64,
    opts: &ThresholdOptions,
    pol: &TolerancePolicy,
) -> Result<(FeasibilityStatus, OracleStats)> {
    let mut stats = OracleStats::default();
    let mut center: (f64, f64) = (0.5, 0.5);
    let mut half_width: f64 = 0.5;
    let mut any_inconclusive = false;
    let (status, _) = evaluate(e1, e2, lambda, mu, center, &opts.oracle, pol)?;
    stats.record(status);
    match status {
        FeasibilityStatus::Feasible => return Ok((status, stats)),
        FeasibilityStatus::Inconclusive => any_inconclusive = true,
        FeasibilityStatus::Infeasible => {}
    }
    for round in 0..=opts.refinements {
        let axis0 = grid_points(
            (center.0 - half_width).max(0.0),
            (center.0 + half_width).min(1.0),
            opts.trivial_grid,
        );
        let axis1 = grid_points(
            (center.1 - half_width).max(0.0),
            (center.1 + half_width).min(1.0),
            opts.trivial_grid,
        );
        let points: Vec<(f64, f64)> = axis0
            .iter()
            .flat_map(|&a| axis1.iter().map(move |&b| (a, b)))
            .collect();
        let outcomes = points
            .par_iter()
            .map(|&t| evaluate(e1, e2, lambda, mu, t, &opts.oracle, pol))
            .collect::<Result<Vec<_>>>()?;
        let mut best = (f64::INFINITY, center);
        for (&t, &(status, score)) in points.iter().zip(outcomes.iter()) {
            stats.record(status);
            match status {
                FeasibilityStatus::Feasible => return Ok((status, stats)),
                FeasibilityStatus::Inconclusive => any_inconclusive = true,
                FeasibilityStatus::Infeasible => {}
            }
            if score < best.0 {
                best = (score, t);
            }
        }
        if round < opts.refinements {
            center = best.1;
            half_width /= (opts.trivial_grid.max(2) - 1) as f64;
        }
    }
    let status = if any_inconclusive {
        FeasibilityStatus::Inconclusive
    } else {
        FeasibilityStatus::Infeasible
    };
    Ok((status, stats))
}

/// The joint observable of `λE1 + (1-λ)t1 I` and `μE2 + (1-μ)t2 I` for
/// `λ + μ ≤ 1`: `G = λ E1 ⊗ T2 + μ T1 ⊗ E2 + (1-λ-μ) T1 ⊗ T2` cell by cell.
/// Marginals are checked before returning.
pub fn delta_joint(
    e1: &Effect,
    e2: &Effect,
    lambda: f64,
    mu: f64,
    t: (f64, f64),
    pol: &TolerancePolicy,
) -> Result<ProductObservable> {
    if lambda < 0.0 || mu < 0.0 || lambda + mu > 1.0 + 1e-12 {
        return Err(Error::ParameterOutOfRange(format!(
            "(λ, μ) = ({lambda}, {mu}) outside Δ"
        )));
    }
    let rest = (1.0 - lambda - mu).max(0.0);
    let g11 = &(&(e1.matrix() * (lambda * t.1)) + &(e2.matrix() * (mu * t.0)))
        + &HermitianMatrix::scalar(e1.dim(), rest * t.0 * t.1);
    let a = mix(e1, lambda, t.0)?;
    let b = mix(e2, mu, t.1)?;
    let joint = joint_from_corner(&a, &b, &g11, pol)?;
    for (which, got, want) in [
        ("first", joint.first_marginal(0), a.yes().matrix().clone()),
        ("second", joint.second_marginal(0), b.yes().matrix().clone()),
    ] {
        let defect = got.distance(&want);
        if defect > MARGINAL_TOL {
            return Err(Error::MarginalMismatch {
                which,
                label: "1".into(),
                defect,
            });
        }
    }
    Ok(joint)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub value: f64,
    pub bracket: [f64; 2],
    /// Bisection stopped early at an inconclusive oracle call.
    pub widened: bool,
    pub oracle_stats: OracleStats,
}

/// `sup{λ : (λ, λ) ∈ J(E1, E2)}` by bisection on `[½, 1]`; `λ = ½` is
/// certified by [`delta_joint`].
pub fn jm_threshold(
    e1: &BinaryObservable,
    e2: &BinaryObservable,
    opts: &ThresholdOptions,
    pol: &TolerancePolicy,
) -> Result<ThresholdReport> {
    if e1.dim() != e2.dim() {
        return Err(Error::DimensionMismatch {
            expected: e1.dim(),
            found: e2.dim(),
        });
    }
    if opts.trivial_grid == 0 || !(opts.tol > 0.0) {
        return Err(Error::ParameterOutOfRange(
            "trivial_grid and tol must be positive".into(),
        ));
    }
    let (a, b) = (e1.yes(), e2.yes());
    let mut stats = OracleStats::default();
    delta_joint(a, b, 0.5, 0.5, (0.5, 0.5), pol)?;
    let (top, s) = search_trivial_noise(a, b, 1.0, 1.0, opts, pol)?;
    stats.merge(&s);
    if top == FeasibilityStatus::Feasible {
        return Ok(ThresholdReport {
            value: 1.0,
            bracket: [1.0, 1.0],
            widened: false,
            oracle_stats: stats,
        });
    }
    let (mut lo, mut hi) = (0.5, 1.0);
    let mut widened = false;
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        let (status, s) = search_trivial_noise(a, b, mid, mid, opts, pol)?;
        stats.merge(&s);
        match status {
            FeasibilityStatus::Feasible => lo = mid,
            FeasibilityStatus::Infeasible => hi = mid,
            FeasibilityStatus::Inconclusive => {
                widened = true;
                break;
            }
        }
    }
    Ok(ThresholdReport {
        value: 0.5 * (lo + hi),
        bracket: [lo, hi],
        widened,
        oracle_stats: stats,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionCell {
    Feasible,
    Infeasible,
    Inconclusive,
}

impl RegionCell {
    /// CSV code: `1`, `0` or `-1`.
    pub fn code(self) -> i8 {
        match self {
            Self::Feasible => 1,
            Self::Infeasible => 0,
            Self::Inconclusive => -1,
        }
    }
}

impl From<FeasibilityStatus> for RegionCell {
    fn from(s: FeasibilityStatus) -> Self {
        match s {
            FeasibilityStatus::Feasible => Self::Feasible,
            FeasibilityStatus::Infeasible => Self::Infeasible,
            FeasibilityStatus::Inconclusive => Self::Inconclusive,
        }
    }
}

/// Sampled region on the uniform grid `axis × axis`, `cells[i][j]` at
/// `(λ, μ) = (axis[i], axis[j])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub axis: Vec<f64>,
    pub cells: Vec<Vec<RegionCell>>,
    pub oracle_stats: OracleStats,
}

impl RegionMap {
    pub fn cell(&self, i: usize, j: usize) -> RegionCell {
        self.cells[i][j]
    }

    /// `(λ, μ, code)` rows in row-major order.
    pub fn rows(&self) -> Vec<(f64, f64, i8)> {
        let mut out = Vec::with_capacity(self.axis.len() * self.axis.len());
        for (i, &l) in self.axis.iter().enumerate() {
            for (j, &m) in self.axis.iter().enumerate() {
                out.push((l, m, self.cells[i][j].code()));
            }
        }
        out
    }
}

/// Samples `J(E1, E2)` on a `grid_n × grid_n` grid over `[0, 1]²`. Points with
/// `λ + μ ≤ 1` are settled by [`delta_joint`], the rest by the oracle.
pub fn region_sample(
    e1: &BinaryObservable,
    e2: &BinaryObservable,
    grid_n: usize,
    opts: &ThresholdOptions,
    pol: &TolerancePolicy,
) -> Result<RegionMap> {
    if grid_n < 2 {
        return Err(Error::ParameterOutOfRange(format!(
            "grid_n = {grid_n} must be at least 2"
        )));
    }
    if e1.dim() != e2.dim() {
        return Err(Error::DimensionMismatch {
            expected: e1.dim(),
            found: e2.dim(),
        });
    }
    let axis = grid_points(0.0, 1.0, grid_n);
    let (a, b) = (e1.yes(), e2.yes());
    let cells_flat = (0..grid_n * grid_n)
        .into_par_iter()
        .map(|idx| {
            let (l, m) = (axis[idx / grid_n], axis[idx % grid_n]);
            if l + m <= 1.0 + 1e-12 && delta_joint(a, b, l, m, (0.5, 0.5), pol).is_ok() {
                let mut s = OracleStats::default();
                s.record(FeasibilityStatus::Feasible);
                return Ok((RegionCell::Feasible, s));
            }
            let (status, s) = search_trivial_noise(a, b, l, m, opts, pol)?;
            Ok((RegionCell::from(status), s))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut stats = OracleStats::default();
    let mut cells = vec![Vec::with_capacity(grid_n); grid_n];
    for (idx, (cell, s)) in cells_flat.into_iter().enumerate() {
        stats.merge(&s);
        cells[idx / grid_n].push(cell);
    }
    Ok(RegionMap {
        axis,
        cells,
        oracle_stats: stats,
    })
}
