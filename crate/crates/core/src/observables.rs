//! Discrete observables, coarse-grainings, tests, Naimark dilations and
//! complementarity verdicts.

use std::collections::{BTreeSet, HashSet};
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::effects::{
    below, commutativity_projection, effects_disjoint, projection_meet, support_basis,
    weak_atom_bound, Effect, Projection, PROJECTION_TOL,
};
use crate::error::{Error, Result};
use crate::numerics::{
    eig_hermitian, null_space_basis, numerical_rank, orthonormal_range_basis, principal_cosines,
    CMatrix, CVector, HermitianMatrix, TolerancePolicy, C64,
};

/// Tolerance on `sum_x E(x) = I`.
pub const NORMALIZATION_TOL: f64 = 1e-8;
/// Tolerance on joint-observable marginals.
pub const MARGINAL_TOL: f64 = 1e-7;
/// Largest `eta`-weight of a unit kernel vector still read as `eta = 0` in the
/// dilation criterion.
pub const DILATION_WEIGHT_TOL: f64 = 1e-6;

/// A set of outcomes, by index into an observable's label list.
pub type OutcomeSet = BTreeSet<usize>;

/// A finite labelled family of effects summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteObservable {
    labels: Vec<String>,
    effects: Vec<Effect>,
}

impl DiscreteObservable {
    pub fn new(labels: Vec<String>, effects: Vec<Effect>) -> Result<Self> {
        if labels.len() != effects.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                found: effects.len(),
            });
        }
        if effects.is_empty() {
            return Err(Error::InvalidInput("observable without outcomes".into()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::InvalidInput(format!("duplicate label `{dup}`")));
        }
        let dim = effects[0].dim();
        let mut total = HermitianMatrix::zeros(dim);
        for e in &effects {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.dim(),
                });
            }
            total = &total + e.matrix();
        }
        let defect = total.distance(&HermitianMatrix::identity(dim));
        if defect > NORMALIZATION_TOL {
            return Err(Error::NotNormalizedPovm { defect });
        }
        Ok(Self { labels, effects })
    }

    /// Labels `"0", "1", ...`.
    pub fn with_index_labels(effects: Vec<Effect>) -> Result<Self> {
        let labels = (0..effects.len()).map(|i| i.to_string()).collect();
        Self::new(labels, effects)
    }

    /// The sharp observable of rank-one projectors onto the columns of a unitary.
    pub fn from_orthonormal_basis(labels: Vec<String>, basis: &CMatrix) -> Result<Self> {
        let effects = (0..basis.ncols())
            .map(|k| Effect::from(Projection::from_basis(&basis.columns(k, 1).into_owned())))
            .collect();
        Self::new(labels, effects)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn effect(&self, index: usize) -> &Effect {
        &self.effects[index]
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Resolves labels to an outcome set.
    pub fn outcome_set(&self, labels: &[&str]) -> Result<OutcomeSet> {
        labels.iter().map(|l| self.index_of(l)).collect()
    }

    pub fn set_labels(&self, set: &OutcomeSet) -> Vec<String> {
        set.iter().map(|&i| self.labels[i].clone()).collect()
    }

    /// `E(X) = sum_{x in X} E(x)`.
    pub fn effect_of(&self, set: &OutcomeSet) -> Result<Effect> {
        let mut total = HermitianMatrix::zeros(self.dim());
        for &i in set {
            let e = self
                .effects
                .get(i)
                .ok_or_else(|| Error::UnknownLabel(format!("#{i}")))?;
            total = &total + e.matrix();
        }
        // partial sums of a POVM are effects up to round-off
        Effect::new(total, &TolerancePolicy::default())
    }

    /// True when every effect is a projection.
    pub fn is_projective(&self) -> bool {
        self.first_non_projective().is_none()
    }

    fn first_non_projective(&self) -> Option<usize> {
        self.effects.iter().position(|e| {
            let m = e.matrix().matrix();
            (m * m - m).norm() > PROJECTION_TOL
        })
    }
}

/// A yes/no observable, stored by its yes-effect.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryObservable {
    yes: Effect,
}

impl BinaryObservable {
    pub fn new(yes: Effect) -> Self {
        Self { yes }
    }

    pub fn yes(&self) -> &Effect {
        &self.yes
    }

    pub fn no(&self) -> Effect {
        self.yes.complement()
    }

    pub fn dim(&self) -> usize {
        self.yes.dim()
    }

    /// As a two-outcome observable labelled `"1"` and `"0"`.
    pub fn to_observable(&self) -> DiscreteObservable {
        DiscreteObservable {
            labels: vec!["1".into(), "0".into()],
            effects: vec![self.yes.clone(), self.no()],
        }
    }
}

/// Family of outcome sets for a complementarity question; no member is empty
/// or the full outcome set.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeFamily {
    sets: Vec<OutcomeSet>,
}

impl OutcomeFamily {
    pub fn new(n_outcomes: usize, sets: Vec<OutcomeSet>) -> Result<Self> {
        for s in &sets {
            if s.is_empty() {
                return Err(Error::InvalidFamily("empty outcome set".into()));
            }
            if s.len() >= n_outcomes && s.iter().all(|&i| i < n_outcomes) {
                return Err(Error::InvalidFamily("full outcome set".into()));
            }
            if let Some(&bad) = s.iter().find(|&&i| i >= n_outcomes) {
                return Err(Error::InvalidFamily(format!(
                    "outcome index {bad} out of range"
                )));
            }
        }
        Ok(Self { sets })
    }

    /// All singletons.
    pub fn singletons(n_outcomes: usize) -> Self {
        Self {
            sets: (0..n_outcomes).map(|i| OutcomeSet::from([i])).collect(),
        }
    }

    /// Singletons plus every proper subset of size at most `k_max`.
    pub fn up_to_size(n_outcomes: usize, k_max: usize) -> Self {
        let mut sets = Vec::new();
        let mut current = Vec::new();
        fn rec(
            start: usize,
            n: usize,
            k_max: usize,
            current: &mut Vec<usize>,
            out: &mut Vec<OutcomeSet>,
        ) {
            if !current.is_empty() && current.len() < n {
                out.push(current.iter().copied().collect());
            }
            if current.len() == k_max {
                return;
            }
            for i in start..n {
                current.push(i);
                rec(i + 1, n, k_max, current, out);
                current.pop();
            }
        }
        rec(0, n_outcomes, k_max.max(1), &mut current, &mut sets);
        sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Self { sets }
    }

    /// Default family: singletons and pairs.
    pub fn default_for(n_outcomes: usize) -> Self {
        Self::up_to_size(n_outcomes, 2)
    }

    pub fn sets(&self) -> &[OutcomeSet] {
        &self.sets
    }
}

/// Decision for one `(X, Y)` pair with its numerical certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplementarityVerdict {
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub disjoint: bool,
    /// Support route: largest principal-angle cosine between the supports of
    /// `E(X)` and `F(Y)`. Dilation route: largest `eta`-weight of a unit vector
    /// in the kernel of `[J*U | -K*V]`.
    pub overlap_cosine: f64,
    /// Certificate within a factor ten of the decision threshold.
    pub boundary: bool,
    /// Unit vector witnessing the overlap, as `[re, im]` pairs.
    pub witness: Option<Vec<[f64; 2]>>,
}

fn vector_pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn boundary_band(gap: f64, threshold: f64) -> bool {
    gap >= threshold / 10.0 && gap <= threshold * 10.0
}

/// The binary coarse-graining `Q_{E,X}` with yes-effect `E(X)`.
pub fn coarse_grain(e: &DiscreteObservable, labels: &[&str]) -> Result<BinaryObservable> {
    let set = e.outcome_set(labels)?;
    Ok(BinaryObservable::new(e.effect_of(&set)?))
}

pub fn coarse_grain_set(e: &DiscreteObservable, set: &OutcomeSet) -> Result<BinaryObservable> {
    Ok(BinaryObservable::new(e.effect_of(set)?))
}

/// `A` is a test for `Q`: `A(1) ≠ 0` and `A(1) ⪯ Q(1)`.
pub fn is_test(a: &BinaryObservable, q: &BinaryObservable, pol: &TolerancePolicy) -> Result<bool> {
    if numerical_rank(a.yes().matrix(), pol) == 0 {
        return Ok(false);
    }
    below(a.yes(), q.yes(), pol)
}

/// The four-outcome joint observable of a test `A` for `Q`:
/// `G11 = A(1)`, `G10 = Q(1) - A(1)`, `G01 = 0`, `G00 = I - Q(1)`.
/// Cells are indexed `[q][a]` with outcome `1` first.
pub fn test_joint_observable(
    a: &BinaryObservable,
    q: &BinaryObservable,
    pol: &TolerancePolicy,
) -> Result<ProductObservable> {
    let g11 = a.yes().clone();
    let g10 = Effect::new(q.yes().matrix() - a.yes().matrix(), pol)?;
    let g01 = Effect::zero(a.dim());
    let g00 = q.no();
    ProductObservable::new(
        vec!["1".into(), "0".into()],
        vec!["1".into(), "0".into()],
        vec![vec![g11, g10], vec![g01, g00]],
    )
}

/// Whether two binary observables share a test, with a weak-atom witness.
#[derive(Clone, Debug)]
pub struct CommonTest {
    pub exists: bool,
    pub witness: Option<Effect>,
}

pub fn common_test_exists(
    q1: &BinaryObservable,
    q2: &BinaryObservable,
    pol: &TolerancePolicy,
) -> Result<CommonTest> {
    let d = effects_disjoint(q1.yes(), q2.yes(), pol)?;
    let witness = match d.witness {
        Some(w) => {
            let l1 = weak_atom_bound(q1.yes(), &w)?;
            let l2 = weak_atom_bound(q2.yes(), &w)?;
            let lambda = l1.min(l2);
            Some(Effect::new(HermitianMatrix::outer(&w).scale(lambda), pol)?)
        }
        None => None,
    };
    Ok(CommonTest {
        exists: !d.disjoint,
        witness,
    })
}

/// Support-intersection verdict for one pair of effects.
pub fn pair_verdict(
    ex: &Effect,
    fy: &Effect,
    x: Vec<String>,
    y: Vec<String>,
    pol: &TolerancePolicy,
) -> Result<ComplementarityVerdict> {
    let d = effects_disjoint(ex, fy, pol)?;
    Ok(ComplementarityVerdict {
        x,
        y,
        disjoint: d.disjoint,
        overlap_cosine: d.overlap_cosine,
        boundary: boundary_band(1.0 - d.overlap_cosine, pol.rank_rel),
        witness: d.witness.as_ref().map(vector_pairs),
    })
}

/// Verdicts over a grid of outcome-set pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyVerdicts {
    pub verdicts: Vec<ComplementarityVerdict>,
    /// All pairs disjoint.
    pub complementary: bool,
}

/// One verdict per `(X, Y)` in `A0 × B0`: are `E(X)` and `F(Y)` disjoint?
pub fn complementary_family(
    e: &DiscreteObservable,
    f: &DiscreteObservable,
    a0: &OutcomeFamily,
    b0: &OutcomeFamily,
    pol: &TolerancePolicy,
) -> Result<FamilyVerdicts> {
    if e.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: f.dim(),
        });
    }
    let supports = |obs: &DiscreteObservable, fam: &OutcomeFamily| -> Result<Vec<CMatrix>> {
        fam.sets()
            .iter()
            .map(|s| Ok(support_basis(&obs.effect_of(s)?, pol)))
            .collect()
    };
    let se = supports(e, a0)?;
    let sf = supports(f, b0)?;
    let pairs: Vec<(usize, usize)> = (0..se.len())
        .flat_map(|i| (0..sf.len()).map(move |j| (i, j)))
        .collect();
    let verdicts = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (cosines, vectors) = principal_cosines(&se[i], &sf[j])?;
            let overlap = cosines.first().copied().unwrap_or(0.0);
            let disjoint = overlap < 1.0 - pol.rank_rel;
            Ok(ComplementarityVerdict {
                x: e.set_labels(&a0.sets()[i]),
                y: f.set_labels(&b0.sets()[j]),
                disjoint,
                overlap_cosine: overlap,
                boundary: boundary_band(1.0 - overlap, pol.rank_rel),
                witness: (!disjoint).then(|| vector_pairs(&vectors.column(0).into_owned())),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let complementary = verdicts.iter().all(|v| v.disjoint);
    Ok(FamilyVerdicts {
        verdicts,
        complementary,
    })
}

/// A finite observable on a product outcome space, cells indexed `[x][y]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductObservable {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    cells: Vec<Vec<Effect>>,
}

impl ProductObservable {
    pub fn new(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        cells: Vec<Vec<Effect>>,
    ) -> Result<Self> {
        if cells.len() != row_labels.len() || cells.iter().any(|r| r.len() != col_labels.len()) {
            return Err(Error::InvalidInput(
                "product observable grid has the wrong shape".into(),
            ));
        }
        let flat: Vec<Effect> = cells.iter().flatten().cloned().collect();
        DiscreteObservable::with_index_labels(flat)?;
        Ok(Self {
            row_labels,
            col_labels,
            cells,
        })
    }

    /// `G(x, y) = E(x)^{1/2} F(y) E(x)^{1/2}`; a joint observable when the pair commutes.
    pub fn sequential(
        e: &DiscreteObservable,
        f: &DiscreteObservable,
        pol: &TolerancePolicy,
    ) -> Result<Self> {
        let cells = e
            .effects()
            .iter()
            .map(|ex| {
                let root = crate::numerics::matrix_sqrt_psd(ex.matrix(), pol)?;
                f.effects()
                    .iter()
                    .map(|fy| Effect::new(fy.matrix().congruence(root.matrix()), pol))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(e.labels().to_vec(), f.labels().to_vec(), cells)
    }

    pub fn cell(&self, x: usize, y: usize) -> &Effect {
        &self.cells[x][y]
    }

    pub fn rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn cols(&self) -> usize {
        self.col_labels.len()
    }

    /// First marginal `x -> sum_y G(x, y)`.
    pub fn first_marginal(&self, x: usize) -> HermitianMatrix {
        let n = self.cells[0][0].dim();
        self.cells[x]
            .iter()
            .fold(HermitianMatrix::zeros(n), |acc, g| &acc + g.matrix())
    }

    /// Second marginal `y -> sum_x G(x, y)`.
    pub fn second_marginal(&self, y: usize) -> HermitianMatrix {
        let n = self.cells[0][0].dim();
        self.cells
            .iter()
            .fold(HermitianMatrix::zeros(n), |acc, row| &acc + row[y].matrix())
    }
}

/// Result of checking a candidate joint observable against complementarity.
#[derive(Clone, Debug)]
pub struct JointCheck {
    /// All `(X, Y)` verdicts disjoint.
    pub complementary: bool,
    /// Nonzero cells `G(x, y)` whose singleton verdict says "disjoint".
    pub offending_cells: Vec<(usize, usize)>,
    /// No nonzero cell sits on a disjoint pair.
    pub consistent: bool,
}

/// Checks a candidate joint measurement `G` of `E` and `F`. Marginal failures
/// are reported as [`Error::MarginalMismatch`]; otherwise every nonzero cell
/// `G(x, y)` is a common lower bound of `E(x)` and `F(y)` and must sit on a
/// non-disjoint pair.
pub fn no_joint_measurement_check(
    e: &DiscreteObservable,
    f: &DiscreteObservable,
    a0: &OutcomeFamily,
    b0: &OutcomeFamily,
    g: &ProductObservable,
    pol: &TolerancePolicy,
) -> Result<JointCheck> {
    if g.rows() != e.len() || g.cols() != f.len() {
        return Err(Error::InvalidInput(
            "joint observable is not labelled by the product outcomes".into(),
        ));
    }
    for x in 0..e.len() {
        let defect = g.first_marginal(x).distance(e.effect(x).matrix());
        if defect > MARGINAL_TOL {
            return Err(Error::MarginalMismatch {
                which: "first",
                label: e.labels()[x].clone(),
                defect,
            });
        }
    }
    for y in 0..f.len() {
        let defect = g.second_marginal(y).distance(f.effect(y).matrix());
        if defect > MARGINAL_TOL {
            return Err(Error::MarginalMismatch {
                which: "second",
                label: f.labels()[y].clone(),
                defect,
            });
        }
    }
    let family = complementary_family(e, f, a0, b0, pol)?;
    let mut offending = Vec::new();
    for x in 0..e.len() {
        for y in 0..f.len() {
            if numerical_rank(g.cell(x, y).matrix(), pol) == 0 {
                continue;
            }
            if effects_disjoint(e.effect(x), f.effect(y), pol)?.disjoint {
                offending.push((x, y));
            }
        }
    }
    Ok(JointCheck {
        complementary: family.complementary,
        consistent: offending.is_empty() && !family.complementary,
        offending_cells: offending,
    })
}

/// A diagonal Naimark dilation `E(x) = J* Q(x) J` with `Q(x)` the coordinate
/// projection onto `blocks[x]`.
#[derive(Clone, Debug)]
pub struct NaimarkDilation {
    pub isometry: CMatrix,
    pub blocks: Vec<Range<usize>>,
}

impl NaimarkDilation {
    pub fn dilation_dim(&self) -> usize {
        self.isometry.nrows()
    }

    /// `Q(X)` as a diagonal projection on the dilation space.
    pub fn block_projection(&self, set: &OutcomeSet) -> HermitianMatrix {
        let mut diag = vec![0.0; self.dilation_dim()];
        for &x in set {
            for i in self.blocks[x].clone() {
                diag[i] = 1.0;
            }
        }
        HermitianMatrix::from_diagonal(&diag)
    }

    /// `Q(X) J`: rows of `J` outside the blocks of `X` zeroed.
    pub fn compressed_isometry(&self, set: &OutcomeSet) -> CMatrix {
        let mut out = CMatrix::zeros(self.isometry.nrows(), self.isometry.ncols());
        for &x in set {
            for i in self.blocks[x].clone() {
                out.row_mut(i).copy_from(&self.isometry.row(i));
            }
        }
        out
    }

    /// Largest deviation `||J*Q(x)J - F(x)||_F` over outcomes.
    pub fn reconstruction_error(&self, f: &DiscreteObservable) -> f64 {
        (0..f.len())
            .map(|x| {
                let q = self.compressed_isometry(&OutcomeSet::from([x]));
                let rec = self.isometry.adjoint() * q;
                (rec - f.effect(x).matrix().matrix()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Checks isometry, reconstruction and minimality against `f`.
    pub fn validate(&self, f: &DiscreteObservable, pol: &TolerancePolicy) -> Result<()> {
        if self.blocks.len() != f.len() || self.isometry.ncols() != f.dim() {
            return Err(Error::InvalidDilation(
                "shape does not match the observable".into(),
            ));
        }
        let mut next = 0;
        for b in &self.blocks {
            if b.start != next {
                return Err(Error::InvalidDilation(
                    "blocks must tile the dilation space".into(),
                ));
            }
            next = b.end;
        }
        if next != self.dilation_dim() {
            return Err(Error::InvalidDilation(
                "blocks must tile the dilation space".into(),
            ));
        }
        let jj = self.isometry.adjoint() * &self.isometry;
        let iso = (jj - CMatrix::identity(f.dim(), f.dim())).norm();
        if iso > 1e-8 {
            return Err(Error::InvalidDilation(format!(
                "J*J deviates from I by {iso:.3e}"
            )));
        }
        let rec = self.reconstruction_error(f);
        if rec > 1e-8 {
            return Err(Error::InvalidDilation(format!(
                "reconstruction error {rec:.3e}"
            )));
        }
        let total_rank: usize = f
            .effects()
            .iter()
            .map(|e| numerical_rank(e.matrix(), pol))
            .sum();
        if total_rank != self.dilation_dim() {
            return Err(Error::InvalidDilation(format!(
                "not minimal: dimension {} but total rank {total_rank}",
                self.dilation_dim()
            )));
        }
        Ok(())
    }
}

/// Minimal diagonal dilation: `J = sum_y sum_k |phi_yk><f_yk|` with
/// `F(y) = sum_k |f_yk><f_yk|` from the eigendecomposition of each `F(y)`.
pub fn minimal_dilation(f: &DiscreteObservable, pol: &TolerancePolicy) -> Result<NaimarkDilation> {
    let n = f.dim();
    let mut rows: Vec<CVector> = Vec::new();
    let mut blocks = Vec::with_capacity(f.len());
    for e in f.effects() {
        let spec = eig_hermitian(e.matrix());
        let cutoff = pol.eig_zero * spec.norm();
        let start = rows.len();
        for (k, &l) in spec.eigenvalues.iter().enumerate().rev() {
            if l > cutoff && l > 0.0 {
                rows.push(spec.eigenvectors.column(k).scale(l.sqrt()));
            }
        }
        blocks.push(start..rows.len());
    }
    let mut j = CMatrix::zeros(rows.len(), n);
    for (i, v) in rows.iter().enumerate() {
        j.row_mut(i).copy_from(&v.adjoint());
    }
    Ok(NaimarkDilation {
        isometry: j,
        blocks,
    })
}

/// Dilation criterion for one `(X, Y)`: with `U`, `V` orthonormal bases of
/// `ran[Q(X)J]` and `ran[Q'(Y)K]`, the pair is disjoint iff every kernel
/// vector `(a, b)` of `[J*U | -K*V]` has `a = 0`.
#[allow(clippy::too_many_arguments)]
pub fn dilation_complementarity(
    e: &DiscreteObservable,
    f: &DiscreteObservable,
    x: &OutcomeSet,
    y: &OutcomeSet,
    dil_e: &NaimarkDilation,
    dil_f: &NaimarkDilation,
    pol: &TolerancePolicy,
) -> Result<ComplementarityVerdict> {
    if e.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: f.dim(),
        });
    }
    if dil_e.blocks.len() != e.len() || dil_f.blocks.len() != f.len() {
        return Err(Error::InvalidDilation(
            "dilation does not match the observable".into(),
        ));
    }
    let u = orthonormal_range_basis(&dil_e.compressed_isometry(x), pol);
    let v = orthonormal_range_basis(&dil_f.compressed_isometry(y), pol);
    let (r1, r2) = (u.ncols(), v.ncols());
    let labels = (e.set_labels(x), f.set_labels(y));
    if r1 == 0 || r2 == 0 {
        return Ok(ComplementarityVerdict {
            x: labels.0,
            y: labels.1,
            disjoint: true,
            overlap_cosine: 0.0,
            boundary: false,
            witness: None,
        });
    }
    let mut stacked = CMatrix::zeros(e.dim(), r1 + r2);
    stacked
        .columns_mut(0, r1)
        .copy_from(&(dil_e.isometry.adjoint() * &u));
    stacked
        .columns_mut(r1, r2)
        .copy_from(&(-(dil_f.isometry.adjoint() * &v)));
    let kernel = null_space_basis(&stacked, pol);
    let (weight, direction) = if kernel.ncols() == 0 {
        (0.0, None)
    } else {
        let a = kernel.rows(0, r1).into_owned();
        let spec = eig_hermitian(&HermitianMatrix::hermitian_part(&(&a * a.adjoint())));
        let top = spec.dim() - 1;
        (
            spec.max().max(0.0).sqrt().min(1.0),
            Some(spec.eigenvectors.column(top).into_owned()),
        )
    };
    let disjoint = weight <= DILATION_WEIGHT_TOL;
    let witness = if disjoint {
        None
    } else {
        direction.map(|a| {
            let eta = &u * a;
            vector_pairs(&eta.unscale(eta.norm()))
        })
    };
    Ok(ComplementarityVerdict {
        x: labels.0,
        y: labels.1,
        disjoint,
        overlap_cosine: weight,
        boundary: boundary_band(weight, DILATION_WEIGHT_TOL),
        witness,
    })
}

/// Disjointness of `(E(X), F(Y))`, `(E(X), F(Y)⊥)` and `(E(X)⊥, F(Y))`.
pub fn strong_complementarity(
    e: &DiscreteObservable,
    f: &DiscreteObservable,
    x: &OutcomeSet,
    y: &OutcomeSet,
    pol: &TolerancePolicy,
) -> Result<[bool; 3]> {
    let ex = e.effect_of(x)?;
    let fy = f.effect_of(y)?;
    Ok([
        effects_disjoint(&ex, &fy, pol)?.disjoint,
        effects_disjoint(&ex, &fy.complement(), pol)?.disjoint,
        effects_disjoint(&ex.complement(), &fy, pol)?.disjoint,
    ])
}

/// `com(E, F) = ⋀_{x,y} com(E(x), F(y))` for projective observables.
pub fn com_observables(
    e: &DiscreteObservable,
    f: &DiscreteObservable,
    pol: &TolerancePolicy,
) -> Result<Projection> {
    for obs in [e, f] {
        if let Some(i) = obs.first_non_projective() {
            return Err(Error::NotProjective(obs.labels()[i].clone()));
        }
    }
    if e.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: f.dim(),
        });
    }
    let proj = |eff: &Effect| Projection::new(eff.matrix().clone());
    let mut acc = Projection::identity(e.dim());
    for ex in e.effects() {
        let p = proj(ex)?;
        for fy in f.effects() {
            let com = commutativity_projection(&p, &proj(fy)?, pol)?;
            acc = projection_meet(&acc, &com, pol)?;
            if acc.is_zero() {
                return Ok(acc);
            }
        }
    }
    Ok(acc)
}

/// Sharp qubit observable along the z axis (`|0>`, `|1>`).
pub fn qubit_sharp_z() -> DiscreteObservable {
    DiscreteObservable::from_orthonormal_basis(
        vec!["+1".into(), "-1".into()],
        &CMatrix::identity(2, 2),
    )
    .expect("computational basis")
}

/// Sharp qubit observable along the x axis (`|+>`, `|->`).
pub fn qubit_sharp_x() -> DiscreteObservable {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(s, 0.0),
            C64::new(s, 0.0),
            C64::new(s, 0.0),
            C64::new(-s, 0.0),
        ],
    );
    DiscreteObservable::from_orthonormal_basis(vec!["+1".into(), "-1".into()], &h)
        .expect("Hadamard basis")
}
