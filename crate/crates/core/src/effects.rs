//! Effects, the effect order, the factorisation lemmas and the support machinery.
//!
//! In finite dimension every range is closed, so `ran E^{1/2}` coincides with
//! the support subspace `ran P_E`; the routines below decide membership and
//! disjointness on supports directly.

use crate::error::{Error, Result};
use crate::numerics::{
    eig_hermitian, operator_norm, orthonormal_range_basis, principal_cosines, select_columns,
    subspace_intersection, CMatrix, CVector, HermitianMatrix, SpectralDecomposition,
    TolerancePolicy,
};

/// Distance below which a vector counts as lying in a support subspace.
pub const MEMBERSHIP_TOL: f64 = 1e-8;
/// Idempotency tolerance for projections.
pub const PROJECTION_TOL: f64 = 1e-8;
/// Allowed excess operator norm of a contraction.
pub const CONTRACTION_SLACK: f64 = 1e-9;
/// Spectral excursions below this are left untouched by [`Effect::new`].
pub const CLAMP_TOL: f64 = 1e-12;

/// An operator `E` with `0 ⪯ E ⪯ I`.
#[derive(Clone, Debug, PartialEq)]
pub struct Effect(HermitianMatrix);

impl Effect {
    /// Validates the spectrum lies in `[-psd_slack, 1 + psd_slack]`; excursions
    /// outside `[0, 1]` larger than [`CLAMP_TOL`] are clamped.
    pub fn new(m: HermitianMatrix, pol: &TolerancePolicy) -> Result<Self> {
        let spec = eig_hermitian(&m);
        let (min, max) = (spec.min(), spec.max());
        if min < -pol.psd_slack || max > 1.0 + pol.psd_slack {
            return Err(Error::NotAnEffect { min, max });
        }
        if min < -CLAMP_TOL || max > 1.0 + CLAMP_TOL {
            return Ok(Self(spec.map(|l| l.clamp(0.0, 1.0))));
        }
        Ok(Self(m))
    }

    pub fn from_matrix(m: HermitianMatrix) -> Result<Self> {
        Self::new(m, &TolerancePolicy::default())
    }

    pub fn zero(n: usize) -> Self {
        Self(HermitianMatrix::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        Self(HermitianMatrix::identity(n))
    }

    /// The trivial effect `p I`.
    pub fn trivial(n: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ParameterOutOfRange(format!(
                "trivial effect weight {p}"
            )));
        }
        Ok(Self(HermitianMatrix::scalar(n, p)))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_matrix(HermitianMatrix::from_diagonal(diag))
    }

    /// The weak atom `|phi><phi|` (requires `||phi|| <= 1`).
    pub fn weak_atom(phi: &CVector) -> Result<Self> {
        Self::from_matrix(HermitianMatrix::outer(phi))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> HermitianMatrix {
        self.0
    }

    /// `I - E`.
    pub fn complement(&self) -> Self {
        Self(&HermitianMatrix::identity(self.dim()) - &self.0)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }
}

impl From<Projection> for Effect {
    fn from(p: Projection) -> Self {
        Effect(p.0)
    }
}

/// An orthogonal projection.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection(HermitianMatrix);

impl Projection {
    pub fn new(m: HermitianMatrix) -> Result<Self> {
        let defect = (m.matrix() * m.matrix() - m.matrix()).norm();
        if defect > PROJECTION_TOL {
            return Err(Error::NotAProjection { defect });
        }
        Ok(Self(m))
    }

    /// Projector onto the span of orthonormal columns.
    pub fn from_basis(basis: &CMatrix) -> Self {
        Self(HermitianMatrix::projector_from_basis(basis))
    }

    pub fn zero(n: usize) -> Self {
        Self(HermitianMatrix::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        Self(HermitianMatrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn complement(&self) -> Self {
        Self(&HermitianMatrix::identity(self.dim()) - &self.0)
    }

    /// Rank, read off the trace.
    pub fn rank(&self) -> usize {
        self.0.trace().round().max(0.0) as usize
    }

    /// Orthonormal basis of the range.
    pub fn range_basis(&self) -> CMatrix {
        eig_hermitian(&self.0).columns_where(|l| l > 0.5)
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }
}

/// A linear map with operator norm at most one (possibly rectangular).
#[derive(Clone, Debug, PartialEq)]
pub struct Contraction(CMatrix);

impl Contraction {
    pub fn new(m: CMatrix) -> Result<Self> {
        let norm = operator_norm(&m);
        if norm > 1.0 + CONTRACTION_SLACK {
            return Err(Error::NotAContraction { norm });
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Domain dimension.
    pub fn domain_dim(&self) -> usize {
        self.0.ncols()
    }

    /// Codomain dimension.
    pub fn codomain_dim(&self) -> usize {
        self.0.nrows()
    }

    /// The Gram operator `K*K` on the domain.
    pub fn gram(&self) -> HermitianMatrix {
        HermitianMatrix::hermitian_part(&(self.0.adjoint() * &self.0))
    }

    pub fn operator_norm(&self) -> f64 {
        operator_norm(&self.0)
    }
}

/// A pure operation `rho -> K rho K*` given by a single Kraus contraction.
#[derive(Clone, Debug, PartialEq)]
pub struct PureOperation {
    pub kraus: Contraction,
}

impl PureOperation {
    pub fn new(kraus: Contraction) -> Self {
        Self { kraus }
    }

    /// The effect `K*K` implemented by the operation.
    pub fn effect(&self) -> Result<Effect> {
        Effect::from_matrix(self.kraus.gram())
    }

    /// The generalised Lüders operation `rho -> E^{1/2} rho E^{1/2}`.
    pub fn luders(e: &Effect, pol: &TolerancePolicy) -> Result<Self> {
        let root = crate::numerics::matrix_sqrt_psd(e.matrix(), pol)?;
        Ok(Self::new(Contraction::new(root.into_matrix())?))
    }

    /// `self ∘ first`: Kraus operator `K_self K_first`.
    pub fn after(&self, first: &PureOperation) -> Result<PureOperation> {
        if self.kraus.domain_dim() != first.kraus.codomain_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.kraus.domain_dim(),
                found: first.kraus.codomain_dim(),
            });
        }
        Ok(Self::new(Contraction::new(
            self.kraus.matrix() * first.kraus.matrix(),
        )?))
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}

/// Orthonormal basis of the support subspace of an effect.
pub fn support_basis(e: &Effect, pol: &TolerancePolicy) -> CMatrix {
    eig_hermitian(e.matrix()).columns_where(|l| l > pol.eig_zero)
}

/// The support projection `P_E`.
pub fn support_projection(e: &Effect, pol: &TolerancePolicy) -> Projection {
    Projection::from_basis(&support_basis(e, pol))
}

/// `E_0^{-1/2}` on the support of `E`, zero on its kernel.
pub fn restricted_inverse_sqrt(e: &Effect, pol: &TolerancePolicy) -> Result<HermitianMatrix> {
    restricted_power(e, -0.5, pol)
}

/// `E_0^{-1}` on the support of `E`, zero on its kernel.
pub fn restricted_inverse(e: &Effect, pol: &TolerancePolicy) -> Result<HermitianMatrix> {
    restricted_power(e, -1.0, pol)
}

fn restricted_power(e: &Effect, power: f64, pol: &TolerancePolicy) -> Result<HermitianMatrix> {
    let spec = eig_hermitian(e.matrix());
    if spec.max() <= pol.eig_zero {
        return Err(Error::ZeroEffect);
    }
    Ok(spec.map(|l| if l > pol.eig_zero { l.powf(power) } else { 0.0 }))
}

/// The effect order: `A ⪯ E` up to `psd_slack`.
pub fn below(a: &Effect, e: &Effect, pol: &TolerancePolicy) -> Result<bool> {
    below_matrix(a.matrix(), e.matrix(), pol)
}

/// Order test on arbitrary Hermitian matrices.
pub fn below_matrix(
    a: &HermitianMatrix,
    e: &HermitianMatrix,
    pol: &TolerancePolicy,
) -> Result<bool> {
    check_dims(e.dim(), a.dim())?;
    Ok(eig_hermitian(&(e - a)).min() >= -pol.psd_slack)
}

/// The unique `C` with `M = CK` vanishing on `(ran K)^⊥`.
///
/// Built by sending the orthonormal image basis `K v_i / s_i` of `ran K` to
/// `M v_i / s_i`, where `K*K v_i = s_i^2 v_i`.
pub fn factor_contraction(
    m: &Contraction,
    k: &Contraction,
    pol: &TolerancePolicy,
) -> Result<Contraction> {
    check_dims(k.domain_dim(), m.domain_dim())?;
    let kk = k.gram();
    let mm = m.gram();
    let gap = eig_hermitian(&(&kk - &mm)).min();
    if gap < -pol.psd_slack {
        return Err(Error::OrderViolation {
            min_eigenvalue: gap,
        });
    }
    let spec = eig_hermitian(&kk);
    let thr = pol.rank_threshold(spec.norm());
    let keep: Vec<usize> = (0..spec.dim())
        .filter(|&i| spec.eigenvalues[i] > thr)
        .collect();
    let v = select_columns(&spec.eigenvectors, &keep);
    let km = k.matrix() * &v;
    let mut mv = m.matrix() * &v;
    for (col, &i) in keep.iter().enumerate() {
        mv.column_mut(col).scale_mut(1.0 / spec.eigenvalues[i]);
    }
    // C = sum_i (M v_i)(K v_i)^* / s_i^2
    let c = mv * km.adjoint();
    let norm = operator_norm(&c);
    if norm > 1.0 + CONTRACTION_SLACK {
        // Within slack of the order test: rescale onto the unit ball.
        return Ok(Contraction(c.unscale(norm)));
    }
    Ok(Contraction(c))
}

/// `inf{lambda in [0,1] : M*M ⪯ lambda K*K}`, computed as `||C||^2`.
pub fn min_dominating_scale(
    m: &Contraction,
    k: &Contraction,
    pol: &TolerancePolicy,
) -> Result<f64> {
    let c = factor_contraction(m, k, pol)?;
    Ok(c.operator_norm().powi(2).min(1.0))
}

/// `ran M* ⊆ ran K*`, decided on orthonormal range bases.
pub fn range_inclusion(m: &Contraction, k: &Contraction, pol: &TolerancePolicy) -> Result<bool> {
    check_dims(k.domain_dim(), m.domain_dim())?;
    let bm = orthonormal_range_basis(&m.matrix().adjoint(), pol);
    let bk = orthonormal_range_basis(&k.matrix().adjoint(), pol);
    let residual = &bm - &bk * (bk.adjoint() * &bm);
    Ok((0..residual.ncols()).all(|j| residual.column(j).norm() <= MEMBERSHIP_TOL))
}

/// Smallest `lambda` with `M*M ⪯ lambda K*K` when `ran M* ⊆ ran K*` (any
/// nonnegative scale, not restricted to `[0,1]`); `None` otherwise.
pub fn range_inclusion_scale(
    m: &Contraction,
    k: &Contraction,
    pol: &TolerancePolicy,
) -> Result<Option<f64>> {
    if !range_inclusion(m, k, pol)? {
        return Ok(None);
    }
    let kk = k.gram();
    let spec = eig_hermitian(&kk);
    let thr = pol.rank_threshold(spec.norm());
    // (K*K)^{-1/2} on the support; lambda = || (K*K)^{-1/2} M*M (K*K)^{-1/2} ||
    let inv_sqrt = spec.map(|l| if l > thr { 1.0 / l.sqrt() } else { 0.0 });
    let w = m.gram().congruence(inv_sqrt.matrix());
    Ok(Some(eig_hermitian(&w).max().max(0.0)))
}

/// `sup{lambda >= 0 : lambda |phi><phi| ⪯ E} = ||E_0^{-1/2} phi||^{-2}`,
/// zero when `phi` leaves the support of `E`.
///
/// The support here is cut at the round-off floor of the eigensolver rather
/// than at the policy's `eig_zero`, so nearly singular effects still get the
/// value of the order problem.
pub fn weak_atom_bound(e: &Effect, phi: &CVector) -> Result<f64> {
    check_dims(e.dim(), phi.len())?;
    let norm = phi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    let spec = eig_hermitian(e.matrix());
    let floor = 64.0 * f64::EPSILON * e.dim() as f64 * spec.norm().max(1.0);
    let coeffs = spec.eigenvectors.adjoint() * phi;
    let mut outside = 0.0;
    let mut weighted = 0.0;
    for (k, &l) in spec.eigenvalues.iter().enumerate() {
        let c2 = coeffs[k].norm_sqr();
        if l > floor {
            weighted += c2 / l;
        } else {
            outside += c2;
        }
    }
    if outside.sqrt() > MEMBERSHIP_TOL || weighted == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / weighted)
}

/// `P ∧ R`: projection onto the intersection of the ranges.
pub fn projection_meet(
    p: &Projection,
    r: &Projection,
    pol: &TolerancePolicy,
) -> Result<Projection> {
    check_dims(p.dim(), r.dim())?;
    let basis = subspace_intersection(&p.range_basis(), &r.range_basis(), pol)?;
    Ok(Projection::from_basis(&basis))
}

/// `P ∨ R`: projection onto the sum of the ranges.
pub fn projection_join(projections: &[Projection], pol: &TolerancePolicy) -> Result<Projection> {
    let n = projections.first().map(|p| p.dim()).unwrap_or(0);
    let bases: Vec<CMatrix> = projections
        .iter()
        .map(|p| {
            check_dims(n, p.dim())?;
            Ok(p.range_basis())
        })
        .collect::<Result<_>>()?;
    let cols: usize = bases.iter().map(|b| b.ncols()).sum();
    let mut stacked = CMatrix::zeros(n, cols);
    let mut at = 0;
    for b in &bases {
        stacked.columns_mut(at, b.ncols()).copy_from(b);
        at += b.ncols();
    }
    Ok(Projection::from_basis(&orthonormal_range_basis(
        &stacked, pol,
    )))
}

/// `com(P,R) = (P∧R) ∨ (P∧R⊥) ∨ (P⊥∧R) ∨ (P⊥∧R⊥)`.
pub fn commutativity_projection(
    p: &Projection,
    r: &Projection,
    pol: &TolerancePolicy,
) -> Result<Projection> {
    check_dims(p.dim(), r.dim())?;
    let (pc, rc) = (p.complement(), r.complement());
    let meets = [
        projection_meet(p, r, pol)?,
        projection_meet(p, &rc, pol)?,
        projection_meet(&pc, r, pol)?,
        projection_meet(&pc, &rc, pol)?,
    ];
    projection_join(&meets, pol)
}

/// Outcome of a disjointness test with its certificate.
#[derive(Clone, Debug)]
pub struct Disjointness {
    pub disjoint: bool,
    /// Largest principal-angle cosine between the two supports.
    pub overlap_cosine: f64,
    /// A unit vector in the support intersection, when it is nontrivial.
    pub witness: Option<CVector>,
}

/// `E ∧ F = 0`, i.e. `ran E^{1/2} ∩ ran F^{1/2} = {0}`.
pub fn effects_disjoint(e: &Effect, f: &Effect, pol: &TolerancePolicy) -> Result<Disjointness> {
    check_dims(e.dim(), f.dim())?;
    let (cosines, vectors) = principal_cosines(&support_basis(e, pol), &support_basis(f, pol))?;
    let overlap_cosine = cosines.first().copied().unwrap_or(0.0);
    let disjoint = overlap_cosine < 1.0 - pol.rank_rel;
    let witness = (!disjoint).then(|| vectors.column(0).into_owned());
    Ok(Disjointness {
        disjoint,
        overlap_cosine,
        witness,
    })
}

/// Checks `P_{f(A)} ⪯ A({lambda : f(lambda) > 0})` for `f` given by its values
/// on the spectrum of `A` (one value per eigenvalue, in order).
pub fn support_bound_check(
    f: &[f64],
    a: &SpectralDecomposition,
    pol: &TolerancePolicy,
) -> Result<bool> {
    check_dims(a.dim(), f.len())?;
    if let Some(bad) = f.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::ParameterOutOfRange(format!(
            "function value {bad} outside [0, 1]"
        )));
    }
    for i in 1..f.len() {
        if (a.eigenvalues[i] - a.eigenvalues[i - 1]).abs() <= pol.eig_zero && f[i] != f[i - 1] {
            return Err(Error::InvalidInput(
                "function table assigns different values to one eigenvalue".into(),
            ));
        }
    }
    let mut weighted = a.eigenvectors.clone();
    for (k, &w) in f.iter().enumerate() {
        weighted.column_mut(k).scale_mut(w);
    }
    let e = Effect::new(
        HermitianMatrix::hermitian_part(&(weighted * a.eigenvectors.adjoint())),
        pol,
    )?;
    let spectral = a.columns_where_index(|k| f[k] > 0.0);
    let pe = support_projection(&e, pol);
    below(&pe.into(), &Projection::from_basis(&spectral).into(), pol)
}

/// Given `A ⪯ E` for pure operations `Lambda = M(.)M*` and `Phi = K(.)K*`,
/// returns `Psi` with `Lambda = Psi ∘ Phi`.
pub fn factor_pure_operation(
    lambda: &PureOperation,
    phi: &PureOperation,
    pol: &TolerancePolicy,
) -> Result<PureOperation> {
    Ok(PureOperation::new(factor_contraction(
        &lambda.kraus,
        &phi.kraus,
        pol,
    )?))
}

/// For a dilation `E = J*PJ`, returns `eta` in `ran PJ` with `J* eta = psi` and
/// `||eta|| <= 1` whenever `|psi><psi| ⪯ E`; `None` otherwise.
pub fn dilation_lower_bound_witness(
    e: &Effect,
    j: &CMatrix,
    p: &Projection,
    psi: &CVector,
    pol: &TolerancePolicy,
) -> Result<Option<CVector>> {
    check_dims(e.dim(), j.ncols())?;
    check_dims(p.dim(), j.nrows())?;
    check_dims(e.dim(), psi.len())?;
    let reconstructed = e.matrix().matrix() - j.adjoint() * p.matrix().matrix() * j;
    if reconstructed.norm() > 1e-8 {
        return Err(Error::InvalidDilation(format!(
            "J*PJ differs from E by {:.3e}",
            reconstructed.norm()
        )));
    }
    if psi.norm() > 1.0 + 1e-12 {
        return Err(Error::ParameterOutOfRange(format!(
            "||psi|| = {} > 1",
            psi.norm()
        )));
    }
    if psi.norm() == 0.0 {
        return Ok(Some(CVector::zeros(j.nrows())));
    }
    let atom = HermitianMatrix::outer(psi);
    if !below_matrix(&atom, e.matrix(), pol)? {
        return Ok(None);
    }
    let m = Contraction(CMatrix::from_row_slice(
        1,
        psi.len(),
        psi.adjoint().as_slice(),
    ));
    let k = Contraction(p.matrix().matrix() * j);
    let c = factor_contraction(&m, &k, pol)?;
    let eta: CVector = c.matrix().adjoint().column(0).into_owned();
    Ok(Some(eta))
}

/// Vector with entries `c_k` scaled to unit norm.
pub fn normalized(v: &CVector) -> CVector {
    v.unscale(v.norm())
}
