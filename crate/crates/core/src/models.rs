//! Finite-dimensional model pairs: the cyclic position/momentum lattice,
//! haversine effects on a truncated line, multislit observables, number and
//! phase, oscillator position and number, and lattice convolutions.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::effects::{effects_disjoint, projection_meet, weak_atom_bound, Effect, Projection};
use crate::error::{Error, Result};
use crate::incompat::{max_joint_lower_bound, LowerBoundOptions};
use crate::numerics::{basis_vector, dft_matrix, CMatrix, HermitianMatrix, TolerancePolicy, C64};
use crate::observables::DiscreteObservable;

/// Relative band allowed by trend verdicts.
pub const TREND_BAND: f64 = 0.1;
/// Largest truncation accepted by [`oscillator_position_number`].
pub const OSCILLATOR_CAP: usize = 200;

/// Position and momentum on `Z_d`.
#[derive(Clone, Debug)]
pub struct CyclicLattice {
    pub d: usize,
    pub position: DiscreteObservable,
    pub momentum: DiscreteObservable,
    pub fourier: CMatrix,
}

impl CyclicLattice {
    /// `Q(X)`.
    pub fn position_set(&self, x: &BTreeSet<usize>) -> Projection {
        let diag: Vec<f64> = (0..self.d)
            .map(|j| if x.contains(&j) { 1.0 } else { 0.0 })
            .collect();
        Projection::new(HermitianMatrix::from_diagonal(&diag)).expect("diagonal 0/1 matrix")
    }

    /// `P(Y) = F Q(Y) F*`.
    pub fn momentum_set(&self, y: &BTreeSet<usize>) -> Projection {
        let idx: Vec<usize> = y.iter().copied().collect();
        let cols = CMatrix::from_fn(self.d, idx.len(), |i, j| self.fourier[(i, idx[j])]);
        Projection::from_basis(&cols)
    }
}

fn index_labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn cyclic_lattice(d: usize) -> Result<CyclicLattice> {
    if d < 2 {
        return Err(Error::ParameterOutOfRange(format!("lattice size {d} < 2")));
    }
    let fourier = dft_matrix(d);
    let position =
        DiscreteObservable::from_orthonormal_basis(index_labels("x", d), &CMatrix::identity(d, d))?;
    let momentum = DiscreteObservable::from_orthonormal_basis(index_labels("p", d), &fourier)?;
    Ok(CyclicLattice {
        d,
        position,
        momentum,
        fourier,
    })
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|k| k * k <= n).all(|k| n % k != 0)
}

/// Brute-force `Q(X) ∧ P(Y)` with the size rule for prime `d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyCheck {
    pub meet_rank: usize,
    /// `|X| + |Y| >= d + 1`; only asserted for prime `d`.
    pub predicted_nonzero: Option<bool>,
}

impl UncertaintyCheck {
    pub fn agrees(&self) -> bool {
        self.predicted_nonzero
            .is_none_or(|p| p == (self.meet_rank > 0))
    }
}

pub fn support_uncertainty_rule(
    lattice: &CyclicLattice,
    x: &BTreeSet<usize>,
    y: &BTreeSet<usize>,
    pol: &TolerancePolicy,
) -> Result<UncertaintyCheck> {
    let d = lattice.d;
    if x.iter().chain(y.iter()).any(|&i| i >= d) {
        return Err(Error::InvalidInput(format!("index set leaves Z_{d}")));
    }
    let meet = projection_meet(&lattice.position_set(x), &lattice.momentum_set(y), pol)?;
    Ok(UncertaintyCheck {
        meet_rank: meet.rank(),
        predicted_nonzero: is_prime(d).then(|| x.len() + y.len() > d),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutationCheck {
    pub commutator_norm: f64,
    pub commute: bool,
}

/// `[Q(X), P(Y)]` for `X` invariant under shifts by `a` and `Y` invariant
/// under shifts by `b`, with `d = a b`.
pub fn periodic_commutation(
    lattice: &CyclicLattice,
    a: usize,
    b: usize,
    x: &BTreeSet<usize>,
    y: &BTreeSet<usize>,
) -> Result<CommutationCheck> {
    let d = lattice.d;
    if a * b != d || a == 0 {
        return Err(Error::InvalidInput(format!("{a} * {b} != {d}")));
    }
    let periodic = |s: &BTreeSet<usize>, period: usize| {
        s.iter().all(|&i| i < d && s.contains(&((i + period) % d)))
    };
    if !periodic(x, a) {
        return Err(Error::InvalidInput(format!(
            "position set is not {a}-periodic"
        )));
    }
    if !periodic(y, b) {
        return Err(Error::InvalidInput(format!(
            "momentum set is not {b}-periodic"
        )));
    }
    let q = lattice.position_set(x);
    let p = lattice.momentum_set(y);
    let (qm, pm) = (q.matrix().matrix(), p.matrix().matrix());
    let norm = (qm * pm - pm * qm).norm();
    Ok(CommutationCheck {
        commutator_norm: norm,
        commute: norm <= 1e-9,
    })
}

/// Values in `[0, 1]` on a finite grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionOnGrid {
    values: Vec<f64>,
    grid: Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    Cyclic,
    /// Centered points `(j - n/2) * spacing`.
    Line {
        spacing: f64,
    },
}

impl FunctionOnGrid {
    pub fn new(values: Vec<f64>, grid: Grid) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::ParameterOutOfRange(format!(
                "grid value {v} outside [0, 1]"
            )));
        }
        Ok(Self { values, grid })
    }

    pub fn cyclic(values: Vec<f64>) -> Result<Self> {
        Self::new(values, Grid::Cyclic)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support(&self) -> BTreeSet<usize> {
        (0..self.len()).filter(|&i| self.values[i] > 0.0).collect()
    }
}

/// `(μ ∗ O)(x) = Σ_y μ(x - y) O(y)` on `Z_d`.
pub fn lattice_convolution(
    mu: &FunctionOnGrid,
    o: &DiscreteObservable,
) -> Result<DiscreteObservable> {
    if mu.grid() != &Grid::Cyclic {
        return Err(Error::InvalidInput("convolution needs a cyclic pmf".into()));
    }
    let d = o.len();
    if mu.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: mu.len(),
        });
    }
    let total: f64 = mu.values().iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::ParameterOutOfRange(format!("pmf sums to {total}")));
    }
    let n = o.dim();
    let effects = (0..d)
        .map(|x| {
            let mut acc = HermitianMatrix::zeros(n);
            for y in 0..d {
                let w = mu.values()[(x + d - y) % d];
                if w > 0.0 {
                    acc = &acc + &(o.effect(y).matrix() * w);
                }
            }
            Effect::from_matrix(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    DiscreteObservable::new(o.labels().to_vec(), effects)
}

/// `supp(χ_X ∗ μ) = X + supp μ` on `Z_d`.
pub fn smeared_support(x: &BTreeSet<usize>, mu: &FunctionOnGrid) -> BTreeSet<usize> {
    let d = mu.len();
    let s = mu.support();
    x.iter()
        .flat_map(|&a| s.iter().map(move |&b| (a + b) % d))
        .collect()
}

/// Slit position `Q_d` and periodic momentum class `P_mod` on `C^s ⊗ C^m`.
pub fn multislit(s: usize, m: usize) -> Result<(DiscreteObservable, DiscreteObservable)> {
    if s < 2 || m < 1 {
        return Err(Error::ParameterOutOfRange(format!(
            "multislit needs s >= 2 and m >= 1, got ({s}, {m})"
        )));
    }
    let f = dft_matrix(s);
    let block = |basis: &CMatrix, k: usize| -> Result<Effect> {
        let mut cols = CMatrix::zeros(s * m, m);
        for r in 0..m {
            for i in 0..s {
                cols[(i * m + r, r)] = basis[(i, k)];
            }
        }
        Ok(Effect::from(Projection::from_basis(&cols)))
    };
    let id = CMatrix::identity(s, s);
    let q = (0..s).map(|n| block(&id, n)).collect::<Result<Vec<_>>>()?;
    let p = (0..s).map(|k| block(&f, k)).collect::<Result<Vec<_>>>()?;
    Ok((
        DiscreteObservable::new(index_labels("slit", s), q)?,
        DiscreteObservable::new(index_labels("k", s), p)?,
    ))
}

/// `f0(x) = ½(1 - cos x)`.
pub fn haversin(x: f64) -> f64 {
    0.5 * (1.0 - x.cos())
}

/// `g0(p) = ½(1 + cos(p / 2π))`, period `(2π)²`.
pub fn havercos(p: f64) -> f64 {
    0.5 * (1.0 + (p / (2.0 * PI)).cos())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HaversineMode {
    Commuting,
    Compressed,
}

#[derive(Clone, Debug)]
pub struct HaversinePair {
    pub e: Effect,
    pub f: Effect,
    pub positions: Vec<f64>,
    pub momenta: Vec<f64>,
    /// Momentum modes kept by the window `|p| <= ½`.
    pub window_modes: usize,
}

/// `E = f0(Q)` and `F = g0(P)` (optionally windowed to `|p| <= ½`) on the
/// centered grid `x_j = (j - d/2) δ`, `δ = √(2π/d)`, with momentum
/// eigenvectors `d^{-1/2} exp(-i x_j p_k)`.
pub fn haversine_pair(d: usize, mode: HaversineMode) -> Result<HaversinePair> {
    if d < 16 || !d.is_multiple_of(2) {
        return Err(Error::ParameterOutOfRange(format!(
            "haversine grid needs even d >= 16, got {d}"
        )));
    }
    let delta = (2.0 * PI / d as f64).sqrt();
    let grid: Vec<f64> = (0..d)
        .map(|j| (j as f64 - d as f64 / 2.0) * delta)
        .collect();
    let norm = 1.0 / (d as f64).sqrt();
    let u = CMatrix::from_fn(d, d, |j, k| C64::from_polar(norm, -grid[j] * grid[k]));
    let e = Effect::from_matrix(HermitianMatrix::from_diagonal(
        &grid.iter().map(|&x| haversin(x)).collect::<Vec<_>>(),
    ))?;
    let weights: Vec<f64> = grid
        .iter()
        .map(|&p| match mode {
            HaversineMode::Commuting => havercos(p),
            HaversineMode::Compressed if p.abs() <= 0.5 => havercos(p),
            HaversineMode::Compressed => 0.0,
        })
        .collect();
    let window_modes = grid.iter().filter(|p| p.abs() <= 0.5).count();
    let keep: Vec<usize> = (0..d).filter(|&k| weights[k] > 0.0).collect();
    let mut cols = CMatrix::zeros(d, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        cols.set_column(c, &u.column(k).scale(weights[k].sqrt()));
    }
    let f = Effect::from_matrix(HermitianMatrix::hermitian_part(&(&cols * cols.adjoint())))?;
    Ok(HaversinePair {
        e,
        f,
        positions: grid.clone(),
        momenta: grid,
        window_modes,
    })
}

/// One row of a [`TrendReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub parameter: usize,
    pub value: f64,
    /// Certified upper end of the bracket around `value`, when one exists.
    pub upper: Option<f64>,
    pub overlap_dim: Option<usize>,
    pub control: Option<f64>,
    pub inconclusive: bool,
}

/// A measured quantity along an increasing parameter list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub parameter: String,
    pub quantity: String,
    pub points: Vec<TrendPoint>,
    /// Every step satisfies `v[i+1] <= (1 + band) v[i]`.
    pub non_increasing: bool,
    pub band: f64,
}

impl TrendReport {
    pub fn new(parameter: &str, quantity: &str, points: Vec<TrendPoint>) -> Self {
        let non_increasing = points
            .windows(2)
            .all(|w| w[1].value <= (1.0 + TREND_BAND) * w[0].value + 1e-12);
        Self {
            parameter: parameter.into(),
            quantity: quantity.into(),
            points,
            non_increasing,
            band: TREND_BAND,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }
}

fn check_parameter_list(list: &[usize]) -> Result<()> {
    if list.len() < 4 {
        return Err(Error::InvalidInput(
            "trend needs at least 4 parameter values".into(),
        ));
    }
    if list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "trend parameters must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Options for [`haversine_trend`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaversineTrendOptions {
    pub compressed: LowerBoundOptions,
    /// The commuting control is only bracketed by the parallel sum plus this
    /// many oracle calls.
    pub control: LowerBoundOptions,
}

impl Default for HaversineTrendOptions {
    fn default() -> Self {
        Self {
            compressed: LowerBoundOptions::default(),
            control: LowerBoundOptions {
                max_evaluations: 0,
                ..LowerBoundOptions::default()
            },
        }
    }
}

/// Support overlap and `c_d = max tr{A : 0 ⪯ A ⪯ E, A ⪯ F}` of the compressed
/// haversine pair per `d`, with the commuting pair as control.
pub fn haversine_trend(
    d_list: &[usize],
    opts: &HaversineTrendOptions,
    pol: &TolerancePolicy,
) -> Result<TrendReport> {
    check_parameter_list(d_list)?;
    let points = d_list
        .par_iter()
        .map(|&d| {
            let comp = haversine_pair(d, HaversineMode::Compressed)?;
            let c = max_joint_lower_bound(&comp.e, &comp.f, pol, &opts.compressed)?;
            let comm = haversine_pair(d, HaversineMode::Commuting)?;
            let control = max_joint_lower_bound(&comm.e, &comm.f, pol, &opts.control)?;
            Ok(TrendPoint {
                parameter: d,
                value: c.value,
                upper: Some(c.upper),
                overlap_dim: Some(c.overlap_dim),
                control: Some(control.value),
                inconclusive: c.inconclusive,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrendReport::new("d", "max_joint_lower_bound", points))
}

/// An arc `[a, b)` of the unit circle with `0 <= a < b <= a + 2π`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleInterval {
    pub start: f64,
    pub end: f64,
}

impl AngleInterval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        let len = end - start;
        if !(len > 0.0 && len <= 2.0 * PI + 1e-12) || !start.is_finite() {
            return Err(Error::ParameterOutOfRange(format!(
                "degenerate arc [{start}, {end})"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// `E(X)_{nm} = (1/2π) ∫_X e^{i(n-m)θ} dθ` on `span{|0>, ..., |N-1>}`.
pub fn phase_effect(n_trunc: usize, arc: &AngleInterval) -> Result<Effect> {
    if n_trunc < 4 {
        return Err(Error::ParameterOutOfRange(format!(
            "truncation {n_trunc} < 4"
        )));
    }
    let (a, b) = (arc.start, arc.end);
    let m = CMatrix::from_fn(n_trunc, n_trunc, |n, m| {
        let k = n as f64 - m as f64;
        if n == m {
            C64::new(arc.length() / (2.0 * PI), 0.0)
        } else {
            (C64::from_polar(1.0, k * b) - C64::from_polar(1.0, k * a))
                / C64::new(0.0, 2.0 * PI * k)
        }
    });
    Effect::new(HermitianMatrix::new(m)?, &TolerancePolicy::default())
}

/// Phase effects for each arc and the number observable, truncated at `N`.
pub fn number_phase(
    n_trunc: usize,
    arcs: &[AngleInterval],
) -> Result<(Vec<Effect>, DiscreteObservable)> {
    let effects = arcs
        .iter()
        .map(|x| phase_effect(n_trunc, x))
        .collect::<Result<Vec<_>>>()?;
    let number = DiscreteObservable::from_orthonormal_basis(
        index_labels("n", n_trunc),
        &CMatrix::identity(n_trunc, n_trunc),
    )?;
    Ok((effects, number))
}

/// `sup{λ : λ|n><n| ⪯ E_N(X)}` along `n_list`.
pub fn number_phase_trend(n_list: &[usize], arc: &AngleInterval, n: usize) -> Result<TrendReport> {
    check_parameter_list(n_list)?;
    let points = n_list
        .iter()
        .map(|&nt| {
            if n >= nt {
                return Err(Error::ParameterOutOfRange(format!(
                    "number state {n} outside truncation {nt}"
                )));
            }
            let e = phase_effect(nt, arc)?;
            Ok(TrendPoint {
                parameter: nt,
                value: weak_atom_bound(&e, &basis_vector(nt, n))?,
                upper: None,
                overlap_dim: None,
                control: None,
                inconclusive: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrendReport::new("N", "weak_atom_bound", points))
}

/// Hermite-function position effects from Gauss–Hermite quadrature.
#[derive(Clone, Debug)]
pub struct OscillatorModel {
    pub n_trunc: usize,
    pub nodes: Vec<f64>,
    /// `samples[(n, j)] = √w_j h_n(x_j) e^{x_j²/2}`, i.e. the Golub–Welsch
    /// eigenvector components.
    samples: DMatrix<f64>,
}

impl OscillatorModel {
    /// `E(X)_{nm} ≈ Σ_{x_j ∈ [a, b]} w_j h_n(x_j) h_m(x_j) e^{x_j²}`.
    pub fn position_effect(&self, a: f64, b: f64) -> Result<Effect> {
        if !(a < b) {
            return Err(Error::ParameterOutOfRange(format!(
                "empty interval [{a}, {b}]"
            )));
        }
        let n = self.n_trunc;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (j, &x) in self.nodes.iter().enumerate() {
            if x >= a && x <= b {
                let col = self.samples.column(j);
                m += col * col.transpose();
            }
        }
        let cm = m.map(|v| C64::new(v, 0.0));
        Effect::new(
            HermitianMatrix::hermitian_part(&cm),
            &TolerancePolicy::default(),
        )
    }

    pub fn number(&self) -> Result<DiscreteObservable> {
        let n = self.n_trunc;
        DiscreteObservable::from_orthonormal_basis(index_labels("n", n), &CMatrix::identity(n, n))
    }
}

/// Golub–Welsch nodes for the weight `e^{-x²}` with `2N` points; the first `N`
/// rows of the Jacobi eigenvector matrix sample the Hermite functions.
pub fn oscillator_position_number(n_trunc: usize) -> Result<OscillatorModel> {
    if n_trunc < 4 {
        return Err(Error::ParameterOutOfRange(format!(
            "truncation {n_trunc} < 4"
        )));
    }
    if n_trunc > OSCILLATOR_CAP {
        return Err(Error::ParameterOutOfRange(format!(
            "truncation {n_trunc} exceeds the quadrature cap {OSCILLATOR_CAP}"
        )));
    }
    let nq = 2 * n_trunc;
    let jacobi = DMatrix::<f64>::from_fn(nq, nq, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut order: Vec<usize> = (0..nq).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let nodes: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut samples = DMatrix::<f64>::zeros(n_trunc, nq);
    for (j, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let sign = if v[0] < 0.0 { -1.0 } else { 1.0 };
        for n in 0..n_trunc {
            samples[(n, j)] = sign * v[n];
        }
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::ParameterOutOfRange("quadrature underflow".into()));
    }
    Ok(OscillatorModel {
        n_trunc,
        nodes,
        samples,
    })
}

/// `sup{λ : λ|n><n| ⪯ E_N([a, b])}` for the oscillator along `n_list`.
pub fn oscillator_trend(n_list: &[usize], a: f64, b: f64, n: usize) -> Result<TrendReport> {
    check_parameter_list(n_list)?;
    let points = n_list
        .iter()
        .map(|&nt| {
            let model = oscillator_position_number(nt)?;
            let e = model.position_effect(a, b)?;
            Ok(TrendPoint {
                parameter: nt,
                value: weak_atom_bound(&e, &basis_vector(nt, n))?,
                upper: None,
                overlap_dim: None,
                control: None,
                inconclusive: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrendReport::new("N", "weak_atom_bound", points))
}

/// `true` when every `(Q_d(n), P_mod(k))` pair is disjoint.
pub fn multislit_all_disjoint(
    q: &DiscreteObservable,
    p: &DiscreteObservable,
    pol: &TolerancePolicy,
) -> Result<bool> {
    for a in q.effects() {
        for b in p.effects() {
            if !effects_disjoint(a, b, pol)?.disjoint {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::support_projection;
    use crate::observables::com_observables;

    fn pol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    #[test]
    fn lattice_examples() {
        assert!(cyclic_lattice(1).is_err());
        let l = cyclic_lattice(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(
            (l.fourier[(0, 1)].re - s).abs() < 1e-15 && (l.fourier[(1, 1)].re + s).abs() < 1e-15
        );
        let l = cyclic_lattice(3).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                assert!((l.fourier[(j, k)].norm_sqr() - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        let total = l
            .momentum
            .effects()
            .iter()
            .fold(HermitianMatrix::zeros(3), |acc, e| &acc + e.matrix());
        assert!(total.distance(&HermitianMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn fourier_covariance() {
        let l = cyclic_lattice(6).unwrap();
        for k in 0..6 {
            let conj = l.position.effect(k).matrix().conjugate_by(&l.fourier);
            assert!(conj.distance(l.momentum.effect(k).matrix()) < 1e-12);
        }
    }

    #[test]
    fn uncertainty_examples() {
        let l = cyclic_lattice(5).unwrap();
        let r = support_uncertainty_rule(&l, &set(&[0, 1]), &set(&[0, 1, 2]), &pol()).unwrap();
        assert_eq!(r.meet_rank, 0);
        assert!(r.agrees());
        let r = support_uncertainty_rule(&l, &set(&[0, 1, 2]), &set(&[1, 2, 4]), &pol()).unwrap();
        assert!(r.meet_rank > 0);
        assert!(r.agrees());
        let r = support_uncertainty_rule(&l, &set(&[0, 1, 2, 3, 4]), &set(&[3]), &pol()).unwrap();
        assert_eq!(r.meet_rank, 1);
        let l6 = cyclic_lattice(6).unwrap();
        let r = support_uncertainty_rule(&l6, &set(&[0, 2, 4]), &set(&[0, 3]), &pol()).unwrap();
        assert_eq!(r.predicted_nonzero, None);
    }

    #[test]
    fn periodic_commutation_examples() {
        let l = cyclic_lattice(6).unwrap();
        let r = periodic_commutation(&l, 2, 3, &set(&[0, 2, 4]), &set(&[0, 3])).unwrap();
        assert!(r.commute, "{}", r.commutator_norm);
        assert!(periodic_commutation(&l, 2, 3, &set(&[0, 1]), &set(&[0, 3])).is_err());
        let full =
            periodic_commutation(&l, 2, 3, &set(&[0, 1, 2, 3, 4, 5]), &set(&[1, 4])).unwrap();
        assert!(full.commute);
    }

    #[test]
    fn multislit_examples() {
        let (q, p) = multislit(2, 1).unwrap();
        let l = cyclic_lattice(2).unwrap();
        for k in 0..2 {
            assert!(q.effect(k).matrix().distance(l.position.effect(k).matrix()) < 1e-12);
            assert!(p.effect(k).matrix().distance(l.momentum.effect(k).matrix()) < 1e-12);
        }
        let (q, p) = multislit(3, 4).unwrap();
        assert_eq!(q.dim(), 12);
        assert!(multislit_all_disjoint(&q, &p, &pol()).unwrap());
        assert!(com_observables(&q, &p, &pol()).unwrap().is_zero());
        assert!(multislit(1, 3).is_err());
    }

    #[test]
    fn convolution_examples() {
        let l = cyclic_lattice(5).unwrap();
        let point = FunctionOnGrid::cyclic(vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let out = lattice_convolution(&point, &l.momentum).unwrap();
        for k in 0..5 {
            assert!(
                out.effect(k)
                    .matrix()
                    .distance(l.momentum.effect(k).matrix())
                    < 1e-14
            );
        }
        let uniform = FunctionOnGrid::cyclic(vec![0.2; 5]).unwrap();
        let out = lattice_convolution(&uniform, &l.position).unwrap();
        for k in 0..5 {
            assert!(
                out.effect(k)
                    .matrix()
                    .distance(&HermitianMatrix::scalar(5, 0.2))
                    < 1e-14
            );
        }
        let bad = FunctionOnGrid::cyclic(vec![0.5, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(lattice_convolution(&bad, &l.position).is_err());
    }

    #[test]
    fn smeared_lattice_effects_stay_disjoint() {
        // |supp(χ_X ∗ μ)| + |Y| <= d keeps the smeared position disjoint from P(Y)
        let l = cyclic_lattice(7).unwrap();
        let mu = FunctionOnGrid::cyclic(vec![0.6, 0.4, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let smeared = lattice_convolution(&mu, &l.position).unwrap();
        let x = set(&[0, 1]);
        assert_eq!(smeared_support(&x, &mu).len(), 3);
        let ex = smeared.effect_of(&x).unwrap();
        let py = Effect::from(l.momentum_set(&set(&[0, 1, 2, 3])));
        assert!(effects_disjoint(&ex, &py, &pol()).unwrap().disjoint);
        let py = Effect::from(l.momentum_set(&set(&[0, 1, 2, 3, 4])));
        assert!(!effects_disjoint(&ex, &py, &pol()).unwrap().disjoint);
    }

    #[test]
    fn haversine_examples() {
        assert!(haversine_pair(15, HaversineMode::Compressed).is_err());
        assert!(haversine_pair(8, HaversineMode::Compressed).is_err());
        let h = haversine_pair(32, HaversineMode::Compressed).unwrap();
        let zero = h.positions.iter().position(|&x| x == 0.0).unwrap();
        assert_eq!(h.e.matrix().matrix()[(zero, zero)].re, 0.0);
        assert_eq!(h.window_modes, 3);
        assert_eq!(support_projection(&h.f, &pol()).rank(), 3);
        assert!(haversin(PI) == 1.0);
    }

    #[test]
    fn number_phase_examples() {
        let full = AngleInterval::new(0.0, 2.0 * PI).unwrap();
        let e = phase_effect(8, &full).unwrap();
        assert!(e.matrix().distance(&HermitianMatrix::identity(8)) < 1e-14);
        let half = AngleInterval::new(0.0, PI).unwrap();
        let e = phase_effect(8, &half).unwrap();
        let m = e.matrix().matrix();
        assert!((m[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((m[(1, 0)] - C64::new(0.0, 1.0 / PI)).norm() < 1e-15);
        assert!(AngleInterval::new(1.0, 1.0).is_err());
        let comp = phase_effect(8, &AngleInterval::new(PI, 2.0 * PI).unwrap()).unwrap();
        assert!((e.matrix() + comp.matrix()).distance(&HermitianMatrix::identity(8)) < 1e-10);
    }

    #[test]
    fn number_phase_trend_control() {
        let full = AngleInterval::new(0.0, 2.0 * PI).unwrap();
        let r = number_phase_trend(&[8, 16, 32, 64], &full, 1).unwrap();
        assert!(r.values().iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!(number_phase_trend(&[8, 16, 32], &full, 1).is_err());
    }

    #[test]
    fn oscillator_quadrature_is_orthonormal() {
        let model = oscillator_position_number(12).unwrap();
        let e = model
            .position_effect(f64::NEG_INFINITY, f64::INFINITY)
            .unwrap();
        assert!(e.matrix().distance(&HermitianMatrix::identity(12)) < 1e-8);
        let bounded = model.position_effect(-1.0, 1.0).unwrap();
        let v0 = basis_vector(12, 0);
        let w = weak_atom_bound(&bounded, &v0).unwrap();
        assert!(w <= bounded.matrix().expectation(&v0) + 1e-12);
        assert!(oscillator_position_number(OSCILLATOR_CAP + 1).is_err());
    }
}
