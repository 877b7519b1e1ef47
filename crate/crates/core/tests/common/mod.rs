//! Random generators and brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use qeffect::numerics::{eig_hermitian, min_eigenvalue, orthonormal_range_basis};
use qeffect::{
    CMatrix, CVector, DiscreteObservable, Effect, HermitianMatrix, Projection, TolerancePolicy, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn unit_vector(n: usize, rng: &mut impl Rng) -> CVector {
    let v = gaussian_matrix(n, 1, rng).column(0).into_owned();
    v.unscale(v.norm())
}

/// `rows × cols` matrix with orthonormal columns, `cols <= rows`.
pub fn random_isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    let q = gaussian_matrix(rows, cols, rng).qr().q();
    q.columns(0, cols).into_owned()
}

pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMatrix {
    random_isometry(n, n, rng)
}

/// `U diag(s) V*` with `rank` singular values drawn from `[s_min, s_max]`.
pub fn random_contraction(
    rows: usize,
    cols: usize,
    rank: usize,
    s_min: f64,
    s_max: f64,
    rng: &mut impl Rng,
) -> CMatrix {
    let u = random_isometry(rows, rank, rng);
    let v = random_isometry(cols, rank, rng);
    let s: Vec<f64> = (0..rank).map(|_| rng.gen_range(s_min..=s_max)).collect();
    let mut us = u;
    for (j, sj) in s.iter().enumerate() {
        us.column_mut(j).scale_mut(*sj);
    }
    us * v.adjoint()
}

/// An effect with `kernel` zero eigenvalues and the rest in `[lo, 1]`; returns
/// the eigenbasis too.
pub fn random_effect(n: usize, kernel: usize, lo: f64, rng: &mut impl Rng) -> (Effect, CMatrix) {
    let u = random_unitary(n, rng);
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            if i < kernel {
                0.0
            } else {
                rng.gen_range(lo..=1.0)
            }
        })
        .collect();
    let d = HermitianMatrix::from_diagonal(&diag);
    let m = d.conjugate_by(&u);
    (Effect::from_matrix(m).expect("spectrum in [0, 1]"), u)
}

/// Generic POVM `S^{-1/2} A_i* A_i S^{-1/2}` with `S = Σ A_i* A_i` and
/// `A_i` of the given row counts.
pub fn random_povm(n: usize, ranks: &[usize], rng: &mut impl Rng) -> DiscreteObservable {
    assert!(ranks.iter().sum::<usize>() >= n);
    let blocks: Vec<CMatrix> = ranks.iter().map(|&r| gaussian_matrix(r, n, rng)).collect();
    let s = blocks
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, a| acc + a.adjoint() * a);
    let spec = eig_hermitian(&HermitianMatrix::hermitian_part(&s));
    let inv_sqrt = spec.map(|l| 1.0 / l.sqrt());
    let effects = blocks
        .iter()
        .map(|a| {
            let m = inv_sqrt.matrix() * a.adjoint() * a * inv_sqrt.matrix();
            Effect::new(
                HermitianMatrix::hermitian_part(&m),
                &TolerancePolicy::default(),
            )
            .expect("effect")
        })
        .collect();
    DiscreteObservable::with_index_labels(effects).expect("normalised")
}

/// Random outcome ranks summing to at least `n`, each below `n`.
pub fn random_ranks(n: usize, outcomes: usize, rng: &mut impl Rng) -> Vec<usize> {
    let cap = (n / 2).max(1);
    let mut ranks: Vec<usize> = (0..outcomes).map(|_| rng.gen_range(1..=cap)).collect();
    let mut i = 0;
    while ranks.iter().sum::<usize>() < n {
        ranks[i % outcomes] += 1;
        i += 1;
    }
    ranks
}

/// Projective observable grouping consecutive columns of `basis` into blocks
/// of the given sizes.
pub fn projective_from_basis(basis: &CMatrix, sizes: &[usize]) -> DiscreteObservable {
    assert_eq!(sizes.iter().sum::<usize>(), basis.ncols());
    let mut start = 0;
    let effects = sizes
        .iter()
        .map(|&k| {
            let cols = basis.columns(start, k).into_owned();
            start += k;
            Effect::from(Projection::from_basis(&cols))
        })
        .collect();
    DiscreteObservable::with_index_labels(effects).expect("normalised")
}

/// Random orthonormal basis whose first vector is `v` up to a phase.
pub fn basis_through(v: &CVector, rng: &mut impl Rng) -> CMatrix {
    let n = v.len();
    let mut m = gaussian_matrix(n, n, rng);
    m.set_column(0, v);
    m.qr().q()
}

/// Random split of `n` into `parts` positive sizes.
pub fn random_sizes(n: usize, parts: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut sizes = vec![1; parts];
    for _ in parts..n {
        let k = rng.gen_range(0..parts);
        sizes[k] += 1;
    }
    sizes
}

/// `sup{λ in [lo, hi] : feasible(λ)}` for a monotone predicate, by bisection.
pub fn bisect_sup(mut lo: f64, mut hi: f64, feasible: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `sup{λ >= 0 : λ|φ><φ| ⪯ E}` by bisection on the smallest eigenvalue.
pub fn weak_atom_oracle(e: &Effect, phi: &CVector) -> f64 {
    let atom = HermitianMatrix::outer(phi);
    let top = e.matrix().expectation(phi).max(0.0);
    bisect_sup(0.0, top, |l| {
        min_eigenvalue(&(e.matrix() - &atom.scale(l))) >= -1e-13
    })
}

pub fn set_from_mask(mask: u32, d: usize) -> BTreeSet<usize> {
    (0..d).filter(|i| mask >> i & 1 == 1).collect()
}

/// Rank of a range by SVD, independent of the eigen-based rank used in the
/// library.
pub fn svd_rank(m: &CMatrix, rel: f64) -> usize {
    let s = m.clone().svd(false, false).singular_values;
    let top = s.iter().cloned().fold(0.0, f64::max).max(1.0);
    s.iter().filter(|&&x| x > rel * top).count()
}

pub fn range_dim(m: &CMatrix) -> usize {
    orthonormal_range_basis(m, &TolerancePolicy::default()).ncols()
}
