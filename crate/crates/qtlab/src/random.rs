//! Seeded generators for tests, the self test, and reproducible experiments.
//!
//! Everything takes an explicit RNG so a fixed seed reproduces the exact
//! same tensors across runs and platforms.

use crate::qmat::QMat;
use crate::qtensor::QTensor;
use crate::spectral::BlockDiag;
use crate::{Options, Quat};

pub use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha8Rng;

/// Quaternion with components uniform in [-1, 1).
pub fn random_quat<R: Rng + ?Sized>(rng: &mut R) -> Quat {
    let mut c = || rng.random_range(-1.0..1.0);
    Quat::new(c(), c(), c(), c())
}

pub fn random_qmat<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> QMat {
    let entries: Vec<Quat> = (0..m * n).map(|_| random_quat(rng)).collect();
    QMat::from_fn(m, n, |i, j| entries[i * n + j])
}

/// Unitary matrix from Gram-Schmidt over random columns; restarts on the
/// measure-zero event of a dependent draw.
pub fn random_unitary_qmat<R: Rng + ?Sized>(rng: &mut R, n: usize) -> QMat {
    'outer: loop {
        let cand = random_qmat(rng, n, n);
        let mut cols: Vec<QMat> = Vec::with_capacity(n);
        for j in 0..n {
            let mut v = cand.column(j);
            for u in &cols {
                let coef = crate::qmat::col_dot(u, &v);
                v = &v - &u.scale_right(coef);
            }
            let nn = v.norm_fro();
            if nn < 1e-8 {
                continue 'outer;
            }
            cols.push(v.scale(1.0 / nn));
        }
        return crate::qmat::from_columns(&cols);
    }
}

/// Matrix with Drazin index exactly `k`: a well-conditioned invertible core
/// of size n - k plus a single nilpotent shift block of size k, conjugated
/// by a random unitary. `k = 0` yields an invertible matrix.
pub fn qmat_with_index<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> QMat {
    assert!(k <= n, "index {k} cannot exceed dimension {n}");
    let c = n - k;
    let mut core = QMat::zeros(n, n);
    if c > 0 {
        let vals: Vec<f64> = (0..c).map(|_| rng.random_range(0.5..2.0)).collect();
        let q1 = random_unitary_qmat(rng, c);
        let q2 = random_unitary_qmat(rng, c);
        let mid = q1
            .matmul(&QMat::from_diag_real(c, c, &vals))
            .unwrap()
            .matmul(&q2.adjoint())
            .unwrap();
        for i in 0..c {
            for j in 0..c {
                core.set(i, j, mid.get(i, j));
            }
        }
    }
    for i in 0..k.saturating_sub(1) {
        core.set(c + i, c + i + 1, Quat::ONE);
    }
    let w = random_unitary_qmat(rng, n);
    w.matmul(&core).unwrap().matmul(&w.adjoint()).unwrap()
}

pub fn random_qtensor<R: Rng + ?Sized>(rng: &mut R, n1: usize, n2: usize, n3: usize) -> QTensor {
    let slices: Vec<QMat> = (0..n3).map(|_| random_qmat(rng, n1, n2)).collect();
    QTensor::new(slices).expect("positive dimensions")
}

/// Tensor whose transform blocks have the prescribed Drazin indices, so the
/// tensor index is exactly `ks.iter().max()`.
pub fn qtensor_with_block_indices<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    n3: usize,
    ks: &[usize],
) -> QTensor {
    assert_eq!(ks.len(), n3, "one index per block");
    let blocks: Vec<QMat> = ks.iter().map(|&k| qmat_with_index(rng, n, k)).collect();
    BlockDiag::new(blocks)
        .and_then(|bd| bd.reassemble())
        .expect("blocks always reassemble")
}

/// Pair (A, E) where E lives in the core of A (meaning A * A^D * E * A * A^D
/// equals E) and ||A^D * E||_s equals `target`. Requires a nonzero core, so
/// at least one entry of `ks` must be below `n`.
pub fn core_perturbation_pair<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    n3: usize,
    ks: &[usize],
    target: f64,
) -> (QTensor, QTensor) {
    assert!(
        ks.iter().any(|&k| k < n),
        "all-nilpotent blocks leave no core to perturb"
    );
    let opts = Options::fast();
    let a = qtensor_with_block_indices(rng, n, n3, ks);
    let ad = a.qt_drazin(None, &opts).expect("planted index is finite");
    let p = a.qt_product(&ad).expect("square");
    for _ in 0..8 {
        let e0 = random_qtensor(rng, n, n, n3);
        let e1 = p.qt_product(&e0).unwrap().qt_product(&p).unwrap();
        let nade = ad
            .qt_product(&e1)
            .unwrap()
            .qt_spectral_norm(&opts)
            .expect("norm of a finite tensor");
        if nade > 1e-10 {
            return (a, e1.scale(target / nade));
        }
    }
    panic!("could not draw a perturbation with nonzero core component");
}
