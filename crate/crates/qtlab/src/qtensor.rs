//! Third order quaternion tensors and the z-block circulant representation.
//!
//! A tensor of size n1 x n2 x n3 is a list of n3 frontal slices. Writing the
//! slices as complex pairs A^(s) = D_s + j C_s, the representing matrix is
//!
//! ```text
//! bcirc_z(A) = bcirc(D) + j bcirc(C) (P (x) I)
//! ```
//!
//! where bcirc places slice (s - t) mod n3 at block (s, t) and P is the
//! involutive permutation fixing 0 and swapping t with n3 - t. The twist by P
//! on the C part is exactly what makes the representation multiplicative for
//! quaternion entries: bcirc_z(A * B) = bcirc_z(A) bcirc_z(B).
//!
//! The tensor product, adjoint, powers and all spectral routines are defined
//! through this matrix. Its first block column holds the slices verbatim, so
//! tensors and representing matrices convert back and forth losslessly.

use crate::qmat::{CMat, QMat};
use crate::quat::Quat;
use crate::{Error, Result};
use faer::Mat;
use std::sync::OnceLock;

/// The slice permutation: fixes 0, swaps t and n3 - t. Involutive and
/// symmetric as a matrix.
#[derive(Clone, Copy, Debug)]
pub struct PermP {
    n3: usize,
}

impl PermP {
    pub fn new(n3: usize) -> Self {
        Self { n3 }
    }

    pub fn apply(&self, t: usize) -> usize {
        if t == 0 {
            0
        } else {
            self.n3 - t
        }
    }

    /// P as a quaternion matrix: column t carries a one at row apply(t).
    pub fn to_qmat(&self) -> QMat {
        QMat::from_fn(self.n3, self.n3, |i, j| {
            if i == self.apply(j) {
                Quat::ONE
            } else {
                Quat::ZERO
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct QTensor {
    n1: usize,
    n2: usize,
    n3: usize,
    slices: Vec<QMat>,
    bcirc: OnceLock<QMat>,
}

impl PartialEq for QTensor {
    fn eq(&self, other: &Self) -> bool {
        self.dims() == other.dims() && self.slices == other.slices
    }
}

impl QTensor {
    pub fn new(slices: Vec<QMat>) -> Result<Self> {
        let n3 = slices.len();
        if n3 == 0 {
            return Err(Error::Dimension("tensor needs at least one frontal slice".into()));
        }
        let (n1, n2) = slices[0].shape();
        if n1 == 0 || n2 == 0 {
            return Err(Error::Dimension("tensor dimensions must be positive".into()));
        }
        for (s, sl) in slices.iter().enumerate() {
            if sl.shape() != (n1, n2) {
                return Err(Error::Dimension(format!(
                    "slice {s} has shape {}x{}, expected {n1}x{n2}",
                    sl.nrows(),
                    sl.ncols()
                )));
            }
        }
        Ok(Self { n1, n2, n3, slices, bcirc: OnceLock::new() })
    }

    pub fn zeros(n1: usize, n2: usize, n3: usize) -> Self {
        Self::new(vec![QMat::zeros(n1, n2); n3]).expect("positive dims")
    }

    /// Identity for the tensor product: slice 0 is I, the rest zero.
    pub fn identity(n: usize, n3: usize) -> Self {
        let mut slices = vec![QMat::zeros(n, n); n3];
        slices[0] = QMat::identity(n);
        Self::new(slices).expect("positive dims")
    }

    pub fn from_fn(n1: usize, n2: usize, n3: usize, f: impl Fn(usize, usize, usize) -> Quat) -> Self {
        let slices = (0..n3).map(|s| QMat::from_fn(n1, n2, |i, j| f(i, j, s))).collect();
        Self::new(slices).expect("positive dims")
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n1, self.n2, self.n3)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn n3(&self) -> usize {
        self.n3
    }

    pub fn slice(&self, s: usize) -> &QMat {
        &self.slices[s]
    }

    pub fn slices(&self) -> &[QMat] {
        &self.slices
    }

    /// Entry (row, col, slice).
    pub fn get(&self, i: usize, j: usize, s: usize) -> Quat {
        self.slices[s].get(i, j)
    }

    pub fn is_finite(&self) -> bool {
        self.slices.iter().all(|s| s.is_finite())
    }

    /// Stacks the slices vertically into an (n1 n3) x n2 matrix.
    pub fn unfold(&self) -> QMat {
        QMat::from_fn(self.n1 * self.n3, self.n2, |i, j| {
            self.slices[i / self.n1].get(i % self.n1, j)
        })
    }

    /// Inverse of [`QTensor::unfold`].
    pub fn fold(m: &QMat, n1: usize, n3: usize) -> Result<Self> {
        if n1 == 0 || n3 == 0 || m.nrows() != n1 * n3 {
            return Err(Error::Dimension(format!(
                "cannot fold {}x{} into n1 = {n1}, n3 = {n3}",
                m.nrows(),
                m.ncols()
            )));
        }
        let slices = (0..n3)
            .map(|s| QMat::from_fn(n1, m.ncols(), |i, j| m.get(s * n1 + i, j)))
            .collect();
        Self::new(slices)
    }

    /// The representing matrix, built once and cached.
    pub fn bcirc_z(&self) -> &QMat {
        self.bcirc.get_or_init(|| {
            let (n1, n2, n3) = self.dims();
            let perm = PermP::new(n3);
            let mut d: CMat = Mat::zeros(n1 * n3, n2 * n3);
            let mut c: CMat = Mat::zeros(n1 * n3, n2 * n3);
            for s in 0..n3 {
                for t in 0..n3 {
                    let kd = (s + n3 - t) % n3;
                    let kc = (s + n3 - perm.apply(t)) % n3;
                    let sd = self.slices[kd].d();
                    let sc = self.slices[kc].c();
                    for i in 0..n1 {
                        for j in 0..n2 {
                            d[(s * n1 + i, t * n2 + j)] = sd[(i, j)];
                            c[(s * n1 + i, t * n2 + j)] = sc[(i, j)];
                        }
                    }
                }
            }
            QMat::from_parts(d, c).expect("equal shapes by construction")
        })
    }

    /// Reads the tensor out of the first block column of a representing
    /// matrix. Shape checks only; see [`QTensor::from_bcirc_z_verified`].
    pub fn from_bcirc_z(m: &QMat, n1: usize, n3: usize) -> Result<Self> {
        if n1 == 0 || n3 == 0 || m.nrows() != n1 * n3 || m.ncols() % n3 != 0 {
            return Err(Error::Dimension(format!(
                "{}x{} is not a block matrix over n1 = {n1}, n3 = {n3}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n2 = m.ncols() / n3;
        let slices = (0..n3)
            .map(|s| QMat::from_fn(n1, n2, |i, j| m.get(s * n1 + i, j)))
            .collect();
        Self::new(slices)
    }

    /// Like [`QTensor::from_bcirc_z`] but re-expands the candidate and
    /// insists the input really was z-block circulant.
    pub fn from_bcirc_z_verified(m: &QMat, n1: usize, n3: usize) -> Result<Self> {
        let t = Self::from_bcirc_z(m, n1, n3)?;
        let residual = (t.bcirc_z() - m).norm_fro();
        let tol = 1e-9 * m.norm_fro();
        if residual > tol {
            return Err(Error::NotZCirculant { residual, tol });
        }
        Ok(t)
    }

    /// The tensor product: fold(bcirc_z(A) unfold(B)).
    pub fn qt_product(&self, rhs: &QTensor) -> Result<QTensor> {
        if self.n2 != rhs.n1 || self.n3 != rhs.n3 {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{}x{} by {}x{}x{}",
                self.n1, self.n2, self.n3, rhs.n1, rhs.n2, rhs.n3
            )));
        }
        let prod = self.bcirc_z() * &rhs.unfold();
        Self::fold(&prod, self.n1, self.n3)
    }

    /// Conjugate transpose, slice level: the D part of slice s is the
    /// conjugate transpose of D at the permuted slice, the C part is the
    /// negated plain transpose in place. Transfers through the representation
    /// as bcirc_z(A^*) = bcirc_z(A)^*.
    pub fn adjoint(&self) -> QTensor {
        let perm = PermP::new(self.n3);
        let slices = (0..self.n3)
            .map(|s| {
                let d = self.slices[perm.apply(s)].d().adjoint().to_owned();
                let c = faer::Scale(num_complex::Complex64::new(-1.0, 0.0))
                    * self.slices[s].c().transpose();
                QMat::from_parts(d, c).expect("equal shapes")
            })
            .collect();
        Self::new(slices).expect("nonempty")
    }

    /// A^k under the tensor product; A^0 is the identity tensor.
    pub fn powi(&self, k: usize) -> Result<QTensor> {
        if self.n1 != self.n2 {
            return Err(Error::Dimension(format!(
                "power of non-square {}x{}x{} tensor",
                self.n1, self.n2, self.n3
            )));
        }
        let mut out = QTensor::identity(self.n1, self.n3);
        for _ in 0..k {
            out = out.qt_product(self)?;
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> QTensor {
        Self::new(self.slices.iter().map(|m| m.scale(s)).collect()).expect("nonempty")
    }

    pub fn norm_fro(&self) -> f64 {
        self.slices
            .iter()
            .map(|m| {
                let f = m.norm_fro();
                f * f
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm_max(&self) -> f64 {
        self.slices.iter().map(|m| m.norm_max()).fold(0.0, f64::max)
    }

    /// Spectral-norm equality test: ||X - Y||_s <= atol + rtol max(|X|, |Y|).
    pub fn approx_eq(&self, other: &QTensor, atol: f64, rtol: f64) -> bool {
        if self.dims() != other.dims() {
            return false;
        }
        let diff = (self - other).bcirc_z().norm2();
        let scale = self.bcirc_z().norm2().max(other.bcirc_z().norm2());
        diff <= atol + rtol * scale
    }
}

impl std::ops::Add for &QTensor {
    type Output = QTensor;
    fn add(self, r: &QTensor) -> QTensor {
        assert_eq!(self.dims(), r.dims(), "tensor addition shape mismatch");
        QTensor::new(
            self.slices.iter().zip(&r.slices).map(|(a, b)| a + b).collect(),
        )
        .expect("nonempty")
    }
}

impl std::ops::Sub for &QTensor {
    type Output = QTensor;
    fn sub(self, r: &QTensor) -> QTensor {
        assert_eq!(self.dims(), r.dims(), "tensor subtraction shape mismatch");
        QTensor::new(
            self.slices.iter().zip(&r.slices).map(|(a, b)| a - b).collect(),
        )
        .expect("nonempty")
    }
}

impl std::ops::Neg for &QTensor {
    type Output = QTensor;
    fn neg(self) -> QTensor {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_qtensor, ChaCha8Rng, SeedableRng};

    #[test]
    fn perm_is_symmetric_involution() {
        for n3 in 1..=5 {
            let p = PermP::new(n3);
            for t in 0..n3 {
                assert_eq!(p.apply(p.apply(t)), t);
            }
            let m = p.to_qmat();
            assert!(m.adjoint().approx_eq(&m, 0.0, 0.0), "P symmetric for n3 = {n3}");
            let sq = m.matmul(&m).unwrap();
            assert!(sq.approx_eq(&QMat::identity(n3), 0.0, 0.0), "P^2 = I for n3 = {n3}");
        }
    }

    #[test]
    fn unfold_fold_roundtrip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = random_qtensor(&mut rng, 3, 2, 4);
        let back = QTensor::fold(&a.unfold(), 3, 4).unwrap();
        assert_eq!(a, back);
        assert!(QTensor::fold(&a.unfold(), 2, 4).is_err());
    }

    #[test]
    fn bcirc_z_layout() {
        // n3 = 1 collapses to the slice itself
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let a = random_qtensor(&mut rng, 2, 3, 1);
        assert!((a.bcirc_z() - a.slice(0)).norm_fro() == 0.0);

        // n3 = 3: D blocks follow the circulant pattern, C blocks the twisted
        // one; block (0, 1) holds D_2 but C_1
        let a = random_qtensor(&mut rng, 2, 2, 3);
        let m = a.bcirc_z();
        let d_pattern = [[0, 2, 1], [1, 0, 2], [2, 1, 0]];
        let c_pattern = [[0, 1, 2], [1, 2, 0], [2, 0, 1]];
        for s in 0..3 {
            for t in 0..3 {
                for i in 0..2 {
                    for j in 0..2 {
                        let dv = m.d()[(s * 2 + i, t * 2 + j)];
                        let cv = m.c()[(s * 2 + i, t * 2 + j)];
                        assert_eq!(dv, a.slice(d_pattern[s][t]).d()[(i, j)]);
                        assert_eq!(cv, a.slice(c_pattern[s][t]).c()[(i, j)]);
                    }
                }
            }
        }
    }

    #[test]
    fn bcirc_z_first_block_column_holds_slices() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = random_qtensor(&mut rng, 2, 3, 4);
        let back = QTensor::from_bcirc_z(a.bcirc_z(), 2, 4).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn bcirc_z_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let a = random_qtensor(&mut rng, 2, 3, 3);
        let b = random_qtensor(&mut rng, 3, 2, 3);
        let ab = a.qt_product(&b).unwrap();
        let lhs = ab.bcirc_z();
        let rhs = a.bcirc_z().matmul(b.bcirc_z()).unwrap();
        let scale = lhs.norm_fro().max(1.0);
        assert!((lhs - &rhs).norm_fro() <= 1e-10 * scale);
    }

    #[test]
    fn verified_extraction_rejects_non_circulant() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let a = random_qtensor(&mut rng, 2, 2, 3);
        assert!(QTensor::from_bcirc_z_verified(a.bcirc_z(), 2, 3).is_ok());
        // corrupt one entry outside the first block column
        let m = a.bcirc_z();
        let bad = QMat::from_fn(6, 6, |i, j| {
            let mut q = m.get(i, j);
            if i == 0 && j == 5 {
                q.w += 1.0;
            }
            q
        });
        match QTensor::from_bcirc_z_verified(&bad, 2, 3) {
            Err(Error::NotZCirculant { .. }) => {}
            other => panic!("expected structure rejection, got {other:?}"),
        }
    }

    #[test]
    fn product_identity_and_associativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let a = random_qtensor(&mut rng, 2, 3, 3);
        let i2 = QTensor::identity(2, 3);
        let i3 = QTensor::identity(3, 3);
        assert!(i2.qt_product(&a).unwrap().approx_eq(&a, 1e-14, 1e-14));
        assert!(a.qt_product(&i3).unwrap().approx_eq(&a, 1e-14, 1e-14));

        let b = random_qtensor(&mut rng, 3, 2, 3);
        let c = random_qtensor(&mut rng, 2, 4, 3);
        let l = a.qt_product(&b).unwrap().qt_product(&c).unwrap();
        let r = a.qt_product(&b.qt_product(&c).unwrap()).unwrap();
        assert!(l.approx_eq(&r, 1e-12, 1e-10));

        // shape mismatch is a dimension error
        assert!(a.qt_product(&c).is_err());
        let wrong_depth = random_qtensor(&mut rng, 3, 2, 2);
        assert!(a.qt_product(&wrong_depth).is_err());
    }

    #[test]
    fn adjoint_transfers_through_bcirc_z() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let a = random_qtensor(&mut rng, 2, 3, 4);
        let lhs = a.adjoint();
        let rhs = a.bcirc_z().adjoint();
        assert!((lhs.bcirc_z() - &rhs).norm_fro() <= 1e-12);
        assert_eq!(lhs.dims(), (3, 2, 4));
    }

    #[test]
    fn adjoint_is_involutive_and_antimultiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(28);
        let a = random_qtensor(&mut rng, 2, 3, 3);
        let b = random_qtensor(&mut rng, 3, 2, 3);
        assert!(a.adjoint().adjoint().approx_eq(&a, 0.0, 1e-15));
        let lhs = a.qt_product(&b).unwrap().adjoint();
        let rhs = b.adjoint().qt_product(&a.adjoint()).unwrap();
        assert!(lhs.approx_eq(&rhs, 1e-12, 1e-10));
    }

    #[test]
    fn powers_and_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let a = random_qtensor(&mut rng, 3, 3, 2);
        let i = QTensor::identity(3, 2);
        assert!(a.powi(0).unwrap().approx_eq(&i, 0.0, 0.0));
        assert!(a.powi(1).unwrap().approx_eq(&a, 1e-14, 1e-14));
        let a3 = a.powi(3).unwrap();
        let ref3 = a.qt_product(&a).unwrap().qt_product(&a).unwrap();
        assert!(a3.approx_eq(&ref3, 1e-12, 1e-10));
        // power transfers through the representation
        let m3 = a.bcirc_z().powi(3).unwrap();
        assert!((a3.bcirc_z() - &m3).norm_fro() <= 1e-9 * m3.norm_fro().max(1.0));
        assert!(random_qtensor(&mut rng, 2, 3, 2).powi(2).is_err());
    }

    #[test]
    fn arithmetic_and_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let a = random_qtensor(&mut rng, 2, 2, 3);
        let b = random_qtensor(&mut rng, 2, 2, 3);
        let s = &a + &b;
        let d = &s - &b;
        assert!(d.approx_eq(&a, 1e-13, 1e-13));
        assert!((-&a).scale(-1.0).approx_eq(&a, 0.0, 0.0));
        // Frobenius norm of the representation is sqrt(n3) times the tensor's
        let lhs = a.bcirc_z().norm_fro();
        let rhs = (3.0f64).sqrt() * a.norm_fro();
        assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn constructor_rejects_bad_shapes() {
        assert!(QTensor::new(vec![]).is_err());
        let mixed = vec![QMat::zeros(2, 2), QMat::zeros(2, 3)];
        assert!(QTensor::new(mixed).is_err());
    }
}
