//! DFT block diagonalization of the representing matrix, and every tensor
//! spectral operation built on top of it.
//!
//! Conjugating bcirc_z(A) by the unitary F (x) I in quaternion arithmetic
//! splits it into n3 independent quaternion blocks:
//!
//! ```text
//! (F (x) I) bcirc_z(A) (F (x) I)^* = diag(B_0, ..., B_{n3-1})
//! ```
//!
//! Because F is complex, quaternion multiplication applies F to the D part
//! and conj(F) to the C part; that asymmetry is exactly what cancels the
//! permutation twist in the C circulant. The blocks-to-tensor map is a
//! bijection, so per-block results reassemble into genuine tensors.
//!
//! Every operation here computes its answer through the blocks and, when
//! [`Options::paranoid`] is set, recomputes it through the whole representing
//! matrix (or a second formula) and insists the routes agree. Disagreement is
//! reported as [`Error::Inconsistency`], not silently averaged away.

use crate::qmat::{CMat, QMat};
use crate::qtensor::QTensor;
use crate::{Error, Options, Result, EPS};
use faer::Mat;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Dual-route agreement tolerances (relative, floored at scale one).
const TOL_ROUTE_PINV: f64 = 1e-9;
const TOL_ROUTE_DRAZIN: f64 = 1e-7;
const TOL_ROUTE_NORM: f64 = 1e-9;
const TOL_LEAKAGE: f64 = 1e-9;
const TOL_SVD_RECON: f64 = 1e-8;
const TOL_MP: f64 = 1e-8;
const TOL_INV: f64 = 1e-9;

/// The normalized DFT matrix F with entries n3^{-1/2} w^{st}, w = e^{-2 pi i / n3}.
/// F is unitary and F^2 equals the slice permutation matrix P.
#[derive(Clone, Debug)]
pub struct DftMatrix {
    n3: usize,
    f: CMat,
}

impl DftMatrix {
    pub fn new(n3: usize) -> Self {
        let scale = 1.0 / (n3 as f64).sqrt();
        let f = Mat::from_fn(n3, n3, |s, t| {
            let ang = -2.0 * PI * ((s * t) % n3) as f64 / n3 as f64;
            C64::from_polar(scale, ang)
        });
        Self { n3, f }
    }

    pub fn n3(&self) -> usize {
        self.n3
    }

    pub fn matrix(&self) -> &CMat {
        &self.f
    }

    /// F (x) I_n as a quaternion matrix with zero j part.
    pub fn factor(&self, n: usize) -> QMat {
        let m = self.n3 * n;
        QMat::from_complex(Mat::from_fn(m, m, |i, j| {
            if i % n == j % n {
                self.f[(i / n, j / n)]
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }
}

/// The n3 diagonal blocks of the transformed representing matrix.
#[derive(Clone, Debug)]
pub struct BlockDiag {
    n1: usize,
    n2: usize,
    n3: usize,
    blocks: Vec<QMat>,
}

impl BlockDiag {
    pub fn new(blocks: Vec<QMat>) -> Result<Self> {
        let n3 = blocks.len();
        if n3 == 0 {
            return Err(Error::Dimension("block list must be nonempty".into()));
        }
        let (n1, n2) = blocks[0].shape();
        if n1 == 0 || n2 == 0 {
            return Err(Error::Dimension("blocks must have positive dimensions".into()));
        }
        for (s, b) in blocks.iter().enumerate() {
            if b.shape() != (n1, n2) {
                return Err(Error::Dimension(format!(
                    "block {s} has shape {}x{}, expected {n1}x{n2}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self { n1, n2, n3, blocks })
    }

    pub fn n3(&self) -> usize {
        self.n3
    }

    pub fn block_shape(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn block(&self, s: usize) -> &QMat {
        &self.blocks[s]
    }

    pub fn blocks(&self) -> &[QMat] {
        &self.blocks
    }

    /// Applies `f` to every block; the mapped blocks may change shape as long
    /// as they do so uniformly.
    pub fn map(&self, f: impl Fn(&QMat) -> Result<QMat>) -> Result<BlockDiag> {
        let blocks: Result<Vec<QMat>> = self.blocks.iter().map(|b| f(b)).collect();
        BlockDiag::new(blocks?)
    }

    /// Inverse transform back to a tensor; always verifies that the result
    /// really is z-block circulant.
    pub fn reassemble(&self) -> Result<QTensor> {
        let dft = DftMatrix::new(self.n3);
        let fl = dft.factor(self.n1);
        let fr = dft.factor(self.n2);
        let mut d: CMat = Mat::zeros(self.n1 * self.n3, self.n2 * self.n3);
        let mut c: CMat = Mat::zeros(self.n1 * self.n3, self.n2 * self.n3);
        for (s, b) in self.blocks.iter().enumerate() {
            for i in 0..self.n1 {
                for j in 0..self.n2 {
                    d[(s * self.n1 + i, s * self.n2 + j)] = b.d()[(i, j)];
                    c[(s * self.n1 + i, s * self.n2 + j)] = b.c()[(i, j)];
                }
            }
        }
        let bd = QMat::from_parts(d, c)?;
        let m = &(&fl.adjoint() * &bd) * &fr;
        QTensor::from_bcirc_z_verified(&m, self.n1, self.n3)
    }
}

/// Both rank notions: the rank of the representing matrix (the sum of block
/// ranks) and the count of nonzero singular tubes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QtRank {
    pub bcirc_rank: usize,
    pub tubal_rank: usize,
}

/// Tube norms ||S(i, i, :)||_F of an f-diagonal singular-value tensor,
/// nonincreasing in i for tensors produced by [`QTensor::qt_svd`].
pub fn singular_tube_norms(s: &QTensor) -> Vec<f64> {
    let (n1, n2, n3) = s.dims();
    (0..n1.min(n2))
        .map(|i| {
            (0..n3)
                .map(|t| s.get(i, i, t).abs_sq())
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

fn tensors_agree(x: &QTensor, y: &QTensor, rtol: f64) -> bool {
    let scale = x.norm_fro().max(y.norm_fro()).max(1.0);
    (x - y).norm_fro() <= 1e-12 + rtol * scale
}

impl QTensor {
    /// Transforms the representing matrix to block-diagonal form and reads
    /// off the blocks. Off-diagonal leakage beyond 1e-9 ||M||_F means the
    /// quaternion DFT commutation went wrong and is reported as an error.
    pub fn block_diagonalize(&self) -> Result<BlockDiag> {
        let (n1, n2, n3) = self.dims();
        let dft = DftMatrix::new(n3);
        let fl = dft.factor(n1);
        let fr = dft.factor(n2);
        let m = self.bcirc_z();
        let n = &(&fl * m) * &fr.adjoint();

        let mut off = 0.0f64;
        for i in 0..n1 * n3 {
            for j in 0..n2 * n3 {
                if i / n1 != j / n2 {
                    off += n.d()[(i, j)].norm_sqr() + n.c()[(i, j)].norm_sqr();
                }
            }
        }
        let leak = off.sqrt();
        let tol = TOL_LEAKAGE * m.norm_fro();
        if leak > tol {
            return Err(Error::Inconsistency(format!(
                "block diagonalization leakage {leak:.3e} exceeds {tol:.3e}"
            )));
        }

        let blocks = (0..n3)
            .map(|s| {
                QMat::from_parts(
                    Mat::from_fn(n1, n2, |i, j| n.d()[(s * n1 + i, s * n2 + j)]),
                    Mat::from_fn(n1, n2, |i, j| n.c()[(s * n1 + i, s * n2 + j)]),
                )
                .expect("equal shapes")
            })
            .collect();
        BlockDiag::new(blocks)
    }

    /// QT-SVD: A = U * S * V^* with unitary U, V and f-diagonal S whose tube
    /// norms are nonincreasing.
    pub fn qt_svd(&self, opts: &Options) -> Result<(QTensor, QTensor, QTensor)> {
        let (n1, n2, _) = self.dims();
        let bd = self.block_diagonalize()?;
        let mut ub = Vec::with_capacity(bd.n3());
        let mut sb = Vec::with_capacity(bd.n3());
        let mut vb = Vec::with_capacity(bd.n3());
        for b in bd.blocks() {
            let (u, s, v) = b.svd()?;
            ub.push(u);
            sb.push(QMat::from_diag_real(n1, n2, &s));
            vb.push(v);
        }
        let u = BlockDiag::new(ub)?.reassemble()?;
        let s = BlockDiag::new(sb)?.reassemble()?;
        let v = BlockDiag::new(vb)?.reassemble()?;

        if opts.paranoid {
            let recon = self
                .qt_product_chain(&[&u, &s, &v.adjoint()])
                .expect("conformable by construction");
            let scale = self.bcirc_z().norm2().max(1.0);
            let res = (&recon - self).bcirc_z().norm2();
            if res > TOL_SVD_RECON * scale {
                return Err(Error::Inconsistency(format!(
                    "qt_svd reconstruction residual {res:.3e} exceeds {:.3e}",
                    TOL_SVD_RECON * scale
                )));
            }
            for (name, q) in [("U", &u), ("V", &v)] {
                let n = q.n1();
                let gram = q.adjoint().qt_product(q)?;
                let dev = (&gram - &QTensor::identity(n, q.n3())).bcirc_z().norm2();
                if dev > TOL_SVD_RECON {
                    return Err(Error::Inconsistency(format!(
                        "qt_svd factor {name} not unitary: deviation {dev:.3e}"
                    )));
                }
            }
        }
        Ok((u, s, v))
    }

    fn qt_product_chain(&self, factors: &[&QTensor]) -> Result<QTensor> {
        let mut out = factors[0].clone();
        for f in &factors[1..] {
            out = out.qt_product(f)?;
        }
        Ok(out)
    }

    /// Moore-Penrose inverse, per block. In paranoid mode the result is
    /// cross-checked against the whole-matrix pseudoinverse and the four
    /// Penrose equations.
    pub fn qt_pinv(&self, opts: &Options) -> Result<QTensor> {
        let (_, n2, n3) = self.dims();
        let bd = self.block_diagonalize()?;
        let x = bd.map(|b| b.pinv())?.reassemble()?;

        if opts.paranoid {
            let whole = self.bcirc_z().pinv()?;
            let x2 = QTensor::from_bcirc_z_verified(&whole, n2, n3)?;
            if !tensors_agree(&x, &x2, TOL_ROUTE_PINV) {
                return Err(Error::Inconsistency(
                    "qt_pinv block route disagrees with whole-matrix route".into(),
                ));
            }
            self.check_penrose(&x)?;
        }
        Ok(x)
    }

    /// Internal pseudoinverse with a singular-value floor; used by the
    /// Drazin formula where the input is a matrix power whose noise scale
    /// the relative cutoff cannot see. No Penrose check: truncation makes
    /// the result a pseudoinverse of the floored matrix, not of the input.
    fn qt_pinv_floored(&self, floor: f64, opts: &Options) -> Result<QTensor> {
        let (_, n2, n3) = self.dims();
        let bd = self.block_diagonalize()?;
        let x = bd.map(|b| b.pinv_floored(floor))?.reassemble()?;
        if opts.paranoid {
            let whole = self.bcirc_z().pinv_floored(floor)?;
            let x2 = QTensor::from_bcirc_z_verified(&whole, n2, n3)?;
            if !tensors_agree(&x, &x2, TOL_ROUTE_PINV) {
                return Err(Error::Inconsistency(
                    "floored pinv block route disagrees with whole-matrix route".into(),
                ));
            }
        }
        Ok(x)
    }

    fn check_penrose(&self, x: &QTensor) -> Result<()> {
        let scale = self.bcirc_z().norm2().max(1.0);
        let ax = self.qt_product(x)?;
        let xa = x.qt_product(self)?;
        let checks = [
            ("A X A = A", (&ax.qt_product(self)? - self).bcirc_z().norm2(), scale),
            (
                "X A X = X",
                (&xa.qt_product(x)? - x).bcirc_z().norm2(),
                x.bcirc_z().norm2().max(1.0),
            ),
            ("(A X)^* = A X", (&ax.adjoint() - &ax).bcirc_z().norm2(), scale.max(1.0)),
            ("(X A)^* = X A", (&xa.adjoint() - &xa).bcirc_z().norm2(), scale.max(1.0)),
        ];
        for (name, res, s) in checks {
            if res > TOL_MP * s {
                return Err(Error::Inconsistency(format!(
                    "Penrose equation {name} residual {res:.3e} exceeds {:.3e}",
                    TOL_MP * s
                )));
            }
        }
        Ok(())
    }

    /// Exact inverse; any numerically singular block aborts with a singular
    /// error rather than falling back to a pseudoinverse.
    pub fn qt_inverse(&self, opts: &Options) -> Result<QTensor> {
        let (n1, n2, _) = self.dims();
        if n1 != n2 {
            return Err(Error::Dimension(format!("inverse of non-square {n1}x{n2} tensor")));
        }
        let bd = self.block_diagonalize()?;
        let x = bd.map(|b| b.inverse())?.reassemble()?;
        if opts.paranoid {
            let xn = x.bcirc_z().norm2();
            let an = self.bcirc_z().norm2();
            let scale = (an * xn).max(1.0);
            let i = QTensor::identity(n1, self.n3());
            let r1 = (&self.qt_product(&x)? - &i).bcirc_z().norm2();
            let r2 = (&x.qt_product(self)? - &i).bcirc_z().norm2();
            if r1 > TOL_INV * scale || r2 > TOL_INV * scale {
                return Err(Error::Inconsistency(format!(
                    "qt_inverse residuals {r1:.3e}/{r2:.3e} exceed {:.3e}",
                    TOL_INV * scale
                )));
            }
        }
        Ok(x)
    }

    /// Both rank notions; the representing-matrix rank is the one every
    /// index computation uses.
    pub fn qt_rank(&self, opts: &Options) -> Result<QtRank> {
        let bd = self.block_diagonalize()?;
        let bcirc_rank: usize = bd.blocks().iter().map(|b| b.rank()).sum();
        if opts.paranoid {
            let whole = self.bcirc_z().rank();
            if whole != bcirc_rank {
                return Err(Error::Inconsistency(format!(
                    "block rank sum {bcirc_rank} disagrees with whole-matrix rank {whole}"
                )));
            }
        }

        let (n1, n2, n3) = self.dims();
        // tube norms straight from the block singular values: the reassembled
        // S tensor satisfies ||S(i,i,:)||_F^2 = (1/n3) sum_s sigma_i(B_s)^2
        let k = n1.min(n2);
        let mut sq = vec![0.0f64; k];
        for b in bd.blocks() {
            let (_, s, _) = b.svd()?;
            for (i, v) in s.iter().enumerate() {
                sq[i] += v * v;
            }
        }
        let tubes: Vec<f64> = sq.iter().map(|&t| (t / n3 as f64).sqrt()).collect();
        let sigma1 = tubes.first().copied().unwrap_or(0.0);
        let tol_tube = n1.max(n2) as f64 * n3 as f64 * EPS * sigma1;
        let tubal_rank = tubes.iter().filter(|&&t| t > tol_tube).count();
        Ok(QtRank { bcirc_rank, tubal_rank })
    }

    /// QT-index: the largest block index. In paranoid mode the definitional
    /// route (rank stabilization of tensor powers) must agree.
    pub fn qt_index(&self, opts: &Options) -> Result<usize> {
        let (n1, n2, n3) = self.dims();
        if n1 != n2 {
            return Err(Error::Dimension(format!("index of non-square {n1}x{n2} tensor")));
        }
        let bd = self.block_diagonalize()?;
        let mut k1 = 0usize;
        for b in bd.blocks() {
            k1 = k1.max(b.index()?);
        }

        if opts.paranoid {
            let cap = n1 * n3;
            let mut prev = cap;
            let mut p = QTensor::identity(n1, n3);
            let mut k2 = None;
            // same floored rank decision as the matrix index: normalized
            // powers carry `scale` so the rounding floor of the true t-th
            // power separates noise from rank
            let mut scale = 1.0f64;
            for t in 1..=cap + 1 {
                p = p.qt_product(self)?;
                let nf = p.norm_fro();
                let floor = crate::qmat::power_floor(self.bcirc_z(), t);
                let r = if scale * nf <= floor {
                    p = QTensor::zeros(n1, n1, n3);
                    scale = 1.0;
                    0
                } else {
                    scale *= nf;
                    p = p.scale(1.0 / nf);
                    p.bcirc_z().rank_floored(floor / scale)
                };
                if r == prev {
                    k2 = Some(t - 1);
                    break;
                }
                prev = r;
            }
            if k2 != Some(k1) {
                return Err(Error::Inconsistency(format!(
                    "qt_index block route {k1} disagrees with rank-stabilization route {k2:?}"
                )));
            }
        }
        Ok(k1)
    }

    /// QT-Drazin inverse via A^l * pinv(A^{2l+1}) * A^l with l >= index
    /// (default: the index itself). In paranoid mode the per-block Drazin
    /// route must agree to 1e-7 relative.
    pub fn qt_drazin(&self, l: Option<usize>, opts: &Options) -> Result<QTensor> {
        let k = self.qt_index(opts)?;
        let l = l.unwrap_or(k);
        if l < k {
            return Err(Error::ExponentBelowIndex { given: l, index: k });
        }
        let r1 = if l == 0 {
            self.qt_inverse(opts)?
        } else {
            let al = self.powi(l)?;
            let floor = crate::qmat::power_floor(self.bcirc_z(), 2 * l + 1);
            let mid = self.powi(2 * l + 1)?.qt_pinv_floored(floor, opts)?;
            al.qt_product(&mid)?.qt_product(&al)?
        };

        if opts.paranoid {
            let bd = self.block_diagonalize()?;
            let r2 = bd.map(|b| b.drazin())?.reassemble()?;
            if !tensors_agree(&r1, &r2, TOL_ROUTE_DRAZIN) {
                return Err(Error::Inconsistency(
                    "qt_drazin tensor formula disagrees with per-block route".into(),
                ));
            }
        }
        Ok(r1)
    }

    /// Spectral norm ||A||_s, the operator norm of the representing matrix.
    pub fn qt_spectral_norm(&self, opts: &Options) -> Result<f64> {
        let whole = self.bcirc_z().norm2();
        if opts.paranoid {
            let bd = self.block_diagonalize()?;
            let blk = bd.blocks().iter().map(|b| b.norm2()).fold(0.0, f64::max);
            if (whole - blk).abs() > TOL_ROUTE_NORM * whole.max(1.0) {
                return Err(Error::Inconsistency(format!(
                    "spectral norm routes disagree: {whole:.12e} vs {blk:.12e}"
                )));
            }
        }
        Ok(whole)
    }

    /// Spectral radius rho_QT(A), the right spectral radius of the
    /// representing matrix. The dual-route check assumes eigenvalues of
    /// ordinary sensitivity; heavily defective inputs are the known
    /// exception and belong to non-paranoid calls.
    pub fn qt_spectral_radius(&self, opts: &Options) -> Result<f64> {
        let (n1, n2, _) = self.dims();
        if n1 != n2 {
            return Err(Error::Dimension(format!(
                "spectral radius of non-square {n1}x{n2} tensor"
            )));
        }
        let whole = self.bcirc_z().right_spectral_radius()?;
        if opts.paranoid {
            let bd = self.block_diagonalize()?;
            let mut blk = 0.0f64;
            for b in bd.blocks() {
                blk = blk.max(b.right_spectral_radius()?);
            }
            if (whole - blk).abs() > TOL_ROUTE_NORM * whole.max(1.0) {
                return Err(Error::Inconsistency(format!(
                    "spectral radius routes disagree: {whole:.12e} vs {blk:.12e}"
                )));
            }
        }
        Ok(whole)
    }
}
