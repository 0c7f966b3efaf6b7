//! Quaternion matrices as complex pairs, and their dense linear algebra.
//!
//! A quaternion matrix Q = D + j C is stored as the complex pair (D, C).
//! Products follow from the commutation rule j c = conj(c) j:
//!
//! ```text
//! (D1, C1) (D2, C2) = (D1 D2 - conj(C1) C2,  C1 D2 + conj(D1) C2)
//! ```
//!
//! Spectral routines go through the complex adjoint map
//! `chi(Q) = [[D, conj(C)], [-C, conj(D)]]`, a ring homomorphism into
//! structured 2m x 2n complex matrices. Singular values of chi(Q) come in
//! equal pairs; quaternion singular vectors are recovered by pairing each
//! chi singular vector w with its symplectic partner J^T conj(w), which
//! spans the second chi column of the same quaternion column.

use crate::quat::{ComplexPair, Quat, C64};
use crate::{Error, Result, EPS};
use faer::{Mat, Scale};

pub type CMat = Mat<C64>;

const ZC: C64 = C64 { re: 0.0, im: 0.0 };

/// Quaternion matrix Q = D + j C.
#[derive(Clone, Debug, PartialEq)]
pub struct QMat {
    d: CMat,
    c: CMat,
}

impl QMat {
    pub fn from_parts(d: CMat, c: CMat) -> Result<Self> {
        if d.nrows() != c.nrows() || d.ncols() != c.ncols() {
            return Err(Error::Dimension(format!(
                "complex pair shapes differ: {}x{} vs {}x{}",
                d.nrows(),
                d.ncols(),
                c.nrows(),
                c.ncols()
            )));
        }
        Ok(Self { d, c })
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self { d: Mat::zeros(m, n), c: Mat::zeros(m, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            d: Mat::from_fn(n, n, |i, j| if i == j { C64::new(1.0, 0.0) } else { ZC }),
            c: Mat::zeros(n, n),
        }
    }

    pub fn from_fn(m: usize, n: usize, f: impl Fn(usize, usize) -> Quat) -> Self {
        let mut d = Mat::zeros(m, n);
        let mut c = Mat::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                let p = f(i, j).split();
                d[(i, j)] = p.c1;
                c[(i, j)] = p.c2;
            }
        }
        Self { d, c }
    }

    /// Embeds a complex matrix (C part zero).
    pub fn from_complex(d: CMat) -> Self {
        let c = Mat::zeros(d.nrows(), d.ncols());
        Self { d, c }
    }

    /// Rectangular real diagonal matrix from the leading values.
    pub fn from_diag_real(m: usize, n: usize, vals: &[f64]) -> Self {
        Self::from_fn(m, n, |i, j| {
            if i == j && i < vals.len() {
                Quat::real(vals[i])
            } else {
                Quat::ZERO
            }
        })
    }

    pub fn nrows(&self) -> usize {
        self.d.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.d.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.d.nrows(), self.d.ncols())
    }

    pub fn d(&self) -> &CMat {
        &self.d
    }

    pub fn c(&self) -> &CMat {
        &self.c
    }

    pub fn get(&self, i: usize, j: usize) -> Quat {
        ComplexPair { c1: self.d[(i, j)], c2: self.c[(i, j)] }.merge()
    }

    pub fn set(&mut self, i: usize, j: usize, q: Quat) {
        let pair = q.split();
        self.d[(i, j)] = pair.c1;
        self.c[(i, j)] = pair.c2;
    }

    pub fn column(&self, j: usize) -> QMat {
        QMat::from_fn(self.nrows(), 1, |i, _| self.get(i, j))
    }

    pub fn is_finite(&self) -> bool {
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                if !self.get(i, j).is_finite() {
                    return false;
                }
            }
        }
        true
    }

    /// Checked matrix product.
    pub fn matmul(&self, rhs: &QMat) -> Result<QMat> {
        if self.ncols() != rhs.nrows() {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows(),
                self.ncols(),
                rhs.nrows(),
                rhs.ncols()
            )));
        }
        let d = &self.d * &rhs.d - self.c.conjugate() * &rhs.c;
        let c = &self.c * &rhs.d + self.d.conjugate() * &rhs.c;
        Ok(QMat { d, c })
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> QMat {
        QMat {
            d: self.d.adjoint().to_owned(),
            c: Scale(C64::new(-1.0, 0.0)) * self.c.transpose(),
        }
    }

    pub fn scale(&self, s: f64) -> QMat {
        let z = C64::new(s, 0.0);
        QMat { d: Scale(z) * &self.d, c: Scale(z) * &self.c }
    }

    /// Right multiplication by a quaternion scalar, column-vector friendly.
    pub fn scale_right(&self, q: Quat) -> QMat {
        let p = q.split();
        let d = Scale(p.c1) * &self.d - Scale(p.c2) * self.c.conjugate();
        let c = Scale(p.c1) * &self.c + Scale(p.c2) * self.d.conjugate();
        QMat { d, c }
    }

    /// A^k by repeated multiplication; A^0 = I (square only).
    pub fn powi(&self, k: usize) -> Result<QMat> {
        if self.nrows() != self.ncols() {
            return Err(Error::Dimension(format!(
                "power of non-square {}x{} matrix",
                self.nrows(),
                self.ncols()
            )));
        }
        let mut out = QMat::identity(self.nrows());
        for _ in 0..k {
            out = out.matmul(self)?;
        }
        Ok(out)
    }

    /// Frobenius norm, sqrt of the sum of squared quaternion moduli.
    pub fn norm_fro(&self) -> f64 {
        let nd = self.d.norm_l2();
        let nc = self.c.norm_l2();
        (nd * nd + nc * nc).sqrt()
    }

    pub fn norm_max(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                m = m.max(self.get(i, j).abs());
            }
        }
        m
    }

    /// Operator 2-norm, the largest singular value.
    pub fn norm2(&self) -> f64 {
        if self.nrows() == 0 || self.ncols() == 0 {
            return 0.0;
        }
        let s = chi_singular_values(&self.chi());
        s.first().copied().unwrap_or(0.0)
    }

    pub fn approx_eq(&self, other: &QMat, atol: f64, rtol: f64) -> bool {
        if self.shape() != other.shape() {
            return false;
        }
        let diff = (self - other).norm_fro();
        diff <= atol + rtol * self.norm_fro().max(other.norm_fro())
    }

    /// The complex adjoint matrix [[D, conj(C)], [-C, conj(D)]], 2m x 2n.
    pub fn chi(&self) -> CMat {
        let (m, n) = self.shape();
        Mat::from_fn(2 * m, 2 * n, |i, j| match (i < m, j < n) {
            (true, true) => self.d[(i, j)],
            (true, false) => self.c[(i, j - n)].conj(),
            (false, true) => -self.c[(i - m, j)],
            (false, false) => self.d[(i - m, j - n)].conj(),
        })
    }

    /// Inverts chi. Requires the quaternionic block symmetry within
    /// 1e-8 * ||M||_F; the defect is averaged away before extraction.
    pub fn chi_inverse(m: &CMat) -> Result<QMat> {
        if m.nrows() % 2 != 0 || m.ncols() % 2 != 0 {
            return Err(Error::Dimension(format!(
                "chi inverse needs even dimensions, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let residual = chi_structure_residual(m);
        let tol = 1e-8 * m.norm_l2();
        if residual > tol {
            return Err(Error::ChiStructure { residual, tol });
        }
        let (mr, nc) = (m.nrows() / 2, m.ncols() / 2);
        let half = C64::new(0.5, 0.0);
        let d = Mat::from_fn(mr, nc, |i, j| (m[(i, j)] + m[(i + mr, j + nc)].conj()) * half);
        let c = Mat::from_fn(mr, nc, |i, j| (m[(i, j + nc)].conj() - m[(i + mr, j)]) * half);
        Ok(QMat { d, c })
    }

    /// Singular value decomposition A = U S V^* with unitary quaternion U
    /// (m x m), V (n x n) and the min(m, n) real singular values descending.
    pub fn svd(&self) -> Result<(QMat, Vec<f64>, QMat)> {
        let (m, n) = self.shape();
        if m == 0 || n == 0 {
            return Ok((QMat::identity(m), vec![], QMat::identity(n)));
        }
        let k = m.min(n);
        let x = self.chi();
        let svd = x
            .svd()
            .map_err(|e| Error::Inconsistency(format!("complex svd failed: {e:?}")))?;
        let s2: Vec<f64> = (0..2 * k).map(|i| svd.S()[i].re).collect();
        let sigmas: Vec<f64> = (0..k).map(|i| 0.5 * (s2[2 * i] + s2[2 * i + 1])).collect();
        let sigma_max = sigmas.first().copied().unwrap_or(0.0);
        let tol = (2 * m.max(n)) as f64 * EPS * sigma_max;

        // quaternion-level values for all n V-directions, zero padded
        let vals: Vec<f64> = (0..n).map(|i| sigmas.get(i).copied().unwrap_or(0.0)).collect();
        let ctol = tol.max(16.0 * EPS * sigma_max);

        let v2 = svd.V();
        let mut vcols: Vec<QMat> = Vec::with_capacity(n);
        let mut start = 0usize;
        while start < n {
            let mut end = start + 1;
            while end < n && vals[end - 1] - vals[end] <= ctol {
                end += 1;
            }
            let cluster: Vec<Vec<C64>> = (2 * start..2 * end)
                .map(|j| (0..2 * n).map(|i| v2[(i, j)]).collect())
                .collect();
            vcols.extend(extract_pairs(&cluster, n)?);
            start = end;
        }

        // U columns: A v_i for sigma_i above the rank cut, orthonormalized in
        // order, then completed to a unitary basis.
        let mut ucols: Vec<QMat> = Vec::with_capacity(m);
        for (i, vc) in vcols.iter().enumerate().take(k) {
            if !(sigmas[i] > tol) {
                break;
            }
            let mut cand = self.matmul(vc)?;
            for u in &ucols {
                let coef = col_dot(u, &cand);
                cand = &cand - &u.scale_right(coef);
            }
            let nn = cand.norm_fro();
            if nn < 0.25 * sigmas[i] {
                return Err(Error::Inconsistency(format!(
                    "svd left vector collapsed: |A v| = {nn:.3e} for sigma = {:.3e}",
                    sigmas[i]
                )));
            }
            ucols.push(cand.scale(1.0 / nn));
        }
        complete_orthonormal(&mut ucols, m)?;

        // one in-order reorthogonalization pass tightens unitarity
        mgs_pass(&mut vcols);
        mgs_pass(&mut ucols);

        Ok((from_columns(&ucols), sigmas, from_columns(&vcols)))
    }

    /// Numerical rank through chi: half the count of chi singular values
    /// above max(2m, 2n) * eps * sigma_max.
    pub fn rank(&self) -> usize {
        self.rank_floored(0.0)
    }

    /// Rank with an absolute singular-value floor on top of the usual
    /// relative cutoff. Power iterations pass their accumulated rounding
    /// bound here so noise never counts as rank.
    pub(crate) fn rank_floored(&self, floor: f64) -> usize {
        if self.nrows() == 0 || self.ncols() == 0 {
            return 0;
        }
        let s = chi_singular_values(&self.chi());
        let smax = s.first().copied().unwrap_or(0.0);
        if smax == 0.0 {
            return 0;
        }
        let tol = ((2 * self.nrows().max(self.ncols())) as f64 * EPS * smax).max(floor);
        s.iter().filter(|&&v| v > tol).count() / 2
    }

    /// Moore-Penrose inverse through the SVD.
    pub fn pinv(&self) -> Result<QMat> {
        self.pinv_floored(0.0)
    }

    /// Pseudoinverse treating singular values at or below `floor` as zero,
    /// on top of the usual relative cutoff. Matrix powers need this: the
    /// noise floor of A^k scales with ||A||^k, which the singular values
    /// of a numerically nilpotent power know nothing about.
    pub(crate) fn pinv_floored(&self, floor: f64) -> Result<QMat> {
        let (m, n) = self.shape();
        let (u, s, v) = self.svd()?;
        let smax = s.first().copied().unwrap_or(0.0);
        let tol = ((2 * m.max(n)) as f64 * EPS * smax).max(floor);
        let inv: Vec<f64> = s.iter().map(|&x| if x > tol { 1.0 / x } else { 0.0 }).collect();
        let dplus = QMat::from_diag_real(n, m, &inv);
        v.matmul(&dplus)?.matmul(&u.adjoint())
    }

    /// Exact-rank inverse; singular matrices are rejected rather than
    /// silently pseudo-inverted.
    pub fn inverse(&self) -> Result<QMat> {
        let (m, n) = self.shape();
        if m != n {
            return Err(Error::Dimension(format!("inverse of non-square {m}x{n} matrix")));
        }
        let (u, s, v) = self.svd()?;
        let smax = s.first().copied().unwrap_or(0.0);
        let tol = (2 * n) as f64 * EPS * smax;
        let smin = s.last().copied().unwrap_or(0.0);
        if n > 0 && !(smin > tol) {
            return Err(Error::Singular { sigma_min: smin, tol });
        }
        let inv: Vec<f64> = s.iter().map(|&x| 1.0 / x).collect();
        let dinv = QMat::from_diag_real(n, n, &inv);
        v.matmul(&dinv)?.matmul(&u.adjoint())
    }

    /// Smallest k with rank(A^k) = rank(A^{k+1}); 0 means invertible.
    /// Powers are renormalized so scale cannot poison the rank sequence.
    pub fn index(&self) -> Result<usize> {
        let (m, n) = self.shape();
        if m != n {
            return Err(Error::Dimension(format!("index of non-square {m}x{n} matrix")));
        }
        if n == 0 {
            return Ok(0);
        }
        let mut prev = n;
        let mut p = QMat::identity(n);
        // powers are renormalized each step, with `scale` holding the
        // product of the factors so the rounding floor for the true k-th
        // power can be compared against the normalized iterate; anything
        // under the floor is noise, not rank
        let mut scale = 1.0f64;
        for k in 1..=n + 1 {
            p = p.matmul(self)?;
            let nf = p.norm_fro();
            let floor = power_floor(self, k);
            let r = if scale * nf <= floor {
                p = QMat::zeros(n, n);
                scale = 1.0;
                0
            } else {
                scale *= nf;
                p = p.scale(1.0 / nf);
                p.rank_floored(floor / scale)
            };
            if r == prev {
                return Ok(k - 1);
            }
            prev = r;
        }
        Err(Error::Inconsistency(
            "rank sequence failed to stabilize within n steps".into(),
        ))
    }

    /// Drazin inverse A^l pinv(A^{2l+1}) A^l with l the index. For index 0
    /// this is the ordinary inverse, for nilpotent input it is zero.
    pub fn drazin(&self) -> Result<QMat> {
        let l = self.index()?;
        if l == 0 {
            return self.inverse();
        }
        let al = self.powi(l)?;
        let mid = self.powi(2 * l + 1)?.pinv_floored(power_floor(self, 2 * l + 1))?;
        al.matmul(&mid)?.matmul(&al)
    }

    /// Right eigenvalue class representatives (imaginary part >= 0),
    /// n of them for an n x n matrix, from the 2n chi eigenvalues.
    pub fn right_spectrum(&self) -> Result<Vec<C64>> {
        let (m, n) = self.shape();
        if m != n {
            return Err(Error::Dimension(format!("spectrum of non-square {m}x{n} matrix")));
        }
        if n == 0 {
            return Ok(vec![]);
        }
        let eig = self
            .chi()
            .eigen()
            .map_err(|e| Error::Inconsistency(format!("complex eigensolver failed: {e:?}")))?;
        let mut canon: Vec<(f64, f64)> =
            (0..2 * n).map(|i| (eig.S()[i].re, eig.S()[i].im.abs())).collect();
        canon.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let reps = (0..n)
            .map(|i| {
                let (a, b) = (canon[2 * i], canon[2 * i + 1]);
                C64::new(0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1))
            })
            .collect();
        Ok(reps)
    }

    /// Largest right eigenvalue modulus.
    pub fn right_spectral_radius(&self) -> Result<f64> {
        let spec = self.right_spectrum()?;
        Ok(spec.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }
}

/// Residual of the quaternionic block symmetry M = J conj(M) J^T, computed
/// blockwise: zero exactly on the image of chi.
pub fn chi_structure_residual(m: &CMat) -> f64 {
    let (mr, nc) = (m.nrows() / 2, m.ncols() / 2);
    let mut acc = 0.0f64;
    for i in 0..mr {
        for j in 0..nc {
            acc += (m[(i, j)] - m[(i + mr, j + nc)].conj()).norm_sqr();
            acc += (m[(i, j + nc)] + m[(i + mr, j)].conj()).norm_sqr();
        }
    }
    acc.sqrt()
}

fn chi_singular_values(x: &CMat) -> Vec<f64> {
    let k = x.nrows().min(x.ncols());
    let svd = x.svd().expect("complex svd convergence");
    (0..k).map(|i| svd.S()[i].re).collect()
}

/// Stacks m x 1 columns into an m x len matrix.
/// Noise floor for the singular values of A^k: k successive products leave
/// rounding residue at the scale of ||A||_2^k, which a pseudoinverse of a
/// numerically nilpotent power must not invert.
pub(crate) fn power_floor(a: &QMat, k: usize) -> f64 {
    let (m, n) = a.shape();
    32.0 * k as f64 * m.max(n) as f64 * EPS * a.norm2().powi(k as i32)
}

pub(crate) fn from_columns(cols: &[QMat]) -> QMat {
    if cols.is_empty() {
        return QMat::zeros(0, 0);
    }
    let m = cols[0].nrows();
    QMat::from_fn(m, cols.len(), |i, j| cols[j].get(i, 0))
}

/// Quaternion inner product u^* v of two columns.
pub(crate) fn col_dot(u: &QMat, v: &QMat) -> Quat {
    let mut acc = Quat::ZERO;
    for i in 0..u.nrows() {
        acc += u.get(i, 0).conj() * v.get(i, 0);
    }
    acc
}

/// Extracts p/2 orthonormal quaternion columns from 2p orthonormal complex
/// columns spanning a partner-closed subspace of C^{2n}. Partner of w is
/// J^T conj(w); the pair {w, partner(w)} is the chi image of one quaternion
/// column q with D part the top half of w and C part minus the bottom half.
fn extract_pairs(cols: &[Vec<C64>], n: usize) -> Result<Vec<QMat>> {
    let mut basis: Vec<Vec<C64>> = cols.to_vec();
    let mut out = Vec::with_capacity(basis.len() / 2);
    while !basis.is_empty() {
        if basis.len() == 1 {
            return Err(Error::Inconsistency(
                "odd chi singular cluster; pairing impossible".into(),
            ));
        }
        let w = basis[0].clone();
        // partner = J^T conj(w)
        let mut p: Vec<C64> = vec![ZC; 2 * n];
        for i in 0..n {
            p[i] = -w[n + i].conj();
            p[n + i] = w[i].conj();
        }
        // keep the partner inside the computed cluster span
        let mut proj = vec![ZC; 2 * n];
        for b in &basis {
            let coef = cdot(b, &p);
            for (pi, bi) in proj.iter_mut().zip(b) {
                *pi += bi * coef;
            }
        }
        let np = cnorm(&proj);
        if np < 0.5 {
            return Err(Error::Inconsistency(format!(
                "partner vector left the singular cluster: projected norm {np:.3e}"
            )));
        }
        for z in &mut proj {
            *z /= np;
        }

        out.push(QMat::from_fn(n, 1, |i, _| {
            ComplexPair { c1: w[i], c2: -w[n + i] }.merge()
        }));

        // deflate span{w, p} and reorthonormalize the rest with pivoting
        let target = basis.len() - 2;
        let mut resid: Vec<Vec<C64>> = basis[1..]
            .iter()
            .map(|b| {
                let mut r = b.clone();
                let cw = cdot(&w, b);
                let cp = cdot(&proj, b);
                for i in 0..2 * n {
                    r[i] -= w[i] * cw + proj[i] * cp;
                }
                r
            })
            .collect();
        let mut next: Vec<Vec<C64>> = Vec::with_capacity(target);
        while next.len() < target {
            let (jmax, nmax) = resid
                .iter()
                .enumerate()
                .map(|(j, r)| (j, cnorm(r)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("deflation exhausted");
            if nmax < 1e-6 {
                return Err(Error::Inconsistency(format!(
                    "singular cluster deflation collapsed: residual {nmax:.3e}"
                )));
            }
            let mut q = resid.swap_remove(jmax);
            for z in &mut q {
                *z /= nmax;
            }
            for r in &mut resid {
                let coef = cdot(&q, r);
                for i in 0..2 * n {
                    r[i] -= q[i] * coef;
                }
            }
            next.push(q);
        }
        basis = next;
    }
    Ok(out)
}

fn cdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn cnorm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Appends pivoted identity-column residuals until `cols` spans H^m.
fn complete_orthonormal(cols: &mut Vec<QMat>, m: usize) -> Result<()> {
    if cols.len() >= m {
        return Ok(());
    }
    let mut resid: Vec<QMat> = (0..m)
        .map(|t| QMat::from_fn(m, 1, |i, _| if i == t { Quat::ONE } else { Quat::ZERO }))
        .collect();
    for r in &mut resid {
        for u in cols.iter() {
            let coef = col_dot(u, r);
            *r = &*r - &u.scale_right(coef);
        }
    }
    while cols.len() < m {
        let (jmax, nmax) = resid
            .iter()
            .enumerate()
            .map(|(j, r)| (j, r.norm_fro()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("completion pool exhausted");
        if nmax < 1e-8 {
            return Err(Error::Inconsistency(format!(
                "orthonormal completion collapsed: residual {nmax:.3e}"
            )));
        }
        let q = resid.swap_remove(jmax).scale(1.0 / nmax);
        for r in &mut resid {
            let coef = col_dot(&q, r);
            *r = &*r - &q.scale_right(coef);
        }
        cols.push(q);
    }
    Ok(())
}

/// One modified Gram-Schmidt sweep in place, order preserving.
pub(crate) fn mgs_pass(cols: &mut [QMat]) {
    for i in 0..cols.len() {
        for j in 0..i {
            let coef = col_dot(&cols[j], &cols[i]);
            cols[i] = &cols[i] - &cols[j].scale_right(coef);
        }
        let nn = cols[i].norm_fro();
        if nn > 0.0 {
            cols[i] = cols[i].scale(1.0 / nn);
        }
    }
}

impl std::ops::Add for &QMat {
    type Output = QMat;
    fn add(self, r: &QMat) -> QMat {
        assert_eq!(self.shape(), r.shape(), "quaternion matrix addition shape mismatch");
        QMat { d: &self.d + &r.d, c: &self.c + &r.c }
    }
}

impl std::ops::Sub for &QMat {
    type Output = QMat;
    fn sub(self, r: &QMat) -> QMat {
        assert_eq!(self.shape(), r.shape(), "quaternion matrix subtraction shape mismatch");
        QMat { d: &self.d - &r.d, c: &self.c - &r.c }
    }
}

impl std::ops::Neg for &QMat {
    type Output = QMat;
    fn neg(self) -> QMat {
        self.scale(-1.0)
    }
}

/// Panicking product for shapes guaranteed by construction; fallible call
/// sites use [`QMat::matmul`].
impl std::ops::Mul for &QMat {
    type Output = QMat;
    fn mul(self, r: &QMat) -> QMat {
        self.matmul(r).expect("quaternion matrix product shape mismatch")
    }
}
