//! Dense complex linear algebra with a single shared tolerance policy.
//!
//! Every eigendecomposition goes through [`eigh`], which Hermitizes its input
//! first so that rounding drift cannot flip a positivity verdict.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use crate::error::{dim_err, domain_err, Error, Result};
use crate::scalar::{cabs, cre, is_finite, Cplx, Real};

/// Numerical tolerances threaded through every check in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T: Real> {
    pub abs: T,
    pub rel: T,
    /// Singular values at or below `pinv_cutoff_ratio * sigma_max` count as zero.
    pub pinv_cutoff_ratio: T,
}

impl<T: Real> Default for Tolerance<T> {
    fn default() -> Self {
        Self {
            abs: T::lit(1e-9),
            rel: T::lit(1e-9),
            pinv_cutoff_ratio: T::lit(1e-10),
        }
    }
}

impl<T: Real> Tolerance<T> {
    pub fn new(abs: T, rel: T, pinv_cutoff_ratio: T) -> Result<Self> {
        let tol = Self {
            abs,
            rel,
            pinv_cutoff_ratio,
        };
        tol.check()?;
        Ok(tol)
    }

    /// Same policy with `abs` and `rel` both set to `value`.
    pub fn uniform(value: T) -> Result<Self> {
        Self::new(value, value, Self::default().pinv_cutoff_ratio)
    }

    fn check(&self) -> Result<()> {
        for (name, v) in [
            ("abs", self.abs),
            ("rel", self.rel),
            ("pinv_cutoff_ratio", self.pinv_cutoff_ratio),
        ] {
            if !(v >= T::zero()) || !v.as_f64().is_finite() {
                return Err(domain_err!("tolerance field `{name}` must be finite and nonnegative"));
            }
        }
        Ok(())
    }

    /// `|a - b| <= abs + rel * max(|a|, |b|)`.
    pub fn approx_eq(&self, a: T, b: T) -> bool {
        let scale = a.magnitude().max(b.magnitude());
        (a - b).magnitude() <= self.abs + self.rel * scale
    }

    /// Absolute threshold scaled by `max(1, scale)`.
    pub fn scaled(&self, scale: T) -> T {
        self.abs * scale.max(T::one())
    }

    /// The looser threshold used wherever two pseudo-inverses are chained.
    pub fn chained(&self) -> T {
        self.abs * T::lit(100.0)
    }
}

/// Dense complex matrix with explicit dimensions.
///
/// Zero-sized dimensions are allowed so that rank-zero factors can be
/// represented; every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T: Real> {
    inner: DMatrix<Cplx<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Cplx<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(dim_err!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            ));
        }
        if let Some(pos) = data.iter().position(|z| !is_finite(*z)) {
            return Err(domain_err!("non-finite entry at row-major position {pos}"));
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(rows, cols, &data),
        })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(dim_err!("ragged rows"));
        }
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&x| cre(T::lit(x))))
            .collect();
        Self::from_row_major(r, c, data)
    }

    pub fn from_dmatrix(inner: DMatrix<Cplx<T>>) -> Self {
        Self { inner }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Cplx<T>) -> Self {
        Self {
            inner: DMatrix::from_fn(rows, cols, f),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { cre(diag[i]) } else { Cplx::default() })
    }

    /// Column vector.
    pub fn column(entries: &[Cplx<T>]) -> Self {
        Self {
            inner: DMatrix::from_column_slice(entries.len(), 1, entries),
        }
    }

    /// Rank-one operator `|ket><bra|`.
    pub fn ket_bra(ket: &[Cplx<T>], bra: &[Cplx<T>]) -> Self {
        Self::from_fn(ket.len(), bra.len(), |i, j| ket[i] * bra[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Cplx<T> {
        self.inner[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Cplx<T>) {
        self.inner[(i, j)] = value;
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Cplx<T>> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<Cplx<T>> {
        self.inner
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<Cplx<T>> {
        let (r, c) = self.shape();
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn trace(&self) -> Cplx<T> {
        let n = self.rows().min(self.cols());
        (0..n).fold(Cplx::default(), |acc, i| acc + self.inner[(i, i)])
    }

    /// Largest entry modulus, `‖M‖_max`.
    pub fn max_abs(&self) -> T {
        self.inner
            .iter()
            .fold(T::zero(), |acc, z| acc.max(cabs(*z)))
    }

    /// `‖self - other‖_max`; panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.inner
            .iter()
            .zip(other.inner.iter())
            .fold(T::zero(), |acc, (a, b)| acc.max(cabs(*a - *b)))
    }

    pub fn scale(&self, factor: Cplx<T>) -> Self {
        Self {
            inner: self.inner.map(|z| z * factor),
        }
    }

    pub fn scale_real(&self, factor: T) -> Self {
        self.scale(cre(factor))
    }

    /// `(M + M*)/2` together with `‖M - M*‖_max`.
    pub fn hermitian_part(&self) -> (Self, T) {
        let adj = self.inner.adjoint();
        let residual = self
            .inner
            .iter()
            .zip(adj.iter())
            .fold(T::zero(), |acc, (a, b)| acc.max(cabs(*a - *b)));
        let half = cre(T::lit(0.5));
        let herm = (&self.inner + &adj).map(|z| z * half);
        (Self { inner: herm }, residual)
    }

    pub fn block(&self, row: usize, col: usize, nrows: usize, ncols: usize) -> Self {
        Self {
            inner: self.inner.view((row, col), (nrows, ncols)).into_owned(),
        }
    }

    pub fn set_block(&mut self, row: usize, col: usize, block: &Self) {
        self.inner
            .view_mut((row, col), block.shape())
            .copy_from(&block.inner);
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(parts: &[Self], cols: usize) -> Self {
        let rows = parts.iter().map(Self::rows).sum();
        let mut out = Self::zeros(rows, cols);
        let mut at = 0;
        for p in parts {
            assert_eq!(p.cols(), cols, "vstack column mismatch");
            out.set_block(at, 0, p);
            at += p.rows();
        }
        out
    }

    /// Places matrices with equal row counts side by side.
    pub fn hstack(parts: &[Self], rows: usize) -> Self {
        let cols = parts.iter().map(Self::cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut at = 0;
        for p in parts {
            assert_eq!(p.rows(), rows, "hstack row mismatch");
            out.set_block(0, at, p);
            at += p.cols();
        }
        out
    }

    /// Commutator `AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    fn require_square(&self, what: &str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(dim_err!("{what} requires a square matrix, got {}x{}", self.rows(), self.cols()))
        }
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl<T: Real> Neg for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn neg(self) -> ComplexMatrix<T> {
        ComplexMatrix { inner: -&self.inner }
    }
}

impl<T: Real> Add for ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        &self + &rhs
    }
}

impl<T: Real> Sub for ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        &self - &rhs
    }
}

impl<T: Real> Mul for ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        &self * &rhs
    }
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: ComplexMatrix<T>,
    /// `‖M - M*‖_max` of the input before Hermitization.
    pub anti_hermitian_residual: T,
}

impl<T: Real> HermitianEigen<T> {
    pub fn min(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }

    /// `U f(Λ) U*`.
    pub fn map(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.values.len();
        let u = self.vectors.as_dmatrix();
        let mut scaled = u.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let s = cre(f(lambda));
            scaled.column_mut(k).apply(|z| *z *= s);
        }
        let _ = n;
        ComplexMatrix::from_dmatrix(scaled * u.adjoint())
    }
}

/// Hermitizes `m` and diagonalizes it.
pub fn eigh<T: Real>(m: &ComplexMatrix<T>) -> Result<HermitianEigen<T>> {
    let n = m.require_square("eigh")?;
    let (herm, residual) = m.hermitian_part();
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
            anti_hermitian_residual: residual,
        });
    }
    let eig = SymmetricEigen::new(herm.into_dmatrix());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen {
        values,
        vectors: ComplexMatrix::from_dmatrix(vectors),
        anti_hermitian_residual: residual,
    })
}

/// Hermitian eigenvalues, ascending.
pub fn eigenvalues<T: Real>(m: &ComplexMatrix<T>) -> Result<Vec<T>> {
    Ok(eigh(m)?.values)
}

/// Positive-semidefiniteness test.
///
/// Accepts when the anti-Hermitian part is below `abs * max(1, ‖M‖_max)` and
/// the smallest eigenvalue of the Hermitian part is at least
/// `-abs * max(1, λ_max)`.
pub fn is_psd<T: Real>(m: &ComplexMatrix<T>, tol: &Tolerance<T>) -> Result<bool> {
    let eig = eigh(m)?;
    Ok(psd_verdict(m, &eig, tol))
}

fn psd_verdict<T: Real>(m: &ComplexMatrix<T>, eig: &HermitianEigen<T>, tol: &Tolerance<T>) -> bool {
    if m.rows() == 0 {
        return true;
    }
    eig.anti_hermitian_residual <= tol.scaled(m.max_abs()) && eig.min() >= -tol.scaled(eig.max())
}

/// Smallest eigenvalue of the Hermitian part; the PSD margin.
pub fn min_eigenvalue<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    Ok(eigh(m)?.min())
}

/// Factors a PSD matrix as `G = W* W`.
///
/// `W` has one row per eigenvalue above `abs * λ_max`; row `k` is
/// `sqrt(λ_k) v_k*`. Eigenvalues in `[-abs * max(1, λ_max), 0]` are treated as
/// zero, anything below is rejected.
pub fn psd_factor<T: Real>(g: &ComplexMatrix<T>, tol: &Tolerance<T>) -> Result<ComplexMatrix<T>> {
    let n = g.require_square("psd_factor")?;
    let eig = eigh(g)?;
    if !psd_verdict(g, &eig, tol) {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min().as_f64(),
        });
    }
    let lambda_max = eig.max();
    let cutoff = tol.abs * lambda_max;
    let kept: Vec<usize> = (0..n)
        .rev()
        .filter(|&k| eig.values[k] > cutoff && eig.values[k] > T::zero())
        .collect();
    let u = eig.vectors.as_dmatrix();
    let w = DMatrix::from_fn(kept.len(), n, |row, col| {
        let k = kept[row];
        u[(col, k)].conj() * cre(eig.values[k].sqrt())
    });
    Ok(ComplexMatrix::from_dmatrix(w))
}

/// Principal square root of a PSD matrix, with tolerance clamping.
pub fn psd_sqrt<T: Real>(m: &ComplexMatrix<T>, tol: &Tolerance<T>) -> Result<ComplexMatrix<T>> {
    m.require_square("psd_sqrt")?;
    let eig = eigh(m)?;
    if !psd_verdict(m, &eig, tol) {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min().as_f64(),
        });
    }
    Ok(eig.map(|l| l.max(T::zero()).sqrt()))
}

/// Pseudo-inverse square root of a PSD matrix (`S^{-1/2}` on its support).
pub fn psd_inv_sqrt<T: Real>(m: &ComplexMatrix<T>, tol: &Tolerance<T>) -> Result<ComplexMatrix<T>> {
    m.require_square("psd_inv_sqrt")?;
    let eig = eigh(m)?;
    if !psd_verdict(m, &eig, tol) {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min().as_f64(),
        });
    }
    let cutoff = tol.pinv_cutoff_ratio * eig.max();
    Ok(eig.map(|l| if l > cutoff && l > T::zero() { T::one() / l.sqrt() } else { T::zero() }))
}

/// Moore–Penrose pseudo-inverse.
///
/// The retained right singular subspace `V_r` comes from the Hermitian
/// dilation `[[0, A], [A*, 0]]`, whose eigenvalues are `±σ`; the inverse is
/// then `V_r (A V_r)^+` with the inner pseudo-inverse taken from a QR
/// factorization. nalgebra's complex SVD loses accuracy on rank-deficient
/// inputs, which is why it is not used here.
pub fn pinv<T: Real>(m: &ComplexMatrix<T>, tol: &Tolerance<T>) -> ComplexMatrix<T> {
    let (r, c) = m.shape();
    let scale = m.max_abs();
    if r == 0 || c == 0 || scale <= T::zero() {
        return ComplexMatrix::zeros(c, r);
    }
    let a = m.as_dmatrix().unscale(scale);
    let mut h = DMatrix::<Cplx<T>>::zeros(r + c, r + c);
    h.view_mut((0, r), (r, c)).copy_from(&a);
    h.view_mut((r, 0), (c, r)).copy_from(&a.adjoint());
    let eig = SymmetricEigen::new(h);
    let sigma_max = eig.eigenvalues.iter().fold(T::zero(), |acc, &s| acc.max(s));
    let cutoff = tol.pinv_cutoff_ratio * sigma_max;
    let mut kept: Vec<usize> = (0..r + c)
        .filter(|&s| {
            let sigma = eig.eigenvalues[s];
            sigma > cutoff && sigma > T::zero()
        })
        .collect();
    kept.sort_by(|&x, &y| eig.eigenvalues[y].partial_cmp(&eig.eigenvalues[x]).expect("finite eigenvalues"));
    kept.truncate(r.min(c));
    if kept.is_empty() {
        return ComplexMatrix::zeros(c, r);
    }
    let halves = DMatrix::<Cplx<T>>::from_fn(c, kept.len(), |i, s| eig.eigenvectors[(r + i, kept[s])]);
    let v_r = nalgebra::QR::new(halves).q();
    let b = m.as_dmatrix() * &v_r;
    let qr = nalgebra::QR::new(b);
    let (q, rt) = (qr.q(), qr.r());
    let y = rt
        .solve_upper_triangular(&q.adjoint())
        .expect("retained singular values keep R invertible");
    ComplexMatrix::from_dmatrix(v_r * y)
}

/// Kronecker product; the first factor indexes the coarse blocks.
pub fn kron<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::<Cplx<T>>::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a.get(i, j);
            if aij == Complex::default() {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b.get(k, l);
                }
            }
        }
    }
    ComplexMatrix::from_dmatrix(out)
}

/// Which tensor factor a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    First,
    Second,
}

/// Partial trace over one factor of `C^{d1} ⊗ C^{d2}`.
///
/// Tracing out [`Subsystem::Second`] leaves a `d1 x d1` matrix; tracing out
/// [`Subsystem::First`] leaves `d2 x d2`.
pub fn partial_trace<T: Real>(
    m: &ComplexMatrix<T>,
    d1: usize,
    d2: usize,
    traced: Subsystem,
) -> Result<ComplexMatrix<T>> {
    if d1 == 0 || d2 == 0 {
        return Err(dim_err!("partial trace factors must be positive, got {d1}x{d2}"));
    }
    let n = d1 * d2;
    if m.shape() != (n, n) {
        return Err(dim_err!(
            "partial trace over {d1}x{d2} needs a {n}x{n} matrix, got {}x{}",
            m.rows(),
            m.cols()
        ));
    }
    Ok(match traced {
        Subsystem::Second => ComplexMatrix::from_fn(d1, d1, |i, j| {
            (0..d2).fold(Cplx::default(), |acc, k| acc + m.get(i * d2 + k, j * d2 + k))
        }),
        Subsystem::First => ComplexMatrix::from_fn(d2, d2, |k, l| {
            (0..d1).fold(Cplx::default(), |acc, i| acc + m.get(i * d2 + k, i * d2 + l))
        }),
    })
}
