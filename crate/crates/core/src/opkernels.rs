//! Operator-valued positive-definite kernels over finite index sets.
//!
//! A kernel `K: S × S → L(C^d)` on `n` indices is handled through its block
//! Gram matrix `[K(s_i, s_j)]`, of size `n·d`. Positivity, the factorization
//! `K(s,t) = V_s* V_t`, the ordering `L ≤ K` and the derivative `Γ = dL/dK`
//! all reduce to spectral computations on that matrix.

use crate::error::{dim_err, domain_err, Error, Result};
use crate::linalg::{eigenvalues, is_psd, min_eigenvalue, pinv, psd_factor, ComplexMatrix, Tolerance};
use crate::measure::{all_events, Event};
use crate::povm::Povm;
use crate::scalar::Real;

/// Atom count up to which [`povm_kernel`] indexes by every event.
pub const MAX_EXHAUSTIVE_KERNEL_ATOMS: usize = 8;

/// Block kernel `K(s_i, s_j)`, Hermitian: `K(s_j, s_i) = K(s_i, s_j)*`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorKernel<T: Real> {
    labels: Vec<String>,
    dim: usize,
    /// Row-major `n x n` grid.
    blocks: Vec<ComplexMatrix<T>>,
}

impl<T: Real> OperatorKernel<T> {
    /// Full grid of blocks; Hermitian symmetry is checked within `tol`.
    pub fn new(labels: Vec<String>, dim: usize, grid: Vec<Vec<ComplexMatrix<T>>>, tol: &Tolerance<T>) -> Result<Self> {
        let n = labels.len();
        if n == 0 || dim == 0 {
            return Err(dim_err!("kernels need at least one index and positive dimension"));
        }
        if grid.len() != n || grid.iter().any(|row| row.len() != n) {
            return Err(dim_err!("block grid must be {n}x{n}"));
        }
        let blocks: Vec<ComplexMatrix<T>> = grid.into_iter().flatten().collect();
        if blocks.iter().any(|b| b.shape() != (dim, dim)) {
            return Err(dim_err!("every block must be {dim}x{dim}"));
        }
        let k = Self { labels, dim, blocks };
        let scale = k.blocks.iter().fold(T::zero(), |a, b| a.max(b.max_abs()));
        for i in 0..n {
            for j in i..n {
                let asym = k.block(i, j).max_abs_diff(&k.block(j, i).adjoint());
                if asym > tol.scaled(scale) {
                    return Err(domain_err!(
                        "kernel is not Hermitian at ({}, {}): asymmetry {asym}",
                        k.labels[i],
                        k.labels[j]
                    ));
                }
            }
        }
        Ok(k)
    }

    /// Evaluates `f` on the upper triangle and fills the rest by symmetry.
    pub fn from_fn(labels: Vec<String>, dim: usize, mut f: impl FnMut(usize, usize) -> ComplexMatrix<T>) -> Result<Self> {
        let n = labels.len();
        if n == 0 || dim == 0 {
            return Err(dim_err!("kernels need at least one index and positive dimension"));
        }
        let mut blocks = vec![ComplexMatrix::zeros(dim, dim); n * n];
        for i in 0..n {
            for j in i..n {
                let b = f(i, j);
                if b.shape() != (dim, dim) {
                    return Err(dim_err!("block ({i}, {j}) is not {dim}x{dim}"));
                }
                if i == j {
                    blocks[i * n + i] = b.hermitian_part().0;
                } else {
                    blocks[j * n + i] = b.adjoint();
                    blocks[i * n + j] = b;
                }
            }
        }
        Ok(Self { labels, dim, blocks })
    }

    /// Kernel whose block Gram matrix is `gram`.
    pub fn from_gram(labels: Vec<String>, dim: usize, gram: &ComplexMatrix<T>) -> Result<Self> {
        let n = labels.len();
        if gram.shape() != (n * dim, n * dim) {
            return Err(dim_err!("Gram matrix must be {0}x{0}", n * dim));
        }
        let herm = gram.hermitian_part().0;
        Self::from_fn(labels, dim, |i, j| herm.block(i * dim, j * dim, dim, dim))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn block(&self, i: usize, j: usize) -> &ComplexMatrix<T> {
        &self.blocks[i * self.len() + j]
    }

    /// The `(n·d) x (n·d)` block matrix `[K(s_i, s_j)]`.
    pub fn gram(&self) -> ComplexMatrix<T> {
        let (n, d) = (self.len(), self.dim);
        let mut g = ComplexMatrix::zeros(n * d, n * d);
        for i in 0..n {
            for j in 0..n {
                g.set_block(i * d, j * d, self.block(i, j));
            }
        }
        g
    }

    pub fn scale(&self, c: T) -> Self {
        Self {
            labels: self.labels.clone(),
            dim: self.dim,
            blocks: self.blocks.iter().map(|b| b.scale_real(c)).collect(),
        }
    }

    /// Blockwise `self + c·other`.
    pub fn add_scaled(&self, other: &Self, c: T) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            labels: self.labels.clone(),
            dim: self.dim,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a + &b.scale_real(c))
                .collect(),
        })
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() || self.dim != other.dim {
            return Err(domain_err!(
                "kernel shapes differ: {} indices x dim {} vs {} indices x dim {}",
                self.len(),
                self.dim,
                other.len(),
                other.dim
            ));
        }
        Ok(())
    }

    /// Worst blockwise difference `max_{s,t} ‖self(s,t) − other(s,t)‖_max`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.same_shape(other)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .fold(T::zero(), |a, (x, y)| a.max(x.max_abs_diff(y))))
    }
}

/// `K(s,t) = V_s* V_t` with all `V_s` stacked as the columns of one `r x (n·d)`
/// matrix `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelFactorization<T: Real> {
    global: ComplexMatrix<T>,
    indices: usize,
    dim: usize,
}

impl<T: Real> KernelFactorization<T> {
    /// Wraps an externally built factor `W` (`r x (n·d)`).
    pub fn from_global(global: ComplexMatrix<T>, indices: usize, dim: usize) -> Result<Self> {
        if global.cols() != indices * dim {
            return Err(dim_err!("factor has {} columns, expected {}", global.cols(), indices * dim));
        }
        Ok(Self { global, indices, dim })
    }

    pub fn rank(&self) -> usize {
        self.global.rows()
    }

    pub fn global(&self) -> &ComplexMatrix<T> {
        &self.global
    }

    /// `V_s`, an `r x d` matrix.
    pub fn factor(&self, s: usize) -> ComplexMatrix<T> {
        self.global.block(0, s * self.dim, self.rank(), self.dim)
    }

    pub fn factors(&self) -> Vec<ComplexMatrix<T>> {
        (0..self.indices).map(|s| self.factor(s)).collect()
    }

    /// `V_s* M V_t` for every index pair, as a kernel.
    pub fn sandwich(&self, labels: Vec<String>, middle: &ComplexMatrix<T>) -> Result<OperatorKernel<T>> {
        let g = &(&self.global.adjoint() * middle) * &self.global;
        OperatorKernel::from_gram(labels, self.dim, &g)
    }

    /// Worst `‖K(s,t) − V_s* V_t‖_max`.
    pub fn residual(&self, k: &OperatorKernel<T>) -> T {
        let recon = &self.global.adjoint() * &self.global;
        recon.max_abs_diff(&k.gram())
    }

    /// `U W` for a unitary `U`; another factorization of the same kernel.
    pub fn rotated(&self, u: &ComplexMatrix<T>) -> Result<Self> {
        if u.shape() != (self.rank(), self.rank()) {
            return Err(dim_err!("rotation must be {0}x{0}", self.rank()));
        }
        Self::from_global(u * &self.global, self.indices, self.dim)
    }

    /// Partial isometry `J` carrying another factor `R` of the same kernel
    /// onto this one (`J R = W`). Compressions of operators on the space of
    /// `R` are expressed here as `J M J*`.
    ///
    /// Computed as `(W W*)⁺ W R*`, which equals `W R⁺` when `R* R = W* W` but
    /// never inverts the small singular values of `R` that the truncation
    /// of `W` already discarded.
    pub fn intertwiner(&self, reference: &ComplexMatrix<T>, tol: &Tolerance<T>) -> Result<ComplexMatrix<T>> {
        if reference.cols() != self.global.cols() {
            return Err(dim_err!("reference factor has {} columns, expected {}", reference.cols(), self.global.cols()));
        }
        let w = &self.global;
        let frame = pinv(&(w * &w.adjoint()), tol);
        Ok(&(&frame * w) * &reference.adjoint())
    }
}

/// Kernel Radon–Nikodym derivative `Γ = dL/dK` on the factor space of `K`.
#[derive(Debug, Clone)]
pub struct RadonNikodymDerivative<T: Real> {
    pub gamma: ComplexMatrix<T>,
    pub with_respect_to: KernelFactorization<T>,
    /// `‖G_L − W* Γ W‖_max`.
    pub residual: T,
    /// Eigenvalues of `Γ`, ascending.
    pub spectrum: Vec<T>,
}

impl<T: Real> RadonNikodymDerivative<T> {
    /// `Γ` transported by an intertwiner `J` to `J* Γ J`.
    pub fn pulled_back(&self, j: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        &(&j.adjoint() * &self.gamma) * j
    }
}

/// Whether the block Gram matrix of `K` is PSD.
pub fn is_pd<T: Real>(k: &OperatorKernel<T>, tol: &Tolerance<T>) -> bool {
    is_psd(&k.gram(), tol).expect("Gram matrices are square")
}

/// Factors `K` through `psd_factor` of its block Gram matrix.
pub fn factor<T: Real>(k: &OperatorKernel<T>, tol: &Tolerance<T>) -> Result<KernelFactorization<T>> {
    let w = psd_factor(&k.gram(), tol).map_err(|e| match e {
        Error::NotPsd { min_eigenvalue } => domain_err!(
            "kernel is not positive definite (block Gram eigenvalue {min_eigenvalue:e})"
        ),
        other => other,
    })?;
    KernelFactorization::from_global(w, k.len(), k.dim())
}

/// Smallest eigenvalue of the block Gram matrix of `K − L`.
pub fn domination_margin<T: Real>(l: &OperatorKernel<T>, k: &OperatorKernel<T>) -> Result<T> {
    l.same_shape(k)?;
    min_eigenvalue(&(&k.gram() - &l.gram()))
}

/// `L ≤ K` iff the block Gram matrix of `K − L` is PSD.
pub fn leq<T: Real>(l: &OperatorKernel<T>, k: &OperatorKernel<T>, tol: &Tolerance<T>) -> Result<bool> {
    l.same_shape(k)?;
    is_psd(&(&k.gram() - &l.gram()), tol)
}

/// `Γ = dL/dK` using a fresh factorization of `K`.
pub fn rn_derivative<T: Real>(
    l: &OperatorKernel<T>,
    k: &OperatorKernel<T>,
    tol: &Tolerance<T>,
) -> Result<RadonNikodymDerivative<T>> {
    let f = factor(k, tol)?;
    rn_derivative_with(l, k, &f, tol)
}

/// `Γ = (W*)⁺ G_L W⁺` for a given factorization `W` of `K`.
///
/// `Γ` is accepted when it reconstructs `G_L = W* Γ W` and its spectrum lies
/// in `[0, 1]`, both to `tol.chained()`. Independently, `L ≤ K` is decided
/// from the Gram matrix of `K − L`. The two verdicts must agree; agreement
/// on failure is an [`Error::OrderingViolation`], disagreement is an
/// [`Error::InternalConsistency`].
pub fn rn_derivative_with<T: Real>(
    l: &OperatorKernel<T>,
    k: &OperatorKernel<T>,
    fact: &KernelFactorization<T>,
    tol: &Tolerance<T>,
) -> Result<RadonNikodymDerivative<T>> {
    l.same_shape(k)?;
    if fact.indices != k.len() || fact.dim != k.dim() {
        return Err(dim_err!("factorization does not match the kernel shape"));
    }
    let gl = l.gram();
    if !is_psd(&gl, tol)? {
        return Err(domain_err!("L is not a positive definite kernel"));
    }
    let w = &fact.global;
    let gamma = &(&pinv(&w.adjoint(), tol) * &gl) * &pinv(w, tol);
    let gamma = gamma.hermitian_part().0;
    let residual = (&(&w.adjoint() * &gamma) * w).max_abs_diff(&gl);
    let spectrum = eigenvalues(&gamma)?;
    let bound = tol.chained();
    let lo = spectrum.first().copied().unwrap_or_else(T::zero);
    let hi = spectrum.last().copied().unwrap_or_else(T::zero);
    let derived = residual <= bound * gl.max_abs().max(T::one()) && lo >= -bound && hi <= T::one() + bound;

    let gap = &k.gram() - &gl;
    let ordered = is_psd(&gap, tol)?;
    match (derived, ordered) {
        (true, true) => Ok(RadonNikodymDerivative {
            gamma,
            with_respect_to: fact.clone(),
            residual,
            spectrum,
        }),
        (false, false) => Err(Error::OrderingViolation {
            min_eigenvalue: min_eigenvalue(&gap)?.as_f64(),
        }),
        (true, false) => Err(Error::InternalConsistency(format!(
            "Γ with spectrum [{lo}, {hi}] reconstructs L, but K − L has eigenvalue {}",
            min_eigenvalue(&gap)?
        ))),
        (false, true) => Err(Error::InternalConsistency(format!(
            "L ≤ K holds but Γ has spectrum [{lo}, {hi}] and residual {residual}"
        ))),
    }
}

/// The kernel `(A, B) ↦ Q(A ∩ B)` indexed by a family of events.
///
/// Without `events`, every event is used when the space has at most
/// [`MAX_EXHAUSTIVE_KERNEL_ATOMS`] atoms, and the atoms otherwise. On larger
/// spaces supplied events are appended to the atoms.
pub fn povm_kernel<T: Real>(q: &Povm<T>, events: Option<&[Event]>) -> Result<OperatorKernel<T>> {
    let space = q.space();
    let small = space.len() <= MAX_EXHAUSTIVE_KERNEL_ATOMS;
    let family: Vec<Event> = match (events, small) {
        (None, true) => all_events(space)?,
        (Some(ev), true) => ev.to_vec(),
        (ev, false) => {
            let mut fam: Vec<Event> = (0..space.len()).map(|i| Event::atom(space, i)).collect::<Result<_>>()?;
            fam.extend(ev.unwrap_or(&[]).iter().cloned());
            fam
        }
    };
    if family.is_empty() {
        return Err(domain_err!("kernel index family is empty"));
    }
    if let Some(bad) = family.iter().find(|e| e.space() != space) {
        return Err(domain_err!("event {bad} is outside the POVM's space"));
    }
    event_kernel(q, &family)
}

pub(crate) fn event_kernel<T: Real>(q: &Povm<T>, family: &[Event]) -> Result<OperatorKernel<T>> {
    let labels = family.iter().map(ToString::to_string).collect();
    OperatorKernel::from_fn(labels, q.dim(), |i, j| {
        q.evaluate(&family[i].intersection(&family[j]).expect("same space"))
            .expect("own space")
    })
}
