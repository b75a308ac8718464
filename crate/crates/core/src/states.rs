//! Density operators, partial-trace marginals, and scalar slices of
//! operator-valued kernels.
//!
//! Membership in `poly(s₁, s₂)` is defined here by the partial-trace marginal
//! condition: a state `ρ` on `C^{d1} ⊗ C^{d2}` couples `s₁` and `s₂` when
//! tracing out either factor returns the other state. This mirrors the
//! classical definition through the correspondence
//! "states ⟷ joint distributions, partial traces ⟷ marginals". Channel-based
//! notions of quantum coupling are not implemented.

use crate::classical::JointMeasure;
use crate::error::{dim_err, domain_err, Result};
use crate::linalg::{is_psd, kron, partial_trace, ComplexMatrix, Subsystem, Tolerance};
use crate::opkernels::{is_pd, OperatorKernel};
use crate::scalar::{cre, Cplx, Real};

/// Positive semidefinite unit-trace matrix, optionally split as `d1 x d2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator<T: Real> {
    matrix: ComplexMatrix<T>,
    split: Option<(usize, usize)>,
}

impl<T: Real> DensityOperator<T> {
    pub fn new(matrix: ComplexMatrix<T>, tol: &Tolerance<T>) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(dim_err!("a density operator needs a nonempty square matrix"));
        }
        if !is_psd(&matrix, tol)? {
            return Err(domain_err!("density operator is not positive semidefinite"));
        }
        let t = matrix.trace();
        if !tol.approx_eq(t.re, T::one()) || t.im.magnitude() > tol.abs {
            return Err(domain_err!("density operator has trace {t}, expected 1"));
        }
        Ok(Self { matrix, split: None })
    }

    pub fn with_split(matrix: ComplexMatrix<T>, d1: usize, d2: usize, tol: &Tolerance<T>) -> Result<Self> {
        let mut rho = Self::new(matrix, tol)?;
        rho.set_split(d1, d2)?;
        Ok(rho)
    }

    fn set_split(&mut self, d1: usize, d2: usize) -> Result<()> {
        if d1 == 0 || d2 == 0 || d1 * d2 != self.dim() {
            return Err(dim_err!("split {d1}x{d2} does not factor dimension {}", self.dim()));
        }
        self.split = Some((d1, d2));
        Ok(())
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn pure(psi: &[Cplx<T>]) -> Result<Self> {
        let norm2 = psi.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
        if psi.is_empty() || norm2 <= T::zero() {
            return Err(domain_err!("pure state needs a nonzero vector"));
        }
        let m = ComplexMatrix::ket_bra(psi, psi).scale_real(T::one() / norm2);
        Ok(Self { matrix: m, split: None })
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(dim_err!("dimension must be positive"));
        }
        Ok(Self {
            matrix: ComplexMatrix::identity(dim).scale_real(T::one() / T::lit(dim as f64)),
            split: None,
        })
    }

    /// `s₁ ⊗ s₂` with its natural split.
    pub fn product(s1: &Self, s2: &Self) -> Self {
        Self {
            matrix: kron(&s1.matrix, &s2.matrix),
            split: Some((s1.dim(), s2.dim())),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn split(&self) -> Option<(usize, usize)> {
        self.split
    }

    pub fn split_as(mut self, d1: usize, d2: usize) -> Result<Self> {
        self.set_split(d1, d2)?;
        Ok(self)
    }

    /// `(1 − t)·self + t·other`, for `t ∈ [0, 1]`.
    pub fn mix(&self, other: &Self, t: T) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(dim_err!("cannot mix states of dimension {} and {}", self.dim(), other.dim()));
        }
        if t < T::zero() || t > T::one() {
            return Err(domain_err!("mixing weight must lie in [0, 1]"));
        }
        Ok(Self {
            matrix: &self.matrix.scale_real(T::one() - t) + &other.matrix.scale_real(t),
            split: self.split.or(other.split),
        })
    }
}

/// Both reduced states `(tr₂ ρ, tr₁ ρ)`.
pub fn partial_traces<T: Real>(rho: &DensityOperator<T>) -> Result<(DensityOperator<T>, DensityOperator<T>)> {
    let (d1, d2) = rho
        .split
        .ok_or_else(|| domain_err!("partial traces need a tensor split annotation"))?;
    let reduce = |traced| -> Result<DensityOperator<T>> {
        let m = partial_trace(&rho.matrix, d1, d2, traced)?;
        Ok(DensityOperator {
            matrix: m.hermitian_part().0,
            split: None,
        })
    };
    Ok((reduce(Subsystem::Second)?, reduce(Subsystem::First)?))
}

/// Whether `ρ` has reduced states `(s₁, s₂)` entry-wise within `tol.abs`.
///
/// A state without a split annotation is split as `dim(s₁) x dim(s₂)`.
pub fn in_poly<T: Real>(
    rho: &DensityOperator<T>,
    s1: &DensityOperator<T>,
    s2: &DensityOperator<T>,
    tol: &Tolerance<T>,
) -> Result<bool> {
    let expected = (s1.dim(), s2.dim());
    let rho = match rho.split {
        Some(split) if split == expected => rho.clone(),
        Some(split) => {
            return Err(dim_err!(
                "state is split as {}x{}, marginals are {}x{}",
                split.0,
                split.1,
                expected.0,
                expected.1
            ))
        }
        None => rho.clone().split_as(expected.0, expected.1)?,
    };
    let (r1, r2) = partial_traces(&rho)?;
    Ok(r1.matrix.max_abs_diff(&s1.matrix) <= tol.abs && r2.matrix.max_abs_diff(&s2.matrix) <= tol.abs)
}

/// Diagonal state on `C^{|X₁|} ⊗ C^{|X₂|}` carrying the weights of `ν`.
///
/// Without `normalize`, `ν` must already be a probability measure.
pub fn classical_embed<T: Real>(nu: &JointMeasure<T>, normalize: bool) -> Result<DensityOperator<T>> {
    let total = nu.total();
    if total <= T::zero() {
        return Err(domain_err!("cannot embed a measure with zero total mass"));
    }
    let scale = if normalize {
        T::one() / total
    } else {
        if !Tolerance::<T>::default().approx_eq(total, T::one()) {
            return Err(domain_err!("measure has total mass {total}; pass normalize to rescale"));
        }
        T::one()
    };
    let diag: Vec<T> = nu.weights().iter().map(|&w| w * scale).collect();
    Ok(DensityOperator {
        matrix: ComplexMatrix::from_real_diagonal(&diag),
        split: Some((nu.space().left.len(), nu.space().right.len())),
    })
}

/// Hermitian scalar kernel on a finite index set.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarKernel<T: Real> {
    labels: Vec<String>,
    values: ComplexMatrix<T>,
}

impl<T: Real> ScalarKernel<T> {
    pub fn new(labels: Vec<String>, values: ComplexMatrix<T>) -> Result<Self> {
        let n = labels.len();
        if n == 0 || values.shape() != (n, n) {
            return Err(dim_err!("scalar kernel on {n} indices needs an {n}x{n} matrix"));
        }
        let (_, asym) = values.hermitian_part();
        if asym > Tolerance::<T>::default().scaled(values.max_abs()) {
            return Err(domain_err!("scalar kernel is not Hermitian (asymmetry {asym})"));
        }
        Ok(Self { labels, values })
    }

    /// The constant kernel `c(s,t) = 1`.
    pub fn ones(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        Self::new(labels, ComplexMatrix::from_fn(n, n, |_, _| cre(T::one())))
    }

    pub fn zeros(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        Self::new(labels, ComplexMatrix::zeros(n, n))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &ComplexMatrix<T> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_pd(&self, tol: &Tolerance<T>) -> bool {
        is_psd(&self.values, tol).expect("square by construction")
    }
}

/// Operator kernel `K = c₁ ⊗ ρ₁ + c₂ ⊗ ρ₂` with orthogonal pure states
/// `ρ₁ = |e₀⟩⟨e₀|`, `ρ₂ = |e₁⟩⟨e₁|`, so that `tr(ρ_i K) = c_i`.
pub fn link_kernels<T: Real>(
    c1: &ScalarKernel<T>,
    c2: &ScalarKernel<T>,
    dim: usize,
    tol: &Tolerance<T>,
) -> Result<(OperatorKernel<T>, DensityOperator<T>, DensityOperator<T>)> {
    if dim < 2 {
        return Err(dim_err!("linking two kernels needs dimension at least 2, got {dim}"));
    }
    if c1.labels != c2.labels {
        return Err(domain_err!("scalar kernels must share an index set"));
    }
    if !c1.is_pd(tol) || !c2.is_pd(tol) {
        return Err(domain_err!("both scalar kernels must be positive definite"));
    }
    let basis = |k: usize| {
        let mut v = vec![Cplx::<T>::default(); dim];
        v[k] = cre(T::one());
        v
    };
    let rho1 = DensityOperator::pure(&basis(0))?;
    let rho2 = DensityOperator::pure(&basis(1))?;
    let k = OperatorKernel::from_fn(c1.labels.clone(), dim, |i, j| {
        &rho1.matrix.scale(c1.values.get(i, j)) + &rho2.matrix.scale(c2.values.get(i, j))
    })?;
    debug_assert!(is_pd(&k, tol));
    Ok((k, rho1, rho2))
}

/// `c(s,t) = tr(ρ K(s,t))`.
pub fn slice<T: Real>(k: &OperatorKernel<T>, rho: &DensityOperator<T>) -> Result<ScalarKernel<T>> {
    slice_with(k, &rho.matrix)
}

/// [`slice`] against an arbitrary square matrix; linear in both arguments.
pub fn slice_with<T: Real>(k: &OperatorKernel<T>, weight: &ComplexMatrix<T>) -> Result<ScalarKernel<T>> {
    if weight.shape() != (k.dim(), k.dim()) {
        return Err(dim_err!("state dimension {} does not match kernel dimension {}", weight.rows(), k.dim()));
    }
    let n = k.len();
    let values = ComplexMatrix::from_fn(n, n, |i, j| (weight * k.block(i, j)).trace());
    Ok(ScalarKernel {
        labels: k.labels().to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::marginals;
    use crate::measure::{product, FiniteSpace};
    use num_complex::Complex;

    type M = ComplexMatrix<f64>;
    type D = DensityOperator<f64>;

    fn bell() -> D {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [Complex::new(h, 0.0), Complex::new(0.0, 0.0), Complex::new(0.0, 0.0), Complex::new(h, 0.0)];
        D::pure(&psi).unwrap().split_as(2, 2).unwrap()
    }

    fn state(rows: &[&[f64]]) -> D {
        D::new(M::from_real_rows(rows).unwrap(), &Tolerance::default()).unwrap()
    }

    #[test]
    fn validation() {
        let tol = Tolerance::default();
        assert!(D::new(M::identity(2), &tol).is_err());
        assert!(D::new(M::from_real_diagonal(&[1.5, -0.5]), &tol).is_err());
        assert!(D::new(M::zeros(2, 3), &tol).is_err());
        assert!(D::new(M::identity(4).scale_real(0.25), &tol).unwrap().split_as(3, 2).is_err());
    }

    #[test]
    fn product_state_marginals() {
        let s1 = state(&[&[0.7, 0.1], &[0.1, 0.3]]);
        let s2 = state(&[&[0.2, 0.0, 0.0], &[0.0, 0.5, 0.0], &[0.0, 0.0, 0.3]]);
        let rho = D::product(&s1, &s2);
        let (r1, r2) = partial_traces(&rho).unwrap();
        assert!(r1.matrix().max_abs_diff(s1.matrix()) < 1e-15);
        assert!(r2.matrix().max_abs_diff(s2.matrix()) < 1e-15);
        assert!(in_poly(&rho, &s1, &s2, &Tolerance::default()).unwrap());
    }

    #[test]
    fn bell_state_marginals_are_maximally_mixed() {
        let (r1, r2) = partial_traces(&bell()).unwrap();
        let half = M::identity(2).scale_real(0.5);
        assert!(r1.matrix().max_abs_diff(&half) < 1e-15);
        assert!(r2.matrix().max_abs_diff(&half) < 1e-15);
        let mixed = D::maximally_mixed(2).unwrap();
        let tol = Tolerance::default();
        assert!(in_poly(&bell(), &mixed, &mixed, &tol).unwrap());
        let zero = state(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(!in_poly(&bell(), &zero, &mixed, &tol).unwrap());
    }

    #[test]
    fn missing_split_and_mismatch() {
        let rho = D::maximally_mixed(4).unwrap();
        assert!(partial_traces(&rho).is_err());
        let s = D::maximally_mixed(2).unwrap();
        // unsplit state adopts the marginal dimensions
        assert!(in_poly(&rho, &s, &s, &Tolerance::default()).unwrap());
        let s3 = D::maximally_mixed(3).unwrap();
        assert!(in_poly(&rho, &s3, &s, &Tolerance::default()).is_err());
    }

    #[test]
    fn uniform_joint_embeds_to_maximally_mixed() {
        let ps = product(&FiniteSpace::numbered("a", 2).unwrap(), &FiniteSpace::numbered("b", 2).unwrap());
        let nu = JointMeasure::new(&ps, vec![0.25; 4]).unwrap();
        let rho = classical_embed(&nu, false).unwrap();
        assert_eq!(rho.matrix(), &M::identity(4).scale_real(0.25));
        assert_eq!(rho.split(), Some((2, 2)));
    }

    #[test]
    fn embed_requires_probability_unless_normalizing() {
        let ps = product(&FiniteSpace::numbered("a", 2).unwrap(), &FiniteSpace::numbered("b", 1).unwrap());
        let nu = JointMeasure::new(&ps, vec![1.0, 3.0]).unwrap();
        assert!(classical_embed(&nu, false).is_err());
        let rho = classical_embed(&nu, true).unwrap();
        assert_eq!(rho.matrix(), &M::from_real_diagonal(&[0.25, 0.75]));
        let zero = JointMeasure::new(&ps, vec![0.0, 0.0]).unwrap();
        assert!(classical_embed(&zero, true).is_err());
    }

    #[test]
    fn product_measure_embeds_to_product_state() {
        let ps = product(&FiniteSpace::numbered("a", 2).unwrap(), &FiniteSpace::numbered("b", 3).unwrap());
        let nu = JointMeasure::from_table(&ps, &[vec![0.1, 0.2, 0.1], vec![0.15, 0.3, 0.15]]).unwrap();
        let rho = classical_embed(&nu, false).unwrap();
        let (m1, m2) = marginals(&nu);
        let expected = kron(&M::from_real_diagonal(m1.weights()), &M::from_real_diagonal(m2.weights()));
        assert!(rho.matrix().max_abs_diff(&expected) < 1e-15);
    }

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    #[test]
    fn link_all_ones_kernels() {
        let ones = ScalarKernel::<f64>::ones(labels(3)).unwrap();
        let tol = Tolerance::default();
        let (k, r1, r2) = link_kernels(&ones, &ones, 2, &tol).unwrap();
        assert!(is_pd(&k, &tol));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(k.block(i, j), &(r1.matrix() + r2.matrix()));
            }
        }
    }

    #[test]
    fn link_with_zero_kernel_annihilates_second_slice() {
        let tol = Tolerance::default();
        let c1 = ScalarKernel::new(labels(2), M::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]]).unwrap()).unwrap();
        let c2 = ScalarKernel::zeros(labels(2)).unwrap();
        let (k, r1, r2) = link_kernels(&c1, &c2, 3, &tol).unwrap();
        assert_eq!(slice(&k, &r2).unwrap().values().max_abs(), 0.0);
        assert_eq!(slice(&k, &r1).unwrap(), c1);
    }

    #[test]
    fn link_rejects_bad_inputs() {
        let tol = Tolerance::default();
        let ones = ScalarKernel::<f64>::ones(labels(2)).unwrap();
        assert!(link_kernels(&ones, &ones, 1, &tol).is_err());
        let neg = ScalarKernel::new(labels(2), M::from_real_diagonal(&[1.0, -1.0])).unwrap();
        assert!(link_kernels(&ones, &neg, 2, &tol).is_err());
        let other = ScalarKernel::<f64>::ones(labels(3)).unwrap();
        assert!(link_kernels(&ones, &other, 2, &tol).is_err());
    }

    #[test]
    fn slice_with_normalized_identity_recovers_scalar_kernel() {
        let c = M::from_real_rows(&[&[2.0, 0.5], &[0.5, 1.0]]).unwrap();
        let k = OperatorKernel::from_fn(labels(2), 3, |i, j| M::identity(3).scale(c.get(i, j))).unwrap();
        let rho = D::maximally_mixed(3).unwrap();
        let s = slice(&k, &rho).unwrap();
        assert!(s.values().max_abs_diff(&c) < 1e-15);
        assert!(slice(&k, &D::maximally_mixed(2).unwrap()).is_err());
    }
}
