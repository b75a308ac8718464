//! Seeded random instance generators for tests and the property suite.
//!
//! POVM effects are drawn as `A_j* A_j` with complex Gaussian `A_j` of random
//! rank, then rescaled by the symmetric conjugation `S^{-1/2} · S^{-1/2}`
//! where `S = Σ_j A_j* A_j`, so that they sum to the identity without
//! rejection sampling.

use nalgebra::linalg::QR;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::classical::{FiniteMeasure, JointMeasure};
use crate::linalg::{psd_inv_sqrt, ComplexMatrix, Tolerance};
use crate::measure::{FiniteSpace, ProductSpace};
use crate::opkernels::OperatorKernel;
use crate::povm::{Povm, Pvm, VectorField};
use crate::scalar::{cabs, Cplx, Real};
use crate::states::{DensityOperator, ScalarKernel};

pub fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Cplx<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re * std::f64::consts::FRAC_1_SQRT_2), T::lit(im * std::f64::consts::FRAC_1_SQRT_2))
}

pub fn gaussian_vector<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Cplx<T>> {
    (0..n).map(|_| gaussian(rng)).collect()
}

pub fn gaussian_matrix<T: Real, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unitary from the QR decomposition of a Gaussian matrix.
pub fn unitary<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix<T> {
    let z = gaussian_matrix::<T, R>(rng, n, n).into_dmatrix();
    let qr = QR::new(z);
    let (mut q, r) = qr.unpack();
    for k in 0..n {
        let d = r[(k, k)];
        let m = cabs(d);
        if m > T::zero() {
            let phase = d / Complex::new(m, T::zero());
            q.column_mut(k).apply(|x| *x *= phase);
        }
    }
    ComplexMatrix::from_dmatrix(q)
}

/// `A* A` with `A` a `rank x n` Gaussian matrix.
pub fn psd<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> ComplexMatrix<T> {
    let a = gaussian_matrix::<T, R>(rng, rank, n);
    &a.adjoint() * &a
}

/// Hermitian matrix with spectrum drawn uniformly from `[0, 1]`.
pub fn contraction<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix<T> {
    let u = unitary::<T, R>(rng, n);
    let diag: Vec<T> = (0..n).map(|_| T::lit(rng.random::<f64>())).collect();
    &(&u * &ComplexMatrix::from_real_diagonal(&diag)) * &u.adjoint()
}

/// Random POVM with effects of random rank in `1..=dim`.
pub fn povm<T: Real, R: Rng + ?Sized>(rng: &mut R, space: &FiniteSpace, dim: usize) -> Povm<T> {
    let n = space.len();
    let mut ranks: Vec<usize> = (0..n).map(|_| rng.random_range(1..=dim)).collect();
    let mut total: usize = ranks.iter().sum();
    let mut k = 0;
    while total < dim {
        if ranks[k % n] < dim {
            ranks[k % n] += 1;
            total += 1;
        }
        k += 1;
    }
    let raw: Vec<ComplexMatrix<T>> = ranks.iter().map(|&r| psd(rng, dim, r)).collect();
    let sum = raw
        .iter()
        .fold(ComplexMatrix::zeros(dim, dim), |acc, e| &acc + e);
    let tol = Tolerance::default();
    let s = psd_inv_sqrt(&sum, &tol).expect("sum of Gram matrices is PSD");
    let effects = raw
        .iter()
        .map(|e| (&(&s * e) * &s).hermitian_part().0)
        .collect();
    Povm::new(space, effects).expect("shapes are consistent")
}

/// Random PVM: a Haar unitary rotation of a coordinate splitting of `C^dim`
/// among the atoms (some atoms may receive the zero projection).
pub fn pvm<T: Real, R: Rng + ?Sized>(rng: &mut R, space: &FiniteSpace, dim: usize) -> Pvm<T> {
    let n = space.len();
    let u = unitary::<T, R>(rng, dim);
    let owner: Vec<usize> = (0..dim).map(|_| rng.random_range(0..n)).collect();
    let effects = (0..n)
        .map(|j| {
            let diag: Vec<T> = owner
                .iter()
                .map(|&o| if o == j { T::one() } else { T::zero() })
                .collect();
            let p = &(&u * &ComplexMatrix::from_real_diagonal(&diag)) * &u.adjoint();
            p.hermitian_part().0
        })
        .collect();
    Pvm::new(space, effects).expect("shapes are consistent")
}

/// Full-rank density operator `A*A / tr(A*A)`.
pub fn density<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix<T> {
    let p = psd::<T, R>(rng, dim, dim);
    let t = p.trace().re;
    p.scale_real(T::one() / t).hermitian_part().0
}

pub fn density_operator<T: Real, R: Rng + ?Sized>(rng: &mut R, d1: usize, d2: usize) -> DensityOperator<T> {
    DensityOperator::with_split(density(rng, d1 * d2), d1, d2, &Tolerance::default())
        .expect("generated matrices are states")
}

/// Random measure; each weight is zero with probability `zero_prob`.
pub fn measure<T: Real, R: Rng + ?Sized>(rng: &mut R, space: &FiniteSpace, zero_prob: f64) -> FiniteMeasure<T> {
    let w = (0..space.len())
        .map(|_| if rng.random_bool(zero_prob) { T::zero() } else { T::lit(rng.random::<f64>()) })
        .collect();
    FiniteMeasure::new(space, w).expect("nonnegative weights")
}

/// Random probability table; entries are zero with probability `zero_prob`,
/// but at least one entry is positive.
pub fn probability_table<T: Real, R: Rng + ?Sized>(rng: &mut R, space: &ProductSpace, zero_prob: f64) -> JointMeasure<T> {
    let n = space.joint.len();
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(zero_prob) { 0.0 } else { 0.05 + rng.random::<f64>() })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[rng.random_range(0..n)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    JointMeasure::new(space, w.into_iter().map(|x| T::lit(x / total)).collect()).expect("nonnegative weights")
}

pub fn vector_field<T: Real, R: Rng + ?Sized>(rng: &mut R, space: &FiniteSpace, dim: usize) -> VectorField<T> {
    let v = (0..space.len()).map(|_| gaussian_vector(rng, dim)).collect();
    VectorField::new(space, v).expect("consistent shapes")
}

/// Gram kernel `K(s,t) = V_s* V_t` with Gaussian `rank x dim` factors.
pub fn gram_kernel<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize, dim: usize, rank: usize) -> OperatorKernel<T> {
    let v: Vec<ComplexMatrix<T>> = (0..n).map(|_| gaussian_matrix(rng, rank, dim)).collect();
    let labels = (0..n).map(|i| format!("s{i}")).collect();
    OperatorKernel::from_fn(labels, dim, |i, j| &v[i].adjoint() * &v[j]).expect("consistent shapes")
}

/// Positive-definite scalar kernel from the Gram matrix of `n` Gaussian
/// vectors in `C^rank`.
pub fn scalar_kernel<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> ScalarKernel<T> {
    let a = gaussian_matrix::<T, R>(rng, rank, n);
    let labels = (0..n).map(|i| format!("s{i}")).collect();
    ScalarKernel::new(labels, (&a.adjoint() * &a).hermitian_part().0).expect("square Gram matrix")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_psd;
    use crate::povm::{validate_povm, validate_pvm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_povms_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tol = Tolerance::default();
        for n in 1..=5 {
            for d in 1..=4 {
                let s = FiniteSpace::numbered("a", n).unwrap();
                let q = povm::<f64, _>(&mut rng, &s, d);
                assert!(validate_povm(&q, &tol).passed(), "n={n} d={d}");
                let p = pvm::<f64, _>(&mut rng, &s, d);
                assert!(validate_pvm(&p, &tol).passed(), "n={n} d={d}");
            }
        }
    }

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = unitary::<f64, _>(&mut rng, 5);
        assert!((&u.adjoint() * &u).max_abs_diff(&ComplexMatrix::identity(5)) < 1e-13);
    }

    #[test]
    fn contraction_spectrum_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = contraction::<f64, _>(&mut rng, 4);
        let tol = Tolerance::default();
        assert!(is_psd(&g, &tol).unwrap());
        assert!(is_psd(&(&ComplexMatrix::identity(4) - &g), &tol).unwrap());
    }

    #[test]
    fn generators_are_deterministic() {
        let s = FiniteSpace::numbered("a", 3).unwrap();
        let a = povm::<f64, _>(&mut ChaCha8Rng::seed_from_u64(9), &s, 2);
        let b = povm::<f64, _>(&mut ChaCha8Rng::seed_from_u64(9), &s, 2);
        assert_eq!(a, b);
    }
}
