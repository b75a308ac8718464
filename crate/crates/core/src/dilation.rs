//! Constructive Naimark dilation of a finite POVM.
//!
//! The enlarged space is a direct sum of one block per atom. The isometry
//! stacks a square-root factor of each effect, so the dilating PVM is the
//! exact 0/1 block-diagonal projection onto the blocks of an event.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{domain_err, Result};
use crate::linalg::{psd_factor, psd_sqrt, ComplexMatrix, Tolerance};
use crate::measure::{all_events, sample_events, Coordinate, Event, ProductSpace};
use crate::povm::{validate_povm, Povm};
use crate::scalar::Real;

const EXHAUSTIVE_RECTANGLE_ATOMS: usize = 4;
const SAMPLED_RECTANGLE_EVENTS: usize = 16;

/// `Q(A) = V* P(A) V` with `V` an isometry into `C^{big_dim}`.
#[derive(Debug, Clone)]
pub struct NaimarkDilation<T: Real> {
    source: Povm<T>,
    big_dim: usize,
    isometry: ComplexMatrix<T>,
    blocks: Vec<Range<usize>>,
}

/// Builds the block-stacked dilation of a valid POVM.
///
/// Uncompressed, block `j` is the `d x d` square root `E_j^{1/2}`. With
/// `compress`, block `j` is a `rank(E_j) x d` factor `W_j` with
/// `W_j* W_j = E_j`.
pub fn dilate<T: Real>(q: &Povm<T>, compress: bool, tol: &Tolerance<T>) -> Result<NaimarkDilation<T>> {
    let report = validate_povm(q, tol);
    if !report.passed() {
        let failed: Vec<_> = report.failures().map(|c| c.name).collect();
        return Err(domain_err!("cannot dilate an invalid POVM (failed: {})", failed.join(", ")));
    }
    let roots = q
        .effects()
        .iter()
        .map(|e| if compress { psd_factor(e, tol) } else { psd_sqrt(e, tol) })
        .collect::<Result<Vec<_>>>()?;
    let mut blocks = Vec::with_capacity(roots.len());
    let mut at = 0;
    for r in &roots {
        blocks.push(at..at + r.rows());
        at += r.rows();
    }
    let isometry = ComplexMatrix::vstack(&roots, q.dim());
    Ok(NaimarkDilation {
        source: q.clone(),
        big_dim: at,
        isometry,
        blocks,
    })
}

impl<T: Real> NaimarkDilation<T> {
    pub fn source(&self) -> &Povm<T> {
        &self.source
    }

    pub fn big_dim(&self) -> usize {
        self.big_dim
    }

    /// `V`, of shape `big_dim x dim`.
    pub fn isometry(&self) -> &ComplexMatrix<T> {
        &self.isometry
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    /// `P(A)`, the projection onto the blocks of the atoms in `A`.
    pub fn apply_pvm(&self, event: &Event) -> Result<ComplexMatrix<T>> {
        if event.space() != self.source.space() {
            return Err(domain_err!("event {event} is not on the dilated POVM's space"));
        }
        let mut diag = vec![T::zero(); self.big_dim];
        for &j in event.members() {
            for k in self.blocks[j].clone() {
                diag[k] = T::one();
            }
        }
        Ok(ComplexMatrix::from_real_diagonal(&diag))
    }

    /// `V* M V`.
    pub fn compress(&self, m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        &(&self.isometry.adjoint() * m) * &self.isometry
    }

    /// `V* P(A) V`, built from the dilation side only.
    pub fn reconstruct(&self, event: &Event) -> Result<ComplexMatrix<T>> {
        Ok(self.compress(&self.apply_pvm(event)?))
    }

    /// `‖V*V − I‖_max`.
    pub fn isometry_defect(&self) -> T {
        (&self.isometry.adjoint() * &self.isometry).max_abs_diff(&ComplexMatrix::identity(self.source.dim()))
    }

    /// Worst `‖V*P(A)V − Q(A)‖_max` over the given events.
    pub fn max_reconstruction_residual<'a>(&self, events: impl IntoIterator<Item = &'a Event>) -> Result<T> {
        let mut worst = T::zero();
        for e in events {
            let lhs = self.reconstruct(e)?;
            worst = worst.max(lhs.max_abs_diff(&self.source.evaluate(e)?));
        }
        Ok(worst)
    }
}

/// A dilation over `X₁ × X₂` together with its two commuting coordinate PVMs.
#[derive(Debug, Clone)]
pub struct ProductDilationSplit<T: Real> {
    dilation: NaimarkDilation<T>,
    product: ProductSpace,
    /// Worst `‖Q(A×B) − V*P₁(A)P₂(B)V‖_max` over the swept rectangles.
    pub rectangle_residual: T,
    /// Worst `‖[P₁(A), P₂(B)]‖_max` over the swept rectangles.
    pub commutator_residual: T,
    pub rectangles_checked: usize,
}

/// Splits a product-space dilation into `P₁(A) = P(A×X₂)` and `P₂(B) = P(X₁×B)`
/// and sweeps the rectangle identity `Q(A×B) = V*P₁(A)P₂(B)V`.
pub fn split_product<T: Real>(dil: &NaimarkDilation<T>) -> Result<ProductDilationSplit<T>> {
    let product = dil
        .source
        .space()
        .as_product()
        .ok_or_else(|| domain_err!("split_product needs a dilation of a product-space POVM"))?;
    let mut split = ProductDilationSplit {
        dilation: dil.clone(),
        product,
        rectangle_residual: T::zero(),
        commutator_residual: T::zero(),
        rectangles_checked: 0,
    };
    let ps = &split.product;
    let (lefts, rights) =
        if ps.left.len() <= EXHAUSTIVE_RECTANGLE_ATOMS && ps.right.len() <= EXHAUSTIVE_RECTANGLE_ATOMS {
            (all_events(&ps.left)?, all_events(&ps.right)?)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0xd4);
            (
                sample_events(&ps.left, SAMPLED_RECTANGLE_EVENTS, &mut rng),
                sample_events(&ps.right, SAMPLED_RECTANGLE_EVENTS, &mut rng),
            )
        };
    let p2s = rights.iter().map(|b| split.p2(b)).collect::<Result<Vec<_>>>()?;
    let mut rect = T::zero();
    let mut comm = T::zero();
    for a in &lefts {
        let p1 = split.p1(a)?;
        for (b, p2) in rights.iter().zip(&p2s) {
            let q = dil.source.evaluate(&ps.rectangle(a, b)?)?;
            let lhs = dil.compress(&(&p1 * p2));
            rect = rect.max(lhs.max_abs_diff(&q));
            comm = comm.max(p1.commutator(p2).max_abs());
        }
    }
    split.rectangle_residual = rect;
    split.commutator_residual = comm;
    split.rectangles_checked = lefts.len() * rights.len();
    Ok(split)
}

impl<T: Real> ProductDilationSplit<T> {
    pub fn dilation(&self) -> &NaimarkDilation<T> {
        &self.dilation
    }

    pub fn product(&self) -> &ProductSpace {
        &self.product
    }

    /// `P₁(A) = P(A × X₂)`.
    pub fn p1(&self, a: &Event) -> Result<ComplexMatrix<T>> {
        self.coordinate_pvm(Coordinate::First, a)
    }

    /// `P₂(B) = P(X₁ × B)`.
    pub fn p2(&self, b: &Event) -> Result<ComplexMatrix<T>> {
        self.coordinate_pvm(Coordinate::Second, b)
    }

    pub fn coordinate_pvm(&self, coordinate: Coordinate, event: &Event) -> Result<ComplexMatrix<T>> {
        let pre = self.product.preimage(coordinate, event)?;
        self.dilation.apply_pvm(&pre)
    }

    /// The columns `[P_i(A_1)V | ... | P_i(A_m)V]`: the canonical factor of the
    /// kernel `(A, A') ↦ Q_i(A ∩ A')` over `events`.
    pub fn kernel_factor(&self, coordinate: Coordinate, events: &[Event]) -> Result<ComplexMatrix<T>> {
        let v = self.dilation.isometry();
        let parts = events
            .iter()
            .map(|e| Ok(&self.coordinate_pvm(coordinate, e)? * v))
            .collect::<Result<Vec<_>>>()?;
        Ok(ComplexMatrix::hstack(&parts, self.dilation.big_dim))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{product, FiniteSpace};
    use crate::error::Error;
    use crate::povm::Pvm;

    type M = ComplexMatrix<f64>;

    fn sp(n: usize) -> FiniteSpace {
        FiniteSpace::numbered("s", n).unwrap()
    }

    fn qubit_pvm() -> Povm<f64> {
        // projectors onto |+> and |->
        let h = 0.5;
        let plus = M::from_real_rows(&[&[h, h], &[h, h]]).unwrap();
        let minus = M::from_real_rows(&[&[h, -h], &[-h, h]]).unwrap();
        Povm::new(&sp(2), vec![plus, minus]).unwrap()
    }

    #[test]
    fn compressed_pvm_dilation_has_dimension_d() {
        let q = qubit_pvm();
        let d = dilate(&q, true, &Tolerance::default()).unwrap();
        assert_eq!(d.big_dim(), 2);
        assert!(d.isometry_defect() < 1e-14);
        let events = all_events(q.space()).unwrap();
        assert!(d.max_reconstruction_residual(&events).unwrap() < 1e-14);
    }

    #[test]
    fn uniform_povm_blocks_are_scaled_identities() {
        let n = 3;
        let q = Povm::new(&sp(n), vec![M::identity(2).scale_real(1.0 / n as f64); n]).unwrap();
        let d = dilate(&q, false, &Tolerance::default()).unwrap();
        assert_eq!(d.big_dim(), n * 2);
        let expected = M::vstack(&vec![M::identity(2).scale_real((1.0 / n as f64).sqrt()); n], 2);
        assert!(d.isometry().max_abs_diff(&expected) < 1e-14);
        assert_eq!(d.blocks(), [0..2, 2..4, 4..6]);
    }

    #[test]
    fn invalid_povm_is_rejected() {
        let q = Povm::new(&sp(2), vec![M::identity(2), M::identity(2)]).unwrap();
        assert!(matches!(dilate(&q, false, &Tolerance::default()), Err(Error::Domain(_))));
    }

    #[test]
    fn apply_pvm_laws() {
        let q = qubit_pvm();
        let d = dilate(&q, false, &Tolerance::default()).unwrap();
        assert_eq!(d.apply_pvm(&Event::empty(q.space())).unwrap().max_abs(), 0.0);
        assert_eq!(d.apply_pvm(&Event::full(q.space())).unwrap(), M::identity(4));
        let events = all_events(q.space()).unwrap();
        for a in &events {
            let pa = d.apply_pvm(a).unwrap();
            assert_eq!(&pa * &pa, pa);
            for b in &events {
                let pb = d.apply_pvm(b).unwrap();
                assert_eq!(&pa * &pb, d.apply_pvm(&a.intersection(b).unwrap()).unwrap());
            }
        }
        assert!(d.apply_pvm(&Event::full(&sp(3))).is_err());
    }

    #[test]
    fn classical_table_split_is_diagonal_indicator() {
        let ps = product(&sp(2), &sp(2));
        let table = [0.1, 0.2, 0.3, 0.4];
        let q = Povm::new(&ps.joint, table.iter().map(|&p| M::from_real_diagonal(&[p])).collect()).unwrap();
        let d = dilate(&q, false, &Tolerance::default()).unwrap();
        let split = split_product(&d).unwrap();
        let b = Event::atom(&ps.right, 1).unwrap();
        // columns j = 1 of each row: product atoms 1 and 3
        assert_eq!(split.p2(&b).unwrap(), M::from_real_diagonal(&[0.0, 1.0, 0.0, 1.0]));
        assert!(split.rectangle_residual < 1e-15);
        assert_eq!(split.commutator_residual, 0.0);
        assert_eq!(split.rectangles_checked, 16);
    }

    #[test]
    fn full_rectangle_is_isometry_identity() {
        let ps = product(&sp(2), &sp(2));
        let q = Pvm::<f64>::coordinate(&ps.joint).into_povm();
        let d = dilate(&q, false, &Tolerance::default()).unwrap();
        let split = split_product(&d).unwrap();
        let lhs = d.compress(&(&split.p1(&Event::full(&ps.left)).unwrap() * &split.p2(&Event::full(&ps.right)).unwrap()));
        assert!(lhs.max_abs_diff(&M::identity(4)) < 1e-15);
    }

    #[test]
    fn split_requires_product() {
        let d = dilate(&qubit_pvm(), false, &Tolerance::default()).unwrap();
        assert!(split_product(&d).is_err());
    }
}
