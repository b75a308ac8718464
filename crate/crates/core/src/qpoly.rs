//! Quantum polymorphisms `Q₁ ← Q → Q₂` and their disintegration.
//!
//! For a POVM `Q` on `X₁ × X₂` with Naimark dilation `Q = V* P V`, the
//! coordinate PVMs `P₁(A) = P(A × X₂)` and `P₂(B) = P(X₁ × B)` commute and
//! `Q(A × B) = V* P₁(A) P₂(B) V`. Fixing `B`, the kernels
//! `L(A, A') = Q((A ∩ A') × B)` and `K(A, A') = Q₁(A ∩ A')` on the events of
//! `X₁` satisfy `L ≤ K`, and the kernel derivative `dL/dK` is the compression
//! of `P₂(B)` to the factor space of `K`. The functions here compute both
//! sides independently and report how far apart they are.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dilation::{dilate, split_product};
use crate::error::{dim_err, domain_err, Error, Result};
use crate::linalg::{eigenvalues, kron, min_eigenvalue, pinv, ComplexMatrix, Tolerance};
use crate::measure::{all_events, event_family, product, sample_events, Coordinate, Event, ProductSpace};
use crate::opkernels::{
    event_kernel, factor, leq, rn_derivative_with, KernelFactorization, OperatorKernel,
};
use crate::povm::{marginal_povm, validate_povm, Povm};
use crate::random::gaussian_vector;
use crate::scalar::{Cplx, Real};

/// Factor events are all enumerated up to this many (2⁶); beyond it the
/// family is the atoms plus seeded random events.
pub const EXHAUSTIVE_INDEX_EVENTS: usize = 64;
pub const SAMPLED_INDEX_EVENTS: usize = 20;
const INDEX_FAMILY_SEED: u64 = 0x42;
const EXHAUSTIVE_RECTANGLE_ATOMS: usize = 4;
const SAMPLED_RECTANGLE_EVENTS: usize = 12;

/// A POVM on a product space together with its two marginals.
#[derive(Debug, Clone)]
pub struct QuantumPolymorphism<T: Real> {
    joint: Povm<T>,
    product: ProductSpace,
    first: Povm<T>,
    second: Povm<T>,
}

/// Validates `Q` and computes `Q_i = Q ∘ π_i⁻¹`.
pub fn make_qpoly<T: Real>(q: &Povm<T>, tol: &Tolerance<T>) -> Result<QuantumPolymorphism<T>> {
    let product = q
        .space()
        .as_product()
        .ok_or_else(|| domain_err!("a quantum polymorphism needs a POVM on a product space"))?;
    let report = validate_povm(q, tol);
    if !report.passed() {
        let failed: Vec<_> = report.failures().map(|c| c.name).collect();
        return Err(domain_err!("invalid POVM (failed: {})", failed.join(", ")));
    }
    Ok(QuantumPolymorphism {
        joint: q.clone(),
        first: marginal_povm(q, Coordinate::First)?,
        second: marginal_povm(q, Coordinate::Second)?,
        product,
    })
}

impl<T: Real> QuantumPolymorphism<T> {
    pub fn joint(&self) -> &Povm<T> {
        &self.joint
    }

    pub fn product(&self) -> &ProductSpace {
        &self.product
    }

    pub fn first(&self) -> &Povm<T> {
        &self.first
    }

    pub fn second(&self) -> &Povm<T> {
        &self.second
    }

    pub fn marginal(&self, coordinate: Coordinate) -> &Povm<T> {
        match coordinate {
            Coordinate::First => &self.first,
            Coordinate::Second => &self.second,
        }
    }

    /// The same POVM with the factors swapped, `(b, a) ↦ Q(a, b)`.
    pub fn transposed(&self) -> Self {
        let (swapped, perm) = self.product.transposed();
        let effects = perm.iter().map(|&k| self.joint.effect(k).clone()).collect();
        let joint = Povm::new(&swapped.joint, effects).expect("same effects");
        Self {
            joint,
            product: swapped,
            first: self.second.clone(),
            second: self.first.clone(),
        }
    }

    /// Every effect conjugated by one unitary.
    pub fn conjugated(&self, u: &ComplexMatrix<T>) -> Result<Self> {
        Ok(Self {
            joint: self.joint.conjugated(u)?,
            product: self.product.clone(),
            first: self.first.conjugated(u)?,
            second: self.second.conjugated(u)?,
        })
    }
}

/// Outcome of one disintegration: the kernel derivative and the compressed
/// coordinate projection it must equal.
#[derive(Debug, Clone)]
pub struct DisintegrationResult<T: Real> {
    /// Coordinate of the conditioning event (`Second` for `dQ(·×B)/dQ₁`).
    pub conditioned: Coordinate,
    pub event: Event,
    /// Index family of the kernels, events of the other factor.
    pub index_events: Vec<Event>,
    /// `Γ = dL/dK` on the factor space of `K`.
    pub gamma: ComplexMatrix<T>,
    pub gamma_spectrum: Vec<T>,
    pub factorization: KernelFactorization<T>,
    /// The coordinate projection on the dilation space.
    pub projection: ComplexMatrix<T>,
    /// `J` with `J R = W`, where `R` is the dilation factor of `K`.
    pub intertwiner: ComplexMatrix<T>,
    /// `J P J*`.
    pub compressed_projection: ComplexMatrix<T>,
    /// `‖Γ − J P J*‖_max`.
    pub gamma_residual: T,
    /// `‖G_L − W* Γ W‖_max`.
    pub reconstruction_residual: T,
    /// Smallest eigenvalue of the Gram matrix of `K − L`.
    pub domination_margin: T,
    /// `‖J J* − I‖_max`.
    pub intertwiner_defect: T,
    /// Worst `‖Q(A×B) − V*P₁(A)P₂(B)V‖_max` from the dilation split.
    pub rectangle_residual: T,
    pub commutator_residual: T,
}

impl<T: Real> DisintegrationResult<T> {
    /// For scalar POVMs: `⟨u_a, Γ u_a⟩ / ⟨u_a, u_a⟩` where `u_a` is the factor
    /// of the singleton `{a}`. These are the conditional masses
    /// `ν(event | a)`; `None` marks atoms with mass at most `tol.abs`.
    pub fn atom_conditionals(&self, tol: &Tolerance<T>) -> Result<Vec<Option<T>>> {
        if self.gamma.rows() > 0 && self.factorization.factor(0).cols() != 1 {
            return Err(domain_err!("atom conditionals are defined for scalar (dim 1) POVMs"));
        }
        let space = self.index_events[0].space().clone();
        (0..space.len())
            .map(|a| {
                let idx = self
                    .index_events
                    .iter()
                    .position(|e| e.members() == [a])
                    .ok_or_else(|| domain_err!("index family lacks atom {a}"))?;
                let u = self.factorization.factor(idx);
                let norm2 = (&u.adjoint() * &u).get(0, 0).re;
                if norm2 <= tol.abs {
                    return Ok(None);
                }
                let num = (&(&u.adjoint() * &self.gamma) * &u).get(0, 0).re;
                Ok(Some(num / norm2))
            })
            .collect()
    }

    pub fn passed(&self, tol: &Tolerance<T>) -> bool {
        self.gamma_residual <= tol.chained() && self.domination_margin >= -tol.abs
    }
}

/// `dQ(· × B)/dQ₁ = P₂(B)`: kernels over the events of `X₁`.
pub fn disintegrate<T: Real>(
    qp: &QuantumPolymorphism<T>,
    b: &Event,
    tol: &Tolerance<T>,
) -> Result<DisintegrationResult<T>> {
    disintegrate_along(qp, Coordinate::Second, b, tol)
}

/// `dQ(A × ·)/dQ₂ = P₁(A)`: kernels over the events of `X₂`.
pub fn disintegrate_left<T: Real>(
    qp: &QuantumPolymorphism<T>,
    a: &Event,
    tol: &Tolerance<T>,
) -> Result<DisintegrationResult<T>> {
    disintegrate_along(qp, Coordinate::First, a, tol)
}

/// Kernel index family on one factor: every event up to 2⁶, else atoms plus
/// seeded samples.
pub fn index_family(space: &crate::measure::FiniteSpace) -> Vec<Event> {
    let mut rng = ChaCha8Rng::seed_from_u64(INDEX_FAMILY_SEED);
    event_family(space, EXHAUSTIVE_INDEX_EVENTS, SAMPLED_INDEX_EVENTS, &mut rng)
}

fn disintegrate_along<T: Real>(
    qp: &QuantumPolymorphism<T>,
    conditioned: Coordinate,
    event: &Event,
    tol: &Tolerance<T>,
) -> Result<DisintegrationResult<T>> {
    let ps = &qp.product;
    let indexed = conditioned.other();
    if event.space() != ps.factor(conditioned) {
        return Err(domain_err!("conditioning event {event} is not on factor {conditioned:?}"));
    }
    let dil = dilate(&qp.joint, false, tol)?;
    let split = split_product(&dil)?;
    let family = index_family(ps.factor(indexed));

    // K(E, E') = Q_i(E ∩ E'),  L(E, E') = Q((E ∩ E') ×/× event)
    let k = event_kernel(qp.marginal(indexed), &family)?;
    let lifted: Vec<Event> = family
        .iter()
        .map(|e| match indexed {
            Coordinate::First => ps.rectangle(e, event),
            Coordinate::Second => ps.rectangle(event, e),
        })
        .collect::<Result<_>>()?;
    let l = event_kernel(&qp.joint, &lifted)?;

    let fact = factor(&k, tol)?;
    let domination_margin = min_eigenvalue(&(&k.gram() - &l.gram()))?;
    if !leq(&l, &k, tol)? {
        return Err(Error::TheoremViolation(format!(
            "domination Q(·) ≤ Q_{} fails for {event}: margin {domination_margin}",
            index_number(indexed)
        )));
    }
    let rn = rn_derivative_with(&l, &k, &fact, tol).map_err(|e| {
        Error::TheoremViolation(format!("kernel derivative for {event} failed: {e}"))
    })?;

    let projection = split.coordinate_pvm(conditioned, event)?;
    let reference = split.kernel_factor(indexed, &family)?;
    let intertwiner = fact.intertwiner(&reference, tol)?;
    let compressed_projection = (&(&intertwiner * &projection) * &intertwiner.adjoint()).hermitian_part().0;
    let gamma_residual = rn.gamma.max_abs_diff(&compressed_projection);
    let intertwiner_defect =
        (&intertwiner * &intertwiner.adjoint()).max_abs_diff(&ComplexMatrix::identity(fact.rank()));

    let result = DisintegrationResult {
        conditioned,
        event: event.clone(),
        index_events: family,
        gamma: rn.gamma,
        gamma_spectrum: rn.spectrum,
        factorization: fact,
        projection,
        intertwiner,
        compressed_projection,
        gamma_residual,
        reconstruction_residual: rn.residual,
        domination_margin,
        intertwiner_defect,
        rectangle_residual: split.rectangle_residual,
        commutator_residual: split.commutator_residual,
    };
    if gamma_residual > tol.chained() {
        return Err(Error::TheoremViolation(format!(
            "kernel derivative differs from the compressed projection by {gamma_residual} for {event}"
        )));
    }
    Ok(result)
}

fn index_number(c: Coordinate) -> u8 {
    match c {
        Coordinate::First => 1,
        Coordinate::Second => 2,
    }
}

/// `Q₁ ⊗ Q₂` on `X₁ × X₂` with effects `E¹_a ⊗ E²_b`.
pub fn tensor_povm<T: Real>(q1: &Povm<T>, q2: &Povm<T>) -> Povm<T> {
    let ps = product(q1.space(), q2.space());
    let effects = q1
        .effects()
        .iter()
        .flat_map(|a| q2.effects().iter().map(move |b| kron(a, b)))
        .collect();
    Povm::new(&ps.joint, effects).expect("kron of square blocks")
}

/// Rectangle identities for a tensor POVM.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorDilationReport<T: Real> {
    pub rectangles_checked: usize,
    /// Worst `‖(Q₁⊗Q₂)(A×B) − (V₁⊗V₂)*(P₁(A)⊗P₂(B))(V₁⊗V₂)‖_max` using the
    /// factor dilations.
    pub factor_dilation_residual: T,
    /// Worst `‖(Q₁⊗Q₂)(A×B) − W* P'₁(A) P'₂(B) W‖_max` using a dilation `W`
    /// built directly for the tensor POVM.
    pub joint_dilation_residual: T,
    pub commutator_residual: T,
}

impl<T: Real> TensorDilationReport<T> {
    pub fn max_residual(&self) -> T {
        self.factor_dilation_residual.max(self.joint_dilation_residual)
    }
}

/// Sweeps the tensor rectangle identity through two independent dilations.
pub fn tensor_dilation_check<T: Real>(
    q1: &Povm<T>,
    q2: &Povm<T>,
    tol: &Tolerance<T>,
) -> Result<TensorDilationReport<T>> {
    let tensor = tensor_povm(q1, q2);
    let ps = tensor.space().as_product().expect("tensor POVMs live on products");
    let d1 = dilate(q1, false, tol)?;
    let d2 = dilate(q2, false, tol)?;
    let v = kron(d1.isometry(), d2.isometry());
    let joint = split_product(&dilate(&tensor, false, tol)?)?;

    let (lefts, rights) = rectangle_events(&ps);
    let mut factor_res = T::zero();
    let mut joint_res = T::zero();
    let mut comm = T::zero();
    for a in &lefts {
        let p1 = d1.apply_pvm(a)?;
        let jp1 = joint.p1(a)?;
        for b in &rights {
            let lhs = tensor.evaluate(&ps.rectangle(a, b)?)?;
            let middle = kron(&p1, &d2.apply_pvm(b)?);
            let via_factors = &(&v.adjoint() * &middle) * &v;
            factor_res = factor_res.max(lhs.max_abs_diff(&via_factors));
            let jp2 = joint.p2(b)?;
            let via_joint = joint.dilation().compress(&(&jp1 * &jp2));
            joint_res = joint_res.max(lhs.max_abs_diff(&via_joint));
            comm = comm.max(jp1.commutator(&jp2).max_abs());
        }
    }
    Ok(TensorDilationReport {
        rectangles_checked: lefts.len() * rights.len(),
        factor_dilation_residual: factor_res,
        joint_dilation_residual: joint_res,
        commutator_residual: comm,
    })
}

/// For a polymorphism `Q` with dilation `V`: worst
/// `‖Q₁(A)⊗Q₂(B) − (V⊗V)*(P₁(A)⊗P₂(B))(V⊗V)‖_max`, evaluating the right side
/// as `(V*P₁(A)V) ⊗ (V*P₂(B)V)`.
pub fn polymorphism_tensor_residual<T: Real>(qp: &QuantumPolymorphism<T>, tol: &Tolerance<T>) -> Result<T> {
    let split = split_product(&dilate(&qp.joint, false, tol)?)?;
    let (lefts, rights) = rectangle_events(&qp.product);
    let mut worst = T::zero();
    for a in &lefts {
        let c1 = split.dilation().compress(&split.p1(a)?);
        let q1 = qp.first.evaluate(a)?;
        for b in &rights {
            let c2 = split.dilation().compress(&split.p2(b)?);
            let lhs = kron(&q1, &qp.second.evaluate(b)?);
            worst = worst.max(lhs.max_abs_diff(&kron(&c1, &c2)));
        }
    }
    Ok(worst)
}

fn rectangle_events(ps: &ProductSpace) -> (Vec<Event>, Vec<Event>) {
    if ps.left.len() <= EXHAUSTIVE_RECTANGLE_ATOMS && ps.right.len() <= EXHAUSTIVE_RECTANGLE_ATOMS {
        (all_events(&ps.left).expect("small"), all_events(&ps.right).expect("small"))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0xd6);
        (
            sample_events(&ps.left, SAMPLED_RECTANGLE_EVENTS, &mut rng),
            sample_events(&ps.right, SAMPLED_RECTANGLE_EVENTS, &mut rng),
        )
    }
}

/// One side of the tensor derivative check.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSideReport<T: Real> {
    pub gamma_residual: T,
    pub reconstruction_residual: T,
    pub gamma_spectrum: Vec<T>,
    /// `‖Γ² − Γ‖_max`; zero exactly when the compressed projection is a projection.
    pub idempotence_defect: T,
    pub domination_margin: T,
}

/// Both tensor derivative identities for fixed `A` and `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorRnReport<T: Real> {
    /// `d(Q₁⊗Q₂)(·×B) / d(Q₁⊗Q₂)(·×X₂) = I ⊗ P₂(B)`.
    pub right: TensorSideReport<T>,
    /// `d(Q₁⊗Q₂)(A×·) / d(Q₁⊗Q₂)(X₁×·) = P₁(A) ⊗ I`.
    pub left: TensorSideReport<T>,
}

impl<T: Real> TensorRnReport<T> {
    pub fn max_gamma_residual(&self) -> T {
        self.right.gamma_residual.max(self.left.gamma_residual)
    }

    pub fn passed(&self, tol: &Tolerance<T>) -> bool {
        self.max_gamma_residual() <= tol.chained()
    }
}

/// Kernel derivatives of the tensor POVM against its coordinate restrictions.
///
/// `B`-side: `L(A₁,A₂) = Q₁(A₁∩A₂) ⊗ Q₂(B)`, `K(A₁,A₂) = Q₁(A₁∩A₂) ⊗ I` over
/// the events of `X₁`; `Γ` must equal the compression of `I ⊗ P₂(B)`. The
/// `A`-side is the mirror image.
pub fn tensor_rn_check<T: Real>(
    q1: &Povm<T>,
    q2: &Povm<T>,
    a: &Event,
    b: &Event,
    tol: &Tolerance<T>,
) -> Result<TensorRnReport<T>> {
    if a.space() != q1.space() || b.space() != q2.space() {
        return Err(domain_err!("A must be an event of Q₁'s space and B of Q₂'s"));
    }
    let d1 = dilate(q1, false, tol)?;
    let d2 = dilate(q2, false, tol)?;
    let id1 = ComplexMatrix::identity(q1.dim());
    let id2 = ComplexMatrix::identity(q2.dim());
    let big1 = ComplexMatrix::identity(d1.big_dim());
    let big2 = ComplexMatrix::identity(d2.big_dim());

    let fam1 = index_family(q1.space());
    let q2b = q2.evaluate(b)?;
    let right = tensor_side(
        &fam1,
        |e| Ok(kron(&q1.evaluate(e)?, &q2b)),
        |e| Ok(kron(&q1.evaluate(e)?, &id2)),
        |e| Ok(kron(&(&d1.apply_pvm(e)? * d1.isometry()), d2.isometry())),
        &kron(&big1, &d2.apply_pvm(b)?),
        tol,
    )?;

    let fam2 = index_family(q2.space());
    let q1a = q1.evaluate(a)?;
    let left = tensor_side(
        &fam2,
        |e| Ok(kron(&q1a, &q2.evaluate(e)?)),
        |e| Ok(kron(&id1, &q2.evaluate(e)?)),
        |e| Ok(kron(d1.isometry(), &(&d2.apply_pvm(e)? * d2.isometry()))),
        &kron(&d1.apply_pvm(a)?, &big2),
        tol,
    )?;
    Ok(TensorRnReport { right, left })
}

fn tensor_side<T: Real>(
    family: &[Event],
    l_value: impl Fn(&Event) -> Result<ComplexMatrix<T>>,
    k_value: impl Fn(&Event) -> Result<ComplexMatrix<T>>,
    reference_column: impl Fn(&Event) -> Result<ComplexMatrix<T>>,
    projection: &ComplexMatrix<T>,
    tol: &Tolerance<T>,
) -> Result<TensorSideReport<T>> {
    let labels: Vec<String> = family.iter().map(ToString::to_string).collect();
    let meet = |i: usize, j: usize| family[i].intersection(&family[j]).expect("same space");
    let dim = k_value(&family[0])?.rows();
    let mut err = None;
    let mut capture = |r: Result<ComplexMatrix<T>>| match r {
        Ok(m) => m,
        Err(e) => {
            err.get_or_insert(e);
            ComplexMatrix::zeros(dim, dim)
        }
    };
    let l = OperatorKernel::from_fn(labels.clone(), dim, |i, j| capture(l_value(&meet(i, j))))?;
    let k = OperatorKernel::from_fn(labels, dim, |i, j| capture(k_value(&meet(i, j))))?;
    if let Some(e) = err {
        return Err(e);
    }
    let fact = factor(&k, tol)?;
    let domination_margin = min_eigenvalue(&(&k.gram() - &l.gram()))?;
    let rn = rn_derivative_with(&l, &k, &fact, tol)
        .map_err(|e| Error::TheoremViolation(format!("tensor kernel derivative failed: {e}")))?;
    let columns = family.iter().map(&reference_column).collect::<Result<Vec<_>>>()?;
    let reference = ComplexMatrix::hstack(&columns, projection.rows());
    let j = fact.intertwiner(&reference, tol)?;
    let expected = (&(&j * projection) * &j.adjoint()).hermitian_part().0;
    let gamma_residual = rn.gamma.max_abs_diff(&expected);
    let idempotence_defect = (&rn.gamma * &rn.gamma).max_abs_diff(&rn.gamma);
    Ok(TensorSideReport {
        gamma_residual,
        reconstruction_residual: rn.residual,
        gamma_spectrum: rn.spectrum,
        idempotence_defect,
        domination_margin,
    })
}

/// Sampled check that restricting RKHS elements along coordinate preimages is
/// norm-nonincreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport<T: Real> {
    pub samples: usize,
    pub violations: usize,
    /// Worst `‖f∘π⁻¹‖² − ‖f‖²` (negative when every sample contracts).
    pub max_excess: T,
    /// Worst distance of a restricted function from the range of the target
    /// Gram matrix; zero when the restriction lies in the target RKHS.
    pub max_range_residual: T,
    /// `max ‖K_i(A,B) − K(π⁻¹A, π⁻¹B)‖_max`.
    pub compatibility_residual: T,
}

impl<T: Real> ContractionReport<T> {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Samples `f = Σ_j K(·, E_j) h_j` in the RKHS of `K(E, E') = Q(E ∩ E')` on
/// the product space and compares `‖f‖` with the norm of its restriction
/// `A ↦ f(π_i⁻¹ A)` in the RKHS of `K_i(A, B) = Q_i(A ∩ B)`.
///
/// Norms are exact Gram quadratic forms; the target norm uses the
/// pseudo-inverse of the block Gram matrix of `K_i`. Each sample has one to
/// three terms; sample 0 is the zero function.
pub fn rkhs_pullback_contraction<T: Real>(
    q: &Povm<T>,
    coordinate: Coordinate,
    samples: usize,
    seed: u64,
    tol: &Tolerance<T>,
) -> Result<ContractionReport<T>> {
    let qp = make_qpoly(q, tol)?;
    let ps = &qp.product;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let source = event_family(&ps.joint, 256, SAMPLED_INDEX_EVENTS, &mut rng);
    let target = index_family(ps.factor(coordinate));
    let pulled: Vec<Event> = target
        .iter()
        .map(|a| ps.preimage(coordinate, a))
        .collect::<Result<_>>()?;
    let d = q.dim();

    let ki = event_kernel(qp.marginal(coordinate), &target)?;
    let pulled_kernel = event_kernel(q, &pulled)?;
    let compatibility_residual = ki.max_abs_diff(&pulled_kernel)?;
    let gi = ki.gram();
    let gi_pinv = pinv(&gi, tol);

    let mut report = ContractionReport {
        samples,
        violations: 0,
        max_excess: T::lit(f64::NEG_INFINITY),
        max_range_residual: T::zero(),
        compatibility_residual,
    };
    for s in 0..samples {
        let terms = if s == 0 { 0 } else { rng.random_range(1..=3) };
        let picks: Vec<(usize, Vec<Cplx<T>>)> = (0..terms)
            .map(|_| (rng.random_range(0..source.len()), gaussian_vector(&mut rng, d)))
            .collect();
        let (source_norm, restricted) = pullback_sample(q, &source, &pulled, &picks)?;
        let (target_norm, range_residual) = gram_norm(&gi, &gi_pinv, &restricted);
        let excess = target_norm - source_norm;
        if excess > tol.chained() * source_norm.max(T::one()) {
            report.violations += 1;
        }
        report.max_excess = report.max_excess.max(excess);
        report.max_range_residual = report.max_range_residual.max(range_residual);
    }
    if samples == 0 {
        report.max_excess = T::zero();
    }
    Ok(report)
}

/// `(‖f‖², y)` with `y_k = f(pulled_k)` for `f = Σ K(·, source[j]) h`.
pub(crate) fn pullback_sample<T: Real>(
    q: &Povm<T>,
    source: &[Event],
    pulled: &[Event],
    picks: &[(usize, Vec<Cplx<T>>)],
) -> Result<(T, ComplexMatrix<T>)> {
    let d = q.dim();
    let mut norm = Cplx::<T>::default();
    for (ej, hj) in picks {
        for (ek, hk) in picks {
            let block = q.evaluate(&source[*ej].intersection(&source[*ek])?)?;
            let hk_col = ComplexMatrix::column(hk);
            let hj_col = ComplexMatrix::column(hj);
            norm += (&(&hj_col.adjoint() * &block) * &hk_col).get(0, 0);
        }
    }
    let mut y = ComplexMatrix::zeros(pulled.len() * d, 1);
    for (k, a) in pulled.iter().enumerate() {
        let mut acc = ComplexMatrix::zeros(d, 1);
        for (ej, hj) in picks {
            let block = q.evaluate(&a.intersection(&source[*ej])?)?;
            acc = &acc + &(&block * &ComplexMatrix::column(hj));
        }
        y.set_block(k * d, 0, &acc);
    }
    Ok((norm.re, y))
}

/// `(y* G⁺ y, ‖G G⁺ y − y‖_max)`.
pub(crate) fn gram_norm<T: Real>(g: &ComplexMatrix<T>, g_pinv: &ComplexMatrix<T>, y: &ComplexMatrix<T>) -> (T, T) {
    if y.rows() != g.rows() {
        panic!("{}", dim_err!("value vector does not match the Gram matrix"));
    }
    let solved = g_pinv * y;
    let norm = (&y.adjoint() * &solved).get(0, 0).re;
    let residual = (g * &solved).max_abs_diff(y);
    (norm, residual)
}

/// Spectrum helper shared by reports.
pub fn spectrum<T: Real>(m: &ComplexMatrix<T>) -> Result<Vec<T>> {
    eigenvalues(m)
}
