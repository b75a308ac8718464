//! Positive operator-valued measures on finite spaces.
//!
//! A POVM is stored by its atom effects only; the value on an event is always
//! the sum of the effects of its atoms, so finite additivity holds by
//! construction and validation concentrates on positivity and completeness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classical::{FiniteMeasure, JointMeasure};
use crate::error::{dim_err, domain_err, Result};
use crate::linalg::{eigh, is_psd, ComplexMatrix, Tolerance};
use crate::measure::{all_events, random_partition, sample_events, Coordinate, Event, FiniteSpace};
use crate::scalar::{cre, Cplx, Real};

const ADDITIVITY_FAMILIES: usize = 16;
const SAMPLED_PAIRS: usize = 64;
const EXHAUSTIVE_PAIR_ATOMS: usize = 5;

/// One effect per atom, each a `dim x dim` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm<T: Real> {
    space: FiniteSpace,
    dim: usize,
    effects: Vec<ComplexMatrix<T>>,
}

impl<T: Real> Povm<T> {
    /// Checks shapes only; use [`validate_povm`] for the axioms.
    pub fn new(space: &FiniteSpace, effects: Vec<ComplexMatrix<T>>) -> Result<Self> {
        if effects.len() != space.len() {
            return Err(dim_err!("{} effects for a {}-atom space", effects.len(), space.len()));
        }
        let dim = effects[0].rows();
        if dim == 0 {
            return Err(dim_err!("POVM dimension must be positive"));
        }
        if let Some(k) = effects.iter().position(|e| e.shape() != (dim, dim)) {
            return Err(dim_err!(
                "effect for atom `{}` is {}x{}, expected {dim}x{dim}",
                space.label(k),
                effects[k].rows(),
                effects[k].cols()
            ));
        }
        Ok(Self {
            space: space.clone(),
            dim,
            effects,
        })
    }

    /// Scalar POVM `E_s = μ(s)` of a measure.
    pub fn from_measure(mu: &FiniteMeasure<T>) -> Self {
        let effects = mu
            .weights()
            .iter()
            .map(|&w| ComplexMatrix::from_real_diagonal(&[w]))
            .collect();
        Self {
            space: mu.space().clone(),
            dim: 1,
            effects,
        }
    }

    /// Scalar POVM on the product space of a joint measure.
    pub fn from_joint(nu: &JointMeasure<T>) -> Self {
        let effects = nu
            .weights()
            .iter()
            .map(|&w| ComplexMatrix::from_real_diagonal(&[w]))
            .collect();
        Self {
            space: nu.space().joint.clone(),
            dim: 1,
            effects,
        }
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn effects(&self) -> &[ComplexMatrix<T>] {
        &self.effects
    }

    pub fn effect(&self, atom: usize) -> &ComplexMatrix<T> {
        &self.effects[atom]
    }

    /// `Q(A) = Σ_{j∈A} E_j`.
    pub fn evaluate(&self, event: &Event) -> Result<ComplexMatrix<T>> {
        if event.space() != &self.space {
            return Err(domain_err!("event {event} is not on this POVM's space"));
        }
        Ok(self.sum_over(event.members()))
    }

    pub(crate) fn sum_over(&self, atoms: &[usize]) -> ComplexMatrix<T> {
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for &j in atoms {
            acc = &acc + &self.effects[j];
        }
        acc
    }

    /// Effects `U* E U` for a unitary (or isometry) `U`.
    pub fn conjugated(&self, u: &ComplexMatrix<T>) -> Result<Self> {
        if u.rows() != self.dim {
            return Err(dim_err!("conjugating matrix has {} rows, POVM dim is {}", u.rows(), self.dim));
        }
        let ua = u.adjoint();
        Self::new(&self.space, self.effects.iter().map(|e| &(&ua * e) * u).collect())
    }

    /// Same effects viewed on another space with the same atom count.
    pub fn relabeled(&self, space: &FiniteSpace) -> Result<Self> {
        Self::new(space, self.effects.clone())
    }
}

/// A POVM whose atom effects are expected to be mutually orthogonal projections.
///
/// Shares the [`Povm`] representation; [`validate_pvm`] checks the extra laws.
#[derive(Debug, Clone, PartialEq)]
pub struct Pvm<T: Real>(Povm<T>);

impl<T: Real> Pvm<T> {
    pub fn new(space: &FiniteSpace, effects: Vec<ComplexMatrix<T>>) -> Result<Self> {
        Povm::new(space, effects).map(Self)
    }

    pub fn from_povm(povm: Povm<T>) -> Self {
        Self(povm)
    }

    /// Spectral measure of the standard basis: atom `i` projects onto `e_i`.
    pub fn coordinate(space: &FiniteSpace) -> Self {
        let n = space.len();
        let effects = (0..n)
            .map(|i| {
                let mut d = vec![T::zero(); n];
                d[i] = T::one();
                ComplexMatrix::from_real_diagonal(&d)
            })
            .collect();
        Self(Povm {
            space: space.clone(),
            dim: n,
            effects,
        })
    }

    pub fn as_povm(&self) -> &Povm<T> {
        &self.0
    }

    pub fn into_povm(self) -> Povm<T> {
        self.0
    }
}

/// Outcome of one axiom check.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub passed: bool,
    pub worst_residual: f64,
}

/// Per-axiom validation outcome for a POVM or PVM.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub kind: &'static str,
    pub checks: Vec<AxiomCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn check<T: Real>(name: &'static str, residual: T, threshold: T) -> AxiomCheck {
    AxiomCheck {
        name,
        passed: residual <= threshold,
        worst_residual: residual.as_f64(),
    }
}

/// Completeness, positivity and finite additivity.
pub fn validate_povm<T: Real>(q: &Povm<T>, tol: &Tolerance<T>) -> ValidationReport {
    let n = q.space.len();
    let threshold = tol.scaled(T::lit(n as f64));
    let mut checks = Vec::new();

    let total = q.sum_over(&(0..n).collect::<Vec<_>>());
    let empty = q.sum_over(&[]);
    let completeness = total
        .max_abs_diff(&ComplexMatrix::identity(q.dim))
        .max(empty.max_abs());
    checks.push(check("completeness", completeness, threshold));

    let mut all_psd = true;
    let mut worst = T::zero();
    for e in &q.effects {
        let eig = eigh(e).expect("square effect");
        worst = worst.max((-eig.min()).max(T::zero())).max(eig.anti_hermitian_residual);
        all_psd &= is_psd(e, tol).expect("square effect");
    }
    checks.push(AxiomCheck {
        name: "positivity",
        passed: all_psd,
        worst_residual: worst.as_f64(),
    });

    let mut rng = ChaCha8Rng::seed_from_u64(0xadd);
    let mut worst = T::zero();
    for event in sample_events(&q.space, ADDITIVITY_FAMILIES, &mut rng) {
        let parts = rng.random_range(1..=n.max(1));
        let pieces = random_partition(&event, parts, &mut rng);
        let whole = q.evaluate(&event).expect("own space");
        let mut summed = ComplexMatrix::zeros(q.dim, q.dim);
        for p in &pieces {
            summed = &summed + &q.evaluate(p).expect("own space");
        }
        worst = worst.max(whole.max_abs_diff(&summed));
    }
    checks.push(check("additivity", worst, threshold));

    ValidationReport { kind: "povm", checks }
}

/// All POVM checks plus idempotence, self-adjointness, orthogonality and
/// multiplicativity `Q(A∩B) = Q(A)Q(B)`.
pub fn validate_pvm<T: Real>(p: &Pvm<T>, tol: &Tolerance<T>) -> ValidationReport {
    let q = &p.0;
    let mut report = validate_povm(q, tol);
    report.kind = "pvm";
    let threshold = tol.scaled(T::one());

    let mut idem = T::zero();
    let mut adj = T::zero();
    for e in &q.effects {
        idem = idem.max((e * e).max_abs_diff(e));
        adj = adj.max(e.adjoint().max_abs_diff(e));
    }
    report.checks.push(check("idempotence", idem, threshold));
    report.checks.push(check("self_adjointness", adj, threshold));

    let mut orth = T::zero();
    for (i, a) in q.effects.iter().enumerate() {
        for b in &q.effects[i + 1..] {
            orth = orth.max((a * b).max_abs());
        }
    }
    report.checks.push(check("orthogonality", orth, threshold));

    let n = q.space.len();
    let pairs: Vec<(Event, Event)> = if n <= EXHAUSTIVE_PAIR_ATOMS {
        let ev = all_events(&q.space).expect("small space");
        ev.iter()
            .flat_map(|a| ev.iter().map(move |b| (a.clone(), b.clone())))
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1117);
        let a = sample_events(&q.space, SAMPLED_PAIRS, &mut rng);
        let b = sample_events(&q.space, SAMPLED_PAIRS, &mut rng);
        a.into_iter().zip(b).collect()
    };
    let mut mult = T::zero();
    for (a, b) in &pairs {
        let lhs = q.evaluate(&a.intersection(b).expect("same space")).expect("own space");
        let rhs = &q.evaluate(a).expect("own space") * &q.evaluate(b).expect("own space");
        mult = mult.max(lhs.max_abs_diff(&rhs));
    }
    report.checks.push(check("multiplicativity", mult, threshold));
    report
}

/// Marginal POVM `Q_i = Q ∘ π_i⁻¹` of a POVM on a product space.
pub fn marginal_povm<T: Real>(q: &Povm<T>, coordinate: Coordinate) -> Result<Povm<T>> {
    let ps = q
        .space
        .as_product()
        .ok_or_else(|| domain_err!("marginal_povm needs a POVM on a product space"))?;
    let factor = ps.factor(coordinate).clone();
    let effects = (0..factor.len())
        .map(|a| {
            let pre = ps
                .preimage(coordinate, &Event::atom(&factor, a).expect("in range"))
                .expect("factor event");
            q.sum_over(pre.members())
        })
        .collect();
    Povm::new(&factor, effects)
}

/// A vector-valued function on the atoms of a finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T: Real> {
    space: FiniteSpace,
    dim: usize,
    vectors: Vec<Vec<Cplx<T>>>,
}

impl<T: Real> VectorField<T> {
    pub fn new(space: &FiniteSpace, vectors: Vec<Vec<Cplx<T>>>) -> Result<Self> {
        if vectors.len() != space.len() {
            return Err(dim_err!("{} vectors for a {}-atom space", vectors.len(), space.len()));
        }
        let dim = vectors[0].len();
        if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
            return Err(dim_err!("vector field entries must share a positive dimension"));
        }
        if vectors.iter().flatten().any(|z| !crate::scalar::is_finite(*z)) {
            return Err(domain_err!("vector field has non-finite entries"));
        }
        Ok(Self {
            space: space.clone(),
            dim,
            vectors,
        })
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, atom: usize) -> &[Cplx<T>] {
        &self.vectors[atom]
    }
}

/// Covariance operator together with the trace predicted by the integral formula.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariance<T: Real> {
    /// `C = Σ_s μ(s) |G(s)⟩⟨F(s)|`.
    pub operator: ComplexMatrix<T>,
    /// `Σ_s μ(s) ⟨F(s), G(s)⟩`.
    pub trace: Cplx<T>,
}

/// Finite instance of `C φ = ∫ ⟨F(s), φ⟩ G(s) μ(ds)`.
pub fn covariance_operator<T: Real>(
    f: &VectorField<T>,
    g: &VectorField<T>,
    mu: &FiniteMeasure<T>,
) -> Result<Covariance<T>> {
    if f.space != g.space || &f.space != mu.space() {
        return Err(domain_err!("F, G and μ must share one space"));
    }
    if f.dim != g.dim {
        return Err(dim_err!("F has dimension {}, G has {}", f.dim, g.dim));
    }
    let mut operator = ComplexMatrix::zeros(f.dim, f.dim);
    let mut trace = Cplx::default();
    for s in 0..f.space.len() {
        let w = mu.weight(s);
        let (fs, gs) = (&f.vectors[s], &g.vectors[s]);
        operator = &operator + &ComplexMatrix::ket_bra(gs, fs).scale_real(w);
        let inner = fs
            .iter()
            .zip(gs)
            .fold(Cplx::<T>::default(), |acc, (a, b)| acc + a.conj() * *b);
        trace += inner * cre(w);
    }
    Ok(Covariance { operator, trace })
}
