//! Classical polymorphisms: joint measures on `X₁ × X₂`, their marginals and
//! conditional measures, and the finite Bayes/Rokhlin disintegration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{dim_err, domain_err, Result};
use crate::linalg::Tolerance;
use crate::measure::{all_events, sample_events, Coordinate, Event, FiniteSpace, ProductSpace};
use crate::scalar::Real;

/// Factor size up to which [`disintegration_check`] sweeps every rectangle.
pub const EXHAUSTIVE_FACTOR_ATOMS: usize = 6;
const SAMPLED_EVENTS: usize = 64;

/// Nonnegative weights on the atoms of a finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasure<T: Real> {
    space: FiniteSpace,
    weights: Vec<T>,
}

impl<T: Real> FiniteMeasure<T> {
    pub fn new(space: &FiniteSpace, weights: Vec<T>) -> Result<Self> {
        check_weights(space.len(), &weights)?;
        Ok(Self {
            space: space.clone(),
            weights,
        })
    }

    /// Point mass at atom `i`.
    pub fn dirac(space: &FiniteSpace, i: usize) -> Result<Self> {
        if i >= space.len() {
            return Err(domain_err!("atom {i} out of range"));
        }
        let mut w = vec![T::zero(); space.len()];
        w[i] = T::one();
        Self::new(space, w)
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> T {
        self.weights[i]
    }

    pub fn total(&self) -> T {
        self.weights.iter().fold(T::zero(), |a, &w| a + w)
    }

    pub fn measure_of(&self, event: &Event) -> Result<T> {
        if event.space() != &self.space {
            return Err(domain_err!("event is not on this measure's space"));
        }
        Ok(event.members().iter().fold(T::zero(), |a, &i| a + self.weights[i]))
    }

    pub fn is_probability(&self, tol: &Tolerance<T>) -> bool {
        tol.approx_eq(self.total(), T::one())
    }

    pub fn normalized(&self) -> Result<Self> {
        let total = self.total();
        if total <= T::zero() {
            return Err(domain_err!("cannot normalize a zero measure"));
        }
        Self::new(&self.space, self.weights.iter().map(|&w| w / total).collect())
    }
}

/// Nonnegative weights on the atoms of a product space.
#[derive(Debug, Clone, PartialEq)]
pub struct JointMeasure<T: Real> {
    space: ProductSpace,
    weights: Vec<T>,
}

impl<T: Real> JointMeasure<T> {
    /// Weights in product-atom order (left index major).
    pub fn new(space: &ProductSpace, weights: Vec<T>) -> Result<Self> {
        check_weights(space.joint.len(), &weights)?;
        Ok(Self {
            space: space.clone(),
            weights,
        })
    }

    /// Builds from a `|X₁| x |X₂|` table.
    pub fn from_table(space: &ProductSpace, table: &[Vec<T>]) -> Result<Self> {
        if table.len() != space.left.len() || table.iter().any(|r| r.len() != space.right.len()) {
            return Err(dim_err!(
                "table must be {}x{}",
                space.left.len(),
                space.right.len()
            ));
        }
        Self::new(space, table.iter().flatten().copied().collect())
    }

    /// The product measure `μ₁ × μ₂`.
    pub fn product(mu1: &FiniteMeasure<T>, mu2: &FiniteMeasure<T>) -> Self {
        let space = crate::measure::product(&mu1.space, &mu2.space);
        let weights = mu1
            .weights
            .iter()
            .flat_map(|&a| mu2.weights.iter().map(move |&b| a * b))
            .collect();
        Self { space, weights }
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> T {
        self.weights[self.space.index(i, j)]
    }

    pub fn total(&self) -> T {
        self.weights.iter().fold(T::zero(), |a, &w| a + w)
    }

    pub fn measure_of(&self, event: &Event) -> Result<T> {
        if event.space() != &self.space.joint {
            return Err(domain_err!("event is not on this measure's product space"));
        }
        Ok(event.members().iter().fold(T::zero(), |a, &k| a + self.weights[k]))
    }

    /// Relabels `(a, b)` as `(b, a)`.
    pub fn swapped(&self) -> Self {
        let (space, perm) = self.space.transposed();
        let weights = perm.iter().map(|&k| self.weights[k]).collect();
        Self { space, weights }
    }

    /// Convex combination `(1 - t)·self + t·other` on the same space.
    pub fn mix(&self, other: &Self, t: T) -> Result<Self> {
        if self.space != other.space {
            return Err(domain_err!("cannot mix measures on different spaces"));
        }
        let weights = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(&a, &b)| (T::one() - t) * a + t * b)
            .collect();
        Self::new(&self.space, weights)
    }
}

fn check_weights<T: Real>(expected: usize, weights: &[T]) -> Result<()> {
    if weights.len() != expected {
        return Err(dim_err!("expected {expected} weights, got {}", weights.len()));
    }
    if let Some(w) = weights
        .iter()
        .find(|w| !w.as_f64().is_finite() || **w < T::zero())
    {
        return Err(domain_err!("weights must be finite and nonnegative, found {w}"));
    }
    Ok(())
}

/// Coordinate pushforwards `μ_i = ν ∘ π_i⁻¹`.
pub fn marginals<T: Real>(nu: &JointMeasure<T>) -> (FiniteMeasure<T>, FiniteMeasure<T>) {
    let (n1, n2) = (nu.space.left.len(), nu.space.right.len());
    let mut m1 = vec![T::zero(); n1];
    let mut m2 = vec![T::zero(); n2];
    for i in 0..n1 {
        for j in 0..n2 {
            let w = nu.weight(i, j);
            m1[i] += w;
            m2[j] += w;
        }
    }
    (
        FiniteMeasure {
            space: nu.space.left.clone(),
            weights: m1,
        },
        FiniteMeasure {
            space: nu.space.right.clone(),
            weights: m2,
        },
    )
}

/// Conditional measure `ν(· | x)` given an atom of coordinate `given`.
///
/// For `given = First` this is a probability measure on `X₂` with
/// `ν(b | a) = ν(a, b) / μ₁(a)`.
pub fn conditional<T: Real>(nu: &JointMeasure<T>, given: Coordinate, atom: usize) -> Result<FiniteMeasure<T>> {
    let (n1, n2) = (nu.space.left.len(), nu.space.right.len());
    let (limit, other_len, other_space) = match given {
        Coordinate::First => (n1, n2, &nu.space.right),
        Coordinate::Second => (n2, n1, &nu.space.left),
    };
    if atom >= limit {
        return Err(domain_err!("conditioning atom {atom} out of range"));
    }
    let cell = |k: usize| match given {
        Coordinate::First => nu.weight(atom, k),
        Coordinate::Second => nu.weight(k, atom),
    };
    let mass = (0..other_len).fold(T::zero(), |a, k| a + cell(k));
    if mass <= T::zero() {
        return Err(domain_err!(
            "conditional undefined: atom {atom} of coordinate {given:?} has zero marginal mass"
        ));
    }
    FiniteMeasure::new(other_space, (0..other_len).map(|k| cell(k) / mass).collect())
}

/// Result of sweeping the disintegration identities over rectangles.
#[derive(Debug, Clone, PartialEq)]
pub struct DisintegrationReport<T: Real> {
    pub rectangles_checked: usize,
    pub exhaustive: bool,
    /// Worst `|Σ_{a∈A} μ₁(a) ν(B|a) − ν(A×B)|`.
    pub max_violation_first: T,
    /// Worst `|Σ_{b∈B} μ₂(b) ν(A|b) − ν(A×B)|`.
    pub max_violation_second: T,
    pub skipped_zero_mass_atoms: usize,
}

impl<T: Real> DisintegrationReport<T> {
    pub fn max_violation(&self) -> T {
        self.max_violation_first.max(self.max_violation_second)
    }

    pub fn passed(&self, tol: &Tolerance<T>) -> bool {
        self.max_violation() <= tol.abs
    }
}

/// Checks `ν(A×B) = Σ_{a∈A} μ₁(a)ν(B|a) = Σ_{b∈B} μ₂(b)ν(A|b)`.
///
/// Every rectangle is visited when both factors have at most
/// [`EXHAUSTIVE_FACTOR_ATOMS`] atoms; otherwise a fixed-seed sample is used.
/// Zero-mass conditioning atoms contribute nothing to either side and are
/// skipped.
pub fn disintegration_check<T: Real>(nu: &JointMeasure<T>, _tol: &Tolerance<T>) -> DisintegrationReport<T> {
    let ps = &nu.space;
    let (mu1, mu2) = marginals(nu);
    let cond1: Vec<Option<FiniteMeasure<T>>> = (0..ps.left.len())
        .map(|a| conditional(nu, Coordinate::First, a).ok())
        .collect();
    let cond2: Vec<Option<FiniteMeasure<T>>> = (0..ps.right.len())
        .map(|b| conditional(nu, Coordinate::Second, b).ok())
        .collect();
    let skipped = cond1.iter().chain(&cond2).filter(|c| c.is_none()).count();

    let exhaustive = ps.left.len() <= EXHAUSTIVE_FACTOR_ATOMS && ps.right.len() <= EXHAUSTIVE_FACTOR_ATOMS;
    let (lefts, rights) = if exhaustive {
        (all_events(&ps.left).expect("small"), all_events(&ps.right).expect("small"))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        (
            sample_events(&ps.left, SAMPLED_EVENTS, &mut rng),
            sample_events(&ps.right, SAMPLED_EVENTS, &mut rng),
        )
    };

    let mut worst1 = T::zero();
    let mut worst2 = T::zero();
    let mut count = 0;
    for a in &lefts {
        for b in &rights {
            let rect = ps.rectangle(a, b).expect("factor events");
            let direct = nu.measure_of(&rect).expect("joint event");
            let via1 = a.members().iter().fold(T::zero(), |acc, &x| match &cond1[x] {
                Some(c) => acc + mu1.weight(x) * c.measure_of(b).expect("right event"),
                None => acc,
            });
            let via2 = b.members().iter().fold(T::zero(), |acc, &y| match &cond2[y] {
                Some(c) => acc + mu2.weight(y) * c.measure_of(a).expect("left event"),
                None => acc,
            });
            worst1 = worst1.max((via1 - direct).magnitude());
            worst2 = worst2.max((via2 - direct).magnitude());
            count += 1;
        }
    }
    DisintegrationReport {
        rectangles_checked: count,
        exhaustive,
        max_violation_first: worst1,
        max_violation_second: worst2,
        skipped_zero_mass_atoms: skipped,
    }
}

/// Whether `ν` has marginals `(μ₁, μ₂)` atom-wise within `tol.abs`.
pub fn is_polymorphism<T: Real>(
    nu: &JointMeasure<T>,
    mu1: &FiniteMeasure<T>,
    mu2: &FiniteMeasure<T>,
    tol: &Tolerance<T>,
) -> Result<bool> {
    if mu1.space != nu.space.left || mu2.space != nu.space.right {
        return Err(domain_err!("claimed marginals live on different spaces than the joint measure"));
    }
    let (m1, m2) = marginals(nu);
    let close = |a: &[T], b: &[T]| a.iter().zip(b).all(|(&x, &y)| (x - y).magnitude() <= tol.abs);
    Ok(close(&m1.weights, &mu1.weights) && close(&m2.weights, &mu2.weights))
}
