//! Finite measurable spaces with power-set σ-algebras, events, and products.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{domain_err, Result};

/// Separator used for product-space atom labels, `"a|b"`.
pub const PAIR_SEPARATOR: char = '|';

/// Largest space for which every event is enumerated.
pub const MAX_ENUMERABLE_ATOMS: usize = 12;

/// An ordered, labeled finite set of atoms.
///
/// Cloning is cheap. Spaces built by [`product`] remember their two factors.
#[derive(Clone)]
pub struct FiniteSpace {
    inner: Arc<SpaceInner>,
}

struct SpaceInner {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    factors: Option<(FiniteSpace, FiniteSpace)>,
}

impl FiniteSpace {
    /// Atom labels must be nonempty, distinct and free of `'|'`.
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        for l in &labels {
            if l.is_empty() {
                return Err(domain_err!("atom labels must be nonempty"));
            }
            if l.contains(PAIR_SEPARATOR) {
                return Err(domain_err!(
                    "atom label `{l}` contains the reserved separator `{PAIR_SEPARATOR}`"
                ));
            }
        }
        Self::build(labels, None)
    }

    /// Space with atoms `prefix0, prefix1, ...`.
    pub fn numbered(prefix: &str, n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| format!("{prefix}{i}")))
    }

    fn build(labels: Vec<String>, factors: Option<(FiniteSpace, FiniteSpace)>) -> Result<Self> {
        if labels.is_empty() {
            return Err(domain_err!("a finite space needs at least one atom"));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(domain_err!("duplicate atom label `{l}`"));
            }
        }
        Ok(Self {
            inner: Arc::new(SpaceInner {
                labels,
                index,
                factors,
            }),
        })
    }

    pub fn len(&self) -> usize {
        self.inner.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.inner.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.inner.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.inner.index.get(label).copied()
    }

    pub fn as_product(&self) -> Option<ProductSpace> {
        self.inner.factors.as_ref().map(|(l, r)| ProductSpace {
            left: l.clone(),
            right: r.clone(),
            joint: self.clone(),
        })
    }

    pub fn is_product(&self) -> bool {
        self.inner.factors.is_some()
    }
}

impl PartialEq for FiniteSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.labels == other.inner.labels && self.inner.factors == other.inner.factors)
    }
}

impl Eq for FiniteSpace {}

impl fmt::Debug for FiniteSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inner.factors {
            Some((l, r)) => write!(f, "FiniteSpace({l:?} x {r:?})"),
            None => f.debug_list().entries(self.labels()).finish(),
        }
    }
}

/// Coordinate of a product space, `π₁` or `π₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coordinate {
    First,
    Second,
}

impl Coordinate {
    pub fn other(self) -> Self {
        match self {
            Coordinate::First => Coordinate::Second,
            Coordinate::Second => Coordinate::First,
        }
    }
}

/// View of a product space `X₁ × X₂`; atom `(i, j)` sits at index `i·|X₂| + j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSpace {
    pub left: FiniteSpace,
    pub right: FiniteSpace,
    pub joint: FiniteSpace,
}

/// Product of two finite spaces with lexicographic pair atoms.
pub fn product(left: &FiniteSpace, right: &FiniteSpace) -> ProductSpace {
    let labels = left
        .labels()
        .iter()
        .flat_map(|a| right.labels().iter().map(move |b| format!("{a}{PAIR_SEPARATOR}{b}")))
        .collect();
    let joint = FiniteSpace::build(labels, Some((left.clone(), right.clone())))
        .expect("product labels are unique when factor labels are");
    ProductSpace {
        left: left.clone(),
        right: right.clone(),
        joint,
    }
}

impl ProductSpace {
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.right.len() + j
    }

    pub fn split(&self, k: usize) -> (usize, usize) {
        (k / self.right.len(), k % self.right.len())
    }

    pub fn factor(&self, coordinate: Coordinate) -> &FiniteSpace {
        match coordinate {
            Coordinate::First => &self.left,
            Coordinate::Second => &self.right,
        }
    }

    /// `π_i⁻¹(A)`.
    pub fn preimage(&self, coordinate: Coordinate, event: &Event) -> Result<Event> {
        let factor = self.factor(coordinate);
        if event.space() != factor {
            return Err(domain_err!("event does not belong to coordinate space {coordinate:?}"));
        }
        let mut members = Vec::new();
        for k in 0..self.joint.len() {
            let (i, j) = self.split(k);
            let c = match coordinate {
                Coordinate::First => i,
                Coordinate::Second => j,
            };
            if event.contains(c) {
                members.push(k);
            }
        }
        Ok(Event::from_sorted(self.joint.clone(), members))
    }

    /// The rectangle `A × B`.
    pub fn rectangle(&self, a: &Event, b: &Event) -> Result<Event> {
        self.preimage(Coordinate::First, a)?
            .intersection(&self.preimage(Coordinate::Second, b)?)
    }

    /// Swaps the factors; returns the swapped space and the atom permutation
    /// `perm[k_swapped] = k_original`.
    pub fn transposed(&self) -> (ProductSpace, Vec<usize>) {
        let swapped = product(&self.right, &self.left);
        let perm = (0..swapped.joint.len())
            .map(|k| {
                let (j, i) = swapped.split(k);
                self.index(i, j)
            })
            .collect();
        (swapped, perm)
    }
}

/// A subset of a finite space, stored as sorted distinct atom indices.
#[derive(Clone, PartialEq, Eq)]
pub struct Event {
    space: FiniteSpace,
    members: Vec<usize>,
}

impl Event {
    pub fn new(space: &FiniteSpace, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = indices.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&i| i >= space.len()) {
            return Err(domain_err!("atom index {bad} out of range for a {}-atom space", space.len()));
        }
        members.sort_unstable();
        members.dedup();
        Ok(Self::from_sorted(space.clone(), members))
    }

    pub fn from_labels<S: AsRef<str>>(space: &FiniteSpace, labels: &[S]) -> Result<Self> {
        let indices = labels
            .iter()
            .map(|l| {
                space
                    .index_of(l.as_ref())
                    .ok_or_else(|| domain_err!("unknown atom label `{}`", l.as_ref()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, indices)
    }

    fn from_sorted(space: FiniteSpace, members: Vec<usize>) -> Self {
        Self { space, members }
    }

    pub fn empty(space: &FiniteSpace) -> Self {
        Self::from_sorted(space.clone(), Vec::new())
    }

    pub fn full(space: &FiniteSpace) -> Self {
        Self::from_sorted(space.clone(), (0..space.len()).collect())
    }

    pub fn atom(space: &FiniteSpace, i: usize) -> Result<Self> {
        Self::new(space, [i])
    }

    /// Event whose members are the set bits of `mask`.
    pub fn from_mask(space: &FiniteSpace, mask: u64) -> Self {
        let members = (0..space.len()).filter(|&i| mask >> i & 1 == 1).collect();
        Self::from_sorted(space.clone(), members)
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.members.iter().map(|&i| self.space.label(i)).collect()
    }

    fn same_space(&self, other: &Event) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(domain_err!("events live on different spaces"))
        }
    }

    pub fn union(&self, other: &Event) -> Result<Event> {
        self.same_space(other)?;
        let mut m = self.members.clone();
        m.extend_from_slice(&other.members);
        m.sort_unstable();
        m.dedup();
        Ok(Self::from_sorted(self.space.clone(), m))
    }

    pub fn intersection(&self, other: &Event) -> Result<Event> {
        self.same_space(other)?;
        let m = self
            .members
            .iter()
            .copied()
            .filter(|&i| other.contains(i))
            .collect();
        Ok(Self::from_sorted(self.space.clone(), m))
    }

    pub fn difference(&self, other: &Event) -> Result<Event> {
        self.same_space(other)?;
        let m = self
            .members
            .iter()
            .copied()
            .filter(|&i| !other.contains(i))
            .collect();
        Ok(Self::from_sorted(self.space.clone(), m))
    }

    pub fn complement(&self) -> Event {
        let m = (0..self.space.len()).filter(|&i| !self.contains(i)).collect();
        Self::from_sorted(self.space.clone(), m)
    }

    pub fn is_subset(&self, other: &Event) -> Result<bool> {
        self.same_space(other)?;
        Ok(self.members.iter().all(|&i| other.contains(i)))
    }

    pub fn is_disjoint(&self, other: &Event) -> Result<bool> {
        Ok(self.intersection(other)?.is_empty())
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels().join(","))
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Event{self}")
    }
}

/// All `2ⁿ` events, in bitmask order; refuses spaces above
/// [`MAX_ENUMERABLE_ATOMS`].
pub fn all_events(space: &FiniteSpace) -> Result<Vec<Event>> {
    let n = space.len();
    if n > MAX_ENUMERABLE_ATOMS {
        return Err(domain_err!(
            "refusing to enumerate 2^{n} events (limit is {MAX_ENUMERABLE_ATOMS} atoms)"
        ));
    }
    Ok((0..1u64 << n).map(|mask| Event::from_mask(space, mask)).collect())
}

/// `count` events where each atom is included with probability one half.
pub fn sample_events<R: Rng + ?Sized>(space: &FiniteSpace, count: usize, rng: &mut R) -> Vec<Event> {
    (0..count)
        .map(|_| {
            let members = (0..space.len()).filter(|_| rng.random_bool(0.5)).collect();
            Event::from_sorted(space.clone(), members)
        })
        .collect()
}

/// Every event when `2ⁿ <= exhaustive_limit`, otherwise the atoms, the full
/// space, and `extra` sampled events.
pub fn event_family<R: Rng + ?Sized>(
    space: &FiniteSpace,
    exhaustive_limit: usize,
    extra: usize,
    rng: &mut R,
) -> Vec<Event> {
    let n = space.len();
    if n <= MAX_ENUMERABLE_ATOMS && (1usize << n) <= exhaustive_limit {
        return all_events(space).expect("size checked");
    }
    let mut family: Vec<Event> = (0..n)
        .map(|i| Event::from_sorted(space.clone(), vec![i]))
        .collect();
    family.push(Event::full(space));
    family.extend(sample_events(space, extra, rng));
    family
}

/// Random partition of `event` into `parts` disjoint (possibly empty) events.
pub fn random_partition<R: Rng + ?Sized>(event: &Event, parts: usize, rng: &mut R) -> Vec<Event> {
    let parts = parts.max(1);
    let mut buckets = vec![Vec::new(); parts];
    for &i in event.members() {
        buckets[rng.random_range(0..parts)].push(i);
    }
    buckets
        .into_iter()
        .map(|m| Event::from_sorted(event.space.clone(), m))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize) -> FiniteSpace {
        FiniteSpace::numbered("x", n).unwrap()
    }

    #[test]
    fn labels_are_validated() {
        assert!(FiniteSpace::new(Vec::<String>::new()).is_err());
        assert!(FiniteSpace::new(["a", "a"]).is_err());
        assert!(FiniteSpace::new(["a|b"]).is_err());
        assert!(FiniteSpace::new([""]).is_err());
    }

    #[test]
    fn singleton_product() {
        let p = product(&FiniteSpace::new(["x"]).unwrap(), &FiniteSpace::new(["y"]).unwrap());
        assert_eq!(p.joint.labels(), ["x|y"]);
    }

    #[test]
    fn product_is_lexicographic() {
        let p = product(&FiniteSpace::new(["a", "b"]).unwrap(), &FiniteSpace::new(["x", "y", "z"]).unwrap());
        assert_eq!(p.joint.labels(), ["a|x", "a|y", "a|z", "b|x", "b|y", "b|z"]);
        assert_eq!(p.index(1, 2), 5);
        assert_eq!(p.split(4), (1, 1));
        assert!(p.joint.is_product());
        assert_eq!(p.joint.as_product().unwrap(), p);
    }

    #[test]
    fn preimage_of_full_and_empty() {
        let p = product(&space(2), &space(3));
        let full = p.preimage(Coordinate::First, &Event::full(&p.left)).unwrap();
        assert_eq!(full, Event::full(&p.joint));
        let none = p.preimage(Coordinate::Second, &Event::empty(&p.right)).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn preimage_rejects_foreign_event() {
        let p = product(&space(2), &space(3));
        assert!(p.preimage(Coordinate::First, &Event::full(&p.right)).is_err());
    }

    #[test]
    fn preimage_counts() {
        let p = product(&space(3), &space(4));
        for a in all_events(&p.left).unwrap() {
            let pre = p.preimage(Coordinate::First, &a).unwrap();
            assert_eq!(pre.len(), a.len() * 4);
        }
    }

    #[test]
    fn complement_laws() {
        let s = space(5);
        let a = Event::new(&s, [0, 3]).unwrap();
        assert!(a.intersection(&a.complement()).unwrap().is_empty());
        assert_eq!(a.union(&a.complement()).unwrap(), Event::full(&s));
    }

    #[test]
    fn mixed_spaces_are_rejected() {
        let a = Event::full(&space(2));
        let b = Event::full(&FiniteSpace::new(["p", "q"]).unwrap());
        assert!(a.union(&b).is_err());
        assert!(a.intersection(&b).is_err());
    }

    #[test]
    fn preimage_commutes_with_set_operations_exhaustively() {
        for n1 in 1..=4 {
            for n2 in 1..=4 {
                let p = product(&space(n1), &space(n2));
                for coord in [Coordinate::First, Coordinate::Second] {
                    let events = all_events(p.factor(coord)).unwrap();
                    for a in &events {
                        let pa = p.preimage(coord, a).unwrap();
                        assert_eq!(p.preimage(coord, &a.complement()).unwrap(), pa.complement());
                        for b in &events {
                            let pb = p.preimage(coord, b).unwrap();
                            assert_eq!(
                                p.preimage(coord, &a.intersection(b).unwrap()).unwrap(),
                                pa.intersection(&pb).unwrap()
                            );
                            assert_eq!(
                                p.preimage(coord, &a.union(b).unwrap()).unwrap(),
                                pa.union(&pb).unwrap()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn enumeration_cap() {
        assert_eq!(all_events(&space(3)).unwrap().len(), 8);
        assert!(all_events(&space(13)).is_err());
    }

    #[test]
    fn transposed_permutation() {
        let p = product(&space(2), &space(3));
        let (t, perm) = p.transposed();
        for k in 0..6 {
            let (j, i) = t.split(k);
            assert_eq!(p.split(perm[k]), (i, j));
        }
    }

    #[test]
    fn display_uses_labels() {
        let s = FiniteSpace::new(["a", "b", "c"]).unwrap();
        assert_eq!(Event::from_labels(&s, &["c", "a"]).unwrap().to_string(), "{a,c}");
        assert!(Event::from_labels(&s, &["d"]).is_err());
    }
}
