//! Finite permutation groups and the invariants `a(G)` and `b(Q, G)`.

use std::collections::{HashMap, VecDeque};

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::permgroup::{cycle_type, embed_product, index_of, CycleType, PermError, Permutation};

pub const DEFAULT_ORDER_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("group order exceeds cap {0}")]
    OrderCapExceeded(usize),
    #[error("the group is trivial")]
    TrivialGroup,
    #[error("no generators supplied")]
    NoGenerators,
    #[error("generators have different degrees ({0} and {1})")]
    DegreeMismatch(usize, usize),
    #[error("slopes a1/deg1 and a2/deg2 are equal; the product b is not determined")]
    EqualSlopeUnsupported,
    #[error(transparent)]
    Perm(#[from] PermError),
}

#[derive(Debug, Clone)]
pub struct PermutationGroup {
    degree: usize,
    generators: Vec<Permutation>,
    elements: Vec<Permutation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugacyClass {
    #[serde(serialize_with = "ser_display")]
    pub representative: Permutation,
    pub cycle_type: CycleType,
    pub size: usize,
    pub index: u64,
}

fn ser_display<S: serde::Serializer>(p: &Permutation, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(p)
}

/// Breadth-first closure under right multiplication by generators. The
/// element order is determined by the generator order alone.
pub fn close_group(generators: &[Permutation]) -> Result<PermutationGroup, GroupError> {
    close_group_capped(generators, DEFAULT_ORDER_CAP)
}

pub fn close_group_capped(
    generators: &[Permutation],
    cap: usize,
) -> Result<PermutationGroup, GroupError> {
    let first = generators.first().ok_or(GroupError::NoGenerators)?;
    let degree = first.degree();
    if let Some(g) = generators.iter().find(|g| g.degree() != degree) {
        return Err(GroupError::DegreeMismatch(degree, g.degree()));
    }
    let id = Permutation::identity(degree);
    let mut seen: HashMap<Permutation, ()> = HashMap::new();
    let mut elements = vec![id.clone()];
    seen.insert(id.clone(), ());
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in generators {
            let y = x.compose(g);
            if seen.contains_key(&y) {
                continue;
            }
            if elements.len() >= cap {
                return Err(GroupError::OrderCapExceeded(cap));
            }
            seen.insert(y.clone(), ());
            elements.push(y.clone());
            queue.push_back(y);
        }
    }
    Ok(PermutationGroup { degree, generators: generators.to_vec(), elements })
}

/// The image of `G1 × G2` acting on pairs, generated by the embedded
/// generators of each factor.
pub fn direct_product(
    g1: &PermutationGroup,
    g2: &PermutationGroup,
) -> Result<PermutationGroup, GroupError> {
    let id1 = Permutation::identity(g1.degree);
    let id2 = Permutation::identity(g2.degree);
    let gens: Vec<Permutation> = g1
        .generators
        .iter()
        .map(|g| embed_product(g, &id2))
        .chain(g2.generators.iter().map(|g| embed_product(&id1, g)))
        .collect();
    close_group(&gens)
}

/// The cyclic group of order `m` in its regular representation.
pub fn cyclic_regular(m: usize) -> PermutationGroup {
    let images: Vec<u32> = (1..=m as u32).map(|i| i % m as u32 + 1).collect();
    let gen = Permutation::from_images(&images).expect("an m-cycle is a permutation");
    close_group(&[gen]).expect("cyclic group within cap")
}

/// The full symmetric group on `n` points.
pub fn symmetric(n: usize) -> PermutationGroup {
    if n == 1 {
        return close_group(&[Permutation::identity(1)]).expect("trivial group");
    }
    let transposition = Permutation::from_cycles(n, &[vec![1, 2]]).expect("valid");
    let long: Vec<u32> = (1..=n as u32).collect();
    let cycle = Permutation::from_cycles(n, &[long]).expect("valid");
    close_group(&[transposition, cycle]).expect("symmetric group within cap")
}

impl PermutationGroup {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    /// lcm of element orders.
    pub fn exponent(&self) -> u64 {
        self.elements.iter().fold(1u64, |acc, g| acc.lcm(&g.order()))
    }

    fn lookup(&self) -> HashMap<&Permutation, usize> {
        self.elements.iter().enumerate().map(|(i, g)| (g, i)).collect()
    }

    /// Class id of every element, plus the classes in order of first element.
    fn class_partition(&self) -> (Vec<usize>, Vec<ConjugacyClass>) {
        let lookup = self.lookup();
        let inverses: Vec<Permutation> = self.generators.iter().map(|g| g.inverse()).collect();
        let mut class_of = vec![usize::MAX; self.order()];
        let mut classes = Vec::new();
        for start in 0..self.order() {
            if class_of[start] != usize::MAX {
                continue;
            }
            let id = classes.len();
            class_of[start] = id;
            let mut size = 1;
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for (g, gi) in self.generators.iter().zip(&inverses) {
                    let y = g.compose(&self.elements[x]).compose(gi);
                    let j = lookup[&y];
                    if class_of[j] == usize::MAX {
                        class_of[j] = id;
                        size += 1;
                        queue.push_back(j);
                    }
                }
            }
            let rep = self.elements[start].clone();
            let ct = cycle_type(&rep);
            let index = index_of(&ct);
            classes.push(ConjugacyClass { representative: rep, cycle_type: ct, size, index });
        }
        (class_of, classes)
    }

    pub fn conjugacy_classes(&self) -> Vec<ConjugacyClass> {
        self.class_partition().1
    }

    /// Minimal index over non-identity elements.
    pub fn a_invariant(&self) -> Result<u64, GroupError> {
        self.elements
            .iter()
            .filter(|g| !g.is_identity())
            .map(|g| index_of(&cycle_type(g)))
            .min()
            .ok_or(GroupError::TrivialGroup)
    }

    /// Minimal-index classes, each tagged with the id of its orbit under the
    /// power maps `c -> c^k`, `gcd(k, exponent) = 1`.
    pub fn minimal_class_orbits(&self) -> Result<Vec<(ConjugacyClass, usize)>, GroupError> {
        let a = self.a_invariant()?;
        let (class_of, classes) = self.class_partition();
        let lookup = self.lookup();
        let exponent = self.exponent();
        let minimal: Vec<usize> = (0..classes.len()).filter(|&c| classes[c].index == a).collect();

        let mut parent: Vec<usize> = (0..classes.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &c in &minimal {
            let rep = &classes[c].representative;
            for k in (2..exponent).filter(|k| k.gcd(&exponent) == 1) {
                let image = class_of[lookup[&rep.pow(k)]];
                let (ra, rb) = (find(&mut parent, c), find(&mut parent, image));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let mut orbit_ids: HashMap<usize, usize> = HashMap::new();
        Ok(minimal
            .into_iter()
            .map(|c| {
                let root = find(&mut parent, c);
                let next = orbit_ids.len();
                let id = *orbit_ids.entry(root).or_insert(next);
                (classes[c].clone(), id)
            })
            .collect())
    }

    /// Number of power-map orbits on minimal-index classes.
    pub fn b_invariant_q(&self) -> Result<u64, GroupError> {
        let tagged = self.minimal_class_orbits()?;
        Ok(tagged.iter().map(|(_, id)| *id).max().map_or(0, |m| m as u64 + 1))
    }
}

pub fn product_a(a1: u64, deg1: u64, a2: u64, deg2: u64) -> u64 {
    (deg2 * a1).min(deg1 * a2)
}

/// `b` of the factor whose slope `a_i / deg_i` is smaller.
pub fn product_b(
    (a1, deg1, b1): (u64, u64, u64),
    (a2, deg2, b2): (u64, u64, u64),
) -> Result<u64, GroupError> {
    // compare a1/deg1 with a2/deg2 by cross-multiplication
    match (a1 * deg2).cmp(&(a2 * deg1)) {
        std::cmp::Ordering::Less => Ok(b1),
        std::cmp::Ordering::Greater => Ok(b2),
        std::cmp::Ordering::Equal => Err(GroupError::EqualSlopeUnsupported),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgroup::parse_generators;

    fn group(gens: &str, degree: usize) -> PermutationGroup {
        close_group(&parse_generators(gens, Some(degree)).unwrap()).unwrap()
    }

    #[test]
    fn closure_orders() {
        assert_eq!(group("(12);(123)", 3).order(), 6);
        assert_eq!(group("(123)", 3).order(), 3);
        assert_eq!(group("(12);(1234)", 4).order(), 24);
        assert_eq!(symmetric(5).order(), 120);
    }

    #[test]
    fn closure_is_deterministic() {
        let a = group("(12);(1234)", 4);
        let b = group("(12);(1234)", 4);
        assert_eq!(a.elements(), b.elements());
    }

    #[test]
    fn order_cap() {
        let gens = parse_generators("(12);(12345)", None).unwrap();
        assert_eq!(close_group_capped(&gens, 50).unwrap_err(), GroupError::OrderCapExceeded(50));
    }

    #[test]
    fn class_structure() {
        let mut sizes: Vec<usize> =
            group("(12);(123)", 3).conjugacy_classes().iter().map(|c| c.size).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 2, 3]);
        assert_eq!(cyclic_regular(3).conjugacy_classes().len(), 3);
        let s4 = symmetric(4).conjugacy_classes();
        assert_eq!(s4.len(), 5);
        assert_eq!(s4.iter().map(|c| c.size).sum::<usize>(), 24);
    }

    #[test]
    fn small_invariants() {
        let s3 = symmetric(3);
        assert_eq!(s3.a_invariant().unwrap(), 1);
        assert_eq!(s3.b_invariant_q().unwrap(), 1);
        let c3 = cyclic_regular(3);
        assert_eq!(c3.a_invariant().unwrap(), 2);
        assert_eq!(c3.b_invariant_q().unwrap(), 1);
        let trivial = close_group(&[Permutation::identity(2)]).unwrap();
        assert_eq!(trivial.a_invariant(), Err(GroupError::TrivialGroup));
    }

    #[test]
    fn c4_has_two_rational_classes_of_minimal_index() {
        // regular C_4 in S_4: the square has index 2, generators index 3.
        let c4 = cyclic_regular(4);
        assert_eq!(c4.a_invariant().unwrap(), 2);
        assert_eq!(c4.b_invariant_q().unwrap(), 1);
        // Klein four group, regular: three classes of index 2, no fusion
        let v4 = group("(12)(34);(13)(24)", 4);
        assert_eq!(v4.a_invariant().unwrap(), 2);
        assert_eq!(v4.b_invariant_q().unwrap(), 3);
    }

    #[test]
    fn products() {
        let g = direct_product(&symmetric(3), &cyclic_regular(3)).unwrap();
        assert_eq!(g.order(), 18);
        assert_eq!(g.degree(), 9);
        assert_eq!(g.a_invariant().unwrap(), 3);
        assert_eq!(g.b_invariant_q().unwrap(), 1);
        let g = direct_product(&symmetric(3), &cyclic_regular(5)).unwrap();
        assert_eq!(g.b_invariant_q().unwrap(), 1);

        assert_eq!(product_a(1, 3, 2, 3), 3);
        assert_eq!(product_a(1, 5, 6, 7), 7);
        assert_eq!(product_a(2, 4, 2, 4), 8);
        assert_eq!(product_b((1, 3, 1), (4, 5, 1)), Ok(1));
        assert_eq!(product_b((1, 5, 1), (6, 7, 1)), Ok(1));
        assert_eq!(product_b((1, 3, 1), (1, 3, 2)), Err(GroupError::EqualSlopeUnsupported));
    }
}
