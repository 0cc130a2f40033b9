//! Congruences as canonical partitions, principal congruence generation and
//! congruence lattices.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{checked_pow, decode_into, Algebra, FiniteAlgebra};
use crate::error::{Error, Result};

/// Disjoint-set forest with path halving; the root of every class is kept
/// at its least element so canonicalization is a lookup.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the classes of `a` and `b`; true when they were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        match ra.cmp(&rb) {
            std::cmp::Ordering::Equal => false,
            std::cmp::Ordering::Less => {
                self.parent[rb] = ra;
                true
            }
            std::cmp::Ordering::Greater => {
                self.parent[ra] = rb;
                true
            }
        }
    }

    pub fn into_congruence(mut self) -> Congruence {
        let repr = (0..self.parent.len()).map(|x| self.find(x)).collect();
        Congruence { repr }
    }
}

/// An equivalence relation on `0..n` stored as "least element of my block".
///
/// The type does not carry its algebra; compatibility is established by the
/// constructors in this module ([`cg`], [`con_lattice`]) or checked with
/// [`is_congruence`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Congruence {
    repr: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct BlocksFile {
    blocks: Vec<Vec<usize>>,
}

impl Congruence {
    pub fn equality(n: usize) -> Self {
        Congruence {
            repr: (0..n).collect(),
        }
    }

    pub fn full(n: usize) -> Self {
        Congruence { repr: vec![0; n] }
    }

    /// Blocks must cover `0..n` exactly once.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut repr = vec![usize::MAX; n];
        for block in blocks {
            let Some(&min) = block.iter().min() else {
                return Err(Error::BadPartition {
                    size: n,
                    reason: "empty block".into(),
                });
            };
            for &x in block {
                if x >= n {
                    return Err(Error::BadPartition {
                        size: n,
                        reason: format!("element {x} out of range"),
                    });
                }
                if repr[x] != usize::MAX {
                    return Err(Error::BadPartition {
                        size: n,
                        reason: format!("element {x} appears twice"),
                    });
                }
                repr[x] = min;
            }
        }
        if let Some(missing) = repr.iter().position(|&r| r == usize::MAX) {
            return Err(Error::BadPartition {
                size: n,
                reason: format!("element {missing} is not covered"),
            });
        }
        Ok(Congruence { repr })
    }

    /// Parses block notation such as `0,2|1,3`. Elements that are not
    /// mentioned become singletons; `eq` and `full` name the extremes.
    pub fn parse_blocks(n: usize, text: &str) -> Result<Self> {
        let text = text.trim();
        match text {
            "eq" => return Ok(Congruence::equality(n)),
            "full" | "nabla" => return Ok(Congruence::full(n)),
            _ => {}
        }
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut seen = BTreeSet::new();
        for part in text.split('|') {
            let mut block = Vec::new();
            for item in part.split(',') {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                let x: usize = item
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad element `{item}` in `{text}`")))?;
                seen.insert(x);
                block.push(x);
            }
            if !block.is_empty() {
                blocks.push(block);
            }
        }
        for x in 0..n {
            if !seen.contains(&x) {
                blocks.push(vec![x]);
            }
        }
        Congruence::from_blocks(n, &blocks)
    }

    /// Least equivalence relation containing `pairs` (no compatibility).
    pub fn equivalence_closure<I: IntoIterator<Item = (usize, usize)>>(n: usize, pairs: I) -> Self {
        let mut uf = UnionFind::new(n);
        for (a, b) in pairs {
            uf.union(a, b);
        }
        uf.into_congruence()
    }

    pub fn from_json(n: usize, text: &str) -> Result<Self> {
        let file: BlocksFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Congruence::from_blocks(n, &file.blocks)
    }

    pub fn size(&self) -> usize {
        self.repr.len()
    }

    pub fn rep(&self, a: usize) -> usize {
        self.repr[a]
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.repr[a] == self.repr[b]
    }

    pub fn is_equality(&self) -> bool {
        self.repr.iter().enumerate().all(|(i, &r)| i == r)
    }

    pub fn is_full(&self) -> bool {
        self.repr.iter().all(|&r| r == 0)
    }

    pub fn block_count(&self) -> usize {
        self.repr
            .iter()
            .enumerate()
            .filter(|&(i, &r)| i == r)
            .count()
    }

    /// Blocks in order of their least element, each sorted.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut by_rep: Vec<Vec<usize>> = vec![Vec::new(); self.repr.len()];
        for (x, &r) in self.repr.iter().enumerate() {
            by_rep[r].push(x);
        }
        by_rep.into_iter().filter(|b| !b.is_empty()).collect()
    }

    /// All related pairs `(a, b)`, in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.repr.len();
        (0..n).flat_map(move |a| {
            (0..n)
                .filter(move |&b| self.related(a, b))
                .map(move |b| (a, b))
        })
    }

    pub fn pair_count(&self) -> usize {
        self.blocks().iter().map(|b| b.len() * b.len()).sum()
    }

    /// Inclusion as relations.
    pub fn is_below(&self, other: &Congruence) -> bool {
        self.repr.len() == other.repr.len()
            && (0..self.repr.len()).all(|a| other.related(a, self.repr[a]))
    }

    pub fn meet(&self, other: &Congruence) -> Congruence {
        let n = self.repr.len();
        let mut first: HashMap<(usize, usize), usize> = HashMap::new();
        let repr = (0..n)
            .map(|x| *first.entry((self.repr[x], other.repr[x])).or_insert(x))
            .collect();
        Congruence { repr }
    }

    /// Join as equivalence relations, which is also the join in `Con(A)`.
    pub fn join(&self, other: &Congruence) -> Congruence {
        let n = self.repr.len();
        let mut uf = UnionFind::new(n);
        for x in 0..n {
            uf.union(x, self.repr[x]);
            uf.union(x, other.repr[x]);
        }
        uf.into_congruence()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "blocks": self.blocks() })
    }
}

impl fmt::Display for Congruence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks = self.blocks();
        for (i, block) in blocks.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            for (j, x) in block.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{x}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Congruence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Congruence({self})")
    }
}

impl Serialize for Congruence {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        BlocksFile {
            blocks: self.blocks(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Congruence {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let file = BlocksFile::deserialize(deserializer)?;
        let n = file.blocks.iter().map(Vec::len).sum();
        Congruence::from_blocks(n, &file.blocks).map_err(serde::de::Error::custom)
    }
}

/// A failed compatibility test: `symbol` maps the two argument tuples, which
/// are related coordinatewise, to unrelated outputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompatibilityViolation {
    pub symbol: String,
    pub left_args: Vec<usize>,
    pub right_args: Vec<usize>,
    pub left_out: usize,
    pub right_out: usize,
}

impl fmt::Display for CompatibilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{:?} = {} but {}{:?} = {}",
            self.symbol,
            self.left_args,
            self.left_out,
            self.symbol,
            self.right_args,
            self.right_out
        )
    }
}

/// `Ok(None)` when `theta` is compatible with every operation. Tuples that
/// differ in a single coordinate suffice, by transitivity.
pub fn is_congruence(
    alg: &FiniteAlgebra,
    theta: &Congruence,
) -> Result<Option<CompatibilityViolation>> {
    let n = alg.size();
    if theta.size() != n {
        return Err(Error::BadPartition {
            size: n,
            reason: format!("partition is on {} elements", theta.size()),
        });
    }
    for (op, operation) in alg.operations().iter().enumerate() {
        let k = operation.arity;
        if k == 0 {
            continue;
        }
        let others = checked_pow(n, k - 1).expect("operation table exists");
        let mut rest = vec![0; k - 1];
        let mut left = vec![0; k];
        let mut right = vec![0; k];
        for pos in 0..k {
            for (a, b) in theta.pairs().filter(|&(a, b)| a < b) {
                for idx in 0..others {
                    decode_into(idx, n, &mut rest);
                    left[..pos].copy_from_slice(&rest[..pos]);
                    right[..pos].copy_from_slice(&rest[..pos]);
                    left[pos] = a;
                    right[pos] = b;
                    left[pos + 1..].copy_from_slice(&rest[pos..]);
                    right[pos + 1..].copy_from_slice(&rest[pos..]);
                    let lo = alg.apply(op, &left);
                    let ro = alg.apply(op, &right);
                    if !theta.related(lo, ro) {
                        return Ok(Some(CompatibilityViolation {
                            symbol: operation.symbol.clone(),
                            left_args: left.clone(),
                            right_args: right.clone(),
                            left_out: lo,
                            right_out: ro,
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// The congruence generated by `pairs`.
///
/// Every pair merged into the union-find is pushed through all basic
/// translations (one argument varies, the rest fixed); images are merged in
/// turn until nothing new is joined.
pub fn cg<I: IntoIterator<Item = (usize, usize)>>(
    alg: &FiniteAlgebra,
    pairs: I,
) -> Result<Congruence> {
    let n = alg.size();
    let mut uf = UnionFind::new(n);
    let mut work = Vec::new();
    for (a, b) in pairs {
        alg.check_element(a)?;
        alg.check_element(b)?;
        if uf.union(a, b) {
            work.push((a, b));
        }
    }
    let mut rest = Vec::new();
    let mut args = Vec::new();
    while let Some((a, b)) = work.pop() {
        for (op, operation) in alg.operations().iter().enumerate() {
            let k = operation.arity;
            if k == 0 {
                continue;
            }
            let others = checked_pow(n, k - 1).expect("operation table exists");
            rest.resize(k - 1, 0);
            args.resize(k, 0);
            for pos in 0..k {
                for idx in 0..others {
                    decode_into(idx, n, &mut rest);
                    args[..pos].copy_from_slice(&rest[..pos]);
                    args[pos + 1..].copy_from_slice(&rest[pos..]);
                    args[pos] = a;
                    let u = alg.apply(op, &args);
                    args[pos] = b;
                    let v = alg.apply(op, &args);
                    if uf.union(u, v) {
                        work.push((u, v));
                    }
                }
            }
        }
    }
    Ok(uf.into_congruence())
}

/// Every congruence of a small algebra, with meet and join tables indexed
/// by position in `congruences`.
#[derive(Clone, Debug)]
pub struct ConLattice {
    pub congruences: Vec<Congruence>,
    pub meet: Vec<Vec<usize>>,
    pub join: Vec<Vec<usize>>,
}

impl ConLattice {
    pub fn len(&self) -> usize {
        self.congruences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.congruences.is_empty()
    }

    pub fn index_of(&self, theta: &Congruence) -> Option<usize> {
        self.congruences.iter().position(|c| c == theta)
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn top(&self) -> usize {
        self.congruences.len() - 1
    }

    /// Pairs `(i, j)` where congruence `j` covers congruence `i`.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let m = self.len();
        let below =
            |i: usize, j: usize| i != j && self.congruences[i].is_below(&self.congruences[j]);
        let mut out = Vec::new();
        for i in 0..m {
            for j in 0..m {
                if below(i, j) && !(0..m).any(|k| below(i, k) && below(k, j)) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Sorted with the equality relation first and the full relation last:
/// by descending number of blocks, then by the representative array.
pub fn con_lattice(alg: &FiniteAlgebra, max_size: usize) -> Result<ConLattice> {
    let n = alg.size();
    if n > max_size {
        return Err(Error::bound(
            format!("congruence lattice of {}", alg.name()),
            n as u128,
            max_size as u128,
        ));
    }
    let mut found: BTreeSet<Congruence> = BTreeSet::new();
    found.insert(Congruence::equality(n));
    for a in 0..n {
        for b in a + 1..n {
            found.insert(cg(alg, [(a, b)])?);
        }
    }
    let principal: Vec<Congruence> = found.iter().cloned().collect();
    let mut frontier: Vec<Congruence> = principal.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            for p in &principal {
                let j = x.join(p);
                if found.insert(j.clone()) {
                    next.push(j);
                }
            }
        }
        frontier = next;
    }
    let mut congruences: Vec<Congruence> = found.into_iter().collect();
    congruences.sort_by(|x, y| {
        y.block_count()
            .cmp(&x.block_count())
            .then_with(|| x.repr.cmp(&y.repr))
    });
    let index: HashMap<Congruence, usize> = congruences
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, c)| (c, i))
        .collect();
    let m = congruences.len();
    let mut meet = vec![vec![0; m]; m];
    let mut join = vec![vec![0; m]; m];
    for i in 0..m {
        for j in 0..m {
            meet[i][j] = index[&congruences[i].meet(&congruences[j])];
            join[i][j] = index[&congruences[i].join(&congruences[j])];
        }
    }
    Ok(ConLattice {
        congruences,
        meet,
        join,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn blocks(n: usize, s: &str) -> Congruence {
        Congruence::parse_blocks(n, s).unwrap()
    }

    #[test]
    fn extremes_are_congruences() {
        for alg in corpus::algebras() {
            let n = alg.size();
            assert_eq!(is_congruence(&alg, &Congruence::equality(n)).unwrap(), None);
            assert_eq!(is_congruence(&alg, &Congruence::full(n)).unwrap(), None);
        }
    }

    #[test]
    fn z4_adjacent_pairs_not_compatible() {
        let z4 = corpus::cyclic_group(4);
        let v = is_congruence(&z4, &blocks(4, "0,1|2,3")).unwrap().unwrap();
        assert_eq!(v.symbol, "+");
        assert_eq!(
            (v.left_args.clone(), v.right_args.clone()),
            (vec![0, 1], vec![1, 1])
        );
        assert_eq!((v.left_out, v.right_out), (1, 2));
    }

    #[test]
    fn cg_examples() {
        let z4 = corpus::cyclic_group(4);
        assert!(cg(&z4, []).unwrap().is_equality());
        assert_eq!(cg(&z4, [(0, 2)]).unwrap(), blocks(4, "0,2|1,3"));
        assert!(cg(&z4, [(0, 1)]).unwrap().is_full());
    }

    #[test]
    fn lattice_examples() {
        assert_eq!(con_lattice(&corpus::semilattice2(), 8).unwrap().len(), 2);
        let z4 = con_lattice(&corpus::cyclic_group(4), 8).unwrap();
        assert_eq!(
            z4.congruences,
            vec![
                Congruence::equality(4),
                blocks(4, "0,2|1,3"),
                Congruence::full(4)
            ]
        );
        let s3 = con_lattice(&corpus::symmetric3(), 8).unwrap();
        assert_eq!(
            s3.congruences,
            vec![
                Congruence::equality(6),
                blocks(6, "0,3,4|1,2,5"),
                Congruence::full(6)
            ]
        );
        assert_eq!(s3.covers(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn lattice_bound() {
        let big = corpus::cyclic_group(9);
        assert!(matches!(
            con_lattice(&big, 8),
            Err(Error::SizeBoundExceeded { .. })
        ));
    }

    #[test]
    fn set_lattice_is_partition_lattice() {
        // every equivalence relation on a 3-set is a congruence of the bare set
        let set3 = FiniteAlgebra::new("set3", 3, vec![]).unwrap();
        assert_eq!(con_lattice(&set3, 8).unwrap().len(), 5);
    }

    #[test]
    fn block_notation_round_trip() {
        let c = blocks(6, "1,2,5|0,4,3");
        assert_eq!(c.to_string(), "0,3,4|1,2,5");
        assert_eq!(blocks(4, "0,2").to_string(), "0,2|1|3");
        assert!(blocks(3, "eq").is_equality());
        assert!(blocks(3, "full").is_full());
        assert!(matches!(
            Congruence::parse_blocks(3, "0,1|1,2"),
            Err(Error::BadPartition { .. })
        ));
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, r#"{"blocks":[[0,3,4],[1,2,5]]}"#);
        let back: Congruence = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn meet_join_basic() {
        let a = blocks(4, "0,1|2,3");
        let b = blocks(4, "0,2|1,3");
        assert!(a.meet(&b).is_equality());
        assert!(a.join(&b).is_full());
        assert!(a.meet(&b).is_below(&a));
        assert!(!a.is_below(&b));
    }
}
