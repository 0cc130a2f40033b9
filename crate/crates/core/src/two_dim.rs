//! Four-ary relations on an algebra viewed as sets of 2x2 matrices:
//! `R(α,β)`, the generators `G(α,β)`, `M(α,β)` and its horizontal and
//! vertical gluing closure `M*(α,β)`.
//!
//! A tuple `(a, b, c, d)` is the matrix
//!
//! ```text
//! [ a  c ]
//! [ b  d ]
//! ```
//!
//! so columns are `(a, b)` and `(c, d)`, rows are `(a, c)` and `(b, d)`.

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::algebra::{is_subuniverse, power, subuniverse_closure, Algebra, FiniteAlgebra};
use crate::congruence::Congruence;
use crate::error::Result;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 4]", into = "[usize; 4]")]
pub struct Matrix2x2 {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl From<[usize; 4]> for Matrix2x2 {
    fn from([a, b, c, d]: [usize; 4]) -> Self {
        Matrix2x2 { a, b, c, d }
    }
}

impl From<Matrix2x2> for [usize; 4] {
    fn from(m: Matrix2x2) -> Self {
        m.to_array()
    }
}

impl Matrix2x2 {
    pub const fn new(a: usize, b: usize, c: usize, d: usize) -> Self {
        Matrix2x2 { a, b, c, d }
    }

    /// From rows: `[top_left top_right; bottom_left bottom_right]`.
    pub const fn from_rows(top: [usize; 2], bottom: [usize; 2]) -> Self {
        Matrix2x2 {
            a: top[0],
            c: top[1],
            b: bottom[0],
            d: bottom[1],
        }
    }

    pub const fn to_array(self) -> [usize; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub const fn left_column(self) -> (usize, usize) {
        (self.a, self.b)
    }

    pub const fn right_column(self) -> (usize, usize) {
        (self.c, self.d)
    }

    pub const fn top_row(self) -> (usize, usize) {
        (self.a, self.c)
    }

    pub const fn bottom_row(self) -> (usize, usize) {
        (self.b, self.d)
    }

    pub const fn transpose(self) -> Self {
        Matrix2x2::new(self.a, self.c, self.b, self.d)
    }

    pub const fn swap_rows(self) -> Self {
        Matrix2x2::new(self.b, self.a, self.d, self.c)
    }

    pub const fn swap_columns(self) -> Self {
        Matrix2x2::new(self.c, self.d, self.a, self.b)
    }

    pub fn max_entry(self) -> usize {
        self.a.max(self.b).max(self.c).max(self.d)
    }
}

impl fmt::Debug for Matrix2x2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {}; {} {}]", self.a, self.c, self.b, self.d)
    }
}

impl fmt::Display for Matrix2x2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `[a a'; b b']` and `[a' a''; b' b'']` glue to `[a a''; b b'']`.
pub fn glue_h(left: Matrix2x2, right: Matrix2x2) -> Option<Matrix2x2> {
    (left.right_column() == right.left_column())
        .then(|| Matrix2x2::new(left.a, left.b, right.c, right.d))
}

/// `[a a'; b b']` and `[b b'; c c']` glue to `[a a'; c c']`.
pub fn glue_v(top: Matrix2x2, bottom: Matrix2x2) -> Option<Matrix2x2> {
    (top.bottom_row() == bottom.top_row()).then(|| Matrix2x2::new(top.a, bottom.b, top.c, bottom.d))
}

/// A subset of `A^4`, as a dense bitset over the lexicographic codec.
#[derive(Clone, PartialEq, Eq)]
pub struct TupleSet4 {
    n: usize,
    bits: FixedBitSet,
}

impl TupleSet4 {
    pub fn empty(n: usize) -> Self {
        TupleSet4 {
            n,
            bits: FixedBitSet::with_capacity(n * n * n * n),
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = TupleSet4::empty(n);
        s.bits.insert_range(..);
        s
    }

    pub fn from_matrices<I: IntoIterator<Item = Matrix2x2>>(n: usize, matrices: I) -> Self {
        let mut s = TupleSet4::empty(n);
        for m in matrices {
            s.insert(m);
        }
        s
    }

    pub(crate) fn from_indices<I: IntoIterator<Item = usize>>(n: usize, indices: I) -> Self {
        let mut s = TupleSet4::empty(n);
        for i in indices {
            s.bits.insert(i);
        }
        s
    }

    /// Size of the owning algebra.
    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn index(&self, m: Matrix2x2) -> usize {
        ((m.a * self.n + m.b) * self.n + m.c) * self.n + m.d
    }

    pub fn matrix(&self, idx: usize) -> Matrix2x2 {
        let n = self.n;
        Matrix2x2::new(
            idx / (n * n * n),
            (idx / (n * n)) % n,
            (idx / n) % n,
            idx % n,
        )
    }

    /// True when `m` was not already present. Panics if an entry is out of range.
    pub fn insert(&mut self, m: Matrix2x2) -> bool {
        assert!(
            m.max_entry() < self.n,
            "matrix {m} outside universe 0..{}",
            self.n
        );
        let i = self.index(m);
        !self.bits.put(i)
    }

    pub fn contains(&self, m: Matrix2x2) -> bool {
        m.max_entry() < self.n && self.bits.contains(self.index(m))
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Members in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = Matrix2x2> + '_ {
        self.bits.ones().map(move |i| self.matrix(i))
    }

    pub fn is_subset(&self, other: &TupleSet4) -> bool {
        self.n == other.n && self.bits.is_subset(&other.bits)
    }

    pub fn union_with(&mut self, other: &TupleSet4) {
        assert_eq!(self.n, other.n, "sets over different universes");
        self.bits.union_with(&other.bits);
    }

    pub fn difference(&self, other: &TupleSet4) -> Vec<Matrix2x2> {
        self.bits
            .difference(&other.bits)
            .map(|i| self.matrix(i))
            .collect()
    }

    pub fn map(&self, f: impl Fn(Matrix2x2) -> Matrix2x2) -> TupleSet4 {
        TupleSet4::from_matrices(self.n, self.iter().map(f))
    }

    pub(crate) fn bits(&self) -> &FixedBitSet {
        &self.bits
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.iter().collect::<Vec<_>>()).expect("matrices serialize")
    }
}

impl fmt::Debug for TupleSet4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for TupleSet4 {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

pub fn transpose_set(s: &TupleSet4) -> TupleSet4 {
    s.map(Matrix2x2::transpose)
}

pub fn swap_rows(s: &TupleSet4) -> TupleSet4 {
    s.map(Matrix2x2::swap_rows)
}

pub fn swap_columns(s: &TupleSet4) -> TupleSet4 {
    s.map(Matrix2x2::swap_columns)
}

/// Columns in `α`, rows in `β`.
pub fn r_rel(alpha: &Congruence, beta: &Congruence) -> TupleSet4 {
    let n = alpha.size();
    let mut out = TupleSet4::empty(n);
    for (a, b) in alpha.pairs() {
        for c in 0..n {
            if !beta.related(a, c) {
                continue;
            }
            for d in 0..n {
                if alpha.related(c, d) && beta.related(b, d) {
                    out.insert(Matrix2x2::new(a, b, c, d));
                }
            }
        }
    }
    out
}

/// Column-constant `α`-matrices and row-constant `β`-matrices.
pub fn g_generators(alpha: &Congruence, beta: &Congruence) -> TupleSet4 {
    let n = alpha.size();
    let mut out = TupleSet4::empty(n);
    for (c, d) in alpha.pairs() {
        out.insert(Matrix2x2::from_rows([c, c], [d, d]));
    }
    for (a, c) in beta.pairs() {
        out.insert(Matrix2x2::from_rows([a, c], [a, c]));
    }
    out
}

/// Subuniverse of `A^4` generated by `G(α,β)`.
pub fn m_rel(
    alg: &FiniteAlgebra,
    alpha: &Congruence,
    beta: &Congruence,
    max_power: u128,
) -> Result<TupleSet4> {
    let a4 = power(alg, 4, max_power)?;
    let generators = g_generators(alpha, beta);
    let closed = subuniverse_closure(&a4, generators.bits().ones())?;
    Ok(TupleSet4::from_indices(alg.size(), closed))
}

/// Whether `s` is closed under the operations of `A` acting coordinatewise.
pub fn is_subuniverse4(alg: &FiniteAlgebra, s: &TupleSet4, max_power: u128) -> Result<bool> {
    let a4 = power(alg, 4, max_power)?;
    debug_assert_eq!(a4.size(), s.bits().len());
    Ok(is_subuniverse(&a4, s.bits()))
}

/// Key of a pair of elements in the dense lookup tables below.
fn pair_key(n: usize, (x, y): (usize, usize)) -> usize {
    x * n + y
}

/// Every matrix obtainable by horizontally gluing two members of `s`.
pub fn glue_all_h(s: &TupleSet4) -> TupleSet4 {
    let n = s.universe();
    // for a middle column k: left columns of matrices ending in k, and right
    // columns of matrices starting with k
    let mut lefts: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n * n];
    let mut rights: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n * n];
    for m in s.iter() {
        lefts[pair_key(n, m.right_column())].push(m.left_column());
        rights[pair_key(n, m.left_column())].push(m.right_column());
    }
    let mut out = TupleSet4::empty(n);
    for (ls, rs) in lefts.iter().zip(&rights) {
        for &(a, b) in ls {
            for &(c, d) in rs {
                out.insert(Matrix2x2::new(a, b, c, d));
            }
        }
    }
    out
}

/// Every matrix obtainable by vertically gluing two members of `s`.
pub fn glue_all_v(s: &TupleSet4) -> TupleSet4 {
    let n = s.universe();
    let mut tops: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n * n];
    let mut bottoms: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n * n];
    for m in s.iter() {
        tops[pair_key(n, m.bottom_row())].push(m.top_row());
        bottoms[pair_key(n, m.top_row())].push(m.bottom_row());
    }
    let mut out = TupleSet4::empty(n);
    for (ts, bs) in tops.iter().zip(&bottoms) {
        for &(a, c) in ts {
            for &(b, d) in bs {
                out.insert(Matrix2x2::from_rows([a, c], [b, d]));
            }
        }
    }
    out
}

/// Least superset of `s` closed under both gluings, by a worklist that
/// pairs each new matrix with the members sharing its middle column or row.
pub fn glue_closure(s: &TupleSet4) -> TupleSet4 {
    let n = s.universe();
    let mut out = s.clone();
    let mut by_left: Vec<Vec<Matrix2x2>> = vec![Vec::new(); n * n];
    let mut by_right: Vec<Vec<Matrix2x2>> = vec![Vec::new(); n * n];
    let mut by_top: Vec<Vec<Matrix2x2>> = vec![Vec::new(); n * n];
    let mut by_bottom: Vec<Vec<Matrix2x2>> = vec![Vec::new(); n * n];
    let mut work: Vec<Matrix2x2> = s.iter().collect();
    for &m in &work {
        by_left[pair_key(n, m.left_column())].push(m);
        by_right[pair_key(n, m.right_column())].push(m);
        by_top[pair_key(n, m.top_row())].push(m);
        by_bottom[pair_key(n, m.bottom_row())].push(m);
    }
    while let Some(m) = work.pop() {
        let mut found = Vec::new();
        for &r in &by_left[pair_key(n, m.right_column())] {
            found.extend(glue_h(m, r));
        }
        for &l in &by_right[pair_key(n, m.left_column())] {
            found.extend(glue_h(l, m));
        }
        for &b in &by_top[pair_key(n, m.bottom_row())] {
            found.extend(glue_v(m, b));
        }
        for &t in &by_bottom[pair_key(n, m.top_row())] {
            found.extend(glue_v(t, m));
        }
        for g in found {
            if out.insert(g) {
                by_left[pair_key(n, g.left_column())].push(g);
                by_right[pair_key(n, g.right_column())].push(g);
                by_top[pair_key(n, g.top_row())].push(g);
                by_bottom[pair_key(n, g.bottom_row())].push(g);
                work.push(g);
            }
        }
    }
    out
}

/// The sequence `M_0 = M`, `M_n` = horizontal gluings of `M_{n-1}` for odd
/// `n` and vertical gluings for even `n`, run until two consecutive stages
/// add nothing.
#[derive(Clone, Debug)]
pub struct MstarStages {
    pub stages: Vec<TupleSet4>,
    pub fixpoint: TupleSet4,
}

impl MstarStages {
    /// Number of gluing stages that were computed.
    pub fn stage_count(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn stage_sizes(&self) -> Vec<usize> {
        self.stages.iter().map(TupleSet4::len).collect()
    }
}

pub fn mstar_staged(
    alg: &FiniteAlgebra,
    alpha: &Congruence,
    beta: &Congruence,
    max_power: u128,
) -> Result<MstarStages> {
    let m = m_rel(alg, alpha, beta, max_power)?;
    Ok(mstar_from_m(m))
}

/// Runs the staged gluing on an already computed `M(α,β)`.
pub fn mstar_from_m(m: TupleSet4) -> MstarStages {
    let mut stages = vec![m];
    let mut quiet = 0;
    while quiet < 2 {
        let prev = stages.last().expect("nonempty");
        let mut next = if stages.len() % 2 == 1 {
            glue_all_h(prev)
        } else {
            glue_all_v(prev)
        };
        // gluing with the constant generators returns the input, so this
        // only matters for sets that do not contain them
        next.union_with(prev);
        if &next == prev {
            quiet += 1;
        } else {
            quiet = 0;
        }
        stages.push(next);
    }
    let last = stages.last().expect("nonempty");
    let fixpoint = glue_closure(last);
    debug_assert!(&fixpoint == last);
    MstarStages { stages, fixpoint }
}

/// `M*(α,β)`.
pub fn mstar(
    alg: &FiniteAlgebra,
    alpha: &Congruence,
    beta: &Congruence,
    max_power: u128,
) -> Result<TupleSet4> {
    Ok(mstar_staged(alg, alpha, beta, max_power)?.fixpoint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congruence::cg;
    use crate::corpus;

    const BOUND: u128 = 10_000_000;

    fn nabla(n: usize) -> Congruence {
        Congruence::full(n)
    }

    #[test]
    fn r_examples() {
        assert_eq!(r_rel(&nabla(2), &nabla(2)).len(), 16);
        let z4 = corpus::cyclic_group(4);
        let theta = cg(&z4, [(0, 2)]).unwrap();
        let beta = theta.clone();
        let r = r_rel(&Congruence::equality(4), &beta);
        let expected: Vec<_> = beta
            .pairs()
            .map(|(a, c)| Matrix2x2::new(a, a, c, c))
            .collect();
        assert_eq!(r.iter().collect::<Vec<_>>(), expected);
        let r = r_rel(&theta, &Congruence::equality(4));
        assert_eq!(r.len(), 8);
        assert!(r
            .iter()
            .all(|m| m.a == m.c && m.b == m.d && (m.b + 4 - m.a) % 2 == 0));
    }

    #[test]
    fn g_examples() {
        let g = g_generators(&Congruence::equality(3), &Congruence::equality(3));
        assert_eq!(
            g.iter().collect::<Vec<_>>(),
            (0..3)
                .map(|a| Matrix2x2::new(a, a, a, a))
                .collect::<Vec<_>>()
        );
        let g = g_generators(&nabla(2), &nabla(2));
        assert_eq!(g.len(), 6);
        assert!(g.is_subset(&r_rel(&nabla(2), &nabla(2))));
    }

    #[test]
    fn m_examples() {
        let sl = corpus::semilattice2();
        let eq = Congruence::equality(2);
        let m = m_rel(&sl, &eq, &eq, BOUND).unwrap();
        assert_eq!(
            m,
            TupleSet4::from_matrices(2, [Matrix2x2::new(0, 0, 0, 0), Matrix2x2::new(1, 1, 1, 1)])
        );
        let m = m_rel(&sl, &nabla(2), &nabla(2), BOUND).unwrap();
        assert!(m.contains(Matrix2x2::from_rows([0, 0], [0, 1])));
    }

    #[test]
    fn gluing_examples() {
        let m1 = Matrix2x2::from_rows([0, 1], [0, 1]);
        let m2 = Matrix2x2::from_rows([1, 1], [1, 1]);
        assert_eq!(glue_h(m1, m2), Some(Matrix2x2::from_rows([0, 1], [0, 1])));
        let m1 = Matrix2x2::from_rows([0, 1], [0, 0]);
        let m2 = Matrix2x2::from_rows([0, 1], [1, 1]);
        assert_eq!(glue_h(m1, m2), None);
        let top = Matrix2x2::from_rows([5, 6], [1, 2]);
        let bottom = Matrix2x2::from_rows([1, 2], [3, 4]);
        assert_eq!(
            glue_v(top, bottom),
            Some(Matrix2x2::from_rows([5, 6], [3, 4]))
        );
        assert_eq!(glue_v(bottom, top), None);
    }

    #[test]
    fn mstar_examples() {
        let sl = corpus::semilattice2();
        let eq = Congruence::equality(2);
        assert_eq!(mstar(&sl, &eq, &eq, BOUND).unwrap().len(), 2);
        assert_eq!(mstar(&sl, &nabla(2), &nabla(2), BOUND).unwrap().len(), 16);

        let z2 = corpus::cyclic_group(2);
        let ms = mstar(&z2, &nabla(2), &nabla(2), BOUND).unwrap();
        assert_eq!(ms.len(), 8);
        assert!(ms.iter().all(|m| (m.a + m.b + m.c + m.d) % 2 == 0));
        assert!(!ms.contains(Matrix2x2::new(0, 0, 0, 1)));
    }

    #[test]
    fn symmetries() {
        let s3 = corpus::symmetric3();
        let a3 = cg(&s3, [(0, 3)]).unwrap();
        let full = nabla(6);
        let ms = mstar(&s3, &a3, &full, BOUND).unwrap();
        assert_eq!(transpose_set(&transpose_set(&ms)), ms);
        assert_eq!(transpose_set(&ms), mstar(&s3, &full, &a3, BOUND).unwrap());
        let m = m_rel(&s3, &a3, &full, BOUND).unwrap();
        assert_eq!(swap_rows(&m), m);
        assert_eq!(swap_columns(&m), m);
    }

    #[test]
    fn staged_and_worklist_closures_agree() {
        let s3 = corpus::symmetric3();
        let full = nabla(6);
        let m = m_rel(&s3, &full, &full, BOUND).unwrap();
        let staged = mstar_from_m(m.clone());
        assert_eq!(staged.fixpoint, glue_closure(&m));
        let sizes = staged.stage_sizes();
        assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn json_is_sorted_quadruples() {
        let s =
            TupleSet4::from_matrices(2, [Matrix2x2::new(1, 0, 0, 0), Matrix2x2::new(0, 0, 0, 1)]);
        assert_eq!(s.to_json().to_string(), "[[0,0,0,1],[1,0,0,0]]");
    }
}
