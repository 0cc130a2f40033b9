//! Finite algebras given by operation tables, their powers, subuniverses,
//! subalgebras and quotients.

use std::collections::HashSet;
use std::fmt;
use std::ops::Deref;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::congruence::{is_congruence, Congruence};
use crate::error::{Error, Result};

/// Anything with a finite universe `0..size` and finitely many finitary
/// operations addressed by index.
pub trait Algebra {
    fn size(&self) -> usize;
    fn op_count(&self) -> usize;
    fn arity(&self, op: usize) -> usize;
    fn apply(&self, op: usize, args: &[usize]) -> usize;
}

/// Symbol, arity and implementation of an operation for [`FiniteAlgebra::from_fns`].
pub type OpFn<'a> = (&'a str, usize, Box<dyn Fn(&[usize]) -> usize>);

/// One basic operation. `table` is row-major over argument tuples in
/// lexicographic order, so `f(a_1, .., a_k)` sits at `sum a_i * n^(k-i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operation {
    pub symbol: String,
    pub arity: usize,
    pub table: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct AlgebraFile {
    name: String,
    size: usize,
    operations: Vec<Operation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AlgebraFile", into = "AlgebraFile")]
pub struct FiniteAlgebra {
    name: String,
    size: usize,
    operations: Vec<Operation>,
}

impl TryFrom<AlgebraFile> for FiniteAlgebra {
    type Error = Error;

    fn try_from(file: AlgebraFile) -> Result<Self> {
        FiniteAlgebra::new(file.name, file.size, file.operations)
    }
}

impl From<FiniteAlgebra> for AlgebraFile {
    fn from(a: FiniteAlgebra) -> Self {
        AlgebraFile {
            name: a.name,
            size: a.size,
            operations: a.operations,
        }
    }
}

/// `n^k` computed without overflow, `None` when it does not fit.
pub(crate) fn checked_pow(n: usize, k: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..k {
        acc = acc.checked_mul(n)?;
    }
    Some(acc)
}

impl FiniteAlgebra {
    pub fn new(name: impl Into<String>, size: usize, operations: Vec<Operation>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidAlgebra("universe must be nonempty".into()));
        }
        let mut seen = HashSet::new();
        for op in &operations {
            if !seen.insert(op.symbol.as_str()) {
                return Err(Error::InvalidAlgebra(format!(
                    "duplicate operation symbol `{}`",
                    op.symbol
                )));
            }
            let expected = checked_pow(size, op.arity).ok_or_else(|| {
                Error::InvalidAlgebra(format!("table of `{}` is too large", op.symbol))
            })?;
            if op.table.len() != expected {
                return Err(Error::InvalidAlgebra(format!(
                    "table of `{}` has {} entries, expected {}",
                    op.symbol,
                    op.table.len(),
                    expected
                )));
            }
            if let Some(&bad) = op.table.iter().find(|&&v| v >= size) {
                return Err(Error::InvalidAlgebra(format!(
                    "table of `{}` contains {} outside 0..{}",
                    op.symbol, bad, size
                )));
            }
        }
        Ok(FiniteAlgebra {
            name: name.into(),
            size,
            operations,
        })
    }

    /// Builds an algebra by tabulating closures.
    pub fn from_fns(name: impl Into<String>, size: usize, ops: Vec<OpFn<'_>>) -> Result<Self> {
        let operations = ops
            .into_iter()
            .map(|(symbol, arity, f)| {
                let len = checked_pow(size, arity).ok_or_else(|| {
                    Error::InvalidAlgebra(format!("table of `{symbol}` is too large"))
                })?;
                let mut args = vec![0; arity];
                let table = (0..len)
                    .map(|idx| {
                        decode_into(idx, size, &mut args);
                        f(&args)
                    })
                    .collect();
                Ok(Operation {
                    symbol: symbol.to_string(),
                    arity,
                    table,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        FiniteAlgebra::new(name, size, operations)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("algebra serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn operations(&self) -> &[Operation] {
        &self.operations
    }

    pub fn op_index(&self, symbol: &str) -> Option<usize> {
        self.operations.iter().position(|op| op.symbol == symbol)
    }

    pub fn symbol(&self, op: usize) -> &str {
        &self.operations[op].symbol
    }

    pub fn check_element(&self, element: usize) -> Result<()> {
        if element < self.size {
            Ok(())
        } else {
            Err(Error::ElementOutOfRange {
                element,
                size: self.size,
            })
        }
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.size
    }
}

impl Algebra for FiniteAlgebra {
    fn size(&self) -> usize {
        self.size
    }

    fn op_count(&self) -> usize {
        self.operations.len()
    }

    fn arity(&self, op: usize) -> usize {
        self.operations[op].arity
    }

    fn apply(&self, op: usize, args: &[usize]) -> usize {
        let op = &self.operations[op];
        debug_assert_eq!(args.len(), op.arity);
        let idx = args.iter().fold(0, |acc, &a| acc * self.size + a);
        op.table[idx]
    }
}

impl fmt::Display for FiniteAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n={}", self.name, self.size)?;
        for op in &self.operations {
            write!(f, ", {}/{}", op.symbol, op.arity)?;
        }
        write!(f, ")")
    }
}

/// Writes the base-`n` digits of `idx` (most significant first) into `out`.
pub(crate) fn decode_into(mut idx: usize, n: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = idx % n;
        idx /= n;
    }
}

/// An element of `A^k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TupleVector(pub Vec<usize>);

impl Deref for TupleVector {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for TupleVector {
    fn from(v: Vec<usize>) -> Self {
        TupleVector(v)
    }
}

/// `A^k` with coordinatewise operations. Elements are addressed through a
/// lexicographic codec, first coordinate most significant. Operation tables
/// are never materialized unless [`PowerAlgebra::materialize`] is called.
#[derive(Clone, Debug)]
pub struct PowerAlgebra<'a> {
    base: &'a FiniteAlgebra,
    k: usize,
    size: usize,
}

pub fn power(base: &FiniteAlgebra, k: usize, max_size: u128) -> Result<PowerAlgebra<'_>> {
    if k == 0 {
        return Err(Error::InvalidAlgebra(
            "power exponent must be at least 1".into(),
        ));
    }
    let needed = (base.size as u128)
        .checked_pow(k as u32)
        .unwrap_or(u128::MAX);
    if needed > max_size {
        return Err(Error::bound(
            format!("{}^{}", base.name, k),
            needed,
            max_size,
        ));
    }
    Ok(PowerAlgebra {
        base,
        k,
        size: needed as usize,
    })
}

impl<'a> PowerAlgebra<'a> {
    pub fn base(&self) -> &'a FiniteAlgebra {
        self.base
    }

    pub fn exponent(&self) -> usize {
        self.k
    }

    pub fn encode(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.k);
        tuple.iter().fold(0, |acc, &a| acc * self.base.size + a)
    }

    pub fn decode(&self, idx: usize) -> TupleVector {
        let mut out = vec![0; self.k];
        decode_into(idx, self.base.size, &mut out);
        TupleVector(out)
    }

    /// Tabulates every operation, provided each table stays within `max_entries`.
    pub fn materialize(&self, max_entries: u128) -> Result<FiniteAlgebra> {
        let mut operations = Vec::with_capacity(self.base.op_count());
        for op in 0..self.op_count() {
            let arity = self.arity(op);
            let len = (self.size as u128)
                .checked_pow(arity as u32)
                .unwrap_or(u128::MAX);
            if len > max_entries {
                return Err(Error::bound(
                    format!(
                        "table of `{}` on {}^{}",
                        self.base.symbol(op),
                        self.base.name,
                        self.k
                    ),
                    len,
                    max_entries,
                ));
            }
            let mut args = vec![0; arity];
            let table = (0..len as usize)
                .map(|idx| {
                    decode_into(idx, self.size, &mut args);
                    self.apply(op, &args)
                })
                .collect();
            operations.push(Operation {
                symbol: self.base.symbol(op).to_string(),
                arity,
                table,
            });
        }
        FiniteAlgebra::new(
            format!("{}^{}", self.base.name, self.k),
            self.size,
            operations,
        )
    }
}

impl Algebra for PowerAlgebra<'_> {
    fn size(&self) -> usize {
        self.size
    }

    fn op_count(&self) -> usize {
        self.base.op_count()
    }

    fn arity(&self, op: usize) -> usize {
        self.base.arity(op)
    }

    fn apply(&self, op: usize, args: &[usize]) -> usize {
        let n = self.base.size;
        let arity = args.len();
        // digits[j * k + i] is coordinate i of argument j
        let mut digits = vec![0; arity * self.k];
        for (j, &arg) in args.iter().enumerate() {
            decode_into(arg, n, &mut digits[j * self.k..(j + 1) * self.k]);
        }
        let mut column = vec![0; arity];
        (0..self.k).fold(0, |acc, i| {
            for (j, slot) in column.iter_mut().enumerate() {
                *slot = digits[j * self.k + i];
            }
            acc * n + self.base.apply(op, &column)
        })
    }
}

/// Least subset of the universe containing `generators` and closed under
/// every operation, returned sorted.
///
/// Elements are numbered in discovery order; when element `i` is processed
/// every argument tuple over elements `0..=i` that uses `i` is applied, so
/// each tuple is visited exactly once.
pub fn subuniverse_closure<A, I>(alg: &A, generators: I) -> Result<Vec<usize>>
where
    A: Algebra + ?Sized,
    I: IntoIterator<Item = usize>,
{
    let n = alg.size();
    let mut member = FixedBitSet::with_capacity(n);
    let mut elems: Vec<usize> = Vec::new();
    let push = |x: usize, member: &mut FixedBitSet, elems: &mut Vec<usize>| {
        if !member.put(x) {
            elems.push(x);
        }
    };
    for g in generators {
        if g >= n {
            return Err(Error::ElementOutOfRange {
                element: g,
                size: n,
            });
        }
        push(g, &mut member, &mut elems);
    }
    for op in 0..alg.op_count() {
        if alg.arity(op) == 0 {
            let c = alg.apply(op, &[]);
            push(c, &mut member, &mut elems);
        }
    }

    let mut args = Vec::new();
    let mut prefix = Vec::new();
    let mut suffix = Vec::new();
    let mut i = 0;
    while i < elems.len() {
        for op in 0..alg.op_count() {
            let k = alg.arity(op);
            // tuples over elems[..=i] whose first occurrence of i is at slot j
            for j in 0..k {
                prefix.resize(j, 0);
                suffix.resize(k - 1 - j, 0);
                let prefix_count = checked_pow(i, j).expect("closure fits in memory");
                let suffix_count = checked_pow(i + 1, k - 1 - j).expect("closure fits in memory");
                for pi in 0..prefix_count {
                    decode_into(pi, i.max(1), &mut prefix);
                    for si in 0..suffix_count {
                        decode_into(si, i + 1, &mut suffix);
                        args.clear();
                        args.extend(prefix.iter().map(|&p| elems[p]));
                        args.push(elems[i]);
                        args.extend(suffix.iter().map(|&p| elems[p]));
                        let out = alg.apply(op, &args);
                        push(out, &mut member, &mut elems);
                    }
                }
            }
        }
        i += 1;
    }
    let mut out: Vec<usize> = member.ones().collect();
    out.sort_unstable();
    Ok(out)
}

/// Whether `set` is closed under every operation of `alg`.
pub fn is_subuniverse<A: Algebra + ?Sized>(alg: &A, set: &FixedBitSet) -> bool {
    let elems: Vec<usize> = set.ones().collect();
    for op in 0..alg.op_count() {
        let k = alg.arity(op);
        let total = match checked_pow(elems.len(), k) {
            Some(t) => t,
            None => return false,
        };
        let mut pos = vec![0; k];
        let mut args = vec![0; k];
        for idx in 0..total {
            decode_into(idx, elems.len().max(1), &mut pos);
            for (a, &p) in args.iter_mut().zip(&pos) {
                *a = elems[p];
            }
            if !set.contains(alg.apply(op, &args)) {
                return false;
            }
        }
    }
    true
}

/// The subalgebra on `universe` (which must be a subuniverse), relabelled to
/// `0..universe.len()` in increasing order. Also returns the embedding.
pub fn subalgebra(alg: &FiniteAlgebra, universe: &[usize]) -> Result<(FiniteAlgebra, Vec<usize>)> {
    let mut sorted = universe.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.is_empty() {
        return Err(Error::InvalidAlgebra("empty subuniverse".into()));
    }
    let mut index = vec![usize::MAX; alg.size()];
    for (i, &x) in sorted.iter().enumerate() {
        alg.check_element(x)?;
        index[x] = i;
    }
    let m = sorted.len();
    let mut operations = Vec::new();
    for (op_idx, op) in alg.operations().iter().enumerate() {
        let len = checked_pow(m, op.arity)
            .ok_or_else(|| Error::InvalidAlgebra("subalgebra table too large".into()))?;
        let mut local = vec![0; op.arity];
        let mut args = vec![0; op.arity];
        let mut table = Vec::with_capacity(len);
        for idx in 0..len {
            decode_into(idx, m, &mut local);
            for (a, &l) in args.iter_mut().zip(&local) {
                *a = sorted[l];
            }
            let out = alg.apply(op_idx, &args);
            if index[out] == usize::MAX {
                return Err(Error::InvalidAlgebra(format!(
                    "{:?} is not closed under `{}`",
                    sorted, op.symbol
                )));
            }
            table.push(index[out]);
        }
        operations.push(Operation {
            symbol: op.symbol.clone(),
            arity: op.arity,
            table,
        });
    }
    let sub = FiniteAlgebra::new(format!("{}|{:?}", alg.name(), sorted), m, operations)?;
    Ok((sub, sorted))
}

/// `A/θ` together with the natural map.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub algebra: FiniteAlgebra,
    /// Element of `A` to the index of its block.
    pub bar: Vec<usize>,
    /// Block index to the least element of the block.
    pub representatives: Vec<usize>,
}

impl Quotient {
    /// Image of a congruence of `A` that contains the kernel.
    pub fn bar_congruence(&self, theta: &Congruence) -> Congruence {
        let m = self.algebra.size();
        let pairs = theta
            .pairs()
            .map(|(a, b)| (self.bar[a], self.bar[b]))
            .collect::<Vec<_>>();
        Congruence::equivalence_closure(m, pairs)
    }
}

/// Blocks are numbered by their least elements; operations are evaluated on
/// representatives after compatibility has been verified.
pub fn quotient(alg: &FiniteAlgebra, theta: &Congruence) -> Result<Quotient> {
    if theta.size() != alg.size() {
        return Err(Error::BadPartition {
            size: alg.size(),
            reason: format!("congruence is on {} elements", theta.size()),
        });
    }
    if let Some(v) = is_congruence(alg, theta)? {
        return Err(Error::NotACongruence(v.to_string()));
    }
    let representatives: Vec<usize> = alg.elements().filter(|&a| theta.rep(a) == a).collect();
    let mut block_of_rep = vec![usize::MAX; alg.size()];
    for (i, &r) in representatives.iter().enumerate() {
        block_of_rep[r] = i;
    }
    let bar: Vec<usize> = alg.elements().map(|a| block_of_rep[theta.rep(a)]).collect();
    let m = representatives.len();
    let mut operations = Vec::new();
    for (op_idx, op) in alg.operations().iter().enumerate() {
        let len = checked_pow(m, op.arity)
            .ok_or_else(|| Error::InvalidAlgebra("quotient table too large".into()))?;
        let mut local = vec![0; op.arity];
        let mut args = vec![0; op.arity];
        let table = (0..len)
            .map(|idx| {
                decode_into(idx, m, &mut local);
                for (a, &l) in args.iter_mut().zip(&local) {
                    *a = representatives[l];
                }
                bar[alg.apply(op_idx, &args)]
            })
            .collect();
        operations.push(Operation {
            symbol: op.symbol.clone(),
            arity: op.arity,
            table,
        });
    }
    let algebra = FiniteAlgebra::new(format!("{}/{}", alg.name(), theta), m, operations)?;
    Ok(Quotient {
        algebra,
        bar,
        representatives,
    })
}
