//! Difference terms, Kiss terms, Lipparini's construction, the Maltsev-tree
//! identities behind a difference term, and a bounded term search.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{is_subuniverse, quotient, subalgebra, FiniteAlgebra};
use crate::congruence::Congruence;
use crate::context::Context;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::term::{check_identity, evaluate_term, tabulate, IdentityOutcome, Term};
use crate::two_dim::Matrix2x2;

fn require_arity(t: &Term, arity: usize) -> Result<()> {
    let found = t.var_bound();
    if found > arity {
        return Err(Error::ArityMismatch {
            symbol: format!("term {t}"),
            expected: arity,
            found,
        });
    }
    Ok(())
}

/// `q(x,y,z,w) = p(p(x,z,z), p(y,w,z), z)`.
pub fn lipparini(p: &Term) -> Result<Term> {
    require_arity(p, 3)?;
    let (x, y, z, w) = (Term::x(), Term::y(), Term::z(), Term::w());
    let left = p.substitute(&[x, z.clone(), z.clone()])?;
    let right = p.substitute(&[y, w, z.clone()])?;
    p.substitute(&[left, right, z])
}

/// `p(x,y,z) = q(x,y,z,z)`.
pub fn collapse_kiss(q: &Term) -> Result<Term> {
    require_arity(q, 4)?;
    q.substitute(&[Term::x(), Term::y(), Term::z(), Term::z()])
}

/// A reason a term fails to be a difference or Kiss term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TermFailure {
    /// `lhs ≈ rhs` fails at `env`.
    Identity {
        algebra: String,
        identity: String,
        lhs: Term,
        rhs: Term,
        env: Vec<usize>,
        lhs_value: usize,
        rhs_value: usize,
    },
    /// `(a,b) ∈ θ` but `p(a,b,b)` and `a` are not related by `[θ,θ]`.
    Difference {
        algebra: String,
        theta: Congruence,
        commutator: Congruence,
        a: usize,
        b: usize,
        value: usize,
    },
    /// `[a c; b d]` and `[a c'; b d]` lie in `R(α,β)` but their `q`-values
    /// are not related by `[α,β]`.
    Kiss {
        algebra: String,
        alpha: Congruence,
        beta: Congruence,
        commutator: Congruence,
        matrix: Matrix2x2,
        c_prime: usize,
        values: (usize, usize),
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TermVerdict {
    pub term: Term,
    pub holds: bool,
    /// Names of the algebras the conditions were checked on.
    pub checked_on: Vec<String>,
    pub failures: Vec<TermFailure>,
}

impl TermVerdict {
    fn new(term: &Term) -> Self {
        TermVerdict {
            term: term.clone(),
            holds: true,
            checked_on: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn fail(&mut self, f: TermFailure) {
        self.holds = false;
        self.failures.push(f);
    }

    fn absorb(&mut self, other: TermVerdict) {
        self.holds &= other.holds;
        self.checked_on.extend(other.checked_on);
        self.failures.extend(other.failures);
    }
}

fn identity(
    verdict: &mut TermVerdict,
    alg: &FiniteAlgebra,
    name: &str,
    lhs: Term,
    rhs: Term,
    nvars: usize,
) -> Result<()> {
    if let IdentityOutcome::Fails {
        env,
        lhs: lv,
        rhs: rv,
    } = check_identity(alg, &lhs, &rhs, nvars)?
    {
        verdict.fail(TermFailure::Identity {
            algebra: alg.name().to_string(),
            identity: name.to_string(),
            lhs,
            rhs,
            env,
            lhs_value: lv,
            rhs_value: rv,
        });
    }
    Ok(())
}

/// Quotients by nontrivial congruences and proper subalgebras, each once.
fn relatives(ctx: &Context) -> Result<Vec<FiniteAlgebra>> {
    let alg = ctx.algebra();
    let n = alg.size();
    let mut out = Vec::new();
    for theta in ctx.congruences()? {
        if !theta.is_equality() {
            out.push(quotient(alg, theta)?.algebra);
        }
    }
    if n <= ctx.limits().max_subalgebra_size {
        for mask in 1usize..(1 << n) - 1 {
            let mut set = FixedBitSet::with_capacity(n);
            for i in 0..n {
                set.set(i, mask >> i & 1 == 1);
            }
            if is_subuniverse(alg, &set) {
                let universe: Vec<usize> = set.ones().collect();
                out.push(subalgebra(alg, &universe)?.0);
            }
        }
    }
    Ok(out)
}

fn local_limits(ctx: &Context) -> Limits {
    Limits {
        variety_level: false,
        ..ctx.limits().clone()
    }
}

/// `(I)`: `p(x,x,y) ≈ y`. `(II)`: `p(a,b,b) ≡ a` modulo `[θ,θ]` for every
/// congruence `θ` and `(a,b) ∈ θ`. The first violating pair of each `θ` is
/// reported.
pub fn difference_verdict(ctx: &Context, p: &Term) -> Result<TermVerdict> {
    require_arity(p, 3)?;
    let alg = ctx.algebra();
    let mut verdict = TermVerdict::new(p);
    verdict.checked_on.push(alg.name().to_string());
    identity(
        &mut verdict,
        alg,
        "p(x,x,y) = y",
        p.rename(&[0, 0, 1])?,
        Term::y(),
        2,
    )?;
    let table = ctx.table(p, 3)?;
    for theta in ctx.congruences()? {
        let gamma = ctx.commutator(theta, theta)?;
        let bad = theta
            .pairs()
            .find(|&(a, b)| !gamma.related(table.get3(a, b, b), a));
        if let Some((a, b)) = bad {
            verdict.fail(TermFailure::Difference {
                algebra: alg.name().to_string(),
                theta: theta.clone(),
                commutator: gamma,
                a,
                b,
                value: table.get3(a, b, b),
            });
        }
    }
    if ctx.limits().variety_level {
        for rel in relatives(ctx)? {
            let sub = Context::new(rel, local_limits(ctx));
            verdict.absorb(difference_verdict(&sub, p)?);
        }
    }
    Ok(verdict)
}

/// `(I)`: `q(x,x,y,y) ≈ y` and `q(x,y,x,y) ≈ x`. `(II)`: for all
/// congruences `α, β` and `[a c; b d], [a c'; b d] ∈ R(α,β)`, the values
/// `q(a,b,c,d)` and `q(a,b,c',d)` are related by `[α,β]`.
pub fn kiss_verdict(ctx: &Context, q: &Term) -> Result<TermVerdict> {
    require_arity(q, 4)?;
    let alg = ctx.algebra();
    let mut verdict = TermVerdict::new(q);
    verdict.checked_on.push(alg.name().to_string());
    identity(
        &mut verdict,
        alg,
        "q(x,x,y,y) = y",
        q.rename(&[0, 0, 1, 1])?,
        Term::y(),
        2,
    )?;
    identity(
        &mut verdict,
        alg,
        "q(x,y,x,y) = x",
        q.rename(&[0, 1, 0, 1])?,
        Term::x(),
        2,
    )?;
    let table = ctx.table(q, 4)?;
    let n = alg.size();
    for (alpha, beta) in ctx.congruence_pairs()? {
        let gamma = ctx.commutator(&alpha, &beta)?;
        'pair: for m in ctx.r(&alpha, &beta).iter() {
            let v = table.get4(m.a, m.b, m.c, m.d);
            for c2 in m.c + 1..n {
                if beta.related(m.a, c2) && alpha.related(c2, m.d) {
                    let v2 = table.get4(m.a, m.b, c2, m.d);
                    if !gamma.related(v, v2) {
                        verdict.fail(TermFailure::Kiss {
                            algebra: alg.name().to_string(),
                            alpha: alpha.clone(),
                            beta: beta.clone(),
                            commutator: gamma.clone(),
                            matrix: m,
                            c_prime: c2,
                            values: (v, v2),
                        });
                        break 'pair;
                    }
                }
            }
        }
    }
    if ctx.limits().variety_level {
        for rel in relatives(ctx)? {
            let sub = Context::new(rel, local_limits(ctx));
            verdict.absorb(kiss_verdict(&sub, q)?);
        }
    }
    Ok(verdict)
}

pub fn is_difference_term(alg: &FiniteAlgebra, p: &Term, limits: &Limits) -> Result<TermVerdict> {
    difference_verdict(&Context::new(alg.clone(), limits.clone()), p)
}

pub fn is_kiss_term(alg: &FiniteAlgebra, q: &Term, limits: &Limits) -> Result<TermVerdict> {
    kiss_verdict(&Context::new(alg.clone(), limits.clone()), q)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    #[serde(rename = "b")]
    B,
    #[serde(rename = "g")]
    G,
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::B => "b",
            Color::G => "g",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeVertex {
    pub id: usize,
    pub color: Color,
    #[serde(default)]
    pub children: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct TreeFile {
    vertices: Vec<TreeVertex>,
    #[serde(default)]
    root: usize,
}

/// A finite tree rooted at 0 with ordered children and alternating colors,
/// the root colored `b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TreeFile", into = "TreeFile")]
pub struct MaltsevTree {
    vertices: BTreeMap<usize, TreeVertex>,
    parent: BTreeMap<usize, usize>,
}

impl TryFrom<TreeFile> for MaltsevTree {
    type Error = Error;

    fn try_from(file: TreeFile) -> Result<Self> {
        if file.root != 0 {
            return Err(Error::MalformedTree(format!(
                "root is {}, expected 0",
                file.root
            )));
        }
        MaltsevTree::new(file.vertices)
    }
}

impl From<MaltsevTree> for TreeFile {
    fn from(tree: MaltsevTree) -> Self {
        TreeFile {
            vertices: tree.vertices.into_values().collect(),
            root: 0,
        }
    }
}

impl MaltsevTree {
    pub fn new(vertices: Vec<TreeVertex>) -> Result<Self> {
        let bad = |msg: String| Err(Error::MalformedTree(msg));
        let mut map = BTreeMap::new();
        for v in vertices {
            let id = v.id;
            if map.insert(id, v).is_some() {
                return bad(format!("vertex {id} listed twice"));
            }
        }
        let Some(root) = map.get(&0) else {
            return bad("no vertex 0".into());
        };
        if root.color != Color::B {
            return bad("the root must be colored b".into());
        }
        let mut parent = BTreeMap::new();
        for v in map.values() {
            for &c in &v.children {
                let Some(child) = map.get(&c) else {
                    return bad(format!("vertex {} has unknown child {c}", v.id));
                };
                if c == 0 {
                    return bad(format!("the root is a child of {}", v.id));
                }
                if parent.insert(c, v.id).is_some() {
                    return bad(format!("vertex {c} has two parents"));
                }
                if child.color == v.color {
                    return bad(format!(
                        "vertex {c} has the color {} of its parent {}",
                        child.color, v.id
                    ));
                }
            }
        }
        // every vertex must be reachable from the root
        let mut seen = HashSet::from([0]);
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            for &c in &map[&i].children {
                if seen.insert(c) {
                    stack.push(c);
                }
            }
        }
        if let Some(&lost) = map.keys().find(|k| !seen.contains(k)) {
            return bad(format!("vertex {lost} is not reachable from the root"));
        }
        Ok(MaltsevTree {
            vertices: map,
            parent,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| match e.to_string() {
            s if s.starts_with("malformed tree") => Error::MalformedTree(s),
            s => Error::Parse(s),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.vertices.keys().copied()
    }

    pub fn color(&self, i: usize) -> Color {
        self.vertices[&i].color
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.vertices[&i].children
    }

    pub fn is_leaf(&self, i: usize) -> bool {
        self.children(i).is_empty()
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent.get(&i).copied()
    }

    pub fn first_child(&self, i: usize) -> Option<usize> {
        self.children(i).first().copied()
    }

    pub fn last_child(&self, i: usize) -> Option<usize> {
        self.children(i).last().copied()
    }

    /// The next sibling of `i`, if `i` has a parent and is not its last child.
    pub fn successor(&self, i: usize) -> Option<usize> {
        let siblings = self.children(self.parent(i)?);
        let pos = siblings.iter().position(|&s| s == i)?;
        siblings.get(pos + 1).copied()
    }
}

/// Ternary terms `(f_i, g_i)` for each tree vertex, plus `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermFamily {
    pub pairs: BTreeMap<usize, (Term, Term)>,
    pub p: Term,
}

impl TermFamily {
    /// `{"0": [f0, g0], ..., "p": p}` with terms in JSON s-expression form.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        TermFamily::from_value(&value)
    }

    pub fn from_value(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("term family must be a JSON object".into()))?;
        let mut pairs = BTreeMap::new();
        let mut p = None;
        for (key, v) in obj {
            if key == "p" {
                p = Some(Term::from_json(v)?);
                continue;
            }
            let id: usize = key
                .parse()
                .map_err(|_| Error::Parse(format!("bad vertex key `{key}`")))?;
            match v.as_array().map(Vec::as_slice) {
                Some([f, g]) => {
                    pairs.insert(id, (Term::from_json(f)?, Term::from_json(g)?));
                }
                _ => return Err(Error::Parse(format!("vertex {id} needs a pair of terms"))),
            }
        }
        let p = p.ok_or_else(|| Error::Parse("term family has no `p`".into()))?;
        Ok(TermFamily { pairs, p })
    }

    pub fn to_value(&self) -> Value {
        let mut obj = serde_json::Map::new();
        for (id, (f, g)) in &self.pairs {
            obj.insert(id.to_string(), Value::Array(vec![f.to_json(), g.to_json()]));
        }
        obj.insert("p".into(), self.p.to_json());
        Value::Object(obj)
    }

    fn f(&self, i: usize) -> &Term {
        &self.pairs[&i].0
    }

    fn g(&self, i: usize) -> &Term {
        &self.pairs[&i].1
    }
}

/// A violated identity of the tree condition. `lhs` and `rhs` are already
/// specialized to the variables `x, y, z`, so evaluating both at `env`
/// reproduces the two distinct values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomFailure {
    pub axiom: String,
    pub vertex: Option<usize>,
    pub lhs: Term,
    pub rhs: Term,
    pub env: Vec<usize>,
    pub lhs_value: usize,
    pub rhs_value: usize,
}

impl AxiomFailure {
    /// Re-evaluates both sides from scratch.
    pub fn revalidate(&self, alg: &FiniteAlgebra) -> Result<bool> {
        let l = evaluate_term(alg, &self.lhs, &self.env)?;
        let r = evaluate_term(alg, &self.rhs, &self.env)?;
        Ok(l == self.lhs_value && r == self.rhs_value && l != r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeVerdict {
    pub holds: bool,
    /// Number of identity instances evaluated.
    pub checked: usize,
    pub failures: Vec<AxiomFailure>,
}

impl TreeVerdict {
    pub fn failed_axioms(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.failures.iter().map(|f| f.axiom.as_str()).collect();
        out.dedup();
        out
    }
}

/// Patterns `(x,y,x)`, `(x,x,y)`, `(x,y,y)` and `(x,y,z)` as variable maps.
const XYX: [usize; 3] = [0, 1, 0];
const XXY: [usize; 3] = [0, 0, 1];
const XYY: [usize; 3] = [0, 1, 1];
const XYZ: [usize; 3] = [0, 1, 2];

/// Evaluates the tree identities on `alg`, plus `t(x,x,x) ≈ x` for every
/// `f_i`, `g_i`.
pub fn verify_maltsev_tree(
    alg: &FiniteAlgebra,
    tree: &MaltsevTree,
    fam: &TermFamily,
) -> Result<TreeVerdict> {
    for i in tree.ids() {
        if !fam.pairs.contains_key(&i) {
            return Err(Error::MissingVertexTerms(i));
        }
    }
    for t in fam.pairs.values().flat_map(|(f, g)| [f, g]).chain([&fam.p]) {
        require_arity(t, 3)?;
    }
    let mut verdict = TreeVerdict {
        holds: true,
        checked: 0,
        failures: Vec::new(),
    };
    let mut check =
        |axiom: &str, vertex: Option<usize>, l: &Term, r: &Term, pattern: &[usize]| -> Result<()> {
            let lhs = l.rename(pattern)?;
            let rhs = r.rename(pattern)?;
            let nvars = pattern.iter().max().map_or(0, |m| m + 1);
            verdict.checked += 1;
            if let IdentityOutcome::Fails {
                env,
                lhs: lv,
                rhs: rv,
            } = check_identity(alg, &lhs, &rhs, nvars)?
            {
                verdict.holds = false;
                verdict.failures.push(AxiomFailure {
                    axiom: axiom.to_string(),
                    vertex,
                    lhs,
                    rhs,
                    env,
                    lhs_value: lv,
                    rhs_value: rv,
                });
            }
            Ok(())
        };
    let ids: Vec<usize> = tree.ids().collect();
    for &i in &ids {
        check("ax1", Some(i), fam.f(i), fam.g(i), &XYX)?;
    }
    check("ax2", Some(0), fam.f(0), &Term::x(), &XYZ)?;
    for &i in &ids {
        if tree.is_leaf(i) {
            match tree.color(i) {
                Color::B => check("ax3", Some(i), fam.f(i), fam.g(i), &XXY)?,
                Color::G => check("ax4", Some(i), fam.f(i), fam.g(i), &XYY)?,
            }
        }
    }
    for (axf, axg, color, pattern) in [("ax5", "ax6", Color::B, XXY), ("ax7", "ax8", Color::G, XYY)]
    {
        for &i in ids.iter().filter(|&&i| tree.color(i) == color) {
            if let (Some(first), Some(last)) = (tree.first_child(i), tree.last_child(i)) {
                check(axf, Some(i), fam.f(i), fam.f(first), &pattern)?;
                check(axg, Some(i), fam.g(i), fam.g(last), &pattern)?;
            }
        }
    }
    for (ax, color, pattern) in [("ax9", Color::B, XXY), ("ax10", Color::G, XYY)] {
        for &i in &ids {
            let Some(parent) = tree.parent(i) else {
                continue;
            };
            if tree.color(parent) != color {
                continue;
            }
            if let Some(next) = tree.successor(i) {
                check(ax, Some(i), fam.g(i), fam.f(next), &pattern)?;
            }
        }
    }
    check("ax11", Some(0), fam.g(0), &fam.p, &XYY)?;
    // z is renamed to y by the pattern
    check("ax12", None, &fam.p, &Term::z(), &XXY)?;
    for &i in &ids {
        check("idempotent", Some(i), fam.f(i), &Term::x(), &[0, 0, 0])?;
        check("idempotent", Some(i), fam.g(i), &Term::x(), &[0, 0, 0])?;
    }
    Ok(verdict)
}

/// Outcome of [`search_difference_term`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub term: Option<Term>,
    /// Semantically distinct ternary term functions enumerated.
    pub distinct: usize,
    /// Depth reached (variables have depth 0).
    pub depth: usize,
}

/// Breadth-first enumeration of ternary terms up to `max_depth`, one
/// representative per term function on `A^3`. Within a depth, operation
/// symbols are tried in lexical order and argument tuples in the order
/// their entries were discovered.
pub fn search_difference_term(ctx: &Context, max_depth: usize) -> Result<SearchResult> {
    if max_depth == 0 {
        return Err(Error::Config("search depth must be at least 1".into()));
    }
    let alg = ctx.algebra();
    let n = alg.size();
    let limits = ctx.limits();
    let cap = limits.max_search_terms;

    let mut ops: Vec<(String, usize, usize)> = alg
        .operations()
        .iter()
        .enumerate()
        .map(|(i, op)| (op.symbol.clone(), op.arity, i))
        .collect();
    ops.sort();

    let mut terms: Vec<Term> = Vec::new();
    let mut tables: Vec<Vec<usize>> = Vec::new();
    let mut depth_start = vec![0];
    let mut seen: HashSet<Vec<usize>> = HashSet::new();

    let passes = |table: &[usize], t: &Term| -> Result<bool> {
        let idx = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
        let quick = (0..n).all(|x| (0..n).all(|y| table[idx(x, x, y)] == y));
        Ok(quick && difference_verdict(ctx, t)?.holds)
    };

    for v in 0..3 {
        let t = Term::var(v);
        let table = tabulate(alg, &t, 3)?.into_values();
        if seen.insert(table.clone()) {
            if passes(&table, &t)? {
                return Ok(SearchResult {
                    term: Some(t),
                    distinct: seen.len(),
                    depth: 0,
                });
            }
            terms.push(t);
            tables.push(table);
        }
    }

    for depth in 1..=max_depth {
        let prev_start = *depth_start.last().expect("nonempty");
        let known = terms.len();
        depth_start.push(known);
        for (symbol, arity, op) in &ops {
            let arity = *arity;
            // argument tuples over terms[..known] using at least one term of
            // the previous depth
            let mut idx = vec![0usize; arity];
            if known == 0 {
                continue;
            }
            let total = (known as u128)
                .checked_pow(arity as u32)
                .unwrap_or(u128::MAX);
            if total > limits.max_power {
                return Err(Error::bound(
                    "term search candidates",
                    total,
                    limits.max_power,
                ));
            }
            let mut args = vec![0; arity];
            loop {
                if arity == 0 || idx.iter().any(|&i| i >= prev_start) {
                    let table: Vec<usize> = (0..n * n * n)
                        .map(|e| {
                            for (a, &i) in args.iter_mut().zip(&idx) {
                                *a = tables[i][e];
                            }
                            crate::algebra::Algebra::apply(alg, *op, &args)
                        })
                        .collect();
                    if !seen.contains(&table) {
                        let t = Term::apply(
                            symbol.clone(),
                            idx.iter().map(|&i| terms[i].clone()).collect(),
                        );
                        if passes(&table, &t)? {
                            return Ok(SearchResult {
                                term: Some(t),
                                distinct: seen.len() + 1,
                                depth,
                            });
                        }
                        seen.insert(table.clone());
                        if seen.len() > cap {
                            return Err(Error::bound(
                                "distinct search terms",
                                seen.len() as u128,
                                cap as u128,
                            ));
                        }
                        terms.push(t);
                        tables.push(table);
                    }
                }
                // odometer, last position fastest
                let mut pos = arity;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < known {
                        break;
                    }
                    idx[pos] = 0;
                    if pos == 0 {
                        pos = usize::MAX;
                        break;
                    }
                }
                if arity == 0 || pos == usize::MAX {
                    break;
                }
            }
        }
        if terms.len() == known {
            // no new term functions: deeper levels add nothing
            return Ok(SearchResult {
                term: None,
                distinct: seen.len(),
                depth,
            });
        }
    }
    Ok(SearchResult {
        term: None,
        distinct: seen.len(),
        depth: max_depth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn ctx(alg: FiniteAlgebra) -> Context {
        Context::new(alg, Limits::default())
    }

    fn plus(a: Term, b: Term) -> Term {
        Term::apply("+", vec![a, b])
    }

    fn xyz_sum() -> Term {
        plus(plus(Term::x(), Term::y()), Term::z())
    }

    #[test]
    fn lipparini_shape() {
        let p = xyz_sum();
        let q = lipparini(&p).unwrap();
        assert_eq!(q.count_symbol("+"), 3 * p.count_symbol("+"));
        assert_eq!(lipparini(&Term::z()).unwrap(), Term::z());
        let z2 = corpus::cyclic_group(2);
        let expected = plus(plus(Term::x(), Term::y()), Term::w());
        assert!(check_identity(&z2, &q, &expected, 4).unwrap().holds());
        assert!(matches!(
            lipparini(&Term::w()),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn difference_term_examples() {
        let c = ctx(corpus::cyclic_group(2));
        assert!(difference_verdict(&c, &xyz_sum()).unwrap().holds);

        let sl = ctx(corpus::semilattice2());
        assert!(difference_verdict(&sl, &Term::z()).unwrap().holds);
        let v = difference_verdict(&sl, &Term::x()).unwrap();
        assert!(!v.holds);
        match &v.failures[0] {
            TermFailure::Identity {
                env,
                lhs_value,
                rhs_value,
                ..
            } => {
                assert_eq!(env, &vec![0, 1]);
                assert_eq!((*lhs_value, *rhs_value), (0, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn kiss_term_examples() {
        let sl = ctx(corpus::semilattice2());
        assert!(kiss_verdict(&sl, &Term::z()).unwrap().holds);
        let z2 = ctx(corpus::cyclic_group(2));
        let q = plus(plus(Term::x(), Term::y()), Term::w());
        assert!(kiss_verdict(&z2, &q).unwrap().holds);
        let v = kiss_verdict(&z2, &Term::z()).unwrap();
        assert!(!v.holds);
        assert!(v.failures.iter().any(|f| matches!(
            f,
            TermFailure::Kiss { matrix, c_prime: 1, .. } if *matrix == Matrix2x2::new(0, 0, 0, 0)
        )));
    }

    #[test]
    fn variety_level_covers_relatives() {
        let limits = Limits {
            variety_level: true,
            ..Limits::default()
        };
        let v = is_difference_term(
            &corpus::cyclic_group(4),
            &corpus::additive_difference_term(),
            &limits,
        )
        .unwrap();
        assert!(v.holds);
        // Z4 itself, Z4/{0,2}, Z4/full, and the subgroups {0} and {0,2}
        assert_eq!(v.checked_on.len(), 5);
    }

    fn tree(spec: &[(usize, Color, &[usize])]) -> MaltsevTree {
        MaltsevTree::new(
            spec.iter()
                .map(|&(id, color, children)| TreeVertex {
                    id,
                    color,
                    children: children.to_vec(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_vertex_tree() {
        let z2 = corpus::cyclic_group(2);
        let t = tree(&[(0, Color::B, &[])]);
        let mut fam = TermFamily {
            pairs: BTreeMap::from([(0, (Term::x(), Term::x()))]),
            p: xyz_sum(),
        };
        let v = verify_maltsev_tree(&z2, &t, &fam).unwrap();
        assert!(v.holds, "{v:?}");
        fam.pairs.insert(0, (Term::x(), Term::y()));
        let v = verify_maltsev_tree(&z2, &t, &fam).unwrap();
        assert!(v.failed_axioms().contains(&"ax1"));
        assert!(v.failures.iter().all(|f| f.revalidate(&z2).unwrap()));
    }

    #[test]
    fn malformed_trees() {
        let bad = MaltsevTree::new(vec![
            TreeVertex {
                id: 0,
                color: Color::B,
                children: vec![1],
            },
            TreeVertex {
                id: 1,
                color: Color::B,
                children: vec![],
            },
        ]);
        assert!(matches!(bad, Err(Error::MalformedTree(_))));
        let orphan = MaltsevTree::new(vec![
            TreeVertex {
                id: 0,
                color: Color::B,
                children: vec![],
            },
            TreeVertex {
                id: 1,
                color: Color::G,
                children: vec![],
            },
        ]);
        assert!(matches!(orphan, Err(Error::MalformedTree(_))));
        let json = r#"{"vertices":[{"id":0,"color":"g","children":[]}],"root":0}"#;
        assert!(matches!(
            MaltsevTree::from_json(json),
            Err(Error::MalformedTree(_))
        ));
    }

    #[test]
    fn tree_navigation() {
        let t = tree(&[
            (0, Color::B, &[1, 2]),
            (1, Color::G, &[3, 4]),
            (2, Color::G, &[]),
            (3, Color::B, &[]),
            (4, Color::B, &[]),
        ]);
        assert_eq!(t.successor(1), Some(2));
        assert_eq!(t.successor(2), None);
        assert_eq!(t.successor(0), None);
        assert_eq!(t.first_child(1), Some(3));
        assert_eq!(t.last_child(0), Some(2));
        let round = MaltsevTree::from_json(&t.to_json()).unwrap();
        assert_eq!(round, t);
    }

    #[test]
    fn missing_terms() {
        let t = tree(&[(0, Color::B, &[1]), (1, Color::G, &[])]);
        let fam = TermFamily {
            pairs: BTreeMap::from([(0, (Term::x(), Term::x()))]),
            p: Term::z(),
        };
        assert_eq!(
            verify_maltsev_tree(&corpus::set2(), &t, &fam),
            Err(Error::MissingVertexTerms(1))
        );
    }

    #[test]
    fn family_json_round_trip() {
        let fam = TermFamily {
            pairs: BTreeMap::from([(0, (Term::x(), xyz_sum()))]),
            p: xyz_sum(),
        };
        let text = fam.to_value().to_string();
        assert_eq!(TermFamily::from_json(&text).unwrap(), fam);
    }

    #[test]
    fn search_examples() {
        let z2 = corpus::cyclic_group(2);
        let found = search_difference_term(&ctx(z2.clone()), 2).unwrap();
        let t = found.term.expect("a Maltsev term");
        assert!(check_identity(&z2, &t, &xyz_sum(), 3).unwrap().holds());

        let sl = search_difference_term(&ctx(corpus::semilattice2()), 1).unwrap();
        assert_eq!(sl.term, Some(Term::z()));

        // sets are abelian, so no term satisfies p(a,b,b) = a
        let set = search_difference_term(&ctx(corpus::set2()), 3).unwrap();
        assert_eq!(set.term, None);
    }
}
