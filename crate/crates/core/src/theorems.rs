//! Executable checks of the statements relating `R`, `M*`, the commutator
//! and Kiss terms. Every check re-verifies its own hypotheses, and every
//! failure carries a witness made of facts that can be re-validated from
//! the raw definitions.

use std::cell::OnceCell;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{quotient, Algebra, FiniteAlgebra};
use crate::commutator::{saturation_witness, tc_commutator, zero_test_witness};
use crate::congruence::Congruence;
use crate::context::Context;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::special::{lipparini, TermFailure};
use crate::term::{evaluate_term, Term, TermTable};
use crate::two_dim::{m_rel, mstar, Matrix2x2, TupleSet4};

/// The available checks, in their canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Terms,
    Crucial,
    Main,
    Lemma62,
    Indep,
    KissAgreement,
    QminusGraph,
    CorDelta,
    Arbitrary,
    Quotient,
    Sdmeet,
    Hyper,
}

impl CheckName {
    pub const ALL: [CheckName; 12] = [
        CheckName::Terms,
        CheckName::Crucial,
        CheckName::Main,
        CheckName::Lemma62,
        CheckName::Indep,
        CheckName::KissAgreement,
        CheckName::QminusGraph,
        CheckName::CorDelta,
        CheckName::Arbitrary,
        CheckName::Quotient,
        CheckName::Sdmeet,
        CheckName::Hyper,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Terms => "terms",
            CheckName::Crucial => "crucial",
            CheckName::Main => "main",
            CheckName::Lemma62 => "lemma62",
            CheckName::Indep => "indep",
            CheckName::KissAgreement => "kiss_agreement",
            CheckName::QminusGraph => "qminus_graph",
            CheckName::CorDelta => "cor_delta",
            CheckName::Arbitrary => "arbitrary",
            CheckName::Quotient => "quotient",
            CheckName::Sdmeet => "sdmeet",
            CheckName::Hyper => "hyper",
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        CheckName::ALL
            .into_iter()
            .find(|c| c.as_str() == norm)
            .ok_or_else(|| Error::Config(format!("unknown check `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    /// Passed, but part of the scan was pseudorandomly sampled.
    PassSampled,
    Fail,
    Skipped,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::PassSampled => "pass-sampled",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    R,
    M,
    #[serde(rename = "M*")]
    MStar,
}

/// A single checkable claim about the algebra and the report's `(α, β)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "fact", rename_all = "snake_case")]
pub enum Fact {
    Member {
        relation: Relation,
        matrix: Matrix2x2,
        member: bool,
    },
    /// Membership in `M*(ᾱ,β̄)` computed in `A/[α,β]`, on block indices.
    QuotientMember {
        matrix: Matrix2x2,
        member: bool,
    },
    InCommutator {
        pair: (usize, usize),
        related: bool,
    },
    /// Membership in `R` of an explicitly given pair of congruences.
    InROf {
        alpha: Congruence,
        beta: Congruence,
        matrix: Matrix2x2,
        member: bool,
    },
    /// Membership in the commutator of an explicitly given pair.
    InCommutatorOf {
        alpha: Congruence,
        beta: Congruence,
        pair: (usize, usize),
        related: bool,
    },
    Related {
        congruence: Congruence,
        pair: (usize, usize),
        related: bool,
    },
    Evaluates {
        term: Term,
        env: Vec<usize>,
        value: usize,
    },
    Operation {
        symbol: String,
        args: Vec<usize>,
        value: usize,
    },
    Coordinatewise {
        symbol: String,
        args: Vec<Matrix2x2>,
        value: Matrix2x2,
    },
    Equal {
        left: usize,
        right: usize,
    },
    Distinct {
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Refutes the statement or the claimed equivalence.
    Counterexample,
    /// Shows why a side of an equivalence is false.
    Evidence,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub role: Role,
    pub note: String,
    pub facts: Vec<Fact>,
}

impl Witness {
    fn new(role: Role, note: impl Into<String>, facts: Vec<Fact>) -> Self {
        Witness {
            role,
            note: note.into(),
            facts,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub check: CheckName,
    pub algebra: String,
    pub alpha: Congruence,
    pub beta: Congruence,
    pub terms: BTreeMap<String, Term>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub witnesses: Vec<Witness>,
    pub stats: BTreeMap<String, u64>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl CheckReport {
    fn new(check: CheckName, ctx: &Context, alpha: &Congruence, beta: &Congruence) -> Self {
        CheckReport {
            check,
            algebra: ctx.algebra().name().to_string(),
            alpha: alpha.clone(),
            beta: beta.clone(),
            terms: BTreeMap::new(),
            verdict: Verdict::Pass,
            reason: None,
            witnesses: Vec::new(),
            stats: BTreeMap::new(),
            notes: Vec::new(),
            elapsed_ms: None,
        }
    }

    fn term(&mut self, name: &str, t: &Term) {
        self.terms.insert(name.to_string(), t.clone());
    }

    fn skip(&mut self, reason: impl Into<String>) {
        self.verdict = Verdict::Skipped;
        self.reason = Some(reason.into());
    }

    fn fail(&mut self, reason: impl Into<String>, witness: Witness) {
        self.verdict = Verdict::Fail;
        if self.reason.is_none() {
            self.reason = Some(reason.into());
        }
        self.witnesses.push(witness);
    }

    fn stat(&mut self, key: &str, value: usize) {
        self.stats.insert(key.to_string(), value as u64);
    }

    pub fn passed(&self) -> bool {
        matches!(self.verdict, Verdict::Pass | Verdict::PassSampled)
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }

    /// Re-checks every fact of every witness from scratch, with no cached
    /// relations.
    pub fn revalidate(&self, alg: &FiniteAlgebra, limits: &Limits) -> Result<bool> {
        let fresh = Fresh::new(alg, &self.alpha, &self.beta, limits);
        for w in &self.witnesses {
            for fact in &w.facts {
                if !fresh.holds(fact)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Independently computed relations for witness validation.
struct Fresh<'a> {
    alg: &'a FiniteAlgebra,
    alpha: &'a Congruence,
    beta: &'a Congruence,
    max_power: u128,
    m: OnceCell<TupleSet4>,
    mstar: OnceCell<TupleSet4>,
    gamma: OnceCell<Congruence>,
    quotient_mstar: OnceCell<TupleSet4>,
}

impl<'a> Fresh<'a> {
    fn new(
        alg: &'a FiniteAlgebra,
        alpha: &'a Congruence,
        beta: &'a Congruence,
        limits: &Limits,
    ) -> Self {
        Fresh {
            alg,
            alpha,
            beta,
            max_power: limits.max_power,
            m: OnceCell::new(),
            mstar: OnceCell::new(),
            gamma: OnceCell::new(),
            quotient_mstar: OnceCell::new(),
        }
    }

    fn cached<T>(cell: &OnceCell<T>, f: impl FnOnce() -> Result<T>) -> Result<&T> {
        if let Some(v) = cell.get() {
            return Ok(v);
        }
        let v = f()?;
        Ok(cell.get_or_init(|| v))
    }

    fn gamma(&self) -> Result<&Congruence> {
        Self::cached(&self.gamma, || {
            Ok(tc_commutator(self.alg, self.alpha, self.beta, self.max_power)?.result)
        })
    }

    fn in_r(&self, m: Matrix2x2) -> bool {
        let n = self.alg.size();
        m.max_entry() < n
            && self.alpha.related(m.a, m.b)
            && self.alpha.related(m.c, m.d)
            && self.beta.related(m.a, m.c)
            && self.beta.related(m.b, m.d)
    }

    fn holds(&self, fact: &Fact) -> Result<bool> {
        let n = self.alg.size();
        Ok(match fact {
            Fact::Member {
                relation,
                matrix,
                member,
            } => {
                let inside = match relation {
                    Relation::R => self.in_r(*matrix),
                    Relation::M => {
                        let m = Self::cached(&self.m, || {
                            m_rel(self.alg, self.alpha, self.beta, self.max_power)
                        })?;
                        matrix.max_entry() < n && m.contains(*matrix)
                    }
                    Relation::MStar => {
                        let m = Self::cached(&self.mstar, || {
                            mstar(self.alg, self.alpha, self.beta, self.max_power)
                        })?;
                        matrix.max_entry() < n && m.contains(*matrix)
                    }
                };
                inside == *member
            }
            Fact::QuotientMember { matrix, member } => {
                let gamma = self.gamma()?.clone();
                let set = Self::cached(&self.quotient_mstar, || {
                    let q = quotient(self.alg, &gamma)?;
                    let a = q.bar_congruence(self.alpha);
                    let b = q.bar_congruence(self.beta);
                    mstar(&q.algebra, &a, &b, self.max_power)
                })?;
                let inside = matrix.max_entry() < set.universe() && set.contains(*matrix);
                inside == *member
            }
            Fact::InCommutator { pair, related } => {
                pair.0.max(pair.1) < n && self.gamma()?.related(pair.0, pair.1) == *related
            }
            Fact::InROf {
                alpha,
                beta,
                matrix,
                member,
            } => {
                let inside = matrix.max_entry() < alpha.size()
                    && alpha.related(matrix.a, matrix.b)
                    && alpha.related(matrix.c, matrix.d)
                    && beta.related(matrix.a, matrix.c)
                    && beta.related(matrix.b, matrix.d);
                inside == *member
            }
            Fact::InCommutatorOf {
                alpha,
                beta,
                pair,
                related,
            } => {
                let gamma = tc_commutator(self.alg, alpha, beta, self.max_power)?.result;
                pair.0.max(pair.1) < n && gamma.related(pair.0, pair.1) == *related
            }
            Fact::Related {
                congruence,
                pair,
                related,
            } => {
                pair.0.max(pair.1) < congruence.size()
                    && congruence.related(pair.0, pair.1) == *related
            }
            Fact::Evaluates { term, env, value } => evaluate_term(self.alg, term, env)? == *value,
            Fact::Operation {
                symbol,
                args,
                value,
            } => {
                let t = Term::apply(symbol.clone(), (0..args.len()).map(Term::var).collect());
                evaluate_term(self.alg, &t, args)? == *value
            }
            Fact::Coordinatewise {
                symbol,
                args,
                value,
            } => {
                let t = Term::apply(symbol.clone(), (0..args.len()).map(Term::var).collect());
                let mut out = [0; 4];
                for (pos, slot) in out.iter_mut().enumerate() {
                    let column: Vec<usize> = args.iter().map(|m| m.to_array()[pos]).collect();
                    *slot = evaluate_term(self.alg, &t, &column)?;
                }
                Matrix2x2::from(out) == *value
            }
            Fact::Equal { left, right } => left == right,
            Fact::Distinct { left, right } => left != right,
        })
    }
}

fn member(relation: Relation, matrix: Matrix2x2, member: bool) -> Fact {
    Fact::Member {
        relation,
        matrix,
        member,
    }
}

fn eval(term: &Term, m: Matrix2x2, value: usize) -> Fact {
    Fact::Evaluates {
        term: term.clone(),
        env: m.to_array().to_vec(),
        value,
    }
}

fn q_at(table: &TermTable, m: Matrix2x2) -> usize {
    table.get4(m.a, m.b, m.c, m.d)
}

fn note_scope(report: &mut CheckReport, ctx: &Context) {
    let scope = if ctx.limits().variety_level {
        "term hypotheses checked on the algebra, its quotients and its subalgebras"
    } else {
        "term hypotheses checked on the algebra only"
    };
    report.notes.push(scope.to_string());
}

/// Skips the report unless `q` passes as a Kiss term.
fn require_kiss(report: &mut CheckReport, ctx: &Context, name: &str, q: &Term) -> Result<bool> {
    if ctx.kiss_term(q)?.holds {
        return Ok(true);
    }
    report.skip(format!(
        "{name} = {q} is not a Kiss term of {}",
        ctx.algebra().name()
    ));
    Ok(false)
}

fn require_difference(report: &mut CheckReport, ctx: &Context, p: &Term) -> Result<bool> {
    if ctx.difference_term(p)?.holds {
        return Ok(true);
    }
    report.skip(format!(
        "p = {p} is not a difference term of {}",
        ctx.algebra().name()
    ));
    Ok(false)
}

/// Skips the report unless `[α,β] = 0` by the direct zero test on `M`.
fn require_zero(
    report: &mut CheckReport,
    ctx: &Context,
    alpha: &Congruence,
    beta: &Congruence,
) -> Result<bool> {
    if ctx.commutator_is_zero(alpha, beta)? {
        return Ok(true);
    }
    report.skip("[α,β] ≠ 0");
    Ok(false)
}

fn set_stats(
    report: &mut CheckReport,
    ctx: &Context,
    alpha: &Congruence,
    beta: &Congruence,
) -> Result<()> {
    let stages = ctx.mstar_stages(alpha, beta)?;
    report.stat("R", ctx.r(alpha, beta).len());
    report.stat("M", ctx.m(alpha, beta)?.len());
    report.stat("M*", stages.fixpoint.len());
    report.stat("M*_stages", stages.stage_count());
    Ok(())
}

fn term_failure_witness(f: &TermFailure, p: Option<&Term>, q: Option<&Term>) -> Witness {
    match f {
        TermFailure::Identity {
            algebra,
            identity,
            lhs,
            rhs,
            env,
            lhs_value,
            rhs_value,
        } => Witness::new(
            Role::Counterexample,
            format!("{identity} fails in {algebra}"),
            vec![
                Fact::Evaluates {
                    term: lhs.clone(),
                    env: env.clone(),
                    value: *lhs_value,
                },
                Fact::Evaluates {
                    term: rhs.clone(),
                    env: env.clone(),
                    value: *rhs_value,
                },
                Fact::Distinct {
                    left: *lhs_value,
                    right: *rhs_value,
                },
            ],
        ),
        TermFailure::Difference {
            algebra,
            theta,
            a,
            b,
            value,
            ..
        } => Witness::new(
            Role::Counterexample,
            format!("p({a},{b},{b}) and {a} are not related by [θ,θ] for θ = {theta} in {algebra}"),
            vec![
                Fact::Related {
                    congruence: theta.clone(),
                    pair: (*a, *b),
                    related: true,
                },
                Fact::Evaluates {
                    term: p.expect("difference failure").clone(),
                    env: vec![*a, *b, *b],
                    value: *value,
                },
                Fact::InCommutatorOf {
                    alpha: theta.clone(),
                    beta: theta.clone(),
                    pair: (*value, *a),
                    related: false,
                },
            ],
        ),
        TermFailure::Kiss {
            algebra,
            alpha,
            beta,
            matrix,
            c_prime,
            values,
            ..
        } => {
            let other = Matrix2x2::new(matrix.a, matrix.b, *c_prime, matrix.d);
            let q = q.expect("Kiss failure");
            Witness::new(
                Role::Counterexample,
                format!("q at {matrix} and {other} are not related by [α,β] in {algebra}"),
                vec![
                    Fact::InROf {
                        alpha: alpha.clone(),
                        beta: beta.clone(),
                        matrix: *matrix,
                        member: true,
                    },
                    Fact::InROf {
                        alpha: alpha.clone(),
                        beta: beta.clone(),
                        matrix: other,
                        member: true,
                    },
                    eval(q, *matrix, values.0),
                    eval(q, other, values.1),
                    Fact::InCommutatorOf {
                        alpha: alpha.clone(),
                        beta: beta.clone(),
                        pair: *values,
                        related: false,
                    },
                ],
            )
        }
    }
}

/// Verifies the terms an entry claims: `p` as a difference term, `q` as a
/// Kiss term, and the two constructions between them (Lipparini's term of
/// `p` is a Kiss term; `q(x,y,z,z)` is a difference term). Failures found
/// on quotients or subalgebras are reported in the notes only, since their
/// witnesses live in another algebra.
pub fn check_terms(ctx: &Context, terms: &Terms) -> Result<CheckReport> {
    let full = Congruence::full(ctx.size());
    let mut report = CheckReport::new(CheckName::Terms, ctx, &full, &full);
    note_scope(&mut report, ctx);
    let name = ctx.algebra().name().to_string();
    let mut claims: Vec<(&str, Term, bool)> = Vec::new();
    if let Some(p) = &terms.difference {
        claims.push(("p", p.clone(), true));
        if ctx.difference_term(p)?.holds {
            claims.push(("lipparini(p)", lipparini(p)?, false));
        }
    }
    if let Some(q) = &terms.kiss {
        claims.push(("q", q.clone(), false));
        if ctx.kiss_term(q)?.holds {
            claims.push(("q(x,y,z,z)", crate::special::collapse_kiss(q)?, true));
        }
    }
    if claims.is_empty() {
        report.skip("no terms declared");
        return Ok(report);
    }
    for (label, t, is_difference) in claims {
        report.term(label, &t);
        let verdict = if is_difference {
            ctx.difference_term(&t)?
        } else {
            ctx.kiss_term(&t)?
        };
        for f in &verdict.failures {
            let in_a = match f {
                TermFailure::Identity { algebra, .. }
                | TermFailure::Difference { algebra, .. }
                | TermFailure::Kiss { algebra, .. } => *algebra == name,
            };
            let kind = if is_difference { "difference" } else { "Kiss" };
            if in_a {
                let w = if is_difference {
                    term_failure_witness(f, Some(&t), None)
                } else {
                    term_failure_witness(f, None, Some(&t))
                };
                report.fail(format!("{label} is not a {kind} term"), w);
            } else {
                report.verdict = Verdict::Fail;
                report
                    .reason
                    .get_or_insert_with(|| format!("{label} is not a {kind} term"));
                report.notes.push(format!(
                    "{label}: {}",
                    serde_json::to_string(f).expect("serializable")
                ));
            }
        }
    }
    Ok(report)
}

/// Lemma in the zero-commutator case: `[a q(a,b,c,d); b d] ∈ M*` for every
/// `[a c; b d] ∈ R`, with `q` obtained from `p` by Lipparini's construction.
pub fn check_crucial(
    ctx: &Context,
    p: &Term,
    alpha: &Congruence,
    beta: &Congruence,
) -> Result<CheckReport> {
    let mut report = CheckReport::new(CheckName::Crucial, ctx, alpha, beta);
    report.term("p", p);
    note_scope(&mut report, ctx);
    let q = lipparini(p)?;
    report.term("q", &q);
    if !require_difference(&mut report, ctx, p)? || !require_zero(&mut report, ctx, alpha, beta)? {
        return Ok(report);
    }
    set_stats(&mut report, ctx, alpha, beta)?;
    moved_into_mstar(&mut report, ctx, &q, alpha, beta)?;
    Ok(report)
}

fn moved_into_mstar(
    report: &mut CheckReport,
    ctx: &Context,
    q: &Term,
    alpha: &Congruence,
    beta: &Congruence,
) -> Result<()> {
    let table = ctx.table(q, 4)?;
    let ms = ctx.mstar(alpha, beta)?;
    for m in ctx.r(alpha, beta).iter() {
        let c2 = q_at(&table, m);
        let moved = Matrix2x2::new(m.a, m.b, c2, m.d);
        if !ms.contains(moved) {
            report.fail(
                "[a q(a,b,c,d); b d] is not in M*",
                Witness::new(
                    Role::Counterexample,
                    format!("{m} in R, but {moved} is not in M*"),
                    vec![
                        member(Relation::R, m, true),
                        eval(q, m, c2),
                        member(Relation::MStar, moved, false),
                    ],
                ),
            );
            return Ok(());
        }
    }
    Ok(())
}

/// Outcome of scanning `q` for compatibility with the basic operations on `R`.
struct HomScan {
    failure: Option<Witness>,
    sampled: bool,
    scanned: u64,
}

fn hom_scan(ctx: &Context, q: &Term, r: &[Matrix2x2]) -> Result<HomScan> {
    let alg = ctx.algebra();
    let limits = ctx.limits();
    let table = ctx.table(q, 4)?;
    let qvals: Vec<usize> = r.iter().map(|&m| q_at(&table, m)).collect();
    let mut scan = HomScan {
        failure: None,
        sampled: false,
        scanned: 0,
    };
    if r.is_empty() {
        return Ok(scan);
    }
    let probe = |op: usize, idx: &[usize], scan: &mut HomScan| -> bool {
        scan.scanned += 1;
        let mut out = [0; 4];
        let mut args = vec![0; idx.len()];
        for (pos, slot) in out.iter_mut().enumerate() {
            for (a, &i) in args.iter_mut().zip(idx) {
                *a = r[i].to_array()[pos];
            }
            *slot = alg.apply(op, &args);
        }
        let image = Matrix2x2::from(out);
        let left = q_at(&table, image);
        let qargs: Vec<usize> = idx.iter().map(|&i| qvals[i]).collect();
        let right = alg.apply(op, &qargs);
        if left == right {
            return true;
        }
        let symbol = alg.symbol(op).to_string();
        let mut facts: Vec<Fact> = idx
            .iter()
            .map(|&i| member(Relation::R, r[i], true))
            .collect();
        facts.push(Fact::Coordinatewise {
            symbol: symbol.clone(),
            args: idx.iter().map(|&i| r[i]).collect(),
            value: image,
        });
        facts.push(eval(q, image, left));
        facts.extend(idx.iter().map(|&i| eval(q, r[i], qvals[i])));
        facts.push(Fact::Operation {
            symbol: symbol.clone(),
            args: qargs,
            value: right,
        });
        facts.push(Fact::Distinct { left, right });
        scan.failure = Some(Witness::new(
            Role::Counterexample,
            format!("q does not commute with `{symbol}` on R"),
            facts,
        ));
        false
    };
    for op in 0..alg.op_count() {
        let k = alg.arity(op);
        let total = (r.len() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        if total <= limits.hom_exhaustive_cap {
            let mut idx = vec![0usize; k];
            loop {
                if !probe(op, &idx, &mut scan) {
                    return Ok(scan);
                }
                let mut pos = k;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < r.len() {
                        break;
                    }
                    idx[pos] = 0;
                    if pos == 0 {
                        pos = usize::MAX;
                        break;
                    }
                }
                if k == 0 || pos == usize::MAX {
                    break;
                }
            }
        } else {
            scan.sampled = true;
            let mut rng = ChaCha8Rng::seed_from_u64(limits.seed ^ op as u64);
            let mut idx = vec![0usize; k];
            for _ in 0..limits.hom_samples {
                for i in idx.iter_mut() {
                    *i = rng.gen_range(0..r.len());
                }
                if !probe(op, &idx, &mut scan) {
                    return Ok(scan);
                }
            }
        }
    }
    Ok(scan)
}

/// `q` restricted to `R(α,β)` is a homomorphism, when `[α,β] = 0`.
pub fn check_main(
    ctx: &Context,
    q: &Term,
    alpha: &Congruence,
    beta: &Congruence,
) -> Result<CheckReport> {
    let mut report = CheckReport::new(CheckName::Main, ctx, alpha, beta);
    report.term("q", q);
    note_scope(&mut report, ctx);
    if !require_kiss(&mut report, ctx, "q", q)? || !require_zero(&mut report, ctx, alpha, beta)? {
        return Ok(report);
    }
    set_stats(&mut report, ctx, alpha, beta)?;
    let r: Vec<Matrix2x2> = ctx.r(alpha, beta).iter().collect();
    let scan = hom_scan(ctx, q, &r)?;
    report.stat("scanned", scan.scanned as usize);
    if let Some(w) = scan.failure {
        report.fail("q is not a homomorphism on R", w);
    } else if scan.sampled {
        report.verdict = Verdict::PassSampled;
        report
            .notes
            .push(format!("sampled with seed {:#x}", ctx.limits().seed));
    }
    Ok(report)
}

fn independence_failure(
    ctx: &Context,
    q: &Term,
    alpha: &Congruence,
    beta: &Congruence,
) -> Result<Option<Witness>> {
    let table = ctx.table(q, 4)?;
    let n = ctx.size();
    for m in ctx.r(alpha, beta).iter() {
        let v = q_at(&table, m);
        for c2 in 0..n {
            if c2 == m.c || !beta.related(m.a, c2) || !alpha.related(c2, m.d) {
                continue;
            }
            let other = Matrix2x2::new(m.a, m.b, c2, m.d);
            let v2 = q_at(&table, other);
            if v != v2 {
                return Ok(Some(Witness::new(
                    Role::Counterexample,
                    format!("q depends on its third variable: {m} and {other} in R"),
                    vec![
                        member(Relation::R, m, true),
                        member(Relation::R, other, true),
                        eval(q, m, v),
                        eval(q, other, v2),
                        Fact::Distinct { left: v, right: v2 },
                    ],
                )));
            }
        }
    }
    Ok(None)
}

fn zero_test_evidence(
    ctx: &Context,
    alpha: &Congruence,
    beta: &Congruence,
) -> Result<Option<Witness>> {
    Ok(zero_test_witness(&*ctx.m(alpha, beta)?).map(|m| {
        Witness::new(
            Role::Evidence,
            format!("{m} in M has equal bottom entries and distinct top entries, so [α,β] ≠ 0"),
            vec![
                member(Relation::M, m, true),
                Fact::Equal {
                    left: m.b,
                    right: m.d,
                },
                Fact::Distinct {
                    left: m.a,
                    right: m.c,
                },
            ],
        )
    }))
}

/// `[α,β] = 0` exactly when `q` is a homomorphism on `R(α,β)` and does not
/// depend on its third variable there.
pub fn check_lemma62(
    ctx: &Context,
    q: &Term,
    alpha: &Congruence,
    beta: &Congruence,
) -> Result<CheckReport> {
    let mut report = CheckReport::new(CheckName::Lemma62, ctx, alpha, beta);
    report.term("q", q);
    note_scope(&mut report, ctx);
    if !require_kiss(&mut report, ctx, "q", q)? {
        return Ok(report);
    }
    set_stats(&mut report, ctx, alpha, beta)?;
    let lhs_evidence = zero_test_evidence(ctx, alpha, beta)?;
    let lhs = lhs_evidence.is_none();

    let mut rhs_witness = independence_failure(ctx, q, alpha, beta)?;
    let mut sampled = false;
    if rhs_witness.is_none() {
        let r: Vec<Matrix2x2> = ctx.r(alpha, beta).iter().collect();
        let scan = hom_scan(ctx, q, &r)?;
        report.stat("scanned", scan.scanned as usize);
        sampled = scan.sampled;
        rhs_witness = scan.failure;
    }
    let rhs = rhs_witness.is_none();
    report.stats.insert("lhs".into(), lhs as u64);
    report.stats.insert("rhs".into(), rhs as u64);

    match (lhs, rhs) {
        (true, true) => {
            if sampled {
                report.verdict = Verdict::PassSampled;
            }
        }
        (false, false) => {
            report.witnesses.extend(lhs_evidence);
            if let Some(mut w) = rhs_witness {
                w.role = Role::Evidence;
                report.witnesses.push(w);
            }
        }
        (true, false) => {
            let w = rhs_witness.expect("rhs is false");
            report.fail("[α,β] = 0 but the right-hand side fails", w);
        }
        (false, true) => {
            let mut w = lhs_evidence.expect("lhs is false");
            w.role = Role::Counterexample;
            report.fail("[α,β] ≠ 0 but q is an independent homomorphism on R", w);
        }
    }
    Ok(report)
}

/// `q` does not depend on its third variable on `R(α,β)` when `[α,β] = 0`.
pub fn check_indep_lemma(
    ctx: &Context,
    q: &Term,
    alpha: &Congruence,
    beta: &Congruence,
) -> Result<CheckReport> {
    let mut report = CheckReport::new(CheckName::Indep, ctx, alpha, beta);
    report.term("q", q);
    note_scope(&mut report, ctx);
    if !require_kiss(&mut report, ctx, "q", q)? || !require_zero(&mut report, ctx, alpha, beta)? {
        return Ok(report);
    }
    set_stats(&mut report, ctx, alpha, beta)?;
    if let Some(w) = independence_failure(ctx, q, alpha, beta)? {
        report.fail("q depends on its third variable on R", w);
    }
    Ok(report)
}

/// Two Kiss terms agree on `R(α,β)` when `[α,β] = 0`.
pub fn check_kiss_agreement(
    ctx: &Context,
    q1: &Term,
    q2: &Term,
    alpha: &Congruence,
    beta: &Congruence,
) -> Result<CheckReport> {
    let mut report = CheckReport::new(CheckName::KissAgreement, ctx, alpha, beta);
    report.term("q1", q1);
    report.term("q2", q2);
    note_scope(&mut report, ctx);
    if !require_kiss(&mut report, ctx, "q1", q1)?
        || !require_kiss(&mut report, ctx, "q2", q2)?
        || !require_zero(&mut report, ctx, alpha, beta)?
    {
        return Ok(report);
    }
    set_stats(&mut report, ctx, alpha, beta)?;
    let (t1, t2) = (ctx.table(q1, 4)?, ctx.table(q2, 4)?);
    for m in ctx.r(alpha, beta).iter() {
        let (v1, v2) = (q_at(&t1, m), q_at(&t2, m));
        if v1 != v2 {
            report.fail(
                "the Kiss terms disagree on R",
                Witness::new(
                    Role::Counterexample,
                    format!("q1 and q2 differ at {m}"),
                    vec![
                        member(Relation::R, m, true),
                        eval(q1, m, v1),
                        eval(q2, m, v2),
                        Fact::Distinct {
                            left: v1,
                            right: v2,
                        },
                    ],
                ),
            );
            break;
        }
    }
    Ok(report)
}

/// Compares `M*` with `{[a f(m); b d] : m ∈ R}` for a value function `f`
/// defined through `term` evaluated at `env(m)`.
fn graph_mismatch(
    ctx: &Context,
    alpha: &Congruence,
    beta: &Congruence,
    term: &Term,
    env: impl Fn(Matrix2x2) -> Vec<usize>,
) -> Result<Option<Witness>> {
    let alg = ctx.algebra();
    let ms = ctx.mstar(alpha, beta)?;
    let r = ctx.r(alpha, beta);
    let mut graph = TupleSet4::empty(ctx.size());
    for m in r.iter() {
        let e = env(m);
        let v = evaluate_term(alg, term, &e)?;
        let g = Matrix2x2::new(m.a, m.b, v, m.d);
        if !ms.contains(g) {
            return Ok(Some(Witness::new(
                Role::Counterexample,
                format!("{g} is in the graph but not in M*"),
                vec![
                    member(Relation::R, m, true),
                    Fact::Evaluates {
                        term: term.clone(),
                        env: e,
                        value: v,
                    },
                    member(Relation::MStar, g, false),
                ],
            )));
        }
        graph.insert(g);
    }
    // any extra member m of M* lies in R, so its own graph point differs
    if let Some(m) = ms.iter().find(|m| !graph.contains(*m)) {
        let e = env(m);
        let v = evaluate_term(alg, term, &e)?;
        return Ok(Some(Witness::new(
            Role::Counterexample,
            format!("{m} is in M* but not in the graph"),
            vec![
                member(Relation::MStar, m, true),
                member(Relation::R, m, true),
                Fact::Evaluates {
                    term: term.clone(),
                    env: e,
                    value: v,
                },
                Fact::Distinct {
                    left: v,
                    right: m.c,
                },
            ],
        )));
    }
    Ok(None)
}

/// When `[α,β] = 0`: `M*` is the graph of `q⁻(a,b,d) = q(a,b,c,d)` over
/// `R⁻`, and for `α ≤ β` it is also the graph of `p` restricted to `R⁻`.
pub fn check_qminus_graph(
    ctx: &Context,
    q: &Term,
    p: Option<&Term>,
    alpha: &Congruence,
    beta: &Congruence,
) -> Result<CheckReport> {
    let mut report = CheckReport::new(CheckName::QminusGraph, ctx, alpha, beta);
    report.term("q", q);
    if let Some(p) = p {
        report.term("p", p);
    }
    note_scope(&mut report, ctx);
    if !require_kiss(&mut report, ctx, "q", q)? || !require_zero(&mut report, ctx, alpha, beta)? {
        return Ok(report);
    }
    set_stats(&mut report, ctx, alpha, beta)?;
    // q⁻ is well defined on R⁻ exactly when q ignores c on R
    if let Some(w) = independence_failure(ctx, q, alpha, beta)? {
        report.fail("q⁻ is not well defined", w);
        return Ok(report);
    }
    if let Some(w) = graph_mismatch(ctx, alpha, beta, q, |m| m.to_array().to_vec())? {
        report.fail("M* is not the graph of q⁻", w);
        return Ok(report);
    }
    let Some(p) = p else {
        report
            .notes
            .push("no difference term given; p-graph part not checked".into());
        return Ok(report);
    };
    if !alpha.is_below(beta) {
        report
            .notes
            .push("α ≰ β; p-graph part not applicable".into());
        return Ok(report);
    }
    if !ctx.difference_term(p)?.holds {
        report.notes.push(format!(
            "p = {p} is not a difference term; p-graph part not checked"
        ));
        return Ok(report);
    }
    report.stats.insert("p_graph_checked".into(), 1);
    let qt = ctx.table(q, 4)?;
    let pt = ctx.table(p, 3)?;
    for m in ctx.r(alpha, beta).iter() {
        let (qv, pv) = (q_at(&qt, m), pt.get3(m.a, m.b, m.d));
        if qv != pv {
            report.fail(
                "q⁻ and p disagree on R⁻",
                Witness::new(
                    Role::Counterexample,
                    format!("q(a,b,c,d) ≠ p(a,b,d) at {m}"),
                    vec![
                        member(Relation::R, m, true),
                        eval(q, m, qv),
                        Fact::Evaluates {
                            term: p.clone(),
                            env: vec![m.a, m.b, m.d],
                            value: pv,
                        },
                        Fact::Distinct {
                            left: qv,
                            right: pv,
                        },
                    ],
                ),
            );
            return Ok(report);
        }
    }
    if let Some(w) = graph_mismatch(ctx, alpha, beta, p, |m| vec![m.a, m.b, m.d])? {
        report.fail("M* is not the graph of p", w);
    }
    Ok(report)
}

/// When `[α,β] = 0`: `M* = {[a q(a,b,c,d); b d] : [a c; b d] ∈ R}` and
/// `M* = {m ∈ R : q(m) = c}`.
pub fn check_cor_delta(
    ctx: &Context,
    q: &Term,
    alpha: &Congruence,
    beta: &Congruence,
) -> Result<CheckReport> {
    let mut report = CheckReport::new(CheckName::CorDelta, ctx, alpha, beta);
    report.term("q", q);
    note_scope(&mut report, ctx);
    if !require_kiss(&mut report, ctx, "q", q)? || !require_zero(&mut report, ctx, alpha, beta)? {
        return Ok(report);
    }
    set_stats(&mut report, ctx, alpha, beta)?;
    if let Some(w) = graph_mismatch(ctx, alpha, beta, q, |m| m.to_array().to_vec())? {
        report.fail("M* is not the image of R under c ↦ q(a,b,c,d)", w);
        return Ok(report);
    }
    let zero = Congruence::equality(ctx.size());
    if let Some(w) = fixed_point_mismatch(ctx, q, alpha, beta, &zero)? {
        report.fail("M* is not the set of q-fixed members of R", w);
    }
    Ok(report)
}

/// Compares `M*` with `{m ∈ R : q(m) ≡ c (mod γ)}`. A `γ` of equality is
/// checked through plain equality facts, anything else through the
/// commutator of the report's pair.
fn fixed_point_mismatch(
    ctx: &Context,
    q: &Term,
    alpha: &Congruence,
    beta: &Congruence,
    gamma: &Congruence,
) -> Result<Option<Witness>> {
    let table = ctx.table(q, 4)?;
    let ms = ctx.mstar(alpha, beta)?;
    let relation_fact = |v: usize, c: usize, related: bool| {
        if gamma.is_equality() {
            if related {
                Fact::Equal { left: v, right: c }
            } else {
                Fact::Distinct { left: v, right: c }
            }
        } else {
            Fact::InCommutator {
                pair: (v, c),
                related,
            }
        }
    };
    for m in ctx.r(alpha, beta).iter() {
        let v = q_at(&table, m);
        let fixed = gamma.related(v, m.c);
        if fixed != ms.contains(m) {
            let note = if fixed {
                format!("{m} satisfies the condition but is not in M*")
            } else {
                format!("{m} is in M* but violates the condition")
            };
            return Ok(Some(Witness::new(
                Role::Counterexample,
                note,
                vec![
                    member(Relation::R, m, true),
                    eval(q, m, v),
                    relation_fact(v, m.c, fixed),
                    member(Relation::MStar, m, !fixed),
                ],
            )));
        }
    }
    Ok(None)
}

/// In any algebra: `(a,b) ∈ [α,β]` gives `[a a; a b] ∈ M*`, and `M*` is
/// `[α,β]`-saturated.
pub fn check_arbitrary(
    ctx: &Context,
    alpha: &Congruence,
    beta: &Congruence,
) -> Result<CheckReport> {
    let mut report = CheckReport::new(CheckName::Arbitrary, ctx, alpha, beta);
    set_stats(&mut report, ctx, alpha, beta)?;
    let gamma = ctx.commutator(alpha, beta)?;
    let ms = ctx.mstar(alpha, beta)?;
    if let Some((a, b)) = gamma
        .pairs()
        .find(|&(a, b)| !ms.contains(Matrix2x2::new(a, a, a, b)))
    {
        let m = Matrix2x2::new(a, a, a, b);
        report.fail(
            "a commutator pair is missing from M*",
            Witness::new(
                Role::Counterexample,
                format!("({a},{b}) ∈ [α,β] but {m} is not in M*"),
                vec![
                    Fact::InCommutator {
                        pair: (a, b),
                        related: true,
                    },
                    member(Relation::MStar, m, false),
                ],
            ),
        );
    }
    if let Some((m, moved)) = saturation_witness(&ms, &gamma) {
        let pos = (0..4)
            .find(|&i| m.to_array()[i] != moved.to_array()[i])
            .expect("one entry moved");
        report.fail(
            "M* is not [α,β]-saturated",
            Witness::new(
                Role::Counterexample,
                format!("{m} is in M* and {moved} differs inside a [α,β]-class, but is not"),
                vec![
                    member(Relation::MStar, m, true),
                    Fact::InCommutator {
                        pair: (m.to_array()[pos], moved.to_array()[pos]),
                        related: true,
                    },
                    member(Relation::MStar, moved, false),
                ],
            ),
        );
    }
    Ok(report)
}

/// With `γ = [α,β]` and a Kiss term `q`: (1) `M* = {m ∈ R : q(m) ≡ c mod γ}`;
/// (2) `[a q(m); b d] ∈ M*` for all `m ∈ R`; (3) `γ = {(a,b) : [a a; a b] ∈
/// M*}`; and `M*` computed in `A/γ` is the image of `M*`.
pub fn check_quotient(
    ctx: &Context,
    q: &Term,
    alpha: &Congruence,
    beta: &Congruence,
) -> Result<CheckReport> {
    let mut report = CheckReport::new(CheckName::Quotient, ctx, alpha, beta);
    report.term("q", q);
    note_scope(&mut report, ctx);
    if !require_kiss(&mut report, ctx, "q", q)? {
        return Ok(report);
    }
    set_stats(&mut report, ctx, alpha, beta)?;
    let gamma = ctx.commutator(alpha, beta)?;
    report.stat("commutator_blocks", gamma.block_count());

    if let Some(w) = fixed_point_mismatch(ctx, q, alpha, beta, &gamma)? {
        report.fail("item (1) fails", w);
    }
    let before = report.witnesses.len();
    moved_into_mstar(&mut report, ctx, q, alpha, beta)?;
    if report.witnesses.len() > before {
        report.reason.get_or_insert_with(|| "item (2) fails".into());
    }

    let ms = ctx.mstar(alpha, beta)?;
    let n = ctx.size();
    for a in 0..n {
        for b in 0..n {
            let m = Matrix2x2::new(a, a, a, b);
            let (in_gamma, in_ms) = (gamma.related(a, b), ms.contains(m));
            if in_gamma != in_ms {
                report.fail(
                    "item (3) fails",
                    Witness::new(
                        Role::Counterexample,
                        format!("({a},{b}) and {m} disagree"),
                        vec![
                            Fact::InCommutator {
                                pair: (a, b),
                                related: in_gamma,
                            },
                            member(Relation::MStar, m, in_ms),
                        ],
                    ),
                );
            }
        }
    }

    // the quotient by γ
    let quo = quotient(ctx.algebra(), &gamma)?;
    let (qa, qb) = (quo.bar_congruence(alpha), quo.bar_congruence(beta));
    let qctx = Context::new(quo.algebra.clone(), ctx.limits().clone());
    let qms = qctx.mstar(&qa, &qb)?;
    let bar = |m: Matrix2x2| Matrix2x2::new(quo.bar[m.a], quo.bar[m.b], quo.bar[m.c], quo.bar[m.d]);
    let image_set = TupleSet4::from_matrices(quo.algebra.size(), ms.iter().map(bar));
    if let Some(m) = ms.iter().find(|&m| !qms.contains(bar(m))) {
        report.fail(
            "M* in the quotient misses the image of M*",
            Witness::new(
                Role::Counterexample,
                format!("{m} is in M*, its image {} is not in M*(ᾱ,β̄)", bar(m)),
                vec![
                    member(Relation::MStar, m, true),
                    Fact::QuotientMember {
                        matrix: bar(m),
                        member: false,
                    },
                ],
            ),
        );
    } else if let Some(y) = qms.iter().find(|&y| !image_set.contains(y)) {
        let bars = &quo.bar;
        let block = |i: usize| (0..n).filter(move |&a| bars[a] == i);
        let mut facts = vec![Fact::QuotientMember {
            matrix: y,
            member: true,
        }];
        for a in block(y.a) {
            for b in block(y.b) {
                for c in block(y.c) {
                    for d in block(y.d) {
                        facts.push(member(Relation::MStar, Matrix2x2::new(a, b, c, d), false));
                    }
                }
            }
        }
        report.fail(
            "M* in the quotient exceeds the image of M*",
            Witness::new(
                Role::Counterexample,
                format!("{y} is in M*(ᾱ,β̄) but has no preimage in M*"),
                facts,
            ),
        );
    }
    report.stat("quotient_M*", qms.len());
    Ok(report)
}

/// With `z` a Kiss term, `R(α,β) = M*(α,β)`.
pub fn check_sdmeet(ctx: &Context, alpha: &Congruence, beta: &Congruence) -> Result<CheckReport> {
    let mut report = CheckReport::new(CheckName::Sdmeet, ctx, alpha, beta);
    note_scope(&mut report, ctx);
    let z = Term::z();
    report.term("q", &z);
    if !require_kiss(&mut report, ctx, "q", &z)? {
        return Ok(report);
    }
    set_stats(&mut report, ctx, alpha, beta)?;
    let ms = ctx.mstar(alpha, beta)?;
    if let Some(m) = ctx.r(alpha, beta).iter().find(|&m| !ms.contains(m)) {
        report.fail(
            "R ≠ M*",
            Witness::new(
                Role::Counterexample,
                format!("{m} is in R but not in M*"),
                vec![
                    member(Relation::R, m, true),
                    member(Relation::MStar, m, false),
                ],
            ),
        );
    }
    Ok(report)
}

/// With a Kiss term, the hypercommutator equals the commutator.
pub fn check_hyper(
    ctx: &Context,
    q: &Term,
    alpha: &Congruence,
    beta: &Congruence,
) -> Result<CheckReport> {
    let mut report = CheckReport::new(CheckName::Hyper, ctx, alpha, beta);
    report.term("q", q);
    note_scope(&mut report, ctx);
    if !require_kiss(&mut report, ctx, "q", q)? {
        return Ok(report);
    }
    set_stats(&mut report, ctx, alpha, beta)?;
    let gamma = ctx.commutator(alpha, beta)?;
    let hyper = ctx.hypercommutator(alpha, beta)?;
    report.stat("commutator_blocks", gamma.block_count());
    if gamma == hyper {
        return Ok(report);
    }
    // the hypercommutator always contains the commutator; a pair of the
    // difference shows the gap
    let (a, b) = hyper
        .pairs()
        .find(|&(a, b)| !gamma.related(a, b))
        .or_else(|| gamma.pairs().find(|&(a, b)| !hyper.related(a, b)))
        .expect("different congruences");
    report.fail(
        "hypercommutator ≠ commutator",
        Witness::new(
            Role::Counterexample,
            format!("({a},{b}) separates the hypercommutator {hyper} from {gamma}"),
            vec![
                Fact::Related {
                    congruence: hyper.clone(),
                    pair: (a, b),
                    related: hyper.related(a, b),
                },
                Fact::InCommutator {
                    pair: (a, b),
                    related: gamma.related(a, b),
                },
            ],
        ),
    );
    Ok(report)
}

/// Terms available to a check run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Terms {
    /// A ternary difference term.
    pub difference: Option<Term>,
    /// A Kiss term given directly.
    pub kiss: Option<Term>,
}

impl Terms {
    /// Lipparini's term from `p` when given, otherwise the direct Kiss term.
    pub fn lipparini_first(&self) -> Result<Option<Term>> {
        match &self.difference {
            Some(p) => Ok(Some(lipparini(p)?)),
            None => Ok(self.kiss.clone()),
        }
    }

    /// The direct Kiss term when given, otherwise Lipparini's term from `p`.
    pub fn kiss_first(&self) -> Result<Option<Term>> {
        match &self.kiss {
            Some(q) => Ok(Some(q.clone())),
            None => self.difference.as_ref().map(lipparini).transpose(),
        }
    }
}

fn needs_terms(
    check: CheckName,
    ctx: &Context,
    alpha: &Congruence,
    beta: &Congruence,
    what: &str,
) -> CheckReport {
    let mut report = CheckReport::new(check, ctx, alpha, beta);
    report.skip(format!("no {what} available"));
    report
}

/// Runs `check` with the terms it needs drawn from `terms`. Checks of the
/// zero-commutator lemmas use Lipparini's term when a difference term is
/// known; the rest prefer a directly given Kiss term.
pub fn run_check(
    ctx: &Context,
    check: CheckName,
    terms: &Terms,
    alpha: &Congruence,
    beta: &Congruence,
) -> Result<CheckReport> {
    let missing = |what| Ok(needs_terms(check, ctx, alpha, beta, what));
    match check {
        CheckName::Terms => check_terms(ctx, terms),
        CheckName::Crucial => match &terms.difference {
            Some(p) => check_crucial(ctx, p, alpha, beta),
            None => missing("difference term"),
        },
        CheckName::Main | CheckName::Lemma62 | CheckName::Indep => match terms.lipparini_first()? {
            Some(q) => match check {
                CheckName::Main => check_main(ctx, &q, alpha, beta),
                CheckName::Lemma62 => check_lemma62(ctx, &q, alpha, beta),
                _ => check_indep_lemma(ctx, &q, alpha, beta),
            },
            None => missing("Kiss term"),
        },
        CheckName::KissAgreement => match (&terms.kiss, &terms.difference) {
            (Some(q1), Some(p)) => check_kiss_agreement(ctx, q1, &lipparini(p)?, alpha, beta),
            _ => missing("pair of Kiss terms"),
        },
        CheckName::QminusGraph => match terms.kiss_first()? {
            Some(q) => check_qminus_graph(ctx, &q, terms.difference.as_ref(), alpha, beta),
            None => missing("Kiss term"),
        },
        CheckName::CorDelta | CheckName::Quotient | CheckName::Hyper => match terms.kiss_first()? {
            Some(q) => match check {
                CheckName::CorDelta => check_cor_delta(ctx, &q, alpha, beta),
                CheckName::Quotient => check_quotient(ctx, &q, alpha, beta),
                _ => check_hyper(ctx, &q, alpha, beta),
            },
            None => missing("Kiss term"),
        },
        CheckName::Arbitrary => check_arbitrary(ctx, alpha, beta),
        CheckName::Sdmeet => check_sdmeet(ctx, alpha, beta),
    }
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

    fn z2_p() -> Term {
        plus(plus(Term::x(), Term::y()), Term::z())
    }

    fn z2_q() -> Term {
        plus(plus(Term::x(), Term::y()), Term::w())
    }

    fn assert_pass(r: &CheckReport) {
        assert_eq!(r.verdict, Verdict::Pass, "{r:#?}");
    }

    #[test]
    fn crucial_examples() {
        let c = ctx(corpus::cyclic_group(2));
        let full = Congruence::full(2);
        assert_pass(&check_crucial(&c, &z2_p(), &full, &full).unwrap());

        let s = ctx(corpus::semilattice2());
        let full = Congruence::full(2);
        let r = check_crucial(&s, &Term::z(), &full, &full).unwrap();
        assert_eq!(r.verdict, Verdict::Skipped);
        let zero = Congruence::equality(2);
        assert_pass(&check_crucial(&s, &Term::z(), &zero, &full).unwrap());

        let z4 = ctx(corpus::cyclic_group(4));
        let theta = Congruence::parse_blocks(4, "0,2|1,3").unwrap();
        let full = Congruence::full(4);
        assert_pass(
            &check_crucial(&z4, &corpus::additive_difference_term(), &theta, &full).unwrap(),
        );
    }

    #[test]
    fn main_examples() {
        let c = ctx(corpus::cyclic_group(2));
        let full = Congruence::full(2);
        let r = check_main(&c, &z2_q(), &full, &full).unwrap();
        assert_pass(&r);
        assert_eq!(r.stats["R"], 16);
        assert_eq!(r.stats["M*"], 8);

        let z4 = ctx(corpus::cyclic_group(4));
        let theta = Congruence::parse_blocks(4, "0,2|1,3").unwrap();
        let q = lipparini(&corpus::additive_difference_term()).unwrap();
        assert_pass(&check_main(&z4, &q, &theta, &theta).unwrap());
    }

    #[test]
    fn main_detects_a_non_homomorphism() {
        // z is no Kiss term of Z2, so the check is skipped rather than failed
        let c = ctx(corpus::cyclic_group(2));
        let full = Congruence::full(2);
        let r = check_main(&c, &Term::z(), &full, &full).unwrap();
        assert_eq!(r.verdict, Verdict::Skipped);
        assert!(r.reason.unwrap().contains("not a Kiss term"));

        // the raw scan does find one for a group term on nonabelian S3
        let s3 = ctx(corpus::symmetric3());
        let full = Congruence::full(6);
        let r: Vec<Matrix2x2> = s3.r(&full, &full).iter().collect();
        let scan = hom_scan(&s3, &corpus::multiplicative_kiss_term(), &r).unwrap();
        let w = scan.failure.expect("S3 is not abelian");
        let report = CheckReport {
            witnesses: vec![w],
            verdict: Verdict::Fail,
            ..CheckReport::new(CheckName::Main, &s3, &full, &full)
        };
        assert!(report.revalidate(s3.algebra(), s3.limits()).unwrap());
    }

    #[test]
    fn sampling_kicks_in_above_the_cap() {
        let limits = Limits {
            hom_exhaustive_cap: 10,
            hom_samples: 500,
            ..Limits::default()
        };
        let c = Context::new(corpus::cyclic_group(2), limits);
        let full = Congruence::full(2);
        let r = check_main(&c, &z2_q(), &full, &full).unwrap();
        assert_eq!(r.verdict, Verdict::PassSampled);
        let again = check_main(&c, &z2_q(), &full, &full).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn lemma62_examples() {
        let s = ctx(corpus::semilattice2());
        let full = Congruence::full(2);
        let r = check_lemma62(&s, &Term::z(), &full, &full).unwrap();
        assert_pass(&r);
        assert_eq!(r.stats["lhs"], 0);
        assert_eq!(r.stats["rhs"], 0);
        let indep = r
            .witnesses
            .iter()
            .find(|w| w.note.contains("third variable"))
            .expect("independence witness");
        assert!(indep
            .facts
            .contains(&member(Relation::R, Matrix2x2::new(0, 0, 0, 0), true)));
        assert!(indep
            .facts
            .contains(&member(Relation::R, Matrix2x2::new(0, 0, 1, 0), true)));
        assert!(r.revalidate(s.algebra(), s.limits()).unwrap());

        let c = ctx(corpus::cyclic_group(2));
        assert_pass(
            &check_lemma62(&c, &z2_q(), &Congruence::full(2), &Congruence::full(2)).unwrap(),
        );
        let zero = Congruence::equality(2);
        assert_pass(&check_lemma62(&s, &Term::z(), &zero, &zero).unwrap());
    }

    #[test]
    fn indep_examples() {
        let c = ctx(corpus::cyclic_group(2));
        let full = Congruence::full(2);
        assert_pass(&check_indep_lemma(&c, &z2_q(), &full, &full).unwrap());
        let s = ctx(corpus::semilattice2());
        assert_eq!(
            check_indep_lemma(&s, &Term::z(), &full, &full)
                .unwrap()
                .verdict,
            Verdict::Skipped
        );
        let z4 = ctx(corpus::cyclic_group(4));
        let theta = Congruence::parse_blocks(4, "0,2|1,3").unwrap();
        let q = lipparini(&corpus::additive_difference_term()).unwrap();
        assert_pass(&check_indep_lemma(&z4, &q, &theta, &Congruence::full(4)).unwrap());
    }

    #[test]
    fn agreement_and_graphs() {
        let c = ctx(corpus::cyclic_group(2));
        let full = Congruence::full(2);
        let q2 = lipparini(&z2_p()).unwrap();
        assert_pass(&check_kiss_agreement(&c, &z2_q(), &q2, &full, &full).unwrap());
        let r = check_qminus_graph(&c, &z2_q(), Some(&z2_p()), &full, &full).unwrap();
        assert_pass(&r);
        assert_eq!(r.stats["p_graph_checked"], 1);
        assert_pass(&check_cor_delta(&c, &z2_q(), &full, &full).unwrap());

        let z4 = ctx(corpus::cyclic_group(4));
        let theta = Congruence::parse_blocks(4, "0,2|1,3").unwrap();
        let p = corpus::additive_difference_term();
        let r = check_qminus_graph(
            &z4,
            &corpus::additive_kiss_term(),
            Some(&p),
            &theta,
            &Congruence::full(4),
        )
        .unwrap();
        assert_pass(&r);
        assert_eq!(r.stats["p_graph_checked"], 1);
    }

    #[test]
    fn wrong_graph_term_fails_with_witness() {
        // q = x is not Kiss, so drive the graph comparison directly
        let c = ctx(corpus::cyclic_group(2));
        let full = Congruence::full(2);
        let w = graph_mismatch(&c, &full, &full, &Term::x(), |m| m.to_array().to_vec())
            .unwrap()
            .expect("x is not the graph function");
        let report = CheckReport {
            witnesses: vec![w],
            ..CheckReport::new(CheckName::CorDelta, &c, &full, &full)
        };
        assert!(report.revalidate(c.algebra(), c.limits()).unwrap());
    }

    #[test]
    fn arbitrary_and_quotient() {
        for alg in corpus::algebras() {
            let c = ctx(alg);
            for (a, b) in c.congruence_pairs().unwrap() {
                assert_pass(&check_arbitrary(&c, &a, &b).unwrap());
            }
        }
        let s3 = ctx(corpus::symmetric3());
        let full = Congruence::full(6);
        let r = check_quotient(&s3, &corpus::multiplicative_kiss_term(), &full, &full).unwrap();
        assert_pass(&r);
        assert_eq!(r.stats["commutator_blocks"], 2);
        let s = ctx(corpus::semilattice2());
        let full = Congruence::full(2);
        assert_pass(&check_quotient(&s, &Term::z(), &full, &full).unwrap());
    }

    #[test]
    fn sdmeet_examples() {
        for alg in [corpus::semilattice2(), corpus::lattice2()] {
            let c = ctx(alg);
            for (a, b) in c.congruence_pairs().unwrap() {
                assert_pass(&check_sdmeet(&c, &a, &b).unwrap());
            }
        }
        let c = ctx(corpus::cyclic_group(2));
        let full = Congruence::full(2);
        assert_eq!(
            check_sdmeet(&c, &full, &full).unwrap().verdict,
            Verdict::Skipped
        );
    }

    #[test]
    fn hyper_on_groups() {
        let c = ctx(corpus::symmetric3());
        for (a, b) in c.congruence_pairs().unwrap() {
            assert_pass(&check_hyper(&c, &corpus::multiplicative_kiss_term(), &a, &b).unwrap());
        }
    }

    #[test]
    fn term_claims() {
        let c = ctx(corpus::cyclic_group(2));
        let good = Terms {
            difference: Some(z2_p()),
            kiss: Some(z2_q()),
        };
        let r = check_terms(&c, &good).unwrap();
        assert_pass(&r);
        assert_eq!(r.terms.len(), 4);

        for bad in [Term::x(), Term::z()] {
            let terms = Terms {
                difference: Some(bad.clone()),
                kiss: None,
            };
            let r = check_terms(&c, &terms).unwrap();
            assert_eq!(r.verdict, Verdict::Fail, "{bad}");
            assert!(!r.witnesses.is_empty());
            assert!(r.revalidate(c.algebra(), c.limits()).unwrap());
        }
        let terms = Terms {
            difference: None,
            kiss: Some(Term::z()),
        };
        let r = check_terms(&c, &terms).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.revalidate(c.algebra(), c.limits()).unwrap());
    }

    #[test]
    fn tampered_witness_does_not_revalidate() {
        let c = ctx(corpus::cyclic_group(2));
        let terms = Terms {
            difference: Some(Term::z()),
            kiss: None,
        };
        let mut r = check_terms(&c, &terms).unwrap();
        for f in r.witnesses[0].facts.iter_mut() {
            if let Fact::Evaluates { value, .. } = f {
                *value = 1 - *value;
            }
        }
        assert!(!r.revalidate(c.algebra(), c.limits()).unwrap());
    }

    #[test]
    fn check_names_round_trip() {
        for c in CheckName::ALL {
            assert_eq!(c.as_str().parse::<CheckName>().unwrap(), c);
        }
        assert_eq!(
            "kiss-agreement".parse::<CheckName>().unwrap(),
            CheckName::KissAgreement
        );
        assert!("nope".parse::<CheckName>().is_err());
    }
}
