//! Terms over an algebra's operation symbols, evaluation, tabulation and
//! identity checking.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{checked_pow, decode_into, Algebra, FiniteAlgebra};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(usize),
    Apply(String, Vec<Term>),
}

impl Term {
    pub fn var(i: usize) -> Term {
        Term::Var(i)
    }

    pub fn apply(symbol: impl Into<String>, children: Vec<Term>) -> Term {
        Term::Apply(symbol.into(), children)
    }

    pub fn x() -> Term {
        Term::Var(0)
    }

    pub fn y() -> Term {
        Term::Var(1)
    }

    pub fn z() -> Term {
        Term::Var(2)
    }

    pub fn w() -> Term {
        Term::Var(3)
    }

    /// Number of variables needed to evaluate the term: one past the
    /// largest variable index, or 0 for ground terms.
    pub fn var_bound(&self) -> usize {
        match self {
            Term::Var(i) => i + 1,
            Term::Apply(_, children) => children.iter().map(Term::var_bound).max().unwrap_or(0),
        }
    }

    /// Variables have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::Apply(_, children) => 1 + children.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn count_symbol(&self, symbol: &str) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::Apply(s, children) => {
                usize::from(s == symbol)
                    + children
                        .iter()
                        .map(|c| c.count_symbol(symbol))
                        .sum::<usize>()
            }
        }
    }

    /// Replaces variable `i` by `args[i]`.
    pub fn substitute(&self, args: &[Term]) -> Result<Term> {
        match self {
            Term::Var(i) => args.get(*i).cloned().ok_or(Error::VariableOutOfRange {
                index: *i,
                len: args.len(),
            }),
            Term::Apply(s, children) => Ok(Term::Apply(
                s.clone(),
                children
                    .iter()
                    .map(|c| c.substitute(args))
                    .collect::<Result<Vec<_>>>()?,
            )),
        }
    }

    /// Substitutes variables by variables: `self(x_{map[0]}, x_{map[1]}, ..)`.
    pub fn rename(&self, map: &[usize]) -> Result<Term> {
        let args: Vec<Term> = map.iter().map(|&i| Term::Var(i)).collect();
        self.substitute(&args)
    }

    /// JSON s-expression form: `["x", 0]` or `["ap", "+", child, ..]`.
    pub fn to_json(&self) -> Value {
        match self {
            Term::Var(i) => json!(["x", i]),
            Term::Apply(s, children) => {
                let mut items = vec![json!("ap"), json!(s)];
                items.extend(children.iter().map(Term::to_json));
                Value::Array(items)
            }
        }
    }

    pub fn from_json(value: &Value) -> Result<Term> {
        let bad = || Error::Parse(format!("not a term: {value}"));
        let items = value.as_array().ok_or_else(bad)?;
        match items.first().and_then(Value::as_str) {
            Some("x") if items.len() == 2 => {
                let i = items[1].as_u64().ok_or_else(bad)?;
                Ok(Term::Var(i as usize))
            }
            Some("ap") if items.len() >= 2 => {
                let symbol = items[1].as_str().ok_or_else(bad)?;
                let children = items[2..]
                    .iter()
                    .map(Term::from_json)
                    .collect::<Result<Vec<_>>>()?;
                Ok(Term::Apply(symbol.to_string(), children))
            }
            _ => Err(bad()),
        }
    }

    pub fn parse_json(text: &str) -> Result<Term> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Term::from_json(&value)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => match i {
                0 => f.write_str("x"),
                1 => f.write_str("y"),
                2 => f.write_str("z"),
                3 => f.write_str("w"),
                _ => write!(f, "x{i}"),
            },
            Term::Apply(s, children) => {
                f.write_str(s)?;
                f.write_str("(")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Term {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        Term::from_json(&value).map_err(serde::de::Error::custom)
    }
}

fn resolve(alg: &FiniteAlgebra, symbol: &str, found: usize) -> Result<usize> {
    let op = alg
        .op_index(symbol)
        .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))?;
    let expected = alg.arity(op);
    if expected != found {
        return Err(Error::ArityMismatch {
            symbol: symbol.to_string(),
            expected,
            found,
        });
    }
    Ok(op)
}

/// Value of `t` under `env`, where variable `i` takes `env[i]`.
pub fn evaluate_term(alg: &FiniteAlgebra, t: &Term, env: &[usize]) -> Result<usize> {
    match t {
        Term::Var(i) => {
            let v = *env.get(*i).ok_or(Error::VariableOutOfRange {
                index: *i,
                len: env.len(),
            })?;
            alg.check_element(v)?;
            Ok(v)
        }
        Term::Apply(symbol, children) => {
            let op = resolve(alg, symbol, children.len())?;
            let args = children
                .iter()
                .map(|c| evaluate_term(alg, c, env))
                .collect::<Result<Vec<_>>>()?;
            Ok(alg.apply(op, &args))
        }
    }
}

/// The term function `A^nvars -> A` as a lexicographic table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TermTable {
    n: usize,
    nvars: usize,
    values: Vec<usize>,
}

impl TermTable {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn into_values(self) -> Vec<usize> {
        self.values
    }

    pub fn index(&self, env: &[usize]) -> usize {
        env.iter().fold(0, |acc, &a| acc * self.n + a)
    }

    pub fn get(&self, env: &[usize]) -> usize {
        self.values[self.index(env)]
    }

    pub fn get4(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        self.values[((a * self.n + b) * self.n + c) * self.n + d]
    }

    pub fn get3(&self, a: usize, b: usize, c: usize) -> usize {
        self.values[(a * self.n + b) * self.n + c]
    }
}

/// Tabulates `t` over all of `A^nvars`, bottom-up, one whole table per node.
pub fn tabulate(alg: &FiniteAlgebra, t: &Term, nvars: usize) -> Result<TermTable> {
    let n = alg.size();
    let len = checked_pow(n, nvars)
        .filter(|&len| len <= 50_000_000)
        .ok_or_else(|| Error::bound("term table", (n as u128).pow(nvars as u32), 50_000_000))?;
    let values = tabulate_node(alg, t, nvars, len)?;
    Ok(TermTable { n, nvars, values })
}

fn tabulate_node(alg: &FiniteAlgebra, t: &Term, nvars: usize, len: usize) -> Result<Vec<usize>> {
    let n = alg.size();
    match t {
        Term::Var(i) => {
            if *i >= nvars {
                return Err(Error::VariableOutOfRange {
                    index: *i,
                    len: nvars,
                });
            }
            let stride = checked_pow(n, nvars - 1 - i).expect("within table size");
            Ok((0..len).map(|e| (e / stride) % n).collect())
        }
        Term::Apply(symbol, children) => {
            let op = resolve(alg, symbol, children.len())?;
            let tables = children
                .iter()
                .map(|c| tabulate_node(alg, c, nvars, len))
                .collect::<Result<Vec<_>>>()?;
            let mut args = vec![0; children.len()];
            Ok((0..len)
                .map(|e| {
                    for (a, table) in args.iter_mut().zip(&tables) {
                        *a = table[e];
                    }
                    alg.apply(op, &args)
                })
                .collect())
        }
    }
}

/// Result of checking `lhs ≈ rhs` on every environment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum IdentityOutcome {
    Holds,
    /// The lexicographically first environment where the sides differ.
    Fails {
        env: Vec<usize>,
        lhs: usize,
        rhs: usize,
    },
}

impl IdentityOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, IdentityOutcome::Holds)
    }
}

/// Brute force over all `n^nvars` environments.
pub fn check_identity(
    alg: &FiniteAlgebra,
    lhs: &Term,
    rhs: &Term,
    nvars: usize,
) -> Result<IdentityOutcome> {
    let l = tabulate(alg, lhs, nvars)?;
    let r = tabulate(alg, rhs, nvars)?;
    match l.values.iter().zip(&r.values).position(|(a, b)| a != b) {
        None => Ok(IdentityOutcome::Holds),
        Some(idx) => {
            let mut env = vec![0; nvars];
            decode_into(idx, alg.size(), &mut env);
            Ok(IdentityOutcome::Fails {
                env,
                lhs: l.values[idx],
                rhs: r.values[idx],
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plus(a: Term, b: Term) -> Term {
        Term::apply("+", vec![a, b])
    }

    fn meet(a: Term, b: Term) -> Term {
        Term::apply("^", vec![a, b])
    }

    #[test]
    fn evaluate_examples() {
        let z2 = corpus::cyclic_group(2);
        let t = plus(plus(Term::x(), Term::y()), Term::z());
        assert_eq!(evaluate_term(&z2, &t, &[1, 1, 0]).unwrap(), 0);
        assert_eq!(evaluate_term(&z2, &Term::x(), &[1, 0]).unwrap(), 1);
        let sl = corpus::semilattice2();
        assert_eq!(
            evaluate_term(&sl, &meet(Term::x(), Term::y()), &[1, 0]).unwrap(),
            0
        );
    }

    #[test]
    fn evaluate_errors() {
        let z2 = corpus::cyclic_group(2);
        assert_eq!(
            evaluate_term(&z2, &Term::apply("*", vec![Term::x()]), &[0]),
            Err(Error::UnknownSymbol("*".into()))
        );
        assert!(matches!(
            evaluate_term(&z2, &Term::apply("+", vec![Term::x()]), &[0]),
            Err(Error::ArityMismatch {
                expected: 2,
                found: 1,
                ..
            })
        ));
        assert_eq!(
            evaluate_term(&z2, &Term::z(), &[0, 1]),
            Err(Error::VariableOutOfRange { index: 2, len: 2 })
        );
    }

    #[test]
    fn identity_examples() {
        let z2 = corpus::cyclic_group(2);
        let p = plus(plus(Term::x(), Term::y()), Term::z());
        let pxxy = p.rename(&[0, 0, 1]).unwrap();
        assert!(check_identity(&z2, &pxxy, &Term::y(), 2).unwrap().holds());

        let sl = corpus::semilattice2();
        assert!(
            check_identity(&sl, &Term::z().rename(&[0, 0, 1]).unwrap(), &Term::y(), 2)
                .unwrap()
                .holds()
        );
        let p = meet(Term::x(), Term::z());
        assert_eq!(
            check_identity(&sl, &p.rename(&[0, 0, 1]).unwrap(), &Term::y(), 2).unwrap(),
            IdentityOutcome::Fails {
                env: vec![0, 1],
                lhs: 0,
                rhs: 1
            }
        );
    }

    #[test]
    fn json_form() {
        let t = plus(Term::x(), Term::apply("-", vec![Term::var(1)]));
        let v = t.to_json();
        assert_eq!(v.to_string(), r#"["ap","+",["x",0],["ap","-",["x",1]]]"#);
        assert_eq!(Term::from_json(&v).unwrap(), t);
        assert!(Term::parse_json(r#"["y",0]"#).is_err());
        assert_eq!(t.to_string(), "+(x,-(y))");
    }

    #[test]
    fn tabulate_matches_evaluate_on_random_points() {
        // independent spot check of the tabulating enumerator
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s3 = corpus::symmetric3();
        let t = Term::apply(
            "*",
            vec![
                Term::apply("*", vec![Term::x(), Term::apply("inv", vec![Term::y()])]),
                Term::apply("*", vec![Term::z(), Term::w()]),
            ],
        );
        let table = tabulate(&s3, &t, 4).unwrap();
        for _ in 0..500 {
            let env: Vec<usize> = (0..4).map(|_| rng.gen_range(0..6)).collect();
            assert_eq!(table.get(&env), evaluate_term(&s3, &t, &env).unwrap());
        }
    }

    #[test]
    fn check_identity_agrees_with_random_spot_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let z4 = corpus::cyclic_group(4);
        let l = plus(Term::x(), plus(Term::y(), Term::y()));
        let r = plus(
            Term::x(),
            Term::apply("-", vec![plus(Term::y(), Term::y())]),
        );
        // y+y = -(y+y) in Z4
        assert!(check_identity(&z4, &l, &r, 2).unwrap().holds());
        for _ in 0..200 {
            let env = [rng.gen_range(0..4), rng.gen_range(0..4)];
            assert_eq!(
                evaluate_term(&z4, &l, &env).unwrap(),
                evaluate_term(&z4, &r, &env).unwrap()
            );
        }
    }
}
