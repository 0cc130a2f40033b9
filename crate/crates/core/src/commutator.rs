//! The term-condition commutator computed as the union of the chain
//! `δ_0 ⊆ δ_1 ⊆ ...`, the zero test, the hypercommutator and saturation.

use serde::Serialize;

use crate::algebra::FiniteAlgebra;
use crate::congruence::{cg, Congruence};
use crate::error::Result;
use crate::two_dim::{m_rel, mstar, Matrix2x2, TupleSet4};

/// One round of the iteration: the pair set `X_{i+1}` and `δ_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stage {
    #[serde(rename = "X")]
    pub x: Vec<(usize, usize)>,
    pub delta: Congruence,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommutatorTrace {
    pub alpha: Congruence,
    pub beta: Congruence,
    /// Every computed round; the last one repeats the previous `δ`.
    pub stages: Vec<Stage>,
    #[serde(rename = "commutator")]
    pub result: Congruence,
}

impl CommutatorTrace {
    /// `δ_0, δ_1, ...` including the initial equality relation.
    pub fn deltas(&self) -> Vec<Congruence> {
        std::iter::once(Congruence::equality(self.result.size()))
            .chain(self.stages.iter().map(|s| s.delta.clone()))
            .collect()
    }

    pub fn xsets(&self) -> Vec<&[(usize, usize)]> {
        self.stages.iter().map(|s| s.x.as_slice()).collect()
    }
}

/// Bottom rows of the matrices in `set`, grouped by their top row.
fn bottoms_by_top(set: &TupleSet4) -> Vec<Vec<(usize, usize)>> {
    let n = set.universe();
    let mut out = vec![Vec::new(); n * n];
    for m in set.iter() {
        out[m.a * n + m.c].push(m.bottom_row());
    }
    out
}

/// Least `δ` such that a top row in `δ` forces the bottom row into `δ`,
/// for every matrix of `set`. Each round closes with [`cg`].
pub fn implication_fixpoint(
    alg: &FiniteAlgebra,
    alpha: &Congruence,
    beta: &Congruence,
    set: &TupleSet4,
) -> Result<CommutatorTrace> {
    let n = alg.size();
    let index = bottoms_by_top(set);
    let mut delta = Congruence::equality(n);
    let mut stages = Vec::new();
    loop {
        let mut x: Vec<(usize, usize)> = delta
            .pairs()
            .flat_map(|(p, q)| index[p * n + q].iter().copied())
            .collect();
        x.sort_unstable();
        x.dedup();
        let next = cg(alg, x.iter().copied().chain(delta.pairs()))?;
        let done = next == delta;
        stages.push(Stage {
            x,
            delta: next.clone(),
        });
        delta = next;
        if done {
            break;
        }
    }
    Ok(CommutatorTrace {
        alpha: alpha.clone(),
        beta: beta.clone(),
        stages,
        result: delta,
    })
}

/// `[α,β]` from an already computed `M(α,β)`.
pub fn tc_commutator_from_m(
    alg: &FiniteAlgebra,
    alpha: &Congruence,
    beta: &Congruence,
    m: &TupleSet4,
) -> Result<CommutatorTrace> {
    implication_fixpoint(alg, alpha, beta, m)
}

/// `δ_0 = 0`; `X_{i+1}` collects the bottom rows of matrices in `M(α,β)`
/// whose top row lies in `δ_i`; `δ_{i+1} = Cg(X_{i+1} ∪ δ_i)`.
pub fn tc_commutator(
    alg: &FiniteAlgebra,
    alpha: &Congruence,
    beta: &Congruence,
    max_power: u128,
) -> Result<CommutatorTrace> {
    let m = m_rel(alg, alpha, beta, max_power)?;
    tc_commutator_from_m(alg, alpha, beta, &m)
}

/// First matrix of `M(α,β)` with equal bottom entries and distinct top
/// entries, if any.
pub fn zero_test_witness(m: &TupleSet4) -> Option<Matrix2x2> {
    m.iter().find(|m| m.b == m.d && m.a != m.c)
}

/// `[α,β] = 0` tested directly: in every matrix of `M(α,β)`, `b = d`
/// implies `a = c`.
pub fn commutator_is_zero(
    alg: &FiniteAlgebra,
    alpha: &Congruence,
    beta: &Congruence,
    max_power: u128,
) -> Result<bool> {
    let m = m_rel(alg, alpha, beta, max_power)?;
    Ok(zero_test_witness(&m).is_none())
}

pub fn hypercommutator_from_mstar(
    alg: &FiniteAlgebra,
    alpha: &Congruence,
    beta: &Congruence,
    mstar: &TupleSet4,
) -> Result<CommutatorTrace> {
    implication_fixpoint(alg, alpha, beta, mstar)
}

/// Least `δ` with `(a,c) ∈ δ ⇒ (b,d) ∈ δ` for all `[a c; b d] ∈ M*(α,β)`.
pub fn hypercommutator(
    alg: &FiniteAlgebra,
    alpha: &Congruence,
    beta: &Congruence,
    max_power: u128,
) -> Result<Congruence> {
    let ms = mstar(alg, alpha, beta, max_power)?;
    Ok(hypercommutator_from_mstar(alg, alpha, beta, &ms)?.result)
}

/// First member of `s` that leaves `s` when one entry moves inside its
/// `θ`-class, together with the moved matrix.
pub fn saturation_witness(s: &TupleSet4, theta: &Congruence) -> Option<(Matrix2x2, Matrix2x2)> {
    let n = s.universe();
    for m in s.iter() {
        let entries = m.to_array();
        for pos in 0..4 {
            for x in 0..n {
                if x == entries[pos] || !theta.related(x, entries[pos]) {
                    continue;
                }
                let mut moved = entries;
                moved[pos] = x;
                let moved = Matrix2x2::from(moved);
                if !s.contains(moved) {
                    return Some((m, moved));
                }
            }
        }
    }
    None
}

/// Whether `s` is a union of `θ^4`-classes. Single-entry moves suffice
/// since every class move is a sequence of them.
pub fn is_saturated(s: &TupleSet4, theta: &Congruence) -> bool {
    saturation_witness(s, theta).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    const BOUND: u128 = 10_000_000;

    #[test]
    fn zero_left_argument() {
        for alg in corpus::algebras() {
            let n = alg.size();
            let zero = Congruence::equality(n);
            let full = Congruence::full(n);
            let t = tc_commutator(&alg, &zero, &full, BOUND).unwrap();
            assert!(t.result.is_equality(), "{}", alg.name());
            assert!(commutator_is_zero(&alg, &zero, &full, BOUND).unwrap());
            assert!(hypercommutator(&alg, &zero, &full, BOUND)
                .unwrap()
                .is_equality());
        }
    }

    #[test]
    fn semilattice_is_not_abelian() {
        let sl = corpus::semilattice2();
        let full = Congruence::full(2);
        let t = tc_commutator(&sl, &full, &full, BOUND).unwrap();
        assert!(t.result.is_full());
        assert!(t.stages[0].x.contains(&(0, 1)));
        assert!(!commutator_is_zero(&sl, &full, &full, BOUND).unwrap());
        assert!(hypercommutator(&sl, &full, &full, BOUND).unwrap().is_full());
    }

    #[test]
    fn group_commutators() {
        let s3 = corpus::symmetric3();
        let full = Congruence::full(6);
        let t = tc_commutator(&s3, &full, &full, BOUND).unwrap();
        assert_eq!(
            t.result,
            Congruence::parse_blocks(6, "0,3,4|1,2,5").unwrap()
        );
        for k in [2, 3, 4] {
            let z = corpus::cyclic_group(k);
            let full = Congruence::full(k);
            assert!(tc_commutator(&z, &full, &full, BOUND)
                .unwrap()
                .result
                .is_equality());
            assert!(commutator_is_zero(&z, &full, &full, BOUND).unwrap());
        }
        let z2 = corpus::cyclic_group(2);
        let full = Congruence::full(2);
        assert!(hypercommutator(&z2, &full, &full, BOUND)
            .unwrap()
            .is_equality());
    }

    #[test]
    fn trace_is_increasing() {
        let s3 = corpus::symmetric3();
        let full = Congruence::full(6);
        let t = tc_commutator(&s3, &full, &full, BOUND).unwrap();
        let deltas = t.deltas();
        assert!(deltas.windows(2).all(|w| w[0].is_below(&w[1])));
        assert_eq!(deltas.last().unwrap(), &t.result);
        assert!(deltas[0].is_equality());
        assert!(t
            .stages
            .iter()
            .all(|s| s.x.iter().all(|&(a, b)| t.result.related(a, b))));
    }

    #[test]
    fn saturation_examples() {
        let n = 3;
        let some = TupleSet4::from_matrices(n, [Matrix2x2::new(0, 1, 2, 0)]);
        assert!(is_saturated(&some, &Congruence::equality(n)));
        assert!(is_saturated(&TupleSet4::full(n), &Congruence::full(n)));
        assert!(!is_saturated(&some, &Congruence::full(n)));

        let s3 = corpus::symmetric3();
        let full = Congruence::full(6);
        let gamma = tc_commutator(&s3, &full, &full, BOUND).unwrap().result;
        let ms = mstar(&s3, &full, &full, BOUND).unwrap();
        assert!(is_saturated(&ms, &gamma));
    }
}
