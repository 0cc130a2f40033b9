//! The small algebras used throughout the tests and the bundled corpus,
//! with terms known to be difference and Kiss terms for their varieties.

use crate::algebra::FiniteAlgebra;
use crate::term::Term;

/// `({0,1}, ^)`.
pub fn semilattice2() -> FiniteAlgebra {
    FiniteAlgebra::from_fns(
        "SL2",
        2,
        vec![("^", 2, Box::new(|a: &[usize]| a[0].min(a[1])))],
    )
    .expect("valid table")
}

/// `({0,1}, ^, v)`.
pub fn lattice2() -> FiniteAlgebra {
    FiniteAlgebra::from_fns(
        "L2",
        2,
        vec![
            ("^", 2, Box::new(|a: &[usize]| a[0].min(a[1]))),
            ("v", 2, Box::new(|a: &[usize]| a[0].max(a[1]))),
        ],
    )
    .expect("valid table")
}

/// Two-element set with the identity map as its only operation.
pub fn set2() -> FiniteAlgebra {
    FiniteAlgebra::from_fns("Set2", 2, vec![("id", 1, Box::new(|a: &[usize]| a[0]))])
        .expect("valid table")
}

/// `(Z_n, +, -)`.
pub fn cyclic_group(n: usize) -> FiniteAlgebra {
    FiniteAlgebra::from_fns(
        format!("Z{n}"),
        n,
        vec![
            ("+", 2, Box::new(move |a: &[usize]| (a[0] + a[1]) % n)),
            ("-", 1, Box::new(move |a: &[usize]| (n - a[0]) % n)),
        ],
    )
    .expect("valid table")
}

/// Permutations of {0,1,2} in lexicographic order of their one-line form:
/// 0=012, 1=021, 2=102, 3=120, 4=201, 5=210.
pub const S3_PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn s3_index(p: [usize; 3]) -> usize {
    S3_PERMUTATIONS
        .iter()
        .position(|&q| q == p)
        .expect("a permutation")
}

/// `(S_3, *, inv)` with `(s * t)(i) = s(t(i))`. The alternating group is
/// `{0, 3, 4}`.
pub fn symmetric3() -> FiniteAlgebra {
    let compose = |a: &[usize]| {
        let (s, t) = (S3_PERMUTATIONS[a[0]], S3_PERMUTATIONS[a[1]]);
        s3_index([s[t[0]], s[t[1]], s[t[2]]])
    };
    let inverse = |a: &[usize]| {
        let s = S3_PERMUTATIONS[a[0]];
        let mut inv = [0; 3];
        for (i, &si) in s.iter().enumerate() {
            inv[si] = i;
        }
        s3_index(inv)
    };
    FiniteAlgebra::from_fns(
        "S3",
        6,
        vec![("*", 2, Box::new(compose)), ("inv", 1, Box::new(inverse))],
    )
    .expect("valid table")
}

/// The seven corpus algebras.
pub fn algebras() -> Vec<FiniteAlgebra> {
    vec![
        semilattice2(),
        lattice2(),
        set2(),
        cyclic_group(2),
        cyclic_group(3),
        cyclic_group(4),
        symmetric3(),
    ]
}

/// `x - y + z` in the additive groups.
pub fn additive_difference_term() -> Term {
    Term::apply(
        "+",
        vec![
            Term::apply("+", vec![Term::x(), Term::apply("-", vec![Term::y()])]),
            Term::z(),
        ],
    )
}

/// `x - y + w`, a Kiss term for abelian groups that ignores its third variable.
pub fn additive_kiss_term() -> Term {
    Term::apply(
        "+",
        vec![
            Term::apply("+", vec![Term::x(), Term::apply("-", vec![Term::y()])]),
            Term::w(),
        ],
    )
}

/// `x * y^-1 * z`.
pub fn multiplicative_difference_term() -> Term {
    Term::apply(
        "*",
        vec![
            Term::apply("*", vec![Term::x(), Term::apply("inv", vec![Term::y()])]),
            Term::z(),
        ],
    )
}

/// `x * y^-1 * w`.
pub fn multiplicative_kiss_term() -> Term {
    Term::apply(
        "*",
        vec![
            Term::apply("*", vec![Term::x(), Term::apply("inv", vec![Term::y()])]),
            Term::w(),
        ],
    )
}

/// Corpus algebra with its known terms and tags.
#[derive(Clone, Debug)]
pub struct KnownAlgebra {
    pub algebra: FiniteAlgebra,
    pub tags: Vec<&'static str>,
    /// A ternary difference term for the variety, when one exists.
    pub difference_term: Option<Term>,
    /// A Kiss term given directly (not through Lipparini's construction).
    pub kiss_term: Option<Term>,
}

pub fn known() -> Vec<KnownAlgebra> {
    let sd = |algebra| KnownAlgebra {
        algebra,
        tags: vec!["sd-meet"],
        difference_term: Some(Term::z()),
        kiss_term: Some(Term::z()),
    };
    let additive = |n| KnownAlgebra {
        algebra: cyclic_group(n),
        tags: vec!["group", "abelian"],
        difference_term: Some(additive_difference_term()),
        kiss_term: Some(additive_kiss_term()),
    };
    vec![
        sd(semilattice2()),
        sd(lattice2()),
        KnownAlgebra {
            algebra: set2(),
            tags: vec!["set"],
            difference_term: None,
            kiss_term: None,
        },
        additive(2),
        additive(3),
        additive(4),
        KnownAlgebra {
            algebra: symmetric3(),
            tags: vec!["group"],
            difference_term: Some(multiplicative_difference_term()),
            kiss_term: Some(multiplicative_kiss_term()),
        },
    ]
}
