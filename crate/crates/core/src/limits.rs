/// Resource bounds shared by every computation in the crate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest universe a power `A^k` may have.
    pub max_power: u128,
    /// Largest algebra whose congruence lattice is enumerated.
    pub max_lattice_size: usize,
    /// Largest number of argument tuples scanned exhaustively by the
    /// homomorphism check before it switches to sampling.
    pub hom_exhaustive_cap: u128,
    /// Number of samples drawn when the homomorphism scan is sampled.
    pub hom_samples: usize,
    /// Seed of the sampling generator.
    pub seed: u64,
    /// Largest number of semantically distinct terms kept by term search.
    pub max_search_terms: usize,
    /// Also check term conditions on quotients and subalgebras.
    pub variety_level: bool,
    /// Largest subalgebra examined when `variety_level` is set.
    pub max_subalgebra_size: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_power: 10_000_000,
            max_lattice_size: 8,
            hom_exhaustive_cap: 1_000_000,
            hom_samples: 100_000,
            seed: 0x5eed_c0de,
            max_search_terms: 200_000,
            variety_level: false,
            max_subalgebra_size: 8,
        }
    }
}
