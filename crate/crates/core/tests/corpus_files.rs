use std::path::{Path, PathBuf};

use clab_core::corpus;
use clab_core::special::{verify_maltsev_tree, MaltsevTree, TermFamily};
use clab_core::suite::{read_file, run_suite, RunOptions, SuiteConfig};
use clab_core::{FiniteAlgebra, Limits, Term};

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn load(rel: &str) -> String {
    read_file(&corpus_dir().join(rel)).unwrap()
}

#[test]
fn algebra_files_match_builders() {
    let pairs = [
        ("sl2", corpus::semilattice2()),
        ("l2", corpus::lattice2()),
        ("set2", corpus::set2()),
        ("z2", corpus::cyclic_group(2)),
        ("z3", corpus::cyclic_group(3)),
        ("z4", corpus::cyclic_group(4)),
        ("s3", corpus::symmetric3()),
    ];
    for (file, built) in pairs {
        let loaded = FiniteAlgebra::from_json(&load(&format!("algebras/{file}.json"))).unwrap();
        assert_eq!(loaded, built, "{file}");
    }
}

#[test]
fn term_files_match_builders() {
    let parse = |f: &str| Term::parse_json(&load(&format!("terms/{f}.json"))).unwrap();
    assert_eq!(
        parse("additive_difference"),
        corpus::additive_difference_term()
    );
    assert_eq!(parse("additive_kiss"), corpus::additive_kiss_term());
    assert_eq!(
        parse("multiplicative_difference"),
        corpus::multiplicative_difference_term()
    );
    assert_eq!(
        parse("multiplicative_kiss"),
        corpus::multiplicative_kiss_term()
    );
    assert_eq!(parse("projection_z"), Term::z());
}

#[test]
fn tree_files_verify() {
    let z2 = corpus::cyclic_group(2);
    for name in ["single", "five"] {
        let tree = MaltsevTree::from_json(&load(&format!("trees/{name}.json"))).unwrap();
        let fam = TermFamily::from_json(&load(&format!("trees/{name}_z2_terms.json"))).unwrap();
        let v = verify_maltsev_tree(&z2, &tree, &fam).unwrap();
        assert!(v.holds, "{name}: {:?}", v.failed_axioms());
    }
}

#[test]
fn full_suite_passes() {
    let config = SuiteConfig::load(&corpus_dir().join("suite.json")).unwrap();
    assert_eq!(config.entries.len(), 7);
    let out = run_suite(
        &config,
        &Limits::default(),
        &RunOptions {
            jobs: 4,
            timing: false,
        },
    );
    assert!(out.errors.is_empty(), "{:?}", out.errors);
    assert_eq!(out.failures(), 0, "{}", out.summary_table());
    assert_eq!(out.exit_code(), 0);
}

#[test]
fn wrong_term_fails_with_witness() {
    let dir = corpus_dir();
    let text = r#"[{"algebra": "algebras/z2.json", "terms": {"difference": "terms/wrong_first_projection.json"},
                   "checks": ["terms"], "congruences": "all"}]"#;
    let config = SuiteConfig::parse(text, &dir).unwrap();
    let out = run_suite(&config, &Limits::default(), &RunOptions::default());
    assert_eq!(out.exit_code(), 1);
    let failed: Vec<_> = out.reports.iter().filter(|r| r.failed()).collect();
    assert!(!failed.is_empty());
    let alg = &config.entries[0].algebra;
    for r in failed {
        assert!(!r.witnesses.is_empty());
        assert!(r.revalidate(alg, &Limits::default()).unwrap());
    }
}
