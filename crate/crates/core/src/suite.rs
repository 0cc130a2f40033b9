//! Suite configuration files and the runner that fans checks out over
//! `(algebra, α, β)` jobs.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::FiniteAlgebra;
use crate::congruence::Congruence;
use crate::context::Context;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::term::Term;
use crate::theorems::{run_check, CheckName, CheckReport, Terms, Verdict};

/// Reads a file, mapping failures to [`Error::Io`].
pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// A congruence given as a lattice index or in block notation.
pub fn parse_congruence(ctx: &Context, text: &str) -> Result<Congruence> {
    let text = text.trim();
    if let Ok(i) = text.parse::<usize>() {
        let cons = ctx.congruences()?;
        return cons.get(i).cloned().ok_or_else(|| {
            Error::Parse(format!(
                "congruence index {i} out of range (lattice has {})",
                cons.len()
            ))
        });
    }
    let theta = Congruence::parse_blocks(ctx.size(), text)?;
    if let Some(v) = crate::congruence::is_congruence(ctx.algebra(), &theta)? {
        return Err(Error::NotACongruence(format!("{theta}: {v}")));
    }
    Ok(theta)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    algebra: String,
    #[serde(default)]
    tags: Vec<String>,
    #[serde(default)]
    terms: TermFiles,
    #[serde(default)]
    checks: Option<ChecksFile>,
    #[serde(default)]
    congruences: Option<PairsFile>,
    #[serde(default)]
    note: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermFiles {
    difference: Option<Value>,
    kiss: Option<Value>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum ChecksFile {
    All(String),
    Names(Vec<String>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum PairsFile {
    All(String),
    Pairs(Vec<(String, String)>),
}

/// Which congruence pairs an entry is checked on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairFilter {
    All,
    Listed(Vec<(String, String)>),
}

/// One algebra of a suite, with its known terms and the checks to run.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub algebra_path: PathBuf,
    pub algebra: FiniteAlgebra,
    pub tags: Vec<String>,
    pub terms: Terms,
    pub checks: Vec<CheckName>,
    pub pairs: PairFilter,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct SuiteConfig {
    pub entries: Vec<CorpusEntry>,
}

/// A term given inline as JSON or as a path to a term file.
fn load_term(value: &Value, base: &Path) -> Result<Term> {
    match value {
        Value::String(path) => Term::parse_json(&read_file(&base.join(path))?),
        other => Term::from_json(other),
    }
}

impl SuiteConfig {
    /// A JSON list of entries, or an object with an `entries` list. Paths
    /// are relative to `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let list = match value {
            Value::Array(items) => items,
            Value::Object(mut obj) => match obj.remove("entries") {
                Some(Value::Array(items)) => items,
                _ => return Err(Error::Config("expected a list of entries".into())),
            },
            _ => return Err(Error::Config("expected a list of entries".into())),
        };
        let mut entries = Vec::new();
        for (i, item) in list.into_iter().enumerate() {
            let file: EntryFile = serde_json::from_value(item)
                .map_err(|e| Error::Config(format!("entry {i}: {e}")))?;
            entries.push(Self::entry(file, base).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("entry {i}: {m}")),
                other => other,
            })?);
        }
        Ok(SuiteConfig { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_file(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        SuiteConfig::parse(&text, base)
    }

    fn entry(file: EntryFile, base: &Path) -> Result<CorpusEntry> {
        let algebra_path = base.join(&file.algebra);
        let algebra = FiniteAlgebra::from_json(&read_file(&algebra_path)?)?;
        let terms = Terms {
            difference: file
                .terms
                .difference
                .as_ref()
                .map(|v| load_term(v, base))
                .transpose()?,
            kiss: file
                .terms
                .kiss
                .as_ref()
                .map(|v| load_term(v, base))
                .transpose()?,
        };
        let checks = match file.checks {
            None => CheckName::ALL.to_vec(),
            Some(ChecksFile::All(s)) if s == "all" => CheckName::ALL.to_vec(),
            Some(ChecksFile::All(s)) => {
                return Err(Error::Config(format!(
                    "checks: expected a list or \"all\", got `{s}`"
                )))
            }
            Some(ChecksFile::Names(names)) => {
                names.iter().map(|n| n.parse()).collect::<Result<_>>()?
            }
        };
        let pairs = match file.congruences {
            None => PairFilter::All,
            Some(PairsFile::All(s)) if s == "all" => PairFilter::All,
            Some(PairsFile::All(s)) => {
                return Err(Error::Config(format!(
                    "congruences: expected a list or \"all\", got `{s}`"
                )))
            }
            Some(PairsFile::Pairs(p)) => PairFilter::Listed(p),
        };
        Ok(CorpusEntry {
            algebra_path,
            algebra,
            tags: file.tags,
            terms,
            checks,
            pairs,
            note: file.note,
        })
    }

    pub fn check_count(&self) -> usize {
        self.entries.iter().map(|e| e.checks.len()).sum()
    }
}

/// A job that could not produce reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JobError {
    pub algebra: String,
    pub alpha: Option<String>,
    pub beta: Option<String>,
    pub message: String,
    /// Whether a resource bound was hit.
    pub resource: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteOutcome {
    pub reports: Vec<CheckReport>,
    pub errors: Vec<JobError>,
}

impl SuiteOutcome {
    pub fn failures(&self) -> usize {
        self.reports.iter().filter(|r| r.failed()).count()
    }

    /// 0 when nothing failed, 1 on a failed check, 3 when a resource bound
    /// stopped a job, 2 on any other job error.
    pub fn exit_code(&self) -> i32 {
        if self.errors.iter().any(|e| e.resource) {
            3
        } else if !self.errors.is_empty() {
            2
        } else if self.failures() > 0 {
            1
        } else {
            0
        }
    }

    /// Counts per `(algebra, check)` as a fixed-width table.
    pub fn summary_table(&self) -> String {
        let mut rows: BTreeMap<(String, String), [usize; 4]> = BTreeMap::new();
        for r in &self.reports {
            let slot = match r.verdict {
                Verdict::Pass => 0,
                Verdict::PassSampled => 1,
                Verdict::Fail => 2,
                Verdict::Skipped => 3,
            };
            rows.entry((r.algebra.clone(), r.check.to_string()))
                .or_default()[slot] += 1;
        }
        let mut out = String::new();
        if rows.is_empty() && self.errors.is_empty() {
            out.push_str("no checks\n");
            return out;
        }
        let _ = writeln!(
            out,
            "{:<12} {:<16} {:>5} {:>8} {:>5} {:>8}",
            "algebra", "check", "pass", "sampled", "fail", "skipped"
        );
        let mut totals = [0; 4];
        for ((alg, check), counts) in &rows {
            let _ = writeln!(
                out,
                "{:<12} {:<16} {:>5} {:>8} {:>5} {:>8}",
                alg, check, counts[0], counts[1], counts[2], counts[3]
            );
            for (t, c) in totals.iter_mut().zip(counts) {
                *t += c;
            }
        }
        let _ = writeln!(
            out,
            "{:<12} {:<16} {:>5} {:>8} {:>5} {:>8}",
            "total", "", totals[0], totals[1], totals[2], totals[3]
        );
        for e in &self.errors {
            let _ = writeln!(out, "error: {}: {}", e.algebra, e.message);
        }
        out
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub jobs: usize,
    /// Record wall time per report; off by default so reports are
    /// byte-identical across runs.
    pub timing: bool,
}

type JobResult = (
    (usize, usize),
    std::result::Result<Vec<CheckReport>, JobError>,
);

struct Job {
    entry: usize,
    pair: usize,
    alpha: Congruence,
    beta: Congruence,
}

fn resolve_pairs(ctx: &Context, filter: &PairFilter) -> Result<Vec<(Congruence, Congruence)>> {
    match filter {
        PairFilter::All => ctx.congruence_pairs(),
        PairFilter::Listed(list) => list
            .iter()
            .map(|(a, b)| Ok((parse_congruence(ctx, a)?, parse_congruence(ctx, b)?)))
            .collect(),
    }
}

fn job_error(alg: &FiniteAlgebra, pair: Option<(&Congruence, &Congruence)>, e: &Error) -> JobError {
    JobError {
        algebra: alg.name().to_string(),
        alpha: pair.map(|p| p.0.to_string()),
        beta: pair.map(|p| p.1.to_string()),
        message: e.to_string(),
        resource: matches!(e, Error::SizeBoundExceeded { .. }),
    }
}

/// Runs every check of every entry on its congruence pairs. Results are
/// sorted by entry, pair and check order, independent of `jobs`.
pub fn run_suite(config: &SuiteConfig, limits: &Limits, options: &RunOptions) -> SuiteOutcome {
    let mut outcome = SuiteOutcome::default();
    let mut jobs = Vec::new();
    for (ei, entry) in config.entries.iter().enumerate() {
        if entry.checks.is_empty() {
            continue;
        }
        let ctx = Context::new(entry.algebra.clone(), limits.clone());
        match resolve_pairs(&ctx, &entry.pairs) {
            Ok(pairs) => {
                jobs.extend(
                    pairs
                        .into_iter()
                        .enumerate()
                        .map(|(pi, (alpha, beta))| Job {
                            entry: ei,
                            pair: pi,
                            alpha,
                            beta,
                        }),
                )
            }
            Err(e) => outcome.errors.push(job_error(&entry.algebra, None, &e)),
        }
    }

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<JobResult>> = Mutex::new(Vec::new());
    let workers = options.jobs.max(1).min(jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                // contexts are per thread; jobs of one entry share caches
                let mut contexts: HashMap<usize, Context> = HashMap::new();
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(job) = jobs.get(i) else { break };
                    let entry = &config.entries[job.entry];
                    let ctx = contexts
                        .entry(job.entry)
                        .or_insert_with(|| Context::new(entry.algebra.clone(), limits.clone()));
                    let mut reports = Vec::new();
                    let mut failed = None;
                    // term claims do not depend on the pair; they run with the first
                    let once = |c: &&CheckName| **c != CheckName::Terms || job.pair == 0;
                    for &check in entry.checks.iter().filter(once) {
                        let start = Instant::now();
                        match run_check(ctx, check, &entry.terms, &job.alpha, &job.beta) {
                            Ok(mut r) => {
                                if options.timing {
                                    r.elapsed_ms = Some(start.elapsed().as_millis() as u64);
                                }
                                reports.push(r);
                            }
                            Err(e) => {
                                failed = Some(job_error(
                                    &entry.algebra,
                                    Some((&job.alpha, &job.beta)),
                                    &e,
                                ));
                                break;
                            }
                        }
                    }
                    let result = match failed {
                        Some(e) => Err(e),
                        None => Ok(reports),
                    };
                    results
                        .lock()
                        .expect("no poisoned lock")
                        .push(((job.entry, job.pair), result));
                }
            });
        }
    });
    let mut results = results.into_inner().expect("no poisoned lock");
    results.sort_by_key(|(key, _)| *key);
    for (_, r) in results {
        match r {
            Ok(reports) => outcome.reports.extend(reports),
            Err(e) => outcome.errors.push(e),
        }
    }
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn write(dir: &Path, name: &str, text: &str) {
        std::fs::write(dir.join(name), text).unwrap();
    }

    fn temp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("clab-suite-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn empty_config_has_no_checks() {
        let config = SuiteConfig::parse("[]", Path::new(".")).unwrap();
        let out = run_suite(&config, &Limits::default(), &RunOptions::default());
        assert_eq!(out.exit_code(), 0);
        assert!(out.summary_table().contains("no checks"));
    }

    #[test]
    fn runs_and_is_deterministic() {
        let dir = temp_dir("det");
        write(&dir, "z2.json", &corpus::cyclic_group(2).to_json());
        write(
            &dir,
            "p.json",
            &corpus::additive_difference_term().to_json().to_string(),
        );
        let config = r#"[{"algebra": "z2.json", "terms": {"difference": "p.json",
            "kiss": ["ap","+",["ap","+",["x",0],["ap","-",["x",1]]],["x",3]]}}]"#;
        let config = SuiteConfig::parse(config, &dir).unwrap();
        let one = run_suite(
            &config,
            &Limits::default(),
            &RunOptions {
                jobs: 1,
                timing: false,
            },
        );
        let four = run_suite(
            &config,
            &Limits::default(),
            &RunOptions {
                jobs: 4,
                timing: false,
            },
        );
        assert_eq!(one.exit_code(), 0, "{}", one.summary_table());
        assert_eq!(one.reports.len(), 4 * (CheckName::ALL.len() - 1) + 1);
        assert_eq!(
            serde_json::to_string(&one.reports).unwrap(),
            serde_json::to_string(&four.reports).unwrap()
        );
    }

    #[test]
    fn out_of_range_index_is_an_input_error() {
        let dir = temp_dir("index");
        write(&dir, "sl.json", &corpus::semilattice2().to_json());
        let config =
            r#"[{"algebra": "sl.json", "checks": ["arbitrary"], "congruences": [["0", "7"]]}]"#;
        let config = SuiteConfig::parse(config, &dir).unwrap();
        let out = run_suite(&config, &Limits::default(), &RunOptions::default());
        assert_eq!(out.exit_code(), 2);
        assert!(out.reports.is_empty());
    }

    #[test]
    fn bad_config() {
        assert!(matches!(
            SuiteConfig::parse("{", Path::new(".")),
            Err(Error::Config(_))
        ));
        let err = SuiteConfig::parse(
            r#"[{"algebra": "missing.json"}]"#,
            Path::new("/nonexistent"),
        );
        assert!(matches!(err, Err(Error::Io { .. })));
        let dir = temp_dir("badcheck");
        write(&dir, "z2.json", &corpus::cyclic_group(2).to_json());
        let err = SuiteConfig::parse(r#"[{"algebra": "z2.json", "checks": ["nope"]}]"#, &dir);
        assert!(matches!(err, Err(Error::Config(_))));
    }
}
