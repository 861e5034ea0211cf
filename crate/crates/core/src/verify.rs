//! End-to-end reproduction checks: the published witness tables, the basis
//! and dependency results on all small models, and the search oracle.
//!
//! Each check carries a wall-clock budget and fails if it overruns.

use std::fmt;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{get_system, identity, paper_examples, AxiomSystem, PaperExample};
use crate::model::{canonical_form, counterexample, holds, FiniteModel};
use crate::order::round_trip_check;
use crate::search::{find_models_with_workers, SearchSpec};
use crate::terms::Identity;

/// Check groups accepted by [`run`], in execution order.
pub const GROUPS: [&str; 8] =
    ["examples", "basis", "hickman", "chajda", "h8-equivalence", "derived", "independence", "oracle"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown check group `{0}`; available: examples, basis, hickman, chajda, h8-equivalence, derived, independence, oracle")]
pub struct UnknownGroup(pub String);

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub group: &'static str,
    pub description: String,
    pub passed: bool,
    /// Summary on success, witness on failure.
    pub detail: String,
    #[serde(skip)]
    pub elapsed: Duration,
    #[serde(skip)]
    pub budget: Duration,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub records: Vec<CheckRecord>,
}

impl VerificationReport {
    fn push(&mut self, record: CheckRecord) {
        self.records.push(record);
        self.passed = self.records.iter().all(|r| r.passed);
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.records.iter().map(|r| r.id.len()).max().unwrap_or(0);
        for r in &self.records {
            writeln!(
                f,
                "{:<width$}  {}  {:>9.3}s  {}: {}",
                r.id,
                if r.passed { "PASS" } else { "FAIL" },
                r.elapsed.as_secs_f64(),
                r.description,
                r.detail,
            )?;
        }
        let failed = self.records.iter().filter(|r| !r.passed).count();
        writeln!(f, "overall: {} ({} checks, {} failed)", if self.passed { "PASS" } else { "FAIL" }, self.records.len(), failed)
    }
}

type Outcome = Result<String, String>;

struct Runner {
    workers: usize,
    report: VerificationReport,
}

impl Runner {
    fn check(&mut self, id: impl Into<String>, group: &'static str, description: impl Into<String>, budget_secs: u64, body: impl FnOnce(&Runner) -> Outcome) {
        let budget = Duration::from_secs(budget_secs);
        let start = Instant::now();
        let outcome = body(self);
        let elapsed = start.elapsed();
        let (mut passed, mut detail) = match outcome {
            Ok(detail) => (true, detail),
            Err(detail) => (false, detail),
        };
        if elapsed > budget {
            passed = false;
            detail = format!("exceeded budget of {budget_secs}s; {detail}");
        }
        self.report.push(CheckRecord {
            id: id.into(),
            group,
            description: description.into(),
            passed,
            detail,
            elapsed,
            budget,
        });
    }

    /// All models of `system` with sizes `1..=max`, each re-certified by the
    /// model checker independently of the search.
    fn models(&self, system: &AxiomSystem, max: usize) -> Result<Vec<FiniteModel>, String> {
        let mut out = Vec::new();
        for size in 1..=max {
            let found = find_models_with_workers(&SearchSpec::new(size, system.clone()), self.workers)
                .map_err(|e| e.to_string())?;
            for m in &found {
                recertify(m, &system.identities, &[])?;
            }
            out.extend(found);
        }
        Ok(out)
    }
}

fn recertify(model: &FiniteModel, satisfy: &[Identity], violate: &[Identity]) -> Result<(), String> {
    for id in satisfy {
        if let Some(cx) = counterexample(model, id) {
            return Err(format!("search emitted a model violating {} at {cx}:\n{model}", id.display_name()));
        }
    }
    for id in violate {
        if holds(model, id) {
            return Err(format!("search emitted a model satisfying {}:\n{model}", id.display_name()));
        }
    }
    Ok(())
}

/// The first `(model, identity, assignment)` where an identity fails.
fn all_hold(models: &[FiniteModel], identities: &[Identity]) -> Outcome {
    for m in models {
        for id in identities {
            if let Some(cx) = counterexample(m, id) {
                return Err(format!("{} fails at {cx} in size-{} model {}", id.display_name(), m.size(), one_line(m)));
            }
        }
    }
    Ok(format!("{} identities hold in all {} models", identities.len(), models.len()))
}

fn one_line(m: &FiniteModel) -> String {
    m.to_string().trim_end().replace('\n', " / ")
}

fn system(label: &str, names: &[&str]) -> AxiomSystem {
    AxiomSystem::new(label, names.iter().map(|n| identity(n).expect("catalog identity")).collect())
}

fn named(name: &str) -> AxiomSystem {
    get_system(name).expect("catalog system")
}

fn check_example(e: &PaperExample) -> Outcome {
    for name in &e.satisfies {
        if let Some(cx) = counterexample(&e.model, &identity(name).expect("listed")) {
            return Err(format!("{name} should hold but fails at {cx}"));
        }
    }
    let mut witnesses = Vec::new();
    for name in &e.violates {
        match counterexample(&e.model, &identity(name).expect("listed")) {
            Some(cx) => witnesses.push(format!("{name} fails at {cx}")),
            None => return Err(format!("{name} should fail but holds")),
        }
    }
    Ok(format!("satisfies {}; {}", e.satisfies.join(","), witnesses.join("; ")))
}

/// Runs every check, or only those of `only`.
pub fn run(only: Option<&str>, workers: usize) -> Result<VerificationReport, UnknownGroup> {
    if let Some(group) = only {
        if !GROUPS.contains(&group) {
            return Err(UnknownGroup(group.to_string()));
        }
    }
    let wanted = |g: &str| only.map_or(true, |o| o == g);
    let mut r = Runner { workers: workers.max(1), report: VerificationReport { passed: true, records: Vec::new() } };

    if wanted("examples") {
        for e in paper_examples() {
            r.check(
                format!("examples/{}", e.label),
                "examples",
                format!("size-{} witness, {} family: exact profile", e.model.size(), e.source),
                1,
                |_| check_example(&e),
            );
        }
    }

    if wanted("basis") {
        r.check("basis/forward", "basis", "TWO_BASE models (n<=3) satisfy H1-H8, P1-P8, H8'", 60, |r| {
            let models = r.models(&named("TWO_BASE"), 3)?;
            let mut targets = named("HICKMAN_FULL").identities;
            targets.extend(named("CHAJDA_FULL").identities);
            targets.extend(named("H8PRIME").identities);
            all_hold(&models, &targets)
        });
        r.check("basis/converse", "basis", "HICKMAN_FULL and CHAJDA_FULL models (n<=3) satisfy N1, N2; model sets coincide", 120, |r| {
            let two = named("TWO_BASE");
            let hickman = r.models(&named("HICKMAN_FULL"), 3)?;
            let chajda = r.models(&named("CHAJDA_FULL"), 3)?;
            all_hold(&hickman, &two.identities)?;
            all_hold(&chajda, &two.identities)?;
            let base = r.models(&two, 3)?;
            if hickman != base || chajda != base {
                return Err(format!(
                    "model sets differ: TWO_BASE {}, HICKMAN_FULL {}, CHAJDA_FULL {}",
                    base.len(),
                    hickman.len(),
                    chajda.len()
                ));
            }
            Ok(format!("all three systems have the same {} models", base.len()))
        });
    }

    if wanted("hickman") {
        r.check("hickman/dependent", "hickman", "HICKMAN_BASIS models (n<=3) satisfy H3, H5, H6", 60, |r| {
            let models = r.models(&named("HICKMAN_BASIS"), 3)?;
            all_hold(&models, &system("implied", &["H3", "H5", "H6"]).identities)
        });
    }

    if wanted("chajda") {
        r.check("chajda/dependent", "chajda", "CHAJDA_BASIS models (n<=3) satisfy P3", 60, |r| {
            let models = r.models(&named("CHAJDA_BASIS"), 3)?;
            all_hold(&models, &system("implied", &["P3"]).identities)
        });
    }

    if wanted("h8-equivalence") {
        r.check("h8-equivalence", "h8-equivalence", "under H2, H4 (n<=3): H8 holds iff H8' holds", 60, |r| {
            let with_h8 = r.models(&system("h8", &["H2", "H4", "H8"]), 3)?;
            let with_h8p = r.models(&system("h8p", &["H2", "H4", "H8'"]), 3)?;
            all_hold(&with_h8, &[identity("H8'").expect("catalog")])?;
            all_hold(&with_h8p, &[identity("H8").expect("catalog")])?;
            if with_h8 != with_h8p {
                return Err(format!("{} models with H8, {} with H8'", with_h8.len(), with_h8p.len()));
            }
            Ok(format!("both sides have the same {} models", with_h8.len()))
        });
    }

    if wanted("derived") {
        r.check("derived", "derived", "every DERIVED identity holds in TWO_BASE models (n<=3)", 60, |r| {
            let models = r.models(&named("TWO_BASE"), 3)?;
            all_hold(&models, &named("DERIVED").identities)
        });
    }

    if wanted("independence") {
        for e in paper_examples() {
            let budget = if e.model.size() <= 3 { 10 } else { 60 };
            r.check(
                format!("independence/{}", e.label),
                "independence",
                format!("search at size {} re-finds a model with the {} profile", e.model.size(), e.label),
                budget,
                |r| {
                    let satisfy = system(e.label, &e.satisfies);
                    let violate: Vec<Identity> = e.violates.iter().map(|n| identity(n).expect("catalog")).collect();
                    let spec = SearchSpec::new(e.model.size(), satisfy).violate(violate.clone()).limit(1);
                    let found = find_models_with_workers(&spec, r.workers).map_err(|err| err.to_string())?;
                    let m = found.first().ok_or("no model found")?;
                    recertify(m, &spec.satisfy.identities, &violate)?;
                    Ok(format!("found {}", one_line(m)))
                },
            );
        }
    }

    if wanted("oracle") {
        r.check("oracle/count", "oracle", "count_models(2, TWO_BASE) against all 256 tables", 120, |r| {
            let two = named("TWO_BASE");
            let oracle: Vec<FiniteModel> = (0u32..256)
                .map(|code| FiniteModel::new(2, (0..8).map(|bit| (code >> (7 - bit) & 1) as usize).collect()).expect("2-table"))
                .filter(|m| two.identities.iter().all(|id| holds(m, id)))
                .collect();
            let mut classes: Vec<FiniteModel> = oracle.iter().map(|m| canonical_form(m).expect("small")).collect();
            classes.sort();
            classes.dedup();
            let found = find_models_with_workers(&SearchSpec::new(2, two.clone()), r.workers).map_err(|e| e.to_string())?;
            let deduped =
                find_models_with_workers(&SearchSpec::new(2, two).dedup(true), r.workers).map_err(|e| e.to_string())?;
            if found != oracle {
                return Err(format!("search found {} models, brute force {}", found.len(), oracle.len()));
            }
            if deduped != classes {
                return Err(format!("search found {} classes, brute force {}", deduped.len(), classes.len()));
            }
            Ok(format!("{} models, {} isomorphism class(es), both matching brute force", found.len(), classes.len()))
        });
        r.check("oracle/roundtrip", "oracle", "round trip through the order structure for TWO_BASE models (n<=4)", 120, |r| {
            let models = r.models(&named("TWO_BASE"), 4)?;
            for m in &models {
                match round_trip_check(m) {
                    Ok(true) => {}
                    Ok(false) => return Err(format!("round trip changed {}", one_line(m))),
                    Err(e) => return Err(format!("{} on {}", e, one_line(m))),
                }
            }
            Ok(format!("{} models certified and rebuilt exactly", models.len()))
        });
    }

    Ok(r.report)
}
