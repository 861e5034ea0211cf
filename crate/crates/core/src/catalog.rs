//! Named axiom systems, derived identities, and the fourteen published
//! independence witnesses.
//!
//! Example tables are transcribed block by block: each block fixes the first
//! argument `a`, its rows are indexed by the second argument and its columns
//! by the third. Read row after row, that is exactly the lexicographic
//! `(a,b,c)` layout of [`FiniteModel`].

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::model::FiniteModel;
use crate::terms::{parse_identity, parse_identity_lines, Identity, LineError};

/// A named, ordered list of identities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomSystem {
    pub name: String,
    pub identities: Vec<Identity>,
}

impl AxiomSystem {
    pub fn new(name: impl Into<String>, identities: Vec<Identity>) -> Self {
        AxiomSystem { name: name.into(), identities }
    }

    pub fn get(&self, name: &str) -> Option<&Identity> {
        self.identities.iter().find(|id| id.name.as_deref() == Some(name))
    }

    pub fn names(&self) -> Vec<String> {
        self.identities.iter().map(Identity::display_name).collect()
    }

    pub fn len(&self) -> usize {
        self.identities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.identities.is_empty()
    }

    /// A copy without the named identities.
    pub fn without(&self, names: &[&str]) -> AxiomSystem {
        let identities = self
            .identities
            .iter()
            .filter(|id| !names.iter().any(|n| id.name.as_deref() == Some(*n)))
            .cloned()
            .collect();
        AxiomSystem::new(format!("{}-minus", self.name), identities)
    }
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown system `{name}`; available: {}", available.join(", "))]
    UnknownSystem { name: String, available: Vec<String> },
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: LineError,
    },
}

const HICKMAN: [(&str, &str); 8] = [
    ("H1", "m(x,x,x) = x"),
    ("H2", "m(x,x,y) = m(y,y,x)"),
    ("H3", "m(m(x,x,y),m(x,x,y),z) = m(x,x,m(y,y,z))"),
    ("H4", "m(x,y,z) = m(y,x,z)"),
    ("H5", "m(m(x,y,z),m(x,y,z),m(x,x,z)) = m(x,x,z)"),
    ("H6", "m(m(x,x,y),z,y) = m(x,z,y)"),
    ("H7", "m(x,m(x,x,y),z) = m(x,x,z)"),
    ("H8", "m(m(x,m(y,z,u),u),m(x,m(y,z,u),u),m(x,z,u)) = m(x,z,u)"),
];

const CHAJDA: [(&str, &str); 8] = [
    ("P1", "m(x,y,x) = x"),
    ("P2", "m(x,x,y) = m(y,y,x)"),
    ("P3", "m(m(x,x,y),m(x,x,y),z) = m(x,x,m(y,y,z))"),
    ("P4", "m(x,y,z) = m(y,x,z)"),
    ("P5", "m(m(x,y,z),w,z) = m(x,m(y,w,z),z)"),
    ("P6", "m(x,m(y,y,x),z) = m(x,x,z)"),
    ("P7", "m(x,x,m(x,y,z)) = m(x,x,z)"),
    ("P8", "m(m(x,x,z),m(y,y,z),z) = m(x,y,z)"),
];

const TWO_BASE: [(&str, &str); 2] = [
    ("N1", "m(x,y,x) = x"),
    ("N2", "m(m(x,y,z),m(y,m(u,x,z),z),w) = m(w,w,m(y,m(x,u,z),z))"),
];

const H8_PRIME: (&str, &str) = ("H8'", "m(m(x,y,z),m(x,y,z),m(x,m(y,u,z),z)) = m(x,y,z)");

const DERIVED: [(&str, &str); 18] = [
    ("xyxx", "m(x,y,x) = x"),
    ("xyyy", "m(x,y,y) = y"),
    ("h5-9", "m(m(x,y,z),m(x,y,z),z) = m(x,y,z)"),
    ("h5-12", "m(x,m(x,y,z),z) = m(x,y,z)"),
    ("h6-17", "m(m(x,x,y),m(z,x,y),y) = m(z,x,y)"),
    ("hick13", "m(x,m(y,y,z),y) = m(x,z,y)"),
    ("hick19", "m(x,x,m(x,y,z)) = m(z,z,x)"),
    ("hick21", "m(x,m(y,z,u),z) = m(x,u,z)"),
    ("h3-22", "m(x,m(y,y,z),m(y,y,u)) = m(x,z,m(y,y,u))"),
    ("p11", "m(m(x,y,z),m(x,x,z),y) = m(y,y,z)"),
    ("halfofit", "m(x,x,m(y,y,z)) = m(m(y,y,z),m(y,y,z),m(x,x,y))"),
    ("useful1", "m(m(x,y,y),y,z) = m(z,z,y)"),
    ("useful2", "m(x,y,y) = y"),
    ("preH4a", "m(x,m(y,z,u),u) = m(x,m(z,y,u),u)"),
    ("preH4b", "m(m(x,y,z),z,u) = m(u,u,z)"),
    ("preH4c", "m(x,x,m(y,z,x)) = m(y,z,x)"),
    ("preH4d", "m(m(x,y,z),m(y,x,z),z) = m(x,y,z)"),
    ("preH4e", "m(m(x,m(y,x,z),z),m(y,x,z),z) = m(y,x,z)"),
];

/// Every catalog system name, in a stable order.
pub const SYSTEM_NAMES: [&str; 7] =
    ["HICKMAN_FULL", "HICKMAN_BASIS", "CHAJDA_FULL", "CHAJDA_BASIS", "TWO_BASE", "H8PRIME", "DERIVED"];

/// Every `(name, text)` pair known to the catalog. Names are unique.
fn all_sources() -> impl Iterator<Item = (&'static str, &'static str)> {
    HICKMAN.into_iter().chain(CHAJDA).chain(TWO_BASE).chain([H8_PRIME]).chain(DERIVED)
}

fn build(name: &str, source: &[(&str, &str)]) -> AxiomSystem {
    let identities = source
        .iter()
        .map(|&(label, text)| {
            let mut id = parse_identity(text).expect("catalog identity parses");
            id.name = Some(label.to_string());
            id
        })
        .collect();
    AxiomSystem::new(name, identities)
}

fn pick<const N: usize>(source: &[(&'static str, &'static str); N], labels: &[&str]) -> Vec<(&'static str, &'static str)> {
    source.iter().filter(|(l, _)| labels.contains(l)).copied().collect()
}

pub fn get_system(name: &str) -> Result<AxiomSystem, CatalogError> {
    let source: Vec<(&str, &str)> = match name {
        "HICKMAN_FULL" => HICKMAN.to_vec(),
        "HICKMAN_BASIS" => pick(&HICKMAN, &["H1", "H2", "H4", "H7", "H8"]),
        "CHAJDA_FULL" => CHAJDA.to_vec(),
        "CHAJDA_BASIS" => pick(&CHAJDA, &["P1", "P2", "P4", "P5", "P6", "P7", "P8"]),
        "TWO_BASE" => TWO_BASE.to_vec(),
        "H8PRIME" => vec![H8_PRIME],
        "DERIVED" => DERIVED.to_vec(),
        _ => {
            return Err(CatalogError::UnknownSystem {
                name: name.to_string(),
                available: SYSTEM_NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Ok(build(name, &source))
}

/// Looks up a single named identity (`H4`, `N2`, `H8'`, `hick19`, ...).
pub fn identity(name: &str) -> Result<Identity, CatalogError> {
    all_sources()
        .find(|&(label, _)| label == name)
        .map(|entry| build("", &[entry]).identities.remove(0))
        .ok_or_else(|| CatalogError::UnknownIdentity(name.to_string()))
}

/// Every identity name in the catalog.
pub fn identity_names() -> Vec<&'static str> {
    all_sources().map(|(label, _)| label).collect()
}

/// Reads an identity file; the system is named after the file stem.
pub fn load_system(path: impl AsRef<Path>) -> Result<AxiomSystem, CatalogError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| CatalogError::Io { path: display.clone(), source })?;
    let identities = parse_identity_lines(&text).map_err(|source| CatalogError::Parse { path: display, source })?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(AxiomSystem::new(name, identities))
}

/// A published finite algebra together with the identities it is claimed to
/// satisfy and to violate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaperExample {
    pub label: &'static str,
    pub model: FiniteModel,
    pub satisfies: Vec<&'static str>,
    pub violates: Vec<&'static str>,
    /// Which axiom family the witness belongs to.
    pub source: &'static str,
}

impl PaperExample {
    /// The listed identities as a system, satisfied ones first.
    pub fn listed_system(&self) -> AxiomSystem {
        let ids = self
            .satisfies
            .iter()
            .chain(&self.violates)
            .map(|n| identity(n).expect("listed identity resolves"))
            .collect();
        AxiomSystem::new(self.label, ids)
    }
}

const HICKMAN_FAMILY: &str = "Hickman axioms";
const CHAJDA_FAMILY: &str = "Chajda et al. axioms";
const TWO_BASE_FAMILY: &str = "two-identity basis";

#[rustfmt::skip]
const EXAMPLE_TABLES: [(&str, usize, &[usize], &[&str], &str, &str); 14] = [
    ("notH8", 3, &[
        0, 2, 2,  0, 0, 0,  0, 2, 2,
        0, 0, 0,  2, 1, 2,  2, 1, 2,
        0, 2, 2,  2, 1, 2,  2, 2, 2,
    ], &["H1", "H2", "H4", "H7"], "H8", HICKMAN_FAMILY),
    ("notH7", 3, &[
        0, 1, 0,  0, 1, 2,  0, 1, 2,
        0, 1, 2,  1, 1, 1,  0, 1, 2,
        0, 1, 2,  0, 1, 2,  0, 1, 2,
    ], &["H1", "H2", "H4", "H8"], "H7", HICKMAN_FAMILY),
    ("notH4", 2, &[
        0, 1,  0, 1,
        1, 1,  1, 1,
    ], &["H1", "H2", "H7", "H8"], "H4", HICKMAN_FAMILY),
    ("notH2", 2, &[
        0, 1,  0, 1,
        0, 1,  0, 1,
    ], &["H1", "H4", "H7", "H8"], "H2", HICKMAN_FAMILY),
    ("notH1", 2, &[
        1, 1,  1, 1,
        1, 1,  1, 1,
    ], &["H2", "H4", "H7", "H8"], "H1", HICKMAN_FAMILY),
    ("notP8", 4, &[
        0, 1, 1, 1,  0, 1, 1, 1,  0, 3, 2, 1,  0, 1, 1, 3,
        0, 1, 1, 1,  1, 1, 1, 1,  1, 1, 2, 1,  1, 1, 1, 3,
        0, 3, 2, 1,  1, 1, 2, 1,  1, 1, 2, 1,  1, 1, 2, 3,
        0, 1, 1, 3,  1, 1, 1, 3,  1, 1, 2, 3,  1, 1, 1, 3,
    ], &["P1", "P2", "P4", "P5", "P6", "P7"], "P8", CHAJDA_FAMILY),
    ("notP7", 4, &[
        0, 3, 0, 3,  0, 1, 1, 3,  0, 1, 2, 3,  0, 3, 0, 3,
        0, 1, 1, 3,  3, 1, 1, 3,  0, 1, 2, 3,  3, 1, 1, 3,
        0, 1, 2, 3,  0, 1, 2, 3,  0, 1, 2, 3,  0, 1, 2, 3,
        0, 3, 0, 3,  3, 1, 1, 3,  0, 1, 2, 3,  3, 3, 3, 3,
    ], &["P1", "P2", "P4", "P5", "P6", "P8"], "P7", CHAJDA_FAMILY),
    ("notP6", 3, &[
        0, 1, 0,  0, 1, 2,  0, 1, 2,
        0, 1, 2,  1, 1, 1,  0, 1, 2,
        0, 1, 2,  0, 1, 2,  0, 1, 2,
    ], &["P1", "P2", "P4", "P5", "P7", "P8"], "P6", CHAJDA_FAMILY),
    ("notP5", 5, &[
        0, 0, 3, 3, 0,  0, 1, 2, 3, 1,  0, 4, 2, 3, 1,  0, 0, 3, 3, 0,  0, 1, 2, 3, 4,
        0, 1, 2, 3, 1,  0, 1, 2, 3, 1,  0, 1, 2, 3, 1,  0, 1, 2, 3, 1,  0, 1, 2, 3, 4,
        0, 4, 2, 3, 1,  0, 1, 2, 3, 1,  3, 2, 2, 3, 2,  3, 2, 2, 3, 2,  0, 1, 2, 3, 4,
        0, 0, 3, 3, 0,  0, 1, 2, 3, 1,  3, 2, 2, 3, 2,  3, 3, 3, 3, 3,  0, 1, 2, 3, 4,
        0, 1, 2, 3, 4,  0, 1, 2, 3, 4,  0, 1, 2, 3, 4,  0, 1, 2, 3, 4,  0, 1, 2, 3, 4,
    ], &["P1", "P2", "P4", "P6", "P7", "P8"], "P5", CHAJDA_FAMILY),
    ("notP4", 2, &[
        0, 1,  0, 1,
        1, 1,  1, 1,
    ], &["P1", "P2", "P5", "P6", "P7", "P8"], "P4", CHAJDA_FAMILY),
    ("notP2", 2, &[
        0, 1,  0, 1,
        0, 1,  0, 1,
    ], &["P1", "P4", "P5", "P6", "P7", "P8"], "P2", CHAJDA_FAMILY),
    ("notP1", 2, &[
        1, 1,  1, 1,
        1, 1,  1, 1,
    ], &["P2", "P4", "P5", "P6", "P7", "P8"], "P1", CHAJDA_FAMILY),
    ("notN2", 2, &[
        0, 0,  0, 0,
        0, 1,  1, 1,
    ], &["N1"], "N2", TWO_BASE_FAMILY),
    ("notN1", 2, &[
        1, 1,  1, 1,
        1, 1,  1, 1,
    ], &["N2"], "N1", TWO_BASE_FAMILY),
];

/// The fourteen independence witnesses, in publication order.
pub fn paper_examples() -> Vec<PaperExample> {
    EXAMPLE_TABLES
        .iter()
        .map(|&(label, size, table, satisfies, violates, source)| PaperExample {
            label,
            model: FiniteModel::new(size, table.to_vec()).expect("embedded table is well formed"),
            satisfies: satisfies.to_vec(),
            violates: vec![violates],
            source,
        })
        .collect()
}

pub fn paper_example(label: &str) -> Option<PaperExample> {
    paper_examples().into_iter().find(|e| e.label == label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{holds, profile};
    use crate::terms::render_term;

    #[test]
    fn system_sizes() {
        let two = get_system("TWO_BASE").unwrap();
        assert_eq!(two.names(), ["N1", "N2"]);
        assert_eq!(get_system("HICKMAN_BASIS").unwrap().names(), ["H1", "H2", "H4", "H7", "H8"]);
        assert_eq!(get_system("CHAJDA_FULL").unwrap().len(), 8);
        assert_eq!(get_system("CHAJDA_BASIS").unwrap().names(), ["P1", "P2", "P4", "P5", "P6", "P7", "P8"]);
        assert_eq!(get_system("HICKMAN_FULL").unwrap().len(), 8);
        assert_eq!(get_system("H8PRIME").unwrap().names(), ["H8'"]);
        assert_eq!(get_system("DERIVED").unwrap().len(), 18);
    }

    #[test]
    fn unknown_system_lists_available() {
        let err = get_system("NOPE").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("NOPE"));
        for name in SYSTEM_NAMES {
            assert!(msg.contains(name), "{msg}");
        }
    }

    #[test]
    fn identity_names_are_unique() {
        let names = identity_names();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        assert!(identity("H8'").is_ok());
        assert!(matches!(identity("H9"), Err(CatalogError::UnknownIdentity(_))));
    }

    /// Each embedded string re-renders to its canonical golden form.
    #[test]
    fn catalog_strings_round_trip() {
        for (label, text) in all_sources() {
            let id = parse_identity(text).unwrap();
            assert_eq!(format!("{} = {}", render_term(&id.lhs), render_term(&id.rhs)), text, "{label}");
        }
    }

    #[test]
    fn variable_orders() {
        assert_eq!(identity("N2").unwrap().variable_order(), ["x", "y", "z", "u", "w"]);
        assert_eq!(identity("H8").unwrap().variable_order(), ["x", "y", "z", "u"]);
        assert_eq!(identity("P5").unwrap().variable_order(), ["x", "y", "z", "w"]);
    }

    #[test]
    fn load_system_from_files() {
        let dir = tempfile::tempdir().unwrap();
        let one = dir.path().join("single.eq");
        fs::write(&one, "m(x,y,x) = x\n").unwrap();
        let sys = load_system(&one).unwrap();
        assert_eq!(sys.name, "single");
        assert_eq!(sys.len(), 1);

        let two = dir.path().join("two.eq");
        fs::write(&two, "# the 2-base\nN1: m(x,y,x) = x\nN2: m(m(x,y,z),m(y,m(u,x,z),z),w) = m(w,w,m(y,m(x,u,z),z))\n").unwrap();
        assert_eq!(load_system(&two).unwrap().identities, get_system("TWO_BASE").unwrap().identities);

        let empty = dir.path().join("empty.eq");
        fs::write(&empty, "").unwrap();
        let sys = load_system(&empty).unwrap();
        assert!(sys.is_empty());
        assert!(profile(&paper_example("notN1").unwrap().model, &sys).is_empty());
    }

    #[test]
    fn load_system_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_system(dir.path().join("missing.eq")), Err(CatalogError::Io { .. })));
        let bad = dir.path().join("bad.eq");
        fs::write(&bad, "x = x\nm(x,y) = x\n").unwrap();
        match load_system(&bad) {
            Err(CatalogError::Parse { source, .. }) => assert_eq!(source.line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fourteen_examples_with_disjoint_resolvable_profiles() {
        let examples = paper_examples();
        assert_eq!(examples.len(), 14);
        for e in &examples {
            for name in e.satisfies.iter().chain(&e.violates) {
                assert!(identity(name).is_ok(), "{}: {name}", e.label);
            }
            assert!(e.satisfies.iter().all(|s| !e.violates.contains(s)));
        }
    }

    #[test]
    fn example_spot_values() {
        let n1 = paper_example("notN1").unwrap().model;
        assert_eq!(n1.size(), 2);
        assert!(n1.table().iter().all(|&v| v == 1));
        let h8 = paper_example("notH8").unwrap().model;
        assert_eq!(h8.size(), 3);
        assert_eq!(h8.apply(0, 0, 1), 2);
        assert_eq!(paper_example("notP5").unwrap().model.size(), 5);
        assert_eq!(paper_example("notH2").unwrap().model, paper_example("notP2").unwrap().model);
        assert!(paper_example("notH2").unwrap().model.table().chunks(2).all(|c| c == [0, 1]));
    }

    #[test]
    fn every_example_matches_its_profile() {
        for e in paper_examples() {
            for entry in profile(&e.model, &e.listed_system()) {
                let expected = e.satisfies.contains(&entry.name.as_str());
                assert_eq!(entry.holds, expected, "{}: {}", e.label, entry.name);
            }
        }
    }

    #[test]
    fn transposed_reading_breaks_some_profile() {
        // Sanity check on the transcription convention: swapping the row and
        // column roles does not reproduce every claimed profile.
        let mut all_ok = true;
        for e in paper_examples() {
            let m = &e.model;
            let t = FiniteModel::from_fn(m.size(), |a, b, c| m.apply(a, c, b)).unwrap();
            let ok = e.satisfies.iter().all(|n| holds(&t, &identity(n).unwrap()))
                && e.violates.iter().all(|n| !holds(&t, &identity(n).unwrap()));
            all_ok &= ok;
        }
        assert!(!all_ok);
    }
}
