//! Finite models of the ternary signature and exhaustive identity checking.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::AxiomSystem;
use crate::terms::{Identity, Term};

/// Largest size accepted by [`canonical_form`].
pub const MAX_CANONICAL_SIZE: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("model size must be at least 1")]
    EmptyCarrier,
    #[error("table has {found} entries, expected {expected}")]
    TableLength { expected: usize, found: usize },
    #[error("table entry {index} is {value}, outside 0..{size}")]
    EntryOutOfRange { index: usize, value: usize, size: usize },
    #[error("variable `{0}` is not bound by the assignment")]
    UnboundVariable(String),
    #[error("variable `{name}` is assigned {value}, outside 0..{size}")]
    AssignmentOutOfRange { name: String, value: usize, size: usize },
    #[error("size {size} exceeds the canonical-form cap of {cap}")]
    SizeCap { size: usize, cap: usize },
    #[error("malformed model text: {0}")]
    Format(String),
}

/// A carrier `{0..n-1}` with the operation table of `m`, stored in
/// lexicographic `(a,b,c)` order with `c` fastest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FiniteModel {
    size: usize,
    table: Vec<usize>,
}

impl FiniteModel {
    pub fn new(size: usize, table: Vec<usize>) -> Result<Self, ModelError> {
        if size == 0 {
            return Err(ModelError::EmptyCarrier);
        }
        let expected = size * size * size;
        if table.len() != expected {
            return Err(ModelError::TableLength { expected, found: table.len() });
        }
        if let Some((index, &value)) = table.iter().find_position(|&&v| v >= size) {
            return Err(ModelError::EntryOutOfRange { index, value, size });
        }
        Ok(FiniteModel { size, table })
    }

    /// Builds a model from a function of three arguments.
    pub fn from_fn(size: usize, f: impl Fn(usize, usize, usize) -> usize) -> Result<Self, ModelError> {
        let table = (0..size)
            .cartesian_product(0..size)
            .cartesian_product(0..size)
            .map(|((a, b), c)| f(a, b, c))
            .collect();
        FiniteModel::new(size, table)
    }

    /// The model whose every entry is `value`.
    pub fn constant(size: usize, value: usize) -> Result<Self, ModelError> {
        FiniteModel::new(size, vec![value; size * size * size])
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    #[inline]
    pub fn index(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.size + b) * self.size + c
    }

    #[inline]
    pub fn apply(&self, a: usize, b: usize, c: usize) -> usize {
        self.table[self.index(a, b, c)]
    }

    /// The model obtained by relabelling every element `x` as `perm[x]`.
    pub fn permuted(&self, perm: &[usize]) -> FiniteModel {
        let n = self.size;
        let mut table = vec![0; self.table.len()];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    table[(perm[a] * n + perm[b]) * n + perm[c]] = perm[self.apply(a, b, c)];
                }
            }
        }
        FiniteModel { size: n, table }
    }
}

/// Two-line text format: `n`, then the `n^3` entries separated by single spaces.
impl fmt::Display for FiniteModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.size)?;
        writeln!(f, "{}", self.table.iter().join(" "))
    }
}

impl FromStr for FiniteModel {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let size_line = lines.next().ok_or_else(|| ModelError::Format("missing size line".into()))?;
        let size: usize = size_line
            .trim()
            .parse()
            .map_err(|_| ModelError::Format(format!("bad size `{}`", size_line.trim())))?;
        let table_line = lines.next().unwrap_or("");
        if let Some(extra) = lines.next() {
            return Err(ModelError::Format(format!("unexpected trailing line `{}`", extra.trim())));
        }
        let table = table_line
            .split_whitespace()
            .map(|tok| tok.parse::<usize>().map_err(|_| ModelError::Format(format!("bad entry `{tok}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        FiniteModel::new(size, table)
    }
}

/// Values for the variables of a term or identity, in first-occurrence order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment(Vec<(String, usize)>);

impl Assignment {
    pub fn new() -> Self {
        Assignment(Vec::new())
    }

    /// Binds (or rebinds) `name`.
    pub fn bind(&mut self, name: impl Into<String>, value: usize) {
        let name = name.into();
        match self.0.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = value,
            None => self.0.push((name, value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.0.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.0.iter().map(|(n, v)| (n.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, usize)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (S, usize)>>(iter: I) -> Self {
        let mut out = Assignment::new();
        for (name, value) in iter {
            out.bind(name, value);
        }
        out
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.iter().map(|(n, v)| format!("{n}={v}")).join(" "))
    }
}

/// Evaluates `term` in `model` under `assignment`.
pub fn eval(term: &Term, model: &FiniteModel, assignment: &Assignment) -> Result<usize, ModelError> {
    match term {
        Term::Var(name) => {
            let value = assignment.get(name).ok_or_else(|| ModelError::UnboundVariable(name.clone()))?;
            if value >= model.size {
                return Err(ModelError::AssignmentOutOfRange { name: name.clone(), value, size: model.size });
            }
            Ok(value)
        }
        Term::App(args) => {
            let a = eval(&args[0], model, assignment)?;
            let b = eval(&args[1], model, assignment)?;
            let c = eval(&args[2], model, assignment)?;
            Ok(model.apply(a, b, c))
        }
    }
}

/// A term with variables replaced by slot indices into a value array.
enum SlotTerm {
    Var(usize),
    App(Box<[SlotTerm; 3]>),
}

impl SlotTerm {
    fn compile(term: &Term, order: &[String]) -> SlotTerm {
        match term {
            Term::Var(name) => SlotTerm::Var(order.iter().position(|v| v == name).expect("variable in order")),
            Term::App(args) => SlotTerm::App(Box::new([
                SlotTerm::compile(&args[0], order),
                SlotTerm::compile(&args[1], order),
                SlotTerm::compile(&args[2], order),
            ])),
        }
    }

    fn eval(&self, model: &FiniteModel, values: &[usize]) -> usize {
        match self {
            SlotTerm::Var(slot) => values[*slot],
            SlotTerm::App(args) => {
                model.apply(args[0].eval(model, values), args[1].eval(model, values), args[2].eval(model, values))
            }
        }
    }
}

/// Steps `values` to the next assignment (last position fastest).
/// Returns false once every assignment has been visited.
fn next_assignment(values: &mut [usize], size: usize) -> bool {
    for slot in values.iter_mut().rev() {
        *slot += 1;
        if *slot < size {
            return true;
        }
        *slot = 0;
    }
    false
}

fn first_failure(model: &FiniteModel, identity: &Identity) -> Option<Assignment> {
    let order = identity.variable_order();
    let lhs = SlotTerm::compile(&identity.lhs, &order);
    let rhs = SlotTerm::compile(&identity.rhs, &order);
    let mut values = vec![0; order.len()];
    loop {
        if lhs.eval(model, &values) != rhs.eval(model, &values) {
            return Some(order.iter().cloned().zip(values.iter().copied()).collect());
        }
        if !next_assignment(&mut values, model.size) {
            return None;
        }
    }
}

/// True iff both sides agree under all `n^k` assignments.
pub fn holds(model: &FiniteModel, identity: &Identity) -> bool {
    first_failure(model, identity).is_none()
}

/// The lexicographically first failing assignment, enumerating variables in
/// `variable_order` with the last variable fastest.
pub fn counterexample(model: &FiniteModel, identity: &Identity) -> Option<Assignment> {
    first_failure(model, identity)
}

/// One line of a [`profile`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub name: String,
    pub holds: bool,
    pub counterexample: Option<Assignment>,
}

/// Checks every identity of `system`, in system order.
pub fn profile(model: &FiniteModel, system: &AxiomSystem) -> Vec<ProfileEntry> {
    system
        .identities
        .iter()
        .map(|id| {
            let counterexample = counterexample(model, id);
            ProfileEntry { name: id.display_name(), holds: counterexample.is_none(), counterexample }
        })
        .collect()
}

/// True iff every identity holds.
pub fn satisfies_all<'a>(model: &FiniteModel, identities: impl IntoIterator<Item = &'a Identity>) -> bool {
    identities.into_iter().all(|id| holds(model, id))
}

fn is_isomorphism(m1: &FiniteModel, m2: &FiniteModel, perm: &[usize]) -> bool {
    let n = m1.size;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if perm[m1.apply(a, b, c)] != m2.apply(perm[a], perm[b], perm[c]) {
                    return false;
                }
            }
        }
    }
    true
}

/// The lexicographically first permutation `p` with
/// `p(m1(a,b,c)) = m2(p(a),p(b),p(c))`, if any.
pub fn isomorphic(m1: &FiniteModel, m2: &FiniteModel) -> Option<Vec<usize>> {
    if m1.size != m2.size {
        return None;
    }
    (0..m1.size).permutations(m1.size).find(|perm| is_isomorphism(m1, m2, perm))
}

/// The lexicographically least table among all relabellings of `model`.
pub fn canonical_form(model: &FiniteModel) -> Result<FiniteModel, ModelError> {
    if model.size > MAX_CANONICAL_SIZE {
        return Err(ModelError::SizeCap { size: model.size, cap: MAX_CANONICAL_SIZE });
    }
    let n = model.size;
    let mut best = model.clone();
    let mut candidate = vec![0; model.table.len()];
    for perm in (0..n).permutations(n) {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    candidate[(perm[a] * n + perm[b]) * n + perm[c]] = perm[model.apply(a, b, c)];
                }
            }
        }
        if candidate < best.table {
            best.table.copy_from_slice(&candidate);
        }
    }
    Ok(best)
}

/// True iff `model` equals its canonical form.
pub fn is_canonical(model: &FiniteModel) -> Result<bool, ModelError> {
    Ok(canonical_form(model)? == *model)
}
