//! Finite-model finder for the ternary signature.
//!
//! Depth-first search over the `n^3` table cells in lexicographic order,
//! trying values in ascending order. Every `satisfy` identity is grounded
//! into all of its `n^k` instances. Each instance sits in the watch list of
//! exactly one cell:
//!
//! * while it cannot be evaluated, the first unassigned cell its evaluation
//!   is blocked on;
//! * once both sides evaluate, the most recently assigned cell it read.
//!
//! When a cell is assigned its watchers are re-evaluated: a mismatch is a
//! conflict, and an instance whose one side is known and whose other side is
//! a single unassigned lookup forces that cell (unit propagation). Watch
//! moves are recorded on the trail and undone on backtrack, so after every
//! backtrack the watch lists are exactly what they were before the branch.
//!
//! `violate` identities are only checked on complete tables.

use std::collections::VecDeque;
use std::thread;

use thiserror::Error;

use crate::catalog::AxiomSystem;
use crate::model::{canonical_form, holds, FiniteModel, MAX_CANONICAL_SIZE};
use crate::terms::{Identity, Term};

/// Largest model size the search accepts.
pub const MAX_SEARCH_SIZE: usize = 7;

const _: () = assert!(MAX_SEARCH_SIZE <= MAX_CANONICAL_SIZE);

const UNSET: u8 = u8::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("model size {size} outside the supported range 1..={cap}")]
    SizeCap { size: usize, cap: usize },
    #[error("result limit must be at least 1")]
    ZeroLimit,
}

/// A model-search query.
#[derive(Clone, Debug)]
pub struct SearchSpec {
    pub size: usize,
    pub satisfy: AxiomSystem,
    /// Each of these must fail under at least one assignment.
    pub violate: Vec<Identity>,
    pub limit: Option<usize>,
    /// Emit only the canonical representative of each isomorphism class.
    pub dedup: bool,
}

impl SearchSpec {
    pub fn new(size: usize, satisfy: AxiomSystem) -> Self {
        SearchSpec { size, satisfy, violate: Vec::new(), limit: None, dedup: false }
    }

    pub fn violate(mut self, violate: Vec<Identity>) -> Self {
        self.violate = violate;
        self
    }

    pub fn limit(mut self, limit: usize) -> Self {
        self.limit = Some(limit);
        self
    }

    pub fn dedup(mut self, dedup: bool) -> Self {
        self.dedup = dedup;
        self
    }

    fn validate(&self) -> Result<(), SearchError> {
        if self.size == 0 || self.size > MAX_SEARCH_SIZE {
            return Err(SearchError::SizeCap { size: self.size, cap: MAX_SEARCH_SIZE });
        }
        if self.limit == Some(0) {
            return Err(SearchError::ZeroLimit);
        }
        Ok(())
    }
}

/// Finds models sequentially. Output is sorted by table.
pub fn find_models(spec: &SearchSpec) -> Result<Vec<FiniteModel>, SearchError> {
    find_models_with_workers(spec, 1)
}

/// Finds models, splitting the tree at the first branching cell across up to
/// `workers` threads. The result does not depend on `workers`.
pub fn find_models_with_workers(spec: &SearchSpec, workers: usize) -> Result<Vec<FiniteModel>, SearchError> {
    spec.validate()?;
    let program = Program::compile(spec);
    let mut root = Solver::new(&program);
    if !root.init() {
        return Ok(Vec::new());
    }
    let Some(first) = root.next_unassigned(0) else {
        let mut out = Collector::new(spec);
        root.leaf(&mut out);
        return Ok(out.models);
    };

    let values: Vec<u8> = (0..spec.size as u8).collect();
    let workers = workers.clamp(1, values.len());
    let mut per_value: Vec<(u8, Vec<FiniteModel>)> = if workers == 1 {
        values.iter().map(|&v| (v, root.clone().explore_branch(first, v))).collect()
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let root = &root;
                    let mine: Vec<u8> = values.iter().copied().skip(w).step_by(workers).collect();
                    scope.spawn(move || {
                        mine.into_iter().map(|v| (v, root.clone().explore_branch(first, v))).collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("search worker panicked")).collect()
        })
    };
    per_value.sort_by_key(|(v, _)| *v);
    let mut models: Vec<FiniteModel> = per_value.into_iter().flat_map(|(_, ms)| ms).collect();
    models.sort();
    if let Some(limit) = spec.limit {
        models.truncate(limit);
    }
    Ok(models)
}

/// Number of models (or isomorphism classes, with `dedup`) of `satisfy`.
pub fn count_models(size: usize, satisfy: &AxiomSystem, dedup: bool) -> Result<usize, SearchError> {
    count_models_with_workers(size, satisfy, dedup, 1)
}

pub fn count_models_with_workers(
    size: usize,
    satisfy: &AxiomSystem,
    dedup: bool,
    workers: usize,
) -> Result<usize, SearchError> {
    let spec = SearchSpec::new(size, satisfy.clone()).dedup(dedup);
    Ok(find_models_with_workers(&spec, workers)?.len())
}

/// A term node in postfix order; children always precede their parent.
#[derive(Clone, Copy, Debug)]
enum Node {
    Var(u8),
    App([u16; 3]),
}

fn compile_term(term: &Term, order: &[String], nodes: &mut Vec<Node>) -> u16 {
    let node = match term {
        Term::Var(name) => Node::Var(order.iter().position(|v| v == name).expect("variable in order") as u8),
        Term::App(args) => {
            let a = compile_term(&args[0], order, nodes);
            let b = compile_term(&args[1], order, nodes);
            let c = compile_term(&args[2], order, nodes);
            Node::App([a, b, c])
        }
    };
    nodes.push(node);
    (nodes.len() - 1) as u16
}

struct CompiledIdentity {
    lhs: Vec<Node>,
    rhs: Vec<Node>,
}

/// Immutable, shareable compiled form of a [`SearchSpec`].
struct Program<'a> {
    spec: &'a SearchSpec,
    n: usize,
    identities: Vec<CompiledIdentity>,
    /// `(identity, offset into values)` per ground instance.
    instances: Vec<(u32, u32)>,
    values: Vec<u8>,
    scratch_len: usize,
}

impl<'a> Program<'a> {
    fn compile(spec: &'a SearchSpec) -> Self {
        let n = spec.size;
        let mut identities = Vec::new();
        let mut instances = Vec::new();
        let mut values = Vec::new();
        let mut scratch_len = 0;
        for (idx, id) in spec.satisfy.identities.iter().enumerate() {
            let order = id.variable_order();
            let mut lhs = Vec::new();
            compile_term(&id.lhs, &order, &mut lhs);
            let mut rhs = Vec::new();
            compile_term(&id.rhs, &order, &mut rhs);
            scratch_len = scratch_len.max(lhs.len()).max(rhs.len());
            identities.push(CompiledIdentity { lhs, rhs });

            let k = order.len();
            let mut assignment = vec![0u8; k];
            loop {
                instances.push((idx as u32, values.len() as u32));
                values.extend_from_slice(&assignment);
                if !step(&mut assignment, n as u8) {
                    break;
                }
            }
        }
        Program { spec, n, identities, instances, values, scratch_len }
    }
}

fn step(assignment: &mut [u8], n: u8) -> bool {
    for slot in assignment.iter_mut().rev() {
        *slot += 1;
        if *slot < n {
            return true;
        }
        *slot = 0;
    }
    false
}

enum Side {
    Known(u8),
    /// Blocked on the outermost lookup; all of its arguments are known.
    Top(usize),
    /// Blocked on an inner lookup.
    Inner(usize),
}

enum Outcome {
    Conflict,
    /// Fully evaluated and equal; carries the latest-assigned cell read, if any.
    Satisfied(Option<usize>),
    Unit(usize, u8),
    Blocked(usize),
}

#[derive(Clone, Copy)]
enum TrailEntry {
    Assign(usize),
    Move { inst: u32, from: u32, to: u32 },
}

struct Collector<'s> {
    spec: &'s SearchSpec,
    models: Vec<FiniteModel>,
}

impl<'s> Collector<'s> {
    fn new(spec: &'s SearchSpec) -> Self {
        Collector { spec, models: Vec::new() }
    }

    fn full(&self) -> bool {
        self.spec.limit.is_some_and(|l| self.models.len() >= l)
    }
}

#[derive(Clone)]
struct Solver<'p> {
    program: &'p Program<'p>,
    table: Vec<u8>,
    /// Trail position at which each assigned cell was set.
    stamp: Vec<u32>,
    watches: Vec<Vec<u32>>,
    trail: Vec<TrailEntry>,
    queue: VecDeque<usize>,
    scratch: Vec<u8>,
}

impl<'p> Solver<'p> {
    fn new(program: &'p Program<'p>) -> Self {
        let cells = program.n.pow(3);
        Solver {
            program,
            table: vec![UNSET; cells],
            stamp: vec![0; cells],
            watches: vec![Vec::new(); cells],
            trail: Vec::new(),
            queue: VecDeque::new(),
            scratch: vec![0; program.scratch_len],
        }
    }

    /// Root-level evaluation and propagation. False if no model exists.
    fn init(&mut self) -> bool {
        for inst in 0..self.program.instances.len() as u32 {
            match self.evaluate(inst) {
                Outcome::Conflict => return false,
                Outcome::Satisfied(None) => {}
                Outcome::Satisfied(Some(cell)) | Outcome::Blocked(cell) => self.watches[cell].push(inst),
                Outcome::Unit(cell, value) => {
                    self.assign(cell, value);
                    self.watches[cell].push(inst);
                }
            }
        }
        self.propagate()
    }

    fn assign(&mut self, cell: usize, value: u8) {
        debug_assert_eq!(self.table[cell], UNSET);
        self.table[cell] = value;
        self.stamp[cell] = self.trail.len() as u32;
        self.trail.push(TrailEntry::Assign(cell));
        self.queue.push_back(cell);
    }

    fn eval_side(&mut self, side: bool, inst: u32, latest: &mut Option<usize>) -> Side {
        let program = self.program;
        let (ident, offset) = program.instances[inst as usize];
        let compiled = &program.identities[ident as usize];
        let nodes = if side { &compiled.rhs } else { &compiled.lhs };
        let vars = &program.values[offset as usize..];
        let n = program.n;
        let root = nodes.len() - 1;
        for (i, node) in nodes.iter().enumerate() {
            self.scratch[i] = match *node {
                Node::Var(slot) => vars[slot as usize],
                Node::App([a, b, c]) => {
                    let (a, b, c) = (self.scratch[a as usize], self.scratch[b as usize], self.scratch[c as usize]);
                    let cell = (a as usize * n + b as usize) * n + c as usize;
                    let value = self.table[cell];
                    if value == UNSET {
                        // Every node feeds the root, so the first blocked
                        // lookup decides the side.
                        return if i == root { Side::Top(cell) } else { Side::Inner(cell) };
                    }
                    if latest.map_or(true, |l| self.stamp[cell] > self.stamp[l]) {
                        *latest = Some(cell);
                    }
                    value
                }
            };
        }
        Side::Known(self.scratch[root])
    }

    fn evaluate(&mut self, inst: u32) -> Outcome {
        let mut latest = None;
        let lhs = self.eval_side(false, inst, &mut latest);
        if let Side::Inner(cell) = lhs {
            return Outcome::Blocked(cell);
        }
        let rhs = self.eval_side(true, inst, &mut latest);
        match (lhs, rhs) {
            (Side::Known(a), Side::Known(b)) => {
                if a == b {
                    Outcome::Satisfied(latest)
                } else {
                    Outcome::Conflict
                }
            }
            (Side::Known(v), Side::Top(cell)) | (Side::Top(cell), Side::Known(v)) => Outcome::Unit(cell, v),
            (Side::Top(cell) | Side::Inner(cell), _) | (Side::Known(_), Side::Inner(cell)) => Outcome::Blocked(cell),
        }
    }

    fn propagate(&mut self) -> bool {
        while let Some(cell) = self.queue.pop_front() {
            let mut list = std::mem::take(&mut self.watches[cell]);
            let mut k = 0;
            let mut conflict = false;
            while k < list.len() {
                let inst = list[k];
                let target = match self.evaluate(inst) {
                    Outcome::Conflict => {
                        conflict = true;
                        break;
                    }
                    Outcome::Satisfied(None) => cell,
                    Outcome::Satisfied(Some(to)) | Outcome::Blocked(to) => to,
                    Outcome::Unit(to, value) => {
                        self.assign(to, value);
                        to
                    }
                };
                if target == cell {
                    k += 1;
                } else {
                    list.swap_remove(k);
                    self.watches[target].push(inst);
                    self.trail.push(TrailEntry::Move { inst, from: cell as u32, to: target as u32 });
                }
            }
            self.watches[cell] = list;
            if conflict {
                self.queue.clear();
                return false;
            }
        }
        true
    }

    fn backtrack(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().expect("trail above mark") {
                TrailEntry::Assign(cell) => self.table[cell] = UNSET,
                TrailEntry::Move { inst, from, to } => {
                    let list = &mut self.watches[to as usize];
                    let pos = list.iter().rposition(|&i| i == inst).expect("moved instance is watched");
                    list.swap_remove(pos);
                    self.watches[from as usize].push(inst);
                }
            }
        }
    }

    fn next_unassigned(&self, from: usize) -> Option<usize> {
        (from..self.table.len()).find(|&c| self.table[c] == UNSET)
    }

    fn try_value(&mut self, cell: usize, value: u8) -> bool {
        self.assign(cell, value);
        self.propagate()
    }

    fn explore_branch(mut self, cell: usize, value: u8) -> Vec<FiniteModel> {
        let mut out = Collector::new(self.program.spec);
        if self.try_value(cell, value) {
            self.dfs(cell + 1, &mut out);
        }
        out.models
    }

    /// Returns true once the collector is full.
    fn dfs(&mut self, from: usize, out: &mut Collector) -> bool {
        let Some(cell) = self.next_unassigned(from) else {
            self.leaf(out);
            return out.full();
        };
        for value in 0..self.program.n as u8 {
            let mark = self.trail.len();
            if self.try_value(cell, value) && self.dfs(cell + 1, out) {
                self.backtrack(mark);
                return true;
            }
            self.backtrack(mark);
        }
        false
    }

    fn leaf(&self, out: &mut Collector) {
        let spec = out.spec;
        let table = self.table.iter().map(|&v| v as usize).collect();
        let model = FiniteModel::new(spec.size, table).expect("complete table");
        debug_assert!(spec.satisfy.identities.iter().all(|id| holds(&model, id)));
        if spec.violate.iter().any(|id| holds(&model, id)) {
            return;
        }
        if spec.dedup && canonical_form(&model).expect("size within cap") != model {
            return;
        }
        out.models.push(model);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{get_system, identity, paper_example};
    use crate::model::isomorphic;
    use crate::terms::parse_identity;

    fn system(names: &[&str]) -> AxiomSystem {
        AxiomSystem::new("query", names.iter().map(|n| identity(n).unwrap()).collect())
    }

    fn ids(names: &[&str]) -> Vec<Identity> {
        names.iter().map(|n| identity(n).unwrap()).collect()
    }

    /// Every table of the given size, filtered with the model checker.
    fn brute_force(size: usize, satisfy: &[Identity], violate: &[Identity]) -> Vec<FiniteModel> {
        let cells = size.pow(3);
        let total = size.pow(cells as u32);
        let mut out = Vec::new();
        for code in 0..total {
            let mut rest = code;
            let mut table = vec![0; cells];
            for slot in table.iter_mut().rev() {
                *slot = rest % size;
                rest /= size;
            }
            let m = FiniteModel::new(size, table).unwrap();
            if satisfy.iter().all(|id| holds(&m, id)) && violate.iter().all(|id| !holds(&m, id)) {
                out.push(m);
            }
        }
        out
    }

    #[test]
    fn n1_without_n2_at_size_two() {
        let spec = SearchSpec::new(2, system(&["N1"])).violate(ids(&["N2"]));
        let found = find_models(&spec).unwrap();
        assert!(!found.is_empty());
        let target = paper_example("notN2").unwrap().model;
        assert!(found.iter().any(|m| isomorphic(m, &target).is_some()));
    }

    #[test]
    fn not_h1_query_contains_all_ones() {
        let spec = SearchSpec::new(2, system(&["H2", "H4", "H7", "H8"])).violate(ids(&["H1"]));
        let found = find_models(&spec).unwrap();
        assert!(found.contains(&FiniteModel::constant(2, 1).unwrap()));
    }

    #[test]
    fn trivial_model() {
        let found = find_models(&SearchSpec::new(1, get_system("TWO_BASE").unwrap())).unwrap();
        assert_eq!(found, vec![FiniteModel::constant(1, 0).unwrap()]);
        assert_eq!(count_models(1, &get_system("TWO_BASE").unwrap(), false).unwrap(), 1);
    }

    #[test]
    fn two_base_counts_at_size_two_match_brute_force() {
        let two = get_system("TWO_BASE").unwrap();
        let oracle = brute_force(2, &two.identities, &[]);
        assert_eq!(oracle.len(), 2);
        let mut classes: Vec<_> = oracle.iter().map(|m| canonical_form(m).unwrap()).collect();
        classes.sort();
        classes.dedup();
        assert_eq!(classes.len(), 1);
        assert_eq!(count_models(2, &two, false).unwrap(), 2);
        assert_eq!(count_models(2, &two, true).unwrap(), 1);
    }

    #[test]
    fn errors() {
        let two = get_system("TWO_BASE").unwrap();
        assert_eq!(
            find_models(&SearchSpec::new(0, two.clone())),
            Err(SearchError::SizeCap { size: 0, cap: MAX_SEARCH_SIZE })
        );
        assert_eq!(
            count_models(MAX_SEARCH_SIZE + 1, &two, false),
            Err(SearchError::SizeCap { size: MAX_SEARCH_SIZE + 1, cap: MAX_SEARCH_SIZE })
        );
        assert_eq!(find_models(&SearchSpec::new(2, two).limit(0)), Err(SearchError::ZeroLimit));
    }

    #[test]
    fn variable_only_identities() {
        let refl = AxiomSystem::new("r", vec![parse_identity("x = x").unwrap()]);
        assert_eq!(count_models(1, &refl, false).unwrap(), 1);
        assert_eq!(count_models(2, &refl, false).unwrap(), 256);
        let collapse = AxiomSystem::new("c", vec![parse_identity("x = y").unwrap()]);
        assert_eq!(count_models(1, &collapse, false).unwrap(), 1);
        assert_eq!(count_models(2, &collapse, false).unwrap(), 0);
    }

    #[test]
    fn empty_system_enumerates_everything() {
        let empty = AxiomSystem::new("empty", vec![]);
        let all = find_models(&SearchSpec::new(2, empty.clone())).unwrap();
        assert_eq!(all.len(), 256);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        // Burnside: the swap fixes 2^4 of the 256 tables.
        assert_eq!(count_models(2, &empty, true).unwrap(), 136);
    }

    #[test]
    fn limit_truncates_in_order() {
        let spec = SearchSpec::new(2, AxiomSystem::new("empty", vec![]));
        let all = find_models(&spec).unwrap();
        let first = find_models(&spec.clone().limit(5)).unwrap();
        assert_eq!(first, all[..5]);
        let par = find_models_with_workers(&spec.limit(5), 2).unwrap();
        assert_eq!(par, first);
    }

    #[test]
    fn agrees_with_brute_force_at_size_two() {
        let queries: [(&[&str], &[&str]); 8] = [
            (&["N1"], &[]),
            (&["N2"], &[]),
            (&["H2", "H4"], &[]),
            (&["H1", "H2", "H4", "H7"], &["H8"]),
            (&["P1", "P2", "P5", "P6", "P7", "P8"], &["P4"]),
            (&["H8'"], &[]),
            (&["useful1", "preH4e"], &["H4"]),
            (&["P5", "hick19"], &[]),
        ];
        for (sat, vio) in queries {
            let spec = SearchSpec::new(2, system(sat)).violate(ids(vio));
            let found = find_models(&spec).unwrap();
            assert_eq!(found, brute_force(2, &spec.satisfy.identities, &spec.violate), "{sat:?} / {vio:?}");
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let spec = SearchSpec::new(3, system(&["H1", "H2", "H4", "H7"])).violate(ids(&["H8"]));
        let seq = find_models(&spec).unwrap();
        for workers in [2, 3, 8] {
            assert_eq!(find_models_with_workers(&spec, workers).unwrap(), seq);
        }
        assert!(!seq.is_empty());
    }

    #[test]
    fn emitted_models_recertify() {
        let spec = SearchSpec::new(3, get_system("CHAJDA_BASIS").unwrap());
        for m in find_models(&spec).unwrap() {
            assert!(spec.satisfy.identities.iter().all(|id| holds(&m, id)));
        }
    }

    #[test]
    fn dedup_emits_canonical_representatives() {
        let two = get_system("TWO_BASE").unwrap();
        let all = find_models(&SearchSpec::new(3, two.clone())).unwrap();
        let reps = find_models(&SearchSpec::new(3, two).dedup(true)).unwrap();
        let mut classes: Vec<_> = all.iter().map(|m| canonical_form(m).unwrap()).collect();
        classes.sort();
        classes.dedup();
        assert_eq!(reps, classes);
    }
}
