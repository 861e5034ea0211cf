//! Order-theoretic presentation of a ternary model: the join semilattice
//! `x ∨ y = m(x,x,y)`, the induced order, principal filters
//! `(a] = {x : a ≤ x}`, and filter meets `x ∧_a y = m(x,y,a)`.
//!
//! [`to_order_structure`] certifies a model as a nearlattice by checking
//! every law eagerly; [`from_order_structure`] rebuilds the ternary
//! operation as `m(x,y,z) = (x ∨ z) ∧_z (y ∨ z)`.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use thiserror::Error;

use crate::model::FiniteModel;

/// The first law a candidate structure breaks, with a witness.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("join not idempotent at ({0})")]
    JoinNotIdempotent(usize),
    #[error("join not commutative at ({0},{1})")]
    JoinNotCommutative(usize, usize),
    #[error("join not associative at ({0},{1},{2})")]
    JoinNotAssociative(usize, usize, usize),
    #[error("order not reflexive at ({0})")]
    NotReflexive(usize),
    #[error("order not antisymmetric at ({0},{1})")]
    NotAntisymmetric(usize, usize),
    #[error("order not transitive at ({0},{1},{2})")]
    NotTransitive(usize, usize, usize),
    #[error("filter ({a}] not upward closed: {x} in filter, {x} <= {y}, {y} not in filter")]
    FilterNotUpwardClosed { a: usize, x: usize, y: usize },
    #[error("filter ({a}] not closed under join at ({x},{y})")]
    FilterNotJoinClosed { a: usize, x: usize, y: usize },
    #[error("{a} is not the least element of its filter")]
    FilterNotRooted { a: usize },
    #[error("meet of {x} and {y} in ({a}] is missing")]
    MeetMissing { a: usize, x: usize, y: usize },
    #[error("meet given for {x} and {y} outside ({a}]")]
    MeetOutsideDomain { a: usize, x: usize, y: usize },
    #[error("meet of {x} and {y} in ({a}] is {value}, which lies outside the filter")]
    MeetOutsideFilter { a: usize, x: usize, y: usize, value: usize },
    #[error("meet of {x} and {y} in ({a}] is {value}, which is not a lower bound")]
    MeetNotLowerBound { a: usize, x: usize, y: usize, value: usize },
    #[error("meet of {x} and {y} in ({a}] is {value}, but {below} is a larger lower bound")]
    MeetNotGreatest { a: usize, x: usize, y: usize, value: usize, below: usize },
    #[error("malformed order structure: {0}")]
    Malformed(String),
}

/// A finite join semilattice with a meet table on every principal filter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderStructure {
    size: usize,
    join: Vec<usize>,
    leq: Vec<bool>,
    filters: Vec<Vec<usize>>,
    /// Indexed `[a][x][y]`; `Some` exactly when `x, y ∈ (a]`.
    filter_meet: Vec<Option<usize>>,
}

impl OrderStructure {
    /// Builds and validates a structure from a row-major join table and
    /// `(a, x, y, x ∧_a y)` records.
    pub fn new(
        size: usize,
        join: Vec<usize>,
        meets: impl IntoIterator<Item = (usize, usize, usize, usize)>,
    ) -> Result<Self, OrderError> {
        if size == 0 {
            return Err(OrderError::Malformed("empty carrier".into()));
        }
        if join.len() != size * size {
            return Err(OrderError::Malformed(format!("join table has {} entries, expected {}", join.len(), size * size)));
        }
        if let Some(v) = join.iter().find(|&&v| v >= size) {
            return Err(OrderError::Malformed(format!("join entry {v} outside 0..{size}")));
        }
        let mut filter_meet = vec![None; size * size * size];
        for (a, x, y, v) in meets {
            if [a, x, y, v].iter().any(|&e| e >= size) {
                return Err(OrderError::Malformed(format!("meet record {a} {x} {y} {v} outside 0..{size}")));
            }
            filter_meet[(a * size + x) * size + y] = Some(v);
        }
        let leq = (0..size)
            .cartesian_product(0..size)
            .map(|(x, y)| join[x * size + y] == y)
            .collect::<Vec<_>>();
        let filters = (0..size).map(|a| (0..size).filter(|&x| leq[a * size + x]).collect()).collect();
        let structure = OrderStructure { size, join, leq, filters, filter_meet };
        structure.validate()?;
        Ok(structure)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn join(&self, x: usize, y: usize) -> usize {
        self.join[x * self.size + y]
    }

    pub fn join_table(&self) -> &[usize] {
        &self.join
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.leq[x * self.size + y]
    }

    /// The principal filter `(a]`, ascending.
    pub fn filter(&self, a: usize) -> &[usize] {
        &self.filters[a]
    }

    pub fn in_filter(&self, a: usize, x: usize) -> bool {
        self.leq(a, x)
    }

    /// `x ∧_a y`, or `None` when `x` or `y` is outside `(a]`.
    pub fn filter_meet(&self, a: usize, x: usize, y: usize) -> Option<usize> {
        self.filter_meet[(a * self.size + x) * self.size + y]
    }

    /// Every `(a, x, y, x ∧_a y)` record in lexicographic order.
    pub fn meet_records(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        let n = self.size;
        (0..n)
            .flat_map(move |a| self.filters[a].iter().flat_map(move |&x| self.filters[a].iter().map(move |&y| (a, x, y))))
            .map(move |(a, x, y)| (a, x, y, self.filter_meet(a, x, y).expect("validated")))
    }

    /// Checks every invariant, reporting the first violation found.
    pub fn validate(&self) -> Result<(), OrderError> {
        let n = self.size;
        let j = |x: usize, y: usize| self.join(x, y);
        for x in 0..n {
            if j(x, x) != x {
                return Err(OrderError::JoinNotIdempotent(x));
            }
        }
        for (x, y) in (0..n).cartesian_product(0..n) {
            if j(x, y) != j(y, x) {
                return Err(OrderError::JoinNotCommutative(x, y));
            }
        }
        for ((x, y), z) in (0..n).cartesian_product(0..n).cartesian_product(0..n) {
            if j(j(x, y), z) != j(x, j(y, z)) {
                return Err(OrderError::JoinNotAssociative(x, y, z));
            }
        }

        let le = |x: usize, y: usize| self.leq(x, y);
        for x in 0..n {
            if !le(x, x) {
                return Err(OrderError::NotReflexive(x));
            }
        }
        for (x, y) in (0..n).cartesian_product(0..n) {
            if x != y && le(x, y) && le(y, x) {
                return Err(OrderError::NotAntisymmetric(x, y));
            }
        }
        for ((x, y), z) in (0..n).cartesian_product(0..n).cartesian_product(0..n) {
            if le(x, y) && le(y, z) && !le(x, z) {
                return Err(OrderError::NotTransitive(x, y, z));
            }
        }

        for a in 0..n {
            let filter = &self.filters[a];
            if !filter.contains(&a) || filter.iter().any(|&x| !le(a, x)) {
                return Err(OrderError::FilterNotRooted { a });
            }
            for (&x, y) in filter.iter().cartesian_product(0..n) {
                if le(x, y) && !self.in_filter(a, y) {
                    return Err(OrderError::FilterNotUpwardClosed { a, x, y });
                }
            }
            for (&x, &y) in filter.iter().cartesian_product(filter) {
                if !self.in_filter(a, j(x, y)) {
                    return Err(OrderError::FilterNotJoinClosed { a, x, y });
                }
            }
        }

        for ((a, x), y) in (0..n).cartesian_product(0..n).cartesian_product(0..n) {
            let inside = self.in_filter(a, x) && self.in_filter(a, y);
            let meet = self.filter_meet(a, x, y);
            let value = match (inside, meet) {
                (true, Some(value)) => value,
                (true, None) => return Err(OrderError::MeetMissing { a, x, y }),
                (false, Some(_)) => return Err(OrderError::MeetOutsideDomain { a, x, y }),
                (false, None) => continue,
            };
            if !self.in_filter(a, value) {
                return Err(OrderError::MeetOutsideFilter { a, x, y, value });
            }
            if !le(value, x) || !le(value, y) {
                return Err(OrderError::MeetNotLowerBound { a, x, y, value });
            }
            if let Some(&below) = self.filters[a].iter().find(|&&v| le(v, x) && le(v, y) && !le(v, value)) {
                return Err(OrderError::MeetNotGreatest { a, x, y, value, below });
            }
        }
        Ok(())
    }
}

/// Text format: `n`, the `n^2` join entries row-major on one line, then one
/// `a x y v` line per filter-meet record.
impl fmt::Display for OrderStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.size)?;
        writeln!(f, "{}", self.join.iter().join(" "))?;
        for (a, x, y, v) in self.meet_records() {
            writeln!(f, "{a} {x} {y} {v}")?;
        }
        Ok(())
    }
}

impl FromStr for OrderStructure {
    type Err = OrderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: String| OrderError::Malformed(msg);
        let numbers = |line: &str| -> Result<Vec<usize>, OrderError> {
            line.split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| bad(format!("bad number `{t}`"))))
                .collect()
        };
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let size_line = lines.next().ok_or_else(|| bad("missing size line".into()))?;
        let size = match numbers(size_line)?.as_slice() {
            [n] => *n,
            _ => return Err(bad(format!("bad size line `{size_line}`"))),
        };
        let join = numbers(lines.next().unwrap_or(""))?;
        let mut meets = Vec::new();
        for line in lines {
            match numbers(line)?.as_slice() {
                &[a, x, y, v] => meets.push((a, x, y, v)),
                _ => return Err(bad(format!("bad meet record `{line}`"))),
            }
        }
        OrderStructure::new(size, join, meets)
    }
}

/// Reads off `x ∨ y = m(x,x,y)` and `x ∧_a y = m(x,y,a)` and validates.
pub fn to_order_structure(model: &FiniteModel) -> Result<OrderStructure, OrderError> {
    let n = model.size();
    let join: Vec<usize> = (0..n).cartesian_product(0..n).map(|(x, y)| model.apply(x, x, y)).collect();
    // Meets are only recorded inside filters, so the filters must be known
    // first; compute them from the raw join table.
    let leq = |x: usize, y: usize| join[x * n + y] == y;
    let meets: Vec<_> = (0..n)
        .flat_map(|a| (0..n).cartesian_product(0..n).map(move |(x, y)| (a, x, y)))
        .filter(|&(a, x, y)| leq(a, x) && leq(a, y))
        .map(|(a, x, y)| (a, x, y, model.apply(x, y, a)))
        .collect();
    OrderStructure::new(n, join, meets)
}

/// `m(x,y,z) = (x ∨ z) ∧_z (y ∨ z)`.
pub fn from_order_structure(order: &OrderStructure) -> Result<FiniteModel, OrderError> {
    order.validate()?;
    let n = order.size();
    FiniteModel::from_fn(n, |x, y, z| {
        order.filter_meet(z, order.join(x, z), order.join(y, z)).expect("joins with z lie in (z]")
    })
    .map_err(|e| OrderError::Malformed(e.to_string()))
}

/// Whether rebuilding the model from its order structure reproduces its table.
pub fn round_trip_check(model: &FiniteModel) -> Result<bool, OrderError> {
    let order = to_order_structure(model)?;
    Ok(from_order_structure(&order)? == *model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{get_system, paper_example};
    use crate::model::{holds, profile};
    use crate::search::{find_models, SearchSpec};

    fn chain2() -> FiniteModel {
        FiniteModel::from_fn(2, |x, y, z| (x & y) | z).unwrap()
    }

    /// Join semilattice with minimal elements 0, 1 and top 2.
    fn vee() -> OrderStructure {
        let join = vec![0, 2, 2, 2, 1, 2, 2, 2, 2];
        let mut meets = Vec::new();
        for a in 0..3 {
            let up: Vec<usize> = (0..3).filter(|&x| join[a * 3 + x] == x).collect();
            for &x in &up {
                for &y in &up {
                    // Filters here are chains, so the meet is the smaller one.
                    let v = if join[x * 3 + y] == y { x } else { y };
                    meets.push((a, x, y, v));
                }
            }
        }
        OrderStructure::new(3, join, meets).unwrap()
    }

    #[test]
    fn chain_structure() {
        let o = to_order_structure(&chain2()).unwrap();
        assert_eq!(o.join_table(), [0, 1, 1, 1]);
        assert_eq!(o.filter(0), [0, 1]);
        assert_eq!(o.filter(1), [1]);
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(o.filter_meet(0, x, y), Some(x.min(y)));
            }
        }
        assert_eq!(o.filter_meet(1, 0, 1), None);
        assert!(o.leq(0, 1) && !o.leq(1, 0));
    }

    #[test]
    fn chain_rebuild() {
        let o = to_order_structure(&chain2()).unwrap();
        let m = from_order_structure(&o).unwrap();
        assert_eq!(m.apply(1, 0, 0), 0);
        assert_eq!(m.apply(0, 0, 1), 1);
        assert_eq!(m, chain2());
        assert!(round_trip_check(&chain2()).unwrap());
    }

    #[test]
    fn not_n1_fails_idempotence() {
        let m = paper_example("notN1").unwrap().model;
        assert_eq!(to_order_structure(&m), Err(OrderError::JoinNotIdempotent(0)));
        assert_eq!(round_trip_check(&m), Err(OrderError::JoinNotIdempotent(0)));
        assert_eq!(OrderError::JoinNotIdempotent(0).to_string(), "join not idempotent at (0)");
    }

    #[test]
    fn not_n2_outcome() {
        // m(0,0,1) = 0 but m(1,1,0) = 1: the derived join is not commutative,
        // so certification fails before any round trip is attempted.
        let m = paper_example("notN2").unwrap().model;
        assert_eq!(round_trip_check(&m), Err(OrderError::JoinNotCommutative(0, 1)));
    }

    #[test]
    fn vee_builds_a_two_base_model() {
        let m = from_order_structure(&vee()).unwrap();
        assert!(profile(&m, &get_system("TWO_BASE").unwrap()).iter().all(|e| e.holds));
        assert_eq!(m.apply(0, 1, 0), 0);
        assert_eq!(m.apply(0, 1, 2), 2);
        let back = to_order_structure(&m).unwrap();
        assert_eq!(back, vee());
    }

    #[test]
    fn text_format_round_trip() {
        let o = vee();
        let text = o.to_string();
        assert!(text.starts_with("3\n0 2 2 2 1 2 2 2 2\n0 0 0 0\n"));
        assert_eq!(text.parse::<OrderStructure>().unwrap(), o);
        assert!(matches!("3\n0 2\n".parse::<OrderStructure>(), Err(OrderError::Malformed(_))));
        assert!(matches!("2\n0 1 1 1\n0 0 0\n".parse::<OrderStructure>(), Err(OrderError::Malformed(_))));
    }

    #[test]
    fn malformed_structures() {
        // non-commutative join
        assert_eq!(OrderStructure::new(2, vec![0, 1, 0, 1], []), Err(OrderError::JoinNotCommutative(0, 1)));
        // chain with its meet missing
        assert_eq!(
            OrderStructure::new(2, vec![0, 1, 1, 1], [(0, 0, 0, 0), (0, 0, 1, 0), (0, 1, 0, 0), (1, 1, 1, 1)]),
            Err(OrderError::MeetMissing { a: 0, x: 1, y: 1 })
        );
        // meet that is not a lower bound
        assert_eq!(
            OrderStructure::new(2, vec![0, 1, 1, 1], [(0, 0, 0, 0), (0, 0, 1, 1), (0, 1, 0, 0), (0, 1, 1, 1), (1, 1, 1, 1)]),
            Err(OrderError::MeetNotLowerBound { a: 0, x: 0, y: 1, value: 1 })
        );
        // meet recorded outside the filter
        assert_eq!(
            OrderStructure::new(2, vec![0, 1, 1, 1], [(0, 0, 0, 0), (0, 0, 1, 0), (0, 1, 0, 0), (0, 1, 1, 1), (1, 1, 1, 1), (1, 0, 0, 0)]),
            Err(OrderError::MeetOutsideDomain { a: 1, x: 0, y: 0 })
        );
    }

    #[test]
    fn constant_zero_join_not_idempotent() {
        let m = FiniteModel::constant(2, 0).unwrap();
        assert_eq!(to_order_structure(&m), Err(OrderError::JoinNotIdempotent(1)));
    }

    fn two_base_models(max: usize) -> Vec<FiniteModel> {
        (1..=max)
            .flat_map(|n| find_models(&SearchSpec::new(n, get_system("TWO_BASE").unwrap())).unwrap())
            .collect()
    }

    #[test]
    fn two_base_models_certify_and_round_trip() {
        let models = two_base_models(4);
        assert!(models.len() > 20);
        let p8 = crate::catalog::identity("P8").unwrap();
        for m in &models {
            let o = to_order_structure(m).unwrap_or_else(|e| panic!("{m}: {e}"));
            assert!(round_trip_check(m).unwrap());
            assert!(holds(m, &p8));
            // to ∘ from reproduces join and meets
            let rebuilt = from_order_structure(&o).unwrap();
            assert_eq!(to_order_structure(&rebuilt).unwrap(), o);
        }
    }

    #[test]
    fn certified_models_have_true_meets() {
        for m in two_base_models(4) {
            let n = m.size();
            let o = to_order_structure(&m).unwrap();
            for (x, y) in (0..n).cartesian_product(0..n) {
                assert_eq!(m.apply(x, x, y) == y, o.leq(x, y));
            }
            for a in 0..n {
                for (&x, &y) in o.filter(a).iter().cartesian_product(o.filter(a)) {
                    let w = m.apply(x, y, a);
                    assert!(o.leq(a, w) && o.leq(w, x) && o.leq(w, y));
                    for &v in o.filter(a) {
                        if o.leq(v, x) && o.leq(v, y) {
                            assert!(o.leq(v, w));
                        }
                    }
                    assert_eq!(w, m.apply(y, x, a));
                }
            }
        }
    }
}
