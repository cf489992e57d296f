//! Pairwise causal ordering matrices.
//!
//! Entry `(i, j)` is `-1` when variable `i` precedes `j`, `+1` when it
//! follows, and `0` when the order of the pair is unknown.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::VariableId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrderingError {
    #[error("variable {0} appears in both the head and the tail list")]
    OverlappingLists(VariableId),
    #[error("variable {0} is listed more than once")]
    DuplicateEntry(VariableId),
    #[error("variable {0} is not part of the id universe")]
    UnknownVariable(VariableId),
    #[error("entries must be a {0}x{0} matrix over {{-1, 0, 1}} with zero diagonal and antisymmetric off-diagonal")]
    InvalidEntries(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawOrdering")]
pub struct CausalOrderingMatrix {
    variable_ids: Vec<VariableId>,
    entries: Vec<Vec<i8>>,
}

#[derive(Deserialize)]
struct RawOrdering {
    variable_ids: Vec<VariableId>,
    entries: Vec<Vec<i8>>,
}

impl TryFrom<RawOrdering> for CausalOrderingMatrix {
    type Error = OrderingError;

    fn try_from(raw: RawOrdering) -> Result<Self, Self::Error> {
        Self::from_entries(raw.variable_ids, raw.entries)
    }
}

impl CausalOrderingMatrix {
    /// Matrix with every pair unknown.
    pub fn unknown(variable_ids: Vec<VariableId>) -> Self {
        let d = variable_ids.len();
        Self { variable_ids, entries: vec![vec![0; d]; d] }
    }

    pub fn from_entries(
        variable_ids: Vec<VariableId>,
        entries: Vec<Vec<i8>>,
    ) -> Result<Self, OrderingError> {
        let d = variable_ids.len();
        let shape_ok = entries.len() == d && entries.iter().all(|r| r.len() == d);
        if !shape_ok {
            return Err(OrderingError::InvalidEntries(d));
        }
        for i in 0..d {
            if entries[i][i] != 0 {
                return Err(OrderingError::InvalidEntries(d));
            }
            for j in 0..d {
                let v = entries[i][j];
                if !(-1..=1).contains(&v) || v != -entries[j][i] {
                    return Err(OrderingError::InvalidEntries(d));
                }
            }
        }
        Ok(Self { variable_ids, entries })
    }

    pub fn variable_ids(&self) -> &[VariableId] {
        &self.variable_ids
    }

    pub fn entries(&self) -> &[Vec<i8>] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.variable_ids.len()
    }

    pub fn position(&self, id: VariableId) -> Option<usize> {
        self.variable_ids.iter().position(|&v| v == id)
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i][j]
    }

    /// Entry for a pair of variable ids, if both are present.
    pub fn get_by_id(&self, a: VariableId, b: VariableId) -> Option<i8> {
        Some(self.entries[self.position(a)?][self.position(b)?])
    }

    /// Sets `(i, j)` to `value` and `(j, i)` to `-value`.
    pub fn set(&mut self, i: usize, j: usize, value: i8) {
        debug_assert!(i != j && (-1..=1).contains(&value));
        self.entries[i][j] = value;
        self.entries[j][i] = -value;
    }

    /// Number of unordered pairs with a known order.
    pub fn decided_pairs(&self) -> usize {
        let d = self.dim();
        (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).filter(|&(i, j)| self.entries[i][j] != 0).count()
    }

    /// Whether row `i` has no unknown off-diagonal entry.
    pub fn row_decided(&self, i: usize) -> bool {
        self.entries[i].iter().enumerate().all(|(j, &v)| j == i || v != 0)
    }

    /// True when the "precedes" relation contains a directed cycle, i.e. no
    /// total order is consistent with every decided pair.
    pub fn has_cycle(&self) -> bool {
        let d = self.dim();
        let mut indegree: Vec<usize> = (0..d)
            .map(|j| (0..d).filter(|&i| self.entries[i][j] == -1).count())
            .collect();
        let mut ready: Vec<usize> = (0..d).filter(|&j| indegree[j] == 0).collect();
        let mut seen = 0;
        while let Some(i) = ready.pop() {
            seen += 1;
            for j in 0..d {
                if self.entries[i][j] == -1 {
                    indegree[j] -= 1;
                    if indegree[j] == 0 {
                        ready.push(j);
                    }
                }
            }
        }
        seen < d
    }

    /// CSV with a header row of ids and one row per variable.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id");
        for id in &self.variable_ids {
            let _ = write!(out, ",{id}");
        }
        out.push('\n');
        for (id, row) in self.variable_ids.iter().zip(&self.entries) {
            let _ = write!(out, "{id}");
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Head (top-down) and tail (bottom-up) variable sequences. Both are in
/// causal order: the first tail element is the earliest of the tail.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderedLists {
    pub k_head: Vec<VariableId>,
    pub k_tail: Vec<VariableId>,
}

impl OrderedLists {
    pub fn contains(&self, id: VariableId) -> bool {
        self.k_head.contains(&id) || self.k_tail.contains(&id)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Slot {
    Head(usize),
    Middle,
    Tail(usize),
}

/// Builds the ordering matrix implied by head and tail lists: the head
/// precedes everything else in list order, the tail follows everything else
/// in list order, and pairs of unlisted variables stay unknown.
pub fn build_ordering_matrix(
    lists: &OrderedLists,
    all_ids: &[VariableId],
) -> Result<CausalOrderingMatrix, OrderingError> {
    let universe: HashSet<VariableId> = all_ids.iter().copied().collect();
    let mut slots: HashMap<VariableId, Slot> = HashMap::new();
    for (k, &id) in lists.k_head.iter().enumerate() {
        if !universe.contains(&id) {
            return Err(OrderingError::UnknownVariable(id));
        }
        if slots.insert(id, Slot::Head(k)).is_some() {
            return Err(OrderingError::DuplicateEntry(id));
        }
    }
    for (k, &id) in lists.k_tail.iter().enumerate() {
        if !universe.contains(&id) {
            return Err(OrderingError::UnknownVariable(id));
        }
        match slots.insert(id, Slot::Tail(k)) {
            Some(Slot::Head(_)) => return Err(OrderingError::OverlappingLists(id)),
            Some(_) => return Err(OrderingError::DuplicateEntry(id)),
            None => {}
        }
    }
    let slot = |id: &VariableId| slots.get(id).copied().unwrap_or(Slot::Middle);
    let mut c = CausalOrderingMatrix::unknown(all_ids.to_vec());
    for (i, a) in all_ids.iter().enumerate() {
        for (j, b) in all_ids.iter().enumerate().skip(i + 1) {
            let (sa, sb) = (slot(a), slot(b));
            if sa == Slot::Middle && sb == Slot::Middle {
                continue;
            }
            match sa.cmp(&sb) {
                Ordering::Less => c.set(i, j, -1),
                Ordering::Greater => c.set(i, j, 1),
                Ordering::Equal => {}
            }
        }
    }
    Ok(c)
}

/// Ordering matrix of one variable subset, scored by plausibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlausibilityRecord {
    /// Sorted ascending.
    pub subset: Vec<VariableId>,
    pub ordering: CausalOrderingMatrix,
    pub p_value: f64,
    /// Sum of the log component p-values, kept for auditing.
    pub component_log_p_sum: f64,
}

/// Rank order for merging: higher p-value first, then larger subset, then the
/// lexicographically smaller id tuple.
fn rank(a: &PlausibilityRecord, b: &PlausibilityRecord) -> Ordering {
    b.p_value
        .total_cmp(&a.p_value)
        .then_with(|| b.subset.len().cmp(&a.subset.len()))
        .then_with(|| a.subset.cmp(&b.subset))
}

/// Merges subset orderings: each pair takes its order from the most plausible
/// record that contains the pair and decides it.
pub fn merge_orderings(records: &[PlausibilityRecord]) -> CausalOrderingMatrix {
    let mut ids: Vec<VariableId> = records.iter().flat_map(|r| r.subset.iter().copied()).collect();
    ids.sort_unstable();
    ids.dedup();
    let pos: HashMap<VariableId, usize> = ids.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let mut merged = CausalOrderingMatrix::unknown(ids);

    let mut ranked: Vec<&PlausibilityRecord> = records.iter().collect();
    ranked.sort_by(|a, b| rank(a, b));
    for rec in ranked {
        let o = &rec.ordering;
        for i in 0..o.dim() {
            for j in i + 1..o.dim() {
                let v = o.get(i, j);
                if v == 0 {
                    continue;
                }
                let (gi, gj) = (pos[&o.variable_ids()[i]], pos[&o.variable_ids()[j]]);
                if merged.get(gi, gj) == 0 {
                    merged.set(gi, gj, v);
                }
            }
        }
    }
    merged
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lists(h: &[usize], t: &[usize]) -> OrderedLists {
        OrderedLists { k_head: h.to_vec(), k_tail: t.to_vec() }
    }

    #[test]
    fn full_head_is_total_order() {
        let c = build_ordering_matrix(&lists(&[1, 2, 3], &[]), &[1, 2, 3]).unwrap();
        assert_eq!(c.entries(), &[vec![0, -1, -1], vec![1, 0, -1], vec![1, 1, 0]]);
    }

    #[test]
    fn empty_lists_know_nothing() {
        let c = build_ordering_matrix(&lists(&[], &[]), &[1, 2, 3, 4]).unwrap();
        assert_eq!(c.decided_pairs(), 0);
    }

    #[test]
    fn head_and_tail_around_unlisted() {
        let c = build_ordering_matrix(&lists(&[2], &[4]), &[1, 2, 3, 4, 5]).unwrap();
        let e = |a, b| c.get_by_id(a, b).unwrap();
        for j in [1, 3, 4, 5] {
            assert_eq!(e(2, j), -1);
        }
        for i in [1, 2, 3, 5] {
            assert_eq!(e(i, 4), -1);
        }
        for (a, b) in [(1, 3), (1, 5), (3, 5)] {
            assert_eq!(e(a, b), 0);
        }
    }

    #[test]
    fn overlapping_lists_rejected() {
        assert_eq!(
            build_ordering_matrix(&lists(&[1], &[1]), &[1, 2]),
            Err(OrderingError::OverlappingLists(1))
        );
        assert_eq!(
            build_ordering_matrix(&lists(&[7], &[]), &[1, 2]),
            Err(OrderingError::UnknownVariable(7))
        );
    }

    fn record(subset: &[usize], entries: Vec<Vec<i8>>, p: f64) -> PlausibilityRecord {
        PlausibilityRecord {
            subset: subset.to_vec(),
            ordering: CausalOrderingMatrix::from_entries(subset.to_vec(), entries).unwrap(),
            p_value: p,
            component_log_p_sum: 0.0,
        }
    }

    #[test]
    fn singleton_merge_is_identity() {
        let r = record(&[0, 1, 2], vec![vec![0, -1, 1], vec![1, 0, 1], vec![-1, -1, 0]], 0.4);
        assert_eq!(merge_orderings(std::slice::from_ref(&r)), r.ordering);
    }

    #[test]
    fn higher_plausibility_wins() {
        let a = record(&[0, 1], vec![vec![0, -1], vec![1, 0]], 0.9);
        let b = record(&[0, 1], vec![vec![0, 1], vec![-1, 0]], 0.2);
        assert_eq!(merge_orderings(&[b.clone(), a.clone()]).get(0, 1), -1);
        assert_eq!(merge_orderings(&[a, b]).get(0, 1), -1);
    }

    #[test]
    fn unknown_entries_defer_to_lower_records() {
        let a = record(&[0, 1], vec![vec![0, 0], vec![0, 0]], 0.9);
        let b = record(&[0, 1], vec![vec![0, -1], vec![1, 0]], 0.3);
        assert_eq!(merge_orderings(&[a, b]).get(0, 1), -1);
    }

    #[test]
    fn ties_prefer_larger_then_smaller_subset() {
        let small = record(&[0, 1], vec![vec![0, 1], vec![-1, 0]], 0.5);
        let big = record(&[0, 1, 2], vec![vec![0, -1, -1], vec![1, 0, -1], vec![1, 1, 0]], 0.5);
        assert_eq!(merge_orderings(&[small, big]).get(0, 1), -1);
        let x = record(&[0, 1], vec![vec![0, 1], vec![-1, 0]], 0.5);
        let y = record(&[0, 2], vec![vec![0, -1], vec![1, 0]], 0.5);
        let m = merge_orderings(&[y, x]);
        assert_eq!((m.get(0, 1), m.get(0, 2)), (1, -1));
    }

    #[test]
    fn cycle_diagnostic() {
        let c = CausalOrderingMatrix::from_entries(
            vec![0, 1, 2],
            vec![vec![0, -1, 1], vec![1, 0, -1], vec![-1, 1, 0]],
        )
        .unwrap();
        assert!(c.has_cycle());
        let t = build_ordering_matrix(&lists(&[0, 1, 2], &[]), &[0, 1, 2]).unwrap();
        assert!(!t.has_cycle());
    }

    #[test]
    fn json_and_csv_shapes() {
        let c = build_ordering_matrix(&lists(&[3], &[]), &[3, 5]).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, r#"{"variable_ids":[3,5],"entries":[[0,-1],[1,0]]}"#);
        let back: CausalOrderingMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<CausalOrderingMatrix>(
            r#"{"variable_ids":[0,1],"entries":[[0,-1],[-1,0]]}"#
        )
        .is_err());
        assert_eq!(c.to_csv(), "id,3,5\n3,0,-1\n5,1,0\n");
    }

    fn arb_lists() -> impl Strategy<Value = (usize, OrderedLists)> {
        (2usize..9).prop_flat_map(|d| {
            (Just(d), Just((0..d).collect::<Vec<_>>()).prop_shuffle(), 0..=d, 0..=d)
        })
        .prop_map(|(d, perm, h, t)| {
            let h = h.min(d);
            let t = t.min(d - h);
            (d, OrderedLists { k_head: perm[..h].to_vec(), k_tail: perm[d - t..].to_vec() })
        })
    }

    fn arb_record(d: usize) -> impl Strategy<Value = PlausibilityRecord> {
        (prop::sample::subsequence((0..d).collect::<Vec<_>>(), 2..=d), 0.0f64..1.0, any::<u64>())
            .prop_map(|(subset, p, bits)| {
                let m = subset.len();
                let mut c = CausalOrderingMatrix::unknown(subset.clone());
                let mut k = 0;
                for i in 0..m {
                    for j in i + 1..m {
                        c.set(i, j, ((bits >> (2 * k % 64)) % 3) as i8 - 1);
                        k += 1;
                    }
                }
                PlausibilityRecord { subset, ordering: c, p_value: p, component_log_p_sum: 0.0 }
            })
    }

    proptest! {
        #[test]
        fn built_matrix_invariants((d, l) in arb_lists()) {
            let ids: Vec<usize> = (0..d).collect();
            let c = build_ordering_matrix(&l, &ids).unwrap();
            let m = d - l.k_head.len() - l.k_tail.len();
            let zeros_off_diag = c.entries().iter().flatten().filter(|&&v| v == 0).count() - d;
            prop_assert_eq!(zeros_off_diag, m * (m.saturating_sub(1)));
            prop_assert!(CausalOrderingMatrix::from_entries(ids, c.entries().to_vec()).is_ok());
            prop_assert!(!c.has_cycle());
        }

        #[test]
        fn merge_is_order_invariant_and_monotone(
            recs in prop::collection::vec(arb_record(5), 1..6),
            extra in arb_record(5),
        ) {
            let mut ps: Vec<f64> = recs.iter().map(|r| r.p_value).collect();
            ps.sort_by(f64::total_cmp);
            ps.dedup();
            prop_assume!(ps.len() == recs.len());
            let m = merge_orderings(&recs);
            let mut rev = recs.clone();
            rev.reverse();
            prop_assert_eq!(&merge_orderings(&rev), &m);

            let mut more = recs.clone();
            more.push(extra);
            let grown = merge_orderings(&more);
            for (i, a) in m.variable_ids().iter().enumerate() {
                for (j, b) in m.variable_ids().iter().enumerate() {
                    if m.get(i, j) != 0 {
                        prop_assert_ne!(grown.get_by_id(*a, *b).unwrap(), 0);
                    }
                }
            }
        }
    }
}
