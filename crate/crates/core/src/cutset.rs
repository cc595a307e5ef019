//! Loop cutsets: variables whose instantiation leaves a singly connected
//! network.
//!
//! Instantiating a variable blocks serial and diverging passage through it
//! but not a head-to-head meeting of its parents, so a set is valid when
//! deleting every *outgoing* arc of its members leaves a forest.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::model::{is_forest, Network, VarId};

/// Default size limit for [`min_cutset_exhaustive`].
pub const EXHAUSTIVE_LIMIT: usize = 16;

/// A valid loop cutset, in the order its members were chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cutset {
    members: Vec<VarId>,
}

impl Cutset {
    /// The empty cutset, valid for singly connected networks.
    pub fn empty() -> Self {
        Self { members: Vec::new() }
    }

    pub fn new(net: &Network, members: Vec<VarId>) -> Result<Self> {
        let unique = members.iter().all_unique();
        if !unique || !is_valid_cutset(net, &members) {
            return Err(Error::InvalidCutset(
                members.iter().map(|&v| net.var_name(v).to_string()).collect(),
            ));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[VarId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.members.contains(&v)
    }

    /// Number of joint assignments of the members.
    pub fn assignment_count(&self, net: &Network) -> usize {
        self.members.iter().map(|&v| net.cardinality(v)).product()
    }

    /// All joint assignments, first member slowest.
    pub fn assignments<'a>(&'a self, net: &'a Network) -> impl Iterator<Item = Vec<usize>> + 'a {
        self.members
            .iter()
            .map(|&v| 0..net.cardinality(v))
            .multi_cartesian_product()
            .pad_using(usize::from(self.members.is_empty()), |_| Vec::new())
    }

    pub fn names<'a>(&'a self, net: &'a Network) -> Vec<&'a str> {
        self.members.iter().map(|&v| net.var_name(v)).collect()
    }
}

fn remaining_edges<'a>(net: &'a Network, removed: &'a [bool]) -> impl Iterator<Item = (usize, usize)> + 'a {
    net.arcs()
        .iter()
        .filter(move |(p, _)| !removed[p.0])
        .map(|&(p, c)| (p.0, c.0))
}

/// True iff deleting the outgoing arcs of `set` leaves a forest.
pub fn is_valid_cutset(net: &Network, set: &[VarId]) -> bool {
    let mut removed = vec![false; net.len()];
    for &v in set {
        removed[v.0] = true;
    }
    is_forest(net.len(), remaining_edges(net, &removed))
}

/// Deterministic degree-greedy cutset.
///
/// While the reduced graph still has a cycle, add the node with the largest
/// remaining undirected degree among those that lie on a cycle and still
/// have an outgoing arc; ties go to the smallest name.
pub fn greedy_cutset(net: &Network) -> Cutset {
    let mut removed = vec![false; net.len()];
    let mut members = Vec::new();
    loop {
        let edges: Vec<(usize, usize)> = remaining_edges(net, &removed).collect();
        if is_forest(net.len(), edges.iter().copied()) {
            break;
        }
        let on_cycle = nodes_on_cycles(net.len(), &edges);
        let mut degree = vec![0usize; net.len()];
        let mut has_out = vec![false; net.len()];
        for &(p, c) in &edges {
            degree[p] += 1;
            degree[c] += 1;
            has_out[p] = true;
        }
        let pick = (0..net.len())
            .filter(|&v| on_cycle[v] && has_out[v])
            .min_by(|&a, &b| {
                degree[b]
                    .cmp(&degree[a])
                    .then_with(|| net.var_name(VarId(a)).cmp(net.var_name(VarId(b))))
            })
            .expect("every undirected cycle of a DAG has a node with an outgoing arc on it");
        removed[pick] = true;
        members.push(VarId(pick));
    }
    debug_assert!(is_valid_cutset(net, &members));
    Cutset { members }
}

/// Marks nodes incident to a non-bridge edge.
fn nodes_on_cycles(n: usize, edges: &[(usize, usize)]) -> Vec<bool> {
    let mut on_cycle = vec![false; n];
    for (i, &(a, b)) in edges.iter().enumerate() {
        let others = edges
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &e)| e);
        let mut sets = crate::model::DisjointSets::new(n);
        for (x, y) in others {
            sets.union(x, y);
        }
        if sets.find(a) == sets.find(b) {
            on_cycle[a] = true;
            on_cycle[b] = true;
        }
    }
    on_cycle
}

/// Smallest valid cutset by cardinality; ties broken by the sorted list of
/// member names.
pub fn min_cutset_exhaustive(net: &Network, max_nodes: usize) -> Result<Cutset> {
    if net.len() > max_nodes {
        return Err(Error::CutsetLimit {
            nodes: net.len(),
            limit: max_nodes,
        });
    }
    let mut by_name: Vec<VarId> = net.ids().collect();
    by_name.sort_by_key(|&v| net.var_name(v));
    for size in 0..=net.len() {
        if let Some(members) = by_name
            .iter()
            .copied()
            .combinations(size)
            .find(|set| is_valid_cutset(net, set))
        {
            return Ok(Cutset { members });
        }
    }
    unreachable!("the full variable set is always a valid cutset")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::NetworkBuilder;

    fn ids(net: &Network, names: &[&str]) -> Vec<VarId> {
        names.iter().map(|n| net.var(n).unwrap()).collect()
    }

    #[test]
    fn two_loops_validity() {
        let net = fixtures::two_loops();
        assert!(is_valid_cutset(&net, &ids(&net, &["x1"])));
        assert!(is_valid_cutset(&net, &ids(&net, &["x2"])));
        assert!(!is_valid_cutset(&net, &ids(&net, &["x5"])));
        assert!(!is_valid_cutset(&net, &[]));
        assert!(Cutset::new(&net, ids(&net, &["x5"])).is_err());
        assert!(Cutset::new(&net, ids(&net, &["x1", "x1"])).is_err());
    }

    #[test]
    fn two_loops_greedy_picks_x1() {
        let net = fixtures::two_loops();
        let cut = greedy_cutset(&net);
        assert_eq!(cut.names(&net), ["x1"]);
        assert_eq!(cut.assignment_count(&net), 2);
        assert_eq!(min_cutset_exhaustive(&net, EXHAUSTIVE_LIMIT).unwrap().names(&net), ["x1"]);
    }

    #[test]
    fn polytree_needs_nothing() {
        let net = fixtures::chain();
        assert!(greedy_cutset(&net).is_empty());
        assert!(min_cutset_exhaustive(&net, EXHAUSTIVE_LIMIT).unwrap().is_empty());
        let empty = Cutset::empty();
        assert_eq!(empty.assignments(&net).collect::<Vec<_>>(), vec![Vec::<usize>::new()]);
        assert_eq!(empty.assignment_count(&net), 1);
    }

    #[test]
    fn diamond_needs_one() {
        let net = fixtures::diamond();
        assert_eq!(min_cutset_exhaustive(&net, EXHAUSTIVE_LIMIT).unwrap().names(&net), ["A"]);
        // B and C also have outgoing arcs on the loop, but A has the same
        // degree and the smaller name.
        assert_eq!(greedy_cutset(&net).names(&net), ["A"]);
    }

    fn two_diamonds() -> Network {
        let mut b = NetworkBuilder::new();
        for prefix in ["p", "q"] {
            let n = |s: &str| format!("{prefix}{s}");
            for s in ["a", "b", "c", "d"] {
                b.add_variable(&n(s), &["f", "t"]);
            }
            b.add_cpt(&n("a"), &[], vec![vec![0.5, 0.5]]);
            b.add_cpt(&n("b"), &[&n("a")], vec![vec![0.5, 0.5]; 2]);
            b.add_cpt(&n("c"), &[&n("a")], vec![vec![0.5, 0.5]; 2]);
            b.add_cpt(&n("d"), &[&n("b"), &n("c")], vec![vec![0.5, 0.5]; 4]);
        }
        b.build().unwrap()
    }

    #[test]
    fn two_disjoint_diamonds() {
        let net = two_diamonds();
        let cut = greedy_cutset(&net);
        assert_eq!(cut.len(), 2);
        assert_eq!(min_cutset_exhaustive(&net, EXHAUSTIVE_LIMIT).unwrap().len(), 2);
        let prefixes: Vec<char> = cut.names(&net).iter().map(|n| n.chars().next().unwrap()).collect();
        assert_eq!(prefixes, ['p', 'q']);
        assert_eq!(cut.assignments(&net).count(), 4);
    }

    #[test]
    fn exhaustive_respects_limit() {
        let net = two_diamonds();
        assert!(matches!(min_cutset_exhaustive(&net, 7), Err(Error::CutsetLimit { .. })));
    }

    #[test]
    fn assignments_are_row_major() {
        let net = two_diamonds();
        let cut = Cutset::new(&net, ids(&net, &["pa", "qa"])).unwrap();
        let all: Vec<Vec<usize>> = cut.assignments(&net).collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }
}
