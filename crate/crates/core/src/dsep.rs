//! Path blocking and d-separation by explicit enumeration of underlying
//! paths.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Network, VarId};

/// How a path passes through an interior node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connection {
    /// `u -> v -> w` or `u <- v <- w`.
    Serial,
    /// `u <- v -> w`.
    Diverging,
    /// `u -> v <- w` (head-to-head).
    Converging,
}

/// A simple path in the underlying undirected graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedPath {
    nodes: Vec<VarId>,
    connections: Vec<Connection>,
}

impl UndirectedPath {
    pub fn new(net: &Network, nodes: Vec<VarId>) -> Result<Self> {
        let distinct: BTreeSet<_> = nodes.iter().collect();
        if nodes.len() < 2 || distinct.len() != nodes.len() {
            return Err(Error::InvalidQuery("path needs at least two distinct nodes".into()));
        }
        for pair in nodes.windows(2) {
            if !net.neighbors(pair[0]).any(|n| n == pair[1]) {
                return Err(Error::InvalidQuery(format!(
                    "{} and {} are not adjacent",
                    net.var_name(pair[0]),
                    net.var_name(pair[1])
                )));
            }
        }
        let connections = nodes
            .windows(3)
            .map(|w| {
                let into_mid_from_prev = net.parents(w[1]).contains(&w[0]);
                let into_mid_from_next = net.parents(w[1]).contains(&w[2]);
                match (into_mid_from_prev, into_mid_from_next) {
                    (true, true) => Connection::Converging,
                    (false, false) => Connection::Diverging,
                    _ => Connection::Serial,
                }
            })
            .collect();
        Ok(Self { nodes, connections })
    }

    pub fn nodes(&self) -> &[VarId] {
        &self.nodes
    }

    /// Interior nodes paired with their connection kind.
    pub fn interior(&self) -> impl Iterator<Item = (VarId, Connection)> + '_ {
        self.nodes[1..self.nodes.len() - 1]
            .iter()
            .copied()
            .zip(self.connections.iter().copied())
    }

    pub fn display<'a>(&'a self, net: &'a Network) -> PathDisplay<'a> {
        PathDisplay { path: self, net }
    }
}

pub struct PathDisplay<'a> {
    path: &'a UndirectedPath,
    net: &'a Network,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nodes = &self.path.nodes;
        write!(f, "{}", self.net.var_name(nodes[0]))?;
        for pair in nodes.windows(2) {
            let arrow = if self.net.parents(pair[1]).contains(&pair[0]) { "->" } else { "<-" };
            write!(f, " {arrow} {}", self.net.var_name(pair[1]))?;
        }
        Ok(())
    }
}

/// The first interior node that blocks `path` given `given`, if any.
pub fn blocking_node(net: &Network, path: &UndirectedPath, given: &BTreeSet<VarId>) -> Option<VarId> {
    path.interior()
        .find(|&(v, kind)| match kind {
            Connection::Serial | Connection::Diverging => given.contains(&v),
            Connection::Converging => {
                !given.contains(&v) && net.descendants(v).is_disjoint(given)
            }
        })
        .map(|(v, _)| v)
}

pub fn is_blocked(net: &Network, path: &UndirectedPath, given: &BTreeSet<VarId>) -> bool {
    blocking_node(net, path, given).is_some()
}

/// All simple underlying paths from `x` to `y`, sorted lexicographically by
/// their sequence of node names.
pub fn list_paths(net: &Network, x: VarId, y: VarId) -> Vec<UndirectedPath> {
    if x == y {
        return Vec::new();
    }
    let mut found: Vec<Vec<VarId>> = Vec::new();
    let mut on_path = vec![false; net.len()];
    let mut path = vec![x];
    on_path[x.0] = true;
    extend_paths(net, y, &mut path, &mut on_path, &mut found);
    found.sort_by(|a, b| {
        let names = |p: &Vec<VarId>| p.iter().map(|&v| net.var_name(v).to_string()).collect::<Vec<_>>();
        names(a).cmp(&names(b))
    });
    found
        .into_iter()
        .map(|nodes| UndirectedPath::new(net, nodes).expect("enumerated paths are simple"))
        .collect()
}

fn extend_paths(
    net: &Network,
    target: VarId,
    path: &mut Vec<VarId>,
    on_path: &mut [bool],
    found: &mut Vec<Vec<VarId>>,
) {
    let last = *path.last().unwrap();
    let mut next: Vec<VarId> = net.neighbors(last).filter(|n| !on_path[n.0]).collect();
    next.sort_by_key(|&v| net.var_name(v));
    for n in next {
        path.push(n);
        if n == target {
            found.push(path.clone());
        } else {
            on_path[n.0] = true;
            extend_paths(net, target, path, on_path, found);
            on_path[n.0] = false;
        }
        path.pop();
    }
}

/// Outcome of a d-separation query with per-path detail.
#[derive(Debug, Clone)]
pub struct SeparationReport {
    pub separated: bool,
    /// Each path with the node blocking it, or `None` when it is open.
    pub paths: Vec<(UndirectedPath, Option<VarId>)>,
}

pub fn analyze(net: &Network, x: VarId, y: VarId, given: &BTreeSet<VarId>) -> Result<SeparationReport> {
    if x == y {
        return Err(Error::InvalidQuery("x and y must differ".into()));
    }
    for v in [x, y] {
        if given.contains(&v) {
            return Err(Error::InvalidQuery(format!(
                "`{}` cannot be both queried and conditioned on",
                net.var_name(v)
            )));
        }
    }
    let paths: Vec<_> = list_paths(net, x, y)
        .into_iter()
        .map(|p| {
            let by = blocking_node(net, &p, given);
            (p, by)
        })
        .collect();
    Ok(SeparationReport {
        separated: paths.iter().all(|(_, by)| by.is_some()),
        paths,
    })
}

/// True iff every underlying path between `x` and `y` is blocked by `given`.
pub fn d_separated(net: &Network, x: VarId, y: VarId, given: &BTreeSet<VarId>) -> Result<bool> {
    analyze(net, x, y, given).map(|r| r.separated)
}
