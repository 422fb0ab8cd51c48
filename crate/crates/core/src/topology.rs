//! BSS topology as an audibility graph.
//!
//! Every terminal is one hop from the AP, so any two terminals are either
//! one-hop (OH) neighbors, when they can hear each other, or two-hop (TH)
//! neighbors reachable only through the AP. A terminal's environment collapses
//! into those two consolidated groups.
//!
//! Topologies are written as groups of mutually audible terminals separated by
//! `|`, e.g. `{A,B|B,C|D}`. Terminals are indexed in first-appearance order.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("malformed topology `{0}`: {1}")]
    Malformed(String, &'static str),
    #[error("topology `{0}` has an empty group")]
    EmptyGroup(String),
    #[error("terminal `{1}` appears twice in one group of `{0}`")]
    DuplicateInGroup(String, String),
    #[error("terminal index {index} out of range for {count} terminals")]
    OutOfRange { index: usize, count: usize },
}

/// Undirected audibility graph over `N` terminals; the AP is implicit and
/// adjacent to all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologyGraph {
    names: Vec<String>,
    adjacency: Vec<Vec<bool>>,
}

/// The OH/TH split of all other terminals as seen from one terminal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborPartition {
    pub terminal_id: usize,
    pub oh_set: Vec<usize>,
    pub th_set: Vec<usize>,
}

impl TopologyGraph {
    /// Builds a graph from explicit edges. Terminal names default to `A`, `B`, ...
    pub fn from_edges(terminal_count: usize, edges: &[(usize, usize)]) -> Result<Self, TopologyError> {
        if terminal_count == 0 {
            return Err(TopologyError::Malformed(String::new(), "no terminals"));
        }
        let mut adjacency = vec![vec![false; terminal_count]; terminal_count];
        for &(a, b) in edges {
            for index in [a, b] {
                if index >= terminal_count {
                    return Err(TopologyError::OutOfRange { index, count: terminal_count });
                }
            }
            if a == b {
                return Err(TopologyError::Malformed(format!("({a},{b})"), "self edge"));
            }
            adjacency[a][b] = true;
            adjacency[b][a] = true;
        }
        let names = (0..terminal_count).map(default_name).collect();
        Ok(Self { names, adjacency })
    }

    /// Parses the `{A,B|C}` group notation.
    pub fn parse(spec: &str) -> Result<Self, TopologyError> {
        let malformed = |why| TopologyError::Malformed(spec.to_string(), why);
        let body = spec
            .trim()
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or_else(|| malformed("expected braces around the groups"))?;
        if body.trim().is_empty() {
            return Err(malformed("no terminals"));
        }

        let mut names: Vec<String> = Vec::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for group in body.split('|') {
            let mut members = Vec::new();
            for raw in group.split(',') {
                let name = raw.trim();
                if name.is_empty() {
                    return Err(TopologyError::EmptyGroup(spec.to_string()));
                }
                if !name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'') {
                    return Err(malformed("terminal names must be alphanumeric"));
                }
                let index = match names.iter().position(|n| n == name) {
                    Some(i) => i,
                    None => {
                        names.push(name.to_string());
                        names.len() - 1
                    }
                };
                if members.contains(&index) {
                    return Err(TopologyError::DuplicateInGroup(spec.to_string(), name.to_string()));
                }
                members.push(index);
            }
            groups.push(members);
        }

        let n = names.len();
        let mut adjacency = vec![vec![false; n]; n];
        for group in &groups {
            for &a in group {
                for &b in group {
                    if a != b {
                        adjacency[a][b] = true;
                    }
                }
            }
        }
        Ok(Self { names, adjacency })
    }

    pub fn terminal_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, n: usize) -> &str {
        &self.names[n]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Whether `a` and `b` can carrier-sense each other.
    pub fn audible(&self, a: usize, b: usize) -> bool {
        self.adjacency[a][b]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.terminal_count();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if self.adjacency[a][b] {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn partition(&self, n: usize) -> Result<NeighborPartition, TopologyError> {
        let count = self.terminal_count();
        if n >= count {
            return Err(TopologyError::OutOfRange { index: n, count });
        }
        let (oh_set, th_set) = (0..count).filter(|&m| m != n).partition(|&m| self.adjacency[n][m]);
        Ok(NeighborPartition { terminal_id: n, oh_set, th_set })
    }

    /// Partitions for every terminal, in index order.
    pub fn partitions(&self) -> Vec<NeighborPartition> {
        (0..self.terminal_count())
            .map(|n| self.partition(n).expect("index in range"))
            .collect()
    }

    /// True when no terminal has a hidden (TH) neighbor.
    pub fn is_fully_connected(&self) -> bool {
        self.edges().len() == self.terminal_count() * (self.terminal_count() - 1) / 2
    }

    /// Group notation that parses back to this graph with the same indices:
    /// one group per edge plus singletons for isolated terminals.
    pub fn to_spec(&self) -> String {
        if self.is_fully_connected() {
            return format!("{{{}}}", self.names.join(","));
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut covered = BTreeSet::new();
        for (a, b) in self.edges() {
            groups.push(vec![a, b]);
            covered.insert(a);
            covered.insert(b);
        }
        for n in 0..self.terminal_count() {
            if !covered.contains(&n) {
                groups.push(vec![n]);
            }
        }
        // Indices follow first appearance, so pin the order with leading
        // singletons when the edge groups would scramble it.
        let mut seen = Vec::new();
        for &n in groups.iter().flatten() {
            if !seen.contains(&n) {
                seen.push(n);
            }
        }
        if seen.iter().enumerate().any(|(i, &n)| i != n) {
            let mut pinned: Vec<Vec<usize>> = (0..self.terminal_count()).map(|n| vec![n]).collect();
            pinned.extend(groups.into_iter().filter(|g| g.len() > 1));
            groups = pinned;
        }
        let render = |g: &Vec<usize>| g.iter().map(|&n| self.names[n].as_str()).collect::<Vec<_>>().join(",");
        format!("{{{}}}", groups.iter().map(render).collect::<Vec<_>>().join("|"))
    }
}

impl FromStr for TopologyGraph {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl fmt::Display for TopologyGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_spec())
    }
}

fn default_name(n: usize) -> String {
    if n < 26 {
        char::from(b'A' + n as u8).to_string()
    } else {
        format!("T{n}")
    }
}

/// The eight evaluation topologies, by short name.
pub const NAMED_TOPOLOGIES: &[(&str, &str)] = &[
    ("topo2", "{A,B}"),
    ("topo2p", "{A|B}"),
    ("topo3", "{A,B,C}"),
    ("topo3p", "{A,B|C}"),
    ("topo3pp", "{A,B|B,C}"),
    ("topo4", "{A,B,C,D}"),
    ("topo4p", "{A,B,C|D}"),
    ("topo4pp", "{A,B|B,C|D}"),
];

/// Resolves either a short name (`topo3p`) or the group notation itself.
pub fn resolve(name_or_spec: &str) -> Result<TopologyGraph, TopologyError> {
    let key = name_or_spec.trim();
    match NAMED_TOPOLOGIES.iter().find(|(name, _)| *name == key) {
        Some((_, spec)) => TopologyGraph::parse(spec),
        None => TopologyGraph::parse(key),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Hop distance with the AP included as an extra vertex adjacent to all
    /// terminals; plain BFS, independent of `partition`.
    fn hop_distance(graph: &TopologyGraph, from: usize, to: usize) -> usize {
        let n = graph.terminal_count();
        let ap = n;
        let adjacent = |u: usize, v: usize| -> bool {
            if u == ap || v == ap {
                u != v
            } else {
                graph.audible(u, v)
            }
        };
        let mut dist = vec![usize::MAX; n + 1];
        let mut queue = std::collections::VecDeque::from([from]);
        dist[from] = 0;
        while let Some(u) = queue.pop_front() {
            for v in 0..=n {
                if dist[v] == usize::MAX && adjacent(u, v) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist[to]
    }

    #[test]
    fn parses_table_topologies() {
        let g = TopologyGraph::parse("{A,B}").unwrap();
        assert_eq!(g.terminal_count(), 2);
        assert_eq!(g.edges(), vec![(0, 1)]);

        let g = TopologyGraph::parse("{A|B}").unwrap();
        assert_eq!(g.terminal_count(), 2);
        assert!(g.edges().is_empty());

        let g = TopologyGraph::parse("{A,B|B,C|D}").unwrap();
        assert_eq!(g.terminal_count(), 4);
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
        assert_eq!(g.names(), &["A", "B", "C", "D"]);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(TopologyGraph::parse("A,B"), Err(TopologyError::Malformed(..))));
        assert!(matches!(TopologyGraph::parse("{}"), Err(TopologyError::Malformed(..))));
        assert!(matches!(TopologyGraph::parse("{A,|B}"), Err(TopologyError::EmptyGroup(_))));
        assert!(matches!(TopologyGraph::parse("{A||B}"), Err(TopologyError::EmptyGroup(_))));
        assert!(matches!(
            TopologyGraph::parse("{A,B,A}"),
            Err(TopologyError::DuplicateInGroup(_, _))
        ));
        assert!(TopologyGraph::parse("{A,B|B,A}").is_ok());
    }

    #[test]
    fn partition_examples() {
        let g = resolve("topo3p").unwrap();
        let p = g.partition(0).unwrap();
        assert_eq!((p.oh_set, p.th_set), (vec![1], vec![2]));

        let g = resolve("topo2").unwrap();
        let p = g.partition(0).unwrap();
        assert_eq!((p.oh_set, p.th_set), (vec![1], vec![]));

        let g = resolve("topo4pp").unwrap();
        let p = g.partition(1).unwrap();
        assert_eq!((p.oh_set.clone(), p.th_set.clone()), (vec![0, 2], vec![3]));
        for &m in &p.th_set {
            assert_eq!(hop_distance(&g, 1, m), 2);
        }
        for &m in &p.oh_set {
            assert_eq!(hop_distance(&g, 1, m), 1);
        }

        assert_eq!(g.partition(4), Err(TopologyError::OutOfRange { index: 4, count: 4 }));
    }

    #[test]
    fn named_topologies_round_trip() {
        for (name, spec) in NAMED_TOPOLOGIES {
            let g = resolve(name).unwrap();
            assert_eq!(g, TopologyGraph::parse(spec).unwrap());
            assert_eq!(TopologyGraph::parse(&g.to_spec()).unwrap(), g);
        }
    }

    fn arbitrary_graph() -> impl Strategy<Value = TopologyGraph> {
        (1usize..7).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
                let mut edges = Vec::new();
                for a in 0..n {
                    for b in a + 1..n {
                        if bits[a * n + b] {
                            edges.push((a, b));
                        }
                    }
                }
                TopologyGraph::from_edges(n, &edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn partition_invariants(g in arbitrary_graph()) {
            let count = g.terminal_count();
            for n in 0..count {
                let p = g.partition(n).unwrap();
                prop_assert_eq!(p.oh_set.len() + p.th_set.len(), count - 1);
                prop_assert!(!p.oh_set.contains(&n) && !p.th_set.contains(&n));
                for &m in &p.oh_set {
                    prop_assert!(!p.th_set.contains(&m));
                    prop_assert!(g.partition(m).unwrap().oh_set.contains(&n));
                }
                let at_two: Vec<usize> =
                    (0..count).filter(|&m| m != n && hop_distance(&g, n, m) == 2).collect();
                prop_assert_eq!(&p.th_set, &at_two);
            }
            prop_assert_eq!(TopologyGraph::parse(&g.to_spec()).unwrap(), g);
        }
    }
}
