//! Directed acyclic graphs over named item nodes.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::analytics::Partition;
use crate::error::{Error, Result};

/// A DAG whose nodes are identified by index into an ordered name list.
///
/// Parent and child lists are kept sorted so that every traversal is
/// deterministic in node order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    nodes: Vec<String>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Dag {
    pub fn empty(nodes: Vec<String>) -> Self {
        let n = nodes.len();
        Dag {
            nodes,
            parents: vec![Vec::new(); n],
            children: vec![Vec::new(); n],
        }
    }

    /// Builds a DAG from index arcs, rejecting self-loops, duplicates and cycles.
    pub fn from_arcs(nodes: Vec<String>, arcs: &[(usize, usize)]) -> Result<Self> {
        let n = nodes.len();
        let mut dag = Dag::empty(nodes);
        for &(u, v) in arcs {
            if u >= n || v >= n {
                return Err(Error::pre(format!("arc ({u}, {v}) out of range for {n} nodes")));
            }
            if u == v {
                return Err(Error::Cycle(format!("self-loop on {}", dag.nodes[u])));
            }
            if dag.has_arc(u, v) {
                return Err(Error::pre(format!(
                    "duplicate arc {} -> {}",
                    dag.nodes[u], dag.nodes[v]
                )));
            }
            dag.insert_arc(u, v);
        }
        if dag.topological_order().len() != n {
            return Err(Error::Cycle("arc set contains a directed cycle".into()));
        }
        Ok(dag)
    }

    pub fn from_named_arcs(nodes: Vec<String>, arcs: &[(String, String)]) -> Result<Self> {
        let index: HashMap<&str, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| Error::UnknownNode(s.to_string()))
        };
        let idx = arcs
            .iter()
            .map(|(a, b)| Ok((lookup(a)?, lookup(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Dag::from_arcs(nodes, &idx)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn name(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.children[u].binary_search(&v).is_ok()
    }

    pub fn arc_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    /// All arcs sorted by (from, to).
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        self.children
            .iter()
            .enumerate()
            .flat_map(|(u, cs)| cs.iter().map(move |&v| (u, v)))
            .collect()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.parents[v].len()
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.children[v].len()
    }

    /// Kahn's algorithm, always releasing the smallest ready index first.
    /// Returns fewer than `len()` nodes when the graph has a cycle.
    pub fn topological_order(&self) -> Vec<usize> {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;

        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<usize>> = indeg
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(i, _)| Reverse(i))
            .collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(Reverse(u)) = ready.pop() {
            order.push(u);
            for &c in &self.children[u] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(Reverse(c));
                }
            }
        }
        order
    }

    /// Whether a directed path `from ~> to` exists (a node reaches itself).
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            for &c in &self.children[u] {
                if c == to {
                    return true;
                }
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        false
    }

    /// Nodes reachable from `from`, including `from` itself.
    pub fn descendants(&self, from: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            for &c in &self.children[u] {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        seen
    }

    pub(crate) fn insert_arc(&mut self, u: usize, v: usize) {
        if let Err(pos) = self.children[u].binary_search(&v) {
            self.children[u].insert(pos, v);
        }
        if let Err(pos) = self.parents[v].binary_search(&u) {
            self.parents[v].insert(pos, u);
        }
    }

    pub(crate) fn delete_arc(&mut self, u: usize, v: usize) {
        if let Ok(pos) = self.children[u].binary_search(&v) {
            self.children[u].remove(pos);
        }
        if let Ok(pos) = self.parents[v].binary_search(&u) {
            self.parents[v].remove(pos);
        }
    }

    /// Arc list CSV with header `from,to`.
    pub fn write_arc_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["from", "to"])?;
        for (u, v) in self.arcs() {
            w.write_record([self.name(u), self.name(v)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a `from,to` arc list over the given node set.
    pub fn read_arc_csv<R: Read>(nodes: Vec<String>, input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut arcs = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let (Some(a), Some(b)) = (rec.get(0), rec.get(1)) else {
                return Err(Error::Parse {
                    line,
                    message: "expected `from,to`".into(),
                });
            };
            arcs.push((a.trim().to_string(), b.trim().to_string()));
        }
        Dag::from_named_arcs(nodes, &arcs)
    }

    /// Graphviz `digraph`. When a partition is supplied every cluster becomes a
    /// `subgraph cluster_<k>` labelled with the partition's cluster label.
    pub fn to_dot(&self, clusters: Option<&Partition>, weights: Option<&dyn Fn(usize, usize) -> f64>) -> String {
        let mut s = String::from("digraph attachnet {\n");
        match clusters {
            Some(p) => {
                for (k, members) in p.clusters().iter().enumerate() {
                    let _ = writeln!(s, "  subgraph cluster_{} {{", k + 1);
                    let _ = writeln!(s, "    label=\"{}\";", p.label(k));
                    for &v in members {
                        let _ = writeln!(s, "    \"{}\";", self.name(v));
                    }
                    s.push_str("  }\n");
                }
            }
            None => {
                for n in &self.nodes {
                    let _ = writeln!(s, "  \"{n}\";");
                }
            }
        }
        for (u, v) in self.arcs() {
            match weights {
                Some(w) => {
                    let _ = writeln!(
                        s,
                        "  \"{}\" -> \"{}\" [label=\"{:.5}\"];",
                        self.name(u),
                        self.name(v),
                        w(u, v)
                    );
                }
                None => {
                    let _ = writeln!(s, "  \"{}\" -> \"{}\";", self.name(u), self.name(v));
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("n{i}")).collect()
    }

    #[test]
    fn rejects_cycles_and_self_loops() {
        assert!(matches!(
            Dag::from_arcs(names(3), &[(0, 1), (1, 2), (2, 0)]),
            Err(Error::Cycle(_))
        ));
        assert!(matches!(Dag::from_arcs(names(2), &[(1, 1)]), Err(Error::Cycle(_))));
    }

    #[test]
    fn topological_order_is_smallest_first() {
        let d = Dag::from_arcs(names(4), &[(3, 0), (2, 1)]).unwrap();
        assert_eq!(d.topological_order(), vec![2, 1, 3, 0]);
    }

    #[test]
    fn arc_csv_round_trip() {
        let d = Dag::from_arcs(names(4), &[(0, 1), (1, 3), (0, 2)]).unwrap();
        let mut buf = Vec::new();
        d.write_arc_csv(&mut buf).unwrap();
        let back = Dag::read_arc_csv(names(4), buf.as_slice()).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn reachability() {
        let d = Dag::from_arcs(names(4), &[(0, 1), (1, 2)]).unwrap();
        assert!(d.reaches(0, 2));
        assert!(!d.reaches(2, 0));
        assert!(!d.reaches(0, 3));
        assert_eq!(d.descendants(1), vec![false, true, true, false]);
    }
}
