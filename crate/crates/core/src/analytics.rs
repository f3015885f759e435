//! Community detection and centralities over a fitted network.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};

use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::params::GaussianBnParams;

/// Disjoint clusters covering every node, numbered `0..k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    labels: Vec<String>,
}

impl Partition {
    /// Cluster ids are renumbered in order of first appearance and labelled
    /// `C1..Ck`.
    pub fn new(assignment: Vec<usize>) -> Self {
        let mut remap = HashMap::new();
        let assignment: Vec<usize> = assignment
            .into_iter()
            .map(|c| {
                let next = remap.len();
                *remap.entry(c).or_insert(next)
            })
            .collect();
        let labels = (1..=remap.len()).map(|k| format!("C{k}")).collect();
        Partition { assignment, labels }
    }

    /// Ids must be `0..labels.len()` and every label used.
    pub fn with_labels(assignment: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        let used: BTreeSet<usize> = assignment.iter().copied().collect();
        if used.len() != labels.len() || used.iter().next_back().is_some_and(|&m| m >= labels.len()) {
            return Err(Error::pre("cluster ids must be 0..k with every cluster non-empty"));
        }
        Ok(Partition { assignment, labels })
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.labels.len()
    }

    pub fn cluster_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn label(&self, k: usize) -> &str {
        &self.labels[k]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Members of each cluster in node order.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.labels.len()];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    /// Same grouping of nodes, ignoring ids and labels.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        let key = |p: &Partition| -> BTreeSet<Vec<usize>> { p.clusters().into_iter().collect() };
        self.len() == other.len() && key(self) == key(other)
    }

    /// CSV `node,cluster`.
    pub fn write_csv<W: Write>(&self, nodes: &[String], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "cluster"])?;
        for (v, &c) in self.assignment.iter().enumerate() {
            w.write_record([nodes[v].as_str(), self.labels[c].as_str()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `node,cluster`. Clusters are numbered in sorted label order.
    pub fn read_csv<R: Read>(nodes: &[String], input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut by_node: HashMap<String, String> = HashMap::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() < 2 {
                return Err(Error::Parse {
                    line,
                    message: "expected node,cluster".into(),
                });
            }
            let node = rec[0].trim().to_string();
            if !nodes.contains(&node) {
                return Err(Error::UnknownNode(node));
            }
            if by_node.insert(node.clone(), rec[1].trim().to_string()).is_some() {
                return Err(Error::Parse {
                    line,
                    message: format!("node {node} assigned twice"),
                });
            }
        }
        let labels: Vec<String> = by_node.values().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let assignment = nodes
            .iter()
            .map(|n| {
                let l = by_node
                    .get(n)
                    .ok_or_else(|| Error::pre(format!("node {n} has no cluster")))?;
                Ok(labels.iter().position(|x| x == l).unwrap_or(0))
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::with_labels(assignment, labels)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CentralityKind {
    DegreeIn,
    DegreeOut,
    Betweenness,
    PageRank,
}

impl CentralityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CentralityKind::DegreeIn => "degree_in",
            CentralityKind::DegreeOut => "degree_out",
            CentralityKind::Betweenness => "betweenness",
            CentralityKind::PageRank => "pagerank",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CentralityVector {
    pub kind: CentralityKind,
    pub values: Vec<f64>,
}

impl CentralityVector {
    /// Node indices by descending value, ties by index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[b].total_cmp(&self.values[a]).then(a.cmp(&b)));
        idx
    }

    pub fn top(&self, k: usize) -> Vec<usize> {
        self.ranking().into_iter().take(k).collect()
    }

    pub fn argmax(&self) -> Option<usize> {
        self.ranking().first().copied()
    }

    /// CSV `node,value`.
    pub fn write_csv<W: Write>(&self, nodes: &[String], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "value"])?;
        for (n, v) in nodes.iter().zip(&self.values) {
            w.write_record([n.clone(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Unweighted in- and out-degree.
pub fn degree_centrality(dag: &Dag) -> (CentralityVector, CentralityVector) {
    let n = dag.len();
    let din = (0..n).map(|v| dag.in_degree(v) as f64).collect();
    let dout = (0..n).map(|v| dag.out_degree(v) as f64).collect();
    (
        CentralityVector {
            kind: CentralityKind::DegreeIn,
            values: din,
        },
        CentralityVector {
            kind: CentralityKind::DegreeOut,
            values: dout,
        },
    )
}

fn coefficient(params: &GaussianBnParams, u: usize, v: usize) -> Result<f64> {
    params
        .coefficient(u, v)
        .ok_or_else(|| Error::pre(format!("no coefficient for arc {u} -> {v}")))
}

/// Directed shortest-path betweenness (Brandes) with arc length 1/|c|.
/// Unnormalised; zero-coefficient arcs are skipped with a warning.
pub fn betweenness(dag: &Dag, params: &GaussianBnParams) -> Result<CentralityVector> {
    use std::cmp::Ordering;
    use std::collections::BinaryHeap;

    #[derive(PartialEq)]
    struct Item(f64, usize);
    impl Eq for Item {}
    impl PartialOrd for Item {
        fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Item {
        fn cmp(&self, o: &Self) -> Ordering {
            o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
        }
    }

    let n = dag.len();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (u, v) in dag.arcs() {
        let c = coefficient(params, u, v)?;
        if c == 0.0 {
            log::warn!("zero coefficient on {} -> {}; arc ignored for betweenness", dag.name(u), dag.name(v));
            continue;
        }
        adj[u].push((v, 1.0 / c.abs()));
    }
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-10 * a.abs().max(b.abs());

    let mut cb = vec![0.0; n];
    for s in 0..n {
        let mut dist = vec![f64::INFINITY; n];
        let mut sigma = vec![0.0f64; n];
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut order = Vec::with_capacity(n);
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[s] = 0.0;
        sigma[s] = 1.0;
        heap.push(Item(0.0, s));
        while let Some(Item(d, u)) = heap.pop() {
            if done[u] || d > dist[u] {
                continue;
            }
            done[u] = true;
            order.push(u);
            for &(v, w) in &adj[u] {
                let nd = d + w;
                if dist[v].is_finite() && same(nd, dist[v]) {
                    sigma[v] += sigma[u];
                    preds[v].push(u);
                } else if nd < dist[v] {
                    dist[v] = nd;
                    sigma[v] = sigma[u];
                    preds[v] = vec![u];
                    heap.push(Item(nd, v));
                }
            }
        }
        let mut delta = vec![0.0; n];
        for &w in order.iter().rev() {
            for &u in &preds[w] {
                delta[u] += sigma[u] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    Ok(CentralityVector {
        kind: CentralityKind::Betweenness,
        values: cb,
    })
}

pub const MAX_PAGERANK_ITER: usize = 100_000;

/// Weighted PageRank. Node u passes its score along arcs in proportion to
/// |c(u, v)|; nodes without weighted out-arcs spread it uniformly.
pub fn pagerank(dag: &Dag, params: &GaussianBnParams, damping: f64) -> Result<CentralityVector> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::pre(format!("damping {damping} outside (0, 1)")));
    }
    let n = dag.len();
    if n == 0 {
        return Ok(CentralityVector {
            kind: CentralityKind::PageRank,
            values: Vec::new(),
        });
    }
    let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (u, v) in dag.arcs() {
        let w = coefficient(params, u, v)?.abs();
        if w > 0.0 {
            out[u].push((v, w));
        }
    }
    let wsum: Vec<f64> = out.iter().map(|o| o.iter().map(|x| x.1).sum()).collect();
    let nf = n as f64;
    let mut x = vec![1.0 / nf; n];
    for _ in 0..MAX_PAGERANK_ITER {
        let dangling: f64 = (0..n).filter(|&u| wsum[u] == 0.0).map(|u| x[u]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        let mut next = vec![base; n];
        for u in 0..n {
            if wsum[u] > 0.0 {
                let share = damping * x[u] / wsum[u];
                for &(v, w) in &out[u] {
                    next[v] += share * w;
                }
            }
        }
        let diff = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = next;
        if diff < 1e-12 {
            let s: f64 = x.iter().sum();
            x.iter_mut().for_each(|v| *v /= s);
            return Ok(CentralityVector {
                kind: CentralityKind::PageRank,
                values: x,
            });
        }
    }
    Err(Error::Convergence(MAX_PAGERANK_ITER))
}

struct Community {
    size: usize,
    /// Walk distribution after `steps` steps, started uniformly on the members.
    prob: Vec<f64>,
    internal: f64,
    /// Half the summed weighted degree of the members.
    total: f64,
    neighbors: BTreeMap<usize, f64>,
}

/// Walktrap community detection on the undirected projection of `dag`,
/// weighted by |coefficient|.
///
/// Every vertex carries a self-loop weighing the mean of its incident
/// weights. Adjacent communities are merged in order of the smallest
/// increase in mean squared walk distance, and the dendrogram is cut at the
/// first level of maximum modularity. Clusters are numbered by their
/// smallest member.
pub fn communities_walktrap(dag: &Dag, params: &GaussianBnParams, steps: usize) -> Result<Partition> {
    if steps < 1 {
        return Err(Error::pre("walktrap needs at least one step"));
    }
    let n = dag.len();
    if n == 0 {
        return Ok(Partition::new(Vec::new()));
    }
    let mut adj: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for (u, v) in dag.arcs() {
        let w = coefficient(params, u, v)?.abs();
        if w > 0.0 {
            *adj[u].entry(v).or_insert(0.0) += w;
            *adj[v].entry(u).or_insert(0.0) += w;
        }
    }
    let total_weight: f64 = adj.iter().flat_map(|a| a.values()).sum::<f64>() / 2.0;
    if total_weight == 0.0 {
        return Ok(Partition::new((0..n).collect()));
    }

    // Degrees including the self-loop.
    let loops: Vec<f64> = adj
        .iter()
        .map(|a| if a.is_empty() { 1.0 } else { a.values().sum::<f64>() / a.len() as f64 })
        .collect();
    let degree: Vec<f64> = (0..n).map(|i| adj[i].values().sum::<f64>() + loops[i]).collect();

    let step = |p: &[f64]| -> Vec<f64> {
        let mut q = vec![0.0; n];
        for i in 0..n {
            if p[i] == 0.0 {
                continue;
            }
            let f = p[i] / degree[i];
            q[i] += f * loops[i];
            for (&j, &w) in &adj[i] {
                q[j] += f * w;
            }
        }
        q
    };

    let mut comms: Vec<Option<Community>> = (0..n)
        .map(|i| {
            let mut p = vec![0.0; n];
            p[i] = 1.0;
            for _ in 0..steps {
                p = step(&p);
            }
            Some(Community {
                size: 1,
                prob: p,
                internal: 0.0,
                total: adj[i].values().sum::<f64>() / 2.0,
                neighbors: adj[i].clone(),
            })
        })
        .collect();

    let delta_sigma = |a: &Community, b: &Community| -> f64 {
        let dist: f64 = (0..n).map(|k| (a.prob[k] - b.prob[k]).powi(2) / degree[k]).sum();
        let (sa, sb) = (a.size as f64, b.size as f64);
        sa * sb / (sa + sb) * dist / n as f64
    };

    let modularity = |comms: &[Option<Community>]| -> f64 {
        comms
            .iter()
            .flatten()
            .map(|c| c.internal / total_weight - (c.total / total_weight).powi(2))
            .sum()
    };

    let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for i in 0..n {
        for &j in adj[i].keys() {
            if i < j {
                let d = delta_sigma(comms[i].as_ref().unwrap(), comms[j].as_ref().unwrap());
                pairs.insert((i, j), d);
            }
        }
    }

    // members[c] for every community ever created.
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut best_q = modularity(&comms);
    let mut best_cut: Vec<usize> = (0..n).collect();

    while let Some((&(a, b), _)) = pairs
        .iter()
        .min_by(|x, y| x.1.total_cmp(y.1).then(x.0.cmp(y.0)))
    {
        let ca = comms[a].take().unwrap();
        let cb = comms[b].take().unwrap();
        pairs.retain(|&(x, y), _| x != a && x != b && y != a && y != b);

        let size = ca.size + cb.size;
        let (wa, wb) = (ca.size as f64 / size as f64, cb.size as f64 / size as f64);
        let prob = ca.prob.iter().zip(&cb.prob).map(|(x, y)| wa * x + wb * y).collect();
        let between = ca.neighbors.get(&b).copied().unwrap_or(0.0);
        let mut neighbors = ca.neighbors;
        for (k, w) in cb.neighbors {
            *neighbors.entry(k).or_insert(0.0) += w;
        }
        neighbors.remove(&a);
        neighbors.remove(&b);
        let id = comms.len();
        let merged = Community {
            size,
            prob,
            internal: ca.internal + cb.internal + between,
            total: ca.total + cb.total,
            neighbors,
        };
        for (&k, &w) in &merged.neighbors {
            let other = comms[k].as_mut().unwrap();
            other.neighbors.remove(&a);
            other.neighbors.remove(&b);
            other.neighbors.insert(id, w);
        }
        let new_pairs: Vec<(usize, f64)> = merged
            .neighbors
            .keys()
            .map(|&k| (k, delta_sigma(&merged, comms[k].as_ref().unwrap())))
            .collect();
        for (k, d) in new_pairs {
            pairs.insert((k, id), d);
        }
        comms.push(Some(merged));
        let mut m = std::mem::take(&mut members[a]);
        m.extend(std::mem::take(&mut members[b]));
        members.push(m);

        let q = modularity(&comms);
        if q > best_q {
            best_q = q;
            let mut cut = vec![0; n];
            for (c, slot) in comms.iter().enumerate() {
                if slot.is_some() {
                    for &v in &members[c] {
                        cut[v] = c;
                    }
                }
            }
            best_cut = cut;
        }
    }
    Ok(canonical_partition(&best_cut))
}

/// Renumbers clusters by their smallest member.
pub(crate) fn canonical_partition(assignment: &[usize]) -> Partition {
    Partition::new(assignment.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("n{i}")).collect()
    }

    fn model(k: usize, arcs: &[(usize, usize, f64)]) -> (Dag, GaussianBnParams) {
        let idx: Vec<(usize, usize)> = arcs.iter().map(|&(u, v, _)| (u, v)).collect();
        let dag = Dag::from_arcs(names(k), &idx).unwrap();
        let params = GaussianBnParams::from_arcs(&dag, vec![0.0; k], vec![1.0; k], arcs).unwrap();
        (dag, params)
    }

    #[test]
    fn partition_numbering_follows_first_appearance() {
        let p = Partition::new(vec![7, 3, 7, 9]);
        assert_eq!(p.assignment(), &[0, 1, 0, 2]);
        assert_eq!(p.label(2), "C3");
        assert_eq!(p.clusters(), vec![vec![0, 2], vec![1], vec![3]]);
        assert!(p.same_grouping(&Partition::new(vec![1, 0, 1, 2])));
        assert!(!p.same_grouping(&Partition::new(vec![0, 0, 0, 1])));
    }

    #[test]
    fn partition_csv_round_trip() {
        let p = Partition::with_labels(vec![1, 0, 1], vec!["A".into(), "B".into()]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&names(3), &mut buf).unwrap();
        let back = Partition::read_csv(&names(3), buf.as_slice()).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn chain_degrees_and_betweenness() {
        let (dag, params) = model(3, &[(0, 1, 0.3), (1, 2, -2.0)]);
        let (din, dout) = degree_centrality(&dag);
        assert_eq!(dout.values, vec![1.0, 1.0, 0.0]);
        assert_eq!(din.values, vec![0.0, 1.0, 1.0]);
        assert_eq!(betweenness(&dag, &params).unwrap().values, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn diamond_splits_betweenness() {
        let (dag, params) = model(4, &[(0, 1, 0.5), (0, 2, 0.5), (1, 3, 0.5), (2, 3, 0.5)]);
        let b = betweenness(&dag, &params).unwrap().values;
        assert_eq!(b, vec![0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn weights_pick_the_short_route() {
        // 0 -> 1 -> 3 has length 2, 0 -> 2 -> 3 has length 20.
        let (dag, params) = model(4, &[(0, 1, 1.0), (0, 2, 0.1), (1, 3, 1.0), (2, 3, 0.1)]);
        let b = betweenness(&dag, &params).unwrap().values;
        assert_eq!(b, vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn pagerank_sums_to_one_and_ignores_scale() {
        let arcs = [(0, 1, 0.2), (0, 2, -0.7), (1, 2, 0.4), (2, 3, 0.9)];
        let (dag, params) = model(4, &arcs);
        let pr = pagerank(&dag, &params, 0.85).unwrap();
        assert!((pr.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let scaled: Vec<(usize, usize, f64)> = arcs.iter().map(|&(u, v, c)| (u, v, c * 10.0)).collect();
        let (dag2, params2) = model(4, &scaled);
        let pr2 = pagerank(&dag2, &params2, 0.85).unwrap();
        for (a, b) in pr.values.iter().zip(&pr2.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pagerank_of_edgeless_graph_is_uniform() {
        let (dag, params) = model(3, &[]);
        let pr = pagerank(&dag, &params, 0.85).unwrap();
        for v in pr.values {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(pagerank(&dag, &params, 1.0).is_err());
    }

    #[test]
    fn walktrap_separates_disjoint_triangles() {
        let (dag, params) = model(
            6,
            &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)],
        );
        let p = communities_walktrap(&dag, &params, 4).unwrap();
        assert_eq!(p.assignment(), &[0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn walktrap_single_node() {
        let (dag, params) = model(1, &[]);
        let p = communities_walktrap(&dag, &params, 4).unwrap();
        assert_eq!(p.n_clusters(), 1);
        assert!(communities_walktrap(&dag, &params, 0).is_err());
    }
}
