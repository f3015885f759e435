//! Indirect influence in a linear network: path products and total effects.

use std::io::Write;

use crate::analytics::Partition;
use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::params::GaussianBnParams;

pub const DEFAULT_PATH_CAP: usize = 1_000_000;

/// A directed path with the product of its arc coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct InfluencePath {
    pub nodes: Vec<usize>,
    pub product: f64,
}

impl InfluencePath {
    pub fn display(&self, dag: &Dag) -> String {
        self.nodes.iter().map(|&v| dag.name(v)).collect::<Vec<_>>().join("-")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceResult {
    pub source: usize,
    pub target: usize,
    pub total: f64,
    pub paths: Option<Vec<InfluencePath>>,
}

impl InfluenceResult {
    /// CSV `source,target,total,path_rank,path,product`, one row per path or a
    /// single row with empty path fields.
    pub fn write_csv<W: Write>(&self, dag: &Dag, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["source", "target", "total", "path_rank", "path", "product"])?;
        let (s, t, total) = (dag.name(self.source), dag.name(self.target), self.total.to_string());
        match &self.paths {
            Some(paths) if !paths.is_empty() => {
                for (i, p) in paths.iter().enumerate() {
                    w.write_record([s, t, &total, &(i + 1).to_string(), &p.display(dag), &p.product.to_string()])?;
                }
            }
            _ => w.write_record([s, t, &total, "", "", ""])?,
        }
        w.flush()?;
        Ok(())
    }
}

/// Every directed path `from ~> to`, in depth-first order with children
/// visited by index. Fails once more than `cap` paths have been found.
pub fn enumerate_paths_capped(dag: &Dag, from: usize, to: usize, cap: usize) -> Result<Vec<Vec<usize>>> {
    if from == to {
        return Err(Error::pre("path source and target must differ"));
    }
    if from >= dag.len() || to >= dag.len() {
        return Err(Error::pre("node index out of range"));
    }
    // Prune branches that cannot reach the target.
    let mut reaches = vec![false; dag.len()];
    reaches[to] = true;
    for &v in dag.topological_order().iter().rev() {
        if dag.children(v).iter().any(|&c| reaches[c]) {
            reaches[v] = true;
        }
    }
    let mut out = Vec::new();
    if !reaches[from] {
        return Ok(out);
    }
    let mut path = vec![from];
    let mut stack: Vec<usize> = vec![0];
    while let Some(pos) = stack.last_mut() {
        let u = *path.last().unwrap();
        let children = dag.children(u);
        if *pos >= children.len() {
            stack.pop();
            path.pop();
            continue;
        }
        let c = children[*pos];
        *pos += 1;
        if c == to {
            let mut p = path.clone();
            p.push(to);
            out.push(p);
            if out.len() > cap {
                return Err(Error::PathCap { cap });
            }
        } else if reaches[c] {
            path.push(c);
            stack.push(0);
        }
    }
    Ok(out)
}

pub fn enumerate_paths(dag: &Dag, from: usize, to: usize) -> Result<Vec<Vec<usize>>> {
    enumerate_paths_capped(dag, from, to, DEFAULT_PATH_CAP)
}

pub fn path_product(path: &[usize], params: &GaussianBnParams) -> Result<f64> {
    path.windows(2).try_fold(1.0, |acc, w| {
        params
            .coefficient(w[0], w[1])
            .map(|c| acc * c)
            .ok_or_else(|| Error::pre(format!("no arc {} -> {}", w[0], w[1])))
    })
}

/// d x_to / d x_from: the sum of path products over all directed paths,
/// by dynamic programming over a topological order.
pub fn total_influence(dag: &Dag, params: &GaussianBnParams, from: usize, to: usize) -> Result<f64> {
    if from >= dag.len() || to >= dag.len() {
        return Err(Error::pre("node index out of range"));
    }
    let mut infl = vec![0.0; dag.len()];
    infl[from] = 1.0;
    let order = dag.topological_order();
    let start = order.iter().position(|&v| v == from).unwrap_or(order.len());
    for &v in &order[start + 1..] {
        let mut s = 0.0;
        for &(p, c) in params.parent_coefficients(v) {
            s += c * infl[p];
        }
        infl[v] = s;
    }
    Ok(infl[to])
}

/// The `k` paths of largest |product|, ties broken by node sequence.
pub fn top_paths(dag: &Dag, params: &GaussianBnParams, from: usize, to: usize, k: usize) -> Result<Vec<InfluencePath>> {
    if k < 1 {
        return Err(Error::pre("k must be at least 1"));
    }
    let mut paths = enumerate_paths(dag, from, to)?
        .into_iter()
        .map(|nodes| {
            let product = path_product(&nodes, params)?;
            Ok(InfluencePath { nodes, product })
        })
        .collect::<Result<Vec<_>>>()?;
    paths.sort_by(|a, b| {
        b.product
            .abs()
            .total_cmp(&a.product.abs())
            .then_with(|| a.nodes.cmp(&b.nodes))
    });
    paths.truncate(k);
    Ok(paths)
}

/// Sum of |coefficient| over arcs between each ordered pair of clusters.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrix {
    labels: Vec<String>,
    sums: Vec<f64>,
}

impl CouplingMatrix {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.sums[from * self.labels.len() + to]
    }

    pub fn get_by_label(&self, from: &str, to: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == from)?;
        let j = self.labels.iter().position(|l| l == to)?;
        Some(self.get(i, j))
    }

    /// Non-zero off-diagonal entries as (from, to, sum).
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let k = self.labels.len();
        (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && self.get(i, j) > 0.0)
            .map(|(i, j)| (i, j, self.get(i, j)))
            .collect()
    }

    /// CSV `from_cluster,to_cluster,sum_abs`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["from_cluster", "to_cluster", "sum_abs"])?;
        for (i, j, s) in self.entries() {
            w.write_record([self.labels[i].as_str(), self.labels[j].as_str(), &s.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn cluster_coupling(dag: &Dag, params: &GaussianBnParams, partition: &Partition) -> Result<CouplingMatrix> {
    if partition.len() != dag.len() {
        return Err(Error::pre("partition does not cover the graph"));
    }
    let k = partition.n_clusters();
    let mut sums = vec![0.0; k * k];
    for (u, v, c) in params.arcs() {
        let (a, b) = (partition.cluster_of(u), partition.cluster_of(v));
        if a != b {
            sums[a * k + b] += c.abs();
        }
    }
    Ok(CouplingMatrix {
        labels: partition.labels().to_vec(),
        sums,
    })
}

/// Median of |c| over all arcs; the mean of the middle two for an even count.
pub fn median_abs_coefficient(params: &GaussianBnParams) -> Result<f64> {
    let mut v: Vec<f64> = params.arcs().iter().map(|a| a.2.abs()).collect();
    if v.is_empty() {
        return Err(Error::pre("median of an empty arc set"));
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Ok(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(k: usize, arcs: &[(usize, usize, f64)]) -> (Dag, GaussianBnParams) {
        let names = (0..k).map(|i| format!("n{i}")).collect();
        let idx: Vec<(usize, usize)> = arcs.iter().map(|&(u, v, _)| (u, v)).collect();
        let dag = Dag::from_arcs(names, &idx).unwrap();
        let params = GaussianBnParams::from_arcs(&dag, vec![0.0; k], vec![1.0; k], arcs).unwrap();
        (dag, params)
    }

    // q=0, r=1, s=2, t=3
    fn four_paths() -> (Dag, GaussianBnParams) {
        model(4, &[(0, 1, 0.5), (0, 2, 0.4), (0, 3, 0.3), (1, 2, 0.2), (1, 3, 0.6), (2, 3, 0.7)])
    }

    #[test]
    fn example_graph_has_four_paths() {
        let (dag, _) = four_paths();
        let paths = enumerate_paths(&dag, 0, 3).unwrap();
        assert_eq!(paths, vec![vec![0, 1, 2, 3], vec![0, 1, 3], vec![0, 2, 3], vec![0, 3]]);
    }

    #[test]
    fn total_equals_path_sum() {
        let (dag, params) = four_paths();
        let sum: f64 = enumerate_paths(&dag, 0, 3)
            .unwrap()
            .iter()
            .map(|p| path_product(p, &params).unwrap())
            .sum();
        let total = total_influence(&dag, &params, 0, 3).unwrap();
        assert!((sum - total).abs() < 1e-15);
        assert!((total - (0.5 * 0.2 * 0.7 + 0.5 * 0.6 + 0.4 * 0.7 + 0.3)).abs() < 1e-15);
    }

    #[test]
    fn trivial_cases() {
        let (dag, params) = four_paths();
        assert_eq!(total_influence(&dag, &params, 2, 2).unwrap(), 1.0);
        assert_eq!(total_influence(&dag, &params, 3, 0).unwrap(), 0.0);
        assert!(enumerate_paths(&dag, 3, 0).unwrap().is_empty());
        assert!(enumerate_paths(&dag, 1, 1).is_err());
        assert_eq!(path_product(&[1, 3], &params).unwrap(), 0.6);
        assert!(path_product(&[3, 1], &params).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let (dag, _) = four_paths();
        assert!(matches!(enumerate_paths_capped(&dag, 0, 3, 3), Err(Error::PathCap { cap: 3 })));
        assert_eq!(enumerate_paths_capped(&dag, 0, 3, 4).unwrap().len(), 4);
    }

    #[test]
    fn top_paths_rank_by_magnitude() {
        let (dag, params) = four_paths();
        let top = top_paths(&dag, &params, 0, 3, 2).unwrap();
        assert_eq!(top[0].nodes, vec![0, 1, 3]);
        assert_eq!(top[1].nodes, vec![0, 3]);
        assert_eq!(top_paths(&dag, &params, 0, 3, 10).unwrap().len(), 4);
    }

    #[test]
    fn coupling_and_median() {
        let (dag, params) = model(4, &[(0, 1, 0.1), (0, 2, -0.2), (1, 3, 0.3), (2, 3, 0.4)]);
        let p = Partition::new(vec![0, 0, 1, 1]);
        let m = cluster_coupling(&dag, &params, &p).unwrap();
        assert!((m.get(0, 1) - 0.5).abs() < 1e-15);
        assert_eq!(m.get(1, 0), 0.0);
        assert!((median_abs_coefficient(&params).unwrap() - 0.25).abs() < 1e-15);
        let one = cluster_coupling(&dag, &params, &Partition::new(vec![0; 4])).unwrap();
        assert!(one.entries().is_empty());
    }

    #[test]
    fn median_single_and_empty() {
        let (_, params) = model(2, &[(0, 1, -0.5)]);
        assert_eq!(median_abs_coefficient(&params).unwrap(), 0.5);
        let (_, empty) = model(2, &[]);
        assert!(median_abs_coefficient(&empty).is_err());
    }
}
