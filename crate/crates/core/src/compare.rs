//! Comparisons against published factor structures and external networks.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::ops::RangeInclusive;

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, FisherSnedecor, Normal};
use statrs::function::beta::beta_reg;

use crate::analytics::Partition;
use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::params::GaussianBnParams;

/// Items with a fixed-length loading vector each.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorTable {
    items: Vec<String>,
    dim: usize,
    values: Vec<f64>,
}

impl FactorTable {
    pub fn new(items: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if items.len() != rows.len() {
            return Err(Error::pre("one factor row per item required"));
        }
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::pre("factor rows have different lengths"));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::pre("non-finite factor value"));
        }
        Ok(FactorTable {
            items,
            dim,
            values: rows.into_iter().flatten().collect(),
        })
    }

    /// Reads `item,f1,f2[,...]`.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut items = Vec::new();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let row = rec
                .iter()
                .skip(1)
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line,
                    message: e.to_string(),
                })?;
            items.push(rec[0].trim().to_string());
            rows.push(row);
        }
        FactorTable::new(items, rows)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["item".to_string()];
        header.extend((1..=self.dim).map(|i| format!("f{i}")));
        w.write_record(&header)?;
        for (i, item) in self.items.iter().enumerate() {
            let mut rec = vec![item.clone()];
            rec.extend(self.row(i).iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansResult {
    /// Cluster per item, numbered by first appearance.
    pub assignment: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub total_within_ss: f64,
    pub best_seed: u64,
}

impl KMeansResult {
    pub fn partition(&self) -> Partition {
        Partition::new(self.assignment.clone())
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// One Lloyd run from `k` distinct items drawn with `seed`. Returns the
/// result and the within-cluster sum of squares after every update step.
pub fn kmeans_lloyd(data: &FactorTable, k: usize, seed: u64) -> Result<(KMeansResult, Vec<f64>)> {
    const MAX_ITER: usize = 1000;
    let n = data.len();
    if k < 1 || k > n {
        return Err(Error::pre(format!("k = {k} must lie in 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<f64>> = rand::seq::index::sample(&mut rng, n, k)
        .into_iter()
        .map(|i| data.row(i).to_vec())
        .collect();
    let mut assignment = vec![usize::MAX; n];
    let mut trace = Vec::new();
    for _ in 0..MAX_ITER {
        let mut changed = false;
        for (i, slot) in assignment.iter_mut().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| sq_dist(data.row(i), &centers[a]).total_cmp(&sq_dist(data.row(i), &centers[b])))
                .unwrap_or(0);
            if *slot != best {
                *slot = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<usize> = (0..n).filter(|&i| assignment[i] == c).collect();
            if members.is_empty() {
                continue;
            }
            for (d, x) in center.iter_mut().enumerate() {
                *x = members.iter().map(|&i| data.row(i)[d]).sum::<f64>() / members.len() as f64;
            }
        }
        trace.push((0..n).map(|i| sq_dist(data.row(i), &centers[assignment[i]])).sum());
    }
    let total_within_ss = (0..n).map(|i| sq_dist(data.row(i), &centers[assignment[i]])).sum();

    // Renumber clusters by first appearance; unused centers go last.
    let mut order: Vec<usize> = Vec::with_capacity(k);
    for &c in &assignment {
        if !order.contains(&c) {
            order.push(c);
        }
    }
    order.extend((0..k).filter(|c| !assignment.contains(c)));
    let rank: Vec<usize> = (0..k).map(|c| order.iter().position(|&o| o == c).unwrap()).collect();
    let result = KMeansResult {
        assignment: assignment.iter().map(|&c| rank[c]).collect(),
        centers: order.iter().map(|&c| centers[c].clone()).collect(),
        total_within_ss,
        best_seed: seed,
    };
    Ok((result, trace))
}

/// Lloyd k-means restarted once per seed; keeps the run with the smallest
/// within-cluster sum of squares, the smaller seed on ties.
pub fn kmeans_best_seed(data: &FactorTable, k: usize, seeds: RangeInclusive<u64>, exec: Execution) -> Result<KMeansResult> {
    if seeds.is_empty() {
        return Err(Error::pre("empty seed range"));
    }
    let first = *seeds.start();
    let count = (seeds.end() - first) as usize + 1;
    let runs = par::map_indices(exec, count, |i| kmeans_lloyd(data, k, first + i as u64).map(|r| r.0));
    let mut best: Option<KMeansResult> = None;
    for r in runs {
        let r = r?;
        let better = best.as_ref().is_none_or(|b| {
            r.total_within_ss < b.total_within_ss || (r.total_within_ss == b.total_within_ss && r.best_seed < b.best_seed)
        });
        if better {
            best = Some(r);
        }
    }
    best.ok_or_else(|| Error::pre("no k-means run completed"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub scores: FactorTable,
    /// Share of total variance per retained component.
    pub explained: Vec<f64>,
    /// Unit loading vector per component.
    pub components: Vec<Vec<f64>>,
}

/// Principal component scores of the centred table. Each component is signed
/// so that its largest-magnitude loading is positive.
pub fn pca_project(data: &FactorTable, dims: usize) -> Result<Projection> {
    let (n, d) = (data.len(), data.dim());
    if dims < 1 || dims > d || dims > n {
        return Err(Error::pre(format!("cannot project {n} x {d} data onto {dims} components")));
    }
    let means: Vec<f64> = (0..d).map(|j| (0..n).map(|i| data.row(i)[j]).sum::<f64>() / n as f64).collect();
    let x = DMatrix::from_fn(n, d, |i, j| data.row(i)[j] - means[j]);
    let svd = x.clone().svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::Numeric("SVD failed".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));
    let total: f64 = svd.singular_values.iter().map(|s| s * s).sum();

    let mut components = Vec::with_capacity(dims);
    let mut explained = Vec::with_capacity(dims);
    for &c in order.iter().take(dims) {
        let mut v: Vec<f64> = vt.row(c).iter().copied().collect();
        let lead = v
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
            .map_or(1.0, |(_, x)| x);
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let s = svd.singular_values[c];
        explained.push(if total > 0.0 { s * s / total } else { 0.0 });
        components.push(v);
    }
    let rows = (0..n)
        .map(|i| {
            components
                .iter()
                .map(|v| (0..d).map(|j| x[(i, j)] * v[j]).sum())
                .collect()
        })
        .collect();
    Ok(Projection {
        scores: FactorTable::new(data.items().to_vec(), rows)?,
        explained,
        components,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ellipse {
    pub center: [f64; 2],
    /// Semi-axis lengths, major first.
    pub axes: [f64; 2],
    /// Direction of the major axis in radians, in [0, pi).
    pub angle: f64,
}

impl Ellipse {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let (dx, dy) = (p[0] - self.center[0], p[1] - self.center[1]);
        let (s, c) = self.angle.sin_cos();
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        let term = |x: f64, a: f64| if a > 0.0 { (x / a).powi(2) } else if x.abs() < 1e-12 { 0.0 } else { f64::INFINITY };
        term(u, self.axes[0]) + term(v, self.axes[1]) <= 1.0
    }

    /// `n` points on the boundary, for plotting.
    pub fn boundary(&self, n: usize) -> Vec<[f64; 2]> {
        let (s, c) = self.angle.sin_cos();
        (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                let (u, v) = (self.axes[0] * t.cos(), self.axes[1] * t.sin());
                [self.center[0] + c * u - s * v, self.center[1] + s * u + c * v]
            })
            .collect()
    }
}

/// Concentration ellipse at `level`: sample covariance shape scaled by
/// sqrt(2 F(level; 2, n - 1)).
pub fn confidence_ellipse(points: &[[f64; 2]], level: f64) -> Result<Ellipse> {
    let n = points.len();
    if n < 3 {
        return Err(Error::pre("an ellipse needs at least 3 points"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::pre(format!("level {level} outside (0, 1)")));
    }
    let nf = n as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / nf;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / nf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - cx, p[1] - cy);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let cov = Matrix2::new(sxx, sxy, sxy, syy) / (nf - 1.0);
    let eig = SymmetricEigen::new(cov);
    let (major, minor) = if eig.eigenvalues[0] >= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let f = FisherSnedecor::new(2.0, nf - 1.0).map_err(|e| Error::Numeric(e.to_string()))?;
    let radius = (2.0 * f.inverse_cdf(level)).sqrt();
    let lam = |i: usize| {
        let l = eig.eigenvalues[i];
        if l <= 1e-14 * eig.eigenvalues.abs().max() {
            0.0
        } else {
            l
        }
    };
    if lam(minor) == 0.0 {
        log::warn!("degenerate covariance; ellipse has a zero-length axis");
    }
    let v = eig.eigenvectors.column(major);
    let mut angle = v[1].atan2(v[0]);
    if angle < 0.0 {
        angle += std::f64::consts::PI;
    }
    if angle >= std::f64::consts::PI {
        angle -= std::f64::consts::PI;
    }
    Ok(Ellipse {
        center: [cx, cy],
        axes: [radius * lam(major).sqrt(), radius * lam(minor).sqrt()],
        angle,
    })
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::pre("pearson needs two equal-length samples of size >= 2"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Numeric("zero variance in correlation input".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// t = r sqrt(df / (1 - r^2)) and its two-sided Student-t p-value.
pub fn pearson_significance(r: f64, df: u32) -> Result<(f64, f64)> {
    if df < 1 {
        return Err(Error::pre("df must be at least 1"));
    }
    if r.is_nan() || r.abs() > 1.0 {
        return Err(Error::pre(format!("correlation {r} outside [-1, 1]")));
    }
    if r.abs() == 1.0 {
        return Ok((r.signum() * f64::INFINITY, 0.0));
    }
    let df = f64::from(df);
    let t = r * (df / (1.0 - r * r)).sqrt();
    let p = beta_reg(df / 2.0, 0.5, df / (df + t * t));
    Ok((t, p.min(1.0)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MannWhitney {
    /// U of the first sample: its rank sum minus n_a (n_a + 1) / 2.
    pub u: f64,
    pub p: f64,
    pub exact: bool,
}

/// Largest n_a * n_b for which the exact null distribution is enumerated.
pub const MWU_EXACT_LIMIT: usize = 400;

fn midranks(pooled: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let n = pooled.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| pooled[a].total_cmp(&pooled[b]));
    let mut ranks = vec![0.0; n];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && pooled[idx[j + 1]] == pooled[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

/// Two-sided Mann-Whitney U with midranks. Exact when n_a n_b <= 400,
/// otherwise normal with tie and continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::pre("both samples must be non-empty"));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::pre("NaN in Mann-Whitney input"));
    }
    let (na, nb) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let ra: f64 = ranks[..na].iter().sum();
    let u = ra - (na * (na + 1)) as f64 / 2.0;
    let mu = (na * nb) as f64 / 2.0;

    if na * nb <= MWU_EXACT_LIMIT {
        // Doubled ranks are integers, so rank sums can index a table.
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let max_sum: usize = doubled.iter().sum();
        let mut dp = vec![vec![0.0f64; max_sum + 1]; na + 1];
        dp[0][0] = 1.0;
        for &r in &doubled {
            for j in (1..=na).rev() {
                let (lo, hi) = dp.split_at_mut(j);
                for s in (r..=max_sum).rev() {
                    hi[0][s] += lo[j - 1][s - r];
                }
            }
        }
        let offset = na * (na + 1);
        let obs = (2.0 * u - 2.0 * mu).abs();
        let total: f64 = dp[na].iter().sum();
        let hits: f64 = dp[na]
            .iter()
            .enumerate()
            .filter(|&(s, &c)| c > 0.0 && s >= offset)
            .filter(|&(s, _)| ((s - offset) as f64 - 2.0 * mu).abs() >= obs - 1e-9)
            .map(|(_, &c)| c)
            .sum();
        return Ok(MannWhitney {
            u,
            p: (hits / total).min(1.0),
            exact: true,
        });
    }

    let nf = (na + nb) as f64;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (nf * (nf - 1.0));
    let var = (na * nb) as f64 / 12.0 * ((nf + 1.0) - tie_term);
    if var <= 0.0 {
        return Ok(MannWhitney { u, p: 1.0, exact: false });
    }
    let z = ((u - mu).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::standard();
    Ok(MannWhitney {
        u,
        p: (2.0 * normal.sf(z)).min(1.0),
        exact: false,
    })
}

/// How directed coefficients fold onto unordered pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum FoldSign {
    #[default]
    Signed,
    Absolute,
}

/// Weights on unordered item pairs. Keys are stored with the smaller name first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EdgeWeightSet {
    weights: BTreeMap<(String, String), f64>,
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl EdgeWeightSet {
    pub fn new() -> Self {
        EdgeWeightSet::default()
    }

    /// Adds `w` to the weight of {a, b}.
    pub fn add(&mut self, a: &str, b: &str, w: f64) {
        *self.weights.entry(pair_key(a, b)).or_insert(0.0) += w;
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        self.weights.get(&pair_key(a, b)).copied()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, String), &f64)> {
        self.weights.iter()
    }

    /// Folds every arc u -> v onto {u, v}.
    pub fn from_model(dag: &Dag, params: &GaussianBnParams, sign: FoldSign) -> Self {
        let mut s = EdgeWeightSet::new();
        for (u, v, c) in params.arcs() {
            s.add(dag.name(u), dag.name(v), c);
        }
        if sign == FoldSign::Absolute {
            s.weights.values_mut().for_each(|w| *w = w.abs());
        }
        s
    }

    /// Reads `a,b,weight`; a pair listed twice is an error.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut s = EdgeWeightSet::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let bad = |m: String| Error::Parse { line, message: m };
            if rec.len() != 3 {
                return Err(bad("expected a,b,weight".into()));
            }
            let w: f64 = rec[2].trim().parse().map_err(|_| bad(format!("bad weight `{}`", &rec[2])))?;
            let (a, b) = (rec[0].trim(), rec[1].trim());
            if a == b {
                return Err(bad(format!("self pair {a}")));
            }
            if s.get(a, b).is_some() {
                return Err(bad(format!("pair {a},{b} listed twice")));
            }
            s.add(a, b, w);
        }
        Ok(s)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["a", "b", "weight"])?;
        for ((a, b), v) in &self.weights {
            w.write_record([a.as_str(), b.as_str(), &v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Renames items through `map`; pairs touching an unmapped item are dropped.
    pub fn relabel(&self, map: &BTreeMap<String, String>) -> EdgeWeightSet {
        let mut s = EdgeWeightSet::new();
        for ((a, b), &w) in &self.weights {
            if let (Some(x), Some(y)) = (map.get(a), map.get(b)) {
                s.add(x, y, w);
            }
        }
        s
    }

    /// Pairs whose two items both lie in `items`.
    pub fn restrict_to(&self, items: &BTreeSet<String>) -> EdgeWeightSet {
        EdgeWeightSet {
            weights: self
                .weights
                .iter()
                .filter(|((a, b), _)| items.contains(a) && items.contains(b))
                .map(|(k, &w)| (k.clone(), w))
                .collect(),
        }
    }

    pub fn items(&self) -> BTreeSet<String> {
        self.weights.keys().flat_map(|(a, b)| [a.clone(), b.clone()]).collect()
    }
}

/// Reads a two-column `from,to` item map such as `rsq_item,ecr_item`.
pub fn read_item_map<R: Read>(input: R) -> Result<BTreeMap<String, String>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut m = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(Error::Parse {
                line: rec.position().map_or(0, |p| p.line()),
                message: "expected two columns".into(),
            });
        }
        m.insert(rec[0].trim().to_string(), rec[1].trim().to_string());
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairMode {
    /// Every pair listed in either set; absent weights count as 0.
    Union,
    /// Pairs with a non-zero weight in both sets.
    Intersection,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeCorrelation {
    pub n_pairs: usize,
    pub r: f64,
    pub t: f64,
    pub p: f64,
    /// (pair, ours, theirs) in key order.
    pub pairs: Vec<((String, String), f64, f64)>,
}

pub fn edge_set_correlation(ours: &EdgeWeightSet, theirs: &EdgeWeightSet, mode: PairMode) -> Result<EdgeCorrelation> {
    let keys: BTreeSet<&(String, String)> = ours.weights.keys().chain(theirs.weights.keys()).collect();
    let pairs: Vec<((String, String), f64, f64)> = keys
        .into_iter()
        .map(|k| {
            let x = ours.weights.get(k).copied().unwrap_or(0.0);
            let y = theirs.weights.get(k).copied().unwrap_or(0.0);
            (k.clone(), x, y)
        })
        .filter(|&(_, x, y)| mode == PairMode::Union || (x != 0.0 && y != 0.0))
        .collect();
    if pairs.len() < 3 {
        return Err(Error::pre(format!("{} pairs; at least 3 are needed", pairs.len())));
    }
    let x: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    let r = pearson(&x, &y)?;
    let (t, p) = pearson_significance(r, (pairs.len() - 2) as u32)?;
    Ok(EdgeCorrelation {
        n_pairs: pairs.len(),
        r,
        t,
        p,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table(rows: Vec<Vec<f64>>) -> FactorTable {
        let items = (0..rows.len()).map(|i| format!("i{i}")).collect();
        FactorTable::new(items, rows).unwrap()
    }

    #[test]
    fn kmeans_extremes() {
        let t = table(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 3.0], vec![5.0, 5.0]]);
        let one = kmeans_best_seed(&t, 1, 1..=5, Execution::Sequential).unwrap();
        // Total sum of squares about the grand mean.
        let mean = [1.5, 2.0];
        let tss: f64 = (0..4).map(|i| sq_dist(t.row(i), &mean)).sum();
        assert_relative_eq!(one.total_within_ss, tss, epsilon = 1e-12);
        let all = kmeans_best_seed(&t, 4, 1..=5, Execution::Sequential).unwrap();
        assert_eq!(all.total_within_ss, 0.0);
        assert!(kmeans_best_seed(&t, 5, 1..=5, Execution::Sequential).is_err());
    }

    #[test]
    fn kmeans_prefers_smaller_seed_on_ties() {
        let t = table(vec![vec![0.0], vec![0.1], vec![10.0], vec![10.1]]);
        let r = kmeans_best_seed(&t, 2, 1..=50, Execution::Sequential).unwrap();
        assert_eq!(r.assignment, vec![0, 0, 1, 1]);
        let first_optimal = (1..=50)
            .find(|&s| kmeans_lloyd(&t, 2, s).unwrap().0.total_within_ss == r.total_within_ss)
            .unwrap();
        assert_eq!(r.best_seed, first_optimal);
    }

    #[test]
    fn pca_of_rank_one_data() {
        let t = table((0..5).map(|i| vec![i as f64, 2.0 * i as f64]).collect());
        let p = pca_project(&t, 2).unwrap();
        assert_relative_eq!(p.explained[0], 1.0, epsilon = 1e-12);
        assert!(p.components[0].iter().all(|&x| x > 0.0));
    }

    #[test]
    fn ellipse_of_axis_points() {
        let pts = [[2.0, 0.0], [-2.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
        let e = confidence_ellipse(&pts, 0.95).unwrap();
        assert_relative_eq!(e.center[0], 0.0);
        assert_relative_eq!(e.center[1], 0.0);
        assert!(e.angle.abs() < 1e-12 || (e.angle - std::f64::consts::PI).abs() < 1e-12);
        let small = confidence_ellipse(&pts, 0.5).unwrap();
        assert!(small.axes[0] < e.axes[0] && small.axes[1] < e.axes[1]);
        assert!(confidence_ellipse(&pts[..2], 0.95).is_err());
    }

    #[test]
    fn pearson_significance_edges() {
        assert_eq!(pearson_significance(0.0, 7).unwrap(), (0.0, 1.0));
        let (t, p) = pearson_significance(1.0, 3).unwrap();
        assert!(t.is_infinite() && p == 0.0);
        let (a, pa) = pearson_significance(0.4, 12).unwrap();
        let (b, pb) = pearson_significance(-0.4, 12).unwrap();
        assert_eq!(a, -b);
        assert_relative_eq!(pa, pb);
    }

    #[test]
    fn mwu_small_cases() {
        let same = mann_whitney_u(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(same.u, 4.5);
        assert!(same.p >= 0.99);
        let apart = mann_whitney_u(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(apart.u, 9.0);
        assert!(apart.exact);
        assert_relative_eq!(apart.p, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn mwu_large_uses_normal() {
        let a: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..30).map(|i| i as f64 + 0.5).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert!(!r.exact);
        assert!(r.p > 0.5);
    }

    #[test]
    fn edge_sets_fold_and_correlate() {
        let mut a = EdgeWeightSet::new();
        let mut b = EdgeWeightSet::new();
        for (i, (x, y)) in [(0.1, 0.2), (0.2, 0.35), (0.0, 0.1), (0.4, 0.0), (0.5, 0.6)].iter().enumerate() {
            a.add(&format!("x{i}"), &format!("y{i}"), *x);
            b.add(&format!("y{i}"), &format!("x{i}"), *y);
        }
        let u = edge_set_correlation(&a, &b, PairMode::Union).unwrap();
        assert_eq!(u.n_pairs, 5);
        let i = edge_set_correlation(&a, &b, PairMode::Intersection).unwrap();
        assert_eq!(i.n_pairs, 3);
        let same = edge_set_correlation(&a, &a, PairMode::Union).unwrap();
        assert_relative_eq!(same.r, 1.0);
        assert!(same.p < 1e-10);
    }

    #[test]
    fn relabel_drops_unmapped() {
        let mut s = EdgeWeightSet::new();
        s.add("1", "2", 0.5);
        s.add("1", "10", 0.3);
        let map: BTreeMap<String, String> = [("1", "Q27"), ("2", "Q25")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let r = s.relabel(&map);
        assert_eq!(r.len(), 1);
        assert_eq!(r.get("Q27", "Q25"), Some(0.5));
    }
}
