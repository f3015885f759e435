//! Linear-Gaussian parameters: maximum-likelihood fit, model interchange and
//! the bundled reference model.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::ingest::ResponseTable;
use crate::par::{self, Execution};
use crate::score::{regress, SufficientStats};

/// Per-node intercept, residual standard deviation and parent coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianBnParams {
    nodes: Vec<String>,
    intercept: Vec<f64>,
    residual_sd: Vec<f64>,
    /// `coeffs[v]`: (parent, coefficient), sorted by parent index.
    coeffs: Vec<Vec<(usize, f64)>>,
}

impl GaussianBnParams {
    /// Builds parameters for `dag` from `(from, to, coefficient)` triples that
    /// must cover every arc exactly once.
    pub fn from_arcs(
        dag: &Dag,
        intercept: Vec<f64>,
        residual_sd: Vec<f64>,
        arcs: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let n = dag.len();
        if intercept.len() != n || residual_sd.len() != n {
            return Err(Error::pre("one intercept and residual sd per node required"));
        }
        let mut coeffs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(u, v, c) in arcs {
            if v >= n || !dag.has_arc(u, v) {
                return Err(Error::pre(format!("coefficient for missing arc {u} -> {v}")));
            }
            if coeffs[v].iter().any(|&(p, _)| p == u) {
                return Err(Error::pre(format!("duplicate coefficient for {u} -> {v}")));
            }
            coeffs[v].push((u, c));
        }
        for (v, cs) in coeffs.iter_mut().enumerate() {
            cs.sort_by_key(|&(p, _)| p);
            if cs.len() != dag.in_degree(v) {
                return Err(Error::pre(format!("node {} is missing coefficients", dag.name(v))));
            }
        }
        let p = GaussianBnParams {
            nodes: dag.nodes().to_vec(),
            intercept,
            residual_sd,
            coeffs,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        for v in 0..self.nodes.len() {
            if !self.intercept[v].is_finite() {
                return Err(Error::pre(format!("non-finite intercept for {}", self.nodes[v])));
            }
            if !(self.residual_sd[v].is_finite() && self.residual_sd[v] >= 0.0) {
                return Err(Error::pre(format!("invalid residual sd for {}", self.nodes[v])));
            }
            if self.coeffs[v].iter().any(|c| !c.1.is_finite()) {
                return Err(Error::pre(format!("non-finite coefficient into {}", self.nodes[v])));
            }
        }
        Ok(())
    }

    /// Errors unless the coefficient keys match the parent sets of `dag`.
    pub fn check_against(&self, dag: &Dag) -> Result<()> {
        if dag.nodes() != self.nodes.as_slice() {
            return Err(Error::pre("parameters and graph have different nodes"));
        }
        for v in 0..dag.len() {
            let keys: Vec<usize> = self.coeffs[v].iter().map(|c| c.0).collect();
            if keys != dag.parents(v) {
                return Err(Error::pre(format!("parent set mismatch at {}", dag.name(v))));
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn intercept(&self, v: usize) -> f64 {
        self.intercept[v]
    }

    pub fn residual_sd(&self, v: usize) -> f64 {
        self.residual_sd[v]
    }

    pub fn parent_coefficients(&self, v: usize) -> &[(usize, f64)] {
        &self.coeffs[v]
    }

    pub fn coefficient(&self, from: usize, to: usize) -> Option<f64> {
        self.coeffs
            .get(to)?
            .iter()
            .find(|&&(p, _)| p == from)
            .map(|&(_, c)| c)
    }

    /// All (from, to, coefficient), sorted by (from, to).
    pub fn arcs(&self) -> Vec<(usize, usize, f64)> {
        let mut out: Vec<(usize, usize, f64)> = self
            .coeffs
            .iter()
            .enumerate()
            .flat_map(|(v, cs)| cs.iter().map(move |&(u, c)| (u, v, c)))
            .collect();
        out.sort_by_key(|&(u, v, _)| (u, v));
        out
    }

    /// Draws `n` rows by ancestral sampling.
    pub fn simulate(&self, dag: &Dag, n: usize, seed: u64) -> Result<ResponseTable> {
        self.check_against(dag)?;
        let order = dag.topological_order();
        let m = self.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise: Vec<Normal<f64>> = self
            .residual_sd
            .iter()
            .map(|&sd| Normal::new(0.0, sd).map_err(|e| Error::pre(e.to_string())))
            .collect::<Result<_>>()?;
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let mut x = vec![0.0; m];
            for &v in &order {
                let mean = self.intercept[v] + self.coeffs[v].iter().map(|&(p, c)| c * x[p]).sum::<f64>();
                x[v] = mean + noise[v].sample(&mut rng);
            }
            rows.push(x);
        }
        ResponseTable::from_rows(self.nodes.clone(), rows)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FitOptions {
    /// Residual sd with denominator n - k - 1 instead of n.
    pub unbiased_sd: bool,
    pub execution: Execution,
}

/// Ordinary least squares of every node on its parents, with intercept.
/// Residual sd uses the ML denominator n.
pub fn fit_mle(dag: &Dag, table: &ResponseTable) -> Result<GaussianBnParams> {
    fit_mle_with(dag, table, &FitOptions::default())
}

pub fn fit_mle_with(dag: &Dag, table: &ResponseTable, opts: &FitOptions) -> Result<GaussianBnParams> {
    if dag.nodes() != table.items() {
        return Err(Error::pre("graph nodes and table items differ"));
    }
    let max_parents = (0..dag.len()).map(|v| dag.in_degree(v)).max().unwrap_or(0);
    if table.n_rows() <= max_parents + 1 {
        return Err(Error::pre(format!(
            "{} rows cannot identify a node with {max_parents} parents",
            table.n_rows()
        )));
    }
    let stats = SufficientStats::from_table(table)?;
    let n = stats.n() as f64;
    let fits = par::map_indices(opts.execution, dag.len(), |v| {
        let parents = dag.parents(v);
        let reg = regress(stats.cov(), v, parents, true)
            .ok_or_else(|| Error::Numeric(format!("cannot fit {} even with ridge", dag.name(v))))?;
        if reg.ridged {
            log::warn!("rank-deficient parents for {}; ridge applied", dag.name(v));
        }
        let mean = stats.mean();
        let intercept = mean[v] - reg.beta.iter().zip(parents).map(|(b, &p)| b * mean[p]).sum::<f64>();
        let var = if opts.unbiased_sd {
            reg.residual_var * n / (n - parents.len() as f64 - 1.0)
        } else {
            reg.residual_var
        };
        let coeffs: Vec<(usize, f64)> = parents.iter().copied().zip(reg.beta).collect();
        Ok::<_, Error>((intercept, var.sqrt(), coeffs))
    });
    let mut intercept = Vec::with_capacity(dag.len());
    let mut residual_sd = Vec::with_capacity(dag.len());
    let mut coeffs = Vec::with_capacity(dag.len());
    for f in fits {
        let (b, sd, c) = f?;
        intercept.push(b);
        residual_sd.push(sd);
        coeffs.push(c);
    }
    let p = GaussianBnParams {
        nodes: dag.nodes().to_vec(),
        intercept,
        residual_sd,
        coeffs,
    };
    p.validate()?;
    Ok(p)
}

#[derive(Serialize, Deserialize)]
struct JsonParent {
    name: String,
    coeff: f64,
}

#[derive(Serialize, Deserialize)]
struct JsonNode {
    name: String,
    intercept: f64,
    residual_sd: f64,
    parents: Vec<JsonParent>,
}

#[derive(Serialize, Deserialize)]
struct JsonModel {
    nodes: Vec<JsonNode>,
}

/// A structure together with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub dag: Dag,
    pub params: GaussianBnParams,
}

impl Model {
    pub fn new(dag: Dag, params: GaussianBnParams) -> Result<Self> {
        params.check_against(&dag)?;
        Ok(Model { dag, params })
    }

    pub fn to_json(&self) -> Result<String> {
        let nodes = (0..self.dag.len())
            .map(|v| JsonNode {
                name: self.dag.name(v).to_string(),
                intercept: self.params.intercept(v),
                residual_sd: self.params.residual_sd(v),
                parents: self
                    .params
                    .parent_coefficients(v)
                    .iter()
                    .map(|&(p, c)| JsonParent {
                        name: self.dag.name(p).to_string(),
                        coeff: c,
                    })
                    .collect(),
            })
            .collect();
        Ok(serde_json::to_string_pretty(&JsonModel { nodes })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: JsonModel = serde_json::from_str(text)?;
        let names: Vec<String> = m.nodes.iter().map(|n| n.name.clone()).collect();
        let find = |s: &str| {
            names
                .iter()
                .position(|x| x == s)
                .ok_or_else(|| Error::UnknownNode(s.to_string()))
        };
        let mut arcs = Vec::new();
        for (v, node) in m.nodes.iter().enumerate() {
            for p in &node.parents {
                arcs.push((find(&p.name)?, v, p.coeff));
            }
        }
        let idx: Vec<(usize, usize)> = arcs.iter().map(|&(u, v, _)| (u, v)).collect();
        let dag = Dag::from_arcs(names, &idx)?;
        let params = GaussianBnParams::from_arcs(
            &dag,
            m.nodes.iter().map(|n| n.intercept).collect(),
            m.nodes.iter().map(|n| n.residual_sd).collect(),
            &arcs,
        )?;
        Ok(Model { dag, params })
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_json()?.as_bytes())?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_json<R: Read>(mut input: R) -> Result<Self> {
        let mut s = String::new();
        input.read_to_string(&mut s)?;
        Model::from_json(&s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    /// Reverse-keyed item.
    Positive,
    Negative,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        })
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" | "pos" | "+" => Ok(Polarity::Positive),
            "negative" | "neg" | "-" => Ok(Polarity::Negative),
            other => Err(Error::pre(format!("unknown polarity `{other}`"))),
        }
    }
}

/// Reads `item,polarity`.
pub fn read_polarity<R: Read>(input: R) -> Result<BTreeMap<String, Polarity>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() < 2 {
            return Err(Error::Parse {
                line,
                message: "expected item,polarity".into(),
            });
        }
        let pol = rec[1].parse().map_err(|e: Error| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        out.insert(rec[0].trim().to_string(), pol);
    }
    Ok(out)
}

/// Reads `item,intercept[,...]`; extra columns are ignored.
pub fn read_intercepts<R: Read>(input: R) -> Result<BTreeMap<String, f64>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let v = rec
            .get(1)
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse {
                line,
                message: "expected item,intercept".into(),
            })?;
        if out.insert(rec[0].trim().to_string(), v).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate item `{}`", rec[0].trim()),
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterceptEntry {
    pub item: String,
    pub intercept: f64,
    pub residual_sd: f64,
    pub polarity: Polarity,
}

/// Items sorted by descending intercept.
#[derive(Clone, Debug, PartialEq)]
pub struct InterceptReport {
    pub entries: Vec<InterceptEntry>,
}

impl InterceptReport {
    pub fn intercepts_of(&self, polarity: Polarity) -> Vec<f64> {
        self.entries
            .iter()
            .filter(|e| e.polarity == polarity)
            .map(|e| e.intercept)
            .collect()
    }

    /// CSV `item,intercept,residual_sd,polarity`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["item", "intercept", "residual_sd", "polarity"])?;
        for e in &self.entries {
            w.write_record([
                e.item.clone(),
                e.intercept.to_string(),
                e.residual_sd.to_string(),
                e.polarity.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn intercept_report(params: &GaussianBnParams, polarity: &BTreeMap<String, Polarity>) -> Result<InterceptReport> {
    if let Some(extra) = polarity.keys().find(|k| !params.nodes().contains(k)) {
        return Err(Error::UnknownNode(extra.clone()));
    }
    let mut entries = (0..params.len())
        .map(|v| {
            let item = &params.nodes()[v];
            let pol = polarity
                .get(item)
                .ok_or_else(|| Error::pre(format!("no polarity for {item}")))?;
            Ok(InterceptEntry {
                item: item.clone(),
                intercept: params.intercept(v),
                residual_sd: params.residual_sd(v),
                polarity: *pol,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| b.intercept.total_cmp(&a.intercept).then(a.item.cmp(&b.item)));
    Ok(InterceptReport { entries })
}

/// Directory holding the bundled reference tables.
pub fn fixture_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
}

const MANIFEST: &str = include_str!("../fixtures/MANIFEST");
const ITEMS_CSV: &str = include_str!("../fixtures/items.csv");
const ARCS_CSV: &str = include_str!("../fixtures/arcs.csv");

fn check_manifest(manifest: &str, file: &str, content: &[u8]) -> Result<()> {
    let entry = manifest
        .lines()
        .filter_map(|l| {
            let mut f = l.split_whitespace();
            Some((f.next()?, f.next()?, f.next()?))
        })
        .find(|&(_, name, _)| name == file)
        .ok_or_else(|| Error::Fixture(format!("{file} not listed in manifest")))?;
    let digest: String = Sha256::digest(content).iter().map(|b| format!("{b:02x}")).collect();
    if digest != entry.0 {
        return Err(Error::Fixture(format!("checksum mismatch for {file}")));
    }
    let rows = content.split(|&b| b == b'\n').filter(|l| !l.is_empty()).count().saturating_sub(1);
    if entry.2.parse::<usize>().ok() != Some(rows) {
        return Err(Error::Fixture(format!("{file} has {rows} data rows, manifest says {}", entry.2)));
    }
    Ok(())
}

fn parse_fixture(items_csv: &[u8], arcs_csv: &[u8]) -> Result<(Dag, GaussianBnParams)> {
    let mut names = Vec::new();
    let mut intercept = Vec::new();
    let mut sd = Vec::new();
    let mut rdr = csv::Reader::from_reader(items_csv);
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Parse {
                    line,
                    message: "expected item,intercept,stddev".into(),
                })
        };
        names.push(rec[0].trim().to_string());
        intercept.push(num(1)?);
        sd.push(num(2)?);
    }
    let mut arcs = Vec::new();
    let mut rdr = csv::Reader::from_reader(arcs_csv);
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let find = |s: &str| {
            names
                .iter()
                .position(|x| x == s.trim())
                .ok_or_else(|| Error::UnknownNode(s.trim().to_string()))
        };
        let c: f64 = rec
            .get(2)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse {
                line,
                message: "expected from,to,coefficient".into(),
            })?;
        arcs.push((find(&rec[0])?, find(&rec[1])?, c));
    }
    let idx: Vec<(usize, usize)> = arcs.iter().map(|&(u, v, _)| (u, v)).collect();
    let dag = Dag::from_arcs(names, &idx)?;
    let params = GaussianBnParams::from_arcs(&dag, intercept, sd, &arcs)?;
    Ok((dag, params))
}

/// Builds a model from an `item,intercept,stddev` table and a
/// `from,to,coefficient` arc list.
pub fn read_model_tables<A: Read, B: Read>(mut items: A, mut arcs: B) -> Result<(Dag, GaussianBnParams)> {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    items.read_to_end(&mut a)?;
    arcs.read_to_end(&mut b)?;
    parse_fixture(&a, &b)
}

/// Loads `items.csv` and `arcs.csv` from `dir`, verifying both against the
/// SHA-256 digests and row counts in `dir/MANIFEST`.
pub fn load_fixture_model(dir: &Path) -> Result<(Dag, GaussianBnParams)> {
    let manifest = std::fs::read_to_string(dir.join("MANIFEST"))?;
    let items = std::fs::read(dir.join("items.csv"))?;
    let arcs = std::fs::read(dir.join("arcs.csv"))?;
    check_manifest(&manifest, "items.csv", &items)?;
    check_manifest(&manifest, "arcs.csv", &arcs)?;
    parse_fixture(&items, &arcs)
}

/// The reference network compiled into the library.
pub fn reference_model() -> Result<(Dag, GaussianBnParams)> {
    check_manifest(MANIFEST, "items.csv", ITEMS_CSV.as_bytes())?;
    check_manifest(MANIFEST, "arcs.csv", ARCS_CSV.as_bytes())?;
    parse_fixture(ITEMS_CSV.as_bytes(), ARCS_CSV.as_bytes())
}
