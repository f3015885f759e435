//! Score-based structure search, bootstrap arc strengths and model averaging.

use std::collections::{HashMap, VecDeque};
use std::io::{Read, Write};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::ingest::ResponseTable;
use crate::par::{self, Execution};
use crate::score::{ScoreKind, Scorer, SufficientStats};

/// Parent sets are stored as bitmasks, which caps the node count.
pub const MAX_NODES: usize = 128;

/// Sampling size used for every bootstrap replicate unless overridden.
pub const DEFAULT_SAMPLE_SIZE: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub tabu_len: usize,
    /// Non-improving steps allowed before the search stops.
    pub max_iter: usize,
    pub max_parents: Option<usize>,
    /// Extra perturb-and-search rounds started from the best graph found.
    pub restarts: usize,
    /// Random moves applied before each restart.
    pub perturb: usize,
    pub seed: u64,
    pub score: ScoreKind,
    pub execution: Execution,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            tabu_len: 10,
            max_iter: 100,
            max_parents: None,
            restarts: 0,
            perturb: 1,
            seed: 0,
            score: ScoreKind::Bic,
            execution: Execution::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tabu_len < 1 {
            return Err(Error::pre("tabu_len must be at least 1"));
        }
        if self.max_iter < 1 {
            return Err(Error::pre("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// SplitMix64 finaliser, used to derive independent seeds from counters.
pub(crate) fn mix_seed(seed: u64, counter: u64) -> u64 {
    let mut z = seed ^ counter.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum MoveKind {
    Add,
    Remove,
    Reverse,
}

/// Ordered by (from, to, kind) for tie-breaking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Move {
    from: usize,
    to: usize,
    kind: MoveKind,
}

impl Move {
    fn inverse(self) -> Move {
        match self.kind {
            MoveKind::Add => Move { kind: MoveKind::Remove, ..self },
            MoveKind::Remove => Move { kind: MoveKind::Add, ..self },
            MoveKind::Reverse => Move {
                from: self.to,
                to: self.from,
                kind: MoveKind::Reverse,
            },
        }
    }
}

struct ScoreCache<'a> {
    scorer: Scorer<'a>,
    memo: HashMap<(usize, u128), f64>,
}

impl<'a> ScoreCache<'a> {
    fn local(&mut self, node: usize, mask: u128) -> f64 {
        if let Some(&s) = self.memo.get(&(node, mask)) {
            return s;
        }
        let parents: Vec<usize> = (0..MAX_NODES).filter(|&i| mask >> i & 1 == 1).collect();
        // Ridge fallback is on, so the only failure mode is -inf.
        let s = self.scorer.local(node, &parents).unwrap_or(f64::NEG_INFINITY);
        self.memo.insert((node, mask), s);
        s
    }
}

struct SearchState {
    dag: Dag,
    masks: Vec<u128>,
    local: Vec<f64>,
}

impl SearchState {
    fn new(dag: Dag, cache: &mut ScoreCache<'_>) -> Self {
        let masks: Vec<u128> = (0..dag.len())
            .map(|v| dag.parents(v).iter().fold(0u128, |m, &p| m | 1 << p))
            .collect();
        let local = masks.iter().enumerate().map(|(v, &m)| cache.local(v, m)).collect();
        SearchState { dag, masks, local }
    }

    fn score(&self) -> f64 {
        self.local.iter().sum()
    }

    /// Bitmask of proper descendants of every node.
    fn descendants(&self) -> Vec<u128> {
        let order = self.dag.topological_order();
        let mut desc = vec![0u128; self.dag.len()];
        for &u in order.iter().rev() {
            let mut m = 0u128;
            for &c in self.dag.children(u) {
                m |= 1 << c | desc[c];
            }
            desc[u] = m;
        }
        desc
    }

    fn legal_moves(&self, max_parents: Option<usize>) -> Vec<Move> {
        let n = self.dag.len();
        let desc = self.descendants();
        let room = |v: usize| max_parents.is_none_or(|k| (self.masks[v].count_ones() as usize) < k);
        let mut moves = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u == v {
                    continue;
                }
                if self.dag.has_arc(u, v) {
                    moves.push(Move { from: u, to: v, kind: MoveKind::Remove });
                    let other_path = self
                        .dag
                        .children(u)
                        .iter()
                        .any(|&c| c != v && desc[c] >> v & 1 == 1);
                    if !other_path && room(u) {
                        moves.push(Move { from: u, to: v, kind: MoveKind::Reverse });
                    }
                } else if !self.dag.has_arc(v, u) && desc[v] >> u & 1 == 0 && room(v) {
                    moves.push(Move { from: u, to: v, kind: MoveKind::Add });
                }
            }
        }
        moves
    }

    fn delta(&self, mv: Move, cache: &mut ScoreCache<'_>) -> f64 {
        let (u, v) = (mv.from, mv.to);
        match mv.kind {
            MoveKind::Add => cache.local(v, self.masks[v] | 1 << u) - self.local[v],
            MoveKind::Remove => cache.local(v, self.masks[v] & !(1 << u)) - self.local[v],
            MoveKind::Reverse => {
                cache.local(v, self.masks[v] & !(1 << u)) - self.local[v]
                    + cache.local(u, self.masks[u] | 1 << v)
                    - self.local[u]
            }
        }
    }

    fn apply(&mut self, mv: Move, cache: &mut ScoreCache<'_>) {
        let (u, v) = (mv.from, mv.to);
        match mv.kind {
            MoveKind::Add => {
                self.dag.insert_arc(u, v);
                self.masks[v] |= 1 << u;
            }
            MoveKind::Remove => {
                self.dag.delete_arc(u, v);
                self.masks[v] &= !(1 << u);
            }
            MoveKind::Reverse => {
                self.dag.delete_arc(u, v);
                self.dag.insert_arc(v, u);
                self.masks[v] &= !(1 << u);
                self.masks[u] |= 1 << v;
                self.local[u] = cache.local(u, self.masks[u]);
            }
        }
        self.local[v] = cache.local(v, self.masks[v]);
    }
}

fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

fn run_tabu(start: Dag, cache: &mut ScoreCache<'_>, cfg: &SearchConfig) -> (Dag, f64) {
    // Hard stop for pathological score surfaces; never reached in practice.
    const MAX_STEPS: usize = 1_000_000;

    let mut state = SearchState::new(start, cache);
    let mut best = state.dag.clone();
    let mut best_score = state.score();
    let mut tabu: VecDeque<Move> = VecDeque::with_capacity(cfg.tabu_len + 1);
    let mut stale = 0;

    for _ in 0..MAX_STEPS {
        let mut chosen: Option<(Move, f64)> = None;
        for mv in state.legal_moves(cfg.max_parents) {
            if tabu.contains(&mv) {
                continue;
            }
            let d = state.delta(mv, cache);
            if !d.is_finite() {
                continue;
            }
            chosen = match chosen {
                None => Some((mv, d)),
                Some((bm, bd)) => {
                    if tied(d, bd) {
                        Some(if mv < bm { (mv, d) } else { (bm, bd) })
                    } else if d > bd {
                        Some((mv, d))
                    } else {
                        Some((bm, bd))
                    }
                }
            };
        }
        let Some((mv, _)) = chosen else { break };
        state.apply(mv, cache);
        tabu.push_back(mv.inverse());
        if tabu.len() > cfg.tabu_len {
            tabu.pop_front();
        }
        let score = state.score();
        if score > best_score && !tied(score, best_score) {
            best = state.dag.clone();
            best_score = score;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.max_iter {
                break;
            }
        }
    }
    (best, best_score)
}

/// Tabu search over add / remove / reverse moves starting from the empty graph.
///
/// Each step applies the best non-tabu move even when it lowers the score;
/// the inverse of every applied move stays tabu for `tabu_len` steps. The
/// search stops after `max_iter` consecutive steps without a new best.
/// Equal-score moves are broken by the smallest (from, to, kind).
pub fn tabu_search(stats: &SufficientStats, nodes: &[String], cfg: &SearchConfig) -> Result<Dag> {
    cfg.validate()?;
    if nodes.len() != stats.dim() {
        return Err(Error::pre("node names do not match statistics dimension"));
    }
    if nodes.len() > MAX_NODES {
        return Err(Error::pre(format!("at most {MAX_NODES} nodes are supported")));
    }
    let mut cache = ScoreCache {
        scorer: Scorer::new(stats).with_kind(cfg.score),
        memo: HashMap::new(),
    };
    let (mut best, mut best_score) = run_tabu(Dag::empty(nodes.to_vec()), &mut cache, cfg);

    for r in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, r as u64));
        let mut state = SearchState::new(best.clone(), &mut cache);
        for _ in 0..cfg.perturb.max(1) {
            let moves = state.legal_moves(cfg.max_parents);
            match moves.choose(&mut rng) {
                Some(&mv) => state.apply(mv, &mut cache),
                None => break,
            }
        }
        let (dag, score) = run_tabu(state.dag, &mut cache, cfg);
        if score > best_score && !tied(score, best_score) {
            best = dag;
            best_score = score;
        }
    }
    Ok(best)
}

/// Bootstrap inclusion and direction frequencies for every node pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcStrengthTable {
    nodes: Vec<String>,
    /// Symmetric, row-major.
    strength: Vec<f64>,
    /// `direction[u * n + v]`: share of inclusions oriented u -> v.
    direction: Vec<f64>,
}

impl ArcStrengthTable {
    pub fn new(nodes: Vec<String>) -> Self {
        let n = nodes.len();
        ArcStrengthTable {
            nodes,
            strength: vec![0.0; n * n],
            direction: vec![0.0; n * n],
        }
    }

    /// Tallies a set of graphs over the same nodes.
    pub fn from_graphs(nodes: Vec<String>, graphs: &[Dag]) -> Self {
        let n = nodes.len();
        let mut counts = vec![0u32; n * n];
        for g in graphs {
            for (u, v) in g.arcs() {
                counts[u * n + v] += 1;
            }
        }
        let mut t = ArcStrengthTable::new(nodes);
        let r = graphs.len() as f64;
        for u in 0..n {
            for v in (u + 1)..n {
                let (a, b) = (counts[u * n + v], counts[v * n + u]);
                if a + b > 0 {
                    let tot = f64::from(a + b);
                    t.set(u, v, tot / r, f64::from(a) / tot);
                }
            }
        }
        t
    }

    /// Sets the pair {u, v}: `strength` for both orders, `direction_uv` for
    /// u -> v and its complement for v -> u.
    pub fn set(&mut self, u: usize, v: usize, strength: f64, direction_uv: f64) {
        let n = self.nodes.len();
        self.strength[u * n + v] = strength;
        self.strength[v * n + u] = strength;
        if strength > 0.0 {
            self.direction[u * n + v] = direction_uv;
            self.direction[v * n + u] = 1.0 - direction_uv;
        } else {
            self.direction[u * n + v] = 0.0;
            self.direction[v * n + u] = 0.0;
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn strength(&self, u: usize, v: usize) -> f64 {
        self.strength[u * self.nodes.len() + v]
    }

    pub fn direction(&self, u: usize, v: usize) -> f64 {
        self.direction[u * self.nodes.len() + v]
    }

    /// CSV `from,to,strength,direction` for ordered pairs with non-zero strength.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let n = self.nodes.len();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["from", "to", "strength", "direction"])?;
        for u in 0..n {
            for v in 0..n {
                if u != v && self.strength(u, v) > 0.0 {
                    w.write_record([
                        self.nodes[u].as_str(),
                        self.nodes[v].as_str(),
                        &self.strength(u, v).to_string(),
                        &self.direction(u, v).to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(nodes: Vec<String>, input: R) -> Result<Self> {
        let mut t = ArcStrengthTable::new(nodes);
        let mut rdr = csv::Reader::from_reader(input);
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let bad = |m: &str| Error::Parse {
                line,
                message: m.to_string(),
            };
            if rec.len() != 4 {
                return Err(bad("expected from,to,strength,direction"));
            }
            let find = |s: &str| {
                t.nodes
                    .iter()
                    .position(|x| x == s.trim())
                    .ok_or_else(|| Error::UnknownNode(s.trim().to_string()))
            };
            let (u, v) = (find(&rec[0])?, find(&rec[1])?);
            let s: f64 = rec[2].trim().parse().map_err(|_| bad("bad strength"))?;
            let d: f64 = rec[3].trim().parse().map_err(|_| bad("bad direction"))?;
            if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&d) {
                return Err(bad("strength and direction must lie in [0, 1]"));
            }
            t.set(u, v, s, d);
        }
        Ok(t)
    }
}

/// Resamples `sample_size` rows with replacement per replicate, learns a
/// graph on each, and tallies arc frequencies.
///
/// Replicate `r` draws rows from ChaCha stream `r` of `cfg.seed`, so the
/// table does not depend on how replicates are scheduled across threads.
pub fn bootstrap_strengths(
    table: &ResponseTable,
    replicates: usize,
    sample_size: usize,
    cfg: &SearchConfig,
) -> Result<ArcStrengthTable> {
    let graphs = bootstrap_graphs(table, replicates, sample_size, cfg)?;
    Ok(ArcStrengthTable::from_graphs(table.items().to_vec(), &graphs))
}

pub fn bootstrap_graphs(
    table: &ResponseTable,
    replicates: usize,
    sample_size: usize,
    cfg: &SearchConfig,
) -> Result<Vec<Dag>> {
    cfg.validate()?;
    if replicates < 1 {
        return Err(Error::pre("at least one bootstrap replicate is required"));
    }
    if sample_size < 2 {
        return Err(Error::pre("bootstrap sample size must be at least 2"));
    }
    if !table.is_complete() {
        return Err(Error::pre("bootstrap needs a complete table"));
    }
    let n = table.n_rows();
    if n == 0 {
        return Err(Error::pre("table has no rows"));
    }
    let results = par::map_indices(cfg.execution, replicates, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(r as u64);
        let rows: Vec<usize> = (0..sample_size).map(|_| rng.random_range(0..n)).collect();
        let stats = SufficientStats::from_rows_of(table, &rows)?;
        let rcfg = SearchConfig {
            seed: mix_seed(cfg.seed, r as u64),
            execution: Execution::Sequential,
            ..cfg.clone()
        };
        tabu_search(&stats, table.items(), &rcfg)
    });
    results.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AveragedNetwork {
    pub dag: Dag,
    /// Included pairs with no majority direction.
    pub undirected: Vec<(usize, usize)>,
    /// Arcs left out because they would close a cycle.
    pub dropped: Vec<(usize, usize)>,
}

/// Consensus graph: pairs with strength at or above `threshold`, oriented by
/// majority direction. Ties (direction exactly 0.5) are reported as
/// undirected.
///
/// Arcs are inserted strongest first (strength, then strength x direction,
/// then lexicographic) and an arc that would close a cycle is dropped, so
/// raising the threshold never adds an arc.
pub fn average_network(strengths: &ArcStrengthTable, threshold: f64) -> Result<AveragedNetwork> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::pre(format!("threshold {threshold} outside (0, 1]")));
    }
    let n = strengths.nodes().len();
    let mut candidates: Vec<(f64, f64, usize, usize)> = Vec::new();
    let mut undirected = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let s = strengths.strength(u, v);
            if s < threshold || s <= 0.0 {
                continue;
            }
            let d = strengths.direction(u, v);
            if d > 0.5 {
                candidates.push((s, s * d, u, v));
            } else if d < 0.5 {
                candidates.push((s, s * (1.0 - d), v, u));
            } else {
                undirected.push((u, v));
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(b.1.total_cmp(&a.1))
            .then((a.2, a.3).cmp(&(b.2, b.3)))
    });
    let mut dag = Dag::empty(strengths.nodes().to_vec());
    let mut dropped = Vec::new();
    for (_, _, u, v) in candidates {
        if dag.reaches(v, u) {
            log::warn!(
                "averaged network: dropping {} -> {} to keep the graph acyclic",
                strengths.nodes()[u],
                strengths.nodes()[v]
            );
            dropped.push((u, v));
        } else {
            dag.insert_arc(u, v);
        }
    }
    Ok(AveragedNetwork {
        dag,
        undirected,
        dropped,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityRow {
    pub replicates: usize,
    pub directed_mean: f64,
    pub directed_sd: f64,
    pub undirected_mean: f64,
    pub undirected_sd: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
}

impl StabilityReport {
    /// CSV `epoch,directed_mean,directed_sd,undirected_mean,undirected_sd`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["epoch", "directed_mean", "directed_sd", "undirected_mean", "undirected_sd"])?;
        for r in &self.rows {
            w.write_record([
                r.replicates.to_string(),
                r.directed_mean.to_string(),
                r.directed_sd.to_string(),
                r.undirected_mean.to_string(),
                r.undirected_sd.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Directed and undirected arc counts of the averaged network as a function
/// of the replicate count, each repeated `repeats` times with distinct seeds.
/// Standard deviations use the n - 1 denominator.
pub fn stability_curve(
    table: &ResponseTable,
    epochs: &[usize],
    repeats: usize,
    sample_size: usize,
    threshold: f64,
    cfg: &SearchConfig,
) -> Result<StabilityReport> {
    if repeats < 1 {
        return Err(Error::pre("repeats must be at least 1"));
    }
    let mut rows = Vec::with_capacity(epochs.len());
    for &r in epochs {
        let mut directed = Vec::with_capacity(repeats);
        let mut undirected = Vec::with_capacity(repeats);
        for rep in 0..repeats {
            let rcfg = SearchConfig {
                seed: mix_seed(mix_seed(cfg.seed, r as u64), rep as u64),
                ..cfg.clone()
            };
            let st = bootstrap_strengths(table, r, sample_size, &rcfg)?;
            let avg = average_network(&st, threshold)?;
            directed.push(avg.dag.arc_count() as f64);
            undirected.push(avg.undirected.len() as f64);
        }
        let (dm, ds) = mean_sd(&directed);
        let (um, us) = mean_sd(&undirected);
        rows.push(StabilityRow {
            replicates: r,
            directed_mean: dm,
            directed_sd: ds,
            undirected_mean: um,
            undirected_sd: us,
        });
    }
    Ok(StabilityReport { rows })
}

/// Nodes with no parents and nodes with no children.
pub fn roots_and_terminals(dag: &Dag) -> (Vec<String>, Vec<String>) {
    let roots = (0..dag.len())
        .filter(|&v| dag.in_degree(v) == 0)
        .map(|v| dag.name(v).to_string())
        .collect();
    let terminals = (0..dag.len())
        .filter(|&v| dag.out_degree(v) == 0)
        .map(|v| dag.name(v).to_string())
        .collect();
    (roots, terminals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        ["a", "b", "c", "d", "e", "f"][..k].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn move_inverse_round_trips() {
        for kind in [MoveKind::Add, MoveKind::Remove, MoveKind::Reverse] {
            let m = Move { from: 1, to: 4, kind };
            assert_eq!(m.inverse().inverse(), m);
        }
    }

    #[test]
    fn averaging_zero_table_gives_empty_graph() {
        let t = ArcStrengthTable::new(names(4));
        let avg = average_network(&t, 0.5).unwrap();
        assert_eq!(avg.dag.arc_count(), 0);
        assert!(avg.undirected.is_empty());
    }

    #[test]
    fn majority_direction_is_kept() {
        let mut t = ArcStrengthTable::new(names(2));
        t.set(0, 1, 1.0, 0.8);
        let avg = average_network(&t, 0.5).unwrap();
        assert_eq!(avg.dag.arcs(), vec![(0, 1)]);
        t.set(0, 1, 1.0, 0.2);
        assert_eq!(average_network(&t, 0.5).unwrap().dag.arcs(), vec![(1, 0)]);
    }

    #[test]
    fn even_split_is_undirected() {
        let mut t = ArcStrengthTable::new(names(2));
        t.set(0, 1, 0.9, 0.5);
        let avg = average_network(&t, 0.5).unwrap();
        assert_eq!(avg.dag.arc_count(), 0);
        assert_eq!(avg.undirected, vec![(0, 1)]);
    }

    #[test]
    fn three_cycle_loses_weakest_arc() {
        let mut t = ArcStrengthTable::new(names(3));
        t.set(0, 1, 1.0, 1.0);
        t.set(1, 2, 1.0, 0.9);
        t.set(0, 2, 1.0, 0.3); // 2 -> 0 with direction 0.7, the weakest
        let avg = average_network(&t, 0.5).unwrap();
        assert_eq!(avg.dag.arcs(), vec![(0, 1), (1, 2)]);
        assert_eq!(avg.dropped, vec![(2, 0)]);
    }

    #[test]
    fn threshold_bounds() {
        let t = ArcStrengthTable::new(names(2));
        assert!(average_network(&t, 0.0).is_err());
        assert!(average_network(&t, 1.5).is_err());
        assert!(average_network(&t, 1.0).is_ok());
    }

    #[test]
    fn roots_terminals_of_chain_and_empty() {
        let chain = Dag::from_arcs(names(3), &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(roots_and_terminals(&chain), (vec!["a".into()], vec!["c".into()]));
        let empty = Dag::empty(names(2));
        let (r, t) = roots_and_terminals(&empty);
        assert_eq!(r, names(2));
        assert_eq!(t, names(2));
    }

    #[test]
    fn strength_csv_round_trip() {
        let mut t = ArcStrengthTable::new(names(3));
        t.set(0, 1, 0.75, 0.25);
        t.set(1, 2, 0.5, 1.0);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = ArcStrengthTable::read_csv(names(3), buf.as_slice()).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn search_config_validation() {
        let bad = SearchConfig {
            tabu_len: 0,
            ..SearchConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn mix_seed_separates_counters() {
        let a: Vec<u64> = (0..100).map(|i| mix_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(a.len(), b.len());
    }
}
