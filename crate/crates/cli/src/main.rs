//! `attachnet` command-line front end.
//!
//! Exit codes: 0 on success, 1 when a file cannot be read or written, 2 for
//! invalid arguments or inputs.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use attachnet::analytics::{betweenness, communities_walktrap, degree_centrality, pagerank, CentralityVector, Partition};
use attachnet::compare::{
    confidence_ellipse, edge_set_correlation, kmeans_best_seed, mann_whitney_u, pca_project, pearson_significance,
    read_item_map, EdgeWeightSet, FactorTable, FoldSign, PairMode,
};
use attachnet::influence::{cluster_coupling, median_abs_coefficient, top_paths, total_influence, InfluenceResult};
use attachnet::ingest::{demographic_summary, filter_cohort, parse_responses, Codebook, CohortFilter, Gender, Region, Schema};
use attachnet::params::{fit_mle_with, intercept_report, read_intercepts, read_model_tables, read_polarity, reference_model, FitOptions, Model, Polarity};
use attachnet::structure::{average_network, bootstrap_strengths, roots_and_terminals, stability_curve, SearchConfig};
use attachnet::{Dag, Error, Execution, ResponseTable, ScoreKind};

type Result<T> = std::result::Result<T, Error>;

fn invalid(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

#[derive(Parser)]
#[command(name = "attachnet", version, about = "Bayesian network analysis of Likert-scale survey items")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Run every parallel stage on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a raw export, filter the cohort and write a canonical table.
    Ingest(IngestArgs),
    /// Bootstrap structure learning, model averaging and parameter fit.
    Learn(LearnArgs),
    /// Fit parameters for a given arc list.
    Fit(FitArgs),
    /// Centralities, communities, coupling, roots and terminals of a model.
    Analyze(AnalyzeArgs),
    /// Total influence and strongest paths between two items.
    Influence(InfluenceArgs),
    /// Statistical comparisons against published results.
    #[command(subcommand)]
    Compare(CompareCommand),
    /// Convert a model to other formats.
    Export(ExportArgs),
    /// Draw a canonical response table from a model.
    Simulate(SimulateArgs),
    /// Build a model JSON from published intercept and coefficient tables.
    Import(ImportArgs),
}

#[derive(Args)]
struct IngestArgs {
    input: PathBuf,
    /// Ages 18-60, female/male, known region, complete responses.
    #[arg(long)]
    filter_standard: bool,
    /// Inclusive age range LO:HI.
    #[arg(long, value_parser = parse_age_range)]
    age: Option<(u32, u32)>,
    /// Comma-separated genders to keep.
    #[arg(long, value_delimiter = ',')]
    gender: Vec<Gender>,
    /// Comma-separated regions to keep.
    #[arg(long, value_delimiter = ',')]
    region: Vec<Region>,
    /// Keep rows with missing or out-of-range answers.
    #[arg(long)]
    allow_incomplete: bool,
    /// `gender.<code> = <label>` / `country.<code> = <region>` overrides.
    #[arg(long)]
    codebook: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Demographic counts as `dimension,group,count`.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScoreArg {
    Bic,
    Aic,
    Loglik,
}

impl From<ScoreArg> for ScoreKind {
    fn from(s: ScoreArg) -> Self {
        match s {
            ScoreArg::Bic => ScoreKind::Bic,
            ScoreArg::Aic => ScoreKind::Aic,
            ScoreArg::Loglik => ScoreKind::LogLik,
        }
    }
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, env = "ATTACHNET_SEED", default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "bic")]
    score: ScoreArg,
    #[arg(long, default_value_t = 10)]
    tabu_len: usize,
    /// Non-improving steps before the search stops.
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long)]
    max_parents: Option<usize>,
    #[arg(long, default_value_t = 0)]
    restarts: usize,
}

#[derive(Args)]
struct LearnArgs {
    /// Canonical response table.
    input: PathBuf,
    /// Bootstrap replicates.
    #[arg(short = 'R', long, default_value_t = 3000)]
    replicates: usize,
    /// Rows drawn per replicate.
    #[arg(short = 'm', long, default_value_t = 1000)]
    sample_size: usize,
    /// Minimum arc strength kept in the averaged network.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[command(flatten)]
    search: SearchArgs,
    /// Averaged model JSON (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Arc strength CSV (default: next to `-o` as `<stem>.strengths.csv`).
    #[arg(long)]
    strengths: Option<PathBuf>,
    /// Replicate counts for a stability sweep instead of a single run.
    #[arg(long, value_delimiter = ',')]
    stability: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Residual sd with denominator n - k - 1.
    #[arg(long)]
    unbiased_sd: bool,
    /// Full-size run: R=3000, m=1000 and the 8-epoch stability sweep.
    #[arg(long)]
    full_repro: bool,
}

#[derive(Args)]
struct FitArgs {
    /// Canonical response table.
    input: PathBuf,
    /// `from,to` arc list.
    #[arg(long)]
    arcs: PathBuf,
    #[arg(long)]
    unbiased_sd: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    model: PathBuf,
    /// Directory for centrality, partition and coupling CSVs.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    steps: usize,
    #[arg(long, default_value_t = 0.85)]
    damping: f64,
    /// Use this `node,cluster` partition instead of walktrap.
    #[arg(long)]
    clusters: Option<PathBuf>,
    /// Graphviz output with one subgraph per cluster.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct InfluenceArgs {
    model: PathBuf,
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
    /// Number of strongest paths to list.
    #[arg(short, default_value_t = 2)]
    k: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Union,
    Intersection,
}

#[derive(Subcommand)]
enum CompareCommand {
    /// Best-of-seeds k-means on a factor table.
    Kmeans {
        input: PathBuf,
        #[arg(short)]
        k: usize,
        /// Seed range FIRST:LAST.
        #[arg(long, default_value = "1:4000", value_parser = parse_seed_range)]
        seeds: (u64, u64),
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Principal component scores of a factor table.
    Pca {
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        dims: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Concentration ellipse per cluster of a two-column table.
    Ellipse {
        input: PathBuf,
        /// `node,cluster` grouping; one ellipse over all rows when omitted.
        #[arg(long)]
        clusters: Option<PathBuf>,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        /// Also emit this many boundary points per ellipse.
        #[arg(long, default_value_t = 0)]
        points: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Correlate two `a,b,weight` pair sets.
    Edges {
        ours: PathBuf,
        theirs: PathBuf,
        #[arg(long, value_enum, default_value = "union")]
        mode: ModeArg,
        /// Two-column item map applied to the second set.
        #[arg(long)]
        map: Option<PathBuf>,
        /// Drop pairs of the first set whose items are absent from the second.
        #[arg(long)]
        restrict: bool,
    },
    /// Mann-Whitney U on intercepts split by item polarity.
    Mwu {
        /// `item,intercept[,...]` table.
        input: PathBuf,
        /// `item,polarity` table.
        #[arg(long)]
        groups: PathBuf,
    },
    /// t statistic and two-sided p for a correlation.
    Pearson {
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        #[arg(long)]
        df: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Dot,
    Arcs,
    Edges,
    Intercepts,
}

#[derive(Args)]
struct ExportArgs {
    model: PathBuf,
    #[arg(long, value_enum)]
    format: ExportFormat,
    /// `node,cluster` partition for DOT subgraphs.
    #[arg(long)]
    clusters: Option<PathBuf>,
    /// `item,polarity` table, required for intercepts.
    #[arg(long)]
    polarity: Option<PathBuf>,
    /// Fold coefficient magnitudes instead of signed values.
    #[arg(long)]
    absolute: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ImportArgs {
    /// `item,intercept,stddev` table.
    #[arg(long, required_unless_present = "reference")]
    items: Option<PathBuf>,
    /// `from,to,coefficient` arc list.
    #[arg(long, required_unless_present = "reference")]
    arcs: Option<PathBuf>,
    /// Use the reference network bundled with the library.
    #[arg(long, conflicts_with_all = ["items", "arcs"])]
    reference: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    model: PathBuf,
    #[arg(short, long)]
    n: usize,
    #[arg(long, env = "ATTACHNET_SEED", default_value_t = 1)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_age_range(s: &str) -> std::result::Result<(u32, u32), String> {
    let (a, b) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: u32 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: u32 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if lo > hi {
        return Err(format!("{lo} > {hi}"));
    }
    Ok((lo, hi))
}

fn parse_seed_range(s: &str) -> std::result::Result<(u64, u64), String> {
    let (a, b) = s.split_once(':').ok_or("expected FIRST:LAST")?;
    let lo: u64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: u64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if lo > hi {
        return Err(format!("{lo} > {hi}"));
    }
    Ok((lo, hi))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", p.display()))))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn read_table(path: &Path) -> Result<ResponseTable> {
    let parsed = parse_responses(open(path)?, &Schema::default(), &Codebook::default())?;
    if !parsed.table.is_complete() {
        return Err(invalid(format!(
            "{} has missing responses; run `attachnet ingest` with a cohort filter first",
            path.display()
        )));
    }
    Ok(parsed.table)
}

fn read_model(path: &Path) -> Result<Model> {
    let m = Model::read_json(open(path)?)?;
    if m.dag.is_empty() {
        return Err(invalid("model has no nodes"));
    }
    Ok(m)
}

fn node(dag: &Dag, name: &str) -> Result<usize> {
    dag.require(name)
}

fn execution(cli: &Cli) -> Execution {
    if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn cmd_ingest(a: &IngestArgs) -> Result<()> {
    let codebook = match &a.codebook {
        Some(p) => Codebook::parse(&std::fs::read_to_string(p)?)?,
        None => Codebook::default(),
    };
    let parsed = parse_responses(open(&a.input)?, &Schema::default(), &codebook)?;
    for d in &parsed.dropped {
        eprintln!("line {}: dropped ({})", d.line, d.reason);
    }
    let mut filter = if a.filter_standard {
        CohortFilter::standard()
    } else {
        CohortFilter::everything()
    };
    if let Some(r) = a.age {
        filter.age_range = r;
    }
    if !a.gender.is_empty() {
        filter.genders = a.gender.iter().copied().collect();
    }
    if !a.region.is_empty() {
        filter.regions = a.region.iter().copied().collect();
    }
    if a.filter_standard || a.age.is_some() || !a.gender.is_empty() || !a.region.is_empty() {
        filter.require_complete = !a.allow_incomplete;
    }
    let table = filter_cohort(&parsed.table, &filter)?;
    table.write_canonical(sink(a.output.as_deref())?)?;

    let summary = demographic_summary(&table);
    let mut err = io::stderr().lock();
    writeln!(err, "rows kept: {} of {}", table.n_rows(), parsed.table.n_rows())?;
    for (dim, group, count) in summary.published_rows() {
        writeln!(err, "{dim:>8}  {group:<14} {count}")?;
    }
    if let Some(p) = &a.report {
        summary.write_csv(sink(Some(p))?)?;
    }
    Ok(())
}

fn search_config(s: &SearchArgs, exec: Execution) -> SearchConfig {
    SearchConfig {
        tabu_len: s.tabu_len,
        max_iter: s.max_iter,
        max_parents: s.max_parents,
        restarts: s.restarts,
        seed: s.seed,
        score: s.score.into(),
        execution: exec,
        ..SearchConfig::default()
    }
}

const FULL_EPOCHS: [usize; 8] = [50, 100, 200, 500, 1000, 1500, 3000, 5000];

fn cmd_learn(a: &LearnArgs, exec: Execution) -> Result<()> {
    let (replicates, sample_size) = if a.full_repro { (3000, 1000) } else { (a.replicates, a.sample_size) };
    if replicates < 1 {
        return Err(invalid("-R must be at least 1"));
    }
    if sample_size < 2 {
        return Err(invalid("-m must be at least 2"));
    }
    if !(a.threshold > 0.0 && a.threshold <= 1.0) {
        return Err(invalid("--threshold must lie in (0, 1]"));
    }
    if a.repeats < 1 {
        return Err(invalid("--repeats must be at least 1"));
    }
    if a.stability.contains(&0) {
        return Err(invalid("stability replicate counts must be positive"));
    }
    let cfg = search_config(&a.search, exec);
    cfg.validate()?;
    let table = read_table(&a.input)?;

    if !a.stability.is_empty() && !a.full_repro {
        let rep = stability_curve(&table, &a.stability, a.repeats, sample_size, a.threshold, &cfg)?;
        return rep.write_csv(sink(a.output.as_deref())?);
    }

    let strengths = bootstrap_strengths(&table, replicates, sample_size, &cfg)?;
    let strengths_path = a
        .strengths
        .clone()
        .or_else(|| a.output.as_ref().map(|o| o.with_extension("strengths.csv")));
    if let Some(p) = &strengths_path {
        strengths.write_csv(sink(Some(p))?)?;
    }
    let avg = average_network(&strengths, a.threshold)?;
    let opts = FitOptions {
        unbiased_sd: a.unbiased_sd,
        execution: exec,
    };
    let params = fit_mle_with(&avg.dag, &table, &opts)?;
    let model = Model::new(avg.dag, params)?;
    eprintln!(
        "averaged network: {} directed arcs, {} undirected pairs, {} dropped for acyclicity",
        model.dag.arc_count(),
        avg.undirected.len(),
        avg.dropped.len()
    );
    model.write_json(sink(a.output.as_deref())?)?;

    if a.full_repro {
        let mean_sd = (0..model.params.len()).map(|v| model.params.residual_sd(v)).sum::<f64>() / model.params.len() as f64;
        let rep = stability_curve(&table, &FULL_EPOCHS, 5, sample_size, a.threshold, &cfg)?;
        rep.write_csv(io::stderr().lock())?;
        let at_3000 = rep.rows.iter().find(|r| r.replicates == 3000);
        eprintln!("full run: {} directed arcs (reference ~123)", model.dag.arc_count());
        if let Some(r) = at_3000 {
            eprintln!("stability at R=3000: mean {:.1}, sd {:.3} (reference sd < 1)", r.directed_mean, r.directed_sd);
        }
        eprintln!("mean residual sd: {mean_sd:.3} (reference ~1)");
    }
    Ok(())
}

fn cmd_fit(a: &FitArgs) -> Result<()> {
    let table = read_table(&a.input)?;
    let dag = Dag::read_arc_csv(table.items().to_vec(), open(&a.arcs)?)?;
    let opts = FitOptions {
        unbiased_sd: a.unbiased_sd,
        ..FitOptions::default()
    };
    let params = fit_mle_with(&dag, &table, &opts)?;
    Model::new(dag, params)?.write_json(sink(a.output.as_deref())?)
}

fn partition_for(model: &Model, clusters: Option<&Path>, steps: usize) -> Result<Partition> {
    match clusters {
        Some(p) => Partition::read_csv(model.dag.nodes(), open(p)?),
        None => communities_walktrap(&model.dag, &model.params, steps),
    }
}

fn write_dot(model: &Model, partition: &Partition, path: &Path) -> Result<()> {
    let weight = |u: usize, v: usize| model.params.coefficient(u, v).unwrap_or(0.0);
    let dot = model.dag.to_dot(Some(partition), Some(&weight));
    sink(Some(path))?.write_all(dot.as_bytes())?;
    Ok(())
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<()> {
    let model = read_model(&a.model)?;
    let (dag, params) = (&model.dag, &model.params);
    let (din, dout) = degree_centrality(dag);
    let bw = betweenness(dag, params)?;
    let pr = pagerank(dag, params, a.damping)?;
    let partition = partition_for(&model, a.clusters.as_deref(), a.steps)?;
    let coupling = cluster_coupling(dag, params, &partition)?;
    let (roots, terminals) = roots_and_terminals(dag);

    let mut out = io::stdout().lock();
    writeln!(out, "nodes: {}", dag.len())?;
    writeln!(out, "arcs: {}", dag.arc_count())?;
    writeln!(out, "roots: {}", roots.join(","))?;
    writeln!(out, "terminals: {}", terminals.join(","))?;
    match median_abs_coefficient(params) {
        Ok(m) => writeln!(out, "median_abs_coefficient: {m}")?,
        Err(_) => writeln!(out, "median_abs_coefficient: NA")?,
    }
    let top = |c: &CentralityVector, k: usize| -> String {
        c.top(k)
            .iter()
            .map(|&v| format!("{}={}", dag.name(v), c.values[v]))
            .collect::<Vec<_>>()
            .join(",")
    };
    writeln!(out, "top degree_in: {}", top(&din, 3))?;
    writeln!(out, "top degree_out: {}", top(&dout, 3))?;
    writeln!(out, "top betweenness: {}", top(&bw, 3))?;
    writeln!(out, "top pagerank: {}", top(&pr, 3))?;
    for (k, members) in partition.clusters().iter().enumerate() {
        let names: Vec<&str> = members.iter().map(|&v| dag.name(v)).collect();
        writeln!(out, "cluster {}: {}", partition.label(k), names.join(","))?;
    }
    for (i, j, s) in coupling.entries() {
        writeln!(out, "coupling {}->{}: {s}", coupling.labels()[i], coupling.labels()[j])?;
    }

    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir)?;
        for c in [&din, &dout, &bw, &pr] {
            c.write_csv(dag.nodes(), sink(Some(&dir.join(format!("centrality_{}.csv", c.kind.as_str()))))?)?;
        }
        partition.write_csv(dag.nodes(), sink(Some(&dir.join("partition.csv")))?)?;
        coupling.write_csv(sink(Some(&dir.join("coupling.csv")))?)?;
    }
    if let Some(p) = &a.dot {
        write_dot(&model, &partition, p)?;
    }
    Ok(())
}

fn cmd_influence(a: &InfluenceArgs) -> Result<()> {
    let model = read_model(&a.model)?;
    let (from, to) = (node(&model.dag, &a.from)?, node(&model.dag, &a.to)?);
    if a.k < 1 {
        return Err(invalid("-k must be at least 1"));
    }
    let total = total_influence(&model.dag, &model.params, from, to)?;
    let paths = if from == to {
        None
    } else {
        Some(top_paths(&model.dag, &model.params, from, to, a.k)?)
    };
    let res = InfluenceResult {
        source: from,
        target: to,
        total,
        paths,
    };
    res.write_csv(&model.dag, sink(a.output.as_deref())?)
}

fn cmd_compare(c: &CompareCommand, exec: Execution) -> Result<()> {
    match c {
        CompareCommand::Kmeans { input, k, seeds, output } => {
            let data = FactorTable::read_csv(open(input)?)?;
            let res = kmeans_best_seed(&data, *k, seeds.0..=seeds.1, exec)?;
            eprintln!("best seed {}, total within SS {}", res.best_seed, res.total_within_ss);
            res.partition().write_csv(data.items(), sink(output.as_deref())?)
        }
        CompareCommand::Pca { input, dims, output } => {
            let data = FactorTable::read_csv(open(input)?)?;
            let proj = pca_project(&data, *dims)?;
            for (i, e) in proj.explained.iter().enumerate() {
                eprintln!("PC{}: {:.2}% of variance", i + 1, e * 100.0);
            }
            proj.scores.write_csv(sink(output.as_deref())?)
        }
        CompareCommand::Ellipse {
            input,
            clusters,
            level,
            points,
            output,
        } => {
            let data = FactorTable::read_csv(open(input)?)?;
            if data.dim() != 2 {
                return Err(invalid("ellipse input must have exactly two factor columns"));
            }
            let groups: Vec<(String, Vec<usize>)> = match clusters {
                Some(p) => {
                    let part = Partition::read_csv(data.items(), open(p)?)?;
                    part.clusters()
                        .into_iter()
                        .enumerate()
                        .map(|(k, m)| (part.label(k).to_string(), m))
                        .collect()
                }
                None => vec![("all".to_string(), (0..data.len()).collect())],
            };
            let mut out = sink(output.as_deref())?;
            if *points > 0 {
                writeln!(out, "cluster,x,y")?;
            } else {
                writeln!(out, "cluster,center_x,center_y,major,minor,angle")?;
            }
            for (label, members) in groups {
                let pts: Vec<[f64; 2]> = members.iter().map(|&i| [data.row(i)[0], data.row(i)[1]]).collect();
                let e = confidence_ellipse(&pts, *level)?;
                if *points > 0 {
                    for p in e.boundary(*points) {
                        writeln!(out, "{label},{},{}", p[0], p[1])?;
                    }
                } else {
                    writeln!(
                        out,
                        "{label},{},{},{},{},{}",
                        e.center[0], e.center[1], e.axes[0], e.axes[1], e.angle
                    )?;
                }
            }
            Ok(())
        }
        CompareCommand::Edges {
            ours,
            theirs,
            mode,
            map,
            restrict,
        } => {
            let mut a = EdgeWeightSet::read_csv(open(ours)?)?;
            let mut b = EdgeWeightSet::read_csv(open(theirs)?)?;
            if let Some(m) = map {
                b = b.relabel(&read_item_map(open(m)?)?);
            }
            if *restrict {
                a = a.restrict_to(&b.items());
            }
            let mode = match mode {
                ModeArg::Union => PairMode::Union,
                ModeArg::Intersection => PairMode::Intersection,
            };
            let r = edge_set_correlation(&a, &b, mode)?;
            println!("n_pairs,r,t,p");
            println!("{},{},{},{}", r.n_pairs, r.r, r.t, r.p);
            Ok(())
        }
        CompareCommand::Mwu { input, groups } => {
            let intercepts = read_intercepts(open(input)?)?;
            let pol = read_polarity(open(groups)?)?;
            let (mut pos, mut neg) = (Vec::new(), Vec::new());
            for (item, v) in &intercepts {
                match pol.get(item) {
                    Some(Polarity::Positive) => pos.push(*v),
                    Some(Polarity::Negative) => neg.push(*v),
                    None => return Err(invalid(format!("no polarity for {item}"))),
                }
            }
            let r = mann_whitney_u(&pos, &neg)?;
            println!("n_positive,n_negative,u,p,method");
            println!(
                "{},{},{},{},{}",
                pos.len(),
                neg.len(),
                r.u,
                r.p,
                if r.exact { "exact" } else { "normal" }
            );
            Ok(())
        }
        CompareCommand::Pearson { r, df } => {
            let (t, p) = pearson_significance(*r, *df)?;
            println!("r,df,t,p");
            println!("{r},{df},{t},{p}");
            Ok(())
        }
    }
}

fn cmd_export(a: &ExportArgs) -> Result<()> {
    let model = read_model(&a.model)?;
    let out = sink(a.output.as_deref())?;
    match a.format {
        ExportFormat::Dot => {
            let partition = partition_for(&model, a.clusters.as_deref(), 4)?;
            let weight = |u: usize, v: usize| model.params.coefficient(u, v).unwrap_or(0.0);
            let mut out = out;
            out.write_all(model.dag.to_dot(Some(&partition), Some(&weight)).as_bytes())?;
            Ok(())
        }
        ExportFormat::Arcs => {
            let mut w = out;
            writeln!(w, "from,to,coefficient")?;
            for (u, v, c) in model.params.arcs() {
                writeln!(w, "{},{},{c}", model.dag.name(u), model.dag.name(v))?;
            }
            Ok(())
        }
        ExportFormat::Edges => {
            let sign = if a.absolute { FoldSign::Absolute } else { FoldSign::Signed };
            EdgeWeightSet::from_model(&model.dag, &model.params, sign).write_csv(out)
        }
        ExportFormat::Intercepts => {
            let p = a
                .polarity
                .as_ref()
                .ok_or_else(|| invalid("--polarity is required for intercepts"))?;
            let pol = read_polarity(open(p)?)?;
            intercept_report(&model.params, &pol)?.write_csv(out)
        }
    }
}

fn cmd_import(a: &ImportArgs) -> Result<()> {
    let (dag, params) = match (&a.items, &a.arcs) {
        (Some(i), Some(r)) => read_model_tables(open(i)?, open(r)?)?,
        _ => reference_model()?,
    };
    Model::new(dag, params)?.write_json(sink(a.output.as_deref())?)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    if a.n < 1 {
        return Err(invalid("-n must be at least 1"));
    }
    let model = read_model(&a.model)?;
    let table = model.params.simulate(&model.dag, a.n, a.seed)?;
    table.write_canonical(sink(a.output.as_deref())?)
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(invalid("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| invalid(e.to_string()))?;
    }
    let exec = execution(cli);
    match &cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Learn(a) => cmd_learn(a, exec),
        Command::Fit(a) => cmd_fit(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Influence(a) => cmd_influence(a),
        Command::Compare(c) => cmd_compare(c, exec),
        Command::Export(a) => cmd_export(a),
        Command::Import(a) => cmd_import(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
