//! Batch front end: map generation, path listing, single-path scoring and
//! full corpus analysis.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use spire_entropy::entropy::EntropyModel;
use spire_entropy::ingest::{resolve_act, AmbiguityPolicy, SeedMaps};
use spire_entropy::model::{parse_symbols, ActMap, NodeId};
use spire_entropy::paths::{count_paths, for_each_path, ChoiceSet, EndSetMode};
use spire_entropy::pipeline::{
    analyze_corpus, filter_runs, load_runs, parse_map_as, AnalysisConfig, CorpusFilter, DirectoryStore, MapFormat,
    RunFormat,
};
use spire_entropy::report::emit_report;
use spire_entropy::stats::{standard_comparisons, Metric, StatsConfig};
use spire_entropy::synth::{generate_document, SynthParams, GENERATOR_NAME, PRNG_NAME};

pub const EXIT_OK: u8 = 0;
pub const EXIT_OTHER: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_PARSE: u8 = 3;
pub const EXIT_EMPTY: u8 = 4;

pub const PROVENANCE_FILE: &str = "provenance.json";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Parser)]
#[command(
    name = "spire-entropy",
    version,
    about = "Path-entropy analytics for act maps and run logs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic three-act map document.
    GenMap(GenMapArgs),
    /// Count or list the paths of one act.
    Paths(PathsArgs),
    /// Score one path through one act.
    Entropy(EntropyArgs),
    /// Filter, score and compare a run corpus.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct GenMapArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 7)]
    pub columns: u8,
    /// Floors below the boss.
    #[arg(long, default_value_t = 15)]
    pub floors: u8,
    #[arg(long, default_value_t = 3)]
    pub starts: u8,
    #[arg(long, default_value_t = 0.35)]
    pub density: f64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MapInput {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, value_enum, default_value_t = MapFormatArg::Auto)]
    pub map_format: MapFormatArg,
    #[arg(long, default_value_t = 1)]
    pub act: u8,
}

#[derive(Debug, Args)]
pub struct PathsArgs {
    #[command(flatten)]
    pub input: MapInput,
    /// Paths from the start floor to any node on this floor.
    #[arg(long, conflicts_with_all = ["narrow", "start", "end"])]
    pub death_floor: Option<u8>,
    /// Paths from the start floor to the node at FLOOR,COLUMN.
    #[arg(long, value_name = "FLOOR,COLUMN", conflicts_with_all = ["start", "end"])]
    pub narrow: Option<String>,
    /// Explicit start node (repeatable); defaults to every floor-1 node.
    #[arg(long, value_name = "FLOOR,COLUMN")]
    pub start: Vec<String>,
    /// Explicit end node (repeatable); defaults to the boss.
    #[arg(long, value_name = "FLOOR,COLUMN")]
    pub end: Vec<String>,
    /// Print every path instead of the count.
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub input: MapInput,
    /// Room symbols of the act, e.g. MM?ETRB.
    #[arg(long)]
    pub path: String,
    #[arg(long, value_enum, default_value_t = EndSetArg::Wide)]
    pub end_set: EndSetArg,
    /// Encounter tables replacing the bundled ones.
    #[arg(long)]
    pub tables: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub runs: PathBuf,
    /// Directory of `<seed>.json` map files.
    #[arg(long)]
    pub maps: PathBuf,
    #[arg(long, value_enum, default_value_t = RunFormatArg::Canonical)]
    pub runs_format: RunFormatArg,
    #[arg(long, value_enum, default_value_t = MapFormatArg::Auto)]
    pub map_format: MapFormatArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Analyze a random subset of this many filtered runs.
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub sample_seed: u64,
    #[arg(long, value_enum, default_value_t = EndSetArg::Wide)]
    pub end_set: EndSetArg,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = MetricArg::Normalized)]
    pub metric: MetricArg,
    /// Put victory and high-ascension groups first.
    #[arg(long)]
    pub swap_groups: bool,
    /// Discard runs whose logs fit more than one node sequence.
    #[arg(long)]
    pub strict_paths: bool,
    #[arg(long)]
    pub tables: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MapFormatArg {
    Auto,
    Native,
    Oracle,
}

impl From<MapFormatArg> for MapFormat {
    fn from(f: MapFormatArg) -> Self {
        match f {
            MapFormatArg::Auto => MapFormat::Auto,
            MapFormatArg::Native => MapFormat::Native,
            MapFormatArg::Oracle => MapFormat::Oracle,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunFormatArg {
    Canonical,
    Dataset,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EndSetArg {
    Wide,
    Narrow,
}

impl From<EndSetArg> for EndSetMode {
    fn from(m: EndSetArg) -> Self {
        match m {
            EndSetArg::Wide => EndSetMode::Wide,
            EndSetArg::Narrow => EndSetMode::Narrow,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricArg {
    Normalized,
    PerStep,
}

/// Bad flags or inputs detected before any work starts.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()).into())
}

/// Process exit code for an error.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    use spire_entropy::Error as E;
    if err.downcast_ref::<ConfigError>().is_some() {
        return EXIT_CONFIG;
    }
    match err.chain().find_map(|e| e.downcast_ref::<E>()) {
        Some(E::InfeasibleParams(_) | E::InvalidTable { .. }) => EXIT_CONFIG,
        Some(
            E::Parse { .. }
            | E::MalformedDocument(_)
            | E::UnknownSymbol(_)
            | E::InvalidTopology { .. }
            | E::PathMismatch { .. }
            | E::AmbiguousPath { .. }
            | E::InvalidPath(_)
            | E::EmptyPath,
        ) => EXIT_PARSE,
        Some(E::EmptyChoiceSet) => EXIT_EMPTY,
        _ => EXIT_OTHER,
    }
}

/// Runs one command, writing human-readable output to `out`. Returns the
/// exit code for a completed command.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<u8> {
    match cli.command {
        Command::GenMap(args) => gen_map(&args, out),
        Command::Paths(args) => paths(&args, out),
        Command::Entropy(args) => entropy(&args, out),
        Command::Analyze(args) => analyze(&args, out),
    }
}

fn gen_map(args: &GenMapArgs, out: &mut dyn Write) -> Result<u8> {
    let params = SynthParams {
        floors_per_act: args.floors,
        columns: args.columns,
        start_node_count: args.starts,
        edge_density: args.density,
        ..SynthParams::default()
    };
    let json = generate_document(args.seed, &params)?.to_json();
    match &args.out {
        Some(path) => std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?,
        None => out.write_all(json.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn load_act(input: &MapInput) -> Result<(SeedMaps, usize)> {
    if !(1..=3).contains(&input.act) {
        return config_error(format!("--act must be 1, 2 or 3, got {}", input.act));
    }
    let text = read_input(&input.map)?;
    let maps =
        parse_map_as(&text, input.map_format.into()).with_context(|| format!("reading map {}", input.map.display()))?;
    Ok((maps, input.act as usize - 1))
}

fn read_input(path: &Path) -> Result<String> {
    if !path.is_file() {
        return config_error(format!("{} is not a readable file", path.display()));
    }
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn node_at(map: &ActMap, spec: &str) -> Result<NodeId> {
    let parsed = spec
        .split_once(',')
        .and_then(|(f, c)| Some((f.trim().parse::<u8>().ok()?, c.trim().parse::<u8>().ok()?)));
    let Some((floor, column)) = parsed else {
        return config_error(format!("expected FLOOR,COLUMN, got {spec:?}"));
    };
    match map.find(floor, column) {
        Some(n) => Ok(n.id),
        None => config_error(format!(
            "act {} has no node at floor {floor}, column {column}",
            map.act()
        )),
    }
}

fn paths(args: &PathsArgs, out: &mut dyn Write) -> Result<u8> {
    let (maps, idx) = load_act(&args.input)?;
    let map = &maps.acts[idx];
    let choice = if let Some(floor) = args.death_floor {
        if floor == 0 || floor > map.boss_floor() {
            return config_error(format!("--death-floor must be in 1..={}", map.boss_floor()));
        }
        ChoiceSet::prefix(map, floor)
    } else if let Some(node) = &args.narrow {
        ChoiceSet::to_node(map, node_at(map, node)?)
    } else {
        let full = ChoiceSet::full(map);
        let starts = match args.start.is_empty() {
            true => full.starts,
            false => args.start.iter().map(|s| node_at(map, s)).collect::<Result<_>>()?,
        };
        let ends = match args.end.is_empty() {
            true => full.ends,
            false => args.end.iter().map(|s| node_at(map, s)).collect::<Result<_>>()?,
        };
        ChoiceSet { starts, ends }
    };
    if args.list {
        let mut result = Ok(());
        for_each_path(map, &choice, |path| {
            if result.is_ok() {
                let line: Vec<String> = path
                    .iter()
                    .map(|&id| {
                        let n = map.node(id);
                        format!("{}{},{}", n.room_type.symbol(), n.floor, n.column)
                    })
                    .collect();
                result = writeln!(out, "{}", line.join(" "));
            }
        });
        result?;
    } else {
        writeln!(out, "{}", count_paths(map, &choice))?;
    }
    Ok(EXIT_OK)
}

fn load_model(tables: &Option<PathBuf>) -> Result<EntropyModel> {
    match tables {
        Some(path) => {
            let text = read_input(path)?;
            Ok(EntropyModel::from_json(&text).with_context(|| format!("loading tables {}", path.display()))?)
        }
        None => Ok(EntropyModel::bundled().clone()),
    }
}

fn entropy(args: &EntropyArgs, out: &mut dyn Write) -> Result<u8> {
    let (maps, idx) = load_act(&args.input)?;
    let map = &maps.acts[idx];
    let model = load_model(&args.tables)?;
    let rooms = parse_symbols(&args.path)?;
    let trace = resolve_act(map, &rooms, AmbiguityPolicy::Leftmost)?;
    let report = model.report(map, &trace, args.end_set.into())?;
    writeln!(out, "floor\tcolumn\troom\tbits")?;
    for (id, bits) in &report.per_node {
        let n = map.node(*id);
        writeln!(out, "{}\t{}\t{}\t{:.4}", n.floor, n.column, n.room_type.symbol(), bits)?;
    }
    writeln!(out, "total: {:.4}", report.total)?;
    writeln!(out, "min: {:.4}", report.min_possible)?;
    writeln!(out, "max: {:.4}", report.max_possible)?;
    writeln!(out, "normalized: {:.4}", report.normalized)?;
    writeln!(out, "per_step: {:.6}", report.per_step)?;
    writeln!(out, "complete: {}", report.complete)?;
    writeln!(out, "degenerate: {}", report.degenerate)?;
    if trace.ambiguous {
        writeln!(out, "note: several node sequences match; scored the leftmost")?;
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a AnalyzeArgs,
    generator: &'static str,
    prng: &'static str,
    runs_sha256: String,
    tables_sha256: String,
    /// SHA-256 over `seed<TAB>sha256(file)` lines for every map file read, sorted by seed.
    maps_sha256: String,
    maps_read: usize,
}

#[derive(Debug, Serialize)]
struct Summary {
    filter: spire_entropy::pipeline::FilterStats,
    sampled: usize,
    analyzed: usize,
    discards: spire_entropy::pipeline::DiscardCounts,
    ambiguous: usize,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<u8> {
    let stats_config = StatsConfig {
        alpha: args.alpha,
        swap_groups: args.swap_groups,
    };
    if stats_config.validate().is_err() {
        return config_error(format!("--alpha must be in (0, 1), got {}", args.alpha));
    }
    if !args.runs.is_file() {
        return config_error(format!("--runs {} is not a file", args.runs.display()));
    }
    if !args.maps.is_dir() {
        return config_error(format!("--maps {} is not a directory", args.maps.display()));
    }
    if args.out.is_file() {
        return config_error(format!("--out {} is a file", args.out.display()));
    }
    if args.sample == Some(0) {
        return config_error("--sample must be positive");
    }
    let model = load_model(&args.tables)?;
    let tables_text = match &args.tables {
        Some(p) => std::fs::read(p).with_context(|| format!("reading {}", p.display()))?,
        None => EntropyModel::bundled_json().as_bytes().to_vec(),
    };

    let runs_bytes = std::fs::read(&args.runs).with_context(|| format!("reading {}", args.runs.display()))?;
    let format = match args.runs_format {
        RunFormatArg::Canonical => RunFormat::Canonical,
        RunFormatArg::Dataset => RunFormat::Dataset,
    };
    let records = load_runs(&args.runs, format).with_context(|| format!("parsing {}", args.runs.display()))?;
    let (mut passed, filter_stats) = filter_runs(records, &CorpusFilter::default());
    if let Some(n) = args.sample.filter(|&n| n < passed.len()) {
        let mut rng = ChaCha8Rng::seed_from_u64(args.sample_seed);
        let mut keep = rand::seq::index::sample(&mut rng, passed.len(), n).into_vec();
        keep.sort_unstable();
        passed = keep.into_iter().map(|i| passed[i].clone()).collect();
    }

    let store = DirectoryStore::new(&args.maps, args.map_format.into());
    let config = AnalysisConfig {
        end_set: args.end_set.into(),
        ambiguity: if args.strict_paths {
            AmbiguityPolicy::Strict
        } else {
            AmbiguityPolicy::Leftmost
        },
    };
    let analysis = analyze_corpus(&model, &passed, &store, config)?;
    let metric = match args.metric {
        MetricArg::Normalized => Metric::Normalized,
        MetricArg::PerStep => Metric::PerStep,
    };
    let comparisons = standard_comparisons(&analysis.rows, metric, &stats_config)?;
    emit_report(&args.out, &analysis.rows, &comparisons)?;

    let mut seeds: Vec<&str> = passed.iter().map(|(_, r)| r.seed.as_str()).collect();
    seeds.sort_unstable();
    seeds.dedup();
    let mut maps_digest = Sha256::new();
    let mut maps_read = 0;
    for seed in seeds {
        if let Some(path) = store.path_for(seed).filter(|p| p.is_file()) {
            let bytes = std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
            maps_digest.update(format!("{seed}\t{}\n", sha256_hex(&bytes)));
            maps_read += 1;
        }
    }
    let provenance = Provenance {
        tool: "spire-entropy",
        version: env!("CARGO_PKG_VERSION"),
        config: args,
        generator: GENERATOR_NAME,
        prng: PRNG_NAME,
        runs_sha256: sha256_hex(&runs_bytes),
        tables_sha256: sha256_hex(&tables_text),
        maps_sha256: hex::encode(maps_digest.finalize()),
        maps_read,
    };
    let summary = Summary {
        filter: filter_stats,
        sampled: passed.len(),
        analyzed: analysis.analyzed(),
        discards: analysis.discards,
        ambiguous: analysis.rows.iter().filter(|r| r.ambiguous).count(),
    };
    for (name, value) in [
        (PROVENANCE_FILE, serde_json::to_string_pretty(&provenance)?),
        (SUMMARY_FILE, serde_json::to_string_pretty(&summary)?),
    ] {
        let path = args.out.join(name);
        std::fs::write(&path, value + "\n").with_context(|| format!("writing {}", path.display()))?;
    }

    writeln!(
        out,
        "runs: {} read, {} passed filters, {} sampled, {} analyzed, {} discarded",
        filter_stats.input,
        filter_stats.passed,
        passed.len(),
        analysis.analyzed(),
        analysis.discards.total()
    )?;
    for c in &comparisons {
        match &c.result {
            Some(r) => writeln!(
                out,
                "{} {} {}: {} vs {}  t={:.4} df={:.1} p={:.3e}{}",
                c.split.name(),
                c.scope.name(),
                c.metric.name(),
                c.label_a,
                c.label_b,
                r.t,
                r.df,
                r.p,
                if r.significant { " *" } else { "" }
            )?,
            None => writeln!(
                out,
                "{} {} {}: {}",
                c.split.name(),
                c.scope.name(),
                c.metric.name(),
                c.note
            )?,
        }
    }
    if analysis.analyzed() == 0 {
        eprintln!("warning: no runs left to analyze; wrote header-only reports");
        return Ok(EXIT_EMPTY);
    }
    Ok(EXIT_OK)
}
