use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use sketchql::embeddings::load_embeddings;
use sketchql::model::{default_model, read_corpus, read_model, write_model};
use sketchql::output::{json_lines, table};
use sketchql::run::{pool, synthesize_parallel};
use sketchql::schema::{load_csv_with, SchemaDescriptor};
use sketchql::sqlite::load_sqlite_catalog;
use sketchql_core::completion::{rank, Completer};
use sketchql_core::config::JoinScoring;
use sketchql_core::engine::{explain, Input};
use sketchql_core::nlparser::{top_k_accuracy, train};
use sketchql_core::similarity::SimilarityProvider;
use sketchql_core::{emit_sql, parse_sketch, Catalog, Config};

#[derive(Parser)]
#[command(
    name = "sketchql",
    version,
    about = "Synthesize SQL from natural language through query sketches"
)]
struct Cli {
    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate an utterance (or given sketches) into ranked SQL.
    Synthesize(SynthesizeArgs),
    /// List the ranked completions of one sketch, without repairs.
    Complete(CompleteArgs),
    /// Learn parser weights from `utterance<TAB>sketch` pairs.
    Train(TrainArgs),
    /// Print the loaded tables, column types and foreign keys.
    Introspect(IntrospectArgs),
}

#[derive(Args)]
struct DataArgs {
    /// A directory of per-table CSV files (with --schema) or a SQLite file.
    #[arg(long)]
    db: PathBuf,
    /// JSON schema descriptor for CSV data.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Keep at most this many distinct values per column in the content index.
    #[arg(long, value_name = "N")]
    sample_contents: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum JoinMode {
    Fk,
    Jaccard,
}

#[derive(Args)]
struct SearchArgs {
    /// Word vectors (`V D` header, then `token f1 .. fD`).
    #[arg(long, env = "SKETCHQL_EMBEDDINGS")]
    embeddings: Option<PathBuf>,
    /// Queries returned.
    #[arg(long, value_name = "M")]
    results: Option<usize>,
    #[arg(long, value_name = "X")]
    gamma: Option<f64>,
    #[arg(long, value_name = "X")]
    rho: Option<f64>,
    /// Ignore database contents when scoring.
    #[arg(long)]
    no_data: bool,
    /// Skip column type checks during completion.
    #[arg(long)]
    no_type: bool,
    #[arg(long, value_enum, default_value = "fk")]
    join_scoring: JoinMode,
    /// Score column hints against column names only.
    #[arg(long)]
    no_table_context: bool,
    /// Print one JSON object per result.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SynthesizeArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Parser weights (JSON); defaults to the bundled demo model.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Use this sketch instead of parsing; repeatable.
    #[arg(long, conflicts_with = "utterance")]
    sketch: Vec<String>,
    #[arg(long, value_name = "K")]
    top_sketches: Option<usize>,
    #[arg(long, value_name = "N")]
    max_repairs: Option<usize>,
    #[arg(long)]
    no_repair: bool,
    /// Print iterations, repairs and score factors.
    #[arg(long)]
    explain: bool,
    /// Worker threads (default: available cores).
    #[arg(long)]
    threads: Option<usize>,
    utterance: Option<String>,
}

#[derive(Args)]
struct CompleteArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    search: SearchArgs,
    sketch: String,
}

#[derive(Args)]
struct TrainArgs {
    /// Tab-separated `utterance<TAB>sketch` lines.
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IntrospectArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Print the schema as a JSON descriptor.
    #[arg(long)]
    json: bool,
}

fn load_catalog(data: &DataArgs) -> anyhow::Result<Catalog> {
    let sample = data.sample_contents.map(|n| (n, 0));
    if data.db.is_dir() {
        let Some(schema_path) = &data.schema else {
            bail!("--schema is required when --db is a directory");
        };
        let schema = SchemaDescriptor::read(schema_path)?;
        Ok(load_csv_with(&schema, schema_path, &data.db, sample)?)
    } else if data.db.is_file() {
        if data.schema.is_some() {
            log::warn!("--schema is ignored for SQLite databases; their own metadata is used");
        }
        Ok(load_sqlite_catalog(&data.db, sample)?)
    } else {
        bail!("{}: no such file or directory", data.db.display());
    }
}

fn similarity(path: Option<&Path>, cfg: &Config) -> anyhow::Result<SimilarityProvider> {
    let store = path.map(load_embeddings).transpose()?;
    if store.is_none() {
        log::info!("no embeddings given; using lexical similarity only");
    }
    Ok(SimilarityProvider::new(store).with_neutral(cfg.neutral_score))
}

fn apply_search(cfg: &mut Config, search: &SearchArgs) {
    if let Some(m) = search.results {
        cfg.results = m;
    }
    if let Some(g) = search.gamma {
        cfg.accept_threshold = g;
    }
    if let Some(r) = search.rho {
        cfg.fault_threshold = r;
    }
    cfg.no_data = search.no_data;
    cfg.no_type = search.no_type;
    cfg.join_scoring = match search.join_scoring {
        JoinMode::Fk => JoinScoring::ForeignKey,
        JoinMode::Jaccard => JoinScoring::ContentOverlap,
    };
    if search.no_table_context {
        cfg.table_context = None;
    }
}

fn outcome(results: usize) -> ExitCode {
    if results == 0 {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn synthesize_cmd(args: SynthesizeArgs) -> anyhow::Result<ExitCode> {
    let mut cfg = Config::default();
    apply_search(&mut cfg, &args.search);
    if let Some(k) = args.top_sketches {
        cfg.top_sketches = k;
    }
    if let Some(n) = args.max_repairs {
        cfg.max_repairs = n;
    }
    cfg.no_repair = args.no_repair;
    cfg.validate()?;
    let input = if !args.sketch.is_empty() {
        let sketches = args
            .sketch
            .iter()
            .map(|s| parse_sketch(s).with_context(|| format!("bad sketch `{}`", s)))
            .collect::<anyhow::Result<Vec<_>>>()?;
        Input::Sketches(sketches)
    } else if let Some(u) = &args.utterance {
        Input::Utterance(u.clone())
    } else {
        bail!("give an utterance or at least one --sketch");
    };
    let model = match &args.model {
        Some(p) => read_model(p)?,
        None => default_model(),
    };
    if args.threads == Some(0) {
        bail!("--threads must be at least 1");
    }
    let catalog = load_catalog(&args.data)?;
    let sim = similarity(args.search.embeddings.as_deref(), &cfg)?;
    let pool = pool(args.threads)?;
    let started = Instant::now();
    let result = synthesize_parallel(&pool, &input, &catalog, &sim, &model, &cfg);
    log::info!("synthesis took {:?}", started.elapsed());
    if args.search.json {
        print!("{}", json_lines(&result));
        if args.explain {
            eprint!("{}", explain(&result));
        }
    } else {
        if args.explain {
            print!("{}", explain(&result));
        }
        if result.queries.is_empty() {
            eprintln!("no query scored above {}", cfg.accept_threshold);
        } else {
            print!("{}", table(&result));
        }
    }
    Ok(outcome(result.queries.len()))
}

fn complete_cmd(args: CompleteArgs) -> anyhow::Result<ExitCode> {
    let mut cfg = Config::default();
    apply_search(&mut cfg, &args.search);
    cfg.validate()?;
    let sketch = parse_sketch(&args.sketch).with_context(|| format!("bad sketch `{}`", args.sketch))?;
    let catalog = load_catalog(&args.data)?;
    let sim = similarity(args.search.embeddings.as_deref(), &cfg)?;
    let completer = Completer::new(&catalog, &sim, &cfg);
    let mut candidates = completer.instantiate_rel(&sketch);
    rank(&mut candidates);
    candidates.truncate(cfg.results);
    for note in completer.notes() {
        log::info!("{}", note);
    }
    for (i, c) in candidates.iter().enumerate() {
        let sql = c.query().map(emit_sql).unwrap_or_default();
        if args.search.json {
            let line = serde_json::json!({ "rank": i + 1, "sql": sql, "score": c.score, "factors": c.factors });
            println!("{}", line);
        } else {
            println!("{:<5} {:.4}  {}", i + 1, c.score, sql);
        }
    }
    Ok(outcome(candidates.len()))
}

fn train_cmd(args: TrainArgs) -> anyhow::Result<ExitCode> {
    if !(args.lr.is_finite() && args.lr > 0.0) {
        bail!("--lr must be positive");
    }
    let pairs = read_corpus(&args.pairs)?;
    let started = Instant::now();
    let (model, report) = train(&pairs, args.epochs, args.lr, args.seed)?;
    write_model(&model, &args.out)?;
    eprintln!(
        "trained on {} pairs ({} underivable) in {:.2?}; {} features; top-1 {:.3}, top-5 {:.3}",
        pairs.len(),
        report.underivable.len(),
        started.elapsed(),
        model.dimension(),
        top_k_accuracy(&pairs, &model, 1),
        top_k_accuracy(&pairs, &model, 5)
    );
    Ok(ExitCode::SUCCESS)
}

fn introspect_cmd(args: IntrospectArgs) -> anyhow::Result<ExitCode> {
    let catalog = load_catalog(&args.data)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&SchemaDescriptor::of(&catalog))?);
        return Ok(ExitCode::SUCCESS);
    }
    for t in catalog.tables() {
        let cols: Vec<String> = t
            .record_type()
            .fields()
            .iter()
            .map(|f| format!("{}: {}", f.attr.base().1, f.ty))
            .collect();
        print!("{}({}) {} rows", t.name(), cols.join(", "), t.rows().len());
        if !t.primary_key().is_empty() {
            print!(", key ({})", t.primary_key().join(", "));
        }
        println!();
    }
    if !catalog.foreign_keys().is_empty() {
        println!("foreign keys:");
        for fk in catalog.foreign_keys() {
            println!("  {} -> {}", fk.from, fk.to);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::FAILURE,
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let result = match cli.command {
        Command::Synthesize(a) => synthesize_cmd(a),
        Command::Complete(a) => complete_cmd(a),
        Command::Train(a) => train_cmd(a),
        Command::Introspect(a) => introspect_cmd(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::FAILURE
        }
    }
}
