use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use twinstore::benchkit::{self, GenConfig, ReportFormat, SuiteOptions};
use twinstore::engine::{AnyStore, EngineKind};
use twinstore::exec::{execute_with, ExecOptions};
use twinstore::ntriples::{parse_stream, ParseMode};
use twinstore::persist::{load_store, read_manifest, save_store};
use twinstore::plan::{explain, plan, EngineMode};
use twinstore::sparql::parse_query;

#[derive(Parser)]
#[command(name = "twinstore", version, about = "Triple-store workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Single,
    Vp,
    Rmtt,
}

impl From<Engine> for EngineKind {
    fn from(e: Engine) -> Self {
        match e {
            Engine::Single => EngineKind::Single,
            Engine::Vp => EngineKind::Vp,
            Engine::Rmtt => EngineKind::Rmtt,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sound,
    Pruned,
}

#[derive(Subcommand)]
enum Command {
    /// Load an N-Triples file into a store directory.
    Ingest {
        input: PathBuf,
        #[arg(long, value_enum)]
        engine: Engine,
        #[arg(short, long)]
        output: PathBuf,
        /// Skip malformed lines instead of failing.
        #[arg(long)]
        lenient: bool,
    },
    /// Run a query against a store and print one tab-separated row per result.
    Query {
        store: PathBuf,
        query: PathBuf,
        /// Twin-table join mode (default pruned). Ignored for other engines.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Print the plan before the rows.
        #[arg(long)]
        explain: bool,
        /// Drop duplicate rows.
        #[arg(long)]
        distinct: bool,
    },
    /// Print the plan for a query.
    Explain {
        store: PathBuf,
        query: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Print the store manifest.
    Stats { store: PathBuf },
    /// Generate a university dataset.
    Gen {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Number of universities.
        #[arg(long, default_value_t = GenConfig::default().universities)]
        scale: usize,
        #[arg(long, default_value_t = GenConfig::default().departments_per_university)]
        departments: usize,
        #[arg(long, default_value_t = GenConfig::default().students_per_department)]
        students: usize,
        #[arg(long, default_value_t = GenConfig::default().professors_per_department)]
        professors: usize,
        #[arg(long, default_value_t = GenConfig::default().courses_per_department)]
        courses: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run a query suite across engines and write a report (.csv or .md).
    Bench {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        /// Comma-separated engine modes.
        #[arg(long, value_delimiter = ',', default_value = "single,vp,rmtt-sound,rmtt-pruned")]
        engines: Vec<String>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(short, long)]
        output: PathBuf,
        /// Seed recorded in the report metadata.
        #[arg(long)]
        seed: Option<u64>,
        /// Run query cells concurrently.
        #[arg(long)]
        concurrent: bool,
    },
}

/// User errors exit 1, everything else 2.
enum Failure {
    User(anyhow::Error),
    Internal(anyhow::Error),
}

type CmdResult = Result<(), Failure>;

trait UserContext<T> {
    fn user(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> UserContext<T> for Result<T, E> {
    fn user(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::User(e.into()))
    }
}

fn internal(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Internal(e.into())
}

fn open_store(dir: &Path) -> Result<AnyStore, Failure> {
    load_store(dir).with_context(|| format!("cannot load store {}", dir.display())).user()
}

fn read_query(path: &Path) -> Result<twinstore::BgpQuery, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read query {}", path.display()))
        .user()?;
    parse_query(&text)
        .map_err(|d| anyhow::anyhow!("{}:{d}", path.display()))
        .user()
}

fn mode_for(store: &AnyStore, mode: Option<Mode>) -> EngineMode {
    EngineMode::for_store(store.kind(), !matches!(mode, Some(Mode::Sound)))
}

fn cmd_ingest(input: &Path, engine: Engine, output: &Path, lenient: bool) -> CmdResult {
    let file = std::fs::File::open(input)
        .with_context(|| format!("cannot open {}", input.display()))
        .user()?;
    let mode = if lenient { ParseMode::Lenient } else { ParseMode::Strict };
    let parsed = parse_stream(std::io::BufReader::new(file), mode)
        .with_context(|| format!("{}", input.display()))
        .user()?;
    for d in &parsed.diagnostics {
        eprintln!("{}: skipped: {d}", input.display());
    }
    let store = AnyStore::build(engine.into(), &parsed.triples);
    save_store(&store, output)
        .with_context(|| format!("cannot write store {}", output.display()))
        .map_err(internal)?;
    eprintln!(
        "ingested {} triples into {} ({})",
        store.as_store().triple_count(),
        output.display(),
        store.kind()
    );
    Ok(())
}

fn cmd_query(store_dir: &Path, query: &Path, mode: Option<Mode>, show_plan: bool, distinct: bool) -> CmdResult {
    let store = open_store(store_dir)?;
    let q = read_query(query)?;
    let p = plan(&q, store.as_store(), mode_for(&store, mode)).map_err(internal)?;
    let opts = ExecOptions {
        dedup: distinct,
        ..ExecOptions::default()
    };
    let (result, stats) = execute_with(&p, store.as_store(), opts);
    let rows = result.decode(store.as_store().dictionary()).map_err(internal)?;
    let mut out = std::io::stdout().lock();
    if show_plan {
        write!(out, "{}", explain(&p)).map_err(internal)?;
    }
    for row in rows {
        let line: Vec<&str> = row.iter().map(|t| t.lexical()).collect();
        writeln!(out, "{}", line.join("\t")).map_err(internal)?;
    }
    eprintln!(
        "{} rows, {} self-joins, {} same-table probes",
        stats.rows_out, stats.plan_self_joins, stats.runtime_same_table_probes
    );
    Ok(())
}

fn cmd_explain(store_dir: &Path, query: &Path, mode: Option<Mode>) -> CmdResult {
    let store = open_store(store_dir)?;
    let q = read_query(query)?;
    let p = plan(&q, store.as_store(), mode_for(&store, mode)).map_err(internal)?;
    print!("{}", explain(&p));
    Ok(())
}

fn cmd_stats(store_dir: &Path) -> CmdResult {
    let m = read_manifest(store_dir)
        .with_context(|| format!("cannot read store {}", store_dir.display()))
        .user()?;
    print!("{}", m.render());
    Ok(())
}

fn cmd_gen(config: GenConfig, output: &Path) -> CmdResult {
    config.validate().map_err(anyhow::Error::msg).user()?;
    let n = benchkit::write_dataset(&config, output)
        .with_context(|| format!("cannot write {}", output.display()))
        .map_err(internal)?;
    eprintln!("wrote {n} triples to {}", output.display());
    Ok(())
}

fn parse_engines(names: &[String]) -> anyhow::Result<Vec<EngineMode>> {
    let mut out = Vec::new();
    for n in names {
        let Some(m) = EngineMode::parse(n.trim()) else {
            bail!("unknown engine mode {n:?} (expected single, vp, rmtt-sound, rmtt-pruned)");
        };
        if !out.contains(&m) {
            out.push(m);
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(data: &Path, queries: &Path, engines: &[String], reps: usize, output: &Path, seed: Option<u64>, concurrent: bool) -> CmdResult {
    let engines = parse_engines(engines).user()?;
    if reps == 0 {
        return Err(Failure::User(anyhow::anyhow!("--reps must be positive")));
    }
    let opts = SuiteOptions {
        repetitions: reps,
        concurrent_queries: concurrent,
        ..SuiteOptions::default()
    };
    let mut report = benchkit::run_suite(data, queries, &engines, opts).user()?;
    report.meta.seed = seed;
    benchkit::emit_report(&report, ReportFormat::for_path(output), output)
        .with_context(|| format!("cannot write {}", output.display()))
        .map_err(internal)?;
    for f in &report.failures {
        eprintln!("failed: {} {:?}: {}", f.query_id, f.engine.map(|e| e.name()), f.message);
    }
    eprintln!("{} rows written to {}", report.rows.len(), output.display());
    Ok(())
}

fn dispatch(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Ingest {
            input,
            engine,
            output,
            lenient,
        } => cmd_ingest(&input, engine, &output, lenient),
        Command::Query {
            store,
            query,
            mode,
            explain,
            distinct,
        } => cmd_query(&store, &query, mode, explain, distinct),
        Command::Explain { store, query, mode } => cmd_explain(&store, &query, mode),
        Command::Stats { store } => cmd_stats(&store),
        Command::Gen {
            seed,
            scale,
            departments,
            students,
            professors,
            courses,
            output,
        } => cmd_gen(
            GenConfig {
                seed,
                universities: scale,
                departments_per_university: departments,
                students_per_department: students,
                professors_per_department: professors,
                courses_per_department: courses,
            },
            &output,
        ),
        Command::Bench {
            data,
            queries,
            engines,
            reps,
            output,
            seed,
            concurrent,
        } => cmd_bench(&data, &queries, &engines, reps, &output, seed, concurrent),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| dispatch(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failure::User(e))) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Ok(Err(Failure::Internal(e))) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(2)
        }
        Err(_) => ExitCode::from(2),
    }
}
