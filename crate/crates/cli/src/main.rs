use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sensograph::{
    analyze_traced, gabriel_graph, parse_table, render_tablecloth, table_to_tablecloths, Dialect, SessionStore,
    Sheet,
};
use sensograph_cli::config::Config;
use sensograph_cli::service::{self, AppState};
use sensograph_cli::{bench, exit_code};

/// Consensus graphics from projective-mapping tablecloths.
///
/// Input is a CSV coordinate table: header `sample,<a1>_x,<a1>_y,...`, one row
/// per sample, lengths in cm measured from the bottom-left corner of the
/// sheet. An optional first line `# sheet: 60x40 cm` gives the sheet size.
#[derive(Parser)]
#[command(name = "sensograph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gabriel graphs, similarity matrix and consensus layout of a table.
    Analyze(AnalyzeArgs),
    /// Gabriel graph of single tablecloths, as SVG and an edge list.
    Gabriel(GabrielArgs),
    /// Time the pipeline phases against the number of assessors.
    Bench(BenchArgs),
    /// Run the HTTP session service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Coordinate table (CSV).
    input: PathBuf,
    /// Sheet size in cm as WxH. Overrides the table's `# sheet:` line;
    /// defaults to 60x40.
    #[arg(long, value_parser = parse_sheet)]
    sheet: Option<Sheet>,
    /// Field delimiter.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Consensus SVG output.
    #[arg(long, default_value = "consensus.svg")]
    out: PathBuf,
    /// Similarity matrix (counts) CSV output.
    #[arg(long, default_value = "matrix.csv")]
    matrix: PathBuf,
    /// Percentage matrix CSV sidecar.
    #[arg(long)]
    percent: Option<PathBuf>,
    /// JSON report: positions, matrix, percentages, energy, convergence.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Layout iteration trace, one JSON object per line.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Seed for the layout's initial jitter. Without it the start is the
    /// unperturbed polygon.
    #[arg(long)]
    seed: Option<u64>,
    /// TOML file with [layout] and [render] overrides. Layout defaults:
    /// spring_constant 100, max_iterations 1000, epsilon 0.1,
    /// display_diameter = sheet diagonal.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct GabrielArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Only this assessor; default is every assessor in the table.
    #[arg(long)]
    assessor: Option<String>,
    /// Directory for the `<assessor>.svg` files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// TOML file with [render] overrides.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 10)]
    samples: usize,
    /// Comma-separated assessor counts.
    #[arg(long, value_delimiter = ',', default_value = "1,256,512")]
    assessors: Vec<usize>,
    /// Repeats per size; the median is reported.
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct ServeArgs {
    /// Listen address; port 0 picks a free port.
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: String,
    /// Session directory.
    #[arg(long, env = "SENSOGRAPH_STORE", default_value = "sessions")]
    store: PathBuf,
    /// TOML file with [layout] and [render] overrides for consensus output.
    #[arg(long)]
    params: Option<PathBuf>,
}

fn parse_sheet(s: &str) -> Result<Sheet, String> {
    let (w, h) = s
        .trim()
        .trim_end_matches("cm")
        .trim()
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got `{s}`"))?;
    let w: f64 = w.trim().parse().map_err(|e| format!("sheet width: {e}"))?;
    let h: f64 = h.trim().parse().map_err(|e| format!("sheet height: {e}"))?;
    Sheet::new(w, h).map_err(|e| e.to_string())
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    path.map_or_else(|| Ok(Config::default()), Config::load)
}

struct Loaded {
    names: Vec<String>,
    sheet: Sheet,
    cloths: Vec<sensograph::Tablecloth>,
}

fn load_input(args: &InputArgs) -> Result<Loaded> {
    let path = &args.input;
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let delimiter = u8::try_from(args.delimiter).context("delimiter must be a single-byte character")?;
    let table = parse_table(&bytes, Dialect { delimiter }).with_context(|| format!("in {}", path.display()))?;
    let sheet = args.sheet.or(table.sheet).unwrap_or_default();
    let (cloths, warnings) = table_to_tablecloths(&table, sheet);
    for w in warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(Loaded {
        names: table.sample_names,
        sheet,
        cloths,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let config = load_config(args.params.as_deref())?;
    let input = load_input(&args.input)?;
    let params = config.layout_params(&input.sheet, args.seed);
    let mut trace = match &args.trace {
        Some(p) => Some(BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => None,
    };
    let mut trace_err = None;
    let analysis = analyze_traced(&input.names, &input.cloths, &params, |r| {
        if let (Some(w), None) = (trace.as_mut(), trace_err.as_ref()) {
            let line = serde_json::to_string(&r).expect("trace record serializes");
            if let Err(e) = writeln!(w, "{line}") {
                trace_err = Some(e);
            }
        }
    })?;
    if let Some(e) = trace_err {
        return Err(e).context("writing trace");
    }
    if let Some(mut w) = trace {
        w.flush().context("writing trace")?;
    }
    if !analysis.layout.informative {
        log::warn!("no sample pair is ever connected; the layout carries no information");
    }
    if analysis.layout.disconnected {
        log::warn!("the similarity graph is disconnected; components are placed apart");
    }
    write_file(&args.out, &analysis.svg(&config.render)?)?;
    write_file(&args.matrix, &analysis.matrix_csv())?;
    if let Some(p) = &args.percent {
        write_file(p, &analysis.percentages_csv())?;
    }
    if let Some(p) = &args.json {
        write_file(p, &analysis.json())?;
    }
    print!("{}", analysis.summary());
    Ok(())
}

fn cmd_gabriel(args: GabrielArgs) -> Result<()> {
    let config = load_config(args.params.as_deref())?;
    let input = load_input(&args.input)?;
    let selected: Vec<_> = match &args.assessor {
        Some(id) => {
            let found: Vec<_> = input.cloths.iter().filter(|t| &t.assessor_id == id).collect();
            if found.is_empty() {
                return Err(sensograph::Error::Validation(format!("no assessor `{id}` in the table")).into());
            }
            found
        }
        None => input.cloths.iter().collect(),
    };
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let mut out = String::from("assessor\tsample_a\tsample_b\n");
    for t in selected {
        let g = gabriel_graph(t)?;
        for (i, j) in g.iter() {
            out.push_str(&format!("{}\t{}\t{}\n", t.assessor_id, input.names[i], input.names[j]));
        }
        let svg = render_tablecloth(t, &g, &input.names, &config.render)?;
        write_file(&args.out_dir.join(format!("{}.svg", t.assessor_id)), &svg)?;
    }
    print!("{out}");
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    if args.assessors.is_empty() {
        bail!(sensograph::Error::Validation("no assessor counts given".into()));
    }
    let report = bench::run(args.samples, &args.assessors, args.repeats, args.seed)?;
    print!("{}", report.table());
    Ok(())
}

fn cmd_serve(args: ServeArgs) -> Result<()> {
    let config = load_config(args.params.as_deref())?;
    let store = SessionStore::open(&args.store).with_context(|| format!("opening {}", args.store.display()))?;
    let state = Arc::new(AppState { store, config });
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    let store_dir = args.store.display().to_string();
    runtime
        .block_on(service::serve(&args.addr, state, |addr| {
            println!("listening on http://{addr} (store: {store_dir})");
            let _ = std::io::stdout().flush();
        }))
        .with_context(|| format!("serving on {}", args.addr))
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Gabriel(a) => cmd_gabriel(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Serve(a) => cmd_serve(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(exit_code(&e));
    }
}
