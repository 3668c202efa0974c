use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gridcat::construction::{build_from_params, grid_cat_params, theorem2_bound};
use gridcat::extension::{check_theorem1_bounds, extend, ExtensionMode};
use gridcat::ffield::{SubsetPolicy, DEFAULT_MIN_P};
use gridcat::oracle::{
    load_schemes, parse_schemes, search_min_table, sweep, write_csv, ParamRange, SearchBudget,
    SweepRanges,
};
use gridcat::sim::{end_to_end, Scheme, SimConfig};
use gridcat::table::{load_table_file, save_table, validate, Status, ValidationReport};
use gridcat::{DegreeTable, Error, TableParams};
use serde_json::json;

mod svg;

/// Writes to stdout; a closed pipe ends the process quietly.
fn emit_str(s: &str) {
    let mut out = io::stdout().lock();
    if let Err(e) = out.write_all(s.as_bytes()).and_then(|_| out.flush()) {
        if e.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: {e}");
        std::process::exit(2);
    }
}

macro_rules! emit {
    ($($arg:tt)*) => {
        emit_str(&format!("{}\n", format_args!($($arg)*)))
    };
}

#[derive(Parser)]
#[command(name = "gridcat", version, about = "Degree tables for grid-partitioned private matrix multiplication")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a table file against every property.
    Validate {
        table: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Build a table from a construction.
    Construct {
        #[arg(long, value_enum, default_value_t = SchemeName::GridCat)]
        scheme: SchemeName,
        #[command(flatten)]
        params: Params,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lift an outer-product table to the grid partition.
    Extend {
        #[arg(long, value_parser = parse_mode)]
        mode: ExtensionMode,
        #[arg(long = "grid-m")]
        grid_m: usize,
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the encode/compute/decode pipeline on seeded random matrices.
    Simulate {
        #[arg(long, conflicts_with = "scheme")]
        table: Option<PathBuf>,
        #[arg(long, value_enum, requires = "k")]
        scheme: Option<SchemeName>,
        #[arg(long = "K")]
        k: Option<usize>,
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long = "L")]
        l: Option<usize>,
        #[arg(long = "T")]
        t: Option<usize>,
        #[arg(long, default_value_t = 2)]
        block_size: usize,
        #[arg(long, env = "GRIDCAT_SEED", default_value_t = 0)]
        seed: u64,
        /// Lower bound on the field prime.
        #[arg(long, default_value_t = DEFAULT_MIN_P)]
        min_field: u64,
        /// Audit every T-subset of workers, however many there are.
        #[arg(long)]
        exhaustive_audit: bool,
    },
    /// Evaluate schemes over a parameter grid and emit CSV.
    Sweep {
        #[arg(long = "K")]
        k: ParamRange,
        #[arg(long = "M")]
        m: ParamRange,
        #[arg(long = "L")]
        l: ParamRange,
        #[arg(long = "T")]
        t: ParamRange,
        /// Comma-separated: construction1, ext-<mode>:<path>, table:<path>, or none.
        #[arg(long, default_value = "construction1")]
        schemes: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Best-scheme map over (M, K = L) at the smallest T.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Exhaustive search for a minimum-N table at toy sizes.
    Search {
        #[command(flatten)]
        params: Params,
        #[arg(long, default_value_t = 6)]
        max_exponent: u64,
        /// Comma-separated cyclic moduli; plain tables when absent.
        #[arg(long, value_delimiter = ',')]
        q: Option<Vec<u64>>,
        #[arg(long, default_value_t = 1_000_000)]
        node_limit: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Params {
    #[arg(long = "K")]
    k: usize,
    #[arg(long = "M")]
    m: usize,
    #[arg(long = "L")]
    l: usize,
    #[arg(long = "T")]
    t: usize,
}

impl Params {
    fn table_params(&self) -> TableParams {
        TableParams::new(self.k, self.m, self.l, self.t)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeName {
    GridCat,
}

fn parse_mode(s: &str) -> Result<ExtensionMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Exit status 1: a table or decode check failed. Status 2: bad input.
enum Failure {
    Check(String),
    Input(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidTable(report) => Failure::Check(format!(
                "table failed validation\n{}",
                render_report(&report)
            )),
            e => Failure::Input(e),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { table, json } => cmd_validate(&table, json),
        Command::Construct { scheme, params, out } => cmd_construct(scheme, &params, out.as_deref()),
        Command::Extend {
            mode,
            grid_m,
            input,
            out,
        } => cmd_extend(mode, grid_m, &input, out.as_deref()),
        Command::Simulate {
            table,
            scheme,
            k,
            m,
            l,
            t,
            block_size,
            seed,
            min_field,
            exhaustive_audit,
        } => {
            let source = match (table, scheme) {
                (Some(path), _) => Ok(Source::File(path)),
                (None, Some(SchemeName::GridCat)) => match (k, m, l, t) {
                    (Some(k), Some(m), Some(l), Some(t)) => Ok(Source::Construction(TableParams::new(k, m, l, t))),
                    _ => Err(Failure::Input(Error::Precondition(
                        "--scheme grid-cat needs --K, --M, --L and --T".into(),
                    ))),
                },
                (None, None) => Err(Failure::Input(Error::Precondition(
                    "pass --table or --scheme".into(),
                ))),
            };
            let policy = if exhaustive_audit {
                SubsetPolicy::Exhaustive
            } else {
                SubsetPolicy::default()
            };
            let config = SimConfig {
                block_size,
                seed,
                min_p: min_field,
                policy,
            };
            source.and_then(|s| cmd_simulate(s, &config))
        }
        Command::Sweep {
            k,
            m,
            l,
            t,
            schemes,
            out,
            svg,
        } => cmd_sweep(SweepRanges { k, m, l, t }, &schemes, out.as_deref(), svg.as_deref()),
        Command::Search {
            params,
            max_exponent,
            q,
            node_limit,
            out,
        } => cmd_search(
            &params,
            &SearchBudget {
                max_exponent,
                q_candidates: q,
                node_limit,
            },
            out.as_deref(),
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn status_line(s: &Status) -> String {
    match s {
        Status::Pass => "pass".into(),
        Status::Fail { witness } => format!(
            "FAIL  value {}: {} / {}",
            witness.value, witness.first, witness.second
        ),
        Status::Inconclusive { reason } => format!("inconclusive  {reason}"),
    }
}

fn render_report(r: &ValidationReport) -> String {
    let mut out = format!("N = {}\n", r.n);
    for (name, status) in r.statuses() {
        out += &format!("{name:<5} {}\n", status_line(status));
    }
    out += if r.is_valid() { "valid" } else { "INVALID" };
    out
}

fn write_table(table: &DegreeTable, out: Option<&Path>) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, save_table(table)),
        None => {
            emit_str(&save_table(table));
            Ok(())
        }
    }
}

fn cmd_validate(path: &Path, as_json: bool) -> Outcome {
    let table = load_table_file(path)?;
    let report = validate(&table);
    if as_json {
        let doc = json!({ "schema": 1, "valid": report.is_valid(), "report": report });
        emit!("{}", serde_json::to_string_pretty(&doc).expect("report serializes"));
    } else {
        emit!("{}", render_report(&report));
    }
    if report.is_valid() {
        Ok(())
    } else {
        Err(Failure::Check("table is not valid".into()))
    }
}

fn cmd_construct(scheme: SchemeName, params: &Params, out: Option<&Path>) -> Outcome {
    let SchemeName::GridCat = scheme;
    let p = grid_cat_params(params.k, params.m, params.l, params.t)?;
    let table = build_from_params(&p)?;
    let report = validate(&table);
    emit!(
        "x={} z={} y={} q={} N={} bound={}",
        p.x,
        p.z,
        p.y,
        p.q,
        report.n,
        theorem2_bound(&p)
    );
    write_table(&table, out)?;
    if report.is_valid() {
        Ok(())
    } else {
        Err(Failure::Check(render_report(&report)))
    }
}

fn cmd_extend(mode: ExtensionMode, grid_m: usize, input: &Path, out: Option<&Path>) -> Outcome {
    let source = load_table_file(input)?;
    let ext = extend(&source, mode, grid_m)?;
    let rep = check_theorem1_bounds(&source, &ext, mode);
    let valid = validate(&ext).is_valid();
    emit!(
        "mode={} M={} N'={} N={} lower={} upper={} zeta={} within_bounds={} valid={}",
        rep.mode, rep.m, rep.n_prime, rep.n, rep.lower_bound, rep.upper_bound, rep.zeta, rep.within_bounds, valid
    );
    write_table(&ext, out)?;
    if valid && rep.within_bounds {
        Ok(())
    } else {
        Err(Failure::Check("extended table failed its checks".into()))
    }
}

enum Source {
    File(PathBuf),
    Construction(TableParams),
}

fn cmd_simulate(source: Source, config: &SimConfig) -> Outcome {
    let scheme = match source {
        Source::File(path) => Scheme::Table(load_table_file(path)?),
        Source::Construction(p) => Scheme::Construction1(p),
    };
    let report = end_to_end(&scheme, config)?;
    emit!("{}", report.to_json());
    if report.success() {
        Ok(())
    } else {
        Err(Failure::Check("decode or privacy audit failed".into()))
    }
}

fn cmd_sweep(ranges: SweepRanges, schemes: &str, out: Option<&Path>, svg_out: Option<&Path>) -> Outcome {
    let schemes = load_schemes(&parse_schemes(schemes)?)?;
    let rows = sweep(&ranges, &schemes);
    match out {
        Some(path) => write_csv(&rows, fs::File::create(path)?)?,
        None => {
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            emit_str(&String::from_utf8_lossy(&buf));
        }
    }
    if let Some(path) = svg_out {
        fs::write(path, svg::best_scheme_map(&rows, ranges.t.lo))?;
    }
    if rows.iter().any(|r| r.valid && r.bound.zip(r.n).is_some_and(|(b, n)| n as u64 > b)) {
        return Err(Failure::Check("a valid row exceeds its worker bound".into()));
    }
    Ok(())
}

fn cmd_search(params: &Params, budget: &SearchBudget, out: Option<&Path>) -> Outcome {
    let outcome = search_min_table(params.table_params(), budget)?;
    match (&outcome.best, outcome.n) {
        (Some(table), Some(n)) => {
            emit!("N={n} complete={} nodes={}", outcome.complete, outcome.nodes);
            write_table(table, out)?;
        }
        _ => emit!("no valid table found; complete={} nodes={}", outcome.complete, outcome.nodes),
    }
    Ok(())
}
