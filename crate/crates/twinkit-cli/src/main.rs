//! Batch command-line interface: split, fold, energy, and bench workflows
//! over CSV files.
//!
//! Machine output is JSON (or JSON lines) on stdout; diagnostics go to
//! stderr. Exit codes: 0 success, 2 usage error, 3 data error, 4 I/O error.
//! Output files are written to a temporary sibling and renamed on success,
//! so failures never leave partial files behind.

mod report;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use report::{BenchRecord, EnergyReportOut, FoldSummary, SplitReport};
use twinkit_core::{
    energy_plot_metric, energy_report, generate_mvn, multiplet_s1, multiplet_s2, multiplet_s3,
    random_subset, twin, ConstantColumnPolicy, Dataset, MultipletResult, MvnSpec, RawTable,
    StartPolicy, TwinError, TwinParams,
};

#[derive(Parser)]
#[command(
    name = "twinkit",
    version,
    about = "Partition tabular data into statistically similar subsets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a CSV into a training twin and a statistically similar testing twin
    Split(SplitArgs),
    /// Partition a CSV into k statistically similar folds
    Fold(FoldArgs),
    /// Score a subset of rows against the full dataset
    Energy(EnergyArgs),
    /// Seeded benchmark: twinning vs random splitting on synthetic data
    Bench(BenchArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV file with a header row
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated column names to use (default: every column)
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<String>>,
    /// Use raw values instead of standardizing each column first
    #[arg(long)]
    no_standardize: bool,
    /// What to do with a zero-variance column
    #[arg(long, value_enum, default_value_t = ConstantColumns::Reject)]
    constant_columns: ConstantColumns,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstantColumns {
    Reject,
    Zero,
}

#[derive(Args)]
struct StartArgs {
    /// Starting-point rule: farthest, random, or index=<row>
    #[arg(long, value_parser = parse_start)]
    start: Option<StartArg>,
    /// Seed for all randomized behavior; without it every run is
    /// deterministic and starts farthest from the centroid
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy)]
enum StartArg {
    Farthest,
    Random,
    Index(usize),
}

fn parse_start(raw: &str) -> Result<StartArg, String> {
    match raw {
        "farthest" => Ok(StartArg::Farthest),
        "random" => Ok(StartArg::Random),
        other => match other.strip_prefix("index=") {
            Some(n) => n
                .parse()
                .map(StartArg::Index)
                .map_err(|_| format!("invalid row index {n:?}")),
            None => Err(format!(
                "expected farthest, random, or index=<row>, got {other:?}"
            )),
        },
    }
}

#[derive(Args)]
struct SplitArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Inverse splitting ratio; the testing twin gets ceil(N / r) rows
    #[arg(long)]
    r: usize,
    #[command(flatten)]
    start: StartArgs,
    /// Training twin output path (default train.csv, or train.idx with
    /// --emit-indices)
    #[arg(long)]
    train_out: Option<PathBuf>,
    /// Testing twin output path (default test.csv, or test.idx with
    /// --emit-indices)
    #[arg(long)]
    test_out: Option<PathBuf>,
    /// Write zero-based row-index files instead of CSVs
    #[arg(long)]
    emit_indices: bool,
}

#[derive(Args)]
struct FoldArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Number of folds
    #[arg(long)]
    k: usize,
    /// Fold construction strategy
    #[arg(long, value_enum)]
    strategy: Strategy,
    #[command(flatten)]
    start: StartArgs,
    /// Output prefix for <prefix>_fold<i>.idx and <prefix>_summary.json
    #[arg(long, default_value = "folds")]
    prefix: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    S1,
    S2,
    S3,
}

#[derive(Args)]
struct EnergyArgs {
    #[command(flatten)]
    data: DataArgs,
    /// File with one zero-based row index per line (the subset to score)
    #[arg(long)]
    indices: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Rows per synthetic dataset
    #[arg(long)]
    n: usize,
    /// Columns per synthetic dataset
    #[arg(long)]
    d: usize,
    /// Inverse splitting ratio
    #[arg(long)]
    r: usize,
    /// Replications; each emits one twinning and one random record
    #[arg(long)]
    reps: usize,
    /// Master seed; per-replication seeds derive from it
    #[arg(long)]
    seed: u64,
}

enum CliError {
    Usage(String),
    Data(String),
    Core(TwinError),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "cannot write {}: {source}", path.display()),
        }
    }
}

impl From<TwinError> for CliError {
    fn from(e: TwinError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Core(e) => {
                if e.is_io() {
                    4
                } else {
                    match e {
                        TwinError::RatioTooSmall { .. } | TwinError::NotPowerOfTwo { .. } => 2,
                        _ => 3,
                    }
                }
            }
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("TWINKIT_THREADS") {
        if let Ok(threads) = threads.trim().parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Split(args) => cmd_split(args),
        Command::Fold(args) => cmd_fold(args),
        Command::Energy(args) => cmd_energy(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn resolve_start(args: &StartArgs) -> Result<StartPolicy, CliError> {
    match (args.start, args.seed) {
        (None, None) | (Some(StartArg::Farthest), None) => Ok(StartPolicy::FarthestFromCentroid),
        (None, Some(seed)) | (Some(StartArg::Random), Some(seed)) => Ok(StartPolicy::Random(seed)),
        (Some(StartArg::Index(row)), None) => Ok(StartPolicy::FixedIndex(row)),
        (Some(StartArg::Random), None) => Err(CliError::Usage(
            "--start random requires --seed".to_string(),
        )),
        (Some(StartArg::Farthest | StartArg::Index(_)), Some(_)) => Err(CliError::Usage(
            "--seed only applies to a random start".to_string(),
        )),
    }
}

fn load_dataset(args: &DataArgs) -> Result<(RawTable, Dataset), CliError> {
    let table = RawTable::load_csv(&args.input, args.columns.as_deref())?;
    let dataset = if args.no_standardize {
        Dataset::without_standardization(&table)
    } else {
        let policy = match args.constant_columns {
            ConstantColumns::Reject => ConstantColumnPolicy::Reject,
            ConstantColumns::Zero => ConstantColumnPolicy::Zero,
        };
        table.standardize(policy)?
    };
    Ok((table, dataset))
}

/// Collects output files as temporary siblings and renames them into place
/// only when every write succeeded, so a failing command leaves nothing
/// behind.
struct StagedWrites {
    pairs: Vec<(PathBuf, PathBuf)>,
    committed: bool,
}

impl StagedWrites {
    fn new() -> Self {
        Self {
            pairs: Vec::new(),
            committed: false,
        }
    }

    fn stage(
        &mut self,
        path: &Path,
        write: impl FnOnce(&Path) -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        let mut tmp_name = path
            .file_name()
            .map(|n| n.to_os_string())
            .unwrap_or_default();
        tmp_name.push(".tmp");
        let tmp = path.with_file_name(tmp_name);
        if let Err(e) = write(&tmp) {
            let _ = fs::remove_file(&tmp);
            return Err(e);
        }
        self.pairs.push((tmp, path.to_path_buf()));
        Ok(())
    }

    fn stage_index_file(&mut self, path: &Path, indices: &[usize]) -> Result<(), CliError> {
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        self.stage(path, |tmp| {
            let mut content = String::with_capacity(sorted.len() * 8);
            for i in &sorted {
                content.push_str(&i.to_string());
                content.push('\n');
            }
            fs::write(tmp, content).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })
        })
    }

    fn stage_csv_subset(
        &mut self,
        table: &RawTable,
        indices: &[usize],
        path: &Path,
    ) -> Result<(), CliError> {
        self.stage(path, |tmp| Ok(table.write_split_csv(indices, tmp)?))
    }

    fn commit(mut self) -> Result<(), CliError> {
        for (tmp, path) in std::mem::take(&mut self.pairs) {
            fs::rename(&tmp, &path).map_err(|source| CliError::Io { path, source })?;
        }
        self.committed = true;
        Ok(())
    }
}

impl Drop for StagedWrites {
    fn drop(&mut self) {
        if !self.committed {
            for (tmp, _) in &self.pairs {
                let _ = fs::remove_file(tmp);
            }
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string(value).expect("report serialization cannot fail")
    );
}

fn cmd_split(args: SplitArgs) -> Result<(), CliError> {
    if args.r < 2 {
        return Err(CliError::Usage("r must be \u{2265} 2".to_string()));
    }
    let start = resolve_start(&args.start)?;
    let (table, dataset) = load_dataset(&args.data)?;

    let begun = Instant::now();
    let result = twin(&dataset, &TwinParams { r: args.r, start })?;
    let wall_time_ms = begun.elapsed().as_secs_f64() * 1e3;
    let energy_metric = energy_plot_metric(&result.d1, &dataset)?;

    let default_ext = if args.emit_indices { "idx" } else { "csv" };
    let train_out = args
        .train_out
        .unwrap_or_else(|| PathBuf::from(format!("train.{default_ext}")));
    let test_out = args
        .test_out
        .unwrap_or_else(|| PathBuf::from(format!("test.{default_ext}")));
    let mut staged = StagedWrites::new();
    if args.emit_indices {
        staged.stage_index_file(&train_out, &result.d2)?;
        staged.stage_index_file(&test_out, &result.d1)?;
    } else {
        staged.stage_csv_subset(&table, &result.d2, &train_out)?;
        staged.stage_csv_subset(&table, &result.d1, &test_out)?;
    }
    staged.commit()?;

    print_json(&SplitReport {
        n_rows: dataset.n_rows(),
        d: dataset.n_cols(),
        r: args.r,
        n_test: result.d1.len(),
        energy_metric,
        wall_time_ms,
    });
    Ok(())
}

fn cmd_fold(args: FoldArgs) -> Result<(), CliError> {
    if args.k < 2 {
        return Err(CliError::Usage("k must be \u{2265} 2".to_string()));
    }
    if matches!(args.strategy, Strategy::S2) && !args.k.is_power_of_two() {
        return Err(CliError::Usage("k must be a power of 2 for S2".to_string()));
    }
    let start = resolve_start(&args.start)?;
    let (_, dataset) = load_dataset(&args.data)?;

    let MultipletResult {
        folds,
        strategy,
        per_fold_energy,
        max_energy,
    } = match args.strategy {
        Strategy::S1 => multiplet_s1(&dataset, args.k, start)?,
        Strategy::S2 => multiplet_s2(&dataset, args.k, start)?,
        Strategy::S3 => multiplet_s3(&dataset, args.k, start)?,
    };

    let mut staged = StagedWrites::new();
    for (i, fold) in folds.iter().enumerate() {
        let path = PathBuf::from(format!("{}_fold{}.idx", args.prefix, i + 1));
        staged.stage_index_file(&path, fold)?;
    }
    let summary = FoldSummary {
        strategy: strategy.name().to_string(),
        k: args.k,
        fold_sizes: folds.iter().map(Vec::len).collect(),
        per_fold_energy,
        max_energy,
    };
    let summary_path = PathBuf::from(format!("{}_summary.json", args.prefix));
    staged.stage(&summary_path, |tmp| {
        let json = serde_json::to_string(&summary).expect("summary serialization cannot fail");
        fs::write(tmp, json + "\n").map_err(|source| CliError::Io {
            path: summary_path.clone(),
            source,
        })
    })?;
    staged.commit()?;
    print_json(&summary);
    Ok(())
}

fn read_index_file(path: &Path) -> Result<Vec<usize>, CliError> {
    let content = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut indices = Vec::new();
    for (line_no, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parsed = line.parse::<usize>().map_err(|_| {
            CliError::Data(format!(
                "{}:{}: not a row index: {line:?}",
                path.display(),
                line_no + 1
            ))
        })?;
        indices.push(parsed);
    }
    Ok(indices)
}

fn cmd_energy(args: EnergyArgs) -> Result<(), CliError> {
    let (_, dataset) = load_dataset(&args.data)?;
    let subset = read_index_file(&args.indices)?;
    let report = energy_report(&subset, &dataset)?;
    let gamma = report.n as f64 / report.n_total as f64;
    let rhs = (1.0 - gamma) * (1.0 - gamma) * report.between;
    let prop1_relative_gap = (report.full - rhs).abs() / report.full.abs().max(1e-300);
    print_json(&EnergyReportOut {
        energy_full: report.full,
        energy_between: report.between,
        energy_plot_metric: report.plot_metric,
        prop1_relative_gap,
    });
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    if args.n < 2 || args.d < 1 {
        return Err(CliError::Usage(
            "bench needs --n \u{2265} 2 and --d \u{2265} 1".to_string(),
        ));
    }
    if args.r < 2 {
        return Err(CliError::Usage("r must be \u{2265} 2".to_string()));
    }
    if args.reps < 1 {
        return Err(CliError::Usage("reps must be \u{2265} 1".to_string()));
    }

    // Per-replication seeds: data, twinning start, and random split draw
    // from consecutive offsets of the master seed.
    let records: Result<Vec<(BenchRecord, BenchRecord)>, CliError> = (0..args.reps)
        .into_par_iter()
        .map(|rep| {
            let base = args.seed.wrapping_add(3 * rep as u64);
            let table = generate_mvn(&MvnSpec {
                n_rows: args.n,
                dim: args.d,
                seed: base,
            })?;
            let dataset = table.standardize(ConstantColumnPolicy::Reject)?;

            let begun = Instant::now();
            let result = twin(
                &dataset,
                &TwinParams {
                    r: args.r,
                    start: StartPolicy::Random(base.wrapping_add(1)),
                },
            )?;
            let twin_ms = begun.elapsed().as_secs_f64() * 1e3;
            let twin_energy = energy_plot_metric(&result.d1, &dataset)?;

            let begun = Instant::now();
            let random = random_subset(args.n, args.n.div_ceil(args.r), base.wrapping_add(2));
            let random_ms = begun.elapsed().as_secs_f64() * 1e3;
            let random_energy = energy_plot_metric(&random, &dataset)?;

            Ok((
                BenchRecord {
                    method: "twinning",
                    rep,
                    n_rows: args.n,
                    d: args.d,
                    r: args.r,
                    wall_time_ms: twin_ms,
                    energy_metric: twin_energy,
                },
                BenchRecord {
                    method: "random",
                    rep,
                    n_rows: args.n,
                    d: args.d,
                    r: args.r,
                    wall_time_ms: random_ms,
                    energy_metric: random_energy,
                },
            ))
        })
        .collect();
    for (twinning, random) in records? {
        print_json(&twinning);
        print_json(&random);
    }
    Ok(())
}
