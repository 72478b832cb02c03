//! Command line front end: reads a polynomial system from a small text
//! format, solves it through the library pipeline, and emits roots as JSON
//! or CSV. Extra subcommands expose the theoretical root count, a benchmark
//! runner, and a dump of the underlying resultant matrix.
//!
//! Exit codes: 0 on success, 2 for malformed input or flags, 3 when the
//! rank profile rules out the expected root count, 4 when the basis
//! selection fails, 5 when a size cap is hit, and 1 for any other error.

mod bench;
mod input;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polysolve::macaulay::{
    dense_macaulay, homogeneous_macaulay, multihom_macaulay, toric_macaulay, MacaulayMatrix,
    DEFAULT_MAX_ENTRIES,
};
use polysolve::polytope::bkk_bound;
use polysolve::quotient::{
    toric_shift, QuotientConfig, COND_WARN, DEFAULT_GAP_MIN, DEFAULT_SEED, DEFAULT_TOL_NULL,
};
use polysolve::roots::DEFAULT_TOL_COMMUTE;
use polysolve::solve::{homogenized, multihomogenized, solve, SolveConfig};
use polysolve::{Error, Mode, PolynomialSystem};

use crate::input::{parse_input, ParseError, ParsedInput};

#[derive(Parser)]
#[command(
    name = "polysolve",
    version,
    about = "Isolated roots of square polynomial systems via resultant matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a system and print its isolated roots
    Solve(SolveArgs),
    /// Print the mixed-volume root count of a system's Newton polytopes
    Bkk {
        /// Input system file
        file: PathBuf,
    },
    /// Solve a random dense system and print one CSV row of metrics
    Bench(BenchArgs),
    /// Write a system's resultant matrix as CSV
    DumpMatrix(DumpArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Input system file
    file: PathBuf,
    /// Solving mode (affine, toric, projective, multihom); overrides the
    /// file's mode line
    #[arg(long)]
    mode: Option<String>,
    /// Affine variables per projective block for multihom mode, e.g. 1,1;
    /// overrides the file's blocks line
    #[arg(long)]
    blocks: Option<String>,
    /// Seed for every random choice in the pipeline
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Smallest acceptable singular-value gap at the null-space cut
    #[arg(long, default_value_t = DEFAULT_GAP_MIN)]
    gap_min: f64,
    /// Warn when the null space annihilates the matrix worse than this
    #[arg(long, default_value_t = DEFAULT_TOL_NULL)]
    tol_null: f64,
    /// Largest acceptable relative commutator of the multiplication maps
    #[arg(long, default_value_t = DEFAULT_TOL_COMMUTE)]
    tol_commute: f64,
    /// Eigenvalue clustering width for multiple roots; scaled from the data
    /// when omitted
    #[arg(long)]
    tol_cluster: Option<f64>,
    /// Warn when the basis-change condition number exceeds this
    #[arg(long, default_value_t = COND_WARN)]
    cond_warn: f64,
    /// Abort instead of building a matrix with more entries than this
    #[arg(long, default_value_t = DEFAULT_MAX_ENTRIES)]
    max_entries: usize,
    /// Skip the random change of coordinates in multihom mode
    #[arg(long)]
    no_precondition: bool,
    /// Root output format
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    output: OutputFormat,
    /// Include the residual column in CSV output
    #[arg(long)]
    emit_residuals: bool,
    /// Print stage timings to stderr in CSV mode
    #[arg(long)]
    emit_timings: bool,
    /// Also write the system's resultant matrix as CSV to this path
    #[arg(long, value_name = "PATH")]
    dump_matrix: Option<PathBuf>,
    /// Write the roots here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Number of variables
    #[arg(long)]
    n: usize,
    /// Total degree of every generated polynomial
    #[arg(long)]
    d: i32,
    /// Seed for the coefficients and the solve
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Abort instead of building a matrix with more entries than this
    #[arg(long, default_value_t = DEFAULT_MAX_ENTRIES)]
    max_entries: usize,
    /// Also write the generated system as an input file for later runs
    #[arg(long, value_name = "PATH")]
    emit_system: Option<PathBuf>,
}

#[derive(Args)]
struct DumpArgs {
    /// Input system file
    file: PathBuf,
    /// Output CSV path
    out: PathBuf,
    /// Matrix construction (affine, toric, projective, multihom); overrides
    /// the file's mode line
    #[arg(long)]
    mode: Option<String>,
    /// Affine variables per projective block for multihom mode
    #[arg(long)]
    blocks: Option<String>,
    /// Seed for the toric support shift
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Abort instead of building a matrix with more entries than this
    #[arg(long, default_value_t = DEFAULT_MAX_ENTRIES)]
    max_entries: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

/// Everything that can stop a command, paired with its exit code.
#[derive(Debug)]
enum Failure {
    Parse(ParseError),
    Usage(String),
    Io(String),
    Solver(Error),
}

impl Failure {
    fn message(&self) -> String {
        match self {
            Failure::Parse(e) => e.to_string(),
            Failure::Usage(m) | Failure::Io(m) => m.clone(),
            Failure::Solver(e) => e.to_string(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Parse(_) | Failure::Usage(_) => 2,
            Failure::Io(_) => 1,
            Failure::Solver(e) => solver_exit_code(e),
        }
    }
}

fn solver_exit_code(e: &Error) -> u8 {
    match e {
        Error::GenericityViolation { .. } => 3,
        Error::SurjectivityFailure { .. } | Error::RegularityFailure { .. } => 4,
        Error::ResourceLimit { .. } => 5,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Bkk { file } => cmd_bkk(&file),
        Command::Bench(args) => cmd_bench(args),
        Command::DumpMatrix(args) => cmd_dump(args),
    }
}

fn load_input(path: &Path) -> Result<ParsedInput, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_input(&text).map_err(Failure::Parse)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_mode_flag(s: &str) -> Result<Mode, Failure> {
    s.parse::<Mode>().map_err(|_| {
        Failure::Usage(format!(
            "unknown mode '{s}' (expected affine, toric, projective, or multihom)"
        ))
    })
}

fn parse_blocks_flag(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .map(|part| {
            let part = part.trim();
            match part.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(Failure::Usage(format!(
                    "invalid block size '{part}' (expected positive integers like 1,1)"
                ))),
            }
        })
        .collect()
}

/// Merges the file's mode and blocks lines with the command line overrides
/// and checks their consistency: multihom mode needs blocks summing to the
/// variable count, every other mode forbids a blocks declaration.
fn resolve_mode(
    parsed: &ParsedInput,
    mode_flag: Option<&str>,
    blocks_flag: Option<&str>,
) -> Result<(Mode, Option<Vec<usize>>), Failure> {
    let mode = match mode_flag {
        Some(s) => parse_mode_flag(s)?,
        None => parsed.mode.unwrap_or(Mode::Affine),
    };
    let blocks = match blocks_flag {
        Some(s) => Some(parse_blocks_flag(s)?),
        None => parsed.blocks.clone(),
    };
    match (mode, blocks) {
        (Mode::Multihom, Some(blocks)) => {
            let total: usize = blocks.iter().sum();
            if total != parsed.system.nvars {
                return Err(Failure::Usage(format!(
                    "block sizes must sum to the variable count {} (got {total})",
                    parsed.system.nvars
                )));
            }
            Ok((mode, Some(blocks)))
        }
        (Mode::Multihom, None) => Err(Failure::Usage(
            "multihom mode needs the affine block sizes (--blocks or a blocks line)".into(),
        )),
        (_, Some(_)) => Err(Failure::Usage(format!(
            "blocks only apply to multihom mode, not {mode}"
        ))),
        (_, None) => Ok((mode, None)),
    }
}

/// Builds the resultant matrix the given mode starts from, plus the sizes of
/// the projective coordinate blocks when the construction homogenizes.
fn build_matrix(
    system: &PolynomialSystem,
    mode: Mode,
    blocks: Option<&[usize]>,
    seed: u64,
    max_entries: usize,
) -> Result<(MacaulayMatrix, Option<Vec<usize>>), Failure> {
    let solver = Failure::Solver;
    match mode {
        Mode::Affine => Ok((dense_macaulay(system, max_entries).map_err(solver)?, None)),
        Mode::Toric => {
            let shift = toric_shift(system.nvars, seed);
            Ok((toric_macaulay(system, &shift, max_entries).map_err(solver)?, None))
        }
        Mode::Projective => {
            let hom = homogenized(system).map_err(solver)?;
            let mac = homogeneous_macaulay(&hom, max_entries).map_err(solver)?;
            Ok((mac, Some(vec![system.nvars + 1])))
        }
        Mode::Multihom => {
            let blocks = blocks.expect("multihom mode resolves blocks before building");
            let (multi, sizes) = multihomogenized(system, blocks).map_err(solver)?;
            let mac = multihom_macaulay(&multi, &sizes, max_entries).map_err(solver)?;
            Ok((mac, Some(sizes)))
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let parsed = load_input(&args.file)?;
    let (mode, blocks) = resolve_mode(&parsed, args.mode.as_deref(), args.blocks.as_deref())?;

    if let Some(path) = &args.dump_matrix {
        let (mac, hom_sizes) =
            build_matrix(&parsed.system, mode, blocks.as_deref(), args.seed, args.max_entries)?;
        let labels = output::coordinate_labels(&parsed.vars, hom_sizes.as_deref());
        write_out(Some(path), &output::matrix_csv(&mac, &labels))?;
    }

    let cfg = SolveConfig {
        mode,
        blocks,
        quotient: QuotientConfig {
            seed: args.seed,
            gap_min: args.gap_min,
            tol_null: args.tol_null,
            cond_warn: args.cond_warn,
            max_entries: args.max_entries,
            precondition: !args.no_precondition,
            ..QuotientConfig::default()
        },
        tol_commute: args.tol_commute,
        tol_cluster: args.tol_cluster,
    };
    let report = solve(&parsed.system, &cfg).map_err(Failure::Solver)?;
    for warning in &report.roots.warnings {
        eprintln!("warning: {warning}");
    }

    let text = match args.output {
        OutputFormat::Json => output::solve_json(&report),
        OutputFormat::Csv => {
            let labels =
                output::coordinate_labels(&parsed.vars, report.roots.block_sizes.as_deref());
            output::solve_csv(&report, &labels, args.emit_residuals)
        }
    };
    write_out(args.out.as_deref(), &text)?;

    if args.emit_timings && matches!(args.output, OutputFormat::Csv) {
        let t = &report.roots.timings;
        eprintln!(
            "t_M={} t_N={} t_B={} t_S={} t_alg={}",
            output::fmt_sig(t.t_matrix),
            output::fmt_sig(t.t_null),
            output::fmt_sig(t.t_basis),
            output::fmt_sig(t.t_schur),
            output::fmt_sig(report.t_total),
        );
    }
    Ok(())
}

fn cmd_bkk(file: &Path) -> Result<(), Failure> {
    let parsed = load_input(file)?;
    let count = bkk_bound(&parsed.system).map_err(Failure::Solver)?;
    println!("{count}");
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    if args.n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    if args.d < 1 {
        return Err(Failure::Usage("--d must be at least 1".into()));
    }
    if let Some(path) = &args.emit_system {
        let system = bench::dense_system(args.n, args.d, args.seed);
        let parsed = ParsedInput {
            vars: (1..=args.n).map(|k| format!("x{k}")).collect(),
            system,
            mode: None,
            blocks: None,
        };
        write_out(Some(path), &input::print_input(&parsed))?;
    }
    let row =
        bench::bench_row(args.n, args.d, args.seed, args.max_entries).map_err(Failure::Solver)?;
    println!("{}", bench::BENCH_HEADER);
    println!("{row}");
    Ok(())
}

fn cmd_dump(args: DumpArgs) -> Result<(), Failure> {
    let parsed = load_input(&args.file)?;
    let (mode, blocks) = resolve_mode(&parsed, args.mode.as_deref(), args.blocks.as_deref())?;
    let (mac, hom_sizes) =
        build_matrix(&parsed.system, mode, blocks.as_deref(), args.seed, args.max_entries)?;
    let labels = output::coordinate_labels(&parsed.vars, hom_sizes.as_deref());
    write_out(Some(&args.out), &output::matrix_csv(&mac, &labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_classify_the_solver_errors() {
        assert_eq!(
            solver_exit_code(&Error::GenericityViolation {
                gap: 1.0,
                required: 1e3,
                expected_corank: 4,
                rows: 10,
            }),
            3
        );
        assert_eq!(solver_exit_code(&Error::SurjectivityFailure { rank: 3, delta: 4 }), 4);
        assert_eq!(
            solver_exit_code(&Error::RegularityFailure { delta: 4, attempts: 3, gap: 1e-12 }),
            4
        );
        assert_eq!(
            solver_exit_code(&Error::ResourceLimit { rows: 10, cols: 10, cap: 5 }),
            5
        );
        assert_eq!(solver_exit_code(&Error::InvalidInput("x".into())), 1);
        assert_eq!(solver_exit_code(&Error::Lapack { routine: "zgees", info: 1 }), 1);

        assert_eq!(Failure::Usage("bad".into()).exit_code(), 2);
        assert_eq!(
            Failure::Parse(ParseError { line: 1, col: 1, message: "x".into() }).exit_code(),
            2
        );
        assert_eq!(Failure::Io("gone".into()).exit_code(), 1);
    }

    #[test]
    fn blocks_flag_parses_positive_lists_only() {
        assert_eq!(parse_blocks_flag("1,1").unwrap(), vec![1, 1]);
        assert_eq!(parse_blocks_flag("2, 3").unwrap(), vec![2, 3]);
        assert!(parse_blocks_flag("0,1").is_err());
        assert!(parse_blocks_flag("x").is_err());
        assert!(parse_blocks_flag("").is_err());
    }

    #[test]
    fn mode_resolution_merges_file_lines_and_flags() {
        let plain = parse_input("vars: x y\nf: x*y - 1\nf: x - y\n").unwrap();
        let declared =
            parse_input("vars: x y\nmode: multihom\nblocks: 1,1\nf: x*y - 1\nf: x - y\n").unwrap();

        let (mode, blocks) = resolve_mode(&plain, None, None).unwrap();
        assert_eq!(mode, Mode::Affine);
        assert!(blocks.is_none());

        let (mode, _) = resolve_mode(&plain, Some("toric"), None).unwrap();
        assert_eq!(mode, Mode::Toric);

        let (mode, blocks) = resolve_mode(&declared, None, None).unwrap();
        assert_eq!(mode, Mode::Multihom);
        assert_eq!(blocks, Some(vec![1, 1]));

        // The flag replaces the file's block sizes.
        let (_, blocks) = resolve_mode(&declared, None, Some("2")).unwrap();
        assert_eq!(blocks, Some(vec![2]));

        // Inconsistent requests are rejected with usage errors.
        assert!(matches!(
            resolve_mode(&plain, Some("multihom"), None),
            Err(Failure::Usage(_))
        ));
        assert!(matches!(
            resolve_mode(&plain, None, Some("1,1")),
            Err(Failure::Usage(_))
        ));
        assert!(matches!(
            resolve_mode(&plain, Some("multihom"), Some("1,2")),
            Err(Failure::Usage(_))
        ));
        assert!(matches!(
            resolve_mode(&plain, Some("elliptic"), None),
            Err(Failure::Usage(_))
        ));
    }

    #[test]
    fn dump_builds_every_mode_from_the_same_affine_input() {
        let parsed = parse_input("vars: x y\nf: x*y - 1\nf: x - y\n").unwrap();
        let (mac, sizes) =
            build_matrix(&parsed.system, Mode::Affine, None, DEFAULT_SEED, DEFAULT_MAX_ENTRIES)
                .unwrap();
        assert_eq!(mac.mode, Mode::Affine);
        assert!(sizes.is_none());

        let (mac, sizes) =
            build_matrix(&parsed.system, Mode::Toric, None, DEFAULT_SEED, DEFAULT_MAX_ENTRIES)
                .unwrap();
        assert_eq!(mac.mode, Mode::Toric);
        assert_eq!(mac.shift, Some(toric_shift(2, DEFAULT_SEED)));
        assert!(sizes.is_none());

        let (mac, sizes) = build_matrix(
            &parsed.system,
            Mode::Projective,
            None,
            DEFAULT_SEED,
            DEFAULT_MAX_ENTRIES,
        )
        .unwrap();
        assert_eq!(mac.mode, Mode::Projective);
        assert_eq!(sizes, Some(vec![3]));

        let (mac, sizes) = build_matrix(
            &parsed.system,
            Mode::Multihom,
            Some(&[1, 1]),
            DEFAULT_SEED,
            DEFAULT_MAX_ENTRIES,
        )
        .unwrap();
        assert_eq!(mac.mode, Mode::Multihom);
        assert_eq!(sizes, Some(vec![2, 2]));
    }
}
