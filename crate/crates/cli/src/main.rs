//! `incompat`: robustness SDPs, reference tables, dimension witness and the
//! sum-of-squares hierarchy from the command line.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use incompat::analytic::dimension_witness;
use incompat::conic::{self, export_sdpa, SolveStatus, DEFAULT_TOL};
use incompat::hierarchy::{build_hierarchy, solve_problem, symmetrize};
use incompat::measurements::{anticommuting_dichotomic, load_set, mub_set, pauli_qubit_bases, MeasurementSet};
use incompat::robustness::{check_measure_inequalities, solve_robustness, RobustnessError, RobustnessMeasure, RobustnessResult};
use incompat::tables::{self, TableId, TableOptions};

#[derive(Parser)]
#[command(name = "incompat", version, about = "Quantitative measurement incompatibility")]
struct Cli {
    /// Accepted for reproducibility scripts; nothing here is random.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Family {
    Pauli,
    Mub,
    Anticommuting,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    D,
    R,
    G,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum HierarchyMode {
    Outcomes,
    Dimension,
}

#[derive(Subcommand)]
enum Command {
    /// Exact robustness of an explicit measurement set.
    Robustness {
        #[arg(long, value_enum)]
        family: Family,
        /// Number of measurements (mub, anticommuting).
        #[arg(long)]
        k: Option<usize>,
        /// Dimension (mub).
        #[arg(long)]
        d: Option<usize>,
        /// Measurement file (file).
        #[arg(long)]
        path: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "all")]
        measure: MeasureArg,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Reproduce a reference table as CSV.
    Tables {
        /// Ia, Ib, II or summary.
        which: String,
        /// Compare against the embedded printed values.
        #[arg(long)]
        check: bool,
        /// Also compute the cells that take minutes.
        #[arg(long)]
        include_slow: bool,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Certified dimension from an observed steering robustness.
    Witness {
        #[arg(long)]
        sr: f64,
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Solve one level of the pinched sum-of-squares hierarchy.
    Hierarchy {
        #[arg(long)]
        k: usize,
        /// Outcome count or dimension.
        #[arg(long)]
        m: u32,
        #[arg(long)]
        level: usize,
        /// Reading of m; the numerics are the same.
        #[arg(long, value_enum, default_value = "outcomes")]
        mode: HierarchyMode,
        /// Write the (unsymmetrised) program in SDPA sparse format.
        #[arg(long)]
        export_sdpa: Option<PathBuf>,
        /// Solve the program without letter-permutation averaging.
        #[arg(long)]
        no_symmetrize: bool,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

fn input(msg: impl Into<String>) -> Failure {
    Failure { code: 1, message: msg.into() }
}

fn solver(msg: impl Into<String>) -> Failure {
    Failure { code: 2, message: msg.into() }
}

fn backend_id() -> String {
    conic::default_backend().map_or_else(|_| "none".into(), |b| b.name().to_string())
}

fn envelope(mut v: Value) -> Value {
    v["version"] = json!(incompat::VERSION);
    v["backend"] = json!(backend_id());
    v
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if (1e-10..=1e-2).contains(&tol) {
        Ok(())
    } else {
        Err(input(format!("--tol {tol} outside [1e-10, 1e-2]")))
    }
}

fn build_set(family: Family, k: Option<usize>, d: Option<usize>, path: Option<&PathBuf>) -> Result<MeasurementSet, Failure> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| input(format!("this family needs --{flag}")));
    let unused = |ok: bool, flag: &str| if ok { Ok(()) } else { Err(input(format!("--{flag} does not apply to this family"))) };
    match family {
        Family::Pauli => {
            unused(path.is_none(), "path")?;
            if k.is_some_and(|k| k != 3) || d.is_some_and(|d| d != 2) {
                return Err(input("the Pauli family is k = 3, d = 2"));
            }
            Ok(pauli_qubit_bases())
        }
        Family::Mub => {
            unused(path.is_none(), "path")?;
            mub_set(need(d, "d")?, need(k, "k")?).map_err(|e| input(e.to_string()))
        }
        Family::Anticommuting => {
            unused(path.is_none() && d.is_none(), "d or --path")?;
            anticommuting_dichotomic(need(k, "k")?).map_err(|e| input(e.to_string()))
        }
        Family::File => {
            unused(k.is_none() && d.is_none(), "k or --d")?;
            let p = path.ok_or_else(|| input("the file family needs --path"))?;
            load_set(p).map_err(|e| input(format!("{}: {e}", p.display())))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_robustness(
    family: Family,
    k: Option<usize>,
    d: Option<usize>,
    path: Option<PathBuf>,
    measure: MeasureArg,
    tol: f64,
    format: Format,
    output: Option<PathBuf>,
) -> Result<(), Failure> {
    check_tol(tol)?;
    let set = build_set(family, k, d, path.as_ref())?;
    let measures: Vec<RobustnessMeasure> = match measure {
        MeasureArg::D => vec![RobustnessMeasure::D],
        MeasureArg::R => vec![RobustnessMeasure::R],
        MeasureArg::G => vec![RobustnessMeasure::G],
        MeasureArg::All => vec![RobustnessMeasure::D, RobustnessMeasure::R, RobustnessMeasure::G],
    };
    let mut results: Vec<RobustnessResult> = Vec::new();
    for m in measures {
        match solve_robustness(&set, m, tol) {
            Ok(r) => results.push(r),
            Err(e @ RobustnessError::TooManyTuples { .. }) => return Err(input(e.to_string())),
            Err(e) => return Err(solver(format!("measure {m}: {e}"))),
        }
    }
    let inaccurate = results.iter().any(|r| r.report.status != SolveStatus::Optimal);
    let text = match format {
        Format::Json => {
            let mut v = json!({
                "dim": set.dim(),
                "k": set.len(),
                "outcomes": set.outcome_counts(),
                "results": results.iter().map(RobustnessResult::to_json).collect::<Vec<_>>(),
            });
            if let [rd, rr, rg] = results.as_slice() {
                let n_max = *set.outcome_counts().iter().max().unwrap();
                v["measure_inequalities_hold"] = json!(check_measure_inequalities(rd, rr, rg, set.dim(), n_max).ok());
            }
            format!("{}\n", serde_json::to_string_pretty(&envelope(v)).unwrap())
        }
        Format::Csv => {
            let mut s = String::from("measure,eta,status,residual,time_s\n");
            for r in &results {
                writeln!(s, "{},{},{},{:e},{:.3}", r.measure, r.eta, r.report.status, r.report.primal_residual, r.report.solve_time_s).unwrap();
            }
            s
        }
    };
    emit(&text, output.as_ref())?;
    if inaccurate {
        return Err(solver("solver did not reach the requested accuracy"));
    }
    Ok(())
}

fn run_tables(which: &str, check: bool, include_slow: bool, tol: f64, output: Option<PathBuf>) -> Result<(), Failure> {
    check_tol(tol)?;
    let id: TableId = which.parse().map_err(input)?;
    let opts = TableOptions { include_slow, tol, workers: 0 };
    let rows = tables::generate(id, &opts, &|r| {
        let status = match (&r.value, &r.error) {
            (Some(v), _) => format!("{v:.4}"),
            (None, Some(e)) => format!("failed: {e}"),
            (None, None) => "skipped (use --include-slow)".into(),
        };
        eprintln!("[{id}] k={} d={} {}: {status}", r.k, r.d, r.construction);
    });
    emit(&tables::to_csv(&rows), output.as_ref())?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if check {
        let c = tables::check(id, &rows);
        eprintln!(
            "check {id}: {} cells compared, {} skipped, {} failed, max |Δ| = {:.2e} (tolerance {:.0e})",
            c.compared,
            c.skipped,
            c.failed,
            c.max_deviation,
            id.tolerance()
        );
        for (k, d, cons, dev) in &c.outside {
            eprintln!("  outside tolerance: k={k} d={d} {cons}: |Δ| = {dev:.2e}");
        }
        if failed > 0 {
            return Err(solver(format!("{failed} cells failed")));
        }
        if !c.passed() {
            return Err(Failure { code: 3, message: format!("{} cells outside tolerance", c.outside.len()) });
        }
    } else if failed > 0 {
        return Err(solver(format!("{failed} cells failed")));
    }
    Ok(())
}

fn run_witness(sr: f64, k: u32, format: Format) -> Result<(), Failure> {
    let bound = dimension_witness(sr, k).map_err(|e| input(e.to_string()))?;
    // Tiny slack so a value equal to an integer up to rounding is not bumped.
    let min_dim = (bound - 1e-9).ceil().max(1.0) as u64;
    let text = match format {
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&envelope(json!({
                "sr": sr, "k": k, "dimension_bound": bound, "min_dimension": min_dim,
            })))
            .unwrap()
        ),
        Format::Csv => format!("sr,k,dimension_bound,min_dimension\n{sr},{k},{bound},{min_dim}\n"),
    };
    emit(&text, None)
}

#[allow(clippy::too_many_arguments)]
fn run_hierarchy(
    k: usize,
    m: u32,
    level: usize,
    mode: HierarchyMode,
    export: Option<PathBuf>,
    no_symmetrize: bool,
    tol: f64,
    format: Format,
) -> Result<(), Failure> {
    check_tol(tol)?;
    let hp = build_hierarchy(k, m, level).map_err(|e| input(e.to_string()))?;
    if let Some(path) = &export {
        export_sdpa(&hp.problem, path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    }
    let program = if no_symmetrize { hp.clone() } else { symmetrize(&hp) };
    let sol = solve_problem(&program, tol).map_err(|e| solver(e.to_string()))?;
    let mode_name = match mode {
        HierarchyMode::Outcomes => "outcomes",
        HierarchyMode::Dimension => "dimension",
    };
    let sr = 1.0 / sol.eta - 1.0;
    let text = match format {
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&envelope(json!({
                "k": k, "m": m, "level": level, "mode": mode_name,
                "eta": sol.eta, "steering_robustness": sr,
                "status": sol.report.status.to_string(),
                "residual": sol.report.primal_residual,
                "time_s": sol.report.solve_time_s,
                "basis_size": hp.basis.len(),
                "constraints": program.problem.constraint_count(),
                "gram_parameters": program.reduced_variable_count(),
            })))
            .unwrap()
        ),
        Format::Csv => format!(
            "k,m,level,eta,steering_robustness,status\n{k},{m},{level},{},{sr},{}\n",
            sol.eta, sol.report.status
        ),
    };
    emit(&text, None)?;
    if sol.report.status != SolveStatus::Optimal {
        return Err(solver("solver did not reach the requested accuracy"));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Robustness { family, k, d, path, measure, tol, format, output } => {
            run_robustness(family, k, d, path, measure, tol, format, output)
        }
        Command::Tables { which, check, include_slow, tol, output } => run_tables(&which, check, include_slow, tol, output),
        Command::Witness { sr, k, format } => run_witness(sr, k, format),
        Command::Hierarchy { k, m, level, mode, export_sdpa, no_symmetrize, tol, format } => {
            run_hierarchy(k, m, level, mode, export_sdpa, no_symmetrize, tol, format)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
