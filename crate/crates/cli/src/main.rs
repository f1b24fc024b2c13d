//! Command-line driver: verification sweeps, reduction traces, proposition
//! checks, conjecture search, DSL evaluation and instance generation.
//!
//! Exit codes: 0 all checks pass; 1 a proven inequality violated tolerance
//! (or the search surfaced a violation candidate); 2 configuration/input
//! error; 3 numerical failure inside a kernel.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use matineq_core::dsl;
use matineq_core::drury::{self, Prop2Instance, ReductionReport};
use matineq_core::error::Error;
use matineq_core::generate::{self, derive_rng, GenSpec, MatrixField, SpectrumShape};
use matineq_core::linalg::{diag_real, Mat, PdMatrix, PsdMatrix};
use matineq_core::matfile::MatrixFile;
use matineq_core::search::{self, SearchConfig};
use matineq_core::suite::{self, InequalityInstance, InequalityResult};
use matineq_core::Result;

use rand::Rng;

#[derive(Parser)]
#[command(name = "matineq", version, about = "Eigenvalue/singular-value AM-GM inequality verification toolkit")]
struct Cli {
    /// Master seed for all randomized drivers.
    #[arg(long, global = true, env = "MATINEQ_SEED", default_value_t = 0)]
    seed: u64,

    /// Absolute tolerance override for pass/fail decisions (default:
    /// per-instance scaled tolerance 1e-9 * (1 + sum of norms)).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Number of random trials for the randomized drivers.
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Matrix dimension for generated instances.
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Emit machine-readable JSON instead of text tables.
    #[arg(long, global = true)]
    json: bool,

    /// Output file (reports, generated matrices, search record stream).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full inequality check suite over generated or supplied pairs.
    Verify(VerifyArgs),
    /// Execute the rank-reduction pipeline and print the stage trace.
    Reduce(ReduceArgs),
    /// Check the block-matrix propositions and the key lemma.
    Prop(PropArgs),
    /// Randomized counterexample search for the weighted conjecture.
    Search(SearchArgs),
    /// Parse and evaluate inequality statements from a file or the builtin
    /// catalogue.
    Dsl(DslArgs),
    /// Generate a random matrix and write it in the JSON matrix format.
    Gen(GenArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Two matrix files (A then B) instead of generated instances.
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,

    /// Weight parameter for the weighted checks on supplied inputs.
    #[arg(long, default_value_t = 0.5)]
    t: f64,

    /// Definiteness shift factor for semidefinite inputs to PD-only checks.
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
}

#[derive(Args)]
struct ReduceArgs {
    /// Two matrix files (A then B) instead of a generated pair.
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,

    /// Target index r (default: every r from 1 to n).
    #[arg(long)]
    r: Option<usize>,

    /// Perturbation factor for semidefinite inputs.
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,

    /// Run the eps sweep {1e-4, 1e-6, 1e-8} and report margin stability.
    #[arg(long)]
    eps_sweep: bool,
}

#[derive(Args)]
struct PropArgs {
    /// Which statement to check.
    #[arg(value_enum)]
    which: PropKind,

    /// Closed-form scalar parameters (lemma1: X S; prop2: M N; prop3: L Z).
    params: Vec<f64>,

    /// Block size r for random instances.
    #[arg(long, default_value_t = 3)]
    r: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum PropKind {
    Lemma1,
    Prop1,
    Prop2,
    Prop3,
}

#[derive(Args)]
struct SearchArgs {
    /// Dimensions to sweep, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = (2..=8).collect::<Vec<usize>>())]
    dims: Vec<usize>,

    /// Weight grid (0.5 is always added); default {0, 0.1, ..., 1}.
    #[arg(long, value_delimiter = ',')]
    t_grid: Option<Vec<f64>>,

    #[arg(long, default_value_t = 500)]
    trials_per_cell: u64,

    #[arg(long, default_value_t = 200)]
    refine_steps: usize,

    /// How many of the worst candidates get refinement walks.
    #[arg(long, default_value_t = 10)]
    refine_top: usize,

    #[arg(long, default_value_t = 0.05)]
    step_scale: f64,

    /// Continue from the record stream at --out instead of starting fresh.
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct DslArgs {
    /// Statement file: one statement per line, '#' comments.
    file: Option<PathBuf>,

    /// Evaluate the builtin catalogue instead of a file.
    #[arg(long)]
    builtin: bool,

    /// Two matrix files binding A and B (default: generated instances).
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,

    /// Weight parameter.
    #[arg(long, default_value_t = 0.5)]
    t: f64,
}

#[derive(Args)]
struct GenArgs {
    /// Rank (default: full).
    #[arg(long)]
    rank: Option<usize>,

    /// Condition number target.
    #[arg(long, default_value_t = 10.0)]
    kappa: f64,

    #[arg(long, value_enum, default_value_t = FieldArg::Complex)]
    field: FieldArg,

    #[arg(long, value_enum, default_value_t = ShapeArg::Loguniform)]
    shape: ShapeArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Loguniform,
    Uniform,
    Clustered,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NumericalFailure { .. } | Error::NoConvergence { .. } => 3,
                _ => 2,
            }
        }
    };
    ExitCode::from(code)
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Verify(args) => cmd_verify(cli, args),
        Command::Reduce(args) => cmd_reduce(cli, args),
        Command::Prop(args) => cmd_prop(cli, args),
        Command::Search(args) => cmd_search(cli, args),
        Command::Dsl(args) => cmd_dsl(cli, args),
        Command::Gen(args) => cmd_gen(cli, args),
    }
}

/// Pass/fail under the optional global tolerance override.
fn passes(cli: &Cli, r: &InequalityResult) -> bool {
    match cli.tol {
        Some(t) => r.min_margin >= -t,
        None => r.passed,
    }
}

fn load_psd_pair(paths: &[PathBuf]) -> Result<(PsdMatrix, PsdMatrix)> {
    if paths.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "--input needs exactly two matrix files, got {}",
            paths.len()
        )));
    }
    let a = PsdMatrix::from_matrix(matineq_core::matfile::load_matrix(&paths[0])?)?;
    let b = PsdMatrix::from_matrix(matineq_core::matfile::load_matrix(&paths[1])?)?;
    Ok((a, b))
}

fn write_or_print(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct CheckStats {
    trials: u64,
    min_margin: f64,
    failures: u64,
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<u8> {
    let t_grid = search::default_t_grid();
    let mut stats: BTreeMap<String, CheckStats> = BTreeMap::new();

    let instances: Vec<InequalityInstance> = if !args.input.is_empty() {
        let (a, b) = load_psd_pair(&args.input)?;
        vec![InequalityInstance::new(a, b, args.t)?]
    } else {
        let trials = cli.trials.unwrap_or(100);
        let mut out = Vec::with_capacity(trials as usize);
        for i in 0..trials {
            let mut rng = derive_rng(cli.seed, i);
            let n = cli.n.unwrap_or_else(|| rng.gen_range(1..=8));
            let (a, b) = generate::random_pair_from_rng(n, &mut rng, true)?;
            let t = t_grid[rng.gen_range(0..t_grid.len())];
            out.push(InequalityInstance::new(a, b, t)?);
        }
        out
    };

    for inst in &instances {
        for r in suite::verify_instance(inst, args.eps)? {
            let ok = passes(cli, &r);
            let e = stats.entry(r.id.clone()).or_insert(CheckStats {
                trials: 0,
                min_margin: f64::INFINITY,
                failures: 0,
            });
            e.trials += 1;
            e.min_margin = e.min_margin.min(r.min_margin);
            if !ok {
                e.failures += 1;
            }
        }
    }

    let mut proven_failures = 0u64;
    let mut conjecture_violations = 0u64;
    let mut lines = Vec::new();
    lines.push(format!(
        "{:<12} {:>8} {:>14} {:>9}  status",
        "check", "trials", "min margin", "failures"
    ));
    for (id, s) in &stats {
        let proven = id != suite::CONJECTURE;
        if proven {
            proven_failures += s.failures;
        } else {
            conjecture_violations += s.failures;
        }
        let status = if s.failures == 0 {
            "ok"
        } else if proven {
            "REGRESSION"
        } else {
            "CANDIDATE VIOLATION"
        };
        lines.push(format!(
            "{:<12} {:>8} {:>14.3e} {:>9}  {status}",
            id, s.trials, s.min_margin, s.failures
        ));
    }

    if cli.json {
        let checks: Vec<_> = stats
            .iter()
            .map(|(id, s)| {
                json!({
                    "id": id,
                    "trials": s.trials,
                    "min_margin": s.min_margin,
                    "failures": s.failures,
                })
            })
            .collect();
        let doc = json!({
            "seed": cli.seed,
            "instances": instances.len(),
            "checks": checks,
            "proven_failures": proven_failures,
            "conjecture_violations": conjecture_violations,
        });
        write_or_print(cli, &serde_json::to_string_pretty(&doc).unwrap())?;
    } else {
        let mut text = lines.join("\n");
        if conjecture_violations > 0 {
            text.push_str(&format!(
                "\nnote: {conjecture_violations} conjecture candidate violation(s) surfaced (does not affect exit code; run `matineq search`)"
            ));
        }
        write_or_print(cli, &text)?;
    }

    // The conjecture is reported but only `search` signals it via exit code.
    Ok(if proven_failures > 0 { 1 } else { 0 })
}

// ---------------------------------------------------------------------------
// reduce
// ---------------------------------------------------------------------------

fn cmd_reduce(cli: &Cli, args: &ReduceArgs) -> Result<u8> {
    let (a, b) = if !args.input.is_empty() {
        load_psd_pair(&args.input)?
    } else {
        let n = cli.n.unwrap_or(4);
        let mut rng = derive_rng(cli.seed, 0);
        let (a, b) = generate::random_pd_pair_from_rng(n, &mut rng)?;
        (a.as_psd().clone(), b.as_psd().clone())
    };
    let n = a.dim();
    let rs: Vec<usize> = match args.r {
        Some(r) => {
            if r == 0 || r > n {
                return Err(Error::InvalidArgument(format!("r = {r} outside 1..={n}")));
            }
            vec![r]
        }
        None => (1..=n).collect(),
    };
    let epsilons: Vec<f64> = if args.eps_sweep {
        vec![1e-4, 1e-6, 1e-8]
    } else {
        vec![args.eps]
    };

    let mut failed = false;
    let mut reports: Vec<serde_json::Value> = Vec::new();
    let mut text = String::new();
    for &r in &rs {
        for &eps in &epsilons {
            match drury::run_reduction(&a, &b, r, eps) {
                Ok(trace) => {
                    let report = trace.report();
                    if !report.passed {
                        failed = true;
                    }
                    if cli.json {
                        reports.push(json!({
                            "eps": eps,
                            "report": report,
                        }));
                    } else {
                        text.push_str(&render_reduction(&report, eps));
                    }
                }
                Err(Error::Degenerate(msg)) => {
                    if cli.json {
                        reports.push(json!({
                            "eps": eps,
                            "skipped": msg,
                            "r": r,
                        }));
                    } else {
                        text.push_str(&format!("r={r} eps={eps:.0e}: skipped ({msg})\n"));
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }

    if cli.json {
        write_or_print(cli, &serde_json::to_string_pretty(&reports).unwrap())?;
    } else {
        write_or_print(cli, text.trim_end())?;
    }
    Ok(if failed { 1 } else { 0 })
}

fn render_reduction(report: &ReductionReport, eps: f64) -> String {
    let mut out = format!(
        "reduction r={} eps={:.0e}: {}\n",
        report.r,
        eps,
        if report.passed { "ok" } else { "VIOLATION" }
    );
    for stage in &report.stages {
        out.push_str(&format!("  [{}]\n", stage.name));
        for (k, v) in &stage.values {
            out.push_str(&format!("    {k:<22} {v:.6e}\n"));
        }
    }
    for v in &report.violations {
        out.push_str(&format!("  violation: {v}\n"));
    }
    out
}

// ---------------------------------------------------------------------------
// prop
// ---------------------------------------------------------------------------

fn cmd_prop(cli: &Cli, args: &PropArgs) -> Result<u8> {
    let mut results: Vec<InequalityResult> = Vec::new();

    if !args.params.is_empty() {
        results.push(prop_closed_form(args)?);
    } else {
        let trials = cli.trials.unwrap_or(100);
        let r = args.r;
        let n = cli.n.unwrap_or(r + 2);
        for i in 0..trials {
            let mut rng = derive_rng(cli.seed, i);
            results.push(match args.which {
                PropKind::Lemma1 => {
                    let (x, _) = generate::random_pd_pair_from_rng(r, &mut rng)?;
                    let s = generate::random_nonsingular(r, cli.seed.wrapping_add(i * 2 + 1))?;
                    drury::lemma1_margin(&x, &s)?
                }
                PropKind::Prop1 => {
                    let pair = generate::make_prop1_instance(n, r.min(n), cli.seed.wrapping_add(i))?;
                    drury::verify_prop1(&pair)?
                }
                PropKind::Prop2 => {
                    let (m, nn) = generate::random_pd_pair_from_rng(r, &mut rng)?;
                    drury::check_prop2(&Prop2Instance::new(m, nn)?)?
                }
                PropKind::Prop3 => {
                    let (l, _) = generate::random_pd_pair_from_rng(r, &mut rng)?;
                    let z = generate::random_nonsingular(r, cli.seed.wrapping_add(i * 2 + 1))?;
                    let inst = drury::make_prop3_instance(&l, &z)?;
                    drury::check_prop3(&inst)?
                }
            });
        }
    }

    let mut failed = false;
    let mut lines = Vec::new();
    for r in &results {
        let ok = passes(cli, r);
        if !ok {
            failed = true;
        }
        lines.push(format!(
            "{:<8} margin {:>14.6e}  tol {:.1e}  {}",
            r.id,
            r.min_margin,
            r.tolerance,
            if ok { "ok" } else { "VIOLATION" }
        ));
    }
    if cli.json {
        write_or_print(cli, &serde_json::to_string_pretty(&results).unwrap())?;
    } else {
        write_or_print(cli, &lines.join("\n"))?;
    }
    Ok(if failed { 1 } else { 0 })
}

fn prop_closed_form(args: &PropArgs) -> Result<InequalityResult> {
    let p = &args.params;
    let need = |k: usize, names: &str| -> Result<()> {
        if p.len() != k {
            return Err(Error::InvalidArgument(format!(
                "expected {k} scalar parameters ({names}), got {}",
                p.len()
            )));
        }
        Ok(())
    };
    match args.which {
        PropKind::Lemma1 => {
            need(2, "X S")?;
            let x = PdMatrix::from_matrix(diag_real(&[p[0]]))?;
            let s = matineq_core::linalg::mat_from_real(1, 1, &[p[1]]);
            drury::lemma1_margin(&x, &s)
        }
        PropKind::Prop2 => {
            need(2, "M N")?;
            let m = PdMatrix::from_matrix(diag_real(&[p[0]]))?;
            let n = PdMatrix::from_matrix(diag_real(&[p[1]]))?;
            drury::check_prop2(&Prop2Instance::new(m, n)?)
        }
        PropKind::Prop3 => {
            need(2, "L Z")?;
            let l = PdMatrix::from_matrix(diag_real(&[p[0]]))?;
            let z = matineq_core::linalg::mat_from_real(1, 1, &[p[1]]);
            let inst = drury::make_prop3_instance(&l, &z)?;
            drury::check_prop3(&inst)
        }
        PropKind::Prop1 => Err(Error::InvalidArgument(
            "prop1 takes no scalar parameters; it runs on generated partition instances".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// search
// ---------------------------------------------------------------------------

fn cmd_search(cli: &Cli, args: &SearchArgs) -> Result<u8> {
    let t_grid = match &args.t_grid {
        Some(g) => search::normalize_t_grid(g.clone()),
        None => search::default_t_grid(),
    };
    let cfg = SearchConfig {
        dims: args.dims.clone(),
        t_grid,
        trials_per_cell: cli.trials.unwrap_or(args.trials_per_cell),
        refine_steps: args.refine_steps,
        refine_top: args.refine_top,
        step_scale: args.step_scale,
        seed: cli.seed,
        tol_factor: cli.tol.unwrap_or(1e-9),
        out_path: cli.out.clone(),
    };
    let report = if args.resume {
        search::resume_sweep(&cfg)?
    } else {
        search::random_sweep(&cfg)?
    };

    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!(
            "search: {} cells, {} trials, min margin overall {:.6e}, wall {:.1}s",
            report.cells_run, report.trials_total, report.min_margin_overall, report.wall_time_secs
        );
        let mut worst: Vec<_> = report.cells.iter().collect();
        worst.sort_by(|a, b| a.min_margin.partial_cmp(&b.min_margin).unwrap());
        for cell in worst.iter().take(8) {
            println!(
                "  n={:<2} t={:<4} min margin {:>14.6e} (j={}, trial {})",
                cell.n, cell.t, cell.min_margin, cell.min_j, cell.min_trial
            );
        }
        println!(
            "  candidates retained: {}, violations: {}",
            report.candidates.len(),
            report.violations.len()
        );
        for v in &report.violations {
            println!(
                "  VIOLATION: n={} t={} j={} margin {:.6e} (seed {})",
                v.n, v.t, v.j, v.margin, v.seed
            );
        }
    }
    Ok(if report.violations.is_empty() { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// dsl
// ---------------------------------------------------------------------------

fn cmd_dsl(cli: &Cli, args: &DslArgs) -> Result<u8> {
    let statements: Vec<(String, dsl::Statement)> = if args.builtin {
        dsl::builtin_catalogue()?
    } else {
        let path = args.file.as_ref().ok_or_else(|| {
            Error::InvalidArgument("pass a statement file or --builtin".into())
        })?;
        let text = std::fs::read_to_string(path)?;
        let mut out = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let stmt = dsl::parse(trimmed).map_err(|e| {
                Error::InvalidArgument(format!("{}:{}: {e}", path.display(), lineno + 1))
            })?;
            out.push((format!("line {}", lineno + 1), stmt));
        }
        out
    };

    let bindings_list: Vec<dsl::Bindings> = if !args.input.is_empty() {
        let (a, b) = load_psd_pair(&args.input)?;
        let mut bind = dsl::Bindings::new();
        bind.insert("A".into(), a.matrix().clone());
        bind.insert("B".into(), b.matrix().clone());
        vec![bind]
    } else {
        let trials = cli.trials.unwrap_or(10);
        let n = cli.n.unwrap_or(3);
        let mut out = Vec::new();
        for i in 0..trials {
            let mut rng = derive_rng(cli.seed, i);
            let (a, b) = generate::random_pair_from_rng(n, &mut rng, true)?;
            let mut bind = dsl::Bindings::new();
            bind.insert("A".into(), a.matrix().clone());
            bind.insert("B".into(), b.matrix().clone());
            out.push(bind);
        }
        out
    };

    let mut failed = false;
    let mut lines = Vec::new();
    let mut docs = Vec::new();
    for (name, stmt) in &statements {
        let mut min_margin = f64::INFINITY;
        for bind in &bindings_list {
            let scale: f64 = 1.0 + bind.values().map(|m| m.norm()).sum::<f64>();
            let tol = cli.tol.unwrap_or(1e-9 * scale);
            let r = dsl::evaluate(stmt, bind, args.t, tol)?;
            min_margin = min_margin.min(r.min_margin);
            if !r.passed {
                failed = true;
            }
        }
        lines.push(format!(
            "{:<12} {:<52} min margin {:>14.6e}",
            name,
            dsl::print(stmt),
            min_margin
        ));
        docs.push(json!({
            "name": name,
            "statement": dsl::print(stmt),
            "min_margin": min_margin,
        }));
    }

    if cli.json {
        write_or_print(cli, &serde_json::to_string_pretty(&docs).unwrap())?;
    } else {
        write_or_print(cli, &lines.join("\n"))?;
    }
    Ok(if failed { 1 } else { 0 })
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

fn cmd_gen(cli: &Cli, args: &GenArgs) -> Result<u8> {
    let n = cli.n.unwrap_or(4);
    let spec = GenSpec {
        dim: n,
        rank: args.rank.unwrap_or(n),
        condition: args.kappa,
        field: match args.field {
            FieldArg::Real => MatrixField::Real,
            FieldArg::Complex => MatrixField::Complex,
        },
        seed: cli.seed,
        shape: match args.shape {
            ShapeArg::Loguniform => SpectrumShape::LogUniform,
            ShapeArg::Uniform => SpectrumShape::Uniform,
            ShapeArg::Clustered => SpectrumShape::Clustered,
        },
    };
    let m: Mat = generate::random_psd_rank(&spec)?.matrix().clone();
    let file = MatrixFile::from_matrix(&m);
    match &cli.out {
        Some(path) => file.save(Path::new(path))?,
        None => println!("{}", serde_json::to_string_pretty(&file).unwrap()),
    }
    Ok(0)
}
