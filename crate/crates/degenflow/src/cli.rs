//! Command-line front end. Exit codes: 0 every check passed, 1 a check failed
//! or the solver aborted, 2 usage or configuration error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::artifact::{parse_snapshot, sha256_hex, snapshot_text, Manifest, SnapshotRecord};
use crate::config::{parse_scenario, Check, Scenario};
use crate::domain::{build_grid, Grid};
use crate::model::{
    check_structure, nondegeneracy_scan, validate_ellipticity, validate_flux_pinning, DirectionSet, ProblemSpec,
};
use crate::solver::{run, viscosity_continuation, RunArtifacts, SolverError};
use crate::testfn::{dirichlet_family, interior_family, neumann_family};
use crate::trace::{check_time_zero_trace, extract_trace_profile};
use crate::verify::{
    check_contraction, check_dirichlet_inequalities, check_entropy_inequality, check_initial_condition,
    check_kinetic_defect, check_max_principle, check_neumann_weak_form, contraction_gaps, CheckEntry,
    VerificationReport,
};

#[derive(Parser, Debug)]
#[command(name = "degenflow", version, about = "Degenerate parabolic-hyperbolic solver and entropy-solution verifier")]
pub struct Cli {
    /// Global multiplier applied to every check tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tol_scale: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Time-step a scenario and write snapshots plus run.manifest.
    Run {
        scenario: PathBuf,
        #[arg(short = 'o', long = "out", default_value = "out")]
        out: PathBuf,
    },
    /// Run every ε of the scenario's eps list and tabulate the Cauchy gaps.
    SweepEps {
        scenario: PathBuf,
        #[arg(short = 'o', long = "out", default_value = "out")]
        out: PathBuf,
    },
    /// Check a finished run against the entropy-solution conditions.
    Verify {
        manifest: PathBuf,
        /// Report directory (defaults to the manifest's directory).
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
    },
    /// Extract traces along deformation layers of Γ'.
    Trace {
        manifest: PathBuf,
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
    },
    /// Run the [data] and [data_v] initial data and check L¹ contraction.
    Contract {
        scenario: PathBuf,
        #[arg(short = 'o', long = "out", default_value = "out")]
        out: PathBuf,
    },
    /// Model validators only; no time stepping.
    Audit {
        scenario: PathBuf,
        #[arg(short = 'o', long = "out", default_value = "out")]
        out: PathBuf,
        /// Use seeded random directions for the non-degeneracy scan.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Abort(String),
}

type Outcome = Result<bool, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn mkdir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    parse_scenario(&read(path)?).map_err(|e| usage(format!("{}:{}", path.display(), e)))
}

fn problem(s: &Scenario) -> Result<(ProblemSpec<f64>, Grid<f64>), Failure> {
    let spec = s.problem_spec().map_err(|e| usage(e.to_string()))?;
    let grid = build_grid(s.grid_spec()).map_err(|e| usage(e.to_string()))?;
    Ok((spec, grid))
}

fn solver_failure(e: SolverError) -> Failure {
    match e {
        SolverError::StaticProblem | SolverError::Config(_) => usage(e.to_string()),
        _ => Failure::Abort(format!("solver aborted: {e}")),
    }
}

fn emit_report(report: &VerificationReport, hash: &str, out: &Path) -> Outcome {
    let text = report.to_text(hash);
    mkdir(out)?;
    write(&out.join("report.txt"), &text)?;
    print!("{text}");
    for f in report.failures() {
        eprintln!("FAIL {}: {}", f.id, f.detail);
    }
    Ok(report.passed())
}

fn cmd_run(scenario_path: &Path, out: &Path) -> Outcome {
    let scenario = load_scenario(scenario_path)?;
    let (spec, grid) = problem(&scenario)?;
    if scenario.solver.eps.len() > 1 {
        eprintln!("note: eps list given; `run` uses the first value {}", scenario.solver.eps[0]);
    }
    let artifacts = run(&spec, &grid, &scenario.solver_config()).map_err(solver_failure)?;
    mkdir(out)?;
    let scenario_text = scenario.to_text();
    write(&out.join("scenario.cfg"), &scenario_text)?;
    let mut records = Vec::with_capacity(artifacts.snapshots.len());
    for s in &artifacts.snapshots {
        let file = format!("snap_{:06}.txt", s.step);
        let text = snapshot_text(s.t, &s.field);
        write(&out.join(&file), &text)?;
        records.push(SnapshotRecord { step: s.step, t: s.t, file, sha256: sha256_hex(text.as_bytes()) });
    }
    let manifest = Manifest::from_run(&artifacts, "scenario.cfg", sha256_hex(scenario_text.as_bytes()), records);
    write(&out.join("run.manifest"), &manifest.to_text())?;
    println!(
        "{} snapshots, {} rejected steps, t_end {} -> {}",
        artifacts.snapshots.len(),
        artifacts.rejected_steps,
        artifacts.t_end(),
        out.join("run.manifest").display()
    );
    Ok(true)
}

struct Loaded {
    hash: String,
    dir: PathBuf,
    scenario: Scenario,
    spec: ProblemSpec<f64>,
    grid: Grid<f64>,
    run: RunArtifacts<f64>,
    integrity: CheckEntry,
}

fn load_run(manifest_path: &Path) -> Result<Loaded, Failure> {
    let text = read(manifest_path)?;
    let hash = sha256_hex(text.as_bytes());
    let manifest =
        Manifest::parse(&text).map_err(|(line, msg)| usage(format!("{}:line {line}: {msg}", manifest_path.display())))?;
    let dir = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let scenario_path = dir.join(&manifest.scenario);
    let scenario_text = read(&scenario_path)?;
    let mut tampered = Vec::new();
    if sha256_hex(scenario_text.as_bytes()) != manifest.scenario_sha256 {
        tampered.push(manifest.scenario.clone());
    }
    let scenario = parse_scenario(&scenario_text).map_err(|e| usage(format!("{}:{}", scenario_path.display(), e)))?;
    let (spec, grid) = problem(&scenario)?;
    let mut fields = Vec::with_capacity(manifest.snapshots.len());
    for r in &manifest.snapshots {
        let path = dir.join(&r.file);
        let body = read(&path)?;
        if sha256_hex(body.as_bytes()) != r.sha256 {
            tampered.push(r.file.clone());
        }
        let (t, field) = parse_snapshot(&body).map_err(|(line, msg)| usage(format!("{}:line {line}: {msg}", path.display())))?;
        if t.to_bits() != r.t.to_bits() {
            tampered.push(format!("{} (time)", r.file));
        }
        if field.n1() != grid.n1() || field.n2() != grid.n2() {
            return Err(usage(format!("{}: field is {}x{}, scenario grid is {}x{}", path.display(), field.n1(), field.n2(), grid.n1(), grid.n2())));
        }
        fields.push(field);
    }
    let integrity = CheckEntry::new(
        "integrity",
        tampered.is_empty(),
        tampered.len() as f64,
        0.0,
        if tampered.is_empty() { "all hashes match".into() } else { format!("hash mismatch: {}", tampered.join(", ")) },
    );
    let run = manifest.artifacts(fields);
    Ok(Loaded { hash, dir, scenario, spec, grid, run, integrity })
}

/// Every check enabled in the scenario's `[verify]` section.
pub fn verification_report(
    scenario: &Scenario,
    spec: &ProblemSpec<f64>,
    grid: &Grid<f64>,
    run: &RunArtifacts<f64>,
    tol_scale: f64,
) -> VerificationReport {
    let opts = scenario.verify_options(tol_scale);
    let t_end = run.t_end();
    let v = &scenario.verify;
    let mut report = VerificationReport::default();
    if scenario.enabled(Check::MaxPrinciple) {
        report.extend([check_max_principle(run, spec, &opts)]);
    }
    if scenario.enabled(Check::Entropy) {
        report.extend(check_entropy_inequality(run, spec, grid, &v.k, &interior_family(grid, t_end), &opts));
    }
    if scenario.enabled(Check::Kinetic) {
        report.extend(check_kinetic_defect(run, spec, grid, &v.xi, &interior_family(grid, t_end), &opts));
    }
    if scenario.enabled(Check::Neumann) {
        report.extend(check_neumann_weak_form(run, spec, grid, &neumann_family(grid, t_end), &opts));
    }
    if scenario.enabled(Check::Dirichlet) {
        report.extend(check_dirichlet_inequalities(run, spec, grid, &v.k, &dirichlet_family(grid, t_end), &opts));
    }
    if scenario.enabled(Check::Initial) {
        report.extend([check_initial_condition(run, spec, grid, &opts)]);
    }
    if scenario.enabled(Check::TimeTrace) {
        report.extend(check_time_zero_trace(run, spec, grid, &v.k, &opts));
    }
    report
}

fn cmd_verify(manifest: &Path, out: Option<&Path>, tol_scale: f64) -> Outcome {
    let l = load_run(manifest)?;
    let mut report = verification_report(&l.scenario, &l.spec, &l.grid, &l.run, tol_scale);
    report.extend([l.integrity]);
    emit_report(&report, &l.hash, out.unwrap_or(&l.dir))
}

fn cmd_trace(manifest: &Path, out: Option<&Path>) -> Outcome {
    const NOISE: f64 = 0.1;
    let l = load_run(manifest)?;
    let profile =
        extract_trace_profile(&l.run, &l.grid, &l.scenario.verify.trace_depths).map_err(|e| usage(e.to_string()))?;
    let dir = out.unwrap_or(&l.dir);
    mkdir(dir)?;
    let mut text = String::new();
    for (s, c) in profile.s_values.iter().zip(&profile.columns) {
        text.push_str(&format!("depth {s} column {c}\n"));
    }
    for (k, g) in profile.l1_gaps.iter().enumerate() {
        text.push_str(&format!("gap {k} {g}\n"));
    }
    let per = 2 * l.grid.n2();
    for (snap, row) in l.run.snapshots.iter().zip(profile.u_tau().chunks(per)) {
        let vals: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        text.push_str(&format!("u_tau {} {}\n", snap.t, vals.join(" ")));
    }
    write(&dir.join("trace.txt"), &text)?;
    let mut report = VerificationReport::default();
    for (k, g) in profile.l1_gaps.iter().enumerate() {
        report.extend([CheckEntry::info(format!("trace.gap{k}"), *g, 0.0, format!("depth {} to {}", profile.s_values[k], profile.s_values[k + 1]))]);
    }
    let worst = profile.l1_gaps.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else if w[1] > 0.0 { f64::INFINITY } else { 0.0 }).fold(0.0, f64::max);
    report.extend([CheckEntry::new(
        "trace.gaps_decreasing",
        profile.gaps_decreasing(NOISE),
        worst,
        1.0 + NOISE,
        "largest ratio of consecutive gaps".into(),
    )]);
    report.extend([l.integrity]);
    emit_report(&report, &l.hash, dir)
}

fn cmd_sweep(scenario_path: &Path, out: &Path) -> Outcome {
    let scenario = load_scenario(scenario_path)?;
    if scenario.solver.eps.len() < 2 {
        return Err(usage("sweep-eps needs at least two eps values in [solver]"));
    }
    let (spec, grid) = problem(&scenario)?;
    let table = viscosity_continuation(&spec, &grid, &scenario.solver_config(), &scenario.solver.eps).map_err(solver_failure)?;
    mkdir(out)?;
    let mut text = String::from("eps gap_to_next eps_grad_sq grad_b_sq\n");
    for (k, e) in table.eps.iter().enumerate() {
        let gap = table.gaps.get(k).map(|g| g.to_string()).unwrap_or_else(|| "-".into());
        text.push_str(&format!("{e} {gap} {} {}\n", table.eps_grad_sq[k], table.grad_b_sq[k]));
    }
    write(&out.join("sweep.txt"), &text)?;
    let worst = table.gaps.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    let mut report = VerificationReport::default();
    report.extend([
        CheckEntry::new("sweep.gaps_decreasing", table.gaps.windows(2).all(|w| w[1] < w[0]), worst, 1.0, "largest ratio of consecutive gaps".into()),
        CheckEntry::info(
            "sweep.eps_grad_sq",
            table.eps_grad_sq.iter().copied().fold(0.0, f64::max),
            0.0,
            "largest eps*int|grad u|^2 over the sweep".into(),
        ),
    ]);
    emit_report(&report, &sha256_hex(scenario.to_text().as_bytes()), out)
}

fn cmd_contract(scenario_path: &Path, out: &Path, tol_scale: f64) -> Outcome {
    let scenario = load_scenario(scenario_path)?;
    let Some(spec_v) = scenario.problem_spec_v() else {
        return Err(usage("contract needs a [data_v] section"));
    };
    let spec_v = spec_v.map_err(|e| usage(e.to_string()))?;
    let (spec_u, grid) = problem(&scenario)?;
    let cfg = scenario.solver_config();
    let (ru, rv) = rayon::join(|| run(&spec_u, &grid, &cfg), || run(&spec_v, &grid, &cfg));
    let (ru, rv) = (ru.map_err(solver_failure)?, rv.map_err(solver_failure)?);
    let entry = check_contraction(&ru, &rv, &spec_u, &spec_v, &grid, &scenario.verify_options(tol_scale))
        .map_err(|e| usage(e.to_string()))?;
    mkdir(out)?;
    let gaps = contraction_gaps(&ru, &rv, &grid).map_err(|e| usage(e.to_string()))?;
    let text: String = gaps.iter().map(|(t, g)| format!("{t} {g}\n")).collect();
    write(&out.join("contraction.txt"), &text)?;
    let mut report = VerificationReport::default();
    report.extend([entry]);
    emit_report(&report, &sha256_hex(scenario.to_text().as_bytes()), out)
}

fn cmd_audit(scenario_path: &Path, out: &Path, seed: Option<u64>) -> Outcome {
    const THRESHOLD: f64 = 1e-4;
    const MAX_FRACTION: f64 = 0.05;
    const SAMPLES: usize = 100_000;
    const DIRECTIONS: usize = 256;
    let scenario = load_scenario(scenario_path)?;
    let (spec, _) = problem(&scenario)?;
    let ell = validate_ellipticity(&spec, 4097);
    let pin = validate_flux_pinning(&spec, 1e-12);
    let st = check_structure(&spec);
    let dirs = match seed {
        Some(seed) => DirectionSet::Random { n: DIRECTIONS, seed },
        None => DirectionSet::Fibonacci(DIRECTIONS),
    };
    let coarse = nondegeneracy_scan(&spec, &dirs, SAMPLES, THRESHOLD);
    let fine = nondegeneracy_scan(&spec, &dirs, SAMPLES, THRESHOLD / 10.0);
    let mut report = VerificationReport::default();
    report.extend([
        CheckEntry::new(
            "audit.ellipticity",
            ell.pass,
            ell.lower_margin.min(ell.upper_margin),
            0.0,
            format!("worst at u={}", ell.worst_u),
        ),
        CheckEntry::new("audit.pinning", pin.pass, pin.residual_min.max(pin.residual_max), 1e-12, "|f1(u_min)|, |f1(u_max)|".into()),
        CheckEntry::new("audit.structure", st.pass, 0.0, 0.0, format!("{:?}", st.via)),
        CheckEntry::new(
            "audit.nondegeneracy",
            coarse.max_fraction <= MAX_FRACTION,
            coarse.max_fraction,
            MAX_FRACTION,
            format!("threshold {THRESHOLD}, worst direction {:?}", coarse.worst_direction),
        ),
        CheckEntry::new(
            "audit.nondegeneracy_refined",
            fine.max_fraction <= coarse.max_fraction,
            fine.max_fraction,
            coarse.max_fraction,
            format!("threshold {}", THRESHOLD / 10.0),
        ),
    ]);
    emit_report(&report, &sha256_hex(scenario.to_text().as_bytes()), out)
}

fn dispatch(cli: &Cli) -> Outcome {
    if !(cli.tol_scale > 0.0 && cli.tol_scale.is_finite()) {
        return Err(usage("--tol-scale must be positive and finite"));
    }
    match &cli.command {
        Command::Run { scenario, out } => cmd_run(scenario, out),
        Command::SweepEps { scenario, out } => cmd_sweep(scenario, out),
        Command::Verify { manifest, out } => cmd_verify(manifest, out.as_deref(), cli.tol_scale),
        Command::Trace { manifest, out } => cmd_trace(manifest, out.as_deref()),
        Command::Contract { scenario, out } => cmd_contract(scenario, out, cli.tol_scale),
        Command::Audit { scenario, out, seed } => cmd_audit(scenario, out, *seed),
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, String> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("DEGENFLOW_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or(format!("DEGENFLOW_THREADS must be a positive integer (got `{v}`)"))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| e.to_string())
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Abort(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}
