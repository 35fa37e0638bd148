//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N <name>: pass|fail (<measurements>)` line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use degenflow::artifact::{sha256_hex, Manifest};
use degenflow::config::{default_depths, default_levels, parse_scenario, Scenario};
use degenflow::domain::{build_grid, Grid, GridSpec};
use degenflow::entropy::{a_fn, bstar_quadratic, sgn_delta, KineticSlab};
use degenflow::field::VectorField;
use degenflow::model::{nondegeneracy_scan, DirectionSet, ProblemSpec};
use degenflow::solver::{run, viscosity_continuation, Record, RunArtifacts};
use degenflow::testfn::interior_family;
use degenflow::trace::{boundary_layer_trace, extract_trace_profile, face_pairing, gauss_green_check};
use degenflow::verify::{check_contraction, check_entropy_inequality, CheckStatus, VerifyOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RANGE_SLACK: f64 = 1e-12;
const CONTRACTION_REL: f64 = 1e-10;
const ENTROPY_FLOOR: f64 = -1e-10;
const ENERGY_SPREAD: f64 = 2.0;
const ENERGY_TREND_NOISE: f64 = 0.1;
const TRACE_NOISE: f64 = 0.1;
const SYMMETRIC_GAP: f64 = 1e-12;
const GG_RATIO: (f64, f64) = (1.5, 3.0);
const GG_AGREEMENT: f64 = 2.0;
const CHI_CUTOFF: f64 = 1.0;
const CHI_CELLS: usize = 512;
const BSTAR_FLOOR: f64 = -1e-14;
const A_FLOOR: f64 = -1e-14;
const NONDEG_MAX: f64 = 0.05;
const NONDEG_THRESHOLD: f64 = 1e-4;

fn report(n: u32, name: &str, ok: bool, detail: String) {
    println!("criterion {n} {name}: {} ({detail})", if ok { "pass" } else { "fail" });
    assert!(ok, "criterion {n} {name} failed: {detail}");
}

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn load(name: &str) -> Scenario {
    parse_scenario(&fs::read_to_string(scenario_path(name)).unwrap()).unwrap()
}

fn setup(sc: &Scenario) -> (ProblemSpec<f64>, Grid<f64>) {
    (sc.problem_spec().unwrap(), build_grid(sc.grid_spec()).unwrap())
}

fn solve(sc: &Scenario) -> RunArtifacts<f64> {
    let (spec, grid) = setup(sc);
    run(&spec, &grid, &sc.solver_config()).unwrap()
}

#[test]
fn criterion_01_maximum_principle() {
    let mut sc = load("bump.cfg");
    sc.solver.record = Record::Times;
    sc.solver.snapshot_times = (1..20).map(|k| k as f64 * 0.01).collect();
    let r = solve(&sc);
    let lo = r.snapshots.iter().map(|s| s.field.min()).fold(f64::INFINITY, f64::min);
    let hi = r.snapshots.iter().map(|s| s.field.max()).fold(f64::NEG_INFINITY, f64::max);
    let ok = lo >= -RANGE_SLACK && hi <= 1.0 + RANGE_SLACK && r.rejected_steps == 0;
    report(1, "maximum_principle", ok, format!("min {lo:e}, max {hi}, {} snapshots, {} rejected steps", r.snapshots.len(), r.rejected_steps));
}

#[test]
fn criterion_02_l1_contraction() {
    let mut sc = load("contract.cfg");
    sc.solver.record = Record::EveryStep;
    let (spec_u, grid) = setup(&sc);
    let spec_v = sc.problem_spec_v().unwrap().unwrap();
    let cfg = sc.solver_config();
    let (ru, rv) = (run(&spec_u, &grid, &cfg).unwrap(), run(&spec_v, &grid, &cfg).unwrap());
    let opts = VerifyOptions { contraction_rel: CONTRACTION_REL, ..VerifyOptions::default() };
    let e = check_contraction(&ru, &rv, &spec_u, &spec_v, &grid, &opts).unwrap();
    report(2, "l1_contraction", e.status == CheckStatus::Pass, format!("worst relative increase {:e} over {} steps; {}", e.defect, ru.snapshots.len(), e.detail));
}

#[test]
fn criterion_03_entropy_inequalities() {
    let sc = load("bump.cfg");
    let (spec, grid) = setup(&sc);
    let r = run(&spec, &grid, &sc.solver_config()).unwrap();
    let opts = VerifyOptions { sign_tol: -ENTROPY_FLOOR, ..VerifyOptions::default() };
    let entries = check_entropy_inequality(&r, &spec, &grid, &default_levels(spec.u_min, spec.u_max), &interior_family(&grid, r.t_end()), &opts);
    let worst = entries.iter().map(|e| e.defect).fold(f64::INFINITY, f64::min);
    let ok = entries.len() == 81 && entries.iter().all(|e| e.status == CheckStatus::Pass) && worst >= ENTROPY_FLOOR;
    report(3, "entropy_inequalities", ok, format!("{} (k, phi) pairs, worst defect {worst:e}", entries.len()));
}

#[test]
fn criterion_04_viscosity_cauchy() {
    let sc = load("sweep.cfg");
    let (spec, grid) = setup(&sc);
    let t = viscosity_continuation(&spec, &grid, &sc.solver_config(), &sc.solver.eps).unwrap();
    let gaps_ok = t.gaps.windows(2).all(|w| w[1] < w[0]);
    let e = &t.eps_grad_sq;
    let spread = e.iter().cloned().fold(f64::MIN, f64::max) / e.iter().cloned().fold(f64::MAX, f64::min);
    let trend_ok = e.windows(2).all(|w| w[1] <= w[0] * (1.0 + ENERGY_TREND_NOISE));
    let ok = gaps_ok && spread <= ENERGY_SPREAD && trend_ok;
    report(4, "viscosity_cauchy", ok, format!("gaps {:?}, eps|grad u|^2 {:?}, spread {spread:.3}", t.gaps, t.eps_grad_sq));
}

#[test]
fn criterion_05_strong_trace() {
    let sc = load("trace_bump.cfg");
    let (_, grid) = setup(&sc);
    let depths = default_depths(sc.grid.n1, sc.grid.x1);
    let p = extract_trace_profile(&solve(&sc), &grid, &depths).unwrap();
    let sym_sc = load("symmetric.cfg");
    let (_, sym_grid) = setup(&sym_sc);
    let sym = extract_trace_profile(&solve(&sym_sc), &sym_grid, &depths).unwrap();
    let sym_max = sym.l1_gaps.iter().cloned().fold(0.0, f64::max);
    let ok = p.gaps_decreasing(TRACE_NOISE) && p.l1_gaps.iter().all(|&g| g > 0.0) && sym_max <= SYMMETRIC_GAP;
    report(5, "strong_trace", ok, format!("columns {:?}, gaps {:?}, symmetric control max gap {sym_max:e}", p.columns, p.l1_gaps));
}

type Field2 = fn(f64, f64) -> [f64; 2];
type Weight = fn(f64, f64) -> [f64; 3];

#[test]
fn criterion_06_gauss_green_traces() {
    let fields: [(&str, Field2); 4] = [
        ("identity", |a, b| [a, b]),
        ("quadratic", |a, b| [a * a - b, a * b + 0.5]),
        ("mixed", |a, b| [2.0 * a - a * a * a + b * b, a * a - 3.0 * b + 0.5 * a * b]),
        ("cubic", |a, b| [a * a * b + b, a - b * b * b + a * b]),
    ];
    let weights: [(&str, Weight); 3] = [("1", |_, _| [1.0, 0.0, 0.0]), ("x1", |x, _| [x, 1.0, 0.0]), ("1+x1x2", |x, y| [1.0 + x * y, y, x])];
    let grids: Vec<Grid<f64>> = [32, 64].iter().map(|&n| build_grid(GridSpec::unit_square(n, n)).unwrap()).collect();
    let mut ok = true;
    let (mut rmin, mut rmax, mut worst_agree) = (f64::MAX, f64::MIN, 0.0f64);
    let mut bad = Vec::new();
    for (fname, f) in fields {
        for (gname, g) in weights {
            let mut res = Vec::new();
            for grid in &grids {
                let field = VectorField::from_fn(grid, f);
                res.push(gauss_green_check(&field, g, grid).residual);
                let layer = boundary_layer_trace(&field, |x, y| g(x, y)[0], grid, &[1, 2]).unwrap();
                let faces = face_pairing(&field, |x, y| g(x, y)[0], grid);
                let rel = (layer.limit - faces).abs() / (grid.dx1() * field.max_norm());
                worst_agree = worst_agree.max(rel);
                if rel > GG_AGREEMENT {
                    ok = false;
                    bad.push(format!("{fname}/{gname} agreement {rel:.3}"));
                }
            }
            let ratio = res[0] / res[1];
            rmin = rmin.min(ratio);
            rmax = rmax.max(ratio);
            if !(GG_RATIO.0..=GG_RATIO.1).contains(&ratio) {
                ok = false;
                bad.push(format!("{fname}/{gname} ratio {ratio:.3}"));
            }
        }
    }
    report(6, "gauss_green_traces", ok, format!("12 pairs, ratios in [{rmin:.3}, {rmax:.3}], worst agreement {worst_agree:.3} dx|F| {bad:?}"));
}

#[test]
fn criterion_07_chi_moment() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let us: Vec<f64> = (0..1000).map(|_| rng.gen_range(-CHI_CUTOFF..=CHI_CUTOFF)).collect();
    let slab = KineticSlab::new(&us, CHI_CUTOFF, CHI_CELLS).unwrap();
    let worst = slab.moment(|_| 1.0).iter().zip(&us).map(|(m, u)| (m - u).abs()).fold(0.0, f64::max);
    let dxi = 2.0 * CHI_CUTOFF / CHI_CELLS as f64;
    report(7, "chi_moment", worst <= dxi, format!("worst |moment - u| {worst:e}, dxi {dxi:e}"));
}

#[test]
fn criterion_08_algebraic_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let specs = [load("bump.cfg").problem_spec().unwrap(), load("tadmor_tao.cfg").problem_spec().unwrap()];
    let mut b_min = f64::INFINITY;
    for spec in &specs {
        for _ in 0..100_000 {
            let mut u = || rng.gen_range(spec.u_min..=spec.u_max);
            let (a, b, c) = (u(), u(), u());
            let xi = rng.gen_range(-1.0..=1.0);
            b_min = b_min.min(bstar_quadratic(a, b, c, xi, spec));
        }
    }
    let mut a_min = f64::INFINITY;
    for _ in 0..100_000 {
        let mut u = || rng.gen_range(-1.0..=1.0);
        a_min = a_min.min(a_fn(u(), u(), u()));
    }
    let delta = 0.1;
    let grid: Vec<f64> = (0..1000).map(|i| -0.5 + i as f64 / 999.0).collect();
    let vals: Vec<f64> = grid.iter().map(|&v| sgn_delta(v, delta)).collect();
    let odd = grid.iter().zip(&vals).all(|(&v, &s)| sgn_delta(-v, delta) == -s);
    let monotone = vals.windows(2).all(|w| w[0] <= w[1]);
    let bounded = vals.iter().all(|s| s.abs() <= 1.0);
    let ok = b_min >= BSTAR_FLOOR && a_min >= A_FLOOR && odd && monotone && bounded;
    report(8, "algebraic_properties", ok, format!("min B* {b_min:e}, min A {a_min:e}, sgn_delta odd {odd} monotone {monotone} bounded {bounded}"));
}

fn bin(args: &[&str]) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_degenflow")).args(args).output().unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stdout).into_owned())
}

#[test]
fn criterion_09_negative_controls() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good");
    let bad = dir.path().join("bad");
    let path = |p: &Path| p.to_str().unwrap().to_string();
    assert_eq!(bin(&["run", &path(&scenario_path("bump.cfg")), "-o", &path(&good)]).0, 0);
    assert_eq!(bin(&["run", &path(&scenario_path("corrupted_neumann.cfg")), "-o", &path(&bad)]).0, 0);
    let (good_code, _) = bin(&["verify", &path(&good.join("run.manifest"))]);
    let (bad_code, _) = bin(&["verify", &path(&bad.join("run.manifest"))]);
    let neumann_fails = fs::read_to_string(bad.join("report.txt")).unwrap().lines().filter(|l| l.starts_with("neumann.") && l.contains(" fail ")).count();

    // Out-of-range cell with a re-signed manifest, so only the range check can object.
    let manifest_path = good.join("run.manifest");
    let mut manifest = Manifest::parse(&fs::read_to_string(&manifest_path).unwrap()).unwrap();
    let rec = &mut manifest.snapshots[10];
    let snap = good.join(&rec.file);
    let text = fs::read_to_string(&snap).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut row: Vec<String> = lines[20].split(' ').map(String::from).collect();
    row[30] = "1.25".into();
    lines[20] = row.join(" ");
    let tampered = lines.join("\n") + "\n";
    fs::write(&snap, &tampered).unwrap();
    rec.sha256 = sha256_hex(tampered.as_bytes());
    fs::write(&manifest_path, manifest.to_text()).unwrap();
    let (tamper_code, _) = bin(&["verify", &path(&manifest_path)]);
    let tamper_report = fs::read_to_string(good.join("report.txt")).unwrap();
    let mp_fail = tamper_report.lines().any(|l| l.starts_with("max_principle fail"));
    let integrity_pass = tamper_report.lines().any(|l| l.starts_with("integrity pass"));

    let ok = good_code == 0 && bad_code != 0 && neumann_fails > 0 && tamper_code != 0 && mp_fail && integrity_pass;
    report(
        9,
        "negative_controls",
        ok,
        format!("clean verify exit {good_code}; corrupted Neumann exit {bad_code} with {neumann_fails} failing entries; injected cell exit {tamper_code}, max_principle fail {mp_fail}"),
    );
}

#[test]
fn criterion_10_nondegeneracy() {
    let spec = load("tadmor_tao.cfg").problem_spec().unwrap();
    let dirs = DirectionSet::Fibonacci(256);
    let coarse = nondegeneracy_scan(&spec, &dirs, 100_000, NONDEG_THRESHOLD).max_fraction;
    let fine = nondegeneracy_scan(&spec, &dirs, 100_000, NONDEG_THRESHOLD / 10.0).max_fraction;
    let ok = coarse <= NONDEG_MAX && fine < coarse;
    report(10, "nondegeneracy", ok, format!("max degenerate fraction {coarse:.5} at 1e-4, {fine:.5} at 1e-5"));
}
