//! Audits a run against the defining properties of entropy solutions.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::domain::Grid;
use crate::entropy::{a_fn, h_field, k_field, kinetic_entropy, sgn, sgn_delta_prime};
use crate::field::Field;
use crate::model::{gauss3, ProblemSpec};
use crate::scalar::Scalar;
use crate::solver::{RunArtifacts, Scheme};
use crate::testfn::TestFunction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("runs are on different grids")]
    GridMismatch,
    #[error("runs have no common snapshot times")]
    NoCommonTimes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Info,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Info => "info",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckEntry {
    pub id: String,
    pub status: CheckStatus,
    pub defect: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckEntry {
    pub fn new(id: impl Into<String>, ok: bool, defect: f64, tolerance: f64, detail: String) -> Self {
        let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
        Self { id: id.into(), status, defect, tolerance, detail }
    }

    pub fn info(id: impl Into<String>, defect: f64, tolerance: f64, detail: String) -> Self {
        Self { id: id.into(), status: CheckStatus::Info, defect, tolerance, detail }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerificationReport {
    pub entries: Vec<CheckEntry>,
}

impl VerificationReport {
    pub fn extend(&mut self, entries: impl IntoIterator<Item = CheckEntry>) {
        self.entries.extend(entries);
        self.entries.sort_by(|a, b| a.id.cmp(&b.id));
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| e.status == CheckStatus::Fail)
    }

    pub fn get(&self, id: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// `check_id status defect tolerance` lines and a trailing hash line.
    pub fn to_text(&self, manifest_hash: &str) -> String {
        let mut s = String::new();
        for e in &self.entries {
            s.push_str(&format!("{} {} {:e} {:e}\n", e.id, e.status, e.defect, e.tolerance));
        }
        s.push_str(&format!("manifest_hash {manifest_hash}\n"));
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions<T> {
    /// Global multiplier on every tolerance.
    pub tol_scale: T,
    /// Max-principle slack relative to u_max − u_min.
    pub max_principle_rel: T,
    /// C in the scheme-order tolerance C·(Δx + Δt).
    pub order_constant: T,
    /// Absolute floor for sign-type checks (entropy, kinetic).
    pub sign_tol: T,
    /// Base δ for the regularized-sign dissipation; δ ∈ {4,2,1}·unit.
    /// `None` uses (u_max − u_min)·2⁻²⁶.
    pub delta_unit: Option<T>,
    /// Admissible fitted constant in the Dirichlet inequalities.
    pub c_star_cap: T,
    pub contraction_rel: T,
}

impl<T: Scalar> Default for VerifyOptions<T> {
    fn default() -> Self {
        Self {
            tol_scale: T::one(),
            max_principle_rel: T::lit(1e-12),
            order_constant: T::lit(0.01),
            sign_tol: T::lit(1e-10),
            delta_unit: None,
            c_star_cap: T::lit(10.0),
            contraction_rel: T::lit(1e-10),
        }
    }
}

impl<T: Scalar> VerifyOptions<T> {
    fn order_tol(&self, grid: &Grid<T>, run: &RunArtifacts<T>) -> T {
        self.tol_scale * self.order_constant * (grid.dx1().max(grid.dx2()) + run.dt_nominal)
    }
}

pub fn check_max_principle<T: Scalar>(run: &RunArtifacts<T>, spec: &ProblemSpec<T>, opts: &VerifyOptions<T>) -> CheckEntry {
    let tol = opts.tol_scale * opts.max_principle_rel * spec.range();
    let mut worst = T::neg_infinity();
    let mut at = (T::zero(), (0, 0), T::zero());
    let mut margin = T::infinity();
    for s in &run.snapshots {
        for i in 0..s.field.n1() {
            for j in 0..s.field.n2() {
                let v = s.field.get(i, j);
                let excess = (spec.u_min - v).max(v - spec.u_max);
                let excess = if excess.is_nan() { T::infinity() } else { excess };
                if excess > worst {
                    worst = excess;
                    at = (s.t, (i, j), v);
                }
                margin = margin.min((v - spec.u_min).min(spec.u_max - v));
            }
        }
    }
    let defect = worst.max(T::zero());
    let detail = if worst > T::zero() {
        format!("worst excursion u={} at t={} cell={:?}", at.2, at.0, at.1)
    } else {
        format!("margin {margin}")
    };
    CheckEntry::new("max_principle", defect <= tol, defect.as_f64(), tol.as_f64(), detail)
}

/// Separable test-function samples on the grid.
struct Sampled<T> {
    p1: Vec<T>,
    p2: Vec<T>,
    /// ψ₂ at x''-faces.
    f2: Vec<T>,
    d1: Vec<T>,
    theta: Vec<T>,
}

impl<T: Scalar> Sampled<T> {
    fn new(phi: &TestFunction<T>, grid: &Grid<T>, times: &[T]) -> Self {
        Self {
            p1: (0..grid.n1()).map(|i| phi.x1.value(grid.x1(i))).collect(),
            p2: (0..grid.n2()).map(|j| phi.x2.value(grid.x2(j))).collect(),
            f2: (0..=grid.n2()).map(|j| phi.x2.value(grid.x2_face(j))).collect(),
            d1: (0..grid.n1()).map(|i| phi.x1.deriv(grid.x1(i))).collect(),
            theta: times.iter().map(|&t| phi.t.value(t)).collect(),
        }
    }

    fn active(&self, n: usize) -> bool {
        self.theta[n] != T::zero() || self.theta[n + 1] != T::zero()
    }

    /// Σ_c g_c ψ₁ψ₂.
    fn pair_cells(&self, g: &Field<T>) -> T {
        let mut s = T::zero();
        for (i, &a) in self.p1.iter().enumerate() {
            if a == T::zero() {
                continue;
            }
            let row = g.row(i);
            let r = row.iter().zip(&self.p2).fold(T::zero(), |acc, (&v, &b)| acc + v * b);
            s = s + a * r;
        }
        s
    }

    /// Σ over interior x'-faces of G·(ψ₁(x_i) − ψ₁(x_{i−1}))/Δx₁·ψ₂, faces indexed as in `Scheme::x1_fluxes`.
    fn pair_x1_faces(&self, g: &[T], n2: usize, dx1: T) -> T {
        let n1 = self.p1.len();
        let mut s = T::zero();
        for fi in 1..n1 {
            let dpsi = (self.p1[fi] - self.p1[fi - 1]) / dx1;
            if dpsi == T::zero() {
                continue;
            }
            let r = (0..n2).fold(T::zero(), |acc, j| acc + g[fi * n2 + j] * self.p2[j]);
            s = s + dpsi * r;
        }
        s
    }

    fn pair_x2_faces(&self, g: &[T], n2: usize, dx2: T) -> T {
        let mut s = T::zero();
        for (i, &a) in self.p1.iter().enumerate() {
            if a == T::zero() {
                continue;
            }
            let base = i * (n2 + 1);
            let r = (1..n2).fold(T::zero(), |acc, fj| acc + g[base + fj] * (self.p2[fj] - self.p2[fj - 1]) / dx2);
            s = s + a * r;
        }
        s
    }
}

fn times<T: Scalar>(run: &RunArtifacts<T>) -> Vec<T> {
    run.snapshots.iter().map(|s| s.t).collect()
}

/// Entropy pairing Σₙ[Σ_c A η(uⁿ⁺¹)(φⁿ⁺¹−φⁿ) + Δtₙ Σ_faces A G·Dφⁿ] for every test function,
/// with G the numerical entropy flux built from the scheme's face fluxes.
fn entropy_pairing<T: Scalar>(
    run: &RunArtifacts<T>,
    spec: &ProblemSpec<T>,
    grid: &Grid<T>,
    tests: &[TestFunction<T>],
    eta: impl Fn(T) -> T + Sync,
    g1: impl Fn(&Scheme<T>, T, T) -> T + Sync,
    g2: impl Fn(&Scheme<T>, T, T) -> T + Sync,
) -> Vec<T> {
    let scheme = Scheme::new(spec, grid, run.eps, run.neumann);
    let ts = times(run);
    let sampled: Vec<Sampled<T>> = tests.iter().map(|p| Sampled::new(p, grid, &ts)).collect();
    let (n1, n2) = (grid.n1(), grid.n2());
    let area = grid.cell_area();
    let steps: Vec<usize> = (0..run.snapshots.len().saturating_sub(1))
        .filter(|&n| sampled.iter().any(|s| s.active(n)))
        .collect();
    let partial: Vec<Vec<T>> = steps
        .par_iter()
        .map(|&n| {
            let u = &run.snapshots[n].field;
            let next = &run.snapshots[n + 1].field;
            let dt = ts[n + 1] - ts[n];
            let eta_next = next.map(&eta);
            let mut x1 = vec![T::zero(); (n1 + 1) * n2];
            for fi in 1..n1 {
                for j in 0..n2 {
                    x1[fi * n2 + j] = g1(&scheme, u.get(fi - 1, j), u.get(fi, j));
                }
            }
            let mut x2 = vec![T::zero(); n1 * (n2 + 1)];
            for i in 0..n1 {
                for fj in 1..n2 {
                    x2[i * (n2 + 1) + fj] = g2(&scheme, u.get(i, fj - 1), u.get(i, fj));
                }
            }
            sampled
                .iter()
                .map(|s| {
                    if !s.active(n) {
                        return T::zero();
                    }
                    let time = (s.theta[n + 1] - s.theta[n]) * s.pair_cells(&eta_next);
                    let flux = s.theta[n] * dt * (s.pair_x1_faces(&x1, n2, grid.dx1()) + s.pair_x2_faces(&x2, n2, grid.dx2()));
                    area * (time + flux)
                })
                .collect()
        })
        .collect();
    let mut out = vec![T::zero(); tests.len()];
    for p in partial {
        for (o, v) in out.iter_mut().zip(p) {
            *o = *o + v;
        }
    }
    out
}

/// β_δ(u) = ∫ₖᵘ sqrt(sgn_δ'(s−k)·b22'(s)) ds, so that (∂β_δ(u))² = sgn_δ'(u−k)(∂β22(u))².
fn beta_delta<T: Scalar>(spec: &ProblemSpec<T>, k: T, delta: T, u: T) -> T {
    let upper = u.max(k - delta).min(k + delta);
    gauss3(k, upper, 32, |s| (sgn_delta_prime(s - k, delta).max(T::zero()) * spec.diff_b22.deriv(s).max(T::zero())).sqrt())
}

fn dissipation<T: Scalar>(
    run: &RunArtifacts<T>,
    spec: &ProblemSpec<T>,
    grid: &Grid<T>,
    tests: &[TestFunction<T>],
    k: T,
    delta: T,
) -> Vec<T> {
    let ts = times(run);
    let (n1, n2) = (grid.n1(), grid.n2());
    let area = grid.cell_area();
    let (lo, hi) = (beta_delta(spec, k, delta, k - delta), beta_delta(spec, k, delta, k + delta));
    let beta = |u: T| {
        if u <= k - delta {
            lo
        } else if u >= k + delta {
            hi
        } else {
            beta_delta(spec, k, delta, u)
        }
    };
    let sampled: Vec<Sampled<T>> = tests.iter().map(|p| Sampled::new(p, grid, &ts)).collect();
    let mut out = vec![T::zero(); tests.len()];
    for n in 0..run.snapshots.len().saturating_sub(1) {
        if !sampled.iter().any(|s| s.theta[n] != T::zero()) {
            continue;
        }
        let bf = run.snapshots[n].field.map(beta);
        let dt = ts[n + 1] - ts[n];
        for (o, s) in out.iter_mut().zip(&sampled) {
            if s.theta[n] == T::zero() {
                continue;
            }
            let mut acc = T::zero();
            for i in 0..n1 {
                if s.p1[i] == T::zero() {
                    continue;
                }
                for fj in 1..n2 {
                    let d = (bf.get(i, fj) - bf.get(i, fj - 1)) / grid.dx2();
                    acc = acc + d * d * s.p1[i] * s.f2[fj];
                }
            }
            *o = *o + s.theta[n] * dt * area * acc;
        }
    }
    out
}

/// Kruzhkov entropy inequalities for every (k, φ): discrete left side minus the
/// regularized-sign dissipation, maximized over δ ∈ {4,2,1}·unit.
pub fn check_entropy_inequality<T: Scalar>(
    run: &RunArtifacts<T>,
    spec: &ProblemSpec<T>,
    grid: &Grid<T>,
    k_list: &[T],
    tests: &[TestFunction<T>],
    opts: &VerifyOptions<T>,
) -> Vec<CheckEntry> {
    let unit = opts.delta_unit.unwrap_or_else(|| spec.range() * T::lit(2f64.powi(-26)));
    let deltas = [T::lit(4.0) * unit, T::lit(2.0) * unit, unit];
    let tol = opts.sign_tol * opts.tol_scale;
    let mut entries = Vec::new();
    for (ki, &k) in k_list.iter().enumerate() {
        let lhs = entropy_pairing(
            run,
            spec,
            grid,
            tests,
            |u| (u - k).abs(),
            |s, a, b| s.flux1(a.max(k), b.max(k)) - s.flux1(a.min(k), b.min(k)),
            |s, a, b| s.flux2(a.max(k), b.max(k)) - s.flux2(a.min(k), b.min(k)),
        );
        let mut rhs = vec![T::zero(); tests.len()];
        for &d in &deltas {
            for (r, v) in rhs.iter_mut().zip(dissipation(run, spec, grid, tests, k, d)) {
                *r = r.max(v);
            }
        }
        for (pi, phi) in tests.iter().enumerate() {
            let defect = lhs[pi] - rhs[pi];
            let id = format!("entropy.k{ki}.{}", phi.id);
            let detail = format!("k={k} lhs={} dissipation={}", lhs[pi], rhs[pi]);
            if run.every_step {
                entries.push(CheckEntry::new(id, defect >= -tol, defect.as_f64(), tol.as_f64(), detail));
            } else {
                entries.push(CheckEntry::info(id, defect.as_f64(), tol.as_f64(), format!("{detail} (snapshots are not consecutive steps)")));
            }
        }
    }
    entries
}

/// Kinetic entropy production for η_ξ(u) = (ξ−u)₊ − (ξ)₊ paired with nonnegative bumps.
pub fn check_kinetic_defect<T: Scalar>(
    run: &RunArtifacts<T>,
    spec: &ProblemSpec<T>,
    grid: &Grid<T>,
    xi_list: &[T],
    tests: &[TestFunction<T>],
    opts: &VerifyOptions<T>,
) -> Vec<CheckEntry> {
    xi_list
        .iter()
        .enumerate()
        .map(|(xi_idx, &xi)| {
            let prod = entropy_pairing(
                run,
                spec,
                grid,
                tests,
                |u| kinetic_entropy(xi, u),
                |s, a, b| s.flux1(xi, xi) - s.flux1(a.min(xi), b.min(xi)),
                |s, a, b| s.flux2(xi, xi) - s.flux2(a.min(xi), b.min(xi)),
            );
            let (mut worst, mut at) = (T::infinity(), 0);
            for (i, &p) in prod.iter().enumerate() {
                if p < worst {
                    worst = p;
                    at = i;
                }
            }
            let tol = opts.sign_tol * opts.tol_scale;
            let id = format!("kinetic.xi{xi_idx}");
            let detail = format!("xi={xi} min production {} at {}", worst, tests[at].id);
            if run.every_step {
                CheckEntry::new(id, worst >= -tol, worst.as_f64(), tol.as_f64(), detail)
            } else {
                CheckEntry::info(id, worst.as_f64(), tol.as_f64(), detail)
            }
        })
        .collect()
}

/// Per-test kinetic productions, exposed for diagnostics.
pub fn kinetic_productions<T: Scalar>(
    run: &RunArtifacts<T>,
    spec: &ProblemSpec<T>,
    grid: &Grid<T>,
    xi: T,
    tests: &[TestFunction<T>],
) -> Vec<T> {
    entropy_pairing(
        run,
        spec,
        grid,
        tests,
        |u| kinetic_entropy(xi, u),
        |s, a, b| s.flux1(xi, xi) - s.flux1(a.min(xi), b.min(xi)),
        |s, a, b| s.flux2(xi, xi) - s.flux2(a.min(xi), b.min(xi)),
    )
}

/// Residual of the weak form with test functions that do not vanish on Γ'.
pub fn neumann_residual<T: Scalar>(run: &RunArtifacts<T>, spec: &ProblemSpec<T>, grid: &Grid<T>, phi: &TestFunction<T>) -> T {
    let ts = times(run);
    let s = Sampled::new(phi, grid, &ts);
    let (n1, n2) = (grid.n1(), grid.n2());
    let area = grid.cell_area();
    let eps = run.eps;
    let mut total = T::zero();
    for n in 0..run.snapshots.len().saturating_sub(1) {
        if !s.active(n) {
            continue;
        }
        let u = &run.snapshots[n].field;
        let next = &run.snapshots[n + 1].field;
        let dt = ts[n + 1] - ts[n];
        let th = s.theta[n];
        let mut time = T::zero();
        let mut space = T::zero();
        for i in 0..n1 {
            for j in 0..n2 {
                let v = u.get(i, j);
                time = time + next.get(i, j) * s.p1[i] * s.p2[j];
                space = space + spec.flux_f1.eval(v) * s.d1[i] * s.p2[j];
                if i > 0 {
                    let dpsi = (s.p1[i] - s.p1[i - 1]) / grid.dx1();
                    let du = (v - u.get(i - 1, j)) / grid.dx1();
                    space = space - eps * du * dpsi * s.p2[j];
                }
                if j > 0 {
                    let dpsi = (s.p2[j] - s.p2[j - 1]) / grid.dx2();
                    let w = u.get(i, j - 1);
                    let db = (spec.diff_b22.eval(v) - spec.diff_b22.eval(w)) / grid.dx2();
                    let du = (v - w) / grid.dx2();
                    let f2 = (spec.flux_f2.eval(v) + spec.flux_f2.eval(w)) * T::lit(0.5);
                    space = space + (f2 - db - eps * du) * dpsi * s.p1[i];
                }
            }
        }
        total = total + area * ((s.theta[n + 1] - th) * time + dt * th * space);
    }
    total
}

pub fn check_neumann_weak_form<T: Scalar>(
    run: &RunArtifacts<T>,
    spec: &ProblemSpec<T>,
    grid: &Grid<T>,
    tests: &[TestFunction<T>],
    opts: &VerifyOptions<T>,
) -> Vec<CheckEntry> {
    let order = opts.order_tol(grid, run);
    let t_end = run.t_end();
    tests
        .par_iter()
        .map(|phi| {
            let r = neumann_residual(run, spec, grid, phi);
            let norm = phi.norm(t_end, grid.area());
            let defect = r.abs() / norm;
            CheckEntry::new(format!("neumann.{}", phi.id), defect <= order, defect.as_f64(), order.as_f64(), format!("residual {r}"))
        })
        .collect()
}

/// Extended boundary datum sampled at cell centers.
pub fn a0_field<T: Scalar>(spec: &ProblemSpec<T>, grid: &Grid<T>) -> Field<T> {
    let mid = grid.extent2()[0] + grid.length2() * T::lit(0.5);
    Field::from_fn(grid, |x1, x2| spec.a0.value((x1 - grid.extent1()[0]) / grid.length1(), x2 >= mid))
}

/// |div K(a₀,k)| at cell centers from exact derivatives of a₀(x').
pub fn mu0_density<T: Scalar>(spec: &ProblemSpec<T>, grid: &Grid<T>, k: T) -> Field<T> {
    Field::from_fn(grid, |x1, _| {
        let s = (x1 - grid.extent1()[0]) / grid.length1();
        let a = spec.a0.value(s, false);
        let da = spec.a0.slope(s) / grid.length1();
        (sgn(a - k) * spec.flux_f1.deriv(a) * da).abs()
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirichletFit<T> {
    /// Smallest C making the inequality with |u − a₀| hold for every φ.
    pub c_star_value: T,
    /// Same for the three-argument inequality over every k.
    pub c_star_triple: T,
    /// Per k outside the value interval.
    pub c_star_outside: Vec<(T, T)>,
    pub trace_defect: T,
    pub trace_tol: T,
    pub h1_norm: T,
}

pub fn fit_dirichlet<T: Scalar>(
    run: &RunArtifacts<T>,
    spec: &ProblemSpec<T>,
    grid: &Grid<T>,
    k_list: &[T],
    tests: &[TestFunction<T>],
) -> DirichletFit<T> {
    let ts = times(run);
    let area = grid.cell_area();
    let a0 = a0_field(spec, grid);
    let (n1, n2) = (grid.n1(), grid.n2());
    let steps = run.snapshots.len().saturating_sub(1);

    // Pairings of (time weight, space field, vector field) against every φ.
    let pair = |n: usize, phi: &TestFunction<T>, time_f: &Field<T>, vec_f: &crate::field::VectorField<T>, dens: Option<&Field<T>>| {
        let (t0, t1) = (ts[n], ts[n + 1]);
        let dt = t1 - t0;
        let mut lhs = T::zero();
        let mut mass = T::zero();
        let mut mu = T::zero();
        for i in 0..n1 {
            let x1 = grid.x1(i);
            for j in 0..n2 {
                let x2 = grid.x2(j);
                let p0 = phi.value(t0, x1, x2);
                let p1 = phi.value(t1, x1, x2);
                if p0 == T::zero() && p1 == T::zero() {
                    continue;
                }
                let g = phi.grad(t0, x1, x2);
                lhs = lhs + time_f.get(i, j) * (p1 - p0) - dt * (vec_f.c1.get(i, j) * g[1] + vec_f.c2.get(i, j) * g[2]);
                mass = mass + dt * p0;
                if let Some(d) = dens {
                    mu = mu + dt * p0 * d.get(i, j);
                }
            }
        }
        (lhs * area, mass * area, mu * area)
    };

    let mut value_fit = T::zero();
    {
        let mut acc: Vec<(T, T)> = vec![(T::zero(), T::zero()); tests.len()];
        for n in 0..steps {
            let u = &run.snapshots[n].field;
            let next = &run.snapshots[n + 1].field;
            let time_f = next.zip_map(&a0, |a, b| (a - b).abs());
            let kf = k_field(u, &a0, grid, spec);
            for (a, phi) in acc.iter_mut().zip(tests) {
                let (l, m, _) = pair(n, phi, &time_f, &kf, None);
                a.0 = a.0 + l;
                a.1 = a.1 + m;
            }
        }
        for (l, m) in acc {
            if m > T::zero() {
                value_fit = value_fit.max((-l).max(T::zero()) / m);
            }
        }
    }

    let triple = |k: T| {
        let dens = mu0_density(spec, grid, k);
        let mut acc: Vec<(T, T, T)> = vec![(T::zero(), T::zero(), T::zero()); tests.len()];
        for n in 0..steps {
            let u = &run.snapshots[n].field;
            let next = &run.snapshots[n + 1].field;
            let time_f = next.zip_map(&a0, |a, b| a_fn(a, k, b));
            let hf = h_field(u, k, &a0, grid, spec);
            for (a, phi) in acc.iter_mut().zip(tests) {
                let (l, m, mu) = pair(n, phi, &time_f, &hf, Some(&dens));
                a.0 = a.0 + l;
                a.1 = a.1 + m;
                a.2 = a.2 + mu;
            }
        }
        acc.into_iter()
            .filter(|a| a.1 > T::zero())
            .fold(T::zero(), |c, (l, m, mu)| c.max((-(l + mu)).max(T::zero()) / m))
    };
    let inside: Vec<T> = k_list.iter().copied().filter(|&k| k >= spec.u_min && k <= spec.u_max).collect();
    let c_star_triple = inside.par_iter().map(|&k| triple(k)).reduce(T::zero, |a, b| a.max(b));
    let outside = [spec.u_min - T::lit(0.25) * spec.range(), spec.u_max + T::lit(0.25) * spec.range()];
    let c_star_outside = outside.iter().map(|&k| (k, triple(k))).collect();

    // w(t, x'') = ∫ |b(u) − b(a₀)| φ dx'; H¹ seminorm and wall values with zero ghost.
    let mut trace_defect = T::zero();
    let mut slope_max = T::zero();
    let mut h1 = T::zero();
    for n in 0..run.snapshots.len() {
        let u = &run.snapshots[n].field;
        let t = ts[n];
        let dt = if n + 1 < ts.len() { ts[n + 1] - t } else { T::zero() };
        for phi in tests {
            if phi.t.value(t) == T::zero() {
                continue;
            }
            let w: Vec<T> = (0..n2)
                .map(|j| {
                    (0..n1).fold(T::zero(), |s, i| {
                        let d = (spec.b.eval(u.get(i, j)) - spec.b.eval(a0.get(i, j))).abs();
                        s + d * phi.value(t, grid.x1(i), grid.x2(j))
                    }) * grid.dx1()
                })
                .collect();
            trace_defect = trace_defect.max(w[0].abs() * T::lit(0.5)).max(w[n2 - 1].abs() * T::lit(0.5));
            let mut ext = vec![T::zero()];
            ext.extend(w.iter().copied());
            ext.push(T::zero());
            for win in ext.windows(2) {
                let d = (win[1] - win[0]) / grid.dx2();
                slope_max = slope_max.max(d.abs());
                h1 = h1 + dt * d * d * grid.dx2();
            }
        }
    }
    let trace_tol = grid.dx2() * (T::one() + slope_max);
    DirichletFit { c_star_value: value_fit, c_star_triple, c_star_outside, trace_defect, trace_tol, h1_norm: h1.sqrt() }
}

pub fn check_dirichlet_inequalities<T: Scalar>(
    run: &RunArtifacts<T>,
    spec: &ProblemSpec<T>,
    grid: &Grid<T>,
    k_list: &[T],
    tests: &[TestFunction<T>],
    opts: &VerifyOptions<T>,
) -> Vec<CheckEntry> {
    if !spec.a0.independent_of_x2() {
        return vec![CheckEntry::info("dirichlet", 0.0, 0.0, "needs boundary data independent of x''".into())];
    }
    let fit = fit_dirichlet(run, spec, grid, k_list, tests);
    let cap = opts.c_star_cap * opts.tol_scale;
    let mut out = vec![
        CheckEntry::new("dirichlet.c_star", fit.c_star_value <= cap, fit.c_star_value.as_f64(), cap.as_f64(), "fitted constant, |u-a0| form".into()),
        CheckEntry::new(
            "dirichlet.c_star_triple",
            fit.c_star_triple <= cap,
            fit.c_star_triple.as_f64(),
            cap.as_f64(),
            "fitted constant, A/H form over k in [u_min,u_max]".into(),
        ),
        CheckEntry::new(
            "dirichlet.h1_trace",
            fit.h1_norm.is_finite() && fit.trace_defect <= fit.trace_tol * opts.tol_scale,
            fit.trace_defect.as_f64(),
            (fit.trace_tol * opts.tol_scale).as_f64(),
            format!("H1 seminorm {}", fit.h1_norm),
        ),
    ];
    for (idx, (k, c)) in fit.c_star_outside.iter().enumerate() {
        out.push(CheckEntry::info(format!("dirichlet.outside{idx}"), c.as_f64(), cap.as_f64(), format!("k={k}")));
    }
    out
}

/// ‖u(tⱼ) − u₀‖_{L¹} along the recorded dyadic steps 1, 2, 4, ….
pub fn initial_distances<T: Scalar>(run: &RunArtifacts<T>, spec: &ProblemSpec<T>, grid: &Grid<T>) -> Vec<(T, T)> {
    let u0 = Field::from_fn(grid, |x1, x2| spec.u0.value(x1, x2));
    run.snapshots
        .iter()
        .filter(|s| s.step > 0 && s.step.is_power_of_two())
        .map(|s| (s.t, s.field.l1_distance(&u0, grid.cell_area())))
        .collect()
}

/// ‖L_h u₀‖_{L¹}: L¹ norm of the scheme's spatial operator applied to u₀.
pub fn generator_norm<T: Scalar>(run: &RunArtifacts<T>, spec: &ProblemSpec<T>, grid: &Grid<T>) -> T {
    let u0 = Field::from_fn(grid, |x1, x2| spec.u0.value(x1, x2));
    let scheme = Scheme::new(spec, grid, run.eps, run.neumann);
    let h = T::lit(1e-3);
    let (next, _) = scheme.advance(&u0, h);
    next.l1_distance(&u0, grid.cell_area()) / h
}

pub fn check_initial_condition<T: Scalar>(
    run: &RunArtifacts<T>,
    spec: &ProblemSpec<T>,
    grid: &Grid<T>,
    opts: &VerifyOptions<T>,
) -> CheckEntry {
    let seq = initial_distances(run, spec, grid);
    if seq.is_empty() {
        return CheckEntry::info("initial", 0.0, 0.0, "no dyadic snapshots recorded".into());
    }
    let lip = generator_norm(run, spec, grid);
    let (t0, e0) = seq[0];
    let bound = T::lit(2.0) * opts.tol_scale * t0 * lip + T::lit(1e-14);
    let monotone = seq.windows(2).all(|w| w[0].1 <= w[1].1 * (T::one() + opts.contraction_rel) + T::lit(1e-14));
    let ok = monotone && e0 <= bound;
    let detail = format!("first distance {e0} at t={t0}, {} dyadic samples, monotone={monotone}", seq.len());
    CheckEntry::new("initial", ok, e0.as_f64(), bound.as_f64(), detail)
}

/// ‖u(t) − v(t)‖_{L¹} at snapshot times shared by both runs.
pub fn contraction_gaps<T: Scalar>(run_u: &RunArtifacts<T>, run_v: &RunArtifacts<T>, grid: &Grid<T>) -> Result<Vec<(T, T)>, VerifyError> {
    let mut out = Vec::new();
    for su in &run_u.snapshots {
        if let Some(sv) = run_v.snapshots.iter().find(|sv| sv.step == su.step && sv.t == su.t) {
            if !su.field.same_shape(&sv.field) {
                return Err(VerifyError::GridMismatch);
            }
            out.push((su.t, su.field.l1_distance(&sv.field, grid.cell_area())));
        }
    }
    if out.is_empty() {
        return Err(VerifyError::NoCommonTimes);
    }
    Ok(out)
}

pub fn check_contraction<T: Scalar>(
    run_u: &RunArtifacts<T>,
    run_v: &RunArtifacts<T>,
    spec_u: &ProblemSpec<T>,
    spec_v: &ProblemSpec<T>,
    grid: &Grid<T>,
    opts: &VerifyOptions<T>,
) -> Result<CheckEntry, VerifyError> {
    let gaps = contraction_gaps(run_u, run_v, grid)?;
    let rel = opts.contraction_rel * opts.tol_scale;
    let worst = gaps
        .windows(2)
        .map(|w| if w[0].1 > T::zero() { (w[1].1 - w[0].1) / w[0].1 } else if w[1].1 > T::zero() { T::infinity() } else { T::zero() })
        .fold(T::neg_infinity(), |m, v| m.max(v))
        .max(T::zero());
    let detail = format!("{} samples, initial gap {}, final gap {}", gaps.len(), gaps[0].1, gaps[gaps.len() - 1].1);
    if spec_u.a0 != spec_v.a0 {
        return Ok(CheckEntry::info("contraction", worst.as_f64(), rel.as_f64(), format!("{detail}; boundary data differ")));
    }
    Ok(CheckEntry::new("contraction", worst <= rel, worst.as_f64(), rel.as_f64(), detail))
}
