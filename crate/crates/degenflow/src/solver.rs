//! Explicit finite-volume stepper for the viscous regularization with mixed
//! boundary conditions, and the ε-continuation driver.

use rayon::prelude::*;
use thiserror::Error;

use crate::domain::Grid;
use crate::field::Field;
use crate::model::ProblemSpec;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("static problem: wave speed and diffusivity both vanish")]
    StaticProblem,
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("non-finite value at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },
    #[error("step {step} (t = {t}) left the value interval at cell {cell:?}: {value}")]
    RangeViolation { step: usize, t: f64, cell: (usize, usize), value: f64 },
}

/// Face treatment on Γ'.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NeumannMode {
    /// Total flux exactly zero.
    ZeroFlux,
    /// Ghost copies the interior cell, so advective flux leaks through the wall.
    /// Only useful as a deliberately broken control.
    Extrapolate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Record {
    /// t = 0, requested times and t_end.
    Times,
    /// Every accepted step.
    EveryStep,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig<T> {
    pub eps: T,
    pub cfl: T,
    pub t_end: T,
    pub snapshot_times: Vec<T>,
    pub record: Record,
    /// Also record steps 1, 2, 4, 8, … for initial-trace diagnostics.
    pub dyadic_early: bool,
    pub neumann: NeumannMode,
}

impl<T: Scalar> SolverConfig<T> {
    pub fn new(eps: T, t_end: T) -> Self {
        Self {
            eps,
            cfl: T::lit(0.4),
            t_end,
            snapshot_times: Vec::new(),
            record: Record::Times,
            dyadic_early: false,
            neumann: NeumannMode::ZeroFlux,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.eps >= T::zero()) {
            return Err(SolverError::Config("eps must be >= 0".into()));
        }
        if !(self.cfl > T::zero() && self.cfl <= T::lit(0.5)) {
            return Err(SolverError::Config("cfl must lie in (0, 0.5]".into()));
        }
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            return Err(SolverError::Config("t_end must be positive".into()));
        }
        if self.snapshot_times.windows(2).any(|w| w[0] > w[1]) {
            return Err(SolverError::Config("snapshot times must be sorted".into()));
        }
        Ok(())
    }
}

/// Δt = cfl·min(Δx/max|f'|, Δx²/(2(max b22' + 2ε))).
pub fn stable_dt<T: Scalar>(spec: &ProblemSpec<T>, grid: &Grid<T>, config: &SolverConfig<T>) -> Result<T, SolverError> {
    let [a1, a2] = spec.wave_speeds();
    let speed = a1 + a2;
    let diff = spec.max_diffusivity().max(T::zero()) + T::lit(2.0) * config.eps;
    let dx = grid.dx_min();
    let adv = if speed > T::zero() { dx / speed } else { T::infinity() };
    let dif = if diff > T::zero() { dx * dx / (T::lit(2.0) * diff) } else { T::infinity() };
    let dt = adv.min(dif);
    if !dt.is_finite() {
        return Err(SolverError::StaticProblem);
    }
    Ok(config.cfl * dt)
}

/// Numerical fluxes of the scheme: Rusanov advection with the sup wave speed of the
/// value interval, centered differences of b22 along x'', and ε-viscosity on both axes.
#[derive(Clone, Debug)]
pub struct Scheme<'a, T> {
    pub spec: &'a ProblemSpec<T>,
    pub grid: &'a Grid<T>,
    pub eps: T,
    pub alpha: [T; 2],
    pub neumann: NeumannMode,
    ghost_lower: Vec<T>,
    ghost_upper: Vec<T>,
}

impl<'a, T: Scalar> Scheme<'a, T> {
    pub fn new(spec: &'a ProblemSpec<T>, grid: &'a Grid<T>, eps: T, neumann: NeumannMode) -> Self {
        let norm = |i: usize| (grid.x1(i) - grid.extent1()[0]) / grid.length1();
        let ghost_lower = (0..grid.n1()).map(|i| spec.a0.value(norm(i), false)).collect();
        let ghost_upper = (0..grid.n1()).map(|i| spec.a0.value(norm(i), true)).collect();
        Self { spec, grid, eps, alpha: spec.wave_speeds(), neumann, ghost_lower, ghost_upper }
    }

    /// a₀ ghost value below (`upper = false`) or above column `i`.
    pub fn ghost(&self, i: usize, upper: bool) -> T {
        if upper {
            self.ghost_upper[i]
        } else {
            self.ghost_lower[i]
        }
    }

    /// Flux across an x'-normal face, positive toward +x'.
    #[inline]
    pub fn flux1(&self, ul: T, ur: T) -> T {
        let f = &self.spec.flux_f1;
        let half = T::lit(0.5);
        half * (f.eval(ul) + f.eval(ur)) - half * self.alpha[0] * (ur - ul) - self.eps * (ur - ul) / self.grid.dx1()
    }

    /// Flux across an x''-normal face, positive toward +x''.
    #[inline]
    pub fn flux2(&self, ul: T, ur: T) -> T {
        let s = self.spec;
        let half = T::lit(0.5);
        half * (s.flux_f2.eval(ul) + s.flux_f2.eval(ur))
            - half * self.alpha[1] * (ur - ul)
            - (s.diff_b22.eval(ur) - s.diff_b22.eval(ul)) / self.grid.dx2()
            - self.eps * (ur - ul) / self.grid.dx2()
    }

    /// Flux through the Γ' face of a wall cell with value `u`.
    #[inline]
    pub fn wall_flux1(&self, u: T) -> T {
        match self.neumann {
            NeumannMode::ZeroFlux => T::zero(),
            NeumannMode::Extrapolate => self.flux1(u, u),
        }
    }

    /// x'-face fluxes, index `fi * n2 + j` for face `fi ∈ 0..=n1`.
    pub fn x1_fluxes(&self, u: &Field<T>) -> Vec<T> {
        let (n1, n2) = (u.n1(), u.n2());
        let mut out = vec![T::zero(); (n1 + 1) * n2];
        for j in 0..n2 {
            out[j] = self.wall_flux1(u.get(0, j));
            out[n1 * n2 + j] = self.wall_flux1(u.get(n1 - 1, j));
        }
        for fi in 1..n1 {
            for j in 0..n2 {
                out[fi * n2 + j] = self.flux1(u.get(fi - 1, j), u.get(fi, j));
            }
        }
        out
    }

    /// x''-face fluxes, index `i * (n2 + 1) + fj` for face `fj ∈ 0..=n2`.
    pub fn x2_fluxes(&self, u: &Field<T>) -> Vec<T> {
        let (n1, n2) = (u.n1(), u.n2());
        let mut out = vec![T::zero(); n1 * (n2 + 1)];
        for i in 0..n1 {
            let base = i * (n2 + 1);
            out[base] = self.flux2(self.ghost(i, false), u.get(i, 0));
            out[base + n2] = self.flux2(u.get(i, n2 - 1), self.ghost(i, true));
            for fj in 1..n2 {
                out[base + fj] = self.flux2(u.get(i, fj - 1), u.get(i, fj));
            }
        }
        out
    }

    /// One explicit Euler step of length `dt`.
    pub fn advance(&self, u: &Field<T>, dt: T) -> (Field<T>, StepFluxes<T>) {
        let (n1, n2) = (u.n1(), u.n2());
        let g1 = self.x1_fluxes(u);
        let g2 = self.x2_fluxes(u);
        let (l1, l2) = (dt / self.grid.dx1(), dt / self.grid.dx2());
        let mut next = u.clone();
        next.as_mut_slice().par_chunks_mut(n2).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                let d1 = g1[(i + 1) * n2 + j] - g1[i * n2 + j];
                let d2 = g2[i * (n2 + 1) + j + 1] - g2[i * (n2 + 1) + j];
                *v = *v - l1 * d1 - l2 * d2;
            }
        });
        let mut fl = StepFluxes { gamma1_out: T::zero(), gamma2_out: T::zero() };
        for j in 0..n2 {
            fl.gamma1_out = fl.gamma1_out + (g1[n1 * n2 + j] - g1[j]) * self.grid.dx2();
        }
        for i in 0..n1 {
            fl.gamma2_out = fl.gamma2_out + (g2[i * (n2 + 1) + n2] - g2[i * (n2 + 1)]) * self.grid.dx1();
        }
        (next, fl)
    }
}

/// Net outward flux rates through Γ' and Γ'' during one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepFluxes<T> {
    pub gamma1_out: T,
    pub gamma2_out: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepDiag<T> {
    pub t: T,
    pub dt: T,
    pub min: T,
    pub max: T,
    pub fluxes: StepFluxes<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<T> {
    pub step: usize,
    pub t: T,
    pub field: Field<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunArtifacts<T> {
    pub eps: T,
    pub cfl: T,
    pub dt_nominal: T,
    pub neumann: NeumannMode,
    /// Snapshots are consecutive scheme steps.
    pub every_step: bool,
    pub snapshots: Vec<Snapshot<T>>,
    pub dt_history: Vec<T>,
    pub diagnostics: Vec<StepDiag<T>>,
    pub rejected_steps: usize,
    /// ε∫∫|∇u|², interior faces.
    pub eps_grad_sq: T,
    /// ∫∫|∂_{x''} b(u)|², interior faces.
    pub grad_b_sq: T,
}

impl<T: Scalar> RunArtifacts<T> {
    pub fn final_field(&self) -> &Field<T> {
        &self.snapshots.last().expect("run has snapshots").field
    }

    pub fn t_end(&self) -> T {
        self.snapshots.last().map(|s| s.t).unwrap_or_else(T::zero)
    }

    /// Bare artifacts from loaded snapshots, without step diagnostics.
    pub fn from_snapshots(eps: T, cfl: T, neumann: NeumannMode, every_step: bool, snapshots: Vec<Snapshot<T>>) -> Self {
        let dt_history = if every_step { snapshots.windows(2).map(|w| w[1].t - w[0].t).collect() } else { Vec::new() };
        let dt_nominal = dt_history.first().copied().unwrap_or_else(T::zero);
        Self {
            eps,
            cfl,
            dt_nominal,
            neumann,
            every_step,
            snapshots,
            dt_history,
            diagnostics: Vec::new(),
            rejected_steps: 0,
            eps_grad_sq: T::zero(),
            grad_b_sq: T::zero(),
        }
    }
}

/// One step from `state` with the configured scheme and a given `dt`.
pub fn step<T: Scalar>(state: &Field<T>, spec: &ProblemSpec<T>, grid: &Grid<T>, config: &SolverConfig<T>, dt: T) -> Field<T> {
    Scheme::new(spec, grid, config.eps, config.neumann).advance(state, dt).0
}

fn energy_increments<T: Scalar>(u: &Field<T>, spec: &ProblemSpec<T>, grid: &Grid<T>) -> (T, T) {
    let (n1, n2) = (u.n1(), u.n2());
    let area = grid.cell_area();
    let mut grad = T::zero();
    let mut gb = T::zero();
    for i in 0..n1 {
        for j in 0..n2 {
            if i + 1 < n1 {
                let d = (u.get(i + 1, j) - u.get(i, j)) / grid.dx1();
                grad = grad + d * d * area;
            }
            if j + 1 < n2 {
                let d = (u.get(i, j + 1) - u.get(i, j)) / grid.dx2();
                grad = grad + d * d * area;
                let db = (spec.b.eval(u.get(i, j + 1)) - spec.b.eval(u.get(i, j))) / grid.dx2();
                gb = gb + db * db * area;
            }
        }
    }
    (grad, gb)
}

fn locate_violation<T: Scalar>(u: &Field<T>, lo: T, hi: T) -> Option<((usize, usize), T)> {
    for i in 0..u.n1() {
        for j in 0..u.n2() {
            let v = u.get(i, j);
            if !(v >= lo && v <= hi) {
                return Some(((i, j), v));
            }
        }
    }
    None
}

/// Advances u₀ to t_end, recording snapshots and diagnostics.
pub fn run<T: Scalar>(spec: &ProblemSpec<T>, grid: &Grid<T>, config: &SolverConfig<T>) -> Result<RunArtifacts<T>, SolverError> {
    config.validate()?;
    let dt0 = stable_dt(spec, grid, config)?;
    let scheme = Scheme::new(spec, grid, config.eps, config.neumann);
    let slack = T::lit(1e-10);
    let (lo, hi) = (spec.u_min - slack, spec.u_max + slack);
    let t_tiny = config.t_end * T::lit(1e-12);

    let mut targets: Vec<T> = config
        .snapshot_times
        .iter()
        .copied()
        .filter(|&t| t > T::zero() && t < config.t_end)
        .collect();
    targets.push(config.t_end);
    targets.dedup();

    let mut u = Field::from_fn(grid, |x1, x2| spec.u0.value(x1, x2));
    let mut out = RunArtifacts {
        eps: config.eps,
        cfl: config.cfl,
        dt_nominal: dt0,
        neumann: config.neumann,
        every_step: config.record == Record::EveryStep,
        snapshots: vec![Snapshot { step: 0, t: T::zero(), field: u.clone() }],
        dt_history: Vec::new(),
        diagnostics: Vec::new(),
        rejected_steps: 0,
        eps_grad_sq: T::zero(),
        grad_b_sq: T::zero(),
    };

    let mut t = T::zero();
    let mut n = 0usize;
    let mut target_idx = 0usize;
    while target_idx < targets.len() {
        let target = targets[target_idx];
        let mut dt = dt0.min(target - t);
        let (grad, gb) = energy_increments(&u, spec, grid);
        let (mut next, mut fl) = scheme.advance(&u, dt);
        if !next.is_finite() {
            return Err(SolverError::NonFinite { step: n + 1, t: (t + dt).as_f64() });
        }
        if locate_violation(&next, lo, hi).is_some() {
            out.rejected_steps += 1;
            dt = dt * T::lit(0.5);
            let retry = scheme.advance(&u, dt);
            next = retry.0;
            fl = retry.1;
            if let Some((cell, value)) = locate_violation(&next, lo, hi) {
                return Err(SolverError::RangeViolation { step: n + 1, t: (t + dt).as_f64(), cell, value: value.as_f64() });
            }
        }
        out.eps_grad_sq = out.eps_grad_sq + config.eps * grad * dt;
        out.grad_b_sq = out.grad_b_sq + gb * dt;
        n += 1;
        t = t + dt;
        let hit = (target - t).abs() <= t_tiny;
        if hit {
            t = target;
            target_idx += 1;
        }
        out.dt_history.push(dt);
        out.diagnostics.push(StepDiag { t, dt, min: next.min(), max: next.max(), fluxes: fl });
        let dyadic = config.dyadic_early && n.is_power_of_two();
        if hit || dyadic || config.record == Record::EveryStep {
            out.snapshots.push(Snapshot { step: n, t, field: next.clone() });
        }
        u = next;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuationTable<T> {
    pub eps: Vec<T>,
    /// ‖u^{ε_k} − u^{ε_{k+1}}‖_{L¹} at t_end.
    pub gaps: Vec<T>,
    /// ε∫∫|∇u^ε|² per ε.
    pub eps_grad_sq: Vec<T>,
    /// ∫∫|∂_{x''} b(u^ε)|² per ε.
    pub grad_b_sq: Vec<T>,
    pub finals: Vec<Field<T>>,
}

/// Runs every ε of a strictly decreasing list and tabulates the Cauchy gaps.
pub fn viscosity_continuation<T: Scalar>(
    spec: &ProblemSpec<T>,
    grid: &Grid<T>,
    base: &SolverConfig<T>,
    eps_list: &[T],
) -> Result<ContinuationTable<T>, SolverError> {
    if eps_list.is_empty() || eps_list.iter().any(|&e| !(e > T::zero())) {
        return Err(SolverError::Config("eps list must be non-empty and positive".into()));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(SolverError::Config("eps list must be strictly decreasing".into()));
    }
    let runs: Vec<RunArtifacts<T>> = eps_list
        .par_iter()
        .map(|&eps| {
            let cfg = SolverConfig { eps, record: Record::Times, snapshot_times: Vec::new(), ..base.clone() };
            run(spec, grid, &cfg)
        })
        .collect::<Result<_, _>>()?;
    let area = grid.cell_area();
    let finals: Vec<Field<T>> = runs.iter().map(|r| r.final_field().clone()).collect();
    let gaps = finals.windows(2).map(|w| w[0].l1_distance(&w[1], area)).collect();
    Ok(ContinuationTable {
        eps: eps_list.to_vec(),
        gaps,
        eps_grad_sq: runs.iter().map(|r| r.eps_grad_sq).collect(),
        grad_b_sq: runs.iter().map(|r| r.grad_b_sq).collect(),
        finals,
    })
}
