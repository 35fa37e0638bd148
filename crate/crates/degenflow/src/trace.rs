//! Discrete normal traces: Gauss–Green pairing, boundary-layer limits, the
//! strong-trace diagnostic on Γ' and traces at t = 0.

use thiserror::Error;

use crate::domain::{deformation_layers, DomainError, Grid};
use crate::field::{Field, VectorField};
use crate::model::ProblemSpec;
use crate::scalar::Scalar;
use crate::solver::RunArtifacts;
use crate::verify::{CheckEntry, CheckStatus, VerifyOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("depths must be strictly decreasing")]
    NotDecreasing,
    #[error("depth {0} is not resolvable: it shares a cell column with a neighboring depth or lies below half a cell")]
    Unresolvable(f64),
    #[error("band of {0} cells is below grid resolution")]
    BandTooThin(usize),
    #[error("run has fewer than three snapshots")]
    TooFewSnapshots,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceProfile<T> {
    pub s_values: Vec<T>,
    pub columns: Vec<usize>,
    /// Per depth: values on both wall columns for every snapshot, snapshot-major.
    pub profiles: Vec<Vec<T>>,
    pub l1_gaps: Vec<T>,
}

impl<T: Scalar> TraceProfile<T> {
    /// Innermost-layer profile, the estimate of the trace u^τ.
    pub fn u_tau(&self) -> &[T] {
        self.profiles.last().map(|p| p.as_slice()).unwrap_or(&[])
    }

    /// Each gap is at most (1 + noise) times the previous one.
    pub fn gaps_decreasing(&self, noise: T) -> bool {
        self.l1_gaps.windows(2).all(|w| w[1] <= w[0] * (T::one() + noise))
    }
}

fn trapezoid_weights<T: Scalar>(ts: &[T]) -> Vec<T> {
    if ts.len() < 2 {
        return vec![T::one(); ts.len()];
    }
    let half = T::lit(0.5);
    (0..ts.len())
        .map(|n| {
            let left = if n > 0 { ts[n] - ts[n - 1] } else { T::zero() };
            let right = if n + 1 < ts.len() { ts[n + 1] - ts[n] } else { T::zero() };
            half * (left + right)
        })
        .collect()
}

/// Restricts every snapshot to the deformation layers at depths `s_values`.
pub fn extract_trace_profile<T: Scalar>(run: &RunArtifacts<T>, grid: &Grid<T>, s_values: &[T]) -> Result<TraceProfile<T>, TraceError> {
    if s_values.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(TraceError::NotDecreasing);
    }
    let layers = deformation_layers(grid, s_values)?;
    for (idx, l) in layers.iter().enumerate() {
        let clash = idx > 0 && layers[idx - 1].column == l.column;
        if clash || l.s < grid.dx1() * T::lit(0.5) * (T::one() - T::lit(1e-9)) {
            return Err(TraceError::Unresolvable(l.s.as_f64()));
        }
    }
    let ts: Vec<T> = run.snapshots.iter().map(|s| s.t).collect();
    let w = trapezoid_weights(&ts);
    let profiles: Vec<Vec<T>> = layers
        .iter()
        .map(|l| {
            run.snapshots
                .iter()
                .flat_map(|s| l.cells.iter().map(move |&(i, j)| s.field.get(i, j)))
                .collect()
        })
        .collect();
    let per = 2 * grid.n2();
    let l1_gaps = profiles
        .windows(2)
        .map(|p| {
            p[0].chunks(per)
                .zip(p[1].chunks(per))
                .zip(&w)
                .fold(T::zero(), |acc, ((a, b), &wt)| {
                    acc + wt * a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + (x - y).abs()) * grid.dx2()
                })
        })
        .collect();
    Ok(TraceProfile {
        s_values: s_values.to_vec(),
        columns: layers.iter().map(|l| l.column).collect(),
        profiles,
        l1_gaps,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussGreen<T> {
    /// ∫∇g·F + ∫g div F.
    pub volume: T,
    /// Σ over boundary faces of (F·ν) g |face|.
    pub boundary: T,
    pub residual: T,
}

/// Divergence from cell samples: centered inside, one-sided first order at the walls.
pub fn divergence<T: Scalar>(f: &VectorField<T>, grid: &Grid<T>) -> Field<T> {
    let (n1, n2) = (grid.n1(), grid.n2());
    let d = |g: &Field<T>, i: usize, j: usize, axis: usize| -> T {
        let (n, h, at) = if axis == 1 { (n1, grid.dx1(), i) } else { (n2, grid.dx2(), j) };
        let get = |k: usize| if axis == 1 { g.get(k, j) } else { g.get(i, k) };
        if at == 0 {
            (get(1) - get(0)) / h
        } else if at == n - 1 {
            (get(n - 1) - get(n - 2)) / h
        } else {
            (get(at + 1) - get(at - 1)) / (h + h)
        }
    };
    let mut out = Field::filled(n1, n2, T::zero());
    for i in 0..n1 {
        for j in 0..n2 {
            out.set(i, j, d(&f.c1, i, j, 1) + d(&f.c2, i, j, 2));
        }
    }
    out
}

/// Face pairing ⟨F·ν, g⟩ with F taken from the adjacent cell.
pub fn face_pairing<T: Scalar>(f: &VectorField<T>, g: impl Fn(T, T) -> T, grid: &Grid<T>) -> T {
    let [a1, b1] = grid.extent1();
    let [a2, b2] = grid.extent2();
    let (n1, n2) = (grid.n1(), grid.n2());
    let mut s = T::zero();
    for j in 0..n2 {
        let x2 = grid.x2(j);
        s = s + (f.c1.get(n1 - 1, j) * g(b1, x2) - f.c1.get(0, j) * g(a1, x2)) * grid.dx2();
    }
    for i in 0..n1 {
        let x1 = grid.x1(i);
        s = s + (f.c2.get(i, n2 - 1) * g(x1, b2) - f.c2.get(i, 0) * g(x1, a2)) * grid.dx1();
    }
    s
}

/// Residual of ∫∇g·F + ∫g div F = ⟨F·ν, g⟩ for `g` returning (g, ∂₁g, ∂₂g).
pub fn gauss_green_check<T: Scalar>(f: &VectorField<T>, g: impl Fn(T, T) -> [T; 3], grid: &Grid<T>) -> GaussGreen<T> {
    let div = divergence(f, grid);
    let mut volume = T::zero();
    for i in 0..grid.n1() {
        for j in 0..grid.n2() {
            let [gv, g1, g2] = g(grid.x1(i), grid.x2(j));
            volume = volume + g1 * f.c1.get(i, j) + g2 * f.c2.get(i, j) + gv * div.get(i, j);
        }
    }
    volume = volume * grid.cell_area();
    let boundary = face_pairing(f, |x1, x2| g(x1, x2)[0], grid);
    GaussGreen { volume, boundary, residual: (volume - boundary).abs() }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerTrace<T> {
    pub eps: Vec<T>,
    pub values: Vec<T>,
    /// Linear extrapolation to zero band width from the two thinnest bands.
    pub limit: T,
}

/// −ε⁻¹∫_{L_ε} g ∇m·F with m the distance to ∂Ω and ε = `bands[k]` cell widths.
pub fn boundary_layer_trace<T: Scalar>(f: &VectorField<T>, g: impl Fn(T, T) -> T, grid: &Grid<T>, bands: &[usize]) -> Result<LayerTrace<T>, TraceError> {
    let h = grid.dx_min();
    let mut eps = Vec::new();
    let mut values = Vec::new();
    for &m in bands {
        if m == 0 || 2 * m > grid.n1().min(grid.n2()) {
            return Err(TraceError::BandTooThin(m));
        }
        let e = h * T::from_count(m);
        let mut s = T::zero();
        for i in 0..grid.n1() {
            let x1 = grid.x1(i);
            let d1 = (x1 - grid.extent1()[0]).min(grid.extent1()[1] - x1);
            for j in 0..grid.n2() {
                let x2 = grid.x2(j);
                let d2 = (x2 - grid.extent2()[0]).min(grid.extent2()[1] - x2);
                if d1.min(d2) >= e {
                    continue;
                }
                // ∇m is the inward unit normal of the nearest wall.
                let grad_dot_f = if d1 <= d2 {
                    let sgn = if x1 - grid.extent1()[0] <= grid.extent1()[1] - x1 { T::one() } else { -T::one() };
                    sgn * f.c1.get(i, j)
                } else {
                    let sgn = if x2 - grid.extent2()[0] <= grid.extent2()[1] - x2 { T::one() } else { -T::one() };
                    sgn * f.c2.get(i, j)
                };
                s = s + g(x1, x2) * grad_dot_f;
            }
        }
        eps.push(e);
        values.push(-s * grid.cell_area() / e);
    }
    let limit = match eps.len() {
        0 => T::zero(),
        1 => values[0],
        _ => {
            let mut idx: Vec<usize> = (0..eps.len()).collect();
            idx.sort_by(|&a, &b| eps[a].partial_cmp(&eps[b]).unwrap_or(std::cmp::Ordering::Equal));
            let (a, b) = (idx[0], idx[1]);
            (eps[b] * values[a] - eps[a] * values[b]) / (eps[b] - eps[a])
        }
    };
    Ok(LayerTrace { eps, values, limit })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeTrace<T> {
    pub k: T,
    /// Mean over Ω of (trace of G^k − |u₀ − k|)₊.
    pub kruzhkov_defect: T,
    /// Mean over Ω of |trace of G − u₀|.
    pub conservative_defect: T,
}

/// Per-cell τ⁻¹∫₀^τ g(u(t)) dt over the first two time bands, extrapolated to τ → 0.
fn time_layer_limit<T: Scalar>(run: &RunArtifacts<T>, g: impl Fn(T) -> T) -> Result<Vec<T>, TraceError> {
    if run.snapshots.len() < 3 {
        return Err(TraceError::TooFewSnapshots);
    }
    let s = &run.snapshots;
    let n = s[0].field.as_slice().len();
    let half = T::lit(0.5);
    let (t1, t2) = (s[1].t, s[2].t);
    let mut out = Vec::with_capacity(n);
    for c in 0..n {
        let g0 = g(s[0].field.as_slice()[c]);
        let g1 = g(s[1].field.as_slice()[c]);
        let g2 = g(s[2].field.as_slice()[c]);
        let i1 = half * (g0 + g1) * t1;
        let i2 = i1 + half * (g1 + g2) * (t2 - t1);
        let (v1, v2) = (i1 / t1, i2 / t2);
        out.push((t2 * v1 - t1 * v2) / (t2 - t1));
    }
    Ok(out)
}

pub fn time_zero_trace<T: Scalar>(run: &RunArtifacts<T>, spec: &ProblemSpec<T>, grid: &Grid<T>, k: T) -> Result<TimeTrace<T>, TraceError> {
    let u0 = Field::from_fn(grid, |x1, x2| spec.u0.value(x1, x2));
    let tk = time_layer_limit(run, |u| (u - k).abs())?;
    let tg = time_layer_limit(run, |u| u)?;
    let n = T::from_count(tk.len());
    let mut kd = T::zero();
    let mut cd = T::zero();
    for (c, &u) in u0.as_slice().iter().enumerate() {
        kd = kd + (tk[c] - (u - k).abs()).max(T::zero());
        cd = cd + (tg[c] - u).abs();
    }
    Ok(TimeTrace { k, kruzhkov_defect: kd / n, conservative_defect: cd / n })
}

/// Time-trace entries for every k; tolerance C·(Δt + Δx).
pub fn check_time_zero_trace<T: Scalar>(
    run: &RunArtifacts<T>,
    spec: &ProblemSpec<T>,
    grid: &Grid<T>,
    k_list: &[T],
    opts: &VerifyOptions<T>,
) -> Vec<CheckEntry> {
    let tol = opts.tol_scale * opts.order_constant * (grid.dx1().max(grid.dx2()) + run.dt_nominal);
    let mut out = Vec::new();
    for (idx, &k) in k_list.iter().enumerate() {
        match time_zero_trace(run, spec, grid, k) {
            Ok(tr) => {
                let defect = tr.kruzhkov_defect.max(tr.conservative_defect);
                let status = if defect <= tol { CheckStatus::Pass } else { CheckStatus::Fail };
                out.push(CheckEntry {
                    id: format!("time_trace.k{idx}"),
                    status,
                    defect: defect.as_f64(),
                    tolerance: tol.as_f64(),
                    detail: format!("k={k} kruzhkov {} conservative {}", tr.kruzhkov_defect, tr.conservative_defect),
                });
            }
            Err(e) => out.push(CheckEntry {
                id: format!("time_trace.k{idx}"),
                status: CheckStatus::Info,
                defect: 0.0,
                tolerance: tol.as_f64(),
                detail: e.to_string(),
            }),
        }
    }
    out
}
