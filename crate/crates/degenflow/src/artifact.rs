//! Text formats for snapshots and run manifests.
//!
//! Snapshot: a header `t <time> n1 <n1> n2 <n2>` then n1 rows of n2 values
//! (row = x' index). Values use `{}` formatting, so reading a file back gives
//! the bit-identical field.

use sha2::{Digest, Sha256};

use crate::field::Field;
use crate::solver::{NeumannMode, RunArtifacts, Snapshot};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn snapshot_text(t: f64, field: &Field<f64>) -> String {
    let mut s = format!("t {} n1 {} n2 {}\n", t, field.n1(), field.n2());
    for i in 0..field.n1() {
        let row: Vec<String> = field.row(i).iter().map(|v| v.to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// Parses a snapshot file; errors carry a 1-based line number.
pub fn parse_snapshot(text: &str) -> Result<(f64, Field<f64>), (usize, String)> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split_whitespace().collect();
    let (t, n1, n2) = match header.as_slice() {
        ["t", t, "n1", n1, "n2", n2] => (
            t.parse::<f64>().map_err(|_| (1, format!("bad time `{t}`")))?,
            n1.parse::<usize>().map_err(|_| (1, format!("bad n1 `{n1}`")))?,
            n2.parse::<usize>().map_err(|_| (1, format!("bad n2 `{n2}`")))?,
        ),
        _ => return Err((1, "expected header `t <time> n1 <n1> n2 <n2>`".into())),
    };
    let mut data = Vec::with_capacity(n1 * n2);
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|v| v.parse::<f64>().map_err(|_| (i + 2, format!("bad value `{v}`"))))
            .collect::<Result<_, _>>()?;
        if row.len() != n2 {
            return Err((i + 2, format!("expected {n2} values, found {}", row.len())));
        }
        data.extend(row);
    }
    if data.len() != n1 * n2 {
        return Err((0, format!("expected {n1} rows, found {}", data.len() / n2.max(1))));
    }
    Ok((t, Field::from_vec(n1, n2, data)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotRecord {
    pub step: usize,
    pub t: f64,
    pub file: String,
    pub sha256: String,
}

/// Index of a run directory: scenario, scalar run diagnostics, snapshot files.
#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub scenario: String,
    pub scenario_sha256: String,
    pub eps: f64,
    pub cfl: f64,
    pub dt_nominal: f64,
    pub neumann: NeumannMode,
    pub every_step: bool,
    pub rejected_steps: usize,
    pub eps_grad_sq: f64,
    pub grad_b_sq: f64,
    pub snapshots: Vec<SnapshotRecord>,
}

fn mode_name(m: NeumannMode) -> &'static str {
    match m {
        NeumannMode::ZeroFlux => "zero_flux",
        NeumannMode::Extrapolate => "extrapolate",
    }
}

impl Manifest {
    pub fn from_run(run: &RunArtifacts<f64>, scenario: &str, scenario_sha256: String, snapshots: Vec<SnapshotRecord>) -> Self {
        Self {
            scenario: scenario.to_string(),
            scenario_sha256,
            eps: run.eps,
            cfl: run.cfl,
            dt_nominal: run.dt_nominal,
            neumann: run.neumann,
            every_step: run.every_step,
            rejected_steps: run.rejected_steps,
            eps_grad_sq: run.eps_grad_sq,
            grad_b_sq: run.grad_b_sq,
            snapshots,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "scenario = {}\nscenario_sha256 = {}\neps = {}\ncfl = {}\ndt_nominal = {}\nneumann = {}\nevery_step = {}\nrejected_steps = {}\neps_grad_sq = {}\ngrad_b_sq = {}\n",
            self.scenario,
            self.scenario_sha256,
            self.eps,
            self.cfl,
            self.dt_nominal,
            mode_name(self.neumann),
            self.every_step,
            self.rejected_steps,
            self.eps_grad_sq,
            self.grad_b_sq
        );
        for r in &self.snapshots {
            s.push_str(&format!("snapshot {} {} {} {}\n", r.step, r.t, r.file, r.sha256));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, (usize, String)> {
        let mut kv = std::collections::BTreeMap::new();
        let mut snapshots = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let s = raw.trim();
            if s.is_empty() {
                continue;
            }
            if let Some(rest) = s.strip_prefix("snapshot ") {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let [step, t, file, sha] = parts.as_slice() else {
                    return Err((line, "expected `snapshot <step> <time> <file> <sha256>`".into()));
                };
                snapshots.push(SnapshotRecord {
                    step: step.parse().map_err(|_| (line, format!("bad step `{step}`")))?,
                    t: t.parse().map_err(|_| (line, format!("bad time `{t}`")))?,
                    file: file.to_string(),
                    sha256: sha.to_string(),
                });
                continue;
            }
            let Some((k, v)) = s.split_once('=') else {
                return Err((line, format!("expected `key = value`, found `{s}`")));
            };
            if kv.insert(k.trim().to_string(), (v.trim().to_string(), line)).is_some() {
                return Err((line, format!("duplicate key `{}`", k.trim())));
            }
        }
        let mut get = |k: &str| kv.remove(k).ok_or((0, format!("missing key `{k}`")));
        fn num<T: std::str::FromStr>((v, line): (String, usize)) -> Result<T, (usize, String)> {
            v.parse().map_err(|_| (line, format!("cannot parse `{v}`")))
        }
        let neumann = match get("neumann")? {
            (v, _) if v == "zero_flux" => NeumannMode::ZeroFlux,
            (v, _) if v == "extrapolate" => NeumannMode::Extrapolate,
            (v, line) => return Err((line, format!("unknown neumann mode `{v}`"))),
        };
        let m = Self {
            scenario: get("scenario")?.0,
            scenario_sha256: get("scenario_sha256")?.0,
            eps: num(get("eps")?)?,
            cfl: num(get("cfl")?)?,
            dt_nominal: num(get("dt_nominal")?)?,
            neumann,
            every_step: num(get("every_step")?)?,
            rejected_steps: num(get("rejected_steps")?)?,
            eps_grad_sq: num(get("eps_grad_sq")?)?,
            grad_b_sq: num(get("grad_b_sq")?)?,
            snapshots,
        };
        if let Some((k, (_, line))) = kv.into_iter().next() {
            return Err((line, format!("unknown key `{k}`")));
        }
        if m.snapshots.is_empty() {
            return Err((0, "manifest lists no snapshots".into()));
        }
        Ok(m)
    }

    /// Rebuilds run artifacts from loaded snapshot fields (same order as `snapshots`).
    pub fn artifacts(&self, fields: Vec<Field<f64>>) -> RunArtifacts<f64> {
        let snaps = self
            .snapshots
            .iter()
            .zip(fields)
            .map(|(r, field)| Snapshot { step: r.step, t: r.t, field })
            .collect();
        let mut run = RunArtifacts::from_snapshots(self.eps, self.cfl, self.neumann, self.every_step, snaps);
        run.dt_nominal = self.dt_nominal;
        run.rejected_steps = self.rejected_steps;
        run.eps_grad_sq = self.eps_grad_sq;
        run.grad_b_sq = self.grad_b_sq;
        run
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let data = vec![0.1, 1.0 / 3.0, -2.5e-300, 0.7, std::f64::consts::PI, 1e-17];
        let f = Field::from_vec(2, 3, data.clone());
        let text = snapshot_text(0.0375, &f);
        assert!(text.starts_with("t 0.0375 n1 2 n2 3\n"));
        let (t, g) = parse_snapshot(&text).unwrap();
        assert_eq!(t, 0.0375);
        assert_eq!(g.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(), data.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn malformed_snapshot_reports_the_line() {
        let err = parse_snapshot("t 0 n1 2 n2 2\n1 2\n3 x\n").unwrap_err();
        assert_eq!(err.0, 3);
        let err = parse_snapshot("t 0 n1 2 n2 2\n1 2 3\n").unwrap_err();
        assert_eq!(err.0, 2);
        assert!(parse_snapshot("time 0\n").is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let m = Manifest {
            scenario: "scenario.cfg".into(),
            scenario_sha256: sha256_hex(b"x"),
            eps: 1e-3,
            cfl: 0.4,
            dt_nominal: 0.00093,
            neumann: NeumannMode::Extrapolate,
            every_step: true,
            rejected_steps: 0,
            eps_grad_sq: 0.0123,
            grad_b_sq: 4.5e-4,
            snapshots: vec![SnapshotRecord { step: 0, t: 0.0, file: "snap_000000.txt".into(), sha256: sha256_hex(b"y") }],
        };
        assert_eq!(Manifest::parse(&m.to_text()).unwrap(), m);
    }

    #[test]
    fn sha256_matches_known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
