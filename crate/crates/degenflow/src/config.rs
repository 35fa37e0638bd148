//! Scenario files: INI-style `[section]` headers with `key = value` lines.
//!
//! Lists are whitespace separated. Blank lines and lines starting with `#` or
//! `;` are ignored. Every numeric value is written back with `{}` formatting,
//! which round-trips `f64` exactly.

use std::collections::BTreeMap;
use std::fmt;

use crate::domain::{build_grid, GridSpec};
use crate::model::{BoundaryDatum, InitialDatum, ModelError, ModelFamily, ProblemSpec};
use crate::solver::{NeumannMode, Record, SolverConfig};
use crate::verify::VerifyOptions;

/// Parse or validation failure. `line` is 1-based; 0 means "end of input".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.msg)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { line, msg: msg.into() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSection {
    pub n1: usize,
    pub n2: usize,
    pub x1: [f64; 2],
    pub x2: [f64; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSection {
    pub family: ModelFamily<f64>,
    /// Slope of the linear x''-flux f2(u) = c·u.
    pub f2: f64,
    pub lambda: f64,
    pub u_min: f64,
    pub u_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataSection {
    pub u0: InitialDatum<f64>,
    pub a0: BoundaryDatum<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverSection {
    /// One value for `run`; a strictly decreasing list for `sweep-eps`.
    pub eps: Vec<f64>,
    pub cfl: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub record: Record,
    pub dyadic_early: bool,
    pub neumann: NeumannMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Check {
    MaxPrinciple,
    Entropy,
    Kinetic,
    Neumann,
    Dirichlet,
    Initial,
    TimeTrace,
}

impl Check {
    pub const ALL: [Check; 7] =
        [Check::MaxPrinciple, Check::Entropy, Check::Kinetic, Check::Neumann, Check::Dirichlet, Check::Initial, Check::TimeTrace];

    pub fn name(self) -> &'static str {
        match self {
            Check::MaxPrinciple => "max_principle",
            Check::Entropy => "entropy",
            Check::Kinetic => "kinetic",
            Check::Neumann => "neumann",
            Check::Dirichlet => "dirichlet",
            Check::Initial => "initial",
            Check::TimeTrace => "time_trace",
        }
    }

    pub fn from_name(s: &str) -> Option<Check> {
        Check::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifySection {
    pub checks: Vec<Check>,
    pub k: Vec<f64>,
    pub xi: Vec<f64>,
    /// Deformation depths s for the trace diagnostic, strictly decreasing.
    pub trace_depths: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub grid: GridSection,
    pub model: ModelSection,
    pub data: DataSection,
    /// Second initial datum for `contract`.
    pub data_v: Option<DataSection>,
    pub solver: SolverSection,
    pub verify: VerifySection,
}

struct Entry {
    value: String,
    line: usize,
}

/// Keys of one section, consumed one by one; leftovers are unknown keys.
struct Section {
    name: &'static str,
    line: usize,
    keys: BTreeMap<String, Entry>,
    defaulted: Vec<String>,
}

impl Section {
    fn empty(name: &'static str) -> Self {
        Self { name, line: 0, keys: BTreeMap::new(), defaulted: Vec::new() }
    }

    fn take(&mut self, key: &str) -> Option<Entry> {
        self.keys.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<Entry, ConfigError> {
        match self.take(key) {
            Some(e) => Ok(e),
            None => err(self.line, format!("[{}] missing required key `{key}`", self.name)),
        }
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str, default: Option<T>) -> Result<T, ConfigError> {
        match self.take(key) {
            Some(e) => parse_value(&e, key),
            None => match default {
                Some(d) => {
                    self.defaulted.push(format!("{}.{key}", self.name));
                    Ok(d)
                }
                None => err(self.line, format!("[{}] missing required key `{key}`", self.name)),
            },
        }
    }

    fn list(&mut self, key: &str, default: Option<Vec<f64>>) -> Result<Vec<f64>, ConfigError> {
        match self.take(key) {
            Some(e) => e
                .value
                .split_whitespace()
                .map(|t| t.parse::<f64>().or_else(|_| err(e.line, format!("`{key}`: `{t}` is not a number"))))
                .collect(),
            None => match default {
                Some(d) => {
                    self.defaulted.push(format!("{}.{key}", self.name));
                    Ok(d)
                }
                None => err(self.line, format!("[{}] missing required key `{key}`", self.name)),
            },
        }
    }

    fn pair(&mut self, key: &str, default: Option<[f64; 2]>) -> Result<[f64; 2], ConfigError> {
        let line = self.keys.get(key).map(|e| e.line).unwrap_or(self.line);
        let v = self.list(key, default.map(|d| d.to_vec()))?;
        match v.as_slice() {
            [a, b] => Ok([*a, *b]),
            _ => err(line, format!("`{key}` takes exactly two numbers")),
        }
    }

    fn line_of(&self, key: &str) -> usize {
        self.keys.get(key).map(|e| e.line).unwrap_or(self.line)
    }

    fn finish(self, defaulted: &mut Vec<String>) -> Result<(), ConfigError> {
        if let Some((k, e)) = self.keys.iter().min_by_key(|(_, e)| e.line) {
            return err(e.line, format!("[{}] unknown key `{k}`", self.name));
        }
        defaulted.extend(self.defaulted);
        Ok(())
    }
}

fn parse_value<T: std::str::FromStr>(e: &Entry, key: &str) -> Result<T, ConfigError> {
    e.value.trim().parse().or_else(|_| err(e.line, format!("`{key}`: cannot parse `{}`", e.value)))
}

const SECTIONS: [&str; 6] = ["grid", "model", "data", "data_v", "solver", "verify"];

fn lex(text: &str) -> Result<BTreeMap<&'static str, Section>, ConfigError> {
    let mut sections: BTreeMap<&'static str, Section> = BTreeMap::new();
    let mut current: Option<&'static str> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
            continue;
        }
        if let Some(rest) = s.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return err(line, "unterminated section header");
            };
            let Some(&known) = SECTIONS.iter().find(|&&k| k == name.trim()) else {
                return err(line, format!("unknown section `[{}]`", name.trim()));
            };
            if sections.contains_key(known) {
                return err(line, format!("duplicate section `[{known}]`"));
            }
            let mut sec = Section::empty(known);
            sec.line = line;
            sections.insert(known, sec);
            current = Some(known);
            continue;
        }
        let Some((k, v)) = s.split_once('=') else {
            return err(line, format!("expected `key = value`, found `{s}`"));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return err(line, "empty key");
        }
        let Some(sec) = current.and_then(|c| sections.get_mut(c)) else {
            return err(line, format!("key `{k}` outside of any section"));
        };
        if let Some(prev) = sec.keys.get(k) {
            return err(line, format!("duplicate key `{k}` in [{}] (first set on line {})", sec.name, prev.line));
        }
        sec.keys.insert(k.to_string(), Entry { value: v.to_string(), line });
    }
    Ok(sections)
}

fn take_section(map: &mut BTreeMap<&'static str, Section>, name: &'static str, required: bool) -> Result<Option<Section>, ConfigError> {
    match map.remove(name) {
        Some(s) => Ok(Some(s)),
        None if required => err(0, format!("missing section `[{name}]`")),
        None => Ok(None),
    }
}

fn parse_model(sec: &mut Section) -> Result<ModelFamily<f64>, ConfigError> {
    let fam = sec.required("family")?;
    match fam.value.as_str() {
        "pinned" => Ok(ModelFamily::Pinned {
            p: sec.parsed("p", Some(1))?,
            q: sec.parsed("q", Some(1))?,
            flux_scale: sec.parsed("flux_scale", Some(1.0))?,
            diff_coeff: sec.parsed("diff_coeff", None)?,
            diff_exp: sec.parsed("diff_exp", Some(2.0))?,
        }),
        "tadmor_tao" => Ok(ModelFamily::TadmorTao { ell: sec.parsed("ell", None)?, n: sec.parsed("n", None)? }),
        other => err(fam.line, format!("unknown model family `{other}` (expected pinned or tadmor_tao)")),
    }
}

fn parse_u0(sec: &mut Section) -> Result<InitialDatum<f64>, ConfigError> {
    let kind = sec.required("u0")?;
    match kind.value.as_str() {
        "constant" => Ok(InitialDatum::Constant(sec.parsed("u0_value", None)?)),
        "bump" => Ok(InitialDatum::Bump {
            base: sec.parsed("u0_base", None)?,
            amp: sec.parsed("u0_amp", None)?,
            center: sec.pair("u0_center", None)?,
            width: sec.parsed("u0_width", None)?,
        }),
        "x2bump" => Ok(InitialDatum::X2Bump {
            base: sec.parsed("u0_base", None)?,
            amp: sec.parsed("u0_amp", None)?,
            center: sec.parsed("u0_center", None)?,
            width: sec.parsed("u0_width", None)?,
        }),
        other => err(kind.line, format!("unknown u0 kind `{other}` (expected constant, bump or x2bump)")),
    }
}

fn parse_a0(sec: &mut Section) -> Result<Option<BoundaryDatum<f64>>, ConfigError> {
    let Some(kind) = sec.take("a0") else { return Ok(None) };
    let a0 = match kind.value.as_str() {
        "constant" => BoundaryDatum::Constant(sec.parsed("a0_value", None)?),
        "arch" => BoundaryDatum::Arch { base: sec.parsed("a0_base", None)?, amp: sec.parsed("a0_amp", None)? },
        "walls" => BoundaryDatum::Walls { lower: sec.parsed("a0_lower", None)?, upper: sec.parsed("a0_upper", None)? },
        other => return err(kind.line, format!("unknown a0 kind `{other}` (expected constant, arch or walls)")),
    };
    Ok(Some(a0))
}

fn parse_record(e: Entry) -> Result<Record, ConfigError> {
    match e.value.as_str() {
        "times" => Ok(Record::Times),
        "every_step" => Ok(Record::EveryStep),
        other => err(e.line, format!("unknown record mode `{other}` (expected times or every_step)")),
    }
}

fn parse_neumann(e: Entry) -> Result<NeumannMode, ConfigError> {
    match e.value.as_str() {
        "zero_flux" => Ok(NeumannMode::ZeroFlux),
        "extrapolate" => Ok(NeumannMode::Extrapolate),
        other => err(e.line, format!("unknown neumann mode `{other}` (expected zero_flux or extrapolate)")),
    }
}

fn model_error(line: usize, section: &str, e: ModelError) -> ConfigError {
    ConfigError { line, msg: format!("[{section}] {e}") }
}

/// Default Kruzhkov levels: nine points spread over the value interval.
pub fn default_levels(u_min: f64, u_max: f64) -> Vec<f64> {
    (0..9).map(|i| u_min + (u_max - u_min) * (0.05 + 0.1125 * i as f64)).collect()
}

/// Default deformation depths: cell columns 7, 3, 1, 0 from the Γ' walls.
pub fn default_depths(n1: usize, x1: [f64; 2]) -> Vec<f64> {
    let h = (x1[1] - x1[0]) / n1 as f64;
    [15.0, 7.0, 3.0, 1.0].iter().map(|k| k * h / 2.0).collect()
}

/// Parses and validates a scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    parse_scenario_with_defaults(text).map(|(s, _)| s)
}

/// As [`parse_scenario`], also listing every `section.key` that took its default.
pub fn parse_scenario_with_defaults(text: &str) -> Result<(Scenario, Vec<String>), ConfigError> {
    let mut map = lex(text)?;
    let mut defaulted = Vec::new();

    let mut g = take_section(&mut map, "grid", true)?.expect("required");
    let grid = GridSection {
        n1: g.parsed("n1", None)?,
        n2: g.parsed("n2", None)?,
        x1: g.pair("x1", Some([0.0, 1.0]))?,
        x2: g.pair("x2", Some([0.0, 1.0]))?,
    };
    let grid_line = g.line;
    g.finish(&mut defaulted)?;

    let mut m = take_section(&mut map, "model", true)?.expect("required");
    let family_line = m.line_of("family");
    let family = parse_model(&mut m)?;
    let model = ModelSection {
        family,
        f2: m.parsed("f2", Some(0.0))?,
        lambda: m.parsed("lambda", Some(1.0))?,
        u_min: m.parsed("u_min", Some(0.0))?,
        u_max: m.parsed("u_max", Some(1.0))?,
    };
    let model_line = m.line;
    m.finish(&mut defaulted)?;

    let mut d = take_section(&mut map, "data", true)?.expect("required");
    let data_line = d.line_of("u0");
    let u0 = parse_u0(&mut d)?;
    let Some(a0) = parse_a0(&mut d)? else {
        return err(d.line, "[data] missing required key `a0`");
    };
    d.finish(&mut defaulted)?;
    let data = DataSection { u0, a0 };

    let data_v = match take_section(&mut map, "data_v", false)? {
        Some(mut v) => {
            let line = v.line_of("u0");
            let u0 = parse_u0(&mut v)?;
            let a0 = match parse_a0(&mut v)? {
                Some(a) => a,
                None => {
                    v.defaulted.push("data_v.a0".into());
                    data.a0.clone()
                }
            };
            v.finish(&mut defaulted)?;
            Some((DataSection { u0, a0 }, line))
        }
        None => None,
    };

    let mut s = take_section(&mut map, "solver", true)?.expect("required");
    let solver_line = s.line;
    let eps_line = s.line_of("eps");
    let eps = s.list("eps", None)?;
    if eps.is_empty() {
        return err(eps_line, "`eps` needs at least one value");
    }
    if eps.len() > 1 && eps.windows(2).any(|w| !(w[1] < w[0] && w[1] > 0.0)) {
        return err(eps_line, "an eps list must be positive and strictly decreasing");
    }
    let record = match s.take("record") {
        Some(e) => parse_record(e)?,
        None => {
            s.defaulted.push("solver.record".into());
            Record::Times
        }
    };
    let neumann = match s.take("neumann") {
        Some(e) => parse_neumann(e)?,
        None => {
            s.defaulted.push("solver.neumann".into());
            NeumannMode::ZeroFlux
        }
    };
    let solver = SolverSection {
        eps,
        cfl: s.parsed("cfl", Some(0.4))?,
        t_end: s.parsed("t_end", None)?,
        snapshot_times: s.list("snapshot_times", Some(Vec::new()))?,
        record,
        dyadic_early: s.parsed("dyadic_early", Some(true))?,
        neumann,
    };
    s.finish(&mut defaulted)?;

    let mut v = take_section(&mut map, "verify", false)?.unwrap_or_else(|| Section::empty("verify"));
    let checks = match v.take("checks") {
        Some(e) => {
            let mut out = Vec::new();
            for t in e.value.split_whitespace() {
                let Some(c) = Check::from_name(t) else {
                    return err(e.line, format!("unknown check `{t}`"));
                };
                if !out.contains(&c) {
                    out.push(c);
                }
            }
            out.sort();
            out
        }
        None => {
            v.defaulted.push("verify.checks".into());
            Check::ALL.to_vec()
        }
    };
    let levels = default_levels(model.u_min, model.u_max);
    let depth_line = v.line_of("trace_depths");
    let verify = VerifySection {
        checks,
        k: v.list("k", Some(levels.clone()))?,
        xi: v.list("xi", Some(levels))?,
        trace_depths: v.list("trace_depths", Some(default_depths(grid.n1, grid.x1)))?,
    };
    if verify.trace_depths.windows(2).any(|w| !(w[1] < w[0])) {
        return err(depth_line, "`trace_depths` must be strictly decreasing");
    }
    v.finish(&mut defaulted)?;

    let scenario = Scenario { grid, model, data, data_v: data_v.as_ref().map(|(d, _)| d.clone()), solver, verify };

    build_grid(scenario.grid_spec()).map_err(|e| ConfigError { line: grid_line, msg: format!("[grid] {e}") })?;
    scenario.model.family.validate().map_err(|e| model_error(family_line, "model", e))?;
    scenario.problem_spec().map_err(|e| match e {
        ModelError::DataOutOfRange { .. } => model_error(data_line, "data", e),
        _ => model_error(model_line, "model", e),
    })?;
    if let Some((_, line)) = &data_v {
        if let Some(r) = scenario.problem_spec_v() {
            r.map_err(|e| model_error(*line, "data_v", e))?;
        }
    }
    scenario
        .solver_config()
        .validate()
        .map_err(|e| ConfigError { line: solver_line, msg: format!("[solver] {e}") })?;
    Ok((scenario, defaulted))
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn write_data(out: &mut String, d: &DataSection) {
    match &d.u0 {
        InitialDatum::Constant(c) => out.push_str(&format!("u0 = constant\nu0_value = {c}\n")),
        InitialDatum::Bump { base, amp, center, width } => out.push_str(&format!(
            "u0 = bump\nu0_base = {base}\nu0_amp = {amp}\nu0_center = {} {}\nu0_width = {width}\n",
            center[0], center[1]
        )),
        InitialDatum::X2Bump { base, amp, center, width } => out.push_str(&format!(
            "u0 = x2bump\nu0_base = {base}\nu0_amp = {amp}\nu0_center = {center}\nu0_width = {width}\n"
        )),
    }
    match &d.a0 {
        BoundaryDatum::Constant(c) => out.push_str(&format!("a0 = constant\na0_value = {c}\n")),
        BoundaryDatum::Arch { base, amp } => out.push_str(&format!("a0 = arch\na0_base = {base}\na0_amp = {amp}\n")),
        BoundaryDatum::Walls { lower, upper } => out.push_str(&format!("a0 = walls\na0_lower = {lower}\na0_upper = {upper}\n")),
    }
}

impl Scenario {
    /// Canonical text form; `parse_scenario(&s.to_text()) == Ok(s)`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let g = &self.grid;
        out.push_str(&format!(
            "[grid]\nn1 = {}\nn2 = {}\nx1 = {} {}\nx2 = {} {}\n\n",
            g.n1, g.n2, g.x1[0], g.x1[1], g.x2[0], g.x2[1]
        ));
        out.push_str("[model]\n");
        match &self.model.family {
            ModelFamily::Pinned { p, q, flux_scale, diff_coeff, diff_exp } => out.push_str(&format!(
                "family = pinned\np = {p}\nq = {q}\nflux_scale = {flux_scale}\ndiff_coeff = {diff_coeff}\ndiff_exp = {diff_exp}\n"
            )),
            ModelFamily::TadmorTao { ell, n } => out.push_str(&format!("family = tadmor_tao\nell = {ell}\nn = {n}\n")),
        }
        let m = &self.model;
        out.push_str(&format!("f2 = {}\nlambda = {}\nu_min = {}\nu_max = {}\n\n", m.f2, m.lambda, m.u_min, m.u_max));
        out.push_str("[data]\n");
        write_data(&mut out, &self.data);
        if let Some(v) = &self.data_v {
            out.push_str("\n[data_v]\n");
            write_data(&mut out, v);
        }
        let s = &self.solver;
        out.push_str(&format!(
            "\n[solver]\neps = {}\ncfl = {}\nt_end = {}\nsnapshot_times = {}\nrecord = {}\ndyadic_early = {}\nneumann = {}\n",
            join(&s.eps),
            s.cfl,
            s.t_end,
            join(&s.snapshot_times),
            match s.record {
                Record::Times => "times",
                Record::EveryStep => "every_step",
            },
            s.dyadic_early,
            match s.neumann {
                NeumannMode::ZeroFlux => "zero_flux",
                NeumannMode::Extrapolate => "extrapolate",
            }
        ));
        let v = &self.verify;
        out.push_str(&format!(
            "\n[verify]\nchecks = {}\nk = {}\nxi = {}\ntrace_depths = {}\n",
            v.checks.iter().map(|c| c.name()).collect::<Vec<_>>().join(" "),
            join(&v.k),
            join(&v.xi),
            join(&v.trace_depths)
        ));
        out
    }

    pub fn grid_spec(&self) -> GridSpec<f64> {
        GridSpec { n1: self.grid.n1, n2: self.grid.n2, extent1: self.grid.x1, extent2: self.grid.x2 }
    }

    fn spec_for(&self, d: &DataSection) -> Result<ProblemSpec<f64>, ModelError> {
        let m = &self.model;
        ProblemSpec::from_family(&m.family, m.f2, [m.u_min, m.u_max], m.lambda, d.a0.clone(), d.u0.clone())
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec<f64>, ModelError> {
        self.spec_for(&self.data)
    }

    /// Problem with the `[data_v]` datum, if present.
    pub fn problem_spec_v(&self) -> Option<Result<ProblemSpec<f64>, ModelError>> {
        self.data_v.as_ref().map(|d| self.spec_for(d))
    }

    /// Solver settings with the first ε of the list.
    pub fn solver_config(&self) -> SolverConfig<f64> {
        let s = &self.solver;
        SolverConfig {
            eps: s.eps[0],
            cfl: s.cfl,
            t_end: s.t_end,
            snapshot_times: s.snapshot_times.clone(),
            record: s.record,
            dyadic_early: s.dyadic_early,
            neumann: s.neumann,
        }
    }

    pub fn verify_options(&self, tol_scale: f64) -> VerifyOptions<f64> {
        VerifyOptions { tol_scale, ..VerifyOptions::default() }
    }

    pub fn enabled(&self, c: Check) -> bool {
        self.verify.checks.contains(&c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[grid]
n1 = 32
n2 = 32

[model]
family = pinned
diff_coeff = 0.05

[data]
u0 = bump
u0_base = 0.5
u0_amp = 0.4
u0_center = 0.5 0.5
u0_width = 0.3
a0 = constant
a0_value = 0.5

[solver]
eps = 0.001
t_end = 0.2
";

    #[test]
    fn minimal_scenario_parses_and_records_defaults() {
        let (s, defaulted) = parse_scenario_with_defaults(MINIMAL).unwrap();
        assert_eq!(s.grid.n1, 32);
        assert_eq!(s.grid.x1, [0.0, 1.0]);
        assert_eq!(s.solver.cfl, 0.4);
        assert_eq!(s.verify.checks, Check::ALL.to_vec());
        assert_eq!(s.verify.k.len(), 9);
        for key in ["grid.x1", "model.p", "model.lambda", "solver.cfl", "solver.record", "verify.k"] {
            assert!(defaulted.iter().any(|d| d == key), "{key} not recorded");
        }
    }

    #[test]
    fn serialization_round_trips() {
        let s = parse_scenario(MINIMAL).unwrap();
        let again = parse_scenario(&s.to_text()).unwrap();
        assert_eq!(s, again);
        assert_eq!(s.to_text(), again.to_text());
    }

    #[test]
    fn tadmor_tao_exponent_violation_names_the_constraint() {
        let text = MINIMAL.replace("family = pinned\ndiff_coeff = 0.05", "family = tadmor_tao\nell = 2\nn = 1");
        let e = parse_scenario(&text).unwrap_err();
        assert_eq!(e.line, 6);
        assert!(e.msg.contains("tadmor_tao family requires n >= 2*ell"), "{}", e.msg);
    }

    #[test]
    fn duplicate_key_is_rejected_with_its_line() {
        let text = MINIMAL.replace("n2 = 32", "n2 = 32\nn1 = 16");
        let e = parse_scenario(&text).unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.msg.contains("duplicate key `n1`"));
    }

    #[test]
    fn unknown_key_and_section_are_rejected() {
        let e = parse_scenario(&MINIMAL.replace("t_end = 0.2", "t_end = 0.2\nspeed = 3")).unwrap_err();
        assert!(e.msg.contains("unknown key `speed`"));
        assert_eq!(e.line, 21);
        let e = parse_scenario(&format!("{MINIMAL}\n[plot]\n")).unwrap_err();
        assert!(e.msg.contains("unknown section"));
    }

    #[test]
    fn keys_of_the_other_family_are_unknown() {
        let e = parse_scenario(&MINIMAL.replace("diff_coeff = 0.05", "diff_coeff = 0.05\nell = 1")).unwrap_err();
        assert!(e.msg.contains("unknown key `ell`"), "{}", e.msg);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let e = parse_scenario(&MINIMAL.replace("n2 = 32", "n2 32")).unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_scenario(&MINIMAL.replace("n2 = 32", "n2 = many")).unwrap_err();
        assert_eq!(e.line, 3);
    }

    #[test]
    fn data_outside_the_interval_is_a_semantic_error() {
        let e = parse_scenario(&MINIMAL.replace("u0_amp = 0.4", "u0_amp = 0.7")).unwrap_err();
        assert!(e.msg.starts_with("[data]"), "{}", e.msg);
        assert_eq!(e.line, 10);
    }

    #[test]
    fn data_v_inherits_a0() {
        let text = format!("{MINIMAL}\n[data_v]\nu0 = constant\nu0_value = 0.25\n");
        let s = parse_scenario(&text).unwrap();
        let v = s.data_v.as_ref().unwrap();
        assert_eq!(v.a0, s.data.a0);
        assert_eq!(parse_scenario(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn eps_list_must_decrease() {
        assert!(parse_scenario(&MINIMAL.replace("eps = 0.001", "eps = 0.1 0.05 0.025")).is_ok());
        let e = parse_scenario(&MINIMAL.replace("eps = 0.001", "eps = 0.1 0.2")).unwrap_err();
        assert_eq!(e.line, 19);
    }
}
