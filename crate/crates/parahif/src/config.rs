//! Line-oriented `key = value` experiment configs with `[section]` headers.
//!
//! A config holds one or more `[problem]` sections, zero or more `[solver]`
//! sections, and optional `[output]` and `[convergence]` sections. The `n`
//! key of a problem and the `eps` key of a solver accept comma lists and
//! expand into one entry per value, so a whole benchmark table fits in one
//! file. Unknown and duplicate keys are errors: typos must not silently
//! fall back to defaults.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{CoeffField, GridSpec, InitKind, ProblemKind, ProblemSpec, Reaction};
use crate::solver::PrecondChoice;

#[derive(Debug, Clone)]
pub struct SolverEntry {
    pub choice: PrecondChoice,
    pub tol: f64,
    pub maxit: usize,
    pub warm_start: bool,
}

#[derive(Debug, Clone)]
pub struct OutputSettings {
    pub dir: PathBuf,
    /// Dump the field every this many steps during `solve`; 0 disables.
    pub dump_every: usize,
    pub report: String,
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings { dir: PathBuf::from("out"), dump_every: 0, report: "report.csv".into() }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceSettings {
    pub ns: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub problems: Vec<ProblemSpec>,
    pub solvers: Vec<SolverEntry>,
    pub output: OutputSettings,
    pub convergence: Option<ConvergenceSettings>,
}

impl Config {
    pub fn load(path: &std::path::Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        parse_config(&text)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))
    }
}

impl Error {
    fn message(&self) -> String {
        match self {
            Error::Config(m) => m.clone(),
            other => other.to_string(),
        }
    }
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config(format!("line {line}: {}", msg.into()))
}

fn parse_one<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| err(line, format!("cannot parse {key} value {v:?}")))
}

fn parse_list<T: FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|part| parse_one(line, key, part)).collect()
}

fn set_once<T>(slot: &mut Option<T>, value: T, line: usize, key: &str) -> Result<()> {
    if slot.is_some() {
        return Err(err(line, format!("duplicate key {key}")));
    }
    *slot = Some(value);
    Ok(())
}

#[derive(Default)]
struct ProblemDraft {
    line: usize,
    kind: Option<ProblemKind>,
    ns: Option<Vec<usize>>,
    levels: Option<usize>,
    leaf: Option<usize>,
    dt_factor: Option<f64>,
    nsteps: Option<usize>,
    seed: Option<u64>,
    coeff_m: Option<usize>,
    coeff_sigma2: Option<f64>,
    coeff_lo: Option<f64>,
    coeff_hi: Option<f64>,
    coeff_constant: Option<f64>,
    init_kind: Option<String>,
    init_c1: Option<f64>,
    init_c2: Option<f64>,
    init_c: Option<f64>,
    init_sigma2: Option<f64>,
    init_amplitude: Option<f64>,
    reaction_k1: Option<f64>,
    reaction_k2: Option<f64>,
}

impl ProblemDraft {
    fn set(&mut self, line: usize, key: &str, v: &str) -> Result<()> {
        match key {
            "kind" => {
                let kind = match v {
                    "heat2d" => ProblemKind::Heat2d,
                    "heat3d" => ProblemKind::Heat3d,
                    "logistic2d" => ProblemKind::Logistic2d,
                    "logistic3d" => ProblemKind::Logistic3d,
                    _ => return Err(err(line, format!("unknown problem kind {v:?}"))),
                };
                set_once(&mut self.kind, kind, line, key)
            }
            "n" => set_once(&mut self.ns, parse_list(line, key, v)?, line, key),
            "levels" => set_once(&mut self.levels, parse_one(line, key, v)?, line, key),
            "leaf" => set_once(&mut self.leaf, parse_one(line, key, v)?, line, key),
            "dt_factor" => set_once(&mut self.dt_factor, parse_one(line, key, v)?, line, key),
            "nsteps" => set_once(&mut self.nsteps, parse_one(line, key, v)?, line, key),
            "seed" => set_once(&mut self.seed, parse_one(line, key, v)?, line, key),
            "coeff.m" => set_once(&mut self.coeff_m, parse_one(line, key, v)?, line, key),
            "coeff.sigma2" => {
                set_once(&mut self.coeff_sigma2, parse_one(line, key, v)?, line, key)
            }
            "coeff.lo" => set_once(&mut self.coeff_lo, parse_one(line, key, v)?, line, key),
            "coeff.hi" => set_once(&mut self.coeff_hi, parse_one(line, key, v)?, line, key),
            "coeff.constant" => {
                set_once(&mut self.coeff_constant, parse_one(line, key, v)?, line, key)
            }
            "init.kind" => set_once(&mut self.init_kind, v.to_string(), line, key),
            "init.c1" => set_once(&mut self.init_c1, parse_one(line, key, v)?, line, key),
            "init.c2" => set_once(&mut self.init_c2, parse_one(line, key, v)?, line, key),
            "init.c" => set_once(&mut self.init_c, parse_one(line, key, v)?, line, key),
            "init.sigma2" => {
                set_once(&mut self.init_sigma2, parse_one(line, key, v)?, line, key)
            }
            "init.amplitude" => {
                set_once(&mut self.init_amplitude, parse_one(line, key, v)?, line, key)
            }
            "reaction.k1" => {
                set_once(&mut self.reaction_k1, parse_one(line, key, v)?, line, key)
            }
            "reaction.k2" => {
                set_once(&mut self.reaction_k2, parse_one(line, key, v)?, line, key)
            }
            _ => Err(err(line, format!("unknown [problem] key {key:?}"))),
        }
    }

    fn finish(self) -> Result<Vec<ProblemSpec>> {
        let line = self.line;
        let kind = self.kind.ok_or_else(|| err(line, "[problem] requires kind"))?;
        let ns = self.ns.clone().ok_or_else(|| err(line, "[problem] requires n"))?;
        if ns.is_empty() {
            return Err(err(line, "n list is empty"));
        }
        if ns.len() > 1 && self.levels.is_some() {
            return Err(err(line, "levels cannot be fixed when n is a list"));
        }
        let dim = kind.dim();
        let leaf = self.leaf.unwrap_or(if dim == 2 { 8 } else { 4 });

        let dt_factor = self.dt_factor.unwrap_or(if dim == 2 { 1.0 } else { 0.1 });
        if dt_factor <= 0.0 {
            return Err(err(line, "dt_factor must be positive"));
        }
        let nsteps = self.nsteps.unwrap_or(100);
        if nsteps == 0 {
            return Err(err(line, "nsteps must be at least 1"));
        }
        let seed = self.seed.unwrap_or(0);

        let coeff = self.resolve_coeff(kind)?;
        let init = self.resolve_init(kind)?;
        let reaction = self.resolve_reaction(kind)?;

        let mut specs = Vec::with_capacity(ns.len());
        for &n in &ns {
            let grid = match self.levels {
                Some(levels) => GridSpec::new(dim, n, leaf, levels),
                None => GridSpec::with_depth(dim, n, leaf),
            }
            .map_err(|e| err(line, e.message()))?;
            specs.push(ProblemSpec {
                kind,
                grid,
                dt_factor,
                nsteps,
                seed,
                coeff: coeff.clone(),
                init: init.clone(),
                reaction,
            });
        }
        Ok(specs)
    }

    fn resolve_coeff(&self, kind: ProblemKind) -> Result<CoeffField> {
        let line = self.line;
        if let Some(c) = self.coeff_constant {
            if self.coeff_m.is_some()
                || self.coeff_sigma2.is_some()
                || self.coeff_lo.is_some()
                || self.coeff_hi.is_some()
            {
                return Err(err(line, "coeff.constant excludes the bump field keys"));
            }
            if c <= 0.0 {
                return Err(err(line, "coeff.constant must be positive"));
            }
            return Ok(CoeffField::Constant(c));
        }
        let (m_def, lo_def, hi_def) = match kind {
            ProblemKind::Heat2d | ProblemKind::Logistic2d => (100, 0.1, 10.0),
            ProblemKind::Heat3d => (1000, 0.05, 20.0),
            ProblemKind::Logistic3d => (200, 0.05, 20.0),
        };
        let m = self.coeff_m.unwrap_or(m_def);
        let sigma2 = self.coeff_sigma2.unwrap_or(0.005);
        let lo = self.coeff_lo.unwrap_or(lo_def);
        let hi = self.coeff_hi.unwrap_or(hi_def);
        if m == 0 {
            return Err(err(line, "coeff.m must be at least 1"));
        }
        if sigma2 <= 0.0 {
            return Err(err(line, "coeff.sigma2 must be positive"));
        }
        if !(lo > 0.0 && hi > lo) {
            return Err(err(line, "coefficient range needs 0 < lo < hi"));
        }
        Ok(CoeffField::Bumps { m, sigma2, lo, hi })
    }

    fn resolve_init(&self, kind: ProblemKind) -> Result<InitKind> {
        let line = self.line;
        let default_kind = match kind {
            ProblemKind::Heat2d => "two_gaussians",
            ProblemKind::Heat3d | ProblemKind::Logistic2d | ProblemKind::Logistic3d => "gaussian",
        };
        let init_kind = self.init_kind.as_deref().unwrap_or(default_kind);
        let sigma2 = self.init_sigma2.unwrap_or(0.05);
        if sigma2 <= 0.0 {
            return Err(err(line, "init.sigma2 must be positive"));
        }
        let forbid = |cond: bool, key: &str| {
            if cond {
                Err(err(line, format!("{key} does not apply to init.kind {init_kind:?}")))
            } else {
                Ok(())
            }
        };
        match init_kind {
            "two_gaussians" => {
                forbid(self.init_c.is_some(), "init.c")?;
                forbid(self.init_amplitude.is_some(), "init.amplitude")?;
                Ok(InitKind::TwoGaussians {
                    c1: self.init_c1.unwrap_or(0.35),
                    c2: self.init_c2.unwrap_or(0.65),
                    sigma2,
                })
            }
            "gaussian" => {
                forbid(self.init_c1.is_some(), "init.c1")?;
                forbid(self.init_c2.is_some(), "init.c2")?;
                let amplitude = self.init_amplitude.unwrap_or(match kind {
                    ProblemKind::Logistic2d => 2.0 / (3.0 * (2.0 * PI * sigma2).sqrt()),
                    ProblemKind::Logistic3d => (2.0 * PI * sigma2.sqrt()).powf(-1.5),
                    _ => 1.0,
                });
                Ok(InitKind::Gaussian { c: self.init_c.unwrap_or(0.5), sigma2, amplitude })
            }
            "sine_product" => {
                forbid(self.init_c1.is_some(), "init.c1")?;
                forbid(self.init_c2.is_some(), "init.c2")?;
                forbid(self.init_c.is_some(), "init.c")?;
                forbid(self.init_amplitude.is_some(), "init.amplitude")?;
                forbid(self.init_sigma2.is_some(), "init.sigma2")?;
                Ok(InitKind::SineProduct)
            }
            _ => Err(err(line, format!("unknown init.kind {init_kind:?}"))),
        }
    }

    fn resolve_reaction(&self, kind: ProblemKind) -> Result<Option<Reaction>> {
        let line = self.line;
        if !kind.has_reaction() {
            if self.reaction_k1.is_some() || self.reaction_k2.is_some() {
                return Err(err(line, "reaction parameters only apply to logistic kinds"));
            }
            return Ok(None);
        }
        let k1 = self.reaction_k1.unwrap_or(1.0);
        let k2 = self.reaction_k2.unwrap_or(10.0);
        if k1 < 0.0 || k2 <= 0.0 {
            return Err(err(line, "reaction needs k1 >= 0 and k2 > 0"));
        }
        Ok(Some(Reaction { k1, k2 }))
    }
}

#[derive(Default)]
struct SolverDraft {
    line: usize,
    precond: Option<String>,
    eps: Option<Vec<f64>>,
    tol: Option<f64>,
    maxit: Option<usize>,
    warm_start: Option<bool>,
}

impl SolverDraft {
    fn set(&mut self, line: usize, key: &str, v: &str) -> Result<()> {
        match key {
            "precond" => set_once(&mut self.precond, v.to_string(), line, key),
            "eps" => set_once(&mut self.eps, parse_list(line, key, v)?, line, key),
            "tol" => set_once(&mut self.tol, parse_one(line, key, v)?, line, key),
            "maxit" => set_once(&mut self.maxit, parse_one(line, key, v)?, line, key),
            "warm_start" => {
                let flag = match v {
                    "true" => true,
                    "false" => false,
                    _ => return Err(err(line, format!("warm_start must be true or false, got {v:?}"))),
                };
                set_once(&mut self.warm_start, flag, line, key)
            }
            _ => Err(err(line, format!("unknown [solver] key {key:?}"))),
        }
    }

    fn finish(self) -> Result<Vec<SolverEntry>> {
        let line = self.line;
        let tol = self.tol.unwrap_or(1e-12);
        if tol <= 0.0 {
            return Err(err(line, "tol must be positive"));
        }
        let maxit = self.maxit.unwrap_or(1000);
        if maxit == 0 {
            return Err(err(line, "maxit must be at least 1"));
        }
        let warm_start = self.warm_start.unwrap_or(true);
        let precond = self.precond.as_deref().unwrap_or("phif");
        let choices: Vec<PrecondChoice> = match precond {
            "none" => {
                if self.eps.is_some() {
                    return Err(err(line, "eps does not apply to precond none"));
                }
                vec![PrecondChoice::None]
            }
            "phif" | "ichol" => {
                let eps = self.eps.unwrap_or_else(|| vec![1e-3]);
                if eps.is_empty() {
                    return Err(err(line, "eps list is empty"));
                }
                if let Some(&bad) = eps.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
                    return Err(err(line, format!("eps must lie in (0, 1), got {bad}")));
                }
                eps.into_iter()
                    .map(|e| {
                        if precond == "phif" {
                            PrecondChoice::Phif { eps: e }
                        } else {
                            PrecondChoice::Ichol { droptol: e }
                        }
                    })
                    .collect()
            }
            _ => return Err(err(line, format!("unknown precond {precond:?}"))),
        };
        Ok(choices
            .into_iter()
            .map(|choice| SolverEntry { choice, tol, maxit, warm_start })
            .collect())
    }
}

pub fn parse_config(text: &str) -> Result<Config> {
    enum Section {
        None,
        Problem,
        Solver,
        Output,
        Convergence,
    }

    let mut problems: Vec<ProblemDraft> = Vec::new();
    let mut solvers: Vec<SolverDraft> = Vec::new();
    let mut output = OutputSettings::default();
    let mut output_seen = false;
    let mut output_keys: Vec<String> = Vec::new();
    let mut convergence: Option<ConvergenceSettings> = None;
    let mut section = Section::None;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name.trim() {
                "problem" => {
                    problems.push(ProblemDraft { line: line_no, ..ProblemDraft::default() });
                    Section::Problem
                }
                "solver" => {
                    solvers.push(SolverDraft { line: line_no, ..SolverDraft::default() });
                    Section::Solver
                }
                "output" => {
                    if output_seen {
                        return Err(err(line_no, "duplicate [output] section"));
                    }
                    output_seen = true;
                    Section::Output
                }
                "convergence" => {
                    if convergence.is_some() {
                        return Err(err(line_no, "duplicate [convergence] section"));
                    }
                    convergence = Some(ConvergenceSettings { ns: Vec::new() });
                    Section::Convergence
                }
                other => return Err(err(line_no, format!("unknown section [{other}]"))),
            };
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected key = value, got {line:?}")))?;
        let key = key.trim();
        let value = value.trim();
        match section {
            Section::None => {
                return Err(err(line_no, "key outside of any [section]"));
            }
            Section::Problem => {
                problems.last_mut().unwrap().set(line_no, key, value)?;
            }
            Section::Solver => {
                solvers.last_mut().unwrap().set(line_no, key, value)?;
            }
            Section::Output => {
                if output_keys.iter().any(|k| k == key) {
                    return Err(err(line_no, format!("duplicate key {key}")));
                }
                output_keys.push(key.to_string());
                match key {
                    "dir" => output.dir = PathBuf::from(value),
                    "dump_every" => output.dump_every = parse_one(line_no, key, value)?,
                    "report" => output.report = value.to_string(),
                    _ => return Err(err(line_no, format!("unknown [output] key {key:?}"))),
                }
            }
            Section::Convergence => {
                let conv = convergence.as_mut().unwrap();
                match key {
                    "ns" => {
                        if !conv.ns.is_empty() {
                            return Err(err(line_no, "duplicate key ns"));
                        }
                        conv.ns = parse_list(line_no, key, value)?;
                        if conv.ns.iter().any(|&n| n < 2) {
                            return Err(err(line_no, "convergence grid sizes must be >= 2"));
                        }
                    }
                    _ => {
                        return Err(err(line_no, format!("unknown [convergence] key {key:?}")))
                    }
                }
            }
        }
    }

    if problems.is_empty() {
        return Err(Error::Config("config defines no [problem] section".into()));
    }
    let mut specs = Vec::new();
    for draft in problems {
        specs.extend(draft.finish()?);
    }
    let mut entries = Vec::new();
    for draft in solvers {
        entries.extend(draft.finish()?);
    }
    if entries.is_empty() {
        entries = SolverDraft::default().finish()?;
    }
    if let Some(conv) = &convergence {
        if conv.ns.is_empty() {
            return Err(Error::Config("[convergence] requires ns".into()));
        }
    }
    Ok(Config { problems: specs, solvers: entries, output, convergence })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_heat2d_fills_defaults() {
        let cfg = parse_config("[problem]\nkind = heat2d\nn = 16\n").unwrap();
        assert_eq!(cfg.problems.len(), 1);
        let p = &cfg.problems[0];
        assert_eq!(p.kind, ProblemKind::Heat2d);
        assert_eq!(p.grid.n, 16);
        assert_eq!(p.grid.leaf, 8);
        assert_eq!(p.grid.levels, 1);
        assert_eq!(p.dt_factor, 1.0);
        assert_eq!(p.nsteps, 100);
        assert_eq!(p.seed, 0);
        assert_eq!(p.coeff, CoeffField::Bumps { m: 100, sigma2: 0.005, lo: 0.1, hi: 10.0 });
        assert_eq!(p.init, InitKind::TwoGaussians { c1: 0.35, c2: 0.65, sigma2: 0.05 });
        assert!(p.reaction.is_none());
        assert_eq!(cfg.solvers.len(), 1);
        let s = &cfg.solvers[0];
        assert_eq!(s.choice, PrecondChoice::Phif { eps: 1e-3 });
        assert_eq!(s.tol, 1e-12);
        assert_eq!(s.maxit, 1000);
        assert!(s.warm_start);
    }

    #[test]
    fn explicit_levels_and_odd_leaf() {
        let cfg =
            parse_config("[problem]\nkind = heat2d\nn = 24\nleaf = 3\nlevels = 3\n").unwrap();
        assert_eq!(cfg.problems[0].grid.levels, 3);
        assert_eq!(cfg.problems[0].grid.leaf, 3);
    }

    #[test]
    fn unknown_key_is_an_error_with_line_number() {
        let e = parse_config("[problem]\nkind = heat2d\nn = 16\ntypo = 5\n").unwrap_err();
        let msg = format!("{e}");
        assert!(msg.contains("line 4"), "{msg}");
        assert!(msg.contains("typo"), "{msg}");
    }

    #[test]
    fn eps_list_expands_to_entries() {
        let cfg = parse_config(
            "[problem]\nkind = heat2d\nn = 16\n[solver]\nprecond = phif\neps = 1e-3,1e-6\n[solver]\nprecond = ichol\neps = 1e-3\nwarm_start = false\n",
        )
        .unwrap();
        assert_eq!(cfg.solvers.len(), 3);
        assert_eq!(cfg.solvers[0].choice, PrecondChoice::Phif { eps: 1e-3 });
        assert_eq!(cfg.solvers[1].choice, PrecondChoice::Phif { eps: 1e-6 });
        assert_eq!(cfg.solvers[2].choice, PrecondChoice::Ichol { droptol: 1e-3 });
        assert!(cfg.solvers[0].warm_start);
        assert!(!cfg.solvers[2].warm_start);
    }

    #[test]
    fn n_list_expands_to_specs() {
        let cfg = parse_config("[problem]\nkind = heat2d\nn = 128,256\n").unwrap();
        assert_eq!(cfg.problems.len(), 2);
        assert_eq!(cfg.problems[0].problem_id(), "heat2d_n128");
        assert_eq!(cfg.problems[1].problem_id(), "heat2d_n256");
        assert_eq!(cfg.problems[0].grid.levels, 4);
        assert_eq!(cfg.problems[1].grid.levels, 5);
    }

    #[test]
    fn n_list_with_fixed_levels_is_rejected() {
        assert!(parse_config("[problem]\nkind = heat2d\nn = 128,256\nlevels = 4\n").is_err());
    }

    #[test]
    fn logistic_defaults_carry_the_reaction() {
        let cfg = parse_config(
            "[problem]\nkind = logistic2d\nn = 16\nreaction.k1 = 1\nreaction.k2 = 10\n",
        )
        .unwrap();
        let p = &cfg.problems[0];
        assert_eq!(p.reaction, Some(Reaction { k1: 1.0, k2: 10.0 }));
        match p.init {
            InitKind::Gaussian { c, sigma2, amplitude } => {
                assert_eq!(c, 0.5);
                assert_eq!(sigma2, 0.05);
                let expected = 2.0 / (3.0 * (2.0 * PI * 0.05).sqrt());
                assert!((amplitude - expected).abs() < 1e-15);
            }
            _ => panic!("expected gaussian default"),
        }
        assert_eq!(p.coeff, CoeffField::Bumps { m: 100, sigma2: 0.005, lo: 0.1, hi: 10.0 });
    }

    #[test]
    fn reaction_on_heat_kind_is_rejected() {
        assert!(
            parse_config("[problem]\nkind = heat2d\nn = 16\nreaction.k1 = 1\n").is_err()
        );
    }

    #[test]
    fn heat3d_defaults() {
        let cfg = parse_config("[problem]\nkind = heat3d\nn = 8\n").unwrap();
        let p = &cfg.problems[0];
        assert_eq!(p.grid.leaf, 4);
        assert_eq!(p.dt_factor, 0.1);
        assert_eq!(p.coeff, CoeffField::Bumps { m: 1000, sigma2: 0.005, lo: 0.05, hi: 20.0 });
        assert_eq!(p.init, InitKind::Gaussian { c: 0.5, sigma2: 0.05, amplitude: 1.0 });
    }

    #[test]
    fn constant_coefficient_excludes_bump_keys() {
        let ok = parse_config(
            "[problem]\nkind = heat2d\nn = 32\ncoeff.constant = 1\ninit.kind = sine_product\n",
        )
        .unwrap();
        assert_eq!(ok.problems[0].coeff, CoeffField::Constant(1.0));
        assert_eq!(ok.problems[0].init, InitKind::SineProduct);
        assert!(parse_config(
            "[problem]\nkind = heat2d\nn = 32\ncoeff.constant = 1\ncoeff.m = 5\n"
        )
        .is_err());
    }

    #[test]
    fn init_subkeys_must_match_init_kind() {
        assert!(parse_config(
            "[problem]\nkind = heat2d\nn = 16\ninit.kind = gaussian\ninit.c1 = 0.3\n"
        )
        .is_err());
    }

    #[test]
    fn non_positive_tolerances_are_rejected() {
        assert!(parse_config(
            "[problem]\nkind = heat2d\nn = 16\n[solver]\nprecond = phif\neps = 0\n"
        )
        .is_err());
        assert!(parse_config(
            "[problem]\nkind = heat2d\nn = 16\n[solver]\ntol = -1e-12\n"
        )
        .is_err());
    }

    #[test]
    fn none_precond_takes_no_eps() {
        let cfg =
            parse_config("[problem]\nkind = heat2d\nn = 16\n[solver]\nprecond = none\n")
                .unwrap();
        assert_eq!(cfg.solvers[0].choice, PrecondChoice::None);
        assert!(parse_config(
            "[problem]\nkind = heat2d\nn = 16\n[solver]\nprecond = none\neps = 1e-3\n"
        )
        .is_err());
    }

    #[test]
    fn duplicate_key_is_rejected() {
        assert!(parse_config("[problem]\nkind = heat2d\nn = 16\nn = 32\n").is_err());
    }

    #[test]
    fn output_and_convergence_sections_parse() {
        let cfg = parse_config(
            "[problem]\nkind = heat2d\nn = 32\ncoeff.constant = 1\ninit.kind = sine_product\n\
             [output]\ndir = results\ndump_every = 10\nreport = table.csv\n\
             [convergence]\nns = 32,64,128\n",
        )
        .unwrap();
        assert_eq!(cfg.output.dir, PathBuf::from("results"));
        assert_eq!(cfg.output.dump_every, 10);
        assert_eq!(cfg.output.report, "table.csv");
        assert_eq!(cfg.convergence.unwrap().ns, vec![32, 64, 128]);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = parse_config(
            "# benchmark setup\n\n[problem]\n# the grid\nkind = heat2d\nn = 16\n",
        )
        .unwrap();
        assert_eq!(cfg.problems.len(), 1);
    }

    #[test]
    fn missing_problem_section_is_an_error() {
        assert!(parse_config("[solver]\nprecond = phif\n").is_err());
        assert!(parse_config("kind = heat2d\n").is_err());
    }
}
