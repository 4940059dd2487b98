//! Flat `key = value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored. Lists are comma separated,
//! `inf` is accepted for exponents and `none` for an absent cutoff.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{EmError, Result};
use crate::lab::heat::{HeatKind, HeatParams};
use crate::lab::strichartz::{admissible, EquationKind};
use crate::spectral::PhysParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    Simulate,
    SweepC,
    Strichartz,
    Dispersion,
    Heat,
    BesovCheck,
    EnergyReport,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Simulate,
        ExperimentKind::SweepC,
        ExperimentKind::Strichartz,
        ExperimentKind::Dispersion,
        ExperimentKind::Heat,
        ExperimentKind::BesovCheck,
        ExperimentKind::EnergyReport,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::SweepC => "sweep-c",
            ExperimentKind::Strichartz => "strichartz",
            ExperimentKind::Dispersion => "dispersion",
            ExperimentKind::Heat => "heat",
            ExperimentKind::BesovCheck => "besov-check",
            ExperimentKind::EnergyReport => "energy-report",
        }
    }

    pub fn parse(s: &str) -> Result<ExperimentKind> {
        ExperimentKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| EmError::Config(format!("unknown experiment kind '{s}'")))
    }

    /// Kinds that run the nonlinear solver.
    pub fn uses_solver(self) -> bool {
        matches!(
            self,
            ExperimentKind::Simulate | ExperimentKind::SweepC | ExperimentKind::EnergyReport
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Recipe {
    Zero,
    SingleShell,
    RandomSmooth,
    TaylorGreen,
}

impl Recipe {
    pub fn name(self) -> &'static str {
        match self {
            Recipe::Zero => "zero",
            Recipe::SingleShell => "single-shell",
            Recipe::RandomSmooth => "random-smooth",
            Recipe::TaylorGreen => "taylor-green",
        }
    }

    pub fn parse(s: &str) -> Result<Recipe> {
        [
            Recipe::Zero,
            Recipe::SingleShell,
            Recipe::RandomSmooth,
            Recipe::TaylorGreen,
        ]
        .into_iter()
        .find(|r| r.name() == s)
        .ok_or_else(|| EmError::Config(format!("unknown initial-data recipe '{s}'")))
    }

    pub fn randomized(self) -> bool {
        self == Recipe::RandomSmooth
    }
}

/// Initial-data recipe with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSpec {
    pub recipe: Recipe,
    /// Dyadic index of the single-shell recipe.
    pub shell: i32,
    /// Random-smooth spectrum `|xi|^-a exp(-|xi|^2 / xi0^2)`.
    pub spectrum_a: f64,
    pub spectrum_xi0: f64,
    /// `L^2` norms of `u`, `E` and `B`.
    pub u_amp: f64,
    pub e_amp: f64,
    pub b_amp: f64,
    pub seed: Option<u64>,
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec {
            recipe: Recipe::RandomSmooth,
            shell: 2,
            spectrum_a: 1.0,
            spectrum_xi0: 4.0,
            u_amp: 0.05,
            e_amp: 0.05,
            b_amp: 0.05,
            seed: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    pub length: f64,
    pub c: f64,
    pub sigma: f64,
    pub nu: f64,
    pub cutoff_index: Option<i32>,
    pub dt: f64,
    pub t_end: f64,
    /// Snapshot every `cadence` steps.
    pub cadence: usize,
    pub data: DataSpec,
    pub out: Option<PathBuf>,
    pub threads: usize,
    /// Speeds of light of `sweep-c`.
    pub c_list: Vec<f64>,
    /// Interval endpoints of `energy-report`; empty means `[0, t_end]`.
    pub partition: Vec<f64>,
    /// `frequency` or `crossover` for `strichartz`.
    pub strichartz_mode: String,
    pub alpha: f64,
    pub q: f64,
    pub r: f64,
    pub j_list: Vec<i32>,
    pub horizon: f64,
    pub alpha_list: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub t_count: usize,
    pub tol: f64,
    pub heat_kind: HeatKind,
    pub s: f64,
    pub p: f64,
    pub m: f64,
    pub theta: f64,
    pub n_list: Vec<usize>,
    /// Number of seeds, counted from `seed`.
    pub seeds: usize,
    /// Random pairs of `besov-check`.
    pub pairs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Simulate,
            n: 64,
            length: 2.0 * std::f64::consts::PI,
            c: 8.0,
            sigma: 1.0,
            nu: 0.0,
            cutoff_index: None,
            dt: 0.01,
            t_end: 1.0,
            cadence: 10,
            data: DataSpec::default(),
            out: None,
            threads: 1,
            c_list: vec![8.0, 16.0, 32.0],
            partition: vec![],
            strichartz_mode: "frequency".into(),
            alpha: 0.0,
            q: 4.0,
            r: f64::INFINITY,
            j_list: vec![3, 4, 5, 6],
            horizon: 1.0,
            alpha_list: vec![0.0, 0.25, 0.5],
            t_min: 10.0,
            t_max: 1000.0,
            t_count: 9,
            tol: 1e-6,
            heat_kind: HeatKind::Smoothing,
            s: 0.0,
            p: 2.0,
            m: 2.0,
            theta: 1.0,
            n_list: vec![32, 64, 128],
            seeds: 50,
            pairs: 100,
        }
    }
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(|x| x.trim())
        .filter(|x| !x.is_empty())
        .map(|x| value(key, x))
        .collect()
}

fn value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| EmError::Config(format!("key '{key}': cannot parse '{v}'")))
}

fn need(errs: &mut Vec<String>, ok: bool, msg: &str) {
    if !ok {
        errs.push(msg.to_string());
    }
}

fn show_list<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub fn for_kind(kind: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            kind,
            ..Default::default()
        }
    }

    /// Parse `key = value` lines on top of the defaults.
    pub fn from_text(text: &str) -> Result<ExperimentConfig> {
        let mut map = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| EmError::Config(format!("line {}: expected key = value", no + 1)))?;
            let k = k.trim().to_string();
            if map.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(EmError::Config(format!("key '{k}' given twice")));
            }
        }
        let mut cfg = ExperimentConfig::default();
        for (k, v) in &map {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, k: &str, v: &str) -> Result<()> {
        let d = &mut self.data;
        match k {
            "kind" => self.kind = ExperimentKind::parse(v)?,
            "n" => self.n = value(k, v)?,
            "length" => self.length = value(k, v)?,
            "c" => self.c = value(k, v)?,
            "sigma" => self.sigma = value(k, v)?,
            "nu" => self.nu = value(k, v)?,
            "cutoff_index" => self.cutoff_index = if v == "none" { None } else { Some(value(k, v)?) },
            "dt" => self.dt = value(k, v)?,
            "t_end" => self.t_end = value(k, v)?,
            "cadence" => self.cadence = value(k, v)?,
            "recipe" => d.recipe = Recipe::parse(v)?,
            "shell" => d.shell = value(k, v)?,
            "spectrum_a" => d.spectrum_a = value(k, v)?,
            "spectrum_xi0" => d.spectrum_xi0 = value(k, v)?,
            "u_amp" => d.u_amp = value(k, v)?,
            "e_amp" => d.e_amp = value(k, v)?,
            "b_amp" => d.b_amp = value(k, v)?,
            "seed" => d.seed = Some(value(k, v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            "threads" => self.threads = value(k, v)?,
            "c_list" => self.c_list = list(k, v)?,
            "partition" => self.partition = list(k, v)?,
            "strichartz_mode" => self.strichartz_mode = v.to_string(),
            "alpha" => self.alpha = value(k, v)?,
            "q" => self.q = value(k, v)?,
            "r" => self.r = value(k, v)?,
            "j_list" => self.j_list = list(k, v)?,
            "horizon" => self.horizon = value(k, v)?,
            "alpha_list" => self.alpha_list = list(k, v)?,
            "t_min" => self.t_min = value(k, v)?,
            "t_max" => self.t_max = value(k, v)?,
            "t_count" => self.t_count = value(k, v)?,
            "tol" => self.tol = value(k, v)?,
            "heat_kind" => {
                self.heat_kind = match v {
                    "smoothing" => HeatKind::Smoothing,
                    "forced" => HeatKind::Forced,
                    _ => return Err(EmError::Config(format!("unknown heat_kind '{v}'"))),
                }
            }
            "s" => self.s = value(k, v)?,
            "p" => self.p = value(k, v)?,
            "m" => self.m = value(k, v)?,
            "theta" => self.theta = value(k, v)?,
            "n_list" => self.n_list = list(k, v)?,
            "seeds" => self.seeds = value(k, v)?,
            "pairs" => self.pairs = value(k, v)?,
            _ => return Err(EmError::Config(format!("unknown key '{k}'"))),
        }
        Ok(())
    }

    /// Canonical text form: every key in a fixed order. Parsing it back gives
    /// the same configuration.
    pub fn to_text(&self) -> String {
        let d = &self.data;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("kind", self.kind.name().into());
        kv("n", self.n.to_string());
        kv("length", self.length.to_string());
        kv("c", self.c.to_string());
        kv("sigma", self.sigma.to_string());
        kv("nu", self.nu.to_string());
        kv(
            "cutoff_index",
            self.cutoff_index.map_or("none".into(), |v| v.to_string()),
        );
        kv("dt", self.dt.to_string());
        kv("t_end", self.t_end.to_string());
        kv("cadence", self.cadence.to_string());
        kv("recipe", d.recipe.name().into());
        kv("shell", d.shell.to_string());
        kv("spectrum_a", d.spectrum_a.to_string());
        kv("spectrum_xi0", d.spectrum_xi0.to_string());
        kv("u_amp", d.u_amp.to_string());
        kv("e_amp", d.e_amp.to_string());
        kv("b_amp", d.b_amp.to_string());
        if let Some(seed) = d.seed {
            kv("seed", seed.to_string());
        }
        if let Some(out) = &self.out {
            kv("out", out.display().to_string());
        }
        kv("threads", self.threads.to_string());
        kv("c_list", show_list(&self.c_list));
        kv("partition", show_list(&self.partition));
        kv("strichartz_mode", self.strichartz_mode.clone());
        kv("alpha", self.alpha.to_string());
        kv("q", self.q.to_string());
        kv("r", self.r.to_string());
        kv("j_list", show_list(&self.j_list));
        kv("horizon", self.horizon.to_string());
        kv("alpha_list", show_list(&self.alpha_list));
        kv("t_min", self.t_min.to_string());
        kv("t_max", self.t_max.to_string());
        kv("t_count", self.t_count.to_string());
        kv("tol", self.tol.to_string());
        kv(
            "heat_kind",
            match self.heat_kind {
                HeatKind::Smoothing => "smoothing".into(),
                HeatKind::Forced => "forced".into(),
            },
        );
        kv("s", self.s.to_string());
        kv("p", self.p.to_string());
        kv("m", self.m.to_string());
        kv("theta", self.theta.to_string());
        kv("n_list", show_list(&self.n_list));
        kv("seeds", self.seeds.to_string());
        kv("pairs", self.pairs.to_string());
        s
    }

    pub fn params(&self) -> PhysParams {
        PhysParams {
            c: self.c,
            sigma: self.sigma,
            nu: self.nu,
            cutoff_index: self.cutoff_index,
        }
    }

    pub fn heat_params(&self) -> HeatParams {
        let mut h = match self.heat_kind {
            HeatKind::Smoothing => HeatParams::smoothing(self.s, self.p, self.q, self.alpha, self.horizon),
            HeatKind::Forced => HeatParams::forced(
                self.s,
                self.p,
                self.q,
                self.m,
                self.r,
                self.theta,
                self.alpha,
                self.horizon,
            ),
        };
        if self.kind == ExperimentKind::Heat {
            h.band = h
                .band
                .min((self.n_list.iter().min().copied().unwrap_or(32) / 3) as f64);
        }
        h
    }

    /// Check every field the selected experiment uses; all violations are
    /// listed in the error.
    pub fn validate(&self) -> Result<()> {
        let mut errs: Vec<String> = Vec::new();
        need(&mut errs, self.threads >= 1, "threads must be >= 1");
        if self.kind.uses_solver() || self.kind == ExperimentKind::BesovCheck {
            need(
                &mut errs,
                self.n >= 8 && self.n.is_power_of_two(),
                "n must be a power of two >= 8",
            );
            need(
                &mut errs,
                self.length > 0.0 && self.length.is_finite(),
                "length must be > 0",
            );
        }
        if self.kind.uses_solver() {
            let mut p = self.params();
            let speeds = if self.kind == ExperimentKind::SweepC {
                self.c_list.clone()
            } else {
                vec![self.c]
            };
            need(&mut errs, !speeds.is_empty(), "c_list must not be empty");
            for c in speeds {
                p.c = c;
                if let Err(e) = p.validate() {
                    errs.push(e.to_string());
                }
            }
            need(&mut errs, self.dt > 0.0 && self.dt.is_finite(), "dt must be > 0");
            need(
                &mut errs,
                self.t_end > 0.0 && self.t_end.is_finite(),
                "t_end must be > 0",
            );
            if self.dt > 0.0 && self.t_end > 0.0 {
                let steps = self.t_end / self.dt;
                need(
                    &mut errs,
                    (steps - steps.round()).abs() <= 1e-9 * steps.max(1.0),
                    "dt must divide t_end",
                );
            }
            need(&mut errs, self.cadence >= 1, "cadence must be >= 1");
            let d = &self.data;
            need(
                &mut errs,
                d.u_amp >= 0.0 && d.e_amp >= 0.0 && d.b_amp >= 0.0,
                "amplitudes must be >= 0",
            );
            need(
                &mut errs,
                !d.recipe.randomized() || d.seed.is_some(),
                "a seed is required for the random-smooth recipe",
            );
            if d.recipe == Recipe::SingleShell {
                need(
                    &mut errs,
                    2f64.powi(d.shell) * 2.0 * std::f64::consts::PI / self.length >= 1.0
                        && 0.75 * 2f64.powi(d.shell)
                            < (self.n / 3) as f64 * 2.0 * std::f64::consts::PI / self.length,
                    "shell must lie inside the resolved band",
                );
            }
            if d.recipe == Recipe::RandomSmooth {
                need(&mut errs, d.spectrum_xi0 > 0.0, "spectrum_xi0 must be > 0");
                need(&mut errs, d.spectrum_a.is_finite(), "spectrum_a must be finite");
            }
            if self.kind == ExperimentKind::EnergyReport && !self.partition.is_empty() {
                need(
                    &mut errs,
                    self.partition.windows(2).all(|w| w[1] > w[0]),
                    "partition must increase",
                );
                need(
                    &mut errs,
                    self.partition[0] >= 0.0 && *self.partition.last().unwrap_or(&0.0) <= self.t_end + 1e-12,
                    "partition must lie in [0, t_end]",
                );
            }
        }
        match self.kind {
            ExperimentKind::Strichartz => {
                need(
                    &mut errs,
                    self.strichartz_mode == "frequency" || self.strichartz_mode == "crossover",
                    "strichartz_mode must be frequency or crossover",
                );
                need(
                    &mut errs,
                    admissible(EquationKind::Wave.dispersion_sigma(), self.q, self.r),
                    "(q, r) is not wave admissible",
                );
                need(&mut errs, self.alpha >= 0.0, "alpha must be >= 0");
                need(&mut errs, self.horizon > 0.0, "horizon must be > 0");
                if self.strichartz_mode == "crossover" {
                    need(&mut errs, self.alpha > 0.0, "the crossover needs alpha > 0");
                } else {
                    need(
                        &mut errs,
                        self.j_list.len() >= 4,
                        "j_list needs at least 4 shells",
                    );
                    need(
                        &mut errs,
                        self.n.is_power_of_two() && self.n >= 16,
                        "n must be a power of two >= 16",
                    );
                    need(
                        &mut errs,
                        self.j_list
                            .iter()
                            .all(|&j| j >= 0 && 2f64.powi(j + 1) < (self.n / 2) as f64 + 1.0),
                        "every shell must fit on the grid",
                    );
                }
            }
            ExperimentKind::Dispersion => {
                need(
                    &mut errs,
                    self.alpha_list.iter().all(|a| (0.0..=0.5).contains(a)),
                    "alpha_list entries must lie in [0, 1/2]",
                );
                need(
                    &mut errs,
                    !self.alpha_list.is_empty(),
                    "alpha_list must not be empty",
                );
                need(
                    &mut errs,
                    self.t_min > 0.0 && self.t_max > self.t_min,
                    "need 0 < t_min < t_max",
                );
                need(&mut errs, self.t_count >= 4, "t_count must be >= 4");
                need(&mut errs, self.tol > 0.0, "tol must be > 0");
            }
            ExperimentKind::Heat => {
                if let Err(e) = self.heat_params().validate() {
                    errs.push(e.to_string());
                }
                need(
                    &mut errs,
                    !self.n_list.is_empty() && self.n_list.iter().all(|n| n.is_power_of_two() && *n >= 8),
                    "n_list entries must be powers of two >= 8",
                );
                need(&mut errs, self.seeds >= 1, "seeds must be >= 1");
                need(
                    &mut errs,
                    self.data.seed.is_some(),
                    "a seed is required for heat runs",
                );
            }
            ExperimentKind::BesovCheck => {
                need(&mut errs, self.pairs >= 1, "pairs must be >= 1");
                need(
                    &mut errs,
                    self.data.seed.is_some(),
                    "a seed is required for besov-check",
                );
            }
            _ => {}
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(EmError::Config(errs.join("; ")))
        }
    }
}
