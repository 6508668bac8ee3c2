//! Flat `key = value` run configuration.
//!
//! Grammar: one assignment per line, `#` starts a comment, blank lines
//! ignored.  Keys are dotted lowercase identifiers; values are strings,
//! booleans, floats, integers, or comma-separated float lists.  Unknown
//! and duplicate keys are errors, so configs stay diff-friendly and
//! typo-safe.  `render` writes the canonical form, which parses back to
//! an identical struct (floats are emitted with full precision).

use fracburgers::io::format_float;
use fracburgers::{Error, Result};
use std::collections::BTreeSet;

/// Which initial data the evolution commands start from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialData {
    /// Candidate profile of the inline stationary sweep.
    Stationary,
    /// u0 = -sign(x): the admissible stationary shock.
    MinusSign,
    /// u0 = sign(x): rarefaction data.
    Sign,
}

impl InitialData {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "stationary" => Ok(InitialData::Stationary),
            "minus-sign" => Ok(InitialData::MinusSign),
            "sign" => Ok(InitialData::Sign),
            other => Err(Error::Config(format!(
                "evolution.initial must be stationary | minus-sign | sign, got {other:?}"
            ))),
        }
    }

    fn render(self) -> &'static str {
        match self {
            InitialData::Stationary => "stationary",
            InitialData::MinusSign => "minus-sign",
            InitialData::Sign => "sign",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub lambda: f64,
    pub grid_h: f64,
    pub grid_half_cells: usize,
    pub eps_list: Vec<f64>,
    pub damping: f64,
    pub tol_fp: f64,
    pub max_iter: usize,
    pub linear_tol: f64,
    pub t_end: f64,
    pub checkpoints: Vec<f64>,
    pub cfl_safety: f64,
    pub fractal_enabled: bool,
    pub initial: InitialData,
    pub evolution_epsilon: f64,
    pub audit_levels: Vec<f64>,
    pub audit_cut: f64,
    pub bump_width: f64,
    /// Path to a stationary archive for the demo, or None for an inline
    /// solve.
    pub stationary_archive: Option<String>,
    /// When false and no archive is given, the demo refuses to solve
    /// inline (useful to guarantee reuse of a vetted profile).
    pub inline_solve: bool,
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            name: "run".into(),
            lambda: 0.5,
            grid_h: 0.01,
            grid_half_cells: 2000,
            eps_list: vec![0.1, 0.05, 0.02, 0.01],
            damping: 0.5,
            tol_fp: 1e-9,
            max_iter: 1200,
            linear_tol: 1e-11,
            t_end: 0.5,
            checkpoints: vec![0.05, 0.1, 0.25],
            cfl_safety: 0.5,
            fractal_enabled: true,
            initial: InitialData::Stationary,
            evolution_epsilon: 0.0,
            audit_levels: vec![-0.5, -0.25, 0.0, 0.25, 0.5],
            audit_cut: 0.25,
            bump_width: 1.0,
            stationary_archive: None,
            inline_solve: true,
            out_dir: "out".into(),
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|e| Error::Config(format!("{key}: unparsable float {value:?}: {e}")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|e| Error::Config(format!("{key}: unparsable integer {value:?}: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::Config(format!("{key}: expected true|false, got {other:?}"))),
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|piece| parse_f64(key, piece.trim())).collect()
}

fn render_list(values: &[f64]) -> String {
    values.iter().map(|v| format_float(*v)).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut config = RunConfig::default();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value, got {raw:?}", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("duplicate key {key:?}")));
            }
            match key {
                "name" => config.name = value.to_string(),
                "lambda" => config.lambda = parse_f64(key, value)?,
                "grid.h" => config.grid_h = parse_f64(key, value)?,
                "grid.half_cells" => config.grid_half_cells = parse_usize(key, value)?,
                "sweep.eps_list" => config.eps_list = parse_list(key, value)?,
                "sweep.damping" => config.damping = parse_f64(key, value)?,
                "sweep.tol_fp" => config.tol_fp = parse_f64(key, value)?,
                "sweep.max_iter" => config.max_iter = parse_usize(key, value)?,
                "sweep.linear_tol" => config.linear_tol = parse_f64(key, value)?,
                "evolution.t_end" => config.t_end = parse_f64(key, value)?,
                "evolution.checkpoints" => config.checkpoints = parse_list(key, value)?,
                "evolution.cfl_safety" => config.cfl_safety = parse_f64(key, value)?,
                "evolution.fractal_enabled" => config.fractal_enabled = parse_bool(key, value)?,
                "evolution.initial" => config.initial = InitialData::parse(value)?,
                "evolution.epsilon" => config.evolution_epsilon = parse_f64(key, value)?,
                "demo.audit_levels" => config.audit_levels = parse_list(key, value)?,
                "demo.audit_cut" => config.audit_cut = parse_f64(key, value)?,
                "demo.bump_width" => config.bump_width = parse_f64(key, value)?,
                "demo.stationary_archive" => {
                    config.stationary_archive = Some(value.to_string())
                }
                "demo.inline_solve" => config.inline_solve = parse_bool(key, value)?,
                "out" => config.out_dir = value.to_string(),
                other => return Err(Error::Config(format!("unknown key {other:?}"))),
            }
        }
        config.validate()?;
        Ok(config)
    }

    /// Canonical rendering; parses back to an identical struct.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("name = {}\n", self.name));
        out.push_str(&format!("lambda = {}\n", format_float(self.lambda)));
        out.push_str(&format!("grid.h = {}\n", format_float(self.grid_h)));
        out.push_str(&format!("grid.half_cells = {}\n", self.grid_half_cells));
        out.push_str(&format!("sweep.eps_list = {}\n", render_list(&self.eps_list)));
        out.push_str(&format!("sweep.damping = {}\n", format_float(self.damping)));
        out.push_str(&format!("sweep.tol_fp = {}\n", format_float(self.tol_fp)));
        out.push_str(&format!("sweep.max_iter = {}\n", self.max_iter));
        out.push_str(&format!("sweep.linear_tol = {}\n", format_float(self.linear_tol)));
        out.push_str(&format!("evolution.t_end = {}\n", format_float(self.t_end)));
        out.push_str(&format!("evolution.checkpoints = {}\n", render_list(&self.checkpoints)));
        out.push_str(&format!("evolution.cfl_safety = {}\n", format_float(self.cfl_safety)));
        out.push_str(&format!("evolution.fractal_enabled = {}\n", self.fractal_enabled));
        out.push_str(&format!("evolution.initial = {}\n", self.initial.render()));
        out.push_str(&format!(
            "evolution.epsilon = {}\n",
            format_float(self.evolution_epsilon)
        ));
        out.push_str(&format!("demo.audit_levels = {}\n", render_list(&self.audit_levels)));
        out.push_str(&format!("demo.audit_cut = {}\n", format_float(self.audit_cut)));
        out.push_str(&format!("demo.bump_width = {}\n", format_float(self.bump_width)));
        if let Some(archive) = &self.stationary_archive {
            out.push_str(&format!("demo.stationary_archive = {archive}\n"));
        }
        out.push_str(&format!("demo.inline_solve = {}\n", self.inline_solve));
        out.push_str(&format!("out = {}\n", self.out_dir));
        out
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.lambda && self.lambda < 1.0) {
            return Err(Error::Config(format!("lambda = {} outside (0, 1)", self.lambda)));
        }
        if !(self.grid_h > 0.0) || self.grid_half_cells == 0 {
            return Err(Error::Config("grid.h and grid.half_cells must be positive".into()));
        }
        if self.eps_list.is_empty() {
            return Err(Error::Config("sweep.eps_list must not be empty".into()));
        }
        for pair in self.eps_list.windows(2) {
            if !(pair[1] < pair[0]) {
                return Err(Error::Config(format!(
                    "sweep.eps_list must be strictly descending, got {} before {}",
                    pair[0], pair[1]
                )));
            }
        }
        for &eps in &self.eps_list {
            if !(eps > 0.0) {
                return Err(Error::Config(format!("viscosity {eps} must be positive")));
            }
        }
        if !(self.t_end > 0.0) {
            return Err(Error::Config(format!("evolution.t_end = {} must be positive", self.t_end)));
        }
        let mut prev = 0.0;
        for &t in &self.checkpoints {
            if t < prev || t > self.t_end {
                return Err(Error::Config(
                    "evolution.checkpoints must be ascending within [0, t_end]".into(),
                ));
            }
            prev = t;
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::Config(format!(
                "evolution.cfl_safety = {} outside (0, 1]",
                self.cfl_safety
            )));
        }
        if self.evolution_epsilon < 0.0 {
            return Err(Error::Config("evolution.epsilon must be >= 0".into()));
        }
        if !(self.audit_cut > 0.0) || !(self.bump_width > 0.0) {
            return Err(Error::Config("demo.audit_cut and demo.bump_width must be positive".into()));
        }
        Ok(())
    }
}
