//! Run configuration: a TOML file of `key = value` lines grouped in sections.
//! Every section and key is optional.

use std::path::Path;

use calabi_core::cutoff::LemmaConfig;
use calabi_core::hamflow::QuadratureRule;
use calabi_core::manifolds::{PoleSigns, SphereProduct, SphereQuadrature};
use calabi_core::symplin::WeightVector;
use calabi_core::theorem::{EpsilonPolicy, TheoremConfig, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::{ForgeError, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub manifold: ManifoldSection,
    pub chart: ChartSection,
    pub lemma: LemmaSection,
    pub quadrature: QuadratureSection,
    pub checks: ChecksSection,
    #[serde(rename = "loop")]
    pub linear_loop: LoopSection,
    pub tolerances: TolerancesSection,
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManifoldSection {
    pub radii: Vec<f64>,
    /// `cⱼ` in `F = Σ 2π cⱼ hⱼ`.
    pub weights: Vec<f64>,
    /// `+1` north, `−1` south.
    pub fixed_point: Vec<i8>,
}

impl Default for ManifoldSection {
    fn default() -> Self {
        Self {
            radii: vec![1.0, 2.0],
            weights: vec![1.0, 2.0],
            fixed_point: vec![1, -1],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChartSection {
    pub radius: f64,
    pub loop_intervals: usize,
}

impl Default for ChartSection {
    fn default() -> Self {
        Self {
            radius: 1.0,
            loop_intervals: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedEpsilon {
    Paper,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonSetting {
    Named(NamedEpsilon),
    Value(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaSection {
    pub outer: f64,
    pub margin: f64,
    pub epsilon: EpsilonSetting,
    pub steps: usize,
    pub t_nodes: usize,
    pub max_halvings: usize,
    pub tracers: usize,
    pub hofer_points: usize,
    pub bound_grid: usize,
}

impl Default for LemmaSection {
    fn default() -> Self {
        let d = LemmaConfig::default();
        Self {
            outer: d.outer,
            margin: d.margin,
            epsilon: EpsilonSetting::Named(NamedEpsilon::Paper),
            steps: d.steps,
            t_nodes: d.t_nodes,
            max_halvings: d.max_halvings,
            tracers: d.tracers,
            hofer_points: d.hofer_points,
            bound_grid: d.bound_grid,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum BallRule {
    Midpoint { per_axis: usize },
    QuasiRandom { points: usize },
}

impl BallRule {
    fn to_core(self, seed: u64) -> QuadratureRule {
        match self {
            BallRule::Midpoint { per_axis } => QuadratureRule::Midpoint { per_axis },
            BallRule::QuasiRandom { points } => QuadratureRule::QuasiRandom { points, seed },
        }
    }

    fn resolution(self) -> usize {
        match self {
            BallRule::Midpoint { per_axis } => per_axis,
            BallRule::QuasiRandom { points } => points,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSection {
    /// Unset: midpoint 12/axis in 4D, 16384 quasi-random points otherwise.
    pub ball: Option<BallRule>,
    pub spot_check: Option<BallRule>,
    pub sphere_azimuth: usize,
    pub sphere_height: usize,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        let s = SphereQuadrature::default();
        Self {
            ball: None,
            spot_check: None,
            sphere_azimuth: s.azimuth,
            sphere_height: s.height,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksSection {
    pub inner_points: usize,
    pub pde_samples: usize,
    pub pde_time: f64,
    pub chart_points: usize,
}

impl Default for ChecksSection {
    fn default() -> Self {
        Self {
            inner_points: 256,
            pde_samples: 5,
            pde_time: 0.3,
            chart_points: 20,
        }
    }
}

/// Input of the `maslov`, `contract`, `lemma` and `scaling` subcommands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopSection {
    pub weights: Vec<i64>,
    pub intervals: usize,
    /// `(s, t)` grid of the `contract` boundary sweep.
    pub grid: usize,
    /// `ε` of the `lemma` subcommand.
    pub epsilon: f64,
    pub scaling_radii: Vec<f64>,
}

impl Default for LoopSection {
    fn default() -> Self {
        Self {
            weights: vec![-1, 1],
            intervals: 256,
            grid: 21,
            epsilon: 1.0,
            scaling_radii: vec![0.5, 0.25, 0.125, 0.0625],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TolerancesSection {
    pub interpolation: f64,
    pub closure: f64,
    pub normalization: f64,
    pub bound_slack: f64,
    pub inner_ball: f64,
    pub chart: f64,
    pub pde: f64,
    pub h_loop: f64,
    pub target: f64,
    pub homotopy: f64,
}

impl Default for TolerancesSection {
    fn default() -> Self {
        let t = Tolerances::default();
        Self {
            interpolation: t.interpolation,
            closure: t.closure,
            normalization: t.normalization,
            bound_slack: t.bound_slack,
            inner_ball: t.inner_ball,
            chart: t.chart,
            pde: t.pde,
            h_loop: t.h_loop,
            target: t.target,
            homotopy: 1e-9,
        }
    }
}

impl TolerancesSection {
    pub fn to_core(&self) -> Tolerances {
        Tolerances {
            interpolation: self.interpolation,
            closure: self.closure,
            normalization: self.normalization,
            bound_slack: self.bound_slack,
            inner_ball: self.inner_ball,
            chart: self.chart,
            pde: self.pde,
            h_loop: self.h_loop,
            target: self.target,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub trajectories: bool,
    pub trajectory_tracers: usize,
    pub trajectory_times: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            trajectories: false,
            trajectory_tracers: 8,
            trajectory_times: 11,
        }
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Line of `key` inside `[section]` (top level when `section` is empty).
fn key_line(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        let lhs = line.split('=').next().unwrap_or("").trim();
        if current == section && lhs == key {
            return Some(i + 1);
        }
    }
    None
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|s| line_column(text, s.start))
                .unwrap_or((0, 0));
            ForgeError::ConfigSyntax {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate().map_err(
            |(section, key, message)| match key_line(text, section, key) {
                Some(line) => ForgeError::ConfigSyntax {
                    line,
                    column: 1,
                    message,
                },
                None => ForgeError::Config(message),
            },
        )?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ForgeError::io(path, e))?;
        Self::parse(&text)
    }

    /// First violated invariant as `(section, key, message)`.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, &'static str, String)> {
        let m = &self.manifold;
        if m.radii.is_empty() {
            return Err((
                "manifold",
                "radii",
                "at least one sphere is required".into(),
            ));
        }
        if m.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(("manifold", "radii", "radii must be positive".into()));
        }
        if m.weights.len() != m.radii.len() {
            return Err((
                "manifold",
                "weights",
                "one weight per sphere is required".into(),
            ));
        }
        if m.fixed_point.len() != m.radii.len() || m.fixed_point.iter().any(|s| s.abs() != 1) {
            return Err((
                "manifold",
                "fixed_point",
                "one pole sign (+1 or -1) per sphere is required".into(),
            ));
        }
        if !(self.chart.radius > 0.0) {
            return Err(("chart", "radius", "chart radius must be positive".into()));
        }
        if self.chart.loop_intervals < 2 {
            return Err(("chart", "loop_intervals", "at least 2 intervals".into()));
        }
        let l = &self.lemma;
        if !(l.outer > 0.0) {
            return Err(("lemma", "outer", "outer radius must be positive".into()));
        }
        if !(l.margin > 1.0) {
            return Err(("lemma", "margin", "margin must exceed 1".into()));
        }
        if let EpsilonSetting::Value(e) = l.epsilon {
            if !(e > 0.0) {
                return Err(("lemma", "epsilon", "epsilon must be positive".into()));
            }
        }
        for (key, v) in [
            ("steps", l.steps),
            ("t_nodes", l.t_nodes),
            ("tracers", l.tracers),
            ("hofer_points", l.hofer_points),
            ("bound_grid", l.bound_grid),
        ] {
            if v == 0 {
                return Err(("lemma", key, format!("{key} must be positive")));
            }
        }
        let q = &self.quadrature;
        for (key, rule) in [("ball", q.ball), ("spot_check", q.spot_check)] {
            if rule.is_some_and(|r| r.resolution() == 0) {
                return Err(("quadrature", key, "resolution must be positive".into()));
            }
        }
        if q.sphere_azimuth == 0 || q.sphere_height == 0 {
            return Err((
                "quadrature",
                "sphere_height",
                "sphere resolution must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.checks.pde_time) {
            return Err(("checks", "pde_time", "pde_time must lie in [0, 1]".into()));
        }
        let lp = &self.linear_loop;
        if lp.weights.is_empty() {
            return Err(("loop", "weights", "at least one weight is required".into()));
        }
        if lp.intervals < 2 || lp.grid < 2 {
            return Err((
                "loop",
                "intervals",
                "at least 2 intervals and grid points".into(),
            ));
        }
        if !(lp.epsilon > 0.0) {
            return Err(("loop", "epsilon", "epsilon must be positive".into()));
        }
        if lp.scaling_radii.iter().any(|r| !(*r > 0.0)) {
            return Err(("loop", "scaling_radii", "radii must be positive".into()));
        }
        Ok(())
    }

    pub fn product(&self) -> Result<SphereProduct> {
        let m = &self.manifold;
        Ok(SphereProduct::new(
            m.radii.clone(),
            m.weights.clone(),
            PoleSigns(m.fixed_point.clone()),
        )?)
    }

    pub fn loop_weights(&self) -> WeightVector {
        WeightVector::new(self.linear_loop.weights.clone())
    }

    /// Lemma parameters with the quadrature defaulted for dimension `2n`.
    pub fn lemma_config(&self, half_dim: usize, epsilon: f64) -> LemmaConfig {
        let l = &self.lemma;
        LemmaConfig {
            outer: l.outer,
            margin: l.margin,
            epsilon,
            steps: l.steps,
            quadrature: self.ball_rule(half_dim).to_core(self.seed),
            t_nodes: l.t_nodes,
            max_halvings: l.max_halvings,
            tracers: l.tracers,
            hofer_points: l.hofer_points,
            bound_grid: l.bound_grid,
            seed: self.seed,
        }
    }

    fn ball_rule(&self, half_dim: usize) -> BallRule {
        self.quadrature.ball.unwrap_or(if half_dim <= 2 {
            BallRule::Midpoint { per_axis: 12 }
        } else {
            BallRule::QuasiRandom { points: 16384 }
        })
    }

    fn spot_rule(&self, half_dim: usize) -> BallRule {
        self.quadrature.spot_check.unwrap_or(if half_dim <= 2 {
            BallRule::Midpoint { per_axis: 8 }
        } else {
            BallRule::QuasiRandom { points: 4096 }
        })
    }

    pub fn theorem_config(&self) -> Result<TheoremConfig> {
        let product = self.product()?;
        let n = product.factors();
        let mut cfg = TheoremConfig::new(product);
        cfg.chart_radius = self.chart.radius;
        cfg.loop_intervals = self.chart.loop_intervals;
        cfg.epsilon = match self.lemma.epsilon {
            EpsilonSetting::Named(NamedEpsilon::Paper) => EpsilonPolicy::Paper,
            EpsilonSetting::Value(e) => EpsilonPolicy::Explicit(e),
        };
        cfg.lemma = self.lemma_config(n, 1.0);
        cfg.spot_check = self.spot_rule(n).to_core(self.seed ^ 1);
        cfg.sphere_quadrature = SphereQuadrature {
            azimuth: self.quadrature.sphere_azimuth,
            height: self.quadrature.sphere_height,
        };
        cfg.inner_points = self.checks.inner_points;
        cfg.pde_samples = self.checks.pde_samples;
        cfg.pde_time = self.checks.pde_time;
        cfg.chart_points = self.checks.chart_points;
        cfg.trajectory_tracers = if self.output.trajectories {
            self.output.trajectory_tracers
        } else {
            0
        };
        cfg.trajectory_times = self.output.trajectory_times;
        cfg.tolerances = self.tolerances.to_core();
        Ok(cfg)
    }
}
