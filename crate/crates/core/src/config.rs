//! Run configuration, parsed from TOML with every violation collected.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::cone::{convexity_check, ConeSpec};
use crate::diagnostics::DEFAULT_INTERIOR_FRACTION;
use crate::error::{Error, Result};
use crate::flow::StepControl;
use crate::geometry::{self, MAX_DIM};
use crate::mesh::{build_mesh, build_radial_mesh, Field, Mesh, RawJet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConeConfig {
    Round { rho: f64 },
    Polar { coefficients: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default = "default_resolution")]
    pub nr: usize,
    #[serde(default = "default_resolution")]
    pub ntheta: usize,
    #[serde(default)]
    pub axisymmetric: bool,
}

fn default_resolution() -> usize {
    64
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self {
            nr: 64,
            ntheta: 64,
            axisymmetric: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub t_end: f64,
    pub safety: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub snapshot_factor: f64,
    pub t_first: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        let c = StepControl::default();
        Self {
            t_end: c.t_end,
            safety: c.safety,
            dt_min: c.dt_min,
            dt_max: c.dt_max,
            snapshot_factor: c.snapshot_factor,
            t_first: c.t_first,
        }
    }
}

impl TimeConfig {
    pub fn control(&self) -> StepControl {
        StepControl {
            safety: self.safety,
            dt_min: self.dt_min,
            dt_max: self.dt_max,
            t_end: self.t_end,
            snapshot_factor: self.snapshot_factor,
            t_first: self.t_first,
        }
    }
}

/// Initial graph `u_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `u_0 = k`, a slice of the expanding hyperbolic plane.
    Constant { k: f64 },
    /// `u_0 = k + a cos(pi r / R)`.
    RadialBump { k: f64, a: f64 },
    /// `u_0 = k + a ((r/R)^m - m/(m+2) (r/R)^(m+2)) cos(m theta)`; the
    /// radial profile has zero slope at `r = R`. Needs `n = 2`.
    AngularMode { k: f64, a: f64, m: u32 },
}

impl InitialData {
    pub fn base(&self) -> f64 {
        match *self {
            InitialData::Constant { k } | InitialData::RadialBump { k, .. } | InitialData::AngularMode { k, .. } => k,
        }
    }

    pub fn is_radial(&self) -> bool {
        !matches!(self, InitialData::AngularMode { .. })
    }

    /// Value at chart point `x`; `radius` is the boundary radius in the
    /// direction of `x`.
    pub fn value(&self, x: &[f64], radius: f64) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let q = r / radius;
        match *self {
            InitialData::Constant { k } => k,
            InitialData::RadialBump { k, a } => k + a * (PI * q).cos(),
            InitialData::AngularMode { k, a, m } => {
                let mf = m as f64;
                let profile = q.powi(m as i32) - mf / (mf + 2.0) * q.powi(m as i32 + 2);
                let theta = x[1].atan2(x[0]);
                k + a * profile * (mf * theta).cos()
            }
        }
    }

    pub fn field(&self, mesh: &Mesh) -> Field {
        let spec = mesh.spec.clone();
        mesh.field_from_fn(0.0, |x| self.value(x, spec.radius_towards(x)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: String,
    /// Any of `"csv"` (snapshots) and `"jsonl"` (diagnostics time series).
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: "out".into(),
            formats: vec!["csv".into(), "jsonl".into()],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, format: &str) -> bool {
        self.formats.iter().any(|f| f == format)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub cone: ConeConfig,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub time: TimeConfig,
    pub initial: InitialData,
    #[serde(default = "default_interior")]
    pub interior_fraction: f64,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_interior() -> f64 {
    DEFAULT_INTERIOR_FRACTION
}

impl RunConfig {
    pub fn cone_spec(&self) -> ConeSpec {
        match &self.cone {
            ConeConfig::Round { rho } => ConeSpec::round(*rho, self.n),
            ConeConfig::Polar { coefficients } => ConeSpec {
                kind: crate::cone::ConeKind::PolarGraph {
                    coefficients: coefficients.clone(),
                },
                n: self.n,
            },
        }
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        let spec = self.cone_spec();
        if self.mesh.axisymmetric {
            build_radial_mesh(&spec, self.mesh.nr)
        } else {
            build_mesh(&spec, self.mesh.nr, self.mesh.ntheta)
        }
    }

    /// Every violation of the configuration invariants that can be found
    /// without a mesh.
    fn static_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n < 2 || self.n > MAX_DIM {
            out.push(format!("n = {} must lie in [2, {MAX_DIM}]", self.n));
        }
        let polar = matches!(self.cone, ConeConfig::Polar { .. });
        if polar && self.n != 2 {
            out.push("polar cones need n = 2".into());
        }
        if self.n >= 2 && self.n <= MAX_DIM {
            let spec = self.cone_spec();
            out.extend(spec.violations());
            if polar && spec.violations().is_empty() {
                let c = convexity_check(&spec);
                if !c.convex {
                    out.push(format!(
                        "cross-section is not convex: curvature {} at theta = {}",
                        c.min_curvature, c.at_theta
                    ));
                }
            }
        }
        if self.mesh.nr < 8 {
            out.push(format!("mesh.nr = {} must be at least 8", self.mesh.nr));
        }
        if self.mesh.axisymmetric {
            if polar {
                out.push("the axisymmetric solver needs a round cone".into());
            }
            if !self.initial.is_radial() {
                out.push("the axisymmetric solver needs radial initial data".into());
            }
        } else {
            if self.n != 2 {
                out.push(format!("the 2-D solver needs n = 2 (got {}); set mesh.axisymmetric", self.n));
            }
            if self.mesh.ntheta < 8 || !self.mesh.ntheta.is_multiple_of(2) {
                out.push(format!("mesh.ntheta = {} must be even and at least 8", self.mesh.ntheta));
            }
        }
        out.extend(self.time.control().violations());
        let k = self.initial.base();
        if !(k > 0.0) {
            out.push(format!("initial.k = {k} must be positive"));
        }
        if let InitialData::AngularMode { m, .. } = self.initial {
            if m == 0 {
                out.push("initial.m must be at least 1".into());
            }
        }
        if !(self.interior_fraction > 0.0 && self.interior_fraction <= 1.0) {
            out.push(format!("interior_fraction = {} must lie in (0, 1]", self.interior_fraction));
        }
        for f in &self.output.formats {
            if f != "csv" && f != "jsonl" {
                out.push(format!("unknown output format {f:?} (expected \"csv\" or \"jsonl\")"));
            }
        }
        out
    }

    /// All violations, including non-spacelike initial data node by node.
    pub fn violations(&self) -> Vec<String> {
        let mut out = self.static_violations();
        if !out.is_empty() {
            return out;
        }
        let mesh = match self.build_mesh() {
            Ok(m) => m,
            Err(e) => return vec![e.to_string()],
        };
        out.extend(spacelike_violations(&mesh, &self.initial.field(&mesh)));
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }
}

/// One message per node where the graph fails to be spacelike, capped at
/// the first few after a count.
pub fn spacelike_violations(mesh: &Mesh, field: &Field) -> Vec<String> {
    const SHOWN: usize = 5;
    let mut raw = RawJet {
        n: 0,
        x: [0.0; MAX_DIM],
        u: 0.0,
        du: [0.0; MAX_DIM],
        d2u: [0.0; MAX_DIM * MAX_DIM],
    };
    let mut bad = Vec::new();
    for k in 0..mesh.node_count() {
        mesh.raw_jet(field, k, &mut raw);
        let x = raw.x();
        let gap = 1.0 - x.iter().map(|v| v * v).sum::<f64>();
        let v2 = geometry::v_squared_raw(x, raw.u, raw.du(), gap);
        if !(raw.u > 0.0 && v2 > 0.0) {
            bad.push((k, x.to_vec(), raw.u, v2));
        }
    }
    let mut out: Vec<String> = bad
        .iter()
        .take(SHOWN)
        .map(|(k, x, u, v2)| format!("initial data is not spacelike at node {k} (x = {x:?}, u = {u}): v^2 = {v2:e}"))
        .collect();
    if bad.len() > SHOWN {
        out.push(format!("... {} non-spacelike nodes in total", bad.len()));
    }
    out
}

/// Parse and validate a TOML configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}
