use thiserror::Error;

use crate::flow::ParabolicityReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("chart point with |x| = {norm} is outside the light-cone cross-section")]
    LightCone { norm: f64 },

    #[error("surface is not spacelike (v^2 = {v2:e}){}", node_suffix(.node))]
    NotSpacelike { v2: f64, node: Option<usize> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("stable time step {dt:e} fell below dt_min = {dt_min:e} (min v = {}, min u = {})", .report.min_v, .report.min_u)]
    Stiffness {
        dt: f64,
        dt_min: f64,
        report: ParabolicityReport,
    },

    #[error("step at t = {t} rejected {retries} times; giving up")]
    StepRejected { t: f64, retries: usize },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn node_suffix(node: &Option<usize>) -> String {
    match node {
        Some(k) => format!(" at node {k}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn at_node(self, k: usize) -> Self {
        match self {
            Error::NotSpacelike { v2, .. } => Error::NotSpacelike { v2, node: Some(k) },
            other => other,
        }
    }
}
