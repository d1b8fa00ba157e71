//! Scenario files: the JSON schema, validation, and compilation into the
//! core background plus probe/geodesic/section plans.

use crate::rng::SplitMix64;
use frg_core::background::ScenarioBackground;
use frg_core::expr;
use frg_core::maxwell::VelocitySection;
use frg_core::randers::TangentPoint;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone)]
pub enum ScenarioError {
    Io(String),
    Schema(String),
    Expr(String),
}

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScenarioError::Io(m) => write!(f, "io error: {m}"),
            ScenarioError::Schema(m) => write!(f, "schema error: {m}"),
            ScenarioError::Expr(m) => write!(f, "expression error: {m}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

const fn default_m() -> f64 {
    1.0
}
const fn default_kappa() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    #[serde(default = "default_m")]
    pub m: f64,
    #[serde(default)]
    pub e: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            m: 1.0,
            e: 0.0,
            kappa: 1.0,
        }
    }
}

/// Metric block: a catalog name (optionally with its potential expression)
/// or a full 4x4 matrix of expressions (validated symmetric).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MetricBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<String>,
    /// Weak-field potential expression for the `weak_field` catalog entry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    /// 16 expressions, row-major, for a general symmetric metric.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    /// Explicit tangent points.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<ProbePoint>,
    /// Sampling box for additional random probes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_: Option<ProbeBox>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProbePoint {
    pub x: [f64; 4],
    pub y: [f64; 4],
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProbeBox {
    pub x_min: [f64; 4],
    pub x_max: [f64; 4],
    /// Range for the time component of the velocity.
    pub y_time: [f64; 2],
    /// Spatial velocity components are sampled from [-y_space, y_space].
    pub y_space: f64,
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeodesicSpec {
    pub x: [f64; 4],
    pub y: [f64; 4],
    pub tau_end: f64,
    #[serde(default = "default_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_tol")]
    pub rel_tol: f64,
}

const fn default_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exprs: Option<[String; 4]>,
}

/// The on-disk scenario format. Expressions stay as source strings here;
/// `compile` parses and validates them.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default)]
    pub constants: Constants,
    /// Named parameters usable inside every expression.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    pub metric: MetricBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<[String; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current: Option<[String; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<SectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<ProbeSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub geodesics: Vec<GeodesicSpec>,
    /// Recognized: drop_beta_over_L, connection_corrected_maxwell,
    /// classical_em.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub toggles: Vec<String>,
}

/// A loaded scenario: background, section, probe plan.
#[derive(Debug)]
pub struct CompiledScenario {
    pub file: ScenarioFile,
    pub background: ScenarioBackground,
    pub section: VelocitySection,
    pub drop_beta_over_l: bool,
    pub classical_em: bool,
    pub connection_corrected: bool,
}

pub fn load_scenario(path: &Path) -> Result<CompiledScenario, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| ScenarioError::Schema(format!("{}: {e}", path.display())))?;
    compile(file)
}

pub fn compile(file: ScenarioFile) -> Result<CompiledScenario, ScenarioError> {
    let params: Vec<(String, f64)> = file.params.iter().map(|(k, v)| (k.clone(), *v)).collect();
    let param_names: Vec<String> = params.iter().map(|(n, _)| n.clone()).collect();
    let c = &file.constants;

    let mut background = match (&file.metric.catalog, &file.metric.entries) {
        (Some(name), None) => match name.as_str() {
            "minkowski" => {
                if file.metric.phi.is_some() {
                    return Err(ScenarioError::Schema(
                        "metric.phi is only meaningful for the weak_field catalog entry".into(),
                    ));
                }
                let mut bg = ScenarioBackground::minkowski(c.m, c.e, c.kappa);
                if !params.is_empty() {
                    // rebuild with parameters available to potential/current
                    bg = ScenarioBackground::from_sources(
                        ["1", "0", "0", "0", "-1", "0", "0", "-1", "0", "-1"],
                        ["0", "0", "0", "0"],
                        ["0", "0", "0", "0"],
                        c.m,
                        c.e,
                        c.kappa,
                        &params,
                    )
                    .map_err(|e| ScenarioError::Expr(e.to_string()))?;
                }
                bg
            }
            "weak_field" => {
                let phi = file.metric.phi.as_deref().ok_or_else(|| {
                    ScenarioError::Schema("weak_field catalog entry needs metric.phi".into())
                })?;
                ScenarioBackground::weak_field(phi, c.m, c.e, c.kappa, &params)
                    .map_err(|e| ScenarioError::Expr(e.to_string()))?
            }
            other => {
                return Err(ScenarioError::Schema(format!(
                    "unknown metric catalog entry `{other}` (try minkowski or weak_field)"
                )))
            }
        },
        (None, Some(entries)) => {
            if entries.len() != 4 || entries.iter().any(|r| r.len() != 4) {
                return Err(ScenarioError::Schema(
                    "metric.entries must be a 4x4 matrix of expressions".into(),
                ));
            }
            // parse all, check structural symmetry, keep the upper triangle
            let mut parsed = Vec::new();
            for (i, row) in entries.iter().enumerate() {
                let mut prow = Vec::new();
                for (j, src) in row.iter().enumerate() {
                    prow.push(expr::parse_expr(src, &param_names).map_err(|e| {
                        ScenarioError::Expr(format!("metric.entries[{i}][{j}]: {e}"))
                    })?);
                }
                parsed.push(prow);
            }
            for i in 0..4 {
                for j in (i + 1)..4 {
                    if !parsed[i][j].structurally_eq(&parsed[j][i]) {
                        return Err(ScenarioError::Schema(format!(
                            "metric block is not symmetric at entries [{i}][{j}] vs [{j}][{i}]"
                        )));
                    }
                }
            }
            let tri: [&str; 10] = [
                &entries[0][0],
                &entries[0][1],
                &entries[0][2],
                &entries[0][3],
                &entries[1][1],
                &entries[1][2],
                &entries[1][3],
                &entries[2][2],
                &entries[2][3],
                &entries[3][3],
            ];
            ScenarioBackground::from_sources(
                tri,
                ["0", "0", "0", "0"],
                ["0", "0", "0", "0"],
                c.m,
                c.e,
                c.kappa,
                &params,
            )
            .map_err(|e| ScenarioError::Expr(e.to_string()))?
        }
        (Some(_), Some(_)) => {
            return Err(ScenarioError::Schema(
                "metric block must give either a catalog name or entries, not both".into(),
            ))
        }
        (None, None) => {
            return Err(ScenarioError::Schema(
                "metric block needs a catalog name or entries".into(),
            ))
        }
    };

    if let Some(pot) = &file.potential {
        let srcs: [&str; 4] = [&pot[0], &pot[1], &pot[2], &pot[3]];
        background = background
            .with_potential(srcs)
            .map_err(|e| ScenarioError::Expr(format!("potential: {e}")))?;
    }
    if let Some(cur) = &file.current {
        let srcs: [&str; 4] = [&cur[0], &cur[1], &cur[2], &cur[3]];
        background = background
            .with_current(srcs)
            .map_err(|e| ScenarioError::Expr(format!("current: {e}")))?;
    }

    let section = match &file.section {
        None => VelocitySection::default(),
        Some(SectionSpec {
            constant: Some(c), exprs: None,
        }) => VelocitySection::Constant(*c),
        Some(SectionSpec {
            constant: None, exprs: Some(es),
        }) => {
            let srcs: [&str; 4] = [&es[0], &es[1], &es[2], &es[3]];
            VelocitySection::from_sources(srcs, &param_names)
                .map_err(|e| ScenarioError::Expr(format!("section: {e}")))?
        }
        _ => {
            return Err(ScenarioError::Schema(
                "section needs exactly one of `constant` or `exprs`".into(),
            ))
        }
    };

    for t in &file.toggles {
        match t.as_str() {
            "drop_beta_over_L" | "connection_corrected_maxwell" | "classical_em" => {}
            other => {
                return Err(ScenarioError::Schema(format!("unknown toggle `{other}`")));
            }
        }
    }
    let has = |name: &str| file.toggles.iter().any(|t| t == name);

    Ok(CompiledScenario {
        drop_beta_over_l: has("drop_beta_over_L"),
        classical_em: has("classical_em"),
        connection_corrected: has("connection_corrected_maxwell"),
        file,
        background,
        section,
    })
}

impl CompiledScenario {
    /// Deterministic probe list: explicit points first, then box samples
    /// (re-drawn until timelike with L > 0, bounded retries).
    pub fn probes(&self, count_override: Option<usize>, seed_override: Option<u64>) -> Vec<TangentPoint> {
        let mut out = Vec::new();
        let spec = match &self.file.probes {
            Some(s) => s,
            None => return out,
        };
        for p in &spec.points {
            out.push(TangentPoint::new(p.x, p.y));
        }
        if let Some(b) = &spec.box_ {
            let count = count_override.unwrap_or(b.count);
            let mut rng = SplitMix64::new(seed_override.unwrap_or(b.seed));
            let mut drawn = 0;
            let mut attempts = 0;
            while drawn < count && attempts < 100 * count.max(1) {
                attempts += 1;
                let x = std::array::from_fn(|i| rng.range(b.x_min[i], b.x_max[i]));
                let y = [
                    rng.range(b.y_time[0], b.y_time[1]),
                    rng.range(-b.y_space, b.y_space),
                    rng.range(-b.y_space, b.y_space),
                    rng.range(-b.y_space, b.y_space),
                ];
                let p = TangentPoint::new(x, y);
                if frg_core::randers::finsler_function(&self.background, &p).is_ok() {
                    out.push(p);
                    drawn += 1;
                }
            }
        }
        out
    }
}
