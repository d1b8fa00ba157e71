//! Structured run reports. Serialization is deterministic: struct fields
//! serialize in declaration order, maps are ordered, floats use the
//! shortest round-trip decimal form, and nothing time- or host-dependent
//! is included (wall-clock statistics go to stderr instead).

use crate::scenario::ScenarioFile;
use serde::{Deserialize, Serialize};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

type V4 = [f64; 4];
type M4 = [[f64; 4]; 4];
type T3 = [[[f64; 4]; 4]; 4];
type T4 = [[[[f64; 4]; 4]; 4]; 4];

/// Index conventions and producing routes for every reported tensor; one
/// block per report so each payload names its conventions exactly once.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Conventions {
    pub signature: String,
    pub notes: Vec<String>,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            signature: "(+,-,-,-), x0 is time, indices written in the order shown".into(),
            notes: vec![
                "g[mu][nu]: fundamental tensor, Hessian route (authoritative)".into(),
                "ginv[mu][nu]: adjugate inverse of the Hessian-route tensor".into(),
                "cartan[mu][nu][rho]: C = (1/4) d^3F^2/dy^3".into(),
                "spray g_*: routes 1 (variational), 2 (field decomposition), 3 (Christoffel)".into(),
                "f_em[nu][sigma] = dA_sigma/dx^nu - dA_nu/dx^sigma (no charge factor)".into(),
                "s/q/m tensors indexed [nu][lambda][sigma] as written in the decomposition".into(),
                "f_total = e (1 - beta/L) f_em + f_geom; the charge factor keeps f = F y exact".into(),
                "b_cov[j][k] = d(eA_j)/dx^k - eA_sigma gammatilde^sigma_{jk}".into(),
                "n_connection[mu][nu] = dG^mu/dy^nu; gamma_* [lambda][mu][nu]".into(),
                "r_full[mu][lambda][sigma][nu] (Chern-Riemann); r_hv[mu][nu][kappa] = y.r_full".into(),
                "ric_tensor[mu][nu] = (1/2) d^2 Ric/dy^mu dy^nu; einstein = ric_tensor - g S/2 + lambda".into(),
                "stress_energy: total-field form, Finsler raising, traceless sign convention".into(),
                "maxwell residuals: x-derivatives through the velocity section; rho = J^0 contravariant".into(),
                "vacuum_constraint[nu][mu]: nu-indexed summand; the constraint is its nu-sum".into(),
                "gauge_vec4 = [d rho^G/dtau + div J^G, (d J^G/dtau + grad rho^G)_xyz]".into(),
            ],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinslerPayload {
    pub l: f64,
    pub alpha: f64,
    pub beta: f64,
    pub ell: V4,
    pub g: M4,
    pub ginv: M4,
    pub detg: f64,
    pub cartan: T3,
    pub theta: M4,
    pub lorentz_ratio: f64,
    pub signature_ok: bool,
    pub inverse_formula_discrepancy: f64,
    pub closed_form_discrepancy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SprayPayload {
    pub g_spray: V4,
    pub g_decomposed: V4,
    pub g_christoffel: V4,
    pub route_spread: f64,
    pub route_scale: f64,
    pub f_em: M4,
    pub s_tensor: T3,
    pub q_tensor: T3,
    pub m_tensor: T3,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DynamicsPayload {
    pub m_eff: M4,
    pub force: V4,
    pub f_total: M4,
    pub f_geom: M4,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BerwaldPayload {
    pub b_cov: M4,
    pub deviation: V4,
    pub christoffel_gap: f64,
    pub f_from_b: M4,
    pub is_berwald: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConnectionPayload {
    pub n_connection: M4,
    pub gamma_chern: T3,
    pub gamma_finsler: T3,
    pub gamma_tilde: T3,
    pub chern_cross_check_gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvaturePayload {
    pub r_full: T4,
    pub r_hv: T3,
    pub hv_consistency_gap: f64,
    pub r_map: M4,
    pub ric: f64,
    pub ric_contraction: f64,
    pub ric_route_gap: f64,
    pub ric_tensor: M4,
    pub s_scalar: f64,
    pub a_cartan: T3,
    pub lambda: M4,
    /// The conservation construction is scoped to Berwald backgrounds; on
    /// others the lambda term is still evaluated but flagged here.
    pub lambda_paper_scoped_to_berwald: bool,
    pub einstein: M4,
    pub einstein_asym: f64,
    pub stress_energy: M4,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EbPayload {
    pub e_field: [f64; 3],
    pub b_field: [f64; 3],
    pub cal_e: [f64; 3],
    pub cal_e_t: [f64; 3],
    pub cal_b: [f64; 3],
    pub cal_b_t: [f64; 3],
    pub e00: f64,
    pub diag: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourcesPayload {
    pub rho_e: f64,
    pub j_e: [f64; 3],
    pub j_b: [f64; 3],
    pub rho: f64,
    pub rho_g: f64,
    pub j_g: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaxwellPayload {
    pub source_eq: V4,
    pub bianchi: V4,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vacuum_constraint: Option<M4>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub berwald_eq: Option<V4>,
    pub gauge_vec4: V4,
    pub gauge_curl: [f64; 3],
    pub rhs_e: [f64; 3],
    pub rhs_b: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivergencePayload {
    pub div_einstein_h: V4,
    pub div_stress_h: V4,
    pub div_einstein_v: V4,
    pub div_stress_v: V4,
    pub einstein_norm: f64,
    pub stress_norm: f64,
    /// The conservation claim carries a pass bar only on Berwald
    /// backgrounds; elsewhere the numbers are diagnostic.
    pub berwald_scoped: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeReport {
    pub x: V4,
    pub y: V4,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finsler: Option<FinslerPayload>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spray: Option<SprayPayload>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsPayload>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub berwald: Option<BerwaldPayload>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub connections: Option<ConnectionPayload>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curvature: Option<CurvaturePayload>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometric_eb: Option<EbPayload>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sources: Option<SourcesPayload>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maxwell: Option<MaxwellPayload>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence: Option<DivergencePayload>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvariantRow {
    pub id: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Probes skipped because the point left the evaluation domain; these
    /// do not count as failures.
    pub domain_skips: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub scenario: ScenarioFile,
    pub conventions: Conventions,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub probes: Vec<ProbeReport>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub invariants: Vec<InvariantRow>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trajectories: Vec<TrajectorySummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub index: usize,
    pub csv_file: String,
    pub samples: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub conservation_drift: f64,
    pub domain_exit: bool,
}

pub fn to_json_bytes(report: &RunReport) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(report).expect("report serializes");
    out.push(b'\n');
    out
}
