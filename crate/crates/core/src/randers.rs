//! Pointwise Randers data on the tangent bundle: Finsler function,
//! fundamental tensor (Hessian route is authoritative, the closed form is
//! evaluated as written and cross-reported), inverse metric by two routes,
//! Cartan tensor, and the Lorentz-signature diagnostic.

use crate::background::ScenarioBackground;
use crate::error::{FrError, Result};
use crate::jet::{Jet, JetSpace};
use crate::linalg::{inv4, mat4, max_abs_m4, sym_eigenvalues, sum1, sum2, ten3, vec4, M4, T3, V4};
use crate::scalar::Scalar;

/// A point of the tangent bundle; `y` must lie inside the timelike cone
/// of the spacetime metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentPoint {
    pub x: [f64; 4],
    pub y: [f64; 4],
}

impl TangentPoint {
    pub fn new(x: [f64; 4], y: [f64; 4]) -> Self {
        TangentPoint { x, y }
    }
}

/// `F^2` at a (possibly jet-valued) tangent point, with the timelike and
/// positivity checks applied to the primal values.
pub fn finsler_squared<T: Scalar>(bg: &ScenarioBackground, x: &[T; 4], y: &[T; 4]) -> Result<T> {
    let l = finsler_l(bg, x, y)?;
    Ok(l.clone() * l)
}

/// The Finsler function `L = alpha + beta` itself.
pub fn finsler_l<T: Scalar>(bg: &ScenarioBackground, x: &[T; 4], y: &[T; 4]) -> Result<T> {
    let gt = bg.gtilde_at(x)?;
    let a2 = sum2(|i, j| gt[i][j].clone() * y[i].clone() * y[j].clone());
    if a2.value() <= 0.0 {
        return Err(FrError::NonTimelike { gyy: a2.value() });
    }
    let alpha = a2.try_sqrt()?.scale(bg.m);
    let a_pot = bg.potential_at(x)?;
    let beta = sum1(|i| a_pot[i].clone() * y[i].clone()).scale(bg.e);
    let l = alpha + beta;
    if l.value() <= 0.0 {
        return Err(FrError::NonPositiveFinsler { l: l.value() });
    }
    Ok(l)
}

/// `(L, alpha, beta, ell)` with `ell_mu = d alpha / d y^mu
/// = m^2 gtilde_{mu nu} y^nu / alpha`.
pub fn finsler_function(
    bg: &ScenarioBackground,
    p: &TangentPoint,
) -> Result<(f64, f64, f64, V4<f64>)> {
    let gt = bg.gtilde_at(&p.x)?;
    let a2 = sum2(|i, j| gt[i][j] * p.y[i] * p.y[j]);
    if a2 <= 0.0 {
        return Err(FrError::NonTimelike { gyy: a2 });
    }
    let alpha = bg.m * a2.sqrt();
    let a_pot = bg.potential_at(&p.x)?;
    let beta = bg.e * sum1(|i| a_pot[i] * p.y[i]);
    let l = alpha + beta;
    if l <= 0.0 {
        return Err(FrError::NonPositiveFinsler { l });
    }
    let ell = vec4(|mu| bg.m * bg.m * sum1(|nu| gt[mu][nu] * p.y[nu]) / alpha);
    Ok((l, alpha, beta, ell))
}

/// Unit-velocity covector `elltilde_mu = gtilde_{mu nu} y^nu / alphatilde`.
pub fn ell_tilde(bg: &ScenarioBackground, p: &TangentPoint) -> Result<V4<f64>> {
    let gt = bg.gtilde_at(&p.x)?;
    let a2 = sum2(|i, j| gt[i][j] * p.y[i] * p.y[j]);
    if a2 <= 0.0 {
        return Err(FrError::NonTimelike { gyy: a2 });
    }
    let at = a2.sqrt();
    Ok(vec4(|mu| sum1(|nu| gt[mu][nu] * p.y[nu]) / at))
}

/// `ell^kappa = y^kappa / L`.
pub fn ell_up(bg: &ScenarioBackground, p: &TangentPoint) -> Result<V4<f64>> {
    let (l, ..) = finsler_function(bg, p)?;
    Ok(vec4(|k| p.y[k] / l))
}

/// Fundamental tensor as a function on the tangent bundle,
/// `g_{mu nu} = 1/2 d^2 F^2 / dy^mu dy^nu`. This Hessian route is the
/// authoritative definition everywhere in the crate.
pub fn fundamental_tensor<T: Scalar>(
    bg: &ScenarioBackground,
    x: &[T; 4],
    y: &[T; 4],
) -> Result<M4<T>> {
    let space = JetSpace::new(4, 2)?;
    let xj: [Jet<T>; 4] = std::array::from_fn(|i| Jet::constant(x[i].clone()));
    let yj: [Jet<T>; 4] = [
        space.seed(y[0].clone(), 0)?,
        space.seed(y[1].clone(), 1)?,
        space.seed(y[2].clone(), 2)?,
        space.seed(y[3].clone(), 3)?,
    ];
    let f2 = finsler_squared(bg, &xj, &yj)?;
    Ok(mat4(|i, j| f2.d2(i, j).scale(0.5)))
}

pub fn fundamental_tensor_hessian(bg: &ScenarioBackground, p: &TangentPoint) -> Result<M4<f64>> {
    fundamental_tensor(bg, &p.x, &p.y)
}

/// Cartan tensor `C_{mu nu rho} = 1/4 d^3 F^2 / dy^mu dy^nu dy^rho`,
/// generic over the scalar field.
pub fn cartan_tensor_xy<T: Scalar>(
    bg: &ScenarioBackground,
    x: &[T; 4],
    y: &[T; 4],
) -> Result<T3<T>> {
    let space = JetSpace::new(4, 3)?;
    let xj: [Jet<T>; 4] = std::array::from_fn(|i| Jet::constant(x[i].clone()));
    let yj: [Jet<T>; 4] = [
        space.seed(y[0].clone(), 0)?,
        space.seed(y[1].clone(), 1)?,
        space.seed(y[2].clone(), 2)?,
        space.seed(y[3].clone(), 3)?,
    ];
    let f2 = finsler_squared(bg, &xj, &yj)?;
    Ok(ten3(|i, j, k| f2.d3(i, j, k).scale(0.25)))
}

pub fn cartan_tensor(bg: &ScenarioBackground, p: &TangentPoint) -> Result<T3<f64>> {
    cartan_tensor_xy(bg, &p.x, &p.y)
}

/// Closed-form fundamental tensor, evaluated exactly as printed
/// (prefactor `L/(2 alpha)`), plus the maximum deviation from the Hessian
/// route. The deviation is reported, not asserted: the printed prefactor is
/// inconsistent with the Hessian definition (see
/// [`fundamental_tensor_closed_corrected`] for the variant that is).
pub fn fundamental_tensor_closed(
    bg: &ScenarioBackground,
    p: &TangentPoint,
) -> Result<(M4<f64>, f64)> {
    let g_closed = closed_form(bg, p, 0.5)?;
    let g_hess = fundamental_tensor_hessian(bg, p)?;
    let disc = max_abs_m4(&mat4(|i, j| g_closed[i][j] - g_hess[i][j]));
    Ok((g_closed, disc))
}

/// Closed form with the `L/alpha` prefactor; agrees with the Hessian route
/// to roundoff for every Randers metric.
pub fn fundamental_tensor_closed_corrected(
    bg: &ScenarioBackground,
    p: &TangentPoint,
) -> Result<M4<f64>> {
    closed_form(bg, p, 1.0)
}

fn closed_form(bg: &ScenarioBackground, p: &TangentPoint, half: f64) -> Result<M4<f64>> {
    let (l, alpha, _beta, ell) = finsler_function(bg, p)?;
    let gt = bg.gtilde_at(&p.x)?;
    let b = b_cov(bg, &p.x)?;
    let m2 = bg.m * bg.m;
    Ok(mat4(|mu, nu| {
        half * l / alpha * (m2 * gt[mu][nu] - ell[mu] * ell[nu])
            + (ell[mu] + b[mu]) * (ell[nu] + b[nu])
    }))
}

/// `b_mu = e A_mu`.
pub fn b_cov(bg: &ScenarioBackground, x: &[f64; 4]) -> Result<V4<f64>> {
    let a = bg.potential_at(x)?;
    Ok(vec4(|i| bg.e * a[i]))
}

#[derive(Debug, Clone)]
pub struct InverseMetricReport {
    /// Adjugate inverse of the Hessian-route tensor (authoritative).
    pub ginv_direct: M4<f64>,
    /// Closed-form inverse evaluated as printed, with `b^mu` raised by
    /// `gtilde^{mu nu} b_nu / m^2` and `b^2 = b^mu b_mu`.
    pub ginv_randers: M4<f64>,
    pub discrepancy: f64,
    pub detg: f64,
}

pub fn inverse_metric(bg: &ScenarioBackground, p: &TangentPoint) -> Result<InverseMetricReport> {
    let g = fundamental_tensor_hessian(bg, p)?;
    let (ginv_direct, detg) = inv4(&g)?;
    let ginv_randers = randers_inverse(bg, p, bg.m * bg.m)?;
    let discrepancy = max_abs_m4(&mat4(|i, j| ginv_direct[i][j] - ginv_randers[i][j]));
    Ok(InverseMetricReport {
        ginv_direct,
        ginv_randers,
        discrepancy,
        detg: detg.value(),
    })
}

/// Closed-form inverse with the leading coefficient `lead * alpha / L *
/// gtilde^{mu nu}`; the printed formula uses `lead = m^2`, the variant that
/// actually inverts the Hessian tensor uses `lead = 1/m^2`.
pub fn randers_inverse(bg: &ScenarioBackground, p: &TangentPoint, lead: f64) -> Result<M4<f64>> {
    let (l, alpha, beta, _) = finsler_function(bg, p)?;
    let gt = bg.gtilde_at(&p.x)?;
    let (gtinv, _) = inv4(&gt)?;
    let b = b_cov(bg, &p.x)?;
    let m2 = bg.m * bg.m;
    let b_up = vec4(|i| sum1(|j| gtinv[i][j] * b[j]) / m2);
    let b2 = sum1(|i| b_up[i] * b[i]);
    Ok(mat4(|mu, nu| {
        lead * alpha / l * gtinv[mu][nu] - alpha / (l * l) * (b_up[mu] * p.y[nu] + b_up[nu] * p.y[mu])
            + (b2 * alpha + beta) / (l * l * l) * p.y[mu] * p.y[nu]
    }))
}

pub fn randers_inverse_corrected(bg: &ScenarioBackground, p: &TangentPoint) -> Result<M4<f64>> {
    randers_inverse(bg, p, 1.0 / (bg.m * bg.m))
}

#[derive(Debug, Clone)]
pub struct LorentzDomainReport {
    /// Perturbation split `theta_{mu nu}` evaluated as printed.
    pub theta: M4<f64>,
    /// `max |theta| / min nonzero (1/2)(1 + beta/alpha) m^2 |gtilde|`.
    pub lorentz_ratio: f64,
    /// Eigenvalue signs of the fundamental tensor are (+,-,-,-).
    pub signature_ok: bool,
}

pub fn lorentz_domain_check(bg: &ScenarioBackground, p: &TangentPoint) -> Result<LorentzDomainReport> {
    let (_, alpha, beta, ell) = finsler_function(bg, p)?;
    let gt = bg.gtilde_at(&p.x)?;
    let b = b_cov(bg, &p.x)?;
    let theta = mat4(|mu, nu| {
        0.5 * (1.0 - beta / alpha) * ell[mu] * ell[nu]
            + ell[mu] * b[nu]
            + ell[nu] * b[mu]
            + b[mu] * b[nu]
    });
    let m2 = bg.m * bg.m;
    let floor_term = 0.5 * (1.0 + beta / alpha) * m2;
    let mut min_ref = f64::INFINITY;
    for row in &gt {
        for &v in row {
            let w = floor_term.abs() * v.abs();
            if w > 0.0 && w < min_ref {
                min_ref = w;
            }
        }
    }
    let lorentz_ratio = if min_ref.is_finite() {
        max_abs_m4(&theta) / min_ref
    } else {
        f64::INFINITY
    };
    let g = fundamental_tensor_hessian(bg, p)?;
    let eig = sym_eigenvalues(&g);
    let signature_ok = eig[0] > 0.0 && eig[1] < 0.0 && eig[2] < 0.0 && eig[3] < 0.0;
    Ok(LorentzDomainReport {
        theta,
        lorentz_ratio,
        signature_ok,
    })
}

/// Everything pointwise at once.
#[derive(Debug, Clone)]
pub struct FinslerEval {
    pub l: f64,
    pub alpha: f64,
    pub beta: f64,
    pub ell: V4<f64>,
    pub g: M4<f64>,
    pub ginv: M4<f64>,
    pub detg: f64,
    pub cartan: T3<f64>,
    pub theta: M4<f64>,
    pub lorentz_ratio: f64,
}

pub fn finsler_eval(bg: &ScenarioBackground, p: &TangentPoint) -> Result<FinslerEval> {
    let (l, alpha, beta, ell) = finsler_function(bg, p)?;
    let space = JetSpace::new(4, 3)?;
    let xj: [Jet<f64>; 4] = std::array::from_fn(|i| Jet::constant(p.x[i]));
    let yj: [Jet<f64>; 4] = [
        space.seed(p.y[0], 0)?,
        space.seed(p.y[1], 1)?,
        space.seed(p.y[2], 2)?,
        space.seed(p.y[3], 3)?,
    ];
    let f2 = finsler_squared(bg, &xj, &yj)?;
    let g = mat4(|i, j| f2.d2(i, j) * 0.5);
    let (ginv, detg) = inv4(&g)?;
    let cartan = ten3(|i, j, k| f2.d3(i, j, k) * 0.25);
    let lz = lorentz_domain_check(bg, p)?;
    Ok(FinslerEval {
        l,
        alpha,
        beta,
        ell,
        g,
        ginv,
        detg,
        cartan,
        theta: lz.theta,
        lorentz_ratio: lz.lorentz_ratio,
    })
}
