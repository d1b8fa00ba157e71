//! Geodesic spray by three routes, its field decomposition, effective
//! dynamics, Berwald diagnostics, and the geodesic integrator.
//!
//! Route 1 (authoritative): the variational formula
//! `G^mu = 1/4 g^{mu nu} (d^2 F^2/dy^nu dx^kappa y^kappa - dF^2/dx^nu)`
//! via mixed jets. Route 2 assembles the electromagnetic/spacetime
//! decomposition from background derivatives. Route 3 contracts the
//! Finsler Christoffel symbols. The three agree to roundoff; the recorded
//! spread is the cheapest full-pipeline self-check we have.

use crate::background::ScenarioBackground;
use crate::error::{FrError, Result};
use crate::jet::{Jet, JetSpace};
use crate::linalg::{
    inv4, mat4, max_abs_m4, max_abs_v4, sum1, sum2, ten3, vec4, M4, T3, V4,
};
use crate::randers::{finsler_function, finsler_squared, TangentPoint};
use crate::riemann::christoffel_tilde;
use crate::scalar::Scalar;

/// Geodesic coefficients as a function on the tangent bundle, generic over
/// the scalar field so connections and curvatures can differentiate it.
pub fn spray<T: Scalar>(bg: &ScenarioBackground, x: &[T; 4], y: &[T; 4]) -> Result<V4<T>> {
    let space = JetSpace::new(8, 2)?;
    let xj: [Jet<T>; 4] = [
        space.seed(x[0].clone(), 0)?,
        space.seed(x[1].clone(), 1)?,
        space.seed(x[2].clone(), 2)?,
        space.seed(x[3].clone(), 3)?,
    ];
    let yj: [Jet<T>; 4] = [
        space.seed(y[0].clone(), 4)?,
        space.seed(y[1].clone(), 5)?,
        space.seed(y[2].clone(), 6)?,
        space.seed(y[3].clone(), 7)?,
    ];
    let f2 = finsler_squared(bg, &xj, &yj)?;
    let g = mat4(|i, j| f2.d2(4 + i, 4 + j).scale(0.5));
    let (ginv, _) = inv4(&g)?;
    let t = vec4(|nu| {
        sum1(|k| f2.d2(4 + nu, k) * y[k].clone()) - f2.d1(nu)
    });
    Ok(vec4(|mu| {
        sum1(|nu| ginv[mu][nu].clone() * t[nu].clone()).scale(0.25)
    }))
}

/// Route 1 at a plain point.
pub fn spray_general(bg: &ScenarioBackground, p: &TangentPoint) -> Result<V4<f64>> {
    spray(bg, &p.x, &p.y)
}

/// The field tensors entering the decomposition, generic so the geometric
/// field can be differentiated. Index conventions:
/// `f_em[nu][sigma] = dA_sigma/dx^nu - dA_nu/dx^sigma`, and the rank-3
/// tensors carry indices `[nu][lambda][sigma]`.
#[derive(Debug, Clone)]
pub struct DecompTensors<T> {
    pub f_em: M4<T>,
    pub s_tensor: T3<T>,
    pub q_tensor: T3<T>,
    pub m_tensor: T3<T>,
}

/// Assemble F/S/Q/M from metric and potential derivatives. The potential
/// gradient can be overridden (`da_override`) so field-equation residuals
/// can seed those 16 slots as independent jet directions.
pub fn decomposed_tensors<T: Scalar>(
    bg: &ScenarioBackground,
    x: &[T; 4],
    y: &[T; 4],
    da_override: Option<&M4<T>>,
) -> Result<DecompTensors<T>> {
    // Background values and first derivatives at (possibly jet-valued) x.
    let xspace = JetSpace::new(4, 1)?;
    let xj: [Jet<T>; 4] = [
        xspace.seed(x[0].clone(), 0)?,
        xspace.seed(x[1].clone(), 1)?,
        xspace.seed(x[2].clone(), 2)?,
        xspace.seed(x[3].clone(), 3)?,
    ];
    let gtj = bg.gtilde_at(&xj)?;
    let aj = bg.potential_at(&xj)?;
    let gt = mat4(|i, j| gtj[i][j].coeff_multi(&[]));
    let dgt = ten3(|i, j, s| gtj[i][j].d1(s));
    let a_val = vec4(|i| aj[i].coeff_multi(&[]));
    let da: M4<T> = match da_override {
        Some(w) => w.clone(),
        None => mat4(|i, s| aj[i].d1(s)),
    };

    let m = bg.m;
    let e = bg.e;
    let m2 = m * m;

    let a2 = sum2(|i, j| gt[i][j].clone() * y[i].clone() * y[j].clone());
    if a2.value() <= 0.0 {
        return Err(FrError::NonTimelike { gyy: a2.value() });
    }
    let at = a2.try_sqrt()?; // alphatilde
    let alpha = at.scale(m);
    let inv_alpha = alpha.try_recip()?;

    // ell_mu = m^2 gtilde_{mu nu} y^nu / alpha and its x-derivative at fixed y
    let gty = vec4(|mu| sum1(|nu| gt[mu][nu].clone() * y[nu].clone()));
    let ell = vec4(|mu| (gty[mu].clone() * inv_alpha.clone()).scale(m2));
    // d alpha/dx^s = m^2 (d gtilde_{ab}/dx^s) y^a y^b / (2 alpha)
    let dalpha = vec4(|s| {
        (sum2(|a, b| dgt[a][b][s].clone() * y[a].clone() * y[b].clone()) * inv_alpha.clone())
            .scale(0.5 * m2)
    });
    let dell = mat4(|nu, s| {
        (sum1(|r| dgt[nu][r][s].clone() * y[r].clone()) * inv_alpha.clone()).scale(m2)
            - ell[nu].clone() * dalpha[s].clone() * inv_alpha.clone()
    });

    let f_em = mat4(|nu, s| da[s][nu].clone() - da[nu][s].clone());

    // S_{nu lambda sigma} = 2 e^2 d(A_nu A_sigma)/dx^lambda
    //                     -   e^2 d(A_lambda A_sigma)/dx^nu
    //                     + 2 e   d(A_lambda ell_nu)/dx^sigma
    let d_aa = |i: usize, j: usize, s: usize| -> T {
        da[i][s].clone() * a_val[j].clone() + a_val[i].clone() * da[j][s].clone()
    };
    let s_tensor = ten3(|nu, la, s| {
        d_aa(nu, s, la).scale(2.0 * e * e) - d_aa(la, s, nu).scale(e * e)
            + (da[la][s].clone() * ell[nu].clone() + a_val[la].clone() * dell[nu][s].clone())
                .scale(2.0 * e)
    });

    let q_tensor = ten3(|nu, la, s| {
        (dgt[nu][la][s].clone() + dgt[la][nu][s].clone() - dgt[la][s][nu].clone()).scale(m2)
    });

    // M_{nu lambda sigma} = (e m / alphatilde)
    //   (A_nu dgtilde_{lambda sigma}/dx^kappa y^kappa - (A.y) dgtilde_{lambda sigma}/dx^nu)
    let a_dot_y = sum1(|k| a_val[k].clone() * y[k].clone());
    let inv_at = at.try_recip()?;
    let m_tensor = ten3(|nu, la, s| {
        ((a_val[nu].clone() * sum1(|k| dgt[la][s][k].clone() * y[k].clone())
            - a_dot_y.clone() * dgt[la][s][nu].clone())
            * inv_at.clone())
        .scale(e * m)
    });

    Ok(DecompTensors {
        f_em,
        s_tensor,
        q_tensor,
        m_tensor,
    })
}

/// Everything route 2 and route 3 produce, with the cross-route spread.
#[derive(Debug, Clone)]
pub struct SprayBundle {
    /// Authoritative geodesic coefficients (route 1).
    pub g_spray: V4<f64>,
    pub g_decomposed: V4<f64>,
    pub g_christoffel: V4<f64>,
    pub f_em: M4<f64>,
    pub s_tensor: T3<f64>,
    pub q_tensor: T3<f64>,
    pub m_tensor: T3<f64>,
    /// Finsler Christoffel symbols at this (x, y).
    pub gamma: T3<f64>,
    /// Spacetime Christoffel symbols.
    pub gamma_tilde: T3<f64>,
    /// Max absolute pairwise deviation among the three routes.
    pub route_spread: f64,
    /// Scale for judging the spread: max |G| over routes, floored at 1.
    pub route_scale: f64,
}

/// Route 2: assemble the spray from the decomposition
/// `G^mu = 1/4 g^{mu nu} (-2 e alpha F_{nu sigma} + (S+Q+M)_{nu lambda sigma} y^lambda) y^sigma`,
/// together with the other two routes and their spread.
pub fn spray_decomposed(bg: &ScenarioBackground, p: &TangentPoint) -> Result<SprayBundle> {
    let t = decomposed_tensors::<f64>(bg, &p.x, &p.y, None)?;
    let (_, alpha, _, _) = finsler_function(bg, p)?;
    let g = crate::randers::fundamental_tensor_hessian(bg, p)?;
    let (ginv, _) = inv4(&g)?;
    let contract = vec4(|nu| {
        sum1(|s| {
            (-2.0 * bg.e * alpha * t.f_em[nu][s]
                + sum1(|la| {
                    (t.s_tensor[nu][la][s] + t.q_tensor[nu][la][s] + t.m_tensor[nu][la][s])
                        * p.y[la]
                }))
                * p.y[s]
        })
    });
    let g_decomposed = vec4(|mu| 0.25 * sum1(|nu| ginv[mu][nu] * contract[nu]));

    let g_spray = spray_general(bg, p)?;
    let (g_christoffel, gamma) = spray_christoffel(bg, p)?;

    let at = bg.background_at(p.x, 1)?;
    let gamma_tilde = christoffel_tilde(&at)?;

    let scale = [&g_spray, &g_decomposed, &g_christoffel]
        .iter()
        .map(|v| max_abs_v4(v))
        .fold(1.0_f64, f64::max);
    let spread = |a: &V4<f64>, b: &V4<f64>| max_abs_v4(&vec4(|i| a[i] - b[i]));
    let route_spread = spread(&g_spray, &g_decomposed)
        .max(spread(&g_spray, &g_christoffel))
        .max(spread(&g_decomposed, &g_christoffel));

    Ok(SprayBundle {
        g_spray,
        g_decomposed,
        g_christoffel,
        f_em: t.f_em,
        s_tensor: t.s_tensor,
        q_tensor: t.q_tensor,
        m_tensor: t.m_tensor,
        gamma,
        gamma_tilde,
        route_spread,
        route_scale: scale,
    })
}

/// Route 3: `G^lambda = 1/2 gamma^lambda_{mu nu} y^mu y^nu` with the
/// Finsler Christoffel symbols built from x-derivatives of the fundamental
/// tensor at fixed y.
pub fn spray_christoffel(bg: &ScenarioBackground, p: &TangentPoint) -> Result<(V4<f64>, T3<f64>)> {
    let space = JetSpace::new(8, 3)?;
    let xj: [Jet<f64>; 4] = [
        space.seed(p.x[0], 0)?,
        space.seed(p.x[1], 1)?,
        space.seed(p.x[2], 2)?,
        space.seed(p.x[3], 3)?,
    ];
    let yj: [Jet<f64>; 4] = [
        space.seed(p.y[0], 4)?,
        space.seed(p.y[1], 5)?,
        space.seed(p.y[2], 6)?,
        space.seed(p.y[3], 7)?,
    ];
    let f2 = finsler_squared(bg, &xj, &yj)?;
    let g = mat4(|i, j| 0.5 * f2.d2(4 + i, 4 + j));
    let (ginv, _) = inv4(&g)?;
    // dg[mu][nu][sigma] = d g_{mu nu} / dx^sigma at fixed y
    let dg = ten3(|i, j, s| 0.5 * f2.d3(4 + i, 4 + j, s));
    let gamma = ten3(|l, m, n| {
        0.5 * sum1(|s| ginv[l][s] * (dg[s][n][m] + dg[m][s][n] - dg[m][n][s]))
    });
    let g_route = vec4(|l| 0.5 * sum2(|m, n| gamma[l][m][n] * p.y[m] * p.y[n]));
    Ok((g_route, gamma))
}

// ---------------------------------------------------------------------------
// Effective dynamics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct EffectiveDynamics {
    /// `m^E_{mu nu} = 2 g_{mu nu} / L`.
    pub m_eff: M4<f64>,
    /// `f_mu = -2 g_{mu nu} G^nu / L`.
    pub force: V4<f64>,
    /// Total field; satisfies `f_mu = F_total_{mu nu} y^nu`.
    pub f_total: M4<f64>,
    /// Geometric field `F^G_{mu nu} = -(y^lambda / 2L) (S+Q+M)_{mu lambda nu}`.
    pub f_geom: M4<f64>,
}

/// The total field carries the charge factor, `e (1 - beta/L) F_em + F^G`:
/// the spray's electromagnetic term is `-2 e alpha F`, so without the `e`
/// the force identity `f = F_total y` cannot hold. `drop_beta_over_l`
/// reproduces the weak-field simplification that discards `beta/L`.
pub fn effective_dynamics(
    bg: &ScenarioBackground,
    p: &TangentPoint,
    drop_beta_over_l: bool,
) -> Result<EffectiveDynamics> {
    let (l, _, beta, _) = finsler_function(bg, p)?;
    let g = crate::randers::fundamental_tensor_hessian(bg, p)?;
    let g_spray = spray_general(bg, p)?;
    let t = decomposed_tensors::<f64>(bg, &p.x, &p.y, None)?;
    let m_eff = mat4(|i, j| 2.0 * g[i][j] / l);
    let force = vec4(|mu| -2.0 * sum1(|nu| g[mu][nu] * g_spray[nu]) / l);
    let f_geom = mat4(|mu, nu| {
        -sum1(|la| p.y[la] * (t.s_tensor[mu][la][nu] + t.q_tensor[mu][la][nu] + t.m_tensor[mu][la][nu]))
            / (2.0 * l)
    });
    let em_factor = if drop_beta_over_l {
        bg.e
    } else {
        bg.e * (1.0 - beta / l)
    };
    let f_total = mat4(|mu, nu| em_factor * t.f_em[mu][nu] + f_geom[mu][nu]);
    Ok(EffectiveDynamics {
        m_eff,
        force,
        f_total,
        f_geom,
    })
}

/// Geometric field alone, generic over the scalar field (used by the
/// Maxwell residuals, where its x-derivatives and potential-gradient
/// sensitivities are needed).
pub fn geometric_field<T: Scalar>(
    bg: &ScenarioBackground,
    x: &[T; 4],
    y: &[T; 4],
    da_override: Option<&M4<T>>,
) -> Result<M4<T>> {
    let t = decomposed_tensors(bg, x, y, da_override)?;
    let l = crate::randers::finsler_l(bg, x, y)?;
    let inv_2l = l.scale(2.0).try_recip()?;
    Ok(mat4(|mu, nu| {
        -(sum1(|la| {
            y[la].clone()
                * (t.s_tensor[mu][la][nu].clone()
                    + t.q_tensor[mu][la][nu].clone()
                    + t.m_tensor[mu][la][nu].clone())
        }) * inv_2l.clone())
    }))
}

// ---------------------------------------------------------------------------
// Berwald diagnostics
// ---------------------------------------------------------------------------

pub const BERWALD_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct BerwaldReport {
    /// `B_{j|k} = d b_j/dx^k - b_sigma gammatilde^sigma_{jk}` with `b = eA`.
    pub b_cov: M4<f64>,
    /// Geodesic deviation from the Riemannian spray,
    /// `B^mu = gammatilde^mu_{jk} y^j y^k - 2 G^mu` in closed form.
    pub deviation: V4<f64>,
    /// `max_mu |gamma^mu_{jk} y^j y^k - gammatilde^mu_{jk} y^j y^k|`.
    pub christoffel_gap: f64,
    /// Electromagnetic field reconstructed from the antisymmetric part of
    /// `B_{j|k}`; equals `e F_{mu nu}` identically and vanishes on Berwald
    /// backgrounds.
    pub f_from_b: M4<f64>,
    pub is_berwald: bool,
}

/// The closed-form deviation uses the alpha-metric `a = m^2 gtilde` for
/// index raising (first term carries `alpha / m^2`), which is the variant
/// that reproduces `gammatilde yy - 2G` exactly for every mass; it reduces
/// to the textbook m = 1 expression.
pub fn berwald_report(bg: &ScenarioBackground, p: &TangentPoint) -> Result<BerwaldReport> {
    let at = bg.background_at(p.x, 1)?;
    let gamma_tilde = christoffel_tilde(&at)?;
    let b = crate::randers::b_cov(bg, &p.x)?;
    let db = mat4(|j, k| bg.e * at.da[j][k]);
    let b_cov = mat4(|j, k| db[j][k] - sum1(|s| b[s] * gamma_tilde[s][j][k]));

    let (l, alpha, _, _) = finsler_function(bg, p)?;
    let (gtinv, _) = inv4(&at.gtilde_val)?;
    let m2 = bg.m * bg.m;
    let b_up = vec4(|i| sum1(|j| gtinv[i][j] * b[j]) / m2);
    let ell_up = vec4(|i| p.y[i] / l);
    let scalar_part = sum2(|j, k| b_cov[j][k] * p.y[j] * p.y[k])
        + alpha * sum2(|j, k| b_cov[j][k] * (p.y[j] * b_up[k] - p.y[k] * b_up[j]));
    let deviation = vec4(|mu| {
        -(alpha / m2)
            * sum2(|j, k| b_cov[j][k] * (gtinv[mu][j] * p.y[k] - gtinv[mu][k] * p.y[j]))
            - ell_up[mu] * scalar_part
    });

    let (g_christoffel, _) = spray_christoffel(bg, p)?;
    let gamma_tilde_yy = vec4(|mu| sum2(|j, k| gamma_tilde[mu][j][k] * p.y[j] * p.y[k]));
    let christoffel_gap = max_abs_v4(&vec4(|mu| 2.0 * g_christoffel[mu] - gamma_tilde_yy[mu]));

    let f_from_b = mat4(|mu, nu| b_cov[nu][mu] - b_cov[mu][nu]);
    let is_berwald = max_abs_m4(&b_cov) < BERWALD_TOL;
    Ok(BerwaldReport {
        b_cov,
        deviation,
        christoffel_gap,
        f_from_b,
        is_berwald,
    })
}

// ---------------------------------------------------------------------------
// Geodesic integration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct GeodesicControls {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
    pub initial_step: f64,
}

impl Default for GeodesicControls {
    fn default() -> Self {
        GeodesicControls {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_steps: 1_000_000,
            initial_step: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GeodesicSample {
    pub tau: f64,
    pub x: [f64; 4],
    pub y: [f64; 4],
    pub l: f64,
}

#[derive(Debug, Clone)]
pub struct GeodesicTrajectory {
    pub samples: Vec<GeodesicSample>,
    pub accepted: usize,
    pub rejected: usize,
    /// `max |L - L0| / |L0|` over accepted samples; L is a first integral,
    /// so this is the integrator's exactness monitor.
    pub conservation_drift: f64,
    /// Trajectory left the timelike cone or the expression domain and was
    /// truncated at the last valid sample.
    pub domain_exit: bool,
}

type State = ([f64; 4], [f64; 4]);

fn rhs(bg: &ScenarioBackground, s: &State) -> Result<State> {
    let g = spray(bg, &s.0, &s.1)?;
    Ok((s.1, vec4(|i| -2.0 * g[i])))
}

fn rk4_step(bg: &ScenarioBackground, s: &State, h: f64) -> Result<State> {
    let add = |a: &State, b: &State, k: f64| -> State {
        (
            vec4(|i| a.0[i] + k * b.0[i]),
            vec4(|i| a.1[i] + k * b.1[i]),
        )
    };
    let k1 = rhs(bg, s)?;
    let k2 = rhs(bg, &add(s, &k1, h / 2.0))?;
    let k3 = rhs(bg, &add(s, &k2, h / 2.0))?;
    let k4 = rhs(bg, &add(s, &k3, h))?;
    Ok((
        vec4(|i| s.0[i] + h / 6.0 * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i])),
        vec4(|i| s.1[i] + h / 6.0 * (k1.1[i] + 2.0 * k2.1[i] + 2.0 * k3.1[i] + k4.1[i])),
    ))
}

/// Classic RK4 with step-doubling adaptive control on the combined state
/// error. The curve parameter is used as given; `y` is never renormalized,
/// so constancy of L is a genuine accuracy check.
pub fn integrate_geodesic(
    bg: &ScenarioBackground,
    init: TangentPoint,
    tau_end: f64,
    controls: &GeodesicControls,
) -> Result<GeodesicTrajectory> {
    let (l0, ..) = finsler_function(bg, &init)?;
    let mut samples = vec![GeodesicSample {
        tau: 0.0,
        x: init.x,
        y: init.y,
        l: l0,
    }];
    let mut state: State = (init.x, init.y);
    let mut tau = 0.0;
    let mut h = controls.initial_step.min(tau_end.max(1e-12));
    let mut accepted = 0;
    let mut rejected = 0;
    let mut drift: f64 = 0.0;
    let mut domain_exit = false;

    while tau < tau_end && accepted + rejected < controls.max_steps {
        if tau + h > tau_end {
            h = tau_end - tau;
        }
        let attempt = (|| -> Result<(State, State)> {
            let full = rk4_step(bg, &state, h)?;
            let half = rk4_step(bg, &state, h / 2.0)?;
            let two = rk4_step(bg, &half, h / 2.0)?;
            Ok((full, two))
        })();
        let (full, two) = match attempt {
            Ok(v) => v,
            Err(FrError::NonTimelike { .. })
            | Err(FrError::NonPositiveFinsler { .. })
            | Err(FrError::Eval { .. }) => {
                // try smaller steps before declaring the domain lost
                if h > 1e-12 * tau_end.max(1.0) {
                    h *= 0.25;
                    rejected += 1;
                    continue;
                }
                domain_exit = true;
                break;
            }
            Err(other) => return Err(other),
        };
        // step-doubling error estimate for a 4th-order method
        let mut err: f64 = 0.0;
        for i in 0..4 {
            let sc0 = controls.abs_tol + controls.rel_tol * two.0[i].abs();
            let sc1 = controls.abs_tol + controls.rel_tol * two.1[i].abs();
            err = err.max((full.0[i] - two.0[i]).abs() / sc0 / 15.0);
            err = err.max((full.1[i] - two.1[i]).abs() / sc1 / 15.0);
        }
        if err <= 1.0 {
            tau += h;
            state = two;
            accepted += 1;
            let l = match finsler_function(bg, &TangentPoint::new(state.0, state.1)) {
                Ok((l, ..)) => l,
                Err(_) => {
                    domain_exit = true;
                    break;
                }
            };
            drift = drift.max((l - l0).abs() / l0.abs());
            samples.push(GeodesicSample {
                tau,
                x: state.0,
                y: state.1,
                l,
            });
        } else {
            rejected += 1;
        }
        let grow = 0.9 * err.max(1e-16).powf(-0.2);
        h *= grow.clamp(0.2, 5.0);
    }

    Ok(GeodesicTrajectory {
        samples,
        accepted,
        rejected,
        conservation_drift: drift,
        domain_exit,
    })
}
