//! Chern connection and curvature machinery: nonlinear connection, Chern
//! connection by two algebraically equivalent routes, Chern-Riemann
//! curvature, Ricci scalar/tensor by two routes, the Cartan-tensor
//! correction to the Einstein tensor, stress-energy, covariant
//! derivatives, and the divergence probe.
//!
//! Horizontal derivatives are exact: a quantity is evaluated as a jet in
//! both x and y, and `delta/delta x^mu = d/dx^mu - N^sigma_mu d/dy^sigma`
//! is assembled from the two seeded groups. Everything is generic over the
//! scalar field, so outer jets differentiate the whole chain when the
//! divergence probe needs third derivatives of the backgrounds.

use crate::background::ScenarioBackground;
use crate::error::Result;
use crate::jet::{Jet, JetSpace};
use crate::linalg::{
    inv4, mat4, max_abs_m4, max_abs_t3, sum1, sum2, ten3, ten4, vec4, M4, T3, T4, V4,
};
use crate::randers::{cartan_tensor_xy, finsler_l, fundamental_tensor, TangentPoint};
use crate::scalar::Scalar;
use crate::spray::{decomposed_tensors, geometric_field, spray};

fn seeds_xy<T: Scalar>(
    x: &[T; 4],
    y: &[T; 4],
    order: usize,
) -> Result<([Jet<T>; 4], [Jet<T>; 4])> {
    let space = JetSpace::new(8, order)?;
    Ok((
        [
            space.seed(x[0].clone(), 0)?,
            space.seed(x[1].clone(), 1)?,
            space.seed(x[2].clone(), 2)?,
            space.seed(x[3].clone(), 3)?,
        ],
        [
            space.seed(y[0].clone(), 4)?,
            space.seed(y[1].clone(), 5)?,
            space.seed(y[2].clone(), 6)?,
            space.seed(y[3].clone(), 7)?,
        ],
    ))
}

/// Cartan nonlinear connection `N^mu_nu = dG^mu / dy^nu`.
pub fn nonlinear_connection_xy<T: Scalar>(
    bg: &ScenarioBackground,
    x: &[T; 4],
    y: &[T; 4],
) -> Result<M4<T>> {
    let space = JetSpace::new(4, 1)?;
    let xj: [Jet<T>; 4] = std::array::from_fn(|i| Jet::constant(x[i].clone()));
    let yj: [Jet<T>; 4] = [
        space.seed(y[0].clone(), 0)?,
        space.seed(y[1].clone(), 1)?,
        space.seed(y[2].clone(), 2)?,
        space.seed(y[3].clone(), 3)?,
    ];
    let gj = spray(bg, &xj, &yj)?;
    Ok(mat4(|m, n| gj[m].d1(n)))
}

pub fn nonlinear_connection(bg: &ScenarioBackground, p: &TangentPoint) -> Result<M4<f64>> {
    nonlinear_connection_xy(bg, &p.x, &p.y)
}

/// Chern connection coefficients via Christoffel's trick on horizontal
/// metric derivatives:
/// `Gamma^mu_{nu rho} = 1/2 g^{mu sigma} (delta g_{sigma rho}/dx^nu
///  + delta g_{sigma nu}/dx^rho - delta g_{nu rho}/dx^sigma)`.
pub fn chern_gamma_xy<T: Scalar>(
    bg: &ScenarioBackground,
    x: &[T; 4],
    y: &[T; 4],
) -> Result<T3<T>> {
    let (xj, yj) = seeds_xy(x, y, 1)?;
    let gj = fundamental_tensor(bg, &xj, &yj)?;
    let n = nonlinear_connection_xy(bg, x, y)?;
    let g = mat4(|i, j| gj[i][j].coeff_multi(&[]));
    let (ginv, _) = inv4(&g)?;
    let delta = ten3(|a, b, l| {
        gj[a][b].d1(l) - sum1(|s| n[s][l].clone() * gj[a][b].d1(4 + s))
    });
    Ok(ten3(|m, nu, r| {
        sum1(|s| {
            ginv[m][s].clone()
                * (delta[s][r][nu].clone() + delta[s][nu][r].clone() - delta[nu][r][s].clone())
        })
        .scale(0.5)
    }))
}

/// Chern connection at a point plus the deviation of the equivalent
/// `gamma - N-correction` form (an algebraic identity; the gap is a
/// plumbing self-check).
pub fn chern_connection(bg: &ScenarioBackground, p: &TangentPoint) -> Result<(T3<f64>, f64)> {
    let (xj, yj) = seeds_xy(&p.x, &p.y, 1)?;
    let gj = fundamental_tensor(bg, &xj, &yj)?;
    let n = nonlinear_connection_xy(bg, &p.x, &p.y)?;
    let g = mat4(|i, j| gj[i][j].coeff_multi(&[]));
    let (ginv, _) = inv4(&g)?;
    let dgx = ten3(|a, b, l| gj[a][b].d1(l));
    let dgy = ten3(|a, b, s| gj[a][b].d1(4 + s));
    let delta = ten3(|a, b, l| dgx[a][b][l] - sum1(|s| n[s][l] * dgy[a][b][s]));
    let gamma_cc4 = ten3(|m, nu, r| {
        0.5 * sum1(|s| ginv[m][s] * (delta[s][r][nu] + delta[s][nu][r] - delta[nu][r][s]))
    });
    // gamma - 1/2 g^{ms}(N^a_nu dg_{s r}/dy^a + N^a_r dg_{nu s}/dy^a - N^a_s dg_{nu r}/dy^a)
    let gamma_plain = ten3(|m, nu, r| {
        0.5 * sum1(|s| ginv[m][s] * (dgx[s][r][nu] + dgx[s][nu][r] - dgx[nu][r][s]))
    });
    let gamma_alt = ten3(|m, nu, r| {
        gamma_plain[m][nu][r]
            - 0.5 * sum1(|s| {
                ginv[m][s]
                    * sum1(|a| {
                        n[a][nu] * dgy[s][r][a] + n[a][r] * dgy[nu][s][a] - n[a][s] * dgy[nu][r][a]
                    })
            })
    });
    let gap = max_abs_t3(&ten3(|i, j, k| gamma_cc4[i][j][k] - gamma_alt[i][j][k]));
    Ok((gamma_cc4, gap))
}

/// `hv`-curvature `R^mu_{nu kappa}` from the nonlinear connection:
/// `dN^mu_kappa/dx^nu - dN^mu_nu/dx^kappa
///  + N^sigma_kappa dN^mu_nu/dy^sigma - N^sigma_nu dN^mu_kappa/dy^sigma`.
pub fn r_hv_xy<T: Scalar>(bg: &ScenarioBackground, x: &[T; 4], y: &[T; 4]) -> Result<T3<T>> {
    let (xj, yj) = seeds_xy(x, y, 1)?;
    let nj = nonlinear_connection_xy(bg, &xj, &yj)?;
    let n = mat4(|m, k| nj[m][k].coeff_multi(&[]));
    Ok(ten3(|m, nu, k| {
        nj[m][k].d1(nu) - nj[m][nu].d1(k)
            + sum1(|s| {
                n[s][k].clone() * nj[m][nu].d1(4 + s) - n[s][nu].clone() * nj[m][k].d1(4 + s)
            })
    }))
}

#[derive(Debug, Clone)]
pub struct ChernRiemann {
    /// `R_mu^lambda_{sigma nu}`, indexed `[mu][lambda][sigma][nu]`.
    pub r_full: T4<f64>,
    /// `R^mu_{nu kappa}`, indexed `[mu][nu][kappa]`.
    pub r_hv: T3<f64>,
    /// `max |y^sigma R_sigma^mu_{kappa lambda} - R^mu_{kappa lambda}|`.
    pub consistency_gap: f64,
}

/// Full Chern-Riemann curvature. The quadratic terms use the standard
/// form `Gamma^lambda_{rho sigma} Gamma^rho_{mu nu} -
/// Gamma^lambda_{rho nu} Gamma^rho_{mu sigma}`, validated by the
/// flat-vacuum zero test and the Riemannian-limit oracle.
pub fn chern_riemann(bg: &ScenarioBackground, p: &TangentPoint) -> Result<ChernRiemann> {
    let (xj, yj) = seeds_xy(&p.x, &p.y, 1)?;
    let gammaj = chern_gamma_xy(bg, &xj, &yj)?;
    let n = nonlinear_connection_xy(bg, &p.x, &p.y)?;
    let gamma = ten3(|l, m, nu| gammaj[l][m][nu].coeff_multi(&[]));
    let dgamma = ten4(|l, m, nu, s| {
        gammaj[l][m][nu].d1(s) - sum1(|a| n[a][s] * gammaj[l][m][nu].d1(4 + a))
    });
    let r_full = ten4(|mu, la, si, nu| {
        dgamma[la][mu][nu][si] - dgamma[la][mu][si][nu]
            + sum1(|r| gamma[la][r][si] * gamma[r][mu][nu] - gamma[la][r][nu] * gamma[r][mu][si])
    });
    let r_hv = r_hv_xy(bg, &p.x, &p.y)?;
    let contracted = ten3(|m, k, l| sum1(|s| p.y[s] * r_full[s][m][k][l]));
    let consistency_gap =
        max_abs_t3(&ten3(|m, k, l| contracted[m][k][l] - r_hv[m][k][l]));
    Ok(ChernRiemann {
        r_full,
        r_hv,
        consistency_gap,
    })
}

/// Ricci scalar from the spray:
/// `Ric = 2 dG^mu/dx^mu - y^kappa d^2 G^mu/dx^kappa dy^mu
///  + 2 G^kappa d^2 G^mu/dy^kappa dy^mu - dG^mu/dy^kappa dG^kappa/dy^mu`.
pub fn ricci_scalar_xy<T: Scalar>(bg: &ScenarioBackground, x: &[T; 4], y: &[T; 4]) -> Result<T> {
    let (xj, yj) = seeds_xy(x, y, 2)?;
    let gj = spray(bg, &xj, &yj)?;
    let gval = vec4(|k| gj[k].coeff_multi(&[]));
    let term1 = sum1(|m| gj[m].d1(m)).scale(2.0);
    let term2 = sum2(|k, m| y[k].clone() * gj[m].d2(k, 4 + m));
    let term3 = sum2(|k, m| gval[k].clone() * gj[m].d2(4 + k, 4 + m)).scale(2.0);
    let term4 = sum2(|k, m| gj[m].d1(4 + k) * gj[k].d1(4 + m));
    Ok(term1 - term2 + term3 - term4)
}

/// Ricci curvature tensor `Ric_{mu nu} = 1/2 d^2 Ric / dy^mu dy^nu`.
pub fn ricci_tensor_xy<T: Scalar>(
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
    let ric = ricci_scalar_xy(bg, &xj, &yj)?;
    Ok(mat4(|m, n| ric.d2(m, n).scale(0.5)))
}

#[derive(Debug, Clone)]
pub struct RicciReport {
    /// `R^mu_nu` from the spray formula, indexed `[mu][nu]`.
    pub r_map: M4<f64>,
    /// Ricci scalar as the trace of `r_map`.
    pub ric: f64,
    /// The same scalar from the curvature contraction
    /// `y^rho R_rho^mu_{mu sigma} y^sigma`.
    pub ric_contraction: f64,
    pub ric_tensor: M4<f64>,
    /// `S = g^{mu nu} Ric_{mu nu}`.
    pub s_scalar: f64,
    /// |ric - ric_contraction|.
    pub route_gap: f64,
}

pub fn ricci(bg: &ScenarioBackground, p: &TangentPoint) -> Result<RicciReport> {
    let (xj, yj) = seeds_xy(&p.x, &p.y, 2)?;
    let gj = spray(bg, &xj, &yj)?;
    let gval = vec4(|k| gj[k].coeff_multi(&[]));
    let r_map = mat4(|m, n| {
        2.0 * gj[m].d1(n) - sum1(|k| p.y[k] * gj[m].d2(k, 4 + n))
            + 2.0 * sum1(|k| gval[k] * gj[m].d2(4 + k, 4 + n))
            - sum1(|k| gj[m].d1(4 + k) * gj[k].d1(4 + n))
    });
    let ric = sum1(|m| r_map[m][m]);

    let cr = chern_riemann(bg, p)?;
    let ric_contraction = sum2(|r, s| {
        p.y[r] * sum1(|m| cr.r_full[r][m][m][s]) * p.y[s]
    });

    let ric_tensor = ricci_tensor_xy(bg, &p.x, &p.y)?;
    let g = fundamental_tensor(bg, &p.x, &p.y)?;
    let (ginv, _) = inv4(&g)?;
    let s_scalar = sum2(|m, n| ginv[m][n] * ric_tensor[m][n]);
    Ok(RicciReport {
        r_map,
        ric,
        ric_contraction,
        ric_tensor,
        s_scalar,
        route_gap: (ric - ric_contraction).abs(),
    })
}

/// Cartan A-tensor `A_{kappa lambda sigma} = (L/2) d g_{kappa lambda} / dy^sigma
/// = L C_{kappa lambda sigma}`.
pub fn cartan_a_tensor_xy<T: Scalar>(
    bg: &ScenarioBackground,
    x: &[T; 4],
    y: &[T; 4],
) -> Result<T3<T>> {
    let c = cartan_tensor_xy(bg, x, y)?;
    let l = finsler_l(bg, x, y)?;
    Ok(ten3(|i, j, k| l.clone() * c[i][j][k].clone()))
}

/// The Cartan-tensor correction
/// `Lambda_{mu nu} = 1/2 B_kappa^kappa_{mu nu} + B_mu^kappa_{nu kappa}`
/// with `B_kappa^sigma_{mu nu} = -g^{sigma lambda} A_{kappa lambda rho}
/// R^rho_{mu nu}` and `R^rho_{mu nu} = R_hv^rho_{mu nu} / L`.
pub fn lambda_xy<T: Scalar>(bg: &ScenarioBackground, x: &[T; 4], y: &[T; 4]) -> Result<M4<T>> {
    let a = cartan_a_tensor_xy(bg, x, y)?;
    if ten3(|i, j, k| a[i][j][k].clone()).iter().flatten().flatten().all(|v| v.is_zero()) {
        // Riemannian limit: no Cartan tensor, no correction.
        return Ok(mat4(|_, _| T::zero()));
    }
    let r_hv = r_hv_xy(bg, x, y)?;
    let l = finsler_l(bg, x, y)?;
    let inv_l = l.try_recip()?;
    let r_low = ten3(|s, m, n| r_hv[s][m][n].clone() * inv_l.clone());
    let g = fundamental_tensor(bg, x, y)?;
    let (ginv, _) = inv4(&g)?;
    // b_up[kappa][sigma][mu][nu] = g^{sigma lambda} (-A_{kappa lambda rho} R^rho_{mu nu})
    let b_up = ten4(|k, s, m, n| {
        sum1(|la| {
            ginv[s][la].clone()
                * -sum1(|r| a[k][la][r].clone() * r_low[r][m][n].clone())
        })
    });
    Ok(mat4(|m, n| {
        sum1(|k| b_up[k][k][m][n].clone()).scale(0.5) + sum1(|k| b_up[m][k][n][k].clone())
    }))
}

/// Einstein tensor `G_{mu nu} = Ric_{mu nu} - 1/2 g_{mu nu} S + Lambda_{mu nu}`.
pub fn einstein_xy<T: Scalar>(bg: &ScenarioBackground, x: &[T; 4], y: &[T; 4]) -> Result<M4<T>> {
    let ric_tensor = ricci_tensor_xy(bg, x, y)?;
    let g = fundamental_tensor(bg, x, y)?;
    let (ginv, _) = inv4(&g)?;
    let s = sum2(|m, n| ginv[m][n].clone() * ric_tensor[m][n].clone());
    let lambda = lambda_xy(bg, x, y)?;
    Ok(mat4(|m, n| {
        ric_tensor[m][n].clone() - (g[m][n].clone() * s.clone()).scale(0.5) + lambda[m][n].clone()
    }))
}

#[derive(Debug, Clone)]
pub struct EinsteinBundle {
    pub a_cartan: T3<f64>,
    pub lambda: M4<f64>,
    pub einstein: M4<f64>,
    /// Max antisymmetric part of the Einstein tensor (it is not symmetric
    /// in general; recorded for reports).
    pub einstein_asym: f64,
}

pub fn lambda_and_einstein(bg: &ScenarioBackground, p: &TangentPoint) -> Result<EinsteinBundle> {
    let a_cartan = cartan_a_tensor_xy(bg, &p.x, &p.y)?;
    let lambda = lambda_xy(bg, &p.x, &p.y)?;
    let einstein = einstein_xy(bg, &p.x, &p.y)?;
    let einstein_asym = max_abs_m4(&mat4(|i, j| 0.5 * (einstein[i][j] - einstein[j][i])));
    Ok(EinsteinBundle {
        a_cartan,
        lambda,
        einstein,
        einstein_asym,
    })
}

/// Total effective field `e (1 - beta/L) F_em + F^G`, generic.
pub fn total_field_xy<T: Scalar>(
    bg: &ScenarioBackground,
    x: &[T; 4],
    y: &[T; 4],
    drop_beta_over_l: bool,
) -> Result<M4<T>> {
    let t = decomposed_tensors(bg, x, y, None)?;
    let f_geom = geometric_field(bg, x, y, None)?;
    let factor: T = if drop_beta_over_l {
        T::from_f64(bg.e)
    } else {
        let gt = bg.gtilde_at(x)?;
        let a2 = sum2(|i, j| gt[i][j].clone() * y[i].clone() * y[j].clone());
        let alpha = a2.try_sqrt()?.scale(bg.m);
        let l = finsler_l(bg, x, y)?;
        (alpha.try_div(&l)?).scale(bg.e) // e (1 - beta/L) = e alpha/L
    };
    Ok(mat4(|m, n| {
        factor.clone() * t.f_em[m][n].clone() + f_geom[m][n].clone()
    }))
}

/// Stress-energy
/// `T_{mu nu} = Ftot_{mu sigma} Ftot^sigma_nu + 1/4 g_{mu nu} Ftot_{ab} Ftot^{ab}`,
/// all indices raised with the Finsler inverse. The sign of the trace term
/// is the one that makes the tensor traceless for antisymmetric fields and
/// reproduces the classical energy density `T_00 = (E^2 + B^2)/2` and
/// field-line tension `T_11 = -E^2/2` in the flat electromagnetic limit
/// under this signature and slot convention.
pub fn stress_energy_xy<T: Scalar>(
    bg: &ScenarioBackground,
    x: &[T; 4],
    y: &[T; 4],
    drop_beta_over_l: bool,
) -> Result<M4<T>> {
    let f = total_field_xy(bg, x, y, drop_beta_over_l)?;
    let g = fundamental_tensor(bg, x, y)?;
    let (ginv, _) = inv4(&g)?;
    let f_mixed = mat4(|s, n| sum1(|a| ginv[s][a].clone() * f[a][n].clone()));
    let f_up = mat4(|a, b| sum2(|m, n| ginv[a][m].clone() * ginv[b][n].clone() * f[m][n].clone()));
    let trace = sum2(|a, b| f[a][b].clone() * f_up[a][b].clone());
    Ok(mat4(|m, n| {
        sum1(|s| f[m][s].clone() * f_mixed[s][n].clone())
            + (g[m][n].clone() * trace.clone()).scale(0.25)
    }))
}

pub fn stress_energy(
    bg: &ScenarioBackground,
    p: &TangentPoint,
    drop_beta_over_l: bool,
) -> Result<M4<f64>> {
    stress_energy_xy(bg, &p.x, &p.y, drop_beta_over_l)
}

// ---------------------------------------------------------------------------
// Covariant derivatives
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variance {
    /// `T_{mu nu}`: two covariant slots.
    DownDown,
    /// `T^mu_nu`: contravariant first slot.
    UpDown,
}

/// A rank-2 tensor field on the tangent bundle that can be sampled with
/// jet-valued arguments.
pub trait Rank2Field {
    fn variance(&self) -> Variance;
    fn eval<T: Scalar>(&self, bg: &ScenarioBackground, x: &[T; 4], y: &[T; 4]) -> Result<M4<T>>;
}

/// The fundamental tensor itself.
pub struct MetricField;

impl Rank2Field for MetricField {
    fn variance(&self) -> Variance {
        Variance::DownDown
    }
    fn eval<T: Scalar>(&self, bg: &ScenarioBackground, x: &[T; 4], y: &[T; 4]) -> Result<M4<T>> {
        fundamental_tensor(bg, x, y)
    }
}

/// Einstein tensor with the first index raised by the Finsler inverse.
pub struct EinsteinMixed;

impl Rank2Field for EinsteinMixed {
    fn variance(&self) -> Variance {
        Variance::UpDown
    }
    fn eval<T: Scalar>(&self, bg: &ScenarioBackground, x: &[T; 4], y: &[T; 4]) -> Result<M4<T>> {
        let e = einstein_xy(bg, x, y)?;
        let g = fundamental_tensor(bg, x, y)?;
        let (ginv, _) = inv4(&g)?;
        Ok(mat4(|m, n| sum1(|r| ginv[m][r].clone() * e[r][n].clone())))
    }
}

/// Stress-energy with the first index raised by the Finsler inverse.
pub struct StressMixed {
    pub drop_beta_over_l: bool,
}

impl Rank2Field for StressMixed {
    fn variance(&self) -> Variance {
        Variance::UpDown
    }
    fn eval<T: Scalar>(&self, bg: &ScenarioBackground, x: &[T; 4], y: &[T; 4]) -> Result<M4<T>> {
        let t = stress_energy_xy(bg, x, y, self.drop_beta_over_l)?;
        let g = fundamental_tensor(bg, x, y)?;
        let (ginv, _) = inv4(&g)?;
        Ok(mat4(|m, n| sum1(|r| ginv[m][r].clone() * t[r][n].clone())))
    }
}

/// A constant tensor (flat-background sanity checks).
pub struct ConstantField(pub M4<f64>, pub Variance);

impl Rank2Field for ConstantField {
    fn variance(&self) -> Variance {
        self.1
    }
    fn eval<T: Scalar>(&self, _: &ScenarioBackground, _: &[T; 4], _: &[T; 4]) -> Result<M4<T>> {
        Ok(mat4(|i, j| T::from_f64(self.0[i][j])))
    }
}

/// Horizontal and vertical covariant derivatives of a rank-2 field; the
/// new (last) slot is the derivative index. The vertical derivative is the
/// plain y-partial, with no correction terms.
pub fn covariant_derivative<F: Rank2Field>(
    field: &F,
    bg: &ScenarioBackground,
    p: &TangentPoint,
) -> Result<(T3<f64>, T3<f64>)> {
    let (xj, yj) = seeds_xy(&p.x, &p.y, 1)?;
    let tj = field.eval(bg, &xj, &yj)?;
    let n = nonlinear_connection_xy(bg, &p.x, &p.y)?;
    let gamma = chern_gamma_xy(bg, &p.x, &p.y)?;
    let tval = mat4(|a, b| tj[a][b].coeff_multi(&[]));
    let delta = ten3(|a, b, l| tj[a][b].d1(l) - sum1(|s| n[s][l] * tj[a][b].d1(4 + s)));
    let horizontal = match field.variance() {
        Variance::DownDown => ten3(|m, nu, l| {
            delta[m][nu][l]
                - sum1(|k| gamma[k][m][l] * tval[k][nu])
                - sum1(|k| gamma[k][nu][l] * tval[m][k])
        }),
        Variance::UpDown => ten3(|m, nu, l| {
            delta[m][nu][l] + sum1(|k| tval[k][nu] * gamma[m][k][l])
                - sum1(|k| tval[m][k] * gamma[k][nu][l])
        }),
    };
    let vertical = ten3(|a, b, l| tj[a][b].d1(4 + l));
    Ok((horizontal, vertical))
}

#[derive(Debug, Clone)]
pub struct DivergenceReport {
    /// `(G^mu_nu)_{|mu}` per free index `nu`.
    pub div_einstein_h: V4<f64>,
    /// Same contraction for the stress-energy tensor.
    pub div_stress_h: V4<f64>,
    /// Vertical-divergence variants `(G^mu_nu)_{;mu}`, reported with no
    /// promised tolerance.
    pub div_einstein_v: V4<f64>,
    pub div_stress_v: V4<f64>,
    pub einstein_norm: f64,
    pub stress_norm: f64,
}

/// Horizontal covariant divergence of the Einstein and stress-energy
/// tensors with the first index Finsler-raised. This is the most expensive
/// probe in the crate: it differentiates the whole Einstein assembly once
/// more in x and y.
pub fn divergence_probe(
    bg: &ScenarioBackground,
    p: &TangentPoint,
    drop_beta_over_l: bool,
) -> Result<DivergenceReport> {
    let (h_e, v_e) = covariant_derivative(&EinsteinMixed, bg, p)?;
    let stress = StressMixed { drop_beta_over_l };
    let (h_t, v_t) = covariant_derivative(&stress, bg, p)?;
    let div = |h: &T3<f64>| vec4(|nu| sum1(|m| h[m][nu][m]));
    let einstein_norm = max_abs_m4(&einstein_xy(bg, &p.x, &p.y)?);
    let stress_norm = max_abs_m4(&stress_energy_xy(bg, &p.x, &p.y, drop_beta_over_l)?);
    Ok(DivergenceReport {
        div_einstein_h: div(&h_e),
        div_stress_h: div(&h_t),
        div_einstein_v: div(&v_e),
        div_stress_v: div(&v_t),
        einstein_norm,
        stress_norm,
    })
}

/// Everything the connection layer produces at one point.
#[derive(Debug, Clone)]
pub struct ConnectionBundle {
    pub n_connection: M4<f64>,
    pub gamma_chern: T3<f64>,
    pub gamma_finsler: T3<f64>,
    pub gamma_tilde: T3<f64>,
    pub chern_cross_check_gap: f64,
}

pub fn connection_bundle(bg: &ScenarioBackground, p: &TangentPoint) -> Result<ConnectionBundle> {
    let n_connection = nonlinear_connection(bg, p)?;
    let (gamma_chern, gap) = chern_connection(bg, p)?;
    let (_, gamma_finsler) = crate::spray::spray_christoffel(bg, p)?;
    let at = bg.background_at(p.x, 1)?;
    let gamma_tilde = crate::riemann::christoffel_tilde(&at)?;
    Ok(ConnectionBundle {
        n_connection,
        gamma_chern,
        gamma_finsler,
        gamma_tilde,
        chern_cross_check_gap: gap,
    })
}

/// Everything the curvature layer produces at one point.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub r_full: T4<f64>,
    pub r_hv: T3<f64>,
    pub hv_consistency_gap: f64,
    pub r_map: M4<f64>,
    pub ric: f64,
    pub ric_contraction: f64,
    pub ric_route_gap: f64,
    pub ric_tensor: M4<f64>,
    pub s_scalar: f64,
    pub a_cartan: T3<f64>,
    pub lambda: M4<f64>,
    pub einstein: M4<f64>,
    pub einstein_asym: f64,
    pub stress_energy: M4<f64>,
}

pub fn curvature_bundle(
    bg: &ScenarioBackground,
    p: &TangentPoint,
    drop_beta_over_l: bool,
) -> Result<CurvatureBundle> {
    let cr = chern_riemann(bg, p)?;
    let ric = ricci(bg, p)?;
    let eb = lambda_and_einstein(bg, p)?;
    let stress = stress_energy(bg, p, drop_beta_over_l)?;
    Ok(CurvatureBundle {
        r_full: cr.r_full,
        r_hv: cr.r_hv,
        hv_consistency_gap: cr.consistency_gap,
        r_map: ric.r_map,
        ric: ric.ric,
        ric_contraction: ric.ric_contraction,
        ric_route_gap: ric.route_gap,
        ric_tensor: ric.ric_tensor,
        s_scalar: ric.s_scalar,
        a_cartan: eb.a_cartan,
        lambda: eb.lambda,
        einstein: eb.einstein,
        einstein_asym: eb.einstein_asym,
        stress_energy: stress,
    })
}
