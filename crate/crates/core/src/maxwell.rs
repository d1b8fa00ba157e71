//! Geometric-field electric/magnetic decomposition, effective charges and
//! currents, generalized Maxwell residuals (flat-derivative form and the
//! Berwald form), the vacuum constraint, and wave-equation sources.
//!
//! Field equations need the velocity closed as a section `y(x)`; every
//! x-derivative below is the total derivative through that section. The
//! sensitivities of the geometric field to the 16 potential-gradient slots
//! are obtained by seeding those slots as independent jet directions in a
//! re-evaluation that takes the gradient matrix as a free input. The
//! geometric field is affine in those slots, so the slots can be seeded in
//! batches of four (alongside the four x-directions) and the mixed
//! x/slot-derivatives are exact.

use crate::background::ScenarioBackground;
use crate::error::{FrError, Result};
use crate::expr::{self, Expr};
use crate::jet::{Jet, JetSpace};
use crate::linalg::{inv4, mat4, max_abs_m4, sum1, sum2, ten3, vec4, M4, V4};
use crate::randers::{finsler_l, fundamental_tensor, TangentPoint};
use crate::scalar::Scalar;
use crate::spray::{berwald_report, decomposed_tensors, geometric_field};

// ---------------------------------------------------------------------------
// Velocity section
// ---------------------------------------------------------------------------

/// Closure of the y-dependence for field equations: either a constant
/// vector (static observer by default) or four expressions of x.
#[derive(Debug, Clone)]
pub enum VelocitySection {
    Constant([f64; 4]),
    Exprs(Box<[Expr; 4]>),
}

impl Default for VelocitySection {
    fn default() -> Self {
        VelocitySection::Constant([1.0, 0.0, 0.0, 0.0])
    }
}

impl VelocitySection {
    pub fn from_sources(
        srcs: [&str; 4],
        params: &[String],
    ) -> std::result::Result<Self, expr::ExprError> {
        let mut out = Vec::with_capacity(4);
        for s in srcs {
            out.push(expr::parse_expr(s, params)?);
        }
        Ok(VelocitySection::Exprs(Box::new(out.try_into().unwrap())))
    }

    pub fn eval<T: Scalar>(&self, x: &[T; 4], params: &[f64]) -> Result<[T; 4]> {
        match self {
            VelocitySection::Constant(c) => Ok(std::array::from_fn(|i| T::from_f64(c[i]))),
            VelocitySection::Exprs(es) => {
                let mut out = Vec::with_capacity(4);
                for (i, e) in es.iter().enumerate() {
                    out.push(expr::eval_expr(e, x, params).map_err(|err| match err {
                        expr::ExprError::Domain(d) => FrError::Eval {
                            component: format!("section[{i}]"),
                            point: [x[0].value(), x[1].value(), x[2].value(), x[3].value()],
                            source: d,
                        },
                        other => FrError::JetConfig {
                            msg: format!("section[{i}]: {other}"),
                        },
                    })?);
                }
                Ok(out.try_into().unwrap())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// E/B decomposition
// ---------------------------------------------------------------------------

/// The ten named slots of a contravariant rank-2 field on the 3+1 split.
/// For an antisymmetric (electromagnetic) tensor, `e_field`/`b_field` are
/// the physical fields and the transposed slots are redundant; for the
/// geometric field all ten carry independent information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricEB {
    /// `E^j = F^{j0}`.
    pub e_field: [f64; 3],
    /// `B = (F^{32}, F^{13}, F^{21})`.
    pub b_field: [f64; 3],
    /// `calE = (F^{01}, F^{02}, F^{03})`.
    pub cal_e: [f64; 3],
    /// `calE^T = (F^{10}, F^{20}, F^{30})`.
    pub cal_e_t: [f64; 3],
    /// `calB = (F^{32}, F^{13}, F^{21})`.
    pub cal_b: [f64; 3],
    /// `calB^T = (F^{23}, F^{31}, F^{12})`.
    pub cal_b_t: [f64; 3],
    /// `F^{00}`.
    pub e00: f64,
    /// `(F^{11}, F^{22}, F^{33})`.
    pub diag: [f64; 3],
}

/// Split a contravariant rank-2 field into the named slots. With
/// `is_geometric` false the input must be antisymmetric.
pub fn eb_decompose(f_up: &M4<f64>, is_geometric: bool) -> Result<GeometricEB> {
    if !is_geometric {
        let asym = max_abs_m4(&mat4(|i, j| f_up[i][j] + f_up[j][i]));
        if asym > 1e-10 {
            return Err(FrError::NonAntisymmetric { asym });
        }
    }
    Ok(GeometricEB {
        e_field: [f_up[1][0], f_up[2][0], f_up[3][0]],
        b_field: [f_up[3][2], f_up[1][3], f_up[2][1]],
        cal_e: [f_up[0][1], f_up[0][2], f_up[0][3]],
        cal_e_t: [f_up[1][0], f_up[2][0], f_up[3][0]],
        cal_b: [f_up[3][2], f_up[1][3], f_up[2][1]],
        cal_b_t: [f_up[2][3], f_up[3][1], f_up[1][2]],
        e00: f_up[0][0],
        diag: [f_up[1][1], f_up[2][2], f_up[3][3]],
    })
}

/// Inverse of [`eb_decompose`]; the slot map is a bijection.
pub fn eb_reassemble(eb: &GeometricEB) -> M4<f64> {
    [
        [eb.e00, eb.cal_e[0], eb.cal_e[1], eb.cal_e[2]],
        [eb.cal_e_t[0], eb.diag[0], eb.cal_b_t[2], eb.cal_b[1]],
        [eb.cal_e_t[1], eb.cal_b[2], eb.diag[1], eb.cal_b_t[0]],
        [eb.cal_e_t[2], eb.cal_b_t[1], eb.cal_b[0], eb.diag[2]],
    ]
}

// ---------------------------------------------------------------------------
// Field maps along a section
// ---------------------------------------------------------------------------

fn raise2<T: Scalar>(ginv: &M4<T>, f: &M4<T>) -> M4<T> {
    mat4(|a, b| sum2(|m, n| ginv[a][m].clone() * ginv[b][n].clone() * f[m][n].clone()))
}

fn seed_x<T: Scalar>(x: &[T; 4], space: JetSpace) -> Result<[Jet<T>; 4]> {
    Ok([
        space.seed(x[0].clone(), 0)?,
        space.seed(x[1].clone(), 1)?,
        space.seed(x[2].clone(), 2)?,
        space.seed(x[3].clone(), 3)?,
    ])
}

/// Contravariant geometric field as a function of x through the section.
pub fn f_geom_up_of_x<T: Scalar>(
    bg: &ScenarioBackground,
    section: &VelocitySection,
    x: &[T; 4],
) -> Result<M4<T>> {
    let y = section.eval(x, bg.param_values())?;
    let f_geom = geometric_field(bg, x, &y, None)?;
    let g = fundamental_tensor(bg, x, &y)?;
    let (ginv, _) = inv4(&g)?;
    Ok(raise2(&ginv, &f_geom))
}

/// Raise the geometric field of a tangent point with the Finsler inverse.
pub fn raise_geometric_field(bg: &ScenarioBackground, p: &TangentPoint) -> Result<M4<f64>> {
    let f_geom = geometric_field(bg, &p.x, &p.y, None)?;
    let g = fundamental_tensor(bg, &p.x, &p.y)?;
    let (ginv, _) = inv4(&g)?;
    Ok(raise2(&ginv, &f_geom))
}

// ---------------------------------------------------------------------------
// Effective sources
// ---------------------------------------------------------------------------

/// Effective charges and currents, generic so the wave-equation sources
/// can differentiate them once more. `rho` is the scenario charge density
/// `J^0` (contravariant).
#[derive(Debug, Clone)]
pub struct SourcesAt<T> {
    pub rho_e: T,
    pub j_e: [T; 3],
    pub j_b: [T; 3],
    pub rho: T,
    pub rho_g: T,
    pub j_g: [T; 3],
}

fn sum_3<T: Scalar>(mut f: impl FnMut(usize) -> T) -> T {
    f(0) + f(1) + f(2)
}

pub fn effective_sources_xy<T: Scalar>(
    bg: &ScenarioBackground,
    section: &VelocitySection,
    x: &[T; 4],
) -> Result<SourcesAt<T>> {
    let space = JetSpace::new(4, 1)?;
    let xj = seed_x(x, space)?;
    let f = f_geom_up_of_x(bg, section, &xj)?;
    // spatial coordinates are jet directions 1..3, tau is direction 0
    let cal_e = |j: usize| f[0][j + 1].clone();
    let cal_e_t = |j: usize| f[j + 1][0].clone();
    let cal_b: [Jet<T>; 3] = [f[3][2].clone(), f[1][3].clone(), f[2][1].clone()];
    let cal_b_t: [Jet<T>; 3] = [f[2][3].clone(), f[3][1].clone(), f[1][2].clone()];

    let rho_e = sum_3(|j| (cal_e_t(j) - cal_e(j)).d1(j + 1)).scale(0.5);
    let j_e: [T; 3] = std::array::from_fn(|j| (cal_e(j) - cal_e_t(j)).d1(0).scale(0.5));
    let diff_b: [Jet<T>; 3] = std::array::from_fn(|j| cal_b_t[j].clone() - cal_b[j].clone());
    let curl = |v: &[Jet<T>; 3], a: usize| -> T {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        v[c].d1(b + 1) - v[b].d1(c + 1)
    };
    let j_b: [T; 3] = std::array::from_fn(|a| curl(&diff_b, a).scale(0.5));

    let j_scen = bg.current_at(x)?;
    let rho = j_scen[0].clone();
    let rho_g = rho.clone() + rho_e.clone();
    let j_g: [T; 3] =
        std::array::from_fn(|a| j_scen[a + 1].clone() + j_e[a].clone() + j_b[a].clone());
    Ok(SourcesAt {
        rho_e,
        j_e,
        j_b,
        rho,
        rho_g,
        j_g,
    })
}

pub fn effective_sources(
    bg: &ScenarioBackground,
    section: &VelocitySection,
    x: [f64; 4],
) -> Result<SourcesAt<f64>> {
    effective_sources_xy(bg, section, &x)
}

// ---------------------------------------------------------------------------
// Maxwell residuals
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Default)]
pub struct MaxwellOptions {
    /// Use `e F` instead of `e (1 - beta/L) F` in the total field.
    pub drop_beta_over_l: bool,
    /// Classical oracle mode: spacetime-metric raising, geometric terms off.
    pub classical_em: bool,
    /// Replace the plain x-derivatives of the two leading terms by the
    /// horizontal covariant derivative (Chern connection corrections).
    pub connection_corrected: bool,
}

#[derive(Debug, Clone)]
pub struct MaxwellResidual {
    /// Residual of the sourced equation (left side minus `J^mu`).
    pub source_eq: V4<f64>,
    /// Bianchi residual for the four distinct index triples of
    /// `d_lambda F_{mu nu} + d_nu F_{lambda mu} + d_mu F_{nu lambda}`.
    pub bianchi: V4<f64>,
}

/// `u[rho][sigma][nu][mu] = d F^G_{rho sigma} / d(d_nu A_mu)` and the
/// contracted mixed derivative
/// `du[rho][sigma][nu][mu] = d^2 F^G_{rho sigma} / dx^nu d(d_nu A_mu)`
/// (x-direction equal to the slot's first index, which is how the sourced
/// equation contracts it).
struct GradientSensitivity {
    u: [[M4<f64>; 4]; 4],
    du: [[M4<f64>; 4]; 4],
}

fn gradient_sensitivity(
    bg: &ScenarioBackground,
    section: &VelocitySection,
    x: [f64; 4],
) -> Result<GradientSensitivity> {
    let mut u = [[[[0.0; 4]; 4]; 4]; 4];
    let mut du = [[[[0.0; 4]; 4]; 4]; 4];
    let at = bg.background_at(x, 1)?;
    for batch in 0..4 {
        let space = JetSpace::new(8, 2)?;
        let xj = seed_x(&x, space)?;
        // w[nu][mu] = d_nu A_mu, held at its point value except for the
        // four slots this batch seeds
        let mut w: M4<Jet<f64>> = mat4(|nu, mu| Jet::constant(at.da[mu][nu]));
        for k in 0..4 {
            let s = 4 * batch + k;
            let (nu, mu) = (s / 4, s % 4);
            w[nu][mu] = space.seed(at.da[mu][nu], 4 + k)?;
        }
        let da_override = mat4(|mu, nu| w[nu][mu].clone());
        let y = section.eval(&xj, bg.param_values())?;
        let fg = geometric_field(bg, &xj, &y, Some(&da_override))?;
        for k in 0..4 {
            let s = 4 * batch + k;
            let (nu, mu) = (s / 4, s % 4);
            for r in 0..4 {
                for c in 0..4 {
                    u[r][c][nu][mu] = fg[r][c].d1(4 + k);
                    du[r][c][nu][mu] = fg[r][c].d2(nu, 4 + k);
                }
            }
        }
    }
    Ok(GradientSensitivity { u, du })
}

/// Values and first x-derivatives (through the section) of the raised and
/// lowered fields entering the sourced equation.
struct FieldJets {
    f_em_up: M4<Jet<f64>>,
    fg_low: M4<Jet<f64>>,
    fg_up: M4<Jet<f64>>,
    ftot_low: M4<Jet<f64>>,
    ftot_up: M4<Jet<f64>>,
    ginv: M4<f64>,
}

fn field_jets(
    bg: &ScenarioBackground,
    section: &VelocitySection,
    x: [f64; 4],
    opts: &MaxwellOptions,
) -> Result<FieldJets> {
    let space = JetSpace::new(4, 1)?;
    let xj = seed_x(&x, space)?;
    let y = section.eval(&xj, bg.param_values())?;
    let t = decomposed_tensors(bg, &xj, &y, None)?;
    let fg_low = geometric_field(bg, &xj, &y, None)?;
    let g = fundamental_tensor(bg, &xj, &y)?;
    let (ginv_j, _) = inv4(&g)?;
    let em_factor: Jet<f64> = if opts.drop_beta_over_l {
        Jet::constant(bg.e)
    } else {
        // e (1 - beta/L) = e alpha/L
        let gt = bg.gtilde_at(&xj)?;
        let a2 = sum2(|i, j| gt[i][j].clone() * y[i].clone() * y[j].clone());
        let alpha = a2.try_sqrt()?.scale(bg.m);
        let l = finsler_l(bg, &xj, &y)?;
        alpha.try_div(&l)?.scale(bg.e)
    };
    let ftot_low = mat4(|m, n| em_factor.clone() * t.f_em[m][n].clone() + fg_low[m][n].clone());
    let ftot_up = raise2(&ginv_j, &ftot_low);
    let f_em_up = raise2(&ginv_j, &t.f_em);
    let fg_up = raise2(&ginv_j, &fg_low);
    Ok(FieldJets {
        f_em_up,
        fg_low,
        fg_up,
        ftot_low,
        ftot_up,
        ginv: mat4(|i, j| ginv_j[i][j].coeff_multi(&[])),
    })
}

/// Bianchi residual of the potential-derived field (raising-free).
pub fn bianchi_residual(bg: &ScenarioBackground, x: [f64; 4]) -> Result<V4<f64>> {
    let space = JetSpace::new(4, 2)?;
    let xj = seed_x(&x, space)?;
    let a = bg.potential_at(&xj)?;
    // d_lambda F_{mu nu} = d_lambda d_mu A_nu - d_lambda d_nu A_mu
    let d = |la: usize, mu: usize, nu: usize| a[nu].d2(mu, la) - a[mu].d2(nu, la);
    let triples = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)];
    Ok(vec4(|k| {
        let (l, m, n) = triples[k];
        d(l, m, n) + d(n, l, m) + d(m, n, l)
    }))
}

/// Residual of the sourced generalized Maxwell equation at `x`, with the
/// section closing the velocity dependence. In `classical_em` mode the
/// geometric terms are dropped and the field is raised with the spacetime
/// metric (the classical oracle); otherwise all raising uses the Finsler
/// inverse.
pub fn maxwell_residual(
    bg: &ScenarioBackground,
    section: &VelocitySection,
    x: [f64; 4],
    opts: &MaxwellOptions,
) -> Result<MaxwellResidual> {
    let bianchi = bianchi_residual(bg, x)?;
    let j_scen = bg.current_at(&x)?;

    if opts.classical_em {
        // d_nu (gtilde^{mu a} gtilde^{nu b} F_{ab}) - J^mu via nested jets:
        // the inner level provides dA for F, the outer level the divergence.
        let outer = JetSpace::new(4, 1)?;
        let xj = seed_x(&x, outer)?;
        let inner = JetSpace::new(4, 1)?;
        let xjj: [Jet<Jet<f64>>; 4] = [
            inner.seed(xj[0].clone(), 0)?,
            inner.seed(xj[1].clone(), 1)?,
            inner.seed(xj[2].clone(), 2)?,
            inner.seed(xj[3].clone(), 3)?,
        ];
        let a = bg.potential_at(&xjj)?;
        let f_low: M4<Jet<f64>> = mat4(|mu, nu| a[nu].d1(mu) - a[mu].d1(nu));
        let gt = bg.gtilde_at(&xj)?;
        let (gtinv, _) = inv4(&gt)?;
        let f_up = raise2(&gtinv, &f_low);
        let source_eq = vec4(|mu| sum1(|nu| f_up[mu][nu].d1(nu)) - j_scen[mu]);
        return Ok(MaxwellResidual { source_eq, bianchi });
    }

    let fj = field_jets(bg, section, x, opts)?;
    let sens = gradient_sensitivity(bg, section, x)?;
    let dval = |m: &M4<Jet<f64>>, a: usize, b: usize, nu: usize| m[a][b].d1(nu);
    let val = |m: &M4<Jet<f64>>, a: usize, b: usize| m[a][b].coeff_multi(&[]);

    let lead = if opts.connection_corrected {
        connection_corrected_lead(bg, section, x)?
    } else {
        vec4(|mu| {
            sum1(|nu| dval(&fj.f_em_up, mu, nu, nu))
                + sum1(|nu| 0.5 * (dval(&fj.fg_up, mu, nu, nu) - dval(&fj.fg_up, nu, mu, nu)))
        })
    };

    let u_up = |r: usize, s: usize, nu: usize, mu: usize| -> f64 {
        sum2(|a, b| fj.ginv[r][a] * fj.ginv[s][b] * sens.u[a][b][nu][mu])
    };
    let coupling1 = vec4(|mu| {
        sum2(|r, s| val(&fj.ftot_up, r, s) * sum1(|nu| sens.du[r][s][nu][mu]))
    });
    let coupling2 = vec4(|mu| {
        sum2(|r, s| {
            sum1(|nu| {
                dval(&fj.ftot_up, r, s, nu) * sens.u[r][s][nu][mu]
                    + dval(&fj.ftot_low, r, s, nu) * u_up(r, s, nu, mu)
            })
        })
    });

    let source_eq =
        vec4(|mu| lead[mu] - 0.5 * coupling1[mu] - 0.25 * coupling2[mu] - j_scen[mu]);
    Ok(MaxwellResidual { source_eq, bianchi })
}

/// Covariant-derivative variant of the two leading terms:
/// `nabla_nu (F^{mu nu} + F^{G[mu nu]})` with
/// `nabla_nu X^{mu nu} = delta X^{mu nu}/delta x^nu
///  + X^{kappa nu} Gamma^mu_{kappa nu} + X^{mu kappa} Gamma^nu_{kappa nu}`.
fn connection_corrected_lead(
    bg: &ScenarioBackground,
    section: &VelocitySection,
    x: [f64; 4],
) -> Result<V4<f64>> {
    let y4 = section.eval(&x, bg.param_values())?;
    let p = TangentPoint::new(x, y4);
    let space = JetSpace::new(8, 1)?;
    let xj = seed_x(&x, space)?;
    let yj: [Jet<f64>; 4] = [
        space.seed(p.y[0], 4)?,
        space.seed(p.y[1], 5)?,
        space.seed(p.y[2], 6)?,
        space.seed(p.y[3], 7)?,
    ];
    let t = decomposed_tensors(bg, &xj, &yj, None)?;
    let fg_low = geometric_field(bg, &xj, &yj, None)?;
    let g = fundamental_tensor(bg, &xj, &yj)?;
    let (ginv, _) = inv4(&g)?;
    let f_em_up = raise2(&ginv, &t.f_em);
    let fg_up = raise2(&ginv, &fg_low);
    let total = mat4(|m, n| {
        f_em_up[m][n].clone() + (fg_up[m][n].clone() - fg_up[n][m].clone()).scale(0.5)
    });
    let n_conn = crate::curvature::nonlinear_connection_xy(bg, &p.x, &p.y)?;
    let gamma = crate::curvature::chern_gamma_xy(bg, &p.x, &p.y)?;
    let tval = mat4(|m, n| total[m][n].coeff_multi(&[]));
    let delta = |m: usize, n: usize, l: usize| -> f64 {
        total[m][n].d1(l) - sum1(|s| n_conn[s][l] * total[m][n].d1(4 + s))
    };
    Ok(vec4(|mu| {
        sum1(|nu| {
            delta(mu, nu, nu)
                + sum1(|k| tval[k][nu] * gamma[mu][k][nu])
                + sum1(|k| tval[mu][k] * gamma[nu][k][nu])
        })
    }))
}

// ---------------------------------------------------------------------------
// Vacuum constraint
// ---------------------------------------------------------------------------

/// Vacuum generalized-Maxwell constraint, evaluated literally with the
/// velocity rescaled so `L = 1`. The constraint itself is the
/// `nu`-contraction of the returned matrix; entry `[nu][mu]` holds the
/// `nu`-th summand
/// `y^k g^{nu rho} g^{mu sigma} (gt_{rho k, nu sigma} - gt_{sigma k, nu rho})
///  + y^k (gt_{rho k, sigma} - gt_{sigma k, rho}) d(g^{nu rho} g^{mu sigma})/dx^nu`
/// with no sum over `nu`.
pub fn vacuum_constraint_residual(bg: &ScenarioBackground, p: &TangentPoint) -> Result<M4<f64>> {
    let a = bg.potential_at(&p.x)?;
    let a_max = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if a_max > 0.0 {
        return Err(FrError::NotVacuum { a_max });
    }
    let (l, ..) = crate::randers::finsler_function(bg, p)?;
    let y = vec4(|i| p.y[i] / l);
    let ps = TangentPoint::new(p.x, y);

    let at = bg.background_at(p.x, 2)?;
    let space = JetSpace::new(8, 3)?;
    let xj = seed_x(&ps.x, space)?;
    let yj: [Jet<f64>; 4] = [
        space.seed(ps.y[0], 4)?,
        space.seed(ps.y[1], 5)?,
        space.seed(ps.y[2], 6)?,
        space.seed(ps.y[3], 7)?,
    ];
    let f2 = crate::randers::finsler_squared(bg, &xj, &yj)?;
    let g = mat4(|i, j| 0.5 * f2.d2(4 + i, 4 + j));
    let (ginv, _) = inv4(&g)?;
    let dg = ten3(|i, j, s| 0.5 * f2.d3(4 + i, 4 + j, s));
    let dginv = ten3(|i, j, s| -sum2(|a2, b| ginv[i][a2] * dg[a2][b][s] * ginv[b][j]));

    let dgt = &at.dgtilde;
    let d2gt = &at.d2gtilde;
    Ok(mat4(|nu, mu| {
        let term1 = sum2(|rho, sigma| {
            ginv[nu][rho]
                * ginv[mu][sigma]
                * sum1(|k| ps.y[k] * (d2gt[rho][k][nu][sigma] - d2gt[sigma][k][nu][rho]))
        });
        let term2 = sum2(|rho, sigma| {
            let dprod =
                dginv[nu][rho][nu] * ginv[mu][sigma] + ginv[nu][rho] * dginv[mu][sigma][nu];
            dprod * sum1(|k| ps.y[k] * (dgt[rho][k][sigma] - dgt[sigma][k][rho]))
        });
        term1 + term2
    }))
}

// ---------------------------------------------------------------------------
// Berwald-space Maxwell residual
// ---------------------------------------------------------------------------

/// Sourced equation restricted to the Berwald subspace, where the
/// electromagnetic field vanishes and only the geometric field remains.
pub fn berwald_maxwell_residual(
    bg: &ScenarioBackground,
    section: &VelocitySection,
    x: [f64; 4],
    opts: &MaxwellOptions,
) -> Result<V4<f64>> {
    let y = section.eval(&x, bg.param_values())?;
    let p = TangentPoint::new(x, y);
    let rep = berwald_report(bg, &p)?;
    if !rep.is_berwald {
        return Err(FrError::NotBerwald {
            b_max: max_abs_m4(&rep.b_cov),
        });
    }
    let fj = field_jets(bg, section, x, opts)?;
    let sens = gradient_sensitivity(bg, section, x)?;
    let j_scen = bg.current_at(&x)?;
    let dval = |m: &M4<Jet<f64>>, a: usize, b: usize, nu: usize| m[a][b].d1(nu);
    let val = |m: &M4<Jet<f64>>, a: usize, b: usize| m[a][b].coeff_multi(&[]);
    let u_up = |r: usize, s: usize, nu: usize, mu: usize| -> f64 {
        sum2(|a, b| fj.ginv[r][a] * fj.ginv[s][b] * sens.u[a][b][nu][mu])
    };
    Ok(vec4(|mu| {
        let lead =
            sum1(|nu| 0.5 * (dval(&fj.fg_up, mu, nu, nu) - dval(&fj.fg_up, nu, mu, nu)));
        let coupling1 =
            sum2(|r, s| val(&fj.fg_up, r, s) * sum1(|nu| sens.du[r][s][nu][mu]));
        let coupling2 = sum2(|r, s| {
            sum1(|nu| {
                dval(&fj.fg_up, r, s, nu) * sens.u[r][s][nu][mu]
                    + dval(&fj.fg_low, r, s, nu) * u_up(r, s, nu, mu)
            })
        });
        lead - 0.5 * coupling1 - 0.25 * coupling2 - j_scen[mu]
    }))
}

// ---------------------------------------------------------------------------
// Wave-equation sources and gauge residuals
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct WaveSources {
    /// Right side of the E wave equation, `d J^G/dtau + grad rho^G`.
    pub rhs_e: [f64; 3],
    /// Right side of the B wave equation, `-curl J^G`.
    pub rhs_b: [f64; 3],
    /// Conservation residuals: the time slot is the continuity expression
    /// `d rho^G/dtau + div J^G`, the spatial slots repeat `rhs_e`.
    pub gauge_vec4: [f64; 4],
    /// Curl gauge condition `curl J^G`.
    pub gauge_curl: [f64; 3],
}

pub fn wave_sources(
    bg: &ScenarioBackground,
    section: &VelocitySection,
    x: [f64; 4],
) -> Result<WaveSources> {
    let space = JetSpace::new(4, 1)?;
    let xj = seed_x(&x, space)?;
    let s = effective_sources_xy(bg, section, &xj)?;
    let rhs_e: [f64; 3] = std::array::from_fn(|a| s.j_g[a].d1(0) + s.rho_g.d1(a + 1));
    let curl = |v: &[Jet<f64>; 3], a: usize| -> f64 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        v[c].d1(b + 1) - v[b].d1(c + 1)
    };
    let gauge_curl: [f64; 3] = std::array::from_fn(|a| curl(&s.j_g, a));
    let rhs_b: [f64; 3] = std::array::from_fn(|a| -gauge_curl[a]);
    let continuity = s.rho_g.d1(0) + sum_3(|a| s.j_g[a].d1(a + 1));
    Ok(WaveSources {
        rhs_e,
        rhs_b,
        gauge_vec4: [continuity, rhs_e[0], rhs_e[1], rhs_e[2]],
        gauge_curl,
    })
}
