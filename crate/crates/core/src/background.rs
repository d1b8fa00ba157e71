//! Spacetime background: analytic metric, electromagnetic potential,
//! constants and source current, with exact coordinate derivatives to
//! order 3 obtained by evaluating the defining expressions on jets.

use crate::error::{FrError, Result};
use crate::expr::{self, Expr};
use crate::jet::{Jet, JetSpace};
use crate::linalg::{mat4, sym_eigenvalues, vec4, M4, T3, T4, T5, V4};
use crate::scalar::Scalar;

/// Upper-triangle storage order for the 10 independent metric entries.
pub const SYM_INDEX: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

pub(crate) fn sym_slot(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    SYM_INDEX.iter().position(|&p| p == (a, b)).unwrap()
}

/// Analytic scenario background. Immutable after construction; every
/// evaluation is pure.
#[derive(Debug, Clone)]
pub struct ScenarioBackground {
    /// Upper triangle of the spacetime metric, signature (+,-,-,-).
    gtilde: [Expr; 10],
    /// Electromagnetic 4-potential A_mu (geometric units, c = 1).
    a_pot: [Expr; 4],
    /// Source current J^mu.
    current: [Expr; 4],
    /// Particle mass, > 0.
    pub m: f64,
    /// Particle charge.
    pub e: f64,
    /// Gravitational coupling, > 0.
    pub kappa: f64,
    param_names: Vec<String>,
    param_values: Vec<f64>,
}

const ZERO4: [&str; 4] = ["0", "0", "0", "0"];

impl ScenarioBackground {
    /// Fully general background from expression sources. `gtilde_upper`
    /// follows [`SYM_INDEX`] order.
    pub fn from_sources(
        gtilde_upper: [&str; 10],
        a_pot: [&str; 4],
        current: [&str; 4],
        m: f64,
        e: f64,
        kappa: f64,
        params: &[(String, f64)],
    ) -> std::result::Result<Self, expr::ExprError> {
        let names: Vec<String> = params.iter().map(|(n, _)| n.clone()).collect();
        let values: Vec<f64> = params.iter().map(|(_, v)| *v).collect();
        let parse10 = |srcs: [&str; 10]| -> std::result::Result<[Expr; 10], expr::ExprError> {
            let mut out = Vec::with_capacity(10);
            for s in srcs {
                out.push(expr::parse_expr(s, &names)?);
            }
            Ok(out.try_into().unwrap())
        };
        let parse4 = |srcs: [&str; 4]| -> std::result::Result<[Expr; 4], expr::ExprError> {
            let mut out = Vec::with_capacity(4);
            for s in srcs {
                out.push(expr::parse_expr(s, &names)?);
            }
            Ok(out.try_into().unwrap())
        };
        Ok(ScenarioBackground {
            gtilde: parse10(gtilde_upper)?,
            a_pot: parse4(a_pot)?,
            current: parse4(current)?,
            m,
            e,
            kappa,
            param_names: names,
            param_values: values,
        })
    }

    /// Catalog entry: flat spacetime, zero potential and current.
    pub fn minkowski(m: f64, e: f64, kappa: f64) -> Self {
        Self::from_sources(
            ["1", "0", "0", "0", "-1", "0", "0", "-1", "0", "-1"],
            ZERO4,
            ZERO4,
            m,
            e,
            kappa,
            &[],
        )
        .expect("static sources parse")
    }

    /// Catalog entry: diagonal weak field
    /// `diag(1 + 2 Phi, -(1 - 2 Phi), -(1 - 2 Phi), -(1 - 2 Phi))`
    /// for a user-supplied potential expression `Phi(x)`.
    pub fn weak_field(
        phi: &str,
        m: f64,
        e: f64,
        kappa: f64,
        params: &[(String, f64)],
    ) -> std::result::Result<Self, expr::ExprError> {
        let g00 = format!("1 + 2*({phi})");
        let gii = format!("-(1 - 2*({phi}))");
        Self::from_sources(
            [&g00, "0", "0", "0", &gii, "0", "0", &gii, "0", &gii],
            ZERO4,
            ZERO4,
            m,
            e,
            kappa,
            params,
        )
    }

    pub fn with_potential(mut self, a_pot: [&str; 4]) -> std::result::Result<Self, expr::ExprError> {
        let mut out = Vec::with_capacity(4);
        for s in a_pot {
            out.push(expr::parse_expr(s, &self.param_names)?);
        }
        self.a_pot = out.try_into().unwrap();
        Ok(self)
    }

    pub fn with_current(mut self, current: [&str; 4]) -> std::result::Result<Self, expr::ExprError> {
        let mut out = Vec::with_capacity(4);
        for s in current {
            out.push(expr::parse_expr(s, &self.param_names)?);
        }
        self.current = out.try_into().unwrap();
        Ok(self)
    }

    pub fn param_names(&self) -> &[String] {
        &self.param_names
    }
    pub fn param_values(&self) -> &[f64] {
        &self.param_values
    }
    pub fn gtilde_exprs(&self) -> &[Expr; 10] {
        &self.gtilde
    }
    pub fn potential_exprs(&self) -> &[Expr; 4] {
        &self.a_pot
    }
    pub fn current_exprs(&self) -> &[Expr; 4] {
        &self.current
    }

    /// True when every potential component is the literal 0.
    pub fn potential_is_zero(&self) -> bool {
        self.a_pot.iter().all(|e| e.is_zero_literal())
    }

    fn eval_component<T: Scalar>(&self, e: &Expr, name: &str, x: &[T; 4]) -> Result<T> {
        expr::eval_expr(e, x, &self.param_values).map_err(|err| match err {
            expr::ExprError::Domain(d) => FrError::Eval {
                component: name.to_string(),
                point: [x[0].value(), x[1].value(), x[2].value(), x[3].value()],
                source: d,
            },
            other => FrError::JetConfig {
                msg: format!("expression `{name}`: {other}"),
            },
        })
    }

    /// Metric value at a (possibly jet-valued) point.
    pub fn gtilde_at<T: Scalar>(&self, x: &[T; 4]) -> Result<M4<T>> {
        let mut tri: Vec<T> = Vec::with_capacity(10);
        for (k, e) in self.gtilde.iter().enumerate() {
            let (i, j) = SYM_INDEX[k];
            tri.push(self.eval_component(e, &format!("gtilde[{i}][{j}]"), x)?);
        }
        Ok(mat4(|i, j| tri[sym_slot(i, j)].clone()))
    }

    pub fn potential_at<T: Scalar>(&self, x: &[T; 4]) -> Result<V4<T>> {
        let mut out: Vec<T> = Vec::with_capacity(4);
        for (i, e) in self.a_pot.iter().enumerate() {
            out.push(self.eval_component(e, &format!("A[{i}]"), x)?);
        }
        Ok(out.try_into().unwrap())
    }

    pub fn current_at<T: Scalar>(&self, x: &[T; 4]) -> Result<V4<T>> {
        let mut out: Vec<T> = Vec::with_capacity(4);
        for (i, e) in self.current.iter().enumerate() {
            out.push(self.eval_component(e, &format!("J[{i}]"), x)?);
        }
        Ok(out.try_into().unwrap())
    }

    /// Values and coordinate derivatives of all fields at `x`, to the
    /// requested order (0..=3).
    pub fn background_at(&self, x: [f64; 4], order: usize) -> Result<BackgroundAt> {
        if order > 3 {
            return Err(FrError::JetConfig {
                msg: format!("background derivative order {order} not in 0..=3"),
            });
        }
        if order == 0 {
            let gtilde_val = self.gtilde_at(&x)?;
            let a_val = self.potential_at(&x)?;
            let j_val = self.current_at(&x)?;
            return Ok(BackgroundAt {
                x,
                order,
                gtilde_val,
                dgtilde: [[[0.0; 4]; 4]; 4],
                d2gtilde: [[[[0.0; 4]; 4]; 4]; 4],
                d3gtilde: None,
                a_val,
                da: [[0.0; 4]; 4],
                d2a: [[[0.0; 4]; 4]; 4],
                j_val,
            });
        }
        let space = JetSpace::new(4, order)?;
        let xj: [Jet<f64>; 4] = [
            space.seed(x[0], 0)?,
            space.seed(x[1], 1)?,
            space.seed(x[2], 2)?,
            space.seed(x[3], 3)?,
        ];
        let g = self.gtilde_at(&xj)?;
        let a = self.potential_at(&xj)?;
        let j = self.current_at(&xj)?;
        let gtilde_val = mat4(|i, k| g[i][k].value());
        let dgtilde = std::array::from_fn(|i| {
            std::array::from_fn(|k| std::array::from_fn(|s| g[i][k].d1(s)))
        });
        let d2gtilde = if order >= 2 {
            std::array::from_fn(|i| {
                std::array::from_fn(|k| {
                    std::array::from_fn(|s| std::array::from_fn(|r| g[i][k].d2(s, r)))
                })
            })
        } else {
            [[[[0.0; 4]; 4]; 4]; 4]
        };
        let d3gtilde = if order >= 3 {
            Some(Box::new(std::array::from_fn(|i| {
                std::array::from_fn(|k| {
                    std::array::from_fn(|s| {
                        std::array::from_fn(|r| std::array::from_fn(|t| g[i][k].d3(s, r, t)))
                    })
                })
            })))
        } else {
            None
        };
        let a_val = vec4(|i| a[i].value());
        let da = mat4(|i, s| a[i].d1(s));
        let d2a = if order >= 2 {
            std::array::from_fn(|i| {
                std::array::from_fn(|s| std::array::from_fn(|r| a[i].d2(s, r)))
            })
        } else {
            [[[0.0; 4]; 4]; 4]
        };
        Ok(BackgroundAt {
            x,
            order,
            gtilde_val,
            dgtilde,
            d2gtilde,
            d3gtilde,
            a_val,
            da,
            d2a,
            j_val: vec4(|i| j[i].value()),
        })
    }

    /// Eigenvalue signs of the spacetime metric at `x`, sorted descending.
    pub fn signature_check(&self, x: [f64; 4]) -> Result<SignatureReport> {
        let g = self.gtilde_at(&x)?;
        let eigenvalues = sym_eigenvalues(&g);
        for &ev in &eigenvalues {
            if ev.abs() < 1e-12 {
                return Err(FrError::DegenerateMetric { eig: ev.abs() });
            }
        }
        let signs = std::array::from_fn(|k| if eigenvalues[k] > 0.0 { 1i8 } else { -1i8 });
        Ok(SignatureReport { eigenvalues, signs })
    }

    /// True when the signature at `x` is (+,-,-,-).
    pub fn lorentzian_at(&self, x: [f64; 4]) -> Result<bool> {
        Ok(self.signature_check(x)?.signs == [1, -1, -1, -1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignatureReport {
    pub eigenvalues: [f64; 4],
    pub signs: [i8; 4],
}

/// Point data: field values and their coordinate derivatives.
/// Derivative index conventions: `dgtilde[mu][nu][sigma]` is
/// `d gtilde_{mu nu} / dx^sigma`, `da[mu][nu]` is `d A_mu / dx^nu`, and
/// higher orders append derivative indices on the right.
#[derive(Debug, Clone)]
pub struct BackgroundAt {
    pub x: [f64; 4],
    pub order: usize,
    pub gtilde_val: M4<f64>,
    pub dgtilde: T3<f64>,
    pub d2gtilde: T4<f64>,
    pub d3gtilde: Option<Box<T5<f64>>>,
    pub a_val: V4<f64>,
    pub da: M4<f64>,
    pub d2a: T3<f64>,
    pub j_val: V4<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minkowski_constant_everywhere() {
        let bg = ScenarioBackground::minkowski(1.0, 1.0, 1.0);
        let mut rng = 0x12345u64;
        let mut next = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((rng >> 33) as f64) / (u32::MAX as f64) * 4.0 - 2.0
        };
        for _ in 0..100 {
            let x = [next(), next(), next(), next()];
            let at = bg.background_at(x, 2).unwrap();
            assert_eq!(at.gtilde_val[0][0], 1.0);
            assert_eq!(at.gtilde_val[1][1], -1.0);
            for m in 0..4 {
                for n in 0..4 {
                    for s in 0..4 {
                        assert_eq!(at.dgtilde[m][n][s], 0.0);
                        for r in 0..4 {
                            assert_eq!(at.d2gtilde[m][n][s][r], 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn linear_potential_gradient() {
        let bg = ScenarioBackground::minkowski(1.0, 1.0, 1.0)
            .with_potential(["0.5*x1", "0", "0", "0"])
            .unwrap();
        let at = bg.background_at([0.2, 1.3, -0.4, 2.0], 1).unwrap();
        assert_eq!(at.da[0][1], 0.5);
        for m in 0..4 {
            for n in 0..4 {
                if (m, n) != (0, 1) {
                    assert_eq!(at.da[m][n], 0.0);
                }
            }
        }
    }

    #[test]
    fn weak_field_second_derivative_matches_hand_oracle() {
        // gtilde_00 = 1 + 2 eps sin(x1): d2/dx1^2 = -2 eps sin(x1)
        let eps = 0.01;
        let bg = ScenarioBackground::weak_field(
            "eps*sin(x1)",
            1.0,
            1.0,
            1.0,
            &[("eps".to_string(), eps)],
        )
        .unwrap();
        let x = [0.0, 0.7, 0.0, 0.0];
        let at = bg.background_at(x, 2).unwrap();
        let want = -2.0 * eps * x[1].sin();
        assert!((at.d2gtilde[0][0][1][1] - want).abs() < 1e-15);
    }

    #[test]
    fn signature_reports() {
        let bg = ScenarioBackground::minkowski(1.0, 1.0, 1.0);
        let rep = bg.signature_check([0.0; 4]).unwrap();
        assert_eq!(rep.signs, [1, -1, -1, -1]);

        let weak = ScenarioBackground::weak_field(
            "0.05*sin(x1)",
            1.0,
            1.0,
            1.0,
            &[],
        )
        .unwrap();
        assert!(weak.lorentzian_at([0.1, 0.9, 0.0, 0.0]).unwrap());

        let degenerate = ScenarioBackground::from_sources(
            ["0", "0", "0", "0", "0", "0", "0", "0", "0", "0"],
            ZERO4,
            ZERO4,
            1.0,
            1.0,
            1.0,
            &[],
        )
        .unwrap();
        assert!(matches!(
            degenerate.signature_check([0.0; 4]),
            Err(FrError::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn background_orders_agree_on_shared_slots() {
        let bg = ScenarioBackground::weak_field(
            "0.01*sin(x1)*cos(x2)",
            1.0,
            1.0,
            1.0,
            &[],
        )
        .unwrap()
        .with_potential(["0.02*cos(x1)", "0.01*sin(x2)", "0", "0"])
        .unwrap();
        let x = [0.1, 0.6, -0.3, 0.8];
        let k1 = bg.background_at(x, 1).unwrap();
        let k2 = bg.background_at(x, 2).unwrap();
        let k3 = bg.background_at(x, 3).unwrap();
        for m in 0..4 {
            for n in 0..4 {
                assert_eq!(k1.gtilde_val[m][n], k2.gtilde_val[m][n]);
                for s in 0..4 {
                    assert_eq!(k1.dgtilde[m][n][s], k2.dgtilde[m][n][s]);
                    assert_eq!(k2.dgtilde[m][n][s], k3.dgtilde[m][n][s]);
                    for r in 0..4 {
                        assert_eq!(k2.d2gtilde[m][n][s][r], k3.d2gtilde[m][n][s][r]);
                    }
                }
            }
        }
    }
}
