//! Riemannian reference computations on the spacetime metric alone:
//! Christoffel symbols, their coordinate derivatives, Riemann and Ricci
//! tensors, all in closed form from [`BackgroundAt`] derivative data.
//! None of this touches the Finsler machinery, which makes it usable as an
//! independent cross-check of the full pipeline in the Riemannian limit.

use crate::background::BackgroundAt;
use crate::error::Result;
use crate::linalg::{inv4, mat4, sum1, ten3, ten4, M4, T3, T4};

/// Spacetime Christoffel symbols
/// `gammatilde^i_{jk} = 1/2 gtilde^{il} (d_j gtilde_{lk} + d_k gtilde_{jl} - d_l gtilde_{jk})`.
pub fn christoffel_tilde(at: &BackgroundAt) -> Result<T3<f64>> {
    let (ginv, _) = inv4(&at.gtilde_val)?;
    let dg = &at.dgtilde;
    Ok(ten3(|i, j, k| {
        0.5 * sum1(|l| ginv[i][l] * (dg[l][k][j] + dg[j][l][k] - dg[j][k][l]))
    }))
}

/// Coordinate derivative `d gammatilde^i_{jk} / dx^s` (needs order >= 2
/// background data).
pub fn dchristoffel_tilde(at: &BackgroundAt) -> Result<T4<f64>> {
    let (ginv, _) = inv4(&at.gtilde_val)?;
    let dg = &at.dgtilde;
    let d2g = &at.d2gtilde;
    // d ginv/dx^s = -ginv . dg/dx^s . ginv
    let dginv = ten3(|i, j, s| {
        -sum1(|a| sum1(|b| ginv[i][a] * dg[a][b][s] * ginv[b][j]))
    });
    Ok(ten4(|i, j, k, s| {
        0.5 * sum1(|l| {
            dginv[i][l][s] * (dg[l][k][j] + dg[j][l][k] - dg[j][k][l])
                + ginv[i][l] * (d2g[l][k][j][s] + d2g[j][l][k][s] - d2g[j][k][l][s])
        })
    }))
}

/// Riemann tensor `Rt^r_{m s n} = d_s Gam^r_{mn} - d_n Gam^r_{ms}
/// + Gam^r_{sl} Gam^l_{mn} - Gam^r_{nl} Gam^l_{ms}`.
pub fn riemann_tensor(at: &BackgroundAt) -> Result<T4<f64>> {
    let gam = christoffel_tilde(at)?;
    let dgam = dchristoffel_tilde(at)?;
    Ok(ten4(|r, m, s, n| {
        dgam[r][m][n][s] - dgam[r][m][s][n]
            + sum1(|l| gam[r][s][l] * gam[l][m][n] - gam[r][n][l] * gam[l][m][s])
    }))
}

/// Ricci tensor `Rt_{mn} = Rt^r_{m r n}`.
pub fn ricci_tilde(at: &BackgroundAt) -> Result<M4<f64>> {
    let riem = riemann_tensor(at)?;
    Ok(mat4(|m, n| sum1(|r| riem[r][m][r][n])))
}
