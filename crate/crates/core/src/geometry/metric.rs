//! The induced metric, its defining Hessian decomposition, the norm identity
//! for the differential of the norm-square function, the primitive
//! (d-boundedness) check, and the potential-route norm of a tangent vector.

use num_complex::Complex64;

use super::{point_data, scalar_g_jet, GeometryError};
use crate::catalog::{ModelBundle, PointState};
use crate::jet::Jet;
use crate::linalg::CMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// All tensors at a point expressed in the frame `{dz^a, delta v^i}`.
#[derive(Clone, Debug)]
pub struct FrameReport {
    pub point: PointState,
    /// Chern curvature `R_{i jb a bb}`, indices `[i][j][a][b]`.
    pub r_tensor: super::Tensor4,
    /// `Psi_{a bb} = -R_{i jb a bb} v^i vb^j`.
    pub psi: CMatrix,
    /// Horizontal block `Omega_{a bb} = g_{a bb} + Psi_{a bb}`.
    pub omega_h: CMatrix,
    /// Vertical block `G_{i jb}`.
    pub omega_v: CMatrix,
    /// `connection[i][a]`: coefficient of `dz^a` in `delta v^i`.
    pub connection: Vec<Vec<Complex64>>,
    /// Whether the horizontal block is positive definite at this point (it
    /// must be for Griffiths-negative models; the positive counterexample
    /// loses definiteness at large fiber norm).
    pub omega_h_positive: bool,
}

/// Assemble the induced metric blocks at a point.
pub fn induced_metric(m: &ModelBundle, p: &PointState) -> Result<FrameReport, GeometryError> {
    let pd = point_data(m, p)?;
    Ok(FrameReport {
        point: p.clone(),
        r_tensor: pd.r_tensor,
        psi: pd.psi_mat,
        omega_h: pd.omega_h,
        omega_v: pd.gg_vals,
        connection: pd.connection,
        omega_h_positive: pd.omega_h_positive,
    })
}

/// The complex Hessian of the scalar `G(z, v)` computed two ways:
///
/// (a) directly, as the coordinate Hessian `d_A d_Bb G` via jets;
/// (b) from the frame decomposition `-R_{i jb a bb} v^i vb^j dz^a ^ dzb^b
///     + G_{i jb} delta v^i ^ delta vb^j`, pushed back to the coordinate
///     coframe through `delta v^i = dv^i + a^i_a dz^a`.
///
/// Both are returned as (n+r) x (n+r) coefficient matrices over
/// `{dz, dv} ^ {dzb, dvb}`; their equality is the defining decomposition of
/// the induced metric.
pub fn ddbar_g_two_ways(
    m: &ModelBundle,
    p: &PointState,
) -> Result<(CMatrix, CMatrix), GeometryError> {
    let (n, r) = (m.n, m.r);
    let nn = n + r;

    let g_scalar = scalar_g_jet(m, p, 2)?;
    let mut direct = CMatrix::zeros(nn, nn);
    for a in 0..nn {
        let da = g_scalar.dz(a)?;
        for b in 0..nn {
            direct[(a, b)] = da.dzbar(b)?.constant_term();
        }
    }

    let pd = point_data(m, p)?;
    let a_conn = &pd.connection;
    let mut framed = CMatrix::zeros(nn, nn);
    for al in 0..n {
        for be in 0..n {
            let mut acc = pd.psi_mat[(al, be)];
            for i in 0..r {
                for j in 0..r {
                    acc += pd.gg_vals[(i, j)] * a_conn[i][al] * a_conn[j][be].conj();
                }
            }
            framed[(al, be)] = acc;
        }
    }
    for al in 0..n {
        for j in 0..r {
            let mut acc = ZERO;
            for i in 0..r {
                acc += pd.gg_vals[(i, j)] * a_conn[i][al];
            }
            framed[(al, n + j)] = acc;
        }
    }
    for i in 0..r {
        for be in 0..n {
            let mut acc = ZERO;
            for j in 0..r {
                acc += pd.gg_vals[(i, j)] * a_conn[j][be].conj();
            }
            framed[(n + i, be)] = acc;
        }
    }
    for i in 0..r {
        for j in 0..r {
            framed[(n + i, n + j)] = pd.gg_vals[(i, j)];
        }
    }

    Ok((direct, framed))
}

/// Norm square of the one-form `dG` with respect to the induced metric,
/// computed intrinsically as `G_i G_jb G^{jb i}` with `G_i = G_{i jb} vb^j`,
/// returned together with the value of `G` itself. The two agree identically,
/// independent of the base metric.
pub fn pg_norm(m: &ModelBundle, p: &PointState) -> Result<(f64, f64), GeometryError> {
    let gg = m.fiber_metric_values(&p.z)?;
    let gg_inv = gg.herm_inverse()?;
    let r = m.r;
    let mut g_i = vec![ZERO; r];
    for i in 0..r {
        for j in 0..r {
            g_i[i] += gg[(i, j)] * p.v[j].conj();
        }
    }
    let mut norm_sq = ZERO;
    for i in 0..r {
        for j in 0..r {
            norm_sq += g_i[i] * g_i[j].conj() * gg_inv[(j, i)];
        }
    }
    let mut g_val = ZERO;
    for i in 0..r {
        for j in 0..r {
            g_val += gg[(i, j)] * p.v[i] * p.v[j].conj();
        }
    }
    Ok((norm_sq.re, g_val.re))
}

/// Outcome of the exactness / boundedness check for the primitive
/// `theta = -i dG + pullback(beta)` (the `-i` aligns `d(dG)` with the
/// separated `sqrt(-1)` convention: `d(-i dG) = i d dbar G`).
#[derive(Clone, Debug)]
pub struct PrimitiveReport {
    /// Max coefficient gap between `d theta` and the induced metric form,
    /// including the (2,0) and (0,2) components that must vanish.
    pub exactness_residual: f64,
    /// Pointwise norm of the pulled-back primitive in the induced metric.
    pub beta_norm_omega: f64,
    /// Pointwise norm of beta in the base metric alone.
    pub beta_norm_base: f64,
    /// `|dG| = sqrt(G)` by the norm identity.
    pub pg_norm: f64,
}

/// Verify `Omega = d(-i dG + pullback(beta))` coefficientwise via jets, and
/// report the pointwise norms of both pieces of the primitive.
pub fn primitive_check(m: &ModelBundle, p: &PointState) -> Result<PrimitiveReport, GeometryError> {
    let beta_jets = m
        .beta_at(&p.z, 2)?
        .ok_or_else(|| GeometryError::MissingBeta(m.name.clone()))?;
    let (n, r) = (m.n, m.r);
    let nn = n + r;

    // theta = sum_C a_C dxi^C + sum_D b_Db dxib^D with a_C = -i d_C G and
    // b_Db the pulled-back beta coefficients (zero in fiber directions).
    let g_scalar = scalar_g_jet(m, p, 2)?;
    let mut a_jets: Vec<Jet> = Vec::with_capacity(nn);
    for cc in 0..nn {
        a_jets.push(g_scalar.dz(cc)?.scale(-I));
    }

    // Mixed part of d theta over dxi^C ^ dxib^D: d_C b_Db - d_Db a_C.
    // Target: i * H with H the coefficient matrix of the induced metric.
    let pd = point_data(m, p)?;
    let mut residual = 0.0f64;
    for cc in 0..nn {
        for dd in 0..nn {
            let d_b = if cc < n && dd < n {
                beta_jets[dd].dz(cc)?.constant_term()
            } else {
                ZERO
            };
            let d_a = a_jets[cc].dzbar(dd)?.constant_term();
            let mixed = d_b - d_a;

            let mut h = g_scalar.dz(cc)?.dzbar(dd)?.constant_term();
            if cc < n && dd < n {
                h += pd.g_vals[(cc, dd)];
            }
            residual = residual.max((mixed - I * h).norm());
        }
    }
    // (2,0) part: d_{C'} a_C - d_C a_{C'} (beta contributes nothing).
    for c1 in 0..nn {
        for c2 in (c1 + 1)..nn {
            let gap = a_jets[c2].dz(c1)?.constant_term() - a_jets[c1].dz(c2)?.constant_term();
            residual = residual.max(gap.norm());
        }
    }
    // (0,2) part: dbar of the pulled-back beta.
    for d1 in 0..n {
        for d2 in (d1 + 1)..n {
            let gap =
                beta_jets[d2].dzbar(d1)?.constant_term() - beta_jets[d1].dzbar(d2)?.constant_term();
            residual = residual.max(gap.norm());
        }
    }

    // Norms of the primitive pieces.
    let beta_vals: Vec<Complex64> = beta_jets.iter().map(|j| j.constant_term()).collect();
    let omega_inv = pd.omega_h.herm_inverse()?;
    let g_inv = pd.g_vals.herm_inverse()?;
    let mut norm_omega = ZERO;
    let mut norm_base = ZERO;
    for a in 0..n {
        for b in 0..n {
            let pair = beta_vals[a].conj() * beta_vals[b];
            norm_omega += pair * omega_inv[(b, a)];
            norm_base += pair * g_inv[(b, a)];
        }
    }
    let (pg_sq, _) = pg_norm(m, p)?;

    Ok(PrimitiveReport {
        exactness_residual: residual,
        beta_norm_omega: norm_omega.re.max(0.0).sqrt(),
        beta_norm_base: norm_base.re.max(0.0).sqrt(),
        pg_norm: pg_sq.max(0.0).sqrt(),
    })
}

/// Norm square of the tangent vector `T` with horizontal projection `u` and
/// coordinate vertical velocity `w_dot`, two ways:
///
/// (a) the potential route: `-(R(u, ub) w, w) + (D_u w + v, D_u w + v)
///     + k dbar_u d_u psi` with `w` the fiber point, `D_u w` the connection
///     term, and `v = w_dot`;
/// (b) the induced metric evaluated on `T` through the frame splitting.
pub fn tangent_norm_two_ways(
    m: &ModelBundle,
    p: &PointState,
    u: &[Complex64],
    w_dot: &[Complex64],
) -> Result<(f64, f64), GeometryError> {
    let psi = m
        .psi_at(&p.z, 2)?
        .ok_or_else(|| GeometryError::MissingPotential(m.name.clone()))?;
    let k = m.k.ok_or_else(|| GeometryError::MissingPotential(m.name.clone()))?;
    let (n, r) = (m.n, m.r);
    let nn = n + r;
    let pd = point_data(m, p)?;

    // -(R(u, ub) w, w) over the fiber point w = v.
    let mut term_r = ZERO;
    for i in 0..r {
        for j in 0..r {
            for a in 0..n {
                for b in 0..n {
                    term_r -= pd.r_tensor.get(i, j, a, b) * p.v[i] * p.v[j].conj() * u[a] * u[b].conj();
                }
            }
        }
    }

    // D_u w + v: connection applied to the fiber point plus the vertical
    // input; identical to the frame-vertical component of T.
    let mut dw = vec![ZERO; r];
    for i in 0..r {
        dw[i] = w_dot[i];
        for a in 0..n {
            dw[i] += u[a] * pd.connection[i][a];
        }
    }
    let mut term_g = ZERO;
    for i in 0..r {
        for j in 0..r {
            term_g += pd.gg_vals[(i, j)] * dw[i] * dw[j].conj();
        }
    }

    let mut term_psi = ZERO;
    for a in 0..n {
        let mut holo = vec![0u8; nn];
        holo[a] = 1;
        for b in 0..n {
            let mut anti = vec![0u8; nn];
            anti[b] = 1;
            term_psi += psi.wirtinger(&holo, &anti)? * u[a] * u[b].conj();
        }
    }
    let potential_route = (term_r + term_g + term_psi * k).re;

    // Frame route: Omega_h on the horizontal part plus G on the
    // frame-vertical part.
    let mut frame_route = ZERO;
    for a in 0..n {
        for b in 0..n {
            frame_route += pd.omega_h[(a, b)] * u[a] * u[b].conj();
        }
    }
    for i in 0..r {
        for j in 0..r {
            frame_route += pd.gg_vals[(i, j)] * dw[i] * dw[j].conj();
        }
    }

    Ok((potential_route, frame_route.re))
}
