//! Ricci curvature of the induced metric, two routes, plus the zero-section
//! restriction identity for tangent-bundle-style models.

use num_complex::Complex64;

use super::{
    frame_convert_form, frame_matrix, full_curvature, point_data, GeometryError,
};
use crate::catalog::{ModelBundle, PointState};
use crate::jet::Jet;
use crate::linalg::{CMatrix, JetMatrix};

/// Ricci coefficient matrices over the frame coframe, two ways:
///
/// (a) the metric trace of the brute-force curvature tensor;
/// (b) the mixed Wirtinger Hessian of `log(det G * det Omega_h)` as a
///     function of `(z, v)`, converted to frame components.
///
/// Both are reported with the `d dbar` orientation (entry `(C, D)` is the
/// `d_C d_Db` Hessian coefficient); the trace route is negated into that
/// orientation, so equal matrices mean the trace identity holds. On the disk
/// model at the origin of the zero section this makes the horizontal entry
/// +4 and the vertical entry +2.
pub fn ricci_two_ways(
    m: &ModelBundle,
    p: &PointState,
) -> Result<(CMatrix, CMatrix), GeometryError> {
    let (n, r) = (m.n, m.r);
    let nn = n + r;

    // Route (a): trace of the frame curvature against the frame metric.
    let fc = full_curvature(m, p)?;
    let pd = point_data(m, p)?;
    let omega_inv = pd.omega_h.herm_inverse()?;
    let trace = CMatrix::from_fn(nn, nn, |u, w| {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..r {
            for j in 0..r {
                acc += pd.gg_inv[(j, i)] * fc.get(n + i, n + j, u, w);
            }
        }
        for a in 0..n {
            for b in 0..n {
                acc += omega_inv[(b, a)] * fc.get(a, b, u, w);
            }
        }
        acc
    });
    let trace_route = trace.scale(Complex64::new(-1.0, 0.0));

    let logdet_route = ricci_log_det_route(m, p)?;
    Ok((trace_route, logdet_route))
}

/// The log-volume route alone, in frame components: the Hessian of
/// `log(det G * det Omega_h)` converted to the frame coframe. Much cheaper
/// than the trace route; this is what grid scans use.
pub fn ricci_log_det_route(m: &ModelBundle, p: &PointState) -> Result<CMatrix, GeometryError> {
    let pd = point_data(m, p)?;
    let hess = log_det_hessian(m, p)?;
    let l = frame_matrix(m.n, m.r, &pd.connection);
    Ok(frame_convert_form(&hess, &l))
}

/// Coordinate Hessian `d_C d_Db log(det G(z) * det Omega_h(z, v))` via jets.
fn log_det_hessian(m: &ModelBundle, p: &PointState) -> Result<CMatrix, GeometryError> {
    let (n, r) = (m.n, m.r);
    let nn = n + r;

    let g_jets = m.base_metric_at(&p.z, 4)?;
    let gg_jets = m.fiber_metric_at(&p.z, 4)?;
    let gg_inv_jets = gg_jets.inverse()?;
    let v_jets = m.fiber_env(&p.v, 4)?;

    // Omega_{a sb}(z, v) as degree-2 jets, as in the closed-form block.
    let omega_jet = JetMatrix::try_from_fn(n, n, |a, s| {
        let mut acc = g_jets.get(a, s).truncate(2);
        for i in 0..r {
            for j in 0..r {
                // R_{i jb a sb} as a jet.
                let mut r_ij = -&gg_jets.get(i, j).dz(a)?.dzbar(s)?;
                for k in 0..r {
                    for l in 0..r {
                        let term = gg_inv_jets
                            .get(l, k)
                            .try_mul(&gg_jets.get(i, l).dz(a)?)?
                            .try_mul(&gg_jets.get(k, j).dzbar(s)?)?;
                        r_ij = &r_ij + &term;
                    }
                }
                let term = r_ij.try_mul(&v_jets[i])?.try_mul(&v_jets[j].conj())?;
                acc = &acc - &term;
            }
        }
        Ok::<_, GeometryError>(acc)
    })?;

    let det_gg: Jet = JetMatrix::from_fn(r, r, |i, j| gg_jets.get(i, j).truncate(2)).det()?;
    let det_omega = omega_jet.det()?;
    let product = det_gg.try_mul(&det_omega)?;
    let det0 = product.constant_term();
    if det0.re <= 0.0 || det0.im.abs() > 1e-10 * det0.re.abs().max(1.0) {
        return Err(GeometryError::NonPositiveDeterminant(det0.re));
    }
    let log_det = product.log()?;

    let mut hess = CMatrix::zeros(nn, nn);
    for c in 0..nn {
        let dc = log_det.dz(c)?;
        for d in 0..nn {
            hess[(c, d)] = dc.dzbar(d)?.constant_term();
        }
    }
    Ok(hess)
}

/// Zero-section restriction: on models with `G = g`, the pullback of the
/// Ricci form to the zero section equals twice the base Ricci form. Returns
/// the horizontal block of the trace-route Ricci at `(z, 0)` and
/// `2 d dbar log det g`, both n x n in the `d dbar` orientation.
pub fn zero_section_ricci_identity(
    m: &ModelBundle,
    z: &[Complex64],
) -> Result<(CMatrix, CMatrix), GeometryError> {
    if !m.tangent_like {
        return Err(GeometryError::NotTangentLike(m.name.clone()));
    }
    let n = m.n;
    let p = PointState::new(z.to_vec(), vec![Complex64::new(0.0, 0.0); m.r]);
    let (trace_route, _) = ricci_two_ways(m, &p)?;
    let horizontal = CMatrix::from_fn(n, n, |a, b| trace_route[(a, b)]);

    let g_jets = m.base_metric_at(z, 2)?;
    let det_g = g_jets.det()?;
    let det0 = det_g.constant_term();
    if det0.re <= 0.0 {
        return Err(GeometryError::NonPositiveDeterminant(det0.re));
    }
    let log_det = det_g.log()?;
    let mut base_ricci = CMatrix::zeros(n, n);
    for a in 0..n {
        let da = log_det.dz(a)?;
        for b in 0..n {
            base_ricci[(a, b)] = da.dzbar(b)?.constant_term() * 2.0;
        }
    }
    Ok((horizontal, base_ricci))
}
