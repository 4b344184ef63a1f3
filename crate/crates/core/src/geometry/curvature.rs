//! Chern curvature of the fiber metric, curvature sign classification, the
//! brute-force curvature of the induced metric, and its closed-form blocks.

use num_complex::Complex64;

use super::{
    frame_convert_form, frame_convert_tensor, frame_matrix, point_data, scalar_g_jet,
    GeometryError, Tensor4,
};
use crate::catalog::{GriffithsClass, ModelBundle, PointState};
use crate::jet::Jet;
use crate::linalg::{CMatrix, JetMatrix};
use crate::rng::SplitMix64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Curvature tensor from degree >= 2 jets of the fiber metric:
/// `R_{i jb a bb} = -d_a d_bb G_{i jb} + G^{k lb} d_a G_{i lb} d_bb G_{k jb}`.
pub(crate) fn chern_from_jets(
    gg_jets: &JetMatrix,
    gg_inv: &CMatrix,
    n: usize,
    r: usize,
) -> Result<Tensor4, GeometryError> {
    // First derivatives of every entry, cached per direction.
    let mut d_holo = vec![vec![vec![ZERO; n]; r]; r]; // d_a G_{i lb}
    let mut d_anti = vec![vec![vec![ZERO; n]; r]; r]; // d_bb G_{k jb}
    for i in 0..r {
        for j in 0..r {
            for a in 0..n {
                d_holo[i][j][a] = gg_jets.get(i, j).dz(a)?.constant_term();
                d_anti[i][j][a] = gg_jets.get(i, j).dzbar(a)?.constant_term();
            }
        }
    }
    let mut out = Tensor4::zeros(r, r, n, n);
    for i in 0..r {
        for j in 0..r {
            for a in 0..n {
                let da = gg_jets.get(i, j).dz(a)?;
                for b in 0..n {
                    let hess = da.dzbar(b)?.constant_term();
                    let mut corr = ZERO;
                    for k in 0..r {
                        for l in 0..r {
                            corr += gg_inv[(l, k)] * d_holo[i][l][a] * d_anti[k][j][b];
                        }
                    }
                    out.set(i, j, a, b, -hess + corr);
                }
            }
        }
    }
    Ok(out)
}

/// Chern curvature tensor `R_{i jb a bb}` of the fiber metric at a base
/// point, indexed `[i][j][a][b]` with `i, j` fiber and `a, b` base.
pub fn chern_curvature(m: &ModelBundle, z: &[Complex64]) -> Result<Tensor4, GeometryError> {
    let gg_jets = m.fiber_metric_at(z, 2)?;
    let gg_inv = gg_jets.constant_matrix().herm_inverse()?;
    chern_from_jets(&gg_jets, &gg_inv, m.n, m.r)
}

/// Fiber/base witness pair for a curvature sign: `value` is the Hermitian
/// form `R(v, vb, xi, xib)` at the witness.
#[derive(Clone, Debug)]
pub struct GriffithsWitness {
    pub v: Vec<Complex64>,
    pub xi: Vec<Complex64>,
    pub value: f64,
}

/// Classify the curvature sign at `z` by sampling unit fiber vectors and
/// examining the eigenvalues of the contracted form `R_{i jb a bb} v^i vb^j`.
/// Flat means the whole tensor vanishes to 1e-12.
pub fn griffiths_classify(
    m: &ModelBundle,
    z: &[Complex64],
    samples: usize,
    seed: u64,
) -> Result<(GriffithsClass, Option<GriffithsWitness>), GeometryError> {
    let r_tensor = chern_curvature(m, z)?;
    let scale = r_tensor.max_abs();
    if scale < 1e-12 {
        return Ok((GriffithsClass::Flat, None));
    }
    let (n, r) = (m.n, m.r);
    let sign_tol = 1e-12 * scale.max(1.0);
    let mut rng = SplitMix64::new(seed);
    let mut all_negative = true;
    let mut all_positive = true;
    let mut extreme: Option<GriffithsWitness> = None;

    for _ in 0..samples.max(1) {
        let v = random_unit_fiber(&mut rng, r);
        let contracted = CMatrix::from_fn(n, n, |a, b| {
            let mut acc = ZERO;
            for i in 0..r {
                for j in 0..r {
                    acc += r_tensor.get(i, j, a, b) * v[i] * v[j].conj();
                }
            }
            acc
        });
        let (eigs, vecs) = contracted.herm_eig_full()?;
        let (lo, hi) = (eigs[0], eigs[n - 1]);
        if hi >= -sign_tol {
            all_negative = false;
        }
        if lo <= sign_tol {
            all_positive = false;
        }
        // Track the most extreme eigenvalue seen, with its eigenvector as the
        // base-direction witness.
        let (idx, val) = if lo.abs() >= hi.abs() { (0, lo) } else { (n - 1, hi) };
        if extreme.as_ref().is_none_or(|w| val.abs() > w.value.abs()) {
            let xi: Vec<Complex64> = (0..n).map(|a| vecs[(a, idx)]).collect();
            extreme = Some(GriffithsWitness { v: v.clone(), xi, value: val });
        }
    }

    let class = if all_negative {
        GriffithsClass::Negative
    } else if all_positive {
        GriffithsClass::Positive
    } else {
        GriffithsClass::Indefinite
    };
    Ok((class, extreme))
}

fn random_unit_fiber(rng: &mut SplitMix64, r: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..r)
            .map(|_| Complex64::new(rng.next_range(-1.0, 1.0), rng.next_range(-1.0, 1.0)))
            .collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

/// Brute-force frame-basis curvature 4-tensor of the induced metric.
///
/// The induced metric in holomorphic coordinates `(z, v)` has components
/// `H_{A Bb} = (pullback g)_{A Bb} + d_A d_Bb G(z, v)`; the standard lowered
/// Chern-curvature formula applied to `H` (degree-4 jets of `G` supply the
/// fourth derivatives) gives the coordinate tensor, which is then contracted
/// tensorially into the frame `{delta/delta z^a, d/dv^i}` on all four slots.
/// Output indices: `[endo_in][endo_out][form_holo][form_anti]`, each ranging
/// over horizontal then vertical.
pub fn full_curvature(m: &ModelBundle, p: &PointState) -> Result<Tensor4, GeometryError> {
    let (n, r) = (m.n, m.r);
    let nn = n + r;
    let g_jets = m.base_metric_at(&p.z, 4)?;
    let g_scalar = scalar_g_jet(m, p, 4)?;

    // H entries as degree-2 jets.
    let mut h: Vec<Vec<Jet>> = Vec::with_capacity(nn);
    for aa in 0..nn {
        let mut row = Vec::with_capacity(nn);
        let da = g_scalar.dz(aa)?;
        for bb in 0..nn {
            let hess = da.dzbar(bb)?;
            if aa < n && bb < n {
                row.push(&g_jets.get(aa, bb).truncate(2) + &hess);
            } else {
                row.push(hess);
            }
        }
        h.push(row);
    }

    let h_vals = CMatrix::from_fn(nn, nn, |a, b| h[a][b].constant_term());
    let h_inv = h_vals.herm_inverse()?;

    // First-derivative values d_C H_{A Bb} and d_Cb H_{A Bb}.
    let mut d1 = vec![vec![vec![ZERO; nn]; nn]; nn];
    let mut d1b = vec![vec![vec![ZERO; nn]; nn]; nn];
    for a in 0..nn {
        for b in 0..nn {
            for c in 0..nn {
                d1[a][b][c] = h[a][b].dz(c)?.constant_term();
                d1b[a][b][c] = h[a][b].dzbar(c)?.constant_term();
            }
        }
    }

    // Coordinate curvature R_{A Bb C Db}.
    let mut rc = Tensor4::zeros(nn, nn, nn, nn);
    for a in 0..nn {
        for b in 0..nn {
            for c in 0..nn {
                let dc = h[a][b].dz(c)?;
                for d in 0..nn {
                    let hess = dc.dzbar(d)?.constant_term();
                    let mut corr = ZERO;
                    for kk in 0..nn {
                        for ll in 0..nn {
                            corr += h_inv[(ll, kk)] * d1[a][ll][c] * d1b[kk][b][d];
                        }
                    }
                    rc.set(a, b, c, d, -hess + corr);
                }
            }
        }
    }

    let pd = point_data(m, p)?;
    let l = frame_matrix(n, r, &pd.connection);
    Ok(frame_convert_tensor(&rc, &l))
}

/// The two closed-form curvature blocks.
///
/// `vv[i][j][c][d]` are the frame components of the pairing of the curvature
/// on two vertical directions; the closed form lives entirely over base form
/// slots, so vertical form components are stored as exact zeros (the oracle
/// must reproduce them as numerical zeros).
///
/// `hh[a][b][c][d]` pairs two horizontal frame directions; here the exterior
/// derivatives act on the horizontal metric block as a function on the whole
/// total space, so all frame form components are populated.
pub struct ClosedBlocks {
    pub vv: Tensor4,
    pub hh: Tensor4,
}

/// Closed-form curvature blocks:
///
/// - vertical-vertical: `R_{i lb a bb} R_{k jb g sb} v^k vb^l Omega^{bb g}
///   + R_{i jb a sb}` over `dz^a ^ dzb^s`;
/// - horizontal-horizontal: `dbar(d Omega_{a sb} Omega^{sb g}) Omega_{g bb}
///   - R_{p lb g bb} R_{k qb a sb} v^k vb^l G^{qb p} dz^g ^ dzb^s`,
///   with `d`, `dbar` acting in every total-space direction (base and fiber)
///   and the resulting coefficients re-expressed in the frame coframe.
///
/// A `dbar` applied to a (1,0)-form contributes its coefficient with a minus
/// sign when read over the `dz ^ dzb` ordering used throughout.
pub fn curvature_blocks_closed_form(
    m: &ModelBundle,
    p: &PointState,
) -> Result<ClosedBlocks, GeometryError> {
    let (n, r) = (m.n, m.r);
    let nn = n + r;
    let pd = point_data(m, p)?;
    let omega_inv = pd.omega_h.herm_inverse()?;

    // (i) vertical-vertical block, plain values.
    let mut vv = Tensor4::zeros(r, r, nn, nn);
    for i in 0..r {
        for j in 0..r {
            for a in 0..n {
                for s in 0..n {
                    let mut acc = pd.r_tensor.get(i, j, a, s);
                    for k in 0..r {
                        for l in 0..r {
                            for b in 0..n {
                                for g in 0..n {
                                    acc += pd.r_tensor.get(i, l, a, b)
                                        * pd.r_tensor.get(k, j, g, s)
                                        * p.v[k]
                                        * p.v[l].conj()
                                        * omega_inv[(b, g)];
                                }
                            }
                        }
                    }
                    vv.set(i, j, a, s, acc);
                }
            }
        }
    }

    // (ii) horizontal-horizontal block via jets.
    let g_jets = m.base_metric_at(&p.z, 4)?;
    let gg_jets = m.fiber_metric_at(&p.z, 4)?;
    let gg_inv_jets = JetMatrix::from_fn(r, r, |i, j| gg_jets.get(i, j).clone()).inverse()?;
    let v_jets = m.fiber_env(&p.v, 4)?;

    // Curvature entries as degree-2 jets in z.
    let mut r_jet: Vec<Vec<Vec<Vec<Jet>>>> = Vec::with_capacity(r);
    for i in 0..r {
        let mut ji = Vec::with_capacity(r);
        for j in 0..r {
            let mut ja = Vec::with_capacity(n);
            for a in 0..n {
                let mut jb = Vec::with_capacity(n);
                let da = gg_jets.get(i, j).dz(a)?;
                for b in 0..n {
                    let mut acc = -&da.dzbar(b)?;
                    for k in 0..r {
                        for l in 0..r {
                            let term = gg_inv_jets
                                .get(l, k)
                                .try_mul(&gg_jets.get(i, l).dz(a)?)?
                                .try_mul(&gg_jets.get(k, j).dzbar(b)?)?;
                            acc = &acc + &term;
                        }
                    }
                    jb.push(acc);
                }
                ja.push(jb);
            }
            ji.push(ja);
        }
        r_jet.push(ji);
    }

    // Omega_{a sb}(z, v) = g_{a sb} - R_{i jb a sb} v^i vb^j as degree-2 jets.
    let omega_jet = JetMatrix::try_from_fn(n, n, |a, s| {
        let mut acc = g_jets.get(a, s).truncate(2);
        for i in 0..r {
            for j in 0..r {
                let term = r_jet[i][j][a][s]
                    .try_mul(&v_jets[i])?
                    .try_mul(&v_jets[j].conj())?;
                acc = &acc - &term;
            }
        }
        Ok::<_, GeometryError>(acc)
    })?;
    let omega_inv_jet = omega_jet.inverse()?;

    // P[a][g][c] = sum_s d_c(Omega_{a sb}) Omega^{sb g}, a (1,0)-form over
    // every total-space direction c.
    let mut hh_coord = Tensor4::zeros(n, n, nn, nn);
    for a in 0..n {
        for g in 0..n {
            for c in 0..nn {
                let mut p_jet: Option<Jet> = None;
                for s in 0..n {
                    let term = omega_jet.get(a, s).dz(c)?.try_mul(omega_inv_jet.get(s, g))?;
                    p_jet = Some(match p_jet {
                        None => term,
                        Some(acc) => &acc + &term,
                    });
                }
                let p_jet = p_jet.expect("n >= 1");
                for d in 0..nn {
                    // dbar of a (1,0)-form: reordering dzb ^ dz into dz ^ dzb
                    // flips the sign of the coefficient.
                    let t1 = -p_jet.dzbar(d)?.constant_term();
                    for b in 0..n {
                        hh_coord.add_assign(a, b, c, d, t1 * pd.omega_h[(g, b)]);
                    }
                }
            }
        }
    }

    // Subtract the R R G^{-1} correction on base form slots.
    for a in 0..n {
        for b in 0..n {
            for g in 0..n {
                for s in 0..n {
                    let mut acc = ZERO;
                    for pp in 0..r {
                        for l in 0..r {
                            for k in 0..r {
                                for q in 0..r {
                                    acc += pd.r_tensor.get(pp, l, g, b)
                                        * pd.r_tensor.get(k, q, a, s)
                                        * p.v[k]
                                        * p.v[l].conj()
                                        * pd.gg_inv[(q, pp)];
                                }
                            }
                        }
                    }
                    hh_coord.add_assign(a, b, g, s, -acc);
                }
            }
        }
    }

    // Re-express the form slots in the frame coframe.
    let l = frame_matrix(n, r, &pd.connection);
    let mut hh = Tensor4::zeros(n, n, nn, nn);
    for a in 0..n {
        for b in 0..n {
            let coeffs = CMatrix::from_fn(nn, nn, |c, d| hh_coord.get(a, b, c, d));
            let framed = frame_convert_form(&coeffs, &l);
            for c in 0..nn {
                for d in 0..nn {
                    hh.set(a, b, c, d, framed[(c, d)]);
                }
            }
        }
    }

    Ok(ClosedBlocks { vv, hh })
}

/// Status of the tautological-section curvature at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TautStatus {
    /// v = 0: the form vanishes identically; only the non-strict bound applies.
    ZeroSection,
    /// Psi positive definite off the zero section: strict negativity expected.
    Strict,
    /// Psi positive semidefinite but singular (degenerate fiber direction);
    /// only the non-strict bound applies.
    NonStrictPsiSingular,
    /// Psi has a negative eigenvalue or Omega_h degenerates: the model is not
    /// Griffiths negative here, the sign statement does not apply.
    HypothesisViolated,
}

/// Curvature paired against the tautological section, as the Hermitian matrix
/// `M = Psi Omega_h^{-1} Psi - Psi` over `dz^a ^ dzb^s`.
#[derive(Clone, Debug)]
pub struct TautReport {
    pub matrix: Option<CMatrix>,
    pub lambda_max: Option<f64>,
    pub status: TautStatus,
}

pub fn tautological_curvature(m: &ModelBundle, p: &PointState) -> Result<TautReport, GeometryError> {
    let pd = point_data(m, p)?;
    let psi_eigs = pd.psi_mat.herm_eig()?;
    let scale = pd.psi_mat.max_abs().max(1.0);
    let psi_negative = psi_eigs[0] < -1e-10 * scale;
    let psi_definite = psi_eigs[0] > 1e-12 * scale;

    let omega_inv = match pd.omega_h.herm_inverse() {
        Ok(inv) => inv,
        // Omega_h degenerate: hypothesis of the sign statement fails, there
        // is nothing to assert.
        Err(_) => {
            return Ok(TautReport { matrix: None, lambda_max: None, status: TautStatus::HypothesisViolated })
        }
    };
    let mat = pd.psi_mat.mul(&omega_inv).mul(&pd.psi_mat).sub(&pd.psi_mat);
    let lambda_max = *mat
        .herm_eig()?
        .last()
        .expect("non-empty spectrum");

    let status = if psi_negative {
        TautStatus::HypothesisViolated
    } else if p.v_norm() == 0.0 {
        TautStatus::ZeroSection
    } else if psi_definite {
        TautStatus::Strict
    } else {
        TautStatus::NonStrictPsiSingular
    };
    Ok(TautReport { matrix: Some(mat), lambda_max: Some(lambda_max), status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn model(name: &str) -> ModelBundle {
        ModelBundle::builtin(name).unwrap()
    }

    #[test]
    fn disk_curvature_at_origin() {
        let m = model("disk_tangent");
        let r = chern_curvature(&m, &[c(0.0, 0.0)]).unwrap();
        assert_relative_eq!(r.get(0, 0, 0, 0).re, -2.0, epsilon = 1e-12);
        assert!(r.get(0, 0, 0, 0).im.abs() < 1e-13);
    }

    #[test]
    fn flat_curvature_vanishes() {
        let m = model("flat");
        let r = chern_curvature(&m, &[c(0.3, -0.4)]).unwrap();
        assert!(r.max_abs() < 1e-14);
    }

    #[test]
    fn tautological_bundle_curvature_values() {
        let m = model("taut_over_p1");
        // At z = 0: G = 1, dG = 0, ddbar G = 1, so R = -1.
        let r0 = chern_curvature(&m, &[c(0.0, 0.0)]).unwrap();
        assert_relative_eq!(r0.get(0, 0, 0, 0).re, -1.0, epsilon = 1e-12);
        // At z = 1: G = 2, dG = zb = 1, ddbar G = 1, so R = -1 + 1/2.
        let r1 = chern_curvature(&m, &[c(1.0, 0.0)]).unwrap();
        assert_relative_eq!(r1.get(0, 0, 0, 0).re, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn classify_disk_negative_with_witness() {
        let m = model("disk_tangent");
        let (class, witness) = griffiths_classify(&m, &[c(0.0, 0.0)], 16, 42).unwrap();
        assert_eq!(class, GriffithsClass::Negative);
        let w = witness.unwrap();
        assert_relative_eq!(w.value, -2.0, epsilon = 1e-10);
    }

    #[test]
    fn classify_o1_positive() {
        let m = model("o1_positive");
        let (class, _) = griffiths_classify(&m, &[c(0.0, 0.0)], 16, 42).unwrap();
        assert_eq!(class, GriffithsClass::Positive);
    }

    #[test]
    fn classify_flat() {
        let m = model("flat");
        let (class, witness) = griffiths_classify(&m, &[c(0.2, 0.1)], 16, 42).unwrap();
        assert_eq!(class, GriffithsClass::Flat);
        assert!(witness.is_none());
    }

    #[test]
    fn taut_matrix_on_disk() {
        // Psi = 2, Omega_h = 3 at (0, 1): M = 4/3 - 2 = -2/3.
        let m = model("disk_tangent");
        let p = PointState::new(vec![c(0.0, 0.0)], vec![c(1.0, 0.0)]);
        let rep = tautological_curvature(&m, &p).unwrap();
        assert_eq!(rep.status, TautStatus::Strict);
        assert_relative_eq!(rep.matrix.unwrap()[(0, 0)].re, -2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(rep.lambda_max.unwrap(), -2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn taut_zero_section() {
        let m = model("disk_tangent");
        let p = PointState::new(vec![c(0.2, 0.1)], vec![c(0.0, 0.0)]);
        let rep = tautological_curvature(&m, &p).unwrap();
        assert_eq!(rep.status, TautStatus::ZeroSection);
        assert!(rep.matrix.unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn taut_hypothesis_violated_on_positive_model() {
        // Psi = -1 at (0, 1) for the positive model, and Omega_h = 0 there:
        // the hypothesis is reported violated, no sign is asserted.
        let m = model("o1_positive");
        let p = PointState::new(vec![c(0.0, 0.0)], vec![c(1.0, 0.0)]);
        let rep = tautological_curvature(&m, &p).unwrap();
        assert_eq!(rep.status, TautStatus::HypothesisViolated);
    }

    #[test]
    fn full_curvature_flat_model_vanishes() {
        let m = model("flat");
        let p = PointState::new(vec![c(0.3, 0.2)], vec![c(0.7, -0.1)]);
        let fc = full_curvature(&m, &p).unwrap();
        assert!(fc.max_abs() < 1e-12);
    }

    #[test]
    fn disk_vertical_block_value() {
        // <R(d_v, .) d_v, d_v^bar> along dz ^ dzb at (0, 1) is
        // R R |v|^2 / Omega + R = 4/3 - 2 = -2/3.
        let m = model("disk_tangent");
        let p = PointState::new(vec![c(0.0, 0.0)], vec![c(1.0, 0.0)]);
        let fc = full_curvature(&m, &p).unwrap();
        assert_relative_eq!(fc.get(1, 1, 0, 0).re, -2.0 / 3.0, epsilon = 1e-10);
        assert!(fc.get(1, 1, 0, 0).im.abs() < 1e-11);
    }

    #[test]
    fn closed_form_matches_brute_force_on_disk() {
        let m = model("disk_tangent");
        let p = PointState::new(vec![c(0.3, -0.2)], vec![c(0.8, 0.4)]);
        let fc = full_curvature(&m, &p).unwrap();
        let blocks = curvature_blocks_closed_form(&m, &p).unwrap();
        let scale = 1.0 + fc.max_abs();
        // vv block: closed form vs the vertical-vertical corner of the oracle.
        for c1 in 0..2 {
            for d1 in 0..2 {
                let want = fc.get(1, 1, c1, d1);
                let got = blocks.vv.get(0, 0, c1, d1);
                assert!(
                    (want - got).norm() / scale < 1e-10,
                    "vv[{c1}][{d1}]: {want} vs {got}"
                );
            }
        }
        // hh block.
        for c1 in 0..2 {
            for d1 in 0..2 {
                let want = fc.get(0, 0, c1, d1);
                let got = blocks.hh.get(0, 0, c1, d1);
                assert!(
                    (want - got).norm() / scale < 1e-10,
                    "hh[{c1}][{d1}]: {want} vs {got}"
                );
            }
        }
    }

    #[test]
    fn product_rank2_vertical_blocks() {
        // v = (1, 0): the diagonal vv components over the matching base slot
        // are -2/3 for the occupied fiber and -2 for the empty one.
        let m = model("product_rank2");
        let p = PointState::new(vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let blocks = curvature_blocks_closed_form(&m, &p).unwrap();
        assert_relative_eq!(blocks.vv.get(0, 0, 0, 0).re, -2.0 / 3.0, epsilon = 1e-11);
        assert_relative_eq!(blocks.vv.get(1, 1, 1, 1).re, -2.0, epsilon = 1e-11);
        assert!(blocks.vv.get(1, 1, 0, 0).norm() < 1e-12);
    }
}
