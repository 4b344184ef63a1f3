//! Tensors and forms of the induced metric construction.
//!
//! Conventions, fixed once and used everywhere:
//!
//! - Chern curvature with the sign `R_{i jb a bb} = -d_a d_bb G_{i jb}
//!   + G^{k lb} d_a G_{i lb} d_bb G_{k jb}` (lowered; fiber indices first,
//!   base indices second; `b` marks a barred index). Note the leading minus:
//!   Griffiths negativity reads `R(v, vb, xi, xib) < 0`.
//! - Inverse convention `G_{i lb} G^{lb k} = delta_i^k`; an inverse matrix is
//!   stored so that entry `(a, b)` carries barred index `a` and unbarred `b`,
//!   i.e. `m.mul(&m_inv) == identity`.
//! - Frames are ordered horizontal first (base directions `0..n`), vertical
//!   second (fiber directions `n..n+r`). The horizontal frame vector is
//!   `delta/delta z^a = d/dz^a - a^i_a d/dv^i` with connection coefficients
//!   `a^i_a = G_{a lb} G^{lb i}`.
//! - (1,1)-forms are stored as coefficient matrices over `dz^a ^ dzb^s` with
//!   the `sqrt(-1)` factor carried separately.

pub mod curvature;
pub mod metric;
pub mod ricci;
pub mod scalar;

use num_complex::Complex64;
use thiserror::Error;

use crate::catalog::{CatalogError, ModelBundle, PointState};
use crate::dsl::EvalError;
use crate::jet::{Jet, JetError};
use crate::linalg::{CMatrix, LinalgError, POSITIVE_DEFINITE_TOL};

pub use curvature::{
    chern_curvature, curvature_blocks_closed_form, full_curvature, griffiths_classify,
    tautological_curvature, ClosedBlocks, GriffithsWitness, TautReport, TautStatus,
};
pub use metric::{
    ddbar_g_two_ways, induced_metric, pg_norm, primitive_check, tangent_norm_two_ways,
    FrameReport, PrimitiveReport,
};
pub use ricci::{ricci_log_det_route, ricci_two_ways, zero_section_ricci_identity};
pub use scalar::{mobius_expr, nehari_l2_radius, schwarzian, NehariBound};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("model `{0}` declares no primitive beta")]
    MissingBeta(String),
    #[error("model `{0}` declares no Kahler potential")]
    MissingPotential(String),
    #[error("model `{0}` does not have G = g; the zero-section identity needs a tangent-bundle-style model")]
    NotTangentLike(String),
    #[error("genus {0} is below 2; hyperbolic surfaces require genus >= 2")]
    GenusTooSmall(u32),
    #[error("derivative vanishes at the evaluation point (|f'| = {0:.3e})")]
    VanishingDerivative(f64),
    #[error("log of a non-positive determinant ({0:.3e})")]
    NonPositiveDeterminant(f64),
}

/// Dense 4-index complex tensor with explicit dimensions.
#[derive(Clone, Debug)]
pub struct Tensor4 {
    dims: [usize; 4],
    data: Vec<Complex64>,
}

impl Tensor4 {
    pub fn zeros(d0: usize, d1: usize, d2: usize, d3: usize) -> Self {
        Self { dims: [d0, d1, d2, d3], data: vec![Complex64::new(0.0, 0.0); d0 * d1 * d2 * d3] }
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.dims[1] + j) * self.dims[2] + k) * self.dims[3] + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        self.data[self.offset(i, j, k, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, value: Complex64) {
        let o = self.offset(i, j, k, l);
        self.data[o] = value;
    }

    #[inline]
    pub fn add_assign(&mut self, i: usize, j: usize, k: usize, l: usize, value: Complex64) {
        let o = self.offset(i, j, k, l);
        self.data[o] += value;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_diff(&self, other: &Tensor4) -> f64 {
        assert_eq!(self.dims, other.dims);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Everything the pointwise operations share: metric values, the Chern
/// curvature tensor, the tautological contraction `Psi`, the horizontal block
/// `Omega_h = g + Psi`, and the connection coefficients.
pub(crate) struct PointData {
    pub g_vals: CMatrix,
    pub gg_vals: CMatrix,
    pub gg_inv: CMatrix,
    pub r_tensor: Tensor4,
    pub psi_mat: CMatrix,
    pub omega_h: CMatrix,
    /// `connection[i][a]` is the coefficient of `dz^a` in `delta v^i`.
    pub connection: Vec<Vec<Complex64>>,
    pub omega_h_positive: bool,
}

pub(crate) fn point_data(m: &ModelBundle, p: &PointState) -> Result<PointData, GeometryError> {
    let (n, r) = (m.n, m.r);
    let gg_jets = m.fiber_metric_at(&p.z, 2)?;
    let g_vals = m.base_metric_values(&p.z)?;
    let gg_vals = gg_jets.constant_matrix();
    let gg_inv = gg_vals.herm_inverse()?;

    let r_tensor = curvature::chern_from_jets(&gg_jets, &gg_inv, n, r)?;

    let mut psi_mat = CMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..r {
                for j in 0..r {
                    acc -= r_tensor.get(i, j, a, b) * p.v[i] * p.v[j].conj();
                }
            }
            psi_mat[(a, b)] = acc;
        }
    }
    let omega_h = g_vals.add(&psi_mat);
    let omega_h_positive = omega_h.min_eigenvalue()? > POSITIVE_DEFINITE_TOL;

    // a^i_a = G_{a lb} G^{lb i} with G_{a lb} = d_a(G_{k lb}) v^k
    let mut connection = vec![vec![Complex64::new(0.0, 0.0); n]; r];
    for (i, row) in connection.iter_mut().enumerate() {
        for (a, slot) in row.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..r {
                let mut g_al = Complex64::new(0.0, 0.0);
                for k in 0..r {
                    g_al += gg_jets.get(k, l).dz(a)?.constant_term() * p.v[k];
                }
                acc += g_al * gg_inv[(l, i)];
            }
            *slot = acc;
        }
    }

    Ok(PointData {
        g_vals,
        gg_vals,
        gg_inv,
        r_tensor,
        psi_mat,
        omega_h,
        connection,
        omega_h_positive,
    })
}

/// Jet of the scalar `G(z, v) = G_{ij}(z) v^i conj(v^j)` in all `n + r`
/// complex variables.
pub(crate) fn scalar_g_jet(
    m: &ModelBundle,
    p: &PointState,
    degree: usize,
) -> Result<Jet, GeometryError> {
    let gg_jets = m.fiber_metric_at(&p.z, degree)?;
    let v_jets = m.fiber_env(&p.v, degree)?;
    let mut acc = Jet::constant(Complex64::new(0.0, 0.0), 2 * (m.n + m.r), degree);
    for i in 0..m.r {
        for j in 0..m.r {
            let term = gg_jets.get(i, j).try_mul(&v_jets[i])?.try_mul(&v_jets[j].conj())?;
            acc = &acc + &term;
        }
    }
    Ok(acc)
}

/// Column `u` expresses the `u`-th frame vector in the coordinate basis:
/// horizontal columns are `d/dz^a - a^i_a d/dv^i`, vertical columns are the
/// fiber coordinate vectors.
pub(crate) fn frame_matrix(n: usize, r: usize, connection: &[Vec<Complex64>]) -> CMatrix {
    let nn = n + r;
    let mut l = CMatrix::zeros(nn, nn);
    for a in 0..n {
        l[(a, a)] = Complex64::new(1.0, 0.0);
        for i in 0..r {
            l[(n + i, a)] = -connection[i][a];
        }
    }
    for i in 0..r {
        l[(n + i, n + i)] = Complex64::new(1.0, 0.0);
    }
    l
}

/// Re-express a (1,1)-coefficient matrix over the coordinate coframe as frame
/// components: evaluate the form on pairs of frame vectors,
/// `W'[u][v] = sum_{c,d} L[c][u] conj(L[d][v]) W[c][d]`.
pub(crate) fn frame_convert_form(coeffs: &CMatrix, l: &CMatrix) -> CMatrix {
    let nn = coeffs.rows();
    CMatrix::from_fn(nn, nn, |u, v| {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in 0..nn {
            for d in 0..nn {
                acc += l[(c, u)] * l[(d, v)].conj() * coeffs[(c, d)];
            }
        }
        acc
    })
}

/// Contract all four slots of a coordinate curvature tensor with the frame
/// matrix: endomorphism slots first, then the two form slots.
pub(crate) fn frame_convert_tensor(rc: &Tensor4, l: &CMatrix) -> Tensor4 {
    let nn = l.rows();
    let mut out = Tensor4::zeros(nn, nn, nn, nn);
    for x in 0..nn {
        for y in 0..nn {
            for u in 0..nn {
                for w in 0..nn {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..nn {
                        let la = l[(a, x)];
                        if la.norm() == 0.0 {
                            continue;
                        }
                        for b in 0..nn {
                            let lb = l[(b, y)].conj();
                            if lb.norm() == 0.0 {
                                continue;
                            }
                            for c in 0..nn {
                                let lc = l[(c, u)];
                                if lc.norm() == 0.0 {
                                    continue;
                                }
                                for d in 0..nn {
                                    let ld = l[(d, w)].conj();
                                    if ld.norm() == 0.0 {
                                        continue;
                                    }
                                    acc += la * lb * lc * ld * rc.get(a, b, c, d);
                                }
                            }
                        }
                    }
                    out.set(x, y, u, w, acc);
                }
            }
        }
    }
    out
}
