//! Ricci-type tensors and the constants bounding curvature, vertical
//! parallelism and their interaction.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::connection::ConnectionData;
use crate::error::{Error, Result};
use crate::liealg::{growth_flag, LieSRStructure};
use crate::numeric::{max_asymmetry, spectral_norm, sym_eigen, sym_eigenvalues, ExtReal};

const SYM_TOL: f64 = 1e-10;
const PSD_TOL: f64 = -1e-10;
const NULL_TOL: f64 = 1e-10;

/// The bound constants of a structure, all evaluated in the orthonormal frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CDConstants {
    #[serde(rename = "M_R")]
    pub m_r_max: f64,
    #[serde(rename = "m_R")]
    pub m_r_min: f64,
    #[serde(rename = "rho_H")]
    pub rho_h: f64,
    /// `+inf` when the pure blocks of `Ric_HV` are not positive semidefinite.
    #[serde(rename = "M_HV")]
    pub m_hv: ExtReal,
    #[serde(rename = "M_nabla_v")]
    pub m_nabla_v: f64,
    /// `-inf` when the horizontal part of the quadratic form is indefinite.
    pub rho_delta_v: ExtReal,
    /// Rank of the horizontal bundle.
    #[serde(skip)]
    pub n: usize,
    #[serde(skip)]
    pub ric_h: DMatrix<f64>,
    #[serde(skip)]
    pub ric_hv: DMatrix<f64>,
}

impl CDConstants {
    pub fn compute(conn: &ConnectionData) -> Result<CDConstants> {
        let (ric_h, rho_h) = ricci_horizontal(conn)?;
        let (ric_hv, m_hv) = ricci_hv(conn)?;
        let (m_r_max, m_r_min) = curvature_constants(conn);
        let (m_nabla_v, rho_delta_v) = nabla_v_constants(conn);
        Ok(CDConstants {
            m_r_max,
            m_r_min,
            rho_h,
            m_hv,
            m_nabla_v,
            rho_delta_v,
            n: conn.n,
            ric_h,
            ric_hv,
        })
    }

    /// Eigenvalues of the horizontal block of `Ric_H`, ascending.
    pub fn ric_h_spectrum(&self) -> Vec<f64> {
        let n = self.n;
        sym_eigenvalues(&self.ric_h.view((0, 0), (n, n)).clone_owned())
    }
}

/// `ric_h[(k, j)] = sum_{i<n} <R(e_i, e_j) e_k, e_i>` and the smallest
/// eigenvalue of its horizontal block.
pub fn ricci_horizontal(conn: &ConnectionData) -> Result<(DMatrix<f64>, f64)> {
    let (d, n) = (conn.dim(), conn.n);
    let ric = DMatrix::from_fn(d, d, |k, j| (0..n).map(|i| conn.curv[(i, j, k, i)]).sum());
    let asym = max_asymmetry(&ric);
    if asym > SYM_TOL {
        return Err(Error::AsymmetricRicci(asym));
    }
    let rho = sym_eigenvalues(&ric.view((0, 0), (n, n)).clone_owned())
        .first()
        .copied()
        .unwrap_or(0.0);
    Ok(((&ric + ric.transpose()) * 0.5, rho))
}

fn ric_hv_trace(conn: &ConnectionData, traced: std::ops::Range<usize>) -> DMatrix<f64> {
    let d = conn.dim();
    DMatrix::from_fn(d, d, |j, k| {
        0.5 * traced
            .clone()
            .map(|m| conn.nabla_r[(m, m, k, j)] + conn.nabla_r[(m, m, j, k)])
            .sum::<f64>()
    })
}

/// `ric_hv[(j, k)] = 1/2 sum_m (<e_j, (D_m R)(e_m, e_k)> + <e_k, (D_m R)(e_m, e_j)>)`
/// and `M_HV`, the norm of its mixed block.
///
/// The trace runs over the whole frame; it is checked against the
/// horizontal-only trace, which must agree because `R` vanishes on vertical
/// arguments and the connection preserves the splitting.
pub fn ricci_hv(conn: &ConnectionData) -> Result<(DMatrix<f64>, ExtReal)> {
    let (d, n) = (conn.dim(), conn.n);
    let full = ric_hv_trace(conn, 0..d);
    let horizontal = ric_hv_trace(conn, 0..n);
    let gap = (&full - &horizontal).amax();
    if gap > SYM_TOL {
        return Err(Error::Inconsistent(format!(
            "Ric_HV full-frame and horizontal traces differ by {gap:e}"
        )));
    }
    let hh = full.view((0, 0), (n, n)).clone_owned();
    let vv = full.view((n, n), (d - n, d - n)).clone_owned();
    let psd = |m: &DMatrix<f64>| sym_eigenvalues(m).first().is_none_or(|&l| l >= PSD_TOL);
    let m_hv = if psd(&hh) && psd(&vv) {
        ExtReal::Finite(spectral_norm(&full.view((0, n), (n, d - n)).clone_owned()))
    } else {
        ExtReal::PosInf
    };
    Ok((full, m_hv))
}

/// `Q[(a, b)] = sum_{j,s} R[a][j][s] R[b][j][s]` on horizontal `a, b`.
pub fn curvature_q(conn: &ConnectionData) -> DMatrix<f64> {
    let (d, n) = (conn.dim(), conn.n);
    DMatrix::from_fn(n, n, |a, b| {
        let mut v = 0.0;
        for j in 0..n {
            for s in n..d {
                v += conn.r[(a, j, s)] * conn.r[(b, j, s)];
            }
        }
        v
    })
}

/// `G[(s, t)] = sum_{i<j} R[i][j][s] R[i][j][t]` on vertical `s, t`.
pub fn curvature_gram(conn: &ConnectionData) -> DMatrix<f64> {
    let (d, n) = (conn.dim(), conn.n);
    DMatrix::from_fn(d - n, d - n, |s, t| {
        let mut v = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                v += conn.r[(i, j, n + s)] * conn.r[(i, j, n + t)];
            }
        }
        v
    })
}

/// `(M_R, m_R)`: the largest Frobenius norm of `R(v, .)` over unit horizontal
/// `v`, and the largest `m` with `||R^*(w)||_{wedge^2} >= m ||w||` for vertical `w`.
pub fn curvature_constants(conn: &ConnectionData) -> (f64, f64) {
    let q = sym_eigenvalues(&curvature_q(conn));
    let g = sym_eigenvalues(&curvature_gram(conn));
    let max = q.last().map_or(0.0, |&l| l.max(0.0).sqrt());
    let min = g.first().map_or(0.0, |&l| l.max(0.0).sqrt());
    (max, min)
}

/// `(M_nabla_v, rho_delta_v)`.
///
/// `rho_delta_v` is the infimum of `Q(p) = delta_vstar(p, p)` over covectors
/// with unit vertical part. The horizontal part of `p` is free, so the
/// infimum is `-inf` unless `Q` is positive semidefinite on horizontal
/// covectors and the mixed block vanishes on their null directions; otherwise
/// it is the smallest eigenvalue of the Schur complement.
pub fn nabla_v_constants(conn: &ConnectionData) -> (f64, ExtReal) {
    let (d, n) = (conn.dim(), conn.n);
    let m_nabla_v = conn.nabla_vstar.frobenius();
    let q = (&conn.delta_vstar + conn.delta_vstar.transpose()) * 0.5;
    let nu = d - n;
    if nu == 0 {
        return (m_nabla_v, ExtReal::Finite(0.0));
    }
    let qhh = q.view((0, 0), (n, n)).clone_owned();
    let qhv = q.view((0, n), (n, nu)).clone_owned();
    let qvv = q.view((n, n), (nu, nu)).clone_owned();
    let (vals, vecs) = sym_eigen(&qhh);
    if vals.first().is_some_and(|&l| l < -NULL_TOL) {
        return (m_nabla_v, ExtReal::NegInf);
    }
    let mut pinv = DMatrix::zeros(n, n);
    for (k, &l) in vals.iter().enumerate() {
        let u = vecs.column(k);
        if l.abs() <= NULL_TOL {
            if (u.transpose() * &qhv).amax() > NULL_TOL {
                return (m_nabla_v, ExtReal::NegInf);
            }
        } else {
            pinv += u * u.transpose() / l;
        }
    }
    let schur = qvv - qhv.transpose() * pinv * qhv;
    let rho = sym_eigenvalues(&schur)[0];
    (m_nabla_v, ExtReal::Finite(rho))
}

/// Rescales the vertical metric so that `M_R = 1`.
///
/// `conn` must belong to the orthonormal frame of `s`; the result is given in
/// the basis of `s`.
pub fn normalize_vertical(s: &LieSRStructure, conn: &ConnectionData) -> Result<LieSRStructure> {
    let (m_r, _) = curvature_constants(conn);
    if m_r == 0.0 {
        return Err(Error::ZeroCurvature);
    }
    Ok(s.with_scaled_gram_v(1.0 / (m_r * m_r)))
}

/// The privileged vertical metric of a step-2 structure and its constant `b`.
///
/// The vertical metric induced by the bracket `Psi: wedge^2 h -> k` (isometric
/// on the orthogonal complement of its kernel) has Gram matrix
/// `(Psi Psi^T)^-1`; `b` is `M_R` in that metric, and the returned structure
/// carries it scaled by `1/b^2` so that `M_R = 1` and `m_R = 1/b`.
pub fn privileged_step2(s: &LieSRStructure) -> Result<(f64, LieSRStructure)> {
    let flag = growth_flag(s);
    if flag.step != Some(2) {
        return Err(Error::NotStepTwo(flag.step));
    }
    let (n, nu, d) = (s.n, s.nu, s.dim());

    // orthonormalize the horizontal block only, keeping the vertical basis
    let l = crate::numeric::cholesky_lower(&s.gram_h)
        .ok_or_else(|| Error::NotPositiveDefinite("gram_h".into()))?;
    let ph = l
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::NotPositiveDefinite("gram_h".into()))?;
    let mut b = DMatrix::identity(d, d);
    b.view_mut((0, 0), (n, n)).copy_from(&ph);
    let hs = s.change_basis(&b)?;

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let psi = DMatrix::from_fn(nu, pairs.len(), |t, p| hs.c[(pairs[p].0, pairs[p].1, n + t)]);
    let gram_v = (&psi * psi.transpose())
        .try_inverse()
        .ok_or_else(|| Error::Inconsistent("bracket map does not span the vertical space".into()))?;
    let gram_v = (&gram_v + gram_v.transpose()) * 0.5;

    let mut with_psi = s.clone();
    with_psi.gram_v = gram_v;
    let framed = crate::liealg::adapted_orthonormal_frame(&with_psi)?;
    let conn = ConnectionData::compute(&framed)?;
    let (b_const, _) = curvature_constants(&conn);
    let b2 = b_const * b_const;
    let (lo, hi) = (2.0 * nu as f64 / n as f64, 2.0 * nu as f64);
    let slack = 1e-10 * (1.0 + hi);
    if b2 < lo - slack || b2 > hi + slack {
        return Err(Error::Inconsistent(format!(
            "privileged constant b^2 = {b2} outside [{lo}, {hi}]"
        )));
    }
    Ok((b_const, with_psi.with_scaled_gram_v(1.0 / b2)))
}
