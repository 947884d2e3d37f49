//! Levi-Civita and Bott connections of a left-invariant structure, with their
//! torsion, curvature and the derived tensors used by the curvature bounds.
//!
//! Every tensor here has constant components in the orthonormal frame, so a
//! covariant derivative `(D_X S)` reduces to the coefficient action of the
//! connection on each slot of `S`; there is no directional-derivative term.
//! This shortcut is only valid for left-invariant data.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::liealg::LieSRStructure;
use crate::tensor::{Tensor3, Tensor4};

const FRAME_TOL: f64 = 1e-12;
const TORSION_TOL: f64 = 1e-10;

/// Connection coefficients and derived tensors in the orthonormal frame.
///
/// Conventions: `lc[(i, j, k)] = <D_{e_i} e_j, e_k>`, the same for `bott`;
/// `curv[(i, j, k, l)] = <R(e_i, e_j) e_k, e_l>`; `r[(i, j, s)]` is the
/// vertical part of `[e_i, e_j]` for horizontal `i, j` and `rbar` the
/// horizontal part of brackets of vertical vectors. All arrays use the full
/// frame dimension and vanish outside their natural blocks.
#[derive(Debug, Clone, Serialize)]
pub struct ConnectionData {
    pub n: usize,
    pub nu: usize,
    pub lc: Tensor3,
    pub bott: Tensor3,
    pub torsion: Tensor3,
    pub curv: Tensor4,
    pub r: Tensor3,
    pub rbar: Tensor3,
    /// `nabla_r[(m, i, j, k)]`: components of `(D_{e_m} R)(e_i, e_j)`.
    pub nabla_r: Tensor4,
    /// `nabla_vstar[(m, a, b)]`: `(D_{e_m} v*)(e^a, e^b)`.
    pub nabla_vstar: Tensor3,
    /// Same for the horizontal co-metric; zero iff the complement is metric-preserving.
    pub nabla_hstar: Tensor3,
    /// Horizontal trace of the second covariant derivative of `v*`.
    pub delta_vstar: DMatrix<f64>,
    /// First-order coefficients: the sub-Laplacian is `sum A_i^2 + sum drift[j] A_j`.
    pub drift: Vec<f64>,
    /// Horizontal components of the mean-curvature defect.
    pub mean_curv: Vec<f64>,
}

impl ConnectionData {
    pub fn compute(s: &LieSRStructure) -> Result<ConnectionData> {
        let lc = levi_civita(s)?;
        let bott = bott_connection(s, &lc);
        let (r, rbar) = ehresmann_curvature(s);
        let (torsion, curv) = bott_curvature(s, &bott)?;
        let (nabla_r, nabla_vstar, delta_vstar) = covariant_derivatives(s, &bott, &r);
        let nabla_hstar = co_metric_derivative(&bott, 0..s.n);
        let (drift, mean_curv) = sublaplacian_data(s, &lc);
        Ok(ConnectionData {
            n: s.n,
            nu: s.nu,
            lc,
            bott,
            torsion,
            curv,
            r,
            rbar,
            nabla_r,
            nabla_vstar,
            nabla_hstar,
            delta_vstar,
            drift,
            mean_curv,
        })
    }

    pub fn dim(&self) -> usize {
        self.n + self.nu
    }

    /// Components of `R(u, v)` for arbitrary frame vectors.
    pub fn r_apply(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        self.r.contract12(u, v)
    }

    /// `tr Rbar(v, R(v, .))`; zero is the extra assumption needed when the
    /// vertical bundle is not integrable.
    pub fn trace_condition(&self, v: &[f64]) -> f64 {
        let d = self.dim();
        let mut e = vec![0.0; d];
        let mut tr = 0.0;
        for a in 0..d {
            e[a] = 1.0;
            let w = self.r.contract12(v, &e);
            e[a] = 0.0;
            tr += self.rbar.contract12(v, &w)[a];
        }
        tr
    }

    /// Largest `|<R(e_i, e_j) e_a, e_a>|` over frame `i, j` and horizontal `a`,
    /// polarized: `<R(Z1, Z2) e_a, e_b> + <R(Z1, Z2) e_b, e_a>`.
    pub fn horizontal_skew_defect(&self) -> f64 {
        let (d, n) = (self.dim(), self.n);
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                for a in 0..n {
                    for b in 0..n {
                        let v = self.curv[(i, j, a, b)] + self.curv[(i, j, b, a)];
                        worst = worst.max(v.abs());
                    }
                }
            }
        }
        worst
    }

    /// Defect of `<R(A,Y)Z - R(A,Z)Y, A> = <Rbar(Y, R(A,Z)) - Rbar(Z, R(A,Y)), A>`
    /// over frame vectors `Y, Z`, polarized in horizontal `A`.
    ///
    /// The right side vanishes when the vertical bundle is integrable. Note the
    /// argument order `R(A, Z)`: with `R(Z, A)` the polarized identity fails on sl(2,C).
    pub fn bianchi_defect(&self) -> f64 {
        let (d, n) = (self.dim(), self.n);
        // lhs[y][z][a][b] = <R(e_a, e_y) e_z - R(e_a, e_z) e_y, e_b>
        // rhs[y][z][a][b] = <Rbar(e_y, R(e_a, e_z)) - Rbar(e_z, R(e_a, e_y)), e_b>
        let rbar_r = |y: usize, z: usize, a: usize, b: usize| -> f64 {
            (0..d).map(|s| self.rbar[(y, s, b)] * self.r[(a, z, s)]).sum()
        };
        let mut worst = 0.0f64;
        for y in 0..d {
            for z in 0..d {
                for a in 0..n {
                    for b in 0..n {
                        let form = |a: usize, b: usize| {
                            let lhs = self.curv[(a, y, z, b)] - self.curv[(a, z, y, b)];
                            let rhs = rbar_r(y, z, a, b) - rbar_r(z, y, a, b);
                            lhs - rhs
                        };
                        worst = worst.max((form(a, b) + form(b, a)).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn is_metric_preserving(&self, tol: f64) -> bool {
        self.nabla_hstar.max_abs() <= tol
    }
}

/// Koszul formula for left-invariant fields in an orthonormal frame:
/// `2 <D_{e_i} e_j, e_k> = c_ijk - c_jki + c_kij`.
pub fn levi_civita(s: &LieSRStructure) -> Result<Tensor3> {
    s.check_shapes()?;
    let defect = s.frame_defect();
    if defect > FRAME_TOL {
        return Err(Error::NotOrthonormalFrame(defect));
    }
    let c = &s.c;
    Ok(Tensor3::from_fn(s.dim(), |i, j, k| {
        0.5 * (c[(i, j, k)] - c[(j, k, i)] + c[(k, i, j)])
    }))
}

/// Bott connection: Levi-Civita projected within each block, and the
/// projected bracket `pr [Z, W]` when differentiating a field of one block
/// along the other.
pub fn bott_connection(s: &LieSRStructure, lc: &Tensor3) -> Tensor3 {
    let n = s.n;
    Tensor3::from_fn(s.dim(), |i, j, k| {
        let (hi, hj, hk) = (i < n, j < n, k < n);
        if hj != hk {
            0.0
        } else if hi == hj {
            lc[(i, j, k)]
        } else {
            s.c[(i, j, k)]
        }
    })
}

/// Curvature `R = pr_V [pr_H ., pr_H .]` and co-curvature `Rbar = pr_H [pr_V ., pr_V .]`.
pub fn ehresmann_curvature(s: &LieSRStructure) -> (Tensor3, Tensor3) {
    let n = s.n;
    let r = Tensor3::from_fn(s.dim(), |i, j, k| {
        if i < n && j < n && k >= n {
            s.c[(i, j, k)]
        } else {
            0.0
        }
    });
    let rbar = Tensor3::from_fn(s.dim(), |i, j, k| {
        if i >= n && j >= n && k < n {
            s.c[(i, j, k)]
        } else {
            0.0
        }
    });
    (r, rbar)
}

/// Torsion and curvature of a constant-coefficient connection.
///
/// Fails with `TorsionMismatch` if the torsion differs from `-(R + Rbar)`.
pub fn bott_curvature(s: &LieSRStructure, bott: &Tensor3) -> Result<(Tensor3, Tensor4)> {
    let d = s.dim();
    let c = &s.c;
    let torsion = Tensor3::from_fn(d, |i, j, k| bott[(i, j, k)] - bott[(j, i, k)] - c[(i, j, k)]);

    let (r, rbar) = ehresmann_curvature(s);
    let mut mismatch = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let v = torsion[(i, j, k)] + r[(i, j, k)] + rbar[(i, j, k)];
                mismatch = mismatch.max(v.abs());
            }
        }
    }
    if mismatch > TORSION_TOL {
        return Err(Error::TorsionMismatch(mismatch));
    }

    let mut curv = Tensor4::zeros(d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let mut v = 0.0;
                    for m in 0..d {
                        v += bott[(j, k, m)] * bott[(i, m, l)] - bott[(i, k, m)] * bott[(j, m, l)]
                            - c[(i, j, m)] * bott[(m, k, l)];
                    }
                    curv[(i, j, k, l)] = v;
                }
            }
        }
    }
    Ok((torsion, curv))
}

/// `(D_{e_m} g*)(e^a, e^b)` for the co-metric that is the identity on `block`
/// and zero elsewhere.
fn co_metric_derivative(bott: &Tensor3, block: std::ops::Range<usize>) -> Tensor3 {
    let d = bott.dim();
    Tensor3::from_fn(d, |m, a, b| {
        if block.contains(&a) && block.contains(&b) {
            bott[(m, b, a)] + bott[(m, a, b)]
        } else {
            0.0
        }
    })
}

/// `(D R, D v*, horizontal Laplacian of v*)` by coefficient action.
pub fn covariant_derivatives(
    s: &LieSRStructure,
    bott: &Tensor3,
    r: &Tensor3,
) -> (Tensor4, Tensor3, DMatrix<f64>) {
    let (d, n) = (s.dim(), s.n);

    let mut nabla_r = Tensor4::zeros(d);
    for m in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut v = 0.0;
                    for p in 0..d {
                        v += bott[(m, p, k)] * r[(i, j, p)]
                            - bott[(m, i, p)] * r[(p, j, k)]
                            - bott[(m, j, p)] * r[(i, p, k)];
                    }
                    nabla_r[(m, i, j, k)] = v;
                }
            }
        }
    }

    let t = co_metric_derivative(bott, n..d);

    // sum over horizontal i of D_{e_i}(D_{e_i} v*) - D_{D_{e_i} e_i} v*
    let mut delta = DMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let mut v = 0.0;
            for i in 0..n {
                for c in 0..d {
                    v += bott[(i, c, a)] * t[(i, c, b)] + bott[(i, c, b)] * t[(i, a, c)];
                }
                for l in 0..d {
                    v -= bott[(i, i, l)] * t[(l, a, b)];
                }
            }
            delta[(a, b)] = v;
        }
    }
    (nabla_r, t, delta)
}

/// Drift of the sub-Laplacian and the mean-curvature defect.
///
/// `drift[j] = sum_i <D_{e_i} e_j, e_i>` (horizontal `i, j`);
/// `N[a] = sum_s c[(a, s, s)]` from `g(A, N) = -1/2 tr_V (L_A g)`.
pub fn sublaplacian_data(s: &LieSRStructure, lc: &Tensor3) -> (Vec<f64>, Vec<f64>) {
    let (n, d) = (s.n, s.dim());
    let drift = (0..n).map(|j| (0..n).map(|i| lc[(i, j, i)]).sum()).collect();
    let mean_curv = (0..n).map(|a| (n..d).map(|v| s.c[(a, v, v)]).sum()).collect();
    (drift, mean_curv)
}
