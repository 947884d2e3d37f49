//! Curvature-dimension parameters and pointwise verification of the Γ₂
//! inequalities on constrained 2-jets.
//!
//! A 2-jet is the pair `(df, D df)` at a point: `p[j] = df(e_j)` and
//! `H[i][j] = (D_{A_i} df)(e_j)` for horizontal `i`. The commutation
//! constraint `H[i][j] - H[j][i] = sum_s p[n+s] R[i][j][s]` is all that
//! links them, so sampling constrained jets probes the inequalities exactly.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::connection::ConnectionData;
use crate::error::{Error, Result};
use crate::invariants::CDConstants;
use crate::numeric::{spectral_norm, sym_eigenvalues, ExtReal};

const NORMALIZED_TOL: f64 = 1e-10;
const PARALLEL_TOL: f64 = 1e-12;

/// Parameters `(n, rho1, rho20, rho21)` of the generalized inequality, with
/// the free constant `c` they were assembled for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CDParams {
    pub n_dim: ExtReal,
    pub rho1: f64,
    pub rho20: f64,
    pub rho21: f64,
    pub c: ExtReal,
}

impl CDParams {
    fn inv_n(&self) -> f64 {
        self.n_dim.recip()
    }
}

fn check_c(c: ExtReal, coupling: f64) -> Result<()> {
    match c {
        ExtReal::Finite(x) if x > 0.0 && x.is_finite() => Ok(()),
        ExtReal::PosInf if coupling == 0.0 => Ok(()),
        ExtReal::PosInf => Err(Error::BadParam(format!(
            "c = inf needs M_HV + M_nabla_v = 0, got {coupling}"
        ))),
        _ => Err(Error::BadParam(format!("c must be positive, got {c}"))),
    }
}

/// `c (M_HV + M_nabla_v)^2`, with `inf * 0 = 0`.
fn c_times(c: ExtReal, m: f64) -> f64 {
    if m == 0.0 {
        0.0
    } else {
        c.to_f64() * m * m
    }
}

fn finite_constants(k: &CDConstants) -> Result<(f64, f64)> {
    if (k.m_r_max - 1.0).abs() > NORMALIZED_TOL {
        return Err(Error::NotNormalized(k.m_r_max));
    }
    let m_hv = k.m_hv.finite().ok_or(Error::UnboundedConstant("M_HV"))?;
    let rho_dv = k
        .rho_delta_v
        .finite()
        .ok_or(Error::UnboundedConstant("rho_delta_v"))?;
    Ok((m_hv, rho_dv))
}

/// `rho1 = rho_H - 1/c`, `rho20 = m_R^2/2 - c (M_HV + M_nabla_v)^2`,
/// `rho21 = rho_delta_v/2 - M_nabla_v^2`; `n_dim` defaults to the rank of
/// the horizontal bundle.
pub fn cd_parameters(k: &CDConstants, c: ExtReal, n_dim: Option<ExtReal>) -> Result<CDParams> {
    let (m_hv, rho_dv) = finite_constants(k)?;
    let coupling = m_hv + k.m_nabla_v;
    check_c(c, coupling)?;
    Ok(CDParams {
        n_dim: n_dim.unwrap_or(ExtReal::Finite(k.n as f64)),
        rho1: k.rho_h - c.recip(),
        rho20: 0.5 * k.m_r_min * k.m_r_min - c_times(c, coupling),
        rho21: 0.5 * rho_dv - k.m_nabla_v * k.m_nabla_v,
        c,
    })
}

/// Parameters for `L = Delta' + Z` with a vertical drift `Z` (frame components).
///
/// `M^Z_HV` bounds the drift-corrected mixed Ricci form and `N^2` the negative
/// part of `v(W, D_W Z)` on vertical `W`; `n_dim` must exceed the horizontal rank.
pub fn drifted_cd_parameters(
    k: &CDConstants,
    conn: &ConnectionData,
    z: &[f64],
    c: ExtReal,
    n_dim: ExtReal,
) -> Result<CDParams> {
    let (d, n) = (conn.dim(), conn.n);
    if z.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "drift has {} components, expected {d}",
            z.len()
        )));
    }
    let horizontal = z[..n].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let z2: f64 = z[n..].iter().map(|x| x * x).sum();
    if horizontal > 0.0 {
        return Err(Error::NotVertical(format!("horizontal part {horizontal:e}")));
    }
    if z2 == 0.0 {
        return Err(Error::NotVertical("Z = 0".into()));
    }
    let excess = match n_dim {
        ExtReal::Finite(x) if x > n as f64 => x - n as f64,
        ExtReal::PosInf => f64::INFINITY,
        _ => {
            return Err(Error::BadDimension(format!(
                "n = {n_dim} must exceed the horizontal rank {n}"
            )))
        }
    };
    let (_, rho_dv) = finite_constants(k)?;

    // Ric^Z_HV = Ric_HV + sym h(pr_H A1, D_{pr_H A2} Z) + sym v(pr_V A1, R(Z, A2))
    let mut ric_z = k.ric_hv.clone();
    for a in 0..d {
        for b in 0..d {
            let mut extra = 0.0;
            for u in n..d {
                if a < n && b < n {
                    extra += 0.5 * z[u] * (conn.bott[(b, u, a)] + conn.bott[(a, u, b)]);
                }
                if a >= n {
                    extra += 0.5 * z[u] * conn.r[(u, b, a)];
                }
                if b >= n {
                    extra += 0.5 * z[u] * conn.r[(u, a, b)];
                }
            }
            ric_z[(a, b)] += extra;
        }
    }
    let m_hv_z = mixed_bound(&ric_z, n).ok_or(Error::UnboundedConstant("M^Z_HV"))?;

    let w = DMatrix::from_fn(d - n, d - n, |s, t| {
        (n..d).map(|u| z[u] * conn.bott[(n + t, u, n + s)]).sum::<f64>()
    });
    let w_sym = (&w + w.transpose()) * 0.5;
    let n2 = sym_eigenvalues(&w_sym).first().map_or(0.0, |&l| (-l).max(0.0));

    let coupling = m_hv_z + k.m_nabla_v;
    check_c(c, coupling)?;
    Ok(CDParams {
        n_dim,
        rho1: k.rho_h - c.recip(),
        rho20: 0.5 * k.m_r_min * k.m_r_min - c_times(c, coupling) - z2 / excess,
        rho21: 0.5 * rho_dv - k.m_nabla_v * k.m_nabla_v - n2,
        c,
    })
}

/// Norm of the mixed block of a symmetric form whose pure blocks are PSD.
fn mixed_bound(form: &DMatrix<f64>, n: usize) -> Option<f64> {
    let d = form.nrows();
    let psd = |m: DMatrix<f64>| sym_eigenvalues(&m).first().is_none_or(|&l| l >= -1e-10);
    let hh = form.view((0, 0), (n, n)).clone_owned();
    let vv = form.view((n, n), (d - n, d - n)).clone_owned();
    let hv = (form.view((0, n), (n, d - n)) + form.view((n, 0), (d - n, n)).transpose()) * 0.5;
    (psd(hh) && psd(vv)).then(|| spectral_norm(&hv))
}

/// A 2-jet `(p, H)`; `h` is `n x (n + nu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub p: Vec<f64>,
    pub h: DMatrix<f64>,
}

impl Jet2 {
    pub fn zeros(n: usize, nu: usize) -> Self {
        Self {
            p: vec![0.0; n + nu],
            h: DMatrix::zeros(n, n + nu),
        }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            p: self.p.iter().map(|x| x * lambda).collect(),
            h: &self.h * lambda,
        }
    }

    /// Largest violation of the commutation constraint.
    pub fn constraint_residual(&self, conn: &ConnectionData) -> f64 {
        let (n, d) = (conn.n, conn.dim());
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let rhs: f64 = (n..d).map(|s| self.p[s] * conn.r[(i, j, s)]).sum();
                worst = worst.max((self.h[(i, j)] - self.h[(j, i)] - rhs).abs());
            }
        }
        worst
    }

    fn check(&self, conn: &ConnectionData) -> Result<()> {
        let (n, d) = (conn.n, conn.dim());
        if self.p.len() != d || self.h.shape() != (n, d) {
            return Err(Error::DimensionMismatch(format!(
                "jet has p of length {} and H of shape {:?}, expected {d} and ({n}, {d})",
                self.p.len(),
                self.h.shape()
            )));
        }
        let scale = 1.0
            + self.h.amax()
            + self.p.iter().fold(0.0f64, |m, x| m.max(x.abs())).powi(2);
        let res = self.constraint_residual(conn);
        if res > 1e-12 * scale {
            return Err(Error::ConstraintViolated(res));
        }
        Ok(())
    }
}

/// Draws a constrained jet with independent standard normal free entries.
///
/// The draw depends only on `(seed, index)`: the generator is ChaCha8 seeded
/// with `seed` on stream `index`.
pub fn sample_jet(conn: &ConnectionData, seed: u64, index: u64) -> Jet2 {
    let (n, d) = (conn.n, conn.dim());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let p: Vec<f64> = (0..d).map(|_| normal()).collect();
    let mut h = DMatrix::zeros(n, d);
    for i in 0..n {
        for j in i..n {
            let sym = normal();
            let half: f64 = 0.5 * (n..d).map(|s| p[s] * conn.r[(i, j, s)]).sum::<f64>();
            h[(i, j)] = sym + half;
            h[(j, i)] = sym - half;
        }
        for j in n..d {
            h[(i, j)] = normal();
        }
    }
    Jet2 { p, h }
}

/// Γ-calculus quantities of a jet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gamma2Forms {
    pub gamma_h: f64,
    pub gamma_v: f64,
    pub lf: f64,
    /// `Γ₂^{h* + ℓ v*}`.
    pub gamma2: f64,
    /// `Γ₂^{v*}`, only defined when the vertical metric is parallel.
    pub gamma2_v: Option<f64>,
}

/// Assembles Γ₂ of the sub-Laplacian on a jet as the seven-term sum
/// `|H^h|^2 + Ric_H(p,p) + Ric_HV(p,p) + 2 sum H_i(R(A_i, p^h)) + ℓ|H^v|^2
///  + 2ℓ sum (D_i v*)(p, H_i) + ℓ/2 (Δ' v*)(p, p)`.
pub fn gamma2_forms(
    jet: &Jet2,
    conn: &ConnectionData,
    k: &CDConstants,
    ell: f64,
) -> Result<Gamma2Forms> {
    jet.check(conn)?;
    let (n, d) = (conn.n, conn.dim());
    let (p, h) = (&jet.p, &jet.h);

    let gamma_h: f64 = p[..n].iter().map(|x| x * x).sum();
    let gamma_v: f64 = p[n..].iter().map(|x| x * x).sum();
    let lf: f64 = (0..n).map(|i| h[(i, i)]).sum();

    let quad = |m: &DMatrix<f64>| -> f64 {
        let mut v = 0.0;
        for a in 0..d {
            for b in 0..d {
                v += m[(a, b)] * p[a] * p[b];
            }
        }
        v
    };

    let hess_h: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| h[(i, j)].powi(2)).sum();
    let hess_v: f64 = (0..n).flat_map(|i| (n..d).map(move |s| (i, s))).map(|(i, s)| h[(i, s)].powi(2)).sum();
    let mut cross_r = 0.0;
    let mut cross_nv = 0.0;
    for i in 0..n {
        for a in 0..n {
            if p[a] == 0.0 {
                continue;
            }
            for s in n..d {
                cross_r += p[a] * conn.r[(i, a, s)] * h[(i, s)];
            }
        }
        for a in 0..d {
            for b in 0..d {
                cross_nv += conn.nabla_vstar[(i, a, b)] * p[a] * h[(i, b)];
            }
        }
    }

    let gamma2 = hess_h + quad(&k.ric_h) + quad(&k.ric_hv) + 2.0 * cross_r + ell * hess_v
        + 2.0 * ell * cross_nv
        + 0.5 * ell * quad(&conn.delta_vstar);
    let gamma2_v = (k.m_nabla_v <= PARALLEL_TOL).then_some(hess_v);
    Ok(Gamma2Forms {
        gamma_h,
        gamma_v,
        lf,
        gamma2,
        gamma2_v,
    })
}

/// Result of checking one jet against an inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Margin {
    pub margin: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl Margin {
    /// `1 + |lhs| + |rhs|`, the scale for the relative tolerance.
    pub fn scale(&self) -> f64 {
        1.0 + self.lhs.abs() + self.rhs.abs()
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.margin >= -tol * self.scale()
    }

    pub fn relative(&self) -> f64 {
        self.margin / self.scale()
    }
}

/// `Γ₂^{h*+ℓv*} - [(Lf)^2/n + (rho1 - 1/ℓ) Γ^{h*} + (rho20 + ℓ rho21) Γ^{v*}]`.
pub fn verify_cd(
    jet: &Jet2,
    params: &CDParams,
    conn: &ConnectionData,
    k: &CDConstants,
    ell: f64,
) -> Result<Margin> {
    let g = gamma2_forms(jet, conn, k, ell)?;
    let rhs = params.inv_n() * g.lf * g.lf
        + (params.rho1 - 1.0 / ell) * g.gamma_h
        + (params.rho20 + params.rho21 * ell) * g.gamma_v;
    Ok(Margin {
        margin: g.gamma2 - rhs,
        lhs: g.gamma2,
        rhs,
    })
}

fn require_parallel(k: &CDConstants) -> Result<()> {
    if k.m_nabla_v > PARALLEL_TOL {
        return Err(Error::RequiresParallelVerticalMetric(k.m_nabla_v));
    }
    Ok(())
}

/// Margins of the two product inequalities
/// `Γ^{h*}(Γ₂ - (ϱ1 - 1/ℓ)Γ^{h*} - ϱ2 Γ^{v*}) >= Γ^{h*}(Γ^{h*}f)/4` and
/// `Γ^{v*} Γ₂^{v*} >= Γ^{h*}(Γ^{v*}f)/4`, with `ϱ1 = rho_H - 1/c`,
/// `ϱ2 = -c M_HV^2`.
pub fn verify_double_gamma(
    jet: &Jet2,
    conn: &ConnectionData,
    k: &CDConstants,
    c: ExtReal,
    ell: f64,
) -> Result<(Margin, Margin)> {
    require_parallel(k)?;
    let m_hv = k.m_hv.finite().ok_or(Error::UnboundedConstant("M_HV"))?;
    check_c(c, m_hv)?;
    let g = gamma2_forms(jet, conn, k, ell)?;
    let gamma2_v = g.gamma2_v.expect("parallel vertical metric");
    let (n, d) = (conn.n, conn.dim());
    let (p, h) = (&jet.p, &jet.h);

    let varrho1 = k.rho_h - c.recip();
    let varrho2 = -c_times(c, m_hv);
    let mut grad_h = 0.0;
    let mut grad_v = 0.0;
    for i in 0..n {
        let a: f64 = (0..n).map(|j| h[(i, j)] * p[j]).sum();
        let b: f64 = (n..d).map(|s| h[(i, s)] * p[s]).sum();
        grad_h += a * a;
        grad_v += b * b;
    }
    let lhs1 = g.gamma_h * (g.gamma2 - (varrho1 - 1.0 / ell) * g.gamma_h - varrho2 * g.gamma_v);
    let lhs2 = g.gamma_v * gamma2_v;
    Ok((
        Margin {
            margin: lhs1 - grad_h,
            lhs: lhs1,
            rhs: grad_h,
        },
        Margin {
            margin: lhs2 - grad_v,
            lhs: lhs2,
            rhs: grad_v,
        },
    ))
}

/// `Γ^{h*}(f, Γ^{v*}f) - Γ^{v*}(f, Γ^{h*}f)` on a jet.
///
/// The vertical derivatives of `df` are recovered from the horizontal rows
/// through the torsion: `(D_{V_s} df)(A_j) = H[j][n+s] - df(T(V_s, A_j))`.
pub fn condition_b_residual(jet: &Jet2, conn: &ConnectionData, k: &CDConstants) -> Result<f64> {
    require_parallel(k)?;
    jet.check(conn)?;
    let (n, d) = (conn.n, conn.dim());
    let (p, h) = (&jet.p, &jet.h);
    let mut first = 0.0;
    for i in 0..n {
        let inner: f64 = (n..d).map(|s| h[(i, s)] * p[s]).sum();
        first += p[i] * inner;
    }
    let mut second = 0.0;
    for s in n..d {
        let mut inner = 0.0;
        for j in 0..n {
            let torsion_term: f64 = (0..d).map(|m| p[m] * conn.torsion[(s, j, m)]).sum();
            inner += p[j] * (h[(j, s)] - torsion_term);
        }
        second += p[s] * inner;
    }
    Ok(2.0 * first - 2.0 * second)
}

/// Worst case over a batch of sampled jets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerificationSummary {
    pub samples: u64,
    pub seed: u64,
    pub ell: f64,
    pub c: ExtReal,
    pub tol: f64,
    /// Smallest `margin / scale` over the batch.
    pub min_relative_margin: f64,
    /// The margin and scale of the worst jet.
    pub worst: Margin,
    pub worst_index: u64,
    /// Smallest relative margins of the two product inequalities, when the
    /// vertical metric is parallel.
    pub double_gamma: Option<(f64, f64)>,
    /// Largest absolute condition (b) residual, when applicable.
    pub condition_b: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Copy)]
struct Worst {
    rel: f64,
    margin: Margin,
    index: u64,
    dg: Option<(f64, f64)>,
    cb: Option<f64>,
}

impl Worst {
    // deterministic regardless of reduction order: ties go to the lower index
    fn merge(self, other: Worst) -> Worst {
        let primary = if other.rel < self.rel || (other.rel == self.rel && other.index < self.index) {
            Worst { dg: self.dg, cb: self.cb, ..other }
        } else {
            self
        };
        let dg = match (self.dg, other.dg) {
            (Some(a), Some(b)) => Some((a.0.min(b.0), a.1.min(b.1))),
            (a, b) => a.or(b),
        };
        let cb = match (self.cb, other.cb) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        Worst { dg, cb, ..primary }
    }
}

/// Verifies the inequality on `samples` jets drawn by [`sample_jet`] from `seed`.
///
/// Jets are processed in parallel; the summary depends only on the inputs.
pub fn verify_jets(
    conn: &ConnectionData,
    k: &CDConstants,
    c: ExtReal,
    ell: f64,
    samples: u64,
    seed: u64,
    tol: f64,
) -> Result<VerificationSummary> {
    use rayon::prelude::*;
    if samples == 0 {
        return Err(Error::BadParam("need at least one sample".into()));
    }
    let params = cd_parameters(k, c, None)?;
    let parallel = k.m_nabla_v <= PARALLEL_TOL;
    let m_hv_finite = k.m_hv.finite().is_some_and(|m| m == 0.0 || c.is_finite());
    let worst = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<Worst> {
            let jet = sample_jet(conn, seed, i);
            let m = verify_cd(&jet, &params, conn, k, ell)?;
            let (dg, cb) = if parallel && m_hv_finite {
                let (m1, m2) = verify_double_gamma(&jet, conn, k, c, ell)?;
                let r = condition_b_residual(&jet, conn, k)?;
                (Some((m1.relative(), m2.relative())), Some(r.abs()))
            } else {
                (None, None)
            };
            Ok(Worst {
                rel: m.relative(),
                margin: m,
                index: i,
                dg,
                cb,
            })
        })
        .try_reduce_with(|a, b| Ok(a.merge(b)))
        .expect("at least one sample")?;
    let dg_ok = worst.dg.is_none_or(|(a, b)| a >= -tol && b >= -tol);
    let cb_ok = worst.cb.is_none_or(|r| r <= 1e-12);
    Ok(VerificationSummary {
        samples,
        seed,
        ell,
        c,
        tol,
        min_relative_margin: worst.rel,
        worst: worst.margin,
        worst_index: worst.index,
        double_gamma: worst.dg,
        condition_b: worst.cb,
        passed: worst.rel >= -tol && dg_ok && cb_ok,
    })
}

/// Result of the search for the free constant `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct COptimum {
    pub c: ExtReal,
    pub value: f64,
}

const LOG_C_MIN: f64 = -6.0;
const LOG_C_MAX: f64 = 6.0;
const PRESCAN: usize = 121;
const GOLDEN_ITERS: usize = 200;

/// Maximizes `objective(cd_parameters(k, c))` over `c`.
///
/// A coarse scan of `log10 c` on `[-6, 6]` brackets the best grid point, then
/// golden-section search refines it. Points where the objective is `None`
/// count as `-inf`. Ties go to the larger `c`; `c = inf` is compared last
/// when admissible. Returns `None` if no `c` is feasible.
pub fn optimize_c(
    k: &CDConstants,
    n_dim: Option<ExtReal>,
    objective: impl Fn(&CDParams) -> Option<f64>,
) -> Result<Option<COptimum>> {
    // surface NotNormalized / UnboundedConstant before searching
    cd_parameters(k, ExtReal::Finite(1.0), n_dim)?;
    let eval = |x: f64| -> f64 {
        cd_parameters(k, ExtReal::Finite(10f64.powf(x)), n_dim)
            .ok()
            .and_then(|p| objective(&p))
            .filter(|v| !v.is_nan())
            .unwrap_or(f64::NEG_INFINITY)
    };

    let step = (LOG_C_MAX - LOG_C_MIN) / (PRESCAN - 1) as f64;
    let grid: Vec<f64> = (0..PRESCAN).map(|i| LOG_C_MIN + step * i as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&x| eval(x)).collect();
    let mut best_i = 0;
    for i in 1..PRESCAN {
        if values[i] >= values[best_i] {
            best_i = i;
        }
    }

    let mut best = (grid[best_i], values[best_i]);
    if values[best_i] > f64::NEG_INFINITY {
        let mut lo = grid[best_i.saturating_sub(1)];
        let mut hi = grid[(best_i + 1).min(PRESCAN - 1)];
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let (mut f1, mut f2) = (eval(x1), eval(x2));
        for _ in 0..GOLDEN_ITERS {
            if f1 > f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = eval(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = eval(x2);
            }
        }
        for (x, f) in [(x1, f1), (x2, f2)] {
            if f > best.1 || (f == best.1 && x > best.0) {
                best = (x, f);
            }
        }
    }

    let mut result = (best.1 > f64::NEG_INFINITY).then(|| COptimum {
        c: ExtReal::Finite(10f64.powf(best.0)),
        value: best.1,
    });
    if let Ok(p) = cd_parameters(k, ExtReal::PosInf, n_dim) {
        if let Some(v) = objective(&p).filter(|v| !v.is_nan()) {
            if result.is_none_or(|r| v >= r.value) {
                result = Some(COptimum {
                    c: ExtReal::PosInf,
                    value: v,
                });
            }
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{adapted_orthonormal_frame, build_example};

    fn setup(spec: &str) -> (ConnectionData, CDConstants) {
        let s = adapted_orthonormal_frame(&build_example(spec).unwrap()).unwrap();
        let conn = ConnectionData::compute(&s).unwrap();
        let k = CDConstants::compute(&conn).unwrap();
        (conn, k)
    }

    #[test]
    fn heisenberg_pure_vertical_jet_by_hand() {
        let (conn, k) = setup("heisenberg");
        let mut jet = Jet2::zeros(2, 1);
        jet.p[2] = 1.0;
        jet.h[(0, 1)] = 0.5;
        jet.h[(1, 0)] = -0.5;
        for ell in [0.1, 1.0, 7.0] {
            let g = gamma2_forms(&jet, &conn, &k, ell).unwrap();
            assert_eq!((g.gamma_h, g.gamma_v, g.lf), (0.0, 1.0, 0.0));
            assert!((g.gamma2 - 0.5).abs() < 1e-15, "{}", g.gamma2);
        }
    }

    #[test]
    fn zero_jet_has_zero_everything() {
        let (conn, k) = setup("sl2c");
        let jet = Jet2::zeros(4, 2);
        let g = gamma2_forms(&jet, &conn, &k, 1.0).unwrap();
        assert_eq!((g.gamma_h, g.gamma_v, g.lf, g.gamma2), (0.0, 0.0, 0.0, 0.0));
        let params = cd_parameters(&k, ExtReal::PosInf, None).unwrap();
        assert_eq!(verify_cd(&jet, &params, &conn, &k, 1.0).unwrap().margin, 0.0);
        let (m1, m2) = verify_double_gamma(&jet, &conn, &k, ExtReal::PosInf, 1.0).unwrap();
        assert_eq!((m1.margin, m2.margin), (0.0, 0.0));
        assert_eq!(condition_b_residual(&jet, &conn, &k).unwrap(), 0.0);
    }

    #[test]
    fn unconstrained_jet_is_rejected() {
        let (conn, k) = setup("heisenberg");
        let mut jet = Jet2::zeros(2, 1);
        jet.p[2] = 1.0;
        assert!(matches!(
            gamma2_forms(&jet, &conn, &k, 1.0),
            Err(Error::ConstraintViolated(_))
        ));
    }

    #[test]
    fn sampling_is_deterministic_and_constrained() {
        let (conn, _) = setup("su2-double-v1");
        let a = sample_jet(&conn, 0, 5);
        assert_eq!(a, sample_jet(&conn, 0, 5));
        assert_ne!(a, sample_jet(&conn, 0, 6));
        assert_ne!(a, sample_jet(&conn, 1, 5));
        assert!(a.constraint_residual(&conn) <= 1e-14);
    }

    #[test]
    fn v2_parameters_at_infinite_c() {
        let (_, k) = setup("su2-double-v2");
        let p = cd_parameters(&k, ExtReal::PosInf, None).unwrap();
        assert_eq!(p.n_dim, ExtReal::Finite(3.0));
        assert!((p.rho1 - 4.0).abs() < 1e-12);
        assert!((p.rho20 - 0.25).abs() < 1e-12);
        assert!(p.rho21.abs() < 1e-12);
    }

    #[test]
    fn infinite_c_needs_zero_coupling() {
        let (_, k) = setup("su2-double-v1");
        assert!(matches!(
            cd_parameters(&k, ExtReal::PosInf, None),
            Err(Error::BadParam(_))
        ));
        assert!(cd_parameters(&k, ExtReal::Finite(0.0), None).is_err());
    }

    #[test]
    fn unnormalized_structure_is_refused() {
        let s = build_example("su2-double-v2").unwrap().with_scaled_gram_v(2.0);
        let s = adapted_orthonormal_frame(&s).unwrap();
        let conn = ConnectionData::compute(&s).unwrap();
        let k = CDConstants::compute(&conn).unwrap();
        assert!(matches!(
            cd_parameters(&k, ExtReal::PosInf, None),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn drift_must_be_vertical_and_nonzero() {
        let (conn, k) = setup("heisenberg");
        let three = ExtReal::Finite(3.0);
        let err = |z: &[f64], n| drifted_cd_parameters(&k, &conn, z, ExtReal::PosInf, n).unwrap_err();
        assert!(matches!(err(&[0.0, 0.0, 0.0], three), Error::NotVertical(_)));
        assert!(matches!(err(&[1.0, 0.0, 1.0], three), Error::NotVertical(_)));
        assert!(matches!(err(&[0.0, 0.0, 1.0], ExtReal::Finite(2.0)), Error::BadDimension(_)));
    }

    #[test]
    fn heisenberg_drift_by_hand() {
        let (conn, k) = setup("heisenberg");
        let p = drifted_cd_parameters(&k, &conn, &[0.0, 0.0, 1.0], ExtReal::PosInf, ExtReal::Finite(3.0))
            .unwrap();
        assert!((p.rho20 - (0.5 - 1.0)).abs() < 1e-15);
        assert_eq!(p.rho21, 0.0);
        assert_eq!(p.rho1, 0.0);
    }

    #[test]
    fn optimizer_prefers_infinity_when_free() {
        let (_, k) = setup("su2-double-v2");
        let best = optimize_c(&k, None, |p| Some(p.rho1)).unwrap().unwrap();
        assert_eq!(best.c, ExtReal::PosInf);
    }

    #[test]
    fn optimizer_finds_interior_maximum() {
        let (_, k) = setup("su2-double-v1");
        // rho1 + rho20 = rho_H - 1/c + 1/4 - (9/4) c peaks at c = 2/3
        let best = optimize_c(&k, None, |p| Some(p.rho1 + p.rho20)).unwrap().unwrap();
        let c = best.c.finite().unwrap();
        assert!((c - 2.0 / 3.0).abs() < 1e-6, "{c}");
    }
}
