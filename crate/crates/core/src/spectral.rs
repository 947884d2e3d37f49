//! Spectral-gap lower bounds and an exact eigenvalue oracle for compact
//! su(2)-type examples.

use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;
use serde::Serialize;

use crate::cdcore::{cd_parameters, optimize_c, CDParams};
use crate::connection::ConnectionData;
use crate::error::{Error, Result};
use crate::invariants::{privileged_step2, CDConstants};
use crate::liealg::{adapted_orthonormal_frame, CompactForm, LieSRStructure};
use crate::numeric::ExtReal;

type C64 = Complex<f64>;

const PARALLEL_TOL: f64 = 1e-12;
/// Largest admissible `2 j_max`.
pub const TWO_J_MAX_LIMIT: u32 = 25;
const ZERO_EIG: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapSource {
    Prop41,
    KappaCorollary,
    Step2Privileged,
}

/// Lower bound for `-lambda` over nonzero eigenvalues `lambda` of the sub-Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapBound {
    pub bound: f64,
    pub k2: f64,
    pub c_opt: ExtReal,
    pub kappa: Option<f64>,
    /// Privileged constant, step-2 path only.
    pub b: Option<f64>,
    pub source: GapSource,
}

fn prop41_value(p: &CDParams) -> Option<f64> {
    if p.rho20 <= 0.0 {
        return None;
    }
    let k2 = (-p.rho21).max(0.0);
    // n rho20 / (n + rho20 (n - 1)), with the n = inf limit rho20 / (1 + rho20)
    let factor = match p.n_dim {
        ExtReal::Finite(n) => n * p.rho20 / (n + p.rho20 * (n - 1.0)),
        _ => p.rho20 / (1.0 + p.rho20),
    };
    Some(factor * (p.rho1 - k2 / p.rho20))
}

/// `n rho20 / (n + rho20 (n-1)) * (rho1 - k2 / rho20)` with `k2 = max(0, -rho21)`.
pub fn gap_bound_prop41(params: &CDParams) -> Result<GapBound> {
    let bound = prop41_value(params).ok_or(Error::NonPositiveRho20(params.rho20))?;
    Ok(GapBound {
        bound,
        k2: (-params.rho21).max(0.0),
        c_opt: params.c,
        kappa: None,
        b: None,
        source: GapSource::Prop41,
    })
}

/// The Prop41 bound maximized over the free constant `c`.
pub fn gap_bound_prop41_optimized(k: &CDConstants, n_dim: Option<ExtReal>) -> Result<GapBound> {
    match optimize_c(k, n_dim, prop41_value)? {
        Some(best) => gap_bound_prop41(&cd_parameters(k, best.c, n_dim)?),
        None => {
            // report rho20 at the c that makes it largest
            let p = cd_parameters(k, ExtReal::Finite(10f64.powf(-6.0)), n_dim)?;
            Err(Error::NonPositiveRho20(p.rho20))
        }
    }
}

/// `(2 kappa / (2 M_HV + m_R sqrt(2 rho_H + 2 kappa (n-1)/n)))^2` with
/// `kappa = rho_H m_R^2 / 2 - M_HV^2`.
pub fn gap_bound_kappa(k: &CDConstants, n_dim: Option<ExtReal>) -> Result<GapBound> {
    if k.m_nabla_v > PARALLEL_TOL {
        return Err(Error::RequiresParallelMetric(k.m_nabla_v));
    }
    if (k.m_r_max - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(k.m_r_max));
    }
    let m_hv = k.m_hv.finite().ok_or(Error::UnboundedConstant("M_HV"))?;
    let kappa = 0.5 * k.rho_h * k.m_r_min * k.m_r_min - m_hv * m_hv;
    if kappa <= 0.0 {
        return Err(Error::NonPositiveKappa(kappa));
    }
    let ratio = match n_dim.unwrap_or(ExtReal::Finite(k.n as f64)) {
        ExtReal::Finite(n) => (n - 1.0) / n,
        _ => 1.0,
    };
    let denom = 2.0 * m_hv + k.m_r_min * (2.0 * k.rho_h + 2.0 * kappa * ratio).sqrt();
    // the corollary is the closed form of the Prop41 optimum; echo the c achieving it
    let c_opt = optimize_c(k, n_dim, prop41_value)?.map_or(ExtReal::PosInf, |best| best.c);
    Ok(GapBound {
        bound: (2.0 * kappa / denom).powi(2),
        k2: 0.0,
        c_opt,
        kappa: Some(kappa),
        b: None,
        source: GapSource::KappaCorollary,
    })
}

/// `n rho_H / (n (2 b^2 + 1) - 1)` for a step-2 structure with its privileged metric.
pub fn gap_bound_step2(s: &LieSRStructure) -> Result<GapBound> {
    let (b, privileged) = privileged_step2(s)?;
    let framed = adapted_orthonormal_frame(&privileged)?;
    let conn = ConnectionData::compute(&framed)?;
    let k = CDConstants::compute(&conn)?;
    let m_hv = k.m_hv.finite().ok_or(Error::UnboundedConstant("M_HV"))?;
    if k.m_nabla_v > PARALLEL_TOL || m_hv > PARALLEL_TOL {
        return Err(Error::RequiresParallelMetric(k.m_nabla_v.max(m_hv)));
    }
    if k.rho_h <= 0.0 {
        return Err(Error::NonPositiveRhoH(k.rho_h));
    }
    let n = s.n as f64;
    Ok(GapBound {
        bound: n * k.rho_h / (n * (2.0 * b * b + 1.0) - 1.0),
        k2: 0.0,
        c_opt: ExtReal::PosInf,
        kappa: None,
        b: Some(b),
        source: GapSource::Step2Privileged,
    })
}

/// Spin matrices `(J_x, J_y, J_z)` of spin `two_j / 2` in the basis `m = j, j-1, ..., -j`.
pub fn spin_matrices(two_j: u32) -> [DMatrix<C64>; 3] {
    let d = two_j as usize + 1;
    let j = two_j as f64 / 2.0;
    let m = |k: usize| j - k as f64;
    let mut plus = DMatrix::<C64>::zeros(d, d);
    for k in 1..d {
        // <m+1| J+ |m> with m = m(k)
        plus[(k - 1, k)] = C64::new((j * (j + 1.0) - m(k) * (m(k) + 1.0)).sqrt(), 0.0);
    }
    let minus = plus.adjoint();
    let jx = (&plus + &minus) * C64::new(0.5, 0.0);
    let jy = (&plus - &minus) * C64::new(0.0, -0.5);
    let jz = DMatrix::from_fn(d, d, |a, b| if a == b { C64::new(m(a), 0.0) } else { C64::new(0.0, 0.0) });
    [jx, jy, jz]
}

fn pauli() -> [DMatrix<C64>; 3] {
    let c = |re: f64, im: f64| C64::new(re, im);
    [
        DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
        DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
        DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
    ]
}

/// Coordinates `x` with `e = sum_a x_a (-i/2) sigma_a` for a 2x2 block of su(2).
fn su2_coords(e: &DMatrix<C64>) -> Result<[f64; 3]> {
    let sig = pauli();
    let mut x = [0.0; 3];
    let mut rebuilt = DMatrix::<C64>::zeros(2, 2);
    for a in 0..3 {
        let t = (e * &sig[a]).trace() * C64::new(0.0, 1.0);
        x[a] = t.re;
        rebuilt += &sig[a] * C64::new(0.0, -0.5 * t.re);
    }
    let defect = (&rebuilt - e).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if defect > 1e-9 * (1.0 + e.iter().fold(0.0f64, |m, z| m.max(z.norm()))) {
        return Err(Error::UnsupportedAlgebra(format!(
            "generator block is not in su(2) (defect {defect:e})"
        )));
    }
    Ok(x)
}

/// `dpi_j(sum x_a A_a) = -i sum x_a J_a`.
fn spin_image(x: &[f64; 3], spins: &[DMatrix<C64>; 3]) -> DMatrix<C64> {
    let d = spins[0].nrows();
    let mut out = DMatrix::<C64>::zeros(d, d);
    for a in 0..3 {
        out += &spins[a] * C64::new(0.0, -x[a]);
    }
    out
}

/// Eigenvalues of the sub-Laplacian on one irreducible representation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrrepBlock {
    /// `2j` per factor.
    pub two_j: Vec<u32>,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSpectrum {
    pub two_j_max: u32,
    pub blocks: Vec<IrrepBlock>,
    /// Distinct nonzero eigenvalues, descending (closest to zero first).
    pub nonzero: Vec<f64>,
    /// Smallest magnitude of a nonzero eigenvalue.
    pub gap: f64,
}

/// Exact spectrum of `sum A_i^2` on every irrep with spins up to `two_j_max / 2`.
///
/// Left-invariant fields act on matrix coefficients of an irrep through the
/// differential, so the operator is block diagonal over irreps.
pub fn irrep_spectrum_oracle(s: &LieSRStructure, two_j_max: u32) -> Result<OracleSpectrum> {
    if two_j_max > TWO_J_MAX_LIMIT {
        return Err(Error::BadParam(format!(
            "j_max = {} exceeds {}",
            two_j_max as f64 / 2.0,
            TWO_J_MAX_LIMIT as f64 / 2.0
        )));
    }
    let compact = s
        .compact
        .ok_or_else(|| Error::UnsupportedAlgebra(format!("`{}` declares no compact form", s.name)))?;
    let framed = adapted_orthonormal_frame(s)?;
    let conn = ConnectionData::compute(&framed)?;
    let real = framed
        .realization
        .as_ref()
        .ok_or_else(|| Error::NoRealization(s.name.clone()))?;
    let n = framed.n;
    let gens: Vec<DMatrix<C64>> = (0..n)
        .map(|i| DMatrix::from_fn(real.dim, real.dim, |a, b| C64::new(real.re[i][(a, b)], real.im[i][(a, b)])))
        .collect();

    let factors = match compact {
        CompactForm::Su2 => 1,
        CompactForm::Su2Pair => 2,
    };
    if real.dim != 2 * factors {
        return Err(Error::UnsupportedAlgebra(format!(
            "expected a {}x{} realization, got {}x{}",
            2 * factors,
            2 * factors,
            real.dim,
            real.dim
        )));
    }
    // coordinates of each horizontal generator in each factor
    let coords: Vec<Vec<[f64; 3]>> = gens
        .iter()
        .map(|g| {
            (0..factors)
                .map(|f| su2_coords(&g.view((2 * f, 2 * f), (2, 2)).clone_owned()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    // the frame sum is only self-adjoint without first-order part
    let drift_max = conn.drift.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if drift_max > 1e-12 {
        return Err(Error::UnsupportedAlgebra(format!(
            "sub-Laplacian has drift {drift_max:e}; the oracle needs a symmetric operator"
        )));
    }

    let labels: Vec<Vec<u32>> = match factors {
        1 => (1..=two_j_max).map(|j| vec![j]).collect(),
        _ => (0..=two_j_max)
            .flat_map(|a| (0..=two_j_max).map(move |b| vec![a, b]))
            .filter(|v| v.iter().any(|&j| j > 0))
            .collect(),
    };

    let mut blocks: Vec<IrrepBlock> = labels
        .par_iter()
        .map(|two_j| {
            let spins: Vec<[DMatrix<C64>; 3]> = two_j.iter().map(|&j| spin_matrices(j)).collect();
            let image = |i: usize| -> DMatrix<C64> {
                let parts: Vec<DMatrix<C64>> = (0..factors).map(|f| spin_image(&coords[i][f], &spins[f])).collect();
                if factors == 1 {
                    parts[0].clone()
                } else {
                    let id0 = DMatrix::<C64>::identity(parts[0].nrows(), parts[0].nrows());
                    let id1 = DMatrix::<C64>::identity(parts[1].nrows(), parts[1].nrows());
                    parts[0].kronecker(&id1) + id0.kronecker(&parts[1])
                }
            };
            let images: Vec<DMatrix<C64>> = (0..n).map(image).collect();
            let dim = images[0].nrows();
            let mut op = DMatrix::<C64>::zeros(dim, dim);
            for m in &images {
                op += m * m;
            }
            let mut eigenvalues: Vec<f64> = op.symmetric_eigenvalues().iter().copied().collect();
            eigenvalues.sort_by(|a, b| a.total_cmp(b));
            IrrepBlock {
                two_j: two_j.clone(),
                eigenvalues,
            }
        })
        .collect();
    blocks.sort_by(|a, b| a.two_j.cmp(&b.two_j));

    let mut nonzero: Vec<f64> = blocks
        .iter()
        .flat_map(|b| b.eigenvalues.iter().copied())
        .filter(|l| l.abs() > ZERO_EIG)
        .collect();
    nonzero.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    nonzero.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
    let gap = nonzero
        .first()
        .map(|l| l.abs())
        .ok_or(Error::JMaxTooSmall(two_j_max as f64 / 2.0))?;
    Ok(OracleSpectrum {
        two_j_max,
        blocks,
        nonzero,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::build_example;

    fn constants(spec: &str) -> CDConstants {
        let s = adapted_orthonormal_frame(&build_example(spec).unwrap()).unwrap();
        CDConstants::compute(&ConnectionData::compute(&s).unwrap()).unwrap()
    }

    #[test]
    fn spin_half_is_half_pauli() {
        let j = spin_matrices(1);
        let p = pauli();
        for a in 0..3 {
            assert!((&j[a] * C64::new(2.0, 0.0) - &p[a]).iter().all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn spin_casimir() {
        for two_j in 0..8u32 {
            let [x, y, z] = spin_matrices(two_j);
            let cas = &x * &x + &y * &y + &z * &z;
            let j = two_j as f64 / 2.0;
            let id = DMatrix::<C64>::identity(cas.nrows(), cas.nrows()) * C64::new(j * (j + 1.0), 0.0);
            assert!((cas - id).iter().all(|w| w.norm() < 1e-12));
        }
    }

    #[test]
    fn v2_prop41_at_infinite_c() {
        let k = constants("su2-double-v2");
        let p = cd_parameters(&k, ExtReal::PosInf, None).unwrap();
        let g = gap_bound_prop41(&p).unwrap();
        assert!((g.bound - 6.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn zero_rho20_is_an_error() {
        let p = CDParams {
            n_dim: ExtReal::Finite(3.0),
            rho1: 1.0,
            rho20: 0.0,
            rho21: 0.0,
            c: ExtReal::PosInf,
        };
        assert!(matches!(gap_bound_prop41(&p), Err(Error::NonPositiveRho20(_))));
    }

    #[test]
    fn kappa_refuses_flat_and_negative() {
        assert!(matches!(
            gap_bound_kappa(&constants("free-step2:n=3"), None),
            Err(Error::NonPositiveKappa(_))
        ));
        assert!(matches!(
            gap_bound_kappa(&constants("sl2c"), None),
            Err(Error::NonPositiveKappa(_))
        ));
    }

    #[test]
    fn hopf_spin_half_block() {
        let o = irrep_spectrum_oracle(&build_example("su2-hopf").unwrap(), 1).unwrap();
        assert_eq!(o.blocks.len(), 1);
        let e = &o.blocks[0].eigenvalues;
        assert!((e[0] + 1.0).abs() < 1e-12 && (e[1] + 1.0).abs() < 1e-12, "{e:?}");
        assert!((o.gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_needs_compact_form() {
        assert!(matches!(
            irrep_spectrum_oracle(&build_example("sl2c").unwrap(), 3),
            Err(Error::UnsupportedAlgebra(_))
        ));
        assert!(matches!(
            irrep_spectrum_oracle(&build_example("su2-hopf").unwrap(), 26),
            Err(Error::BadParam(_))
        ));
        assert!(matches!(
            irrep_spectrum_oracle(&build_example("su2-hopf").unwrap(), 0),
            Err(Error::JMaxTooSmall(_))
        ));
    }
}
