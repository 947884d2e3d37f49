//! Γ₂ computed from actual functions on the group, compared with the jet formula.
//!
//! For `f(g) = tr(M rho(g))` every word in the left-invariant fields acts by
//! right multiplication, `X_1 ... X_k f (e) = tr(M E_{X_1} ... E_{X_k})`, so
//! `Γ₂ = L Γ(f,f)/2 - Γ(f, Lf)` at the identity is a finite matrix sum.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use srcd_core::cdcore::{gamma2_forms, Jet2};
use srcd_core::invariants::CDConstants;
use srcd_core::liealg::{adapted_orthonormal_frame, build_example};
use srcd_core::ConnectionData;

struct Setup {
    conn: ConnectionData,
    k: CDConstants,
    gens: Vec<DMatrix<f64>>,
}

fn setup(spec: &str) -> Setup {
    let s = adapted_orthonormal_frame(&build_example(spec).unwrap()).unwrap();
    let gens = s.realization.as_ref().unwrap().realified_all();
    let conn = ConnectionData::compute(&s).unwrap();
    let k = CDConstants::compute(&conn).unwrap();
    Setup { conn, k, gens }
}

/// Exact Γ₂^{h* + ℓ v*}(f) at the identity and the 2-jet of `f` there.
fn direct(st: &Setup, m: &DMatrix<f64>, ell: f64) -> (f64, Jet2) {
    let (n, d) = (st.conn.n, st.conn.dim());
    let e = &st.gens;
    let u = |w: &DMatrix<f64>| (m * w).trace();
    let weight = |x: usize| if x < n { 1.0 } else { ell };
    let drift = &st.conn.drift;

    // L as an operator on words: W -> sum_i E_i E_i W... applied on the right of f
    let lap = |w: &DMatrix<f64>| -> DMatrix<f64> {
        let mut out = DMatrix::zeros(w.nrows(), w.ncols());
        for i in 0..n {
            out += w * &e[i] * &e[i];
        }
        for (kk, dk) in drift.iter().enumerate() {
            out += w * &e[kk] * *dk;
        }
        out
    };
    let id = DMatrix::identity(m.nrows(), m.ncols());

    let mut half_l_gamma = 0.0;
    let mut gamma_f_lf = 0.0;
    for x in 0..d {
        let ux = u(&e[x]);
        let mut l_sq = 0.0;
        for i in 0..n {
            let uix = u(&(&e[i] * &e[x]));
            let uiix = u(&(&e[i] * &e[i] * &e[x]));
            l_sq += 2.0 * uix * uix + 2.0 * ux * uiix;
        }
        for (kk, dk) in drift.iter().enumerate() {
            l_sq += dk * 2.0 * ux * u(&(&e[kk] * &e[x]));
        }
        half_l_gamma += 0.5 * weight(x) * l_sq;
        gamma_f_lf += weight(x) * ux * u(&(&e[x] * lap(&id)));
    }

    let p: Vec<f64> = (0..d).map(|j| u(&e[j])).collect();
    let h = DMatrix::from_fn(n, d, |i, j| {
        u(&(&e[i] * &e[j])) - (0..d).map(|kk| st.conn.bott[(i, j, kk)] * p[kk]).sum::<f64>()
    });
    (half_l_gamma - gamma_f_lf, Jet2 { p, h })
}

fn check(spec: &str) {
    let st = setup(spec);
    let dim = st.gens[0].nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..20 {
        let m = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
        for ell in [0.3, 1.0, 4.0] {
            let (exact, jet) = direct(&st, &m, ell);
            let g = gamma2_forms(&jet, &st.conn, &st.k, ell).unwrap();
            let scale = 1.0 + exact.abs();
            assert!(
                (g.gamma2 - exact).abs() <= 1e-10 * scale,
                "{spec} trial {trial} ell {ell}: jet {} direct {exact}",
                g.gamma2
            );
        }
    }
}

#[test]
fn heisenberg_gamma2_matches_functions() {
    check("heisenberg");
}

#[test]
fn hopf_gamma2_matches_functions() {
    check("su2-hopf");
}

#[test]
fn double_v1_gamma2_matches_functions() {
    check("su2-double-v1");
}

#[test]
fn double_v2_gamma2_matches_functions() {
    check("su2-double-v2");
}

#[test]
fn sl2c_gamma2_matches_functions() {
    check("sl2c");
}

#[test]
fn double_v1_with_other_rho_matches_functions() {
    check("su2-double-v1:rho=2.5");
}
