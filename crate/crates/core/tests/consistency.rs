//! Internal identities of the connection and invariance of the constants.

mod common;

use common::{framed, framed_structure, random_block_rotation, CATALOG};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use srcd_core::liealg::{adapted_orthonormal_frame, build_example};

#[test]
fn torsion_is_minus_curvature_plus_cocurvature() {
    for spec in CATALOG {
        let f = framed(spec);
        let d = f.conn.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let expect = -(f.conn.r[(i, j, k)] + f.conn.rbar[(i, j, k)]);
                    worst = worst.max((f.conn.torsion[(i, j, k)] - expect).abs());
                }
            }
        }
        assert!(worst <= 1e-12, "{spec}: {worst}");
    }
}

#[test]
fn levi_civita_is_metric_and_torsion_free() {
    for spec in CATALOG {
        let f = framed(spec);
        let d = f.conn.dim();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    assert!((f.conn.lc[(i, j, k)] + f.conn.lc[(i, k, j)]).abs() <= 1e-12);
                    let tf = f.conn.lc[(i, j, k)] - f.conn.lc[(j, i, k)] - f.s.c[(i, j, k)];
                    assert!(tf.abs() <= 1e-12, "{spec}");
                }
            }
        }
    }
}

#[test]
fn curvature_skew_on_horizontal_and_bianchi_correction() {
    for spec in CATALOG {
        let f = framed(spec);
        assert!(f.conn.horizontal_skew_defect() <= 1e-12, "{spec}");
        assert!(f.conn.bianchi_defect() <= 1e-12, "{spec}: {}", f.conn.bianchi_defect());
    }
}

#[test]
fn catalog_complements_are_metric_preserving() {
    for spec in CATALOG {
        let f = framed(spec);
        assert!(f.conn.is_metric_preserving(1e-12), "{spec}");
        assert!(f.conn.nabla_hstar.max_abs() <= 1e-12);
        assert!(f.conn.drift.iter().all(|x| x.abs() <= 1e-12), "{spec}");
        assert!(f.conn.mean_curv.iter().all(|x| x.abs() <= 1e-12), "{spec}");
    }
}

#[test]
fn constants_are_rotation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for spec in CATALOG {
        let base = framed(spec);
        for _ in 0..10 {
            let b = random_block_rotation(base.s.n, base.s.nu, &mut rng);
            let rotated = framed_structure(&base.s.change_basis(&b).unwrap());
            let (k0, k1) = (&base.k, &rotated.k);
            let diffs = [
                k0.m_r_max - k1.m_r_max,
                k0.m_r_min - k1.m_r_min,
                k0.rho_h - k1.rho_h,
                k0.m_hv.to_f64() - k1.m_hv.to_f64(),
                k0.m_nabla_v - k1.m_nabla_v,
                k0.rho_delta_v.to_f64() - k1.rho_delta_v.to_f64(),
            ];
            for d in diffs {
                assert!(d.abs() <= 1e-10, "{spec}: drift {d}");
            }
            let (s0, s1) = (k0.ric_h_spectrum(), k1.ric_h_spectrum());
            for (a, b) in s0.iter().zip(&s1) {
                assert!((a - b).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn general_gram_matrices_frame_to_the_same_constants() {
    // a non-orthonormal presentation of the same structure
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let base = framed("sl2c");
    let b = random_block_rotation(4, 2, &mut rng);
    let mut skew = b.clone();
    for i in 0..6 {
        skew[(i, i)] *= 1.0 + 0.1 * i as f64;
    }
    let other = base.s.change_basis(&skew).unwrap();
    assert!(other.frame_defect() > 1e-3);
    let again = framed_structure(&other);
    assert!((again.k.rho_h - base.k.rho_h).abs() <= 1e-10);
    assert!((again.k.m_r_min - base.k.m_r_min).abs() <= 1e-10);
}

#[test]
fn framing_is_idempotent() {
    for spec in CATALOG {
        let once = adapted_orthonormal_frame(&build_example(spec).unwrap()).unwrap();
        let twice = adapted_orthonormal_frame(&once).unwrap();
        assert!(once.c.max_abs_diff(&twice.c) <= 1e-12);
    }
}
