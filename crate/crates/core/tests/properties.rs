mod common;

use common::{framed, random_block_rotation, CATALOG};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use srcd_core::cdcore::{cd_parameters, gamma2_forms, sample_jet, verify_cd, CDParams};
use srcd_core::invariants::CDConstants;
use srcd_core::liealg::{growth_flag, LieSRStructure};
use srcd_core::spectral::gap_bound_prop41;
use srcd_core::{ConnectionData, ExtReal, Tensor3};

fn catalog() -> impl Strategy<Value = &'static str> {
    prop::sample::select(CATALOG.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn margin_is_quadratic_in_the_jet(spec in catalog(), seed in any::<u64>(), lambda in 0.01f64..100.0, ell in 0.05f64..20.0) {
        let f = framed(spec);
        let params = cd_parameters(&f.k, ExtReal::Finite(1.0), None).unwrap();
        let jet = sample_jet(&f.conn, seed, 0);
        let m1 = verify_cd(&jet, &params, &f.conn, &f.k, ell).unwrap();
        let m2 = verify_cd(&jet.scaled(lambda), &params, &f.conn, &f.k, ell).unwrap();
        let expect = lambda * lambda * m1.margin;
        prop_assert!((m2.margin - expect).abs() <= 1e-10 * (m2.scale()));
    }

    #[test]
    fn sampled_margins_are_nonnegative(spec in catalog(), seed in any::<u64>(), log_ell in -2.0f64..2.0, log_c in -3.0f64..3.0) {
        let f = framed(spec);
        let params = cd_parameters(&f.k, ExtReal::Finite(10f64.powf(log_c)), None).unwrap();
        for i in 0..32 {
            let jet = sample_jet(&f.conn, seed, i);
            let m = verify_cd(&jet, &params, &f.conn, &f.k, 10f64.powf(log_ell)).unwrap();
            prop_assert!(m.holds(1e-9), "{} {:?}", spec, m);
        }
    }

    #[test]
    fn parameters_are_monotone_in_c(spec in catalog(), a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let f = framed(spec);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let p_lo = cd_parameters(&f.k, ExtReal::Finite(10f64.powf(lo)), None).unwrap();
        let p_hi = cd_parameters(&f.k, ExtReal::Finite(10f64.powf(hi)), None).unwrap();
        prop_assert!(p_hi.rho1 >= p_lo.rho1);
        prop_assert!(p_hi.rho20 <= p_lo.rho20);
        prop_assert_eq!(p_hi.rho21, p_lo.rho21);
    }

    #[test]
    fn large_ell_recovers_the_vertical_inequality(spec in catalog(), seed in any::<u64>()) {
        let f = framed(spec);
        let params = cd_parameters(&f.k, ExtReal::Finite(1.0), None).unwrap();
        let ell = 1e6;
        let jet = sample_jet(&f.conn, seed, 0);
        let m = verify_cd(&jet, &params, &f.conn, &f.k, ell).unwrap();
        let g = gamma2_forms(&jet, &f.conn, &f.k, ell).unwrap();
        let limit = g.gamma2_v.unwrap() - params.rho21 * g.gamma_v;
        prop_assert!((m.margin / ell - limit).abs() <= 1e-3 * (1.0 + limit.abs()));
        prop_assert!(limit >= -1e-9);
    }

    #[test]
    fn prop41_ignores_nonnegative_rho21(rho1 in -5.0f64..5.0, rho20 in 0.01f64..3.0, rho21 in 0.0f64..10.0, n in 2usize..8) {
        let p = CDParams { n_dim: ExtReal::Finite(n as f64), rho1, rho20, rho21, c: ExtReal::PosInf };
        let q = CDParams { rho21: 0.0, ..p };
        prop_assert_eq!(gap_bound_prop41(&p).unwrap().bound, gap_bound_prop41(&q).unwrap().bound);
    }

    #[test]
    fn growth_flag_is_rotation_invariant(spec in catalog(), seed in any::<u64>()) {
        let f = framed(spec);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_block_rotation(f.s.n, f.s.nu, &mut rng);
        prop_assert_eq!(growth_flag(&f.s), growth_flag(&f.s.change_basis(&b).unwrap()));
    }

    #[test]
    fn rescaled_vertical_metric_normalizes_back(spec in catalog(), factor in 0.1f64..10.0) {
        use srcd_core::invariants::normalize_vertical;
        let f = framed(spec);
        let scaled = common::framed_structure(&f.s.with_scaled_gram_v(factor));
        let back = normalize_vertical(&scaled.s, &scaled.conn).unwrap();
        let again = common::framed_structure(&back);
        prop_assert!((again.k.m_r_max - 1.0).abs() <= 1e-10);
        prop_assert!((again.k.m_r_min - f.k.m_r_min).abs() <= 1e-10);
    }
}

/// Engel algebra: `[e0,e1] = e2`, `[e0,e2] = e3`, step 3.
fn engel() -> LieSRStructure {
    let mut s = LieSRStructure::new("engel", 2, 2, Tensor3::zeros(4));
    s.set_bracket(0, 1, &[(2, 1.0)]);
    s.set_bracket(0, 2, &[(3, 1.0)]);
    s
}

#[test]
fn step_three_has_degenerate_lower_bound() {
    let s = engel();
    let g = growth_flag(&s);
    assert_eq!(g.step, Some(3));
    assert_eq!(g.dims, vec![2, 3, 4]);
    let conn = ConnectionData::compute(&s).unwrap();
    let k = CDConstants::compute(&conn).unwrap();
    assert_eq!(k.m_r_min, 0.0);
    assert_eq!(k.m_r_max, 1.0);
}
