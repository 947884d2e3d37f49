mod common;

use common::framed;
use srcd_core::liealg::build_example;
use srcd_core::spectral::{gap_bound_kappa, gap_bound_prop41_optimized, gap_bound_step2, irrep_spectrum_oracle};
use srcd_core::Error;

#[test]
fn double_v2_bound_is_six_sevenths_both_ways() {
    for rho in [1.0, 0.5, 3.0] {
        let f = framed(&format!("su2-double-v2:rho={rho}"));
        let a = gap_bound_prop41_optimized(&f.k, None).unwrap();
        let b = gap_bound_kappa(&f.k, None).unwrap();
        let want = 6.0 * rho / 7.0;
        assert!((a.bound - want).abs() <= 1e-10 * (1.0 + want), "{a:?}");
        assert!((a.bound - b.bound).abs() <= 1e-10);
    }
}

#[test]
fn bounds_sit_below_the_oracle_gap() {
    for (spec, two_j) in [("su2-double-v2", 5), ("su2-double-v2:rho=2", 5), ("su2-hopf", 11), ("su2-hopf:rho=0.3", 11), ("su2-double-v1", 5)] {
        let f = framed(spec);
        let gap = irrep_spectrum_oracle(&build_example(spec).unwrap(), two_j).unwrap().gap;
        for bound in [gap_bound_prop41_optimized(&f.k, None), gap_bound_kappa(&f.k, None)]
            .into_iter()
            .flatten()
        {
            assert!(bound.bound <= gap + 1e-8, "{spec}: {bound:?} vs {gap}");
        }
    }
}

#[test]
fn hopf_spectrum_follows_the_casimir_formula() {
    // -2 (j(j+1) - m^2) on spin j
    let o = irrep_spectrum_oracle(&build_example("su2-hopf").unwrap(), 6).unwrap();
    for block in &o.blocks {
        let j = block.two_j[0] as f64 / 2.0;
        let mut want: Vec<f64> = (0..=block.two_j[0])
            .map(|k| {
                let m = j - k as f64;
                -2.0 * (j * (j + 1.0) - m * m)
            })
            .collect();
        want.sort_by(|a, b| a.total_cmp(b));
        for (a, b) in block.eigenvalues.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-10, "j={j}: {:?} vs {want:?}", block.eigenvalues);
        }
    }
}

#[test]
fn oracle_gap_is_monotone_in_j_max() {
    for spec in ["su2-hopf", "su2-double-v2", "su2-double-v1"] {
        let s = build_example(spec).unwrap();
        let mut prev = f64::INFINITY;
        for two_j in 1..=5 {
            let gap = irrep_spectrum_oracle(&s, two_j).unwrap().gap;
            assert!(gap <= prev + 1e-12);
            prev = gap;
        }
    }
}

#[test]
fn oracle_eigenvalues_are_nonpositive() {
    let o = irrep_spectrum_oracle(&build_example("su2-double-v2").unwrap(), 4).unwrap();
    assert!(o.blocks.iter().flat_map(|b| &b.eigenvalues).all(|&l| l <= 1e-9));
    assert_eq!(o.blocks.len(), 5 * 5 - 1);
}

#[test]
fn step2_bound_matches_prop41_with_privileged_parameters() {
    use srcd_core::cdcore::CDParams;
    use srcd_core::spectral::gap_bound_prop41;
    use srcd_core::ExtReal;
    let s = build_example("su2-hopf").unwrap();
    let g = gap_bound_step2(&s).unwrap();
    let b = g.b.unwrap();
    assert!((1.0..=2.0).contains(&(b * b)));
    // rho_H of the privileged structure, recovered from the closed form
    let n = 2.0;
    let rho_h = g.bound * (n * (2.0 * b * b + 1.0) - 1.0) / n;
    let p = CDParams { n_dim: ExtReal::Finite(n), rho1: rho_h, rho20: 1.0 / (2.0 * b * b), rho21: 0.0, c: ExtReal::PosInf };
    assert!((gap_bound_prop41(&p).unwrap().bound - g.bound).abs() <= 1e-12);
    let gap = irrep_spectrum_oracle(&s, 11).unwrap().gap;
    assert!(g.bound <= gap + 1e-8);
}

#[test]
fn step2_needs_positive_rho_h() {
    assert!(matches!(gap_bound_step2(&build_example("heisenberg").unwrap()), Err(Error::NonPositiveRhoH(_))));
    assert!(matches!(gap_bound_step2(&build_example("sl2c").unwrap()), Err(Error::NotStepTwo(_)) | Err(Error::NonPositiveRhoH(_)) | Err(Error::RequiresParallelMetric(_))));
}
