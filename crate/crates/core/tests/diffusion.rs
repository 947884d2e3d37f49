mod common;

use common::framed;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use srcd_core::diffusion::{
    apply_sublaplacian_numeric, estimate_means, expm, simulate_paths, Estimator, SimConfig, Simulator,
};
use srcd_core::Error;

fn gaussian(d: usize, scale: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

#[test]
fn expm_agrees_with_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for d in [1, 2, 3, 4, 5, 8] {
        for scale in [1e-4, 0.05, 0.5, 2.0, 6.0] {
            let a = gaussian(d, scale, &mut rng);
            let want = a.clone().exp();
            let got = expm(&a);
            let err = (&got - &want).amax() / want.amax().max(1.0);
            assert!(err <= 1e-11, "d={d} scale={scale}: {err}");
        }
    }
}

#[test]
fn expm_of_inverse_is_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let a = gaussian(6, 1.5, &mut rng);
    let prod = expm(&a) * expm(&(-&a));
    assert!((prod - DMatrix::identity(6, 6)).amax() <= 1e-10);
}

fn heisenberg_x(g: &DMatrix<f64>) -> f64 {
    g[(0, 1)]
}

fn heisenberg_r2(g: &DMatrix<f64>) -> f64 {
    g[(0, 1)].powi(2) + g[(1, 2)].powi(2)
}

fn heisenberg_z2(g: &DMatrix<f64>) -> f64 {
    g[(0, 2)].powi(2)
}

fn hopf_re00(g: &DMatrix<f64>) -> f64 {
    g[(0, 0)]
}

#[test]
fn heisenberg_means_match_brownian_motion() {
    let f = framed("heisenberg");
    let sim = Simulator::new(&f.s, &f.conn).unwrap();
    let cfg = SimConfig::new(1.0, 50, 4000, 11).unwrap();
    let id = DMatrix::identity(3, 3);
    let x = estimate_means(&sim, &cfg, &heisenberg_x, &id, &[50], Estimator::Plain).unwrap()[0];
    assert!(x.mean.abs() <= 3.0 * x.stderr, "{x:?}");
    let r2 = estimate_means(&sim, &cfg, &heisenberg_r2, &id, &[25, 50], Estimator::Plain).unwrap();
    for e in r2 {
        assert!((e.mean - 2.0 * e.t).abs() <= 3.0 * e.stderr, "{e:?}");
    }
}

#[test]
fn control_variate_keeps_the_mean_and_cuts_variance() {
    let f = framed("su2-hopf");
    let sim = Simulator::new(&f.s, &f.conn).unwrap();
    let cfg = SimConfig::new(0.5, 40, 3000, 3).unwrap();
    let id = DMatrix::identity(sim.dim, sim.dim);
    let plain = estimate_means(&sim, &cfg, &hopf_re00, &id, &[40], Estimator::Plain).unwrap()[0];
    let cv = estimate_means(&sim, &cfg, &hopf_re00, &id, &[40], Estimator::ControlVariate).unwrap()[0];
    assert!(cv.stderr < plain.stderr);
    let spread = 3.0 * (plain.stderr.powi(2) + cv.stderr.powi(2)).sqrt();
    assert!((plain.mean - cv.mean).abs() <= spread);
    // Re g00 is an eigenfunction with eigenvalue -1, so the mean is exp(-t/2)
    assert!((cv.mean - (-0.25f64).exp()).abs() <= 3.0 * cv.stderr + 1e-3, "{cv:?}");
}

#[test]
fn hopf_paths_stay_orthogonal() {
    let f = framed("su2-hopf");
    let cfg = SimConfig::new(1.0, 10_000, 2, 7).unwrap();
    let sample = simulate_paths(&f.s, &f.conn, &cfg).unwrap();
    assert!(sample.max_orthogonality_defect() <= 1e-6);
}

#[test]
fn numeric_sublaplacian_on_known_functions() {
    let h = framed("heisenberg");
    let id3 = DMatrix::identity(3, 3);
    let one = |_: &DMatrix<f64>| 1.0;
    assert_eq!(apply_sublaplacian_numeric(&h.s, &h.conn, &one, &id3, 1e-3).unwrap(), 0.0);
    let v = apply_sublaplacian_numeric(&h.s, &h.conn, &heisenberg_r2, &id3, 1e-3).unwrap();
    assert!((v - 4.0).abs() <= 1e-6, "{v}");

    let hopf = framed("su2-hopf");
    let sim = Simulator::new(&hopf.s, &hopf.conn).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let mut x = DMatrix::zeros(sim.dim, sim.dim);
        for e in &sim.gens {
            x += e * rng.sample::<f64, _>(StandardNormal);
        }
        let g = expm(&x);
        let v = apply_sublaplacian_numeric(&hopf.s, &hopf.conn, &hopf_re00, &g, 1e-3).unwrap();
        assert!((v + hopf_re00(&g)).abs() <= 1e-5, "{v} vs {}", hopf_re00(&g));
    }
    assert!(matches!(
        apply_sublaplacian_numeric(&h.s, &h.conn, &one, &id3, 0.5),
        Err(Error::BadParam(_))
    ));
}

#[test]
fn runs_are_reproducible() {
    let f = framed("su2-double-v2");
    let cfg = SimConfig::new(0.3, 30, 5, 1234).unwrap();
    let a = simulate_paths(&f.s, &f.conn, &cfg).unwrap();
    let b = simulate_paths(&f.s, &f.conn, &cfg).unwrap();
    assert_eq!(a, b);
    let mut wa = Vec::new();
    let mut wb = Vec::new();
    a.write_csv(&mut wa).unwrap();
    b.write_csv(&mut wb).unwrap();
    assert_eq!(wa, wb);
    let other = simulate_paths(&f.s, &f.conn, &SimConfig::new(0.3, 30, 5, 1235).unwrap()).unwrap();
    assert_ne!(a.paths, other.paths);
}

#[test]
fn csv_layout() {
    let f = framed("heisenberg");
    let sample = simulate_paths(&f.s, &f.conn, &SimConfig::new(1.0, 4, 2, 0).unwrap()).unwrap();
    let mut out = Vec::new();
    sample.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "time,path_id,g_0_0,g_0_1,g_0_2,g_1_0,g_1_1,g_1_2,g_2_0,g_2_1,g_2_2"
    );
    assert_eq!(lines.count(), 2 * 5);
    assert_eq!(sample.increments[0].len(), 4);
    assert_eq!(sample.increments[0][0].len(), 2);
}

#[test]
fn weak_bias_halves_with_dt() {
    // E[z^2] at t = 1 is 1/2 in the limit; the scheme is off by exactly -dt/4,
    // so coarse grids resolve the bias well above the Monte Carlo noise.
    let f = framed("heisenberg");
    let sim = Simulator::new(&f.s, &f.conn).unwrap();
    let id = DMatrix::identity(3, 3);
    let bias = |steps: usize| {
        let cfg = SimConfig::new(1.0, steps, 40_000, 77).unwrap();
        let e = estimate_means(&sim, &cfg, &heisenberg_z2, &id, &[steps], Estimator::ControlVariate).unwrap()[0];
        (e.mean - 0.5, e.stderr)
    };
    let (b1, s1) = bias(2);
    let (b2, s2) = bias(4);
    let ratio = b1 / b2;
    assert!((1.5..=3.0).contains(&ratio), "biases {b1}±{s1}, {b2}±{s2}");
}

#[test]
fn unrealized_structures_are_rejected() {
    let f = framed("free-step2:n=3");
    assert!(matches!(Simulator::new(&f.s, &f.conn), Err(Error::NoRealization(_))));
}
