#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rand::RngExt;
use srcd_core::invariants::CDConstants;
use srcd_core::liealg::{adapted_orthonormal_frame, build_example, LieSRStructure};
use srcd_core::ConnectionData;

pub const CATALOG: [&str; 8] = [
    "heisenberg",
    "free-step2:n=2",
    "free-step2:n=3",
    "free-step2:n=4",
    "su2-double-v1",
    "su2-double-v2",
    "su2-hopf",
    "sl2c",
];

pub struct Framed {
    pub s: LieSRStructure,
    pub conn: ConnectionData,
    pub k: CDConstants,
}

pub fn framed(spec: &str) -> Framed {
    framed_structure(&build_example(spec).unwrap())
}

pub fn framed_structure(s: &LieSRStructure) -> Framed {
    let s = adapted_orthonormal_frame(s).unwrap();
    let conn = ConnectionData::compute(&s).unwrap();
    let k = CDConstants::compute(&conn).unwrap();
    Framed { s, conn, k }
}

/// Haar-ish orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal(d: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column signs so the distribution does not depend on the QR convention
    DMatrix::from_fn(d, d, |i, j| q[(i, j)] * r[(j, j)].signum())
}

/// Block-diagonal rotation preserving the horizontal/vertical split.
pub fn random_block_rotation(n: usize, nu: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(n + nu, n + nu);
    b.view_mut((0, 0), (n, n)).copy_from(&random_orthogonal(n, rng));
    if nu > 0 {
        b.view_mut((n, n), (nu, nu)).copy_from(&random_orthogonal(nu, rng));
    }
    b
}
