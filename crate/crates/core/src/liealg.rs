//! Left-invariant sub-Riemannian structures given by structure constants.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{cholesky_lower, is_positive_definite, span_basis};
use crate::tensor::Tensor3;

/// Scalar field of a matrix realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// Declared compact form, needed by the representation oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompactForm {
    /// su(2), realized by 2x2 traceless anti-Hermitian matrices.
    Su2,
    /// su(2) + su(2), realized block-diagonally in 4x4 complex matrices.
    Su2Pair,
}

/// Matrices `E_0..E_{N-1}` whose commutators reproduce the structure constants.
///
/// Complex entries are stored as separate real and imaginary parts; all
/// group computations use the realified `2d x 2d` form.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRealization {
    pub dim: usize,
    pub field: Field,
    pub re: Vec<DMatrix<f64>>,
    pub im: Vec<DMatrix<f64>>,
}

impl MatrixRealization {
    pub fn real(generators: Vec<DMatrix<f64>>) -> Self {
        let dim = generators.first().map_or(0, |g| g.nrows());
        let im = generators.iter().map(|_| DMatrix::zeros(dim, dim)).collect();
        Self {
            dim,
            field: Field::Real,
            re: generators,
            im,
        }
    }

    pub fn complex(re: Vec<DMatrix<f64>>, im: Vec<DMatrix<f64>>) -> Self {
        let dim = re.first().map_or(0, |g| g.nrows());
        Self {
            dim,
            field: Field::Complex,
            re,
            im,
        }
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    /// Dimension of the realified matrices.
    pub fn real_dim(&self) -> usize {
        match self.field {
            Field::Real => self.dim,
            Field::Complex => 2 * self.dim,
        }
    }

    pub fn realified(&self, k: usize) -> DMatrix<f64> {
        match self.field {
            Field::Real => self.re[k].clone(),
            Field::Complex => realify(&self.re[k], &self.im[k]),
        }
    }

    pub fn realified_all(&self) -> Vec<DMatrix<f64>> {
        (0..self.len()).map(|k| self.realified(k)).collect()
    }

    /// New generators `E'_a = sum_i b[(i, a)] E_i`.
    fn transformed(&self, b: &DMatrix<f64>) -> Self {
        let comb = |src: &[DMatrix<f64>], a: usize| {
            let mut out = DMatrix::zeros(self.dim, self.dim);
            for (i, m) in src.iter().enumerate() {
                let w = b[(i, a)];
                if w != 0.0 {
                    out += m * w;
                }
            }
            out
        };
        let n = self.len();
        Self {
            dim: self.dim,
            field: self.field,
            re: (0..n).map(|a| comb(&self.re, a)).collect(),
            im: (0..n).map(|a| comb(&self.im, a)).collect(),
        }
    }
}

/// `X = Re + i Im` as the real matrix `[[Re, -Im], [Im, Re]]`.
pub fn realify(re: &DMatrix<f64>, im: &DMatrix<f64>) -> DMatrix<f64> {
    let d = re.nrows();
    let mut out = DMatrix::zeros(2 * d, 2 * d);
    out.view_mut((0, 0), (d, d)).copy_from(re);
    out.view_mut((d, d), (d, d)).copy_from(re);
    out.view_mut((0, d), (d, d)).copy_from(&(-im));
    out.view_mut((d, 0), (d, d)).copy_from(im);
    out
}

/// Change of basis between the input basis and the adapted orthonormal frame.
///
/// New basis vectors are `e'_a = sum_i to_new[(i, a)] e_i`; `to_old` is the inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisChange {
    pub to_new: DMatrix<f64>,
    pub to_old: DMatrix<f64>,
}

/// A Lie algebra `g = h + k` with metrics on both summands.
///
/// Basis indices `0..n` span the horizontal part, `n..n+nu` the vertical part,
/// and `[e_i, e_j] = sum_k c[(i, j, k)] e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieSRStructure {
    pub name: String,
    pub n: usize,
    pub nu: usize,
    pub c: Tensor3,
    pub gram_h: DMatrix<f64>,
    pub gram_v: DMatrix<f64>,
    pub realization: Option<MatrixRealization>,
    pub compact: Option<CompactForm>,
    pub basis_change: Option<BasisChange>,
}

impl LieSRStructure {
    /// Structure with identity Gram matrices and no realization.
    pub fn new(name: impl Into<String>, n: usize, nu: usize, c: Tensor3) -> Self {
        Self {
            name: name.into(),
            n,
            nu,
            c,
            gram_h: DMatrix::identity(n, n),
            gram_v: DMatrix::identity(nu, nu),
            realization: None,
            compact: None,
            basis_change: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.n + self.nu
    }

    pub fn is_horizontal(&self, i: usize) -> bool {
        i < self.n
    }

    /// Sets `[e_i, e_j] = sum coeffs` together with the antisymmetric partner.
    pub fn set_bracket(&mut self, i: usize, j: usize, coeffs: &[(usize, f64)]) {
        for &(k, v) in coeffs {
            self.c[(i, j, k)] = v;
            self.c[(j, i, k)] = -v;
        }
    }

    pub fn max_abs_c(&self) -> f64 {
        self.c.max_abs()
    }

    pub fn check_shapes(&self) -> Result<()> {
        let d = self.dim();
        if self.c.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "structure constants have dimension {} but n + nu = {d}",
                self.c.dim()
            )));
        }
        if self.gram_h.shape() != (self.n, self.n) {
            return Err(Error::DimensionMismatch(format!(
                "gram_h is {:?}, expected {n}x{n}",
                self.gram_h.shape(),
                n = self.n
            )));
        }
        if self.gram_v.shape() != (self.nu, self.nu) {
            return Err(Error::DimensionMismatch(format!(
                "gram_v is {:?}, expected {nu}x{nu}",
                self.gram_v.shape(),
                nu = self.nu
            )));
        }
        if let Some(r) = &self.realization {
            if r.len() != d || r.im.len() != d {
                return Err(Error::DimensionMismatch(format!(
                    "realization has {} generators, expected {d}",
                    r.len()
                )));
            }
            let bad = r
                .re
                .iter()
                .chain(&r.im)
                .any(|m| m.shape() != (r.dim, r.dim));
            if bad {
                return Err(Error::DimensionMismatch(format!(
                    "realization generators must be {0}x{0}",
                    r.dim
                )));
            }
        }
        Ok(())
    }

    /// Largest deviation of the Gram matrices from the identity.
    pub fn frame_defect(&self) -> f64 {
        let dh = (&self.gram_h - DMatrix::identity(self.n, self.n)).amax();
        let dv = (&self.gram_v - DMatrix::identity(self.nu, self.nu)).amax();
        dh.max(dv)
    }

    /// Rewrites the structure in the basis `e'_a = sum_i b[(i, a)] e_i`.
    ///
    /// `b` must be block diagonal with respect to the splitting and invertible.
    /// Gram matrices transform by congruence, constants by
    /// `c'_{abm} = sum b_ia b_jb c_ijk (b^-1)_mk`.
    pub fn change_basis(&self, b: &DMatrix<f64>) -> Result<LieSRStructure> {
        self.check_shapes()?;
        let (n, d) = (self.n, self.dim());
        if b.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "basis change is {:?}, expected {d}x{d}",
                b.shape()
            )));
        }
        let mixed = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .filter(|&(i, j)| (i < n) != (j < n))
            .fold(0.0f64, |m, (i, j)| m.max(b[(i, j)].abs()));
        if mixed > 0.0 {
            return Err(Error::BadParam(
                "basis change must preserve the horizontal/vertical splitting".into(),
            ));
        }
        let binv = b
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::BadParam("basis change is singular".into()))?;

        // contract one slot at a time to keep the cost at O(d^4)
        let mut t1 = Tensor3::zeros(d);
        for a in 0..d {
            for j in 0..d {
                for k in 0..d {
                    t1[(a, j, k)] = (0..d).map(|i| b[(i, a)] * self.c[(i, j, k)]).sum();
                }
            }
        }
        let mut t2 = Tensor3::zeros(d);
        for a in 0..d {
            for bb in 0..d {
                for k in 0..d {
                    t2[(a, bb, k)] = (0..d).map(|j| b[(j, bb)] * t1[(a, j, k)]).sum();
                }
            }
        }
        let mut c = Tensor3::zeros(d);
        for a in 0..d {
            for bb in 0..d {
                for m in 0..d {
                    c[(a, bb, m)] = (0..d).map(|k| t2[(a, bb, k)] * binv[(m, k)]).sum();
                }
            }
        }

        let bh = b.view((0, 0), (n, n)).clone_owned();
        let bv = b.view((n, n), (self.nu, self.nu)).clone_owned();
        let gram_h = bh.transpose() * &self.gram_h * &bh;
        let gram_v = bv.transpose() * &self.gram_v * &bv;

        let basis_change = match &self.basis_change {
            Some(prev) => BasisChange {
                to_new: &prev.to_new * b,
                to_old: &binv * &prev.to_old,
            },
            None => BasisChange {
                to_new: b.clone(),
                to_old: binv,
            },
        };
        Ok(LieSRStructure {
            name: self.name.clone(),
            n,
            nu: self.nu,
            c,
            gram_h,
            gram_v,
            realization: self.realization.as_ref().map(|r| r.transformed(b)),
            compact: self.compact,
            basis_change: Some(basis_change),
        })
    }

    /// Same structure with `gram_v` multiplied by `factor`.
    pub fn with_scaled_gram_v(&self, factor: f64) -> LieSRStructure {
        let mut s = self.clone();
        s.gram_v *= factor;
        s
    }
}

/// Outcome of a single validation check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Largest defect found (0 for exact checks).
    pub defect: f64,
}

/// Dimensions of `h^1 <= h^2 <= ...` with `h^{k+1} = h^k + [h, h^k]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrowthFlag {
    pub dims: Vec<usize>,
    pub step: Option<usize>,
    pub bracket_generating: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub growth: GrowthFlag,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

pub fn validate_structure(s: &LieSRStructure) -> Result<ValidationReport> {
    s.check_shapes()?;
    let d = s.dim();
    let c = &s.c;
    let cmax = s.max_abs_c();

    let mut anti = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                anti = anti.max((c[(i, j, k)] + c[(j, i, k)]).abs());
            }
        }
    }

    let mut jac = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let v: f64 = (0..d)
                        .map(|m| {
                            c[(i, j, m)] * c[(m, k, l)]
                                + c[(j, k, m)] * c[(m, i, l)]
                                + c[(k, i, m)] * c[(m, j, l)]
                        })
                        .sum();
                    jac = jac.max(v.abs());
                }
            }
        }
    }
    let jac_tol = 1e-10 * (1.0 + cmax).powi(2);

    let mut checks = vec![
        Check {
            name: "antisymmetry",
            passed: anti == 0.0,
            defect: anti,
        },
        Check {
            name: "jacobi",
            passed: jac <= jac_tol,
            defect: jac,
        },
        Check {
            name: "gram_h_positive",
            passed: is_positive_definite(&s.gram_h),
            defect: 0.0,
        },
        Check {
            name: "gram_v_positive",
            passed: is_positive_definite(&s.gram_v),
            defect: 0.0,
        },
    ];
    if let Some(r) = &s.realization {
        let defect = realization_defect(c, r);
        checks.push(Check {
            name: "realization",
            passed: defect <= 1e-9,
            defect,
        });
    }
    Ok(ValidationReport {
        checks,
        growth: growth_flag(s),
    })
}

/// Largest entry of `[E_i, E_j] - sum_k c_ijk E_k` over all pairs.
pub fn realization_defect(c: &Tensor3, r: &MatrixRealization) -> f64 {
    let gens = r.realified_all();
    let d = gens.len();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in i + 1..d {
            let mut m = &gens[i] * &gens[j] - &gens[j] * &gens[i];
            for (k, g) in gens.iter().enumerate() {
                let w = c[(i, j, k)];
                if w != 0.0 {
                    m -= g * w;
                }
            }
            worst = worst.max(m.amax());
        }
    }
    worst
}

const RANK_TOL: f64 = 1e-10;

pub fn growth_flag(s: &LieSRStructure) -> GrowthFlag {
    let d = s.dim();
    let unit = |i: usize| DVector::from_fn(d, |r, _| if r == i { 1.0 } else { 0.0 });
    let ad = |i: usize, v: &DVector<f64>| {
        DVector::from_fn(d, |k, _| (0..d).map(|j| v[j] * s.c[(i, j, k)]).sum())
    };

    let horizontal: Vec<DVector<f64>> = (0..s.n).map(unit).collect();
    let mut current = span_basis(&horizontal, RANK_TOL);
    let mut dims = vec![current.len()];
    loop {
        let mut gens = current.clone();
        for i in 0..s.n {
            for v in &current {
                gens.push(ad(i, v));
            }
        }
        let next = span_basis(&gens, RANK_TOL);
        if next.len() <= current.len() {
            break;
        }
        dims.push(next.len());
        current = next;
    }
    let last = *dims.last().unwrap_or(&0);
    let bracket_generating = last == d;
    GrowthFlag {
        step: bracket_generating.then_some(dims.len()),
        dims,
        bracket_generating,
    }
}

/// Rewrites `s` in a frame where both Gram matrices are the identity.
///
/// With `G = L L^T` (Cholesky) the new basis is `e' = e L^{-T}` on each block.
pub fn adapted_orthonormal_frame(s: &LieSRStructure) -> Result<LieSRStructure> {
    s.check_shapes()?;
    if s.frame_defect() == 0.0 {
        return Ok(s.clone());
    }
    let (n, d) = (s.n, s.dim());
    let block = |g: &DMatrix<f64>, what: &str| -> Result<DMatrix<f64>> {
        if !is_positive_definite(g) {
            return Err(Error::NotPositiveDefinite(what.into()));
        }
        let l = cholesky_lower(g).ok_or_else(|| Error::NotPositiveDefinite(what.into()))?;
        l.transpose()
            .try_inverse()
            .ok_or_else(|| Error::NotPositiveDefinite(what.into()))
    };
    let ph = block(&s.gram_h, "gram_h")?;
    let pv = block(&s.gram_v, "gram_v")?;
    let mut b = DMatrix::zeros(d, d);
    b.view_mut((0, 0), (n, n)).copy_from(&ph);
    b.view_mut((n, n), (s.nu, s.nu)).copy_from(&pv);
    let mut out = s.change_basis(&b)?;
    // congruence leaves rounding noise of order 1e-16; the frame is exact by construction
    out.gram_h = DMatrix::identity(n, n);
    out.gram_v = DMatrix::identity(s.nu, s.nu);
    Ok(out)
}

/// Built-in example structures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Example {
    Heisenberg,
    FreeStep2 { n: usize },
    Su2DoubleV1 { rho: f64 },
    Su2DoubleV2 { rho: f64 },
    Su2Hopf { rho: f64 },
    Sl2c,
}

impl Example {
    pub const NAMES: [&'static str; 6] = [
        "heisenberg",
        "free-step2",
        "su2-double-v1",
        "su2-double-v2",
        "su2-hopf",
        "sl2c",
    ];

    /// Parses `NAME[:k=v,...]`, e.g. `su2-double-v2:rho=1` or `free-step2:n=3`.
    pub fn parse(spec: &str) -> Result<Example> {
        let (name, rest) = match spec.split_once(':') {
            Some((a, b)) => (a.trim(), b),
            None => (spec.trim(), ""),
        };
        let mut params = BTreeMap::new();
        for kv in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::BadParam(format!("expected key=value, got `{kv}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::BadParam(format!("`{v}` is not a number")))?;
            params.insert(k.trim().to_string(), v);
        }
        Example::from_params(name, &params)
    }

    pub fn from_params(name: &str, params: &BTreeMap<String, f64>) -> Result<Example> {
        let allowed: &[&str] = match name {
            "heisenberg" | "sl2c" => &[],
            "free-step2" => &["n"],
            "su2-double-v1" | "su2-double-v2" | "su2-hopf" => &["rho"],
            _ => return Err(Error::UnknownExample(name.to_string())),
        };
        if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::BadParam(format!("`{name}` takes no parameter `{k}`")));
        }
        let rho = || {
            let r = params.get("rho").copied().unwrap_or(1.0);
            if r > 0.0 && r.is_finite() {
                Ok(r)
            } else {
                Err(Error::BadParam(format!("rho must be positive, got {r}")))
            }
        };
        Ok(match name {
            "heisenberg" => Example::Heisenberg,
            "sl2c" => Example::Sl2c,
            "free-step2" => {
                let n = params.get("n").copied().unwrap_or(2.0);
                if n.fract() != 0.0 || n < 2.0 || n > 64.0 {
                    return Err(Error::BadParam(format!(
                        "free-step2 needs an integer n >= 2, got {n}"
                    )));
                }
                Example::FreeStep2 { n: n as usize }
            }
            "su2-double-v1" => Example::Su2DoubleV1 { rho: rho()? },
            "su2-double-v2" => Example::Su2DoubleV2 { rho: rho()? },
            _ => Example::Su2Hopf { rho: rho()? },
        })
    }

    pub fn build(&self) -> LieSRStructure {
        match *self {
            Example::Heisenberg => heisenberg(),
            Example::FreeStep2 { n } => free_step2(n),
            Example::Su2DoubleV1 { rho } => su2_double_v1(rho),
            Example::Su2DoubleV2 { rho } => su2_double_v2(rho),
            Example::Su2Hopf { rho } => su2_hopf(rho),
            Example::Sl2c => sl2c(),
        }
    }
}

/// Builds a catalog structure from `NAME[:k=v,...]`.
pub fn build_example(spec: &str) -> Result<LieSRStructure> {
    Ok(Example::parse(spec)?.build())
}

fn unit_matrix(d: usize, r: usize, c: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    m[(r, c)] = 1.0;
    m
}

fn heisenberg() -> LieSRStructure {
    let mut s = LieSRStructure::new("heisenberg", 2, 1, Tensor3::zeros(3));
    s.set_bracket(0, 1, &[(2, 1.0)]);
    // x = g[0][1], y = g[1][2], z = g[0][2]
    s.realization = Some(MatrixRealization::real(vec![
        unit_matrix(3, 0, 1),
        unit_matrix(3, 1, 2),
        unit_matrix(3, 0, 2),
    ]));
    s
}

/// Index of the vertical generator `e_ij` (`i < j`) in lexicographic order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

fn free_step2(n: usize) -> LieSRStructure {
    let nu = n * (n - 1) / 2;
    let mut s = LieSRStructure::new(format!("free-step2:n={n}"), n, nu, Tensor3::zeros(n + nu));
    for i in 0..n {
        for j in i + 1..n {
            s.set_bracket(i, j, &[(n + pair_index(n, i, j), 1.0)]);
        }
    }
    s.gram_v = DMatrix::identity(nu, nu) / (n as f64 - 1.0);
    s
}

fn eps(i: usize, j: usize) -> Option<(usize, f64)> {
    // [A_i, A_j] = eps_ijk A_k for the cyclic pairs
    match (i, j) {
        (0, 1) => Some((2, 1.0)),
        (1, 2) => Some((0, 1.0)),
        (2, 0) => Some((1, 1.0)),
        (1, 0) => Some((2, -1.0)),
        (2, 1) => Some((0, -1.0)),
        (0, 2) => Some((1, -1.0)),
        _ => None,
    }
}

/// Pauli matrices as (re, im) pairs.
fn pauli(a: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    match a {
        0 => (DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), DMatrix::zeros(2, 2)),
        1 => (DMatrix::zeros(2, 2), DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])),
        _ => (DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]), DMatrix::zeros(2, 2)),
    }
}

/// Spin-1/2 image of `A_a` with `[A_i, A_j] = s eps_ijk A_k`: `s (-i/2) sigma_a`.
fn su2_generator(a: usize, s: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let (re, im) = pauli(a);
    // (-i/2)(re + i im) = im/2 - i re/2
    (im * (0.5 * s), re * (-0.5 * s))
}

fn block_diag2(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (p, q) = (a.nrows(), b.nrows());
    let mut m = DMatrix::zeros(p + q, p + q);
    m.view_mut((0, 0), (p, p)).copy_from(a);
    m.view_mut((p, p), (q, q)).copy_from(b);
    m
}

/// Realization of `(x A_a, y A_b)` in `su(2) + su(2)`.
fn pair_generator(a: Option<(usize, f64)>, b: Option<(usize, f64)>, s: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let part = |x: Option<(usize, f64)>| match x {
        Some((k, w)) => {
            let (re, im) = su2_generator(k, s);
            (re * w, im * w)
        }
        None => (DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)),
    };
    let (r1, i1) = part(a);
    let (r2, i2) = part(b);
    (block_diag2(&r1, &r2), block_diag2(&i1, &i2))
}

fn collect_complex(gens: Vec<(DMatrix<f64>, DMatrix<f64>)>) -> MatrixRealization {
    let (re, im) = gens.into_iter().unzip();
    MatrixRealization::complex(re, im)
}

/// su(2) + su(2) with horizontal `X_i = (A_i, 2A_i)` and vertical `Y_i = (A_i, 0)`.
fn su2_double_v2(rho: f64) -> LieSRStructure {
    let s = (2.0 * rho).sqrt();
    let mut st = LieSRStructure::new(format!("su2-double-v2:rho={rho}"), 3, 3, Tensor3::zeros(6));
    for i in 0..3 {
        for j in 0..3 {
            if let Some((k, e)) = eps(i, j) {
                if i < j {
                    st.set_bracket(i, j, &[(k, 2.0 * s * e), (3 + k, -s * e)]);
                    st.set_bracket(3 + i, 3 + j, &[(3 + k, s * e)]);
                }
                st.set_bracket(i, 3 + j, &[(3 + k, s * e)]);
            }
        }
    }
    st.gram_v = DMatrix::identity(3, 3) / (4.0 * rho);
    let mut gens: Vec<_> = (0..3).map(|i| pair_generator(Some((i, 1.0)), Some((i, 2.0)), s)).collect();
    gens.extend((0..3).map(|i| pair_generator(Some((i, 1.0)), None, s)));
    st.realization = Some(collect_complex(gens));
    st.compact = Some(CompactForm::Su2Pair);
    st
}

/// su(2) + su(2) with horizontal `X_i = (A_i, 2A_i)` and vertical `Z_i = (0, A_i)`.
fn su2_double_v1(rho: f64) -> LieSRStructure {
    let s = (2.0 * rho).sqrt();
    let mut st = LieSRStructure::new(format!("su2-double-v1:rho={rho}"), 3, 3, Tensor3::zeros(6));
    for i in 0..3 {
        for j in 0..3 {
            if let Some((k, e)) = eps(i, j) {
                if i < j {
                    st.set_bracket(i, j, &[(k, s * e), (3 + k, 2.0 * s * e)]);
                    st.set_bracket(3 + i, 3 + j, &[(3 + k, s * e)]);
                }
                st.set_bracket(i, 3 + j, &[(3 + k, 2.0 * s * e)]);
            }
        }
    }
    st.gram_v = DMatrix::identity(3, 3) / (16.0 * rho);
    let mut gens: Vec<_> = (0..3).map(|i| pair_generator(Some((i, 1.0)), Some((i, 2.0)), s)).collect();
    gens.extend((0..3).map(|i| pair_generator(None, Some((i, 1.0)), s)));
    st.realization = Some(collect_complex(gens));
    st.compact = Some(CompactForm::Su2Pair);
    st
}

/// su(2) with horizontal `{A_0, A_1}` and vertical `A_2` (Hopf fibration).
fn su2_hopf(rho: f64) -> LieSRStructure {
    let s = (2.0 * rho).sqrt();
    let mut st = LieSRStructure::new(format!("su2-hopf:rho={rho}"), 2, 1, Tensor3::zeros(3));
    for i in 0..3 {
        for j in i + 1..3 {
            let (k, e) = eps(i, j).expect("distinct indices");
            st.set_bracket(i, j, &[(k, s * e)]);
        }
    }
    st.gram_v = DMatrix::from_element(1, 1, 1.0 / (2.0 * rho));
    st.realization = Some(collect_complex((0..3).map(|a| su2_generator(a, s)).collect()));
    st.compact = Some(CompactForm::Su2);
    st
}

/// sl(2, C) as a real algebra: horizontal `{iA, iB, iC, C}`, vertical `{A, B}`,
/// where `[A, B] = C`, `[B, C] = A`, `[C, A] = B`.
fn sl2c() -> LieSRStructure {
    // basis slots: (is_imaginary, su2 index)
    const SLOTS: [(bool, usize); 6] = [(true, 0), (true, 1), (true, 2), (false, 2), (false, 0), (false, 1)];
    let slot_of = |imag: bool, a: usize| SLOTS.iter().position(|&x| x == (imag, a)).unwrap();
    let mut st = LieSRStructure::new("sl2c", 4, 2, Tensor3::zeros(6));
    for (p, &(ip, a)) in SLOTS.iter().enumerate() {
        for (q, &(iq, b)) in SLOTS.iter().enumerate().skip(p + 1) {
            if let Some((k, e)) = eps(a, b) {
                // [iX, iY] = -[X, Y], [X, iY] = [iX, Y] = i[X, Y]
                let (imag, sign) = match (ip, iq) {
                    (true, true) => (false, -1.0),
                    (false, false) => (false, 1.0),
                    _ => (true, 1.0),
                };
                st.set_bracket(p, q, &[(slot_of(imag, k), sign * e)]);
            }
        }
    }
    st.gram_v = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.5]));
    let gens = SLOTS
        .iter()
        .map(|&(imag, a)| {
            let (re, im) = su2_generator(a, 1.0);
            if imag {
                // i (re + i im) = -im + i re
                (-im, re)
            } else {
                (re, im)
            }
        })
        .collect();
    st.realization = Some(collect_complex(gens));
    st
}
