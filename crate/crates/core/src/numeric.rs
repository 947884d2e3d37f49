//! Small numerical utilities shared across modules.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// A real number extended with the two infinities.
///
/// Used for constants that may be unbounded (`M_HV`), lower bounds that may
/// be `-inf` (`rho_delta_v`), and parameters allowed to be infinite (`c`, `n`).
/// Serialized as a JSON number or as the strings `"inf"` / `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
    NegInf,
}

impl ExtReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// `1/x`, with `1/inf = 0`.
    pub fn recip(self) -> f64 {
        match self {
            ExtReal::Finite(x) => 1.0 / x,
            _ => 0.0,
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
            ExtReal::NegInf => f64::NEG_INFINITY,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtReal::PosInf
        } else if x == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(x)
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInf => write!(f, "inf"),
            ExtReal::NegInf => write!(f, "-inf"),
        }
    }
}

impl std::str::FromStr for ExtReal {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "inf" | "+inf" | "infinity" | "∞" => Ok(ExtReal::PosInf),
            "-inf" | "-infinity" | "-∞" => Ok(ExtReal::NegInf),
            t => t
                .parse::<f64>()
                .map(ExtReal::from_f64)
                .map_err(|e| format!("`{t}`: {e}")),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => s.serialize_f64(*x),
            ExtReal::PosInf => s.serialize_str("inf"),
            ExtReal::NegInf => s.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = ExtReal;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"inf\" / \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
                v.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// Pairwise (cascade) summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = if xs.len() > 1 {
        pairwise_sum(&dev) / (n - 1.0)
    } else {
        0.0
    };
    (mean, (var / n).sqrt())
}

/// Eigen-decomposition of the symmetric part of `m`, eigenvalues ascending.
pub fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let d = m.nrows();
    if d == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    sym_eigen(m).0
}

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

/// Largest singular value (0 for an empty matrix).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |a, &b| a.max(b))
}

/// Orthonormal basis of the span of `vectors`, by column reduction.
///
/// A column is accepted as a new pivot when its residual norm after removing
/// the current span exceeds `tol` times the largest input column norm.
pub fn span_basis(vectors: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    let scale = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    if scale == 0.0 {
        return basis;
    }
    for v in vectors {
        let mut r = v.clone();
        // two passes of Gram-Schmidt keep the residual orthogonal to rounding
        for _ in 0..2 {
            for b in &basis {
                let p = b.dot(&r);
                r -= b * p;
            }
        }
        let norm = r.norm();
        if norm > tol * scale {
            basis.push(r / norm);
        }
    }
    basis
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky_lower(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    nalgebra::Cholesky::new(m.clone()).map(|c| c.l())
}

/// True when every eigenvalue exceeds `1e-12 * trace`.
pub fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    if m.nrows() == 0 {
        return true;
    }
    if max_asymmetry(m) > 1e-12 * (1.0 + m.amax()) {
        return false;
    }
    let trace = m.trace();
    let eig = sym_eigenvalues(m);
    trace > 0.0 && eig.iter().all(|&l| l > 1e-12 * trace)
}
