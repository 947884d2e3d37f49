//! JSON structure files.
//!
//! ```json
//! {
//!   "name": "heisenberg",
//!   "n": 2,
//!   "nu": 1,
//!   "brackets": [{"i": 0, "j": 1, "coeffs": {"2": 1.0}}],
//!   "gram_h": [[1.0, 0.0], [0.0, 1.0]],
//!   "gram_v": [[1.0]]
//! }
//! ```
//!
//! Only `i < j` bracket entries are stored. Matrices are row-major, either as
//! nested rows or as one flat array. `gram_h` and `gram_v` default to the
//! identity. Complex realization entries are `[re, im]` pairs.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use srcd_core::liealg::{validate_structure, CompactForm, Field, MatrixRealization};
use srcd_core::{LieSRStructure, Tensor3};

use crate::error::CliError;
use crate::json::to_json_string;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureFile {
    name: String,
    n: usize,
    nu: usize,
    #[serde(default)]
    brackets: Vec<BracketEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gram_h: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gram_v: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix_realization: Option<RealizationFile>,
    /// Needed only by the representation oracle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    compact_form: Option<CompactForm>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BracketEntry {
    i: usize,
    j: usize,
    coeffs: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RealizationFile {
    dim: usize,
    field: Field,
    generators: Vec<Value>,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn real_entry(v: &Value, at: &str) -> Result<f64, CliError> {
    v.as_f64().ok_or_else(|| schema(format!("{at}: expected a number, got {v}")))
}

fn complex_entry(v: &Value, at: &str) -> Result<(f64, f64), CliError> {
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => Ok((real_entry(re, at)?, real_entry(im, at)?)),
        _ => Err(schema(format!("{at}: expected an [re, im] pair, got {v}"))),
    }
}

/// Row-major entries of a `rows x cols` matrix, nested or flat. `leaf`
/// tells entries apart from rows.
fn matrix_entries<'a>(
    v: &'a Value,
    rows: usize,
    cols: usize,
    leaf: fn(&Value) -> bool,
    at: &str,
) -> Result<Vec<&'a Value>, CliError> {
    let outer = v
        .as_array()
        .ok_or_else(|| schema(format!("{at}: expected an array")))?;
    let entries: Vec<&Value> = if outer.first().is_some_and(|x| !leaf(x)) {
        let mut e = Vec::with_capacity(rows * cols);
        if outer.len() != rows {
            return Err(schema(format!("{at}: expected {rows} rows, got {}", outer.len())));
        }
        for (r, row) in outer.iter().enumerate() {
            match row.as_array() {
                Some(a) if a.len() == cols => e.extend(a),
                _ => return Err(schema(format!("{at}[{r}]: expected a row of {cols} entries"))),
            }
        }
        e
    } else {
        outer.iter().collect()
    };
    if entries.len() != rows * cols {
        return Err(schema(format!("{at}: expected a {rows}x{cols} matrix")));
    }
    Ok(entries)
}

fn is_number(v: &Value) -> bool {
    v.is_number()
}

fn is_pair(v: &Value) -> bool {
    v.as_array().is_some_and(|a| a.iter().all(Value::is_number))
}

fn real_matrix(v: &Value, d: usize, at: &str) -> Result<DMatrix<f64>, CliError> {
    let e = matrix_entries(v, d, d, is_number, at)?;
    let vals = e
        .iter()
        .enumerate()
        .map(|(k, x)| real_entry(x, &format!("{at}[{}][{}]", k / d.max(1), k % d.max(1))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DMatrix::from_row_slice(d, d, &vals))
}

fn complex_matrix(v: &Value, d: usize, at: &str) -> Result<(DMatrix<f64>, DMatrix<f64>), CliError> {
    let e = matrix_entries(v, d, d, is_pair, at)?;
    let mut re = DMatrix::zeros(d, d);
    let mut im = DMatrix::zeros(d, d);
    for (k, x) in e.iter().enumerate() {
        let (r, c) = (k / d, k % d);
        let (a, b) = complex_entry(x, &format!("{at}[{r}][{c}]"))?;
        re[(r, c)] = a;
        im[(r, c)] = b;
    }
    Ok((re, im))
}

fn rows_value(m: &DMatrix<f64>) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(|&x| Value::from(x)).collect()))
            .collect(),
    )
}

fn complex_rows_value(re: &DMatrix<f64>, im: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..re.nrows())
            .map(|r| {
                Value::Array(
                    (0..re.ncols())
                        .map(|c| Value::Array(vec![Value::from(re[(r, c)]), Value::from(im[(r, c)])]))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn from_file(f: StructureFile) -> Result<LieSRStructure, CliError> {
    let d = f.n + f.nu;
    if f.n == 0 {
        return Err(schema("n must be at least 1"));
    }
    let mut s = LieSRStructure::new(f.name, f.n, f.nu, Tensor3::zeros(d));
    let mut seen = BTreeMap::new();
    for (idx, b) in f.brackets.iter().enumerate() {
        let at = format!("brackets[{idx}]");
        if b.i >= d || b.j >= d {
            return Err(schema(format!("{at}: index out of range for dimension {d}")));
        }
        if b.i >= b.j {
            return Err(schema(format!(
                "{at}: redundant entry ({}, {}); only i < j is stored, the rest follows by antisymmetry",
                b.i, b.j
            )));
        }
        if let Some(prev) = seen.insert((b.i, b.j), idx) {
            return Err(schema(format!("{at}: redundant entry ({}, {}), already given at brackets[{prev}]", b.i, b.j)));
        }
        let mut coeffs = Vec::with_capacity(b.coeffs.len());
        for (key, &v) in &b.coeffs {
            let k: usize = key
                .parse()
                .map_err(|_| schema(format!("{at}.coeffs: key `{key}` is not an index")))?;
            if k >= d {
                return Err(schema(format!("{at}.coeffs: index {k} out of range for dimension {d}")));
            }
            coeffs.push((k, v));
        }
        s.set_bracket(b.i, b.j, &coeffs);
    }
    if let Some(g) = &f.gram_h {
        s.gram_h = real_matrix(g, f.n, "gram_h")?;
    }
    if let Some(g) = &f.gram_v {
        s.gram_v = real_matrix(g, f.nu, "gram_v")?;
    }
    if let Some(r) = &f.matrix_realization {
        if r.generators.len() != d {
            return Err(schema(format!(
                "matrix_realization: {} generators given, expected {d}",
                r.generators.len()
            )));
        }
        s.realization = Some(match r.field {
            Field::Real => MatrixRealization::real(
                r.generators
                    .iter()
                    .enumerate()
                    .map(|(k, g)| real_matrix(g, r.dim, &format!("matrix_realization.generators[{k}]")))
                    .collect::<Result<_, _>>()?,
            ),
            Field::Complex => {
                let (re, im) = r
                    .generators
                    .iter()
                    .enumerate()
                    .map(|(k, g)| complex_matrix(g, r.dim, &format!("matrix_realization.generators[{k}]")))
                    .collect::<Result<Vec<_>, _>>()?
                    .into_iter()
                    .unzip();
                MatrixRealization::complex(re, im)
            }
        });
    }
    s.compact = f.compact_form;
    Ok(s)
}

/// Parses and validates a structure; `source_name` labels parse errors.
pub fn parse_structure_str(text: &str, source_name: &str) -> Result<LieSRStructure, CliError> {
    let raw: StructureFile = serde_json::from_str(text).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Data => CliError::Schema(format!("{source_name}: {e}")),
            _ => CliError::Parse {
                source_name: source_name.to_string(),
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            },
        }
    })?;
    let s = from_file(raw)?;
    let report = validate_structure(&s).map_err(|e| match e {
        srcd_core::Error::DimensionMismatch(m) => CliError::Schema(m),
        other => CliError::Core(other),
    })?;
    if let Some(bad) = report.first_failure() {
        return Err(CliError::Validation {
            check: bad.name.to_string(),
            defect: bad.defect,
        });
    }
    Ok(s)
}

pub fn parse_structure_file(path: &Path) -> Result<LieSRStructure, CliError> {
    let text = std::fs::read_to_string(path)?;
    parse_structure_str(&text, &path.display().to_string())
}

/// The file form of `s`; zero bracket coefficients are omitted.
pub fn structure_to_json(s: &LieSRStructure) -> String {
    let d = s.dim();
    let mut brackets = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            let coeffs: BTreeMap<String, f64> = (0..d)
                .filter(|&k| s.c[(i, j, k)] != 0.0)
                .map(|k| (k.to_string(), s.c[(i, j, k)]))
                .collect();
            if !coeffs.is_empty() {
                brackets.push(BracketEntry { i, j, coeffs });
            }
        }
    }
    let matrix_realization = s.realization.as_ref().map(|r| RealizationFile {
        dim: r.dim,
        field: r.field,
        generators: match r.field {
            Field::Real => r.re.iter().map(rows_value).collect(),
            Field::Complex => r.re.iter().zip(&r.im).map(|(a, b)| complex_rows_value(a, b)).collect(),
        },
    });
    let file = StructureFile {
        name: s.name.clone(),
        n: s.n,
        nu: s.nu,
        brackets,
        gram_h: Some(rows_value(&s.gram_h)),
        gram_v: Some(rows_value(&s.gram_v)),
        matrix_realization,
        compact_form: s.compact,
    };
    to_json_string(&file)
}
