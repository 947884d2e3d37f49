//! Named test functions on realified group elements.

use nalgebra::DMatrix;

use crate::error::CliError;

pub type BoxedFn = Box<dyn Fn(&DMatrix<f64>) -> f64 + Sync>;

fn entry_index(spec: &str, dim: usize) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("expected R,C with indices below {dim}, got `{spec}`"));
    let (r, c) = spec.split_once(',').ok_or_else(bad)?;
    let r: usize = r.trim().parse().map_err(|_| bad())?;
    let c: usize = c.trim().parse().map_err(|_| bad())?;
    if r >= dim || c >= dim {
        return Err(bad());
    }
    Ok((r, c))
}

/// Resolves `name` for matrices of size `dim`.
///
/// `heis-r2` and `heis-r4` are `x^2 + y^2` and its square in the Heisenberg
/// coordinates `x = g[0][1]`, `y = g[1][2]`.
pub fn resolve(name: &str, dim: usize) -> Result<BoxedFn, CliError> {
    if let Some(rest) = name.strip_prefix("entry2:") {
        let (r, c) = entry_index(rest, dim)?;
        return Ok(Box::new(move |g| g[(r, c)] * g[(r, c)]));
    }
    if let Some(rest) = name.strip_prefix("entry:") {
        let (r, c) = entry_index(rest, dim)?;
        return Ok(Box::new(move |g| g[(r, c)]));
    }
    let planar = |g: &DMatrix<f64>| g[(0, 1)].powi(2) + g[(1, 2)].powi(2);
    match name {
        "trace" => Ok(Box::new(|g| g.trace())),
        "heis-r2" | "heis-r4" if dim < 3 => Err(CliError::Usage(format!("`{name}` needs 3x3 matrices"))),
        "heis-r2" => Ok(Box::new(planar)),
        "heis-r4" => Ok(Box::new(move |g| planar(g).powi(2))),
        _ => Err(CliError::Usage(format!(
            "unknown function `{name}`; expected trace, entry:R,C, entry2:R,C, heis-r2 or heis-r4"
        ))),
    }
}
