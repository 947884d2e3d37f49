//! Report assembly for each subcommand.

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Map, Value};
use srcd_core::cdcore::{cd_parameters, optimize_c, verify_jets};
use srcd_core::diffusion::{
    estimate_means, generator_consistency, simulate_paths, Estimator, SimConfig, Simulator,
};
use srcd_core::invariants::{curvature_gram, CDConstants};
use srcd_core::liealg::{adapted_orthonormal_frame, build_example, validate_structure, ValidationReport};
use srcd_core::spectral::{
    gap_bound_kappa, gap_bound_prop41, gap_bound_prop41_optimized, gap_bound_step2, irrep_spectrum_oracle,
};
use srcd_core::{ConnectionData, Error, ExtReal, LieSRStructure, Tensor3};

use crate::args::{CChoice, Command, Common, OracleArgs, SimulateArgs, SpectralArgs, VerifyArgs};
use crate::error::CliError;
use crate::functions;
use crate::structure_file::parse_structure_file;

/// A finished report. The exit code is read off `report["passed"]`.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.report["passed"].as_bool().unwrap_or(false)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

/// A structure together with everything derived from its orthonormal frame.
pub struct Loaded {
    pub raw: LieSRStructure,
    pub framed: LieSRStructure,
    pub conn: ConnectionData,
    pub k: CDConstants,
    pub validation: ValidationReport,
}

pub fn load(common: &Common) -> Result<Loaded, CliError> {
    let raw = match (&common.structure, &common.example) {
        (Some(path), _) => parse_structure_file(path)?,
        (None, Some(spec)) => build_example(spec)?,
        (None, None) => return Err(CliError::Usage("one of --structure or --example is required".into())),
    };
    let validation = validate_structure(&raw)?;
    if let Some(bad) = validation.first_failure() {
        return Err(CliError::Validation {
            check: bad.name.to_string(),
            defect: bad.defect,
        });
    }
    let framed = adapted_orthonormal_frame(&raw)?;
    let conn = ConnectionData::compute(&framed)?;
    let k = CDConstants::compute(&conn)?;
    Ok(Loaded {
        raw,
        framed,
        conn,
        k,
        validation,
    })
}

fn value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn rows(m: &DMatrix<f64>) -> Value {
    m.row_iter()
        .map(|r| r.iter().copied().collect::<Vec<f64>>())
        .collect::<Vec<_>>()
        .into()
}

fn sparse(t: &Tensor3) -> Value {
    let d = t.dim();
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let v = t[(i, j, k)];
                if v != 0.0 {
                    out.push(json!({"i": i, "j": j, "k": k, "value": v}));
                }
            }
        }
    }
    Value::Array(out)
}

fn header(command: &str, seed: u64, l: &Loaded) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("tool".into(), "srcd".into());
    m.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    m.insert("command".into(), command.into());
    m.insert("seed".into(), seed.into());
    m.insert(
        "structure".into(),
        json!({
            "name": l.raw.name,
            "n": l.raw.n,
            "nu": l.raw.nu,
            "step": l.validation.growth.step,
            "bracket_generating": l.validation.growth.bracket_generating,
            "growth_dims": l.validation.growth.dims,
        }),
    );
    m.insert("constants".into(), value(&l.k));
    m
}

fn finish(mut m: Map<String, Value>, passed: bool) -> Outcome {
    m.insert("passed".into(), passed.into());
    Outcome {
        report: Value::Object(m),
    }
}

/// Surfaces internal-consistency failures; anything else is reported inline.
fn soft<T>(r: srcd_core::Result<T>) -> Result<Result<T, Error>, CliError> {
    match r {
        Err(e) if e.is_internal_consistency() => Err(e.into()),
        other => Ok(other),
    }
}

pub fn run(cmd: &Command) -> Result<Outcome, CliError> {
    let common = cmd.common();
    let l = load(common)?;
    let mut m = header(cmd.name(), common.seed, &l);
    match cmd {
        Command::Analyze(_) => analyze(&l, m),
        Command::Cd(a) => {
            let mut grid = Vec::new();
            for &choice in &a.c {
                let (c, how) = resolve_c(&l.k, choice)?;
                let params = cd_parameters(&l.k, c, None)?;
                grid.push(json!({"c_requested": c_label(choice), "c_choice": how, "params": value(&params)}));
            }
            m.insert("cd".into(), grid.into());
            Ok(finish(m, true))
        }
        Command::Verify(a) => verify(&l, a, m),
        Command::Spectral(a) => spectral(&l, a, m),
        Command::Simulate(a) => simulate(&l, a, m),
        Command::Oracle(a) => oracle(&l, a, m),
    }
}

fn analyze(l: &Loaded, mut m: Map<String, Value>) -> Result<Outcome, CliError> {
    m.insert("validation".into(), value(&l.validation));
    m.insert("ric_h_spectrum".into(), value(&l.k.ric_h_spectrum()));
    m.insert(
        "tensors".into(),
        json!({
            "ric_h": rows(&l.k.ric_h),
            "ric_hv": rows(&l.k.ric_hv),
            "curvature_gram": rows(&curvature_gram(&l.conn)),
            "delta_vstar": rows(&l.conn.delta_vstar),
            "drift": l.conn.drift,
            "mean_curvature": l.conn.mean_curv,
            "ehresmann_curvature": sparse(&l.conn.r),
            "co_curvature": sparse(&l.conn.rbar),
        }),
    );
    Ok(finish(m, true))
}

fn c_label(choice: CChoice) -> Value {
    match choice {
        CChoice::Auto => "auto".into(),
        CChoice::Value(v) => value(&v),
    }
}

/// `auto` maximizes the Prop41 bound over `c`; without a feasible `c` it
/// falls back to `inf` when admissible, else 1.
fn resolve_c(k: &CDConstants, choice: CChoice) -> Result<(ExtReal, &'static str), CliError> {
    match choice {
        CChoice::Value(v) => Ok((v, "given")),
        CChoice::Auto => {
            let best = optimize_c(k, None, |p| gap_bound_prop41(p).ok().map(|g| g.bound))?;
            Ok(match best {
                Some(b) => (b.c, "optimized"),
                None if cd_parameters(k, ExtReal::PosInf, None).is_ok() => (ExtReal::PosInf, "fallback"),
                None => (ExtReal::Finite(1.0), "fallback"),
            })
        }
    }
}

fn verify(l: &Loaded, a: &VerifyArgs, mut m: Map<String, Value>) -> Result<Outcome, CliError> {
    if a.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let mut grid = Vec::new();
    let mut passed = true;
    let mut min_rel = f64::INFINITY;
    for &choice in &a.c {
        let (c, how) = resolve_c(&l.k, choice)?;
        let params = cd_parameters(&l.k, c, None)?;
        for &ell in &a.ell {
            let summary = verify_jets(&l.conn, &l.k, c, ell, a.samples, a.common.seed, a.tol)?;
            passed &= summary.passed;
            min_rel = min_rel.min(summary.min_relative_margin);
            grid.push(json!({
                "ell": ell,
                "c_requested": c_label(choice),
                "c_choice": how,
                "params": value(&params),
                "summary": value(&summary),
            }));
        }
    }
    m.insert("samples".into(), a.samples.into());
    m.insert("tol".into(), a.tol.into());
    m.insert("min_relative_margin".into(), min_rel.into());
    m.insert("verification".into(), grid.into());
    Ok(finish(m, passed))
}

fn two_j(jmax: f64) -> Result<u32, CliError> {
    let t = 2.0 * jmax;
    if !(t >= 0.0 && t.fract() == 0.0 && t <= 1000.0) {
        return Err(CliError::Usage(format!("--jmax must be a non-negative multiple of 1/2, got {jmax}")));
    }
    Ok(t as u32)
}

fn oracle_unavailable(e: &Error) -> bool {
    matches!(e, Error::UnsupportedAlgebra(_) | Error::NoRealization(_) | Error::JMaxTooSmall(_))
}

fn spectral(l: &Loaded, a: &SpectralArgs, mut m: Map<String, Value>) -> Result<Outcome, CliError> {
    let two_j_max = two_j(a.jmax)?;
    let attempts = [
        ("prop41", soft(gap_bound_prop41_optimized(&l.k, None))?),
        ("kappa_corollary", soft(gap_bound_kappa(&l.k, None))?),
        ("step2_privileged", soft(gap_bound_step2(&l.raw))?),
    ];
    let mut bounds = Vec::new();
    let mut best: Option<f64> = None;
    for (name, r) in &attempts {
        match r {
            Ok(g) => {
                best = Some(best.map_or(g.bound, |b: f64| b.max(g.bound)));
                bounds.push(value(g));
            }
            Err(e) => bounds.push(json!({"source": name, "error": e.to_string()})),
        }
    }
    m.insert("bounds".into(), bounds.into());
    m.insert("best_bound".into(), value(&best));
    let mut passed = true;
    match soft(irrep_spectrum_oracle(&l.raw, two_j_max))? {
        Ok(o) => {
            let below = best.is_none_or(|b| b <= o.gap + 1e-9 * o.gap.max(1.0));
            passed = below;
            m.insert(
                "oracle".into(),
                json!({"two_j_max": o.two_j_max, "gap": o.gap, "lowest_nonzero": o.nonzero.iter().take(5).collect::<Vec<_>>()}),
            );
            m.insert("bound_below_gap".into(), below.into());
        }
        Err(e) if oracle_unavailable(&e) => {
            m.insert("oracle".into(), json!({"error": e.to_string()}));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(finish(m, passed))
}

fn oracle(l: &Loaded, a: &OracleArgs, mut m: Map<String, Value>) -> Result<Outcome, CliError> {
    let o = irrep_spectrum_oracle(&l.raw, two_j(a.jmax)?)?;
    m.insert("oracle".into(), value(&o));
    Ok(finish(m, true))
}

fn simulate(l: &Loaded, a: &SimulateArgs, mut m: Map<String, Value>) -> Result<Outcome, CliError> {
    let sim = Simulator::new(&l.framed, &l.conn)?;
    let cfg = SimConfig::new(a.t, a.steps, a.paths, a.common.seed)?;
    let f = functions::resolve(&a.function, sim.dim)?;
    let g0 = DMatrix::identity(sim.dim, sim.dim);
    let est = estimate_means(&sim, &cfg, &*f, &g0, &[cfg.steps], Estimator::ControlVariate)?[0];
    m.insert("config".into(), value(&cfg));
    m.insert("function".into(), a.function.clone().into());
    m.insert("mean".into(), value(&est));
    let passed = match soft(generator_consistency(&l.framed, &l.conn, &cfg, &*f, &g0))? {
        Ok(r) => {
            m.insert("consistency".into(), value(&r));
            r.passed
        }
        Err(e) => {
            m.insert("consistency".into(), json!({"error": e.to_string()}));
            false
        }
    };
    if let Some(path) = &a.csv {
        let sample = simulate_paths(&l.framed, &l.conn, &cfg)?;
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        sample.write_csv(file)?;
        m.insert("csv".into(), path.display().to_string().into());
        m.insert("max_orthogonality_defect".into(), sample.max_orthogonality_defect().into());
    }
    Ok(finish(m, passed))
}
