//! The subcommands, as functions from parsed input to report values, so
//! they can be exercised without spawning a process.

use std::fmt;
use std::path::Path;

use serde_json::{json, Value};

use super::plant_file::{parse_plant, plant_to_json, ParseError, PlantFile, PlantFormat};
use super::report::{format_num, input_block, matrix, num, opt_num, reals, spectrum};
use crate::analysis::{
    degree_of_stability, is_sni, linear_grid, stability_bound_with, sweep_epsilon_with, FeasibilityProfile,
    StabilityBoundReport,
};
use crate::decomposition::{a_r_with, schur_partition_with};
use crate::matrix::eigenvalues;
use crate::plant::{check_assumptions_with, closed_loop, AssumptionReport, Plant};
use crate::synthesis::{synthesize_with, SynthesisOutcome};
use crate::{Config, Error};

/// Errors that abort a command. Mathematical verdicts never do.
#[derive(Debug)]
pub enum CliError {
    Io { path: String, message: String },
    Parse { path: String, error: ParseError },
    Argument(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Argument(_) => 2,
            CliError::Parse { .. } => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, message } => write!(f, "cannot read {path}: {message}"),
            CliError::Parse { path, error } => write!(f, "parse error in {path}: {error}"),
            CliError::Argument(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

pub fn load_plant(path: &Path, format: PlantFormat) -> Result<PlantFile, CliError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: shown.clone(),
        message: e.to_string(),
    })?;
    parse_plant(&text, format).map_err(|error| CliError::Parse { path: shown, error })
}

/// The plant used throughout the guide: three states, one unstable
/// transmission zero at `1 + √7` and a stable one at `1 − √7`.
pub fn demo_plant() -> Plant {
    Plant::from_slices(
        &[-1.0, 0.0, -1.0, 1.0, 0.0, -1.0, -1.0, 2.0, 1.0],
        &[1.0, 1.0, 1.0],
        &[0.0, 1.0, 1.0],
        &[1.0, 1.0, 0.0],
    )
    .expect("demo plant is well formed")
}

fn assumptions_block(rep: &AssumptionReport) -> Value {
    json!({
        "c1b2": num(rep.c1b2),
        "a1_holds": rep.a1_holds,
        "r_value": num(rep.r_value),
        "a2_holds": rep.a2_holds,
        "controllable": rep.controllable,
    })
}

fn assumption_warnings(rep: &AssumptionReport) -> Vec<String> {
    let mut w = Vec::new();
    if !rep.a1_holds {
        w.push(Error::AssumptionA1Violated { c1b2: rep.c1b2 }.to_string());
    }
    if !rep.a2_holds {
        w.push(Error::AssumptionA2Violated { r: rep.r_value }.to_string());
    }
    w
}

fn bound_block(b: &StabilityBoundReport) -> Value {
    json!({
        "case": b.case,
        "gamma": opt_num(b.gamma),
        "n_unstable": b.n_unstable,
        "n_zero": b.n_zero,
        "n_stable": b.n_stable,
        "distinct": b.distinct,
    })
}

fn bound_warning(b: &StabilityBoundReport) -> Option<String> {
    (b.gamma.is_none()).then(|| {
        format!(
            "zero dynamics out of scope for the bound ({} unstable, {} on the axis, {} stable, distinct: {})",
            b.n_unstable, b.n_zero, b.n_stable, b.distinct
        )
    })
}

/// `check`: assumptions, zero-dynamics spectrum and the achievable bound.
pub fn cmd_check(file: &PlantFile, config: &Config) -> Value {
    let plant = &file.plant;
    let rep = check_assumptions_with(plant, &config.tol);
    let mut warnings = assumption_warnings(&rep);
    let (mut a_q, mut eigs, mut bound) = (Value::Null, Value::Null, Value::Null);
    if rep.a1_holds {
        match a_r_with(plant, 0.0, &config.tol).and_then(|aq| {
            let b = stability_bound_with(plant, &config.tol)?;
            Ok((aq, b))
        }) {
            Ok((aq, b)) => {
                a_q = matrix(&aq);
                eigs = spectrum(&b.eigs_aq);
                warnings.extend(bound_warning(&b));
                bound = bound_block(&b);
            }
            Err(e) => warnings.push(e.to_string()),
        }
    }
    json!({
        "command": "check",
        "input": input_block(file),
        "assumptions": assumptions_block(&rep),
        "a_q": a_q,
        "a_q_spectrum": eigs,
        "stability_bound": bound,
        "warnings": warnings,
    })
}

fn verify_block(plant: &Plant, out: &SynthesisOutcome, config: &Config) -> Result<Value, Error> {
    let Some(k) = &out.gain else { return Ok(Value::Null) };
    let cl = closed_loop(plant, k)?;
    let sni = is_sni(&cl, &config.grid.frequencies(), &config.tol)?;
    Ok(json!({
        "poles": spectrum(&cl.poles()?),
        "max_pole_re": num(sni.max_pole_re),
        "degree_of_stability": num(degree_of_stability(&cl)?),
        "sni": {
            "holds": sni.holds,
            "margin": num(sni.margin),
            "raw_margin": num(sni.raw_margin),
            "worst_omega": num(sni.worst_omega),
        },
    }))
}

fn synthesis_block(out: &SynthesisOutcome) -> Value {
    let summary = if out.feasible {
        format!("closed loop is strictly negative imaginary with degree of stability {}", format_num(out.epsilon))
    } else {
        format!("strict negative imaginariness is not guaranteed by this method at epsilon = {}", format_num(out.epsilon))
    };
    json!({
        "feasible": out.feasible,
        "branch": out.branch,
        "dim_antistable": out.dim_antistable,
        "summary": summary,
        "x_spectrum": reals(&out.x_eigenvalues),
        "x_min_eig": opt_num(out.x_min_eig),
        "t_min_eig": opt_num(out.t_min_eig),
        "s_min_eig": opt_num(out.s_min_eig),
        "certificate": out.certificate.as_ref().map_or(Value::Null, matrix),
    })
}

fn gain_block(out: &SynthesisOutcome) -> Value {
    out.gain.as_ref().map_or(Value::Null, |k| {
        json!({ "rows": k.nrows(), "cols": k.ncols(), "K": matrix(k) })
    })
}

fn check_epsilon(eps: f64) -> Result<(), CliError> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(CliError::Argument(Error::InvalidEpsilon(eps).to_string()))
    }
}

/// `synth --eps`: gain, certificate and closed-loop verification.
pub fn cmd_synth(file: &PlantFile, epsilon: f64, config: &Config) -> Result<Value, CliError> {
    check_epsilon(epsilon)?;
    let plant = &file.plant;
    let rep = check_assumptions_with(plant, &config.tol);
    let mut warnings = assumption_warnings(&rep);
    let (mut synthesis, mut gain, mut verification) = (Value::Null, Value::Null, Value::Null);
    if rep.a1_holds && rep.a2_holds {
        match synthesize_with(plant, epsilon, &config.tol) {
            Ok(out) => {
                synthesis = synthesis_block(&out);
                gain = gain_block(&out);
                match verify_block(plant, &out, config) {
                    Ok(v) => verification = v,
                    Err(e) => warnings.push(e.to_string()),
                }
            }
            Err(e) => warnings.push(e.to_string()),
        }
    }
    Ok(json!({
        "command": "synth",
        "input": input_block(file),
        "epsilon": num(epsilon),
        "assumptions": assumptions_block(&rep),
        "synthesis": synthesis,
        "gain": gain,
        "closed_loop": verification,
        "warnings": warnings,
    }))
}

pub struct SweepOutput {
    pub report: Value,
    pub csv: String,
}

pub const CSV_HEADER: [&str; 6] = ["epsilon", "feasible", "branch", "x_min_eig", "max_pole_re", "sni"];

pub fn sweep_csv(profile: Option<&FeasibilityProfile>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in profile.map_or(&[][..], |p| &p.records[..]) {
        w.write_record([
            format_num(r.epsilon),
            r.feasible.to_string(),
            r.branch.map_or(String::new(), |b| b.as_str().to_string()),
            r.x_min_eig.map_or(String::new(), format_num),
            r.max_pole_re.map_or(String::new(), format_num),
            r.sni.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

/// `sweep`: feasibility and verification over a linear ε grid.
pub fn cmd_sweep(
    file: &PlantFile,
    eps_min: f64,
    eps_max: f64,
    steps: usize,
    config: &Config,
) -> Result<SweepOutput, CliError> {
    let grid = linear_grid(eps_min, eps_max, steps).map_err(|e| CliError::Argument(e.to_string()))?;
    let plant = &file.plant;
    let rep = check_assumptions_with(plant, &config.tol);
    let mut warnings = assumption_warnings(&rep);
    let profile = if rep.a1_holds && rep.a2_holds {
        match sweep_epsilon_with(plant, &grid, config) {
            Ok(p) => Some(p),
            Err(e) => {
                warnings.push(e.to_string());
                None
            }
        }
    } else {
        None
    };
    let records: Vec<Value> = profile.as_ref().map_or(Vec::new(), |p| {
        p.records
            .iter()
            .map(|r| {
                json!({
                    "epsilon": num(r.epsilon),
                    "feasible": r.feasible,
                    "branch": r.branch,
                    "x_min_eig": opt_num(r.x_min_eig),
                    "max_pole_re": opt_num(r.max_pole_re),
                    "sni": r.sni,
                    "note": r.note,
                })
            })
            .collect()
    });
    if let Some(p) = &profile {
        if p.theoretical_gamma.is_none() {
            warnings.push("zero dynamics out of scope for the bound; no theoretical gamma".into());
        }
    }
    let report = json!({
        "command": "sweep",
        "input": input_block(file),
        "grid": { "eps_min": num(eps_min), "eps_max": num(eps_max), "steps": steps },
        "assumptions": assumptions_block(&rep),
        "bound_case": profile.as_ref().map(|p| p.bound_case),
        "theoretical_gamma": opt_num(profile.as_ref().and_then(|p| p.theoretical_gamma)),
        "empirical_max_eps": opt_num(profile.as_ref().and_then(|p| p.empirical_max_eps)),
        "records": records,
        "warnings": warnings,
    });
    Ok(SweepOutput {
        report,
        csv: sweep_csv(profile.as_ref()),
    })
}

pub const DEMO_BOUNDARY: f64 = 1.6458;
pub const DEMO_PROBE: f64 = 1.6458 + 1e-6;

/// `demo`: the built-in three-state example end to end.
pub fn cmd_demo(config: &Config) -> Value {
    let plant = demo_plant();
    let tol = &config.tol;
    let aq = a_r_with(&plant, 0.0, tol).expect("demo plant satisfies the assumptions");
    let bound = stability_bound_with(&plant, tol).expect("demo plant satisfies the assumptions");
    let ar = a_r_with(&plant, DEMO_BOUNDARY, tol).expect("demo plant satisfies the assumptions");

    let probe = match (schur_partition_with(&plant, DEMO_PROBE, tol), synthesize_with(&plant, DEMO_PROBE, tol)) {
        (Ok(part), Ok(out)) => json!({
            "epsilon": num(DEMO_PROBE),
            "dim_antistable": part.dim_antistable,
            "x_spectrum": reals(&out.x_eigenvalues),
            "feasible": out.feasible,
        }),
        (Err(e), _) | (_, Err(e)) => json!({ "epsilon": num(DEMO_PROBE), "error": e.to_string() }),
    };

    let verdicts: Vec<Value> = [0.5, 1.0, DEMO_PROBE]
        .iter()
        .map(|&eps| match synthesize_with(&plant, eps, tol) {
            Ok(out) => {
                let cl = verify_block(&plant, &out, config).unwrap_or(Value::Null);
                json!({
                    "epsilon": num(eps),
                    "feasible": out.feasible,
                    "branch": out.branch,
                    "x_min_eig": opt_num(out.x_min_eig),
                    "degree_of_stability": cl.get("degree_of_stability").cloned().unwrap_or(Value::Null),
                    "sni": cl.pointer("/sni/holds").cloned().unwrap_or(Value::Bool(false)),
                })
            }
            Err(e) => json!({ "epsilon": num(eps), "error": e.to_string() }),
        })
        .collect();

    json!({
        "command": "demo",
        "plant": plant_to_json(&plant),
        "a_q": matrix(&aq),
        "a_q_spectrum": spectrum(&eigenvalues(&aq).expect("3x3 spectrum")),
        "stability_bound": bound_block(&bound),
        "a_r_at_boundary": { "epsilon": num(DEMO_BOUNDARY), "matrix": matrix(&ar) },
        "past_boundary": probe,
        "verdicts": verdicts,
    })
}
