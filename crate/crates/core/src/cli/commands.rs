//! One function per subcommand, each returning the files it produces.

use std::path::Path;

use serde::Serialize;

use super::config::RunConfig;
use crate::ambiguity::{self, decay_bound, sparse_synthesize, MpBenchConfig};
use crate::error::{Error, Result};
use crate::io::{
    decay_csv, json_bytes, minimizer_csv, mp_bench_csv, phase_function_csv, read_phase_function_csv, read_signal_csv,
    read_sparse_phase, signal_csv, trace_csv, OutputSet,
};
use crate::transforms::{analyze as analyze_signal, synthesize as synthesize_signal, TransformParams};
use crate::uncertainty::{global_uncertainty, UncertaintyReport};
use crate::window_design::{
    optimize_window, verify_minimizer as verify_family, ConvergenceStatus, MinimizerFamily, Objective,
};

#[derive(Serialize)]
struct AnalyzeSummary<'a> {
    params: &'a TransformParams,
    window: &'a str,
    grid_points: usize,
    /// `‖Af‖` of the window.
    admissible_norm: f64,
    /// `ℓ²` norm of the phase function with the Haar weights.
    phase_norm: f64,
}

pub fn analyze(cfg: &RunConfig, signal: Option<&Path>) -> Result<OutputSet> {
    let spec = cfg.spec()?;
    let path = signal
        .map(Path::to_path_buf)
        .or_else(|| cfg.signal.as_ref().map(|p| cfg.resolve(p)))
        .ok_or_else(|| Error::InvalidArgument("analyze needs --signal or \"signal\" in the configuration".into()))?;
    let s = read_signal_csv(&path, &spec)?;
    let f = cfg.load_window(&spec)?;
    let v = analyze_signal(&spec, &f, &s)?;
    let mut out = OutputSet::default();
    out.add("analysis.csv", phase_function_csv(&spec, &v)?);
    out.add(
        "analysis.json",
        json_bytes(&AnalyzeSummary {
            params: &spec.params,
            window: cfg.window_source(),
            grid_points: spec.grid.len(),
            admissible_norm: spec.admissible_norm(&f)?,
            phase_norm: v.norm(&spec.grid),
        })?,
    );
    Ok(out)
}

#[derive(Serialize)]
struct SynthesizeSummary<'a> {
    params: &'a TransformParams,
    window: &'a str,
    /// `phase_function` for `V_f*[F]`, `sparse` for `Σ c_n π(g_n) f/‖f‖`.
    mode: &'static str,
    /// `c` with `V_f* V_f s = c s`, for the phase-function mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    reconstruction_constant: Option<f64>,
    norm: f64,
}

pub fn synthesize(cfg: &RunConfig, phase: Option<&Path>) -> Result<OutputSet> {
    let spec = cfg.spec()?;
    let path = phase
        .map(Path::to_path_buf)
        .or_else(|| cfg.phase.as_ref().map(|p| cfg.resolve(p)))
        .ok_or_else(|| Error::InvalidArgument("synthesize needs --phase or \"phase\" in the configuration".into()))?;
    let f = cfg.load_window(&spec)?;
    let sparse = path.extension().is_some_and(|e| e == "json");
    let (s, constant) = if sparse {
        (sparse_synthesize(&spec, &f, &read_sparse_phase(&path)?)?, None)
    } else {
        let pf = read_phase_function_csv(&path, &spec)?;
        let af = spec.admissible_norm(&f)?;
        (
            synthesize_signal(&spec, &f, &pf)?,
            Some(spec.nominal_constant * af * af),
        )
    };
    let mut out = OutputSet::default();
    out.add("synthesis.csv", signal_csv(&s)?);
    out.add(
        "synthesis.json",
        json_bytes(&SynthesizeSummary {
            params: &spec.params,
            window: cfg.window_source(),
            mode: if sparse { "sparse" } else { "phase_function" },
            reconstruction_constant: constant,
            norm: s.norm(),
        })?,
    );
    Ok(out)
}

pub fn uncertainty(cfg: &RunConfig) -> Result<OutputSet> {
    let spec = cfg.spec()?;
    let weights = cfg.weights(&spec)?;
    let f = cfg.load_window(&spec)?;
    let report = global_uncertainty(&spec, &f, &weights, cfg.product)?;
    let mut out = OutputSet::default();
    out.add("uncertainty.json", json_bytes(&report)?);
    Ok(out)
}

#[derive(Serialize)]
struct OptimizeSummary<'a> {
    params: &'a TransformParams,
    objective: Objective,
    /// Starting window, `random` for the seeded random start.
    start: &'a str,
    seed: u64,
    value: f64,
    iterations: usize,
    status: ConvergenceStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<UncertaintyReport>,
}

pub fn optimize(cfg: &RunConfig) -> Result<OutputSet> {
    let spec = cfg.spec()?;
    let weights = cfg.weights(&spec)?;
    let start = match &cfg.window {
        Some(_) => Some(cfg.load_window(&spec)?),
        None => None,
    };
    let r = optimize_window(&spec, cfg.objective, &weights, &cfg.optimizer, start.as_ref())?;
    let report = match cfg.objective {
        Objective::Global => Some(global_uncertainty(&spec, &r.window, &weights, cfg.product)?),
        Objective::Plain => None,
    };
    let mut out = OutputSet::default();
    out.add("window.csv", signal_csv(&r.window)?);
    out.add("trace.csv", trace_csv(&r.trace)?);
    out.add(
        "optimize.json",
        json_bytes(&OptimizeSummary {
            params: &spec.params,
            objective: cfg.objective,
            start: cfg.window.as_deref().unwrap_or("random"),
            seed: cfg.optimizer.seed,
            value: r.objective,
            iterations: r.iterations,
            status: r.status,
            report,
        })?,
    );
    Ok(out)
}

pub fn verify_minimizer(cfg: &RunConfig) -> Result<OutputSet> {
    let m = &cfg.minimizer;
    let family = MinimizerFamily {
        kappa_exponent: m.kappa_exponent,
        ..MinimizerFamily::default()
    };
    if !(family.kappa_exponent.is_finite() && family.kappa_exponent > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "kappa_exponent {} must be positive",
            m.kappa_exponent
        )));
    }
    let report = verify_family(&family, &m.n_list, m.grid_points)?;
    let mut out = OutputSet::default();
    out.add("minimizer.csv", minimizer_csv(&report)?);
    out.add("minimizer.json", json_bytes(&report)?);
    Ok(out)
}

#[derive(Serialize)]
struct DecaySummary<'a> {
    params: &'a TransformParams,
    window: &'a str,
    block: &'a str,
    direction: &'a [f64],
    tolerance: f64,
    grid_points: usize,
    violations: usize,
    unbounded: usize,
    max_ratio: f64,
}

pub fn decay(cfg: &RunConfig) -> Result<OutputSet> {
    let spec = cfg.spec()?;
    let f = cfg.load_window(&spec)?;
    let r = decay_bound(&spec, &f, cfg.decay.block, cfg.decay.direction.as_deref())?;
    let mut out = OutputSet::default();
    out.add("decay.csv", decay_csv(&spec, &r)?);
    out.add(
        "decay.json",
        json_bytes(&DecaySummary {
            params: &spec.params,
            window: cfg.window_source(),
            block: &r.block,
            direction: &r.direction,
            tolerance: r.tolerance,
            grid_points: r.rows.len(),
            violations: r.violations,
            unbounded: r.unbounded,
            max_ratio: r.max_ratio,
        })?,
    );
    Ok(out)
}

#[derive(Serialize)]
struct AmbiguitySummary<'a> {
    params: &'a TransformParams,
    window: &'a str,
    value_at_identity: f64,
    max_abs_off_identity: f64,
}

pub fn ambiguity(cfg: &RunConfig) -> Result<OutputSet> {
    let spec = cfg.spec()?;
    let f = cfg.load_window(&spec)?;
    let a = ambiguity::ambiguity(&spec, &f)?;
    let id = spec
        .locate(&spec.group.identity())
        .ok_or_else(|| Error::GridMismatch("the identity is not on the phase grid".into()))?;
    let off = a
        .values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != id)
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max);
    let mut out = OutputSet::default();
    out.add("ambiguity.csv", phase_function_csv(&spec, &a)?);
    out.add(
        "ambiguity.json",
        json_bytes(&AmbiguitySummary {
            params: &spec.params,
            window: cfg.window_source(),
            value_at_identity: a.values[id].re,
            max_abs_off_identity: off,
        })?,
    );
    Ok(out)
}

#[derive(Serialize)]
struct MpBenchSummary<'a> {
    config: &'a MpBenchConfig,
    optimized_uncertainty: f64,
    flat_uncertainty: f64,
    mean_recovery_optimized: f64,
    mean_recovery_flat: f64,
    optimized_beats_flat: bool,
}

pub fn mp_bench(cfg: &RunConfig) -> Result<OutputSet> {
    let r = ambiguity::mp_bench(&cfg.mp_bench)?;
    let mut out = OutputSet::default();
    out.add("mp_bench.csv", mp_bench_csv(&r.rows)?);
    out.add(
        "mp_bench.json",
        json_bytes(&MpBenchSummary {
            config: &r.config,
            optimized_uncertainty: r.optimized_uncertainty,
            flat_uncertainty: r.flat_uncertainty,
            mean_recovery_optimized: r.mean_recovery_optimized,
            mean_recovery_flat: r.mean_recovery_flat,
            optimized_beats_flat: r.mean_recovery_optimized > r.mean_recovery_flat,
        })?,
    );
    Ok(out)
}
