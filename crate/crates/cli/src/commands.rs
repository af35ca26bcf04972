use std::io::Write;

use disentangle::checks::{CheckPoint, CheckRegistry};
use disentangle::oracles::{McConfig, QuadratureSpec};
use disentangle::{analyze, Analysis, GaussianParams, Moment};

use crate::config::{Axis, RunConfig, SweepSpec};
use crate::{CliError, EXIT_ENTANGLED, EXIT_OK, EXIT_VERIFY_FAILED};

pub const CSV_HEADER: &str = "axis_value,det_g,det_c,det_m,g,c,c_prime,duan_value,margin,separable";

/// Shortest round-trip text, switching to exponent form far from unity.
fn num(x: f64) -> String {
    if x != 0.0 && x.is_finite() && !(1e-4..1e15).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn status_word(separable: bool) -> &'static str {
    if separable {
        "SEPARABLE"
    } else {
        "ENTANGLED"
    }
}

pub fn cmd_report(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let a = analyze(
        &cfg.params,
        cfg.temperature,
        cfg.time,
        &cfg.consts,
        cfg.length_scale_value(),
        cfg.tolerance,
    )?;
    write_report(cfg, &a, out)?;
    if cfg.status_exit && !a.report.separable {
        Ok(EXIT_ENTANGLED)
    } else {
        Ok(EXIT_OK)
    }
}

fn write_report(cfg: &RunConfig, a: &Analysis, out: &mut dyn Write) -> std::io::Result<()> {
    let c = &cfg.consts;
    let m = &a.moments;
    let sf = &a.standard_form;
    let inv = &a.invariants;
    let r = &a.report;
    writeln!(
        out,
        "Two-particle Gaussian state, thermal drift, free evolution"
    )?;
    writeln!(
        out,
        "  a11 = {}  a12 = {}  T = {}  t = {}",
        cfg.params.a11(),
        cfg.params.a12(),
        cfg.temperature,
        cfg.time
    )?;
    writeln!(
        out,
        "  m = {}  hbar = {}  k = {}  L = {}",
        c.mass(),
        c.hbar(),
        c.boltzmann(),
        a.blocks.length_scale()
    )?;
    writeln!(out)?;
    writeln!(out, "Second moments at t")?;
    writeln!(out, "  <x1^2> = <x2^2>          {:>14.6}", m.xx())?;
    writeln!(out, "  <x1 x2>                  {:>14.6}", m.x1x2())?;
    writeln!(out, "  <p1^2> = <p2^2>          {:>14.6}", m.pp())?;
    writeln!(out, "  <p1 p2>                  {:>14.6}", m.p1p2())?;
    writeln!(out, "  <x1 p1 + p1 x1>/2        {:>14.6}", m.xp_sym())?;
    writeln!(out, "  <x2 p1> = <x1 p2>        {:>14.6}", m.x_cross_p())?;
    writeln!(out)?;
    writeln!(out, "Determinant invariants")?;
    writeln!(out, "  det G                    {:>14.6}", inv.det_g())?;
    writeln!(out, "  det C                    {:>14.6}", inv.det_c())?;
    writeln!(out, "  det M                    {:>14.6}", inv.det_m())?;
    writeln!(out)?;
    writeln!(out, "Standard form")?;
    writeln!(out, "  g                        {:>14.6}", sf.g())?;
    writeln!(out, "  c                        {:>14.6}", sf.c())?;
    writeln!(out, "  c'                       {:>14.6}", sf.c_prime())?;
    writeln!(out)?;
    writeln!(
        out,
        "Duan criterion: separable iff (g - |c|)(g - |c'|) >= 1/4"
    )?;
    writeln!(out, "  duan value               {:>14.6}", r.duan_value)?;
    writeln!(out, "  margin                   {:>14.6}", r.margin)?;
    writeln!(
        out,
        "  state                    {:>14}",
        status_word(r.separable)
    )?;
    writeln!(out)?;
    writeln!(out, "Thresholds (time independent)")?;
    writeln!(
        out,
        "  T* = hbar^2 |a12| / 2mk  {:>14.6}",
        r.critical_temperature
    )?;
    writeln!(out, "  a12* = 2mkT / hbar^2     {:>14.6}", r.critical_a12)?;
    writeln!(out)?;
    writeln!(out, "[values]")?;
    let kv: [(&str, f64); 20] = [
        ("a11", cfg.params.a11()),
        ("a12", cfg.params.a12()),
        ("temperature", cfg.temperature),
        ("time", cfg.time),
        ("length_scale", a.blocks.length_scale()),
        (Moment::Xx.name(), m.xx()),
        (Moment::X1X2.name(), m.x1x2()),
        (Moment::Pp.name(), m.pp()),
        (Moment::P1P2.name(), m.p1p2()),
        (Moment::XpSym.name(), m.xp_sym()),
        (Moment::XCrossP.name(), m.x_cross_p()),
        ("det_g", inv.det_g()),
        ("det_c", inv.det_c()),
        ("det_m", inv.det_m()),
        ("g", sf.g()),
        ("c", sf.c()),
        ("c_prime", sf.c_prime()),
        ("duan_value", r.duan_value),
        ("margin", r.margin),
        ("critical_temperature", r.critical_temperature),
    ];
    for (k, v) in kv {
        writeln!(out, "{k}={}", num(v))?;
    }
    writeln!(out, "critical_a12={}", num(r.critical_a12))?;
    writeln!(out, "separable={}", u8::from(r.separable))?;
    Ok(())
}

/// One CSV row per grid point; all points are validated before any output.
pub fn cmd_sweep(cfg: &RunConfig, spec: &SweepSpec, out: &mut dyn Write) -> Result<i32, CliError> {
    let rows = spec
        .values()
        .into_iter()
        .map(|x| {
            let (params, temperature, time) = match spec.axis {
                Axis::Temperature => (cfg.params, x, cfg.time),
                Axis::A12 => (
                    GaussianParams::new(cfg.params.a11(), x)?,
                    cfg.temperature,
                    cfg.time,
                ),
                Axis::Time => (cfg.params, cfg.temperature, x),
            };
            let a = analyze(
                &params,
                temperature,
                time,
                &cfg.consts,
                cfg.length_scale_value(),
                cfg.tolerance,
            )?;
            Ok((x, a))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    writeln!(out, "{CSV_HEADER}")?;
    for (x, a) in rows {
        let inv = &a.invariants;
        let sf = &a.standard_form;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            num(x),
            num(inv.det_g()),
            num(inv.det_c()),
            num(inv.det_m()),
            num(sf.g()),
            num(sf.c()),
            num(sf.c_prime()),
            num(a.report.duan_value),
            num(a.report.margin),
            u8::from(a.report.separable)
        )?;
    }
    Ok(EXIT_OK)
}

pub fn list_checks(out: &mut dyn Write) -> Result<i32, CliError> {
    for check in CheckRegistry::builtin().iter() {
        writeln!(out, "{:<14} {}", check.name(), check.summary())?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_verify(cfg: &RunConfig, only: &[String], out: &mut dyn Write) -> Result<i32, CliError> {
    let point = CheckPoint {
        params: cfg.params,
        temperature: cfg.temperature,
        time: cfg.time,
        consts: cfg.consts,
        tolerance: cfg.tolerance,
        mc: McConfig::new(cfg.samples, cfg.seed),
        quadrature: QuadratureSpec::default(),
    };
    let registry = CheckRegistry::builtin();
    let outcomes = registry.run(only, &point)?;

    let mut failed = Vec::new();
    for (name, outcome) in &outcomes {
        let summary = registry.get(name).map(|c| c.summary()).unwrap_or_default();
        writeln!(out, "check {name}: {summary}")?;
        match outcome {
            Ok(outcome) => {
                for line in &outcome.lines {
                    writeln!(
                        out,
                        "  {:<28} {:>12.3e}  bound {:>9.1e}  {}",
                        line.quantity,
                        line.deviation,
                        line.bound,
                        if line.passed() { "ok" } else { "FAIL" }
                    )?;
                    if !line.passed() {
                        failed.push(format!("{name}: {}", line.quantity));
                    }
                }
            }
            Err(e) => {
                writeln!(out, "  error: {e}")?;
                failed.push(format!("{name}: {e}"));
            }
        }
    }
    let passed = outcomes
        .iter()
        .filter(|(_, o)| o.as_ref().is_ok_and(|o| o.passed()))
        .count();
    writeln!(out, "{passed}/{} checks passed", outcomes.len())?;
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        for f in &failed {
            writeln!(out, "FAILED {f}")?;
        }
        Ok(EXIT_VERIFY_FAILED)
    }
}
