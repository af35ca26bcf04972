//! Verification checks behind a common trait, registered by name.
//!
//! The CLI's `verify` command runs every registered check, or the subset
//! named with `--check`. New checks plug in through [`CheckRegistry::register`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    evolve_moments, initial_moments, thermal_moments, GaussianParams, Moment, PhysicalConstants,
    VelocityPair,
};
use crate::oracles::{
    closed_forms, gaussian_moment_identity, mc_thermal_moments, quadrature_moments,
    scaled_deviation, verify_closed_forms, McConfig, QuadratureSpec,
};
use crate::separability::{covariance_blocks, det_invariants};

/// Number of standard errors a Monte Carlo estimate may sit from its target.
pub const MC_SIGMA_GATE: f64 = 5.0;
/// Bound on entries the Monte Carlo reproduces without sampling noise.
pub const MC_EXACT_BOUND: f64 = 1e-12;
pub const QUADRATURE_MOMENT_BOUND: f64 = 1e-6;
pub const QUADRATURE_NORM_BOUND: f64 = 1e-8;

/// The evaluation point and knobs shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckPoint {
    pub params: GaussianParams,
    pub temperature: f64,
    pub time: f64,
    pub consts: PhysicalConstants,
    pub tolerance: f64,
    pub mc: McConfig,
    pub quadrature: QuadratureSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub quantity: String,
    pub deviation: f64,
    pub bound: f64,
}

impl CheckLine {
    pub fn new(quantity: impl Into<String>, deviation: f64, bound: f64) -> Self {
        CheckLine {
            quantity: quantity.into(),
            deviation,
            bound,
        }
    }

    pub fn passed(&self) -> bool {
        self.deviation <= self.bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub check: &'static str,
    pub lines: Vec<CheckLine>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(CheckLine::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.lines.iter().filter(|l| !l.passed())
    }
}

pub trait Check: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn run(&self, point: &CheckPoint) -> Result<CheckOutcome>;
}

pub struct CheckRegistry {
    checks: Vec<Box<dyn Check>>,
}

impl CheckRegistry {
    pub fn empty() -> Self {
        CheckRegistry { checks: Vec::new() }
    }

    pub fn builtin() -> Self {
        let mut registry = Self::empty();
        registry.register(Box::new(ClosedFormGrid));
        registry.register(Box::new(DeterminantPaths));
        registry.register(Box::new(MonteCarloCheck));
        registry.register(Box::new(QuadratureCheck));
        registry
    }

    /// Adds a check, replacing any existing check with the same name.
    pub fn register(&mut self, check: Box<dyn Check>) {
        match self.checks.iter().position(|c| c.name() == check.name()) {
            Some(i) => self.checks[i] = check,
            None => self.checks.push(check),
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.checks.iter().map(|c| c.name()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn Check> {
        self.checks
            .iter()
            .find(|c| c.name() == name)
            .map(|c| c.as_ref())
            .ok_or_else(|| Error::UnknownCheck(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Check> {
        self.checks.iter().map(|c| c.as_ref())
    }

    /// Runs the named checks (all of them for an empty list) concurrently,
    /// returning outcomes in the requested order.
    pub fn run(
        &self,
        names: &[String],
        point: &CheckPoint,
    ) -> Result<Vec<(&'static str, Result<CheckOutcome>)>> {
        let selected: Vec<&dyn Check> = if names.is_empty() {
            self.iter().collect()
        } else {
            names.iter().map(|n| self.get(n)).collect::<Result<_>>()?
        };
        Ok(selected
            .par_iter()
            .map(|c| (c.name(), c.run(point)))
            .collect())
    }
}

impl Default for CheckRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Fixed grid of `(a11, a12, T, t)` points in the units of `consts`, plus the
/// caller's point.
pub fn builtin_grid(point: &CheckPoint) -> Vec<(GaussianParams, f64, f64)> {
    let mut grid = Vec::new();
    for a11 in [0.5, 2.0, 7.0] {
        for ratio in [0.0, 0.35, -0.8] {
            let params = GaussianParams::new(a11, ratio * a11).expect("grid params are valid");
            let t_star = crate::separability::separability_threshold(&params, &point.consts);
            for temperature in [0.0, 0.25, 1.5, t_star] {
                for time in [0.0, 3.0, -40.0, 500.0] {
                    grid.push((params, temperature, time));
                }
            }
        }
    }
    grid.push((point.params, point.temperature, point.time));
    grid
}

/// Numerical chain against closed forms over [`builtin_grid`].
pub struct ClosedFormGrid;

impl Check for ClosedFormGrid {
    fn name(&self) -> &'static str {
        "closed-forms"
    }

    fn summary(&self) -> &'static str {
        "moments, invariants, standard form and Duan value against closed forms on a fixed grid"
    }

    fn run(&self, point: &CheckPoint) -> Result<CheckOutcome> {
        let mut worst: Vec<(&'static str, f64)> = Vec::new();
        for (params, temperature, time) in builtin_grid(point) {
            let report =
                verify_closed_forms(&params, temperature, time, &point.consts, point.tolerance);
            if let Some(failure) = report.failure {
                return Err(Error::InvalidMoments(failure));
            }
            for d in report.deviations {
                match worst.iter_mut().find(|(q, _)| *q == d.quantity) {
                    Some((_, w)) => *w = w.max(d.deviation),
                    None => worst.push((d.quantity, d.deviation)),
                }
            }
        }
        Ok(CheckOutcome {
            check: self.name(),
            lines: worst
                .into_iter()
                .map(|(q, d)| CheckLine::new(q, d, point.tolerance))
                .collect(),
        })
    }
}

/// Block and direct 4x4 determinants agree, and invariants ignore `L`.
pub struct DeterminantPaths;

impl Check for DeterminantPaths {
    fn name(&self) -> &'static str {
        "det-paths"
    }

    fn summary(&self) -> &'static str {
        "det M by block identity vs direct expansion; invariants under L -> 10 L"
    }

    fn run(&self, point: &CheckPoint) -> Result<CheckOutcome> {
        let (mut paths, mut scale) = (0.0f64, 0.0f64);
        for (params, temperature, time) in builtin_grid(point) {
            let m = evolve_moments(
                &thermal_moments(&params, temperature, &point.consts)?,
                time,
                &point.consts,
            );
            let l = crate::separability::default_length_scale(&params);
            let b = covariance_blocks(&m, l, &point.consts)?;
            paths = paths.max(scaled_deviation(b.det_m_block(), b.det_m_direct(), 0.0));
            let wide = det_invariants(&covariance_blocks(&m, 10.0 * l, &point.consts)?);
            let base = det_invariants(&b);
            scale = scale
                .max(scaled_deviation(wide.det_g(), base.det_g(), 0.0))
                .max(scaled_deviation(wide.det_c(), base.det_c(), base.det_g()))
                .max(scaled_deviation(wide.det_m(), base.det_m(), 0.0));
        }
        Ok(CheckOutcome {
            check: self.name(),
            lines: vec![
                CheckLine::new("det_m block vs direct", paths, point.tolerance),
                CheckLine::new("invariants under L -> 10L", scale, point.tolerance),
            ],
        })
    }
}

/// Monte Carlo thermal ensemble against the closed-form moments.
pub struct MonteCarloCheck;

impl Check for MonteCarloCheck {
    fn name(&self) -> &'static str {
        "monte-carlo"
    }

    fn summary(&self) -> &'static str {
        "seeded thermal-velocity sampling vs closed-form moments (5 standard errors)"
    }

    fn run(&self, point: &CheckPoint) -> Result<CheckOutcome> {
        let est = mc_thermal_moments(
            &point.params,
            point.temperature,
            point.time,
            &point.consts,
            &point.mc,
        )?;
        let cf = closed_forms(&point.params, point.temperature, point.time, &point.consts);
        let lines = Moment::ALL
            .iter()
            .map(|&m| {
                let (got, want) = (est.moments.get(m), cf.moments[m.index()]);
                let se = est.std_error(m);
                if se > 0.0 {
                    CheckLine::new(
                        format!("{} (z-score)", m.name()),
                        (got - want).abs() / se,
                        MC_SIGMA_GATE,
                    )
                } else {
                    let scale = moment_scale(m, &cf.moments);
                    CheckLine::new(
                        format!("{} (exact)", m.name()),
                        scaled_deviation(got, want, scale),
                        MC_EXACT_BOUND,
                    )
                }
            })
            .collect();
        Ok(CheckOutcome {
            check: self.name(),
            lines,
        })
    }
}

/// Natural magnitude against which an entry that may vanish is compared.
pub fn moment_scale(m: Moment, moments: &[f64; 6]) -> f64 {
    let xx = moments[Moment::Xx.index()];
    let pp = moments[Moment::Pp.index()];
    match m {
        Moment::Xx | Moment::X1X2 => xx,
        Moment::Pp | Moment::P1P2 => pp,
        Moment::XpSym | Moment::XCrossP => (xx * pp).sqrt(),
    }
}

/// Quadrature of the wave function at the rms thermal drift against the
/// initial moments.
pub struct QuadratureCheck;

impl Check for QuadratureCheck {
    fn name(&self) -> &'static str {
        "quadrature"
    }

    fn summary(&self) -> &'static str {
        "grid integration of the wave function vs initial moments at the rms thermal drift"
    }

    fn run(&self, point: &CheckPoint) -> Result<CheckOutcome> {
        let c = &point.consts;
        let drift = (c.boltzmann() * point.temperature / c.mass()).sqrt();
        let v = VelocityPair::new(drift, drift);
        let expected = initial_moments(&point.params, v, c)?.to_array();
        let raw = quadrature_moments(&point.params, v, c, &point.quadrature)?;
        let got = raw.pooled();
        let mut lines: Vec<CheckLine> = Moment::ALL
            .iter()
            .map(|&m| {
                let i = m.index();
                CheckLine::new(
                    m.name(),
                    scaled_deviation(got[i], expected[i], moment_scale(m, &expected)),
                    QUADRATURE_MOMENT_BOUND,
                )
            })
            .collect();
        lines.push(CheckLine::new(
            "norm",
            (raw.norm - 1.0).abs(),
            QUADRATURE_NORM_BOUND,
        ));
        let identity = gaussian_moment_identity(&point.params, v, c).pooled();
        let worst = Moment::ALL
            .iter()
            .map(|&m| {
                scaled_deviation(
                    got[m.index()],
                    identity[m.index()],
                    moment_scale(m, &identity),
                )
            })
            .fold(0.0, f64::max);
        lines.push(CheckLine::new(
            "gaussian identity",
            worst,
            QUADRATURE_MOMENT_BOUND,
        ));
        Ok(CheckOutcome {
            check: self.name(),
            lines,
        })
    }
}
