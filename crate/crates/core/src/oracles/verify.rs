use crate::model::{evolve_moments, thermal_moments, GaussianParams, Moment, PhysicalConstants};
use crate::oracles::closed_form::closed_forms;
use crate::separability::{
    covariance_blocks, default_length_scale, det_invariants, duan_separable, standard_form,
    DEFAULT_TOLERANCE,
};

/// Deviation of one quantity between the numerical path and its closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub quantity: &'static str,
    pub numeric: f64,
    pub closed_form: f64,
    /// `|numeric - closed_form| / max(|numeric|, |closed_form|, scale)`
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub tolerance: f64,
    pub deviations: Vec<Deviation>,
    /// Set when the numerical chain could not be evaluated at all.
    pub failure: Option<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
            && self
                .deviations
                .iter()
                .all(|d| d.deviation <= self.tolerance)
    }

    pub fn max_deviation(&self) -> f64 {
        self.deviations
            .iter()
            .map(|d| d.deviation)
            .fold(0.0, f64::max)
    }

    pub fn worst(&self) -> Option<&Deviation> {
        self.deviations
            .iter()
            .max_by(|a, b| a.deviation.total_cmp(&b.deviation))
    }
}

/// Relative deviation, measured against `scale` when both values are small.
/// Quantities that vanish identically (a cross moment of a product state, say)
/// are compared on the scale of the diagonal they belong with.
pub fn scaled_deviation(numeric: f64, closed_form: f64, scale: f64) -> f64 {
    if numeric == closed_form {
        return 0.0;
    }
    let denom = numeric.abs().max(closed_form.abs()).max(scale.abs());
    if denom == 0.0 {
        f64::INFINITY
    } else {
        (numeric - closed_form).abs() / denom
    }
}

/// Evaluates moments, invariants, the standard form and the Duan value by the
/// numerical route (thermal moments, free flight, determinant invariants,
/// root solve) and compares each with its closed form.
pub fn verify_closed_forms(
    params: &GaussianParams,
    temperature: f64,
    time: f64,
    consts: &PhysicalConstants,
    tolerance: f64,
) -> VerificationReport {
    let mut report = VerificationReport {
        tolerance,
        deviations: Vec::new(),
        failure: None,
    };
    let m0 = match thermal_moments(params, temperature, consts) {
        Ok(m) => m,
        Err(e) => {
            report.failure = Some(e.to_string());
            return report;
        }
    };
    let moments = evolve_moments(&m0, time, consts);
    let cf = closed_forms(params, temperature, time, consts);

    let xx = cf.moments[Moment::Xx.index()];
    let pp = cf.moments[Moment::Pp.index()];
    let mixed_scale = (xx * pp).sqrt();
    for m in Moment::ALL {
        let scale = match m {
            Moment::Xx | Moment::X1X2 => xx,
            Moment::Pp | Moment::P1P2 => pp,
            Moment::XpSym | Moment::XCrossP => mixed_scale,
        };
        report.push(m.name(), moments.get(m), cf.moments[m.index()], scale);
    }

    let blocks = match covariance_blocks(&moments, default_length_scale(params), consts) {
        Ok(b) => b,
        Err(e) => {
            report.failure = Some(e.to_string());
            return report;
        }
    };
    let inv = det_invariants(&blocks);
    report.push("det_g", inv.det_g(), cf.det_g, 0.0);
    report.push("det_c", inv.det_c(), cf.det_c, cf.det_g);
    report.push("det_m", inv.det_m(), cf.det_m, 0.0);
    report.push("det_m_direct", blocks.det_m_direct(), cf.det_m, 0.0);

    let sf = match standard_form(&inv) {
        Ok(sf) => sf,
        Err(e) => {
            report.failure = Some(e.to_string());
            return report;
        }
    };
    report.push("g", sf.g(), cf.g, 0.0);
    report.push("c", sf.c(), cf.c, cf.g);
    report.push("c_prime", sf.c_prime(), cf.c_prime, cf.g);
    let decision = duan_separable(&sf, DEFAULT_TOLERANCE);
    report.push("duan_value", decision.duan_value, cf.duan_value, 0.0);
    report
}

impl VerificationReport {
    fn push(&mut self, quantity: &'static str, numeric: f64, closed_form: f64, scale: f64) {
        self.deviations.push(Deviation {
            quantity,
            numeric,
            closed_form,
            deviation: scaled_deviation(numeric, closed_form, scale),
        });
    }
}
