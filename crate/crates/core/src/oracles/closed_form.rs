//! Closed-form expressions for the thermal state, written directly in terms of
//! `a11`, `a12`, `T` and `t` in plain `f64`. Nothing here goes through the
//! moment propagation or the invariant solver.

use crate::model::{GaussianParams, PhysicalConstants};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForms {
    /// Raw moments at time `t`, in `Moment::ALL` order.
    pub moments: [f64; 6],
    pub det_g: f64,
    pub det_c: f64,
    pub det_m: f64,
    pub g: f64,
    pub c: f64,
    pub c_prime: f64,
    pub duan_value: f64,
}

pub fn closed_forms(
    params: &GaussianParams,
    temperature: f64,
    time: f64,
    consts: &PhysicalConstants,
) -> ClosedForms {
    let (a11, a12) = (params.a11(), params.a12());
    let (m, hbar, k) = (consts.mass(), consts.hbar(), consts.boltzmann());
    let d = a11 * a11 - a12 * a12;
    let hbar2 = hbar * hbar;

    let p_sq = m * k * temperature + hbar2 * a11 / 4.0;
    let p_cross = hbar2 * a12 / 4.0;
    let moments = [
        a11 / d + p_sq * time * time / (m * m),
        -a12 / d + p_cross * time * time / (m * m),
        p_sq,
        p_cross,
        p_sq * time / m,
        p_cross * time / m,
    ];

    // thermal shift of a11 in the invariants
    let tau = 4.0 * m * k * temperature / hbar2;
    let a = a12.abs();
    let det_g = a11 * (a11 + tau) / (4.0 * d);
    let det_c = -a12 * a12 / (4.0 * d);
    let det_m = (a11 + a + tau) * (a11 - a + tau) / (16.0 * d);
    let g = det_g.sqrt();
    let c = a * ((a11 + tau) / (4.0 * d * a11)).sqrt();
    let c_prime = -a * (a11 / (4.0 * d * (a11 + tau))).sqrt();
    let duan_value = (a11 - a + tau) / (4.0 * (a11 + a));

    ClosedForms {
        moments,
        det_g,
        det_c,
        det_m,
        g,
        c,
        c_prime,
        duan_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_params;

    #[test]
    fn documented_point() {
        let p = validate_params(2.0, 1.0).unwrap();
        let cf = closed_forms(&p, 0.5, 2.0, &PhysicalConstants::NATURAL);
        let expect = [14.0 / 3.0, 2.0 / 3.0, 1.0, 0.25, 2.0, 0.5];
        for (got, want) in cf.moments.iter().zip(expect) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((cf.det_g - 2.0 / 3.0).abs() < 1e-15);
        assert!((cf.det_c + 1.0 / 12.0).abs() < 1e-15);
        assert!((cf.det_m - 5.0 / 16.0).abs() < 1e-15);
        assert!((cf.duan_value - 0.25).abs() < 1e-15);
        // (g - c)(g + c') with the signed c' reproduces the same value
        assert!(((cf.g - cf.c) * (cf.g + cf.c_prime) - cf.duan_value).abs() < 1e-15);
        assert!((cf.c * cf.c_prime - cf.det_c).abs() < 1e-15);
    }
}
