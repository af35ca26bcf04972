//! Second moments of the initial wave function by direct integration.
//!
//! The grid is a tensor-product trapezoid rule on a window aligned with the
//! principal axes `u = (x1 + x2)/√2`, `w = (x1 - x2)/√2` of `|psi|²`, each
//! axis truncated at `half_width` standard deviations. The rotation has unit
//! Jacobian. Momentum moments use `-i hbar ∂_j psi`, with the derivative of
//! the exponent taken analytically.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{
    wavefunction_amplitude, GaussianParams, Moment, PhysicalConstants, VelocityPair,
};

pub const MIN_HALF_WIDTH: f64 = 6.0;
pub const MIN_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Window half-width in standard deviations along each principal axis.
    pub half_width: f64,
    pub points_per_axis: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            half_width: 9.0,
            points_per_axis: 160,
        }
    }
}

impl QuadratureSpec {
    pub fn check(&self) -> Result<()> {
        if !self.half_width.is_finite()
            || self.half_width < MIN_HALF_WIDTH
            || self.points_per_axis < MIN_POINTS
        {
            return Err(Error::QuadratureTooCoarse {
                half_width: self.half_width,
                points: self.points_per_axis,
                min_half_width: MIN_HALF_WIDTH,
                min_points: MIN_POINTS,
            });
        }
        Ok(())
    }
}

/// Raw second moments of `(x1, p1, x2, p2)` with no symmetry assumed.
/// Mixed entries are the real parts, i.e. the symmetrized products.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RawMoments {
    pub norm: f64,
    pub x1x1: f64,
    pub x2x2: f64,
    pub x1x2: f64,
    pub p1p1: f64,
    pub p2p2: f64,
    pub p1p2: f64,
    pub x1p1: f64,
    pub x2p2: f64,
    pub x2p1: f64,
    pub x1p2: f64,
}

impl RawMoments {
    /// Pools the two particles into the six symmetric entries, in
    /// `Moment::ALL` order.
    pub fn pooled(&self) -> [f64; 6] {
        [
            0.5 * (self.x1x1 + self.x2x2),
            self.x1x2,
            0.5 * (self.p1p1 + self.p2p2),
            self.p1p2,
            0.5 * (self.x1p1 + self.x2p2),
            0.5 * (self.x2p1 + self.x1p2),
        ]
    }

    pub fn get(&self, m: Moment) -> f64 {
        self.pooled()[m.index()]
    }
}

pub fn quadrature_moments(
    params: &GaussianParams,
    v: VelocityPair,
    consts: &PhysicalConstants,
    spec: &QuadratureSpec,
) -> Result<RawMoments> {
    spec.check()?;
    integrate(params, v, consts, spec.half_width, spec.points_per_axis)
}

pub(crate) fn integrate(
    params: &GaussianParams,
    v: VelocityPair,
    consts: &PhysicalConstants,
    half_width: f64,
    points: usize,
) -> Result<RawMoments> {
    let (a11, a12) = (params.a11(), params.a12());
    let sd_u = 1.0 / (a11 + a12).sqrt();
    let sd_w = 1.0 / (a11 - a12).sqrt();
    let axis = |sd: f64| -> Vec<(f64, f64)> {
        let lo = -half_width * sd;
        let h = 2.0 * half_width * sd / (points - 1) as f64;
        (0..points)
            .map(|i| {
                let weight = if i == 0 || i == points - 1 {
                    0.5 * h
                } else {
                    h
                };
                (lo + i as f64 * h, weight)
            })
            .collect()
    };
    let (u_nodes, w_nodes) = (axis(sd_u), axis(sd_w));
    let hbar = consts.hbar();
    let phase_k = Complex64::new(0.0, consts.mass() / hbar);
    let mut acc = RawMoments::default();
    let s = std::f64::consts::FRAC_1_SQRT_2;

    for &(u, wu) in &u_nodes {
        for &(w, ww) in &w_nodes {
            let weight = wu * ww;
            let (x1, x2) = (s * (u + w), s * (u - w));
            let psi = wavefunction_amplitude(params, v, consts, x1, x2)?;
            let d1 = (-(a11 * x1 + a12 * x2) / 2.0 + phase_k * v.v1) * psi;
            let d2 = (-(a12 * x1 + a11 * x2) / 2.0 + phase_k * v.v2) * psi;
            // p_j psi = -i hbar d_j psi
            let p1 = Complex64::new(0.0, -hbar) * d1;
            let p2 = Complex64::new(0.0, -hbar) * d2;
            let density = psi.norm_sqr();

            acc.norm += weight * density;
            acc.x1x1 += weight * x1 * x1 * density;
            acc.x2x2 += weight * x2 * x2 * density;
            acc.x1x2 += weight * x1 * x2 * density;
            acc.p1p1 += weight * p1.norm_sqr();
            acc.p2p2 += weight * p2.norm_sqr();
            acc.p1p2 += weight * (p1.conj() * p2).re;
            acc.x1p1 += weight * x1 * (psi.conj() * p1).re;
            acc.x2p2 += weight * x2 * (psi.conj() * p2).re;
            acc.x2p1 += weight * x2 * (psi.conj() * p1).re;
            acc.x1p2 += weight * x1 * (psi.conj() * p2).re;
        }
    }
    Ok(acc)
}

/// The same integrals evaluated through Gaussian moment identities: with
/// precision matrix `A`, `<x xᵀ> = A⁻¹` and
/// `<p pᵀ> = hbar²/4 · A A⁻¹ A + m² v vᵀ`; position-momentum products vanish
/// because the state is centred at the origin.
pub fn gaussian_moment_identity(
    params: &GaussianParams,
    v: VelocityPair,
    consts: &PhysicalConstants,
) -> RawMoments {
    let a = [[params.a11(), params.a12()], [params.a12(), params.a11()]];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let cov = [
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ];
    let mut aca = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            aca[i][j] = (0..2)
                .flat_map(|k| (0..2).map(move |l| (k, l)))
                .map(|(k, l)| a[i][k] * cov[k][l] * a[l][j])
                .sum();
        }
    }
    let q = consts.hbar() * consts.hbar() / 4.0;
    let m2 = consts.mass() * consts.mass();
    RawMoments {
        norm: 1.0,
        x1x1: cov[0][0],
        x2x2: cov[1][1],
        x1x2: cov[0][1],
        p1p1: q * aca[0][0] + m2 * v.v1 * v.v1,
        p2p2: q * aca[1][1] + m2 * v.v2 * v.v2,
        p1p2: q * aca[0][1] + m2 * v.v1 * v.v2,
        ..RawMoments::default()
    }
}
