//! The physical model: two particles in a symmetric Gaussian state with
//! thermal drift velocities, moving freely.
//!
//! The initial wave function is
//!
//! ```text
//! psi(x1, x2) = (a11^2 - a12^2)^(1/4) / sqrt(2 pi)
//!             * exp(-(a11 x1^2 + 2 a12 x1 x2 + a11 x2^2) / 4 + i m (v1 x1 + v2 x2) / hbar)
//! ```
//!
//! and all second moments are raw (taken about zero). Free flight acts on the
//! Heisenberg operators as `x(t) = x(0) + p(0) t / m`, `p(t) = p(0)`.

use num_complex::Complex64;

use crate::dd::Dd;
use crate::error::{finite, Error, Result};

/// Shape of the Gaussian: `a11` multiplies `x1²` and `x2²`, `a12` the cross term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    a11: f64,
    a12: f64,
}

impl GaussianParams {
    pub fn new(a11: f64, a12: f64) -> Result<Self> {
        let a11 = finite("a11", a11)?;
        let a12 = finite("a12", a12)?;
        if a11 <= 0.0 {
            return Err(Error::NonPositiveA11(a11));
        }
        if a12.abs() >= a11 {
            return Err(Error::NotSquareIntegrable { a11, a12 });
        }
        Ok(GaussianParams { a11, a12 })
    }

    pub fn a11(&self) -> f64 {
        self.a11
    }

    pub fn a12(&self) -> f64 {
        self.a12
    }

    /// `a11² - a12²`, strictly positive.
    pub fn discriminant(&self) -> f64 {
        self.discriminant_dd().to_f64()
    }

    pub(crate) fn discriminant_dd(&self) -> Dd {
        let a11 = Dd::from(self.a11);
        let a12 = Dd::from(self.a12);
        a11 * a11 - a12 * a12
    }
}

/// Checks the square-integrability conditions `a11 > 0` and `a11² > a12²`.
pub fn validate_params(a11: f64, a12: f64) -> Result<GaussianParams> {
    GaussianParams::new(a11, a12)
}

/// Mass, reduced Planck constant and Boltzmann constant in one consistent
/// unit system. The default is natural units, all equal to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    mass: f64,
    hbar: f64,
    boltzmann: f64,
}

impl PhysicalConstants {
    pub const NATURAL: PhysicalConstants = PhysicalConstants {
        mass: 1.0,
        hbar: 1.0,
        boltzmann: 1.0,
    };

    pub fn new(mass: f64, hbar: f64, boltzmann: f64) -> Result<Self> {
        for (name, value) in [
            ("mass", mass),
            ("hbar", hbar),
            ("boltzmann constant", boltzmann),
        ] {
            finite(name, value)?;
            if value <= 0.0 {
                return Err(Error::NonPositive { name, value });
            }
        }
        Ok(PhysicalConstants {
            mass,
            hbar,
            boltzmann,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn boltzmann(&self) -> f64 {
        self.boltzmann
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::NATURAL
    }
}

/// Deterministic drift velocities entering the phase of the wave function.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VelocityPair {
    pub v1: f64,
    pub v2: f64,
}

impl VelocityPair {
    pub fn new(v1: f64, v2: f64) -> Self {
        VelocityPair { v1, v2 }
    }
}

/// Names the six independent entries of a [`MomentSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Moment {
    /// `<x1²> = <x2²>`
    Xx,
    /// `<x1 x2>`
    X1X2,
    /// `<p1²> = <p2²>`
    Pp,
    /// `<p1 p2>`
    P1P2,
    /// `½<x1 p1 + p1 x1>`
    XpSym,
    /// `<x2 p1> = <x1 p2>`
    XCrossP,
}

impl Moment {
    pub const ALL: [Moment; 6] = [
        Moment::Xx,
        Moment::X1X2,
        Moment::Pp,
        Moment::P1P2,
        Moment::XpSym,
        Moment::XCrossP,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Moment::Xx => "xx",
            Moment::X1X2 => "x1x2",
            Moment::Pp => "pp",
            Moment::P1P2 => "p1p2",
            Moment::XpSym => "xp_sym",
            Moment::XCrossP => "x_cross_p",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Second moments of `(x1, p1, x2, p2)` for a state symmetric under particle
/// exchange. Each symmetric pair is stored once, so an asymmetric state has
/// no representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    xx: Dd,
    x1x2: Dd,
    pp: Dd,
    p1p2: Dd,
    xp_sym: Dd,
    x_cross_p: Dd,
}

impl MomentSet {
    /// Builds a moment set from plain values, checking positivity of the
    /// diagonal entries. The uncertainty relation needs `hbar`; see
    /// [`MomentSet::check_uncertainty`].
    pub fn new(
        xx: f64,
        x1x2: f64,
        pp: f64,
        p1p2: f64,
        xp_sym: f64,
        x_cross_p: f64,
    ) -> Result<Self> {
        Self::from_dd(
            xx.into(),
            x1x2.into(),
            pp.into(),
            p1p2.into(),
            xp_sym.into(),
            x_cross_p.into(),
        )
    }

    pub(crate) fn from_dd(
        xx: Dd,
        x1x2: Dd,
        pp: Dd,
        p1p2: Dd,
        xp_sym: Dd,
        x_cross_p: Dd,
    ) -> Result<Self> {
        let set = MomentSet {
            xx,
            x1x2,
            pp,
            p1p2,
            xp_sym,
            x_cross_p,
        };
        for m in Moment::ALL {
            if !set.get_dd(m).is_finite() {
                return Err(Error::InvalidMoments(format!("{} is not finite", m.name())));
            }
        }
        if xx <= Dd::ZERO {
            return Err(Error::InvalidMoments(format!(
                "<x^2> must be positive, got {xx}"
            )));
        }
        if pp <= Dd::ZERO {
            return Err(Error::InvalidMoments(format!(
                "<p^2> must be positive, got {pp}"
            )));
        }
        Ok(set)
    }

    pub fn get(&self, m: Moment) -> f64 {
        self.get_dd(m).to_f64()
    }

    pub(crate) fn get_dd(&self, m: Moment) -> Dd {
        match m {
            Moment::Xx => self.xx,
            Moment::X1X2 => self.x1x2,
            Moment::Pp => self.pp,
            Moment::P1P2 => self.p1p2,
            Moment::XpSym => self.xp_sym,
            Moment::XCrossP => self.x_cross_p,
        }
    }

    pub fn xx(&self) -> f64 {
        self.xx.to_f64()
    }

    pub fn x1x2(&self) -> f64 {
        self.x1x2.to_f64()
    }

    pub fn pp(&self) -> f64 {
        self.pp.to_f64()
    }

    pub fn p1p2(&self) -> f64 {
        self.p1p2.to_f64()
    }

    pub fn xp_sym(&self) -> f64 {
        self.xp_sym.to_f64()
    }

    pub fn x_cross_p(&self) -> f64 {
        self.x_cross_p.to_f64()
    }

    /// Entries in [`Moment::ALL`] order.
    pub fn to_array(&self) -> [f64; 6] {
        Moment::ALL.map(|m| self.get(m))
    }

    /// `<x²><p²> - ½<xp+px>²`, bounded below by `hbar²/4`.
    pub fn uncertainty_product(&self) -> f64 {
        (self.xx * self.pp - self.xp_sym.square()).to_f64()
    }

    pub fn check_uncertainty(&self, consts: &PhysicalConstants, slack: f64) -> Result<()> {
        let bound = consts.hbar * consts.hbar / 4.0;
        let product = self.uncertainty_product();
        if product < bound - slack {
            return Err(Error::InvalidMoments(format!(
                "single-particle uncertainty product {product} below hbar^2/4 = {bound}"
            )));
        }
        Ok(())
    }
}

/// `psi(x1, x2)` at `t = 0`, normalized to one over the plane.
pub fn wavefunction_amplitude(
    params: &GaussianParams,
    v: VelocityPair,
    consts: &PhysicalConstants,
    x1: f64,
    x2: f64,
) -> Result<Complex64> {
    finite("v1", v.v1)?;
    finite("v2", v.v2)?;
    finite("x1", x1)?;
    finite("x2", x2)?;
    let (a11, a12) = (params.a11, params.a12);
    let norm = params.discriminant().powf(0.25) / (2.0 * std::f64::consts::PI).sqrt();
    let gauss = -(a11 * x1 * x1 + 2.0 * a12 * x1 * x2 + a11 * x2 * x2) / 4.0;
    let phase = consts.mass / consts.hbar * (v.v1 * x1 + v.v2 * x2);
    Ok(norm * Complex64::new(gauss, phase).exp())
}

/// Moments of the pure state at `t = 0` with deterministic drifts.
///
/// The drift enters the raw momentum moments as `m² v_i v_j`. Only drifts with
/// `v1² = v2²` keep the state exchange-symmetric; others are rejected.
pub fn initial_moments(
    params: &GaussianParams,
    v: VelocityPair,
    consts: &PhysicalConstants,
) -> Result<MomentSet> {
    let v1 = finite("v1", v.v1)?;
    let v2 = finite("v2", v.v2)?;
    if v1 * v1 != v2 * v2 {
        return Err(Error::AsymmetricDrift { v1, v2 });
    }
    let m = Dd::from(consts.mass);
    let drift_sq = m * m * Dd::from(v1) * v1;
    let drift_cross = m * m * Dd::from(v1) * v2;
    position_and_momentum(params, consts, drift_sq, drift_cross)
}

/// Moments after averaging the drifts over a thermal ensemble at temperature
/// `temperature`: `<v²> = kT/m` and independent velocities, so `<v1 v2> = 0`.
pub fn thermal_moments(
    params: &GaussianParams,
    temperature: f64,
    consts: &PhysicalConstants,
) -> Result<MomentSet> {
    let temperature = check_temperature(temperature)?;
    let thermal = Dd::from(consts.mass) * consts.boltzmann * temperature;
    position_and_momentum(params, consts, thermal, Dd::ZERO)
}

pub(crate) fn check_temperature(temperature: f64) -> Result<f64> {
    let temperature = finite("temperature", temperature)?;
    if temperature < 0.0 {
        return Err(Error::NegativeTemperature(temperature));
    }
    Ok(temperature)
}

fn position_and_momentum(
    params: &GaussianParams,
    consts: &PhysicalConstants,
    drift_sq: Dd,
    drift_cross: Dd,
) -> Result<MomentSet> {
    let det = params.discriminant_dd();
    let hbar_sq_4 = Dd::from(consts.hbar).square() / 4.0;
    MomentSet::from_dd(
        Dd::from(params.a11) / det,
        -Dd::from(params.a12) / det,
        drift_sq + hbar_sq_4 * params.a11,
        drift_cross + hbar_sq_4 * params.a12,
        Dd::ZERO,
        Dd::ZERO,
    )
}

/// Propagates the moments through free flight for a time `t` (any sign).
pub fn evolve_moments(m0: &MomentSet, t: f64, consts: &PhysicalConstants) -> MomentSet {
    if t == 0.0 {
        return *m0;
    }
    let tau = Dd::from(t) / consts.mass;
    let tau_sq = tau.square();
    MomentSet {
        xx: m0.xx + 2.0 * m0.xp_sym * tau + m0.pp * tau_sq,
        x1x2: m0.x1x2 + 2.0 * m0.x_cross_p * tau + m0.p1p2 * tau_sq,
        pp: m0.pp,
        p1p2: m0.p1p2,
        xp_sym: m0.xp_sym + m0.pp * tau,
        x_cross_p: m0.x_cross_p + m0.p1p2 * tau,
    }
}
