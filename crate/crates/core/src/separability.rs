//! Variance matrix, its local invariants, the reduced (standard-form)
//! quantities and the Duan separability test.
//!
//! In the ordering `(x1, p1, x2, p2)` the dimensionless variance matrix is
//!
//! ```text
//!     | G  C |        G = | <x²>/L²      <xp>_s/hbar   |
//! M = |      |            | <xp>_s/hbar  L² <p²>/hbar² |
//!     | C  G |
//!                     C = | <x1x2>/L²    <x2p1>/hbar   |
//!                         | <x2p1>/hbar  L² <p1p2>/hbar² |
//! ```
//!
//! Local rotations and squeezes bring `G` to `g·1` and `C` to
//! `diag(c, c')` while leaving `det G`, `det C` and `det M` fixed, so the
//! reduced quantities follow from the three determinants alone. The state
//! is separable iff `(g - |c|)(g - |c'|) >= 1/4`.

use crate::dd::Dd;
use crate::error::{finite, Error, Result};
use crate::model::{
    check_temperature, evolve_moments, thermal_moments, GaussianParams, MomentSet,
    PhysicalConstants,
};

/// Default decision tolerance on the Duan value.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

type Block = [[Dd; 2]; 2];

fn det2(b: &Block) -> Dd {
    b[0][0] * b[1][1] - b[0][1] * b[1][0]
}

fn to_f64(b: &Block) -> [[f64; 2]; 2] {
    b.map(|row| row.map(Dd::to_f64))
}

/// The `G` and `C` blocks of the variance matrix together with the length
/// scale `L` used to make them dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceBlocks {
    g: Block,
    c: Block,
    length_scale: f64,
}

impl CovarianceBlocks {
    pub fn g(&self) -> [[f64; 2]; 2] {
        to_f64(&self.g)
    }

    pub fn c(&self) -> [[f64; 2]; 2] {
        to_f64(&self.c)
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    /// Full 4x4 matrix in `(x1, p1, x2, p2)` order.
    pub fn full_matrix(&self) -> [[f64; 4]; 4] {
        let m = self.full_dd();
        m.map(|row| row.map(Dd::to_f64))
    }

    fn full_dd(&self) -> [[Dd; 4]; 4] {
        let mut m = [[Dd::ZERO; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = self.g[i][j];
                m[i + 2][j + 2] = self.g[i][j];
                m[i][j + 2] = self.c[i][j];
                m[i + 2][j] = self.c[i][j];
            }
        }
        m
    }

    /// `det M = det(G + C) · det(G - C)`, valid for the symmetric block layout.
    pub fn det_m_block(&self) -> f64 {
        self.det_m_block_dd().to_f64()
    }

    /// `det M` by Laplace expansion along the first two rows.
    pub fn det_m_direct(&self) -> f64 {
        self.det_m_direct_dd().to_f64()
    }

    fn sum_and_difference(&self) -> (Block, Block) {
        let mut plus = self.g;
        let mut minus = self.g;
        for i in 0..2 {
            for j in 0..2 {
                plus[i][j] = self.g[i][j] + self.c[i][j];
                minus[i][j] = self.g[i][j] - self.c[i][j];
            }
        }
        (plus, minus)
    }

    fn det_m_block_dd(&self) -> Dd {
        let (plus, minus) = self.sum_and_difference();
        det2(&plus) * det2(&minus)
    }

    fn det_m_direct_dd(&self) -> Dd {
        let m = self.full_dd();
        let minor = |r0: usize, r1: usize, c0: usize, c1: usize| {
            m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
        };
        const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let mut det = Dd::ZERO;
        for (j, k) in PAIRS {
            let (p, q) = PAIRS
                .into_iter()
                .find(|&(p, q)| p != j && p != k && q != j && q != k)
                .expect("complementary column pair");
            let term = minor(0, 1, j, k) * minor(2, 3, p, q);
            det = if (j + k + 1) % 2 == 0 {
                det + term
            } else {
                det - term
            };
        }
        det
    }
}

/// Builds the dimensionless `G` and `C` blocks with length scale `L`.
pub fn covariance_blocks(
    m: &MomentSet,
    length_scale: f64,
    consts: &PhysicalConstants,
) -> Result<CovarianceBlocks> {
    use crate::model::Moment::*;
    let l = finite("length scale", length_scale)?;
    if l <= 0.0 {
        return Err(Error::NonPositive {
            name: "length scale",
            value: l,
        });
    }
    let l2 = Dd::from(l).square();
    let hbar = Dd::from(consts.hbar());
    let hbar2 = hbar.square();
    let block = |pos: Dd, mixed: Dd, mom: Dd| -> Block {
        let off = mixed / hbar;
        [[pos / l2, off], [off, l2 * mom / hbar2]]
    };
    Ok(CovarianceBlocks {
        g: block(m.get_dd(Xx), m.get_dd(XpSym), m.get_dd(Pp)),
        c: block(m.get_dd(X1X2), m.get_dd(XCrossP), m.get_dd(P1P2)),
        length_scale: l,
    })
}

/// `det G`, `det C`, `det M`; unchanged by local symplectic maps and by `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetInvariants {
    det_g: Dd,
    det_c: Dd,
    det_m: Dd,
    // relative precision of the inputs
    unit_roundoff: f64,
}

const DD_ROUNDOFF: f64 = f64::EPSILON * f64::EPSILON;

impl DetInvariants {
    pub fn new(det_g: f64, det_c: f64, det_m: f64) -> Result<Self> {
        Ok(DetInvariants {
            det_g: finite("det G", det_g)?.into(),
            det_c: finite("det C", det_c)?.into(),
            det_m: finite("det M", det_m)?.into(),
            unit_roundoff: f64::EPSILON,
        })
    }

    pub fn det_g(&self) -> f64 {
        self.det_g.to_f64()
    }

    pub fn det_c(&self) -> f64 {
        self.det_c.to_f64()
    }

    pub fn det_m(&self) -> f64 {
        self.det_m.to_f64()
    }
}

/// Cancellation factor of a 2x2 determinant, `(|ad| + |bc|) / |ad - bc|`.
fn det2_condition(b: &Block) -> f64 {
    let det = det2(b).abs().to_f64();
    let size = (b[0][0] * b[1][1]).abs().to_f64() + (b[0][1] * b[1][0]).abs().to_f64();
    if det == 0.0 {
        1.0
    } else {
        size / det
    }
}

pub fn det_invariants(blocks: &CovarianceBlocks) -> DetInvariants {
    let det_m = blocks.det_m_block_dd();
    let (plus, minus) = blocks.sum_and_difference();
    let condition = [&blocks.g, &plus, &minus]
        .into_iter()
        .map(det2_condition)
        .fold(1.0, f64::max);
    debug_assert!({
        // Both expansions are sums of 4-entry products, bounded by the
        // permanent of |M|, itself bounded by the product of row sums.
        let direct = blocks.det_m_direct_dd();
        let bound: f64 = blocks
            .full_matrix()
            .iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .product();
        (det_m - direct).abs().to_f64() <= 256.0 * DD_ROUNDOFF * bound
    });
    DetInvariants {
        det_g: det2(&blocks.g),
        det_c: det2(&blocks.c),
        det_m,
        unit_roundoff: DD_ROUNDOFF * condition,
    }
}

/// Reduced form `G = g·1`, `C = diag(c, c')` with `c >= |c'|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardForm {
    g: Dd,
    c: Dd,
    c_prime: Dd,
}

impl StandardForm {
    pub fn new(g: f64, c: f64, c_prime: f64) -> Result<Self> {
        Ok(StandardForm {
            g: finite("g", g)?.into(),
            c: finite("c", c)?.into(),
            c_prime: finite("c'", c_prime)?.into(),
        })
    }

    pub fn g(&self) -> f64 {
        self.g.to_f64()
    }

    pub fn c(&self) -> f64 {
        self.c.to_f64()
    }

    pub fn c_prime(&self) -> f64 {
        self.c_prime.to_f64()
    }
}

/// Solves `g² = det G`, `c c' = det C`, `(g² - c²)(g² - c'²) = det M`.
///
/// `c²` and `c'²` are the roots of `u² - s u + det C² = 0` with
/// `s = (det G² + det C² - det M) / det G`; the larger root goes to `c`.
pub fn standard_form(inv: &DetInvariants) -> Result<StandardForm> {
    let (dg, dc, dm) = (inv.det_g, inv.det_c, inv.det_m);
    // residuals this close to zero are rounding of the inputs
    let snap = 16.0 * inv.unit_roundoff;
    if dg.to_f64() < 0.25 * (1.0 - 1e-12) {
        return Err(Error::InfeasibleInvariants(format!(
            "det G = {} violates the uncertainty bound det G >= 1/4",
            dg
        )));
    }
    let dc2 = dc.square();
    let mut s = (dg.square() + dc2 - dm) / dg;
    let s_scale = ((dg.square() + dc2 + dm.abs()) / dg).to_f64();
    if s.to_f64().abs() <= snap * s_scale {
        s = Dd::ZERO;
    }
    if s < Dd::ZERO {
        return Err(Error::InfeasibleInvariants(format!(
            "c^2 + c'^2 = {s} is negative"
        )));
    }
    let mut disc = s.square() - 4.0 * dc2;
    // rounding in s enters the discriminant as 2 |s| δs
    let disc_scale = (s.square() + 4.0 * dc2).to_f64() + 2.0 * s.to_f64().abs() * s_scale;
    if disc.to_f64().abs() <= snap * disc_scale {
        disc = Dd::ZERO;
    }
    if disc < Dd::ZERO {
        return Err(Error::InfeasibleInvariants(format!(
            "no real c, c' (discriminant {disc})"
        )));
    }
    let c = ((s + disc.sqrt()) / 2.0).sqrt();
    let c_prime = if c == Dd::ZERO { Dd::ZERO } else { dc / c };
    Ok(StandardForm {
        g: dg.sqrt(),
        c,
        c_prime,
    })
}

/// Outcome of the Duan test on a standard form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuanDecision {
    /// `(g - |c|)(g - |c'|)`
    pub duan_value: f64,
    /// `duan_value - 1/4`
    pub margin: f64,
    pub separable: bool,
}

/// Separable iff `(g - |c|)(g - |c'|) >= 1/4 - tolerance`.
pub fn duan_separable(sf: &StandardForm, tolerance: f64) -> DuanDecision {
    let value = (sf.g - sf.c.abs()) * (sf.g - sf.c_prime.abs());
    let margin = (value - 0.25).to_f64();
    DuanDecision {
        duan_value: value.to_f64(),
        margin,
        separable: margin >= -tolerance,
    }
}

/// Temperature at and above which the state is separable, `hbar² |a12| / (2 m k)`.
/// It does not depend on time.
pub fn separability_threshold(params: &GaussianParams, consts: &PhysicalConstants) -> f64 {
    consts.hbar() * consts.hbar() * params.a12().abs() / (2.0 * consts.mass() * consts.boltzmann())
}

/// `2 m k T / hbar²`: any `|a12|` strictly above this stays entangled for all time.
pub fn critical_a12(temperature: f64, consts: &PhysicalConstants) -> Result<f64> {
    let temperature = check_temperature(temperature)?;
    Ok(2.0 * consts.mass() * consts.boltzmann() * temperature / (consts.hbar() * consts.hbar()))
}

/// Decision fields plus the two thresholds for the evaluated point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparabilityReport {
    pub duan_value: f64,
    pub margin: f64,
    pub separable: bool,
    pub critical_temperature: f64,
    pub critical_a12: f64,
}

/// `L = 1/sqrt(a11)`, which makes the position entry of `G` order one.
pub fn default_length_scale(params: &GaussianParams) -> f64 {
    1.0 / params.a11().sqrt()
}

/// Everything computed for one `(params, T, t)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Analysis {
    pub moments: MomentSet,
    pub blocks: CovarianceBlocks,
    pub invariants: DetInvariants,
    pub standard_form: StandardForm,
    pub report: SeparabilityReport,
}

/// Thermal moments at `temperature`, evolved to `time`, run through the
/// whole separability chain. `length_scale = None` selects
/// [`default_length_scale`].
pub fn analyze(
    params: &GaussianParams,
    temperature: f64,
    time: f64,
    consts: &PhysicalConstants,
    length_scale: Option<f64>,
    tolerance: f64,
) -> Result<Analysis> {
    let time = finite("time", time)?;
    let m0 = thermal_moments(params, temperature, consts)?;
    let moments = evolve_moments(&m0, time, consts);
    let blocks = covariance_blocks(
        &moments,
        length_scale.unwrap_or_else(|| default_length_scale(params)),
        consts,
    )?;
    let invariants = det_invariants(&blocks);
    let sf = standard_form(&invariants)?;
    let decision = duan_separable(&sf, tolerance);
    Ok(Analysis {
        moments,
        blocks,
        invariants,
        standard_form: sf,
        report: SeparabilityReport {
            duan_value: decision.duan_value,
            margin: decision.margin,
            separable: decision.separable,
            critical_temperature: separability_threshold(params, consts),
            critical_a12: critical_a12(temperature, consts)?,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_params;

    const NAT: PhysicalConstants = PhysicalConstants::NATURAL;

    fn rel(a: f64, b: f64) -> f64 {
        if a == b {
            0.0
        } else {
            (a - b).abs() / a.abs().max(b.abs())
        }
    }

    fn leibniz4(m: &[[f64; 4]; 4]) -> f64 {
        let mut det = 0.0;
        let idx = [0usize, 1, 2, 3];
        for a in idx {
            for b in idx {
                for c in idx {
                    for d in idx {
                        let perm = [a, b, c, d];
                        let mut seen = [false; 4];
                        if perm.iter().any(|&p| std::mem::replace(&mut seen[p], true)) {
                            continue;
                        }
                        let mut inversions = 0;
                        for i in 0..4 {
                            for j in i + 1..4 {
                                if perm[i] > perm[j] {
                                    inversions += 1;
                                }
                            }
                        }
                        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
                        det += sign * m[0][a] * m[1][b] * m[2][c] * m[3][d];
                    }
                }
            }
        }
        det
    }

    fn blocks_at(a11: f64, a12: f64, temp: f64, t: f64, l: f64) -> CovarianceBlocks {
        let p = validate_params(a11, a12).unwrap();
        let m = evolve_moments(&thermal_moments(&p, temp, &NAT).unwrap(), t, &NAT);
        covariance_blocks(&m, l, &NAT).unwrap()
    }

    #[test]
    fn blocks_example() {
        let b = blocks_at(2.0, 1.0, 0.0, 0.0, 1.0);
        let g = b.g();
        let c = b.c();
        assert!(rel(g[0][0], 2.0 / 3.0) < 1e-15);
        assert_eq!([g[0][1], g[1][0], g[1][1]], [0.0, 0.0, 0.5]);
        assert!(rel(c[0][0], -1.0 / 3.0) < 1e-15);
        assert_eq!([c[0][1], c[1][0], c[1][1]], [0.0, 0.0, 0.25]);

        let b2 = blocks_at(2.0, 1.0, 0.0, 0.0, 2.0);
        assert!(rel(b2.g()[0][0], 1.0 / 6.0) < 1e-15);
        assert_eq!(b2.g()[1][1], 2.0);
        assert!(rel(det_invariants(&b2).det_g(), 1.0 / 3.0) < 1e-15);

        let evolved = blocks_at(2.0, 1.0, 0.5, 2.0, 1.0).g();
        assert!(rel(evolved[0][0], 14.0 / 3.0) < 1e-15);
        assert_eq!(
            [evolved[0][1], evolved[1][0], evolved[1][1]],
            [2.0, 2.0, 1.0]
        );
    }

    #[test]
    fn nonpositive_length_rejected() {
        let p = validate_params(2.0, 1.0).unwrap();
        let m = thermal_moments(&p, 0.0, &NAT).unwrap();
        assert!(covariance_blocks(&m, 0.0, &NAT).is_err());
        assert!(covariance_blocks(&m, -1.0, &NAT).is_err());
    }

    #[test]
    fn direct_and_block_determinants_agree() {
        for &(a11, a12, temp, t, l) in &[
            (2.0, 1.0, 0.0, 0.0, 1.0),
            (2.0, 1.0, 0.5, 2.0, 1.0),
            (3.3, -2.9, 1.7, -4.2, 0.4),
            (0.4, 0.1, 0.05, 13.0, 2.5),
        ] {
            let b = blocks_at(a11, a12, temp, t, l);
            let brute = leibniz4(&b.full_matrix());
            assert!(rel(b.det_m_block(), b.det_m_direct()) < 1e-14);
            assert!(
                rel(b.det_m_block(), brute) < 1e-9,
                "{} vs {brute}",
                b.det_m_block()
            );
        }
    }

    #[test]
    fn invariants_examples() {
        for t in [0.0, 1.0, -3.0, 50.0] {
            let inv = det_invariants(&blocks_at(2.0, 1.0, 0.0, t, 1.0));
            assert!(rel(inv.det_g(), 1.0 / 3.0) < 1e-14);
            assert!(rel(inv.det_c(), -1.0 / 12.0) < 1e-14);
            assert!(rel(inv.det_m(), 1.0 / 16.0) < 1e-14);
        }
        let inv = det_invariants(&blocks_at(2.0, 1.0, 0.5, 0.0, 1.0));
        assert!(rel(inv.det_g(), 2.0 / 3.0) < 1e-15);
        assert!(rel(inv.det_c(), -1.0 / 12.0) < 1e-15);
        assert!(rel(inv.det_m(), 5.0 / 16.0) < 1e-15);

        let product = det_invariants(&blocks_at(1.3, 0.0, 0.7, 4.0, 1.0));
        assert_eq!(product.det_c(), 0.0);
        assert!(rel(product.det_m(), product.det_g().powi(2)) < 1e-15);
    }

    #[test]
    fn standard_form_examples() {
        let sf = standard_form(&det_invariants(&blocks_at(2.0, 1.0, 0.0, 0.0, 1.0))).unwrap();
        let r3 = 3f64.sqrt();
        assert!(rel(sf.g(), 1.0 / r3) < 1e-15);
        assert!(rel(sf.c(), 1.0 / (2.0 * r3)) < 1e-14);
        assert!(rel(sf.c_prime(), -1.0 / (2.0 * r3)) < 1e-14);

        let sf = standard_form(&det_invariants(&blocks_at(2.0, 1.0, 0.5, 0.0, 1.0))).unwrap();
        assert!(rel(sf.g(), (2.0f64 / 3.0).sqrt()) < 1e-15);
        assert!(rel(sf.c(), 0.5 * (2.0f64 / 3.0).sqrt()) < 1e-15);
        assert!(rel(sf.c_prime(), -1.0 / 24f64.sqrt()) < 1e-15);

        let dg: f64 = 0.7;
        let sf = standard_form(&DetInvariants::new(dg, 0.0, dg * dg).unwrap()).unwrap();
        assert_eq!((sf.c(), sf.c_prime()), (0.0, 0.0));
    }

    #[test]
    fn standard_form_rejects_unphysical_invariants() {
        assert!(matches!(
            standard_form(&DetInvariants::new(0.2, 0.0, 0.04).unwrap()),
            Err(Error::InfeasibleInvariants(_))
        ));
        // s < 0: det M larger than det G² with no cross block
        assert!(standard_form(&DetInvariants::new(1.0, 0.0, 2.0).unwrap()).is_err());
        // negative discriminant
        assert!(standard_form(&DetInvariants::new(1.0, 0.5, 0.5).unwrap()).is_err());
    }

    #[test]
    fn duan_examples() {
        let decide = |temp: f64| {
            let sf = standard_form(&det_invariants(&blocks_at(2.0, 1.0, temp, 0.0, 1.0))).unwrap();
            duan_separable(&sf, DEFAULT_TOLERANCE)
        };
        let d0 = decide(0.0);
        assert!(rel(d0.duan_value, 1.0 / 12.0) < 1e-14);
        assert!(!d0.separable);
        let d_half = decide(0.5);
        assert!((d_half.duan_value - 0.25).abs() < 1e-15);
        assert!(d_half.separable);
        let d1 = decide(1.0);
        assert!(rel(d1.duan_value, 5.0 / 12.0) < 1e-14);
        assert!(d1.separable);

        for temp in [0.0, 0.3, 2.0] {
            let sf = standard_form(&det_invariants(&blocks_at(1.5, 0.0, temp, 0.0, 1.0))).unwrap();
            let d = duan_separable(&sf, DEFAULT_TOLERANCE);
            assert!(rel(d.duan_value, 0.25 * (1.5 + 4.0 * temp) / 1.5) < 1e-14);
            assert!(d.separable);
        }
    }

    #[test]
    fn boundary_counts_as_separable() {
        let sf = StandardForm::new(1.0, 0.5, -0.5).unwrap();
        let d = duan_separable(&sf, 0.0);
        assert_eq!(d.margin, 0.0);
        assert!(d.separable);
    }

    #[test]
    fn thresholds() {
        let p = validate_params(2.0, 1.0).unwrap();
        assert_eq!(separability_threshold(&p, &NAT), 0.5);
        assert_eq!(
            separability_threshold(&validate_params(2.0, 0.0).unwrap(), &NAT),
            0.0
        );
        let c = PhysicalConstants::new(3.0, 2.0, 1.0).unwrap();
        assert!(rel(separability_threshold(&p, &c), 4.0 / 6.0) < 1e-15);

        assert_eq!(critical_a12(0.5, &NAT).unwrap(), 1.0);
        assert_eq!(critical_a12(0.0, &NAT).unwrap(), 0.0);
        let light = PhysicalConstants::new(0.5, 1.0, 1.0).unwrap();
        assert_eq!(critical_a12(2.0, &light).unwrap(), 2.0);
        assert!(critical_a12(-1.0, &NAT).is_err());
    }

    #[test]
    fn analyze_fills_report() {
        let p = validate_params(2.0, 1.0).unwrap();
        let a = analyze(&p, 0.0, 3.0, &NAT, None, DEFAULT_TOLERANCE).unwrap();
        assert!(!a.report.separable);
        assert_eq!(a.report.critical_temperature, 0.5);
        assert_eq!(a.report.critical_a12, 0.0);
        assert!(rel(a.blocks.length_scale(), 1.0 / 2f64.sqrt()) < 1e-15);
    }
}
