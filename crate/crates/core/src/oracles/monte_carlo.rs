//! Seeded Monte Carlo over the thermal ensemble of drift velocities.
//!
//! Each sample draws `v1, v2` independently from a normal law with variance
//! `kT/m`, builds the 4x4 raw second-moment matrix of the pure state with
//! those drifts, pushes it through the free-flight map `S(t)` as
//! `S Σ Sᵀ`, and pools the two particles into the symmetric entries.
//! Products `v1 v2` of independent zero-mean drifts are averaged exactly
//! (to zero) rather than sampled, so the cross entries carry no sampling
//! noise.
//!
//! Samples are drawn in fixed blocks of [`RNG_BLOCK`]; block `b` uses the
//! ChaCha stream `b` under the master seed and accumulates its own
//! mean/variance. Blocks are merged in index order, so the estimate is
//! bit-identical for any `batch_size` and any thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{finite, Error, Result};
use crate::model::{check_temperature, GaussianParams, Moment, MomentSet, PhysicalConstants};

pub const RNG_BLOCK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub n_samples: u64,
    pub seed: u64,
    /// Samples per parallel work item (rounded up to whole RNG blocks).
    pub batch_size: u64,
}

impl McConfig {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        McConfig {
            n_samples,
            seed,
            batch_size: 16 * RNG_BLOCK,
        }
    }
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig::new(200_000, 0x5eed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub moments: MomentSet,
    /// Standard error of each entry, in `Moment::ALL` order.
    pub std_errors: [f64; 6],
    pub n_samples: u64,
}

impl McEstimate {
    pub fn std_error(&self, m: Moment) -> f64 {
        self.std_errors[m.index()]
    }
}

/// Running mean and sum of squared deviations for six entries.
#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    n: u64,
    mean: [f64; 6],
    m2: [f64; 6],
}

impl Accumulator {
    fn push(&mut self, x: &[f64; 6]) {
        self.n += 1;
        let n = self.n as f64;
        for ((&xi, mean), m2) in x.iter().zip(&mut self.mean).zip(&mut self.m2) {
            let delta = xi - *mean;
            *mean += delta / n;
            *m2 += delta * (xi - *mean);
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        for i in 0..6 {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * (nb / n);
            self.m2[i] += other.m2[i] + delta * delta * (na * nb / n);
        }
        self.n += other.n;
    }

    fn std_errors(&self) -> [f64; 6] {
        if self.n < 2 {
            return [f64::INFINITY; 6];
        }
        let n = self.n as f64;
        self.m2
            .map(|m2| (m2 / (n - 1.0)).max(0.0).sqrt() / n.sqrt())
    }
}

type Mat4 = [[f64; 4]; 4];

// Index layout (x1, p1, x2, p2).
const X1: usize = 0;
const P1: usize = 1;
const X2: usize = 2;
const P2: usize = 3;

struct SampleModel {
    base: Mat4,
    flight: Mat4,
    mass_sq: f64,
}

impl SampleModel {
    fn new(params: &GaussianParams, time: f64, consts: &PhysicalConstants) -> Self {
        let (a11, a12) = (params.a11(), params.a12());
        let d = a11 * a11 - a12 * a12;
        let hbar2 = consts.hbar() * consts.hbar();
        let mut base = [[0.0; 4]; 4];
        base[X1][X1] = a11 / d;
        base[X2][X2] = a11 / d;
        base[X1][X2] = -a12 / d;
        base[X2][X1] = -a12 / d;
        base[P1][P1] = hbar2 * a11 / 4.0;
        base[P2][P2] = hbar2 * a11 / 4.0;
        base[P1][P2] = hbar2 * a12 / 4.0;
        base[P2][P1] = hbar2 * a12 / 4.0;

        let mut flight = [[0.0; 4]; 4];
        for (i, row) in flight.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        flight[X1][P1] = time / consts.mass();
        flight[X2][P2] = time / consts.mass();

        SampleModel {
            base,
            flight,
            mass_sq: consts.mass() * consts.mass(),
        }
    }

    fn sample(&self, v1: f64, v2: f64) -> [f64; 6] {
        let mut sigma = self.base;
        sigma[P1][P1] += self.mass_sq * v1 * v1;
        sigma[P2][P2] += self.mass_sq * v2 * v2;
        let s = congruence(&self.flight, &sigma);
        [
            0.5 * (s[X1][X1] + s[X2][X2]),
            s[X1][X2],
            0.5 * (s[P1][P1] + s[P2][P2]),
            s[P1][P2],
            0.5 * (s[X1][P1] + s[X2][P2]),
            0.5 * (s[X2][P1] + s[X1][P2]),
        ]
    }
}

/// `A Σ Aᵀ`
fn congruence(a: &Mat4, sigma: &Mat4) -> Mat4 {
    let mut tmp = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            tmp[i][j] = (0..4).map(|k| a[i][k] * sigma[k][j]).sum();
        }
    }
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| tmp[i][k] * a[j][k]).sum();
        }
    }
    out
}

pub fn mc_thermal_moments(
    params: &GaussianParams,
    temperature: f64,
    time: f64,
    consts: &PhysicalConstants,
    cfg: &McConfig,
) -> Result<McEstimate> {
    let temperature = check_temperature(temperature)?;
    let time = finite("time", time)?;
    if cfg.n_samples == 0 || cfg.batch_size == 0 {
        return Err(Error::EmptySampling);
    }
    let sd = (consts.boltzmann() * temperature / consts.mass()).sqrt();
    let velocity = Normal::new(0.0, sd).expect("finite non-negative standard deviation");
    let model = SampleModel::new(params, time, consts);

    let n_blocks = cfg.n_samples.div_ceil(RNG_BLOCK);
    let blocks_per_task = cfg.batch_size.div_ceil(RNG_BLOCK).max(1) as usize;
    let partials: Vec<Accumulator> = (0..n_blocks as usize)
        .into_par_iter()
        .with_min_len(blocks_per_task)
        .map(|block| {
            let block = block as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(block);
            let start = block * RNG_BLOCK;
            let end = (start + RNG_BLOCK).min(cfg.n_samples);
            let mut acc = Accumulator::default();
            for _ in start..end {
                let v1 = velocity.sample(&mut rng);
                let v2 = velocity.sample(&mut rng);
                acc.push(&model.sample(v1, v2));
            }
            acc
        })
        .collect();

    let mut total = Accumulator::default();
    for part in &partials {
        total.merge(part);
    }
    let [xx, x1x2, pp, p1p2, xp_sym, x_cross_p] = total.mean;
    Ok(McEstimate {
        moments: MomentSet::new(xx, x1x2, pp, p1p2, xp_sym, x_cross_p)?,
        std_errors: total.std_errors(),
        n_samples: total.n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{thermal_moments, validate_params};

    const NAT: PhysicalConstants = PhysicalConstants::NATURAL;

    #[test]
    fn zero_temperature_is_degenerate() {
        let p = validate_params(2.0, 1.0).unwrap();
        let est = mc_thermal_moments(&p, 0.0, 0.0, &NAT, &McConfig::new(10_000, 3)).unwrap();
        let exact = thermal_moments(&p, 0.0, &NAT).unwrap();
        for m in Moment::ALL {
            let (a, b) = (est.moments.get(m), exact.get(m));
            assert!(
                (a - b).abs() <= 4.0 * f64::EPSILON * b.abs(),
                "{m:?}: {a} vs {b}"
            );
            assert_eq!(est.std_error(m), 0.0);
        }
    }

    #[test]
    fn batch_size_does_not_change_result() {
        let p = validate_params(1.3, -0.4).unwrap();
        let mut cfg = McConfig::new(50_000, 11);
        let reference = mc_thermal_moments(&p, 0.8, 1.5, &NAT, &cfg).unwrap();
        for batch in [1, 100, RNG_BLOCK, 3 * RNG_BLOCK + 7, 1 << 20] {
            cfg.batch_size = batch;
            assert_eq!(
                mc_thermal_moments(&p, 0.8, 1.5, &NAT, &cfg).unwrap(),
                reference
            );
        }
    }

    #[test]
    fn cross_entries_have_no_variance() {
        let p = validate_params(2.0, 1.0).unwrap();
        let est = mc_thermal_moments(&p, 0.5, 2.0, &NAT, &McConfig::new(20_000, 5)).unwrap();
        for m in [Moment::X1X2, Moment::P1P2, Moment::XCrossP] {
            assert_eq!(est.std_error(m), 0.0);
        }
        for m in [Moment::Xx, Moment::Pp, Moment::XpSym] {
            assert!(est.std_error(m) > 0.0);
        }
    }

    #[test]
    fn rejects_bad_config() {
        let p = validate_params(2.0, 1.0).unwrap();
        let mut cfg = McConfig::new(0, 1);
        assert_eq!(
            mc_thermal_moments(&p, 0.5, 0.0, &NAT, &cfg),
            Err(Error::EmptySampling)
        );
        cfg = McConfig::new(10, 1);
        cfg.batch_size = 0;
        assert_eq!(
            mc_thermal_moments(&p, 0.5, 0.0, &NAT, &cfg),
            Err(Error::EmptySampling)
        );
        assert!(matches!(
            mc_thermal_moments(&p, -0.5, 0.0, &NAT, &McConfig::new(10, 1)),
            Err(Error::NegativeTemperature(_))
        ));
    }

    #[test]
    fn single_sample_has_infinite_error() {
        let p = validate_params(2.0, 1.0).unwrap();
        let est = mc_thermal_moments(&p, 0.5, 1.0, &NAT, &McConfig::new(1, 9)).unwrap();
        assert!(est.std_errors.iter().all(|se| se.is_infinite()));
    }

    #[test]
    fn merge_matches_sequential_push() {
        let xs: Vec<[f64; 6]> = (0..37)
            .map(|i| [i as f64, (i * i) as f64, 1.0, 0.0, -(i as f64), 2.5])
            .collect();
        let mut seq = Accumulator::default();
        xs.iter().for_each(|x| seq.push(x));
        let (mut a, mut b) = (Accumulator::default(), Accumulator::default());
        xs[..10].iter().for_each(|x| a.push(x));
        xs[10..].iter().for_each(|x| b.push(x));
        a.merge(&b);
        for i in 0..6 {
            assert!((a.mean[i] - seq.mean[i]).abs() < 1e-12 * seq.mean[i].abs().max(1.0));
            assert!((a.m2[i] - seq.m2[i]).abs() < 1e-9 * seq.m2[i].abs().max(1.0));
        }
    }
}
