//! Block-fading simulation used to check the average-rate models.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derive_a2, Placement, Scenario, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FadingModel {
    /// Exponential power gain (Rayleigh amplitude).
    #[default]
    Rayleigh,
    /// Gains fixed at their mean.
    Deterministic,
}

/// Channel power gains of one block, `gains[i][k]` from EN `i` to device `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingSample {
    pub gains: Vec<Vec<f64>>,
    pub block_index: usize,
}

/// Draws one block of downlink gains.
pub fn sample_block<R: rand::Rng>(
    placement: &Placement,
    scenario: &Scenario,
    model: FadingModel,
    block_index: usize,
    rng: &mut R,
) -> FadingSample {
    let ch = &scenario.channel;
    let gains = placement
        .en_locations
        .iter()
        .map(|u| {
            scenario
                .devices
                .iter()
                .map(|d| {
                    let mean = ch.mean_gain(u.dist(&d.location));
                    match model {
                        FadingModel::Rayleigh => {
                            let g: f64 = Exp1.sample(rng);
                            mean * g
                        }
                        FadingModel::Deterministic => mean,
                    }
                })
                .collect()
        })
        .collect();
    FadingSample { gains, block_index }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarvestEstimate {
    /// Empirical mean harvested power per device, watts.
    pub mean: Vec<f64>,
    /// Standard error of each mean, watts.
    pub std_err: Vec<f64>,
    pub blocks: usize,
}

/// Empirical average harvested power of every device over `blocks` fading
/// blocks.
pub fn simulate_harvest(
    placement: &Placement,
    scenario: &Scenario,
    blocks: usize,
    seed: u64,
    model: FadingModel,
) -> Result<HarvestEstimate> {
    if blocks < 1 {
        return Err(Error::invalid("at least one block is required"));
    }
    let ch = &scenario.channel;
    let k = scenario.num_devices();
    let means: Vec<Vec<f64>> = placement
        .en_locations
        .iter()
        .map(|u| scenario.devices.iter().map(|d| ch.mean_gain(u.dist(&d.location))).collect())
        .collect();
    let scale = ch.eta() * ch.p0();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![0.0; k];
    let mut sum_sq = vec![0.0; k];
    let mut received = vec![0.0; k];
    for _ in 0..blocks {
        received.iter_mut().for_each(|r| *r = 0.0);
        for row in &means {
            for (r, &m) in received.iter_mut().zip(row) {
                *r += match model {
                    FadingModel::Rayleigh => {
                        let g: f64 = Exp1.sample(&mut rng);
                        m * g
                    }
                    FadingModel::Deterministic => m,
                };
            }
        }
        for i in 0..k {
            let x = scale * received[i];
            sum[i] += x;
            sum_sq[i] += x * x;
        }
    }
    let n = blocks as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std_err = sum_sq
        .iter()
        .zip(&mean)
        .map(|(sq, m)| {
            let var = if blocks > 1 { ((sq / n - m * m) * n / (n - 1.0)).max(0.0) } else { 0.0 };
            (var / n).sqrt()
        })
        .collect();
    Ok(HarvestEstimate { mean, std_err, blocks })
}

/// Truncated channel inversion on the uplink.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UplinkPolicy {
    /// Target received power, watts.
    pub rx_power_target: f64,
    /// Outage probability.
    pub outage: f64,
    pub antenna_gain_ul: f64,
    pub carrier_freq_ul: f64,
}

impl UplinkPolicy {
    /// Gain cutoff below which the device stays silent (unit-mean gain).
    pub fn cutoff(&self) -> f64 {
        (1.0 / (1.0 - self.outage)).ln()
    }

    /// Transmit power coefficient this policy implies.
    pub fn tx_coeff(&self, ul_exponent: f64) -> Result<f64> {
        derive_a2(self.rx_power_target, self.outage, self.antenna_gain_ul, self.carrier_freq_ul, ul_exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UplinkEstimate {
    /// Empirical mean transmit power, watts.
    pub mean_power: f64,
    pub std_err: f64,
    /// Fraction of blocks in outage.
    pub outage_fraction: f64,
}

/// Empirical transmit power of a device at `distance` from its AP.
pub fn simulate_uplink_power(
    distance: f64,
    policy: &UplinkPolicy,
    ul_exponent: f64,
    blocks: usize,
    seed: u64,
) -> Result<UplinkEstimate> {
    if blocks < 1 {
        return Err(Error::invalid("at least one block is required"));
    }
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(Error::invalid(format!("distance must be > 0, got {distance}")));
    }
    policy.tx_coeff(ul_exponent)?;
    let cutoff = policy.cutoff();
    let inv_wavelength = 4.0 * std::f64::consts::PI * policy.carrier_freq_ul / SPEED_OF_LIGHT;
    let scale = policy.rx_power_target * inv_wavelength.powf(ul_exponent) * distance.powf(ul_exponent)
        / policy.antenna_gain_ul;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum_sq, mut outages) = (0.0, 0.0, 0usize);
    for _ in 0..blocks {
        let g: f64 = Exp1.sample(&mut rng);
        if g > cutoff {
            let p = scale / g;
            sum += p;
            sum_sq += p * p;
        } else {
            outages += 1;
        }
    }
    let n = blocks as f64;
    let mean_power = sum / n;
    let var = if blocks > 1 { ((sum_sq / n - mean_power * mean_power) * n / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(UplinkEstimate {
        mean_power,
        std_err: (var / n).sqrt(),
        outage_fraction: outages as f64 / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{evaluate, ChannelParams, Costs, Device, Point2, Region};

    fn scenario(points: &[(f64, f64)], channel: ChannelParams) -> Scenario {
        Scenario::new(
            points
                .iter()
                .map(|&(x, y)| Device::new(Point2::new(x, y), 5e-5, 1.4e-6).unwrap())
                .collect(),
            channel,
            Region::square(24.0).unwrap(),
            0.0,
            Costs::default(),
        )
        .unwrap()
    }

    fn policy() -> UplinkPolicy {
        UplinkPolicy {
            rx_power_target: 1e-10,
            outage: 0.05,
            antenna_gain_ul: 2.0,
            carrier_freq_ul: 915e6,
        }
    }

    #[test]
    fn deterministic_mode_is_exact() {
        let s = scenario(&[(1.0, 1.0), (10.0, 4.0), (20.0, 22.0)], ChannelParams::default());
        let p = Placement::separated(vec![Point2::new(5.0, 5.0), Point2::new(12.0, 2.0)], vec![Point2::new(3.0, 3.0)], &s.devices)
            .unwrap();
        let est = simulate_harvest(&p, &s, 10, 0, FadingModel::Deterministic).unwrap();
        let lambda = evaluate(&p, &s).unwrap().lambda;
        for (a, b) in est.mean.iter().zip(&lambda) {
            assert!((a - b).abs() <= 1e-15 * b);
        }
        // Only roundoff in the variance accumulator remains.
        for (e, l) in est.std_err.iter().zip(&lambda) {
            assert!(*e <= 1e-7 * l);
        }
    }

    #[test]
    fn one_en_at_ten_meters() {
        let s = scenario(&[(2.0, 12.0)], ChannelParams::default());
        let p = Placement::separated(vec![Point2::new(12.0, 12.0)], vec![Point2::new(2.0, 12.0)], &s.devices).unwrap();
        let est = simulate_harvest(&p, &s, 1_000_000, 11, FadingModel::Rayleigh).unwrap();
        let expected = 2.11414877414978e-6;
        assert!((est.mean[0] - expected).abs() < 0.01 * expected);
        // Exponential: standard deviation equals the mean.
        assert!((est.std_err[0] * 1000.0 / expected - 1.0).abs() < 0.01);
    }

    #[test]
    fn doubling_power_doubles_every_sample() {
        let ch = ChannelParams::default();
        let s1 = scenario(&[(1.0, 1.0), (7.0, 9.0)], ch);
        let s2 = scenario(&[(1.0, 1.0), (7.0, 9.0)], ch.with_p0(2.0 * ch.p0()).unwrap());
        let p = Placement::separated(vec![Point2::new(5.0, 5.0), Point2::new(3.0, 8.0)], vec![Point2::new(3.0, 3.0)], &s1.devices)
            .unwrap();
        let a = simulate_harvest(&p, &s1, 5000, 9, FadingModel::Rayleigh).unwrap();
        let b = simulate_harvest(&p, &s2, 5000, 9, FadingModel::Rayleigh).unwrap();
        for (x, y) in a.mean.iter().zip(&b.mean) {
            assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn same_seed_same_estimate() {
        let s = scenario(&[(1.0, 1.0)], ChannelParams::default());
        let p = Placement::hap(vec![Point2::new(5.0, 5.0)], &s.devices).unwrap();
        let a = simulate_harvest(&p, &s, 1000, 3, FadingModel::Rayleigh).unwrap();
        let b = simulate_harvest(&p, &s, 1000, 3, FadingModel::Rayleigh).unwrap();
        assert_eq!(a, b);
        assert!(simulate_harvest(&p, &s, 0, 3, FadingModel::Rayleigh).is_err());
    }

    #[test]
    fn block_sampler_matches_means() {
        let s = scenario(&[(1.0, 1.0), (4.0, 4.0)], ChannelParams::default());
        let p = Placement::hap(vec![Point2::new(5.0, 5.0)], &s.devices).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let det = sample_block(&p, &s, FadingModel::Deterministic, 0, &mut rng);
        assert_eq!(det.gains[0][1], s.channel.mean_gain(p.en_locations[0].dist(&s.devices[1].location)));
        let ray = sample_block(&p, &s, FadingModel::Rayleigh, 1, &mut rng);
        assert!(ray.gains.iter().flatten().all(|&g| g >= 0.0));
        assert_eq!(ray.block_index, 1);
    }

    #[test]
    fn uplink_matches_closed_form() {
        let pol = policy();
        let d = 8.0;
        let est = simulate_uplink_power(d, &pol, 2.5, 1_000_000, 5).unwrap();
        let expected = pol.tx_coeff(2.5).unwrap() * d.powf(2.5);
        assert!((est.mean_power / expected - 1.0).abs() < 0.02, "{} vs {expected}", est.mean_power);
        let sd = (0.05f64 * 0.95 / 1e6).sqrt();
        assert!((est.outage_fraction - 0.05).abs() < 3.0 * sd);
    }

    #[test]
    fn smaller_outage_costs_more_power() {
        let mut last = 0.0;
        for outage in [0.2, 0.1, 0.05, 0.01, 0.001] {
            let a2 = UplinkPolicy { outage, ..policy() }.tx_coeff(2.5).unwrap();
            assert!(a2 > last);
            last = a2;
        }
    }
}
