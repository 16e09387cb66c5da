//! Channel and energy models.
//!
//! Every other module evaluates physics through this one: the mean downlink
//! channel gain, the average harvesting rate of a device, the distance
//! dependent uplink power consumption, and the resulting net rate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light used by the free-space wavelength term.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Default lower clamp on EN-to-device distance inside the harvesting model.
pub const DEFAULT_MIN_DISTANCE: f64 = 0.5;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    #[inline]
    pub fn dist(&self, other: &Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    #[inline]
    pub fn dist_sq(&self, other: &Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Axis-aligned deployment box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lo: Point2,
    pub hi: Point2,
}

impl Region {
    pub fn new(lo: Point2, hi: Point2) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo.x > hi.x || lo.y > hi.y {
            return Err(Error::invalid(format!(
                "region bounds must be finite with lo <= hi, got {lo:?} / {hi:?}"
            )));
        }
        Ok(Region { lo, hi })
    }

    /// Square box `[0, side]^2`.
    pub fn square(side: f64) -> Result<Self> {
        Region::new(Point2::new(0.0, 0.0), Point2::new(side, side))
    }

    pub fn center(&self) -> Point2 {
        Point2::new(0.5 * (self.lo.x + self.hi.x), 0.5 * (self.lo.y + self.hi.y))
    }

    pub fn width(&self) -> f64 {
        self.hi.x - self.lo.x
    }

    pub fn height(&self) -> f64 {
        self.hi.y - self.lo.y
    }

    /// Length of the box diagonal, an upper bound on any in-box distance.
    pub fn diameter(&self) -> f64 {
        self.lo.dist(&self.hi)
    }

    pub fn contains(&self, p: &Point2) -> bool {
        p.x >= self.lo.x && p.x <= self.hi.x && p.y >= self.lo.y && p.y <= self.hi.y
    }

    pub fn clamp(&self, p: Point2) -> Point2 {
        Point2::new(
            p.x.clamp(self.lo.x, self.hi.x),
            p.y.clamp(self.lo.y, self.hi.y),
        )
    }
}

/// A wireless device with its uplink consumption parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Device {
    pub location: Point2,
    /// Constant circuit power, watts.
    pub circuit_power: f64,
    /// Transmit power coefficient, watts per meter^{d_U}.
    pub tx_coeff: f64,
}

impl Device {
    pub fn new(location: Point2, circuit_power: f64, tx_coeff: f64) -> Result<Self> {
        if !location.is_finite() {
            return Err(Error::invalid("device location must be finite"));
        }
        if !(circuit_power >= 0.0) || !circuit_power.is_finite() {
            return Err(Error::invalid(format!(
                "circuit power must be finite and >= 0, got {circuit_power}"
            )));
        }
        if !(tx_coeff > 0.0) || !tx_coeff.is_finite() {
            return Err(Error::invalid(format!(
                "transmit coefficient must be finite and > 0, got {tx_coeff}"
            )));
        }
        Ok(Device {
            location,
            circuit_power,
            tx_coeff,
        })
    }
}

/// Downlink/uplink channel constants. `beta` and `phi` are derived on
/// construction and kept consistent with the primary fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    p0: f64,
    eta: f64,
    antenna_gain_dl: f64,
    carrier_freq_dl: f64,
    dl_exponent: f64,
    ul_exponent: f64,
    min_distance: f64,
    beta: f64,
    phi: f64,
}

impl ChannelParams {
    pub fn new(
        p0: f64,
        eta: f64,
        antenna_gain_dl: f64,
        carrier_freq_dl: f64,
        dl_exponent: f64,
        ul_exponent: f64,
        min_distance: f64,
    ) -> Result<Self> {
        if !(p0 > 0.0) || !p0.is_finite() {
            return Err(Error::invalid(format!("transmit power must be > 0, got {p0}")));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::invalid(format!("efficiency must lie in (0, 1], got {eta}")));
        }
        if !(ul_exponent >= 2.0) || !ul_exponent.is_finite() {
            return Err(Error::invalid(format!(
                "uplink path loss exponent must be >= 2, got {ul_exponent}"
            )));
        }
        if !(min_distance >= 0.0) || !min_distance.is_finite() {
            return Err(Error::invalid(format!(
                "minimum distance must be >= 0, got {min_distance}"
            )));
        }
        let beta = compute_beta(antenna_gain_dl, carrier_freq_dl, dl_exponent)?;
        Ok(ChannelParams {
            p0,
            eta,
            antenna_gain_dl,
            carrier_freq_dl,
            dl_exponent,
            ul_exponent,
            min_distance,
            beta,
            phi: eta * beta * p0,
        })
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn antenna_gain_dl(&self) -> f64 {
        self.antenna_gain_dl
    }
    pub fn carrier_freq_dl(&self) -> f64 {
        self.carrier_freq_dl
    }
    pub fn dl_exponent(&self) -> f64 {
        self.dl_exponent
    }
    pub fn ul_exponent(&self) -> f64 {
        self.ul_exponent
    }
    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    /// `eta * beta * p0`, watts times meters^{d_D}.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Same channel with a different transmit power.
    pub fn with_p0(&self, p0: f64) -> Result<Self> {
        ChannelParams::new(
            p0,
            self.eta,
            self.antenna_gain_dl,
            self.carrier_freq_dl,
            self.dl_exponent,
            self.ul_exponent,
            self.min_distance,
        )
    }

    /// Mean channel power gain at distance `d` (distance clamped).
    #[inline]
    pub fn mean_gain(&self, d: f64) -> f64 {
        self.beta * d.max(self.min_distance).powf(-self.dl_exponent)
    }
}

impl Default for ChannelParams {
    /// 1 W transmitter, 51% harvesting efficiency, 3 dB receive antenna,
    /// 915 MHz carrier, path loss exponents 2.2 (DL) and 2.5 (UL).
    fn default() -> Self {
        ChannelParams::new(
            1.0,
            0.51,
            db_to_linear(3.0),
            915.0e6,
            2.2,
            2.5,
            DEFAULT_MIN_DISTANCE,
        )
        .expect("default channel parameters are valid")
    }
}

/// Per-unit deployment costs of an EN, an AP and a HAP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Costs {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Default for Costs {
    fn default() -> Self {
        Costs {
            c1: 0.7,
            c2: 1.0,
            c3: 1.4,
        }
    }
}

/// An immutable problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub devices: Vec<Device>,
    pub channel: ChannelParams,
    pub region: Region,
    /// Target net harvesting rate, watts.
    pub gamma: f64,
    pub costs: Costs,
}

impl Scenario {
    pub fn new(
        devices: Vec<Device>,
        channel: ChannelParams,
        region: Region,
        gamma: f64,
        costs: Costs,
    ) -> Result<Self> {
        if devices.is_empty() {
            return Err(Error::invalid("a scenario needs at least one device"));
        }
        if !gamma.is_finite() {
            return Err(Error::invalid(format!("target rate must be finite, got {gamma}")));
        }
        for (k, d) in devices.iter().enumerate() {
            if !region.contains(&d.location) {
                return Err(Error::invalid(format!(
                    "device {k} at ({}, {}) lies outside the deployment region",
                    d.location.x, d.location.y
                )));
            }
        }
        Ok(Scenario {
            devices,
            channel,
            region,
            gamma,
            costs,
        })
    }

    pub fn num_devices(&self) -> usize {
        self.devices.len()
    }

    pub fn device_points(&self) -> Vec<Point2> {
        self.devices.iter().map(|d| d.location).collect()
    }
}

/// A candidate solution: EN sites, AP sites and the derived nearest-AP
/// association of every device. For co-located deployments both site lists
/// hold the same HAP coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub en_locations: Vec<Point2>,
    pub ap_locations: Vec<Point2>,
    pub associations: Vec<usize>,
    #[serde(default)]
    pub colocated: bool,
}

impl Placement {
    pub fn separated(ens: Vec<Point2>, aps: Vec<Point2>, devices: &[Device]) -> Result<Self> {
        if ens.is_empty() || aps.is_empty() {
            return Err(Error::invalid("a placement needs at least one EN and one AP"));
        }
        let associations = associate(&aps, devices)?;
        Ok(Placement {
            en_locations: ens,
            ap_locations: aps,
            associations,
            colocated: false,
        })
    }

    pub fn hap(haps: Vec<Point2>, devices: &[Device]) -> Result<Self> {
        if haps.is_empty() {
            return Err(Error::invalid("a placement needs at least one HAP"));
        }
        let associations = associate(&haps, devices)?;
        Ok(Placement {
            en_locations: haps.clone(),
            ap_locations: haps,
            associations,
            colocated: true,
        })
    }

    /// Number of distinct nodes (HAPs count once).
    pub fn node_count(&self) -> usize {
        if self.colocated {
            self.en_locations.len()
        } else {
            self.en_locations.len() + self.ap_locations.len()
        }
    }
}

fn associate(sites: &[Point2], devices: &[Device]) -> Result<Vec<usize>> {
    devices
        .iter()
        .map(|d| nearest_index(sites, &d.location))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub omega: Vec<f64>,
    pub associations: Vec<usize>,
    /// Minimum net rate over all devices.
    pub p_r: f64,
}

/// `A_d * (c / (4 pi f))^{d_D}`.
pub fn compute_beta(antenna_gain_dl: f64, carrier_freq_dl: f64, dl_exponent: f64) -> Result<f64> {
    if !(antenna_gain_dl > 0.0) || !antenna_gain_dl.is_finite() {
        return Err(Error::invalid(format!(
            "antenna gain must be > 0, got {antenna_gain_dl}"
        )));
    }
    if !(carrier_freq_dl > 0.0) || !carrier_freq_dl.is_finite() {
        return Err(Error::invalid(format!(
            "carrier frequency must be > 0, got {carrier_freq_dl}"
        )));
    }
    if !(dl_exponent >= 2.0) || !dl_exponent.is_finite() {
        return Err(Error::invalid(format!(
            "downlink path loss exponent must be >= 2, got {dl_exponent}"
        )));
    }
    let wavelength_term = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * carrier_freq_dl);
    Ok(antenna_gain_dl * wavelength_term.powf(dl_exponent))
}

/// Average harvesting rate of a device at `device_location` from all ENs.
pub fn harvest_rate(
    en_locations: &[Point2],
    device_location: &Point2,
    channel: &ChannelParams,
) -> Result<f64> {
    if en_locations.is_empty() {
        return Err(Error::invalid("harvest rate needs at least one EN"));
    }
    Ok(harvest(en_locations, device_location, channel))
}

#[inline]
pub(crate) fn harvest(en_locations: &[Point2], w: &Point2, channel: &ChannelParams) -> f64 {
    let floor = channel.min_distance;
    let sum: f64 = en_locations
        .iter()
        .map(|u| u.dist(w).max(floor).powf(-channel.dl_exponent))
        .sum();
    channel.phi * sum
}

/// Index of the site nearest to `device_location`; ties go to the lowest index.
pub fn nearest_index(sites: &[Point2], device_location: &Point2) -> Result<usize> {
    if sites.is_empty() {
        return Err(Error::invalid("nearest site lookup on an empty list"));
    }
    Ok(nearest(sites, device_location))
}

#[inline]
pub(crate) fn nearest(sites: &[Point2], w: &Point2) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, s) in sites.iter().enumerate() {
        let d = s.dist_sq(w);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

/// `a1 + a2 * |v - w|^{d_U}`.
#[inline]
pub fn consumption_rate(ap_location: &Point2, device: &Device, ul_exponent: f64) -> f64 {
    let d = ap_location.dist(&device.location);
    device.circuit_power + device.tx_coeff * d.powf(ul_exponent)
}

/// Per-device harvesting, consumption and net rates of a placement.
/// Associations are recomputed from the AP sites, never trusted from input.
pub fn evaluate(placement: &Placement, scenario: &Scenario) -> Result<Metrics> {
    if placement.en_locations.is_empty() || placement.ap_locations.is_empty() {
        return Err(Error::invalid("cannot evaluate a placement without ENs and APs"));
    }
    let ch = &scenario.channel;
    let k = scenario.devices.len();
    let mut lambda = Vec::with_capacity(k);
    let mut mu = Vec::with_capacity(k);
    let mut omega = Vec::with_capacity(k);
    let mut associations = Vec::with_capacity(k);
    let mut p_r = f64::INFINITY;
    for dev in &scenario.devices {
        let j = nearest(&placement.ap_locations, &dev.location);
        let l = harvest(&placement.en_locations, &dev.location, ch);
        let m = consumption_rate(&placement.ap_locations[j], dev, ch.ul_exponent);
        let w = l - m;
        p_r = p_r.min(w);
        lambda.push(l);
        mu.push(m);
        omega.push(w);
        associations.push(j);
    }
    Ok(Metrics {
        lambda,
        mu,
        omega,
        associations,
        p_r,
    })
}

/// Minimum net rate only; the hot path of the local search baseline.
pub(crate) fn min_net_rate(ens: &[Point2], aps: &[Point2], scenario: &Scenario) -> f64 {
    let ch = &scenario.channel;
    let mut p_r = f64::INFINITY;
    for dev in &scenario.devices {
        let j = nearest(aps, &dev.location);
        let w = harvest(ens, &dev.location, ch) - consumption_rate(&aps[j], dev, ch.ul_exponent);
        p_r = p_r.min(w);
    }
    p_r
}

/// Expected time until the battery depletes: `-battery / omega` for a
/// negative net rate, infinite otherwise.
pub fn lifetime(omega: f64, battery: f64) -> Result<f64> {
    if !(battery > 0.0) {
        return Err(Error::invalid(format!("battery level must be > 0, got {battery}")));
    }
    if omega >= 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(-battery / omega)
    }
}

/// Exponential integral `E1(x) = int_1^inf e^{-tx}/t dt` for `x > 0`.
///
/// Power series below 1, modified Lentz continued fraction above.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::Domain(format!("E1 is defined for x > 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 500;
    if x <= 1.0 {
        let mut sum = -x.ln() - EULER_GAMMA;
        let mut fact = 1.0;
        for i in 1..MAX_ITER {
            let n = i as f64;
            fact *= -x / n;
            let term = -fact / n;
            sum += term;
            if term.abs() < sum.abs() * EPS {
                break;
            }
        }
        Ok(sum)
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        Ok(h * (-x).exp())
    }
}

/// Transmit power coefficient of a device using truncated channel inversion
/// under Rayleigh fading:
/// `(Gamma / A_u) * (4 pi f_u / c)^{d_U} * E1(ln(1 / (1 - outage)))`.
pub fn derive_a2(
    rx_power_target: f64,
    outage: f64,
    antenna_gain_ul: f64,
    carrier_freq_ul: f64,
    ul_exponent: f64,
) -> Result<f64> {
    if !(outage > 0.0 && outage < 1.0) {
        return Err(Error::Domain(format!("outage must lie in (0, 1), got {outage}")));
    }
    if !(rx_power_target > 0.0) || !(antenna_gain_ul > 0.0) || !(carrier_freq_ul > 0.0) {
        return Err(Error::Domain(
            "receive power target, uplink gain and frequency must be > 0".into(),
        ));
    }
    let cutoff = (1.0 / (1.0 - outage)).ln();
    let inv_wavelength = 4.0 * std::f64::consts::PI * carrier_freq_ul / SPEED_OF_LIGHT;
    Ok(rx_power_target / antenna_gain_ul
        * inv_wavelength.powf(ul_exponent)
        * exp_integral_e1(cutoff)?)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn channel_2_2() -> ChannelParams {
        ChannelParams::new(1.0, 0.51, 2.0, 915e6, 2.2, 2.5, DEFAULT_MIN_DISTANCE).unwrap()
    }

    fn device(x: f64, y: f64) -> Device {
        Device::new(Point2::new(x, y), 5e-5, 1.4e-6).unwrap()
    }

    #[test]
    fn beta_examples() {
        assert!(rel(compute_beta(2.0, 915e6, 2.2).unwrap(), 6.57e-4) < 5e-3);
        let unit_freq = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI);
        assert!(rel(compute_beta(1.0, unit_freq, 2.0).unwrap(), 1.0) < 1e-14);
        // mpmath: 1.36147787748371e-3
        assert!(rel(compute_beta(2.0, 915e6, 2.0).unwrap(), 1.361_477_877_483_71e-3) < 1e-12);
    }

    #[test]
    fn beta_rejects_bad_inputs() {
        assert!(compute_beta(0.0, 915e6, 2.2).is_err());
        assert!(compute_beta(2.0, -1.0, 2.2).is_err());
        assert!(compute_beta(2.0, 915e6, 1.5).is_err());
    }

    #[test]
    fn harvest_examples() {
        let ch = channel_2_2();
        let w = Point2::new(3.0, 4.0);
        let one = harvest_rate(&[Point2::new(3.0, 5.0)], &w, &ch).unwrap();
        assert_eq!(one, ch.phi());
        let two = harvest_rate(&[Point2::new(3.0, 5.0), Point2::new(2.0, 4.0)], &w, &ch).unwrap();
        assert_eq!(two, 2.0 * one);
        assert!(harvest_rate(&[], &w, &ch).is_err());
    }

    #[test]
    fn harvest_at_ten_meters() {
        // phi taken as 0.51 * 6.57e-4 * 1; mpmath gives 2.11414877e-6 W.
        let mut ch = channel_2_2();
        ch.phi = 0.51 * 6.57e-4;
        let l = harvest_rate(&[Point2::new(10.0, 0.0)], &Point2::new(0.0, 0.0), &ch).unwrap();
        assert!(rel(l, 2.114_148_774_149_78e-6) < 1e-12);
    }

    #[test]
    fn nearest_examples() {
        let two = [Point2::new(0.0, 0.0), Point2::new(10.0, 0.0)];
        assert_eq!(nearest_index(&two, &Point2::new(2.0, 0.0)).unwrap(), 0);
        assert_eq!(nearest_index(&two, &Point2::new(5.0, 0.0)).unwrap(), 0);
        let three = [Point2::new(0.0, 0.0), Point2::new(3.0, 4.0), Point2::new(6.0, 8.0)];
        assert_eq!(nearest_index(&three, &Point2::new(3.0, 3.0)).unwrap(), 1);
        assert!(nearest_index(&[], &Point2::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn consumption_examples() {
        let d = device(0.0, 0.0);
        assert_eq!(consumption_rate(&Point2::new(0.0, 0.0), &d, 2.5), 5e-5);
        assert_eq!(consumption_rate(&Point2::new(0.0, 1.0), &d, 2.5), 5e-5 + 1.4e-6);
        let far = consumption_rate(&Point2::new(10.0, 0.0), &d, 2.5);
        assert!(rel(far, 4.927_188_724_235_73e-4) < 1e-12);
    }

    fn scenario(points: &[(f64, f64)]) -> Scenario {
        Scenario::new(
            points.iter().map(|&(x, y)| device(x, y)).collect(),
            channel_2_2(),
            Region::square(24.0).unwrap(),
            0.0,
            Costs::default(),
        )
        .unwrap()
    }

    #[test]
    fn evaluate_colocated_single_device() {
        let s = scenario(&[(5.0, 5.0)]);
        let p = Placement::separated(vec![Point2::new(5.0, 5.0)], vec![Point2::new(5.0, 5.0)], &s.devices)
            .unwrap();
        let m = evaluate(&p, &s).unwrap();
        assert_eq!(m.mu[0], 5e-5);
        assert_eq!(m.lambda[0], s.channel.phi() * 0.5f64.powf(-2.2));
        assert_eq!(m.omega[0], m.lambda[0] - 5e-5);
    }

    #[test]
    fn evaluate_duplicated_ens_double_lambda() {
        let s = scenario(&[(1.0, 2.0), (7.0, 3.0), (12.0, 20.0)]);
        let ens = vec![Point2::new(4.0, 4.0), Point2::new(10.0, 15.0)];
        let aps = vec![Point2::new(6.0, 6.0)];
        let base = evaluate(&Placement::separated(ens.clone(), aps.clone(), &s.devices).unwrap(), &s).unwrap();
        let doubled: Vec<Point2> = ens.iter().chain(ens.iter()).copied().collect();
        let twice = evaluate(&Placement::separated(doubled, aps, &s.devices).unwrap(), &s).unwrap();
        for k in 0..3 {
            assert!(rel(twice.lambda[k], 2.0 * base.lambda[k]) < 1e-14);
            assert_eq!(twice.mu[k], base.mu[k]);
        }
    }

    #[test]
    fn evaluate_symmetric_pair() {
        let s = scenario(&[(7.0, 12.0), (17.0, 12.0)]);
        let p = Placement::separated(vec![Point2::new(12.0, 12.0)], vec![Point2::new(12.0, 12.0)], &s.devices)
            .unwrap();
        let m = evaluate(&p, &s).unwrap();
        assert_eq!(m.omega[0], m.omega[1]);
    }

    #[test]
    fn evaluate_rejects_empty() {
        let s = scenario(&[(1.0, 1.0)]);
        let p = Placement {
            en_locations: vec![],
            ap_locations: vec![Point2::new(0.0, 0.0)],
            associations: vec![0],
            colocated: false,
        };
        assert!(evaluate(&p, &s).is_err());
    }

    #[test]
    fn lifetime_examples() {
        assert!(rel(lifetime(-1e-6, 1.0).unwrap(), 1e6) < 1e-12);
        assert_eq!(lifetime(0.0, 1.0).unwrap(), f64::INFINITY);
        assert!(rel(lifetime(-5e-5, 0.5).unwrap(), 1e4) < 1e-12);
        assert!(lifetime(-1.0, 0.0).is_err());
    }

    /// Adaptive Simpson on `int_0^1 e^{-x/s}/s ds`, which equals E1(x)
    /// after substituting `t = 1/s`.
    fn e1_quadrature(x: f64) -> f64 {
        fn f(x: f64, s: f64) -> f64 {
            if s <= 0.0 {
                0.0
            } else {
                (-x / s).exp() / s
            }
        }
        fn simpson(x: f64, a: f64, b: f64) -> f64 {
            let m = 0.5 * (a + b);
            (b - a) / 6.0 * (f(x, a) + 4.0 * f(x, m) + f(x, b))
        }
        fn adapt(x: f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let l = simpson(x, a, m);
            let r = simpson(x, m, b);
            if depth == 0 || (l + r - whole).abs() <= 15.0 * tol {
                l + r + (l + r - whole) / 15.0
            } else {
                adapt(x, a, m, l, 0.5 * tol, depth - 1) + adapt(x, m, b, r, 0.5 * tol, depth - 1)
            }
        }
        adapt(x, 0.0, 1.0, simpson(x, 0.0, 1.0), 1e-13, 50)
    }

    #[test]
    fn e1_matches_quadrature() {
        for &x in &[0.01, 0.0512932943875505, 0.3, 1.0, 1.5, 3.0, 10.0] {
            let q = e1_quadrature(x);
            let v = exp_integral_e1(x).unwrap();
            assert!(rel(v, q) < 1e-8, "x = {x}: {v} vs {q}");
        }
    }

    #[test]
    fn e1_examples() {
        assert!(rel(exp_integral_e1(1.0).unwrap(), 0.219_383_934_395_520_3) < 1e-12);
        assert!((exp_integral_e1(0.051_293_3).unwrap() - 2.4436).abs() < 1e-3);
        let x = 50.0;
        let scaled = exp_integral_e1(x).unwrap() * x * x.exp();
        assert!((scaled - 1.0).abs() < 0.02);
        assert!(matches!(exp_integral_e1(0.0), Err(Error::Domain(_))));
        assert!(matches!(exp_integral_e1(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn a2_examples() {
        let a2 = derive_a2(1e-10, 0.05, 2.0, 915e6, 2.5).unwrap();
        assert!(rel(a2, 1.111_164_576_065_64e-6) < 1e-10);
        // E1(x) = 1 at x = 0.264737010451543 (mpmath root)
        let psi = 1.0 - (-0.264_737_010_451_543_2f64).exp();
        let unit_freq = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI);
        let unit = derive_a2(3.0, psi, 3.0, unit_freq, 2.5).unwrap();
        assert!(rel(unit, 1.0) < 1e-10);
        let doubled = derive_a2(2e-10, 0.05, 2.0, 915e6, 2.5).unwrap();
        assert!(rel(doubled, 2.0 * a2) < 1e-14);
        assert!(derive_a2(1e-10, 0.0, 2.0, 915e6, 2.5).is_err());
        assert!(derive_a2(1e-10, 1.0, 2.0, 915e6, 2.5).is_err());
    }

    fn arb_point() -> impl Strategy<Value = Point2> {
        (0.0..24.0f64, 0.0..24.0f64).prop_map(|(x, y)| Point2::new(x, y))
    }

    proptest! {
        #[test]
        fn harvest_is_additive(a in prop::collection::vec(arb_point(), 1..5),
                               b in prop::collection::vec(arb_point(), 1..5),
                               w in arb_point()) {
            let ch = channel_2_2();
            let union: Vec<Point2> = a.iter().chain(b.iter()).copied().collect();
            let lhs = harvest_rate(&union, &w, &ch).unwrap();
            let rhs = harvest_rate(&a, &w, &ch).unwrap() + harvest_rate(&b, &w, &ch).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs);
        }

        #[test]
        fn moving_closer_increases_harvest(w in arb_point(), u in arb_point(), frac in 0.05..0.9f64) {
            let ch = channel_2_2();
            let d = u.dist(&w);
            prop_assume!(d * (1.0 - frac) > ch.min_distance());
            let closer = Point2::new(w.x + (u.x - w.x) * (1.0 - frac), w.y + (u.y - w.y) * (1.0 - frac));
            prop_assert!(harvest_rate(&[closer], &w, &ch).unwrap() > harvest_rate(&[u], &w, &ch).unwrap());
        }

        #[test]
        fn evaluate_is_consistent(devs in prop::collection::vec(arb_point(), 1..12),
                                  ens in prop::collection::vec(arb_point(), 1..4),
                                  aps in prop::collection::vec(arb_point(), 1..4)) {
            let s = Scenario::new(
                devs.iter().map(|p| device(p.x, p.y)).collect(),
                channel_2_2(), Region::square(24.0).unwrap(), 0.0, Costs::default()).unwrap();
            let m = evaluate(&Placement::separated(ens, aps, &s.devices).unwrap(), &s).unwrap();
            let mut min = f64::INFINITY;
            for k in 0..devs.len() {
                prop_assert_eq!(m.omega[k], m.lambda[k] - m.mu[k]);
                min = min.min(m.omega[k]);
            }
            prop_assert_eq!(m.p_r, min);
        }

        #[test]
        fn nearest_ignores_farther_site(sites in prop::collection::vec(arb_point(), 1..6), w in arb_point(),
                                        angle in 0.0..6.28f64, extra in 0.01..5.0f64) {
            let j = nearest_index(&sites, &w).unwrap();
            let r = sites[j].dist(&w) + extra;
            let mut more = sites.clone();
            more.push(Point2::new(w.x + r * angle.cos(), w.y + r * angle.sin()));
            prop_assert_eq!(nearest_index(&more, &w).unwrap(), j);
        }

        #[test]
        fn a2_increases_with_outage_and_target(p1 in 0.01..0.5f64, dp in 0.01..0.4f64, g in 1e-12..1e-8f64) {
            let lo = derive_a2(g, p1, 2.0, 915e6, 2.5).unwrap();
            // larger outage -> larger cutoff -> smaller E1 -> smaller a2
            let hi_outage = derive_a2(g, p1 + dp, 2.0, 915e6, 2.5).unwrap();
            prop_assert!(hi_outage < lo);
            prop_assert!(derive_a2(g * 1.5, p1, 2.0, 915e6, 2.5).unwrap() > lo);
        }
    }
}
