//! Scenario files (JSON) and result tables (CSV).
//!
//! Power and gain fields accept a unit suffix: `p0_w` or `p0_dbm`,
//! `gain_dl` (linear) or `gain_dl_db`, `a1_w` or `a1_dbm`. Writing always
//! uses the linear forms so that a written scenario parses back exactly.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{
    db_to_linear, dbm_to_watt, ChannelParams, Costs, Device, Metrics, Point2, Region, Scenario, DEFAULT_MIN_DISTANCE,
};
use crate::separated::HistoryEntry;

pub const DEFAULT_CIRCUIT_POWER: f64 = 5e-5;
pub const DEFAULT_TX_COEFF: f64 = 1.4e-6;
pub const DEFAULT_BOX: f64 = 24.0;
pub const DEFAULT_DEVICES: usize = 60;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviceFile {
    x: f64,
    y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a1_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a1_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a2: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p0_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p0_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gain_dl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gain_dl_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    freq_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d_dl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d_ul: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min_distance_m: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionFile {
    lo: [f64; 2],
    hi: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    devices: Vec<DeviceFile>,
    #[serde(default)]
    channel: ChannelFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    region: Option<RegionFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    costs: Option<Costs>,
}

fn field_error(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

fn pick(field: &str, linear: Option<f64>, log: Option<f64>, convert: fn(f64) -> f64, default: f64) -> Result<f64> {
    match (linear, log) {
        (Some(_), Some(_)) => Err(field_error(field, "give either the linear or the logarithmic form, not both")),
        (Some(v), None) => Ok(v),
        (None, Some(v)) => Ok(convert(v)),
        (None, None) => Ok(default),
    }
}

/// Parses a scenario from JSON text. Missing channel fields, device
/// parameters, region, target and costs take the default values.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| {
        field_error(format!("line {}, column {}", e.line(), e.column()), e.to_string())
    })?;
    let defaults = ChannelParams::default();
    let c = &file.channel;
    let channel = ChannelParams::new(
        pick("channel.p0", c.p0_w, c.p0_dbm, dbm_to_watt, defaults.p0())?,
        c.eta.unwrap_or(defaults.eta()),
        pick("channel.gain_dl", c.gain_dl, c.gain_dl_db, db_to_linear, defaults.antenna_gain_dl())?,
        c.freq_hz.unwrap_or(defaults.carrier_freq_dl()),
        c.d_dl.unwrap_or(defaults.dl_exponent()),
        c.d_ul.unwrap_or(defaults.ul_exponent()),
        c.min_distance_m.unwrap_or(DEFAULT_MIN_DISTANCE),
    )
    .map_err(|e| field_error("channel", e.to_string()))?;
    let region = match &file.region {
        Some(r) => Region::new(Point2::new(r.lo[0], r.lo[1]), Point2::new(r.hi[0], r.hi[1]))
            .map_err(|e| field_error("region", e.to_string()))?,
        None => Region::square(DEFAULT_BOX)?,
    };
    let devices = file
        .devices
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let a1 = pick(&format!("devices[{k}].a1"), d.a1_w, d.a1_dbm, dbm_to_watt, DEFAULT_CIRCUIT_POWER)?;
            Device::new(Point2::new(d.x, d.y), a1, d.a2.unwrap_or(DEFAULT_TX_COEFF))
                .map_err(|e| field_error(format!("devices[{k}]"), e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Scenario::new(devices, channel, region, file.gamma_w.unwrap_or(0.0), file.costs.unwrap_or_default())
        .map_err(|e| field_error("scenario", e.to_string()))
}

/// Writes a scenario as pretty JSON using the linear unit forms.
pub fn scenario_to_json(scenario: &Scenario) -> String {
    let ch = &scenario.channel;
    let file = ScenarioFile {
        devices: scenario
            .devices
            .iter()
            .map(|d| DeviceFile {
                x: d.location.x,
                y: d.location.y,
                a1_w: Some(d.circuit_power),
                a1_dbm: None,
                a2: Some(d.tx_coeff),
            })
            .collect(),
        channel: ChannelFile {
            p0_w: Some(ch.p0()),
            eta: Some(ch.eta()),
            gain_dl: Some(ch.antenna_gain_dl()),
            freq_hz: Some(ch.carrier_freq_dl()),
            d_dl: Some(ch.dl_exponent()),
            d_ul: Some(ch.ul_exponent()),
            min_distance_m: Some(ch.min_distance()),
            ..ChannelFile::default()
        },
        region: Some(RegionFile {
            lo: [scenario.region.lo.x, scenario.region.lo.y],
            hi: [scenario.region.hi.x, scenario.region.hi.y],
        }),
        gamma_w: Some(scenario.gamma),
        costs: Some(scenario.costs),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("scenario serializes");
    s.push('\n');
    s
}

/// SHA-256 of the canonical JSON form, hex encoded.
pub fn scenario_digest(scenario: &Scenario) -> String {
    Sha256::digest(scenario_to_json(scenario).as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// `k` devices uniform in a `side` x `side` box with default parameters.
pub fn generate_scenario(k: usize, side: f64, seed: u64) -> Result<Scenario> {
    if k == 0 {
        return Err(Error::invalid("at least one device is required"));
    }
    let region = Region::square(side)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let devices = (0..k)
        .map(|_| {
            let p = Point2::new(rng.gen::<f64>() * side, rng.gen::<f64>() * side);
            Device::new(p, DEFAULT_CIRCUIT_POWER, DEFAULT_TX_COEFF)
        })
        .collect::<Result<Vec<_>>>()?;
    Scenario::new(devices, ChannelParams::default(), region, 0.0, Costs::default())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Per-device table plus one summary row.
pub fn write_metrics_csv<W: Write>(
    out: W,
    scenario: &Scenario,
    metrics: &Metrics,
    t_star: Option<f64>,
    cost: Option<f64>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row", "device", "x_m", "y_m", "ap", "lambda_w", "mu_w", "omega_w", "p_r_w", "t_star_w", "cost"])
        .map_err(csv_err)?;
    for (k, dev) in scenario.devices.iter().enumerate() {
        w.write_record([
            "device".to_string(),
            k.to_string(),
            num(dev.location.x),
            num(dev.location.y),
            metrics.associations[k].to_string(),
            num(metrics.lambda[k]),
            num(metrics.mu[k]),
            num(metrics.omega[k]),
            String::new(),
            String::new(),
            String::new(),
        ])
        .map_err(csv_err)?;
    }
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    w.write_record([
        "summary".to_string(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        num(metrics.p_r),
        opt(t_star),
        opt(cost),
    ])
    .map_err(csv_err)?;
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

/// One row per node: kind (en, ap or hap), index and coordinates.
pub fn write_nodes_csv<W: Write>(out: W, placement: &crate::model::Placement) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["kind", "index", "x_m", "y_m"]).map_err(csv_err)?;
    let mut rows = |kind: &str, pts: &[Point2]| -> Result<()> {
        for (i, p) in pts.iter().enumerate() {
            w.write_record([kind.to_string(), i.to_string(), num(p.x), num(p.y)]).map_err(csv_err)?;
        }
        Ok(())
    };
    if placement.colocated {
        rows("hap", &placement.en_locations)?;
    } else {
        rows("en", &placement.en_locations)?;
        rows("ap", &placement.ap_locations)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn write_history_csv<W: Write>(out: W, history: &[HistoryEntry]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iter", "phase", "z_l_w"]).map_err(csv_err)?;
    for h in history {
        w.write_record([h.iter.to_string(), h.phase.as_str().to_string(), num(h.z)]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}
