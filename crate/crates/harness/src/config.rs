//! JSON scenario files.
//!
//! Every key is optional and falls back to the simulation preset. Powers take
//! watts or a `"<x> dBm"` string, per-receiver keys take a scalar or one
//! value per receiver, and `layout` either lists receiver positions or asks
//! for a seeded annulus around the transmitter.

use std::path::Path;

use nalgebra::Complex;
use isac_core::rng::{substream, Purpose, StreamId};
use isac_core::scalar::dbm_to_watts;
use isac_core::scenario::{Layout, Point2, Pulse};
use isac_core::{IsacError, Layout64, ScenarioConfig64, SPEED_OF_LIGHT};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("malformed JSON: {0}")]
    Syntax(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing key `{0}`")]
    MissingKey(String),
    #[error("`{key}`: expected {expected}")]
    Type { key: String, expected: String },
    #[error("`{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

impl ConfigError {
    fn ty(key: &str, expected: &str) -> Self {
        ConfigError::Type { key: key.into(), expected: expected.into() }
    }

    pub fn invalid(key: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid { key: key.into(), reason: reason.into() }
    }

    /// The offending key, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::UnknownKey(k) | ConfigError::MissingKey(k) => Some(k),
            ConfigError::Type { key, .. } | ConfigError::Invalid { key, .. } => Some(key),
            _ => None,
        }
    }
}

impl From<IsacError> for ConfigError {
    fn from(e: IsacError) -> Self {
        match e {
            IsacError::InvalidConfig { key, reason } => ConfigError::Invalid { key: json_key(&key).into(), reason },
            other => ConfigError::invalid("layout", other.to_string()),
        }
    }
}

/// JSON spelling of a core parameter name.
fn json_key(core: &str) -> &str {
    match core {
        "K" => "k",
        "N_t" => "n_t",
        "N_r" => "n_r",
        "L" => "l",
        "M" => "m",
        "P_T" => "p_t",
        "B" => "bandwidth",
        "R_th" => "r_th",
        "Omega_th" => "omega_th",
        other => other,
    }
}

/// Where the receivers are.
#[derive(Debug, Clone, PartialEq)]
pub enum LayoutSpec {
    Fixed(Layout64),
    /// Fresh receivers per trial, uniform by area between the two radii.
    Annulus { p_b: Point2<f64>, p_0: Point2<f64>, r_min: f64, r_max: f64 },
}

impl LayoutSpec {
    pub fn preset() -> Self {
        let (p_b, p_0) = Layout::preset_anchors();
        LayoutSpec::Annulus { p_b, p_0, r_min: 1.0, r_max: 100.0 }
    }

    /// Layout of `k` receivers for `trial`, from the placement substream.
    pub fn realize(&self, k: usize, min_distance: f64, seed: u64, trial: u32) -> Result<Layout64, ConfigError> {
        match self {
            LayoutSpec::Fixed(l) if l.p.len() == k => Ok(l.clone()),
            LayoutSpec::Fixed(l) => Err(ConfigError::invalid(
                "layout.receivers",
                format!("{} positions for k = {k}", l.p.len()),
            )),
            LayoutSpec::Annulus { p_b, p_0, r_min, r_max } => {
                let mut rng = substream(seed, StreamId::new(trial, Purpose::Placement, 0));
                Ok(Layout::random_annulus(*p_b, *p_0, k, *r_min, *r_max, min_distance, &mut rng))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessConfig {
    pub scenario: ScenarioConfig64,
    pub layout: LayoutSpec,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self { scenario: ScenarioConfig64::preset(), layout: LayoutSpec::preset() }
    }
}

const KEYS: &[&str] = &[
    "k", "n_t", "n_r", "l", "p_t", "bandwidth", "f0", "lambda", "spacing", "delta_t", "m", "epsilon", "rho",
    "rician_alpha", "beta", "sigma2", "sigma_c2", "sigma_z2", "v", "r_th", "omega_th", "pulse", "seed",
    "min_distance", "layout",
];

pub fn parse_config(path: &Path) -> Result<HarnessConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), reason: e.to_string() })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<HarnessConfig, ConfigError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let obj = root.as_object().ok_or_else(|| ConfigError::ty("<root>", "an object"))?;
    if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(ConfigError::UnknownKey(k.clone()));
    }

    let mut c = ScenarioConfig64::preset();
    let layout = match obj.get("layout") {
        Some(v) => parse_layout(v)?,
        None => LayoutSpec::preset(),
    };
    c.k = match (opt_usize(obj, "k")?, &layout) {
        (Some(k), _) => k,
        (None, LayoutSpec::Fixed(l)) => l.p.len(),
        (None, _) => c.k,
    };
    if let LayoutSpec::Fixed(l) = &layout {
        if l.p.len() != c.k {
            return Err(ConfigError::invalid("layout.receivers", format!("{} positions for k = {}", l.p.len(), c.k)));
        }
    }
    set(&mut c.n_t, opt_usize(obj, "n_t")?);
    set(&mut c.n_r, opt_usize(obj, "n_r")?);
    set(&mut c.l, opt_usize(obj, "l")?);
    set(&mut c.m, opt_usize(obj, "m")?);
    set(&mut c.p_t, opt_power(obj, "p_t")?);
    set(&mut c.sigma2, opt_power(obj, "sigma2")?);
    set(&mut c.sigma_c2, opt_power(obj, "sigma_c2")?);
    set(&mut c.sigma_z2, opt_power(obj, "sigma_z2")?);
    set(&mut c.bandwidth, opt_f64(obj, "bandwidth")?);
    set(&mut c.f0, opt_f64(obj, "f0")?);
    c.lambda = opt_f64(obj, "lambda")?.unwrap_or(SPEED_OF_LIGHT / c.f0);
    c.spacing = opt_f64(obj, "spacing")?.unwrap_or(0.5 * c.lambda);
    c.delta_t = opt_f64(obj, "delta_t")?.unwrap_or(0.5 / c.bandwidth);
    set(&mut c.epsilon, opt_f64(obj, "epsilon")?);
    set(&mut c.rho, opt_f64(obj, "rho")?);
    set(&mut c.v, opt_f64(obj, "v")?);
    set(&mut c.r_th, opt_f64(obj, "r_th")?);
    set(&mut c.min_distance, opt_f64(obj, "min_distance")?);
    if let Some(v) = obj.get("omega_th") {
        c.omega_th = match v {
            Value::Null => f64::INFINITY,
            Value::String(s) if s.eq_ignore_ascii_case("inf") => f64::INFINITY,
            _ => v.as_f64().ok_or_else(|| ConfigError::ty("omega_th", "a number, \"inf\" or null"))?,
        };
    }
    if let Some(v) = obj.get("pulse") {
        let s = v.as_str().ok_or_else(|| ConfigError::ty("pulse", "\"cosine\" or \"sinc\""))?;
        c.pulse = s.parse::<Pulse>()?;
    }
    if let Some(v) = obj.get("seed") {
        c.seed = v.as_u64().ok_or_else(|| ConfigError::ty("seed", "a non-negative integer"))?;
    }
    c.rician_alpha = match obj.get("rician_alpha") {
        Some(v) => per_receiver(v, "rician_alpha", c.k, |x, key| x.as_f64().ok_or_else(|| ConfigError::ty(key, "a number")))?,
        None => vec![0.5; c.k],
    };
    c.beta = match obj.get("beta") {
        Some(v) => per_receiver(v, "beta", c.k, complex)?,
        None => vec![Complex::new(0.6, 0.0); c.k],
    };

    c.validate()?;
    if let LayoutSpec::Fixed(l) = &layout {
        l.validate(c.min_distance)?;
    }
    Ok(HarnessConfig { scenario: c, layout })
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn opt_f64(obj: &Map<String, Value>, key: &str) -> Result<Option<f64>, ConfigError> {
    obj.get(key)
        .map(|v| v.as_f64().ok_or_else(|| ConfigError::ty(key, "a number")))
        .transpose()
}

fn opt_usize(obj: &Map<String, Value>, key: &str) -> Result<Option<usize>, ConfigError> {
    obj.get(key)
        .map(|v| {
            v.as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| ConfigError::ty(key, "a non-negative integer"))
        })
        .transpose()
}

/// Watts, or `"<x> dBm"`.
pub fn power(v: &Value, key: &str) -> Result<f64, ConfigError> {
    if let Some(x) = v.as_f64() {
        return Ok(x);
    }
    let s = v.as_str().ok_or_else(|| ConfigError::ty(key, "watts or a \"<x> dBm\" string"))?;
    let t = s.trim();
    let num = t
        .strip_suffix("dBm")
        .or_else(|| t.strip_suffix("dbm"))
        .ok_or_else(|| ConfigError::ty(key, "watts or a \"<x> dBm\" string"))?;
    let dbm: f64 = num
        .trim()
        .parse()
        .map_err(|_| ConfigError::ty(key, "watts or a \"<x> dBm\" string"))?;
    Ok(dbm_to_watts(dbm))
}

fn opt_power(obj: &Map<String, Value>, key: &str) -> Result<Option<f64>, ConfigError> {
    obj.get(key).map(|v| power(v, key)).transpose()
}

fn complex(v: &Value, key: &str) -> Result<Complex<f64>, ConfigError> {
    if let Some(x) = v.as_f64() {
        return Ok(Complex::new(x, 0.0));
    }
    let o = v.as_object().ok_or_else(|| ConfigError::ty(key, "a number or {\"re\", \"im\"}"))?;
    let part = |name: &str| -> Result<f64, ConfigError> {
        match o.get(name) {
            None => Ok(0.0),
            Some(x) => x.as_f64().ok_or_else(|| ConfigError::ty(&format!("{key}.{name}"), "a number")),
        }
    };
    if let Some(extra) = o.keys().find(|k| *k != "re" && *k != "im") {
        return Err(ConfigError::UnknownKey(format!("{key}.{extra}")));
    }
    Ok(Complex::new(part("re")?, part("im")?))
}

fn per_receiver<T: Clone>(
    v: &Value,
    key: &str,
    k: usize,
    item: impl Fn(&Value, &str) -> Result<T, ConfigError>,
) -> Result<Vec<T>, ConfigError> {
    match v.as_array() {
        Some(items) => {
            if items.len() != k {
                return Err(ConfigError::invalid(key, format!("{} entries for k = {k}", items.len())));
            }
            items.iter().enumerate().map(|(i, x)| item(x, &format!("{key}[{i}]"))).collect()
        }
        None => Ok(vec![item(v, key)?; k]),
    }
}

fn point(v: &Value, key: &str) -> Result<Point2<f64>, ConfigError> {
    let xy = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| ConfigError::ty(key, "an [x, y] pair"))?;
    let x = xy[0].as_f64().ok_or_else(|| ConfigError::ty(key, "an [x, y] pair"))?;
    let y = xy[1].as_f64().ok_or_else(|| ConfigError::ty(key, "an [x, y] pair"))?;
    Ok(Point2::new(x, y))
}

fn parse_layout(v: &Value) -> Result<LayoutSpec, ConfigError> {
    let o = v.as_object().ok_or_else(|| ConfigError::ty("layout", "an object"))?;
    for k in o.keys() {
        if !["p_b", "p_0", "receivers", "annulus"].contains(&k.as_str()) {
            return Err(ConfigError::UnknownKey(format!("layout.{k}")));
        }
    }
    let p_b = point(o.get("p_b").ok_or_else(|| ConfigError::MissingKey("layout.p_b".into()))?, "layout.p_b")?;
    let p_0 = point(o.get("p_0").ok_or_else(|| ConfigError::MissingKey("layout.p_0".into()))?, "layout.p_0")?;
    match (o.get("receivers"), o.get("annulus")) {
        (Some(_), Some(_)) => Err(ConfigError::invalid("layout", "give either `receivers` or `annulus`, not both")),
        (None, None) => Err(ConfigError::MissingKey("layout.receivers".into())),
        (Some(r), None) => {
            let items = r.as_array().ok_or_else(|| ConfigError::ty("layout.receivers", "a list of [x, y] pairs"))?;
            let p = items
                .iter()
                .enumerate()
                .map(|(i, q)| point(q, &format!("layout.receivers[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(LayoutSpec::Fixed(Layout { p_b, p_0, p }))
        }
        (None, Some(a)) => {
            let r = point(a, "layout.annulus")?;
            if !(r.x >= 0.0 && r.y > r.x && r.y.is_finite()) {
                return Err(ConfigError::invalid("layout.annulus", "need 0 <= r_min < r_max"));
            }
            Ok(LayoutSpec::Annulus { p_b, p_0, r_min: r.x, r_max: r.y })
        }
    }
}
