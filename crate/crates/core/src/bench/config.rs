//! Plain-text `key = value` configuration with `[section]` headers, used to
//! describe custom benchmark scenarios.
//!
//! ```text
//! [scenario]
//! name = custom
//! # ground-truth sampling
//! truth-scale = 0.5 2.0
//! truth-translation-norm = 0 4
//! # initialization offsets
//! delta-scale = 0 0.3
//! delta-theta = -0.349 0.349
//! delta-psi = -0.0873 0.0873
//! delta-rho = -0.0873 0.0873
//! delta-translation-norm = 0 0.15
//! code-sigma = 0.01
//!
//! [run]
//! shapes = 5
//! trials = 10
//! seed = 7
//! ```

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::{Range, ScenarioConfig};

pub type ConfigMap = BTreeMap<String, BTreeMap<String, String>>;

/// Parses section headers, `key = value` lines, blank lines, and `#` comments.
pub fn parse_config(text: &str) -> Result<ConfigMap> {
    let mut map = ConfigMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| {
                Error::parse("<config>", lineno + 1, "unterminated section header")
            })?;
            section = name.trim().to_string();
            map.entry(section.clone()).or_default();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::parse("<config>", lineno + 1, format!("expected key = value, got {line:?}"))
        })?;
        map.entry(section.clone())
            .or_default()
            .insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_range(value: &str, key: &str) -> Result<Range> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    let bad = |msg: String| Error::InvalidParameter(format!("config key {key}: {msg}"));
    match parts.as_slice() {
        [single] => {
            let v: f64 = single.parse().map_err(|e| bad(format!("{e}")))?;
            Ok(Range::point(v))
        }
        [lo, hi] => {
            let lo: f64 = lo.parse().map_err(|e| bad(format!("{e}")))?;
            let hi: f64 = hi.parse().map_err(|e| bad(format!("{e}")))?;
            if lo > hi {
                return Err(bad(format!("bounds out of order: {lo} {hi}")));
            }
            Ok(Range::new(lo, hi))
        }
        _ => Err(bad("expected one or two numbers".into())),
    }
}

/// Builds a scenario from a parsed config, starting from the known-axis
/// defaults and overriding whatever keys are present.
pub fn scenario_from_config(map: &ConfigMap) -> Result<ScenarioConfig> {
    let mut sc = ScenarioConfig::known_axis();
    if let Some(section) = map.get("scenario") {
        for (key, value) in section {
            match key.as_str() {
                "name" => sc.name = value.clone(),
                "truth-scale" => sc.truth_scale = parse_range(value, key)?,
                "truth-angles" => sc.truth_angles = parse_range(value, key)?,
                "truth-translation-norm" => {
                    sc.truth_translation_norm = parse_range(value, key)?
                }
                "truth-code" => sc.truth_code = parse_range(value, key)?,
                "delta-scale" => sc.delta_scale = parse_range(value, key)?,
                "delta-psi" => sc.delta_psi = Some(parse_range(value, key)?),
                "delta-rho" => sc.delta_rho = Some(parse_range(value, key)?),
                "delta-theta" => sc.delta_theta = parse_range(value, key)?,
                "delta-translation-norm" => {
                    sc.delta_translation_norm = parse_range(value, key)?
                }
                "code-sigma" => {
                    sc.code_sigma = value
                        .parse()
                        .map_err(|e| Error::InvalidParameter(format!("code-sigma: {e}")))?
                }
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown scenario key {other:?}"
                    )))
                }
            }
        }
    }
    if let Some(section) = map.get("run") {
        for (key, value) in section {
            let parse_usize = |v: &str| -> Result<usize> {
                v.parse().map_err(|e| Error::InvalidParameter(format!("{key}: {e}")))
            };
            match key.as_str() {
                "shapes" => sc.shapes = parse_usize(value)?,
                "trials" => sc.trials = parse_usize(value)?,
                "seed" => {
                    sc.seed = value
                        .parse()
                        .map_err(|e| Error::InvalidParameter(format!("seed: {e}")))?
                }
                other => {
                    return Err(Error::InvalidParameter(format!("unknown run key {other:?}")))
                }
            }
        }
    }
    Ok(sc)
}
