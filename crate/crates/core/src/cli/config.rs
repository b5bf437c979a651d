//! Rule configuration files (JSON or TOML).

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::domain::{AlternativeDomain, ExtremeProfile, VoterId, Weights};
use crate::phantoms::{CurveKind, GradingCurve, PhantomFunction};
use crate::welfare::l1_optimal_curve;

/// Alternative interval `[m, M]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub m: f64,
    #[serde(rename = "M")]
    pub upper: f64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self { m: 0.0, upper: 1.0 }
    }
}

impl DomainConfig {
    pub fn domain(&self) -> Result<AlternativeDomain, CliError> {
        Ok(AlternativeDomain::new(self.m, self.upper)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveConfig {
    Linear,
    Step {
        threshold: f64,
        low: f64,
        high: f64,
    },
    Piecewise {
        knots: Vec<(f64, f64)>,
    },
    ClosedFormUniform {
        q: f64,
    },
    /// Optimal curve for `q = 1`: a step at one half taking `alpha_even` there.
    L1Optimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleSpec {
    /// Explicit phantom values keyed by extreme profile, e.g. `"TB"`.
    Table {
        n: usize,
        values: BTreeMap<String, f64>,
    },
    Curve {
        curve: CurveConfig,
    },
    Constant {
        value: f64,
    },
    Dictator {
        voter: String,
    },
    OrderStatistic {
        k: usize,
    },
}

/// Inline weights or a path to a file of comma- or newline-separated weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsSource {
    Inline(Vec<f64>),
    Path(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    #[serde(default)]
    pub domain: DomainConfig,
    pub rule: RuleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightsSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_even: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empty_electorate_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_threshold: Option<f64>,
}

fn parse_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Parse(format!("{}: {e}", path.display()))
}

impl RuleConfig {
    /// Reads JSON or TOML, chosen by extension (JSON first when unknown).
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| parse_error(path, e))?;
        let is_toml = path.extension().is_some_and(|e| e == "toml");
        let mut cfg: Self = if is_toml {
            toml::from_str(&text).map_err(|e| parse_error(path, e))?
        } else {
            match serde_json::from_str(&text) {
                Ok(c) => c,
                Err(json) if path.extension().is_some_and(|e| e == "json") => return Err(parse_error(path, json)),
                Err(json) => toml::from_str(&text).map_err(|toml| parse_error(path, format!("{json}; as TOML: {toml}")))?,
            }
        };
        if let Some(WeightsSource::Path(p)) = &cfg.weights {
            let p = if p.is_relative() {
                path.parent().unwrap_or(Path::new(".")).join(p)
            } else {
                p.clone()
            };
            cfg.weights = Some(WeightsSource::Inline(read_weights(&p)?));
        }
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }

    pub fn domain(&self) -> Result<AlternativeDomain, CliError> {
        self.domain.domain()
    }

    pub fn inline_weights(&self) -> Result<Option<Weights>, CliError> {
        match &self.weights {
            None => Ok(None),
            Some(WeightsSource::Inline(w)) => Ok(Some(Weights::new(w.clone())?)),
            Some(WeightsSource::Path(p)) => Ok(Some(Weights::new(read_weights(p)?)?)),
        }
    }

    pub fn curve(&self, c: &CurveConfig) -> Result<GradingCurve, CliError> {
        let d = self.domain()?;
        Ok(match c {
            CurveConfig::Linear => GradingCurve::linear(d),
            CurveConfig::Step { threshold, low, high } => GradingCurve::step(d, *threshold, *low, *high, self.at_threshold)?,
            CurveConfig::Piecewise { knots } => GradingCurve::piecewise(d, knots.clone())?,
            CurveConfig::ClosedFormUniform { q } => GradingCurve::closed_form_uniform(d, *q)?,
            CurveConfig::L1Optimal => l1_optimal_curve(d, self.alpha_even.unwrap_or(d.midpoint()))?,
        })
    }

    /// Phantom function for an electorate whose voters are `voters`, in
    /// order; `weights` from the ballot file apply when the config has none.
    pub fn phantom(&self, voters: &[VoterId], ballot_weights: Option<Weights>) -> Result<PhantomFunction, CliError> {
        let d = self.domain()?;
        let alpha = match &self.rule {
            RuleSpec::Table { n, values } => {
                let entries = values
                    .iter()
                    .map(|(k, v)| {
                        let x: ExtremeProfile = k.parse().map_err(CliError::Parse)?;
                        Ok((x, *v))
                    })
                    .collect::<Result<HashMap<_, _>, CliError>>()?;
                PhantomFunction::table_from_map(d, *n, &entries)?
            }
            RuleSpec::Curve { curve } => {
                let g = self.curve(curve)?;
                let weights = match self.inline_weights()? {
                    Some(w) => Some(w),
                    None => ballot_weights,
                };
                match weights {
                    Some(w) => PhantomFunction::weighted_curve(g, w)?,
                    None => PhantomFunction::curve(g),
                }
            }
            RuleSpec::Constant { value } => PhantomFunction::constant(d, *value)?,
            RuleSpec::Dictator { voter } => {
                let id = VoterId(voter.clone());
                let i = voters
                    .iter()
                    .position(|v| *v == id)
                    .ok_or_else(|| CliError::Parse(format!("dictator `{voter}` is not among the voters")))?;
                PhantomFunction::dictator(d, i)
            }
            RuleSpec::OrderStatistic { k } => PhantomFunction::order_statistic(d, *k)?,
        };
        match self.empty_electorate_value {
            Some(x) if matches!(self.rule, RuleSpec::Curve { .. }) => Ok(alpha.with_empty_value(x)?),
            Some(_) => Err(CliError::Parse(
                "empty_electorate_value applies only to curve rules".into(),
            )),
            None => Ok(alpha),
        }
    }

    /// Config for a curve rule with inline weights.
    pub fn for_curve(curve: &GradingCurve, weights: Option<&Weights>) -> Result<Self, CliError> {
        let d = curve.domain();
        let spec = match curve.kind() {
            CurveKind::Linear => CurveConfig::Linear,
            CurveKind::Step {
                threshold, low, high, ..
            } => CurveConfig::Step {
                threshold: *threshold,
                low: *low,
                high: *high,
            },
            CurveKind::Piecewise { knots } => CurveConfig::Piecewise { knots: knots.clone() },
            CurveKind::ClosedFormUniform { q } => CurveConfig::ClosedFormUniform { q: *q },
            CurveKind::Numeric(n) => {
                let steps = n.knots().len() - 1;
                CurveConfig::Piecewise {
                    knots: n
                        .knots()
                        .iter()
                        .enumerate()
                        .map(|(k, &v)| (k as f64 / steps as f64, v))
                        .collect(),
                }
            }
        };
        let at_threshold = match curve.kind() {
            CurveKind::Step { at_threshold, .. } => Some(*at_threshold),
            _ => None,
        };
        Ok(Self {
            domain: DomainConfig {
                m: d.mu_minus(),
                upper: d.mu_plus(),
            },
            rule: RuleSpec::Curve { curve: spec },
            weights: weights.map(|w| WeightsSource::Inline(w.values().to_vec())),
            alpha_even: None,
            empty_electorate_value: None,
            at_threshold,
        })
    }
}

/// Comma- or whitespace-separated decimals.
pub fn parse_weight_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Parse(format!("`{s}` is not a decimal weight")))
        })
        .collect()
}

fn read_weights(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| parse_error(path, e))?;
    parse_weight_list(&text).map_err(|e| parse_error(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let text = r#"{
            "domain": {"m": 0, "M": 1},
            "rule": {"kind": "curve", "curve": {"kind": "step", "threshold": 0.6, "low": 0, "high": 1}},
            "at_threshold": 1.0,
            "empty_electorate_value": 0.4
        }"#;
        let cfg = RuleConfig::from_json(text).unwrap();
        assert_eq!(RuleConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        let toml_text = toml::to_string(&cfg).unwrap();
        assert_eq!(toml::from_str::<RuleConfig>(&toml_text).unwrap(), cfg);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"rule": {"kind": "constant", "value": 0.5}, "colour": "red"}"#;
        assert!(RuleConfig::from_json(text).is_err());
        let text = r#"{"rule": {"kind": "constant", "value": 0.5, "extra": 1}}"#;
        assert!(RuleConfig::from_json(text).is_err());
    }

    #[test]
    fn dictator_resolves_voter_ids() {
        let cfg = RuleConfig::from_json(r#"{"rule": {"kind": "dictator", "voter": "b"}}"#).unwrap();
        let voters = [VoterId::from("a"), VoterId::from("b")];
        let alpha = cfg.phantom(&voters, None).unwrap();
        assert!(matches!(alpha.kind(), crate::phantoms::PhantomKind::Dictator(1)));
        assert!(cfg.phantom(&voters[..1], None).is_err());
    }

    #[test]
    fn tables_from_strings() {
        let cfg = RuleConfig::from_json(
            r#"{"rule": {"kind": "table", "n": 2, "values": {"BB": 0, "TB": 0.5, "BT": 0.5, "TT": 1}}}"#,
        )
        .unwrap();
        assert!(cfg.phantom(&[], None).is_ok());
        let missing = RuleConfig::from_json(r#"{"rule": {"kind": "table", "n": 2, "values": {"BB": 0}}}"#).unwrap();
        assert!(missing.phantom(&[], None).is_err());
    }

    #[test]
    fn weights_lists() {
        assert_eq!(parse_weight_list("2, 1\n3").unwrap(), vec![2.0, 1.0, 3.0]);
        assert!(parse_weight_list("2,x").is_err());
    }
}
