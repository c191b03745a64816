//! The JSON system definition read by every command.

use envelope_core::filtration::{Exhaustion, LevelParams, Schedule};
use envelope_core::{GeneratedMap, MapError, PrefixMap, PrefixRule, Word, ZPartialAction};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDefinition {
    pub name: String,
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default)]
    pub defaults: Defaults,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeneratorSpec {
    Odometer,
    Rules { rules: Vec<(String, String)>, exhausts: Exhausts },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exhausts {
    /// The list enumerates a map with open domain; queries go through
    /// truncation levels.
    Open,
    /// The list is the whole clopen generator.
    Clopen,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    /// Rules making up `U_k`, per level `k`.
    #[serde(default)]
    pub rule_counts: Option<Vec<usize>>,
    /// Explicit `(k, n, d)` per diagram level.
    #[serde(default)]
    pub levels: Option<Vec<LevelParams>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    pub bound: Option<i64>,
    pub depth: Option<usize>,
    pub level: Option<usize>,
}

/// A parsed and validated system.
#[derive(Debug)]
pub struct System {
    pub name: String,
    pub action: ZPartialAction,
    pub exhaustion: Exhaustion,
    pub schedule: Schedule,
    pub defaults: Defaults,
}

#[derive(Debug, thiserror::Error)]
pub enum SystemError {
    #[error("{line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid rules: {0}")]
    Invalid(#[from] MapError),
    #[error("invalid schedule: {0}")]
    Schedule(String),
}

fn word(s: &str) -> Result<Word, SystemError> {
    s.parse().map_err(|e| SystemError::Parse { line: 0, column: 0, message: format!("rule word {s:?}: {e}") })
}

impl System {
    pub fn parse(text: &str) -> Result<Self, SystemError> {
        let def: SystemDefinition = serde_json::from_str(text).map_err(|e| SystemError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_definition(def)
    }

    pub fn from_definition(def: SystemDefinition) -> Result<Self, SystemError> {
        let generated = match &def.generator {
            GeneratorSpec::Odometer => GeneratedMap::odometer(),
            GeneratorSpec::Rules { rules, .. } => {
                let rules = rules
                    .iter()
                    .map(|(u, v)| Ok(PrefixRule::new(word(u)?, word(v)?)))
                    .collect::<Result<Vec<_>, SystemError>>()?;
                GeneratedMap::explicit(rules)?
            }
        };
        let action = match &def.generator {
            GeneratorSpec::Rules { exhausts: Exhausts::Clopen, .. } => {
                let all = generated.rule_count().unwrap_or(0);
                let rules = (0..all).filter_map(|i| generated.rule(i)).collect();
                ZPartialAction::from_map(PrefixMap::new(rules)?)
            }
            _ => ZPartialAction::from_generated(generated.clone()),
        };
        let spec = def.schedule.clone().unwrap_or_default();
        let exhaustion = match spec.rule_counts {
            Some(counts) => {
                Exhaustion::with_counts(generated, counts).map_err(|e| SystemError::Schedule(e.to_string()))?
            }
            None => Exhaustion::new(generated),
        };
        let schedule = match spec.levels {
            Some(levels) => Schedule::Explicit(levels),
            None => Schedule::Default,
        };
        Ok(System { name: def.name, action, exhaustion, schedule, defaults: def.defaults })
    }

    /// The truncation level used for queries on generated maps.
    pub fn level(&self, flag: Option<usize>) -> Option<usize> {
        if self.action.is_clopen() {
            None
        } else {
            Some(flag.or(self.defaults.level).unwrap_or(crate::DEFAULT_LEVEL))
        }
    }
}
