use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dilation::MIN_M0;
use crate::error::{Error, Result};
use crate::evolution::StepControl;
use crate::{CVector, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Fig2,
    Fig3,
    Fig4Sweep,
    Fig5,
    Fig6,
    NLevel,
    Impossibility,
    Custom,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 8] = [
        ScenarioKind::Fig2,
        ScenarioKind::Fig3,
        ScenarioKind::Fig4Sweep,
        ScenarioKind::Fig5,
        ScenarioKind::Fig6,
        ScenarioKind::NLevel,
        ScenarioKind::Impossibility,
        ScenarioKind::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Fig2 => "fig2",
            ScenarioKind::Fig3 => "fig3",
            ScenarioKind::Fig4Sweep => "fig4_sweep",
            ScenarioKind::Fig5 => "fig5",
            ScenarioKind::Fig6 => "fig6",
            ScenarioKind::NLevel => "n_level",
            ScenarioKind::Impossibility => "impossibility",
            ScenarioKind::Custom => "custom",
        }
    }

    /// Whether the scenario uses the switched coupling window `[t_i, t_f]`.
    pub fn is_switched(self) -> bool {
        !matches!(self, ScenarioKind::Fig4Sweep | ScenarioKind::Impossibility)
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config {
                field: "scenario".into(),
                message: format!("unknown scenario `{s}`"),
            })
    }
}

/// One experiment. Every field has a per-scenario default; see
/// [`ScenarioConfig::defaults`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub gamma: f64,
    pub t_i: f64,
    pub t_f: f64,
    /// `M(0) = m₀𝕀`; `null` means `1 + epsilon`.
    pub m0: Option<f64>,
    pub epsilon: f64,
    pub dt: f64,
    pub t_max: f64,
    pub record_every: usize,
    /// Complex amplitudes as `[re, im]` pairs, normalized on use. Empty means
    /// the uniform superposition.
    pub initial_state: Vec<[f64; 2]>,
    pub n_levels: usize,
    #[serde(rename = "lindblad_Gamma")]
    pub lindblad_gamma: f64,
    pub output_path: Option<PathBuf>,
    pub seed: u64,
    /// Coupling strengths of the speed sweep.
    pub gammas: Vec<f64>,
    /// Polar angle of the sweep's initial state on the Bloch sphere.
    pub polar_angle: f64,
    /// Fubini-Study distance to the target below which steps are dropped
    /// from the mean speed.
    pub speed_cutoff: f64,
    /// Diagonal of the Hermitian part for `custom`.
    pub h_h_diag: Vec<f64>,
    /// Diagonal of the switched measurement part for `custom`.
    pub h_m_diag: Vec<f64>,
}

impl ScenarioConfig {
    pub fn defaults(kind: ScenarioKind) -> Self {
        let plus = vec![[1.0, 0.0], [1.0, 0.0]];
        let base = Self {
            scenario: kind,
            gamma: 1.5,
            t_i: 3.0,
            t_f: 7.0,
            m0: None,
            epsilon: 5e-4,
            dt: 1e-3,
            t_max: 12.0,
            record_every: 10,
            initial_state: plus,
            n_levels: 2,
            lindblad_gamma: 0.3,
            output_path: None,
            seed: 0,
            gammas: vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
            polar_angle: std::f64::consts::PI - 0.01,
            speed_cutoff: 1e-3,
            h_h_diag: vec![1.0, -1.0],
            h_m_diag: vec![0.0, 1.0],
        };
        match kind {
            ScenarioKind::Fig2 | ScenarioKind::Fig3 | ScenarioKind::Custom => base,
            ScenarioKind::Fig4Sweep => Self {
                t_max: 40.0,
                record_every: 1,
                ..base
            },
            ScenarioKind::Fig5 => Self {
                m0: Some(1.0005),
                t_f: 9.0,
                ..base
            },
            ScenarioKind::Fig6 => Self {
                m0: Some(1.0005),
                t_f: 9.0,
                t_max: 30.0,
                initial_state: vec![[(2.0f64 / 3.0).sqrt(), 0.0], [(1.0f64 / 3.0).sqrt(), 0.0]],
                ..base
            },
            ScenarioKind::NLevel => Self {
                n_levels: 3,
                initial_state: Vec::new(),
                ..base
            },
            ScenarioKind::Impossibility => Self { t_max: 2.0, ..base },
        }
    }

    /// Builds a config from an optional JSON file and `key=value` overrides,
    /// layered over the scenario defaults. The scenario comes from the
    /// overrides, then the file.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                match serde_json::from_str::<Value>(&text) {
                    Ok(Value::Object(m)) => m,
                    Ok(_) => return Err(config_err("<file>", "top level must be an object")),
                    Err(e) => return Err(config_err("<file>", e.to_string())),
                }
            }
            None => Map::new(),
        };
        let mut layer = file;
        for o in overrides {
            let (k, v) = parse_override(o)?;
            layer.insert(k, v);
        }
        Self::from_layer(layer)
    }

    /// Applies the keys of `layer` over the defaults of the scenario it names.
    pub fn from_layer(layer: Map<String, Value>) -> Result<Self> {
        let kind: ScenarioKind = match layer.get("scenario") {
            Some(Value::String(s)) => s.parse()?,
            Some(other) => {
                return Err(config_err(
                    "scenario",
                    format!("expected a string, got {other}"),
                ))
            }
            None => return Err(config_err("scenario", "missing")),
        };
        Self::defaults(kind).with_layer(layer)
    }

    /// Returns a copy with `layer` applied. Unknown keys and ill-typed values
    /// are reported by field name.
    pub fn with_layer(&self, layer: Map<String, Value>) -> Result<Self> {
        let Value::Object(base) =
            serde_json::to_value(self).map_err(|e| config_err("<config>", e.to_string()))?
        else {
            unreachable!("config serializes to an object")
        };
        let mut merged = base.clone();
        for (k, v) in &layer {
            if !base.contains_key(k) {
                return Err(config_err(k, "unknown field"));
            }
            let mut probe = base.clone();
            probe.insert(k.clone(), v.clone());
            if let Err(e) = serde_json::from_value::<Self>(Value::Object(probe)) {
                return Err(config_err(k, e.to_string()));
            }
            merged.insert(k.clone(), v.clone());
        }
        let cfg: Self = serde_json::from_value(Value::Object(merged))
            .map_err(|e| config_err("<config>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `key=value` overrides.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        let mut layer = Map::new();
        for o in overrides {
            let (k, v) = parse_override(o)?;
            layer.insert(k, v);
        }
        self.with_layer(layer)
    }

    pub fn effective_m0(&self) -> f64 {
        self.m0.unwrap_or(1.0 + self.epsilon)
    }

    pub fn step_control(&self) -> Result<StepControl> {
        StepControl::new(self.dt, self.t_max, self.record_every)
    }

    /// System dimension implied by the scenario.
    pub fn n_sys(&self) -> usize {
        match self.scenario {
            ScenarioKind::NLevel => self.n_levels,
            ScenarioKind::Custom => self.h_h_diag.len(),
            _ => 2,
        }
    }

    /// Normalized initial system state.
    pub fn initial_vector(&self) -> Result<CVector> {
        let n = self.n_sys();
        let raw = if self.initial_state.is_empty() {
            CVector::from_vec(vec![C64::new(1.0, 0.0); n])
        } else {
            CVector::from_vec(
                self.initial_state
                    .iter()
                    .map(|&[re, im]| C64::new(re, im))
                    .collect(),
            )
        };
        raw.normalized()
            .map_err(|_| config_err("initial_state", "zero vector"))
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("gamma", self.gamma),
            ("t_i", self.t_i),
            ("t_f", self.t_f),
            ("epsilon", self.epsilon),
            ("dt", self.dt),
            ("t_max", self.t_max),
            ("lindblad_Gamma", self.lindblad_gamma),
            ("polar_angle", self.polar_angle),
            ("speed_cutoff", self.speed_cutoff),
        ];
        if let Some((f, v)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return Err(config_err(*f, format!("must be finite, got {v}")));
        }
        if self.dt <= 0.0 {
            return Err(config_err(
                "dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        if self.t_max < self.dt {
            return Err(config_err(
                "t_max",
                format!("must be at least dt, got {}", self.t_max),
            ));
        }
        if self.record_every == 0 {
            return Err(config_err("record_every", "must be at least 1"));
        }
        if self.gamma < 0.0 {
            return Err(config_err(
                "gamma",
                format!("must be non-negative, got {}", self.gamma),
            ));
        }
        if self.epsilon <= 0.0 {
            return Err(config_err(
                "epsilon",
                format!("must be positive, got {}", self.epsilon),
            ));
        }
        let m0 = self.effective_m0();
        if !(m0 >= MIN_M0) {
            let field = if self.m0.is_some() { "m0" } else { "epsilon" };
            return Err(config_err(field, format!("m0 = {m0} is below {MIN_M0}")));
        }
        if self.scenario.is_switched() {
            if !(self.t_i < self.t_f) {
                return Err(config_err(
                    "t_i",
                    format!("must be below t_f = {}", self.t_f),
                ));
            }
            if !(self.t_f < self.t_max) {
                return Err(config_err(
                    "t_f",
                    format!("must be below t_max = {}", self.t_max),
                ));
            }
        }
        if self.lindblad_gamma < 0.0 {
            return Err(config_err("lindblad_Gamma", "must be non-negative"));
        }
        match self.scenario {
            ScenarioKind::NLevel if self.n_levels < 2 => {
                return Err(config_err(
                    "n_levels",
                    format!("must be at least 2, got {}", self.n_levels),
                ));
            }
            ScenarioKind::Fig4Sweep => {
                if self.gammas.len() < 2 || self.gammas.iter().any(|g| !(g.is_finite() && *g > 0.0))
                {
                    return Err(config_err("gammas", "needs at least two positive values"));
                }
                if !(0.0..=std::f64::consts::PI).contains(&self.polar_angle) {
                    return Err(config_err("polar_angle", "must lie in [0, π]"));
                }
                if self.speed_cutoff <= 0.0 {
                    return Err(config_err("speed_cutoff", "must be positive"));
                }
            }
            ScenarioKind::Custom => {
                if self.h_h_diag.len() < 2 || self.h_h_diag.len() != self.h_m_diag.len() {
                    return Err(config_err(
                        "h_m_diag",
                        "needs the same length as h_h_diag, at least 2",
                    ));
                }
                if self
                    .h_h_diag
                    .iter()
                    .chain(&self.h_m_diag)
                    .any(|v| !v.is_finite())
                {
                    return Err(config_err("h_h_diag", "entries must be finite"));
                }
            }
            _ => {}
        }
        if !self.initial_state.is_empty() {
            if self.initial_state.len() != self.n_sys() {
                return Err(config_err(
                    "initial_state",
                    format!(
                        "has {} amplitudes, the system has {} levels",
                        self.initial_state.len(),
                        self.n_sys()
                    ),
                ));
            }
            self.initial_vector()?;
        }
        Ok(())
    }
}

fn config_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

/// `key=value`, where the value is JSON if it parses and a string otherwise.
pub fn parse_override(s: &str) -> Result<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| config_err(s, "override must look like key=value"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(config_err(s, "empty key"));
    }
    let v = v.trim();
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.to_string(), value))
}
