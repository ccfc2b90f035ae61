//! Line-oriented configuration parsing.
//!
//! Grammar: `section.key = value`, one per line, `#` starts a comment,
//! keys are case-sensitive, duplicate keys are last-wins with a warning.
//! Unknown keys, malformed values and out-of-range values are reported
//! with their line number; the first error wins.
//!
//! Sections: `mode.*` (symmetric shortcut applied to signal and idler),
//! `mode_a.* / mode_b.* / mode_c.*` (per-mode overrides), `pump.*`,
//! `detuning.theta`, `sweep.* / axis1.* / axis2.*`, and `limits.*` for
//! the convergence study.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::highq::LimitStudy;
use crate::params::{ModeLabel, ModeParams, Process, PumpConfig, SystemConfig};

/// How the pump strength was specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PumpSpec {
    /// Dimensionless r = |g·α_p|·T_a directly (`pump.r`).
    Dimensionless(f64),
    /// Physical gain and amplitude (`pump.g`, `pump.alpha_p`).
    GainAmplitude { gain: f64, amplitude: f64 },
    /// The rate product |g·α_p| (`pump.g_alpha_p`), amplitude 1.
    RateProduct(f64),
}

/// Fully resolved base parameters; swept quantities may still be unset.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Self-couplings for (signal, idler, pump ring).
    pub rho: [Option<f64>; 3],
    /// Internal transmissions for (signal, idler, pump ring).
    pub alpha: [Option<f64>; 3],
    /// Round-trip times for (signal, idler, pump ring).
    pub t: [f64; 3],
    pub process: Process,
    pub theta_p: f64,
    pub pump: Option<PumpSpec>,
    /// Detuning θ = ω·T_a; `None` while swept.
    pub detuning_theta: Option<f64>,
}

impl Scenario {
    /// Materialize a [`SystemConfig`]; errors name the first missing key.
    pub fn system(&self) -> Result<SystemConfig> {
        let need = |value: Option<f64>, key: &str| {
            value.ok_or_else(|| Error::validation(format!("missing required key {key}")))
        };
        let rho_a = need(self.rho[0], "mode.rho")?;
        let rho_b = need(self.rho[1], "mode.rho")?;
        let rho_c = self.rho[2].unwrap_or(rho_a);
        let alpha_a = need(self.alpha[0], "mode.alpha")?;
        let alpha_b = need(self.alpha[1], "mode.alpha")?;
        let alpha_c = self.alpha[2].unwrap_or(1.0);

        let (gain, amplitude) = match self.pump {
            Some(PumpSpec::Dimensionless(r)) => (r / self.t[0], 1.0),
            Some(PumpSpec::GainAmplitude { gain, amplitude }) => (gain, amplitude),
            Some(PumpSpec::RateProduct(p)) => (p, 1.0),
            None => return Err(Error::validation(
                "missing pump specification: set pump.r, pump.g with pump.alpha_p, or pump.g_alpha_p",
            )),
        };
        let pump = PumpConfig::new(self.process, gain, amplitude, self.theta_p)?;
        SystemConfig::new(
            ModeParams::from_couplings(ModeLabel::Signal, rho_a, alpha_a, self.t[0])?,
            ModeParams::from_couplings(ModeLabel::Idler, rho_b, alpha_b, self.t[1])?,
            ModeParams::from_couplings(ModeLabel::Pump, rho_c, alpha_c, self.t[2])?,
            pump,
        )
    }

    /// Detuning as an angular frequency: ω = θ/T_a.
    pub fn omega(&self) -> Result<f64> {
        let theta = self
            .detuning_theta
            .ok_or_else(|| Error::validation("missing required key detuning.theta"))?;
        Ok(theta / self.t[0])
    }
}

/// Parameter a sweep axis varies. Names are case-sensitive config values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Rho,
    Alpha,
    Theta,
    R,
    GammaT,
    GammaIntT,
}

impl SweepParam {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "rho" => SweepParam::Rho,
            "alpha" => SweepParam::Alpha,
            "theta" => SweepParam::Theta,
            "r" => SweepParam::R,
            "gamma_T" => SweepParam::GammaT,
            "gamma_int_T" => SweepParam::GammaIntT,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::Rho => "rho",
            SweepParam::Alpha => "alpha",
            SweepParam::Theta => "theta",
            SweepParam::R => "r",
            SweepParam::GammaT => "gamma_T",
            SweepParam::GammaIntT => "gamma_int_T",
        }
    }

    /// Both axes must not drive the same underlying parameter.
    fn target(&self) -> &'static str {
        match self {
            SweepParam::Rho | SweepParam::GammaT => "rho",
            SweepParam::Alpha | SweepParam::GammaIntT => "alpha",
            SweepParam::Theta => "theta",
            SweepParam::R => "r",
        }
    }
}

/// Apply an axis value onto a scenario copy. Coupling-type axes act on
/// signal, idler and pump ring together (the sweep grid is symmetric in
/// the mode parameters by construction).
pub fn apply_axis(base: &Scenario, param: SweepParam, value: f64) -> Scenario {
    let mut s = base.clone();
    match param {
        SweepParam::Rho => s.rho = [Some(value); 3],
        SweepParam::Alpha => s.alpha = [Some(value); 3],
        SweepParam::GammaT => s.rho = [Some((-value / 2.0).exp()); 3],
        SweepParam::GammaIntT => s.alpha = [Some((-value / 2.0).exp()); 3],
        SweepParam::Theta => s.detuning_theta = Some(value),
        SweepParam::R => s.pump = Some(PumpSpec::Dimensionless(value)),
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl SweepAxis {
    /// Grid coordinate `i` of `count`, endpoints inclusive.
    pub fn value(&self, i: usize) -> f64 {
        let frac = i as f64 / (self.count - 1) as f64;
        match self.spacing {
            Spacing::Linear => self.min + (self.max - self.min) * frac,
            Spacing::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * frac).exp(),
        }
    }
}

/// What a sweep computes at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    PairRateMrr,
    PairRateOut,
    CarMrr,
    CarOut,
    HeraldMrr,
    HeraldOut,
    Populations,
    TransferEntry,
    Commutators,
    LimitReport,
}

impl Quantity {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "pair_rate_mrr" => Quantity::PairRateMrr,
            "pair_rate_out" => Quantity::PairRateOut,
            "car_mrr" => Quantity::CarMrr,
            "car_out" => Quantity::CarOut,
            "herald_mrr" => Quantity::HeraldMrr,
            "herald_out" => Quantity::HeraldOut,
            "populations" => Quantity::Populations,
            "transfer_entry" => Quantity::TransferEntry,
            "commutators" => Quantity::Commutators,
            "limit_report" => Quantity::LimitReport,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::PairRateMrr => "pair_rate_mrr",
            Quantity::PairRateOut => "pair_rate_out",
            Quantity::CarMrr => "car_mrr",
            Quantity::CarOut => "car_out",
            Quantity::HeraldMrr => "herald_mrr",
            Quantity::HeraldOut => "herald_out",
            Quantity::Populations => "populations",
            Quantity::TransferEntry => "transfer_entry",
            Quantity::Commutators => "commutators",
            Quantity::LimitReport => "limit_report",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub quantity: Quantity,
    pub axes: Vec<SweepAxis>,
    pub symmetric: bool,
}

/// A parsed configuration document.
#[derive(Debug, Clone)]
pub struct ParsedConfig {
    pub scenario: Scenario,
    pub sweep: Option<SweepSpec>,
    pub limits: Option<LimitStudy>,
    pub warnings: Vec<String>,
    /// Canonical resolved `key = value` pairs, sorted; the hashing input.
    pub echo: Vec<(String, String)>,
}

const KNOWN_KEYS: &[&str] = &[
    "mode.rho", "mode.alpha", "mode.t", "mode.gamma", "mode.gamma_int",
    "mode_a.rho", "mode_a.alpha", "mode_a.t", "mode_a.gamma", "mode_a.gamma_int",
    "mode_b.rho", "mode_b.alpha", "mode_b.t", "mode_b.gamma", "mode_b.gamma_int",
    "mode_c.rho", "mode_c.alpha", "mode_c.t",
    "pump.process", "pump.r", "pump.g", "pump.alpha_p", "pump.g_alpha_p", "pump.theta_p",
    "detuning.theta",
    "sweep.quantity", "sweep.symmetric",
    "axis1.name", "axis1.min", "axis1.max", "axis1.count", "axis1.spacing",
    "axis2.name", "axis2.min", "axis2.max", "axis2.count", "axis2.spacing",
    "limits.gamma", "limits.gamma_int", "limits.g_alpha_p", "limits.omega",
    "limits.theta_p", "limits.t_start", "limits.points",
];

struct Entries {
    map: BTreeMap<String, (String, usize)>,
    warnings: Vec<String>,
}

impl Entries {
    fn get(&self, key: &str) -> Option<&(String, usize)> {
        self.map.get(key)
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some((raw, line)) => raw.parse::<f64>().map(Some).map_err(|_| Error::Parse {
                line: *line,
                message: format!("key {key}: expected a number, got '{raw}'"),
            }),
        }
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some((raw, line)) => raw.parse::<usize>().map(Some).map_err(|_| Error::Parse {
                line: *line,
                message: format!("key {key}: expected a non-negative integer, got '{raw}'"),
            }),
        }
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        match self.get(key) {
            None => Ok(None),
            Some((raw, line)) => match raw.as_str() {
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                _ => Err(Error::Parse {
                    line: *line,
                    message: format!("key {key}: expected true or false, got '{raw}'"),
                }),
            },
        }
    }

    fn range_checked(&self, key: &str, lo: f64, hi: f64) -> Result<Option<f64>> {
        match self.f64(key)? {
            None => Ok(None),
            Some(v) if (lo..=hi).contains(&v) => Ok(Some(v)),
            Some(v) => {
                let line = self.get(key).map(|e| e.1).unwrap_or(0);
                Err(Error::Parse {
                    line,
                    message: format!("key {key}: value {v} outside [{lo}, {hi}]"),
                })
            }
        }
    }
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut map = BTreeMap::new();
    let mut warnings = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(Error::Parse {
            line: line_no,
            message: format!("expected 'section.key = value', got '{line}'"),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("unknown key '{key}'"),
            });
        }
        if value.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("key {key}: empty value"),
            });
        }
        if let Some((previous, previous_line)) = map.insert(key.clone(), (value, line_no)) {
            warnings.push(format!(
                "duplicate key {key} (line {previous_line} value '{previous}' overridden by line {line_no})"
            ));
        }
    }
    Ok(Entries { map, warnings })
}

/// Resolve one mode's (rho, alpha, t) from the symmetric shortcut plus any
/// per-mode override; `suffix` is "a", "b" or "c".
fn resolve_mode(entries: &Entries, suffix: &str) -> Result<(Option<f64>, Option<f64>, f64)> {
    let scoped = |key: &str| format!("mode_{suffix}.{key}");
    let pick = |key: &str| -> Vec<String> {
        let mut keys = Vec::new();
        if entries.has(&scoped(key)) {
            keys.push(scoped(key));
        } else if entries.has(&format!("mode.{key}")) {
            keys.push(format!("mode.{key}"));
        }
        keys
    };

    let t_key = pick("t");
    let t = match t_key.first() {
        Some(key) => {
            let v = entries.f64(key)?.unwrap();
            if !v.is_finite() || v <= 0.0 {
                let line = entries.get(key).map(|e| e.1).unwrap_or(0);
                return Err(Error::Parse {
                    line,
                    message: format!("key {key}: round-trip time must be positive, got {v}"),
                });
            }
            v
        }
        None => 1.0,
    };

    let rho_keys = pick("rho");
    let gamma_keys = pick("gamma");
    if let (Some(rk), Some(gk)) = (rho_keys.first(), gamma_keys.first()) {
        let line = entries.get(gk).map(|e| e.1).unwrap_or(0);
        return Err(Error::Parse {
            line,
            message: format!("conflicting keys {rk} and {gk}: give rho or gamma, not both"),
        });
    }
    let rho = if let Some(key) = rho_keys.first() {
        entries.range_checked(key, 0.0, 1.0)?
    } else if let Some(key) = gamma_keys.first() {
        let gamma = entries.f64(key)?.unwrap();
        if gamma < 0.0 {
            let line = entries.get(key).map(|e| e.1).unwrap_or(0);
            return Err(Error::Parse {
                line,
                message: format!("key {key}: rate must be non-negative, got {gamma}"),
            });
        }
        Some((-gamma * t / 2.0).exp())
    } else {
        None
    };

    let alpha_keys = pick("alpha");
    let gamma_int_keys = pick("gamma_int");
    if let (Some(ak), Some(gk)) = (alpha_keys.first(), gamma_int_keys.first()) {
        let line = entries.get(gk).map(|e| e.1).unwrap_or(0);
        return Err(Error::Parse {
            line,
            message: format!("conflicting keys {ak} and {gk}: give alpha or gamma_int, not both"),
        });
    }
    let alpha = if let Some(key) = alpha_keys.first() {
        entries.range_checked(key, 0.0, 1.0)?
    } else if let Some(key) = gamma_int_keys.first() {
        let gamma_int = entries.f64(key)?.unwrap();
        if gamma_int < 0.0 {
            let line = entries.get(key).map(|e| e.1).unwrap_or(0);
            return Err(Error::Parse {
                line,
                message: format!("key {key}: rate must be non-negative, got {gamma_int}"),
            });
        }
        Some((-gamma_int * t / 2.0).exp())
    } else {
        None
    };

    Ok((rho, alpha, t))
}

fn parse_axis(entries: &Entries, section: &str) -> Result<Option<SweepAxis>> {
    let key = |k: &str| format!("{section}.{k}");
    if !entries.has(&key("name")) {
        for k in ["min", "max", "count", "spacing"] {
            if entries.has(&key(k)) {
                let line = entries.get(&key(k)).map(|e| e.1).unwrap_or(0);
                return Err(Error::Parse {
                    line,
                    message: format!("key {section}.{k} given without {section}.name"),
                });
            }
        }
        return Ok(None);
    }
    let (name_raw, name_line) = entries.get(&key("name")).unwrap().clone();
    let param = SweepParam::parse(&name_raw).ok_or(Error::Parse {
        line: name_line,
        message: format!(
            "key {section}.name: unknown parameter '{name_raw}' (expected rho, alpha, theta, r, gamma_T or gamma_int_T)"
        ),
    })?;
    let require = |k: &str| -> Result<f64> {
        entries.f64(&key(k))?.ok_or_else(|| {
            Error::validation(format!("missing required key {section}.{k}"))
        })
    };
    let min = require("min")?;
    let max = require("max")?;
    let count = entries.usize(&key("count"))?.ok_or_else(|| {
        Error::validation(format!("missing required key {section}.count"))
    })?;
    let spacing = match entries.get(&key("spacing")) {
        None => Spacing::Linear,
        Some((raw, line)) => match raw.as_str() {
            "linear" => Spacing::Linear,
            "log" => Spacing::Log,
            _ => {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("key {section}.spacing: expected linear or log, got '{raw}'"),
                })
            }
        },
    };
    if min >= max {
        let line = entries.get(&key("min")).map(|e| e.1).unwrap_or(0);
        return Err(Error::Parse {
            line,
            message: format!("key {section}.min: need min < max, got [{min}, {max}]"),
        });
    }
    if count < 2 {
        let line = entries.get(&key("count")).map(|e| e.1).unwrap_or(0);
        return Err(Error::Parse {
            line,
            message: format!("key {section}.count: need at least 2 points, got {count}"),
        });
    }
    if spacing == Spacing::Log && min <= 0.0 {
        let line = entries.get(&key("min")).map(|e| e.1).unwrap_or(0);
        return Err(Error::Parse {
            line,
            message: format!("key {section}.min: log spacing needs min > 0, got {min}"),
        });
    }
    let range_ok = match param {
        SweepParam::Rho | SweepParam::Alpha => min >= 0.0 && max <= 1.0,
        SweepParam::R | SweepParam::GammaT | SweepParam::GammaIntT => min >= 0.0,
        SweepParam::Theta => true,
    };
    if !range_ok {
        let line = entries.get(&key("min")).map(|e| e.1).unwrap_or(0);
        return Err(Error::Parse {
            line,
            message: format!(
                "key {section}.min/max: range [{min}, {max}] invalid for parameter {}",
                param.as_str()
            ),
        });
    }
    Ok(Some(SweepAxis { param, min, max, count, spacing }))
}

/// Keys that fix the parameter an axis would sweep; swept and fixed names
/// must be disjoint.
fn fixed_keys_for(param: SweepParam) -> &'static [&'static str] {
    match param {
        SweepParam::Rho | SweepParam::GammaT => &[
            "mode.rho", "mode_a.rho", "mode_b.rho", "mode.gamma", "mode_a.gamma", "mode_b.gamma",
        ],
        SweepParam::Alpha | SweepParam::GammaIntT => &[
            "mode.alpha", "mode_a.alpha", "mode_b.alpha",
            "mode.gamma_int", "mode_a.gamma_int", "mode_b.gamma_int",
        ],
        SweepParam::Theta => &["detuning.theta"],
        SweepParam::R => &["pump.r", "pump.g", "pump.alpha_p", "pump.g_alpha_p"],
    }
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<ParsedConfig> {
    let entries = tokenize(text)?;
    let mut warnings = entries.warnings.clone();

    let (rho_a, alpha_a, t_a) = resolve_mode(&entries, "a")?;
    let (rho_b, alpha_b, t_b) = resolve_mode(&entries, "b")?;
    let (rho_c, alpha_c, t_c) = resolve_mode(&entries, "c")?;

    let process = match entries.get("pump.process") {
        None => Process::Spdc,
        Some((raw, line)) => match raw.as_str() {
            "spdc" => Process::Spdc,
            "sfwm" => Process::Sfwm,
            _ => {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("key pump.process: expected spdc or sfwm, got '{raw}'"),
                })
            }
        },
    };
    let theta_p = entries.f64("pump.theta_p")?.unwrap_or(0.0);

    let pump_sources = [
        entries.has("pump.r"),
        entries.has("pump.g") || entries.has("pump.alpha_p"),
        entries.has("pump.g_alpha_p"),
    ];
    if pump_sources.iter().filter(|&&x| x).count() > 1 {
        return Err(Error::validation(
            "conflicting pump keys: give exactly one of pump.r, pump.g with pump.alpha_p, or pump.g_alpha_p",
        ));
    }
    let pump = if entries.has("pump.r") {
        let r = entries.f64("pump.r")?.unwrap();
        if r < 0.0 {
            let line = entries.get("pump.r").map(|e| e.1).unwrap_or(0);
            return Err(Error::Parse {
                line,
                message: format!("key pump.r: must be non-negative, got {r}"),
            });
        }
        Some(PumpSpec::Dimensionless(r))
    } else if entries.has("pump.g") || entries.has("pump.alpha_p") {
        let gain = entries.f64("pump.g")?.ok_or_else(|| {
            Error::validation("missing required key pump.g (pump.alpha_p given without it)")
        })?;
        let amplitude = entries.f64("pump.alpha_p")?.ok_or_else(|| {
            Error::validation("missing required key pump.alpha_p (pump.g given without it)")
        })?;
        Some(PumpSpec::GainAmplitude { gain, amplitude })
    } else {
        entries.f64("pump.g_alpha_p")?.map(PumpSpec::RateProduct)
    };

    let detuning_theta = Some(entries.f64("detuning.theta")?.unwrap_or(0.0));

    let mut scenario = Scenario {
        rho: [rho_a, rho_b, rho_c],
        alpha: [alpha_a, alpha_b, alpha_c],
        t: [t_a, t_b, t_c],
        process,
        theta_p,
        pump,
        detuning_theta,
    };

    // Sweep section.
    let quantity = match entries.get("sweep.quantity") {
        None => None,
        Some((raw, line)) => Some(Quantity::parse(raw).ok_or(Error::Parse {
            line: *line,
            message: format!("key sweep.quantity: unknown quantity '{raw}'"),
        })?),
    };
    let symmetric = entries.bool("sweep.symmetric")?.unwrap_or(true);

    let axis1 = parse_axis(&entries, "axis1")?;
    let axis2 = parse_axis(&entries, "axis2")?;
    if axis1.is_none() && axis2.is_some() {
        return Err(Error::validation("axis2 given without axis1"));
    }

    let mut sweep = None;
    if let Some(quantity) = quantity {
        if quantity == Quantity::LimitReport {
            if axis1.is_some() {
                return Err(Error::validation(
                    "limit_report sweeps the limits.* grid; axis sections are not allowed",
                ));
            }
            sweep = Some(SweepSpec { quantity, axes: Vec::new(), symmetric });
        } else {
            let axes: Vec<SweepAxis> = [axis1.clone(), axis2.clone()].into_iter().flatten().collect();
            if axes.is_empty() {
                return Err(Error::validation("missing required key axis1.name for sweep"));
            }
            if axes.len() == 2 && axes[0].param.target() == axes[1].param.target() {
                return Err(Error::validation(format!(
                    "axis1 and axis2 both drive '{}'",
                    axes[0].param.target()
                )));
            }
            for axis in &axes {
                for key in fixed_keys_for(axis.param) {
                    if entries.has(key) {
                        return Err(Error::validation(format!(
                            "swept parameter {} conflicts with fixed key {key}",
                            axis.param.as_str()
                        )));
                    }
                }
            }
            // Swept parameters are no longer fixed in the scenario.
            for axis in &axes {
                match axis.param.target() {
                    "theta" => scenario.detuning_theta = None,
                    "r" => scenario.pump = None,
                    _ => {}
                }
            }
            if symmetric {
                let sym = scenario.rho[0] == scenario.rho[1]
                    && scenario.alpha[0] == scenario.alpha[1]
                    && scenario.t[0] == scenario.t[1];
                if !sym {
                    return Err(Error::validation(
                        "sweep.symmetric = true but signal and idler parameters differ",
                    ));
                }
            }
            sweep = Some(SweepSpec { quantity, axes, symmetric });
        }
    } else if axis1.is_some() {
        return Err(Error::validation("axis sections given without sweep.quantity"));
    }

    // Limits section.
    let limits = if entries.has("limits.gamma")
        || entries.has("limits.t_start")
        || entries.has("limits.points")
    {
        let require = |key: &str| -> Result<f64> {
            entries
                .f64(key)?
                .ok_or_else(|| Error::validation(format!("missing required key {key}")))
        };
        let gamma = require("limits.gamma")?;
        let gamma_int = entries.f64("limits.gamma_int")?.unwrap_or(0.0);
        let pump_rate = require("limits.g_alpha_p")?;
        let omega = entries.f64("limits.omega")?.unwrap_or(0.0);
        let t_start = require("limits.t_start")?;
        let points = entries.usize("limits.points")?.ok_or_else(|| {
            Error::validation("missing required key limits.points")
        })?;
        if gamma < 0.0 || gamma_int < 0.0 || pump_rate < 0.0 || !t_start.is_finite() || t_start <= 0.0 {
            return Err(Error::validation(
                "limits: rates must be non-negative and limits.t_start positive",
            ));
        }
        let mut study = LimitStudy::halving(gamma, gamma_int, pump_rate, omega, t_start, points);
        study.theta_p = entries.f64("limits.theta_p")?.unwrap_or(0.0);
        Some(study)
    } else {
        None
    };

    if matches!(sweep, Some(SweepSpec { quantity: Quantity::LimitReport, .. })) && limits.is_none()
    {
        return Err(Error::validation(
            "sweep.quantity = limit_report needs the limits.* section",
        ));
    }

    if let Some(PumpSpec::Dimensionless(r)) = &scenario.pump {
        if *r > crate::params::WEAK_PUMP_WARN {
            warnings.push(format!(
                "weak-pump validity: pump.r = {r:.3e} exceeds {:.0e}",
                crate::params::WEAK_PUMP_WARN
            ));
        }
    }

    let echo = entries
        .map
        .iter()
        .map(|(k, (v, _))| (k.clone(), v.clone()))
        .collect();

    Ok(ParsedConfig {
        scenario,
        sweep,
        limits,
        warnings,
        echo,
    })
}
