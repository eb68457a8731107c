use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::diststats::{Binning, Sign};
use crate::error::{Error, Result};
use crate::fitting::{ScalingRange, StudentParams};
use crate::returns::{TimescaleKind, TimescaleSpec};
use crate::synth::{ArrivalProcess, ReturnModel, SyntheticStreamSpec};
use crate::tickdata::{Price, SessionCalendar};

/// Version of the config document format understood by this build.
pub const CONFIG_VERSION: u32 = 1;

/// Environment variable the CLI reads to replace `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "MICRORET_OUT_DIR";

/// Average trades per minute of the 23 reference instruments.
pub const REFERENCE_FREQUENCIES: [f64; 23] = [
    15.74, 4.81, 9.03, 2.08, 7.94, 2.13, 5.14, 2.03, 3.34, 1.22, 7.29, 6.14, 2.37, 1.67, 5.55,
    7.05, 4.71, 3.68, 4.92, 2.34, 1.72, 2.79, 3.35,
];

/// Full description of one run, stored as TOML:
///
/// ```toml
/// version = 1
/// timescales = ["event:1,2,4,8,16,32", "clock:1,2,3,4,5"]
/// output_dir = "out"
///
/// [input]
/// source = "files"
/// paths = ["ticks/2003.csv"]
///
/// [[scaling_ranges]]
/// timescale = "event:1"
/// positive = "2.4,max"
/// negative = "2.1,60.3"
/// ```
///
/// Synthetic input replaces `paths` with `[[input.streams]]` tables, one per
/// instrument (see [`SyntheticStreamSpec`]). Streams are generated on the
/// run calendar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub version: u32,
    pub input: InputConfig,
    #[serde(default)]
    pub calendar: SessionCalendar,
    #[serde(default = "default_timescales", with = "timescale_lists")]
    pub timescales: Vec<TimescaleSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scaling_ranges: Vec<RangeOverride>,
    #[serde(default)]
    pub binning: Binning,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputConfig {
    Files { paths: Vec<PathBuf> },
    Synthetic { streams: Vec<SyntheticStreamSpec> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeOverride {
    pub timescale: TimescaleSpec,
    #[serde(default)]
    pub positive: Option<ScalingRange>,
    #[serde(default)]
    pub negative: Option<ScalingRange>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    #[serde(default = "yes")]
    pub fix_m_to_zero: bool,
    /// Bins with fewer counts are left out of the Student fit.
    #[serde(default = "default_min_count")]
    pub min_count: u64,
    /// Order statistics used by the Hill cross-check, capped by the tail size.
    #[serde(default = "default_hill_k")]
    pub hill_k: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            fix_m_to_zero: true,
            min_count: default_min_count(),
            hill_k: default_hill_k(),
        }
    }
}

fn yes() -> bool {
    true
}

fn default_min_count() -> u64 {
    10
}

fn default_hill_k() -> usize {
    1000
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_timescales() -> Vec<TimescaleSpec> {
    let mut all = TimescaleSpec::default_event();
    all.extend(TimescaleSpec::default_clock());
    all
}

/// Timescales are written as `kind:d1,d2,...` strings, one per kind.
mod timescale_lists {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::returns::{TimescaleKind, TimescaleSpec};

    pub fn serialize<S: Serializer>(list: &[TimescaleSpec], s: S) -> Result<S::Ok, S::Error> {
        let mut groups: Vec<String> = Vec::new();
        for kind in [TimescaleKind::Event, TimescaleKind::Clock] {
            let deltas: Vec<String> = list
                .iter()
                .filter(|t| t.kind() == kind)
                .map(|t| t.delta().to_string())
                .collect();
            if !deltas.is_empty() {
                groups.push(format!("{}:{}", kind.as_str(), deltas.join(",")));
            }
        }
        groups.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<TimescaleSpec>, D::Error> {
        let groups = Vec::<String>::deserialize(d)?;
        let mut out = Vec::new();
        for g in groups {
            out.extend(TimescaleSpec::parse_list(&g).map_err(serde::de::Error::custom)?);
        }
        Ok(out)
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_owned()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| e.context(format!("config {}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {}, expected {CONFIG_VERSION}",
                self.version
            )));
        }
        if self.timescales.is_empty() {
            return Err(Error::Config("at least one timescale is required".into()));
        }
        let mut seen = BTreeSet::new();
        for t in &self.timescales {
            if !seen.insert(*t) {
                return Err(Error::Config(format!("timescale {t} listed twice")));
            }
        }
        let mut overridden = BTreeSet::new();
        for o in &self.scaling_ranges {
            if !overridden.insert(o.timescale) {
                return Err(Error::Config(format!(
                    "scaling range for {} given twice",
                    o.timescale
                )));
            }
        }
        if self.fit.hill_k == 0 {
            return Err(Error::Config("hill_k must be at least 1".into()));
        }
        if let InputConfig::Synthetic { streams } = &self.input {
            let mut ids = BTreeSet::new();
            for s in streams {
                s.validate()?;
                if !ids.insert(s.instrument_id.as_str()) {
                    return Err(Error::Config(format!(
                        "synthetic instrument {} listed twice",
                        s.instrument_id
                    )));
                }
                if s.calendar != self.calendar {
                    return Err(Error::Config(format!(
                        "stream {} has its own calendar; streams run on the config calendar",
                        s.instrument_id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Replaces the run calendar, including that of synthetic streams.
    pub fn set_calendar(&mut self, calendar: SessionCalendar) {
        if let InputConfig::Synthetic { streams } = &mut self.input {
            for s in streams {
                s.calendar = calendar.clone();
            }
        }
        self.calendar = calendar;
    }

    pub fn scaling_range(&self, timescale: TimescaleSpec, sign: Sign) -> ScalingRange {
        let o = self
            .scaling_ranges
            .iter()
            .find(|o| o.timescale == timescale);
        let explicit = o.and_then(|o| match sign {
            Sign::Positive => o.positive,
            Sign::Negative => o.negative,
        });
        explicit.unwrap_or_else(|| default_scaling_range(timescale, sign))
    }

    /// 23 synthetic instruments at the reference trading frequencies over
    /// four weeks of 2003, with Student(α = 3) per-trade returns.
    pub fn synthetic_default() -> Self {
        let model = ReturnModel::Student(
            StudentParams::new(3.0, 0.0, 1.0e5).expect("valid Student parameters"),
        );
        let streams = REFERENCE_FREQUENCIES
            .iter()
            .enumerate()
            .map(|(i, &rate)| SyntheticStreamSpec {
                instrument_id: format!("SYN{:03}", i + 1),
                start_date: NaiveDate::from_ymd_opt(2003, 1, 6).expect("valid date"),
                end_date: NaiveDate::from_ymd_opt(2003, 1, 31).expect("valid date"),
                trades_per_minute: rate,
                arrival: ArrivalProcess::Poisson,
                return_model: model,
                initial_price: Price::from_millis(100_000),
                seed: 2003 + i as u64,
                calendar: SessionCalendar::default(),
            })
            .collect();
        PipelineConfig {
            version: CONFIG_VERSION,
            input: InputConfig::Synthetic { streams },
            calendar: SessionCalendar::default(),
            timescales: default_timescales(),
            scaling_ranges: Vec::new(),
            binning: Binning::default(),
            fit: FitConfig::default(),
            output_dir: default_output_dir(),
        }
    }
}

/// Lower cutoffs used for the reference tables, running to the sample max.
/// Other timescales start at 2.4.
pub fn default_scaling_range(timescale: TimescaleSpec, sign: Sign) -> ScalingRange {
    let lo = match (timescale.kind(), timescale.delta(), sign) {
        (TimescaleKind::Event, 1, Sign::Positive) => 2.4,
        (TimescaleKind::Event, 1, Sign::Negative) => 2.1,
        (TimescaleKind::Event, 32, Sign::Negative) => 2.6,
        (TimescaleKind::Event, 2..=32, Sign::Positive) => 2.6,
        (TimescaleKind::Event, 2..=16, Sign::Negative) => 2.4,
        (TimescaleKind::Clock, 1, Sign::Positive) => 2.4,
        (TimescaleKind::Clock, 1..=2, Sign::Negative) => 2.1,
        (TimescaleKind::Clock, 2..=5, Sign::Positive) => 2.8,
        (TimescaleKind::Clock, 3..=5, Sign::Negative) => 2.4,
        _ => 2.4,
    };
    ScalingRange::to_max(lo).expect("positive cutoff")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let c = PipelineConfig::synthetic_default();
        c.validate().unwrap();
        let text = c.to_toml();
        assert!(text.contains(r#"timescales = ["event:1,2,4,8,16,32", "clock:1,2,3,4,5"]"#));
        assert_eq!(PipelineConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn minimal_file_config() {
        let c = PipelineConfig::from_toml(
            r#"
            version = 1
            timescales = ["event:1"]
            [input]
            source = "files"
            paths = ["a.csv"]
            [[scaling_ranges]]
            timescale = "event:1"
            negative = "2.0,30"
            "#,
        )
        .unwrap();
        assert_eq!(c.timescales, vec![TimescaleSpec::event(1).unwrap()]);
        assert_eq!(c.output_dir, PathBuf::from("out"));
        let t = c.timescales[0];
        assert_eq!(
            c.scaling_range(t, Sign::Negative),
            ScalingRange::bounded(2.0, 30.0).unwrap()
        );
        assert_eq!(
            c.scaling_range(t, Sign::Positive),
            ScalingRange::to_max(2.4).unwrap()
        );
    }

    #[test]
    fn rejects_bad_configs() {
        let base = "[input]\nsource = \"files\"\npaths = []\n";
        assert!(PipelineConfig::from_toml(&format!("version = 2\n{base}")).is_err());
        assert!(
            PipelineConfig::from_toml(&format!("version = 1\ntimescales = []\n{base}")).is_err()
        );
        assert!(PipelineConfig::from_toml(&format!(
            "version = 1\ntimescales = [\"event:1,1\"]\n{base}"
        ))
        .is_err());
        assert!(PipelineConfig::from_toml(&format!("version = 1\nbogus = 3\n{base}")).is_err());
        assert!(PipelineConfig::from_toml(&format!(
            "version = 1\n{base}[[scaling_ranges]]\ntimescale = \"event:1\"\npositive = \"3,2\"\n"
        ))
        .is_err());
    }

    #[test]
    fn reference_ranges() {
        let e = |d| TimescaleSpec::event(d).unwrap();
        let c = |d| TimescaleSpec::clock(d).unwrap();
        assert_eq!(default_scaling_range(e(1), Sign::Positive).lo, 2.4);
        assert_eq!(default_scaling_range(e(1), Sign::Negative).lo, 2.1);
        assert_eq!(default_scaling_range(e(8), Sign::Positive).lo, 2.6);
        assert_eq!(default_scaling_range(e(32), Sign::Negative).lo, 2.6);
        assert_eq!(default_scaling_range(c(2), Sign::Negative).lo, 2.1);
        assert_eq!(default_scaling_range(c(4), Sign::Positive).lo, 2.8);
        assert_eq!(default_scaling_range(e(64), Sign::Positive).lo, 2.4);
        assert!(default_scaling_range(e(1), Sign::Positive).hi.is_none());
    }
}
