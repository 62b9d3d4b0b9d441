//! Detector thresholds.
//!
//! Defaults reproduce the published detection rules. Any value can be
//! overridden from a flat `key = value` text file; `#` starts a comment.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnomalyConfig {
    /// Share (percent) strictly above which an ownership indicator fires.
    pub share_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WashConfig {
    pub volume_surge_pct: f64,
    pub price_change_pct: f64,
    /// Max |buy − sell| / max(buy, sell) for a zero-risk maker.
    pub zero_risk_tolerance: f64,
    /// Min share of day volume from makers trading both sides.
    pub circular_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpiConfig {
    pub price_change_pct: f64,
    pub max_volume_growth_pct: f64,
    pub low_volume_usd: f64,
    pub min_buy_ratio: f64,
    pub max_makers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PumpDumpConfig {
    pub rsi_period: usize,
    pub rsi_threshold: f64,
    pub lookback_hours: i64,
    pub pump_pct: f64,
    pub volume_surge_pct: f64,
    pub max_pump_hours: i64,
    pub dump_pct: f64,
    pub dump_horizon_hours: i64,
    pub post_dump_hours: i64,
    pub post_dump_volume_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RugPullConfig {
    pub drop_pct: f64,
    pub window_days: i64,
    pub volume_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnsConfig {
    pub window_days: i64,
    pub high_return_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorConfig {
    pub anomaly: AnomalyConfig,
    pub wash: WashConfig,
    pub lpi: LpiConfig,
    pub pnd: PumpDumpConfig,
    pub rug: RugPullConfig,
    pub returns: ReturnsConfig,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            anomaly: AnomalyConfig { share_pct: 30.0 },
            wash: WashConfig {
                volume_surge_pct: 500.0,
                price_change_pct: 5.0,
                zero_risk_tolerance: 0.02,
                circular_ratio: 0.99,
            },
            lpi: LpiConfig {
                price_change_pct: 100.0,
                max_volume_growth_pct: 20.0,
                low_volume_usd: 1_000.0,
                min_buy_ratio: 0.90,
                max_makers: 10,
            },
            pnd: PumpDumpConfig {
                rsi_period: 14,
                rsi_threshold: 80.0,
                lookback_hours: 24,
                pump_pct: 50.0,
                volume_surge_pct: 500.0,
                max_pump_hours: 24,
                dump_pct: 30.0,
                dump_horizon_hours: 72,
                post_dump_hours: 48,
                post_dump_volume_ratio: 0.5,
            },
            rug: RugPullConfig { drop_pct: 99.0, window_days: 7, volume_ratio: 0.01 },
            returns: ReturnsConfig { window_days: 90, high_return_pct: 100.0 },
        }
    }
}

impl DetectorConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.to_owned(), source })?;
        Self::from_kv(&text)
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config { line: i + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
            cfg.set(key.trim(), value.trim()).map_err(err)?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn f(v: &str) -> std::result::Result<f64, String> {
            v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| format!("`{v}` is not a number"))
        }
        fn n<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
            v.parse::<T>().map_err(|_| format!("`{v}` is not an integer"))
        }
        match key {
            "anomaly.share_pct" => self.anomaly.share_pct = f(value)?,
            "wash.volume_surge_pct" => self.wash.volume_surge_pct = f(value)?,
            "wash.price_change_pct" => self.wash.price_change_pct = f(value)?,
            "wash.zero_risk_tolerance" => self.wash.zero_risk_tolerance = f(value)?,
            "wash.circular_ratio" => self.wash.circular_ratio = f(value)?,
            "lpi.price_change_pct" => self.lpi.price_change_pct = f(value)?,
            "lpi.max_volume_growth_pct" => self.lpi.max_volume_growth_pct = f(value)?,
            "lpi.low_volume_usd" => self.lpi.low_volume_usd = f(value)?,
            "lpi.min_buy_ratio" => self.lpi.min_buy_ratio = f(value)?,
            "lpi.max_makers" => self.lpi.max_makers = n(value)?,
            "pnd.rsi_period" => {
                self.pnd.rsi_period = n(value)?;
                if self.pnd.rsi_period == 0 {
                    return Err("pnd.rsi_period must be positive".into());
                }
            }
            "pnd.rsi_threshold" => self.pnd.rsi_threshold = f(value)?,
            "pnd.lookback_hours" => self.pnd.lookback_hours = n(value)?,
            "pnd.pump_pct" => self.pnd.pump_pct = f(value)?,
            "pnd.volume_surge_pct" => self.pnd.volume_surge_pct = f(value)?,
            "pnd.max_pump_hours" => self.pnd.max_pump_hours = n(value)?,
            "pnd.dump_pct" => self.pnd.dump_pct = f(value)?,
            "pnd.dump_horizon_hours" => self.pnd.dump_horizon_hours = n(value)?,
            "pnd.post_dump_hours" => self.pnd.post_dump_hours = n(value)?,
            "pnd.post_dump_volume_ratio" => self.pnd.post_dump_volume_ratio = f(value)?,
            "rug.drop_pct" => self.rug.drop_pct = f(value)?,
            "rug.window_days" => self.rug.window_days = n(value)?,
            "rug.volume_ratio" => self.rug.volume_ratio = f(value)?,
            "returns.window_days" => self.returns.window_days = n(value)?,
            "returns.high_return_pct" => self.returns.high_return_pct = f(value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }
}
