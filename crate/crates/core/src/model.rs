//! Shared domain types for tokens, price series, trades and detections.
//!
//! Everything here is plain data. Timestamps are unix seconds in UTC and a
//! "day" is a UTC calendar day. Prices and volumes are USD as `f64`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const SECONDS_PER_HOUR: i64 = 3_600;
pub const SECONDS_PER_DAY: i64 = 86_400;

/// UTC day index (days since the unix epoch) containing `ts`.
pub fn day_of(ts: i64) -> i64 {
    ts.div_euclid(SECONDS_PER_DAY)
}

pub fn day_start(day: i64) -> i64 {
    day * SECONDS_PER_DAY
}

pub fn day_end(day: i64) -> i64 {
    day_start(day) + SECONDS_PER_DAY - 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chain {
    Ethereum,
    Bsc,
    Solana,
    Base,
}

impl Chain {
    pub const ALL: [Chain; 4] = [Chain::Ethereum, Chain::Bsc, Chain::Solana, Chain::Base];

    pub fn as_str(self) -> &'static str {
        match self {
            Chain::Ethereum => "ethereum",
            Chain::Bsc => "bsc",
            Chain::Solana => "solana",
            Chain::Base => "base",
        }
    }

    pub fn is_evm(self) -> bool {
        !matches!(self, Chain::Solana)
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Chain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ethereum" | "eth" => Ok(Chain::Ethereum),
            "bsc" => Ok(Chain::Bsc),
            "solana" | "sol" => Ok(Chain::Solana),
            "base" => Ok(Chain::Base),
            other => Err(format!("unknown chain `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenRecord {
    pub token_id: String,
    pub chain: Chain,
    pub address: String,
    pub name: String,
    pub symbol: String,
    pub created_at: i64,
    pub sources: BTreeSet<String>,
}

/// One hourly candle. Bars are stored per token, so the token id is the map key.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OhlcvBar {
    pub ts: i64,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume_usd: f64,
}

impl OhlcvBar {
    /// Checks the bar invariants, returning the first violated rule.
    pub fn validate(&self) -> Result<(), BarViolation> {
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().chain([&self.volume_usd]).any(|v| !v.is_finite()) {
            return Err(BarViolation::NonFinite);
        }
        if prices.iter().any(|&p| p < 0.0) || self.volume_usd < 0.0 {
            return Err(BarViolation::Negative);
        }
        if self.low > self.open.min(self.close) || self.open.max(self.close) > self.high {
            return Err(BarViolation::InvertedRange);
        }
        if self.ts.rem_euclid(SECONDS_PER_HOUR) != 0 {
            return Err(BarViolation::Unaligned);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarViolation {
    NonFinite,
    Negative,
    InvertedRange,
    Unaligned,
}

/// Close-to-close daily roll-up of hourly bars for one UTC day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyAggregate {
    pub day: i64,
    pub open: f64,
    pub close: f64,
    pub volume_usd: f64,
    pub bar_count: u32,
}

impl DailyAggregate {
    pub fn start_ts(&self) -> i64 {
        day_start(self.day)
    }

    pub fn end_ts(&self) -> i64 {
        day_end(self.day)
    }
}

/// Rolls hourly bars (sorted by ts) up into consecutive UTC days.
///
/// Days between the first and last bar that have no bars are materialized
/// with zero volume and the previous day's close as both open and close.
pub fn aggregate_daily(bars: &[OhlcvBar]) -> Vec<DailyAggregate> {
    let (Some(first), Some(last)) = (bars.first(), bars.last()) else {
        return Vec::new();
    };
    let first_day = day_of(first.ts);
    let last_day = day_of(last.ts);
    let mut out: Vec<DailyAggregate> = Vec::with_capacity((last_day - first_day + 1) as usize);
    let mut iter = bars.iter().peekable();
    for day in first_day..=last_day {
        let mut agg: Option<DailyAggregate> = None;
        while let Some(bar) = iter.next_if(|b| day_of(b.ts) == day) {
            match agg.as_mut() {
                None => {
                    agg = Some(DailyAggregate {
                        day,
                        open: bar.open,
                        close: bar.close,
                        volume_usd: bar.volume_usd,
                        bar_count: 1,
                    })
                }
                Some(a) => {
                    a.close = bar.close;
                    a.volume_usd += bar.volume_usd;
                    a.bar_count += 1;
                }
            }
        }
        let agg = agg.unwrap_or_else(|| {
            let prev_close = out.last().map_or(0.0, |d| d.close);
            DailyAggregate { day, open: prev_close, close: prev_close, volume_usd: 0.0, bar_count: 0 }
        });
        out.push(agg);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Buy,
    Sell,
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "buy" => Ok(Side::Buy),
            "sell" => Ok(Side::Sell),
            other => Err(format!("unknown side `{other}`")),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Buy => "buy",
            Side::Sell => "sell",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trade {
    pub ts: i64,
    pub maker_id: String,
    pub side: Side,
    pub amount_usd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderSnapshot {
    pub ts: i64,
    pub top10_share: f64,
    pub bundle_buy_share: f64,
    pub fresh_address_share: f64,
    pub airdrop_share: f64,
    pub honeypot: bool,
}

impl HolderSnapshot {
    pub fn shares_in_range(&self) -> bool {
        [self.top10_share, self.bundle_buy_share, self.fresh_address_share, self.airdrop_share]
            .iter()
            .all(|s| (0.0..=100.0).contains(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TokenEconomics {
    pub ts: i64,
    pub price_usd: f64,
    pub circulating_supply: Option<f64>,
    pub market_cap_usd: Option<f64>,
    pub liquidity_usd: Option<f64>,
}

impl TokenEconomics {
    /// Market cap agrees with price × supply to relative 1e-6 when all are present.
    pub fn market_cap_consistent(&self) -> bool {
        match (self.circulating_supply, self.market_cap_usd) {
            (Some(supply), Some(mcap)) => {
                let expected = market_cap(self.price_usd, supply);
                let scale = expected.abs().max(mcap.abs());
                scale == 0.0 || (expected - mcap).abs() <= 1e-6 * scale
            }
            _ => true,
        }
    }
}

pub fn market_cap(price_usd: f64, supply: f64) -> f64 {
    price_usd * supply
}

/// Percent change from `prev` to `cur`, total over non-negative inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PctChange {
    Finite(f64),
    /// `prev == 0` and `cur > 0`.
    PosInfinity,
    /// `prev == 0` and `cur == 0`.
    Undefined,
}

impl PctChange {
    /// `self > threshold`, with +infinity exceeding every threshold.
    pub fn exceeds(self, threshold: f64) -> bool {
        match self {
            PctChange::Finite(v) => v > threshold,
            PctChange::PosInfinity => true,
            PctChange::Undefined => false,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            PctChange::Finite(v) => v,
            PctChange::PosInfinity => f64::INFINITY,
            PctChange::Undefined => f64::NAN,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            PctChange::Finite(v) => Some(v),
            _ => None,
        }
    }
}

pub fn pct_change(prev: f64, cur: f64) -> PctChange {
    if prev > 0.0 {
        PctChange::Finite(100.0 * (cur - prev) / prev)
    } else if cur > 0.0 {
        PctChange::PosInfinity
    } else {
        PctChange::Undefined
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKind {
    WashZeroRisk,
    WashCircular,
    WashPersistent,
    #[serde(rename = "LPI")]
    Lpi,
    PumpAndDump,
    RugPull,
    AnomalyTopHolders,
    AnomalyBundle,
    AnomalyFresh,
    AnomalyAirdrop,
    AnomalyHoneypot,
}

impl EventKind {
    pub const ALL: [EventKind; 11] = [
        EventKind::WashZeroRisk,
        EventKind::WashCircular,
        EventKind::WashPersistent,
        EventKind::Lpi,
        EventKind::PumpAndDump,
        EventKind::RugPull,
        EventKind::AnomalyTopHolders,
        EventKind::AnomalyBundle,
        EventKind::AnomalyFresh,
        EventKind::AnomalyAirdrop,
        EventKind::AnomalyHoneypot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::WashZeroRisk => "WashZeroRisk",
            EventKind::WashCircular => "WashCircular",
            EventKind::WashPersistent => "WashPersistent",
            EventKind::Lpi => "LPI",
            EventKind::PumpAndDump => "PumpAndDump",
            EventKind::RugPull => "RugPull",
            EventKind::AnomalyTopHolders => "AnomalyTopHolders",
            EventKind::AnomalyBundle => "AnomalyBundle",
            EventKind::AnomalyFresh => "AnomalyFresh",
            EventKind::AnomalyAirdrop => "AnomalyAirdrop",
            EventKind::AnomalyHoneypot => "AnomalyHoneypot",
        }
    }

    pub fn is_wash(self) -> bool {
        matches!(self, EventKind::WashZeroRisk | EventKind::WashCircular | EventKind::WashPersistent)
    }

    pub fn is_anomaly(self) -> bool {
        matches!(
            self,
            EventKind::AnomalyTopHolders
                | EventKind::AnomalyBundle
                | EventKind::AnomalyFresh
                | EventKind::AnomalyAirdrop
                | EventKind::AnomalyHoneypot
        )
    }

    /// Artificial growth: wash trading or LPI.
    pub fn is_growth(self) -> bool {
        self.is_wash() || self == EventKind::Lpi
    }

    /// Profit extraction: pump-and-dump or rug pull.
    pub fn is_extraction(self) -> bool {
        matches!(self, EventKind::PumpAndDump | EventKind::RugPull)
    }

    /// Metric keys every event of this kind carries.
    pub fn required_metrics(self) -> &'static [&'static str] {
        match self {
            EventKind::WashZeroRisk => &["volume_surge_pct", "price_change_pct", "qualifying_makers"],
            EventKind::WashCircular => &["volume_surge_pct", "price_change_pct", "circular_ratio", "unique_makers"],
            EventKind::WashPersistent => &["screened_days", "persistent_makers"],
            EventKind::Lpi => &["price_change_pct", "volume_usd", "buy_ratio", "unique_makers"],
            EventKind::PumpAndDump => &["pump_pct", "dump_pct", "pump_volume_surge_pct", "peak_ts"],
            EventKind::RugPull => &["price_drop_pct", "volume_collapse_ratio"],
            EventKind::AnomalyHoneypot => &["honeypot"],
            _ => &["share_pct"],
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| format!("unknown event kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    pub token_id: String,
    pub kind: EventKind,
    pub window_start: i64,
    pub window_end: i64,
    #[serde(with = "metric_map")]
    pub metrics: BTreeMap<String, f64>,
    pub actors: BTreeSet<String>,
}

impl DetectionEvent {
    pub fn new(token_id: impl Into<String>, kind: EventKind, window_start: i64, window_end: i64) -> Self {
        debug_assert!(window_start <= window_end);
        Self {
            token_id: token_id.into(),
            kind,
            window_start,
            window_end,
            metrics: BTreeMap::new(),
            actors: BTreeSet::new(),
        }
    }

    pub fn with_metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.to_owned(), value);
        self
    }

    pub fn with_actors<I, S>(mut self, actors: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.actors.extend(actors.into_iter().map(Into::into));
        self
    }

    pub fn has_required_metrics(&self) -> bool {
        self.kind.required_metrics().iter().all(|k| self.metrics.contains_key(*k))
    }

    /// True when the UTC days touched by the two windows intersect.
    pub fn overlaps_days(&self, start: i64, end: i64) -> bool {
        day_of(self.window_start) <= day_of(end) && day_of(start) <= day_of(self.window_end)
    }

    /// Canonical ordering used for every emitted event list.
    pub fn sort_key(&self) -> (&str, EventKind, i64, i64) {
        (&self.token_id, self.kind, self.window_start, self.window_end)
    }
}

/// JSON has no infinity; non-finite metric values are written as strings.
mod metric_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Metric {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(map: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        let out: BTreeMap<&str, Metric> = map
            .iter()
            .map(|(k, &v)| {
                let m = if v.is_finite() {
                    Metric::Num(v)
                } else if v.is_nan() {
                    Metric::Text("NaN".into())
                } else if v > 0.0 {
                    Metric::Text("Infinity".into())
                } else {
                    Metric::Text("-Infinity".into())
                };
                (k.as_str(), m)
            })
            .collect();
        out.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        let raw = BTreeMap::<String, Metric>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, m)| {
                let v = match m {
                    Metric::Num(v) => v,
                    Metric::Text(t) => match t.as_str() {
                        "Infinity" => f64::INFINITY,
                        "-Infinity" => f64::NEG_INFINITY,
                        "NaN" => f64::NAN,
                        other => {
                            return Err(serde::de::Error::custom(format!("bad metric value `{other}`")))
                        }
                    },
                };
                Ok((k, v))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ReturnCategory {
    Missing,
    Negative,
    Inactive,
    StableActive,
    Positive,
    /// Positive with a return above 100%.
    HighReturn,
}

impl ReturnCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ReturnCategory::Missing => "Missing",
            ReturnCategory::Negative => "Negative",
            ReturnCategory::Inactive => "Inactive",
            ReturnCategory::StableActive => "StableActive",
            ReturnCategory::Positive => "Positive",
            ReturnCategory::HighReturn => "HighReturn",
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, ReturnCategory::Positive | ReturnCategory::HighReturn)
    }
}

impl FromStr for ReturnCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use ReturnCategory::*;
        [Missing, Negative, Inactive, StableActive, Positive, HighReturn]
            .into_iter()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| format!("unknown return category `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnRecord {
    pub token_id: String,
    pub chain: Chain,
    pub p_start: Option<f64>,
    pub p_end: Option<f64>,
    pub return_pct: Option<f64>,
    pub window_volume_usd: f64,
    pub category: ReturnCategory,
}
