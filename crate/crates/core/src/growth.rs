//! Artificial-growth detectors: ownership anomaly indicators, the wash
//! trading screen with its three confirmation techniques, and two-phase
//! liquidity-pool price inflation (LPI) detection.
//!
//! Day-level inputs are UTC [`DailyAggregate`]s compared close-to-close with
//! the preceding day. Trade-level inputs must be sorted by timestamp.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::config::{AnomalyConfig, LpiConfig, WashConfig};
use crate::model::{day_end, day_of, day_start, pct_change, DailyAggregate, DetectionEvent, EventKind, HolderSnapshot, PctChange, Side, Trade};

/// One event per ownership indicator above the threshold, plus honeypot.
pub fn detect_anomalies(token_id: &str, snapshot: &HolderSnapshot, cfg: &AnomalyConfig) -> Vec<DetectionEvent> {
    let shares = [
        (EventKind::AnomalyTopHolders, snapshot.top10_share),
        (EventKind::AnomalyBundle, snapshot.bundle_buy_share),
        (EventKind::AnomalyFresh, snapshot.fresh_address_share),
        (EventKind::AnomalyAirdrop, snapshot.airdrop_share),
    ];
    let mut events: Vec<DetectionEvent> = shares
        .into_iter()
        .filter(|&(_, share)| share > cfg.share_pct)
        .map(|(kind, share)| DetectionEvent::new(token_id, kind, snapshot.ts, snapshot.ts).with_metric("share_pct", share))
        .collect();
    if snapshot.honeypot {
        events.push(
            DetectionEvent::new(token_id, EventKind::AnomalyHoneypot, snapshot.ts, snapshot.ts).with_metric("honeypot", 1.0),
        );
    }
    events
}

/// Splits time-sorted trades into per-UTC-day slices.
pub fn trades_by_day(trades: &[Trade]) -> BTreeMap<i64, &[Trade]> {
    let mut out = BTreeMap::new();
    let mut start = 0;
    while start < trades.len() {
        let day = day_of(trades[start].ts);
        let len = trades[start..].iter().take_while(|t| day_of(t.ts) == day).count();
        out.insert(day, &trades[start..start + len]);
        start += len;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScreenedDay {
    pub day: i64,
    /// `+inf` when the previous day had zero volume.
    pub volume_surge_pct: f64,
    pub price_change_pct: f64,
}

/// Days whose volume jumped by more than the surge threshold while the
/// close moved less than the price threshold.
pub fn screen_wash_days(daily: &[DailyAggregate], cfg: &WashConfig) -> Vec<ScreenedDay> {
    daily
        .windows(2)
        .filter_map(|w| {
            let (prev, cur) = (&w[0], &w[1]);
            let surge = pct_change(prev.volume_usd, cur.volume_usd);
            let price = pct_change(prev.close, cur.close).finite()?;
            (surge.exceeds(cfg.volume_surge_pct) && price.abs() < cfg.price_change_pct).then_some(ScreenedDay {
                day: cur.day,
                volume_surge_pct: surge.as_f64(),
                price_change_pct: price,
            })
        })
        .collect()
}

#[derive(Debug, Default, Clone, Copy)]
struct Flow {
    buy: f64,
    sell: f64,
}

fn flows(trades: &[Trade]) -> BTreeMap<&str, Flow> {
    let mut out: BTreeMap<&str, Flow> = BTreeMap::new();
    for t in trades {
        let f = out.entry(t.maker_id.as_str()).or_default();
        match t.side {
            Side::Buy => f.buy += t.amount_usd,
            Side::Sell => f.sell += t.amount_usd,
        }
    }
    out
}

/// Makers who bought and sold within `tolerance` of each other in one day.
pub fn zero_risk_makers(day_trades: &[Trade], tolerance: f64) -> BTreeSet<String> {
    flows(day_trades)
        .into_iter()
        .filter(|(_, f)| f.buy > 0.0 && f.sell > 0.0 && (f.buy - f.sell).abs() / f.buy.max(f.sell) <= tolerance)
        .map(|(m, _)| m.to_owned())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircularVolume {
    /// Volume of makers with at least one buy and one sell, over all volume.
    pub circular_ratio: f64,
    pub unique_makers: usize,
    pub circular_makers: BTreeSet<String>,
    pub flagged: bool,
}

/// Circular-volume test for one day. `None` when the day has no volume.
///
/// Numerator and denominator both sum every trade's `amount_usd`, so a
/// round trip counts both legs.
pub fn circular_volume(day_trades: &[Trade], min_ratio: f64) -> Option<CircularVolume> {
    let flows = flows(day_trades);
    let total: f64 = flows.values().map(|f| f.buy + f.sell).sum();
    if total <= 0.0 {
        return None;
    }
    let circular: BTreeMap<&str, Flow> = flows.iter().filter(|(_, f)| f.buy > 0.0 && f.sell > 0.0).map(|(m, f)| (*m, *f)).collect();
    let ratio = circular.values().map(|f| f.buy + f.sell).sum::<f64>() / total;
    Some(CircularVolume {
        circular_ratio: ratio,
        unique_makers: flows.len(),
        circular_makers: circular.keys().map(|m| (*m).to_owned()).collect(),
        flagged: ratio >= min_ratio,
    })
}

/// Makers that traded on every one of the given days. Empty for fewer than two days.
pub fn persistent_makers(days: &[&[Trade]]) -> BTreeSet<String> {
    if days.len() < 2 {
        return BTreeSet::new();
    }
    let mut sets = days.iter().map(|d| d.iter().map(|t| t.maker_id.as_str()).collect::<BTreeSet<&str>>());
    let first = sets.next().expect("at least two days");
    sets.fold(first, |acc, s| acc.intersection(&s).copied().collect()).into_iter().map(str::to_owned).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenedOutcome {
    pub day: ScreenedDay,
    pub has_trades: bool,
    pub zero_risk: bool,
    /// `None` when the circular test was skipped for lack of volume.
    pub circular: Option<bool>,
}

impl ScreenedOutcome {
    pub fn confirmed(&self) -> bool {
        self.zero_risk || self.circular == Some(true)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct WashReport {
    pub events: Vec<DetectionEvent>,
    pub screened: Vec<ScreenedOutcome>,
}

impl WashReport {
    /// A token is wash-affected when any technique confirmed.
    pub fn affected(&self) -> bool {
        !self.events.is_empty()
    }
}

pub fn detect_wash_trading(
    token_id: &str,
    daily: &[DailyAggregate],
    trades: &[Trade],
    cfg: &WashConfig,
) -> WashReport {
    let by_day = trades_by_day(trades);
    let mut report = WashReport::default();
    let mut traded_days: Vec<(i64, &[Trade])> = Vec::new();

    for day in screen_wash_days(daily, cfg) {
        let day_trades = by_day.get(&day.day).copied().unwrap_or(&[]);
        let mut outcome = ScreenedOutcome { day, has_trades: !day_trades.is_empty(), zero_risk: false, circular: None };
        if day_trades.is_empty() {
            report.screened.push(outcome);
            continue;
        }
        traded_days.push((day.day, day_trades));
        let (start, end) = (day_start(day.day), day_end(day.day));

        let makers = zero_risk_makers(day_trades, cfg.zero_risk_tolerance);
        if !makers.is_empty() {
            outcome.zero_risk = true;
            report.events.push(
                DetectionEvent::new(token_id, EventKind::WashZeroRisk, start, end)
                    .with_metric("volume_surge_pct", day.volume_surge_pct)
                    .with_metric("price_change_pct", day.price_change_pct)
                    .with_metric("qualifying_makers", makers.len() as f64)
                    .with_actors(makers),
            );
        }
        if let Some(circ) = circular_volume(day_trades, cfg.circular_ratio) {
            outcome.circular = Some(circ.flagged);
            if circ.flagged {
                report.events.push(
                    DetectionEvent::new(token_id, EventKind::WashCircular, start, end)
                        .with_metric("volume_surge_pct", day.volume_surge_pct)
                        .with_metric("price_change_pct", day.price_change_pct)
                        .with_metric("circular_ratio", circ.circular_ratio)
                        .with_metric("unique_makers", circ.unique_makers as f64)
                        .with_actors(circ.circular_makers),
                );
            }
        }
        report.screened.push(outcome);
    }

    let day_slices: Vec<&[Trade]> = traded_days.iter().map(|(_, t)| *t).collect();
    let persistent = persistent_makers(&day_slices);
    if let (false, Some(first), Some(last)) = (persistent.is_empty(), traded_days.first(), traded_days.last()) {
        report.events.push(
            DetectionEvent::new(token_id, EventKind::WashPersistent, day_start(first.0), day_end(last.0))
                .with_metric("screened_days", traded_days.len() as f64)
                .with_metric("persistent_makers", persistent.len() as f64)
                .with_actors(persistent),
        );
    }
    report.events.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    report
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LpiReport {
    pub events: Vec<DetectionEvent>,
    /// Phase-one days that trade data did not confirm.
    pub unconfirmed_days: Vec<i64>,
    /// Phase-one days with no trade data at all.
    pub missing_trade_days: Vec<i64>,
}

/// Phase one: a more-than-doubling close without a matching volume rise.
pub fn lpi_phase_one(prev: &DailyAggregate, cur: &DailyAggregate, cfg: &LpiConfig) -> bool {
    let price_jump = pct_change(prev.close, cur.close).exceeds(cfg.price_change_pct);
    let flat_volume = match pct_change(prev.volume_usd, cur.volume_usd) {
        PctChange::Finite(g) => g <= cfg.max_volume_growth_pct,
        PctChange::PosInfinity => false,
        PctChange::Undefined => true,
    };
    price_jump && (flat_volume || cur.volume_usd < cfg.low_volume_usd)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpiConfirmation {
    pub buy_ratio: f64,
    pub makers: BTreeSet<String>,
    pub confirmed: bool,
}

/// Phase two: buy-dominated volume from a handful of makers.
pub fn lpi_phase_two(day_trades: &[Trade], cfg: &LpiConfig) -> Option<LpiConfirmation> {
    let total: f64 = day_trades.iter().map(|t| t.amount_usd).sum();
    if total <= 0.0 {
        return None;
    }
    let buys: f64 = day_trades.iter().filter(|t| t.side == Side::Buy).map(|t| t.amount_usd).sum();
    let makers: BTreeSet<String> = day_trades.iter().map(|t| t.maker_id.clone()).collect();
    let buy_ratio = buys / total;
    Some(LpiConfirmation { buy_ratio, confirmed: buy_ratio >= cfg.min_buy_ratio && makers.len() <= cfg.max_makers, makers })
}

pub fn detect_lpi(token_id: &str, daily: &[DailyAggregate], trades: &[Trade], cfg: &LpiConfig) -> LpiReport {
    let by_day = trades_by_day(trades);
    let mut report = LpiReport::default();
    for w in daily.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        if !lpi_phase_one(prev, cur, cfg) {
            continue;
        }
        let Some(conf) = by_day.get(&cur.day).and_then(|t| lpi_phase_two(t, cfg)) else {
            report.missing_trade_days.push(cur.day);
            continue;
        };
        if !conf.confirmed {
            report.unconfirmed_days.push(cur.day);
            continue;
        }
        report.events.push(
            DetectionEvent::new(token_id, EventKind::Lpi, cur.start_ts(), cur.end_ts())
                .with_metric("price_change_pct", pct_change(prev.close, cur.close).as_f64())
                .with_metric("volume_usd", cur.volume_usd)
                .with_metric("buy_ratio", conf.buy_ratio)
                .with_metric("unique_makers", conf.makers.len() as f64)
                .with_actors(conf.makers),
        );
    }
    report
}
