//! Profit-extraction detectors: pump-and-dump on hourly bars, rug pulls on
//! daily aggregates, and the growth-to-extraction linkage statistic.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::config::{PumpDumpConfig, RugPullConfig};
use crate::error::{Error, Result};
use crate::model::{day_end, day_start, pct_change, DailyAggregate, DetectionEvent, EventKind, OhlcvBar, SECONDS_PER_HOUR};

/// Wilder's relative strength index.
///
/// The output is aligned with `closes`; the first `period` entries are
/// `None`. Averages are seeded with the simple mean of the first `period`
/// deltas and then smoothed as `(prev · (period − 1) + current) / period`.
/// Windows with losses only give 0, gains only give 100, and a flat
/// window gives 50.
pub fn rsi(closes: &[f64], period: usize) -> Result<Vec<Option<f64>>> {
    if period == 0 {
        return Err(Error::InvalidArgument("RSI period must be positive".into()));
    }
    if closes.len() <= period {
        return Err(Error::InsufficientData(format!(
            "RSI({period}) needs more than {period} closes, got {}",
            closes.len()
        )));
    }
    let p = period as f64;
    let split = |i: usize| {
        let d = closes[i] - closes[i - 1];
        (d.max(0.0), (-d).max(0.0))
    };
    let mut out = vec![None; closes.len()];
    let (mut gain, mut loss) = (1..=period).map(split).fold((0.0, 0.0), |(g, l), (dg, dl)| (g + dg, l + dl));
    gain /= p;
    loss /= p;
    out[period] = Some(rsi_value(gain, loss));
    for i in period + 1..closes.len() {
        let (g, l) = split(i);
        gain = (gain * (p - 1.0) + g) / p;
        loss = (loss * (p - 1.0) + l) / p;
        out[i] = Some(rsi_value(gain, loss));
    }
    Ok(out)
}

fn rsi_value(avg_gain: f64, avg_loss: f64) -> f64 {
    if avg_loss == 0.0 {
        if avg_gain == 0.0 {
            50.0
        } else {
            100.0
        }
    } else if avg_gain == 0.0 {
        0.0
    } else {
        (100.0 - 100.0 / (1.0 + avg_gain / avg_loss)).clamp(0.0, 100.0)
    }
}

/// Indices of local maxima of `closes`: strictly above the previous value
/// and above the next different value. A plateau reports its first bar.
pub fn local_maxima(closes: &[f64]) -> Vec<usize> {
    let mut peaks = Vec::new();
    let n = closes.len();
    let mut i = 1;
    while i < n {
        if closes[i] > closes[i - 1] {
            let mut j = i;
            while j + 1 < n && closes[j + 1] == closes[i] {
                j += 1;
            }
            if j + 1 < n && closes[j + 1] < closes[i] {
                peaks.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeakSkip {
    /// The 24-hour lookback before the peak holds no bars.
    NoLookback,
    /// Not enough bars before the start point for the volume comparison.
    NoVolumeBaseline,
    /// The post-dump volume window runs past the end of the series.
    IncompletePostDump,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PumpDumpReport {
    pub events: Vec<DetectionEvent>,
    pub skipped_peaks: Vec<(i64, PeakSkip)>,
    /// Series shorter than the minimum history; nothing was evaluated.
    pub insufficient_history: bool,
}

pub const MIN_PUMP_DUMP_HOURS: usize = 48;

/// Sums `volume_usd` over bars with `lo < ts <= hi`.
fn volume_between(bars: &[OhlcvBar], lo: i64, hi: i64) -> f64 {
    let a = bars.partition_point(|b| b.ts <= lo);
    let b = bars.partition_point(|b| b.ts <= hi);
    bars[a..b].iter().map(|b| b.volume_usd).sum()
}

pub fn detect_pump_dump(token_id: &str, bars: &[OhlcvBar], cfg: &PumpDumpConfig) -> PumpDumpReport {
    let mut report = PumpDumpReport::default();
    if bars.len() < MIN_PUMP_DUMP_HOURS.max(cfg.rsi_period + 1) {
        report.insufficient_history = true;
        return report;
    }
    let closes: Vec<f64> = bars.iter().map(|b| b.close).collect();
    let rsi = rsi(&closes, cfg.rsi_period).expect("length checked above");
    let hour = SECONDS_PER_HOUR;
    let last_ts = bars[bars.len() - 1].ts;

    let mut candidates: Vec<DetectionEvent> = Vec::new();
    for peak in local_maxima(&closes) {
        if !rsi[peak].is_some_and(|r| r > cfg.rsi_threshold) {
            continue;
        }
        let peak_bar = bars[peak];

        // Starting point: lowest close in the lookback, latest on ties.
        let lo = bars.partition_point(|b| b.ts < peak_bar.ts - cfg.lookback_hours * hour);
        let Some(start) = bars[lo..peak].iter().rev().min_by(|a, b| a.close.total_cmp(&b.close)).copied() else {
            report.skipped_peaks.push((peak_bar.ts, PeakSkip::NoLookback));
            continue;
        };
        if start.close <= 0.0 {
            continue;
        }
        let pump_pct = 100.0 * (peak_bar.close - start.close) / start.close;
        let span = peak_bar.ts - start.ts;
        if pump_pct <= cfg.pump_pct || span > cfg.max_pump_hours * hour {
            continue;
        }
        if start.ts - span < bars[0].ts {
            report.skipped_peaks.push((peak_bar.ts, PeakSkip::NoVolumeBaseline));
            continue;
        }
        let pump_volume = volume_between(bars, start.ts, peak_bar.ts);
        let baseline = volume_between(bars, start.ts - span, start.ts);
        let surge = pct_change(baseline, pump_volume);
        if !surge.exceeds(cfg.volume_surge_pct) {
            continue;
        }

        // Dump: deepest close inside the horizon after the peak, earliest on ties.
        let after = peak + 1;
        let until = bars.partition_point(|b| b.ts <= peak_bar.ts + cfg.dump_horizon_hours * hour);
        let Some(trough) = bars[after..until].iter().min_by(|a, b| a.close.total_cmp(&b.close)).copied() else {
            continue;
        };
        let dump_pct = 100.0 * (peak_bar.close - trough.close) / peak_bar.close;
        if dump_pct <= cfg.dump_pct {
            continue;
        }
        let post_end = trough.ts + cfg.post_dump_hours * hour;
        if post_end > last_ts {
            report.skipped_peaks.push((peak_bar.ts, PeakSkip::IncompletePostDump));
            continue;
        }
        let post_mean = volume_between(bars, trough.ts, post_end) / cfg.post_dump_hours as f64;
        let pump_mean = pump_volume / (span / hour) as f64;
        if post_mean >= cfg.post_dump_volume_ratio * pump_mean {
            continue;
        }
        candidates.push(
            DetectionEvent::new(token_id, EventKind::PumpAndDump, start.ts, trough.ts)
                .with_metric("pump_pct", pump_pct)
                .with_metric("dump_pct", dump_pct)
                .with_metric("pump_volume_surge_pct", surge.as_f64())
                .with_metric("peak_ts", peak_bar.ts as f64)
                .with_metric("post_dump_volume_ratio", post_mean / pump_mean),
        );
    }

    // Peaks are visited in time order; an overlapping later episode is dropped.
    for ev in candidates {
        match report.events.last() {
            Some(kept) if ev.window_start <= kept.window_end => {}
            _ => report.events.push(ev),
        }
    }
    report
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RugPullReport {
    pub events: Vec<DetectionEvent>,
    /// Crash days whose follow-up window runs past the end of the series.
    pub provisional_days: Vec<i64>,
    /// Crash days without a full baseline week before them.
    pub skipped_days: Vec<i64>,
    /// More than one confirmed rug pull for a single token.
    pub invariant_violation: bool,
}

pub fn detect_rug_pull(token_id: &str, daily: &[DailyAggregate], cfg: &RugPullConfig) -> RugPullReport {
    let mut report = RugPullReport::default();
    let w = cfg.window_days.max(1) as usize;
    let mean = |s: &[DailyAggregate]| s.iter().map(|d| d.volume_usd).sum::<f64>() / s.len() as f64;
    for d in 1..daily.len() {
        let Some(change) = pct_change(daily[d - 1].close, daily[d].close).finite() else {
            continue;
        };
        if change >= -cfg.drop_pct {
            continue;
        }
        if d < w {
            report.skipped_days.push(daily[d].day);
            continue;
        }
        if d + w >= daily.len() {
            report.provisional_days.push(daily[d].day);
            continue;
        }
        let prior = mean(&daily[d - w..d]);
        let following = mean(&daily[d + 1..=d + w]);
        if prior > 0.0 && following < cfg.volume_ratio * prior {
            report.events.push(
                DetectionEvent::new(token_id, EventKind::RugPull, day_start(daily[d].day), day_end(daily[d + w].day))
                    .with_metric("price_drop_pct", change)
                    .with_metric("volume_collapse_ratio", following / prior),
            );
        }
    }
    report.invariant_violation = report.events.len() > 1;
    report
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LinkageReport {
    pub extraction_token_count: usize,
    pub prior_growth_count: usize,
    pub prior_wash_count: usize,
    pub prior_lpi_count: usize,
    /// Percent of extraction tokens with earlier growth manipulation.
    pub ratio_pct: f64,
}

/// For every token with a pump-and-dump or rug pull, checks for a wash or
/// LPI event that ended before its earliest extraction began.
pub fn linkage<'a>(events: impl IntoIterator<Item = &'a DetectionEvent>) -> LinkageReport {
    let mut first_extraction: BTreeMap<&str, i64> = BTreeMap::new();
    let mut growth: BTreeMap<&str, Vec<&DetectionEvent>> = BTreeMap::new();
    for ev in events {
        if ev.kind.is_extraction() {
            let e = first_extraction.entry(&ev.token_id).or_insert(ev.window_start);
            *e = (*e).min(ev.window_start);
        } else if ev.kind.is_growth() {
            growth.entry(&ev.token_id).or_default().push(ev);
        }
    }
    let mut report = LinkageReport { extraction_token_count: first_extraction.len(), ..Default::default() };
    for (token, start) in &first_extraction {
        let prior: BTreeSet<EventKind> = growth
            .get(token)
            .into_iter()
            .flatten()
            .filter(|g| g.window_end < *start)
            .map(|g| g.kind)
            .collect();
        if prior.is_empty() {
            continue;
        }
        report.prior_growth_count += 1;
        if prior.iter().any(|k| k.is_wash()) {
            report.prior_wash_count += 1;
        }
        if prior.contains(&EventKind::Lpi) {
            report.prior_lpi_count += 1;
        }
    }
    if report.extraction_token_count > 0 {
        report.ratio_pct = 100.0 * report.prior_growth_count as f64 / report.extraction_token_count as f64;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::DetectorConfig;
    use crate::model::SECONDS_PER_DAY;

    fn day(d: i64, close: f64, volume: f64) -> DailyAggregate {
        DailyAggregate { day: d, open: close, close, volume_usd: volume, bar_count: 24 }
    }

    fn bars(closes: &[f64], volumes: &[f64]) -> Vec<OhlcvBar> {
        closes
            .iter()
            .zip(volumes)
            .enumerate()
            .map(|(i, (&c, &v))| OhlcvBar { ts: i as i64 * 3600, open: c, high: c, low: c, close: c, volume_usd: v })
            .collect()
    }

    #[test]
    fn rsi_monotone_series() {
        let up: Vec<f64> = (0..40).map(|i| 1.0 + i as f64).collect();
        let r = rsi(&up, 14).unwrap();
        assert!(r[..14].iter().all(Option::is_none));
        assert!(r[14..].iter().all(|v| *v == Some(100.0)));
        let down: Vec<f64> = up.iter().rev().copied().collect();
        assert!(rsi(&down, 14).unwrap()[14..].iter().all(|v| *v == Some(0.0)));
    }

    #[test]
    fn rsi_errors() {
        assert!(rsi(&[1.0; 14], 14).is_err());
        assert!(rsi(&[1.0; 20], 0).is_err());
        assert_eq!(rsi(&[1.0; 16], 14).unwrap()[15], Some(50.0));
    }

    #[test]
    fn rsi_textbook_values() {
        // 14-period example series used in Wilder-style RSI tutorials.
        let closes = [
            44.34, 44.09, 44.15, 43.61, 44.33, 44.83, 45.10, 45.42, 45.84, 46.08, 45.89, 46.03, 45.61, 46.28, 46.28,
            46.00, 46.03, 46.41, 46.22, 45.64,
        ];
        let r = rsi(&closes, 14).unwrap();
        assert!((r[14].unwrap() - 70.46).abs() < 0.01);
        assert!((r[15].unwrap() - 66.25).abs() < 0.01);
    }

    #[test]
    fn local_maxima_plateau() {
        assert_eq!(local_maxima(&[1.0, 3.0, 2.0]), [1]);
        assert_eq!(local_maxima(&[1.0, 3.0, 3.0, 3.0, 2.0]), [1]);
        assert!(local_maxima(&[1.0, 3.0, 3.0, 4.0]).is_empty());
        assert!(local_maxima(&[1.0, 2.0, 3.0]).is_empty());
    }

    /// 60 flat hours, a 6-hour ramp to `peak`, a 3-hour dump to `bottom`, then quiet.
    fn episode(peak: f64, bottom: f64, ramp_volume: f64) -> Vec<OhlcvBar> {
        let mut closes = vec![1.0; 60];
        let mut vols = vec![10.0; 60];
        for k in 1..=6 {
            closes.push(1.0 + (peak - 1.0) * k as f64 / 6.0);
            vols.push(ramp_volume);
        }
        for k in 1..=3 {
            closes.push(peak - (peak - bottom) * k as f64 / 3.0);
            vols.push(ramp_volume);
        }
        closes.extend(std::iter::repeat_n(bottom, 60));
        vols.extend(std::iter::repeat_n(10.0, 60));
        bars(&closes, &vols)
    }

    #[test]
    fn pump_dump_detects_clean_episode() {
        let cfg = DetectorConfig::default().pnd;
        let r = detect_pump_dump("t", &episode(2.0, 1.0, 200.0), &cfg);
        assert_eq!(r.events.len(), 1);
        let ev = &r.events[0];
        assert!((ev.metrics["pump_pct"] - 100.0).abs() < 1e-9);
        assert!((ev.metrics["dump_pct"] - 50.0).abs() < 1e-9);
        assert_eq!(ev.metrics["peak_ts"], (65 * 3600) as f64);
        assert!(ev.window_start < ev.metrics["peak_ts"] as i64 && (ev.metrics["peak_ts"] as i64) < ev.window_end);
        assert!(ev.has_required_metrics());
    }

    #[test]
    fn pump_dump_price_arm_is_strict() {
        let cfg = DetectorConfig::default().pnd;
        assert!(detect_pump_dump("t", &episode(1.45, 0.9, 1000.0), &cfg).events.is_empty());
        assert!(detect_pump_dump("t", &episode(1.5, 0.9, 1000.0), &cfg).events.is_empty());
    }

    #[test]
    fn pump_dump_needs_volume_surge_and_dump() {
        let cfg = DetectorConfig::default().pnd;
        // 6-hour window volume 6 × 50 = 300 vs baseline 6 × 10 = 60: only 5×.
        assert!(detect_pump_dump("t", &episode(2.0, 1.0, 50.0), &cfg).events.is_empty());
        // Price only gives back 25%.
        assert!(detect_pump_dump("t", &episode(2.0, 1.5, 200.0), &cfg).events.is_empty());
    }

    #[test]
    fn pump_dump_short_history() {
        let cfg = DetectorConfig::default().pnd;
        let r = detect_pump_dump("t", &bars(&[1.0; 47], &[1.0; 47]), &cfg);
        assert!(r.insufficient_history);
    }

    #[test]
    fn pump_dump_skips_incomplete_post_window() {
        let cfg = DetectorConfig::default().pnd;
        let mut b = episode(2.0, 1.0, 200.0);
        b.truncate(60 + 6 + 3 + 10);
        let r = detect_pump_dump("t", &b, &cfg);
        assert!(r.events.is_empty());
        assert_eq!(r.skipped_peaks, [(65 * 3600, PeakSkip::IncompletePostDump)]);
    }

    fn rug_series(crash_close: f64, after_volume: f64) -> Vec<DailyAggregate> {
        let mut d: Vec<_> = (0..10).map(|i| day(i, 100.0, 5000.0)).collect();
        d.push(day(10, crash_close, 9000.0));
        d.extend((11..20).map(|i| day(i, crash_close, after_volume)));
        d
    }

    #[test]
    fn rug_pull_examples() {
        let cfg = DetectorConfig::default().rug;
        let r = detect_rug_pull("t", &rug_series(0.5, 10.0), &cfg);
        assert_eq!(r.events.len(), 1);
        let ev = &r.events[0];
        assert!((ev.metrics["price_drop_pct"] + 99.5).abs() < 1e-9);
        assert!((ev.metrics["volume_collapse_ratio"] - 0.002).abs() < 1e-12);
        assert_eq!((ev.window_start, ev.window_end), (10 * SECONDS_PER_DAY, 18 * SECONDS_PER_DAY - 1));

        assert!(detect_rug_pull("t", &rug_series(1.0, 10.0), &cfg).events.is_empty());
        assert!(detect_rug_pull("t", &rug_series(0.1, 2500.0), &cfg).events.is_empty());
    }

    #[test]
    fn rug_pull_provisional_and_skipped() {
        let cfg = DetectorConfig::default().rug;
        let mut d = rug_series(0.5, 10.0);
        d.truncate(15);
        let r = detect_rug_pull("t", &d, &cfg);
        assert!(r.events.is_empty());
        assert_eq!(r.provisional_days, [10]);

        let early: Vec<_> = [day(0, 100.0, 10.0), day(1, 0.5, 10.0)].into_iter().chain((2..20).map(|i| day(i, 0.5, 0.0))).collect();
        assert_eq!(detect_rug_pull("t", &early, &cfg).skipped_days, [1]);
    }

    fn ev(token: &str, kind: EventKind, start_day: i64, end_day: i64) -> DetectionEvent {
        DetectionEvent::new(token, kind, day_start(start_day), day_end(end_day))
    }

    #[test]
    fn linkage_ordering() {
        let r = linkage(&[ev("a", EventKind::WashZeroRisk, 10, 12), ev("a", EventKind::PumpAndDump, 40, 40)]);
        assert_eq!((r.extraction_token_count, r.prior_growth_count), (1, 1));
        let r = linkage(&[ev("a", EventKind::PumpAndDump, 40, 40), ev("a", EventKind::WashZeroRisk, 50, 50)]);
        assert_eq!((r.extraction_token_count, r.prior_growth_count), (1, 0));
        assert_eq!(linkage(&[]).ratio_pct, 0.0);
    }

    #[test]
    fn linkage_composition() {
        let mut events = Vec::new();
        for i in 0..60 {
            let t = format!("tok{i}");
            events.push(ev(&t, EventKind::PumpAndDump, 40, 41));
            if i < 34 {
                events.push(ev(&t, EventKind::WashCircular, 3, 3));
            } else if i < 37 {
                events.push(ev(&t, EventKind::Lpi, 5, 5));
            } else {
                events.push(ev(&t, EventKind::AnomalyTopHolders, 1, 1));
            }
        }
        let r = linkage(&events);
        assert_eq!(r.prior_growth_count, 37);
        assert_eq!((r.prior_wash_count, r.prior_lpi_count), (34, 3));
        assert!((r.ratio_pct - 61.67).abs() < 0.05);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rsi_is_bounded(closes in proptest::collection::vec(0.0f64..1e6, 16..200), period in 1usize..15) {
                for v in rsi(&closes, period).unwrap().into_iter().flatten() {
                    prop_assert!((0.0..=100.0).contains(&v));
                }
            }

            #[test]
            fn linkage_ignores_labels(seed in proptest::collection::vec((0u8..5, 0u8..4, 0i64..60), 1..40)) {
                let kinds = [EventKind::WashZeroRisk, EventKind::Lpi, EventKind::PumpAndDump, EventKind::RugPull];
                let events: Vec<_> = seed.iter().map(|&(t, k, d)| ev(&format!("t{t}"), kinds[k as usize], d, d + 1)).collect();
                let renamed: Vec<_> = events.iter().map(|e| DetectionEvent { token_id: format!("x-{}", e.token_id), ..e.clone() }).collect();
                prop_assert_eq!(linkage(&events), linkage(&renamed));
            }
        }
    }
}
