//! Return analysis over a fixed window, manipulation prevalence among
//! high-return tokens, and report rendering.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ReturnsConfig;
use crate::error::{Error, Result};
use crate::extraction::{linkage, LinkageReport};
use crate::ingest::Dataset;
use crate::model::{pct_change, Chain, DetectionEvent, EventKind, ReturnCategory, ReturnRecord, SECONDS_PER_DAY, SECONDS_PER_HOUR};
use crate::pipeline::write_events_jsonl;

/// Return and category for one token.
///
/// Missing when either price is absent or the start price is not positive.
/// A zero return splits on window volume into Inactive and StableActive.
pub fn classify_return(
    p_start: Option<f64>,
    p_end: Option<f64>,
    window_volume_usd: f64,
    high_return_pct: f64,
) -> (Option<f64>, ReturnCategory) {
    let (Some(start), Some(end)) = (p_start, p_end) else {
        return (None, ReturnCategory::Missing);
    };
    let Some(r) = pct_change(start, end).finite() else {
        return (None, ReturnCategory::Missing);
    };
    let category = if r < 0.0 {
        ReturnCategory::Negative
    } else if r == 0.0 && window_volume_usd == 0.0 {
        ReturnCategory::Inactive
    } else if r == 0.0 {
        ReturnCategory::StableActive
    } else if r > high_return_pct {
        ReturnCategory::HighReturn
    } else {
        ReturnCategory::Positive
    };
    (Some(r), category)
}

/// Price observations `(time, price)` for a token, oldest first.
///
/// A bar's close is observed when the bar ends; the first bar also
/// contributes its open at its start. Tokens without bars fall back to
/// economics records.
fn price_points(dataset: &Dataset, token_id: &str) -> Vec<(i64, f64)> {
    let bars = dataset.bars(token_id);
    match bars.first() {
        Some(first) => std::iter::once((first.ts, first.open))
            .chain(bars.iter().map(|b| (b.ts + SECONDS_PER_HOUR, b.close)))
            .collect(),
        None => dataset.economics.get(token_id).into_iter().flatten().map(|e| (e.ts, e.price_usd)).collect(),
    }
}

/// Returns over `(t0, t0 + window]` for every token in `dataset`.
///
/// `p_start` is the latest price observed at or before `t0`; `p_end` the
/// latest observed inside the window. Window volume sums the bars that lie
/// entirely inside the window.
pub fn compute_returns(dataset: &Dataset, t0: i64, cfg: &ReturnsConfig) -> Vec<ReturnRecord> {
    let t1 = t0 + cfg.window_days * SECONDS_PER_DAY;
    dataset
        .tokens
        .values()
        .map(|token| {
            let points = price_points(dataset, &token.token_id);
            let p_start = points.iter().rev().find(|(t, _)| *t <= t0).map(|p| p.1);
            let p_end = points.iter().rev().find(|(t, _)| *t > t0 && *t <= t1).map(|p| p.1);
            let volume: f64 = dataset
                .bars(&token.token_id)
                .iter()
                .filter(|b| b.ts >= t0 && b.ts + SECONDS_PER_HOUR <= t1)
                .map(|b| b.volume_usd)
                .sum();
            let (return_pct, category) = classify_return(p_start, p_end, volume, cfg.high_return_pct);
            ReturnRecord {
                token_id: token.token_id.clone(),
                chain: token.chain,
                p_start,
                p_end,
                return_pct,
                window_volume_usd: volume,
                category,
            }
        })
        .collect()
}

pub const RETURNS_HEADER: [&str; 7] = ["token_id", "chain", "p_start", "p_end", "return_pct", "category", "window_volume_usd"];

pub fn write_returns_csv(records: &[ReturnRecord], path: &Path) -> Result<()> {
    let err = |e: csv::Error| Error::Csv { path: path.to_owned(), message: e.to_string() };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(RETURNS_HEADER).map_err(err)?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in records {
        w.write_record([
            r.token_id.as_str(),
            r.chain.as_str(),
            &opt(r.p_start),
            &opt(r.p_end),
            &opt(r.return_pct),
            r.category.as_str(),
            &r.window_volume_usd.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|source| Error::Write { path: path.to_owned(), source })
}

pub fn read_returns_csv(path: &Path) -> Result<Vec<ReturnRecord>> {
    let err = |message: String| Error::Csv { path: path.to_owned(), message };
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Read { path: path.to_owned(), source },
        other => err(format!("{other:?}")),
    })?;
    let headers = reader.headers().map_err(|e| err(e.to_string()))?.clone();
    let mut idx = [0usize; 7];
    for (slot, name) in idx.iter_mut().zip(RETURNS_HEADER) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn { path: path.to_owned(), column: name.to_owned() })?;
    }
    let mut out = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let row = line + 2;
        let field = |i: usize| rec.get(idx[i]).unwrap_or("").trim();
        let opt = |i: usize| -> Result<Option<f64>> {
            match field(i) {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| err(format!("row {row}: bad number `{s}`"))),
            }
        };
        out.push(ReturnRecord {
            token_id: field(0).to_owned(),
            chain: field(1).parse().map_err(|e: String| err(format!("row {row}: {e}")))?,
            p_start: opt(2)?,
            p_end: opt(3)?,
            return_pct: opt(4)?,
            category: field(5).parse().map_err(|e: String| err(format!("row {row}: {e}")))?,
            window_volume_usd: opt(6)?.unwrap_or(0.0),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub missing: usize,
    pub negative: usize,
    pub inactive: usize,
    pub stable_active: usize,
    /// Includes high-return tokens.
    pub positive: usize,
    pub high_return: usize,
}

impl CategoryCounts {
    pub fn tally(records: &[ReturnRecord]) -> Self {
        let mut c = Self::default();
        for r in records {
            match r.category {
                ReturnCategory::Missing => c.missing += 1,
                ReturnCategory::Negative => c.negative += 1,
                ReturnCategory::Inactive => c.inactive += 1,
                ReturnCategory::StableActive => c.stable_active += 1,
                ReturnCategory::Positive => c.positive += 1,
                ReturnCategory::HighReturn => {
                    c.positive += 1;
                    c.high_return += 1;
                }
            }
        }
        c
    }
}

/// Token counts per manipulation family.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KindCounts {
    pub wash: usize,
    pub lpi: usize,
    pub anomaly: usize,
    pub pump_and_dump: usize,
    pub rug_pull: usize,
    pub per_event_kind: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Overlaps {
    pub wash_lpi: usize,
    pub wash_anomaly: usize,
    pub lpi_anomaly: usize,
    pub wash_lpi_anomaly: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainBreakdown {
    pub chain: Chain,
    pub listed: usize,
    pub with_price: usize,
    pub high_return: usize,
    /// High-return tokens on this chain with at least one event.
    pub manipulated: usize,
    pub manipulated_pct_of_high_return: f64,
    pub manipulated_pct_of_listed: f64,
    pub manipulated_pct_of_with_price: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PrevalenceReport {
    pub universe: usize,
    pub with_price: usize,
    pub high_return: usize,
    pub categories: CategoryCounts,
    pub counts: KindCounts,
    pub overlaps: Overlaps,
    pub union: usize,
    pub union_pct: f64,
    /// Linkage among high-return tokens.
    pub linkage: LinkageReport,
    pub per_chain: Vec<ChainBreakdown>,
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Manipulation prevalence over the high-return tokens of `returns`.
pub fn prevalence(returns: &[ReturnRecord], events: &[DetectionEvent]) -> PrevalenceReport {
    let high: BTreeSet<&str> =
        returns.iter().filter(|r| r.category == ReturnCategory::HighReturn).map(|r| r.token_id.as_str()).collect();
    let in_scope: Vec<&DetectionEvent> = events.iter().filter(|e| high.contains(e.token_id.as_str())).collect();

    let tokens_where = |pred: &dyn Fn(EventKind) -> bool| -> BTreeSet<&str> {
        in_scope.iter().filter(|e| pred(e.kind)).map(|e| e.token_id.as_str()).collect()
    };
    let wash = tokens_where(&|k| k.is_wash());
    let lpi = tokens_where(&|k| k == EventKind::Lpi);
    let anomaly = tokens_where(&|k| k.is_anomaly());
    let pnd = tokens_where(&|k| k == EventKind::PumpAndDump);
    let rug = tokens_where(&|k| k == EventKind::RugPull);
    let union: BTreeSet<&str> = in_scope.iter().map(|e| e.token_id.as_str()).collect();

    let per_event_kind = EventKind::ALL
        .into_iter()
        .map(|k| (k.as_str().to_owned(), tokens_where(&|x| x == k).len()))
        .collect();
    let both = |a: &BTreeSet<&str>, b: &BTreeSet<&str>| a.intersection(b).count();

    let per_chain = Chain::ALL
        .into_iter()
        .filter_map(|chain| {
            let on_chain: Vec<&ReturnRecord> = returns.iter().filter(|r| r.chain == chain).collect();
            if on_chain.is_empty() {
                return None;
            }
            let listed = on_chain.len();
            let with_price = on_chain.iter().filter(|r| r.category != ReturnCategory::Missing).count();
            let high_return = on_chain.iter().filter(|r| r.category == ReturnCategory::HighReturn).count();
            let manipulated = on_chain.iter().filter(|r| union.contains(r.token_id.as_str())).count();
            Some(ChainBreakdown {
                chain,
                listed,
                with_price,
                high_return,
                manipulated,
                manipulated_pct_of_high_return: pct(manipulated, high_return),
                manipulated_pct_of_listed: pct(manipulated, listed),
                manipulated_pct_of_with_price: pct(manipulated, with_price),
            })
        })
        .collect();

    PrevalenceReport {
        universe: returns.len(),
        with_price: returns.iter().filter(|r| r.category != ReturnCategory::Missing).count(),
        high_return: high.len(),
        categories: CategoryCounts::tally(returns),
        counts: KindCounts {
            wash: wash.len(),
            lpi: lpi.len(),
            anomaly: anomaly.len(),
            pump_and_dump: pnd.len(),
            rug_pull: rug.len(),
            per_event_kind,
        },
        overlaps: Overlaps {
            wash_lpi: both(&wash, &lpi),
            wash_anomaly: both(&wash, &anomaly),
            lpi_anomaly: both(&lpi, &anomaly),
            wash_lpi_anomaly: wash.iter().filter(|t| lpi.contains(*t) && anomaly.contains(*t)).count(),
        },
        union: union.len(),
        union_pct: pct(union.len(), high.len()),
        linkage: linkage(in_scope.iter().copied()),
        per_chain,
    }
}

/// `(statistic, value)` rows of `summary.csv`.
pub fn summary_rows(report: &PrevalenceReport) -> Vec<(String, f64)> {
    let mut rows: Vec<(String, f64)> = Vec::new();
    let mut push = |name: &str, v: f64| rows.push((name.to_owned(), v));
    let c = &report.categories;
    push("universe_tokens", report.universe as f64);
    push("tokens_with_price", report.with_price as f64);
    push("category_missing", c.missing as f64);
    push("category_negative", c.negative as f64);
    push("category_inactive", c.inactive as f64);
    push("category_stable_active", c.stable_active as f64);
    push("category_positive", c.positive as f64);
    push("high_return_tokens", report.high_return as f64);
    push("wash_trading_tokens", report.counts.wash as f64);
    push("lpi_tokens", report.counts.lpi as f64);
    push("anomaly_tokens", report.counts.anomaly as f64);
    push("pump_and_dump_tokens", report.counts.pump_and_dump as f64);
    push("rug_pull_tokens", report.counts.rug_pull as f64);
    for (kind, n) in &report.counts.per_event_kind {
        push(&format!("event_{kind}_tokens"), *n as f64);
    }
    push("wash_lpi_tokens", report.overlaps.wash_lpi as f64);
    push("wash_anomaly_tokens", report.overlaps.wash_anomaly as f64);
    push("lpi_anomaly_tokens", report.overlaps.lpi_anomaly as f64);
    push("wash_lpi_anomaly_tokens", report.overlaps.wash_lpi_anomaly as f64);
    push("manipulated_union_tokens", report.union as f64);
    push("manipulated_union_pct", report.union_pct);
    let l = &report.linkage;
    push("extraction_tokens", l.extraction_token_count as f64);
    push("extraction_prior_growth_tokens", l.prior_growth_count as f64);
    push("extraction_prior_wash_tokens", l.prior_wash_count as f64);
    push("extraction_prior_lpi_tokens", l.prior_lpi_count as f64);
    push("extraction_prior_growth_pct", l.ratio_pct);
    for ch in &report.per_chain {
        let name = ch.chain.as_str();
        push(&format!("chain_{name}_listed"), ch.listed as f64);
        push(&format!("chain_{name}_with_price"), ch.with_price as f64);
        push(&format!("chain_{name}_high_return"), ch.high_return as f64);
        push(&format!("chain_{name}_manipulated"), ch.manipulated as f64);
        push(&format!("chain_{name}_manipulated_pct_of_high_return"), ch.manipulated_pct_of_high_return);
        push(&format!("chain_{name}_manipulated_pct_of_listed"), ch.manipulated_pct_of_listed);
        push(&format!("chain_{name}_manipulated_pct_of_with_price"), ch.manipulated_pct_of_with_price);
    }
    rows
}

/// Writes `report.json`, `events.jsonl` and `summary.csv` into `dir`.
pub fn render_report(report: &PrevalenceReport, events: &[DetectionEvent], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Write { path: dir.to_owned(), source })?;

    // Value maps are BTreeMaps, so keys come out sorted.
    let json = serde_json::to_value(report)?;
    let path = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(&json)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|source| Error::Write { path: path.clone(), source })?;

    write_events_jsonl(events, &dir.join("events.jsonl"))?;

    let path = dir.join("summary.csv");
    let err = |source| Error::Write { path: path.clone(), source };
    let mut out = BufWriter::new(File::create(&path).map_err(err)?);
    writeln!(out, "statistic,value").map_err(err)?;
    for (name, value) in summary_rows(report) {
        writeln!(out, "{name},{value:.4}").map_err(err)?;
    }
    out.flush().map_err(err)
}
