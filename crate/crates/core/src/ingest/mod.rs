//! Fixture loading, validation and CSV writing.
//!
//! Every file is UTF-8 CSV with a header row. Columns are located by header
//! name, so extra columns are ignored and column order is free. A row that
//! fails validation is dropped and counted under a [`RejectReason`]; a
//! missing required column fails the whole load.

mod address;
mod write;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use address::{validate_address, AddressError, AssumeDeployed, DeploymentVerifier};
pub use write::{write_dataset, write_labels};

use crate::error::{Error, Result};
use crate::model::{
    BarViolation, Chain, EventKind, HolderSnapshot, OhlcvBar, Side, TokenEconomics, TokenRecord, Trade,
};

pub const TOKENS_HEADER: [&str; 7] = ["token_id", "chain", "address", "name", "symbol", "created_at", "sources"];
pub const OHLCV_HEADER: [&str; 7] = ["token_id", "ts", "open", "high", "low", "close", "volume_usd"];
pub const TRADES_HEADER: [&str; 5] = ["token_id", "ts", "maker_id", "side", "amount_usd"];
pub const HOLDERS_HEADER: [&str; 7] = [
    "token_id",
    "ts",
    "top10_share",
    "bundle_buy_share",
    "fresh_address_share",
    "airdrop_share",
    "honeypot",
];
pub const ECONOMICS_HEADER: [&str; 6] =
    ["token_id", "ts", "price_usd", "circulating_supply", "market_cap_usd", "liquidity_usd"];
pub const LABELS_HEADER: [&str; 4] = ["token_id", "kind", "window_start", "window_end"];

/// A validated, deduplicated, time-sorted collection of per-token series.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub tokens: BTreeMap<String, TokenRecord>,
    pub ohlcv: BTreeMap<String, Vec<OhlcvBar>>,
    pub trades: BTreeMap<String, Vec<Trade>>,
    pub holders: BTreeMap<String, Vec<HolderSnapshot>>,
    pub economics: BTreeMap<String, Vec<TokenEconomics>>,
}

impl Dataset {
    pub fn bars(&self, token_id: &str) -> &[OhlcvBar] {
        self.ohlcv.get(token_id).map_or(&[], Vec::as_slice)
    }

    pub fn trades(&self, token_id: &str) -> &[Trade] {
        self.trades.get(token_id).map_or(&[], Vec::as_slice)
    }

    pub fn holders(&self, token_id: &str) -> &[HolderSnapshot] {
        self.holders.get(token_id).map_or(&[], Vec::as_slice)
    }

    /// Most recent economics record; later timestamps win over earlier ones.
    pub fn latest_economics(&self, token_id: &str) -> Option<&TokenEconomics> {
        self.economics.get(token_id).and_then(|v| v.last())
    }
}

#[derive(Debug, Clone, Default)]
pub struct DatasetPaths {
    pub tokens: PathBuf,
    pub ohlcv: Option<PathBuf>,
    pub trades: Option<PathBuf>,
    pub holders: Option<PathBuf>,
    pub economics: Option<PathBuf>,
}

impl DatasetPaths {
    /// Standard file names inside a directory; absent optional files are skipped.
    pub fn in_dir(dir: &Path) -> Self {
        let opt = |name: &str| {
            let p = dir.join(name);
            p.exists().then_some(p)
        };
        Self {
            tokens: dir.join("tokens.csv"),
            ohlcv: opt("ohlcv.csv"),
            trades: opt("trades.csv"),
            holders: opt("holders.csv"),
            economics: opt("economics.csv"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FileKind {
    Tokens,
    Ohlcv,
    Trades,
    Holders,
    Economics,
    Labels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RejectReason {
    Malformed,
    UnknownChain,
    Address(AddressError),
    NotDeployed,
    NonPositiveCreatedAt,
    UnknownToken,
    NegativeValue,
    InvertedOhlc,
    UnalignedTimestamp,
    DuplicateTimestamp,
    BadSide,
    NonPositiveAmount,
    ShareOutOfRange,
    MarketCapMismatch,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::Malformed => "malformed",
            RejectReason::UnknownChain => "unknown-chain",
            RejectReason::Address(AddressError::BadLength) => "address-bad-length",
            RejectReason::Address(AddressError::BadPrefix) => "address-bad-prefix",
            RejectReason::Address(AddressError::BadCharset) => "address-bad-charset",
            RejectReason::Address(AddressError::BadDecode) => "address-bad-decode",
            RejectReason::NotDeployed => "not-deployed",
            RejectReason::NonPositiveCreatedAt => "non-positive-created-at",
            RejectReason::UnknownToken => "unknown-token",
            RejectReason::NegativeValue => "negative-value",
            RejectReason::InvertedOhlc => "inverted-ohlc",
            RejectReason::UnalignedTimestamp => "unaligned-timestamp",
            RejectReason::DuplicateTimestamp => "duplicate-timestamp",
            RejectReason::BadSide => "bad-side",
            RejectReason::NonPositiveAmount => "non-positive-amount",
            RejectReason::ShareOutOfRange => "share-out-of-range",
            RejectReason::MarketCapMismatch => "market-cap-mismatch",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for RejectReason {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FileReport {
    pub rows: usize,
    pub accepted: usize,
    pub rejected: BTreeMap<RejectReason, usize>,
}

impl FileReport {
    fn reject(&mut self, reason: RejectReason) {
        *self.rejected.entry(reason).or_default() += 1;
    }

    pub fn rejected_total(&self) -> usize {
        self.rejected.values().sum()
    }

    pub fn count(&self, reason: RejectReason) -> usize {
        self.rejected.get(&reason).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadReport {
    pub files: BTreeMap<FileKind, FileReport>,
    /// Token rows folded into an earlier row with the same token_id.
    pub merged_duplicate_tokens: usize,
}

impl LoadReport {
    pub fn file(&self, kind: FileKind) -> FileReport {
        self.files.get(&kind).cloned().unwrap_or_default()
    }

    pub fn rejected_total(&self) -> usize {
        self.files.values().map(FileReport::rejected_total).sum()
    }
}

/// Reads a CSV file and resolves `columns` to indices in its header.
struct Table {
    path: PathBuf,
    reader: csv::Reader<BufReader<File>>,
    index: Vec<usize>,
}

impl Table {
    fn open(path: &Path, columns: &[&str]) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::Read { path: path.to_owned(), source })?;
        let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(BufReader::new(file));
        let headers = reader
            .headers()
            .map_err(|e| Error::Csv { path: path.to_owned(), message: e.to_string() })?
            .clone();
        let index = columns
            .iter()
            .map(|col| {
                headers
                    .iter()
                    .position(|h| h.trim() == *col)
                    .ok_or_else(|| Error::MissingColumn { path: path.to_owned(), column: (*col).to_owned() })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { path: path.to_owned(), reader, index })
    }

    /// Calls `f` with the selected fields of every row; `None` marks a row
    /// that could not be decoded or is missing fields.
    fn for_each_row(mut self, mut f: impl FnMut(Option<&[&str]>)) -> Result<()> {
        let mut record = csv::StringRecord::new();
        loop {
            match self.reader.read_record(&mut record) {
                Ok(false) => return Ok(()),
                Ok(true) => {
                    let fields: Option<Vec<&str>> =
                        self.index.iter().map(|&i| record.get(i).map(str::trim)).collect();
                    f(fields.as_deref());
                }
                Err(e) if matches!(e.kind(), csv::ErrorKind::Utf8 { .. }) => f(None),
                Err(e) => return Err(Error::Csv { path: self.path.clone(), message: e.to_string() }),
            }
        }
    }
}

fn num(s: &str) -> std::result::Result<f64, RejectReason> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(RejectReason::Malformed),
    }
}

fn opt_num(s: &str) -> std::result::Result<Option<f64>, RejectReason> {
    if s.is_empty() {
        Ok(None)
    } else {
        num(s).map(Some)
    }
}

fn int(s: &str) -> std::result::Result<i64, RejectReason> {
    s.parse::<i64>().map_err(|_| RejectReason::Malformed)
}

fn parse_token(f: &[&str]) -> std::result::Result<TokenRecord, RejectReason> {
    let token_id = f[0];
    if token_id.is_empty() {
        return Err(RejectReason::Malformed);
    }
    let chain: Chain = f[1].parse().map_err(|_| RejectReason::UnknownChain)?;
    validate_address(chain, f[2]).map_err(RejectReason::Address)?;
    let created_at = int(f[5])?;
    if created_at <= 0 {
        return Err(RejectReason::NonPositiveCreatedAt);
    }
    let sources = f[6].split('|').map(str::trim).filter(|s| !s.is_empty()).map(str::to_owned).collect();
    Ok(TokenRecord {
        token_id: token_id.to_owned(),
        chain,
        address: f[2].to_owned(),
        name: f[3].to_owned(),
        symbol: f[4].to_owned(),
        created_at,
        sources,
    })
}

fn parse_bar(f: &[&str]) -> std::result::Result<OhlcvBar, RejectReason> {
    let bar = OhlcvBar {
        ts: int(f[1])?,
        open: num(f[2])?,
        high: num(f[3])?,
        low: num(f[4])?,
        close: num(f[5])?,
        volume_usd: num(f[6])?,
    };
    bar.validate().map_err(|v| match v {
        BarViolation::NonFinite => RejectReason::Malformed,
        BarViolation::Negative => RejectReason::NegativeValue,
        BarViolation::InvertedRange => RejectReason::InvertedOhlc,
        BarViolation::Unaligned => RejectReason::UnalignedTimestamp,
    })?;
    Ok(bar)
}

fn parse_trade(f: &[&str]) -> std::result::Result<Trade, RejectReason> {
    let ts = int(f[1])?;
    if f[2].is_empty() {
        return Err(RejectReason::Malformed);
    }
    let side: Side = f[3].parse().map_err(|_| RejectReason::BadSide)?;
    let amount_usd = num(f[4])?;
    if amount_usd <= 0.0 {
        return Err(RejectReason::NonPositiveAmount);
    }
    Ok(Trade { ts, maker_id: f[2].to_owned(), side, amount_usd })
}

fn parse_holder(f: &[&str]) -> std::result::Result<HolderSnapshot, RejectReason> {
    let honeypot = match f[6] {
        "0" | "false" => false,
        "1" | "true" => true,
        _ => return Err(RejectReason::Malformed),
    };
    let snap = HolderSnapshot {
        ts: int(f[1])?,
        top10_share: num(f[2])?,
        bundle_buy_share: num(f[3])?,
        fresh_address_share: num(f[4])?,
        airdrop_share: num(f[5])?,
        honeypot,
    };
    if !snap.shares_in_range() {
        return Err(RejectReason::ShareOutOfRange);
    }
    Ok(snap)
}

fn parse_economics(f: &[&str]) -> std::result::Result<TokenEconomics, RejectReason> {
    let rec = TokenEconomics {
        ts: int(f[1])?,
        price_usd: num(f[2])?,
        circulating_supply: opt_num(f[3])?,
        market_cap_usd: opt_num(f[4])?,
        liquidity_usd: opt_num(f[5])?,
    };
    let values = [Some(rec.price_usd), rec.circulating_supply, rec.market_cap_usd, rec.liquidity_usd];
    if values.iter().flatten().any(|&v| v < 0.0) {
        return Err(RejectReason::NegativeValue);
    }
    if !rec.market_cap_consistent() {
        return Err(RejectReason::MarketCapMismatch);
    }
    Ok(rec)
}

fn load_tokens(
    path: &Path,
    verifier: &dyn DeploymentVerifier,
) -> Result<(BTreeMap<String, TokenRecord>, FileReport, usize)> {
    let mut tokens: BTreeMap<String, TokenRecord> = BTreeMap::new();
    let mut report = FileReport::default();
    let mut merged = 0;
    Table::open(path, &TOKENS_HEADER)?.for_each_row(|row| {
        report.rows += 1;
        let parsed = row.ok_or(RejectReason::Malformed).and_then(parse_token).and_then(|t| {
            if verifier.is_deployed(t.chain, &t.address) {
                Ok(t)
            } else {
                Err(RejectReason::NotDeployed)
            }
        });
        match parsed {
            Err(reason) => report.reject(reason),
            Ok(token) => {
                report.accepted += 1;
                match tokens.get_mut(&token.token_id) {
                    Some(existing) => {
                        merged += 1;
                        existing.sources.extend(token.sources);
                        existing.created_at = existing.created_at.min(token.created_at);
                    }
                    None => {
                        tokens.insert(token.token_id.clone(), token);
                    }
                }
            }
        }
    })?;
    Ok((tokens, report, merged))
}

/// Loads a per-token series file, dropping rows for unknown tokens and
/// sorting each series by timestamp (stable, so file order breaks ties).
fn load_series<T>(
    path: &Path,
    header: &[&str],
    known: &BTreeSet<&str>,
    parse: fn(&[&str]) -> std::result::Result<T, RejectReason>,
) -> Result<(BTreeMap<String, Vec<T>>, FileReport)> {
    let mut series: HashMap<String, Vec<T>> = HashMap::new();
    let mut report = FileReport::default();
    Table::open(path, header)?.for_each_row(|row| {
        report.rows += 1;
        let Some(fields) = row else {
            report.reject(RejectReason::Malformed);
            return;
        };
        let token_id = fields[0];
        if !known.contains(token_id) {
            report.reject(RejectReason::UnknownToken);
            return;
        }
        match parse(fields) {
            Err(reason) => report.reject(reason),
            Ok(item) => match series.get_mut(token_id) {
                Some(v) => v.push(item),
                None => {
                    series.insert(token_id.to_owned(), vec![item]);
                }
            },
        }
    })?;
    report.accepted = report.rows - report.rejected_total();
    Ok((series.into_iter().collect(), report))
}

fn sort_by_ts<T>(series: &mut BTreeMap<String, Vec<T>>, ts: fn(&T) -> i64) {
    for v in series.values_mut() {
        v.sort_by_key(ts);
    }
}

/// Keeps the first of several items sharing a timestamp; returns how many were dropped.
fn drop_duplicate_ts<T>(series: &mut BTreeMap<String, Vec<T>>, ts: fn(&T) -> i64) -> usize {
    let mut dropped = 0;
    for v in series.values_mut() {
        let before = v.len();
        v.dedup_by(|b, a| ts(a) == ts(b));
        dropped += before - v.len();
    }
    dropped
}

/// Keeps the last of several items sharing a timestamp.
fn keep_last_per_ts<T>(series: &mut BTreeMap<String, Vec<T>>, ts: fn(&T) -> i64) {
    for v in series.values_mut() {
        let mut out: Vec<T> = Vec::with_capacity(v.len());
        for item in v.drain(..) {
            match out.last_mut() {
                Some(prev) if ts(prev) == ts(&item) => *prev = item,
                _ => out.push(item),
            }
        }
        *v = out;
    }
}

pub fn load_dataset(paths: &DatasetPaths) -> Result<(Dataset, LoadReport)> {
    load_dataset_with(paths, &AssumeDeployed)
}

pub fn load_dataset_with(
    paths: &DatasetPaths,
    verifier: &dyn DeploymentVerifier,
) -> Result<(Dataset, LoadReport)> {
    let (tokens, token_report, merged) = load_tokens(&paths.tokens, verifier)?;
    let known: BTreeSet<&str> = tokens.keys().map(String::as_str).collect();

    type Loaded<T> = Result<Option<(BTreeMap<String, Vec<T>>, FileReport)>>;
    fn maybe<T: Send>(
        path: &Option<PathBuf>,
        header: &[&str],
        known: &BTreeSet<&str>,
        parse: fn(&[&str]) -> std::result::Result<T, RejectReason>,
    ) -> Loaded<T> {
        path.as_deref().map(|p| load_series(p, header, known, parse)).transpose()
    }

    let ((ohlcv, trades), (holders, economics)) = rayon::join(
        || {
            rayon::join(
                || maybe(&paths.ohlcv, &OHLCV_HEADER, &known, parse_bar),
                || maybe(&paths.trades, &TRADES_HEADER, &known, parse_trade),
            )
        },
        || {
            rayon::join(
                || maybe(&paths.holders, &HOLDERS_HEADER, &known, parse_holder),
                || maybe(&paths.economics, &ECONOMICS_HEADER, &known, parse_economics),
            )
        },
    );

    let mut report = LoadReport { merged_duplicate_tokens: merged, ..Default::default() };
    report.files.insert(FileKind::Tokens, token_report);
    let mut dataset = Dataset { tokens: tokens.clone(), ..Default::default() };

    if let Some((mut bars, mut r)) = ohlcv? {
        sort_by_ts(&mut bars, |b| b.ts);
        let dup = drop_duplicate_ts(&mut bars, |b| b.ts);
        if dup > 0 {
            *r.rejected.entry(RejectReason::DuplicateTimestamp).or_default() += dup;
            r.accepted -= dup;
        }
        dataset.ohlcv = bars;
        report.files.insert(FileKind::Ohlcv, r);
    }
    if let Some((mut t, r)) = trades? {
        sort_by_ts(&mut t, |t| t.ts);
        dataset.trades = t;
        report.files.insert(FileKind::Trades, r);
    }
    if let Some((mut h, r)) = holders? {
        sort_by_ts(&mut h, |h| h.ts);
        dataset.holders = h;
        report.files.insert(FileKind::Holders, r);
    }
    if let Some((mut e, r)) = economics? {
        sort_by_ts(&mut e, |e| e.ts);
        keep_last_per_ts(&mut e, |e| e.ts);
        dataset.economics = e;
        report.files.insert(FileKind::Economics, r);
    }
    Ok((dataset, report))
}

/// Ground-truth window for a scripted manipulation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Label {
    pub token_id: String,
    pub kind: EventKind,
    pub window_start: i64,
    pub window_end: i64,
}

pub fn load_labels(path: &Path) -> Result<(Vec<Label>, FileReport)> {
    let mut labels = Vec::new();
    let mut report = FileReport::default();
    Table::open(path, &LABELS_HEADER)?.for_each_row(|row| {
        report.rows += 1;
        let parsed = row.ok_or(RejectReason::Malformed).and_then(|f| {
            let kind: EventKind = f[1].parse().map_err(|_| RejectReason::Malformed)?;
            let (start, end) = (int(f[2])?, int(f[3])?);
            if f[0].is_empty() || start > end {
                return Err(RejectReason::Malformed);
            }
            Ok(Label { token_id: f[0].to_owned(), kind, window_start: start, window_end: end })
        });
        match parsed {
            Ok(l) => {
                report.accepted += 1;
                labels.push(l);
            }
            Err(reason) => report.reject(reason),
        }
    })?;
    Ok((labels, report))
}
