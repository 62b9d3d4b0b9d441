use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{
    Dataset, Label, ECONOMICS_HEADER, HOLDERS_HEADER, LABELS_HEADER, OHLCV_HEADER, TOKENS_HEADER, TRADES_HEADER,
};
use crate::error::{Error, Result};

struct CsvOut<'a> {
    path: &'a Path,
    out: BufWriter<File>,
}

impl<'a> CsvOut<'a> {
    fn create(path: &'a Path, header: &[&str]) -> Result<Self> {
        let file = File::create(path).map_err(|source| Error::Write { path: path.to_owned(), source })?;
        let mut w = Self { path, out: BufWriter::new(file) };
        w.line(format_args!("{}", header.join(",")))?;
        Ok(w)
    }

    fn line(&mut self, args: std::fmt::Arguments<'_>) -> Result<()> {
        self.out
            .write_fmt(args)
            .and_then(|_| self.out.write_all(b"\n"))
            .map_err(|source| Error::Write { path: self.path.to_owned(), source })
    }

    fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|source| Error::Write { path: self.path.to_owned(), source })
    }
}

/// Quotes a free-text field when it would otherwise break the row.
fn text(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes `tokens.csv`, `ohlcv.csv`, `trades.csv`, `holders.csv` and
/// `economics.csv` into `dir`. Floats use Rust's shortest round-trip form,
/// so a written dataset reloads to an identical value.
pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Write { path: dir.to_owned(), source })?;

    let path = dir.join("tokens.csv");
    let mut w = CsvOut::create(&path, &TOKENS_HEADER)?;
    for t in dataset.tokens.values() {
        let sources: Vec<&str> = t.sources.iter().map(String::as_str).collect();
        w.line(format_args!(
            "{},{},{},{},{},{},{}",
            text(&t.token_id),
            t.chain,
            t.address,
            text(&t.name),
            text(&t.symbol),
            t.created_at,
            text(&sources.join("|"))
        ))?;
    }
    w.finish()?;

    let path = dir.join("ohlcv.csv");
    let mut w = CsvOut::create(&path, &OHLCV_HEADER)?;
    for (id, bars) in &dataset.ohlcv {
        let id = text(id);
        for b in bars {
            w.line(format_args!(
                "{id},{},{},{},{},{},{}",
                b.ts, b.open, b.high, b.low, b.close, b.volume_usd
            ))?;
        }
    }
    w.finish()?;

    let path = dir.join("trades.csv");
    let mut w = CsvOut::create(&path, &TRADES_HEADER)?;
    for (id, trades) in &dataset.trades {
        let id = text(id);
        for t in trades {
            w.line(format_args!("{id},{},{},{},{}", t.ts, text(&t.maker_id), t.side, t.amount_usd))?;
        }
    }
    w.finish()?;

    let path = dir.join("holders.csv");
    let mut w = CsvOut::create(&path, &HOLDERS_HEADER)?;
    for (id, snaps) in &dataset.holders {
        let id = text(id);
        for s in snaps {
            w.line(format_args!(
                "{id},{},{},{},{},{},{}",
                s.ts,
                s.top10_share,
                s.bundle_buy_share,
                s.fresh_address_share,
                s.airdrop_share,
                u8::from(s.honeypot)
            ))?;
        }
    }
    w.finish()?;

    let path = dir.join("economics.csv");
    let mut w = CsvOut::create(&path, &ECONOMICS_HEADER)?;
    for (id, recs) in &dataset.economics {
        let id = text(id);
        for e in recs {
            w.line(format_args!(
                "{id},{},{},{},{},{}",
                e.ts,
                e.price_usd,
                opt(e.circulating_supply),
                opt(e.market_cap_usd),
                opt(e.liquidity_usd)
            ))?;
        }
    }
    w.finish()
}

pub fn write_labels(labels: &[Label], path: &Path) -> Result<()> {
    let mut w = CsvOut::create(path, &LABELS_HEADER)?;
    for l in labels {
        w.line(format_args!("{},{},{},{}", text(&l.token_id), l.kind, l.window_start, l.window_end))?;
    }
    w.finish()
}
