//! Acceptance suite: one check per criterion, each printing a PASS/FAIL line.
//!
//! Runs without the libtest harness so the criterion lines appear in order
//! on stdout. The process exits non-zero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use memetrace::amm::PoolState;
use memetrace::analytics::{prevalence, read_returns_csv};
use memetrace::classifier::{classify_name, elbow_cutoff, preprocess_name, tfidf_rank, KeywordModel};
use memetrace::config::DetectorConfig;
use memetrace::extraction::{detect_rug_pull, rsi};
use memetrace::growth::{circular_volume, detect_anomalies, lpi_phase_two, screen_wash_days};
use memetrace::ingest::{load_dataset, write_dataset, Dataset, DatasetPaths, FileKind, Label, RejectReason};
use memetrace::ingest::AddressError;
use memetrace::model::{
    DailyAggregate, EventKind, HolderSnapshot, OhlcvBar, Side, TokenEconomics, TokenRecord, Trade, Chain,
    SECONDS_PER_DAY, SECONDS_PER_HOUR,
};
use memetrace::pipeline::{detect_all, parse_detectors, read_events_jsonl};
use memetrace::scenario::{generate, ScenarioKind, ScenarioSpec, T0};

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> std::result::Result<(), String> {
    ensure(elapsed < limit, || format!("{what} took {elapsed:.2?}, limit {limit:?}"))
}

fn fixtures() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures"))
}

// 1 ---------------------------------------------------------------------------

fn amm_exactness() -> Check {
    let start = Instant::now();
    let pool = PoolState::frictionless(1000.0, 1.0).map_err(|e| e.to_string())?;
    ensure(rel(pool.spot_price(), 0.001) < 1e-15, || format!("spot {}", pool.spot_price()))?;
    let (paid, after) = pool.swap_exact_token_out(500.0).map_err(|e| e.to_string())?;
    ensure(rel(paid, 1.0) < 1e-12, || format!("exact-out paid {paid}"))?;
    ensure(rel(after.spot_price(), 0.004) < 1e-12, || format!("post price {}", after.spot_price()))?;
    let mut worst: f64 = 0.0;
    for m in [1.5, 2.0, 4.0, 9.0, 100.0] {
        let cost = pool.cost_to_multiply_price(m).map_err(|e| e.to_string())?;
        let (_, moved) = pool.swap_quote_in(cost).map_err(|e| e.to_string())?;
        let err = rel(moved.spot_price() / pool.spot_price(), m);
        worst = worst.max(err);
        ensure(err <= 1e-9, || format!("m={m}: simulated multiple off by {err:e}"))?;
    }
    within(start.elapsed(), Duration::from_secs(1), "AMM checks")?;
    Ok(format!("spot 0.001, exact-out 1.0 quote, post 0.004, worst multiple error {worst:.1e}"))
}

// 2 ---------------------------------------------------------------------------

fn k_conservation() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let mut pool = PoolState::frictionless(rng.random_range(1.0..1e9), rng.random_range(1.0..1e9)).unwrap();
        let k0 = pool.k();
        for _ in 0..rng.random_range(1..40) {
            let frac = rng.random_range(1e-6..0.5);
            let next = match rng.random_range(0..4) {
                0 => pool.swap_quote_in(frac * pool.reserve_quote()).map(|r| r.1),
                1 => pool.swap_token_in(frac * pool.reserve_token()).map(|r| r.1),
                2 => pool.swap_exact_token_out(frac * pool.reserve_token()).map(|r| r.1),
                _ => pool.swap_exact_quote_out(frac * pool.reserve_quote()).map(|r| r.1),
            };
            pool = next.map_err(|e| e.to_string())?;
        }
        worst = worst.max(rel(pool.k(), k0));
    }
    ensure(worst <= 1e-10, || format!("k drifted by {worst:e}"))?;
    within(start.elapsed(), Duration::from_secs(5), "k-conservation")?;
    Ok(format!("10000 sequences, worst relative drift {worst:.1e}"))
}

// 3 ---------------------------------------------------------------------------

/// Wilder RSI from the closed form of the smoothed averages:
/// `avg_t = (1/p)·w^(t−p)·Σ_{i≤p} x_i + Σ_{p<j≤t} (1/p)·w^(t−j)·x_j` with `w = 1 − 1/p`.
fn brute_rsi(closes: &[f64], p: usize) -> Vec<Option<f64>> {
    let pf = p as f64;
    let w = 1.0 - 1.0 / pf;
    let deltas: Vec<f64> = (1..closes.len()).map(|i| closes[i] - closes[i - 1]).collect();
    let mut out = vec![None; closes.len()];
    for (t, slot) in out.iter_mut().enumerate().skip(p) {
        let avg = |f: &dyn Fn(f64) -> f64| {
            let seed: f64 = deltas[..p].iter().map(|&d| f(d)).sum::<f64>() / pf * w.powi((t - p) as i32);
            let tail: f64 = (p + 1..=t).map(|j| f(deltas[j - 1]) / pf * w.powi((t - j) as i32)).sum();
            seed + tail
        };
        let g = avg(&|d| d.max(0.0));
        let l = avg(&|d| (-d).max(0.0));
        *slot = Some(if l == 0.0 && g == 0.0 {
            50.0
        } else if l == 0.0 {
            100.0
        } else {
            100.0 * g / (g + l)
        });
    }
    out
}

fn rsi_oracle() -> Check {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..1_000 {
        let mut price: f64 = rng.random_range(0.01..100.0);
        let closes: Vec<f64> = (0..500)
            .map(|_| {
                price *= (rng.random_range(-0.05..0.05f64)).exp();
                price
            })
            .collect();
        let fast = rsi(&closes, 14).map_err(|e| e.to_string())?;
        for (a, b) in fast.iter().zip(brute_rsi(&closes, 14)) {
            match (a, b) {
                (Some(a), Some(b)) => worst = worst.max((a - b).abs()),
                (None, None) => {}
                _ => return Err("warm-up alignment differs".into()),
            }
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    let up: Vec<f64> = (0..100).map(|i| 1.0 + i as f64).collect();
    let down: Vec<f64> = up.iter().rev().copied().collect();
    let all = |v: Vec<Option<f64>>, x: f64| v[14..].iter().all(|r| *r == Some(x));
    ensure(all(rsi(&up, 14).unwrap(), 100.0), || "rising series is not exactly 100".into())?;
    ensure(all(rsi(&down, 14).unwrap(), 0.0), || "falling series is not exactly 0".into())?;
    Ok(format!("1000 series x 500 points, max deviation {worst:.1e}; monotone series give 100 / 0"))
}

// 4 ---------------------------------------------------------------------------

/// Generates a suite, round-trips it through CSV ingestion and runs every detector.
fn simulate_and_detect(spec: &ScenarioSpec, dir: &Path) -> std::result::Result<(Vec<Label>, Vec<memetrace::model::DetectionEvent>), String> {
    let out = generate(spec).map_err(|e| e.to_string())?;
    out.write(dir).map_err(|e| e.to_string())?;
    let (dataset, report) = load_dataset(&DatasetPaths::in_dir(dir)).map_err(|e| e.to_string())?;
    ensure(report.rejected_total() == 0, || format!("{} generated rows rejected: {report:?}", report.rejected_total()))?;
    let all = parse_detectors("all").unwrap();
    Ok((out.labels, detect_all(&dataset, &all, &DetectorConfig::default()).events))
}

fn detector_recall() -> Check {
    let start = Instant::now();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let suites = [
        ("wash-zero-risk", ScenarioSpec::new(ScenarioKind::Wash, 401, 60, 50)),
        ("wash-circular", ScenarioSpec::new(ScenarioKind::Wash, 402, 60, 50).with_param("circular", 1.0)),
        ("lpi", ScenarioSpec::new(ScenarioKind::Lpi, 403, 60, 50)),
        ("pump-dump", ScenarioSpec::new(ScenarioKind::PumpDump, 404, 60, 50)),
        ("rug-pull", ScenarioSpec::new(ScenarioKind::RugPull, 405, 60, 50)),
    ];
    let mut summary = Vec::new();
    for (name, spec) in suites {
        let (labels, events) = simulate_and_detect(&spec, &tmp.path().join(name))?;
        let mut per_kind: BTreeMap<EventKind, (usize, usize)> = BTreeMap::new();
        for l in &labels {
            let hit = events
                .iter()
                .any(|e| e.token_id == l.token_id && e.kind == l.kind && e.overlaps_days(l.window_start, l.window_end));
            let entry = per_kind.entry(l.kind).or_default();
            entry.0 += usize::from(hit);
            entry.1 += 1;
        }
        ensure(!labels.is_empty(), || format!("{name}: no labels"))?;
        for (kind, (hit, total)) in &per_kind {
            ensure(hit == total, || format!("{name}: {kind:?} recall {hit}/{total}"))?;
        }
        let detail: Vec<String> = per_kind.iter().map(|(k, (h, t))| format!("{}={h}/{t}", k.as_str())).collect();
        summary.push(format!("{name}[{}]", detail.join(" ")));
    }
    within(start.elapsed(), Duration::from_secs(60), "recall suites")?;
    Ok(format!("{} in {:.1?}", summary.join(", "), start.elapsed()))
}

// 5 ---------------------------------------------------------------------------

fn detector_specificity() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = ScenarioSpec::new(ScenarioKind::Organic, 500, 90, 100);
    let (labels, events) = simulate_and_detect(&spec, tmp.path())?;
    ensure(labels.is_empty(), || "organic suite has labels".into())?;
    ensure(events.is_empty(), || {
        let kinds: BTreeSet<&str> = events.iter().map(|e| e.kind.as_str()).collect();
        format!("{} false positives ({kinds:?})", events.len())
    })?;
    Ok("100 organic tokens x 90 days hourly, 0 events from all five detectors".into())
}

// 6 ---------------------------------------------------------------------------

fn day(d: i64, close: f64, volume: f64) -> DailyAggregate {
    DailyAggregate { day: d, open: close, close, volume_usd: volume, bar_count: 24 }
}

fn trade(maker: &str, side: Side, amount: f64) -> Trade {
    Trade { ts: 60, maker_id: maker.into(), side, amount_usd: amount }
}

fn threshold_boundaries() -> Check {
    let cfg = DetectorConfig::default();

    let screened = screen_wash_days(&[day(0, 1.0, 100.0), day(1, 1.0, 600.0)], &cfg.wash);
    ensure(screened.is_empty(), || "500% surge was screened".into())?;
    let screened = screen_wash_days(&[day(0, 1.0, 100.0), day(1, 1.0, 600.0001)], &cfg.wash);
    ensure(screened.len() == 1, || "surge just above 500% was not screened".into())?;

    let exact = [trade("a", Side::Buy, 50.0), trade("a", Side::Sell, 49.0), trade("b", Side::Buy, 1.0)];
    let c = circular_volume(&exact, cfg.wash.circular_ratio).ok_or("no volume")?;
    ensure(c.circular_ratio == 0.99 && c.flagged, || format!("99% circular ratio {} not flagged", c.circular_ratio))?;

    let snap = |share: f64| HolderSnapshot {
        ts: 0,
        top10_share: share,
        bundle_buy_share: share,
        fresh_address_share: share,
        airdrop_share: share,
        honeypot: false,
    };
    ensure(detect_anomalies("t", &snap(30.0), &cfg.anomaly).is_empty(), || "30.0% share flagged".into())?;
    ensure(detect_anomalies("t", &snap(30.01), &cfg.anomaly).len() == 4, || "30.01% share not flagged".into())?;

    let rug = |crash: f64| {
        let mut d: Vec<_> = (0..10).map(|i| day(i, 100.0, 5000.0)).collect();
        d.push(day(10, crash, 9000.0));
        d.extend((11..20).map(|i| day(i, crash, 1.0)));
        detect_rug_pull("t", &d, &cfg.rug).events.len()
    };
    ensure(rug(1.0) == 0, || "exactly -99.0% drop reported as a rug pull".into())?;
    ensure(rug(0.99) == 1, || "-99.01% drop missed".into())?;

    let makers = |n: usize| -> Vec<Trade> { (0..n).map(|i| trade(&format!("m{i}"), Side::Buy, 10.0)).collect() };
    let ten = lpi_phase_two(&makers(10), &cfg.lpi).ok_or("no volume")?;
    let eleven = lpi_phase_two(&makers(11), &cfg.lpi).ok_or("no volume")?;
    ensure(ten.confirmed, || "10 makers not LPI-eligible".into())?;
    ensure(!eleven.confirmed, || "11 makers LPI-eligible".into())?;
    Ok("surge 500% not screened; circular 99% flagged; share 30.0 not flagged; drop -99.0% no rug; 10 makers eligible, 11 not".into())
}

// 7 ---------------------------------------------------------------------------

/// Per-document TF-IDF summed over the corpus, with df counted by scanning.
fn brute_tfidf(corpus: &[String]) -> BTreeMap<String, f64> {
    let docs: Vec<Vec<String>> = corpus.iter().map(|n| preprocess_name(n)).collect();
    let n = docs.len() as f64;
    let mut scores = BTreeMap::new();
    for doc in &docs {
        for word in doc {
            if scores.contains_key(word) {
                continue;
            }
            let df = docs.iter().filter(|d| d.contains(word)).count() as f64;
            let score: f64 =
                docs.iter().map(|d| d.iter().filter(|w| *w == word).count() as f64 * (n / df).ln()).sum();
            scores.insert(word.clone(), score);
        }
    }
    scores
}

/// Perpendicular Euclidean distance to the first-to-last chord, argmax with first-wins ties.
fn brute_elbow(scores: &[f64]) -> (usize, Vec<f64>) {
    let n = scores.len();
    let (x1, y1, x2, y2) = (1.0, scores[0], n as f64, scores[n - 1]);
    let norm = ((y2 - y1).powi(2) + (x2 - x1).powi(2)).sqrt();
    let d: Vec<f64> = (0..n)
        .map(|i| ((y2 - y1) * (i + 1) as f64 - (x2 - x1) * scores[i] + x2 * y1 - y2 * x1).abs() / norm)
        .collect();
    let best = (0..n).fold(0, |b, i| if d[i] > d[b] { i } else { b });
    (best + 1, d)
}

const VOCAB: [&str; 16] = [
    "doge", "pepe", "cat", "inu", "moon", "baby", "elon", "frog", "shiba", "wojak", "bonk", "coin", "token", "ai",
    "trump", "sol",
];

fn classifier_oracle() -> Check {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let mut corpora = 0;
    for _ in 0..300 {
        let size = rng.random_range(3..=50);
        let corpus: Vec<String> = (0..size)
            .map(|_| {
                let words: Vec<&str> = (0..rng.random_range(1..=4)).map(|_| VOCAB[rng.random_range(0..VOCAB.len())]).collect();
                words.join(if rng.random_bool(0.5) { " " } else { "-" })
            })
            .collect();
        let ranked = tfidf_rank(&corpus);
        let brute = brute_tfidf(&corpus);
        ensure(ranked.len() == brute.len(), || "vocabulary size differs".into())?;
        for w in ranked.windows(2) {
            let ordered = w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0);
            ensure(ordered, || format!("ranking not ordered at {:?} / {:?}", w[0], w[1]))?;
        }
        for (word, score) in &ranked {
            let b = brute[word];
            ensure((score - b).abs() <= 1e-9 * b.abs().max(1.0), || format!("{word}: {score} vs brute {b}"))?;
        }
        let scores: Vec<f64> = ranked.iter().map(|r| r.1).collect();
        if scores.len() >= 3 {
            let k = elbow_cutoff(&scores).map_err(|e| e.to_string())?;
            let (bk, d) = brute_elbow(&scores);
            ensure(k == bk || (d[k - 1] - d[bk - 1]).abs() <= 1e-9 * d[bk - 1], || {
                format!("elbow {k} vs brute {bk} on {scores:?}")
            })?;
            corpora += 1;
        }
    }

    let model = KeywordModel::build(&["doge moon", "pepe frog", "doge inu", "cat coin", "baby doge"], BTreeSet::new(), Some(4))
        .map_err(|e| e.to_string())?;
    let alphabet: Vec<char> = "aDoGe PePE-_.$🐸 moonInu123,!' ÉCATé\t".chars().collect();
    for _ in 0..1_000 {
        let name: String = (0..rng.random_range(0..24)).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect();
        let once = preprocess_name(&name);
        let twice = preprocess_name(&once.join(" "));
        ensure(once == twice, || format!("preprocess not idempotent on {name:?}"))?;
        ensure(classify_name(&name, &model) == classify_name(&once.join(" "), &model), || {
            format!("classification changes after preprocessing {name:?}")
        })?;
    }
    Ok(format!("{corpora} random corpora match brute-force TF-IDF and elbow; 1000 fuzzed names idempotent"))
}

// 8 ---------------------------------------------------------------------------

fn fixture_statistics() -> Check {
    let dir = fixtures().join("prevalence");
    let returns = read_returns_csv(&dir.join("returns.csv")).map_err(|e| e.to_string())?;
    let events = read_events_jsonl(&dir.join("events.jsonl")).map_err(|e| e.to_string())?;
    let report = prevalence(&returns, &events);
    ensure(report.high_return == 707, || format!("high-return set {}", report.high_return))?;
    // 282 wash-region tokens plus one anomaly-only token with a late circular event.
    ensure(
        (report.counts.wash, report.counts.lpi, report.counts.anomaly) == (283, 40, 412),
        || format!("per-kind counts {:?}", report.counts),
    )?;
    ensure((report.union_pct - 82.6).abs() <= 0.05, || format!("union_pct {}", report.union_pct))?;
    let l = &report.linkage;
    ensure((l.ratio_pct - 61.67).abs() <= 0.05, || format!("linkage ratio {}", l.ratio_pct))?;
    Ok(format!(
        "union {} of {} = {:.2}%, linkage {} of {} = {:.2}%",
        report.union, report.high_return, report.union_pct, l.prior_growth_count, l.extraction_token_count, l.ratio_pct
    ))
}

// 9 ---------------------------------------------------------------------------

fn cli(args: &[&str]) -> std::result::Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_memetrace")).args(args).output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("memetrace {args:?} failed: {}", String::from_utf8_lossy(&out.stderr)))
}

fn same_files(a: &Path, b: &Path, names: &[&str]) -> std::result::Result<(), String> {
    for name in names {
        let (x, y) = (std::fs::read(a.join(name)), std::fs::read(b.join(name)));
        ensure(matches!((&x, &y), (Ok(x), Ok(y)) if x == y), || format!("{name} differs between runs"))?;
    }
    Ok(())
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |s: &str| tmp.path().join(s).to_string_lossy().into_owned();
    let csvs = ["tokens.csv", "ohlcv.csv", "trades.csv", "holders.csv", "economics.csv", "labels.csv"];
    for kind in ["organic", "wash", "lpi", "pump_dump", "rug_pull"] {
        for run in ["a", "b"] {
            cli(&["simulate", "--kind", kind, "--seed", "99", "--tokens", "8", "--days", "40", "--out", &p(&format!("{kind}-{run}"))])?;
        }
        same_files(&tmp.path().join(format!("{kind}-a")), &tmp.path().join(format!("{kind}-b")), &csvs)?;
    }

    let data = p("pump_dump-a");
    cli(&["returns", "--data", &data, "--t0", &T0.to_string(), "--window-days", "30", "--out", &p("returns.csv")])?;
    for threads in ["1", "4"] {
        let events = p(&format!("events-{threads}.jsonl"));
        cli(&["detect", "--data", &data, "--kind", "all", "--threads", threads, "--out", &events])?;
        cli(&["report", "--events", &events, "--returns", &p("returns.csv"), "--out", &p(&format!("report-{threads}"))])?;
    }
    same_files(tmp.path(), tmp.path(), &[])?;
    let (a, b) = (std::fs::read(p("events-1.jsonl")), std::fs::read(p("events-4.jsonl")));
    ensure(matches!((&a, &b), (Ok(a), Ok(b)) if a == b && !a.is_empty()), || "events differ across thread counts".into())?;
    same_files(&tmp.path().join("report-1"), &tmp.path().join("report-4"), &["report.json", "events.jsonl", "summary.csv"])?;
    Ok("simulate byte-identical for all five kinds; detect and report identical at 1 and 4 threads".into())
}

// 10 --------------------------------------------------------------------------

fn clean_dataset(tokens: usize, days: usize) -> Dataset {
    let mut ds = Dataset::default();
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    for i in 0..tokens {
        let id = format!("tok{i:04}");
        let address = format!("0x{:040x}", i + 1);
        ds.tokens.insert(
            id.clone(),
            TokenRecord {
                token_id: id.clone(),
                chain: if i % 2 == 0 { Chain::Ethereum } else { Chain::Base },
                address,
                name: format!("Token {i}"),
                symbol: format!("T{i}"),
                created_at: T0,
                sources: BTreeSet::from(["cmc".to_owned()]),
            },
        );
        let mut price = 0.001;
        let bars: Vec<OhlcvBar> = (0..days * 24)
            .map(|h| {
                let open = price;
                price *= rng.random_range(0.99..1.01);
                OhlcvBar {
                    ts: T0 + h as i64 * SECONDS_PER_HOUR,
                    open,
                    high: open.max(price) * 1.001,
                    low: open.min(price) * 0.999,
                    close: price,
                    volume_usd: rng.random_range(0.0..500.0),
                }
            })
            .collect();
        ds.trades.insert(
            id.clone(),
            (0..days)
                .map(|d| Trade { ts: T0 + d as i64 * SECONDS_PER_DAY + 77, maker_id: format!("m{d}"), side: Side::Buy, amount_usd: 10.0 })
                .collect(),
        );
        ds.holders.insert(
            id.clone(),
            vec![HolderSnapshot { ts: T0, top10_share: 20.0, bundle_buy_share: 1.0, fresh_address_share: 2.0, airdrop_share: 0.0, honeypot: false }],
        );
        ds.economics.insert(
            id.clone(),
            vec![TokenEconomics { ts: T0, price_usd: 0.001, circulating_supply: Some(1e9), market_cap_usd: Some(1e6), liquidity_usd: None }],
        );
        ds.ohlcv.insert(id, bars);
    }
    ds
}

fn ingestion() -> Check {
    let (dataset, report) =
        load_dataset(&DatasetPaths::in_dir(&fixtures().join("malformed"))).map_err(|e| e.to_string())?;
    let expected: [(FileKind, RejectReason, usize); 11] = [
        (FileKind::Tokens, RejectReason::Address(AddressError::BadLength), 2),
        (FileKind::Tokens, RejectReason::Address(AddressError::BadPrefix), 1),
        (FileKind::Tokens, RejectReason::Address(AddressError::BadCharset), 2),
        (FileKind::Tokens, RejectReason::Address(AddressError::BadDecode), 1),
        (FileKind::Tokens, RejectReason::UnknownChain, 1),
        (FileKind::Ohlcv, RejectReason::InvertedOhlc, 2),
        (FileKind::Ohlcv, RejectReason::NegativeValue, 2),
        (FileKind::Ohlcv, RejectReason::UnknownToken, 1),
        (FileKind::Trades, RejectReason::NonPositiveAmount, 1),
        (FileKind::Trades, RejectReason::BadSide, 1),
        (FileKind::Holders, RejectReason::ShareOutOfRange, 1),
    ];
    for (file, reason, n) in expected {
        let got = report.file(file).count(reason);
        ensure(got == n, || format!("{file:?} {reason}: expected {n}, got {got}"))?;
    }
    let total: usize = expected.iter().map(|e| e.2).sum();
    ensure(report.rejected_total() == total, || format!("unexpected extra rejections: {report:?}"))?;
    ensure(dataset.tokens.len() == 3 && dataset.ohlcv.values().map(Vec::len).sum::<usize>() == 5, || {
        "accepted rows do not match the clean part of the corpus".into()
    })?;
    let bad_ids = ["short-eth", "long-bsc", "noprefix-bsc", "nonhex-base", "zero-sol", "short-sol", "tron-token"];
    ensure(bad_ids.iter().all(|id| !dataset.tokens.contains_key(*id)), || "a malformed token was accepted".into())?;

    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let clean = clean_dataset(1_000, 90);
    write_dataset(&clean, tmp.path()).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let (loaded, report) = load_dataset(&DatasetPaths::in_dir(tmp.path())).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(report.rejected_total() == 0, || format!("clean dataset rejected rows: {report:?}"))?;
    ensure(loaded == clean, || "clean dataset did not round-trip".into())?;
    within(elapsed, Duration::from_secs(10), "clean 1000-token load")?;
    Ok(format!("{total} malformed rows rejected with exact per-reason counts; 1000 tokens x 90 days loaded in {elapsed:.2?}"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("AMM exactness", amm_exactness),
        ("k-conservation property", k_conservation),
        ("RSI oracle", rsi_oracle),
        ("detector recall", detector_recall),
        ("detector specificity", detector_specificity),
        ("threshold boundaries", threshold_boundaries),
        ("classifier oracle", classifier_oracle),
        ("fixture statistics", fixture_statistics),
        ("determinism", determinism),
        ("ingestion", ingestion),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({:.2?}): {detail}", i + 1, start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({:.2?}): {why}", i + 1, start.elapsed());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
