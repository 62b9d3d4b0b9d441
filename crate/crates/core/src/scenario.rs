//! Seeded synthetic markets with scripted manipulation and ground-truth labels.
//!
//! Each token trades against its own constant-product pool quoted in USD.
//! Organic noise traders submit lognormal-sized orders whose daily totals are
//! drawn up front; a mean-reverting band keeps the close near the previous
//! day's. Scripted actors then act on chosen days.
//!
//! Randomness comes from ChaCha20 (`rand_chacha`) seeded from the spec seed
//! with one stream per token index, so output is independent of thread count
//! and platform.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::LogNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amm::PoolState;
use crate::error::{Error, Result};
use crate::ingest::{write_dataset, write_labels, Dataset, Label};
use crate::model::{
    aggregate_daily, day_end, day_of, market_cap, Chain, DailyAggregate, EventKind, HolderSnapshot,
    OhlcvBar, Side, TokenEconomics, TokenRecord, Trade, SECONDS_PER_DAY, SECONDS_PER_HOUR,
};

/// 2024-01-01T00:00:00Z, the first bar of every generated series.
pub const T0: i64 = 1_704_067_200;

const ORGANIC_MAKERS: usize = 150;
const BAND: f64 = 0.025;
/// Largest organic order as a fraction of the quote reserve; bigger orders are split.
const ORDER_CAP: f64 = 0.004;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Organic,
    Wash,
    Lpi,
    PumpDump,
    RugPull,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] =
        [ScenarioKind::Organic, ScenarioKind::Wash, ScenarioKind::Lpi, ScenarioKind::PumpDump, ScenarioKind::RugPull];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Organic => "organic",
            ScenarioKind::Wash => "wash",
            ScenarioKind::Lpi => "lpi",
            ScenarioKind::PumpDump => "pump_dump",
            ScenarioKind::RugPull => "rug_pull",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            ScenarioKind::Organic => &[],
            ScenarioKind::Wash => &["wash_days", "circular", "ring_size"],
            ScenarioKind::Lpi => &["m", "lpi_days"],
            ScenarioKind::PumpDump => &["pump_pct", "ramp_hours", "dump_hours", "ring_size"],
            ScenarioKind::RugPull => &["drop_ratio", "post_volume_ratio"],
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scenario kind `{s}`")))
    }
}

const COMMON_KEYS: [&str; 6] = ["depth", "price", "fee", "trades_per_day", "surge_cap_pct", "volume_pct"];

/// What to generate.
///
/// Recognised `params` (defaults in brackets):
///
/// * all kinds: `depth` quote reserve in USD [50000; 100 for lpi], `price`
///   [0.001], `fee` [0.003], `trades_per_day` [48], `surge_cap_pct` cap on
///   organic day-over-day volume growth [200, at most 400], `volume_pct`
///   organic daily volume as a percent of depth [5]
/// * wash: `wash_days` [3], `circular` 0/1 [0], `ring_size` 1–3 [random]
/// * lpi: `m` price multiple [4, at least 2.5], `lpi_days` [1]
/// * pump_dump: `pump_pct` [150, at least 75], `ramp_hours` [6],
///   `dump_hours` [3], `ring_size` 1–3 [random]
/// * rug_pull: `drop_ratio` post/pre price [0.002], `post_volume_ratio`
///   post-rug organic volume scale [0.001]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub seed: u64,
    pub duration_days: u32,
    pub token_count: usize,
    pub params: BTreeMap<String, f64>,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, seed: u64, duration_days: u32, token_count: usize) -> Self {
        Self { kind, seed, duration_days, token_count, params: BTreeMap::new() }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_owned(), value);
        self
    }
}

#[derive(Debug, Clone)]
struct Params {
    days: usize,
    depth: f64,
    price: f64,
    fee: f64,
    trades_per_day: usize,
    surge_cap_pct: f64,
    volume_pct: f64,
    ring_size: Option<usize>,
    wash_days: usize,
    circular: bool,
    m: f64,
    lpi_days: usize,
    pump_pct: f64,
    ramp_hours: usize,
    dump_hours: usize,
    drop_ratio: f64,
    post_volume_ratio: f64,
}

impl Params {
    fn base_volume(&self) -> f64 {
        self.depth * self.volume_pct / 100.0
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidScenario(msg.into())
}

fn resolve(spec: &ScenarioSpec) -> Result<Params> {
    let kind = spec.kind;
    if spec.duration_days < 30 {
        return Err(invalid(format!("duration_days must be at least 30, got {}", spec.duration_days)));
    }
    if spec.token_count == 0 {
        return Err(invalid("token_count must be positive"));
    }
    for key in spec.params.keys() {
        if !COMMON_KEYS.contains(&key.as_str()) && !kind.keys().contains(&key.as_str()) {
            return Err(invalid(format!("parameter `{key}` does not apply to {kind}")));
        }
    }
    let get = |key: &str, default: f64| -> Result<f64> {
        match spec.params.get(key) {
            Some(v) if !v.is_finite() => Err(invalid(format!("`{key}` must be finite"))),
            Some(v) => Ok(*v),
            None => Ok(default),
        }
    };
    let int = |key: &str, default: usize| -> Result<usize> {
        let v = get(key, default as f64)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(invalid(format!("`{key}` must be a non-negative integer, got {v}")));
        }
        Ok(v as usize)
    };
    let p = Params {
        days: spec.duration_days as usize,
        depth: get("depth", if kind == ScenarioKind::Lpi { 100.0 } else { 50_000.0 })?,
        price: get("price", 0.001)?,
        fee: get("fee", 0.003)?,
        trades_per_day: int("trades_per_day", 48)?,
        surge_cap_pct: get("surge_cap_pct", 200.0)?,
        volume_pct: get("volume_pct", 5.0)?,
        ring_size: spec.params.contains_key("ring_size").then(|| int("ring_size", 1)).transpose()?,
        wash_days: int("wash_days", 3)?,
        circular: match int("circular", 0)? {
            0 => false,
            1 => true,
            v => return Err(invalid(format!("`circular` must be 0 or 1, got {v}"))),
        },
        m: get("m", 4.0)?,
        lpi_days: int("lpi_days", 1)?,
        pump_pct: get("pump_pct", 150.0)?,
        ramp_hours: int("ramp_hours", 6)?,
        dump_hours: int("dump_hours", 3)?,
        drop_ratio: get("drop_ratio", 0.002)?,
        post_volume_ratio: get("post_volume_ratio", 0.001)?,
    };

    if p.depth <= 0.0 || p.price <= 0.0 {
        return Err(invalid("depth and price must be positive"));
    }
    if !(0.0..=0.01).contains(&p.fee) {
        return Err(invalid(format!("fee {} outside [0, 0.01]", p.fee)));
    }
    if p.trades_per_day == 0 {
        return Err(invalid("trades_per_day must be positive"));
    }
    // A larger cap would let organic days reach the 500% wash screen.
    if !(0.0..=400.0).contains(&p.surge_cap_pct) {
        return Err(invalid(format!("surge_cap_pct {} outside [0, 400]", p.surge_cap_pct)));
    }
    if !(0.0..=20.0).contains(&p.volume_pct) {
        return Err(invalid(format!("volume_pct {} outside [0, 20]", p.volume_pct)));
    }
    if matches!(kind, ScenarioKind::Wash | ScenarioKind::PumpDump | ScenarioKind::RugPull) && p.volume_pct == 0.0 {
        return Err(invalid(format!("{kind} needs organic volume (volume_pct > 0)")));
    }
    if let Some(r) = p.ring_size {
        if !(1..=3).contains(&r) {
            return Err(invalid(format!("ring_size must be 1 to 3, got {r}")));
        }
    }
    match kind {
        ScenarioKind::Organic => {}
        ScenarioKind::Wash => {
            // Scripted days are non-adjacent and lie in [2, days - 2].
            let room = (p.days - 3).div_ceil(2);
            if p.wash_days == 0 || p.wash_days > room {
                return Err(invalid(format!("wash_days must be 1 to {room} for {} days", p.days)));
            }
        }
        ScenarioKind::Lpi => {
            if p.m < 2.5 {
                return Err(invalid(format!("m must be at least 2.5, got {}", p.m)));
            }
            let room = (p.days - 3).div_ceil(2);
            if p.lpi_days == 0 || p.lpi_days > room {
                return Err(invalid(format!("lpi_days must be 1 to {room} for {} days", p.days)));
            }
            // Each inflation multiplies the quote reserve by √m; the last one is the costliest.
            let last_cost = p.depth * p.m.sqrt().powi(p.lpi_days as i32 - 1) * (p.m.sqrt() - 1.0);
            if last_cost * 1.1 >= 1_000.0 {
                return Err(invalid(format!("LPI buy of about {last_cost:.2} USD leaves no margin below 1000 USD")));
            }
        }
        ScenarioKind::PumpDump => {
            if p.pump_pct < 75.0 {
                return Err(invalid(format!("pump_pct must be at least 75, got {}", p.pump_pct)));
            }
            if !(1..=12).contains(&p.ramp_hours) || !(1..=6).contains(&p.dump_hours) {
                return Err(invalid("ramp_hours must be 1 to 12 and dump_hours 1 to 6"));
            }
        }
        ScenarioKind::RugPull => {
            if !(p.drop_ratio > 0.0 && p.drop_ratio <= 0.005) {
                return Err(invalid(format!("drop_ratio must be in (0, 0.005], got {}", p.drop_ratio)));
            }
            if !(p.post_volume_ratio >= 0.0 && p.post_volume_ratio <= 0.002) {
                return Err(invalid(format!("post_volume_ratio must be in [0, 0.002], got {}", p.post_volume_ratio)));
            }
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioOutput {
    pub dataset: Dataset,
    pub labels: Vec<Label>,
}

impl ScenarioOutput {
    /// Writes the five dataset CSVs plus `labels.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_dataset(&self.dataset, dir)?;
        write_labels(&self.labels, &dir.join("labels.csv"))
    }
}

/// Generates every token of `spec` and runs the post-generation self-check.
pub fn generate(spec: &ScenarioSpec) -> Result<ScenarioOutput> {
    let params = resolve(spec)?;
    let tokens: Vec<TokenOutput> =
        (0..spec.token_count).into_par_iter().map(|i| generate_token(spec, &params, i)).collect::<Result<_>>()?;

    let mut out = ScenarioOutput::default();
    for t in tokens {
        let id = t.record.token_id.clone();
        out.dataset.tokens.insert(id.clone(), t.record);
        out.dataset.ohlcv.insert(id.clone(), t.bars);
        out.dataset.trades.insert(id.clone(), t.trades);
        out.dataset.holders.insert(id.clone(), t.holders);
        out.dataset.economics.insert(id, t.economics);
        out.labels.extend(t.labels);
    }
    out.labels.sort();
    Ok(out)
}

struct TokenOutput {
    record: TokenRecord,
    bars: Vec<OhlcvBar>,
    trades: Vec<Trade>,
    holders: Vec<HolderSnapshot>,
    economics: Vec<TokenEconomics>,
    labels: Vec<Label>,
}

/// Scripted episodes chosen for one token.
#[derive(Debug, Clone, Default)]
struct Script {
    wash_days: BTreeSet<usize>,
    lpi_days: BTreeSet<usize>,
    /// Absolute hour index of the first ramp hour.
    ramp_start: Option<usize>,
    /// Rug day and second of that day.
    rug: Option<(usize, i64)>,
    ring: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
enum Action {
    Organic { amount: f64, maker: usize },
    WashPair { actor: usize, quote: f64 },
    Whale,
    Ramp(usize),
    Dump(usize),
    Rug,
}

#[derive(Debug, Clone, Default)]
struct PumpState {
    start_price: f64,
    churn_per_hour: f64,
    holdings: Vec<f64>,
}

struct Market<'a> {
    p: &'a Params,
    rng: ChaCha20Rng,
    pool: PoolState,
    anchor: f64,
    bars: Vec<OhlcvBar>,
    trades: Vec<Trade>,
    makers: Vec<String>,
    pump: PumpState,
}

fn self_check_error(token_id: &str, msg: impl fmt::Display) -> Error {
    Error::SelfCheck(format!("{token_id}: {msg}"))
}

impl Market<'_> {
    /// Emits flat bars until bar `hour` exists.
    fn advance(&mut self, hours: usize) {
        let price = self.pool.spot_price();
        while self.bars.len() < hours {
            let ts = T0 + self.bars.len() as i64 * SECONDS_PER_HOUR;
            self.bars.push(OhlcvBar { ts, open: price, high: price, low: price, close: price, volume_usd: 0.0 });
        }
    }

    fn print(&mut self, ts: i64, maker: &str, side: Side, amount: f64) {
        let price = self.pool.spot_price();
        let bar = self.bars.last_mut().expect("advance precedes every trade");
        bar.high = bar.high.max(price);
        bar.low = bar.low.min(price);
        bar.close = price;
        bar.volume_usd += amount;
        self.trades.push(Trade { ts, maker_id: maker.to_owned(), side, amount_usd: amount });
    }

    fn touch(&mut self, ts: i64) {
        self.advance(((ts - T0) / SECONDS_PER_HOUR) as usize + 1);
    }

    fn buy(&mut self, ts: i64, maker: &str, quote: f64) -> Result<f64> {
        self.touch(ts);
        let (tokens, next) = self.pool.swap_quote_in(quote).map_err(|e| self_check_error(maker, e))?;
        self.pool = next;
        self.print(ts, maker, Side::Buy, quote);
        Ok(tokens)
    }

    fn sell_tokens(&mut self, ts: i64, maker: &str, tokens: f64) -> Result<f64> {
        self.touch(ts);
        let (quote, next) = self.pool.swap_token_in(tokens).map_err(|e| self_check_error(maker, e))?;
        self.pool = next;
        self.print(ts, maker, Side::Sell, quote);
        Ok(quote)
    }

    fn sell_for_quote(&mut self, ts: i64, maker: &str, quote: f64) -> Result<()> {
        self.touch(ts);
        let (_, next) = self.pool.swap_exact_quote_out(quote).map_err(|e| self_check_error(maker, e))?;
        self.pool = next;
        self.print(ts, maker, Side::Sell, quote);
        Ok(())
    }

    fn volume_between(&self, from: i64, to: i64) -> f64 {
        self.bars.iter().filter(|b| b.ts >= from && b.ts < to).map(|b| b.volume_usd).sum()
    }

    /// Lognormal orders summing exactly to `target`, split at the size cap.
    fn organic_orders(&mut self, day: usize, target: f64) -> Vec<(i64, Action)> {
        if target <= 0.0 {
            return Vec::new();
        }
        let lognormal = LogNormal::<f64>::new(0.0, 1.0).expect("valid parameters");
        let weights: Vec<f64> = (0..self.p.trades_per_day).map(|_| self.rng.sample(lognormal)).collect();
        let total: f64 = weights.iter().sum();
        let cap = ORDER_CAP * self.pool.reserve_quote();
        let mut orders = Vec::new();
        for w in weights {
            let amount = target * w / total;
            let pieces = (amount / cap).ceil().max(1.0) as usize;
            let maker = self.rng.random_range(0..ORGANIC_MAKERS);
            for _ in 0..pieces {
                let ts = day_start_ts(day) + self.rng.random_range(0..SECONDS_PER_DAY);
                orders.push((ts, Action::Organic { amount: amount / pieces as f64, maker }));
            }
        }
        orders
    }

    fn execute(&mut self, ts: i64, action: Action, script: &Script) -> Result<()> {
        let p = self.p;
        match action {
            Action::Organic { amount, maker } => {
                let price = self.pool.spot_price();
                let side = if price > self.anchor * (1.0 + BAND) {
                    Side::Sell
                } else if price < self.anchor * (1.0 - BAND) {
                    Side::Buy
                } else if self.rng.random_bool(0.5) {
                    Side::Buy
                } else {
                    Side::Sell
                };
                let maker = self.makers[maker].clone();
                match side {
                    Side::Buy => {
                        self.buy(ts, &maker, amount)?;
                    }
                    Side::Sell => self.sell_for_quote(ts, &maker, amount)?,
                }
            }
            Action::WashPair { actor, quote } => {
                let tokens = self.buy(ts, &script.ring[actor], quote)?;
                self.sell_tokens(ts, &script.ring[actor], tokens)?;
            }
            Action::Whale => {
                let quote = self.pool.cost_to_multiply_price(p.m).map_err(|e| self_check_error("whale", e))?;
                self.buy(ts, "whale", quote)?;
                self.anchor = self.pool.spot_price();
            }
            Action::Ramp(step) => {
                let ring = script.ring.len();
                if step == 0 {
                    let prior = self.volume_between(ts - 48 * SECONDS_PER_HOUR, ts);
                    let max_daily = p.base_volume() * (1.0 + p.surge_cap_pct / 100.0).sqrt();
                    self.pump = PumpState {
                        start_price: self.pool.spot_price(),
                        churn_per_hour: (8.0 * prior).max(6.0 * max_daily) / p.ramp_hours as f64,
                        holdings: vec![0.0; ring],
                    };
                }
                let mut remaining = self.pump.churn_per_hour;
                let mut pair = 0;
                while remaining > 1e-9 * self.pump.churn_per_hour {
                    let quote = (remaining / 2.0).min(0.05 * self.pool.reserve_quote());
                    let actor = &script.ring[pair % ring];
                    let tokens = self.buy(ts, actor, quote)?;
                    remaining -= quote + self.sell_tokens(ts, actor, tokens)?;
                    pair += 1;
                }
                let growth = 1.0 + p.pump_pct / 100.0;
                let target = self.pump.start_price * growth.powf((step + 1) as f64 / p.ramp_hours as f64);
                let ratio = target / self.pool.spot_price();
                if ratio > 1.0 {
                    let quote = self.pool.cost_to_multiply_price(ratio).map_err(|e| self_check_error("ring", e))?;
                    let tokens = self.buy(ts, &script.ring[step % ring], quote)?;
                    self.pump.holdings[step % ring] += tokens;
                }
            }
            Action::Dump(step) => {
                for a in 0..script.ring.len() {
                    let amount = self.pump.holdings[a] / (p.dump_hours - step) as f64;
                    if amount > 0.0 {
                        self.pump.holdings[a] -= amount;
                        self.sell_tokens(ts, &script.ring[a], amount)?;
                    }
                }
                self.anchor = self.pool.spot_price();
            }
            Action::Rug => {
                let divisor = 1.0 / p.drop_ratio;
                let tokens = self.pool.tokens_to_divide_price(divisor).map_err(|e| self_check_error("deployer", e))?
                    / (1.0 - p.fee);
                self.sell_tokens(ts, "deployer", tokens)?;
                self.anchor = self.pool.spot_price();
            }
        }
        Ok(())
    }
}

fn day_start_ts(day: usize) -> i64 {
    T0 + day as i64 * SECONDS_PER_DAY
}

fn hour_ts(hour: usize) -> i64 {
    T0 + hour as i64 * SECONDS_PER_HOUR
}

/// Picks `n` pairwise non-adjacent days from `lo..=hi`, uniformly over all
/// such sets: `n` sorted offsets from `0..=len - n` shifted apart by their rank.
fn pick_days(rng: &mut ChaCha20Rng, n: usize, lo: usize, hi: usize) -> BTreeSet<usize> {
    let len = hi + 1 - lo;
    let mut offsets = rand::seq::index::sample(rng, len + 1 - n, n).into_vec();
    offsets.sort_unstable();
    offsets.into_iter().enumerate().map(|(i, c)| lo + c + i).collect()
}

const ADJECTIVES: [&str; 12] =
    ["Baby", "Based", "Mega", "Turbo", "Tiny", "Happy", "Angry", "Golden", "Moon", "Space", "Degen", "Sleepy"];
const NOUNS: [&str; 12] =
    ["Doge", "Pepe", "Cat", "Frog", "Shiba", "Monkey", "Penguin", "Bonk", "Wojak", "Hamster", "Corgi", "Goat"];

fn token_record(rng: &mut ChaCha20Rng, token_id: String) -> TokenRecord {
    let chain = *Chain::ALL.choose(rng).expect("non-empty");
    let mut bytes = [0u8; 32];
    rng.fill(&mut bytes);
    let address = if chain.is_evm() {
        let hex: String = bytes[..20].iter().map(|b| format!("{b:02x}")).collect();
        format!("0x{hex}")
    } else {
        bs58::encode(bytes).into_string()
    };
    let adj = *ADJECTIVES.choose(rng).expect("non-empty");
    let noun = *NOUNS.choose(rng).expect("non-empty");
    TokenRecord {
        token_id,
        chain,
        address,
        name: format!("{adj} {noun}"),
        symbol: format!("{}{}", &adj[..1], noun.to_uppercase()),
        created_at: T0,
        sources: BTreeSet::from(["scenario".to_owned()]),
    }
}

fn generate_token(spec: &ScenarioSpec, p: &Params, index: usize) -> Result<TokenOutput> {
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    let token_id = format!("{}-{index:04}", spec.kind);
    let record = token_record(&mut rng, token_id.clone());
    let days = p.days;

    let mut script = Script::default();
    let ring_size = p.ring_size.unwrap_or_else(|| rng.random_range(1..=3));
    script.ring = (0..ring_size).map(|k| format!("ring{k}")).collect();
    match spec.kind {
        ScenarioKind::Organic => {}
        ScenarioKind::Wash => script.wash_days = pick_days(&mut rng, p.wash_days, 2, days - 2),
        ScenarioKind::Lpi => script.lpi_days = pick_days(&mut rng, p.lpi_days, 2, days - 2),
        ScenarioKind::PumpDump => {
            script.ramp_start = Some(rng.random_range(3..=days - 7) * 24 + rng.random_range(0..24));
        }
        ScenarioKind::RugPull => {
            let second = rng.random_range(6..18) * SECONDS_PER_HOUR + rng.random_range(0..SECONDS_PER_HOUR);
            script.rug = Some((rng.random_range(8..=days - 9), second));
        }
    }

    let cap: f64 = (1.0 + p.surge_cap_pct / 100.0).sqrt();
    let mult_dist = LogNormal::<f64>::new(0.0, 0.25).expect("valid parameters");
    let mults: Vec<f64> = (0..days).map(|_| rng.sample(mult_dist).clamp(1.0 / cap, cap)).collect();

    let makers = (0..ORGANIC_MAKERS).map(|i| format!("m{i:03}")).collect();
    let pool = PoolState::new(p.depth / p.price, p.depth, p.fee).map_err(|e| invalid(e.to_string()))?;
    let mut market = Market {
        p,
        rng,
        pool,
        anchor: pool.spot_price(),
        bars: Vec::with_capacity(days * 24),
        trades: Vec::new(),
        makers,
        pump: PumpState::default(),
    };

    // Hours of the pump-and-dump episode, during which organic traders stay out.
    let blocked = script.ramp_start.map(|h| (hour_ts(h), hour_ts(h + p.ramp_hours + p.dump_hours)));
    let mut scheduled: Vec<(i64, Action)> = Vec::new();
    if let Some(h) = script.ramp_start {
        for k in 0..p.ramp_hours {
            scheduled.push((hour_ts(h + k) + 1800, Action::Ramp(k)));
        }
        for j in 0..p.dump_hours {
            scheduled.push((hour_ts(h + p.ramp_hours + j) + 1800, Action::Dump(j)));
        }
    }

    for day in 0..days {
        market.anchor = market.pool.spot_price();
        let start = day_start_ts(day);
        let mut actions: Vec<(i64, Action)> =
            scheduled.iter().filter(|(ts, _)| day_of(*ts) == day_of(start)).copied().collect();

        let mut organic_scale = 1.0;
        let mut organic_until = start + SECONDS_PER_DAY;
        if let Some((rug_day, second)) = script.rug {
            if day == rug_day {
                actions.push((start + second, Action::Rug));
                organic_until = start + second;
            } else if day > rug_day {
                organic_scale = p.post_volume_ratio;
            }
        }
        if script.lpi_days.contains(&day) {
            let second = market.rng.random_range(6..18) * SECONDS_PER_HOUR + market.rng.random_range(0..SECONDS_PER_HOUR);
            actions.push((start + second, Action::Whale));
            organic_scale = 0.0;
        }
        if script.wash_days.contains(&day) {
            let prior = market.volume_between(start - SECONDS_PER_DAY, start);
            // Each pair trades about 1.99 × its buy leg; plan for 1.9 to keep margin.
            let target = 8.0 * prior / 1.9;
            let reserve = market.pool.reserve_quote();
            let (mut planned, mut i) = (0.0, 0);
            while planned < target || i < script.ring.len() {
                let quote = reserve * market.rng.random_range(0.005..0.02);
                let ts = start + market.rng.random_range(0..SECONDS_PER_DAY);
                actions.push((ts, Action::WashPair { actor: i % script.ring.len(), quote }));
                planned += quote;
                i += 1;
            }
            if p.circular {
                organic_scale = 0.0;
            }
        }

        let target = p.base_volume() * mults[day] * organic_scale;
        let organic = market.organic_orders(day, target);
        actions.extend(organic.into_iter().filter(|(ts, _)| {
            *ts < organic_until && !blocked.is_some_and(|(from, to)| (from..to).contains(ts))
        }));
        actions.sort_by_key(|a| a.0);
        for (ts, action) in actions {
            market.execute(ts, action, &script)?;
        }
    }
    market.advance(days * 24);

    let supply = 10.0 * p.depth / p.price;
    let daily = aggregate_daily(&market.bars);
    let economics = daily
        .iter()
        .map(|d| TokenEconomics {
            ts: day_end(d.day),
            price_usd: d.close,
            circulating_supply: Some(supply),
            market_cap_usd: Some(market_cap(d.close, supply)),
            liquidity_usd: None,
        })
        .collect();
    let holders = (0..days.div_ceil(7))
        .map(|w| {
            let mut share = || market.rng.random_range(2.0..28.0);
            HolderSnapshot {
                ts: T0 + w as i64 * 7 * SECONDS_PER_DAY,
                top10_share: share(),
                bundle_buy_share: share(),
                fresh_address_share: share(),
                airdrop_share: share(),
                honeypot: false,
            }
        })
        .collect();

    let labels = labels_for(&token_id, spec.kind, p, &script);
    let out = TokenOutput { record, bars: market.bars, trades: market.trades, holders, economics, labels };
    self_check(spec.kind, p, &script, &out).map_err(|msg| self_check_error(&token_id, msg))?;
    Ok(out)
}

fn labels_for(token_id: &str, kind: ScenarioKind, p: &Params, script: &Script) -> Vec<Label> {
    let label = |kind, window_start, window_end| Label { token_id: token_id.to_owned(), kind, window_start, window_end };
    let day_label = |kind, d: usize| label(kind, day_start_ts(d), day_start_ts(d) + SECONDS_PER_DAY - 1);
    let mut out = Vec::new();
    for &d in &script.wash_days {
        out.push(day_label(EventKind::WashZeroRisk, d));
        if p.circular {
            out.push(day_label(EventKind::WashCircular, d));
        }
    }
    if let (true, Some(first), Some(last)) = (script.wash_days.len() >= 2, script.wash_days.first(), script.wash_days.last()) {
        out.push(label(EventKind::WashPersistent, day_start_ts(*first), day_start_ts(*last) + SECONDS_PER_DAY - 1));
    }
    for &d in &script.lpi_days {
        out.push(day_label(EventKind::Lpi, d));
    }
    if let Some(h) = script.ramp_start {
        out.push(label(EventKind::PumpAndDump, hour_ts(h), hour_ts(h + p.ramp_hours + p.dump_hours) - 1));
    }
    if let Some((d, _)) = script.rug {
        out.push(label(EventKind::RugPull, day_start_ts(d), day_start_ts(d + 7) + SECONDS_PER_DAY - 1));
    }
    debug_assert!(kind != ScenarioKind::Organic || out.is_empty());
    out.sort();
    out
}

/// Verifies the generator's guarantees directly on the emitted series.
fn self_check(kind: ScenarioKind, p: &Params, script: &Script, out: &TokenOutput) -> std::result::Result<(), String> {
    if out.bars.len() != p.days * 24 {
        return Err(format!("expected {} hourly bars, got {}", p.days * 24, out.bars.len()));
    }
    if let Some(b) = out.bars.iter().find(|b| b.validate().is_err()) {
        return Err(format!("invalid bar at {}", b.ts));
    }
    if let Some(t) = out.trades.iter().find(|t| !(t.amount_usd.is_finite() && t.amount_usd > 0.0)) {
        return Err(format!("non-positive trade at {}", t.ts));
    }
    let daily = aggregate_daily(&out.bars);
    let day_trades = |d: usize| {
        let (from, to) = (day_start_ts(d), day_start_ts(d + 1));
        out.trades.iter().filter(move |t| t.ts >= from && t.ts < to)
    };
    let close_change = |d: usize| daily[d].close / daily[d - 1].close - 1.0;

    match kind {
        ScenarioKind::Organic => check_organic(p, &out.bars, &daily)?,
        ScenarioKind::Wash => {
            for &d in &script.wash_days {
                if daily[d].volume_usd <= 6.0 * daily[d - 1].volume_usd {
                    return Err(format!("wash day {d} volume is not above 6x the prior day"));
                }
                if close_change(d).abs() >= 0.05 {
                    return Err(format!("wash day {d} close moved {:.2}%", 100.0 * close_change(d)));
                }
                for actor in &script.ring {
                    let (mut buy, mut sell) = (0.0, 0.0);
                    for t in day_trades(d).filter(|t| &t.maker_id == actor) {
                        match t.side {
                            Side::Buy => buy += t.amount_usd,
                            Side::Sell => sell += t.amount_usd,
                        }
                    }
                    if buy <= 0.0 || sell <= 0.0 || (buy - sell).abs() / buy.max(sell) >= 0.02 {
                        return Err(format!("ring actor {actor} is not balanced on day {d}"));
                    }
                }
                if p.circular && day_trades(d).any(|t| !script.ring.contains(&t.maker_id)) {
                    return Err(format!("circular wash day {d} has outside makers"));
                }
            }
        }
        ScenarioKind::Lpi => {
            for &d in &script.lpi_days {
                if daily[d].volume_usd >= 1_000.0 {
                    return Err(format!("LPI day {d} volume {} is not below 1000", daily[d].volume_usd));
                }
                if daily[d].close <= 2.0 * daily[d - 1].close {
                    return Err(format!("LPI day {d} close did not double"));
                }
                if day_trades(d).any(|t| t.side != Side::Buy || t.maker_id != "whale") {
                    return Err(format!("LPI day {d} has trades other than the whale's buys"));
                }
            }
        }
        ScenarioKind::PumpDump => {
            let h = script.ramp_start.expect("pump_dump has a ramp");
            let peak = h + p.ramp_hours - 1;
            let dump_end = peak + p.dump_hours;
            let bars = &out.bars;
            let vol = |from: usize, to: usize| bars[from..to.min(bars.len())].iter().map(|b| b.volume_usd).sum::<f64>();
            let ramp_volume = vol(h, peak + 1);
            if bars[peak].close <= 1.5 * bars[h - 1].close {
                return Err("ramp rose less than 50%".into());
            }
            if ramp_volume <= 6.0 * vol(h - 48, h) {
                return Err("ramp volume is not above 6x the preceding 48 hours".into());
            }
            let trough = bars[peak + 1..=peak + 72].iter().map(|b| b.close).fold(f64::INFINITY, f64::min);
            if trough >= 0.7 * bars[peak].close {
                return Err("dump recovered less than 30% of the peak".into());
            }
            // Post-dump window of any trough the detector could pick, in mean hourly terms
            // against a pump phase of at most 24 hours.
            for s in dump_end..=peak + 72 {
                if s + 49 > bars.len() {
                    return Err("series ends before the post-dump window".into());
                }
                if vol(s + 1, s + 49) / 48.0 >= 0.5 * ramp_volume / 24.0 {
                    return Err(format!("post-dump volume after hour {s} did not decay"));
                }
            }
        }
        ScenarioKind::RugPull => {
            let (d, _) = script.rug.expect("rug_pull has a rug day");
            if close_change(d) >= -0.99 {
                return Err(format!("rug day close moved only {:.3}%", 100.0 * close_change(d)));
            }
            let mean = |s: &[DailyAggregate]| s.iter().map(|x| x.volume_usd).sum::<f64>() / s.len() as f64;
            let (prior, after) = (mean(&daily[d - 7..d]), mean(&daily[d + 1..=d + 7]));
            if !(prior > 0.0 && after < 0.01 * prior) {
                return Err("post-rug volume did not collapse below 1% of baseline".into());
            }
        }
    }
    Ok(())
}

fn check_organic(p: &Params, bars: &[OhlcvBar], daily: &[DailyAggregate]) -> std::result::Result<(), String> {
    for d in 1..daily.len() {
        let (prev, cur) = (&daily[d - 1], &daily[d]);
        if prev.volume_usd > 0.0 && cur.volume_usd / prev.volume_usd - 1.0 > p.surge_cap_pct / 100.0 + 1e-9 {
            return Err(format!("organic day {d} volume surge exceeds the cap"));
        }
        let hours = &bars[d * 24..(d + 1) * 24];
        if hours.iter().any(|b| (b.close / prev.close - 1.0).abs() >= 0.05) {
            return Err(format!("organic day {d} price left the 5% band"));
        }
    }
    Ok(())
}
