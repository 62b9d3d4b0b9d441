//! Name-based meme-token classification.
//!
//! Keywords are mined from a corpus of known meme-token names with TF-IDF,
//! truncated at the elbow of the ranked score curve, and stripped of a
//! stoplist of generic chain terms. A token is a meme when any word of its
//! name is one of the retained keywords.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{TokenEconomics, TokenRecord};

/// Lowercases, replaces every non-alphanumeric character with a space and
/// splits on whitespace.
pub fn preprocess_name(name: &str) -> Vec<String> {
    let cleaned: String = name
        .chars()
        .flat_map(char::to_lowercase)
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    cleaned.split_whitespace().map(str::to_owned).collect()
}

/// Ranks every word of the corpus by summed TF-IDF over documents.
///
/// Each name is one document; `tf` is the raw count and `idf = ln(N / df)`.
/// Because idf is per-term, the corpus score is `idf(t) · total_count(t)`,
/// which is independent of document order. Ties sort lexicographically.
pub fn tfidf_rank<S: AsRef<str>>(corpus: &[S]) -> Vec<(String, f64)> {
    let n_docs = corpus.len() as f64;
    let mut counts: HashMap<String, (u64, u64)> = HashMap::new();
    for name in corpus {
        let words = preprocess_name(name.as_ref());
        let distinct: BTreeSet<&String> = words.iter().collect();
        for w in &words {
            counts.entry(w.clone()).or_default().0 += 1;
        }
        for w in distinct {
            counts.get_mut(w).expect("counted above").1 += 1;
        }
    }
    let mut ranked: Vec<(String, f64)> = counts
        .into_iter()
        .map(|(word, (total, df))| {
            let idf = (n_docs / df as f64).ln();
            (word, total as f64 * idf)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
}

/// 1-based index of the point farthest from the chord joining the first and
/// last points of a non-increasing score curve. Ties go to the smaller index.
pub fn elbow_cutoff(scores: &[f64]) -> Result<usize> {
    let n = scores.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!("elbow needs at least 3 scores, got {n}")));
    }
    let (first, last) = (scores[0], scores[n - 1]);
    let span = (n - 1) as f64;
    let rise = last - first;
    // Twice the triangle area spanned with the chord; proportional to distance.
    let dist = |i: usize| (rise * i as f64 - span * (scores[i] - first)).abs();
    let scale = rise.abs().max(span * scores.iter().fold(0.0f64, |m, s| m.max((s - first).abs())));
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);

    let mut best = 0;
    let mut best_dist = dist(0);
    for i in 1..n {
        let d = dist(i);
        if d > best_dist + tol {
            best = i;
            best_dist = d;
        }
    }
    Ok(best + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeywordModel {
    /// Ranked keywords with the stoplist already removed.
    pub keywords: Vec<(String, f64)>,
    pub cutoff_k: usize,
    pub stoplist: BTreeSet<String>,
}

impl KeywordModel {
    /// Builds a model from a verified meme corpus.
    ///
    /// The cutoff is taken on the full ranking (elbow unless `cutoff` is
    /// given), then stoplisted words are removed and `cutoff_k` shrinks to the
    /// number of surviving words inside the original cutoff.
    pub fn build<S: AsRef<str>>(
        corpus: &[S],
        stoplist: BTreeSet<String>,
        cutoff: Option<usize>,
    ) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::InvalidArgument("keyword corpus is empty".into()));
        }
        let ranked = tfidf_rank(corpus);
        let raw_k = match cutoff {
            Some(0) => return Err(Error::InvalidArgument("cutoff must be positive".into())),
            Some(k) => k.min(ranked.len()),
            None => {
                let scores: Vec<f64> = ranked.iter().map(|(_, s)| *s).collect();
                elbow_cutoff(&scores)?
            }
        };
        let stoplist: BTreeSet<String> = stoplist.into_iter().map(|w| w.to_lowercase()).collect();
        let cutoff_k = ranked[..raw_k].iter().filter(|(w, _)| !stoplist.contains(w)).count();
        if cutoff_k == 0 {
            return Err(Error::InvalidArgument("every keyword above the cutoff is stoplisted".into()));
        }
        let keywords = ranked.into_iter().filter(|(w, _)| !stoplist.contains(w)).collect();
        Ok(Self { keywords, cutoff_k, stoplist })
    }

    pub fn top_keywords(&self) -> impl Iterator<Item = &str> {
        self.keywords.iter().take(self.cutoff_k).map(|(w, _)| w.as_str())
    }

    pub fn is_meme(&self, name: &str) -> bool {
        let top: BTreeSet<&str> = self.top_keywords().collect();
        preprocess_name(name).iter().any(|w| top.contains(w.as_str()))
    }

    /// Writes the retained keywords as `rank,word,score`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_write_err(path, e))?;
        w.write_record(["rank", "word", "score"]).map_err(|e| csv_write_err(path, e))?;
        for (i, word) in self.top_keywords().enumerate() {
            let score = self.keywords[i].1;
            w.write_record([(i + 1).to_string(), word.to_owned(), score.to_string()])
                .map_err(|e| csv_write_err(path, e))?;
        }
        w.flush().map_err(|source| Error::Write { path: path.to_owned(), source })
    }

    /// Reads a `rank,word,score` file; every row is a retained keyword.
    pub fn read_csv(path: &Path, stoplist: BTreeSet<String>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::Csv { path: path.to_owned(), message: e.to_string() })?;
        let mut rows: Vec<(usize, String, f64)> = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::Csv { path: path.to_owned(), message: e.to_string() })?;
            let bad = || Error::Csv { path: path.to_owned(), message: format!("bad keyword row {:?}", rec) };
            let rank = rec.get(0).and_then(|s| s.trim().parse().ok()).ok_or_else(bad)?;
            let word = rec.get(1).ok_or_else(bad)?.trim().to_lowercase();
            let score = rec.get(2).and_then(|s| s.trim().parse().ok()).ok_or_else(bad)?;
            rows.push((rank, word, score));
        }
        rows.sort_by_key(|r| r.0);
        let keywords: Vec<(String, f64)> =
            rows.into_iter().map(|(_, w, s)| (w, s)).filter(|(w, _)| !stoplist.contains(w)).collect();
        if keywords.is_empty() {
            return Err(Error::InvalidArgument(format!("{}: no keywords", path.display())));
        }
        Ok(Self { cutoff_k: keywords.len(), keywords, stoplist })
    }
}

fn csv_write_err(path: &Path, e: csv::Error) -> Error {
    Error::Write { path: path.to_owned(), source: std::io::Error::other(e.to_string()) }
}

/// `true` when `name` is classified as a meme token under `model`.
pub fn classify_name(name: &str, model: &KeywordModel) -> bool {
    model.is_meme(name)
}

/// Loads a newline-separated stoplist; blank lines and `#` comments are skipped.
pub fn read_stoplist(path: &Path) -> Result<BTreeSet<String>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.to_owned(), source })?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect())
}

/// pump.fun mints end in the literal, case-sensitive suffix `pump`.
pub fn is_pumpfun(address: &str) -> bool {
    address.ends_with("pump")
}

pub const MAX_MEME_PRICE_USD: f64 = 0.80;
pub const MAX_MEME_MARKET_CAP_USD: f64 = 1e7;
const EXCLUDED_NAME_PARTS: [&str; 3] = ["usd", "wrapped", "staked"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RemovalStage {
    /// Listed stablecoin.
    Stablecoin = 1,
    /// Priced or capitalized like an established asset and tagged non-meme.
    EstablishedNonMeme = 2,
    /// Name marks a wrapped, staked or dollar-pegged asset.
    DerivativeName = 3,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Refinement {
    pub kept: Vec<String>,
    pub removed: Vec<(String, RemovalStage)>,
}

/// Drops non-meme tokens in three ordered stages; the first matching stage
/// is the recorded reason.
pub fn refine(
    tokens: &BTreeMap<String, TokenRecord>,
    economics: &BTreeMap<String, Vec<TokenEconomics>>,
    stablecoin_ids: &BTreeSet<String>,
    nonmeme_tagged_ids: &BTreeSet<String>,
) -> Refinement {
    let mut out = Refinement::default();
    for (id, token) in tokens {
        let established = || {
            economics.get(id).and_then(|v| v.last()).is_some_and(|e| {
                e.price_usd > MAX_MEME_PRICE_USD || e.market_cap_usd.is_some_and(|m| m > MAX_MEME_MARKET_CAP_USD)
            })
        };
        let lower = token.name.to_lowercase();
        let stage = if stablecoin_ids.contains(id) {
            Some(RemovalStage::Stablecoin)
        } else if nonmeme_tagged_ids.contains(id) && established() {
            Some(RemovalStage::EstablishedNonMeme)
        } else if EXCLUDED_NAME_PARTS.iter().any(|p| lower.contains(p)) {
            Some(RemovalStage::DerivativeName)
        } else {
            None
        };
        match stage {
            Some(s) => out.removed.push((id.clone(), s)),
            None => out.kept.push(id.clone()),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Chain;

    fn model(words: &[&str]) -> KeywordModel {
        KeywordModel {
            keywords: words.iter().map(|w| (w.to_string(), 1.0)).collect(),
            cutoff_k: words.len(),
            stoplist: BTreeSet::new(),
        }
    }

    #[test]
    fn preprocess_examples() {
        assert_eq!(preprocess_name("Dogecoin (BSC)"), ["dogecoin", "bsc"]);
        assert_eq!(preprocess_name("PEPE!"), ["pepe"]);
        assert!(preprocess_name("").is_empty());
        assert_eq!(preprocess_name("baby-doge_2.0"), ["baby", "doge", "2", "0"]);
    }

    #[test]
    fn tfidf_two_doc_example() {
        let ranked = tfidf_rank(&["a b", "a c"]);
        let words: Vec<&str> = ranked.iter().map(|(w, _)| w.as_str()).collect();
        assert_eq!(words, ["b", "c", "a"]);
        assert_eq!(ranked[2].1, 0.0);
        assert!((ranked[0].1 - 2f64.ln()).abs() < 1e-12);
        assert!((ranked[1].1 - 0.693_147_180_559_945_3).abs() < 1e-12);
    }

    #[test]
    fn tfidf_identical_names_score_zero() {
        let ranked = tfidf_rank(&["moon", "moon", "moon"]);
        assert_eq!(ranked, [("moon".to_string(), 0.0)]);
    }

    #[test]
    fn tfidf_singleton_in_four_docs() {
        let ranked = tfidf_rank(&["rare x", "x", "x", "x"]);
        let rare = ranked.iter().find(|(w, _)| w == "rare").unwrap();
        assert!((rare.1 - 4f64.ln()).abs() < 1e-12);
        assert!((rare.1 - 1.386).abs() < 1e-3);
    }

    #[test]
    fn elbow_examples() {
        assert_eq!(elbow_cutoff(&[10.0, 1.0, 0.9, 0.8]).unwrap(), 2);
        assert_eq!(elbow_cutoff(&[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap(), 1);
        assert_eq!(elbow_cutoff(&[0.9, 0.8, 0.7, 0.6, 0.5, 0.4]).unwrap(), 1);
        assert_eq!(elbow_cutoff(&[5.0, 5.0, 0.0, 0.0]).unwrap(), 2);
        assert!(elbow_cutoff(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn classify_examples() {
        let m = model(&["doge", "moon", "pepe"]);
        assert!(m.is_meme("Baby Doge Moon"));
        assert!(!m.is_meme("Liquid Staking Derivative"));
        assert!(m.is_meme("DOGE"));
    }

    #[test]
    fn build_strips_stoplist_inside_cutoff() {
        let corpus = ["Doge (BSC)", "Doge (SOL)", "Pepe (BSC)", "Moon Cat", "Cat"];
        let stop: BTreeSet<String> = ["bsc", "sol"].iter().map(|s| s.to_string()).collect();
        let m = KeywordModel::build(&corpus, stop.clone(), Some(5)).unwrap();
        assert!(m.top_keywords().all(|w| !stop.contains(w)));
        assert!(m.cutoff_k <= m.keywords.len());
        assert!(m.keywords.windows(2).all(|w| w[0].1 >= w[1].1));
        assert!(!m.is_meme("Solana BSC bridge"));
    }

    #[test]
    fn model_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.csv");
        let m = KeywordModel::build(&["doge moon", "pepe", "cat moon", "inu"], BTreeSet::new(), Some(3)).unwrap();
        m.write_csv(&path).unwrap();
        let back = KeywordModel::read_csv(&path, BTreeSet::new()).unwrap();
        assert_eq!(back.cutoff_k, 3);
        assert_eq!(back.top_keywords().collect::<Vec<_>>(), m.top_keywords().collect::<Vec<_>>());
    }

    #[test]
    fn pumpfun_suffix() {
        assert!(is_pumpfun("7GCihgDB8fe6KNjn2MYtkzZcRjQy3t9GHdC8uHYmW2hrpump"));
        assert!(!is_pumpfun("7GCihgDB8fe6KNjn2MYtkzZcRjQy3t9GHdC8uHYmW2hrPUMP"));
        assert!(!is_pumpfun("pumpabc"));
    }

    fn token(id: &str, name: &str) -> TokenRecord {
        TokenRecord {
            token_id: id.into(),
            chain: Chain::Ethereum,
            address: format!("0x{}", "a".repeat(40)),
            name: name.into(),
            symbol: "X".into(),
            created_at: 1,
            sources: BTreeSet::new(),
        }
    }

    fn econ(price: f64) -> Vec<TokenEconomics> {
        vec![TokenEconomics { ts: 1, price_usd: price, circulating_supply: None, market_cap_usd: None, liquidity_usd: None }]
    }

    #[test]
    fn refine_examples() {
        let tokens: BTreeMap<String, TokenRecord> = [
            token("weth", "Wrapped Ether"),
            token("tagged", "Depegged Thing"),
            token("cat", "MegaCat"),
            token("usdx", "Stable USDX"),
        ]
        .into_iter()
        .map(|t| (t.token_id.clone(), t))
        .collect();
        let economics: BTreeMap<_, _> =
            [("tagged".to_string(), econ(0.99)), ("cat".to_string(), econ(0.99))].into_iter().collect();
        let stables: BTreeSet<String> = ["usdx".to_string()].into();
        let tagged: BTreeSet<String> = ["tagged".to_string()].into();
        let r = refine(&tokens, &economics, &stables, &tagged);
        assert_eq!(r.kept, ["cat"]);
        let removed: BTreeMap<_, _> = r.removed.into_iter().collect();
        assert_eq!(removed["weth"], RemovalStage::DerivativeName);
        assert_eq!(removed["tagged"], RemovalStage::EstablishedNonMeme);
        assert_eq!(removed["usdx"], RemovalStage::Stablecoin);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rank_is_permutation_invariant(
                names in proptest::collection::vec("[a-e]{1,2}( [a-e]{1,2}){0,3}", 1..30),
                seed in any::<u64>(),
            ) {
                let mut shuffled = names.clone();
                let len = shuffled.len();
                let mut s = seed;
                for i in (1..len).rev() {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    shuffled.swap(i, (s >> 33) as usize % (i + 1));
                }
                prop_assert_eq!(tfidf_rank(&names), tfidf_rank(&shuffled));
            }

            #[test]
            fn punctuation_does_not_change_class(name in "[A-Za-z ]{0,20}", junk in "[!?.()#$%_-]{1,4}") {
                let m = model(&["doge", "moon", "cat"]);
                let noisy = format!("{junk}{}{junk}", name.replace(' ', &format!(" {junk} ")));
                prop_assert_eq!(m.is_meme(&name), m.is_meme(&noisy));
            }

            #[test]
            fn refine_partitions_input(names in proptest::collection::vec("[a-z ]{0,12}", 0..20)) {
                let tokens: BTreeMap<String, TokenRecord> = names.iter().enumerate()
                    .map(|(i, n)| (i.to_string(), token(&i.to_string(), n))).collect();
                let r = refine(&tokens, &BTreeMap::new(), &BTreeSet::new(), &BTreeSet::new());
                let mut all: Vec<String> = r.kept.clone();
                all.extend(r.removed.iter().map(|(id, _)| id.clone()));
                all.sort();
                let mut expected: Vec<String> = tokens.keys().cloned().collect();
                expected.sort();
                prop_assert_eq!(all, expected);
            }
        }
    }
}
