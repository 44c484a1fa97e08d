//! Distributional semantic space construction: basis selection, windowed
//! co-occurrence counting, local mutual information weighting, optional row
//! normalization and truncated SVD.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

pub const SPACE_FORMAT_VERSION: u32 = 1;

/// Sentences per counting shard.
const SHARD_SIZE: usize = 512;

/// Joins a verb and its object into a single phrase token.
pub fn phrase_token(verb: &str, object: &str) -> String {
    format!("{verb}_{object}")
}

/// A tokenized corpus. Co-occurrence windows never cross sentence boundaries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub sentences: Vec<Vec<String>>,
}

impl Corpus {
    pub fn new(sentences: Vec<Vec<String>>) -> Self {
        Corpus { sentences }
    }

    /// One sentence per line, tokens separated by whitespace. Tokens are
    /// lowercased; blank lines are skipped.
    pub fn parse_str(text: &str) -> Self {
        let sentences = text
            .lines()
            .map(|line| line.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>())
            .filter(|s| !s.is_empty())
            .collect();
        Corpus { sentences }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Corpus::parse_str(&text))
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.iter().all(Vec::is_empty)
    }

    pub fn frequencies(&self) -> BTreeMap<&str, u64> {
        let mut freq = BTreeMap::new();
        for token in self.sentences.iter().flatten() {
            *freq.entry(token.as_str()).or_insert(0) += 1;
        }
        freq
    }

    /// Rewrites every adjacent `verb object` bigram listed in `phrases` into
    /// the single token `verb_object`, so the phrase gets a vector of its own.
    pub fn merge_phrases(&self, phrases: &[(String, String)]) -> Corpus {
        if phrases.is_empty() {
            return self.clone();
        }
        let wanted: BTreeSet<(&str, &str)> = phrases.iter().map(|(v, o)| (v.as_str(), o.as_str())).collect();
        let sentences = self
            .sentences
            .iter()
            .map(|sentence| {
                let mut out = Vec::with_capacity(sentence.len());
                let mut i = 0;
                while i < sentence.len() {
                    if i + 1 < sentence.len() && wanted.contains(&(sentence[i].as_str(), sentence[i + 1].as_str())) {
                        out.push(phrase_token(&sentence[i], &sentence[i + 1]));
                        i += 2;
                    } else {
                        out.push(sentence[i].clone());
                        i += 1;
                    }
                }
                out
            })
            .collect();
        Corpus { sentences }
    }
}

/// The `k` most frequent non-stopword tokens after dropping the `skip_top`
/// most frequent ones. Ties are broken lexicographically.
pub fn select_basis(corpus: &Corpus, k: usize, stopwords: &BTreeSet<String>, skip_top: usize) -> Result<Vec<String>> {
    if corpus.is_empty() {
        return Err(Error::Empty("corpus".into()));
    }
    if k == 0 {
        return Err(Error::Config("basis size must be positive".into()));
    }
    let mut ranked: Vec<(&str, u64)> = corpus
        .frequencies()
        .into_iter()
        .filter(|(w, _)| !stopwords.contains(*w))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let eligible = ranked.len().saturating_sub(skip_top);
    if eligible < k {
        return Err(Error::NotEnoughBasisWords {
            requested: k,
            found: eligible,
        });
    }
    Ok(ranked
        .into_iter()
        .skip(skip_top)
        .take(k)
        .map(|(w, _)| w.to_string())
        .collect())
}

/// Raw co-occurrence counts of target words against context (basis) words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CooccurrenceTable {
    pub targets: Vec<String>,
    pub contexts: Vec<String>,
    /// Row-major `targets × contexts`.
    pub counts: Vec<u64>,
    pub target_totals: Vec<u64>,
    pub context_totals: Vec<u64>,
    pub grand_total: u64,
}

impl CooccurrenceTable {
    pub fn zeros(targets: Vec<String>, contexts: Vec<String>) -> Self {
        let (t, c) = (targets.len(), contexts.len());
        CooccurrenceTable {
            targets,
            contexts,
            counts: vec![0; t * c],
            target_totals: vec![0; t],
            context_totals: vec![0; c],
            grand_total: 0,
        }
    }

    pub fn get(&self, target: usize, context: usize) -> u64 {
        self.counts[target * self.contexts.len() + context]
    }

    /// Count for a pair of words, zero when either is not in the table.
    pub fn count(&self, target: &str, context: &str) -> u64 {
        let t = self.targets.iter().position(|w| w == target);
        let c = self.contexts.iter().position(|w| w == context);
        match (t, c) {
            (Some(t), Some(c)) => self.get(t, c),
            _ => 0,
        }
    }

    fn add(&mut self, target: usize, context: usize, n: u64) {
        self.counts[target * self.contexts.len() + context] += n;
        self.target_totals[target] += n;
        self.context_totals[context] += n;
        self.grand_total += n;
    }

    /// Additive merge of two tables over the same targets and contexts.
    pub fn merge(mut self, other: &CooccurrenceTable) -> Result<CooccurrenceTable> {
        if self.targets != other.targets || self.contexts != other.contexts {
            return Err(Error::ShapeMismatch(
                "cannot merge co-occurrence tables over different vocabularies".into(),
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.target_totals.iter_mut().zip(&other.target_totals) {
            *a += b;
        }
        for (a, b) in self.context_totals.iter_mut().zip(&other.context_totals) {
            *a += b;
        }
        self.grand_total += other.grand_total;
        Ok(self)
    }
}

/// Counts co-occurrences for every word of the corpus vocabulary.
pub fn count_cooccurrences(corpus: &Corpus, basis: &[String], window: usize) -> Result<CooccurrenceTable> {
    let targets: Vec<String> = corpus.frequencies().keys().map(|w| w.to_string()).collect();
    count_cooccurrences_for(corpus, &targets, basis, window)
}

/// `counts[t][c]` is the number of position pairs where `c` occurs within
/// `window` tokens of `t`, on either side, in the same sentence.
pub fn count_cooccurrences_for(
    corpus: &Corpus,
    targets: &[String],
    basis: &[String],
    window: usize,
) -> Result<CooccurrenceTable> {
    if window == 0 {
        return Err(Error::Config("window must be at least 1".into()));
    }
    let target_ix: HashMap<&str, usize> = targets.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let context_ix: HashMap<&str, usize> = basis.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let empty = CooccurrenceTable::zeros(targets.to_vec(), basis.to_vec());

    let count_shard = |shard: &[Vec<String>]| {
        let mut table = empty.clone();
        for sentence in shard {
            let ctx: Vec<Option<usize>> = sentence.iter().map(|w| context_ix.get(w.as_str()).copied()).collect();
            for (pos, word) in sentence.iter().enumerate() {
                let Some(&t) = target_ix.get(word.as_str()) else {
                    continue;
                };
                let lo = pos.saturating_sub(window);
                let hi = (pos + window).min(sentence.len() - 1);
                for (other, c) in ctx.iter().enumerate().take(hi + 1).skip(lo) {
                    if other == pos {
                        continue;
                    }
                    if let Some(c) = *c {
                        table.add(t, c, 1);
                    }
                }
            }
        }
        table
    };

    corpus
        .sentences
        .par_chunks(SHARD_SIZE)
        .map(|shard| Ok(count_shard(shard)))
        .try_reduce(|| empty.clone(), |a, b| a.merge(&b))
}

/// Local mutual information: `count · ln(count · N / (row · col))`, with zero
/// counts mapping to zero. Negative values are kept.
pub fn weight_lmi(table: &CooccurrenceTable) -> DMatrix<f64> {
    let (rows, cols) = (table.targets.len(), table.contexts.len());
    let n = table.grand_total as f64;
    DMatrix::from_fn(rows, cols, |t, c| {
        let count = table.get(t, c);
        if count == 0 {
            return 0.0;
        }
        let count = count as f64;
        let expected = table.target_totals[t] as f64 * table.context_totals[c] as f64;
        count * (count * n / expected).ln()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpaceConfig {
    pub basis_size: usize,
    pub skip_top: usize,
    pub stopwords: BTreeSet<String>,
    pub window: usize,
    pub svd_rank: usize,
    pub normalize: bool,
    /// Minimum corpus frequency for a word to receive a vector.
    pub min_count: u64,
    /// Verb-object bigrams merged into single phrase tokens before counting.
    pub phrases: Vec<(String, String)>,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        SpaceConfig {
            basis_size: 2000,
            skip_top: 50,
            stopwords: BTreeSet::new(),
            window: 5,
            svd_rank: 300,
            normalize: true,
            min_count: 1,
            phrases: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceMeta {
    pub format_version: u32,
    pub dim: usize,
    pub window: usize,
    pub basis_size: usize,
    pub skip_top: usize,
    pub weighting: String,
    pub svd_rank: usize,
    pub normalized: bool,
    pub min_count: u64,
    pub vocabulary_size: usize,
    pub basis: Vec<String>,
    pub stopwords: BTreeSet<String>,
    pub phrases: Vec<(String, String)>,
}

impl SpaceMeta {
    /// Metadata for a space that was not produced by [`build_space`].
    pub fn external(dim: usize, vocabulary_size: usize) -> Self {
        SpaceMeta {
            format_version: SPACE_FORMAT_VERSION,
            dim,
            window: 0,
            basis_size: 0,
            skip_top: 0,
            weighting: "external".into(),
            svd_rank: dim,
            normalized: false,
            min_count: 0,
            vocabulary_size,
            basis: Vec::new(),
            stopwords: BTreeSet::new(),
            phrases: Vec::new(),
        }
    }
}

/// Word → dense vector map.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticSpace {
    dim: usize,
    vectors: BTreeMap<String, DVector<f64>>,
    pub meta: SpaceMeta,
}

impl SemanticSpace {
    pub fn new(dim: usize, vectors: BTreeMap<String, DVector<f64>>, meta: SpaceMeta) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("space dimension must be positive".into()));
        }
        for v in vectors.values() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        Ok(SemanticSpace { dim, vectors, meta })
    }

    /// Builds a space from literal vectors; mostly for tests and callers with
    /// pre-trained embeddings.
    pub fn from_vectors<I, S>(dim: usize, vectors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, DVector<f64>)>,
        S: Into<String>,
    {
        let vectors: BTreeMap<String, DVector<f64>> = vectors.into_iter().map(|(w, v)| (w.into(), v)).collect();
        let meta = SpaceMeta::external(dim, vectors.len());
        SemanticSpace::new(dim, vectors, meta)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&DVector<f64>> {
        self.vectors.get(word)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vectors.contains_key(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    /// Out-of-vocabulary words resolve to the zero vector.
    pub fn vector_or_zero(&self, word: &str) -> DVector<f64> {
        match self.vectors.get(word) {
            Some(v) => v.clone(),
            None => {
                log::warn!("`{word}` is not in the semantic space; using the zero vector");
                DVector::zeros(self.dim)
            }
        }
    }

    fn meta_path(path: &Path) -> PathBuf {
        path.with_extension("meta.json")
    }

    /// Writes `word<TAB>v1<TAB>...<TAB>vd` lines plus a `.meta.json` sidecar.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (word, v) in &self.vectors {
            out.push_str(word);
            for x in v.iter() {
                write!(out, "\t{x}").expect("writing to a String");
            }
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))?;
        let meta_path = Self::meta_path(path);
        let json = serde_json::to_string_pretty(&self.meta).map_err(|e| Error::Json {
            path: meta_path.clone(),
            source: e,
        })?;
        std::fs::write(&meta_path, json + "\n").map_err(|e| Error::io(&meta_path, e))
    }

    /// Reads a space written by [`SemanticSpace::save`]. Values may be tab- or
    /// space-separated after the word. Without a sidecar the dimension is
    /// inferred from the first row.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let meta_path = Self::meta_path(path);
        let meta: Option<SpaceMeta> = match std::fs::read_to_string(&meta_path) {
            Ok(json) => Some(serde_json::from_str(&json).map_err(|e| Error::Json {
                path: meta_path.clone(),
                source: e,
            })?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => return Err(Error::io(&meta_path, e)),
        };
        if let Some(meta) = &meta {
            if meta.format_version != SPACE_FORMAT_VERSION {
                return Err(Error::parse(
                    &meta_path,
                    1,
                    format!("unsupported space format version {}", meta.format_version),
                ));
            }
        }

        let mut vectors = BTreeMap::new();
        let mut dim = meta.as_ref().map(|m| m.dim);
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (word, rest) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, lineno + 1, "expected `word<TAB>values`"))?;
            let values = rest
                .split(['\t', ' '])
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::parse(path, lineno + 1, e.to_string()))?;
            let want = *dim.get_or_insert(values.len());
            if values.len() != want {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    format!("expected {want} values, found {}", values.len()),
                ));
            }
            vectors.insert(word.to_string(), DVector::from_vec(values));
        }
        let dim = dim.ok_or_else(|| Error::Empty(format!("{} has no vectors", path.display())))?;
        let meta = meta.unwrap_or_else(|| SpaceMeta::external(dim, vectors.len()));
        SemanticSpace::new(dim, vectors, meta)
    }
}

/// Full pipeline: phrase merging, basis selection, counting, LMI weighting,
/// optional L2 row normalization, then projection onto the top `svd_rank`
/// singular directions (rows of `U_r Σ_r`).
pub fn build_space(corpus: &Corpus, config: &SpaceConfig) -> Result<SemanticSpace> {
    if config.svd_rank == 0 {
        return Err(Error::Config("svd rank must be positive".into()));
    }
    let corpus = corpus.merge_phrases(&config.phrases);
    let basis = select_basis(&corpus, config.basis_size, &config.stopwords, config.skip_top)?;
    let targets: Vec<String> = corpus
        .frequencies()
        .into_iter()
        .filter(|&(_, n)| n >= config.min_count)
        .map(|(w, _)| w.to_string())
        .collect();
    let max_rank = targets.len().min(basis.len());
    if config.svd_rank > max_rank {
        return Err(Error::RankTooLarge {
            rank: config.svd_rank,
            max: max_rank,
        });
    }

    let table = count_cooccurrences_for(&corpus, &targets, &basis, config.window)?;
    let mut weighted = weight_lmi(&table);
    if weighted.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateMatrix);
    }
    if config.normalize {
        for mut row in weighted.row_iter_mut() {
            let norm = row.norm();
            if norm > 0.0 {
                row /= norm;
            }
        }
    }

    let svd = linalg::svd(&weighted)?;
    let r = config.svd_rank;
    let mut projected = svd.u.columns(0, r).into_owned();
    for (j, mut col) in projected.column_iter_mut().enumerate() {
        col *= svd.sigma[j];
    }

    let vectors = targets
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), projected.row(i).transpose()))
        .collect();
    let meta = SpaceMeta {
        format_version: SPACE_FORMAT_VERSION,
        dim: r,
        window: config.window,
        basis_size: config.basis_size,
        skip_top: config.skip_top,
        weighting: "lmi (natural log, negative values kept)".into(),
        svd_rank: r,
        normalized: config.normalize,
        min_count: config.min_count,
        vocabulary_size: targets.len(),
        basis,
        stopwords: config.stopwords.clone(),
        phrases: config.phrases.clone(),
    };
    SemanticSpace::new(r, vectors, meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(lines: &[&str]) -> Corpus {
        Corpus::parse_str(&lines.join("\n"))
    }

    #[test]
    fn basis_skips_top_and_breaks_ties() {
        let c = corpus(&["a a a a a b b b b", "c c c d d"]);
        let basis = select_basis(&c, 2, &BTreeSet::new(), 1).unwrap();
        assert_eq!(basis, vec!["b", "c"]);

        let all = select_basis(&c, 4, &BTreeSet::new(), 0).unwrap();
        assert_eq!(all, vec!["a", "b", "c", "d"]);

        let tie = corpus(&["y x z"]);
        assert_eq!(select_basis(&tie, 3, &BTreeSet::new(), 0).unwrap(), vec!["x", "y", "z"]);
    }

    #[test]
    fn basis_respects_stopwords_and_errors() {
        let c = corpus(&["the the the cat cat dog"]);
        let stop: BTreeSet<String> = ["the".to_string()].into();
        assert_eq!(select_basis(&c, 2, &stop, 0).unwrap(), vec!["cat", "dog"]);
        assert!(matches!(
            select_basis(&c, 3, &stop, 0),
            Err(Error::NotEnoughBasisWords { requested: 3, found: 2 })
        ));
        assert!(matches!(
            select_basis(&Corpus::default(), 1, &stop, 0),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn window_one_counts() {
        let c = corpus(&["a b c"]);
        let basis: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let t = count_cooccurrences(&c, &basis, 1).unwrap();
        assert_eq!(t.count("a", "b"), 1);
        assert_eq!(t.count("b", "a"), 1);
        assert_eq!(t.count("b", "c"), 1);
        assert_eq!(t.count("c", "b"), 1);
        assert_eq!(t.count("a", "c"), 0);
        assert_eq!(t.count("a", "a"), 0);
        assert_eq!(t.grand_total, 4);
    }

    #[test]
    fn saturated_window_and_sentence_boundaries() {
        let c = corpus(&["a b c d"]);
        let basis: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let t = count_cooccurrences(&c, &basis, 10).unwrap();
        for x in &basis {
            for y in &basis {
                assert_eq!(t.count(x, y), u64::from(x != y), "{x} {y}");
            }
        }

        let two = corpus(&["a b", "c d"]);
        let t = count_cooccurrences(&two, &basis, 5).unwrap();
        assert_eq!(t.count("b", "c"), 0);
        assert_eq!(t.count("a", "b"), 1);
        assert!(matches!(count_cooccurrences(&two, &basis, 0), Err(Error::Config(_))));
    }

    #[test]
    fn empty_corpus_gives_zero_table() {
        let t = count_cooccurrences_for(&Corpus::default(), &["a".into()], &["a".into()], 2).unwrap();
        assert_eq!(t.grand_total, 0);
        assert_eq!(t.counts, vec![0]);
    }

    #[test]
    fn merge_requires_same_shape() {
        let a = CooccurrenceTable::zeros(vec!["a".into()], vec!["b".into()]);
        let b = CooccurrenceTable::zeros(vec!["x".into()], vec!["b".into()]);
        assert!(a.merge(&b).is_err());
    }

    #[test]
    fn lmi_hand_values() {
        let mut t = CooccurrenceTable::zeros(vec!["x".into(), "y".into()], vec!["p".into(), "q".into()]);
        t.add(0, 0, 2);
        t.add(1, 1, 2);
        let lmi = weight_lmi(&t);
        assert!((lmi[(0, 0)] - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert!((lmi[(0, 0)] - 1.3863).abs() < 1e-4);
        assert_eq!(lmi[(0, 1)], 0.0);

        let mut u = CooccurrenceTable::zeros(vec!["x".into(), "y".into()], vec!["p".into(), "q".into()]);
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            u.add(i, j, 3);
        }
        assert!(weight_lmi(&u).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn phrase_merging() {
        let c = corpus(&["kids play games", "play games play flute", "games play"]);
        let merged = c.merge_phrases(&[("play".into(), "games".into())]);
        assert_eq!(merged.sentences[0], vec!["kids", "play_games"]);
        assert_eq!(merged.sentences[1], vec!["play_games", "play", "flute"]);
        assert_eq!(merged.sentences[2], vec!["games", "play"]);
    }

    #[test]
    fn build_rejects_bad_rank() {
        let c = corpus(&["a b c d", "b c d e"]);
        let cfg = SpaceConfig {
            basis_size: 3,
            skip_top: 0,
            svd_rank: 4,
            ..SpaceConfig::default()
        };
        assert!(matches!(
            build_space(&c, &cfg),
            Err(Error::RankTooLarge { rank: 4, max: 3 })
        ));
        let cfg = SpaceConfig { svd_rank: 0, ..cfg };
        assert!(matches!(build_space(&c, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn build_degenerate_corpus() {
        // single-token sentences never co-occur with anything
        let c = corpus(&["a", "b", "c"]);
        let cfg = SpaceConfig {
            basis_size: 2,
            skip_top: 0,
            svd_rank: 1,
            ..SpaceConfig::default()
        };
        assert!(matches!(build_space(&c, &cfg), Err(Error::DegenerateMatrix)));
    }

    #[test]
    fn standard_configuration_is_the_default() {
        let cfg = SpaceConfig::default();
        assert_eq!(
            (cfg.basis_size, cfg.skip_top, cfg.window, cfg.svd_rank),
            (2000, 50, 5, 300)
        );
        assert!(cfg.normalize);
    }

    #[test]
    fn oov_resolves_to_zero() {
        let space = SemanticSpace::from_vectors(2, [("a", DVector::from_vec(vec![1.0, 2.0]))]).unwrap();
        assert_eq!(space.vector_or_zero("zzz"), DVector::zeros(2));
        assert_eq!(space.vector_or_zero("a")[1], 2.0);
        assert!(SemanticSpace::from_vectors(3, [("a", DVector::from_vec(vec![1.0]))]).is_err());
    }
}
