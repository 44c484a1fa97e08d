//! Sentence-similarity evaluation: distances, Spearman correlation against
//! human judgements, task runs and entanglement reports.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DVector;
use serde::Serialize;

use crate::compose::{
    compose_baseline, compose_copy_object, compose_copy_subject, compose_frobenius, compose_relational,
    compose_verb_object, BaselineMode, FrobeniusMode, Model, Rep, SentenceRep,
};
use crate::error::{Error, Result};
use crate::semspace::{phrase_token, SemanticSpace};
use crate::tensors::{entanglement_score, rank1_approx, VerbMatrix, VerbMethod, VerbStore};

fn check_same_shape(a: &SentenceRep, b: &SentenceRep) -> Result<()> {
    let same_kind = matches!(
        (&a.value, &b.value),
        (Rep::Vec(_), Rep::Vec(_)) | (Rep::Mat(_), Rep::Mat(_))
    );
    if !same_kind || a.value.shape() != b.value.shape() {
        return Err(Error::ShapeMismatch(format!(
            "cannot compare {:?} ({}) with {:?} ({})",
            a.value.shape(),
            a.model,
            b.value.shape(),
            b.model
        )));
    }
    Ok(())
}

/// Cosine similarity; matrices are compared through their flattened entries.
pub fn cosine_sim(a: &SentenceRep, b: &SentenceRep) -> Result<f64> {
    check_same_shape(a, b)?;
    let (x, y) = (a.value.as_slice(), b.value.as_slice());
    let dot: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
    let nx = x.iter().map(|p| p * p).sum::<f64>().sqrt();
    let ny = y.iter().map(|q| q * q).sum::<f64>().sqrt();
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok((dot / (nx * ny)).clamp(-1.0, 1.0))
}

pub fn euclidean_dist(a: &SentenceRep, b: &SentenceRep) -> Result<f64> {
    check_same_shape(a, b)?;
    let (x, y) = (a.value.as_slice(), b.value.as_slice());
    Ok(x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt())
}

/// Ranks starting at 1, tied values sharing the mean of the ranks they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman's ρ: the Pearson correlation of tie-averaged ranks.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::UndefinedCorrelation(format!(
            "sequences differ in length ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation("need at least two observations".into()));
    }
    if xs.iter().chain(ys).any(|x| x.is_nan()) {
        return Err(Error::UndefinedCorrelation("NaN in input".into()));
    }
    pearson(&average_ranks(xs), &average_ranks(ys)).ok_or_else(|| Error::UndefinedCorrelation("constant input".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Transitive,
    VerbObject,
}

/// A `(subject,) verb, object` triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Sentence {
    pub subject: Option<String>,
    pub verb: String,
    pub object: String,
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(s) = &self.subject {
            write!(f, "{s} ")?;
        }
        write!(f, "{} {}", self.verb, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentencePair {
    pub left: Sentence,
    pub right: Sentence,
    pub human_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityDataset {
    pub kind: TaskKind,
    pub pairs: Vec<SentencePair>,
}

impl SimilarityDataset {
    /// Parses the TSV layout
    /// `subject verb object subject2 verb2 object2 score` (transitive) or
    /// `verb object verb2 object2 score` (verb-object). Lines repeating the
    /// same pair, as with per-annotator rows, are averaged into one pair.
    /// `#` comments and a non-numeric header row are skipped.
    pub fn parse_str(text: &str, source: &Path) -> Result<Self> {
        let mut kind = None;
        let mut grouped: Vec<(Sentence, Sentence, f64, usize)> = Vec::new();
        let mut seen_data = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            let score_text = cols.last().copied().unwrap_or_default();
            let score = match score_text.parse::<f64>() {
                Ok(s) if s.is_finite() => s,
                _ if !seen_data => {
                    seen_data = true;
                    continue;
                }
                _ => {
                    return Err(Error::parse(source, lineno + 1, format!("bad score `{score_text}`")));
                }
            };
            seen_data = true;
            let this_kind = match cols.len() {
                7 => TaskKind::Transitive,
                5 => TaskKind::VerbObject,
                n => {
                    return Err(Error::parse(
                        source,
                        lineno + 1,
                        format!("expected 7 (transitive) or 5 (verb-object) columns, found {n}"),
                    ))
                }
            };
            if *kind.get_or_insert(this_kind) != this_kind {
                return Err(Error::parse(
                    source,
                    lineno + 1,
                    "mixed transitive and verb-object rows",
                ));
            }
            let sentence = |c: &[&str]| match this_kind {
                TaskKind::Transitive => Sentence {
                    subject: Some(c[0].to_string()),
                    verb: c[1].to_string(),
                    object: c[2].to_string(),
                },
                TaskKind::VerbObject => Sentence {
                    subject: None,
                    verb: c[0].to_string(),
                    object: c[1].to_string(),
                },
            };
            let half = (cols.len() - 1) / 2;
            let left = sentence(&cols[..half]);
            let right = sentence(&cols[half..2 * half]);
            match grouped.iter_mut().find(|(l, r, _, _)| *l == left && *r == right) {
                Some(entry) => {
                    entry.2 += score;
                    entry.3 += 1;
                }
                None => grouped.push((left, right, score, 1)),
            }
        }
        let kind = kind.ok_or_else(|| Error::Empty(format!("{} has no sentence pairs", source.display())))?;
        let pairs = grouped
            .into_iter()
            .map(|(left, right, sum, n)| SentencePair {
                left,
                right,
                human_score: sum / n as f64,
            })
            .collect();
        Ok(SimilarityDataset { kind, pairs })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SimilarityDataset::parse_str(&text, path)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// A composition model, optionally evaluated with rank-1 approximations of
/// its verb matrices. Written `rank1:<model>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    pub model: Model,
    pub rank1: bool,
}

impl ModelSpec {
    pub fn new(model: Model) -> Self {
        ModelSpec { model, rank1: false }
    }

    pub fn rank1(model: Model) -> Self {
        ModelSpec { model, rank1: true }
    }

    /// The stored matrices this model composes with, if any.
    pub fn verb_method(&self) -> Option<VerbMethod> {
        match self.model {
            Model::Relational
            | Model::CopySubject
            | Model::CopyObject
            | Model::FrobAdd
            | Model::FrobMul
            | Model::FrobTensor
            | Model::VerbObject => Some(VerbMethod::Relational),
            Model::Separable => Some(VerbMethod::Separable),
            Model::Regression => Some(VerbMethod::Regression),
            Model::Additive | Model::Multiplicative | Model::VerbsOnly | Model::Holistic => None,
        }
    }

    fn check_task(&self, kind: TaskKind) -> Result<()> {
        let ok = match self.model {
            Model::Relational
            | Model::Separable
            | Model::CopySubject
            | Model::CopyObject
            | Model::FrobAdd
            | Model::FrobMul
            | Model::FrobTensor => kind == TaskKind::Transitive,
            Model::VerbObject | Model::Regression | Model::Holistic => kind == TaskKind::VerbObject,
            Model::Additive | Model::Multiplicative | Model::VerbsOnly => true,
        };
        if !ok {
            return Err(Error::Config(format!(
                "model `{self}` does not apply to a {kind:?} dataset"
            )));
        }
        if self.rank1 && self.verb_method().is_none() {
            return Err(Error::Config(format!(
                "model `{}` has no verb matrices to approximate",
                self.model
            )));
        }
        Ok(())
    }

    fn matrix(&self, store: &VerbStore, verb: &str) -> Result<VerbMatrix> {
        let method = self.verb_method().expect("model composes with verb matrices");
        let m = store.require(verb, &method)?;
        if self.rank1 {
            rank1_approx(m)
        } else {
            Ok(m.clone())
        }
    }

    /// Composes one sentence under this model.
    pub fn compose(&self, sentence: &Sentence, space: &SemanticSpace, store: &VerbStore) -> Result<SentenceRep> {
        let subject = || -> Result<DVector<f64>> {
            let s = sentence
                .subject
                .as_deref()
                .ok_or_else(|| Error::Config(format!("model `{self}` needs a subject")))?;
            Ok(space.vector_or_zero(s))
        };
        let obj = space.vector_or_zero(&sentence.object);
        let rep = match self.model {
            Model::Relational | Model::Separable => {
                compose_relational(&subject()?, &self.matrix(store, &sentence.verb)?, &obj)?
            }
            Model::CopySubject => compose_copy_subject(&subject()?, &self.matrix(store, &sentence.verb)?, &obj)?,
            Model::CopyObject => compose_copy_object(&subject()?, &self.matrix(store, &sentence.verb)?, &obj)?,
            Model::FrobAdd | Model::FrobMul | Model::FrobTensor => {
                let mode = match self.model {
                    Model::FrobAdd => FrobeniusMode::Additive,
                    Model::FrobMul => FrobeniusMode::Multiplicative,
                    _ => FrobeniusMode::Tensored,
                };
                compose_frobenius(&subject()?, &self.matrix(store, &sentence.verb)?, &obj, mode)?
            }
            Model::VerbObject | Model::Regression => compose_verb_object(&self.matrix(store, &sentence.verb)?, &obj)?,
            Model::Additive | Model::Multiplicative => {
                let mut words = Vec::with_capacity(3);
                if sentence.subject.is_some() {
                    words.push(subject()?);
                }
                words.push(space.vector_or_zero(&sentence.verb));
                words.push(obj);
                let mode = if self.model == Model::Additive {
                    BaselineMode::Additive
                } else {
                    BaselineMode::Multiplicative
                };
                compose_baseline(&words, mode)?
            }
            Model::VerbsOnly => compose_baseline(&[space.vector_or_zero(&sentence.verb)], BaselineMode::VerbsOnly)?,
            Model::Holistic => compose_baseline(
                &[space.vector_or_zero(&phrase_token(&sentence.verb, &sentence.object))],
                BaselineMode::VerbsOnly,
            )?,
        };
        Ok(rep.with_model(self.model))
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rank1 {
            write!(f, "rank1:{}", self.model)
        } else {
            write!(f, "{}", self.model)
        }
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("rank1:") {
            Some(inner) => Ok(ModelSpec::rank1(inner.parse()?)),
            None => Ok(ModelSpec::new(s.parse()?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairScore {
    pub left: String,
    pub right: String,
    pub human: f64,
    pub cosine: Option<f64>,
    pub euclidean: Option<f64>,
    pub excluded: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskResult {
    pub model: String,
    /// `None` when the correlation is undefined (fewer than two usable pairs
    /// or constant scores).
    pub rho_cosine: Option<f64>,
    /// Correlation of the negated distance with the human scores.
    pub rho_euclidean: Option<f64>,
    pub n_pairs_used: usize,
    pub excluded: usize,
    pub pairs: Vec<PairScore>,
}

/// Composes both sides of every pair, scores them by cosine and by negated
/// Euclidean distance, and correlates each with the human scores. Pairs with
/// an all-zero side or mismatched shapes are excluded from both
/// correlations.
pub fn run_task(
    dataset: &SimilarityDataset,
    spec: &ModelSpec,
    space: &SemanticSpace,
    store: &VerbStore,
) -> Result<TaskResult> {
    spec.check_task(dataset.kind)?;
    let mut pairs = Vec::with_capacity(dataset.len());
    let (mut human, mut cos, mut neg_dist) = (Vec::new(), Vec::new(), Vec::new());

    for pair in &dataset.pairs {
        let a = spec.compose(&pair.left, space, store)?;
        let b = spec.compose(&pair.right, space, store)?;
        let mut score = PairScore {
            left: pair.left.to_string(),
            right: pair.right.to_string(),
            human: pair.human_score,
            cosine: None,
            euclidean: None,
            excluded: None,
        };
        if a.value.is_zero() || b.value.is_zero() {
            score.excluded = Some("zero representation".into());
        } else {
            match (cosine_sim(&a, &b), euclidean_dist(&a, &b)) {
                (Ok(c), Ok(e)) => {
                    score.cosine = Some(c);
                    score.euclidean = Some(e);
                    human.push(pair.human_score);
                    cos.push(c);
                    neg_dist.push(-e);
                }
                (Err(e), _) | (_, Err(e)) => score.excluded = Some(e.to_string()),
            }
        }
        pairs.push(score);
    }

    let n_pairs_used = human.len();
    Ok(TaskResult {
        model: spec.to_string(),
        rho_cosine: spearman_rho(&cos, &human).ok(),
        rho_euclidean: spearman_rho(&neg_dist, &human).ok(),
        n_pairs_used,
        excluded: dataset.len() - n_pairs_used,
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementRow {
    pub verb: String,
    pub method: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementReport {
    pub rows: Vec<EntanglementRow>,
    pub mean: f64,
    pub histogram: Vec<HistogramBin>,
    /// Zero matrices, which have no rank-1 direction.
    pub skipped: Vec<String>,
}

pub const HISTOGRAM_BINS: usize = 10;

/// Entanglement score of every stored matrix, their mean and a histogram over
/// `[0, 1]`.
pub fn entanglement_report(store: &VerbStore) -> Result<EntanglementReport> {
    if store.is_empty() {
        return Err(Error::Empty("verb store".into()));
    }
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for m in store.iter() {
        match entanglement_score(m) {
            Ok(score) => rows.push(EntanglementRow {
                verb: m.verb.clone(),
                method: m.method.to_string(),
                score,
            }),
            Err(Error::ZeroMatrix) => skipped.push(format!("{} ({})", m.verb, m.method)),
            Err(e) => return Err(e),
        }
    }
    if rows.is_empty() {
        return Err(Error::Empty("verb store holds only zero matrices".into()));
    }
    let mean = rows.iter().map(|r| r.score).sum::<f64>() / rows.len() as f64;
    let width = 1.0 / HISTOGRAM_BINS as f64;
    let mut histogram: Vec<HistogramBin> = (0..HISTOGRAM_BINS)
        .map(|i| HistogramBin {
            lower: i as f64 * width,
            upper: (i + 1) as f64 * width,
            count: 0,
        })
        .collect();
    for r in &rows {
        let bin = ((r.score.max(0.0) / width) as usize).min(HISTOGRAM_BINS - 1);
        histogram[bin].count += 1;
    }
    Ok(EntanglementReport {
        rows,
        mean,
        histogram,
        skipped,
    })
}
