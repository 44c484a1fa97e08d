//! Verb matrices: corpus-based construction, regression training, rank-1
//! approximation and entanglement scoring.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::semspace::SemanticSpace;

pub const STORE_FORMAT_VERSION: u32 = 1;
const MANIFEST: &str = "manifest.json";

/// How a verb matrix was produced.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum VerbMethod {
    /// Sum of subject ⊗ object outer products.
    Relational,
    /// Outer product of the summed subjects and summed objects.
    Separable,
    /// Trained by least-squares regression on holistic phrase vectors.
    Regression,
    Rank1Of(Box<VerbMethod>),
}

impl fmt::Display for VerbMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerbMethod::Relational => f.write_str("relational"),
            VerbMethod::Separable => f.write_str("separable"),
            VerbMethod::Regression => f.write_str("regression"),
            VerbMethod::Rank1Of(inner) => write!(f, "rank1:{inner}"),
        }
    }
}

impl FromStr for VerbMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relational" => Ok(VerbMethod::Relational),
            "separable" => Ok(VerbMethod::Separable),
            "regression" => Ok(VerbMethod::Regression),
            _ => match s.strip_prefix("rank1:") {
                Some(inner) => Ok(VerbMethod::Rank1Of(Box::new(inner.parse()?))),
                None => Err(Error::Config(format!("unknown verb method `{s}`"))),
            },
        }
    }
}

impl From<VerbMethod> for String {
    fn from(m: VerbMethod) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for VerbMethod {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// A square d×d matrix standing for a transitive verb.
#[derive(Debug, Clone, PartialEq)]
pub struct VerbMatrix {
    pub verb: String,
    pub data: DMatrix<f64>,
    pub method: VerbMethod,
}

impl VerbMatrix {
    pub fn new(verb: impl Into<String>, data: DMatrix<f64>, method: VerbMethod) -> Result<Self> {
        if !data.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "verb matrix must be square, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::ShapeMismatch("verb matrix has non-finite entries".into()));
        }
        Ok(VerbMatrix {
            verb: verb.into(),
            data,
            method,
        })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }
}

/// Subject/object pairs observed with one verb, with corpus multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgumentPairs {
    pub verb: String,
    pub pairs: Vec<(String, String)>,
    pub resolved: Vec<(DVector<f64>, DVector<f64>)>,
}

impl ArgumentPairs {
    pub fn from_vectors(verb: impl Into<String>, resolved: Vec<(DVector<f64>, DVector<f64>)>) -> Self {
        ArgumentPairs {
            verb: verb.into(),
            pairs: Vec::new(),
            resolved,
        }
    }

    /// Resolves word pairs against a space. Pairs with an out-of-vocabulary
    /// subject or object are dropped with a warning.
    pub fn resolve(verb: impl Into<String>, pairs: &[(String, String)], space: &SemanticSpace) -> Self {
        let verb = verb.into();
        let mut kept = Vec::new();
        let mut resolved = Vec::new();
        for (s, o) in pairs {
            match (space.get(s), space.get(o)) {
                (Some(sv), Some(ov)) => {
                    kept.push((s.clone(), o.clone()));
                    resolved.push((sv.clone(), ov.clone()));
                }
                _ => log::warn!("{verb}: dropping pair ({s}, {o}) with out-of-vocabulary argument"),
            }
        }
        ArgumentPairs {
            verb,
            pairs: kept,
            resolved,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.resolved.is_empty()
    }

    fn dim(&self) -> Result<usize> {
        let (first, _) = self
            .resolved
            .first()
            .ok_or_else(|| Error::Empty(format!("no argument pairs for `{}`", self.verb)))?;
        let d = first.len();
        for (s, o) in &self.resolved {
            for v in [s, o] {
                if v.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: v.len(),
                    });
                }
            }
        }
        Ok(d)
    }
}

/// `Σ_i subject_i ⊗ object_i`
pub fn build_relational(args: &ArgumentPairs) -> Result<VerbMatrix> {
    let d = args.dim()?;
    let mut m = DMatrix::zeros(d, d);
    for (s, o) in &args.resolved {
        m.ger(1.0, s, o, 1.0);
    }
    VerbMatrix::new(args.verb.clone(), m, VerbMethod::Relational)
}

/// `(Σ_i subject_i) ⊗ (Σ_i object_i)`
pub fn build_separable(args: &ArgumentPairs) -> Result<VerbMatrix> {
    let d = args.dim()?;
    let mut subj = DVector::zeros(d);
    let mut obj = DVector::zeros(d);
    for (s, o) in &args.resolved {
        subj += s;
        obj += o;
    }
    VerbMatrix::new(args.verb.clone(), &subj * obj.transpose(), VerbMethod::Separable)
}

/// `σ₁ u₁ v₁ᵀ` from the SVD; the zero matrix maps to itself.
pub fn rank1_approx(m: &VerbMatrix) -> Result<VerbMatrix> {
    Ok(VerbMatrix {
        verb: m.verb.clone(),
        data: linalg::rank1(&m.data)?,
        method: VerbMethod::Rank1Of(Box::new(m.method.clone())),
    })
}

/// Cosine of two matrices flattened to vectors.
pub fn matrix_cosine(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok((linalg::frobenius_dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Cosine between a matrix and its rank-1 approximation: 1 for separable
/// matrices, lower the more entangled the matrix is.
pub fn entanglement_score(m: &VerbMatrix) -> Result<f64> {
    matrix_cosine(&m.data, &rank1_approx(m)?.data)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionExample {
    pub input: DVector<f64>,
    pub target: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Zeros,
    /// Entries drawn from N(0, 1/d).
    ScaledGaussian {
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionConfig {
    /// `None` picks `0.1 / mean ‖x_i‖²`.
    pub learning_rate: Option<f64>,
    pub max_epochs: usize,
    pub tolerance: f64,
    pub init: Init,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        RegressionConfig {
            learning_rate: None,
            max_epochs: 5000,
            tolerance: 1e-8,
            init: Init::Zeros,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegressionFit {
    pub matrix: VerbMatrix,
    pub final_loss: f64,
    pub epochs: usize,
    pub converged: bool,
}

/// Stacks inputs and targets as columns.
fn design(examples: &[RegressionExample]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let first = examples
        .first()
        .ok_or_else(|| Error::Empty("no regression examples".into()))?;
    let d = first.input.len();
    for ex in examples {
        for v in [&ex.input, &ex.target] {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: v.len(),
                });
            }
        }
    }
    let x = DMatrix::from_fn(d, examples.len(), |i, j| examples[j].input[i]);
    let y = DMatrix::from_fn(d, examples.len(), |i, j| examples[j].target[i]);
    Ok((x, y))
}

/// `(1/2m) Σ_i ‖V x_i − y_i‖²`
pub fn regression_loss(v: &DMatrix<f64>, examples: &[RegressionExample]) -> Result<f64> {
    let (x, y) = design(examples)?;
    let m = examples.len() as f64;
    Ok((v * &x - &y).norm_squared() / (2.0 * m))
}

/// `(1/m) Σ_i (V x_i − y_i) x_iᵀ`
pub fn regression_gradient(v: &DMatrix<f64>, examples: &[RegressionExample]) -> Result<DMatrix<f64>> {
    let (x, y) = design(examples)?;
    let m = examples.len() as f64;
    Ok((v * &x - &y) * x.transpose() / m)
}

/// Full-batch gradient descent on the mean squared prediction error of
/// `V · input` against `target`. Stops once the gradient's Frobenius norm
/// drops to `tolerance` or after `max_epochs` updates.
pub fn train_regression(
    verb: &str,
    examples: &[RegressionExample],
    config: &RegressionConfig,
) -> Result<RegressionFit> {
    let (x, y) = design(examples)?;
    let d = x.nrows();
    let m = examples.len() as f64;
    let xt = x.transpose();

    let learning_rate = match config.learning_rate {
        Some(lr) if lr > 0.0 && lr.is_finite() => lr,
        Some(lr) => return Err(Error::Config(format!("learning rate must be positive, got {lr}"))),
        None => {
            let mean_sq = x.norm_squared() / m;
            if mean_sq == 0.0 {
                1.0
            } else {
                0.1 / mean_sq
            }
        }
    };
    if config.tolerance < 0.0 {
        return Err(Error::Config("tolerance must be non-negative".into()));
    }

    let mut v = match config.init {
        Init::Zeros => DMatrix::zeros(d, d),
        Init::ScaledGaussian { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scale = 1.0 / (d as f64).sqrt();
            DMatrix::from_fn(d, d, |_, _| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * scale
            })
        }
    };

    let mut epochs = 0;
    let mut converged = false;
    loop {
        let residual = &v * &x - &y;
        let loss = residual.norm_squared() / (2.0 * m);
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch: epochs, loss });
        }
        let grad = residual * &xt / m;
        if grad.norm() <= config.tolerance {
            converged = true;
            break;
        }
        if epochs == config.max_epochs {
            break;
        }
        v -= grad * learning_rate;
        epochs += 1;
    }

    let final_loss = (&v * &x - &y).norm_squared() / (2.0 * m);
    if !final_loss.is_finite() {
        return Err(Error::Diverged {
            epoch: epochs,
            loss: final_loss,
        });
    }
    Ok(RegressionFit {
        matrix: VerbMatrix::new(verb, v, VerbMethod::Regression)?,
        final_loss,
        epochs,
        converged,
    })
}

/// Closed-form minimizer of the regression objective, `Y X⁺`. With
/// rank-deficient inputs this is the minimum-norm solution.
pub fn least_squares_oracle(examples: &[RegressionExample]) -> Result<DMatrix<f64>> {
    let (x, y) = design(examples)?;
    Ok(y * linalg::pinv(&x, 1e-12)?)
}

/// A collection of verb matrices keyed by verb and construction method,
/// persisted as a directory of TSV files plus a JSON manifest.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerbStore {
    entries: BTreeMap<String, BTreeMap<VerbMethod, VerbMatrix>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    dim: Option<usize>,
    verbs: BTreeMap<String, BTreeMap<VerbMethod, String>>,
}

fn file_stem(verb: &str) -> String {
    let mut out = String::new();
    for ch in verb.chars() {
        if ch.is_ascii_alphanumeric() || ch == '_' || ch == '-' {
            out.push(ch);
        } else {
            for b in ch.to_string().bytes() {
                write!(out, "%{b:02X}").expect("writing to a String");
            }
        }
    }
    out
}

impl VerbStore {
    pub fn new() -> Self {
        VerbStore::default()
    }

    pub fn insert(&mut self, matrix: VerbMatrix) -> Result<()> {
        if let Some(d) = self.dim() {
            if matrix.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: matrix.dim(),
                });
            }
        }
        self.entries
            .entry(matrix.verb.clone())
            .or_default()
            .insert(matrix.method.clone(), matrix);
        Ok(())
    }

    pub fn get(&self, verb: &str, method: &VerbMethod) -> Option<&VerbMatrix> {
        self.entries.get(verb)?.get(method)
    }

    pub fn require(&self, verb: &str, method: &VerbMethod) -> Result<&VerbMatrix> {
        self.get(verb, method).ok_or_else(|| Error::MissingVerb {
            verb: verb.to_string(),
            method: method.to_string(),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = &VerbMatrix> {
        self.entries.values().flat_map(|m| m.values())
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> Option<usize> {
        self.iter().next().map(VerbMatrix::dim)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut manifest = Manifest {
            format_version: STORE_FORMAT_VERSION,
            dim: self.dim(),
            verbs: BTreeMap::new(),
        };
        for m in self.iter() {
            let file = format!("{}.{}.tsv", file_stem(&m.verb), file_stem(&m.method.to_string()));
            let mut text = String::new();
            for row in m.data.row_iter() {
                let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                text.push_str(&cells.join("\t"));
                text.push('\n');
            }
            let path = dir.join(&file);
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            manifest
                .verbs
                .entry(m.verb.clone())
                .or_default()
                .insert(m.method.clone(), file);
        }
        let path = dir.join(MANIFEST);
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Json {
            path: path.clone(),
            source: e,
        })?;
        std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
    }

    /// Loads a store directory. A missing directory or manifest yields an
    /// empty store.
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let json = match std::fs::read_to_string(&path) {
            Ok(json) => json,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(VerbStore::new()),
            Err(e) => return Err(Error::io(&path, e)),
        };
        let manifest: Manifest = serde_json::from_str(&json).map_err(|e| Error::Json {
            path: path.clone(),
            source: e,
        })?;
        if manifest.format_version != STORE_FORMAT_VERSION {
            return Err(Error::parse(
                &path,
                1,
                format!("unsupported store format version {}", manifest.format_version),
            ));
        }
        let mut store = VerbStore::new();
        for (verb, methods) in manifest.verbs {
            for (method, file) in methods {
                let file = dir.join(file);
                let data = read_matrix(&file)?;
                if let Some(d) = manifest.dim {
                    if data.nrows() != d {
                        return Err(Error::parse(&file, 1, format!("expected a {d}x{d} matrix")));
                    }
                }
                let m =
                    VerbMatrix::new(verb.clone(), data, method).map_err(|e| Error::parse(&file, 1, e.to_string()))?;
                store.insert(m)?;
            }
        }
        Ok(store)
    }
}

fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(['\t', ' '])
            .filter(|s| !s.is_empty())
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(path, lineno + 1, e.to_string()))?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(path, lineno + 1, "ragged matrix row"));
            }
        }
        rows.push(row);
    }
    let n = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(n, c, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn m(r: usize, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(r, x.len() / r, x)
    }

    fn swap_pairs() -> ArgumentPairs {
        ArgumentPairs::from_vectors(
            "verb",
            vec![(v(&[1.0, 0.0]), v(&[0.0, 1.0])), (v(&[0.0, 1.0]), v(&[1.0, 0.0]))],
        )
    }

    #[test]
    fn relational_and_separable_hand_values() {
        let args = swap_pairs();
        assert_eq!(build_relational(&args).unwrap().data, m(2, &[0.0, 1.0, 1.0, 0.0]));
        assert_eq!(build_separable(&args).unwrap().data, m(2, &[1.0, 1.0, 1.0, 1.0]));
    }

    #[test]
    fn single_pair_methods_coincide() {
        let args = ArgumentPairs::from_vectors("v", vec![(v(&[1.0, 2.0, 3.0]), v(&[-1.0, 0.5, 2.0]))]);
        let rel = build_relational(&args).unwrap();
        let sep = build_separable(&args).unwrap();
        assert_eq!(rel.data, sep.data);
        assert!((entanglement_score(&rel).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn shared_subject_factorizes() {
        let s = v(&[1.0, -2.0]);
        let args = ArgumentPairs::from_vectors("v", vec![(s.clone(), v(&[1.0, 0.0])), (s.clone(), v(&[3.0, 4.0]))]);
        let rel = build_relational(&args).unwrap();
        assert_eq!(rel.data, &s * v(&[4.0, 4.0]).transpose());
    }

    #[test]
    fn builders_reject_bad_input() {
        let empty = ArgumentPairs::from_vectors("v", vec![]);
        assert!(matches!(build_relational(&empty), Err(Error::Empty(_))));
        assert!(matches!(build_separable(&empty), Err(Error::Empty(_))));
        let ragged = ArgumentPairs::from_vectors("v", vec![(v(&[1.0, 2.0]), v(&[1.0]))]);
        assert!(matches!(
            build_relational(&ragged),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rank1_hand_values() {
        let diag = VerbMatrix::new("v", m(2, &[2.0, 0.0, 0.0, 1.0]), VerbMethod::Relational).unwrap();
        let r1 = rank1_approx(&diag).unwrap();
        assert!((&r1.data - m(2, &[2.0, 0.0, 0.0, 0.0])).norm() < 1e-12);
        assert_eq!(r1.method, VerbMethod::Rank1Of(Box::new(VerbMethod::Relational)));

        let zero = VerbMatrix::new("z", DMatrix::zeros(3, 3), VerbMethod::Relational).unwrap();
        assert_eq!(rank1_approx(&zero).unwrap().data, DMatrix::<f64>::zeros(3, 3));
        assert!(matches!(entanglement_score(&zero), Err(Error::ZeroMatrix)));
    }

    #[test]
    fn matrix_cosine_values() {
        let a = m(2, &[2.0, 0.0, 0.0, 1.0]);
        assert!((matrix_cosine(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        let c = matrix_cosine(&a, &m(2, &[2.0, 0.0, 0.0, 0.0])).unwrap();
        assert!((c - 4.0 / (5f64.sqrt() * 2.0)).abs() < 1e-15);
        assert!((c - 0.8944).abs() < 1e-4);
        assert_eq!(
            matrix_cosine(&m(2, &[1.0, 0.0, 0.0, 0.0]), &m(2, &[0.0, 0.0, 0.0, 1.0])).unwrap(),
            0.0
        );
        assert!(matches!(
            matrix_cosine(&a, &DMatrix::zeros(2, 2)),
            Err(Error::ZeroMatrix)
        ));
        assert!(matches!(
            matrix_cosine(&a, &DMatrix::zeros(3, 3)),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn entanglement_of_symmetric_spectrum() {
        let inv_sqrt2 = 1.0 / 2f64.sqrt();
        for data in [m(2, &[1.0, 0.0, 0.0, 1.0]), m(2, &[0.0, 1.0, 1.0, 0.0])] {
            let verb = VerbMatrix::new("v", data, VerbMethod::Relational).unwrap();
            assert!((entanglement_score(&verb).unwrap() - inv_sqrt2).abs() < 1e-10);
        }
        let rel = build_relational(&swap_pairs()).unwrap();
        assert!((entanglement_score(&rel).unwrap() - inv_sqrt2).abs() < 1e-10);
    }

    #[test]
    fn regression_single_basis_example() {
        let y = v(&[0.5, -1.0, 2.0]);
        let examples = vec![RegressionExample {
            input: v(&[0.0, 1.0, 0.0]),
            target: y.clone(),
        }];
        let fit = train_regression("v", &examples, &RegressionConfig::default()).unwrap();
        let mut want = DMatrix::zeros(3, 3);
        want.set_column(1, &y);
        assert!((&fit.matrix.data - &want).norm() < 1e-6);
        assert!((least_squares_oracle(&examples).unwrap() - want).norm() < 1e-12);
    }

    #[test]
    fn regression_zero_targets() {
        let examples = vec![
            RegressionExample {
                input: v(&[1.0, 2.0]),
                target: v(&[0.0, 0.0]),
            },
            RegressionExample {
                input: v(&[-1.0, 0.5]),
                target: v(&[0.0, 0.0]),
            },
        ];
        let fit = train_regression("v", &examples, &RegressionConfig::default()).unwrap();
        assert_eq!(fit.matrix.data, DMatrix::<f64>::zeros(2, 2));
        assert_eq!(fit.final_loss, 0.0);
        assert!(fit.converged);
        assert_eq!(fit.epochs, 0);
    }

    #[test]
    fn regression_divergence_is_reported() {
        let examples = vec![RegressionExample {
            input: v(&[10.0, 10.0]),
            target: v(&[1.0, 1.0]),
        }];
        let cfg = RegressionConfig {
            learning_rate: Some(10.0),
            max_epochs: 10_000,
            ..RegressionConfig::default()
        };
        assert!(matches!(
            train_regression("v", &examples, &cfg),
            Err(Error::Diverged { .. })
        ));
        let bad = RegressionConfig {
            learning_rate: Some(-1.0),
            ..RegressionConfig::default()
        };
        assert!(matches!(train_regression("v", &examples, &bad), Err(Error::Config(_))));
        assert!(matches!(train_regression("v", &[], &cfg), Err(Error::Empty(_))));
    }

    #[test]
    fn oracle_on_one_direction_inputs() {
        let examples = vec![
            RegressionExample {
                input: v(&[1.0, 0.0, 0.0]),
                target: v(&[1.0, 2.0, 3.0]),
            },
            RegressionExample {
                input: v(&[2.0, 0.0, 0.0]),
                target: v(&[2.0, 4.0, 6.5]),
            },
        ];
        let w = least_squares_oracle(&examples).unwrap();
        for j in 1..3 {
            assert!(w.column(j).norm() < 1e-12);
        }
    }

    #[test]
    fn gaussian_init_is_seeded() {
        let examples = vec![RegressionExample {
            input: v(&[1.0, 0.0]),
            target: v(&[1.0, 1.0]),
        }];
        let cfg = RegressionConfig {
            init: Init::ScaledGaussian { seed: 7 },
            max_epochs: 3,
            ..RegressionConfig::default()
        };
        let a = train_regression("v", &examples, &cfg).unwrap();
        let b = train_regression("v", &examples, &cfg).unwrap();
        assert_eq!(a.matrix.data, b.matrix.data);
        assert_eq!(a.epochs, 3);
        assert!(!a.converged);
    }

    #[test]
    fn method_tags_round_trip() {
        for s in [
            "relational",
            "separable",
            "regression",
            "rank1:relational",
            "rank1:rank1:regression",
        ] {
            assert_eq!(s.parse::<VerbMethod>().unwrap().to_string(), s);
        }
        assert!("bogus".parse::<VerbMethod>().is_err());
    }

    #[test]
    fn store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = VerbStore::new();
        store.insert(build_relational(&swap_pairs()).unwrap()).unwrap();
        store.insert(build_separable(&swap_pairs()).unwrap()).unwrap();
        let odd = VerbMatrix::new("a/b c", m(2, &[0.1, -2.5e-7, 3.0, 1e300]), VerbMethod::Regression).unwrap();
        store.insert(odd).unwrap();
        store.save(dir.path()).unwrap();
        let back = VerbStore::load(dir.path()).unwrap();
        assert_eq!(back, store);
        assert_eq!(back.len(), 3);
        assert!(back.require("nope", &VerbMethod::Relational).is_err());

        let wrong = VerbMatrix::new("w", DMatrix::zeros(3, 3), VerbMethod::Relational).unwrap();
        assert!(store.insert(wrong).is_err());
        assert!(VerbStore::load(&dir.path().join("missing")).unwrap().is_empty());
    }
}
