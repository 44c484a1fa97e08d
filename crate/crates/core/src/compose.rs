//! Frobenius algebra primitives, sentence composition models and a generic
//! executor for contraction plans.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::pregroup::{Axis, ContractionPlan};
use crate::tensors::VerbMatrix;

pub const MAX_ORDER: usize = 4;

/// Composition models, identified by stable string ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    Relational,
    Separable,
    CopySubject,
    CopyObject,
    FrobAdd,
    FrobMul,
    FrobTensor,
    Additive,
    Multiplicative,
    VerbsOnly,
    VerbObject,
    Regression,
    /// The phrase's own distributional vector (`verb_object` token).
    Holistic,
}

impl Model {
    pub const ALL: [Model; 13] = [
        Model::Relational,
        Model::Separable,
        Model::CopySubject,
        Model::CopyObject,
        Model::FrobAdd,
        Model::FrobMul,
        Model::FrobTensor,
        Model::Additive,
        Model::Multiplicative,
        Model::VerbsOnly,
        Model::VerbObject,
        Model::Regression,
        Model::Holistic,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Model::Relational => "relational",
            Model::Separable => "separable",
            Model::CopySubject => "copy_subject",
            Model::CopyObject => "copy_object",
            Model::FrobAdd => "frob_add",
            Model::FrobMul => "frob_mul",
            Model::FrobTensor => "frob_tensor",
            Model::Additive => "additive",
            Model::Multiplicative => "multiplicative",
            Model::VerbsOnly => "verbs_only",
            Model::VerbObject => "verb_object",
            Model::Regression => "regression",
            Model::Holistic => "holistic",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rep {
    Vec(DVector<f64>),
    Mat(DMatrix<f64>),
}

impl Rep {
    pub fn is_zero(&self) -> bool {
        match self {
            Rep::Vec(v) => v.iter().all(|&x| x == 0.0),
            Rep::Mat(m) => m.iter().all(|&x| x == 0.0),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        match self {
            Rep::Vec(v) => v.as_slice(),
            Rep::Mat(m) => m.as_slice(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            Rep::Vec(v) => (v.len(), 1),
            Rep::Mat(m) => m.shape(),
        }
    }
}

/// A composed sentence or phrase together with the model that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceRep {
    pub model: Model,
    pub value: Rep,
}

impl SentenceRep {
    fn vec(model: Model, v: DVector<f64>) -> Self {
        SentenceRep {
            model,
            value: Rep::Vec(v),
        }
    }

    fn mat(model: Model, m: DMatrix<f64>) -> Self {
        SentenceRep {
            model,
            value: Rep::Mat(m),
        }
    }

    pub fn with_model(mut self, model: Model) -> Self {
        self.model = model;
        self
    }

    pub fn as_vector(&self) -> Option<&DVector<f64>> {
        match &self.value {
            Rep::Vec(v) => Some(v),
            Rep::Mat(_) => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.value {
            Rep::Mat(m) => Some(m),
            Rep::Vec(_) => None,
        }
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Δ: copies each basis vector, `v ↦ Σ v_i e_i ⊗ e_i`.
pub fn frob_copy(v: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_diagonal(v)
}

/// μ on a product state: `δ_ij` merging is the element-wise product.
pub fn frob_mul(u: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
    check_len(u.len(), w.len())?;
    Ok(u.component_mul(w))
}

/// ι: sends every basis vector to 1.
pub fn frob_delete(v: &DVector<f64>) -> f64 {
    v.sum()
}

/// ζ: the sum of all basis vectors.
pub fn frob_unit(d: usize) -> DVector<f64> {
    DVector::from_element(d, 1.0)
}

fn check_verb_args(subj: &DVector<f64>, verb: &VerbMatrix, obj: &DVector<f64>) -> Result<()> {
    check_len(verb.dim(), subj.len())?;
    check_len(verb.dim(), obj.len())
}

/// `(subj ⊗ obj) ⊙ verb`, a matrix.
pub fn compose_relational(subj: &DVector<f64>, verb: &VerbMatrix, obj: &DVector<f64>) -> Result<SentenceRep> {
    check_verb_args(subj, verb, obj)?;
    let outer = subj * obj.transpose();
    Ok(SentenceRep::mat(Model::Relational, outer.component_mul(&verb.data)))
}

/// `subj ⊙ (verb × obj)`
pub fn compose_copy_subject(subj: &DVector<f64>, verb: &VerbMatrix, obj: &DVector<f64>) -> Result<SentenceRep> {
    check_verb_args(subj, verb, obj)?;
    Ok(SentenceRep::vec(
        Model::CopySubject,
        frob_mul(subj, &(&verb.data * obj))?,
    ))
}

/// `obj ⊙ (verbᵀ × subj)`
pub fn compose_copy_object(subj: &DVector<f64>, verb: &VerbMatrix, obj: &DVector<f64>) -> Result<SentenceRep> {
    check_verb_args(subj, verb, obj)?;
    Ok(SentenceRep::vec(
        Model::CopyObject,
        frob_mul(obj, &(verb.data.tr_mul(subj)))?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrobeniusMode {
    Additive,
    Multiplicative,
    Tensored,
}

/// Combines the copy-subject and copy-object vectors by sum, element-wise
/// product or outer product.
pub fn compose_frobenius(
    subj: &DVector<f64>,
    verb: &VerbMatrix,
    obj: &DVector<f64>,
    mode: FrobeniusMode,
) -> Result<SentenceRep> {
    let cs = compose_copy_subject(subj, verb, obj)?;
    let co = compose_copy_object(subj, verb, obj)?;
    let (cs, co) = (cs.as_vector().unwrap(), co.as_vector().unwrap());
    Ok(match mode {
        FrobeniusMode::Additive => SentenceRep::vec(Model::FrobAdd, cs + co),
        FrobeniusMode::Multiplicative => SentenceRep::vec(Model::FrobMul, cs.component_mul(co)),
        FrobeniusMode::Tensored => SentenceRep::mat(Model::FrobTensor, cs * co.transpose()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMode {
    Additive,
    Multiplicative,
    /// Expects exactly one vector, the verb's.
    VerbsOnly,
}

pub fn compose_baseline(words: &[DVector<f64>], mode: BaselineMode) -> Result<SentenceRep> {
    let first = words
        .first()
        .ok_or_else(|| Error::Empty("no word vectors to compose".into()))?;
    for w in words {
        check_len(first.len(), w.len())?;
    }
    Ok(match mode {
        BaselineMode::Additive => {
            let sum = words.iter().skip(1).fold(first.clone(), |acc, w| acc + w);
            SentenceRep::vec(Model::Additive, sum)
        }
        BaselineMode::Multiplicative => {
            let prod = words.iter().skip(1).fold(first.clone(), |acc, w| acc.component_mul(w));
            SentenceRep::vec(Model::Multiplicative, prod)
        }
        BaselineMode::VerbsOnly => {
            if words.len() != 1 {
                return Err(Error::ArityMismatch(format!(
                    "verbs_only takes the verb vector alone, got {} vectors",
                    words.len()
                )));
            }
            SentenceRep::vec(Model::VerbsOnly, first.clone())
        }
    })
}

/// `verb × obj`
pub fn compose_verb_object(verb: &VerbMatrix, obj: &DVector<f64>) -> Result<SentenceRep> {
    check_len(verb.dim(), obj.len())?;
    Ok(SentenceRep::vec(Model::VerbObject, &verb.data * obj))
}

/// Dense row-major tensor of order at most 4.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if dims.len() > MAX_ORDER {
            return Err(Error::OrderTooLarge(dims.len()));
        }
        let size: usize = dims.iter().product();
        if size != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "dims {dims:?} need {size} entries, got {}",
                data.len()
            )));
        }
        Ok(DenseTensor { dims, data })
    }

    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let size = dims.iter().product();
        let mut data = Vec::with_capacity(size);
        let mut idx = vec![0; dims.len()];
        for flat in 0..size {
            unravel(flat, &dims, &mut idx);
            data.push(f(&idx));
        }
        DenseTensor::new(dims, data)
    }

    pub fn vector(v: &DVector<f64>) -> Self {
        DenseTensor {
            dims: vec![v.len()],
            data: v.as_slice().to_vec(),
        }
    }

    pub fn matrix(m: &DMatrix<f64>) -> Self {
        let (r, c) = m.shape();
        DenseTensor {
            dims: vec![r, c],
            data: (0..r).flat_map(|i| (0..c).map(move |j| m[(i, j)])).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[offset(index, &strides(&self.dims))]
    }

    pub fn to_vector(&self) -> Option<DVector<f64>> {
        (self.order() == 1).then(|| DVector::from_column_slice(&self.data))
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

fn offset(index: &[usize], strides: &[usize]) -> usize {
    index.iter().zip(strides).map(|(i, s)| i * s).sum()
}

fn unravel(mut flat: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = flat % dims[k];
        flat /= dims[k];
    }
}

/// Intermediate tensor in a contraction network, axes labelled by origin.
struct Node {
    labels: Vec<Axis>,
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl Node {
    fn position(&self, ax: Axis) -> Option<usize> {
        self.labels.iter().position(|&l| l == ax)
    }

    /// Sums the diagonal of two of this node's own axes.
    fn trace(self, p: usize, q: usize) -> Node {
        let keep: Vec<usize> = (0..self.dims.len()).filter(|&k| k != p && k != q).collect();
        let src_strides = strides(&self.dims);
        let dims: Vec<usize> = keep.iter().map(|&k| self.dims[k]).collect();
        let size: usize = dims.iter().product();
        let step = src_strides[p] + src_strides[q];
        let mut idx = vec![0; dims.len()];
        let mut data = Vec::with_capacity(size);
        for flat in 0..size {
            unravel(flat, &dims, &mut idx);
            let base: usize = keep.iter().zip(&idx).map(|(&k, &i)| i * src_strides[k]).sum();
            data.push((0..self.dims[p]).map(|t| self.data[base + t * step]).sum());
        }
        Node {
            labels: keep.iter().map(|&k| self.labels[k]).collect(),
            dims,
            data,
        }
    }

    /// Tensordot over one axis of each node; `None` contracts nothing and
    /// yields the outer product.
    fn contract(self, other: Node, axes: Option<(usize, usize)>) -> Node {
        let (pa, pb) = match axes {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        let a_keep: Vec<usize> = (0..self.dims.len()).filter(|&k| Some(k) != pa).collect();
        let b_keep: Vec<usize> = (0..other.dims.len()).filter(|&k| Some(k) != pb).collect();
        let (sa, sb) = (strides(&self.dims), strides(&other.dims));
        let span = pa.map_or(1, |p| self.dims[p]);
        let step_a = pa.map_or(0, |p| sa[p]);
        let step_b = pb.map_or(0, |p| sb[p]);

        let dims: Vec<usize> = a_keep
            .iter()
            .map(|&k| self.dims[k])
            .chain(b_keep.iter().map(|&k| other.dims[k]))
            .collect();
        let size: usize = dims.iter().product();
        let mut idx = vec![0; dims.len()];
        let mut data = Vec::with_capacity(size);
        for flat in 0..size {
            unravel(flat, &dims, &mut idx);
            let (ia, ib) = idx.split_at(a_keep.len());
            let base_a: usize = a_keep.iter().zip(ia).map(|(&k, &i)| i * sa[k]).sum();
            let base_b: usize = b_keep.iter().zip(ib).map(|(&k, &i)| i * sb[k]).sum();
            data.push(
                (0..span)
                    .map(|t| self.data[base_a + t * step_a] * other.data[base_b + t * step_b])
                    .sum(),
            );
        }
        let labels = a_keep
            .iter()
            .map(|&k| self.labels[k])
            .chain(b_keep.iter().map(|&k| other.labels[k]))
            .collect();
        Node { labels, dims, data }
    }

    fn permute(self, order: &[Axis]) -> Result<DenseTensor> {
        let perm: Vec<usize> = order
            .iter()
            .map(|&ax| self.position(ax).expect("output axis survives contraction"))
            .collect();
        let dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let src = strides(&self.dims);
        DenseTensor::from_fn(dims, |idx| {
            let off: usize = perm.iter().zip(idx).map(|(&p, &i)| i * src[p]).sum();
            self.data[off]
        })
    }
}

/// Evaluates a contraction plan: every pairing sums two axes against each
/// other, and the surviving axes are returned in `plan.output_axes` order.
pub fn execute_plan(plan: &ContractionPlan, tensors: &[DenseTensor]) -> Result<DenseTensor> {
    plan.validate()?;
    if tensors.len() != plan.word_orders.len() {
        return Err(Error::ArityMismatch(format!(
            "plan has {} words, got {} tensors",
            plan.word_orders.len(),
            tensors.len()
        )));
    }
    for (w, t) in tensors.iter().enumerate() {
        if t.order() != plan.word_orders[w] {
            return Err(Error::ShapeMismatch(format!(
                "word {w} needs an order-{} tensor, got order {}",
                plan.word_orders[w],
                t.order()
            )));
        }
    }
    if plan.output_axes.len() > MAX_ORDER {
        return Err(Error::OrderTooLarge(plan.output_axes.len()));
    }
    for p in &plan.pairings {
        let da = tensors[p.a.word].dims[p.a.axis];
        let db = tensors[p.b.word].dims[p.b.axis];
        if da != db {
            return Err(Error::ShapeMismatch(format!(
                "paired axes ({}, {}) and ({}, {}) have sizes {da} and {db}",
                p.a.word, p.a.axis, p.b.word, p.b.axis
            )));
        }
    }

    let mut nodes: Vec<Node> = tensors
        .iter()
        .enumerate()
        .map(|(w, t)| Node {
            labels: (0..t.order()).map(|k| Axis::new(w, k)).collect(),
            dims: t.dims.clone(),
            data: t.data.clone(),
        })
        .collect();
    let find = |nodes: &[Node], ax: Axis| -> (usize, usize) {
        nodes
            .iter()
            .enumerate()
            .find_map(|(n, node)| node.position(ax).map(|p| (n, p)))
            .expect("validated plan references live axes")
    };

    for pairing in &plan.pairings {
        let (na, pa) = find(&nodes, pairing.a);
        let (nb, pb) = find(&nodes, pairing.b);
        if na == nb {
            let node = nodes.swap_remove(na);
            nodes.push(node.trace(pa, pb));
        } else {
            let (first, second, pf, ps) = if na < nb { (na, nb, pa, pb) } else { (nb, na, pb, pa) };
            let b = nodes.remove(second);
            let a = nodes.remove(first);
            nodes.insert(first, a.contract(b, Some((pf, ps))));
        }
    }

    let mut result = nodes.remove(0);
    for node in nodes {
        result = result.contract(node, None);
    }
    result.permute(&plan.output_axes)
}
