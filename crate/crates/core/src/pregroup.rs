//! Pregroup types, planar ε-reductions and their translation into tensor
//! contraction plans.
//!
//! A simple type is an atom decorated with an integer adjoint order: `n^l` is
//! `n` at order -1, `n^r` is order +1, `n^l^l` is order -2. Two adjacent
//! factors `p(z) · p(z+1)` contract to the unit; this single rule covers both
//! `p^l · p ≤ 1` and `p · p^r ≤ 1`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Separator used when printing types. `.` is accepted on input as well.
pub const SEPARATOR: char = '·';

/// The set of atomic types a grammar is generated over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generators(BTreeSet<String>);

impl Generators {
    pub fn new<I, S>(atoms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Generators(atoms.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, atom: &str) -> bool {
        self.0.contains(atom)
    }
}

impl Default for Generators {
    /// Nouns and sentences.
    fn default() -> Self {
        Generators::new(["n", "s"])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomicType(String);

impl AtomicType {
    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AtomicType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An atom with an adjoint order: negative for iterated left adjoints,
/// positive for iterated right adjoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SimpleType {
    pub base: AtomicType,
    pub adjoint_order: i32,
}

impl SimpleType {
    pub fn new(base: &str, adjoint_order: i32) -> Self {
        SimpleType {
            base: AtomicType(base.to_string()),
            adjoint_order,
        }
    }

    pub fn left_adjoint(&self) -> Self {
        SimpleType {
            base: self.base.clone(),
            adjoint_order: self.adjoint_order - 1,
        }
    }

    pub fn right_adjoint(&self) -> Self {
        SimpleType {
            base: self.base.clone(),
            adjoint_order: self.adjoint_order + 1,
        }
    }

    /// Whether `self · right` reduces to the unit.
    pub fn contracts_with(&self, right: &SimpleType) -> bool {
        self.base == right.base && self.adjoint_order + 1 == right.adjoint_order
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        let suffix = if self.adjoint_order < 0 { "^l" } else { "^r" };
        for _ in 0..self.adjoint_order.unsigned_abs() {
            f.write_str(suffix)?;
        }
        Ok(())
    }
}

/// An element of the free pregroup: an ordered product of simple types.
/// The empty product is the unit `1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PregroupType {
    pub factors: Vec<SimpleType>,
}

impl PregroupType {
    pub fn unit() -> Self {
        PregroupType::default()
    }

    pub fn new(factors: Vec<SimpleType>) -> Self {
        PregroupType { factors }
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.is_empty()
    }

    /// Monoid product.
    pub fn concat(&self, other: &PregroupType) -> PregroupType {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        PregroupType { factors }
    }
}

impl fmt::Display for PregroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "{SEPARATOR}")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

impl FromStr for PregroupType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_type(s)
    }
}

/// Parses a type over the default `{n, s}` generators.
pub fn parse_type(text: &str) -> Result<PregroupType> {
    parse_type_with(text, &Generators::default())
}

pub fn parse_type_with(text: &str, generators: &Generators) -> Result<PregroupType> {
    let trimmed = text.trim();
    let malformed = |reason: &str| Error::MalformedType {
        text: text.to_string(),
        reason: reason.to_string(),
    };
    if trimmed.is_empty() {
        return Err(malformed("empty type"));
    }
    if trimmed == "1" {
        return Ok(PregroupType::unit());
    }

    let mut factors = Vec::new();
    for raw in trimmed.split([SEPARATOR, '.']) {
        let raw = raw.trim();
        if raw.is_empty() {
            return Err(malformed("empty factor"));
        }
        let mut parts = raw.split('^');
        let atom = parts.next().unwrap_or_default();
        if atom.is_empty() {
            return Err(malformed("missing atom before adjoint suffix"));
        }
        if !generators.contains(atom) {
            return Err(Error::UnknownAtom(atom.to_string()));
        }
        let mut order = 0i32;
        for suffix in parts {
            match suffix {
                "l" => order -= 1,
                "r" => order += 1,
                other => return Err(malformed(&format!("bad adjoint suffix `^{other}`"))),
            }
        }
        factors.push(SimpleType::new(atom, order));
    }
    Ok(PregroupType { factors })
}

/// Which compact-closed counit a step corresponds to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cup {
    /// `A^l ⊗ A → I`
    Left,
    /// `A ⊗ A^r → I`
    Right,
}

/// One ε-step annihilating two factors of the concatenated sentence type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub left: usize,
    pub right: usize,
    pub cup: Cup,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    /// Concatenated factors of all words.
    pub factors: Vec<SimpleType>,
    /// Number of factors contributed by each word.
    pub word_lengths: Vec<usize>,
    pub steps: Vec<Step>,
    /// Surviving positions, ascending.
    pub residue: Vec<usize>,
}

impl Reduction {
    pub fn residue_type(&self) -> PregroupType {
        PregroupType::new(self.residue.iter().map(|&i| self.factors[i].clone()).collect())
    }

    /// Maps a position in the concatenated type to `(word, axis)`.
    pub fn locate(&self, position: usize) -> (usize, usize) {
        let mut offset = 0;
        for (word, &len) in self.word_lengths.iter().enumerate() {
            if position < offset + len {
                return (word, position - offset);
            }
            offset += len;
        }
        panic!("position {position} outside reduction of length {offset}");
    }

    /// Erases the paired factors and returns what is left.
    pub fn apply(&self) -> PregroupType {
        let mut alive = vec![true; self.factors.len()];
        for step in &self.steps {
            alive[step.left] = false;
            alive[step.right] = false;
        }
        PregroupType::new(
            self.factors
                .iter()
                .zip(alive)
                .filter(|(_, keep)| *keep)
                .map(|(f, _)| f.clone())
                .collect(),
        )
    }

    pub fn is_planar(&self) -> bool {
        self.steps.iter().all(|a| {
            self.steps
                .iter()
                .all(|b| !(a.left < b.left && b.left < a.right && a.right < b.right))
        })
    }
}

fn cup_kind(left: &SimpleType) -> Cup {
    // left is p(z) with the right partner p(z+1); p(z) is a left adjoint
    // exactly when z+1 <= 0.
    if left.adjoint_order < 0 {
        Cup::Left
    } else {
        Cup::Right
    }
}

/// Finds a planar ε-only reduction of the concatenated `sentence_types` whose
/// residue is `target`.
///
/// The greedy stack scan runs first and its result is returned whenever it
/// lands on the target. Free pregroup reductions are not confluent
/// (`p · p^r · p^r^r` reduces to either `p` or `p^r^r`), so when the greedy
/// residue differs an exhaustive interval search decides reducibility.
pub fn reduce(sentence_types: &[PregroupType], target: &PregroupType) -> Result<Reduction> {
    if sentence_types.is_empty() {
        return Err(Error::Empty("sentence has no words".into()));
    }
    let factors: Vec<SimpleType> = sentence_types.iter().flat_map(|t| t.factors.iter().cloned()).collect();
    let word_lengths: Vec<usize> = sentence_types.iter().map(PregroupType::len).collect();

    let steps = greedy_steps(&factors);
    let mut reduction = build_reduction(factors.clone(), word_lengths.clone(), steps);
    if reduction.residue_type() == *target {
        return Ok(reduction);
    }

    match exhaustive_steps(&factors, &target.factors) {
        Some(steps) => {
            reduction = build_reduction(factors, word_lengths, steps);
            Ok(reduction)
        }
        None => Err(Error::NotReducible {
            from: PregroupType::new(factors).to_string(),
            target: target.to_string(),
        }),
    }
}

fn build_reduction(factors: Vec<SimpleType>, word_lengths: Vec<usize>, mut steps: Vec<Step>) -> Reduction {
    steps.sort_by_key(|s| (s.right, s.left));
    let mut used = vec![false; factors.len()];
    for s in &steps {
        used[s.left] = true;
        used[s.right] = true;
    }
    let residue = (0..factors.len()).filter(|&i| !used[i]).collect();
    Reduction {
        factors,
        word_lengths,
        steps,
        residue,
    }
}

fn greedy_steps(factors: &[SimpleType]) -> Vec<Step> {
    let mut stack: Vec<usize> = Vec::with_capacity(factors.len());
    let mut steps = Vec::new();
    for (i, factor) in factors.iter().enumerate() {
        match stack.last() {
            Some(&top) if factors[top].contracts_with(factor) => {
                stack.pop();
                steps.push(Step {
                    left: top,
                    right: i,
                    cup: cup_kind(&factors[top]),
                });
            }
            _ => stack.push(i),
        }
    }
    steps
}

/// Interval dynamic programme over planar matchings. Any factor inside a cup
/// must itself be consumed, otherwise its wire would cross the cup.
fn exhaustive_steps(factors: &[SimpleType], target: &[SimpleType]) -> Option<Vec<Step>> {
    let n = factors.len();
    // partner[i][j] = Some(k): factors[i..j] fully reduce with i paired to k.
    let mut partner: Vec<Vec<Option<usize>>> = vec![vec![None; n + 1]; n + 1];
    let reducible = |partner: &Vec<Vec<Option<usize>>>, i: usize, j: usize| i == j || partner[i][j].is_some();

    for len in (2..=n).step_by(2) {
        for i in 0..=n - len {
            let j = i + len;
            for k in (i + 1..j).step_by(2) {
                if factors[i].contracts_with(&factors[k])
                    && reducible(&partner, i + 1, k)
                    && reducible(&partner, k + 1, j)
                {
                    partner[i][j] = Some(k);
                    break;
                }
            }
        }
    }

    // aligned[p][q]: factors[p..] can be reduced to target[q..].
    let t = target.len();
    let mut aligned = vec![vec![false; t + 1]; n + 1];
    aligned[n][t] = true;
    for p in (0..n).rev() {
        for q in (0..=t).rev() {
            let keep = q < t && factors[p] == target[q] && aligned[p + 1][q + 1];
            let skip = (p + 2..=n)
                .step_by(2)
                .any(|end| partner[p][end].is_some() && aligned[end][q]);
            aligned[p][q] = keep || skip;
        }
    }
    if !aligned[0][0] {
        return None;
    }

    let mut steps = Vec::new();
    let (mut p, mut q) = (0, 0);
    while p < n {
        if q < t && factors[p] == target[q] && aligned[p + 1][q + 1] {
            p += 1;
            q += 1;
            continue;
        }
        let end = (p + 2..=n)
            .step_by(2)
            .find(|&end| partner[p][end].is_some() && aligned[end][q])
            .expect("alignment table is consistent");
        collect_steps(factors, &partner, p, end, &mut steps);
        p = end;
    }
    Some(steps)
}

fn collect_steps(factors: &[SimpleType], partner: &[Vec<Option<usize>>], i: usize, j: usize, out: &mut Vec<Step>) {
    if i >= j {
        return;
    }
    let k = partner[i][j].expect("segment is reducible");
    out.push(Step {
        left: i,
        right: k,
        cup: cup_kind(&factors[i]),
    });
    collect_steps(factors, partner, i + 1, k, out);
    collect_steps(factors, partner, k + 1, j, out);
}

/// A reference to one tensor axis of one word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Axis {
    pub word: usize,
    pub axis: usize,
}

impl Axis {
    pub fn new(word: usize, axis: usize) -> Self {
        Axis { word, axis }
    }
}

/// Two axes summed against each other (the image of an ε-map).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pairing {
    pub a: Axis,
    pub b: Axis,
}

/// Index-level recipe for evaluating a sentence: every word contributes a
/// tensor of order `word_orders[w]`, every pairing is one contraction and the
/// result's axes are `output_axes`, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionPlan {
    pub word_orders: Vec<usize>,
    pub pairings: Vec<Pairing>,
    pub output_axes: Vec<Axis>,
}

impl ContractionPlan {
    /// Checks that every axis is either paired exactly once or emitted.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        let all = self
            .pairings
            .iter()
            .flat_map(|p| [p.a, p.b])
            .chain(self.output_axes.iter().copied());
        for ax in all {
            if ax.word >= self.word_orders.len() || ax.axis >= self.word_orders[ax.word] {
                return Err(Error::ShapeMismatch(format!(
                    "axis ({}, {}) out of range",
                    ax.word, ax.axis
                )));
            }
            if !seen.insert(ax) {
                return Err(Error::ShapeMismatch(format!(
                    "axis ({}, {}) used twice",
                    ax.word, ax.axis
                )));
            }
        }
        let total: usize = self.word_orders.iter().sum();
        if seen.len() != total {
            return Err(Error::ShapeMismatch(format!(
                "{} of {} axes are neither paired nor emitted",
                total - seen.len(),
                total
            )));
        }
        Ok(())
    }
}

/// Applies the functor to a reduction: each word of a k-factor type becomes an
/// order-k tensor and each ε-step becomes a pairing of the two axes it joins.
pub fn compile_plan(reduction: &Reduction, type_assignment: &[PregroupType]) -> Result<ContractionPlan> {
    if type_assignment.len() != reduction.word_lengths.len() {
        return Err(Error::ArityMismatch(format!(
            "reduction covers {} words, assignment has {}",
            reduction.word_lengths.len(),
            type_assignment.len()
        )));
    }
    let mut offset = 0;
    for (w, ty) in type_assignment.iter().enumerate() {
        let len = reduction.word_lengths[w];
        if ty.factors.as_slice() != &reduction.factors[offset..offset + len] {
            return Err(Error::ArityMismatch(format!(
                "word {w} has type {ty}, reduction expects {}",
                PregroupType::new(reduction.factors[offset..offset + len].to_vec())
            )));
        }
        offset += len;
    }

    let pairings = reduction
        .steps
        .iter()
        .map(|s| {
            let (wa, xa) = reduction.locate(s.left);
            let (wb, xb) = reduction.locate(s.right);
            Pairing {
                a: Axis::new(wa, xa),
                b: Axis::new(wb, xb),
            }
        })
        .collect();
    let output_axes = reduction
        .residue
        .iter()
        .map(|&i| {
            let (w, x) = reduction.locate(i);
            Axis::new(w, x)
        })
        .collect();
    let plan = ContractionPlan {
        word_orders: reduction.word_lengths.clone(),
        pairings,
        output_axes,
    };
    plan.validate()?;
    Ok(plan)
}

/// Word-to-type assignments loaded from a `word<TAB>type` file.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: BTreeMap<String, PregroupType>,
}

impl Lexicon {
    pub fn insert(&mut self, word: impl Into<String>, ty: PregroupType) {
        self.entries.insert(word.into(), ty);
    }

    pub fn get(&self, word: &str) -> Option<&PregroupType> {
        self.entries.get(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn parse_str(text: &str, source: &Path) -> Result<Self> {
        let mut lexicon = Lexicon::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (word, ty) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(source, lineno + 1, "expected `word<TAB>type`"))?;
            let ty = parse_type(ty).map_err(|e| Error::parse(source, lineno + 1, e.to_string()))?;
            lexicon.insert(word.trim(), ty);
        }
        Ok(lexicon)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Lexicon::parse_str(&text, path)
    }

    /// Looks up every word of a tokenized sentence.
    pub fn assign(&self, words: &[&str]) -> Result<Vec<PregroupType>> {
        words
            .iter()
            .map(|w| {
                self.get(w)
                    .cloned()
                    .ok_or_else(|| Error::Config(format!("word `{w}` is not in the lexicon")))
            })
            .collect()
    }
}
