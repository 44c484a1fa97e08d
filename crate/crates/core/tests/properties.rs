use compdist::compose::{
    compose_copy_object, compose_copy_subject, compose_frobenius, compose_relational, compose_verb_object,
    FrobeniusMode, Rep, SentenceRep,
};
use compdist::eval::spearman_rho;
use compdist::pregroup::{parse_type, reduce, PregroupType, SimpleType};
use compdist::semspace::{count_cooccurrences_for, Corpus};
use compdist::tensors::{build_separable, entanglement_score, ArgumentPairs, VerbMatrix, VerbMethod};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn simple_type() -> impl Strategy<Value = SimpleType> {
    (prop::sample::select(vec!["n", "s"]), -3i32..=3).prop_map(|(b, z)| SimpleType::new(b, z))
}

/// Builds a well-nested factor list that contracts to the unit: each byte
/// either opens a new `p(z)` or closes the innermost open one with `p(z+1)`.
fn nested_unit(choices: &[u8]) -> Vec<SimpleType> {
    let mut out = Vec::new();
    let mut open: Vec<SimpleType> = Vec::new();
    for &c in choices {
        if c % 2 == 0 && !open.is_empty() {
            let p = open.pop().unwrap();
            out.push(SimpleType::new(p.base.name(), p.adjoint_order + 1));
        } else {
            let base = if c & 2 == 0 { "n" } else { "s" };
            let p = SimpleType::new(base, (c / 4 % 7) as i32 - 3);
            out.push(p.clone());
            open.push(p);
        }
    }
    while let Some(p) = open.pop() {
        out.push(SimpleType::new(p.base.name(), p.adjoint_order + 1));
    }
    out
}

fn split_words(factors: Vec<SimpleType>, cuts: &[bool]) -> Vec<PregroupType> {
    let mut words = vec![Vec::new()];
    for (i, f) in factors.into_iter().enumerate() {
        if i > 0 && cuts.get(i).copied().unwrap_or(false) {
            words.push(Vec::new());
        }
        words.last_mut().unwrap().push(f);
    }
    words.into_iter().map(PregroupType::new).collect()
}

fn matrix(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-5.0..5.0f64, d * d).prop_map(move |v| DMatrix::from_vec(d, d, v))
}

fn vector(d: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-5.0..5.0f64, d).prop_map(DVector::from_vec)
}

fn close(a: &SentenceRep, b: &SentenceRep, tol: f64) -> bool {
    let (x, y) = (a.value.as_slice(), b.value.as_slice());
    let scale = x.iter().chain(y).fold(1.0f64, |m, v| m.max(v.abs()));
    x.iter().zip(y).all(|(p, q)| (p - q).abs() <= tol * scale)
}

proptest! {
    #[test]
    fn type_display_round_trips(factors in prop::collection::vec(simple_type(), 1..=6)) {
        let t = PregroupType::new(factors);
        prop_assert_eq!(parse_type(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn reductions_are_planar_and_sound(
        left in prop::collection::vec(any::<u8>(), 0..10),
        right in prop::collection::vec(any::<u8>(), 0..10),
        cuts in prop::collection::vec(any::<bool>(), 24),
    ) {
        let mut factors = nested_unit(&left);
        factors.push(SimpleType::new("s", 0));
        factors.extend(nested_unit(&right));
        let words = split_words(factors, &cuts);
        let target = parse_type("s").unwrap();
        let red = reduce(&words, &target).unwrap();
        prop_assert!(red.is_planar());
        prop_assert_eq!(red.apply(), target);
        prop_assert_eq!(red.steps.len() * 2 + 1, red.factors.len());
        for step in &red.steps {
            prop_assert!(step.left < step.right);
            prop_assert!(red.factors[step.left].contracts_with(&red.factors[step.right]));
        }
    }

    #[test]
    fn rank1_beats_any_outer_product(m in matrix(4), x in vector(4), y in vector(4)) {
        let best = (&m - compdist::rank1_matrix(&m).unwrap()).norm();
        prop_assert!(best <= (&m - &x * y.transpose()).norm() + 1e-9);
    }

    #[test]
    fn rank1_is_idempotent(m in matrix(5)) {
        let once = compdist::rank1_matrix(&m).unwrap();
        let twice = compdist::rank1_matrix(&once).unwrap();
        prop_assert!((&once - &twice).norm() <= 1e-9 * once.norm().max(1.0));
    }

    #[test]
    fn separable_verbs_score_one(pairs in prop::collection::vec((vector(4), vector(4)), 1..6)) {
        let sum_s: DVector<f64> = pairs.iter().fold(DVector::zeros(4), |a, (s, _)| a + s);
        let sum_o: DVector<f64> = pairs.iter().fold(DVector::zeros(4), |a, (_, o)| a + o);
        prop_assume!(sum_s.norm() > 1e-3 && sum_o.norm() > 1e-3);
        let m = build_separable(&ArgumentPairs::from_vectors("v", pairs)).unwrap();
        prop_assert!((entanglement_score(&m).unwrap() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn compositions_are_linear_in_each_argument(
        v in matrix(4), x in vector(4), y in vector(4), other in vector(4), alpha in -3.0..3.0f64,
    ) {
        let verb = VerbMatrix::new("v", v, VerbMethod::Relational).unwrap();
        let mix = &x * alpha + &y;
        type Compose = fn(&DVector<f64>, &VerbMatrix, &DVector<f64>) -> compdist::Result<SentenceRep>;
        let frob_add: Compose = |s, v, o| compose_frobenius(s, v, o, FrobeniusMode::Additive);
        let models: [Compose; 4] = [compose_relational, compose_copy_subject, compose_copy_object, frob_add];
        for f in models {
            // Subject slot, then object slot.
            for subject_slot in [true, false] {
                let call = |arg: &DVector<f64>| {
                    if subject_slot { f(arg, &verb, &other) } else { f(&other, &verb, arg) }.unwrap()
                };
                let (fx, fy) = (call(&x), call(&y));
                let lhs = call(&mix);
                let value = match (&fx.value, &fy.value) {
                    (Rep::Vec(a), Rep::Vec(b)) => Rep::Vec(a * alpha + b),
                    (Rep::Mat(a), Rep::Mat(b)) => Rep::Mat(a * alpha + b),
                    _ => unreachable!("one model, one shape"),
                };
                let rhs = SentenceRep { value, ..fx };
                prop_assert!(close(&lhs, &rhs, 1e-10));
            }
        }
        let vo = |o: &DVector<f64>| compose_verb_object(&verb, o).unwrap();
        let rhs = vo(&x).as_vector().unwrap() * alpha + vo(&y).as_vector().unwrap();
        prop_assert!((vo(&mix).as_vector().unwrap() - &rhs).amax() <= 1e-10 * rhs.amax().max(1.0));
    }

    #[test]
    fn spearman_ignores_monotone_transforms(
        pairs in prop::collection::vec((0u8..6, -10.0..10.0f64), 3..40),
    ) {
        let xs: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let warped: Vec<f64> = xs.iter().map(|x| (x * 0.7).exp() - 4.0).collect();
        let flipped: Vec<f64> = xs.iter().map(|x| -x).collect();
        match spearman_rho(&xs, &ys) {
            Ok(rho) => {
                prop_assert!((spearman_rho(&warped, &ys).unwrap() - rho).abs() <= 1e-12);
                prop_assert!((spearman_rho(&flipped, &ys).unwrap() + rho).abs() <= 1e-12);
                prop_assert!((spearman_rho(&ys, &xs).unwrap() - rho).abs() <= 1e-12);
                prop_assert!((-1.0..=1.0).contains(&rho));
            }
            Err(_) => prop_assert!(spearman_rho(&warped, &ys).is_err()),
        }
    }

    #[test]
    fn cooccurrence_counts_merge_across_corpus_splits(
        sentences in prop::collection::vec(prop::collection::vec(0usize..6, 0..12), 1..30),
        split in 0usize..30,
        window in 1usize..4,
    ) {
        let words = ["a", "b", "c", "d", "e", "f"];
        let to_corpus = |s: &[Vec<usize>]| Corpus::new(
            s.iter().map(|sent| sent.iter().map(|&i| words[i].to_string()).collect()).collect(),
        );
        let split = split.min(sentences.len());
        let targets: Vec<String> = words.iter().map(|w| w.to_string()).collect();
        let basis: Vec<String> = targets[..3].to_vec();
        let whole = count_cooccurrences_for(&to_corpus(&sentences), &targets, &basis, window).unwrap();
        let head = count_cooccurrences_for(&to_corpus(&sentences[..split]), &targets, &basis, window).unwrap();
        let tail = count_cooccurrences_for(&to_corpus(&sentences[split..]), &targets, &basis, window).unwrap();
        prop_assert_eq!(head.merge(&tail).unwrap(), whole);
    }
}
