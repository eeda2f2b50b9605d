//! Property tests over randomized models. Generators are seeded, so every
//! failure reproduces from the printed seed.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use arglife_core::conservation::{window_value_at, WindowRule};
use arglife_core::lifecycle::{
    apply_operation, init_baseline, ArgOperation, MaturityWeights, MetricContext, Phase,
};
use arglife_core::model::{
    apply_changeset, diff, extract_module, validate, Argument, ChangeSet, ElementId, ElementKind,
    RelationKind,
};
use arglife_core::pattern::{
    coverage, instantiate, instantiate_into, parse_pattern, BindingSet, Framework, Pattern,
};
use arglife_core::rational::Rational;
use arglife_core::testgen::{random_argument, random_edit, random_parser_input};
use arglife_core::text::{parse_argument, serialize_argument};

fn pattern_from(argument: Argument) -> Pattern {
    let vocabulary = argument.open_placeholders();
    Pattern {
        name: argument.name.clone(),
        argument,
        multiplicities: Vec::new(),
        optional_elements: BTreeSet::new(),
        vocabulary,
    }
}

fn scalar(names: &[String]) -> BindingSet {
    BindingSet {
        scalar: names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), format!("value {i}")))
            .collect(),
        expansions: Vec::new(),
    }
}

/// Supported-by closure plus attached context elements, written independently
/// of the library's traversal: a plain fixpoint loop over the relation list.
fn brute_force_module(argument: &Argument, root: &ElementId) -> BTreeSet<ElementId> {
    let mut included = BTreeSet::from([root.clone()]);
    loop {
        let mut grew = false;
        for relation in &argument.relations {
            if relation.kind == RelationKind::SupportedBy
                && included.contains(&relation.source)
                && argument.contains(&relation.target)
                && included.insert(relation.target.clone())
            {
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    let closure: Vec<ElementId> = included.iter().cloned().collect();
    for id in closure {
        for relation in &argument.relations {
            if relation.kind == RelationKind::InContextOf
                && relation.source == id
                && argument.contains(&relation.target)
            {
                included.insert(relation.target.clone());
            }
        }
    }
    included
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_serialize_round_trip(seed in any::<u64>(), size in 1usize..40) {
        let argument = random_argument(seed, size);
        let text = serialize_argument(&argument).unwrap();
        let reparsed = parse_argument(&text).unwrap();
        prop_assert_eq!(&reparsed, &argument);
        prop_assert_eq!(serialize_argument(&reparsed).unwrap(), text);
    }

    #[test]
    fn diff_round_trip(seed in any::<u64>(), size in 1usize..30, edit_seed in any::<u64>()) {
        let base = random_argument(seed, size);
        let next = random_edit(edit_seed, &base);
        let change = diff(&base, &next).unwrap();
        prop_assert_eq!(apply_changeset(&base, &change).unwrap(), next);
        prop_assert!(diff(&base, &base).unwrap().is_empty());
        // Pure: a second run yields the identical change set.
        prop_assert_eq!(diff(&base, &random_edit(edit_seed, &base)).unwrap(), change);
    }

    #[test]
    fn extraction_matches_brute_force_and_is_closed(seed in any::<u64>(), size in 1usize..30) {
        let argument = random_argument(seed, size);
        let goals: Vec<ElementId> = argument
            .elements
            .values()
            .filter(|e| e.kind == ElementKind::Goal)
            .map(|e| e.id.clone())
            .collect();
        for goal in goals {
            let extracted = extract_module(&argument, &goal).unwrap();
            let expected = brute_force_module(&argument, &goal);
            let actual: BTreeSet<ElementId> = extracted.elements.keys().cloned().collect();
            prop_assert_eq!(&actual, &expected);
            for relation in &extracted.relations {
                prop_assert!(actual.contains(&relation.source));
                prop_assert!(actual.contains(&relation.target));
            }
            prop_assert!(validate(&extracted).is_empty());
        }
    }

    #[test]
    fn coverage_is_monotone_in_bindings(seed in any::<u64>(), size in 1usize..30, split in 0usize..7) {
        // Optional-free patterns: binding more placeholders never lowers the
        // bound count. Optional drops are audited separately because dropping
        // an unselected branch can remove open placeholders on its own.
        let pattern = pattern_from(random_argument(seed, size));
        let names: Vec<String> = pattern.vocabulary.iter().cloned().collect();
        let k = split.min(names.len());
        let smaller = scalar(&names[..k]);
        let larger = scalar(&names);
        let low = instantiate(&pattern, &smaller).unwrap();
        let high = instantiate(&pattern, &larger).unwrap();
        prop_assert!(high.coverage.bound_placeholders >= low.coverage.bound_placeholders);
        prop_assert_eq!(high.coverage.bound_placeholders, pattern.vocabulary.len() as u64);
    }

    #[test]
    fn instantiation_is_idempotent_once_saturated(seed in any::<u64>(), size in 1usize..30) {
        let pattern = pattern_from(random_argument(seed, size));
        let names: Vec<String> = pattern.vocabulary.iter().cloned().collect();
        let saturated = instantiate(&pattern, &scalar(&names)).unwrap().argument;
        let again = instantiate_into(&saturated, &pattern, &scalar(&names), true).unwrap();
        prop_assert_eq!(again.argument, saturated);
    }

    #[test]
    fn scalar_instantiation_preserves_structure(seed in any::<u64>(), size in 1usize..30, split in 0usize..7) {
        let pattern = pattern_from(random_argument(seed, size));
        let names: Vec<String> = pattern.vocabulary.iter().cloned().collect();
        let k = split.min(names.len());
        let outcome = instantiate(&pattern, &scalar(&names[..k])).unwrap();
        let before: BTreeSet<&ElementId> = pattern.argument.elements.keys().collect();
        let after: BTreeSet<&ElementId> = outcome.argument.elements.keys().collect();
        prop_assert_eq!(before, after);
        prop_assert_eq!(&outcome.argument.relations, &pattern.argument.relations);
    }

    #[test]
    fn window_values_match_brute_force(values in prop::collection::vec((1i64..200, 1i64..10), 1..25), k in 1u32..6) {
        let values: Vec<Rational> = values.into_iter().map(|(n, d)| Rational::new(n, d)).collect();
        for position in 0..values.len() {
            for rule in [
                WindowRule::Latest,
                WindowRule::MeanOfLastK(k),
                WindowRule::MaxOfLastK(k),
                WindowRule::MinOfLastK(k),
            ] {
                let got = window_value_at(rule, &values, position);
                // Oracle: explicit index arithmetic over the raw list.
                let expected = match rule {
                    WindowRule::Latest => Some(values[position]),
                    _ if position + 1 < k as usize => None,
                    #[allow(unreachable_patterns)]
                    WindowRule::Latest => unreachable!(),
                    WindowRule::MeanOfLastK(_) => {
                        let mut sum = Rational::ZERO;
                        for i in (position + 1 - k as usize)..=position {
                            sum = sum + values[i];
                        }
                        Some(sum / Rational::from_integer(k as i64))
                    }
                    WindowRule::MaxOfLastK(_) => {
                        let mut best = values[position + 1 - k as usize];
                        for i in (position + 1 - k as usize)..=position {
                            if values[i] > best {
                                best = values[i];
                            }
                        }
                        Some(best)
                    }
                    WindowRule::MinOfLastK(_) => {
                        let mut best = values[position + 1 - k as usize];
                        for i in (position + 1 - k as usize)..=position {
                            if values[i] < best {
                                best = values[i];
                            }
                        }
                        Some(best)
                    }
                };
                prop_assert_eq!(got, expected);
            }
        }
    }

    #[test]
    fn parser_is_total_on_junk(seed in any::<u64>()) {
        let input = random_parser_input(seed);
        // Any outcome but a panic or hang is acceptable.
        let _ = parse_argument(&input);
        let _ = arglife_core::pattern::parse_pattern(&input);
    }

    #[test]
    fn coverage_matches_textual_count(seed in any::<u64>(), size in 1usize..30) {
        // The coverage definition must agree with a plain textual scan of the
        // canonical serialization: count `{Name}` tokens and flags.
        let argument = random_argument(seed, size);
        let vocabulary = argument.open_placeholders();
        let text = serialize_argument(&argument).unwrap();
        let report = coverage(&argument, &vocabulary);
        let mut open_in_text: BTreeSet<String> = BTreeSet::new();
        for name in &vocabulary {
            if text.contains(&format!("{{{name}}}")) {
                open_in_text.insert(name.clone());
            }
        }
        prop_assert_eq!(
            report.bound_placeholders,
            (vocabulary.len() - open_in_text.len()) as u64
        );
        let flag_count = text.matches(" uninstantiated").count();
        prop_assert_eq!(report.uninstantiated_elements.len(), flag_count);
    }
}

/// Random operation sequences never produce an illegal phase transition, and
/// operations rejected for phase reasons leave no revision behind.
#[test]
fn phase_discipline_holds_under_random_operation_sequences() {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    let framework = Framework::new(vec![
        parse_pattern(
            r#"pattern top {
  goal G_top "System {System} is acceptably safe" uninstantiated tag process supported_by G_sub
  goal G_sub "Risk argument for {Area}" undeveloped uninstantiated
}"#,
        )
        .unwrap(),
    ])
    .unwrap();
    let vocabulary = framework.vocabulary();
    let evidenced = BTreeSet::new();
    let ctx = MetricContext {
        vocabulary: &vocabulary,
        evidenced_solutions: &evidenced,
        weights: MaturityWeights::default(),
    };
    let legal = |from: Phase, to: Phase| {
        matches!(
            (from, to),
            (Phase::Baselining, Phase::Evolution)
                | (Phase::Evolution, Phase::Evolution)
                | (Phase::Evolution, Phase::Conservation)
                | (Phase::Conservation, Phase::Conservation)
        )
    };

    for seed in 0..25u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let start = chrono::DateTime::from_timestamp(1_750_000_000, 0).unwrap();
        let mut current = init_baseline(&framework, "toy", start, MaturityWeights::default())
            .unwrap()
            .revision;
        for step in 0..40 {
            let now = start + chrono::Duration::seconds(step + 1);
            let op = match rng.gen_range(0..5) {
                0 => ArgOperation::Instantiate {
                    pattern: "top".to_string(),
                    bindings: BindingSet {
                        scalar: [(
                            ["System", "Area"].choose(&mut rng).unwrap().to_string(),
                            "value".to_string(),
                        )]
                        .into(),
                        expansions: vec![],
                    },
                    dropped_optionals: BTreeSet::new(),
                },
                1 => ArgOperation::Eliminate {
                    root: ElementId::new("G_sub").unwrap(),
                    justification: "not relevant here".to_string(),
                },
                2 => ArgOperation::Extend {
                    fragment: parse_argument(&format!(
                        "argument f {{ goal G_x{step} \"extra detail\" undeveloped }}"
                    ))
                    .unwrap(),
                    attach_at: ElementId::new("G_top").unwrap(),
                    justification: "missing aspect".to_string(),
                },
                3 => ArgOperation::Deploy { release: 0 },
                _ => ArgOperation::ConservationUpdate {
                    violations: vec![],
                    change: ChangeSet::default(),
                    rationale: "qualitative reassessment".to_string(),
                    qualitative: true,
                },
            };
            let before = current.clone();
            match apply_operation(&current, op, &framework, &ctx, now, true) {
                Ok(next) => {
                    assert!(
                        legal(before.phase, next.phase),
                        "illegal transition {:?} -> {:?} (seed {seed}, step {step})",
                        before.phase,
                        next.phase
                    );
                    assert_eq!(next.parent, Some(before.id));
                    assert_eq!(next.id, before.id + 1);
                    current = next;
                }
                Err(_) => {
                    assert_eq!(current, before, "failed operation mutated state");
                }
            }
        }
    }
}

/// Instantiate steps never lower the context score (bound names plus
/// instantiated elements) when expansions produce at least one copy.
#[test]
fn context_score_is_monotone_under_instantiation() {
    use arglife_core::lifecycle::context_score;

    for seed in 0..40u64 {
        let pattern = pattern_from(random_argument(seed, 1 + (seed as usize % 25)));
        let names: Vec<String> = pattern.vocabulary.iter().cloned().collect();
        for k in 0..=names.len() {
            let outcome = instantiate(&pattern, &scalar(&names[..k])).unwrap();
            let before = context_score(&pattern.argument, &pattern.vocabulary);
            let after = context_score(&outcome.argument, &pattern.vocabulary);
            assert!(
                after >= before,
                "context score fell from {before} to {after} (seed {seed}, k {k})"
            );
        }
    }
}

#[test]
fn validators_are_deterministic() {
    for seed in 0..20u64 {
        let argument = random_argument(seed, 20);
        assert_eq!(validate(&argument), validate(&argument));
        let mapped: BTreeMap<ElementId, usize> = argument
            .elements
            .keys()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        assert_eq!(mapped.len(), argument.elements.len());
    }
}
