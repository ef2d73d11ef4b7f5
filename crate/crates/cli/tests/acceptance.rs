//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them).
//!
//! 1. min-extraction golden result        6. visual/refined final-state parity
//! 2. min-extraction transition skeleton  7. transformation store parity
//! 3. sort golden result                  8. byte-identical reruns
//! 4. constraint-annotation animation     9. property suites
//! 5. rule-annotation animation

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use chrvis_core::engine::{self, DEFAULT_FUEL};
use chrvis_core::equiv::{load_corpus, seq_equiv, states_equivalent, CorpusEntry};
use chrvis_core::graphics::VisualKind;
use chrvis_core::syntax::parse_query;
use chrvis_core::term::Term;
use chrvis_core::transform::{strip_aux, transform};
use chrvis_core::vis::{self, VisLabel, VisStackEntry};
use chrvis_core::TransitionLabel;

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus() -> Vec<CorpusEntry> {
    load_corpus(&corpus_dir()).expect("corpus loads")
}

fn entry(name: &str) -> CorpusEntry {
    corpus()
        .into_iter()
        .find(|e| e.name == name)
        .unwrap_or_else(|| panic!("corpus entry {name} missing"))
}

fn pass(n: u32, what: &str) {
    println!("[PASS] criterion {n}: {what}");
}

#[test]
fn criterion_1_min_golden_result() {
    let started = Instant::now();
    let program = entry("min_plain").program;
    let query = parse_query("min(20),min(8),min(1)").unwrap();
    let outcome = engine::run(&program, engine::initial_state(&query), DEFAULT_FUEL).unwrap();
    assert_eq!(outcome.state.store_terms(), parse_query("min(1)").unwrap());
    assert_eq!(outcome.apply_rule_names(), vec!["remove_min", "remove_min"]);
    assert!(started.elapsed() < Duration::from_secs(1), "took {:?}", started.elapsed());
    pass(1, "min(20),min(8),min(1) ends with {min(1)} after two remove_min applications");
}

#[test]
fn criterion_2_min_transition_skeleton() {
    use TransitionLabel as L;
    let program = entry("min_plain").program;
    let query = parse_query("min(20)").unwrap();
    let outcome = engine::run(&program, engine::initial_state(&query), DEFAULT_FUEL).unwrap();
    assert_eq!(
        outcome.labels(),
        vec![L::Activate, L::Default, L::Default, L::Default, L::Default, L::Drop]
    );
    pass(2, "min(20) alone walks Activate, Default x4, Drop");
}

#[test]
fn criterion_3_sort_golden_result() {
    let started = Instant::now();
    let program = entry("sort_cells").program.strip_annotations();
    let query = parse_query("cell(0,7),cell(1,6),cell(2,4)").unwrap();
    let outcome = engine::run(&program, engine::initial_state(&query), DEFAULT_FUEL).unwrap();
    let mut got = outcome.state.store_terms();
    let mut expected = parse_query("cell(2,7),cell(1,6),cell(0,4)").unwrap();
    got.sort();
    expected.sort();
    assert_eq!(got, expected);
    assert!(started.elapsed() < Duration::from_secs(1), "took {:?}", started.elapsed());
    pass(3, "sort query ends with {cell(2,7),cell(1,6),cell(0,4)}");
}

#[test]
fn criterion_4_constraint_annotation_animation() {
    let started = Instant::now();
    let program = entry("sort_cells").program;
    assert!(program.comm_head);
    let query = parse_query("cell(0,7),cell(1,6),cell(2,4)").unwrap();
    let outcome = vis::run_vis(&program, &query, DEFAULT_FUEL, 0).unwrap();

    // Draw-count oracle: one draw per cell activation in the refined run,
    // i.e. 3 query constraints + 2 body constraints x 3 firings.
    let refined = engine::run(
        &program.strip_annotations(),
        engine::initial_state(&query),
        DEFAULT_FUEL,
    )
    .unwrap();
    let activations = refined
        .labels()
        .iter()
        .filter(|l| matches!(l, TransitionLabel::Activate))
        .count();
    assert_eq!(activations, 9);
    assert_eq!(outcome.draw_count(), activations);

    let gr = &outcome.state.gr;
    assert_eq!(gr.len(), 3);
    for (name, x) in [("7", 26), ("6", 14), ("4", 2)] {
        let obj = gr.by_name(name).unwrap_or_else(|| panic!("object {name} missing"));
        assert_eq!(obj.actuals[1], Term::Int(x), "x actual of {name}");
    }
    assert!(started.elapsed() < Duration::from_secs(1), "took {:?}", started.elapsed());
    pass(4, "9 draws; final graphical store holds 7/6/4 at x = 26/14/2");
}

#[test]
fn criterion_5_rule_annotation_animation() {
    let program = entry("sort_swap").program;
    assert!(!program.comm_head);
    let query = parse_query("cell(0,7),cell(1,6),cell(2,4)").unwrap();
    let outcome = vis::run_vis(&program, &query, DEFAULT_FUEL, 0).unwrap();

    let firings = outcome
        .labels()
        .iter()
        .filter(|l| matches!(l, VisLabel::Apply { rule, .. } if rule == "sort_rule"))
        .count();
    assert_eq!(firings, 3);

    let actions = outcome.actions();
    assert_eq!(actions.len(), 18, "6 actions per firing over 3 firings");
    for chunk in actions.chunks(6) {
        let target1 = chunk[0].actuals[0].clone();
        let target2 = chunk[1].actuals[0].clone();
        assert_ne!(target1, target2);
        // changeParam(pink) x2
        for action in &chunk[0..2] {
            assert_eq!(action.kind, VisualKind::ChangeParam);
            assert_eq!(action.actuals[1], Term::atom("bkgrd"));
            assert_eq!(action.actuals[2], Term::atom("pink"));
        }
        // moveRelative x2: equal and opposite displacements, listing order.
        assert_eq!(chunk[2].kind, VisualKind::MoveRelative);
        assert_eq!(chunk[3].kind, VisualKind::MoveRelative);
        assert_eq!(chunk[2].actuals[0], target1);
        assert_eq!(chunk[3].actuals[0], target2);
        let dx1 = match chunk[2].actuals[1] {
            Term::Int(n) => n,
            ref other => panic!("dx {other}"),
        };
        let dx2 = match chunk[3].actuals[1] {
            Term::Int(n) => n,
            ref other => panic!("dx {other}"),
        };
        assert!(dx1 > 0 && dx2 == -dx1, "displacements {dx1}/{dx2}");
        assert_eq!(chunk[2].actuals[2], Term::Int(0));
        assert_eq!(chunk[3].actuals[2], Term::Int(0));
        // changeParam(green) x2
        for (action, target) in chunk[4..6].iter().zip([&target1, &target2]) {
            assert_eq!(action.kind, VisualKind::ChangeParam);
            assert_eq!(&action.actuals[0], target);
            assert_eq!(action.actuals[1], Term::atom("bkgrd"));
            assert_eq!(action.actuals[2], Term::atom("green"));
        }
    }
    pass(5, "each sort_rule firing yields pink x2, move x2, green x2 (18 actions)");
}

#[test]
fn criterion_6_visual_refined_state_parity() {
    let started = Instant::now();
    let corpus = corpus();
    assert!(corpus.len() >= 6, "corpus ships {} programs", corpus.len());
    let mut checked = 0usize;
    for entry in &corpus {
        assert!(entry.queries.len() >= 4, "{} has {} queries", entry.name, entry.queries.len());
        let stripped = entry.program.strip_annotations();
        for query in &entry.queries {
            let vis_run = vis::run_vis(&entry.program, query, DEFAULT_FUEL, 0).unwrap();
            let refined_run =
                engine::run(&stripped, engine::initial_state(query), DEFAULT_FUEL).unwrap();
            let report = states_equivalent(&vis_run.state, &refined_run.state);
            assert!(
                report.verdict,
                "{} query {:?}: {:?} {:?}",
                entry.name, query, report.failing_clause, report.witness
            );
            checked += 1;
        }
    }
    assert!(checked >= 24);
    assert!(started.elapsed() < Duration::from_secs(10), "took {:?}", started.elapsed());
    pass(6, "final visual state equivalent to final refined state on every corpus query");
}

#[test]
fn criterion_7_transformation_store_parity() {
    let corpus = corpus();
    let mut checked = 0usize;
    for entry in &corpus {
        let stripped = entry.program.strip_annotations();
        let transformed = transform(&entry.program)
            .unwrap_or_else(|e| panic!("{} fails to transform: {e}", entry.name));
        for query in &entry.queries {
            let trans_run = engine::run(
                &transformed.program,
                engine::initial_state(query),
                DEFAULT_FUEL,
            )
            .unwrap();
            let plain_run =
                engine::run(&stripped, engine::initial_state(query), DEFAULT_FUEL).unwrap();
            let residue_free = strip_aux(&trans_run.state.store_terms());
            assert!(
                seq_equiv(&residue_free, &plain_run.state.store_terms()),
                "{} query {:?}: transformed store {:?} vs {:?}",
                entry.name,
                query,
                residue_free,
                plain_run.state.store_terms()
            );
            checked += 1;
        }
    }
    assert!(checked >= 24);
    pass(7, "strip_aux(transformed store) equals the original store on every corpus query");
}

#[test]
fn criterion_8_rerun_determinism() {
    let chrvis = env!("CARGO_BIN_EXE_chrvis");
    for (program, query) in [
        ("sort_swap.chr", "cell(0,7),cell(1,6),cell(2,4)"),
        ("dedup_random.chr", "item(1),item(2),item(1)"),
    ] {
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let out = tempfile::tempdir().unwrap();
            let status = Command::new(chrvis)
                .arg("run")
                .arg(corpus_dir().join(program))
                .args(["--query", query, "--semantics", "vis", "--seed", "7"])
                .args(["--frames", "--trace"])
                .arg("--out")
                .arg(out.path())
                .output()
                .unwrap();
            assert_eq!(status.status.code(), Some(0), "{program}");
            let frames = std::fs::read(out.path().join("frames.jsonl")).unwrap();
            let trace = std::fs::read(out.path().join("trace.txt")).unwrap();
            outputs.push((frames, trace));
        }
        assert_eq!(outputs[0].0, outputs[1].0, "{program}: frames.jsonl differs between runs");
        assert_eq!(outputs[0].1, outputs[1].1, "{program}: trace.txt differs between runs");
    }
    pass(8, "identical configs produce byte-identical frames.jsonl and trace.txt");
}

// ---- criterion 9: property suites --------------------------------------

fn random_term(rng: &mut ChaCha8Rng, depth: usize) -> Term {
    match rng.gen_range(0..if depth == 0 { 3 } else { 4 }) {
        0 => Term::Int(rng.gen_range(-9..10)),
        1 => Term::atom(["a", "b", "c"][rng.gen_range(0..3)]),
        2 => {
            let id = rng.gen_range(0..4u64);
            Term::var(format!("V{id}"), id)
        }
        _ => {
            let functor = ["f", "g"][rng.gen_range(0..2)];
            let arity = rng.gen_range(1..3);
            let args = (0..arity).map(|_| random_term(rng, depth - 1)).collect();
            Term::compound(functor, args)
        }
    }
}

fn random_multiset(rng: &mut ChaCha8Rng) -> Vec<Term> {
    let len = rng.gen_range(0..6);
    (0..len).map(|_| random_term(rng, 2)).collect()
}

#[test]
fn criterion_9_property_suites() {
    // (a) seq_equiv equivalence laws over 1000 random multisets.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let a = random_multiset(&mut rng);
        let mut b = a.clone();
        for i in (1..b.len()).rev() {
            let j = rng.gen_range(0..=i);
            b.swap(i, j);
        }
        let mut c = b.clone();
        c.reverse();
        assert!(seq_equiv(&a, &a), "reflexivity");
        assert!(seq_equiv(&a, &b) && seq_equiv(&b, &a), "symmetry under permutation");
        assert!(seq_equiv(&b, &c) && seq_equiv(&a, &c), "transitivity under permutation");
        let other = random_multiset(&mut rng);
        assert_eq!(seq_equiv(&a, &other), seq_equiv(&other, &a), "symmetry in general");
    }

    // (b)-(e) trace invariants across the whole corpus.
    let mut history_checked = 0usize;
    let mut draws_checked = 0usize;
    let mut annotations_checked = 0usize;
    let mut applies_checked = 0usize;
    for entry in corpus() {
        let stripped = entry.program.strip_annotations();
        for query in &entry.queries {
            let refined =
                engine::run(&stripped, engine::initial_state(query), DEFAULT_FUEL).unwrap();
            let mut seen = BTreeSet::new();
            for (label, _) in &refined.trace {
                if let TransitionLabel::Apply { rule, ids } = label {
                    assert!(seen.insert((rule.clone(), ids.clone())), "duplicate history key");
                    history_checked += 1;
                }
            }

            let outcome = vis::run_vis(&entry.program, query, DEFAULT_FUEL, 0).unwrap();
            let mut fired = BTreeSet::new();
            let mut vis_applies = BTreeSet::new();
            for (k, (label, after)) in outcome.trace.iter().enumerate() {
                let before = outcome.state_before(k);
                match label {
                    // Draw-count conservation: +1 per draw, 0 on a name
                    // collision (replacement) and 0 per update action.
                    VisLabel::Draw { object_id } => {
                        let drawn =
                            after.gr.objects().iter().find(|o| o.id == *object_id).unwrap();
                        let collision = before.gr.by_name(&drawn.name).is_some();
                        assert_eq!(
                            after.gr.len(),
                            before.gr.len() + 1 - usize::from(collision),
                            "draw-count conservation"
                        );
                        draws_checked += 1;
                    }
                    VisLabel::UpdateStore { .. } => {
                        assert_eq!(after.gr.len(), before.gr.len(), "update conservation");
                        draws_checked += 1;
                    }
                    // Annotation single-fire.
                    VisLabel::ApplyAnnotation { rule, head_ids } => {
                        assert!(
                            fired.insert((rule.clone(), head_ids.clone())),
                            "annotation fired twice"
                        );
                        annotations_checked += 1;
                    }
                    // Annotation precedence: no applicable annotation in the
                    // state an Apply fired from.
                    VisLabel::Apply { rule, ids } => {
                        assert!(vis_applies.insert((rule.clone(), ids.clone())));
                        if let Some(VisStackEntry::Active(term, id, _)) = before.stack.last() {
                            let mut probe = ChaCha8Rng::seed_from_u64(0);
                            let instance = vis::find_annotation_instance(
                                &entry.program,
                                before,
                                term,
                                *id,
                                &mut probe,
                            )
                            .unwrap();
                            assert!(instance.is_none(), "annotation precedence violated");
                            applies_checked += 1;
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    assert!(history_checked > 0 && draws_checked > 0);
    assert!(annotations_checked > 0 && applies_checked > 0);
    pass(
        9,
        "seq_equiv laws (1000 multisets), history/no-reapplication, draw-count \
         conservation, annotation single-fire and precedence: zero violations",
    );
}
