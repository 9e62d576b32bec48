//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS/FAIL line (visible with `cargo test -- --nocapture`).

use std::collections::BTreeSet;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fairpool::aggregation::{
    demonstrate_impossibility, layer_edges, AggregationRule, PoolingOptions, TieBreak,
};
use fairpool::diagram::{CausalDiagram, Edge, VarKind};
use fairpool::fair_pooling::{pooling_removal, removal_pooling};
use fairpool::fairness::{check_fair_bruteforce, check_fair_lemma1, FairnessPartition};
use fairpool::fixtures;
use fairpool::generate::{attach_random_scm, random_ensemble};
use fairpool::opinion::{linear_pool, WeightVector};

fn criterion(name: &str, body: impl FnOnce()) {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => println!("ACCEPTANCE {name}: PASS"),
        Err(cause) => {
            println!("ACCEPTANCE {name}: FAIL");
            resume_unwind(cause);
        }
    }
}

fn edges(pairs: &[(&str, &str)]) -> BTreeSet<Edge> {
    pairs.iter().map(|(s, t)| Edge::new(*s, *t)).collect()
}

fn names(values: &[&str]) -> BTreeSet<String> {
    values.iter().map(|s| s.to_string()).collect()
}

fn admission_partition() -> FairnessPartition {
    FairnessPartition::new(&fixtures::alice().endogenous(), "Y", ["Gnd"]).unwrap()
}

fn majority() -> PoolingOptions {
    PoolingOptions::new(AggregationRule::StrictMajority, TieBreak::Alphabetical)
}

#[test]
fn admission_golden_removal_pooling() {
    criterion("removal-pooling on the admission fixtures", || {
        let start = Instant::now();
        let experts = [fixtures::alice(), fixtures::bob()];
        let report = removal_pooling(&experts, &admission_partition(), &majority()).unwrap();
        assert_eq!(report.predictor_inputs, names(&["Cvr"]));
        assert!(report.fairness_certificate.holds);
        assert!(start.elapsed() < Duration::from_secs(1));
    });
}

#[test]
fn admission_golden_pooling_removal() {
    criterion("pooling-removal on the admission fixtures", || {
        let start = Instant::now();
        let experts = [fixtures::alice(), fixtures::bob()];
        let report = pooling_removal(&experts, &admission_partition(), &majority()).unwrap();
        assert_eq!(
            report.pooled_edges_before_removal(),
            edges(&[
                ("Gnd", "Job"),
                ("Dpt", "Mrk"),
                ("Age", "Job"),
                ("Cvr", "Y"),
                ("Job", "Y"),
                ("Dpt", "Y"),
                ("Mrk", "Y"),
            ])
        );
        assert_eq!(report.predictor_inputs, names(&["Cvr", "Dpt", "Mrk"]));
        assert_eq!(report.removed_vertices, names(&["Gnd", "Job"]));
        assert!(start.elapsed() < Duration::from_secs(1));
    });
}

#[test]
fn admission_golden_layering() {
    criterion(
        "predictor-first edge layering on the admission fixtures",
        || {
            let alice = fixtures::alice();
            let bob = fixtures::bob();
            let depth = alice
                .longest_path_len()
                .unwrap()
                .max(bob.longest_path_len().unwrap());
            let la = layer_edges(&alice, "Y", depth).unwrap();
            assert_eq!(
                la.layers[0],
                edges(&[("Cvr", "Y"), ("Dpt", "Y"), ("Job", "Y"), ("Mrk", "Y")])
            );
            assert_eq!(
                la.layers[1],
                edges(&[
                    ("Age", "Job"),
                    ("Dpt", "Mrk"),
                    ("Gnd", "Dpt"),
                    ("Gnd", "Job")
                ])
            );
            assert!(la.layers[2..].iter().all(BTreeSet::is_empty));
            assert!(la.unlayered.is_empty());
            let lb = layer_edges(&bob, "Y", depth).unwrap();
            assert_eq!(
                lb.layers[0],
                edges(&[
                    ("Age", "Y"),
                    ("Cvr", "Y"),
                    ("Dpt", "Y"),
                    ("Job", "Y"),
                    ("Mrk", "Y"),
                ])
            );
            assert_eq!(
                lb.layers[1],
                edges(&[("Age", "Job"), ("Dpt", "Mrk"), ("Gnd", "Job")])
            );
            assert!(lb.layers[2..].iter().all(BTreeSet::is_empty));
            assert!(lb.unlayered.is_empty());
        },
    );
}

fn random_rule(rng: &mut impl Rng, experts: usize) -> AggregationRule {
    match rng.gen_range(0..4) {
        0 => AggregationRule::StrictMajority,
        1 => AggregationRule::Quota {
            threshold: rng.gen_range(0.05..=1.0),
        },
        2 => AggregationRule::Unanimity,
        _ => {
            let raw: Vec<f64> = (0..experts).map(|_| rng.gen_range(0.01..1.0)).collect();
            let total: f64 = raw.iter().sum();
            AggregationRule::WeightedMajority {
                weights: raw.into_iter().map(|w| w / total).collect(),
            }
        }
    }
}

#[test]
fn structural_certificate_soundness_sweep() {
    criterion(
        "structural certificate soundness on 1,000 random ensembles",
        || {
            let start = Instant::now();
            let mut rng = ChaCha8Rng::seed_from_u64(0xFA1B);
            for trial in 0..1_000u32 {
                let experts = rng.gen_range(1..=3);
                let vars = rng.gen_range(2..=5);
                let edge_prob = rng.gen_range(0.1..0.9);
                let ensemble = random_ensemble(&mut rng, experts, vars, edge_prob, "Y");
                let partition =
                    FairnessPartition::new(&ensemble[0].endogenous(), "Y", ["V1"]).unwrap();
                let options =
                    PoolingOptions::new(random_rule(&mut rng, experts), TieBreak::Alphabetical);
                for report in [
                    removal_pooling(&ensemble, &partition, &options).unwrap(),
                    pooling_removal(&ensemble, &partition, &options).unwrap(),
                ] {
                    assert!(report.fairness_certificate.holds, "trial {trial}");
                    // restore the protected attribute as an isolated vertex so the
                    // brute-force check can still intervene on it
                    let mut augmented = report.pooled_diagram.clone();
                    for a in &partition.protected {
                        if !augmented.contains_vertex(a) {
                            augmented.add_vertex(a.clone(), VarKind::Endogenous);
                        }
                    }
                    let model = attach_random_scm(&augmented, &mut rng);
                    let full =
                        FairnessPartition::new(&augmented.endogenous(), "Y", ["V1"]).unwrap();
                    let verdict = check_fair_bruteforce(&model, &full).unwrap();
                    assert!(
                        verdict.fair,
                        "trial {trial}, {}: witnesses {:?}",
                        report.algorithm, verdict.witnesses
                    );
                }
            }
            assert!(start.elapsed() < Duration::from_secs(60));
        },
    );
}

#[test]
fn structural_check_is_one_sided() {
    criterion(
        "structural check rejects a model that is nevertheless fair",
        || {
            let model = fixtures::constant_through_descendant();
            let partition =
                FairnessPartition::new(&model.diagram.endogenous(), "Yp", ["A"]).unwrap();
            let structural =
                check_fair_lemma1(&model.diagram.endogenous_subdiagram(), &partition).unwrap();
            assert!(!structural.holds);
            assert_eq!(structural.offending_inputs, names(&["W"]));
            let brute = check_fair_bruteforce(&model, &partition).unwrap();
            assert!(brute.fair, "witnesses: {:?}", brute.witnesses);
        },
    );
}

#[test]
fn majority_pooling_property_tension() {
    criterion(
        "cyclic-majority instance: acyclicity vs order-independence",
        || {
            let report = demonstrate_impossibility();
            let cycle = edges(&[("A", "B"), ("B", "C"), ("C", "A")]);

            let unguarded = report.finding("strict-majority, no acyclicity guard");
            assert_eq!(unguarded.pooled_edges, cycle);
            assert_eq!(unguarded.violated_property, "acyclicity");

            let alphabetical =
                report.finding("strict-majority, acyclicity guard, alphabetical ties");
            let seeded = report
                .findings
                .iter()
                .find(|f| {
                    f.configuration
                        .starts_with("strict-majority, acyclicity guard, seeded")
                })
                .expect("seeded configuration present");
            assert_ne!(alphabetical.pooled_edges, seeded.pooled_edges);
            for guarded in [alphabetical, seeded] {
                assert_eq!(guarded.pooled_edges.len(), 2);
                assert!(guarded.pooled_edges.is_subset(&cycle));
                assert_eq!(guarded.violated_property, "unbiasedness");
            }

            let dictator = report.finding("copy expert 1");
            assert_eq!(dictator.pooled_edges, report.expert_edges[0]);
            assert_eq!(dictator.violated_property, "non-dictatorship");
        },
    );
}

#[test]
fn linear_pooling_axioms() {
    criterion("linear pooling axioms on 1,000 random profiles", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x11EA);
        for _ in 0..1_000u32 {
            let experts = rng.gen_range(2..=5);
            let outcomes = rng.gen_range(2..=4);
            let raw: Vec<f64> = (0..experts).map(|_| rng.gen_range(0.01..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let weights = WeightVector::new(raw.into_iter().map(|w| w / total).collect()).unwrap();
            let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                let raw: Vec<f64> = (0..outcomes).map(|_| rng.gen_range(0.01..1.0)).collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|p| p / total).collect()
            };

            // unanimity preservation: identical opinions pass through exactly
            let shared = sample(&mut rng);
            let unanimous = vec![shared.clone(); experts];
            let pooled = linear_pool(&unanimous, &weights).unwrap();
            for (p, s) in pooled.iter().zip(&shared) {
                assert!((p - s).abs() < 1e-9);
            }

            // event-wise independence: the pooled mass of one outcome only
            // depends on the experts' masses for that outcome
            let profile: Vec<Vec<f64>> = (0..experts).map(|_| sample(&mut rng)).collect();
            let pooled = linear_pool(&profile, &weights).unwrap();
            assert!((pooled.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let pivot = rng.gen_range(0..outcomes);
            let reshuffled: Vec<Vec<f64>> = profile
                .iter()
                .map(|dist| {
                    // redistribute all non-pivot mass, keeping the pivot fixed
                    let mut other = sample(&mut rng);
                    let spare = 1.0 - dist[pivot];
                    let other_total: f64 = other
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != pivot)
                        .map(|(_, p)| p)
                        .sum();
                    for (i, slot) in other.iter_mut().enumerate() {
                        if i == pivot {
                            *slot = dist[pivot];
                        } else {
                            *slot = *slot / other_total * spare;
                        }
                    }
                    other
                })
                .collect();
            let repooled = linear_pool(&reshuffled, &weights).unwrap();
            assert!((repooled[pivot] - pooled[pivot]).abs() < 1e-9);
        }
    });
}

#[test]
fn seeded_commands_are_byte_identical() {
    criterion(
        "every command is byte-identical when re-run with the same seed",
        || {
            let fixture = |name: &str| format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
            let alice = fixture("alice.json");
            let bob = fixture("bob.json");
            let commands: Vec<Vec<&str>> = vec![
                vec!["validate", &alice, &bob],
                vec![
                    "pool",
                    "--algorithm",
                    "both",
                    "--protected",
                    "Gnd",
                    "--tie-break",
                    "random",
                    "--seed",
                    "5",
                    &alice,
                    &bob,
                ],
                vec![
                    "pool",
                    "--algorithm",
                    "removal-pooling",
                    "--rule",
                    "quota",
                    "--quota-threshold",
                    "0.6",
                    "--protected",
                    "Gnd",
                    &alice,
                    &bob,
                ],
                vec!["check-fair", &bob, "--protected", "Gnd"],
                vec!["bench", "--trials", "40", "--vars", "6", "--seed", "3"],
                vec!["export", &alice, "--protected", "Gnd"],
            ];
            for args in commands {
                let run = || {
                    Command::new(env!("CARGO_BIN_EXE_fairpool"))
                        .args(&args)
                        .output()
                        .expect("binary runs")
                };
                let first = run();
                let second = run();
                assert_eq!(first.status.code(), second.status.code(), "{args:?}");
                assert_eq!(first.stdout, second.stdout, "{args:?}");
                assert_eq!(first.stderr, second.stderr, "{args:?}");
            }
        },
    );
}

#[test]
fn prudent_pipeline_empties_more_often() {
    criterion("removal-pooling empties the pool at least as often", || {
        let start = Instant::now();
        let result = fairpool::bench::run(&fairpool::bench::BenchConfig {
            experts: 3,
            vars: 7,
            edge_prob: 0.3,
            trials: 1_000,
            seed: 0,
        })
        .unwrap();
        assert!(
            result.empty_rate_removal_pooling >= result.empty_rate_pooling_removal,
            "removal-pooling rate {} < pooling-removal rate {}",
            result.empty_rate_removal_pooling,
            result.empty_rate_pooling_removal,
        );
        assert!(start.elapsed() < Duration::from_secs(60));
    });
}

#[test]
fn cyclic_majority_diagrams_are_the_published_instance() {
    criterion(
        "cyclic-majority expert profile matches the three-expert construction",
        || {
            let report = demonstrate_impossibility();
            assert_eq!(report.expert_edges.len(), 3);
            assert_eq!(report.expert_edges[0], edges(&[("A", "B"), ("B", "C")]));
            assert_eq!(report.expert_edges[1], edges(&[("B", "C"), ("C", "A")]));
            assert_eq!(report.expert_edges[2], edges(&[("C", "A"), ("A", "B")]));
            // each expert's own diagram is acyclic; only the majority cycles
            for es in &report.expert_edges {
                let mut d = CausalDiagram::new();
                for e in es {
                    d.add_vertex(e.source(), VarKind::Endogenous);
                    d.add_vertex(e.target(), VarKind::Endogenous);
                    d.add_edge(e.clone());
                }
                assert!(d.is_acyclic());
            }
        },
    );
}
