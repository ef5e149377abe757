mod common;

use semsimp::drs::{lift_modifiers, preprocess, realize};
use semsimp::pipeline::{Pipeline, Stages};

use common::*;

const INPUT: &str = "In 1964 Peter Higgs published his second paper in Physical Review Letters describing Higgs \
                     mechanism which predicted a new massive spin-zero boson for the first time .";
const S1: &str = "In 1964 Peter Higgs wrote his second paper in Physical Review Letters explaining Higgs mechanism \
                  which predicted a new massive elementary particle for the first time .";
const S2: [&str; 2] = [
    "In 1964 Peter Higgs wrote his second paper in Physical Review Letters explaining Higgs mechanism .",
    "Higgs mechanism predicted a new massive elementary particle for the first time .",
];
const S: &str = "In 1964 Peter Higgs wrote his paper explaining Higgs mechanism . \
                 Higgs mechanism predicted a new elementary particle .";

#[test]
fn fixture_realizes_the_input_sentence() {
    let g = preprocess(higgs_raw());
    assert_eq!(realize(&g, &g.all_vars()), INPUT);
}

#[test]
fn worked_example_end_to_end() {
    let trace = higgs_pipeline().simplify_graph(&higgs_raw()).unwrap();
    assert_eq!(trace.input, INPUT);
    assert_eq!(trace.s1, S1);
    assert_eq!(trace.s2, S2);
    assert_eq!(trace.output_line(), S);
}

#[test]
fn single_stages_stop_at_their_intermediate() {
    let full = higgs_pipeline();
    let lex = full.with_stages(Stages { lex: true, split: false, delete: false }).unwrap();
    assert_eq!(lex.simplify_graph(&higgs_raw()).unwrap().output_line(), S1);

    let lex_split = full.with_stages(Stages { lex: true, split: true, delete: false }).unwrap();
    assert_eq!(lex_split.simplify_graph(&higgs_raw()).unwrap().output, S2);
}

#[test]
fn split_without_lexical_step_keeps_original_words() {
    let full = higgs_pipeline();
    let split = full.with_stages(Stages { lex: false, split: true, delete: false }).unwrap();
    let out = split.simplify_graph(&higgs_raw()).unwrap().output;
    assert_eq!(out.len(), 2);
    assert!(out[0].contains("published"), "{out:?}");
    assert!(out[1].starts_with("Higgs mechanism predicted"), "{out:?}");
    assert!(out[1].contains("spin-zero boson"), "{out:?}");
}

#[test]
fn default_deletion_removes_a_single_phrase_per_component() {
    let m = higgs_models();
    let p = Pipeline::from_models(Stages::ALL, Some(m.rules), Some(m.lm), Some(m.sft), Some(m.relprobs)).unwrap();
    let trace = p.simplify_graph(&higgs_raw()).unwrap();
    assert_eq!(trace.s2, S2);
    let kept = trace.output_line().split(' ').count();
    let before = S2.join(" ").split(' ').count();
    assert!(kept < before);
    assert!(kept > S.split(' ').count());
}

#[test]
fn modifier_lifting_is_what_makes_adjectives_deletable() {
    let g = lift_modifiers(preprocess(higgs_raw()));
    let labels: Vec<&str> = g.edges.iter().map(|e| e.label.as_str()).collect();
    assert!(labels.contains(&"modifier"));
}

#[test]
fn enabled_stage_without_its_model_is_a_config_error() {
    let m = higgs_models();
    let err = Pipeline::from_models(Stages::ALL, Some(m.rules), None, Some(m.sft), Some(m.relprobs)).unwrap_err();
    assert!(matches!(err, semsimp::Error::Config(_)), "{err}");
}
