mod common;

use common::synthetic::{generate, SyntheticConfig};
use walign::eval::evaluate;
use walign::ibm::{decode, train, Direction, ModelKind, TrainConfig};
use walign::symmetrize::{dims, symmetrize_corpus, Heuristic};

#[test]
fn forward_model_recovers_generating_parameters() {
    let data = generate(&SyntheticConfig::default());
    let cfg = TrainConfig { kind: ModelKind::Diagonal, ..TrainConfig::default() };
    let fwd = train(&data.corpus, Direction::Forward, &cfg).unwrap();

    for w in fwd.ll_trace.windows(2) {
        assert!(w[1] >= w[0] - 1e-6, "objective decreased: {:?}", fwd.ll_trace);
    }
    let lambda = fwd.model.params.lambda;
    assert!((lambda - 4.0).abs() <= 1.0, "fitted lambda {lambda}");

    let links = decode(&data.corpus, &fwd.model, Direction::Forward);
    let report = evaluate(&links, &data.gold).unwrap();
    assert!(report.recall >= 0.95, "recovered {:.4} of generated links", report.recall);
}

#[test]
fn symmetrized_alignment_is_accurate() {
    let data = generate(&SyntheticConfig::default());
    let cfg = TrainConfig::default();
    let fwd = train(&data.corpus, Direction::Forward, &cfg).unwrap();
    let rev = train(&data.corpus, Direction::Reverse, &cfg).unwrap();
    let af = decode(&data.corpus, &fwd.model, Direction::Forward);
    let ar = decode(&data.corpus, &rev.model, Direction::Reverse);
    let d = dims(&data.corpus);
    let gdf = symmetrize_corpus(&af, &ar, Heuristic::GrowDiagFinal, &d).unwrap();
    let report = evaluate(&gdf, &data.gold).unwrap();
    assert!(report.aer < 0.05, "AER {}", report.aer);

    let union = symmetrize_corpus(&af, &ar, Heuristic::Union, &d).unwrap();
    assert!(evaluate(&union, &data.gold).unwrap().recall >= report.recall);
}

#[test]
fn lambda_search_off_keeps_initial_tension() {
    let data = generate(&SyntheticConfig { pairs: 50, ..SyntheticConfig::default() });
    let cfg = TrainConfig { lambda_search: false, initial_lambda: 2.5, ..TrainConfig::default() };
    let out = train(&data.corpus, Direction::Forward, &cfg).unwrap();
    assert_eq!(out.model.params.lambda, 2.5);
}
