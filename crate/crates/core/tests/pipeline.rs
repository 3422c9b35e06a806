use blade_core::bpmn::{build_profile, parse_bpmn, DEFAULT_ONCHAIN_MARKER};
use blade_core::kb::fixture_knowledge_base;
use blade_core::mcdm::evaluate;
use blade_core::perfsim::ChainParams;
use blade_core::pipeline::apply_process_profile;
use blade_core::requirements::{parse_requirements, validate_against};
use blade_core::stubgen::generate_stubs;

const REQS: &str = include_str!("../fixtures/sample-requirements.toml");
const BPMN: &str = include_str!("../fixtures/sample-process.bpmn");

#[test]
fn sample_requirements_are_valid() {
    let kb = fixture_knowledge_base();
    let reqs = parse_requirements(REQS).unwrap();
    assert!(validate_against(&reqs, &kb).is_empty());
    let r = evaluate(&kb, &reqs).unwrap();
    assert!(r.ranked.len() <= 5 && !r.ranked.is_empty());
    assert!(r.eliminations.iter().any(|e| e.alternative == "bitcoin"));
    assert!(r.ranked.iter().all(|a| (0.0..=1.0).contains(&a.score)));
    assert!(r.ranked.windows(2).all(|w| w[0].score >= w[1].score));
}

#[test]
fn process_feeds_evaluation_and_stubs() {
    let kb = fixture_knowledge_base();
    let mut reqs = parse_requirements(REQS).unwrap();
    let parsed = parse_bpmn(BPMN).unwrap();
    let profile = build_profile(&parsed.model, 10.0, DEFAULT_ONCHAIN_MARKER).unwrap();
    let warnings = apply_process_profile(&mut reqs, &profile);
    assert_eq!(warnings.len(), 1, "{warnings:?}");
    assert!(warnings[0].contains("latency-s"));
    assert_eq!(reqs.preference("latency-s").unwrap().weight, 0.5);
    assert!(reqs.preference("interoperability").is_some());

    let ranking = evaluate(&kb, &reqs).unwrap();
    let winner = kb.profile(&ranking.winner().unwrap().id).unwrap();
    let stub = generate_stubs(&parsed.model, &profile, winner, &ranking, &ChainParams::default()).unwrap();
    assert_eq!(stub.descriptor.contract.functions.len(), 4);
    assert_eq!(stub.descriptor.services.len(), 3);
    println!("{}", blade_core::json::to_pretty(&ranking));
}
