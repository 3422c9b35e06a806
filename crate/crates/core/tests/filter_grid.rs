mod support;

use blade_core::mcdm::filter_alternatives;
use blade_core::requirements::{Operator, StrictRequirement, Threshold};
use support::{grid_kb, grid_thresholds as thresholds, oracle_satisfies};

#[test]
fn filter_matches_oracle_on_full_grid() {
    let kb = grid_kb();
    let mut checked = 0;
    for c in kb.criteria() {
        for op in Operator::ALL {
            for t in thresholds() {
                let req = StrictRequirement::new(c.id.clone(), op, t.clone());
                let out = filter_alternatives(&kb, std::slice::from_ref(&req));
                for p in kb.profiles() {
                    let survived = out.survivors.iter().any(|s| s.id == p.id);
                    let eliminated = out.eliminations.iter().any(|e| e.alternative == p.id);
                    assert_ne!(survived, eliminated);
                    let want = oracle_satisfies(c, p.attribute(&c.id), &req);
                    assert_eq!(survived, want, "{} on {} ({:?})", req, p.id, p.attribute(&c.id));
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 4 * 4 * thresholds().len() * 5);
}

#[test]
fn conjunction_is_intersection() {
    let kb = grid_kb();
    let reqs = vec![
        StrictRequirement::new("flag", Operator::Equals, Threshold::Flag(true)),
        StrictRequirement::new("range", Operator::AtLeast, Threshold::Number(4.0)),
    ];
    let out = filter_alternatives(&kb, &reqs);
    let expected: Vec<&str> = kb
        .profiles()
        .iter()
        .filter(|p| reqs.iter().all(|r| oracle_satisfies(kb.criterion(&r.criterion).unwrap(), p.attribute(&r.criterion), r)))
        .map(|p| p.id.as_str())
        .collect();
    let got: Vec<&str> = out.survivors.iter().map(|p| p.id.as_str()).collect();
    assert_eq!(got, expected);
}
