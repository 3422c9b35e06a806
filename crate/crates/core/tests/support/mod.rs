//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls into the code under test for the quantity being
//! checked; the library is only used to build inputs.

#![allow(dead_code)]

use std::collections::BTreeSet;

use blade_core::bpmn::{Edge, Node, NodeKind, ProcessModel};
use blade_core::kb::{AttributeValue, BlockchainProfile, CriterionDef, CriterionKind, Interval, KnowledgeBase};
use blade_core::requirements::{Operator, StrictRequirement, Threshold};
use rand::{Rng, RngExt};

/// Textbook TOPSIS written out long-hand with explicit loops.
///
/// `benefit[j]` is true for criteria to maximize. Weights are used as given.
pub fn brute_topsis(values: &[Vec<f64>], weights: &[f64], benefit: &[bool]) -> Vec<f64> {
    let m = values.len();
    let n = weights.len();
    let mut v = vec![vec![0.0f64; n]; m];
    for j in 0..n {
        let mut sq = 0.0;
        for row in values {
            sq += row[j] * row[j];
        }
        let denom = sq.sqrt();
        for i in 0..m {
            v[i][j] = if denom == 0.0 { 0.0 } else { weights[j] * values[i][j] / denom };
        }
    }
    let mut best = vec![0.0; n];
    let mut worst = vec![0.0; n];
    for j in 0..n {
        let mut col: Vec<f64> = (0..m).map(|i| v[i][j]).collect();
        col.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (lo, hi) = (col[0], col[m - 1]);
        if benefit[j] {
            best[j] = hi;
            worst[j] = lo;
        } else {
            best[j] = lo;
            worst[j] = hi;
        }
    }
    (0..m)
        .map(|i| {
            let mut d_best = 0.0;
            let mut d_worst = 0.0;
            for j in 0..n {
                d_best += (v[i][j] - best[j]).powi(2);
                d_worst += (v[i][j] - worst[j]).powi(2);
            }
            let (s_plus, s_minus) = (d_best.sqrt(), d_worst.sqrt());
            if s_plus + s_minus == 0.0 {
                1.0
            } else {
                s_minus / (s_plus + s_minus)
            }
        })
        .collect()
}

/// A random decision problem in the acceptance ranges.
#[derive(Debug, Clone)]
pub struct RandomProblem {
    pub values: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub benefit: Vec<bool>,
}

/// 2-6 alternatives, 2-5 criteria, cells uniform in (0, 10], positive
/// weights normalized to sum 1.
pub fn random_problem(rng: &mut impl Rng) -> RandomProblem {
    let m = rng.random_range(2..=6);
    let n = rng.random_range(2..=5);
    let values = (0..m)
        .map(|_| (0..n).map(|_| 10.0 - rng.random_range(0.0..10.0)).collect())
        .collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    RandomProblem {
        values,
        weights: raw.iter().map(|w| w / total).collect(),
        benefit: (0..n).map(|_| rng.random_bool(0.5)).collect(),
    }
}

/// Expected visits by enumerating every start-to-node path and summing the
/// product of branch probabilities along it. Exclusive gateway edges must
/// carry explicit probabilities; other edges count 1.
pub fn path_visits(model: &ProcessModel, target: &str) -> f64 {
    fn walk(model: &ProcessModel, at: &str, target: &str, weight: f64) -> f64 {
        let mut total = if at == target { weight } else { 0.0 };
        let exclusive = model.node(at).unwrap().kind == NodeKind::ExclusiveGateway;
        for e in model.edges().iter().filter(|e| e.from == at) {
            let p = if exclusive { e.probability.expect("annotated branch") } else { 1.0 };
            total += walk(model, &e.to, target, weight * p);
        }
        total
    }
    walk(model, &model.start().id, target, 1.0)
}

/// Random acyclic model with up to `max_nodes` nodes: node 0 is the start,
/// the last node the end, edges only point forward. Exclusive gateways carry
/// explicit branch probabilities. Parallel gateways are only generated as
/// splits; one that would receive several edges becomes exclusive.
pub fn random_dag(rng: &mut impl Rng, max_nodes: usize) -> ProcessModel {
    let n = rng.random_range(3..=max_nodes);
    let mut kinds = vec![NodeKind::Start];
    for _ in 1..n - 1 {
        kinds.push(match rng.random_range(0..3) {
            0 => NodeKind::Task,
            1 => NodeKind::ExclusiveGateway,
            _ => NodeKind::ParallelGateway,
        });
    }
    kinds.push(NodeKind::End);

    let mut targets: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n - 1 {
        let fan = match kinds[i] {
            NodeKind::ExclusiveGateway | NodeKind::ParallelGateway => rng.random_range(1..=3.min(n - 1 - i)),
            _ => 1,
        };
        let mut chosen = BTreeSet::new();
        while chosen.len() < fan {
            chosen.insert(rng.random_range(i + 1..n));
        }
        targets[i] = chosen.into_iter().collect();
    }
    let mut indegree = vec![0; n];
    for t in targets.iter().flatten() {
        indegree[*t] += 1;
    }
    for i in 0..n {
        if kinds[i] == NodeKind::ParallelGateway && indegree[i] > 1 {
            kinds[i] = NodeKind::ExclusiveGateway;
        }
    }

    let id = |i: usize| format!("n{i}");
    let nodes = (0..n).map(|i| Node::new(id(i), kinds[i], id(i))).collect();
    let mut edges = Vec::new();
    for (i, outs) in targets.iter().enumerate() {
        if kinds[i] == NodeKind::ExclusiveGateway {
            let raw: Vec<f64> = outs.iter().map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = raw.iter().sum();
            for (t, r) in outs.iter().zip(&raw) {
                edges.push(Edge::new(id(i), id(*t)).with_probability(r / total));
            }
        } else {
            edges.extend(outs.iter().map(|t| Edge::new(id(i), id(*t))));
        }
    }
    ProcessModel::new("random", nodes, edges).expect("generated model is valid")
}

/// Whether `observed` satisfies `req` when every point of an interval must
/// meet the bound. Inapplicable combinations and absent values fail.
pub fn oracle_satisfies(def: &CriterionDef, observed: Option<&AttributeValue>, req: &StrictRequirement) -> bool {
    let Some(value) = observed else { return false };
    let rank = |label: &str| {
        def.ordinal_levels
            .as_ref()
            .and_then(|levels| levels.iter().position(|l| l == label))
    };
    let want_labels = || -> Option<BTreeSet<String>> {
        match &req.threshold {
            Threshold::Label(l) => Some(BTreeSet::from([l.clone()])),
            Threshold::Labels(ls) => Some(ls.clone()),
            _ => None,
        }
    };
    match (def.kind, value) {
        (CriterionKind::Boolean, AttributeValue::Flag(b)) => {
            req.operator == Operator::Equals && req.threshold == Threshold::Flag(*b)
        }
        (CriterionKind::NumericInterval, AttributeValue::Interval(i)) => {
            let Threshold::Number(t) = req.threshold else { return false };
            let samples = (0..=16).map(|k| i.lo + (i.hi - i.lo) * k as f64 / 16.0);
            let mut points: Vec<f64> = samples.collect();
            points.push(i.hi);
            match req.operator {
                Operator::AtLeast => points.iter().all(|x| *x >= t),
                Operator::AtMost => points.iter().all(|x| *x <= t),
                _ => false,
            }
        }
        (CriterionKind::Ordinal, AttributeValue::Level(have)) => {
            let Threshold::Label(want) = &req.threshold else { return false };
            match (rank(have), rank(want), req.operator) {
                (Some(h), Some(w), Operator::Equals) => h == w,
                (Some(h), Some(w), Operator::AtLeast) => h >= w,
                (Some(h), Some(w), Operator::AtMost) => h <= w,
                _ => false,
            }
        }
        (CriterionKind::Categorical, AttributeValue::Set(have)) => match (req.operator, want_labels()) {
            (Operator::Equals, Some(want)) => have.len() == want.len() && want.iter().all(|w| have.contains(w)),
            (Operator::IncludesAll, Some(want)) => want.iter().all(|w| have.contains(w)),
            _ => false,
        },
        _ => false,
    }
}

fn criterion(id: &str, kind: CriterionKind, levels: Option<&[&str]>) -> CriterionDef {
    serde_json::from_value(serde_json::json!({
        "id": id,
        "name": id,
        "category": "performance-efficiency",
        "direction": "benefit",
        "kind": kind,
        "unit": (kind == CriterionKind::NumericInterval).then_some("u"),
        "ordinal_levels": levels,
    }))
    .unwrap()
}

fn set(labels: &[&str]) -> BTreeSet<String> {
    labels.iter().map(|s| s.to_string()).collect()
}

/// Filter test knowledge base: one profile per value of each kind, plus one with every attribute absent.
pub fn grid_kb() -> KnowledgeBase {
    let levels = ["low", "mid", "high"];
    let criteria = vec![
        criterion("flag", CriterionKind::Boolean, None),
        criterion("range", CriterionKind::NumericInterval, None),
        criterion("grade", CriterionKind::Ordinal, Some(&levels)),
        criterion("tags", CriterionKind::Categorical, None),
    ];
    let flags = [true, false];
    let ranges = [Interval::new(0.0, 10.0), Interval::point(5.0), Interval::new(4.0, 6.0), Interval::new(7.5, 20.0)];
    let grades = ["low", "mid", "high"];
    let tag_sets = [set(&["a"]), set(&["a", "b"]), set(&["b", "c"]), set(&[])];

    let mut profiles = Vec::new();
    for i in 0..4 {
        let mut attributes = std::collections::BTreeMap::new();
        attributes.insert("flag".to_owned(), AttributeValue::Flag(flags[i % 2]));
        attributes.insert("range".to_owned(), AttributeValue::Interval(ranges[i]));
        attributes.insert("grade".to_owned(), AttributeValue::Level(grades[i % 3].to_owned()));
        attributes.insert("tags".to_owned(), AttributeValue::Set(tag_sets[i].clone()));
        profiles.push(BlockchainProfile {
            id: format!("p{i}"),
            name: format!("P{i}"),
            attributes,
            tech_tags: BTreeSet::new(),
            sources: vec![],
        });
    }
    profiles.push(BlockchainProfile {
        id: "bare".into(),
        name: "Bare".into(),
        attributes: Default::default(),
        tech_tags: BTreeSet::new(),
        sources: vec![],
    });
    KnowledgeBase::new(1, 1, criteria, profiles).unwrap()
}

pub fn grid_thresholds() -> Vec<Threshold> {
    let mut out = vec![Threshold::Flag(true), Threshold::Flag(false)];
    out.extend([-1.0, 0.0, 4.0, 5.0, 6.0, 7.5, 10.0, 20.0, 25.0].map(Threshold::Number));
    out.extend(["low", "mid", "high", "a", "b", "zzz"].map(|l| Threshold::Label(l.to_owned())));
    out.extend([set(&["a", "b"]), set(&["b"]), set(&[])].map(Threshold::Labels));
    out
}
