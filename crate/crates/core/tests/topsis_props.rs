mod support;

use blade_core::kb::Direction;
use blade_core::mcdm::{topsis, DecisionMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{brute_topsis, random_problem, RandomProblem};

fn matrix(p: &RandomProblem) -> DecisionMatrix<f64> {
    let m = p.values.len();
    let n = p.weights.len();
    DecisionMatrix::new(
        (0..m).map(|i| format!("a{i}")).collect(),
        (0..n).map(|j| format!("c{j}")).collect(),
        p.values.clone(),
        p.benefit.iter().map(|b| if *b { Direction::Benefit } else { Direction::Cost }).collect(),
        p.weights.clone(),
    )
    .unwrap()
}

fn problem() -> impl Strategy<Value = RandomProblem> {
    any::<u64>().prop_map(|seed| random_problem(&mut ChaCha8Rng::seed_from_u64(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn matches_brute_force(p in problem()) {
        let got = topsis(&matrix(&p));
        let want = brute_topsis(&p.values, &p.weights, &p.benefit);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-9, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn closeness_in_unit_interval(p in problem()) {
        for c in topsis(&matrix(&p)) {
            prop_assert!((0.0..=1.0).contains(&c));
        }
    }

    #[test]
    fn dominance_is_preserved(p in problem(), pick in any::<prop::sample::Index>(), bump in 0.001f64..5.0) {
        // make row 0 dominate row k by copying and improving one criterion
        let mut p = p;
        let k = 1 + pick.index(p.values.len() - 1);
        let j = pick.index(p.weights.len());
        p.values[0] = p.values[k].clone();
        p.values[0][j] = if p.benefit[j] { p.values[k][j] + bump } else { (p.values[k][j] - bump).max(0.0) };
        let c = topsis(&matrix(&p));
        prop_assert!(c[0] >= c[k], "{c:?}");
    }

    #[test]
    fn column_scale_invariant(p in problem(), col in any::<prop::sample::Index>(), factor in 0.01f64..100.0) {
        let before = topsis(&matrix(&p));
        let mut scaled = p.clone();
        let j = col.index(p.weights.len());
        for row in &mut scaled.values {
            row[j] *= factor;
        }
        let after = topsis(&matrix(&scaled));
        for (a, b) in before.iter().zip(&after) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn weight_scale_invariant(p in problem(), factor in 0.01f64..100.0) {
        let ids = |n: usize, prefix: &str| (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
        let dirs: Vec<Direction> = p.benefit.iter().map(|b| if *b { Direction::Benefit } else { Direction::Cost }).collect();
        let raw: Vec<f64> = p.weights.iter().map(|w| w * factor).collect();
        let rescaled = DecisionMatrix::from_likert(
            ids(p.values.len(), "a"), ids(p.weights.len(), "c"), p.values.clone(), dirs, &raw,
        ).unwrap();
        for (a, b) in topsis(&matrix(&p)).iter().zip(topsis(&rescaled).iter()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn single_precision_tracks_double(p in problem()) {
        let m = matrix(&p);
        let single = DecisionMatrix::<f32>::new(
            m.alternatives().to_vec(),
            m.criteria().to_vec(),
            p.values.iter().map(|r| r.iter().map(|v| *v as f32).collect()).collect(),
            m.directions().to_vec(),
            p.weights.iter().map(|w| *w as f32).collect(),
        ).unwrap();
        for (d, s) in topsis(&m).iter().zip(topsis(&single)) {
            prop_assert!((d - f64::from(s)).abs() <= 1e-4);
        }
    }
}

#[test]
fn worked_examples() {
    let one = DecisionMatrix::<f64>::new(
        vec!["a".into(), "b".into(), "c".into()],
        vec!["x".into()],
        vec![vec![1.0], vec![2.0], vec![3.0]],
        vec![Direction::Benefit],
        vec![1.0],
    )
    .unwrap();
    let c = topsis(&one);
    for (got, want) in c.iter().zip([0.0, 0.5, 1.0]) {
        assert!((got - want).abs() <= 1e-9, "{c:?}");
    }

    let two = DecisionMatrix::<f64>::new(
        vec!["a".into(), "b".into()],
        vec!["x".into(), "y".into()],
        vec![vec![4.0, 3.0], vec![3.0, 4.0]],
        vec![Direction::Benefit, Direction::Cost],
        vec![0.5, 0.5],
    )
    .unwrap();
    let c = topsis(&two);
    assert!((c[0] - 1.0).abs() <= 1e-9 && c[1].abs() <= 1e-9, "{c:?}");
}
