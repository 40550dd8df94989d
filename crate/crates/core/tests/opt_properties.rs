use agewise_core::aoi::{analyze, Objective, Policy, ServerSpec};
use agewise_core::opt::{
    best_under, enumerate_thresholds, optimize, sweep, threshold_count, Engine, PolicyFamily,
    SearchSpec, SubsetOrder,
};
use agewise_core::Dph;
use proptest::prelude::*;

fn server(name: &str, d: Dph, cost: f64) -> ServerSpec {
    ServerSpec::new(name, d, cost).unwrap()
}

fn table_one() -> Vec<ServerSpec> {
    vec![
        server(
            "M1",
            Dph::mixed_geometric(0.01, 0.05, 0.5, 0.5).unwrap(),
            10.0,
        ),
        server("G", Dph::geometric(1.0 / 30.0).unwrap(), 100.0),
        server("U", Dph::uniform(12, 18).unwrap(), 500.0),
    ]
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs() + 1e-13
}

fn assert_engine_matches(engine: &Engine, subset: &[usize], t: &[u32], rel: f64) {
    let pool = engine.pool();
    let policy = Policy::new(
        subset.iter().map(|&i| pool[i].clone()).collect(),
        t.to_vec(),
    )
    .unwrap();
    let sol = analyze(&policy).unwrap();
    let e = engine.evaluate(subset, t).unwrap();
    let label = policy.label();
    let c_a = sol.cost(engine.objective()).unwrap();
    assert!(close(e.c_a, c_a, rel), "{label}: C_A {} vs {c_a}", e.c_a);
    assert!(
        close(e.c_t, sol.transmission_cost(), rel),
        "{label}: C_T {} vs {}",
        e.c_t,
        sol.transmission_cost()
    );
    assert!(
        (e.p_wait - sol.p_wait()).abs() < 1e-10,
        "{label}: p_W {} vs {}",
        e.p_wait,
        sol.p_wait()
    );
    for (a, b) in e.kappa.iter().zip(sol.kappa()) {
        assert!((a - b).abs() < 1e-10, "{label}: kappa {a} vs {b}");
    }
    for (a, b) in e.frequencies.iter().zip(sol.frequencies()) {
        assert!((a - b).abs() < 1e-12, "{label}: f {a} vs {b}");
    }
}

#[test]
fn threshold_count_matches_direct_count() {
    // Independent count: choose t_1 <= t_2 freely, then the rest strictly above t_2.
    fn direct(j: usize, t: u64) -> u64 {
        fn increasing(k: usize, lo: u64, hi: u64) -> u64 {
            if k == 0 {
                return 1;
            }
            (lo..=hi).map(|x| increasing(k - 1, x + 1, hi)).sum()
        }
        if j == 1 {
            return t;
        }
        (1..=t).map(|t2| t2 * increasing(j - 2, t2 + 1, t)).sum()
    }
    assert_eq!(threshold_count(3, 200), u128::from(direct(3, 200)));
    assert_eq!(threshold_count(3, 200), 1_333_300);
    assert_eq!(
        enumerate_thresholds(3, 60).count() as u128,
        threshold_count(3, 60)
    );
    let all: Vec<Vec<u32>> = enumerate_thresholds(3, 20).collect();
    assert!(all.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn engine_matches_analysis_on_table_one() {
    let pool = table_one();
    let objectives = [
        Objective::Mean,
        Objective::Polynomial(vec![1.0, -0.5, 0.01]),
        Objective::Violation(40),
        Objective::Violation(3),
    ];
    for objective in &objectives {
        let engine = Engine::new(&pool, objective, 80).unwrap();
        for (subset, t) in [
            (vec![0], vec![1]),
            (vec![1], vec![17]),
            (vec![2], vec![30]),
            (vec![0, 1], vec![10, 20]),
            (vec![0, 1], vec![8, 8]),
            (vec![0, 2], vec![10, 20]),
            (vec![1, 2], vec![10, 20]),
            (vec![2, 1], vec![40, 41]),
            (vec![0, 1, 2], vec![5, 10, 20]),
            (vec![0, 1, 2], vec![1, 1, 80]),
        ] {
            assert_engine_matches(&engine, &subset, &t, 1e-9);
        }
    }
}

#[test]
fn optimizer_structure_on_small_grid() {
    let pool = table_one();
    let budgets: Vec<f64> = (0..=40).map(|k| 2.0 * k as f64).chain([1e9]).collect();
    let run = |max_servers| {
        optimize(&SearchSpec {
            pool: pool.clone(),
            max_servers,
            tau_max: 40,
            budgets: budgets.clone(),
            objective: Objective::Mean,
            order: SubsetOrder::MeanDescending,
        })
        .unwrap()
    };
    let results = [run(1), run(2), run(3)];
    for r in &results {
        let mut last = f64::INFINITY;
        for o in &r.outcomes {
            if let Some(best) = &o.best {
                assert!(best.c_t <= o.budget);
                assert!(best.c_a <= last);
                last = best.c_a;
            } else {
                assert!(last.is_infinite(), "infeasible after a feasible budget");
            }
        }
    }
    for w in results.windows(2) {
        for (a, b) in w[0].outcomes.iter().zip(&w[1].outcomes) {
            match (&a.best, &b.best) {
                (Some(x), Some(y)) => assert!(y.c_a <= x.c_a),
                (Some(_), None) => panic!("larger feasible set lost a solution"),
                _ => {}
            }
        }
    }
    // Zero budget is infeasible; an unlimited budget beats zero-wait on U.
    assert!(results[2].outcomes[0].best.is_none());
    let zw_u = analyze(&Policy::new(vec![pool[2].clone()], vec![1]).unwrap()).unwrap();
    assert!(
        results[2]
            .outcomes
            .last()
            .unwrap()
            .best
            .as_ref()
            .unwrap()
            .c_a
            <= zw_u.mean_aoi()
    );
    assert_eq!(results[2], run(3));
}

#[test]
fn optimizer_best_is_minimal_over_every_evaluated_candidate() {
    let pool = table_one();
    let engine = Engine::new(&pool, &Objective::Mean, 25).unwrap();
    let spec = SearchSpec {
        pool: pool.clone(),
        max_servers: 2,
        tau_max: 25,
        budgets: vec![5.0, 12.0, 30.0, 60.0],
        objective: Objective::Mean,
        order: SubsetOrder::MeanDescending,
    };
    let result = optimize(&spec).unwrap();
    for subset in spec.subsets() {
        for t in enumerate_thresholds(subset.len(), 25) {
            let e = engine.evaluate(&subset, &t).unwrap();
            for o in &result.outcomes {
                if e.c_t <= o.budget {
                    assert!(o.best.as_ref().unwrap().c_a <= e.c_a);
                }
            }
        }
    }
    let frontier = result.frontier_up_to(2);
    for o in &result.outcomes {
        assert_eq!(best_under(&frontier, o.budget), o.best.as_ref());
    }
}

#[test]
fn sweep_rows_follow_analysis() {
    let pool = table_one();
    let family =
        PolicyFamily::new(vec![pool[0].clone(), pool[1].clone()], vec![Some(8), None]).unwrap();
    let rows = sweep(&family, 200, &Objective::Mean);
    assert_eq!(rows.len(), 193);
    let c_t: Vec<f64> = rows
        .iter()
        .map(|r| r.outcome.as_ref().unwrap().c_t)
        .collect();
    assert!(c_t.windows(2).all(|w| w[1] <= w[0] + 1e-12));

    let single = PolicyFamily::new(vec![pool[1].clone()], vec![None]).unwrap();
    let row = &sweep(&single, 5, &Objective::Mean)[0];
    let zw = analyze(&Policy::new(vec![pool[1].clone()], vec![1]).unwrap()).unwrap();
    assert_eq!(row.outcome.as_ref().unwrap().c_a, zw.mean_aoi());

    // With t_2 far in M1's tail, G is essentially never used.
    let far = analyze(&Policy::new(vec![pool[0].clone(), pool[1].clone()], vec![8, 3000]).unwrap())
        .unwrap();
    let alone = analyze(&Policy::new(vec![pool[0].clone()], vec![8]).unwrap()).unwrap();
    assert!((far.mean_aoi() - alone.mean_aoi()).abs() < 1e-6 * alone.mean_aoi());
    assert!((far.transmission_cost() - alone.transmission_cost()).abs() < 1e-6);
}

fn small_dph() -> impl Strategy<Value = Dph> {
    prop_oneof![
        (0.05f64..0.95).prop_map(|p| Dph::geometric(p).unwrap()),
        (1u32..8, 0u32..6).prop_map(|(lo, w)| Dph::uniform(lo, lo + w).unwrap()),
        (0.02f64..0.3, 0.3f64..0.9, 0.1f64..0.9).prop_map(|(a, b, w)| Dph::mixed_geometric(
            a,
            b,
            w,
            1.0 - w
        )
        .unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn engine_matches_analysis_on_random_pools(
        a in small_dph(),
        b in small_dph(),
        c in small_dph(),
        t1 in 1u32..12,
        gaps in (0u32..10, 1u32..10),
        degree in 0usize..4,
        violation in 1u64..60,
    ) {
        let pool = vec![server("A", a, 3.0), server("B", b, 7.0), server("C", c, 11.0)];
        let t = vec![t1, t1 + gaps.0, t1 + gaps.0 + gaps.1];
        let coeffs: Vec<f64> = (0..=degree).map(|d| 1.0 / (d + 1) as f64).collect();
        for objective in [Objective::Mean, Objective::Polynomial(coeffs), Objective::Violation(violation)] {
            let engine = Engine::new(&pool, &objective, 40).unwrap();
            for subset in [vec![0, 1, 2], vec![2, 0, 1]] {
                let policy = Policy::new(subset.iter().map(|&i| pool[i].clone()).collect(), t.clone()).unwrap();
                match analyze(&policy) {
                    Ok(_) => assert_engine_matches(&engine, &subset, &t, 1e-8),
                    Err(e) => prop_assert!(engine.evaluate(&subset, &t).is_err(), "{e}"),
                }
            }
        }
    }
}
