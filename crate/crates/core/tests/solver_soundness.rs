mod common;

use std::sync::Mutex;

use common::{random_constraint, random_hybrid, rng, uniform_point, Kind};
use hybrid_sat::formulation::{Formulation, Objective};
use hybrid_sat::model::{sign_round, Constraint, ConstraintKind, Formula};
use hybrid_sat::optim::{OptimizerConfig, OptimizerKind};
use hybrid_sat::oracle::brute_force_optimum;
use hybrid_sat::solver::{epsilon_rounding_check, solve, solve_observed, violation_bound, SolveConfig, SolveStatus};
use hybrid_sat::{gen_random_kcnf, gen_random_kxor};
use rand::Rng;

fn quick(formulation: Formulation, kind: OptimizerKind, alpha: f64) -> SolveConfig {
    SolveConfig {
        formulation,
        alpha,
        optimizer: OptimizerConfig {
            step_size: 0.05,
            max_iters: 2000,
            ..OptimizerConfig::new(kind)
        },
        restarts: 4,
        ..SolveConfig::default()
    }
}

#[test]
fn sat_answers_always_verify() {
    let mut r = rng(20);
    let configs = [
        quick(Formulation::Square, OptimizerKind::Gd, 0.0),
        quick(Formulation::Abs, OptimizerKind::Adam, 0.3),
        quick(Formulation::Linear, OptimizerKind::Pgd, 0.0),
    ];
    let mut sat_answers = 0;
    for i in 0..90 {
        let n = r.gen_range(2..=10);
        let f = random_hybrid(n, r.gen_range(1..=2 * n), 4, &mut r);
        let (optimum, _) = brute_force_optimum(&f).unwrap();
        let res = solve(&f, &configs[i % 3]).unwrap();
        let b = res.assignment.as_ref().unwrap();
        assert_eq!(f.count_violations(b).unwrap(), res.violated);
        assert!(res.violated >= optimum);
        match res.status {
            SolveStatus::Sat => {
                assert_eq!(res.violated, 0);
                sat_answers += 1;
            }
            SolveStatus::Unknown => assert!(res.violated > 0),
        }
    }
    assert!(sat_answers > 30, "only {sat_answers} SAT answers");
}

#[test]
fn unsatisfiable_pair_reports_one_violation() {
    let f = Formula::new(
        1,
        vec![
            Constraint::from_dimacs(ConstraintKind::Xor, &[1]).unwrap(),
            Constraint::from_dimacs(ConstraintKind::Xor, &[-1]).unwrap(),
        ],
    )
    .unwrap();
    assert_eq!(brute_force_optimum(&f).unwrap().0, 1);
    let res = solve(&f, &quick(Formulation::Square, OptimizerKind::Adam, 0.0)).unwrap();
    assert_eq!((res.status, res.violated), (SolveStatus::Unknown, 1));
}

#[test]
fn easy_random_3cnf_is_solved() {
    let cfg = SolveConfig {
        optimizer: OptimizerConfig::new(OptimizerKind::Adam),
        ..SolveConfig::default()
    };
    for seed in 0..20 {
        let f = gen_random_kcnf(50, 50, 3, seed).unwrap();
        let res = solve(&f, &cfg).unwrap();
        assert!(res.is_sat(), "seed {seed}: {} violated", res.violated);
    }
}

#[test]
fn results_do_not_depend_on_scheduling() {
    let mut r = rng(21);
    for _ in 0..10 {
        let f = random_hybrid(12, 30, 4, &mut r);
        let mut cfg = quick(Formulation::Square, OptimizerKind::Gd, 0.2);
        cfg.restarts = 6;
        let par = solve(&f, &cfg).unwrap();
        cfg.parallel = false;
        let seq = solve(&f, &cfg).unwrap();
        assert_eq!(par, seq);
        assert_eq!(seq, solve(&f, &cfg).unwrap());
    }
}

#[test]
fn different_seeds_start_differently() {
    let f = gen_random_kcnf(30, 150, 3, 0).unwrap();
    let mut cfg = quick(Formulation::Square, OptimizerKind::Gd, 0.0);
    cfg.optimizer.max_iters = 200;
    let a = solve(&f, &cfg).unwrap();
    cfg.seed = 1;
    let b = solve(&f, &cfg).unwrap();
    assert_ne!(a.final_objective, b.final_objective);
}

fn pure_formula(kind: Kind, seed: u64) -> Formula {
    let mut r = rng(seed);
    match kind {
        Kind::Or => gen_random_kcnf(20, 80, 3, seed).unwrap(),
        Kind::Xor => gen_random_kxor(20, 30, r.gen_range(2..=3), seed).unwrap(),
        Kind::Nae => {
            let cs = (0..40).map(|_| random_constraint(Kind::Nae, 3, 20, &mut r)).collect();
            Formula::new(20, cs).unwrap()
        }
        Kind::Card => unreachable!(),
    }
}

#[test]
fn rounded_iterates_respect_the_square_bound() {
    for (i, kind) in [Kind::Or, Kind::Xor, Kind::Nae].into_iter().enumerate() {
        for seed in 0..4 {
            let f = pure_formula(kind, seed);
            let w_obj = Objective::new(&f, Formulation::Square, 0.0).unwrap();
            let mut cfg = quick(Formulation::Square, OptimizerKind::Gd, 0.0);
            cfg.check_interval = 5;
            cfg.seed = seed + 10 * i as u64;
            let checked = Mutex::new(0usize);
            solve_observed(&f, &cfg, &|_, x: &[f64]| {
                let w = w_obj.value(x).unwrap().value;
                let bound = violation_bound(&f, w).unwrap();
                let v = f.count_violations(&sign_round(x)).unwrap() as u64;
                assert!(v <= bound, "{kind:?}: {v} violations above bound {bound} (W = {w})");
                *checked.lock().unwrap() += 1;
            })
            .unwrap();
            assert!(*checked.lock().unwrap() > 0);
        }
    }
}

#[test]
fn small_expansion_values_round_to_satisfying_points() {
    let mut r = rng(22);
    for kind in [Kind::Or, Kind::Xor, Kind::Nae] {
        for k in 2..=8 {
            for _ in 0..500 {
                let c = random_constraint(kind, k, k, &mut r);
                let x = uniform_point(k, -3.0, 3.0, &mut r);
                if epsilon_rounding_check(&c, &x).unwrap() {
                    assert!(c.is_satisfied(&sign_round(&x)).unwrap(), "{c:?} at {x:?}");
                }
            }
        }
    }
}

#[test]
fn timeout_yields_unknown_with_best_so_far() {
    let f = gen_random_kcnf(200, 900, 3, 3).unwrap();
    let cfg = SolveConfig {
        timeout: Some(std::time::Duration::from_millis(50)),
        parallel: false,
        ..SolveConfig::default()
    };
    let res = solve(&f, &cfg).unwrap();
    assert_eq!(res.status, SolveStatus::Unknown);
    let b = res.assignment.unwrap();
    assert_eq!(f.count_violations(&b).unwrap(), res.violated);
}

#[test]
fn linear_without_pgd_is_rejected() {
    let f = gen_random_kcnf(5, 5, 3, 0).unwrap();
    let cfg = quick(Formulation::Linear, OptimizerKind::Adam, 0.0);
    assert!(solve(&f, &cfg).is_err());
}
