use std::path::PathBuf;

use nalgebra::DVector;
use proptest::prelude::*;

use incro::analysis::{NormKind, VerdictConfig};
use incro::experiment::{ExperimentConfig, OrderSpec, ProblemSpec, X0Spec};
use incro::problem::make_example;
use incro::solvers::{run_ig, Method, StepsizeSchedule};
use incro::ExampleSpec;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), -10.0f64..10.0]
}

fn problem_spec() -> impl Strategy<Value = ProblemSpec> {
    prop_oneof![
        Just(ProblemSpec::Example(ExampleSpec::SlowConv)),
        Just(ProblemSpec::Example(ExampleSpec::Octet)),
        (1e-3f64..1e3).prop_map(|l| ProblemSpec::Example(ExampleSpec::LowerPair { l })),
        (1usize..6, 1usize..6, any::<u64>()).prop_map(|(n, m, seed)| ProblemSpec::Example(ExampleSpec::SharedMin { n, m, seed })),
        (1usize..6, 1usize..6, 0.01f64..2.0, 2.0f64..50.0, any::<u64>())
            .prop_map(|(n, m, c, l, seed)| ProblemSpec::Example(ExampleSpec::Random { n, m, c, l, seed })),
        "[a-z][a-z0-9_/.]{0,20}".prop_map(|p| ProblemSpec::File(PathBuf::from(p))),
    ]
}

fn config() -> impl Strategy<Value = ExperimentConfig> {
    (
        problem_spec(),
        prop_oneof![Just(Method::Ig), Just(Method::In)],
        (1e-6f64..1e3, prop_oneof![Just(0.0), Just(1.0), 0.0f64..=1.0]),
        prop_oneof![
            Just(X0Spec::Ones),
            any::<u64>().prop_map(|seed| X0Spec::Random { seed }),
            prop::collection::vec(finite(), 1..5).prop_map(X0Spec::Explicit),
        ],
        1u64..10_000_000,
        prop_oneof![
            Just(OrderSpec::Identity),
            (0usize..8).prop_map(OrderSpec::Rotate),
            Just(Vec::from_iter(0..5usize)).prop_shuffle().prop_map(OrderSpec::Explicit),
        ],
        (0.01f64..=1.0, 1.0f64..3.0, 1.0f64..3.0, any::<bool>()),
        any::<bool>(),
    )
        .prop_map(|(problem, method, (r, s), x0, cycles, order, (tail, ig, inn, star), outputs)| {
            let mut cfg = ExperimentConfig::new(problem, method, StepsizeSchedule::new(r, s).unwrap(), x0, cycles);
            cfg.order = order;
            cfg.analysis = VerdictConfig {
                tail_fraction: tail,
                tol_ig: ig,
                tol_in: inn,
                norm: if star { NormKind::Star } else { NormKind::Euclid },
            };
            if outputs {
                cfg.trace_path = Some(PathBuf::from("out/trace.csv"));
                cfg.report_path = Some(PathBuf::from("out/report.jsonl"));
            }
            cfg
        })
}

proptest! {
    #[test]
    fn config_text_round_trips_exactly(cfg in config()) {
        let text = cfg.to_text();
        let back = ExperimentConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_text(), text);
    }

    #[test]
    fn gradient_error_within_step_times_m_tilde(seed in any::<u64>(), n in 1usize..5, m in 2usize..5, frac in 0.1f64..1.0) {
        let l = 10.0;
        let c = if n == 1 { l } else { 1.0 };
        let prob = make_example(&ExampleSpec::Random { n, m, c, l, seed });
        prop_assume!(prob.is_ok());
        let prob = prob.unwrap();
        let sched = StepsizeSchedule::new(frac / prob.l_sum().unwrap(), 1.0).unwrap();
        let order: Vec<usize> = (0..m).collect();
        let tr = run_ig(&prob, &sched, &DVector::from_element(n, 1.0), 300, &order, false).unwrap();
        let m_tilde = prob.m_tilde(tr.max_grad_norm()).unwrap();
        for (e, a) in tr.grad_error_norms().iter().zip(tr.alphas()) {
            prop_assert!(*e <= a * m_tilde);
        }
    }
}
