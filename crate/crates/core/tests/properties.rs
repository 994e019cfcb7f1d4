mod common;

use std::path::Path;

use common::{tiny_instance, TinySpec};
use dwsched::bench::{read_schedule_str, write_schedule_string};
use dwsched::formulation::{build_default, decode_solution, encode_schedule, validate_assignment};
use dwsched::heuristics::{best_heuristic, HeuristicKind};
use dwsched::instgen::{
    example_instance, generate, read_instance_str, write_instance_string, GenParams,
    EXAMPLE_OPTIMAL_MAKESPAN,
};
use dwsched::schedule::{check_feasible, single_machine_baseline};
use dwsched::solver::{solve_bruteforce, solve_exact, BruteForceLimits, SolveOptions};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = GenParams> {
    (1usize..12, 0.0f64..=1.0, 1usize..4, 1usize..5, 1usize..3, 0i64..4).prop_map(
        |(task_count, edge_probability, layers, machines, channels, r_hi)| GenParams {
            task_count,
            edge_probability,
            layers,
            machines,
            channels,
            r_range: 0..=r_hi,
            ..GenParams::default()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instance_files_round_trip(p in params(), seed in any::<u64>()) {
        let inst = generate(&p, seed).unwrap();
        prop_assert_eq!(read_instance_str(&write_instance_string(&inst)).unwrap(), inst);
    }

    #[test]
    fn generated_graphs_go_up_the_layers(p in params(), seed in any::<u64>()) {
        let inst = generate(&p, seed).unwrap();
        prop_assert!(inst.graph.validate().ok());
        for e in inst.graph.edges() {
            prop_assert!(p.layer_of(e.u) != p.layer_of(e.v));
        }
    }

    #[test]
    fn heuristics_are_feasible_and_round_trip(p in params(), seed in any::<u64>()) {
        let inst = generate(&p, seed).unwrap();
        for k in HeuristicKind::ALL {
            let s = k.run(&inst, seed);
            let report = check_feasible(&inst, &s).unwrap();
            prop_assert!(report.feasible(), "{} {}", k.name(), report);
            prop_assert_eq!(&read_schedule_str(&inst, &write_schedule_string(&s)).unwrap(), &s);
        }
        prop_assert!(HeuristicKind::GList.run(&inst, seed).makespan <= single_machine_baseline(&inst));
    }

    #[test]
    fn exact_agrees_with_enumeration(seed in any::<u64>()) {
        let inst = tiny_instance(&TinySpec::oracle(), seed, None);
        let best = solve_bruteforce(&inst, &BruteForceLimits::default()).unwrap().makespan;
        let (s, _) = solve_exact(&inst, &SolveOptions::tabc(), &best_heuristic(&inst, seed)).unwrap();
        prop_assert!(check_feasible(&inst, &s).unwrap().feasible());
        prop_assert_eq!(s.makespan, best);
        for k in HeuristicKind::ALL {
            prop_assert!(best <= k.run(&inst, seed).makespan);
        }
    }

    #[test]
    fn schedules_encode_into_the_model(seed in any::<u64>()) {
        let inst = tiny_instance(&TinySpec::oracle(), seed, None);
        let t_max = single_machine_baseline(&inst);
        let model = build_default(&inst, t_max).unwrap();
        for k in HeuristicKind::ALL {
            let s = k.run(&inst, seed);
            if s.makespan > t_max {
                continue;
            }
            let a = encode_schedule(&model, &s).unwrap();
            prop_assert!(validate_assignment(&model, &a).unwrap().is_empty(), "{}", k.name());
            prop_assert_eq!(&decode_solution(&model, &a).unwrap(), &s);
        }
    }
}

#[test]
fn golden_generated_instance() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden_n10_seed2024.json");
    let golden = std::fs::read_to_string(path).unwrap();
    let inst = generate(&GenParams::default(), 2024).unwrap();
    assert_eq!(write_instance_string(&inst), golden);
}

#[test]
fn worked_example_has_six_tasks_and_eight_flows() {
    let inst = example_instance();
    assert_eq!(inst.graph.task_count(), 6);
    assert_eq!(inst.graph.edge_count(), 8);
    let best = solve_bruteforce(&inst, &BruteForceLimits::default()).unwrap();
    assert_eq!(best.makespan, EXAMPLE_OPTIMAL_MAKESPAN);
}
