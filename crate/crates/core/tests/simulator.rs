use confdesign::fitness::sim::engine::{System, Vec3};
use confdesign::fitness::sim::suspension::assemble;
use confdesign::fitness::{Evaluator, FitnessConfig, SuspensionEvaluator, SuspensionParams};
use confdesign::model::{active_component_count, is_feasible, ProblemFile, ProblemSpec, Solution};
use confdesign::repair::Repairer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn suspension() -> (ProblemSpec, SuspensionParams) {
    let pf = ProblemFile::load(concat!(env!("CARGO_MANIFEST_DIR"), "/../../problems/suspension.json")).unwrap();
    let spec = pf.problem.as_assembly().unwrap().clone();
    let FitnessConfig::Suspension(params) = pf.fitness else { panic!("suspension fitness expected") };
    (spec, *params)
}

/// Four beams from the chassis straight to the wheel mounts.
fn four_beams(spec: &ProblemSpec) -> Solution {
    spec.solution_from(&[(0, 1), (1, 1), (2, 1), (3, 1), (4, 1), (5, 1)], &[(0, 4, 1), (2, 4, 1), (1, 5, 1), (3, 5, 1)])
}

/// A triangulated design with free joints, welds and a shock absorber.
fn braced(spec: &ProblemSpec) -> Solution {
    spec.solution_from(
        &[(0, 1), (1, 2), (2, 1), (3, 1), (4, 1), (5, 2), (6, 1), (7, 1)],
        &[(0, 6, 1), (2, 6, 1), (6, 4, 1), (3, 7, 1), (7, 5, 1), (2, 7, 1), (1, 5, 2)],
    )
}

#[test]
fn shipped_problem_file_matches_reference_parameters() {
    let (spec, params) = suspension();
    assert_eq!(params, SuspensionParams::reference());
    assert_eq!(spec.n_variables(), 29);
}

#[test]
fn reference_designs_are_feasible() {
    let (spec, _) = suspension();
    assert_eq!(is_feasible(&spec, &four_beams(&spec)), vec![]);
    assert_eq!(is_feasible(&spec, &braced(&spec)), vec![]);
}

#[test]
fn zero_excitation_leaves_only_the_count_term() {
    let (spec, params) = suspension();
    let quiet = params.clone().with_zero_excitation();
    let ev = SuspensionEvaluator::new(spec.clone(), quiet.clone()).unwrap();
    assert_eq!(ev.evaluate(&four_beams(&spec)).unwrap(), 400.0);

    let mut no_count = quiet;
    no_count.weights.w2 = 0.0;
    let ev0 = SuspensionEvaluator::new(spec.clone(), no_count).unwrap();
    assert_eq!(ev0.evaluate(&four_beams(&spec)).unwrap(), 0.0);
    assert_eq!(ev0.evaluate(&braced(&spec)).unwrap(), 0.0);
}

#[test]
fn random_feasible_four_component_designs_score_400_at_rest() {
    let (spec, params) = suspension();
    let ev = SuspensionEvaluator::new(spec.clone(), params.with_zero_excitation()).unwrap();
    let repairer = Repairer::new(&spec);
    let comps: Vec<usize> = spec.index().components().map(|(f, _, _)| f).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..3000 {
        let mut s = spec.zero_solution();
        for j in 0..spec.n_joints() {
            s.values_mut()[j] = rng.gen_range(0..3);
        }
        for _ in 0..4 {
            let f = comps[rng.gen_range(0..comps.len())];
            s.values_mut()[f] = rng.gen_range(1..3);
        }
        let r = repairer.repair(&s, rng.gen()).unwrap().repaired;
        if active_component_count(&spec, &r) != 4 {
            continue;
        }
        assert_eq!(is_feasible(&spec, &r), vec![]);
        assert_eq!(ev.evaluate(&r).unwrap(), 400.0, "{:?}", r.values());
        checked += 1;
        if checked == 8 {
            break;
        }
    }
    assert!(checked >= 3, "only {checked} four-component designs found");
}

#[test]
fn each_extra_component_costs_w2() {
    let (spec, params) = suspension();
    let ev = SuspensionEvaluator::new(spec.clone(), params.with_zero_excitation()).unwrap();
    let base = four_beams(&spec);
    let mut extra = base.clone();
    let f = spec.index().component(0, 5).unwrap();
    extra.values_mut()[f] = 1;
    assert_eq!(is_feasible(&spec, &extra), vec![]);
    assert_eq!(ev.evaluate(&extra).unwrap() - ev.evaluate(&base).unwrap(), 100.0);
}

#[test]
fn evaluation_is_deterministic_and_finite() {
    let (spec, params) = suspension();
    let ev = SuspensionEvaluator::new(spec.clone(), params).unwrap();
    for s in [four_beams(&spec), braced(&spec)] {
        let a = ev.evaluate(&s).unwrap();
        let b = ev.evaluate(&s).unwrap();
        assert!(a.is_finite() && a > 0.0);
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn undamped_suspension_conserves_energy() {
    let (spec, params) = suspension();
    let mut asm = assemble(&spec, &braced(&spec), &params.with_zero_excitation());
    asm.system.set_damping_scale(0.0);
    asm.system.set_body_velocity(asm.chassis, Vec3::new(0.0, 0.0, 0.2), Vec3::new(0.05, 0.02, 0.0));
    let e0 = asm.system.energy();
    assert!(e0 > 0.0);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        asm.system.advance(1e-4);
        worst = worst.max((asm.system.energy() - e0).abs() / e0);
    }
    assert!(worst < 0.01, "relative energy drift {worst}");
}

#[test]
fn undamped_oscillator_conserves_energy() {
    let mut sys = System::new();
    let anchor = sys.add_fixed_point(Vec3::zeros());
    let p = sys.add_free_point(Vec3::new(0.0, 0.0, 0.5), 250.0);
    sys.add_spring(anchor, p, 75_000.0, 0.0);
    sys.set_point_velocity(p, Vec3::new(0.0, 0.0, 0.3));
    let e0 = sys.energy();
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        sys.advance(1e-4);
        worst = worst.max((sys.energy() - e0).abs() / e0);
    }
    assert!(worst < 0.01, "relative energy drift {worst}");
}
