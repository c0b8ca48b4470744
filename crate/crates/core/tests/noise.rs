use hdqf_core::hdc::{CodebookSet, FactorAssignment};
use hdqf_core::hdqf::grover_circuit;
use hdqf_core::noise::{density_matrix_reference, run_noisy, tv_distance, NoiseParams, NoisePlan};
use hdqf_core::qsim::Span;

fn plan(k: usize) -> NoisePlan {
    let books = CodebookSet::generate_distinct(5, 2, 2, 2).unwrap();
    let target = FactorAssignment(vec![1, 0]).bind_all(&books).unwrap();
    NoisePlan { circuit: grover_circuit(&books, &target, k).unwrap(), readout: Span::new(0, 4), rows: 2 }
}

#[test]
fn ideal_trajectories_reproduce_the_circuit() {
    let r = run_noisy(&plan(1), &NoiseParams::ideal(), 50, 10, 1, 20).unwrap();
    assert!(r.tv_error() < 1e-12);
    assert_eq!(r.histogram.values().sum::<usize>(), 500);
}

#[test]
fn trajectories_agree_with_density_matrix() {
    let params = NoiseParams::thermal(3e-5);
    let p = plan(1);
    let dm = density_matrix_reference(&p, &params).unwrap();
    assert!((dm.final_trace - 1.0).abs() < 1e-9);
    assert!(dm.traces.iter().all(|t| (t - 1.0).abs() < 1e-9));
    let traj = run_noisy(&p, &params, 1, 3000, 9, 20).unwrap();
    let tv = tv_distance(&traj.distribution, &dm.distribution).unwrap();
    assert!(tv < 0.02, "{tv}");
}

#[test]
fn shorter_t1_means_larger_error() {
    let p = plan(2);
    let tv: Vec<f64> = [1e-2, 1e-4, 1e-5]
        .iter()
        .map(|&t1| density_matrix_reference(&p, &NoiseParams::thermal(t1)).unwrap())
        .map(|dm| {
            tv_distance(
                &dm.distribution,
                &run_noisy(&p, &NoiseParams::ideal(), 1, 1, 0, 20).unwrap().ideal_distribution,
            )
            .unwrap()
        })
        .collect();
    assert!(tv[0] < tv[1] && tv[1] < tv[2], "{tv:?}");
}
