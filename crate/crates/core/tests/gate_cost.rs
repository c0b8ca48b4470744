use hdqf_core::qsim::{Gate, RegisterLayout, StateVector};
use std::time::Instant;

fn gates(n: usize) -> Vec<Gate> {
    (0..32).flat_map(|i| [Gate::H(i % n), Gate::Cx { control: i % n, target: (i + 5) % n }]).collect()
}

fn median_secs(n: usize) -> f64 {
    let g = gates(n);
    let mut s = StateVector::new_zero(RegisterLayout::plain(n)).unwrap();
    s.apply_all(&g).unwrap();
    let mut t: Vec<f64> = (0..7)
        .map(|_| {
            let start = Instant::now();
            s.apply_all(&g).unwrap();
            start.elapsed().as_secs_f64()
        })
        .collect();
    t.sort_by(f64::total_cmp);
    t[3]
}

#[test]
fn one_more_qubit_doubles_gate_time() {
    let (a, b) = (median_secs(20), median_secs(21));
    let ratio = b / a;
    assert!((1.6..=3.0).contains(&ratio), "20 qubits {a:.4}s, 21 qubits {b:.4}s, ratio {ratio:.2}");
}
