use coherlab::channels::{is_incoherent_operator, INCOHERENCE_TOL};
use coherlab::measures::{coherence_of_assistance, pure_coherence};
use coherlab::protocols::{
    all_labeled_operators_incoherent, assisted_distill_pure, incoherent_teleport, merging_witness, teleport_channel,
    find_steering_measurement,
};
use coherlab::qmat::{trace_norm, DensityMatrix};
use coherlab::states::{random_density, random_pure};

#[test]
fn teleportation_is_the_identity_channel_on_mixed_inputs() {
    for seed in 0..20 {
        let rho = random_density(&[2], 2, seed).unwrap();
        let out = teleport_channel(&rho).unwrap();
        assert!(trace_norm(&(out.matrix() - rho.matrix())).unwrap() < 1e-12);
    }
}

#[test]
fn teleportation_branches_and_corrections() {
    let r = incoherent_teleport(&random_pure(&[2], 3).unwrap()).unwrap();
    assert_eq!(r.corrections.len(), 4);
    assert!(r.corrections.iter().all(|u| is_incoherent_operator(u, INCOHERENCE_TOL)));
    assert!((r.total_probability() - 1.0).abs() < 1e-12);
}

#[test]
fn assisted_distillation_reaches_the_assistance_value() {
    for seed in 0..10 {
        let psi = random_pure(&[2, 2], 40 + seed).unwrap();
        let rho_b = psi.to_density().partial_trace(&[1]).unwrap();
        let ca = coherence_of_assistance(&rho_b, 4, seed).unwrap();
        let r = assisted_distill_pure(&psi, Some(&ca.ensemble), 0, 0).unwrap();
        assert!((r.metrics["average_coherence"] - ca.value).abs() < 1e-9);
        let direct: f64 = ca.ensemble.iter().map(|(p, phi)| p * pure_coherence(phi)).sum();
        assert!((direct - ca.value).abs() < 1e-12);
    }
}

#[test]
fn steering_witness_outputs_are_consistent() {
    for seed in 0..20 {
        let rho = random_density(&[3, 2], 3, 60 + seed).unwrap();
        let w = find_steering_measurement(&rho, 32).unwrap().expect("generic states are not QI");
        let k = w.kraus_op.kron(&coherlab::ComplexMatrix::identity(2));
        let m = k.sandwich(rho.matrix());
        assert!((m.trace().re - w.probability).abs() < 1e-12);
        let post = DensityMatrix::new(m.scale_real(1.0 / w.probability), vec![3, 2]).unwrap();
        let bob = post.partial_trace(&[1]).unwrap();
        assert!(bob.matrix().approx_eq(w.bob_post_state.matrix(), 1e-9));
        let inst = w.instrument().unwrap();
        assert!(inst.is_incoherent(INCOHERENCE_TOL));
    }
}

#[test]
fn merging_witness_reports() {
    let w = merging_witness().unwrap();
    assert!(w.contradiction);
    assert_eq!(w.relabel, vec![0, 1, 3, 2]);
    assert!(w.merge_gap < 1e-9);
    assert!(all_labeled_operators_incoherent());
}

/// Controlled-NOT from data into a fresh ancilla, split into the two
/// incoherent branches `|k><k| ⊗ X^k`.
fn copy_into_ancilla() -> Vec<coherlab::ComplexMatrix> {
    let p0 = coherlab::ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
    let p1 = coherlab::ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 0.0, 1.0]).unwrap();
    let id = coherlab::ComplexMatrix::identity(2);
    let x = coherlab::ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
    vec![p0.kron(&id), p1.kron(&x)]
}

#[test]
fn copying_into_discarded_ancillas_reduces_to_full_dephasing() {
    use coherlab::measures::dephase;
    use coherlab::protocols::ancilla_reduce;

    let local = copy_into_ancilla();
    let mut pairs = Vec::new();
    for a in &local {
        for b in &local {
            pairs.push((a.clone(), b.clone()));
        }
    }
    let tilde = coherlab::channels::ProductKrausChannel::new(pairs, vec![2, 2], vec![2, 2]).unwrap();
    assert!(tilde.classify(INCOHERENCE_TOL).separable_incoherent);
    let reduced = ancilla_reduce(&tilde, &[2], &[2]).unwrap();
    for seed in 0..20 {
        let rho = random_density(&[2, 2], 4, seed).unwrap();
        let out = reduced.apply(&rho).unwrap();
        let expected = dephase(&rho, &[0, 1]).unwrap();
        assert!(trace_norm(&(out.matrix() - expected.matrix())).unwrap() < 1e-12);
    }
}
