//! Noisy circuit simulation.
//!
//! Three routes with deliberately separate gate-application code:
//! statevector trajectories (this module + [`state`]), the exact
//! density-matrix oracle ([`density`]), and the transpiler's dense unitary
//! builder. Agreement between them is what the test suites check.
//!
//! Noise model: after every 1-qubit unitary a uniform Pauli {X,Y,Z} with
//! probability `p1`; after every 2-qubit unitary a uniform non-identity
//! 2-qubit Pauli (15 choices) with probability `p2`; measurements record the
//! flipped bit with probability `p_ro` while leaving the state collapsed to
//! the true outcome. Resets and classically conditioned corrections carry no
//! noise of their own — a conditional inherits error through its corrupted
//! record.

pub mod density;
pub mod state;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::circuit::{Circuit, GateKind, Instruction};
use crate::error::{Error, Result};
pub use state::{StateVector, MAX_WIDTH};

/// Depolarizing and readout error rates.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    /// Depolarizing probability after each 1-qubit gate.
    #[serde(default = "NoiseParams::default_p1")]
    pub p1: f64,
    /// Depolarizing probability after each 2-qubit gate.
    #[serde(default = "NoiseParams::default_p2")]
    pub p2: f64,
    /// Probability a measurement records the flipped bit.
    #[serde(default = "NoiseParams::default_p_ro")]
    pub p_ro: f64,
}

impl NoiseParams {
    fn default_p1() -> f64 {
        0.001
    }
    fn default_p2() -> f64 {
        0.005
    }
    fn default_p_ro() -> f64 {
        0.005
    }

    pub const ZERO: NoiseParams = NoiseParams {
        p1: 0.0,
        p2: 0.0,
        p_ro: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("p_ro", self.p_ro)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Invalid {
                    what: "noise parameter",
                    msg: format!("{name} = {p} outside [0, 1]"),
                });
            }
        }
        Ok(())
    }
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            p1: Self::default_p1(),
            p2: Self::default_p2(),
            p_ro: Self::default_p_ro(),
        }
    }
}

/// Final state of one Monte Carlo trajectory.
pub struct Trajectory {
    pub state: StateVector,
    /// Recorded (possibly readout-corrupted) measurement bits.
    pub record: Vec<bool>,
    /// Number of Pauli errors that were actually inserted.
    pub pauli_events: u32,
}

/// Noiseless statevector simulation of a unitary circuit (no measurements,
/// resets, or conditionals; any gate kind up to the width cap of 26).
pub fn simulate_ideal(circuit: &Circuit) -> Result<StateVector> {
    let mut sv = StateVector::new(circuit.num_qubits())?;
    for inst in circuit.instructions() {
        if !inst.kind.is_unitary() {
            return Err(Error::UnsupportedInstruction {
                kind: inst.kind.label().name(),
                context: "simulate_ideal",
            });
        }
        apply_unitary(&mut sv, inst);
    }
    Ok(sv)
}

fn apply_unitary(sv: &mut StateVector, inst: &Instruction) {
    let q = &inst.qubits;
    match inst.kind {
        GateKind::X => sv.apply_x(q[0]),
        GateKind::H => sv.apply_h(q[0]),
        GateKind::Rz(t) => sv.apply_rz(q[0], t),
        GateKind::Ry(t) => sv.apply_ry(q[0], t),
        GateKind::Rx(t) => sv.apply_rx(q[0], t),
        GateKind::Cx => sv.apply_cx(q[0], q[1]),
        GateKind::Cz => sv.apply_cz(q[0], q[1]),
        GateKind::Ccx => sv.apply_ccx(q[0], q[1], q[2]),
        GateKind::Mcz(_) => sv.apply_mcz(q),
        _ => unreachable!("caller filters non-unitary kinds"),
    }
    #[cfg(debug_assertions)]
    sv.debug_check_norm();
}

/// Run one noisy trajectory. Gates of arity 3+ are rejected — the noise
/// model is defined for the transpiled basis (plus RY/RX/CZ for
/// convenience), not for multi-controlled gates.
pub fn run_trajectory(
    circuit: &Circuit,
    noise: &NoiseParams,
    rng: &mut impl Rng,
) -> Result<Trajectory> {
    let mut sv = StateVector::new(circuit.num_qubits())?;
    let mut record = vec![false; circuit.num_clbits()];
    let mut pauli_events = 0u32;
    for inst in circuit.instructions() {
        let q = &inst.qubits;
        match inst.kind {
            GateKind::Measure => {
                let outcome = sv.measure(q[0], rng);
                let flip = rng.random::<f64>() < noise.p_ro;
                record[inst.clbit.expect("validated at append")] = outcome != flip;
            }
            GateKind::Reset => sv.reset(q[0], rng),
            GateKind::CondX => {
                if record[inst.clbit.expect("validated at append")] {
                    sv.apply_x(q[0]);
                }
            }
            GateKind::CondZ => {
                if record[inst.clbit.expect("validated at append")] {
                    sv.apply_z(q[0]);
                }
            }
            GateKind::Ccx | GateKind::Mcz(_) if inst.kind.arity() > 2 => {
                return Err(Error::UnsupportedInstruction {
                    kind: inst.kind.label().name(),
                    context: "run_trajectory (transpile first)",
                });
            }
            _ => {
                apply_unitary(&mut sv, inst);
                match inst.kind.arity() {
                    1 => {
                        if rng.random::<f64>() < noise.p1 {
                            pauli_events += 1;
                            match rng.random_range(0..3u8) {
                                0 => sv.apply_x(q[0]),
                                1 => sv.apply_y(q[0]),
                                _ => sv.apply_z(q[0]),
                            }
                        }
                    }
                    2 => {
                        if rng.random::<f64>() < noise.p2 {
                            pauli_events += 1;
                            let k = rng.random_range(1..16u8);
                            apply_pauli(&mut sv, q[0], k >> 2);
                            apply_pauli(&mut sv, q[1], k & 3);
                        }
                    }
                    _ => unreachable!("arity-3+ kinds rejected above"),
                }
            }
        }
        #[cfg(debug_assertions)]
        sv.debug_check_norm();
    }
    Ok(Trajectory {
        state: sv,
        record,
        pauli_events,
    })
}

fn apply_pauli(sv: &mut StateVector, q: usize, which: u8) {
    match which {
        0 => {}
        1 => sv.apply_x(q),
        2 => sv.apply_y(q),
        3 => sv.apply_z(q),
        _ => unreachable!(),
    }
}

/// The RNG stream for trajectory `t` of an estimate seeded with `seed`.
/// Keying by (seed, trajectory index) makes results independent of how
/// trajectories are scheduled across threads.
pub fn trajectory_rng(seed: u64, t: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t);
    rng
}

/// Monte Carlo fidelity estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityEstimate {
    pub fidelity: f64,
    pub std_err: f64,
    pub n_trajectories: usize,
}

impl FidelityEstimate {
    /// Squared-overlap convention: mean over trajectories of
    /// |<ideal x 0_rest | psi>|^2.
    pub const CONVENTION: &'static str = "squared-overlap";
}

/// Estimate the fidelity of the noisy `circuit` against a reference state
/// over the logical register.
///
/// `qubit_map[l]` is the wire of `circuit` carrying logical qubit `l`;
/// `ideal` is a dense 2^L reference (logical qubit l = bit l). Every wire
/// outside the map is required to end in |0> (that is the <0_comm| part of
/// the overlap). For a monolithic circuit the map is the identity.
pub fn estimate_fidelity(
    circuit: &Circuit,
    qubit_map: &[usize],
    ideal: &[Complex64],
    noise: &NoiseParams,
    n_trajectories: usize,
    seed: u64,
) -> Result<FidelityEstimate> {
    noise.validate()?;
    if ideal.len() != 1usize << qubit_map.len() {
        return Err(Error::Invalid {
            what: "ideal state",
            msg: format!(
                "length {} does not match 2^{} logical qubits",
                ideal.len(),
                qubit_map.len()
            ),
        });
    }
    for &q in qubit_map {
        if q >= circuit.num_qubits() {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                width: circuit.num_qubits(),
            });
        }
    }
    if n_trajectories == 0 {
        return Err(Error::Invalid {
            what: "trajectory count",
            msg: "need at least 1 trajectory".into(),
        });
    }

    let fids: Vec<f64> = (0..n_trajectories as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trajectory_rng(seed, t);
            let traj = run_trajectory(circuit, noise, &mut rng)?;
            Ok(overlap_fidelity(&traj.state, qubit_map, ideal))
        })
        .collect::<Result<_>>()?;

    // Accumulate sequentially in trajectory order so the result does not
    // depend on the thread count.
    let n = fids.len() as f64;
    let mean = fids.iter().sum::<f64>() / n;
    let var = if fids.len() > 1 {
        fids.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(FidelityEstimate {
        fidelity: mean,
        std_err: (var / n).sqrt(),
        n_trajectories,
    })
}

/// |<ideal x 0_rest | state>|^2 with logical qubit `l` living on wire
/// `qubit_map[l]`.
pub fn overlap_fidelity(state: &StateVector, qubit_map: &[usize], ideal: &[Complex64]) -> f64 {
    // Wires that never left |0> contribute a fixed 0 bit; a basis state that
    // needs a 1 there has zero amplitude.
    let slots: Vec<Option<usize>> = qubit_map.iter().map(|&q| state.slot_of(q)).collect();
    let mut overlap = Complex64::new(0.0, 0.0);
    'basis: for (x, a) in ideal.iter().enumerate() {
        if a.re == 0.0 && a.im == 0.0 {
            continue;
        }
        let mut idx = 0usize;
        for (l, slot) in slots.iter().enumerate() {
            if (x >> l) & 1 == 1 {
                match slot {
                    Some(s) => idx |= 1 << s,
                    None => continue 'basis,
                }
            }
        }
        overlap += a.conj() * state.slot_amp(idx);
    }
    overlap.norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;

    fn dense_ideal(circuit: &Circuit) -> Vec<Complex64> {
        simulate_ideal(circuit).unwrap().dense()
    }

    #[test]
    fn ideal_ghz_two_qubits() {
        let d = dense_ideal(&library::ghz(2).unwrap());
        assert!((d[0b00].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((d[0b11].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(d[0b01].norm() < 1e-12 && d[0b10].norm() < 1e-12);
    }

    #[test]
    fn ideal_rejects_measurement() {
        let mut c = Circuit::new(1, 1);
        c.append(Instruction::measure(0, 0)).unwrap();
        assert!(matches!(
            simulate_ideal(&c),
            Err(Error::UnsupportedInstruction { .. })
        ));
    }

    #[test]
    fn grover_matches_closed_form() {
        for (n, iters) in [(2, 1), (3, 2), (4, 3), (4, 1), (5, 4)] {
            let c = library::grover(n, None, Some(iters)).unwrap();
            let d = dense_ideal(&c);
            let marked = (1usize << n) - 1;
            let got = d[marked].norm_sqr();
            let want = library::grover_success_probability(n, iters);
            assert!(
                (got - want).abs() < 1e-9,
                "n={n} iters={iters}: {got} vs {want}"
            );
        }
        // The textbook n=4 point: 3 iterations land near 0.961.
        let p = library::grover_success_probability(4, 3);
        assert!((p - 0.961).abs() < 5e-4, "p = {p}");
    }

    #[test]
    fn grover_two_qubits_is_exact_after_one_iteration() {
        let d = dense_ideal(&library::grover(2, Some("11"), Some(1)).unwrap());
        assert!((d[0b11].norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_trajectory_equals_ideal_for_unitary_circuits() {
        let c = library::random_circuit(6, 9, 18, 18).unwrap();
        let ideal = dense_ideal(&c);
        let mut rng = trajectory_rng(1, 0);
        let traj = run_trajectory(&c, &NoiseParams::ZERO, &mut rng).unwrap();
        let got = traj.state.dense();
        for (a, b) in got.iter().zip(ideal.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert_eq!(traj.pauli_events, 0);
    }

    #[test]
    fn trajectory_rejects_unexpanded_multi_controlled_gates() {
        let c = library::grover(3, None, Some(1)).unwrap();
        let mut rng = trajectory_rng(0, 0);
        assert!(matches!(
            run_trajectory(&c, &NoiseParams::ZERO, &mut rng),
            Err(Error::UnsupportedInstruction { .. })
        ));
    }

    #[test]
    fn pauli_insertion_rate_is_binomial() {
        // One X gate, p1 = 0.001, 10^6 trajectories: the insertion count is
        // Binomial(10^6, 0.001); demand the frequency within 3 sigma.
        let mut c = Circuit::new(1, 0);
        c.append(Instruction::x(0)).unwrap();
        let noise = NoiseParams {
            p1: 0.001,
            p2: 0.0,
            p_ro: 0.0,
        };
        let n = 1_000_000u64;
        let mut events = 0u64;
        for t in 0..n {
            let mut rng = trajectory_rng(77, t);
            events += run_trajectory(&c, &noise, &mut rng).unwrap().pauli_events as u64;
        }
        let freq = events as f64 / n as f64;
        let sigma = (0.001 * 0.999 / n as f64).sqrt();
        assert!(
            (freq - 0.001).abs() < 3.0 * sigma,
            "freq = {freq}, want 0.001 +- {}",
            3.0 * sigma
        );
    }

    #[test]
    fn readout_flip_rate_is_binomial() {
        // Measure |1> with p_ro = 0.005: recorded 0 with frequency 0.005.
        let mut c = Circuit::new(1, 1);
        c.append(Instruction::x(0)).unwrap();
        c.append(Instruction::measure(0, 0)).unwrap();
        let noise = NoiseParams {
            p1: 0.0,
            p2: 0.0,
            p_ro: 0.005,
        };
        let n = 1_000_000u64;
        let mut flipped = 0u64;
        for t in 0..n {
            let mut rng = trajectory_rng(78, t);
            let traj = run_trajectory(&c, &noise, &mut rng).unwrap();
            if !traj.record[0] {
                flipped += 1;
            }
        }
        let freq = flipped as f64 / n as f64;
        let sigma = (0.005 * 0.995 / n as f64).sqrt();
        assert!(
            (freq - 0.005).abs() < 3.0 * sigma,
            "freq = {freq}, want 0.005 +- {}",
            3.0 * sigma
        );
    }

    #[test]
    fn readout_flip_corrupts_record_not_state() {
        let mut c = Circuit::new(1, 1);
        c.append(Instruction::x(0)).unwrap();
        c.append(Instruction::measure(0, 0)).unwrap();
        let noise = NoiseParams {
            p1: 0.0,
            p2: 0.0,
            p_ro: 1.0, // always flip the record
        };
        let mut rng = trajectory_rng(5, 0);
        let traj = run_trajectory(&c, &noise, &mut rng).unwrap();
        assert!(!traj.record[0], "record must show the flipped bit");
        assert!((traj.state.dense()[1].norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn estimate_fidelity_is_exactly_one_without_noise() {
        let c = library::ghz(4).unwrap();
        let ideal = dense_ideal(&c);
        let map: Vec<usize> = (0..4).collect();
        let est = estimate_fidelity(&c, &map, &ideal, &NoiseParams::ZERO, 50, 3).unwrap();
        assert!((est.fidelity - 1.0).abs() < 1e-9);
        assert!(est.std_err < 1e-9);
    }

    #[test]
    fn estimate_fidelity_is_deterministic_per_seed() {
        let c = library::ghz(4).unwrap();
        let ideal = dense_ideal(&c);
        let map: Vec<usize> = (0..4).collect();
        let a = estimate_fidelity(&c, &map, &ideal, &NoiseParams::default(), 500, 9).unwrap();
        let b = estimate_fidelity(&c, &map, &ideal, &NoiseParams::default(), 500, 9).unwrap();
        assert_eq!(a, b);
        let c2 = estimate_fidelity(&c, &map, &ideal, &NoiseParams::default(), 500, 10).unwrap();
        assert_ne!(a, c2);
    }

    #[test]
    fn estimate_fidelity_is_thread_count_independent() {
        let c = library::ghz(4).unwrap();
        let ideal = dense_ideal(&c);
        let map: Vec<usize> = (0..4).collect();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| {
                estimate_fidelity(&c, &map, &ideal, &NoiseParams::default(), 400, 11).unwrap()
            });
        let quad = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| {
                estimate_fidelity(&c, &map, &ideal, &NoiseParams::default(), 400, 11).unwrap()
            });
        assert_eq!(single, quad);
    }

    #[test]
    fn trajectory_norm_stays_unit_under_noise() {
        let c = library::random_circuit(5, 2, 15, 15).unwrap();
        let noise = NoiseParams {
            p1: 0.5,
            p2: 0.5,
            p_ro: 0.5,
        };
        for t in 0..50 {
            let mut rng = trajectory_rng(12, t);
            let traj = run_trajectory(&c, &noise, &mut rng).unwrap();
            assert!((traj.state.norm_sqr() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn noise_params_validation() {
        assert!(NoiseParams {
            p1: -0.1,
            ..NoiseParams::ZERO
        }
        .validate()
        .is_err());
        assert!(NoiseParams {
            p2: 1.5,
            ..NoiseParams::ZERO
        }
        .validate()
        .is_err());
        assert!(NoiseParams::default().validate().is_ok());
    }
}
