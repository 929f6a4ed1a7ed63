//! Benchmark circuit generators: GHZ, Grover, hardware-efficient VQC
//! ansatz, and seeded random circuits.
//!
//! All generators are deterministic; the seeded families (VQC, random) draw
//! from a counter-based ChaCha stream so the same seed reproduces the same
//! circuit on every platform.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use std::f64::consts::{PI, TAU};

use crate::circuit::{Circuit, Instruction};
use crate::error::{Error, Result};

/// H on qubit 0 followed by a CX chain: (|0…0> + |1…1>)/sqrt(2).
pub fn ghz(n: usize) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::Invalid {
            what: "ghz width",
            msg: format!("need at least 2 qubits, got {n}"),
        });
    }
    let mut c = Circuit::new(n, 0);
    c.append(Instruction::h(0))?;
    for i in 0..n - 1 {
        c.append(Instruction::cx(i, i + 1))?;
    }
    Ok(c)
}

/// Grover search for one marked basis state.
///
/// `marked` is a bitstring of length `n`; character `i` is the required value
/// of qubit `i`. The oracle is an MCZ over all qubits conjugated by X on the
/// zero positions; the diffuser is the standard H/X-conjugated MCZ. Pass
/// `None` to mark the all-ones state and/or to use the textbook iteration
/// count floor(pi/4 * sqrt(2^n)).
pub fn grover(n: usize, marked: Option<&str>, iterations: Option<usize>) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::Invalid {
            what: "grover width",
            msg: format!("need at least 2 qubits, got {n}"),
        });
    }
    let all_ones = "1".repeat(n);
    let marked = marked.unwrap_or(&all_ones);
    if marked.len() != n || !marked.chars().all(|ch| ch == '0' || ch == '1') {
        return Err(Error::Invalid {
            what: "grover marked state",
            msg: format!("`{marked}` is not a length-{n} bitstring"),
        });
    }
    let iterations = iterations.unwrap_or_else(|| default_grover_iterations(n));
    let zeros: Vec<usize> = marked
        .chars()
        .enumerate()
        .filter(|&(_, ch)| ch == '0')
        .map(|(i, _)| i)
        .collect();
    let all: Vec<usize> = (0..n).collect();

    let mut c = Circuit::new(n, 0);
    for q in 0..n {
        c.append(Instruction::h(q))?;
    }
    for _ in 0..iterations {
        // Oracle: phase-flip the marked state.
        for &q in &zeros {
            c.append(Instruction::x(q))?;
        }
        c.append(Instruction::mcz(all.clone()))?;
        for &q in &zeros {
            c.append(Instruction::x(q))?;
        }
        // Diffuser: reflection about the uniform superposition.
        for q in 0..n {
            c.append(Instruction::h(q))?;
        }
        for q in 0..n {
            c.append(Instruction::x(q))?;
        }
        c.append(Instruction::mcz(all.clone()))?;
        for q in 0..n {
            c.append(Instruction::x(q))?;
        }
        for q in 0..n {
            c.append(Instruction::h(q))?;
        }
    }
    Ok(c)
}

/// floor(pi/4 * sqrt(2^n)), the optimal single-target iteration count.
pub fn default_grover_iterations(n: usize) -> usize {
    (PI / 4.0 * (2f64).powi(n as i32).sqrt()).floor() as usize
}

/// Probability that an ideal `iterations`-step Grover run measures the marked
/// state: sin^2((2k+1) * asin(2^(-n/2))).
pub fn grover_success_probability(n: usize, iterations: usize) -> f64 {
    let theta = (2f64).powi(-(n as i32)).sqrt().asin();
    ((2 * iterations + 1) as f64 * theta).sin().powi(2)
}

/// Hardware-efficient variational ansatz: per layer, RY then RZ on every
/// qubit with seeded uniform angles in [0, 2pi), then a linear CX chain.
pub fn vqc(n: usize, layers: usize, seed: u64) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::Invalid {
            what: "vqc width",
            msg: format!("need at least 2 qubits, got {n}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n, 0);
    for _ in 0..layers {
        for q in 0..n {
            c.append(Instruction::ry(q, rng.random::<f64>() * TAU))?;
            c.append(Instruction::rz(q, rng.random::<f64>() * TAU))?;
        }
        for q in 0..n - 1 {
            c.append(Instruction::cx(q, q + 1))?;
        }
    }
    Ok(c)
}

/// Seeded random circuit: `one_qubit_gates` draws from {X, H, RZ(uniform)}
/// on uniform qubits interleaved with `two_qubit_gates` CXs on uniform
/// distinct ordered pairs. The interleaving picks the next slot with
/// probability proportional to the remaining gate budget of each class.
pub fn random_circuit(
    n: usize,
    seed: u64,
    two_qubit_gates: usize,
    one_qubit_gates: usize,
) -> Result<Circuit> {
    if n < 2 && two_qubit_gates > 0 {
        return Err(Error::Invalid {
            what: "random circuit width",
            msg: format!("need at least 2 qubits for CX gates, got {n}"),
        });
    }
    if n == 0 {
        return Err(Error::Invalid {
            what: "random circuit width",
            msg: "need at least 1 qubit".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n, 0);
    let mut ones = one_qubit_gates;
    let mut twos = two_qubit_gates;
    while ones + twos > 0 {
        if rng.random_range(0..ones + twos) < ones {
            let q = rng.random_range(0..n);
            match rng.random_range(0..3) {
                0 => c.append(Instruction::x(q))?,
                1 => c.append(Instruction::h(q))?,
                _ => c.append(Instruction::rz(q, rng.random::<f64>() * TAU))?,
            }
            ones -= 1;
        } else {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            c.append(Instruction::cx(a, b))?;
            twos -= 1;
        }
    }
    Ok(c)
}

/// Default gate budget for [`random_circuit`]: 3n of each class.
pub fn default_random_gates(n: usize) -> usize {
    3 * n
}

/// A circuit family plus its parameters, as written in experiment configs.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    pub family: Family,
    pub num_qubits: usize,
    /// Seed for the seeded families (VQC, random); ignored by GHZ/Grover.
    #[serde(default)]
    pub seed: u64,
    /// Grover only: marked bitstring (default all ones).
    #[serde(default)]
    pub marked: Option<String>,
    /// Grover only: iteration count (default floor(pi/4 * sqrt(2^n))).
    #[serde(default)]
    pub iterations: Option<usize>,
    /// VQC only: layer count (default 2).
    #[serde(default)]
    pub layers: Option<usize>,
    /// Random only: CX count (default 3n).
    #[serde(default)]
    pub two_qubit_gates: Option<usize>,
    /// Random only: single-qubit gate count (default 3n).
    #[serde(default)]
    pub one_qubit_gates: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Ghz,
    Grover,
    Vqc,
    Random,
}

impl CircuitSpec {
    pub fn build(&self) -> Result<Circuit> {
        let n = self.num_qubits;
        match self.family {
            Family::Ghz => ghz(n),
            Family::Grover => grover(n, self.marked.as_deref(), self.iterations),
            Family::Vqc => vqc(n, self.layers.unwrap_or(2), self.seed),
            Family::Random => random_circuit(
                n,
                self.seed,
                self.two_qubit_gates
                    .unwrap_or_else(|| default_random_gates(n)),
                self.one_qubit_gates
                    .unwrap_or_else(|| default_random_gates(n)),
            ),
        }
    }

    /// Short human-readable label ("ghz8", "random12", ...).
    pub fn label(&self) -> String {
        let name = match self.family {
            Family::Ghz => "ghz",
            Family::Grover => "grover",
            Family::Vqc => "vqc",
            Family::Random => "random",
        };
        format!("{name}{}", self.num_qubits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{GateKind, GateLabel};

    #[test]
    fn ghz_has_expected_instructions() {
        let c = ghz(3).unwrap();
        assert_eq!(c.num_qubits(), 3);
        assert_eq!(c.instructions()[0], Instruction::h(0));
        assert_eq!(c.instructions()[1], Instruction::cx(0, 1));
        assert_eq!(c.instructions()[2], Instruction::cx(1, 2));
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn ghz_depth_and_counts() {
        let c = ghz(8).unwrap();
        assert_eq!(c.count_gates(&[GateLabel::Cx]), 7);
        assert_eq!(c.count_gates(&[GateLabel::H]), 1);
        assert_eq!(c.depth(), 8);
    }

    #[test]
    fn ghz_rejects_tiny_widths() {
        assert!(ghz(0).is_err());
        assert!(ghz(1).is_err());
    }

    #[test]
    fn grover_default_iterations_match_formula() {
        assert_eq!(default_grover_iterations(2), 1);
        assert_eq!(default_grover_iterations(4), 3);
        assert_eq!(default_grover_iterations(8), 12); // pi/4 * 16 = 12.57
    }

    #[test]
    fn grover_defaults_to_all_ones_and_formula_iterations() {
        let c = grover(4, None, None).unwrap();
        // 3 iterations, each: MCZ + diffuser(8 H + 8 X + MCZ), plus 4 initial H.
        assert_eq!(c.count_gates(&[GateLabel::Mcz]), 6);
        assert_eq!(c.count_gates(&[GateLabel::X]), 24);
        assert_eq!(c.count_gates(&[GateLabel::H]), 4 + 24);
    }

    #[test]
    fn grover_conjugates_oracle_on_zero_positions() {
        let c = grover(3, Some("101"), Some(1)).unwrap();
        // Oracle X-conjugation targets qubit 1 only (the '0' position):
        // H H H | X(1) MCZ X(1) | diffuser...
        assert_eq!(c.instructions()[3], Instruction::x(1));
        assert_eq!(c.instructions()[4].kind, GateKind::Mcz(2));
        assert_eq!(c.instructions()[5], Instruction::x(1));
    }

    #[test]
    fn grover_rejects_malformed_bitstrings() {
        assert!(grover(4, Some("111"), None).is_err());
        assert!(grover(4, Some("11111"), None).is_err());
        assert!(grover(4, Some("11a1"), None).is_err());
    }

    #[test]
    fn vqc_layer_structure() {
        let c = vqc(8, 2, 7).unwrap();
        assert_eq!(c.count_gates(&[GateLabel::Ry]), 16);
        assert_eq!(c.count_gates(&[GateLabel::Rz]), 16);
        assert_eq!(c.count_gates(&[GateLabel::Cx]), 14);
        // Layer 1: rotations on 0..7 then the chain.
        assert_eq!(c.instructions()[0].kind.label(), GateLabel::Ry);
        assert_eq!(c.instructions()[16], Instruction::cx(0, 1));
    }

    #[test]
    fn vqc_is_deterministic_per_seed() {
        assert_eq!(vqc(6, 3, 42).unwrap(), vqc(6, 3, 42).unwrap());
        assert_ne!(vqc(6, 3, 42).unwrap(), vqc(6, 3, 43).unwrap());
    }

    #[test]
    fn vqc_angles_stay_in_range() {
        let c = vqc(8, 4, 11).unwrap();
        for inst in c.instructions() {
            if let GateKind::Ry(t) | GateKind::Rz(t) = inst.kind {
                assert!((0.0..TAU).contains(&t), "angle {t} outside [0, 2pi)");
            }
        }
    }

    #[test]
    fn random_circuit_hits_requested_budget() {
        let c = random_circuit(8, 3, 24, 24).unwrap();
        assert_eq!(c.count_gates(&[GateLabel::Cx]), 24);
        assert_eq!(
            c.count_gates(&[GateLabel::X, GateLabel::H, GateLabel::Rz]),
            24
        );
        assert_eq!(c.len(), 48);
    }

    #[test]
    fn random_circuit_is_deterministic_per_seed() {
        assert_eq!(
            random_circuit(8, 5, 24, 24).unwrap(),
            random_circuit(8, 5, 24, 24).unwrap()
        );
        assert_ne!(
            random_circuit(8, 5, 24, 24).unwrap(),
            random_circuit(8, 6, 24, 24).unwrap()
        );
    }

    #[test]
    fn random_circuit_cx_operands_are_distinct() {
        for seed in 0..20 {
            let c = random_circuit(5, seed, 15, 15).unwrap();
            for inst in c.instructions() {
                if inst.kind == GateKind::Cx {
                    assert_ne!(inst.qubits[0], inst.qubits[1]);
                }
            }
        }
    }

    #[test]
    fn random_circuit_zero_budgets() {
        let c = random_circuit(4, 1, 0, 0).unwrap();
        assert!(c.is_empty());
        let c = random_circuit(4, 1, 0, 5).unwrap();
        assert_eq!(c.count_gates(&[GateLabel::Cx]), 0);
        assert_eq!(c.len(), 5);
    }

    #[test]
    fn spec_build_dispatches_and_applies_defaults() {
        let spec: CircuitSpec =
            toml::from_str("family = \"random\"\nnum_qubits = 8\nseed = 3").unwrap();
        assert_eq!(spec.build().unwrap(), random_circuit(8, 3, 24, 24).unwrap());
        assert_eq!(spec.label(), "random8");

        let spec: CircuitSpec =
            toml::from_str("family = \"grover\"\nnum_qubits = 4\niterations = 1").unwrap();
        let c = spec.build().unwrap();
        assert_eq!(c.count_gates(&[GateLabel::Mcz]), 2);
    }
}
