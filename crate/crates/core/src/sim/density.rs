//! Exact density-matrix reference for the noise model.
//!
//! Slow and memory-hungry (capped at 10 qubits) but closed-form: every
//! channel is applied as a sum over Kraus terms instead of being sampled.
//! Measurements are deferred — a measurement dephases its qubit and the
//! classically conditioned correction becomes a coherent controlled gate
//! from the measured qubit, with the readout error folded in as a flip
//! channel on the correction target. This is the standard
//! deferred-measurement equivalence and holds because nothing touches a
//! measured qubit between the measurement and the (single) use of its bit;
//! the implementation checks that assumption and errors out if a circuit
//! violates it.

use num_complex::Complex64;

use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::sim::NoiseParams;

/// Hard cap: dim^2 complex entries, 16 MiB at 10 qubits.
pub const MAX_DENSITY_WIDTH: usize = 10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_code(code: u8) -> Pauli {
        match code {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            3 => Pauli::Z,
            _ => unreachable!(),
        }
    }

    /// Index mask this Pauli XORs into row/column indices.
    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    /// Whether the conjugated entry picks up (-1)^(row bit XOR col bit).
    fn signs(self) -> bool {
        matches!(self, Pauli::Y | Pauli::Z)
    }
}

struct Density {
    n: usize,
    rho: Vec<Complex64>,
    /// Per-clbit deferred-measurement source: (qubit, epoch at measure).
    sources: Vec<Option<(usize, u64)>>,
    /// Bumped on every operation touching a qubit; guards the deferral.
    epoch: Vec<u64>,
}

impl Density {
    fn new(num_qubits: usize, num_clbits: usize) -> Result<Density> {
        if num_qubits > MAX_DENSITY_WIDTH {
            return Err(Error::WidthTooLarge {
                width: num_qubits,
                max: MAX_DENSITY_WIDTH,
            });
        }
        let dim = 1usize << num_qubits;
        let mut rho = vec![ZERO; dim * dim];
        rho[0] = ONE;
        Ok(Density {
            n: num_qubits,
            rho,
            sources: vec![None; num_clbits],
            epoch: vec![0; num_qubits],
        })
    }

    fn dim(&self) -> usize {
        1 << self.n
    }

    /// rho <- (U (x) I) rho: apply `u` to the ket (row) index on qubit `q`.
    fn apply_ket_1q(&mut self, q: usize, u: &[[Complex64; 2]; 2]) {
        let dim = self.dim();
        let m = 1usize << q;
        for i0 in 0..dim {
            if i0 & m != 0 {
                continue;
            }
            let i1 = i0 | m;
            for j in 0..dim {
                let a = self.rho[i0 * dim + j];
                let b = self.rho[i1 * dim + j];
                self.rho[i0 * dim + j] = u[0][0] * a + u[0][1] * b;
                self.rho[i1 * dim + j] = u[1][0] * a + u[1][1] * b;
            }
        }
    }

    /// rho <- rho (U^dag (x) I): apply conj(u) to the bra (column) index.
    fn apply_bra_1q(&mut self, q: usize, u: &[[Complex64; 2]; 2]) {
        let dim = self.dim();
        let m = 1usize << q;
        for j0 in 0..dim {
            if j0 & m != 0 {
                continue;
            }
            let j1 = j0 | m;
            for i in 0..dim {
                let a = self.rho[i * dim + j0];
                let b = self.rho[i * dim + j1];
                self.rho[i * dim + j0] = u[0][0].conj() * a + u[0][1].conj() * b;
                self.rho[i * dim + j1] = u[1][0].conj() * a + u[1][1].conj() * b;
            }
        }
    }

    fn conjugate_1q(&mut self, q: usize, u: &[[Complex64; 2]; 2]) {
        self.apply_ket_1q(q, u);
        self.apply_bra_1q(q, u);
    }

    /// Local basis for a 4x4 gate on (q0, q1): index = bit(q0) + 2*bit(q1).
    fn apply_ket_2q(&mut self, q0: usize, q1: usize, u: &[[Complex64; 4]; 4]) {
        let dim = self.dim();
        let m0 = 1usize << q0;
        let m1 = 1usize << q1;
        for base in 0..dim {
            if base & (m0 | m1) != 0 {
                continue;
            }
            let rows = [base, base | m0, base | m1, base | m0 | m1];
            for j in 0..dim {
                let v = [
                    self.rho[rows[0] * dim + j],
                    self.rho[rows[1] * dim + j],
                    self.rho[rows[2] * dim + j],
                    self.rho[rows[3] * dim + j],
                ];
                for (r, row) in rows.iter().enumerate() {
                    self.rho[row * dim + j] =
                        u[r][0] * v[0] + u[r][1] * v[1] + u[r][2] * v[2] + u[r][3] * v[3];
                }
            }
        }
    }

    fn apply_bra_2q(&mut self, q0: usize, q1: usize, u: &[[Complex64; 4]; 4]) {
        let dim = self.dim();
        let m0 = 1usize << q0;
        let m1 = 1usize << q1;
        for base in 0..dim {
            if base & (m0 | m1) != 0 {
                continue;
            }
            let cols = [base, base | m0, base | m1, base | m0 | m1];
            for i in 0..dim {
                let v = [
                    self.rho[i * dim + cols[0]],
                    self.rho[i * dim + cols[1]],
                    self.rho[i * dim + cols[2]],
                    self.rho[i * dim + cols[3]],
                ];
                for (c, col) in cols.iter().enumerate() {
                    self.rho[i * dim + col] = u[c][0].conj() * v[0]
                        + u[c][1].conj() * v[1]
                        + u[c][2].conj() * v[2]
                        + u[c][3].conj() * v[3];
                }
            }
        }
    }

    fn conjugate_2q(&mut self, q0: usize, q1: usize, u: &[[Complex64; 4]; 4]) {
        self.apply_ket_2q(q0, q1, u);
        self.apply_bra_2q(q0, q1, u);
    }

    /// rho += weight * P rho_src P for a product of single-qubit Paulis.
    ///
    /// For each qubit: X maps entry (i, j) from (i^m, j^m); Z scales by
    /// (-1)^(bit_i XOR bit_j); Y does both (the i's from Y = iXZ cancel
    /// between ket and bra sides).
    fn add_pauli_conjugation(&mut self, src: &[Complex64], weight: f64, paulis: &[(usize, Pauli)]) {
        let dim = self.dim();
        let mut xor_mask = 0usize;
        let mut sign_mask = 0usize;
        for &(q, p) in paulis {
            if p.flips() {
                xor_mask |= 1 << q;
            }
            if p.signs() {
                sign_mask |= 1 << q;
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                let parity = ((i ^ j) & sign_mask).count_ones() & 1;
                let sign = if parity == 1 { -weight } else { weight };
                self.rho[i * dim + j] += sign * src[(i ^ xor_mask) * dim + (j ^ xor_mask)];
            }
        }
    }

    fn depolarize_1q(&mut self, q: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let src = self.rho.clone();
        for e in self.rho.iter_mut() {
            *e *= 1.0 - p;
        }
        for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
            self.add_pauli_conjugation(&src, p / 3.0, &[(q, pauli)]);
        }
    }

    fn depolarize_2q(&mut self, q0: usize, q1: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let src = self.rho.clone();
        for e in self.rho.iter_mut() {
            *e *= 1.0 - p;
        }
        for k in 1u8..16 {
            let pair = [
                (q0, Pauli::from_code(k >> 2)),
                (q1, Pauli::from_code(k & 3)),
            ];
            self.add_pauli_conjugation(&src, p / 15.0, &pair);
        }
    }

    /// Computational-basis dephasing: kill coherences across qubit `q`.
    fn dephase(&mut self, q: usize) {
        let dim = self.dim();
        let m = 1usize << q;
        for i in 0..dim {
            for j in 0..dim {
                if (i ^ j) & m != 0 {
                    self.rho[i * dim + j] = ZERO;
                }
            }
        }
    }

    /// Kraus pair {|0><0|, |0><1|}: send qubit `q` to |0> keeping the rest.
    fn reset(&mut self, q: usize) {
        let dim = self.dim();
        let m = 1usize << q;
        for i in 0..dim {
            if i & m != 0 {
                continue;
            }
            for j in 0..dim {
                if j & m != 0 {
                    continue;
                }
                let folded = self.rho[(i | m) * dim + (j | m)];
                self.rho[i * dim + j] += folded;
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                if (i | j) & m != 0 {
                    self.rho[i * dim + j] = ZERO;
                }
            }
        }
    }

    /// Bit- or phase-flip channel with probability `p` on qubit `q`.
    fn flip_channel(&mut self, q: usize, pauli: Pauli, p: f64) {
        if p == 0.0 {
            return;
        }
        let src = self.rho.clone();
        for e in self.rho.iter_mut() {
            *e *= 1.0 - p;
        }
        self.add_pauli_conjugation(&src, p, &[(q, pauli)]);
    }

    fn touch(&mut self, qubits: &[usize]) {
        for &q in qubits {
            self.epoch[q] += 1;
        }
    }

    /// Take the deferred source for clbit `c`, enforcing single use and an
    /// untouched source qubit.
    fn consume_source(&mut self, c: usize) -> Result<usize> {
        let (q, epoch) = self.sources[c].take().ok_or(Error::Invalid {
            what: "deferred measurement",
            msg: format!("clbit {c} read twice (exact oracle allows one read)"),
        })?;
        if self.epoch[q] != epoch {
            return Err(Error::Invalid {
                what: "deferred measurement",
                msg: format!("qubit {q} was touched between measurement and use of clbit {c}"),
            });
        }
        Ok(q)
    }

    fn trace(&self) -> f64 {
        let dim = self.dim();
        (0..dim).map(|i| self.rho[i * dim + i].re).sum()
    }

    /// <phi (x) 0_rest | rho | phi (x) 0_rest> with logical qubit l on wire
    /// `qubit_map[l]`.
    fn fidelity(&self, qubit_map: &[usize], ideal: &[Complex64]) -> f64 {
        let dim = self.dim();
        let embed = |x: usize| -> usize {
            let mut idx = 0usize;
            for (l, &q) in qubit_map.iter().enumerate() {
                if (x >> l) & 1 == 1 {
                    idx |= 1 << q;
                }
            }
            idx
        };
        let mut f = ZERO;
        for (x, ax) in ideal.iter().enumerate() {
            if ax.re == 0.0 && ax.im == 0.0 {
                continue;
            }
            let row = embed(x);
            for (y, ay) in ideal.iter().enumerate() {
                if ay.re == 0.0 && ay.im == 0.0 {
                    continue;
                }
                f += ax.conj() * self.rho[row * dim + embed(y)] * ay;
            }
        }
        debug_assert!(f.im.abs() < 1e-9, "fidelity should be real, got {f}");
        f.re
    }
}

fn matrix_1q(kind: &GateKind) -> [[Complex64; 2]; 2] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    match *kind {
        GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
        GateKind::H => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]
        }
        GateKind::Rz(theta) => {
            let half = theta / 2.0;
            [
                [Complex64::from_polar(1.0, -half), ZERO],
                [ZERO, Complex64::from_polar(1.0, half)],
            ]
        }
        GateKind::Ry(theta) => {
            let (sin, cos) = (theta / 2.0).sin_cos();
            [[c(cos, 0.0), c(-sin, 0.0)], [c(sin, 0.0), c(cos, 0.0)]]
        }
        GateKind::Rx(theta) => {
            let (sin, cos) = (theta / 2.0).sin_cos();
            [[c(cos, 0.0), c(0.0, -sin)], [c(0.0, -sin), c(cos, 0.0)]]
        }
        // Zero-control MCZ degenerates to a Z phase on its single operand.
        GateKind::Mcz(0) => [[ONE, ZERO], [ZERO, -ONE]],
        _ => unreachable!("not a supported 1-qubit gate"),
    }
}

fn matrix_2q(kind: &GateKind) -> [[Complex64; 4]; 4] {
    let mut u = [[ZERO; 4]; 4];
    match kind {
        // Local index = bit(q0) + 2*bit(q1); control q0, target q1.
        GateKind::Cx => {
            u[0][0] = ONE;
            u[3][1] = ONE;
            u[2][2] = ONE;
            u[1][3] = ONE;
        }
        GateKind::Cz | GateKind::Mcz(1) => {
            u[0][0] = ONE;
            u[1][1] = ONE;
            u[2][2] = ONE;
            u[3][3] = -ONE;
        }
        _ => unreachable!("not a supported 2-qubit gate"),
    }
    u
}

/// Exact fidelity of the noisy circuit against `ideal` on the mapped
/// logical wires (all other wires projected on |0>). Same convention as
/// [`crate::sim::estimate_fidelity`], computed without sampling.
pub fn exact_fidelity(
    circuit: &Circuit,
    qubit_map: &[usize],
    ideal: &[Complex64],
    noise: &NoiseParams,
) -> Result<f64> {
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
    let mut rho = Density::new(circuit.num_qubits(), circuit.num_clbits())?;
    for inst in circuit.instructions() {
        let q = &inst.qubits;
        match inst.kind {
            GateKind::Measure => {
                rho.dephase(q[0]);
                rho.sources[inst.clbit.expect("validated at append")] =
                    Some((q[0], rho.epoch[q[0]]));
            }
            GateKind::Reset => {
                rho.reset(q[0]);
                rho.touch(q);
            }
            GateKind::CondX => {
                let s = rho.consume_source(inst.clbit.expect("validated at append"))?;
                rho.conjugate_2q(s, q[0], &matrix_2q(&GateKind::Cx));
                rho.flip_channel(q[0], Pauli::X, noise.p_ro);
                rho.touch(&[s, q[0]]);
            }
            GateKind::CondZ => {
                let s = rho.consume_source(inst.clbit.expect("validated at append"))?;
                rho.conjugate_2q(s, q[0], &matrix_2q(&GateKind::Cz));
                rho.flip_channel(q[0], Pauli::Z, noise.p_ro);
                rho.touch(&[s, q[0]]);
            }
            GateKind::X
            | GateKind::H
            | GateKind::Rz(_)
            | GateKind::Ry(_)
            | GateKind::Rx(_)
            | GateKind::Mcz(0) => {
                rho.conjugate_1q(q[0], &matrix_1q(&inst.kind));
                rho.depolarize_1q(q[0], noise.p1);
                rho.touch(q);
            }
            GateKind::Cx | GateKind::Cz | GateKind::Mcz(1) => {
                rho.conjugate_2q(q[0], q[1], &matrix_2q(&inst.kind));
                rho.depolarize_2q(q[0], q[1], noise.p2);
                rho.touch(q);
            }
            GateKind::Ccx | GateKind::Mcz(_) => {
                return Err(Error::UnsupportedInstruction {
                    kind: inst.kind.label().name(),
                    context: "exact_fidelity (transpile first)",
                });
            }
        }
        debug_assert!(
            (rho.trace() - 1.0).abs() < 1e-9,
            "trace drifted to {}",
            rho.trace()
        );
    }
    Ok(rho.fidelity(qubit_map, ideal))
}
