//! Expansion of a monolithic circuit onto a multi-QPU layout.
//!
//! Each QPU contributes a contiguous block of physical wires: first its
//! computational slots, then its communication slots. Logical qubits land
//! on the computational slots of their assigned QPU in ascending order.
//! Intra-QPU gates are remapped verbatim; every cross-QPU CX becomes the
//! remote-CX protocol over one Bell pair and two fresh classical bits:
//!
//! ```text
//! H(eA); CX(eA,eB);            Bell pair across the boundary
//! CX(c,eA); CX(eB,t);          entangle both data qubits
//! Measure(eA -> m0); CondX(t, m0);
//! H(eB); Measure(eB -> m1); CondZ(c, m1);
//! Reset(eA); Reset(eB);        comm qubits back to |0> for reuse
//! ```
//!
//! All four measurement branches leave the data register in exactly
//! CX(c,t) of its prior state (up to global phase), which the tests check
//! branch by branch.

use std::fmt::Write as _;

use crate::circuit::{Circuit, DepthTracker, GateKind, Instruction};
use crate::error::{Error, Result};
use crate::partition::{parse_network, Assignment, NetworkConfig};
use crate::text;
use crate::transpile::is_output_kind;

/// Number of instructions one remote CX expands into.
pub const PROTOCOL_LEN: usize = 11;

/// Physical wire layout for a network: QPU `p` owns the contiguous range
/// starting at its offset, computational slots first, then comm slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhysicalLayout {
    net: NetworkConfig,
    qpu_offset: Vec<usize>,
    logical_to_physical: Vec<usize>,
}

impl PhysicalLayout {
    pub fn new(net: &NetworkConfig, assignment: &Assignment) -> Result<PhysicalLayout> {
        net.validate()?;
        assignment.validate(net)?;
        let mut qpu_offset = Vec::with_capacity(net.num_qpus());
        let mut off = 0;
        for spec in &net.qpus {
            qpu_offset.push(off);
            off += spec.comp_qubits + spec.comm_qubits;
        }
        let logical_to_physical = (0..assignment.num_qubits())
            .map(|q| qpu_offset[assignment.qpu_of[q]] + assignment.slot_of(q))
            .collect();
        Ok(PhysicalLayout {
            net: net.clone(),
            qpu_offset,
            logical_to_physical,
        })
    }

    pub fn net(&self) -> &NetworkConfig {
        &self.net
    }

    pub fn total_qubits(&self) -> usize {
        self.net.total_qubits()
    }

    /// Physical wire of a logical qubit.
    pub fn physical(&self, logical: usize) -> usize {
        self.logical_to_physical[logical]
    }

    /// Logical-to-physical map, indexed by logical qubit.
    pub fn qubit_map(&self) -> &[usize] {
        &self.logical_to_physical
    }

    /// Physical wire of communication slot `k` on `qpu`.
    pub fn comm_slot(&self, qpu: usize, k: usize) -> usize {
        debug_assert!(k < self.net.qpus[qpu].comm_qubits);
        self.qpu_offset[qpu] + self.net.qpus[qpu].comp_qubits + k
    }

    pub fn qpu_of_physical(&self, phys: usize) -> usize {
        for (p, &off) in self.qpu_offset.iter().enumerate() {
            let size = self.net.qpus[p].comp_qubits + self.net.qpus[p].comm_qubits;
            if phys < off + size {
                return p;
            }
        }
        panic!("physical index {phys} out of layout");
    }

    pub fn is_comm(&self, phys: usize) -> bool {
        let p = self.qpu_of_physical(phys);
        phys - self.qpu_offset[p] >= self.net.qpus[p].comp_qubits
    }
}

/// Where one protocol instance sits in the output instruction list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolSpan {
    /// Index of the protocol's first instruction (the Bell-prep H).
    pub start: usize,
    /// Physical control and target data qubits.
    pub control: usize,
    pub target: usize,
    /// Physical comm qubits on the control-side and target-side QPUs.
    pub comm_a: usize,
    pub comm_b: usize,
    /// The two fresh classical bits.
    pub m0: usize,
    pub m1: usize,
}

#[derive(Debug, Clone)]
pub struct DistributedCircuit {
    pub circuit: Circuit,
    pub layout: PhysicalLayout,
    pub assignment: Assignment,
    pub remote_cx_count: usize,
    pub protocols: Vec<ProtocolSpan>,
    /// Classical bits belonging to the source circuit; protocol bits
    /// follow, two per remote CX.
    pub source_clbits: usize,
}

impl DistributedCircuit {
    pub fn depth(&self) -> usize {
        self.circuit.depth()
    }

    /// Logical-to-physical map for fidelity overlaps.
    pub fn qubit_map(&self) -> &[usize] {
        self.layout.qubit_map()
    }
}

/// The 11-instruction remote-CX sequence. `c`/`t` are the physical control
/// and target data wires, `e_a`/`e_b` the comm wires on their QPUs.
pub fn protocol_template(
    c: usize,
    t: usize,
    e_a: usize,
    e_b: usize,
    m0: usize,
    m1: usize,
) -> Result<Vec<Instruction>> {
    let qubits = [c, t, e_a, e_b];
    for (i, &a) in qubits.iter().enumerate() {
        for &b in &qubits[i + 1..] {
            if a == b {
                return Err(Error::DuplicateQubit { qubit: a });
            }
        }
    }
    if m0 == m1 {
        return Err(Error::Invalid {
            what: "protocol clbits",
            msg: format!("m0 and m1 both {m0}"),
        });
    }
    Ok(vec![
        Instruction::h(e_a),
        Instruction::cx(e_a, e_b),
        Instruction::cx(c, e_a),
        Instruction::cx(e_b, t),
        Instruction::measure(e_a, m0),
        Instruction::cond_x(t, m0),
        Instruction::h(e_b),
        Instruction::measure(e_b, m1),
        Instruction::cond_z(c, m1),
        Instruction::reset(e_a),
        Instruction::reset(e_b),
    ])
}

/// Lowest-index comm slot on `qpu` that is "free" — already idle at the
/// layer where the protocol's data is ready — else the slot that frees
/// up soonest.
fn acquire_comm(
    layout: &PhysicalLayout,
    tracker: &DepthTracker,
    qpu: usize,
    data_ready: usize,
) -> Result<usize> {
    let count = layout.net().qpus[qpu].comm_qubits;
    if count == 0 {
        return Err(Error::NoCommQubit { qpu });
    }
    let slots = (0..count).map(|k| layout.comm_slot(qpu, k));
    slots
        .clone()
        .find(|&s| tracker.qubit_level(s) <= data_ready)
        .map_or_else(
            || {
                Ok(slots
                    .min_by_key(|&s| (tracker.qubit_level(s), s))
                    .expect("count >= 1"))
            },
            Ok,
        )
}

/// Build the distributed circuit for a transpiled `circuit` under
/// `assignment` on `net`.
pub fn distribute(
    circuit: &Circuit,
    assignment: &Assignment,
    net: &NetworkConfig,
) -> Result<DistributedCircuit> {
    if assignment.num_qubits() < circuit.num_qubits() {
        return Err(Error::UncoveredQubit {
            qubit: assignment.num_qubits(),
        });
    }
    if assignment.num_qubits() > circuit.num_qubits() {
        return Err(Error::Invalid {
            what: "assignment",
            msg: format!(
                "maps {} qubits but the circuit has {}",
                assignment.num_qubits(),
                circuit.num_qubits()
            ),
        });
    }
    for inst in circuit.instructions() {
        if !is_output_kind(&inst.kind) {
            return Err(Error::UnsupportedInstruction {
                kind: inst.kind.label().name(),
                context: "distribute (transpile first)",
            });
        }
    }
    let layout = PhysicalLayout::new(net, assignment)?;

    let is_cross = |inst: &Instruction| {
        inst.kind == GateKind::Cx
            && assignment.qpu_of[inst.qubits[0]] != assignment.qpu_of[inst.qubits[1]]
    };
    let remote_cx_count = circuit
        .instructions()
        .iter()
        .filter(|i| is_cross(i))
        .count();

    let total_clbits = circuit.num_clbits() + 2 * remote_cx_count;
    let mut out = Circuit::new(layout.total_qubits(), total_clbits);
    let mut tracker = DepthTracker::new(layout.total_qubits(), total_clbits);
    let mut protocols = Vec::with_capacity(remote_cx_count);
    let mut next_clbit = circuit.num_clbits();

    for inst in circuit.instructions() {
        if is_cross(inst) {
            let control = layout.physical(inst.qubits[0]);
            let target = layout.physical(inst.qubits[1]);
            let data_ready = tracker
                .qubit_level(control)
                .max(tracker.qubit_level(target));
            let comm_a = acquire_comm(
                &layout,
                &tracker,
                assignment.qpu_of[inst.qubits[0]],
                data_ready,
            )?;
            let comm_b = acquire_comm(
                &layout,
                &tracker,
                assignment.qpu_of[inst.qubits[1]],
                data_ready,
            )?;
            let (m0, m1) = (next_clbit, next_clbit + 1);
            next_clbit += 2;
            let start = out.instructions().len();
            for step in protocol_template(control, target, comm_a, comm_b, m0, m1)? {
                tracker.place(&step);
                out.append(step)?;
            }
            protocols.push(ProtocolSpan {
                start,
                control,
                target,
                comm_a,
                comm_b,
                m0,
                m1,
            });
        } else {
            let mapped = Instruction::new(
                inst.kind,
                inst.qubits.iter().map(|&q| layout.physical(q)).collect(),
                inst.clbit,
            );
            tracker.place(&mapped);
            out.append(mapped)?;
        }
    }
    debug_assert_eq!(out.depth(), tracker.depth());
    Ok(DistributedCircuit {
        circuit: out,
        layout,
        assignment: assignment.clone(),
        remote_cx_count,
        protocols,
        source_clbits: circuit.num_clbits(),
    })
}

/// A distributed circuit plus the metadata needed to interpret it,
/// parsed back from the text form.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub circuit: Circuit,
    pub net: NetworkConfig,
    pub assignment: Assignment,
    pub source_clbits: usize,
}

impl Bundle {
    pub fn layout(&self) -> Result<PhysicalLayout> {
        PhysicalLayout::new(&self.net, &self.assignment)
    }

    pub fn remote_cx_count(&self) -> usize {
        (self.circuit.num_clbits() - self.source_clbits) / 2
    }
}

/// Serialize a distributed circuit with `@`-prefixed metadata lines ahead
/// of the standard circuit text.
pub fn write_bundle(d: &DistributedCircuit) -> String {
    let mut s = String::new();
    writeln!(s, "@network {}", d.layout.net()).unwrap();
    let mut line = String::from("@assignment");
    for &p in &d.assignment.qpu_of {
        write!(line, " {p}").unwrap();
    }
    writeln!(s, "{line}").unwrap();
    writeln!(s, "@source-clbits {}", d.source_clbits).unwrap();
    s.push_str(&text::serialize(&d.circuit));
    s
}

pub fn parse_bundle(input: &str) -> Result<Bundle> {
    let mut net = None;
    let mut assignment = None;
    let mut source_clbits = 0usize;
    let mut body = String::new();
    for (lineno, line) in input.lines().enumerate() {
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix('@') {
            let (key, value) = rest.split_once(char::is_whitespace).ok_or(Error::Parse {
                line: lineno,
                msg: format!("metadata line {trimmed:?} has no value"),
            })?;
            match key {
                "network" => net = Some(parse_network(value.trim())?),
                "assignment" => {
                    let qpu_of = value
                        .split_whitespace()
                        .map(|tok| {
                            tok.parse::<usize>().map_err(|e| Error::Parse {
                                line: lineno,
                                msg: format!("bad QPU index {tok:?}: {e}"),
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    assignment = Some(Assignment { qpu_of });
                }
                "source-clbits" => {
                    source_clbits = value.trim().parse().map_err(|e| Error::Parse {
                        line: lineno,
                        msg: format!("bad source-clbits: {e}"),
                    })?;
                }
                other => {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("unknown metadata key {other:?}"),
                    });
                }
            }
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let circuit = text::parse(&body)?;
    let net = net.ok_or(Error::Invalid {
        what: "bundle",
        msg: "missing @network line".into(),
    })?;
    let assignment = assignment.ok_or(Error::Invalid {
        what: "bundle",
        msg: "missing @assignment line".into(),
    })?;
    if circuit.num_clbits() < source_clbits
        || !(circuit.num_clbits() - source_clbits).is_multiple_of(2)
    {
        return Err(Error::Invalid {
            what: "bundle",
            msg: format!(
                "{} clbits cannot be {} source bits plus protocol pairs",
                circuit.num_clbits(),
                source_clbits
            ),
        });
    }
    Ok(Bundle {
        circuit,
        net,
        assignment,
        source_clbits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;
    use crate::partition::{cut_weight, gp_assignment, naive_assignment, InteractionGraph};
    use crate::sim::{estimate_fidelity, simulate_ideal, NoiseParams};
    use crate::transpile::transpile;

    fn ghz8_naive(spec: &str) -> DistributedCircuit {
        let c = library::ghz(8).unwrap();
        let net = parse_network(spec).unwrap();
        let a = naive_assignment(8, &net).unwrap();
        distribute(&c, &a, &net).unwrap()
    }

    /// Reference depth: longest path in the pairwise-conflict DAG. Two
    /// instructions conflict when they share a qubit, or share a clbit
    /// that at least one of them writes.
    fn depth_oracle(c: &Circuit) -> usize {
        let insts = c.instructions();
        let mut level = vec![0usize; insts.len()];
        let mut best = 0;
        for i in 0..insts.len() {
            let mut below = 0;
            for j in 0..i {
                let share_qubit = insts[i].qubits.iter().any(|q| insts[j].qubits.contains(q));
                let clash_clbit = match (insts[i].clbit, insts[j].clbit) {
                    (Some(a), Some(b)) if a == b => {
                        insts[i].kind == GateKind::Measure || insts[j].kind == GateKind::Measure
                    }
                    _ => false,
                };
                if share_qubit || clash_clbit {
                    below = below.max(level[j]);
                }
            }
            level[i] = below + 1;
            best = best.max(level[i]);
        }
        best
    }

    #[test]
    fn ghz8_two_qpus_matches_the_table_row() {
        let d = ghz8_naive("2x4+2");
        assert_eq!(d.circuit.num_qubits(), 12);
        assert_eq!(d.remote_cx_count, 1);
        assert_eq!(d.circuit.num_clbits(), 2);
        assert_eq!(d.protocols.len(), 1);
        // 8 source instructions, one CX replaced by the protocol.
        assert_eq!(d.circuit.instructions().len(), 7 + PROTOCOL_LEN);
    }

    #[test]
    fn ghz8_eight_qpus_matches_the_table_row() {
        let d = ghz8_naive("8x1+2");
        assert_eq!(d.circuit.num_qubits(), 24);
        assert_eq!(d.remote_cx_count, 7);
        assert_eq!(d.circuit.num_clbits(), 14);
    }

    #[test]
    fn circuit_without_crossings_is_just_remapped() {
        let c = transpile(&library::random_circuit(4, 8, 12, 12).unwrap()).unwrap();
        let net = parse_network("4+2,4+2").unwrap();
        let a = Assignment {
            qpu_of: vec![1, 1, 1, 1],
        };
        let d = distribute(&c, &a, &net).unwrap();
        assert_eq!(d.remote_cx_count, 0);
        assert_eq!(d.circuit.num_clbits(), 0);
        assert_eq!(d.circuit.instructions().len(), c.instructions().len());
        // QPU 1 starts at physical 6; logical i sits at 6 + i.
        for (orig, mapped) in c.instructions().iter().zip(d.circuit.instructions()) {
            assert_eq!(orig.kind, mapped.kind);
            for (a, b) in orig.qubits.iter().zip(&mapped.qubits) {
                assert_eq!(*b, a + 6);
            }
        }
    }

    #[test]
    fn layout_places_qpus_contiguously() {
        let net = parse_network("4+2,3+1").unwrap();
        let a = naive_assignment(7, &net).unwrap();
        let l = PhysicalLayout::new(&net, &a).unwrap();
        assert_eq!(l.total_qubits(), 10);
        assert_eq!(l.qubit_map(), &[0, 1, 2, 3, 6, 7, 8]);
        assert_eq!(l.comm_slot(0, 0), 4);
        assert_eq!(l.comm_slot(0, 1), 5);
        assert_eq!(l.comm_slot(1, 0), 9);
        assert!(l.is_comm(4) && l.is_comm(9));
        assert!(!l.is_comm(3) && !l.is_comm(8));
        assert_eq!(l.qpu_of_physical(5), 0);
        assert_eq!(l.qpu_of_physical(6), 1);
    }

    #[test]
    fn layout_orders_scattered_assignments() {
        let net = parse_network("2x2+1").unwrap();
        let a = Assignment {
            qpu_of: vec![1, 0, 1, 0],
        };
        let l = PhysicalLayout::new(&net, &a).unwrap();
        // QPU0 holds logical {1,3} at physical 0,1; QPU1 holds {0,2} at 3,4.
        assert_eq!(l.qubit_map(), &[3, 0, 4, 1]);
    }

    #[test]
    fn protocol_template_shape() {
        let p = protocol_template(0, 6, 4, 10, 0, 1).unwrap();
        assert_eq!(p.len(), PROTOCOL_LEN);
        let kinds: Vec<&GateKind> = p.iter().map(|i| &i.kind).collect();
        assert_eq!(
            kinds,
            vec![
                &GateKind::H,
                &GateKind::Cx,
                &GateKind::Cx,
                &GateKind::Cx,
                &GateKind::Measure,
                &GateKind::CondX,
                &GateKind::H,
                &GateKind::Measure,
                &GateKind::CondZ,
                &GateKind::Reset,
                &GateKind::Reset,
            ]
        );
        assert!(protocol_template(0, 0, 4, 10, 0, 1).is_err());
        assert!(protocol_template(0, 6, 4, 4, 0, 1).is_err());
        assert!(protocol_template(0, 6, 4, 10, 3, 3).is_err());
    }

    #[test]
    fn distribute_rejects_untranspiled_input() {
        let c = library::grover(4, None, Some(1)).unwrap();
        let net = parse_network("2x2+2").unwrap();
        let a = naive_assignment(4, &net).unwrap();
        assert!(matches!(
            distribute(&c, &a, &net),
            Err(Error::UnsupportedInstruction { .. })
        ));
    }

    #[test]
    fn distribute_needs_comm_qubits_only_where_touched() {
        let c = library::ghz(4).unwrap();
        let net = parse_network("2+1,2+0").unwrap();
        let a = naive_assignment(4, &net).unwrap();
        // The remote CX touches QPU 1, which has no comm qubit.
        assert!(matches!(
            distribute(&c, &a, &net),
            Err(Error::NoCommQubit { qpu: 1 })
        ));
        // With the crossing kept off QPU-boundary, no comm qubit is needed.
        let net2 = parse_network("4+0").unwrap();
        let a2 = naive_assignment(4, &net2).unwrap();
        assert_eq!(distribute(&c, &a2, &net2).unwrap().remote_cx_count, 0);
    }

    #[test]
    fn remote_count_equals_cut_weight_across_schedules() {
        for seed in [1u64, 5, 9] {
            let c = transpile(&library::random_circuit(8, seed, 24, 24).unwrap()).unwrap();
            let g = InteractionGraph::from_circuit(&c).unwrap();
            for spec in ["2x4+2", "4x2+1", "4+2,2+1,2+1"] {
                let net = parse_network(spec).unwrap();
                for a in [
                    naive_assignment(8, &net).unwrap(),
                    gp_assignment(&g, &net, seed).unwrap(),
                ] {
                    let d = distribute(&c, &a, &net).unwrap();
                    assert_eq!(d.remote_cx_count as u64, cut_weight(&g, &a));
                    assert_eq!(d.protocols.len(), d.remote_cx_count);
                }
            }
        }
    }

    #[test]
    fn every_cx_is_local_except_bell_preps() {
        let c = transpile(&library::random_circuit(8, 3, 24, 24).unwrap()).unwrap();
        let net = parse_network("4x2+1").unwrap();
        let a = naive_assignment(8, &net).unwrap();
        let d = distribute(&c, &a, &net).unwrap();
        let bell_indices: Vec<usize> = d.protocols.iter().map(|p| p.start + 1).collect();
        for (i, inst) in d.circuit.instructions().iter().enumerate() {
            if inst.kind != GateKind::Cx {
                continue;
            }
            let same_qpu = d.layout.qpu_of_physical(inst.qubits[0])
                == d.layout.qpu_of_physical(inst.qubits[1]);
            if bell_indices.contains(&i) {
                assert!(!same_qpu, "Bell prep at {i} should span QPUs");
            } else {
                assert!(same_qpu, "CX at {i} spans QPUs outside a Bell prep");
            }
        }
    }

    #[test]
    fn ghz8_distributed_depth_is_ten() {
        // Hand-derived layer placement for the 2x(4+2) GHZ chain: the
        // protocol inserts a 6-layer critical path between the two halves.
        let d = ghz8_naive("2x4+2");
        assert_eq!(d.depth(), 10);
        assert_eq!(depth_oracle(&d.circuit), 10);
    }

    #[test]
    fn tracked_depth_matches_oracle_on_protocol_heavy_circuits() {
        for seed in [2u64, 4, 6] {
            let c = transpile(&library::random_circuit(8, seed, 24, 24).unwrap()).unwrap();
            for spec in ["2x4+2", "4x2+1", "8x1+1"] {
                let net = parse_network(spec).unwrap();
                let a = naive_assignment(8, &net).unwrap();
                let d = distribute(&c, &a, &net).unwrap();
                assert_eq!(d.depth(), depth_oracle(&d.circuit), "seed {seed} {spec}");
            }
        }
    }

    #[test]
    fn protocol_equals_plain_cx_on_generator_and_classical_states() {
        // |+0> -> Bell, and |10> -> |11>, with comm wires back to |0>.
        let net = parse_network("1+1,1+1").unwrap();
        let a = naive_assignment(2, &net).unwrap();
        for (prep, want) in [
            (
                vec![Instruction::h(0)],
                vec![
                    (0b00usize, std::f64::consts::FRAC_1_SQRT_2),
                    (0b11, std::f64::consts::FRAC_1_SQRT_2),
                ],
            ),
            (vec![Instruction::x(0)], vec![(0b11, 1.0)]),
        ] {
            let mut mono = Circuit::new(2, 0);
            for inst in prep {
                mono.append(inst).unwrap();
            }
            mono.append(Instruction::cx(0, 1)).unwrap();
            let d = distribute(&mono, &a, &net).unwrap();
            // Sample several measurement branches.
            for stream in 0..8 {
                let mut rng = crate::sim::trajectory_rng(99, stream);
                let traj =
                    crate::sim::run_trajectory(&d.circuit, &NoiseParams::ZERO, &mut rng).unwrap();
                let dense = traj.state.dense();
                for (idx, amp) in dense.iter().enumerate() {
                    // Physical wires: logical 0 -> 0, logical 1 -> 2.
                    let logical = (idx & 1) | ((idx >> 2) & 1) << 1;
                    let expect = if idx & 0b1010 != 0 {
                        0.0 // comm wires (1 and 3) must be |0>
                    } else {
                        want.iter()
                            .find(|(b, _)| *b == logical)
                            .map(|(_, v)| *v)
                            .unwrap_or(0.0)
                    };
                    assert!(
                        (amp.norm() - expect).abs() < 1e-9,
                        "stream {stream}, amp[{idx:b}] = {amp}, want {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn protocol_equals_plain_cx_on_random_states() {
        use rand::{Rng, SeedableRng};
        // Any 2-qubit pure state is (Ua x Ub) CX (RY x I) |00>; sweeping
        // random Euler angles covers the state space densely.
        let net = parse_network("1+1,1+1").unwrap();
        let a = naive_assignment(2, &net).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4242);
        for case in 0..200 {
            let mut mono = Circuit::new(2, 0);
            let theta = rng.random::<f64>() * std::f64::consts::PI;
            mono.append(Instruction::ry(0, theta)).unwrap();
            mono.append(Instruction::cx(0, 1)).unwrap();
            for q in 0..2 {
                mono.append(Instruction::rz(
                    q,
                    rng.random::<f64>() * std::f64::consts::TAU,
                ))
                .unwrap();
                mono.append(Instruction::ry(
                    q,
                    rng.random::<f64>() * std::f64::consts::TAU,
                ))
                .unwrap();
                mono.append(Instruction::rz(
                    q,
                    rng.random::<f64>() * std::f64::consts::TAU,
                ))
                .unwrap();
            }
            // The gate under test.
            mono.append(Instruction::cx(0, 1)).unwrap();
            let ideal = simulate_ideal(&mono).unwrap().dense();
            let d = distribute(&transpile(&mono).unwrap(), &a, &net).unwrap();
            let est = estimate_fidelity(
                &d.circuit,
                d.qubit_map(),
                &ideal,
                &NoiseParams::ZERO,
                4,
                case,
            )
            .unwrap();
            assert!(
                (est.fidelity - 1.0).abs() < 1e-9,
                "case {case}: fidelity {}",
                est.fidelity
            );
        }
    }

    #[test]
    fn noiseless_equivalence_across_schedules_and_networks() {
        let cases: Vec<(Circuit, &str)> = vec![
            (library::ghz(8).unwrap(), "2x4+2"),
            (library::ghz(8).unwrap(), "4x2+2"),
            (library::ghz(8).unwrap(), "8x1+2"),
            (
                transpile(&library::grover(4, None, Some(1)).unwrap()).unwrap(),
                "2x2+2",
            ),
            (
                transpile(&library::vqc(8, 2, 77).unwrap()).unwrap(),
                "4x2+2",
            ),
            (
                transpile(&library::random_circuit(8, 13, 24, 24).unwrap()).unwrap(),
                "2x4+1",
            ),
        ];
        for (mono, spec) in cases {
            let net = parse_network(spec).unwrap();
            let n = mono.num_qubits();
            let ideal = simulate_ideal(&mono).unwrap().dense();
            let g = InteractionGraph::from_circuit(&mono).unwrap();
            for assignment in [
                naive_assignment(n, &net).unwrap(),
                gp_assignment(&g, &net, 1).unwrap(),
            ] {
                let d = distribute(&mono, &assignment, &net).unwrap();
                let est =
                    estimate_fidelity(&d.circuit, d.qubit_map(), &ideal, &NoiseParams::ZERO, 16, 7)
                        .unwrap();
                assert!(
                    (est.fidelity - 1.0).abs() < 1e-9,
                    "{spec}: fidelity {}",
                    est.fidelity
                );
            }
        }
    }

    #[test]
    fn comm_qubits_end_inactive() {
        // Comm wires are reset after each protocol, so the lazy simulator
        // deactivates them; only the 8 data wires stay live.
        let d = ghz8_naive("2x4+2");
        let mut rng = crate::sim::trajectory_rng(1, 0);
        let traj = crate::sim::run_trajectory(&d.circuit, &NoiseParams::ZERO, &mut rng).unwrap();
        assert!(traj.state.active_qubits() <= 8);
    }

    #[test]
    fn more_comm_qubits_never_deepen_the_circuit() {
        for seed in [0u64, 3, 11] {
            let c = transpile(&library::random_circuit(12, seed, 36, 36).unwrap()).unwrap();
            let mut prev = usize::MAX;
            for comm in 1..=4 {
                let net = NetworkConfig::homogeneous(4, 3, comm);
                let a = naive_assignment(12, &net).unwrap();
                let d = distribute(&c, &a, &net).unwrap();
                assert!(
                    d.depth() <= prev,
                    "seed {seed}: depth grew from {prev} to {} at comm={comm}",
                    d.depth()
                );
                prev = d.depth();
            }
        }
    }

    #[test]
    fn parallel_protocols_interleave_when_slots_allow() {
        // Two independent crossings: with one comm slot per QPU they must
        // serialize; with two they overlap and the circuit gets shallower.
        let mut c = Circuit::new(6, 0);
        c.append(Instruction::cx(0, 3)).unwrap();
        c.append(Instruction::cx(1, 4)).unwrap();
        let a = Assignment {
            qpu_of: vec![0, 0, 0, 1, 1, 1],
        };
        let one = distribute(&c, &a, &NetworkConfig::homogeneous(2, 3, 1)).unwrap();
        let two = distribute(&c, &a, &NetworkConfig::homogeneous(2, 3, 2)).unwrap();
        assert!(
            two.depth() < one.depth(),
            "{} !< {}",
            two.depth(),
            one.depth()
        );
        assert_eq!(two.depth(), depth_oracle(&two.circuit));
    }

    #[test]
    fn bundle_round_trips() {
        let c = transpile(&library::random_circuit(8, 21, 24, 24).unwrap()).unwrap();
        let net = parse_network("2x4+2").unwrap();
        let g = InteractionGraph::from_circuit(&c).unwrap();
        let a = gp_assignment(&g, &net, 5).unwrap();
        let d = distribute(&c, &a, &net).unwrap();
        let textform = write_bundle(&d);
        let b = parse_bundle(&textform).unwrap();
        assert_eq!(b.circuit.instructions(), d.circuit.instructions());
        assert_eq!(b.net, net);
        assert_eq!(b.assignment, a);
        assert_eq!(b.source_clbits, 0);
        assert_eq!(b.remote_cx_count(), d.remote_cx_count);
        assert_eq!(b.layout().unwrap(), d.layout);
    }

    #[test]
    fn bundle_parse_rejects_malformed_metadata() {
        assert!(parse_bundle("qubits=2 clbits=0\nH 0\n").is_err()); // no metadata
        assert!(parse_bundle("@network 2x1+1\n@assignment 0 x\nqubits=4 clbits=0\n").is_err());
        assert!(parse_bundle("@network\nqubits=1 clbits=0\n").is_err());
        assert!(
            parse_bundle("@network 2x1+1\n@assignment 0 1\n@bogus 3\nqubits=4 clbits=0\n").is_err()
        );
    }
}
