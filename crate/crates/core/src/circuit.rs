//! Circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered list of [`Instruction`]s over `num_qubits`
//! qubit wires and `num_clbits` classical bits. Qubit 0 is the least
//! significant bit of a computational-basis index everywhere in this crate.
//! Instructions are validated as they are appended; once constructed a
//! circuit is only read, so sharing `&Circuit` across worker threads is safe.

use crate::error::{Error, Result};

/// The gate and non-unitary instruction kinds the toolkit understands.
///
/// `X`, `H`, `Rz`, `Cx` form the hardware basis every circuit is lowered to.
/// `Ry`, `Rx`, `Cz`, `Ccx`, `Mcz` appear in generator output and are removed
/// by transpilation. `Measure`, `Reset`, `CondX`, `CondZ` are the plumbing of
/// the remote-CX protocol: a measurement writes one clbit, and a conditional
/// applies its Pauli only when the recorded bit is 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    X,
    H,
    Rz(f64),
    Cx,
    Ry(f64),
    Rx(f64),
    Cz,
    Ccx,
    /// Multi-controlled Z with this many controls (arity = controls + 1).
    Mcz(usize),
    Measure,
    Reset,
    CondX,
    CondZ,
}

/// Parameter-free discriminant of [`GateKind`], used for counting and
/// histogram reports where the rotation angle is irrelevant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateLabel {
    X,
    H,
    Rz,
    Cx,
    Ry,
    Rx,
    Cz,
    Ccx,
    Mcz,
    Measure,
    Reset,
    CondX,
    CondZ,
}

impl GateKind {
    pub fn label(&self) -> GateLabel {
        match self {
            GateKind::X => GateLabel::X,
            GateKind::H => GateLabel::H,
            GateKind::Rz(_) => GateLabel::Rz,
            GateKind::Cx => GateLabel::Cx,
            GateKind::Ry(_) => GateLabel::Ry,
            GateKind::Rx(_) => GateLabel::Rx,
            GateKind::Cz => GateLabel::Cz,
            GateKind::Ccx => GateLabel::Ccx,
            GateKind::Mcz(_) => GateLabel::Mcz,
            GateKind::Measure => GateLabel::Measure,
            GateKind::Reset => GateLabel::Reset,
            GateKind::CondX => GateLabel::CondX,
            GateKind::CondZ => GateLabel::CondZ,
        }
    }

    /// Number of qubit operands this kind requires.
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cx | GateKind::Cz => 2,
            GateKind::Ccx => 3,
            GateKind::Mcz(controls) => controls + 1,
            _ => 1,
        }
    }

    /// Unitary gates, as opposed to measurement/reset/conditional plumbing.
    pub fn is_unitary(&self) -> bool {
        !matches!(
            self,
            GateKind::Measure | GateKind::Reset | GateKind::CondX | GateKind::CondZ
        )
    }

    /// Member of the hardware basis {X, RZ, H, CX} (plumbing passes through
    /// transpilation untouched and also counts as basis here).
    pub fn is_basis(&self) -> bool {
        matches!(
            self,
            GateKind::X
                | GateKind::H
                | GateKind::Rz(_)
                | GateKind::Cx
                | GateKind::Measure
                | GateKind::Reset
                | GateKind::CondX
                | GateKind::CondZ
        )
    }

    fn uses_clbit(&self) -> ClbitUse {
        match self {
            GateKind::Measure => ClbitUse::Writes,
            GateKind::CondX | GateKind::CondZ => ClbitUse::Reads,
            _ => ClbitUse::None,
        }
    }
}

impl GateLabel {
    pub fn name(&self) -> &'static str {
        match self {
            GateLabel::X => "X",
            GateLabel::H => "H",
            GateLabel::Rz => "RZ",
            GateLabel::Cx => "CX",
            GateLabel::Ry => "RY",
            GateLabel::Rx => "RX",
            GateLabel::Cz => "CZ",
            GateLabel::Ccx => "CCX",
            GateLabel::Mcz => "MCZ",
            GateLabel::Measure => "MEASURE",
            GateLabel::Reset => "RESET",
            GateLabel::CondX => "CONDX",
            GateLabel::CondZ => "CONDZ",
        }
    }

    /// All labels, in the order histograms are reported.
    pub fn all() -> &'static [GateLabel] {
        &[
            GateLabel::X,
            GateLabel::H,
            GateLabel::Rz,
            GateLabel::Cx,
            GateLabel::Ry,
            GateLabel::Rx,
            GateLabel::Cz,
            GateLabel::Ccx,
            GateLabel::Mcz,
            GateLabel::Measure,
            GateLabel::Reset,
            GateLabel::CondX,
            GateLabel::CondZ,
        ]
    }
}

#[derive(Clone, Copy, PartialEq)]
enum ClbitUse {
    None,
    Writes,
    Reads,
}

/// One gate or plumbing operation applied to specific wires.
#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    /// Written by `Measure`, read by `CondX`/`CondZ`, `None` otherwise.
    pub clbit: Option<usize>,
}

impl Instruction {
    pub fn new(kind: GateKind, qubits: Vec<usize>, clbit: Option<usize>) -> Self {
        Instruction {
            kind,
            qubits,
            clbit,
        }
    }

    pub fn x(q: usize) -> Self {
        Self::new(GateKind::X, vec![q], None)
    }
    pub fn h(q: usize) -> Self {
        Self::new(GateKind::H, vec![q], None)
    }
    pub fn rz(q: usize, theta: f64) -> Self {
        Self::new(GateKind::Rz(theta), vec![q], None)
    }
    pub fn ry(q: usize, theta: f64) -> Self {
        Self::new(GateKind::Ry(theta), vec![q], None)
    }
    pub fn rx(q: usize, theta: f64) -> Self {
        Self::new(GateKind::Rx(theta), vec![q], None)
    }
    pub fn cx(c: usize, t: usize) -> Self {
        Self::new(GateKind::Cx, vec![c, t], None)
    }
    pub fn cz(a: usize, b: usize) -> Self {
        Self::new(GateKind::Cz, vec![a, b], None)
    }
    pub fn ccx(c0: usize, c1: usize, t: usize) -> Self {
        Self::new(GateKind::Ccx, vec![c0, c1, t], None)
    }
    pub fn mcz(qubits: Vec<usize>) -> Self {
        let controls = qubits.len().saturating_sub(1);
        Self::new(GateKind::Mcz(controls), qubits, None)
    }
    pub fn measure(q: usize, c: usize) -> Self {
        Self::new(GateKind::Measure, vec![q], Some(c))
    }
    pub fn reset(q: usize) -> Self {
        Self::new(GateKind::Reset, vec![q], None)
    }
    pub fn cond_x(q: usize, c: usize) -> Self {
        Self::new(GateKind::CondX, vec![q], Some(c))
    }
    pub fn cond_z(q: usize, c: usize) -> Self {
        Self::new(GateKind::CondZ, vec![q], Some(c))
    }
}

/// An ordered instruction list over a fixed register of qubits and clbits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    num_clbits: usize,
    instructions: Vec<Instruction>,
    /// Which clbits have been written by a Measure so far; conditionals may
    /// only read bits that are already written (enforced by `append`).
    written: Vec<bool>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        Circuit {
            num_qubits,
            num_clbits,
            instructions: Vec::new(),
            written: vec![false; num_clbits],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Validate `inst` against this circuit's registers and append it.
    /// Appending never touches earlier instructions.
    pub fn append(&mut self, inst: Instruction) -> Result<()> {
        let kind_name = inst.kind.label().name();
        let expected = inst.kind.arity();
        if inst.qubits.len() != expected {
            return Err(Error::ArityMismatch {
                kind: kind_name,
                expected,
                got: inst.qubits.len(),
            });
        }
        for (i, &q) in inst.qubits.iter().enumerate() {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    width: self.num_qubits,
                });
            }
            if inst.qubits[..i].contains(&q) {
                return Err(Error::DuplicateQubit { qubit: q });
            }
        }
        match (inst.kind.uses_clbit(), inst.clbit) {
            (ClbitUse::None, Some(_)) => {
                return Err(Error::UnexpectedClbit { kind: kind_name });
            }
            (ClbitUse::None, None) => {}
            (_, None) => {
                return Err(Error::MissingClbit { kind: kind_name });
            }
            (use_, Some(c)) => {
                if c >= self.num_clbits {
                    return Err(Error::ClbitOutOfRange {
                        clbit: c,
                        num_clbits: self.num_clbits,
                    });
                }
                match use_ {
                    ClbitUse::Writes => self.written[c] = true,
                    ClbitUse::Reads => {
                        if !self.written[c] {
                            return Err(Error::ReadBeforeWrite { clbit: c });
                        }
                    }
                    ClbitUse::None => unreachable!(),
                }
            }
        }
        self.instructions.push(inst);
        Ok(())
    }

    pub fn append_all<I: IntoIterator<Item = Instruction>>(&mut self, insts: I) -> Result<()> {
        for inst in insts {
            self.append(inst)?;
        }
        Ok(())
    }

    /// Longest dependency chain. Two instructions conflict when they share a
    /// qubit, or share a clbit with at least one of them writing it; every
    /// instruction (measurements, resets and conditionals included) occupies
    /// one layer. The empty circuit has depth 0.
    pub fn depth(&self) -> usize {
        let mut tracker = DepthTracker::new(self.num_qubits, self.num_clbits);
        for inst in &self.instructions {
            tracker.place(inst);
        }
        tracker.depth()
    }

    /// Count instructions whose label is in `labels` (angles ignored).
    pub fn count_gates(&self, labels: &[GateLabel]) -> usize {
        self.instructions
            .iter()
            .filter(|inst| labels.contains(&inst.kind.label()))
            .count()
    }

    /// Instruction count per label, reported in [`GateLabel::all`] order and
    /// skipping labels that never occur.
    pub fn histogram(&self) -> Vec<(GateLabel, usize)> {
        GateLabel::all()
            .iter()
            .map(|&label| (label, self.count_gates(&[label])))
            .filter(|&(_, n)| n > 0)
            .collect()
    }
}

/// Incremental form of the [`Circuit::depth`] dependency rule. The
/// distributor also uses it while expanding remote CXs, so that "a comm
/// qubit is free" means exactly "its last use sits at a layer no deeper
/// than the new protocol's operands".
pub(crate) struct DepthTracker {
    qubit_level: Vec<usize>,
    clbit_write_level: Vec<usize>,
    clbit_read_level: Vec<usize>,
    max_level: usize,
}

impl DepthTracker {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        DepthTracker {
            qubit_level: vec![0; num_qubits],
            clbit_write_level: vec![0; num_clbits],
            clbit_read_level: vec![0; num_clbits],
            max_level: 0,
        }
    }

    /// Layer the instruction lands on (1-based), updating wire levels.
    pub fn place(&mut self, inst: &Instruction) -> usize {
        let mut ready = 0;
        for &q in &inst.qubits {
            ready = ready.max(self.qubit_level[q]);
        }
        if let Some(c) = inst.clbit {
            match inst.kind.uses_clbit() {
                // A write must come after every earlier write and read.
                ClbitUse::Writes => {
                    ready = ready
                        .max(self.clbit_write_level[c])
                        .max(self.clbit_read_level[c]);
                }
                // A read must come after the write; reads commute.
                ClbitUse::Reads => ready = ready.max(self.clbit_write_level[c]),
                ClbitUse::None => {}
            }
        }
        let level = ready + 1;
        for &q in &inst.qubits {
            self.qubit_level[q] = level;
        }
        if let Some(c) = inst.clbit {
            match inst.kind.uses_clbit() {
                ClbitUse::Writes => self.clbit_write_level[c] = level,
                ClbitUse::Reads => self.clbit_read_level[c] = self.clbit_read_level[c].max(level),
                ClbitUse::None => {}
            }
        }
        self.max_level = self.max_level.max(level);
        level
    }

    pub fn qubit_level(&self, q: usize) -> usize {
        self.qubit_level[q]
    }

    pub fn depth(&self) -> usize {
        self.max_level
    }
}
