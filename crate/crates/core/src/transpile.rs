//! Rewriting circuits into the {X, RZ, H, CX} basis.
//!
//! Plain structural rewriting, no optimization passes: gate counts of the
//! output are a deterministic function of the input. Every identity used
//! here is checked in the tests against [`unitary_matrix`], a dense
//! matrix builder kept separate from both simulator backends.

use num_complex::Complex64;

use crate::circuit::{Circuit, GateKind, GateLabel, Instruction};
use crate::error::{Error, Result};

/// Width cap for dense unitary comparison (64 x 64 matrices).
pub const VERIFY_MAX_WIDTH: usize = 6;

/// What [`transpile_with_report`] did, for reproducibility dumps.
#[derive(Debug, Clone)]
pub struct BasisReport {
    pub input_histogram: Vec<(GateLabel, usize)>,
    pub output_histogram: Vec<(GateLabel, usize)>,
    /// `Some(max_deviation)` when the circuit was small enough (and
    /// measurement-free) for the dense equivalence check to run.
    pub verified: Option<f64>,
}

/// Gate kinds allowed in transpiled output.
pub fn is_output_kind(kind: &GateKind) -> bool {
    matches!(
        kind,
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

/// Rewrite into the basis; measurements, resets, and conditionals pass
/// through unchanged.
pub fn transpile(circuit: &Circuit) -> Result<Circuit> {
    let mut out = Circuit::new(circuit.num_qubits(), circuit.num_clbits());
    for inst in circuit.instructions() {
        rewrite(inst, &mut out)?;
    }
    Ok(out)
}

/// [`transpile`] plus histograms and, where feasible, the dense
/// equivalence check.
pub fn transpile_with_report(circuit: &Circuit) -> Result<(Circuit, BasisReport)> {
    let out = transpile(circuit)?;
    let checkable = circuit.num_qubits() <= VERIFY_MAX_WIDTH
        && circuit.instructions().iter().all(|i| i.kind.is_unitary());
    let verified = if checkable {
        Some(verify_unitary(circuit, &out)?)
    } else {
        None
    };
    let report = BasisReport {
        input_histogram: circuit.histogram(),
        output_histogram: out.histogram(),
        verified,
    };
    Ok((out, report))
}

fn rewrite(inst: &Instruction, out: &mut Circuit) -> Result<()> {
    use std::f64::consts::{FRAC_PI_2, PI};
    let q = &inst.qubits;
    match inst.kind {
        GateKind::X
        | GateKind::H
        | GateKind::Rz(_)
        | GateKind::Cx
        | GateKind::Measure
        | GateKind::Reset
        | GateKind::CondX
        | GateKind::CondZ => out.append(inst.clone()),
        // RY(t) = RZ(pi/2) RX(t) RZ(-pi/2) as operators; the rightmost
        // factor acts first, so it is emitted first.
        GateKind::Ry(theta) => out.append_all([
            Instruction::rz(q[0], -FRAC_PI_2),
            Instruction::h(q[0]),
            Instruction::rz(q[0], theta),
            Instruction::h(q[0]),
            Instruction::rz(q[0], FRAC_PI_2),
        ]),
        // X = HZH, so RX(t) = H RZ(t) H.
        GateKind::Rx(theta) => out.append_all([
            Instruction::h(q[0]),
            Instruction::rz(q[0], theta),
            Instruction::h(q[0]),
        ]),
        GateKind::Cz => emit_cz(q[0], q[1], out),
        GateKind::Ccx => emit_toffoli(q[0], q[1], q[2], out),
        GateKind::Mcz(0) => out.append(Instruction::rz(q[0], PI)),
        GateKind::Mcz(1) => emit_cz(q[0], q[1], out),
        GateKind::Mcz(_) => emit_mcz(q, out),
    }
}

fn emit_cz(control: usize, target: usize, out: &mut Circuit) -> Result<()> {
    out.append_all([
        Instruction::h(target),
        Instruction::cx(control, target),
        Instruction::h(target),
    ])
}

/// The standard 6-CX Toffoli network with T = RZ(pi/4).
fn emit_toffoli(a: usize, b: usize, c: usize, out: &mut Circuit) -> Result<()> {
    let t = std::f64::consts::FRAC_PI_4;
    out.append_all([
        Instruction::h(c),
        Instruction::cx(b, c),
        Instruction::rz(c, -t),
        Instruction::cx(a, c),
        Instruction::rz(c, t),
        Instruction::cx(b, c),
        Instruction::rz(c, -t),
        Instruction::cx(a, c),
        Instruction::rz(b, t),
        Instruction::rz(c, t),
        Instruction::h(c),
        Instruction::cx(a, b),
        Instruction::rz(a, t),
        Instruction::rz(b, -t),
        Instruction::cx(a, b),
    ])
}

/// Ancilla-free multi-controlled Z via its phase polynomial.
///
/// The AND of n bits expands over XOR parities as
/// AND(x) = 2^(1-n) * sum over nonempty S of (-1)^(|S|+1) parity_S(x),
/// so MCZ is a product of RZ((-1)^(|S|+1) pi / 2^(n-1)) on each parity.
/// Parities are visited with one CX per step by walking, for each k, the
/// subsets of {0..k-1} in Gray-code order on wire k. Costs 2^n - 2 CX and
/// 2^n - 1 RZ; exponential, but Table-style workloads stop at a handful
/// of controls where this is far cheaper than Toffoli recursion.
fn emit_mcz(qubits: &[usize], out: &mut Circuit) -> Result<()> {
    let n = qubits.len();
    debug_assert!(n >= 3, "small cases handled by caller");
    let base = std::f64::consts::PI / f64::powi(2.0, (n - 1) as i32);
    let theta = |set_size: u32| if set_size % 2 == 1 { base } else { -base };
    for k in (0..n).rev() {
        let t = qubits[k];
        out.append(Instruction::rz(t, theta(1)))?;
        if k == 0 {
            continue;
        }
        let mut prev = 0usize;
        for i in 1..(1usize << k) {
            let gray = i ^ (i >> 1);
            let toggled = (gray ^ prev).trailing_zeros() as usize;
            out.append(Instruction::cx(qubits[toggled], t))?;
            out.append(Instruction::rz(t, theta(gray.count_ones() + 1)))?;
            prev = gray;
        }
        // The walk ends on the single-bit set {k-1}; one CX restores the
        // wire to its own value.
        out.append(Instruction::cx(qubits[prev.trailing_zeros() as usize], t))?;
    }
    Ok(())
}

/// Dense unitary of a measurement-free circuit, row-major, index bit q =
/// qubit q. Independent of the simulator backends on purpose.
pub fn unitary_matrix(circuit: &Circuit) -> Result<Vec<Complex64>> {
    if circuit.num_qubits() > VERIFY_MAX_WIDTH {
        return Err(Error::WidthTooLarge {
            width: circuit.num_qubits(),
            max: VERIFY_MAX_WIDTH,
        });
    }
    for inst in circuit.instructions() {
        if !inst.kind.is_unitary() {
            return Err(Error::UnsupportedInstruction {
                kind: inst.kind.label().name(),
                context: "unitary_matrix",
            });
        }
    }
    let dim = 1usize << circuit.num_qubits();
    let mut columns: Vec<Vec<Complex64>> = (0..dim)
        .map(|j| {
            let mut col = vec![Complex64::new(0.0, 0.0); dim];
            col[j] = Complex64::new(1.0, 0.0);
            col
        })
        .collect();
    for inst in circuit.instructions() {
        for col in columns.iter_mut() {
            apply_dense(col, inst);
        }
    }
    let mut flat = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (j, col) in columns.iter().enumerate() {
        for (i, amp) in col.iter().enumerate() {
            flat[i * dim + j] = *amp;
        }
    }
    Ok(flat)
}

fn apply_dense(v: &mut [Complex64], inst: &Instruction) {
    let q = &inst.qubits;
    match inst.kind {
        GateKind::X => {
            let m = 1usize << q[0];
            for i in 0..v.len() {
                if i & m == 0 {
                    v.swap(i, i | m);
                }
            }
        }
        GateKind::H => {
            let m = 1usize << q[0];
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..v.len() {
                if i & m == 0 {
                    let (a, b) = (v[i], v[i | m]);
                    v[i] = s * (a + b);
                    v[i | m] = s * (a - b);
                }
            }
        }
        GateKind::Rz(theta) => {
            let m = 1usize << q[0];
            let lo = Complex64::from_polar(1.0, -theta / 2.0);
            let hi = Complex64::from_polar(1.0, theta / 2.0);
            for (i, amp) in v.iter_mut().enumerate() {
                *amp *= if i & m == 0 { lo } else { hi };
            }
        }
        GateKind::Ry(theta) => {
            let m = 1usize << q[0];
            let (sin, cos) = (theta / 2.0).sin_cos();
            for i in 0..v.len() {
                if i & m == 0 {
                    let (a, b) = (v[i], v[i | m]);
                    v[i] = cos * a - sin * b;
                    v[i | m] = sin * a + cos * b;
                }
            }
        }
        GateKind::Rx(theta) => {
            let m = 1usize << q[0];
            let (sin, cos) = (theta / 2.0).sin_cos();
            let isin = Complex64::new(0.0, -sin);
            for i in 0..v.len() {
                if i & m == 0 {
                    let (a, b) = (v[i], v[i | m]);
                    v[i] = cos * a + isin * b;
                    v[i | m] = isin * a + cos * b;
                }
            }
        }
        GateKind::Cx => {
            let mc = 1usize << q[0];
            let mt = 1usize << q[1];
            for i in 0..v.len() {
                if i & mc != 0 && i & mt == 0 {
                    v.swap(i, i | mt);
                }
            }
        }
        GateKind::Cz => {
            let mask = (1usize << q[0]) | (1usize << q[1]);
            for (i, amp) in v.iter_mut().enumerate() {
                if i & mask == mask {
                    *amp = -*amp;
                }
            }
        }
        GateKind::Ccx => {
            let mc = (1usize << q[0]) | (1usize << q[1]);
            let mt = 1usize << q[2];
            for i in 0..v.len() {
                if i & mc == mc && i & mt == 0 {
                    v.swap(i, i | mt);
                }
            }
        }
        GateKind::Mcz(_) => {
            let mask: usize = q.iter().map(|&b| 1usize << b).sum();
            for (i, amp) in v.iter_mut().enumerate() {
                if i & mask == mask {
                    *amp = -*amp;
                }
            }
        }
        GateKind::Measure | GateKind::Reset | GateKind::CondX | GateKind::CondZ => {
            unreachable!("caller filters non-unitary kinds")
        }
    }
}

/// Max-abs entrywise deviation between the two circuit unitaries,
/// minimized over a global phase (estimated from the largest entry of
/// `a`'s matrix). Zero means equal up to global phase.
pub fn verify_unitary(a: &Circuit, b: &Circuit) -> Result<f64> {
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::WidthMismatch {
            left: a.num_qubits(),
            right: b.num_qubits(),
        });
    }
    let ua = unitary_matrix(a)?;
    let ub = unitary_matrix(b)?;
    let k = (0..ua.len())
        .max_by(|&x, &y| {
            ua[x]
                .norm_sqr()
                .partial_cmp(&ua[y].norm_sqr())
                .expect("finite entries")
        })
        .expect("nonempty matrix");
    // A unitary's largest entry is at least dim^(-1/2), so ua[k] != 0.
    let ratio = ub[k] / ua[k];
    let phase = if ratio.norm() < 1e-12 {
        Complex64::new(1.0, 0.0)
    } else {
        ratio / ratio.norm()
    };
    Ok(ua
        .iter()
        .zip(&ub)
        .map(|(x, y)| (y - phase * x).norm())
        .fold(0.0, f64::max))
}
