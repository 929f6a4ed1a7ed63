//! Plain-text circuit serialization.
//!
//! ```text
//! qubits=<n> clbits=<m>
//! KIND q<i> [q<j> ...] [theta=<float>] [c=<k>]
//! ```
//!
//! One instruction per line; rotation angles print with Rust's shortest
//! round-trip float formatting, so `parse(serialize(c)) == c` exactly.
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use crate::circuit::{Circuit, GateKind, Instruction};
use crate::error::{Error, Result};

pub fn serialize(circuit: &Circuit) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "qubits={} clbits={}",
        circuit.num_qubits(),
        circuit.num_clbits()
    );
    for inst in circuit.instructions() {
        let _ = writeln!(out, "{}", format_instruction(inst));
    }
    out
}

pub fn format_instruction(inst: &Instruction) -> String {
    let mut line = inst.kind.label().name().to_string();
    for &q in &inst.qubits {
        let _ = write!(line, " q{q}");
    }
    match inst.kind {
        GateKind::Rz(theta) | GateKind::Ry(theta) | GateKind::Rx(theta) => {
            let _ = write!(line, " theta={theta}");
        }
        _ => {}
    }
    if let Some(c) = inst.clbit {
        let _ = write!(line, " c={c}");
    }
    line
}

pub fn parse(input: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (idx, raw) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match circuit.as_mut() {
            None => {
                let (n, m) = parse_header(line, lineno)?;
                circuit = Some(Circuit::new(n, m));
            }
            Some(c) => {
                let inst = parse_instruction(line, lineno)?;
                c.append(inst).map_err(|e| Error::Parse {
                    line: lineno,
                    msg: e.to_string(),
                })?;
            }
        }
    }
    circuit.ok_or_else(|| Error::Parse {
        line: 0,
        msg: "missing `qubits=<n> clbits=<m>` header".into(),
    })
}

fn parse_header(line: &str, lineno: usize) -> Result<(usize, usize)> {
    let err = |msg: &str| Error::Parse {
        line: lineno,
        msg: msg.into(),
    };
    let mut qubits = None;
    let mut clbits = None;
    for field in line.split_whitespace() {
        if let Some(v) = field.strip_prefix("qubits=") {
            qubits = Some(v.parse().map_err(|_| err("invalid qubit count"))?);
        } else if let Some(v) = field.strip_prefix("clbits=") {
            clbits = Some(v.parse().map_err(|_| err("invalid clbit count"))?);
        } else {
            return Err(err(&format!("unexpected header field `{field}`")));
        }
    }
    match (qubits, clbits) {
        (Some(n), Some(m)) => Ok((n, m)),
        _ => Err(err("header must be `qubits=<n> clbits=<m>`")),
    }
}

pub fn parse_instruction(line: &str, lineno: usize) -> Result<Instruction> {
    let err = |msg: String| Error::Parse { line: lineno, msg };
    let mut fields = line.split_whitespace();
    let name = fields.next().expect("caller skips blank lines");
    let mut qubits = Vec::new();
    let mut theta: Option<f64> = None;
    let mut clbit: Option<usize> = None;
    for field in fields {
        if let Some(v) = field.strip_prefix("theta=") {
            let t = v.parse().map_err(|_| err(format!("invalid angle `{v}`")))?;
            if theta.replace(t).is_some() {
                return Err(err("duplicate theta field".into()));
            }
        } else if let Some(v) = field.strip_prefix("c=") {
            let c = v.parse().map_err(|_| err(format!("invalid clbit `{v}`")))?;
            if clbit.replace(c).is_some() {
                return Err(err("duplicate clbit field".into()));
            }
        } else if let Some(v) = field.strip_prefix('q') {
            qubits.push(
                v.parse()
                    .map_err(|_| err(format!("invalid qubit operand `{field}`")))?,
            );
        } else {
            return Err(err(format!("unexpected field `{field}`")));
        }
    }
    let angle = |name: &str| theta.ok_or_else(|| err(format!("{name} requires theta=<float>")));
    let kind = match name {
        "X" => GateKind::X,
        "H" => GateKind::H,
        "RZ" => GateKind::Rz(angle("RZ")?),
        "CX" => GateKind::Cx,
        "RY" => GateKind::Ry(angle("RY")?),
        "RX" => GateKind::Rx(angle("RX")?),
        "CZ" => GateKind::Cz,
        "CCX" => GateKind::Ccx,
        "MCZ" => GateKind::Mcz(qubits.len().saturating_sub(1)),
        "MEASURE" => GateKind::Measure,
        "RESET" => GateKind::Reset,
        "CONDX" => GateKind::CondX,
        "CONDZ" => GateKind::CondZ,
        other => return Err(err(format!("unknown instruction `{other}`"))),
    };
    if theta.is_some() && !matches!(kind, GateKind::Rz(_) | GateKind::Ry(_) | GateKind::Rx(_)) {
        return Err(err(format!("{name} does not take theta")));
    }
    Ok(Instruction::new(kind, qubits, clbit))
}
