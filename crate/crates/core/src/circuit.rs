//! Gate-level circuit representation.
//!
//! A [`Circuit`] is an ordered list of [`Instruction`]s over `num_qubits`
//! qubit indices. Each non-measurement gate is one layer, so the depth of a
//! circuit is simply its number of unitary gates. An optional `measure`
//! (measure all qubits) may only appear as the last instruction.
//!
//! The native basis is {X, H, Z, S, T, RZ, CX, SWAP}. Daggers of S and T are
//! expressed as `RZ(-pi/2)` and `RZ(-pi/4)`, which equal S† and T† up to a
//! global phase.
//!
//! # Text format
//!
//! ```text
//! # comment
//! qubits 3
//! x 0
//! cx 0 1
//! rz 2 0.25
//! measure
//! ```

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZneError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    X(usize),
    H(usize),
    Z(usize),
    S(usize),
    T(usize),
    Rz(usize, f64),
    Cx(usize, usize),
    Swap(usize, usize),
    MeasureAll,
}

impl Gate {
    pub fn is_measurement(&self) -> bool {
        matches!(self, Gate::MeasureAll)
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cx(..) | Gate::Swap(..))
    }

    /// Qubits touched by the gate. Empty for `MeasureAll`.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::X(q) | Gate::H(q) | Gate::Z(q) | Gate::S(q) | Gate::T(q) | Gate::Rz(q, _) => {
                vec![q]
            }
            Gate::Cx(a, b) | Gate::Swap(a, b) => vec![a, b],
            Gate::MeasureAll => Vec::new(),
        }
    }

    /// The unordered pair a two-qubit gate acts on, smaller index first.
    pub fn pair(&self) -> Option<(usize, usize)> {
        match *self {
            Gate::Cx(a, b) | Gate::Swap(a, b) => Some((a.min(b), a.max(b))),
            _ => None,
        }
    }

    pub fn dagger(&self) -> Result<Gate> {
        Ok(match *self {
            Gate::S(q) => Gate::Rz(q, -FRAC_PI_2),
            Gate::T(q) => Gate::Rz(q, -FRAC_PI_4),
            Gate::Rz(q, theta) => Gate::Rz(q, -theta),
            Gate::MeasureAll => return Err(ZneError::ContainsMeasurement),
            g => g,
        })
    }

    /// Relabel qubit indices through `f`.
    pub fn map_qubits(&self, mut f: impl FnMut(usize) -> usize) -> Gate {
        match *self {
            Gate::X(q) => Gate::X(f(q)),
            Gate::H(q) => Gate::H(f(q)),
            Gate::Z(q) => Gate::Z(f(q)),
            Gate::S(q) => Gate::S(f(q)),
            Gate::T(q) => Gate::T(f(q)),
            Gate::Rz(q, t) => Gate::Rz(f(q), t),
            Gate::Cx(a, b) => Gate::Cx(f(a), f(b)),
            Gate::Swap(a, b) => Gate::Swap(f(a), f(b)),
            Gate::MeasureAll => Gate::MeasureAll,
        }
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= num_qubits {
                return Err(ZneError::QubitOutOfRange { qubit: q, num_qubits });
            }
        }
        match *self {
            Gate::Cx(a, b) | Gate::Swap(a, b) if a == b => Err(ZneError::InvalidGate(format!(
                "two-qubit gate on repeated qubit {a}"
            ))),
            Gate::Rz(_, t) if !t.is_finite() => {
                Err(ZneError::InvalidGate(format!("non-finite rz angle {t}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::X(q) => write!(f, "x {q}"),
            Gate::H(q) => write!(f, "h {q}"),
            Gate::Z(q) => write!(f, "z {q}"),
            Gate::S(q) => write!(f, "s {q}"),
            Gate::T(q) => write!(f, "t {q}"),
            // `{}` on f64 prints the shortest string that parses back exactly.
            Gate::Rz(q, t) => write!(f, "rz {q} {t}"),
            Gate::Cx(a, b) => write!(f, "cx {a} {b}"),
            Gate::Swap(a, b) => write!(f, "swap {a} {b}"),
            Gate::MeasureAll => write!(f, "measure"),
        }
    }
}

/// A gate plus the folding tag. Gates inserted by a folding pass carry
/// `fold_inserted = true` so later passes never cancel them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Instruction {
    pub gate: Gate,
    pub fold_inserted: bool,
}

impl Instruction {
    pub fn new(gate: Gate) -> Self {
        Self {
            gate,
            fold_inserted: false,
        }
    }

    pub fn folded(gate: Gate) -> Self {
        Self {
            gate,
            fold_inserted: true,
        }
    }
}

impl From<Gate> for Instruction {
    fn from(gate: Gate) -> Self {
        Instruction::new(gate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    ops: Vec<Instruction>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(ZneError::InvalidArgument(
                "a circuit needs at least one qubit".into(),
            ));
        }
        Ok(Self {
            num_qubits,
            ops: Vec::new(),
        })
    }

    pub fn from_gates(num_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Self::new(num_qubits)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn from_instructions(
        num_qubits: usize,
        ops: impl IntoIterator<Item = Instruction>,
    ) -> Result<Self> {
        let mut c = Self::new(num_qubits)?;
        for op in ops {
            c.push_instruction(op)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        self.push_instruction(Instruction::new(gate))
    }

    pub fn push_instruction(&mut self, op: Instruction) -> Result<()> {
        if self.is_measured() {
            return Err(ZneError::MeasureNotLast);
        }
        op.gate.validate(self.num_qubits)?;
        self.ops.push(op);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.ops
    }

    /// Every instruction except a trailing measurement.
    pub fn unitary_part(&self) -> &[Instruction] {
        if self.is_measured() {
            &self.ops[..self.ops.len() - 1]
        } else {
            &self.ops
        }
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> + '_ {
        self.ops.iter().map(|op| &op.gate)
    }

    pub fn is_measured(&self) -> bool {
        self.ops.last().is_some_and(|op| op.gate.is_measurement())
    }

    /// Number of unitary layers (one gate per layer).
    pub fn depth(&self) -> usize {
        self.unitary_part().len()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn fold_inserted_count(&self) -> usize {
        self.ops.iter().filter(|op| op.fold_inserted).count()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates().filter(|g| g.is_two_qubit()).count()
    }

    /// Builds a circuit with the same register from `unitary` and re-appends
    /// the measurement if this circuit had one.
    pub(crate) fn with_unitary(&self, unitary: Vec<Instruction>) -> Result<Circuit> {
        let mut out = Circuit::from_instructions(self.num_qubits, unitary)?;
        if self.is_measured() {
            out.push(Gate::MeasureAll)?;
        }
        Ok(out)
    }

    /// Relabels qubits through `map[old] = new` onto a `num_qubits` register.
    pub fn relabel(&self, num_qubits: usize, map: &[usize]) -> Result<Circuit> {
        let mut out = Circuit::new(num_qubits)?;
        for op in &self.ops {
            let gate = op.gate.map_qubits(|q| map[q]);
            out.push_instruction(Instruction {
                gate,
                fold_inserted: op.fold_inserted,
            })?;
        }
        Ok(out)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.num_qubits)?;
        for op in &self.ops {
            writeln!(f, "{}", op.gate)?;
        }
        Ok(())
    }
}

impl FromStr for Circuit {
    type Err = ZneError;

    fn from_str(s: &str) -> Result<Self> {
        parse_circuit(s)
    }
}

/// Dagger of a measurement-free gate sequence: order reversed, each gate
/// replaced by its inverse. Fold tags are carried over unchanged.
pub fn inverse(segment: &[Instruction]) -> Result<Vec<Instruction>> {
    segment
        .iter()
        .rev()
        .map(|op| {
            Ok(Instruction {
                gate: op.gate.dagger()?,
                fold_inserted: op.fold_inserted,
            })
        })
        .collect()
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |msg: String| ZneError::Syntax { line: line_no, msg };
        let mut words = line.split_whitespace();
        let mnemonic = words.next().unwrap_or("").to_ascii_lowercase();
        let args: Vec<&str> = words.collect();

        let Some(c) = circuit.as_mut() else {
            if mnemonic != "qubits" {
                return Err(syntax(format!(
                    "expected `qubits <n>` header, found `{mnemonic}`"
                )));
            }
            let [n] = args.as_slice() else {
                return Err(syntax("`qubits` takes exactly one argument".into()));
            };
            let n: usize = n
                .parse()
                .map_err(|_| syntax(format!("invalid qubit count `{n}`")))?;
            circuit = Some(Circuit::new(n).map_err(|e| syntax(e.to_string()))?);
            continue;
        };

        let qubit = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| syntax(format!("invalid qubit index `{s}`")))
        };
        let expect_args = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(syntax(format!(
                    "`{mnemonic}` takes {n} argument(s), got {}",
                    args.len()
                )))
            }
        };

        let gate = match mnemonic.as_str() {
            "x" | "h" | "z" | "s" | "t" => {
                expect_args(1)?;
                let q = qubit(args[0])?;
                match mnemonic.as_str() {
                    "x" => Gate::X(q),
                    "h" => Gate::H(q),
                    "z" => Gate::Z(q),
                    "s" => Gate::S(q),
                    _ => Gate::T(q),
                }
            }
            "rz" => {
                expect_args(2)?;
                let theta: f64 = args[1]
                    .parse()
                    .map_err(|_| syntax(format!("invalid angle `{}`", args[1])))?;
                Gate::Rz(qubit(args[0])?, theta)
            }
            "cx" | "swap" => {
                expect_args(2)?;
                let (a, b) = (qubit(args[0])?, qubit(args[1])?);
                if mnemonic == "cx" {
                    Gate::Cx(a, b)
                } else {
                    Gate::Swap(a, b)
                }
            }
            "measure" => {
                expect_args(0)?;
                Gate::MeasureAll
            }
            "qubits" => return Err(syntax("duplicate `qubits` header".into())),
            other => return Err(syntax(format!("unknown instruction `{other}`"))),
        };
        c.push(gate).map_err(|e| match e {
            e @ (ZneError::QubitOutOfRange { .. } | ZneError::MeasureNotLast) => e,
            e => syntax(e.to_string()),
        })?;
    }
    circuit.ok_or(ZneError::Syntax {
        line: 0,
        msg: "missing `qubits <n>` header".into(),
    })
}

/// X on qubit 0 followed by a CX ladder between neighbours. The noiseless
/// output is the all-ones bitstring.
pub fn cnot_chain(n: usize) -> Result<Circuit> {
    if n < 2 {
        return Err(ZneError::InvalidArgument(format!(
            "cnot chain needs at least 2 qubits, got {n}"
        )));
    }
    let gates = std::iter::once(Gate::X(0))
        .chain((0..n - 1).map(|q| Gate::Cx(q, q + 1)))
        .chain(std::iter::once(Gate::MeasureAll));
    Circuit::from_gates(n, gates)
}

/// Bernstein-Vazirani circuit for `secret` (character `i` is data qubit `i`).
/// The ancilla is qubit `secret.len()`.
pub fn bernstein_vazirani(secret: &str) -> Result<Circuit> {
    let bits = parse_bits(secret)?;
    if bits.is_empty() {
        return Err(ZneError::InvalidArgument("empty secret".into()));
    }
    let n = bits.len();
    let anc = n;
    let mut c = Circuit::new(n + 1)?;
    for q in 0..n {
        c.push(Gate::H(q))?;
    }
    c.push(Gate::X(anc))?;
    c.push(Gate::H(anc))?;
    for (q, &b) in bits.iter().enumerate() {
        if b {
            c.push(Gate::Cx(q, anc))?;
        }
    }
    for q in 0..n {
        c.push(Gate::H(q))?;
    }
    c.push(Gate::MeasureAll)?;
    Ok(c)
}

pub(crate) fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|ch| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(ZneError::InvalidArgument(format!(
                "bitstring contains `{other}`"
            ))),
        })
        .collect()
}
