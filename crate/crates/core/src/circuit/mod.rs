//! Boolean circuits and their closure.
//!
//! A circuit is a topologically ordered list of gates over primitive kinds
//! AND, OR, NOT, CONST0, CONST1 plus truth-table gates of bounded arity.
//! Wires are numbered densely: wires `0..n_in` are the circuit inputs, and
//! every gate allocates its output wires in order of appearance, so a gate can
//! only reference wires that already exist. A circuit whose output count
//! equals its input count can be closed: the closed form is read as a map
//! from input assignments to output assignments over the same wire labels,
//! and its semantics is the set of fixed points of that map.

pub mod batch;
mod build;
mod lower;

pub use batch::BatchEvaluator;
pub use build::CircuitBuilder;

use std::fmt;

use thiserror::Error;

use crate::bits::Bits;

/// Largest admissible truth-table arity.
pub const MAX_TABLE_ARITY: usize = 16;

/// Index of a wire. Wires `0..n_in` are circuit inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WireId(pub u32);

impl WireId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for WireId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0)
    }
}

/// An explicit truth table: `rows[r]` is the output vector for input index
/// `r`, where the first table operand contributes the most significant bit of
/// `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    arity: usize,
    out_width: usize,
    rows: Vec<Bits>,
}

impl TruthTable {
    pub fn new(arity: usize, rows: Vec<Bits>) -> Result<Self, CircuitError> {
        if arity > MAX_TABLE_ARITY {
            return Err(CircuitError::TableArity { arity });
        }
        let expected = 1usize << arity;
        if rows.len() != expected {
            return Err(CircuitError::TableRows { expected, found: rows.len() });
        }
        let out_width = rows.first().map(Bits::len).unwrap_or(0);
        if out_width == 0 {
            return Err(CircuitError::TableEmptyRow);
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != out_width) {
            return Err(CircuitError::TableRowWidth { expected: out_width, found: bad.len() });
        }
        Ok(TruthTable { arity, out_width, rows })
    }

    /// Table of a single-output predicate given the set of accepted input
    /// indices.
    pub fn predicate(arity: usize, accepted: impl Fn(u64) -> bool) -> Result<Self, CircuitError> {
        let rows = (0..1u64 << arity)
            .map(|r| Bits::new(vec![accepted(r)]))
            .collect();
        TruthTable::new(arity, rows)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn out_width(&self) -> usize {
        self.out_width
    }

    pub fn rows(&self) -> &[Bits] {
        &self.rows
    }

    pub fn row(&self, index: usize) -> &Bits {
        &self.rows[index]
    }
}

/// A single gate. Operand order matters only for documentation; all kinds are
/// symmetric except NOT and tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gate {
    And(WireId, WireId),
    Or(WireId, WireId),
    Not(WireId),
    Const0,
    Const1,
    Table { inputs: Vec<WireId>, table: TruthTable },
}

impl Gate {
    pub fn fan_in(&self) -> usize {
        match self {
            Gate::And(..) | Gate::Or(..) => 2,
            Gate::Not(..) => 1,
            Gate::Const0 | Gate::Const1 => 0,
            Gate::Table { inputs, .. } => inputs.len(),
        }
    }

    pub fn out_width(&self) -> usize {
        match self {
            Gate::Table { table, .. } => table.out_width(),
            _ => 1,
        }
    }

    pub fn input_wires(&self) -> Vec<WireId> {
        match self {
            Gate::And(a, b) | Gate::Or(a, b) => vec![*a, *b],
            Gate::Not(a) => vec![*a],
            Gate::Const0 | Gate::Const1 => vec![],
            Gate::Table { inputs, .. } => inputs.clone(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("gate {gate} reads wire {wire} but only wires below {limit} are defined at that point")]
    WireOutOfRange { gate: usize, wire: u32, limit: u32 },
    #[error("output {position} references undefined wire {wire}")]
    OutputOutOfRange { position: usize, wire: u32 },
    #[error("truth table arity {arity} exceeds the limit of {MAX_TABLE_ARITY}")]
    TableArity { arity: usize },
    #[error("truth table has {found} rows, expected {expected}")]
    TableRows { expected: usize, found: usize },
    #[error("truth table rows must be non-empty")]
    TableEmptyRow,
    #[error("truth table row width {found} does not match first row width {expected}")]
    TableRowWidth { expected: usize, found: usize },
    #[error("table gate {gate} lists {found} operands, table arity is {arity}")]
    TableOperandCount { gate: usize, arity: usize, found: usize },
    #[error("circuit is too large: {wires} wires exceed the addressable limit")]
    TooManyWires { wires: u64 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("input width {found} does not match circuit input count {expected}")]
    WidthMismatch { expected: usize, found: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("circuit with {n_in} inputs and {n_out} outputs cannot be closed; counts must match")]
pub struct CloseError {
    pub n_in: usize,
    pub n_out: usize,
}

/// An open circuit. Construction validates the gate list, so every held
/// instance satisfies the wiring invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    n_in: usize,
    gates: Vec<Gate>,
    outputs: Vec<WireId>,
    /// First output wire of each gate, cached at construction.
    first_wire: Vec<u32>,
    wire_count: u32,
}

impl Circuit {
    pub fn new(n_in: usize, gates: Vec<Gate>, outputs: Vec<WireId>) -> Result<Self, CircuitError> {
        let mut first_wire = Vec::with_capacity(gates.len());
        let mut next: u64 = n_in as u64;
        for (gate_index, gate) in gates.iter().enumerate() {
            if let Gate::Table { inputs, table } = gate {
                if inputs.len() != table.arity() {
                    return Err(CircuitError::TableOperandCount {
                        gate: gate_index,
                        arity: table.arity(),
                        found: inputs.len(),
                    });
                }
            }
            for w in gate.input_wires() {
                if u64::from(w.0) >= next {
                    return Err(CircuitError::WireOutOfRange {
                        gate: gate_index,
                        wire: w.0,
                        limit: next as u32,
                    });
                }
            }
            first_wire.push(next as u32);
            next += gate.out_width() as u64;
            if next > u32::MAX as u64 {
                return Err(CircuitError::TooManyWires { wires: next });
            }
        }
        for (position, w) in outputs.iter().enumerate() {
            if u64::from(w.0) >= next {
                return Err(CircuitError::OutputOutOfRange { position, wire: w.0 });
            }
        }
        Ok(Circuit {
            n_in,
            gates,
            outputs,
            first_wire,
            wire_count: next as u32,
        })
    }

    /// Re-runs the construction checks. Held circuits always pass; this is
    /// the hook for callers that want an explicit diagnostic pass.
    pub fn validate(&self) -> Result<(), CircuitError> {
        Circuit::new(self.n_in, self.gates.clone(), self.outputs.clone()).map(|_| ())
    }

    pub fn num_inputs(&self) -> usize {
        self.n_in
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[WireId] {
        &self.outputs
    }

    pub fn wire_count(&self) -> u32 {
        self.wire_count
    }

    /// First output wire of gate `g`.
    pub fn gate_wire(&self, g: usize) -> WireId {
        WireId(self.first_wire[g])
    }

    pub fn has_table_gates(&self) -> bool {
        self.gates.iter().any(|g| matches!(g, Gate::Table { .. }))
    }

    /// Evaluates the circuit on one input assignment.
    pub fn eval(&self, input: &Bits) -> Result<Bits, EvalError> {
        if input.len() != self.n_in {
            return Err(EvalError::WidthMismatch { expected: self.n_in, found: input.len() });
        }
        let mut values = vec![false; self.wire_count as usize];
        for (i, b) in input.iter().enumerate() {
            values[i] = b;
        }
        self.eval_wires(&mut values);
        Ok(Bits::new(
            self.outputs.iter().map(|w| values[w.index()]).collect(),
        ))
    }

    /// Evaluates all gates over a wire buffer whose first `n_in` entries hold
    /// the input assignment. The buffer must have `wire_count` entries.
    pub(crate) fn eval_wires(&self, values: &mut [bool]) {
        for (g, gate) in self.gates.iter().enumerate() {
            let out = self.first_wire[g] as usize;
            match gate {
                Gate::And(a, b) => values[out] = values[a.index()] & values[b.index()],
                Gate::Or(a, b) => values[out] = values[a.index()] | values[b.index()],
                Gate::Not(a) => values[out] = !values[a.index()],
                Gate::Const0 => values[out] = false,
                Gate::Const1 => values[out] = true,
                Gate::Table { inputs, table } => {
                    let mut idx = 0usize;
                    for w in inputs {
                        idx = (idx << 1) | usize::from(values[w.index()]);
                    }
                    let row = table.row(idx);
                    for (k, bit) in row.iter().enumerate() {
                        values[out + k] = bit;
                    }
                }
            }
        }
    }

    /// Closes the circuit by identifying output `i` with input `i`.
    pub fn close(self) -> Result<ClosedCircuit, CloseError> {
        if self.n_in != self.outputs.len() {
            return Err(CloseError { n_in: self.n_in, n_out: self.outputs.len() });
        }
        Ok(ClosedCircuit { inner: self })
    }

    /// Replaces every truth-table gate by a sum-of-minterms expansion over
    /// AND, OR, NOT. Circuits without table gates come back unchanged.
    pub fn lower(&self) -> Circuit {
        lower::lower(self)
    }
}

/// A closed circuit: `n_in = n_out`, outputs identified with inputs. The
/// induced map sends a state to the output assignment it produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedCircuit {
    inner: Circuit,
}

impl ClosedCircuit {
    pub fn state_width(&self) -> usize {
        self.inner.n_in
    }

    pub fn inner(&self) -> &Circuit {
        &self.inner
    }

    pub fn into_inner(self) -> Circuit {
        self.inner
    }

    /// Applies the induced map to one state.
    pub fn apply(&self, state: &Bits) -> Result<Bits, EvalError> {
        self.inner.eval(state)
    }

    /// Applies the induced map to a state given as an integer index. Bit 0 of
    /// the state string is the most significant bit of the index, so index
    /// order is lexicographic order. `scratch` is reused across calls.
    pub fn apply_index(&self, state: u64, scratch: &mut Vec<bool>) -> u64 {
        let n = self.inner.n_in;
        debug_assert!(n <= 63);
        scratch.clear();
        scratch.resize(self.inner.wire_count as usize, false);
        for i in 0..n {
            scratch[i] = (state >> (n - 1 - i)) & 1 == 1;
        }
        self.inner.eval_wires(scratch);
        let mut out = 0u64;
        for w in &self.inner.outputs {
            out = (out << 1) | u64::from(scratch[w.index()]);
        }
        out
    }
}
