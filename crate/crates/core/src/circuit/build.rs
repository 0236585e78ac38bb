//! Incremental circuit construction with the usual derived gadgets.

use super::{Circuit, Gate, TruthTable, WireId};
use crate::bits::Bits;

/// Builds a circuit gate by gate. Wire references are checked on insertion,
/// so `finish` cannot fail on wiring.
pub struct CircuitBuilder {
    n_in: usize,
    gates: Vec<Gate>,
    next_wire: u32,
}

impl CircuitBuilder {
    pub fn new(n_in: usize) -> Self {
        CircuitBuilder { n_in, gates: Vec::new(), next_wire: n_in as u32 }
    }

    pub fn input(&self, i: usize) -> WireId {
        assert!(i < self.n_in, "input {i} out of range");
        WireId(i as u32)
    }

    pub fn inputs(&self) -> Vec<WireId> {
        (0..self.n_in as u32).map(WireId).collect()
    }

    fn push(&mut self, gate: Gate) -> WireId {
        for w in gate.input_wires() {
            assert!(w.0 < self.next_wire, "gate reads undefined wire {w}");
        }
        let first = self.next_wire;
        self.next_wire += gate.out_width() as u32;
        self.gates.push(gate);
        WireId(first)
    }

    pub fn and(&mut self, a: WireId, b: WireId) -> WireId {
        self.push(Gate::And(a, b))
    }

    pub fn or(&mut self, a: WireId, b: WireId) -> WireId {
        self.push(Gate::Or(a, b))
    }

    pub fn not(&mut self, a: WireId) -> WireId {
        self.push(Gate::Not(a))
    }

    pub fn const0(&mut self) -> WireId {
        self.push(Gate::Const0)
    }

    pub fn const1(&mut self) -> WireId {
        self.push(Gate::Const1)
    }

    pub fn table(&mut self, inputs: Vec<WireId>, table: TruthTable) -> Vec<WireId> {
        assert_eq!(inputs.len(), table.arity(), "operand count != table arity");
        let width = table.out_width();
        let first = self.push(Gate::Table { inputs, table });
        (0..width as u32).map(|k| WireId(first.0 + k)).collect()
    }

    pub fn xor(&mut self, a: WireId, b: WireId) -> WireId {
        let either = self.or(a, b);
        let both = self.and(a, b);
        let not_both = self.not(both);
        self.and(either, not_both)
    }

    pub fn xnor(&mut self, a: WireId, b: WireId) -> WireId {
        let x = self.xor(a, b);
        self.not(x)
    }

    /// `sel ? on_true : on_false`.
    pub fn mux(&mut self, sel: WireId, on_true: WireId, on_false: WireId) -> WireId {
        let t = self.and(sel, on_true);
        let ns = self.not(sel);
        let f = self.and(ns, on_false);
        self.or(t, f)
    }

    /// Balanced conjunction. An empty operand list yields constant 1.
    pub fn and_tree(&mut self, wires: &[WireId]) -> WireId {
        match wires.len() {
            0 => self.const1(),
            _ => self.reduce_tree(wires.to_vec(), Gate::And),
        }
    }

    /// Balanced disjunction. An empty operand list yields constant 0.
    pub fn or_tree(&mut self, wires: &[WireId]) -> WireId {
        match wires.len() {
            0 => self.const0(),
            _ => self.reduce_tree(wires.to_vec(), Gate::Or),
        }
    }

    fn reduce_tree(&mut self, mut layer: Vec<WireId>, op: fn(WireId, WireId) -> Gate) -> WireId {
        while layer.len() > 1 {
            let mut next = Vec::with_capacity(layer.len().div_ceil(2));
            let mut it = layer.chunks_exact(2);
            for pair in &mut it {
                next.push(self.push(op(pair[0], pair[1])));
            }
            next.extend_from_slice(it.remainder());
            layer = next;
        }
        layer[0]
    }

    /// Predicate wire for bitwise equality of two equal-length vectors.
    pub fn equals(&mut self, a: &[WireId], b: &[WireId]) -> WireId {
        assert_eq!(a.len(), b.len());
        let per_bit: Vec<WireId> = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| self.xnor(x, y))
            .collect();
        self.and_tree(&per_bit)
    }

    /// Predicate wire that is true exactly when the vector equals the given
    /// constant string.
    pub fn equals_const(&mut self, wires: &[WireId], value: &Bits) -> WireId {
        assert_eq!(wires.len(), value.len());
        let per_bit: Vec<WireId> = wires
            .iter()
            .zip(value.iter())
            .map(|(&w, bit)| if bit { w } else { self.not(w) })
            .collect();
        self.and_tree(&per_bit)
    }

    /// Wires carrying the fixed string `value`.
    pub fn constant(&mut self, value: &Bits) -> Vec<WireId> {
        value
            .iter()
            .map(|b| if b { self.const1() } else { self.const0() })
            .collect()
    }

    /// Inlines `sub`, substituting `inputs` for its input wires. Returns the
    /// wires carrying the subcircuit outputs.
    pub fn append_circuit(&mut self, sub: &Circuit, inputs: &[WireId]) -> Vec<WireId> {
        assert_eq!(inputs.len(), sub.num_inputs(), "operand count mismatch");
        let mut map: Vec<WireId> = Vec::with_capacity(sub.wire_count() as usize);
        map.extend_from_slice(inputs);
        for gate in sub.gates() {
            let remapped = match gate {
                Gate::And(a, b) => Gate::And(map[a.index()], map[b.index()]),
                Gate::Or(a, b) => Gate::Or(map[a.index()], map[b.index()]),
                Gate::Not(a) => Gate::Not(map[a.index()]),
                Gate::Const0 => Gate::Const0,
                Gate::Const1 => Gate::Const1,
                Gate::Table { inputs, table } => Gate::Table {
                    inputs: inputs.iter().map(|w| map[w.index()]).collect(),
                    table: table.clone(),
                },
            };
            let width = remapped.out_width();
            let first = self.push(remapped);
            for k in 0..width as u32 {
                map.push(WireId(first.0 + k));
            }
        }
        sub.outputs().iter().map(|w| map[w.index()]).collect()
    }

    pub fn finish(self, outputs: Vec<WireId>) -> Circuit {
        Circuit::new(self.n_in, self.gates, outputs)
            .expect("builder-constructed circuit must validate")
    }
}
