//! Expansion of truth-table gates into AND, OR, NOT.
//!
//! Each table output bit becomes a sum of minterms: one AND tree per
//! accepting row, joined by a balanced OR tree. Rows that accept nothing
//! lower to constant 0 and rows that accept everything to constant 1.
//! Negated operands are shared within a single table gate.

use super::{Circuit, CircuitBuilder, Gate, WireId};

pub(super) fn lower(circuit: &Circuit) -> Circuit {
    if !circuit.has_table_gates() {
        return circuit.clone();
    }
    let mut b = CircuitBuilder::new(circuit.num_inputs());
    let mut map: Vec<WireId> = (0..circuit.num_inputs() as u32).map(WireId).collect();
    for gate in circuit.gates() {
        match gate {
            Gate::And(x, y) => {
                let w = b.and(map[x.index()], map[y.index()]);
                map.push(w);
            }
            Gate::Or(x, y) => {
                let w = b.or(map[x.index()], map[y.index()]);
                map.push(w);
            }
            Gate::Not(x) => {
                let w = b.not(map[x.index()]);
                map.push(w);
            }
            Gate::Const0 => {
                let w = b.const0();
                map.push(w);
            }
            Gate::Const1 => {
                let w = b.const1();
                map.push(w);
            }
            Gate::Table { inputs, table } => {
                let operands: Vec<WireId> = inputs.iter().map(|w| map[w.index()]).collect();
                let mut negated: Vec<Option<WireId>> = vec![None; operands.len()];
                let row_count = table.rows().len();
                for out_bit in 0..table.out_width() {
                    let accepting: Vec<usize> = (0..row_count)
                        .filter(|&r| table.row(r).get(out_bit))
                        .collect();
                    let wire = if accepting.is_empty() {
                        b.const0()
                    } else if accepting.len() == row_count {
                        b.const1()
                    } else {
                        let minterms: Vec<WireId> = accepting
                            .iter()
                            .map(|&r| {
                                let literals: Vec<WireId> = operands
                                    .iter()
                                    .enumerate()
                                    .map(|(j, &op)| {
                                        // Operand 0 is the most significant
                                        // bit of the row index.
                                        let bit = (r >> (operands.len() - 1 - j)) & 1 == 1;
                                        if bit {
                                            op
                                        } else {
                                            *negated[j].get_or_insert_with(|| b.not(op))
                                        }
                                    })
                                    .collect();
                                b.and_tree(&literals)
                            })
                            .collect();
                        b.or_tree(&minterms)
                    };
                    map.push(wire);
                }
            }
        }
    }
    let outputs = circuit.outputs().iter().map(|w| map[w.index()]).collect();
    b.finish(outputs)
}
