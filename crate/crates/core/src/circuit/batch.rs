//! Word-parallel evaluation: 64 assignments per pass.
//!
//! Every wire holds a 64-bit word whose lane `l` carries the wire's value
//! under assignment `l`. Primitive gates become single word operations;
//! table gates fall back to per-lane index extraction.

use super::{Circuit, Gate};

/// Reusable scratch space for 64-lane evaluation.
#[derive(Default)]
pub struct BatchEvaluator {
    values: Vec<u64>,
}

impl BatchEvaluator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Evaluates 64 assignments at once. `inputs[i]` carries input wire `i`
    /// across all lanes; `out[j]` receives output `j` the same way.
    pub fn eval_into(&mut self, circuit: &Circuit, inputs: &[u64], out: &mut Vec<u64>) {
        assert_eq!(inputs.len(), circuit.n_in);
        let values = &mut self.values;
        values.clear();
        values.resize(circuit.wire_count as usize, 0);
        values[..inputs.len()].copy_from_slice(inputs);
        for (g, gate) in circuit.gates.iter().enumerate() {
            let o = circuit.first_wire[g] as usize;
            match gate {
                Gate::And(a, b) => values[o] = values[a.index()] & values[b.index()],
                Gate::Or(a, b) => values[o] = values[a.index()] | values[b.index()],
                Gate::Not(a) => values[o] = !values[a.index()],
                Gate::Const0 => values[o] = 0,
                Gate::Const1 => values[o] = !0,
                Gate::Table { inputs, table } => {
                    let width = table.out_width();
                    for k in 0..width {
                        values[o + k] = 0;
                    }
                    for lane in 0..64 {
                        let mut idx = 0usize;
                        for w in inputs {
                            idx = (idx << 1) | ((values[w.index()] >> lane) & 1) as usize;
                        }
                        let row = table.row(idx);
                        for k in 0..width {
                            if row.get(k) {
                                values[o + k] |= 1u64 << lane;
                            }
                        }
                    }
                }
            }
        }
        out.clear();
        out.extend(circuit.outputs.iter().map(|w| values[w.index()]));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;
    use crate::circuit::{CircuitBuilder, TruthTable};

    /// Packs evaluation of `lane_inputs` through the scalar path for
    /// comparison.
    fn scalar_words(c: &Circuit, lane_inputs: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; c.num_outputs()];
        for (lane, &input) in lane_inputs.iter().enumerate() {
            let bits = Bits::from_uint(input, c.num_inputs()).unwrap();
            let result = c.eval(&bits).unwrap();
            for (j, bit) in result.iter().enumerate() {
                if bit {
                    out[j] |= 1 << lane;
                }
            }
        }
        out
    }

    fn pack_inputs(c: &Circuit, lane_inputs: &[u64]) -> Vec<u64> {
        let n = c.num_inputs();
        let mut words = vec![0u64; n];
        for (lane, &input) in lane_inputs.iter().enumerate() {
            for (i, word) in words.iter_mut().enumerate() {
                if (input >> (n - 1 - i)) & 1 == 1 {
                    *word |= 1 << lane;
                }
            }
        }
        words
    }

    #[test]
    fn batch_matches_scalar_on_mixed_gates() {
        let table = TruthTable::predicate(3, |r| matches!(r, 2 | 3 | 5 | 7)).unwrap();
        let mut b = CircuitBuilder::new(6);
        let ins = b.inputs();
        let prime = b.table(ins[0..3].to_vec(), table);
        let x = b.xor(ins[3], ins[4]);
        let m = b.mux(prime[0], x, ins[5]);
        let k = b.const1();
        let c = b.finish(vec![m, prime[0], k]);

        let lane_inputs: Vec<u64> = (0..64u64).map(|l| l % 61).collect();
        let mut eval = BatchEvaluator::new();
        let mut got = Vec::new();
        eval.eval_into(&c, &pack_inputs(&c, &lane_inputs), &mut got);
        assert_eq!(got, scalar_words(&c, &lane_inputs));
    }

    #[test]
    fn batch_handles_input_passthrough_outputs() {
        let c = CircuitBuilder::new(2).finish(vec![
            crate::circuit::WireId(1),
            crate::circuit::WireId(0),
        ]);
        let lane_inputs: Vec<u64> = (0..64u64).map(|l| l & 3).collect();
        let mut eval = BatchEvaluator::new();
        let mut got = Vec::new();
        eval.eval_into(&c, &pack_inputs(&c, &lane_inputs), &mut got);
        assert_eq!(got, scalar_words(&c, &lane_inputs));
    }
}
