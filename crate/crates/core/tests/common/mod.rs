//! Shared generators for the integration suites. Everything is driven by a
//! caller-seeded RNG so failures replay exactly.

use rand::Rng;

use noncausal_core::{Bits, CircuitBuilder, ClosedCircuit, TruthTable, WireId};

/// A random closed circuit over `width` state bits mixing every gate kind.
/// Operands always reference earlier wires, so the result is well formed by
/// construction.
pub fn random_closed_circuit(rng: &mut impl Rng, width: usize) -> ClosedCircuit {
    assert!(width >= 1);
    let mut b = CircuitBuilder::new(width);
    let mut wires: Vec<WireId> = (0..width).map(|i| b.input(i)).collect();
    let gate_count = rng.gen_range(width..=3 * width + 4);
    for _ in 0..gate_count {
        let a = wires[rng.gen_range(0..wires.len())];
        let c = wires[rng.gen_range(0..wires.len())];
        match rng.gen_range(0..12) {
            0..=2 => wires.push(b.and(a, c)),
            3..=5 => wires.push(b.or(a, c)),
            6..=8 => wires.push(b.not(a)),
            9 => wires.push(if rng.gen_bool(0.5) { b.const0() } else { b.const1() }),
            _ => {
                let arity = rng.gen_range(1..=3.min(wires.len()));
                let out_width = rng.gen_range(1..=2);
                let rows = (0..1usize << arity)
                    .map(|_| {
                        Bits::from_uint(rng.gen_range(0..1u64 << out_width), out_width).unwrap()
                    })
                    .collect();
                let table = TruthTable::new(arity, rows).unwrap();
                let operands = (0..arity).map(|_| wires[rng.gen_range(0..wires.len())]).collect();
                wires.extend(b.table(operands, table));
            }
        }
    }
    let outputs = (0..width).map(|_| wires[rng.gen_range(0..wires.len())]).collect();
    b.finish(outputs).close().expect("outputs match the declared width")
}

/// All states of `width` bits in ascending order.
pub fn all_states(width: usize) -> impl Iterator<Item = Bits> {
    (0..1u64 << width).map(move |v| Bits::from_uint(v, width).unwrap())
}
