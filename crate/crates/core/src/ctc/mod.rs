//! Closed timelike curves as deterministic transformations.
//!
//! A setup has N parties. Party j receives a past-boundary state of
//! `input_bits` bits, applies a local operation, and emits a future-boundary
//! state of `output_bits` bits. A process function maps the joint future
//! boundary back to the joint past boundary. The setup is consistent when
//! every choice of local operations leaves exactly one self-reproducing
//! joint state, which is precisely the closed-circuit fixed-point condition
//! applied to the composite map, so every check here cross-references the
//! fixed-point engines.
//!
//! Joint states concatenate party fields in party order, party 0 first, so
//! a state integer carries party 0 in its most significant bits.

use std::fmt;

use thiserror::Error;

use crate::bits::Bits;
use crate::circuit::{Circuit, CircuitBuilder, ClosedCircuit, TruthTable, MAX_TABLE_ARITY};
use crate::fixedpoint::{check_consistency, EngineChoice, FixedpointConfig, Verdict};

/// Boundary widths of one party.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PartySpec {
    pub input_bits: usize,
    pub output_bits: usize,
}

impl PartySpec {
    pub fn new(input_bits: usize, output_bits: usize) -> Self {
        PartySpec { input_bits, output_bits }
    }

    /// Equal widths on both boundaries.
    pub fn square(bits: usize) -> Self {
        PartySpec { input_bits: bits, output_bits: bits }
    }
}

/// Resource limits for the enumerating checks.
#[derive(Debug, Clone)]
pub struct CtcConfig {
    /// Cap on either joint boundary width in bits.
    pub max_state_bits: u32,
    /// Cap on joint-operation count times state count in
    /// [`check_process_function`].
    pub max_joint_evals: u64,
    /// Cap on candidate maps visited by [`search_noncausal_process`].
    pub max_candidates: u64,
}

impl Default for CtcConfig {
    fn default() -> Self {
        CtcConfig {
            max_state_bits: 20,
            max_joint_evals: 1 << 26,
            max_candidates: 1 << 28,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CtcError {
    #[error("joint boundary needs {required} bits, the configured cap is {cap}")]
    StateTooWide { required: usize, cap: u32 },
    #[error("the check needs {required} evaluations, the configured budget is {budget}")]
    Budget { required: u128, budget: u64 },
    #[error(
        "map shape {found_in}->{found_out} does not match the parties' \
         joint boundary {expected_in}->{expected_out}"
    )]
    MapShape {
        expected_in: usize,
        expected_out: usize,
        found_in: usize,
        found_out: usize,
    },
    #[error("a map table over {input_bits} input bits needs {expected} rows, got {found}")]
    TableRows { input_bits: usize, expected: usize, found: usize },
    #[error("table row {row} holds {value}, which does not fit {bits} bits")]
    TableEntry { row: usize, value: u64, bits: usize },
    #[error("a table map needs at most {max} input bits, got {found}; supply a circuit instead")]
    TableTooWide { found: usize, max: usize },
    #[error("{found} local operations for {parties} parties")]
    OperationCount { parties: usize, found: usize },
    #[error("position {position} holds the operation for party {found}")]
    OperationOrder { position: usize, found: usize },
    #[error(
        "party {party}: operation shape {found_in}->{found_out} does not match \
         the declared {expected_in}->{expected_out}"
    )]
    OperationShape {
        party: usize,
        expected_in: usize,
        expected_out: usize,
        found_in: usize,
        found_out: usize,
    },
    #[error("party 0 has no input bits, so there is no accept flag to read")]
    PartyZeroEmpty,
    #[error("the setup is not a valid algorithm: the chosen operations leave {kind}")]
    NotUniquelyFixed { kind: ViolationKind },
}

/// How a joint operation breaks consistency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NoFixedPoint,
    MultipleFixedPoints,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::NoFixedPoint => f.write_str("no fixed point"),
            ViolationKind::MultipleFixedPoints => f.write_str("multiple fixed points"),
        }
    }
}

/// One party's freely chosen boundary-to-boundary function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalOperation {
    party: usize,
    input_bits: usize,
    output_bits: usize,
    circuit: Circuit,
}

impl LocalOperation {
    /// Wraps an arbitrary circuit as party `party`'s operation.
    pub fn from_circuit(party: usize, circuit: Circuit) -> Self {
        LocalOperation {
            party,
            input_bits: circuit.num_inputs(),
            output_bits: circuit.num_outputs(),
            circuit,
        }
    }

    /// Builds the operation from its value table. `rows[i]` is the output
    /// for input `i`; the gate form stays lowerable to pure gates.
    pub fn from_table(
        party: usize,
        input_bits: usize,
        output_bits: usize,
        rows: &[u64],
    ) -> Result<Self, CtcError> {
        let circuit = table_circuit(input_bits, output_bits, rows)?;
        Ok(LocalOperation { party, input_bits, output_bits, circuit })
    }

    pub fn party(&self) -> usize {
        self.party
    }

    pub fn input_bits(&self) -> usize {
        self.input_bits
    }

    pub fn output_bits(&self) -> usize {
        self.output_bits
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    /// Applies the operation to an input given as an integer.
    pub fn apply_uint(&self, input: u64) -> u64 {
        let bits = Bits::from_uint(input, self.input_bits).expect("input fits the boundary");
        let out = self.circuit.eval(&bits).expect("operation circuits are total");
        out.to_uint().expect("boundaries are at most 64 bits")
    }
}

/// Builds a circuit computing a tabulated function. Handles the degenerate
/// widths without a gate.
fn table_circuit(input_bits: usize, output_bits: usize, rows: &[u64]) -> Result<Circuit, CtcError> {
    if input_bits > MAX_TABLE_ARITY {
        return Err(CtcError::TableTooWide { found: input_bits, max: MAX_TABLE_ARITY });
    }
    let expected = 1usize << input_bits;
    if rows.len() != expected {
        return Err(CtcError::TableRows { input_bits, expected, found: rows.len() });
    }
    if let Some((row, &value)) =
        rows.iter().enumerate().find(|&(_, &v)| v >= (1u64 << output_bits.min(63)) && output_bits < 64)
    {
        return Err(CtcError::TableEntry { row, value, bits: output_bits });
    }
    let mut b = CircuitBuilder::new(input_bits);
    if output_bits == 0 {
        return Ok(b.finish(vec![]));
    }
    if input_bits == 0 {
        let outs = b.constant(&Bits::from_uint(rows[0], output_bits).expect("checked above"));
        return Ok(b.finish(outs));
    }
    let table = TruthTable::new(
        input_bits,
        rows.iter()
            .map(|&v| Bits::from_uint(v, output_bits).expect("checked above"))
            .collect(),
    )
    .expect("row shape checked above");
    let ins = b.inputs();
    let outs = b.table(ins, table);
    Ok(b.finish(outs))
}

/// The joint future-to-past boundary map of a setup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessFunction {
    parties: Vec<PartySpec>,
    map: Circuit,
}

impl ProcessFunction {
    /// Wraps a circuit from the concatenated future boundary to the
    /// concatenated past boundary.
    pub fn new(parties: Vec<PartySpec>, map: Circuit) -> Result<Self, CtcError> {
        let expected_in: usize = parties.iter().map(|p| p.output_bits).sum();
        let expected_out: usize = parties.iter().map(|p| p.input_bits).sum();
        if map.num_inputs() != expected_in || map.num_outputs() != expected_out {
            return Err(CtcError::MapShape {
                expected_in,
                expected_out,
                found_in: map.num_inputs(),
                found_out: map.num_outputs(),
            });
        }
        Ok(ProcessFunction { parties, map })
    }

    /// Builds the map from its value table, `rows[o]` being the joint past
    /// boundary for joint future boundary `o`.
    pub fn from_table(parties: Vec<PartySpec>, rows: &[u64]) -> Result<Self, CtcError> {
        let input_bits: usize = parties.iter().map(|p| p.output_bits).sum();
        let output_bits: usize = parties.iter().map(|p| p.input_bits).sum();
        let map = table_circuit(input_bits, output_bits, rows)?;
        ProcessFunction::new(parties, map)
    }

    pub fn parties(&self) -> &[PartySpec] {
        &self.parties
    }

    pub fn map(&self) -> &Circuit {
        &self.map
    }

    /// Joint past-boundary width.
    pub fn state_bits(&self) -> usize {
        self.parties.iter().map(|p| p.input_bits).sum()
    }

    /// Joint future-boundary width.
    pub fn boundary_bits(&self) -> usize {
        self.parties.iter().map(|p| p.output_bits).sum()
    }

    fn check_widths(&self, config: &CtcConfig) -> Result<(), CtcError> {
        let widest = self.state_bits().max(self.boundary_bits());
        if widest > config.max_state_bits as usize {
            return Err(CtcError::StateTooWide { required: widest, cap: config.max_state_bits });
        }
        Ok(())
    }

    /// Dense value table of the map: entry `o` is the joint past boundary
    /// produced by joint future boundary `o`.
    pub fn value_table(&self) -> Vec<u64> {
        let no = self.boundary_bits();
        (0..1u64 << no)
            .map(|o| {
                let bits = Bits::from_uint(o, no).expect("enumeration stays in range");
                self.map
                    .eval(&bits)
                    .expect("process maps are total")
                    .to_uint()
                    .expect("boundaries are at most 64 bits")
            })
            .collect()
    }
}

/// Outcome of checking a process function against every joint operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProcessVerdict {
    Consistent,
    Violation { operations: Vec<LocalOperation>, kind: ViolationKind },
}

/// Field offsets of the parties inside the joint state integers.
struct Layout {
    in_shift: Vec<usize>,
    out_shift: Vec<usize>,
    ni: usize,
    no: usize,
}

impl Layout {
    fn new(parties: &[PartySpec]) -> Self {
        let ni: usize = parties.iter().map(|p| p.input_bits).sum();
        let no: usize = parties.iter().map(|p| p.output_bits).sum();
        let mut in_shift = Vec::with_capacity(parties.len());
        let mut out_shift = Vec::with_capacity(parties.len());
        let mut in_used = 0;
        let mut out_used = 0;
        for p in parties {
            in_used += p.input_bits;
            out_used += p.output_bits;
            // Party 0 sits in the most significant bits.
            in_shift.push(ni - in_used);
            out_shift.push(no - out_used);
        }
        Layout { in_shift, out_shift, ni, no }
    }

    fn party_input(&self, parties: &[PartySpec], state: u64, j: usize) -> u64 {
        (state >> self.in_shift[j]) & mask(parties[j].input_bits)
    }
}

fn mask(bits: usize) -> u64 {
    if bits == 0 {
        0
    } else {
        u64::MAX >> (64 - bits)
    }
}

/// Per-party operation count `|O_j| ^ |I_j|` and the total joint count.
fn joint_operation_count(parties: &[PartySpec]) -> (Vec<u128>, u128) {
    let sizes: Vec<u128> = parties
        .iter()
        .map(|p| {
            let outputs = 1u128 << p.output_bits;
            let inputs = 1u32 << p.input_bits;
            outputs.checked_pow(inputs).unwrap_or(u128::MAX)
        })
        .collect();
    let total = sizes
        .iter()
        .try_fold(1u128, |acc, &s| acc.checked_mul(s))
        .unwrap_or(u128::MAX);
    (sizes, total)
}

/// Fills `table` with the operation encoded by `code`: entry `i` occupies
/// bits `[i * output_bits, (i + 1) * output_bits)` of the code, so code
/// order enumerates low inputs' outputs fastest.
fn decode_operation(code: u128, input_bits: usize, output_bits: usize, table: &mut Vec<u64>) {
    table.clear();
    let m = mask(output_bits) as u128;
    for i in 0..1usize << input_bits {
        table.push(((code >> (i * output_bits)) & m) as u64);
    }
}

/// Counts fixed points of the composite map under the given per-party
/// tables, stopping at two.
fn count_joint_fixed_points(
    parties: &[PartySpec],
    layout: &Layout,
    w_table: &[u64],
    op_tables: &[Vec<u64>],
) -> usize {
    let mut found = 0;
    for state in 0..1u64 << layout.ni {
        let mut o = 0u64;
        for (j, table) in op_tables.iter().enumerate() {
            let input = layout.party_input(parties, state, j);
            o |= table[input as usize] << layout.out_shift[j];
        }
        if w_table[o as usize] == state {
            found += 1;
            if found == 2 {
                break;
            }
        }
    }
    found
}

/// Scans every joint operation in lexicographic order (party 0's table most
/// significant, within a party low inputs vary fastest) and returns the
/// first one whose composite map misses a unique fixed point.
fn first_violation(
    parties: &[PartySpec],
    layout: &Layout,
    w_table: &[u64],
    config: &CtcConfig,
) -> Result<Option<(Vec<Vec<u64>>, ViolationKind)>, CtcError> {
    let (sizes, total) = joint_operation_count(parties);
    let evals = total.checked_mul(1u128 << layout.ni).unwrap_or(u128::MAX);
    if evals > u128::from(config.max_joint_evals) {
        return Err(CtcError::Budget { required: evals, budget: config.max_joint_evals });
    }
    let mut codes: Vec<u128> = vec![0; parties.len()];
    let mut tables: Vec<Vec<u64>> = parties
        .iter()
        .map(|p| vec![0; 1 << p.input_bits])
        .collect();
    loop {
        match count_joint_fixed_points(parties, layout, w_table, &tables) {
            1 => {}
            0 => return Ok(Some((tables, ViolationKind::NoFixedPoint))),
            _ => return Ok(Some((tables, ViolationKind::MultipleFixedPoints))),
        }
        // Advance the odometer, last party fastest.
        let mut j = parties.len();
        loop {
            if j == 0 {
                return Ok(None);
            }
            j -= 1;
            codes[j] += 1;
            if codes[j] < sizes[j] {
                decode_operation(
                    codes[j],
                    parties[j].input_bits,
                    parties[j].output_bits,
                    &mut tables[j],
                );
                break;
            }
            codes[j] = 0;
            decode_operation(0, parties[j].input_bits, parties[j].output_bits, &mut tables[j]);
        }
    }
}

/// Checks the consistency condition: every joint local operation must leave
/// exactly one fixed point of the composite map. Returns the
/// lexicographically first violating joint operation if one exists.
pub fn check_process_function(
    w: &ProcessFunction,
    config: &CtcConfig,
) -> Result<ProcessVerdict, CtcError> {
    w.check_widths(config)?;
    let layout = Layout::new(&w.parties);
    let w_table = w.value_table();
    match first_violation(&w.parties, &layout, &w_table, config)? {
        None => Ok(ProcessVerdict::Consistent),
        Some((tables, kind)) => {
            let operations = tables
                .iter()
                .enumerate()
                .map(|(j, rows)| {
                    LocalOperation::from_table(
                        j,
                        w.parties[j].input_bits,
                        w.parties[j].output_bits,
                        rows,
                    )
                    .expect("tables produced by enumeration are well formed")
                })
                .collect();
            Ok(ProcessVerdict::Violation { operations, kind })
        }
    }
}

fn check_operations(w: &ProcessFunction, operations: &[LocalOperation]) -> Result<(), CtcError> {
    if operations.len() != w.parties.len() {
        return Err(CtcError::OperationCount {
            parties: w.parties.len(),
            found: operations.len(),
        });
    }
    for (position, op) in operations.iter().enumerate() {
        if op.party != position {
            return Err(CtcError::OperationOrder { position, found: op.party });
        }
        let spec = w.parties[position];
        if op.input_bits != spec.input_bits || op.output_bits != spec.output_bits {
            return Err(CtcError::OperationShape {
                party: position,
                expected_in: spec.input_bits,
                expected_out: spec.output_bits,
                found_in: op.input_bits,
                found_out: op.output_bits,
            });
        }
    }
    Ok(())
}

/// Splices the local operations into the process function and closes the
/// result over the joint past boundary: the induced map is "apply every
/// party's operation, then the process map".
pub fn to_closed_circuit(
    w: &ProcessFunction,
    operations: &[LocalOperation],
) -> Result<ClosedCircuit, CtcError> {
    check_operations(w, operations)?;
    let ni = w.state_bits();
    let mut b = CircuitBuilder::new(ni);
    let ins = b.inputs();
    let mut used = 0;
    let mut boundary = Vec::with_capacity(w.boundary_bits());
    for op in operations {
        let field = &ins[used..used + op.input_bits];
        boundary.extend(b.append_circuit(&op.circuit, field));
        used += op.input_bits;
    }
    let next = b.append_circuit(&w.map, &boundary);
    let circuit = b.finish(next);
    Ok(circuit.close().expect("the map returns the past boundary"))
}

/// Verdict of running a setup as an algorithm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtcDecision {
    pub accepted: bool,
    /// Party 0's past-boundary state with the accept flag stripped.
    pub payload: Bits,
}

/// Runs a setup: computes the unique fixed point of the spliced circuit and
/// reads party 0's first past-boundary bit as the accept flag, the rest as
/// the payload. The chosen operations are validated individually; whether
/// the process function is consistent for every other operation is the
/// caller's concern via [`check_process_function`].
pub fn decide_ctc(
    w: &ProcessFunction,
    operations: &[LocalOperation],
    config: &CtcConfig,
) -> Result<CtcDecision, CtcError> {
    w.check_widths(config)?;
    if w.parties.first().map_or(true, |p| p.input_bits == 0) {
        return Err(CtcError::PartyZeroEmpty);
    }
    let closed = to_closed_circuit(w, operations)?;
    let report = check_consistency(&closed, EngineChoice::Auto, &FixedpointConfig::default())
        .expect("configured widths keep the sweep in range");
    match report.verdict {
        Verdict::Consistent { fixed_point } => {
            let head = w.parties[0].input_bits;
            Ok(CtcDecision {
                accepted: fixed_point.get(0),
                payload: fixed_point.slice(1, head - 1),
            })
        }
        Verdict::NoFixedPoint => {
            Err(CtcError::NotUniquelyFixed { kind: ViolationKind::NoFixedPoint })
        }
        Verdict::MultipleFixedPoints { .. } => {
            Err(CtcError::NotUniquelyFixed { kind: ViolationKind::MultipleFixedPoints })
        }
    }
}

/// Causal-order classification of a process function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CausalOrder {
    /// Parties admit a fixed temporal order (given as party indices,
    /// earliest first) where each party's past boundary depends only on
    /// strictly earlier parties' future boundaries.
    CausallyOrdered { order: Vec<usize> },
    NotFixedOrder,
}

/// Extensional dependence matrix: entry `[j][m]` says party j's past
/// boundary reacts to some single-bit toggle inside party m's future
/// boundary.
fn dependence_matrix(parties: &[PartySpec], layout: &Layout, w_table: &[u64]) -> Vec<Vec<bool>> {
    let n = parties.len();
    let mut dep = vec![vec![false; n]; n];
    let field_mask: Vec<u64> = (0..n)
        .map(|j| mask(parties[j].input_bits) << layout.in_shift[j])
        .collect();
    for o in 0..1u64 << layout.no {
        for (m, p) in parties.iter().enumerate() {
            for bit in 0..p.output_bits {
                let other = o ^ (1u64 << (layout.out_shift[m] + bit));
                if other < o {
                    // Each unordered pair is inspected once.
                    continue;
                }
                let diff = w_table[o as usize] ^ w_table[other as usize];
                for (j, &fm) in field_mask.iter().enumerate() {
                    if diff & fm != 0 {
                        dep[j][m] = true;
                    }
                }
            }
        }
    }
    dep
}

/// Greedy topological placement over the dependence matrix, smallest party
/// index first, yielding the canonical witness order when one exists.
fn fixed_order(dep: &[Vec<bool>]) -> Option<Vec<usize>> {
    let n = dep.len();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let next = (0..n).find(|&j| {
            !placed[j] && dep[j].iter().enumerate().all(|(m, &d)| !d || placed[m])
        })?;
        placed[next] = true;
        order.push(next);
    }
    Some(order)
}

/// Classifies whether the process function admits a fixed causal order.
pub fn check_causal_order(
    w: &ProcessFunction,
    config: &CtcConfig,
) -> Result<CausalOrder, CtcError> {
    w.check_widths(config)?;
    let layout = Layout::new(&w.parties);
    let w_table = w.value_table();
    let dep = dependence_matrix(&w.parties, &layout, &w_table);
    Ok(match fixed_order(&dep) {
        Some(order) => CausalOrder::CausallyOrdered { order },
        None => CausalOrder::NotFixedOrder,
    })
}

/// Sweeps all process maps over `parties` equal-width square parties in
/// lexicographic table order and returns the first one that is consistent
/// for every joint operation yet admits no fixed causal order. Candidates
/// are pruned by the identity-operation fixed-point test before the full
/// sweep.
pub fn search_noncausal_process(
    parties: usize,
    bits_per_party: usize,
    config: &CtcConfig,
) -> Result<Option<ProcessFunction>, CtcError> {
    let specs = vec![PartySpec::square(bits_per_party); parties];
    let layout = Layout::new(&specs);
    if layout.ni > config.max_state_bits as usize {
        return Err(CtcError::StateTooWide { required: layout.ni, cap: config.max_state_bits });
    }
    let rows = 1usize << layout.no;
    let states = 1u128 << layout.ni;
    let candidates = states.checked_pow(rows as u32).unwrap_or(u128::MAX);
    if candidates > u128::from(config.max_candidates) {
        return Err(CtcError::Budget { required: candidates, budget: config.max_candidates });
    }
    let mut w_table = vec![0u64; rows];
    loop {
        // Identity operations turn the composite map into the table itself.
        if count_table_fixed_points(&w_table) == 1
            && first_violation(&specs, &layout, &w_table, config)?.is_none()
        {
            let dep = dependence_matrix(&specs, &layout, &w_table);
            if fixed_order(&dep).is_none() {
                let w = ProcessFunction::from_table(specs, &w_table)
                    .expect("enumerated tables are well formed");
                return Ok(Some(w));
            }
        }
        // Advance in lexicographic order: the last row is least significant.
        let mut idx = rows;
        loop {
            if idx == 0 {
                return Ok(None);
            }
            idx -= 1;
            w_table[idx] += 1;
            if w_table[idx] < states as u64 {
                break;
            }
            w_table[idx] = 0;
        }
    }
}

fn count_table_fixed_points(table: &[u64]) -> usize {
    table
        .iter()
        .enumerate()
        .filter(|&(i, &v)| v == i as u64)
        .take(2)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::enumerate_fixed_points;

    fn cfg() -> CtcConfig {
        CtcConfig::default()
    }

    fn one_bit_party() -> Vec<PartySpec> {
        vec![PartySpec::square(1)]
    }

    fn op_table(op: &LocalOperation) -> Vec<u64> {
        (0..1u64 << op.input_bits()).map(|i| op.apply_uint(i)).collect()
    }

    #[test]
    fn identity_map_is_violated_by_negation() {
        let w = ProcessFunction::from_table(one_bit_party(), &[0, 1]).unwrap();
        let verdict = check_process_function(&w, &cfg()).unwrap();
        match verdict {
            ProcessVerdict::Violation { operations, kind } => {
                assert_eq!(kind, ViolationKind::NoFixedPoint);
                assert_eq!(op_table(&operations[0]), vec![1, 0]);
            }
            other => panic!("expected a violation, got {other:?}"),
        }
    }

    #[test]
    fn constant_map_is_consistent_and_ordered() {
        let w = ProcessFunction::from_table(one_bit_party(), &[0, 0]).unwrap();
        assert_eq!(check_process_function(&w, &cfg()).unwrap(), ProcessVerdict::Consistent);
        assert_eq!(
            check_causal_order(&w, &cfg()).unwrap(),
            CausalOrder::CausallyOrdered { order: vec![0] }
        );
    }

    #[test]
    fn swap_map_has_a_multiplicity_violation() {
        // Joint boundary o0 o1 maps to i0 = o1, i1 = o0.
        let parties = vec![PartySpec::square(1); 2];
        let w = ProcessFunction::from_table(parties, &[0b00, 0b10, 0b01, 0b11]).unwrap();
        match check_process_function(&w, &cfg()).unwrap() {
            ProcessVerdict::Violation { operations, kind } => {
                assert_eq!(kind, ViolationKind::MultipleFixedPoints);
                // The enumeration meets negation-negation before
                // identity-identity; both leave two fixed points.
                assert_eq!(op_table(&operations[0]), vec![1, 0]);
                assert_eq!(op_table(&operations[1]), vec![1, 0]);
            }
            other => panic!("expected a violation, got {other:?}"),
        }
    }

    #[test]
    fn every_single_party_one_bit_map_gets_the_right_verdict() {
        // The four maps {0,1} -> {0,1}: constants are consistent, identity
        // and negation are not.
        for code in 0..4u64 {
            let rows = [code & 1, (code >> 1) & 1];
            let w = ProcessFunction::from_table(one_bit_party(), &rows).unwrap();
            let verdict = check_process_function(&w, &cfg()).unwrap();
            let consistent = rows[0] == rows[1];
            assert_eq!(
                matches!(verdict, ProcessVerdict::Consistent),
                consistent,
                "rows {rows:?}"
            );
        }
    }

    #[test]
    fn verdicts_match_the_closed_circuit_engine_exhaustively() {
        // Every joint operation's verdict must agree with closing the
        // spliced circuit and running the fixed-point engines.
        let parties = vec![PartySpec::square(1); 2];
        for code in 0..256u64 {
            let rows: Vec<u64> = (0..4).map(|r| (code >> (2 * r)) & 3).collect();
            let w = ProcessFunction::from_table(parties.clone(), &rows).unwrap();
            let mut any_violation = None;
            'outer: for c0 in 0..4u64 {
                for c1 in 0..4u64 {
                    let ops = vec![
                        LocalOperation::from_table(0, 1, 1, &[c0 & 1, (c0 >> 1) & 1]).unwrap(),
                        LocalOperation::from_table(1, 1, 1, &[c1 & 1, (c1 >> 1) & 1]).unwrap(),
                    ];
                    let closed = to_closed_circuit(&w, &ops).unwrap();
                    let fps = enumerate_fixed_points(
                        &closed,
                        None,
                        EngineChoice::Auto,
                        &FixedpointConfig::default(),
                    )
                    .unwrap();
                    if fps.len() != 1 {
                        any_violation = Some(if fps.is_empty() {
                            ViolationKind::NoFixedPoint
                        } else {
                            ViolationKind::MultipleFixedPoints
                        });
                        break 'outer;
                    }
                }
            }
            let verdict = check_process_function(&w, &cfg()).unwrap();
            match (any_violation, verdict) {
                (None, ProcessVerdict::Consistent) => {}
                (Some(_), ProcessVerdict::Violation { .. }) => {}
                (expected, got) => {
                    panic!("map {code}: cross-check {expected:?} vs verdict {got:?}")
                }
            }
        }
    }

    #[test]
    fn spliced_circuit_matches_the_example_setups() {
        let w = ProcessFunction::from_table(one_bit_party(), &[0, 1]).unwrap();
        let negate = LocalOperation::from_table(0, 1, 1, &[1, 0]).unwrap();
        let closed = to_closed_circuit(&w, &[negate]).unwrap();
        let fps = enumerate_fixed_points(
            &closed,
            None,
            EngineChoice::Auto,
            &FixedpointConfig::default(),
        )
        .unwrap();
        assert!(fps.is_empty());

        let w = ProcessFunction::from_table(one_bit_party(), &[0, 0]).unwrap();
        let ops = [LocalOperation::from_table(0, 1, 1, &[1, 0]).unwrap()];
        let closed = to_closed_circuit(&w, &ops).unwrap();
        let fps = enumerate_fixed_points(
            &closed,
            None,
            EngineChoice::Auto,
            &FixedpointConfig::default(),
        )
        .unwrap();
        assert_eq!(fps, vec![Bits::from_uint(0, 1).unwrap()]);
    }

    #[test]
    fn operation_validation_rejects_mismatches() {
        let w = ProcessFunction::from_table(one_bit_party(), &[0, 0]).unwrap();
        assert!(matches!(
            to_closed_circuit(&w, &[]).unwrap_err(),
            CtcError::OperationCount { parties: 1, found: 0 }
        ));
        let wrong_party = LocalOperation::from_table(3, 1, 1, &[0, 1]).unwrap();
        assert!(matches!(
            to_closed_circuit(&w, &[wrong_party]).unwrap_err(),
            CtcError::OperationOrder { position: 0, found: 3 }
        ));
        let wrong_shape = LocalOperation::from_table(0, 2, 1, &[0, 1, 0, 1]).unwrap();
        assert!(matches!(
            to_closed_circuit(&w, &[wrong_shape]).unwrap_err(),
            CtcError::OperationShape { party: 0, .. }
        ));
    }

    #[test]
    fn deciding_reads_party_zero() {
        // One party with a 2-bit past boundary and a 1-bit future boundary.
        let parties = vec![PartySpec::new(2, 1)];
        let any_op = [LocalOperation::from_table(0, 2, 1, &[0, 1, 1, 0]).unwrap()];

        let w = ProcessFunction::from_table(parties.clone(), &[0b10, 0b10]).unwrap();
        let decision = decide_ctc(&w, &any_op, &cfg()).unwrap();
        assert!(decision.accepted);
        assert_eq!(decision.payload, Bits::from_uint(0, 1).unwrap());

        let w = ProcessFunction::from_table(parties, &[0b01, 0b01]).unwrap();
        let decision = decide_ctc(&w, &any_op, &cfg()).unwrap();
        assert!(!decision.accepted);
        assert_eq!(decision.payload, Bits::from_uint(1, 1).unwrap());
    }

    #[test]
    fn deciding_a_broken_setup_is_an_error() {
        let parties = vec![PartySpec::square(1); 2];
        let w = ProcessFunction::from_table(parties, &[0b00, 0b10, 0b01, 0b11]).unwrap();
        let identity = |j| LocalOperation::from_table(j, 1, 1, &[0, 1]).unwrap();
        let err = decide_ctc(&w, &[identity(0), identity(1)], &cfg()).unwrap_err();
        assert_eq!(
            err,
            CtcError::NotUniquelyFixed { kind: ViolationKind::MultipleFixedPoints }
        );
    }

    #[test]
    fn causal_order_follows_dependence() {
        // i0 constant, i1 = o0: party 0 strictly precedes party 1.
        let parties = vec![PartySpec::square(1); 2];
        let w = ProcessFunction::from_table(parties, &[0b00, 0b00, 0b01, 0b01]).unwrap();
        assert_eq!(
            check_causal_order(&w, &cfg()).unwrap(),
            CausalOrder::CausallyOrdered { order: vec![0, 1] }
        );

        // i0 = o0: self-dependence admits no order at all.
        let w = ProcessFunction::from_table(one_bit_party(), &[0, 1]).unwrap();
        assert_eq!(check_causal_order(&w, &cfg()).unwrap(), CausalOrder::NotFixedOrder);
    }

    #[test]
    fn asymmetric_widths_order_and_check() {
        // Party 0: 1 -> 1, party 1: no past boundary, 1-bit future boundary.
        // The map sends party 1's output into party 0's input, so party 1
        // comes first.
        let parties = vec![PartySpec::square(1), PartySpec::new(0, 1)];
        // Joint future boundary is o0 o1, joint past boundary is i0 alone.
        let w = ProcessFunction::from_table(parties, &[0, 1, 0, 1]).unwrap();
        assert_eq!(check_process_function(&w, &cfg()).unwrap(), ProcessVerdict::Consistent);
        assert_eq!(
            check_causal_order(&w, &cfg()).unwrap(),
            CausalOrder::CausallyOrdered { order: vec![1, 0] }
        );
    }

    #[test]
    fn small_searches_find_nothing() {
        assert_eq!(search_noncausal_process(1, 1, &cfg()).unwrap(), None);
        assert_eq!(search_noncausal_process(2, 1, &cfg()).unwrap(), None);
    }

    #[test]
    fn budgets_are_enforced() {
        let tight = CtcConfig { max_joint_evals: 4, ..CtcConfig::default() };
        let parties = vec![PartySpec::square(1); 2];
        let w = ProcessFunction::from_table(parties, &[0, 0, 0, 0]).unwrap();
        assert!(matches!(
            check_process_function(&w, &tight).unwrap_err(),
            CtcError::Budget { budget: 4, .. }
        ));

        let narrow = CtcConfig { max_state_bits: 1, ..CtcConfig::default() };
        let wide = ProcessFunction::from_table(vec![PartySpec::square(2)], &[0, 0, 0, 0]).unwrap();
        assert!(matches!(
            check_process_function(&wide, &narrow).unwrap_err(),
            CtcError::StateTooWide { required: 2, cap: 1 }
        ));

        let tiny = CtcConfig { max_candidates: 2, ..CtcConfig::default() };
        assert!(matches!(
            search_noncausal_process(1, 1, &tiny).unwrap_err(),
            CtcError::Budget { budget: 2, .. }
        ));
    }

    #[test]
    fn table_construction_rejects_bad_shapes() {
        assert!(matches!(
            ProcessFunction::from_table(one_bit_party(), &[0]).unwrap_err(),
            CtcError::TableRows { input_bits: 1, expected: 2, found: 1 }
        ));
        assert!(matches!(
            ProcessFunction::from_table(one_bit_party(), &[0, 2]).unwrap_err(),
            CtcError::TableEntry { row: 1, value: 2, bits: 1 }
        ));
        let c = {
            let mut b = CircuitBuilder::new(2);
            let x = b.input(0);
            b.finish(vec![x])
        };
        assert!(matches!(
            ProcessFunction::new(one_bit_party(), c).unwrap_err(),
            CtcError::MapShape { expected_in: 1, expected_out: 1, found_in: 2, found_out: 1 }
        ));
    }
}
