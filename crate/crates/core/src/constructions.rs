//! Reductions from verification to closed-circuit evaluation.
//!
//! Two constructions live here. The first takes a pair of witness
//! verifiers, one for membership and one for non-membership, and produces a
//! closed circuit per instance whose unique fixed point carries the answer
//! in its leading bit and the witness in the rest. The second takes a
//! solution predicate and produces a closed circuit whose unique fixed
//! point is the solution itself. Both rely on the same trick: states that
//! fail verification are moved by the circuit, so only verified states can
//! be fixed.
//!
//! When the promised uniqueness does not hold, the constructed circuit is
//! either fixed-point free or has several fixed points, and the runners
//! surface that as a promise violation instead of an answer.

use thiserror::Error;

use crate::bits::Bits;
use crate::circuit::{
    Circuit, CircuitBuilder, ClosedCircuit, TruthTable, WireId, MAX_TABLE_ARITY,
};
use crate::fixedpoint::{
    check_consistency, ConsistencyReport, EngineChoice, FixedpointConfig, FixedpointError,
    Verdict,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error(
        "a host predicate over {width} bits cannot be tabulated; tables take \
         at most {max} operands, use a circuit-backed predicate instead"
    )]
    TooWideForTable { width: usize, max: usize },
    #[error("the {role} circuit must take {expected} inputs, found {found}")]
    ArityMismatch { role: &'static str, expected: usize, found: usize },
    #[error("the {role} circuit must produce exactly one output, found {found}")]
    NotAPredicate { role: &'static str, found: usize },
    #[error("instance is {found} bits wide, the construction expects {expected}")]
    InstanceWidth { expected: usize, found: usize },
    #[error(
        "cannot merge relations of different shape: {left_instance}+{left_solution} \
         bits versus {right_instance}+{right_solution}"
    )]
    MergeShape {
        left_instance: usize,
        left_solution: usize,
        right_instance: usize,
        right_solution: usize,
    },
    #[error("search needs at least one solution bit")]
    EmptySolution,
}

/// Failure of a constructed circuit to deliver an answer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("promise violated on this instance: the closed circuit is {}", .0.verdict.label())]
    PromiseViolation(ConsistencyReport),
    #[error(transparent)]
    Fixedpoint(#[from] FixedpointError),
}

/// Builds a one-output circuit over `width` inputs from a host closure by
/// tabulating it.
fn tabulate(width: usize, f: impl Fn(&Bits) -> bool) -> Result<Circuit, ConstructionError> {
    if width > MAX_TABLE_ARITY {
        return Err(ConstructionError::TooWideForTable { width, max: MAX_TABLE_ARITY });
    }
    let table = TruthTable::predicate(width, |row| {
        let bits = Bits::from_uint(row, width).expect("row fits the arity");
        f(&bits)
    })
    .expect("predicate tables are well formed");
    let mut b = CircuitBuilder::new(width);
    let ins = b.inputs();
    let outs = b.table(ins, table);
    Ok(b.finish(outs))
}

fn expect_predicate(
    circuit: &Circuit,
    role: &'static str,
    expected_inputs: usize,
) -> Result<(), ConstructionError> {
    if circuit.num_inputs() != expected_inputs {
        return Err(ConstructionError::ArityMismatch {
            role,
            expected: expected_inputs,
            found: circuit.num_inputs(),
        });
    }
    if circuit.num_outputs() != 1 {
        return Err(ConstructionError::NotAPredicate { role, found: circuit.num_outputs() });
    }
    Ok(())
}

/// A membership verifier and a non-membership verifier over the same
/// instance and witness widths. Each is a predicate on (instance, witness).
///
/// The intended promise: for every instance, exactly one of the two
/// verifiers has a witness, and that witness is unique. Instances meeting
/// the promise yield consistent decision circuits; the others are reported
/// as violations by [`VerifierPair::decide`].
#[derive(Debug, Clone)]
pub struct VerifierPair {
    instance_width: usize,
    witness_width: usize,
    yes: Circuit,
    no: Circuit,
}

impl VerifierPair {
    /// Wraps two verifier circuits. Each must take the instance bits
    /// followed by the witness bits and produce a single output.
    pub fn from_circuits(
        instance_width: usize,
        witness_width: usize,
        yes: Circuit,
        no: Circuit,
    ) -> Result<Self, ConstructionError> {
        let total = instance_width + witness_width;
        expect_predicate(&yes, "membership verifier", total)?;
        expect_predicate(&no, "non-membership verifier", total)?;
        Ok(VerifierPair { instance_width, witness_width, yes, no })
    }

    /// Tabulates two host closures, each called as `f(instance, witness)`.
    /// Only usable when instance plus witness fits a table gate.
    pub fn from_fns(
        instance_width: usize,
        witness_width: usize,
        yes: impl Fn(&Bits, &Bits) -> bool,
        no: impl Fn(&Bits, &Bits) -> bool,
    ) -> Result<Self, ConstructionError> {
        let total = instance_width + witness_width;
        let split = move |joint: &Bits| {
            (joint.slice(0, instance_width), joint.slice(instance_width, witness_width))
        };
        let yes = tabulate(total, |joint| {
            let (x, w) = split(joint);
            yes(&x, &w)
        })?;
        let no = tabulate(total, |joint| {
            let (x, w) = split(joint);
            no(&x, &w)
        })?;
        VerifierPair::from_circuits(instance_width, witness_width, yes, no)
    }

    pub fn instance_width(&self) -> usize {
        self.instance_width
    }

    pub fn witness_width(&self) -> usize {
        self.witness_width
    }

    /// Compiles the pair into a closed circuit for one instance. The state
    /// is a flag bit followed by the witness register. The witness register
    /// passes through unchanged, and the flag becomes
    /// `!no(x, w) & (yes(x, w) | !flag)`: with a membership witness the flag
    /// must be 1, with a non-membership witness it must be 0, and with
    /// neither it must differ from itself. Fixed points are therefore the
    /// correctly flagged verified witnesses, and under the promise there is
    /// exactly one.
    pub fn decision_circuit(&self, instance: &Bits) -> Result<ClosedCircuit, ConstructionError> {
        if instance.len() != self.instance_width {
            return Err(ConstructionError::InstanceWidth {
                expected: self.instance_width,
                found: instance.len(),
            });
        }
        let mut b = CircuitBuilder::new(1 + self.witness_width);
        let flag = b.input(0);
        let witness: Vec<WireId> = (0..self.witness_width).map(|i| b.input(1 + i)).collect();
        let x = b.constant(instance);
        let mut joint = x;
        joint.extend_from_slice(&witness);
        let yes_out = b.append_circuit(&self.yes, &joint)[0];
        let no_out = b.append_circuit(&self.no, &joint)[0];
        let not_no = b.not(no_out);
        let not_flag = b.not(flag);
        let keep = b.or(yes_out, not_flag);
        let next_flag = b.and(not_no, keep);
        let mut outs = vec![next_flag];
        outs.extend_from_slice(&witness);
        let circuit = b.finish(outs);
        Ok(circuit.close().expect("state widths match by construction"))
    }

    /// Decides one instance. `Accept` carries the membership witness,
    /// `Reject` the non-membership witness.
    pub fn decide(
        &self,
        instance: &Bits,
        choice: EngineChoice,
        config: &FixedpointConfig,
    ) -> Result<DecisionOutcome, VerifierRunError> {
        let closed = self.decision_circuit(instance)?;
        let report = check_consistency(&closed, choice, config).map_err(RunError::from)?;
        match report.verdict {
            Verdict::Consistent { ref fixed_point } => {
                let accepted = fixed_point.get(0);
                let witness = fixed_point.slice(1, self.witness_width);
                Ok(DecisionOutcome { accepted, witness })
            }
            _ => Err(RunError::PromiseViolation(report).into()),
        }
    }
}

/// Answer extracted from a consistent decision circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionOutcome {
    pub accepted: bool,
    /// The unique witness: for membership when accepted, for non-membership
    /// when not.
    pub witness: Bits,
}

/// Errors from [`VerifierPair::decide`] and [`RelationSpec::search`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifierRunError {
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Run(#[from] RunError),
}

/// How many solutions each instance is promised to have.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromiseKind {
    /// Zero or one solution per instance.
    AtMostOne,
    /// Exactly one solution per instance.
    ExactlyOne,
}

/// A solution predicate over (instance, solution) with a uniqueness
/// promise, the relational counterpart of [`VerifierPair`].
#[derive(Debug, Clone)]
pub struct RelationSpec {
    instance_width: usize,
    solution_width: usize,
    predicate: Circuit,
    promise: PromiseKind,
}

impl RelationSpec {
    pub fn from_circuit(
        instance_width: usize,
        solution_width: usize,
        predicate: Circuit,
        promise: PromiseKind,
    ) -> Result<Self, ConstructionError> {
        expect_predicate(&predicate, "relation predicate", instance_width + solution_width)?;
        if solution_width == 0 {
            return Err(ConstructionError::EmptySolution);
        }
        Ok(RelationSpec { instance_width, solution_width, predicate, promise })
    }

    /// Tabulates a host closure called as `f(instance, solution)`.
    pub fn from_fn(
        instance_width: usize,
        solution_width: usize,
        predicate: impl Fn(&Bits, &Bits) -> bool,
        promise: PromiseKind,
    ) -> Result<Self, ConstructionError> {
        let total = instance_width + solution_width;
        let circuit = tabulate(total, |joint| {
            let x = joint.slice(0, instance_width);
            let y = joint.slice(instance_width, solution_width);
            predicate(&x, &y)
        })?;
        RelationSpec::from_circuit(instance_width, solution_width, circuit, promise)
    }

    pub fn instance_width(&self) -> usize {
        self.instance_width
    }

    pub fn solution_width(&self) -> usize {
        self.solution_width
    }

    pub fn promise(&self) -> PromiseKind {
        self.promise
    }

    /// Unions two relations over the same widths. The union is promised
    /// total: the caller asserts that each instance has a solution in
    /// exactly one of the operands. This is how a decision problem's
    /// membership and non-membership relations combine into one total
    /// search problem.
    pub fn merge(&self, other: &RelationSpec) -> Result<RelationSpec, ConstructionError> {
        if self.instance_width != other.instance_width
            || self.solution_width != other.solution_width
        {
            return Err(ConstructionError::MergeShape {
                left_instance: self.instance_width,
                left_solution: self.solution_width,
                right_instance: other.instance_width,
                right_solution: other.solution_width,
            });
        }
        let total = self.instance_width + self.solution_width;
        let mut b = CircuitBuilder::new(total);
        let ins = b.inputs();
        let left = b.append_circuit(&self.predicate, &ins)[0];
        let right = b.append_circuit(&other.predicate, &ins)[0];
        let both = b.or(left, right);
        let predicate = b.finish(vec![both]);
        RelationSpec::from_circuit(
            self.instance_width,
            self.solution_width,
            predicate,
            PromiseKind::ExactlyOne,
        )
    }

    /// Compiles the relation into a closed circuit for one instance. The
    /// state is the candidate solution; verified states map to themselves
    /// and all others have their first bit flipped, so the fixed points are
    /// exactly the solutions.
    pub fn search_circuit(&self, instance: &Bits) -> Result<ClosedCircuit, ConstructionError> {
        if instance.len() != self.instance_width {
            return Err(ConstructionError::InstanceWidth {
                expected: self.instance_width,
                found: instance.len(),
            });
        }
        let mut b = CircuitBuilder::new(self.solution_width);
        let solution: Vec<WireId> = (0..self.solution_width).map(|i| b.input(i)).collect();
        let x = b.constant(instance);
        let mut joint = x;
        joint.extend_from_slice(&solution);
        let accept = b.append_circuit(&self.predicate, &joint)[0];
        let flipped = b.not(solution[0]);
        let first = b.mux(accept, solution[0], flipped);
        let mut outs = vec![first];
        outs.extend_from_slice(&solution[1..]);
        let circuit = b.finish(outs);
        Ok(circuit.close().expect("state widths match by construction"))
    }

    /// Finds the promised solution for one instance.
    pub fn search(
        &self,
        instance: &Bits,
        choice: EngineChoice,
        config: &FixedpointConfig,
    ) -> Result<Bits, VerifierRunError> {
        let closed = self.search_circuit(instance)?;
        let report = check_consistency(&closed, choice, config).map_err(RunError::from)?;
        match report.verdict {
            Verdict::Consistent { fixed_point } => Ok(fixed_point),
            _ => Err(RunError::PromiseViolation(report).into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::enumerate_fixed_points;

    fn defaults() -> FixedpointConfig {
        FixedpointConfig::default()
    }

    fn all_instances(width: usize) -> impl Iterator<Item = Bits> {
        (0..1u64 << width).map(move |v| Bits::from_uint(v, width).unwrap())
    }

    #[test]
    fn echo_pair_accepts_everything_with_the_instance_as_witness() {
        // Membership witness: the instance itself. No non-membership
        // witnesses anywhere, so every instance is a member.
        let pair =
            VerifierPair::from_fns(3, 3, |x, w| w == x, |_, _| false).unwrap();
        for x in all_instances(3) {
            let out = pair.decide(&x, EngineChoice::Auto, &defaults()).unwrap();
            assert!(out.accepted);
            assert_eq!(out.witness, x);
        }
    }

    #[test]
    fn parity_pair_splits_instances() {
        let even = |x: &Bits| x.iter().filter(|&b| b).count() % 2 == 0;
        let pair = VerifierPair::from_fns(
            3,
            3,
            move |x, w| even(x) && w == x,
            move |x, w| !even(x) && w == x,
        )
        .unwrap();
        for x in all_instances(3) {
            let out = pair.decide(&x, EngineChoice::Auto, &defaults()).unwrap();
            assert_eq!(out.accepted, x.iter().filter(|&b| b).count() % 2 == 0);
            assert_eq!(out.witness, x);
        }
    }

    #[test]
    fn no_witness_anywhere_is_a_violation_without_fixed_points() {
        let pair = VerifierPair::from_fns(2, 2, |_, _| false, |_, _| false).unwrap();
        let x = Bits::zeros(2);
        let err = pair.decide(&x, EngineChoice::Auto, &defaults()).unwrap_err();
        match err {
            VerifierRunError::Run(RunError::PromiseViolation(report)) => {
                assert_eq!(report.verdict, Verdict::NoFixedPoint);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn ambiguous_witnesses_are_a_violation_with_two_fixed_points() {
        let pair = VerifierPair::from_fns(2, 2, |_, _| true, |_, _| false).unwrap();
        let x = Bits::zeros(2);
        let err = pair.decide(&x, EngineChoice::Auto, &defaults()).unwrap_err();
        match err {
            VerifierRunError::Run(RunError::PromiseViolation(report)) => {
                // Every witness works, so the two smallest flagged states
                // 100 and 101 are the evidence.
                assert_eq!(
                    report.verdict,
                    Verdict::MultipleFixedPoints {
                        first: "100".parse().unwrap(),
                        second: "101".parse().unwrap(),
                    }
                );
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn non_membership_wins_when_both_verifiers_fire() {
        // Witness-free verifiers: the state is just the flag bit.
        let pair = VerifierPair::from_fns(1, 0, |_, _| true, |_, _| true).unwrap();
        let x = Bits::zeros(1);
        let out = pair.decide(&x, EngineChoice::Auto, &defaults()).unwrap();
        assert!(!out.accepted);
        assert_eq!(out.witness, Bits::zeros(0));

        let pair = VerifierPair::from_fns(1, 0, |_, _| true, |_, _| false).unwrap();
        let out = pair.decide(&x, EngineChoice::Auto, &defaults()).unwrap();
        assert!(out.accepted);
    }

    #[test]
    fn decision_circuit_shape_and_fixed_points() {
        let pair = VerifierPair::from_fns(2, 2, |x, w| w == x, |_, _| false).unwrap();
        let x: Bits = "10".parse().unwrap();
        let closed = pair.decision_circuit(&x).unwrap();
        assert_eq!(closed.state_width(), 3);
        let fps = enumerate_fixed_points(&closed, None, EngineChoice::Auto, &defaults())
            .unwrap();
        assert_eq!(fps, vec!["110".parse().unwrap()]);
    }

    #[test]
    fn circuit_backed_pair_matches_the_tabulated_one() {
        let tabulated =
            VerifierPair::from_fns(2, 1, |x, w| x.get(0) && w.get(0), |x, _| !x.get(0))
                .unwrap();
        let mut yes = CircuitBuilder::new(3);
        let x0 = yes.input(0);
        let w0 = yes.input(2);
        let conj = yes.and(x0, w0);
        let yes = yes.finish(vec![conj]);
        let mut no = CircuitBuilder::new(3);
        let x0 = no.input(0);
        let inv = no.not(x0);
        let no = no.finish(vec![inv]);
        let circuit_backed = VerifierPair::from_circuits(2, 1, yes, no).unwrap();
        for x in all_instances(2) {
            let a = tabulated.decide(&x, EngineChoice::Auto, &defaults());
            let b = circuit_backed.decide(&x, EngineChoice::Auto, &defaults());
            match (a, b) {
                (Ok(a), Ok(b)) => assert_eq!(a, b),
                (Err(_), Err(_)) => {}
                other => panic!("engines disagree: {other:?}"),
            }
        }
    }

    #[test]
    fn arity_validation_rejects_misshapen_circuits() {
        let mut b = CircuitBuilder::new(2);
        let o = b.input(0);
        let two_in = b.finish(vec![o]);
        let err = VerifierPair::from_circuits(2, 2, two_in.clone(), two_in).unwrap_err();
        assert_eq!(
            err,
            ConstructionError::ArityMismatch {
                role: "membership verifier",
                expected: 4,
                found: 2
            }
        );

        let mut b = CircuitBuilder::new(4);
        let (a, c) = (b.input(0), b.input(1));
        let two_out = b.finish(vec![a, c]);
        let mut b = CircuitBuilder::new(4);
        let o = b.input(0);
        let ok = b.finish(vec![o]);
        let err = VerifierPair::from_circuits(2, 2, ok, two_out).unwrap_err();
        assert_eq!(
            err,
            ConstructionError::NotAPredicate { role: "non-membership verifier", found: 2 }
        );
    }

    #[test]
    fn oversized_host_predicates_are_refused() {
        let err = VerifierPair::from_fns(10, 10, |_, _| false, |_, _| false).unwrap_err();
        assert_eq!(err, ConstructionError::TooWideForTable { width: 20, max: 16 });
    }

    #[test]
    fn instance_width_is_checked_at_build_time() {
        let pair = VerifierPair::from_fns(2, 1, |_, _| true, |_, _| false).unwrap();
        let err = pair.decision_circuit(&Bits::zeros(3)).unwrap_err();
        assert_eq!(err, ConstructionError::InstanceWidth { expected: 2, found: 3 });
    }

    fn rotate_left(x: &Bits) -> Bits {
        let mut v: Vec<bool> = x.iter().collect();
        v.rotate_left(1);
        Bits::new(v)
    }

    #[test]
    fn search_finds_the_unique_solution() {
        let relation = RelationSpec::from_fn(
            3,
            3,
            |x, y| *y == rotate_left(x),
            PromiseKind::ExactlyOne,
        )
        .unwrap();
        for x in all_instances(3) {
            let y = relation.search(&x, EngineChoice::Auto, &defaults()).unwrap();
            assert_eq!(y, rotate_left(&x));
        }
    }

    #[test]
    fn search_violations_surface_both_ways() {
        let empty =
            RelationSpec::from_fn(1, 2, |_, _| false, PromiseKind::AtMostOne).unwrap();
        let err = empty
            .search(&Bits::zeros(1), EngineChoice::Auto, &defaults())
            .unwrap_err();
        match err {
            VerifierRunError::Run(RunError::PromiseViolation(report)) => {
                assert_eq!(report.verdict, Verdict::NoFixedPoint);
            }
            other => panic!("unexpected error {other}"),
        }

        let full = RelationSpec::from_fn(1, 2, |_, _| true, PromiseKind::AtMostOne).unwrap();
        let err = full
            .search(&Bits::zeros(1), EngineChoice::Auto, &defaults())
            .unwrap_err();
        match err {
            VerifierRunError::Run(RunError::PromiseViolation(report)) => {
                assert_eq!(
                    report.verdict,
                    Verdict::MultipleFixedPoints {
                        first: "00".parse().unwrap(),
                        second: "01".parse().unwrap(),
                    }
                );
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn merged_relations_cover_both_halves() {
        let even = |x: &Bits| x.iter().filter(|&b| b).count() % 2 == 0;
        let members = RelationSpec::from_fn(
            3,
            3,
            move |x, y| even(x) && y == x,
            PromiseKind::AtMostOne,
        )
        .unwrap();
        let complement = |x: &Bits| Bits::new(x.iter().map(|b| !b).collect());
        let non_members = RelationSpec::from_fn(
            3,
            3,
            move |x, y| !even(x) && *y == complement(x),
            PromiseKind::AtMostOne,
        )
        .unwrap();
        let merged = members.merge(&non_members).unwrap();
        assert_eq!(merged.promise(), PromiseKind::ExactlyOne);
        for x in all_instances(3) {
            let y = merged.search(&x, EngineChoice::Auto, &defaults()).unwrap();
            let expected = if x.iter().filter(|&b| b).count() % 2 == 0 {
                x.clone()
            } else {
                Bits::new(x.iter().map(|b| !b).collect())
            };
            assert_eq!(y, expected);
        }
    }

    #[test]
    fn merge_rejects_mismatched_shapes() {
        let a = RelationSpec::from_fn(2, 2, |_, _| true, PromiseKind::AtMostOne).unwrap();
        let b = RelationSpec::from_fn(2, 3, |_, _| true, PromiseKind::AtMostOne).unwrap();
        let err = a.merge(&b).unwrap_err();
        assert_eq!(
            err,
            ConstructionError::MergeShape {
                left_instance: 2,
                left_solution: 2,
                right_instance: 2,
                right_solution: 3,
            }
        );
    }

    #[test]
    fn lowered_constructions_work_with_the_cnf_engine() {
        use crate::fixedpoint::Engine;
        let pair = VerifierPair::from_fns(2, 2, |x, w| w == x, |_, _| false).unwrap();
        let x: Bits = "01".parse().unwrap();
        let closed = pair.decision_circuit(&x).unwrap();
        let lowered = closed.inner().lower().close().unwrap();
        let report = check_consistency(
            &lowered,
            EngineChoice::Use(Engine::CnfCount),
            &defaults(),
        )
        .unwrap();
        assert_eq!(
            report.verdict,
            Verdict::Consistent { fixed_point: "101".parse().unwrap() }
        );
    }
}
