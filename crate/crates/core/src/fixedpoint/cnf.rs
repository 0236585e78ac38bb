//! Propositional encoding of the fixed-point condition.
//!
//! Each state bit becomes a variable, each AND/OR gate gets a defining
//! variable with the usual three clauses, and NOT and constants are folded
//! into literal aliases instead of fresh variables. The output wires are
//! then pinned to their matching state variables, so the models of the
//! formula are exactly the fixed points of the closed circuit.
//!
//! Enumeration decides state variables in index order with false first,
//! which yields models in ascending state order; each found model is
//! excluded with a blocking clause over the state variables and the rest of
//! the assignment follows by propagation.

use std::collections::HashMap;

use super::solver::{Lit, Policy, SolveOutcome, Solver};
use super::FixedpointError;
use crate::bits::Bits;
use crate::circuit::{ClosedCircuit, Gate};

/// A wire's value as a literal over the encoding, with constants folded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WireLit {
    True,
    False,
    Is(Lit),
}

impl WireLit {
    fn negate(self) -> WireLit {
        match self {
            WireLit::True => WireLit::False,
            WireLit::False => WireLit::True,
            WireLit::Is(l) => WireLit::Is(l.negate()),
        }
    }
}

struct Encoding {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
    state_width: usize,
}

fn encode(closed: &ClosedCircuit) -> Result<Encoding, FixedpointError> {
    let circuit = closed.inner();
    if circuit.has_table_gates() {
        return Err(FixedpointError::TableGates);
    }
    let n = closed.state_width();
    let mut wire: Vec<WireLit> = Vec::with_capacity(circuit.wire_count() as usize);
    for i in 0..n {
        wire.push(WireLit::Is(Lit::pos(i as u32)));
    }
    let mut next_var = n as u32;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    // Structurally identical gates share one defining variable; lowered
    // table gates repeat subterms freely.
    let mut shared: HashMap<(bool, Lit, Lit), Lit> = HashMap::new();
    let mut fresh = |clauses: &mut Vec<Vec<Lit>>, a: Lit, b: Lit, gate_is_and: bool| {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        if let Some(&c) = shared.get(&(gate_is_and, a, b)) {
            return c;
        }
        let c = Lit::pos(next_var);
        next_var += 1;
        if gate_is_and {
            clauses.push(vec![c.negate(), a]);
            clauses.push(vec![c.negate(), b]);
            clauses.push(vec![c, a.negate(), b.negate()]);
        } else {
            clauses.push(vec![c, a.negate()]);
            clauses.push(vec![c, b.negate()]);
            clauses.push(vec![c.negate(), a, b]);
        }
        shared.insert((gate_is_and, a, b), c);
        c
    };
    for gate in circuit.gates() {
        let lit = match *gate {
            Gate::Const0 => WireLit::False,
            Gate::Const1 => WireLit::True,
            Gate::Not(a) => wire[a.index()].negate(),
            Gate::And(a, b) => match (wire[a.index()], wire[b.index()]) {
                (WireLit::False, _) | (_, WireLit::False) => WireLit::False,
                (WireLit::True, x) | (x, WireLit::True) => x,
                (WireLit::Is(la), WireLit::Is(lb)) => {
                    if la == lb {
                        WireLit::Is(la)
                    } else if la == lb.negate() {
                        WireLit::False
                    } else {
                        WireLit::Is(fresh(&mut clauses, la, lb, true))
                    }
                }
            },
            Gate::Or(a, b) => match (wire[a.index()], wire[b.index()]) {
                (WireLit::True, _) | (_, WireLit::True) => WireLit::True,
                (WireLit::False, x) | (x, WireLit::False) => x,
                (WireLit::Is(la), WireLit::Is(lb)) => {
                    if la == lb {
                        WireLit::Is(la)
                    } else if la == lb.negate() {
                        WireLit::True
                    } else {
                        WireLit::Is(fresh(&mut clauses, la, lb, false))
                    }
                }
            },
            Gate::Table { .. } => return Err(FixedpointError::TableGates),
        };
        wire.push(lit);
    }
    // Pin each output to its state variable. Identity outputs produce
    // tautologies that the solver drops on entry.
    for (i, &out) in circuit.outputs().iter().enumerate() {
        let state = Lit::pos(i as u32);
        match wire[out.index()] {
            WireLit::True => clauses.push(vec![state]),
            WireLit::False => clauses.push(vec![state.negate()]),
            WireLit::Is(l) => {
                clauses.push(vec![l.negate(), state]);
                clauses.push(vec![l, state.negate()]);
            }
        }
    }
    Ok(Encoding { num_vars: next_var, clauses, state_width: n })
}

fn build_solver(enc: &Encoding, policy: Policy) -> Solver {
    let mut solver = Solver::new(enc.num_vars, policy);
    for clause in &enc.clauses {
        solver.add_clause(clause);
    }
    solver
}

fn model_state(solver: &Solver, width: usize) -> Bits {
    Bits::new((0..width).map(|i| solver.model_value(i as u32)).collect())
}

fn run(
    solver: &mut Solver,
    budget: Option<u64>,
) -> Result<SolveOutcome, FixedpointError> {
    let remaining = budget.map(|b| b.saturating_sub(solver.num_conflicts()));
    match solver.solve(remaining) {
        SolveOutcome::BudgetExceeded => Err(FixedpointError::BudgetExhausted {
            budget: budget.expect("budget set when exceeded"),
        }),
        other => Ok(other),
    }
}

/// Enumerates fixed points in ascending state order, stopping after `cap`
/// models when a cap is given. The second component reports saturation: the
/// cap was reached, so more fixed points may exist.
pub(super) fn enumerate(
    closed: &ClosedCircuit,
    cap: Option<usize>,
    budget: Option<u64>,
) -> Result<(Vec<Bits>, bool), FixedpointError> {
    let enc = encode(closed)?;
    let n = enc.state_width;
    let order: Vec<u32> = (0..n as u32).collect();
    let mut solver = build_solver(&enc, Policy::Fixed(order));
    let mut models = Vec::new();
    loop {
        if cap == Some(models.len()) {
            return Ok((models, true));
        }
        match run(&mut solver, budget)? {
            SolveOutcome::Sat => {
                let state = model_state(&solver, n);
                // Cheap end-to-end check of the encoding: a model must be an
                // actual fixed point of the circuit.
                let image = closed.apply(&state).expect("state width matches");
                assert_eq!(image, state, "solver model is not a fixed point");
                let block: Vec<Lit> = (0..n as u32)
                    .map(|v| Lit::with_sign(v, solver.model_value(v)))
                    .collect();
                models.push(state);
                solver.add_clause(&block);
            }
            SolveOutcome::Unsat => return Ok((models, false)),
            SolveOutcome::BudgetExceeded => unreachable!("mapped to an error"),
        }
    }
}

/// Finds one fixed point with activity-guided search, or proves there is
/// none. Suited to wide states where ordered enumeration has no value.
pub(super) fn solve_one(
    closed: &ClosedCircuit,
    budget: Option<u64>,
) -> Result<Option<Bits>, FixedpointError> {
    let enc = encode(closed)?;
    let mut solver = build_solver(&enc, Policy::Activity);
    match run(&mut solver, budget)? {
        SolveOutcome::Sat => {
            let state = model_state(&solver, enc.state_width);
            let image = closed.apply(&state).expect("state width matches");
            assert_eq!(image, state, "solver model is not a fixed point");
            Ok(Some(state))
        }
        SolveOutcome::Unsat => Ok(None),
        SolveOutcome::BudgetExceeded => unreachable!("mapped to an error"),
    }
}
