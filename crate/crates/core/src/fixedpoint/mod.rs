//! Consistency analysis of closed circuits.
//!
//! A closed circuit induces a map on states, and its observable behaviour is
//! defined only when that map has exactly one fixed point. This module
//! classifies a closed circuit as consistent (with the unique fixed point as
//! witness), fixed-point free, or ambiguous (with the two smallest fixed
//! points as witnesses), and decodes accept/reject decisions from the
//! consistent case.
//!
//! Three interchangeable engines back the classification:
//!
//! * [`Engine::Exhaustive`] sweeps the whole state space with the batched
//!   evaluator, 64 states per pass.
//! * [`Engine::FunctionalGraph`] follows trajectories of the induced map,
//!   marking visited states, so every state is evaluated exactly once.
//! * [`Engine::CnfCount`] translates the fixed-point condition to CNF and
//!   enumerates models with the built-in solver. It is the only engine that
//!   scales past the sweep capacity, and the only one with a gate-kind
//!   restriction: table gates must be lowered first.
//!
//! All engines report witnesses in ascending state order, so their verdicts
//! are interchangeable. States are ordered as binary strings, which matches
//! numeric order at equal width.

mod cnf;
mod solver;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bits::Bits;
use crate::circuit::batch::BatchEvaluator;
use crate::circuit::ClosedCircuit;

/// Strategy for finding fixed points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Exhaustive,
    FunctionalGraph,
    CnfCount,
}

impl Engine {
    /// Stable machine-readable name, also accepted by [`Engine::from_str`].
    pub fn name(self) -> &'static str {
        match self {
            Engine::Exhaustive => "exhaustive",
            Engine::FunctionalGraph => "functional-graph",
            Engine::CnfCount => "cnf-count",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown engine {0:?}; expected exhaustive, functional-graph, or cnf-count")]
pub struct ParseEngineError(String);

impl FromStr for Engine {
    type Err = ParseEngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(Engine::Exhaustive),
            "functional-graph" => Ok(Engine::FunctionalGraph),
            "cnf-count" => Ok(Engine::CnfCount),
            other => Err(ParseEngineError(other.to_string())),
        }
    }
}

/// Engine selection: pick one, or let the state width decide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EngineChoice {
    /// Exhaustive sweep up to [`FixedpointConfig::auto_sweep_max_bits`],
    /// CNF counting above it.
    #[default]
    Auto,
    Use(Engine),
}

/// Tuning knobs. The defaults suit interactive use.
#[derive(Debug, Clone)]
pub struct FixedpointConfig {
    /// Hard width limit for the sweeping engines. Sweeps over more than
    /// this many state bits are refused rather than attempted. Values above
    /// 48 are treated as 48.
    pub sweep_max_bits: u32,
    /// Width at which [`EngineChoice::Auto`] switches from the exhaustive
    /// sweep to CNF counting.
    pub auto_sweep_max_bits: u32,
    /// Abort solver-backed runs after this many conflicts. `None` means
    /// unbounded. The bound is on solver conflicts, not wall time, so a
    /// given circuit and budget always produce the same outcome.
    pub conflict_budget: Option<u64>,
}

impl Default for FixedpointConfig {
    fn default() -> Self {
        FixedpointConfig {
            sweep_max_bits: 28,
            auto_sweep_max_bits: 24,
            conflict_budget: None,
        }
    }
}

/// Absolute ceiling for sweep widths, whatever the configuration says.
const SWEEP_HARD_CAP: u32 = 48;

/// Outcome of a consistency check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Exactly one fixed point: the circuit computes something.
    Consistent { fixed_point: Bits },
    /// The induced map moves every state.
    NoFixedPoint,
    /// At least two fixed points; the two smallest are the witnesses.
    MultipleFixedPoints { first: Bits, second: Bits },
}

impl Verdict {
    /// Stable machine-readable name of the verdict kind.
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Consistent { .. } => "consistent",
            Verdict::NoFixedPoint => "no-fixed-point",
            Verdict::MultipleFixedPoints { .. } => "multiple-fixed-points",
        }
    }

    pub fn is_consistent(&self) -> bool {
        matches!(self, Verdict::Consistent { .. })
    }
}

/// A verdict plus how it was reached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub verdict: Verdict,
    pub engine: Engine,
    pub state_width: usize,
    /// Work measure: states evaluated by the sweeping engines, models
    /// enumerated by the CNF engine. Deterministic per engine, but not
    /// comparable across engines.
    pub states_examined: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixedpointError {
    #[error(
        "state width {width} exceeds the {max}-bit sweep capacity; raise \
         `sweep_max_bits` or use the cnf-count engine"
    )]
    CapacityExceeded { width: usize, max: u32 },
    #[error(
        "the cnf-count engine handles only AND/OR/NOT/constant gates; lower \
         the circuit to expand its table gates"
    )]
    TableGates,
    #[error("conflict budget of {budget} exhausted before the search finished")]
    BudgetExhausted { budget: u64 },
}

/// Decision decoded from a consistent circuit: the leading state bit picks
/// accept or reject and the remaining bits are the payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Accept(Bits),
    Reject(Bits),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("the closed circuit is not logically consistent ({})", .0.verdict.label())]
    Inconsistent(ConsistencyReport),
    #[error("cannot decide with an empty state: there is no flag bit to read")]
    EmptyState,
    #[error(transparent)]
    Engine(#[from] FixedpointError),
}

struct SweepOutcome {
    /// In ascending state order.
    fixed_points: Vec<Bits>,
    states_examined: u64,
}

fn select_engine(choice: EngineChoice, state_width: usize, config: &FixedpointConfig) -> Engine {
    match choice {
        EngineChoice::Use(e) => e,
        EngineChoice::Auto => {
            if state_width <= config.auto_sweep_max_bits as usize {
                Engine::Exhaustive
            } else {
                Engine::CnfCount
            }
        }
    }
}

fn check_sweep_capacity(width: usize, config: &FixedpointConfig) -> Result<(), FixedpointError> {
    let max = config.sweep_max_bits.min(SWEEP_HARD_CAP);
    if width > max as usize {
        return Err(FixedpointError::CapacityExceeded { width, max });
    }
    Ok(())
}

/// Bit patterns for the six low index bits across a 64-state batch: lane `l`
/// of pattern `k` holds bit `k` of `l`.
const LANE_PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

fn sweep_exhaustive(
    closed: &ClosedCircuit,
    stop_after: Option<usize>,
    config: &FixedpointConfig,
) -> Result<SweepOutcome, FixedpointError> {
    let n = closed.state_width();
    check_sweep_capacity(n, config)?;
    if n == 0 {
        return Ok(SweepOutcome { fixed_points: vec![Bits::zeros(0)], states_examined: 1 });
    }
    let total = 1u64 << n;
    let mut evaluator = BatchEvaluator::new();
    let mut inputs = vec![0u64; n];
    let mut outputs: Vec<u64> = Vec::new();
    let mut found: Vec<u64> = Vec::new();
    let mut examined = 0u64;
    let mut base = 0u64;
    'blocks: while base < total {
        let lanes = (total - base).min(64);
        for (i, word) in inputs.iter_mut().enumerate() {
            // State bit i is bit (n - 1 - i) of the state index.
            let position = n - 1 - i;
            *word = if position < 6 {
                LANE_PATTERNS[position]
            } else if (base >> position) & 1 == 1 {
                !0
            } else {
                0
            };
        }
        evaluator.eval_into(closed.inner(), &inputs, &mut outputs);
        let mut moved = 0u64;
        for (inp, out) in inputs.iter().zip(&outputs) {
            moved |= inp ^ out;
        }
        let valid = if lanes == 64 { !0 } else { (1u64 << lanes) - 1 };
        let mut fixed = !moved & valid;
        examined = base + lanes;
        while fixed != 0 {
            let lane = fixed.trailing_zeros() as u64;
            found.push(base + lane);
            if let Some(stop) = stop_after {
                if found.len() > stop {
                    examined = base + lane + 1;
                    break 'blocks;
                }
            }
            fixed &= fixed - 1;
        }
        base += 64;
    }
    let fixed_points = found
        .into_iter()
        .map(|s| Bits::from_uint(s, n).expect("state fits its width"))
        .collect();
    Ok(SweepOutcome { fixed_points, states_examined: examined })
}

fn sweep_functional_graph(
    closed: &ClosedCircuit,
    stop_after: Option<usize>,
    config: &FixedpointConfig,
) -> Result<SweepOutcome, FixedpointError> {
    let n = closed.state_width();
    check_sweep_capacity(n, config)?;
    if n == 0 {
        return Ok(SweepOutcome { fixed_points: vec![Bits::zeros(0)], states_examined: 1 });
    }
    let total = 1u64 << n;
    let mut visited = vec![0u64; total.div_ceil(64) as usize];
    let mut scratch = Vec::new();
    let mut found: Vec<u64> = Vec::new();
    // Every state is evaluated exactly once, so there is no early exit: the
    // smallest fixed points are only known once the whole graph is walked.
    for seed in 0..total {
        let mut state = seed;
        loop {
            let (word, bit) = ((state / 64) as usize, state % 64);
            if visited[word] >> bit & 1 == 1 {
                break;
            }
            visited[word] |= 1 << bit;
            let next = closed.apply_index(state, &mut scratch);
            if next == state {
                found.push(state);
            }
            state = next;
        }
    }
    found.sort_unstable();
    if let Some(stop) = stop_after {
        found.truncate(stop + 1);
    }
    let fixed_points = found
        .into_iter()
        .map(|s| Bits::from_uint(s, n).expect("state fits its width"))
        .collect();
    Ok(SweepOutcome { fixed_points, states_examined: total })
}

fn run_engine(
    closed: &ClosedCircuit,
    engine: Engine,
    stop_after: Option<usize>,
    config: &FixedpointConfig,
) -> Result<SweepOutcome, FixedpointError> {
    match engine {
        Engine::Exhaustive => sweep_exhaustive(closed, stop_after, config),
        Engine::FunctionalGraph => sweep_functional_graph(closed, stop_after, config),
        Engine::CnfCount => {
            let cap = stop_after.map(|s| s + 1);
            let (models, _) = cnf::enumerate(closed, cap, config.conflict_budget)?;
            let states_examined = models.len() as u64;
            Ok(SweepOutcome { fixed_points: models, states_examined })
        }
    }
}

/// Lists fixed points in ascending state order. With `limit = Some(k)` at
/// most `k + 1` entries come back, so a caller probing for uniqueness can
/// see the refutation without paying for a full enumeration.
pub fn enumerate_fixed_points(
    closed: &ClosedCircuit,
    limit: Option<usize>,
    choice: EngineChoice,
    config: &FixedpointConfig,
) -> Result<Vec<Bits>, FixedpointError> {
    let engine = select_engine(choice, closed.state_width(), config);
    Ok(run_engine(closed, engine, limit, config)?.fixed_points)
}

/// Classifies the closed circuit by its number of fixed points.
pub fn check_consistency(
    closed: &ClosedCircuit,
    choice: EngineChoice,
    config: &FixedpointConfig,
) -> Result<ConsistencyReport, FixedpointError> {
    let state_width = closed.state_width();
    let engine = select_engine(choice, state_width, config);
    let outcome = run_engine(closed, engine, Some(1), config)?;
    let mut fps = outcome.fixed_points.into_iter();
    let verdict = match (fps.next(), fps.next()) {
        (None, _) => Verdict::NoFixedPoint,
        (Some(fixed_point), None) => Verdict::Consistent { fixed_point },
        (Some(first), Some(second)) => Verdict::MultipleFixedPoints { first, second },
    };
    Ok(ConsistencyReport {
        verdict,
        engine,
        state_width,
        states_examined: outcome.states_examined,
    })
}

/// Reads the decision of a consistent circuit: the first state bit selects
/// accept or reject, the rest of the fixed point is returned as payload.
pub fn decide(
    closed: &ClosedCircuit,
    choice: EngineChoice,
    config: &FixedpointConfig,
) -> Result<Decision, DecideError> {
    if closed.state_width() == 0 {
        return Err(DecideError::EmptyState);
    }
    let report = check_consistency(closed, choice, config)?;
    match report.verdict {
        Verdict::Consistent { ref fixed_point } => {
            let payload = fixed_point.slice(1, fixed_point.len() - 1);
            if fixed_point.get(0) {
                Ok(Decision::Accept(payload))
            } else {
                Ok(Decision::Reject(payload))
            }
        }
        _ => Err(DecideError::Inconsistent(report)),
    }
}

/// Result of a capped model count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfCountOutcome {
    /// Number of fixed points found, saturating at the cap.
    pub count: usize,
    /// True when the cap cut the enumeration short, in which case further
    /// fixed points may exist beyond the `count` reported.
    pub saturated: bool,
    /// The fixed points found, in ascending state order.
    pub models: Vec<Bits>,
}

/// Counts fixed points by CNF model enumeration, stopping at `cap`.
pub fn cnf_count_fixed_points(
    closed: &ClosedCircuit,
    cap: usize,
    config: &FixedpointConfig,
) -> Result<CnfCountOutcome, FixedpointError> {
    let (models, saturated) = cnf::enumerate(closed, Some(cap), config.conflict_budget)?;
    Ok(CnfCountOutcome { count: models.len(), saturated, models })
}

/// Finds a single fixed point without ordering guarantees, or proves none
/// exists. Backed by the solver with activity-driven search, so it reaches
/// widths far beyond sweep capacity.
pub fn find_fixed_point(
    closed: &ClosedCircuit,
    config: &FixedpointConfig,
) -> Result<Option<Bits>, FixedpointError> {
    cnf::solve_one(closed, config.conflict_budget)
}
