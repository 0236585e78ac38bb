//! Factoring as a fixed-point problem.
//!
//! For a target N the builder emits a closed circuit over a state holding a
//! flag bit, a row of candidate factors, and a row of candidate exponents.
//! The circuit checks the candidate rows: every field in range, factors
//! sorted strictly decreasing with 1-padding, factors prime or 1, padding
//! exponents exactly 1, and the product of powers equal to N. A state that
//! passes everything keeps its rows and forces the flag to 0; any failure
//! returns the state with only the flag negated. The unique fixed point is
//! therefore flag 0 over the canonical factorization, and finding it is
//! factoring.
//!
//! Two encodings of the domain exist. `Extended` lets fields hold values up
//! to N itself, so prime targets have their one-slot factorization and
//! every N has a unique fixed point. `PaperStrict` caps fields at N - 1,
//! which cannot express a prime target: those circuits have no fixed point
//! at all, and the library reports that honestly rather than patching over
//! it. `PaperStrict` exists for fidelity experiments; `Extended` is the
//! default.

mod arith;

pub use arith::{bounded_product, comparator, equality, ArithError};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bits::Bits;
use crate::circuit::{CircuitBuilder, ClosedCircuit, TruthTable, WireId, MAX_TABLE_ARITY};
use crate::fixedpoint::{
    check_consistency, find_fixed_point, Engine, EngineChoice, FixedpointConfig,
    FixedpointError, Verdict,
};

/// Which values a factor or exponent field may hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DomainMode {
    /// Fields range over {1, ..., N}. Every target has a unique fixed
    /// point.
    #[default]
    Extended,
    /// Fields range over {1, ..., N - 1}. Prime targets are inexpressible
    /// and their circuits have no fixed point.
    PaperStrict,
}

impl DomainMode {
    pub fn name(self) -> &'static str {
        match self {
            DomainMode::Extended => "extended",
            DomainMode::PaperStrict => "paper-strict",
        }
    }
}

impl fmt::Display for DomainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown domain mode {0:?}; expected extended or paper-strict")]
pub struct ParseDomainModeError(String);

impl FromStr for DomainMode {
    type Err = ParseDomainModeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "extended" => Ok(DomainMode::Extended),
            "paper-strict" => Ok(DomainMode::PaperStrict),
            other => Err(ParseDomainModeError(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactoringError {
    #[error("the target must be at least 2, got {0}")]
    TargetTooSmall(u64),
    #[error(
        "target {n} needs {width}-bit fields, but the primality gate is \
         limited to {max} operands"
    )]
    TargetTooLarge { n: u64, width: usize, max: usize },
    #[error("a primality predicate needs a width between 1 and {max}, got {width}")]
    BadPrimalityWidth { width: usize, max: usize },
}

/// Deterministic trial division. The basis for the primality gate's table
/// and for re-checking decoded factors.
fn is_prime(v: u64) -> bool {
    if v < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= v {
        if v % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// One-output predicate over `value_width` inputs accepting exactly the
/// primes. Implemented as a table gate, so it can be lowered to pure gates
/// when needed.
pub fn primality_subcircuit(value_width: usize) -> Result<crate::circuit::Circuit, FactoringError> {
    if value_width == 0 || value_width > MAX_TABLE_ARITY {
        return Err(FactoringError::BadPrimalityWidth {
            width: value_width,
            max: MAX_TABLE_ARITY,
        });
    }
    let table = TruthTable::predicate(value_width, is_prime)
        .expect("primality tables are well formed");
    let mut b = CircuitBuilder::new(value_width);
    let ins = b.inputs();
    let outs = b.table(ins, table);
    Ok(b.finish(outs))
}

fn bit_length(v: u64) -> usize {
    (64 - v.leading_zeros()) as usize
}

fn ceil_log2(v: u64) -> usize {
    if v <= 1 {
        0
    } else {
        bit_length(v - 1)
    }
}

/// Field geometry of a factoring state: the flag bit, then `slots` factor
/// fields of `value_width` bits, then `slots` exponent fields of
/// `exp_width` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactoringShape {
    pub target: u64,
    pub mode: DomainMode,
    pub slots: usize,
    pub value_width: usize,
    pub exp_width: usize,
}

impl FactoringShape {
    /// The reference geometry: `ceil(log2 N)` slots and equal factor and
    /// exponent widths sized to the domain.
    pub fn paper(n: u64, mode: DomainMode) -> Result<Self, FactoringError> {
        if n < 2 {
            return Err(FactoringError::TargetTooSmall(n));
        }
        let slots = ceil_log2(n);
        let value_width = match mode {
            DomainMode::Extended => bit_length(n),
            DomainMode::PaperStrict => ceil_log2(n),
        };
        if value_width > MAX_TABLE_ARITY {
            return Err(FactoringError::TargetTooLarge {
                n,
                width: value_width,
                max: MAX_TABLE_ARITY,
            });
        }
        Ok(FactoringShape { target: n, mode, slots, value_width, exp_width: value_width })
    }

    /// A geometry trimmed to the target's actual factorization: one slot
    /// per distinct prime, factor fields just wide enough for the largest
    /// prime factor, exponent fields just wide enough for the largest
    /// possible exponent. The fixed-point set is the same as the reference
    /// geometry's; only the state width shrinks. Intended for exhaustive
    /// testing.
    pub fn compact(n: u64, mode: DomainMode) -> Result<Self, FactoringError> {
        if n < 2 {
            return Err(FactoringError::TargetTooSmall(n));
        }
        let mut distinct = 0usize;
        let mut largest = 2u64;
        let mut rest = n;
        let mut d = 2u64;
        while d.saturating_mul(d) <= rest {
            if rest % d == 0 {
                distinct += 1;
                largest = d;
                while rest % d == 0 {
                    rest /= d;
                }
            }
            d += 1;
        }
        if rest > 1 {
            distinct += 1;
            largest = largest.max(rest);
        }
        let slots = distinct.max(1);
        let value_width = bit_length(largest);
        if value_width > MAX_TABLE_ARITY {
            return Err(FactoringError::TargetTooLarge {
                n,
                width: value_width,
                max: MAX_TABLE_ARITY,
            });
        }
        let max_exponent = bit_length(n) - 1;
        let exp_width = ceil_log2(max_exponent as u64) + 1;
        Ok(FactoringShape { target: n, mode, slots, value_width, exp_width })
    }

    pub fn state_width(&self) -> usize {
        1 + self.slots * (self.value_width + self.exp_width)
    }

    /// Largest value the domain admits in a factor or exponent position.
    fn domain_max(&self) -> u64 {
        match self.mode {
            DomainMode::Extended => self.target,
            DomainMode::PaperStrict => self.target - 1,
        }
    }

    fn factor_max(&self) -> u64 {
        self.domain_max().min((1u64 << self.value_width) - 1)
    }

    fn exponent_max(&self) -> u64 {
        self.domain_max().min((1u64 << self.exp_width) - 1)
    }

    fn factor_range(&self, slot: usize) -> std::ops::Range<usize> {
        let start = 1 + slot * self.value_width;
        start..start + self.value_width
    }

    fn exponent_range(&self, slot: usize) -> std::ops::Range<usize> {
        let start = 1 + self.slots * self.value_width + slot * self.exp_width;
        start..start + self.exp_width
    }

    /// The canonical state for a factor list: flag 0, factors padded with
    /// 1s, exponents padded with 1s.
    pub fn encode(&self, factors: &[(u64, u32)]) -> Result<Bits, DecodeError> {
        if factors.len() > self.slots {
            return Err(DecodeError::NotCanonical {
                reason: format!(
                    "{} factors do not fit {} slots",
                    factors.len(),
                    self.slots
                ),
            });
        }
        let mut state = Bits::zeros(0);
        state.push(false);
        for i in 0..self.slots {
            let value = factors.get(i).map_or(1, |&(p, _)| p);
            let field = Bits::from_uint(value, self.value_width).map_err(|_| {
                DecodeError::NotCanonical { reason: format!("factor {value} overflows the field") }
            })?;
            state = state.concat(&field);
        }
        for i in 0..self.slots {
            let value = factors.get(i).map_or(1, |&(_, e)| u64::from(e));
            let field = Bits::from_uint(value, self.exp_width).map_err(|_| {
                DecodeError::NotCanonical {
                    reason: format!("exponent {value} overflows the field"),
                }
            })?;
            state = state.concat(&field);
        }
        Ok(state)
    }

    /// Reads a fixed point back into a factor list, checking every
    /// canonical-form invariant on the way.
    pub fn decode(&self, state: &Bits) -> Result<Factorization, DecodeError> {
        if state.len() != self.state_width() {
            return Err(DecodeError::WrongWidth {
                expected: self.state_width(),
                found: state.len(),
            });
        }
        if state.get(0) {
            return Err(DecodeError::FlagSet);
        }
        let field = |range: std::ops::Range<usize>| {
            state
                .slice(range.start, range.end - range.start)
                .to_uint()
                .expect("field fits in 64 bits")
        };
        let mut factors = Vec::new();
        let mut padding = false;
        let mut previous = u64::MAX;
        for i in 0..self.slots {
            let a = field(self.factor_range(i));
            let e = field(self.exponent_range(i));
            if a == 1 {
                padding = true;
                if e != 1 {
                    return Err(DecodeError::NotCanonical {
                        reason: format!("padding slot {i} has exponent {e}"),
                    });
                }
                continue;
            }
            if padding {
                return Err(DecodeError::NotCanonical {
                    reason: format!("factor {a} appears after padding began"),
                });
            }
            if a >= previous {
                return Err(DecodeError::NotCanonical {
                    reason: format!("factors not strictly decreasing at slot {i}"),
                });
            }
            if !is_prime(a) {
                return Err(DecodeError::NotCanonical {
                    reason: format!("factor {a} is not prime"),
                });
            }
            if e == 0 {
                return Err(DecodeError::NotCanonical {
                    reason: format!("factor {a} has exponent 0"),
                });
            }
            previous = a;
            factors.push((a, e as u32));
        }
        let result = Factorization { n: self.target, factors };
        match result.product() {
            Some(p) if p == self.target => Ok(result),
            _ => Err(DecodeError::NotCanonical {
                reason: "product does not reach the target".to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("state is {found} bits, the shape needs {expected}")]
    WrongWidth { expected: usize, found: usize },
    #[error("state flag is set; fixed points carry flag 0")]
    FlagSet,
    #[error("state is not a canonical factorization: {reason}")]
    NotCanonical { reason: String },
}

/// A factorization into prime powers, primes strictly decreasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// The product of the prime powers, unless it overflows.
    pub fn product(&self) -> Option<u64> {
        self.factors.iter().try_fold(1u64, |acc, &(p, e)| {
            acc.checked_mul(p.checked_pow(e)?)
        })
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, &(p, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " * ")?;
            }
            if e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Builds the closed factoring circuit for an explicit geometry.
pub fn build_circuit_for_shape(shape: &FactoringShape) -> Result<ClosedCircuit, FactoringError> {
    if shape.target < 2 {
        return Err(FactoringError::TargetTooSmall(shape.target));
    }
    let mut b = CircuitBuilder::new(shape.state_width());
    let flag = b.input(0);
    let ins = b.inputs();
    let factor_msb: Vec<&[WireId]> = (0..shape.slots)
        .map(|i| &ins[shape.factor_range(i)])
        .collect();
    let factor_lsb: Vec<Vec<WireId>> =
        factor_msb.iter().map(|w| arith::to_lsb(w)).collect();
    let exponent_lsb: Vec<Vec<WireId>> = (0..shape.slots)
        .map(|i| arith::to_lsb(&ins[shape.exponent_range(i)]))
        .collect();

    let mut checks: Vec<WireId> = Vec::new();

    // Range: every field holds a value in {1, ..., max}.
    let factor_max = shape.factor_max();
    let exponent_max = shape.exponent_max();
    for a in &factor_lsb {
        let ge1 = arith::nonzero(&mut b, a);
        let le = arith::ule_const_lsb(&mut b, a, factor_max);
        checks.push(ge1);
        checks.push(le);
    }
    for e in &exponent_lsb {
        let ge1 = arith::nonzero(&mut b, e);
        let le = arith::ule_const_lsb(&mut b, e, exponent_max);
        checks.push(ge1);
        checks.push(le);
    }

    // Ordering: factors strictly decreasing, except that the padding value
    // 1 may repeat.
    let is_one: Vec<WireId> = factor_lsb
        .iter()
        .map(|a| arith::equals_const_lsb(&mut b, a, 1))
        .collect();
    for i in 0..shape.slots.saturating_sub(1) {
        let rising = arith::less_than_lsb(&mut b, &factor_lsb[i], &factor_lsb[i + 1]);
        let equal = b.equals(&factor_lsb[i], &factor_lsb[i + 1]);
        let not_one = b.not(is_one[i]);
        let dup = b.and(equal, not_one);
        let bad = b.or(rising, dup);
        let ok = b.not(bad);
        checks.push(ok);
    }

    // Validity: factors are prime or 1, and padding slots carry exponent 1.
    let primality = primality_subcircuit(shape.value_width)?;
    for i in 0..shape.slots {
        let prime = b.append_circuit(&primality, factor_msb[i])[0];
        let admissible = b.or(prime, is_one[i]);
        checks.push(admissible);
        let exp_tail = &exponent_lsb[i][1.min(exponent_lsb[i].len())..];
        let exp_above_one = b.or_tree(exp_tail);
        let bad_padding = b.and(is_one[i], exp_above_one);
        let ok = b.not(bad_padding);
        checks.push(ok);
    }

    // Product: the powers multiply out to exactly the target. The register
    // is one bit wider than the target needs, so the overflow flag firing
    // always means the true product missed the target.
    let slots_for_product: Vec<(Vec<WireId>, Vec<WireId>)> = factor_lsb
        .iter()
        .cloned()
        .zip(exponent_lsb.iter().cloned())
        .collect();
    let acc_width = bit_length(shape.target);
    let product = arith::power_product_lsb(&mut b, &slots_for_product, acc_width);
    let hit = arith::equals_const_lsb(&mut b, &product.bits, shape.target);
    let no_spill = b.not(product.overflow);
    checks.push(hit);
    checks.push(no_spill);

    let pass = b.and_tree(&checks);
    // Success pins the flag to 0; failure negates it and everything else
    // passes through, so a failing state never maps to itself.
    let pass_or_flag = b.or(pass, flag);
    let next_flag = b.not(pass_or_flag);

    let mut outs = vec![next_flag];
    outs.extend_from_slice(&ins[1..]);
    let circuit = b.finish(outs);
    Ok(circuit.close().expect("factoring states are closed by construction"))
}

/// Builds the reference-geometry circuit for a target.
pub fn build_factoring_circuit(n: u64, mode: DomainMode) -> Result<ClosedCircuit, FactoringError> {
    build_circuit_for_shape(&FactoringShape::paper(n, mode)?)
}

/// Builds the trimmed-geometry circuit for a target.
pub fn build_compact_factoring_circuit(
    n: u64,
    mode: DomainMode,
) -> Result<ClosedCircuit, FactoringError> {
    build_circuit_for_shape(&FactoringShape::compact(n, mode)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactorizeError {
    #[error(transparent)]
    Build(#[from] FactoringError),
    #[error(transparent)]
    Engine(#[from] FixedpointError),
    #[error("no fixed point: {n} is not factorable over the {mode} domain")]
    NoFixedPoint { n: u64, mode: DomainMode },
    #[error(
        "multiple fixed points for target {n}; the construction guarantees \
         uniqueness, so this is an internal defect"
    )]
    Ambiguous { n: u64 },
    #[error("fixed point failed to decode: {0}")]
    Decode(#[from] DecodeError),
}

/// Factors a target by finding the fixed point of its circuit. Sweeping
/// engines are used when the state is small enough, otherwise the solver
/// hunts for the fixed point on the lowered circuit.
pub fn factorize(
    n: u64,
    mode: DomainMode,
    choice: EngineChoice,
    config: &FixedpointConfig,
) -> Result<Factorization, FactorizeError> {
    let shape = FactoringShape::paper(n, mode)?;
    let closed = build_circuit_for_shape(&shape)?;
    let engine = match choice {
        EngineChoice::Use(e) => e,
        EngineChoice::Auto => {
            if shape.state_width() <= config.auto_sweep_max_bits as usize {
                Engine::Exhaustive
            } else {
                Engine::CnfCount
            }
        }
    };
    let fixed_point = match engine {
        Engine::Exhaustive | Engine::FunctionalGraph => {
            let report = check_consistency(&closed, EngineChoice::Use(engine), config)?;
            match report.verdict {
                Verdict::Consistent { fixed_point } => Some(fixed_point),
                Verdict::NoFixedPoint => None,
                Verdict::MultipleFixedPoints { .. } => {
                    return Err(FactorizeError::Ambiguous { n })
                }
            }
        }
        Engine::CnfCount => {
            let lowered = closed
                .inner()
                .lower()
                .close()
                .expect("lowering preserves the closed shape");
            find_fixed_point(&lowered, config)?
        }
    };
    match fixed_point {
        Some(state) => Ok(shape.decode(&state)?),
        None => Err(FactorizeError::NoFixedPoint { n, mode }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::enumerate_fixed_points;

    fn defaults() -> FixedpointConfig {
        FixedpointConfig::default()
    }

    /// Independent factoring oracle for expectations.
    fn trial_factors(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut d = 2u64;
        while d * d <= n {
            if n % d == 0 {
                let mut e = 0u32;
                while n % d == 0 {
                    n /= d;
                    e += 1;
                }
                out.push((d, e));
            }
            d += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out.reverse();
        out
    }

    #[test]
    fn primality_by_trial_division() {
        let primes: Vec<u64> = (0..100).filter(|&v| is_prime(v)).collect();
        assert_eq!(
            primes,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67,
                 71, 73, 79, 83, 89, 97]
        );
    }

    #[test]
    fn primality_subcircuit_width_three() {
        let c = primality_subcircuit(3).unwrap();
        let accepted: Vec<u64> = (0..8u64)
            .filter(|&v| c.eval(&Bits::from_uint(v, 3).unwrap()).unwrap().get(0))
            .collect();
        assert_eq!(accepted, vec![2, 3, 5, 7]);
    }

    #[test]
    fn primality_subcircuit_width_limits() {
        assert!(matches!(
            primality_subcircuit(0),
            Err(FactoringError::BadPrimalityWidth { width: 0, max: 16 })
        ));
        assert!(matches!(
            primality_subcircuit(17),
            Err(FactoringError::BadPrimalityWidth { width: 17, max: 16 })
        ));
    }

    #[test]
    fn paper_shapes_match_the_layout_rules() {
        let s = FactoringShape::paper(12, DomainMode::Extended).unwrap();
        assert_eq!((s.slots, s.value_width, s.exp_width), (4, 4, 4));
        assert_eq!(s.state_width(), 33);

        let s = FactoringShape::paper(7, DomainMode::PaperStrict).unwrap();
        assert_eq!((s.slots, s.value_width), (3, 3));
        assert_eq!(s.state_width(), 19);

        let s = FactoringShape::paper(7, DomainMode::Extended).unwrap();
        assert_eq!((s.slots, s.value_width), (3, 3));
        assert_eq!(s.state_width(), 19);

        let s = FactoringShape::paper(1024, DomainMode::Extended).unwrap();
        assert_eq!((s.slots, s.value_width), (10, 11));
        assert_eq!(s.state_width(), 221);

        let s = FactoringShape::paper(2, DomainMode::Extended).unwrap();
        assert_eq!((s.slots, s.value_width), (1, 2));
        assert_eq!(s.state_width(), 5);

        assert!(matches!(
            FactoringShape::paper(1, DomainMode::Extended),
            Err(FactoringError::TargetTooSmall(1))
        ));
    }

    #[test]
    fn compact_shapes_shrink_the_state() {
        let s = FactoringShape::compact(12, DomainMode::Extended).unwrap();
        assert_eq!((s.slots, s.value_width, s.exp_width), (2, 2, 3));
        assert_eq!(s.state_width(), 11);

        let s = FactoringShape::compact(64, DomainMode::Extended).unwrap();
        assert_eq!((s.slots, s.value_width, s.exp_width), (1, 2, 4));
        assert_eq!(s.state_width(), 7);

        let s = FactoringShape::compact(60, DomainMode::Extended).unwrap();
        assert_eq!(s.slots, 3);
        assert!(s.state_width() <= 26);

        for n in 2..=64u64 {
            let s = FactoringShape::compact(n, DomainMode::Extended).unwrap();
            assert!(s.state_width() <= 26, "N={n} needs {} bits", s.state_width());
        }
    }

    #[test]
    fn compact_circuit_has_the_canonical_fixed_point() {
        let shape = FactoringShape::compact(12, DomainMode::Extended).unwrap();
        let closed = build_circuit_for_shape(&shape).unwrap();
        let fps =
            enumerate_fixed_points(&closed, None, EngineChoice::Auto, &defaults()).unwrap();
        assert_eq!(fps.len(), 1);
        let expected = shape.encode(&[(3, 1), (2, 2)]).unwrap();
        assert_eq!(fps[0], expected);
        let decoded = shape.decode(&fps[0]).unwrap();
        assert_eq!(decoded.factors, vec![(3, 1), (2, 2)]);
    }

    #[test]
    fn paper_circuit_for_seven_in_both_modes() {
        let closed = build_factoring_circuit(7, DomainMode::Extended).unwrap();
        let shape = FactoringShape::paper(7, DomainMode::Extended).unwrap();
        let fps =
            enumerate_fixed_points(&closed, None, EngineChoice::Auto, &defaults()).unwrap();
        assert_eq!(fps, vec![shape.encode(&[(7, 1)]).unwrap()]);

        let closed = build_factoring_circuit(7, DomainMode::PaperStrict).unwrap();
        let report = check_consistency(&closed, EngineChoice::Auto, &defaults()).unwrap();
        assert_eq!(report.verdict, Verdict::NoFixedPoint);
    }

    #[test]
    fn factorize_matches_trial_division_over_small_targets() {
        for n in 2..=20u64 {
            let f = factorize(n, DomainMode::Extended, EngineChoice::Auto, &defaults())
                .unwrap();
            assert_eq!(f.factors, trial_factors(n), "N={n}");
            assert_eq!(f.product(), Some(n));
        }
    }

    #[test]
    fn factorize_examples() {
        let f = factorize(12, DomainMode::Extended, EngineChoice::Auto, &defaults()).unwrap();
        assert_eq!(f.factors, vec![(3, 1), (2, 2)]);
        assert_eq!(f.to_string(), "3 * 2^2");

        let f = factorize(4, DomainMode::Extended, EngineChoice::Auto, &defaults()).unwrap();
        assert_eq!(f.factors, vec![(2, 2)]);

        let f = factorize(2, DomainMode::Extended, EngineChoice::Auto, &defaults()).unwrap();
        assert_eq!(f.factors, vec![(2, 1)]);
    }

    #[test]
    fn paper_strict_primes_have_no_fixed_point() {
        for n in [2u64, 3, 5, 7] {
            let err = factorize(n, DomainMode::PaperStrict, EngineChoice::Auto, &defaults())
                .unwrap_err();
            assert!(
                matches!(err, FactorizeError::NoFixedPoint { n: m, .. } if m == n),
                "N={n}: {err}"
            );
        }
        let f = factorize(6, DomainMode::PaperStrict, EngineChoice::Auto, &defaults())
            .unwrap();
        assert_eq!(f.factors, vec![(3, 1), (2, 1)]);
    }

    #[test]
    fn solver_backed_factorize_agrees() {
        for n in [12u64, 30, 97, 128] {
            let f = factorize(n, DomainMode::Extended, EngineChoice::Auto, &defaults())
                .unwrap();
            assert_eq!(f.factors, trial_factors(n), "N={n}");
        }
    }

    #[test]
    fn flip_property_holds_exhaustively_on_a_compact_circuit() {
        let shape = FactoringShape::compact(12, DomainMode::Extended).unwrap();
        let closed = build_circuit_for_shape(&shape).unwrap();
        let width = shape.state_width();
        let mut fixed = 0usize;
        let mut scratch = Vec::new();
        for state in 0..1u64 << width {
            let image = closed.apply_index(state, &mut scratch);
            if image == state {
                fixed += 1;
            } else {
                // The image must differ from the state exactly in the flag,
                // which sits at the top of the index encoding.
                assert_eq!(image ^ state, 1 << (width - 1), "state {state}");
            }
        }
        assert_eq!(fixed, 1);
    }

    #[test]
    fn decode_rejects_malformed_states() {
        let shape = FactoringShape::compact(12, DomainMode::Extended).unwrap();
        let err = shape.decode(&Bits::zeros(3)).unwrap_err();
        assert!(matches!(err, DecodeError::WrongWidth { .. }));

        let mut flagged = shape.encode(&[(3, 1), (2, 2)]).unwrap();
        flagged.set(0, true);
        assert_eq!(shape.decode(&flagged).unwrap_err(), DecodeError::FlagSet);

        // 4 = 2*2 is not prime, and the product is wrong anyway.
        let junk = shape.encode(&[(3, 1), (3, 1)]).unwrap();
        assert!(matches!(
            shape.decode(&junk).unwrap_err(),
            DecodeError::NotCanonical { .. }
        ));
    }

    #[test]
    fn encode_rejects_oversized_entries() {
        let shape = FactoringShape::compact(12, DomainMode::Extended).unwrap();
        assert!(shape.encode(&[(5, 1)]).is_err());
        assert!(shape.encode(&[(3, 1), (2, 1), (2, 1)]).is_err());
    }
}
