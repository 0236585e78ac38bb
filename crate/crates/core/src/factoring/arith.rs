//! Arithmetic circuit building blocks.
//!
//! Internal helpers work on least-significant-bit-first wire vectors, which
//! keeps the carry chains readable; the public circuit builders convert to
//! and from the library's most-significant-bit-first port order at the
//! boundary.

use thiserror::Error;

use crate::circuit::{Circuit, CircuitBuilder, WireId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("width must be at least 1")]
    ZeroWidth,
    #[error("a product of {slots} slots at {value_width}+{exp_width} bits is empty")]
    NoSlots { slots: usize, value_width: usize, exp_width: usize },
}

/// Sum of up to three optional one-bit terms: returns (sum, carry).
/// Absent terms count as zero.
fn add3(
    b: &mut CircuitBuilder,
    x: Option<WireId>,
    y: Option<WireId>,
    z: Option<WireId>,
) -> (WireId, Option<WireId>) {
    let mut terms: Vec<WireId> = [x, y, z].into_iter().flatten().collect();
    match terms.len() {
        0 => (b.const0(), None),
        1 => (terms.pop().expect("one term"), None),
        2 => {
            let (p, q) = (terms[0], terms[1]);
            let sum = b.xor(p, q);
            let carry = b.and(p, q);
            (sum, Some(carry))
        }
        _ => {
            let (p, q, r) = (terms[0], terms[1], terms[2]);
            let pq = b.xor(p, q);
            let sum = b.xor(pq, r);
            let c1 = b.and(p, q);
            let c2 = b.and(pq, r);
            let carry = b.or(c1, c2);
            (sum, Some(carry))
        }
    }
}

/// `acc + (row << shift)` over LSB-first vectors, exact width.
fn add_shifted(
    b: &mut CircuitBuilder,
    acc: &[WireId],
    row: &[WireId],
    shift: usize,
) -> Vec<WireId> {
    let span = acc.len().max(shift + row.len());
    let mut out = Vec::with_capacity(span + 1);
    let mut carry: Option<WireId> = None;
    for i in 0..span {
        let a = acc.get(i).copied();
        let r = i.checked_sub(shift).and_then(|j| row.get(j).copied());
        let (bit, next) = add3(b, a, r, carry);
        out.push(bit);
        carry = next;
    }
    if let Some(c) = carry {
        out.push(c);
    }
    out
}

/// Schoolbook product of two LSB-first vectors, exactly
/// `x.len() + y.len()` bits wide.
pub(super) fn multiply_lsb(b: &mut CircuitBuilder, x: &[WireId], y: &[WireId]) -> Vec<WireId> {
    let width = x.len() + y.len();
    let mut acc: Vec<WireId> = Vec::new();
    for (j, &yj) in y.iter().enumerate() {
        let row: Vec<WireId> = x.iter().map(|&xi| b.and(xi, yj)).collect();
        acc = add_shifted(b, &acc, &row, j);
    }
    while acc.len() < width {
        acc.push(b.const0());
    }
    acc.truncate(width);
    acc
}

/// Strict comparison `x < y` of equal-length LSB-first vectors.
pub(super) fn less_than_lsb(b: &mut CircuitBuilder, x: &[WireId], y: &[WireId]) -> WireId {
    assert_eq!(x.len(), y.len());
    // Ripple from the LSB: a higher bit settles the question, equality
    // defers to the bits below.
    let mut lt = b.const0();
    for (&xi, &yi) in x.iter().zip(y) {
        let nx = b.not(xi);
        let here = b.and(nx, yi);
        let same = b.xnor(xi, yi);
        let defer = b.and(same, lt);
        lt = b.or(here, defer);
    }
    lt
}

/// `x == k` for an LSB-first vector against a constant. The constant must
/// fit the width.
pub(super) fn equals_const_lsb(b: &mut CircuitBuilder, x: &[WireId], k: u64) -> WireId {
    assert!(x.len() >= 64 - k.leading_zeros() as usize, "constant wider than the vector");
    let per_bit: Vec<WireId> = x
        .iter()
        .enumerate()
        .map(|(i, &xi)| if (k >> i) & 1 == 1 { xi } else { b.not(xi) })
        .collect();
    b.and_tree(&per_bit)
}

/// `x <= k` for an LSB-first vector against a constant.
pub(super) fn ule_const_lsb(b: &mut CircuitBuilder, x: &[WireId], k: u64) -> WireId {
    // x > k iff at some position x has 1 where k has 0 and all higher bits
    // match; scan from the top maintaining prefix equality.
    let mut gt = b.const0();
    let mut prefix_eq: Option<WireId> = None;
    for (i, &xi) in x.iter().enumerate().rev() {
        let k_bit = i < 64 && (k >> i) & 1 == 1;
        if !k_bit {
            let term = match prefix_eq {
                None => xi,
                Some(eq) => b.and(eq, xi),
            };
            gt = b.or(gt, term);
        }
        let eq_here = if k_bit { xi } else { b.not(xi) };
        prefix_eq = Some(match prefix_eq {
            None => eq_here,
            Some(eq) => b.and(eq, eq_here),
        });
    }
    b.not(gt)
}

/// `x >= 1`, i.e. not all zero.
pub(super) fn nonzero(b: &mut CircuitBuilder, x: &[WireId]) -> WireId {
    b.or_tree(x)
}

/// Per-bit select between two equal-length vectors.
pub(super) fn mux_vec(
    b: &mut CircuitBuilder,
    sel: WireId,
    on_true: &[WireId],
    on_false: &[WireId],
) -> Vec<WireId> {
    assert_eq!(on_true.len(), on_false.len());
    on_true
        .iter()
        .zip(on_false)
        .map(|(&t, &f)| b.mux(sel, t, f))
        .collect()
}

/// The register value 1 at the given width.
fn one_reg(b: &mut CircuitBuilder, width: usize) -> Vec<WireId> {
    (0..width)
        .map(|i| if i == 0 { b.const1() } else { b.const0() })
        .collect()
}

pub(super) struct PowerProduct {
    /// LSB-first, `acc_width` bits.
    pub bits: Vec<WireId>,
    /// Sticky flag. When set, the true product does not fit `acc_width`
    /// bits and the product bits are unspecified; when clear, the bits hold
    /// the exact product.
    pub overflow: WireId,
}

/// Builds the running product `base_1^{exp_1} ... base_s^{exp_s}` into an
/// `acc_width`-bit register, LSB-first inputs.
///
/// Each slot is exponentiated by square and multiply over the low
/// `ilog2(acc_width) + 1` exponent bits; higher exponent bits cannot matter
/// for an in-range result, because a base of at least 2 raised past that
/// window already exceeds the register, so they just force the overflow
/// flag. A zero base with a nonzero exponent zeroes the whole product
/// exactly, flag clear.
pub(super) fn power_product_lsb(
    b: &mut CircuitBuilder,
    slots: &[(Vec<WireId>, Vec<WireId>)],
    acc_width: usize,
) -> PowerProduct {
    assert!(acc_width >= 1);
    let window = acc_width.ilog2() as usize + 1;
    let mut overflow = b.const0();
    let mut killed = b.const0();
    let mut acc = one_reg(b, acc_width);
    for (base, exp) in slots {
        let zero_base = {
            let nz = nonzero(b, base);
            b.not(nz)
        };
        let exp_set = nonzero(b, exp);
        let kill = b.and(zero_base, exp_set);
        killed = b.or(killed, kill);
        let base_large = nonzero(b, &base[1.min(base.len())..]);
        let high = &exp[window.min(exp.len())..];
        let high_set = nonzero(b, high);
        let force = b.and(base_large, high_set);
        overflow = b.or(overflow, force);
        // Square and multiply over the window, most significant bit first.
        // The leading square of the initial 1 is skipped.
        let low = &exp[..window.min(exp.len())];
        let mut power = one_reg(b, acc_width);
        for (step, &bit) in low.iter().rev().enumerate() {
            if step > 0 {
                let full = multiply_lsb(b, &power, &power);
                let spill = nonzero(b, &full[acc_width..]);
                overflow = b.or(overflow, spill);
                power = full[..acc_width].to_vec();
            }
            let full = multiply_lsb(b, &power, base);
            let spill = nonzero(b, &full[acc_width..]);
            let spill_used = b.and(bit, spill);
            overflow = b.or(overflow, spill_used);
            power = mux_vec(b, bit, &full[..acc_width], &power);
        }
        let full = multiply_lsb(b, &acc, &power);
        let spill = nonzero(b, &full[acc_width..]);
        overflow = b.or(overflow, spill);
        acc = full[..acc_width].to_vec();
    }
    let live = b.not(killed);
    let bits = acc.iter().map(|&w| b.and(w, live)).collect();
    let overflow = b.and(overflow, live);
    PowerProduct { bits, overflow }
}

/// Reverses a most-significant-first port slice into LSB-first working
/// order.
pub(super) fn to_lsb(wires: &[WireId]) -> Vec<WireId> {
    wires.iter().rev().copied().collect()
}

/// Strict less-than predicate circuit: `2 * width` inputs, the first
/// operand then the second, each most significant bit first; one output,
/// true when the first is smaller.
pub fn comparator(width: usize) -> Result<Circuit, ArithError> {
    if width == 0 {
        return Err(ArithError::ZeroWidth);
    }
    let mut b = CircuitBuilder::new(2 * width);
    let ins = b.inputs();
    let x = to_lsb(&ins[..width]);
    let y = to_lsb(&ins[width..]);
    let lt = less_than_lsb(&mut b, &x, &y);
    Ok(b.finish(vec![lt]))
}

/// Equality predicate circuit with the same port order as [`comparator`].
pub fn equality(width: usize) -> Result<Circuit, ArithError> {
    if width == 0 {
        return Err(ArithError::ZeroWidth);
    }
    let mut b = CircuitBuilder::new(2 * width);
    let ins = b.inputs();
    let eq = b.equals(&ins[..width].to_vec(), &ins[width..].to_vec());
    Ok(b.finish(vec![eq]))
}

/// Power-product circuit. Inputs are `slots` base registers of
/// `value_width` bits followed by `slots` exponent registers of
/// `exp_width` bits, each most significant bit first. Outputs are the
/// product in `2 * value_width` bits, most significant first, then the
/// sticky overflow flag. When the flag is set the product bits are
/// unspecified; when clear they are exact.
pub fn bounded_product(
    value_width: usize,
    exp_width: usize,
    slots: usize,
) -> Result<Circuit, ArithError> {
    if value_width == 0 || exp_width == 0 {
        return Err(ArithError::ZeroWidth);
    }
    if slots == 0 {
        return Err(ArithError::NoSlots { slots, value_width, exp_width });
    }
    let mut b = CircuitBuilder::new(slots * (value_width + exp_width));
    let ins = b.inputs();
    let groups: Vec<(Vec<WireId>, Vec<WireId>)> = (0..slots)
        .map(|i| {
            let base = to_lsb(&ins[i * value_width..(i + 1) * value_width]);
            let exp_start = slots * value_width + i * exp_width;
            let exp = to_lsb(&ins[exp_start..exp_start + exp_width]);
            (base, exp)
        })
        .collect();
    let product = power_product_lsb(&mut b, &groups, 2 * value_width);
    let mut outs: Vec<WireId> = product.bits.iter().rev().copied().collect();
    outs.push(product.overflow);
    Ok(b.finish(outs))
}
