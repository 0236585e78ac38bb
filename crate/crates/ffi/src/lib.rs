//! C ABI over the circuit toolkit.
//!
//! Conventions:
//!
//! * Handles (`NcCircuit`, `NcClosed`) are opaque and owned by the caller;
//!   every `*_new`-style result must go back through its `*_free`.
//! * Functions return an [`NcStatus`]; out-parameters are written only on
//!   `NC_STATUS_OK`. The message behind the most recent failure on the
//!   current thread is available from [`nc_last_error`].
//! * Strings returned through `char **` are NUL-terminated, UTF-8, and
//!   owned by the caller: release them with [`nc_string_free`].
//! * Bit buffers are one byte per bit, zero or nonzero, index 0 leftmost.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use noncausal_core::circuit::{Circuit, ClosedCircuit};
use noncausal_core::factoring::{factorize, DomainMode, FactorizeError, FactoringError};
use noncausal_core::fixedpoint::{
    check_consistency, decide, DecideError, Decision, EngineChoice, FixedpointConfig,
    FixedpointError, Verdict,
};
use noncausal_core::netlist::{parse, serialize};
use noncausal_core::Bits;

/// Outcome of a call. Anything but `NC_STATUS_OK` leaves the out-parameters
/// untouched and records a message readable via `nc_last_error`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A text argument was not valid UTF-8.
    Utf8 = 2,
    /// The netlist text did not parse.
    Parse = 3,
    /// Widths or shapes do not line up (close mismatch, bad buffer length,
    /// out-of-range argument).
    Shape = 4,
    /// A configured capacity or budget refused the work.
    Capacity = 5,
    /// The circuit has no fixed point.
    NoFixedPoint = 6,
    /// The circuit has more than one fixed point.
    Multiple = 7,
    /// The operation cannot run on this input (for example an engine that
    /// needs a lowered circuit).
    Unsupported = 8,
    /// A defect inside the library; the message has details.
    Internal = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: NcStatus, message: impl AsRef<str>) -> NcStatus {
    let text = message.as_ref().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).expect("NULs are stripped");
    });
    status
}

/// Message behind the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread. Never NULL.
#[no_mangle]
pub extern "C" fn nc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// An open circuit: a gate list with separate input and output boundaries.
pub struct NcCircuit(Circuit);

/// A circuit closed over matching boundaries; the object fixed-point
/// analysis runs on.
pub struct NcClosed(ClosedCircuit);

fn guard(f: impl FnOnce() -> NcStatus) -> NcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(NcStatus::Internal, "internal panic"),
    }
}

unsafe fn read_str<'a>(text: *const c_char) -> Result<&'a str, NcStatus> {
    if text.is_null() {
        return Err(NcStatus::NullArgument);
    }
    CStr::from_ptr(text).to_str().map_err(|_| NcStatus::Utf8)
}

unsafe fn read_bits(data: *const u8, len: usize) -> Result<Bits, NcStatus> {
    if len == 0 {
        return Ok(Bits::new(Vec::new()));
    }
    if data.is_null() {
        return Err(NcStatus::NullArgument);
    }
    let bytes = std::slice::from_raw_parts(data, len);
    Ok(Bits::new(bytes.iter().map(|&b| b != 0).collect()))
}

unsafe fn write_bits(bits: &Bits, out: *mut u8, len: usize) -> NcStatus {
    if bits.len() != len {
        return fail(
            NcStatus::Shape,
            format!("output buffer holds {len} bits, the result needs {}", bits.len()),
        );
    }
    if len > 0 {
        if out.is_null() {
            return fail(NcStatus::NullArgument, "output buffer is NULL");
        }
        let slot = std::slice::from_raw_parts_mut(out, len);
        for (dst, src) in slot.iter_mut().zip(bits.iter()) {
            *dst = u8::from(src);
        }
    }
    NcStatus::Ok
}

fn export_string(text: String) -> *mut c_char {
    CString::new(text.replace('\0', " "))
        .expect("NULs are stripped")
        .into_raw()
}

fn engine_status(e: FixedpointError) -> NcStatus {
    let status = match e {
        FixedpointError::CapacityExceeded { .. } | FixedpointError::BudgetExhausted { .. } => {
            NcStatus::Capacity
        }
        FixedpointError::TableGates => NcStatus::Unsupported,
    };
    fail(status, e.to_string())
}

/// Parses netlist text into a circuit handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_circuit_parse(
    text: *const c_char,
    out: *mut *mut NcCircuit,
) -> NcStatus {
    guard(|| {
        if out.is_null() {
            return fail(NcStatus::NullArgument, "out pointer is NULL");
        }
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return fail(s, "netlist text unreadable"),
        };
        match parse(text) {
            Ok(circuit) => {
                *out = Box::into_raw(Box::new(NcCircuit(circuit)));
                NcStatus::Ok
            }
            Err(e) => fail(NcStatus::Parse, e.to_string()),
        }
    })
}

/// Releases a circuit handle. NULL is a no-op.
///
/// # Safety
/// `circuit` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nc_circuit_free(circuit: *mut NcCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// Number of input wires.
///
/// # Safety
/// `circuit` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_circuit_num_inputs(circuit: *const NcCircuit) -> usize {
    circuit.as_ref().map_or(0, |c| c.0.num_inputs())
}

/// Number of output wires.
///
/// # Safety
/// `circuit` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_circuit_num_outputs(circuit: *const NcCircuit) -> usize {
    circuit.as_ref().map_or(0, |c| c.0.num_outputs())
}

/// Number of gates.
///
/// # Safety
/// `circuit` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_circuit_num_gates(circuit: *const NcCircuit) -> usize {
    circuit.as_ref().map_or(0, |c| c.0.gates().len())
}

/// Serializes the circuit to its canonical netlist document.
///
/// # Safety
/// `circuit` must be a live handle and `out` a valid pointer; the string is
/// released with `nc_string_free`.
#[no_mangle]
pub unsafe extern "C" fn nc_circuit_serialize(
    circuit: *const NcCircuit,
    out: *mut *mut c_char,
) -> NcStatus {
    guard(|| {
        let (Some(c), false) = (circuit.as_ref(), out.is_null()) else {
            return fail(NcStatus::NullArgument, "circuit or out pointer is NULL");
        };
        *out = export_string(serialize(&c.0));
        NcStatus::Ok
    })
}

/// Evaluates the circuit once. `input` holds one byte per input wire and
/// `output` receives one byte per output wire.
///
/// # Safety
/// `circuit` must be a live handle; the buffers must match the stated
/// lengths.
#[no_mangle]
pub unsafe extern "C" fn nc_circuit_eval(
    circuit: *const NcCircuit,
    input: *const u8,
    input_len: usize,
    output: *mut u8,
    output_len: usize,
) -> NcStatus {
    guard(|| {
        let Some(c) = circuit.as_ref() else {
            return fail(NcStatus::NullArgument, "circuit handle is NULL");
        };
        let bits = match read_bits(input, input_len) {
            Ok(b) => b,
            Err(s) => return fail(s, "input buffer is NULL"),
        };
        match c.0.eval(&bits) {
            Ok(result) => write_bits(&result, output, output_len),
            Err(e) => fail(NcStatus::Shape, e.to_string()),
        }
    })
}

/// Rewrites table gates into pure AND/OR/NOT gates, same behavior.
///
/// # Safety
/// `circuit` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_circuit_lower(
    circuit: *const NcCircuit,
    out: *mut *mut NcCircuit,
) -> NcStatus {
    guard(|| {
        let (Some(c), false) = (circuit.as_ref(), out.is_null()) else {
            return fail(NcStatus::NullArgument, "circuit or out pointer is NULL");
        };
        *out = Box::into_raw(Box::new(NcCircuit(c.0.lower())));
        NcStatus::Ok
    })
}

/// Closes the circuit over its boundary, consuming nothing: the input
/// handle stays valid.
///
/// # Safety
/// `circuit` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_circuit_close(
    circuit: *const NcCircuit,
    out: *mut *mut NcClosed,
) -> NcStatus {
    guard(|| {
        let (Some(c), false) = (circuit.as_ref(), out.is_null()) else {
            return fail(NcStatus::NullArgument, "circuit or out pointer is NULL");
        };
        match c.0.clone().close() {
            Ok(closed) => {
                *out = Box::into_raw(Box::new(NcClosed(closed)));
                NcStatus::Ok
            }
            Err(e) => fail(NcStatus::Shape, e.to_string()),
        }
    })
}

/// Releases a closed-circuit handle. NULL is a no-op.
///
/// # Safety
/// `closed` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nc_closed_free(closed: *mut NcClosed) {
    if !closed.is_null() {
        drop(Box::from_raw(closed));
    }
}

/// Width of the closed circuit's state in bits.
///
/// # Safety
/// `closed` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_closed_state_width(closed: *const NcClosed) -> usize {
    closed.as_ref().map_or(0, |c| c.0.state_width())
}

/// Applies the induced map once: `next = F(state)`. Both buffers hold one
/// byte per state bit.
///
/// # Safety
/// `closed` must be a live handle; buffers must match the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn nc_closed_apply(
    closed: *const NcClosed,
    state: *const u8,
    state_len: usize,
    next: *mut u8,
    next_len: usize,
) -> NcStatus {
    guard(|| {
        let Some(c) = closed.as_ref() else {
            return fail(NcStatus::NullArgument, "closed handle is NULL");
        };
        let bits = match read_bits(state, state_len) {
            Ok(b) => b,
            Err(s) => return fail(s, "state buffer is NULL"),
        };
        match c.0.apply(&bits) {
            Ok(result) => write_bits(&result, next, next_len),
            Err(e) => fail(NcStatus::Shape, e.to_string()),
        }
    })
}

/// Classifies the closed circuit by its fixed points.
///
/// On `NC_STATUS_OK`, `kind` is 0 for exactly one fixed point (written to
/// `first` as a bit string), 1 for none, 2 for several (the two smallest
/// written to `first` and `second`). Unused string slots are set to NULL.
///
/// # Safety
/// `closed` must be a live handle; `kind`, `first`, and `second` must be
/// valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nc_closed_check(
    closed: *const NcClosed,
    kind: *mut i32,
    first: *mut *mut c_char,
    second: *mut *mut c_char,
) -> NcStatus {
    guard(|| {
        let Some(c) = closed.as_ref() else {
            return fail(NcStatus::NullArgument, "closed handle is NULL");
        };
        if kind.is_null() || first.is_null() || second.is_null() {
            return fail(NcStatus::NullArgument, "an out pointer is NULL");
        }
        let prepared;
        let target = if c.0.inner().has_table_gates() {
            prepared = c.0.inner().lower().close().expect("lowering keeps the shape");
            &prepared
        } else {
            &c.0
        };
        match check_consistency(target, EngineChoice::Auto, &FixedpointConfig::default()) {
            Ok(report) => {
                let (k, a, b) = match report.verdict {
                    Verdict::Consistent { fixed_point } => {
                        (0, export_string(fixed_point.to_string()), ptr::null_mut())
                    }
                    Verdict::NoFixedPoint => (1, ptr::null_mut(), ptr::null_mut()),
                    Verdict::MultipleFixedPoints { first, second } => (
                        2,
                        export_string(first.to_string()),
                        export_string(second.to_string()),
                    ),
                };
                *kind = k;
                *first = a;
                *second = b;
                NcStatus::Ok
            }
            Err(e) => engine_status(e),
        }
    })
}

/// Reads the accept/reject verdict of a consistent closed circuit: the
/// leading state bit is the flag, the rest is the witness.
///
/// On `NC_STATUS_OK`, `accepted` is 0 or 1 and `witness` holds the
/// remaining bits as a string. An inconsistent circuit fails with
/// `NC_STATUS_NO_FIXED_POINT` or `NC_STATUS_MULTIPLE`.
///
/// # Safety
/// `closed` must be a live handle; `accepted` and `witness` must be valid
/// pointers.
#[no_mangle]
pub unsafe extern "C" fn nc_closed_decide(
    closed: *const NcClosed,
    accepted: *mut i32,
    witness: *mut *mut c_char,
) -> NcStatus {
    guard(|| {
        let Some(c) = closed.as_ref() else {
            return fail(NcStatus::NullArgument, "closed handle is NULL");
        };
        if accepted.is_null() || witness.is_null() {
            return fail(NcStatus::NullArgument, "an out pointer is NULL");
        }
        let prepared;
        let target = if c.0.inner().has_table_gates() {
            prepared = c.0.inner().lower().close().expect("lowering keeps the shape");
            &prepared
        } else {
            &c.0
        };
        match decide(target, EngineChoice::Auto, &FixedpointConfig::default()) {
            Ok(Decision::Accept(w)) => {
                *accepted = 1;
                *witness = export_string(w.to_string());
                NcStatus::Ok
            }
            Ok(Decision::Reject(w)) => {
                *accepted = 0;
                *witness = export_string(w.to_string());
                NcStatus::Ok
            }
            Err(DecideError::Inconsistent(report)) => {
                let status = match report.verdict {
                    Verdict::NoFixedPoint => NcStatus::NoFixedPoint,
                    _ => NcStatus::Multiple,
                };
                fail(status, format!("not decidable: {}", report.verdict.label()))
            }
            Err(DecideError::EmptyState) => {
                fail(NcStatus::Shape, DecideError::EmptyState.to_string())
            }
            Err(DecideError::Engine(e)) => engine_status(e),
        }
    })
}

/// Factors `n` through its fixed-point circuit. With `paper_strict`
/// nonzero the field domain excludes `n` itself, so primes fail with
/// `NC_STATUS_NO_FIXED_POINT`. On success `display` holds a rendering
/// like `3 * 2^2`.
///
/// # Safety
/// `display` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_factor(
    n: u64,
    paper_strict: i32,
    display: *mut *mut c_char,
) -> NcStatus {
    guard(|| {
        if display.is_null() {
            return fail(NcStatus::NullArgument, "display out pointer is NULL");
        }
        let mode = if paper_strict != 0 { DomainMode::PaperStrict } else { DomainMode::Extended };
        match factorize(n, mode, EngineChoice::Auto, &FixedpointConfig::default()) {
            Ok(f) => {
                *display = export_string(f.to_string());
                NcStatus::Ok
            }
            Err(FactorizeError::NoFixedPoint { .. }) => {
                fail(NcStatus::NoFixedPoint, format!("{n} has no factorization in this domain"))
            }
            Err(FactorizeError::Ambiguous { .. }) => {
                fail(NcStatus::Multiple, format!("{n}: several fixed points"))
            }
            Err(FactorizeError::Build(e @ FactoringError::TargetTooSmall(_))) => {
                fail(NcStatus::Shape, e.to_string())
            }
            Err(FactorizeError::Build(e)) => fail(NcStatus::Capacity, e.to_string()),
            Err(FactorizeError::Engine(e)) => engine_status(e),
            Err(FactorizeError::Decode(e)) => fail(NcStatus::Internal, e.to_string()),
        }
    })
}

/// Releases a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `text` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nc_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}
