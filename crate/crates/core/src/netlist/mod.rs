//! Line-oriented netlist text format.
//!
//! A document is a sequence of statements, one per line, with `#` comments
//! and blank lines allowed anywhere:
//!
//! ```text
//! version 1
//! inputs 2
//! g0 = AND in0 in1
//! g1 = NOT g0
//! g2 g3 = TABLE in0 g1 : 00 01 11 10
//! outputs g1 g2
//! ```
//!
//! `version` is optional and defaults to 1; when present it must be the
//! first statement. `inputs <n>` declares input wires `in0..in<n-1>` and must
//! precede every gate. Each gate line names its output wires on the left of
//! `=`; a `TABLE` gate lists its operands, then `:`, then one row per input
//! index (operand 0 is the most significant index bit), each row one bit per
//! named output. `outputs` lists the circuit outputs and must be the last
//! statement. Any identifier may name a gate output except the reserved
//! input names.
//!
//! Serialization is canonical: gates keep their topological order and wires
//! are renamed to `g0, g1, ...` in allocation order, so structurally equal
//! circuits serialize to byte-identical documents.


use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::bits::Bits;
use crate::circuit::{Circuit, CircuitError, Gate, TruthTable, WireId};

pub mod report;

/// Format version understood by this parser.
pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("version statement must come first")]
    VersionNotFirst,
    #[error("unsupported format version {found}, this parser reads version {FORMAT_VERSION}")]
    UnsupportedVersion { found: u64 },
    #[error("expected {expected}, found `{found}`")]
    UnexpectedToken { expected: &'static str, found: String },
    #[error("expected {expected} before end of line")]
    MissingToken { expected: &'static str },
    #[error("duplicate inputs statement")]
    DuplicateInputs,
    #[error("gate definitions require an inputs statement first")]
    InputsNotDeclared,
    #[error("input wire in{index} is out of range, the header declares inputs {declared}")]
    InputOutOfRange { index: usize, declared: usize },
    #[error("unknown wire name `{name}`")]
    UnknownName { name: String },
    #[error("duplicate definition of `{name}`")]
    DuplicateName { name: String },
    #[error("`{name}` is reserved for input wires")]
    ReservedName { name: String },
    #[error("unknown gate kind `{kind}`")]
    UnknownKind { kind: String },
    #[error("gate kind {kind} takes {expected} operand(s), found {found}; check the arity")]
    WrongArity { kind: &'static str, expected: usize, found: usize },
    #[error("{kind} defines {provided} wire(s) but {required} name(s) were given")]
    WrongNameCount { kind: &'static str, provided: usize, required: usize },
    #[error("table with {arity} operand(s) needs {expected} rows, found {found}")]
    TableRowCount { arity: usize, expected: usize, found: usize },
    #[error("table row `{found}` must be a string over 0 and 1")]
    BadRow { found: String },
    #[error("table row width {found} does not match the {expected} named output(s)")]
    TableRowWidth { expected: usize, found: usize },
    #[error("{0}")]
    Structure(CircuitError),
    #[error("statements are not allowed after outputs")]
    StatementAfterOutputs,
    #[error("document ends without an inputs statement")]
    MissingInputs,
    #[error("document ends without an outputs statement")]
    MissingOutputs,
}

/// Parse failure with a 1-based source position.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn at(line: usize, column: usize, kind: ParseErrorKind) -> Self {
        ParseError { line, column, kind }
    }
}

struct Tok<'a> {
    col: usize,
    text: &'a str,
}

fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let body = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut toks = Vec::new();
    let mut offset = 0usize;
    loop {
        let rest = &body[offset..];
        let trimmed = rest.trim_start();
        offset += rest.len() - trimmed.len();
        if trimmed.is_empty() {
            break;
        }
        let end = trimmed
            .find(char::is_whitespace)
            .unwrap_or(trimmed.len());
        toks.push(Tok { col: col_of(body, offset), text: &trimmed[..end] });
        offset += end;
    }
    toks
}

fn col_of(line: &str, byte_index: usize) -> usize {
    line[..byte_index].chars().count() + 1
}

struct Parser {
    n_in: Option<usize>,
    names: HashMap<String, WireId>,
    gates: Vec<Gate>,
    next_wire: u32,
    outputs: Option<Vec<WireId>>,
    statements: usize,
}

impl Parser {
    fn resolve(&self, line: usize, tok: &Tok<'_>) -> Result<WireId, ParseError> {
        let name = tok.text;
        if let Some(rest) = name.strip_prefix("in") {
            if let Ok(index) = rest.parse::<usize>() {
                let declared = self
                    .n_in
                    .expect("inputs checked before gate parsing");
                if index >= declared {
                    return Err(ParseError::at(
                        line,
                        tok.col,
                        ParseErrorKind::InputOutOfRange { index, declared },
                    ));
                }
                return Ok(WireId(index as u32));
            }
        }
        self.names.get(name).copied().ok_or_else(|| {
            ParseError::at(line, tok.col, ParseErrorKind::UnknownName { name: name.into() })
        })
    }

    fn define(&mut self, line: usize, tok: &Tok<'_>) -> Result<(), ParseError> {
        let name = tok.text;
        if let Some(rest) = name.strip_prefix("in") {
            if rest.parse::<usize>().is_ok() {
                return Err(ParseError::at(
                    line,
                    tok.col,
                    ParseErrorKind::ReservedName { name: name.into() },
                ));
            }
        }
        if self.names.contains_key(name) {
            return Err(ParseError::at(
                line,
                tok.col,
                ParseErrorKind::DuplicateName { name: name.into() },
            ));
        }
        self.names.insert(name.to_string(), WireId(self.next_wire));
        self.next_wire += 1;
        Ok(())
    }
}

/// Parses a netlist document into a circuit.
pub fn parse(text: &str) -> Result<Circuit, ParseError> {
    let mut p = Parser {
        n_in: None,
        names: HashMap::new(),
        gates: Vec::new(),
        next_wire: 0,
        outputs: None,
        statements: 0,
    };
    let mut line_count = 0usize;
    for (line_index, raw) in text.lines().enumerate() {
        let line = line_index + 1;
        line_count = line;
        let toks = tokenize(raw);
        if toks.is_empty() {
            continue;
        }
        if p.outputs.is_some() {
            return Err(ParseError::at(line, toks[0].col, ParseErrorKind::StatementAfterOutputs));
        }
        match toks[0].text {
            "version" => {
                if p.statements > 0 {
                    return Err(ParseError::at(line, toks[0].col, ParseErrorKind::VersionNotFirst));
                }
                let tok = expect_token(&toks, 1, line, "a version number")?;
                let found = tok.text.parse::<u64>().map_err(|_| {
                    ParseError::at(
                        line,
                        tok.col,
                        ParseErrorKind::UnexpectedToken {
                            expected: "a version number",
                            found: tok.text.into(),
                        },
                    )
                })?;
                expect_end(&toks, 2, line)?;
                if found != FORMAT_VERSION {
                    return Err(ParseError::at(
                        line,
                        tok.col,
                        ParseErrorKind::UnsupportedVersion { found },
                    ));
                }
            }
            "inputs" => {
                if p.n_in.is_some() {
                    return Err(ParseError::at(line, toks[0].col, ParseErrorKind::DuplicateInputs));
                }
                let tok = expect_token(&toks, 1, line, "an input count")?;
                let count = tok.text.parse::<usize>().map_err(|_| {
                    ParseError::at(
                        line,
                        tok.col,
                        ParseErrorKind::UnexpectedToken {
                            expected: "an input count",
                            found: tok.text.into(),
                        },
                    )
                })?;
                expect_end(&toks, 2, line)?;
                p.n_in = Some(count);
                p.next_wire = count as u32;
            }
            "outputs" => {
                if p.n_in.is_none() {
                    return Err(ParseError::at(line, toks[0].col, ParseErrorKind::InputsNotDeclared));
                }
                let mut outs = Vec::new();
                for tok in &toks[1..] {
                    outs.push(p.resolve(line, tok)?);
                }
                p.outputs = Some(outs);
            }
            _ => parse_gate(&mut p, line, &toks)?,
        }
        p.statements += 1;
    }
    let eof = (line_count + 1, 1);
    let n_in = p
        .n_in
        .ok_or_else(|| ParseError::at(eof.0, eof.1, ParseErrorKind::MissingInputs))?;
    let outputs = p
        .outputs
        .ok_or_else(|| ParseError::at(eof.0, eof.1, ParseErrorKind::MissingOutputs))?;
    Ok(Circuit::new(n_in, p.gates, outputs).expect("parser enforces wiring invariants"))
}

fn expect_token<'t, 'a>(
    toks: &'t [Tok<'a>],
    index: usize,
    line: usize,
    expected: &'static str,
) -> Result<&'t Tok<'a>, ParseError> {
    toks.get(index).ok_or_else(|| {
        let col = toks.last().map(|t| t.col + t.text.chars().count()).unwrap_or(1);
        ParseError::at(line, col, ParseErrorKind::MissingToken { expected })
    })
}

fn expect_end(toks: &[Tok<'_>], from: usize, line: usize) -> Result<(), ParseError> {
    if let Some(extra) = toks.get(from) {
        return Err(ParseError::at(
            line,
            extra.col,
            ParseErrorKind::UnexpectedToken { expected: "end of line", found: extra.text.into() },
        ));
    }
    Ok(())
}

fn parse_gate(p: &mut Parser, line: usize, toks: &[Tok<'_>]) -> Result<(), ParseError> {
    if p.n_in.is_none() {
        return Err(ParseError::at(line, toks[0].col, ParseErrorKind::InputsNotDeclared));
    }
    let eq = toks.iter().position(|t| t.text == "=").ok_or_else(|| {
        ParseError::at(
            line,
            toks[0].col,
            ParseErrorKind::UnexpectedToken {
                expected: "a statement keyword or a gate definition containing `=`",
                found: toks[0].text.into(),
            },
        )
    })?;
    if eq == 0 {
        return Err(ParseError::at(
            line,
            toks[0].col,
            ParseErrorKind::UnexpectedToken { expected: "an output name", found: "=".into() },
        ));
    }
    let names = &toks[..eq];
    let kind_tok = expect_token(toks, eq + 1, line, "a gate kind")?;
    let rest = &toks[eq + 2..];
    let gate = match kind_tok.text {
        "AND" | "OR" => {
            let ops = fixed_operands(p, line, kind_tok, rest, 2)?;
            require_one_name(line, kind_tok, names)?;
            if kind_tok.text == "AND" {
                Gate::And(ops[0], ops[1])
            } else {
                Gate::Or(ops[0], ops[1])
            }
        }
        "NOT" => {
            let ops = fixed_operands(p, line, kind_tok, rest, 1)?;
            require_one_name(line, kind_tok, names)?;
            Gate::Not(ops[0])
        }
        "CONST0" | "CONST1" => {
            let _ = fixed_operands(p, line, kind_tok, rest, 0)?;
            require_one_name(line, kind_tok, names)?;
            if kind_tok.text == "CONST0" {
                Gate::Const0
            } else {
                Gate::Const1
            }
        }
        "TABLE" => parse_table(p, line, kind_tok, names, rest)?,
        other => {
            return Err(ParseError::at(
                line,
                kind_tok.col,
                ParseErrorKind::UnknownKind { kind: other.into() },
            ));
        }
    };
    for name in names {
        p.define(line, name)?;
    }
    p.gates.push(gate);
    Ok(())
}

fn require_one_name(line: usize, kind: &Tok<'_>, names: &[Tok<'_>]) -> Result<(), ParseError> {
    if names.len() != 1 {
        return Err(ParseError::at(
            line,
            names[0].col,
            ParseErrorKind::WrongNameCount {
                kind: kind_label(kind.text),
                provided: 1,
                required: names.len(),
            },
        ));
    }
    Ok(())
}

fn kind_label(kind: &str) -> &'static str {
    match kind {
        "AND" => "AND",
        "OR" => "OR",
        "NOT" => "NOT",
        "CONST0" => "CONST0",
        "CONST1" => "CONST1",
        _ => "TABLE",
    }
}

fn fixed_operands(
    p: &Parser,
    line: usize,
    kind: &Tok<'_>,
    rest: &[Tok<'_>],
    expected: usize,
) -> Result<Vec<WireId>, ParseError> {
    if rest.len() != expected {
        return Err(ParseError::at(
            line,
            kind.col,
            ParseErrorKind::WrongArity {
                kind: kind_label(kind.text),
                expected,
                found: rest.len(),
            },
        ));
    }
    rest.iter().map(|t| p.resolve(line, t)).collect()
}

fn parse_table(
    p: &Parser,
    line: usize,
    kind: &Tok<'_>,
    names: &[Tok<'_>],
    rest: &[Tok<'_>],
) -> Result<Gate, ParseError> {
    let sep = rest.iter().position(|t| t.text == ":").ok_or_else(|| {
        ParseError::at(line, kind.col, ParseErrorKind::MissingToken { expected: "`:` after the table operands" })
    })?;
    let operands: Vec<WireId> = rest[..sep]
        .iter()
        .map(|t| p.resolve(line, t))
        .collect::<Result<_, _>>()?;
    let arity = operands.len();
    if arity > crate::circuit::MAX_TABLE_ARITY {
        return Err(ParseError::at(
            line,
            kind.col,
            ParseErrorKind::Structure(CircuitError::TableArity { arity }),
        ));
    }
    let row_toks = &rest[sep + 1..];
    let expected_rows = 1usize << arity;
    if row_toks.len() != expected_rows {
        return Err(ParseError::at(
            line,
            kind.col,
            ParseErrorKind::TableRowCount { arity, expected: expected_rows, found: row_toks.len() },
        ));
    }
    let mut rows = Vec::with_capacity(expected_rows);
    for tok in row_toks {
        let row: Bits = tok.text.parse().map_err(|_| {
            ParseError::at(line, tok.col, ParseErrorKind::BadRow { found: tok.text.into() })
        })?;
        if row.len() != names.len() {
            return Err(ParseError::at(
                line,
                tok.col,
                ParseErrorKind::TableRowWidth { expected: names.len(), found: row.len() },
            ));
        }
        rows.push(row);
    }
    let table = TruthTable::new(arity, rows)
        .map_err(|e| ParseError::at(line, kind.col, ParseErrorKind::Structure(e)))?;
    Ok(Gate::Table { inputs: operands, table })
}

/// Canonical wire name used by the serializer.
fn wire_name(c: &Circuit, w: WireId) -> String {
    if w.index() < c.num_inputs() {
        format!("in{}", w.index())
    } else {
        format!("g{}", w.index() - c.num_inputs())
    }
}

/// Serializes a circuit to the canonical document form.
pub fn serialize(c: &Circuit) -> String {
    use fmt::Write;
    let mut out = String::new();
    writeln!(out, "version {FORMAT_VERSION}").unwrap();
    writeln!(out, "inputs {}", c.num_inputs()).unwrap();
    for (g, gate) in c.gates().iter().enumerate() {
        let first = c.gate_wire(g);
        let lhs: Vec<String> = (0..gate.out_width() as u32)
            .map(|k| wire_name(c, WireId(first.0 + k)))
            .collect();
        out.push_str(&lhs.join(" "));
        out.push_str(" = ");
        match gate {
            Gate::And(a, b) => {
                writeln!(out, "AND {} {}", wire_name(c, *a), wire_name(c, *b)).unwrap()
            }
            Gate::Or(a, b) => {
                writeln!(out, "OR {} {}", wire_name(c, *a), wire_name(c, *b)).unwrap()
            }
            Gate::Not(a) => writeln!(out, "NOT {}", wire_name(c, *a)).unwrap(),
            Gate::Const0 => writeln!(out, "CONST0").unwrap(),
            Gate::Const1 => writeln!(out, "CONST1").unwrap(),
            Gate::Table { inputs, table } => {
                let ops: Vec<String> = inputs.iter().map(|w| wire_name(c, *w)).collect();
                out.push_str("TABLE ");
                out.push_str(&ops.join(" "));
                out.push_str(" :");
                for row in table.rows() {
                    write!(out, " {row}").unwrap();
                }
                out.push('\n');
            }
        }
    }
    let outs: Vec<String> = c.outputs().iter().map(|w| wire_name(c, *w)).collect();
    if outs.is_empty() {
        out.push_str("outputs\n");
    } else {
        writeln!(out, "outputs {}", outs.join(" ")).unwrap();
    }
    out
}
