//! Plain-text circuit format.
//!
//! Line 1 is `n=<qubits>`; each following line is one layer, written as
//! gates `NAME(q0)` or `NAME(q0,q1)` separated by `;`. Idle qubits are
//! implicit identities, so an empty line is an identity layer. Spaces and
//! tabs are allowed around every token. Parse errors carry 1-based line
//! and column numbers.

use std::fmt;
use std::str::FromStr;

use crate::circuits::{Circuit, GateLayer};
use crate::error::{Error, Result};
use crate::pauli::CliffordGate;

impl Circuit {
    pub fn to_text(&self) -> String {
        let mut out = format!("n={}\n", self.qubit_count());
        for layer in self.layers() {
            let line: Vec<String> = layer
                .gates()
                .iter()
                .map(|(gate, qubits)| {
                    let qs: Vec<String> = qubits.iter().map(usize::to_string).collect();
                    format!("{}({})", gate.name(), qs.join(","))
                })
                .collect();
            out.push_str(&line.join(";"));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, 1, "empty input, expected n=<qubits> header"))?;
        let n = parse_header(header)?;
        let mut circuit = Circuit::new(n);
        for (idx, line) in lines {
            let layer = parse_layer_line(n, idx + 1, line)?;
            circuit
                .push_layer(layer)
                .expect("layer built with matching width");
        }
        Ok(circuit)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Circuit::from_text(s)
    }
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_header(header: &str) -> Result<usize> {
    let trimmed = header.trim();
    let value = trimmed
        .strip_prefix("n=")
        .ok_or_else(|| parse_err(1, 1, format!("expected n=<qubits> header, got {trimmed:?}")))?;
    value
        .trim()
        .parse::<usize>()
        .map_err(|_| parse_err(1, 3, format!("invalid qubit count {value:?}")))
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    text: &'a str,
}

impl Cursor<'_> {
    fn skip_space(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_space();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(parse_err(
                self.line,
                self.column(),
                format!("expected {c:?} in layer line {:?}", self.text),
            ))
        }
    }
}

fn parse_layer_line(n: usize, line_no: usize, line: &str) -> Result<GateLayer> {
    let mut cur = Cursor {
        chars: line.chars().collect(),
        pos: 0,
        line: line_no,
        text: line,
    };
    let mut gates: Vec<(CliffordGate, Vec<usize>)> = vec![];
    loop {
        cur.skip_space();
        if cur.peek().is_none() {
            break;
        }
        let name_col = cur.column();
        let start = cur.pos;
        while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric()) {
            cur.pos += 1;
        }
        let name: String = cur.chars[start..cur.pos].iter().collect();
        if name.is_empty() {
            return Err(parse_err(line_no, name_col, "expected gate name"));
        }
        let gate = CliffordGate::from_name(&name)
            .ok_or_else(|| parse_err(line_no, name_col, format!("unknown gate {name:?}")))?;
        cur.expect('(')?;
        let mut qubits = vec![parse_qubit(&mut cur, n)?];
        cur.skip_space();
        while cur.peek() == Some(',') {
            cur.pos += 1;
            qubits.push(parse_qubit(&mut cur, n)?);
            cur.skip_space();
        }
        cur.expect(')')?;
        gates.push((gate, qubits));
        cur.skip_space();
        match cur.peek() {
            Some(';') => cur.pos += 1,
            Some(c) => {
                return Err(parse_err(
                    line_no,
                    cur.column(),
                    format!("expected ';' between gates, got {c:?}"),
                ))
            }
            None => break,
        }
    }
    GateLayer::new(n, gates).map_err(|e| match e {
        Error::Parse { .. } => e,
        other => parse_err(line_no, 1, other.to_string()),
    })
}

fn parse_qubit(cur: &mut Cursor<'_>, n: usize) -> Result<usize> {
    cur.skip_space();
    let col = cur.column();
    let start = cur.pos;
    while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
        cur.pos += 1;
    }
    if cur.pos == start {
        return Err(parse_err(cur.line, col, "expected qubit index"));
    }
    let digits: String = cur.chars[start..cur.pos].iter().collect();
    let q = digits
        .parse::<usize>()
        .map_err(|_| parse_err(cur.line, col, format!("invalid qubit index {digits:?}")))?;
    if q >= n {
        return Err(parse_err(
            cur.line,
            col,
            format!("qubit index {q} out of range for n={n}"),
        ));
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::SingleClifford;

    #[test]
    fn round_trip_basic() {
        let text = "n=3\nSX(0);CNOT(1,2)\n\nH(2)\n";
        let circuit = Circuit::from_text(text).unwrap();
        assert_eq!(circuit.qubit_count(), 3);
        assert_eq!(circuit.depth(), 3);
        assert!(circuit.layers()[1].is_empty());
        assert_eq!(circuit.to_text(), text);
    }

    #[test]
    fn empty_circuit() {
        let circuit = Circuit::from_text("n=2\n").unwrap();
        assert_eq!(circuit.depth(), 0);
        assert_eq!(circuit.to_text(), "n=2\n");
    }

    #[test]
    fn whitespace_and_unnamed_gates() {
        let circuit = Circuit::from_text("n=3\n C21( 2 ) ; CNOT( 1 , 0 )\n").unwrap();
        let gates = circuit.layers()[0].gates();
        assert_eq!(gates.len(), 2);
        assert_eq!(circuit.to_text(), "n=3\nCNOT(1,0);C21(2)\n");
    }

    #[test]
    fn identity_gates_are_dropped() {
        let circuit = Circuit::from_text("n=2\nI(0);SX(1)\n").unwrap();
        assert_eq!(circuit.layers()[0].gates().len(), 1);
        assert_eq!(circuit.to_text(), "n=2\nSX(1)\n");
    }

    #[test]
    fn gates_sorted_by_lowest_qubit() {
        let circuit = Circuit::from_text("n=3\nH(2);CNOT(1,0)\n").unwrap();
        assert_eq!(circuit.to_text(), "n=3\nCNOT(1,0);H(2)\n");
    }

    #[test]
    fn parse_error_positions() {
        let cases = [
            ("", 1, 1),
            ("m=2\n", 1, 1),
            ("n=x\n", 1, 3),
            ("n=2\nFOO(0)\n", 2, 1),
            ("n=2\nH(0);H(9)\n", 2, 8),
            ("n=2\nH 0\n", 2, 3),
            ("n=2\nH(0),H(1)\n", 2, 5),
            ("n=2\nH(0);H(0)\n", 2, 1),
            ("n=2\nCNOT(0,0)\n", 2, 1),
        ];
        for (text, line, column) in cases {
            match Circuit::from_text(text) {
                Err(Error::Parse { line: l, column: c, message }) => {
                    assert_eq!((l, c), (line, column), "position for {text:?}: {message}");
                }
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn every_gate_name_round_trips() {
        for gate in SingleClifford::all() {
            let text = format!("n=1\n{}(0)\n", CliffordGate::Single(gate).name());
            let circuit = Circuit::from_text(&text).unwrap();
            if gate == SingleClifford::I {
                assert_eq!(circuit.to_text(), "n=1\n\n");
            } else {
                assert_eq!(circuit.to_text(), text);
            }
        }
    }
}
