use std::fmt;

use super::{ParseError, ParseErrorKind};
use crate::network::{GateSpec, PauliCoeffs, MAX_QUBITS};
use crate::operator::{unitarity_deviation, Axis, Tolerance, C64};

/// One executable line of a circuit file.
#[derive(Clone, Debug, PartialEq)]
pub enum Directive {
    Pauli { qubit: usize, axis: Axis },
    Hadamard { qubit: usize },
    /// `c0·1 + cx·q_x + cy·q_y + cz·q_z` as (re, im) pairs.
    Gate { qubit: usize, coeffs: [f64; 8] },
    Cnot { control: usize, target: usize },
    /// Foliates `qubit` on `on`'s z descriptor at time `t0`.
    Foliate { qubit: usize, on: usize, t0: usize },
    Expect { qubit: usize },
    AssertSharp { qubit: usize, axis: Axis, value: f64 },
    Report,
}

impl Directive {
    /// The gate this directive applies, if any.
    pub fn gate(&self) -> Option<GateSpec> {
        match *self {
            Directive::Pauli { qubit, axis } => Some(GateSpec::pauli(qubit, axis)),
            Directive::Hadamard { qubit } => Some(GateSpec::hadamard(qubit)),
            Directive::Gate { qubit, coeffs } => Some(GateSpec::single(qubit, coeffs_of(&coeffs))),
            Directive::Cnot { control, target } => Some(GateSpec::cnot(control, target)),
            _ => None,
        }
    }
}

fn coeffs_of(c: &[f64; 8]) -> PauliCoeffs {
    PauliCoeffs::new(C64::new(c[0], c[1]), C64::new(c[2], c[3]), C64::new(c[4], c[5]), C64::new(c[6], c[7]))
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Directive::Pauli { qubit, axis } => write!(f, "{axis} {qubit}"),
            Directive::Hadamard { qubit } => write!(f, "h {qubit}"),
            Directive::Gate { qubit, coeffs } => {
                write!(f, "gate {qubit}")?;
                for c in coeffs {
                    write!(f, " {c}")?;
                }
                Ok(())
            }
            Directive::Cnot { control, target } => write!(f, "cnot {control} {target}"),
            Directive::Foliate { qubit, on, .. } => write!(f, "foliate {qubit} on {on}"),
            Directive::Expect { qubit } => write!(f, "expect {qubit}"),
            Directive::AssertSharp { qubit, axis, value } => write!(f, "assert-sharp {qubit} {axis} {value}"),
            Directive::Report => f.write_str("report"),
        }
    }
}

/// A directive and the source line it came from.
///
/// Equality ignores the line so that a program equals its own pretty-printed re-parse.
#[derive(Clone, Debug)]
pub struct Step {
    pub line: usize,
    pub directive: Directive,
}

impl PartialEq for Step {
    fn eq(&self, other: &Self) -> bool {
        self.directive == other.directive
    }
}

/// A parsed circuit: register size, initial product state and directives.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitProgram {
    pub n: usize,
    /// One of `0`, `1`, `+`, `-` per qubit.
    pub init: String,
    pub steps: Vec<Step>,
}

impl CircuitProgram {
    pub fn gate_count(&self) -> usize {
        self.steps.iter().filter(|s| s.directive.gate().is_some()).count()
    }
}

impl fmt::Display for CircuitProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.n)?;
        writeln!(f, "init {}", self.init)?;
        for step in &self.steps {
            writeln!(f, "{}", step.directive)?;
        }
        Ok(())
    }
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut column = 0;
    for (byte, ch) in line.char_indices() {
        column += 1;
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                out.push(Token { text: &line[b..byte], column: c });
            }
        } else if start.is_none() {
            start = Some((byte, column));
        }
    }
    if let Some((b, c)) = start {
        out.push(Token { text: &line[b..], column: c });
    }
    out
}

struct LineParser<'a> {
    line: usize,
    tokens: Vec<Token<'a>>,
    end_column: usize,
}

impl<'a> LineParser<'a> {
    fn err(&self, column: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { line: self.line, column, kind }
    }

    fn syntax(&self, column: usize, msg: impl Into<String>) -> ParseError {
        self.err(column, ParseErrorKind::Syntax(msg.into()))
    }

    fn arity(&self, want: usize) -> Result<(), ParseError> {
        let have = self.tokens.len() - 1;
        if have < want {
            Err(self.syntax(self.end_column, format!("'{}' takes {want} arguments, got {have}", self.tokens[0].text)))
        } else if have > want {
            Err(self.syntax(self.tokens[want + 1].column, format!("unexpected '{}'", self.tokens[want + 1].text)))
        } else {
            Ok(())
        }
    }

    fn qubit(&self, i: usize, n: usize) -> Result<usize, ParseError> {
        let tok = &self.tokens[i];
        let q: usize = tok
            .text
            .parse()
            .map_err(|_| self.syntax(tok.column, format!("expected a qubit index, got '{}'", tok.text)))?;
        if q == 0 || q > n {
            return Err(self.err(tok.column, ParseErrorKind::InvalidSubsystem(format!("qubit {q} outside 1..={n}"))));
        }
        Ok(q)
    }

    fn real(&self, i: usize) -> Result<f64, ParseError> {
        let tok = &self.tokens[i];
        match tok.text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.syntax(tok.column, format!("expected a finite real, got '{}'", tok.text))),
        }
    }

    fn axis(&self, i: usize) -> Result<Axis, ParseError> {
        let tok = &self.tokens[i];
        Axis::from_symbol(tok.text).ok_or_else(|| self.syntax(tok.column, format!("expected x, y or z, got '{}'", tok.text)))
    }
}

/// Parses a circuit with the default unitarity tolerance.
pub fn parse_circuit(text: &str) -> Result<CircuitProgram, ParseError> {
    parse_circuit_with(text, Tolerance::default())
}

/// Parses a circuit, checking `gate` coefficients for unitarity at `tol`.
pub fn parse_circuit_with(text: &str, tol: Tolerance) -> Result<CircuitProgram, ParseError> {
    let mut n: Option<usize> = None;
    let mut init: Option<String> = None;
    let mut steps = Vec::new();
    let mut gates = 0;

    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let content = raw.strip_suffix('\r').unwrap_or(raw);
        let content = content.split('#').next().unwrap_or("");
        let tokens = tokenize(content);
        if tokens.is_empty() {
            continue;
        }
        let lp = LineParser { line: line_no, end_column: content.chars().count() + 1, tokens };
        let head = &lp.tokens[0];

        if head.text == "qubits" {
            if n.is_some() {
                return Err(lp.syntax(head.column, "'qubits' given twice"));
            }
            lp.arity(1)?;
            let tok = &lp.tokens[1];
            let count: usize = tok
                .text
                .parse()
                .map_err(|_| lp.syntax(tok.column, format!("expected a qubit count, got '{}'", tok.text)))?;
            if count == 0 || count > MAX_QUBITS {
                return Err(lp.syntax(tok.column, format!("qubit count must be in 1..={MAX_QUBITS}")));
            }
            n = Some(count);
            continue;
        }
        let Some(nq) = n else {
            return Err(lp.syntax(head.column, format!("'{}' before 'qubits'", head.text)));
        };

        let directive = match head.text {
            "init" => {
                if init.is_some() || !steps.is_empty() {
                    return Err(lp.syntax(head.column, "'init' must appear once, before any other directive"));
                }
                lp.arity(1)?;
                let tok = &lp.tokens[1];
                if let Some((k, bad)) = tok.text.chars().enumerate().find(|(_, c)| !"01+-".contains(*c)) {
                    return Err(lp.syntax(tok.column + k, format!("'{bad}' is not one of 0, 1, +, -")));
                }
                if tok.text.chars().count() != nq {
                    return Err(lp.syntax(tok.column, format!("init has {} symbols for {nq} qubits", tok.text.chars().count())));
                }
                init = Some(tok.text.to_string());
                continue;
            }
            "h" => {
                lp.arity(1)?;
                Directive::Hadamard { qubit: lp.qubit(1, nq)? }
            }
            "x" | "y" | "z" => {
                lp.arity(1)?;
                Directive::Pauli { qubit: lp.qubit(1, nq)?, axis: lp.axis(0)? }
            }
            "gate" => {
                lp.arity(9)?;
                let qubit = lp.qubit(1, nq)?;
                let mut coeffs = [0.0; 8];
                for (k, c) in coeffs.iter_mut().enumerate() {
                    *c = lp.real(k + 2)?;
                }
                let dev = unitarity_deviation(&coeffs_of(&coeffs).matrix2());
                if !tol.accepts(dev) {
                    return Err(lp.err(head.column, ParseErrorKind::NotUnitary(format!("U†U deviates from 1 by {dev:.3e}"))));
                }
                Directive::Gate { qubit, coeffs }
            }
            "cnot" => {
                lp.arity(2)?;
                let control = lp.qubit(1, nq)?;
                let target = lp.qubit(2, nq)?;
                if control == target {
                    return Err(lp.err(
                        lp.tokens[2].column,
                        ParseErrorKind::InvalidSubsystem(format!("cnot control and target are both qubit {control}")),
                    ));
                }
                Directive::Cnot { control, target }
            }
            "foliate" => {
                lp.arity(3)?;
                let qubit = lp.qubit(1, nq)?;
                if lp.tokens[2].text != "on" {
                    return Err(lp.syntax(lp.tokens[2].column, format!("expected 'on', got '{}'", lp.tokens[2].text)));
                }
                let on = lp.qubit(3, nq)?;
                if on == qubit {
                    return Err(lp.err(
                        lp.tokens[3].column,
                        ParseErrorKind::InvalidSubsystem(format!("qubit {qubit} cannot be foliated on itself")),
                    ));
                }
                Directive::Foliate { qubit, on, t0: gates }
            }
            "expect" => {
                lp.arity(1)?;
                Directive::Expect { qubit: lp.qubit(1, nq)? }
            }
            "assert-sharp" => {
                lp.arity(3)?;
                Directive::AssertSharp { qubit: lp.qubit(1, nq)?, axis: lp.axis(2)?, value: lp.real(3)? }
            }
            "report" => {
                lp.arity(0)?;
                Directive::Report
            }
            other => return Err(lp.syntax(head.column, format!("unknown directive '{other}'"))),
        };
        if directive.gate().is_some() {
            gates += 1;
        }
        steps.push(Step { line: line_no, directive });
    }

    let Some(n) = n else {
        return Err(ParseError { line: 1, column: 1, kind: ParseErrorKind::Syntax("missing 'qubits' directive".into()) });
    };
    Ok(CircuitProgram { n, init: init.unwrap_or_else(|| "0".repeat(n)), steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind(text: &str) -> (usize, usize, ParseErrorKind) {
        let e = parse_circuit(text).unwrap_err();
        (e.line, e.column, e.kind)
    }

    #[test]
    fn bell_program() {
        let p = parse_circuit("qubits 2\ninit 00\nh 1\ncnot 1 2\nexpect 2").unwrap();
        assert_eq!(p.n, 2);
        assert_eq!(p.init, "00");
        assert_eq!(p.steps.len(), 3);
        assert_eq!(p.steps[1].directive, Directive::Cnot { control: 1, target: 2 });
        assert_eq!(p.steps[2].line, 5);
        assert_eq!(p.gate_count(), 2);
    }

    #[test]
    fn comments_crlf_and_default_init() {
        let p = parse_circuit("# header\r\nqubits 3 # three\r\n\r\n  x 2\r\nfoliate 1 on 2\r\n").unwrap();
        assert_eq!(p.init, "000");
        assert_eq!(p.steps[0], Step { line: 4, directive: Directive::Pauli { qubit: 2, axis: Axis::X } });
        assert_eq!(p.steps[1].directive, Directive::Foliate { qubit: 1, on: 2, t0: 1 });
    }

    #[test]
    fn cnot_on_one_qubit() {
        let (line, col, k) = kind("qubits 2\ncnot 1 1");
        assert_eq!((line, col), (2, 8));
        assert!(matches!(k, ParseErrorKind::InvalidSubsystem(_)));
    }

    #[test]
    fn non_unitary_gate() {
        let (line, _, k) = kind("qubits 1\ngate 1 1 0 1 0 0 0 0 0");
        assert_eq!(line, 2);
        assert!(matches!(k, ParseErrorKind::NotUnitary(_)));
    }

    #[test]
    fn syntax_errors_carry_position() {
        assert_eq!(kind("qubits 2\nh 1\nfrobnicate 2").0, 3);
        let (line, col, _) = kind("qubits 2\nh");
        assert_eq!((line, col), (2, 2));
        let (line, col, _) = kind("qubits 2\nh 1 2");
        assert_eq!((line, col), (2, 5));
        let (_, col, _) = kind("qubits 2\ninit 0x");
        assert_eq!(col, 7);
        assert_eq!(kind("h 1").0, 1);
        assert_eq!(kind("").0, 1);
        assert!(matches!(kind("qubits 2\nh 3").2, ParseErrorKind::InvalidSubsystem(_)));
        assert!(matches!(kind("qubits 2\nassert-sharp 1 w 1").2, ParseErrorKind::Syntax(_)));
        assert!(matches!(kind("qubits 2\nfoliate 1 at 2").2, ParseErrorKind::Syntax(_)));
        assert!(matches!(kind("qubits 11").2, ParseErrorKind::Syntax(_)));
        assert!(matches!(kind("qubits 2\nh 1\ninit 00").2, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn pretty_print_round_trip() {
        let text = "qubits 3\ninit +0-\n# c\nh 1\ngate 2 0 0 0 0 0 0 0 -1\ncnot 2 3\nfoliate 3 on 2\ny 1\nexpect 3\nassert-sharp 3 z -1\nreport\n";
        let p = parse_circuit(text).unwrap();
        let printed = p.to_string();
        let q = parse_circuit(&printed).unwrap();
        assert_eq!(p, q);
        assert_eq!(printed, q.to_string());
    }
}
