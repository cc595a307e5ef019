//! The `.bn` network text format.
//!
//! ```text
//! net chain              # optional header
//! var A : f t
//! var B : f t
//! cpt A :
//!   0.3 0.7
//! cpt B | A :
//!   f : 0.9 0.1
//!   t : 0.2 0.8
//! ```
//!
//! `#` starts a comment. Rows of a CPT are indented and must list parent
//! configurations in row-major order of the declared parents (last parent
//! fastest). Variables must be declared before a CPT refers to them.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Evidence, Network, NetworkBuilder, ROW_SUM_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    /// 1-based.
    pub line: usize,
    /// 1-based, in characters.
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}:{}: {message}", .span.line, .span.column)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    fn flush<'a>(line: &'a str, tokens: &mut Vec<Token<'a>>, start: &mut Option<(usize, usize)>, end: usize) {
        if let Some((byte, column)) = start.take() {
            tokens.push(Token {
                text: &line[byte..end],
                column,
            });
        }
    }
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (column, (byte, c)) in line.char_indices().enumerate() {
        let column = column + 1;
        if c.is_whitespace() {
            flush(line, &mut tokens, &mut start, byte);
        } else if c == ':' || c == '|' {
            flush(line, &mut tokens, &mut start, byte);
            tokens.push(Token {
                text: &line[byte..byte + 1],
                column,
            });
        } else if start.is_none() {
            start = Some((byte, column));
        }
    }
    flush(line, &mut tokens, &mut start, line.len());
    tokens
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Pending {
    child: String,
    parents: Vec<String>,
    /// Parent cardinalities.
    cards: Vec<usize>,
    card: usize,
    rows: Vec<Vec<f64>>,
    expected_rows: usize,
    header_line: usize,
    header_column: usize,
}

impl Pending {
    fn configuration(&self, mut row: usize) -> Vec<usize> {
        let mut config = vec![0; self.cards.len()];
        for (slot, &k) in config.iter_mut().zip(&self.cards).rev() {
            *slot = row % k;
            row /= k;
        }
        config
    }
}

struct Parser<'a> {
    builder: NetworkBuilder,
    states: HashMap<&'a str, Vec<&'a str>>,
    declared_cpt: HashMap<&'a str, usize>,
    pending: Option<Pending>,
    seen_directive: bool,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        span: SourceSpan { line, column },
        message: message.into(),
    }
}

impl<'a> Parser<'a> {
    fn finish_pending(&mut self) -> Result<(), ParseError> {
        if let Some(p) = self.pending.take() {
            if p.rows.len() < p.expected_rows {
                return Err(self.missing_row(&p));
            }
            let parents: Vec<&str> = p.parents.iter().map(String::as_str).collect();
            self.builder.add_cpt(&p.child, &parents, p.rows);
        }
        Ok(())
    }

    fn missing_row(&self, p: &Pending) -> ParseError {
        let config = p.configuration(p.rows.len());
        let labels: Vec<String> = p
            .parents
            .iter()
            .zip(config)
            .map(|(name, s)| format!("{name}={}", self.states[name.as_str()][s]))
            .collect();
        err(
            p.header_line,
            p.header_column,
            format!(
                "missing configuration {} for cpt {} (row {} of {})",
                labels.join(" "),
                p.child,
                p.rows.len() + 1,
                p.expected_rows
            ),
        )
    }

    fn identifier(&self, line: usize, tok: Option<&Token<'a>>, what: &str) -> Result<&'a str, ParseError> {
        match tok {
            Some(t) if is_identifier(t.text) => Ok(t.text),
            Some(t) => Err(err(line, t.column, format!("expected {what}, found `{}`", t.text))),
            None => Err(err(line, 1, format!("expected {what}"))),
        }
    }

    fn expect_colon(&self, line: usize, tok: Option<&Token<'a>>, eol_column: usize) -> Result<(), ParseError> {
        match tok {
            Some(t) if t.text == ":" => Ok(()),
            Some(t) => Err(err(line, t.column, format!("expected `:`, found `{}`", t.text))),
            None => Err(err(line, eol_column, "expected `:`")),
        }
    }

    fn directive(&mut self, line: usize, tokens: &[Token<'a>], raw: &str) -> Result<(), ParseError> {
        self.finish_pending()?;
        let head = tokens[0];
        let eol = raw.chars().count().max(1);
        match head.text {
            "net" => {
                if self.seen_directive {
                    return Err(err(line, head.column, "`net` header must come first"));
                }
                let name = self.identifier(line, tokens.get(1), "network name")?;
                if let Some(t) = tokens.get(2) {
                    return Err(err(line, t.column, format!("unexpected `{}`", t.text)));
                }
                self.builder.set_name(name);
            }
            "var" => {
                let name = self.identifier(line, tokens.get(1), "variable name")?;
                if self.states.contains_key(name) {
                    return Err(err(line, tokens[1].column, format!("duplicate variable `{name}`")));
                }
                self.expect_colon(line, tokens.get(2), eol)?;
                let mut states: Vec<&str> = Vec::new();
                for t in &tokens[3..] {
                    if !is_identifier(t.text) {
                        return Err(err(line, t.column, format!("expected state label, found `{}`", t.text)));
                    }
                    if states.contains(&t.text) {
                        return Err(err(line, t.column, format!("duplicate state `{}`", t.text)));
                    }
                    states.push(t.text);
                }
                if states.len() < 2 {
                    return Err(err(line, head.column, format!("variable `{name}` needs at least 2 states")));
                }
                self.builder.add_variable(name, &states);
                self.states.insert(name, states);
            }
            "cpt" => {
                let child = self.identifier(line, tokens.get(1), "variable name")?;
                let Some(child_states) = self.states.get(child) else {
                    return Err(err(line, tokens[1].column, format!("unknown variable `{child}`")));
                };
                let card = child_states.len();
                if let Some(prev) = self.declared_cpt.insert(child, line) {
                    return Err(err(
                        line,
                        tokens[1].column,
                        format!("duplicate cpt for `{child}` (first at line {prev})"),
                    ));
                }
                let mut rest = &tokens[2..];
                let mut parents: Vec<String> = Vec::new();
                let mut cards = Vec::new();
                if rest.first().map(|t| t.text) == Some("|") {
                    rest = &rest[1..];
                    while let Some(t) = rest.first().filter(|t| t.text != ":") {
                        if !is_identifier(t.text) {
                            return Err(err(line, t.column, format!("expected parent name, found `{}`", t.text)));
                        }
                        let Some(ps) = self.states.get(t.text) else {
                            return Err(err(line, t.column, format!("unknown variable `{}`", t.text)));
                        };
                        if parents.iter().any(|p| p == t.text) {
                            return Err(err(line, t.column, format!("parent `{}` listed twice", t.text)));
                        }
                        parents.push(t.text.to_string());
                        cards.push(ps.len());
                        rest = &rest[1..];
                    }
                    if parents.is_empty() {
                        return Err(err(line, eol, "expected at least one parent after `|`"));
                    }
                }
                self.expect_colon(line, rest.first(), eol)?;
                if let Some(t) = rest.get(1) {
                    return Err(err(line, t.column, format!("unexpected `{}`", t.text)));
                }
                self.pending = Some(Pending {
                    child: child.to_string(),
                    parents,
                    expected_rows: cards.iter().product(),
                    cards,
                    card,
                    rows: Vec::new(),
                    header_line: line,
                    header_column: head.column,
                });
            }
            other => {
                return Err(err(line, head.column, format!("unknown directive `{other}`")));
            }
        }
        self.seen_directive = true;
        Ok(())
    }

    fn row(&mut self, line: usize, tokens: &[Token<'a>]) -> Result<(), ParseError> {
        let Some(p) = self.pending.as_ref() else {
            return Err(err(line, tokens[0].column, "indented row outside a cpt block"));
        };
        if p.rows.len() == p.expected_rows {
            return Err(err(
                line,
                tokens[0].column,
                format!("extra row: cpt {} already has all {} rows", p.child, p.expected_rows),
            ));
        }
        let numbers = if p.parents.is_empty() {
            tokens
        } else {
            let n = p.parents.len();
            if tokens.len() <= n || tokens[n].text != ":" {
                let col = tokens.get(n).map_or(tokens[tokens.len() - 1].column, |t| t.column);
                return Err(err(line, col, format!("expected {n} parent state(s) followed by `:`")));
            }
            let expected = p.configuration(p.rows.len());
            let mut given = Vec::with_capacity(n);
            for ((t, parent), want) in tokens[..n].iter().zip(&p.parents).zip(&expected) {
                let states = &self.states[parent.as_str()];
                let Some(s) = states.iter().position(|s| *s == t.text) else {
                    return Err(err(line, t.column, format!("variable `{parent}` has no state `{}`", t.text)));
                };
                given.push((s, *want, t.column));
            }
            if let Some(&(_, _, column)) = given.iter().find(|(s, want, _)| s != want) {
                let config: Vec<usize> = given.iter().map(|g| g.0).collect();
                let given_row = config.iter().zip(&p.cards).fold(0, |acc, (&s, &k)| acc * k + s);
                let message = if given_row > p.rows.len() {
                    self.missing_row(p).message
                } else {
                    format!(
                        "out-of-order configuration row for cpt {} (expected row {} of {})",
                        p.child,
                        p.rows.len() + 1,
                        p.expected_rows
                    )
                };
                return Err(err(line, column, message));
            }
            &tokens[n + 1..]
        };
        if numbers.len() != p.card {
            let col = numbers.first().map_or(tokens[0].column, |t| t.column);
            return Err(err(
                line,
                col,
                format!("expected {} probabilities, found {}", p.card, numbers.len()),
            ));
        }
        let mut row = Vec::with_capacity(p.card);
        for t in numbers {
            let value: f64 = t
                .text
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| err(line, t.column, format!("malformed number `{}`", t.text)))?;
            if value < 0.0 {
                return Err(err(line, t.column, format!("negative probability `{}`", t.text)));
            }
            row.push(value);
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(err(
                line,
                numbers[0].column,
                format!("row sum {sum} deviates from 1 in cpt {} row {}", p.child, p.rows.len() + 1),
            ));
        }
        self.pending.as_mut().unwrap().rows.push(row);
        Ok(())
    }
}

/// Parses the text into an unvalidated draft. Structural problems the format
/// can pin to a line (unknown names, duplicates, missing rows, bad numbers)
/// are reported here; graph-level ones (cycles, variables without a CPT) are
/// left to [`crate::model::validate`].
pub fn parse_draft(text: &str) -> Result<NetworkBuilder, ParseError> {
    let mut parser = Parser {
        builder: NetworkBuilder::new(),
        states: HashMap::new(),
        declared_cpt: HashMap::new(),
        pending: None,
        seen_directive: false,
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(content);
        if tokens.is_empty() {
            continue;
        }
        if content.starts_with(char::is_whitespace) {
            parser.row(line, &tokens)?;
        } else {
            parser.directive(line, &tokens, content)?;
        }
    }
    parser.finish_pending()?;
    Ok(parser.builder)
}

/// Parses and validates a network.
pub fn parse(text: &str) -> Result<Network> {
    parse_draft(text)?.build()
}

/// Formats a value with at most 12 significant digits, in the shortest form
/// that reads back to the rounded value.
pub fn format_significant(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().expect("scientific notation parses");
    format!("{rounded}")
}

/// Canonical text form: declaration order, single spaces, two-space row
/// indent, LF line endings.
pub fn serialize(net: &Network) -> String {
    use fmt::Write;
    let mut out = String::new();
    if let Some(name) = net.name() {
        writeln!(out, "net {name}").unwrap();
    }
    for v in net.variables() {
        writeln!(out, "var {} : {}", v.name(), v.states().join(" ")).unwrap();
    }
    for cpt in net.cpts() {
        let child = net.var_name(cpt.child());
        if cpt.parents().is_empty() {
            writeln!(out, "cpt {child} :").unwrap();
        } else {
            let parents: Vec<&str> = cpt.parents().iter().map(|&p| net.var_name(p)).collect();
            writeln!(out, "cpt {child} | {} :", parents.join(" ")).unwrap();
        }
        for (r, row) in cpt.rows().enumerate() {
            let probs: Vec<String> = row.iter().map(|&x| format_significant(x)).collect();
            if cpt.parents().is_empty() {
                writeln!(out, "  {}", probs.join(" ")).unwrap();
            } else {
                let labels: Vec<&str> = cpt
                    .configuration(r)
                    .into_iter()
                    .zip(cpt.parents())
                    .map(|(s, &p)| net.variable(p).states()[s].as_str())
                    .collect();
                writeln!(out, "  {} : {}", labels.join(" "), probs.join(" ")).unwrap();
            }
        }
    }
    out
}

/// Resolves `Var=state` tokens against `net`.
pub fn parse_evidence<S: AsRef<str>>(tokens: &[S], net: &Network) -> Result<Evidence> {
    let mut evidence = Evidence::new();
    for token in tokens {
        let token = token.as_ref();
        let (name, state) = token
            .split_once('=')
            .map(|(n, s)| (n.trim(), s.trim()))
            .filter(|(n, s)| !n.is_empty() && !s.is_empty())
            .ok_or_else(|| Error::MalformedEvidence(token.to_string()))?;
        let var = net.var(name)?;
        let index = net.state(var, state)?;
        if evidence.observe(var, index).is_some() {
            return Err(Error::DuplicateEvidence(name.to_string()));
        }
    }
    Ok(evidence)
}
