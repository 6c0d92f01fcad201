//! m-automata (deterministic finite automata with output) and the line-based
//! AUT text format.
//!
//! States are addressed by dense indices `0..len()` in declaration order; names
//! only matter at the file boundary. The transition table is total by
//! construction, so an [`Automaton`] value is always m-complete. Leading-zero
//! invariance and accessibility are *not* enforced on construction: use
//! [`validate`] for those, which lets deliberately broken automata be built
//! for negative tests.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// The distinguished zero output.
pub const ZERO_TOKEN: &str = "0";

/// Output label of a state: a non-empty token without whitespace.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct OutputLabel(String);

impl OutputLabel {
    pub fn new(token: impl Into<String>) -> Result<Self, ModelError> {
        let token = token.into();
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(ModelError::BadToken(token));
        }
        Ok(OutputLabel(token))
    }

    pub fn zero() -> Self {
        OutputLabel(ZERO_TOKEN.to_string())
    }

    pub fn is_zero(&self) -> bool {
        self.0 == ZERO_TOKEN
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for OutputLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State {
    pub name: String,
    pub output: OutputLabel,
}

/// Structural errors raised when assembling an automaton from parts.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("base must be at least 2, got {0}")]
    BaseTooSmall(usize),
    #[error("automaton has no states")]
    Empty,
    #[error("invalid token {0:?}")]
    BadToken(String),
    #[error("duplicate state {0:?}")]
    DuplicateState(String),
    #[error("start index {0} out of range")]
    StartOutOfRange(usize),
    #[error("transition table has {got} entries, expected {expected}")]
    TableSize { got: usize, expected: usize },
    #[error("transition from state {state} on digit {digit} targets missing state {target}")]
    TargetOutOfRange {
        state: usize,
        digit: usize,
        target: usize,
    },
}

/// A finite m-automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    base: usize,
    states: Vec<State>,
    start: usize,
    // delta[s * base + d] = target of the digit-d edge leaving s
    delta: Vec<usize>,
}

impl Automaton {
    /// Assembles an automaton from a state list and a row-major transition
    /// table (`delta[s * m + d]`).
    pub fn new(
        base: usize,
        states: Vec<State>,
        start: usize,
        delta: Vec<usize>,
    ) -> Result<Self, ModelError> {
        if base < 2 {
            return Err(ModelError::BaseTooSmall(base));
        }
        if states.is_empty() {
            return Err(ModelError::Empty);
        }
        let mut seen = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if s.name.is_empty() || s.name.chars().any(char::is_whitespace) {
                return Err(ModelError::BadToken(s.name.clone()));
            }
            if seen.insert(s.name.as_str(), i).is_some() {
                return Err(ModelError::DuplicateState(s.name.clone()));
            }
        }
        if start >= states.len() {
            return Err(ModelError::StartOutOfRange(start));
        }
        let expected = states.len() * base;
        if delta.len() != expected {
            return Err(ModelError::TableSize {
                got: delta.len(),
                expected,
            });
        }
        for (i, &t) in delta.iter().enumerate() {
            if t >= states.len() {
                return Err(ModelError::TargetOutOfRange {
                    state: i / base,
                    digit: i % base,
                    target: t,
                });
            }
        }
        Ok(Automaton {
            base,
            states,
            start,
            delta,
        })
    }

    /// Convenience constructor: `(name, output, targets-by-digit)` rows,
    /// targets given by name. Panics on malformed input; intended for tests
    /// and fixtures.
    pub fn from_rows(base: usize, start: &str, rows: &[(&str, &str, &[&str])]) -> Self {
        let index: HashMap<&str, usize> =
            rows.iter().enumerate().map(|(i, r)| (r.0, i)).collect();
        let states = rows
            .iter()
            .map(|(n, o, _)| State {
                name: n.to_string(),
                output: OutputLabel::new(*o).expect("valid token"),
            })
            .collect();
        let mut delta = Vec::with_capacity(rows.len() * base);
        for (_, _, targets) in rows {
            assert_eq!(targets.len(), base, "row must list one target per digit");
            for t in targets.iter() {
                delta.push(*index.get(t).expect("known target"));
            }
        }
        Automaton::new(base, states, index[start], delta).expect("well-formed rows")
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn name(&self, s: usize) -> &str {
        &self.states[s].name
    }

    pub fn output(&self, s: usize) -> &OutputLabel {
        &self.states[s].output
    }

    pub fn is_nonzero(&self, s: usize) -> bool {
        !self.states[s].output.is_zero()
    }

    #[inline]
    pub fn next(&self, s: usize, digit: usize) -> usize {
        self.delta[s * self.base + digit]
    }

    /// Outgoing edges of `s` as `(digit, target)`, in digit order.
    pub fn edges(&self, s: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.delta[s * self.base..(s + 1) * self.base]
            .iter()
            .copied()
            .enumerate()
    }

    /// All edges `(source, digit, target)` ordered by source then digit.
    pub fn all_edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.len()).flat_map(move |s| self.edges(s).map(move |(d, t)| (s, d, t)))
    }

    pub fn find_state(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn transition_table(&self) -> &[usize] {
        &self.delta
    }

    /// Returns a copy with one edge redirected.
    pub fn with_edge(&self, s: usize, digit: usize, target: usize) -> Self {
        let mut a = self.clone();
        a.delta[s * a.base + digit] = target;
        a
    }

    /// Returns a copy with one state relabeled.
    pub fn with_output(&self, s: usize, output: OutputLabel) -> Self {
        let mut a = self.clone();
        a.states[s].output = output;
        a
    }

    /// States reachable from `from` (including `from`), as a membership mask.
    pub fn reachable_from(&self, from: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(s) = queue.pop_front() {
            for (_, t) in self.edges(s) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// Drops states not reachable from the start, keeping declaration order.
    pub fn accessible_part(&self) -> Self {
        let keep = self.reachable_from(self.start);
        let mut new_index = vec![usize::MAX; self.len()];
        let mut states = Vec::new();
        for (i, s) in self.states.iter().enumerate() {
            if keep[i] {
                new_index[i] = states.len();
                states.push(s.clone());
            }
        }
        let mut delta = Vec::with_capacity(states.len() * self.base);
        for s in (0..self.len()).filter(|&s| keep[s]) {
            for (_, t) in self.edges(s) {
                delta.push(new_index[t]);
            }
        }
        Automaton {
            base: self.base,
            states,
            start: new_index[self.start],
            delta,
        }
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Rule {
    #[serde(rename = "m-completeness")]
    Completeness,
    #[serde(rename = "start-state")]
    StartState,
    #[serde(rename = "output-label")]
    OutputLabel,
    #[serde(rename = "leading-zero-invariance")]
    LeadingZeroInvariance,
    #[serde(rename = "accessibility")]
    Accessibility,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::Completeness => "m-completeness",
            Rule::StartState => "start-state",
            Rule::OutputLabel => "output-label",
            Rule::LeadingZeroInvariance => "leading-zero-invariance",
            Rule::Accessibility => "accessibility",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: Rule,
    /// Witnessing state or edge, e.g. `B` or `B -0-> C`.
    pub at: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

/// Checks the defining properties of an m-automaton.
///
/// The first three (labels, a start state, m distinctly labeled out-edges)
/// hold for every value of [`Automaton`] by construction and are rechecked
/// cheaply; leading-zero invariance and accessibility are the substantive ones.
pub fn validate(a: &Automaton) -> ValidationReport {
    let mut violations = Vec::new();
    if a.delta.len() != a.len() * a.base || a.delta.iter().any(|&t| t >= a.len()) {
        violations.push(Violation {
            rule: Rule::Completeness,
            at: String::new(),
            message: "transition table is not total".into(),
        });
    }
    if a.start >= a.len() {
        violations.push(Violation {
            rule: Rule::StartState,
            at: String::new(),
            message: "start state missing".into(),
        });
        return ValidationReport {
            ok: false,
            violations,
        };
    }
    for (i, s) in a.states.iter().enumerate() {
        if s.output.as_str().is_empty() || s.output.as_str().chars().any(char::is_whitespace) {
            violations.push(Violation {
                rule: Rule::OutputLabel,
                at: a.name(i).to_string(),
                message: "output label is not a single token".into(),
            });
        }
    }
    for s in 0..a.len() {
        let t = a.next(s, 0);
        if a.output(s) != a.output(t) {
            violations.push(Violation {
                rule: Rule::LeadingZeroInvariance,
                at: format!("{} -0-> {}", a.name(s), a.name(t)),
                message: format!(
                    "digit-0 edge joins output {:?} to output {:?}",
                    a.output(s).as_str(),
                    a.output(t).as_str()
                ),
            });
        }
    }
    let reach = a.reachable_from(a.start);
    for (s, &r) in reach.iter().enumerate() {
        if !r {
            violations.push(Violation {
                rule: Rule::Accessibility,
                at: a.name(s).to_string(),
                message: "state is not reachable from the start state".into(),
            });
        }
    }
    ValidationReport {
        ok: violations.is_empty(),
        violations,
    }
}

// ---------------------------------------------------------------------------
// AUT text format

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("duplicate state {0:?}")]
    DuplicateState(String),
    #[error("duplicate transition from {0:?} on digit {1}")]
    DuplicateTransition(String, usize),
    #[error("missing transition from {0:?} on digit {1}")]
    MissingTransition(String, usize),
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("base must be at least 2, got {0}")]
    BaseTooSmall(usize),
    #[error("digit {digit} out of range for base {base}")]
    DigitOutOfRange { digit: usize, base: usize },
    #[error("missing `{0}` line")]
    MissingDirective(&'static str),
    #[error("`{0}` given more than once")]
    RepeatedDirective(&'static str),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based line number; 0 for whole-file conditions detected at the end.
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn perr(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

/// Parses AUT text. The result is structurally well formed but not validated.
pub fn parse_automaton(text: &str) -> Result<Automaton, ParseError> {
    let mut base: Option<(usize, usize)> = None;
    let mut start: Option<(String, usize)> = None;
    let mut states: Vec<State> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    // (line, source, digit, target)
    let mut trans: Vec<(usize, usize, usize, usize)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let arity = |n: usize| -> Result<(), ParseError> {
            if tokens.len() != n {
                Err(perr(
                    line,
                    ParseErrorKind::Syntax(format!(
                        "`{}` expects {} argument(s), got {}",
                        tokens[0],
                        n - 1,
                        tokens.len() - 1
                    )),
                ))
            } else {
                Ok(())
            }
        };
        match tokens[0] {
            "m" => {
                arity(2)?;
                if base.is_some() {
                    return Err(perr(line, ParseErrorKind::RepeatedDirective("m")));
                }
                let m: usize = tokens[1].parse().map_err(|_| {
                    perr(
                        line,
                        ParseErrorKind::Syntax(format!("invalid base {:?}", tokens[1])),
                    )
                })?;
                if m < 2 {
                    return Err(perr(line, ParseErrorKind::BaseTooSmall(m)));
                }
                base = Some((m, line));
            }
            "start" => {
                arity(2)?;
                if start.is_some() {
                    return Err(perr(line, ParseErrorKind::RepeatedDirective("start")));
                }
                start = Some((tokens[1].to_string(), line));
            }
            "state" => {
                arity(3)?;
                let name = tokens[1].to_string();
                if index.contains_key(&name) {
                    return Err(perr(line, ParseErrorKind::DuplicateState(name)));
                }
                let output = OutputLabel::new(tokens[2])
                    .map_err(|e| perr(line, ParseErrorKind::Syntax(e.to_string())))?;
                index.insert(name.clone(), states.len());
                states.push(State { name, output });
            }
            "trans" => {
                arity(4)?;
                let src = *index
                    .get(tokens[1])
                    .ok_or_else(|| perr(line, ParseErrorKind::UnknownState(tokens[1].into())))?;
                let digit: usize = tokens[2].parse().map_err(|_| {
                    perr(
                        line,
                        ParseErrorKind::Syntax(format!("invalid digit {:?}", tokens[2])),
                    )
                })?;
                let dst = *index
                    .get(tokens[3])
                    .ok_or_else(|| perr(line, ParseErrorKind::UnknownState(tokens[3].into())))?;
                trans.push((line, src, digit, dst));
            }
            other => {
                return Err(perr(
                    line,
                    ParseErrorKind::Syntax(format!("unknown directive {other:?}")),
                ))
            }
        }
    }

    let (m, _) = base.ok_or_else(|| perr(0, ParseErrorKind::MissingDirective("m")))?;
    let (start_name, start_line) =
        start.ok_or_else(|| perr(0, ParseErrorKind::MissingDirective("start")))?;
    let start = *index
        .get(&start_name)
        .ok_or_else(|| perr(start_line, ParseErrorKind::UnknownState(start_name.clone())))?;
    if states.is_empty() {
        return Err(perr(0, ParseErrorKind::MissingDirective("state")));
    }

    let mut delta: Vec<Option<usize>> = vec![None; states.len() * m];
    for (line, src, digit, dst) in trans {
        if digit >= m {
            return Err(perr(line, ParseErrorKind::DigitOutOfRange { digit, base: m }));
        }
        let slot = &mut delta[src * m + digit];
        if slot.is_some() {
            return Err(perr(
                line,
                ParseErrorKind::DuplicateTransition(states[src].name.clone(), digit),
            ));
        }
        *slot = Some(dst);
    }
    let delta = delta
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            t.ok_or_else(|| {
                perr(
                    0,
                    ParseErrorKind::MissingTransition(states[i / m].name.clone(), i % m),
                )
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    Automaton::new(m, states, start, delta).map_err(|e| perr(0, ParseErrorKind::Syntax(e.to_string())))
}

/// Canonical AUT text: base, start, states in declaration order, then
/// transitions grouped by state in digit order.
pub fn serialize_automaton(a: &Automaton) -> String {
    let mut out = String::new();
    out.push_str(&format!("m {}\n", a.base));
    out.push_str(&format!("start {}\n", a.name(a.start)));
    for s in &a.states {
        out.push_str(&format!("state {} {}\n", s.name, s.output));
    }
    for s in 0..a.len() {
        for (d, t) in a.edges(s) {
            out.push_str(&format!("trans {} {} {}\n", a.name(s), d, a.name(t)));
        }
    }
    out
}

impl fmt::Display for Automaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_automaton(self))
    }
}
