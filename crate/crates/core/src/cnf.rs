//! CNF data model: variables, literals, clauses, formulas and DIMACS I/O.
//!
//! Variables are 1-based in DIMACS text and 0-based everywhere else. The
//! clause-literal column layout puts every positive literal first
//! (`x1..xn`) followed by every negative literal (`¬x1..¬xn`).

use std::fmt;
use std::io::{self, Write};
use std::ops::Not;

use thiserror::Error;

/// A propositional variable, stored 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Variable from a 0-based index.
    #[inline]
    pub fn from_index(index: usize) -> Var {
        Var(index as u32)
    }

    /// Variable from a 1-based DIMACS number. Returns `None` for 0.
    #[inline]
    pub fn from_dimacs(number: u32) -> Option<Var> {
        number.checked_sub(1).map(Var)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn dimacs(self) -> u32 {
        self.0 + 1
    }

    #[inline]
    pub fn lit(self, positive: bool) -> Lit {
        Lit::new(self, positive)
    }

    #[inline]
    pub fn positive(self) -> Lit {
        Lit::new(self, true)
    }

    #[inline]
    pub fn negative(self) -> Lit {
        Lit::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.dimacs())
    }
}

/// A literal, encoded as `2 * var + (negated as u32)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 << 1 | (!positive) as u32)
    }

    /// Literal from a nonzero DIMACS integer.
    #[inline]
    pub fn from_dimacs(value: i32) -> Option<Lit> {
        if value == 0 {
            return None;
        }
        let var = Var::from_dimacs(value.unsigned_abs())?;
        Some(Lit::new(var, value > 0))
    }

    #[inline]
    pub fn to_dimacs(self) -> i32 {
        let v = self.var().dimacs() as i32;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    #[inline]
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Dense code in `[0, 2 * n_v)`, suitable for indexing per-literal tables.
    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn from_code(code: usize) -> Lit {
        Lit(code as u32)
    }
}

impl Not for Lit {
    type Output = Lit;
    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ColumnError {
    #[error("literal {lit} is out of range for {num_vars} variables")]
    OutOfRange { lit: i32, num_vars: usize },
    #[error("column {column} is out of range for {num_vars} variables")]
    BadColumn { column: usize, num_vars: usize },
}

/// Column of `lit` in the `n_c × 2n_v` clause-literal matrix.
pub fn lit_to_column(lit: Lit, num_vars: usize) -> Result<usize, ColumnError> {
    let v = lit.var().index();
    if v >= num_vars {
        return Err(ColumnError::OutOfRange {
            lit: lit.to_dimacs(),
            num_vars,
        });
    }
    Ok(if lit.is_positive() { v } else { num_vars + v })
}

pub fn column_to_lit(column: usize, num_vars: usize) -> Result<Lit, ColumnError> {
    if column >= 2 * num_vars {
        return Err(ColumnError::BadColumn { column, num_vars });
    }
    Ok(if column < num_vars {
        Var::from_index(column).positive()
    } else {
        Var::from_index(column - num_vars).negative()
    })
}

/// A disjunction of literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    /// Builds a clause without normalizing it.
    pub fn new(lits: Vec<Lit>) -> Clause {
        Clause { lits }
    }

    pub fn from_dimacs(values: &[i32]) -> Clause {
        Clause::new(
            values
                .iter()
                .map(|&v| Lit::from_dimacs(v).expect("zero is not a literal"))
                .collect(),
        )
    }

    /// Removes repeated literals (keeping first occurrences in order).
    /// Returns `None` for a tautology.
    pub fn normalized(&self) -> Option<Clause> {
        let mut out: Vec<Lit> = Vec::with_capacity(self.lits.len());
        for &lit in &self.lits {
            if out.contains(&!lit) {
                return None;
            }
            if !out.contains(&lit) {
                out.push(lit);
            }
        }
        Some(Clause { lits: out })
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Lit> {
        self.lits.iter()
    }

    pub fn into_lits(self) -> Vec<Lit> {
        self.lits
    }
}

impl From<Vec<Lit>> for Clause {
    fn from(lits: Vec<Lit>) -> Clause {
        Clause::new(lits)
    }
}

impl<'a> IntoIterator for &'a Clause {
    type Item = &'a Lit;
    type IntoIter = std::slice::Iter<'a, Lit>;
    fn into_iter(self) -> Self::IntoIter {
        self.lits.iter()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for lit in &self.lits {
            write!(f, "{} ", lit)?;
        }
        write!(f, "0")
    }
}

/// Where a formula came from, plus parse-time bookkeeping.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Origin {
    /// File path or generator id.
    pub source: String,
    /// Branch literals applied by decimation, in order.
    pub lineage: Vec<Lit>,
    /// Tautological clauses dropped while parsing.
    pub dropped_tautologies: usize,
    /// Variables listed on a `c core ... 0` comment line, if one was present.
    pub core: Option<Vec<Var>>,
}

/// An immutable CNF instance.
///
/// Equality compares the variable count and the clause list only; the
/// [`Origin`] is metadata.
#[derive(Debug, Clone, Default)]
pub struct Formula {
    num_vars: usize,
    clauses: Vec<Clause>,
    origin: Origin,
}

impl PartialEq for Formula {
    fn eq(&self, other: &Formula) -> bool {
        self.num_vars == other.num_vars && self.clauses == other.clauses
    }
}

impl Eq for Formula {}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("clause {clause} mentions variable {var} but the formula has {num_vars} variables")]
    VarOutOfRange {
        clause: usize,
        var: u32,
        num_vars: usize,
    },
}

impl Formula {
    /// Builds a formula, checking that every literal is in range. Clauses
    /// are stored as given.
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Formula, FormulaError> {
        for (i, c) in clauses.iter().enumerate() {
            if let Some(l) = c.iter().find(|l| l.var().index() >= num_vars) {
                return Err(FormulaError::VarOutOfRange {
                    clause: i,
                    var: l.var().dimacs(),
                    num_vars,
                });
            }
        }
        Ok(Formula {
            num_vars,
            clauses,
            origin: Origin::default(),
        })
    }

    /// Convenience constructor from DIMACS integer lists. Panics on bad input.
    pub fn from_dimacs_clauses(num_vars: usize, clauses: &[&[i32]]) -> Formula {
        Formula::new(
            num_vars,
            clauses.iter().map(|c| Clause::from_dimacs(c)).collect(),
        )
        .expect("literal out of range")
    }

    pub fn with_origin(mut self, origin: Origin) -> Formula {
        self.origin = origin;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    pub fn origin_mut(&mut self) -> &mut Origin {
        &mut self.origin
    }

    pub fn num_cells(&self) -> usize {
        self.clauses.iter().map(Clause::len).sum()
    }

    /// A copy with `extra` appended to the clause list.
    pub fn with_clause(&self, extra: Clause) -> Formula {
        let mut f = self.clone();
        f.clauses.push(extra);
        f
    }

    /// The sub-formula made of the clauses at `indices` (0-based), keeping
    /// the variable count.
    pub fn restrict(&self, indices: &[usize]) -> Formula {
        Formula {
            num_vars: self.num_vars,
            clauses: indices.iter().map(|&i| self.clauses[i].clone()).collect(),
            origin: self.origin.clone(),
        }
    }

    pub fn eval(&self, assignment: &Assignment) -> Truth {
        eval(self, assignment)
    }
}

/// Per-variable partial assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn unassigned(num_vars: usize) -> Assignment {
        Assignment {
            values: vec![None; num_vars],
        }
    }

    pub fn from_values(values: Vec<Option<bool>>) -> Assignment {
        Assignment { values }
    }

    pub fn from_bools(values: &[bool]) -> Assignment {
        Assignment {
            values: values.iter().map(|&b| Some(b)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values[var.index()]
    }

    pub fn set(&mut self, var: Var, value: Option<bool>) {
        self.values[var.index()] = value;
    }

    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.get(lit.var()).map(|v| v == lit.is_positive())
    }

    pub fn values(&self) -> &[Option<bool>] {
        &self.values
    }

    /// Literals set true, in variable order. This is the DIMACS `v` line body.
    pub fn true_lits(&self) -> impl Iterator<Item = Lit> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|b| Var::from_index(i).lit(b)))
    }
}

/// Set of variables of a formula, stored as a bitmask over `[0, n_v)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct VarMask {
    bits: Vec<bool>,
}

impl VarMask {
    pub fn new(num_vars: usize) -> VarMask {
        VarMask {
            bits: vec![false; num_vars],
        }
    }

    pub fn from_vars(num_vars: usize, vars: impl IntoIterator<Item = Var>) -> VarMask {
        let mut m = VarMask::new(num_vars);
        for v in vars {
            m.insert(v);
        }
        m
    }

    pub fn insert(&mut self, var: Var) {
        self.bits[var.index()] = true;
    }

    pub fn contains(&self, var: Var) -> bool {
        self.bits.get(var.index()).copied().unwrap_or(false)
    }

    /// Number of variables in the set.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Size of the universe, i.e. the formula's variable count.
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn iter(&self) -> impl Iterator<Item = Var> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| Var::from_index(i))
    }

    pub fn as_bools(&self) -> &[bool] {
        &self.bits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    Satisfied,
    Falsified,
    Undetermined,
}

pub fn eval(formula: &Formula, assignment: &Assignment) -> Truth {
    assert!(assignment.len() >= formula.num_vars());
    let mut all_sat = true;
    for clause in formula.clauses() {
        let mut sat = false;
        let mut open = false;
        for &lit in clause {
            match assignment.lit_value(lit) {
                Some(true) => {
                    sat = true;
                    break;
                }
                None => open = true,
                Some(false) => {}
            }
        }
        if !sat {
            if !open {
                return Truth::Falsified;
            }
            all_sat = false;
        }
    }
    if all_sat {
        Truth::Satisfied
    } else {
        Truth::Undetermined
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("line {line}: malformed header `{text}`")]
    BadHeader { line: usize, text: String },
    #[error("line {line}: unexpected token `{token}`")]
    BadToken { line: usize, token: String },
    #[error("line {line}: literal {lit} exceeds the declared {num_vars} variables")]
    LiteralOutOfRange {
        line: usize,
        lit: i64,
        num_vars: usize,
    },
    #[error("unterminated clause at end of input")]
    UnterminatedClause,
    #[error("input is not valid UTF-8")]
    Encoding,
}

/// Parses DIMACS CNF.
///
/// Comments may appear anywhere. A `c core v1 v2 ... 0` comment is recorded
/// in [`Origin::core`]. Repeated literals are removed and tautologies are
/// dropped (counted in [`Origin::dropped_tautologies`]).
pub fn parse_dimacs(input: &[u8]) -> Result<Formula, DimacsError> {
    let text = std::str::from_utf8(input).map_err(|_| DimacsError::Encoding)?;
    let mut header: Option<usize> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut dropped = 0;
    let mut core = None;

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('c') {
            let mut words = trimmed.split_whitespace();
            if words.next() == Some("c") && words.next() == Some("core") {
                core = Some(parse_core_vars(words, lineno)?);
            }
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::BadHeader {
                    line: lineno,
                    text: trimmed.to_string(),
                });
            }
            header = Some(parse_header(trimmed, lineno)?);
            continue;
        }
        let num_vars = header.ok_or(DimacsError::MissingHeader)?;
        for token in trimmed.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| DimacsError::BadToken {
                line: lineno,
                token: token.to_string(),
            })?;
            if value == 0 {
                match Clause::new(std::mem::take(&mut current)).normalized() {
                    Some(c) => clauses.push(c),
                    None => dropped += 1,
                }
                continue;
            }
            if value.unsigned_abs() > num_vars as u64 {
                return Err(DimacsError::LiteralOutOfRange {
                    line: lineno,
                    lit: value,
                    num_vars,
                });
            }
            current.push(Lit::from_dimacs(value as i32).expect("nonzero"));
        }
    }

    let num_vars = header.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        return Err(DimacsError::UnterminatedClause);
    }
    if let Some(core) = &core {
        if let Some(v) = core.iter().find(|v| v.index() >= num_vars) {
            return Err(DimacsError::LiteralOutOfRange {
                line: 0,
                lit: v.dimacs() as i64,
                num_vars,
            });
        }
    }
    Ok(Formula {
        num_vars,
        clauses,
        origin: Origin {
            dropped_tautologies: dropped,
            core,
            ..Origin::default()
        },
    })
}

fn parse_header(line: &str, lineno: usize) -> Result<usize, DimacsError> {
    let bad = || DimacsError::BadHeader {
        line: lineno,
        text: line.to_string(),
    };
    let words: Vec<&str> = line.split_whitespace().collect();
    if words.len() != 4 || words[0] != "p" || words[1] != "cnf" {
        return Err(bad());
    }
    let num_vars: usize = words[2].parse().map_err(|_| bad())?;
    let _num_clauses: usize = words[3].parse().map_err(|_| bad())?;
    Ok(num_vars)
}

fn parse_core_vars<'a>(
    words: impl Iterator<Item = &'a str>,
    lineno: usize,
) -> Result<Vec<Var>, DimacsError> {
    let mut vars = Vec::new();
    for w in words {
        let value: u32 = w.parse().map_err(|_| DimacsError::BadToken {
            line: lineno,
            token: w.to_string(),
        })?;
        match Var::from_dimacs(value) {
            Some(v) => vars.push(v),
            None => return Ok(vars),
        }
    }
    Err(DimacsError::BadToken {
        line: lineno,
        token: "missing 0 after core list".to_string(),
    })
}

pub fn write_dimacs<W: Write>(formula: &Formula, out: &mut W) -> io::Result<()> {
    writeln!(
        out,
        "p cnf {} {}",
        formula.num_vars(),
        formula.num_clauses()
    )?;
    for clause in formula.clauses() {
        writeln!(out, "{}", clause)?;
    }
    Ok(())
}

pub fn serialize_dimacs(formula: &Formula) -> String {
    let mut buf = Vec::new();
    write_dimacs(formula, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("DIMACS output is ASCII")
}
