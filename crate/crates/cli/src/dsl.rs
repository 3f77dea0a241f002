//! A small text format for linear constant-coefficient systems.
//!
//! ```text
//! system mac {
//!   vars x1 x2 x3;
//!   unknowns y;
//!   eq: y(3,3) = 0;
//!   eq: y(2,3) - y(1,1) = 0;
//!   eq: y(2,2) = 0;
//! }
//! ```
//!
//! A jet is an unknown followed by 1-based variable indices in parentheses;
//! repeating an index differentiates again, and a bare unknown is order zero.
//! Coefficients are optional rationals written before `*`. Lines starting
//! with `#` are comments.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use spencer_core::exactalg::Rational;
use spencer_core::jetspace::{Jet, JetFrame, MultiIndex};
use spencer_core::system::{LinearForm, LinearJetSystem};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownIdentifier,
    IndexOutOfRange,
    ZeroDenominator,
    DuplicateName,
}

/// A syntax or validation error with its 1-based position.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// `c · unknown(vars…)`, with 0-based `unknown` and 1-based `vars`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: Rational,
    pub unknown: usize,
    pub vars: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub label: Option<String>,
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemDocument {
    pub name: String,
    pub vars: Vec<String>,
    pub unknowns: Vec<String>,
    pub equations: Vec<Equation>,
}

impl SystemDocument {
    /// Highest derivative order appearing in the equations.
    pub fn order(&self) -> usize {
        self.equations.iter().flat_map(|e| &e.terms).map(|t| t.vars.len()).max().unwrap_or(0)
    }

    /// The engine system on `J_order(E)`.
    pub fn to_system(&self) -> spencer_core::Result<LinearJetSystem> {
        let n = self.vars.len();
        let frame = JetFrame::new(n, self.unknowns.len(), self.order())?;
        let forms: Vec<LinearForm> = self
            .equations
            .iter()
            .map(|e| {
                e.terms
                    .iter()
                    .map(|t| Ok((t.coeff.clone(), Jet::new(t.unknown, MultiIndex::from_variables(n, &t.vars)?))))
                    .collect::<spencer_core::Result<LinearForm>>()
            })
            .collect::<spencer_core::Result<_>>()?;
        LinearJetSystem::new(frame, &forms, self.name.clone())
    }

    /// Document for the reduced equations of `sys`, with generated names.
    pub fn from_system(sys: &LinearJetSystem) -> Self {
        let n = sys.n();
        let vars = (1..=n).map(|i| format!("x{i}")).collect();
        let unknowns = if sys.m() == 1 { vec!["y".to_string()] } else { (1..=sys.m()).map(|k| format!("y{k}")).collect() };
        let equations = sys
            .forms()
            .into_iter()
            .map(|form| Equation {
                label: None,
                terms: form
                    .into_iter()
                    .filter(|(c, _)| !c.is_zero())
                    .map(|(coeff, jet)| Term { coeff, unknown: jet.unknown, vars: jet.index.variables() })
                    .collect(),
            })
            .collect();
        SystemDocument { name: identifier(sys.label()), vars, unknowns, equations }
    }
}

/// Turns an arbitrary label into a valid identifier.
pub fn identifier(label: &str) -> String {
    let mut s: String = label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
    if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit()) {
        s.insert(0, 's');
    }
    s
}

/// `c₁*u(…) + c₂*v(…) - …` in canonical form; `0` for no terms.
pub fn expression(terms: &[Term], unknowns: &[String]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, t) in terms.iter().enumerate() {
        let neg = t.coeff.is_negative();
        out.push_str(match (i, neg) {
            (0, true) => "-",
            (0, false) => "",
            (_, true) => " - ",
            (_, false) => " + ",
        });
        let mag = t.coeff.abs();
        if !mag.is_one() {
            out.push_str(&format!("{mag}*"));
        }
        out.push_str(&unknowns[t.unknown]);
        if !t.vars.is_empty() {
            let idx: Vec<String> = t.vars.iter().map(ToString::to_string).collect();
            out.push_str(&format!("({})", idx.join(",")));
        }
    }
    out
}

/// Nonzero entries of a row over `frame`, as terms in frame order.
pub fn row_terms(frame: &JetFrame, row: &[Rational]) -> Vec<Term> {
    row.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(p, c)| {
            let jet = frame.jet(p);
            Term { coeff: c.clone(), unknown: jet.unknown, vars: jet.index.variables() }
        })
        .collect()
}

impl fmt::Display for SystemDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "system {} {{", self.name)?;
        writeln!(f, "  vars {};", self.vars.join(" "))?;
        writeln!(f, "  unknowns {};", self.unknowns.join(" "))?;
        for eq in &self.equations {
            match &eq.label {
                Some(l) => write!(f, "  eq {l}: ")?,
                None => write!(f, "  eq: ")?,
            }
            f.write_str(&expression(&eq.terms, &self.unknowns))?;
            writeln!(f, " = 0;")?;
        }
        writeln!(f, "}}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Sym(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, column);
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            column += 1;
            i += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            column += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: l0, column: c0 });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            column += i - start;
            let digits: String = chars[start..i].iter().collect();
            let v = digits.parse::<BigInt>().expect("ASCII digits");
            out.push(Token { tok: Tok::Int(v), line: l0, column: c0 });
            continue;
        }
        if "{};:(),+-*/=".contains(c) {
            out.push(Token { tok: Tok::Sym(c), line: l0, column: c0 });
            column += 1;
            i += 1;
            continue;
        }
        return Err(ParseError {
            kind: ParseErrorKind::Syntax,
            line: l0,
            column: c0,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push(Token { tok: Tok::End, line, column });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::End => "end of input".into(),
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at(t: &Token, kind: ParseErrorKind, message: String) -> ParseError {
        ParseError { kind, line: t.line, column: t.column, message }
    }

    fn expected(&self, what: &str) -> ParseError {
        let t = self.peek();
        Self::err_at(t, ParseErrorKind::Syntax, format!("expected {what}, found {}", describe(&t.tok)))
    }

    fn sym(&mut self, c: char) -> Result<Token, ParseError> {
        if self.peek().tok == Tok::Sym(c) {
            Ok(self.next())
        } else {
            Err(self.expected(&format!("`{c}`")))
        }
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn ident(&mut self, what: &str) -> Result<(String, Token), ParseError> {
        match self.peek().tok.clone() {
            Tok::Ident(s) => Ok((s, self.next())),
            _ => Err(self.expected(what)),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if s == kw => {
                self.next();
                Ok(())
            }
            _ => Err(self.expected(&format!("`{kw}`"))),
        }
    }

    fn int(&mut self) -> Result<(BigInt, Token), ParseError> {
        match self.peek().tok.clone() {
            Tok::Int(v) => Ok((v, self.next())),
            _ => Err(self.expected("an integer")),
        }
    }

    fn names(&mut self, what: &str, taken: &[String]) -> Result<Vec<String>, ParseError> {
        let mut out: Vec<String> = Vec::new();
        while let Tok::Ident(s) = self.peek().tok.clone() {
            let t = self.next();
            if out.contains(&s) || taken.contains(&s) {
                return Err(Self::err_at(&t, ParseErrorKind::DuplicateName, format!("name `{s}` is declared twice")));
            }
            out.push(s);
        }
        if out.is_empty() {
            return Err(self.expected(what));
        }
        self.sym(';')?;
        Ok(out)
    }
}

/// Parses one system document.
pub fn parse(text: &str) -> Result<SystemDocument, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    p.keyword("system")?;
    let (name, _) = p.ident("a system name")?;
    p.sym('{')?;
    p.keyword("vars")?;
    let vars = p.names("variable names", &[])?;
    p.keyword("unknowns")?;
    let unknowns = p.names("unknown names", &vars)?;
    let mut equations = Vec::new();
    loop {
        match &p.peek().tok {
            Tok::Sym('}') => {
                p.next();
                break;
            }
            Tok::Ident(s) if s == "eq" => {
                p.next();
                equations.push(equation(&mut p, vars.len(), &unknowns)?);
            }
            _ => return Err(p.expected("`eq` or `}`")),
        }
    }
    if p.peek().tok != Tok::End {
        return Err(p.expected("end of input"));
    }
    Ok(SystemDocument { name, vars, unknowns, equations })
}

fn equation(p: &mut Parser, n: usize, unknowns: &[String]) -> Result<Equation, ParseError> {
    let label = match p.peek().tok.clone() {
        Tok::Ident(s) => {
            p.next();
            Some(s)
        }
        _ => None,
    };
    p.sym(':')?;
    let mut terms = Vec::new();
    let mut sign = if p.is_sym('-') {
        p.next();
        -Rational::one()
    } else {
        Rational::one()
    };
    loop {
        let mut t = term(p, n, unknowns)?;
        t.coeff *= &sign;
        terms.push(t);
        if p.is_sym('+') {
            p.next();
            sign = Rational::one();
        } else if p.is_sym('-') {
            p.next();
            sign = -Rational::one();
        } else {
            break;
        }
    }
    p.sym('=')?;
    let (zero, tok) = p.int()?;
    if !zero.is_zero() {
        return Err(Parser::err_at(&tok, ParseErrorKind::Syntax, "right-hand side must be 0".into()));
    }
    p.sym(';')?;
    Ok(Equation { label, terms })
}

fn term(p: &mut Parser, n: usize, unknowns: &[String]) -> Result<Term, ParseError> {
    let mut coeff = Rational::one();
    let negative = if p.is_sym('-') {
        p.next();
        true
    } else {
        false
    };
    if let Tok::Int(_) = p.peek().tok {
        let (num, _) = p.int()?;
        let den = if p.is_sym('/') {
            p.next();
            let (d, tok) = p.int()?;
            if d.is_zero() {
                return Err(Parser::err_at(&tok, ParseErrorKind::ZeroDenominator, "zero denominator".into()));
            }
            d
        } else {
            BigInt::one()
        };
        coeff = Rational::new(num, den);
        p.sym('*')?;
    } else if negative {
        return Err(p.expected("an integer after `-`"));
    }
    if negative {
        coeff = -coeff;
    }
    let (name, tok) = p.ident("an unknown")?;
    let unknown = unknowns.iter().position(|u| *u == name).ok_or_else(|| {
        Parser::err_at(&tok, ParseErrorKind::UnknownIdentifier, format!("unknown identifier `{name}`"))
    })?;
    let mut vars = Vec::new();
    if p.is_sym('(') {
        p.next();
        loop {
            let (v, tok) = p.int()?;
            let i = usize::try_from(&v).ok().filter(|&i| (1..=n).contains(&i)).ok_or_else(|| {
                Parser::err_at(&tok, ParseErrorKind::IndexOutOfRange, format!("variable index {v} outside 1..={n}"))
            })?;
            vars.push(i);
            if p.is_sym(',') {
                p.next();
            } else {
                break;
            }
        }
        p.sym(')')?;
    }
    Ok(Term { coeff, unknown, vars })
}
