//! DSL for symbolic overlapping substitutions.
//!
//! ```text
//! # three-letter overlapping rule
//! alphabet a b c;
//! a -> [a:1/2] b a;
//! b -> c [a:1/2];
//! c -> b [a:1/2];
//! ```
//!
//! Grammar:
//!
//! ```text
//! doc      := header rule+
//! header   := "alphabet" name+ ";" ("param" name "=" number ";")*
//! rule     := name "->" item+ ";"
//! item     := name | "[" name ":" weight "]"
//! weight   := rational | decimal | name | "1-" name
//! rational := integer "/" positive-integer
//! number   := rational | decimal | "sqrt" "(" integer ")" ("/" integer)?
//! ```
//!
//! Comments run from `#` to end of line; the syntax is otherwise
//! whitespace-insensitive. A letter written without brackets carries
//! weight 1. Weights must lie in (0, 1], interior letters of an image must
//! have weight 1, and a single-letter image must have weight 1.
//!
//! Rule weights given as exact rationals keep the session in exact
//! arithmetic; decimal literals and `param`-bound weights switch it to
//! float arithmetic.

use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::fmt::Write as _;
use thiserror::Error;

use crate::num::{parse_rational, Mode, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuleError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("undeclared letter `{name}` at line {line}, column {col}")]
    UndeclaredLetter { name: String, line: usize, col: usize },
    #[error("interior letter {position} of the image of `{rule}` has weight < 1")]
    InteriorWeightNotOne { rule: String, position: usize },
    #[error("single-letter image of `{rule}` must have weight 1")]
    SingletonWeightNotOne { rule: String },
    #[error("weight {value} of letter {position} in the image of `{rule}` is outside (0, 1]")]
    WeightOutOfRange { rule: String, position: usize, value: String },
    #[error("duplicate rule for letter `{name}`")]
    DuplicateRule { name: String },
    #[error("no rule for letter `{name}`")]
    MissingRule { name: String },
    #[error("duplicate alphabet letter `{name}`")]
    DuplicateLetter { name: String },
    #[error("duplicate parameter `{name}`")]
    DuplicateParam { name: String },
    #[error("unknown parameter `{name}`")]
    UnknownParam { name: String },
}

/// Ordered alphabet of distinct letter names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    letters: Vec<String>,
}

impl Alphabet {
    pub fn new(letters: Vec<String>) -> Result<Self, RuleError> {
        for (i, l) in letters.iter().enumerate() {
            if l.is_empty() {
                return Err(RuleError::Syntax {
                    line: 0,
                    col: 0,
                    msg: "empty letter name".into(),
                });
            }
            if letters[..i].contains(l) {
                return Err(RuleError::DuplicateLetter { name: l.clone() });
            }
        }
        Ok(Alphabet { letters })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.letters[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.letters.iter().position(|l| l == name)
    }

    pub fn names(&self) -> &[String] {
        &self.letters
    }
}

/// How a weight was written; preserved for canonical re-emission.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightForm {
    Rational,
    Decimal,
    Param(String),
    /// `1-r` for a declared parameter `r`.
    OneMinusParam(String),
}

/// A weight in (0, 1]: always carries a float value, and an exact rational
/// when one is known (rational or decimal literal, or a parameter bound to
/// one).
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    pub exact: Option<Rational>,
    pub value: f64,
    pub form: WeightForm,
}

impl Weight {
    pub fn one() -> Self {
        Weight {
            exact: Some(Rational::one()),
            value: 1.0,
            form: WeightForm::Rational,
        }
    }

    pub fn from_rational(q: Rational) -> Self {
        let value = crate::num::Scalar::from_rational_f64(&q);
        Weight {
            exact: Some(q),
            value,
            form: WeightForm::Rational,
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.exact {
            Some(q) => q.is_one(),
            None => self.value == 1.0,
        }
    }

    fn in_unit_interval(&self) -> bool {
        match &self.exact {
            Some(q) => q.is_positive() && *q <= Rational::one(),
            None => self.value > 0.0 && self.value <= 1.0,
        }
    }
}

/// A letter together with its boundary weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedLetter {
    pub letter: usize,
    pub weight: Weight,
}

/// Value bound to a `param` declaration.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Rational(Rational),
    Decimal(Rational),
    /// `sqrt(radicand)/denom`
    Sqrt { radicand: u64, denom: u64 },
}

impl ParamValue {
    pub fn exact(&self) -> Option<Rational> {
        match self {
            ParamValue::Rational(q) | ParamValue::Decimal(q) => Some(q.clone()),
            ParamValue::Sqrt { .. } => None,
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            ParamValue::Rational(q) | ParamValue::Decimal(q) => {
                crate::num::Scalar::from_rational_f64(q)
            }
            ParamValue::Sqrt { radicand, denom } => (*radicand as f64).sqrt() / *denom as f64,
        }
    }

    fn render(&self) -> String {
        match self {
            ParamValue::Rational(q) => render_rational(q),
            ParamValue::Decimal(q) => render_decimal(q),
            ParamValue::Sqrt { radicand, denom } => {
                if *denom == 1 {
                    format!("sqrt({radicand})")
                } else {
                    format!("sqrt({radicand})/{denom}")
                }
            }
        }
    }
}

/// A validated symbolic overlapping substitution: one image per letter,
/// letters fractionally weighted only at the two boundary positions.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicSubstitution {
    pub alphabet: Alphabet,
    pub params: Vec<(String, ParamValue)>,
    pub images: Vec<Vec<WeightedLetter>>,
    pub mode: Mode,
}

impl SymbolicSubstitution {
    pub fn kappa(&self) -> usize {
        self.alphabet.len()
    }

    pub fn image(&self, letter: usize) -> &[WeightedLetter] {
        &self.images[letter]
    }

    pub fn first_weight(&self, letter: usize) -> &Weight {
        &self.images[letter].first().expect("nonempty image").weight
    }

    pub fn last_weight(&self, letter: usize) -> &Weight {
        &self.images[letter].last().expect("nonempty image").weight
    }

    /// All rule weights have known exact rational values (true in exact
    /// mode, and in float mode when every parameter is bound to a rational
    /// or decimal literal).
    pub fn has_exact_weights(&self) -> bool {
        self.images
            .iter()
            .flatten()
            .all(|wl| wl.weight.exact.is_some())
    }

    fn validate(&self) -> Result<(), RuleError> {
        for (i, image) in self.images.iter().enumerate() {
            let rule = self.alphabet.name(i).to_string();
            for (pos, wl) in image.iter().enumerate() {
                if !wl.weight.in_unit_interval() {
                    return Err(RuleError::WeightOutOfRange {
                        rule: rule.clone(),
                        position: pos + 1,
                        value: format!("{}", wl.weight.value),
                    });
                }
            }
            if image.len() == 1 {
                if !image[0].weight.is_one() {
                    return Err(RuleError::SingletonWeightNotOne { rule });
                }
            } else {
                for (pos, wl) in image.iter().enumerate() {
                    if pos > 0 && pos + 1 < image.len() && !wl.weight.is_one() {
                        return Err(RuleError::InteriorWeightNotOne {
                            rule: rule.clone(),
                            position: pos + 1,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for SymbolicSubstitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", emit_canonical(self))
    }
}

fn render_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Render a rational with a power-of-ten denominator as a decimal literal.
fn render_decimal(q: &Rational) -> String {
    let mut denom = q.denom().clone();
    let mut digits = 0u32;
    let ten = num_bigint::BigInt::from(10);
    while (&denom % &ten).is_zero() {
        denom /= &ten;
        digits += 1;
    }
    if !denom.is_one() {
        return format!("{}", q.to_f64().unwrap_or(f64::NAN));
    }
    let digits = digits.max(1);
    let scale = num_bigint::BigInt::from(10).pow(digits);
    let scaled = (q * Rational::from_integer(scale)).to_integer();
    let s = scaled.to_string();
    let (neg, s) = match s.strip_prefix('-') {
        Some(rest) => ("-", rest.to_string()),
        None => ("", s),
    };
    let s = format!("{:0>width$}", s, width = digits as usize + 1);
    let split = s.len() - digits as usize;
    format!("{neg}{}.{}", &s[..split], &s[split..])
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Integer(String),
    Decimal(String),
    Arrow,
    Semi,
    LBracket,
    RBracket,
    Colon,
    Slash,
    Equals,
    LParen,
    RParen,
    Minus,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn bump(&mut self) -> char {
        let c = self.chars.next().unwrap();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }
}

fn lex(text: &str) -> Result<Vec<Token>, RuleError> {
    let mut lx = Lexer { chars: text.chars().peekable(), line: 1, col: 1 };
    let mut out = Vec::new();
    while let Some(&c) = lx.chars.peek() {
        let (tline, tcol) = (lx.line, lx.col);
        match c {
            '#' => {
                while let Some(&c) = lx.chars.peek() {
                    lx.bump();
                    if c == '\n' {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {
                lx.bump();
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&c) = lx.chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        name.push(lx.bump());
                    } else {
                        break;
                    }
                }
                out.push(Token { tok: Tok::Ident(name), line: tline, col: tcol });
            }
            c if c.is_ascii_digit() => {
                let mut num = String::new();
                let mut is_decimal = false;
                while let Some(&c) = lx.chars.peek() {
                    if c.is_ascii_digit() {
                        num.push(lx.bump());
                    } else if c == '.' && !is_decimal {
                        is_decimal = true;
                        num.push(lx.bump());
                    } else {
                        break;
                    }
                }
                let tok = if is_decimal { Tok::Decimal(num) } else { Tok::Integer(num) };
                out.push(Token { tok, line: tline, col: tcol });
            }
            '-' => {
                lx.bump();
                if lx.chars.peek() == Some(&'>') {
                    lx.bump();
                    out.push(Token { tok: Tok::Arrow, line: tline, col: tcol });
                } else {
                    out.push(Token { tok: Tok::Minus, line: tline, col: tcol });
                }
            }
            ';' | '[' | ']' | ':' | '/' | '=' | '(' | ')' => {
                lx.bump();
                let tok = match c {
                    ';' => Tok::Semi,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ':' => Tok::Colon,
                    '/' => Tok::Slash,
                    '=' => Tok::Equals,
                    '(' => Tok::LParen,
                    _ => Tok::RParen,
                };
                out.push(Token { tok, line: tline, col: tcol });
            }
            other => {
                return Err(RuleError::Syntax {
                    line: tline,
                    col: tcol,
                    msg: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> RuleError {
        let (line, col) = self
            .peek()
            .map(|t| (t.line, t.col))
            .unwrap_or_else(|| {
                self.tokens
                    .last()
                    .map(|t| (t.line, t.col + 1))
                    .unwrap_or((1, 1))
            });
        RuleError::Syntax { line, col, msg: msg.into() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, RuleError> {
        match self.peek() {
            Some(t) if t.tok == tok => Ok(self.next().unwrap()),
            _ => Err(self.err_here(format!("expected {what}"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize, usize), RuleError> {
        match self.peek().cloned() {
            Some(Token { tok: Tok::Ident(name), line, col }) => {
                self.next();
                Ok((name, line, col))
            }
            _ => Err(self.err_here(format!("expected {what}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), RuleError> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(name), .. }) if name == kw => {
                self.next();
                Ok(())
            }
            _ => Err(self.err_here(format!("expected `{kw}`"))),
        }
    }

    fn peek_is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Ident(name), .. }) if name == kw)
    }
}

/// Parse and validate a rule document.
pub fn parse_rules(text: &str) -> Result<SymbolicSubstitution, RuleError> {
    parse_rules_with_overrides(text, &[])
}

/// Parse with CLI-style parameter overrides (`name`, `value-text`) applied
/// over the document's `param` bindings.
pub fn parse_rules_with_overrides(
    text: &str,
    overrides: &[(String, String)],
) -> Result<SymbolicSubstitution, RuleError> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0 };

    p.keyword("alphabet")?;
    let mut letters = Vec::new();
    while let Some(Token { tok: Tok::Ident(_), .. }) = p.peek() {
        let (name, _, _) = p.ident("letter name")?;
        letters.push(name);
    }
    if letters.is_empty() {
        return Err(p.err_here("alphabet must declare at least one letter"));
    }
    p.expect(Tok::Semi, "`;` after alphabet")?;
    let alphabet = Alphabet::new(letters)?;

    let mut params: Vec<(String, ParamValue)> = Vec::new();
    while p.peek_is_keyword("param") {
        p.keyword("param")?;
        let (name, _, _) = p.ident("parameter name")?;
        if params.iter().any(|(n, _)| n == &name) {
            return Err(RuleError::DuplicateParam { name });
        }
        p.expect(Tok::Equals, "`=`")?;
        let value = parse_param_value(&mut p)?;
        p.expect(Tok::Semi, "`;` after param")?;
        params.push((name, value));
    }

    for (name, text) in overrides {
        let slot = params
            .iter_mut()
            .find(|(n, _)| n == name)
            .ok_or_else(|| RuleError::UnknownParam { name: name.clone() })?;
        slot.1 = parse_param_text(text).ok_or_else(|| RuleError::Syntax {
            line: 0,
            col: 0,
            msg: format!("invalid value `{text}` for parameter `{name}`"),
        })?;
    }

    let mut images: Vec<Option<Vec<WeightedLetter>>> = vec![None; alphabet.len()];
    let mut uses_decimal = false;
    let mut uses_param = !params.is_empty();
    while p.peek().is_some() {
        let (name, line, col) = p.ident("rule head letter")?;
        let head = alphabet
            .index_of(&name)
            .ok_or(RuleError::UndeclaredLetter { name: name.clone(), line, col })?;
        if images[head].is_some() {
            return Err(RuleError::DuplicateRule { name });
        }
        p.expect(Tok::Arrow, "`->`")?;
        let mut items = Vec::new();
        loop {
            match p.peek().cloned() {
                Some(Token { tok: Tok::Ident(lname), line, col }) => {
                    p.next();
                    let letter = alphabet
                        .index_of(&lname)
                        .ok_or(RuleError::UndeclaredLetter { name: lname, line, col })?;
                    items.push(WeightedLetter { letter, weight: Weight::one() });
                }
                Some(Token { tok: Tok::LBracket, .. }) => {
                    p.next();
                    let (lname, line, col) = p.ident("letter name")?;
                    let letter = alphabet
                        .index_of(&lname)
                        .ok_or(RuleError::UndeclaredLetter { name: lname, line, col })?;
                    p.expect(Tok::Colon, "`:`")?;
                    let weight = parse_weight(&mut p, &params, &mut uses_decimal, &mut uses_param)?;
                    p.expect(Tok::RBracket, "`]`")?;
                    items.push(WeightedLetter { letter, weight });
                }
                _ => break,
            }
        }
        if items.is_empty() {
            return Err(p.err_here("rule image must contain at least one letter"));
        }
        p.expect(Tok::Semi, "`;` after rule")?;
        images[head] = Some(items);
    }

    let mut final_images = Vec::with_capacity(alphabet.len());
    for (i, img) in images.into_iter().enumerate() {
        match img {
            Some(v) => final_images.push(v),
            None => {
                return Err(RuleError::MissingRule { name: alphabet.name(i).to_string() })
            }
        }
    }

    let mode = if uses_decimal || uses_param { Mode::Float } else { Mode::Exact };
    let sub = SymbolicSubstitution { alphabet, params, images: final_images, mode };
    sub.validate()?;
    Ok(sub)
}

fn parse_param_value(p: &mut Parser) -> Result<ParamValue, RuleError> {
    match p.peek().cloned() {
        Some(Token { tok: Tok::Integer(n), .. }) => {
            p.next();
            let numer = parse_rational(&n).ok_or_else(|| p.err_here("invalid integer"))?;
            if matches!(p.peek(), Some(Token { tok: Tok::Slash, .. })) {
                p.next();
                match p.peek().cloned() {
                    Some(Token { tok: Tok::Integer(d), .. }) => {
                        p.next();
                        let denom =
                            parse_rational(&d).ok_or_else(|| p.err_here("invalid integer"))?;
                        if denom.is_zero() {
                            return Err(p.err_here("zero denominator"));
                        }
                        Ok(ParamValue::Rational(numer / denom))
                    }
                    _ => Err(p.err_here("expected denominator")),
                }
            } else {
                Ok(ParamValue::Rational(numer))
            }
        }
        Some(Token { tok: Tok::Decimal(s), .. }) => {
            p.next();
            let q = parse_rational(&s).ok_or_else(|| p.err_here("invalid decimal"))?;
            Ok(ParamValue::Decimal(q))
        }
        Some(Token { tok: Tok::Ident(name), .. }) if name == "sqrt" => {
            p.next();
            p.expect(Tok::LParen, "`(`")?;
            let radicand = match p.peek().cloned() {
                Some(Token { tok: Tok::Integer(n), .. }) => {
                    p.next();
                    n.parse::<u64>().map_err(|_| p.err_here("radicand too large"))?
                }
                _ => return Err(p.err_here("expected integer radicand")),
            };
            p.expect(Tok::RParen, "`)`")?;
            let mut denom = 1u64;
            if matches!(p.peek(), Some(Token { tok: Tok::Slash, .. })) {
                p.next();
                denom = match p.peek().cloned() {
                    Some(Token { tok: Tok::Integer(n), .. }) => {
                        p.next();
                        n.parse::<u64>().map_err(|_| p.err_here("denominator too large"))?
                    }
                    _ => return Err(p.err_here("expected denominator")),
                };
                if denom == 0 {
                    return Err(p.err_here("zero denominator"));
                }
            }
            Ok(ParamValue::Sqrt { radicand, denom })
        }
        _ => Err(p.err_here("expected parameter value")),
    }
}

/// Parse a parameter value given as bare text (CLI override).
pub fn parse_param_text(text: &str) -> Option<ParamValue> {
    let tokens = lex(text).ok()?;
    let mut p = Parser { tokens, pos: 0 };
    let v = parse_param_value(&mut p).ok()?;
    if p.peek().is_some() {
        return None;
    }
    Some(v)
}

fn parse_weight(
    p: &mut Parser,
    params: &[(String, ParamValue)],
    uses_decimal: &mut bool,
    uses_param: &mut bool,
) -> Result<Weight, RuleError> {
    match p.peek().cloned() {
        Some(Token { tok: Tok::Integer(n), .. }) => {
            p.next();
            let numer = parse_rational(&n).ok_or_else(|| p.err_here("invalid integer"))?;
            if matches!(p.peek(), Some(Token { tok: Tok::Slash, .. })) {
                p.next();
                match p.peek().cloned() {
                    Some(Token { tok: Tok::Integer(d), .. }) => {
                        p.next();
                        let denom =
                            parse_rational(&d).ok_or_else(|| p.err_here("invalid integer"))?;
                        if denom.is_zero() {
                            return Err(p.err_here("zero denominator"));
                        }
                        Ok(Weight::from_rational(numer / denom))
                    }
                    _ => Err(p.err_here("expected denominator")),
                }
            } else if matches!(p.peek(), Some(Token { tok: Tok::Minus, .. })) {
                // `1-r`: complement of a parameter
                p.next();
                if !numer.is_one() {
                    return Err(p.err_here("complement weights must be written `1-<param>`"));
                }
                let (name, _, _) = p.ident("parameter name")?;
                let value = params
                    .iter()
                    .find(|(n, _)| n == &name)
                    .ok_or(RuleError::UnknownParam { name: name.clone() })?
                    .1
                    .clone();
                *uses_param = true;
                Ok(Weight {
                    exact: value.exact().map(|q| Rational::one() - q),
                    value: 1.0 - value.value(),
                    form: WeightForm::OneMinusParam(name),
                })
            } else {
                Ok(Weight::from_rational(numer))
            }
        }
        Some(Token { tok: Tok::Decimal(s), .. }) => {
            p.next();
            let q = parse_rational(&s).ok_or_else(|| p.err_here("invalid decimal"))?;
            *uses_decimal = true;
            let value = crate::num::Scalar::from_rational_f64(&q);
            Ok(Weight { exact: Some(q), value, form: WeightForm::Decimal })
        }
        Some(Token { tok: Tok::Ident(name), .. }) => {
            p.next();
            let value = params
                .iter()
                .find(|(n, _)| n == &name)
                .ok_or(RuleError::UnknownParam { name: name.clone() })?
                .1
                .clone();
            *uses_param = true;
            Ok(Weight {
                exact: value.exact(),
                value: value.value(),
                form: WeightForm::Param(name),
            })
        }
        _ => Err(p.err_here("expected weight")),
    }
}

// ---------------------------------------------------------------------------
// Canonical emission
// ---------------------------------------------------------------------------

/// Emit a canonical document; `parse_rules(emit_canonical(s)) == s`.
pub fn emit_canonical(sub: &SymbolicSubstitution) -> String {
    let mut out = String::new();
    out.push_str("alphabet");
    for name in sub.alphabet.names() {
        let _ = write!(out, " {name}");
    }
    out.push_str(";\n");
    for (name, value) in &sub.params {
        let _ = writeln!(out, "param {name} = {};", value.render());
    }
    for (i, image) in sub.images.iter().enumerate() {
        let _ = write!(out, "{} ->", sub.alphabet.name(i));
        for wl in image {
            let name = sub.alphabet.name(wl.letter);
            if wl.weight.is_one() && wl.weight.form == WeightForm::Rational {
                let _ = write!(out, " {name}");
            } else {
                let w = match &wl.weight.form {
                    WeightForm::Rational => render_rational(wl.weight.exact.as_ref().unwrap()),
                    WeightForm::Decimal => render_decimal(wl.weight.exact.as_ref().unwrap()),
                    WeightForm::Param(p) => p.clone(),
                    WeightForm::OneMinusParam(p) => format!("1-{p}"),
                };
                let _ = write!(out, " [{name}:{w}]");
            }
        }
        out.push_str(";\n");
    }
    out
}

// ---------------------------------------------------------------------------
// Symbolic word rewriting
// ---------------------------------------------------------------------------

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WordError {
    #[error("junction mismatch between images of `{left}` and `{right}`: ends [{end_letter}:{end_weight}], starts [{start_letter}:{start_weight}]")]
    JunctionMismatch {
        left: String,
        right: String,
        end_letter: String,
        end_weight: String,
        start_letter: String,
        start_weight: String,
    },
    #[error("word image has a fractional boundary letter and cannot be iterated")]
    BoundaryFragment,
}

/// Image of a word under the substitution. The two ends may carry
/// fractional fragments when the outermost images stick out.
#[derive(Debug, Clone, PartialEq)]
pub struct WordImage {
    pub lead: Option<WeightedLetter>,
    pub letters: Vec<usize>,
    pub trail: Option<WeightedLetter>,
}

/// Apply the substitution to a word of full letters, merging an end-weight
/// `r` with a following start-weight `1 - r` on the same letter into a full
/// letter, and failing on any other junction.
pub fn apply_to_word(
    sub: &SymbolicSubstitution,
    word: &[usize],
    eps: f64,
) -> Result<WordImage, WordError> {
    assert!(!word.is_empty(), "empty word");
    let weights_sum_to_one = |a: &Weight, b: &Weight| -> bool {
        match (&a.exact, &b.exact) {
            (Some(x), Some(y)) => x + y == Rational::one(),
            _ => (a.value + b.value - 1.0).abs() <= eps,
        }
    };
    let mut letters: Vec<usize> = Vec::new();
    let mut lead: Option<WeightedLetter> = None;
    let mut pending: Option<WeightedLetter> = None; // fractional tail of previous image
    for (wi, &w) in word.iter().enumerate() {
        let image = sub.image(w);
        let mut items = image.iter().peekable();
        if wi == 0 {
            if let Some(first) = items.peek() {
                if !first.weight.is_one() {
                    lead = Some((*items.next().unwrap()).clone());
                }
            }
        } else if let Some(prev) = pending.take() {
            let first = items.next().expect("nonempty image");
            if first.weight.is_one()
                || prev.letter != first.letter
                || !weights_sum_to_one(&prev.weight, &first.weight)
            {
                return Err(WordError::JunctionMismatch {
                    left: sub.alphabet.name(word[wi - 1]).to_string(),
                    right: sub.alphabet.name(w).to_string(),
                    end_letter: sub.alphabet.name(prev.letter).to_string(),
                    end_weight: format!("{}", prev.weight.value),
                    start_letter: sub.alphabet.name(first.letter).to_string(),
                    start_weight: format!("{}", first.weight.value),
                });
            }
            letters.push(prev.letter);
        } else if let Some(first) = items.peek() {
            if !first.weight.is_one() {
                let first = (*first).clone();
                return Err(WordError::JunctionMismatch {
                    left: sub.alphabet.name(word[wi - 1]).to_string(),
                    right: sub.alphabet.name(w).to_string(),
                    end_letter: "-".to_string(),
                    end_weight: "1".to_string(),
                    start_letter: sub.alphabet.name(first.letter).to_string(),
                    start_weight: format!("{}", first.weight.value),
                });
            }
        }
        while let Some(item) = items.next() {
            if items.peek().is_none() && !item.weight.is_one() {
                pending = Some(item.clone());
            } else {
                letters.push(item.letter);
            }
        }
    }
    Ok(WordImage { lead, letters, trail: pending })
}

/// Iterate the substitution `n` times on a word of full letters.
pub fn iterate_word(
    sub: &SymbolicSubstitution,
    word: &[usize],
    n: usize,
    eps: f64,
) -> Result<Vec<usize>, WordError> {
    let mut current = word.to_vec();
    for _ in 0..n {
        let image = apply_to_word(sub, &current, eps)?;
        if image.lead.is_some() || image.trail.is_some() {
            return Err(WordError::BoundaryFragment);
        }
        current = image.letters;
    }
    Ok(current)
}

/// Render a word as the concatenation of its letter names.
pub fn word_string(sub: &SymbolicSubstitution, word: &[usize]) -> String {
    word.iter().map(|&i| sub.alphabet.name(i)).collect()
}

/// Parse a word of concatenated single-character letters, or of
/// whitespace-separated names.
pub fn parse_word(sub: &SymbolicSubstitution, text: &str) -> Option<Vec<usize>> {
    if text.contains(char::is_whitespace) {
        text.split_whitespace()
            .map(|name| sub.alphabet.index_of(name))
            .collect()
    } else {
        text.chars()
            .map(|c| sub.alphabet.index_of(&c.to_string()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    pub const EX11: &str =
        "alphabet a b c; a -> [a:1/2] b a; b -> c [a:1/2]; c -> b [a:1/2];";

    #[test]
    fn parses_overlapping_example() {
        let sub = parse_rules(EX11).unwrap();
        assert_eq!(sub.kappa(), 3);
        assert_eq!(sub.mode, Mode::Exact);
        assert_eq!(sub.image(0).len(), 3);
        assert_eq!(sub.image(0)[0].weight.exact, Some(rat(1, 2)));
        assert!(sub.image(0)[1].weight.is_one());
    }

    #[test]
    fn identity_rule_is_valid() {
        let sub = parse_rules("alphabet a; a -> [a:1];").unwrap();
        assert_eq!(sub.image(0).len(), 1);
        assert!(sub.image(0)[0].weight.is_one());
    }

    #[test]
    fn interior_weight_rejected() {
        let err = parse_rules("alphabet a b; a -> a [b:1/2] a; b -> a;").unwrap_err();
        assert!(matches!(err, RuleError::InteriorWeightNotOne { position: 2, .. }));
    }

    #[test]
    fn singleton_weight_rejected() {
        let err = parse_rules("alphabet a; a -> [a:1/2];").unwrap_err();
        assert!(matches!(err, RuleError::SingletonWeightNotOne { .. }));
    }

    #[test]
    fn weight_out_of_range_rejected() {
        let err = parse_rules("alphabet a b; a -> [a:3/2] b; b -> a;").unwrap_err();
        assert!(matches!(err, RuleError::WeightOutOfRange { .. }));
        let err = parse_rules("alphabet a b; a -> [a:0] b; b -> a;").unwrap_err();
        assert!(matches!(err, RuleError::WeightOutOfRange { .. }));
    }

    #[test]
    fn undeclared_letter_rejected() {
        let err = parse_rules("alphabet a; a -> a b;").unwrap_err();
        assert!(matches!(err, RuleError::UndeclaredLetter { .. }));
    }

    #[test]
    fn missing_rule_rejected() {
        let err = parse_rules("alphabet a b; a -> a b;").unwrap_err();
        assert!(matches!(err, RuleError::MissingRule { .. }));
    }

    #[test]
    fn params_force_float_mode() {
        let text = "alphabet a b c d;
            param r = sqrt(2)/2;
            a -> [a:r] b c a; b -> b c; c -> d [a:1-r]; d -> [a:r] b c [a:1-r];";
        let sub = parse_rules(text).unwrap();
        assert_eq!(sub.mode, Mode::Float);
        let r = 0.5_f64 * 2.0_f64.sqrt();
        assert!((sub.image(0)[0].weight.value - r).abs() < 1e-15);
        assert!((sub.image(2)[1].weight.value - (1.0 - r)).abs() < 1e-15);
        assert!(sub.image(2)[1].weight.exact.is_none());
    }

    #[test]
    fn rational_param_keeps_exact_values() {
        let text = "alphabet a b; param r = 1/3; a -> [a:r] b a; b -> b [a:1-r];";
        let sub = parse_rules(text).unwrap();
        assert_eq!(sub.mode, Mode::Float);
        assert!(sub.has_exact_weights());
        assert_eq!(sub.image(1)[1].weight.exact, Some(rat(2, 3)));
    }

    #[test]
    fn override_replaces_param() {
        let text = "alphabet a b; param r = 1/3; a -> [a:r] b a; b -> b [a:1-r];";
        let sub = parse_rules_with_overrides(text, &[("r".into(), "1/4".into())]).unwrap();
        assert_eq!(sub.image(0)[0].weight.exact, Some(rat(1, 4)));
        let err = parse_rules_with_overrides(text, &[("z".into(), "1/4".into())]);
        assert!(matches!(err, Err(RuleError::UnknownParam { .. })));
    }

    #[test]
    fn decimal_weight_forces_float() {
        let sub = parse_rules("alphabet a b; a -> [a:0.5] b a; b -> b [a:0.5];").unwrap();
        assert_eq!(sub.mode, Mode::Float);
        assert_eq!(sub.image(0)[0].weight.exact, Some(rat(1, 2)));
    }

    #[test]
    fn roundtrip_canonical() {
        for text in [
            EX11,
            "alphabet a; a -> [a:1];",
            "alphabet a b; param r = 1/3; a -> [a:r] b a; b -> b [a:1-r];",
            "alphabet a b c d; param r = sqrt(2)/2; a -> [a:r] b c a; b -> b c; c -> d [a:1-r]; d -> [a:r] b c [a:1-r];",
            "alphabet a b; a -> [a:0.25] b a; b -> b [a:0.75];",
        ] {
            let sub = parse_rules(text).unwrap();
            let emitted = emit_canonical(&sub);
            let reparsed = parse_rules(&emitted).unwrap();
            assert_eq!(sub, reparsed, "roundtrip failed for: {emitted}");
        }
    }

    #[test]
    fn identity_emits_weight_elided() {
        let sub = parse_rules("alphabet a; a -> [a:1];").unwrap();
        let text = emit_canonical(&sub);
        assert!(text.contains("a -> a;"), "{text}");
    }

    #[test]
    fn comments_and_whitespace_ignored() {
        let text = "# comment line\nalphabet a b c;  # trailing\n a ->\n [a:1/2]\tb a; b -> c [a:1/2]; c -> b [a:1/2];";
        assert!(parse_rules(text).is_ok());
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_rules("alphabet a b;\na -> [a 1/2] b; b -> a;").unwrap_err();
        match err {
            RuleError::Syntax { line, col, .. } => {
                assert_eq!(line, 2);
                assert!(col >= 7);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn word_iteration_matches_hand_computation() {
        let sub = parse_rules(EX11).unwrap();
        let ba = parse_word(&sub, "ba").unwrap();
        let w1 = iterate_word(&sub, &ba, 1, 1e-9).unwrap();
        assert_eq!(word_string(&sub, &w1), "caba");
        let w2 = iterate_word(&sub, &ba, 2, 1e-9).unwrap();
        assert_eq!(word_string(&sub, &w2), "babacaba");
        let w3 = iterate_word(&sub, &ba, 3, 1e-9).unwrap();
        assert_eq!(word_string(&sub, &w3), "cabacabababacaba");
    }

    #[test]
    fn word_junction_mismatch_detected() {
        // corrupt sigma(b) to end with [a:1/3]: 1/3 + 1/2 != 1
        let sub = parse_rules(
            "alphabet a b c; a -> [a:1/2] b a; b -> c [a:1/3]; c -> b [a:1/2];",
        )
        .unwrap();
        let ba = parse_word(&sub, "ba").unwrap();
        assert!(matches!(
            apply_to_word(&sub, &ba, 1e-9),
            Err(WordError::JunctionMismatch { .. })
        ));
    }

    #[test]
    fn word_with_boundary_fragment_cannot_iterate() {
        let sub = parse_rules(EX11).unwrap();
        // the image of `a` starts with a half-weighted letter
        let a = parse_word(&sub, "a").unwrap();
        let img = apply_to_word(&sub, &a, 1e-9).unwrap();
        assert!(img.lead.is_some());
        assert!(img.trail.is_none());
        assert_eq!(word_string(&sub, &img.letters), "ba");
        assert!(matches!(
            iterate_word(&sub, &a, 2, 1e-9),
            Err(WordError::BoundaryFragment)
        ));
    }
}
