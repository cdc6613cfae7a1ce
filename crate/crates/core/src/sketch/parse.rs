use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::{Hint, Operand, SketchRel, SketchSpec};
use crate::algebra::{parse_number, AggFunc, CmpOp, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: expected ", self.line, self.column)?;
        for (i, e) in self.expected.iter().enumerate() {
            if i > 0 {
                f.write_str(if i + 1 == self.expected.len() { " or " } else { ", " })?;
            }
            f.write_str(e)?;
        }
        write!(f, ", found {}", self.found)
    }
}

impl core::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Select,
    From,
    Where,
    Join,
    On,
    And,
    Or,
    Not,
    By,
    Star,
    Comma,
    LParen,
    RParen,
    ColHole(Hint),
    TableHole(Hint),
    Op(CmpOp),
    Agg(AggFunc),
    Literal(Value),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Select => "`SELECT`".into(),
            Tok::From => "`FROM`".into(),
            Tok::Where => "`WHERE`".into(),
            Tok::Join => "`JOIN`".into(),
            Tok::On => "`ON`".into(),
            Tok::And => "`AND`".into(),
            Tok::Or => "`OR`".into(),
            Tok::Not => "`NOT`".into(),
            Tok::By => "`BY`".into(),
            Tok::Star => "`*`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::ColHole(_) => "column hole".into(),
            Tok::TableHole(_) => "table hole".into(),
            Tok::Op(op) => alloc::format!("`{}`", op),
            Tok::Agg(f) => alloc::format!("`{}`", f),
            Tok::Literal(v) => alloc::format!("literal {}", v),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, column: usize, expected: &str, found: String) -> ParseError {
        ParseError {
            line,
            column,
            expected: vec![expected.to_string()],
            found,
        }
    }

    fn hint(&mut self) -> Result<Hint, ParseError> {
        if self.chars.peek() != Some(&'[') {
            return Ok(Hint::none());
        }
        let (line, column) = (self.line, self.column);
        self.bump();
        let mut text = String::new();
        loop {
            match self.bump() {
                Some('\\') => match self.bump() {
                    Some(c) => text.push(c),
                    None => break,
                },
                Some(']') => return Ok(Hint::new(&text)),
                Some(c) => text.push(c),
                None => break,
            }
        }
        Err(self.error(line, column, "`]` closing the hint", "end of input".into()))
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            while self.chars.peek().is_some_and(|c| c.is_whitespace()) {
                self.bump();
            }
            let (line, column) = (self.line, self.column);
            let Some(&c) = self.chars.peek() else {
                out.push(Spanned {
                    tok: Tok::Eof,
                    line,
                    column,
                });
                return Ok(out);
            };
            let tok = match c {
                '?' => {
                    self.bump();
                    if self.chars.peek() == Some(&'?') {
                        self.bump();
                        Tok::TableHole(self.hint()?)
                    } else {
                        Tok::ColHole(self.hint()?)
                    }
                }
                '*' => {
                    self.bump();
                    Tok::Star
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                '=' => {
                    self.bump();
                    Tok::Op(CmpOp::Eq)
                }
                '<' | '>' => {
                    self.bump();
                    let eq = self.chars.peek() == Some(&'=');
                    if eq {
                        self.bump();
                    }
                    Tok::Op(match (c, eq) {
                        ('<', false) => CmpOp::Lt,
                        ('<', true) => CmpOp::Le,
                        ('>', false) => CmpOp::Gt,
                        _ => CmpOp::Ge,
                    })
                }
                '"' => {
                    self.bump();
                    let mut text = String::new();
                    loop {
                        match self.bump() {
                            Some('"') if self.chars.peek() == Some(&'"') => {
                                self.bump();
                                text.push('"');
                            }
                            Some('"') => break,
                            Some(ch) => text.push(ch),
                            None => return Err(self.error(line, column, "closing `\"`", "end of input".into())),
                        }
                    }
                    Tok::Literal(Value::Str(text))
                }
                c if c.is_ascii_digit() || c == '-' || c == '.' => {
                    let mut text = String::new();
                    while let Some(&d) = self.chars.peek() {
                        let exponent_sign = (d == '-' || d == '+') && text.ends_with(['e', 'E']);
                        if d.is_ascii_alphanumeric() || d == '.' || (d == '-' && text.is_empty()) || exponent_sign {
                            text.push(d);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    match parse_number(&text) {
                        Some(n) => Tok::Literal(Value::number(n)),
                        None => return Err(self.error(line, column, "number", alloc::format!("`{}`", text))),
                    }
                }
                c if c.is_alphabetic() || c == '_' => {
                    let mut word = String::new();
                    while let Some(&d) = self.chars.peek() {
                        if d.is_alphanumeric() || d == '_' {
                            word.push(d);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    match word.to_ascii_uppercase().as_str() {
                        "SELECT" => Tok::Select,
                        "FROM" => Tok::From,
                        "WHERE" => Tok::Where,
                        "JOIN" => Tok::Join,
                        "ON" => Tok::On,
                        "AND" => Tok::And,
                        "OR" => Tok::Or,
                        "NOT" => Tok::Not,
                        "BY" => Tok::By,
                        "TRUE" => Tok::Literal(Value::Bool(true)),
                        "FALSE" => Tok::Literal(Value::Bool(false)),
                        _ => match AggFunc::parse(&word) {
                            Some(f) => Tok::Agg(f),
                            None => {
                                return Err(self.error(
                                    line,
                                    column,
                                    "keyword, hole or literal",
                                    alloc::format!("`{}`", word),
                                ))
                            }
                        },
                    }
                }
                other => {
                    return Err(self.error(line, column, "keyword, hole or literal", alloc::format!("`{}`", other)))
                }
            };
            out.push(Spanned { tok, line, column });
        }
    }
}

/// Parses the SQL-like sketch syntax:
///
/// ```text
/// SELECT <items> FROM <rel> [WHERE <pred>]
/// SELECT * FROM <rel> WHERE <pred>
/// <rel>            -- a bare relation, e.g. `??[papers] JOIN ?? ON ? = ?`
/// ```
///
/// Holes are `?`, `?[hint]`, `??` and `??[hint]`; items are holes, `f(?h)` or
/// `f(?h) BY ?k`; joins are `<rel> JOIN <rel> ON ?h = ?h`.
pub fn parse_sketch(text: &str) -> Result<SketchRel, ParseError> {
    let tokens = Lexer {
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
    }
    .tokens()?;
    let mut p = Parser { tokens, pos: 0 };
    let rel = p.top()?;
    p.expect(Tok::Eof, "end of input")?;
    Ok(rel)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn advance(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        let here = &self.tokens[self.pos];
        Err(ParseError {
            line: here.line,
            column: here.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: here.tok.describe(),
        })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.fail(&[what])
        }
    }

    fn top(&mut self) -> Result<SketchRel, ParseError> {
        if self.peek() == &Tok::Select {
            self.query()
        } else {
            self.relation()
        }
    }

    fn query(&mut self) -> Result<SketchRel, ParseError> {
        self.expect(Tok::Select, "`SELECT`")?;
        let spec = if self.eat(&Tok::Star) {
            None
        } else {
            Some(self.items()?)
        };
        self.expect(Tok::From, "`FROM`")?;
        let mut rel = self.relation()?;
        if self.eat(&Tok::Where) {
            let pred = self.predicate()?;
            rel = SketchRel::select(pred, rel);
        } else if spec.is_none() {
            return self.fail(&["`WHERE`"]);
        }
        Ok(match spec {
            Some(spec) => SketchRel::project(spec, rel),
            None => rel,
        })
    }

    fn relation(&mut self) -> Result<SketchRel, ParseError> {
        let mut rel = self.primary()?;
        while self.eat(&Tok::Join) {
            let right = self.primary()?;
            self.expect(Tok::On, "`ON`")?;
            let left_col = self.col_hole()?;
            self.expect(Tok::Op(CmpOp::Eq), "`=`")?;
            let right_col = self.col_hole()?;
            rel = SketchRel::join(rel, left_col, right_col, right);
        }
        Ok(rel)
    }

    fn primary(&mut self) -> Result<SketchRel, ParseError> {
        match self.peek().clone() {
            Tok::TableHole(h) => {
                self.advance();
                Ok(SketchRel::Table(h))
            }
            Tok::LParen => {
                self.advance();
                let rel = self.top()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(rel)
            }
            _ => self.fail(&["table hole", "`(`"]),
        }
    }

    fn col_hole(&mut self) -> Result<Hint, ParseError> {
        match self.peek().clone() {
            Tok::ColHole(h) => {
                self.advance();
                Ok(h)
            }
            _ => self.fail(&["column hole"]),
        }
    }

    fn items(&mut self) -> Result<SketchSpec, ParseError> {
        let mut spec = self.item()?;
        while self.eat(&Tok::Comma) {
            let next = self.item()?;
            spec = SketchSpec::List(Box::new(spec), Box::new(next));
        }
        Ok(spec)
    }

    fn item(&mut self) -> Result<SketchSpec, ParseError> {
        match self.peek().clone() {
            Tok::ColHole(h) => {
                self.advance();
                Ok(SketchSpec::Col(h))
            }
            Tok::Agg(f) => {
                self.advance();
                self.expect(Tok::LParen, "`(`")?;
                let target = self.col_hole()?;
                self.expect(Tok::RParen, "`)`")?;
                if self.eat(&Tok::By) {
                    let key = self.col_hole()?;
                    Ok(SketchSpec::Group(f, target, key))
                } else {
                    Ok(SketchSpec::Agg(f, target))
                }
            }
            Tok::LParen => {
                self.advance();
                let inner = self.items()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => self.fail(&["column hole", "aggregate", "`*`"]),
        }
    }

    fn predicate(&mut self) -> Result<SketchSpec, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Tok::Or) {
            let rhs = self.conjunction()?;
            lhs = SketchSpec::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<SketchSpec, ParseError> {
        let mut lhs = self.negation()?;
        while self.eat(&Tok::And) {
            let rhs = self.negation()?;
            lhs = SketchSpec::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> Result<SketchSpec, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.advance();
                Ok(SketchSpec::not(self.negation()?))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.predicate()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::ColHole(_) => self.atom(),
            _ => self.fail(&["column hole", "`NOT`", "`(`"]),
        }
    }

    fn atom(&mut self) -> Result<SketchSpec, ParseError> {
        let hint = self.col_hole()?;
        let op = match self.peek() {
            Tok::Op(op) => *op,
            _ => return self.fail(&["comparison operator"]),
        };
        self.advance();
        let operand = match self.peek().clone() {
            Tok::ColHole(h) => {
                self.advance();
                Operand::Col(h)
            }
            Tok::Literal(v) => {
                self.advance();
                Operand::Value(v)
            }
            Tok::LParen => {
                self.advance();
                let rel = self.top()?;
                self.expect(Tok::RParen, "`)`")?;
                Operand::Rel(Box::new(rel))
            }
            _ => return self.fail(&["column hole", "literal", "subquery"]),
        };
        Ok(SketchSpec::Atom(hint, op, operand))
    }
}
