//! Tokenizer shared by the model, rule and sequence languages.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Location, SyntaxError};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Colon,
    ColonColon,
    Comma,
    Dot,
    Lt,
    Gt,
    Le,
    Ge,
    EqEq,
    NotEq,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Bang,
    AndAnd,
    OrOr,
    Amp,
    Pipe,
    /// `;>`
    ThenRight,
    /// `->`
    Arrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "identifier `{name}`"),
            Tok::Int(v) => return write!(f, "integer `{v}`"),
            Tok::Float(v) => return write!(f, "float `{v}`"),
            Tok::Str(_) => "string literal",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Semi => "`;`",
            Tok::Colon => "`:`",
            Tok::ColonColon => "`::`",
            Tok::Comma => "`,`",
            Tok::Dot => "`.`",
            Tok::Lt => "`<`",
            Tok::Gt => "`>`",
            Tok::Le => "`<=`",
            Tok::Ge => "`>=`",
            Tok::EqEq => "`==`",
            Tok::NotEq => "`!=`",
            Tok::Assign => "`=`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Percent => "`%`",
            Tok::Bang => "`!`",
            Tok::AndAnd => "`&&`",
            Tok::OrOr => "`||`",
            Tok::Amp => "`&`",
            Tok::Pipe => "`|`",
            Tok::ThenRight => "`;>`",
            Tok::Arrow => "`->`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub loc: Location,
    /// True when whitespace or a comment separates this token from the previous one.
    pub spaced: bool,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut lx = Lexer {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        let spaced = lx.skip_trivia()?;
        let loc = lx.loc();
        let Some(c) = lx.peek(0) else {
            out.push(Token {
                tok: Tok::Eof,
                loc,
                spaced,
            });
            return Ok(out);
        };
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(c) = lx.peek(0) {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    lx.bump();
                } else {
                    break;
                }
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            lx.number()?
        } else if c == '"' {
            lx.string()?
        } else {
            lx.punct()?
        };
        out.push(Token { tok, loc, spaced });
    }
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
}

impl Lexer {
    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn loc(&self) -> Location {
        Location {
            line: self.line,
            col: self.col,
        }
    }

    fn err(&self, loc: Location, msg: impl Into<String>) -> SyntaxError {
        SyntaxError {
            loc,
            message: msg.into(),
        }
    }

    fn skip_trivia(&mut self) -> Result<bool, SyntaxError> {
        let start = self.pos;
        loop {
            match (self.peek(0), self.peek(1)) {
                (Some(c), _) if c.is_whitespace() => {
                    self.bump();
                }
                (Some('/'), Some('/')) => {
                    while let Some(c) = self.peek(0) {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                (Some('/'), Some('*')) => {
                    let loc = self.loc();
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(0), self.peek(1)) {
                            (Some('*'), Some('/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => return Err(self.err(loc, "unterminated block comment")),
                        }
                    }
                }
                _ => return Ok(self.pos != start),
            }
        }
    }

    fn number(&mut self) -> Result<Tok, SyntaxError> {
        let loc = self.loc();
        let mut s = String::new();
        while let Some(c) = self.peek(0).filter(char::is_ascii_digit) {
            s.push(c);
            self.bump();
        }
        let mut is_float = false;
        if self.peek(0) == Some('.') && self.peek(1).is_some_and(|c| c.is_ascii_digit()) {
            is_float = true;
            s.push('.');
            self.bump();
            while let Some(c) = self.peek(0).filter(char::is_ascii_digit) {
                s.push(c);
                self.bump();
            }
        }
        if matches!(self.peek(0), Some('e' | 'E')) {
            let sign = matches!(self.peek(1), Some('+' | '-'));
            let digit_at = if sign { 2 } else { 1 };
            if self.peek(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                is_float = true;
                s.push('e');
                self.bump();
                if sign {
                    s.push(self.bump().unwrap_or('+'));
                }
                while let Some(c) = self.peek(0).filter(char::is_ascii_digit) {
                    s.push(c);
                    self.bump();
                }
            }
        }
        if is_float {
            s.parse::<f64>()
                .map(Tok::Float)
                .map_err(|_| self.err(loc, "malformed float literal"))
        } else {
            s.parse::<i64>()
                .map(Tok::Int)
                .map_err(|_| self.err(loc, "integer literal out of range"))
        }
    }

    fn string(&mut self) -> Result<Tok, SyntaxError> {
        let loc = self.loc();
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err(loc, "unterminated string literal")),
                Some('"') => return Ok(Tok::Str(s)),
                Some('\\') => {
                    let esc_loc = self.loc();
                    match self.bump() {
                        Some('"') => s.push('"'),
                        Some('\\') => s.push('\\'),
                        Some('n') => s.push('\n'),
                        Some('t') => s.push('\t'),
                        _ => return Err(self.err(esc_loc, "unknown escape sequence")),
                    }
                }
                Some(c) => s.push(c),
            }
        }
    }

    fn punct(&mut self) -> Result<Tok, SyntaxError> {
        let loc = self.loc();
        let c = self.peek(0).unwrap_or('\0');
        let next = self.peek(1);
        let (tok, len) = match (c, next) {
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (';', Some('>')) => (Tok::ThenRight, 2),
            (';', _) => (Tok::Semi, 1),
            (':', Some(':')) => (Tok::ColonColon, 2),
            (':', _) => (Tok::Colon, 1),
            (',', _) => (Tok::Comma, 1),
            ('.', _) => (Tok::Dot, 1),
            ('<', Some('=')) => (Tok::Le, 2),
            ('<', _) => (Tok::Lt, 1),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('>', _) => (Tok::Gt, 1),
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('=', _) => (Tok::Assign, 1),
            ('!', Some('=')) => (Tok::NotEq, 2),
            ('!', _) => (Tok::Bang, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('%', _) => (Tok::Percent, 1),
            ('&', Some('&')) => (Tok::AndAnd, 2),
            ('&', _) => (Tok::Amp, 1),
            ('|', Some('|')) => (Tok::OrOr, 2),
            ('|', _) => (Tok::Pipe, 1),
            _ => return Err(self.err(loc, alloc::format!("unexpected character `{c}`"))),
        };
        for _ in 0..len {
            self.bump();
        }
        Ok(tok)
    }
}

/// Cursor over a token vector with the usual recursive-descent helpers.
pub(crate) struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Self {
        Cursor { toks, pos: 0 }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos.min(self.toks.len() - 1)].tok
    }

    pub fn peek_at(&self, ahead: usize) -> &Tok {
        &self.toks[(self.pos + ahead).min(self.toks.len() - 1)].tok
    }


    pub fn loc(&self) -> Location {
        self.toks[self.pos.min(self.toks.len() - 1)].loc
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    pub fn reset(&mut self, pos: usize) {
        self.pos = pos;
    }

    pub fn next(&mut self) -> Tok {
        let t = self.peek().clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    pub fn at(&self, tok: &Tok) -> bool {
        self.peek() == tok
    }

    pub fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError {
            loc: self.loc(),
            message: msg.into(),
        }
    }

    pub fn unexpected(&self, wanted: &str) -> SyntaxError {
        self.error(alloc::format!("expected {wanted}, found {}", self.peek()))
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<(), SyntaxError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&alloc::format!("{tok}")))
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&alloc::format!("`{kw}`")))
        }
    }

    pub fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn edge_arrows_split_into_minus_and_arrow() {
        assert_eq!(
            toks("x -e:t-> y"),
            [
                Tok::Ident("x".into()),
                Tok::Minus,
                Tok::Ident("e".into()),
                Tok::Colon,
                Tok::Ident("t".into()),
                Tok::Arrow,
                Tok::Ident("y".into()),
                Tok::Eof
            ]
        );
        assert_eq!(toks("-->"), [Tok::Minus, Tok::Arrow, Tok::Eof]);
        assert_eq!(toks("<x>->"), [Tok::Lt, Tok::Ident("x".into()), Tok::Gt, Tok::Arrow, Tok::Eof]);
    }

    #[test]
    fn string_escapes() {
        assert_eq!(toks(r#""a\"b\\c\n\t""#)[0], Tok::Str("a\"b\\c\n\t".into()));
        assert!(tokenize(r#""\q""#).is_err());
        assert!(tokenize("\"open").is_err());
    }

    #[test]
    fn numbers_and_comments() {
        assert_eq!(
            toks("1 2.5 3e2 /* c */ 4 // tail"),
            [Tok::Int(1), Tok::Float(2.5), Tok::Float(300.0), Tok::Int(4), Tok::Eof]
        );
        assert_eq!(toks("a.b"), [Tok::Ident("a".into()), Tok::Dot, Tok::Ident("b".into()), Tok::Eof]);
    }

    #[test]
    fn locations_track_lines() {
        let t = tokenize("a\n  b").unwrap();
        assert_eq!(t[1].loc, Location { line: 2, col: 3 });
        let err = tokenize("a\n $").unwrap_err();
        assert_eq!(err.loc, Location { line: 2, col: 2 });
    }
}
