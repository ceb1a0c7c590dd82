//! Surface syntax for grammar files.
//!
//! ```text
//! file      := "signature" typedecl+ section*
//! typedecl  := IDENT "sub" "[" IDENT ("," IDENT)* "]" "."
//! section   := "start" avm "." | "rules" rule* | "lexicon" entry*
//! rule      := IDENT ":" body "=>" avm "."      body := avm ("," avm)* | ε
//! entry     := IDENT "->" avm "."
//! avm       := term ("&" term)*
//! term      := IDENT | "#" NAT | "#" NAT "(" avm ")" | FIDENT ":" term | "(" avm ")"
//! ```
//!
//! Types and names are lower-case identifiers, features upper-case;
//! `%` starts a line comment. Tags `#n` scope over one clause.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("syntax error at {line}:{col}: expected {expected}, found {found}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),   // all lower-case/digits: type names, clause names
    Fident(String),  // contains upper-case: feature names
    Nat(u32),
    Sub,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Amp,
    Hash,
    Arrow,   // ->
    Implies, // =>
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Fident(s) => write!(f, "`{s}`"),
            Tok::Nat(n) => write!(f, "`{n}`"),
            Tok::Sub => write!(f, "`sub`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::Hash => write!(f, "`#`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Implies => write!(f, "`=>`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = src.chars().peekable();
    loop {
        let (l, c) = (line, col);
        let ch = match chars.next() {
            Some(ch) => ch,
            None => {
                out.push(Spanned { tok: Tok::Eof, line, col });
                return Ok(out);
            }
        };
        let advance = |ch: char, line: &mut usize, col: &mut usize| {
            if ch == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        };
        match ch {
            '%' => {
                advance(ch, &mut line, &mut col);
                while let Some(&nc) = chars.peek() {
                    chars.next();
                    advance(nc, &mut line, &mut col);
                    if nc == '\n' {
                        break;
                    }
                }
            }
            _ if ch.is_whitespace() => advance(ch, &mut line, &mut col),
            '[' | ']' | '(' | ')' | ',' | '.' | ':' | '&' | '#' => {
                advance(ch, &mut line, &mut col);
                out.push(Spanned {
                    tok: match ch {
                        '[' => Tok::LBracket,
                        ']' => Tok::RBracket,
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        ',' => Tok::Comma,
                        '.' => Tok::Dot,
                        ':' => Tok::Colon,
                        '&' => Tok::Amp,
                        _ => Tok::Hash,
                    },
                    line: l,
                    col: c,
                });
            }
            '-' | '=' => {
                advance(ch, &mut line, &mut col);
                match chars.peek() {
                    Some('>') => {
                        chars.next();
                        advance('>', &mut line, &mut col);
                        out.push(Spanned {
                            tok: if ch == '-' { Tok::Arrow } else { Tok::Implies },
                            line: l,
                            col: c,
                        });
                    }
                    other => {
                        return Err(SyntaxError {
                            line: l,
                            col: c,
                            expected: "`>`".to_string(),
                            found: other.map_or("end of input".to_string(), |o| format!("`{o}`")),
                        })
                    }
                }
            }
            _ if ch.is_ascii_alphanumeric() || ch == '_' => {
                advance(ch, &mut line, &mut col);
                let mut word = String::new();
                word.push(ch);
                while let Some(&nc) = chars.peek() {
                    if nc.is_ascii_alphanumeric() || nc == '_' {
                        chars.next();
                        advance(nc, &mut line, &mut col);
                        word.push(nc);
                    } else {
                        break;
                    }
                }
                let tok = if word == "sub" {
                    Tok::Sub
                } else if word.chars().any(|w| w.is_ascii_uppercase()) {
                    if word.chars().any(|w| w.is_ascii_lowercase()) {
                        return Err(SyntaxError {
                            line: l,
                            col: c,
                            expected: "an all-lower-case type name or all-upper-case feature name"
                                .to_string(),
                            found: format!("`{word}`"),
                        });
                    }
                    Tok::Fident(word)
                } else if word.chars().all(|w| w.is_ascii_digit()) {
                    Tok::Nat(word.parse().map_err(|_| SyntaxError {
                        line: l,
                        col: c,
                        expected: "a small number".to_string(),
                        found: format!("`{word}`"),
                    })?)
                } else {
                    Tok::Ident(word)
                };
                out.push(Spanned { tok, line: l, col: c });
            }
            other => {
                return Err(SyntaxError {
                    line: l,
                    col: c,
                    expected: "a token".to_string(),
                    found: format!("`{other}`"),
                })
            }
        }
    }
}

/// One conjunct of an AVM.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Type(String),
    Tag(u32),
    TagBound(u32, Avm),
    Feature(String, Box<Term>),
    Group(Avm),
}

/// A conjunction of terms describing one node.
pub type Avm = Vec<Term>;

#[derive(Clone, Debug)]
pub struct RuleDecl {
    pub name: String,
    pub body: Vec<Avm>,
    pub head: Avm,
    pub line: usize,
}

#[derive(Clone, Debug)]
pub struct File {
    pub typedecls: Vec<(String, Vec<String>)>,
    pub start: Option<Avm>,
    pub rules: Vec<RuleDecl>,
    pub lexicon: Vec<(String, Avm)>,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> SyntaxError {
        let s = &self.toks[self.pos];
        SyntaxError {
            line: s.line,
            col: s.col,
            expected: expected.to_string(),
            found: s.tok.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            _ => Err(self.err(what)),
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if let Tok::Ident(s) = self.peek() {
            if s == kw {
                self.next();
                return true;
            }
        }
        false
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(Term::Type(s))
            }
            Tok::Hash => {
                self.next();
                let n = match self.peek().clone() {
                    Tok::Nat(n) => {
                        self.next();
                        n
                    }
                    _ => return Err(self.err("a tag number")),
                };
                if *self.peek() == Tok::LParen {
                    self.next();
                    let inner = self.avm()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Term::TagBound(n, inner))
                } else {
                    Ok(Term::Tag(n))
                }
            }
            Tok::Fident(f) => {
                self.next();
                self.expect(Tok::Colon, "`:` after feature name")?;
                let t = self.term()?;
                Ok(Term::Feature(f, Box::new(t)))
            }
            Tok::LParen => {
                self.next();
                let inner = self.avm()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Term::Group(inner))
            }
            _ => Err(self.err("a type, tag, feature, or `(`")),
        }
    }

    fn avm(&mut self) -> Result<Avm, SyntaxError> {
        let mut terms = vec![self.term()?];
        while *self.peek() == Tok::Amp {
            self.next();
            terms.push(self.term()?);
        }
        Ok(terms)
    }

    fn typedecl(&mut self) -> Result<(String, Vec<String>), SyntaxError> {
        let lhs = self.ident("a type name")?;
        self.expect(Tok::Sub, "`sub`")?;
        self.expect(Tok::LBracket, "`[`")?;
        let mut subs = vec![self.ident("a type name")?];
        while *self.peek() == Tok::Comma {
            self.next();
            subs.push(self.ident("a type name")?);
        }
        self.expect(Tok::RBracket, "`]`")?;
        self.expect(Tok::Dot, "`.`")?;
        Ok((lhs, subs))
    }

    fn file(&mut self) -> Result<File, SyntaxError> {
        if !self.keyword("signature") {
            return Err(self.err("`signature`"));
        }
        let mut typedecls = Vec::new();
        // typedecl+: IDENT followed by `sub`.
        loop {
            match (self.peek(), self.peek2()) {
                (Tok::Ident(_), Tok::Sub) => typedecls.push(self.typedecl()?),
                _ => break,
            }
        }
        if typedecls.is_empty() {
            return Err(self.err("at least one type declaration"));
        }
        let mut start = None;
        let mut rules = Vec::new();
        let mut lexicon = Vec::new();
        loop {
            if self.keyword("start") {
                let a = self.avm()?;
                self.expect(Tok::Dot, "`.`")?;
                start = Some(a);
            } else if self.keyword("rules") {
                // rule*: IDENT ":" ...
                while matches!((self.peek(), self.peek2()), (Tok::Ident(_), Tok::Colon)) {
                    let line = self.toks[self.pos].line;
                    let name = self.ident("a rule name")?;
                    self.expect(Tok::Colon, "`:`")?;
                    let mut body = Vec::new();
                    if *self.peek() != Tok::Implies {
                        body.push(self.avm()?);
                        while *self.peek() == Tok::Comma {
                            self.next();
                            body.push(self.avm()?);
                        }
                    }
                    self.expect(Tok::Implies, "`=>`")?;
                    let head = self.avm()?;
                    self.expect(Tok::Dot, "`.`")?;
                    rules.push(RuleDecl { name, body, head, line });
                }
            } else if self.keyword("lexicon") {
                while matches!((self.peek(), self.peek2()), (Tok::Ident(_), Tok::Arrow)) {
                    let word = self.ident("a word")?;
                    self.expect(Tok::Arrow, "`->`")?;
                    let a = self.avm()?;
                    self.expect(Tok::Dot, "`.`")?;
                    lexicon.push((word, a));
                }
            } else if *self.peek() == Tok::Eof {
                break;
            } else {
                return Err(self.err("`start`, `rules`, `lexicon`, or end of input"));
            }
        }
        Ok(File {
            typedecls,
            start,
            rules,
            lexicon,
        })
    }
}

/// Parses a whole grammar file.
pub fn parse_file(src: &str) -> Result<File, SyntaxError> {
    let toks = lex(src)?;
    Parser { toks, pos: 0 }.file()
}

/// Parses a comma-separated AVM sequence (one clause's worth of tags).
pub fn parse_avm_seq(src: &str) -> Result<Vec<Avm>, SyntaxError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let mut avms = vec![p.avm()?];
    while *p.peek() == Tok::Comma {
        p.next();
        avms.push(p.avm()?);
    }
    p.expect(Tok::Eof, "end of input")?;
    Ok(avms)
}
