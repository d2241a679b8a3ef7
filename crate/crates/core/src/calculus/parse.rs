//! Text syntax for process terms.
//!
//! ```text
//! proc := "0" | ident "." proc | "<" ident ">" proc
//!       | "nu" "(" ident ")" proc | proc "||" proc
//!       | "(" proc ")" | "[" proc "]"
//! ```
//!
//! `||` is left-associative and binds loosest; `nu(B) P` extends as far to
//! the right as possible. `nu(A, B) P` abbreviates `nu(A) nu(B) P` and
//! `<B>.P` is accepted for `<B> P`. Comments run from `#` to end of line.

use super::term::{ActionLabel, BarrierName, ProcessTerm};
use super::CalculusError;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Zero,
    Dot,
    Lt,
    Gt,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Bar2,
    Comma,
    Nu,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Zero => "`0`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::Bar2 => "`||`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Nu => "`nu`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_trivia(&mut self) {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() {
            match bytes[self.pos] {
                b'#' => {
                    while self.pos < bytes.len() && bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn next(&mut self) -> Result<(usize, Tok), CalculusError> {
        self.skip_trivia();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((start, Tok::Eof));
        };
        let single = |t: Tok| (start, t);
        let tok = match c {
            b'.' => single(Tok::Dot),
            b'<' => single(Tok::Lt),
            b'>' => single(Tok::Gt),
            b'(' => single(Tok::LParen),
            b')' => single(Tok::RParen),
            b'[' => single(Tok::LBrack),
            b']' => single(Tok::RBrack),
            b',' => single(Tok::Comma),
            b'|' if bytes.get(self.pos + 1) == Some(&b'|') => {
                self.pos += 2;
                return Ok((start, Tok::Bar2));
            }
            b'0' if !bytes
                .get(self.pos + 1)
                .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_') =>
            {
                single(Tok::Zero)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = self.pos + 1;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
                {
                    end += 1;
                }
                let word = &self.src[self.pos..end];
                self.pos = end;
                let tok = if word == "nu" {
                    Tok::Nu
                } else {
                    Tok::Ident(word.to_owned())
                };
                return Ok((start, tok));
            }
            _ => {
                let ch = self.src[self.pos..].chars().next().unwrap_or('?');
                return Err(syntax_error(self.src, start, "a token", &format!("`{ch}`")));
            }
        };
        self.pos += 1;
        Ok(tok)
    }
}

fn syntax_error(src: &str, offset: usize, expected: &str, found: &str) -> CalculusError {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    CalculusError::Syntax {
        offset,
        line,
        column,
        expected: expected.to_owned(),
        found: found.to_owned(),
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<(usize, Tok)>,
}

enum Prefix {
    Act(ActionLabel),
    Sync(BarrierName),
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Result<&(usize, Tok), CalculusError> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lexer.next()?);
        }
        Ok(self.peeked.as_ref().unwrap())
    }

    fn bump(&mut self) -> Result<(usize, Tok), CalculusError> {
        match self.peeked.take() {
            Some(t) => Ok(t),
            None => self.lexer.next(),
        }
    }

    fn error_at(&self, offset: usize, expected: &str, found: &Tok) -> CalculusError {
        syntax_error(self.lexer.src, offset, expected, &found.describe())
    }

    fn expect(&mut self, want: Tok, expected: &str) -> Result<(), CalculusError> {
        let (off, tok) = self.bump()?;
        if tok == want {
            Ok(())
        } else {
            Err(self.error_at(off, expected, &tok))
        }
    }

    fn ident(&mut self, expected: &str) -> Result<String, CalculusError> {
        match self.bump()? {
            (_, Tok::Ident(s)) => Ok(s),
            (off, tok) => Err(self.error_at(off, expected, &tok)),
        }
    }

    fn parallel(&mut self) -> Result<ProcessTerm, CalculusError> {
        let mut acc = self.unit()?;
        while self.peek()?.1 == Tok::Bar2 {
            self.bump()?;
            let rhs = self.unit()?;
            acc = ProcessTerm::par(acc, rhs);
        }
        Ok(acc)
    }

    fn unit(&mut self) -> Result<ProcessTerm, CalculusError> {
        // Prefix chains are collected iteratively so long sequential
        // threads do not grow the call stack.
        let mut prefixes = Vec::new();
        let body = loop {
            let (off, tok) = self.bump()?;
            match tok {
                Tok::Ident(name) => {
                    self.expect(Tok::Dot, "`.` after action label")?;
                    prefixes.push(Prefix::Act(ActionLabel::new(name)));
                }
                Tok::Lt => {
                    let name = self.ident("barrier name")?;
                    self.expect(Tok::Gt, "`>`")?;
                    if self.peek()?.1 == Tok::Dot {
                        self.bump()?;
                    }
                    prefixes.push(Prefix::Sync(BarrierName::new(name)));
                }
                Tok::Zero => break ProcessTerm::Stop,
                Tok::Nu => {
                    self.expect(Tok::LParen, "`(` after `nu`")?;
                    let mut names = vec![self.ident("barrier name")?];
                    loop {
                        let (off, tok) = self.bump()?;
                        match tok {
                            Tok::Comma => names.push(self.ident("barrier name")?),
                            Tok::RParen => break,
                            other => return Err(self.error_at(off, "`,` or `)`", &other)),
                        }
                    }
                    let inner = self.parallel()?;
                    break names
                        .into_iter()
                        .rev()
                        .fold(inner, |p, b| ProcessTerm::new_barrier(b, p));
                }
                Tok::LParen => {
                    let inner = self.parallel()?;
                    self.expect(Tok::RParen, "`)`")?;
                    break inner;
                }
                Tok::LBrack => {
                    let inner = self.parallel()?;
                    self.expect(Tok::RBrack, "`]`")?;
                    break inner;
                }
                other => {
                    return Err(self.error_at(
                        off,
                        "a process (`0`, action, `<B>`, `nu`, `(` or `[`)",
                        &other,
                    ))
                }
            }
        };
        Ok(prefixes.into_iter().rev().fold(body, |p, pre| match pre {
            Prefix::Act(a) => ProcessTerm::Act(a, Box::new(p)),
            Prefix::Sync(b) => ProcessTerm::Sync(b, Box::new(p)),
        }))
    }
}

/// Parse a process term from its text form.
pub fn parse_process(text: &str) -> Result<ProcessTerm, CalculusError> {
    let mut parser = Parser {
        lexer: Lexer { src: text, pos: 0 },
        peeked: None,
    };
    let term = parser.parallel()?;
    match parser.bump()? {
        (_, Tok::Eof) => Ok(term),
        (off, tok) => Err(parser.error_at(off, "`||` or end of input", &tok)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ProcessTerm::*;

    fn a(l: &str, p: ProcessTerm) -> ProcessTerm {
        ProcessTerm::act(l, p)
    }

    #[test]
    fn stop() {
        assert_eq!(parse_process("0").unwrap(), Stop);
        assert_eq!(parse_process("  ( 0 ) # trailing comment").unwrap(), Stop);
    }

    #[test]
    fn par_binds_loosest() {
        let t = parse_process("a.b.0 || c.0").unwrap();
        assert_eq!(t, ProcessTerm::par(a("a", a("b", Stop)), a("c", Stop)));
    }

    #[test]
    fn intro_example_is_left_associated() {
        let t = parse_process("nu(B) [a1.<B> a2.0 || <B> b1.0 || c1.<B> 0]").unwrap();
        let expected = ProcessTerm::new_barrier(
            "B",
            ProcessTerm::par(
                ProcessTerm::par(
                    a("a1", ProcessTerm::sync("B", a("a2", Stop))),
                    ProcessTerm::sync("B", a("b1", Stop)),
                ),
                a("c1", ProcessTerm::sync("B", Stop)),
            ),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn nu_extends_right() {
        let t = parse_process("x.0 || nu(B) y.<B>0 || <B>z.0").unwrap();
        match t {
            Par(l, r) => {
                assert_eq!(*l, a("x", Stop));
                assert!(matches!(*r, New(_, ref body) if matches!(**body, Par(..))));
            }
            _ => panic!("expected par"),
        }
    }

    #[test]
    fn nu_list_and_dotted_sync() {
        let t = parse_process("nu(A, B) <A>.<B>.0").unwrap();
        assert_eq!(
            t,
            ProcessTerm::new_barrier(
                "A",
                ProcessTerm::new_barrier("B", ProcessTerm::sync("A", ProcessTerm::sync("B", Stop)))
            )
        );
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_process("a.b") {
            Err(CalculusError::Syntax { offset, line, .. }) => {
                assert_eq!(offset, 3);
                assert_eq!(line, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_process("a 0").is_err());
        assert!(parse_process("nu(B 0").is_err());
        assert!(parse_process("0 ||").is_err());
        assert!(parse_process("[0").is_err());
        assert!(parse_process("0 0").is_err());
        assert!(parse_process("a.0 | b.0").is_err());
    }

    #[test]
    fn long_chain_parses_without_recursion() {
        let text: String = (0..50_000).map(|i| format!("a{i}.")).collect::<String>() + "0";
        let t = parse_process(&text).unwrap();
        assert_eq!(t.size(), 50_000);
        // Dropping a 50k-deep Box chain recurses; leak it instead of risking the test stack.
        std::mem::forget(t);
    }
}
