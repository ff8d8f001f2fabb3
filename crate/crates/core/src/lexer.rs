//! Lexer for `.sdm` model files.
//!
//! Comments run from `//` to end of line. Numbers accept decimal and
//! exponent forms (`1.5e2`). Every token carries a 1-based line/column.

use alloc::string::String;
use alloc::vec::Vec;

use crate::diag::Diagnostic;
use crate::token::{Token, TokenKind};

struct Cursor<'a> {
    rest: core::str::Chars<'a>,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            rest: text.chars(),
            line: 1,
            column: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.rest.clone().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.rest.clone();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.rest.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

pub fn tokenize(source_name: &str, text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut cur = Cursor::new(text);
    let mut tokens = Vec::new();

    loop {
        // skip whitespace and comments
        loop {
            match cur.peek() {
                Some(c) if c.is_whitespace() => {
                    cur.bump();
                }
                Some('/') if cur.peek2() == Some('/') => {
                    while let Some(c) = cur.peek() {
                        if c == '\n' {
                            break;
                        }
                        cur.bump();
                    }
                }
                _ => break,
            }
        }

        let (line, column) = (cur.line, cur.column);
        let c = match cur.peek() {
            Some(c) => c,
            None => break,
        };

        let kind = if c.is_ascii_alphabetic() || c == '_' {
            let mut ident = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    ident.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            TokenKind::Ident(ident)
        } else if c.is_ascii_digit() || (c == '.' && cur.peek2().is_some_and(|d| d.is_ascii_digit()))
        {
            let mut lit = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_digit() || c == '.' {
                    lit.push(c);
                    cur.bump();
                } else if c == 'e' || c == 'E' {
                    // exponent only if followed by digit or sign+digit
                    let mut it = cur.rest.clone();
                    it.next();
                    match it.next() {
                        Some(d) if d.is_ascii_digit() => {}
                        Some(s) if s == '+' || s == '-' => match it.next() {
                            Some(d) if d.is_ascii_digit() => {}
                            _ => break,
                        },
                        _ => break,
                    }
                    lit.push(c);
                    cur.bump();
                    if let Some(s) = cur.peek() {
                        if s == '+' || s == '-' {
                            lit.push(s);
                            cur.bump();
                        }
                    }
                    while let Some(d) = cur.peek() {
                        if d.is_ascii_digit() {
                            lit.push(d);
                            cur.bump();
                        } else {
                            break;
                        }
                    }
                    break;
                } else {
                    break;
                }
            }
            match lit.parse::<f64>() {
                Ok(n) => TokenKind::Number(n),
                Err(_) => {
                    return Err(Diagnostic::error(
                        source_name,
                        line,
                        column,
                        alloc::format!("malformed number literal `{lit}`"),
                    ));
                }
            }
        } else if c == '"' {
            cur.bump();
            let mut s = String::new();
            loop {
                match cur.bump() {
                    Some('"') => break,
                    Some('\n') | None => {
                        return Err(Diagnostic::error(
                            source_name,
                            line,
                            column,
                            String::from("unterminated string literal"),
                        ));
                    }
                    Some(c) => s.push(c),
                }
            }
            TokenKind::Str(s)
        } else {
            cur.bump();
            match c {
                '{' => TokenKind::LBrace,
                '}' => TokenKind::RBrace,
                '[' => TokenKind::LBracket,
                ']' => TokenKind::RBracket,
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                ',' => TokenKind::Comma,
                ':' => TokenKind::Colon,
                '*' => TokenKind::Star,
                '+' => TokenKind::Plus,
                '-' => TokenKind::Minus,
                '/' => TokenKind::Slash,
                '^' => TokenKind::Caret,
                '=' => {
                    if cur.peek() == Some('=') {
                        cur.bump();
                        TokenKind::EqEq
                    } else {
                        TokenKind::Eq
                    }
                }
                '!' => {
                    if cur.peek() == Some('=') {
                        cur.bump();
                        TokenKind::NotEq
                    } else {
                        return Err(Diagnostic::error(
                            source_name,
                            line,
                            column,
                            String::from("illegal character `!` (did you mean `!=`?)"),
                        ));
                    }
                }
                '<' => {
                    if cur.peek() == Some('=') {
                        cur.bump();
                        TokenKind::LtEq
                    } else {
                        TokenKind::Lt
                    }
                }
                '>' => {
                    if cur.peek() == Some('=') {
                        cur.bump();
                        TokenKind::GtEq
                    } else {
                        TokenKind::Gt
                    }
                }
                other => {
                    return Err(Diagnostic::error(
                        source_name,
                        line,
                        column,
                        alloc::format!("illegal character `{other}`"),
                    ));
                }
            }
        };

        tokens.push(Token { kind, line, column });
    }

    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::TokenKind as K;

    fn kinds(text: &str) -> Vec<K> {
        tokenize("test.sdm", text)
            .unwrap()
            .into_iter()
            .map(|t| t.kind)
            .collect()
    }

    #[test]
    fn stock_header_tokens() {
        let ks = kinds("stock S { initial = 0 }");
        assert_eq!(
            ks,
            alloc::vec![
                K::Ident("stock".into()),
                K::Ident("S".into()),
                K::LBrace,
                K::Ident("initial".into()),
                K::Eq,
                K::Number(0.0),
                K::RBrace,
            ]
        );
    }

    #[test]
    fn exponent_number() {
        let ks = kinds("a = 1.5e2");
        assert_eq!(
            ks,
            alloc::vec![K::Ident("a".into()), K::Eq, K::Number(150.0)]
        );
    }

    #[test]
    fn illegal_character_positions() {
        let err = tokenize("test.sdm", "b = 1 @ 2").unwrap_err();
        assert_eq!((err.line, err.column), (1, 7));
        assert!(err.message.contains('@'));
    }

    #[test]
    fn comments_and_newlines() {
        let ks = kinds("// header\na = 1 // trailing\nb = 2");
        assert_eq!(ks.len(), 6);
        let toks = tokenize("t", "a = 1\nb = 2").unwrap();
        assert_eq!((toks[3].line, toks[3].column), (2, 1));
    }

    #[test]
    fn comparison_operators() {
        let ks = kinds("a <= b >= c == d != e < f > g");
        assert!(ks.contains(&K::LtEq));
        assert!(ks.contains(&K::GtEq));
        assert!(ks.contains(&K::EqEq));
        assert!(ks.contains(&K::NotEq));
    }
}
