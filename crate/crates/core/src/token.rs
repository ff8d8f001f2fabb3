//! Token kinds produced by the lexer.

use alloc::string::String;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(f64),
    Str(String),
    // punctuation
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Colon,
    Star,
    Plus,
    Minus,
    Slash,
    Caret,
    Eq,
    EqEq,
    NotEq,
    Lt,
    LtEq,
    Gt,
    GtEq,
}

impl TokenKind {
    /// Short human label used in "expected X, found Y" messages.
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => alloc::format!("identifier `{s}`"),
            TokenKind::Number(n) => alloc::format!("number `{n}`"),
            TokenKind::Str(_) => String::from("string literal"),
            TokenKind::LBrace => String::from("`{`"),
            TokenKind::RBrace => String::from("`}`"),
            TokenKind::LBracket => String::from("`[`"),
            TokenKind::RBracket => String::from("`]`"),
            TokenKind::LParen => String::from("`(`"),
            TokenKind::RParen => String::from("`)`"),
            TokenKind::Comma => String::from("`,`"),
            TokenKind::Colon => String::from("`:`"),
            TokenKind::Star => String::from("`*`"),
            TokenKind::Plus => String::from("`+`"),
            TokenKind::Minus => String::from("`-`"),
            TokenKind::Slash => String::from("`/`"),
            TokenKind::Caret => String::from("`^`"),
            TokenKind::Eq => String::from("`=`"),
            TokenKind::EqEq => String::from("`==`"),
            TokenKind::NotEq => String::from("`!=`"),
            TokenKind::Lt => String::from("`<`"),
            TokenKind::LtEq => String::from("`<=`"),
            TokenKind::Gt => String::from("`>`"),
            TokenKind::GtEq => String::from("`>=`"),
        }
    }
}

/// A token plus its 1-based source position.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: u32,
    pub column: u32,
}
