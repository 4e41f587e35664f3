use std::fmt;
use std::sync::LazyLock;

use regex::Regex;

use crate::error::LexError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Symbol,
    Role,
    Colon,
    Plus,
    Query,
    LParen,
    RParen,
    Miss,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Symbol => "symbol",
            TokenKind::Role => "role",
            TokenKind::Colon => "':'",
            TokenKind::Plus => "'+'",
            TokenKind::Query => "'?'",
            TokenKind::LParen => "'('",
            TokenKind::RParen => "')'",
            TokenKind::Miss => "'$'",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Byte offset of the token in the source text.
    pub offset: usize,
}

/// Lexical shapes of symbols and roles.
///
/// A word (maximal run of alphanumerics) is classified as a symbol if it fully
/// matches the symbol pattern, otherwise as a role if it fully matches the role
/// pattern.
#[derive(Debug, Clone)]
pub struct Alphabet {
    symbol: Regex,
    role: Regex,
}

/// One or two lowercase letters: tree examples use single letters (`a:L`),
/// generated data uses two (`as:U`).
pub const DEFAULT_SYMBOL_PATTERN: &str = "[a-z]{1,2}";
pub const DEFAULT_ROLE_PATTERN: &str = "[A-Z]";

impl Alphabet {
    pub fn new(symbol_pattern: &str, role_pattern: &str) -> Result<Self, regex::Error> {
        Ok(Alphabet {
            symbol: Regex::new(&format!("^(?:{symbol_pattern})$"))?,
            role: Regex::new(&format!("^(?:{role_pattern})$"))?,
        })
    }

    pub fn is_symbol(&self, word: &str) -> bool {
        self.symbol.is_match(word)
    }

    pub fn is_role(&self, word: &str) -> bool {
        self.role.is_match(word)
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Alphabet::new(DEFAULT_SYMBOL_PATTERN, DEFAULT_ROLE_PATTERN).expect("default patterns are valid")
    }
}

static DEFAULT_ALPHABET: LazyLock<Alphabet> = LazyLock::new(Alphabet::default);

/// Tokenizes with the default alphabet.
pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    tokenize_with(text, &DEFAULT_ALPHABET)
}

pub fn tokenize_with(text: &str, alphabet: &Alphabet) -> Result<Vec<Token>, LexError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(offset, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let punct = match c {
            ':' => Some(TokenKind::Colon),
            '+' => Some(TokenKind::Plus),
            '?' => Some(TokenKind::Query),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            '$' => Some(TokenKind::Miss),
            _ => None,
        };
        if let Some(kind) = punct {
            chars.next();
            tokens.push(Token { kind, text: c.to_string(), offset });
            continue;
        }
        if !is_word_char(c) {
            return Err(LexError { position: offset, fragment: c.to_string() });
        }
        let mut end = offset;
        while let Some(&(i, c)) = chars.peek() {
            if !is_word_char(c) {
                break;
            }
            end = i + c.len_utf8();
            chars.next();
        }
        let word = &text[offset..end];
        let kind = if alphabet.is_symbol(word) {
            TokenKind::Symbol
        } else if alphabet.is_role(word) {
            TokenKind::Role
        } else {
            // Point at the first character that cannot start a valid word.
            let bad = word
                .char_indices()
                .find(|(_, c)| !c.is_ascii_alphabetic())
                .map(|(i, c)| (offset + i, c.to_string()))
                .unwrap_or((offset, word.to_string()));
            return Err(LexError { position: bad.0, fragment: bad.1 });
        };
        tokens.push(Token { kind, text: word.to_string(), offset });
    }
    Ok(tokens)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}
