use alloc::string::String;
use alloc::vec::Vec;

use crate::algebra::parse_number;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Number,
    /// Text between double quotes; offsets cover the inner text.
    Quoted,
    /// Comparison symbols such as `>=`.
    Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Lowercased text.
    pub text: String,
    /// Byte offsets into the raw utterance.
    pub start: usize,
    pub end: usize,
}

/// An utterance split into tokens that point back into the raw text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    raw: String,
    tokens: Vec<Token>,
}

fn word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

impl Utterance {
    pub fn new(raw: &str) -> Self {
        let mut tokens = Vec::new();
        let chars: Vec<(usize, char)> = raw.char_indices().collect();
        let byte_at = |i: usize| chars.get(i).map_or(raw.len(), |(b, _)| *b);
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i].1;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if matches!(c, '"' | '\u{201c}' | '\u{201d}') {
                let close = (i + 1..chars.len()).find(|&j| matches!(chars[j].1, '"' | '\u{201c}' | '\u{201d}'));
                if let Some(j) = close {
                    let (start, end) = (byte_at(i + 1), byte_at(j));
                    if !raw[start..end].trim().is_empty() {
                        tokens.push(Token {
                            kind: TokenKind::Quoted,
                            text: raw[start..end].to_lowercase(),
                            start,
                            end,
                        });
                    }
                    i = j + 1;
                    continue;
                }
                i += 1;
                continue;
            }
            if matches!(c, '<' | '>' | '=' | '!') {
                let mut j = i;
                while j < chars.len() && matches!(chars[j].1, '<' | '>' | '=' | '!') {
                    j += 1;
                }
                let (start, end) = (byte_at(i), byte_at(j));
                tokens.push(Token {
                    kind: TokenKind::Symbol,
                    text: raw[start..end].into(),
                    start,
                    end,
                });
                i = j;
                continue;
            }
            let numeric_start = c == '-' && chars.get(i + 1).is_some_and(|(_, d)| d.is_ascii_digit());
            if word_char(c) || numeric_start {
                let mut j = i + 1;
                while j < chars.len() {
                    let d = chars[j].1;
                    let joiner = matches!(d, '.' | '-' | '\'') && chars.get(j + 1).is_some_and(|(_, e)| word_char(*e));
                    if word_char(d) || joiner {
                        j += 1;
                    } else {
                        break;
                    }
                }
                let (start, end) = (byte_at(i), byte_at(j));
                let text = &raw[start..end];
                let kind = if parse_number(text).is_some() {
                    TokenKind::Number
                } else {
                    TokenKind::Word
                };
                tokens.push(Token {
                    kind,
                    text: text.to_lowercase(),
                    start,
                    end,
                });
                i = j;
                continue;
            }
            i += 1;
        }
        Utterance {
            raw: raw.into(),
            tokens,
        }
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Raw text covered by tokens `from..to`.
    pub fn span_text(&self, from: usize, to: usize) -> &str {
        if from >= to {
            return "";
        }
        &self.raw[self.tokens[from].start..self.tokens[to - 1].end]
    }

    /// Original-case text of one token.
    pub fn original(&self, i: usize) -> &str {
        &self.raw[self.tokens[i].start..self.tokens[i].end]
    }

    /// True when tokens `i` and `i + 1` are separated only by whitespace.
    pub fn adjacent(&self, i: usize) -> bool {
        match (self.tokens.get(i), self.tokens.get(i + 1)) {
            (Some(a), Some(b)) if a.kind != TokenKind::Quoted && b.kind != TokenKind::Quoted => {
                self.raw[a.end..b.start].trim().is_empty()
            }
            _ => false,
        }
    }

    pub fn is_capitalized(&self, i: usize) -> bool {
        self.original(i).chars().next().is_some_and(char::is_uppercase)
    }
}
