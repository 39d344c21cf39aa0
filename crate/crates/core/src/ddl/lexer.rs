//! Tokenizer for the supported DDL subset.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    /// Bare identifier or keyword.
    Word(String),
    /// Double-quoted (or backtick / bracket quoted) identifier, unescaped.
    Quoted(String),
    Number(String),
    Str(String),
    Punct(char),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub column: usize,
    /// Byte range in the source.
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn is_word(&self, keyword: &str) -> bool {
        matches!(&self.kind, TokenKind::Word(w) if w.eq_ignore_ascii_case(keyword))
    }

    pub fn is_punct(&self, c: char) -> bool {
        self.kind == TokenKind::Punct(c)
    }

    /// Identifier text for bare or quoted identifiers.
    pub fn ident(&self) -> Option<&str> {
        match &self.kind {
            TokenKind::Word(w) | TokenKind::Quoted(w) => Some(w),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Word(w) => format!("`{w}`"),
            TokenKind::Quoted(w) => format!("identifier \"{w}\""),
            TokenKind::Number(n) => format!("number {n}"),
            TokenKind::Str(_) => "string literal".to_string(),
            TokenKind::Punct(c) => format!("`{c}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.src[self.pos..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor { src, pos: 0, line: 1, column: 1 };
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        let (line, column, start) = (cur.line, cur.column, cur.pos);
        let err = |message: &str| LexError { line, column, message: message.to_string() };

        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '-' && cur.peek2() == Some('-') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if c == '/' && cur.peek2() == Some('*') {
            cur.bump();
            cur.bump();
            loop {
                match cur.peek() {
                    None => return Err(err("unterminated block comment")),
                    Some('*') if cur.peek2() == Some('/') => {
                        cur.bump();
                        cur.bump();
                        break;
                    }
                    Some(_) => {
                        cur.bump();
                    }
                }
            }
            continue;
        }

        let kind = if c.is_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(c) = cur.peek() {
                if c.is_alphanumeric() || c == '_' || c == '$' {
                    word.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            TokenKind::Word(word)
        } else if c.is_ascii_digit() {
            let mut num = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_digit() || c == '.' {
                    num.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            TokenKind::Number(num)
        } else if c == '"' || c == '`' || c == '[' {
            let close = if c == '[' { ']' } else { c };
            cur.bump();
            let mut text = String::new();
            loop {
                match cur.bump() {
                    None => return Err(err("unterminated quoted identifier")),
                    Some(ch) if ch == close => {
                        if close != ']' && cur.peek() == Some(close) {
                            cur.bump();
                            text.push(close);
                        } else {
                            break;
                        }
                    }
                    Some(ch) => text.push(ch),
                }
            }
            if text.is_empty() {
                return Err(err("empty quoted identifier"));
            }
            TokenKind::Quoted(text)
        } else if c == '\'' {
            cur.bump();
            let mut text = String::new();
            loop {
                match cur.bump() {
                    None => return Err(err("unterminated string literal")),
                    Some('\'') => {
                        if cur.peek() == Some('\'') {
                            cur.bump();
                            text.push('\'');
                        } else {
                            break;
                        }
                    }
                    Some(ch) => text.push(ch),
                }
            }
            TokenKind::Str(text)
        } else {
            cur.bump();
            TokenKind::Punct(c)
        };

        tokens.push(Token { kind, line, column, start, end: cur.pos });
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn skips_comments_and_tracks_positions() {
        let toks = tokenize("-- header\n/* block\n */ CREATE \"My Table\"").unwrap();
        assert_eq!(toks.len(), 2);
        assert_eq!((toks[0].line, toks[0].column), (3, 5));
        assert_eq!(toks[1].kind, TokenKind::Quoted("My Table".into()));
        assert_eq!((toks[1].line, toks[1].column), (3, 12));
    }

    #[test]
    fn strings_numbers_and_punctuation() {
        assert_eq!(
            kinds("DEFAULT 'it''s' (10,2);"),
            vec![
                TokenKind::Word("DEFAULT".into()),
                TokenKind::Str("it's".into()),
                TokenKind::Punct('('),
                TokenKind::Number("10".into()),
                TokenKind::Punct(','),
                TokenKind::Number("2".into()),
                TokenKind::Punct(')'),
                TokenKind::Punct(';'),
            ]
        );
    }

    #[test]
    fn columns_count_characters_not_bytes() {
        let toks = tokenize("'é' x").unwrap();
        assert_eq!(toks[1].column, 5);
    }

    #[test]
    fn unterminated_constructs_fail_with_position() {
        let e = tokenize("a\n  'oops").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        assert!(tokenize("/* never closed").is_err());
        assert!(tokenize("\"open").is_err());
    }
}
