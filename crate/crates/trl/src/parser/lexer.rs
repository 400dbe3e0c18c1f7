use super::{ParseError, Pos, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    BottomUp,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Comma,
    Semi,
    Eq,
    Bar,
    Star,
    Arrow,
    Minus,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Str(s) => format!("{s:?}"),
            Tok::BottomUp => "`bottom-up`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Star => "`*`".into(),
            Tok::Arrow => "`=>`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub(crate) fn lex(text: &str, file: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;
    let span = |start: Pos, end: Pos| SourceSpan::new(file, start, end);

    while i < chars.len() {
        let c = chars[i];
        let start = Pos { line, col };
        let advance = |i: &mut usize, line: &mut u32, col: &mut u32| {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                advance(&mut i, &mut line, &mut col);
            }
            let follows_up = chars.get(i) == Some(&'-')
                && chars.get(i + 1) == Some(&'u')
                && chars.get(i + 2) == Some(&'p')
                && !chars
                    .get(i + 3)
                    .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_');
            if s == "bottom" && follows_up {
                for _ in 0..3 {
                    advance(&mut i, &mut line, &mut col);
                }
                out.push(Token {
                    tok: Tok::BottomUp,
                    span: span(start, Pos { line, col }),
                });
            } else {
                out.push(Token {
                    tok: Tok::Ident(s),
                    span: span(start, Pos { line, col }),
                });
            }
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                advance(&mut i, &mut line, &mut col);
            }
            let end = Pos { line, col };
            let n = s.parse::<i64>().map_err(|_| ParseError::Syntax {
                span: span(start, end),
                message: format!("integer literal `{s}` out of range"),
            })?;
            out.push(Token {
                tok: Tok::Int(n),
                span: span(start, end),
            });
            continue;
        }
        if c == '"' {
            advance(&mut i, &mut line, &mut col);
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(ParseError::Syntax {
                            span: span(start, Pos { line, col }),
                            message: "unterminated string literal".into(),
                        })
                    }
                    Some('"') => {
                        advance(&mut i, &mut line, &mut col);
                        break;
                    }
                    Some('\\') => {
                        advance(&mut i, &mut line, &mut col);
                        match chars.get(i) {
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some(&c) if c == '"' || c == '\\' => s.push(c),
                            _ => {
                                return Err(ParseError::Syntax {
                                    span: span(start, Pos { line, col }),
                                    message: "bad escape in string literal".into(),
                                })
                            }
                        }
                        advance(&mut i, &mut line, &mut col);
                    }
                    Some(&c) => {
                        s.push(c);
                        advance(&mut i, &mut line, &mut col);
                    }
                }
            }
            out.push(Token {
                tok: Tok::Str(s),
                span: span(start, Pos { line, col }),
            });
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '|' => Tok::Bar,
            '*' => Tok::Star,
            '-' => Tok::Minus,
            '=' if chars.get(i + 1) == Some(&'>') => {
                advance(&mut i, &mut line, &mut col);
                Tok::Arrow
            }
            '=' => Tok::Eq,
            other => {
                return Err(ParseError::Syntax {
                    span: span(start, Pos { line, col: col + 1 }),
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        advance(&mut i, &mut line, &mut col);
        out.push(Token {
            tok,
            span: span(start, Pos { line, col }),
        });
    }
    let end = Pos { line, col };
    out.push(Token {
        tok: Tok::Eof,
        span: span(end, end),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s, "t").unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn bottom_up_is_one_token() {
        assert_eq!(
            toks("bottom-up visit"),
            vec![Tok::BottomUp, Tok::Ident("visit".into()), Tok::Eof]
        );
        assert_eq!(
            toks("bottom-upx"),
            vec![
                Tok::Ident("bottom".into()),
                Tok::Minus,
                Tok::Ident("upx".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_arrows() {
        assert_eq!(
            toks("x => y // rest\n= \"a\\\"b\""),
            vec![
                Tok::Ident("x".into()),
                Tok::Arrow,
                Tok::Ident("y".into()),
                Tok::Eq,
                Tok::Str("a\"b".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn spans_track_lines() {
        let t = lex("a\n  b", "f").unwrap();
        assert_eq!(t[1].span.start, Pos { line: 2, col: 3 });
    }

    #[test]
    fn bad_char_reports_span() {
        let err = lex("a $", "f").unwrap_err();
        assert_eq!(err.span().start, Pos { line: 1, col: 3 });
    }
}
