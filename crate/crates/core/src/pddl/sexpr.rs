//! S-expression reader for PDDL text.
//!
//! Comments (`;` to end of line) are dropped before tokenizing and every
//! symbol is lower-cased, since PDDL identifiers are case-insensitive.

use super::ParseError;

/// Source position, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Symbol(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Symbol(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Symbol(..) => None,
        }
    }

    /// Head symbol of a list, if the list is non-empty and starts with a symbol.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|l| l.first()).and_then(SExpr::as_symbol)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Open(Pos),
    Close(Pos),
    Symbol(String, Pos),
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = match line.find(';') {
            Some(i) => &line[..i],
            None => line,
        };
        let mut chars = line.char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            let pos = Pos {
                line: line_no + 1,
                col: line[..i].chars().count() + 1,
            };
            match c {
                '(' => tokens.push(Token::Open(pos)),
                ')' => tokens.push(Token::Close(pos)),
                c if c.is_whitespace() => {}
                _ => {
                    let mut end = i + c.len_utf8();
                    while let Some(&(j, d)) = chars.peek() {
                        if d == '(' || d == ')' || d.is_whitespace() {
                            break;
                        }
                        end = j + d.len_utf8();
                        chars.next();
                    }
                    tokens.push(Token::Symbol(line[i..end].to_lowercase(), pos));
                }
            }
        }
    }
    tokens
}

/// Reads exactly one top-level s-expression from `text`.
pub fn read_one(text: &str) -> Result<SExpr, ParseError> {
    let tokens = tokenize(text);
    let mut stack: Vec<(Vec<SExpr>, Pos)> = Vec::new();
    let mut result = None;
    for tok in tokens {
        if result.is_some() {
            let pos = match tok {
                Token::Open(p) | Token::Close(p) | Token::Symbol(_, p) => p,
            };
            return Err(ParseError::syntax(pos, "trailing input after top-level expression"));
        }
        match tok {
            Token::Open(p) => stack.push((Vec::new(), p)),
            Token::Close(p) => {
                let (items, open) = stack
                    .pop()
                    .ok_or_else(|| ParseError::syntax(p, "unbalanced ')'"))?;
                let list = SExpr::List(items, open);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => result = Some(list),
                }
            }
            Token::Symbol(s, p) => match stack.last_mut() {
                Some((parent, _)) => parent.push(SExpr::Symbol(s, p)),
                None => return Err(ParseError::syntax(p, "symbol outside of any list")),
            },
        }
    }
    if let Some((_, open)) = stack.last() {
        return Err(ParseError::syntax(*open, "unclosed '('"));
    }
    result.ok_or_else(|| ParseError::syntax(Pos { line: 1, col: 1 }, "empty input"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_comments_and_lowercases() {
        let e = read_one("(Define ; comment (\n (Domain X))").unwrap();
        assert_eq!(e.head(), Some("define"));
        let inner = &e.as_list().unwrap()[1];
        assert_eq!(inner.as_list().unwrap()[1].as_symbol(), Some("x"));
    }

    #[test]
    fn reports_positions_of_unbalanced_input() {
        match read_one("(a (b c)\n").unwrap_err() {
            ParseError::Syntax { line, col, .. } => assert_eq!((line, col), (1, 1)),
            e => panic!("unexpected {e:?}"),
        }
        match read_one("(a))").unwrap_err() {
            ParseError::Syntax { line, col, .. } => assert_eq!((line, col), (1, 4)),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn empty_text_is_a_syntax_error() {
        assert!(matches!(read_one("  ; nothing\n"), Err(ParseError::Syntax { .. })));
    }
}
