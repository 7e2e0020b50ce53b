//! S-expression reader with source positions.

use super::PddlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sexpr {
    Atom(String, Pos),
    List(Vec<Sexpr>, Pos),
}

impl Sexpr {
    pub fn pos(&self) -> Pos {
        match self {
            Sexpr::Atom(_, p) | Sexpr::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom(s, _) => Some(s),
            Sexpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List(items, _) => Some(items),
            Sexpr::Atom(..) => None,
        }
    }

    /// True if this is an atom equal to `kw`, ignoring ASCII case.
    pub fn is_keyword(&self, kw: &str) -> bool {
        self.as_atom().is_some_and(|s| s.eq_ignore_ascii_case(kw))
    }

    /// Head keyword of a list, if its first element is an atom.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_atom()
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Reader<'_> {
    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Option<Sexpr>, PddlError> {
        self.skip_trivia();
        let start = self.pos();
        match self.chars.peek().copied() {
            None => Ok(None),
            Some(')') => Err(PddlError::syntax(start, "unexpected `)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => return Err(PddlError::syntax(start, "unclosed `(`")),
                        Some(')') => {
                            self.bump();
                            return Ok(Some(Sexpr::List(items, start)));
                        }
                        Some(_) => {
                            let item = self.read()?.expect("non-empty input");
                            items.push(item);
                        }
                    }
                }
            }
            Some(_) => {
                let mut text = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    text.push(c);
                    self.bump();
                }
                Ok(Some(Sexpr::Atom(text, start)))
            }
        }
    }
}

/// Reads every top-level expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexpr>, PddlError> {
    let mut reader = Reader { chars: text.chars().peekable(), line: 1, col: 1 };
    let mut out = Vec::new();
    while let Some(e) = reader.read()? {
        out.push(e);
    }
    Ok(out)
}
