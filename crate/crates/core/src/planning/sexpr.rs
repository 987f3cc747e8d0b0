use super::{ParseError, ParseErrorKind, Pos};

/// Parsed s-expression; atoms are lower-cased (PDDL is case-insensitive).
#[derive(Debug, Clone, PartialEq)]
pub enum SExpr {
    Atom(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(v, _) => Some(v),
            SExpr::Atom(..) => None,
        }
    }

    /// Head keyword of a non-empty list.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|v| v.first()).and_then(SExpr::atom)
    }
}

fn syntax(pos: Pos, msg: impl Into<String>) -> ParseError {
    ParseError { kind: ParseErrorKind::Syntax(msg.into()), pos }
}

/// Parses exactly one top-level expression; `;` starts a comment.
pub fn parse_sexpr(text: &str) -> Result<SExpr, ParseError> {
    let mut stack: Vec<(Vec<SExpr>, Pos)> = Vec::new();
    let mut done: Option<SExpr> = None;
    let mut line = 1;
    let mut col = 0;
    let mut chars = text.chars().peekable();
    let mut atom = String::new();
    let mut atom_pos = Pos { line, col };

    let flush = |atom: &mut String, pos: Pos, stack: &mut Vec<(Vec<SExpr>, Pos)>, done: &Option<SExpr>| {
        if atom.is_empty() {
            return Ok(());
        }
        let a = SExpr::Atom(std::mem::take(atom).to_lowercase(), pos);
        match stack.last_mut() {
            Some((v, _)) => {
                v.push(a);
                Ok(())
            }
            None if done.is_some() => Err(syntax(pos, "text after the closing parenthesis")),
            None => Err(syntax(pos, "expected `(`")),
        }
    };

    while let Some(c) = chars.next() {
        col += 1;
        let here = Pos { line, col };
        match c {
            '\n' | ' ' | '\t' | '\r' | '(' | ')' | ';' => {
                flush(&mut atom, atom_pos, &mut stack, &done)?;
                match c {
                    '\n' => {
                        line += 1;
                        col = 0;
                    }
                    '(' => {
                        if done.is_some() {
                            return Err(syntax(here, "text after the closing parenthesis"));
                        }
                        stack.push((Vec::new(), here));
                    }
                    ')' => {
                        let (items, p) = stack.pop().ok_or_else(|| syntax(here, "unbalanced `)`"))?;
                        let l = SExpr::List(items, p);
                        match stack.last_mut() {
                            Some((v, _)) => v.push(l),
                            None => done = Some(l),
                        }
                    }
                    ';' => {
                        while let Some(&n) = chars.peek() {
                            if n == '\n' {
                                break;
                            }
                            chars.next();
                        }
                    }
                    _ => {}
                }
            }
            _ => {
                if atom.is_empty() {
                    atom_pos = here;
                }
                atom.push(c);
            }
        }
    }
    flush(&mut atom, atom_pos, &mut stack, &done)?;
    if let Some((_, p)) = stack.last() {
        return Err(syntax(*p, "unclosed `(`"));
    }
    done.ok_or_else(|| syntax(Pos { line, col }, "empty input"))
}
