//! Second, independent evaluator for cross-checking.
//!
//! Shares no code with the library: its own lexer, a Pratt-style parser that
//! evaluates while it parses, and structures stored as lists of root-first
//! paths (the library stores paths innermost-first).

#![allow(dead_code)]

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Sym(String),
    Role(String),
    Colon,
    Plus,
    Query,
    Open,
    Close,
}

fn lex(src: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            ':' => Some(Tok::Colon),
            '+' => Some(Tok::Plus),
            '?' => Some(Tok::Query),
            '(' => Some(Tok::Open),
            ')' => Some(Tok::Close),
            _ => None,
        };
        if let Some(t) = single {
            out.push(t);
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
            i += 1;
        }
        let word: String = chars[start..i].iter().collect();
        if word.is_empty() {
            return Err(format!("bad char {c:?}"));
        } else if (1..=2).contains(&word.len()) && word.chars().all(|c| c.is_ascii_lowercase()) {
            out.push(Tok::Sym(word));
        } else if word.len() == 1 && word.chars().all(|c| c.is_ascii_uppercase()) {
            out.push(Tok::Role(word));
        } else {
            return Err(format!("bad word {word:?}"));
        }
    }
    Ok(out)
}

/// A binding: root-first role list and its symbol.
pub type Entry = (Vec<String>, String);

/// `None` is the miss value `$`.
pub type Val = Option<Vec<Entry>>;

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Value(String),
    SyntaxError,
    EvalError,
}

fn bind(v: Val, role: &str) -> Val {
    v.map(|es| {
        es.into_iter()
            .map(|(mut p, s)| {
                p.insert(0, role.to_string());
                (p, s)
            })
            .collect()
    })
}

fn peel(v: Val, role: &str) -> Val {
    let es = v?;
    let kept: Vec<Entry> = es.into_iter().filter(|(p, _)| p.first().map(String::as_str) == Some(role)).map(|(p, s)| (p[1..].to_vec(), s)).collect();
    if kept.is_empty() {
        None
    } else {
        Some(kept)
    }
}

fn is_prefix(a: &[String], b: &[String]) -> bool {
    a.len() <= b.len() && b[..a.len()] == *a
}

fn add(a: Val, b: Val) -> Result<Val, ()> {
    let (Some(mut a), Some(b)) = (a, b) else {
        return Err(());
    };
    for (pb, sb) in b {
        if a.iter().any(|(pa, _)| is_prefix(pa, &pb) || is_prefix(&pb, pa)) {
            return Err(());
        }
        a.push((pb, sb));
    }
    Ok(Some(a))
}

struct P {
    toks: Vec<Tok>,
    pos: usize,
}

struct SyntaxFail;

/// `Err(())` marks an evaluation failure; parsing carries on past it so a
/// later syntax error still wins, as with parse-then-evaluate.
type Ev = Result<Val, ()>;

impl P {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn role(&mut self) -> Result<String, SyntaxFail> {
        match self.next() {
            Some(Tok::Role(r)) => Ok(r),
            _ => Err(SyntaxFail),
        }
    }

    fn atom(&mut self) -> Result<Ev, SyntaxFail> {
        match self.next() {
            Some(Tok::Sym(s)) => Ok(Ok(Some(vec![(Vec::new(), s)]))),
            Some(Tok::Open) => {
                let v = self.level(0)?;
                match self.next() {
                    Some(Tok::Close) => Ok(v),
                    _ => Err(SyntaxFail),
                }
            }
            _ => Err(SyntaxFail),
        }
    }

    // Levels: 0 admits queries, 1 sums, 2 only bindings.
    fn level(&mut self, min: u8) -> Result<Ev, SyntaxFail> {
        let mut v = self.atom()?;
        let mut queried = false;
        loop {
            match self.peek() {
                Some(Tok::Colon) if !queried => {
                    self.pos += 1;
                    let r = self.role()?;
                    v = v.map(|v| bind(v, &r));
                }
                Some(Tok::Plus) if min <= 1 && !queried => {
                    self.pos += 1;
                    let rhs = self.level(2)?;
                    v = match (v, rhs) {
                        (Ok(a), Ok(b)) => add(a, b),
                        _ => Err(()),
                    };
                }
                Some(Tok::Query) if min == 0 => {
                    self.pos += 1;
                    queried = true;
                    let mut path = vec![self.role()?];
                    while self.peek() == Some(&Tok::Colon) {
                        self.pos += 1;
                        path.push(self.role()?);
                    }
                    // Written innermost first; the outermost atom is peeled first.
                    for r in path.iter().rev() {
                        v = v.map(|v| peel(v, r));
                    }
                }
                _ => break,
            }
        }
        Ok(v)
    }
}

pub fn render(v: &Val) -> String {
    match v {
        None => "$".to_string(),
        Some(es) => es
            .iter()
            .map(|(p, s)| {
                let mut t = s.clone();
                for r in p.iter().rev() {
                    t.push(':');
                    t.push_str(r);
                }
                t
            })
            .collect::<Vec<_>>()
            .join(" + "),
    }
}

/// Evaluates `src` and renders the value in insertion order.
pub fn oracle_eval(src: &str) -> Outcome {
    let Ok(toks) = lex(src) else {
        return Outcome::SyntaxError;
    };
    let mut p = P { toks, pos: 0 };
    match p.level(0) {
        Err(SyntaxFail) => Outcome::SyntaxError,
        _ if p.pos != p.toks.len() => Outcome::SyntaxError,
        Ok(Err(())) => Outcome::EvalError,
        Ok(Ok(v)) => Outcome::Value(render(&v)),
    }
}

/// The library's answer in the same shape.
pub fn library_eval(src: &str) -> Outcome {
    match srep::parse_str(src) {
        Err(_) => Outcome::SyntaxError,
        Ok(e) => match srep::eval(&e) {
            Ok(v) => Outcome::Value(srep::print_value(&v)),
            Err(_) => Outcome::EvalError,
        },
    }
}
