//! Recursive-descent parser.
//!
//! ```text
//! expr     := sum ('?' rolepath)*
//! sum      := term ('+' term)*
//! term     := primary (':' ROLE)*
//! primary  := SYMBOL | '(' expr ')'
//! rolepath := ROLE (':' ROLE)*
//! ```
//!
//! `:` binds tightest, then `+`, then `?`. Sums and query chains associate to
//! the left. `$` is an output-only token and is always rejected here.

use super::ast::{Expr, Role, RolePath, Symbol};
use super::token::{tokenize_with, Alphabet, Token, TokenKind};
use crate::error::{ParseError, SyntaxError};

/// Parses a token sequence into a single expression.
pub fn parse(tokens: &[Token]) -> Result<Expr, ParseError> {
    let mut p = Parser { tokens, pos: 0 };
    let expr = p.expr()?;
    if p.pos < tokens.len() {
        return Err(p.error(&["'?'", "'+'", "':'", "end of input"]));
    }
    Ok(expr)
}

/// Tokenizes and parses `text` with the default alphabet.
pub fn parse_str(text: &str) -> Result<Expr, SyntaxError> {
    parse_str_with(text, &Alphabet::default())
}

pub fn parse_str_with(text: &str, alphabet: &Alphabet) -> Result<Expr, SyntaxError> {
    let tokens = tokenize_with(text, alphabet)?;
    Ok(parse(&tokens)?)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, kind: TokenKind) -> Option<&Token> {
        match self.tokens.get(self.pos) {
            Some(t) if t.kind == kind => {
                self.pos += 1;
                Some(t)
            }
            _ => None,
        }
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        let (position, found) = match self.peek() {
            Some(t) => (t.offset, format!("{:?}", t.text)),
            None => (
                self.tokens.last().map_or(0, |t| t.offset + t.text.len()),
                "end of input".to_string(),
            ),
        };
        ParseError { position, expected: expected.to_vec(), found }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.sum()?;
        while self.eat(TokenKind::Query).is_some() {
            let path = self.rolepath()?;
            e = Expr::Query { subject: Box::new(e), path };
        }
        Ok(e)
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.term()?;
        while self.eat(TokenKind::Plus).is_some() {
            let right = self.term()?;
            e = Expr::sum(e, right);
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        while self.eat(TokenKind::Colon).is_some() {
            let role = self.role()?;
            e = Expr::Bind { child: Box::new(e), role };
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        if let Some(t) = self.eat(TokenKind::Symbol) {
            return Ok(Expr::Sym(Symbol(t.text.clone())));
        }
        if self.eat(TokenKind::LParen).is_some() {
            let e = self.expr()?;
            if self.eat(TokenKind::RParen).is_none() {
                return Err(self.error(&["')'", "'?'", "'+'", "':'"]));
            }
            return Ok(e);
        }
        Err(self.error(&["symbol", "'('"]))
    }

    fn role(&mut self) -> Result<Role, ParseError> {
        match self.eat(TokenKind::Role) {
            Some(t) => Ok(Role(t.text.clone())),
            None => Err(self.error(&["role"])),
        }
    }

    fn rolepath(&mut self) -> Result<RolePath, ParseError> {
        let mut atoms = vec![self.role()?];
        while self.eat(TokenKind::Colon).is_some() {
            atoms.push(self.role()?);
        }
        Ok(RolePath(atoms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str) -> Expr {
        parse_str(text).unwrap()
    }

    fn path(atoms: &[&str]) -> RolePath {
        RolePath::from_atoms(atoms.iter().copied())
    }

    #[test]
    fn tree_query_applies_to_whole_sum() {
        let tree = Expr::sum_all([
            Expr::bind(Expr::sym("a"), "L"),
            Expr::bind(Expr::bind(Expr::sym("b"), "L"), "R"),
            Expr::bind(Expr::bind(Expr::sym("c"), "R"), "R"),
        ])
        .unwrap();
        assert_eq!(p("a:L + b:L:R + c:R:R ? L"), Expr::query(tree, path(&["L"])));
    }

    #[test]
    fn precedence_witness() {
        match p("x:A + y:B ? B") {
            Expr::Query { subject, path: q } => {
                assert!(matches!(*subject, Expr::Sum { .. }));
                assert_eq!(q, path(&["B"]));
            }
            other => panic!("expected query, got {other:?}"),
        }
    }

    #[test]
    fn rebind_of_query() {
        let e = p("(ao:N + ax:F + wh:A ? F):K");
        let Expr::Bind { child, role } = e else { panic!() };
        assert_eq!(role, Role::new("K"));
        let Expr::Query { subject, path: q } = *child else { panic!() };
        assert_eq!(q, path(&["F"]));
        assert!(matches!(*subject, Expr::Sum { .. }));
    }

    #[test]
    fn nested_chain_is_left_associative() {
        let e = p("( ( ( ( sf:W + fr:V ):N ):R ):R ):Y ? Y ? R ? R ? N");
        let mut peeled = Vec::new();
        let mut cur = e;
        while let Expr::Query { subject, path } = cur {
            peeled.push(path.to_string());
            cur = *subject;
        }
        assert_eq!(peeled, ["N", "R", "R", "Y"]);
        let inner = Expr::sum(Expr::bind(Expr::sym("sf"), "W"), Expr::bind(Expr::sym("fr"), "V"));
        let nested = ["N", "R", "R", "Y"].iter().fold(inner, |e, r| Expr::bind(e, *r));
        assert_eq!(cur, nested);
    }

    #[test]
    fn bind_nests_left() {
        assert_eq!(p("e:X:Y"), Expr::bind(Expr::bind(Expr::sym("e"), "X"), "Y"));
    }

    #[test]
    fn rolepath_storage_is_innermost_first() {
        let Expr::Query { path: q, .. } = p("a:L ? L:R") else { panic!() };
        assert_eq!(q.outermost(), Some(&Role::new("R")));
    }

    #[test]
    fn bare_symbol_is_an_expression() {
        assert_eq!(p("qf"), Expr::sym("qf"));
    }

    #[test]
    fn malformed_inputs() {
        for bad in ["qf:", "", "qf +", "(qf", "qf)", "qf ? ", "qf:N ? n", "L", "qf qf", "? L"] {
            assert!(matches!(parse_str(bad), Err(SyntaxError::Parse(_))), "{bad:?} should not parse");
        }
    }

    #[test]
    fn miss_rejected_as_input() {
        let err = parse_str("$").unwrap_err();
        let SyntaxError::Parse(e) = err else { panic!() };
        assert_eq!(e.position, 0);
        assert!(parse_str("qf:N + $").is_err());
    }

    #[test]
    fn error_position_points_at_offender() {
        let SyntaxError::Parse(e) = parse_str("qf:N + :").unwrap_err() else { panic!() };
        assert_eq!(e.position, 7);
        assert_eq!(e.expected, vec!["symbol", "'('"]);
        let SyntaxError::Parse(e) = parse_str("qf:").unwrap_err() else { panic!() };
        assert_eq!(e.position, 3);
        assert_eq!(e.found, "end of input");
    }
}
