use super::ast::Expr;

// Binding strength of each node kind; a child printed in a slot that demands a
// higher level gets parenthesized.
const QUERY: u8 = 0;
const SUM: u8 = 1;
const BIND: u8 = 2;

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Query { .. } => QUERY,
        Expr::Sum { .. } => SUM,
        Expr::Bind { .. } | Expr::Sym(_) => BIND,
    }
}

/// Prints an expression in normalized form: single spaces around `+` and `?`,
/// none around `:`, and only the parentheses the precedence rules require.
pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, &mut out);
    out
}

fn write_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Sym(s) => out.push_str(s.as_str()),
        Expr::Bind { child, role } => {
            write_child(child, BIND, out);
            out.push(':');
            out.push_str(role.as_str());
        }
        Expr::Sum { left, right } => {
            write_child(left, SUM, out);
            out.push_str(" + ");
            // Sums nest left, so a sum on the right needs parentheses.
            write_child(right, BIND, out);
        }
        Expr::Query { subject, path } => {
            write_child(subject, QUERY, out);
            out.push_str(" ? ");
            out.push_str(&path.to_string());
        }
    }
}

fn write_child(e: &Expr, min_level: u8, out: &mut String) {
    if level(e) < min_level {
        out.push('(');
        write_expr(e, out);
        out.push(')');
    } else {
        write_expr(e, out);
    }
}
