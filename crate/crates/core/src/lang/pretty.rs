use std::fmt::Write;

use num_complex::Complex64;

use super::ast::{Decl, Guard, Program, Stmt, VarKind};
use crate::gates::GateKind;

const INDENT: usize = 4;

/// Canonical source text; parsing it yields a structurally equal program.
pub fn pretty(program: &Program) -> String {
    let mut out = String::new();
    for d in &program.decls {
        out.push_str(&pretty_decl(d));
        out.push('\n');
    }
    write_stmt(&program.body, 0, &mut out);
    out
}

/// A statement on its own, e.g. `while q { x q; }`.
pub fn pretty_stmt(stmt: &Stmt) -> String {
    let mut out = String::new();
    write_stmt(stmt, 0, &mut out);
    out.trim_end().to_string()
}

pub fn pretty_decl(d: &Decl) -> String {
    let init = if d.init != 0 { format!(" = {}", d.init) } else { String::new() };
    match d.kind {
        VarKind::Qubit => format!("qubit {}{init};", d.name),
        VarKind::Uint => format!("uint<{}> {}{init};", d.width, d.name),
    }
}

pub fn pretty_guard(g: &Guard) -> String {
    match g {
        Guard::Qubit(v) => v.clone(),
        Guard::GtZero(v) => format!("({v} > 0)"),
        Guard::EqConst(v, c) => format!("({v} == {c})"),
    }
}

fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:?}{sign}{:?}i", z.re, z.im.abs())
}

fn gate_text(gate: &GateKind) -> String {
    match gate {
        GateKind::Custom(m) => {
            let rows: Vec<String> = (0..m.nrows())
                .map(|r| {
                    let cells: Vec<String> = (0..m.ncols()).map(|c| format_complex(m[(r, c)])).collect();
                    format!("[{}]", cells.join(","))
                })
                .collect();
            format!("u[{}]", rows.join(","))
        }
        other => other.keyword().to_string(),
    }
}

fn is_simple(s: &Stmt) -> bool {
    matches!(s, Stmt::Skip | Stmt::Apply { .. })
}

fn inline(s: &Stmt) -> String {
    match s {
        Stmt::Skip => "skip;".into(),
        Stmt::Apply { gate, operands, controls, .. } => {
            let mut text = format!("{} {};", gate_text(gate), operands.join(" "));
            for c in controls.iter().rev() {
                let kw = if c.positive { "ctrl" } else { "nctrl" };
                text = format!("{kw} {} {{ {text} }}", c.var);
            }
            text
        }
        _ => unreachable!("only simple statements are inlined"),
    }
}

fn write_block(body: &Stmt, indent: usize, out: &mut String) {
    if is_simple(body) {
        let _ = write!(out, "{{ {} }}", inline(body));
        return;
    }
    out.push_str("{\n");
    write_stmt(body, indent + INDENT, out);
    let _ = write!(out, "{:indent$}}}", "");
}

fn write_stmt(s: &Stmt, indent: usize, out: &mut String) {
    match s {
        Stmt::Seq(a, b) => {
            write_stmt(a, indent, out);
            write_stmt(b, indent, out);
            return;
        }
        Stmt::Skip | Stmt::Apply { .. } => {
            let _ = write!(out, "{:indent$}{}", "", inline(s));
        }
        Stmt::While { guard, body, .. } => {
            let _ = write!(out, "{:indent$}while {} ", "", pretty_guard(guard));
            write_block(body, indent, out);
        }
        Stmt::BoundedWhile { bound, guard, body, .. } => {
            let _ = write!(out, "{:indent$}while<{bound}> {} ", "", pretty_guard(guard));
            write_block(body, indent, out);
        }
        Stmt::If { guard, body, .. } => {
            let _ = write!(out, "{:indent$}if {} ", "", pretty_guard(guard));
            write_block(body, indent, out);
        }
    }
    out.push('\n');
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skip_alone() {
        assert_eq!(pretty_stmt(&Stmt::Skip), "skip;");
    }

    #[test]
    fn simple_loop() {
        let s = Stmt::while_loop(Guard::Qubit("q".into()), Stmt::apply(GateKind::X, &["q"]));
        assert_eq!(pretty_stmt(&s), "while q { x q; }");
    }

    #[test]
    fn nested_controls() {
        let s = Stmt::apply(GateKind::X, &["q"]).with_control("d", false).with_control("c", true);
        assert_eq!(pretty_stmt(&s), "ctrl c { nctrl d { x q; } }");
    }

    #[test]
    fn complex_format() {
        assert_eq!(format_complex(Complex64::new(0.5, -1.0)), "0.5-1.0i");
        assert_eq!(format_complex(Complex64::new(1.0, 0.0)), "1.0+0.0i");
    }

    #[test]
    fn decls() {
        assert_eq!(pretty_decl(&Decl::uint("q", 3, 2)), "uint<3> q = 2;");
        assert_eq!(pretty_decl(&Decl::qubit("c")), "qubit c;");
    }
}
