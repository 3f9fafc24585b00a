//! Pretty-printer for `.ssafj` programs. `parse_source(pretty_print(p)) == p`
//! for every well-formed AST (positions are layout metadata and compare
//! equal by construction).

use super::ast::*;
use crate::common::BinOp;
use std::fmt::Write;

pub fn pretty_print(p: &SourceProgram) -> String {
    let mut out = String::new();
    for c in &p.classes {
        print_class(&mut out, c);
    }
    out
}

fn print_class(out: &mut String, c: &SourceClass) {
    let _ = writeln!(out, "class {} {{", c.name);
    for (ty, name) in &c.fields {
        let _ = writeln!(out, "  {ty} {name};");
    }
    let _ = writeln!(out, "  ;");
    for m in &c.methods {
        print_method(out, m);
    }
    let _ = writeln!(out, "}}");
}

fn print_method(out: &mut String, m: &SourceMethod) {
    let _ = writeln!(
        out,
        "  {} {}({} {}) {{",
        m.ret_type, m.name, m.param.0, m.param.1
    );
    for (ty, name) in &m.locals {
        let _ = writeln!(out, "    {ty} {name};");
    }
    let _ = writeln!(out, "    ;");
    for b in &m.body {
        print_block(out, b, 2);
    }
    let _ = writeln!(out, "  }}");
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn print_block(out: &mut String, b: &Block, depth: usize) {
    indent(out, depth);
    let _ = write!(out, "{}: ", b.label);
    match &b.body {
        BlockBody::Assigns(assigns) => {
            if assigns.is_empty() {
                out.push_str("{ }\n");
            } else {
                out.push('\n');
                for a in assigns {
                    indent(out, depth + 1);
                    print_assignment(out, a);
                    out.push('\n');
                }
            }
        }
        BlockBody::Return(e) => {
            let _ = writeln!(out, "return {};", expr_str(e));
        }
        BlockBody::Throw(e) => {
            let _ = writeln!(out, "throw {};", expr_str(e));
        }
        BlockBody::MethodCall {
            target,
            receiver,
            method,
            arg,
        } => {
            let _ = writeln!(
                out,
                "{target} = {}.{method}({});",
                expr_str(receiver),
                expr_str(arg)
            );
        }
        BlockBody::TryCatch {
            try_blocks,
            raise_phis,
            exn_type,
            exn_var,
            catch_blocks,
            join_phis,
        } => {
            out.push_str("try {\n");
            for tb in try_blocks {
                print_block(out, tb, depth + 1);
            }
            indent(out, depth);
            let _ = write!(out, "}} join {{ {} }}", phis_str(raise_phis));
            let _ = write!(out, " catch ({exn_type} {exn_var}) {{\n");
            for cb in catch_blocks {
                print_block(out, cb, depth + 1);
            }
            indent(out, depth);
            let _ = writeln!(out, "}} join {{ {} }}", phis_str(join_phis));
        }
        BlockBody::While {
            entry_phis,
            cond,
            body,
        } => {
            let _ = write!(
                out,
                "join {{ {} }} while ({}) {{\n",
                phis_str(entry_phis),
                expr_str(cond)
            );
            for wb in body {
                print_block(out, wb, depth + 1);
            }
            indent(out, depth);
            out.push_str("}\n");
        }
        BlockBody::IfElse {
            cond,
            then_blocks,
            else_blocks,
            join_phis,
        } => {
            let _ = write!(out, "if ({}) {{\n", expr_str(cond));
            for tb in then_blocks {
                print_block(out, tb, depth + 1);
            }
            indent(out, depth);
            out.push_str("} else {\n");
            for eb in else_blocks {
                print_block(out, eb, depth + 1);
            }
            indent(out, depth);
            let _ = writeln!(out, "}} join {{ {} }}", phis_str(join_phis));
        }
    }
}

fn print_assignment(out: &mut String, a: &Assignment) {
    match a {
        Assignment::Var(x, e) => {
            let _ = write!(out, "{x} = {};", expr_str(e));
        }
        Assignment::Field(recv, f, e) => {
            let _ = write!(out, "{}.{f} = {};", expr_str(recv), expr_str(e));
        }
        Assignment::Print(e) => {
            let _ = write!(out, "println({});", expr_str(e));
        }
    }
}

fn phis_str(phis: &[Phi]) -> String {
    phis.iter()
        .map(|p| {
            let ops = p
                .operands
                .iter()
                .map(|(l, x)| format!("{l}:{x}"))
                .collect::<Vec<_>>()
                .join(", ");
            format!("{} = phi({ops})", p.target)
        })
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn expr_str(e: &Expr) -> String {
    expr_prec(e, 0)
}

/// prec 0: comparison level, 1: additive, 2: primary.
fn expr_prec(e: &Expr, prec: u8) -> String {
    match e {
        Expr::Const(c) => c.to_string(),
        Expr::Var(x) => x.clone(),
        Expr::This => "this".into(),
        Expr::New(t) => format!("new {t}()"),
        Expr::Field(recv, f) => format!("{}.{f}", expr_prec(recv, 2)),
        Expr::BinOp(op, a, b) => {
            let (level, s) = match op {
                BinOp::Lt | BinOp::Gt | BinOp::Eq => {
                    (0, format!("{} {op} {}", expr_prec(a, 1), expr_prec(b, 1)))
                }
                BinOp::Add | BinOp::Sub => {
                    // Left-associative: right operand printed at primary level.
                    (1, format!("{} {op} {}", expr_prec(a, 1), expr_prec(b, 2)))
                }
            };
            if level < prec {
                format!("({s})")
            } else {
                s
            }
        }
    }
}
