//! Structural validation. Violations are accumulated, not fail-fast, so one
//! run reports every problem in the program.

use super::ast::*;
use crate::common::{Label, SrcPos};
use std::collections::{HashMap, HashSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub pos: SrcPos,
    pub msg: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: [{}] {}", self.pos, self.rule, self.msg)
    }
}

pub fn validate(program: &SourceProgram) -> Vec<Violation> {
    let mut v = Vec::new();
    let mut class_names = HashSet::new();
    for c in &program.classes {
        if !class_names.insert(c.name.clone()) {
            v.push(Violation {
                rule: "class-name-unique",
                pos: c.pos,
                msg: format!("class `{}` declared twice", c.name),
            });
        }
        let mut fields = HashSet::new();
        for (_, f) in &c.fields {
            if !fields.insert(f.clone()) {
                v.push(Violation {
                    rule: "field-name-unique",
                    pos: c.pos,
                    msg: format!("field `{f}` declared twice in class `{}`", c.name),
                });
            }
        }
        let mut methods = HashSet::new();
        for m in &c.methods {
            if !methods.insert(m.name.clone()) {
                v.push(Violation {
                    rule: "method-name-unique",
                    pos: m.pos,
                    msg: format!("method `{}` declared twice in class `{}`", m.name, c.name),
                });
            }
            validate_method(m, &mut v);
        }
    }
    v
}

fn validate_method(m: &SourceMethod, v: &mut Vec<Violation>) {
    // Label uniqueness within the method.
    let labels = method_labels(m);
    let mut seen: HashSet<&Label> = HashSet::new();
    for l in &labels {
        if !seen.insert(l) {
            v.push(Violation {
                rule: "duplicate-label",
                pos: m.pos,
                msg: format!("label `{l}` declared twice in method `{}`", m.name),
            });
        }
    }
    let label_set: HashSet<&Label> = labels.iter().collect();

    // Last block of the method body must end in a return on every path.
    match m.body.last() {
        Some(last) if block_ends_in_return(last) => {}
        Some(last) => v.push(Violation {
            rule: "last-block-return",
            pos: last.pos,
            msg: format!(
                "last block `{}` of method `{}` does not end in a return",
                last.label, m.name
            ),
        }),
        None => v.push(Violation {
            rule: "last-block-return",
            pos: m.pos,
            msg: format!("method `{}` has an empty body", m.name),
        }),
    }

    // Single static assignment: every variable has at most one textual
    // definition (plain assignment, phi target, or call target). The formal
    // parameter counts as a definition.
    let mut defs: HashMap<String, u32> = HashMap::new();
    defs.insert(m.param.1.clone(), 1);
    let mut def_positions: HashMap<String, SrcPos> = HashMap::new();
    for b in &m.body {
        collect_defs(b, &mut defs, &mut def_positions);
    }
    let mut dup: Vec<_> = defs.iter().filter(|(_, n)| **n > 1).collect();
    dup.sort();
    for (name, n) in dup {
        v.push(Violation {
            rule: "single-assignment",
            pos: def_positions.get(name).copied().unwrap_or(m.pos),
            msg: format!("variable `{name}` assigned {n} times in method `{}`", m.name),
        });
    }

    // Phi checks: operand labels resolve and are distinct; while-phi shape.
    for b in &m.body {
        validate_block(b, &label_set, v);
    }
}

fn block_ends_in_return(b: &Block) -> bool {
    match &b.body {
        BlockBody::Return(_) => true,
        BlockBody::IfElse {
            then_blocks,
            else_blocks,
            ..
        } => {
            then_blocks.last().is_some_and(block_ends_in_return)
                && else_blocks.last().is_some_and(block_ends_in_return)
        }
        BlockBody::TryCatch {
            try_blocks,
            catch_blocks,
            ..
        } => {
            try_blocks.last().is_some_and(block_ends_in_return)
                && catch_blocks.last().is_some_and(block_ends_in_return)
        }
        _ => false,
    }
}

fn collect_defs(b: &Block, defs: &mut HashMap<String, u32>, pos: &mut HashMap<String, SrcPos>) {
    let mut add = |name: &String, p: SrcPos, defs: &mut HashMap<String, u32>| {
        *defs.entry(name.clone()).or_insert(0) += 1;
        pos.entry(name.clone()).or_insert(p);
    };
    match &b.body {
        BlockBody::Assigns(assigns) => {
            for a in assigns {
                if let Assignment::Var(x, _) = a {
                    add(x, b.pos, defs);
                }
            }
        }
        BlockBody::MethodCall { target, .. } => add(target, b.pos, defs),
        BlockBody::TryCatch {
            try_blocks,
            raise_phis,
            exn_var,
            catch_blocks,
            join_phis,
            ..
        } => {
            for p in raise_phis.iter().chain(join_phis) {
                add(&p.target, b.pos, defs);
            }
            add(exn_var, b.pos, defs);
            for inner in try_blocks.iter().chain(catch_blocks) {
                collect_defs(inner, defs, pos);
            }
        }
        BlockBody::While {
            entry_phis, body, ..
        } => {
            for p in entry_phis {
                add(&p.target, b.pos, defs);
            }
            for inner in body {
                collect_defs(inner, defs, pos);
            }
        }
        BlockBody::IfElse {
            then_blocks,
            else_blocks,
            join_phis,
            ..
        } => {
            for p in join_phis {
                add(&p.target, b.pos, defs);
            }
            for inner in then_blocks.iter().chain(else_blocks) {
                collect_defs(inner, defs, pos);
            }
        }
        BlockBody::Return(_) | BlockBody::Throw(_) => {}
    }
}

fn validate_phis(phis: &[Phi], labels: &HashSet<&Label>, pos: SrcPos, v: &mut Vec<Violation>) {
    for p in phis {
        let mut seen = HashSet::new();
        for (l, _) in &p.operands {
            if !seen.insert(l) {
                v.push(Violation {
                    rule: "phi-duplicate-operand",
                    pos,
                    msg: format!("phi for `{}` has duplicate operand label `{l}`", p.target),
                });
            }
            if !labels.contains(l) {
                v.push(Violation {
                    rule: "phi-label-resolution",
                    pos,
                    msg: format!(
                        "phi for `{}` references label `{l}` which names no block",
                        p.target
                    ),
                });
            }
        }
    }
}

fn validate_block(b: &Block, labels: &HashSet<&Label>, v: &mut Vec<Violation>) {
    match &b.body {
        BlockBody::TryCatch {
            try_blocks,
            raise_phis,
            catch_blocks,
            join_phis,
            ..
        } => {
            validate_phis(raise_phis, labels, b.pos, v);
            validate_phis(join_phis, labels, b.pos, v);
            for inner in try_blocks.iter().chain(catch_blocks) {
                validate_block(inner, labels, v);
            }
        }
        BlockBody::While {
            entry_phis, body, ..
        } => {
            validate_phis(entry_phis, labels, b.pos, v);
            // Shape needed by the CPS translation: exactly one loop-back
            // operand (a label inside the while body); entry operands of a
            // multi-entry phi must agree on one variable so the rerouting
            // pre-pass stays sound.
            let body_labels: HashSet<Label> =
                body.iter().flat_map(|blk| blk.labels()).collect();
            for p in entry_phis {
                let (loopback, entry): (Vec<_>, Vec<_>) = p
                    .operands
                    .iter()
                    .partition(|(l, _)| body_labels.contains(l));
                if loopback.len() != 1 {
                    v.push(Violation {
                        rule: "while-phi-arity",
                        pos: b.pos,
                        msg: format!(
                            "phi for `{}` in while `{}` must have exactly one loop-back operand, found {}",
                            p.target, b.label, loopback.len()
                        ),
                    });
                }
                if entry.is_empty() {
                    v.push(Violation {
                        rule: "while-phi-arity",
                        pos: b.pos,
                        msg: format!(
                            "phi for `{}` in while `{}` has no entry operand",
                            p.target, b.label
                        ),
                    });
                } else if entry.len() > 1 {
                    let first = &entry[0].1;
                    if entry.iter().any(|(_, x)| x != first) {
                        v.push(Violation {
                            rule: "while-phi-arity",
                            pos: b.pos,
                            msg: format!(
                                "phi for `{}` in while `{}` has multiple entry operands naming different variables",
                                p.target, b.label
                            ),
                        });
                    }
                }
            }
            for inner in body {
                validate_block(inner, labels, v);
            }
        }
        BlockBody::IfElse {
            then_blocks,
            else_blocks,
            join_phis,
            ..
        } => {
            validate_phis(join_phis, labels, b.pos, v);
            for inner in then_blocks.iter().chain(else_blocks) {
                validate_block(inner, labels, v);
            }
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::parser::parse_source;

    #[test]
    fn minimal_program_validates() {
        let p = parse_source("class A { ; int id(int x){ ; L0: return x; } }").unwrap();
        assert!(validate(&p).is_empty());
    }

    #[test]
    fn flags_missing_return() {
        let p = parse_source("class A { ; int f(int x){ int a_1; ; L0: a_1 = 1; } }").unwrap();
        let vs = validate(&p);
        assert!(vs.iter().any(|v| v.rule == "last-block-return"), "{vs:?}");
    }

    #[test]
    fn flags_unresolvable_phi_label() {
        let text = "class A { ; int f(int x){ int a_1, a_2, a_3; ;
            L0: a_1 = 0;
            L1: join { a_2 = phi(L99:a_1, L2:a_3) } while (a_2 < x) {
                L2: a_3 = a_2 + 1;
            }
            L3: return a_2; } }";
        let p = parse_source(text).unwrap();
        let vs = validate(&p);
        assert!(vs.iter().any(|v| v.rule == "phi-label-resolution"), "{vs:?}");
    }

    #[test]
    fn flags_double_assignment() {
        let p = parse_source(
            "class A { ; int f(int x){ int a_1; ; L0: a_1 = 1; a_1 = 2; L1: return a_1; } }",
        )
        .unwrap();
        let vs = validate(&p);
        assert!(vs.iter().any(|v| v.rule == "single-assignment"), "{vs:?}");
    }
}
