//! Pre-pass that restores the restrictive while form: every while entry phi
//! has exactly two operands, one entry label and one loop-back label.
//!
//! A while at the head of a catch handler can be entered from several throw
//! sites, giving its entry phis more than two operands. The pass inserts an
//! empty assigns block with a fresh label right before such a while and
//! reroutes every non-loop-back operand through it.

use super::ast::*;
use crate::common::{Label, SrcPos};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PhiOrderError {
    #[error("phi operand label `{0}` is not a block label of this method")]
    UnknownLabel(Label),
    #[error("phis disagree on the entry label: `{0}` vs `{1}`")]
    ConflictingEntries(Label, Label),
    #[error("phi for `{0}` does not have exactly two operands")]
    BadArity(String),
    #[error("while has no entry phis")]
    Empty,
}

/// Document order of labels in a method: a block's label precedes the labels
/// of blocks nested inside it and of blocks after it in a sequence.
#[derive(Debug, Clone)]
pub struct LabelOrder {
    index: HashMap<Label, usize>,
}

impl LabelOrder {
    pub fn of_method(md: &SourceMethod) -> Self {
        let labels = method_labels(md);
        let index = labels.into_iter().enumerate().map(|(i, l)| (l, i)).collect();
        LabelOrder { index }
    }

    /// For tests and tools: an explicit ordering.
    pub fn from_sequence(labels: impl IntoIterator<Item = Label>) -> Self {
        let index = labels
            .into_iter()
            .enumerate()
            .map(|(i, l)| (l, i))
            .collect();
        LabelOrder { index }
    }

    fn rank(&self, l: &Label) -> Result<usize, PhiOrderError> {
        self.index
            .get(l)
            .copied()
            .ok_or_else(|| PhiOrderError::UnknownLabel(l.clone()))
    }
}

/// The entry (non-loop-back) label of a while's entry phis: the operand
/// label that precedes the other in document order. All phis must agree.
pub fn min_label(phis: &[Phi], order: &LabelOrder) -> Result<Label, PhiOrderError> {
    let mut entry: Option<Label> = None;
    for p in phis {
        if p.operands.len() != 2 {
            return Err(PhiOrderError::BadArity(p.target.clone()));
        }
        let (l0, l1) = (&p.operands[0].0, &p.operands[1].0);
        let candidate = if order.rank(l0)? < order.rank(l1)? {
            l0.clone()
        } else {
            l1.clone()
        };
        match &entry {
            None => entry = Some(candidate),
            Some(prev) if *prev != candidate => {
                return Err(PhiOrderError::ConflictingEntries(prev.clone(), candidate))
            }
            _ => {}
        }
    }
    entry.ok_or(PhiOrderError::Empty)
}

/// Rewrites every multi-entry while into the two-operand form. Idempotent;
/// programs already in the restrictive form come back structurally equal.
pub fn preprocess_while_entries(program: &SourceProgram) -> SourceProgram {
    let mut out = program.clone();
    for c in &mut out.classes {
        for m in &mut c.methods {
            let mut fresh = FreshLabels::for_method(m);
            rewrite_blocks(&mut m.body, &mut fresh);
        }
    }
    out
}

struct FreshLabels {
    next: u64,
}

impl FreshLabels {
    fn for_method(m: &SourceMethod) -> Self {
        let max = method_labels(m)
            .iter()
            .filter_map(|l| l.number())
            .max()
            .unwrap_or(0);
        FreshLabels { next: max + 1 }
    }

    fn fresh(&mut self) -> Label {
        let l = Label(format!("L{}", self.next));
        self.next += 1;
        l
    }
}

fn rewrite_blocks(blocks: &mut Vec<Block>, fresh: &mut FreshLabels) {
    let mut i = 0;
    while i < blocks.len() {
        // Recurse first so inner whiles are fixed before we inspect this one.
        match &mut blocks[i].body {
            BlockBody::TryCatch {
                try_blocks,
                catch_blocks,
                ..
            } => {
                rewrite_blocks(try_blocks, fresh);
                rewrite_blocks(catch_blocks, fresh);
            }
            BlockBody::While { body, .. } => {
                rewrite_blocks(body, fresh);
            }
            BlockBody::IfElse {
                then_blocks,
                else_blocks,
                ..
            } => {
                rewrite_blocks(then_blocks, fresh);
                rewrite_blocks(else_blocks, fresh);
            }
            _ => {}
        }
        if let BlockBody::While {
            entry_phis, body, ..
        } = &mut blocks[i].body
        {
            let body_labels: std::collections::HashSet<Label> =
                body.iter().flat_map(|b| b.labels()).collect();
            let needs_reroute = entry_phis.iter().any(|p| {
                p.operands
                    .iter()
                    .filter(|(l, _)| !body_labels.contains(l))
                    .count()
                    > 1
            });
            if needs_reroute {
                let hop = fresh.fresh();
                for p in entry_phis.iter_mut() {
                    let (loopback, entry): (Vec<_>, Vec<_>) = p
                        .operands
                        .drain(..)
                        .partition(|(l, _)| body_labels.contains(l));
                    // validate() guarantees one loop-back operand and a
                    // single shared entry variable; fall back gracefully on
                    // unvalidated input by keeping what is there.
                    let entry_var = entry
                        .first()
                        .map(|(_, x)| x.clone())
                        .unwrap_or_else(|| p.target.clone());
                    p.operands = vec![(hop.clone(), entry_var)];
                    p.operands.extend(loopback);
                }
                blocks.insert(
                    i,
                    Block {
                        label: hop,
                        body: BlockBody::Assigns(Vec::new()),
                        pos: SrcPos::default(),
                    },
                );
                i += 1; // skip over the inserted hop block
            }
        }
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::parser::parse_source;
    use crate::source::validate::validate;

    fn order(labels: &[&str]) -> LabelOrder {
        LabelOrder::from_sequence(labels.iter().map(|l| Label::new(*l)))
    }

    #[test]
    fn min_label_picks_document_order_entry() {
        let phis = vec![Phi {
            target: "i_5".into(),
            operands: vec![(Label::new("L3"), "i_1".into()), (Label::new("L6"), "i_6".into())],
        }];
        let got = min_label(&phis, &order(&["L1", "L2", "L3", "L4", "L5", "L6"])).unwrap();
        assert_eq!(got, Label::new("L3"));
    }

    #[test]
    fn min_label_rejects_conflicting_entries() {
        let phis = vec![
            Phi {
                target: "a".into(),
                operands: vec![(Label::new("L1"), "x".into()), (Label::new("L6"), "y".into())],
            },
            Phi {
                target: "b".into(),
                operands: vec![(Label::new("L2"), "x".into()), (Label::new("L6"), "y".into())],
            },
        ];
        let err = min_label(&phis, &order(&["L1", "L2", "L6"])).unwrap_err();
        assert!(matches!(err, PhiOrderError::ConflictingEntries(..)));
    }

    /// The appendix example: two throw sites feeding a catch-handler loop.
    fn multi_entry_program() -> &'static str {
        "class A { ; int f(int x){ int v_1, v_2, v_3, w_1, r_9; ;
            L0: v_1 = 0;
            L1: try {
              L2: if (x < 1) {
                L3: throw new Exception();
              } else {
                L4: throw new Exception();
              } join { }
            } join { v_2 = phi(L3:v_1, L4:v_1) } catch (Exception e) {
              L5: join { v_3 = phi(L3:v_2, L4:v_2, L6:w_1) } while (v_3 < x) {
                L6: w_1 = v_3 + 1;
              }
              L7: r_9 = v_3;
            } join { }
            L8: return r_9; } }"
    }

    #[test]
    fn reroutes_multi_entry_while() {
        let p = parse_source(multi_entry_program()).unwrap();
        assert!(validate(&p).is_empty(), "{:?}", validate(&p));
        let q = preprocess_while_entries(&p);
        let m = &q.classes[0].methods[0];
        let catch_blocks = match &m.body[1].body {
            BlockBody::TryCatch { catch_blocks, .. } => catch_blocks,
            _ => panic!(),
        };
        // Inserted hop block precedes the while and is empty.
        assert_eq!(catch_blocks.len(), 3);
        let hop = &catch_blocks[0];
        assert!(matches!(&hop.body, BlockBody::Assigns(a) if a.is_empty()));
        match &catch_blocks[1].body {
            BlockBody::While { entry_phis, .. } => {
                assert_eq!(entry_phis[0].operands.len(), 2);
                assert_eq!(entry_phis[0].operands[0].0, hop.label);
                assert_eq!(entry_phis[0].operands[0].1, "v_2");
                assert_eq!(entry_phis[0].operands[1].0, Label::new("L6"));
            }
            _ => panic!(),
        }
        // Validates afterwards and the pass is idempotent.
        assert!(validate(&q).is_empty(), "{:?}", validate(&q));
        assert_eq!(preprocess_while_entries(&q), q);
    }

    #[test]
    fn leaves_restrictive_form_unchanged() {
        let text = "class A { ; int f(int x){ int a_1, a_2, a_3; ;
            L0: a_1 = 0;
            L1: join { a_2 = phi(L0:a_1, L2:a_3) } while (a_2 < x) {
                L2: a_3 = a_2 + 1;
            }
            L3: return a_2; } }";
        let p = parse_source(text).unwrap();
        assert_eq!(preprocess_while_entries(&p), p);
    }
}
