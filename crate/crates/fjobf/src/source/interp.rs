//! Reference interpreter for SSAFJ-EH.
//!
//! Blocks evaluate relative to the label of the dynamically preceding block;
//! `join` phis select operands by that label. An exception outcome carries
//! the label of the block that raised it, unchanged while it unwinds through
//! sequences, branches, and loops, until a try-catch consumes it; a method
//! call re-labels an escaping exception with the call block's own label.

use super::ast::*;
use crate::common::{BinOp, Constant, Label, TypeName};
use std::collections::BTreeMap;
use thiserror::Error;

pub type Location = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuntimeValue {
    Int(i64),
    Bool(bool),
    Str(String),
    Null,
    Loc(Location),
}

impl RuntimeValue {
    pub fn render(&self) -> String {
        match self {
            RuntimeValue::Int(n) => n.to_string(),
            RuntimeValue::Bool(b) => b.to_string(),
            RuntimeValue::Str(s) => s.clone(),
            RuntimeValue::Null => "null".into(),
            RuntimeValue::Loc(n) => format!("loc{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectS {
    pub class: TypeName,
    pub fields: BTreeMap<String, RuntimeValue>,
}

/// Store cells are dense: location `n` is the `n`-th allocation. Cells are
/// never removed and the next location never decreases.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StoreS {
    cells: Vec<ObjectS>,
}

impl StoreS {
    pub fn next_location(&self) -> Location {
        self.cells.len()
    }

    pub fn alloc(&mut self, obj: ObjectS) -> Location {
        self.cells.push(obj);
        self.cells.len() - 1
    }

    pub fn get(&self, loc: Location) -> Option<&ObjectS> {
        self.cells.get(loc)
    }

    pub fn get_mut(&mut self, loc: Location) -> Option<&mut ObjectS> {
        self.cells.get_mut(loc)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LEnvS {
    bindings: BTreeMap<String, RuntimeValue>,
}

impl LEnvS {
    pub fn bind(&mut self, name: impl Into<String>, v: RuntimeValue) {
        self.bindings.insert(name.into(), v);
    }

    pub fn get(&self, name: &str) -> Option<&RuntimeValue> {
        self.bindings.get(name)
    }

    pub fn snapshot(&self) -> BTreeMap<String, String> {
        self.bindings
            .iter()
            .map(|(k, v)| (k.clone(), v.render()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MethodOutcome {
    Normal(RuntimeValue),
    Raised { payload: RuntimeValue, label: Label },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum BlockOutcome {
    Normal { value: RuntimeValue, exit: Label },
    Raised { payload: RuntimeValue, label: Label },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("step budget of {0} block evaluations exceeded")]
    Budget(u64),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("no class named `{0}`")]
    NoSuchClass(String),
    #[error("class `{0}` has no method `{1}`")]
    NoSuchMethod(String, String),
    #[error("object of class `{0}` has no field `{1}`")]
    NoSuchField(String, String),
    #[error("{0}")]
    TypeError(String),
    #[error("phi for `{target}` has no operand for incoming label `{label}`")]
    MissingPhiOperand { target: String, label: Label },
}

/// One trace record per block entry.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TraceRec {
    pub label: String,
    pub pred: String,
    pub env_diff: BTreeMap<String, String>,
}

struct GEnvS<'p> {
    fields: BTreeMap<&'p str, &'p [(TypeName, String)]>,
    methods: BTreeMap<(&'p str, &'p str), &'p SourceMethod>,
}

impl<'p> GEnvS<'p> {
    fn new(p: &'p SourceProgram) -> Self {
        let mut fields = BTreeMap::new();
        let mut methods = BTreeMap::new();
        for c in &p.classes {
            fields.insert(c.name.as_str(), c.fields.as_slice());
            for m in &c.methods {
                methods.insert((c.name.as_str(), m.name.as_str()), m);
            }
        }
        GEnvS { fields, methods }
    }
}

pub const DEFAULT_BUDGET: u64 = 1_000_000;

pub struct SourceInterp<'p> {
    genv: GEnvS<'p>,
    pub store: StoreS,
    pub output: Vec<String>,
    budget: u64,
    steps: u64,
    trace: Option<Vec<TraceRec>>,
    last_env: BTreeMap<String, String>,
}

impl<'p> SourceInterp<'p> {
    pub fn new(program: &'p SourceProgram) -> Self {
        Self::with_budget(program, DEFAULT_BUDGET)
    }

    pub fn with_budget(program: &'p SourceProgram, budget: u64) -> Self {
        SourceInterp {
            genv: GEnvS::new(program),
            store: StoreS::default(),
            output: Vec::new(),
            budget,
            steps: 0,
            trace: None,
            last_env: BTreeMap::new(),
        }
    }

    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn take_trace(&mut self) -> Vec<TraceRec> {
        self.trace.take().unwrap_or_default()
    }

    pub fn steps_used(&self) -> u64 {
        self.steps
    }

    /// Allocates a fresh object of `class` with all fields null.
    pub fn alloc_object(&mut self, class: &str) -> Result<Location, EvalError> {
        let fields = self
            .genv
            .fields
            .get(class)
            .ok_or_else(|| EvalError::NoSuchClass(class.to_string()))?;
        let map = fields
            .iter()
            .map(|(_, f)| (f.clone(), RuntimeValue::Null))
            .collect();
        Ok(self.store.alloc(ObjectS {
            class: TypeName::Class(class.to_string()),
            fields: map,
        }))
    }

    pub fn set_field(
        &mut self,
        loc: Location,
        field: &str,
        value: RuntimeValue,
    ) -> Result<(), EvalError> {
        let obj = self
            .store
            .get_mut(loc)
            .ok_or_else(|| EvalError::TypeError(format!("dangling location loc{loc}")))?;
        if !obj.fields.contains_key(field) {
            return Err(EvalError::NoSuchField(
                obj.class.to_string(),
                field.to_string(),
            ));
        }
        obj.fields.insert(field.to_string(), value);
        Ok(())
    }

    pub fn eval_method_by_name(
        &mut self,
        class: &str,
        method: &str,
        receiver: RuntimeValue,
        arg: RuntimeValue,
    ) -> Result<MethodOutcome, EvalError> {
        let md = *self
            .genv
            .methods
            .get(&(class, method))
            .ok_or_else(|| EvalError::NoSuchMethod(class.to_string(), method.to_string()))?;
        self.eval_method(md, receiver, arg)
    }

    /// Method semantics: bind `this` and the parameter, null-initialize the
    /// locals, and evaluate the body with `L0` as the incoming label. An
    /// escaping exception keeps the label of its raising block.
    pub fn eval_method(
        &mut self,
        md: &'p SourceMethod,
        receiver: RuntimeValue,
        arg: RuntimeValue,
    ) -> Result<MethodOutcome, EvalError> {
        let mut lenv = LEnvS::default();
        lenv.bind("this", receiver);
        lenv.bind(md.param.1.clone(), arg);
        for (_, name) in &md.locals {
            lenv.bind(name.clone(), RuntimeValue::Null);
        }
        match self.eval_blocks(&md.body, &Label::new("L0"), &mut lenv)? {
            BlockOutcome::Normal { value, .. } => Ok(MethodOutcome::Normal(value)),
            BlockOutcome::Raised { payload, label } => Ok(MethodOutcome::Raised { payload, label }),
        }
    }

    fn eval_blocks(
        &mut self,
        blocks: &'p [Block],
        pred: &Label,
        lenv: &mut LEnvS,
    ) -> Result<BlockOutcome, EvalError> {
        let mut pred = pred.clone();
        let mut last = BlockOutcome::Normal {
            value: RuntimeValue::Null,
            exit: pred.clone(),
        };
        for b in blocks {
            match self.eval_block(b, &pred, lenv)? {
                BlockOutcome::Normal { value, exit } => {
                    pred = exit.clone();
                    last = BlockOutcome::Normal { value, exit };
                }
                raised => return Ok(raised),
            }
        }
        Ok(last)
    }

    fn charge(&mut self) -> Result<(), EvalError> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(EvalError::Budget(self.budget))
        } else {
            Ok(())
        }
    }

    fn record_trace(&mut self, label: &Label, pred: &Label, lenv: &LEnvS) {
        if self.trace.is_some() {
            let now = lenv.snapshot();
            let diff: BTreeMap<String, String> = now
                .iter()
                .filter(|(k, v)| self.last_env.get(*k) != Some(*v))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            self.last_env = now;
            if let Some(t) = &mut self.trace {
                t.push(TraceRec {
                    label: label.0.clone(),
                    pred: pred.0.clone(),
                    env_diff: diff,
                });
            }
        }
    }

    fn eval_block(
        &mut self,
        b: &'p Block,
        pred: &Label,
        lenv: &mut LEnvS,
    ) -> Result<BlockOutcome, EvalError> {
        self.charge()?;
        self.record_trace(&b.label, pred, lenv);
        let own = b.label.clone();
        match &b.body {
            BlockBody::Assigns(assigns) => {
                for a in assigns {
                    self.eval_assignment(a, lenv)?;
                }
                Ok(BlockOutcome::Normal {
                    value: RuntimeValue::Null,
                    exit: own,
                })
            }
            BlockBody::Return(e) => {
                let value = self.eval_expr(e, lenv)?;
                Ok(BlockOutcome::Normal { value, exit: own })
            }
            BlockBody::Throw(e) => {
                let payload = self.eval_expr(e, lenv)?;
                Ok(BlockOutcome::Raised {
                    payload,
                    label: own,
                })
            }
            BlockBody::MethodCall {
                target,
                receiver,
                method,
                arg,
            } => {
                let recv = self.eval_expr(receiver, lenv)?;
                let loc = match recv {
                    RuntimeValue::Loc(l) => l,
                    other => {
                        return Err(EvalError::TypeError(format!(
                            "method call on non-object `{}`",
                            other.render()
                        )))
                    }
                };
                let class = match &self.store.get(loc).unwrap().class {
                    TypeName::Class(c) => c.clone(),
                    TypeName::Exception => "Exception".to_string(),
                    other => other.to_string(),
                };
                let md = *self
                    .genv
                    .methods
                    .get(&(class.as_str(), method.as_str()))
                    .ok_or_else(|| EvalError::NoSuchMethod(class.clone(), method.clone()))?;
                let argv = self.eval_expr(arg, lenv)?;
                match self.eval_method(md, RuntimeValue::Loc(loc), argv)? {
                    MethodOutcome::Normal(v) => {
                        lenv.bind(target.clone(), v);
                        Ok(BlockOutcome::Normal {
                            value: RuntimeValue::Null,
                            exit: own,
                        })
                    }
                    // Escaping exceptions are re-labeled with the call
                    // block's label; the callee's env is discarded.
                    MethodOutcome::Raised { payload, .. } => Ok(BlockOutcome::Raised {
                        payload,
                        label: own,
                    }),
                }
            }
            BlockBody::TryCatch {
                try_blocks,
                raise_phis,
                exn_var,
                catch_blocks,
                join_phis,
                ..
            } => match self.eval_blocks(try_blocks, &own, lenv)? {
                BlockOutcome::Normal { value, exit } => {
                    resolve_phis(join_phis, &exit, lenv)?;
                    Ok(BlockOutcome::Normal { value, exit })
                }
                BlockOutcome::Raised { payload, label } => {
                    resolve_phis(raise_phis, &label, lenv)?;
                    lenv.bind(exn_var.clone(), payload);
                    match self.eval_blocks(catch_blocks, &label, lenv)? {
                        BlockOutcome::Normal { value, exit } => {
                            resolve_phis(join_phis, &exit, lenv)?;
                            Ok(BlockOutcome::Normal { value, exit })
                        }
                        raised => Ok(raised),
                    }
                }
            },
            BlockBody::While {
                entry_phis,
                cond,
                body,
            } => {
                let mut incoming = pred.clone();
                loop {
                    resolve_phis(entry_phis, &incoming, lenv)?;
                    let test = self.eval_expr(cond, lenv)?;
                    match test {
                        RuntimeValue::Bool(false) => {
                            return Ok(BlockOutcome::Normal {
                                value: RuntimeValue::Null,
                                exit: own,
                            })
                        }
                        RuntimeValue::Bool(true) => {
                            match self.eval_blocks(body, &own, lenv)? {
                                BlockOutcome::Normal { exit, .. } => {
                                    // Loop back: the body's exit label is the
                                    // incoming label for the entry phis.
                                    self.charge()?;
                                    incoming = exit;
                                }
                                raised => return Ok(raised),
                            }
                        }
                        other => {
                            return Err(EvalError::TypeError(format!(
                                "while condition evaluated to `{}`",
                                other.render()
                            )))
                        }
                    }
                }
            }
            BlockBody::IfElse {
                cond,
                then_blocks,
                else_blocks,
                join_phis,
            } => {
                let test = self.eval_expr(cond, lenv)?;
                let branch = match test {
                    RuntimeValue::Bool(true) => then_blocks,
                    RuntimeValue::Bool(false) => else_blocks,
                    other => {
                        return Err(EvalError::TypeError(format!(
                            "if condition evaluated to `{}`",
                            other.render()
                        )))
                    }
                };
                match self.eval_blocks(branch, &own, lenv)? {
                    BlockOutcome::Normal { value, exit } => {
                        resolve_phis(join_phis, &exit, lenv)?;
                        Ok(BlockOutcome::Normal { value, exit: own })
                    }
                    raised => Ok(raised),
                }
            }
        }
    }

    fn eval_assignment(&mut self, a: &Assignment, lenv: &mut LEnvS) -> Result<(), EvalError> {
        match a {
            Assignment::Var(x, e) => {
                let v = self.eval_expr(e, lenv)?;
                lenv.bind(x.clone(), v);
                Ok(())
            }
            Assignment::Field(recv, f, e) => {
                let r = self.eval_expr(recv, lenv)?;
                let loc = match r {
                    RuntimeValue::Loc(l) => l,
                    other => {
                        return Err(EvalError::TypeError(format!(
                            "field assignment on non-object `{}`",
                            other.render()
                        )))
                    }
                };
                let v = self.eval_expr(e, lenv)?;
                let obj = self.store.get_mut(loc).unwrap();
                obj.fields.insert(f.clone(), v);
                Ok(())
            }
            Assignment::Print(e) => {
                let v = self.eval_expr(e, lenv)?;
                self.output.push(v.render());
                Ok(())
            }
        }
    }

    fn eval_expr(&mut self, e: &Expr, lenv: &LEnvS) -> Result<RuntimeValue, EvalError> {
        match e {
            Expr::Const(c) => Ok(match c {
                Constant::Int(n) => RuntimeValue::Int(*n),
                Constant::Bool(b) => RuntimeValue::Bool(*b),
                Constant::Str(s) => RuntimeValue::Str(s.clone()),
                Constant::Null => RuntimeValue::Null,
            }),
            Expr::Var(x) => lenv
                .get(x)
                .cloned()
                .ok_or_else(|| EvalError::Unbound(x.clone())),
            Expr::This => lenv
                .get("this")
                .cloned()
                .ok_or_else(|| EvalError::Unbound("this".into())),
            Expr::Field(recv, f) => {
                let r = self.eval_expr(recv, lenv)?;
                let loc = match r {
                    RuntimeValue::Loc(l) => l,
                    other => {
                        return Err(EvalError::TypeError(format!(
                            "field access `.{f}` on non-object `{}`",
                            other.render()
                        )))
                    }
                };
                let obj = self.store.get(loc).unwrap();
                obj.fields.get(f).cloned().ok_or_else(|| {
                    EvalError::NoSuchField(obj.class.to_string(), f.clone())
                })
            }
            Expr::New(t) => {
                let fields: BTreeMap<String, RuntimeValue> = match t {
                    TypeName::Exception => BTreeMap::new(),
                    TypeName::Class(c) => self
                        .genv
                        .fields
                        .get(c.as_str())
                        .ok_or_else(|| EvalError::NoSuchClass(c.clone()))?
                        .iter()
                        .map(|(_, f)| (f.clone(), RuntimeValue::Null))
                        .collect(),
                    other => {
                        return Err(EvalError::TypeError(format!(
                            "cannot instantiate `{other}`"
                        )))
                    }
                };
                let loc = self.store.alloc(ObjectS {
                    class: t.clone(),
                    fields,
                });
                Ok(RuntimeValue::Loc(loc))
            }
            Expr::BinOp(op, a, b) => {
                let va = self.eval_expr(a, lenv)?;
                let vb = self.eval_expr(b, lenv)?;
                apply_binop(*op, va, vb)
            }
        }
    }
}

pub fn apply_binop(
    op: BinOp,
    a: RuntimeValue,
    b: RuntimeValue,
) -> Result<RuntimeValue, EvalError> {
    use RuntimeValue::*;
    match (op, &a, &b) {
        (BinOp::Add, Int(x), Int(y)) => Ok(Int(x + y)),
        // String concatenation renders the other operand; println arguments
        // are the only place the type checker story allows strings.
        (BinOp::Add, Str(_), _) | (BinOp::Add, _, Str(_)) => {
            Ok(Str(format!("{}{}", a.render(), b.render())))
        }
        (BinOp::Sub, Int(x), Int(y)) => Ok(Int(x - y)),
        (BinOp::Lt, Int(x), Int(y)) => Ok(Bool(x < y)),
        (BinOp::Gt, Int(x), Int(y)) => Ok(Bool(x > y)),
        (BinOp::Eq, Int(x), Int(y)) => Ok(Bool(x == y)),
        (BinOp::Eq, Bool(x), Bool(y)) => Ok(Bool(x == y)),
        (BinOp::Eq, Str(x), Str(y)) => Ok(Bool(x == y)),
        (BinOp::Eq, Null, Null) => Ok(Bool(true)),
        (BinOp::Eq, Loc(x), Loc(y)) => Ok(Bool(x == y)),
        (BinOp::Eq, Null, Loc(_)) | (BinOp::Eq, Loc(_), Null) => Ok(Bool(false)),
        _ => Err(EvalError::TypeError(format!(
            "operator `{op}` not defined on `{}` and `{}`",
            a.render(),
            b.render()
        ))),
    }
}

/// Applies a phi group for the given incoming label. Either no phi in the
/// group names the label (the group is skipped) or all must name it.
pub fn resolve_phis(phis: &[Phi], incoming: &Label, lenv: &mut LEnvS) -> Result<(), EvalError> {
    let any = phis
        .iter()
        .any(|p| p.operands.iter().any(|(l, _)| l == incoming));
    if !any {
        return Ok(());
    }
    for p in phis {
        let source = p
            .operands
            .iter()
            .find(|(l, _)| l == incoming)
            .map(|(_, x)| x.clone())
            .ok_or_else(|| EvalError::MissingPhiOperand {
                target: p.target.clone(),
                label: incoming.clone(),
            })?;
        let v = lenv
            .get(&source)
            .cloned()
            .ok_or(EvalError::Unbound(source))?;
        lenv.bind(p.target.clone(), v);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::parser::parse_source;

    #[test]
    fn identity_method() {
        let p = parse_source("class A { ; int id(int x){ ; L0: return x; } }").unwrap();
        let mut interp = SourceInterp::new(&p);
        let recv = interp.alloc_object("A").unwrap();
        let out = interp
            .eval_method_by_name("A", "id", RuntimeValue::Loc(recv), RuntimeValue::Int(7))
            .unwrap();
        assert_eq!(out, MethodOutcome::Normal(RuntimeValue::Int(7)));
    }

    #[test]
    fn resolve_phis_examples() {
        let phis = vec![Phi {
            target: "r_2".into(),
            operands: vec![
                (Label::new("L3"), "r_7".into()),
                (Label::new("L8"), "r_1".into()),
            ],
        }];
        let mut lenv = LEnvS::default();
        lenv.bind("r_1", RuntimeValue::Int(-1));
        resolve_phis(&phis, &Label::new("L8"), &mut lenv).unwrap();
        assert_eq!(lenv.get("r_2"), Some(&RuntimeValue::Int(-1)));

        // Empty phi list leaves the env unchanged.
        let before = lenv.clone();
        resolve_phis(&[], &Label::new("L1"), &mut lenv).unwrap();
        assert_eq!(before, lenv);

        // Direct lookup.
        let phis = vec![Phi {
            target: "i_3".into(),
            operands: vec![
                (Label::new("L4"), "i_1".into()),
                (Label::new("L7"), "i_5".into()),
            ],
        }];
        let mut lenv = LEnvS::default();
        lenv.bind("i_5", RuntimeValue::Int(3));
        resolve_phis(&phis, &Label::new("L7"), &mut lenv).unwrap();
        assert_eq!(lenv.get("i_3"), Some(&RuntimeValue::Int(3)));
    }

    #[test]
    fn throw_short_circuits_sequence() {
        let text = "class A { ; int f(int x){ int a_1; ;
            L0: try {
              L1: throw new Exception();
              L2: a_1 = 1;
            } join { } catch (Exception e) {
              L3: println(\"caught\");
            } join { }
            L4: return x; } }";
        let p = parse_source(text).unwrap();
        let mut interp = SourceInterp::new(&p);
        let recv = interp.alloc_object("A").unwrap();
        let out = interp
            .eval_method_by_name("A", "f", RuntimeValue::Loc(recv), RuntimeValue::Int(5))
            .unwrap();
        assert_eq!(out, MethodOutcome::Normal(RuntimeValue::Int(5)));
        assert_eq!(interp.output, vec!["caught".to_string()]);
    }

    #[test]
    fn budget_is_enforced() {
        let text = "class A { ; int f(int x){ ;
            L0: while (true) {
              L1: println(1);
            }
            L2: return x; } }";
        let p = parse_source(text).unwrap();
        let mut interp = SourceInterp::with_budget(&p, 100);
        let recv = interp.alloc_object("A").unwrap();
        let err = interp
            .eval_method_by_name("A", "f", RuntimeValue::Loc(recv), RuntimeValue::Int(5))
            .unwrap_err();
        assert!(matches!(err, EvalError::Budget(100)));
        assert!(interp.steps_used() <= 101);
    }

    #[test]
    fn new_allocates_with_null_fields() {
        let text = "class C { int f; ; C mk(int x){ C c_1; ; L0: c_1 = new C(); L1: return c_1; } }";
        let p = parse_source(text).unwrap();
        let mut interp = SourceInterp::new(&p);
        let recv = interp.alloc_object("C").unwrap();
        let out = interp
            .eval_method_by_name("C", "mk", RuntimeValue::Loc(recv), RuntimeValue::Int(0))
            .unwrap();
        match out {
            MethodOutcome::Normal(RuntimeValue::Loc(l)) => {
                let obj = interp.store.get(l).unwrap();
                assert_eq!(obj.fields.get("f"), Some(&RuntimeValue::Null));
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }
}
