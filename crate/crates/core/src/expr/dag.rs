use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::interval::{Interval, IntervalBox, IntervalError, RigorPolicy, StdFn};

pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnaryOp {
    Neg,
    Std(StdFn),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ExprNode {
    /// A real constant. `enclosure` contains the exact real the constant
    /// stands for, which may differ from `value` when it came from a decimal
    /// literal that is not a machine number.
    Const { value: f64, enclosure: Interval },
    Var(usize),
    Binary(BinaryOp, NodeId, NodeId),
    Unary(UnaryOp, NodeId),
    IntPow(NodeId, i32),
}

/// Structural key used for hash-consing; floats are compared bitwise.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum NodeKey {
    Const(u64, u64, u64),
    Var(usize),
    Binary(BinaryOp, NodeId, NodeId),
    Unary(UnaryOp, NodeId),
    IntPow(NodeId, i32),
}

impl From<&ExprNode> for NodeKey {
    fn from(n: &ExprNode) -> Self {
        match *n {
            ExprNode::Const { value, enclosure } => NodeKey::Const(
                value.to_bits(),
                enclosure.lo().to_bits(),
                enclosure.hi().to_bits(),
            ),
            ExprNode::Var(i) => NodeKey::Var(i),
            ExprNode::Binary(op, a, b) => NodeKey::Binary(op, a, b),
            ExprNode::Unary(op, a) => NodeKey::Unary(op, a),
            ExprNode::IntPow(a, n) => NodeKey::IntPow(a, n),
        }
    }
}

/// Builds a DAG bottom-up, sharing structurally identical subexpressions.
#[derive(Default)]
pub struct DagBuilder {
    nodes: Vec<ExprNode>,
    index: HashMap<NodeKey, NodeId>,
}

impl DagBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, node: ExprNode) -> NodeId {
        let key = NodeKey::from(&node);
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node);
        self.index.insert(key, id);
        id
    }

    /// An exact machine-number constant.
    pub fn constant(&mut self, value: f64) -> NodeId {
        self.intern(ExprNode::Const {
            value,
            enclosure: Interval::point(value),
        })
    }

    /// A constant known only to lie in `enclosure`; `value` is used for point evaluation.
    pub fn constant_enclosed(&mut self, value: f64, enclosure: Interval) -> NodeId {
        debug_assert!(enclosure.contains(value));
        self.intern(ExprNode::Const { value, enclosure })
    }

    pub fn var(&mut self, index: usize) -> NodeId {
        self.intern(ExprNode::Var(index))
    }

    pub fn binary(&mut self, op: BinaryOp, a: NodeId, b: NodeId) -> NodeId {
        self.intern(ExprNode::Binary(op, a, b))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary(BinaryOp::Add, a, b)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary(BinaryOp::Sub, a, b)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary(BinaryOp::Mul, a, b)
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary(BinaryOp::Div, a, b)
    }

    pub fn neg(&mut self, a: NodeId) -> NodeId {
        self.intern(ExprNode::Unary(UnaryOp::Neg, a))
    }

    pub fn apply(&mut self, f: StdFn, a: NodeId) -> NodeId {
        self.intern(ExprNode::Unary(UnaryOp::Std(f), a))
    }

    pub fn powi(&mut self, a: NodeId, n: i32) -> NodeId {
        self.intern(ExprNode::IntPow(a, n))
    }

    /// Finishes the DAG. `arity` must exceed every variable index used.
    ///
    /// Nodes not reachable from `root` are dropped.
    pub fn finish(self, root: NodeId, arity: usize) -> ExprDag {
        let max_var = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                ExprNode::Var(i) => Some(*i + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        assert!(max_var <= arity, "variable x{} exceeds arity {arity}", max_var - 1);
        ExprDag::prune(self.nodes, root, arity)
    }
}

/// An elementary function as a topologically ordered node array.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExprDag {
    nodes: Vec<ExprNode>,
    root: NodeId,
    arity: usize,
}

impl ExprDag {
    fn prune(nodes: Vec<ExprNode>, root: NodeId, arity: usize) -> ExprDag {
        let mut live = vec![false; nodes.len()];
        live[root] = true;
        for i in (0..=root).rev() {
            if !live[i] {
                continue;
            }
            match nodes[i] {
                ExprNode::Binary(_, a, b) => {
                    live[a] = true;
                    live[b] = true;
                }
                ExprNode::Unary(_, a) | ExprNode::IntPow(a, _) => live[a] = true,
                _ => {}
            }
        }
        let mut remap = vec![usize::MAX; nodes.len()];
        let mut kept = Vec::new();
        for (i, n) in nodes.into_iter().enumerate().take(root + 1) {
            if !live[i] {
                continue;
            }
            remap[i] = kept.len();
            kept.push(match n {
                ExprNode::Binary(op, a, b) => ExprNode::Binary(op, remap[a], remap[b]),
                ExprNode::Unary(op, a) => ExprNode::Unary(op, remap[a]),
                ExprNode::IntPow(a, k) => ExprNode::IntPow(remap[a], k),
                leaf => leaf,
            });
        }
        let root = kept.len() - 1;
        ExprDag {
            nodes: kept,
            root,
            arity,
        }
    }

    pub fn nodes(&self) -> &[ExprNode] {
        &self.nodes
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same function, declared over `arity` inputs (at least the current arity).
    pub fn with_arity(mut self, arity: usize) -> ExprDag {
        assert!(arity >= self.arity);
        self.arity = arity;
        self
    }

    fn check_dim(&self, got: usize) -> Result<(), EvalError> {
        if got == self.arity {
            Ok(())
        } else {
            Err(EvalError::DimensionMismatch {
                expected: self.arity,
                got,
            })
        }
    }

    pub fn eval_real(&self, x: &[f64]) -> Result<f64, EvalError> {
        let mut scratch = Vec::with_capacity(self.nodes.len());
        self.eval_real_with(x, &mut scratch)
    }

    /// Point evaluation reusing a caller-owned buffer.
    pub fn eval_real_with(&self, x: &[f64], scratch: &mut Vec<f64>) -> Result<f64, EvalError> {
        self.check_dim(x.len())?;
        scratch.clear();
        for node in &self.nodes {
            let v = match *node {
                ExprNode::Const { value, .. } => value,
                ExprNode::Var(i) => x[i],
                ExprNode::Binary(op, a, b) => {
                    let (a, b) = (scratch[a], scratch[b]);
                    match op {
                        BinaryOp::Add => a + b,
                        BinaryOp::Sub => a - b,
                        BinaryOp::Mul => a * b,
                        BinaryOp::Div if b == 0.0 => return Err(EvalError::DivisionByZero),
                        BinaryOp::Div => a / b,
                    }
                }
                ExprNode::Unary(UnaryOp::Neg, a) => -scratch[a],
                ExprNode::Unary(UnaryOp::Std(f), a) => {
                    f.eval_real(scratch[a]).map_err(|e| match e {
                        IntervalError::Domain { function, lo, .. } => {
                            EvalError::Domain { function, value: lo }
                        }
                        _ => EvalError::NonFinite,
                    })?
                }
                ExprNode::IntPow(a, n) => {
                    let base = scratch[a];
                    if n < 0 && base == 0.0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    base.powi(n)
                }
            };
            if !v.is_finite() {
                return Err(EvalError::NonFinite);
            }
            scratch.push(v);
        }
        Ok(scratch[self.root])
    }

    /// The natural interval extension over `x`, outward rounded.
    pub fn eval_interval(&self, x: &IntervalBox) -> Result<Interval, EvalError> {
        let mut scratch = Vec::with_capacity(self.nodes.len());
        self.eval_interval_with(x, RigorPolicy::Outward, &mut scratch)
    }

    /// Interval evaluation under `policy` reusing a caller-owned buffer.
    pub fn eval_interval_with(
        &self,
        x: &IntervalBox,
        policy: RigorPolicy,
        scratch: &mut Vec<Interval>,
    ) -> Result<Interval, EvalError> {
        self.check_dim(x.dim())?;
        scratch.clear();
        for node in &self.nodes {
            let v = match *node {
                ExprNode::Const { enclosure, .. } => enclosure,
                ExprNode::Var(i) => x.side(i),
                ExprNode::Binary(op, a, b) => {
                    let (a, b) = (scratch[a], scratch[b]);
                    match op {
                        BinaryOp::Add => a.add_with(b, policy),
                        BinaryOp::Sub => a.sub_with(b, policy),
                        BinaryOp::Mul => a.mul_with(b, policy),
                        BinaryOp::Div => {
                            if b.contains_zero() {
                                return Err(IntervalError::DivisorContainsZero {
                                    lo: b.lo(),
                                    hi: b.hi(),
                                }
                                .into());
                            }
                            a.div_with(b, policy)
                        }
                    }
                }
                ExprNode::Unary(UnaryOp::Neg, a) => -scratch[a],
                ExprNode::Unary(UnaryOp::Std(f), a) => f.eval_interval(scratch[a], policy)?,
                ExprNode::IntPow(a, n) => scratch[a].powi_with(n, policy)?,
            };
            scratch.push(v.ensure_finite()?);
        }
        Ok(scratch[self.root])
    }

    /// Hull of the interval extension over the uniform `k`-way subdivision of `x`.
    pub fn mesh_refine_enclosure(&self, x: &IntervalBox, k: usize) -> Result<Interval, EvalError> {
        let mut scratch = Vec::with_capacity(self.nodes.len());
        let mut hull: Option<Interval> = None;
        for piece in x.subdivide(k) {
            let y = self.eval_interval_with(&piece, RigorPolicy::Outward, &mut scratch)?;
            hull = Some(hull.map_or(y, |h| h.hull(&y)));
        }
        Ok(hull.expect("subdivision is never empty"))
    }
}
