use std::fmt;
use std::sync::Arc;

use crate::error::EvalError;
use crate::expr::ExprDag;
use crate::interval::{Interval, IntervalBox, RigorPolicy};

use super::SamplerError;

/// An unnormalised density with a real evaluation and an interval extension.
///
/// `eval_interval(B)` must contain `eval_real(x)` for every `x` in `B`.
pub trait Shape: Send + Sync {
    fn dim(&self) -> usize;

    fn eval_real(&self, x: &[f64]) -> Result<f64, EvalError>;

    fn eval_interval(&self, b: &IntervalBox) -> Result<Interval, EvalError>;

    /// Enclosure at a single point.
    fn eval_thin(&self, x: &[f64]) -> Result<Interval, EvalError> {
        self.eval_interval(&IntervalBox::thin(x))
    }
}

/// An [`ExprDag`] evaluated under a fixed rounding policy.
#[derive(Clone, Debug)]
pub struct DagShape {
    dag: ExprDag,
    policy: RigorPolicy,
}

impl DagShape {
    pub fn new(dag: ExprDag) -> Self {
        DagShape {
            dag,
            policy: RigorPolicy::Outward,
        }
    }

    pub fn with_policy(dag: ExprDag, policy: RigorPolicy) -> Self {
        DagShape { dag, policy }
    }

    pub fn dag(&self) -> &ExprDag {
        &self.dag
    }
}

impl Shape for DagShape {
    fn dim(&self) -> usize {
        self.dag.arity()
    }

    fn eval_real(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.dag.eval_real(x)
    }

    fn eval_interval(&self, b: &IntervalBox) -> Result<Interval, EvalError> {
        let mut scratch = Vec::with_capacity(self.dag.len());
        self.dag.eval_interval_with(b, self.policy, &mut scratch)
    }
}

/// One labelled domain of a target: a box, the shape over it and a prior weight.
#[derive(Clone)]
pub struct TargetPiece {
    pub label: String,
    pub domain: IntervalBox,
    pub shape: Arc<dyn Shape>,
    pub weight: f64,
}

impl fmt::Debug for TargetPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetPiece")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("weight", &self.weight)
            .finish_non_exhaustive()
    }
}

/// A target over one or more labelled boxes (e.g. one per tree topology).
#[derive(Clone, Debug, Default)]
pub struct TargetShape {
    pieces: Vec<TargetPiece>,
}

impl TargetShape {
    /// A single-box target with weight 1.
    pub fn single(
        label: impl Into<String>,
        domain: IntervalBox,
        shape: Arc<dyn Shape>,
    ) -> Result<Self, SamplerError> {
        let mut t = TargetShape::default();
        t.push(label, domain, shape, 1.0)?;
        Ok(t)
    }

    pub fn push(
        &mut self,
        label: impl Into<String>,
        domain: IntervalBox,
        shape: Arc<dyn Shape>,
        weight: f64,
    ) -> Result<(), SamplerError> {
        let label = label.into();
        if shape.dim() != domain.dim() {
            return Err(SamplerError::InvalidTarget(format!(
                "piece `{label}`: shape has dimension {} but domain has {}",
                shape.dim(),
                domain.dim()
            )));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(SamplerError::InvalidTarget(format!(
                "piece `{label}`: weight must be positive, got {weight}"
            )));
        }
        self.pieces.push(TargetPiece {
            label,
            domain,
            shape,
            weight,
        });
        Ok(())
    }

    pub fn pieces(&self) -> &[TargetPiece] {
        &self.pieces
    }

    pub fn piece(&self, i: usize) -> &TargetPiece {
        &self.pieces[i]
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }
}
