use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::interval::{Interval, IntervalBox};
use crate::sampler::{Shape, TargetShape};

use super::likelihood::{quartet_likelihood, rooted_likelihood, star_likelihood, stationary, QuartetTopology};
use super::model::{transition_matrix, SubstModel};
use super::scalar::Scalar;
use super::{Nucleotide, PhyloError, SitePatternData};

/// Likelihood of one site pattern at fixed coordinates.
type SiteFn<'a, S> = Box<dyn Fn(&[Nucleotide]) -> S + 'a>;

/// Tree space sampled over, and the coordinates of a point in it.
///
/// | class | coordinates |
/// |---|---|
/// | unrooted triplet | pendant lengths `t1, t2, t3` |
/// | clocked triplet | ingroup tip length `tau1`, internal edge `d` (root at `tau1 + d`) |
/// | clocked triplet, fossil | as above plus `gamma`, the fossil tip as a fraction of `tau1` |
/// | unrooted quartet | pendant lengths `t1..t4`, internal edge `t0` |
///
/// Every branch coordinate ranges over the same interval, so the prior is
/// uniform over branch lengths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeClass {
    UnrootedTriplet,
    ClockedTriplet,
    ClockedTripletFossil,
    UnrootedQuartet,
}

impl TreeClass {
    pub const ALL: [TreeClass; 4] = [
        TreeClass::UnrootedTriplet,
        TreeClass::ClockedTriplet,
        TreeClass::ClockedTripletFossil,
        TreeClass::UnrootedQuartet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TreeClass::UnrootedTriplet => "unrooted-triplet",
            TreeClass::ClockedTriplet => "clocked-triplet",
            TreeClass::ClockedTripletFossil => "clocked-triplet-fossil",
            TreeClass::UnrootedQuartet => "unrooted-quartet",
        }
    }

    pub fn n_taxa(self) -> usize {
        match self {
            TreeClass::UnrootedQuartet => 4,
            _ => 3,
        }
    }

    /// Dimension of the sampled coordinates.
    pub fn dim(self) -> usize {
        match self {
            TreeClass::UnrootedTriplet => 3,
            TreeClass::ClockedTriplet => 2,
            TreeClass::ClockedTripletFossil => 3,
            TreeClass::UnrootedQuartet => 5,
        }
    }

    /// Columns written for each sample.
    pub fn output_columns(self) -> &'static [&'static str] {
        match self {
            TreeClass::UnrootedTriplet => &["t1", "t2", "t3"],
            TreeClass::ClockedTriplet => &["tau1", "tau0"],
            TreeClass::ClockedTripletFossil => &["tau1", "tau0", "gamma"],
            TreeClass::UnrootedQuartet => &["t1", "t2", "t3", "t4", "t0"],
        }
    }

    /// The class whose output columns are exactly `columns`.
    pub fn from_output_columns(columns: &[&str]) -> Option<TreeClass> {
        Self::ALL.into_iter().find(|c| c.output_columns() == columns)
    }

    /// Sampled coordinates to output values (root time for clocked classes).
    pub fn to_output(self, theta: &[f64]) -> Vec<f64> {
        match self {
            TreeClass::ClockedTriplet | TreeClass::ClockedTripletFossil => {
                let mut out = vec![theta[0], theta[0] + theta[1]];
                out.extend_from_slice(&theta[2..]);
                out
            }
            _ => theta.to_vec(),
        }
    }

    pub fn domain(self, bounds: DomainBounds) -> IntervalBox {
        let mut sides = vec![(bounds.lo, bounds.hi); self.dim()];
        if self == TreeClass::ClockedTripletFossil {
            sides[2] = (0.0, 1.0);
        }
        IntervalBox::from_bounds(&sides).expect("validated bounds")
    }

    fn is_branch_coordinate(self, k: usize) -> bool {
        !(self == TreeClass::ClockedTripletFossil && k == 2)
    }
}

impl fmt::Display for TreeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TreeClass {
    type Err = PhyloError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| PhyloError::Domain(format!("unknown tree class `{s}`")))
    }
}

/// Range of every branch-length coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBounds {
    pub lo: f64,
    pub hi: f64,
}

impl Default for DomainBounds {
    fn default() -> Self {
        DomainBounds { lo: 1e-10, hi: 10.0 }
    }
}

impl DomainBounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self, PhyloError> {
        if lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi {
            Ok(DomainBounds { lo, hi })
        } else {
            Err(PhyloError::Domain(format!("need 0 <= lo < hi, got [{lo}, {hi}]")))
        }
    }
}

/// `exp(Σ count·ln L(pattern | θ) - log_scale)` for one tree class and topology.
#[derive(Clone, Debug)]
pub struct TreeShape {
    model: SubstModel,
    class: TreeClass,
    topology: Option<QuartetTopology>,
    patterns: Vec<(Vec<Nucleotide>, f64)>,
    log_scale: f64,
}

impl TreeShape {
    /// `topology` is required for quartets and ignored otherwise.
    pub fn new(
        data: &SitePatternData,
        model: SubstModel,
        class: TreeClass,
        topology: Option<QuartetTopology>,
    ) -> Result<Self, PhyloError> {
        if data.taxa().len() != class.n_taxa() {
            return Err(PhyloError::TaxaCount {
                expected: class.n_taxa().to_string(),
                got: data.taxa().len(),
            });
        }
        let topology = match class {
            TreeClass::UnrootedQuartet => Some(topology.ok_or_else(|| {
                PhyloError::Domain("a quartet shape needs a topology".into())
            })?),
            _ => None,
        };
        Ok(TreeShape {
            model,
            class,
            topology,
            patterns: data
                .patterns()
                .iter()
                .map(|(p, c)| (p.states().to_vec(), *c as f64))
                .collect(),
            log_scale: 0.0,
        })
    }

    /// Divides the shape by `exp(log_scale)`.
    pub fn with_log_scale(mut self, log_scale: f64) -> Self {
        self.log_scale = log_scale;
        self
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn class(&self) -> TreeClass {
        self.class
    }

    pub fn model(&self) -> &SubstModel {
        &self.model
    }

    /// `Σ count·ln L(pattern | θ)` at sampled coordinates `theta`.
    pub fn log_likelihood<S: Scalar>(&self, theta: &[S]) -> S {
        let pi = stationary::<S>(&self.model);
        let p = |t: S| transition_matrix(&self.model, t);
        let site: SiteFn<'_, S> = match self.class {
            TreeClass::UnrootedTriplet => {
                let mats = [p(theta[0]), p(theta[1]), p(theta[2])];
                Box::new(move |x| star_likelihood(&pi, &mats, x))
            }
            TreeClass::ClockedTriplet | TreeClass::ClockedTripletFossil => {
                let (tip, internal) = (theta[0], theta[1]);
                let fossil_tip = match self.class {
                    TreeClass::ClockedTripletFossil => theta[2] * tip,
                    _ => tip,
                };
                let mats = [p(fossil_tip), p(tip), p(internal), p(tip + internal)];
                Box::new(move |x| rooted_likelihood(&pi, &mats, x))
            }
            TreeClass::UnrootedQuartet => {
                let mats = [p(theta[0]), p(theta[1]), p(theta[2]), p(theta[3]), p(theta[4])];
                let topology = self.topology.expect("quartet topology");
                Box::new(move |x| quartet_likelihood(&pi, &mats, topology, x))
            }
        };
        self.patterns
            .iter()
            .map(|(x, count)| S::from_f64(*count) * site(x).ln())
            .fold(S::from_f64(0.0), |acc, v| acc + v)
    }

    fn check_point(&self, theta: &[f64]) -> Result<(), EvalError> {
        if theta.len() != self.class.dim() {
            return Err(EvalError::DimensionMismatch {
                expected: self.class.dim(),
                got: theta.len(),
            });
        }
        for (k, &v) in theta.iter().enumerate() {
            let ok = if self.class.is_branch_coordinate(k) {
                v >= 0.0 && v.is_finite()
            } else {
                (0.0..=1.0).contains(&v)
            };
            if !ok {
                return Err(EvalError::Domain {
                    function: if self.class.is_branch_coordinate(k) {
                        "branch length"
                    } else {
                        "fossil fraction"
                    },
                    value: v,
                });
            }
        }
        Ok(())
    }
}

impl Shape for TreeShape {
    fn dim(&self) -> usize {
        self.class.dim()
    }

    fn eval_real(&self, theta: &[f64]) -> Result<f64, EvalError> {
        self.check_point(theta)?;
        let v = (self.log_likelihood(theta) - self.log_scale).exp();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    fn eval_interval(&self, b: &IntervalBox) -> Result<Interval, EvalError> {
        self.check_point(&b.sides().iter().map(|s| s.lo()).collect::<Vec<_>>())?;
        self.check_point(&b.sides().iter().map(|s| s.hi()).collect::<Vec<_>>())?;
        let ll = self.log_likelihood(b.sides());
        let scaled = ll - Interval::point(self.log_scale);
        Ok(scaled.exp_saturating().ensure_finite()?)
    }
}

/// Grid points per coordinate used to pick the rescaling constant.
fn scale_grid(class: TreeClass) -> usize {
    match class.dim() {
        d if d <= 3 => 24,
        _ => 9,
    }
}

/// Largest log-likelihood on a coarse grid (log-spaced along branch lengths),
/// taken over every shape.
fn grid_max_log_likelihood(shapes: &[TreeShape], bounds: DomainBounds) -> f64 {
    let class = shapes[0].class;
    let n = scale_grid(class);
    let lo = bounds.lo.max(1e-6 * bounds.hi);
    let axis = |k: usize| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let s = (i as f64 + 0.5) / n as f64;
                if class.is_branch_coordinate(k) {
                    (lo.ln() + s * (bounds.hi.ln() - lo.ln())).exp()
                } else {
                    s
                }
            })
            .collect()
    };
    let axes: Vec<Vec<f64>> = (0..class.dim()).map(axis).collect();
    let mut best = f64::NEG_INFINITY;
    let mut idx = vec![0usize; class.dim()];
    let mut theta = vec![0.0; class.dim()];
    loop {
        for (k, &i) in idx.iter().enumerate() {
            theta[k] = axes[k][i];
        }
        for s in shapes {
            best = best.max(s.log_likelihood(&theta));
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return best;
            }
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn class_shapes(
    data: &SitePatternData,
    class: TreeClass,
    model: SubstModel,
) -> Result<(Vec<TreeShape>, Vec<Option<QuartetTopology>>), PhyloError> {
    let topologies: Vec<Option<QuartetTopology>> = match class {
        TreeClass::UnrootedQuartet => QuartetTopology::ALL.into_iter().map(Some).collect(),
        _ => vec![None],
    };
    let shapes = topologies
        .iter()
        .map(|&t| TreeShape::new(data, model, class, t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((shapes, topologies))
}

fn log_scale_of(data: &SitePatternData, shapes: &[TreeShape], bounds: DomainBounds) -> f64 {
    if data.patterns().is_empty() {
        0.0
    } else {
        grid_max_log_likelihood(shapes, bounds)
    }
}

/// The constant `C` that [`dataset_log_shape`] subtracts from the log-likelihood.
pub fn dataset_log_scale(
    data: &SitePatternData,
    class: TreeClass,
    model: SubstModel,
    bounds: DomainBounds,
) -> Result<f64, PhyloError> {
    let (shapes, _) = class_shapes(data, class, model)?;
    Ok(log_scale_of(data, &shapes, bounds))
}

/// The posterior shape under a uniform prior on `class.domain(bounds)` (and
/// on the three topologies for quartets), rescaled by the largest grid
/// log-likelihood so that its values stay in floating-point range. Quartet
/// topologies share one rescaling constant.
pub fn dataset_log_shape(
    data: &SitePatternData,
    class: TreeClass,
    model: SubstModel,
    bounds: DomainBounds,
) -> Result<TargetShape, PhyloError> {
    let (shapes, topologies) = class_shapes(data, class, model)?;
    let scale = log_scale_of(data, &shapes, bounds);
    let domain = class.domain(bounds);
    let mut target = TargetShape::default();
    for (shape, topology) in shapes.into_iter().zip(topologies) {
        let label = topology.map_or(class.name(), |t| t.label());
        target
            .push(label, domain.clone(), Arc::new(shape.with_log_scale(scale)), 1.0)
            .map_err(|e| PhyloError::Domain(e.to_string()))?;
    }
    Ok(target)
}
