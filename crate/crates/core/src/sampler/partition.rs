use std::cmp::Ordering;
use std::collections::BinaryHeap;

use log::{debug, warn};

use crate::interval::round::div_down;
use crate::interval::{Interval, IntervalBox, RigorPolicy};

use super::exact::{exact_volume, Dyadic};
use super::target::TargetShape;
use super::SamplerError;

/// How many times a box whose enclosure fails is split further before giving up.
pub const DEFAULT_SPLIT_RETRIES: usize = 12;

/// One box of the partition with its range enclosure and derived masses.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionPiece {
    /// Creation index; lower indices own shared faces.
    pub id: usize,
    /// Index of the target piece this box belongs to.
    pub target: usize,
    pub bbox: IntervalBox,
    pub enclosure: Interval,
    /// `v(box) * d(enclosure)`.
    pub priority: f64,
    /// Upper bound of `weight * v(box) * max(0, enclosure.hi)`.
    pub upper_mass: f64,
    /// Lower bound of `weight * v(box) * max(0, enclosure.lo)`.
    pub lower_mass: f64,
}

/// When to stop refining.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefineBudget {
    pub max_pieces: usize,
    pub target_accept: Option<f64>,
}

impl RefineBudget {
    pub fn pieces(max_pieces: usize) -> Self {
        RefineBudget {
            max_pieces,
            target_accept: None,
        }
    }

    /// Refine until the acceptance lower bound reaches `accept`, or `max_pieces`.
    pub fn accept(accept: f64, max_pieces: usize) -> Self {
        RefineBudget {
            max_pieces,
            target_accept: Some(accept),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct HeapEntry {
    priority: f64,
    id: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    // max-heap on priority; among equals the older piece pops first
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// An adaptive partition of a target's domains into boxes.
#[derive(Clone, Debug)]
pub struct Partition {
    cells: Vec<PartitionPiece>,
    live: Vec<bool>,
    heap: BinaryHeap<HeapEntry>,
    live_count: usize,
    /// Exact masses of each cell, `(upper, lower)`.
    exact_masses: Vec<(Dyadic, Dyadic)>,
    /// Exact sums over live cells.
    upper: Dyadic,
    lower: Dyadic,
    labels: Vec<String>,
    split_retries: usize,
}

impl Partition {
    /// The coarsest partition: one box per target piece.
    pub fn new(target: &TargetShape) -> Result<Self, SamplerError> {
        let boxes = target
            .pieces()
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.domain.clone()))
            .collect();
        Self::from_boxes(target, boxes)
    }

    /// Uniform partition: each domain cut into `per_side` slices along every side.
    pub fn uniform(target: &TargetShape, per_side: usize) -> Result<Self, SamplerError> {
        let boxes = target
            .pieces()
            .iter()
            .enumerate()
            .flat_map(|(i, p)| p.domain.subdivide(per_side).into_iter().map(move |b| (i, b)))
            .collect();
        Self::from_boxes(target, boxes)
    }

    /// A partition from explicit boxes, which must tile their target domains.
    pub fn from_boxes(
        target: &TargetShape,
        boxes: Vec<(usize, IntervalBox)>,
    ) -> Result<Self, SamplerError> {
        if target.is_empty() {
            return Err(SamplerError::InvalidTarget("target has no pieces".into()));
        }
        let mut p = Partition {
            cells: Vec::with_capacity(boxes.len()),
            live: Vec::with_capacity(boxes.len()),
            heap: BinaryHeap::with_capacity(boxes.len()),
            live_count: 0,
            exact_masses: Vec::with_capacity(boxes.len()),
            upper: Dyadic::default(),
            lower: Dyadic::default(),
            labels: target.pieces().iter().map(|t| t.label.clone()).collect(),
            split_retries: DEFAULT_SPLIT_RETRIES,
        };
        for (t, b) in boxes {
            if t >= target.len() || b.dim() != target.piece(t).domain.dim() {
                return Err(SamplerError::InvalidTarget(format!(
                    "box for piece {t} does not match the target"
                )));
            }
            p.insert_enclosed(target, t, b, None, p.split_retries)?;
        }
        Ok(p)
    }

    /// Evaluates the enclosure over `b` (intersected with `parent`, an
    /// enclosure over a superset) and inserts it, splitting `b` further (up to
    /// `retries` levels) where the extension is undefined.
    fn insert_enclosed(
        &mut self,
        target: &TargetShape,
        t: usize,
        b: IntervalBox,
        parent: Option<Interval>,
        retries: usize,
    ) -> Result<(), SamplerError> {
        let piece = target.piece(t);
        let result = piece
            .shape
            .eval_interval(&b)
            .and_then(|y| y.ensure_finite().map_err(Into::into));
        match result {
            Ok(enclosure) => {
                let enclosure = parent
                    .and_then(|p| p.intersect(&enclosure))
                    .unwrap_or(enclosure);
                self.push_piece(t, piece.weight, b, enclosure);
                Ok(())
            }
            Err(e) => match b.bisect() {
                Some((l, r)) if retries > 0 => {
                    debug!("enclosure failed on {:?} ({e}); splitting", b);
                    self.insert_enclosed(target, t, l, parent, retries - 1)?;
                    self.insert_enclosed(target, t, r, parent, retries - 1)
                }
                _ => Err(SamplerError::EnclosureFailure {
                    label: piece.label.clone(),
                    domain: b,
                    source: e,
                }),
            },
        }
    }

    fn push_piece(&mut self, t: usize, weight: f64, bbox: IntervalBox, enclosure: Interval) {
        let id = self.cells.len();
        let heights = enclosure.clamp_nonnegative();
        let mass = bbox
            .volume_enclosure()
            .mul_with(heights, RigorPolicy::Outward)
            .mul_with(Interval::point(weight), RigorPolicy::Outward)
            .clamp_nonnegative();
        let scaled_volume = exact_volume(bbox.sides()).mul(&Dyadic::from_f64(weight));
        let exact = (
            scaled_volume.mul(&Dyadic::from_f64(heights.hi())),
            scaled_volume.mul(&Dyadic::from_f64(heights.lo())),
        );
        self.upper.add_assign(&exact.0);
        self.lower.add_assign(&exact.1);
        let priority = bbox.volume() * enclosure.diameter();
        self.heap.push(HeapEntry { priority, id });
        self.cells.push(PartitionPiece {
            id,
            target: t,
            bbox,
            enclosure,
            priority,
            upper_mass: mass.hi(),
            lower_mass: mass.lo(),
        });
        self.exact_masses.push(exact);
        self.live.push(true);
        self.live_count += 1;
    }

    /// Bisects the highest-priority piece. Returns `false` when no piece can be split.
    pub fn refine_step(&mut self, target: &TargetShape) -> Result<bool, SamplerError> {
        while let Some(HeapEntry { id, .. }) = self.heap.pop() {
            let Some((l, r)) = self.cells[id].bbox.bisect() else {
                // too thin to split; stays live but leaves the queue
                continue;
            };
            let (t, parent) = (self.cells[id].target, self.cells[id].enclosure);
            self.live[id] = false;
            self.live_count -= 1;
            let (upper, lower) = std::mem::take(&mut self.exact_masses[id]);
            self.upper.sub_assign(&upper);
            self.lower.sub_assign(&lower);
            self.insert_enclosed(target, t, l, Some(parent), self.split_retries)?;
            self.insert_enclosed(target, t, r, Some(parent), self.split_retries)?;
            return Ok(true);
        }
        Ok(false)
    }

    /// Refines until `budget` is met or nothing is left to split.
    pub fn refine(&mut self, target: &TargetShape, budget: RefineBudget) -> Result<(), SamplerError> {
        loop {
            if let Some(a) = budget.target_accept {
                if self.acceptance_lower_bound() >= a {
                    return Ok(());
                }
            }
            if self.live_count >= budget.max_pieces {
                if let Some(a) = budget.target_accept {
                    warn!(
                        "stopped at {} pieces with acceptance bound {:.4} below target {a}",
                        self.live_count,
                        self.acceptance_lower_bound()
                    );
                }
                return Ok(());
            }
            if !self.refine_step(target)? {
                return Ok(());
            }
        }
    }

    /// Number of live pieces.
    pub fn len(&self) -> usize {
        self.live_count
    }

    pub fn is_empty(&self) -> bool {
        self.live_count == 0
    }

    /// Live pieces in creation order.
    pub fn pieces(&self) -> impl Iterator<Item = &PartitionPiece> {
        self.cells
            .iter()
            .zip(&self.live)
            .filter_map(|(c, &alive)| alive.then_some(c))
    }

    pub fn piece(&self, id: usize) -> &PartitionPiece {
        &self.cells[id]
    }

    pub fn label(&self, target: usize) -> &str {
        &self.labels[target]
    }

    /// `[Σ lower mass, Σ upper mass]`, summed exactly and rounded outward once.
    pub fn np_enclosure(&self) -> Interval {
        Interval::saturated(
            self.lower.to_f64_directed(false).max(0.0),
            self.upper.to_f64_directed(true),
        )
    }

    /// `Σ lower_mass / Σ upper_mass`, rounded down; 0 when the envelope has no mass.
    pub fn acceptance_lower_bound(&self) -> f64 {
        let np = self.np_enclosure();
        if np.hi() <= 0.0 {
            return 0.0;
        }
        div_down(np.lo(), np.hi(), RigorPolicy::Outward).clamp(0.0, 1.0)
    }

    /// Envelope value at `theta` within the pieces labelled `label`: the
    /// upper enclosure bound of the lowest-index live piece containing it.
    pub fn envelope_at(&self, label: &str, theta: &[f64]) -> Result<f64, SamplerError> {
        self.owner(label, theta)
            .map(|p| p.enclosure.hi().max(0.0))
            .ok_or_else(|| SamplerError::OutOfDomain {
                label: label.to_string(),
                point: theta.to_vec(),
            })
    }

    /// Lowest-index live piece with the given label containing `theta`.
    pub fn owner(&self, label: &str, theta: &[f64]) -> Option<&PartitionPiece> {
        self.pieces()
            .find(|p| self.labels[p.target] == label && p.bbox.contains_point(theta))
    }
}

/// Starts from the target's domains and refines under `budget`.
pub fn build_partition(target: &TargetShape, budget: RefineBudget) -> Result<Partition, SamplerError> {
    let mut p = Partition::new(target)?;
    p.refine(target, budget)?;
    debug!(
        "partition: {} pieces, acceptance bound {:.6}",
        p.len(),
        p.acceptance_lower_bound()
    );
    Ok(p)
}
