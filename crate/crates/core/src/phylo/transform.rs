use log::warn;

use super::shape::TreeClass;

/// Split depth over root depth after midpoint rooting an unrooted triplet
/// with pendant lengths `(a0, a1, b)`, where taxon 2 is the outgroup.
///
/// The root goes at the midpoint of the longest leaf-to-leaf path. When it
/// falls on the outgroup edge (`b >= max(a0, a1)`, ties included), the
/// ingroup split sits at depth `max(a0, a1)` below a root of depth
/// `(max(a0, a1) + b) / 2`. Otherwise the root lies on an ingroup edge, the
/// ingroup split is the root itself and the ratio is 1.
pub fn midpoint_root_ratio(a0: f64, a1: f64, b: f64) -> f64 {
    let longest_ingroup = a0.max(a1);
    if b >= longest_ingroup {
        2.0 * longest_ingroup / (longest_ingroup + b)
    } else {
        1.0
    }
}

/// Ingroup divergence relative to the root, from output coordinates
/// (see [`TreeClass::output_columns`]). `None` for quartets or a zero root.
pub fn divergence_ratio(class: TreeClass, row: &[f64]) -> Option<f64> {
    match class {
        TreeClass::UnrootedTriplet => {
            let r = midpoint_root_ratio(row[0], row[1], row[2]);
            r.is_finite().then_some(r)
        }
        TreeClass::ClockedTriplet | TreeClass::ClockedTripletFossil => {
            if row[1] > 0.0 {
                Some(row[0] / row[1])
            } else {
                warn!("skipping sample with zero root time");
                None
            }
        }
        TreeClass::UnrootedQuartet => None,
    }
}

/// Fossil age relative to the root, `(1 - gamma)·tau1/tau0`.
pub fn fossil_date(row: &[f64]) -> Option<f64> {
    if row[1] > 0.0 {
        Some((1.0 - row[2]) * row[0] / row[1])
    } else {
        warn!("skipping sample with zero root time");
        None
    }
}
