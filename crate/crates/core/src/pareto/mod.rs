//! Pareto dominance, non-dominated sorting, crowding distance and quality
//! indicators. All objectives are minimized.

mod hypervolume;
mod indicators;

use std::cmp::Ordering;

use thiserror::Error;

pub use hypervolume::hypervolume;
pub use indicators::{igd, igd_plus};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParetoError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
}

/// `a` dominates `b`: no worse everywhere and strictly better somewhere.
///
/// # Panics
///
/// If the vectors have different lengths.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    assert_eq!(a.len(), b.len(), "dominance between vectors of different length");
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// `a` is no worse than `b` in every component.
pub fn weakly_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub(crate) fn check_dims<P: AsRef<[f64]>>(points: &[P], dim: usize) -> Result<(), ParetoError> {
    match points.iter().map(|p| p.as_ref().len()).find(|&d| d != dim) {
        Some(found) => Err(ParetoError::DimensionMismatch { expected: dim, found }),
        None => Ok(()),
    }
}

/// Population split into ranked fronts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrontPartition {
    /// `fronts[0]` is the non-dominated set; indices ascend within a front.
    pub fronts: Vec<Vec<usize>>,
    /// Front index of every population member.
    pub rank: Vec<usize>,
}

/// Fast non-dominated sorting.
pub fn non_dominated_sort<P: AsRef<[f64]>>(points: &[P]) -> Result<FrontPartition, ParetoError> {
    let first = points.first().ok_or(ParetoError::Empty("population"))?;
    check_dims(points, first.as_ref().len())?;
    let n = points.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (points[i].as_ref(), points[j].as_ref());
            if dominates(a, b) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates(b, a) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut rank = vec![0usize; n];
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            rank[p] = fronts.len();
            for &q in &dominates_list[p] {
                dominated_by_count[q] -= 1;
                if dominated_by_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    Ok(FrontPartition { fronts, rank })
}

/// Indices of the non-dominated members, ascending.
pub fn non_dominated_indices<P: AsRef<[f64]>>(points: &[P]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !points.iter().any(|q| dominates(q.as_ref(), points[i].as_ref())))
        .collect()
}

/// Crowding distance of each member of one front.
///
/// Boundary members of every objective get `+inf`; an objective whose values
/// are all equal contributes nothing. Fronts of two or fewer members are all
/// `+inf`.
pub fn crowding_distance<P: AsRef<[f64]>>(front: &[P]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let dims = front[0].as_ref().len();
    let mut dist = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for m in 0..dims {
        let val = |i: usize| front[i].as_ref()[m];
        order.sort_by(|&a, &b| val(a).partial_cmp(&val(b)).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
        let lo = val(order[0]);
        let hi = val(order[n - 1]);
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        for w in 1..n - 1 {
            let i = order[w];
            if dist[i].is_finite() {
                dist[i] += (val(order[w + 1]) - val(order[w - 1])) / range;
            }
        }
    }
    dist
}
