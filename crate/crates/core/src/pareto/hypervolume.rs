//! Exact hypervolume.
//!
//! Two objectives use a staircase sweep. Three or more use WFG-style
//! exclusive-volume recursion: the volume of a set is the sum over its points
//! of the box each point adds beyond the points after it, where the part
//! already covered is the (recursively measured) limit set of the later points
//! clipped by the current one.

use std::cmp::Ordering;

use super::{check_dims, dominates, ParetoError};

/// Lebesgue measure of the region weakly dominated by `points` and bounded by
/// `reference`. Points that are not strictly better than the reference in
/// every objective contribute nothing.
pub fn hypervolume<P: AsRef<[f64]>>(points: &[P], reference: &[f64]) -> Result<f64, ParetoError> {
    let dim = reference.len();
    if dim == 0 {
        return Err(ParetoError::Empty("reference point"));
    }
    check_dims(points, dim)?;
    let inside: Vec<Vec<f64>> = points
        .iter()
        .map(AsRef::as_ref)
        .filter(|p| p.iter().zip(reference).all(|(x, r)| x < r))
        .map(<[f64]>::to_vec)
        .collect();
    if inside.is_empty() {
        return Ok(0.0);
    }
    let mut front = nondominated(inside);
    Ok(match dim {
        1 => reference[0] - front[0][0],
        2 => sweep_2d(&mut front, reference),
        _ => {
            sort_for_wfg(&mut front);
            wfg(&front, reference)
        }
    })
}

/// Removes dominated points and duplicates.
fn nondominated(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    pts.sort_by(|a, b| lex_cmp(a, b));
    pts.dedup();
    let keep: Vec<bool> = pts.iter().map(|p| !pts.iter().any(|q| dominates(q, p))).collect();
    pts.into_iter().zip(keep).filter_map(|(p, k)| k.then_some(p)).collect()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).unwrap_or(Ordering::Equal) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// `front` must be mutually non-dominated.
fn sweep_2d(front: &mut [Vec<f64>], reference: &[f64]) -> f64 {
    front.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap_or(Ordering::Equal));
    let mut volume = 0.0;
    for (i, p) in front.iter().enumerate() {
        let next_x = front.get(i + 1).map_or(reference[0], |q| q[0]);
        volume += (next_x - p[0]) * (reference[1] - p[1]);
    }
    volume
}

// Sorting by the last objective, worst first, keeps limit sets small.
fn sort_for_wfg(front: &mut [Vec<f64>]) {
    let last = front[0].len() - 1;
    front.sort_by(|a, b| b[last].partial_cmp(&a[last]).unwrap_or(Ordering::Equal).then_with(|| lex_cmp(a, b)));
}

fn box_volume(p: &[f64], reference: &[f64]) -> f64 {
    p.iter().zip(reference).map(|(x, r)| r - x).product()
}

fn wfg(front: &[Vec<f64>], reference: &[f64]) -> f64 {
    match front.len() {
        0 => 0.0,
        1 => box_volume(&front[0], reference),
        _ if reference.len() == 2 => sweep_2d(&mut front.to_vec(), reference),
        _ => (0..front.len()).map(|k| exclusive(front, k, reference)).sum(),
    }
}

fn exclusive(front: &[Vec<f64>], k: usize, reference: &[f64]) -> f64 {
    let p = &front[k];
    let limited: Vec<Vec<f64>> = front[k + 1..]
        .iter()
        .map(|q| q.iter().zip(p).map(|(a, b)| a.max(*b)).collect())
        .collect();
    if limited.is_empty() {
        return box_volume(p, reference);
    }
    let mut limited = nondominated(limited);
    sort_for_wfg(&mut limited);
    box_volume(p, reference) - wfg(&limited, reference)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staircase_example() {
        let pts = vec![vec![1.0, 3.0], vec![2.0, 2.0], vec![3.0, 1.0]];
        assert_eq!(hypervolume(&pts, &[4.0, 4.0]).unwrap(), 6.0);
    }

    #[test]
    fn unit_box_in_several_dimensions() {
        for d in 1..=6 {
            let hv = hypervolume(&[vec![0.0; d]], &vec![1.0; d]).unwrap();
            assert_eq!(hv, 1.0, "d={d}");
        }
    }

    #[test]
    fn dominated_and_outside_points_ignored() {
        let base = vec![vec![1.0, 3.0, 2.0], vec![2.0, 1.0, 3.0], vec![3.0, 2.0, 1.0]];
        let hv = hypervolume(&base, &[4.0, 4.0, 4.0]).unwrap();
        let mut more = base.clone();
        more.push(vec![3.5, 3.5, 3.5]);
        more.push(vec![0.5, 0.5, 5.0]);
        more.push(base[0].clone());
        assert_eq!(hypervolume(&more, &[4.0, 4.0, 4.0]).unwrap(), hv);
    }

    #[test]
    fn three_dimensional_inclusion_exclusion() {
        // Two boxes against r = (2,2,2): 1*2*2 + 2*1*2 - 1*1*2 = 6.
        let pts = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        assert!((hypervolume(&pts, &[2.0, 2.0, 2.0]).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn errors_and_empty() {
        let pts: Vec<Vec<f64>> = vec![];
        assert_eq!(hypervolume(&pts, &[1.0, 1.0]).unwrap(), 0.0);
        assert!(hypervolume(&[vec![0.0]], &[1.0, 1.0]).is_err());
        assert!(hypervolume(&[Vec::<f64>::new()], &[]).is_err());
    }
}
