use super::{check_dims, ParetoError};

fn validate<P: AsRef<[f64]>, Q: AsRef<[f64]>>(front: &[P], reference_front: &[Q]) -> Result<(), ParetoError> {
    let z = reference_front.first().ok_or(ParetoError::Empty("reference front"))?;
    if front.is_empty() {
        return Err(ParetoError::Empty("front"));
    }
    let dim = z.as_ref().len();
    check_dims(reference_front, dim)?;
    check_dims(front, dim)
}

fn mean_min_distance<P, Q, F>(front: &[P], reference_front: &[Q], dist: F) -> f64
where
    P: AsRef<[f64]>,
    Q: AsRef<[f64]>,
    F: Fn(&[f64], &[f64]) -> f64,
{
    let total: f64 = reference_front
        .iter()
        .map(|z| front.iter().map(|a| dist(a.as_ref(), z.as_ref())).fold(f64::INFINITY, f64::min))
        .sum();
    total / reference_front.len() as f64
}

/// Inverted generational distance: mean over reference points of the
/// Euclidean distance to the closest front point.
pub fn igd<P: AsRef<[f64]>, Q: AsRef<[f64]>>(front: &[P], reference_front: &[Q]) -> Result<f64, ParetoError> {
    validate(front, reference_front)?;
    Ok(mean_min_distance(front, reference_front, |a, z| {
        a.iter().zip(z).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }))
}

/// IGD+: like [`igd`], but only the coordinates where the front point is
/// worse than the reference point count.
pub fn igd_plus<P: AsRef<[f64]>, Q: AsRef<[f64]>>(front: &[P], reference_front: &[Q]) -> Result<f64, ParetoError> {
    validate(front, reference_front)?;
    Ok(mean_min_distance(front, reference_front, |a, z| {
        a.iter().zip(z).map(|(x, y)| (x - y).max(0.0).powi(2)).sum::<f64>().sqrt()
    }))
}
