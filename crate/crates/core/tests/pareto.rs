use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use modac_core::pareto::{crowding_distance, hypervolume, igd, igd_plus, non_dominated_sort};

fn brute_dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for i in 0..a.len() {
        if a[i] > b[i] {
            return false;
        }
        if a[i] < b[i] {
            strictly = true;
        }
    }
    strictly
}

/// Repeatedly peels off the members no remaining member dominates.
fn brute_partition(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = points.len();
    let dom: Vec<Vec<bool>> =
        (0..n).map(|i| (0..n).map(|j| brute_dominates(&points[i], &points[j])).collect()).collect();
    let mut left: Vec<usize> = (0..n).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left.iter().copied().filter(|&j| !left.iter().any(|&i| dom[i][j])).collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize, grid: Option<u32>) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            (0..d)
                .map(|_| match grid {
                    Some(g) => f64::from(rng.random_range(0..g)),
                    None => rng.random::<f64>(),
                })
                .collect()
        })
        .collect()
}

#[test]
fn sort_matches_brute_force_partition() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..300 {
        let d = [2, 3, 5][trial % 3];
        // Coarse grids produce ties and duplicates.
        let grid = if trial % 2 == 0 { Some(4) } else { None };
        let pts = random_points(&mut rng, 50, d, grid);
        let got = non_dominated_sort(&pts).unwrap();
        assert_eq!(got.fronts, brute_partition(&pts), "trial {trial}");
        for (r, front) in got.fronts.iter().enumerate() {
            assert!(front.iter().all(|&i| got.rank[i] == r));
        }
    }
}

#[test]
fn staircase_area_by_rectangle_sweep() {
    let pts = [[1.0, 3.0], [2.0, 2.0], [3.0, 1.0]];
    // Strips between consecutive x values, each as tall as the best y so far.
    let mut area = 0.0;
    let xs = [1.0, 2.0, 3.0, 4.0];
    for w in 0..3 {
        let best_y = pts.iter().filter(|p| p[0] <= xs[w]).map(|p| p[1]).fold(f64::INFINITY, f64::min);
        area += (xs[w + 1] - xs[w]) * (4.0 - best_y);
    }
    assert_eq!(area, 6.0);
    assert_eq!(hypervolume(&pts, &[4.0, 4.0]).unwrap(), 6.0);
}

fn monte_carlo_hv(pts: &[Vec<f64>], r: &[f64], samples: usize, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let d = r.len();
    let lo: Vec<f64> = (0..d).map(|k| pts.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min)).collect();
    let box_vol: f64 = (0..d).map(|k| r[k] - lo[k]).product();
    let mut hits = 0usize;
    let mut x = vec![0.0; d];
    for _ in 0..samples {
        for k in 0..d {
            x[k] = lo[k] + rng.random::<f64>() * (r[k] - lo[k]);
        }
        if pts.iter().any(|p| p.iter().zip(&x).all(|(a, b)| a <= b)) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    (box_vol * p, box_vol * (p * (1.0 - p) / samples as f64).sqrt())
}

#[test]
fn exact_hypervolume_agrees_with_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut outside = 0;
    for trial in 0..20 {
        let d = 2 + trial % 4;
        let n = rng.random_range(1..=30);
        let pts = random_points(&mut rng, n, d, None);
        let r = vec![1.0; d];
        let exact = hypervolume(&pts, &r).unwrap();
        let (est, se) = monte_carlo_hv(&pts, &r, 200_000, &mut rng);
        if (exact - est).abs() > 4.0 * se.max(1e-12) {
            outside += 1;
        }
    }
    assert!(outside <= 1, "{outside} of 20 fronts disagree with sampling");
}

#[test]
fn crowding_matches_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        // Distinct values per objective so sort order is unambiguous.
        let n = rng.random_range(3..12);
        let pts = random_points(&mut rng, n, 3, None);
        let got = crowding_distance(&pts);
        for i in 0..n {
            let mut want = 0.0;
            for k in 0..3 {
                let vals: Vec<f64> = pts.iter().map(|p| p[k]).collect();
                let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
                let v = vals[i];
                if v == lo || v == hi {
                    want = f64::INFINITY;
                    break;
                }
                let below = vals.iter().copied().filter(|&x| x < v).fold(f64::NEG_INFINITY, f64::max);
                let above = vals.iter().copied().filter(|&x| x > v).fold(f64::INFINITY, f64::min);
                want += (above - below) / (hi - lo);
            }
            if want.is_infinite() {
                assert!(got[i].is_infinite());
            } else {
                assert!((got[i] - want).abs() < 1e-12, "{} vs {want}", got[i]);
            }
        }
    }
}

fn brute_igd(front: &[Vec<f64>], reference: &[Vec<f64>], plus: bool) -> f64 {
    let mut total = 0.0;
    for z in reference {
        let mut best = f64::INFINITY;
        for a in front {
            let mut s = 0.0;
            for k in 0..z.len() {
                let diff = if plus { (a[k] - z[k]).max(0.0) } else { a[k] - z[k] };
                s += diff * diff;
            }
            best = best.min(s.sqrt());
        }
        total += best;
    }
    total / reference.len() as f64
}

#[test]
fn igd_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let d = rng.random_range(2..=5);
        let (nf, nr) = (rng.random_range(1..20), rng.random_range(1..20));
        let front = random_points(&mut rng, nf, d, None);
        let reference = random_points(&mut rng, nr, d, None);
        let a = igd(&front, &reference).unwrap();
        let b = igd_plus(&front, &reference).unwrap();
        assert!((a - brute_igd(&front, &reference, false)).abs() < 1e-12);
        assert!((b - brute_igd(&front, &reference, true)).abs() < 1e-12);
        assert!(b <= a);
    }
}

fn front_strategy() -> impl Strategy<Value = (usize, Vec<Vec<f64>>)> {
    (2usize..=4).prop_flat_map(|d| (Just(d), prop::collection::vec(prop::collection::vec(0.0f64..1.0, d), 1..15)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn adding_a_point_never_lowers_hypervolume((d, pts) in front_strategy(), extra in prop::collection::vec(0.0f64..1.0, 4)) {
        let r = vec![1.0; d];
        let before = hypervolume(&pts, &r).unwrap();
        let mut more = pts.clone();
        more.push(extra[..d].to_vec());
        prop_assert!(hypervolume(&more, &r).unwrap() >= before - 1e-12);
    }

    #[test]
    fn duplicates_and_order_do_not_matter((d, pts) in front_strategy()) {
        let r = vec![1.0; d];
        let base = hypervolume(&pts, &r).unwrap();
        let mut doubled = pts.clone();
        doubled.extend(pts.iter().cloned());
        doubled.reverse();
        prop_assert!((hypervolume(&doubled, &r).unwrap() - base).abs() <= 1e-12 * base.max(1.0));
    }

    #[test]
    fn improving_a_point_never_lowers_hypervolume((d, pts) in front_strategy(), k in 0usize..15, shrink in 0.0f64..1.0) {
        let r = vec![1.0; d];
        let before = hypervolume(&pts, &r).unwrap();
        let mut better = pts.clone();
        let k = k % better.len();
        better[k][0] *= shrink;
        prop_assert!(hypervolume(&better, &r).unwrap() >= before - 1e-12);
    }

    #[test]
    fn igd_plus_bounded_by_igd((d, front) in front_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reference = random_points(&mut rng, 10, d, None);
        prop_assert!(igd_plus(&front, &reference).unwrap() <= igd(&front, &reference).unwrap());
        prop_assert_eq!(igd(&front, &front).unwrap(), 0.0);
        prop_assert_eq!(igd_plus(&front, &front).unwrap(), 0.0);
    }
}
