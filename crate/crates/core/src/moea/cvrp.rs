//! Giant-tour routing genome with ordered crossover and shuffle mutation.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CvrpGenome {
    /// Visiting order of all customers; routes are cut by capacity.
    pub tour: Vec<usize>,
}

impl CvrpGenome {
    pub fn random<R: Rng + ?Sized>(num_customers: usize, rng: &mut R) -> Self {
        let mut tour: Vec<usize> = (0..num_customers).collect();
        tour.shuffle(rng);
        Self { tour }
    }

    pub fn is_valid(&self, num_customers: usize) -> bool {
        let mut seen = vec![false; num_customers];
        self.tour.len() == num_customers
            && self.tour.iter().all(|&c| c < num_customers && !std::mem::replace(&mut seen[c], true))
    }
}

/// Ordered crossover: `primary[start..end]` stays in place, the other
/// positions take `secondary`'s customers in order, skipping those already
/// present.
pub fn ox(primary: &[usize], secondary: &[usize], start: usize, end: usize) -> Vec<usize> {
    let n = primary.len();
    let mut in_segment = vec![false; n];
    for &c in &primary[start..end] {
        in_segment[c] = true;
    }
    let mut fill = secondary.iter().copied().filter(|&c| !in_segment[c]);
    (0..n)
        .map(|i| if (start..end).contains(&i) { primary[i] } else { fill.next().expect("parents are permutations") })
        .collect()
}

pub fn crossover_cvrp<R: Rng + ?Sized>(a: &CvrpGenome, b: &CvrpGenome, rng: &mut R) -> (CvrpGenome, CvrpGenome) {
    let n = a.tour.len();
    let mut i = rng.random_range(0..=n);
    let mut j = rng.random_range(0..=n);
    if i > j {
        std::mem::swap(&mut i, &mut j);
    }
    (CvrpGenome { tour: ox(&a.tour, &b.tour, i, j) }, CvrpGenome { tour: ox(&b.tour, &a.tour, i, j) })
}

/// Per-gene swap probability of a triggered shuffle mutation: two expected
/// swaps per tour.
pub fn shuffle_gene_prob(n: usize) -> f64 {
    (2.0 / n.max(1) as f64).min(1.0)
}

/// With probability `rate`, walks the tour swapping each position with a
/// random other position with probability [`shuffle_gene_prob`].
pub fn mutate_cvrp<R: Rng + ?Sized>(genome: &mut CvrpGenome, rate: f64, rng: &mut R) {
    let n = genome.tour.len();
    if n < 2 || rate <= 0.0 || !rng.random_bool(rate.min(1.0)) {
        return;
    }
    let p = shuffle_gene_prob(n);
    for i in 0..n {
        if rng.random_bool(p) {
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            genome.tour.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ox_extremes() {
        let a = vec![3, 1, 4, 0, 2];
        let b = vec![0, 1, 2, 3, 4];
        assert_eq!(ox(&a, &b, 0, 5), a);
        assert_eq!(ox(&a, &b, 2, 2), b);
        assert_eq!(ox(&a, &b, 1, 3), vec![0, 1, 4, 2, 3]);
        assert_eq!(ox(&a, &a, 1, 3), a);
    }

    #[test]
    fn identical_parents_give_identical_children() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = CvrpGenome::random(12, &mut rng);
        let (c1, c2) = crossover_cvrp(&a, &a, &mut rng);
        assert_eq!(c1, a);
        assert_eq!(c2, a);
    }

    #[test]
    fn mutation_keeps_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut g = CvrpGenome::random(20, &mut rng);
        let orig = g.clone();
        mutate_cvrp(&mut g, 0.0, &mut rng);
        assert_eq!(g, orig);
        for _ in 0..200 {
            mutate_cvrp(&mut g, 1.0, &mut rng);
            assert!(g.is_valid(20));
        }
        assert_ne!(g, orig);
    }
}
