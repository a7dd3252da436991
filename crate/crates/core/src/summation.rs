//! Reproducible floating-point reductions.
//!
//! Parallel loops in this crate collect their partial results into a vector
//! in index order and reduce it with [`pairwise_sum`], whose tree shape only
//! depends on the slice length. The result is therefore bit-identical
//! regardless of how many worker threads produced the partials.

use std::ops::Add;

use num_complex::Complex64;

/// Below this length a block is summed left to right.
const PAIRWISE_BLOCK: usize = 8;

/// Sums `items` with a fixed binary tree (split at the midpoint).
pub fn pairwise_sum<T>(items: &[T]) -> T
where
    T: Copy + Default + Add<Output = T>,
{
    if items.len() <= PAIRWISE_BLOCK {
        return items.iter().fold(T::default(), |acc, &x| acc + x);
    }
    let mid = items.len() / 2;
    pairwise_sum(&items[..mid]) + pairwise_sum(&items[mid..])
}

/// Neumaier (improved Kahan) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated accumulator for complex values (real and imaginary parts
/// compensated independently).
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexNeumaierSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexNeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_small_terms() {
        let s: NeumaierSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn pairwise_matches_exact_integer_sum() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
        assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
    }

    #[test]
    fn pairwise_tree_depends_only_on_length() {
        let v: Vec<f64> = (0..777).map(|i| (i as f64 * 0.37).sin() * 1e-3).collect();
        let a = pairwise_sum(&v);
        let b = pairwise_sum(&v.clone());
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
