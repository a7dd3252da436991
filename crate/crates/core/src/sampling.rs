//! Deterministic low-discrepancy sampling.
//!
//! All quasi-random sample plans use the Halton sequence: coordinate `d` of
//! point `i` is the radical inverse of `seed + i + 1` in the `d`-th prime
//! base. The seed only shifts the starting index, so two runs with the same
//! seed see exactly the same points.

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let mut factor = inv_base;
    let mut result = 0.0;
    while index > 0 {
        result += (index % base) as f64 * factor;
        index /= base;
        factor *= inv_base;
    }
    result
}

/// Halton sequence in up to 16 dimensions.
#[derive(Debug, Clone, Copy)]
pub struct Halton {
    dim: usize,
    seed: u64,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(
            (1..=PRIMES.len()).contains(&dim),
            "Halton dimension must be in 1..=16"
        );
        Self { dim, seed }
    }

    /// The `i`-th point, each coordinate in `[0, 1)`.
    pub fn point(&self, i: u64) -> Vec<f64> {
        let n = self.seed + i + 1;
        PRIMES[..self.dim]
            .iter()
            .map(|&b| radical_inverse(n, b))
            .collect()
    }

    pub fn points(&self, count: usize) -> Vec<Vec<f64>> {
        (0..count as u64).map(|i| self.point(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert_eq!(radical_inverse(4, 2), 0.125);
    }

    #[test]
    fn halton_is_deterministic_and_in_unit_cube() {
        let h = Halton::new(6, 42);
        let a = h.points(100);
        let b = Halton::new(6, 42).points(100);
        assert_eq!(a, b);
        assert!(a.iter().flatten().all(|&x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn halton_first_coordinate_is_equidistributed() {
        let h = Halton::new(2, 0);
        let n = 1024;
        let mean: f64 = h.points(n).iter().map(|p| p[0]).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 2e-3);
    }
}
