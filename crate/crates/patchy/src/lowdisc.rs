//! Deterministic low-discrepancy point sequences.
//!
//! Sampling-based estimators in this crate (boundary validation, constants
//! estimation) must be reproducible and monotone under budget growth: the
//! first `k` samples of a budget-`2k` run are exactly the budget-`k` run.
//! An additive recurrence sequence gives both properties with no RNG state.

use nalgebra::DVector;

/// Additive-recurrence sequence in `[0,1)^dim` (generalised golden ratio).
///
/// Prefixes nest: the sequence depends only on `dim`, never on the budget.
pub struct RdSeq {
    alpha: Vec<f64>,
    state: Vec<f64>,
}

impl RdSeq {
    pub fn new(dim: usize) -> Self {
        // Unique positive root of x^(dim+1) = x + 1, by fixed-point iteration.
        let mut phi = 1.5_f64;
        for _ in 0..64 {
            phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
        }
        let alpha: Vec<f64> = (1..=dim).map(|i| (1.0 / phi.powi(i as i32)) % 1.0).collect();
        RdSeq { alpha, state: vec![0.5; dim] }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        for (s, a) in self.state.iter_mut().zip(&self.alpha) {
            *s = (*s + a) % 1.0;
        }
        self.state.clone()
    }
}

impl Iterator for RdSeq {
    type Item = Vec<f64>;
    fn next(&mut self) -> Option<Vec<f64>> {
        Some(self.next_point())
    }
}

/// Points filling the axis-aligned box `center ± half_extent` componentwise.
pub fn box_points(center: &DVector<f64>, half_extent: f64, count: usize) -> Vec<DVector<f64>> {
    let dim = center.len();
    RdSeq::new(dim)
        .take(count)
        .map(|u| {
            DVector::from_iterator(
                dim,
                u.iter()
                    .zip(center.iter())
                    .map(|(ui, ci)| ci + (2.0 * ui - 1.0) * half_extent),
            )
        })
        .collect()
}

/// Streams box points to a predicate, keeping at most `keep` accepted points
/// while spending at most `budget` candidates. Prefix-nested in `budget`.
pub fn filtered_box_points(
    center: &DVector<f64>,
    half_extent: f64,
    budget: usize,
    keep: usize,
    mut accept: impl FnMut(&DVector<f64>) -> bool,
) -> Vec<DVector<f64>> {
    let dim = center.len();
    let mut out = Vec::new();
    let mut seq = RdSeq::new(dim);
    for _ in 0..budget {
        if out.len() >= keep {
            break;
        }
        let u = seq.next_point();
        let p = DVector::from_iterator(
            dim,
            u.iter()
                .zip(center.iter())
                .map(|(ui, ci)| ci + (2.0 * ui - 1.0) * half_extent),
        );
        if accept(&p) {
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefixes_nest() {
        let a: Vec<_> = RdSeq::new(3).take(10).collect();
        let b: Vec<_> = RdSeq::new(3).take(25).collect();
        assert_eq!(a[..], b[..10]);
    }

    #[test]
    fn points_stay_in_unit_cube() {
        for p in RdSeq::new(4).take(1000) {
            assert!(p.iter().all(|&u| (0.0..1.0).contains(&u)));
        }
    }

    #[test]
    fn equidistribution_rough() {
        // 1-d marginal mean tends to 1/2.
        let n = 4000;
        let mean: f64 = RdSeq::new(2).take(n).map(|p| p[0]).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01);
    }
}
