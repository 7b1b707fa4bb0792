use serde::{Deserialize, Serialize};

use crate::types::{DensitySpec, PhasePoint};

use super::density::factor_variance;

/// Uniform trapezoid nodes on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        assert!(
            n >= 2 && hi > lo,
            "axis needs two nodes and positive length"
        );
        Self { lo, hi, n }
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing()
        }
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i + 1 == self.n {
            0.5 * h
        } else {
            h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.weight(i)).collect()
    }
}

/// Tensor grid over `(q1, p1, q2, p2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub axes: [Axis; 4],
}

impl QuadratureGrid {
    pub fn new(axes: [Axis; 4]) -> Self {
        Self { axes }
    }

    /// Box `center +- half_width` with `n` nodes per axis.
    pub fn centered(center: [f64; 4], half_width: [f64; 4], n: usize) -> Self {
        Self {
            axes: std::array::from_fn(|k| {
                Axis::new(center[k] - half_width[k], center[k] + half_width[k], n)
            }),
        }
    }

    /// Box covering the initial density to `span` standard deviations.
    pub fn initial(density: &DensitySpec, hbar: f64, span: f64, n: usize) -> Self {
        let c = density.center().to_array();
        let [a, b] = &density.factors;
        let (sa, sb) = (
            factor_variance(a, hbar).sqrt(),
            factor_variance(b, hbar).sqrt(),
        );
        Self::centered(c, [span * sa, span * sa, span * sb, span * sb], n)
    }

    pub fn nodes(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    /// Volume of one interior cell.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing()).product()
    }

    pub fn contains(&self, x: PhasePoint) -> bool {
        x.to_array()
            .iter()
            .zip(&self.axes)
            .all(|(v, a)| *v >= a.lo && *v <= a.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_weights_sum_to_length() {
        let a = Axis::new(-1.5, 2.0, 11);
        let s: f64 = a.weights().iter().sum();
        assert!((s - 3.5).abs() < 1e-14);
        assert_eq!(a.node(10), 2.0);
        assert_eq!(a.node(0), -1.5);
    }
}
