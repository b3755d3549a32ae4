use serde::Serialize;

use super::distance::dh_a;
use super::hull::HULL_TOL;
use super::lp::hull_residual;
use super::{Functional, MetricBasis, Polytope};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitReport {
    /// `distances[j][n] = dH_{A_n}(K_j, K)`.
    pub distances: Vec<Vec<f64>>,
    /// Non-increasing in `j` for every `A_n`, up to `tol`.
    pub monotone: bool,
    /// Every distance of the last element is at most `tol`.
    pub converged: bool,
}

impl LimitReport {
    pub fn passed(&self) -> bool {
        self.monotone && self.converged
    }
}

/// Checks `K_0 ⊆ K_1 ⊆ …` by hull-membership LPs, then tabulates
/// `dH_A(K_j, K)` for each test vector.
pub fn monotone_limit_check(sequence: &[Polytope], k: &Polytope, basis: &MetricBasis, tol: f64) -> Result<LimitReport> {
    if sequence.is_empty() {
        return Err(Error::InvalidInput("empty sequence".into()));
    }
    for p in sequence {
        p.check_dim(k.dim())?;
    }
    k.check_dim(basis.dim())?;
    for (index, pair) in sequence.windows(2).enumerate() {
        let outer: Vec<&Functional> = pair[1].vertices().iter().collect();
        for v in pair[0].vertices() {
            let residual = hull_residual(v, &outer)?;
            if residual > HULL_TOL {
                return Err(Error::NotIncreasing { index, residual });
            }
        }
    }
    let distances: Vec<Vec<f64>> = sequence
        .iter()
        .map(|kj| basis.vectors().iter().map(|a| dh_a(kj, k, a)).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    let monotone = distances.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| *b <= *a + tol));
    let converged = distances.last().expect("nonempty").iter().all(|&d| d <= tol);
    Ok(LimitReport { distances, monotone, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_sequence() {
        let k = Polytope::from_points(vec![vec![0.0, 0.0], vec![1.0, 0.5]]).unwrap();
        let r = monotone_limit_check(&[k.clone(), k.clone(), k.clone()], &k, &MetricBasis::standard(2), 1e-12).unwrap();
        assert!(r.passed());
        assert!(r.distances.iter().flatten().all(|&d| d == 0.0));
    }

    #[test]
    fn growing_polygons_fill_the_square() {
        let square = Polytope::from_points(vec![vec![1.0, 1.0], vec![-1.0, 1.0], vec![-1.0, -1.0], vec![1.0, -1.0]]).unwrap();
        // radii growing to the corners along the diagonals, then the square itself
        let seq: Vec<Polytope> = [0.2, 0.5, 0.8, 1.0]
            .iter()
            .map(|&s| {
                let pts = (0..4).map(|q| {
                    let ang = PI / 4.0 + q as f64 * PI / 2.0;
                    vec![s * 2f64.sqrt() * ang.cos(), s * 2f64.sqrt() * ang.sin()]
                });
                Polytope::from_points(pts.collect()).unwrap()
            })
            .collect();
        let basis = MetricBasis::new(vec![
            super::super::PredualVector::real(vec![1.0, 0.0]),
            super::super::PredualVector::real(vec![0.6, 0.8]),
        ])
        .unwrap();
        let r = monotone_limit_check(&seq, &square, &basis, 1e-12).unwrap();
        assert!(r.passed());
        for w in r.distances.windows(2).take(2) {
            assert!(w[1].iter().zip(&w[0]).all(|(b, a)| b < a));
        }
        let bad = [seq[2].clone(), seq[1].clone()];
        assert!(matches!(monotone_limit_check(&bad, &square, &basis, 1e-12), Err(Error::NotIncreasing { index: 0, .. })));
    }
}
