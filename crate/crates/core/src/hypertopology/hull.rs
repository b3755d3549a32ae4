use serde::Serialize;

use super::lp::hull_residual;
use super::{Functional, Polytope, PredualVector};
use crate::error::{Error, Result};

/// Membership tolerance for the hull LPs.
pub const HULL_TOL: f64 = 1e-9;

/// Default gap below which a maximizer counts as tied.
pub const GAP_TOL: f64 = 1e-9;

/// Drops every point lying in the convex hull of the remaining ones
/// (L1 residual at most [`HULL_TOL`]). Survivors keep their input order.
pub fn convex_hull_reduce(points: &[Functional]) -> Result<Polytope> {
    let mut kept: Vec<Functional> = Vec::with_capacity(points.len());
    for p in points {
        if !kept.iter().any(|q| q.coordinates() == p.coordinates()) {
            kept.push(p.clone());
        }
    }
    let first = Polytope::new(kept)?;
    let mut kept = first.vertices;
    let mut i = 0;
    while i < kept.len() && kept.len() > 1 {
        let others: Vec<&Functional> = kept.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).collect();
        if hull_residual(&kept[i], &others)? <= HULL_TOL {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(Polytope { vertices: kept, reduced: true })
}

/// The extreme points of `conv K`.
pub fn extreme_points(k: &Polytope) -> Result<Vec<Functional>> {
    if k.reduced {
        return Ok(k.vertices.clone());
    }
    Ok(convex_hull_reduce(&k.vertices)?.vertices)
}

/// Outcome of maximizing `Re Â` over the vertices of a polytope.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExposureCertificate {
    pub value: f64,
    /// Largest value over the other vertices; `−∞` for a singleton.
    pub runner_up: f64,
    pub gap: f64,
    pub exposed: bool,
}

/// Checks that `Re ω(A)` strictly exceeds `Re σ(A)` at every other vertex `σ`
/// by at least `gap_tol`. `ω` must coincide with a vertex within `1e-12`
/// (relative to the coordinate scale).
pub fn is_exposed(k: &Polytope, omega: &Functional, a: &PredualVector, gap_tol: f64) -> Result<ExposureCertificate> {
    k.check_dim(omega.dim())?;
    k.check_dim(a.dim())?;
    let scale = omega.coordinates().iter().fold(1.0f64, |m, c| m.max(c.abs()));
    let (index, offset) = k
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (i, v.max_abs_diff(omega)))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    if offset > 1e-12 * scale {
        return Err(Error::NotAVertex);
    }
    let value = k.vertices[index].pair(a).re;
    let runner_up = k
        .vertices
        .iter()
        .enumerate()
        .filter(|(i, v)| *i != index && v.coordinates() != k.vertices[index].coordinates())
        .map(|(_, v)| v.pair(a).re)
        .fold(f64::NEG_INFINITY, f64::max);
    let gap = value - runner_up;
    Ok(ExposureCertificate { value, runner_up, gap, exposed: gap >= gap_tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f(v: &[f64]) -> Functional {
        Functional::new(v.to_vec()).unwrap()
    }

    fn square() -> Polytope {
        Polytope::from_points(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn removes_interior_and_collinear_points() {
        let line = convex_hull_reduce(&[f(&[0.0]), f(&[0.5]), f(&[1.0])]).unwrap();
        assert_eq!(line.vertices(), &[f(&[0.0]), f(&[1.0])]);
        let mut pts = square().vertices().to_vec();
        pts.push(f(&[0.5, 0.5]));
        let k = convex_hull_reduce(&pts).unwrap();
        assert_eq!(k.len(), 4);
        assert!(k.is_reduced());
    }

    #[test]
    fn square_exposure() {
        let k = square();
        let c = is_exposed(&k, &f(&[1.0, 1.0]), &PredualVector::real(vec![1.0, 1.0]), GAP_TOL).unwrap();
        assert!(c.exposed);
        assert_eq!(c.gap, 1.0);
        let tie = is_exposed(&k, &f(&[1.0, 1.0]), &PredualVector::real(vec![1.0, 0.0]), GAP_TOL).unwrap();
        assert!(!tie.exposed);
        assert_eq!(tie.gap, 0.0);
        assert_eq!(is_exposed(&k, &f(&[0.5, 0.5]), &PredualVector::real(vec![1.0, 0.0]), GAP_TOL), Err(Error::NotAVertex));
        let single = Polytope::singleton(f(&[0.3, 0.1]));
        let c = is_exposed(&single, &f(&[0.3, 0.1]), &PredualVector::real(vec![-1.0, 2.0]), GAP_TOL).unwrap();
        assert!(c.exposed && c.gap == f64::INFINITY);
    }

    #[test]
    fn random_ball_points_self_certify() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let pts: Vec<Functional> = (0..50)
            .map(|_| loop {
                let v: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
                if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                    break f(&v);
                }
            })
            .collect();
        let k = convex_hull_reduce(&pts).unwrap();
        assert!(k.len() > 5 && k.len() <= 50);
        for (i, v) in k.vertices().iter().enumerate() {
            let others: Vec<&Functional> = k.vertices().iter().enumerate().filter(|(j, _)| *j != i).map(|(_, u)| u).collect();
            assert!(hull_residual(v, &others).unwrap() > HULL_TOL);
        }
        for p in &pts {
            let all: Vec<&Functional> = k.vertices().iter().collect();
            assert!(hull_residual(p, &all).unwrap() <= HULL_TOL);
        }
    }

    fn as_set(k: &Polytope) -> Vec<Vec<u64>> {
        let mut s: Vec<Vec<u64>> = k.vertices().iter().map(|v| v.coordinates().iter().map(|c| c.to_bits()).collect()).collect();
        s.sort();
        s
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn reduce_is_idempotent_and_order_free(pts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..12), rot in 0usize..12) {
            let pts: Vec<Functional> = pts.into_iter().map(|p| f(&p)).collect();
            let k = convex_hull_reduce(&pts).unwrap();
            let again = convex_hull_reduce(k.vertices()).unwrap();
            prop_assert_eq!(as_set(&k), as_set(&again));
            let mut shuffled = pts.clone();
            shuffled.rotate_left(rot % pts.len());
            shuffled.reverse();
            prop_assert_eq!(as_set(&k), as_set(&convex_hull_reduce(&shuffled).unwrap()));
        }

        #[test]
        fn exposed_points_survive_reduction(pts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 2..10),
                                           a in prop::collection::vec(-0.5f64..0.5, 3)) {
            let k = Polytope::from_points(pts.clone()).unwrap();
            let a = PredualVector::real(a);
            let reduced = convex_hull_reduce(k.vertices()).unwrap();
            for v in k.vertices() {
                let c = is_exposed(&k, v, &a, 1e-6).unwrap();
                if c.exposed {
                    prop_assert!(reduced.vertices().contains(v));
                }
            }
        }
    }
}
