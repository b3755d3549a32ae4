use super::lp::{hull_residual, separating_direction, weighted_l1_min, weighted_modulus_min};
use super::{Functional, MetricBasis, Polytope, PredualVector};
use crate::error::{Error, Result};

type Pt = (f64, f64);

fn cross(o: Pt, a: Pt, b: Pt) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn dist(a: Pt, b: Pt) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Convex hull in counter-clockwise order, collinear points dropped.
fn hull2d(mut pts: Vec<Pt>) -> Vec<Pt> {
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite projections"));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Pt> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Pt> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn segment_distance(p: Pt, a: Pt, b: Pt) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0);
    dist(p, (a.0 + t * dx, a.1 + t * dy))
}

fn distance_to_hull(p: Pt, hull: &[Pt], snap: f64) -> f64 {
    let d = match hull.len() {
        1 => dist(p, hull[0]),
        2 => segment_distance(p, hull[0], hull[1]),
        n => {
            let inside = (0..n).all(|i| {
                let (a, b) = (hull[i], hull[(i + 1) % n]);
                cross(a, b, p) >= -snap * dist(a, b)
            });
            if inside {
                0.0
            } else {
                (0..n).map(|i| segment_distance(p, hull[i], hull[(i + 1) % n])).fold(f64::INFINITY, f64::min)
            }
        }
    };
    if d <= snap {
        0.0
    } else {
        d
    }
}

fn project(k: &Polytope, a: &PredualVector) -> Vec<Pt> {
    k.vertices
        .iter()
        .map(|v| {
            let z = v.pair(a);
            (z.re, z.im)
        })
        .collect()
}

/// Hausdorff distance between the planar images `Â(K1)` and `Â(K2)`.
///
/// Distances within `1e-12` of the larger image radius count as zero, so
/// sets with equal hulls are at distance exactly zero.
pub fn dh_a(k1: &Polytope, k2: &Polytope, a: &PredualVector) -> Result<f64> {
    if k1.is_empty() || k2.is_empty() {
        return Err(Error::EmptyPolytope);
    }
    k1.check_dim(a.dim())?;
    k2.check_dim(a.dim())?;
    if k1.len() == 1 && k2.len() == 1 {
        return Ok(k1.vertices[0].sub(&k2.vertices[0]).pair(a).norm());
    }
    let p1 = project(k1, a);
    let p2 = project(k2, a);
    let scale = p1.iter().chain(&p2).map(|p| p.0.hypot(p.1)).fold(0.0, f64::max);
    let snap = 1e-12 * scale;
    let h1 = hull2d(p1.clone());
    let h2 = hull2d(p2.clone());
    let directed = |from: &[Pt], to: &[Pt]| from.iter().map(|&p| distance_to_hull(p, to, snap)).fold(0.0, f64::max);
    Ok(directed(&p1, &h2).max(directed(&p2, &h1)))
}

/// `d(σ1, σ2) = Σ_n 2^{-n} |(σ1 − σ2)(A_n)|`.
pub fn seq_metric_d(s1: &Functional, s2: &Functional, basis: &MetricBasis) -> Result<f64> {
    if s1.dim() != basis.dim() || s2.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: s1.dim().max(s2.dim()) });
    }
    let diff = s1.sub(s2);
    Ok(basis.vectors().iter().zip(basis.weights()).map(|(a, w)| w * diff.pair(a).norm()).sum())
}

/// Minimizer of `d(σ, ·)` over a polytope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InnerSolver {
    /// Linear program: exact for real test vectors, cutting planes certified
    /// to `tol` for complex ones.
    #[default]
    Lp,
    /// Frank–Wolfe on the smoothed objective with duality-gap stopping.
    FrankWolfe { max_iter: usize },
}

struct Inner<'a> {
    basis: &'a MetricBasis,
    coef: Vec<f64>,
}

impl Inner<'_> {
    fn min_distance(&self, sigma: &Functional, k: &Polytope, tol: f64, solver: InnerSolver) -> Result<f64> {
        if k.vertices.iter().any(|v| v.coordinates() == sigma.coordinates()) {
            return Ok(0.0);
        }
        if k.len() == 1 {
            return seq_metric_d(sigma, &k.vertices[0], self.basis);
        }
        match solver {
            InnerSolver::Lp if self.basis.is_real() => {
                let target: Vec<f64> = self.basis.vectors().iter().map(|a| sigma.pair(a).re).collect();
                let values: Vec<Vec<f64>> = k
                    .vertices
                    .iter()
                    .map(|v| self.basis.vectors().iter().map(|a| v.pair(a).re).collect())
                    .collect();
                Ok(weighted_l1_min(&target, &values, &self.coef)?.0)
            }
            InnerSolver::Lp => {
                let target: Vec<(f64, f64)> = self.basis.vectors().iter().map(|a| sigma.pair(a)).map(|z| (z.re, z.im)).collect();
                let values: Vec<Vec<(f64, f64)>> = k
                    .vertices
                    .iter()
                    .map(|v| self.basis.vectors().iter().map(|a| v.pair(a)).map(|z| (z.re, z.im)).collect())
                    .collect();
                weighted_modulus_min(&target, &values, &self.coef, tol)
            }
            InnerSolver::FrankWolfe { max_iter } => self.frank_wolfe(sigma, k, tol, max_iter),
        }
    }

    /// Minimizes `Σ c_n (√(|r_n|² + μ²) − μ)` by pairwise Frank–Wolfe,
    /// shrinking `μ` geometrically down to `tol/2` and stopping each stage at
    /// duality gap `μ`. At the last stage the exact objective at the iterate
    /// is within `tol` of the true minimum.
    fn frank_wolfe(&self, sigma: &Functional, k: &Polytope, tol: f64, max_iter: usize) -> Result<f64> {
        let target: Vec<(f64, f64)> = self.basis.vectors().iter().map(|a| sigma.pair(a)).map(|z| (z.re, z.im)).collect();
        let vals: Vec<Vec<(f64, f64)>> = k
            .vertices
            .iter()
            .map(|v| self.basis.vectors().iter().map(|a| v.pair(a)).map(|z| (z.re, z.im)).collect())
            .collect();
        let m = vals.len();
        let residual = |w: &[f64]| -> Vec<(f64, f64)> {
            target
                .iter()
                .enumerate()
                .map(|(n, &(tr, ti))| {
                    let (mut r, mut i) = (tr, ti);
                    for (wi, row) in w.iter().zip(&vals) {
                        r -= wi * row[n].0;
                        i -= wi * row[n].1;
                    }
                    (r, i)
                })
                .collect()
        };
        let exact = |w: &[f64]| -> f64 { residual(w).iter().zip(&self.coef).map(|(&(r, i), c)| c * r.hypot(i)).sum() };
        let floor = 0.5 * tol;
        let mut mu = floor.max(1e-2);
        let mut w = vec![1.0 / m as f64; m];
        let mut gap = f64::INFINITY;
        for _ in 0..max_iter {
            let res = residual(&w);
            let grad: Vec<f64> = vals
                .iter()
                .map(|row| {
                    res.iter()
                        .zip(row)
                        .zip(&self.coef)
                        .map(|((&(r, i), &(vr, vi)), c)| -c * (r * vr + i * vi) / (r * r + i * i + mu * mu).sqrt())
                        .sum()
                })
                .collect();
            let toward = (0..m).min_by(|&a, &b| grad[a].total_cmp(&grad[b])).expect("nonempty");
            let away = (0..m).filter(|&i| w[i] > 0.0).max_by(|&a, &b| grad[a].total_cmp(&grad[b])).expect("weights sum to one");
            gap = w.iter().zip(&grad).map(|(wi, g)| wi * g).sum::<f64>() - grad[toward];
            if gap <= mu {
                if mu <= floor {
                    return Ok(exact(&w));
                }
                mu = (0.1 * mu).max(floor);
                continue;
            }
            let max_step = w[away];
            if max_step <= 1e-15 {
                // drop step
                w[toward] += max_step;
                w[away] = 0.0;
                continue;
            }
            // bisection on the sign of the directional derivative
            let slope = |gamma: f64| -> f64 {
                res.iter()
                    .zip(&vals[toward])
                    .zip(&vals[away])
                    .zip(&self.coef)
                    .map(|(((&(r, i), &(tr, ti)), &(ar, ai)), c)| {
                        let (dr, di) = (tr - ar, ti - ai);
                        let (r, i) = (r - gamma * dr, i - gamma * di);
                        -c * (r * dr + i * di) / (r * r + i * i + mu * mu).sqrt()
                    })
                    .sum()
            };
            let gamma = if slope(max_step) <= 0.0 {
                max_step
            } else {
                let (mut lo, mut hi) = (0.0, max_step);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if slope(mid) <= 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            };
            if gamma <= 0.0 {
                break;
            }
            w[away] = (w[away] - gamma).max(0.0);
            w[toward] += gamma;
        }
        Err(Error::NoConvergence { iterations: max_iter, defect: gap })
    }
}

/// Hausdorff distance of the metric `d` between two polytopes. The outer
/// maximum runs over vertices; the inner minimum over the opposite polytope
/// is solved with [`InnerSolver::Lp`].
pub fn hausdorff_d(k1: &Polytope, k2: &Polytope, basis: &MetricBasis, tol: f64) -> Result<f64> {
    hausdorff_d_with(k1, k2, basis, tol, InnerSolver::Lp)
}

pub fn hausdorff_d_with(k1: &Polytope, k2: &Polytope, basis: &MetricBasis, tol: f64, solver: InnerSolver) -> Result<f64> {
    k1.check_dim(basis.dim())?;
    k2.check_dim(basis.dim())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let inner = Inner { basis, coef: basis.weights() };
    let directed = |from: &Polytope, to: &Polytope| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for v in &from.vertices {
            worst = worst.max(inner.min_distance(v, to, tol, solver)?);
        }
        Ok(worst)
    };
    Ok(directed(k1, k2)?.max(directed(k2, k1)?))
}

/// Hausdorff distance between the vertex sets themselves, ignoring hulls.
pub fn vertex_hausdorff(k1: &Polytope, k2: &Polytope, basis: &MetricBasis) -> Result<f64> {
    let directed = |from: &Polytope, to: &Polytope| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for v in &from.vertices {
            let mut best = f64::INFINITY;
            for u in &to.vertices {
                best = best.min(seq_metric_d(v, u, basis)?);
            }
            worst = worst.max(best);
        }
        Ok(worst)
    };
    Ok(directed(k1, k2)?.max(directed(k2, k1)?))
}

/// A real test vector `A` with `‖A‖ ≤ 1` and `dH_A(K1, K2) > 0`, if the hulls differ
/// by more than `1e-9` in hull-membership residual.
pub fn separating_vector(k1: &Polytope, k2: &Polytope) -> Result<Option<PredualVector>> {
    k1.check_dim(k2.dim())?;
    for (from, to) in [(k1, k2), (k2, k1)] {
        let targets: Vec<&Functional> = to.vertices.iter().collect();
        for v in &from.vertices {
            if hull_residual(v, &targets)? > 1e-9 {
                let (dir, margin) = separating_direction(v, &targets)?;
                if margin > 0.0 {
                    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
                    return Ok(Some(PredualVector::real(dir.iter().map(|x| x / norm).collect())));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(pts: &[&[f64]]) -> Polytope {
        Polytope::from_points(pts.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn segment_to_origin_is_half() {
        let seg = poly(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let origin = poly(&[&[0.0, 0.0]]);
        let b = MetricBasis::standard(2);
        assert!((hausdorff_d(&seg, &origin, &b, 1e-9).unwrap() - 0.5).abs() < 1e-12);
        let fw = hausdorff_d_with(&seg, &origin, &b, 1e-6, InnerSolver::FrankWolfe { max_iter: 10_000 }).unwrap();
        assert!((fw - 0.5).abs() < 1e-6);
    }

    #[test]
    fn barycenter_is_invisible() {
        let k = poly(&[&[0.0, 0.0, 1.0], &[1.0, 0.3, 0.0], &[0.2, 1.0, -0.5]]);
        let k2 = k.with_points([k.barycenter()]).unwrap();
        for a in [PredualVector::real(vec![0.3, -0.2, 0.9]), PredualVector::new(vec![0.1, 0.5, 0.0], vec![0.4, 0.0, -0.6]).unwrap()] {
            assert_eq!(dh_a(&k, &k2, &a).unwrap(), 0.0);
            assert_eq!(dh_a(&k, &k, &a).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_test_vector_metric() {
        let b = MetricBasis::new(vec![PredualVector::real(vec![1.0, 0.0])]).unwrap();
        let d = seq_metric_d(&Functional::new(vec![1.5, 7.0]).unwrap(), &Functional::new(vec![0.5, -1.0]).unwrap(), &b).unwrap();
        assert_eq!(d, 0.5);
    }

    #[test]
    fn complex_basis_matches_a_scan() {
        let b = MetricBasis::new(vec![PredualVector::new(vec![0.6, 0.0], vec![0.0, 0.8]).unwrap()]).unwrap();
        let seg = poly(&[&[0.0, 0.0], &[1.0, 1.0]]);
        let pt = poly(&[&[1.0, 0.0]]);
        // image of the segment is {γ(0.6 + 0.8i)}; the point maps to 0.6
        let d = hausdorff_d(&pt, &seg, &b, 1e-6).unwrap();
        let z = |g: f64| (0.6 - 0.6 * g).hypot(-0.8 * g);
        let inner = (0..=100_000).map(|k| z(k as f64 / 100_000.0)).fold(f64::INFINITY, f64::min);
        let expected = 0.5 * inner.max(z(0.0)).max(z(1.0));
        assert!((d - expected).abs() < 1e-5, "{d} vs {expected}");
        let fw = hausdorff_d_with(&pt, &seg, &b, 1e-6, InnerSolver::FrankWolfe { max_iter: 10_000 }).unwrap();
        assert!((fw - expected).abs() < 2e-6, "{fw} vs {expected}");
    }

    fn arb_poly(dim: usize) -> impl Strategy<Value = Polytope> {
        prop::collection::vec(prop::collection::vec(-1.0f64..1.0, dim), 1..6)
            .prop_map(|pts| Polytope::from_points(pts).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn dh_a_is_a_pseudometric(k1 in arb_poly(3), k2 in arb_poly(3), k3 in arb_poly(3),
                                  re in prop::collection::vec(-0.5f64..0.5, 3), im in prop::collection::vec(-0.5f64..0.5, 3)) {
            let a = PredualVector::new(re, im).unwrap();
            let d12 = dh_a(&k1, &k2, &a).unwrap();
            prop_assert_eq!(d12, dh_a(&k2, &k1, &a).unwrap());
            let d13 = dh_a(&k1, &k3, &a).unwrap();
            let d32 = dh_a(&k3, &k2, &a).unwrap();
            prop_assert!(d12 <= d13 + d32 + 1e-12);
        }

        #[test]
        fn singleton_embedding_is_exact(p in prop::collection::vec(-2.0f64..2.0, 4), q in prop::collection::vec(-2.0f64..2.0, 4),
                                       re in prop::collection::vec(-0.5f64..0.5, 4)) {
            let a = PredualVector::real(re);
            let s1 = Functional::new(p).unwrap();
            let s2 = Functional::new(q).unwrap();
            let d = dh_a(&Polytope::singleton(s1.clone()), &Polytope::singleton(s2.clone()), &a).unwrap();
            prop_assert_eq!(d, s1.sub(&s2).pair(&a).norm());
        }

        #[test]
        fn seq_metric_triangle(p in prop::collection::vec(-2.0f64..2.0, 3), q in prop::collection::vec(-2.0f64..2.0, 3),
                               r in prop::collection::vec(-2.0f64..2.0, 3)) {
            let b = MetricBasis::standard(3);
            let (p, q, r) = (Functional::new(p).unwrap(), Functional::new(q).unwrap(), Functional::new(r).unwrap());
            let pq = seq_metric_d(&p, &q, &b).unwrap();
            prop_assert_eq!(pq, seq_metric_d(&q, &p, &b).unwrap());
            prop_assert!(pq <= seq_metric_d(&p, &r, &b).unwrap() + seq_metric_d(&r, &q, &b).unwrap() + 1e-15);
        }

        #[test]
        fn differing_hulls_are_separated(k1 in arb_poly(2), k2 in arb_poly(2)) {
            match separating_vector(&k1, &k2).unwrap() {
                Some(a) => prop_assert!(dh_a(&k1, &k2, &a).unwrap() > 0.0),
                None => prop_assert!(hausdorff_d(&k1, &k2, &MetricBasis::standard(2), 1e-9).unwrap() < 1e-8),
            }
        }
    }
}
