use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use serde_json::json;

use super::hull::{is_exposed, GAP_TOL};
use super::{Functional, Polytope, PredualVector};
use crate::error::{Error, Result};

/// One step `ω_n = (1 − λ_n) ϖ_n + λ_n σ_n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoulsenStep {
    pub n: usize,
    pub lambda: f64,
    pub sigma_norm: f64,
    pub sigma: Functional,
    /// `(k, i)`: `ϖ_n` is the `i`-th rational combination of the vertices of `K_k`.
    pub varpi_index: (usize, usize),
    pub varpi: Functional,
    pub omega: Functional,
    /// `A_n`, with `Re σ_n(A_n) = 1` and `A_n = 0` on every earlier point.
    pub exposing: PredualVector,
    /// Exposure gaps of `ω_1 … ω_n` in `K_n`, in order.
    pub certificate_gaps: Vec<f64>,
}

impl PoulsenStep {
    pub fn min_gap(&self) -> f64 {
        self.certificate_gaps.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Record of [`poulsen_construct`]. Points are stored in an orthonormal frame
/// of the ambient space whose leading axes span the initial polytope and whose
/// `(r + n)`-th axis carries `σ_n`, so the perturbations stay exact however
/// small they get; [`PoulsenTrace::to_ambient`] maps back.
#[derive(Clone, Debug)]
pub struct PoulsenTrace {
    pub steps: Vec<PoulsenStep>,
    pub current: Polytope,
    pub reference: Polytope,
    pub epsilon: f64,
    pub norm_bound: f64,
    pub ambient_dim: usize,
    pub seed: u64,
    /// Rank of the initial vertex set.
    pub rank: usize,
    frame: DMatrix<f64>,
}

impl PoulsenTrace {
    /// `K_j` for `j ≤ steps.len()`.
    pub fn prefix(&self, j: usize) -> Polytope {
        let m = self.reference.len();
        Polytope { vertices: self.current.vertices[..m + j].to_vec(), reduced: false }
    }

    pub fn prefixes(&self) -> Vec<Polytope> {
        (0..=self.steps.len()).map(|j| self.prefix(j)).collect()
    }

    pub fn to_ambient(&self, f: &Functional) -> Functional {
        let v = &self.frame * DVector::from_column_slice(f.coordinates());
        Functional::from_trusted(v.iter().copied().collect())
    }

    pub fn current_ambient(&self) -> Polytope {
        Polytope { vertices: self.current.vertices.iter().map(|v| self.to_ambient(v)).collect(), reduced: false }
    }

    /// `(Σ_{k=1..n} 2^{-k}) ε`.
    pub fn drift_bound(&self) -> f64 {
        (1..=self.steps.len()).map(|k| 0.5f64.powi(k as i32)).sum::<f64>() * self.epsilon
    }

    pub fn log_json(&self) -> serde_json::Value {
        json!({
            "epsilon": self.epsilon,
            "norm_bound": self.norm_bound,
            "ambient_dim": self.ambient_dim,
            "seed": self.seed,
            "rank": self.rank,
            "steps": self.steps.iter().map(|s| json!({
                "n": s.n,
                "lambda": s.lambda,
                "sigma_norm": s.sigma_norm,
                "exposing_norm": s.exposing.norm(),
                "omega_norm": s.omega.norm(),
                "varpi": [s.varpi_index.0, s.varpi_index.1],
                "certificate_gaps": s.certificate_gaps,
                "min_gap": s.min_gap(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// `λ_n = min{1, 2^{-(n+1)} ε / D}`.
pub fn poulsen_lambda(n: usize, epsilon: f64, norm_bound: f64) -> f64 {
    (0.5f64.powi(n as i32 + 1) * epsilon / norm_bound).min(1.0)
}

/// Grows `K_0` by `n_steps` exposed points, each a small push of a rational
/// convex combination of earlier points along a fresh orthogonal direction.
/// Every earlier point is re-certified exposed after each step.
pub fn poulsen_construct(k0: &Polytope, epsilon: f64, n_steps: usize, norm_bound: f64, seed: u64) -> Result<PoulsenTrace> {
    let n_amb = k0.dim();
    let m = k0.len();
    if n_amb <= m + n_steps {
        return Err(Error::AmbientTooSmall { ambient: n_amb, required: m + n_steps + 1 });
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) || !(norm_bound > 0.0 && norm_bound.is_finite()) {
        return Err(Error::InvalidInput("epsilon and norm bound must be positive".into()));
    }
    if k0.max_norm() > norm_bound * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!("initial polytope leaves the ball of radius {norm_bound}")));
    }
    let (frame, rank) = adapted_frame(k0, seed);
    let to_frame = |v: &Functional| -> Functional {
        let mut c = vec![0.0; n_amb];
        for (k, ck) in c.iter_mut().enumerate().take(rank) {
            *ck = frame.column(k).iter().zip(v.coordinates()).map(|(a, b)| a * b).sum();
        }
        Functional::from_trusted(c)
    };
    let reference = Polytope { vertices: k0.vertices.iter().map(to_frame).collect(), reduced: k0.reduced };
    let mut vertices = reference.vertices.clone();
    let mut steps: Vec<PoulsenStep> = Vec::with_capacity(n_steps);

    for n in 1..=n_steps {
        let lambda = poulsen_lambda(n, epsilon, norm_bound);
        let sigma_norm = steps.iter().map(|s| 0.5 * s.sigma_norm * s.lambda).fold(norm_bound, f64::min);
        let axis = rank + n - 1;
        let mut sigma = vec![0.0; n_amb];
        sigma[axis] = sigma_norm;
        let sigma = Functional::from_trusted(sigma);

        let (a, _) = cantor_unpair(n - 1);
        let (k, i) = cantor_unpair(a);
        let varpi = rational_combination(&vertices[..m + k], i);
        let omega = varpi.lerp(&sigma, lambda);
        if omega.norm() > norm_bound * (1.0 + 1e-12) {
            return Err(Error::InvalidInput(format!("step {n} left the ball of radius {norm_bound}")));
        }
        let mut exposing = vec![0.0; n_amb];
        exposing[axis] = 1.0 / sigma_norm;
        vertices.push(omega.clone());
        steps.push(PoulsenStep {
            n,
            lambda,
            sigma_norm,
            sigma,
            varpi_index: (k, i),
            varpi,
            omega,
            exposing: PredualVector::real(exposing),
            certificate_gaps: Vec::new(),
        });

        let kn = Polytope { vertices: vertices.clone(), reduced: false };
        let mut gaps = Vec::with_capacity(n);
        for (j, s) in steps.iter().enumerate() {
            let c = is_exposed(&kn, &s.omega, &s.exposing, GAP_TOL)?;
            if !c.exposed {
                return Err(Error::CertificateFailure { step: n, point: j + 1, gap: c.gap });
            }
            gaps.push(c.gap);
        }
        steps.last_mut().expect("just pushed").certificate_gaps = gaps;
    }

    Ok(PoulsenTrace {
        steps,
        current: Polytope { vertices, reduced: false },
        reference,
        epsilon,
        norm_bound,
        ambient_dim: n_amb,
        seed,
        rank,
        frame,
    })
}

/// Orthonormal columns: first a basis of the span of the vertices, then a
/// seeded completion.
fn adapted_frame(k0: &Polytope, seed: u64) -> (DMatrix<f64>, usize) {
    let n = k0.dim();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
    let push = |cols: &mut Vec<DVector<f64>>, v: DVector<f64>, floor: f64| -> bool {
        let mut w = v;
        for _ in 0..2 {
            for q in cols.iter() {
                let c = q.dot(&w);
                w -= q * c;
            }
        }
        let norm = w.norm();
        if norm > floor {
            cols.push(w / norm);
            true
        } else {
            false
        }
    };
    let scale = k0.max_norm().max(f64::MIN_POSITIVE);
    for v in &k0.vertices {
        push(&mut cols, DVector::from_column_slice(v.coordinates()), 1e-12 * scale);
    }
    let rank = cols.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while cols.len() < n {
        let g = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        push(&mut cols, g, 1e-6);
    }
    (DMatrix::from_columns(&cols), rank)
}

/// Inverse of the Cantor pairing `(x, y) ↦ (x + y)(x + y + 1)/2 + y`.
pub(crate) fn cantor_unpair(z: usize) -> (usize, usize) {
    let mut w = (((8 * z + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    let y = z - w * (w + 1) / 2;
    (w - y, y)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc.saturating_mul((n - j) as u128) / (j as u128 + 1);
    }
    acc
}

/// The `i`-th vector in `ℕ^len`, ordered by total then lexicographically.
pub(crate) fn unrank_composition(mut i: u128, len: usize) -> Vec<usize> {
    let mut total = 0;
    loop {
        let count = binomial(total + len - 1, len - 1);
        if i < count {
            break;
        }
        i -= count;
        total += 1;
    }
    let mut out = vec![0; len];
    let mut left = total;
    for (p, slot) in out.iter_mut().enumerate().take(len - 1) {
        let rest = len - p - 1;
        for v in 0..=left {
            let count = binomial(left - v + rest - 1, rest - 1);
            if i < count {
                *slot = v;
                left -= v;
                break;
            }
            i -= count;
        }
    }
    out[len - 1] = left;
    out
}

/// `Σ_v (1 + c_v) v / Σ_v (1 + c_v)` with `c` the `i`-th composition; `i = 0`
/// gives the barycenter.
pub(crate) fn rational_combination(vertices: &[Functional], i: usize) -> Functional {
    let c = unrank_composition(i as u128, vertices.len());
    let total: f64 = c.iter().map(|&x| 1.0 + x as f64).sum();
    let mut out = vec![0.0; vertices[0].dim()];
    for (v, &cv) in vertices.iter().zip(&c) {
        let w = (1.0 + cv as f64) / total;
        for (o, x) in out.iter_mut().zip(v.coordinates()) {
            *o += w * x;
        }
    }
    Functional::from_trusted(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_k0() -> Polytope {
        Polytope::from_points(vec![vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.0], vec![0.0, 0.5, 0.0, 0.0, 0.0, 0.0]]).unwrap()
    }

    #[test]
    fn cantor_pairs_cover_the_plane() {
        let pairs: Vec<(usize, usize)> = (0..10).map(cantor_unpair).collect();
        assert_eq!(pairs[..6], [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
        for z in 0..500 {
            let (x, y) = cantor_unpair(z);
            assert_eq!((x + y) * (x + y + 1) / 2 + y, z);
        }
    }

    #[test]
    fn compositions_are_graded() {
        let all: Vec<Vec<usize>> = (0..10).map(|i| unrank_composition(i, 3)).collect();
        assert_eq!(all[0], vec![0, 0, 0]);
        assert_eq!(all[1..4], [vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);
        assert!(all[4..10].iter().all(|c| c.iter().sum::<usize>() == 2));
        let mut sorted = all.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), 10);
    }

    #[test]
    fn first_lambda_is_a_quarter() {
        assert_eq!(poulsen_lambda(1, 1.0, 1.0), 0.25);
        let t = poulsen_construct(&small_k0(), 1.0, 3, 1.0, 7).unwrap();
        assert_eq!(t.steps[0].lambda, 0.25);
        assert_eq!(t.steps[0].sigma_norm, 1.0);
        assert_eq!(t.steps[1].sigma_norm, 0.125);
    }

    #[test]
    fn zero_steps_keep_the_polytope() {
        let k0 = small_k0();
        let t = poulsen_construct(&k0, 0.1, 0, 1.0, 1).unwrap();
        assert!(t.steps.is_empty());
        let back = t.current_ambient();
        for (a, b) in back.vertices().iter().zip(k0.vertices()) {
            assert!(a.max_abs_diff(b) < 1e-15);
        }
    }

    #[test]
    fn rejects_small_ambient_space() {
        assert_eq!(
            poulsen_construct(&small_k0(), 0.1, 4, 1.0, 1).unwrap_err(),
            Error::AmbientTooSmall { ambient: 6, required: 7 }
        );
        let far = Polytope::from_points(vec![vec![2.0, 0.0, 0.0, 0.0]]).unwrap();
        assert!(poulsen_construct(&far, 0.1, 1, 1.0, 1).is_err());
    }

    #[test]
    fn exposing_vectors_vanish_on_earlier_points() {
        let t = poulsen_construct(&small_k0(), 0.5, 3, 1.0, 3).unwrap();
        for (j, s) in t.steps.iter().enumerate() {
            assert_eq!(s.sigma.pair(&s.exposing).re, 1.0);
            for v in &t.current.vertices()[..t.reference.len() + j] {
                assert_eq!(v.pair(&s.exposing).re, 0.0);
            }
            assert!(s.omega.norm() <= 1.0);
        }
    }
}
