use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Hamiltonian;
use crate::algebra::{AlgebraContext, State};
use crate::observables::ScalarMap;

/// Estimate of `D0` with
/// `‖Dh(t; ρ) − Dh(t; ρ̃)‖ ≤ D0 · max_j |(ρ − ρ̃)(B_j/‖B_j‖)|` for `t` in `span`.
///
/// Generators are compared in the norm modulo multiples of `1` (half the
/// spectral spread), the norm that bounds the derivation `i[Dh, ·]`. The
/// largest sampled ratio is doubled; for polynomial `h` the Hessian bound
/// from [`lipschitz_analytic`] is computed too and the larger value returned.
pub fn estimate_lipschitz(h: &Hamiltonian, samples: usize, seed: u64, span: (f64, f64)) -> f64 {
    let sampled = 2.0 * sampled_ratio(h, samples, seed, span);
    match lipschitz_analytic(h, span) {
        Some(a) => a.max(sampled),
        None => sampled,
    }
}

/// `Σ_c sup|a_c| Σ_{j,k} c(B_j) H^c_{jk} ‖B_k‖`, where `c(B)` is the centered
/// norm and `H^c` bounds the Hessian of `g_c` on the box `|x_k| ≤ ‖B_k‖`.
pub fn lipschitz_analytic(h: &Hamiltonian, span: (f64, f64)) -> Option<f64> {
    let reg = h.registry();
    let n = reg.len();
    let norms = reg.norms();
    let centered: Vec<f64> = reg.observables().iter().map(|b| b.centered_norm()).collect();
    let mut total = 0.0;
    for (sup, f) in h.component_bounds(span.0.min(span.1), span.0.max(span.1)) {
        let ScalarMap::Polynomial(p) = f.scalar_map() else {
            return None;
        };
        let bound = p.hessian_abs_bound(&norms);
        let mut acc = 0.0;
        for j in 0..n {
            for k in 0..n {
                acc += centered[j] * bound[j * n + k] * norms[k];
            }
        }
        total += sup * acc;
    }
    Some(total)
}

fn sampled_ratio(h: &Hamiltonian, samples: usize, seed: u64, span: (f64, f64)) -> f64 {
    let reg = h.registry();
    if reg.is_empty() {
        return 0.0;
    }
    let ctx = AlgebraContext::new(h.dim()).expect("registry dimension is positive");
    let norms = reg.norms();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for k in 0..samples {
        let t = if span.0 == span.1 { span.0 } else { rng.random_range(span.0.min(span.1)..=span.0.max(span.1)) };
        let draw = |rng: &mut ChaCha8Rng, pure: bool| -> State {
            let s = rng.next_u64();
            if pure {
                ctx.random_pure_state(s)
            } else {
                ctx.random_state(s)
            }
        };
        let a = draw(&mut rng, k % 2 == 0);
        let far = draw(&mut rng, k % 3 == 0);
        // Every other pair is close, to probe the local slope.
        let b = if k % 2 == 1 {
            let lambda = 10f64.powf(rng.random_range(-3.0..0.0));
            a.mix(&far, lambda).expect("weights in range")
        } else {
            far
        };
        let (Ok(xa), Ok(xb)) = (reg.moments(&a), reg.moments(&b)) else {
            continue;
        };
        let denom = xa
            .iter()
            .zip(&xb)
            .zip(&norms)
            .filter(|(_, n)| **n > 0.0)
            .map(|((u, v), n)| (u - v).abs() / n)
            .fold(0.0, f64::max);
        if denom < 1e-12 {
            continue;
        }
        let diff = &h.generator_at(t, &xa) - &h.generator_at(t, &xb);
        best = best.max(diff.centered_norm() / denom);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{ObservableRegistry, Polynomial, PolynomialFunction};

    fn poly(names: &[&str], terms: &[(Vec<u32>, f64)]) -> Hamiltonian {
        let r = ObservableRegistry::from_pauli(names).unwrap();
        Hamiltonian::autonomous(PolynomialFunction::new(r, Polynomial::from_terms(names.len(), terms.to_vec())).unwrap())
    }

    #[test]
    fn affine_hamiltonian_has_zero_constant() {
        let h = poly(&["X", "Z"], &[(vec![1, 0], 0.7), (vec![0, 1], -1.3)]);
        assert_eq!(lipschitz_analytic(&h, (0.0, 1.0)), Some(0.0));
        assert!(estimate_lipschitz(&h, 200, 1, (0.0, 1.0)) < 1e-12);
    }

    #[test]
    fn mean_field_bound() {
        let h = poly(&["Z"], &[(vec![2], 0.5)]);
        let a = lipschitz_analytic(&h, (0.0, 1.0)).unwrap();
        assert!((a - 1.0).abs() < 1e-15);
        let est = estimate_lipschitz(&h, 500, 3, (0.0, 1.0));
        assert!((1.0..=2.0 + 1e-9).contains(&est), "{est}");
    }

    #[test]
    fn homogeneous_under_scaling() {
        let h = poly(&["XI", "ZZ", "IY"], &[(vec![2, 1, 0], 0.4), (vec![0, 1, 1], -0.8), (vec![0, 0, 3], 0.3)]);
        let a = estimate_lipschitz(&h, 300, 9, (0.0, 2.0));
        let b = estimate_lipschitz(&h.scale(2.0), 300, 9, (0.0, 2.0));
        assert!((b - 2.0 * a).abs() <= 1e-9 * a.max(1.0));
    }
}
