use std::collections::BTreeMap;

/// Real polynomial in `nvars` commuting variables, stored as a map from
/// exponent vectors to nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The coordinate polynomial `x_j`.
    pub fn variable(nvars: usize, j: usize) -> Self {
        assert!(j < nvars, "variable index out of range");
        let mut e = vec![0; nvars];
        e[j] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, 1.0);
        p
    }

    /// Builds from `(exponents, coefficient)` pairs, collecting like terms.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector has wrong length");
            p.add_term(e, c);
        }
        p
    }

    /// `n_terms` monomials of total degree at most `max_degree`, each with a
    /// coefficient drawn from `[-1, 1]`.
    pub fn random(nvars: usize, max_degree: u32, n_terms: usize, rng: &mut impl rand::Rng) -> Self {
        let mut p = Self::zero(nvars);
        for _ in 0..n_terms {
            let mut e = vec![0u32; nvars];
            if nvars > 0 {
                let degree = rng.random_range(0..=max_degree);
                for _ in 0..degree {
                    e[rng.random_range(0..nvars)] += 1;
                }
            }
            p.add_term(e, rng.random_range(-1.0..=1.0));
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Constant value if the polynomial has no variable dependence.
    pub fn as_constant(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => self.terms.iter().next().filter(|(e, _)| e.iter().all(|&k| k == 0)).map(|(_, c)| *c),
            _ => None,
        }
    }

    fn add_term(&mut self, e: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(e);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "polynomials over different variable sets");
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p.add_term(e.clone(), *c);
        }
        p
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), c * s);
        }
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "polynomials over different variable sets");
        let mut p = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }

    /// `∂/∂x_j`.
    pub fn partial(&self, j: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[j] > 0 {
                let mut e2 = e.clone();
                e2[j] -= 1;
                p.add_term(e2, c * e[j] as f64);
            }
        }
        p
    }

    /// Rewrites into `new_nvars` variables with `x_j ↦ scale_j · x_{target_j}`.
    pub fn substitute(&self, new_nvars: usize, map: &[(usize, f64)]) -> Self {
        assert_eq!(map.len(), self.nvars, "substitution map has wrong length");
        let mut p = Self::zero(new_nvars);
        for (e, c) in &self.terms {
            let mut e2 = vec![0u32; new_nvars];
            let mut coef = *c;
            for (j, &k) in e.iter().enumerate() {
                if k > 0 {
                    let (target, s) = map[j];
                    e2[target] += k;
                    coef *= s.powi(k as i32);
                }
            }
            p.add_term(e2, coef);
        }
        p
    }

    /// Appends unused variables.
    pub fn extend(&self, new_nvars: usize) -> Self {
        assert!(new_nvars >= self.nvars);
        let map: Vec<(usize, f64)> = (0..self.nvars).map(|j| (j, 1.0)).collect();
        self.substitute(new_nvars, &map)
    }

    fn monomial(e: &[u32], x: &[f64], skip: &[usize]) -> f64 {
        let mut v = 1.0;
        for (j, &k) in e.iter().enumerate() {
            let mut k = k as i32;
            for &s in skip {
                if s == j {
                    k -= 1;
                }
            }
            if k > 0 {
                v *= x[j].powi(k);
            }
        }
        v
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nvars);
        self.terms.iter().map(|(e, c)| c * Self::monomial(e, x, &[])).sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nvars);
        let mut g = vec![0.0; self.nvars];
        for (e, c) in &self.terms {
            for j in 0..self.nvars {
                if e[j] > 0 {
                    g[j] += c * e[j] as f64 * Self::monomial(e, x, &[j]);
                }
            }
        }
        g
    }

    /// Row-major `n×n` Hessian.
    pub fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let n = self.nvars;
        assert_eq!(x.len(), n);
        let mut h = vec![0.0; n * n];
        for (e, c) in &self.terms {
            for j in 0..n {
                if e[j] == 0 {
                    continue;
                }
                for k in j..n {
                    let factor = if j == k {
                        if e[j] < 2 {
                            continue;
                        }
                        (e[j] * (e[j] - 1)) as f64
                    } else {
                        if e[k] == 0 {
                            continue;
                        }
                        (e[j] * e[k]) as f64
                    };
                    let v = c * factor * Self::monomial(e, x, &[j, k]);
                    h[j * n + k] += v;
                    if j != k {
                        h[k * n + j] += v;
                    }
                }
            }
        }
        h
    }

    /// Entrywise bound on `|∂_j∂_k p|` over the box `|x_i| ≤ radius_i`.
    pub fn hessian_abs_bound(&self, radius: &[f64]) -> Vec<f64> {
        let abs = Self { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c.abs())).collect() };
        abs.hessian(radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> Polynomial {
        Polynomial::from_terms(2, [(vec![2, 0], 0.5), (vec![1, 1], -3.0), (vec![0, 3], 2.0), (vec![0, 0], 1.0)])
    }

    #[test]
    fn eval_grad_hessian() {
        let p = sample();
        let x = [0.3, -0.7];
        let v = 0.5 * 0.09 - 3.0 * 0.3 * -0.7 + 2.0 * (-0.7f64).powi(3) + 1.0;
        assert!((p.eval(&x) - v).abs() < 1e-15);
        let g = p.gradient(&x);
        assert!((g[0] - (0.3 - 3.0 * -0.7)).abs() < 1e-15);
        assert!((g[1] - (-0.9 + 6.0 * 0.49)).abs() < 1e-14);
        let h = p.hessian(&x);
        assert_eq!(h[0], 1.0);
        assert_eq!(h[1], -3.0);
        assert_eq!(h[2], -3.0);
        assert!((h[3] - 12.0 * -0.7).abs() < 1e-14);
    }

    #[test]
    fn zero_coefficients_pruned() {
        let p = Polynomial::variable(2, 0);
        let q = p.add(&p.scale(-1.0));
        assert!(q.is_zero());
        assert_eq!(q.as_constant(), Some(0.0));
    }

    #[test]
    fn substitution_merges_variables() {
        let p = Polynomial::variable(2, 0).mul(&Polynomial::variable(2, 1));
        let q = p.substitute(1, &[(0, 1.0), (0, -2.0)]);
        assert_eq!(q, Polynomial::from_terms(1, [(vec![2], -2.0)]));
    }

    proptest! {
        #[test]
        fn partial_matches_gradient(coefs in prop::collection::vec(-2.0f64..2.0, 6), x in prop::collection::vec(-1.0f64..1.0, 2)) {
            let exps = [[0, 0], [1, 0], [0, 1], [2, 1], [1, 3], [3, 0]];
            let p = Polynomial::from_terms(2, exps.iter().zip(&coefs).map(|(e, c)| (e.to_vec(), *c)));
            let g = p.gradient(&x);
            for j in 0..2 {
                prop_assert!((p.partial(j).eval(&x) - g[j]).abs() < 1e-12);
            }
            let h = p.hessian(&x);
            for j in 0..2 {
                for k in 0..2 {
                    prop_assert!((p.partial(j).partial(k).eval(&x) - h[j * 2 + k]).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn product_evaluates_as_product(a in prop::collection::vec(-2.0f64..2.0, 3), b in prop::collection::vec(-2.0f64..2.0, 3), x in prop::collection::vec(-1.0f64..1.0, 2)) {
            let exps = [[0u32, 0], [1, 0], [1, 2]];
            let p = Polynomial::from_terms(2, exps.iter().zip(&a).map(|(e, c)| (e.to_vec(), *c)));
            let q = Polynomial::from_terms(2, exps.iter().zip(&b).map(|(e, c)| (e.to_vec(), *c)));
            prop_assert!((p.mul(&q).eval(&x) - p.eval(&x) * q.eval(&x)).abs() < 1e-12);
        }
    }
}
