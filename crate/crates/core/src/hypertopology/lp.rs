//! Small linear programs over vertex lists.

use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome, Solution, Variable};

use super::Functional;
use crate::error::{Error, Result};

fn solve(p: &Problem) -> Result<Solution> {
    match p.solve() {
        Ok(SolveOutcome::Solution(s)) => Ok(s),
        Ok(other) => Err(Error::Lp(format!("{other:?}"))),
        Err(e) => Err(Error::Lp(e.to_string())),
    }
}

fn simplex_weights(p: &mut Problem, m: usize) -> Vec<Variable> {
    let w: Vec<Variable> = (0..m).map(|_| p.add_var(0.0, (0.0, 1.0))).collect();
    let all: Vec<(Variable, f64)> = w.iter().map(|&v| (v, 1.0)).collect();
    p.add_constraint(&all, ComparisonOp::Eq, 1.0);
    w
}

/// Clamped, renormalized weights read back from an LP solution.
fn read_weights(s: &Solution, w: &[Variable]) -> Vec<f64> {
    let mut out: Vec<f64> = w.iter().map(|&v| s[v].max(0.0)).collect();
    let total: f64 = out.iter().sum();
    if total > 0.0 {
        out.iter_mut().for_each(|x| *x /= total);
    } else {
        out = vec![1.0 / w.len() as f64; w.len()];
    }
    out
}

pub(crate) fn combine(vertices: &[&Functional], weights: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; vertices[0].dim()];
    for (v, w) in vertices.iter().zip(weights) {
        for (ci, vi) in c.iter_mut().zip(v.coordinates()) {
            *ci += w * vi;
        }
    }
    c
}

/// `min_{w ∈ Δ} ‖p − Σ w_i v_i‖_1`, zero for exact vertex matches.
pub(crate) fn hull_residual(point: &Functional, vertices: &[&Functional]) -> Result<f64> {
    if vertices.is_empty() {
        return Ok(f64::INFINITY);
    }
    if vertices.iter().any(|v| v.coordinates() == point.coordinates()) {
        return Ok(0.0);
    }
    let n = point.dim();
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let w = simplex_weights(&mut p, vertices.len());
    for k in 0..n {
        let r = p.add_var(1.0, (0.0, f64::INFINITY));
        let target = point.coordinates()[k];
        let mut plus: Vec<(Variable, f64)> = vec![(r, 1.0)];
        let mut minus: Vec<(Variable, f64)> = vec![(r, 1.0)];
        for (&wi, v) in w.iter().zip(vertices) {
            let c = v.coordinates()[k];
            if c != 0.0 {
                plus.push((wi, c));
                minus.push((wi, -c));
            }
        }
        // r ≥ target − Σ w v and r ≥ Σ w v − target
        p.add_constraint(&plus, ComparisonOp::Ge, target);
        p.add_constraint(&minus, ComparisonOp::Ge, -target);
    }
    let s = solve(&p)?;
    let weights = read_weights(&s, &w);
    let c = combine(vertices, &weights);
    let exact: f64 = c.iter().zip(point.coordinates()).map(|(a, b)| (a - b).abs()).sum();
    Ok(exact.min(s.objective().max(0.0)))
}

/// Direction `a ∈ [−1, 1]^N` maximizing `⟨a, p⟩ − max_i ⟨a, v_i⟩`, with that margin.
pub(crate) fn separating_direction(point: &Functional, vertices: &[&Functional]) -> Result<(Vec<f64>, f64)> {
    let n = point.dim();
    let mut p = Problem::new(OptimizationDirection::Maximize);
    let a: Vec<Variable> = (0..n).map(|k| p.add_var(point.coordinates()[k], (-1.0, 1.0))).collect();
    let tau = p.add_var(-1.0, (f64::NEG_INFINITY, f64::INFINITY));
    for v in vertices {
        let mut row: Vec<(Variable, f64)> = a.iter().zip(v.coordinates()).map(|(&ak, &c)| (ak, c)).collect();
        row.push((tau, -1.0));
        p.add_constraint(&row, ComparisonOp::Le, 0.0);
    }
    let s = solve(&p)?;
    let dir: Vec<f64> = a.iter().map(|&v| s[v].clamp(-1.0, 1.0)).collect();
    let dot = |x: &[f64]| dir.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    let top = vertices.iter().map(|v| dot(v.coordinates())).fold(f64::NEG_INFINITY, f64::max);
    Ok((dir.clone(), dot(point.coordinates()) - top))
}

/// `min_{w ∈ Δ} Σ_n c_n |(σ − Σ w_i v_i)(A_n)|` for real test vectors, given as
/// rows `values[i][n] = v_i(A_n)` and `target[n] = σ(A_n)`. Returns the value
/// recomputed at the clamped LP weights.
pub(crate) fn weighted_l1_min(target: &[f64], values: &[Vec<f64>], coef: &[f64]) -> Result<(f64, Vec<f64>)> {
    let m = values.len();
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let w = simplex_weights(&mut p, m);
    for (k, (&t, &c)) in target.iter().zip(coef).enumerate() {
        let r = p.add_var(c, (0.0, f64::INFINITY));
        let mut plus: Vec<(Variable, f64)> = vec![(r, 1.0)];
        let mut minus: Vec<(Variable, f64)> = vec![(r, 1.0)];
        for (&wi, row) in w.iter().zip(values) {
            if row[k] != 0.0 {
                plus.push((wi, row[k]));
                minus.push((wi, -row[k]));
            }
        }
        p.add_constraint(&plus, ComparisonOp::Ge, t);
        p.add_constraint(&minus, ComparisonOp::Ge, -t);
    }
    let s = solve(&p)?;
    let weights = read_weights(&s, &w);
    let value = target
        .iter()
        .zip(coef)
        .enumerate()
        .map(|(k, (&t, &c))| c * (t - weights.iter().zip(values).map(|(wi, row)| wi * row[k]).sum::<f64>()).abs())
        .sum();
    Ok((value, weights))
}

/// `min_{w ∈ Δ} Σ_n c_n |z_n − Σ w_i v_{i,n}|` for complex values, by
/// cutting planes `t_n ≥ Re(e^{−iθ}(z_n − Σ w_i v_{i,n}))`. Each round adds the
/// cut at the current residual phase; the LP value is a lower bound and the
/// exact objective at the LP weights an upper bound, and the upper bound is
/// returned once the two are within `tol`.
pub(crate) fn weighted_modulus_min(target: &[(f64, f64)], values: &[Vec<(f64, f64)>], coef: &[f64], tol: f64) -> Result<f64> {
    const MAX_ROUNDS: usize = 500;
    let m = values.len();
    let mut cuts: Vec<(usize, f64, f64)> = Vec::new();
    for n in 0..target.len() {
        for k in 0..8 {
            let th = std::f64::consts::FRAC_PI_4 * k as f64;
            cuts.push((n, th.cos(), th.sin()));
        }
    }
    let objective = |w: &[f64]| -> (f64, Vec<(f64, f64)>) {
        let res: Vec<(f64, f64)> = target
            .iter()
            .enumerate()
            .map(|(n, &(tr, ti))| {
                let (mut r, mut i) = (tr, ti);
                for (wi, row) in w.iter().zip(values) {
                    r -= wi * row[n].0;
                    i -= wi * row[n].1;
                }
                (r, i)
            })
            .collect();
        (res.iter().zip(coef).map(|(&(r, i), c)| c * r.hypot(i)).sum(), res)
    };
    let mut gap = f64::INFINITY;
    for _ in 0..MAX_ROUNDS {
        let mut p = Problem::new(OptimizationDirection::Minimize);
        let w = simplex_weights(&mut p, m);
        let t: Vec<Variable> = coef.iter().map(|&c| p.add_var(c, (0.0, f64::INFINITY))).collect();
        for &(n, c, s) in &cuts {
            let mut row: Vec<(Variable, f64)> = vec![(t[n], 1.0)];
            for (&wi, vals) in w.iter().zip(values) {
                let a = c * vals[n].0 + s * vals[n].1;
                if a != 0.0 {
                    row.push((wi, a));
                }
            }
            p.add_constraint(&row, ComparisonOp::Ge, c * target[n].0 + s * target[n].1);
        }
        let sol = solve(&p)?;
        let weights = read_weights(&sol, &w);
        let (upper, res) = objective(&weights);
        gap = upper - sol.objective();
        if gap <= tol {
            return Ok(upper);
        }
        let before = cuts.len();
        for (n, &(r, i)) in res.iter().enumerate() {
            let norm = r.hypot(i);
            if norm > 0.0 && norm - sol[t[n]] > 0.25 * tol {
                cuts.push((n, r / norm, i / norm));
            }
        }
        if cuts.len() == before {
            break;
        }
    }
    Err(Error::NoConvergence { iterations: MAX_ROUNDS, defect: gap })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(v: &[f64]) -> Functional {
        Functional::new(v.to_vec()).unwrap()
    }

    #[test]
    fn midpoint_has_zero_residual() {
        let a = f(&[0.0, 0.0]);
        let b = f(&[2.0, 0.0]);
        assert!(hull_residual(&f(&[1.0, 0.0]), &[&a, &b]).unwrap() < 1e-12);
        let r = hull_residual(&f(&[1.0, 1.0]), &[&a, &b]).unwrap();
        assert!((r - 1.0).abs() < 1e-9);
    }

    #[test]
    fn separation_margin_is_positive_outside() {
        let a = f(&[0.0, 0.0]);
        let b = f(&[1.0, 0.0]);
        let (dir, margin) = separating_direction(&f(&[0.5, 1.0]), &[&a, &b]).unwrap();
        assert!(margin > 0.5);
        assert!(dir[1] > 0.0);
        let (_, inside) = separating_direction(&f(&[0.5, 0.0]), &[&a, &b]).unwrap();
        assert!(inside <= 1e-12);
    }

    #[test]
    fn modulus_cutting_planes_match_a_scan() {
        // segment from 0 to 1 + i against the point 1
        let values = vec![vec![(0.0, 0.0)], vec![(1.0, 1.0)]];
        let v = weighted_modulus_min(&[(1.0, 0.0)], &values, &[1.0], 1e-10).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-9, "{v}");
    }
}
