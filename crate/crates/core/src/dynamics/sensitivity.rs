use super::flow::oriented;
use super::propagator::mesh_unitaries;
use super::{picard_flow, SolverConfig};
use crate::algebra::{trace_product, AlgebraElement, CMatrix, State};
use crate::dynamics::Hamiltonian;
use crate::error::{Error, Result};
use crate::C64;

/// `ρ(i[X, Y])` for Hermitian `X`, `Y`.
fn bracket_expectation(rho: &CMatrix, x: &CMatrix, y: &CMatrix) -> f64 {
    -2.0 * trace_product(rho, &(x * y)).im
}

/// Derivative `𝔇(t, A)` of `ρ ↦ ϖ^h(s, t)(ρ)(A)`, as the operator whose
/// expectation in `υ` is the derivative along the segment from `ρ` to `υ`.
///
/// Solves the Volterra equation
/// `𝔇(τ, A) = Ã − ρ(Ã)1 + ∫_s^τ Σ_{j,k} ∂_j∂_k h(u) ρ(i[B̃_j(u), Ã]) 𝔇(u, B_k) du`,
/// with `X̃ = V* X V` along the self-consistent trajectory, by iteration on
/// the solver mesh with trapezoid quadrature.
pub fn flow_sensitivity(
    h: &Hamiltonian,
    rho: &State,
    s: f64,
    t: f64,
    a: &AlgebraElement,
    cfg: &SolverConfig,
) -> Result<AlgebraElement> {
    a.check_dim(rho.dim())?;
    let d = rho.dim();
    let center = |x: &CMatrix| -> CMatrix {
        let m = trace_product(rho.matrix(), x).re;
        let c = x - CMatrix::identity(d, d) * C64::new(m, 0.0);
        (&c + c.adjoint()) * C64::new(0.5, 0.0)
    };
    if s == t || h.is_trivial() {
        cfg.validate()?;
        let (hh, s2, t2) = oriented(h, s, t);
        if s == t {
            return AlgebraElement::from_matrix(center(a.matrix()));
        }
        let traj = picard_flow(&hh, rho, s2, &[s2, t2], cfg)?;
        let v = mesh_unitaries(&hh, &traj).pop().expect("nonempty");
        return AlgebraElement::from_matrix(center(&(v.adjoint() * a.matrix() * &v)));
    }

    let (hh, s2, t2) = oriented(h, s, t);
    let traj = picard_flow(&hh, rho, s2, &[s2, t2], cfg)?;
    let vs = mesh_unitaries(&hh, &traj);
    let mesh = &traj.mesh;
    let nodes = mesh.len();
    let n = hh.registry().len();
    let heis = |v: &CMatrix, x: &CMatrix| v.adjoint() * x * v;
    let tilde: Vec<Vec<CMatrix>> = vs
        .iter()
        .map(|v| hh.registry().observables().iter().map(|b| heis(v, b.matrix())).collect())
        .collect();
    let hess: Vec<Vec<f64>> = (0..nodes)
        .map(|l| {
            let x: Vec<f64> = hh.registry().observables().iter().map(|b| trace_product(&traj.mesh_states[l], b.matrix()).re).collect();
            hh.hessian(mesh[l], &x)
        })
        .collect();
    let trapezoid = |m: usize, l: usize| -> f64 {
        if m == 0 {
            return 0.0;
        }
        let left = if l > 0 { mesh[l] - mesh[l - 1] } else { 0.0 };
        let right = if l < m { mesh[l + 1] - mesh[l] } else { 0.0 };
        0.5 * (left + right)
    };
    let r = rho.matrix();
    // Coefficient of U_{k'}(α_l) in the equation for a target X̃ at node m.
    let kernel_row = |m: usize, target: &CMatrix| -> Vec<f64> {
        let mut row = vec![0.0; (m + 1) * n];
        for l in 0..=m {
            let w = trapezoid(m, l);
            if w == 0.0 {
                continue;
            }
            let c: Vec<f64> = (0..n).map(|j| bracket_expectation(r, &tilde[l][j], target)).collect();
            for kp in 0..n {
                row[l * n + kp] = w * (0..n).map(|j| hess[l][j * n + kp] * c[j]).sum::<f64>();
            }
        }
        row
    };

    let kernel: Vec<Vec<Vec<f64>>> = (0..nodes).map(|m| (0..n).map(|k| kernel_row(m, &tilde[m][k])).collect()).collect();
    let source: Vec<Vec<CMatrix>> = tilde.iter().map(|row| row.iter().map(&center).collect()).collect();
    let mut u = source.clone();
    let mut iterations = 0;
    loop {
        let mut change: f64 = 0.0;
        let mut next = source.clone();
        for m in 0..nodes {
            for k in 0..n {
                let row = &kernel[m][k];
                let acc = &mut next[m][k];
                for (idx, &c) in row.iter().enumerate() {
                    if c != 0.0 {
                        *acc += &u[idx / n][idx % n] * C64::new(c, 0.0);
                    }
                }
                change = change.max((&*acc - &u[m][k]).iter().fold(0.0, |x, z| x.max(z.norm())));
            }
        }
        u = next;
        iterations += 1;
        if change <= cfg.picard_tol {
            break;
        }
        if iterations >= cfg.picard_max_iter {
            return Err(Error::NoConvergence { iterations, defect: change });
        }
    }

    let last = nodes - 1;
    let a_t = heis(&vs[last], a.matrix());
    let mut out = center(&a_t);
    for (idx, c) in kernel_row(last, &a_t).into_iter().enumerate() {
        if c != 0.0 {
            out += &u[idx / n][idx % n] * C64::new(c, 0.0);
        }
    }
    Ok(AlgebraElement::from_matrix(out)?.hermitian_part())
}
