use nalgebra::DMatrix;

use super::{trace_product, AlgebraElement, CMatrix};
use crate::error::{Error, Result};
use crate::C64;

const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

fn letter_matrix(c: char) -> Option<CMatrix> {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let entries = match c {
        'I' => [one, o, o, one],
        'X' => [o, one, one, o],
        'Y' => [o, -i, i, o],
        'Z' => [one, o, o, -one],
        _ => return None,
    };
    Some(CMatrix::from_row_slice(2, 2, &entries))
}

/// Single-qubit Pauli matrix for `I`, `X`, `Y` or `Z`.
pub fn pauli_letter(c: char) -> Result<AlgebraElement> {
    letter_matrix(c)
        .map(AlgebraElement)
        .ok_or_else(|| Error::InvalidInput(format!("`{c}` is not a Pauli letter")))
}

/// Tensor product of Pauli letters, leftmost letter is the most significant factor.
pub fn pauli_string(letters: &str) -> Result<AlgebraElement> {
    let mut acc: Option<CMatrix> = None;
    for c in letters.chars() {
        let m = letter_matrix(c).ok_or_else(|| Error::InvalidInput(format!("`{c}` is not a Pauli letter")))?;
        acc = Some(match acc {
            None => m,
            Some(a) => a.kronecker(&m),
        });
    }
    acc.map(AlgebraElement).ok_or_else(|| Error::InvalidInput("empty Pauli string".into()))
}

/// `k` when `d = 2^k`, `k ≥ 1`.
pub fn qubit_count(dim: usize) -> Option<usize> {
    (dim >= 2 && dim.is_power_of_two()).then(|| dim.trailing_zeros() as usize)
}

/// All `4^n` Pauli labels in lexicographic `I < X < Y < Z` order.
pub(crate) fn pauli_labels(n: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| LETTERS.iter().map(move |c| format!("{p}{c}")))
            .collect();
    }
    out
}

/// Traceless Hermitian basis of `M_d` with labels: non-identity Pauli strings
/// for `d = 2^k`, generalized Gell-Mann matrices otherwise.
///
/// Elements are orthogonal under `Tr(AB)`.
pub fn probe_basis(dim: usize) -> Vec<(String, AlgebraElement)> {
    if let Some(n) = qubit_count(dim) {
        return pauli_labels(n)
            .into_iter()
            .skip(1)
            .map(|l| {
                let m = pauli_string(&l).expect("valid labels");
                (l, m)
            })
            .collect();
    }
    gell_mann(dim)
}

fn gell_mann(d: usize) -> Vec<(String, AlgebraElement)> {
    let mut out = Vec::new();
    let z = C64::new(0.0, 0.0);
    for j in 0..d {
        for k in (j + 1)..d {
            let mut s = DMatrix::from_element(d, d, z);
            s[(j, k)] = C64::new(1.0, 0.0);
            s[(k, j)] = C64::new(1.0, 0.0);
            out.push((format!("S{j}{k}"), AlgebraElement(s)));
            let mut a = DMatrix::from_element(d, d, z);
            a[(j, k)] = C64::new(0.0, -1.0);
            a[(k, j)] = C64::new(0.0, 1.0);
            out.push((format!("A{j}{k}"), AlgebraElement(a)));
        }
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; d];
        for v in diag.iter_mut().take(l) {
            *v = norm;
        }
        diag[l] = -(l as f64) * norm;
        out.push((format!("D{l}"), AlgebraElement::from_real_diagonal(&diag)));
    }
    out
}

/// Real Pauli coefficients `Tr(PM)/d` of a Hermitian `M`, dropping those below `1e-14`.
///
/// Returns `None` when the dimension is not a power of two.
pub fn pauli_decomposition(m: &AlgebraElement) -> Option<Vec<(String, f64)>> {
    let n = qubit_count(m.dim())?;
    let d = m.dim() as f64;
    let scale = m.max_abs().max(1.0);
    Some(
        pauli_labels(n)
            .into_iter()
            .filter_map(|l| {
                let p = pauli_string(&l).expect("valid labels");
                let c = trace_product(p.matrix(), m.matrix()).re / d;
                (c.abs() > 1e-14 * scale).then_some((l, c))
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_bases_are_orthogonal_and_complete() {
        for d in [2, 3, 4, 5] {
            let b = probe_basis(d);
            assert_eq!(b.len(), d * d - 1);
            for (i, (_, p)) in b.iter().enumerate() {
                assert!(p.is_hermitian(0.0));
                assert!(p.trace().norm() < 1e-14);
                for (_, q) in &b[i + 1..] {
                    assert!(trace_product(p.matrix(), q.matrix()).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn decomposition_reconstructs() {
        let m = &pauli_string("XZ").unwrap().scale(0.5) + &pauli_string("II").unwrap().scale(-2.0);
        let dec = pauli_decomposition(&m).unwrap();
        assert_eq!(dec, vec![("II".to_string(), -2.0), ("XZ".to_string(), 0.5)]);
        assert!(pauli_decomposition(&AlgebraElement::identity(3)).is_none());
    }

    #[test]
    fn string_is_tensor_product() {
        let xz = pauli_string("XZ").unwrap();
        let expect = pauli_letter('X').unwrap().matrix().kronecker(pauli_letter('Z').unwrap().matrix());
        assert_eq!(xz.matrix(), &expect);
        assert!(pauli_string("XQ").is_err());
    }
}
