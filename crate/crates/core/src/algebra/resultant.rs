//! Sylvester resultants and small dense linear algebra over a [`Field`].

use super::poly::Poly;
use super::scalar::Field;
use crate::error::{Error, Result};

/// Determinant by Gaussian elimination. Pivots on the largest magnitude,
/// which is partial pivoting for multiprecision entries and simply picks a
/// nonzero pivot for exact ones.
pub fn determinant<S: Field>(mut m: Vec<Vec<S>>) -> Result<S> {
    let n = m.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let template = m[0][0].clone();
    let mut det = template.one_like();
    for col in 0..n {
        let pivot = (col..n).filter(|&r| !m[r][col].is_zero()).max_by(|&a, &b| {
            m[a][col]
                .magnitude_log2()
                .total_cmp(&m[b][col].magnitude_log2())
        });
        let Some(p) = pivot else {
            return Ok(template.zero_like());
        };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        let pv = m[col][col].clone();
        det = det * pv.clone();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone() / pv.clone();
            for c in col + 1..n {
                if m[col][c].is_zero() {
                    continue;
                }
                let t = f.clone() * m[col][c].clone();
                let cur = std::mem::replace(&mut m[r][c], template.zero_like());
                m[r][c] = cur - t;
            }
            m[r][col] = template.zero_like();
        }
    }
    Ok(det)
}

/// Solves `a·x = b` for a square system.
pub fn solve<S: Field>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Result<Vec<S>> {
    let n = a.len();
    if n == 0 || b.len() != n {
        return Err(Error::EmptyInput);
    }
    for col in 0..n {
        let p = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .max_by(|&x, &y| {
                a[x][col]
                    .magnitude_log2()
                    .total_cmp(&a[y][col].magnitude_log2())
            })
            .ok_or_else(|| Error::DegenerateMap("singular linear system".into()))?;
        a.swap(p, col);
        b.swap(p, col);
        let pv = a[col][col].clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / pv.clone();
            for c in col..n {
                let t = f.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - t;
            }
            let t = f * b[col].clone();
            b[r] = b[r].clone() - t;
        }
    }
    let mut x = vec![b[0].zero_like(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            acc = acc - a[r][c].clone() * x[c].clone();
        }
        x[r] = acc / a[r][r].clone();
    }
    Ok(x)
}

/// Sylvester matrix of `p` (formal degree `n`) and `q` (formal degree `m`):
/// `m` shifted rows of `p` followed by `n` shifted rows of `q`, highest
/// coefficients first.
pub fn sylvester<S: Field>(
    p: &Poly<S>,
    n: usize,
    q: &Poly<S>,
    m: usize,
    template: &S,
) -> Vec<Vec<S>> {
    let size = n + m;
    let zero = template.zero_like();
    let mut rows = Vec::with_capacity(size);
    for (poly, deg, count) in [(p, n, m), (q, m, n)] {
        for shift in 0..count {
            let mut row = vec![zero.clone(); size];
            for k in 0..=deg {
                row[shift + (deg - k)] = poly.coeff_or_zero(k, template);
            }
            rows.push(row);
        }
    }
    rows
}

/// `Res(p, q)` with formal degrees. With this convention `Res(z, z - 1) = -1`
/// and `Res(q, p) = (-1)^(nm) Res(p, q)`.
pub fn resultant_formal<S: Field>(
    p: &Poly<S>,
    n: usize,
    q: &Poly<S>,
    m: usize,
    template: &S,
) -> Result<S> {
    if p.degree().is_some_and(|d| d > n) || q.degree().is_some_and(|d| d > m) {
        return Err(Error::BadParameter(
            "formal degree below actual degree".into(),
        ));
    }
    if n + m == 0 {
        return Ok(template.one_like());
    }
    determinant(sylvester(p, n, q, m, template))
}

/// Resultant of two polynomials using their actual degrees.
pub fn resultant<S: Field>(p: &Poly<S>, q: &Poly<S>) -> Result<S> {
    let n = p.degree().ok_or(Error::ZeroPolynomial)?;
    let m = q.degree().ok_or(Error::ZeroPolynomial)?;
    let template = p.coeffs()[0].clone();
    resultant_formal(p, n, q, m, &template)
}

/// Homogeneous resultant of the degree-`d` forms whose dehomogenizations
/// are `p` and `q`. Vanishes exactly when the forms share a zero in P^1.
pub fn homogeneous_resultant<S: Field>(
    p: &Poly<S>,
    q: &Poly<S>,
    d: usize,
    template: &S,
) -> Result<S> {
    resultant_formal(p, d, q, d, template)
}
