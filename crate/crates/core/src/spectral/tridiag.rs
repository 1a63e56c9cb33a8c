//! Symmetric tridiagonal eigensolver (QL with implicit shifts), tracking
//! only the first row of the eigenvector matrix — which is all quadrature
//! weights need. Classic tql2-style sweep.

use crate::error::{Error, Result};

/// Eigenvalues (ascending) and the matching first eigenvector components
/// of the symmetric tridiagonal matrix with diagonal `alphas` and
/// off-diagonal `betas`.
pub fn eigen_first_components(alphas: &[f64], betas: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = alphas.len();
    if n == 0 {
        return Err(Error::EmptyRitzSet);
    }
    debug_assert_eq!(betas.len() + 1, n);
    let mut d = alphas.to_vec();
    let mut e = betas.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(Error::non_finite("tridiagonal QL iteration"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let nodes: Vec<f64> = idx.iter().map(|&i| d[i]).collect();
    let firsts: Vec<f64> = idx.iter().map(|&i| z[i]).collect();
    if nodes.iter().any(|x| !x.is_finite()) {
        return Err(Error::non_finite("tridiagonal eigenvalues"));
    }
    Ok((nodes, firsts))
}
