use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::CoherenceBlock;
use crate::error::{Error, Result};
use crate::phys_params::QuadrupolarConstant;

/// Eigen-decomposition of one coherence block.
///
/// Columns of `w_bar` are right eigenvectors and `w = w_bar^-1`, so rows of
/// `w` are the matching left eigenvectors: block = w_bar diag(eigenvalues) w.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEigensystem {
    pub q: usize,
    pub eigenvalues: Vec<f64>,
    pub w: DMatrix<f64>,
    pub w_bar: DMatrix<f64>,
    /// R_p = -C lambda_p, Hz.
    pub rates: Vec<f64>,
}

impl BlockEigensystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Largest entry of |W W_bar - 1|.
    pub fn inverse_defect(&self) -> f64 {
        let n = self.dim();
        (&self.w * &self.w_bar - DMatrix::identity(n, n)).amax()
    }

    /// Reassembled block W_bar diag(lambda) W.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&DVector::from_vec(self.eigenvalues.clone()));
        &self.w_bar * d * &self.w
    }

    /// Characteristic times 1/R in seconds; infinite for a zero rate.
    pub fn times(&self) -> Vec<f64> {
        self.rates.iter().map(|r| if *r > 0.0 { 1.0 / r } else { f64::INFINITY }).collect()
    }
}

/// Numeric eigensystem in canonical order: descending eigenvalue (ascending
/// rate), each eigenvector unit length with its first non-negligible
/// component positive, exact ties ordered lexicographically by eigenvector.
pub fn numeric_eigensystem(block: &CoherenceBlock, c: &QuadrupolarConstant) -> Result<BlockEigensystem> {
    let a = &block.matrix;
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let symmetric = (a - a.transpose()).amax() <= 1e-13 * scale;
    let mut pairs = if symmetric { symmetric_pairs(a) } else { general_pairs(a, scale)? };

    for (lambda, v) in pairs.iter_mut() {
        if lambda.abs() <= 1e-13 * scale {
            *lambda = 0.0;
        }
        canonical_sign(v);
    }
    pairs.sort_by(|(la, va), (lb, vb)| {
        lb.partial_cmp(la).unwrap_or(Ordering::Equal).then_with(|| {
            if la == lb {
                lexicographic(va, vb)
            } else {
                Ordering::Equal
            }
        })
    });

    let eigenvalues: Vec<f64> = pairs.iter().map(|(l, _)| *l).collect();
    let w_bar = DMatrix::from_columns(&pairs.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>());
    let w = if symmetric {
        w_bar.transpose()
    } else {
        let sv = w_bar.clone().svd(false, false).singular_values;
        let condition = sv.max() / sv.min();
        if !condition.is_finite() || condition > 1e12 {
            return Err(Error::Defective { condition });
        }
        w_bar.clone().try_inverse().ok_or(Error::Defective { condition })?
    };
    let rates = eigenvalues.iter().map(|l| if *l == 0.0 { 0.0 } else { -c.c * l }).collect();
    Ok(BlockEigensystem { q: block.q, eigenvalues, w, w_bar, rates })
}

fn symmetric_pairs(a: &DMatrix<f64>) -> Vec<(f64, DVector<f64>)> {
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    (0..a.nrows()).map(|k| (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned())).collect()
}

/// Real spectrum from the Schur form, eigenvectors from the null space of
/// (A - lambda I); clusters of equal eigenvalues take as many null vectors as
/// the cluster size.
fn general_pairs(a: &DMatrix<f64>, scale: f64) -> Result<Vec<(f64, DVector<f64>)>> {
    let n = a.nrows();
    let mut values = Vec::with_capacity(n);
    for z in a.clone().complex_eigenvalues().iter() {
        if z.im.abs() > 1e-10 * scale {
            return Err(Error::ComplexEigenvalue { re: z.re, im: z.im });
        }
        values.push(z.re);
    }
    values.sort_by(|x, y| y.partial_cmp(x).unwrap_or(Ordering::Equal));
    let mut pairs = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && (values[j] - values[i]).abs() <= 1e-12 * scale {
            j += 1;
        }
        let lambda = values[i..j].iter().sum::<f64>() / (j - i) as f64;
        let shifted = a - DMatrix::identity(n, n) * lambda;
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| svd.singular_values[x].partial_cmp(&svd.singular_values[y]).unwrap_or(Ordering::Equal));
        for &k in order.iter().take(j - i) {
            if svd.singular_values[k] > 1e-8 * scale {
                // geometric multiplicity below algebraic multiplicity
                return Err(Error::Defective { condition: f64::INFINITY });
            }
            pairs.push((lambda, vt.row(k).transpose()));
        }
        i = j;
    }
    Ok(pairs)
}

fn canonical_sign(v: &mut DVector<f64>) {
    let norm = v.norm();
    if norm > 0.0 {
        *v /= norm;
    }
    let tol = 1e-12 * v.amax();
    if let Some(first) = v.iter().find(|x| x.abs() > tol) {
        if *first < 0.0 {
            v.neg_mut();
        }
    }
}

fn lexicographic(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o.reverse(),
        }
    }
    Ordering::Equal
}
