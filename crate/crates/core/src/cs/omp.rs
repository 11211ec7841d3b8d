use nalgebra::{DMatrix, DVector};

/// Transform coefficients with an explicit support. Entries outside
/// `support` are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCoefficients {
    pub theta: DVector<f64>,
    /// Column indices in the order they were selected.
    pub support: Vec<usize>,
    /// Residual norm before the first and after every selection.
    pub residual_norms: Vec<f64>,
}

impl SparseCoefficients {
    pub fn residual_norm(&self) -> f64 {
        *self.residual_norms.last().expect("at least the initial residual")
    }
}

/// Orthogonal matching pursuit on `y ≈ A·θ`.
///
/// Each pass picks the column with the largest normalized correlation to the
/// residual (lowest index on ties), orthogonalizes it against the columns
/// already chosen and projects it out of the residual. It stops once the
/// residual norm drops below `tol` or after `max_iters` selections.
pub fn omp(a: &DMatrix<f64>, y: &DVector<f64>, max_iters: usize, tol: f64) -> SparseCoefficients {
    let (m, n) = a.shape();
    assert_eq!(y.len(), m, "measurement length");
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    let mut usable: Vec<bool> = norms.iter().map(|&v| v > 0.0).collect();

    let mut residual = y.clone();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut support = Vec::new();
    let mut residual_norms = vec![residual.norm()];

    while support.len() < max_iters.min(m) && residual.norm() >= tol {
        let pick = (0..n)
            .filter(|&j| usable[j])
            .map(|j| (j, a.column(j).dot(&residual).abs() / norms[j]))
            .fold(None, |best: Option<(usize, f64)>, (j, c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((j, c)),
            });
        let Some((j, _)) = pick else { break };
        usable[j] = false;

        // Two Gram-Schmidt passes keep the basis orthonormal to rounding.
        let mut v = a.column(j).into_owned();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let vn = v.norm();
        if vn <= 1e-10 * norms[j] {
            // numerically inside the current span
            continue;
        }
        let q = v / vn;
        let c = q.dot(&residual);
        residual.axpy(-c, &q, 1.0);
        basis.push(q);
        support.push(j);
        residual_norms.push(residual.norm());
    }

    let mut theta = DVector::zeros(n);
    if !support.is_empty() {
        let sub = a.select_columns(support.iter());
        let coef = sub
            .svd(true, true)
            .solve(y, 1e-14)
            .expect("SVD computed with both factors");
        for (k, &j) in support.iter().enumerate() {
            theta[j] = coef[k];
        }
    }
    SparseCoefficients {
        theta,
        support,
        residual_norms,
    }
}
