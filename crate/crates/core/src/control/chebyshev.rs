//! Box-constrained Chebyshev fit `min_u ‖r − J2·u‖∞` solved as the epigraph
//! linear program
//!
//! ```text
//! minimize t  s.t.  −t ≤ (r − J2·u)_i ≤ t,  lower ≤ u ≤ upper
//! ```
//!
//! with a dense bounded-variable primal simplex under Bland's rule.
//!
//! Each control is split around an anchor `a = clamp(0, lower, upper)` as
//! `u = a + p − n` with `p, n ≥ 0`, so the method starts at the smallest
//! feasible control and only moves a control when doing so lowers the
//! objective. `t` starts non-basic at an upper bound strictly above
//! `‖r − J2·a‖∞`, which makes the all-slack basis feasible without a
//! phase-one pass.

use nalgebra::{DMatrix, DVector};

use super::{ControlBounds, ControlError, ControlInput};

const PIVOT_EPS: f64 = 1e-12;
const COST_EPS: f64 = 1e-12;

/// Result of [`solve_inf_norm`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevFit {
    pub input: ControlInput,
    /// `‖r − J2·u‖∞` evaluated at the returned control.
    pub objective: f64,
    pub pivots: usize,
}

/// Minimizes `‖target − J2·u‖∞` over the box. The returned control always
/// satisfies its bounds exactly.
pub fn solve_inf_norm(
    target: &DVector<f64>,
    j2: &DMatrix<f64>,
    bounds: &ControlBounds,
) -> Result<ChebyshevFit, ControlError> {
    let (rows, k) = j2.shape();
    if target.len() != rows {
        return Err(ControlError::Dimension(format!(
            "target has {} entries, J2 has {rows} rows",
            target.len()
        )));
    }
    if bounds.len() != k {
        return Err(ControlError::Dimension(format!(
            "J2 has {k} columns, bounds {}",
            bounds.len()
        )));
    }

    let anchor = DVector::from_fn(k, |j, _| 0f64.clamp(bounds.lower()[j], bounds.upper()[j]));
    let residual0 = target - j2 * &anchor;
    let mut lp = Tableau::new(j2, &residual0, &anchor, bounds);
    let pivots = lp.solve();

    let mut u = anchor;
    for j in 0..k {
        u[j] += lp.x[j] - lp.x[k + j];
    }
    let input = ControlInput::unchecked(u, bounds.clone()).clamped();
    let objective = (target - j2 * input.values()).amax();
    Ok(ChebyshevFit {
        input,
        objective,
        pivots,
    })
}

/// Dense tableau `B⁻¹·A` over variables `[p (k) | n (k) | t | slacks (2·rows)]`.
struct Tableau {
    tab: DMatrix<f64>,
    rhs: DVector<f64>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    basic_row: Vec<Option<usize>>,
    slack0: usize,
}

impl Tableau {
    fn new(j2: &DMatrix<f64>, r0: &DVector<f64>, anchor: &DVector<f64>, bounds: &ControlBounds) -> Self {
        let (rows, k) = j2.shape();
        let m = 2 * rows;
        let t_col = 2 * k;
        let slack0 = t_col + 1;
        let n = slack0 + m;

        let mut tab = DMatrix::zeros(m, n);
        let mut rhs = DVector::zeros(m);
        for i in 0..rows {
            for j in 0..k {
                // row i:        -(J2 u)_i - t + s = -r_i
                // row rows + i: +(J2 u)_i - t + s = +r_i
                tab[(i, j)] = -j2[(i, j)];
                tab[(i, k + j)] = j2[(i, j)];
                tab[(rows + i, j)] = j2[(i, j)];
                tab[(rows + i, k + j)] = -j2[(i, j)];
            }
            tab[(i, t_col)] = -1.0;
            tab[(rows + i, t_col)] = -1.0;
            rhs[i] = -r0[i];
            rhs[rows + i] = r0[i];
        }
        for r in 0..m {
            tab[(r, slack0 + r)] = 1.0;
        }

        let t_max = r0.amax() + 1.0;
        let mut lo = vec![0.0; n];
        let mut hi = vec![f64::INFINITY; n];
        for j in 0..k {
            hi[j] = bounds.upper()[j] - anchor[j];
            hi[k + j] = anchor[j] - bounds.lower()[j];
        }
        lo[t_col] = 0.0;
        hi[t_col] = t_max;

        let mut cost = vec![0.0; n];
        cost[t_col] = 1.0;

        let mut x = vec![0.0; n];
        x[t_col] = t_max;
        let basis: Vec<usize> = (slack0..n).collect();
        let mut basic_row = vec![None; n];
        for (r, &b) in basis.iter().enumerate() {
            basic_row[b] = Some(r);
        }
        let mut lp = Self {
            tab,
            rhs,
            cost,
            lo,
            hi,
            x,
            basis,
            basic_row,
            slack0,
        };
        lp.refresh_basic_values();
        lp
    }

    /// `x_B = B⁻¹·b − Σ_{j non-basic} (B⁻¹A)_j · x_j`. The slack block of the
    /// tableau holds `B⁻¹`.
    fn refresh_basic_values(&mut self) {
        let m = self.basis.len();
        let binv = self.tab.columns(self.slack0, m);
        let mut xb = binv * &self.rhs;
        for j in 0..self.x.len() {
            if self.basic_row[j].is_none() && self.x[j] != 0.0 {
                xb.axpy(-self.x[j], &self.tab.column(j), 1.0);
            }
        }
        for (r, &b) in self.basis.iter().enumerate() {
            self.x[b] = xb[r];
        }
    }

    fn reduced_cost(&self, j: usize) -> f64 {
        let mut d = self.cost[j];
        for (r, &b) in self.basis.iter().enumerate() {
            if self.cost[b] != 0.0 {
                d -= self.cost[b] * self.tab[(r, j)];
            }
        }
        d
    }

    /// Bland's rule: the lowest-index improving variable enters.
    fn entering(&self) -> Option<(usize, f64)> {
        (0..self.x.len())
            .filter(|&j| self.basic_row[j].is_none() && self.hi[j] > self.lo[j])
            .find_map(|j| {
                let d = self.reduced_cost(j);
                if d < -COST_EPS && self.x[j] < self.hi[j] {
                    Some((j, 1.0))
                } else if d > COST_EPS && self.x[j] > self.lo[j] {
                    Some((j, -1.0))
                } else {
                    None
                }
            })
    }

    fn solve(&mut self) -> usize {
        let cap = 50 * (self.x.len() + self.basis.len()).max(1);
        let mut steps = 0;
        while steps < cap {
            let Some((j, dir)) = self.entering() else {
                break;
            };
            steps += 1;

            // (step length, variable index, leaving row or None for a bound flip)
            let mut best: (f64, usize, Option<usize>) = (self.hi[j] - self.lo[j], j, None);
            for (r, &b) in self.basis.iter().enumerate() {
                let a = dir * self.tab[(r, j)];
                let limit = if a > PIVOT_EPS {
                    (self.x[b] - self.lo[b]) / a
                } else if a < -PIVOT_EPS && self.hi[b].is_finite() {
                    (self.hi[b] - self.x[b]) / -a
                } else {
                    continue;
                };
                let limit = limit.max(0.0);
                let tie = (limit - best.0).abs() <= 1e-12 * (1.0 + best.0.abs());
                if limit < best.0 && !tie || tie && b < best.1 {
                    best = (limit, b, Some(r));
                }
            }

            let (theta, _, leaving) = best;
            match leaving {
                None => {
                    self.x[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
                    self.refresh_basic_values();
                }
                Some(r) => {
                    let out = self.basis[r];
                    let a = dir * self.tab[(r, j)];
                    self.x[j] += dir * theta;
                    self.pivot(r, j);
                    self.x[out] = if a > 0.0 { self.lo[out] } else { self.hi[out] };
                    self.refresh_basic_values();
                }
            }
        }
        steps
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.tab[(r, j)];
        self.tab.row_mut(r).scale_mut(1.0 / p);
        let pivot_row = self.tab.row(r).into_owned();
        for i in 0..self.tab.nrows() {
            if i != r {
                let f = self.tab[(i, j)];
                if f != 0.0 {
                    let mut row = self.tab.row_mut(i);
                    row -= &pivot_row * f;
                }
            }
        }
        let out = self.basis[r];
        self.basic_row[out] = None;
        self.basic_row[j] = Some(r);
        self.basis[r] = j;
    }
}

#[cfg(test)]
mod tests {
    use nalgebra::{dmatrix, dvector};

    use super::*;

    #[test]
    fn exact_fit_inside_box() {
        let b = ControlBounds::symmetric(0, &[1.0, 1.0]);
        let fit = solve_inf_norm(&dvector![0.1, -0.2], &DMatrix::identity(2, 2), &b).unwrap();
        assert!((fit.input.values() - dvector![0.1, -0.2]).amax() < 1e-12);
        assert!(fit.objective < 1e-12);
    }

    #[test]
    fn saturated_box() {
        let b = ControlBounds::symmetric(0, &[0.05, 0.05]);
        let fit = solve_inf_norm(&dvector![0.1, -0.2], &DMatrix::identity(2, 2), &b).unwrap();
        assert!((fit.objective - 0.15).abs() < 1e-12);
        // The worst row forces u2 = -0.05; u1 is free within the tie.
        assert_eq!(fit.input.values()[1], -0.05);
        assert!(fit.input.is_feasible());
    }

    #[test]
    fn no_control_authority() {
        let b = ControlBounds::symmetric(0, &[1.0, 1.0, 1.0]);
        let r = dvector![0.3, -0.7];
        let fit = solve_inf_norm(&r, &DMatrix::zeros(2, 3), &b).unwrap();
        assert!((fit.objective - 0.7).abs() < 1e-15);
        assert_eq!(fit.input.values(), &DVector::zeros(3));
    }

    #[test]
    fn zero_target_keeps_zero_control() {
        let b = ControlBounds::symmetric(1, &[0.1, 0.5, 0.5]);
        let j2 = dmatrix![1.0, 2.0, 0.5; 0.3, -1.0, 0.2];
        let fit = solve_inf_norm(&DVector::zeros(2), &j2, &b).unwrap();
        assert_eq!(fit.objective, 0.0);
        assert_eq!(fit.input.values(), &DVector::zeros(3));
    }

    #[test]
    fn box_excluding_zero() {
        let b = ControlBounds::new(dvector![0.2], dvector![0.5], 0).unwrap();
        let fit = solve_inf_norm(&dvector![0.0], &dmatrix![1.0], &b).unwrap();
        assert_eq!(fit.input.values()[0], 0.2);
        assert!((fit.objective - 0.2).abs() < 1e-15);
    }

    #[test]
    fn dimension_errors() {
        let b = ControlBounds::symmetric(0, &[1.0]);
        assert!(solve_inf_norm(&dvector![0.0, 1.0], &dmatrix![1.0], &b).is_err());
        assert!(solve_inf_norm(&dvector![0.0], &dmatrix![1.0, 2.0], &b).is_err());
    }

    #[test]
    fn overdetermined_balances_rows() {
        // one control, three rows: best u equalizes the extreme residuals
        let b = ControlBounds::symmetric(0, &[10.0]);
        let r = dvector![1.0, 2.0, 4.0];
        let fit = solve_inf_norm(&r, &dmatrix![1.0; 1.0; 1.0], &b).unwrap();
        assert!((fit.input.values()[0] - 2.5).abs() < 1e-12);
        assert!((fit.objective - 1.5).abs() < 1e-12);
    }
}
