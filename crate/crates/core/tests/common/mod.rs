//! Independent reference implementations shared by the integration tests and
//! the acceptance target.
#![allow(dead_code)]

use gridsvc_core::control::ControlBounds;
use gridsvc_core::grid::NetworkModel;
use nalgebra::{DMatrix, DVector};

/// Load-bus voltage change from one LU solve of the capacitor and load rows
/// of the assembled susceptance system, with the generator voltages and
/// capacitor injections given as `u = [ΔV_G ; ΔQ_C]`.
pub fn full_system_dv(net: &NetworkModel, dq_load: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
    let (ng, nc, nl) = (net.n_gen(), net.n_cap(), net.n_load());
    let b = net.assembled_b();
    let unknown = b.view((ng, ng), (nc + nl, nc + nl)).into_owned();
    let coupling = b.view((ng, 0), (nc + nl, ng)).into_owned();
    let dv_gen = u.rows(0, ng).into_owned();
    let mut rhs = DVector::zeros(nc + nl);
    rhs.rows_mut(0, nc).copy_from(&u.rows(ng, nc));
    rhs.rows_mut(nc, nl).copy_from(dq_load);
    rhs -= coupling * dv_gen;
    let sol = unknown.lu().solve(&rhs).expect("nonsingular C/L block");
    sol.rows(nc, nl).into_owned()
}

/// Smallest `‖target − J2·u‖∞` over a grid of spacing `step` covering a
/// two-control box, both edges included.
pub fn grid_search_inf(target: &DVector<f64>, j2: &DMatrix<f64>, bounds: &ControlBounds, step: f64) -> f64 {
    assert_eq!(j2.ncols(), 2);
    let axis = |k: usize| -> Vec<f64> {
        let (lo, hi) = (bounds.lower()[k], bounds.upper()[k]);
        let n = ((hi - lo) / step).floor() as usize;
        let mut v: Vec<f64> = (0..=n).map(|i| lo + i as f64 * step).collect();
        if *v.last().unwrap() < hi {
            v.push(hi);
        }
        v
    };
    let (a0, a1) = (axis(0), axis(1));
    let (c0, c1) = (j2.column(0), j2.column(1));
    let mut best = f64::INFINITY;
    for &x in &a0 {
        for &y in &a1 {
            let mut worst = 0f64;
            for i in 0..target.len() {
                worst = worst.max((target[i] - c0[i] * x - c1[i] * y).abs());
                if worst >= best {
                    break;
                }
            }
            best = best.min(worst);
        }
    }
    best
}

fn window(x: &[f64], k: usize, half: usize) -> impl Iterator<Item = f64> + '_ {
    let last = x.len() as isize - 1;
    (-(half as isize)..=half as isize).map(move |d| x[(k as isize + d).clamp(0, last) as usize])
}

/// Sliding maximum over `len` samples centred on each index, edges
/// replicated.
pub fn naive_dilate(x: &[f64], len: usize) -> Vec<f64> {
    (0..x.len()).map(|k| window(x, k, len / 2).fold(f64::NEG_INFINITY, f64::max)).collect()
}

pub fn naive_erode(x: &[f64], len: usize) -> Vec<f64> {
    (0..x.len()).map(|k| window(x, k, len / 2).fold(f64::INFINITY, f64::min)).collect()
}

/// Least-squares residual of `y` on the given columns of `a`.
pub fn ls_residual(a: &DMatrix<f64>, y: &DVector<f64>, cols: &[usize]) -> f64 {
    if cols.is_empty() {
        return y.norm();
    }
    let sub = a.select_columns(cols.iter());
    let coef = sub.clone().svd(true, true).solve(y, 1e-14).expect("factors");
    (y - sub * coef).norm()
}

/// Best residual over every support of at most `k` columns.
pub fn exhaustive_l0(a: &DMatrix<f64>, y: &DVector<f64>, k: usize) -> f64 {
    assert!(k <= 2, "enumeration written for k <= 2");
    let n = a.ncols();
    let mut best = y.norm();
    for i in 0..n {
        if k >= 1 {
            best = best.min(ls_residual(a, y, &[i]));
        }
        if k >= 2 {
            for j in i + 1..n {
                best = best.min(ls_residual(a, y, &[i, j]));
            }
        }
    }
    best
}
