use nalgebra::DMatrix;

use super::network::{invert_checked, NetworkModel};
use super::GridError;

/// Linear map from load and control changes to load-bus voltage changes:
/// `ΔV_L = J1·ΔQ_L − J2·u` with `u = [ΔV_G ; ΔQ_C]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityModel {
    j1: DMatrix<f64>,
    j2: DMatrix<f64>,
    n_gen: usize,
    pilot_rows: Vec<usize>,
}

impl SensitivityModel {
    /// Wraps precomputed matrices. `j2` columns are generator voltages first,
    /// then `j2.ncols() - n_gen` capacitor outputs.
    pub fn from_matrices(
        j1: DMatrix<f64>,
        j2: DMatrix<f64>,
        n_gen: usize,
        pilot_rows: Vec<usize>,
    ) -> Result<Self, GridError> {
        let nl = j1.nrows();
        if j1.ncols() != nl {
            return Err(GridError::Dimension {
                what: "J1".into(),
                expected: (nl, nl),
                found: j1.shape(),
            });
        }
        if j2.nrows() != nl || j2.ncols() < n_gen {
            return Err(GridError::Dimension {
                what: "J2".into(),
                expected: (nl, n_gen.max(j2.ncols())),
                found: j2.shape(),
            });
        }
        check_pilots(&pilot_rows, nl)?;
        Ok(Self {
            j1,
            j2,
            n_gen,
            pilot_rows,
        })
    }

    pub fn j1(&self) -> &DMatrix<f64> {
        &self.j1
    }

    pub fn j2(&self) -> &DMatrix<f64> {
        &self.j2
    }

    pub fn n_load(&self) -> usize {
        self.j1.nrows()
    }

    pub fn n_gen(&self) -> usize {
        self.n_gen
    }

    pub fn n_controls(&self) -> usize {
        self.j2.ncols()
    }

    pub fn pilot_rows(&self) -> &[usize] {
        &self.pilot_rows
    }

    /// Rows of `J1` at the pilot buses.
    pub fn pilot_matrix(&self) -> DMatrix<f64> {
        self.j1.select_rows(self.pilot_rows.iter())
    }

    /// Same model with a different pilot set.
    pub fn with_pilots(&self, pilot_rows: Vec<usize>) -> Result<Self, GridError> {
        check_pilots(&pilot_rows, self.n_load())?;
        Ok(Self {
            pilot_rows,
            ..self.clone()
        })
    }
}

fn check_pilots(pilots: &[usize], n_load: usize) -> Result<(), GridError> {
    if pilots.is_empty() {
        return Err(GridError::NoPilots);
    }
    for (i, &p) in pilots.iter().enumerate() {
        if p >= n_load {
            return Err(GridError::UnknownBus(format!("load index {p}")));
        }
        if pilots[..i].contains(&p) {
            return Err(GridError::Invalid(format!("pilot {p} listed twice")));
        }
    }
    Ok(())
}

/// Eliminates the capacitor-bus voltages from the Q-V model.
///
/// `J1 = (B_LL − B_LC·B_CC⁻¹·B_CL)⁻¹` and
/// `J2 = J1·[B_LG − B_LC·B_CC⁻¹·B_CG | B_LC·B_CC⁻¹]`.
pub fn compute_sensitivities(
    net: &NetworkModel,
    pilot_rows: &[usize],
) -> Result<SensitivityModel, GridError> {
    let b = net.blocks();
    let cc_inv = invert_checked(&b.cc, "B_CC")?;
    let lc_cc_inv = &b.lc * &cc_inv;
    let schur = &b.ll - &lc_cc_inv * &b.cl;
    let j1 = invert_checked(&schur, "Schur complement B_LL - B_LC*B_CC^-1*B_CL")?;

    let gen_block = &b.lg - &lc_cc_inv * &b.cg;
    let (nl, ng, nc) = (net.n_load(), net.n_gen(), net.n_cap());
    let mut coupling = DMatrix::zeros(nl, ng + nc);
    coupling.columns_mut(0, ng).copy_from(&gen_block);
    coupling.columns_mut(ng, nc).copy_from(&lc_cc_inv);
    let j2 = &j1 * coupling;

    SensitivityModel::from_matrices(j1, j2, ng, pilot_rows.to_vec())
}

#[cfg(test)]
mod tests {
    use nalgebra::{dmatrix, DVector};
    use num_complex::Complex64;

    use super::*;
    use crate::grid::network::{AreaLayout, NetworkParts, OperatingPoint, SusceptanceBlocks};
    use crate::grid::synthetic::{build_synthetic_network, SyntheticSpec};

    fn toy(lc: DMatrix<f64>) -> NetworkModel {
        // one generator, one capacitor, two loads
        let ll = dmatrix![2.0, 0.0; 0.0, 2.0];
        let cc = dmatrix![2.0];
        let cl = lc.transpose();
        let blocks = SusceptanceBlocks {
            gg: dmatrix![3.0],
            gc: dmatrix![0.0],
            gl: dmatrix![0.0, 0.0],
            cg: dmatrix![0.0],
            cc,
            cl,
            lg: dmatrix![0.0; 0.0],
            lc,
            ll,
        };
        NetworkModel::new(NetworkParts {
            areas: vec![AreaLayout::sequential(1, 1, 2)],
            blocks,
            tie_line_impedance: Complex64::new(0.02, 0.07),
            tie_lines: vec![],
            v_ref: DVector::from_element(2, 1.0),
            nominal: OperatingPoint {
                v_gen: DVector::from_element(1, 1.0),
                v_cap: DVector::from_element(1, 1.0),
                q_gen: DVector::zeros(1),
                q_cap: DVector::zeros(1),
                q_load: DVector::from_element(2, 0.5),
            },
        })
        .unwrap()
    }

    #[test]
    fn hand_inverted_schur_complement() {
        // S = [[2 - 1/2, 0], [0, 2]] so J1 = [[2/3, 0], [0, 1/2]]
        let net = toy(dmatrix![1.0; 0.0]);
        let s = compute_sensitivities(&net, &[0]).unwrap();
        let expected = dmatrix![2.0 / 3.0, 0.0; 0.0, 0.5];
        assert!((s.j1() - expected).amax() < 1e-15);
    }

    #[test]
    fn decoupled_capacitors_leave_b_ll_inverse() {
        let net = toy(dmatrix![0.0; 0.0]);
        let s = compute_sensitivities(&net, &[0, 1]).unwrap();
        let expected = net.blocks().ll.clone().try_inverse().unwrap();
        assert!((s.j1() - expected).amax() < 1e-15);
    }

    #[test]
    fn j1_is_symmetric() {
        for seed in 0..10 {
            let net = build_synthetic_network(&SyntheticSpec::new(2, 3, 2, 4, seed));
            let s = compute_sensitivities(&net, &[0]).unwrap();
            assert!((s.j1() - s.j1().transpose()).amax() < 1e-12);
        }
    }

    #[test]
    fn pilot_validation() {
        let net = toy(dmatrix![1.0; 0.0]);
        assert!(matches!(compute_sensitivities(&net, &[]), Err(GridError::NoPilots)));
        assert!(matches!(
            compute_sensitivities(&net, &[2]),
            Err(GridError::UnknownBus(_))
        ));
        assert!(compute_sensitivities(&net, &[1, 1]).is_err());
    }

    #[test]
    fn j2_column_layout() {
        let net = build_synthetic_network(&SyntheticSpec::new(2, 3, 2, 4, 3));
        let s = compute_sensitivities(&net, &[0, 5]).unwrap();
        assert_eq!(s.j2().shape(), (8, 6 + 4));
        assert_eq!(s.n_gen(), 6);
        assert_eq!(s.pilot_matrix().nrows(), 2);
        assert_eq!(s.pilot_matrix().row(1), s.j1().row(5));
    }
}
