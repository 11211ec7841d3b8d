//! Network construction from branch lists: seeded synthetic systems and the
//! bundled three-area 27-bus system.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::network::{
    series_susceptance, AreaLayout, BusId, BusKind, NetworkModel, NetworkParts, OperatingPoint,
    SlackBus, SusceptanceBlocks, TieLine,
};
use super::GridError;

/// Tie-line impedance used by the 27-bus system, in per unit.
pub const DEFAULT_TIE_IMPEDANCE: Complex64 = Complex64::new(0.02, 0.07);

/// Accumulates branches and shunts into a `[G | C | L]` susceptance matrix.
#[derive(Debug, Clone)]
pub struct NetworkBuilder {
    areas: Vec<AreaLayout>,
    full: DMatrix<f64>,
    tie_line_impedance: Complex64,
    tie_lines: Vec<TieLine>,
    counts: [usize; 3],
}

impl NetworkBuilder {
    pub fn new(areas: Vec<AreaLayout>, tie_line_impedance: Complex64) -> Self {
        let count = |k| areas.iter().map(|a: &AreaLayout| a.count(k)).sum::<usize>();
        let counts = [
            count(BusKind::Generator),
            count(BusKind::Capacitor),
            count(BusKind::Load),
        ];
        let n = counts.iter().sum();
        Self {
            areas,
            full: DMatrix::zeros(n, n),
            tie_line_impedance,
            tie_lines: Vec::new(),
            counts,
        }
    }

    fn index(&self, bus: BusId) -> usize {
        let area = &self.areas[bus.area as usize];
        assert!(bus.index < area.count(bus.kind), "bus {bus} out of range");
        let base = match bus.kind {
            BusKind::Generator => 0,
            BusKind::Capacitor => self.counts[0],
            BusKind::Load => self.counts[0] + self.counts[1],
        };
        base + self.areas[..bus.area as usize]
            .iter()
            .map(|a| a.count(bus.kind))
            .sum::<usize>()
            + bus.index
    }

    /// Adds a branch with series susceptance `b_series` (negative for an
    /// inductive line).
    pub fn add_branch(&mut self, a: BusId, b: BusId, b_series: f64) -> &mut Self {
        let (i, j) = (self.index(a), self.index(b));
        assert_ne!(i, j, "self loop on {a}");
        self.full[(i, j)] += b_series;
        self.full[(j, i)] += b_series;
        self.full[(i, i)] -= b_series;
        self.full[(j, j)] -= b_series;
        self
    }

    /// Adds a tie line between areas using the builder's tie impedance.
    pub fn add_tie(&mut self, from: BusId, to: BusId) -> &mut Self {
        assert_ne!(from.area, to.area, "tie line inside one area");
        self.add_branch(from, to, series_susceptance(self.tie_line_impedance));
        self.tie_lines.push(TieLine { from, to });
        self
    }

    /// Adds a shunt term to the bus's diagonal entry.
    pub fn add_shunt(&mut self, bus: BusId, b: f64) -> &mut Self {
        let i = self.index(bus);
        self.full[(i, i)] += b;
        self
    }

    pub fn build(self, v_ref: DVector<f64>, nominal: OperatingPoint) -> Result<NetworkModel, GridError> {
        let [g, c, l] = self.counts;
        NetworkModel::new(NetworkParts {
            blocks: SusceptanceBlocks::split(&self.full, g, c, l),
            areas: self.areas,
            tie_line_impedance: self.tie_line_impedance,
            tie_lines: self.tie_lines,
            v_ref,
            nominal,
        })
    }
}

/// Parameters of a seeded synthetic network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub areas: usize,
    pub n_gen: usize,
    pub n_cap: usize,
    pub n_load: usize,
    pub seed: u64,
    pub tie_line_impedance: Complex64,
}

impl SyntheticSpec {
    pub fn new(areas: usize, n_gen: usize, n_cap: usize, n_load: usize, seed: u64) -> Self {
        Self {
            areas,
            n_gen,
            n_cap,
            n_load,
            seed,
            tie_line_impedance: DEFAULT_TIE_IMPEDANCE,
        }
    }
}

const BRANCH_SUSCEPTANCE: std::ops::Range<f64> = 2.0..10.0;
const SHUNT_SUSCEPTANCE: std::ops::Range<f64> = 0.05..0.25;
const EXTRA_BRANCH_PROBABILITY: f64 = 0.25;

/// Builds a random multi-area network whose susceptance matrix is symmetric
/// and strictly diagonally dominant. Identical specs give identical models.
///
/// Each area is a ring over its buses plus random chords; consecutive areas
/// are joined by one tie line from the last load bus of area `a` to the first
/// load bus of area `a + 1`.
///
/// Panics if any count is zero.
pub fn build_synthetic_network(spec: &SyntheticSpec) -> NetworkModel {
    assert!(
        spec.areas >= 1 && spec.n_gen >= 1 && spec.n_cap >= 1 && spec.n_load >= 1,
        "synthetic network counts must all be at least one"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let layouts: Vec<AreaLayout> = (0..spec.areas)
        .map(|_| AreaLayout::sequential(spec.n_gen, spec.n_cap, spec.n_load))
        .collect();
    let mut builder = NetworkBuilder::new(layouts, spec.tie_line_impedance);

    for area in 0..spec.areas as u16 {
        let buses: Vec<BusId> = [
            (BusKind::Generator, spec.n_gen),
            (BusKind::Capacitor, spec.n_cap),
            (BusKind::Load, spec.n_load),
        ]
        .into_iter()
        .flat_map(|(kind, n)| (0..n).map(move |i| BusId::new(area, kind, i)))
        .collect();
        let n = buses.len();
        for i in 0..n {
            for j in i + 1..n {
                let ring = j == i + 1 || (i == 0 && j == n - 1 && n > 2);
                if ring || rng.random_bool(EXTRA_BRANCH_PROBABILITY) {
                    let b = rng.random_range(BRANCH_SUSCEPTANCE);
                    builder.add_branch(buses[i], buses[j], -b);
                }
            }
        }
        for &bus in &buses {
            let b = rng.random_range(SHUNT_SUSCEPTANCE);
            builder.add_shunt(bus, b);
        }
    }
    for area in 1..spec.areas as u16 {
        builder.add_tie(
            BusId::new(area - 1, BusKind::Load, spec.n_load - 1),
            BusId::new(area, BusKind::Load, 0),
        );
    }

    let (ng, nc, nl) = (
        spec.areas * spec.n_gen,
        spec.areas * spec.n_cap,
        spec.areas * spec.n_load,
    );
    let mut uniform = |n: usize, lo: f64, hi: f64| {
        DVector::from_iterator(n, (0..n).map(|_| rng.random_range(lo..hi)))
    };
    let nominal = OperatingPoint {
        v_gen: uniform(ng, 1.0, 1.04),
        v_cap: DVector::from_element(nc, 1.0),
        q_gen: uniform(ng, 0.2, 0.6),
        q_cap: uniform(nc, 0.1, 0.3),
        q_load: uniform(nl, 0.2, 0.8),
    };
    builder
        .build(DVector::from_element(nl, 1.0), nominal)
        .expect("diagonally dominant construction is always invertible")
}

/// Per-area branch list of the 9-bus area: (from, to, reactance).
///
/// Bus 1 is the area reference, 2 and 3 carry capacitor banks, 4 to 6 are
/// voltage-controlled and 7 to 9 are load buses.
const NINE_BUS_BRANCHES: [(u32, u32, f64); 9] = [
    (1, 4, 0.0576),
    (4, 5, 0.092),
    (5, 6, 0.17),
    (3, 6, 0.0586),
    (6, 7, 0.1008),
    (7, 8, 0.072),
    (8, 2, 0.0625),
    (8, 9, 0.161),
    (9, 4, 0.085),
];

/// Weakening factor applied to the 9-bus reactances.
const NINE_BUS_REACTANCE_SCALE: f64 = 3.0;

/// Three 9-bus areas joined in a ring by tie lines from bus 9 of each area
/// to bus 7 of the next.
pub fn three_area_27bus() -> NetworkModel {
    let layout = AreaLayout {
        gen_buses: vec![4, 5, 6],
        cap_buses: vec![2, 3],
        load_buses: vec![7, 8, 9],
        slack: Some(SlackBus {
            number: 1,
            v: 1.04,
            q: 0.27,
        }),
    };
    let n_areas = 3u16;
    let mut builder = NetworkBuilder::new(vec![layout.clone(); n_areas as usize], DEFAULT_TIE_IMPEDANCE);
    let locate = |area: u16, number: u32| -> Option<BusId> {
        [BusKind::Generator, BusKind::Capacitor, BusKind::Load]
            .into_iter()
            .find_map(|k| {
                layout
                    .buses(k)
                    .iter()
                    .position(|&b| b == number)
                    .map(|i| BusId::new(area, k, i))
            })
    };
    for area in 0..n_areas {
        for &(from, to, x) in &NINE_BUS_BRANCHES {
            let b = -1.0 / (x * NINE_BUS_REACTANCE_SCALE);
            match (locate(area, from), locate(area, to)) {
                (Some(a), Some(c)) => {
                    builder.add_branch(a, c, b);
                }
                // Branch to the reference bus: only the diagonal term survives.
                (Some(a), None) | (None, Some(a)) => {
                    builder.add_shunt(a, -b);
                }
                (None, None) => unreachable!("branch between two reference buses"),
            }
        }
    }
    for area in 0..n_areas {
        let next = (area + 1) % n_areas;
        builder.add_tie(
            locate(area, 9).expect("bus 9"),
            locate(next, 7).expect("bus 7"),
        );
    }
    let rep = |v: &[f64]| DVector::from_iterator(v.len() * 3, v.iter().copied().cycle().take(v.len() * 3));
    let nominal = OperatingPoint {
        v_gen: rep(&[1.02, 1.02, 1.02]),
        v_cap: rep(&[1.0, 1.0]),
        q_gen: rep(&[0.30, 0.25, 0.20]),
        q_cap: rep(&[0.20, 0.15]),
        q_load: rep(&[0.80, 0.90, 0.70]),
    };
    builder
        .build(DVector::from_element(9, 1.0), nominal)
        .expect("27-bus system is well posed")
}
