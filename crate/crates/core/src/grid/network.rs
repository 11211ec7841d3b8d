use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::GridError;

/// Role of a bus in the reactive-power/voltage model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BusKind {
    Generator,
    Capacitor,
    Load,
}

impl BusKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BusKind::Generator => "gen",
            BusKind::Capacitor => "cap",
            BusKind::Load => "load",
        }
    }
}

impl std::str::FromStr for BusKind {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gen" => Ok(BusKind::Generator),
            "cap" => Ok(BusKind::Capacitor),
            "load" => Ok(BusKind::Load),
            other => Err(GridError::Parse(format!("unknown bus kind `{other}`"))),
        }
    }
}

/// A bus addressed by area, kind and position inside that area's kind partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BusId {
    pub area: u16,
    pub kind: BusKind,
    pub index: usize,
}

impl BusId {
    pub fn new(area: u16, kind: BusKind, index: usize) -> Self {
        Self { area, kind, index }
    }
}

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.area, self.kind.as_str(), self.index)
    }
}

impl std::str::FromStr for BusId {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GridError::Parse(format!("malformed bus id `{s}` (want area:kind:index)"));
        let mut parts = s.trim().split(':');
        let area = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let kind = parts.next().ok_or_else(bad)?.parse()?;
        let index = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(BusId { area, kind, index })
    }
}

/// Reference bus of an area. It is eliminated from the susceptance model and
/// only contributes constant telemetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlackBus {
    pub number: u32,
    pub v: f64,
    pub q: f64,
}

/// External bus numbering of one control area.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AreaLayout {
    pub gen_buses: Vec<u32>,
    pub cap_buses: Vec<u32>,
    pub load_buses: Vec<u32>,
    pub slack: Option<SlackBus>,
}

impl AreaLayout {
    /// Layout with buses numbered 1.. in generator, capacitor, load order.
    pub fn sequential(n_gen: usize, n_cap: usize, n_load: usize) -> Self {
        let mut next = 1u32;
        let mut take = |count: usize| {
            let v: Vec<u32> = (next..next + count as u32).collect();
            next += count as u32;
            v
        };
        let gen_buses = take(n_gen);
        let cap_buses = take(n_cap);
        let load_buses = take(n_load);
        Self {
            gen_buses,
            cap_buses,
            load_buses,
            slack: None,
        }
    }

    pub fn count(&self, kind: BusKind) -> usize {
        self.buses(kind).len()
    }

    pub fn buses(&self, kind: BusKind) -> &[u32] {
        match kind {
            BusKind::Generator => &self.gen_buses,
            BusKind::Capacitor => &self.cap_buses,
            BusKind::Load => &self.load_buses,
        }
    }

    /// Number of telemetry rows (one per bus, slack included).
    pub fn bus_count(&self) -> usize {
        self.gen_buses.len()
            + self.cap_buses.len()
            + self.load_buses.len()
            + usize::from(self.slack.is_some())
    }
}

/// Tie line between two areas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TieLine {
    pub from: BusId,
    pub to: BusId,
}

/// The nine susceptance blocks of the linearized Q-V model, ordered
/// generator, capacitor, load.
#[derive(Debug, Clone, PartialEq)]
pub struct SusceptanceBlocks {
    pub gg: DMatrix<f64>,
    pub gc: DMatrix<f64>,
    pub gl: DMatrix<f64>,
    pub cg: DMatrix<f64>,
    pub cc: DMatrix<f64>,
    pub cl: DMatrix<f64>,
    pub lg: DMatrix<f64>,
    pub lc: DMatrix<f64>,
    pub ll: DMatrix<f64>,
}

impl SusceptanceBlocks {
    /// Split a full matrix ordered `[G | C | L]`.
    pub fn split(full: &DMatrix<f64>, n_gen: usize, n_cap: usize, n_load: usize) -> Self {
        let r = [(0, n_gen), (n_gen, n_cap), (n_gen + n_cap, n_load)];
        let blk = |a: usize, b: usize| {
            full.view((r[a].0, r[b].0), (r[a].1, r[b].1))
                .into_owned()
        };
        Self {
            gg: blk(0, 0),
            gc: blk(0, 1),
            gl: blk(0, 2),
            cg: blk(1, 0),
            cc: blk(1, 1),
            cl: blk(1, 2),
            lg: blk(2, 0),
            lc: blk(2, 1),
            ll: blk(2, 2),
        }
    }

    pub fn assemble(&self) -> DMatrix<f64> {
        let (g, c, l) = (self.gg.nrows(), self.cc.nrows(), self.ll.nrows());
        let n = g + c + l;
        let mut full = DMatrix::zeros(n, n);
        let offs = [0, g, g + c];
        let rows = [
            [&self.gg, &self.gc, &self.gl],
            [&self.cg, &self.cc, &self.cl],
            [&self.lg, &self.lc, &self.ll],
        ];
        for (i, row) in rows.iter().enumerate() {
            for (j, blk) in row.iter().enumerate() {
                full.view_mut((offs[i], offs[j]), blk.shape()).copy_from(*blk);
            }
        }
        full
    }
}

/// Nominal operating point around which the linear model is taken.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub v_gen: DVector<f64>,
    pub v_cap: DVector<f64>,
    pub q_gen: DVector<f64>,
    pub q_cap: DVector<f64>,
    /// Reactive load demand (positive = consumption).
    pub q_load: DVector<f64>,
}

/// Everything needed to build a [`NetworkModel`].
#[derive(Debug, Clone)]
pub struct NetworkParts {
    pub areas: Vec<AreaLayout>,
    pub blocks: SusceptanceBlocks,
    pub tie_line_impedance: Complex64,
    pub tie_lines: Vec<TieLine>,
    pub v_ref: DVector<f64>,
    pub nominal: OperatingPoint,
}

/// Validated multi-area network.
///
/// Buses of each kind are stacked area by area: all generators of area 0,
/// then area 1, and so on. The same convention holds for capacitors and loads.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    areas: Vec<AreaLayout>,
    blocks: SusceptanceBlocks,
    tie_line_impedance: Complex64,
    tie_lines: Vec<TieLine>,
    v_ref: DVector<f64>,
    nominal: OperatingPoint,
    cc_inv: DMatrix<f64>,
}

const SYMMETRY_TOL: f64 = 1e-9;
/// Reciprocal condition number below which a block counts as singular.
pub(crate) const SINGULAR_RCOND: f64 = 1e-12;

impl NetworkModel {
    pub fn new(parts: NetworkParts) -> Result<Self, GridError> {
        let NetworkParts {
            areas,
            blocks,
            tie_line_impedance,
            tie_lines,
            v_ref,
            nominal,
        } = parts;
        if areas.is_empty() {
            return Err(GridError::Invalid("network has no areas".into()));
        }
        let count = |k| areas.iter().map(|a| a.count(k)).sum::<usize>();
        let (ng, nc, nl) = (
            count(BusKind::Generator),
            count(BusKind::Capacitor),
            count(BusKind::Load),
        );
        if nc == 0 || nl == 0 {
            return Err(GridError::Invalid(
                "at least one capacitor and one load bus are required".into(),
            ));
        }
        let dims = [
            ("B_GG", &blocks.gg, ng, ng),
            ("B_GC", &blocks.gc, ng, nc),
            ("B_GL", &blocks.gl, ng, nl),
            ("B_CG", &blocks.cg, nc, ng),
            ("B_CC", &blocks.cc, nc, nc),
            ("B_CL", &blocks.cl, nc, nl),
            ("B_LG", &blocks.lg, nl, ng),
            ("B_LC", &blocks.lc, nl, nc),
            ("B_LL", &blocks.ll, nl, nl),
        ];
        for (name, m, r, c) in dims {
            if m.shape() != (r, c) {
                return Err(GridError::Dimension {
                    what: name.to_string(),
                    expected: (r, c),
                    found: m.shape(),
                });
            }
        }
        let vecs = [
            ("v_ref", &v_ref, nl),
            ("v_gen", &nominal.v_gen, ng),
            ("v_cap", &nominal.v_cap, nc),
            ("q_gen", &nominal.q_gen, ng),
            ("q_cap", &nominal.q_cap, nc),
            ("q_load", &nominal.q_load, nl),
        ];
        for (name, v, n) in vecs {
            if v.len() != n {
                return Err(GridError::Dimension {
                    what: name.to_string(),
                    expected: (n, 1),
                    found: (v.len(), 1),
                });
            }
        }
        if v_ref
            .iter()
            .chain(nominal.v_gen.iter())
            .chain(nominal.v_cap.iter())
            .any(|&v| !(v > 0.0) || !v.is_finite())
        {
            return Err(GridError::Invalid("voltages must be positive".into()));
        }

        let full = blocks.assemble();
        if full.iter().any(|x| !x.is_finite()) {
            return Err(GridError::Invalid("susceptance matrix is not finite".into()));
        }
        let scale = full.amax().max(1.0);
        let asym = (&full - full.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(GridError::Asymmetric(asym));
        }

        let n_areas = areas.len();
        for tie in &tie_lines {
            for end in [tie.from, tie.to] {
                let ok = (end.area as usize) < n_areas
                    && end.index < areas[end.area as usize].count(end.kind);
                if !ok {
                    return Err(GridError::UnknownBus(end.to_string()));
                }
            }
        }

        let cc_inv = invert_checked(&blocks.cc, "B_CC")?;
        let schur = &blocks.ll - &blocks.lc * &cc_inv * &blocks.cl;
        invert_checked(&schur, "Schur complement B_LL - B_LC*B_CC^-1*B_CL")?;

        Ok(Self {
            areas,
            blocks,
            tie_line_impedance,
            tie_lines,
            v_ref,
            nominal,
            cc_inv,
        })
    }

    pub fn areas(&self) -> &[AreaLayout] {
        &self.areas
    }

    pub fn blocks(&self) -> &SusceptanceBlocks {
        &self.blocks
    }

    pub fn tie_line_impedance(&self) -> Complex64 {
        self.tie_line_impedance
    }

    pub fn tie_lines(&self) -> &[TieLine] {
        &self.tie_lines
    }

    /// Reference voltage of every load bus.
    pub fn v_ref(&self) -> &DVector<f64> {
        &self.v_ref
    }

    pub fn nominal(&self) -> &OperatingPoint {
        &self.nominal
    }

    pub(crate) fn cc_inverse(&self) -> &DMatrix<f64> {
        &self.cc_inv
    }

    pub fn n_gen(&self) -> usize {
        self.blocks.gg.nrows()
    }

    pub fn n_cap(&self) -> usize {
        self.blocks.cc.nrows()
    }

    pub fn n_load(&self) -> usize {
        self.blocks.ll.nrows()
    }

    /// Full susceptance matrix ordered `[G | C | L]`.
    pub fn assembled_b(&self) -> DMatrix<f64> {
        self.blocks.assemble()
    }

    /// Offset of `area`'s first bus of `kind` inside that kind's global partition.
    pub fn offset(&self, area: u16, kind: BusKind) -> usize {
        self.areas[..area as usize]
            .iter()
            .map(|a| a.count(kind))
            .sum()
    }

    /// Position of `bus` inside its kind's global partition.
    pub fn global_index(&self, bus: BusId) -> Option<usize> {
        let area = self.areas.get(bus.area as usize)?;
        (bus.index < area.count(bus.kind)).then(|| self.offset(bus.area, bus.kind) + bus.index)
    }

    /// Position of `bus` in the assembled `[G | C | L]` ordering.
    pub fn assembled_index(&self, bus: BusId) -> Option<usize> {
        let base = match bus.kind {
            BusKind::Generator => 0,
            BusKind::Capacitor => self.n_gen(),
            BusKind::Load => self.n_gen() + self.n_cap(),
        };
        self.global_index(bus).map(|i| base + i)
    }

    /// Inverse of [`NetworkModel::global_index`].
    pub fn bus_at(&self, kind: BusKind, global: usize) -> Option<BusId> {
        let mut rest = global;
        for (a, area) in self.areas.iter().enumerate() {
            let n = area.count(kind);
            if rest < n {
                return Some(BusId::new(a as u16, kind, rest));
            }
            rest -= n;
        }
        None
    }

    /// External bus number of `bus` inside its area.
    pub fn bus_number(&self, bus: BusId) -> Option<u32> {
        self.areas
            .get(bus.area as usize)
            .and_then(|a| a.buses(bus.kind).get(bus.index))
            .copied()
    }
}

/// Series susceptance `Im(1/z) = -X/(R² + X²)` of a branch impedance.
pub fn series_susceptance(z: Complex64) -> f64 {
    -z.im / z.norm_sqr()
}

pub(crate) fn invert_checked(m: &DMatrix<f64>, name: &str) -> Result<DMatrix<f64>, GridError> {
    let singular = || GridError::Singular(name.to_string());
    if m.nrows() != m.ncols() {
        return Err(singular());
    }
    if m.is_empty() {
        return Ok(m.clone());
    }
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if !(max > 0.0) || min / max < SINGULAR_RCOND {
        return Err(singular());
    }
    m.clone().try_inverse().ok_or_else(singular)
}
