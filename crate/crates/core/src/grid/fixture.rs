//! Text format for network fixtures.
//!
//! ```text
//! format = 1
//! tie_impedance = 0.02 0.07
//! areas = 1
//! area 0 gen = 4 5 6
//! area 0 cap = 2 3
//! area 0 load = 7 8 9
//! area 0 slack = 1 1.04 0.27
//! tie = 0:load:2 1:load:0
//! v_ref = 1 1 1
//! v_gen = ...
//! matrix B_GG 3 3
//! <3 rows of 3 numbers>
//! ```
//!
//! Lines starting with `#` are comments. Every one of the nine susceptance
//! blocks must be present; matrices are row-major.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::network::{
    AreaLayout, BusId, NetworkModel, NetworkParts, OperatingPoint, SlackBus, SusceptanceBlocks,
    TieLine,
};
use super::GridError;

pub const FORMAT_VERSION: u32 = 1;

const BLOCK_NAMES: [&str; 9] = [
    "B_GG", "B_GC", "B_GL", "B_CG", "B_CC", "B_CL", "B_LG", "B_LC", "B_LL",
];

fn parse_err(line: usize, msg: impl std::fmt::Display) -> GridError {
    GridError::Parse(format!("line {line}: {msg}"))
}

fn numbers<T: std::str::FromStr>(line: usize, s: &str) -> Result<Vec<T>, GridError> {
    s.split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(line, format!("bad number `{t}`"))))
        .collect()
}

pub fn parse_network(text: &str) -> Result<NetworkModel, GridError> {
    let mut values: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut matrices: BTreeMap<String, DMatrix<f64>> = BTreeMap::new();
    let mut ties: Vec<TieLine> = Vec::new();

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    while let Some((no, line)) = lines.next() {
        if let Some(rest) = line.strip_prefix("matrix ") {
            let head: Vec<&str> = rest.split_whitespace().collect();
            let [name, r, c] = head[..] else {
                return Err(parse_err(no, "expected `matrix NAME ROWS COLS`"));
            };
            let rows: usize = r.parse().map_err(|_| parse_err(no, "bad row count"))?;
            let cols: usize = c.parse().map_err(|_| parse_err(no, "bad column count"))?;
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let (rno, row) = lines
                    .next()
                    .ok_or_else(|| parse_err(no, format!("matrix {name} truncated")))?;
                let v: Vec<f64> = numbers(rno, row)?;
                if v.len() != cols {
                    return Err(parse_err(rno, format!("expected {cols} entries, got {}", v.len())));
                }
                data.extend(v);
            }
            if matrices
                .insert(name.to_string(), DMatrix::from_row_slice(rows, cols, &data))
                .is_some()
            {
                return Err(parse_err(no, format!("matrix {name} given twice")));
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(no, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if key == "tie" {
            let ends: Vec<&str> = value.split_whitespace().collect();
            let [from, to] = ends[..] else {
                return Err(parse_err(no, "tie needs two bus ids"));
            };
            ties.push(TieLine {
                from: from.parse::<BusId>().map_err(|e| parse_err(no, e))?,
                to: to.parse::<BusId>().map_err(|e| parse_err(no, e))?,
            });
            continue;
        }
        if values
            .insert(key.to_string(), (no, value.to_string()))
            .is_some()
        {
            return Err(parse_err(no, format!("duplicate key `{key}`")));
        }
    }

    let get = |key: &str| -> Result<(usize, &str), GridError> {
        values
            .get(key)
            .map(|(n, v)| (*n, v.as_str()))
            .ok_or_else(|| GridError::Parse(format!("missing `{key}`")))
    };

    let (no, fmt) = get("format")?;
    if fmt != FORMAT_VERSION.to_string() {
        return Err(parse_err(no, format!("unsupported format `{fmt}`")));
    }
    let (no, tie) = get("tie_impedance")?;
    let tie_z: Vec<f64> = numbers(no, tie)?;
    let [r, x] = tie_z[..] else {
        return Err(parse_err(no, "tie_impedance needs R and X"));
    };
    let (no, n_areas) = get("areas")?;
    let n_areas: usize = n_areas.parse().map_err(|_| parse_err(no, "bad area count"))?;

    let mut areas = Vec::with_capacity(n_areas);
    for a in 0..n_areas {
        let list = |kind: &str| -> Result<Vec<u32>, GridError> {
            let (no, v) = get(&format!("area {a} {kind}"))?;
            numbers(no, v)
        };
        let slack = match values.get(&format!("area {a} slack")) {
            None => None,
            Some((no, v)) => {
                let f: Vec<f64> = numbers(*no, v)?;
                let [number, v, q] = f[..] else {
                    return Err(parse_err(*no, "slack needs number, v, q"));
                };
                Some(SlackBus {
                    number: number as u32,
                    v,
                    q,
                })
            }
        };
        areas.push(AreaLayout {
            gen_buses: list("gen")?,
            cap_buses: list("cap")?,
            load_buses: list("load")?,
            slack,
        });
    }

    let vector = |key: &str| -> Result<DVector<f64>, GridError> {
        let (no, v) = get(key)?;
        Ok(DVector::from_vec(numbers(no, v)?))
    };
    let mut block = |name: &str| {
        matrices
            .remove(name)
            .ok_or_else(|| GridError::Parse(format!("missing matrix {name}")))
    };
    let blocks = SusceptanceBlocks {
        gg: block("B_GG")?,
        gc: block("B_GC")?,
        gl: block("B_GL")?,
        cg: block("B_CG")?,
        cc: block("B_CC")?,
        cl: block("B_CL")?,
        lg: block("B_LG")?,
        lc: block("B_LC")?,
        ll: block("B_LL")?,
    };
    if let Some(extra) = matrices.keys().next() {
        return Err(GridError::Parse(format!("unknown matrix {extra}")));
    }

    NetworkModel::new(NetworkParts {
        areas,
        blocks,
        tie_line_impedance: Complex64::new(r, x),
        tie_lines: ties,
        v_ref: vector("v_ref")?,
        nominal: OperatingPoint {
            v_gen: vector("v_gen")?,
            v_cap: vector("v_cap")?,
            q_gen: vector("q_gen")?,
            q_cap: vector("q_cap")?,
            q_load: vector("q_load")?,
        },
    })
}

pub fn load_network(path: &std::path::Path) -> Result<NetworkModel, GridError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| GridError::Parse(format!("{}: {e}", path.display())))?;
    parse_network(&text)
}

fn join<T: std::fmt::Display>(it: impl IntoIterator<Item = T>) -> String {
    it.into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Serializes a network. Floats use the shortest round-trip representation,
/// so `parse_network(&write_network(n)) == n`.
pub fn write_network(net: &NetworkModel) -> String {
    let mut out = String::new();
    let z = net.tie_line_impedance();
    let _ = writeln!(out, "format = {FORMAT_VERSION}");
    let _ = writeln!(out, "tie_impedance = {} {}", z.re, z.im);
    let _ = writeln!(out, "areas = {}", net.areas().len());
    for (a, layout) in net.areas().iter().enumerate() {
        let _ = writeln!(out, "area {a} gen = {}", join(&layout.gen_buses));
        let _ = writeln!(out, "area {a} cap = {}", join(&layout.cap_buses));
        let _ = writeln!(out, "area {a} load = {}", join(&layout.load_buses));
        if let Some(s) = layout.slack {
            let _ = writeln!(out, "area {a} slack = {} {} {}", s.number, s.v, s.q);
        }
    }
    for t in net.tie_lines() {
        let _ = writeln!(out, "tie = {} {}", t.from, t.to);
    }
    let op = net.nominal();
    for (key, v) in [
        ("v_ref", net.v_ref()),
        ("v_gen", &op.v_gen),
        ("v_cap", &op.v_cap),
        ("q_gen", &op.q_gen),
        ("q_cap", &op.q_cap),
        ("q_load", &op.q_load),
    ] {
        let _ = writeln!(out, "{key} = {}", join(v.iter()));
    }
    let b = net.blocks();
    let mats = [&b.gg, &b.gc, &b.gl, &b.cg, &b.cc, &b.cl, &b.lg, &b.lc, &b.ll];
    for (name, m) in BLOCK_NAMES.iter().zip(mats) {
        let _ = writeln!(out, "matrix {name} {} {}", m.nrows(), m.ncols());
        for row in m.row_iter() {
            let _ = writeln!(out, "{}", join(row.iter()));
        }
    }
    out
}
