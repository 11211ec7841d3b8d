//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

mod common;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use gridsvc_core::control::{solve_inf_norm, ControlBounds};
use gridsvc_core::cs::{dct_inverse, omp, Codec, CodecConfig, CompressedFrame};
use gridsvc_core::grid::{build_synthetic_network, compute_sensitivities, SyntheticSpec};
use gridsvc_core::harness::{
    load_scenario, max_ratio_above, run_scenario, sweep_compression_synthetic, sweep_pilots, Scenario,
};
use gridsvc_core::morphology::{dilate, erode, StructuringElement};
use gridsvc_core::mse::{detect, DetectorConfig};
use gridsvc_core::telemetry::{deserialize, serialize};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn scenario(name: &str) -> Scenario {
    load_scenario(&fixture(name)).expect("bundled scenario")
}

fn within(limit: Option<Duration>, start: Instant, outcome: Outcome) -> Outcome {
    let took = start.elapsed();
    match (outcome, limit) {
        (Ok(msg), Some(l)) if took > l => Err(format!("{msg}; took {took:.2?}, limit {l:?}")),
        (Ok(msg), _) => Ok(format!("{msg}; {took:.2?}")),
        (Err(msg), _) => Err(format!("{msg}; {took:.2?}")),
    }
}

fn sensitivity_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0f64;
    for seed in 0..50u64 {
        let areas = rng.random_range(1..=3usize);
        let n_load = rng.random_range(1..=10 / areas);
        let spec = SyntheticSpec::new(areas, rng.random_range(1..=4), rng.random_range(1..=4), n_load, seed);
        let net = build_synthetic_network(&spec);
        assert!(net.n_load() <= 10);
        let sens = compute_sensitivities(&net, &[0]).map_err(|e| e.to_string())?;
        let dq = DVector::from_fn(net.n_load(), |_, _| rng.random_range(-0.5..0.5));
        let u = DVector::from_fn(sens.n_controls(), |_, _| rng.random_range(-0.1..0.1));
        let reduced = sens.j1() * &dq - sens.j2() * &u;
        worst = worst.max((reduced - common::full_system_dv(&net, &dq, &u)).amax());
    }
    let msg = format!("max deviation {worst:.2e} over 50 networks");
    if worst < 1e-9 { Ok(msg) } else { Err(msg) }
}

fn lp_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0f64;
    for _ in 0..100 {
        let rows = rng.random_range(1..=6usize);
        let target = DVector::from_fn(rows, |_, _| rng.random_range(-0.5..0.5));
        let j2 = DMatrix::from_fn(rows, 2, |_, _| rng.random_range(-1.0..1.0));
        let lower = DVector::from_fn(2, |_, _| rng.random_range(-0.3..0.3));
        let upper = DVector::from_fn(2, |i, _| lower[i] + rng.random_range(0.01..0.4));
        let bounds = ControlBounds::new(lower, upper, 1).expect("ordered box");
        let fit = solve_inf_norm(&target, &j2, &bounds).map_err(|e| e.to_string())?;
        if !bounds.contains(fit.input.values()) {
            return Err("control outside its box".into());
        }
        let grid = common::grid_search_inf(&target, &j2, &bounds, 1e-3);
        if fit.objective > grid + 1e-9 {
            return Err(format!("objective {} above grid optimum {grid}", fit.objective));
        }
        worst = worst.max(grid - fit.objective);
    }
    let msg = format!("largest gap to grid search {worst:.2e}");
    if worst <= 2e-3 { Ok(msg) } else { Err(msg) }
}

fn controller_convergence() -> Outcome {
    let r = run_scenario(&scenario("load_steps.scn")).map_err(|e| e.to_string())?;
    if let Some(c) = r.control.iter().find(|c| !c.converged || c.iterations > 50 || !c.applied_feasible) {
        return Err(format!("control step at {} s: {c:?}", c.time_s));
    }
    let mut parts = Vec::new();
    for t in [21.0, 42.0] {
        let k = r.step_of(t).ok_or("event step missing")?;
        let (pre, post) = (r.x_rms[k], r.x_rms[k + 1]);
        let c = &r.control[k];
        if post > pre || c.x_rms_predicted > c.x_rms_before {
            return Err(format!("t={t}: x_rms {pre:.3e} -> {post:.3e}, predicted {:.3e}", c.x_rms_predicted));
        }
        parts.push(format!("t={t}: {pre:.3e} -> {post:.3e}"));
    }
    let max_iter = r.control.iter().map(|c| c.iterations).max().unwrap_or(0);
    Ok(format!("{}; at most {max_iter} iterations", parts.join(", ")))
}

fn pilot_sweep() -> Outcome {
    let pts = sweep_pilots(&scenario("load_steps.scn"), &(1..=9).collect::<Vec<_>>()).map_err(|e| e.to_string())?;
    let (first, last) = (pts[0].final_x_rms, pts[8].final_x_rms);
    let msg = format!("1 pilot {first:.4e}, 9 pilots {last:.4e}");
    if last > first {
        return Err(msg);
    }
    match pts.windows(2).find(|w| w[1].final_x_rms > w[0].final_x_rms + 1e-6) {
        Some(w) => Err(format!("{msg}; rises from {} to {} pilots", w[0].pilots, w[1].pilots)),
        None => Ok(msg),
    }
}

fn cs_trend() -> Outcome {
    let small = sweep_compression_synthetic(54, &[2.0, 4.0, 6.0], 20, 1).map_err(|e| e.to_string())?;
    let snrs: Vec<f64> = small.iter().map(|p| p.median_snr_db).collect();
    let decreasing = snrs.windows(2).all(|w| w[1] < w[0]);
    let rhos: Vec<f64> = (1..=12).map(|k| 2.0 * k as f64).collect();
    let small_sweep = sweep_compression_synthetic(54, &rhos, 20, 1).map_err(|e| e.to_string())?;
    let large_sweep = sweep_compression_synthetic(486, &rhos, 20, 1).map_err(|e| e.to_string())?;
    let (rs, rl) = (max_ratio_above(&small_sweep, 30.0), max_ratio_above(&large_sweep, 30.0));
    let msg = format!(
        "54 states: {:.1}/{:.1}/{:.1} dB at rho 2/4/6; largest rho >= 30 dB: 54 -> {rs:?}, 486 -> {rl:?}",
        snrs[0], snrs[1], snrs[2]
    );
    if decreasing && snrs[0] >= 30.0 && rl > rs { Ok(msg) } else { Err(msg) }
}

fn omp_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut checked, mut short_budget_misses) = (0, 0);
    while checked < 300 {
        let n = rng.random_range(3..=12usize);
        let k = rng.random_range(1..=2usize);
        let m = rng.random_range(k + 1..=n);
        let a = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut x = DVector::zeros(n);
        for _ in 0..k {
            x[rng.random_range(0..n)] = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        }
        let y = &a * x;
        let oracle = common::exhaustive_l0(&a, &y, k);
        if oracle > 1e-9 {
            continue;
        }
        checked += 1;
        let full = omp(&a, &y, m, 1e-12);
        if full.residual_norm() > oracle + 1e-6 {
            return Err(format!("n={n} m={m} k={k}: residual {:.2e}", full.residual_norm()));
        }
        if omp(&a, &y, k, 1e-12).residual_norm() > oracle + 1e-6 {
            short_budget_misses += 1;
        }
    }
    let mut exact = 0;
    for seed in 0..100u64 {
        let codec = Codec::new(CodecConfig::new(32, 8, 500 + seed).expect("valid config"));
        let mut theta = DVector::zeros(32);
        theta[rng.random_range(0..32)] = rng.random_range(0.2..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let s = codec.decode(&codec.encode(&dct_inverse(&theta)).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        if (s.theta - theta).amax() < 1e-8 {
            exact += 1;
        }
    }
    let msg = format!(
        "{checked} zero-residual instances matched (a k-selection budget misses {short_budget_misses}); n=32 m=8 exact {exact}/100"
    );
    if exact >= 95 { Ok(msg) } else { Err(msg) }
}

fn morphology_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..1000 {
        let n = rng.random_range(1..=64usize);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let g = StructuringElement::flat(2 * rng.random_range(0..=10usize) + 1).expect("odd length");
        let (d, e) = (dilate(&x, &g), erode(&x, &g));
        if d != common::naive_dilate(&x, g.len()) || e != common::naive_erode(&x, g.len()) {
            return Err(format!("pair {i}: differs from sliding extrema"));
        }
        if (0..n).any(|k| !(e[k] <= x[k] && x[k] <= d[k])) {
            return Err(format!("pair {i}: ordering violated"));
        }
    }
    Ok("1000 pairs match sliding max/min and keep erode <= x <= dilate".into())
}

fn entropy_invariants() -> Outcome {
    let cfg = DetectorConfig::default();
    for level in [0.5, 1.0, 1.04, 3.0] {
        let r = detect(&[level; 20], &cfg).map_err(|e| e.to_string())?;
        if r.entropy != 0.0 || r.alarm {
            return Err(format!("constant {level}: E = {}", r.entropy));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..1000 {
        let w: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let base = detect(&w, &cfg).map_err(|e| e.to_string())?;
        let bound = (base.selected_count as f64).ln();
        if !(0.0..=bound).contains(&base.entropy) {
            return Err(format!("window {i}: E = {} outside [0, {bound}]", base.entropy));
        }
        for a in [0.5, 2.0, 10.0] {
            let scaled: Vec<f64> = w.iter().map(|v| a * v).collect();
            let r = detect(&scaled, &cfg).map_err(|e| e.to_string())?;
            let same_p = r.probabilities.len() == base.probabilities.len()
                && (&r.probabilities - &base.probabilities).amax() <= 1e-12;
            if !same_p || (r.entropy - base.entropy).abs() > 1e-12 || r.alarm != base.alarm {
                return Err(format!("window {i}: scaling by {a} changed the result"));
            }
        }
    }
    Ok("constant windows silent; 1000 windows bounded and scale invariant".into())
}

fn fault_discrimination() -> Outcome {
    let (noise, fault) = (scenario("noise40.scn"), scenario("fault175.scn"));
    let (mut false_alarms, mut missed, mut total_fault_alarms) = (0, 0, 0);
    for seed in 1..=20 {
        let n = run_scenario(&Scenario { seed, ..noise.clone() }).map_err(|e| e.to_string())?;
        false_alarms += n.alarms.len();
        let f = run_scenario(&Scenario { seed, ..fault.clone() }).map_err(|e| e.to_string())?;
        total_fault_alarms += f.alarms.len();
        if !f.alarms.iter().any(|a| (a.time_s - 20.0).abs() < 1e-9) {
            missed += 1;
        }
    }
    let msg = format!(
        "noise alarms {false_alarms}, fault seeds without a 20 s alarm {missed}, fault alarms in total {total_fault_alarms} over 20 seeds"
    );
    if false_alarms == 0 && missed == 0 { Ok(msg) } else { Err(msg) }
}

fn wire_format() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for i in 0..1000 {
        let n = rng.random_range(1..=128usize);
        let m = rng.random_range(1..=n);
        let frame = CompressedFrame {
            y: DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal) * 10f64.powi(rng.random_range(-6..6))),
            config: CodecConfig::new(n, m, rng.random()).map_err(|e| e.to_string())?,
            timestamp_micros: rng.random(),
            area_id: rng.random(),
        };
        let bytes = serialize(&frame);
        if deserialize(&bytes).as_ref() != Ok(&frame) {
            return Err(format!("frame {i}: round trip changed the frame"));
        }
        let mut bad = bytes.clone();
        let at = rng.random_range(0..bad.len());
        bad[at] ^= rng.random_range(1..=255u8);
        if deserialize(&bad).is_ok() {
            return Err(format!("frame {i}: corrupted byte {at} accepted"));
        }
        if i < 20 {
            for at in 0..bytes.len() {
                for flip in [0x01u8, 0x80, 0xff] {
                    let mut bad = bytes.clone();
                    bad[at] ^= flip;
                    if deserialize(&bad).is_ok() {
                        return Err(format!("frame {i}: corrupted byte {at} accepted"));
                    }
                }
            }
        }
    }
    let three = CompressedFrame {
        y: DVector::from_vec(vec![0.1, 0.2, 0.3]),
        config: CodecConfig::new(8, 3, 1).map_err(|e| e.to_string())?,
        timestamp_micros: 0,
        area_id: 0,
    };
    let len = serialize(&three).len();
    let msg = format!("1000 round trips, corruption always rejected, m=3 frame {len} bytes");
    if len == 59 { Ok(msg) } else { Err(msg) }
}

fn determinism() -> Outcome {
    let s = scenario("load_steps.scn");
    let a = run_scenario(&s).map_err(|e| e.to_string())?.to_csv();
    let b = run_scenario(&s).map_err(|e| e.to_string())?.to_csv();
    if a.as_bytes() == b.as_bytes() {
        Ok(format!("{} identical bytes", a.len()))
    } else {
        Err("CSV differs between runs".into())
    }
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: [Criterion; 11] = [
        ("sensitivity oracle", secs(5), sensitivity_oracle),
        ("infinity-norm LP oracle", secs(10), lp_oracle),
        ("controller convergence", secs(10), controller_convergence),
        ("pilot sweep", None, pilot_sweep),
        ("compression trend", None, cs_trend),
        ("OMP oracle", None, omp_oracle),
        ("morphology oracle", None, morphology_oracle),
        ("entropy invariants", None, entropy_invariants),
        ("fault discrimination", None, fault_discrimination),
        ("wire format", None, wire_format),
        ("determinism", None, determinism),
    ];
    let total = criteria.len();
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        match within(limit, start, check()) {
            Ok(msg) => println!("PASS {:>2} {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg}", i + 1);
            }
        }
    }
    println!("{} of {total} criteria passed", total - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
