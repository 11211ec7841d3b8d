mod common;

use gridsvc_core::cs::{dct_inverse, omp, snr_db, Codec, CodecConfig, CompressedFrame};
use gridsvc_core::telemetry::{correlated_telemetry, deserialize, frame_len, serialize, ChannelModel};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, rows * cols).prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn frame() -> impl Strategy<Value = CompressedFrame> {
    (1usize..64)
        .prop_flat_map(|n| (Just(n), 1..=n))
        .prop_flat_map(|(n, m)| {
            (
                Just(n),
                prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), m),
                any::<u64>(),
                any::<u64>(),
                any::<u16>(),
            )
        })
        .prop_map(|(n, y, seed, ts, area)| CompressedFrame {
            config: CodecConfig::new(n, y.len(), seed).unwrap(),
            y: DVector::from_vec(y),
            timestamp_micros: ts,
            area_id: area,
        })
}

proptest! {
    #[test]
    fn omp_residual_never_grows(
        (a, y) in (2usize..10, 2usize..16).prop_flat_map(|(m, n)| (matrix(m, n), prop::collection::vec(-1.0f64..1.0, m))),
    ) {
        let s = omp(&a, &DVector::from_vec(y), a.nrows(), 0.0);
        for w in s.residual_norms.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        prop_assert!(s.theta.iter().enumerate().all(|(j, v)| *v == 0.0 || s.support.contains(&j)));
    }

    #[test]
    fn two_sparse_omp_meets_exhaustive_search(
        (a, picks) in (3usize..=12).prop_flat_map(|n| (2usize..=n).prop_flat_map(move |m| {
            (matrix(m, n), prop::collection::vec((0..n, 0.5f64..2.0), 1..=2))
        })),
    ) {
        let mut x = DVector::zeros(a.ncols());
        for (j, v) in &picks {
            x[*j] = *v;
        }
        let y = &a * x;
        let oracle = common::exhaustive_l0(&a, &y, picks.len());
        prop_assume!(oracle < 1e-9);
        let s = omp(&a, &y, a.nrows(), 1e-12);
        prop_assert!(s.residual_norm() <= oracle + 1e-6);
    }

    #[test]
    fn decoding_is_deterministic(seed in any::<u64>(), n in 4usize..40) {
        let cfg = CodecConfig::new(n, n / 2, seed).unwrap();
        let codec = Codec::new(cfg);
        let f = codec.encode(&correlated_telemetry(n, seed)).unwrap();
        prop_assert_eq!(codec.recover(&f).unwrap(), Codec::new(cfg).recover(&f).unwrap());
    }

    #[test]
    fn wire_round_trip(f in frame()) {
        let bytes = serialize(&f);
        prop_assert_eq!(bytes.len(), frame_len(f.y.len()));
        prop_assert_eq!(deserialize(&bytes).unwrap(), f);
    }

    #[test]
    fn single_byte_corruption_detected(f in frame(), at in any::<prop::sample::Index>(), flip in 1u8..=255) {
        let mut bytes = serialize(&f);
        let i = at.index(bytes.len());
        bytes[i] ^= flip;
        prop_assert!(deserialize(&bytes).is_err());
    }

    #[test]
    fn delay_falls_with_compression(m in 1usize..200, bw in 1e3f64..1e8) {
        let ch = ChannelModel { bandwidth_bps: bw, ..ChannelModel::default() };
        prop_assert!(ch.delay_s(frame_len(m)) < ch.delay_s(frame_len(m + 1)));
    }
}

#[test]
fn one_sparse_dct_signals_recover_exactly() {
    let mut exact = 0;
    for seed in 0..100u64 {
        let codec = Codec::new(CodecConfig::new(32, 8, seed).unwrap());
        let mut theta = DVector::zeros(32);
        theta[(seed * 7 % 32) as usize] = 0.3 + (seed % 5) as f64 * 0.4;
        let s = codec.decode(&codec.encode(&dct_inverse(&theta)).unwrap()).unwrap();
        if (s.theta - theta).amax() < 1e-8 {
            exact += 1;
        }
    }
    assert!(exact >= 95, "{exact}/100");
}

#[test]
fn full_measurement_is_exact() {
    for seed in 0..20 {
        let x = correlated_telemetry(30, seed);
        let codec = Codec::new(CodecConfig::new(30, 30, seed).unwrap());
        assert_eq!(snr_db(&x, &codec.recover(&codec.encode(&x).unwrap()).unwrap()).unwrap(), f64::INFINITY);
    }
}

#[test]
fn three_measurement_frame_is_59_bytes() {
    let f = CompressedFrame {
        y: DVector::from_vec(vec![1.0, 2.0, 3.0]),
        config: CodecConfig::new(6, 3, 9).unwrap(),
        timestamp_micros: 1,
        area_id: 2,
    };
    assert_eq!(serialize(&f).len(), 59);
}
