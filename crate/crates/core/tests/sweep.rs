use proptest::prelude::*;

use qdtransfer::hamiltonians::{BasisState, HermitianMatrix};
use qdtransfer::params::HBAR;
use qdtransfer::spectra::{track_branches, DetuningFamily, TrackOptions};
use qdtransfer::sweep::*;
use qdtransfer::C64;

const LABELS: [BasisState; 2] = [BasisState::Level("L"), BasisState::Level("R")];

fn two_level(t: f64) -> DetuningFamily {
    let build = move |eps: f64| {
        let mut h = HermitianMatrix::zeros(LABELS.to_vec());
        h.set(0, 0, C64::new(0.5 * eps, 0.0));
        h.set(1, 1, C64::new(-0.5 * eps, 0.0));
        h.set(0, 1, C64::new(t, 0.0));
        h
    };
    DetuningFamily::new(build, HermitianMatrix::diagonal(LABELS.to_vec(), &[0.5, -0.5]))
}

fn grid(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step).round() as usize;
    (0..=n).map(|k| a + step * k as f64).collect()
}

#[test]
fn two_level_sum_matches_closed_form() {
    // ⟨+|σz/2|−⟩ = t/√(ε²+4t²), gap √(ε²+4t²).
    let t = 40.0;
    let g = grid(-400.0, 400.0, 5.0);
    let tr = track_branches(&two_level(t), &g, TrackOptions::default()).unwrap();
    for (i, e) in g.iter().enumerate() {
        let expect = HBAR * t / (e * e + 4.0 * t * t).powf(1.5);
        for b in 0..2 {
            let s = adiabaticity_sum(&tr, b, i, HBAR).unwrap();
            assert!((s / expect - 1.0).abs() < 1e-9, "{e}: {s} vs {expect}");
        }
    }
    let off = adiabaticity_sum_at(&tr, 0, 12.3, HBAR).unwrap();
    let expect = HBAR * t / (12.3f64.powi(2) + 4.0 * t * t).powf(1.5);
    assert!((off / expect - 1.0).abs() < 1e-9);
}

#[test]
fn schedule_uses_the_slowest_point() {
    let t = 40.0;
    let g = grid(-400.0, 400.0, 5.0);
    let tr = track_branches(&two_level(t), &g, TrackOptions::default()).unwrap();
    let s = plan_sweep(&tr, &[0], (-200.0, 300.0), 0.01, &[], HBAR).unwrap();
    let expect = inverse_speed_from_sum(HBAR / (8.0 * t * t), 0.01);
    assert!((1.0 / s.speed() / expect - 1.0).abs() < 1e-9);
    assert!(s.bottleneck.eps.abs() < 1e-9);
    assert!((s.transfer_time() - 500.0 * expect).abs() < 1e-9);
    let split = plan_sweep(&tr, &[0], (-200.0, 300.0), 0.01, &[100.0], HBAR).unwrap();
    assert_eq!(split.segments.len(), 2);
    assert!((split.transfer_time() - s.transfer_time()).abs() < 1e-9);
    assert!(plan_sweep(&tr, &[0], (-500.0, 0.0), 0.01, &[], HBAR).is_err());
}

#[test]
fn detuning_follows_segments_and_holds() {
    let s = SweepSchedule {
        segments: vec![
            SweepSegment { start: 0.0, end: 10.0, speed: 10.0 },
            SweepSegment { start: 10.0, end: 30.0, speed: 10.0 },
        ],
        events: vec![SweepEvent::Drive { eps: 10.0, duration: 0.5 }],
        bottleneck: Bottleneck { eps: 0.0, branch: 0, inverse_speed: 0.1 },
    };
    assert_eq!(s.detuning_at(0.5), 5.0);
    assert_eq!(s.detuning_at(1.2), 10.0);
    assert!((s.detuning_at(2.5) - 20.0).abs() < 1e-12);
    assert_eq!(s.detuning_at(10.0), 30.0);
    assert!((s.transfer_time() - 3.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn lz_gap_inverts(p in 1e-6f64..0.99, v in 1.0f64..1e5) {
        let gap = landau_zener_gap(p, v, HBAR);
        prop_assert!((landau_zener(gap, v, HBAR) / p - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lz_is_monotone(g in 1.0f64..300.0, v in 1.0f64..1e5, k in 1.01f64..10.0) {
        prop_assert!(landau_zener(g, v * k, HBAR) >= landau_zener(g, v, HBAR));
        prop_assert!(landau_zener(g * k, v, HBAR) <= landau_zener(g, v, HBAR));
    }

    #[test]
    fn inverse_speed_scales_with_log(sum in 1e-8f64..1e-2, p in 1e-4f64..0.5) {
        let a = inverse_speed_from_sum(sum, p);
        prop_assert!(a > 0.0);
        prop_assert!((inverse_speed_from_sum(2.0 * sum, p) / a - 2.0).abs() < 1e-12);
        prop_assert!((inverse_speed_from_sum(sum, p * p) / a - 2.0).abs() < 1e-9);
    }
}

#[test]
fn lz_edge_cases() {
    assert_eq!(landau_zener(0.0, 10.0, HBAR), 1.0);
    assert_eq!(landau_zener(5.0, 0.0, HBAR), 0.0);
}
