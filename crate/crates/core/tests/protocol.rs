mod common;

use qdtransfer::config::parse_config_with;
use qdtransfer::exec::Execution;
use qdtransfer::protocol::*;
use qdtransfer::{DeviceParams, Error, ProtocolConfig};

fn noiseless(p: &mut DeviceParams) {
    p.tau = 1e15;
    p.lever_arm = 0.0;
    p.b_of_rms = 0.0;
    p.b_of_rms_tilde = 0.0;
}

#[test]
fn loss_free_single_spin_keeps_only_lz() {
    let (mut p, c) = common::config("single-spin-50.conf");
    noiseless(&mut p);
    let r = run(&p, &c).unwrap();
    assert!(r.budget.p_deph == 0.0 && r.budget.p_rec.1 < 1e-12);
    assert!((r.budget.p_success - (1.0 - c.p_lz)).abs() < 1e-12);
}

#[test]
fn loss_free_singlet_triplet_keeps_lz_and_leakage() {
    let (mut p, c) = common::config("singlet-triplet.conf");
    noiseless(&mut p);
    let r = run(&p, &c).unwrap();
    let leak = r.budget.p_rabi_leak.unwrap();
    assert_eq!(r.budget.p_rabi_fail, Some(0.0));
    assert!((r.budget.p_success - (1.0 - c.p_lz - leak)).abs() < 1e-12);
}

#[test]
fn runs_are_bit_reproducible() {
    let (p, c) = common::config("singlet-triplet.conf");
    let a = run_with(&p, &c, RunOptions { exec: Execution::Sequential }).unwrap();
    let b = run_with(&p, &c, RunOptions { exec: Execution::Parallel }).unwrap();
    assert_eq!(a.budget, b.budget);
    assert_eq!(a.budget, common::st().budget);
    assert_eq!(a.rabi, b.rabi);
}

#[test]
fn impossible_tolerance_has_no_drive() {
    let (p, c) = common::config("singlet-triplet.conf");
    let c = ProtocolConfig { lambda_tolerance: 1e-12, ..c };
    assert!(matches!(run(&p, &c), Err(Error::NoDrive(_))));
}

#[test]
fn budget_rows_add_up() {
    for r in [common::weak(), common::st()] {
        let b = &r.budget;
        assert!((b.p_success + b.total_failure() - 1.0).abs() < 1e-15);
        assert!(b.p_rec.0 <= b.p_rec.1);
        assert_eq!(b.p_lz, r.config.p_lz);
        assert_eq!(b.rows().last().unwrap().0, "p_success");
    }
    assert!(common::weak().budget.p_rabi_leak.is_none());
}

#[test]
fn out_of_range_terms_are_rejected() {
    let parts = BudgetParts { p_lz: 0.01, p_rec: [0.1, 1.5], p_deph: 0.0, p_rabi_leak: None, p_rabi_fail: None };
    assert!(assemble_budget(parts).is_err());
}

#[test]
fn trajectory_spans_the_schedule() {
    let r = common::st();
    let traj = &r.trajectory;
    traj.validate().unwrap();
    let hold: f64 = r.rabi.as_ref().unwrap().pulse.duration;
    assert!((traj.duration() - (r.schedule.transfer_time() + hold)).abs() < 1e-9);
    assert_eq!(traj.nodes.first().unwrap().eps, r.eps_ep);
    assert_eq!(traj.nodes.last().unwrap().eps, r.config.final_detuning);
}

#[test]
fn single_spin_rejects_auto_excitation() {
    let err = parse_config_with("protocol = single-spin\neps_ep = auto\n", &[]).unwrap_err();
    assert!(err.to_string().contains("eps_ep") || err.to_string().contains("auto"), "{err}");
}

#[test]
fn stronger_tunnelling_shortens_the_transfer() {
    let (p, c) = common::config("single-spin-50.conf");
    let slow = common::weak().schedule.transfer_time();
    let fast = run(&DeviceParams { t_c: 2.0 * p.t_c, ..p }, &c).unwrap().schedule.transfer_time();
    assert!(fast < slow);
}
