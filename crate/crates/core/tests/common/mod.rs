#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::OnceLock;

use qdtransfer::config::load_config;
use qdtransfer::protocol::{run, ProtocolRun};
use qdtransfer::{DeviceParams, ProtocolConfig};

pub fn config(name: &str) -> (DeviceParams, ProtocolConfig) {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name].iter().collect();
    load_config(&path).expect("bundled config")
}

pub fn weak() -> &'static ProtocolRun {
    static RUN: OnceLock<ProtocolRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let (p, c) = config("single-spin-50.conf");
        run(&p, &c).unwrap()
    })
}

pub fn st() -> &'static ProtocolRun {
    static RUN: OnceLock<ProtocolRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let (p, c) = config("singlet-triplet.conf");
        run(&p, &c).unwrap()
    })
}

/// Real symmetric eigenvalues from a dense solver, ascending.
pub fn dense_eigenvalues(m: nalgebra::DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = nalgebra::SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}
