//! Cross-checks of the analytic formulas against brute-force propagation.

use std::path::Path;

use qdtransfer::hamiltonians::{exciton_h0_x, exciton_h0_z};
use qdtransfer::oracle::{landau_zener_numeric, propagate, uniform_grid};
use qdtransfer::rabi::{rabi_propagate, rwa_hamiltonian, RwaInputs};
use qdtransfer::spectra::eigendecompose;
use qdtransfer::sweep::{landau_zener, landau_zener_gap};
use qdtransfer::{CVector, DeviceParams, C64};

use crate::commands::CliResult;
use crate::manifest::RunManifest;

struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
}

fn checks() -> qdtransfer::Result<Vec<Check>> {
    let p = DeviceParams::default();
    let mut out = Vec::new();

    let z = eigendecompose(&exciton_h0_z(&p))?.values;
    let x = eigendecompose(&exciton_h0_x(&p))?.values;
    let d = z.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    out.push(Check { name: "exchange spectrum z vs x", value: d, limit: 1e-10 });

    let speed = 1000.0;
    let mut worst: f64 = 0.0;
    for target in [0.01, 0.05, 0.2, 0.5] {
        let gap = landau_zener_gap(target, speed, p.hbar);
        let num = landau_zener_numeric(gap, speed, p.hbar, 20.0, 4000)?;
        worst = worst.max((num / landau_zener(gap, speed, p.hbar) - 1.0).abs());
    }
    out.push(Check { name: "Landau-Zener relative error", value: worst, limit: 0.02 });

    let rwa = RwaInputs { omega_s_tp: 91.0, omega_t0_tp: 80.0, omega_d: 91.0, rabi_s_tp: 5.7, rabi_tp_t0: 1.3 };
    let h = rwa_hamiltonian(&rwa, p.hbar);
    let t = std::f64::consts::PI / rwa.rabi_s_tp;
    let (u, _) = rabi_propagate(&h, t, p.hbar)?;
    let psi0 = CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let r = propagate(|_| h.clone(), &psi0, &uniform_grid(0.0, t, 64), p.hbar)?;
    let d = (r.state - u.column(1)).norm();
    out.push(Check { name: "three-level propagator", value: d, limit: 1e-8 });
    Ok(out)
}

pub fn run(out: &Path) -> CliResult {
    let mut text = String::new();
    let mut ok = true;
    for c in checks()? {
        let pass = c.value <= c.limit;
        ok &= pass;
        text.push_str(&format!(
            "{} {}: {:.3e} (limit {:.1e})\n",
            if pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.limit
        ));
    }
    let mut manifest = RunManifest::new("validate", None, out);
    manifest.emit("validate.txt", text.as_bytes())?;
    manifest.write()?;
    print!("{text}");
    Ok(ok)
}
