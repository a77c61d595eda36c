//! Static quantities: ground states and the classical potential landscape.

use super::config::ContourConfig;
use crate::error::Result;
use crate::meanfield::{classical_hamiltonian, potential_grid, quench_initial_state, stationary_states};
use crate::model::{
    build_dicke_hamiltonian, build_observable, build_parity, build_rotated_hamiltonian, ModelParams, Observable,
    SparseMatrix,
};
use crate::propagator::QuantumState;
use crate::series::TimeSeries;
use crate::spectra::ground_state;

pub const GROUND_STATE_COLUMNS: [&str; 8] =
    ["rotated", "energy", "n_ph", "n_at", "parity", "degenerate", "mf_n_ph", "mf_n_at"];

/// Exact and mean-field ground states of the undriven (row 0) and
/// co-rotating (row 1) Hamiltonians.
pub fn ground_state_report(p: &ModelParams) -> Result<TimeSeries> {
    let parity = build_parity(p)?;
    let photons = build_observable(Observable::PhotonNumber, p)?;
    let spin_z = build_observable(Observable::Jz, p)?;
    let j = p.j();

    let undriven_mf = quench_initial_state(p, true)?.state;
    let rotated_mf = stationary_states(p)
        .into_iter()
        .min_by(|a, b| classical_hamiltonian(a, p).total_cmp(&classical_hamiltonian(b, p)))
        .expect("the origin is always stationary");

    let mut out = TimeSeries::new(&GROUND_STATE_COLUMNS);
    let cases: [(f64, SparseMatrix, _); 2] =
        [(0.0, build_dicke_hamiltonian(p)?, undriven_mf), (1.0, build_rotated_hamiltonian(p)?, rotated_mf)];
    for (flag, h, mf) in cases {
        let gs = ground_state(&h, Some(&parity))?;
        let psi = QuantumState::from_real(&gs.state);
        out.push(&[
            flag,
            gs.energy,
            photons.expectation(&psi.amplitudes).re / j,
            1.0 + spin_z.expectation(&psi.amplitudes).re / j,
            gs.sector.unwrap_or(f64::NAN),
            if gs.degenerate { 1.0 } else { 0.0 },
            mf.photon_density(),
            mf.atomic_inversion(),
        ]);
    }
    Ok(out)
}

/// Classical potential V(Q, q) at P = p = 0 in the co-rotating frame.
pub fn contours(p: &ModelParams, cfg: &ContourConfig) -> Result<TimeSeries> {
    potential_grid(p, cfg.spin_span, cfg.field_span, cfg.points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_states_approach_mean_field() {
        let p = ModelParams::resonant(1.2, 1.0, 40, 80).unwrap();
        let r = ground_state_report(&p).unwrap();
        assert_eq!(r.len(), 2);
        let (n, mf) = (r.column("n_ph").unwrap(), r.column("mf_n_ph").unwrap());
        for i in 0..2 {
            assert!((n[i] - mf[i]).abs() < 0.1 * mf[i], "row {i}: {} vs {}", n[i], mf[i]);
        }
        assert_eq!(r.column("rotated").unwrap(), &[0.0, 1.0]);
    }

    #[test]
    fn normal_phase_row() {
        let p = ModelParams::resonant(0.3, 1.0, 4, 20).unwrap();
        let r = ground_state_report(&p).unwrap();
        assert_eq!(r.column("mf_n_ph").unwrap(), &[0.0, 0.0]);
        assert!(r.column("n_ph").unwrap().iter().all(|&x| x < 0.05));
        assert_eq!(r.column("parity").unwrap()[0], 1.0);
    }

    #[test]
    fn contour_grid_shape() {
        let p = ModelParams::resonant(1.0, 1.0, 20, 40).unwrap();
        let c = contours(&p, &ContourConfig { spin_span: 1.5, field_span: 2.0, points: 11 }).unwrap();
        assert_eq!(c.len(), 121);
        assert_eq!(c.names(), ["Q", "q", "V"]);
    }
}
