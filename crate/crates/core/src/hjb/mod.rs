//! Explicit monotone finite-difference sweeps for the coupled risk-averse
//! HJB system of a leader and a follower.
//!
//! Both value fields are swept backward together. At each node the follower
//! best response `S(v)` is computed for every leader control, the leader
//! picks `v*` against it, and each field is advanced with its own Hamiltonian
//! at `(v*, S(v*))`. Argmins break ties toward the first control index.

mod grid;
mod scheme;
mod sweep;

pub use grid::{counts_for_spacing, LatticeGrid, Stability};
pub use scheme::{apply_operator, follower_hamiltonian, leader_step, Choice, LeaderStep, Stencil, TIE_RTOL};
pub use sweep::{
    backward_sweep_follower, backward_sweep_hierarchical, cross_validate, dpp_residual, CrossValidation, DppMode,
    HierarchicalSolution, LeaderPlay, PolicyField, SliceStats, SweepReport, ValueField, CROSSVAL_MARGIN,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{build_problem, catalog, ControlSetConfig, FunctionPreset, Player};
    use alloc::vec;
    use alloc::vec::Vec;

    fn node_values(grid: &LatticeGrid, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut x = [0.0];
        (0..grid.n_nodes())
            .map(|n| {
                grid.coords(n, &mut x);
                f(x[0])
            })
            .collect()
    }

    #[test]
    fn operator_on_simple_slices() {
        let spec = build_problem(&catalog::decoupled()).unwrap();
        let grid = LatticeGrid::new(&spec, &[9], 200).unwrap();
        let constant = vec![3.0; 9];
        assert_eq!(apply_operator(&grid, &constant, 4, &spec, 0.0, &[1.0], &[-1.0]), 0.0);
        let linear = node_values(&grid, |x| x);
        let op = apply_operator(&grid, &linear, 4, &spec, 0.0, &[1.0], &[0.5]);
        assert!((op - 1.5).abs() < 1e-14);

        let heat = build_problem(&catalog::heat(1.0)).unwrap();
        let grid = LatticeGrid::with_stable_steps(&heat, &[13]).unwrap();
        let square = node_values(&grid, |x| x * x);
        assert!((apply_operator(&grid, &square, 6, &heat, 0.0, &[0.0], &[0.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn follower_minimizes_w_squared() {
        let spec = build_problem(&catalog::decoupled()).unwrap();
        let grid = LatticeGrid::new(&spec, &[9], 200).unwrap();
        let zero = vec![0.0; 9];
        let c = follower_hamiltonian(&grid, &zero, 4, &spec, 0.0, &[0.0]);
        assert_eq!((c.value, c.index), (0.0, 1));
    }

    #[test]
    fn follower_three_point_arithmetic() {
        // drift term w * 1.5 from a slice with slope 1.5, v = 0
        let spec = build_problem(&catalog::decoupled()).unwrap();
        let grid = LatticeGrid::new(&spec, &[9], 200).unwrap();
        let slope = node_values(&grid, |x| 1.5 * x);
        let c = follower_hamiltonian(&grid, &slope, 4, &spec, 0.0, &[0.0]);
        assert!((c.value + 0.5).abs() < 1e-14);
        assert_eq!(c.index, 0);
    }

    #[test]
    fn decoupled_leader_step() {
        let spec = build_problem(&catalog::decoupled()).unwrap();
        let grid = LatticeGrid::new(&spec, &[9], 200).unwrap();
        let zero = vec![0.0; 9];
        let s = leader_step(&grid, &zero, &zero, 3, &spec, 0.0);
        assert_eq!((s.v_index, s.w_index, s.h1, s.h2), (1, 1, 0.0, 0.0));
    }

    #[test]
    fn singleton_controls_evaluate_directly() {
        let mut cfg = catalog::decoupled();
        cfg.leader_controls = ControlSetConfig::singleton(&[0.5]);
        cfg.follower_controls = ControlSetConfig::singleton(&[-0.25]);
        let spec = build_problem(&cfg).unwrap();
        let grid = LatticeGrid::new(&spec, &[9], 200).unwrap();
        let phi = node_values(&grid, |x| x * x);
        let s = leader_step(&grid, &phi, &phi, 5, &spec, 0.0);
        let op = apply_operator(&grid, &phi, 5, &spec, 0.0, &[0.5], &[-0.25]);
        assert_eq!(s.h1, 0.25 + op);
        assert_eq!(s.h2, 0.0625 + op);
    }

    #[test]
    fn pure_time_integration() {
        let mut cfg = catalog::zero_cost(1);
        cfg.follower_cost = FunctionPreset::constant_cost(1.0);
        cfg.diffusion = FunctionPreset::scaled_identity_diffusion(1, 0.0);
        let spec = build_problem(&cfg).unwrap();
        let grid = LatticeGrid::new(&spec, &[5], 8).unwrap();
        let (field, _) = backward_sweep_follower(&spec, &grid, LeaderPlay::Constant(0)).unwrap();
        for k in 0..=8 {
            assert!(field.slice(k).iter().all(|v| *v == 1.0 - k as f64 / 8.0));
        }
    }

    #[test]
    fn zero_problem_stays_zero() {
        let spec = build_problem(&catalog::zero_cost(2)).unwrap();
        let grid = LatticeGrid::with_stable_steps(&spec, &[5, 5]).unwrap();
        let sol = backward_sweep_hierarchical(&spec, &grid).unwrap();
        assert!(sol
            .leader
            .values()
            .iter()
            .chain(sol.follower.values())
            .all(|v| *v == 0.0));
    }

    #[test]
    fn decoupled_policies_are_zero() {
        let spec = build_problem(&catalog::decoupled()).unwrap();
        let grid = LatticeGrid::with_stable_steps(&spec, &[21]).unwrap();
        let sol = backward_sweep_hierarchical(&spec, &grid).unwrap();
        assert!(sol.policy.leader_indices().iter().all(|i| *i == 1));
        assert!(sol.policy.follower_indices().iter().all(|i| *i == 1));
        assert!(sol.leader.values().iter().all(|v| *v == 0.0));
        assert_eq!(sol.report.leader_ties, 0);
    }

    #[test]
    fn same_step_dpp_is_exact() {
        let spec = build_problem(&catalog::lq_decoupled(0.2)).unwrap();
        let grid = LatticeGrid::with_stable_steps(&spec, &[21]).unwrap();
        let sol = backward_sweep_hierarchical(&spec, &grid).unwrap();
        for r in [1, grid.n_t() / 2, grid.n_t()] {
            for p in Player::BOTH {
                assert_eq!(dpp_residual(&spec, &sol, p, r, DppMode::SameStep).unwrap(), 0.0);
            }
        }
        assert!(dpp_residual(&spec, &sol, Player::Leader, 0, DppMode::SameStep).is_err());
    }

    #[test]
    fn sweep_rejects_unstable_grid() {
        let spec = build_problem(&catalog::heat(1.0)).unwrap();
        let grid = LatticeGrid::with_stable_steps(&spec, &[7]).unwrap();
        let finer = build_problem(&catalog::heat(3.0)).unwrap();
        assert!(matches!(
            backward_sweep_hierarchical(&finer, &grid),
            Err(crate::Error::Cfl { .. })
        ));
    }
}
