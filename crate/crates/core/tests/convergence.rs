//! Refinement studies of the integrator on smooth data without vacuum.

use nsvac::grid::{make_grid, Grid};
use nsvac::profiles::{bump_velocity, density_power_law, DensityProfile, InitialData};
use nsvac::solver::{run_simulation, Solver, StepControl};
use nsvac::{PhysParams, SimState};

fn params() -> PhysParams {
    PhysParams::new(1.0, 1.0, 2.0 / 3.0, 1.0, 1.0).unwrap()
}

fn setup(cells: usize) -> (Grid, DensityProfile, InitialData) {
    let grid = make_grid(5.0, cells, 0.125).unwrap();
    let profile = density_power_law(1.0, 2.0, &grid).unwrap();
    let v0 = bump_velocity(0.3, 2.0, &grid).unwrap();
    let init = InitialData::from_entropy(&profile, &params(), 1.0, v0, vec![0.0; grid.len()]).unwrap();
    (grid, profile, init)
}

fn fixed(dt: f64) -> StepControl {
    StepControl {
        dt_init: dt,
        dt_max: dt,
        ..StepControl::default()
    }
}

fn run(cells: usize, dt: f64, horizon: f64) -> SimState {
    let (grid, profile, init) = setup(cells);
    let solver = Solver::new(params(), &profile, &grid, &init.theta0).unwrap();
    run_simulation(&solver, init.to_state(), &fixed(dt), horizon, &[], &mut [])
        .unwrap()
        .last()
        .clone()
}

/// Max-norm distance over `(J, v, theta)` after sampling `fine` at the nodes of `coarse`.
fn distance(coarse: &SimState, fine: &SimState) -> f64 {
    let stride = (fine.len() - 1) / (coarse.len() - 1);
    let pick = |f: &[f64], c: &[f64]| {
        c.iter()
            .enumerate()
            .map(|(i, x)| (x - f[i * stride]).abs())
            .fold(0.0, f64::max)
    };
    pick(&fine.j, &coarse.j)
        .max(pick(&fine.v, &coarse.v))
        .max(pick(&fine.theta, &coarse.theta))
}

#[test]
fn spatial_order_with_dt_proportional_to_h_squared() {
    let horizon = 0.1;
    let dt_of = |cells: usize| {
        let h = 10.0 / cells as f64;
        0.05 * h * h
    };
    let reference = run(512, dt_of(512), horizon);
    let e64 = distance(&run(64, dt_of(64), horizon), &reference);
    let e128 = distance(&run(128, dt_of(128), horizon), &reference);
    let order = (e64 / e128).log2();
    assert!(order >= 1.8, "errors {e64:e} {e128:e}, order {order}");
}

#[test]
fn step_doubling_is_first_order_in_time() {
    // at a fixed horizon, the gap between runs at dt and dt/2 halves with dt
    let horizon = 0.2;
    let gap = |dt: f64| distance(&run(128, dt, horizon), &run(128, 0.5 * dt, horizon));
    let (g1, g2) = (gap(4e-3), gap(2e-3));
    let ratio = g1 / g2;
    assert!((1.7..=2.3).contains(&ratio), "gaps {g1:e} {g2:e}, ratio {ratio}");
}
