//! Observables on the tower and on the torus, prime-orbit sums and the
//! discrepancy report.

mod pnt;
mod torus;
mod tower;

pub use pnt::{
    prime_orbit_sum, reparam_prime_report, torus_box_masses, tower_cell_masses, BoxGrid, PntRow, PntTable, ReparamRow,
};
pub use torus::TorusObservable;
pub use tower::TowerObservable;
