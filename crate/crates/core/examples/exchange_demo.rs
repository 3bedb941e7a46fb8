//! A qubit stored as a|01> + b|10> is swapped away by exchange; the
//! four-qubit code is not.

use dfs_zeno::linalg::C64;
use dfs_zeno::zeno::{demo_protected, demo_unprotected, time_grid};

fn main() -> dfs_zeno::error::Result<()> {
    let (a, b) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    let grid = time_grid(std::f64::consts::PI, 9);
    let bare = demo_unprotected(a, b, 1.0, &grid)?;
    let coded = demo_protected(a, b, 1.0, &grid)?;
    println!("{:>6} {:>12} {:>12}", "Jt", "two-qubit", "four-qubit");
    for (u, p) in bare.iter().zip(&coded) {
        println!("{:>6.3} {:>12.6} {:>12.6}", u.t, u.fidelity, p.fidelity);
    }
    Ok(())
}
