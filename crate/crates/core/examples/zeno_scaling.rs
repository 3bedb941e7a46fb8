//! Leakage out of the code under repeated parity tests, and its 1/N fit.

use dfs_zeno::linalg::C64;
use dfs_zeno::zeno::{fit_sweep, zeno_sweep, ZenoConfig};

fn main() -> dfs_zeno::error::Result<()> {
    let config = ZenoConfig::desk_scale(C64::new(0.6, 0.0), C64::new(0.8, 0.0));
    let rows = zeno_sweep(&config, &[8, 16, 32, 64, 128, 256, 512])?;
    println!("{:>5} {:>12} {:>12}", "N", "leakage", "N*leakage");
    for r in &rows {
        println!("{:>5} {:>12.4e} {:>12.5}", r.n, r.leakage, r.n as f64 * r.leakage);
    }
    let fit = fit_sweep(&rows)?;
    println!("slope {:.4}, r^2 {:.6}", fit.slope, fit.r_squared);
    Ok(())
}
