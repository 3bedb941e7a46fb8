//! One short step against its first-order expansion: which pair leaks into
//! which triplet, and how the error shrinks with dt.

use dfs_zeno::bath::BathModel;
use dfs_zeno::linalg::C64;
use dfs_zeno::zeno::{first_order_check, ZenoConfig};

fn main() -> dfs_zeno::error::Result<()> {
    let mut config = ZenoConfig::desk_scale(C64::new(0.6, 0.0), C64::new(0.0, 0.8));
    config.spec.bath.model = BathModel::RandomHermitian;
    for dt in [2e-3, 1e-3, 5e-4] {
        let report = first_order_check(&config, dt)?;
        println!("dt = {dt:.0e}: residual {:.3e}", report.residual);
        for t in &report.terms {
            println!("  {:<16} analytic {:.4e}  exact {:.4e}", t.label, t.norm, t.exact_norm);
        }
    }
    Ok(())
}
