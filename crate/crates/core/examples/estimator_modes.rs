//! The same protocol through the three estimators.

use dfs_zeno::linalg::C64;
use dfs_zeno::zeno::{Mode, Protocol, ZenoConfig};

fn main() -> dfs_zeno::error::Result<()> {
    let mut config = ZenoConfig::desk_scale(C64::new(0.6, 0.0), C64::new(0.0, 0.8));
    config.spec.lambda_plus = vec![C64::new(0.5, 0.0); 2];
    let protocol = Protocol::compile(&config)?;
    let modes = [Mode::PostSelect, Mode::Trajectories { count: 1000, seed: 7 }, Mode::Ensemble];
    for mode in modes {
        let r = protocol.run(8, 1.0, mode)?;
        let se = r.success_std_err.map_or(String::new(), |s| format!(" +- {s:.4}"));
        println!(
            "{:<13} success {:.4}{se:<10} fidelity {:.6}  code population {:.4}",
            r.mode, r.success_probability, r.final_fidelity, r.code_population
        );
    }
    Ok(())
}
