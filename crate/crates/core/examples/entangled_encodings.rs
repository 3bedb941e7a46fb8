//! Encoded W and GHZ states. The W state is an exchange eigenstate; the GHZ
//! components pick up a relative phase unless the bit pattern balances out.

use dfs_zeno::codes::{
    encode_w, exchange_eigencheck, ghz_phase, ghz_phase_numeric, uniform_h_ex, wrap_phase,
};
use dfs_zeno::linalg::C64;

fn main() -> dfs_zeno::error::Result<()> {
    for n in 3..=5 {
        let alphas = vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n];
        let check = exchange_eigencheck(&encode_w(&alphas)?, &uniform_h_ex(n, 1.0)?)?;
        println!("W, n = {n}: eigenvalue {:.6} (expected {})", check.eigenvalue, n - 2);
    }
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for bits in [[0u8, 0, 0, 0], [0, 1, 1, 0], [0, 0, 0, 1]] {
        let j = [1.0, 0.8, 1.2, 0.5];
        let formula = wrap_phase(ghz_phase(0.5, &j, &bits)?);
        let numeric = ghz_phase_numeric(h, h, 0.5, &j, &bits)?;
        println!("GHZ {bits:?}: phase {formula:+.6} (numeric {numeric:+.6})");
    }
    Ok(())
}
