//! Encodes a qubit into two singlet/triplet pairs and shows that collective
//! exchange leaves it alone.

use dfs_zeno::codes::{encode_one_qubit, exchange_eigencheck, uniform_h_ex};
use dfs_zeno::linalg::{basis_label, C64};

fn main() -> dfs_zeno::error::Result<()> {
    let psi = encode_one_qubit(C64::new(0.6, 0.0), C64::new(0.0, 0.8))?;
    for (i, a) in psi.amplitudes().iter().enumerate() {
        if a.norm() > 1e-15 {
            println!("|{}>  {:+.4} {:+.4}i", basis_label(i, psi.factor_dims()), a.re, a.im);
        }
    }
    let check = exchange_eigencheck(&psi, &uniform_h_ex(2, 1.0)?)?;
    println!("H_EX eigenvalue {:.3e}, residual {:.1e}", check.eigenvalue, check.residual);
    Ok(())
}
