//! Every codeword of a codebook shares one exchange eigenvalue.

use dfs_zeno::codes::{build_codebook, exchange_eigencheck, uniform_h_ex};

fn main() -> dfs_zeno::error::Result<()> {
    let j = 1.0;
    for n in 1..=4 {
        let book = build_codebook(n)?;
        let h = uniform_h_ex(book.n_pairs, j)?;
        println!("n = {n}: {} pairs, weight {}", book.n_pairs, book.m_star);
        for (i, word) in book.codewords()?.iter().enumerate() {
            let check = exchange_eigencheck(&word.state, &h)?;
            println!(
                "  |{}>_L -> {}  E = {:+.3}  residual {:.1e}",
                book.logical_label(i),
                word.bitstring(),
                check.eigenvalue,
                check.residual
            );
        }
    }
    Ok(())
}
