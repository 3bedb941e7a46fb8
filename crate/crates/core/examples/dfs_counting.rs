//! How many equal-weight codewords n + 2 pairs offer against the 2^n needed.
//!
//! The central binomial coefficient grows like 2^n / sqrt(n), so n + 2 pairs
//! stop being enough at n = 7.

use dfs_zeno::codes::count_and_bounds;

fn main() -> dfs_zeno::error::Result<()> {
    println!("{:>3} {:>3} {:>8} {:>8} {:>10}", "n", "m*", "count", "2^n", "sufficient");
    for n in 1..=12 {
        let b = count_and_bounds(n)?;
        println!("{:>3} {:>3} {:>8} {:>8} {:>10}", n, b.m_star, b.count, 1u64 << n, b.sufficient);
    }
    Ok(())
}
