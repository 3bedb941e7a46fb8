fn main() {
    std::process::exit(dfs_zeno::cli::run(std::env::args_os()));
}
