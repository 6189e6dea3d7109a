//! Times the dense eigensolver on the adjacency matrix of a random 3-regular graph.
//!
//! `cargo run --release -p qergo-core --example eigen_bench -- 4000 [values-only]`

use qergo_core::generators::random_regular;
use qergo_core::linalg::symmetric_eigen;
use std::time::Instant;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(1000);
    let vectors = args.next().is_none();
    let g = random_regular(n, 3, 1).expect("generator");
    let t = Instant::now();
    let es = symmetric_eigen(g.hamiltonian_dense(), n, vectors).expect("eigensolver");
    println!(
        "n = {n}, vectors = {vectors}, time = {:.2?}, top eigenvalue = {:.12}",
        t.elapsed(),
        es.values[n - 1]
    );
}
