//! Run the synthetic benchmark once: `cargo run --release --example bench -- <seed>`.
use emoface::bench::{run_benchmark, BenchConfig};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut cfg = BenchConfig::default();
    cfg.spec.seed = seed;
    let t = std::time::Instant::now();
    let r = run_benchmark(&cfg).expect("benchmark failed");
    println!("{}", serde_json::to_string_pretty(&r).unwrap());
    println!("elapsed {:.1}s", t.elapsed().as_secs_f64());
}
