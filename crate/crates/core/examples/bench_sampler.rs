use hypertree::kernels::{Backend, HypertreeSampler};
use hypertree::Caps;
use std::time::Instant;

fn main() {
    let caps = Caps::default();
    for (n, d, draws) in [(20u32, 2usize, 50u64), (30, 2, 20), (40, 2, 10), (60, 2, 5), (15, 3, 20)] {
        let s = HypertreeSampler::new(n, d, 0, Backend::Percolation, &caps).unwrap();
        let mut batch = s.batch();
        let t0 = Instant::now();
        let mut total = 0u64;
        for seed in 0..draws {
            total += batch.draw_ranks(seed).unwrap().len() as u64;
        }
        let dt = t0.elapsed().as_secs_f64();
        println!("(n={n}, d={d}): {draws} draws in {dt:.2}s = {:.3}s/draw (sizes ok: {})", dt / draws as f64, total == draws * hypertree::combinatorics::binomial(n as u64 - 1, d as u64));
    }
}
