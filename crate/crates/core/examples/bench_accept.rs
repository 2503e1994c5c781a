use hypertree::kernels::{Backend, HypertreeSampler};
use hypertree::rng::child_seed;
use hypertree::Caps;
use std::time::Instant;

fn main() {
    let caps = Caps::default();
    // criterion 3 shape: dense kernel draws at (6,1)
    let s = HypertreeSampler::new(6, 1, 0, Backend::Kernel, &caps).unwrap();
    let t0 = Instant::now();
    let draws = 100_000u64;
    let mut total = 0u64;
    for seed in 0..draws {
        total += s.draw_ranks(child_seed(1, seed)).unwrap().len() as u64;
    }
    println!("dense (6,1): {draws} draws in {:.2}s ({total})", t0.elapsed().as_secs_f64());

    // criterion 7 shape: dense at (5,2,1)
    let s = HypertreeSampler::new(5, 2, 1, Backend::Kernel, &caps).unwrap();
    let t0 = Instant::now();
    let mut total = 0u64;
    for seed in 0..draws {
        total += s.draw_ranks(child_seed(2, seed)).unwrap().len() as u64;
    }
    println!("dense (5,2,1): {draws} draws in {:.2}s ({total})", t0.elapsed().as_secs_f64());

    // percolation at (5,2,1)
    let s = HypertreeSampler::new(5, 2, 1, Backend::Percolation, &caps).unwrap();
    let mut batch = s.batch();
    let t0 = Instant::now();
    let mut total = 0u64;
    for seed in 0..draws {
        total += batch.draw_ranks(child_seed(2, seed)).unwrap().len() as u64;
    }
    println!("factored (5,2,1): {draws} draws in {:.2}s ({total})", t0.elapsed().as_secs_f64());

    // criterion 2 enumeration
    let t0 = Instant::now();
    let c = hypertree::homology::census(6, 2, &caps).unwrap();
    println!("census (6,2): {} hypertrees of {} candidates in {:.1}s; sum|H|^2 = {}, weights sum to one: {}",
        c.hypertrees, c.candidates, t0.elapsed().as_secs_f64(), c.order_square_sum, num::One::is_one(&c.weight_sum));
}
