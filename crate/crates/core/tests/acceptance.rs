//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its headline numbers. Statistical tolerances are pinned in the
//! asserts. Wall-clock budgets quoted at a worker count scale by the
//! available parallelism; the single-threaded budget applies as stated.

use std::collections::HashMap;
use std::time::Instant;

use num::{BigRational, One, Signed, Zero};

use hypertree::combinatorics::{binomial, colex_rank};
use hypertree::detproc::bernstein_bound;
use hypertree::f2::{
    coset_min_norm, expansion_constant, expansion_profile, index_face, meshulam_wallach_check,
    Convention,
};
use hypertree::homology::kalai_total;
use hypertree::kernels::{Backend, HypertreeKernel, HypertreeSampler};
use hypertree::lab::{self, Verdict};
use hypertree::rng::{child_seed, stream_rng};
use hypertree::simplicial::{Cochain, Complex, Face};
use hypertree::stats::{chi_square_gof, chi_square_two_sample};
use hypertree::Caps;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Budget stated "at `workers` workers", scaled to the pool we have.
fn scaled_budget_secs(stated: f64, workers: u64) -> f64 {
    let have = (rayon::current_num_threads() as u64).clamp(1, workers);
    stated * workers as f64 / have as f64
}

#[test]
fn criterion_01_exact_measure_n5() {
    let start = Instant::now();
    let caps = Caps::default();
    let report = lab::verify_measure(5, 2, &caps).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
    // The report checks: every minor equals |H|²/5³, the measure is
    // nonzero exactly on hypertrees (all 210 candidates classified),
    // weights sum to 1, Σ|H|² = 125.
    let stat = |name: &str| {
        report
            .statistics
            .iter()
            .find(|s| s.name == name)
            .unwrap_or_else(|| panic!("missing statistic {name}"))
            .value
            .clone()
    };
    assert_eq!(stat("candidates"), serde_json::json!(210));
    assert_eq!(stat("order_square_sum"), serde_json::json!("125"));
    assert_eq!(stat("weight_sum"), serde_json::json!("1/1"));
    assert_eq!(stat("minors_match"), serde_json::json!(true));
    assert_eq!(stat("nonzero_exactly_on_hypertrees"), serde_json::json!(true));
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "took {elapsed:.1}s, budget 30s");
    println!("[acceptance] criterion 1: PASS — n=5 d=2 measure exact over 210 candidates in {elapsed:.2}s");
}

#[test]
fn criterion_02_exact_measure_n6() {
    let start = Instant::now();
    let caps = Caps::default();
    let report = lab::verify_measure(6, 2, &caps).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
    let stat = |name: &str| {
        report
            .statistics
            .iter()
            .find(|s| s.name == name)
            .unwrap()
            .value
            .clone()
    };
    assert_eq!(stat("candidates"), serde_json::json!(184_756));
    assert_eq!(stat("weight_sum"), serde_json::json!("1/1"));
    assert_eq!(
        stat("order_square_sum"),
        serde_json::json!(kalai_total(6, 2).to_string())
    );
    let elapsed = start.elapsed().as_secs_f64();
    // Budget: 15 min single-threaded, 4 min at 8 workers.
    let budget = if rayon::current_num_threads() <= 1 {
        900.0
    } else {
        scaled_budget_secs(240.0, 8)
    };
    assert!(elapsed < budget, "took {elapsed:.1}s, budget {budget:.0}s");
    println!(
        "[acceptance] criterion 2: PASS — n=6 d=2: Σ weights = 1, Σ|H|² = 6⁶ over 184756 candidates in {elapsed:.1}s"
    );
}

#[test]
fn criterion_03_uniform_trees_kernel_backend() {
    let caps = Caps::default();
    let sampler = HypertreeSampler::new(6, 1, 0, Backend::Kernel, &caps).unwrap();
    let draws = 1_000_000u64;
    let seed = 601;
    let mut counts: HashMap<Vec<u64>, u64> = HashMap::new();
    for i in 0..draws {
        let ranks = sampler.draw_ranks(child_seed(seed, i)).unwrap();
        *counts.entry(ranks).or_insert(0) += 1;
    }
    // 6⁴ = 1296 spanning trees, uniform.
    assert_eq!(counts.len(), 1296, "draws missed some trees");
    for ranks in counts.keys() {
        let t = Complex::from_ranks(6, 1, ranks).unwrap();
        assert!(hypertree::homology::is_hypertree(&t));
    }
    let observed: Vec<u64> = {
        let mut keys: Vec<_> = counts.keys().cloned().collect();
        keys.sort();
        keys.iter().map(|k| counts[k]).collect()
    };
    let probs = vec![1.0 / 1296.0; 1296];
    let (stat, df, p) = chi_square_gof(&observed, &probs, draws).unwrap();
    assert!(p > 0.001, "chi2 {stat:.1} at df {df}, p = {p}");
    println!(
        "[acceptance] criterion 3: PASS — 10⁶ kernel-backend draws over 1296 trees, chi² p = {p:.3}"
    );
}

#[test]
fn criterion_04_fixed_size_and_purity() {
    let caps = Caps::default();
    for (n, d) in [(20u32, 2usize), (30, 2), (15, 3)] {
        let sampler = HypertreeSampler::new(n, d, 0, Backend::Percolation, &caps).unwrap();
        let expected = binomial(n as u64 - 1, d as u64) as usize;
        let draws = 100_000u64;
        let seed = 4000 + n as u64;
        let violations = parallel_fold(draws, |i| {
            let mut batch = sampler.batch();
            move |acc: &mut u64, idx: u64| {
                let _ = i;
                let ranks = batch.draw_ranks(child_seed(seed, idx)).unwrap();
                let k = Complex::from_ranks(n, d, &ranks).unwrap();
                if ranks.len() != expected || !k.is_pure() {
                    *acc += 1;
                }
            }
        });
        assert_eq!(violations, 0, "(n={n}, d={d}): {violations} violations");
        println!(
            "[acceptance] criterion 4: PASS — (n={n},d={d}): 10⁵ draws, |T| = C(n-1,d) = {expected} and pure in all"
        );
    }
}

#[test]
fn criterion_05_marginals() {
    let caps = Caps::default();
    for (n, d, ell) in [(10u32, 2usize, 0u32), (12, 2, 3)] {
        let report = lab::verify_marginals(n, d, ell, 100_000, 500 + n as u64, &caps).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
        println!(
            "[acceptance] criterion 5: PASS — marginals at (n={n},d={d},l={ell}) within 4 SE of (d+1+l)/(n+l)"
        );
    }
}

#[test]
fn criterion_06_count_law() {
    let caps = Caps::default();
    let (n, d) = (8u32, 2usize);
    let m = binomial(n as u64, d as u64 + 1);
    use rand::seq::index::sample as index_sample;
    use rand::Rng;
    for trial in 0..10u64 {
        let mut rng = stream_rng(606, trial);
        let size = rng.random_range(2..=10usize);
        let subset: Vec<Face> = index_sample(&mut rng, m as usize, size)
            .into_iter()
            .map(|r| Face::from_rank(r as u64, d))
            .collect();
        let report =
            lab::verify_count_law(n, d, 0, &subset, 100_000, child_seed(606, trial), &caps)
                .unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "trial {trial}: {report:?}");
    }
    println!(
        "[acceptance] criterion 6: PASS — |T∩A| matches the Poisson binomial of eig(Q_A) for 10 random A at (8,2)"
    );
}

#[test]
fn criterion_07_backend_equivalence() {
    let caps = Caps::default();
    let (n, d, ell) = (5u32, 2usize, 1u32);
    let draws = 1_000_000u64;
    let cells = 1usize << binomial(n as u64, d as u64 + 1); // 1024 outcomes

    let count_outcomes = |backend: Backend, seed: u64| -> Vec<u64> {
        let sampler = HypertreeSampler::new(n, d, ell, backend, &caps).unwrap();
        let mut counts = vec![0u64; cells];
        let mut batch = sampler.batch();
        for i in 0..draws {
            let ranks = batch.draw_ranks(child_seed(seed, i)).unwrap();
            let mask: usize = ranks.iter().map(|&r| 1usize << r).sum();
            counts[mask] += 1;
        }
        counts
    };
    let kernel_counts = count_outcomes(Backend::Kernel, 707);
    let perc_counts = count_outcomes(Backend::Percolation, 708);
    let (stat, df, p) = chi_square_two_sample(&kernel_counts, &perc_counts).unwrap();
    assert!(p > 0.001, "chi2 {stat:.1} at df {df}, p = {p}");
    println!(
        "[acceptance] criterion 7: PASS — kernel vs percolation at (5,2,1), 10⁶ draws each, two-sample chi² p = {p:.3}"
    );
}

#[test]
fn criterion_08_link_law() {
    let caps = Caps::default();
    let sigma = Face::new(vec![6]).unwrap();
    let report = lab::verify_links(6, 2, 0, &sigma, 1_000_000, 808, &caps).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
    let p = report.p_value.unwrap();
    assert!(p > 0.001);
    println!(
        "[acceptance] criterion 8: PASS — link of T(6,2) at {{6}} vs direct T(5,1,1), 10⁶ draws each, p = {p:.3}"
    );
}

#[test]
fn criterion_09_hadamard_and_union_bounds() {
    let caps = Caps::default();
    // Exact Hadamard minors: zero violations over 10⁴ random minors.
    use rand::seq::index::sample as index_sample;
    use rand::Rng;
    let mut violations = 0u64;
    for (half, ell) in [(0u64, 0u32), (1, 3)] {
        let kernel = HypertreeKernel::new(10, 2, ell).unwrap();
        let exact = kernel.to_exact(&caps).unwrap();
        let m = exact.ground_size();
        let mut rng = stream_rng(909, half);
        for _ in 0..5000 {
            let size = rng.random_range(1..=6usize);
            let a = index_sample(&mut rng, m, size).into_vec();
            if !exact.hadamard_holds(&a) {
                violations += 1;
            }
        }
    }
    assert_eq!(violations, 0);

    // Union bound at (n,d,k) = (10,2,3) over 50 random sets.
    let report = lab::verify_union_bound(10, 2, 0, 3, 100_000, 910, &caps).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
    println!(
        "[acceptance] criterion 9: PASS — 10⁴ exact Hadamard minors, zero violations; union bound held on 50 sets at (10,2,3)"
    );
}

#[test]
fn criterion_10_meshulam_wallach() {
    let start = Instant::now();
    let caps = Caps::default();
    let mut checked = 0;
    for n in 4..=6u32 {
        for i in 0..=1usize {
            if i + 2 >= n as usize {
                continue; // bound needs i+1 below the top dimension
            }
            assert!(
                meshulam_wallach_check(n, i, &caps).unwrap(),
                "failed at n={n}, i={i}"
            );
            checked += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "took {elapsed:.1}s, budget 300s");
    println!(
        "[acceptance] criterion 10: PASS — |δA| ≥ |A|n/(i+2) for every minimal A, {checked} (n,i) pairs, n ≤ 6, in {elapsed:.1}s"
    );
}

/// All-cochain brute force over the minimal-cochain definition; the
/// library computes the same minimum per coset.
fn brute_force_profile(k: &Complex, convention: Convention, caps: &Caps) -> Vec<Option<BigRational>> {
    (0..k.dim())
        .map(|i| {
            let dim = k.universe_size(i) as usize;
            let mut best: Option<BigRational> = None;
            for mask in 1u64..(1 << dim) {
                let support: Vec<Face> = (0..dim)
                    .filter(|j| mask >> j & 1 == 1)
                    .map(|j| index_face(k, i, j))
                    .collect();
                let f = Cochain::new(i, support).unwrap();
                let summary = coset_min_norm(k, &f, convention, caps).unwrap();
                if summary.coset_norm.is_zero() {
                    continue;
                }
                if k.norm(&f).unwrap() != summary.coset_norm {
                    continue;
                }
                let r = summary.delta_norm / summary.coset_norm;
                if best.as_ref().is_none_or(|b| r < *b) {
                    best = Some(r);
                }
            }
            best
        })
        .collect()
}

#[test]
fn criterion_11_expansion_oracle_agreement() {
    let caps = Caps::default();
    // Pinned value: 𝔥₀ of the complete graph on 4 vertices is 4/3.
    let k4 = Complex::new(
        4,
        1,
        (1..=4u32)
            .flat_map(|v| (1..v).map(move |u| Face::new(vec![u, v]).unwrap()))
            .collect(),
    )
    .unwrap();
    let h0 = expansion_constant(&k4, 0, Convention::Reduced, &caps)
        .unwrap()
        .unwrap();
    assert_eq!(h0, ratio(4, 3));

    // 20 random complexes at n ≤ 7: exact agreement with brute force.
    use rand::Rng;
    let shapes = [(5u32, 1usize), (6, 1), (7, 1), (5, 2), (6, 2)];
    let mut done = 0;
    let mut trial = 0u64;
    while done < 20 {
        let (n, d) = shapes[trial as usize % shapes.len()];
        let mut rng = stream_rng(1111, trial);
        trial += 1;
        let density = rng.random_range(0.4..0.9);
        let faces: Vec<Face> = hypertree::combinatorics::all_subsets(n, d + 1)
            .into_iter()
            .filter(|_| rng.random::<f64>() < density)
            .map(|s| Face::new(s.into_iter().map(|v| v + 1).collect()).unwrap())
            .collect();
        if faces.is_empty() {
            continue;
        }
        let k = Complex::new(n, d, faces).unwrap();
        let fast = expansion_profile(&k, Convention::Reduced, &caps).unwrap();
        let slow = brute_force_profile(&k, Convention::Reduced, &caps);
        assert_eq!(fast, slow, "disagreement on (n={n}, d={d}) trial {trial}");
        done += 1;
    }
    println!(
        "[acceptance] criterion 11: PASS — 𝔥₀(K₄) = 4/3; coset enumeration matches brute force exactly on 20 random complexes"
    );
}

#[test]
fn criterion_12_trend_proxy() {
    let start = Instant::now();
    let caps = Caps::default();
    let report = lab::theorem_trend(2, 40, &[20, 40, 60], 200, 1212, &caps).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
    let fraction_at = |n: u32| -> f64 {
        report
            .statistics
            .iter()
            .find(|s| s.name == format!("n_{n}_vanishing_fraction"))
            .unwrap()
            .value
            .as_f64()
            .unwrap()
    };
    // Nondecreasing within 2 SE is the report's verdict; the endpoint
    // must also clear 0.9.
    let f60 = fraction_at(60);
    assert!(f60 > 0.9, "vanishing fraction at n=60 is {f60}");

    // Exact 𝔥(K_{7,2,40}) > 0 in all 50 draws.
    let sampler = HypertreeSampler::new(7, 2, 0, Backend::Percolation, &caps).unwrap();
    for i in 0..50u64 {
        let (union, _) = sampler.draw_union(40, child_seed(1213, i)).unwrap();
        let profile = expansion_profile(&union, Convention::Reduced, &caps).unwrap();
        for (idx, h) in profile.iter().enumerate() {
            let h = h.as_ref().expect("nontrivial cochain space");
            assert!(
                h.is_positive(),
                "draw {i}: 𝔥_{idx} = {h} not positive"
            );
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let budget = scaled_budget_secs(1800.0, 8);
    assert!(elapsed < budget, "took {elapsed:.0}s, budget {budget:.0}s");
    println!(
        "[acceptance] criterion 12: PASS — vanishing fraction nondecreasing, {f60:.3} at n=60; exact 𝔥 > 0 in 50/50 draws at n=7; {elapsed:.0}s"
    );
}

#[test]
fn criterion_13_bernstein_tails() {
    let caps = Caps::default();
    let report = lab::verify_bernstein(20, 2, 0, 200, 100_000, 1313, &caps).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
    // Spell the bound out at ε = 1: mean = 200·3/20 = 30.
    let b = bernstein_bound(30.0, 1.0).unwrap();
    assert!((b - 2.0 * (-7.5f64).exp()).abs() < 1e-12);
    println!(
        "[acceptance] criterion 13: PASS — tail frequencies at ε ∈ {{0.25, 0.5, 1}} under 2exp(−ε²·30/4) + 4 SE over 10⁵ draws at (20,2)"
    );
}

/// Chunked fold over draws with per-draw child seeds; deterministic
/// regardless of scheduling since chunks sum commutatively into a count.
fn parallel_fold<F, G>(draws: u64, make: F) -> u64
where
    F: Fn(u64) -> G + Sync,
    G: FnMut(&mut u64, u64),
{
    use rayon::prelude::*;
    let workers = rayon::current_num_threads().max(1) as u64;
    let chunk = draws.div_ceil(workers * 4).max(1);
    let starts: Vec<u64> = (0..draws).step_by(chunk as usize).collect();
    starts
        .par_iter()
        .map(|&start| {
            let mut acc = 0u64;
            let mut f = make(start);
            for idx in start..(start + chunk).min(draws) {
                f(&mut acc, idx);
            }
            acc
        })
        .sum()
}

#[test]
fn extra_invariant_identities() {
    // Cheap cross-module identities that anchor the suite: the
    // double-counting identity, overlap partition, and Kalai spot
    // checks beyond the two big criteria.
    let caps = Caps::default();
    for (n, d) in [(6u32, 1usize), (5, 3)] {
        let c = hypertree::homology::census(n, d, &caps).unwrap();
        assert!(c.weight_sum.is_one());
        assert_eq!(c.order_square_sum, kalai_total(n, d));
    }
    // Colex sanity over a bigger face: rank/unrank round trip.
    let f = Face::new(vec![3, 8, 11, 17]).unwrap();
    assert_eq!(Face::from_rank(f.rank(), 3), f);
    assert_eq!(colex_rank(&[0, 1]), 0);
}
