//! Random tensor-contraction generation and effective matrix lengths,
//! following the benchmark methodology: each matrix dimension becomes one to
//! three tensor dimensions whose product lands close to the original length,
//! and each tensor's dimension order is independently permuted.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::spec::ContractionSpec;

/// Relative slack allowed between a bundle's length product and its target
/// matrix dimension.
pub const PRODUCT_SLACK: f64 = 0.25;

fn split_dimension(target: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if target <= 1 {
        return vec![1];
    }
    let r = rng.random_range(1..=3usize);
    let lo = (target as f64 * (1.0 - PRODUCT_SLACK)).ceil() as usize;
    let hi = (target as f64 * (1.0 + PRODUCT_SLACK)).floor() as usize;
    for _ in 0..64 {
        let root = (target as f64).powf(1.0 / r as f64);
        let mut lens = Vec::with_capacity(r);
        let mut prod = 1usize;
        for _ in 0..r - 1 {
            let l = ((root * rng.random_range(0.72..1.38)).round() as usize).max(1);
            lens.push(l);
            prod *= l;
        }
        let last = ((target as f64 / prod as f64).round() as usize).max(1);
        lens.push(last);
        let total = prod * last;
        if total >= lo.max(1) && total <= hi.max(1) {
            lens.shuffle(rng);
            return lens;
        }
    }
    // exact split as fallback: product == target is always within the slack
    let mut lens = vec![target];
    lens.resize(r, 1);
    lens.shuffle(rng);
    lens
}

/// A random contraction whose I/J/P bundle length products are within
/// `PRODUCT_SLACK` of `m`, `n`, `k` respectively. Reproducible from the RNG
/// state; each tensor's label order is an independent random permutation.
pub fn random_contraction(
    m: usize,
    n: usize,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> (ContractionSpec, BTreeMap<char, usize>) {
    let i_lens = split_dimension(m, rng);
    let j_lens = split_dimension(n, rng);
    let p_lens = split_dimension(k, rng);

    let mut lengths = BTreeMap::new();
    let mut next = 'a';
    let mut take = |lens: &[usize], lengths: &mut BTreeMap<char, usize>| -> Vec<char> {
        lens.iter()
            .map(|&l| {
                let c = next;
                next = char::from_u32(next as u32 + 1).unwrap();
                lengths.insert(c, l);
                c
            })
            .collect()
    };
    let i_labels = take(&i_lens, &mut lengths);
    let j_labels = take(&j_lens, &mut lengths);
    let p_labels = take(&p_lens, &mut lengths);

    let mut shuffle_of = |parts: &[&[char]]| -> String {
        let mut v: Vec<char> = parts.concat();
        v.shuffle(rng);
        v.into_iter().collect()
    };
    let labels_c = shuffle_of(&[&i_labels, &j_labels]);
    let labels_a = shuffle_of(&[&i_labels, &p_labels]);
    let labels_b = shuffle_of(&[&p_labels, &j_labels]);

    (ContractionSpec { labels_c, labels_a, labels_b }, lengths)
}

/// Problem-shape family of a benchmark row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchShape {
    /// Report the actual bundle products.
    Explicit,
    /// `m~ = n~ = k~ = (f/2)^(1/3)`.
    Square,
    /// Fixed m and n; `k~ = f / (2 m n)`.
    RankK { m: usize, n: usize },
}

/// Effective matrix lengths for plotting a contraction of `f` flops against
/// matrix multiplications of the same arithmetic volume.
pub fn effective_lengths(f: u64, shape: BenchShape) -> (f64, f64, f64) {
    match shape {
        BenchShape::Explicit => panic!("explicit shapes report bundle products directly"),
        BenchShape::Square => {
            let e = (f as f64 / 2.0).cbrt();
            (e, e, e)
        }
        BenchShape::RankK { m, n } => (m as f64, n as f64, f as f64 / (2.0 * m as f64 * n as f64)),
    }
}
