#![allow(dead_code)]

//! Shared test fixtures: the worked-example tensors, a reproducible random
//! contraction generator, and tolerance helpers.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use tcontract::tensor::Label;
use tcontract::{DenseTensor, LabelSet};

/// One randomized contraction instance in double precision.
pub struct RandomCase {
    pub a: DenseTensor<f64>,
    pub la: LabelSet,
    pub b: DenseTensor<f64>,
    pub lb: LabelSet,
    pub c: DenseTensor<f64>,
    pub lc: LabelSet,
    pub alpha: f64,
    pub beta: f64,
    pub n_depth: usize,
}

fn shuffled(rng: &mut ChaCha8Rng, labels: &[char]) -> LabelSet {
    let mut v: Vec<char> = labels.to_vec();
    v.shuffle(rng);
    LabelSet::new(v.into_iter().map(Label::from).collect()).unwrap()
}

/// Column-major tensor over the labels' lengths, optionally turned into a
/// gappy sub-view (padded strides, nonzero base) to exercise generic layouts.
fn build_tensor(
    rng: &mut ChaCha8Rng,
    labels: &LabelSet,
    len_of: &dyn Fn(char) -> usize,
) -> DenseTensor<f64> {
    let lengths: Vec<usize> = labels.labels().iter().map(|l| len_of(l.as_char())).collect();
    let gappy = rng.random_bool(0.4);
    let base = if gappy { rng.random_range(0..4) } else { 0 };
    let mut strides = Vec::with_capacity(lengths.len());
    let mut acc: usize = 1;
    for &len in &lengths {
        strides.push(acc as isize);
        let gap = if gappy && rng.random_bool(0.3) { rng.random_range(2..4) } else { 1 };
        acc *= len.max(1) * gap;
    }
    let numel: usize = lengths.iter().product();
    let span: usize = base
        + lengths
            .iter()
            .zip(&strides)
            .map(|(&l, &s)| l.saturating_sub(1) * s as usize)
            .sum::<usize>();
    let size = if numel == 0 { 0 } else { span + 1 };
    let data: Vec<f64> = (0..size).map(|_| rng.random_range(-1.0..1.0)).collect();
    DenseTensor::from_parts(lengths, strides, base, data).unwrap()
}

/// Random contraction: bundle sizes 1..=3 (so tensor orders <= 6), per-dim
/// lengths 1..=8, random label permutations, random sub-view strides, and
/// alpha/beta drawn from {0, 1, 0.5, -1}. Rejection-sampled to `flop_cap`.
pub fn random_case(rng: &mut ChaCha8Rng, flop_cap: u64) -> RandomCase {
    loop {
        let d_i = rng.random_range(1..=3usize);
        let d_j = rng.random_range(1..=3usize);
        let d_p = rng.random_range(1..=3usize);
        let all: Vec<char> = ('a'..).take(d_i + d_j + d_p).collect();
        let (i_labels, rest) = all.split_at(d_i);
        let (j_labels, p_labels) = rest.split_at(d_j);

        let mut lens = std::collections::HashMap::new();
        for &l in &all {
            lens.insert(l, rng.random_range(1..=8usize));
        }
        let n_i: u64 = i_labels.iter().map(|l| lens[l] as u64).product();
        let n_j: u64 = j_labels.iter().map(|l| lens[l] as u64).product();
        let n_p: u64 = p_labels.iter().map(|l| lens[l] as u64).product();
        if 2 * n_i * n_j * n_p > flop_cap {
            continue;
        }

        let la = shuffled(rng, &[i_labels, p_labels].concat());
        let lb = shuffled(rng, &[p_labels, j_labels].concat());
        let lc = shuffled(rng, &[i_labels, j_labels].concat());
        let len_of = |c: char| lens[&c];

        let choices = [0.0, 1.0, 0.5, -1.0];
        let case = RandomCase {
            a: build_tensor(rng, &la, &len_of),
            b: build_tensor(rng, &lb, &len_of),
            c: build_tensor(rng, &lc, &len_of),
            la,
            lb,
            lc,
            alpha: *choices.choose(rng).unwrap(),
            beta: *choices.choose(rng).unwrap(),
            n_depth: n_p as usize,
        };
        return case;
    }
}

/// The tensor's logical elements in colexicographic index order (skips any
/// gap elements a padded layout may have).
pub fn logical_values(t: &DenseTensor<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.numel());
    if t.numel() == 0 {
        return out;
    }
    let mut idx = vec![0usize; t.order()];
    loop {
        out.push(*t.get(&idx).unwrap());
        let mut d = 0;
        loop {
            if d == t.order() {
                return out;
            }
            idx[d] += 1;
            if idx[d] < t.lengths()[d] {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Relative max-norm error: `max|got - want| / max(1, max|want|)`.
pub fn rel_maxnorm_err(got: &[f64], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len());
    let mut num: f64 = 0.0;
    let mut den: f64 = 1.0;
    for (g, w) in got.iter().zip(want) {
        num = num.max((g - w).abs());
        den = den.max(w.abs());
    }
    num / den
}

/// The worked-example fixture: A 2x4x3x3 (cfbd), B 4x4x6 (fea),
/// C 6x3x2x3x4 (abcde), all general column-major.
pub fn eq5_fixture(
    fill: impl Fn(usize) -> f64,
) -> (DenseTensor<f64>, LabelSet, DenseTensor<f64>, LabelSet, DenseTensor<f64>, LabelSet) {
    let a = DenseTensor::column_major_with(&[2, 4, 3, 3], &fill).unwrap();
    let b = DenseTensor::column_major_with(&[4, 4, 6], &fill).unwrap();
    let c = DenseTensor::<f64>::new_column_major(&[6, 3, 2, 3, 4]).unwrap();
    (
        a,
        LabelSet::parse("cfbd").unwrap(),
        b,
        LabelSet::parse("fea").unwrap(),
        c,
        LabelSet::parse("abcde").unwrap(),
    )
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
