//! Pins the naive loop oracle against a frozen golden table for the worked
//! example, plus its flop accounting. The golden values were produced by an
//! independent einsum evaluation and guard the oracle against regressions;
//! everything else in the test suite is measured against this oracle.

mod common;

use tcontract::plan::derive_plan;
use tcontract::{contract_naive, DenseTensor, LabelSet};

fn golden_values() -> Vec<f64> {
    let text = include_str!("data/eq5_golden.txt");
    text.split_whitespace().map(|w| w.parse::<f64>().unwrap()).collect()
}

#[test]
fn naive_oracle_matches_the_golden_table() {
    // A[i] = i, B[i] = i over the linear buffers; alpha=1, beta=0.
    let (a, la, b, lb, mut c, lc) = common::eq5_fixture(|i| i as f64);
    contract_naive(1.0, &a, &la, &b, &lb, 0.0, &mut c, &lc).unwrap();

    let want = golden_values();
    assert_eq!(want.len(), 432);
    // integer-valued data keeps every sum exact, so equality is bitwise
    assert_eq!(c.data(), &want[..]);
}

#[test]
fn flop_count_of_the_example() {
    let (a, la, b, lb, c, lc) = common::eq5_fixture(|i| i as f64);
    let plan = derive_plan(&la, &lb, &lc, &a, &b, &c).unwrap();
    assert_eq!(plan.flop_count(), 2 * 18 * 24 * 4);
    assert_eq!(plan.flop_count(), 3456);
}

#[test]
fn oracle_handles_permuted_views_of_the_same_data() {
    // The same contraction expressed with A's labels permuted and the tensor
    // transposed accordingly must give the same C.
    let (a, _la, b, lb, mut c1, lc) = common::eq5_fixture(|i| (i as f64 * 0.13).sin());
    let la = LabelSet::parse("cfbd").unwrap();
    contract_naive(1.0, &a, &la, &b, &lb, 0.0, &mut c1, &lc).unwrap();

    // Rebuild A with dimension order (d, b, c, f) holding identical values.
    let mut a2 = DenseTensor::<f64>::new_column_major(&[3, 3, 2, 4]).unwrap();
    for d in 0..3 {
        for bb in 0..3 {
            for cc in 0..2 {
                for f in 0..4 {
                    let v = *a.get(&[cc, f, bb, d]).unwrap();
                    a2.set(&[d, bb, cc, f], v).unwrap();
                }
            }
        }
    }
    let mut c2 = DenseTensor::<f64>::new_column_major(&[6, 3, 2, 3, 4]).unwrap();
    contract_naive(1.0, &a2, &LabelSet::parse("dbcf").unwrap(), &b, &lb, 0.0, &mut c2, &lc)
        .unwrap();
    let err = common::rel_maxnorm_err(c2.data(), c1.data());
    assert!(err <= 1e-13, "relative error {err}");
}
