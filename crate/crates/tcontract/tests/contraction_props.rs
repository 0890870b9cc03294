//! Contraction-level properties: linearity in alpha, swap-policy agreement,
//! and generic single-precision support.

mod common;

use tcontract::config::GemmConfig;
use tcontract::contract::contract_bsmtc_with;
use tcontract::plan::SwapPolicy;
use tcontract::{contract_bsmtc, contract_naive, DenseTensor, LabelSet};

#[test]
fn scaling_alpha_scales_the_result_bitwise() {
    // With beta = 0, doubling alpha must double every output bit-exactly
    // (scaling by a power of two commutes with every rounding step).
    let mut rng = common::seeded(31415);
    let cfg = GemmConfig::default();
    for _ in 0..50 {
        let case = common::random_case(&mut rng, 1 << 20);
        let alpha = 0.7;
        let mut r1 = case.c.clone();
        contract_bsmtc(
            alpha,
            &case.a,
            &case.la,
            &case.b,
            &case.lb,
            0.0,
            &mut r1,
            &case.lc,
            &cfg,
            Some(1),
        )
        .unwrap();
        let mut r2 = case.c.clone();
        contract_bsmtc(
            2.0 * alpha,
            &case.a,
            &case.la,
            &case.b,
            &case.lb,
            0.0,
            &mut r2,
            &case.lc,
            &cfg,
            Some(1),
        )
        .unwrap();
        let doubled: Vec<f64> = common::logical_values(&r1).iter().map(|&x| 2.0 * x).collect();
        assert_eq!(doubled, common::logical_values(&r2));
    }
}

#[test]
fn forcing_the_swap_on_or_off_agrees_within_tolerance() {
    let mut rng = common::seeded(92653);
    let cfg = GemmConfig::default();
    for _ in 0..100 {
        let case = common::random_case(&mut rng, 1 << 20);
        let mut want = case.c.clone();
        contract_naive(
            case.alpha, &case.a, &case.la, &case.b, &case.lb, case.beta, &mut want, &case.lc,
        )
        .unwrap();
        for policy in [SwapPolicy::Never, SwapPolicy::Always] {
            let mut got = case.c.clone();
            contract_bsmtc_with(
                case.alpha,
                &case.a,
                &case.la,
                &case.b,
                &case.lb,
                case.beta,
                &mut got,
                &case.lc,
                &cfg,
                Some(2),
                policy,
            )
            .unwrap();
            let err = common::rel_maxnorm_err(got.data(), want.data());
            let tol = 1e-12 * case.n_depth.max(1) as f64;
            assert!(err <= tol, "policy {policy:?}: error {err:.3e} > {tol:.3e}");
        }
    }
}

#[test]
fn single_precision_contraction_works_generically() {
    let a = DenseTensor::<f32>::column_major_with(&[3, 4, 2], |i| (i as f32 * 0.1).sin()).unwrap();
    let b = DenseTensor::<f32>::column_major_with(&[2, 4, 5], |i| (i as f32 * 0.2).cos()).unwrap();
    let la = LabelSet::parse("ipq").unwrap();
    let lb = LabelSet::parse("qpj").unwrap();
    let lc = LabelSet::parse("ij").unwrap();
    let mut c1 = DenseTensor::<f32>::new_column_major(&[3, 5]).unwrap();
    let mut c2 = c1.clone();
    contract_naive(1.0f32, &a, &la, &b, &lb, 0.0, &mut c1, &lc).unwrap();
    contract_bsmtc(1.0f32, &a, &la, &b, &lb, 0.0, &mut c2, &lc, &GemmConfig::default(), Some(1))
        .unwrap();
    for (x, y) in c1.data().iter().zip(c2.data()) {
        assert!((x - y).abs() <= 1e-5 * x.abs().max(1.0));
    }
}

#[test]
fn tensor_contractions_agree_across_blocking_configurations() {
    // The bitwise cfg-independence of the matrix pipeline extends to full
    // tensor contractions: edge tiles, scatter fallbacks and arena sizes all
    // change with the blocking, the bits must not.
    let configs = [
        GemmConfig::default(),
        GemmConfig::new(1, 1, 1, 1, 1, 1).unwrap(),
        GemmConfig::new(10, 14, 21, 5, 7, 3).unwrap(),
        GemmConfig::new(12, 16, 8, 6, 8, 4).unwrap(),
    ];
    let mut rng = common::seeded(58979);
    for case_idx in 0..100 {
        let case = common::random_case(&mut rng, 1 << 20);
        let mut reference: Option<DenseTensor<f64>> = None;
        for cfg in &configs {
            let mut got = case.c.clone();
            contract_bsmtc(
                case.alpha,
                &case.a,
                &case.la,
                &case.b,
                &case.lb,
                case.beta,
                &mut got,
                &case.lc,
                cfg,
                Some(2),
            )
            .unwrap();
            match &reference {
                None => reference = Some(got),
                Some(r) => {
                    assert_eq!(r.data(), got.data(), "case {case_idx} diverged under {cfg:?}")
                }
            }
        }
    }
}

#[test]
fn zero_length_free_dims_are_a_no_op() {
    let a = DenseTensor::<f64>::new_column_major(&[0, 3]).unwrap();
    let b = DenseTensor::<f64>::new_column_major(&[3, 2]).unwrap();
    let mut c = DenseTensor::<f64>::new_column_major(&[0, 2]).unwrap();
    contract_bsmtc(
        1.0,
        &a,
        &LabelSet::parse("ip").unwrap(),
        &b,
        &LabelSet::parse("pj").unwrap(),
        0.0,
        &mut c,
        &LabelSet::parse("ij").unwrap(),
        &GemmConfig::default(),
        Some(1),
    )
    .unwrap();
    assert_eq!(c.numel(), 0);
}
