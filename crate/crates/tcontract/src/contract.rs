//! Public contraction entry points: the native block-scatter path, the
//! transpose-multiply-transpose reference path, and the naive loop oracle.
//!
//! All entry points share the same contract: labels classify into the I/J/P
//! bundles, shared lengths agree, the output layout addresses each element
//! uniquely, and (in this version) operand strides are non-negative.

use crate::config::GemmConfig;
use crate::error::{Error, Result};
use crate::gemm::{gemm, MatMut, MatRef};
use crate::layout::for_each_offset;
use crate::parallel::{run_team, team_size};
use crate::plan::{derive_plan, fold_and_reorder_with, ContractionPlan, SwapPolicy};
use crate::scalar::Scalar;
use crate::tensor::{layout_is_injective, DenseTensor, LabelSet};

fn validate_entry<T: Scalar>(
    a: &DenseTensor<T>,
    labels_a: &LabelSet,
    b: &DenseTensor<T>,
    labels_b: &LabelSet,
    c: &DenseTensor<T>,
    labels_c: &LabelSet,
) -> Result<ContractionPlan> {
    let plan = derive_plan(labels_a, labels_b, labels_c, a, b, c)?;
    for t in [a.strides(), b.strides(), c.strides()] {
        if t.iter().any(|&s| s < 0) {
            return Err(Error::Unsupported(
                "negative strides are not accepted by the contraction entry points",
            ));
        }
    }
    if !layout_is_injective(c.lengths(), c.strides()) {
        return Err(Error::Unsupported("output layout must address each element uniquely"));
    }
    Ok(plan)
}

/// Native contraction: tensors flow through the blocked multiplication
/// pipeline as block-scatter matrix views, with no transposed copies.
///
/// `C := alpha * sum_P A*B + beta * C`, element-wise over the label bundles.
/// Team size comes from `threads`, else `TCONTRACT_NUM_THREADS`, else the
/// hardware concurrency. Output bits are independent of the team size.
#[allow(clippy::too_many_arguments)]
pub fn contract_bsmtc<T: Scalar>(
    alpha: T,
    a: &DenseTensor<T>,
    labels_a: &LabelSet,
    b: &DenseTensor<T>,
    labels_b: &LabelSet,
    beta: T,
    c: &mut DenseTensor<T>,
    labels_c: &LabelSet,
    cfg: &GemmConfig,
    threads: Option<usize>,
) -> Result<()> {
    contract_bsmtc_with(
        alpha,
        a,
        labels_a,
        b,
        labels_b,
        beta,
        c,
        labels_c,
        cfg,
        threads,
        SwapPolicy::Auto,
    )
}

/// [`contract_bsmtc`] with an explicit swap policy for heuristic step 4.
/// Results agree across policies up to summation-order rounding.
#[allow(clippy::too_many_arguments)]
pub fn contract_bsmtc_with<T: Scalar>(
    alpha: T,
    a: &DenseTensor<T>,
    labels_a: &LabelSet,
    b: &DenseTensor<T>,
    labels_b: &LabelSet,
    beta: T,
    c: &mut DenseTensor<T>,
    labels_c: &LabelSet,
    cfg: &GemmConfig,
    threads: Option<usize>,
    swap: SwapPolicy,
) -> Result<()> {
    cfg.validate()?;
    let plan = validate_entry(a, labels_a, b, labels_b, c, labels_c)?;
    let plan = fold_and_reorder_with(&plan, swap);
    if c.numel() == 0 {
        return Ok(());
    }

    let (eff_a, eff_b): (&DenseTensor<T>, &DenseTensor<T>) =
        if plan.swapped_ab { (b, a) } else { (a, b) };
    let av = MatRef::from_tensor(eff_a, plan.a_row_dims(), plan.a_col_dims())?;
    let bv = MatRef::from_tensor(eff_b, plan.b_row_dims(), plan.b_col_dims())?;
    let cv = MatMut::from_tensor(c, plan.c_row_dims(), plan.c_col_dims())?;

    let team = team_size(threads);
    let results = run_team(team, |comm| gemm(alpha, &av, &bv, beta, &cv, cfg, comm));
    for r in results {
        r?;
    }
    Ok(())
}

/// Workspace accounting for one reference-path contraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TtdtStats {
    /// Scalars allocated for the three transposed copies
    /// (`n_I*n_P + n_P*n_J + n_I*n_J`; 0 when the multiply was skipped).
    pub workspace_elements: usize,
}

/// Reference contraction: transpose A and B into column-major matrices,
/// multiply, and transpose-accumulate the result into C.
#[allow(clippy::too_many_arguments)]
pub fn contract_ttdt<T: Scalar>(
    alpha: T,
    a: &DenseTensor<T>,
    labels_a: &LabelSet,
    b: &DenseTensor<T>,
    labels_b: &LabelSet,
    beta: T,
    c: &mut DenseTensor<T>,
    labels_c: &LabelSet,
    threads: Option<usize>,
) -> Result<()> {
    contract_ttdt_with_stats(alpha, a, labels_a, b, labels_b, beta, c, labels_c, threads)
        .map(|_| ())
}

#[allow(clippy::too_many_arguments)]
pub fn contract_ttdt_with_stats<T: Scalar>(
    alpha: T,
    a: &DenseTensor<T>,
    labels_a: &LabelSet,
    b: &DenseTensor<T>,
    labels_b: &LabelSet,
    beta: T,
    c: &mut DenseTensor<T>,
    labels_c: &LabelSet,
    threads: Option<usize>,
) -> Result<TtdtStats> {
    let plan = validate_entry(a, labels_a, b, labels_b, c, labels_c)?;
    let plan = fold_and_reorder_with(&plan, SwapPolicy::Auto);
    if c.numel() == 0 {
        return Ok(TtdtStats { workspace_elements: 0 });
    }
    let (n_i, n_j, n_p) = (plan.n_rows(), plan.n_cols(), plan.n_depth());
    if alpha == T::ZERO || n_p == 0 {
        scale_elements(beta, c, &plan);
        return Ok(TtdtStats { workspace_elements: 0 });
    }

    let (eff_a, eff_b): (&DenseTensor<T>, &DenseTensor<T>) =
        if plan.swapped_ab { (b, a) } else { (a, b) };

    let na = n_i.checked_mul(n_p).ok_or(Error::SizeOverflow)?;
    let nb = n_p.checked_mul(n_j).ok_or(Error::SizeOverflow)?;
    let nc = n_i.checked_mul(n_j).ok_or(Error::SizeOverflow)?;
    let workspace_elements = na + nb + nc;

    // Transpose A~[i + p*n_i] := A, B~[p + j*n_p] := B (plain blocked copies).
    let mut ta = alloc_workspace::<T>(na)?;
    for_each_offset(&plan.a_col_dims(), 0, n_p, |po| {
        for_each_offset(&plan.a_row_dims(), 0, n_i, |io| {
            ta.push(eff_a.data()[(eff_a.base() as isize + io + po) as usize]);
        });
    });
    let mut tb = alloc_workspace::<T>(nb)?;
    for_each_offset(&plan.b_col_dims(), 0, n_j, |jo| {
        for_each_offset(&plan.b_row_dims(), 0, n_p, |po| {
            tb.push(eff_b.data()[(eff_b.base() as isize + po + jo) as usize]);
        });
    });
    let mut tc = alloc_workspace::<T>(nc)?;
    tc.resize(nc, T::ZERO);

    {
        let av = MatRef::from_matrix(&ta, n_i, n_p, 1, n_i as isize, 0)?;
        let bv = MatRef::from_matrix(&tb, n_p, n_j, 1, n_p as isize, 0)?;
        let cv = MatMut::from_matrix(&mut tc, n_i, n_j, 1, n_i as isize, 0)?;
        let cfg = GemmConfig::default();
        let team = team_size(threads);
        let results = run_team(team, |comm| gemm(alpha, &av, &bv, T::ZERO, &cv, &cfg, comm));
        for r in results {
            r?;
        }
    }

    // Transpose and sum: C := C~ + beta*C.
    let cbase = c.base() as isize;
    let c_rows = plan.c_row_dims();
    let c_cols = plan.c_col_dims();
    let cdata = c.data_mut();
    let mut lin = 0usize;
    for_each_offset(&c_cols, 0, n_j, |jo| {
        for_each_offset(&c_rows, 0, n_i, |io| {
            let off = (cbase + io + jo) as usize;
            let v = tc[lin];
            lin += 1;
            let slot = &mut cdata[off];
            *slot = if beta == T::ZERO {
                v
            } else if beta == T::ONE {
                v + *slot
            } else {
                v + beta * *slot
            };
        });
    });

    Ok(TtdtStats { workspace_elements })
}

fn alloc_workspace<T: Scalar>(n: usize) -> Result<Vec<T>> {
    let mut v = Vec::new();
    v.try_reserve_exact(n).map_err(|_| Error::Resource { elements: n })?;
    Ok(v)
}

/// `C := beta*C` over the plan's row/col bundles (covers every element of C;
/// length-1 dims dropped by the heuristics contribute offset 0).
fn scale_elements<T: Scalar>(beta: T, c: &mut DenseTensor<T>, plan: &ContractionPlan) {
    if beta == T::ONE {
        return;
    }
    let rows = plan.c_row_dims();
    let cols = plan.c_col_dims();
    let (n_i, n_j) = (plan.n_rows(), plan.n_cols());
    let base = c.base() as isize;
    let data = c.data_mut();
    for_each_offset(&cols, 0, n_j, |jo| {
        for_each_offset(&rows, 0, n_i, |io| {
            let off = (base + io + jo) as usize;
            data[off] = if beta == T::ZERO { T::ZERO } else { beta * data[off] };
        });
    });
}

/// Literal nested-loop contraction, the verification oracle. Sums the P
/// bundle in ascending colexicographic order with its own offset arithmetic,
/// independent of the scatter/packing machinery. Intended for small sizes.
#[allow(clippy::too_many_arguments)]
pub fn contract_naive<T: Scalar>(
    alpha: T,
    a: &DenseTensor<T>,
    labels_a: &LabelSet,
    b: &DenseTensor<T>,
    labels_b: &LabelSet,
    beta: T,
    c: &mut DenseTensor<T>,
    labels_c: &LabelSet,
) -> Result<()> {
    let plan = validate_entry(a, labels_a, b, labels_b, c, labels_c)?;
    if c.numel() == 0 {
        return Ok(());
    }

    struct Odo<'d> {
        dims: &'d [(usize, isize)],
        idx: Vec<usize>,
        off: isize,
    }
    impl<'d> Odo<'d> {
        fn new(dims: &'d [(usize, isize)]) -> Self {
            Odo { dims, idx: vec![0; dims.len()], off: 0 }
        }
        fn advance(&mut self) -> bool {
            for (d, &(len, stride)) in self.dims.iter().enumerate() {
                self.idx[d] += 1;
                self.off += stride;
                if self.idx[d] < len {
                    return true;
                }
                self.idx[d] = 0;
                self.off -= len as isize * stride;
            }
            false
        }
    }

    let i_in_a: Vec<(usize, isize)> = plan.bundle_i.iter().map(|d| (d.len, d.a_stride)).collect();
    let i_in_c: Vec<(usize, isize)> = plan.bundle_i.iter().map(|d| (d.len, d.c_stride)).collect();
    let j_in_b: Vec<(usize, isize)> = plan.bundle_j.iter().map(|d| (d.len, d.b_stride)).collect();
    let j_in_c: Vec<(usize, isize)> = plan.bundle_j.iter().map(|d| (d.len, d.c_stride)).collect();
    let p_in_a: Vec<(usize, isize)> = plan.bundle_p.iter().map(|d| (d.len, d.a_stride)).collect();
    let p_in_b: Vec<(usize, isize)> = plan.bundle_p.iter().map(|d| (d.len, d.b_stride)).collect();

    let n_p = plan.n_depth();
    let adata = a.data();
    let bdata = b.data();
    let abase = a.base() as isize;
    let bbase = b.base() as isize;
    let cbase = c.base() as isize;
    let cdata = c.data_mut();

    let mut oi_a = Odo::new(&i_in_a);
    let mut oi_c = Odo::new(&i_in_c);
    loop {
        let mut oj_b = Odo::new(&j_in_b);
        let mut oj_c = Odo::new(&j_in_c);
        loop {
            let coff = (cbase + oi_c.off + oj_c.off) as usize;
            let mut acc = T::ZERO;
            if alpha != T::ZERO && n_p > 0 {
                let mut op_a = Odo::new(&p_in_a);
                let mut op_b = Odo::new(&p_in_b);
                loop {
                    acc += adata[(abase + oi_a.off + op_a.off) as usize]
                        * bdata[(bbase + oj_b.off + op_b.off) as usize];
                    let more = op_a.advance();
                    if !op_b.advance() || !more {
                        break;
                    }
                }
            }
            let old = cdata[coff];
            cdata[coff] = if alpha == T::ZERO {
                if beta == T::ZERO {
                    T::ZERO
                } else {
                    beta * old
                }
            } else if beta == T::ZERO {
                alpha * acc
            } else {
                alpha * acc + beta * old
            };
            let more = oj_b.advance();
            if !oj_c.advance() || !more {
                break;
            }
        }
        let more = oi_a.advance();
        if !oi_c.advance() || !more {
            break;
        }
    }
    Ok(())
}
