//! Contraction planning: classify labels into the I/J/P index bundles and
//! apply the logical fold/reorder heuristics.
//!
//! A plan records, per bundle dimension, the length and the stride of that
//! dimension in each tensor that carries it. All reordering here is purely
//! logical; no tensor data moves.

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, Label, LabelSet};

/// Dimension of the I bundle: carried by A and C.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IDim {
    pub label: Label,
    pub len: usize,
    pub a_stride: isize,
    pub c_stride: isize,
}

/// Dimension of the J bundle: carried by B and C.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JDim {
    pub label: Label,
    pub len: usize,
    pub b_stride: isize,
    pub c_stride: isize,
}

/// Dimension of the P (contracted) bundle: carried by A and B.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PDim {
    pub label: Label,
    pub len: usize,
    pub a_stride: isize,
    pub b_stride: isize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bundle {
    I,
    J,
    P,
}

/// Record of one folded (merged) dimension pair, for diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FoldRecord {
    pub bundle: Bundle,
    /// Label kept for the merged dimension (the smaller stride).
    pub kept: Label,
    /// Label absorbed into it.
    pub merged: Label,
}

/// Label-derived index bundles with per-tensor strides.
///
/// When `swapped_ab` is set the roles of A and B (and of I and J) have been
/// exchanged by the reorder heuristic: `a_stride` fields then refer to the
/// tensor originally passed as B, and vice versa. Callers that feed tensors
/// into the multiplication pipeline must honor the flag.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionPlan {
    pub bundle_i: Vec<IDim>,
    pub bundle_j: Vec<JDim>,
    pub bundle_p: Vec<PDim>,
    pub swapped_ab: bool,
    pub folded_dims: Vec<FoldRecord>,
}

/// Whether heuristic step 4 (swap A/B when C wants unit column stride) runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwapPolicy {
    Auto,
    Never,
    Always,
}

impl ContractionPlan {
    /// Plan from explicit bundles. Validates that no label repeats across
    /// bundle entries.
    pub fn from_parts(
        bundle_i: Vec<IDim>,
        bundle_j: Vec<JDim>,
        bundle_p: Vec<PDim>,
        swapped_ab: bool,
    ) -> Result<Self> {
        let mut seen: Vec<Label> = Vec::new();
        let labels = bundle_i
            .iter()
            .map(|d| d.label)
            .chain(bundle_j.iter().map(|d| d.label))
            .chain(bundle_p.iter().map(|d| d.label));
        for l in labels {
            if seen.contains(&l) {
                return Err(Error::RepeatedLabel(l.as_char()));
            }
            seen.push(l);
        }
        Ok(ContractionPlan { bundle_i, bundle_j, bundle_p, swapped_ab, folded_dims: Vec::new() })
    }

    /// Linearized row extent of the matrix view (product of I lengths).
    pub fn n_rows(&self) -> usize {
        self.bundle_i.iter().map(|d| d.len).product()
    }

    /// Linearized column extent (product of J lengths).
    pub fn n_cols(&self) -> usize {
        self.bundle_j.iter().map(|d| d.len).product()
    }

    /// Linearized depth extent (product of P lengths).
    pub fn n_depth(&self) -> usize {
        self.bundle_p.iter().map(|d| d.len).product()
    }

    /// Flop count of the contraction: `2 * n_rows * n_cols * n_depth`.
    pub fn flop_count(&self) -> u64 {
        2 * self.n_rows() as u64 * self.n_cols() as u64 * self.n_depth() as u64
    }

    /// (length, stride) dims of the effective-A tensor along the row (I) axis.
    pub fn a_row_dims(&self) -> Vec<(usize, isize)> {
        self.bundle_i.iter().map(|d| (d.len, d.a_stride)).collect()
    }

    /// (length, stride) dims of the effective-A tensor along the depth (P) axis.
    pub fn a_col_dims(&self) -> Vec<(usize, isize)> {
        self.bundle_p.iter().map(|d| (d.len, d.a_stride)).collect()
    }

    /// (length, stride) dims of the effective-B tensor along the depth (P) axis.
    pub fn b_row_dims(&self) -> Vec<(usize, isize)> {
        self.bundle_p.iter().map(|d| (d.len, d.b_stride)).collect()
    }

    /// (length, stride) dims of the effective-B tensor along the column (J) axis.
    pub fn b_col_dims(&self) -> Vec<(usize, isize)> {
        self.bundle_j.iter().map(|d| (d.len, d.b_stride)).collect()
    }

    /// (length, stride) dims of C along the row (I) axis.
    pub fn c_row_dims(&self) -> Vec<(usize, isize)> {
        self.bundle_i.iter().map(|d| (d.len, d.c_stride)).collect()
    }

    /// (length, stride) dims of C along the column (J) axis.
    pub fn c_col_dims(&self) -> Vec<(usize, isize)> {
        self.bundle_j.iter().map(|d| (d.len, d.c_stride)).collect()
    }

    /// True when A and C both have a unit-stride I dimension but no single I
    /// dimension is unit stride in both, so stride-1 access cannot be
    /// obtained in A and C simultaneously by any logical reordering.
    pub fn stride_one_conflict(&self) -> bool {
        let c1 = self.bundle_i.iter().any(|d| d.c_stride == 1);
        let a1 = self.bundle_i.iter().any(|d| d.a_stride == 1);
        let both = self.bundle_i.iter().any(|d| d.c_stride == 1 && d.a_stride == 1);
        c1 && a1 && !both
    }
}

fn find_len_stride<T>(t: &DenseTensor<T>, labels: &LabelSet, l: Label) -> (usize, isize) {
    let pos = labels.position(l).expect("label classified but missing");
    (t.lengths()[pos], t.strides()[pos])
}

/// Classify labels into the I (A and C), J (B and C) and P (A and B) bundles
/// and record lengths and per-tensor strides.
///
/// Bundle order is canonical: I and J in label appearance order in C, P in
/// appearance order in A. Any label present in only one tensor or in all
/// three is rejected, as are length mismatches between carriers.
pub fn derive_plan<T>(
    labels_a: &LabelSet,
    labels_b: &LabelSet,
    labels_c: &LabelSet,
    a: &DenseTensor<T>,
    b: &DenseTensor<T>,
    c: &DenseTensor<T>,
) -> Result<ContractionPlan> {
    for (labels, t) in [(labels_a, a.order()), (labels_b, b.order()), (labels_c, c.order())] {
        if labels.len() != t {
            return Err(Error::OrderMismatch { labels: labels.len(), order: t });
        }
    }

    let mut bundle_i = Vec::new();
    let mut bundle_j = Vec::new();
    let mut bundle_p = Vec::new();

    for &l in labels_c.labels() {
        let in_a = labels_a.contains(l);
        let in_b = labels_b.contains(l);
        match (in_a, in_b) {
            (true, false) => {
                let (la, sa) = find_len_stride(a, labels_a, l);
                let (lc, sc) = find_len_stride(c, labels_c, l);
                if la != lc {
                    return Err(Error::LengthMismatch { label: l.as_char(), left: la, right: lc });
                }
                bundle_i.push(IDim { label: l, len: lc, a_stride: sa, c_stride: sc });
            }
            (false, true) => {
                let (lb, sb) = find_len_stride(b, labels_b, l);
                let (lc, sc) = find_len_stride(c, labels_c, l);
                if lb != lc {
                    return Err(Error::LengthMismatch { label: l.as_char(), left: lb, right: lc });
                }
                bundle_j.push(JDim { label: l, len: lc, b_stride: sb, c_stride: sc });
            }
            _ => return Err(Error::LabelClassification(l.as_char())),
        }
    }

    for &l in labels_a.labels() {
        if labels_c.contains(l) {
            continue; // already classified as I
        }
        if !labels_b.contains(l) {
            return Err(Error::LabelClassification(l.as_char()));
        }
        let (la, sa) = find_len_stride(a, labels_a, l);
        let (lb, sb) = find_len_stride(b, labels_b, l);
        if la != lb {
            return Err(Error::LengthMismatch { label: l.as_char(), left: la, right: lb });
        }
        bundle_p.push(PDim { label: l, len: la, a_stride: sa, b_stride: sb });
    }

    for &l in labels_b.labels() {
        if !labels_a.contains(l) && !labels_c.contains(l) {
            return Err(Error::LabelClassification(l.as_char()));
        }
    }

    // d_P = (d_A + d_B - d_C)/2 and friends hold by construction.
    debug_assert_eq!(bundle_i.len() + bundle_p.len(), labels_a.len());
    debug_assert_eq!(bundle_j.len() + bundle_p.len(), labels_b.len());
    debug_assert_eq!(bundle_i.len() + bundle_j.len(), labels_c.len());

    Ok(ContractionPlan { bundle_i, bundle_j, bundle_p, swapped_ab: false, folded_dims: Vec::new() })
}

/// Dimensions u,v fold iff `stride_v == stride_u * len_u` in every tensor
/// carrying both. `dims` must already be sorted by the primary stride.
fn fold_bundle<D: Copy>(
    dims: &mut Vec<D>,
    strides_of: impl Fn(&D) -> (isize, isize),
    len_of: impl Fn(&D) -> usize,
    merge: impl Fn(&mut D, &D),
    label_of: impl Fn(&D) -> Label,
    bundle: Bundle,
    records: &mut Vec<FoldRecord>,
) {
    let mut out: Vec<D> = Vec::with_capacity(dims.len());
    for &d in dims.iter() {
        if let Some(last) = out.last_mut() {
            let (s0a, s0b) = strides_of(last);
            let (s1a, s1b) = strides_of(&d);
            let len = len_of(last) as isize;
            if s1a == s0a * len && s1b == s0b * len {
                records.push(FoldRecord { bundle, kept: label_of(last), merged: label_of(&d) });
                merge(last, &d);
                continue;
            }
        }
        out.push(d);
    }
    *dims = out;
}

/// The five-step logical reorder heuristic with the default swap policy.
pub fn fold_and_reorder(plan: &ContractionPlan) -> ContractionPlan {
    fold_and_reorder_with(plan, SwapPolicy::Auto)
}

/// The five-step logical reorder heuristic:
///
/// 1. remove length-1 dimensions;
/// 2. fold dimensions that are sequentially contiguous in all carriers;
/// 3. sort I and J by increasing stride in C (stable);
/// 4. if the first J dimension has unit stride in C, swap A with B and
///    I with J (subject to `policy`);
/// 5. sort P by increasing stride in (post-swap) A (stable).
pub fn fold_and_reorder_with(plan: &ContractionPlan, policy: SwapPolicy) -> ContractionPlan {
    let mut p = plan.clone();

    // Step 1: drop length-1 dims; their stride carries no information.
    p.bundle_i.retain(|d| d.len != 1);
    p.bundle_j.retain(|d| d.len != 1);
    p.bundle_p.retain(|d| d.len != 1);

    // Steps 2+3: sort by the primary carrier stride, then fold adjacent runs.
    // Folding requires the stride relation in every carrier, which forces the
    // same adjacency in any carrier's stride order.
    p.bundle_i.sort_by_key(|d| d.c_stride);
    p.bundle_j.sort_by_key(|d| d.c_stride);
    p.bundle_p.sort_by_key(|d| d.a_stride);
    let mut records = std::mem::take(&mut p.folded_dims);
    fold_bundle(
        &mut p.bundle_i,
        |d| (d.a_stride, d.c_stride),
        |d| d.len,
        |acc, d| acc.len *= d.len,
        |d| d.label,
        Bundle::I,
        &mut records,
    );
    fold_bundle(
        &mut p.bundle_j,
        |d| (d.b_stride, d.c_stride),
        |d| d.len,
        |acc, d| acc.len *= d.len,
        |d| d.label,
        Bundle::J,
        &mut records,
    );
    fold_bundle(
        &mut p.bundle_p,
        |d| (d.a_stride, d.b_stride),
        |d| d.len,
        |acc, d| acc.len *= d.len,
        |d| d.label,
        Bundle::P,
        &mut records,
    );
    p.folded_dims = records;

    // Step 4: give the row bundle of C the unit stride when possible.
    let want_swap = match policy {
        SwapPolicy::Auto => p.bundle_j.first().map(|d| d.c_stride == 1).unwrap_or(false),
        SwapPolicy::Never => false,
        SwapPolicy::Always => true,
    };
    if want_swap {
        let old_i = std::mem::take(&mut p.bundle_i);
        let old_j = std::mem::take(&mut p.bundle_j);
        p.bundle_i = old_j
            .into_iter()
            .map(|d| IDim {
                label: d.label,
                len: d.len,
                a_stride: d.b_stride,
                c_stride: d.c_stride,
            })
            .collect();
        p.bundle_j = old_i
            .into_iter()
            .map(|d| JDim {
                label: d.label,
                len: d.len,
                b_stride: d.a_stride,
                c_stride: d.c_stride,
            })
            .collect();
        for d in &mut p.bundle_p {
            std::mem::swap(&mut d.a_stride, &mut d.b_stride);
        }
        p.swapped_ab = !p.swapped_ab;
    }

    // Step 5: sort P by increasing stride in the tensor that is packed most
    // frequently (effective A).
    p.bundle_p.sort_by_key(|d| d.a_stride);

    p
}
