//! Scatter and block-scatter vectors, and tensors presented as 2-D matrix
//! views addressable by the multiplication pipeline.
//!
//! A bundle of tensor dimensions plays the role of one matrix dimension; its
//! linearized index is decoded through a *scatter vector* of per-element
//! buffer offsets instead of a constant stride. A *block scatter vector*
//! summarizes each block of the scatter vector with the block's constant
//! stride, or 0 when the block has none, letting most blocks take the
//! constant-stride fast paths during packing and micro-kernel updates.

use std::ops::Range;
use std::sync::Arc;

use crate::config::GemmConfig;
use crate::error::{Error, Result};
use crate::plan::ContractionPlan;
use crate::tensor::DenseTensor;

/// Offsets of a bundle enumerated in colexicographic order of the bundle's
/// dimensions: `offset(k) = sum_d idx_d(k) * stride_d` with dimension 0
/// fastest. `dims` are `(length, stride)` pairs.
pub fn compute_scatter(dims: &[(usize, isize)]) -> Result<Vec<isize>> {
    let mut total = 1usize;
    for &(len, _) in dims {
        total = total.checked_mul(len).ok_or(Error::SizeOverflow)?;
    }
    let mut scat = Vec::with_capacity(total);
    scat.push(0);
    for &(len, stride) in dims {
        if len == 0 {
            return Ok(Vec::new());
        }
        let mut next = Vec::with_capacity(scat.len() * len);
        for j in 0..len {
            let off = j as isize * stride;
            next.extend(scat.iter().map(|&p| p + off));
        }
        scat = next;
    }
    Ok(scat)
}

/// Fills `out` with scatter entries for linearized indices
/// `start..start + out.len()` without materializing the whole vector. Used
/// to build per-panel scatter vectors in workspace arenas.
pub(crate) fn fill_scatter(dims: &[(usize, isize)], start: usize, out: &mut [isize]) {
    let count = out.len();
    let mut it = out.iter_mut();
    for_each_offset(dims, start, count, |off| *it.next().unwrap() = off);
}

/// Calls `f` with the scatter offset of each linearized index in
/// `start..start + count`, in order, without materializing a vector.
pub(crate) fn for_each_offset(
    dims: &[(usize, isize)],
    start: usize,
    count: usize,
    mut f: impl FnMut(isize),
) {
    let mut idx = Vec::with_capacity(dims.len());
    let mut rem = start;
    let mut off: isize = 0;
    for &(len, stride) in dims {
        let i = if len == 0 { 0 } else { rem % len };
        rem /= len.max(1);
        idx.push(i);
        off += i as isize * stride;
    }
    for _ in 0..count {
        f(off);
        for (d, &(len, stride)) in dims.iter().enumerate() {
            idx[d] += 1;
            off += stride;
            if idx[d] < len {
                break;
            }
            idx[d] = 0;
            off -= len as isize * stride;
        }
    }
}

/// Per-block constant-stride summary of a scatter vector.
///
/// Entry `i` is `s > 0` when consecutive offsets within block `i` all differ
/// by exactly `s`, and 0 otherwise. Single-element blocks get stride 1 by
/// convention (no difference exists to contradict any value).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockScatterVector {
    pub strides: Vec<isize>,
    pub block: usize,
}

pub fn compute_block_scatter(scat: &[isize], block: usize) -> BlockScatterVector {
    assert!(block >= 1, "block size must be at least 1");
    BlockScatterVector { strides: scat.chunks(block).map(block_stride).collect(), block }
}

/// Constant stride of one scatter block, 0 if none. Singleton blocks are 1.
pub(crate) fn block_stride(chunk: &[isize]) -> isize {
    if chunk.len() <= 1 {
        return 1;
    }
    let s = chunk[1] - chunk[0];
    if s > 0 && chunk.windows(2).all(|w| w[1] - w[0] == s) {
        s
    } else {
        0
    }
}

fn min_max(scat: &[isize]) -> (isize, isize) {
    let mut lo = isize::MAX;
    let mut hi = isize::MIN;
    for &s in scat {
        lo = lo.min(s);
        hi = hi.max(s);
    }
    (lo, hi)
}

/// Which operand of the multiplication a tensor stands in for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatRole {
    A,
    B,
    C,
}

/// A tensor presented as a 2-D matrix addressed by scatter machinery.
///
/// `loc(i, j) = base + rscat[row_off + i] + cscat[col_off + j]`. Partitioning
/// adjusts only the offsets and extents; the vectors are shared.
pub struct BlockScatterMatrixView<'a, T> {
    data: &'a [T],
    base: usize,
    rows: usize,
    cols: usize,
    row_off: usize,
    col_off: usize,
    rscat: Arc<[isize]>,
    cscat: Arc<[isize]>,
    rbs: Arc<[isize]>,
    cbs: Arc<[isize]>,
    row_block: usize,
    col_block: usize,
}

impl<T> Clone for BlockScatterMatrixView<'_, T> {
    fn clone(&self) -> Self {
        BlockScatterMatrixView {
            data: self.data,
            base: self.base,
            rows: self.rows,
            cols: self.cols,
            row_off: self.row_off,
            col_off: self.col_off,
            rscat: self.rscat.clone(),
            cscat: self.cscat.clone(),
            rbs: self.rbs.clone(),
            cbs: self.cbs.clone(),
            row_block: self.row_block,
            col_block: self.col_block,
        }
    }
}

impl<'a, T> BlockScatterMatrixView<'a, T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_block(&self) -> usize {
        self.row_block
    }

    pub fn col_block(&self) -> usize {
        self.col_block
    }

    pub fn row_offset(&self) -> usize {
        self.row_off
    }

    pub fn col_offset(&self) -> usize {
        self.col_off
    }

    pub fn data(&self) -> &'a [T] {
        self.data
    }

    pub fn base(&self) -> usize {
        self.base
    }

    /// Full row scatter vector (indices are global, i.e. pre-partition).
    pub fn rscat(&self) -> &[isize] {
        &self.rscat
    }

    pub fn cscat(&self) -> &[isize] {
        &self.cscat
    }

    pub fn rbs(&self) -> &[isize] {
        &self.rbs
    }

    pub fn cbs(&self) -> &[isize] {
        &self.cbs
    }

    /// Buffer offset of view element (i, j).
    pub fn loc(&self, i: usize, j: usize) -> usize {
        assert!(i < self.rows && j < self.cols, "view index out of range");
        let off = self.base as isize + self.rscat[self.row_off + i] + self.cscat[self.col_off + j];
        off as usize
    }

    pub fn get(&self, i: usize, j: usize) -> T
    where
        T: Copy,
    {
        self.data[self.loc(i, j)]
    }

    /// Block-scatter entry covering local row `i` (0 means no constant stride).
    pub fn row_block_stride(&self, i: usize) -> isize {
        self.rbs[(self.row_off + i) / self.row_block]
    }

    pub fn col_block_stride(&self, j: usize) -> isize {
        self.cbs[(self.col_off + j) / self.col_block]
    }

    /// Sub-view sharing the scatter vectors, with adjusted offsets/extents.
    pub fn partition(&self, rows: Range<usize>, cols: Range<usize>) -> Result<Self> {
        if rows.start > rows.end
            || cols.start > cols.end
            || rows.end > self.rows
            || cols.end > self.cols
        {
            return Err(Error::RangeOutOfBounds {
                rows: (rows.start, rows.end),
                cols: (cols.start, cols.end),
                extent_rows: self.rows,
                extent_cols: self.cols,
            });
        }
        let mut sub = self.clone();
        sub.row_off = self.row_off + rows.start;
        sub.col_off = self.col_off + cols.start;
        sub.rows = rows.end - rows.start;
        sub.cols = cols.end - cols.start;
        Ok(sub)
    }
}

/// Presents `tensor` as the 2-D matrix it plays in the contraction:
/// A is n_I x n_P (blocked m_r x k_p), B is n_P x n_J (k_p x n_r),
/// C is n_I x n_J (m_r x n_r).
///
/// If `plan.swapped_ab` is set, pass the tensor that holds the *effective*
/// role (the original B for role A and vice versa).
pub fn matrify<'a, T>(
    tensor: &'a DenseTensor<T>,
    plan: &ContractionPlan,
    role: MatRole,
    cfg: &GemmConfig,
) -> Result<BlockScatterMatrixView<'a, T>> {
    let (row_dims, col_dims, row_block, col_block) = match role {
        MatRole::A => (plan.a_row_dims(), plan.a_col_dims(), cfg.m_r, cfg.k_p),
        MatRole::B => (plan.b_row_dims(), plan.b_col_dims(), cfg.k_p, cfg.n_r),
        MatRole::C => (plan.c_row_dims(), plan.c_col_dims(), cfg.m_r, cfg.n_r),
    };
    let rscat = compute_scatter(&row_dims)?;
    let cscat = compute_scatter(&col_dims)?;
    // Plan/tensor consistency: every addressable offset must be in bounds.
    if !rscat.is_empty() && !cscat.is_empty() {
        let (rlo, rhi) = min_max(&rscat);
        let (clo, chi) = min_max(&cscat);
        let lo = tensor.base() as isize + rlo + clo;
        let hi = tensor.base() as isize + rhi + chi;
        if lo < 0 || hi as usize >= tensor.data().len() {
            return Err(Error::BufferTooSmall {
                need: (hi + 1).max(0) as usize,
                have: tensor.data().len(),
            });
        }
    }
    let rbs = compute_block_scatter(&rscat, row_block).strides;
    let cbs = compute_block_scatter(&cscat, col_block).strides;
    Ok(BlockScatterMatrixView {
        data: tensor.data(),
        base: tensor.base(),
        rows: rscat.len(),
        cols: cscat.len(),
        row_off: 0,
        col_off: 0,
        rscat: rscat.into(),
        cscat: cscat.into(),
        rbs: rbs.into(),
        cbs: cbs.into(),
        row_block,
        col_block,
    })
}
