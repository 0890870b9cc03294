//! Packing kernels and the portable register-blocked micro-kernel.
//!
//! Packed panels store *slivers*: an A panel keeps m_r rows per sliver, a B
//! panel keeps n_r columns, both laid out so the micro-kernel reads one
//! contiguous width-sized group per depth step. Packing a sliver is broken
//! into width-block x depth-block micro-tiles; each micro-tile uses
//! constant-stride copy loops when the covering block-scatter entries are
//! valid and falls back to per-element scatter reads otherwise.
//!
//! The micro-kernel updates an m_r x n_r tile of C as
//! `C := beta*C` followed by `C += alpha*(a[p]*b[p])` for p ascending.
//! Every code path (fixed-size, general, buffered scatter update) performs
//! exactly that per-element operation sequence, which makes results bitwise
//! reproducible across blocking configurations and thread counts.

#![allow(clippy::too_many_arguments, clippy::needless_range_loop)]

use std::ops::Range;

use crate::error::{Error, Result};
use crate::layout::BlockScatterMatrixView;
use crate::scalar::Scalar;

/// Shape of a packed panel: `sliver_count` slivers of `sliver_width` x `depth`.
/// Element (w, p) of sliver s lives at `s*width*depth + p*width + w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PanelSpec {
    pub sliver_width: usize,
    pub depth: usize,
    pub sliver_count: usize,
}

impl PanelSpec {
    pub fn new(extent: usize, sliver_width: usize, depth: usize) -> Self {
        PanelSpec { sliver_width, depth, sliver_count: extent.div_ceil(sliver_width) }
    }

    pub fn buffer_len(&self) -> usize {
        self.sliver_count * self.sliver_width * self.depth
    }

    pub fn sliver(&self, s: usize) -> Range<usize> {
        let len = self.sliver_width * self.depth;
        s * len..(s + 1) * len
    }
}

/// Packs one width-block x depth-block micro-tile into `out` (width-major,
/// `width` elements per depth step), padding rows past `wscat.len()` with
/// zeros. `ws`/`ds` are the covering block-scatter entries (0 = no constant
/// stride).
///
/// # Safety
/// `out` must hold `dscat.len() * width` elements; every offset
/// `base + wscat[w] + dscat[p]` must be in bounds for `data`.
unsafe fn pack_micro_tile<T: Scalar>(
    data: *const T,
    base: isize,
    wscat: &[isize],
    ws: isize,
    dscat: &[isize],
    ds: isize,
    width: usize,
    out: *mut T,
) {
    let h = wscat.len();
    let d = dscat.len();
    match (ws > 0, ds > 0) {
        (true, true) => {
            let o = base + wscat[0] + dscat[0];
            for p in 0..d {
                let row = o + p as isize * ds;
                for w in 0..h {
                    *out.add(p * width + w) = *data.offset(row + w as isize * ws);
                }
            }
        }
        (true, false) => {
            for p in 0..d {
                let row = base + wscat[0] + dscat[p];
                for w in 0..h {
                    *out.add(p * width + w) = *data.offset(row + w as isize * ws);
                }
            }
        }
        (false, true) => {
            for w in 0..h {
                let col = base + wscat[w] + dscat[0];
                for p in 0..d {
                    *out.add(p * width + w) = *data.offset(col + p as isize * ds);
                }
            }
        }
        (false, false) => {
            for p in 0..d {
                for w in 0..h {
                    *out.add(p * width + w) = *data.offset(base + wscat[w] + dscat[p]);
                }
            }
        }
    }
    for p in 0..d {
        for w in h..width {
            *out.add(p * width + w) = T::ZERO;
        }
    }
}

/// Packs the slivers in `slivers` of a panel covering `w_len` width elements
/// and `d_len` depth elements. Scatter/block-scatter slices are panel-local
/// (entry 0 = panel origin, blocks aligned to the panel origin).
///
/// # Safety
/// `out` must hold `ceil(w_len/w_block)*w_block*d_len` elements and all
/// scatter offsets must be in bounds for `data`.
pub(crate) unsafe fn pack_panel_raw<T: Scalar>(
    data: *const T,
    base: isize,
    wscat: &[isize],
    wbs: &[isize],
    dscat: &[isize],
    dbs: &[isize],
    w_block: usize,
    d_block: usize,
    slivers: Range<usize>,
    out: *mut T,
) {
    let w_len = wscat.len();
    let d_len = dscat.len();
    for s in slivers {
        let w0 = s * w_block;
        let h = w_block.min(w_len - w0);
        let sliver_out = out.add(s * w_block * d_len);
        let mut p0 = 0;
        while p0 < d_len {
            let d = d_block.min(d_len - p0);
            pack_micro_tile(
                data,
                base,
                &wscat[w0..w0 + h],
                wbs[s],
                &dscat[p0..p0 + d],
                dbs[p0 / d_block],
                w_block,
                sliver_out.add(p0 * w_block),
            );
            p0 += d;
        }
    }
}

fn block_aligned(global_start: usize, block: usize) -> Result<()> {
    if !global_start.is_multiple_of(block) {
        return Err(Error::Unsupported("pack range must start on a block boundary"));
    }
    Ok(())
}

fn pack_ranges_ok(
    view_rows: usize,
    view_cols: usize,
    rows: &Range<usize>,
    cols: &Range<usize>,
) -> Result<()> {
    if rows.start > rows.end
        || cols.start > cols.end
        || rows.end > view_rows
        || cols.end > view_cols
    {
        return Err(Error::RangeOutOfBounds {
            rows: (rows.start, rows.end),
            cols: (cols.start, cols.end),
            extent_rows: view_rows,
            extent_cols: view_cols,
        });
    }
    Ok(())
}

/// Packs rows x depth of an A-side view (rows blocked by m_r, depth by k_p)
/// into sliver layout. Edge slivers are zero-padded to full width; a depth
/// tail shorter than k_p becomes one short micro-tile per sliver.
pub fn pack_a<T: Scalar>(
    view: &BlockScatterMatrixView<'_, T>,
    rows: Range<usize>,
    depth: Range<usize>,
    out: &mut [T],
) -> Result<PanelSpec> {
    pack_ranges_ok(view.rows(), view.cols(), &rows, &depth)?;
    let m_r = view.row_block();
    let k_p = view.col_block();
    let r0 = view.row_offset() + rows.start;
    let d0 = view.col_offset() + depth.start;
    block_aligned(r0, m_r)?;
    block_aligned(d0, k_p)?;
    let spec = PanelSpec::new(rows.len(), m_r, depth.len());
    if out.len() < spec.buffer_len() {
        return Err(Error::BufferTooSmall { need: spec.buffer_len(), have: out.len() });
    }
    unsafe {
        pack_panel_raw(
            view.data().as_ptr(),
            view.base() as isize,
            &view.rscat()[r0..r0 + rows.len()],
            &view.rbs()[r0 / m_r..],
            &view.cscat()[d0..d0 + depth.len()],
            &view.cbs()[d0 / k_p..],
            m_r,
            k_p,
            0..spec.sliver_count,
            out.as_mut_ptr(),
        );
    }
    Ok(spec)
}

/// Packs depth x cols of a B-side view (depth blocked by k_p, cols by n_r)
/// into sliver layout; mirror of [`pack_a`] with n_r-wide column slivers.
pub fn pack_b<T: Scalar>(
    view: &BlockScatterMatrixView<'_, T>,
    depth: Range<usize>,
    cols: Range<usize>,
    out: &mut [T],
) -> Result<PanelSpec> {
    pack_ranges_ok(view.rows(), view.cols(), &depth, &cols)?;
    let k_p = view.row_block();
    let n_r = view.col_block();
    let d0 = view.row_offset() + depth.start;
    let c0 = view.col_offset() + cols.start;
    block_aligned(d0, k_p)?;
    block_aligned(c0, n_r)?;
    let spec = PanelSpec::new(cols.len(), n_r, depth.len());
    if out.len() < spec.buffer_len() {
        return Err(Error::BufferTooSmall { need: spec.buffer_len(), have: out.len() });
    }
    unsafe {
        pack_panel_raw(
            view.data().as_ptr(),
            view.base() as isize,
            &view.cscat()[c0..c0 + cols.len()],
            &view.cbs()[c0 / n_r..],
            &view.rscat()[d0..d0 + depth.len()],
            &view.rbs()[d0 / k_p..],
            n_r,
            k_p,
            0..spec.sliver_count,
            out.as_mut_ptr(),
        );
    }
    Ok(spec)
}

/// Output tile described by a buffer offset and row/column strides.
pub struct TileMut<'a, T> {
    pub buf: &'a mut [T],
    pub offset: usize,
    pub row_stride: isize,
    pub col_stride: isize,
}

/// `C_tile := alpha*(a . b) + beta*C_tile` over a full m_r x n_r tile.
///
/// `a` is an m_r-major packed sliver (`a[p*m_r + i]`), `b` an n_r-major one.
/// Accumulation runs over p in ascending order; repeated invocation on equal
/// inputs is bitwise reproducible.
pub fn microkernel<T: Scalar>(
    k: usize,
    alpha: T,
    a: &[T],
    b: &[T],
    beta: T,
    c: TileMut<'_, T>,
    m_r: usize,
    n_r: usize,
) -> Result<()> {
    if a.len() < k * m_r {
        return Err(Error::BufferTooSmall { need: k * m_r, have: a.len() });
    }
    if b.len() < k * n_r {
        return Err(Error::BufferTooSmall { need: k * n_r, have: b.len() });
    }
    if m_r == 0 || n_r == 0 {
        return Ok(());
    }
    let corner = |i: usize, j: usize| {
        c.offset as isize + i as isize * c.row_stride + j as isize * c.col_stride
    };
    let mut lo = isize::MAX;
    let mut hi = isize::MIN;
    for (i, j) in [(0, 0), (m_r - 1, 0), (0, n_r - 1), (m_r - 1, n_r - 1)] {
        lo = lo.min(corner(i, j));
        hi = hi.max(corner(i, j));
    }
    if lo < 0 || hi as usize >= c.buf.len() {
        return Err(Error::BufferTooSmall { need: (hi + 1).max(0) as usize, have: c.buf.len() });
    }
    unsafe {
        microkernel_raw(
            k,
            alpha,
            a.as_ptr(),
            b.as_ptr(),
            beta,
            c.buf.as_mut_ptr().add(c.offset),
            c.row_stride,
            c.col_stride,
            m_r,
            n_r,
        );
    }
    Ok(())
}

/// # Safety
/// `a`/`b` must hold `k*m_r` / `k*n_r` elements; every
/// `c + i*rs + j*cs` for i < m_r, j < n_r must be valid for read/write.
pub(crate) unsafe fn microkernel_raw<T: Scalar>(
    k: usize,
    alpha: T,
    a: *const T,
    b: *const T,
    beta: T,
    c: *mut T,
    rs: isize,
    cs: isize,
    m_r: usize,
    n_r: usize,
) {
    if (m_r, n_r) == (6, 8) {
        kernel_fixed::<T, 6, 8>(k, alpha, a, b, beta, c, rs, cs);
    } else if (m_r, n_r) == (4, 4) {
        kernel_fixed::<T, 4, 4>(k, alpha, a, b, beta, c, rs, cs);
    } else {
        kernel_general(k, alpha, a, b, beta, c, rs, cs, m_r, n_r);
    }
}

unsafe fn kernel_fixed<T: Scalar, const MR: usize, const NR: usize>(
    k: usize,
    alpha: T,
    a: *const T,
    b: *const T,
    beta: T,
    c: *mut T,
    rs: isize,
    cs: isize,
) {
    let mut acc = [[T::ZERO; NR]; MR];
    if beta != T::ZERO {
        for (i, row) in acc.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                let v = *c.offset(i as isize * rs + j as isize * cs);
                *slot = if beta == T::ONE { v } else { beta * v };
            }
        }
    }
    if alpha == T::ONE {
        for p in 0..k {
            let ap = a.add(p * MR);
            let bp = b.add(p * NR);
            for (i, row) in acc.iter_mut().enumerate() {
                let av = *ap.add(i);
                for (j, slot) in row.iter_mut().enumerate() {
                    *slot += av * *bp.add(j);
                }
            }
        }
    } else {
        for p in 0..k {
            let ap = a.add(p * MR);
            let bp = b.add(p * NR);
            for (i, row) in acc.iter_mut().enumerate() {
                let av = *ap.add(i);
                for (j, slot) in row.iter_mut().enumerate() {
                    *slot += alpha * (av * *bp.add(j));
                }
            }
        }
    }
    for (i, row) in acc.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            *c.offset(i as isize * rs + j as isize * cs) = v;
        }
    }
}

unsafe fn kernel_general<T: Scalar>(
    k: usize,
    alpha: T,
    a: *const T,
    b: *const T,
    beta: T,
    c: *mut T,
    rs: isize,
    cs: isize,
    m_r: usize,
    n_r: usize,
) {
    for i in 0..m_r {
        for j in 0..n_r {
            let p = c.offset(i as isize * rs + j as isize * cs);
            if beta == T::ZERO {
                *p = T::ZERO;
            } else if beta != T::ONE {
                *p = beta * *p;
            }
        }
    }
    if alpha == T::ONE {
        for p in 0..k {
            let ap = a.add(p * m_r);
            let bp = b.add(p * n_r);
            for j in 0..n_r {
                let bv = *bp.add(j);
                for i in 0..m_r {
                    *c.offset(i as isize * rs + j as isize * cs) += *ap.add(i) * bv;
                }
            }
        }
    } else {
        for p in 0..k {
            let ap = a.add(p * m_r);
            let bp = b.add(p * n_r);
            for j in 0..n_r {
                let bv = *bp.add(j);
                for i in 0..m_r {
                    *c.offset(i as isize * rs + j as isize * cs) += alpha * (*ap.add(i) * bv);
                }
            }
        }
    }
}

/// Output tile of a scatter-addressed C: `h = rscat.len()` rows and
/// `w = cscat.len()` cols (h <= m_r, w <= n_r for edge tiles), with the
/// covering block-scatter entries `rbs`/`cbs`.
pub struct ScatterTileMut<'a, T> {
    pub buf: &'a mut [T],
    pub base: usize,
    pub rscat: &'a [isize],
    pub cscat: &'a [isize],
    pub rbs: isize,
    pub cbs: isize,
}

/// Micro-kernel update through a scatter layout.
///
/// Full tiles whose row and column block strides are both valid go straight
/// to [`microkernel`] with those strides. Anything else (invalid stride or a
/// partial edge tile) is gathered into an m_r x n_r buffer, updated there
/// with the identical operation sequence, and scattered back to the in-range
/// elements only.
pub fn microkernel_scatter_update<T: Scalar>(
    k: usize,
    alpha: T,
    a: &[T],
    b: &[T],
    beta: T,
    c: ScatterTileMut<'_, T>,
    m_r: usize,
    n_r: usize,
    scratch: &mut Vec<T>,
) -> Result<()> {
    let h = c.rscat.len();
    let w = c.cscat.len();
    if h > m_r || w > n_r {
        return Err(Error::BufferTooSmall { need: m_r * n_r, have: h * w });
    }
    if a.len() < k * m_r {
        return Err(Error::BufferTooSmall { need: k * m_r, have: a.len() });
    }
    if b.len() < k * n_r {
        return Err(Error::BufferTooSmall { need: k * n_r, have: b.len() });
    }
    for &r in c.rscat {
        for &s in c.cscat {
            let off = c.base as isize + r + s;
            if off < 0 || off as usize >= c.buf.len() {
                return Err(Error::BufferTooSmall {
                    need: off.max(0) as usize + 1,
                    have: c.buf.len(),
                });
            }
        }
    }
    scratch.resize(m_r * n_r, T::ZERO);
    unsafe {
        scatter_update_raw(
            k,
            alpha,
            a.as_ptr(),
            b.as_ptr(),
            beta,
            c.buf.as_mut_ptr(),
            c.base as isize,
            c.rscat,
            c.cscat,
            c.rbs,
            c.cbs,
            m_r,
            n_r,
            scratch.as_mut_ptr(),
        );
    }
    Ok(())
}

/// # Safety
/// All `cdata + cbase + rscat[i] + cscat[j]` must be valid for read/write;
/// `a`/`b` sized as for [`microkernel_raw`]; `scratch` holds `m_r*n_r`.
pub(crate) unsafe fn scatter_update_raw<T: Scalar>(
    k: usize,
    alpha: T,
    a: *const T,
    b: *const T,
    beta: T,
    cdata: *mut T,
    cbase: isize,
    rscat: &[isize],
    cscat: &[isize],
    rbs: isize,
    cbs: isize,
    m_r: usize,
    n_r: usize,
    scratch: *mut T,
) {
    let h = rscat.len();
    let w = cscat.len();
    if h == m_r && w == n_r && rbs > 0 && cbs > 0 {
        let c0 = cdata.offset(cbase + rscat[0] + cscat[0]);
        microkernel_raw(k, alpha, a, b, beta, c0, rbs, cbs, m_r, n_r);
        return;
    }
    if beta != T::ZERO {
        for (j, &sj) in cscat.iter().enumerate() {
            for (i, &si) in rscat.iter().enumerate() {
                *scratch.add(j * m_r + i) = *cdata.offset(cbase + si + sj);
            }
        }
    }
    microkernel_raw(k, alpha, a, b, beta, scratch, 1, m_r as isize, m_r, n_r);
    for (j, &sj) in cscat.iter().enumerate() {
        for (i, &si) in rscat.iter().enumerate() {
            *cdata.offset(cbase + si + sj) = *scratch.add(j * m_r + i);
        }
    }
}
