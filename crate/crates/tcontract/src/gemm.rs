//! The five-loop blocked multiplication pipeline over tensor-matrix views.
//!
//! Loop structure (outermost first): partition columns by n_c, depth by k_c
//! (serial), pack the B panel, partition rows by m_c, pack the A panel,
//! build the C scatter for the macro-block, then walk n_r x m_r micro-tiles
//! into the micro-kernel. Scatter vectors are materialized lazily per panel
//! into reusable arenas, never for whole tensors.
//!
//! The driver is SPMD: every thread of a communicator calls [`gemm`] with
//! the same arguments and cooperates through barriers. The k_c loop is never
//! split across threads, which pins each C element's accumulation order and
//! makes results bitwise independent of the thread count and the blocking
//! configuration.

use std::cell::UnsafeCell;
use std::marker::PhantomData;

use crate::config::GemmConfig;
use crate::error::{Error, Result};
use crate::kernels::{pack_panel_raw, scatter_update_raw, PanelSpec};
use crate::layout::{block_stride, fill_scatter, for_each_offset};
use crate::parallel::{assign_range, default_plan, ParallelismPlan, ThreadCommunicator};
use crate::scalar::Scalar;
use crate::tensor::DenseTensor;

fn checked_extent(dims: &[(usize, isize)]) -> Result<usize> {
    dims.iter().try_fold(1usize, |acc, &(l, _)| acc.checked_mul(l).ok_or(Error::SizeOverflow))
}

fn bounds_ok(
    len: usize,
    base: usize,
    row_dims: &[(usize, isize)],
    col_dims: &[(usize, isize)],
    numel: usize,
) -> Result<()> {
    if numel == 0 {
        return Ok(());
    }
    let mut lo = base as isize;
    let mut hi = base as isize;
    for &(l, s) in row_dims.iter().chain(col_dims) {
        if l == 0 {
            continue;
        }
        let span = (l as isize - 1) * s;
        if span >= 0 {
            hi += span;
        } else {
            lo += span;
        }
    }
    if lo < 0 || hi as usize >= len {
        return Err(Error::BufferTooSmall { need: (hi + 1).max(0) as usize, have: len });
    }
    Ok(())
}

/// Read-only tensor-matrix view: the row index linearizes `row_dims`
/// colexicographically, the column index `col_dims`; element offsets are
/// `base + scatter(row) + scatter(col)`. A plain strided matrix is the
/// one-dimension-per-bundle special case.
#[derive(Clone)]
pub struct MatRef<'a, T> {
    data: &'a [T],
    base: usize,
    row_dims: Vec<(usize, isize)>,
    col_dims: Vec<(usize, isize)>,
    rows: usize,
    cols: usize,
}

impl<'a, T: Scalar> MatRef<'a, T> {
    pub fn new(
        data: &'a [T],
        base: usize,
        row_dims: Vec<(usize, isize)>,
        col_dims: Vec<(usize, isize)>,
    ) -> Result<Self> {
        let rows = checked_extent(&row_dims)?;
        let cols = checked_extent(&col_dims)?;
        let numel = rows.checked_mul(cols).ok_or(Error::SizeOverflow)?;
        bounds_ok(data.len(), base, &row_dims, &col_dims, numel)?;
        Ok(MatRef { data, base, row_dims, col_dims, rows, cols })
    }

    /// Plain strided matrix view.
    pub fn from_matrix(
        data: &'a [T],
        rows: usize,
        cols: usize,
        row_stride: isize,
        col_stride: isize,
        base: usize,
    ) -> Result<Self> {
        Self::new(data, base, vec![(rows, row_stride)], vec![(cols, col_stride)])
    }

    /// View of a tensor along two dimension bundles.
    pub fn from_tensor(
        t: &'a DenseTensor<T>,
        row_dims: Vec<(usize, isize)>,
        col_dims: Vec<(usize, isize)>,
    ) -> Result<Self> {
        Self::new(t.data(), t.base(), row_dims, col_dims)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

/// Mutable tensor-matrix view of the output.
///
/// The view is shared by every rank of the SPMD team, so it carries a raw
/// pointer internally; all mutation happens inside [`gemm`] on disjoint
/// micro-tiles, fenced by communicator barriers. Constructing one requires a
/// `&mut` borrow, which keeps the data exclusively owned for the view's
/// lifetime.
pub struct MatMut<'a, T> {
    ptr: *mut T,
    len: usize,
    base: usize,
    row_dims: Vec<(usize, isize)>,
    col_dims: Vec<(usize, isize)>,
    rows: usize,
    cols: usize,
    _marker: PhantomData<&'a mut [T]>,
}

unsafe impl<T: Send> Send for MatMut<'_, T> {}
unsafe impl<T: Sync> Sync for MatMut<'_, T> {}

impl<'a, T: Scalar> MatMut<'a, T> {
    pub fn new(
        data: &'a mut [T],
        base: usize,
        row_dims: Vec<(usize, isize)>,
        col_dims: Vec<(usize, isize)>,
    ) -> Result<Self> {
        let rows = checked_extent(&row_dims)?;
        let cols = checked_extent(&col_dims)?;
        let numel = rows.checked_mul(cols).ok_or(Error::SizeOverflow)?;
        bounds_ok(data.len(), base, &row_dims, &col_dims, numel)?;
        Ok(MatMut {
            ptr: data.as_mut_ptr(),
            len: data.len(),
            base,
            row_dims,
            col_dims,
            rows,
            cols,
            _marker: PhantomData,
        })
    }

    pub fn from_matrix(
        data: &'a mut [T],
        rows: usize,
        cols: usize,
        row_stride: isize,
        col_stride: isize,
        base: usize,
    ) -> Result<Self> {
        Self::new(data, base, vec![(rows, row_stride)], vec![(cols, col_stride)])
    }

    pub fn from_tensor(
        t: &'a mut DenseTensor<T>,
        row_dims: Vec<(usize, isize)>,
        col_dims: Vec<(usize, isize)>,
    ) -> Result<Self> {
        let base = t.base();
        Self::new(t.data_mut(), base, row_dims, col_dims)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

/// Reusable per-group workspace: one packed panel plus the scatter and
/// block-scatter entries for the panel's two dimensions, and the C scatter
/// along the panel's width dimension (rows for A panels, cols for B panels).
///
/// Mutation protocol: the group leader fills scatter vectors, a barrier
/// publishes them, the group packs disjoint slivers, a barrier publishes the
/// panel; reads happen strictly between barriers. That protocol is what
/// justifies the `Sync` impl.
struct PanelArena<T> {
    elems: UnsafeCell<Box<[CacheLine]>>,
    wscat: UnsafeCell<Box<[isize]>>,
    wbs: UnsafeCell<Box<[isize]>>,
    dscat: UnsafeCell<Box<[isize]>>,
    dbs: UnsafeCell<Box<[isize]>>,
    c_scat: UnsafeCell<Box<[isize]>>,
    c_bs: UnsafeCell<Box<[isize]>>,
    _marker: PhantomData<T>,
}

/// Pack buffer backing storage, cache-line aligned.
#[repr(C, align(64))]
#[derive(Clone, Copy)]
struct CacheLine([u8; 64]);

unsafe impl<T: Send> Sync for PanelArena<T> {}
unsafe impl<T: Send> Send for PanelArena<T> {}

impl<T: Scalar> PanelArena<T> {
    fn new(width: usize, depth: usize, w_block: usize, d_block: usize) -> Self {
        let zeroed = |n: usize| vec![0isize; n].into_boxed_slice();
        let bytes = width * depth * std::mem::size_of::<T>();
        let lines = vec![CacheLine([0; 64]); bytes.div_ceil(64)].into_boxed_slice();
        PanelArena {
            elems: UnsafeCell::new(lines),
            wscat: UnsafeCell::new(zeroed(width)),
            wbs: UnsafeCell::new(zeroed(width.div_ceil(w_block))),
            dscat: UnsafeCell::new(zeroed(depth)),
            dbs: UnsafeCell::new(zeroed(depth.div_ceil(d_block))),
            c_scat: UnsafeCell::new(zeroed(width)),
            c_bs: UnsafeCell::new(zeroed(width.div_ceil(w_block))),
            _marker: PhantomData,
        }
    }

    fn for_a(cfg: &GemmConfig) -> Self {
        Self::new(cfg.m_c, cfg.k_c, cfg.m_r, cfg.k_p)
    }

    fn for_b(cfg: &GemmConfig) -> Self {
        Self::new(cfg.n_c, cfg.k_c, cfg.n_r, cfg.k_p)
    }

    unsafe fn elems_ptr(&self) -> *mut T {
        (*self.elems.get()).as_mut_ptr() as *mut T
    }

    #[allow(clippy::mut_from_ref, clippy::type_complexity)]
    unsafe fn slices_mut(
        &self,
    ) -> (&mut [isize], &mut [isize], &mut [isize], &mut [isize], &mut [isize], &mut [isize]) {
        (
            &mut *self.wscat.get(),
            &mut *self.wbs.get(),
            &mut *self.dscat.get(),
            &mut *self.dbs.get(),
            &mut *self.c_scat.get(),
            &mut *self.c_bs.get(),
        )
    }

    unsafe fn wscat(&self, len: usize) -> &[isize] {
        let all: &[isize] = &*self.wscat.get();
        &all[..len]
    }

    unsafe fn wbs(&self) -> &[isize] {
        &*self.wbs.get()
    }

    unsafe fn dscat(&self, len: usize) -> &[isize] {
        let all: &[isize] = &*self.dscat.get();
        &all[..len]
    }

    unsafe fn dbs(&self) -> &[isize] {
        &*self.dbs.get()
    }

    unsafe fn c_scat(&self) -> &[isize] {
        &*self.c_scat.get()
    }

    unsafe fn c_bs(&self) -> &[isize] {
        &*self.c_bs.get()
    }
}

/// Workspace sizes implied by a configuration and a parallelism plan, per
/// packing group: panel element counts, scatter offset entries and
/// block-scatter entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WorkspaceSpec {
    /// Number of A panels (one per m_c-loop group).
    pub a_panels: usize,
    pub a_panel_elems: usize,
    pub a_panel_offsets: usize,
    pub a_panel_block_entries: usize,
    /// Number of B panels (one per n_c-loop group).
    pub b_panels: usize,
    pub b_panel_elems: usize,
    pub b_panel_offsets: usize,
    pub b_panel_block_entries: usize,
    /// C scatter arena: row + column offset entries per group pair.
    pub c_arena_offsets: usize,
    pub c_arena_block_entries: usize,
}

/// Exact workspace footprint of [`gemm`] for the given configuration and
/// parallelism plan.
pub fn required_workspace(cfg: &GemmConfig, plan: &ParallelismPlan) -> WorkspaceSpec {
    WorkspaceSpec {
        a_panels: plan.n_c_ways * plan.m_c_ways,
        a_panel_elems: cfg.m_c * cfg.k_c,
        a_panel_offsets: cfg.m_c + cfg.k_c,
        a_panel_block_entries: cfg.m_c / cfg.m_r + cfg.k_c / cfg.k_p,
        b_panels: plan.n_c_ways,
        b_panel_elems: cfg.k_c * cfg.n_c,
        b_panel_offsets: cfg.k_c + cfg.n_c,
        b_panel_block_entries: cfg.k_c / cfg.k_p + cfg.n_c / cfg.n_r,
        c_arena_offsets: cfg.m_c + cfg.n_c,
        c_arena_block_entries: cfg.m_c / cfg.m_r + cfg.n_c / cfg.n_r,
    }
}

/// `C := alpha*A*B + beta*C` over tensor-matrix views.
///
/// SPMD: call from every rank of `comm` with identical arguments. The
/// extents must conform (`A: m x k`, `B: k x n`, `C: m x n`). Accumulation
/// over the contracted dimension is strictly serial and ascending, so the
/// output is bitwise identical for any valid configuration and team size.
pub fn gemm<T: Scalar>(
    alpha: T,
    a: &MatRef<'_, T>,
    b: &MatRef<'_, T>,
    beta: T,
    c: &MatMut<'_, T>,
    cfg: &GemmConfig,
    comm: &ThreadCommunicator,
) -> Result<()> {
    cfg.validate()?;
    let (m, n) = (c.rows, c.cols);
    let k = a.cols;
    if a.rows != m || b.rows != k || b.cols != n {
        return Err(Error::ShapeMismatch {
            am: a.rows,
            ak: a.cols,
            bk: b.rows,
            bn: b.cols,
            cm: m,
            cn: n,
        });
    }
    if m == 0 || n == 0 {
        return Ok(());
    }
    if k == 0 || alpha == T::ZERO {
        scale_c(beta, c, comm);
        return Ok(());
    }
    let plan = default_plan(comm.size(), m, n, cfg);
    run_pipeline(alpha, a, b, beta, c, cfg, &plan, comm)
}

/// `C := beta*C`, split across the team by rows.
fn scale_c<T: Scalar>(beta: T, c: &MatMut<'_, T>, comm: &ThreadCommunicator) {
    if beta == T::ONE {
        comm.barrier();
        return;
    }
    let rows = comm.assign_range(c.rows, 1);
    for_each_offset(&c.row_dims, rows.start, rows.len(), |roff| {
        for_each_offset(&c.col_dims, 0, c.cols, |coff| {
            let off = c.base as isize + roff + coff;
            debug_assert!(off >= 0 && (off as usize) < c.len);
            unsafe {
                let p = c.ptr.offset(off);
                *p = if beta == T::ZERO { T::ZERO } else { beta * *p };
            }
        });
    });
    comm.barrier();
}

#[allow(clippy::too_many_arguments)]
fn run_pipeline<T: Scalar>(
    alpha: T,
    a: &MatRef<'_, T>,
    b: &MatRef<'_, T>,
    beta: T,
    c: &MatMut<'_, T>,
    cfg: &GemmConfig,
    plan: &ParallelismPlan,
    comm: &ThreadCommunicator,
) -> Result<()> {
    let (m, n, k) = (c.rows, c.cols, a.cols);
    let (m_c, n_c, k_c) = (cfg.m_c, cfg.n_c, cfg.k_c);
    let (m_r, n_r, k_p) = (cfg.m_r, cfg.n_r, cfg.k_p);

    let jc_comm = comm.split(plan.n_c_ways)?;
    let ic_comm = jc_comm.split(plan.m_c_ways)?;
    let jr_comm = ic_comm.split(plan.n_r_ways)?;

    let n_range = assign_range(plan.n_c_ways, comm.group_index(plan.n_c_ways), n, n_r);
    let m_range = assign_range(plan.m_c_ways, jc_comm.group_index(plan.m_c_ways), m, m_r);
    let jr_gid = ic_comm.group_index(plan.n_r_ways);
    let ir_gid = jr_comm.group_index(plan.m_r_ways);

    let b_arena = jc_comm.leader_share(|| PanelArena::<T>::for_b(cfg));
    let a_arena = ic_comm.leader_share(|| PanelArena::<T>::for_a(cfg));
    let mut scratch = vec![T::ZERO; m_r * n_r];

    let mut jc = n_range.start;
    while jc < n_range.end {
        let n_blk = n_c.min(n_range.end - jc);
        let mut pc = 0;
        let mut kb = 0;
        while pc < k {
            let k_blk = k_c.min(k - pc);
            let beta_eff = if kb == 0 { beta } else { T::ONE };

            // Leader fills the B panel scatter (and, once per jc block, the
            // C column scatter); the barrier publishes it to the group.
            if jc_comm.rank() == 0 {
                unsafe {
                    let (wscat, wbs, dscat, dbs, c_scat, c_bs) = b_arena.slices_mut();
                    fill_scatter(&b.col_dims, jc, &mut wscat[..n_blk]);
                    for (i, chunk) in wscat[..n_blk].chunks(n_r).enumerate() {
                        wbs[i] = block_stride(chunk);
                    }
                    fill_scatter(&b.row_dims, pc, &mut dscat[..k_blk]);
                    for (i, chunk) in dscat[..k_blk].chunks(k_p).enumerate() {
                        dbs[i] = block_stride(chunk);
                    }
                    if kb == 0 {
                        fill_scatter(&c.col_dims, jc, &mut c_scat[..n_blk]);
                        for (i, chunk) in c_scat[..n_blk].chunks(n_r).enumerate() {
                            c_bs[i] = block_stride(chunk);
                        }
                    }
                }
            }
            jc_comm.barrier();

            // Cooperative pack of the k_blk x n_blk B panel.
            let spec_b = PanelSpec::new(n_blk, n_r, k_blk);
            let my_slivers = jc_comm.assign_range(spec_b.sliver_count, 1);
            unsafe {
                pack_panel_raw(
                    b.data.as_ptr(),
                    b.base as isize,
                    b_arena.wscat(n_blk),
                    b_arena.wbs(),
                    b_arena.dscat(k_blk),
                    b_arena.dbs(),
                    n_r,
                    k_p,
                    my_slivers,
                    b_arena.elems_ptr(),
                );
            }
            jc_comm.barrier();

            let mut ic = m_range.start;
            while ic < m_range.end {
                let m_blk = m_c.min(m_range.end - ic);

                if ic_comm.rank() == 0 {
                    unsafe {
                        let (wscat, wbs, dscat, dbs, c_scat, c_bs) = a_arena.slices_mut();
                        fill_scatter(&a.row_dims, ic, &mut wscat[..m_blk]);
                        for (i, chunk) in wscat[..m_blk].chunks(m_r).enumerate() {
                            wbs[i] = block_stride(chunk);
                        }
                        fill_scatter(&a.col_dims, pc, &mut dscat[..k_blk]);
                        for (i, chunk) in dscat[..k_blk].chunks(k_p).enumerate() {
                            dbs[i] = block_stride(chunk);
                        }
                        fill_scatter(&c.row_dims, ic, &mut c_scat[..m_blk]);
                        for (i, chunk) in c_scat[..m_blk].chunks(m_r).enumerate() {
                            c_bs[i] = block_stride(chunk);
                        }
                    }
                }
                ic_comm.barrier();

                let spec_a = PanelSpec::new(m_blk, m_r, k_blk);
                let my_slivers = ic_comm.assign_range(spec_a.sliver_count, 1);
                unsafe {
                    pack_panel_raw(
                        a.data.as_ptr(),
                        a.base as isize,
                        a_arena.wscat(m_blk),
                        a_arena.wbs(),
                        a_arena.dscat(k_blk),
                        a_arena.dbs(),
                        m_r,
                        k_p,
                        my_slivers,
                        a_arena.elems_ptr(),
                    );
                }
                ic_comm.barrier();

                let jr_range = assign_range(plan.n_r_ways, jr_gid, n_blk, n_r);
                let ir_range = assign_range(plan.m_r_ways, ir_gid, m_blk, m_r);
                unsafe {
                    let a_elems = a_arena.elems_ptr();
                    let b_elems = b_arena.elems_ptr();
                    let c_rscat = a_arena.c_scat();
                    let c_rbs = a_arena.c_bs();
                    let c_cscat = b_arena.c_scat();
                    let c_cbs = b_arena.c_bs();
                    let mut jr = jr_range.start;
                    while jr < jr_range.end {
                        let w = n_r.min(jr_range.end - jr);
                        let mut ir = ir_range.start;
                        while ir < ir_range.end {
                            let h = m_r.min(ir_range.end - ir);
                            scatter_update_raw(
                                k_blk,
                                alpha,
                                a_elems.add((ir / m_r) * m_r * k_blk),
                                b_elems.add((jr / n_r) * n_r * k_blk),
                                beta_eff,
                                c.ptr,
                                c.base as isize,
                                &c_rscat[ir..ir + h],
                                &c_cscat[jr..jr + w],
                                c_rbs[ir / m_r],
                                c_cbs[jr / n_r],
                                m_r,
                                n_r,
                                scratch.as_mut_ptr(),
                            );
                            ir += m_r;
                        }
                        jr += n_r;
                    }
                }
                // Protects the A panel and the C row scatter before reuse.
                ic_comm.barrier();
                ic += m_blk;
            }
            // Protects the B panel and the C column scatter before reuse.
            jc_comm.barrier();
            pc += k_blk;
            kb += 1;
        }
        jc += n_blk;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    #![allow(clippy::too_many_arguments)]

    use super::*;
    use crate::parallel::run_team;

    fn naive_matmul(
        alpha: f64,
        a: &[f64],
        b: &[f64],
        beta: f64,
        c: &mut [f64],
        m: usize,
        n: usize,
        k: usize,
    ) {
        // column-major m x k, k x n, m x n
        for j in 0..n {
            for i in 0..m {
                let mut acc = if beta == 0.0 { 0.0 } else { beta * c[i + j * m] };
                for p in 0..k {
                    acc += alpha * (a[i + p * m] * b[p + j * k]);
                }
                c[i + j * m] = acc;
            }
        }
    }

    fn run_gemm(
        alpha: f64,
        a: &[f64],
        b: &[f64],
        beta: f64,
        c: &mut [f64],
        m: usize,
        n: usize,
        k: usize,
        cfg: &GemmConfig,
        threads: usize,
    ) {
        let av = MatRef::from_matrix(a, m, k, 1, m as isize, 0).unwrap();
        let bv = MatRef::from_matrix(b, k, n, 1, k as isize, 0).unwrap();
        let cv = MatMut::from_matrix(c, m, n, 1, m as isize, 0).unwrap();
        let results = run_team(threads, |comm| gemm(alpha, &av, &bv, beta, &cv, cfg, comm));
        for r in results {
            r.unwrap();
        }
    }

    fn pseudo(data: &mut [f64], seed: u64) {
        let mut state = seed.max(1);
        for x in data.iter_mut() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            *x = (state as f64 / u64::MAX as f64) - 0.5;
        }
    }

    #[test]
    fn all_ones_two_cubed() {
        let a = vec![1.0; 4];
        let b = vec![1.0; 4];
        let mut c = vec![0.0; 4];
        run_gemm(1.0, &a, &b, 0.0, &mut c, 2, 2, 2, &GemmConfig::default(), 1);
        assert_eq!(c, vec![2.0; 4]);
    }

    #[test]
    fn empty_inner_dimension_only_scales_c() {
        let a: Vec<f64> = vec![];
        let b: Vec<f64> = vec![];
        let mut c = vec![3.0; 6];
        run_gemm(1.0, &a, &b, 0.5, &mut c, 2, 3, 0, &GemmConfig::default(), 1);
        assert_eq!(c, vec![1.5; 6]);
        // beta = 0 with NaN garbage in C must still zero it
        let mut c = vec![f64::NAN; 6];
        run_gemm(1.0, &a, &b, 0.0, &mut c, 2, 3, 0, &GemmConfig::default(), 2);
        assert_eq!(c, vec![0.0; 6]);
    }

    #[test]
    fn alpha_zero_skips_the_product() {
        let a = vec![f64::NAN; 4];
        let b = vec![f64::NAN; 4];
        let mut c = vec![2.0; 4];
        run_gemm(0.0, &a, &b, 1.5, &mut c, 2, 2, 2, &GemmConfig::default(), 1);
        assert_eq!(c, vec![3.0; 4]);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = vec![0.0; 6];
        let b = vec![0.0; 8];
        let mut c = vec![0.0; 6];
        let av = MatRef::from_matrix(&a, 2, 3, 1, 2, 0).unwrap();
        let bv = MatRef::from_matrix(&b, 4, 2, 1, 4, 0).unwrap();
        let cv = MatMut::from_matrix(&mut c, 2, 3, 1, 2, 0).unwrap();
        let comm = ThreadCommunicator::solo();
        let err = gemm(1.0, &av, &bv, 0.0, &cv, &GemmConfig::default(), &comm).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { .. }));
    }

    #[test]
    fn matches_naive_on_awkward_sizes() {
        let cfg = GemmConfig::new(12, 16, 8, 6, 8, 4).unwrap();
        for (m, n, k) in [(1, 1, 1), (6, 8, 4), (7, 9, 5), (13, 17, 11), (25, 30, 19)] {
            let mut a = vec![0.0; m * k];
            let mut b = vec![0.0; k * n];
            let mut c0 = vec![0.0; m * n];
            pseudo(&mut a, 11 * m as u64 + 3);
            pseudo(&mut b, 17 * n as u64 + 5);
            pseudo(&mut c0, 23 * k as u64 + 7);

            let mut got = c0.clone();
            run_gemm(0.5, &a, &b, -1.0, &mut got, m, n, k, &cfg, 1);
            let mut want = c0.clone();
            naive_matmul(0.5, &a, &b, -1.0, &mut want, m, n, k);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() <= 1e-13 * w.abs().max(1.0), "m={m} n={n} k={k}");
            }
        }
    }

    #[test]
    fn output_is_bitwise_independent_of_cfg_and_threads() {
        let (m, n, k) = (23, 29, 31);
        let mut a = vec![0.0; m * k];
        let mut b = vec![0.0; k * n];
        let mut c0 = vec![0.0; m * n];
        pseudo(&mut a, 101);
        pseudo(&mut b, 202);
        pseudo(&mut c0, 303);

        let configs = [
            GemmConfig::default(),
            GemmConfig::new(1, 1, 1, 1, 1, 1).unwrap(),
            GemmConfig::new(10, 14, 21, 5, 7, 3).unwrap(),
            GemmConfig::new(12, 16, 8, 6, 8, 4).unwrap(),
        ];
        let mut reference: Option<Vec<f64>> = None;
        for cfg in &configs {
            for threads in [1usize, 2, 4] {
                let mut c = c0.clone();
                run_gemm(0.75, &a, &b, 0.25, &mut c, m, n, k, cfg, threads);
                match &reference {
                    None => reference = Some(c),
                    Some(r) => {
                        assert_eq!(&c, r, "cfg {cfg:?} threads {threads} diverged from reference")
                    }
                }
            }
        }
    }

    #[test]
    fn required_workspace_matches_the_documented_sizes() {
        let cfg = GemmConfig::default();
        let ws = required_workspace(&cfg, &ParallelismPlan::serial());
        assert_eq!(ws.a_panels, 1);
        assert_eq!(ws.a_panel_elems, 72 * 256);
        assert_eq!(ws.a_panel_offsets, 72 + 256);
        assert_eq!(ws.b_panels, 1);
        assert_eq!(ws.b_panel_elems, 256 * 4080);
        assert_eq!(ws.b_panel_offsets, 256 + 4080);
        assert_eq!(ws.c_arena_offsets, 72 + 4080);
        assert_eq!(ws.c_arena_block_entries, 72 / 6 + 4080 / 8);

        let minimal = GemmConfig::new(1, 1, 1, 1, 1, 1).unwrap();
        let ws = required_workspace(&minimal, &ParallelismPlan::serial());
        assert_eq!((ws.a_panel_elems, ws.b_panel_elems), (1, 1));

        let doubled = ParallelismPlan { n_c_ways: 1, m_c_ways: 2, n_r_ways: 1, m_r_ways: 1 };
        assert_eq!(required_workspace(&cfg, &doubled).a_panels, 2);
    }

    #[test]
    fn strided_and_offset_views_multiply_correctly() {
        // A stored row-major inside a larger buffer, C written to a sub-view.
        let (m, n, k) = (5, 4, 3);
        let mut a_buf = vec![0.0; 100];
        pseudo(&mut a_buf, 42);
        let a = MatRef::from_matrix(&a_buf, m, k, k as isize, 1, 7).unwrap();
        let mut b_buf = vec![0.0; k * n];
        pseudo(&mut b_buf, 43);
        let b = MatRef::from_matrix(&b_buf, k, n, 1, k as isize, 0).unwrap();
        let mut c_buf = vec![0.0; 200];
        let c = MatMut::from_matrix(&mut c_buf, m, n, 2, 50, 3).unwrap();
        let comm = ThreadCommunicator::solo();
        gemm(1.0, &a, &b, 0.0, &c, &GemmConfig::default(), &comm).unwrap();
        for i in 0..m {
            for j in 0..n {
                let mut want = 0.0;
                for p in 0..k {
                    want += a_buf[7 + i * k + p] * b_buf[p + j * k];
                }
                let got = c_buf[3 + 2 * i + 50 * j];
                assert!((got - want).abs() < 1e-14);
            }
        }
    }
}
