//! Thread communicators and loop-range assignment.
//!
//! Execution is SPMD: every thread of a team runs the same driver code and
//! coordinates only through barriers and pre-agreed disjoint ranges.
//! Communicators form a tree by splitting, MPI-style; each split hands every
//! thread the sub-communicator of its group, with a fresh shared barrier.

use std::any::Any;
use std::ops::Range;
use std::sync::{Arc, Barrier, Mutex};

use crate::config::GemmConfig;
use crate::error::{Error, Result};

struct CommShared {
    size: usize,
    barrier: Barrier,
    /// Rendezvous slots for collective operations (split, leader_share):
    /// leaders publish, a barrier orders the reads, a second barrier keeps
    /// slots from being overwritten while still being read.
    slots: Mutex<Vec<Option<Arc<dyn Any + Send + Sync>>>>,
}

impl CommShared {
    fn new(size: usize) -> Arc<Self> {
        Arc::new(CommShared { size, barrier: Barrier::new(size), slots: Mutex::new(Vec::new()) })
    }
}

/// A group of threads sharing a barrier. Ranks are 0-based and dense.
#[derive(Clone)]
pub struct ThreadCommunicator {
    shared: Arc<CommShared>,
    rank: usize,
}

impl ThreadCommunicator {
    /// Communicators for a fresh team, one per rank.
    pub fn team(size: usize) -> Vec<ThreadCommunicator> {
        assert!(size >= 1, "team size must be at least 1");
        let shared = CommShared::new(size);
        (0..size).map(|rank| ThreadCommunicator { shared: shared.clone(), rank }).collect()
    }

    /// A single-thread communicator (rank 0 of a team of one).
    pub fn solo() -> ThreadCommunicator {
        ThreadCommunicator::team(1).pop().unwrap()
    }

    pub fn size(&self) -> usize {
        self.shared.size
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Releases only when all members have arrived.
    pub fn barrier(&self) {
        if self.shared.size > 1 {
            self.shared.barrier.wait();
        }
    }

    /// Index of this thread's group under a `ways`-way split.
    pub fn group_index(&self, ways: usize) -> usize {
        self.rank / (self.shared.size / ways)
    }

    /// Splits into `ways` groups of equal size; returns this thread's group
    /// communicator with a re-based rank and a fresh barrier. `ways` must
    /// divide the communicator size. A 1-way split returns `self`.
    pub fn split(&self, ways: usize) -> Result<ThreadCommunicator> {
        let size = self.shared.size;
        if ways == 0 || !size.is_multiple_of(ways) {
            return Err(Error::IndivisibleSplit { size, ways });
        }
        if ways == 1 {
            return Ok(self.clone());
        }
        let group_size = size / ways;
        let gid = self.rank / group_size;
        let local = self.rank % group_size;
        if local == 0 {
            let child = CommShared::new(group_size);
            let mut slots = self.shared.slots.lock().unwrap();
            if slots.len() < ways {
                slots.resize(ways, None);
            }
            slots[gid] = Some(child as Arc<dyn Any + Send + Sync>);
        }
        self.barrier();
        let child = {
            let slots = self.shared.slots.lock().unwrap();
            slots[gid].clone().expect("split leader published its group")
        };
        self.barrier();
        let shared = child.downcast::<CommShared>().expect("slot holds a communicator");
        Ok(ThreadCommunicator { shared, rank: local })
    }

    /// Collective: rank 0 computes a value, everyone receives the `Arc`.
    pub fn leader_share<V: Send + Sync + 'static>(&self, make: impl FnOnce() -> V) -> Arc<V> {
        if self.shared.size == 1 {
            return Arc::new(make());
        }
        if self.rank == 0 {
            let value: Arc<dyn Any + Send + Sync> = Arc::new(make());
            let mut slots = self.shared.slots.lock().unwrap();
            if slots.is_empty() {
                slots.resize(1, None);
            }
            slots[0] = Some(value);
        }
        self.barrier();
        let value = {
            let slots = self.shared.slots.lock().unwrap();
            slots[0].clone().expect("leader published a value")
        };
        self.barrier();
        value.downcast::<V>().expect("slot holds the shared value")
    }

    /// This thread's contiguous range of `[0, extent)` aligned to
    /// `block_multiple` (see [`assign_range`]).
    pub fn assign_range(&self, extent: usize, block_multiple: usize) -> Range<usize> {
        assign_range(self.shared.size, self.rank, extent, block_multiple)
    }
}

/// Contiguous, disjoint, exhaustive ranges over `[0, extent)` for `size`
/// participants: boundaries fall on multiples of `block_multiple` (except
/// possibly `extent` itself) and block counts are balanced to within one.
pub fn assign_range(
    size: usize,
    rank: usize,
    extent: usize,
    block_multiple: usize,
) -> Range<usize> {
    debug_assert!(block_multiple >= 1);
    debug_assert!(rank < size);
    let nblocks = extent.div_ceil(block_multiple);
    let per = nblocks / size;
    let rem = nblocks % size;
    let begin_block = rank * per + rank.min(rem);
    let end_block = begin_block + per + usize::from(rank < rem);
    let begin = (begin_block * block_multiple).min(extent);
    let end = (end_block * block_multiple).min(extent);
    begin..end
}

/// Way counts for the four parallelizable loops of the pipeline. The loop
/// over the contracted dimension (block size k_c) is never parallelized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParallelismPlan {
    /// Ways for the n_c loop (outermost, over columns of C).
    pub n_c_ways: usize,
    /// Ways for the m_c loop (over rows of C).
    pub m_c_ways: usize,
    /// Ways for the n_r loop (over columns of one macro-block).
    pub n_r_ways: usize,
    /// Ways for the m_r loop (innermost, over micro-tiles).
    pub m_r_ways: usize,
}

impl ParallelismPlan {
    pub fn serial() -> Self {
        ParallelismPlan { n_c_ways: 1, m_c_ways: 1, n_r_ways: 1, m_r_ways: 1 }
    }

    /// Total threads the plan accounts for (product of all way counts).
    pub fn threads(&self) -> usize {
        self.n_c_ways * self.m_c_ways * self.n_r_ways * self.m_r_ways
    }
}

fn largest_divisor_at_most(n: usize, cap: usize) -> usize {
    let cap = cap.max(1).min(n);
    (1..=cap).rev().find(|d| n.is_multiple_of(*d)).unwrap_or(1)
}

/// Factorizes `threads` across the four parallelizable loops, favoring the
/// outer (n_c, m_c) loops and keeping per-thread tiles non-degenerate where
/// the extents allow. The product of way counts always equals `threads`;
/// oversubscribed loops simply leave some ranks with empty ranges.
pub fn default_plan(threads: usize, m: usize, n: usize, cfg: &GemmConfig) -> ParallelismPlan {
    if threads <= 1 {
        return ParallelismPlan::serial();
    }
    let jc_cap = n.div_ceil(cfg.n_c).max(1);
    let ic_cap = m.div_ceil(cfg.m_c).max(1);
    let jr_cap = n.min(cfg.n_c).div_ceil(cfg.n_r).max(1);

    let n_c_ways = largest_divisor_at_most(threads, jc_cap.min(threads.isqrt()));
    let rest = threads / n_c_ways;
    let m_c_ways = largest_divisor_at_most(rest, ic_cap);
    let rest = rest / m_c_ways;
    let n_r_ways = largest_divisor_at_most(rest, jr_cap);
    let m_r_ways = rest / n_r_ways;
    ParallelismPlan { n_c_ways, m_c_ways, n_r_ways, m_r_ways }
}

/// Environment variable consulted for the default team size.
pub const NUM_THREADS_ENV: &str = "TCONTRACT_NUM_THREADS";

/// Team size: the explicit request, else `TCONTRACT_NUM_THREADS`, else the
/// hardware concurrency.
pub fn team_size(requested: Option<usize>) -> usize {
    if let Some(n) = requested {
        return n.max(1);
    }
    if let Ok(v) = std::env::var(NUM_THREADS_ENV) {
        if let Ok(n) = v.trim().parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Runs `f` SPMD on a team of `size` threads; the calling thread is rank 0.
/// Returns every rank's result, rank order.
pub fn run_team<R, F>(size: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(&ThreadCommunicator) -> R + Sync,
{
    let mut comms = ThreadCommunicator::team(size);
    if size <= 1 {
        return vec![f(&comms[0])];
    }
    let comm0 = comms.remove(0);
    let mut results: Vec<Option<R>> = Vec::new();
    results.resize_with(size, || None);
    let (r0, rest) = results.split_at_mut(1);
    std::thread::scope(|scope| {
        for (comm, slot) in comms.into_iter().zip(rest.iter_mut()) {
            let f = &f;
            scope.spawn(move || {
                *slot = Some(f(&comm));
            });
        }
        r0[0] = Some(f(&comm0));
    });
    results.into_iter().map(|r| r.expect("every rank produced a result")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn split_assigns_groups_and_local_ranks() {
        let results = run_team(12, |comm| {
            let sub = comm.split(3).unwrap();
            (comm.rank(), sub.size(), comm.group_index(3), sub.rank())
        });
        for (rank, size, gid, local) in results {
            assert_eq!(size, 4);
            assert_eq!(gid, rank / 4);
            assert_eq!(local, rank % 4);
            if rank == 7 {
                assert_eq!((gid, local), (1, 3));
            }
        }
    }

    #[test]
    fn one_way_split_is_the_same_membership() {
        let comm = ThreadCommunicator::solo();
        let sub = comm.split(1).unwrap();
        assert_eq!(sub.size(), 1);
        assert_eq!(sub.rank(), 0);
    }

    #[test]
    fn indivisible_split_is_rejected() {
        let results = run_team(12, |comm| comm.split(5).err());
        for err in results {
            assert_eq!(err, Some(Error::IndivisibleSplit { size: 12, ways: 5 }));
        }
    }

    #[test]
    fn barrier_really_gathers_everyone() {
        let arrivals = AtomicUsize::new(0);
        run_team(4, |comm| {
            arrivals.fetch_add(1, Ordering::SeqCst);
            comm.barrier();
            assert_eq!(arrivals.load(Ordering::SeqCst), 4);
        });
    }

    #[test]
    fn leader_share_distributes_one_value() {
        let built = AtomicUsize::new(0);
        let results = run_team(6, |comm| {
            let v = comm.leader_share(|| {
                built.fetch_add(1, Ordering::SeqCst);
                42usize
            });
            *v
        });
        assert_eq!(built.load(Ordering::SeqCst), 1);
        assert!(results.iter().all(|&v| v == 42));
    }

    #[test]
    fn assign_range_balances_block_counts() {
        assert_eq!(assign_range(2, 0, 18, 4), 0..12);
        assert_eq!(assign_range(2, 1, 18, 4), 12..18);
        assert_eq!(assign_range(1, 0, 37, 8), 0..37);
        for rank in 0..3 {
            assert_eq!(assign_range(3, rank, 0, 4), 0..0);
        }
    }

    #[test]
    fn assign_range_is_a_disjoint_cover() {
        for &(size, extent, bm) in
            &[(1, 17, 4), (3, 18, 4), (4, 18, 4), (7, 18, 4), (5, 100, 8), (13, 64, 6), (4, 3, 2)]
        {
            let mut expected_start = 0;
            for rank in 0..size {
                let r = assign_range(size, rank, extent, bm);
                assert_eq!(r.start, expected_start);
                assert!(r.end >= r.start);
                assert!(r.start.is_multiple_of(bm) || r.start == extent);
                expected_start = r.end;
            }
            assert_eq!(expected_start, extent);
        }
    }

    #[test]
    fn default_plan_prefers_outer_loops_and_multiplies_out() {
        let cfg = GemmConfig::default();
        let plan = default_plan(12, 100_000, 100_000, &cfg);
        assert_eq!(plan.threads(), 12);
        assert_eq!((plan.n_c_ways, plan.m_c_ways), (3, 4));

        let plan = default_plan(1, 512, 512, &cfg);
        assert_eq!(plan, ParallelismPlan::serial());

        for threads in 1..=32 {
            for &(m, n) in &[(1usize, 1usize), (5, 3), (512, 512), (10_000, 80)] {
                let plan = default_plan(threads, m, n, &cfg);
                assert_eq!(plan.threads(), threads, "m={m} n={n} threads={threads}");
            }
        }
    }

    #[test]
    fn team_size_resolution_order() {
        assert_eq!(team_size(Some(3)), 3);
        assert_eq!(team_size(Some(0)), 1);
        // Env fallback is covered by reading the variable if set; hardware
        // concurrency is the final fallback and is at least 1.
        assert!(team_size(None) >= 1);
    }
}
