//! Benchmark execution: builds operands, times the chosen algorithms, and
//! emits CSV records.
//!
//! Timing methodology: one untimed warm-up run, then `repeats` timed runs;
//! the minimum wall time is reported. `gflops = flops / seconds / 1e9`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use tcontract::config::GemmConfig;
use tcontract::gemm::{gemm, MatMut, MatRef};
use tcontract::parallel::run_team;
use tcontract::plan::derive_plan;
use tcontract::{contract_bsmtc, contract_naive, contract_ttdt, DenseTensor, LabelSet};

use crate::generate::{effective_lengths, BenchShape};
use crate::spec::ContractionSpec;

/// Cross-checks against the naive oracle are skipped above this flop count
/// to keep the oracle affordable.
pub const CHECK_FLOP_LIMIT: u64 = 400_000_000;

pub const CSV_HEADER: &str = "spec,algo,threads,m_eff,n_eff,k_eff,flops,seconds,gflops,check";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algo {
    Bsmtc,
    Ttdt,
    Naive,
    /// Plain matrix multiplication of the equivalent extents through the
    /// same pipeline, as a reference row.
    Gemm,
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Algo::Bsmtc => "bsmtc",
            Algo::Ttdt => "ttdt",
            Algo::Naive => "naive",
            Algo::Gemm => "gemm",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Algo {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "bsmtc" => Ok(Algo::Bsmtc),
            "ttdt" => Ok(Algo::Ttdt),
            "naive" => Ok(Algo::Naive),
            "gemm" => Ok(Algo::Gemm),
            other => Err(format!("unknown algorithm '{other}' (expected bsmtc|ttdt|naive|gemm)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    NotRequested,
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CheckOutcome::NotRequested => "-",
            CheckOutcome::Pass => "pass",
            CheckOutcome::Fail => "fail",
            CheckOutcome::Skipped => "skipped",
        };
        f.write_str(s)
    }
}

/// One CSV row.
#[derive(Clone, Debug)]
pub struct BenchRecord {
    pub spec: String,
    pub algo: Algo,
    pub threads: usize,
    pub m_eff: f64,
    pub n_eff: f64,
    pub k_eff: f64,
    pub flops: u64,
    pub seconds: f64,
    pub gflops: f64,
    pub check: CheckOutcome,
}

impl BenchRecord {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{:.4},{:.4},{:.4},{},{:.9e},{:.9e},{}",
            self.spec,
            self.algo,
            self.threads,
            self.m_eff,
            self.n_eff,
            self.k_eff,
            self.flops,
            self.seconds,
            self.gflops,
            self.check
        )
    }
}

/// One benchmark item: a spec, its per-label lengths, and the shape family
/// used to report effective lengths.
#[derive(Clone, Debug)]
pub struct BenchItem {
    pub spec: ContractionSpec,
    pub lengths: BTreeMap<char, usize>,
    pub shape: BenchShape,
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub algos: Vec<Algo>,
    pub threads: usize,
    pub repeats: usize,
    pub check: bool,
    pub cfg: GemmConfig,
    pub data_seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            algos: vec![Algo::Bsmtc],
            threads: 1,
            repeats: 3,
            check: false,
            cfg: GemmConfig::default(),
            data_seed: 0x7C0,
        }
    }
}

pub struct BenchSummary {
    pub rows: usize,
    pub check_failures: usize,
    pub row_errors: Vec<String>,
}

fn random_tensor(
    labels: &LabelSet,
    lengths: &BTreeMap<char, usize>,
    rng: &mut ChaCha8Rng,
) -> DenseTensor<f64> {
    let lens: Vec<usize> = labels.labels().iter().map(|l| lengths[&l.as_char()]).collect();
    DenseTensor::column_major_with(&lens, |_| rng.random_range(-1.0..1.0)).unwrap()
}

fn time_best_of<F: FnMut()>(repeats: usize, mut f: F) -> f64 {
    f(); // warm-up, untimed
    let mut best = f64::INFINITY;
    for _ in 0..repeats.max(1) {
        let t = Instant::now();
        f();
        best = best.min(t.elapsed().as_secs_f64());
    }
    best
}

fn run_item(
    item: &BenchItem,
    algo: Algo,
    opts: &BenchOptions,
    rng: &mut ChaCha8Rng,
) -> Result<BenchRecord, String> {
    let spec = &item.spec;
    for label in spec.labels() {
        if !item.lengths.contains_key(&label) {
            return Err(format!("{spec}: no length given for label '{label}'"));
        }
    }
    let la = spec.label_set_a().map_err(|e| format!("{spec}: {e}"))?;
    let lb = spec.label_set_b().map_err(|e| format!("{spec}: {e}"))?;
    let lc = spec.label_set_c().map_err(|e| format!("{spec}: {e}"))?;

    let a = random_tensor(&la, &item.lengths, rng);
    let b = random_tensor(&lb, &item.lengths, rng);
    let c0 = random_tensor(&lc, &item.lengths, rng);

    let plan = derive_plan(&la, &lb, &lc, &a, &b, &c0).map_err(|e| format!("{spec}: {e}"))?;
    let (n_i, n_j, n_p) = (plan.n_rows(), plan.n_cols(), plan.n_depth());
    let flops = plan.flop_count();
    let (m_eff, n_eff, k_eff) = match item.shape {
        BenchShape::Explicit => (n_i as f64, n_j as f64, n_p as f64),
        shape => effective_lengths(flops, shape),
    };

    let mut c = c0.clone();
    let seconds = match algo {
        Algo::Bsmtc => time_best_of(opts.repeats, || {
            contract_bsmtc(1.0, &a, &la, &b, &lb, 0.0, &mut c, &lc, &opts.cfg, Some(opts.threads))
                .unwrap();
        }),
        Algo::Ttdt => time_best_of(opts.repeats, || {
            contract_ttdt(1.0, &a, &la, &b, &lb, 0.0, &mut c, &lc, Some(opts.threads)).unwrap();
        }),
        Algo::Naive => time_best_of(opts.repeats, || {
            contract_naive(1.0, &a, &la, &b, &lb, 0.0, &mut c, &lc).unwrap();
        }),
        Algo::Gemm => {
            // Equivalent plain matrix multiplication (same flop count).
            let ma = DenseTensor::<f64>::column_major_with(&[n_i, n_p], |i| {
                ((i % 1013) as f64) * 1e-3 - 0.5
            })
            .unwrap();
            let mb = DenseTensor::<f64>::column_major_with(&[n_p, n_j], |i| {
                ((i % 1019) as f64) * 1e-3 - 0.5
            })
            .unwrap();
            let mut mc = vec![0.0f64; n_i * n_j];
            let av = MatRef::from_matrix(ma.data(), n_i, n_p, 1, n_i as isize, 0)
                .map_err(|e| format!("{spec}: {e}"))?;
            let bv = MatRef::from_matrix(mb.data(), n_p, n_j, 1, n_p as isize, 0)
                .map_err(|e| format!("{spec}: {e}"))?;
            time_best_of(opts.repeats, || {
                let cv = MatMut::from_matrix(&mut mc, n_i, n_j, 1, n_i as isize, 0).unwrap();
                for r in
                    run_team(opts.threads, |comm| gemm(1.0, &av, &bv, 0.0, &cv, &opts.cfg, comm))
                {
                    r.unwrap();
                }
            })
        }
    };

    let check = if !opts.check || matches!(algo, Algo::Naive | Algo::Gemm) {
        CheckOutcome::NotRequested
    } else if flops > CHECK_FLOP_LIMIT {
        CheckOutcome::Skipped
    } else {
        let mut want = c0.clone();
        contract_naive(1.0, &a, &la, &b, &lb, 0.0, &mut want, &lc)
            .map_err(|e| format!("{spec}: {e}"))?;
        // TCBENCH_CHECK_TOL overrides the tolerance (test hook for the
        // check-failure exit path).
        let tol = std::env::var("TCBENCH_CHECK_TOL")
            .ok()
            .and_then(|v| v.parse::<f64>().ok())
            .unwrap_or(1e-12 * (n_p.max(1) as f64));
        let mut num: f64 = 0.0;
        let mut den: f64 = 1.0;
        for (g, w) in c.data().iter().zip(want.data()) {
            num = num.max((g - w).abs());
            den = den.max(w.abs());
        }
        if num / den <= tol {
            CheckOutcome::Pass
        } else {
            CheckOutcome::Fail
        }
    };

    Ok(BenchRecord {
        spec: spec.to_string(),
        algo,
        threads: opts.threads,
        m_eff,
        n_eff,
        k_eff,
        flops,
        seconds,
        gflops: flops as f64 / seconds / 1e9,
        check,
    })
}

/// Runs every (item, algorithm) pair, writing one CSV row each. Per-row
/// errors go to the summary without aborting the sweep.
pub fn run_bench(
    items: &[BenchItem],
    opts: &BenchOptions,
    out: &mut dyn Write,
) -> std::io::Result<BenchSummary> {
    writeln!(out, "{CSV_HEADER}")?;
    let mut summary = BenchSummary { rows: 0, check_failures: 0, row_errors: Vec::new() };
    for (idx, item) in items.iter().enumerate() {
        for &algo in &opts.algos {
            // fresh stream per row so every algorithm sees identical operands
            let mut rng = ChaCha8Rng::seed_from_u64(opts.data_seed.wrapping_add(idx as u64));
            match run_item(item, algo, opts, &mut rng) {
                Ok(rec) => {
                    if rec.check == CheckOutcome::Fail {
                        summary.check_failures += 1;
                    }
                    summary.rows += 1;
                    writeln!(out, "{}", rec.to_csv_row())?;
                }
                Err(e) => summary.row_errors.push(e),
            }
        }
    }
    Ok(summary)
}
