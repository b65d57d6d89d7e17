use rayon::prelude::*;
use serde::Serialize;

use super::model::Simulator;
use crate::codegen::{eval_kernel, reindex, Kernel, KernelInput};
use crate::compiler::compile;
use crate::contract::{advance, Contr, ExtEnv, Party, TEnv, Value};
use crate::error::{Error, Result};
use crate::payoff::Discount;

/// Paths per work unit. Fixed so the summation order never depends on the
/// worker count.
pub const BLOCK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PriceResult {
    pub t: u64,
    pub price: f64,
    pub std_error: f64,
    pub n_paths: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Stats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Stats {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Stats) -> Stats {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Stats {
            n,
            mean: self.mean + d * (o.n as f64 / n as f64),
            m2: self.m2 + o.m2 + d * d * (self.n as f64 * o.n as f64 / n as f64),
        }
    }

    fn result(self, t: u64, seed: u64) -> PriceResult {
        let se = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt()
        } else {
            0.0
        };
        PriceResult { t, price: self.mean, std_error: se, n_paths: self.n, seed }
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))
}

/// Runs `f` on every path index and accumulates each of its `m` outputs.
/// Blocks of [`BLOCK`] paths run in parallel and merge in index order.
fn accumulate<F>(n_paths: u64, workers: usize, m: usize, f: F) -> Result<Vec<Stats>>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
{
    let blocks = n_paths.div_ceil(BLOCK);
    let partial: Vec<Result<Vec<Stats>>> = pool(workers)?.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut st = vec![Stats::default(); m];
                for i in b * BLOCK..((b + 1) * BLOCK).min(n_paths) {
                    let vals = f(i)?;
                    for (s, v) in st.iter_mut().zip(vals) {
                        if !v.is_finite() {
                            return Err(Error::NonfiniteAccumulation(i));
                        }
                        s.push(v);
                    }
                }
                Ok(st)
            })
            .collect()
    });
    let mut total = vec![Stats::default(); m];
    for p in partial {
        for (t, s) in total.iter_mut().zip(p?) {
            *t = t.merge(s);
        }
    }
    Ok(total)
}

/// Everything needed to evaluate a kernel on simulated paths.
pub struct KernelPricer<'a> {
    kernel: &'a Kernel,
    sim: &'a Simulator,
    days: Vec<i64>,
    /// Per kernel column: label index in the model.
    label_of_col: Vec<usize>,
    /// Per simulated day: kernel rows holding that day.
    rows_of_day: Vec<Vec<usize>>,
    disc: Vec<f64>,
}

impl<'a> KernelPricer<'a> {
    pub fn new(kernel: &'a Kernel, sim: &'a Simulator, disc: &Discount) -> Result<Self> {
        let label_of_col = kernel
            .cols
            .iter()
            .map(|c| {
                sim.label_index(c)
                    .ok_or_else(|| Error::InvalidModel(format!("model has no label {c}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let days = kernel.observation_days();
        if let Some(&d) = days.first() {
            if d < 0 {
                return Err(Error::NegativeTime(d));
            }
        }
        let rows_of_day = days
            .iter()
            .map(|d| {
                kernel
                    .rows
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| *r == d)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        Ok(KernelPricer { kernel, sim, days, label_of_col, rows_of_day, disc: kernel.disc_factors(disc)? })
    }

    /// Simulated values at the observation days, `[day][label]`.
    pub fn simulate(&self, path: u64, seed: u64) -> Result<Vec<Vec<f64>>> {
        self.sim.simulate_path(&self.days, path, seed)
    }

    pub fn days(&self) -> &[i64] {
        &self.days
    }

    /// Kernel input for one path; cells no lookup reads are NaN.
    pub fn input(&self, sim: &[Vec<f64>], t_now: u64) -> KernelInput {
        let cols = self.kernel.cols.len();
        let mut ext = vec![f64::NAN; self.kernel.rows.len() * cols];
        for (k, rows) in self.rows_of_day.iter().enumerate() {
            for &r in rows {
                for (c, &l) in self.label_of_col.iter().enumerate() {
                    if self.kernel.needed[r * cols + c] {
                        ext[r * cols + c] = sim[k][l];
                    }
                }
            }
        }
        KernelInput { ext, cols, tenv: self.kernel.tenv_values.clone(), disc: self.disc.clone(), t_now }
    }

    /// Discounted payoff of one path at each of `times`.
    pub fn path_values(&self, path: u64, seed: u64, times: &[u64], p1: &Party, p2: &Party) -> Result<Vec<f64>> {
        let sim = self.simulate(path, seed)?;
        let mut input = self.input(&sim, 0);
        times
            .iter()
            .map(|&t| {
                input.t_now = t;
                // + 0.0 folds a negative zero into positive zero
                Ok(eval_kernel(self.kernel, &input, p1, p2)? + 0.0)
            })
            .collect()
    }

    /// Observation environment of one path.
    pub fn path_env(&self, sim: &[Vec<f64>]) -> ExtEnv {
        let names: Vec<&String> = self.sim.spec().labels.keys().collect();
        let mut points = Vec::new();
        for (k, &day) in self.days.iter().enumerate() {
            for (j, name) in names.iter().enumerate() {
                points.push((name.as_str(), day, Value::Real(sim[k][j])));
            }
        }
        ExtEnv::from_points(points)
    }
}

/// Monte Carlo price of a kernel at `t_now`.
#[allow(clippy::too_many_arguments)]
pub fn price_mc(
    kernel: &Kernel,
    sim: &Simulator,
    disc: &Discount,
    t_now: u64,
    n_paths: u64,
    seed: u64,
    p1: &Party,
    p2: &Party,
    workers: usize,
) -> Result<PriceResult> {
    Ok(price_across_time(kernel, sim, disc, &[t_now], n_paths, seed, p1, p2, workers)?.remove(0))
}

/// Prices a cut-payoff kernel at several times on common paths. No
/// compilation happens here.
#[allow(clippy::too_many_arguments)]
pub fn price_across_time(
    kernel: &Kernel,
    sim: &Simulator,
    disc: &Discount,
    times: &[u64],
    n_paths: u64,
    seed: u64,
    p1: &Party,
    p2: &Party,
    workers: usize,
) -> Result<Vec<PriceResult>> {
    let pricer = KernelPricer::new(kernel, sim, disc)?;
    let stats = accumulate(n_paths, workers, times.len(), |i| pricer.path_values(i, seed, times, p1, p2))?;
    Ok(stats.into_iter().zip(times).map(|(s, &t)| s.result(t, seed)).collect())
}

/// One path priced at `t` by reduction: the contract is advanced `t` days
/// under the path's environment, recompiled, reindexed and evaluated under
/// shifted environment and discount.
#[allow(clippy::too_many_arguments)]
pub fn reduction_path_value(
    c: &Contr,
    pricer: &KernelPricer<'_>,
    disc: &Discount,
    t: u64,
    path: u64,
    seed: u64,
    p1: &Party,
    p2: &Party,
) -> Result<f64> {
    let sim = pricer.simulate(path, seed)?;
    let env = pricer.path_env(&sim);
    let (rest, _) = advance(c, &env, t)?;
    let k = reindex(&compile(&rest)?, &TEnv::new())?;
    let shift = t as i64;
    let input = KernelInput::from_env(&k, &env.shifted(shift), &disc.shifted(shift), 0)?;
    Ok(eval_kernel(&k, &input, p1, p2)? + 0.0)
}

/// Prices a template-closed contract at `t` through reduction and
/// recompilation on every path, using the same paths as the kernel of its
/// cut payoff (`cut_kernel`).
#[allow(clippy::too_many_arguments)]
pub fn price_by_reduction(
    c: &Contr,
    cut_kernel: &Kernel,
    sim: &Simulator,
    disc: &Discount,
    t: u64,
    n_paths: u64,
    seed: u64,
    p1: &Party,
    p2: &Party,
    workers: usize,
) -> Result<PriceResult> {
    let pricer = KernelPricer::new(cut_kernel, sim, disc)?;
    let stats = accumulate(n_paths, workers, 1, |i| {
        Ok(vec![reduction_path_value(c, &pricer, disc, t, i, seed, p1, p2)?])
    })?;
    Ok(stats[0].result(t, seed))
}
