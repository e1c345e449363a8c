//! Empirical Rademacher complexity of finite hypothesis pools.
//!
//! A finite pool only lower-bounds the complexity of the whole class; the
//! theorem bound from [`crate::bounds`] is the matching upper envelope.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{rademacher_bound, ClassParams};
use crate::constructions::{junta_to_net, JuntaSpec, MAX_JUNTA_ARITY};
use crate::error::{check_dim, Error, Result};
use crate::hypercube::{sample_uniform, CubePoint, MAX_EXHAUSTIVE_DIM};
use crate::network::{ScaleParams, SparseNet, SparsityMode};
use crate::seed::{self, derive_seed, rng_from_seed, Moments};

/// Largest sample size enumerated exactly (`2^16` sign patterns).
pub const MAX_EXACT_M: usize = 16;
/// Largest dimension for which pool members are verified exhaustively.
pub const MAX_VERIFY_DIM: usize = 14;
/// Samples used to verify members above [`MAX_VERIFY_DIM`].
pub const VERIFY_SAMPLES: u64 = 10_000;

/// A finite set of networks on a common input dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisPool {
    members: Vec<SparseNet>,
    n: usize,
    s: usize,
    k: usize,
    envelope: ScaleParams,
}

impl HypothesisPool {
    /// Builds a pool whose envelope is the largest `(s, k, W, B)` of its members.
    pub fn new(members: Vec<SparseNet>) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::invalid("pool is empty"))?;
        let n = first.n();
        let mut envelope = ScaleParams { w: 0.0, b: 0.0 };
        let (mut s, mut k) = (0, 0);
        for net in &members {
            check_dim(n, net.n())?;
            let sp = net.scale_params();
            envelope.w = envelope.w.max(sp.w);
            envelope.b = envelope.b.max(sp.b);
            s = s.max(net.s());
            k = k.max(net.k());
        }
        Ok(HypothesisPool {
            members,
            n,
            s,
            k,
            envelope,
        })
    }

    /// Replaces the envelope with a looser one.
    pub fn with_envelope(mut self, envelope: ScaleParams) -> Result<Self> {
        if envelope.w < self.envelope.w || envelope.b < self.envelope.b {
            return Err(Error::invalid("envelope must dominate every member's scale"));
        }
        self.envelope = envelope;
        Ok(self)
    }

    /// The pool together with `-h` for every member `h`.
    pub fn symmetrized(&self) -> Result<Self> {
        let mut members = self.members.clone();
        for net in &self.members {
            let neg: Vec<f64> = net.u().iter().map(|u| -u).collect();
            members.push(SparseNet::new(net.n(), net.k(), neg, net.w().to_vec(), net.b().to_vec())?);
        }
        HypothesisPool::new(members)?.with_envelope(self.envelope)
    }

    pub fn members(&self) -> &[SparseNet] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn envelope(&self) -> ScaleParams {
        self.envelope
    }

    /// Class parameters for the envelope, with `R = √n` and the given `m`.
    pub fn class_params(&self, m: u64) -> ClassParams {
        ClassParams {
            m,
            ..ClassParams::on_cube(self.n, self.s, self.k, self.envelope.w, self.envelope.b)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RademacherMode {
    /// All `2^m` sign vectors; requires `m ≤ 16`.
    Exact,
    MonteCarlo { trials: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RademacherEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    pub m: usize,
}

/// `max_h (1/m) Σ_i ζ_i h(x_i)` with `ζ_i = -1` iff bit `i` of `pattern` is set.
fn best_correlation(values: &[Vec<f64>], signs: impl Fn(usize) -> f64) -> f64 {
    let m = values[0].len() as f64;
    values
        .iter()
        .map(|row| row.iter().enumerate().map(|(i, v)| signs(i) * v).sum::<f64>() / m)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Estimates `E_ζ[max_{h∈pool} (1/m) Σ_i ζ_i h(x_i)]` on the sample `points`.
pub fn empirical_rademacher(
    pool: &HypothesisPool,
    points: &[CubePoint],
    mode: RademacherMode,
    seed: u64,
) -> Result<RademacherEstimate> {
    if points.is_empty() {
        return Err(Error::invalid("sample is empty"));
    }
    let m = points.len();
    let values: Vec<Vec<f64>> = pool
        .members
        .iter()
        .map(|net| points.iter().map(|x| net.eval(x)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    match mode {
        RademacherMode::Exact => {
            if m > MAX_EXACT_M {
                return Err(Error::Capacity {
                    what: "exact Rademacher sample size",
                    requested: m as u64,
                    limit: MAX_EXACT_M as u64,
                });
            }
            let total = 1u64 << m;
            let per_pattern: Vec<f64> = (0..total)
                .into_par_iter()
                .map(|pattern| {
                    best_correlation(&values, |i| if pattern >> i & 1 == 1 { -1.0 } else { 1.0 })
                })
                .collect();
            Ok(RademacherEstimate {
                mean: per_pattern.iter().sum::<f64>() / total as f64,
                stderr: 0.0,
                trials: total,
                m,
            })
        }
        RademacherMode::MonteCarlo { trials } => {
            if trials == 0 {
                return Err(Error::invalid("trials must be at least 1"));
            }
            let moments = seed::chunked(trials, seed, |_, len, rng| {
                let mut acc = Moments::default();
                let mut zeta = vec![0.0; m];
                for _ in 0..len {
                    for z in &mut zeta {
                        *z = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                    }
                    acc.push(best_correlation(&values, |i| zeta[i]));
                }
                acc
            })
            .into_iter()
            .fold(Moments::default(), Moments::merge);
            Ok(RademacherEstimate {
                mean: moments.mean(),
                stderr: moments.stderr(),
                trials,
                m,
            })
        }
    }
}

/// `m` independent uniform points of `{-1,1}^n`.
pub fn uniform_points(n: usize, m: usize, seed: u64) -> Result<Vec<CubePoint>> {
    let mut rng = rng_from_seed(seed);
    (0..m).map(|_| sample_uniform(n, &mut rng)).collect()
}

/// `count` junta networks on `⌊log₂ s⌋` random coordinates each.
///
/// Table values are uniform in `[-a, a]` with `a = min(1, W/√p, B/(p-1))`
/// (terms with a zero denominator dropped), which keeps every member inside
/// the `(W, B)` scale of `params`. Members are exactly 1-sparse by
/// construction; this is verified exhaustively for `n ≤ 14` and by sampling
/// otherwise.
pub fn random_sparse_pool(params: &ClassParams, count: usize, seed: u64) -> Result<HypothesisPool> {
    if count == 0 {
        return Err(Error::invalid("count must be at least 1"));
    }
    if params.s == 0 || params.k == 0 {
        return Err(Error::invalid("s and k must be at least 1"));
    }
    let n = params.n;
    let p = (params.s.ilog2() as usize).min(n).min(MAX_JUNTA_ARITY);
    let mut amplitude: f64 = 1.0;
    if p > 0 {
        amplitude = amplitude.min(params.w / (p as f64).sqrt());
    }
    if p > 1 {
        amplitude = amplitude.min(params.b / (p - 1) as f64);
    }
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::invalid("W and B must be finite and non-negative"));
    }
    let members = (0..count)
        .map(|idx| {
            let mut rng = rng_from_seed(derive_seed(seed, idx as u64));
            let mut relevant: Vec<usize> = sample(&mut rng, n, p).into_iter().map(|i| i + 1).collect();
            relevant.sort_unstable();
            let table = (0..1usize << p)
                .map(|_| amplitude * rng.gen_range(-1.0..=1.0))
                .collect();
            let net = junta_to_net(&JuntaSpec::new(n, relevant, table)?)?;
            let mode = if n <= MAX_VERIFY_DIM.min(MAX_EXHAUSTIVE_DIM) {
                SparsityMode::Exhaustive
            } else {
                SparsityMode::Sampled {
                    count: VERIFY_SAMPLES,
                    seed: derive_seed(seed, u64::MAX - idx as u64),
                }
            };
            let report = net.verify_sparsity(params.k, mode)?;
            if !report.holds() {
                return Err(Error::invalid(format!(
                    "pool member {idx} has {} active units, above k = {}",
                    report.max_active, params.k
                )));
            }
            Ok(net)
        })
        .collect::<Result<Vec<_>>>()?;
    HypothesisPool::new(members)
}

/// One row of a bound comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub m: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// For each `m`, draws `m` uniform points, estimates the pool's complexity
/// with `trials` sign draws and evaluates the theorem bound at the pool
/// envelope. Row `r` uses seeds derived from `(seed, 2r)` for the points and
/// `(seed, 2r+1)` for the signs.
pub fn compare_to_bound(
    pool: &HypothesisPool,
    m_grid: &[usize],
    trials: u64,
    seed: u64,
) -> Result<Vec<ComparisonRow>> {
    if m_grid.is_empty() {
        return Err(Error::invalid("m grid is empty"));
    }
    if m_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("m grid must be strictly increasing"));
    }
    m_grid
        .iter()
        .enumerate()
        .map(|(row, &m)| {
            let r = row as u64;
            let points = uniform_points(pool.n, m, derive_seed(seed, 2 * r))?;
            let est = empirical_rademacher(
                pool,
                &points,
                RademacherMode::MonteCarlo { trials },
                derive_seed(seed, 2 * r + 1),
            )?;
            let bound = rademacher_bound(&pool.class_params(m as u64))?.value;
            Ok(ComparisonRow {
                m,
                estimate: est.mean,
                stderr: est.stderr,
                bound,
                ratio: if bound > 0.0 { est.mean / bound } else { f64::NAN },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(n: usize, c: f64) -> SparseNet {
        SparseNet::new(n, 1, vec![c], vec![vec![0.0; n]], vec![-1.0]).unwrap()
    }

    #[test]
    fn zero_pool_has_zero_complexity() {
        let pool = HypothesisPool::new(vec![constant(3, 0.0)]).unwrap();
        let points = uniform_points(3, 6, 1).unwrap();
        let exact = empirical_rademacher(&pool, &points, RademacherMode::Exact, 0).unwrap();
        assert_eq!(exact.mean, 0.0);
        let mc = empirical_rademacher(&pool, &points, RademacherMode::MonteCarlo { trials: 500 }, 3).unwrap();
        assert_eq!((mc.mean, mc.stderr), (0.0, 0.0));
    }

    #[test]
    fn symmetric_constants_at_four_points() {
        // E|ζ_1 + … + ζ_4| = (2·4 + 8·2)/16 = 1.5, so the value is 1.5c/4.
        let c = 0.8;
        let pool = HypothesisPool::new(vec![constant(2, c), constant(2, -c)]).unwrap();
        let points = uniform_points(2, 4, 9).unwrap();
        let est = empirical_rademacher(&pool, &points, RademacherMode::Exact, 0).unwrap();
        assert!((est.mean - 0.375 * c).abs() < 1e-15);
        assert_eq!(est.trials, 16);
    }

    #[test]
    fn larger_pool_never_scores_lower() {
        let params = ClassParams::on_cube(6, 8, 1, 2.0, 2.0);
        let big = random_sparse_pool(&params, 10, 4).unwrap();
        let small = HypothesisPool::new(big.members()[..4].to_vec()).unwrap();
        let points = uniform_points(6, 20, 5).unwrap();
        let mode = RademacherMode::MonteCarlo { trials: 2000 };
        let a = empirical_rademacher(&small, &points, mode, 77).unwrap();
        let b = empirical_rademacher(&big, &points, mode, 77).unwrap();
        assert!(a.mean <= b.mean);
    }

    #[test]
    fn exact_mode_capacity() {
        let pool = HypothesisPool::new(vec![constant(2, 1.0)]).unwrap();
        let points = uniform_points(2, 17, 0).unwrap();
        assert!(matches!(
            empirical_rademacher(&pool, &points, RademacherMode::Exact, 0),
            Err(Error::Capacity { .. })
        ));
        assert!(empirical_rademacher(&pool, &[], RademacherMode::Exact, 0).is_err());
        assert!(HypothesisPool::new(vec![]).is_err());
    }

    #[test]
    fn pool_members_are_sparse_and_enveloped() {
        let params = ClassParams::on_cube(7, 8, 1, 1.5, 1.0);
        let pool = random_sparse_pool(&params, 6, 11).unwrap();
        assert_eq!(pool.len(), 6);
        for net in pool.members() {
            assert!(net.verify_sparsity(1, SparsityMode::Exhaustive).unwrap().holds());
            let sp = net.scale_params();
            assert!(sp.w <= pool.envelope().w && sp.b <= pool.envelope().b);
            assert!(sp.w <= params.w + 1e-12 && sp.b <= params.b + 1e-12);
        }
        let single = random_sparse_pool(&params, 1, 11).unwrap();
        assert_eq!(single.members()[0], pool.members()[0]);
    }

    #[test]
    fn symmetrized_pool_is_nonnegative_per_draw() {
        let params = ClassParams::on_cube(5, 4, 1, 1.0, 1.0);
        let pool = random_sparse_pool(&params, 5, 2).unwrap().symmetrized().unwrap();
        assert_eq!(pool.len(), 10);
        let points = uniform_points(5, 10, 3).unwrap();
        let values: Vec<Vec<f64>> = pool
            .members()
            .iter()
            .map(|h| points.iter().map(|x| h.eval(x).unwrap()).collect())
            .collect();
        for pattern in 0..1u64 << 10 {
            let v = best_correlation(&values, |i| if pattern >> i & 1 == 1 { -1.0 } else { 1.0 });
            assert!(v >= 0.0);
        }
    }

    #[test]
    fn comparison_rows_use_theorem_bound() {
        let params = ClassParams::on_cube(6, 4, 1, 1.0, 1.0);
        let pool = random_sparse_pool(&params, 4, 8).unwrap();
        let rows = compare_to_bound(&pool, &[8, 32], 500, 1).unwrap();
        for row in &rows {
            let expected = rademacher_bound(&pool.class_params(row.m as u64)).unwrap().value;
            assert_eq!(row.bound, expected);
            assert_eq!(row.ratio, row.estimate / row.bound);
        }
        assert!(compare_to_bound(&pool, &[8, 8], 10, 1).is_err());
        let zero = HypothesisPool::new(vec![constant(4, 0.0)])
            .unwrap()
            .with_envelope(ScaleParams { w: 1.0, b: 1.0 })
            .unwrap();
        for row in compare_to_bound(&zero, &[4, 16], 100, 2).unwrap() {
            assert_eq!(row.estimate, 0.0);
        }
    }
}
