//! One-hidden-layer ReLU networks `h(x) = Σ_j u_j · max(⟨w_j, x⟩ - b_j, 0)`
//! with a declared activation-sparsity level `k`.
//!
//! A unit is *active* at `x` when its pre-activation is strictly positive.
//! Units are numbered `1..=s` in the public API.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::hypercube::{partition_assignment, sample_uniform, CubePoint, MAX_EXHAUSTIVE_DIM};
use crate::seed;

/// Largest dimension for the exhaustive average-sensitivity decomposition.
pub const MAX_DECOMPOSITION_DIM: usize = 16;

/// A sparsely activated one-hidden-layer ReLU network.
///
/// Immutable after construction; the JSON form is
/// `{"n":…,"s":…,"k":…,"u":[…],"w":[[…]],"b":[…]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetRepr", into = "NetRepr")]
pub struct SparseNet {
    n: usize,
    k: usize,
    u: Vec<f64>,
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NetRepr {
    n: usize,
    s: usize,
    k: usize,
    u: Vec<f64>,
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl TryFrom<NetRepr> for SparseNet {
    type Error = Error;

    fn try_from(r: NetRepr) -> Result<Self> {
        if r.u.len() != r.s {
            return Err(Error::invalid(format!("s = {} but u has {} entries", r.s, r.u.len())));
        }
        SparseNet::new(r.n, r.k, r.u, r.w, r.b)
    }
}

impl From<SparseNet> for NetRepr {
    fn from(net: SparseNet) -> Self {
        NetRepr {
            n: net.n,
            s: net.u.len(),
            k: net.k,
            u: net.u,
            w: net.w,
            b: net.b,
        }
    }
}

impl SparseNet {
    pub fn new(n: usize, k: usize, u: Vec<f64>, w: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let s = u.len();
        if n == 0 {
            return Err(Error::invalid("input dimension must be at least 1"));
        }
        if s == 0 {
            return Err(Error::invalid("network needs at least one hidden unit"));
        }
        if w.len() != s || b.len() != s {
            return Err(Error::invalid(format!(
                "shape mismatch: {} output weights, {} weight rows, {} biases",
                s,
                w.len(),
                b.len()
            )));
        }
        if let Some(j) = w.iter().position(|row| row.len() != n) {
            return Err(Error::invalid(format!(
                "weight row {} has length {}, expected {n}",
                j + 1,
                w[j].len()
            )));
        }
        if k == 0 || k > s {
            return Err(Error::invalid(format!("sparsity level k = {k} outside 1..={s}")));
        }
        let finite = u.iter().chain(&b).chain(w.iter().flatten()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("network weights must be finite"));
        }
        Ok(SparseNet { n, k, u, w, b })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("network serializes")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.u.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn w(&self) -> &[Vec<f64>] {
        &self.w
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Same weights with a different declared sparsity level.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        SparseNet::new(self.n, k, self.u.clone(), self.w.clone(), self.b.clone())
    }

    #[inline]
    fn preactivation(&self, j: usize, x: &[f64]) -> f64 {
        self.w[j].iter().zip(x).map(|(w, x)| w * x).sum::<f64>() - self.b[j]
    }

    /// Evaluates on a point given as `±1.0` values; the caller checks the length.
    pub(crate) fn eval_signs(&self, x: &[f64]) -> f64 {
        (0..self.s())
            .map(|j| self.u[j] * self.preactivation(j, x).max(0.0))
            .sum()
    }

    pub(crate) fn active_count_signs(&self, x: &[f64]) -> usize {
        (0..self.s()).filter(|&j| self.preactivation(j, x) > 0.0).count()
    }

    /// `h(x)`.
    pub fn eval(&self, x: &CubePoint) -> Result<f64> {
        check_dim(self.n, x.dim())?;
        Ok(self.eval_signs(&x.to_f64()))
    }

    /// Pre-activations `⟨w_j, x⟩ - b_j` for every unit.
    pub fn preactivations(&self, x: &CubePoint) -> Result<Vec<f64>> {
        check_dim(self.n, x.dim())?;
        let xs = x.to_f64();
        Ok((0..self.s()).map(|j| self.preactivation(j, &xs)).collect())
    }

    /// `R_x = {j : ⟨w_j, x⟩ - b_j > 0}`.
    pub fn active_set(&self, x: &CubePoint) -> Result<ActivationSet> {
        let pre = self.preactivations(x)?;
        Ok(ActivationSet {
            members: pre
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(j, _)| j + 1)
                .collect(),
        })
    }

    /// Computes `(W, B)` from the weights.
    pub fn scale_params(&self) -> ScaleParams {
        let u_inf = self.u.iter().fold(0.0f64, |m, u| m.max(u.abs()));
        let w_max = self
            .w
            .iter()
            .map(|row| row.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0f64, f64::max);
        let b_max = self.b.iter().fold(0.0f64, |m, b| m.max(b.abs()));
        ScaleParams {
            w: u_inf * w_max,
            b: u_inf * b_max,
        }
    }

    /// `(w^R, b^R) = (Σ_{j∈R} u_j w_j, Σ_{j∈R} u_j b_j)` for 1-based units `R`.
    pub fn linear_piece(&self, units: &[usize]) -> Result<(Vec<f64>, f64)> {
        let mut w_r = vec![0.0; self.n];
        let mut b_r = 0.0;
        for &j in units {
            if j == 0 || j > self.s() {
                return Err(Error::invalid(format!("unit {j} outside 1..={}", self.s())));
            }
            let j = j - 1;
            for (acc, w) in w_r.iter_mut().zip(&self.w[j]) {
                *acc += self.u[j] * w;
            }
            b_r += self.u[j] * self.b[j];
        }
        Ok((w_r, b_r))
    }

    /// Counts active units at every input (or at `points`) and reports the maximum.
    pub fn verify_sparsity(&self, k: usize, mode: SparsityMode) -> Result<SparsityReport> {
        match mode {
            SparsityMode::Exhaustive => self.verify_exhaustive(k),
            SparsityMode::Sampled { count, seed } => self.verify_sampled(k, count, seed),
        }
    }

    fn verify_exhaustive(&self, k: usize) -> Result<SparsityReport> {
        if self.n > MAX_EXHAUSTIVE_DIM {
            return Err(Error::Capacity {
                what: "exhaustive sparsity check dimension",
                requested: self.n as u64,
                limit: MAX_EXHAUSTIVE_DIM as u64,
            });
        }
        let total = 1u64 << self.n;
        let chunks = total.div_ceil(seed::CHUNK_SIZE);
        let partial: Vec<(usize, Option<u64>, u64)> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * seed::CHUNK_SIZE;
                let end = (start + seed::CHUNK_SIZE).min(total);
                let mut max_active = 0;
                let mut witness = None;
                let mut violations = 0;
                for idx in start..end {
                    let x = CubePoint::from_index_unchecked(self.n, idx).to_f64();
                    let a = self.active_count_signs(&x);
                    max_active = max_active.max(a);
                    if a > k {
                        violations += 1;
                        witness.get_or_insert(idx);
                    }
                }
                (max_active, witness, violations)
            })
            .collect();
        let max_active = partial.iter().map(|p| p.0).max().unwrap_or(0);
        let witness = partial.iter().find_map(|p| p.1);
        let violations: u64 = partial.iter().map(|p| p.2).sum();
        Ok(SparsityReport {
            mode: SparsityModeKind::Exhaustive,
            k,
            max_active,
            violating_input: witness.map(|i| CubePoint::from_index_unchecked(self.n, i)),
            violation_fraction: violations as f64 / total as f64,
            examined: total,
        })
    }

    fn verify_sampled(&self, k: usize, count: u64, seed: u64) -> Result<SparsityReport> {
        if count == 0 {
            return Err(Error::invalid("sampled sparsity check needs at least one sample"));
        }
        let partial = seed::chunked(count, seed, |_, len, rng| {
            let mut max_active = 0;
            let mut witness = None;
            let mut violations = 0u64;
            for _ in 0..len {
                let p = sample_uniform(self.n, rng).expect("valid dimension");
                let a = self.active_count_signs(&p.to_f64());
                max_active = max_active.max(a);
                if a > k {
                    violations += 1;
                    if witness.is_none() {
                        witness = Some(p);
                    }
                }
            }
            (max_active, witness, violations)
        });
        let max_active = partial.iter().map(|p| p.0).max().unwrap_or(0);
        let violations: u64 = partial.iter().map(|p| p.2).sum();
        let witness = partial.into_iter().find_map(|p| p.1);
        Ok(SparsityReport {
            mode: SparsityModeKind::Sampled,
            k,
            max_active,
            violating_input: witness,
            violation_fraction: violations as f64 / count as f64,
            examined: count,
        })
    }

    /// Sparsity over an explicit support, e.g. the embedded image of a lifted construction.
    pub fn verify_sparsity_on(&self, k: usize, support: &[CubePoint]) -> Result<SparsityReport> {
        if support.is_empty() {
            return Err(Error::invalid("support is empty"));
        }
        let mut max_active = 0;
        let mut witness = None;
        let mut violations = 0u64;
        for p in support {
            check_dim(self.n, p.dim())?;
            let a = self.active_count_signs(&p.to_f64());
            max_active = max_active.max(a);
            if a > k {
                violations += 1;
                witness.get_or_insert_with(|| p.clone());
            }
        }
        Ok(SparsityReport {
            mode: SparsityModeKind::Support,
            k,
            max_active,
            violating_input: witness,
            violation_fraction: violations as f64 / support.len() as f64,
            examined: support.len() as u64,
        })
    }

    /// Exact split of the average sensitivity by whether a coordinate flip
    /// keeps the activation set unchanged (`same`) or changes it (`changed`).
    pub fn as_decomposition(&self) -> Result<AsDecomposition> {
        if self.n > MAX_DECOMPOSITION_DIM {
            return Err(Error::Capacity {
                what: "sensitivity decomposition dimension",
                requested: self.n as u64,
                limit: MAX_DECOMPOSITION_DIM as u64,
            });
        }
        let total = 1usize << self.n;
        let words = self.s().div_ceil(64);
        let mut values = vec![0.0; total];
        let mut patterns = vec![0u64; total * words];
        values
            .par_iter_mut()
            .zip(patterns.par_chunks_mut(words))
            .enumerate()
            .for_each(|(idx, (val, pat))| {
                let x = CubePoint::from_index_unchecked(self.n, idx as u64).to_f64();
                let mut h = 0.0;
                for j in 0..self.s() {
                    let p = self.preactivation(j, &x);
                    if p > 0.0 {
                        h += self.u[j] * p;
                        pat[j / 64] |= 1 << (j % 64);
                    }
                }
                *val = h;
            });
        let (mut same, mut changed) = (0.0, 0.0);
        for idx in 0..total {
            for i in 0..self.n {
                let nb = idx ^ (1 << i);
                let d = values[idx] - values[nb];
                let term = 0.25 * d * d;
                if patterns[idx * words..(idx + 1) * words] == patterns[nb * words..(nb + 1) * words] {
                    same += term;
                } else {
                    changed += term;
                }
            }
        }
        let norm = total as f64;
        let (same, changed) = (same / norm, changed / norm);
        Ok(AsDecomposition {
            same_pattern: same,
            changed_pattern: changed,
            total: same + changed,
        })
    }

    /// Collapses the input through a bucket partition: the returned network
    /// has `r` inputs and weights `w'_{je} = Σ_{l∈A_e} w_{jl} z_l`, with `u`,
    /// `b` and `k` unchanged. Buckets list 1-based coordinates and may be empty.
    pub fn rebucket(&self, z: &CubePoint, partition: &[Vec<usize>]) -> Result<SparseNet> {
        check_dim(self.n, z.dim())?;
        let assignment = partition_assignment(self.n, partition)?;
        let r = partition.len();
        let zs = z.to_f64();
        let w = self
            .w
            .iter()
            .map(|row| {
                let mut collapsed = vec![0.0; r];
                for (l, &e) in assignment.iter().enumerate() {
                    collapsed[e - 1] += row[l] * zs[l];
                }
                collapsed
            })
            .collect();
        SparseNet::new(r, self.k, self.u.clone(), w, self.b.clone())
    }
}

/// Active hidden units at one input, as sorted 1-based indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ActivationSet {
    members: Vec<usize>,
}

impl ActivationSet {
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, unit: usize) -> bool {
        self.members.binary_search(&unit).is_ok()
    }
}

/// `W = ‖u‖_∞ · max_j ‖w_j‖₂` and `B = ‖u‖_∞ · max_j |b_j|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "B")]
    pub b: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SparsityMode {
    /// All `2^n` inputs.
    Exhaustive,
    /// `count` uniform inputs drawn from `seed`.
    Sampled { count: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SparsityModeKind {
    Exhaustive,
    Sampled,
    Support,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparsityReport {
    pub mode: SparsityModeKind,
    /// Level the check was run against.
    pub k: usize,
    pub max_active: usize,
    /// First examined input with more than `k` active units.
    pub violating_input: Option<CubePoint>,
    /// Fraction of examined inputs with more than `k` active units.
    pub violation_fraction: f64,
    pub examined: u64,
}

impl SparsityReport {
    pub fn holds(&self) -> bool {
        self.max_active <= self.k
    }
}

/// Average sensitivity split by activation-pattern change.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsDecomposition {
    /// Flips with `R_x = R_{x^{⊕i}}`.
    pub same_pattern: f64,
    /// Flips with `R_x ≠ R_{x^{⊕i}}`.
    pub changed_pattern: f64,
    pub total: f64,
}
