//! Explicit sparsely activated networks: junta simulation, Indexing, the
//! quadratic parity lift and the Γ-gated weight-dense network.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hypercube::{CubePoint, Subset};
use crate::network::{SparseNet, SparsityMode};

pub const MAX_JUNTA_ARITY: usize = 20;
pub const MAX_INDEX_BITS: usize = 10;
pub const MAX_LIFT_DIM: usize = 12;
pub const MAX_GATE_BITS: usize = 8;
pub const MAX_PAYLOAD_DIM: usize = 16;
pub const MAX_GRID_NET_DIM: usize = 16;
pub const GRID_NET_ATTEMPTS: usize = 10_000;

fn capacity(what: &'static str, requested: usize, limit: usize) -> Result<()> {
    if requested > limit {
        return Err(Error::Capacity {
            what,
            requested: requested as u64,
            limit: limit as u64,
        });
    }
    Ok(())
}

/// Sign pattern with index `t`: entry `i` is `-1` iff bit `i` of `t` is set.
fn pattern(len: usize, t: usize) -> Vec<f64> {
    (0..len).map(|i| if t >> i & 1 == 1 { -1.0 } else { 1.0 }).collect()
}

/// A function of `n` inputs depending only on the `relevant` coordinates.
///
/// `table[t]` is the value on inputs whose relevant coordinates form pattern
/// `t`: bit `i` of `t` is set iff `x_{relevant[i]} = -1`.
#[derive(Clone, Debug, PartialEq)]
pub struct JuntaSpec {
    n: usize,
    relevant: Vec<usize>,
    table: Vec<f64>,
}

impl JuntaSpec {
    pub fn new(n: usize, relevant: Vec<usize>, table: Vec<f64>) -> Result<Self> {
        let p = relevant.len();
        if n == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if p > n {
            return Err(Error::invalid(format!("{p} relevant coordinates exceed n = {n}")));
        }
        capacity("junta arity", p, MAX_JUNTA_ARITY)?;
        for (t, &i) in relevant.iter().enumerate() {
            if i == 0 || i > n {
                return Err(Error::invalid(format!("coordinate {i} outside 1..={n}")));
            }
            if relevant[..t].contains(&i) {
                return Err(Error::invalid(format!("coordinate {i} listed twice")));
            }
        }
        if table.len() != 1 << p {
            return Err(Error::invalid(format!(
                "truth table has {} entries, expected {}",
                table.len(),
                1usize << p
            )));
        }
        if table.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("truth table entries must be finite"));
        }
        Ok(JuntaSpec { n, relevant, table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn relevant(&self) -> &[usize] {
        &self.relevant
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Table lookup at `x`.
    pub fn eval(&self, x: &CubePoint) -> Result<f64> {
        crate::error::check_dim(self.n, x.dim())?;
        let t = self
            .relevant
            .iter()
            .enumerate()
            .filter(|(_, &i)| x.sign0(i - 1) == -1)
            .fold(0usize, |t, (bit, _)| t | 1 << bit);
        Ok(self.table[t])
    }
}

/// One unit per sign pattern `α` of the relevant coordinates:
/// `w_α = α` on those coordinates, `b = p - 1`, `u_α = table[α]`.
///
/// `⟨w_α, x⟩ = p` exactly when `x` matches `α` and is at most `p - 2`
/// otherwise, so one unit fires with pre-activation 1.
pub fn junta_to_net(spec: &JuntaSpec) -> Result<SparseNet> {
    let p = spec.relevant.len();
    let s = 1usize << p;
    let mut w = Vec::with_capacity(s);
    for t in 0..s {
        let mut row = vec![0.0; spec.n];
        for (a, &i) in pattern(p, t).into_iter().zip(&spec.relevant) {
            row[i - 1] = a;
        }
        w.push(row);
    }
    SparseNet::new(spec.n, 1, spec.table.clone(), w, vec![p as f64 - 1.0; s])
}

/// Address of the first `b` coordinates: `-1 ↦ 0`, `+1 ↦ 1`, first coordinate
/// most significant.
fn address(signs: impl Iterator<Item = i8>) -> usize {
    signs.fold(0, |acc, s| acc << 1 | usize::from(s == 1))
}

/// The Indexing network on `n = b + 2^b` inputs.
///
/// Unit `α` (ordered by address) has weight `α` on the address coordinates,
/// `½` on data coordinate `b + addr(α)` and bias `b - ½`. The output is
/// `½ y_addr + ½`.
pub fn index_net(b: usize) -> Result<SparseNet> {
    if b == 0 {
        return Err(Error::invalid("Indexing needs at least one address bit"));
    }
    capacity("Indexing address bits", b, MAX_INDEX_BITS)?;
    let s = 1usize << b;
    let n = b + s;
    let w = (0..s)
        .map(|addr| {
            let mut row = vec![0.0; n];
            for (i, slot) in row.iter_mut().take(b).enumerate() {
                *slot = if addr >> (b - 1 - i) & 1 == 1 { 1.0 } else { -1.0 };
            }
            row[b + addr] = 0.5;
            row
        })
        .collect();
    SparseNet::new(n, 1, vec![1.0; s], w, vec![b as f64 - 0.5; s])
}

/// `Index_b(z)`: the addressed data bit with `-1 ↦ 0`.
pub fn index_reference(b: usize, z: &CubePoint) -> Result<f64> {
    capacity("Indexing address bits", b, MAX_INDEX_BITS)?;
    crate::error::check_dim(b + (1 << b), z.dim())?;
    let addr = address(z.signs().take(b));
    Ok(if z.sign0(b + addr) == 1 { 1.0 } else { 0.0 })
}

/// The pairwise-product embedding `x(y)` of `y ∈ {-1,1}^m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedPoint {
    m: usize,
    /// Row-major `m × m`.
    entries: Vec<i8>,
}

impl LiftedPoint {
    pub fn from_entries(m: usize, entries: Vec<i8>) -> Result<Self> {
        if entries.len() != m * m {
            return Err(Error::invalid(format!("expected {} entries, got {}", m * m, entries.len())));
        }
        if entries.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::invalid("lifted entries must be ±1"));
        }
        Ok(LiftedPoint { m, entries })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.m + j]
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    /// `entries[i][j] = entries[i][i] · entries[j][j]` for all `i ≠ j`.
    pub fn is_consistent(&self) -> bool {
        (0..self.m).all(|i| {
            (0..self.m).all(|j| i == j || self.entry(i, j) == self.entry(i, i) * self.entry(j, j))
        })
    }

    /// The flattened point of `{-1,1}^{m²}`.
    pub fn to_point(&self) -> CubePoint {
        CubePoint::from_signs(&self.entries).expect("entries are ±1")
    }
}

/// `x(y)_{ii} = y_i` and `x(y)_{ij} = y_i y_j`.
pub fn embed_lift(y: &CubePoint) -> Result<LiftedPoint> {
    let m = y.dim();
    capacity("lift base dimension", m, MAX_LIFT_DIM)?;
    let ys: Vec<i8> = y.signs().collect();
    let mut entries = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            entries.push(if i == j { ys[i] } else { ys[i] * ys[j] });
        }
    }
    Ok(LiftedPoint { m, entries })
}

/// The even offsets `a ∈ {-m, …, m}`, ascending; one unit per offset.
pub fn parity_lift_offsets(m: usize) -> Vec<i64> {
    let m = m as i64;
    (-m..=m).filter(|a| a % 2 == 0).collect()
}

/// The lifted comb network for `χ_S` on `n = m²` inputs.
///
/// For offset `a`: `w[i,i] = 2a` and `w[i,j] = -1` for `i ≠ j` in `S`,
/// `b = |S| + a² - ½`, `u = 2`. On embedded points the pre-activation is
/// `½ - (Σ_{i∈S} y_i - a)²`.
pub fn parity_lift(m: usize, set: &Subset) -> Result<SparseNet> {
    if m == 0 {
        return Err(Error::invalid("base dimension must be at least 1"));
    }
    capacity("lift base dimension", m, MAX_LIFT_DIM)?;
    crate::error::check_dim(m, set.dim())?;
    if set.is_empty() {
        return Err(Error::invalid("parity set must be nonempty"));
    }
    let members: Vec<usize> = set.members().into_iter().map(|i| i - 1).collect();
    let size = members.len() as f64;
    let offsets = parity_lift_offsets(m);
    let mut w = Vec::with_capacity(offsets.len());
    let mut b = Vec::with_capacity(offsets.len());
    for &a in &offsets {
        let mut row = vec![0.0; m * m];
        for &i in &members {
            for &j in &members {
                row[i * m + j] = if i == j { 2.0 * a as f64 } else { -1.0 };
            }
        }
        w.push(row);
        b.push(size + (a * a) as f64 - 0.5);
    }
    SparseNet::new(m * m, 1, vec![2.0; offsets.len()], w, b)
}

/// `1` if `Σ_{i∈S} y_i` is even, else `0`.
pub fn parity_lift_reference(set: &Subset, y: &CubePoint) -> Result<f64> {
    crate::error::check_dim(set.dim(), y.dim())?;
    let sum: i64 = set.members().iter().map(|&i| i64::from(y.sign0(i - 1))).sum();
    Ok(if sum % 2 == 0 { 1.0 } else { 0.0 })
}

/// Embedded images of all `2^m` base points, in base index order.
pub fn parity_lift_support(m: usize) -> Result<Vec<CubePoint>> {
    capacity("lift base dimension", m, MAX_LIFT_DIM)?;
    crate::hypercube::all_points(m)?
        .map(|y| embed_lift(&y).map(|l| l.to_point()))
        .collect()
}

/// The Γ-gated network on `n = b + q` inputs `(x, y)`.
///
/// Unit `α` has weights `Γ·α` on the `b` gate coordinates and `w_α` on the
/// `q` payload coordinates, bias `Γ·b` and output weight 1. `w_table[t]` is
/// the payload for the pattern `α` with index `t` (bit `i` set iff `α_{i+1} = -1`).
pub fn gamma_gated_net(b: usize, q: usize, gamma: f64, w_table: &[Vec<f64>]) -> Result<SparseNet> {
    if b == 0 || q == 0 {
        return Err(Error::invalid("gate bits and payload dimension must be at least 1"));
    }
    capacity("gate bits", b, MAX_GATE_BITS)?;
    capacity("payload dimension", q, MAX_PAYLOAD_DIM)?;
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::invalid(format!("gamma = {gamma} must be positive")));
    }
    let s = 1usize << b;
    if w_table.len() != s {
        return Err(Error::invalid(format!("payload table has {} entries, expected {s}", w_table.len())));
    }
    let mut w = Vec::with_capacity(s);
    for (t, payload) in w_table.iter().enumerate() {
        if payload.len() != q {
            return Err(Error::invalid(format!("payload {t} has length {}, expected {q}", payload.len())));
        }
        let norm = payload.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(Error::invalid(format!("payload {t} has norm {norm} > 1")));
        }
        let mut row: Vec<f64> = pattern(b, t).into_iter().map(|a| gamma * a).collect();
        row.extend_from_slice(payload);
        w.push(row);
    }
    SparseNet::new(b + q, 1, vec![1.0; s], w, vec![gamma * b as f64; s])
}

/// `2^b` independent uniformly random unit vectors in `ℝ^q`.
pub fn random_unit_table<R: Rng + ?Sized>(b: usize, q: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    if q == 0 {
        return Err(Error::invalid("payload dimension must be at least 1"));
    }
    capacity("gate bits", b, MAX_GATE_BITS)?;
    capacity("payload dimension", q, MAX_PAYLOAD_DIM)?;
    Ok((0..1usize << b)
        .map(|_| loop {
            let v: Vec<f64> = (0..q).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        })
        .collect())
}

/// A random 1-sparse net with integer weights and biases in `{-M..M}` and
/// output weights uniform in `[-2, 2]`.
///
/// Draws are rejected until the net passes an exhaustive 1-sparsity check.
pub fn random_grid_net<R: Rng + ?Sized>(n: usize, s: usize, grid_m: i64, rng: &mut R) -> Result<SparseNet> {
    if n == 0 || s == 0 || grid_m < 0 {
        return Err(Error::invalid("n and s must be at least 1 and M non-negative"));
    }
    capacity("grid net dimension", n, MAX_GRID_NET_DIM)?;
    let draw = |rng: &mut R| f64::from(rng.gen_range(-grid_m..=grid_m) as i32);
    for _ in 0..GRID_NET_ATTEMPTS {
        let w = (0..s).map(|_| (0..n).map(|_| draw(rng)).collect()).collect();
        let b = (0..s).map(|_| draw(rng)).collect();
        let u = (0..s).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let net = SparseNet::new(n, 1, u, w, b)?;
        if net.verify_sparsity(1, SparsityMode::Exhaustive)?.holds() {
            return Ok(net);
        }
    }
    Err(Error::Capacity {
        what: "grid net draws",
        requested: GRID_NET_ATTEMPTS as u64 + 1,
        limit: GRID_NET_ATTEMPTS as u64,
    })
}
