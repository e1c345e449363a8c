//! Points, coordinate subsets and samplers on the hypercube `{-1, 1}^n`.
//!
//! # Index encoding
//!
//! For small `n` every point has an integer index in `0..2^n`:
//! coordinate `i` (1-based) is `+1` iff bit `i - 1` of the index is `0`.
//! The all-ones point is index 0. Functions on the cube are stored as dense
//! arrays in this order, and a subset `T` is identified with the bitmask
//! whose bit `i - 1` is set iff `i ∈ T`, so `χ_T(x) = (-1)^popcount(T & x)`.
//!
//! Coordinates are 1-based in the public API and 0-based internally.

use rand::Rng;

use crate::error::{check_dim, Error, Result};

/// Largest dimension for which points are enumerated exhaustively.
pub const MAX_EXHAUSTIVE_DIM: usize = 24;

/// Largest dimension accepted for a single point.
pub const MAX_DIM: usize = 1 << 16;

fn word_count(n: usize) -> usize {
    n.div_ceil(64)
}

fn check_point_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if n > MAX_DIM {
        return Err(Error::Capacity {
            what: "point dimension",
            requested: n as u64,
            limit: MAX_DIM as u64,
        });
    }
    Ok(())
}

fn check_coord(n: usize, i: usize) -> Result<usize> {
    if i == 0 || i > n {
        Err(Error::invalid(format!("coordinate {i} outside 1..={n}")))
    } else {
        Ok(i - 1)
    }
}

/// A point of `{-1, 1}^n`, bit-packed (a set bit is a `-1` coordinate).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CubePoint {
    n: usize,
    words: Vec<u64>,
}

impl CubePoint {
    /// The all-`+1` point.
    pub fn ones(n: usize) -> Result<Self> {
        check_point_dim(n)?;
        Ok(CubePoint {
            n,
            words: vec![0; word_count(n)],
        })
    }

    /// Builds a point from its index; requires `n ≤ 64` and `index < 2^n`.
    pub fn from_index(n: usize, index: u64) -> Result<Self> {
        check_point_dim(n)?;
        if n > 64 {
            return Err(Error::invalid("index encoding needs n <= 64"));
        }
        if n < 64 && index >> n != 0 {
            return Err(Error::invalid(format!("index {index} outside 0..2^{n}")));
        }
        Ok(CubePoint {
            n,
            words: vec![index],
        })
    }

    pub(crate) fn from_index_unchecked(n: usize, index: u64) -> Self {
        debug_assert!(n <= 64);
        CubePoint {
            n,
            words: vec![index],
        }
    }

    /// Builds a point from `±1` entries.
    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        let mut p = CubePoint::ones(signs.len())?;
        for (i, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => p.words[i / 64] |= 1 << (i % 64),
                _ => return Err(Error::invalid(format!("coordinate {} is {s}, not ±1", i + 1))),
            }
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Index of the point, available when `n ≤ 64`.
    pub fn index(&self) -> Option<u64> {
        (self.n <= 64).then(|| self.words[0])
    }

    #[inline]
    pub(crate) fn sign0(&self, i: usize) -> i8 {
        if self.words[i / 64] >> (i % 64) & 1 == 1 {
            -1
        } else {
            1
        }
    }

    /// Coordinate `i` (1-based).
    pub fn sign(&self, i: usize) -> Result<i8> {
        Ok(self.sign0(check_coord(self.n, i)?))
    }

    pub fn signs(&self) -> impl Iterator<Item = i8> + '_ {
        (0..self.n).map(move |i| self.sign0(i))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.signs().map(f64::from).collect()
    }

    /// `x^{⊕i}`: the point with coordinate `i` (1-based) negated.
    pub fn flip(&self, i: usize) -> Result<CubePoint> {
        let i0 = check_coord(self.n, i)?;
        let mut out = self.clone();
        out.words[i0 / 64] ^= 1 << (i0 % 64);
        Ok(out)
    }

    /// `-x`.
    pub fn negated(&self) -> CubePoint {
        let mut out = self.clone();
        for w in &mut out.words {
            *w = !*w;
        }
        out.clear_padding();
        out
    }

    pub fn hamming(&self, other: &CubePoint) -> Result<usize> {
        check_dim(self.n, other.n)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    fn clear_padding(&mut self) {
        let rem = self.n % 64;
        if rem != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << rem) - 1;
        }
    }
}

/// A subset `T ⊆ [n]`, bit-packed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset {
    n: usize,
    words: Vec<u64>,
}

impl Subset {
    pub fn empty(n: usize) -> Subset {
        Subset {
            n,
            words: vec![0; word_count(n).max(1)],
        }
    }

    /// Builds `T` from 1-based member indices; repeated members are merged.
    pub fn from_members(n: usize, members: &[usize]) -> Result<Subset> {
        let mut t = Subset::empty(n);
        for &i in members {
            let i0 = check_coord(n, i)?;
            t.words[i0 / 64] |= 1 << (i0 % 64);
        }
        Ok(t)
    }

    /// Builds `T` from its bitmask; requires `n ≤ 64`.
    pub fn from_mask(n: usize, mask: u64) -> Result<Subset> {
        if n > 64 || (n < 64 && mask >> n != 0) {
            return Err(Error::invalid(format!("mask {mask:#x} does not fit n = {n}")));
        }
        Ok(Subset {
            n,
            words: vec![mask],
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> Option<u64> {
        (self.n <= 64).then(|| self.words[0])
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn contains(&self, i: usize) -> bool {
        i >= 1 && i <= self.n && self.words[(i - 1) / 64] >> ((i - 1) % 64) & 1 == 1
    }

    /// Members as sorted 1-based indices.
    pub fn members(&self) -> Vec<usize> {
        (1..=self.n).filter(|&i| self.contains(i)).collect()
    }
}

/// `χ_T(x) = ∏_{j∈T} x_j`; the empty product is `+1`.
pub fn character(t: &Subset, x: &CubePoint) -> Result<i8> {
    check_dim(t.n, x.n)?;
    let odd = t
        .words
        .iter()
        .zip(&x.words)
        .map(|(a, b)| (a & b).count_ones())
        .sum::<u32>()
        & 1;
    Ok(if odd == 1 { -1 } else { 1 })
}

/// A uniformly random point.
pub fn sample_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CubePoint> {
    let mut p = CubePoint::ones(n)?;
    for w in &mut p.words {
        *w = rng.gen();
    }
    p.clear_padding();
    Ok(p)
}

fn check_rho(rho: f64, lo: f64) -> Result<()> {
    if !(lo..=1.0).contains(&rho) {
        return Err(Error::invalid(format!("rho = {rho} outside [{lo}, 1]")));
    }
    Ok(())
}

/// A draw from `N_ρ(x)`: each coordinate flipped independently with
/// probability `(1 - ρ)/2`.
pub fn sample_noisy<R: Rng + ?Sized>(x: &CubePoint, rho: f64, rng: &mut R) -> Result<CubePoint> {
    check_rho(rho, -1.0)?;
    let p = (1.0 - rho) / 2.0;
    let mut y = x.clone();
    for i in 0..x.n {
        if rng.gen::<f64>() < p {
            y.words[i / 64] ^= 1 << (i % 64);
        }
    }
    Ok(y)
}

/// One draw of the bucketed correlated-pair procedure.
#[derive(Clone, Debug, PartialEq)]
pub struct BucketPair {
    pub x: CubePoint,
    pub y: CubePoint,
    /// Number of buckets, `⌊2/(1-ρ)⌋`.
    pub r: usize,
    /// The bucket whose sign was flipped to produce `y` (1-based).
    pub bucket: usize,
    /// The uniform base point.
    pub z: CubePoint,
    /// Bucket (1-based) of each coordinate.
    pub assignment: Vec<usize>,
    /// Bucket signs used for `x`.
    pub v: Vec<i8>,
}

impl BucketPair {
    /// Buckets as lists of 1-based coordinates; some may be empty.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        let mut buckets = vec![Vec::new(); self.r];
        for (i, &e) in self.assignment.iter().enumerate() {
            buckets[e - 1].push(i + 1);
        }
        buckets
    }
}

/// Bucket count `⌊2/(1-ρ)⌋` for `ρ ∈ [0, 1)`.
pub fn bucket_count(rho: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::invalid(format!("rho = {rho} outside [0, 1)")));
    }
    Ok((2.0 / (1.0 - rho)).floor() as usize)
}

/// Samples `(x, y)` by bucketing: draw `z` uniform, assign every coordinate
/// to one of `r` buckets, draw a sign `v_e` per bucket and set
/// `x_l = z_l v_{e(l)}`; `y` is `x` with one uniformly chosen bucket negated.
///
/// Each coordinate of `y` differs from `x` independently with probability
/// `1/r`, which equals `(1-ρ)/2` only when `2/(1-ρ)` is an integer.
pub fn sample_bucket_pair<R: Rng + ?Sized>(n: usize, rho: f64, rng: &mut R) -> Result<BucketPair> {
    let r = bucket_count(rho)?;
    let z = sample_uniform(n, rng)?;
    let assignment: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=r)).collect();
    let v: Vec<i8> = (0..r).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    let bucket = rng.gen_range(1..=r);
    let x = reconstruct_from_buckets(&z, &assignment, &v)?;
    let mut y = x.clone();
    for (i, &e) in assignment.iter().enumerate() {
        if e == bucket {
            y.words[i / 64] ^= 1 << (i % 64);
        }
    }
    Ok(BucketPair {
        x,
        y,
        r,
        bucket,
        z,
        assignment,
        v,
    })
}

/// `x_l = z_l · v_{e(l)}` where `assignment[l]` is the 1-based bucket of `l`.
pub fn reconstruct_from_buckets(z: &CubePoint, assignment: &[usize], v: &[i8]) -> Result<CubePoint> {
    check_dim(z.n, assignment.len())?;
    let mut x = z.clone();
    for (i, &e) in assignment.iter().enumerate() {
        let sign = *v
            .get(e.wrapping_sub(1))
            .ok_or_else(|| Error::invalid(format!("bucket {e} has no sign")))?;
        match sign {
            1 => {}
            -1 => x.words[i / 64] ^= 1 << (i % 64),
            _ => return Err(Error::invalid("bucket signs must be ±1")),
        }
    }
    Ok(x)
}

/// Converts a partition (buckets of 1-based coordinates) into a per-coordinate
/// assignment, checking that every coordinate appears exactly once.
pub fn partition_assignment(n: usize, partition: &[Vec<usize>]) -> Result<Vec<usize>> {
    if partition.is_empty() {
        return Err(Error::invalid("partition needs at least one bucket"));
    }
    let mut assignment = vec![0usize; n];
    for (e, bucket) in partition.iter().enumerate() {
        for &i in bucket {
            let i0 = check_coord(n, i)?;
            if assignment[i0] != 0 {
                return Err(Error::invalid(format!("coordinate {i} appears in two buckets")));
            }
            assignment[i0] = e + 1;
        }
    }
    if let Some(i0) = assignment.iter().position(|&e| e == 0) {
        return Err(Error::invalid(format!("coordinate {} is in no bucket", i0 + 1)));
    }
    Ok(assignment)
}

/// Iterates every point of `{-1,1}^n` in index order.
pub fn all_points(n: usize) -> Result<impl Iterator<Item = CubePoint>> {
    check_point_dim(n)?;
    if n > MAX_EXHAUSTIVE_DIM {
        return Err(Error::Capacity {
            what: "exhaustive enumeration dimension",
            requested: n as u64,
            limit: MAX_EXHAUSTIVE_DIM as u64,
        });
    }
    Ok((0..1u64 << n).map(move |i| CubePoint::from_index_unchecked(n, i)))
}
