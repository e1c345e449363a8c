//! Exact Fourier analysis of functions on `{-1,1}^n` for `n ≤ 20`.
//!
//! Values and coefficients are dense arrays of length `2^n`: values in point
//! index order, coefficients by subset bitmask (see [`crate::hypercube`]).
//! At the cap a table holds `2^20` doubles, 8 MiB.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::hypercube::{sample_noisy, sample_uniform, CubePoint, Subset};
use crate::network::SparseNet;
use crate::seed::{self, Moments};

/// Largest dimension for dense tables.
pub const MAX_FOURIER_DIM: usize = 20;

/// Relative tolerance for exact identities such as Parseval.
pub const EXACT_REL_TOL: f64 = 1e-9;
/// Absolute tolerance for transform round trips.
pub const ROUND_TRIP_TOL: f64 = 1e-10;
/// Monte-Carlo acceptance width, in standard errors.
pub const MC_SIGMAS: f64 = 4.0;

fn check_fourier_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if n > MAX_FOURIER_DIM {
        return Err(Error::Capacity {
            what: "dense table dimension",
            requested: n as u64,
            limit: MAX_FOURIER_DIM as u64,
        });
    }
    Ok(())
}

/// A real function on the cube, tabulated.
#[derive(Clone, Debug, PartialEq)]
pub struct CubeFunction {
    n: usize,
    values: Vec<f64>,
}

impl CubeFunction {
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        check_fourier_dim(n)?;
        check_dim(1 << n, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("function values must be finite"));
        }
        Ok(CubeFunction { n, values })
    }

    /// Evaluates `f` at every point in index order.
    pub fn tabulate<F>(n: usize, f: F) -> Result<Self>
    where
        F: Fn(&CubePoint) -> f64 + Sync,
    {
        check_fourier_dim(n)?;
        let values = (0..1u64 << n)
            .into_par_iter()
            .map(|i| f(&CubePoint::from_index_unchecked(n, i)))
            .collect();
        CubeFunction::from_values(n, values)
    }

    pub fn from_net(net: &SparseNet) -> Result<Self> {
        check_fourier_dim(net.n())?;
        let n = net.n();
        let values = (0..1u64 << n)
            .into_par_iter()
            .map(|i| net.eval_signs(&CubePoint::from_index_unchecked(n, i).to_f64()))
            .collect();
        CubeFunction::from_values(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, x: &CubePoint) -> Result<f64> {
        check_dim(self.n, x.dim())?;
        Ok(self.values[x.index().expect("n <= 20") as usize])
    }

    /// `E_x[f(x)²]`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64
    }
}

/// Fourier coefficients `f̂(T)` indexed by subset bitmask.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    n: usize,
    coeffs: Vec<f64>,
}

impl Spectrum {
    pub fn from_coeffs(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_fourier_dim(n)?;
        check_dim(1 << n, coeffs.len())?;
        Ok(Spectrum { n, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, t: &Subset) -> Result<f64> {
        check_dim(self.n, t.dim())?;
        Ok(self.coeffs[t.mask().expect("n <= 20") as usize])
    }

    /// `Σ_T f̂(T)²`.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// `Σ_T |T|·f̂(T)²`.
    pub fn degree_weighted_mass(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(t, c)| (t as u64).count_ones() as f64 * c * c)
            .sum()
    }

    /// `Σ_{|T|≤d} f̂(T)²`.
    pub fn low_mass(&self, d: usize) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(t, _)| (*t as u64).count_ones() as usize <= d)
            .map(|(_, c)| c * c)
            .sum()
    }

    /// `Σ_{|T|>d} f̂(T)²`.
    pub fn tail_mass(&self, d: usize) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(t, _)| (*t as u64).count_ones() as usize > d)
            .map(|(_, c)| c * c)
            .sum()
    }

    /// `f̂` with every coefficient above degree `d` zeroed.
    pub fn truncated(&self, d: usize) -> Spectrum {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(t, &c)| if (t as u64).count_ones() as usize <= d { c } else { 0.0 })
            .collect();
        Spectrum { n: self.n, coeffs }
    }

    /// Writes `bitmask,coefficient` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "bitmask,coefficient")?;
        for (t, c) in self.coeffs.iter().enumerate() {
            writeln!(out, "{t},{c:?}")?;
        }
        Ok(())
    }
}

fn butterfly(values: &mut [f64]) {
    let len = values.len();
    let mut h = 1;
    while h < len {
        for block in values.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// `f̂(T) = 2^{-n} Σ_x f(x) χ_T(x)` by the fast transform.
pub fn wht(f: &CubeFunction) -> Spectrum {
    let mut coeffs = f.values.clone();
    butterfly(&mut coeffs);
    let scale = 1.0 / coeffs.len() as f64;
    for c in &mut coeffs {
        *c *= scale;
    }
    Spectrum { n: f.n, coeffs }
}

/// `f(x) = Σ_T f̂(T) χ_T(x)`.
pub fn inverse_wht(spec: &Spectrum) -> CubeFunction {
    let mut values = spec.coeffs.clone();
    butterfly(&mut values);
    CubeFunction { n: spec.n, values }
}

/// `sen_f(x) = ¼ Σ_i (f(x) - f(x^{⊕i}))²`.
pub fn sensitivity_at(f: &CubeFunction, x: &CubePoint) -> Result<f64> {
    check_dim(f.n, x.dim())?;
    Ok(sensitivity_index(f, x.index().expect("n <= 20") as usize))
}

fn sensitivity_index(f: &CubeFunction, idx: usize) -> f64 {
    let v = f.values[idx];
    (0..f.n)
        .map(|i| {
            let d = v - f.values[idx ^ (1 << i)];
            0.25 * d * d
        })
        .sum()
}

/// `AS(f) = E_x[sen_f(x)]`, exactly.
pub fn avg_sensitivity_exact(f: &CubeFunction) -> f64 {
    let per_point: Vec<f64> = (0..f.values.len())
        .into_par_iter()
        .map(|idx| sensitivity_index(f, idx))
        .collect();
    per_point.iter().sum::<f64>() / f.values.len() as f64
}

fn check_rho(rho: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::invalid(format!("rho = {rho} outside [-1, 1]")));
    }
    Ok(())
}

/// `NS_ρ(f) = Σ_T ½(1 - ρ^{|T|}) f̂(T)²`.
pub fn noise_sensitivity_exact(spec: &Spectrum, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(spec
        .coeffs
        .iter()
        .enumerate()
        .map(|(t, c)| 0.5 * (1.0 - rho.powi((t as u64).count_ones() as i32)) * c * c)
        .sum())
}

/// A Monte-Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Sample mean of `¼(f(x) - f(y))²` with `x` uniform and `y ~ N_ρ(x)`.
pub fn noise_sensitivity_mc(f: &CubeFunction, rho: f64, trials: u64, seed: u64) -> Result<McEstimate> {
    noise_sensitivity_mc_with(f.n, |x| f.values[x.index().expect("n <= 20") as usize], rho, trials, seed)
}

/// As [`noise_sensitivity_mc`] for any function of `n` inputs.
pub fn noise_sensitivity_mc_with<F>(n: usize, f: F, rho: f64, trials: u64, seed: u64) -> Result<McEstimate>
where
    F: Fn(&CubePoint) -> f64 + Sync,
{
    check_rho(rho)?;
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    CubePoint::ones(n)?;
    let moments = seed::chunked(trials, seed, |_, len, rng| {
        let mut m = Moments::default();
        for _ in 0..len {
            let x = sample_uniform(n, rng).expect("valid dimension");
            let y = sample_noisy(&x, rho, rng).expect("valid rho");
            let d = f(&x) - f(&y);
            m.push(0.25 * d * d);
        }
        m
    })
    .into_iter()
    .fold(Moments::default(), Moments::merge);
    Ok(McEstimate {
        estimate: moments.mean(),
        stderr: moments.stderr(),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::{all_points, character};
    use crate::seed::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn parity(n: usize) -> CubeFunction {
        let full = Subset::from_members(n, &(1..=n).collect::<Vec<_>>()).unwrap();
        CubeFunction::tabulate(n, |x| f64::from(character(&full, x).unwrap())).unwrap()
    }

    fn dictator01(n: usize) -> CubeFunction {
        CubeFunction::tabulate(n, |x| if x.sign(1).unwrap() > 0 { 1.0 } else { 0.0 }).unwrap()
    }

    fn random_function(n: usize, seed: u64) -> CubeFunction {
        let mut rng = rng_from_seed(seed);
        CubeFunction::from_values(n, (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    /// Direct `O(4^n)` evaluation of each coefficient from the definition.
    fn naive_coeffs(f: &CubeFunction) -> Vec<f64> {
        let n = f.n();
        let points: Vec<_> = all_points(n).unwrap().collect();
        (0..1u64 << n)
            .map(|t| {
                let set = Subset::from_mask(n, t).unwrap();
                points
                    .iter()
                    .map(|x| f.at(x).unwrap() * f64::from(character(&set, x).unwrap()))
                    .sum::<f64>()
                    / points.len() as f64
            })
            .collect()
    }

    #[test]
    fn tabulate_examples() {
        let one = CubeFunction::tabulate(3, |_| 1.0).unwrap();
        assert!(one.values().iter().all(|&v| v == 1.0));
        let first = Subset::from_members(3, &[1]).unwrap();
        let chi = CubeFunction::tabulate(3, |x| f64::from(character(&first, x).unwrap())).unwrap();
        assert_eq!(chi.values(), &[1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0]);
        assert!(matches!(CubeFunction::tabulate(21, |_| 0.0), Err(Error::Capacity { .. })));
    }

    #[test]
    fn wht_examples() {
        let spec = wht(&parity(2));
        assert_eq!(spec.coeffs(), &[0.0, 0.0, 0.0, 1.0]);
        let spec = wht(&CubeFunction::tabulate(4, |_| -2.5).unwrap());
        assert_eq!(spec.coeffs()[0], -2.5);
        assert!(spec.coeffs()[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn fast_transform_matches_definition() {
        for seed in 0..5 {
            let f = random_function(6, seed);
            let fast = wht(&f);
            for (a, b) in fast.coeffs().iter().zip(naive_coeffs(&f)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tail_mass_examples() {
        let spec = wht(&parity(2));
        assert_eq!(spec.tail_mass(1), 1.0);
        let f = random_function(5, 9);
        let spec = wht(&f);
        assert_eq!(spec.tail_mass(5), 0.0);
        for d in 0..=5 {
            assert!((spec.tail_mass(d) + spec.low_mass(d) - f.norm_sq()).abs() < 1e-10);
            if d > 0 {
                assert!(spec.tail_mass(d) <= spec.tail_mass(d - 1));
            }
        }
    }

    #[test]
    fn sensitivity_examples() {
        let par = parity(5);
        let cst = CubeFunction::tabulate(5, |_| 4.0).unwrap();
        let dic = dictator01(5);
        for x in all_points(5).unwrap() {
            assert_eq!(sensitivity_at(&par, &x).unwrap(), 5.0);
            assert_eq!(sensitivity_at(&cst, &x).unwrap(), 0.0);
            assert_eq!(sensitivity_at(&dic, &x).unwrap(), 0.25);
        }
        assert_eq!(avg_sensitivity_exact(&par), 5.0);
        assert_eq!(avg_sensitivity_exact(&dic), 0.25);
    }

    #[test]
    fn noise_sensitivity_examples() {
        let spec = wht(&parity(3));
        assert_eq!(noise_sensitivity_exact(&spec, 1.0).unwrap(), 0.0);
        for rho in [-0.5, 0.0, 0.3, 0.9] {
            let ns = noise_sensitivity_exact(&spec, rho).unwrap();
            assert!((ns - 0.5 * (1.0 - rho.powi(3))).abs() < 1e-15);
        }
        let cst = wht(&CubeFunction::tabulate(3, |_| 7.0).unwrap());
        assert_eq!(noise_sensitivity_exact(&cst, 0.2).unwrap(), 0.0);
        assert!(noise_sensitivity_exact(&cst, 1.5).is_err());
    }

    #[test]
    fn mc_is_exact_without_noise() {
        let est = noise_sensitivity_mc(&random_function(6, 2), 1.0, 5000, 4).unwrap();
        assert_eq!(est.estimate, 0.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn mc_matches_parity_formula() {
        let est = noise_sensitivity_mc(&parity(2), 0.5, 100_000, 11).unwrap();
        assert!((est.estimate - 0.375).abs() <= MC_SIGMAS * est.stderr);
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        wht(&parity(1)).write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "bitmask,coefficient\n0,0.0\n1,1.0\n");
    }

    proptest! {
        #[test]
        fn parseval_and_round_trip(n in 1usize..9, seed: u64) {
            let f = random_function(n, seed);
            let spec = wht(&f);
            let energy = f.norm_sq();
            prop_assert!((spec.norm_sq() - energy).abs() <= EXACT_REL_TOL * energy.max(1e-300));
            let back = inverse_wht(&spec);
            for (a, b) in back.values().iter().zip(f.values()) {
                prop_assert!((a - b).abs() <= ROUND_TRIP_TOL);
            }
            let spectral = spec.degree_weighted_mass();
            prop_assert!((avg_sensitivity_exact(&f) - spectral).abs() <= EXACT_REL_TOL * spectral.max(1.0));
        }
    }
}
