//! Low-degree polynomial regression and the generalized-decision-list learner.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::JuntaSpec;
use crate::error::{check_dim, Error, Result};
use crate::fourier::{CubeFunction, MAX_FOURIER_DIM};
use crate::hypercube::{all_points, sample_uniform, CubePoint};
use crate::network::SparseNet;
use crate::seed;

/// Cap on the number of monomials of degree at most `d`.
pub const MAX_MONOMIALS: u64 = 100_000;
/// Cap on the side of the normal-equation matrix (a 4096² matrix is 128 MiB).
pub const MAX_NORMAL_DIM: u64 = 4096;
/// Cap on the gate grid size `(2M+1)^{n+1}`.
pub const MAX_GATE_GRID: u64 = 78_125;
/// Ridge used when the caller has no preference.
pub const DEFAULT_RIDGE: f64 = 1e-10;
/// Leaf residual tolerance used when the caller has no preference.
pub const DEFAULT_TOL: f64 = 1e-6;

/// One labeled example.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample {
    pub x: CubePoint,
    pub y: f64,
}

impl LabeledSample {
    pub fn new(x: CubePoint, y: f64) -> Result<Self> {
        if !y.is_finite() {
            return Err(Error::invalid("labels must be finite"));
        }
        Ok(LabeledSample { x, y })
    }
}

fn check_data(data: &[LabeledSample]) -> Result<usize> {
    let first = data.first().ok_or_else(|| Error::invalid("data set is empty"))?;
    let n = first.x.dim();
    for s in data {
        check_dim(n, s.x.dim())?;
    }
    Ok(n)
}

/// Anything that maps cube points to reals.
pub trait Predictor {
    fn input_dim(&self) -> usize;
    fn predict(&self, x: &CubePoint) -> Result<f64>;
}

impl Predictor for SparseNet {
    fn input_dim(&self) -> usize {
        self.n()
    }

    fn predict(&self, x: &CubePoint) -> Result<f64> {
        self.eval(x)
    }
}

impl Predictor for JuntaSpec {
    fn input_dim(&self) -> usize {
        self.n()
    }

    fn predict(&self, x: &CubePoint) -> Result<f64> {
        self.eval(x)
    }
}

impl Predictor for CubeFunction {
    fn input_dim(&self) -> usize {
        self.n()
    }

    fn predict(&self, x: &CubePoint) -> Result<f64> {
        self.at(x)
    }
}

/// Mean `½(ŷ - y)²` over a data set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub mse: f64,
    pub count: usize,
}

pub fn evaluate_loss<P: Predictor + ?Sized>(predictor: &P, data: &[LabeledSample]) -> Result<LossReport> {
    check_data(data)?;
    let mut total = 0.0;
    for s in data {
        let d = predictor.predict(&s.x)? - s.y;
        total += 0.5 * d * d;
    }
    Ok(LossReport {
        mse: total / data.len() as f64,
        count: data.len(),
    })
}

/// Labels every point of the cube with `target`.
pub fn full_cube_data<P: Predictor + Sync + ?Sized>(target: &P) -> Result<Vec<LabeledSample>> {
    let n = target.input_dim();
    if n > MAX_FOURIER_DIM {
        return Err(Error::Capacity {
            what: "full-cube data set dimension",
            requested: n as u64,
            limit: MAX_FOURIER_DIM as u64,
        });
    }
    all_points(n)?
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|x| {
            let y = target.predict(&x)?;
            LabeledSample::new(x, y)
        })
        .collect()
}

/// `m` uniform points labeled by `target`.
pub fn uniform_data<P: Predictor + Sync + ?Sized>(target: &P, m: u64, seed: u64) -> Result<Vec<LabeledSample>> {
    let n = target.input_dim();
    CubePoint::ones(n)?;
    let chunks = seed::chunked(m, seed, |_, len, rng| {
        (0..len)
            .map(|_| {
                let x = sample_uniform(n, rng)?;
                let y = target.predict(&x)?;
                LabeledSample::new(x, y)
            })
            .collect::<Result<Vec<_>>>()
    });
    let mut out = Vec::with_capacity(m as usize);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// `Σ_{j≤d} C(n, j)`, saturating.
pub fn monomial_count(n: usize, d: usize) -> u64 {
    let mut total: u64 = 0;
    let mut binom: u64 = 1;
    for j in 0..=d.min(n) {
        total = total.saturating_add(binom);
        binom = (binom as u128 * (n - j) as u128 / (j + 1) as u128).min(u64::MAX as u128) as u64;
    }
    total
}

/// All subsets of `0..n` with at most `d` elements, by size then lexicographically.
fn monomials(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for size in 1..=d.min(n) {
        let mut comb: Vec<usize> = (0..size).collect();
        loop {
            out.push(comb.clone());
            let mut i = size;
            while i > 0 && comb[i - 1] == n - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            comb[i - 1] += 1;
            for j in i..size {
                comb[j] = comb[j - 1] + 1;
            }
        }
    }
    out
}

fn monomial_value(members: &[usize], x: &[f64]) -> f64 {
    members.iter().map(|&i| x[i]).product()
}

/// One coefficient of a [`MonomialModel`], with 1-based members.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub members: Vec<usize>,
    pub coeff: f64,
}

/// `g(x) = Σ_T ĝ(T) χ_T(x)` over subsets with `|T| ≤ d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialModel {
    n: usize,
    d: usize,
    terms: Vec<Term>,
}

impl MonomialModel {
    pub fn new(n: usize, d: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.members.len() > d {
                return Err(Error::invalid(format!("term {:?} exceeds degree {d}", t.members)));
            }
            if t.members.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid("term members must be strictly increasing"));
            }
            if t.members.iter().any(|&i| i == 0 || i > n) {
                return Err(Error::invalid(format!("term {:?} has a coordinate outside 1..={n}", t.members)));
            }
            if !t.coeff.is_finite() {
                return Err(Error::invalid("coefficients must be finite"));
            }
        }
        Ok(MonomialModel { n, d, terms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Coefficient of the monomial on 1-based `members`, zero if absent.
    pub fn coeff(&self, members: &[usize]) -> f64 {
        self.terms
            .iter()
            .find(|t| t.members == members)
            .map_or(0.0, |t| t.coeff)
    }
}

impl Predictor for MonomialModel {
    fn input_dim(&self) -> usize {
        self.n
    }

    fn predict(&self, x: &CubePoint) -> Result<f64> {
        check_dim(self.n, x.dim())?;
        Ok(self
            .terms
            .iter()
            .map(|t| t.coeff * t.members.iter().map(|&i| f64::from(x.sign0(i - 1))).product::<f64>())
            .sum())
    }
}

fn well_conditioned(chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>) -> bool {
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = (diag.min(), diag.max());
    hi > 0.0 && lo / hi > 1e-6
}

/// Minimum-norm solution of a symmetric positive semi-definite system.
fn pseudo_solve(gram: DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let eig = gram.symmetric_eigen();
    let cutoff = 1e-10 * eig.eigenvalues.amax();
    let projected = eig.eigenvectors.tr_mul(rhs);
    let scaled = DVector::from_iterator(
        projected.len(),
        projected
            .iter()
            .zip(eig.eigenvalues.iter())
            .map(|(p, &l)| if l > cutoff { p / l } else { 0.0 }),
    );
    &eig.eigenvectors * scaled
}

/// Least-squares regression onto all monomials of degree at most `d`,
/// minimizing `Σ_i (g(x_i) - y_i)² + ridge·‖ĝ‖²`.
pub fn fit_low_degree(data: &[LabeledSample], d: usize, ridge: f64) -> Result<MonomialModel> {
    let n = check_data(data)?;
    if d > n {
        return Err(Error::invalid(format!("degree {d} exceeds n = {n}")));
    }
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(Error::invalid(format!("ridge = {ridge} must be finite and non-negative")));
    }
    let count = monomial_count(n, d);
    if count > MAX_MONOMIALS {
        return Err(Error::Capacity {
            what: "monomial count",
            requested: count,
            limit: MAX_MONOMIALS,
        });
    }
    if count > MAX_NORMAL_DIM {
        return Err(Error::Capacity {
            what: "normal-equation dimension",
            requested: count,
            limit: MAX_NORMAL_DIM,
        });
    }
    let basis = monomials(n, d);
    let p = basis.len();
    let rows: Vec<f64> = data
        .par_iter()
        .flat_map_iter(|s| {
            let x = s.x.to_f64();
            basis.iter().map(move |m| monomial_value(m, &x)).collect::<Vec<_>>()
        })
        .collect();
    let design = DMatrix::from_row_slice(data.len(), p, &rows);
    let labels = DVector::from_iterator(data.len(), data.iter().map(|s| s.y));
    let mut gram = design.tr_mul(&design);
    for i in 0..p {
        gram[(i, i)] += ridge;
    }
    let rhs = design.tr_mul(&labels);
    let coeffs = match gram.clone().cholesky() {
        Some(chol) if well_conditioned(&chol) => chol.solve(&rhs),
        _ => pseudo_solve(gram, &rhs),
    };
    let terms = basis
        .into_iter()
        .zip(coeffs.iter())
        .map(|(members, &coeff)| Term {
            members: members.into_iter().map(|i| i + 1).collect(),
            coeff,
        })
        .collect();
    MonomialModel::new(n, d, terms)
}

/// Halfspace gate firing when `⟨w, x⟩ - b > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub w: Vec<i64>,
    pub b: i64,
}

impl Gate {
    pub fn fires(&self, x: &CubePoint) -> bool {
        let dot: i64 = self.w.iter().enumerate().map(|(i, w)| w * i64::from(x.sign0(i))).sum();
        dot - self.b > 0
    }
}

/// Affine leaf `g(x) = ⟨v, x⟩ + c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineLeaf {
    pub v: Vec<f64>,
    pub c: f64,
}

impl AffineLeaf {
    pub fn eval(&self, x: &CubePoint) -> f64 {
        self.v.iter().zip(x.signs()).map(|(v, s)| v * f64::from(s)).sum::<f64>() + self.c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionNode {
    pub gate: Gate,
    pub leaf: AffineLeaf,
}

/// "If `h_1(x) > 0` predict `g_1(x)`, else if `h_2(x) > 0` …, else predict `default`."
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedDecisionList {
    pub n: usize,
    pub nodes: Vec<DecisionNode>,
    pub default: f64,
}

impl GeneralizedDecisionList {
    pub fn empty(n: usize, default: f64) -> Self {
        GeneralizedDecisionList {
            n,
            nodes: Vec::new(),
            default,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Prediction of the first node whose gate fires, else the default.
pub fn dl_predict(list: &GeneralizedDecisionList, x: &CubePoint) -> Result<f64> {
    check_dim(list.n, x.dim())?;
    for node in &list.nodes {
        check_dim(list.n, node.gate.w.len())?;
        check_dim(list.n, node.leaf.v.len())?;
        if node.gate.fires(x) {
            return Ok(node.leaf.eval(x));
        }
    }
    Ok(list.default)
}

impl Predictor for GeneralizedDecisionList {
    fn input_dim(&self) -> usize {
        self.n
    }

    fn predict(&self, x: &CubePoint) -> Result<f64> {
        dl_predict(self, x)
    }
}

/// `(2M+1)^{n+1}`, saturating.
pub fn gate_grid_size(n: usize, grid_m: u64) -> u64 {
    let base = 2 * grid_m + 1;
    (0..=n).fold(1u64, |acc, _| acc.saturating_mul(base))
}

/// Gate with grid index `idx`; digits in base `2M+1`, `w_1` most significant and `b` last.
fn decode_gate(n: usize, grid_m: u64, mut idx: u64) -> Gate {
    let base = 2 * grid_m + 1;
    let mut digits = vec![0i64; n + 1];
    for slot in digits.iter_mut().rev() {
        *slot = (idx % base) as i64 - grid_m as i64;
        idx /= base;
    }
    let b = digits.pop().expect("n + 1 digits");
    Gate { w: digits, b }
}

fn check_consistent(data: &[LabeledSample], tol: f64) -> Result<()> {
    let mut seen: HashMap<&CubePoint, usize> = HashMap::new();
    for (i, s) in data.iter().enumerate() {
        if let Some(&j) = seen.get(&s.x) {
            let gap = (data[j].y - s.y).abs();
            if gap > tol {
                return Err(Error::InconsistentData {
                    first: j,
                    second: i,
                    gap,
                });
            }
        } else {
            seen.insert(&s.x, i);
        }
    }
    Ok(())
}

/// Least-squares affine fit on `rows`, accepted when every residual is within `tol`.
fn affine_fit(signs: &[Vec<f64>], labels: &[f64], rows: &[usize], tol: f64) -> Option<AffineLeaf> {
    let n = signs[0].len();
    let a = DMatrix::from_fn(rows.len(), n + 1, |r, c| if c < n { signs[rows[r]][c] } else { 1.0 });
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|&r| labels[r]));
    let sol = pseudo_solve(a.tr_mul(&a), &a.tr_mul(&y));
    let residual = (&a * &sol - &y).amax();
    (residual <= tol).then(|| AffineLeaf {
        v: sol.rows(0, n).iter().copied().collect(),
        c: sol[n],
    })
}

/// Greedy peeling learner over the integer gate grid `{-M..M}^{n+1}`.
///
/// Each round scans every gate, keeps those covering at least
/// `⌈remaining/(s+1)⌉` remaining samples, and takes the one with the largest
/// coverage (ties by grid order) whose covered samples admit an affine fit
/// within `tol`. If no gate qualifies but every remaining label is within
/// `tol` of zero, the default leaf 0 covers them and the search stops.
pub fn fit_decision_list(
    data: &[LabeledSample],
    s: usize,
    grid_m: u64,
    tol: f64,
) -> Result<GeneralizedDecisionList> {
    let n = check_data(data)?;
    if s == 0 {
        return Err(Error::invalid("s must be at least 1"));
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::invalid(format!("tol = {tol} must be finite and non-negative")));
    }
    let grid = gate_grid_size(n, grid_m);
    if grid > MAX_GATE_GRID {
        return Err(Error::Capacity {
            what: "gate grid size",
            requested: grid,
            limit: MAX_GATE_GRID,
        });
    }
    check_consistent(data, tol)?;

    let signs: Vec<Vec<f64>> = data.iter().map(|s| s.x.to_f64()).collect();
    let int_signs: Vec<Vec<i64>> = data.iter().map(|s| s.x.signs().map(i64::from).collect()).collect();
    let labels: Vec<f64> = data.iter().map(|s| s.y).collect();
    let gates: Vec<Gate> = (0..grid).map(|g| decode_gate(n, grid_m, g)).collect();

    let mut remaining: Vec<usize> = (0..data.len()).collect();
    let mut nodes = Vec::new();
    while !remaining.is_empty() {
        let threshold = remaining.len().div_ceil(s + 1);
        let mut candidates: Vec<(usize, usize, Vec<usize>)> = gates
            .par_iter()
            .enumerate()
            .filter_map(|(g, gate)| {
                let covered: Vec<usize> = remaining
                    .iter()
                    .copied()
                    .filter(|&i| {
                        let dot: i64 = gate.w.iter().zip(&int_signs[i]).map(|(w, x)| w * x).sum();
                        dot - gate.b > 0
                    })
                    .collect();
                (covered.len() >= threshold).then_some((covered.len(), g, covered))
            })
            .collect();
        candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

        let mut fits: HashMap<Vec<usize>, Option<AffineLeaf>> = HashMap::new();
        let mut chosen = None;
        for (_, g, covered) in candidates {
            let leaf = fits
                .entry(covered.clone())
                .or_insert_with(|| affine_fit(&signs, &labels, &covered, tol))
                .clone();
            if let Some(leaf) = leaf {
                chosen = Some((g, covered, leaf));
                break;
            }
        }
        match chosen {
            Some((g, covered, leaf)) => {
                nodes.push(DecisionNode {
                    gate: gates[g].clone(),
                    leaf,
                });
                remaining.retain(|i| covered.binary_search(i).is_err());
            }
            None if remaining.iter().all(|&i| labels[i].abs() <= tol) => break,
            None => {
                return Err(Error::NoConsistentList {
                    remaining: remaining.len(),
                    threshold,
                })
            }
        }
    }

    let list = GeneralizedDecisionList { n, nodes, default: 0.0 };
    for sample in data {
        let residual = (dl_predict(&list, &sample.x)? - sample.y).abs();
        assert!(residual <= tol, "decision list residual {residual} exceeds tolerance {tol}");
    }
    Ok(list)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::wht;
    use crate::hypercube::{character, Subset};
    use crate::seed::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn pt(s: &[i8]) -> CubePoint {
        CubePoint::from_signs(s).unwrap()
    }

    fn parity_data(n: usize, members: &[usize]) -> Vec<LabeledSample> {
        let set = Subset::from_members(n, members).unwrap();
        let f = CubeFunction::tabulate(n, |x| f64::from(character(&set, x).unwrap())).unwrap();
        full_cube_data(&f).unwrap()
    }

    #[test]
    fn monomial_enumeration() {
        assert_eq!(monomials(3, 2), vec![vec![], vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(monomial_count(3, 2), 7);
        assert_eq!(monomial_count(10, 3), 176);
        assert_eq!(monomials(10, 3).len(), 176);
        assert_eq!(monomial_count(4, 9), 16);
    }

    #[test]
    fn full_cube_regression_recovers_spectrum() {
        let n = 5;
        let spec_terms: Vec<(Vec<usize>, f64)> = vec![(vec![], 0.5), (vec![2], -1.25), (vec![1, 4], 2.0)];
        let f = CubeFunction::tabulate(n, |x| {
            spec_terms
                .iter()
                .map(|(m, c)| c * m.iter().map(|&i| f64::from(x.sign(i).unwrap())).product::<f64>())
                .sum()
        })
        .unwrap();
        let data = full_cube_data(&f).unwrap();
        let model = fit_low_degree(&data, 2, 0.0).unwrap();
        assert!(evaluate_loss(&model, &data).unwrap().mse < 1e-20);
        let spectrum = wht(&f);
        for t in model.terms() {
            let set = Subset::from_members(n, &t.members).unwrap();
            assert!((t.coeff - spectrum.coeff(&set).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn parity_is_invisible_at_low_degree() {
        let data = parity_data(4, &[1, 2]);
        let model = fit_low_degree(&data, 1, 0.0).unwrap();
        assert!(model.terms().iter().all(|t| t.coeff.abs() < 1e-12));
        assert!((evaluate_loss(&model, &data).unwrap().mse - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_labels_are_recovered() {
        let mut rng = rng_from_seed(2);
        let data: Vec<_> = (0..50)
            .map(|_| LabeledSample::new(sample_uniform(6, &mut rng).unwrap(), 3.5).unwrap())
            .collect();
        for d in 0..=2 {
            let model = fit_low_degree(&data, d, DEFAULT_RIDGE).unwrap();
            for s in &data {
                assert!((model.predict(&s.x).unwrap() - 3.5).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn regression_errors() {
        assert!(fit_low_degree(&[], 1, 0.0).is_err());
        let data = parity_data(3, &[1]);
        assert!(fit_low_degree(&data, 4, 0.0).is_err());
        let wide = vec![LabeledSample::new(CubePoint::ones(200).unwrap(), 1.0).unwrap()];
        assert!(matches!(fit_low_degree(&wide, 3, 0.0), Err(Error::Capacity { .. })));
    }

    #[test]
    fn model_prediction_examples() {
        let empty = MonomialModel::new(3, 2, vec![]).unwrap();
        assert_eq!(empty.predict(&pt(&[1, -1, 1])).unwrap(), 0.0);
        let constant = MonomialModel::new(3, 0, vec![Term { members: vec![], coeff: 3.0 }]).unwrap();
        assert_eq!(constant.predict(&pt(&[-1, -1, 1])).unwrap(), 3.0);
        assert!(constant.predict(&pt(&[1, 1])).is_err());
        assert!(MonomialModel::new(3, 1, vec![Term { members: vec![1, 2], coeff: 1.0 }]).is_err());
    }

    #[test]
    fn truncated_model_error_is_tail_mass() {
        let mut rng = rng_from_seed(6);
        let f = CubeFunction::from_values(5, (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let spectrum = wht(&f);
        let d = 2;
        let terms = monomials(5, d)
            .into_iter()
            .map(|m| {
                let set = Subset::from_members(5, &m.iter().map(|i| i + 1).collect::<Vec<_>>()).unwrap();
                Term {
                    coeff: spectrum.coeff(&set).unwrap(),
                    members: set.members(),
                }
            })
            .collect();
        let model = MonomialModel::new(5, d, terms).unwrap();
        let data = full_cube_data(&f).unwrap();
        let err = 2.0 * evaluate_loss(&model, &data).unwrap().mse;
        assert!((err - spectrum.tail_mass(d)).abs() < 1e-8);
    }

    #[test]
    fn loss_examples() {
        let data = parity_data(3, &[1, 3]);
        let zero = MonomialModel::new(3, 0, vec![]).unwrap();
        assert_eq!(evaluate_loss(&zero, &data).unwrap().mse, 0.5);
        let f = CubeFunction::tabulate(3, |x| f64::from(x.sign(1).unwrap() * x.sign(3).unwrap())).unwrap();
        assert_eq!(evaluate_loss(&f, &data).unwrap().mse, 0.0);
        assert!(evaluate_loss(&zero, &[]).is_err());
    }

    #[test]
    fn gate_grid_order() {
        assert_eq!(gate_grid_size(2, 1), 27);
        assert_eq!(decode_gate(2, 1, 0), Gate { w: vec![-1, -1], b: -1 });
        assert_eq!(decode_gate(2, 1, 1), Gate { w: vec![-1, -1], b: 0 });
        assert_eq!(decode_gate(2, 1, 26), Gate { w: vec![1, 1], b: 1 });
    }

    #[test]
    fn dl_predict_examples() {
        let empty = GeneralizedDecisionList::empty(2, 1.5);
        assert_eq!(dl_predict(&empty, &pt(&[1, -1])).unwrap(), 1.5);
        let everywhere = GeneralizedDecisionList {
            n: 2,
            nodes: vec![DecisionNode {
                gate: Gate { w: vec![0, 0], b: -1 },
                leaf: AffineLeaf { v: vec![2.0, -1.0], c: 0.5 },
            }],
            default: 0.0,
        };
        for x in all_points(2).unwrap() {
            let expected = 2.0 * f64::from(x.sign(1).unwrap()) - f64::from(x.sign(2).unwrap()) + 0.5;
            assert_eq!(dl_predict(&everywhere, &x).unwrap(), expected);
        }
        assert!(dl_predict(&everywhere, &pt(&[1])).is_err());
    }

    #[test]
    fn recovers_single_relu() {
        let net = SparseNet::new(2, 1, vec![1.0], vec![vec![1.0, 1.0]], vec![1.0]).unwrap();
        let data = full_cube_data(&net).unwrap();
        let list = fit_decision_list(&data, 1, 1, DEFAULT_TOL).unwrap();
        for s in &data {
            assert!((dl_predict(&list, &s.x).unwrap() - s.y).abs() <= DEFAULT_TOL);
        }
    }

    #[test]
    fn recovers_two_unit_net() {
        let net = SparseNet::new(
            3,
            1,
            vec![1.5, -2.0],
            vec![vec![1.0, 1.0, 0.0], vec![-1.0, 0.0, -1.0]],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert!(net.verify_sparsity(1, crate::network::SparsityMode::Exhaustive).unwrap().holds());
        let data = full_cube_data(&net).unwrap();
        let list = fit_decision_list(&data, 2, 1, DEFAULT_TOL).unwrap();
        for x in all_points(3).unwrap() {
            assert!((dl_predict(&list, &x).unwrap() - net.eval(&x).unwrap()).abs() <= DEFAULT_TOL);
        }
    }

    #[test]
    fn inconsistent_duplicates_are_rejected() {
        let x = pt(&[1, -1]);
        let data = vec![
            LabeledSample::new(x.clone(), 0.0).unwrap(),
            LabeledSample::new(pt(&[1, 1]), 0.0).unwrap(),
            LabeledSample::new(x, 1.0).unwrap(),
        ];
        assert!(matches!(
            fit_decision_list(&data, 1, 1, DEFAULT_TOL),
            Err(Error::InconsistentData { first: 0, second: 2, .. })
        ));
    }

    #[test]
    fn grid_capacity_is_enforced() {
        let data = vec![LabeledSample::new(CubePoint::ones(7).unwrap(), 0.0).unwrap()];
        assert!(matches!(fit_decision_list(&data, 1, 2, DEFAULT_TOL), Err(Error::Capacity { .. })));
    }

    #[test]
    fn unfittable_data_reports_no_list() {
        // No grid halfspace isolates an affine piece of half the cube.
        let data = parity_data(4, &[1, 2, 3, 4]);
        assert!(matches!(
            fit_decision_list(&data, 1, 1, DEFAULT_TOL),
            Err(Error::NoConsistentList { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn training_loss_decreases_with_degree(seed: u64) {
            let mut rng = rng_from_seed(seed);
            let data: Vec<_> = (0..120)
                .map(|_| LabeledSample::new(sample_uniform(5, &mut rng).unwrap(), rng.gen_range(-1.0..1.0)).unwrap())
                .collect();
            let mut prev = f64::INFINITY;
            for d in 0..=5 {
                let loss = evaluate_loss(&fit_low_degree(&data, d, 0.0).unwrap(), &data).unwrap().mse;
                prop_assert!(loss <= prev + 1e-9);
                prev = loss;
            }
        }
    }
}
