//! Closed-form evaluators for the sensitivity, degree, Rademacher and
//! sample-complexity bounds of the class `H_{n,s,k}^{W,B}`.
//!
//! Hidden `O(·)` constants are explicit arguments. Logarithms are natural.
//! Where a log argument can fall below 1 the evaluator uses
//! `ln(max(x, 1))`, so every log term is non-negative; the formulas that do
//! this say so.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters shared by the bound formulas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassParams {
    pub n: usize,
    pub s: usize,
    pub k: usize,
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "B")]
    pub b: f64,
    /// Input norm bound; `√n` on the cube.
    #[serde(rename = "R")]
    pub r: f64,
    pub m: u64,
    pub eps: f64,
    pub delta: f64,
    pub rho: f64,
    /// Weight-grid bound of the decision-list learner.
    #[serde(rename = "M")]
    pub grid_m: u64,
}

impl Default for ClassParams {
    fn default() -> Self {
        ClassParams::on_cube(4, 2, 1, 1.0, 0.0)
    }
}

impl ClassParams {
    /// Parameters for inputs on `{-1,1}^n`, with `R = √n`.
    pub fn on_cube(n: usize, s: usize, k: usize, w: f64, b: f64) -> Self {
        ClassParams {
            n,
            s,
            k,
            w,
            b,
            r: (n as f64).sqrt(),
            m: 100,
            eps: 0.1,
            delta: 0.05,
            rho: 0.5,
            grid_m: 1,
        }
    }

    fn check_class(&self) -> Result<()> {
        if self.n == 0 || self.s == 0 || self.k == 0 {
            return Err(Error::invalid("n, s and k must be positive"));
        }
        if self.k > self.s {
            return Err(Error::invalid(format!("k = {} exceeds s = {}", self.k, self.s)));
        }
        for (name, v) in [("W", self.w), ("B", self.b), ("R", self.r)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} = {v} must be finite and non-negative")));
            }
        }
        Ok(())
    }

    fn check_logs(&self) -> Result<()> {
        if self.n < 2 || self.s < 2 {
            return Err(Error::invalid("n and s must be at least 2 for the log terms"));
        }
        Ok(())
    }

    fn check_eps(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::invalid(format!("eps = {} outside (0, 1)", self.eps)));
        }
        Ok(())
    }

    fn check_delta(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!("delta = {} outside (0, 1)", self.delta)));
        }
        Ok(())
    }
}

/// Which formula produced a [`BoundValue`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    AverageSensitivity,
    NoiseSensitivity,
    DegreeForEps,
    Rademacher,
    RademacherConjecture,
    SampleComplexityTheorem,
    SampleComplexityDecisionList,
    HalfspaceAverageSensitivity,
    OutputEnvelope,
}

impl FormulaId {
    pub fn label(self) -> &'static str {
        match self {
            FormulaId::AverageSensitivity => "as_bound",
            FormulaId::NoiseSensitivity => "ns_bound",
            FormulaId::DegreeForEps => "degree_for_eps",
            FormulaId::Rademacher => "rademacher_bound",
            FormulaId::RademacherConjecture => "rademacher_conjecture (CONJECTURE)",
            FormulaId::SampleComplexityTheorem => "sample_complexity_theorem",
            FormulaId::SampleComplexityDecisionList => "sample_complexity_decision_list",
            FormulaId::HalfspaceAverageSensitivity => "halfspace_as_bound",
            FormulaId::OutputEnvelope => "output_envelope",
        }
    }

    pub fn is_conjecture(self) -> bool {
        self == FormulaId::RademacherConjecture
    }
}

/// A bound value with the constant it was evaluated at.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub constant: f64,
    pub formula: FormulaId,
}

fn check_constant(c: f64) -> Result<()> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::invalid(format!("constant {c} must be finite and non-negative")));
    }
    Ok(())
}

fn ln_clamped(x: f64) -> f64 {
    x.max(1.0).ln()
}

fn bound(value: f64, constant: f64, formula: FormulaId) -> BoundValue {
    BoundValue {
        value: constant * value,
        constant,
        formula,
    }
}

fn ceil_count(x: f64) -> u64 {
    // `as` saturates at u64::MAX for the astronomically large cases.
    x.ceil() as u64
}

/// `C·(k⁴W²√n·ln(ns) + k³B²√(ln s))`.
pub fn as_bound(p: &ClassParams, c: f64) -> Result<BoundValue> {
    p.check_class()?;
    p.check_logs()?;
    check_constant(c)?;
    let (n, s, k) = (p.n as f64, p.s as f64, p.k as f64);
    let value = k.powi(4) * p.w * p.w * n.sqrt() * (n * s).ln() + k.powi(3) * p.b * p.b * s.ln().sqrt();
    Ok(bound(value, c, FormulaId::AverageSensitivity))
}

/// `C·√(1-ρ)·(k⁴W²·ln²(ns/(1-ρ)) + k³B²√(ln s))`.
///
/// For `ρ ∈ [0,1)` this is non-increasing in `ρ` only when
/// `ln(ns/(1-ρ)) ≥ 4`, which holds for all such `ρ` once `ns ≥ e⁴`.
pub fn ns_bound(p: &ClassParams, c: f64) -> Result<BoundValue> {
    p.check_class()?;
    p.check_logs()?;
    check_constant(c)?;
    if !(-1.0..1.0).contains(&p.rho) {
        return Err(Error::invalid(format!("rho = {} outside [-1, 1)", p.rho)));
    }
    let (n, s, k) = (p.n as f64, p.s as f64, p.k as f64);
    let t = 1.0 - p.rho;
    let l = (n * s / t).ln();
    let value = t.sqrt() * (k.powi(4) * p.w * p.w * l * l + k.powi(3) * p.b * p.b * s.ln().sqrt());
    Ok(bound(value, c, FormulaId::NoiseSensitivity))
}

/// `⌈C·(k⁸W⁴·ln⁴(ns) + k⁶B⁴·ln s)/ε²⌉`, saturating at `u64::MAX`.
pub fn degree_for_eps(p: &ClassParams, c: f64) -> Result<u64> {
    p.check_class()?;
    p.check_logs()?;
    check_constant(c)?;
    if p.eps.is_nan() || p.eps <= 0.0 {
        return Err(Error::invalid(format!("eps = {} must be positive", p.eps)));
    }
    let (n, s, k) = (p.n as f64, p.s as f64, p.k as f64);
    let value = k.powi(8) * p.w.powi(4) * (n * s).ln().powi(4) + k.powi(6) * p.b.powi(4) * s.ln();
    Ok(ceil_count(c * value / (p.eps * p.eps)))
}

/// `(WR+B)·√(s·n·k·ln(k·m·(R+B)))/√m`.
///
/// Non-increasing in `m` once `k·m·(R+B) ≥ e`.
pub fn rademacher_bound(p: &ClassParams) -> Result<BoundValue> {
    p.check_class()?;
    if p.m < 2 {
        return Err(Error::invalid(format!("m = {} must be at least 2", p.m)));
    }
    let (n, s, k, m) = (p.n as f64, p.s as f64, p.k as f64, p.m as f64);
    let arg = k * m * (p.r + p.b);
    if arg <= 1.0 {
        return Err(Error::invalid(format!("log argument k·m·(R+B) = {arg} must exceed 1")));
    }
    let value = (p.w * p.r + p.b) * (s * n * k * arg.ln()).sqrt() / m.sqrt();
    Ok(bound(value, 1.0, FormulaId::Rademacher))
}

/// `(WR+B)·√(sk)/√m`, a conjectured improvement; not a proven bound.
pub fn rademacher_conjecture(p: &ClassParams) -> Result<BoundValue> {
    p.check_class()?;
    if p.m < 1 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let value = (p.w * p.r + p.b) * ((p.s * p.k) as f64).sqrt() / (p.m as f64).sqrt();
    Ok(bound(value, 1.0, FormulaId::RademacherConjecture))
}

/// The two general-distribution sample complexities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleComplexity {
    /// `⌈C·((WR+B)²·k·s·n·ln(k(R+B)/ε) + ln(1/δ))/ε²⌉`, with the inner log clamped at 0.
    pub theorem: u64,
    /// `⌈C·n²·B²·s·k·ln(1/δ)/ε²⌉`, from the decision-list analysis.
    pub decision_list: u64,
}

pub fn sample_complexity_general(p: &ClassParams, c: f64) -> Result<SampleComplexity> {
    p.check_class()?;
    p.check_eps()?;
    p.check_delta()?;
    check_constant(c)?;
    let (n, s, k) = (p.n as f64, p.s as f64, p.k as f64);
    let wrb = p.w * p.r + p.b;
    let inv_delta = (1.0 / p.delta).ln();
    let eps2 = p.eps * p.eps;
    let theorem = c * (wrb * wrb * k * s * n * ln_clamped(k * (p.r + p.b) / p.eps) + inv_delta) / eps2;
    let decision_list = c * n * n * p.b * p.b * s * k * inv_delta / eps2;
    Ok(SampleComplexity {
        theorem: ceil_count(theorem),
        decision_list: ceil_count(decision_list),
    })
}

/// `C·p·√(n·ln(1/p))`; zero at `p = 0` and `p = 1`.
pub fn halfspace_as_bound(prob: f64, n: usize, c: f64) -> Result<BoundValue> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::invalid(format!("p = {prob} outside [0, 1]")));
    }
    check_constant(c)?;
    let value = if prob == 0.0 {
        0.0
    } else {
        prob * (n as f64 * (1.0 / prob).ln()).sqrt()
    };
    Ok(bound(value, c, FormulaId::HalfspaceAverageSensitivity))
}

/// `C_H = k(WR+B)`, the largest output magnitude of a `k`-sparse net.
pub fn output_envelope(p: &ClassParams) -> Result<BoundValue> {
    p.check_class()?;
    Ok(bound(p.k as f64 * (p.w * p.r + p.b), 1.0, FormulaId::OutputEnvelope))
}

/// Smallest `m ≥ 2` with `c·(C_H·R(m) + √(ln(1/δ)/m)) ≤ ε`, where `R(m)` is
/// [`rademacher_bound`] at `m`. The left side is non-increasing in `m` for
/// `m ≥ 3`, which the search relies on.
pub fn rademacher_sample_complexity(p: &ClassParams, c: f64) -> Result<u64> {
    p.check_eps()?;
    p.check_delta()?;
    check_constant(c)?;
    let envelope = output_envelope(p)?.value;
    let inv_delta = (1.0 / p.delta).ln();
    let holds = |m: u64| -> Result<bool> {
        let q = ClassParams { m, ..p.clone() };
        let rad = rademacher_bound(&q)?.value;
        Ok(c * (envelope * rad + (inv_delta / m as f64).sqrt()) <= p.eps)
    };
    if holds(2)? {
        return Ok(2);
    }
    const LIMIT: u64 = 1 << 62;
    let mut lo = 2;
    let mut hi = 4;
    while !holds(hi)? {
        if hi >= LIMIT {
            return Err(Error::Capacity {
                what: "sample size search",
                requested: hi,
                limit: LIMIT,
            });
        }
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
