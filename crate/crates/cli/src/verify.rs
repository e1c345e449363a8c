use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use sparsenet_core::constructions::{
    embed_lift, gamma_gated_net, index_net, index_reference, junta_to_net, parity_lift, parity_lift_offsets,
    parity_lift_reference, parity_lift_support, random_grid_net, random_unit_table,
};
use sparsenet_core::fourier::{
    avg_sensitivity_exact, inverse_wht, noise_sensitivity_exact, wht, CubeFunction, EXACT_REL_TOL,
    ROUND_TRIP_TOL,
};
use sparsenet_core::hypercube::all_points;
use sparsenet_core::learners::{dl_predict, evaluate_loss, fit_decision_list, fit_low_degree, full_cube_data, DEFAULT_TOL};
use sparsenet_core::network::SparsityMode;
use sparsenet_core::seed::{rng_from_seed, SeededRng};
use sparsenet_core::{Error, JuntaSpec, LabeledSample, SparseNet, Subset};

use crate::data::{emit, usage};

pub const MAX_VERIFY_N: usize = 16;

type Check = fn(usize) -> Result<String, String>;

const CHECKS: [(&str, Check); 9] = [
    ("junta", junta),
    ("index", index),
    ("parity-lift", parity),
    ("gamma", gamma),
    ("fourier", fourier),
    ("decomposition", decomposition),
    ("tail-inequality", tail_inequality),
    ("low-degree", low_degree),
    ("dlist", dlist),
];

/// Runs the selected checks and reports whether all passed.
pub fn run(all: bool, names: &[String], n_max: usize, out: Option<&Path>) -> anyhow::Result<bool> {
    if !(2..=MAX_VERIFY_N).contains(&n_max) {
        return Err(usage(format!("--n-max must lie in 2..={MAX_VERIFY_N}")));
    }
    if let Some(bad) = names.iter().find(|n| !CHECKS.iter().any(|(c, _)| c == n)) {
        let known: Vec<&str> = CHECKS.iter().map(|(c, _)| *c).collect();
        return Err(usage(format!("unknown check {bad:?}; known: {}", known.join(", "))));
    }
    let mut report = String::new();
    let mut passed = true;
    for (name, check) in CHECKS {
        if !all && !names.iter().any(|n| n == name) {
            continue;
        }
        match check(n_max) {
            Ok(detail) => writeln!(report, "PASS {name}: {detail}")?,
            Err(detail) => {
                passed = false;
                writeln!(report, "FAIL {name}: {detail}")?;
            }
        }
    }
    emit(out, report.as_bytes())?;
    Ok(passed)
}

fn fail(e: Error) -> String {
    e.to_string()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_function(n: usize, rng: &mut SeededRng) -> CubeFunction {
    let values = (0..1usize << n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    CubeFunction::from_values(n, values).expect("dimension within range")
}

fn junta(n_max: usize) -> Result<String, String> {
    let mut rng = rng_from_seed(1);
    let mut cases = 0;
    for n in 1..=n_max {
        for p in 0..=n.min(4) {
            let relevant = rand::seq::index::sample(&mut rng, n, p).into_iter().map(|i| i + 1).collect();
            let table = (0..1 << p).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let spec = JuntaSpec::new(n, relevant, table).map_err(fail)?;
            let net = junta_to_net(&spec).map_err(fail)?;
            for x in all_points(n).map_err(fail)? {
                let (got, want) = (net.eval(&x).map_err(fail)?, spec.eval(&x).map_err(fail)?);
                ensure(got == want, || format!("n={n} p={p} x={:?}: {got} != {want}", x.signs().collect::<Vec<_>>()))?;
                let active = net.active_set(&x).map_err(fail)?.len();
                ensure(active == 1, || format!("n={n} p={p}: {active} active units"))?;
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} juntas exhaustive"))
}

fn index(n_max: usize) -> Result<String, String> {
    let mut done = Vec::new();
    for b in (1..=3).filter(|b| b + (1 << b) <= n_max) {
        let net = index_net(b).map_err(fail)?;
        for z in all_points(b + (1 << b)).map_err(fail)? {
            let (got, want) = (net.eval(&z).map_err(fail)?, index_reference(b, &z).map_err(fail)?);
            ensure(got == want, || format!("b={b}: {got} != {want}"))?;
            ensure(net.active_set(&z).map_err(fail)?.len() <= 1, || format!("b={b}: two active units"))?;
        }
        done.push(b.to_string());
    }
    Ok(format!("b in [{}]", done.join(",")))
}

fn parity(n_max: usize) -> Result<String, String> {
    let mut cases = 0;
    for m in 1..=n_max.min(4) {
        let support = parity_lift_support(m).map_err(fail)?;
        for mask in 1..1u64 << m {
            let set = Subset::from_mask(m, mask).map_err(fail)?;
            let net = parity_lift(m, &set).map_err(fail)?;
            let offsets = parity_lift_offsets(m);
            for y in all_points(m).map_err(fail)? {
                let x = embed_lift(&y).map_err(fail)?.to_point();
                let sum: i64 = set.members().iter().map(|&i| i64::from(y.sign(i).unwrap_or(0))).sum();
                for (pre, a) in net.preactivations(&x).map_err(fail)?.into_iter().zip(&offsets) {
                    let want = 0.5 - ((sum - a) * (sum - a)) as f64;
                    ensure(pre == want, || format!("m={m} S={mask:#b}: pre-activation {pre} != {want}"))?;
                }
                let (got, want) = (net.eval(&x).map_err(fail)?, parity_lift_reference(&set, &y).map_err(fail)?);
                ensure(got == want, || format!("m={m} S={mask:#b}: {got} != {want}"))?;
            }
            let report = net.verify_sparsity_on(1, &support).map_err(fail)?;
            ensure(report.holds(), || format!("m={m} S={mask:#b}: {} active on support", report.max_active))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} subsets"))
}

fn gamma(n_max: usize) -> Result<String, String> {
    let (b, q) = (2, 3);
    if b + q > n_max {
        return Ok("skipped below n = 5".into());
    }
    let table = random_unit_table(b, q, &mut rng_from_seed(2)).map_err(fail)?;
    let net = gamma_gated_net(b, q, (q as f64).sqrt(), &table).map_err(fail)?;
    let report = net.verify_sparsity(1, SparsityMode::Exhaustive).map_err(fail)?;
    ensure(report.holds(), || format!("{} active units", report.max_active))?;
    Ok(format!("b={b} q={q} Γ=√q max_active={}", report.max_active))
}

fn fourier(n_max: usize) -> Result<String, String> {
    let mut rng = rng_from_seed(3);
    for n in 1..=n_max {
        let f = random_function(n, &mut rng);
        let spec = wht(&f);
        let back = inverse_wht(&spec);
        let err = f.values().iter().zip(back.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ensure(err <= ROUND_TRIP_TOL, || format!("n={n}: round trip error {err}"))?;
        let rel = (spec.norm_sq() - f.norm_sq()).abs() / f.norm_sq();
        ensure(rel <= EXACT_REL_TOL, || format!("n={n}: Parseval relative error {rel}"))?;
        let (direct, spectral) = (avg_sensitivity_exact(&f), spec.degree_weighted_mass());
        let rel = (direct - spectral).abs() / spectral.max(f64::MIN_POSITIVE);
        ensure(rel <= EXACT_REL_TOL, || format!("n={n}: AS {direct} vs spectral {spectral}"))?;
    }
    Ok(format!("n in 1..={n_max}"))
}

fn decomposition(n_max: usize) -> Result<String, String> {
    let mut rng = rng_from_seed(4);
    for n in 2..=n_max {
        let s = 3;
        let u = (0..s).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let w = (0..s).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let b = (0..s).map(|_| rng.gen_range(-1.0..2.0)).collect();
        let net = SparseNet::new(n, s, u, w, b).map_err(fail)?;
        let d = net.as_decomposition().map_err(fail)?;
        let exact = avg_sensitivity_exact(&CubeFunction::from_net(&net).map_err(fail)?);
        ensure((d.total - exact).abs() <= 1e-12 * exact.max(1.0), || format!("n={n}: {} != {exact}", d.total))?;
    }
    Ok(format!("n in 2..={n_max}"))
}

fn tail_inequality(n_max: usize) -> Result<String, String> {
    let mut rng = rng_from_seed(5);
    for n in 1..=n_max {
        let spec = wht(&random_function(n, &mut rng));
        for rho in [0.1, 0.5, 0.9] {
            let ns = noise_sensitivity_exact(&spec, rho).map_err(fail)?;
            for d in 1..=n {
                let rhs = 2.0 * ns / (1.0 - rho.powi(d as i32));
                let tail = spec.tail_mass(d);
                ensure(tail <= rhs * (1.0 + EXACT_REL_TOL) + 1e-15, || {
                    format!("n={n} ρ={rho} d={d}: tail {tail} > {rhs}")
                })?;
            }
        }
    }
    Ok(format!("n in 1..={n_max}"))
}

fn low_degree(n_max: usize) -> Result<String, String> {
    let mut rng = rng_from_seed(6);
    for n in 1..=n_max.min(10) {
        let f = random_function(n, &mut rng);
        let spec = wht(&f);
        let data = full_cube_data(&f).map_err(fail)?;
        for d in 0..=n.min(3) {
            let model = fit_low_degree(&data, d, 0.0).map_err(fail)?;
            for term in model.terms() {
                let t = Subset::from_members(n, &term.members).map_err(fail)?;
                let want = spec.coeff(&t).map_err(fail)?;
                ensure((term.coeff - want).abs() <= 1e-8, || format!("n={n} d={d}: coefficient {} != {want}", term.coeff))?;
            }
            let loss = evaluate_loss(&model, &data).map_err(fail)?.mse;
            let half_tail = 0.5 * spec.tail_mass(d);
            ensure((loss - half_tail).abs() <= 1e-8, || format!("n={n} d={d}: loss {loss} != {half_tail}"))?;
        }
    }
    Ok(format!("n in 1..={}, d ≤ 3", n_max.min(10)))
}

fn dlist(n_max: usize) -> Result<String, String> {
    let mut rng = rng_from_seed(7);
    let mut cases = 0;
    for n in 2..=n_max.min(4) {
        for s in 1..=3 {
            let net = random_grid_net(n, s, 1, &mut rng).map_err(fail)?;
            let data = full_cube_data(&net).map_err(fail)?;
            let list = fit_decision_list(&data, s, 1, DEFAULT_TOL).map_err(fail)?;
            for x in all_points(n).map_err(fail)? {
                let (got, want) = (dl_predict(&list, &x).map_err(fail)?, net.eval(&x).map_err(fail)?);
                ensure((got - want).abs() <= DEFAULT_TOL, || format!("n={n} s={s}: {got} != {want}"))?;
            }
            cases += 1;
        }
    }
    let x = all_points(2).map_err(fail)?.next().expect("cube is nonempty");
    let clash = [
        LabeledSample::new(x.clone(), 0.0).map_err(fail)?,
        LabeledSample::new(x, 1.0).map_err(fail)?,
    ];
    match fit_decision_list(&clash, 1, 1, DEFAULT_TOL) {
        Err(Error::InconsistentData { .. }) => Ok(format!("{cases} targets recovered, contradictions rejected")),
        other => Err(format!("contradictory data gave {other:?}")),
    }
}
