use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use rand::Rng;
use serde_json::{json, Map, Value};
use sparsenet_core::bounds::{
    as_bound, degree_for_eps, ns_bound, output_envelope, rademacher_bound, rademacher_conjecture,
    rademacher_sample_complexity, sample_complexity_general,
};
use sparsenet_core::constructions::{gamma_gated_net, index_net, junta_to_net, parity_lift, random_unit_table};
use sparsenet_core::fourier::{
    avg_sensitivity_exact, noise_sensitivity_exact, noise_sensitivity_mc, wht, CubeFunction,
};
use sparsenet_core::learners::{
    evaluate_loss, fit_decision_list, fit_low_degree, full_cube_data, uniform_data, LossReport,
};
use sparsenet_core::network::MAX_DECOMPOSITION_DIM;
use sparsenet_core::rademacher::{compare_to_bound, random_sparse_pool};
use sparsenet_core::seed::{derive_seed, rng_from_seed};
use sparsenet_core::{ClassParams, JuntaSpec, LabeledSample, Predictor, Subset};

use crate::data::{emit, json_bytes, read_dataset, read_json, read_net, usage};
use crate::{verify, Command, ConstructKind, DataArgs};

pub fn dispatch(command: Command, out: Option<&Path>) -> anyhow::Result<bool> {
    match command {
        Command::Construct { kind } => construct(kind, out)?,
        Command::Transform { net } => {
            let f = CubeFunction::from_net(&read_net(&net)?)?;
            let mut buf = Vec::new();
            wht(&f).write_csv(&mut buf)?;
            emit(out, &buf)?;
        }
        Command::Sensitivity { net, rho, trials, seed } => sensitivity(&net, &rho, trials, seed, out)?,
        Command::BoundsTable { grid, c } => bounds_table(&grid, c, out)?,
        Command::LearnLowDegree { data, d, ridge } => {
            let (train, test) = load_data(&data)?;
            let model = fit_low_degree(&train, d, ridge)?;
            emit(out, &json_bytes(&learned(&model, &train, test.as_deref())?)?)?;
        }
        Command::LearnDlist { data, s, grid_m, tol } => {
            let (train, test) = load_data(&data)?;
            let list = fit_decision_list(&train, s, grid_m, tol)?;
            emit(out, &json_bytes(&learned(&list, &train, test.as_deref())?)?)?;
        }
        Command::Rademacher {
            n,
            s,
            k,
            w,
            b,
            pool_size,
            symmetrize,
            m_grid,
            trials,
            seed,
        } => {
            let params = ClassParams::on_cube(n, s, k, w, b);
            let mut pool = random_sparse_pool(&params, pool_size, derive_seed(seed, 0))?;
            if symmetrize {
                pool = pool.symmetrized()?;
            }
            let rows = compare_to_bound(&pool, &m_grid, trials, derive_seed(seed, 1))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row)?;
            }
            emit(out, &w.into_inner()?)?;
        }
        Command::Verify { all, check, n_max } => return verify::run(all, &check, n_max, out),
    }
    Ok(true)
}

fn construct(kind: ConstructKind, out: Option<&Path>) -> anyhow::Result<()> {
    let net = match kind {
        ConstructKind::Junta { n, relevant, table, seed } => {
            let table = match (table, seed) {
                (Some(t), _) => t,
                (None, Some(seed)) => {
                    let mut rng = rng_from_seed(seed);
                    let len = 1u64.checked_shl(relevant.len() as u32).unwrap_or(0).min(1 << 20);
                    (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect()
                }
                (None, None) => return Err(usage("junta needs --table or --seed")),
            };
            junta_to_net(&JuntaSpec::new(n, relevant, table)?)?
        }
        ConstructKind::Index { b } => index_net(b)?,
        ConstructKind::Parity { m, set } => parity_lift(m, &Subset::from_members(m, &set)?)?,
        ConstructKind::Gamma { b, q, gamma, seed } => {
            let table = random_unit_table(b, q, &mut rng_from_seed(seed))?;
            gamma_gated_net(b, q, gamma, &table)?
        }
    };
    let mut bytes = net.to_json().into_bytes();
    bytes.push(b'\n');
    emit(out, &bytes)
}

fn sensitivity(net: &Path, rhos: &[f64], trials: Option<u64>, seed: Option<u64>, out: Option<&Path>) -> anyhow::Result<()> {
    if trials.is_some() && seed.is_none() {
        return Err(usage("--trials needs --seed"));
    }
    let net = read_net(net)?;
    let f = CubeFunction::from_net(&net)?;
    let spectrum = wht(&f);
    let decomposition = if net.n() <= MAX_DECOMPOSITION_DIM {
        let d = net.as_decomposition()?;
        json!({ "same_pattern": d.same_pattern, "changed_pattern": d.changed_pattern, "total": d.total })
    } else {
        Value::Null
    };
    let mut noise = Vec::new();
    for (i, &rho) in rhos.iter().enumerate() {
        let exact = noise_sensitivity_exact(&spectrum, rho)?;
        let mc = match (trials, seed) {
            (Some(t), Some(seed)) => {
                let est = noise_sensitivity_mc(&f, rho, t, derive_seed(seed, i as u64))?;
                json!({ "estimate": est.estimate, "stderr": est.stderr, "trials": est.trials })
            }
            _ => Value::Null,
        };
        noise.push(json!({ "rho": rho, "exact": exact, "monte_carlo": mc }));
    }
    let report = json!({
        "n": net.n(),
        "avg_sensitivity": avg_sensitivity_exact(&f),
        "decomposition": decomposition,
        "noise_sensitivity": noise,
    });
    emit(out, &json_bytes(&report)?)
}

fn load_data(args: &DataArgs) -> anyhow::Result<(Vec<LabeledSample>, Option<Vec<LabeledSample>>)> {
    let needs_seed = args.samples.is_some() || args.test_samples.is_some();
    if needs_seed && args.seed.is_none() {
        return Err(usage("--samples and --test-samples need --seed"));
    }
    let net = args.net.as_deref().map(read_net).transpose()?;
    let train = match (&args.data, &net) {
        (Some(path), _) => read_dataset(path)?,
        (None, Some(net)) => {
            if args.full_cube {
                full_cube_data(net)?
            } else if let (Some(m), Some(seed)) = (args.samples, args.seed) {
                uniform_data(net, m, derive_seed(seed, 0))?
            } else {
                return Err(usage("--net needs --full-cube or --samples"));
            }
        }
        (None, None) => return Err(usage("need --data or --net")),
    };
    let test = match (&args.test_data, args.test_samples, &net, args.seed) {
        (Some(path), _, _, _) => Some(read_dataset(path)?),
        (None, Some(m), Some(net), Some(seed)) => Some(uniform_data(net, m, derive_seed(seed, 1))?),
        _ => None,
    };
    Ok((train, test))
}

fn learned<M: Predictor + serde::Serialize>(
    model: &M,
    train: &[LabeledSample],
    test: Option<&[LabeledSample]>,
) -> anyhow::Result<Value> {
    let train_loss = evaluate_loss(model, train)?;
    let test_loss: Option<LossReport> = test.map(|t| evaluate_loss(model, t)).transpose()?;
    let max_residual = train
        .iter()
        .map(|s| model.predict(&s.x).map(|p| (p - s.y).abs()))
        .collect::<sparsenet_core::Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    Ok(json!({
        "model": model,
        "train": train_loss,
        "train_max_residual": max_residual,
        "test": test_loss,
    }))
}

/// Expands the grid file into parameter rows with optional measured values.
///
/// The file is either an array of rows or `{"base": {...}, "vary": {"key": [...]}}`,
/// which takes the Cartesian product of the `vary` lists over `base`.
fn grid_rows(grid: Value) -> anyhow::Result<Vec<(ClassParams, BTreeMap<String, f64>)>> {
    let rows: Vec<Value> = match grid {
        Value::Array(rows) => rows,
        Value::Object(mut obj) => {
            let base = obj.remove("base").unwrap_or_else(|| Value::Object(Map::new()));
            let vary = obj.remove("vary").unwrap_or_else(|| Value::Object(Map::new()));
            if let Some(key) = obj.keys().next() {
                return Err(usage(format!("unknown grid key {key:?}")));
            }
            let (Value::Object(base), Value::Object(vary)) = (base, vary) else {
                return Err(usage("grid base and vary must be objects"));
            };
            let mut rows = vec![base];
            for (key, values) in vary {
                let Value::Array(values) = values else {
                    return Err(usage(format!("vary.{key} must be a list")));
                };
                rows = rows
                    .into_iter()
                    .flat_map(|row| {
                        let key = &key;
                        values.iter().map(move |v| {
                            let mut r = row.clone();
                            r.insert(key.clone(), v.clone());
                            r
                        })
                    })
                    .collect();
            }
            rows.into_iter().map(Value::Object).collect()
        }
        _ => return Err(usage("grid must be a JSON array or object")),
    };
    let known = serde_json::to_value(ClassParams::default())?;
    let known = known.as_object().expect("params serialize to an object");
    rows.into_iter()
        .enumerate()
        .map(|(i, row)| {
            let Value::Object(mut row) = row else {
                return Err(usage(format!("grid row {i} is not an object")));
            };
            let measured = match row.remove("measured") {
                None => BTreeMap::new(),
                Some(v) => serde_json::from_value(v).map_err(|e| usage(format!("grid row {i} measured: {e}")))?,
            };
            if let Some(key) = row.keys().find(|k| !known.contains_key(*k)) {
                return Err(usage(format!("grid row {i} has unknown parameter {key:?}")));
            }
            let mut params: ClassParams =
                serde_json::from_value(Value::Object(row.clone())).map_err(|e| usage(format!("grid row {i}: {e}")))?;
            if !row.contains_key("R") {
                params.r = (params.n as f64).sqrt();
            }
            Ok((params, measured))
        })
        .collect()
}

/// Shortest round-trip form, so `1e-300` stays short.
fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Empty when the formula is undefined at these parameters.
fn cell(v: sparsenet_core::Result<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn cell_int(v: sparsenet_core::Result<u64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn bounds_table(grid: &Path, c: f64, out: Option<&Path>) -> anyhow::Result<()> {
    let rows = grid_rows(read_json(grid)?).context("while reading the bound grid")?;
    let measured_keys: Vec<String> = rows
        .iter()
        .flat_map(|(_, m)| m.keys().cloned())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "n", "s", "k", "W", "B", "R", "m", "eps", "delta", "rho", "M", "as_bound", "ns_bound", "degree_for_eps",
        "rademacher", "rademacher_conjecture", "output_envelope", "sample_theorem", "sample_decision_list",
        "sample_rademacher",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(measured_keys.iter().map(|k| format!("measured_{k}")));
    w.write_record(&header)?;
    for (p, measured) in &rows {
        let sample = sample_complexity_general(p, c);
        let mut rec = vec![
            p.n.to_string(),
            p.s.to_string(),
            p.k.to_string(),
            num(p.w),
            num(p.b),
            num(p.r),
            p.m.to_string(),
            num(p.eps),
            num(p.delta),
            num(p.rho),
            p.grid_m.to_string(),
            cell(as_bound(p, c).map(|v| v.value)),
            cell(ns_bound(p, c).map(|v| v.value)),
            cell_int(degree_for_eps(p, c)),
            cell(rademacher_bound(p).map(|v| v.value)),
            cell(rademacher_conjecture(p).map(|v| v.value)),
            cell(output_envelope(p).map(|v| v.value)),
            cell_int(sample.clone().map(|s| s.theorem)),
            cell_int(sample.map(|s| s.decision_list)),
            cell_int(rademacher_sample_complexity(p, c)),
        ];
        rec.extend(measured_keys.iter().map(|k| measured.get(k).map(|&v| num(v)).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    emit(out, &w.into_inner()?)
}
