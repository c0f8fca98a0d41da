use std::path::Path;

use rdna_core::bsms::{
    classical_gray, exact_rate_loss, gray_critical_distortion, joint_chain, max_rate_loss,
    max_rate_loss_at_d, optimal_reproduction, rate_loss_bound, rna_bsms,
};
use rdna_core::excess::{
    hoeffding_bound, hoeffding_lambda, hoeffding_threshold, is_reversible, rate_function,
    reversible_bound, second_eigenvalue_general, simulate_excess, spectral_bound_unchecked, Sampling,
};
use rdna_core::gauss::solve_realization;
use rdna_core::jscc::{match_power, schalkwijk_kailath, simulate_scalar, simulate_vector};
use rdna_core::{Error as CoreError, GaussModel, JsccScalarDesign, RngStream, SolverOptions};
use serde_json::{json, Value};

use crate::config::{usage, CliError};
use crate::output::{num, rd_table, Cell, RdPoint, Report, Table};

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

fn matrix(m: &nalgebra::DMatrix<f64>) -> Value {
    Value::Array((0..m.nrows()).map(|i| nums(&m.row(i).iter().copied().collect::<Vec<_>>())).collect())
}

fn serialized(v: &impl serde::Serialize) -> Value {
    let raw = serde_json::to_value(v).expect("core types serialize");
    round_floats(raw)
}

fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => num(n.as_f64().expect("f64 number")),
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

pub fn bsms_curve(p: f64, ds: Vec<f64>) -> Result<Report, CliError> {
    let label = format!("bsms p={p}");
    let gray_defined = p > 0.0 && p <= 0.5;
    let critical = if gray_defined { Some(gray_critical_distortion(p)?) } else { None };
    let mut points = Vec::with_capacity(ds.len());
    for &d in &ds {
        let rate = rna_bsms(p, d)?;
        let (gray, exact) = if gray_defined {
            let g = classical_gray(p, d)?;
            (Some(g.rate), Cell::Bool(g.is_exact))
        } else {
            (None, Cell::Empty)
        };
        let loss = (gray_defined && d <= 0.5).then(|| rate_loss_bound(p, d));
        points.push(
            RdPoint::new(label.clone(), d, rate)
                .with("gray_bound", gray)
                .with("gray_exact", exact)
                .with("gray_critical_d", critical)
                .with("rate_loss_bound", loss),
        );
    }
    Ok(Report::new("bsms-curve", rd_table(&points)).param("p", p))
}

/// Reads a model file, or builds the scalar model `Z' = αZ + σ_W W`,
/// `X = cZ + σ_V V` when no file is given.
pub fn load_model(path: Option<&Path>, alpha: Option<f64>, sigma_w: f64, c: f64, sigma_v: f64) -> Result<GaussModel, CliError> {
    match (path, alpha) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read model {}: {e}", path.display())))?;
            text.parse().map_err(|e: CoreError| CliError::Usage(format!("malformed model {}: {e}", path.display())))
        }
        (None, Some(alpha)) => GaussModel::scalar(alpha, sigma_w, c, sigma_v).map_err(|e| CliError::Usage(e.to_string())),
        (None, None) => usage("give --model FILE or scalar parameters starting with --alpha"),
    }
}

pub fn gauss_rate(model: &GaussModel, ds: &[f64], max_iter: usize, tol: f64) -> Result<Report, CliError> {
    let opts = SolverOptions { tol, max_iter, ..SolverOptions::default() };
    let p = model.obs_dim();
    let label = format!("gauss {}x{}", model.state_dim(), p);
    let mut points = Vec::with_capacity(ds.len());
    let mut solutions = Vec::with_capacity(ds.len());
    for &d in ds {
        let sol = solve_realization(model, d, None, &opts)?;
        let mut pt = RdPoint::new(label.clone(), d, sol.rate)
            .with("saturated", sol.saturated)
            .with("iterations", sol.iterations)
            .with("residual", sol.residual)
            .with("xi", sol.xi)
            .with("trace_lambda", sol.spectrum.total())
            .with("closed_loop_radius", sol.closed_loop_radius);
        for (i, l) in sol.spectrum.values().iter().enumerate() {
            pt = pt.with(&format!("lambda_{}", i + 1), *l);
        }
        for (i, dl) in sol.delta.iter().enumerate() {
            pt = pt.with(&format!("delta_{}", i + 1), *dl);
        }
        pt = pt.with("note", if sol.saturated { "saturated: D >= trace(Lambda)" } else { "" });
        points.push(pt);
        solutions.push(json!({
            "D": num(d),
            "rate": num(sol.rate),
            "sigma": matrix(&sol.sigma),
            "lambda_cov": matrix(&sol.lambda_cov),
            "spectrum": nums(sol.spectrum.values()),
            "delta": nums(&sol.delta),
            "eta": nums(&sol.eta),
            "xi": num(sol.xi),
            "residual": num(sol.residual),
            "iterations": sol.iterations,
            "saturated": sol.saturated,
        }));
    }
    let mut report = Report::new("gauss-rate", rd_table(&points))
        .param("dims", json!([model.state_dim(), model.process_noise_dim(), p, model.obs_noise_dim()]));
    report.summary.insert("solutions".into(), Value::Array(solutions));
    Ok(report)
}

fn estimate_table() -> Table {
    Table::new(["quantity", "analytic", "empirical", "std_error"])
}

pub fn jscc_scalar(design: &JsccScalarDesign, steps: usize, stream: RngStream) -> Result<Report, CliError> {
    let rep = simulate_scalar(design, steps, stream)?;
    let matched = design.matched_rate()?;
    let mut t = estimate_table();
    t.push(vec!["distortion".into(), design.d_min.into(), rep.distortion.mean.into(), rep.distortion.std_error.into()]);
    t.push(vec!["power".into(), design.power.into(), rep.power.mean.into(), rep.power.std_error.into()]);
    t.push(vec!["capacity".into(), design.capacity.into(), Cell::Empty, Cell::Empty]);
    t.push(vec!["matched_rate".into(), matched.into(), Cell::Empty, Cell::Empty]);
    let mut report = Report::new("jscc-sim", t).param("mode", serialized(&design.mode)).param("steps", steps);
    report.summary.insert("design".into(), serialized(design));
    report.summary.insert("report".into(), serialized(&rep));
    Ok(report)
}

pub fn jscc_vector(model: &GaussModel, d: f64, steps: usize, stream: RngStream) -> Result<Report, CliError> {
    let sol = solve_realization(model, d, None, &SolverOptions::default())?;
    let pm = match_power(&sol)?;
    let rep = simulate_vector(model, &sol, steps, stream)?;
    let mut t = estimate_table();
    t.push(vec!["distortion".into(), d.into(), rep.distortion.mean.into(), rep.distortion.std_error.into()]);
    t.push(vec!["total_power".into(), pm.total.into(), rep.total_power.mean.into(), rep.total_power.std_error.into()]);
    for (i, (e, p)) in rep.channel_power.iter().zip(&pm.per_channel).enumerate() {
        t.push(vec![format!("power_{}", i + 1).into(), (*p).into(), e.mean.into(), e.std_error.into()]);
    }
    for (i, (e, dl)) in rep.coordinate_distortion.iter().zip(&sol.delta).enumerate() {
        t.push(vec![format!("delta_{}", i + 1).into(), (*dl).into(), e.mean.into(), e.std_error.into()]);
    }
    for (i, row) in rep.innovation_cov.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            t.push(vec![
                format!("lambda_cov_{}{}", i + 1, j + 1).into(),
                sol.lambda_cov[(i, j)].into(),
                e.mean.into(),
                e.std_error.into(),
            ]);
        }
    }
    t.push(vec!["rate".into(), sol.rate.into(), Cell::Empty, Cell::Empty]);
    let mut report = Report::new("jscc-sim", t).param("mode", "vector").param("D", num(d)).param("steps", steps);
    report.summary.insert("matched_capacity".into(), num(pm.matched_capacity));
    report.summary.insert("waterfill_capacity".into(), num(pm.waterfill_capacity));
    report.summary.insert("is_waterfilling".into(), json!(pm.is_waterfilling));
    report.summary.insert("report".into(), serialized(&rep));
    Ok(report)
}

pub fn jscc_sk(sigma_x: f64, sigma_vc: f64, power: f64, steps: usize, trials: usize, stream: RngStream) -> Result<Report, CliError> {
    let rep = schalkwijk_kailath(sigma_x, sigma_vc, power, steps, trials, stream)?;
    let mut t = Table::new(["t", "analytic_mse", "empirical_mse", "std_error", "rate_per_use"]);
    for (k, (a, e)) in rep.analytic_mse.iter().zip(&rep.empirical_mse).enumerate() {
        t.push(vec![k.into(), (*a).into(), e.mean.into(), e.std_error.into(), rep.rate_per_use.get(k).copied().into()]);
    }
    let mut report = Report::new("jscc-sim", t).param("mode", "sk").param("steps", steps).param("trials", trials);
    report.summary.insert("capacity".into(), num(rep.capacity));
    Ok(report)
}

pub fn excess_table(p: f64, d: f64, gamma: f64, ns: &[usize], trials: usize, sampling: Sampling, seed: u64) -> Result<Report, CliError> {
    let design = optimal_reproduction(p, d)?;
    let chain = joint_chain(&design)?;
    let threshold = d + gamma;
    let reversible = is_reversible(&chain);
    let rate = rate_function(&chain, threshold.min(1.0))?.value;
    let valid_from = hoeffding_threshold(&chain, gamma)?;
    let mut cols = vec!["n", "hoeffding", "hoeffding_valid", "reversible", "spectral_reference", "rate_function"];
    if trials > 0 {
        cols.extend(["empirical", "empirical_se", "log_empirical_per_n"]);
    }
    let mut t = Table::new(cols);
    for (k, &n) in ns.iter().enumerate() {
        let valid = n as f64 > valid_from;
        let h = if valid { Some(hoeffding_bound(&chain, n, gamma)?) } else { None };
        let rev = if reversible { Some(reversible_bound(&chain, n, gamma)?) } else { None };
        let mut row = vec![
            n.into(),
            h.into(),
            valid.into(),
            rev.into(),
            spectral_bound_unchecked(&chain, n, gamma)?.into(),
            rate.into(),
        ];
        if trials > 0 {
            let e = simulate_excess(&chain, n, threshold, trials, sampling, RngStream::new(seed, k as u64))?;
            row.extend([e.probability.mean.into(), e.probability.std_error.into(), e.exponent_per_step().into()]);
        }
        t.push(row);
    }
    let mut report = Report::new("excess", t)
        .param("p", p)
        .param("D", d)
        .param("gamma", gamma)
        .param("trials", trials)
        .param("sampling", serialized(&sampling));
    report.summary.insert("chain_reversible".into(), json!(reversible));
    report.summary.insert("lambda_2".into(), num(second_eigenvalue_general(&chain)?));
    report.summary.insert("hoeffding_lambda".into(), num(hoeffding_lambda(&design)));
    report.summary.insert("hoeffding_valid_above".into(), num(valid_from));
    report.summary.insert("threshold".into(), num(threshold));
    Ok(report)
}

pub fn excess_rate_function(p: f64, d: f64, thetas: &[f64]) -> Result<Report, CliError> {
    let chain = joint_chain(&optimal_reproduction(p, d)?)?;
    let mut t = Table::new(["theta", "rate_function", "lambda_star"]);
    for &theta in thetas {
        let pt = rate_function(&chain, theta)?;
        t.push(vec![theta.into(), pt.value.into(), pt.lambda_star.into()]);
    }
    Ok(Report::new("excess", t).param("p", p).param("D", d))
}

fn check_unit_half(name: &str, v: f64) -> Result<(), CliError> {
    if !(0.0..=0.5).contains(&v) {
        return Err(CoreError::Domain(format!("{name} must lie in [0, 1/2], got {v}")).into());
    }
    Ok(())
}

pub fn rate_loss(p: Option<f64>, ds: Option<Vec<f64>>) -> Result<Report, CliError> {
    match (p, ds) {
        (Some(p), Some(ds)) => {
            check_unit_half("p", p)?;
            let mut t = Table::new(["p", "D", "rate_loss_bound", "rna", "gray_bound", "exact_rate_loss"]);
            for d in ds {
                check_unit_half("D", d)?;
                let g = classical_gray(p, d)?;
                t.push(vec![
                    p.into(),
                    d.into(),
                    rate_loss_bound(p, d).into(),
                    rna_bsms(p, d)?.into(),
                    g.rate.into(),
                    exact_rate_loss(p, d)?.into(),
                ]);
            }
            Ok(Report::new("rate-loss", t).param("p", p))
        }
        (Some(_), None) => usage("--p needs --d or --d-grid"),
        (None, ds) => {
            let mut t = Table::new(["p", "D", "rate_loss_bound"]);
            match ds {
                Some(ds) => {
                    for d in ds {
                        check_unit_half("D", d)?;
                        let peak = max_rate_loss_at_d(d);
                        t.push(vec![peak.p.into(), peak.d.into(), peak.rate_loss.into()]);
                    }
                }
                None => {
                    let peak = max_rate_loss();
                    t.push(vec![peak.p.into(), peak.d.into(), peak.rate_loss.into()]);
                }
            }
            Ok(Report::new("rate-loss", t))
        }
    }
}
