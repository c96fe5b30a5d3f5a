use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use dgft::greedy::greedy_basis;
use dgft::graph::{coordinate_ties, orient_by_coordinate};
use dgft::spectral::{
    chung_basis, fmax_analytic, fmax_half_approximation, fmax_upper_bound, laplacian_basis,
};
use dgft::stiefel::{feasible_basis, maximize_dv};
use dgft::transform::{cumulative_energy, denoise_experiment, dgft, noise_realization};
use dgft::{DiGraph, Error, FmaxResult, GraphSignal, OrthonormalBasis, SolverTrace};
use dgft::text::format_float;
use serde_json::json;

use crate::io::{read_edge_list, read_graph, read_labeled_values, BasisFile, InputError};
use crate::{BasisArgs, BasisMethod, CompareArgs, DenoiseArgs, FmaxArgs, FmaxMethod, OrientArgs, SolverFlags};

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn trace_summary(trace: &SolverTrace) -> String {
    let iters: usize = trace.restarts.iter().map(|r| r.records.len()).sum();
    let sel = trace.selected.map(|i| &trace.restarts[i]);
    format!(
        "restarts={} failed={} iterations={} selected={} final_delta={} termination={}",
        trace.restarts.len(),
        trace.failed_restarts(),
        iters,
        trace.selected.map_or("-".into(), |i| i.to_string()),
        sel.and_then(|r| r.final_dispersion).map_or("-".into(), |d| d.to_string()),
        sel.and_then(|r| r.termination).map_or("-".into(), |t| format!("{t:?}")),
    )
}

/// Basis, config echo and (for the feasible method) trace.
fn build(
    g: &DiGraph,
    method: BasisMethod,
    solver: &SolverFlags,
    exact: bool,
) -> Result<(OrthonormalBasis, serde_json::Value, Option<SolverTrace>)> {
    Ok(match method {
        BasisMethod::Feasible => {
            let cfg = solver.config();
            let (b, trace) = feasible_basis(g, &cfg)?;
            (b, serde_json::to_value(&cfg)?, Some(trace))
        }
        BasisMethod::Greedy => {
            let (b, sel) = greedy_basis(g, exact)?;
            let cfg = json!({ "exact": exact, "f_tilde_max": sel.f_tilde_max, "delta": sel.delta });
            (b, cfg, None)
        }
        BasisMethod::Laplacian => (laplacian_basis(g)?, serde_json::Value::Null, None),
        BasisMethod::Chung => (chung_basis(g)?, serde_json::Value::Null, None),
    })
}

pub fn basis(a: &BasisArgs) -> Result<()> {
    let g = read_graph(&a.graph)?;
    let (b, config, trace) = build(&g, a.method, &a.solver, a.exact)?;
    let file = BasisFile::from_basis(&g, &b, config)?;
    file.write(&a.out)?;
    if let Some(trace) = &trace {
        eprintln!("{}", trace_summary(trace));
        if let Some(path) = &a.trace {
            write(path, &trace.to_csv())?;
        }
    }
    eprintln!(
        "{}: n={} dispersion_raw={} dispersion_rescaled={}",
        file.method_tag, file.n, file.dispersion_raw, file.dispersion_rescaled
    );
    Ok(())
}

pub fn fmax(a: &FmaxArgs) -> Result<()> {
    let g = read_graph(&a.graph)?;
    let r: FmaxResult = match a.method {
        FmaxMethod::Feasible => {
            let (r, trace) = maximize_dv(&g, &a.solver.config())?;
            eprintln!("{}", trace_summary(&trace));
            r
        }
        FmaxMethod::Analytic => fmax_analytic(&g)?,
        FmaxMethod::Approx => fmax_half_approximation(&g)?,
        FmaxMethod::Bound => fmax_upper_bound(&g)?,
    };
    if a.json {
        let witness = r.argvector.as_ref().map(|w| {
            (0..g.n()).map(|i| json!({ "label": g.label(i), "value": w[i] })).collect::<Vec<_>>()
        });
        let out = json!({ "value": r.value, "kind": r.kind.as_str(), "witness": witness });
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        let w = if r.argvector.is_some() { "witness available" } else { "no witness" };
        println!("{}\t{}\t{}", r.value, r.kind.as_str(), w);
    }
    Ok(())
}

pub fn compare(a: &CompareArgs) -> Result<()> {
    let g = read_graph(&a.graph)?;
    let mut methods = Vec::new();
    for &m in &a.methods {
        if methods.contains(&m) {
            eprintln!("warning: method `{}` listed more than once; keeping the first", m.name());
        } else {
            methods.push(m);
        }
    }
    let results: Vec<(BasisMethod, Result<Vec<f64>>)> = methods
        .iter()
        .map(|&m| {
            let r = build(&g, m, &a.solver, false).map(|(b, _, trace)| {
                if let Some(t) = trace {
                    eprintln!("{}: {}", m.name(), trace_summary(&t));
                }
                let mut f = b.freqs().expect("builders cache frequencies").to_vec();
                f.sort_by(f64::total_cmp);
                f
            });
            (m, r)
        })
        .collect();

    let ceiling = results
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok())
        .flat_map(|f| f.last().copied())
        .fold(0.0, f64::max);
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["method", "index", "frequency", "rescaled_frequency", "dispersion_rescaled", "f_ceiling", "status"])?;
    let mut first_err = None;
    let mut successes = 0;
    for (m, r) in results {
        match r {
            Ok(f) => {
                successes += 1;
                let disp = dgft::variation::rescaled_dispersion(&f);
                for (k, v) in f.iter().enumerate() {
                    let rescaled = if ceiling > 0.0 { v / ceiling } else { 0.0 };
                    wtr.write_record([
                        m.name().to_string(),
                        k.to_string(),
                        format_float(*v),
                        format_float(rescaled),
                        format_float(disp),
                        format_float(ceiling),
                        "ok".to_string(),
                    ])?;
                }
            }
            Err(e) => {
                eprintln!("warning: method `{}` failed: {e:#}", m.name());
                wtr.write_record([m.name(), "", "", "", "", "", &format!("error: {e:#}")])?;
                first_err.get_or_insert(e);
            }
        }
    }
    let bytes = wtr.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    write(&a.out, &String::from_utf8(bytes)?)?;
    match first_err {
        Some(e) if successes == 0 => Err(e),
        _ => Ok(()),
    }
}

pub fn denoise(a: &DenoiseArgs) -> Result<()> {
    let g = read_graph(&a.graph)?;
    let file = BasisFile::read(&a.basis)?;
    if file.n != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), got: file.n }.into());
    }
    if let (Some(bl), Some(gl)) = (&file.labels, g.labels()) {
        if bl.as_slice() != gl {
            return Err(InputError(format!("{}: vertex labels differ from the graph", a.basis.display())).into());
        }
    }
    let labels: Vec<String> = (0..g.n()).map(|i| g.label(i)).collect();
    let values = read_labeled_values(&a.signal, &labels)?;
    let missing = values.iter().filter(|v| v.is_none()).count();
    if missing > 0 {
        return Err(Error::DimensionMismatch { expected: g.n(), got: g.n() - missing }.into());
    }
    let x = GraphSignal::new(values.into_iter().map(Option::unwrap).collect());
    let basis = file.basis()?.with_frequencies(&g)?;
    let windows = a.windows.clone().unwrap_or_else(|| (1..=g.n()).collect());
    let report = denoise_experiment(&g, &basis, &x, a.sigma, &windows, a.trials, a.seed)?;
    write(&a.out, &report.to_csv())?;
    if let Some(best) = report.best_window() {
        eprintln!("best window {} (mean e_f/e = {})", best.window, best.mean_ratio.unwrap());
    }

    if let Some(path) = &a.emit_spectra {
        let sorted = basis.sorted_by_frequency();
        let noisy: Vec<f64> =
            x.iter().zip(noise_realization(g.n(), a.sigma, a.seed, 0)).map(|(a, b)| a + b).collect();
        let clean = dgft(&sorted, &x)?;
        let noisy = dgft(&sorted, &GraphSignal::new(noisy))?;
        let ce = cumulative_energy(&clean)?;
        let ne = cumulative_energy(&noisy)?;
        let freqs = sorted.freqs().expect("cached");
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["index", "frequency", "clean_coeff", "clean_cumulative", "noisy_coeff", "noisy_cumulative"])?;
        for k in 0..g.n() {
            wtr.write_record([
                k.to_string(),
                format_float(freqs[k]),
                format_float(clean.coeffs[k]),
                format_float(ce[k]),
                format_float(noisy.coeffs[k]),
                format_float(ne[k]),
            ])?;
        }
        let bytes = wtr.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
        write(path, &String::from_utf8(bytes)?)?;
    }
    Ok(())
}

pub fn orient(a: &OrientArgs) -> Result<()> {
    let el = read_edge_list(&a.graph)?;
    let coords = read_labeled_values(&a.coords, &el.labels)?;
    if let Some(i) = coords.iter().position(|c| c.is_none()) {
        return Err(Error::MissingCoordinate(el.labels[i].clone()).into());
    }
    let coord: Vec<f64> = coords.into_iter().map(Option::unwrap).collect();
    let g = orient_by_coordinate(el.labels.len(), &el.edges, &coord)?.with_labels(el.labels.clone())?;
    let ties = coordinate_ties(&el.edges, &coord);
    let mut comments = vec![format!("oriented from lower to higher coordinate ({})", a.coords.display())];
    if ties > 0 {
        comments.push(format!(
            "{ties} edge(s) with equal coordinates directed from the earlier-listed vertex to the later one"
        ));
    }
    write(&a.out, &crate::io::format_edge_list(&g, &comments))
}
