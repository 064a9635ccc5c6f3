use std::path::Path;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use num_rational::Rational64;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use tqm_core::maps::{RationalRecord, IDENTITY};
use tqm_core::propagate::toeplitz_propagator_seeded;
use tqm_core::quantize::operator_norm;
use tqm_core::spectra::form_factor_by_power;
use tqm_core::*;

use crate::output::{dump_matrix, log_log_fit, matrix_pairs, Report, Row};

/// Parse a JSON argument given inline (leading `{` or `[`) or as a file path.
pub fn load_json<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return serde_json::from_str(trimmed).with_context(|| format!("parsing inline {what} JSON"));
    }
    let text = std::fs::read_to_string(arg).with_context(|| format!("reading {what} file {arg}"))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {what} file {arg}"))
}

/// Intertwiner for level-1 quantizable linear maps, lattice translation for
/// pure shifts, unitarized Toeplitz operator otherwise.
pub fn build_propagator(level: usize, chi: &AffineTorusMap, seed: u64) -> Result<Propagator> {
    let p = if chi.is_linear() && is_quantizable(chi) {
        cat_propagator(level, *chi.matrix(), seed)
    } else if *chi.matrix() == IDENTITY {
        kronecker_propagator(level, chi.shift())
    } else {
        toeplitz_propagator_seeded(level, chi, seed)
    };
    p.with_context(|| format!("N={level}"))
}

/// Runs `f` on every level in parallel and returns results in list order,
/// surfacing the error of the smallest failing level.
fn sweep<T: Send>(levels: &[usize], f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    let results: Vec<Result<T>> = levels.par_iter().map(|&n| f(n)).collect();
    results.into_iter().collect()
}

fn rational_json(r: Rational64) -> Value {
    serde_json::to_value(RationalRecord::from(r)).expect("rational record serializes")
}

pub fn check(chi: &AffineTorusMap, levels: &[usize]) -> Result<Report> {
    let defect = holonomy_defect(chi);
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for &n in levels {
        let q = is_quantizable_at_level(chi, n as u64);
        let k = preserves_kernel_character(chi, n as u64);
        rows.push(Row::new(n, "quantizable", f64::from(u8::from(q)), None));
        rows.push(Row::new(n, "kernel_character", f64::from(u8::from(k)), None));
        let witness = defect.witness_at_level(n as u64).map(|w| [w.m, w.n]);
        table.push(json!({"N": n, "quantizable": q, "kernel_character": k, "witness": witness}));
    }
    let level1 = is_quantizable(chi);
    Ok(Report {
        rows,
        footer: vec![format!("level-1 quantizable: {level1}"), format!("holonomy defect: {defect}")],
        summary: Some(json!({
            "map": chi,
            "level1_quantizable": level1,
            "defect": {
                "quadratic": defect.quadratic.iter().map(|&r| rational_json(r)).collect::<Vec<_>>(),
                "linear": defect.linear.iter().map(|&r| rational_json(r)).collect::<Vec<_>>(),
            },
            "levels": table,
        })),
    })
}

pub fn quantize(f: &FourierSymbol, level: usize, scheme: QuantizationScheme, dump: Option<&Path>) -> Result<Report> {
    let op = op_quantize(level, f, scheme).with_context(|| format!("N={level}"))?;
    if let Some(path) = dump {
        dump_matrix(path, op.matrix())?;
    }
    let rows = vec![
        Row::new(level, "hermiticity_defect", op.hermiticity_defect(), None),
        Row::new(level, "operator_norm", operator_norm(op.matrix()), None),
    ];
    Ok(Report {
        rows,
        footer: vec![format!("scheme: {scheme}")],
        summary: Some(json!({
            "N": level,
            "scheme": scheme,
            "role": op.role(),
            "matrix": matrix_pairs(op.matrix()),
        })),
    })
}

pub fn propagate(chi: &AffineTorusMap, level: usize, seed: u64, tol: Option<f64>, dump: Option<&Path>) -> Result<Report> {
    let p = build_propagator(level, chi, seed)?;
    let defect = p.unitary().unitarity_defect();
    if let Some(tol) = tol {
        if defect > tol {
            bail!("N={level}: unitarity defect {defect:.3e} exceeds tolerance {tol:.1e}");
        }
    }
    if let Some(path) = dump {
        dump_matrix(path, p.matrix())?;
    }
    let trace = p.matrix().trace();
    Ok(Report {
        rows: vec![
            Row::new(level, "unitarity_defect", defect, None),
            Row::new(level, "abs_trace", trace.norm(), None),
        ],
        footer: vec![format!("construction: {}", p.tag())],
        summary: Some(serde_json::to_value(&p)?),
    })
}

pub fn egorov(
    chi: &AffineTorusMap,
    f: &FourierSymbol,
    levels: &[usize],
    scheme: QuantizationScheme,
    seed: u64,
    tol: Option<f64>,
) -> Result<Report> {
    for &n in levels {
        tqm_core::maps::require_quantizable_at_level(chi, n as u64).with_context(|| format!("N={n}"))?;
    }
    let residuals = sweep(levels, |n| {
        let p = build_propagator(n, chi, seed)?;
        egorov_residual(n, &p, f, scheme).with_context(|| format!("N={n}"))
    })?;
    if let Some(tol) = tol {
        if let Some((n, r)) = levels.iter().zip(&residuals).find(|(_, r)| **r > tol) {
            bail!("N={n}: Egorov residual {r:.3e} exceeds tolerance {tol:.1e}");
        }
    }
    let points: Vec<(f64, f64)> = levels.iter().zip(&residuals).map(|(&n, &r)| (n as f64, r)).collect();
    let fit = log_log_fit(&points);
    let footer = match fit {
        Some((slope, r2)) => vec![format!("slope={slope:.6} r2={r2:.6}")],
        None => vec!["slope=NA r2=NA".to_string()],
    };
    Ok(Report {
        rows: levels.iter().zip(&residuals).map(|(&n, &r)| Row::new(n, "egorov", r, None)).collect(),
        footer,
        summary: Some(json!({
            "scheme": scheme,
            "slope": fit.map(|f| f.0),
            "r2": fit.map(|f| f.1),
        })),
    })
}

pub fn spectrum(chi: &AffineTorusMap, levels: &[usize], seed: u64, ell_max: u64, tol: Option<f64>) -> Result<Report> {
    let per_level = sweep(levels, |n| {
        let p = build_propagator(n, chi, seed)?;
        let s = eigenphases(p.unitary()).with_context(|| format!("N={n}"))?;
        let mut rows: Vec<Row> = s.phases().iter().enumerate().map(|(j, &t)| Row::new(n, format!("phase:{j}"), t, None)).collect();
        for ell in 0..=ell_max {
            let k = s.form_factor(ell);
            let direct = form_factor_by_power(p.unitary(), ell);
            rows.push(Row::new(n, format!("ell:{ell}"), k, Some((k - direct).abs() / k.max(1.0))));
        }
        Ok(rows)
    })?;
    let rows: Vec<Row> = per_level.into_iter().flatten().collect();
    if let Some(tol) = tol {
        if let Some(r) = rows.iter().find(|r| r.residual.is_some_and(|x| x > tol)) {
            bail!("N={}: form factor at {} disagrees with Tr U^ell by {:.3e} (tolerance {tol:.1e})", r.n, r.ell_or_mode, r.residual.unwrap());
        }
    }
    Ok(Report { rows, footer: Vec::new(), summary: None })
}

pub fn paircorr(chi: &AffineTorusMap, level: usize, samples: &[f64], cutoff: usize, include_zero: bool, seed: u64) -> Result<Report> {
    let p = build_propagator(level, chi, seed)?;
    let s = eigenphases(p.unitary()).with_context(|| format!("N={level}"))?;
    let pc = pair_correlation(&s, samples, cutoff, include_zero).with_context(|| format!("N={level}"))?;
    Ok(Report {
        rows: vec![Row::new(level, format!("L:{cutoff}"), pc.value, Some(pc.tail_bound))],
        footer: Vec::new(),
        summary: Some(json!({"N": level, "pair_correlation": pc})),
    })
}

fn estimate_rows(estimates: &[ExpansionEstimate], prefix: &str) -> Vec<Row> {
    let mut rows = Vec::new();
    for e in estimates {
        let top = e.levels.iter().copied().max().unwrap_or(0);
        for m in &e.modes {
            let label = format!("{prefix}{}:{},{}", e.order, m.m, m.n);
            rows.push(Row::new(top, format!("{label}:re"), m.re, Some(m.residual)));
            rows.push(Row::new(top, format!("{label}:im"), m.im, Some(m.residual)));
        }
    }
    rows
}

pub fn starprod(f: &FourierSymbol, g: &FourierSymbol, orders: usize, levels: &[usize]) -> Result<Report> {
    let est = extract_b(f, g, orders, levels)?;
    let bracket = poisson_bracket(f, g);
    let mut checks = serde_json::Map::new();
    let mut footer = Vec::new();
    let mut note = |key: &str, value: f64| {
        footer.push(format!("{key}={value:.6e}"));
        checks.insert(key.into(), json!(value));
    };
    note("b0_minus_product", est[0].coefficient().max_coefficient_distance(&f.multiply(g)));
    if let Some(b1) = est.get(1) {
        let c = b1.coefficient();
        note("b1_minus_half_bracket", c.max_coefficient_distance(&bracket.scale(Complex64::new(0.5, 0.0))));
        let mapped = bracket.scale(Complex64::new(0.0, 1.0 / (4.0 * std::f64::consts::PI)));
        note("b1_minus_i_over_4pi_bracket", c.max_coefficient_distance(&mapped));
    }
    Ok(Report {
        rows: estimate_rows(&est, "B"),
        footer,
        summary: Some(json!({"estimates": est, "checks": checks})),
    })
}

pub fn conjugation(chi: &AffineTorusMap, f: &FourierSymbol, orders: usize, levels: &[usize], scheme: QuantizationScheme) -> Result<Report> {
    let est = extract_v(chi, f, orders, levels, scheme)?;
    let v0 = est[0].coefficient().max_coefficient_distance(&pullback(f, chi));
    Ok(Report {
        rows: estimate_rows(&est, "V"),
        footer: vec![format!("v0_minus_pullback={v0:.6e}")],
        summary: Some(json!({"estimates": est, "checks": {"v0_minus_pullback": v0}})),
    })
}

pub fn qe(chi: &AffineTorusMap, f: &FourierSymbol, levels: &[usize], scheme: QuantizationScheme, seed: u64) -> Result<Report> {
    let stats = sweep(levels, |n| {
        let p = build_propagator(n, chi, seed)?;
        matrix_element_diagnostics(p.unitary(), f, scheme).with_context(|| format!("N={n}"))
    })?;
    let mut rows = Vec::new();
    for (&n, s) in levels.iter().zip(&stats) {
        rows.push(Row::new(n, "variance", s.variance, Some(s.max_deviation)));
        rows.push(Row::new(n, "mean", s.mean, None));
    }
    let footer = levels
        .windows(2)
        .zip(stats.windows(2))
        .map(|(n, s)| format!("variance ratio N={}->{}: {:.6e}", n[0], n[1], s[0].variance / s[1].variance))
        .collect();
    Ok(Report { rows, footer, summary: Some(serde_json::to_value(&stats)?) })
}
