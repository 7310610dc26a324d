use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};

use aperiodic_spectra::birkhoff::{cesaro_correlation, sigma_box_bound, zero_mean_project, CylindricalFunction};
use aperiodic_spectra::cocycle::{cocycle_product, mass_constant, normalized_product_max, riesz_bound};
use aperiodic_spectra::error::ValidationIssue;
use aperiodic_spectra::fit::decay_exponent;
use aperiodic_spectra::geometry::Point;
use aperiodic_spectra::selfaffine::{deform_rule, deformed_box, sigma_deformed_bound};
use aperiodic_spectra::tiling::{
    fixtures, good_return_vectors, rule_from_path, rule_power, supertile, validate, SubstitutionRule,
};
use aperiodic_spectra::weakmixing::{
    classify_substitution, delta0, eigenvalue_criterion, eigenvalue_search, epsilon_trace, omega_v_norm,
    rule_generator_data, window_check, Assertions, CONVERGENCE_WINDOW,
};
use aperiodic_spectra::Error;

use crate::args::{parse_grid, parse_scales, parse_vector};
use crate::failure::Failure;
use crate::report::{Cell, Report, Table};

/// A loaded rule with a label for reports.
pub struct Source {
    pub label: String,
    pub power: usize,
    pub rule: SubstitutionRule,
}

pub fn load(fixture: Option<&str>, path: Option<&Path>, power: usize) -> Result<Source, Failure> {
    let (label, rule) = match (fixture, path) {
        (Some(name), None) => {
            let rule = fixtures::by_name(name).ok_or_else(|| {
                Failure::Usage(format!("unknown fixture {name:?}; known: {}", fixtures::NAMES.join(", ")))
            })?;
            (name.to_ascii_lowercase(), rule)
        }
        (None, Some(p)) => (p.display().to_string(), rule_from_path(p)?),
        _ => return Err(Failure::Usage("give exactly one of --fixture and --rule".into())),
    };
    if power == 0 {
        return Err(Failure::Usage("--power must be at least 1".into()));
    }
    let rule = if power == 1 { rule } else { rule_power(&rule, power)? };
    Ok(Source { label, power, rule })
}

fn header(src: &Source) -> Value {
    json!({ "rule": src.label, "power": src.power, "dim": src.rule.dim })
}

fn type_index(rule: &SubstitutionRule, s: &str) -> Result<usize, Failure> {
    let k = match s.parse::<usize>() {
        Ok(k) => k,
        Err(_) => rule.type_index(s).ok_or_else(|| Failure::Usage(format!("unknown prototile {s:?}")))?,
    };
    if k >= rule.type_count() {
        return Err(Failure::Usage(format!("prototile index {k} out of range")));
    }
    Ok(k)
}

/// The zero-mean projection of the unit hat on one prototile.
fn observable(rule: &SubstitutionRule, hat: &str) -> Result<CylindricalFunction, Failure> {
    let k = type_index(rule, hat)?;
    Ok(zero_mean_project(&CylindricalFunction::hat_on(rule, k, 1.0)?, rule)?)
}

fn usage<T>(r: Result<T, String>) -> Result<T, Failure> {
    r.map_err(Failure::Usage)
}

fn issue_parent(issue: &ValidationIssue) -> Option<usize> {
    match issue {
        ValidationIssue::VolumeIdentity { parent, .. }
        | ValidationIssue::Overlap { parent, .. }
        | ValidationIssue::ChildOutside { parent, .. }
        | ValidationIssue::UnknownType { parent, .. } => Some(*parent),
        _ => None,
    }
}

pub fn cmd_validate(src: &Source) -> Result<Report, Failure> {
    match validate(&src.rule) {
        Ok(stats) => {
            let names: Vec<&str> = src.rule.prototiles.iter().map(|p| p.name.as_str()).collect();
            Ok(Report::Document(json!({ "source": header(src), "valid": true, "types": names, "stats": stats })))
        }
        Err(Error::Validation(issues)) => {
            let lines: Vec<String> = issues
                .iter()
                .map(|i| match issue_parent(i) {
                    Some(p) => format!("{i} [parent {}]", src.rule.prototiles[p].name),
                    None => i.to_string(),
                })
                .collect();
            Err(Failure::Invalid(lines.join("\n")))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_classify(src: &Source, assertions: Assertions) -> Result<Report, Failure> {
    let verdict = classify_substitution(&src.rule, assertions)?;
    Ok(Report::Document(json!({ "source": header(src), "classification": verdict })))
}

pub fn cmd_supertile(src: &Source, kind: &str, order: usize) -> Result<Report, Failure> {
    let k = type_index(&src.rule, kind)?;
    let patch = supertile(&src.rule, k, order)?;
    let mut table = Table::new(&["index", "type", "name", "x", "y"]);
    for (i, t) in patch.tiles.iter().enumerate() {
        let name = src.rule.prototiles[t.kind].name.clone();
        table.push(vec![i.into(), t.kind.into(), name.into(), t.translation[0].into(), t.translation[1].into()]);
    }
    Ok(Report::Table { table, summary: json!({ "tiles": patch.len(), "order": order, "type": k }) })
}

/// Frequencies from one vector or from a grid along a direction.
fn frequencies(
    dim: usize,
    omega: Option<&str>,
    grid: Option<&str>,
    direction: Option<&str>,
) -> Result<Vec<Point>, Failure> {
    match (omega, grid) {
        (Some(w), None) => Ok(vec![usage(parse_vector(w, dim))?]),
        (None, Some(g)) => {
            let u = match direction {
                Some(d) => usage(parse_vector(d, dim))?,
                None => [1.0, 0.0],
            };
            Ok(usage(parse_grid(g))?.into_iter().map(|t| [t * u[0], t * u[1]]).collect())
        }
        _ => Err(Failure::Usage("give exactly one of --omega and --omega-grid".into())),
    }
}

pub fn cmd_cocycle_sweep(
    src: &Source,
    omega: Option<&str>,
    grid: Option<&str>,
    direction: Option<&str>,
    n: usize,
) -> Result<Report, Failure> {
    let rule = &src.rule;
    let omegas = frequencies(rule.dim, omega, grid, direction)?;
    let mass = mass_constant(rule)?;
    let vectors: Vec<Point> = good_return_vectors(rule).iter().map(|g| g.vector).collect();
    let rows: Vec<Result<[f64; 4], Failure>> = omegas
        .par_iter()
        .map(|&w| {
            let product = cocycle_product(rule, n, w)?;
            let normalized = normalized_product_max(rule, &product);
            let riesz = riesz_bound(rule, mass.mass, n, w, &vectors).product;
            Ok([product.matrix.max_abs(), normalized, riesz, normalized / riesz])
        })
        .collect();
    let mut table = Table::new(&["omega_x", "omega_y", "n", "pi_max", "pi_normalized", "riesz", "ratio"]);
    let mut worst: f64 = 0.0;
    for (w, row) in omegas.iter().zip(rows) {
        let [raw, normalized, riesz, ratio] = row?;
        worst = worst.max(ratio);
        table.push(vec![w[0].into(), w[1].into(), n.into(), raw.into(), normalized.into(), riesz.into(), ratio.into()]);
    }
    Ok(Report::Table {
        table,
        summary: json!({ "source": header(src), "mass": mass.mass, "max_ratio": worst, "rows": omegas.len() }),
    })
}

fn exponent(xs: &[f64], ys: &[f64]) -> Value {
    match decay_exponent(xs, ys) {
        Ok(g) if xs.len() >= 2 => json!(g),
        _ => Value::Null,
    }
}

const DECAY_COLUMNS: [&str; 6] = ["r", "radius", "g", "g_std_error", "bound", "bound_std_error"];

pub fn cmd_spectral_decay(src: &Source, omega: &str, r: &str, samples: usize, hat: &str) -> Result<Report, Failure> {
    let rule = &src.rule;
    let w = usage(parse_vector(omega, rule.dim))?;
    let f = observable(rule, hat)?;
    let mut table = Table::new(&DECAY_COLUMNS);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for r in usage(parse_scales(r))? {
        let s = sigma_box_bound(rule, &f, w, r, samples)?;
        xs.push((1.0 / r).ln());
        ys.push(s.bound);
        table.push(vec![r.into(), s.radius.into(), s.g_r.into(), s.g_r_std_error.into(), s.bound.into(), s.std_error.into()]);
    }
    Ok(Report::Table {
        table,
        summary: json!({ "source": header(src), "omega": w, "samples": samples, "exponent": exponent(&xs, &ys) }),
    })
}

pub fn cmd_correlation_decay(src: &Source, radii: &str, horizon_factor: usize, hat: &str) -> Result<Report, Failure> {
    let rule = &src.rule;
    let f = observable(rule, hat)?;
    let mut table = Table::new(&["radius", "cesaro", "pitch", "horizon"]);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for radius in usage(parse_scales(radii))? {
        let c = cesaro_correlation(rule, &f, &f, radius, horizon_factor)?;
        xs.push(radius.ln());
        ys.push(c.value);
        table.push(vec![radius.into(), c.value.into(), c.pitch.into(), c.horizon.into()]);
    }
    Ok(Report::Table {
        table,
        summary: json!({ "source": header(src), "horizon_factor": horizon_factor, "exponent": exponent(&xs, &ys) }),
    })
}

pub struct EpsilonOptions<'a> {
    pub omega: Option<&'a str>,
    pub grid: Option<&'a str>,
    pub direction: Option<&'a str>,
    pub steps: usize,
    pub delta0: Option<f64>,
    pub window_ratio: usize,
}

pub fn cmd_epsilon(src: &Source, opts: &EpsilonOptions<'_>) -> Result<Report, Failure> {
    let rule = &src.rule;
    let data = rule_generator_data(rule)?;
    if opts.grid.is_some() {
        let omegas: Vec<Point> = frequencies(rule.dim, None, opts.grid, opts.direction)?
            .into_iter()
            .filter(|w| w[0] != 0.0 || w[1] != 0.0)
            .collect();
        let search = eigenvalue_search(&data, &omegas, opts.steps)?;
        let mut table = Table::new(&["omega_x", "omega_y", "trailing_eps"]);
        for (w, e) in &search.convergent {
            table.push(vec![w[0].into(), w[1].into(), (*e).into()]);
        }
        return Ok(Report::Table {
            table,
            summary: json!({
                "source": header(src),
                "tested": search.tested,
                "convergent": search.convergent.len(),
                "steps": opts.steps,
            }),
        });
    }
    let w = frequencies(rule.dim, opts.omega, None, None)?[0];
    let trace = epsilon_trace(&data, w, opts.steps)?;
    let threshold = match opts.delta0 {
        Some(d) => d,
        None => delta0(&data)?,
    };
    let witness = window_check(&trace, threshold, opts.window_ratio);
    let criterion = if opts.steps + 1 >= CONVERGENCE_WINDOW {
        let c = eigenvalue_criterion(&data, w, opts.steps)?;
        json!({ "trailing_eps": c.trailing_eps, "convergent": c.convergent })
    } else {
        Value::Null
    };
    let mut columns = vec!["n".to_string(), "norm".to_string()];
    columns.extend((1..=data.count()).map(|i| format!("eps_{i}")));
    let mut table = Table { columns, rows: Vec::new() };
    for (n, (e, norm)) in trace.eps.iter().zip(&trace.norms).enumerate() {
        let mut row: Vec<Cell> = vec![n.into(), (*norm).into()];
        row.extend(e.iter().map(|&x| Cell::from(x)));
        table.push(row);
    }
    Ok(Report::Table {
        table,
        summary: json!({
            "source": header(src),
            "omega": w,
            "omega_v_norm": omega_v_norm(w, &data.vectors),
            "delta0": threshold,
            "window_ratio": opts.window_ratio,
            "witness": witness,
            "eigenvalue_criterion": criterion,
        }),
    })
}

pub fn cmd_selfaffine_decay(src: &Source, r: &str, samples: usize, hat: &str) -> Result<Report, Failure> {
    let deformed = deform_rule(&src.rule)?;
    let rule = &deformed.rule;
    let data = &deformed.deformation;
    let f = observable(rule, hat)?;
    let mut columns = vec!["domain"];
    columns.extend(DECAY_COLUMNS);
    let mut table = Table::new(&columns);
    let mut fits = [(Vec::new(), Vec::new()), (Vec::new(), Vec::new())];
    let mut contained = true;
    for r in usage(parse_scales(r))? {
        contained &= deformed_box(data, [0.0, 0.0], r)?.contains_inscribed;
        let estimates = [
            ("cube", sigma_box_bound(rule, &f, [0.0, 0.0], r, samples)?),
            ("deformed", sigma_deformed_bound(rule, data, &f, r, samples)?),
        ];
        for ((name, s), fit) in estimates.into_iter().zip(fits.iter_mut()) {
            fit.0.push((1.0 / r).ln());
            fit.1.push(s.bound);
            table.push(vec![
                name.into(),
                r.into(),
                s.radius.into(),
                s.g_r.into(),
                s.g_r_std_error.into(),
                s.bound.into(),
                s.std_error.into(),
            ]);
        }
    }
    Ok(Report::Table {
        table,
        summary: json!({
            "source": header(src),
            "squared": deformed.squared,
            "sigma": data.sigma,
            "log_norm": data.log_norm,
            "inscribed_cubes_contained": contained,
            "exponent_cube": exponent(&fits[0].0, &fits[0].1),
            "exponent_deformed": exponent(&fits[1].0, &fits[1].1),
        }),
    })
}
