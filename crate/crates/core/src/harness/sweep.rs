use std::time::Instant;

use rayon::prelude::*;

use super::config::{Family, FermionFamily, Quantity, SweepPlan};
use super::output::{ResultRow, CODE_VERSION};
use crate::boson::{boson_bound_chain, chi_f_boson, gaussian_fidelity, BosonModel};
use crate::error::{Error, Result};
use crate::fermion::{
    chi_f_polar, corr_matrix_renyi2, polar_bound_check, scaling_fit, slater_overlap, tight_binding_chi_e,
    QuadraticFermionModel, TightBindingSpec,
};
use crate::hamiltonian::{Bipartition, HamiltonianSpec, Lattice};
use crate::solver::SolverOptions;
use crate::susceptibility::{
    beta_grid_for_gap, correlator_bound, cumulants, fidelity, perturbation_amplitudes, renyi2_at,
    DEFAULT_LAMBDA_PROBES, DEFAULT_TAIL_BETA_GAP,
};

/// Settings that affect how a sweep runs but not what it computes.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Fill `wall_time_ms`. Timed output is no longer byte-reproducible.
    pub timing: bool,
    pub solver: SolverOptions,
}

#[derive(Debug, Clone, Copy)]
struct Point {
    size: usize,
    /// `None` for coupling-independent quantities.
    lambda: Option<f64>,
}

/// One computed number before it becomes a row.
struct Value {
    quantity: &'static str,
    value: f64,
    error: Option<f64>,
}

fn v(quantity: &'static str, value: f64) -> Value {
    Value {
        quantity,
        value,
        error: None,
    }
}

fn ve(quantity: &'static str, value: f64, error: f64) -> Value {
    Value {
        quantity,
        value,
        error: Some(error),
    }
}

struct Labels {
    model_id: String,
    d: usize,
    l: Option<usize>,
    l_a: Option<usize>,
}

fn grid(plan: &SweepPlan) -> Vec<Point> {
    let has_static = plan.quantities.iter().any(|q| !q.needs_lambda());
    let has_coupled = plan.quantities.iter().any(|q| q.needs_lambda());
    let mut points = Vec::new();
    for &size in &plan.sizes {
        if has_static {
            points.push(Point { size, lambda: None });
        }
        if has_coupled {
            points.extend(plan.lambdas.iter().map(|&l| Point { size, lambda: Some(l) }));
        }
    }
    points
}

fn wants(plan: &SweepPlan, q: Quantity) -> bool {
    plan.quantities.contains(&q)
}

fn spin_spec(plan: &SweepPlan, n: usize) -> Result<HamiltonianSpec> {
    let Family::Spin(s) = &plan.family else { unreachable!() };
    let cut = s.cut.unwrap_or(n / 2).max(1);
    s.model.build(Lattice::chain(n, s.boundary), Bipartition::contiguous(n, cut)?)
}

fn labels(plan: &SweepPlan, size: usize) -> Labels {
    match &plan.family {
        Family::Spin(s) => Labels {
            model_id: s.model.id().to_string(),
            d: 1,
            l: Some(size),
            l_a: Some(s.cut.unwrap_or(size / 2).max(1)),
        },
        Family::Fermion(FermionFamily::Dimerized { .. }) => Labels {
            model_id: "dimerized_fermion".into(),
            d: 1,
            l: Some(size),
            l_a: Some(size / 2),
        },
        Family::Fermion(FermionFamily::TightBinding { dim, .. }) => Labels {
            model_id: "tight_binding".into(),
            d: *dim,
            l: Some(size),
            l_a: Some(size / 2),
        },
        Family::Boson(b) => Labels {
            model_id: if b.mass_sq > 0.0 { "pinned_harmonic" } else { "unpinned_harmonic" }.into(),
            d: 1,
            l: Some(size),
            l_a: Some(size / 2),
        },
    }
}

fn spin_point(plan: &SweepPlan, p: Point, opts: &SolverOptions) -> Result<Vec<Value>> {
    let Family::Spin(family) = &plan.family else { unreachable!() };
    let spec = spin_spec(plan, p.size)?;
    let mut out = Vec::new();
    match p.lambda {
        None => {
            if wants(plan, Quantity::ChiE) || wants(plan, Quantity::ChiF) || wants(plan, Quantity::Bounds) {
                let amps = perturbation_amplitudes(&spec, opts)?;
                if wants(plan, Quantity::ChiE) {
                    out.push(v("chi_e", amps.chi_e()));
                }
                if wants(plan, Quantity::ChiF) {
                    out.push(v("chi_f", amps.chi_f()));
                }
                if wants(plan, Quantity::Bounds) {
                    out.push(v("gap", amps.gap()));
                    out.push(v("correlator_bound", correlator_bound(&amps, opts)?));
                    if let Some(xi) = family.xi {
                        out.push(v(
                            "area_bound",
                            crate::susceptibility::area_bound(amps.gap(), spec.max_boundary_norm(), xi, 1, spec.boundary_size()),
                        ));
                    }
                }
            }
            if wants(plan, Quantity::Cumulants) {
                let (_, _, gap) = crate::susceptibility::unperturbed(&spec, opts)?;
                let betas = beta_grid_for_gap(gap, family.beta_gap[0], family.beta_gap[1], family.beta_points);
                let tail = DEFAULT_TAIL_BETA_GAP.min(family.beta_gap[1]);
                let series = cumulants(&spec, &betas, &DEFAULT_LAMBDA_PROBES, 2, tail, opts)?;
                let c1 = series.fit(1).expect("order 1 fitted");
                let c2 = series.fit(2).expect("order 2 fitted");
                out.push(v("a1", c1.slope));
                out.push(v("a2", c2.slope));
                out.push(ve("b2", c2.intercept, series.b2_discrepancy().unwrap_or(0.0)));
                out.push(v("c2_relative_residual", c2.relative_residual));
            }
        }
        Some(lambda) => {
            if wants(plan, Quantity::S2) || wants(plan, Quantity::Purity) {
                let s2 = renyi2_at(&spec, lambda, opts)?;
                if wants(plan, Quantity::S2) {
                    out.push(v("s2", s2));
                }
                if wants(plan, Quantity::Purity) {
                    out.push(v("purity", (-s2).exp()));
                }
            }
            if wants(plan, Quantity::Fidelity) {
                out.push(v("fidelity", fidelity(&spec, lambda, opts)?));
            }
        }
    }
    Ok(out)
}

fn dimerized_point(plan: &SweepPlan, p: Point, t1: f64, t2: f64) -> Result<Vec<Value>> {
    let model = QuadraticFermionModel::dimerized_chain(p.size, t1, t2)?;
    let mut out = Vec::new();
    match p.lambda {
        None => {
            if wants(plan, Quantity::ChiF) {
                let chi = chi_f_polar(model.z(), model.dz())?;
                out.push(ve("chi_f", chi.many_body, chi.error_estimate / 8.0));
                out.push(ve("chi_f_polar", chi.value, chi.error_estimate));
            }
            if wants(plan, Quantity::Bounds) {
                let b = polar_bound_check(model.z(), model.dz())?;
                out.push(v("gap", b.gap));
                out.push(v("bhatia_lhs", b.lhs));
                out.push(v("bhatia_rhs", b.rhs));
                out.push(v("rank_bound", b.rank_bound));
                out.push(v("rank_dz", b.rank as f64));
            }
        }
        Some(lambda) => {
            let z = model.at(lambda);
            if wants(plan, Quantity::S2) || wants(plan, Quantity::Purity) {
                let s2 = corr_matrix_renyi2(&z, model.region_a())?;
                if wants(plan, Quantity::S2) {
                    out.push(v("s2", s2));
                }
                if wants(plan, Quantity::Purity) {
                    out.push(v("purity", (-s2).exp()));
                }
            }
            if wants(plan, Quantity::Fidelity) {
                out.push(v("fidelity", slater_overlap(model.z(), &z)?));
            }
        }
    }
    Ok(out)
}

fn tight_binding_spec(plan: &SweepPlan, size: usize) -> Result<TightBindingSpec> {
    let Family::Fermion(FermionFamily::TightBinding { dim, filling }) = &plan.family else { unreachable!() };
    let mut spec = TightBindingSpec::new(*dim, size, size / 2, size / 2)?;
    spec.filling = *filling;
    Ok(spec)
}

fn tight_binding_point(plan: &SweepPlan, p: Point) -> Result<Vec<Value>> {
    let r = tight_binding_chi_e(&tight_binding_spec(plan, p.size)?)?;
    Ok(vec![v("chi_e", r.chi_e), v("zero_modes", r.zero_modes as f64)])
}

fn boson_point(plan: &SweepPlan, p: Point, spring: f64, mass_sq: f64) -> Result<Vec<Value>> {
    let model = BosonModel::pinned_chain(p.size, spring, mass_sq)?;
    let mut out = Vec::new();
    match p.lambda {
        None => {
            if wants(plan, Quantity::ChiF) {
                let chi = chi_f_boson(model.v(), model.dv())?;
                out.push(ve("chi_f", chi.value, chi.error_estimate));
            }
            if wants(plan, Quantity::Bounds) {
                let b = boson_bound_chain(model.v(), model.dv())?;
                out.push(v("gap", b.gap));
                out.push(v("relative_norm", b.relative_norm));
                out.push(v("covariance_bound", b.covariance_bound));
                out.push(v("gap_bound", b.gap_bound));
                out.push(v("covariance_ratio", b.covariance_ratio));
                out.push(v("gap_ratio", b.gap_ratio));
                out.push(v("rank_dv", b.rank as f64));
            }
        }
        Some(lambda) => {
            if wants(plan, Quantity::Fidelity) {
                out.push(v("fidelity", gaussian_fidelity(model.v(), &model.at(lambda))?));
            }
        }
    }
    Ok(out)
}

fn evaluate(plan: &SweepPlan, p: Point, opts: &SolverOptions) -> Result<Vec<Value>> {
    match &plan.family {
        Family::Spin(_) => spin_point(plan, p, opts),
        Family::Fermion(FermionFamily::Dimerized { t1, t2 }) => dimerized_point(plan, p, *t1, *t2),
        Family::Fermion(FermionFamily::TightBinding { .. }) => tight_binding_point(plan, p),
        Family::Boson(b) => boson_point(plan, p, b.spring, b.mass_sq),
    }
}

fn row(labels: &Labels, lambda: Option<f64>, value: Value, wall_time_ms: Option<f64>) -> ResultRow {
    ResultRow {
        model_id: labels.model_id.clone(),
        d: labels.d,
        l: labels.l,
        l_a: labels.l_a,
        lambda,
        quantity: value.quantity.to_string(),
        value: Some(value.value),
        error_estimate: value.error,
        wall_time_ms,
        code_version: CODE_VERSION.to_string(),
        status: "ok".into(),
    }
}

fn error_row(labels: &Labels, lambda: Option<f64>, quantity: &str, e: &Error) -> ResultRow {
    ResultRow {
        model_id: labels.model_id.clone(),
        d: labels.d,
        l: labels.l,
        l_a: labels.l_a,
        lambda,
        quantity: quantity.to_string(),
        value: None,
        error_estimate: None,
        wall_time_ms: None,
        code_version: CODE_VERSION.to_string(),
        status: e.to_string(),
    }
}

/// Runs every grid point on a pool of `plan.threads` workers. Rows come out
/// in grid order (sizes, then couplings, as listed in the plan), so the
/// result does not depend on the thread count. A failing grid point becomes
/// a single `error` row.
pub fn run_sweep(plan: &SweepPlan, run: &RunOptions) -> Result<Vec<ResultRow>> {
    plan.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.threads)
        .build()
        .map_err(|e| Error::input(format!("thread pool: {e}")))?;
    let points = grid(plan);
    let results: Vec<(Result<Vec<Value>>, f64)> = pool.install(|| {
        points
            .par_iter()
            .map(|&p| {
                let start = Instant::now();
                let r = evaluate(plan, p, &run.solver);
                (r, start.elapsed().as_secs_f64() * 1e3)
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut fit_points = Vec::new();
    for (p, (result, ms)) in points.iter().zip(results) {
        let labels = labels(plan, p.size);
        let timing = run.timing.then_some(ms);
        match result {
            Ok(values) => {
                for value in values {
                    if value.quantity == "chi_e" && matches!(plan.family, Family::Fermion(FermionFamily::TightBinding { .. })) {
                        fit_points.push((p.size as f64, value.value));
                        if !wants(plan, Quantity::TightBinding) {
                            continue;
                        }
                    }
                    if value.quantity == "zero_modes" && !wants(plan, Quantity::TightBinding) {
                        continue;
                    }
                    rows.push(row(&labels, p.lambda, value, timing));
                }
            }
            Err(e) => rows.push(error_row(&labels, p.lambda, "error", &e)),
        }
    }

    if wants(plan, Quantity::ScalingFit) {
        let labels = Labels {
            l: None,
            l_a: None,
            ..labels(plan, 0)
        };
        let d = labels.d;
        match scaling_fit(&fit_points, d, None) {
            Ok(f) => {
                rows.push(row(&labels, None, ve("fit_a", f.a, f.a_std_error), None));
                rows.push(row(&labels, None, ve("fit_b", f.b, f.b_std_error), None));
                if d > 1 {
                    rows.push(row(&labels, None, ve("fit_c", f.c, f.c_std_error), None));
                }
                rows.push(row(&labels, None, v("fit_r_squared", f.r_squared), None));
                rows.push(row(&labels, None, v("fit_a_significance", f.a_significance()), None));
            }
            Err(e) => rows.push(error_row(&labels, None, "scaling_fit", &e)),
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(text: &str) -> SweepPlan {
        SweepPlan::from_toml(text).unwrap()
    }

    #[test]
    fn two_qubit_renyi_rows() {
        let p = plan(
            r#"
            quantities = ["s2", "purity"]
            sizes = [2]
            lambdas = [0.5, 1.0, 2.0]
            [spin.model]
            name = "field_xx"
        "#,
        );
        let rows = run_sweep(&p, &RunOptions::default()).unwrap();
        assert_eq!(rows.len(), 6);
        for r in rows.iter().filter(|r| r.quantity == "s2") {
            // closed form: Tr ρ_A² = 1 - 2 sin²θ cos²θ with tan 2θ = λ/2
            let l = r.lambda.unwrap();
            let theta = 0.5 * (l / 2.0).atan();
            let purity = 1.0 - 2.0 * (theta.sin() * theta.cos()).powi(2);
            assert!((r.value.unwrap() + purity.ln()).abs() < 1e-10, "{l}");
        }
        let at_one = rows.iter().find(|r| r.quantity == "purity" && r.lambda == Some(1.0)).unwrap();
        assert!((at_one.value.unwrap() - 0.9).abs() < 1e-10);
    }

    #[test]
    fn failing_point_becomes_error_row() {
        // λ = -3 makes V + λδV indefinite on the unpinned chain
        let p = plan(
            r#"
            quantities = ["fidelity"]
            sizes = [8]
            lambdas = [0.5, -3.0]
            [boson]
            mass_sq = 0.0
        "#,
        );
        let rows = run_sweep(&p, &RunOptions::default()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].status, "ok");
        assert_eq!(rows[1].quantity, "error");
        assert!(rows[1].value.is_none() && rows[1].status.contains("stability"));
    }

    #[test]
    fn thread_count_does_not_change_rows() {
        let text = r#"
            quantities = ["chi_e", "chi_f", "bounds", "s2"]
            sizes = [2, 3, 4, 5, 6]
            lambdas = [0.05, 0.1]
            [spin.model]
            name = "random"
        "#;
        let mut p = plan(text);
        let one = run_sweep(&p, &RunOptions::default()).unwrap();
        p.threads = 4;
        let four = run_sweep(&p, &RunOptions::default()).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn tight_binding_fit_rows() {
        let p = plan(
            r#"
            quantities = ["scaling_fit"]
            sizes = [16, 32, 64, 128, 256]
            [fermion]
            model = "tight_binding"
            dim = 1
        "#,
        );
        let rows = run_sweep(&p, &RunOptions::default()).unwrap();
        let names: Vec<&str> = rows.iter().map(|r| r.quantity.as_str()).collect();
        assert_eq!(names, ["fit_a", "fit_b", "fit_r_squared", "fit_a_significance"]);
        assert!(rows[0].value.unwrap() > 0.0);
    }
}
