//! The `verify` property run: every module's invariants over seeded corpora,
//! reported as measured slack per invariant.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::corpus::{
    gapped_amplitudes, random_boson_instance, random_fermion_instance, random_spin_corpus, CorpusEntry, GAP_FLOOR,
};
use super::output::CODE_VERSION;
use crate::boson::{chi_f_boson, chi_f_boson_leading_order, gaussian_fidelity};
use crate::error::{Error, Result};
use crate::fermion::{
    chi_f_polar, corr_matrix_renyi2, fock_ground_state, fock_reduced_purity, min_singular_value, polar_bound_check,
    tight_binding_chi_e, TightBindingSpec,
};
use crate::hamiltonian::models::two_qubit;
use crate::hamiltonian::HamiltonianSpec;
use crate::solver::{partial_trace_b, renyi2, spec_ground_state, GroundStateMethod, SolverOptions};
use crate::susceptibility::{
    beta_grid_for_gap, correlator_bound, cumulants, fidelity, perturbation_amplitudes, perturbative_rdm, swap_purity,
    twisted_ground_overlap, DEFAULT_DOUBLED_CAP, DEFAULT_LAMBDA_PROBES, DEFAULT_TAIL_BETA_GAP,
};

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    pub threads: usize,
    pub spin_cases: usize,
    pub max_sites: usize,
    /// Largest spin chain used for the doubled-system identities.
    pub max_doubled_sites: usize,
    /// Specs used for the (more expensive) cumulant checks.
    pub cumulant_cases: usize,
    pub fermion_cases: usize,
    pub boson_cases: usize,
    pub solver: SolverOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            threads: 1,
            spin_cases: 240,
            max_sites: 8,
            max_doubled_sites: 6,
            cumulant_cases: 6,
            fermion_cases: 200,
            boson_cases: 20,
            solver: SolverOptions::default(),
        }
    }
}

/// One invariant: pass when every measured deviation is at most `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub tolerance: f64,
    pub cases: usize,
    pub skipped_gapless: usize,
    /// Largest measured deviation, 0 when nothing was measured.
    pub worst: f64,
    /// `tolerance - worst`; negative when the invariant fails.
    pub slack: f64,
    pub passed: bool,
    /// Labels of failing cases.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub code_version: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<InvariantCheck>,
    /// `χ_E / χ_F` over the gapped spin corpus, ten bins on `[0, 1]`.
    pub chi_ratio_histogram: Vec<HistogramBin>,
    /// Corpus specs routed away from the bound checks.
    pub skipped_gapless: Vec<String>,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&InvariantCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

enum Outcome {
    Measured(f64),
    Skipped,
    Failed(String),
}

fn summarise(name: &str, tolerance: f64, outcomes: Vec<(String, Outcome)>) -> InvariantCheck {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let mut skipped = 0;
    let mut failures = Vec::new();
    for (label, outcome) in outcomes {
        match outcome {
            Outcome::Measured(m) => {
                cases += 1;
                if !(m <= tolerance) {
                    failures.push(format!("{label}: {m:e}"));
                }
                worst = if m.is_nan() { f64::INFINITY } else { worst.max(m) };
            }
            Outcome::Skipped => skipped += 1,
            Outcome::Failed(msg) => {
                cases += 1;
                failures.push(format!("{label}: {msg}"));
            }
        }
    }
    InvariantCheck {
        name: name.to_string(),
        tolerance,
        cases,
        skipped_gapless: skipped,
        worst,
        slack: tolerance - worst,
        passed: failures.is_empty(),
        failures,
    }
}

fn outcome(r: Result<f64>) -> Outcome {
    match r {
        Ok(m) => Outcome::Measured(m),
        Err(Error::DegenerateGroundState { .. }) | Err(Error::Gapless(_)) => Outcome::Skipped,
        Err(e) => Outcome::Failed(e.to_string()),
    }
}

/// `(a - b)/b` clipped below at zero, `a ≤ b` up to this excess.
fn excess(a: f64, b: f64) -> f64 {
    if a <= b {
        0.0
    } else if b > 0.0 {
        (a - b) / b
    } else {
        f64::INFINITY
    }
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

struct SpinCase {
    label: String,
    gapped: bool,
    chi_ratio: Option<f64>,
    chain_e: Outcome,
    chain_f: Outcome,
    exchange: Outcome,
    fidelity_identity: Outcome,
}

fn spin_case(entry: &CorpusEntry, opts: &SolverOptions) -> SpinCase {
    let mut case = SpinCase {
        label: entry.label.clone(),
        gapped: false,
        chi_ratio: None,
        chain_e: Outcome::Skipped,
        chain_f: Outcome::Skipped,
        exchange: Outcome::Skipped,
        fidelity_identity: Outcome::Skipped,
    };
    let amps = match gapped_amplitudes(&entry.spec, opts) {
        Ok(Some(a)) => a,
        Ok(None) => return case,
        Err(e) => {
            case.chain_e = Outcome::Failed(e.to_string());
            return case;
        }
    };
    case.gapped = true;
    let (chi_e, chi_f) = (amps.chi_e(), amps.chi_f());
    case.chi_ratio = (chi_f > 0.0).then(|| chi_e / chi_f);
    case.chain_e = Outcome::Measured(excess(chi_e, chi_f));
    case.chain_f = outcome(correlator_bound(&amps, opts).map(|c| excess(chi_f, c)));
    case.exchange = outcome((|| {
        let swapped = entry.spec.with_bipartition(entry.spec.bipartition().swapped())?;
        let other = perturbation_amplitudes(&swapped, opts)?;
        Ok(relative(chi_e, other.chi_e()).max(relative(chi_f, other.chi_f())))
    })());
    case.fidelity_identity = outcome((|| {
        let lambda = 1e-2;
        let n = perturbative_rdm(&amps, lambda)?.norm();
        Ok((fidelity(&entry.spec, lambda, opts)? - n).abs())
    })());
    case
}

fn ground_purity(spec: &HamiltonianSpec, lambda: f64, opts: &SolverOptions) -> Result<(DVector<crate::C64>, f64)> {
    let g = spec_ground_state(spec, lambda, GroundStateMethod::Auto, opts)?;
    let rho = partial_trace_b(&g.state, spec.bipartition(), spec.lattice().local_dim())?;
    let purity = renyi2(&rho)?.0;
    Ok((g.state, purity))
}

fn two_qubit_checks(opts: &SolverOptions) -> Vec<InvariantCheck> {
    let spec = two_qubit();
    let chi = perturbation_amplitudes(&spec, opts).map(|a| (a.chi_e() - 1.0 / 16.0).abs().max((a.chi_f() - 1.0 / 16.0).abs()));
    let purity = ground_purity(&spec, 1.0, opts).map(|(_, p)| (p - 0.9).abs());
    vec![
        summarise("two_qubit_susceptibilities", 1e-12, vec![("two_qubit".into(), outcome(chi))]),
        summarise("two_qubit_purity", 1e-10, vec![("two_qubit".into(), outcome(purity))]),
    ]
}

fn doubled_checks(corpus: &[&CorpusEntry], opts: &VerifyOptions) -> Vec<InvariantCheck> {
    let results: Vec<(String, Outcome, Outcome)> = corpus
        .par_iter()
        .map(|e| {
            let swap = outcome((|| {
                let (state, purity) = ground_purity(&e.spec, 1.0, &opts.solver)?;
                Ok((swap_purity(&state, &e.spec, DEFAULT_DOUBLED_CAP)? - purity).abs())
            })());
            let twisted = outcome(
                twisted_ground_overlap(&e.spec, 1.0, DEFAULT_DOUBLED_CAP, &opts.solver).map(|t| (t.overlap - t.purity).abs()),
            );
            (e.label.clone(), swap, twisted)
        })
        .collect();
    let (mut swap, mut twisted) = (Vec::new(), Vec::new());
    for (label, s, t) in results {
        swap.push((label.clone(), s));
        twisted.push((label, t));
    }
    vec![
        summarise("swap_purity_identity", 1e-12, swap),
        summarise("twisted_overlap_identity", 1e-9, twisted),
    ]
}

fn cumulant_checks(corpus: &[&CorpusEntry], opts: &SolverOptions) -> Vec<InvariantCheck> {
    let results: Vec<(String, Outcome, Outcome)> = corpus
        .par_iter()
        .map(|e| {
            let series = (|| {
                let amps = perturbation_amplitudes(&e.spec, opts)?;
                let grid = beta_grid_for_gap(amps.gap(), 10.0, 20.0, 11);
                cumulants(&e.spec, &grid, &DEFAULT_LAMBDA_PROBES, 2, DEFAULT_TAIL_BETA_GAP, opts)
            })();
            match series {
                Ok(s) => {
                    let b2 = s.b2_discrepancy().expect("order 2") / s.chi_f;
                    let residual = s.fit(2).expect("order 2").relative_residual;
                    (e.label.clone(), Outcome::Measured(b2), Outcome::Measured(residual))
                }
                Err(Error::DegenerateGroundState { .. }) | Err(Error::Gapless(_)) => {
                    (e.label.clone(), Outcome::Skipped, Outcome::Skipped)
                }
                Err(err) => (
                    e.label.clone(),
                    Outcome::Failed(err.to_string()),
                    Outcome::Failed(err.to_string()),
                ),
            }
        })
        .collect();
    let (mut b2, mut lin) = (Vec::new(), Vec::new());
    for (label, a, b) in results {
        b2.push((label.clone(), a));
        lin.push((label, b));
    }
    vec![
        summarise("cumulant_b2_equals_minus_chi_f", 1e-2, b2),
        summarise("cumulant_c2_linearity", 1e-6, lin),
    ]
}

fn fermion_checks(opts: &VerifyOptions) -> Vec<InvariantCheck> {
    let seeds: Vec<u64> = (0..opts.fermion_cases as u64).map(|i| opts.seed.wrapping_mul(1_000_003).wrapping_add(i)).collect();
    let results: Vec<(String, Outcome, Outcome)> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| {
            let modes = 8 + 2 * (i % 7);
            let (z, dz) = random_fermion_instance(seed, modes);
            let label = format!("fermion#{i}(N={modes})");
            if min_singular_value(&z) < GAP_FLOOR || min_singular_value(&(&z + &dz)) < GAP_FLOOR {
                return (label, Outcome::Skipped, Outcome::Skipped);
            }
            let bound = polar_bound_check(&z, &dz);
            let chi = chi_f_polar(&z, &dz);
            match (bound, chi) {
                (Ok(b), Ok(c)) => (
                    label,
                    Outcome::Measured(excess(b.lhs, b.rhs)),
                    Outcome::Measured(excess(c.value, b.rank_bound)),
                ),
                (Err(e), _) | (_, Err(e)) => (label, Outcome::Failed(e.to_string()), Outcome::Skipped),
            }
        })
        .collect();
    let (mut bhatia, mut rank) = (Vec::new(), Vec::new());
    for (label, a, b) in results {
        bhatia.push((label.clone(), a));
        rank.push((label, b));
    }

    let triangle: Vec<(String, Outcome)> = (0..opts.fermion_cases.min(50) as u64)
        .into_par_iter()
        .map(|i| {
            let (z, dz) = random_fermion_instance(opts.seed.wrapping_add(0x5eed).wrapping_add(i), 8);
            let full = &z + &dz;
            let r = (|| {
                let direct = corr_matrix_renyi2(&full, &[0, 1, 2, 3])?;
                let g = fock_ground_state(&full)?;
                let oracle = -fock_reduced_purity(&g.state, 4, 8)?.ln();
                Ok((direct - oracle).abs())
            })();
            (format!("fermion-oracle#{i}"), outcome(r))
        })
        .collect();

    let exchange: Vec<(String, Outcome)> = [(1, 0, 5, 9), (1, 0, 7, 13), (1, 0, 11, 3), (2, 6, 5, 7), (2, 8, 5, 7)]
        .into_par_iter()
        .map(|(d, l, a, b)| {
            let r = (|| {
                let x = tight_binding_chi_e(&TightBindingSpec::new(d, l, a, b)?)?;
                let y = tight_binding_chi_e(&TightBindingSpec::new(d, l, b, a)?)?;
                Ok(relative(x.chi_e, y.chi_e))
            })();
            (format!("tight-binding(d={d},L={l},{a}|{b})"), outcome(r))
        })
        .collect();

    vec![
        summarise("bhatia_inequality", 1e-9, bhatia),
        summarise("polar_chi_f_below_rank_bound", 1e-9, rank),
        summarise("fermion_oracle_triangle", 1e-8, triangle),
        summarise("tight_binding_region_exchange", 1e-10, exchange),
    ]
}

fn direct_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = (a.nrows(), b.nrows());
    let mut s = DMatrix::zeros(n + m, n + m);
    s.view_mut((0, 0), (n, n)).copy_from(a);
    s.view_mut((n, n), (m, m)).copy_from(b);
    s
}

fn boson_checks(opts: &VerifyOptions) -> Vec<InvariantCheck> {
    type Row = (String, Outcome, Outcome, Outcome, Outcome);
    let rows: Vec<Row> = (0..opts.boson_cases as u64)
        .into_par_iter()
        .map(|i| {
            let base = opts.seed.wrapping_mul(7919).wrapping_add(i);
            let (v1, d1) = random_boson_instance(base, 3);
            let (v2, d2) = random_boson_instance(base ^ 0xb05, 4);
            let v1p = &v1 + &d1;
            let v2p = &v2 + &d2;
            let multiplicative = outcome((|| {
                let whole = gaussian_fidelity(&direct_sum(&v1, &v2), &direct_sum(&v1p, &v2p))?;
                Ok((whole - gaussian_fidelity(&v1, &v1p)? * gaussian_fidelity(&v2, &v2p)?).abs())
            })());
            let symmetric = outcome((|| Ok((gaussian_fidelity(&v1, &v1p)? - gaussian_fidelity(&v1p, &v1)?).abs()))());
            let leading = outcome((|| Ok(relative(chi_f_boson(&v2, &d2)?.value, chi_f_boson_leading_order(&v2, &d2)?)))());
            let invariant = outcome((|| {
                let q = nalgebra::linalg::SymmetricEigen::new(random_boson_instance(base ^ 0x0c7, 4).1).eigenvectors;
                let a = chi_f_boson(&v2, &d2)?.value;
                let b = chi_f_boson(&(&q * &v2 * q.transpose()), &(&q * &d2 * q.transpose()))?.value;
                Ok(relative(a, b))
            })());
            (format!("boson#{i}"), multiplicative, symmetric, leading, invariant)
        })
        .collect();
    let mut cols: [Vec<(String, Outcome)>; 4] = Default::default();
    for (label, a, b, c, d) in rows {
        for (col, o) in cols.iter_mut().zip([a, b, c, d]) {
            col.push((label.clone(), o));
        }
    }
    let [a, b, c, d] = cols;
    vec![
        summarise("boson_fidelity_multiplicativity", 1e-10, a),
        summarise("boson_fidelity_symmetry", 1e-12, b),
        summarise("boson_chi_f_leading_order", 1e-6, c),
        summarise("boson_chi_f_orthogonal_invariance", 1e-9, d),
    ]
}

/// Runs the full property suite on the default seeded corpus.
pub fn verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let corpus = random_spin_corpus(opts.seed, opts.spin_cases, opts.max_sites)?;
    verify_with_corpus(&corpus, opts)
}

/// Runs the property suite with a caller-supplied spin corpus. Specs whose
/// bulk gap is below the floor are listed in `skipped_gapless` and excluded
/// from every bound check.
pub fn verify_with_corpus(corpus: &[CorpusEntry], opts: &VerifyOptions) -> Result<VerifyReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.max(1))
        .build()
        .map_err(|e| Error::input(format!("thread pool: {e}")))?;
    pool.install(|| {
        let spin: Vec<SpinCase> = corpus.par_iter().map(|e| spin_case(e, &opts.solver)).collect();
        let mut checks = two_qubit_checks(&opts.solver);

        let skipped_gapless: Vec<String> = spin.iter().filter(|c| !c.gapped && matches!(c.chain_e, Outcome::Skipped)).map(|c| c.label.clone()).collect();
        let mut histogram: Vec<HistogramBin> = (0..10)
            .map(|k| HistogramBin {
                lower: k as f64 / 10.0,
                upper: (k + 1) as f64 / 10.0,
                count: 0,
            })
            .collect();
        for r in spin.iter().filter_map(|c| c.chi_ratio) {
            let k = ((r * 10.0).floor().max(0.0) as usize).min(9);
            histogram[k].count += 1;
        }

        let gapped: Vec<&CorpusEntry> = corpus.iter().zip(&spin).filter(|(_, c)| c.gapped).map(|(e, _)| e).collect();
        let mut chain_e = Vec::new();
        let mut chain_f = Vec::new();
        let mut exchange = Vec::new();
        let mut identity = Vec::new();
        for c in spin {
            chain_e.push((c.label.clone(), c.chain_e));
            chain_f.push((c.label.clone(), c.chain_f));
            exchange.push((c.label.clone(), c.exchange));
            identity.push((c.label, c.fidelity_identity));
        }
        checks.push(summarise("chi_e_le_chi_f", 1e-9, chain_e));
        checks.push(summarise("chi_f_le_correlator_bound", 1e-9, chain_f));
        checks.push(summarise("region_exchange_symmetry", 1e-10, exchange));
        checks.push(summarise("perturbative_fidelity_identity", 1e-4, identity));

        let small: Vec<&CorpusEntry> = gapped
            .iter()
            .copied()
            .filter(|e| e.spec.lattice().num_sites() <= opts.max_doubled_sites)
            .collect();
        checks.extend(doubled_checks(&small, opts));
        let cumulant_set: Vec<&CorpusEntry> = small.iter().copied().take(opts.cumulant_cases).collect();
        checks.extend(cumulant_checks(&cumulant_set, &opts.solver));
        checks.extend(fermion_checks(opts));
        checks.extend(boson_checks(opts));

        Ok(VerifyReport {
            code_version: CODE_VERSION.to_string(),
            seed: opts.seed,
            passed: checks.iter().all(|c| c.passed),
            checks,
            chi_ratio_histogram: histogram,
            skipped_gapless,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::models::Model;
    use crate::hamiltonian::{Bipartition, BoundaryCondition, Lattice};

    fn small() -> VerifyOptions {
        VerifyOptions {
            spin_cases: 12,
            max_sites: 6,
            cumulant_cases: 2,
            fermion_cases: 20,
            boson_cases: 4,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn small_run_passes() {
        let report = verify(&small()).unwrap();
        for c in &report.checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(report.passed);
        let total: usize = report.chi_ratio_histogram.iter().map(|b| b.count).sum();
        assert!(total > 0);
    }

    #[test]
    fn gapless_specs_are_routed_away() {
        let gapless = Model::FieldXx { h: 0.0, j: 1.0 }
            .build(Lattice::chain(2, BoundaryCondition::Open), Bipartition::contiguous(2, 1).unwrap())
            .unwrap();
        let mut corpus = random_spin_corpus(3, 4, 5).unwrap();
        corpus.push(CorpusEntry {
            label: "gapless".into(),
            spec: gapless,
        });
        let report = verify_with_corpus(&corpus, &small()).unwrap();
        assert_eq!(report.skipped_gapless, vec!["gapless".to_string()]);
        assert!(report.check("chi_e_le_chi_f").unwrap().skipped_gapless >= 1);
        assert!(report.passed, "{:#?}", report.checks);
    }
}
