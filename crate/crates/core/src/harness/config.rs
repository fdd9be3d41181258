//! TOML sweep configuration.
//!
//! ```toml
//! seed = 7
//! threads = 2
//! quantities = ["s2", "chi_e", "chi_f"]
//! sizes = [4, 6, 8]
//! lambdas = [0.01, 0.02]
//!
//! [spin]
//! boundary = "open"
//! [spin.model]
//! name = "tfim"
//! h = 2.0
//! ```
//!
//! Exactly one of `[spin]`, `[fermion]` or `[boson]` selects the model family.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fermion::TightBindingSpec;
use crate::hamiltonian::models::Model;
use crate::hamiltonian::BoundaryCondition;
use crate::solver::DEFAULT_DENSE_CAP;

/// Largest spin chain a sweep accepts.
pub const MAX_SPIN_SITES: usize = 16;
pub const MAX_FERMION_MODES: usize = 4096;
pub const MAX_BOSON_MODES: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    S2,
    Purity,
    Fidelity,
    ChiE,
    ChiF,
    Bounds,
    Cumulants,
    TightBinding,
    ScalingFit,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::S2 => "s2",
            Quantity::Purity => "purity",
            Quantity::Fidelity => "fidelity",
            Quantity::ChiE => "chi_e",
            Quantity::ChiF => "chi_f",
            Quantity::Bounds => "bounds",
            Quantity::Cumulants => "cumulants",
            Quantity::TightBinding => "tight_binding",
            Quantity::ScalingFit => "scaling_fit",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        const ALL: [Quantity; 9] = [
            Quantity::S2,
            Quantity::Purity,
            Quantity::Fidelity,
            Quantity::ChiE,
            Quantity::ChiF,
            Quantity::Bounds,
            Quantity::Cumulants,
            Quantity::TightBinding,
            Quantity::ScalingFit,
        ];
        ALL.into_iter().find(|q| q.name() == name)
    }

    /// Evaluated at each coupling of the `lambdas` grid.
    pub fn needs_lambda(self) -> bool {
        matches!(self, Quantity::S2 | Quantity::Purity | Quantity::Fidelity)
    }
}

fn default_boundary() -> BoundaryCondition {
    BoundaryCondition::Open
}

fn default_beta_range() -> [f64; 2] {
    [2.0, 20.0]
}

fn default_beta_points() -> usize {
    19
}

/// Spin chains cut at `cut` (default `L/2`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinFamily {
    pub model: Model,
    pub boundary: BoundaryCondition,
    pub cut: Option<usize>,
    /// Correlation length for the area bound.
    pub xi: Option<f64>,
    /// `βΔ` range of the cumulant grid.
    pub beta_gap: [f64; 2],
    pub beta_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum FermionFamily {
    /// Dimerised hopping chain cut at its middle weak bond.
    Dimerized { t1: f64, t2: f64 },
    /// Half-filled hypercubic slab with `L_A = L_B = L/2` and parallel length `L`.
    TightBinding {
        dim: usize,
        #[serde(default)]
        filling: crate::fermion::Filling,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BosonFamily {
    #[serde(default = "one")]
    pub spring: f64,
    #[serde(default = "one")]
    pub mass_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Spin(SpinFamily),
    Fermion(FermionFamily),
    Boson(BosonFamily),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Spin(_) => "spin",
            Family::Fermion(_) => "fermion",
            Family::Boson(_) => "boson",
        }
    }

    fn allows(&self, q: Quantity) -> bool {
        use Quantity::*;
        match self {
            Family::Spin(_) => matches!(q, S2 | Purity | Fidelity | ChiE | ChiF | Bounds | Cumulants),
            Family::Fermion(FermionFamily::Dimerized { .. }) => matches!(q, S2 | Purity | Fidelity | ChiF | Bounds),
            Family::Fermion(FermionFamily::TightBinding { .. }) => matches!(q, TightBinding | ScalingFit),
            Family::Boson(_) => matches!(q, Fidelity | ChiF | Bounds),
        }
    }
}

/// A validated sweep: the model family, the `(L, λ)` grid and the requested
/// quantities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPlan {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub quantities: Vec<Quantity>,
    pub seed: u64,
    /// Excluded from the config hash: output does not depend on it.
    #[serde(skip)]
    pub threads: usize,
}

const TOP_LEVEL_KEYS: [&str; 8] = ["seed", "threads", "quantities", "sizes", "lambdas", "spin", "fermion", "boson"];

fn field<T: DeserializeOwned>(table: &toml::Table, key: &str, path: &str) -> Result<Option<T>> {
    table
        .get(key)
        .map(|v| T::deserialize(v.clone()).map_err(|e| Error::config(path, e.message().to_string())))
        .transpose()
}

/// Values that take precedence over the file, typically from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides<'a> {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    /// Used when the file has no `quantities` key; an explicitly empty list
    /// is still an error.
    pub default_quantities: Option<&'a [Quantity]>,
}

impl SweepPlan {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with(text, &Overrides::default())
    }

    pub fn from_toml_with(text: &str, overrides: &Overrides) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<document>", e.message().to_string()))?;
        if let Some(key) = table.keys().find(|k| !TOP_LEVEL_KEYS.contains(&k.as_str())) {
            return Err(Error::config(key.clone(), "unknown key"));
        }
        let file_seed: Option<u64> = field(&table, "seed", "seed")?;
        let seed = overrides.seed.or(file_seed).unwrap_or(0);
        let file_threads: Option<usize> = field(&table, "threads", "threads")?;
        let threads = overrides.threads.or(file_threads).unwrap_or(1);
        let sizes: Vec<usize> = field(&table, "sizes", "sizes")?.ok_or_else(|| Error::config("sizes", "missing"))?;
        let lambdas: Vec<f64> = field(&table, "lambdas", "lambdas")?.unwrap_or_default();
        let quantities = match field::<Vec<String>>(&table, "quantities", "quantities")? {
            Some(names) => names
                .iter()
                .enumerate()
                .map(|(i, n)| {
                    Quantity::parse(n).ok_or_else(|| Error::config(format!("quantities[{i}]"), format!("unknown quantity `{n}`")))
                })
                .collect::<Result<Vec<_>>>()?,
            None => overrides
                .default_quantities
                .map(|q| q.to_vec())
                .ok_or_else(|| Error::config("quantities", "missing"))?,
        };

        let present: Vec<&str> = ["spin", "fermion", "boson"]
            .into_iter()
            .filter(|k| table.contains_key(*k))
            .collect();
        if present.len() != 1 {
            return Err(Error::config(
                "family",
                format!("exactly one of [spin], [fermion], [boson] is required, found {}", present.len()),
            ));
        }
        let family = match present[0] {
            "spin" => {
                let mut spin = table["spin"]
                    .as_table()
                    .cloned()
                    .ok_or_else(|| Error::config("spin", "expected a table"))?;
                // a random model without its own seed takes the plan seed
                let mut inherit_seed = false;
                if let Some(model) = spin.get_mut("model").and_then(|m| m.as_table_mut()) {
                    if model.get("name").and_then(|n| n.as_str()) == Some("random") && !model.contains_key("seed") {
                        model.insert("seed".into(), toml::Value::Integer(0));
                        inherit_seed = true;
                    }
                }
                if !spin.contains_key("model") {
                    return Err(Error::config("spin.model", "missing"));
                }
                let mut model: Model = field(&spin, "model", "spin.model")?.expect("checked above");
                if inherit_seed {
                    model = Model::Random { seed };
                }
                spin.remove("model");
                let mut rest: SpinRest = SpinRest::deserialize(toml::Value::Table(spin))
                    .map_err(|e| Error::config("spin", e.message().to_string()))?;
                rest.beta_points = rest.beta_points.max(2);
                Family::Spin(SpinFamily {
                    model,
                    boundary: rest.boundary,
                    cut: rest.cut,
                    xi: rest.xi,
                    beta_gap: rest.beta_gap,
                    beta_points: rest.beta_points,
                })
            }
            "fermion" => Family::Fermion(field(&table, "fermion", "fermion")?.expect("present")),
            _ => Family::Boson(field(&table, "boson", "boson")?.expect("present")),
        };
        let plan = Self {
            family,
            sizes,
            lambdas,
            quantities,
            seed,
            threads,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.threads == 0 {
            return Err(Error::config("threads", "must be at least 1"));
        }
        if self.quantities.is_empty() {
            return Err(Error::config("quantities", "empty quantity list"));
        }
        for (i, q) in self.quantities.iter().enumerate() {
            if !self.family.allows(*q) {
                return Err(Error::config(
                    format!("quantities[{i}]"),
                    format!("`{}` is not available for the {} family", q.name(), self.family.name()),
                ));
            }
        }
        if self.sizes.is_empty() {
            return Err(Error::config("sizes", "empty size grid"));
        }
        if self.quantities.iter().any(|q| q.needs_lambda()) && self.lambdas.is_empty() {
            return Err(Error::config("lambdas", "empty coupling grid for a coupling-dependent quantity"));
        }
        for (i, l) in self.lambdas.iter().enumerate() {
            if !l.is_finite() {
                return Err(Error::config(format!("lambdas[{i}]"), "not finite"));
            }
        }
        for (i, &l) in self.sizes.iter().enumerate() {
            self.check_size(l).map_err(|e| match e {
                Error::Input(m) => Error::config(format!("sizes[{i}]"), m),
                other => other,
            })?;
        }
        if let Family::Spin(s) = &self.family {
            if !(s.beta_gap[0] > 0.0 && s.beta_gap[1] > s.beta_gap[0]) {
                return Err(Error::config("spin.beta_gap", "need 0 < from < to"));
            }
            if let Some(xi) = s.xi {
                if !(xi > 0.0) {
                    return Err(Error::config("spin.xi", "must be positive"));
                }
            }
        }
        if self.quantities.contains(&Quantity::ScalingFit) && self.sizes.len() < 5 {
            return Err(Error::config("sizes", "scaling fit needs at least 5 sizes"));
        }
        Ok(())
    }

    fn check_size(&self, l: usize) -> Result<()> {
        match &self.family {
            Family::Spin(s) => {
                if l < 2 {
                    return Err(Error::input("spin chains need at least 2 sites"));
                }
                if let Some(cut) = s.cut {
                    if cut == 0 || cut >= l {
                        return Err(Error::input(format!("cut {cut} outside 1..{l}")));
                    }
                }
                if l > MAX_SPIN_SITES {
                    return Err(Error::Capacity {
                        dimension: 1 << l.min(63),
                        cap: 1 << MAX_SPIN_SITES,
                    });
                }
                if self.quantities.contains(&Quantity::Cumulants) && (1usize << l) > DEFAULT_DENSE_CAP {
                    return Err(Error::Capacity {
                        dimension: 1 << l,
                        cap: DEFAULT_DENSE_CAP,
                    });
                }
                Ok(())
            }
            Family::Fermion(FermionFamily::Dimerized { .. }) => {
                if l < 4 || l % 4 != 0 {
                    return Err(Error::input("dimerized chain length must be a multiple of 4"));
                }
                if l > MAX_FERMION_MODES {
                    return Err(Error::Capacity {
                        dimension: l,
                        cap: MAX_FERMION_MODES,
                    });
                }
                Ok(())
            }
            Family::Fermion(FermionFamily::TightBinding { dim, .. }) => {
                if l < 4 || l % 2 != 0 {
                    return Err(Error::input("tight-binding size must be even and at least 4"));
                }
                TightBindingSpec::new(*dim, l, l / 2, l / 2).map(|_| ())
            }
            Family::Boson(b) => {
                if l < 2 || l % 2 != 0 {
                    return Err(Error::input("harmonic chain length must be even"));
                }
                if !(b.spring > 0.0) || !(b.mass_sq >= 0.0) {
                    return Err(Error::input("spring must be positive and mass_sq non-negative"));
                }
                if l > MAX_BOSON_MODES {
                    return Err(Error::Capacity {
                        dimension: l,
                        cap: MAX_BOSON_MODES,
                    });
                }
                Ok(())
            }
        }
    }

    /// SHA-256 of the canonical JSON form of the plan, thread count excluded.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("plan serialises");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpinRest {
    #[serde(default = "default_boundary")]
    boundary: BoundaryCondition,
    #[serde(default)]
    cut: Option<usize>,
    #[serde(default)]
    xi: Option<f64>,
    #[serde(default = "default_beta_range")]
    beta_gap: [f64; 2],
    #[serde(default = "default_beta_points")]
    beta_points: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        seed = 3
        quantities = ["s2", "chi_e"]
        sizes = [2, 4]
        lambdas = [0.1]
        [spin.model]
        name = "tfim"
        h = 2.0
    "#;

    fn key_of(e: Error) -> String {
        match e {
            Error::Config { key, .. } => key,
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn parses_a_spin_plan() {
        let plan = SweepPlan::from_toml(BASE).unwrap();
        assert_eq!(plan.quantities, vec![Quantity::S2, Quantity::ChiE]);
        assert_eq!(plan.threads, 1);
        match &plan.family {
            Family::Spin(s) => assert_eq!(s.model, Model::Tfim { j: 1.0, h: 2.0, g: 0.0 }),
            _ => panic!(),
        }
    }

    #[test]
    fn errors_carry_key_paths() {
        let empty = BASE.replace(r#"["s2", "chi_e"]"#, "[]");
        assert_eq!(key_of(SweepPlan::from_toml(&empty).unwrap_err()), "quantities");
        let unknown = BASE.replace(r#""chi_e""#, r#""entropy""#);
        assert_eq!(key_of(SweepPlan::from_toml(&unknown).unwrap_err()), "quantities[1]");
        let wrong_family = BASE.replace(r#""chi_e""#, r#""tight_binding""#);
        assert_eq!(key_of(SweepPlan::from_toml(&wrong_family).unwrap_err()), "quantities[1]");
        let bad_size = BASE.replace("[2, 4]", "[2, 1]");
        assert_eq!(key_of(SweepPlan::from_toml(&bad_size).unwrap_err()), "sizes[1]");
        let bad_model = BASE.replace("h = 2.0", "hh = 2.0");
        assert_eq!(key_of(SweepPlan::from_toml(&bad_model).unwrap_err()), "spin.model");
        let stray = format!("extra = 1\n{BASE}");
        assert_eq!(key_of(SweepPlan::from_toml(&stray).unwrap_err()), "extra");
        let no_lambda = BASE.replace("lambdas = [0.1]", "");
        assert_eq!(key_of(SweepPlan::from_toml(&no_lambda).unwrap_err()), "lambdas");
    }

    #[test]
    fn oversized_spin_chain_is_a_capacity_error() {
        let big = BASE.replace("[2, 4]", "[20]");
        assert!(matches!(SweepPlan::from_toml(&big), Err(Error::Capacity { .. })));
    }

    #[test]
    fn hash_ignores_threads_but_not_seed() {
        let a = SweepPlan::from_toml(BASE).unwrap();
        let b = SweepPlan::from_toml(&format!("threads = 8\n{BASE}")).unwrap();
        let o = Overrides {
            seed: Some(u64::MAX),
            ..Overrides::default()
        };
        assert_eq!(SweepPlan::from_toml_with(BASE, &o).unwrap().seed, u64::MAX);
        let c = SweepPlan::from_toml(&BASE.replace("seed = 3", "seed = 4")).unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        assert_ne!(a.config_hash(), c.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }

    #[test]
    fn random_model_inherits_plan_seed() {
        let text = BASE.replace("name = \"tfim\"\n        h = 2.0", "name = \"random\"");
        let plan = SweepPlan::from_toml(&text).unwrap();
        match plan.family {
            Family::Spin(s) => assert_eq!(s.model, Model::Random { seed: 3 }),
            _ => panic!(),
        }
    }

    #[test]
    fn other_families() {
        let text = r#"
            quantities = ["tight_binding", "scaling_fit"]
            sizes = [8, 16, 32, 64, 128]
            [fermion]
            model = "tight_binding"
            dim = 1
        "#;
        assert!(SweepPlan::from_toml(text).is_ok());
        let text = r#"
            quantities = ["chi_f"]
            sizes = [6]
            [fermion]
            model = "dimerized"
            t1 = 1.0
            t2 = 0.5
        "#;
        assert_eq!(key_of(SweepPlan::from_toml(text).unwrap_err()), "sizes[0]");
        let text = r#"
            quantities = ["chi_f", "s2"]
            sizes = [8]
            [boson]
        "#;
        assert_eq!(key_of(SweepPlan::from_toml(text).unwrap_err()), "quantities[1]");
    }
}
