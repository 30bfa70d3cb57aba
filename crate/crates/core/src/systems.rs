//! Registry of built-in example systems.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{MetriplecticSystem, SystemError};
use crate::fields::{PoissonField, ScalarField};

pub const RIGID_BODY: &str = "rigid_body";
pub const OSCILLATOR: &str = "oscillator";
pub const DEGENERATE_EX1: &str = "degenerate_ex1";
pub const DEGENERATE_EX2: &str = "degenerate_ex2";

/// Highest power of `z` accepted in the oscillator entropy coefficients
/// `s0 … s6`.
pub const OSCILLATOR_MAX_POWER: usize = 6;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum RegistryError {
    #[error("unknown system {0:?}; expected one of rigid_body, oscillator, degenerate_ex1, degenerate_ex2")]
    UnknownSystem(String),
    #[error("system {system} does not take parameter {key:?}")]
    UnknownParameter { system: String, key: String },
    #[error("parameter {key:?} must be finite, got {value}")]
    InvalidParameter { key: String, value: f64 },
    #[error(transparent)]
    Construction(#[from] SystemError),
}

/// A fully specified built-in system.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemSpec {
    pub name: String,
    pub poisson: PoissonField,
    pub hamiltonian: ScalarField,
    pub entropy: ScalarField,
    pub parameters: BTreeMap<String, f64>,
    pub provenance: &'static str,
}

impl SystemSpec {
    pub fn into_system(self) -> Result<MetriplecticSystem, SystemError> {
        MetriplecticSystem::new(self.name, self.poisson, self.hamiltonian, self.entropy)
    }

    /// Coefficients `(a, b, c)` for the rigid body.
    pub fn rigid_body_coefficients(&self) -> Option<(f64, f64, f64)> {
        (self.name == RIGID_BODY).then(|| (self.parameters["a"], self.parameters["b"], self.parameters["c"]))
    }

    /// Coefficients `[s0, s1, …]` of `S(z)` for the oscillator.
    pub fn oscillator_coefficients(&self) -> Option<Vec<f64>> {
        (self.name == OSCILLATOR).then(|| {
            (0..=OSCILLATOR_MAX_POWER)
                .map(|k| self.parameters.get(&format!("s{k}")).copied().unwrap_or(0.0))
                .collect()
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BuiltinInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub provenance: &'static str,
}

const REGISTRY: [BuiltinInfo; 4] = [
    BuiltinInfo {
        name: RIGID_BODY,
        description: "relaxing rigid body: P(m)v = v × m, H = ½(ax² + by² + cz²), S = ½‖m‖²; params a, b, c (default 1, 2, 3)",
        provenance: "relaxing-rigid-body",
    },
    BuiltinInfo {
        name: OSCILLATOR,
        description: "dissipative oscillator: constant P with P12 = 1, H = ½‖m‖², S = S(z); params s0..s6 are the coefficients of S (default S = z²/2)",
        provenance: "dissipative-oscillator",
    },
    BuiltinInfo {
        name: DEGENERATE_EX1,
        description: "degenerate Poisson tensor P12 = y, H = ½‖m‖², S = z²/2; the plane y = 0 stays invariant",
        provenance: "degenerate-poisson",
    },
    BuiltinInfo {
        name: DEGENERATE_EX2,
        description: "degenerate Poisson tensor P12 = y, H = ½(x² + (y − 1)² + z²), S = z²/2; the plane y = 0 is left unless z = 0",
        provenance: "degenerate-poisson",
    },
];

/// Built-in systems in a fixed order.
pub fn list_builtins() -> &'static [BuiltinInfo] {
    &REGISTRY
}

fn half_norm_squared() -> ScalarField {
    ScalarField::from_terms([(0.5, [2, 0, 0]), (0.5, [0, 2, 0]), (0.5, [0, 0, 2])])
}

fn half_z_squared() -> ScalarField {
    ScalarField::monomial(0.5, [0, 0, 2])
}

fn check_keys(system: &str, params: &BTreeMap<String, f64>, allowed: &[&str]) -> Result<(), RegistryError> {
    for (key, &value) in params {
        if !allowed.contains(&key.as_str()) {
            return Err(RegistryError::UnknownParameter { system: system.into(), key: key.clone() });
        }
        if !value.is_finite() {
            return Err(RegistryError::InvalidParameter { key: key.clone(), value });
        }
    }
    Ok(())
}

/// Looks up a built-in system and fills in its parameters.
///
/// `rigid_body` takes `a`, `b`, `c` (any reals, repeats allowed).
/// `oscillator` takes `s0` … `s6`, the coefficients of `S(z) = Σ s_k z^k`;
/// when none are given `S = z²/2`. The degenerate examples take none.
pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<SystemSpec, RegistryError> {
    let info = REGISTRY
        .iter()
        .find(|i| i.name == name)
        .ok_or_else(|| RegistryError::UnknownSystem(name.into()))?;
    let degenerate_p = || PoissonField::new(ScalarField::coordinate(1), ScalarField::zero(), ScalarField::zero());

    let (poisson, hamiltonian, entropy, parameters) = match name {
        RIGID_BODY => {
            check_keys(name, params, &["a", "b", "c"])?;
            let mut p = BTreeMap::from([("a".to_string(), 1.0), ("b".to_string(), 2.0), ("c".to_string(), 3.0)]);
            p.extend(params.iter().map(|(k, v)| (k.clone(), *v)));
            let h = ScalarField::from_terms([
                (0.5 * p["a"], [2, 0, 0]),
                (0.5 * p["b"], [0, 2, 0]),
                (0.5 * p["c"], [0, 0, 2]),
            ]);
            (PoissonField::rigid_body(), h, half_norm_squared(), p)
        }
        OSCILLATOR => {
            let keys: Vec<String> = (0..=OSCILLATOR_MAX_POWER).map(|k| format!("s{k}")).collect();
            let key_refs: Vec<&str> = keys.iter().map(String::as_str).collect();
            check_keys(name, params, &key_refs)?;
            let p = if params.is_empty() {
                BTreeMap::from([("s2".to_string(), 0.5)])
            } else {
                params.clone()
            };
            let coeffs: Vec<f64> = keys.iter().map(|k| p.get(k).copied().unwrap_or(0.0)).collect();
            let poisson = PoissonField::new(ScalarField::constant(1.0), ScalarField::zero(), ScalarField::zero());
            (poisson, half_norm_squared(), ScalarField::polynomial_in_z(&coeffs), p)
        }
        DEGENERATE_EX1 => {
            check_keys(name, params, &[])?;
            (degenerate_p(), half_norm_squared(), half_z_squared(), BTreeMap::new())
        }
        DEGENERATE_EX2 => {
            check_keys(name, params, &[])?;
            // ½(x² + (y − 1)² + z²)
            let h = ScalarField::from_terms([
                (0.5, [2, 0, 0]),
                (0.5, [0, 2, 0]),
                (-1.0, [0, 1, 0]),
                (0.5, [0, 0, 0]),
                (0.5, [0, 0, 2]),
            ]);
            (degenerate_p(), h, half_z_squared(), BTreeMap::new())
        }
        _ => unreachable!("registry and match arms disagree"),
    };
    Ok(SystemSpec { name: name.into(), poisson, hamiltonian, entropy, parameters, provenance: info.provenance })
}

/// `builtin` with default parameters, already constructed.
pub fn default_system(name: &str) -> Result<MetriplecticSystem, RegistryError> {
    Ok(builtin(name, &BTreeMap::new())?.into_system()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::xi_field;
    use crate::linalg3::{Mat3, Vec3};
    use crate::metric::build_g;

    fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn rigid_body_metric_matches_closed_matrix() {
        let spec = builtin(RIGID_BODY, &params(&[("a", 1.0), ("b", 2.0), ("c", 3.0)])).unwrap();
        let x = Vec3::splat(1.0);
        let g = build_g(spec.hamiltonian.grad(x)).g;
        // −b²y² − c²z², abxy, acxz / −a²x² − c²z², bcyz / −a²x² − b²y²
        let (a, b, c) = (1.0, 2.0, 3.0);
        let want = Mat3::from_rows([
            [-b * b - c * c, a * b, a * c],
            [a * b, -a * a - c * c, b * c],
            [a * c, b * c, -a * a - b * b],
        ]);
        assert_eq!(g, want);
        assert_eq!(g.rows, [[-13.0, 2.0, 3.0], [2.0, -10.0, 6.0], [3.0, 6.0, -5.0]]);
    }

    #[test]
    fn oscillator_with_zero_entropy_is_pure_rotation() {
        let sys = builtin(OSCILLATOR, &params(&[("s0", 0.0)])).unwrap().into_system().unwrap();
        for m in [Vec3::new(1.0, 2.0, 3.0), Vec3::new(-0.5, 0.1, -2.0)] {
            assert_eq!(xi_field(&sys, m), Vec3::new(m.y, -m.x, 0.0));
        }
    }

    #[test]
    fn degenerate_ex2_fields() {
        let spec = builtin(DEGENERATE_EX2, &BTreeMap::new()).unwrap();
        let h: ScalarField = "0.5x^2 + 0.5y^2 - y + 0.5 + 0.5z^2".parse().unwrap();
        assert_eq!(spec.hamiltonian, h);
        assert_eq!(spec.entropy, "0.5z^2".parse().unwrap());
        let p = Vec3::new(0.3, -1.2, 0.8);
        let direct = 0.5 * (p.x * p.x + (p.y - 1.0).powi(2) + p.z * p.z);
        assert!((spec.hamiltonian.eval(p) - direct).abs() < 1e-15);
    }

    #[test]
    fn defaults() {
        let rb = builtin(RIGID_BODY, &BTreeMap::new()).unwrap();
        assert_eq!(rb.rigid_body_coefficients(), Some((1.0, 2.0, 3.0)));
        let partial = builtin(RIGID_BODY, &params(&[("b", 1.0)])).unwrap();
        assert_eq!(partial.rigid_body_coefficients(), Some((1.0, 1.0, 3.0)));
        let osc = builtin(OSCILLATOR, &BTreeMap::new()).unwrap();
        assert_eq!(osc.entropy, ScalarField::monomial(0.5, [0, 0, 2]));
        assert_eq!(osc.oscillator_coefficients().unwrap()[2], 0.5);
    }

    #[test]
    fn registry_listing() {
        let list = list_builtins();
        assert_eq!(list.len(), 4);
        assert!(list.iter().any(|i| i.name == RIGID_BODY && i.provenance == "relaxing-rigid-body"));
        assert!(list.iter().any(|i| i.name == DEGENERATE_EX1 && i.provenance == "degenerate-poisson"));
        let names: Vec<_> = list.iter().map(|i| i.name).collect();
        assert_eq!(names, [RIGID_BODY, OSCILLATOR, DEGENERATE_EX1, DEGENERATE_EX2]);
    }

    #[test]
    fn errors() {
        assert!(matches!(builtin("lorenz", &BTreeMap::new()), Err(RegistryError::UnknownSystem(_))));
        assert!(matches!(
            builtin(RIGID_BODY, &params(&[("d", 1.0)])),
            Err(RegistryError::UnknownParameter { .. })
        ));
        assert!(matches!(
            builtin(RIGID_BODY, &params(&[("a", f64::NAN)])),
            Err(RegistryError::InvalidParameter { .. })
        ));
        assert!(matches!(
            builtin(DEGENERATE_EX1, &params(&[("a", 1.0)])),
            Err(RegistryError::UnknownParameter { .. })
        ));
        assert!(matches!(
            builtin(OSCILLATOR, &params(&[("s7", 1.0)])),
            Err(RegistryError::UnknownParameter { .. })
        ));
    }

    #[test]
    fn every_builtin_is_casimir() {
        for info in list_builtins() {
            let sys = default_system(info.name).unwrap();
            assert!(sys.casimir_verified, "{}", info.name);
        }
    }

    #[test]
    fn negative_and_repeated_coefficients_allowed() {
        let spec = builtin(RIGID_BODY, &params(&[("a", -1.0), ("b", -1.0), ("c", 0.0)])).unwrap();
        assert!(spec.into_system().unwrap().casimir_verified);
    }
}
