//! Size, mass and multi-scale decompositions of bitile collections.
//!
//! Every decomposition comes with an `audit_*` function that re-derives its
//! postconditions from the output alone.

mod bmo;
mod expbound;
mod fefferman;
mod forest;
mod lie;
mod mass;
mod size;

use serde::{Deserialize, Serialize};

pub use bmo::{
    bmo_norm, john_nirenberg_violations, packing_ratio, JohnNirenbergViolation, C_JN,
};
pub use expbound::{cmp_exp_neg, exp_neg_bracket, le_exp_neg};
pub use fefferman::{audit_fefferman, fefferman_layers, fefferman_trick, FeffermanLayer, FeffermanOutcome, C_FEFF};
pub use forest::{forestify, saturation, Forest};
pub use lie::{audit_lie, forest_projection, lie_decomposition, lie_decomposition_relaxed, lie_decomposition_with, LieLevel, LieStructure};
pub use mass::{audit_mass_decomposition, mass_decomposition, mass_of, mass_split, MassDecomposition, MassLevel, MassSplit};
pub use size::{
    audit_size_bounds, audit_size_decomposition, bitile_size_sq, size_decomposition, size_of, size_split, SizeDecomposition, SizeLevel,
    SizeSplit,
};

/// Outcome of one named postcondition over all its instances.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Number of instances examined.
    pub instances: u64,
    /// First failing instance, if any.
    pub detail: String,
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct Audit {
    pub checks: Vec<Check>,
}

impl Audit {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record one instance of `name`; only the first failure keeps its detail.
    pub fn require(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        let idx = match self.checks.iter().position(|c| c.name == name) {
            Some(i) => i,
            None => {
                self.checks.push(Check {
                    name: name.to_string(),
                    passed: true,
                    instances: 0,
                    detail: String::new(),
                });
                self.checks.len() - 1
            }
        };
        let c = &mut self.checks[idx];
        c.instances += 1;
        if !ok && c.passed {
            c.passed = false;
            c.detail = detail();
        }
    }

    pub fn merge(&mut self, other: Audit) {
        for c in other.checks {
            match self.checks.iter_mut().find(|d| d.name == c.name) {
                Some(d) => {
                    d.instances += c.instances;
                    if d.passed && !c.passed {
                        d.passed = false;
                        d.detail = c.detail;
                    }
                }
                None => self.checks.push(c),
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn audit_keeps_first_failure() {
        let mut a = Audit::new();
        a.require("x", true, || "no".into());
        a.require("x", false, || "first".into());
        a.require("x", false, || "second".into());
        a.require("y", true, String::new);
        assert!(!a.passed());
        let x = a.get("x").unwrap();
        assert_eq!((x.instances, x.detail.as_str()), (3, "first"));
        let mut b = Audit::new();
        b.require("y", false, || "late".into());
        a.merge(b);
        assert_eq!(a.failures().count(), 2);
        assert_eq!(a.get("y").unwrap().instances, 2);
    }
}
