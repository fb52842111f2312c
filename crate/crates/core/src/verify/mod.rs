//! Executable checks of the model's algebraic identities and operator bounds.
//!
//! Every check returns [`CheckResult`] records. A record summarises a batch of
//! trials by its worst case: `lhs` and `rhs` are the two sides at the trial
//! with the smallest margin, so `passed` agrees with `lhs ≤ rhs + tolerance`
//! (or `|lhs − rhs| ≤ tolerance` for identities) on the recorded numbers.
//! Constants the theory leaves unspecified are fitted over the scan and
//! reported in `fitted`.

mod algebra;
mod bounds;
mod ground;
mod mourre;

use serde::Serialize;

use crate::fock::FockBasis;
use crate::sparse::SparseOperator;
use crate::Complex64;

pub use algebra::check_algebra;
pub use bounds::{
    check_channel_bound, check_compression, check_cubic_norm, check_reduced_bound, check_relative_bound,
    operator_norm,
};
pub use ground::{
    check_cutoff_convergence, check_number_identity, check_overlap, check_pull_through, cutoff_ground_state,
    check_number_scaling, number_identity, overlap_point, OverlapPoint, PullThroughPoint,
};
pub use mourre::{check_double_commutator_bounded, check_mourre, MourrePoint, MourreScan, FREE_MOURRE_TOL};

/// Absolute tolerance of identity checks.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Relative tolerance of inequality checks.
pub const INEQUALITY_REL_TOL: f64 = 1e-9;
/// Absolute floor added to the relative inequality tolerance.
pub const INEQUALITY_ABS_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Identity,
    Inequality,
}

/// Parameters echoed into every record.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CheckContext {
    pub n_max: usize,
    pub grid_id: String,
    pub g: Option<f64>,
    pub sigma: Option<f64>,
    pub lambda: Option<f64>,
    pub eta: Option<f64>,
    pub seed: Option<u64>,
}

impl CheckContext {
    pub fn for_basis(basis: &FockBasis) -> Self {
        CheckContext { n_max: basis.n_max(), grid_id: basis.table().fingerprint(), ..Default::default() }
    }

    pub fn g(mut self, g: f64) -> Self {
        self.g = Some(g);
        self
    }

    pub fn sigma(mut self, sigma: f64) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn eta(mut self, eta: f64) -> Self {
        self.eta = Some(eta);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub kind: CheckKind,
    pub passed: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs + tolerance − lhs` for inequalities, `tolerance − |lhs − rhs|` for identities.
    pub margin: f64,
    pub tolerance: f64,
    pub trials: usize,
    pub violations: usize,
    /// Constant fitted over the scan, when the check has one.
    pub fitted: Option<f64>,
    pub note: String,
    pub context: CheckContext,
}

/// Worst-case accumulator behind every [`CheckResult`].
#[derive(Clone, Debug)]
pub(crate) struct Tally {
    kind: CheckKind,
    /// Fixed absolute tolerance; `None` means relative inequality tolerance.
    fixed_tol: Option<f64>,
    worst: Option<(f64, f64, f64, f64)>,
    trials: usize,
    violations: usize,
}

impl Tally {
    pub(crate) fn identity(tol: f64) -> Self {
        Tally { kind: CheckKind::Identity, fixed_tol: Some(tol), worst: None, trials: 0, violations: 0 }
    }

    pub(crate) fn inequality() -> Self {
        Tally { kind: CheckKind::Inequality, fixed_tol: None, worst: None, trials: 0, violations: 0 }
    }

    /// Inequality with a fixed absolute slack instead of the relative one.
    pub(crate) fn inequality_abs(tol: f64) -> Self {
        Tally { kind: CheckKind::Inequality, fixed_tol: Some(tol), worst: None, trials: 0, violations: 0 }
    }

    pub(crate) fn inequality_tol(lhs: f64, rhs: f64) -> f64 {
        INEQUALITY_REL_TOL * lhs.abs().max(rhs.abs()).min(f64::MAX) + INEQUALITY_ABS_TOL
    }

    /// Records one trial; NaN on either side counts as a violation.
    pub(crate) fn push(&mut self, lhs: f64, rhs: f64) -> bool {
        let (tol, margin) = match (self.kind, self.fixed_tol) {
            (CheckKind::Identity, Some(tol)) => (tol, tol - (lhs - rhs).abs()),
            (CheckKind::Identity, None) => unreachable!("identity tallies carry a tolerance"),
            (CheckKind::Inequality, fixed) => {
                let tol = if rhs == f64::INFINITY { 0.0 } else { fixed.unwrap_or_else(|| Self::inequality_tol(lhs, rhs)) };
                (tol, rhs + tol - lhs)
            }
        };
        debug_assert!(margin.is_nan() || margin == margin_of(self.kind, lhs, rhs, tol));
        let ok = margin >= 0.0 && !margin.is_nan();
        self.trials += 1;
        if !ok {
            self.violations += 1;
        }
        let key = severity(self.kind, lhs, rhs);
        let replace = match self.worst {
            None => true,
            Some((_, _, _, k)) => key.is_nan() || (!k.is_nan() && key > k),
        };
        if replace {
            self.worst = Some((lhs, rhs, tol, key));
        }
        ok
    }

    pub(crate) fn trials(&self) -> usize {
        self.trials
    }

    pub(crate) fn finish(self, name: &str, context: CheckContext) -> CheckResult {
        let (lhs, rhs, tolerance, margin) = match self.worst {
            Some((lhs, rhs, tol, _)) => (lhs, rhs, tol, margin_of(self.kind, lhs, rhs, tol)),
            None => (0.0, 0.0, self.fixed_tol.unwrap_or(0.0), f64::INFINITY),
        };
        CheckResult {
            name: name.to_string(),
            kind: self.kind,
            passed: self.violations == 0,
            lhs,
            rhs,
            margin,
            tolerance,
            trials: self.trials,
            violations: self.violations,
            fitted: None,
            note: String::new(),
            context,
        }
    }
}

fn margin_of(kind: CheckKind, lhs: f64, rhs: f64, tol: f64) -> f64 {
    match kind {
        CheckKind::Identity => tol - (lhs - rhs).abs(),
        CheckKind::Inequality => rhs + tol - lhs,
    }
}

/// Scale-free badness used to pick the recorded trial: the excess of `lhs`
/// over `rhs` relative to their size.
fn severity(kind: CheckKind, lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        return -1.0;
    }
    match kind {
        CheckKind::Identity => (lhs - rhs).abs() / scale,
        CheckKind::Inequality if rhs == f64::INFINITY => -1.0,
        CheckKind::Inequality => (lhs - rhs) / scale,
    }
}

impl CheckResult {
    pub(crate) fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub(crate) fn with_fitted(mut self, c: f64) -> Self {
        self.fitted = Some(c);
        self
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let rel = match self.kind {
            CheckKind::Identity => "~",
            CheckKind::Inequality => "<=",
        };
        let mut s = format!(
            "{status} {} lhs={:.6e} {rel} rhs={:.6e} margin={:.3e} trials={} violations={}",
            self.name, self.lhs, self.rhs, self.margin, self.trials, self.violations
        );
        if let Some(eta) = self.context.eta {
            s.push_str(&format!(" eta={eta}"));
        }
        if let Some(c) = self.fitted {
            s.push_str(&format!(" fitted={c:.6e}"));
        }
        if !self.note.is_empty() {
            s.push_str(" | ");
            s.push_str(&self.note);
        }
        s
    }
}

/// `‖D^{1/2} ψ‖` for a diagonal `D` given by its entries.
pub(crate) fn diag_half_norm(d: &[f64], psi: &[Complex64]) -> f64 {
    d.iter().zip(psi).map(|(x, z)| x * z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖D ψ‖` for a diagonal `D`.
pub(crate) fn diag_norm(d: &[f64], psi: &[Complex64]) -> f64 {
    d.iter().zip(psi).map(|(x, z)| x * x * z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn real_diagonal(op: &SparseOperator) -> Vec<f64> {
    op.diagonal().iter().map(|z| z.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_keeps_worst_and_counts_nan() {
        let mut t = Tally::inequality();
        assert!(t.push(1.0, 2.0));
        assert!(!t.push(3.0, 2.0));
        assert!(!t.push(f64::NAN, 1.0));
        let r = t.finish("x", CheckContext::default());
        assert!(!r.passed);
        assert_eq!(r.violations, 2);
        assert!(r.lhs.is_nan());
    }

    #[test]
    fn identity_margin() {
        let mut t = Tally::identity(1e-12);
        t.push(1.0, 1.0 + 1e-13);
        let r = t.finish("y", CheckContext::default());
        assert!(r.passed && r.margin > 0.0);
    }
}
