//! Small hand-specified multi-environment models with known answers.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::hidden_iv::{hidden_iv_scenario, HiddenIvParams};
use super::{sample_environments, Draw, SemSpec};
use crate::data::Dataset;
use crate::error::{IcpError, Result};

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// The two-environment example with nodes `X2, X3, Y, X4` (indices 0..4):
///
/// ```text
/// X2 = 0.3 ε2
/// X3 = X2 + 0.2 ε3          (environment 2: X3 = 0.4 ε3)
/// Y  = −0.7 X2 + 0.6 X3 + 0.1 εY
/// X4 = −0.5 Y + 0.5 X3 + 0.1 ε4
/// ```
pub fn appendix_a_specs() -> (SemSpec, SemSpec) {
    let nm = names(&["X2", "X3", "Y", "X4"]);
    let obs = SemSpec::from_edges(
        nm.clone(),
        &[(0, 1, 1.0), (0, 2, -0.7), (1, 2, 0.6), (2, 3, -0.5), (1, 3, 0.5)],
        vec![0.3, 0.2, 0.1, 0.1],
        2,
    )
    .expect("valid model");
    let mut int = obs.clone();
    int.beta[1][0] = 0.0;
    int.sigma[1] = 0.4;
    (obs, int)
}

/// Upper bound `b` of `A ~ Uniform[0.5, b]` with `E[A²] = 1`: the root of
/// `b³ − 3b + 1.375 = 0` above 1.
pub fn remark_ii_multiplier() -> Draw {
    let lo: f64 = 0.5;
    let mut b: f64 = 1.5;
    for _ in 0..60 {
        let f = b * b * b - 3.0 * b + 3.0 * lo - lo * lo * lo;
        let df = 3.0 * b * b - 3.0;
        b -= f / df;
    }
    Draw::Uniform { lo, hi: b }
}

/// Named constructions exported by the command line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    /// Two environments; `Y`'s parents are `X2, X3`.
    AppendixA,
    /// Observational data plus `do(X2 = 0)` and `do(X3 = 0)`, where even the
    /// empty set is invariant.
    RemarkI,
    /// Noise intervention on the only parent with `E[A²] = 1`, where the
    /// empty set passes a mean/variance test.
    RemarkII,
    /// Hidden confounding with a variance shift of the predictors in the
    /// second environment.
    Prop5,
}

impl Fixture {
    pub const ALL: [Fixture; 4] = [Fixture::AppendixA, Fixture::RemarkI, Fixture::RemarkII, Fixture::Prop5];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::AppendixA => "appendix_a",
            Fixture::RemarkI => "remark_i",
            Fixture::RemarkII => "remark_ii",
            Fixture::Prop5 => "prop5",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Fixture::ALL.into_iter().find(|f| f.name() == name).ok_or_else(|| IcpError::UnknownFixture(name.to_string()))
    }

    /// Draws the dataset with `n` rows per environment.
    pub fn generate<R: Rng + ?Sized>(self, n: usize, rng: &mut R) -> Result<Dataset> {
        match self {
            Fixture::AppendixA => {
                let (obs, int) = appendix_a_specs();
                sample_environments(&[(&obs, n), (&int, n)], rng)
            }
            Fixture::RemarkI => {
                let obs = SemSpec::from_edges(
                    names(&["X2", "X3", "Y"]),
                    &[(0, 1, -1.0), (0, 2, 1.0), (1, 2, 1.0)],
                    vec![1.0, 1.0, 1.0],
                    2,
                )?;
                let do2 = obs.do_intervention(&[(0, 0.0)], false)?;
                let do3 = obs.do_intervention(&[(1, 0.0)], false)?;
                sample_environments(&[(&obs, n), (&do2, n), (&do3, n)], rng)
            }
            Fixture::RemarkII => {
                let obs = SemSpec::from_edges(names(&["X", "Y"]), &[(0, 1, 1.0)], vec![1.0, 1.0], 1)?;
                let int = obs.noise_intervention(&[(0, remark_ii_multiplier())], &[], false)?;
                sample_environments(&[(&obs, n), (&int, n)], rng)
            }
            Fixture::Prop5 => {
                let params = HiddenIvParams { n_per_env: n, ..HiddenIvParams::default() };
                Ok(hidden_iv_scenario(&params, rng)?.dataset)
            }
        }
    }

    /// Ground-truth causal predictors (predictor indices) when they do not
    /// depend on the random draw.
    pub fn true_parents(self) -> Option<Vec<usize>> {
        match self {
            Fixture::AppendixA => Some(vec![0, 1]),
            Fixture::RemarkI => Some(vec![0, 1]),
            Fixture::RemarkII => Some(vec![0]),
            Fixture::Prop5 => None,
        }
    }
}
