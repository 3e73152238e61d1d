//! Batch gap reports: solver value against LP bound and exact optimum.

use std::time::Instant;

use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::atspp::{solve_atspp, solve_k_person};
use crate::check::CheckLog;
use crate::error::{Error, Result};
use crate::latency::solve_latency_with_lp;
use crate::lp::{solve_latency_lp, solve_lp_alpha};
use crate::metric::{gen_random, MetricInstance};
use crate::oracle::{
    exact_atspp, exact_k_person, exact_latency, ATSPP_CAP, K_PERSON_CAP, LATENCY_CAP,
};
use crate::par;
use crate::rational::{self, int, ratio, Rational};

pub const CSV_HEADER: [&str; 11] = [
    "id",
    "n",
    "seed",
    "algorithm",
    "value",
    "lp_bound",
    "opt",
    "ratio_lp",
    "ratio_opt",
    "checks_passed",
    "ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Problem {
    Atspp,
    Latency,
    KPerson(usize),
}

impl Problem {
    pub fn name(&self) -> String {
        match self {
            Problem::Atspp => "atspp".into(),
            Problem::Latency => "latency".into(),
            Problem::KPerson(k) => format!("kperson{k}"),
        }
    }

    /// Parses `atspp`, `latency` or `kperson<k>`.
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "atspp" => Ok(Problem::Atspp),
            "latency" => Ok(Problem::Latency),
            _ => text
                .strip_prefix("kperson")
                .and_then(|k| k.parse().ok())
                .filter(|&k: &usize| k >= 1)
                .map(Problem::KPerson)
                .ok_or_else(|| Error::Argument(format!("unknown problem {text:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GapConfig {
    pub count: usize,
    pub nmin: usize,
    pub nmax: usize,
    pub seed: u64,
    pub max_weight: u64,
    pub problems: Vec<Problem>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapRow {
    pub id: usize,
    pub n: usize,
    pub seed: u64,
    pub algorithm: String,
    #[serde(with = "rational::serde_rational_opt")]
    pub value: Option<Rational>,
    #[serde(with = "rational::serde_rational_opt")]
    pub lp_bound: Option<Rational>,
    #[serde(with = "rational::serde_rational_opt")]
    pub opt: Option<Rational>,
    pub checks_passed: usize,
    pub checks_total: usize,
    /// Error that stopped the run, if any.
    pub failure: Option<String>,
    /// Whether `failure` is a violated invariant.
    pub assertion: bool,
    pub ms: u128,
}

fn ratio_text(num: &Option<Rational>, den: &Option<Rational>) -> String {
    match (num, den) {
        (Some(a), Some(b)) if !b.is_zero() => {
            format!("{:.6}", (a / b).to_f64().unwrap_or(f64::NAN))
        }
        _ => String::new(),
    }
}

impl GapRow {
    pub fn ratio_lp(&self) -> Option<Rational> {
        match (&self.value, &self.lp_bound) {
            (Some(a), Some(b)) if !b.is_zero() => Some(a / b),
            _ => None,
        }
    }

    pub fn ratio_opt(&self) -> Option<Rational> {
        match (&self.value, &self.opt) {
            (Some(a), Some(b)) if !b.is_zero() => Some(a / b),
            _ => None,
        }
    }

    /// CSV fields in [`CSV_HEADER`] order. Exact values are `p/q`, ratios
    /// are decimals, `ms` is left blank unless `timing` is set so that
    /// reruns are byte-identical.
    pub fn csv_fields(&self, timing: bool) -> Vec<String> {
        let opt = |q: &Option<Rational>| q.as_ref().map(rational::format).unwrap_or_default();
        let checks = match &self.failure {
            None => format!("{}/{}", self.checks_passed, self.checks_total),
            Some(f) => format!("failed: {f}"),
        };
        vec![
            self.id.to_string(),
            self.n.to_string(),
            self.seed.to_string(),
            self.algorithm.clone(),
            opt(&self.value),
            opt(&self.lp_bound),
            opt(&self.opt),
            ratio_text(&self.value, &self.lp_bound),
            ratio_text(&self.value, &self.opt),
            checks,
            if timing {
                self.ms.to_string()
            } else {
                String::new()
            },
        ]
    }
}

/// The report's instances as `(id, n, seed, instance)`.
pub fn gap_instances(cfg: &GapConfig) -> Result<Vec<(usize, usize, u64, MetricInstance)>> {
    if cfg.nmin < 2 || cfg.nmin > cfg.nmax {
        return Err(Error::Argument(format!(
            "need 2 ≤ nmin ≤ nmax, got {}..{}",
            cfg.nmin, cfg.nmax
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.count)
        .map(|id| {
            let n = rng.random_range(cfg.nmin..=cfg.nmax);
            let seed: u64 = rng.random_range(0..1_000_000);
            Ok((id, n, seed, gen_random(n, seed, cfg.max_weight)?))
        })
        .collect()
}

struct Outcome {
    value: Rational,
    lp: Rational,
    checks: CheckLog,
}

fn run_one(inst: &MetricInstance, problem: Problem) -> Result<Outcome> {
    match problem {
        Problem::Atspp => {
            let run = solve_atspp(inst, None)?;
            let (lp, _) = solve_lp_alpha(inst, &int(1))?;
            Ok(Outcome {
                value: run.path.cost,
                lp,
                checks: run.checks,
            })
        }
        Problem::Latency => {
            let sol = solve_latency_lp(inst)?;
            let run = solve_latency_with_lp(inst, &sol)?;
            Ok(Outcome {
                value: run.order.total,
                lp: sol.objective,
                checks: run.checks,
            })
        }
        Problem::KPerson(k) => {
            let run = solve_k_person(inst, k, None)?;
            let (lp, _) = solve_lp_alpha(inst, &ratio(1, k as i64))?;
            Ok(Outcome {
                value: run.cost,
                lp: lp * int(k as i64),
                checks: run.checks,
            })
        }
    }
}

fn oracle(inst: &MetricInstance, problem: Problem) -> Option<Rational> {
    let r = match problem {
        Problem::Atspp if inst.n <= ATSPP_CAP => exact_atspp(inst),
        Problem::Latency if inst.n <= LATENCY_CAP => exact_latency(inst),
        Problem::KPerson(k) if inst.n <= K_PERSON_CAP => exact_k_person(inst, k),
        _ => return None,
    };
    r.ok().map(|e| e.value)
}

/// Solves every instance for every problem. Rows come out ordered by
/// instance id, then by problem, whatever order the workers finish in.
pub fn gap_report(cfg: &GapConfig) -> Result<Vec<GapRow>> {
    let jobs: Vec<(usize, usize, u64, MetricInstance, Problem)> = gap_instances(cfg)?
        .into_iter()
        .flat_map(|(id, n, seed, inst)| {
            cfg.problems
                .iter()
                .map(move |&p| (id, n, seed, inst.clone(), p))
        })
        .collect();
    Ok(par::map(&jobs, |(id, n, seed, inst, problem)| {
        let start = Instant::now();
        let outcome = run_one(inst, *problem);
        let opt = oracle(inst, *problem);
        let ms = start.elapsed().as_millis();
        let mut row = GapRow {
            id: *id,
            n: *n,
            seed: *seed,
            algorithm: problem.name(),
            value: None,
            lp_bound: None,
            opt,
            checks_passed: 0,
            checks_total: 0,
            failure: None,
            assertion: false,
            ms,
        };
        match outcome {
            Ok(o) => {
                row.value = Some(o.value);
                row.lp_bound = Some(o.lp);
                row.checks_passed = o.checks.passed();
                row.checks_total = o.checks.passed() + o.checks.failed();
            }
            Err(e) => {
                row.assertion = e.is_assertion();
                row.failure = Some(e.to_string());
            }
        }
        row
    }))
}
