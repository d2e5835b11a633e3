use std::f64::consts::PI;

use gkz_core::expansion::{
    closed_form_table, coefficients_by_quadrature, coefficients_on_cp, decomposition_matrix, gevrey_order_estimate,
    mu_recovery, CoefficientTable, DecompositionMatrix,
};
use gkz_core::gamma_series::{phi_series, psi_series};
use gkz_core::regularized::j_beta_table;
use gkz_core::restriction::{build_tilde_cycle, split_matrix, varpi_apply, varpi_structure, VarpiReport};
use gkz_core::scalar::as_integer_c64;
use gkz_core::series::SeriesDoc;
use gkz_core::verify::{self, Check, CriterionReport};
use gkz_core::{contour, Cycle, Error, Exec, OneRowMatrix, SectorPoint};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::args::Cli;

pub enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Core(e) if e.is_analytic() => 3,
            _ => 2,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Usage(msg.into()))
}

impl Cli {
    fn matrix(&self) -> Outcome<OneRowMatrix> {
        match &self.a {
            Some(a) => Ok(OneRowMatrix::new(a.clone())?),
            None => usage("--A is required"),
        }
    }

    fn beta(&self) -> Outcome<Complex64> {
        self.beta.ok_or_else(|| Failure::Usage("--beta is required".into()))
    }

    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }

    fn pair(&self) -> Outcome<(i64, i64)> {
        let m = self.matrix()?;
        match m.entries() {
            &[a, b] => Ok((a, b)),
            _ => usage("this command needs a two-entry matrix --A a,b"),
        }
    }

    /// The head value x_1, defaulting to 1 at argument π.
    fn x_head(&self, count: usize) -> Outcome<Vec<SectorPoint>> {
        if self.x.is_empty() && count == 1 {
            return Ok(vec![SectorPoint { modulus: 1.0, arg: PI }]);
        }
        if self.x.len() != count {
            return usage(format!("expected {count} --x values, got {}", self.x.len()));
        }
        Ok(self.x.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralDoc {
    pub v: String,
    pub matrix: Vec<i64>,
    pub beta: Complex64,
    pub x: Vec<SectorPoint>,
    pub cycle: Cycle,
    pub value: Complex64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeDoc {
    pub v: String,
    #[serde(flatten)]
    pub matrix: DecompositionMatrix,
    pub relative_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictDoc {
    pub v: String,
    pub report: VarpiReport,
    /// The k components of ϖ(φ^{(j)}) when `--j` is given.
    pub components: Option<Vec<SeriesDoc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyDoc {
    pub v: String,
    pub passed: bool,
    pub reports: Vec<CriterionReport>,
}

pub fn series(cli: &Cli) -> Outcome<SeriesDoc> {
    let m = cli.matrix()?;
    let beta = cli.beta()?;
    let j = cli.j.ok_or_else(|| Failure::Usage("--j is required".into()))?;
    let n = cli.n.unwrap_or(10);
    let s = match m.entries() {
        &[a, b] => psi_series(a, b, &beta, j, n)?,
        _ => phi_series(&m, &beta, j, n)?,
    };
    Ok(s.to_doc())
}

pub fn integral(cli: &Cli) -> Outcome<IntegralDoc> {
    let m = cli.matrix()?;
    let beta = cli.beta()?;
    if cli.x.len() != m.n() {
        return usage(format!("expected {} --x values, got {}", m.n(), cli.x.len()));
    }
    let cycle = match cli.r {
        Some(r) => {
            let (k, _, b) = split_matrix(&m)?;
            if cli.k.is_some_and(|kk| kk != k) {
                return usage(format!("--k does not match the matrix, which has k = {k}"));
            }
            let gamma = Cycle::cp(cli.p.unwrap_or(1), b, cli.eps)?.rotate(cli.theta.unwrap_or(0.0));
            build_tilde_cycle(&gamma, k, beta, r)?
        }
        None => Cycle::cp(cli.p.unwrap_or(m.last()), m.last(), cli.eps)?.rotate(cli.theta.unwrap_or(0.0)),
    };
    let q = contour::integrate(&m, beta, &cli.x, &cycle, cli.tol)?;
    Ok(IntegralDoc {
        v: "v1".into(),
        matrix: m.entries().to_vec(),
        beta,
        x: cli.x.clone(),
        cycle,
        value: q.value,
        error_estimate: q.error,
    })
}

pub fn expansion(cli: &Cli) -> Outcome<CoefficientTable> {
    let m = cli.matrix()?;
    let beta = cli.beta()?;
    let n = cli.n.unwrap_or(20);
    let exec = cli.exec();
    if m.n() != 2 {
        let x_head = cli.x_head(m.n() - 1)?;
        let cycle = Cycle::cp(cli.p.unwrap_or(1), m.last(), cli.eps)?.rotate(cli.theta.unwrap_or(0.0));
        return Ok(coefficients_by_quadrature(&m, beta, &x_head, &cycle, n, cli.tol, exec)?);
    }
    let (a, b) = cli.pair()?;
    let x1 = cli.x_head(1)?[0];
    let mut table = match as_integer_c64(beta) {
        Some(bi) if !m.in_semigroup(bi) => j_beta_table(a, b, bi, x1, 0..n + 1, cli.tol, exec)?,
        _ => {
            let p = cli.p.unwrap_or(1);
            let quad = coefficients_on_cp(a, b, beta, p, x1, n, cli.tol, exec)?;
            match closed_form_table(a, b, beta, p, x1, 0..n + 1, exec) {
                Ok(closed) => quad.merge(closed),
                // Poles of the closed forms (β ∈ ℕA) leave the quadrature column alone.
                Err(Error::SinPole | Error::GammaPole(_)) => quad,
                Err(e) => return Err(e.into()),
            }
        }
    };
    table.diagnostics.gevrey_s = gevrey_order_estimate(&table).ok();
    table.diagnostics.max_discrepancy = table.discrepancies.iter().map(|d| d.relative).reduce(f64::max);
    Ok(table)
}

pub fn decompose(cli: &Cli) -> Outcome<DecomposeDoc> {
    let (a, b) = cli.pair()?;
    let ells: Vec<i64> = (1..=a).collect();
    let matrix = decomposition_matrix(a, b, cli.beta()?, &ells)?;
    let relative_difference = matrix.relative_difference();
    Ok(DecomposeDoc { v: "v1".into(), matrix, relative_difference })
}

pub fn restrict(cli: &Cli) -> Outcome<RestrictDoc> {
    let m = cli.matrix()?;
    let beta = cli.beta()?;
    let (k, _, _) = split_matrix(&m)?;
    let order = cli.n.unwrap_or(20);
    let report = varpi_structure(&m, &beta, order)?;
    let components = match cli.j {
        Some(j) => Some(varpi_apply(&phi_series(&m, &beta, j, order)?, k)?.iter().map(|s| s.to_doc()).collect()),
        None => None,
    };
    Ok(RestrictDoc { v: "v1".into(), report, components })
}

/// μ-recovery for the parameters on the command line instead of the fixed
/// acceptance set.
fn mu_recovery_for(cli: &Cli) -> Outcome<CriterionReport> {
    let (a, b) = cli.pair()?;
    let beta = cli.beta()?;
    let p = cli.p.unwrap_or(1);
    let x1 = cli.x_head(1)?[0];
    let mr = mu_recovery(a, b, beta, p, x1, cli.n.unwrap_or(14), cli.tol.min(1e-13))?;
    Ok(CriterionReport {
        id: 5,
        suite: "mu-recovery".into(),
        checks: vec![Check::at_most(format!("({a},{b}) beta={beta} p={p} relative error"), mr.max_relative_error, 1e-6)],
        error: None,
        seconds: 0.0,
        time_limit: 60.0,
    })
}

pub fn run_verify(cli: &Cli, suite: &str) -> Outcome<VerifyDoc> {
    let exec = cli.exec();
    let mut reports = match suite {
        "all" => verify::run_all(exec),
        "mu-recovery" if cli.a.is_some() => vec![mu_recovery_for(cli)?],
        s if verify::SUITES.contains(&s) => vec![verify::run_suite(s, exec)?],
        s => return usage(format!("unknown suite {s:?}; expected one of {} or all", verify::SUITES.join(", "))),
    };
    for r in &mut reports {
        eprintln!("{}", r.summary());
        // Timings go to stderr only, so the document is reproducible.
        r.seconds = 0.0;
    }
    Ok(VerifyDoc { v: "v1".into(), passed: reports.iter().all(CriterionReport::passed), reports })
}
