//! The verification battery: oracle cross-checks, identity residuals,
//! conversions against their defining integrals, and the ratio laws of the
//! leading-term approximants.
//!
//! Every check produces one [`VerifyRecord`] per parameter point. For
//! residual checks `residual` is left minus right and `scale` the largest
//! term; for ratio-law checks `residual` is the deviation `|S/approx − 1|`
//! at the point and `scale` the deviation at the previous sweep point.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::expansions::{leading_large_z, leading_small_t, leading_small_z};
use crate::params::{validate, ShuParams, Tolerances};
use crate::quadrature::{integrate_adaptive, shu_oracle, shu_oracle_cosh, shu_oracle_direct};
use crate::relations::{
    diff_relation1_residual, diff_relation2_residual, gen_incomplete_gamma, incomplete_modified_bessel,
    leaky_aquifer, pde_residual, recurrence1_residual, recurrence2_residual, recurrence_sum_residual,
    shu_from_gen_incomplete_gamma, shu_from_leaky_aquifer, PdeMode, ResidualReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridChoice {
    Default,
    Dense,
}

/// Parameter axes of one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Axes {
    pub orders: Vec<f64>,
    pub zs: Vec<f64>,
    pub ts: Vec<f64>,
}

impl Axes {
    fn points(&self) -> Vec<(f64, f64, f64)> {
        let mut v = Vec::with_capacity(self.orders.len() * self.zs.len() * self.ts.len());
        for &a in &self.orders {
            for &b in &self.zs {
                for &c in &self.ts {
                    v.push((a, b, c));
                }
            }
        }
        v
    }
}

/// Grid for the three-form oracle consistency check.
pub fn oracle_axes(grid: GridChoice) -> Axes {
    match grid {
        GridChoice::Default => Axes {
            orders: vec![-2.0, -0.5, 0.0, 0.5, 1.0, 2.0, 5.0],
            zs: vec![0.5, 1.0, 3.0, 8.0],
            ts: vec![0.2, 1.0, 3.0, 10.0],
        },
        GridChoice::Dense => Axes {
            orders: vec![-3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 3.5, 5.0],
            zs: vec![0.2, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0],
            ts: vec![0.1, 0.2, 0.5, 1.0, 3.0, 10.0, 30.0],
        },
    }
}

/// Grid for the recurrence, differential and PDE residuals.
pub fn identity_axes(grid: GridChoice) -> Axes {
    match grid {
        GridChoice::Default => Axes {
            orders: vec![-0.5, 0.0, 0.5, 1.0, 2.0],
            zs: vec![1.0, 3.0, 8.0],
            ts: vec![0.5, 2.0, 10.0],
        },
        GridChoice::Dense => Axes {
            orders: vec![-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0],
            zs: vec![0.5, 1.0, 2.0, 3.0, 5.0, 8.0],
            ts: vec![0.5, 1.0, 2.0, 5.0, 10.0],
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRecord {
    pub identity: String,
    pub nu: f64,
    pub z: f64,
    pub t: f64,
    pub residual: f64,
    pub scale: f64,
    pub pass: bool,
}

/// Per-check aggregate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub identity: String,
    pub tolerance: f64,
    /// Largest `|residual|/scale` (NaN if any point failed to evaluate).
    pub max_relative_residual: f64,
    pub points: usize,
    pub failures: usize,
}

impl CheckSummary {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub records: Vec<VerifyRecord>,
    pub summaries: Vec<CheckSummary>,
    /// True when `fail_fast` stopped the battery early.
    pub stopped_early: bool,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        !self.stopped_early && self.summaries.iter().all(CheckSummary::passed)
    }
}

/// Returns `(residual, scale)` at `(ν, z, t)`.
type PointCheck = Box<dyn Fn(f64, f64, f64) -> Result<(f64, f64)> + Sync>;

/// One named check over a list of points.
struct Check {
    name: &'static str,
    tolerance: f64,
    points: Vec<(f64, f64, f64)>,
    run: PointCheck,
}

fn tight() -> Tolerances {
    Tolerances::relative(1e-13)
}

fn params(nu: f64, z: f64, t: f64) -> Result<ShuParams> {
    validate(nu, z, t)
}

fn pair(a: f64, b: f64) -> (f64, f64) {
    (a - b, a.abs().max(b.abs()).max(f64::MIN_POSITIVE))
}

fn from_report(r: Result<ResidualReport>) -> Result<(f64, f64)> {
    r.map(|r| (r.residual, r.scale))
}

fn oracle_check(
    name: &'static str,
    axes: &Axes,
    f: fn(&ShuParams, &Tolerances) -> Result<crate::params::Evaluation>,
    g: fn(&ShuParams, &Tolerances) -> Result<crate::params::Evaluation>,
) -> Check {
    Check {
        name,
        tolerance: 1e-9,
        points: axes.points(),
        run: Box::new(move |nu, z, t| {
            let p = params(nu, z, t)?;
            Ok(pair(f(&p, &tight())?.value, g(&p, &tight())?.value))
        }),
    }
}

fn residual_check(
    name: &'static str,
    tolerance: f64,
    axes: &Axes,
    f: impl Fn(&ShuParams) -> Result<ResidualReport> + Sync + 'static,
) -> Check {
    Check {
        name,
        tolerance,
        points: axes.points(),
        run: Box::new(move |nu, z, t| from_report(f(&params(nu, z, t)?))),
    }
}

fn quad_tail(f: impl Fn(f64) -> f64, a: f64) -> Result<f64> {
    Ok(integrate_adaptive(f, a, f64::INFINITY, &tight())?.value)
}

fn conversion_checks(axes_ids: &Axes) -> Vec<Check> {
    let gen_axes = Axes {
        orders: vec![-0.5, 0.5, 1.5],
        zs: vec![0.5, 1.0, 2.0],
        ts: vec![0.5, 1.0, 3.0],
    };
    let leaky_axes = Axes {
        orders: vec![-0.5, 0.0, 1.0],
        zs: vec![0.5, 1.0, 2.0],
        ts: vec![0.5, 1.0, 2.0],
    };
    let imb_axes = Axes {
        orders: vec![0.0, 1.0, 2.0],
        zs: vec![1.0, 3.0, 8.0],
        ts: vec![0.5, 1.0, 2.0],
    };
    vec![
        // Here (nu, z, t) = (a, z_g, t_g).
        Check {
            name: "GenIncGamma-Quad",
            tolerance: 1e-8,
            points: gen_axes.points(),
            run: Box::new(|a, z_g, t_g| {
                let v = gen_incomplete_gamma(a, t_g, z_g, &tight())?;
                let q = quad_tail(|x: f64| ((a - 1.0) * x.ln() - x - z_g / x).exp(), t_g)?;
                Ok(pair(v, q))
            }),
        },
        Check {
            name: "LeakyAquifer-Quad",
            tolerance: 1e-8,
            points: leaky_axes.points(),
            run: Box::new(|a, z_l, t_l| {
                let v = leaky_aquifer(a, z_l, t_l, &tight())?;
                let q = quad_tail(|x: f64| (-z_l * x - t_l / x - (a + 1.0) * x.ln()).exp(), 1.0)?;
                Ok(pair(v, q))
            }),
        },
        Check {
            name: "IncBessel-Quad",
            tolerance: 1e-8,
            points: imb_axes.points(),
            run: Box::new(|a, z, t| {
                let v = incomplete_modified_bessel(a, z, t, &tight())?;
                let q = 0.5 * quad_tail(|x: f64| (-z * x.cosh()).exp() * (a * x).cosh(), t)?;
                Ok(pair(v, q))
            }),
        },
        Check {
            name: "GenIncGamma-Inverse",
            tolerance: 1e-9,
            points: axes_ids.points(),
            run: Box::new(|nu, z, t| {
                let p = params(nu, z, t)?;
                Ok(pair(shu_from_gen_incomplete_gamma(&p, &tight())?, shu_oracle(&p, &tight())?.value))
            }),
        },
        Check {
            name: "LeakyAquifer-Inverse",
            tolerance: 1e-9,
            points: axes_ids.points(),
            run: Box::new(|nu, z, t| {
                let p = params(nu, z, t)?;
                Ok(pair(shu_from_leaky_aquifer(&p, &tight())?, shu_oracle(&p, &tight())?.value))
            }),
        },
    ]
}

fn oracle_value(nu: f64, z: f64, t: f64) -> Result<f64> {
    Ok(shu_oracle(&params(nu, z, t)?, &tight())?.value)
}

/// Ratio-law checks. Each point compares the deviation at `(ν, z, t)`
/// against the one at the previous sweep point.
fn ratio_checks() -> Vec<Check> {
    vec![
        // Halving t: deviation shrinks by a factor in [1.5, 2.5].
        Check {
            name: "Ratio-SmallT",
            tolerance: 0.0,
            points: vec![(2.0, 3.0, 0.05), (2.0, 3.0, 0.025)],
            run: Box::new(|nu, z, t| {
                let dev = |t: f64| -> Result<f64> {
                    let p = params(nu, z, t)?;
                    Ok((oracle_value(nu, z, t)? / leading_small_t(&p).value - 1.0).abs())
                };
                let (now, before) = (dev(t)?, dev(2.0 * t)?);
                let factor = before / now;
                Ok(if (1.5..=2.5).contains(&factor) { (0.0, 1.0) } else { (now, before) })
            }),
        },
        // ν = 0: deviation from −ln z decreases as z shrinks.
        Check {
            name: "Ratio-SmallZ",
            tolerance: 0.0,
            points: vec![(0.0, 1e-4, 3.0)],
            run: Box::new(|nu, z, t| {
                let dev = |z: f64| -> Result<f64> {
                    let p = params(nu, z, t)?;
                    Ok((oracle_value(nu, z, t)? / leading_small_z(&p)?.value - 1.0).abs())
                };
                let (now, before) = (dev(z)?, dev(1e-2)?);
                Ok(if now < before { (0.0, 1.0) } else { (now, before) })
            }),
        },
        // Doubling z: deviation decreases.
        Check {
            name: "Ratio-LargeZ",
            tolerance: 0.0,
            points: vec![(0.0, 24.0, 1.0), (0.0, 48.0, 1.0)],
            run: Box::new(|nu, z, t| {
                let dev = |z: f64| -> Result<f64> {
                    let p = params(nu, z, t)?;
                    Ok((oracle_value(nu, z, t)? / leading_large_z(&p)?.value - 1.0).abs())
                };
                let (now, before) = (dev(z)?, dev(0.5 * z)?);
                Ok(if now < before { (0.0, 1.0) } else { (now, before) })
            }),
        },
    ]
}

fn battery(grid: GridChoice) -> Vec<Check> {
    let oa = oracle_axes(grid);
    let ia = identity_axes(grid);
    let mut checks = vec![
        oracle_check("Oracle2-Oracle5", &oa, shu_oracle_direct, shu_oracle),
        oracle_check("Oracle4-Oracle5", &oa, shu_oracle_cosh, shu_oracle),
        oracle_check("Oracle2-Oracle4", &oa, shu_oracle_direct, shu_oracle_cosh),
        residual_check("Rec1", 1e-6, &ia, recurrence1_residual),
        residual_check("Rec2", 1e-6, &ia, recurrence2_residual),
        residual_check("RecSum", 1e-6, &ia, recurrence_sum_residual),
        residual_check("Diff1-k1", 1e-6, &ia, |p| diff_relation1_residual(p, 1)),
        residual_check("Diff2-k1", 1e-6, &ia, |p| diff_relation2_residual(p, 1)),
        residual_check("Diff1-k2", 1e-4, &ia, |p| diff_relation1_residual(p, 2)),
        residual_check("Diff2-k2", 1e-4, &ia, |p| diff_relation2_residual(p, 2)),
        residual_check("PDE-Exact", 1e-7, &ia, |p| pde_residual(p, PdeMode::Exact)),
        residual_check("PDE-FD", 1e-5, &ia, |p| pde_residual(p, PdeMode::FiniteDifference)),
    ];
    checks.extend(conversion_checks(&ia));
    checks.extend(ratio_checks());
    checks
}

fn run_check(check: &Check) -> (Vec<VerifyRecord>, CheckSummary) {
    let records: Vec<VerifyRecord> = check
        .points
        .par_iter()
        .map(|&(nu, z, t)| match (check.run)(nu, z, t) {
            Ok((residual, scale)) => VerifyRecord {
                identity: check.name.to_string(),
                nu,
                z,
                t,
                residual,
                scale,
                pass: residual.abs() <= check.tolerance * scale,
            },
            Err(_) => VerifyRecord {
                identity: check.name.to_string(),
                nu,
                z,
                t,
                residual: f64::NAN,
                scale: f64::NAN,
                pass: false,
            },
        })
        .collect();
    let max_rel = records
        .iter()
        .map(|r| r.residual.abs() / r.scale)
        .fold(0.0f64, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) });
    let summary = CheckSummary {
        identity: check.name.to_string(),
        tolerance: check.tolerance,
        max_relative_residual: max_rel,
        points: records.len(),
        failures: records.iter().filter(|r| !r.pass).count(),
    };
    (records, summary)
}

/// Runs the battery. With `fail_fast`, stops after the first check that
/// has a failing point.
pub fn run_verify(grid: GridChoice, fail_fast: bool) -> VerifyReport {
    let mut report = VerifyReport {
        records: Vec::new(),
        summaries: Vec::new(),
        stopped_early: false,
    };
    let checks = battery(grid);
    let total = checks.len();
    for (i, check) in checks.iter().enumerate() {
        let (records, summary) = run_check(check);
        let failed = !summary.passed();
        report.records.extend(records);
        report.summaries.push(summary);
        if fail_fast && failed {
            report.stopped_early = i + 1 < total;
            break;
        }
    }
    report
}

/// Number of records a complete run emits.
pub fn expected_record_count(grid: GridChoice) -> usize {
    battery(grid).iter().map(|c| c.points.len()).sum()
}
