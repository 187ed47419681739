//! Data behind the six standard plots of `S_n`: two families of curves
//! and four overlays of the function against a leading-term approximant.

use serde::Serialize;

use crate::error::{Field, Result, ShuError};
use crate::evaluator::evaluate_grid;
use crate::expansions::{leading_large_z, leading_small_t, leading_small_z};
use crate::gamma::macdonald_k;
use crate::params::{validate, Tolerances};

/// Which variable a figure sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sweep {
    /// Endpoint `t`, argument fixed.
    Endpoint,
    /// Argument `x` (= `z`), endpoint fixed.
    Argument,
}

impl Sweep {
    pub fn column(self) -> &'static str {
        match self {
            Sweep::Endpoint => "t",
            Sweep::Argument => "x",
        }
    }
}

/// Leading-term approximant overlaid on a figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Overlay {
    None,
    SmallT,
    SmallZ,
    LargeT,
    LargeZ,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureSpec {
    pub id: u8,
    pub sweep: Sweep,
    /// Inclusive sweep range, log-spaced.
    pub range: (f64, f64),
    /// The non-swept variable.
    pub fixed: f64,
    pub orders: Vec<f64>,
    pub points: usize,
    pub overlay: Overlay,
}

pub const DEFAULT_POINTS: usize = 60;
pub const DEFAULT_ORDERS: [f64; 4] = [0.0, 1.0, 2.0, 3.0];

impl FigureSpec {
    /// Default sweep for figure `id` in `1..=6`.
    pub fn standard(id: u8) -> Result<Self> {
        let (sweep, range, fixed, overlay) = match id {
            1 => (Sweep::Endpoint, (0.05, 20.0), 3.0, Overlay::None),
            2 => (Sweep::Argument, (0.5, 12.0), 3.0, Overlay::None),
            3 => (Sweep::Endpoint, (0.01, 0.5), 3.0, Overlay::SmallT),
            4 => (Sweep::Argument, (0.01, 1.0), 3.0, Overlay::SmallZ),
            5 => (Sweep::Endpoint, (5.0, 60.0), 3.0, Overlay::LargeT),
            6 => (Sweep::Argument, (6.0, 40.0), 3.0, Overlay::LargeZ),
            _ => return Err(ShuError::domain(Field::FigureId, f64::from(id), "must be 1 to 6")),
        };
        Ok(FigureSpec {
            id,
            sweep,
            range,
            fixed,
            orders: DEFAULT_ORDERS.to_vec(),
            points: DEFAULT_POINTS,
            overlay,
        })
    }

    pub fn with_points(mut self, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(ShuError::domain(Field::Points, points as f64, "need at least 2"));
        }
        self.points = points;
        Ok(self)
    }

    pub fn with_orders(mut self, orders: Vec<f64>) -> Result<Self> {
        if orders.is_empty() {
            return Err(ShuError::domain(Field::Order, f64::NAN, "order list is empty"));
        }
        if let Some(&bad) = orders.iter().find(|o| !o.is_finite()) {
            return Err(ShuError::domain(Field::Order, bad, "must be finite"));
        }
        self.orders = orders;
        Ok(self)
    }

    /// Log-spaced sweep values with exact endpoints.
    pub fn sweep_values(&self) -> Vec<f64> {
        let (lo, hi) = self.range;
        let n = self.points;
        let (a, b) = (lo.ln(), hi.ln());
        (0..n)
            .map(|i| match i {
                0 => lo,
                _ if i + 1 == n => hi,
                _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
            })
            .collect()
    }

    fn label(order: f64) -> String {
        if order.fract() == 0.0 {
            format!("{}", order as i64)
        } else {
            format!("{order}")
        }
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec![self.sweep.column().to_string()];
        for &n in &self.orders {
            h.push(format!("S_n{}", Self::label(n)));
            if self.overlay != Overlay::None {
                h.push(format!("approx_n{}", Self::label(n)));
            }
        }
        h
    }
}

/// Table of figure values; `None` marks a cell outside an approximant's
/// domain or a failed evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

/// Full-precision decimal that parses back to the same double.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

impl FigureData {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.map(format_value).unwrap_or_default())
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Column by header name.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Tolerance used for figure data.
pub fn figure_tolerance() -> Tolerances {
    Tolerances::relative(1e-12)
}

fn approximant(overlay: Overlay, nu: f64, z: f64, t: f64) -> Option<f64> {
    let p = validate(nu, z, t).ok()?;
    match overlay {
        Overlay::None => None,
        Overlay::SmallT => Some(leading_small_t(&p).value),
        Overlay::SmallZ => leading_small_z(&p).ok().map(|a| a.value),
        Overlay::LargeT => macdonald_k(nu, z).ok(),
        Overlay::LargeZ => leading_large_z(&p).ok().map(|a| a.value),
    }
}

pub fn generate(spec: &FigureSpec) -> FigureData {
    let sweep = spec.sweep_values();
    let fixed = [spec.fixed];
    let tol = figure_tolerance();
    let (zs, ts): (&[f64], &[f64]) = match spec.sweep {
        Sweep::Endpoint => (&fixed, &sweep),
        Sweep::Argument => (&sweep, &fixed),
    };
    // Row-major over (order, z, t): the sweep index varies fastest.
    let cells = evaluate_grid(&spec.orders, zs, ts, &tol);
    let n = sweep.len();
    let rows = (0..n)
        .map(|i| {
            let mut row = vec![Some(sweep[i])];
            for (j, &nu) in spec.orders.iter().enumerate() {
                let cell = &cells[j * n + i];
                row.push(cell.result.as_ref().ok().map(|e| e.value));
                if spec.overlay != Overlay::None {
                    row.push(approximant(spec.overlay, nu, cell.argument, cell.endpoint));
                }
            }
            row
        })
        .collect();
    FigureData {
        header: spec.header(),
        rows,
    }
}
