//! Temperature sweeps of both complexities, with CSV and JSON output.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::classical::{one_step_fidelity, statistical_complexity};
use crate::error::{Error, Result};
use crate::ising::{transition_matrix, IsingParams};
use crate::quantum::{build_quantum_model, log_grid, quantum_statistical_complexity};

pub const CSV_HEADER: [&str; 13] = [
    "T", "J", "B", "p0", "p1", "T00", "T01", "T10", "T11", "fidelity", "C_mu_bits", "C_q_bits",
    "ratio",
];

/// Ratio column is left blank below this `C_q`.
pub const RATIO_CQ_FLOOR: f64 = 1e-12;

/// Allowed excess of `C_q` over `C_mu` before a row is rejected.
pub const ROW_INVARIANT_TOL: f64 = 1e-10;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub p0: f64,
    pub p1: f64,
    #[serde(rename = "T00")]
    pub t00: f64,
    #[serde(rename = "T01")]
    pub t01: f64,
    #[serde(rename = "T10")]
    pub t10: f64,
    #[serde(rename = "T11")]
    pub t11: f64,
    pub fidelity: f64,
    #[serde(rename = "C_mu_bits")]
    pub c_mu: f64,
    #[serde(rename = "C_q_bits")]
    pub c_q: f64,
    pub ratio: Option<f64>,
}

impl SweepRow {
    pub fn compute(params: &IsingParams) -> Self {
        let tm = transition_matrix(params);
        let model = build_quantum_model(&tm);
        let c_mu = statistical_complexity(&tm);
        let c_q = quantum_statistical_complexity(&model);
        let [p0, p1] = tm.stationary();
        Self {
            t: params.temperature(),
            j: params.j(),
            b: params.b(),
            p0,
            p1,
            t00: tm.get(0, 0),
            t01: tm.get(0, 1),
            t10: tm.get(1, 0),
            t11: tm.get(1, 1),
            fidelity: one_step_fidelity(&tm),
            c_mu,
            c_q,
            ratio: (c_q >= RATIO_CQ_FLOOR).then(|| c_mu / c_q),
        }
    }

    pub fn check_invariant(&self) -> Result<()> {
        if self.c_q <= self.c_mu + ROW_INVARIANT_TOL {
            Ok(())
        } else {
            Err(Error::Invariant(format!(
                "C_q = {} exceeds C_mu = {} at T = {}, J = {}, B = {}",
                self.c_q, self.c_mu, self.t, self.j, self.b
            )))
        }
    }

    pub fn csv_record(&self) -> [String; 13] {
        [
            fmt_f64(self.t),
            fmt_f64(self.j),
            fmt_f64(self.b),
            fmt_f64(self.p0),
            fmt_f64(self.p1),
            fmt_f64(self.t00),
            fmt_f64(self.t01),
            fmt_f64(self.t10),
            fmt_f64(self.t11),
            fmt_f64(self.fidelity),
            fmt_f64(self.c_mu),
            fmt_f64(self.c_q),
            self.ratio.map(fmt_f64).unwrap_or_default(),
        ]
    }
}

/// Evenly spaced temperatures (linearly or logarithmically), endpoints included.
pub fn temperature_grid(t_min: f64, t_max: f64, points: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_min.is_finite() && t_max.is_finite() && t_max > t_min) {
        return Err(Error::InvalidInput(format!(
            "need 0 < t_min < t_max < inf, got {t_min}, {t_max}"
        )));
    }
    if points < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 points, got {points}")));
    }
    Ok(match spacing {
        Spacing::Log => log_grid(t_min, t_max, points),
        Spacing::Linear => (0..points)
            .map(|k| {
                if k + 1 == points {
                    t_max
                } else {
                    t_min + (t_max - t_min) * k as f64 / (points - 1) as f64
                }
            })
            .collect(),
    })
}

/// One row per temperature, computed in parallel and returned in grid order.
pub fn sweep_rows(j: f64, b: f64, temperatures: &[f64]) -> Result<Vec<SweepRow>> {
    temperatures
        .par_iter()
        .map(|&t| Ok(SweepRow::compute(&IsingParams::new(j, b, t)?)))
        .collect()
}

/// Grid argmax of `C_q` (first occurrence).
pub fn argmax_cq(rows: &[SweepRow]) -> Option<&SweepRow> {
    rows.iter()
        .fold(None, |best: Option<&SweepRow>, r| match best {
            Some(b) if b.c_q >= r.c_q => Some(b),
            _ => Some(r),
        })
}

/// Writes the header and every row, refusing rows that break `C_q <= C_mu`.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        row.check_invariant()?;
        w.write_record(row.csv_record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    for row in rows {
        row.check_invariant()?;
    }
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)?;
    Ok(())
}
