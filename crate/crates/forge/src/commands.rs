//! One function per subcommand, each returning a serializable summary.

use std::path::Path;
use std::sync::Arc;

use calabi_core::cutoff::{
    is_monotone_within_error, lemma_loop, pde_crosscheck, pde_samples, scaling_study, BallTriple,
    LemmaResiduals, ScalingRow,
};
use calabi_core::hamflow::{Estimate, HoferEstimate};
use calabi_core::linalg::Mat;
use calabi_core::manifolds::{action_maslov, mean_integral, ActionMaslov, SphereQuadrature};
use calabi_core::nullhomotopy::{
    build_based_homotopy, check_boundaries, describe_transfers, BoundaryReport, SymplecticHomotopy,
};
use calabi_core::symplin::{maslov_report, rotation_loop, MatrixLoop, WeightVector};
use calabi_core::theorem::{run_theorem, CalabiReport, Check, HoferPair};
use calabi_core::Error as CoreError;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{ForgeError, Result};

#[derive(Clone, Debug, Serialize)]
pub struct MaslovSummary {
    pub weights: Option<Vec<i64>>,
    pub samples: usize,
    pub index: i64,
    pub winding: f64,
    pub residual: f64,
    pub max_step: f64,
}

fn summarize_maslov(lp: &MatrixLoop, weights: Option<&WeightVector>) -> Result<MaslovSummary> {
    let r = maslov_report(lp)?;
    Ok(MaslovSummary {
        weights: weights.map(|w| w.as_slice().to_vec()),
        samples: lp.samples().len(),
        index: r.index,
        winding: r.winding,
        residual: r.residual,
        max_step: r.max_step,
    })
}

pub fn maslov(weights: &WeightVector, intervals: usize) -> Result<MaslovSummary> {
    summarize_maslov(&rotation_loop(weights, intervals), Some(weights))
}

/// Loop CSV: one row per sample at `t_k = k/(rows − 1)`, each row the
/// `2n × 2n` matrix in row-major order; no header.
pub fn maslov_csv(path: &Path) -> Result<MaslovSummary> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut samples = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let entries = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| ForgeError::Config(format!("{}: row {}: {e}", path.display(), row + 1)))?;
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim * dim != entries.len() || !dim.is_multiple_of(2) {
            return Err(ForgeError::Config(format!(
                "{}: row {} has {} entries, not a square even-sized matrix",
                path.display(),
                row + 1,
                entries.len()
            )));
        }
        samples.push(Mat::from_row_major(dim, &entries));
    }
    let lp = MatrixLoop::from_samples(samples, 1e-8)?;
    summarize_maslov(&lp, None)
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractSummary {
    pub weights: Vec<i64>,
    pub transfers: String,
    pub grid: usize,
    pub boundary: BoundaryReport,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn contract(weights: &WeightVector, grid: usize, tolerance: f64) -> Result<ContractSummary> {
    let h = build_based_homotopy(weights)?;
    let boundary = check_boundaries(&h, grid, grid)?;
    Ok(ContractSummary {
        weights: weights.as_slice().to_vec(),
        transfers: describe_transfers(h.transfers()),
        grid,
        tolerance,
        pass: boundary.max_boundary() < tolerance && boundary.symplectic < tolerance,
        boundary,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaSummary {
    pub weights: Vec<i64>,
    pub epsilon: f64,
    pub balls: BallTriple,
    pub halvings: usize,
    pub cal: Estimate,
    pub certified_bound: f64,
    pub residuals: LemmaResiduals,
    pub pde_residual: f64,
    pub hofer: HoferEstimate,
    pub hofer_pair: HoferPair,
    pub scaling: Vec<ScalingRow>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn check(name: &str, value: f64, threshold: f64) -> Check {
    Check {
        name: name.into(),
        value,
        threshold,
        pass: value <= threshold,
    }
}

/// Linear rotation loop and its based null-homotopy, refusing loops with
/// nonzero Maslov index before anything else.
fn contractible_loop(
    weights: &WeightVector,
    intervals: usize,
) -> Result<(MatrixLoop, Arc<dyn SymplecticHomotopy>)> {
    let lp = rotation_loop(weights, intervals);
    let index = maslov_report(&lp)?.index;
    if index != 0 {
        return Err(CoreError::NotNullHomotopic { index }.into());
    }
    Ok((lp, Arc::new(build_based_homotopy(weights)?)))
}

pub fn lemma(cfg: &RunConfig, weights: &WeightVector, epsilon: f64) -> Result<LemmaSummary> {
    let (lp, homotopy) = contractible_loop(weights, cfg.linear_loop.intervals)?;
    let n = weights.len();
    let lc = cfg.lemma_config(n, epsilon);
    let res = lemma_loop(&lp, homotopy.clone(), &lc)?;
    let samples = pde_samples(
        2 * n,
        res.balls.outer,
        cfg.checks.pde_samples,
        cfg.seed ^ 0x9d,
    );
    let pde = pde_crosscheck(
        homotopy,
        res.profile,
        &samples,
        cfg.checks.pde_time,
        lc.steps,
    )?;
    let tol = cfg.tolerances.to_core();
    let cal = res.cal();
    let r = &res.residuals;
    let checks = vec![
        check("support_exact", r.support, 0.0),
        check(
            "equals_linear_loop_on_inner_ball",
            r.interpolation,
            tol.interpolation,
        ),
        check("loop_closure", r.closure, tol.closure),
        check("generator_normalized", r.normalization, tol.normalization),
        check(
            "cal_within_certified_bound",
            cal.value.abs(),
            res.certified_bound * (1.0 + tol.bound_slack),
        ),
        check("cal_below_epsilon", cal.value.abs() + cal.error, epsilon),
        check("pde_crosscheck", pde.max_residual, tol.pde),
    ];
    let hofer_pair = HoferPair::new(res.hofer.length, res.support_volume(), cal);
    Ok(LemmaSummary {
        weights: weights.as_slice().to_vec(),
        epsilon,
        balls: res.balls,
        halvings: res.halvings,
        cal,
        certified_bound: res.certified_bound,
        residuals: *r,
        pde_residual: pde.max_residual,
        hofer: res.hofer,
        hofer_pair,
        scaling: res.scaling.clone(),
        pass: checks.iter().all(|c| c.pass) && hofer_pair.certified,
        checks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingSummary {
    pub weights: Vec<i64>,
    pub rows: Vec<ScalingRow>,
    /// `|Cal(ρₖ)| / |Cal(ρₖ₊₁)|` for consecutive rows.
    pub ratios: Vec<f64>,
    pub monotone: bool,
}

pub fn scaling(cfg: &RunConfig, weights: &WeightVector, radii: &[f64]) -> Result<ScalingSummary> {
    let (lp, homotopy) = contractible_loop(weights, cfg.linear_loop.intervals)?;
    let lc = cfg.lemma_config(weights.len(), cfg.linear_loop.epsilon);
    let rows = scaling_study(&lp, homotopy, radii, &lc)?;
    Ok(summarize_scaling(weights, rows))
}

pub fn summarize_scaling(weights: &WeightVector, rows: Vec<ScalingRow>) -> ScalingSummary {
    ScalingSummary {
        weights: weights.as_slice().to_vec(),
        ratios: rows
            .windows(2)
            .map(|w| w[0].cal_abs / w[1].cal_abs)
            .collect(),
        monotone: is_monotone_within_error(&rows),
        rows,
    }
}

pub fn theorem(cfg: &RunConfig) -> Result<CalabiReport> {
    Ok(run_theorem(&cfg.theorem_config()?)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct HoferSummary {
    pub g: HoferPair,
    pub h: HoferPair,
}

pub fn hofer(cfg: &RunConfig) -> Result<HoferSummary> {
    let r = theorem(cfg)?;
    Ok(HoferSummary {
        g: r.hofer_g,
        h: r.hofer_h,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ActionMaslovSummary {
    pub moment_at_fixed_point: f64,
    pub moment_integral: Estimate,
    pub volume: Estimate,
    pub action_maslov: ActionMaslov,
}

pub fn action_maslov_index(cfg: &RunConfig) -> Result<ActionMaslovSummary> {
    let x = cfg.product()?;
    let quad = SphereQuadrature {
        azimuth: cfg.quadrature.sphere_azimuth,
        height: cfg.quadrature.sphere_height,
    };
    let mean = mean_integral(&x, &quad);
    let f_s = x.moment_at_fixed_point();
    Ok(ActionMaslovSummary {
        moment_at_fixed_point: f_s,
        moment_integral: mean.moment,
        volume: mean.volume,
        action_maslov: action_maslov(f_s, mean.moment.value, mean.volume.value)?,
    })
}
