//! Subcommand bodies: scenario in, result section out.

use anyhow::{bail, Context};
use weaversim_core::array::{angle_grid, steer_beam};
use weaversim_core::budget::{fspl, noise_floor_dbm, rx_snr, scaled_to, table1_figures};
use weaversim_core::link::{fit_flatness, run_link};
use weaversim_core::plan::{lo_plan, optimize_plan, plan_weaver, Architecture};
use weaversim_core::weaver::{analytic_irr, simulate_irr, Direction, IqImpairment, IRR_CAP_DB};

use crate::report::{
    ArchitectureRow, BeamPointing, BeamResults, BudgetResults, IrrPoint, IrrResults, LinkResults, PlanResults,
    ScalingRow,
};
use crate::scenario_file::ScenarioFile;

/// Element counts reported by the budget scaling table, as doublings of
/// the scenario's array.
const SCALING_DOUBLINGS: u32 = 4;

pub fn plan(file: &ScenarioFile, only: Option<Architecture>) -> anyhow::Result<PlanResults> {
    let bp = &file.band_plan;
    let archs: Vec<Architecture> = Architecture::ALL
        .into_iter()
        .filter(|a| only.is_none_or(|o| o == *a))
        .collect();
    let architectures = archs
        .iter()
        .map(|&arch| {
            let p = lo_plan(arch, bp)?;
            Ok(ArchitectureRow {
                architecture: arch,
                tuning_range: p.tuning_range,
                fbw: p.fbw,
                lo1_range: p.lo1_range,
                lo2_range: p.lo2_range,
            })
        })
        .collect::<weaversim_core::Result<Vec<_>>>()?;
    let with_weaver = archs.contains(&Architecture::WeaverShared);
    let (weaver, optimized) = if with_weaver {
        (
            Some(plan_weaver(bp, bp.mirror_if())?),
            Some(optimize_plan(bp, &file.plan)?),
        )
    } else {
        (None, None)
    };
    Ok(PlanResults {
        architectures,
        weaver,
        optimized,
    })
}

pub fn irr(file: &ScenarioFile, grid: bool) -> anyhow::Result<IrrResults> {
    let s = file.scenario();
    s.validate()?;
    let settings = &file.irr;
    let cfg = s.chain.weaver(Direction::Rx, s.chain.sideband);
    let pairs: Vec<(f64, f64)> = if grid {
        if settings.grid_gain_db.is_empty() || settings.grid_phase_deg.is_empty() {
            bail!("irr grid needs at least one gain and one phase value");
        }
        settings
            .grid_gain_db
            .iter()
            .flat_map(|&g| settings.grid_phase_deg.iter().map(move |&p| (g, p)))
            .collect()
    } else {
        vec![settings.point]
    };
    let points = pairs
        .into_iter()
        .map(|(g, p)| {
            let imp = IqImpairment::new(g, p, settings.stage)?;
            let analytic_db = analytic_irr(g, p)?;
            let simulated_db = simulate_irr(&cfg, &[imp], &settings.probe)?;
            Ok(IrrPoint {
                gain_imbalance_db: g,
                phase_imbalance_deg: p,
                analytic_db,
                simulated_db,
                delta_db: simulated_db - analytic_db,
            })
        })
        .collect::<weaversim_core::Result<Vec<_>>>()?;
    let max_abs_delta_db = points
        .iter()
        .filter(|p| p.analytic_db < IRR_CAP_DB)
        .map(|p| p.delta_db.abs())
        .fold(0.0, f64::max);
    Ok(IrrResults {
        sideband: cfg.sideband,
        stage: settings.stage,
        grid,
        points,
        max_abs_delta_db,
    })
}

/// Parses `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_angles(text: &str) -> anyhow::Result<Vec<f64>> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .with_context(|| format!("bad angle `{t}` in `{text}`"))
    };
    let parts: Vec<&str> = text.split(':').collect();
    let angles = match parts.as_slice() {
        [start, step, stop] => {
            let (a, s, b) = (num(start)?, num(step)?, num(stop)?);
            if !(s > 0.0) || b < a {
                bail!("angle range `{text}` needs a positive step and start ≤ stop");
            }
            let n = ((b - a) / s + 1e-9).floor() as usize;
            (0..=n).map(|k| a + k as f64 * s).collect()
        }
        [_] => text.split(',').map(num).collect::<anyhow::Result<Vec<_>>>()?,
        _ => bail!("angles must be `start:step:stop` or a comma list, got `{text}`"),
    };
    if angles.is_empty() {
        bail!("no angles in `{text}`");
    }
    Ok(angles)
}

pub fn beam(file: &ScenarioFile, angles: Option<&[f64]>) -> anyhow::Result<BeamResults> {
    let s = file.scenario();
    s.validate()?;
    let grid = angle_grid(file.beam.grid_step_deg)?;
    let angles = angles.map(<[f64]>::to_vec).unwrap_or_else(|| vec![s.steer_deg]);
    let beams = angles
        .iter()
        .map(|&theta| {
            let report = steer_beam(&s.array, &s.phase_shifter, theta, &grid, s.seed)?;
            Ok(BeamPointing {
                pointing_error_deg: report.achieved_peak_angle - theta,
                array_gain_db: 20.0 * report.pattern.peak_amplitude.log10(),
                report,
            })
        })
        .collect::<weaversim_core::Result<Vec<_>>>()?;
    Ok(BeamResults {
        n_elements: s.array.n_elements(),
        phase_states: s.phase_shifter.n_states,
        beams,
    })
}

pub fn link(file: &ScenarioFile, calibrate: bool) -> anyhow::Result<LinkResults> {
    let mut s = file.scenario();
    s.validate()?;
    let calibration = if calibrate {
        let target = &file.fit;
        let index = s
            .modulations
            .iter()
            .position(|m| m.order == target.modulation_order)
            .with_context(|| format!("no {}-QAM modulation to calibrate on", target.modulation_order))?;
        let fit = fit_flatness(&s, index, target.target_evm_db)?;
        s.chain.gain_flatness_db = fit.gain_flatness_db;
        Some(fit)
    } else {
        None
    };
    Ok(LinkResults {
        calibration,
        gain_flatness_db: s.chain.gain_flatness_db,
        link: run_link(&s)?,
    })
}

pub fn budget(file: &ScenarioFile) -> anyhow::Result<BudgetResults> {
    let lb = &file.link_budget;
    let table1 = table1_figures(&file.budget)?;
    let n0 = file.budget.power.n_elements;
    let mut scaling: Vec<ScalingRow> = Vec::new();
    for k in 0..=SCALING_DOUBLINGS {
        let scaled = scaled_to(&file.budget, n0 << k)?;
        let t = table1_figures(&scaled)?;
        scaling.push(ScalingRow {
            n_elements: t.n_elements,
            eirp_dbm: t.eirp_dbm,
            eirp_over_pdc_percent: t.eirp_over_pdc_percent,
            element_efficiency_percent: t.element_efficiency_percent,
            eirp_step_db: scaling.last().map(|prev| t.eirp_dbm - prev.eirp_dbm),
        });
    }
    Ok(BudgetResults {
        table1,
        fspl_db: fspl(lb.carrier, lb.distance)?,
        noise_floor_dbm: noise_floor_dbm(lb.bandwidth, lb.noise_figure),
        rx_snr_db: rx_snr(lb)?,
        scaling,
    })
}
