//! CSV sidecars and SVG plots. Everything here is a pure function of a
//! [`Report`], so a saved report.json regenerates the same bytes.

use weaversim_core::link::Spectrum;
use weaversim_core::plan::{Architecture, LoPlan};
use weaversim_core::weaver::Sideband;

use crate::plot::{bars, render, Chart, Series};
use crate::report::{BeamResults, Body, BudgetResults, IrrResults, LinkResults, PlanResults, Report};

/// Lower edge of pattern plots, dB.
const PATTERN_PLOT_FLOOR_DB: f64 = -40.0;

/// One generated file: name relative to the output directory and contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn new(name: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        Self {
            name: name.into(),
            bytes: bytes.into(),
        }
    }

    pub fn is_plot(&self) -> bool {
        self.name.ends_with(".svg")
    }
}

fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn arch_name(a: Architecture) -> &'static str {
    match a {
        Architecture::DirectConversion => "direct",
        Architecture::SlidingIf => "sliding_if",
        Architecture::WeaverShared => "weaver",
    }
}

fn band_name(sb: Sideband) -> &'static str {
    match sb {
        Sideband::Lsb => "lsb",
        Sideband::Usb => "usb",
    }
}

pub fn render_all(report: &Report) -> anyhow::Result<Vec<Artifact>> {
    match &report.body {
        Body::Plan(r) => plan(r),
        Body::Irr(r) => irr(r),
        Body::Beam(r) => beam(r),
        Body::Link(r) => link(r),
        Body::Budget(r) => budget(r),
    }
}

fn assignment_rows(label: &str, p: &LoPlan) -> Vec<Vec<String>> {
    p.assignments
        .iter()
        .map(|a| {
            vec![
                label.to_string(),
                a.rf_center.to_string(),
                a.lo1.to_string(),
                band_name(a.sideband).to_string(),
                a.if1_center.to_string(),
            ]
        })
        .collect()
}

fn plan(r: &PlanResults) -> anyhow::Result<Vec<Artifact>> {
    let rows = r.architectures.iter().map(|a| {
        vec![
            arch_name(a.architecture).to_string(),
            a.tuning_range.to_string(),
            a.fbw.to_string(),
            a.lo1_range.0.to_string(),
            a.lo1_range.1.to_string(),
            opt(a.lo2_range.map(|x| x.0)),
            opt(a.lo2_range.map(|x| x.1)),
        ]
    });
    let mut out = vec![Artifact::new(
        "plan_architectures.csv",
        csv(
            &["architecture", "tuning_range_hz", "fbw", "lo1_low_hz", "lo1_high_hz", "lo2_low_hz", "lo2_high_hz"],
            rows,
        )?,
    )];
    let names: Vec<String> = r.architectures.iter().map(|a| arch_name(a.architecture).to_string()).collect();
    let fbw: Vec<f64> = r.architectures.iter().map(|a| 100.0 * a.fbw).collect();
    out.push(Artifact::new("plan_fbw.svg", bars("LO fractional bandwidth", "FBW (%)", &names, &fbw)?));

    let plans: Vec<(&str, &LoPlan)> = [("mirror_if", r.weaver.as_ref()), ("optimized", r.optimized.as_ref())]
        .into_iter()
        .filter_map(|(l, p)| p.map(|p| (l, p)))
        .collect();
    if !plans.is_empty() {
        let rows = plans.iter().flat_map(|(l, p)| assignment_rows(l, p));
        out.push(Artifact::new(
            "plan_assignments.csv",
            csv(&["plan", "rf_center_hz", "lo1_hz", "sideband", "if1_center_hz"], rows)?,
        ));
        let mut chart = Chart::new("Weaver LO1 per channel", "RF channel center (GHz)", "LO1 (GHz)");
        for (label, p) in &plans {
            let pts = p.assignments.iter().map(|a| (a.rf_center / 1e9, a.lo1 / 1e9)).collect();
            chart.series.push(Series::dots(*label, pts));
        }
        out.push(Artifact::new("plan_lo1.svg", render(&chart)?));
    }
    Ok(out)
}

fn irr(r: &IrrResults) -> anyhow::Result<Vec<Artifact>> {
    let rows = r.points.iter().map(|p| {
        vec![
            p.gain_imbalance_db.to_string(),
            p.phase_imbalance_deg.to_string(),
            p.analytic_db.to_string(),
            p.simulated_db.to_string(),
            p.delta_db.to_string(),
        ]
    });
    let table = csv(&["gain_imb_db", "phase_imb_deg", "analytic_db", "simulated_db", "delta_db"], rows)?;

    let mut gains: Vec<f64> = Vec::new();
    for p in &r.points {
        if !gains.contains(&p.gain_imbalance_db) {
            gains.push(p.gain_imbalance_db);
        }
    }
    let mut chart = Chart::new("Image rejection", "phase imbalance (deg)", "IRR (dB)");
    for g in gains {
        let at: Vec<_> = r.points.iter().filter(|p| p.gain_imbalance_db == g).collect();
        chart.series.push(Series::line(
            format!("{g} dB analytic"),
            at.iter().map(|p| (p.phase_imbalance_deg, p.analytic_db)).collect(),
        ));
        chart.series.push(Series::dots(
            format!("{g} dB simulated"),
            at.iter().map(|p| (p.phase_imbalance_deg, p.simulated_db)).collect(),
        ));
    }
    Ok(vec![Artifact::new("irr.csv", table), Artifact::new("irr.svg", render(&chart)?)])
}

fn beam(r: &BeamResults) -> anyhow::Result<Vec<Artifact>> {
    let summary = csv(
        &[
            "steer_deg",
            "achieved_deg",
            "pointing_error_deg",
            "hpbw_deg",
            "peak_to_null_db",
            "sidelobe_level_db",
            "array_gain_db",
        ],
        r.beams.iter().map(|b| {
            vec![
                b.report.steer_angle.to_string(),
                b.report.achieved_peak_angle.to_string(),
                b.pointing_error_deg.to_string(),
                b.report.hpbw.to_string(),
                b.report.peak_to_null_db.to_string(),
                b.report.sidelobe_level_db.to_string(),
                b.array_gain_db.to_string(),
            ]
        }),
    )?;

    let mut header = vec!["angle_deg".to_string()];
    header.extend(r.beams.iter().map(|b| format!("steer_{}", b.report.steer_angle)));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let grid = r.beams.first().map(|b| b.report.pattern.angles_deg.clone()).unwrap_or_default();
    let rows = grid.iter().enumerate().map(|(i, a)| {
        let mut row = vec![a.to_string()];
        row.extend(r.beams.iter().map(|b| b.report.pattern.db.get(i).map(f64::to_string).unwrap_or_default()));
        row
    });
    let patterns = csv(&header_refs, rows)?;

    let mut chart = Chart::new(
        &format!("{}-element array patterns", r.n_elements),
        "angle (deg)",
        "normalized gain (dB)",
    );
    chart.y_range = Some((PATTERN_PLOT_FLOOR_DB, 0.0));
    chart.legend = r.beams.len() <= 16;
    for b in &r.beams {
        let p = &b.report.pattern;
        chart.series.push(Series::line(
            format!("{}°", b.report.steer_angle),
            p.angles_deg.iter().copied().zip(p.db.iter().copied()).collect(),
        ));
    }
    Ok(vec![
        Artifact::new("beam_summary.csv", summary),
        Artifact::new("beam_pattern.csv", patterns),
        Artifact::new("beam_patterns.svg", render(&chart)?),
    ])
}

fn spectrum_chart(title: &str, s: &Spectrum) -> anyhow::Result<String> {
    let mut chart = Chart::new(title, "frequency (GHz)", "PSD (dB)");
    chart.legend = false;
    chart
        .series
        .push(Series::line("psd", s.freqs.iter().map(|f| f / 1e9).zip(s.db.iter().copied()).collect()));
    render(&chart)
}

fn link(r: &LinkResults) -> anyhow::Result<Vec<Artifact>> {
    let rep = &r.link;
    let evm_rows = rep.results.iter().flat_map(|m| {
        [&m.lower, &m.upper].map(|b| {
            vec![
                m.modulation.label(),
                m.bit_rate.to_string(),
                band_name(b.sideband).to_string(),
                opt(b.snr_db),
                b.evm.evm_db.to_string(),
                b.bit_errors.to_string(),
                b.ber.to_string(),
            ]
        })
    });
    let mut out = vec![Artifact::new(
        "link_evm.csv",
        csv(
            &["modulation", "bit_rate", "band", "snr_db", "evm_db", "bit_errors", "ber"],
            evm_rows,
        )?,
    )];
    let points = rep.results.iter().flat_map(|m| {
        let label = m.modulation.label();
        m.constellation
            .iter()
            .map(move |&(i, q)| vec![label.clone(), i.to_string(), q.to_string()])
    });
    out.push(Artifact::new("constellation.csv", csv(&["modulation", "i", "q"], points)?));
    let traces = [("tx_rf", &rep.tx_spectrum), ("rx_baseband", &rep.rx_spectrum)];
    let rows = traces.iter().flat_map(|(name, s)| {
        s.freqs
            .iter()
            .zip(&s.db)
            .map(move |(f, d)| vec![name.to_string(), f.to_string(), d.to_string()])
    });
    out.push(Artifact::new("spectrum.csv", csv(&["trace", "freq_hz", "db"], rows)?));

    for m in &rep.results {
        let mut chart = Chart::new(
            &format!("{} constellation ({})", m.modulation.label(), band_name(m.calibrated_band)),
            "I",
            "Q",
        );
        chart.legend = false;
        chart
            .series
            .push(Series::dots("symbols", m.constellation.clone()));
        out.push(Artifact::new(
            format!("constellation_{}qam.svg", m.modulation.order),
            render(&chart)?,
        ));
    }
    out.push(Artifact::new("tx_spectrum.svg", spectrum_chart("TX RF spectrum", &rep.tx_spectrum)?));
    out.push(Artifact::new(
        "rx_spectrum.svg",
        spectrum_chart("RX baseband spectrum", &rep.rx_spectrum)?,
    ));
    Ok(out)
}

fn budget(r: &BudgetResults) -> anyhow::Result<Vec<Artifact>> {
    let rows = r.scaling.iter().map(|s| {
        vec![
            s.n_elements.to_string(),
            s.eirp_dbm.to_string(),
            s.eirp_over_pdc_percent.to_string(),
            s.element_efficiency_percent.to_string(),
            opt(s.eirp_step_db),
        ]
    });
    let table = csv(
        &["n_elements", "eirp_dbm", "eirp_over_pdc_percent", "element_efficiency_percent", "eirp_step_db"],
        rows,
    )?;
    let mut chart = Chart::new("EIRP scaling", "elements (log2 N)", "EIRP (dBm)");
    chart.legend = false;
    chart.series.push(Series::line(
        "eirp",
        r.scaling.iter().map(|s| ((s.n_elements as f64).log2(), s.eirp_dbm)).collect(),
    ));
    Ok(vec![
        Artifact::new("budget_scaling.csv", table),
        Artifact::new("budget_scaling.svg", render(&chart)?),
    ])
}
