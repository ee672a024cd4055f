//! LO frequency planning for the two-band E-band front end.
//!
//! Compares the LO tuning a direct-conversion, a sliding-IF and the shared
//! Weaver architecture need to cover both bands, and searches for the
//! Weaver IF that minimizes LO fractional bandwidth.

use serde::{Deserialize, Serialize};

use crate::error::{BindingConstraint, Error, Result};
use crate::weaver::Sideband;

/// Default ILO reference before the per-element multiplier, Hz.
pub const BASE_OSC_HZ: f64 = 19.5e9;
pub const DEFAULT_MULTIPLIER: u32 = 4;

/// Frequency step of the IF search grid, Hz.
pub const SEARCH_STEP_HZ: f64 = 1e6;

/// LO1:LO2 center ratio of the sliding-IF reference plan.
const SLIDING_LO_RATIO: f64 = 4.0;

/// Frequencies within this distance are treated as equal, Hz.
const FREQ_TOL: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandPlan {
    pub lower_band: (f64, f64),
    pub upper_band: (f64, f64),
    pub channel_width: f64,
}

impl Default for BandPlan {
    fn default() -> Self {
        Self {
            lower_band: (71e9, 76e9),
            upper_band: (81e9, 86e9),
            channel_width: 2e9,
        }
    }
}

impl BandPlan {
    pub fn validate(&self) -> Result<()> {
        let (ll, lh) = self.lower_band;
        let (ul, uh) = self.upper_band;
        let finite = [ll, lh, ul, uh, self.channel_width].iter().all(|v| v.is_finite());
        if !finite || ll <= 0.0 || lh <= ll || uh <= ul {
            return Err(Error::param("band_plan", "each band needs 0 < low < high"));
        }
        if ul < lh {
            return Err(Error::param("band_plan", "lower band must sit below the upper band without overlap"));
        }
        if !(self.channel_width > 0.0) {
            return Err(Error::param("band_plan.channel_width", "must be positive"));
        }
        if self.channel_width > (lh - ll).min(uh - ul) + FREQ_TOL {
            return Err(Error::param("band_plan.channel_width", "wider than a band"));
        }
        Ok(())
    }

    pub fn lower_width(&self) -> f64 {
        self.lower_band.1 - self.lower_band.0
    }

    pub fn upper_width(&self) -> f64 {
        self.upper_band.1 - self.upper_band.0
    }

    /// Channel centers of a band: a raster stepping one channel width from
    /// the lower edge, plus one channel flush with the upper edge when the
    /// width is not a whole number of channels.
    pub fn channels(&self, sideband: Sideband) -> Vec<f64> {
        let (lo, hi) = match sideband {
            Sideband::Lsb => self.lower_band,
            Sideband::Usb => self.upper_band,
        };
        let cw = self.channel_width;
        let last = hi - cw / 2.0;
        let mut centers = Vec::new();
        let mut k = 0usize;
        loop {
            let c = lo + cw / 2.0 + k as f64 * cw;
            if c > last + FREQ_TOL {
                break;
            }
            centers.push(c);
            k += 1;
        }
        if centers.last().is_none_or(|&c| (c - last).abs() > FREQ_TOL) {
            centers.push(last);
        }
        centers
    }

    /// IF1 center at which every lower-band channel mirrors onto the
    /// same-index upper-band channel.
    pub fn mirror_if(&self) -> f64 {
        (self.upper_band.0 - self.lower_band.0) / 2.0
    }

    /// Center of the RF span covered by both bands.
    pub fn rf_center(&self) -> f64 {
        (self.lower_band.0 + self.upper_band.1) / 2.0
    }

    fn contains_interior(&self, lo: f64, hi: f64) -> bool {
        let overlaps = |(a, b): (f64, f64)| lo < b - FREQ_TOL && hi > a + FREQ_TOL;
        overlaps(self.lower_band) || overlaps(self.upper_band)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    DirectConversion,
    SlidingIf,
    WeaverShared,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [
        Architecture::DirectConversion,
        Architecture::SlidingIf,
        Architecture::WeaverShared,
    ];
}

/// One RF channel's LO setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelAssignment {
    pub rf_center: f64,
    pub lo1: f64,
    pub sideband: Sideband,
    /// Center of the channel at IF1.
    pub if1_center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoPlan {
    pub architecture: Architecture,
    pub lo1_range: (f64, f64),
    /// `None` when the architecture has no second LO.
    pub lo2_range: Option<(f64, f64)>,
    pub base_osc: f64,
    pub multiplier: Option<u32>,
    pub tuning_range: f64,
    pub fbw: f64,
    pub assignments: Vec<ChannelAssignment>,
}

impl LoPlan {
    fn from_range(architecture: Architecture, lo1_range: (f64, f64), lo2_range: Option<(f64, f64)>) -> Self {
        let tuning_range = lo1_range.1 - lo1_range.0;
        Self {
            architecture,
            lo1_range,
            lo2_range,
            base_osc: BASE_OSC_HZ,
            multiplier: None,
            tuning_range,
            fbw: tuning_range / ((lo1_range.0 + lo1_range.1) / 2.0),
            assignments: Vec::new(),
        }
    }

    /// Tuning the base oscillator needs before multiplication, Hz.
    pub fn base_osc_tuning(&self) -> Option<f64> {
        self.multiplier.map(|m| self.tuning_range / m as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningSummary {
    pub tuning_range: f64,
    pub fbw: f64,
}

/// Image of `f` about `lo`.
pub fn image_of(f: f64, lo: f64) -> f64 {
    2.0 * lo - f
}

fn span(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn weaver_assignments(bp: &BandPlan, if1_center: f64) -> Vec<ChannelAssignment> {
    let lower = bp.channels(Sideband::Lsb).into_iter().map(|f| ChannelAssignment {
        rf_center: f,
        lo1: f + if1_center,
        sideband: Sideband::Lsb,
        if1_center,
    });
    let upper = bp.channels(Sideband::Usb).into_iter().map(|f| ChannelAssignment {
        rf_center: f,
        lo1: f - if1_center,
        sideband: Sideband::Usb,
        if1_center,
    });
    lower.chain(upper).collect()
}

/// Weaver plan with a fixed IF1: lower-band channels sit below LO1, upper
/// band channels above it. At the mirror IF each LO1 serves one channel of
/// each band and the sideband bit alone picks between them.
pub fn plan_weaver(bp: &BandPlan, if1_center: f64) -> Result<LoPlan> {
    bp.validate()?;
    if (bp.lower_width() - bp.upper_width()).abs() > FREQ_TOL {
        return Err(Error::param("band_plan", "bands of unequal width cannot be mirror paired"));
    }
    if !(if1_center > bp.channel_width / 2.0) {
        return Err(Error::param("if1_center", "must exceed half a channel width"));
    }
    let assignments = weaver_assignments(bp, if1_center);
    let range = span(assignments.iter().map(|a| a.lo1));
    let mut plan = LoPlan::from_range(Architecture::WeaverShared, range, Some((if1_center, if1_center)));
    plan.multiplier = Some(DEFAULT_MULTIPLIER);
    plan.assignments = assignments;
    Ok(plan)
}

fn direct_plan(bp: &BandPlan) -> LoPlan {
    let centers: Vec<f64> = [Sideband::Lsb, Sideband::Usb]
        .into_iter()
        .flat_map(|sb| bp.channels(sb))
        .collect();
    let mut plan = LoPlan::from_range(Architecture::DirectConversion, span(centers.iter().copied()), None);
    plan.assignments = centers
        .iter()
        .map(|&f| ChannelAssignment {
            rf_center: f,
            lo1: f,
            sideband: if f < bp.lower_band.1 { Sideband::Lsb } else { Sideband::Usb },
            if1_center: 0.0,
        })
        .collect();
    plan
}

/// Sliding IF with both LOs from one source at a 4:1 ratio: LO1 sits at 4/5
/// of the RF and sweeps half the channel-center span.
fn sliding_plan(bp: &BandPlan) -> LoPlan {
    let direct = direct_plan(bp);
    let rf_mid = (direct.lo1_range.0 + direct.lo1_range.1) / 2.0;
    let center = rf_mid * SLIDING_LO_RATIO / (SLIDING_LO_RATIO + 1.0);
    let half = direct.tuning_range / 4.0;
    let lo1 = (center - half, center + half);
    LoPlan::from_range(
        Architecture::SlidingIf,
        lo1,
        Some((lo1.0 / SLIDING_LO_RATIO, lo1.1 / SLIDING_LO_RATIO)),
    )
}

/// LO plan of an architecture covering every channel of both bands.
pub fn lo_plan(arch: Architecture, bp: &BandPlan) -> Result<LoPlan> {
    bp.validate()?;
    Ok(match arch {
        Architecture::DirectConversion => direct_plan(bp),
        Architecture::SlidingIf => sliding_plan(bp),
        Architecture::WeaverShared => plan_weaver(bp, bp.mirror_if())?,
    })
}

pub fn lo_tuning_range(arch: Architecture, bp: &BandPlan) -> Result<TuningSummary> {
    let plan = lo_plan(arch, bp)?;
    Ok(TuningSummary {
        tuning_range: plan.tuning_range,
        fbw: plan.fbw,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConstraints {
    /// Widest band IF1 may occupy, Hz.
    pub if1_max_bw: f64,
    /// When false, LO2 may follow small IF1 offsets, letting spare IF1
    /// bandwidth absorb part of the LO1 tuning.
    #[serde(default = "yes")]
    pub lo2_fixed: bool,
    /// Allowed multiplication factors from the base oscillator. Empty
    /// disables the check.
    #[serde(default = "default_multipliers")]
    pub multiplier_set: Vec<u32>,
    #[serde(default = "default_base_osc")]
    pub base_osc: f64,
}

fn yes() -> bool {
    true
}

fn default_multipliers() -> Vec<u32> {
    vec![DEFAULT_MULTIPLIER]
}

fn default_base_osc() -> f64 {
    BASE_OSC_HZ
}

impl Default for PlanConstraints {
    fn default() -> Self {
        Self {
            if1_max_bw: 3e9,
            lo2_fixed: true,
            multiplier_set: default_multipliers(),
            base_osc: BASE_OSC_HZ,
        }
    }
}

/// Evaluation of one candidate IF1 center.
enum Candidate {
    Aliased,
    Plan(LoPlan),
}

/// True when the image of any channel lands partly inside a band without
/// coinciding with a raster channel of the other band.
fn aliases(bp: &BandPlan, assignments: &[ChannelAssignment]) -> bool {
    let cw = bp.channel_width;
    assignments.iter().any(|a| {
        let img = image_of(a.rf_center, a.lo1);
        if !bp.contains_interior(img - cw / 2.0, img + cw / 2.0) {
            return false;
        }
        let partner = bp.channels(a.sideband.flipped());
        !partner.iter().any(|&c| (c - img).abs() <= FREQ_TOL)
    })
}

fn evaluate(bp: &BandPlan, c: &PlanConstraints, if1: f64) -> Candidate {
    let nominal = weaver_assignments(bp, if1);
    if aliases(bp, &nominal) {
        return Candidate::Aliased;
    }
    let slack = if c.lo2_fixed {
        0.0
    } else {
        (c.if1_max_bw - bp.channel_width).max(0.0)
    };
    if slack > 0.0 {
        let retuned = absorb_slack(&nominal, slack);
        if !aliases(bp, &retuned) {
            return Candidate::Plan(weaver_plan(c, retuned));
        }
    }
    Candidate::Plan(weaver_plan(c, nominal))
}

/// Pulls the outermost LO1 settings inward by up to `slack / 2`, letting
/// each channel's IF1 (and LO2) move instead.
fn absorb_slack(nominal: &[ChannelAssignment], slack: f64) -> Vec<ChannelAssignment> {
    let (lo, hi) = span(nominal.iter().map(|a| a.lo1));
    let range = if hi - lo <= slack {
        let mid = (lo + hi) / 2.0;
        (mid, mid)
    } else {
        (lo + slack / 2.0, hi - slack / 2.0)
    };
    nominal
        .iter()
        .map(|a| {
            let lo1 = a.lo1.clamp(range.0, range.1);
            ChannelAssignment {
                lo1,
                if1_center: (a.rf_center - lo1).abs(),
                ..*a
            }
        })
        .collect()
}

fn weaver_plan(c: &PlanConstraints, assignments: Vec<ChannelAssignment>) -> LoPlan {
    let range = span(assignments.iter().map(|a| a.lo1));
    let lo2 = span(assignments.iter().map(|a| a.if1_center));
    let mut plan = LoPlan::from_range(Architecture::WeaverShared, range, Some(lo2));
    plan.base_osc = c.base_osc;
    plan.assignments = assignments;
    plan
}

fn reachable_multiplier(c: &PlanConstraints, range: (f64, f64)) -> Option<Option<u32>> {
    if c.multiplier_set.is_empty() {
        return Some(None);
    }
    c.multiplier_set
        .iter()
        .copied()
        .filter(|&m| {
            let f = m as f64 * c.base_osc;
            f >= range.0 - FREQ_TOL && f <= range.1 + FREQ_TOL
        })
        .min()
        .map(Some)
}

/// IF1 occupancy of a plan: the union of all channels translated to IF1.
pub fn if1_occupied(plan: &LoPlan, channel_width: f64) -> (f64, f64) {
    let (lo, hi) = span(plan.assignments.iter().map(|a| a.if1_center));
    (lo - channel_width / 2.0, hi + channel_width / 2.0)
}

/// Checks a Weaver plan against the optimizer constraints.
pub fn check_plan(bp: &BandPlan, c: &PlanConstraints, plan: &LoPlan) -> std::result::Result<(), BindingConstraint> {
    let (lo, hi) = if1_occupied(plan, bp.channel_width);
    if hi - lo > c.if1_max_bw + FREQ_TOL {
        return Err(BindingConstraint::If1Bandwidth);
    }
    if aliases(bp, &plan.assignments) {
        return Err(BindingConstraint::Aliasing);
    }
    let covered = plan
        .assignments
        .iter()
        .all(|a| (a.rf_center - a.lo1).abs() > bp.channel_width / 2.0 - FREQ_TOL);
    if !covered {
        return Err(BindingConstraint::Aliasing);
    }
    if reachable_multiplier(c, plan.lo1_range).is_none() {
        return Err(BindingConstraint::Multiplier);
    }
    Ok(())
}

/// Searches IF1 centers on a 1 MHz grid for the Weaver plan of least LO
/// fractional bandwidth. Ties go to the lower IF1.
pub fn optimize_plan(bp: &BandPlan, c: &PlanConstraints) -> Result<LoPlan> {
    bp.validate()?;
    if (bp.lower_width() - bp.upper_width()).abs() > FREQ_TOL {
        return Err(Error::param("band_plan", "bands of unequal width cannot be mirror paired"));
    }
    if !(c.if1_max_bw > 0.0) || !(c.base_osc > 0.0) {
        return Err(Error::param("constraints", "if1_max_bw and base_osc must be positive"));
    }
    if bp.channel_width > c.if1_max_bw + FREQ_TOL {
        return Err(Error::Infeasible(BindingConstraint::If1Bandwidth));
    }
    let first = (bp.channel_width / 2.0 / SEARCH_STEP_HZ).floor() as u64 + 1;
    let last = ((bp.upper_band.1 - bp.lower_band.0) / 2.0 / SEARCH_STEP_HZ).floor() as u64;

    let mut any_alias_free = false;
    let mut best: Option<LoPlan> = None;
    for k in first..=last {
        let if1 = k as f64 * SEARCH_STEP_HZ;
        let Candidate::Plan(mut plan) = evaluate(bp, c, if1) else {
            continue;
        };
        any_alias_free = true;
        let Some(m) = reachable_multiplier(c, plan.lo1_range) else {
            continue;
        };
        plan.multiplier = m;
        if best.as_ref().is_none_or(|b| plan.fbw < b.fbw) {
            best = Some(plan);
        }
    }
    match best {
        Some(plan) => {
            debug_assert!(check_plan(bp, c, &plan).is_ok());
            Ok(plan)
        }
        None if !any_alias_free => Err(Error::Infeasible(BindingConstraint::Aliasing)),
        None => Err(Error::Infeasible(BindingConstraint::Multiplier)),
    }
}
