use crate::choice::{default_lambda_grid, PenaltyKind};
use crate::features::{BCTS_DIRECTIONS, NUM_FEATURES};
use crate::lfd::LfdConfig;
use crate::rollout::RolloutConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    MUnregularized,
    MStewCv,
    MStewSchedule,
    MStewKnownDirections,
    LfdOnly,
    Ipse,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::MUnregularized,
        Variant::MStewCv,
        Variant::MStewSchedule,
        Variant::MStewKnownDirections,
        Variant::LfdOnly,
        Variant::Ipse,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::MUnregularized => "m_unregularized",
            Variant::MStewCv => "m_stew_cv",
            Variant::MStewSchedule => "m_stew_schedule",
            Variant::MStewKnownDirections => "m_stew_known_directions",
            Variant::LfdOnly => "lfd_only",
            Variant::Ipse => "ipse",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        Self::ALL.iter().copied().find(|v| v.as_str() == s)
    }

    /// Stable numeric id; feeds the RNG stream derivation.
    pub fn id(&self) -> u64 {
        match self {
            Variant::MUnregularized => 1,
            Variant::MStewCv => 2,
            Variant::MStewSchedule => 3,
            Variant::MStewKnownDirections => 4,
            Variant::LfdOnly => 5,
            Variant::Ipse => 6,
        }
    }

    /// Whether the variant starts without knowing the feature directions.
    pub fn lacks_prior_knowledge(&self) -> bool {
        *self != Variant::MStewKnownDirections
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    pub variant: Variant,
    pub rollout: RolloutConfig,
    pub lfd: LfdConfig,
    /// Numerator `c` of the schedule `lambda_k = c / k`.
    pub schedule_c: f64,
    pub window_cap: usize,
    pub total_iterations: u64,
    /// Penalty used in the M phase of IPSE.
    pub ipse_penalty: PenaltyKind,
    /// Directions handed to the known-directions variant.
    pub known_directions: [f64; NUM_FEATURES],
    pub cv_folds: usize,
    pub cv_grid: Vec<f64>,
    /// Drop dominated actions before rollouts when directions are known.
    pub filter_dominated: bool,
}

impl LearnerConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            rollout: RolloutConfig::default(),
            lfd: LfdConfig::default(),
            schedule_c: 5.0,
            window_cap: 100,
            total_iterations: 400,
            ipse_penalty: PenaltyKind::StewDirected,
            known_directions: BCTS_DIRECTIONS,
            cv_folds: 5,
            cv_grid: default_lambda_grid(),
            filter_dominated: false,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.rollout.validate().map_err(|e| e.to_string())?;
        self.lfd.validate()?;
        if self.total_iterations == 0 {
            return Err("total_iterations must be >= 1".into());
        }
        if self.window_cap < 2 {
            return Err("window_cap must be >= 2".into());
        }
        if !(self.schedule_c > 0.0 && self.schedule_c.is_finite()) {
            return Err(format!("schedule_c must be > 0, got {}", self.schedule_c));
        }
        if self.cv_folds < 2 {
            return Err("cv_folds must be >= 2".into());
        }
        if self.cv_grid.is_empty() || self.cv_grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err("cv_grid must be a nonempty list of finite values >= 0".into());
        }
        if self.known_directions.iter().any(|&d| d != 1.0 && d != -1.0) {
            return Err("known_directions must be +1/-1".into());
        }
        Ok(())
    }
}
