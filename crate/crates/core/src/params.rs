//! Model constants, player state and parameter validation.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Behavioural category of a player. Decides which game is played each turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    /// Always plays game A (pays taxes).
    Taxpayer,
    /// Always plays game B (evades).
    Evader,
    /// Plays A or B with probability 0.5 each turn.
    Mixed,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Taxpayer, Category::Evader, Category::Mixed];

    pub fn index(self) -> usize {
        match self {
            Category::Taxpayer => 0,
            Category::Evader => 1,
            Category::Mixed => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Taxpayer => "taxpayer",
            Category::Evader => "evader",
            Category::Mixed => "mixed",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// State of one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayerState {
    pub category: Category,
    /// Accumulated capital in integer units. Unbounded below.
    pub capital: i64,
    /// Commitment to the current category, kept in `[0, 1]`.
    pub believeness: f64,
}

impl PlayerState {
    pub fn new(category: Category, believeness: f64) -> Self {
        Self {
            category,
            capital: 0,
            believeness: clamp_unit(believeness),
        }
    }
}

#[inline]
pub(crate) fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// How taxpayers and evaders draw their believeness at t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BelievenessInit {
    /// Uniform on `[0.5, 1]`.
    #[default]
    UpperHalf,
    /// Uniform on `[0, 1]`.
    Uniform,
    /// Everybody starts at 1 (mixed players start undecided at 0.5).
    Zealot,
}

impl BelievenessInit {
    pub fn as_str(self) -> &'static str {
        match self {
            BelievenessInit::UpperHalf => "upper-half",
            BelievenessInit::Uniform => "uniform",
            BelievenessInit::Zealot => "zealot",
        }
    }
}

impl FromStr for BelievenessInit {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "upper-half" => Ok(BelievenessInit::UpperHalf),
            "uniform" => Ok(BelievenessInit::Uniform),
            "zealot" => Ok(BelievenessInit::Zealot),
            _ => Err(format!("expected one of upper-half, uniform, zealot; got `{s}`")),
        }
    }
}

/// Relative order of the two believeness updates within an adaptation step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateOrder {
    #[default]
    ImitationFirst,
    CapitalFirst,
}

impl UpdateOrder {
    pub fn as_str(self) -> &'static str {
        match self {
            UpdateOrder::ImitationFirst => "imitation-first",
            UpdateOrder::CapitalFirst => "capital-first",
        }
    }
}

impl FromStr for UpdateOrder {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "imitation-first" => Ok(UpdateOrder::ImitationFirst),
            "capital-first" => Ok(UpdateOrder::CapitalFirst),
            _ => Err(format!("expected imitation-first or capital-first; got `{s}`")),
        }
    }
}

/// Believeness of a mixed player that leaves the mixed category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExitBelieveness {
    /// Redraw uniformly on `[0, 1]`, as on entry into the mixed category.
    #[default]
    Redraw,
    /// Keep the bound that triggered the switch (1 for new taxpayers, 0 for new evaders).
    Keep,
}

impl ExitBelieveness {
    pub fn as_str(self) -> &'static str {
        match self {
            ExitBelieveness::Redraw => "redraw",
            ExitBelieveness::Keep => "keep",
        }
    }
}

impl FromStr for ExitBelieveness {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "redraw" => Ok(ExitBelieveness::Redraw),
            "keep" => Ok(ExitBelieveness::Keep),
            _ => Err(format!("expected redraw or keep; got `{s}`")),
        }
    }
}

/// Every constant of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub n_players: usize,
    /// Units donated by a game-A play, one to each of `tax_d` distinct players.
    pub tax_d: u32,
    /// Units destroyed when an evader is audited.
    pub penalty_h: u32,
    pub audit_p: f64,
    /// External gain credited to everybody at the start of a turn.
    pub gain_g: u32,
    pub imitation_factor: f64,
    pub capital_factor: f64,
    pub delta_b: f64,
    pub rewire_r: f64,
    pub turns: usize,
    pub seed: u64,
    pub believeness_init: BelievenessInit,
    pub update_order: UpdateOrder,
    pub exit_believeness: ExitBelieveness,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            n_players: 1000,
            tax_d: 2,
            penalty_h: 3,
            audit_p: 0.4,
            gain_g: 1,
            imitation_factor: 1.0,
            capital_factor: 1.0,
            delta_b: 0.01,
            rewire_r: 0.02,
            turns: 100,
            seed: 0,
            believeness_init: BelievenessInit::default(),
            update_order: UpdateOrder::default(),
            exit_believeness: ExitBelieveness::default(),
        }
    }
}

impl Params {
    /// Checks every invariant, including `penalty_h > tax_d` and `gain_g < tax_d`.
    pub fn validate(self) -> Result<Params> {
        self.check_ranges()?;
        if self.penalty_h <= self.tax_d {
            return Err(invalid("penalty_h", self.penalty_h, "h>d"));
        }
        if self.gain_g >= self.tax_d {
            return Err(invalid("gain_g", self.gain_g, "g<d"));
        }
        Ok(self)
    }

    /// Like [`Params::validate`] but the two ordering constraints between
    /// d, h and g are downgraded to warnings, which are returned.
    ///
    /// Parameter sweeps cross `d >= h` on purpose.
    pub fn validate_relaxed(self) -> Result<(Params, Vec<String>)> {
        self.check_ranges()?;
        let mut warnings = Vec::new();
        if self.penalty_h <= self.tax_d {
            warnings.push(format!(
                "penalty_h = {} does not exceed tax_d = {}",
                self.penalty_h, self.tax_d
            ));
        }
        if self.gain_g >= self.tax_d {
            warnings.push(format!(
                "gain_g = {} is not below tax_d = {}",
                self.gain_g, self.tax_d
            ));
        }
        Ok((self, warnings))
    }

    fn check_ranges(&self) -> Result<()> {
        if self.n_players == 0 {
            return Err(invalid("n_players", self.n_players, "n_players>0"));
        }
        if self.tax_d == 0 {
            return Err(invalid("tax_d", self.tax_d, "d>0"));
        }
        if self.penalty_h == 0 {
            return Err(invalid("penalty_h", self.penalty_h, "h>0"));
        }
        if self.gain_g == 0 {
            return Err(invalid("gain_g", self.gain_g, "g>0"));
        }
        if !(0.0..=1.0).contains(&self.audit_p) {
            return Err(invalid("audit_p", self.audit_p, "0<=p<=1"));
        }
        if !(0.0..=1.0).contains(&self.rewire_r) {
            return Err(invalid("rewire_r", self.rewire_r, "0<=r<=1"));
        }
        if !(self.delta_b > 0.0 && self.delta_b < 1.0) {
            return Err(invalid("delta_b", self.delta_b, "0<delta_b<1"));
        }
        if !(self.imitation_factor.is_finite() && self.imitation_factor >= 0.0) {
            return Err(invalid("imitation_factor", self.imitation_factor, "IF>=0"));
        }
        if !(self.capital_factor.is_finite() && self.capital_factor >= 0.0) {
            return Err(invalid("capital_factor", self.capital_factor, "CF>=0"));
        }
        if self.turns == 0 {
            return Err(invalid("turns", self.turns, "T>0"));
        }
        Ok(())
    }
}

fn invalid(name: &'static str, value: impl fmt::Display, constraint: &'static str) -> Error {
    Error::InvalidParam {
        name,
        value: value.to_string(),
        constraint,
    }
}
