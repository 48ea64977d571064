use serde::{Deserialize, Serialize};

use super::ForgeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowMode {
    /// Windows follow `x_{j+1} = x_j(1 + e^{−c_1 √log x_j})`.
    IntervalSchedule,
    /// A single window `(x, x + y]`.
    DeskWindow,
}

/// How the sign `σ_j` is assigned to a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaSchedule {
    AllMinus,
    AllPlus,
    /// `−1` when `2^{2^r} < x ≤ 2^{2^{r+1}}` with `r` even, `+1` for odd `r`.
    DoublyExponentialAlternation,
}

impl SigmaSchedule {
    pub fn sigma_at(self, x: f64) -> i8 {
        match self {
            SigmaSchedule::AllMinus => -1,
            SigmaSchedule::AllPlus => 1,
            SigmaSchedule::DoublyExponentialAlternation => {
                // r = ⌈log2 log2 x⌉ − 1, so that 2^{2^r} < x ≤ 2^{2^{r+1}}
                let ll = x.log2().log2();
                let r = (ll.ceil() as i64 - 1).max(0);
                if r % 2 == 0 {
                    -1
                } else {
                    1
                }
            }
        }
    }
}

/// The arithmetic window and the construction parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    /// Window start; the window is `(x, x + y]`.
    pub x: u64,
    pub y: u64,
    pub m: u32,
    pub delta: f64,
    pub varpi: f64,
    pub nu: f64,
    #[serde(default = "default_mode")]
    pub mode: WindowMode,
    #[serde(default = "default_sigma")]
    pub sigma: i8,
    /// When set, overrides `sigma` with the schedule's value at `x`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<SigmaSchedule>,
}

fn default_mode() -> WindowMode {
    WindowMode::DeskWindow
}

fn default_sigma() -> i8 {
    -1
}

/// One violated constraint, named.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    DeltaNotPositive { delta: f64 },
    DeltaAboveLimit { delta: f64, limit: f64 },
    VarpiRangeEmpty { lower: f64, upper: f64 },
    VarpiTooSmall { varpi: f64, lower: f64 },
    VarpiTooLarge { varpi: f64, upper: f64 },
    NuNotAboveHalf { nu: f64 },
    MTooSmall { m: u32 },
    SigmaNotUnit { sigma: i8 },
    EmptyWindow,
    WindowTooWide { x: u64, y: u64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::DeltaNotPositive { delta } => write!(f, "delta = {delta} must be positive"),
            Violation::DeltaAboveLimit { delta, limit } => {
                write!(f, "delta = {delta} exceeds 1/(3M^2) = {limit}")
            }
            Violation::VarpiRangeEmpty { lower, upper } => write!(
                f,
                "M*delta + 1/M = {lower} is not below 1 - nu = {upper}: no admissible varpi"
            ),
            Violation::VarpiTooSmall { varpi, lower } => {
                write!(f, "varpi = {varpi} must exceed M*delta + 1/M = {lower}")
            }
            Violation::VarpiTooLarge { varpi, upper } => {
                write!(f, "varpi = {varpi} must be below 1 - nu = {upper}")
            }
            Violation::NuNotAboveHalf { nu } => write!(f, "nu = {nu} must exceed 1/2"),
            Violation::MTooSmall { m } => write!(f, "M = {m} must be at least 2"),
            Violation::SigmaNotUnit { sigma } => write!(f, "sigma = {sigma} must be -1 or 1"),
            Violation::EmptyWindow => write!(f, "window length y must be positive"),
            Violation::WindowTooWide { x, y } => {
                write!(f, "window ({x}, {x}+{y}] must satisfy y <= x")
            }
        }
    }
}

/// A validated window with derived exponent data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckedWindow {
    pub cfg: WindowConfig,
    /// `J_i` for `i = 1..=M`.
    pub class_exponents: Vec<(f64, f64)>,
    /// Largest `Σβ` for which some `d ∈ D_β` can satisfy `d ≤ x^{1−ϖ}`.
    pub max_beta_sum: u32,
    pub sigma: i8,
}

impl WindowConfig {
    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if self.m < 2 {
            v.push(Violation::MTooSmall { m: self.m });
        }
        let m = self.m.max(1) as f64;
        if !(self.delta > 0.0) {
            v.push(Violation::DeltaNotPositive { delta: self.delta });
        }
        let limit = 1.0 / (3.0 * m * m);
        if self.delta > limit * (1.0 + 1e-12) {
            v.push(Violation::DeltaAboveLimit {
                delta: self.delta,
                limit,
            });
        }
        let lower = m * self.delta + 1.0 / m;
        let upper = 1.0 - self.nu;
        if lower >= upper {
            v.push(Violation::VarpiRangeEmpty { lower, upper });
        } else {
            if self.varpi <= lower {
                v.push(Violation::VarpiTooSmall {
                    varpi: self.varpi,
                    lower,
                });
            }
            if self.varpi >= upper {
                v.push(Violation::VarpiTooLarge {
                    varpi: self.varpi,
                    upper,
                });
            }
        }
        if self.nu <= 0.5 {
            v.push(Violation::NuNotAboveHalf { nu: self.nu });
        }
        if self.sigma != 1 && self.sigma != -1 {
            v.push(Violation::SigmaNotUnit { sigma: self.sigma });
        }
        if self.y == 0 {
            v.push(Violation::EmptyWindow);
        } else if self.y > self.x {
            v.push(Violation::WindowTooWide {
                x: self.x,
                y: self.y,
            });
        }
        v
    }

    pub fn validate(&self) -> Result<CheckedWindow, ForgeError> {
        let v = self.violations();
        if !v.is_empty() {
            return Err(ForgeError::InvalidConfig(v));
        }
        let m = self.m as f64;
        let class_exponents = (1..=self.m)
            .map(|i| (i as f64 * (1.0 / m - self.delta), i as f64 * (1.0 / m + self.delta)))
            .collect();
        let max_beta_sum = ((1.0 - self.varpi) / (1.0 / m - self.delta)).floor() as u32;
        debug_assert!(max_beta_sum + 2 <= self.m);
        let sigma = match self.schedule {
            Some(s) => s.sigma_at(self.x as f64),
            None => self.sigma,
        };
        Ok(CheckedWindow {
            cfg: self.clone(),
            class_exponents,
            max_beta_sum,
            sigma,
        })
    }
}

/// One step of the interval recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalStep {
    pub x: f64,
    pub next: f64,
    /// `⌊x_{j+1}⌋ − ⌊x_j⌋`; exact while `x_{j+1} < 2^53`.
    pub k: f64,
}

/// `x_{j+1} = x_j (1 + e^{−c_1 √log x_j})` for `count` steps.
pub fn interval_schedule(x0: f64, c1: f64, count: usize) -> Result<Vec<IntervalStep>, ForgeError> {
    if !(x0 > 1.0) || !(c1 >= 0.0) {
        return Err(ForgeError::Schedule(format!("need x0 > 1 and c1 >= 0, got {x0}, {c1}")));
    }
    let mut out = Vec::with_capacity(count);
    let mut x = x0;
    for _ in 0..count {
        let next = x * (1.0 + (-c1 * x.ln().sqrt()).exp());
        if !next.is_finite() {
            return Err(ForgeError::Schedule(format!("overflow after x = {x:e}")));
        }
        out.push(IntervalStep {
            x,
            next,
            k: next.floor() - x.floor(),
        });
        x = next;
    }
    Ok(out)
}
