use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// All parameters follow the asymptotic formulas.
    Theory,
    /// Palette, activation scale, cap and round count are chosen by the user.
    Practical,
}

/// Parameters of the round procedure. Logs are natural throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineParams {
    pub k: usize,
    /// Maximum degree Δ of the instance the parameters were derived for.
    pub max_degree: usize,
    pub epsilon: f64,
    pub omega: f64,
    /// Activation scale: color `c` is tried at `u` with probability `θ p_u(c)`.
    pub theta: f64,
    /// Size of the semi-random palette.
    pub q: usize,
    /// Probability cap p̂.
    pub p_hat: f64,
    /// Round budget t₀.
    pub rounds: usize,
    pub mode: Mode,
    pub seed: u64,
    /// Stop early once every uncolored vertex has `d(u) <= Δ^x`; `None`
    /// disables the early hand-off.
    #[serde(default = "default_handoff")]
    pub handoff_exponent: Option<f64>,
    /// Re-draw a round whose telemetry fails an invariant flag.
    #[serde(default)]
    pub resample_on_breach: bool,
    #[serde(default = "default_retries")]
    pub max_round_retries: usize,
}

fn default_handoff() -> Option<f64> {
    Some(0.5)
}

fn default_retries() -> usize {
    3
}

/// Parameters plus the warnings raised while deriving them.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams {
    pub params: EngineParams,
    pub warnings: Vec<String>,
}

/// User choices for practical mode. Missing fields fall back to
/// [`EngineParams::practical_default`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PracticalOverrides {
    pub q: Option<usize>,
    pub theta: Option<f64>,
    pub p_hat: Option<f64>,
    pub rounds: Option<usize>,
    pub omega: Option<f64>,
    pub epsilon: Option<f64>,
    pub handoff_exponent: Option<Option<f64>>,
}

impl EngineParams {
    /// Theory-mode parameters from the asymptotic formulas:
    /// `ω = ε² log Δ / (100 k^(2k+1))`, `θ = ε/ω`, `q = ceil((Δ/ω)^(1/(k-1)))`,
    /// `p̂ = Δ^(-1/(k-1) + ε)` and `t₀ = ceil(ε⁻¹ log Δ log log Δ)`.
    ///
    /// The formulas only make sense for huge Δ; degenerate values are
    /// reported as warnings and [`EngineParams::validate`] rejects them
    /// before a run.
    pub fn theory(k: usize, max_degree: usize, epsilon: f64, seed: u64) -> Result<DerivedParams> {
        check_basics(k, max_degree, epsilon)?;
        let d = max_degree as f64;
        let kf = k as f64;
        let ln = d.ln();
        let omega = epsilon * epsilon * ln / (100.0 * kf.powi(2 * k as i32 + 1));
        let theta = epsilon / omega;
        let qf = (d / omega).powf(1.0 / (kf - 1.0)).ceil();
        let p_hat = d.powf(-1.0 / (kf - 1.0) + epsilon);
        let rounds = (ln * ln.ln() / epsilon).ceil().max(0.0);
        let mut warnings = Vec::new();
        if omega < 1.0 {
            warnings.push(format!(
                "omega = {omega:e} < 1: asymptotic regime not reached at this degree"
            ));
        }
        if theta * p_hat >= 1.0 {
            warnings.push(format!(
                "theta * p_hat = {:e} >= 1: activation probabilities exceed one",
                theta * p_hat
            ));
        }
        if p_hat * qf < 1.0 {
            warnings.push(format!("p_hat = {p_hat:e} is below the initial probability 1/q"));
        }
        if qf > u32::MAX as f64 {
            warnings.push(format!("palette size {qf:e} is not representable"));
        }
        let params = EngineParams {
            k,
            max_degree,
            epsilon,
            omega,
            theta,
            q: qf.min(u32::MAX as f64) as usize,
            p_hat,
            rounds: rounds.min(usize::MAX as f64) as usize,
            mode: Mode::Theory,
            seed,
            handoff_exponent: default_handoff(),
            resample_on_breach: false,
            max_round_retries: default_retries(),
        };
        Ok(DerivedParams { params, warnings })
    }

    /// The desk-scale schedule used when the user supplies nothing:
    /// a palette of about `(Δ / log Δ)^(1/(k-1))` colors, a cap that leaves
    /// room above the initial `1/q`, and `θ = 1/2`.
    pub fn practical_default(k: usize, max_degree: usize, seed: u64) -> EngineParams {
        let d = (max_degree.max(3)) as f64;
        let kf = k as f64;
        let base = (d / d.ln()).powf(1.0 / (kf - 1.0));
        let q = (base.ceil() as usize).max(2);
        let theta = 0.5;
        let p_hat = (2.0 / q as f64).min(1.0);
        let epsilon = 0.25;
        EngineParams {
            k,
            max_degree,
            epsilon,
            omega: d / (q as f64).powf(kf - 1.0),
            theta,
            q,
            p_hat,
            rounds: (4.0 * d.ln() / theta).ceil() as usize,
            mode: Mode::Practical,
            seed,
            handoff_exponent: default_handoff(),
            resample_on_breach: false,
            max_round_retries: default_retries(),
        }
    }

    /// Practical-mode parameters: the default schedule with the user's
    /// overrides applied, validated. When `ω` is not given it is set to
    /// `Δ / q^(k-1)`, the value for which the palette formula returns `q`.
    pub fn practical(k: usize, max_degree: usize, seed: u64, o: &PracticalOverrides) -> Result<EngineParams> {
        let mut p = Self::practical_default(k, max_degree, seed);
        if let Some(q) = o.q {
            p.q = q;
            p.omega = (max_degree.max(1)) as f64 / (q.max(1) as f64).powf(k as f64 - 1.0);
            if o.p_hat.is_none() {
                p.p_hat = (2.0 / q.max(1) as f64).min(1.0);
            }
        }
        if let Some(t) = o.theta {
            p.theta = t;
        }
        if let Some(ph) = o.p_hat {
            p.p_hat = ph;
        }
        if let Some(r) = o.rounds {
            p.rounds = r;
        }
        if let Some(w) = o.omega {
            p.omega = w;
        }
        if let Some(e) = o.epsilon {
            p.epsilon = e;
        }
        if let Some(h) = o.handoff_exponent {
            p.handoff_exponent = h;
        }
        p.validate()?;
        Ok(p)
    }

    /// Range checks every run relies on.
    pub fn validate(&self) -> Result<()> {
        check_basics(self.k, self.max_degree.max(2), self.epsilon)?;
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.q < 1 || self.q > u32::MAX as usize {
            return bad(format!("palette size q = {} out of range", self.q));
        }
        if !(self.theta > 0.0 && self.p_hat > 0.0 && self.p_hat <= 1.0) {
            return bad(format!(
                "need theta > 0 and p_hat in (0, 1], got {} and {}",
                self.theta, self.p_hat
            ));
        }
        if self.theta * self.p_hat >= 1.0 {
            return bad(format!("theta * p_hat = {} must be below 1", self.theta * self.p_hat));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return bad(format!("omega = {} must be positive", self.omega));
        }
        if let Some(x) = self.handoff_exponent {
            if !(0.0..=1.0).contains(&x) {
                return bad(format!("handoff exponent {x} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

fn check_basics(k: usize, max_degree: usize, epsilon: f64) -> Result<()> {
    if k < 2 {
        return Err(Error::BadUniformity(k));
    }
    if max_degree < 2 {
        return Err(Error::InvalidParameter(format!(
            "max degree {max_degree} must be at least 2"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside (0, 1)")));
    }
    Ok(())
}
