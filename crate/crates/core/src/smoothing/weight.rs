use crate::error::{Error, Result};

pub const DEFAULT_C: f64 = 0.7;
pub const DEFAULT_BETA: f64 = 0.5;
pub const DEFAULT_MARGIN_SCALE: f64 = 1.05;

/// Smooth plateau `lambda_{c,beta}(u)`: 1 on `|u| <= c`, 0 on `|u| >= 1`,
/// and `exp(-beta exp(-beta / (|u| - c)^2) / (|u| - 1)^2)` in between.
pub fn plateau(c: f64, beta: f64, u: f64) -> f64 {
    let s = u.abs();
    if s <= c {
        1.0
    } else if s < 1.0 {
        let inner = (-beta / ((s - c) * (s - c))).exp();
        (-beta * inner / ((s - 1.0) * (s - 1.0))).exp()
    } else {
        0.0
    }
}

/// `d lambda_{c,beta} / du`.
pub fn plateau_deriv(c: f64, beta: f64, u: f64) -> f64 {
    let s = u.abs();
    if s <= c || s >= 1.0 {
        return 0.0;
    }
    let a = s - c;
    let e = s - 1.0;
    let inner = (-beta / (a * a)).exp();
    let g = -beta * inner / (e * e);
    // d g / d s
    let dg = -beta * inner * (2.0 * beta / (a * a * a * e * e) - 2.0 / (e * e * e));
    let d = g.exp() * dg;
    if u < 0.0 {
        -d
    } else {
        d
    }
}

/// Weight `w(t) = A * lambda_{c,beta}(margin_scale (t - mid) / half)` on the
/// observation window `[t_lo, t_hi]`.
///
/// With `margin_scale > 1` the support `{w > 0}` sits strictly inside the
/// window, which removes boundary bias of the smoother from the criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    c: f64,
    beta: f64,
    t_lo: f64,
    t_hi: f64,
    margin_scale: f64,
    amplitude: f64,
}

/// Weight with explicit plateau parameters.
pub fn weight_from_paper(
    t_lo: f64,
    t_hi: f64,
    c: f64,
    beta: f64,
    margin_scale: f64,
) -> Result<WeightFunction> {
    WeightFunction::new(t_lo, t_hi, c, beta, margin_scale)
}

impl WeightFunction {
    pub fn new(t_lo: f64, t_hi: f64, c: f64, beta: f64, margin_scale: f64) -> Result<Self> {
        if !(t_hi > t_lo) || !t_lo.is_finite() || !t_hi.is_finite() {
            return Err(Error::param(format!(
                "weight window needs finite t_lo < t_hi, got [{t_lo}, {t_hi}]"
            )));
        }
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::param(format!(
                "weight plateau c = {c} must lie in (0, 1)"
            )));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::param(format!(
                "weight beta = {beta} must be positive"
            )));
        }
        if !(margin_scale > 1.0) || !margin_scale.is_finite() {
            return Err(Error::param(format!(
                "weight margin_scale = {margin_scale} must exceed 1"
            )));
        }
        Ok(Self {
            c,
            beta,
            t_lo,
            t_hi,
            margin_scale,
            amplitude: 1.0,
        })
    }

    /// Defaults `c = 0.7`, `beta = 0.5`, `margin_scale = 1.05`.
    pub fn standard(t_lo: f64, t_hi: f64) -> Result<Self> {
        Self::new(t_lo, t_hi, DEFAULT_C, DEFAULT_BETA, DEFAULT_MARGIN_SCALE)
    }

    /// The same weight multiplied by a positive constant.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::param("weight scale factor must be positive"));
        }
        Ok(Self {
            amplitude: self.amplitude * factor,
            ..self.clone()
        })
    }

    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn t_lo(&self) -> f64 {
        self.t_lo
    }
    pub fn t_hi(&self) -> f64 {
        self.t_hi
    }
    pub fn margin_scale(&self) -> f64 {
        self.margin_scale
    }

    fn mid(&self) -> f64 {
        0.5 * (self.t_lo + self.t_hi)
    }

    fn half(&self) -> f64 {
        0.5 * (self.t_hi - self.t_lo)
    }

    fn to_unit(&self, t: f64) -> f64 {
        self.margin_scale * (t - self.mid()) / self.half()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * plateau(self.c, self.beta, self.to_unit(t))
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.amplitude * plateau_deriv(self.c, self.beta, self.to_unit(t)) * self.margin_scale
            / self.half()
    }

    /// Open interval on which `w > 0`.
    pub fn support(&self) -> (f64, f64) {
        let r = self.half() / self.margin_scale;
        (self.mid() - r, self.mid() + r)
    }
}
