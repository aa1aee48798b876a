use super::{LinearForm, OdeSystem, ParamBox};
use crate::error::{Error, Result};

pub const BUILTIN_NAMES: [&str; 3] = ["lotka-volterra", "van-der-pol", "exponential"];

/// Looks up a shipped system by name (`lotka-volterra`, `van-der-pol`, `exponential`).
pub fn builtin_by_name(name: &str) -> Option<Box<dyn OdeSystem>> {
    match name {
        "lotka-volterra" | "lotka_volterra" | "lv" => Some(Box::new(builtin_lotka_volterra())),
        "van-der-pol" | "van_der_pol" | "vdp" => Some(Box::new(builtin_van_der_pol())),
        "exponential" | "exp" => Some(Box::new(builtin_exponential())),
        _ => None,
    }
}

/// Predator-prey model
///
/// ```text
/// x1' = t1 x1 - t2 x1 x2
/// x2' = -t3 x2 + t4 x1 x2
/// ```
#[derive(Debug, Clone)]
pub struct LotkaVolterra {
    param_box: ParamBox,
}

pub fn builtin_lotka_volterra() -> LotkaVolterra {
    LotkaVolterra {
        param_box: ParamBox::uniform(4, 0.01, 5.0).expect("static box"),
    }
}

impl LotkaVolterra {
    pub fn with_box(param_box: ParamBox) -> Result<Self> {
        if param_box.dim() != 4 {
            return Err(Error::param("Lotka-Volterra needs a 4-dimensional box"));
        }
        Ok(Self { param_box })
    }

    /// `t4 x1 - t3 ln x1 + t2 x2 - t1 ln x2`, constant along positive solutions.
    pub fn first_integral(x: &[f64], theta: &[f64]) -> f64 {
        theta[3] * x[0] - theta[2] * x[0].ln() + theta[1] * x[1] - theta[0] * x[1].ln()
    }
}

impl OdeSystem for LotkaVolterra {
    fn name(&self) -> &str {
        "lotka-volterra"
    }
    fn dim_state(&self) -> usize {
        2
    }
    fn dim_param(&self) -> usize {
        4
    }
    fn param_box(&self) -> &ParamBox {
        &self.param_box
    }

    fn rhs(&self, x: &[f64], th: &[f64], out: &mut [f64]) -> Result<()> {
        let x1x2 = x[0] * x[1];
        out[0] = th[0] * x[0] - th[1] * x1x2;
        out[1] = -th[2] * x[1] + th[3] * x1x2;
        Ok(())
    }

    fn jac_param(&self, x: &[f64], _th: &[f64], out: &mut [f64]) -> Result<()> {
        self.g_matrix(x, out);
        Ok(())
    }

    fn jac_state(&self, x: &[f64], th: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = th[0] - th[1] * x[1];
        out[1] = -th[1] * x[0];
        out[2] = th[3] * x[1];
        out[3] = -th[2] + th[3] * x[0];
        Ok(())
    }

    fn linear_form(&self) -> Option<&dyn LinearForm> {
        Some(self)
    }
}

impl LinearForm for LotkaVolterra {
    fn g_matrix(&self, x: &[f64], out: &mut [f64]) {
        let x1x2 = x[0] * x[1];
        out.copy_from_slice(&[x[0], -x1x2, 0.0, 0.0, 0.0, 0.0, -x[1], x1x2]);
    }

    fn g0(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// Van der Pol oscillator in Lienard form
///
/// ```text
/// x1' = (x1 - x1^3 / 3 + x2) / t
/// x2' = -t x1
/// ```
///
/// Not linear in `t`; the box must exclude zero.
#[derive(Debug, Clone)]
pub struct VanDerPol {
    param_box: ParamBox,
}

pub fn builtin_van_der_pol() -> VanDerPol {
    VanDerPol {
        param_box: ParamBox::uniform(1, 0.1, 5.0).expect("static box"),
    }
}

impl VanDerPol {
    pub fn with_box(param_box: ParamBox) -> Result<Self> {
        if param_box.dim() != 1 {
            return Err(Error::param("Van der Pol needs a 1-dimensional box"));
        }
        let (lo, hi) = param_box.bounds()[0];
        if lo <= 0.0 && hi >= 0.0 {
            return Err(Error::param("Van der Pol box must exclude 0"));
        }
        Ok(Self { param_box })
    }

    fn check_theta(&self, th: &[f64]) -> Result<f64> {
        let t = th[0];
        if t == 0.0 || !t.is_finite() {
            return Err(Error::Domain {
                system: "van-der-pol".into(),
                reason: format!("1/theta undefined at theta = {t}"),
            });
        }
        self.param_box.check(th).map_err(|e| Error::Domain {
            system: "van-der-pol".into(),
            reason: e.to_string(),
        })?;
        Ok(t)
    }
}

impl OdeSystem for VanDerPol {
    fn name(&self) -> &str {
        "van-der-pol"
    }
    fn dim_state(&self) -> usize {
        2
    }
    fn dim_param(&self) -> usize {
        1
    }
    fn param_box(&self) -> &ParamBox {
        &self.param_box
    }

    fn rhs(&self, x: &[f64], th: &[f64], out: &mut [f64]) -> Result<()> {
        let t = self.check_theta(th)?;
        out[0] = (x[0] - x[0].powi(3) / 3.0 + x[1]) / t;
        out[1] = -t * x[0];
        Ok(())
    }

    fn jac_param(&self, x: &[f64], th: &[f64], out: &mut [f64]) -> Result<()> {
        let t = self.check_theta(th)?;
        out[0] = -(x[0] - x[0].powi(3) / 3.0 + x[1]) / (t * t);
        out[1] = -x[0];
        Ok(())
    }

    fn jac_state(&self, x: &[f64], th: &[f64], out: &mut [f64]) -> Result<()> {
        let t = self.check_theta(th)?;
        out[0] = (1.0 - x[0] * x[0]) / t;
        out[1] = 1.0 / t;
        out[2] = -t;
        out[3] = 0.0;
        Ok(())
    }
}

/// Scalar growth `x' = t x`.
#[derive(Debug, Clone)]
pub struct Exponential {
    param_box: ParamBox,
}

pub fn builtin_exponential() -> Exponential {
    Exponential {
        param_box: ParamBox::uniform(1, -3.0, 3.0).expect("static box"),
    }
}

impl Exponential {
    pub fn with_box(param_box: ParamBox) -> Result<Self> {
        if param_box.dim() != 1 {
            return Err(Error::param("exponential system needs a 1-dimensional box"));
        }
        Ok(Self { param_box })
    }
}

impl OdeSystem for Exponential {
    fn name(&self) -> &str {
        "exponential"
    }
    fn dim_state(&self) -> usize {
        1
    }
    fn dim_param(&self) -> usize {
        1
    }
    fn param_box(&self) -> &ParamBox {
        &self.param_box
    }

    fn rhs(&self, x: &[f64], th: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = th[0] * x[0];
        Ok(())
    }

    fn jac_param(&self, x: &[f64], _th: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = x[0];
        Ok(())
    }

    fn jac_state(&self, _x: &[f64], th: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = th[0];
        Ok(())
    }

    fn linear_form(&self) -> Option<&dyn LinearForm> {
        Some(self)
    }
}

impl LinearForm for Exponential {
    fn g_matrix(&self, x: &[f64], out: &mut [f64]) {
        out[0] = x[0];
    }
    fn g0(&self, _x: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
    }
}
