use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LinearForm, OdeSystem, ParamBox};
use crate::error::{Error, Result};

/// `coef * prod_k x_k^powers[k]`; missing trailing powers are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    #[serde(default)]
    pub powers: Vec<u32>,
}

impl Monomial {
    fn power(&self, k: usize) -> u32 {
        self.powers.get(k).copied().unwrap_or(0)
    }

    fn eval(&self, x: &[f64]) -> f64 {
        x.iter().enumerate().fold(self.coef, |acc, (k, &xk)| {
            acc * xk.powi(self.power(k) as i32)
        })
    }

    fn deriv(&self, x: &[f64], m: usize) -> f64 {
        let pm = self.power(m);
        if pm == 0 {
            return 0.0;
        }
        x.iter().enumerate().fold(self.coef, |acc, (k, &xk)| {
            if k == m {
                acc * pm as f64 * xk.powi(pm as i32 - 1)
            } else {
                acc * xk.powi(self.power(k) as i32)
            }
        })
    }
}

type Polynomial = Vec<Monomial>;

fn poly_eval(p: &[Monomial], x: &[f64]) -> f64 {
    p.iter().map(|m| m.eval(x)).sum()
}

fn poly_deriv(p: &[Monomial], x: &[f64], k: usize) -> f64 {
    p.iter().map(|m| m.deriv(x, k)).sum()
}

/// JSON description of a user-defined system `F(x, theta) = G(x) theta + g0(x)`
/// with polynomial entries.
///
/// ```json
/// {
///   "name": "lv",
///   "dim_state": 2,
///   "dim_param": 4,
///   "param_box": [[0.01, 5], [0.01, 5], [0.01, 5], [0.01, 5]],
///   "g": [
///     [[{"coef": 1, "powers": [1, 0]}], [{"coef": -1, "powers": [1, 1]}], [], []],
///     [[], [], [{"coef": -1, "powers": [0, 1]}], [{"coef": 1, "powers": [1, 1]}]]
///   ]
/// }
/// ```
///
/// `g0` may be omitted, in which case it is identically zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialSpec {
    pub name: String,
    pub dim_state: usize,
    pub dim_param: usize,
    pub param_box: Vec<[f64; 2]>,
    pub g: Vec<Vec<Polynomial>>,
    #[serde(default)]
    pub g0: Vec<Polynomial>,
}

#[derive(Debug, Clone)]
pub struct PolynomialLinearSystem {
    name: String,
    d: usize,
    p: usize,
    param_box: ParamBox,
    g: Vec<Vec<Polynomial>>,
    g0: Vec<Polynomial>,
}

impl PolynomialLinearSystem {
    pub fn from_spec(spec: PolynomialSpec) -> Result<Self> {
        let PolynomialSpec {
            name,
            dim_state: d,
            dim_param: p,
            param_box,
            g,
            mut g0,
        } = spec;
        if d == 0 || p == 0 {
            return Err(Error::param("dim_state and dim_param must be positive"));
        }
        if param_box.len() != p {
            return Err(Error::param(format!(
                "param_box has {} entries, expected {p}",
                param_box.len()
            )));
        }
        if g.len() != d || g.iter().any(|row| row.len() != p) {
            return Err(Error::param(format!(
                "g must be a {d} x {p} array of polynomials"
            )));
        }
        if g0.is_empty() {
            g0 = vec![Vec::new(); d];
        } else if g0.len() != d {
            return Err(Error::param(format!("g0 must have {d} entries")));
        }
        let too_many_powers = g
            .iter()
            .flatten()
            .chain(g0.iter())
            .flatten()
            .any(|m| m.powers.len() > d);
        if too_many_powers {
            return Err(Error::param(format!(
                "monomial powers longer than dim_state {d}"
            )));
        }
        let param_box = ParamBox::new(param_box.iter().map(|b| (b[0], b[1])).collect())?;
        Ok(Self {
            name,
            d,
            p,
            param_box,
            g,
            g0,
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_spec(serde_json::from_str(s)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

impl OdeSystem for PolynomialLinearSystem {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim_state(&self) -> usize {
        self.d
    }
    fn dim_param(&self) -> usize {
        self.p
    }
    fn param_box(&self) -> &ParamBox {
        &self.param_box
    }

    fn rhs(&self, x: &[f64], theta: &[f64], out: &mut [f64]) -> Result<()> {
        for i in 0..self.d {
            out[i] = poly_eval(&self.g0[i], x)
                + (0..self.p)
                    .map(|j| poly_eval(&self.g[i][j], x) * theta[j])
                    .sum::<f64>();
        }
        Ok(())
    }

    fn jac_param(&self, x: &[f64], _theta: &[f64], out: &mut [f64]) -> Result<()> {
        self.g_matrix(x, out);
        Ok(())
    }

    fn jac_state(&self, x: &[f64], theta: &[f64], out: &mut [f64]) -> Result<()> {
        for i in 0..self.d {
            for m in 0..self.d {
                out[i * self.d + m] = poly_deriv(&self.g0[i], x, m)
                    + (0..self.p)
                        .map(|j| poly_deriv(&self.g[i][j], x, m) * theta[j])
                        .sum::<f64>();
            }
        }
        Ok(())
    }

    fn linear_form(&self) -> Option<&dyn LinearForm> {
        Some(self)
    }
}

impl LinearForm for PolynomialLinearSystem {
    fn g_matrix(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.d {
            for j in 0..self.p {
                out[i * self.p + j] = poly_eval(&self.g[i][j], x);
            }
        }
    }

    fn g0(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.d {
            out[i] = poly_eval(&self.g0[i], x);
        }
    }
}
