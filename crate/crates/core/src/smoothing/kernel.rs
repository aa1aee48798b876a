use serde::Serialize;

use crate::quadrature::adaptive_simpson;

/// Compactly supported kernel `K(u) = q(u^2) (1 - u^2)^2` on `[-1, 1]`.
///
/// The `(1 - u^2)^2` taper makes `K` and `K'` vanish at `u = +-1`, so the
/// extension by zero is continuously differentiable.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    name: &'static str,
    order: u32,
    /// Coefficients of `q` in powers of `u^2`, lowest first.
    q: Vec<f64>,
}

/// Fourth-order kernel built from Gegenbauer polynomials with weight
/// `(1 - t^2)^2`: `K(t) = (105/64 - 315/64 t^2)(1 - t^2)^2`.
pub fn kernel_gegenbauer_order4() -> Kernel {
    Kernel {
        name: "gegenbauer-4",
        order: 4,
        q: vec![105.0 / 64.0, -315.0 / 64.0],
    }
}

/// Second-order (triweight-type) kernel `K(t) = 15/16 (1 - t^2)^2`.
pub fn kernel_order2() -> Kernel {
    Kernel {
        name: "biweight-2",
        order: 2,
        q: vec![15.0 / 16.0],
    }
}

/// Kernel for a declared order (2 or 4).
pub fn kernel_of_order(order: u32) -> Option<Kernel> {
    match order {
        2 => Some(kernel_order2()),
        4 => Some(kernel_gegenbauer_order4()),
        _ => None,
    }
}

/// Numerically measured kernel moments.
#[derive(Debug, Clone, Serialize)]
pub struct KernelMoments {
    pub name: String,
    pub order: u32,
    /// `moments[l] = int u^l K(u) du` for `l = 0..=order`.
    pub moments: Vec<f64>,
    pub value_at_zero: f64,
}

impl Kernel {
    pub fn name(&self) -> &str {
        self.name
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    #[inline]
    fn q_and_dq(&self, s: f64) -> (f64, f64) {
        let mut q = 0.0;
        let mut dq = 0.0;
        for &c in self.q.iter().rev() {
            dq = dq * s + q;
            q = q * s + c;
        }
        (q, dq)
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        if !(u.abs() < 1.0) {
            return 0.0;
        }
        let s = u * u;
        let taper = 1.0 - s;
        self.q_and_dq(s).0 * taper * taper
    }

    #[inline]
    pub fn deriv(&self, u: f64) -> f64 {
        if !(u.abs() < 1.0) {
            return 0.0;
        }
        let s = u * u;
        let taper = 1.0 - s;
        let (q, dq) = self.q_and_dq(s);
        2.0 * u * taper * (dq * taper - 2.0 * q)
    }

    /// `int_{-1}^{1} u^l K(u) du` by adaptive Simpson.
    pub fn moment(&self, l: u32) -> f64 {
        adaptive_simpson(|u| u.powi(l as i32) * self.eval(u), -1.0, 1.0, 1e-12)
    }

    pub fn moments(&self) -> KernelMoments {
        KernelMoments {
            name: self.name.to_string(),
            order: self.order,
            moments: (0..=self.order).map(|l| self.moment(l)).collect(),
            value_at_zero: self.eval(0.0),
        }
    }
}
