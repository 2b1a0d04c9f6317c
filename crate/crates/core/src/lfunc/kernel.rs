use crate::error::{Error, Result};

/// `V(x) = e^{-x} (1 + x + ... + x^{k-1}/(k-1)!)`, the smoothing weight of
/// weight-`2k` central values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmoothingKernel {
    k: u32,
}

impl SmoothingKernel {
    pub fn new(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("half weight must be positive".into()));
        }
        Ok(SmoothingKernel { k })
    }

    pub fn half_weight(&self) -> u32 {
        self.k
    }

    /// Value at `x >= 0`. No sign check; use [`kernel_v`] for validated input.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        ((-x).exp() * self.truncated_exp(x)).min(1.0)
    }

    /// `sum_{j<k} x^j / j!` by Horner's rule.
    #[inline]
    fn truncated_exp(&self, x: f64) -> f64 {
        let mut acc = 1.0;
        for j in (1..self.k).rev() {
            acc = 1.0 + acc * x / j as f64;
        }
        acc
    }

    /// `int_y^inf V(u) du = e^{-y} sum_{i<k} (k - i) y^i / i!`.
    pub fn upper_integral(&self, y: f64) -> f64 {
        let mut term = 1.0;
        let mut acc = 0.0;
        for i in 0..self.k {
            if i > 0 {
                term *= y / i as f64;
            }
            acc += (self.k - i) as f64 * term;
        }
        (-y).exp() * acc
    }
}

/// `V(x)` for half weight `k`; negative `x` is rejected.
pub fn kernel_v(x: f64, k: u32) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "kernel argument must be nonnegative, got {x}"
        )));
    }
    Ok(SmoothingKernel::new(k)?.eval(x))
}
