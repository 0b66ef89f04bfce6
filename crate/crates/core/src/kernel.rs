//! Relaxation kernels `mu(s) = -k'(s)` with closed-form tails.
//!
//! Two families are supported, both strictly decreasing and integrable:
//!
//! * exponential: `mu(s) = mu0 * exp(-c s)`
//! * polynomial:  `mu(s) = c * (1 + s)^(-1/(r-1))` with `r` in `(1, 2)`
//!
//! The relaxation function is normalised so that `k(inf) = 1`, hence
//! `k(0) = 1 + int_0^inf mu`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of a built-in kernel family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelFamily {
    Exponential { mu0: f64, c: f64 },
    Polynomial { c: f64, r: f64 },
}

/// Decay class of a kernel: `mu' + C mu <= 0` or `mu' + C mu^r <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum DecayClass {
    Exponential,
    Polynomial { r: f64 },
}

/// Result of [`RelaxationKernel::validate_assumptions`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    #[serde(flatten)]
    pub class: DecayClass,
    /// Largest admissible constant in the decay-class inequality.
    pub decay_constant: f64,
    pub k0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationKernel {
    family: KernelFamily,
    k0: f64,
}

impl RelaxationKernel {
    pub fn new(family: KernelFamily) -> Result<Self> {
        match family {
            KernelFamily::Exponential { mu0, c } => {
                if !(mu0 > 0.0 && mu0.is_finite()) {
                    return Err(Error::Kernel(format!("exponential kernel needs mu0 > 0, got {mu0}")));
                }
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::Kernel(format!("exponential kernel needs c > 0, got {c}")));
                }
            }
            KernelFamily::Polynomial { c, r } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::Kernel(format!("polynomial kernel needs c > 0, got {c}")));
                }
                if !(r > 1.0 && r < 2.0) {
                    return Err(Error::Kernel(format!(
                        "polynomial kernel needs r in (1, 2), got {r}; outside this range mu is not integrable or the decay class degenerates"
                    )));
                }
            }
        }
        let mut kernel = RelaxationKernel { family, k0: 1.0 };
        kernel.k0 = 1.0 + kernel.tail(0.0);
        Ok(kernel)
    }

    pub fn exponential(mu0: f64, c: f64) -> Result<Self> {
        Self::new(KernelFamily::Exponential { mu0, c })
    }

    pub fn polynomial(c: f64, r: f64) -> Result<Self> {
        Self::new(KernelFamily::Polynomial { c, r })
    }

    /// Memory-free surrogate (`mu = 0`, `k(0) = 1`) for limit checks.
    ///
    /// It violates `mu > 0`, so [`validate_assumptions`](Self::validate_assumptions)
    /// rejects it.
    pub fn memoryless() -> Self {
        RelaxationKernel {
            family: KernelFamily::Exponential { mu0: 0.0, c: 1.0 },
            k0: 1.0,
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    /// `k(0) = 1 + int_0^inf mu(s) ds`.
    pub fn k0(&self) -> f64 {
        self.k0
    }

    /// Exponential decay constant when the family is exponential.
    pub(crate) fn exponential_rate(&self) -> Option<f64> {
        match self.family {
            KernelFamily::Exponential { c, .. } => Some(c),
            KernelFamily::Polynomial { .. } => None,
        }
    }

    fn check_s(s: f64) -> Result<()> {
        if s >= 0.0 {
            Ok(())
        } else {
            Err(Error::domain(format!("kernel argument must be >= 0, got {s}")))
        }
    }

    pub fn mu(&self, s: f64) -> Result<f64> {
        Self::check_s(s)?;
        Ok(self.mu_at(s))
    }

    pub fn mu_prime(&self, s: f64) -> Result<f64> {
        Self::check_s(s)?;
        Ok(self.mu_prime_at(s))
    }

    /// `int_{s_max}^inf mu(s) ds` in closed form.
    pub fn tail_mass(&self, s_max: f64) -> Result<f64> {
        Self::check_s(s_max)?;
        Ok(self.tail(s_max))
    }

    pub fn k_at(&self, s: f64) -> Result<f64> {
        Self::check_s(s)?;
        Ok(1.0 + self.tail(s))
    }

    #[inline]
    pub(crate) fn mu_at(&self, s: f64) -> f64 {
        match self.family {
            KernelFamily::Exponential { mu0, c } => mu0 * (-c * s).exp(),
            KernelFamily::Polynomial { c, r } => c * (1.0 + s).powf(-1.0 / (r - 1.0)),
        }
    }

    #[inline]
    pub(crate) fn mu_prime_at(&self, s: f64) -> f64 {
        match self.family {
            KernelFamily::Exponential { mu0, c } => -c * mu0 * (-c * s).exp(),
            KernelFamily::Polynomial { c, r } => {
                let q = 1.0 / (r - 1.0);
                -q * c * (1.0 + s).powf(-q - 1.0)
            }
        }
    }

    #[inline]
    pub(crate) fn tail(&self, s: f64) -> f64 {
        match self.family {
            KernelFamily::Exponential { mu0, c } => mu0 / c * (-c * s).exp(),
            KernelFamily::Polynomial { c, r } => {
                c * (r - 1.0) / (2.0 - r) * (1.0 + s).powf(-(2.0 - r) / (r - 1.0))
            }
        }
    }

    /// Smallest `s` with `tail_mass(s) <= frac * (k0 - 1)`.
    pub(crate) fn tail_quantile(&self, frac: f64) -> f64 {
        match self.family {
            KernelFamily::Exponential { c, .. } => -frac.ln() / c,
            KernelFamily::Polynomial { r, .. } => frac.powf(-(r - 1.0) / (2.0 - r)) - 1.0,
        }
    }

    /// Checks positivity, monotonicity, integrability and the decay-class
    /// inequality on a logarithmic sample of `s`, and reports the largest
    /// admissible decay constant.
    pub fn validate_assumptions(&self) -> Result<KernelReport> {
        let (class, decay_constant) = match self.family {
            KernelFamily::Exponential { mu0, c } => {
                if mu0 <= 0.0 {
                    return Err(Error::Kernel("mu0 must be positive (mu > 0 required)".into()));
                }
                (DecayClass::Exponential, c)
            }
            KernelFamily::Polynomial { r, .. } => {
                (DecayClass::Polynomial { r }, self.polynomial_decay_constant(r))
            }
        };
        let exponent = match class {
            DecayClass::Exponential => 1.0,
            DecayClass::Polynomial { r } => r,
        };

        let mass = self.tail(0.0);
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Kernel(format!("int mu = {mass} is not a finite positive number")));
        }

        for s in log_samples(1e-8, 1e8, 4001).chain(std::iter::once(0.0)) {
            let mu = self.mu_at(s);
            let dmu = self.mu_prime_at(s);
            // Far-out underflow of an exponential is not a violation, and
            // subnormal values carry too few digits to test the inequality.
            if s > 0.0 && mu < f64::MIN_POSITIVE && mu >= 0.0 && matches!(class, DecayClass::Exponential) {
                continue;
            }
            if !(mu > 0.0) {
                return Err(Error::Kernel(format!("mu({s}) = {mu} is not positive")));
            }
            if dmu > 0.0 {
                return Err(Error::Kernel(format!("mu'({s}) = {dmu} is positive")));
            }
            let slack = dmu + decay_constant * mu.powf(exponent);
            if slack > 1e-12 * dmu.abs() {
                return Err(Error::Kernel(format!(
                    "decay inequality fails at s = {s}: mu' + C mu^{exponent} = {slack:e}"
                )));
            }
        }

        Ok(KernelReport {
            class,
            decay_constant,
            k0: self.k0,
        })
    }

    /// Grid infimum of `-mu'(s) / mu(s)^r` over `s` in `[0, 1e3]` with
    /// `1e5` points log-spaced in `1 + s`.
    fn polynomial_decay_constant(&self, r: f64) -> f64 {
        let n = 100_000;
        let top = (1.0f64 + 1e3).ln();
        (0..n)
            .map(|i| (top * i as f64 / (n - 1) as f64).exp() - 1.0)
            .map(|s| -self.mu_prime_at(s) / self.mu_at(s).powf(r))
            .fold(f64::INFINITY, f64::min)
    }
}

fn log_samples(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
}
