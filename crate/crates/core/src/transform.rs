use alloc::sync::Arc;
use core::fmt;

use num_complex::Complex64;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
enum Kernel {
    Real(RealFn),
    Analytic(ComplexFn),
}

/// A Laplace-domain function `θ ↦ F(θ)`.
///
/// Transforms built from closed forms are *analytic*: they can be evaluated
/// at complex arguments, which the Fourier and Talbot inversions rely on.
/// Real-only transforms are limited to the real axis at or above
/// [`domain_min`](Self::domain_min).
#[derive(Clone)]
pub struct TransformFn {
    kernel: Kernel,
    domain_min: f64,
}

impl TransformFn {
    pub fn real<F>(f: F, domain_min: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kernel: Kernel::Real(Arc::new(f)),
            domain_min,
        }
    }

    /// An analytic transform, valid on the whole real axis (poles excepted).
    pub fn analytic<F>(f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self::analytic_from(f64::NEG_INFINITY, f)
    }

    pub fn analytic_from<F>(domain_min: f64, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            kernel: Kernel::Analytic(Arc::new(f)),
            domain_min,
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match &self.kernel {
            Kernel::Real(f) => f(theta),
            Kernel::Analytic(f) => f(Complex64::new(theta, 0.0)).re,
        }
    }

    /// Evaluates at a complex argument; `None` for real-only transforms.
    pub fn eval_complex(&self, theta: Complex64) -> Option<Complex64> {
        match &self.kernel {
            Kernel::Real(_) => None,
            Kernel::Analytic(f) => Some(f(theta)),
        }
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.kernel, Kernel::Analytic(_))
    }

    /// Largest lower bound of the real half-line where the transform is valid.
    pub fn domain_min(&self) -> f64 {
        self.domain_min
    }

    pub(crate) fn complex_fn(&self) -> Option<ComplexFn> {
        match &self.kernel {
            Kernel::Real(_) => None,
            Kernel::Analytic(f) => Some(f.clone()),
        }
    }
}

impl fmt::Debug for TransformFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransformFn")
            .field("analytic", &self.is_analytic())
            .field("domain_min", &self.domain_min)
            .finish()
    }
}

/// A probability density with explicit support `[lo, hi]`. Evaluation
/// outside the support returns zero.
#[derive(Clone)]
pub struct DensityOnInterval {
    lo: f64,
    hi: f64,
    f: RealFn,
}

impl DensityOnInterval {
    pub fn new<F>(lo: f64, hi: f64, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        debug_assert!(lo <= hi);
        Self {
            lo,
            hi,
            f: Arc::new(f),
        }
    }

    pub fn uniform(lo: f64, hi: f64) -> Self {
        let h = 1.0 / (hi - lo);
        Self::new(lo, hi, move |_| h)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            0.0
        } else {
            (self.f)(x)
        }
    }
}

impl fmt::Debug for DensityOnInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityOnInterval")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .finish()
    }
}
