//! Shared fixtures for the criterion benches: representative laws covering
//! the closed-form, lattice, and quadrature code paths.

use steinlab::{Dist, NumericLaw};

/// A generic continuous law with no closed-form transforms.
pub fn uniform01() -> Dist {
    Dist::Numeric {
        law: NumericLaw::uniform(0.0, 1.0).expect("valid bounds"),
    }
}

/// The rescaled negative binomial law used in the bound-dominance grids.
pub fn scaled_nb(kappa: f64, p: f64) -> Dist {
    Dist::Scaled {
        c: p,
        inner: Box::new(Dist::NegativeBinomial { kappa, p }),
    }
}

/// A compound Poisson law with continuous jumps (FFT lattice path).
pub fn levy_truncation(delta: f64) -> Dist {
    Dist::CompoundPoisson {
        lambda: steinlab::special::exp_int_e1(delta),
        jump: Box::new(Dist::GammaLevyJump { delta }),
    }
}
