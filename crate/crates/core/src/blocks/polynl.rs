use super::{expect_channels, expect_positive, init_square};
use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::{hadamard, matmul, pool_expand, FeatureMap, Scalar, SquareWeights};

/// Parameters of a Poly-NL block: three channel mixers and the residual
/// scalars of `Z = αX + βY`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyNlParams<T: Scalar = f64> {
    pub w1: SquareWeights<T>,
    pub w2: SquareWeights<T>,
    pub w3: SquareWeights<T>,
    pub alpha: T,
    pub beta: T,
}

impl<T: Scalar> PolyNlParams<T> {
    pub fn new(
        w1: SquareWeights<T>,
        w2: SquareWeights<T>,
        w3: SquareWeights<T>,
        alpha: T,
        beta: T,
    ) -> Result<Self> {
        if w1.dim() != w2.dim() || w1.dim() != w3.dim() {
            return Err(Error::shape("PolyNlParams", "W1, W2, W3 disagree on C"));
        }
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::numeric("PolyNlParams", "α and β must be finite"));
        }
        Ok(PolyNlParams {
            w1,
            w2,
            w3,
            alpha,
            beta,
        })
    }

    /// Seeded weights with `α = 1, β = 0`, so the residual block starts as
    /// the identity.
    pub fn init(channels: usize, seed: u64) -> Result<Self> {
        expect_positive("channels", channels)?;
        let mut rng = rng::seeded(seed);
        let w1 = init_square(&mut rng, channels);
        let w2 = init_square(&mut rng, channels);
        let w3 = init_square(&mut rng, channels);
        Self::new(w1, w2, w3, T::one(), T::zero())
    }

    pub fn channels(&self) -> usize {
        self.w1.dim()
    }
}

/// `Y = (Φ(X·W1 ⊙ X·W2) ⊙ X)·W3` where `Φ` replaces every row by the
/// spatial mean. Every intermediate is `N × C`.
pub fn polynl_core_forward<T: Scalar>(
    p: &PolyNlParams<T>,
    x: &FeatureMap<T>,
) -> Result<FeatureMap<T>> {
    expect_channels("polynl_core_forward", p.channels(), x)?;
    let left = matmul(x, p.w1.matrix())?;
    let right = matmul(x, p.w2.matrix())?;
    let pooled = pool_expand(&hadamard(&left, &right)?);
    let gated = hadamard(&pooled, x)?;
    matmul(&gated, p.w3.matrix())?.ensure_finite("polynl_core_forward")
}

/// `Z = αX + βY`.
pub fn residual_polynl<T: Scalar>(p: &PolyNlParams<T>, x: &FeatureMap<T>) -> Result<FeatureMap<T>> {
    let y = polynl_core_forward(p, x)?;
    x.scale(p.alpha)
        .add(&y.scale(p.beta))?
        .ensure_finite("residual_polynl")
}
