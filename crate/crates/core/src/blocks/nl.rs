use super::{expect_channels, expect_positive, init_square};
use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::{matmul, FeatureMap, Scalar, SquareWeights};

/// Parameters of the embedded dot-product non-local block.
///
/// `wf` holds the product `W_θ W_φᵀ`; the block never needs the two factors
/// separately.
#[derive(Clone, Debug, PartialEq)]
pub struct NlParams<T: Scalar = f64> {
    pub wf: SquareWeights<T>,
    pub wg: SquareWeights<T>,
}

impl<T: Scalar> NlParams<T> {
    pub fn new(wf: SquareWeights<T>, wg: SquareWeights<T>) -> Result<Self> {
        if wf.dim() != wg.dim() {
            return Err(Error::shape("NlParams", "W_f and W_g disagree on C"));
        }
        Ok(NlParams { wf, wg })
    }

    /// Collapses the query/key embeddings into `W_f = W_θ W_φᵀ`.
    pub fn from_embeddings(
        theta: &SquareWeights<T>,
        phi: &SquareWeights<T>,
        wg: SquareWeights<T>,
    ) -> Result<Self> {
        let wf = matmul(theta.matrix(), &phi.matrix().transpose())?;
        Self::new(SquareWeights::new(wf)?, wg)
    }

    pub fn init(channels: usize, seed: u64) -> Result<Self> {
        expect_positive("channels", channels)?;
        let mut rng = rng::seeded(seed);
        let wf = init_square(&mut rng, channels);
        let wg = init_square(&mut rng, channels);
        Self::new(wf, wg)
    }

    pub fn channels(&self) -> usize {
        self.wf.dim()
    }
}

/// `Y = ((X·W_f)·Xᵀ)·X·W_g`, evaluated left to right so the `N × N`
/// similarity matrix is materialised.
pub fn nl_forward<T: Scalar>(p: &NlParams<T>, x: &FeatureMap<T>) -> Result<FeatureMap<T>> {
    expect_channels("nl_forward", p.channels(), x)?;
    let query = matmul(x, p.wf.matrix())?;
    let similarity = matmul(&query, &x.transpose())?;
    let aggregated = matmul(&similarity, x)?;
    matmul(&aggregated, p.wg.matrix())?.ensure_finite("nl_forward")
}

/// The same product reassociated right to left: `Y = X·(W_f·(Xᵀ·(X·W_g)))`.
/// No intermediate is larger than `max(N·C, C²)`.
pub fn efficient_nl_forward<T: Scalar>(
    p: &NlParams<T>,
    x: &FeatureMap<T>,
) -> Result<FeatureMap<T>> {
    expect_channels("efficient_nl_forward", p.channels(), x)?;
    let values = matmul(x, p.wg.matrix())?;
    let context = matmul(&x.transpose(), &values)?;
    let mixed = matmul(p.wf.matrix(), &context)?;
    matmul(x, &mixed)?.ensure_finite("efficient_nl_forward")
}

/// `Z = Y + X`.
pub fn residual_nl<T: Scalar>(p: &NlParams<T>, x: &FeatureMap<T>) -> Result<FeatureMap<T>> {
    let y = nl_forward(p, x)?;
    y.add(x)?.ensure_finite("residual_nl")
}
