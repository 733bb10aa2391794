use super::{expect_channels, expect_positive, init_square};
use crate::error::Result;
use crate::rng;
use crate::tensor::{matmul, FeatureMap, Scalar, SquareWeights};

/// A plain 1×1 convolution, `Y = X·W`: the no-attention reference curve.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv1x1Params<T: Scalar = f64> {
    pub w: SquareWeights<T>,
}

impl<T: Scalar> Conv1x1Params<T> {
    pub fn init(channels: usize, seed: u64) -> Result<Self> {
        expect_positive("channels", channels)?;
        Ok(Conv1x1Params {
            w: init_square(&mut rng::seeded(seed), channels),
        })
    }

    pub fn channels(&self) -> usize {
        self.w.dim()
    }
}

pub fn conv1x1_forward<T: Scalar>(
    p: &Conv1x1Params<T>,
    x: &FeatureMap<T>,
) -> Result<FeatureMap<T>> {
    expect_channels("conv1x1_forward", p.channels(), x)?;
    matmul(x, p.w.matrix())?.ensure_finite("conv1x1_forward")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Matrix;

    #[test]
    fn identity_weights_pass_through() {
        let p = Conv1x1Params {
            w: SquareWeights::identity(3),
        };
        let x = Matrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(conv1x1_forward(&p, &x).unwrap(), x);
        assert!(conv1x1_forward(&p, &Matrix::zeros(2, 2)).is_err());
    }
}
