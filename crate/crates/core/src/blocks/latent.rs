use rand::Rng;

use super::{expect_channels, expect_positive};
use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::{matmul, FeatureMap, Matrix, Scalar};

/// Latent-graph block: positions are projected onto `d` latent nodes, mixed
/// there, and projected back.
///
/// Wiring: `E = X·W_enc`, `L = Eᵀ·X`, `L' = G·L`, `D = X·W_dec`, `Y = D·L'`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentGnnParams<T: Scalar = f64> {
    /// `C × d` encoder projection.
    pub w_enc: Matrix<T>,
    /// `d × d` latent mixing.
    pub g: Matrix<T>,
    /// `C × d` decoder projection.
    pub w_dec: Matrix<T>,
}

impl<T: Scalar> LatentGnnParams<T> {
    pub fn new(w_enc: Matrix<T>, g: Matrix<T>, w_dec: Matrix<T>) -> Result<Self> {
        let (c, d) = w_enc.shape();
        if w_dec.shape() != (c, d) || g.shape() != (d, d) {
            return Err(Error::shape(
                "LatentGnnParams",
                format!(
                    "encoder {}×{}, mixing {}×{}, decoder {}×{}",
                    c,
                    d,
                    g.rows(),
                    g.cols(),
                    w_dec.rows(),
                    w_dec.cols()
                ),
            ));
        }
        Ok(LatentGnnParams { w_enc, g, w_dec })
    }

    pub fn init(channels: usize, latent: usize, seed: u64) -> Result<Self> {
        expect_positive("channels", channels)?;
        expect_positive("latent width", latent)?;
        let mut rng = rng::seeded(seed);
        let proj_bound = 1.0 / (channels as f64).sqrt();
        let mix_bound = 1.0 / (latent as f64).sqrt();
        let w_enc = rng::uniform(&mut rng, channels, latent, proj_bound);
        let g = rng::uniform(&mut rng, latent, latent, mix_bound);
        let w_dec = rng::uniform(&mut rng, channels, latent, proj_bound);
        Self::new(w_enc, g, w_dec)
    }

    pub fn random(rng: &mut impl Rng, channels: usize, latent: usize) -> Result<Self> {
        Self::new(
            rng::uniform(rng, channels, latent, 1.0),
            rng::uniform(rng, latent, latent, 1.0),
            rng::uniform(rng, channels, latent, 1.0),
        )
    }

    pub fn channels(&self) -> usize {
        self.w_enc.rows()
    }

    pub fn latent(&self) -> usize {
        self.w_enc.cols()
    }
}

pub fn latentgnn_forward<T: Scalar>(
    p: &LatentGnnParams<T>,
    x: &FeatureMap<T>,
) -> Result<FeatureMap<T>> {
    expect_channels("latentgnn_forward", p.channels(), x)?;
    let encoded = matmul(x, &p.w_enc)?;
    let latent = matmul(&encoded.transpose(), x)?;
    let mixed = matmul(&p.g, &latent)?;
    let decoded = matmul(x, &p.w_dec)?;
    matmul(&decoded, &mixed)?.ensure_finite("latentgnn_forward")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe;
    use crate::rng::{seeded, uniform};

    /// Nested-loop transcription of the same wiring.
    fn latent_loops(p: &LatentGnnParams, x: &Matrix) -> Matrix {
        let (n, c) = x.shape();
        let d = p.latent();
        let mut latent = vec![vec![0.0; c]; d];
        for k in 0..d {
            for j in 0..c {
                for r in 0..n {
                    let mut e = 0.0;
                    for i in 0..c {
                        e += x.get(r, i) * p.w_enc.get(i, k);
                    }
                    latent[k][j] += e * x.get(r, j);
                }
            }
        }
        Matrix::from_fn(n, c, |r, j| {
            let mut acc = 0.0;
            for k in 0..d {
                let mut dec = 0.0;
                for i in 0..c {
                    dec += x.get(r, i) * p.w_dec.get(i, k);
                }
                let mut mixed = 0.0;
                for l in 0..d {
                    mixed += p.g.get(k, l) * latent[l][j];
                }
                acc += dec * mixed;
            }
            acc
        })
    }

    #[test]
    fn zero_input() {
        let p = LatentGnnParams::<f64>::init(3, 2, 1).unwrap();
        let y = latentgnn_forward(&p, &Matrix::zeros(4, 3)).unwrap();
        assert!(y.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn scalar_cubic() {
        let one = Matrix::from_rows(&[[1.0]]).unwrap();
        let p = LatentGnnParams::new(one.clone(), one.clone(), one).unwrap();
        let x = Matrix::from_rows(&[[2.0]]).unwrap();
        assert_eq!(latentgnn_forward(&p, &x).unwrap().data(), &[8.0]);
    }

    #[test]
    fn matches_loop_transcription() {
        let p = LatentGnnParams::random(&mut seeded(3), 3, 2).unwrap();
        let x = uniform(&mut seeded(4), 4, 3, 1.0);
        let fast = latentgnn_forward(&p, &x).unwrap();
        assert!(fast.rel_err(&latent_loops(&p, &x)).unwrap() <= 1e-12);
    }

    #[test]
    fn shape_checks() {
        let a = Matrix::<f64>::zeros(3, 2);
        assert!(LatentGnnParams::new(a.clone(), Matrix::zeros(3, 3), a.clone()).is_err());
        assert!(LatentGnnParams::new(a.clone(), Matrix::zeros(2, 2), Matrix::zeros(3, 1)).is_err());
        assert!(LatentGnnParams::<f64>::init(3, 0, 1).is_err());
        let p = LatentGnnParams::new(a.clone(), Matrix::zeros(2, 2), a).unwrap();
        assert!(latentgnn_forward(&p, &Matrix::zeros(2, 4)).is_err());
    }

    #[test]
    fn peak_and_flops() {
        let p = LatentGnnParams::<f64>::init(4, 3, 2).unwrap();
        let x = uniform(&mut seeded(5), 20, 4, 1.0);
        let (_, c) = probe::measure(|| latentgnn_forward(&p, &x).unwrap());
        assert_eq!(c.peak_elems, 80);
        assert_eq!(c.flops, 8 * 20 * 3 * 4 + 2 * 9 * 4);
    }
}
