//! Non-local attention blocks behind a common trait.
//!
//! Each block family lives in its own module with its parameter type and
//! free forward functions; the [`AttentionBlock`] impls wrap those so the
//! benchmark harness and CLI can pick a block by name from a [`Registry`].

mod conv;
mod latent;
mod nl;
mod polynl;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use conv::{conv1x1_forward, Conv1x1Params};
pub use latent::{latentgnn_forward, LatentGnnParams};
pub use nl::{efficient_nl_forward, nl_forward, residual_nl, NlParams};
pub use polynl::{polynl_core_forward, residual_polynl, PolyNlParams};

use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::{FeatureMap, Matrix, Scalar, SquareWeights};

/// The block families the harness knows how to cost and time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "NL")]
    Nl,
    #[serde(rename = "ENL")]
    Enl,
    #[serde(rename = "PolyNL")]
    PolyNl,
    #[serde(rename = "LatentGNN")]
    LatentGnn,
    #[serde(rename = "Conv1x1")]
    Conv1x1,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Nl,
        Method::Enl,
        Method::PolyNl,
        Method::LatentGnn,
        Method::Conv1x1,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Nl => "NL",
            Method::Enl => "ENL",
            Method::PolyNl => "PolyNL",
            Method::LatentGnn => "LatentGNN",
            Method::Conv1x1 => "Conv1x1",
        }
    }

    /// Registry key.
    pub fn key(self) -> &'static str {
        match self {
            Method::Nl => "nl",
            Method::Enl => "enl",
            Method::PolyNl => "polynl",
            Method::LatentGnn => "latentgnn",
            Method::Conv1x1 => "conv1x1",
        }
    }

    /// Whether the latent width `d` affects this method.
    pub fn uses_latent(self) -> bool {
        self == Method::LatentGnn
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase().replace(['-', '_'], "");
        match lower.as_str() {
            "nl" | "nonlocal" => Ok(Method::Nl),
            "enl" | "efficientnl" => Ok(Method::Enl),
            "polynl" => Ok(Method::PolyNl),
            "latentgnn" | "lgnn" => Ok(Method::LatentGnn),
            "conv1x1" | "conv" => Ok(Method::Conv1x1),
            _ => Err(Error::Config(format!("unknown method {s:?}"))),
        }
    }
}

/// A block that maps an `N × C` map to its attention contribution `Y`.
pub trait AttentionBlock<T: Scalar>: Send + Sync {
    fn method(&self) -> Method;

    fn channels(&self) -> usize;

    /// Latent width, or 0 for blocks without one.
    fn latent(&self) -> usize {
        0
    }

    /// The core forward (no residual).
    fn forward(&self, x: &FeatureMap<T>) -> Result<FeatureMap<T>>;
}

/// Sizes and seed handed to a block factory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockConfig {
    pub channels: usize,
    pub latent: usize,
    pub seed: u64,
}

pub type BlockFactory<T> = fn(&BlockConfig) -> Result<Box<dyn AttentionBlock<T>>>;

struct Entry<T: Scalar> {
    name: String,
    method: Method,
    factory: BlockFactory<T>,
}

/// Name → factory table for attention blocks.
pub struct Registry<T: Scalar> {
    entries: Vec<Entry<T>>,
}

impl<T: Scalar> Registry<T> {
    pub fn empty() -> Self {
        Registry {
            entries: Vec::new(),
        }
    }

    /// Registry holding every block shipped with the crate.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Method::Nl.key(), Method::Nl, |cfg| {
            Ok(Box::new(NlBlock(NlParams::init(cfg.channels, cfg.seed)?)))
        });
        r.register(Method::Enl.key(), Method::Enl, |cfg| {
            Ok(Box::new(EfficientNlBlock(NlParams::init(
                cfg.channels,
                cfg.seed,
            )?)))
        });
        r.register(Method::PolyNl.key(), Method::PolyNl, |cfg| {
            Ok(Box::new(PolyNlBlock(PolyNlParams::init(
                cfg.channels,
                cfg.seed,
            )?)))
        });
        r.register(Method::LatentGnn.key(), Method::LatentGnn, |cfg| {
            Ok(Box::new(LatentGnnBlock(LatentGnnParams::init(
                cfg.channels,
                cfg.latent,
                cfg.seed,
            )?)))
        });
        r.register(Method::Conv1x1.key(), Method::Conv1x1, |cfg| {
            Ok(Box::new(Conv1x1Block(Conv1x1Params::init(
                cfg.channels,
                cfg.seed,
            )?)))
        });
        r
    }

    /// Adds or replaces the factory stored under `name`.
    pub fn register(&mut self, name: &str, method: Method, factory: BlockFactory<T>) {
        let name = name.to_ascii_lowercase();
        self.entries.retain(|e| e.name != name);
        self.entries.push(Entry {
            name,
            method,
            factory,
        });
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    pub fn method_of(&self, name: &str) -> Option<Method> {
        self.find(name).map(|e| e.method)
    }

    pub fn build(&self, name: &str, cfg: &BlockConfig) -> Result<Box<dyn AttentionBlock<T>>> {
        let entry = self.find(name).ok_or_else(|| {
            Error::Config(format!(
                "no block registered as {name:?} (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        (entry.factory)(cfg)
    }

    fn find(&self, name: &str) -> Option<&Entry<T>> {
        let key = name.parse::<Method>().map(Method::key).unwrap_or(name);
        let key = key.to_ascii_lowercase();
        self.entries.iter().find(|e| e.name == key)
    }
}

impl<T: Scalar> Default for Registry<T> {
    fn default() -> Self {
        Self::builtin()
    }
}

pub struct NlBlock<T: Scalar>(pub NlParams<T>);
pub struct EfficientNlBlock<T: Scalar>(pub NlParams<T>);
pub struct PolyNlBlock<T: Scalar>(pub PolyNlParams<T>);
pub struct LatentGnnBlock<T: Scalar>(pub LatentGnnParams<T>);
pub struct Conv1x1Block<T: Scalar>(pub Conv1x1Params<T>);

impl<T: Scalar> AttentionBlock<T> for NlBlock<T> {
    fn method(&self) -> Method {
        Method::Nl
    }
    fn channels(&self) -> usize {
        self.0.channels()
    }
    fn forward(&self, x: &FeatureMap<T>) -> Result<FeatureMap<T>> {
        nl_forward(&self.0, x)
    }
}

impl<T: Scalar> AttentionBlock<T> for EfficientNlBlock<T> {
    fn method(&self) -> Method {
        Method::Enl
    }
    fn channels(&self) -> usize {
        self.0.channels()
    }
    fn forward(&self, x: &FeatureMap<T>) -> Result<FeatureMap<T>> {
        efficient_nl_forward(&self.0, x)
    }
}

impl<T: Scalar> AttentionBlock<T> for PolyNlBlock<T> {
    fn method(&self) -> Method {
        Method::PolyNl
    }
    fn channels(&self) -> usize {
        self.0.channels()
    }
    fn forward(&self, x: &FeatureMap<T>) -> Result<FeatureMap<T>> {
        polynl_core_forward(&self.0, x)
    }
}

impl<T: Scalar> AttentionBlock<T> for LatentGnnBlock<T> {
    fn method(&self) -> Method {
        Method::LatentGnn
    }
    fn channels(&self) -> usize {
        self.0.channels()
    }
    fn latent(&self) -> usize {
        self.0.latent()
    }
    fn forward(&self, x: &FeatureMap<T>) -> Result<FeatureMap<T>> {
        latentgnn_forward(&self.0, x)
    }
}

impl<T: Scalar> AttentionBlock<T> for Conv1x1Block<T> {
    fn method(&self) -> Method {
        Method::Conv1x1
    }
    fn channels(&self) -> usize {
        self.0.channels()
    }
    fn forward(&self, x: &FeatureMap<T>) -> Result<FeatureMap<T>> {
        conv1x1_forward(&self.0, x)
    }
}

/// Seeded `C × C` weights uniform in `[−1/√C, 1/√C]`.
pub(crate) fn init_square<T: Scalar>(rng: &mut impl Rng, c: usize) -> SquareWeights<T> {
    let bound = 1.0 / (c as f64).sqrt();
    SquareWeights::new(rng::uniform(rng, c, c, bound)).expect("square by construction")
}

pub(crate) fn expect_channels<T: Scalar>(op: &'static str, c: usize, x: &Matrix<T>) -> Result<()> {
    if x.cols() != c {
        return Err(Error::shape(
            op,
            format!("block has {c} channels, input has {}", x.cols()),
        ));
    }
    Ok(())
}

pub(crate) fn expect_positive(what: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::Config(format!("{what} must be at least 1")));
    }
    Ok(())
}
