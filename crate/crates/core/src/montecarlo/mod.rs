// SPDX-License-Identifier: Apache-2.0

//! Brute-force oracles for the analytic noise and master-equation results.
//!
//! Randomness comes from ChaCha8 keyed by `(seed, stream)`, so every
//! fluctuator configuration and every realization has its own reproducible
//! stream regardless of how the work is scheduled.

mod ensemble;
mod spectral;
mod stochastic;
mod surface;

pub use ensemble::*;
pub use spectral::*;
pub use stochastic::*;
pub use surface::*;

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const MAGIC: [u8; 4] = *b"QNTS";
const FORMAT_VERSION: u32 = 1;

/// Uniformly sampled three-axis field record.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    dt: f64,
    samples: Vec<[f64; 3]>,
}

impl TimeSeries {
    pub fn new(dt: f64, samples: Vec<[f64; 3]>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be > 0, got {dt}")));
        }
        if samples.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("time series contains non-finite samples".into()));
        }
        Ok(TimeSeries { dt, samples })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[[f64; 3]] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.samples.len() as f64
    }

    pub fn axis(&self, k: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s[k]).collect()
    }

    /// `⟨x²⟩` per axis, about zero (the sources have zero mean).
    pub fn mean_square(&self) -> [f64; 3] {
        let mut acc = [0.0; 3];
        for s in &self.samples {
            for k in 0..3 {
                acc[k] += s[k] * s[k];
            }
        }
        acc.map(|a| a / self.samples.len().max(1) as f64)
    }

    pub fn mean(&self) -> [f64; 3] {
        let mut acc = [0.0; 3];
        for s in &self.samples {
            for k in 0..3 {
                acc[k] += s[k];
            }
        }
        acc.map(|a| a / self.samples.len().max(1) as f64)
    }

    /// Sample variance about the sample mean.
    pub fn variance(&self) -> [f64; 3] {
        let m = self.mean();
        let ms = self.mean_square();
        [ms[0] - m[0] * m[0], ms[1] - m[1] * m[1], ms[2] - m[2] * m[2]]
    }

    /// Little-endian dump: magic `QNTS`, format version (u32), axis count
    /// (u32), sample count (u64), `dt` (f64), then interleaved samples.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&3u32.to_le_bytes())?;
        w.write_all(&(self.samples.len() as u64).to_le_bytes())?;
        w.write_all(&self.dt.to_le_bytes())?;
        for s in &self.samples {
            for v in s {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != MAGIC {
            return Err(Error::InvalidState("not a time-series dump".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != FORMAT_VERSION {
            return Err(Error::InvalidState(format!("unsupported dump version {version}")));
        }
        r.read_exact(&mut b4)?;
        if u32::from_le_bytes(b4) != 3 {
            return Err(Error::InvalidState("expected three axes".into()));
        }
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let dt = f64::from_le_bytes(b8);
        let mut samples = Vec::with_capacity(n.min(1 << 24));
        for _ in 0..n {
            let mut s = [0.0; 3];
            for v in &mut s {
                r.read_exact(&mut b8)?;
                *v = f64::from_le_bytes(b8);
            }
            samples.push(s);
        }
        TimeSeries::new(dt, samples)
    }
}
