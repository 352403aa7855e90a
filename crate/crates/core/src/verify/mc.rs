//! Replica fan-out. Replica `r` always draws from `SeededSource::new(seed, r)`, so results
//! do not depend on the number of workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::SeededSource;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub replicas: usize,
    pub seed: u64,
    /// `0` uses all available cores.
    #[serde(default)]
    pub workers: usize,
    /// Optional per-suite overrides, interpreted by each suite.
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

impl MCConfig {
    pub fn new(replicas: usize, seed: u64) -> Self {
        MCConfig { replicas, seed, workers: 0, params: Default::default() }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_replicas(&self, replicas: usize) -> Self {
        MCConfig { replicas, ..self.clone() }
    }

    /// Same configuration under an independent seed.
    pub fn side(&self, label: u64) -> Self {
        MCConfig { seed: crate::rng::subseed(self.seed, label), ..self.clone() }
    }

    pub fn param_f64(&self, name: &str) -> Option<f64> {
        self.params.get(name).and_then(|v| v.as_f64())
    }

    pub fn param_usize(&self, name: &str) -> Option<usize> {
        self.params.get(name).and_then(|v| v.as_u64()).map(|v| v as usize)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// Evaluate `f` on replicas `0..replicas` in parallel; output is in replica order.
    pub fn run<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(SeededSource) -> Result<T> + Sync,
    {
        let seed = self.seed;
        self.pool()?.install(|| {
            (0..self.replicas as u64)
                .into_par_iter()
                .map(|r| f(SeededSource::new(seed, r)))
                .collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_workers() {
        let f = |s: SeededSource| Ok(s.stream(&[9]).uniform());
        let a = MCConfig::new(300, 5).with_workers(1).run(f).unwrap();
        let b = MCConfig::new(300, 5).with_workers(4).run(f).unwrap();
        assert_eq!(a, b);
        let c = MCConfig::new(300, 5).side(1).run(f).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn errors_propagate() {
        let r: Result<Vec<()>> = MCConfig::new(10, 0).run(|s| {
            if s.stream_id == 3 {
                Err(Error::NoPath)
            } else {
                Ok(())
            }
        });
        assert_eq!(r, Err(Error::NoPath));
    }
}
