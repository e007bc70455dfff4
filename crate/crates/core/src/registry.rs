//! Reconstruction algorithms behind a common trait, selectable by name.

use crate::error::Result;
use crate::model::ReconstructionReport;
use crate::onebit::BihtConfig;
use crate::pipeline::{run_direct, run_two_part, DirectConfig, DirectSeeds, TwoPartConfig, TwoPartSeeds};
use crate::sensing::Precision;

/// Everything needed to run one paired trial. Both algorithms see the same
/// signal; the direct baseline spends `m1 + m2` measurements on one dense
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub n: usize,
    pub k: usize,
    pub m1: usize,
    pub m2: usize,
    pub p: f64,
    pub epsilon: f64,
    pub zero_threshold: usize,
    pub noise_variance: f64,
    pub biht: BihtConfig,
    pub seeds: TrialSeeds,
    pub precision: Precision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialSeeds {
    pub signal: u64,
    pub matrix1: u64,
    pub matrix2: u64,
    pub noise1: u64,
    pub noise2: u64,
    pub direct_matrix: u64,
    pub direct_noise: u64,
}

impl Trial {
    pub fn two_part_config(&self) -> TwoPartConfig {
        TwoPartConfig {
            n: self.n,
            k: self.k,
            m1: self.m1,
            m2: self.m2,
            p: self.p,
            epsilon: self.epsilon,
            zero_threshold: self.zero_threshold,
            noise_variance: self.noise_variance,
            biht: self.biht,
            seeds: TwoPartSeeds {
                signal: self.seeds.signal,
                matrix1: self.seeds.matrix1,
                matrix2: self.seeds.matrix2,
                noise1: self.seeds.noise1,
                noise2: self.seeds.noise2,
            },
            precision: self.precision,
        }
    }

    pub fn direct_config(&self) -> DirectConfig {
        DirectConfig {
            n: self.n,
            k: self.k,
            m: self.m1 + self.m2,
            noise_variance: self.noise_variance,
            biht: self.biht,
            seeds: DirectSeeds {
                signal: self.seeds.signal,
                matrix: self.seeds.direct_matrix,
                noise: self.seeds.direct_noise,
            },
            precision: self.precision,
        }
    }
}

pub trait Reconstructor: Send + Sync {
    fn name(&self) -> &'static str;

    fn run(&self, trial: &Trial) -> Result<(Vec<f64>, ReconstructionReport)>;
}

/// Sparse-binary zero identification followed by BIHT on the residual.
pub struct TwoPart;

impl Reconstructor for TwoPart {
    fn name(&self) -> &'static str {
        "sudo-biht"
    }

    fn run(&self, trial: &Trial) -> Result<(Vec<f64>, ReconstructionReport)> {
        run_two_part(&trial.two_part_config())
    }
}

/// BIHT on the full problem.
pub struct Direct;

impl Reconstructor for Direct {
    fn name(&self) -> &'static str {
        "direct-biht"
    }

    fn run(&self, trial: &Trial) -> Result<(Vec<f64>, ReconstructionReport)> {
        run_direct(&trial.direct_config())
    }
}

pub struct Registry {
    entries: Vec<Box<dyn Reconstructor>>,
}

impl Registry {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    /// Registry holding `sudo-biht` and `direct-biht`.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(TwoPart));
        r.register(Box::new(Direct));
        r
    }

    /// Replaces any entry with the same name.
    pub fn register(&mut self, reconstructor: Box<dyn Reconstructor>) {
        self.entries.retain(|e| e.name() != reconstructor.name());
        self.entries.push(reconstructor);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Reconstructor> {
        self.entries.iter().find(|e| e.name() == name).map(|e| e.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.iter().map(|e| e.name())
    }
}

impl Default for Registry {
    fn default() -> Self {
        Self::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_names() {
        let r = Registry::builtin();
        assert_eq!(r.names().collect::<Vec<_>>(), ["sudo-biht", "direct-biht"]);
        assert!(r.get("sudo-biht").is_some());
        assert!(r.get("cosamp").is_none());
    }

    #[test]
    fn register_replaces_by_name() {
        let mut r = Registry::builtin();
        r.register(Box::new(Direct));
        assert_eq!(r.names().count(), 2);
        assert_eq!(r.names().last(), Some("direct-biht"));
    }
}
