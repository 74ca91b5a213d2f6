//! Seeded instance generation over a grid of factory, job and machine counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use carbonflow_core::model::{Coefficients, Instance};

use crate::seeds::instance_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub factories: Vec<usize>,
    pub jobs: Vec<usize>,
    pub machines: Vec<usize>,
    pub instances_per_combination: usize,
    /// Generate only this many instances, dealt round-robin over the
    /// combinations. `None` generates the full grid.
    pub total: Option<usize>,
    pub seed: u64,
    /// Inclusive integer range of processing times.
    pub processing_time: [u64; 2],
    /// Processing power range; sampled with two decimals.
    pub processing_power: [f64; 2],
    /// Auxiliary coefficient range; sampled with three decimals.
    pub aux_coeff: [f64; 2],
    pub idle_power: f64,
    pub elec_coeff: f64,
    pub offon_emission: f64,
    pub offon_time: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            factories: vec![2, 3, 4, 5, 6],
            jobs: vec![20, 50, 100],
            machines: vec![2, 5, 8],
            instances_per_combination: 10,
            total: None,
            seed: 20_240_501,
            processing_time: [10, 50],
            processing_power: [5.0, 10.0],
            aux_coeff: [0.05, 0.1],
            idle_power: 2.0,
            elec_coeff: 0.581,
            offon_emission: 6.0,
            offon_time: 3.0,
        }
    }
}

/// Integer grid `lo*scale ..= hi*scale`.
fn scaled(range: [f64; 2], scale: f64) -> (u64, u64) {
    ((range[0] * scale).round() as u64, (range[1] * scale).round() as u64)
}

impl GeneratorConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let cfg: GeneratorConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, grid) in [("factories", &self.factories), ("jobs", &self.jobs), ("machines", &self.machines)] {
            if grid.is_empty() || grid.contains(&0) {
                return Err(format!("{name} must be a non-empty list of positive counts"));
            }
        }
        if self.instances_per_combination == 0 {
            return Err("instances_per_combination must be positive".into());
        }
        let [lo, hi] = self.processing_time;
        if lo == 0 || lo > hi {
            return Err(format!("processing_time range [{lo}, {hi}] must be positive and non-empty"));
        }
        for (name, r) in [("processing_power", self.processing_power), ("aux_coeff", self.aux_coeff)] {
            if !(r[0] >= 0.0 && r[0] <= r[1] && r[1].is_finite()) {
                return Err(format!("{name} range [{}, {}] must be non-negative and non-empty", r[0], r[1]));
            }
        }
        for (name, v) in [
            ("idle_power", self.idle_power),
            ("elec_coeff", self.elec_coeff),
            ("offon_emission", self.offon_emission),
            ("offon_time", self.offon_time),
        ] {
            if !(v >= 0.0) {
                return Err(format!("{name} must be non-negative"));
            }
        }
        Ok(())
    }

    /// Every (F, n, m) combination in grid order.
    pub fn combinations(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for &f in &self.factories {
            for &n in &self.jobs {
                for &m in &self.machines {
                    out.push((f, n, m));
                }
            }
        }
        out
    }

    /// (F, n, m, index) of each instance to generate.
    pub fn plan(&self) -> Vec<(usize, usize, usize, usize)> {
        let combos = self.combinations();
        match self.total {
            None => combos
                .iter()
                .flat_map(|&(f, n, m)| (0..self.instances_per_combination).map(move |i| (f, n, m, i)))
                .collect(),
            Some(total) => (0..total)
                .map(|i| {
                    let (f, n, m) = combos[i % combos.len()];
                    (f, n, m, i / combos.len())
                })
                .collect(),
        }
    }
}

pub fn instance_id(f: usize, n: usize, m: usize, index: usize) -> String {
    format!("f{f}_n{n}_m{m}_{index:02}")
}

/// One instance, a pure function of the configuration and its id.
pub fn generate_instance(cfg: &GeneratorConfig, f: usize, n: usize, m: usize, index: usize) -> Instance {
    let id = instance_id(f, n, m, index);
    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(cfg.seed, &id));
    let [plo, phi] = cfg.processing_time;
    let p = (0..n).map(|_| (0..m).map(|_| rng.gen_range(plo..=phi)).collect()).collect();
    let (wlo, whi) = scaled(cfg.processing_power, 100.0);
    let pp = (0..n)
        .map(|_| (0..m).map(|_| rng.gen_range(wlo..=whi) as f64 / 100.0).collect())
        .collect();
    let (alo, ahi) = scaled(cfg.aux_coeff, 1000.0);
    let aux_coeff = (0..m).map(|_| rng.gen_range(alo..=ahi) as f64 / 1000.0).collect();
    let coefficients = Coefficients {
        idle_power: cfg.idle_power,
        elec_coeff: cfg.elec_coeff,
        aux_coeff,
        offon_emission: cfg.offon_emission,
        offon_time: cfg.offon_time,
    };
    Instance::new(id, f, p, pp, coefficients).expect("validated generator ranges")
}

pub fn generate_instances(cfg: &GeneratorConfig) -> Vec<Instance> {
    cfg.plan()
        .into_iter()
        .map(|(f, n, m, i)| generate_instance(cfg, f, n, m, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_grid_has_450_instances() {
        let cfg = GeneratorConfig::default();
        assert_eq!(cfg.plan().len(), 450);
    }

    #[test]
    fn round_robin_slice() {
        let cfg = GeneratorConfig {
            factories: vec![2, 3],
            jobs: vec![20],
            machines: vec![2, 5],
            total: Some(10),
            ..GeneratorConfig::default()
        };
        let ids: Vec<String> = cfg.plan().iter().map(|&(f, n, m, i)| instance_id(f, n, m, i)).collect();
        assert_eq!(ids[0], "f2_n20_m2_00");
        assert_eq!(ids[4], "f2_n20_m2_01");
        assert_eq!(ids[9], "f2_n20_m5_02");
    }

    #[test]
    fn values_in_range_and_fixed_precision() {
        let cfg = GeneratorConfig::default();
        let inst = generate_instance(&cfg, 3, 50, 8, 4);
        assert!(inst.proc_times().iter().flatten().all(|&p| (10..=50).contains(&p)));
        for &w in inst.proc_powers().iter().flatten() {
            assert!((5.0..=10.0).contains(&w));
            assert_eq!(((w * 100.0).round() / 100.0).to_bits(), w.to_bits());
        }
        assert!(inst.coefficients().aux_coeff.iter().all(|a| (0.05..=0.1).contains(a)));
        assert_eq!(inst, generate_instance(&cfg, 3, 50, 8, 4));
    }

    #[test]
    fn config_from_toml() {
        let cfg = GeneratorConfig::from_toml("factories = [2]\njobs = [5]\nmachines = [3]\nseed = 9\n").unwrap();
        assert_eq!((cfg.seed, cfg.plan().len()), (9, 10));
        assert!(GeneratorConfig::from_toml("jobs = []").is_err());
        assert!(GeneratorConfig::from_toml("processing_time = [20, 10]").is_err());
        assert!(GeneratorConfig::from_toml("colour = 1").is_err());
    }
}
