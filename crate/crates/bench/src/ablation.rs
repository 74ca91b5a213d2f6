//! Strategy ablations: full KDMA against the same algorithm with one
//! strategy switched off. All variants share run seeds.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use carbonflow_core::kdma::KdmaParams;
use carbonflow_core::model::Instance;

use crate::experiment::{mean, run_experiment, AlgoConfig, Experiment, Metric, RunOptions, Variant};
use crate::stats::{sign_test, SignTest};

pub const FULL: &str = "full";
pub const WITHOUT_INIT: &str = "without-init";
pub const WITHOUT_LOCAL: &str = "without-local";
pub const NON_CARBON: &str = "non-carbon";

pub fn ablation_variants(base: &KdmaParams) -> Vec<Variant> {
    let v = |label: &str, params: KdmaParams| Variant {
        label: label.to_string(),
        seed_key: "kdma".to_string(),
        config: AlgoConfig::Kdma(params),
    };
    vec![
        v(FULL, base.clone()),
        v(WITHOUT_INIT, KdmaParams { use_collab_init: false, ..base.clone() }),
        v(WITHOUT_LOCAL, KdmaParams { use_local_search: false, ..base.clone() }),
        v(NON_CARBON, KdmaParams { use_carbon_reduction: false, ..base.clone() }),
    ]
}

pub fn run_ablation(instances: Vec<Instance>, base: &KdmaParams, opts: &RunOptions) -> Experiment {
    run_experiment(instances, ablation_variants(base), opts)
}

/// Mean archive carbon per factory count, one value per variant label.
pub fn carbon_by_factory(exp: &Experiment) -> BTreeMap<usize, BTreeMap<String, f64>> {
    let mut out: BTreeMap<usize, BTreeMap<String, f64>> = BTreeMap::new();
    let mut factories: Vec<usize> = exp.instances.iter().map(Instance::num_factories).collect();
    factories.sort_unstable();
    factories.dedup();
    for f in factories {
        let ids: Vec<&str> = exp
            .instances
            .iter()
            .filter(|i| i.num_factories() == f)
            .map(Instance::id)
            .collect();
        for label in exp.labels() {
            let vals: Vec<f64> = exp
                .records
                .iter()
                .filter(|r| r.algorithm == label && ids.contains(&r.instance.as_str()))
                .filter_map(|r| Metric::MeanCarbon.of(r))
                .collect();
            if let Some(m) = mean(&vals) {
                out.entry(f).or_default().insert(label, m);
            }
        }
    }
    out
}

pub fn carbon_csv(exp: &Experiment) -> String {
    let labels = exp.labels();
    let mut s = String::from("F");
    for l in &labels {
        let _ = write!(s, ",{l}");
    }
    s.push('\n');
    for (f, by_label) in carbon_by_factory(exp) {
        let _ = write!(s, "{f}");
        for l in &labels {
            match by_label.get(l) {
                Some(v) => {
                    let _ = write!(s, ",{v:.6}");
                }
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    s
}

/// Sign test of full KDMA against one variant over per-instance mean IGD.
pub fn versus_full(exp: &Experiment, label: &str) -> SignTest {
    let full: BTreeMap<String, f64> = exp.instance_means(FULL, Metric::Igd).into_iter().collect();
    let other: BTreeMap<String, f64> = exp.instance_means(label, Metric::Igd).into_iter().collect();
    let (a, b): (Vec<f64>, Vec<f64>) = full
        .iter()
        .filter_map(|(id, x)| other.get(id).map(|y| (*x, *y)))
        .unzip();
    sign_test(&a, &b)
}

pub fn summary_csv(exp: &Experiment) -> String {
    let mut s = String::from("variant,mean_igd,wins,losses,ties,p_value\n");
    for label in exp.labels() {
        let m = exp.overall_mean(&label, Metric::Igd);
        let _ = write!(s, "{label},{}", m.map_or_else(String::new, |v| format!("{v:.6}")));
        if label == FULL {
            s.push_str(",,,,\n");
        } else {
            let t = versus_full(exp, &label);
            let _ = writeln!(s, ",{},{},{},{:.6}", t.wins, t.losses, t.ties, t.p_value);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variants_differ_only_in_one_flag() {
        let base = KdmaParams::default();
        let vs = ablation_variants(&base);
        assert_eq!(vs.len(), 4);
        assert!(vs.iter().all(|v| v.seed_key == "kdma"));
        let flags = |v: &Variant| match &v.config {
            AlgoConfig::Kdma(p) => (p.use_collab_init, p.use_local_search, p.use_carbon_reduction),
            _ => unreachable!(),
        };
        assert_eq!(flags(&vs[0]), (true, true, true));
        assert_eq!(flags(&vs[1]), (false, true, true));
        assert_eq!(flags(&vs[2]), (true, false, true));
        assert_eq!(flags(&vs[3]), (true, true, false));
    }
}
