//! Monte Carlo fault-injection campaigns over random diagnosable graphs.

use std::fmt::Write;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::derive_seed;
use super::generator::gen_random_diagnosable_graph;
use crate::error::{Error, Result};
use crate::graph::{detect, generate_syndrome, DiagnosticGraph, FaultSet, FaultyTesterPolicy};
use crate::identification::{identify_escalating, Status};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub n_nodes: usize,
    pub target_kappa: usize,
    pub fault_counts: Vec<usize>,
    /// Trials per fault count, assigned to graphs round-robin.
    pub trials_per_point: usize,
    pub seed: u64,
    pub faulty_policy: String,
    /// Number of random graphs shared by every fault count.
    #[serde(default = "one")]
    pub graphs: usize,
}

fn one() -> usize {
    1
}

impl CampaignSpec {
    pub fn validate(&self) -> Result<FaultyTesterPolicy> {
        if self.trials_per_point == 0 {
            return Err(Error::InvalidArgument("trials_per_point must be at least 1".into()));
        }
        if self.graphs == 0 {
            return Err(Error::InvalidArgument("graphs must be at least 1".into()));
        }
        if self.n_nodes == 0 || 2 * self.target_kappa > self.n_nodes - 1 {
            return Err(Error::InvalidArgument(format!(
                "target_kappa {} not admissible for {} nodes",
                self.target_kappa, self.n_nodes
            )));
        }
        if let Some(&f) = self.fault_counts.iter().find(|&&f| f > self.n_nodes) {
            return Err(Error::InvalidArgument(format!("fault count {f} exceeds {} nodes", self.n_nodes)));
        }
        self.faulty_policy.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignRow {
    pub fault_count: usize,
    pub n_nodes: usize,
    pub trials: usize,
    /// Fraction of trials identified uniquely and exactly.
    pub accuracy: f64,
    pub mean_us: f64,
    pub std_us: f64,
    /// Trials where every faulty node has a fault-free tester.
    pub detection_eligible: usize,
    /// Detection rate over eligible trials; `None` when there are none.
    pub detection_rate: Option<f64>,
    pub ambiguous: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignTable {
    pub spec: CampaignSpec,
    pub rows: Vec<CampaignRow>,
}

pub const CSV_HEADER: &str = "fault_count,n_nodes,accuracy,mean_us,std_us";

pub fn write_csv(rows: &[CampaignRow]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{:.6},{:.3},{:.3}",
            r.fault_count, r.n_nodes, r.accuracy, r.mean_us, r.std_us
        )
        .unwrap();
    }
    out
}

impl CampaignTable {
    pub fn to_csv(&self) -> String {
        write_csv(&self.rows)
    }

    /// Zeroes wall-clock columns so tables compare byte-for-byte.
    pub fn without_timing(mut self) -> Self {
        for r in &mut self.rows {
            r.mean_us = 0.0;
            r.std_us = 0.0;
        }
        self
    }
}

fn every_fault_observed(graph: &DiagnosticGraph, faults: &FaultSet) -> bool {
    faults.iter().all(|j| {
        graph
            .in_edge_indices(j)
            .iter()
            .any(|&k| !faults.contains(graph.edges()[k].0))
    })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Graphs are generated in parallel; identification trials run sequentially
/// so the timing columns are not perturbed by contention. Every random draw
/// comes from a seed derived from `(seed, fault count, trial)`, so the
/// accuracy columns are reproducible.
pub fn run_campaign(spec: &CampaignSpec) -> Result<CampaignTable> {
    let policy = spec.validate()?;
    let graphs: Vec<DiagnosticGraph> = (0..spec.graphs as u64)
        .into_par_iter()
        .map(|g| gen_random_diagnosable_graph(spec.n_nodes, spec.target_kappa, derive_seed(spec.seed, &[0, g])))
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(spec.fault_counts.len());
    for &f in &spec.fault_counts {
        let mut correct = 0usize;
        let mut ambiguous = 0usize;
        let mut eligible = 0usize;
        let mut detected = 0usize;
        let mut times = Vec::with_capacity(spec.trials_per_point);
        for t in 0..spec.trials_per_point {
            let graph = &graphs[t % graphs.len()];
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[1, f as u64, t as u64]));
            let faults: FaultSet = sample(&mut rng, spec.n_nodes, f).into_iter().collect();
            let sigma = generate_syndrome(
                graph,
                &faults,
                &policy,
                derive_seed(spec.seed, &[2, f as u64, t as u64]),
            )?;
            let result = identify_escalating(graph, &sigma, spec.target_kappa)?;
            times.push(result.elapsed_us);
            match result.status {
                Status::Unique if result.fault_set.as_ref() == Some(&faults) => correct += 1,
                Status::Ambiguous => ambiguous += 1,
                _ => {}
            }
            if f > 0 && every_fault_observed(graph, &faults) {
                eligible += 1;
                detected += usize::from(detect(&sigma));
            }
        }
        let (mean_us, std_us) = mean_std(&times);
        rows.push(CampaignRow {
            fault_count: f,
            n_nodes: spec.n_nodes,
            trials: spec.trials_per_point,
            accuracy: correct as f64 / spec.trials_per_point as f64,
            mean_us,
            std_us,
            detection_eligible: eligible,
            detection_rate: (eligible > 0).then(|| detected as f64 / eligible as f64),
            ambiguous,
        });
    }
    Ok(CampaignTable {
        spec: spec.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, kappa: usize, faults: Vec<usize>) -> CampaignSpec {
        CampaignSpec {
            n_nodes: n,
            target_kappa: kappa,
            fault_counts: faults,
            trials_per_point: 40,
            seed: 3,
            faulty_policy: "random-uniform".into(),
            graphs: 4,
        }
    }

    #[test]
    fn zero_faults_always_recovered() {
        let t = run_campaign(&spec(7, 2, vec![0])).unwrap();
        assert_eq!(t.rows[0].accuracy, 1.0);
        assert_eq!(t.rows[0].detection_rate, None);
    }

    #[test]
    fn within_kappa_is_exact() {
        let t = run_campaign(&spec(9, 3, vec![1, 2, 3])).unwrap();
        for r in &t.rows {
            assert_eq!(r.accuracy, 1.0, "f = {}", r.fault_count);
            assert_eq!(r.detection_rate, Some(1.0));
        }
    }

    #[test]
    fn deterministic_without_timing() {
        let s = spec(9, 3, vec![2, 5]);
        let a = run_campaign(&s).unwrap().without_timing().to_csv();
        let b = run_campaign(&s).unwrap().without_timing().to_csv();
        assert_eq!(a, b);
        assert!(a.starts_with("fault_count,n_nodes,accuracy,mean_us,std_us\n"));
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut s = spec(5, 2, vec![1]);
        s.trials_per_point = 0;
        assert!(run_campaign(&s).is_err());
        assert!(run_campaign(&spec(5, 3, vec![1])).is_err());
        assert!(run_campaign(&spec(5, 2, vec![6])).is_err());
        let mut s = spec(5, 2, vec![1]);
        s.faulty_policy = "coin".into();
        assert!(run_campaign(&s).is_err());
    }

    #[test]
    fn mean_std_sample_estimate() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }
}
