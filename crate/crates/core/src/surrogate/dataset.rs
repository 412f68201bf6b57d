//! Training data for the surrogate: random straight-tunnel missions and their
//! maximum position uncertainty.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::geometry::TunnelTopology;
use crate::planner::plan_straight;
use crate::sim::montecarlo::with_workers;
use crate::sim::{derive_seed, run_mission, MissionParams};

/// Sampling domains of the six inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domains {
    pub v: Vec<f64>,
    /// Speed noise as a fraction of the speed.
    pub sigma_v_ratio: Vec<f64>,
    pub rho_max: Vec<f64>,
    pub sigma_range: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Continuous range of the tunnel length.
    pub length: [f64; 2],
}

fn grid(lo: f64, step: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + step * k as f64).collect()
}

impl Default for Domains {
    fn default() -> Self {
        Domains {
            v: grid(2.0, 0.5, 7),
            sigma_v_ratio: vec![0.1, 0.2],
            rho_max: grid(50.0, 5.0, 11),
            sigma_range: vec![0.1, 0.6, 1.1, 1.6, 2.1],
            lambda: grid(0.0, 0.05, 15),
            // Shorter missions end within a few ticks.
            length: [10.0, 600.0],
        }
    }
}

impl Domains {
    pub fn validate(&self) -> Result<()> {
        let lists = [
            ("v", &self.v),
            ("sigma_v_ratio", &self.sigma_v_ratio),
            ("rho_max", &self.rho_max),
            ("sigma_range", &self.sigma_range),
            ("lambda", &self.lambda),
        ];
        for (field, values) in lists {
            if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                return Err(param(field, "domain must be a nonempty list of finite values"));
            }
        }
        if self.v.iter().chain(&self.rho_max).any(|v| *v <= 0.0) {
            return Err(param("v/rho_max", "domain values must be positive"));
        }
        if self.sigma_v_ratio.iter().chain(&self.sigma_range).any(|v| *v < 0.0) {
            return Err(param("noise", "domain values must be >= 0"));
        }
        if self.lambda.iter().any(|l| !(0.0..1.0).contains(l)) {
            return Err(param("lambda", "domain values must lie in [0, 1)"));
        }
        let [lo, hi] = self.length;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(param("length", format!("need 0 < lo <= hi, got [{lo}, {hi}]")));
        }
        Ok(())
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> [f64; 6] {
        let pick = |rng: &mut R, v: &[f64]| v[rng.random_range(0..v.len())];
        let v = pick(rng, &self.v);
        let sigma_v = pick(rng, &self.sigma_v_ratio) * v;
        let rho = pick(rng, &self.rho_max);
        let sigma_range = pick(rng, &self.sigma_range);
        let [lo, hi] = self.length;
        let length = if lo < hi { rng.random_range(lo..=hi) } else { lo };
        let lambda = pick(rng, &self.lambda);
        [v, sigma_v, rho, sigma_range, length, lambda]
    }
}

/// Everything about the data-generating missions that is not a network input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Template for the missions; speed, noise and range come from the inputs.
    pub mission: MissionParams,
    /// Corridor width. Walls do not block ranging in a straight tunnel, so
    /// the default is wide enough that strongly drifting high-noise draws
    /// are not aborted for touching a wall.
    pub width: f64,
    pub offset: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            mission: MissionParams {
                record_ticks: false,
                ..MissionParams::speed_noise_only(3.0, 0.3, 90.0, 0.1)
            },
            width: 200.0,
            offset: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub v: f64,
    pub sigma_v: f64,
    pub rho_max: f64,
    pub sigma_range: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub lambda: f64,
    pub p_max: f64,
    pub split: Split,
}

impl Sample {
    pub fn inputs(&self) -> [f64; 6] {
        [
            self.v,
            self.sigma_v,
            self.rho_max,
            self.sigma_range,
            self.length,
            self.lambda,
        ]
    }

    fn from_inputs(x: [f64; 6], p_max: f64, split: Split) -> Self {
        Sample {
            v: x[0],
            sigma_v: x[1],
            rho_max: x[2],
            sigma_range: x[3],
            length: x[4],
            lambda: x[5],
            p_max,
            split,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
}

/// Maximum position uncertainty of one straight-tunnel mission with drop
/// distance `rho_max * (1 - lambda)`.
pub fn simulate_p_max(inputs: &[f64; 6], config: &SimConfig, seed: u64) -> Result<f64> {
    let [v, sigma_v, rho_max, sigma_range, length, lambda] = *inputs;
    let topology = TunnelTopology::straight(length, config.width)?;
    let (schedule, _) = plan_straight(length, rho_max * (1.0 - lambda), config.offset)?;
    let mut params = config.mission.clone();
    params.v = v;
    params.noise.sigma_v = sigma_v;
    params.noise.sigma_range = sigma_range;
    params.rho_max = rho_max;
    params.seed = seed;
    Ok(run_mission(&topology, &schedule, &params)?.p_max())
}

/// Draws `n` input rows uniformly from `domains`, simulates one mission per
/// row and tags a random 70/20/10 train/val/test split. Rows are independent
/// and generated in parallel; the result depends only on `seed`.
pub fn generate_dataset(domains: &Domains, n: usize, config: &SimConfig, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(param("n", "must be at least 1"));
    }
    domains.validate()?;
    let splits = split_tags(n, seed);
    let samples = with_workers(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
                let x = domains.draw(&mut rng);
                let p = simulate_p_max(&x, config, rng.next_u64())?;
                Ok(Sample::from_inputs(x, p, splits[i]))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SampleSet { samples })
}

/// Split tag per row: a seeded shuffle with 70% train, 20% val, rest test.
fn split_tags(n: usize, seed: u64) -> Vec<Split> {
    let n_train = (0.7 * n as f64).round() as usize;
    let n_val = ((0.2 * n as f64).round() as usize).min(n - n_train);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5711));
    let mut tags = vec![Split::Test; n];
    for (rank, &i) in order.iter().enumerate() {
        if rank < n_train {
            tags[i] = Split::Train;
        } else if rank < n_train + n_val {
            tags[i] = Split::Val;
        }
    }
    tags
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(move |s| s.split == split)
    }

    pub fn count(&self, split: Split) -> usize {
        self.split(split).count()
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for s in &self.samples {
            w.serialize(s)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        let expected = [
            "v",
            "sigma_v",
            "rho_max",
            "sigma_range",
            "L",
            "lambda",
            "p_max",
            "split",
        ];
        if headers.iter().ne(expected) {
            return Err(param(
                "dataset",
                format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>()),
            ));
        }
        let mut samples = Vec::new();
        for (row, rec) in r.deserialize::<Sample>().enumerate() {
            let s = rec?;
            if s.inputs().iter().chain([&s.p_max]).any(|v| !v.is_finite()) {
                return Err(param("dataset", format!("row {} has non-finite values", row + 1)));
            }
            samples.push(s);
        }
        Ok(SampleSet { samples })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        SampleSet::read_csv(std::fs::File::open(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_domains_match_grid() {
        let d = Domains::default();
        assert_eq!(d.v, vec![2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0]);
        assert_eq!(d.rho_max.len(), 11);
        assert_eq!(*d.rho_max.last().unwrap(), 100.0);
        assert_eq!(d.lambda.len(), 15);
        assert!((d.lambda[14] - 0.7).abs() < 1e-12);
        assert!(d.validate().is_ok());
    }

    #[test]
    fn draws_stay_in_domain() {
        let d = Domains::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let x = d.draw(&mut rng);
            assert!(d.v.contains(&x[0]));
            assert!(d.sigma_v_ratio.iter().any(|r| (r * x[0] - x[1]).abs() < 1e-12));
            assert!(d.rho_max.contains(&x[2]));
            assert!(d.sigma_range.contains(&x[3]));
            assert!(x[4] >= 10.0 && x[4] <= 600.0);
            assert!(d.lambda.contains(&x[5]));
        }
    }

    #[test]
    fn split_fractions() {
        let tags = split_tags(1000, 4);
        let count = |s| tags.iter().filter(|t| **t == s).count();
        assert_eq!(
            (count(Split::Train), count(Split::Val), count(Split::Test)),
            (700, 200, 100)
        );
        assert_eq!(split_tags(1000, 4), tags);
    }

    fn fixed(x: [f64; 6]) -> Domains {
        Domains {
            v: vec![x[0]],
            sigma_v_ratio: vec![x[1] / x[0]],
            rho_max: vec![x[2]],
            sigma_range: vec![x[3]],
            length: [x[4], x[4]],
            lambda: vec![x[5]],
        }
    }

    #[test]
    fn fixed_inputs_same_seed_are_identical() {
        let d = fixed([3.0, 0.3, 90.0, 0.1, 120.0, 0.2]);
        let a = generate_dataset(&d, 2, &SimConfig::default(), 8).unwrap();
        let b = generate_dataset(&d, 2, &SimConfig::default(), 8).unwrap();
        assert_eq!(a, b);
        assert!(generate_dataset(&d, 0, &SimConfig::default(), 8).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let d = Domains {
            length: [10.0, 60.0],
            ..Domains::default()
        };
        let set = generate_dataset(&d, 12, &SimConfig::default(), 1).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("v,sigma_v,rho_max,sigma_range,L,lambda,p_max,split\n"));
        assert_eq!(SampleSet::read_csv(buf.as_slice()).unwrap(), set);
        assert!(SampleSet::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    fn median_p(x: [f64; 6]) -> f64 {
        let config = SimConfig::default();
        let p: Vec<f64> = (0..10)
            .map(|k| simulate_p_max(&x, &config, derive_seed(77, k)).unwrap())
            .collect();
        crate::stats::median(&p)
    }

    #[test]
    fn more_overlap_lowers_uncertainty() {
        let dense = median_p([3.0, 0.3, 80.0, 0.6, 300.0, 0.7]);
        let sparse = median_p([3.0, 0.3, 80.0, 0.6, 300.0, 0.0]);
        assert!(dense <= sparse, "{dense} > {sparse}");
    }

    #[test]
    fn longer_tunnel_raises_uncertainty() {
        let short = median_p([3.0, 0.3, 80.0, 0.6, 150.0, 0.3]);
        let long = median_p([3.0, 0.3, 80.0, 0.6, 300.0, 0.3]);
        assert!(long >= short, "{long} < {short}");
    }
}
