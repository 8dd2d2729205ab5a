use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// A point `(z, η)` of the slit holomorphic tangent bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentSample {
    pub z: Vec<Complex64>,
    pub eta: Vec<Complex64>,
}

impl TangentSample {
    pub fn new(z: Vec<Complex64>, eta: Vec<Complex64>) -> Self {
        assert_eq!(z.len(), eta.len());
        TangentSample { z, eta }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// From `4n` reals: `Re z1, Im z1, ..., Re eta1, Im eta1, ...`.
    pub fn from_reals(values: &[f64]) -> Result<Self> {
        if values.is_empty() || !values.len().is_multiple_of(4) {
            return Err(Error::Schema(format!("a sample needs 4n reals, got {}", values.len())));
        }
        let n = values.len() / 4;
        let pairs: Vec<Complex64> = values.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
        Ok(TangentSample::new(pairs[..n].to_vec(), pairs[n..].to_vec()))
    }

    pub fn eta_is_zero(&self) -> bool {
        self.eta.iter().all(|e| e.norm() == 0.0)
    }

    /// Image under the linear change `z' = A z`, `η' = A η`.
    pub fn transformed(&self, a: &Tensor) -> TangentSample {
        let apply = |v: &[Complex64]| -> Vec<Complex64> {
            (0..v.len())
                .map(|i| (0..v.len()).map(|j| a[[i, j]] * v[j]).sum())
                .collect()
        };
        TangentSample::new(apply(&self.z), apply(&self.eta))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub seed: u64,
    pub z_count: usize,
    pub eta_count: usize,
    pub radius: f64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            seed: 42,
            z_count: 8,
            eta_count: 8,
            radius: 0.5,
        }
    }
}

/// Samples grouped by base point: `groups[zi][ei]`. The flat sample index
/// is `zi * eta_count + ei`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub groups: Vec<Vec<TangentSample>>,
}

impl SampleSet {
    pub fn flat(&self) -> Vec<TangentSample> {
        self.groups.iter().flatten().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn map(&self, f: impl Fn(&TangentSample) -> TangentSample) -> SampleSet {
        SampleSet {
            groups: self.groups.iter().map(|g| g.iter().map(&f).collect()).collect(),
        }
    }
}

const ETA_INNER: f64 = 0.25;
const ETA_OUTER: f64 = 1.0;
const MAX_ETA_TRIES: usize = 200;
const MAX_Z_TRIES: usize = 50;

fn disc_point(rng: &mut ChaCha8Rng, r_min: f64, r_max: f64) -> Complex64 {
    let u: f64 = rng.gen_range(r_min * r_min..=r_max * r_max);
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(u.sqrt(), theta)
}

/// Draws `z` uniformly from the polydisc of the plan radius around `base`
/// and `η` componentwise from the annulus `0.25 <= |η_k| <= 1`, keeping
/// only samples accepted by `accept`.
pub fn generate(plan: &SamplePlan, base: &[Complex64], accept: &dyn Fn(&TangentSample) -> bool) -> Result<SampleSet> {
    if plan.z_count == 0 || plan.eta_count == 0 {
        return Err(Error::Schema("sample counts must be at least 1".into()));
    }
    let n = base.len();
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut groups = Vec::with_capacity(plan.z_count);
    for _ in 0..plan.z_count {
        let mut group = None;
        'z: for _ in 0..MAX_Z_TRIES {
            let z: Vec<Complex64> = base
                .iter()
                .map(|b| b + disc_point(&mut rng, 0.0, plan.radius))
                .collect();
            let mut etas = Vec::with_capacity(plan.eta_count);
            let mut tries = 0;
            while etas.len() < plan.eta_count {
                tries += 1;
                if tries > MAX_ETA_TRIES * plan.eta_count {
                    continue 'z;
                }
                let eta = (0..n).map(|_| disc_point(&mut rng, ETA_INNER, ETA_OUTER)).collect();
                let s = TangentSample::new(z.clone(), eta);
                if accept(&s) {
                    etas.push(s);
                }
            }
            group = Some(etas);
            break;
        }
        groups.push(group.ok_or_else(|| Error::Validation {
            message: "no admissible tangent samples found near the base point".into(),
        })?);
    }
    Ok(SampleSet { groups })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_domain() {
        let plan = SamplePlan::default();
        let base = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let a = generate(&plan, &base, &|_| true).unwrap();
        let b = generate(&plan, &base, &|_| true).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
        for s in a.flat() {
            for (z, b) in s.z.iter().zip(&base) {
                assert!((z - b).norm() <= 0.5 + 1e-12);
            }
            for e in &s.eta {
                assert!(e.norm() >= 0.25 - 1e-12 && e.norm() <= 1.0 + 1e-12);
            }
        }
        for g in &a.groups {
            assert!(g.iter().all(|s| s.z == g[0].z));
        }
    }

    #[test]
    fn rejection_exhaustion_is_reported() {
        let plan = SamplePlan {
            z_count: 1,
            eta_count: 1,
            ..Default::default()
        };
        let base = vec![Complex64::new(0.0, 0.0); 2];
        assert!(generate(&plan, &base, &|_| false).is_err());
    }

    #[test]
    fn from_reals_layout() {
        let s = TangentSample::from_reals(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
        assert_eq!(s.z, vec![Complex64::new(1.0, 2.0), Complex64::new(3.0, 4.0)]);
        assert_eq!(s.eta, vec![Complex64::new(5.0, 6.0), Complex64::new(7.0, 8.0)]);
        assert!(TangentSample::from_reals(&[1.0, 2.0]).is_err());
    }
}
