//! Deterministic synthetic re-identification features.
//!
//! Each identity has a centroid drawn from a standard normal. Each camera
//! adds one shared offset vector, and each image adds independent noise.
//! Images from camera 1 are probes, all others gallery.
//!
//! Randomness is fully specified so the same fixture can be rebuilt in any
//! language:
//!
//! * generator: xoshiro256++ seeded with `seed` through SplitMix64
//!   (`Xoshiro256PlusPlus::seed_from_u64`);
//! * uniforms: `(next_u64() >> 11) * 2^-53`, in `[0, 1)`;
//! * normals: Box-Muller, one normal per pair of uniforms,
//!   `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`;
//! * draw order: all centroids (identity-major, then coordinate), then all
//!   camera offsets (camera-major), then per-image noise in output row order.
//!
//! Rows are emitted identity-major, then camera `1..=cams`, then image.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::features::{FeatureSet, Label, Role};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub num_identities: usize,
    pub cams: usize,
    /// Images per identity per camera.
    pub per_cam: usize,
    pub dim: usize,
    pub intra_sigma: f64,
    pub cam_shift_sigma: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// The calibrated benchmark: 40 identities, 2 cameras, 5 images each,
    /// 32 dimensions. The median baseline mAP over seeds is about 0.65.
    pub fn benchmark(seed: u64) -> Self {
        Self {
            num_identities: 40,
            cams: 2,
            per_cam: 5,
            dim: 32,
            intra_sigma: BENCHMARK_INTRA_SIGMA,
            cam_shift_sigma: BENCHMARK_CAM_SHIFT_SIGMA,
            seed,
        }
    }

    pub fn total(&self) -> usize {
        self.num_identities * self.cams * self.per_cam
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_identities == 0 || self.per_cam == 0 || self.dim == 0 {
            return Err(Error::invalid("identity, image and dimension counts must be at least 1"));
        }
        if self.cams < 2 {
            return Err(Error::invalid(format!("need at least 2 cameras, got {}", self.cams)));
        }
        for (name, s) in [("intra_sigma", self.intra_sigma), ("cam_shift_sigma", self.cam_shift_sigma)] {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::invalid(format!("{name} must be finite and nonnegative, got {s}")));
            }
        }
        if self.total() < 4 {
            return Err(Error::invalid(format!("spec yields {} images, need at least 4", self.total())));
        }
        Ok(())
    }
}

/// Within-identity noise of the benchmark, found with `examples/calibrate.rs`.
pub const BENCHMARK_INTRA_SIGMA: f64 = 1.05;
/// Per-camera offset scale of the benchmark.
pub const BENCHMARK_CAM_SHIFT_SIGMA: f64 = 0.3;

struct Gaussian(Xoshiro256PlusPlus);

impl Gaussian {
    fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn sample(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    fn vector(&mut self, dim: usize, scale: f64) -> Vec<f64> {
        (0..dim).map(|_| self.sample() * scale).collect()
    }
}

pub fn generate(spec: &SynthSpec) -> Result<FeatureSet> {
    spec.validate()?;
    let mut rng = Gaussian(Xoshiro256PlusPlus::seed_from_u64(spec.seed));
    let centroids: Vec<Vec<f64>> = (0..spec.num_identities)
        .map(|_| rng.vector(spec.dim, 1.0))
        .collect();
    let offsets: Vec<Vec<f64>> = (0..spec.cams)
        .map(|_| rng.vector(spec.dim, spec.cam_shift_sigma))
        .collect();

    let mut vectors = Vec::with_capacity(spec.total() * spec.dim);
    let mut labels = Vec::with_capacity(spec.total());
    for (person, centroid) in centroids.iter().enumerate() {
        for (cam, offset) in offsets.iter().enumerate() {
            for _ in 0..spec.per_cam {
                for (c, o) in centroid.iter().zip(offset) {
                    vectors.push(c + o + rng.sample() * spec.intra_sigma);
                }
                labels.push(Label {
                    person: person as i64,
                    camera: cam as i64 + 1,
                    role: if cam == 0 { Role::Probe } else { Role::Gallery },
                });
            }
        }
    }
    FeatureSet::new(spec.dim, vectors, labels)
}
