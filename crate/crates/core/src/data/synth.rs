use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{
    write_recording, ClinicalClass, DatasetManifest, DogId, ImuRecording, ManifestEntry, Placement, Protocol,
    SAMPLE_RATE_HZ,
};
use crate::{Error, Result};

/// One value per clinical class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerClass<T> {
    pub healthy: T,
    pub orthopedic: T,
    pub neurological: T,
}

impl<T: Copy> PerClass<T> {
    pub fn get(&self, class: ClinicalClass) -> T {
        match class {
            ClinicalClass::Healthy => self.healthy,
            ClinicalClass::Orthopedic => self.orthopedic,
            ClinicalClass::Neurological => self.neurological,
        }
    }
}

/// Gait abnormality knobs for one class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSignature {
    /// Range of the per-dog amplitude difference between alternating half-cycles.
    pub asymmetry: [f64; 2],
    /// Relative standard deviation of the stride-frequency random walk.
    pub phase_jitter: f64,
    /// Relative standard deviation of the amplitude random walk.
    pub amplitude_irregularity: f64,
    /// Multiplier on lateral sway and roll.
    pub sway: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSpec {
    pub dogs: PerClass<usize>,
    /// How many dogs of each class also have trot recordings.
    pub trot_dogs: PerClass<usize>,
    /// Mean active duration per recording, seconds.
    pub walk_secs: PerClass<f64>,
    pub trot_secs: PerClass<f64>,
    /// Relative standard deviation of per-dog durations.
    pub duration_jitter: f64,
    /// Mean length of the still lead-in and lead-out, seconds.
    pub still_secs: f64,
    pub walk_stride_hz: f64,
    pub trot_stride_hz: f64,
    /// Peak vertical acceleration at walk, g.
    pub walk_amplitude_g: f64,
    pub trot_amplitude_ratio: f64,
    pub signatures: PerClass<ClassSignature>,
    /// Spread of the per-dog frequency, amplitude and harmonic idiosyncrasies.
    pub dog_variability: f64,
    /// Standard deviation of the sensor mounting angles, degrees.
    pub mounting_deg: f64,
    pub accel_noise_ug_rthz: f64,
    pub gyro_noise_dps_rthz: f64,
    pub accel_bias_mg: f64,
    pub gyro_bias_deg_h: f64,
    /// Unmodelled body motion during activity.
    pub motion_noise_g: f64,
    pub motion_noise_dps: f64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            dogs: PerClass { healthy: 17, orthopedic: 6, neurological: 6 },
            trot_dogs: PerClass { healthy: 17, orthopedic: 6, neurological: 2 },
            walk_secs: PerClass { healthy: 27.0, orthopedic: 33.0, neurological: 40.0 },
            trot_secs: PerClass { healthy: 18.0, orthopedic: 18.0, neurological: 15.0 },
            duration_jitter: 0.15,
            still_secs: 2.0,
            walk_stride_hz: 1.5,
            trot_stride_hz: 2.5,
            walk_amplitude_g: 0.3,
            trot_amplitude_ratio: 1.6,
            signatures: PerClass {
                healthy: ClassSignature { asymmetry: [0.0, 0.08], phase_jitter: 0.03, amplitude_irregularity: 0.05, sway: 1.0 },
                orthopedic: ClassSignature {
                    asymmetry: [0.3, 0.6],
                    phase_jitter: 0.04,
                    amplitude_irregularity: 0.08,
                    sway: 1.0,
                },
                neurological: ClassSignature {
                    asymmetry: [0.0, 0.15],
                    phase_jitter: 0.25,
                    amplitude_irregularity: 0.35,
                    sway: 2.0,
                },
            },
            dog_variability: 0.15,
            mounting_deg: 8.0,
            accel_noise_ug_rthz: 120.0,
            gyro_noise_dps_rthz: 0.007,
            accel_bias_mg: 0.03,
            gyro_bias_deg_h: 10.0,
            motion_noise_g: 0.02,
            motion_noise_dps: 2.0,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let total = self.dogs.healthy + self.dogs.orthopedic + self.dogs.neurological;
        if total == 0 {
            return Err(Error::config("generator spec has no dogs"));
        }
        for class in ClinicalClass::ALL {
            if self.trot_dogs.get(*class) > self.dogs.get(*class) {
                return Err(Error::config(format!("more trotting than total {class} dogs")));
            }
            let sig = self.signatures.get(*class);
            if !(sig.asymmetry[0] >= 0.0 && sig.asymmetry[0] <= sig.asymmetry[1] && sig.asymmetry[1] < 1.0) {
                return Err(Error::config(format!("{class} asymmetry range must satisfy 0 <= lo <= hi < 1")));
            }
            if !(self.walk_secs.get(*class) > 1.0 && self.trot_secs.get(*class) > 1.0) {
                return Err(Error::config(format!("{class} durations must exceed one second")));
            }
            if sig.phase_jitter < 0.0 || sig.amplitude_irregularity < 0.0 || sig.sway < 0.0 {
                return Err(Error::config(format!("{class} signature values must be non-negative")));
            }
        }
        let non_negative = [
            self.duration_jitter,
            self.still_secs,
            self.dog_variability,
            self.mounting_deg,
            self.accel_noise_ug_rthz,
            self.gyro_noise_dps_rthz,
            self.accel_bias_mg,
            self.gyro_bias_deg_h,
            self.motion_noise_g,
            self.motion_noise_dps,
        ];
        if non_negative.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::config("noise, jitter and variability values must be non-negative"));
        }
        if !(self.walk_stride_hz > 0.0 && self.trot_stride_hz > 0.0 && self.walk_amplitude_g > 0.0) {
            return Err(Error::config("stride frequencies and amplitude must be positive"));
        }
        if !(self.trot_amplitude_ratio > 0.0) || self.duration_jitter >= 0.5 {
            return Err(Error::config("trot ratio must be positive and duration jitter below 0.5"));
        }
        Ok(())
    }

    fn dog_ids(&self) -> Vec<(DogId, ClinicalClass, bool)> {
        let mut out = Vec::new();
        for (class, prefix) in [
            (ClinicalClass::Healthy, 'H'),
            (ClinicalClass::Orthopedic, 'O'),
            (ClinicalClass::Neurological, 'N'),
        ] {
            for i in 0..self.dogs.get(class) {
                let trots = i < self.trot_dogs.get(class);
                out.push((DogId::new(format!("{prefix}{:02}", i + 1)), class, trots));
            }
        }
        out
    }
}

/// Recordings held in memory plus the manifest that will describe them on disk.
#[derive(Clone, Debug)]
pub struct SyntheticDataset {
    pub manifest: DatasetManifest,
    pub recordings: Vec<ImuRecording>,
}

impl SyntheticDataset {
    /// Writes `manifest.csv` and one CSV per recording under `dir`; returns
    /// the manifest path.
    pub fn write_to(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir.join("recordings"))?;
        for (entry, rec) in self.manifest.entries.iter().zip(&self.recordings) {
            write_recording(rec, &dir.join(&entry.path))?;
        }
        let path = dir.join("manifest.csv");
        let mut manifest = self.manifest.clone();
        manifest.base_dir = dir.to_path_buf();
        manifest.save(&path)?;
        Ok(path)
    }
}

/// Per-dog traits shared by all placements and both protocols.
struct DogTraits {
    freq_factor: f64,
    amp_factor: f64,
    asymmetry: f64,
    harmonic: f64,
    harmonic_phase: f64,
    sway_phase: f64,
}

/// Stride phase and amplitude over the active span.
struct LatentGait {
    phase: Vec<f64>,
    amplitude: Vec<f64>,
}

/// Ornstein-Uhlenbeck step with unit stationary variance.
fn ou_step(x: f64, rho: f64, rng: &mut ChaCha8Rng) -> f64 {
    let n: f64 = StandardNormal.sample(rng);
    rho * x + (1.0 - rho * rho).sqrt() * n
}

fn latent_gait(spec: &GeneratorSpec, sig: &ClassSignature, traits: &DogTraits, protocol: Protocol, len: usize, rng: &mut ChaCha8Rng) -> LatentGait {
    let dt = 1.0 / SAMPLE_RATE_HZ;
    let (base_hz, base_amp) = match protocol {
        Protocol::Walk => (spec.walk_stride_hz, spec.walk_amplitude_g),
        Protocol::Trot => (spec.trot_stride_hz, spec.walk_amplitude_g * spec.trot_amplitude_ratio),
    };
    let hz = base_hz * traits.freq_factor;
    let amp = base_amp * traits.amp_factor;
    let rho = (-dt / 0.4f64).exp();
    let mut phase = Vec::with_capacity(len);
    let mut amplitude = Vec::with_capacity(len);
    let mut phi: f64 = rng.gen_range(0.0..TAU);
    let (mut fnoise, mut anoise) = (0.0, 0.0);
    for _ in 0..len {
        fnoise = ou_step(fnoise, rho, rng);
        anoise = ou_step(anoise, rho, rng);
        phi += TAU * hz * (1.0 + sig.phase_jitter * fnoise).max(0.2) * dt;
        phase.push(phi);
        amplitude.push(amp * (1.0 + sig.amplitude_irregularity * anoise).max(0.1));
    }
    LatentGait { phase, amplitude }
}

/// Body-frame motion gains per placement: bounce, surge, sway, roll, pitch, yaw.
fn placement_gains(placement: Placement) -> ([f64; 6], f64) {
    match placement {
        Placement::Head => ([1.0, 0.5, 0.35, 18.0, 12.0, 9.0], 0.0),
        Placement::Tail => ([1.25, 0.45, 0.5, 26.0, 16.0, 14.0], 0.5),
        Placement::Neck => ([0.85, 0.7, 0.45, 22.0, 20.0, 12.0], -0.4),
    }
}

fn rotation(rng: &mut ChaCha8Rng, sd_deg: f64) -> [[f64; 3]; 3] {
    let normal = Normal::new(0.0, sd_deg.to_radians().max(0.0)).expect("finite sd");
    let (a, b, c) = (normal.sample(rng), normal.sample(rng), normal.sample(rng));
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let (sc, cc) = c.sin_cos();
    let rx = [[1.0, 0.0, 0.0], [0.0, ca, -sa], [0.0, sa, ca]];
    let ry = [[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]];
    let rz = [[cc, -sc, 0.0], [sc, cc, 0.0], [0.0, 0.0, 1.0]];
    matmul(&matmul(&rz, &ry), &rx)
}

fn matmul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn apply(r: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2])
}

/// Rounds to the six decimals the CSV writer emits, so in-memory and
/// reloaded recordings agree exactly.
fn quantize(v: f64) -> f64 {
    format!("{v:.6}").parse().expect("formatted float parses")
}

#[allow(clippy::too_many_arguments)]
fn render(
    spec: &GeneratorSpec,
    sig: &ClassSignature,
    traits: &DogTraits,
    gait: &LatentGait,
    placement: Placement,
    lead: usize,
    tail: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<[f64; 6]> {
    let (g, offset) = placement_gains(placement);
    let mount = rotation(rng, spec.mounting_deg);
    let band = (SAMPLE_RATE_HZ / 2.0).sqrt();
    let accel_sd = spec.accel_noise_ug_rthz * 1e-6 * band;
    let gyro_sd = spec.gyro_noise_dps_rthz * band;
    let accel_bias = [(); 3].map(|_| rng.sample::<f64, _>(StandardNormal) * spec.accel_bias_mg * 1e-3);
    let gyro_bias = [(); 3].map(|_| rng.sample::<f64, _>(StandardNormal) * spec.gyro_bias_deg_h / 3600.0);
    let a = traits.asymmetry;

    let mut out = Vec::with_capacity(lead + gait.phase.len() + tail);
    let total = lead + gait.phase.len() + tail;
    for i in 0..total {
        let (accel, gyro) = if (lead..lead + gait.phase.len()).contains(&i) {
            let k = i - lead;
            let phi = gait.phase[k] + offset;
            let amp = gait.amplitude[k];
            let limp = 1.0 + a * phi.cos();
            let bounce = amp
                * g[0]
                * ((2.0 * phi).cos() * limp + traits.harmonic * (3.0 * phi + traits.harmonic_phase).sin());
            let surge = amp * g[1] * (2.0 * phi + 0.6).sin() * limp;
            let sway = amp * g[2] * sig.sway * (phi + traits.sway_phase).sin();
            let m = |rng: &mut ChaCha8Rng, sd: f64| rng.sample::<f64, _>(StandardNormal) * sd;
            let accel = [
                surge + m(rng, spec.motion_noise_g),
                sway + m(rng, spec.motion_noise_g),
                1.0 + bounce + m(rng, spec.motion_noise_g),
            ];
            let gyro = [
                amp * g[3] * sig.sway * (phi + traits.sway_phase + 0.9).sin() + m(rng, spec.motion_noise_dps),
                amp * g[4] * (2.0 * phi + 0.3).cos() * limp + m(rng, spec.motion_noise_dps),
                amp * g[5] * (phi + 0.8).sin() + m(rng, spec.motion_noise_dps),
            ];
            (accel, gyro)
        } else {
            ([0.0, 0.0, 1.0], [0.0; 3])
        };
        let accel = apply(&mount, accel);
        let gyro = apply(&mount, gyro);
        let mut s = [0.0; 6];
        for c in 0..3 {
            s[c] = quantize(accel[c] + accel_bias[c] + rng.sample::<f64, _>(StandardNormal) * accel_sd);
            s[c + 3] = quantize(gyro[c] + gyro_bias[c] + rng.sample::<f64, _>(StandardNormal) * gyro_sd);
        }
        out.push(s);
    }
    out
}

fn jittered(rng: &mut ChaCha8Rng, mean: f64, rel_sd: f64) -> f64 {
    let n: f64 = StandardNormal.sample(rng);
    mean * (1.0 + rel_sd * n).clamp(0.5, 1.5)
}

/// Generates the synthetic cohort: per dog and protocol one latent gait,
/// rendered through each of the three sensor placements.
pub fn synthesize_dataset(spec: &GeneratorSpec, seed: u64) -> Result<SyntheticDataset> {
    spec.validate()?;
    let mut entries = Vec::new();
    let mut recordings = Vec::new();
    for (dog_index, (dog_id, class, trots)) in spec.dog_ids().into_iter().enumerate() {
        let sig = spec.signatures.get(class);
        let mut trait_rng = ChaCha8Rng::seed_from_u64(seed);
        trait_rng.set_stream(dog_index as u64 * 16);
        let v = spec.dog_variability;
        let traits = DogTraits {
            freq_factor: 1.0 + v * trait_rng.gen_range(-1.0..1.0),
            amp_factor: 1.0 + v * trait_rng.gen_range(-1.0..1.0),
            asymmetry: trait_rng.gen_range(sig.asymmetry[0]..=sig.asymmetry[1]),
            harmonic: v * trait_rng.gen_range(0.0..2.0),
            harmonic_phase: trait_rng.gen_range(0.0..TAU),
            sway_phase: v * trait_rng.gen_range(-3.0..3.0),
        };
        let protocols: &[Protocol] = if trots { &[Protocol::Walk, Protocol::Trot] } else { &[Protocol::Walk] };
        for (pi, &protocol) in protocols.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(dog_index as u64 * 16 + 1 + pi as u64 * 4);
            let mean = match protocol {
                Protocol::Walk => spec.walk_secs.get(class),
                Protocol::Trot => spec.trot_secs.get(class),
            };
            let active = (jittered(&mut rng, mean, spec.duration_jitter) * SAMPLE_RATE_HZ) as usize;
            let gait = latent_gait(spec, &sig, &traits, protocol, active, &mut rng);
            for (k, &placement) in Placement::ALL.iter().enumerate() {
                let mut prng = ChaCha8Rng::seed_from_u64(seed);
                prng.set_stream(dog_index as u64 * 16 + 2 + pi as u64 * 4 + k as u64);
                let lead = (jittered(&mut prng, spec.still_secs, 0.25) * SAMPLE_RATE_HZ) as usize;
                let tail = (jittered(&mut prng, spec.still_secs, 0.25) * SAMPLE_RATE_HZ) as usize;
                let samples = render(spec, &sig, &traits, &gait, placement, lead, tail, &mut prng);
                let path = PathBuf::from("recordings").join(format!("{dog_id}_{placement}_{protocol}.csv"));
                entries.push(ManifestEntry { dog_id: dog_id.clone(), class, placement, protocol, path });
                recordings.push(ImuRecording {
                    dog_id: dog_id.clone(),
                    class,
                    placement,
                    protocol,
                    sample_rate: SAMPLE_RATE_HZ,
                    samples,
                });
            }
        }
    }
    Ok(SyntheticDataset { manifest: DatasetManifest { entries, base_dir: PathBuf::new() }, recordings })
}
