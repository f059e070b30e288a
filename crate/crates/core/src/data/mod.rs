//! Recordings, manifests and everything between a raw IMU trace and the
//! labelled windows the network consumes.

mod augment;
mod corpus;
mod io;
mod preprocess;
mod split;
mod synth;
mod types;

pub use augment::{augment_rotate_x, augment_windows, rotate_recording_x};
pub use corpus::{CellData, Corpus, PreprocessConfig};
pub use io::{load_recording, write_recording, DatasetManifest, ManifestEntry, RECORDING_HEADER};
pub use preprocess::{moving_std, trim_inactive, window_series, TrimConfig};
pub use split::{carve_validation, leave_one_dog_out, merge_all_placements, split_random, stratified_indices, LooFold};
pub use synth::{synthesize_dataset, GeneratorSpec, PerClass, SyntheticDataset};
pub use types::{
    ClinicalClass, DogId, ImuRecording, LabeledWindow, Placement, PlacementSelector, Protocol, Provenance, Task,
    TaskSpec, CHANNELS, SAMPLE_RATE_HZ,
};
