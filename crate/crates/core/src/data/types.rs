use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::nn::FeatureMap;
use crate::{Error, Result};

pub const SAMPLE_RATE_HZ: f64 = 120.0;
/// `f_x, f_y, f_z, ω_x, ω_y, ω_z`.
pub const CHANNELS: usize = 6;

macro_rules! string_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::Input(format!(
                        concat!("unknown ", stringify!($name), " '{}'"), other
                    ))),
                }
            }
        }
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClinicalClass {
    Healthy,
    Orthopedic,
    Neurological,
}
string_enum!(ClinicalClass { Healthy => "healthy", Orthopedic => "orthopedic", Neurological => "neurological" });

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// Top of the back.
    Head,
    /// Lower back.
    Tail,
    /// Collar.
    Neck,
}
string_enum!(Placement { Head => "head", Tail => "tail", Neck => "neck" });

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Walk,
    Trot,
}
string_enum!(Protocol { Walk => "walk", Trot => "trot" });

/// A single placement, or every placement pooled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlacementSelector {
    Head,
    Tail,
    Neck,
    All,
}
string_enum!(PlacementSelector { Head => "head", Tail => "tail", Neck => "neck", All => "all" });

impl PlacementSelector {
    pub fn matches(&self, placement: Placement) -> bool {
        match self {
            PlacementSelector::All => true,
            PlacementSelector::Head => placement == Placement::Head,
            PlacementSelector::Tail => placement == Placement::Tail,
            PlacementSelector::Neck => placement == Placement::Neck,
        }
    }
}

impl From<Placement> for PlacementSelector {
    fn from(p: Placement) -> Self {
        match p {
            Placement::Head => PlacementSelector::Head,
            Placement::Tail => PlacementSelector::Tail,
            Placement::Neck => PlacementSelector::Neck,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// healthy / orthopedic / neurological
    Multi,
    /// healthy / non-healthy
    Binary,
    /// orthopedic / neurological; healthy dogs are dropped
    Diagnosis,
}
string_enum!(Task { Multi => "multi", Binary => "binary", Diagnosis => "diagnosis" });

/// Mapping from clinical class to the task's class index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task: Task,
}

impl TaskSpec {
    pub fn new(task: Task) -> Self {
        Self { task }
    }

    pub fn num_classes(&self) -> usize {
        match self.task {
            Task::Multi => 3,
            Task::Binary | Task::Diagnosis => 2,
        }
    }

    /// `None` when the class is outside the task's domain.
    pub fn label(&self, class: ClinicalClass) -> Option<usize> {
        use ClinicalClass::*;
        match (self.task, class) {
            (Task::Multi, Healthy) => Some(0),
            (Task::Multi, Orthopedic) => Some(1),
            (Task::Multi, Neurological) => Some(2),
            (Task::Binary, Healthy) => Some(0),
            (Task::Binary, Orthopedic | Neurological) => Some(1),
            (Task::Diagnosis, Healthy) => None,
            (Task::Diagnosis, Orthopedic) => Some(0),
            (Task::Diagnosis, Neurological) => Some(1),
        }
    }

    /// Class names in confusion-matrix order.
    pub fn class_names(&self) -> Vec<&'static str> {
        match self.task {
            Task::Multi => vec!["healthy", "orthopedic", "neurological"],
            Task::Binary => vec!["healthy", "non-healthy"],
            Task::Diagnosis => vec!["orthopedic", "neurological"],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DogId(pub String);

impl DogId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One sensor's trace for one dog and gait protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct ImuRecording {
    pub dog_id: DogId,
    pub class: ClinicalClass,
    pub placement: Placement,
    pub protocol: Protocol,
    pub sample_rate: f64,
    /// Time-ordered `[f_x, f_y, f_z, ω_x, ω_y, ω_z]`; accel in g, gyro in °/s.
    pub samples: Vec<[f64; CHANNELS]>,
}

impl ImuRecording {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn describe(&self) -> String {
        format!("{}/{}/{}", self.dog_id, self.placement, self.protocol)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub dog_id: DogId,
    pub placement: Placement,
    pub protocol: Protocol,
    pub start: usize,
    /// Rotation angle in degrees when the window is an augmented copy.
    pub augmented: Option<f64>,
}

/// A `6 × window` slice with its task-relative label.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledWindow {
    pub values: FeatureMap,
    pub label: usize,
    pub provenance: Provenance,
}
