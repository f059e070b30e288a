use super::{ImuRecording, LabeledWindow, CHANNELS};
use crate::nn::Tensor;

fn rotate_pair(y: f64, z: f64, cos: f64, sin: f64) -> (f64, f64) {
    (cos * y - sin * z, sin * y + cos * z)
}

/// Rotates every accel and gyro triple about the sensor x-axis by `angle`
/// degrees. The copy is tagged with the angle in its provenance.
pub fn augment_rotate_x(window: &LabeledWindow, angle: f64) -> LabeledWindow {
    let (sin, cos) = angle.to_radians().sin_cos();
    let mut out = window.clone();
    let len = out.values.length();
    let values = out.values.values_mut();
    for (y_ch, z_ch) in [(1, 2), (4, 5)] {
        for t in 0..len {
            let (y, z) = rotate_pair(values[y_ch * len + t], values[z_ch * len + t], cos, sin);
            values[y_ch * len + t] = y;
            values[z_ch * len + t] = z;
        }
    }
    out.provenance.augmented = Some(angle);
    out
}

/// Same rotation applied sample by sample to a whole recording.
pub fn rotate_recording_x(recording: &ImuRecording, angle: f64) -> ImuRecording {
    let (sin, cos) = angle.to_radians().sin_cos();
    let mut out = recording.clone();
    for s in &mut out.samples {
        (s[1], s[2]) = rotate_pair(s[1], s[2], cos, sin);
        (s[4], s[5]) = rotate_pair(s[4], s[5], cos, sin);
    }
    out
}

/// Originals followed by one rotated copy of each. Only ever applied to
/// training windows.
pub fn augment_windows(windows: &[LabeledWindow], angle: f64) -> Vec<LabeledWindow> {
    debug_assert!(windows.iter().all(|w| w.values.channels() == CHANNELS));
    let mut out = windows.to_vec();
    out.extend(windows.iter().map(|w| augment_rotate_x(w, angle)));
    out
}
