use std::collections::BTreeSet;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DogId, LabeledWindow};
use crate::{Error, Result};

/// Splits indices `0..labels.len()` into `(kept, held_out)`. Per-class
/// held-out quotas come from the largest-remainder rule so the total matches
/// `round(n · fraction)`; every class present keeps at least one index. Both
/// halves are returned in ascending order.
pub fn stratified_indices(
    labels: &[usize],
    num_classes: usize,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::config(format!("split fraction must lie in (0, 1), got {fraction}")));
    }
    let mut by_class = vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class
            .get_mut(l)
            .ok_or_else(|| Error::Input(format!("label {l} outside {num_classes} classes")))?
            .push(i);
    }
    if let Some(missing) = by_class.iter().position(Vec::is_empty) {
        return Err(Error::Stratification(format!("class {missing} has no windows")));
    }

    let target = (labels.len() as f64 * fraction).round() as usize;
    let exact: Vec<f64> = by_class.iter().map(|c| c.len() as f64 * fraction).collect();
    let mut quota: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..num_classes).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let mut remaining = target.saturating_sub(quota.iter().sum());
    for &c in order.iter().cycle().take(num_classes * 2) {
        if remaining == 0 {
            break;
        }
        if quota[c] + 1 < by_class[c].len() {
            quota[c] += 1;
            remaining -= 1;
        }
    }
    for (q, c) in quota.iter_mut().zip(&by_class) {
        *q = (*q).min(c.len() - 1);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept = Vec::new();
    let mut held = Vec::new();
    for (mut members, q) in by_class.into_iter().zip(quota) {
        members.shuffle(&mut rng);
        held.extend_from_slice(&members[..q]);
        kept.extend_from_slice(&members[q..]);
    }
    kept.sort_unstable();
    held.sort_unstable();
    Ok((kept, held))
}

fn partition(windows: Vec<LabeledWindow>, held: &[usize]) -> (Vec<LabeledWindow>, Vec<LabeledWindow>) {
    let mut in_held = vec![false; windows.len()];
    for &i in held {
        in_held[i] = true;
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (w, h) in windows.into_iter().zip(in_held) {
        if h {
            b.push(w);
        } else {
            a.push(w);
        }
    }
    (a, b)
}

/// Window-level stratified `(train, test)` split.
pub fn split_random(
    windows: Vec<LabeledWindow>,
    num_classes: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<LabeledWindow>, Vec<LabeledWindow>)> {
    let labels: Vec<usize> = windows.iter().map(|w| w.label).collect();
    let (_, held) = stratified_indices(&labels, num_classes, test_fraction, seed)?;
    Ok(partition(windows, &held))
}

/// Stratified `(train, validation)` carve-out from training windows.
pub fn carve_validation(
    train: Vec<LabeledWindow>,
    num_classes: usize,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<LabeledWindow>, Vec<LabeledWindow>)> {
    let labels: Vec<usize> = train.iter().map(|w| w.label).collect();
    let (_, held) = stratified_indices(&labels, num_classes, fraction, seed)?;
    if held.is_empty() {
        return Err(Error::Stratification("validation split is empty".into()));
    }
    Ok(partition(train, &held))
}

/// Indices of one leave-one-dog-out fold.
#[derive(Clone, Debug, PartialEq)]
pub struct LooFold {
    pub dog_id: DogId,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// One fold per listed dog, in the given order. Dogs without any window are
/// skipped with a warning.
pub fn leave_one_dog_out(windows: &[LabeledWindow], dogs: &[DogId]) -> Vec<LooFold> {
    let mut seen = BTreeSet::new();
    let mut folds = Vec::new();
    for dog in dogs {
        if !seen.insert(dog) {
            continue;
        }
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..windows.len()).partition(|&i| windows[i].provenance.dog_id == *dog);
        if test.is_empty() {
            warn!("dog {dog}: no windows after preprocessing; fold skipped");
            continue;
        }
        folds.push(LooFold { dog_id: dog.clone(), train, test });
    }
    folds
}

/// Pools per-placement window sets into one set of independent samples.
pub fn merge_all_placements<I>(sets: I) -> Vec<LabeledWindow>
where
    I: IntoIterator<Item = Vec<LabeledWindow>>,
{
    sets.into_iter().flatten().collect()
}
