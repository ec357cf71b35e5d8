//! Stratified train/validation/test splits.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

pub const DEFAULT_CLASSES: [&str; 9] = [
    "Eggs", "Gnocchi", "Juice", "Ling", "Milk", "Rice", "Strep", "VitC", "Yogurt",
];

/// Train, validation and test fractions.
pub const DEFAULT_SPLIT_FRACTIONS: [f64; 3] = [0.80, 0.18, 0.02];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl core::str::FromStr for Split {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(invalid!("unknown split '{other}'")),
        }
    }
}

impl core::fmt::Display for Split {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledItem {
    pub path: String,
    pub label: String,
}

impl LabeledItem {
    pub fn new(path: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            label: label.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    pub label: String,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub classes: Vec<String>,
    pub entries: Vec<ManifestEntry>,
    pub fractions: [f64; 3],
    pub seed: u64,
}

impl DatasetManifest {
    pub fn count(&self, label: &str, split: Split) -> usize {
        self.entries
            .iter()
            .filter(|e| e.split == split && e.label == label)
            .count()
    }
}

fn check_fractions(fractions: [f64; 3]) -> Result<()> {
    if fractions.iter().any(|f| !(*f >= 0.0 && f.is_finite())) {
        return Err(invalid!("split fractions must be non-negative"));
    }
    let total: f64 = fractions.iter().sum();
    if libm::fabs(total - 1.0) > 1e-9 {
        return Err(invalid!("split fractions sum to {total}, not 1"));
    }
    Ok(())
}

/// Largest-remainder apportionment of `n` items; ties go to the earlier split.
pub fn split_counts(n: usize, fractions: [f64; 3]) -> Result<[usize; 3]> {
    check_fractions(fractions)?;
    let quotas = fractions.map(|f| f * n as f64);
    let mut counts = quotas.map(|q| libm::floor(q) as usize);
    let assigned: usize = counts.iter().sum();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - libm::floor(quotas[a]);
        let rb = quotas[b] - libm::floor(quotas[b]);
        rb.partial_cmp(&ra).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    Ok(counts)
}

/// Shuffles each class with `seed` and apportions it by `fractions`.
///
/// Classes are listed in order of first appearance; entries come out grouped
/// by class, then by split.
pub fn split_dataset(items: &[LabeledItem], fractions: [f64; 3], seed: u64) -> Result<DatasetManifest> {
    check_fractions(fractions)?;
    let mut classes: Vec<String> = Vec::new();
    for item in items {
        if item.label.is_empty() {
            return Err(invalid!("item '{}' has an empty class label", item.path));
        }
        if !classes.contains(&item.label) {
            classes.push(item.label.to_string());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(items.len());
    for class in &classes {
        let mut members: Vec<&LabeledItem> = items.iter().filter(|i| &i.label == class).collect();
        members.shuffle(&mut rng);
        let counts = split_counts(members.len(), fractions)?;
        let mut it = members.into_iter();
        for (split, &count) in Split::ALL.iter().zip(&counts) {
            for item in it.by_ref().take(count) {
                entries.push(ManifestEntry {
                    path: item.path.clone(),
                    label: item.label.clone(),
                    split: *split,
                });
            }
        }
    }
    Ok(DatasetManifest {
        classes,
        entries,
        fractions,
        seed,
    })
}
