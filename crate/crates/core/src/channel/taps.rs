use serde::{Deserialize, Serialize};

/// Relative T-F displacement `(δn, δm)` between the interfering and the
/// observed symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TapIndex {
    pub dn: i32,
    pub dm: i32,
}

impl TapIndex {
    pub const DESIRED: TapIndex = TapIndex { dn: 0, dm: 0 };

    pub const fn new(dn: i32, dm: i32) -> Self {
        Self { dn, dm }
    }

    pub fn is_desired(&self) -> bool {
        *self == Self::DESIRED
    }

    /// `δn ≠ 0`.
    pub fn is_isi(&self) -> bool {
        self.dn != 0
    }

    /// `δn = 0, δm ≠ 0`.
    pub fn is_ici(&self) -> bool {
        self.dn == 0 && self.dm != 0
    }
}

/// Truncated set of taps included in the channel simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TapSet {
    taps: Vec<TapIndex>,
}

impl TapSet {
    /// Only `(0, 0)`: the bi-orthogonal (flat-fading) model.
    pub fn desired_only() -> Self {
        Self { taps: vec![TapIndex::DESIRED] }
    }

    /// All taps with `|δn| ≤ max_dn`, `|δm| ≤ max_dm`.
    pub fn truncated(max_dn: u32, max_dm: u32) -> Self {
        let (dn, dm) = (max_dn as i32, max_dm as i32);
        let mut taps = Vec::with_capacity(((2 * dn + 1) * (2 * dm + 1)) as usize);
        for a in -dn..=dn {
            for b in -dm..=dm {
                taps.push(TapIndex::new(a, b));
            }
        }
        Self { taps }
    }

    /// Default truncation `|δn| ≤ 2`, `|δm| ≤ min(M − 1, 50)`.
    pub fn default_for(m: usize) -> Self {
        Self::truncated(2, (m.saturating_sub(1)).min(50) as u32)
    }

    pub fn from_taps(mut taps: Vec<TapIndex>) -> Self {
        taps.sort();
        taps.dedup();
        Self { taps }
    }

    pub fn contains(&self, tap: TapIndex) -> bool {
        self.taps.contains(&tap)
    }

    pub fn iter(&self) -> impl Iterator<Item = TapIndex> + '_ {
        self.taps.iter().copied()
    }

    pub fn interference(&self) -> impl Iterator<Item = TapIndex> + '_ {
        self.iter().filter(|t| !t.is_desired())
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }
}
