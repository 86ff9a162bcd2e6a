//! Recognising joint-training and multi-step architectures, and grouping
//! modules that share parameters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use super::{ModuleKind, ModuleRef, Mtag};
use crate::model::TaskId;

/// Share-completeness threshold, a fraction in `(0, 1]` kept as an exact
/// ratio. Parses `"1"`, `"0.8"` or `"4/5"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Theta {
    num: u64,
    den: u64,
}

impl Theta {
    pub const ONE: Theta = Theta { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Self, String> {
        if den == 0 || num == 0 || num > den {
            return Err(format!("theta must lie in (0, 1], got {num}/{den}"));
        }
        let g = gcd(num, den);
        Ok(Theta {
            num: num / g,
            den: den / g,
        })
    }

    /// `part / whole >= theta`; an empty whole counts as fully shared.
    pub fn admits(&self, part: usize, whole: usize) -> bool {
        if whole == 0 {
            return true;
        }
        part as u128 * self.den as u128 >= self.num as u128 * whole as u128
    }
}

impl Default for Theta {
    fn default() -> Self {
        Theta::ONE
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl FromStr for Theta {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("invalid theta {s:?}");
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = n.trim().parse().map_err(|_| bad())?;
            let d = d.trim().parse().map_err(|_| bad())?;
            return Theta::new(n, d);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty() || frac.len() > 18 {
            return Err(bad());
        }
        if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let num = int
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac))
            .ok_or_else(bad)?;
        Theta::new(num, den)
    }
}

impl TryFrom<String> for Theta {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Theta> for String {
    fn from(t: Theta) -> Self {
        t.to_string()
    }
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    JointTraining,
    MultiStep,
    Hybrid,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::JointTraining => "JointTraining",
            Classification::MultiStep => "MultiStep",
            Classification::Hybrid => "Hybrid",
        })
    }
}

/// Joint training: every encoder feeds only its own decoder and at least
/// `theta` of all cross-task encoder and decoder pairs share. Multi-step:
/// some ordering of the tasks makes the decoder passes contain the chain of
/// consecutive decoders, no decoders share, and at least `theta` of encoder
/// pairs share. Anything else is a hybrid.
pub fn classify(arch: &Mtag, theta: Theta) -> Classification {
    let n = arch.tasks().len();
    let pairs = n * n.saturating_sub(1) / 2;
    let shared_enc = arch
        .r_share()
        .iter()
        .filter(|p| p.kind() == ModuleKind::Encoder)
        .count();
    let shared_dec = arch.r_share().len() - shared_enc;

    let only_self_passes = arch.r_pass().iter().all(|p| p.is_self_pass());
    if only_self_passes && theta.admits(shared_enc + shared_dec, 2 * pairs) {
        return Classification::JointTraining;
    }
    if shared_dec == 0 && theta.admits(shared_enc, pairs) && has_decoder_chain(arch) {
        return Classification::MultiStep;
    }
    Classification::Hybrid
}

/// Whether the decoder-to-decoder passes contain a path through every task.
pub fn has_decoder_chain(arch: &Mtag) -> bool {
    let tasks = arch.tasks();
    let n = tasks.len();
    if n <= 1 {
        return true;
    }
    let pos: BTreeMap<&TaskId, usize> = tasks.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut succ = vec![BTreeSet::new(); n];
    for (from, to) in arch.decoder_passes() {
        succ[pos[from]].insert(pos[to]);
    }

    if let Some(order) = topological_order(&succ) {
        return order.windows(2).all(|w| succ[w[0]].contains(&w[1]));
    }
    if n > 20 {
        log::warn!("cyclic decoder passes over {n} tasks; chain search skipped");
        return false;
    }
    // reach[mask] has bit v set when some path visits exactly `mask` and ends at v
    let full = (1usize << n) - 1;
    let mut reach = vec![0u32; 1 << n];
    for v in 0..n {
        reach[1 << v] |= 1 << v;
    }
    for mask in 1..=full {
        let ends = reach[mask];
        if ends == 0 {
            continue;
        }
        for v in (0..n).filter(|v| ends & (1 << v) != 0) {
            for &w in &succ[v] {
                if mask & (1 << w) == 0 {
                    reach[mask | (1 << w)] |= 1 << w;
                }
            }
        }
    }
    reach[full] != 0
}

fn topological_order(succ: &[BTreeSet<usize>]) -> Option<Vec<usize>> {
    let n = succ.len();
    let mut indeg = vec![0usize; n];
    for s in succ {
        for &w in s {
            indeg[w] += 1;
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &w in &succ[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.insert(w);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Connected components of the sharing relation, split by module kind.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharingGroups {
    pub encoders: Vec<BTreeSet<ModuleRef>>,
    pub decoders: Vec<BTreeSet<ModuleRef>>,
}

impl SharingGroups {
    pub fn iter(&self) -> impl Iterator<Item = &BTreeSet<ModuleRef>> {
        self.encoders.iter().chain(&self.decoders)
    }
}

pub fn sharing_groups(arch: &Mtag) -> SharingGroups {
    let modules: Vec<&ModuleRef> = arch
        .r_share()
        .iter()
        .flat_map(|p| [p.first(), p.second()])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let pos: BTreeMap<&ModuleRef, usize> =
        modules.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let mut uf = UnionFind::new(modules.len());
    for p in arch.r_share() {
        uf.union(pos[p.first()], pos[p.second()]);
    }
    let mut groups: BTreeMap<usize, BTreeSet<ModuleRef>> = BTreeMap::new();
    for (i, m) in modules.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().insert((*m).clone());
    }
    let mut out = SharingGroups::default();
    let mut all: Vec<BTreeSet<ModuleRef>> = groups.into_values().collect();
    all.sort();
    for g in all {
        match g.first().map(|m| m.kind) {
            Some(ModuleKind::Encoder) => out.encoders.push(g),
            Some(ModuleKind::Decoder) => out.decoders.push(g),
            None => {}
        }
    }
    out
}
