//! Betti-number priors over foreground classes and class pairs.
//!
//! A [`BettiPrior`] stores the expected `(b0, b1)` of every union
//! `Y_{i ∪ j}` with `j ≥ i` over the three foreground classes: six pairs,
//! twelve numbers. Priors are plain data and can be read from a small text
//! file with one line per pair:
//!
//! ```text
//! rv rv 1 0
//! my my 1 1
//! ```

use std::fmt;
use std::str::FromStr;

use crate::baseline::betti_mask;
use crate::error::{Error, Result};
use crate::grid::{Class, LabelMask};

/// Betti numbers indexed by dimension.
pub type Betti = [u32; 2];

/// The six `(i, j)` foreground pairs with `j ≥ i`, in canonical order.
pub const PAIRS: [(Class, Class); 6] = [
    (Class::Rv, Class::Rv),
    (Class::Rv, Class::My),
    (Class::Rv, Class::Lv),
    (Class::My, Class::My),
    (Class::My, Class::Lv),
    (Class::Lv, Class::Lv),
];

/// Orders a pair so that `i ≤ j`.
fn canonical(i: Class, j: Class) -> (Class, Class) {
    assert!(
        i != Class::Background && j != Class::Background,
        "priors cover foreground classes only"
    );
    if i <= j { (i, j) } else { (j, i) }
}

fn pair_slot(i: Class, j: Class) -> usize {
    let key = canonical(i, j);
    PAIRS.iter().position(|&p| p == key).expect("foreground pair")
}

/// Expected Betti numbers for every foreground class and class pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BettiPrior {
    entries: [Betti; 6],
}

impl BettiPrior {
    /// All-zero prior.
    pub fn empty() -> Self {
        BettiPrior { entries: [[0; 2]; 6] }
    }

    pub fn get(&self, i: Class, j: Class) -> Betti {
        self.entries[pair_slot(i, j)]
    }

    pub fn set(&mut self, i: Class, j: Class, betti: Betti) {
        self.entries[pair_slot(i, j)] = betti;
    }

    /// `(i, j, betti)` for the six pairs in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (Class, Class, Betti)> + '_ {
        PAIRS.iter().zip(&self.entries).map(|(&(i, j), &b)| (i, j, b))
    }

    /// Sum of all twelve entries.
    pub fn total(&self) -> u32 {
        self.entries.iter().flatten().sum()
    }

    /// Sum over the single-class entries only.
    pub fn total_single(&self) -> u32 {
        self.iter()
            .filter(|(i, j, _)| i == j)
            .flat_map(|(_, _, b)| b)
            .sum()
    }

    /// Entries `(i, j, d)` where `self` and `other` differ.
    pub fn differences(&self, other: &BettiPrior) -> Vec<(Class, Class, usize)> {
        let mut out = Vec::new();
        for ((i, j, a), (_, _, b)) in self.iter().zip(other.iter()) {
            for d in 0..2 {
                if a[d] != b[d] {
                    out.push((i, j, d));
                }
            }
        }
        out
    }
}

impl fmt::Display for BettiPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, j, b) in self.iter() {
            writeln!(f, "{i} {j} {} {}", b[0], b[1])?;
        }
        Ok(())
    }
}

impl FromStr for BettiPrior {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut prior = BettiPrior::empty();
        let mut seen = [false; 6];
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |why: &str| Error::InvalidPrior(format!("line {}: {why}: {line:?}", n + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(bad("expected `<class_i> <class_j> <b0> <b1>`"));
            }
            let class = |s: &str| {
                Class::from_name(s)
                    .filter(|&c| c != Class::Background)
                    .ok_or_else(|| bad("class must be rv, my or lv"))
            };
            let (i, j) = (class(fields[0])?, class(fields[1])?);
            let b0 = fields[2].parse().map_err(|_| bad("b0 is not a nonnegative integer"))?;
            let b1 = fields[3].parse().map_err(|_| bad("b1 is not a nonnegative integer"))?;
            let slot = pair_slot(i, j);
            if seen[slot] {
                return Err(bad("duplicate pair"));
            }
            seen[slot] = true;
            prior.entries[slot] = [b0, b1];
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            let (i, j) = PAIRS[k];
            return Err(Error::InvalidPrior(format!("missing pair {i} {j}")));
        }
        Ok(prior)
    }
}

/// Prior of a mid-ventricular short-axis slice: each structure is one
/// component, the myocardium is a ring around the left ventricle, and the
/// right ventricle touches the myocardium but not the left ventricle.
pub fn short_axis_prior() -> BettiPrior {
    let mut p = BettiPrior::empty();
    p.set(Class::Rv, Class::Rv, [1, 0]);
    p.set(Class::My, Class::My, [1, 1]);
    p.set(Class::Lv, Class::Lv, [1, 0]);
    p.set(Class::Rv, Class::My, [1, 1]);
    p.set(Class::Rv, Class::Lv, [2, 0]);
    p.set(Class::My, Class::Lv, [1, 0]);
    p
}

/// Binary mask of pixels labelled `i` or `j`.
pub fn union_mask(mask: &LabelMask, i: Class, j: Class) -> LabelMask {
    let (a, b) = (i as u8, j as u8);
    LabelMask::new(
        mask.height(),
        mask.width(),
        mask.labels()
            .iter()
            .map(|&l| u8::from(l == a || l == b))
            .collect(),
    )
    .expect("binary labels are valid")
}

/// Measured Betti numbers of every class union of a label mask.
pub fn prior_from_mask(mask: &LabelMask) -> BettiPrior {
    let mut p = BettiPrior::empty();
    for (i, j) in PAIRS {
        let (b0, b1) = betti_mask(&union_mask(mask, i, j));
        p.set(i, j, [b0 as u32, b1 as u32]);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_axis_entries() {
        let p = short_axis_prior();
        assert_eq!(p.get(Class::My, Class::My), [1, 1]);
        assert_eq!(p.get(Class::Rv, Class::Lv), [2, 0]);
        assert_eq!(p.get(Class::Lv, Class::Rv), [2, 0]);
        assert_eq!(p.get(Class::Rv, Class::My), [1, 1]);
        assert_eq!(p.total(), 9);
        assert_eq!(p.total_single(), 4);
    }

    #[test]
    fn union_mask_definition() {
        let m = LabelMask::new(2, 2, vec![1, 2, 0, 3]).unwrap();
        assert_eq!(union_mask(&m, Class::Rv, Class::My).labels(), &[1, 1, 0, 0]);
        assert_eq!(union_mask(&m, Class::Lv, Class::Lv).labels(), &[0, 0, 0, 1]);
        let bg = LabelMask::filled(2, 2, 0).unwrap();
        assert_eq!(union_mask(&bg, Class::Rv, Class::Lv).labels(), &[0; 4]);
    }

    #[test]
    fn prior_of_trivial_masks() {
        let bg = LabelMask::filled(6, 6, 0).unwrap();
        assert_eq!(prior_from_mask(&bg), BettiPrior::empty());
        let mut one = bg.clone();
        one.set(2, 3, 3).unwrap();
        let p = prior_from_mask(&one);
        assert_eq!(p.get(Class::Lv, Class::Lv), [1, 0]);
        assert_eq!(p.get(Class::Rv, Class::Rv), [0, 0]);
        assert_eq!(p.get(Class::Rv, Class::Lv), [1, 0]);
    }

    #[test]
    fn text_round_trip_and_errors() {
        let p = short_axis_prior();
        let text = p.to_string();
        assert_eq!(text.lines().count(), 6);
        assert_eq!(text.parse::<BettiPrior>().unwrap(), p);
        // Order of classes within a line does not matter.
        let swapped = text.replace("rv lv", "lv rv");
        assert_eq!(swapped.parse::<BettiPrior>().unwrap(), p);

        let missing: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(missing.parse::<BettiPrior>().unwrap_err().to_string().contains("missing pair"));
        assert!("bg rv 1 0\n".parse::<BettiPrior>().is_err());
        assert!("rv rv -1 0\n".parse::<BettiPrior>().is_err());
        let dup = format!("{text}rv rv 1 0\n");
        assert!(dup.parse::<BettiPrior>().is_err());
    }

    #[test]
    fn differences_lists_entries() {
        let mut q = short_axis_prior();
        q.set(Class::Rv, Class::Rv, [2, 0]);
        assert_eq!(
            short_axis_prior().differences(&q),
            vec![(Class::Rv, Class::Rv, 0)]
        );
    }
}
