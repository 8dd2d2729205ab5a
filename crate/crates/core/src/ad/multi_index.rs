use std::fmt;

use serde::{Deserialize, Serialize};

use super::jet::Group;

/// Derivative orders per variable, split into the four Wirtinger groups.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex {
    pub z: Vec<u8>,
    pub zbar: Vec<u8>,
    pub eta: Vec<u8>,
    pub etabar: Vec<u8>,
}

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        MultiIndex {
            z: vec![0; dim],
            zbar: vec![0; dim],
            eta: vec![0; dim],
            etabar: vec![0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn group(&self, g: Group) -> &[u8] {
        match g {
            Group::Z => &self.z,
            Group::ZBar => &self.zbar,
            Group::Eta => &self.eta,
            Group::EtaBar => &self.etabar,
        }
    }

    fn group_mut(&mut self, g: Group) -> &mut Vec<u8> {
        match g {
            Group::Z => &mut self.z,
            Group::ZBar => &mut self.zbar,
            Group::Eta => &mut self.eta,
            Group::EtaBar => &mut self.etabar,
        }
    }

    /// Adds `order` to variable `k` (0-based) of `group`.
    pub fn with(mut self, group: Group, k: usize, order: u8) -> Self {
        self.group_mut(group)[k] += order;
        self
    }

    pub fn order(&self) -> u32 {
        Group::ALL
            .iter()
            .flat_map(|&g| self.group(g).iter())
            .map(|&e| e as u32)
            .sum()
    }

    pub fn position_order(&self) -> u32 {
        self.z.iter().chain(&self.zbar).map(|&e| e as u32).sum()
    }

    /// The index with `z <-> z̄` and `η <-> η̄` swapped.
    pub fn conj_swapped(&self) -> Self {
        MultiIndex {
            z: self.zbar.clone(),
            zbar: self.z.clone(),
            eta: self.etabar.clone(),
            etabar: self.eta.clone(),
        }
    }

    /// Flat exponent vector in jet storage order.
    pub fn flat(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(4 * self.dim());
        for g in Group::ALL {
            v.extend_from_slice(self.group(g));
        }
        v
    }

    /// Every multi-index of the given dimension with `1 <= order <= max`.
    pub fn all_up_to(dim: usize, max: u8) -> Vec<MultiIndex> {
        let nvars = 4 * dim;
        let mut out = Vec::new();
        let mut cur = vec![0u8; nvars];
        fn rec(cur: &mut Vec<u8>, pos: usize, left: u8, dim: usize, out: &mut Vec<MultiIndex>) {
            if pos == cur.len() {
                if cur.iter().any(|&e| e > 0) {
                    out.push(MultiIndex {
                        z: cur[..dim].to_vec(),
                        zbar: cur[dim..2 * dim].to_vec(),
                        eta: cur[2 * dim..3 * dim].to_vec(),
                        etabar: cur[3 * dim..].to_vec(),
                    });
                }
                return;
            }
            for e in 0..=left {
                cur[pos] = e;
                rec(cur, pos + 1, left - e, dim, out);
            }
            cur[pos] = 0;
        }
        rec(&mut cur, 0, max, dim, &mut out);
        out.sort_by_key(|m| m.order());
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = [
            ("z", Group::Z),
            ("zbar", Group::ZBar),
            ("eta", Group::Eta),
            ("etabar", Group::EtaBar),
        ];
        let mut parts = Vec::new();
        for (name, g) in names {
            for (k, &e) in self.group(g).iter().enumerate() {
                if e > 0 {
                    parts.push(if e == 1 {
                        format!("d{}{}", name, k + 1)
                    } else {
                        format!("d{}{}^{}", name, k + 1, e)
                    });
                }
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join(" "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conj_swap_is_involution() {
        let m = MultiIndex::zero(2).with(Group::Z, 0, 1).with(Group::EtaBar, 1, 2);
        assert_eq!(m.conj_swapped().conj_swapped(), m);
        assert_eq!(m.conj_swapped().zbar, vec![1, 0]);
        assert_eq!(m.conj_swapped().eta, vec![0, 2]);
        assert_eq!(m.order(), 3);
        assert_eq!(m.to_string(), "dz1 detabar2^2");
    }

    #[test]
    fn enumeration_counts() {
        // 8 variables, orders 1..=2: 8 + 36.
        assert_eq!(MultiIndex::all_up_to(2, 2).len(), 44);
    }
}
