use std::cmp::Ordering;

/// The jet variable `u^var_order`, with `var` counted from zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Jet {
    pub var: u8,
    pub order: u16,
}

impl Jet {
    pub fn new(var: usize, order: usize) -> Self {
        Jet {
            var: var as u8,
            order: order as u16,
        }
    }
}

/// `eps^eps · Π (u^α_k)^m`.
///
/// Jet factors are kept sorted by `(var, order)` with positive multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    eps: i32,
    udeg: u16,
    jets: Vec<(Jet, u16)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial {
            eps: 0,
            udeg: 0,
            jets: Vec::new(),
        }
    }

    pub fn eps_pow(e: i32) -> Self {
        Monomial {
            eps: e,
            udeg: 0,
            jets: Vec::new(),
        }
    }

    pub fn jet(j: Jet) -> Self {
        Monomial {
            eps: 0,
            udeg: 1,
            jets: vec![(j, 1)],
        }
    }

    /// Builds from unsorted factors; repeated jets are merged.
    pub fn new(eps: i32, factors: impl IntoIterator<Item = (Jet, u16)>) -> Self {
        let mut jets: Vec<(Jet, u16)> = factors.into_iter().filter(|(_, m)| *m > 0).collect();
        jets.sort_by_key(|(j, _)| *j);
        let mut merged: Vec<(Jet, u16)> = Vec::with_capacity(jets.len());
        for (j, m) in jets {
            match merged.last_mut() {
                Some((lj, lm)) if *lj == j => *lm += m,
                _ => merged.push((j, m)),
            }
        }
        let udeg = merged.iter().map(|(_, m)| *m).sum();
        Monomial {
            eps,
            udeg,
            jets: merged,
        }
    }

    pub fn eps(&self) -> i32 {
        self.eps
    }

    pub fn u_degree(&self) -> u32 {
        self.udeg as u32
    }

    pub fn jets(&self) -> &[(Jet, u16)] {
        &self.jets
    }

    /// Total jet order `Σ k·m`.
    pub fn weight(&self) -> i64 {
        self.jets
            .iter()
            .map(|(j, m)| j.order as i64 * *m as i64)
            .sum()
    }

    /// Differential degree: `deg u_k = k`, `deg eps = -1`.
    pub fn diff_degree(&self) -> i64 {
        self.weight() - self.eps as i64
    }

    pub fn multiplicity(&self, j: Jet) -> u16 {
        self.jets
            .binary_search_by_key(&j, |(jj, _)| *jj)
            .map(|i| self.jets[i].1)
            .unwrap_or(0)
    }

    pub fn max_order(&self, var: usize) -> Option<u16> {
        self.jets
            .iter()
            .filter(|(j, _)| j.var as usize == var)
            .map(|(j, _)| j.order)
            .max()
    }

    pub fn max_var(&self) -> Option<usize> {
        self.jets.iter().map(|(j, _)| j.var as usize).max()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut jets = Vec::with_capacity(self.jets.len() + other.jets.len());
        let (mut i, mut k) = (0, 0);
        while i < self.jets.len() && k < other.jets.len() {
            let (ja, ma) = self.jets[i];
            let (jb, mb) = other.jets[k];
            match ja.cmp(&jb) {
                Ordering::Less => {
                    jets.push((ja, ma));
                    i += 1;
                }
                Ordering::Greater => {
                    jets.push((jb, mb));
                    k += 1;
                }
                Ordering::Equal => {
                    jets.push((ja, ma + mb));
                    i += 1;
                    k += 1;
                }
            }
        }
        jets.extend_from_slice(&self.jets[i..]);
        jets.extend_from_slice(&other.jets[k..]);
        Monomial {
            eps: self.eps + other.eps,
            udeg: self.udeg + other.udeg,
            jets,
        }
    }

    /// Removes one factor `j`; `None` if absent. Returns the old multiplicity.
    pub fn remove_one(&self, j: Jet) -> Option<(Monomial, u16)> {
        let idx = self.jets.binary_search_by_key(&j, |(jj, _)| *jj).ok()?;
        let mut jets = self.jets.clone();
        let m = jets[idx].1;
        if m == 1 {
            jets.remove(idx);
        } else {
            jets[idx].1 -= 1;
        }
        Some((
            Monomial {
                eps: self.eps,
                udeg: self.udeg - 1,
                jets,
            },
            m,
        ))
    }

    pub fn with_eps(&self, eps: i32) -> Monomial {
        Monomial {
            eps,
            udeg: self.udeg,
            jets: self.jets.clone(),
        }
    }

    /// Renumbers variables; `map[old] = new`.
    pub fn remap_vars(&self, map: &[usize]) -> Monomial {
        Monomial::new(
            self.eps,
            self.jets
                .iter()
                .map(|(j, m)| (Jet::new(map[j.var as usize], j.order as usize), *m)),
        )
    }

    /// Jet factors expanded by multiplicity, in canonical order.
    fn expanded(&self) -> impl Iterator<Item = Jet> + '_ {
        self.jets
            .iter()
            .flat_map(|(j, m)| std::iter::repeat_n(*j, *m as usize))
    }
}

impl Ord for Monomial {
    /// Ascending `eps` exponent, then ascending `u`-degree, then the sorted jet
    /// lists compared lexicographically.
    fn cmp(&self, other: &Self) -> Ordering {
        self.eps
            .cmp(&other.eps)
            .then_with(|| self.udeg.cmp(&other.udeg))
            .then_with(|| self.expanded().cmp(other.expanded()))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_matches_display_order() {
        // u*u_xx before u_x^2 at equal eps and degree.
        let a = Monomial::new(2, [(Jet::new(0, 0), 1), (Jet::new(0, 2), 1)]);
        let b = Monomial::new(2, [(Jet::new(0, 1), 2)]);
        assert!(a < b);
        // eps^0 u^2 before eps^2 u_xx
        let c = Monomial::new(0, [(Jet::new(0, 0), 2)]);
        let d = Monomial::new(2, [(Jet::new(0, 2), 1)]);
        assert!(c < d);
    }

    #[test]
    fn degrees() {
        let m = Monomial::new(2, [(Jet::new(0, 1), 2), (Jet::new(1, 3), 1)]);
        assert_eq!(m.u_degree(), 3);
        assert_eq!(m.weight(), 5);
        assert_eq!(m.diff_degree(), 3);
    }
}
