use std::fmt;

use super::symbol::{Factor, FieldSymbol};

/// Product of field derivatives, kept as a sorted list of `(factor, power)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DiffMonomial {
    factors: Vec<(Factor, u8)>,
}

impl DiffMonomial {
    pub fn one() -> Self {
        DiffMonomial { factors: Vec::new() }
    }

    pub fn factor(f: Factor) -> Self {
        DiffMonomial { factors: vec![(f, 1)] }
    }

    /// Build from an arbitrary list of factors (repetition allowed).
    pub fn from_factors<I: IntoIterator<Item = Factor>>(it: I) -> Self {
        let mut m = DiffMonomial::one();
        for f in it {
            m = m.times_factor(f, 1);
        }
        m
    }

    pub fn factors(&self) -> &[(Factor, u8)] {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// Total number of factors counted with multiplicity.
    pub fn factor_count(&self) -> usize {
        self.factors.iter().map(|(_, p)| *p as usize).sum()
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|(f, p)| f.weight() * *p as u32).sum()
    }

    pub fn power_of(&self, f: Factor) -> u8 {
        self.factors.iter().find(|(g, _)| *g == f).map_or(0, |(_, p)| *p)
    }

    pub fn contains_symbol(&self, pred: impl Fn(FieldSymbol) -> bool) -> bool {
        self.factors.iter().any(|(f, _)| pred(f.symbol))
    }

    pub fn times_factor(&self, f: Factor, power: u8) -> Self {
        if power == 0 {
            return self.clone();
        }
        let mut factors = self.factors.clone();
        match factors.binary_search_by(|(g, _)| g.cmp(&f)) {
            Ok(i) => factors[i].1 += power,
            Err(i) => factors.insert(i, (f, power)),
        }
        DiffMonomial { factors }
    }

    /// Remove one copy of `f`; `None` if absent.
    pub fn without_one(&self, f: Factor) -> Option<Self> {
        let i = self.factors.iter().position(|(g, _)| *g == f)?;
        let mut factors = self.factors.clone();
        if factors[i].1 == 1 {
            factors.remove(i);
        } else {
            factors[i].1 -= 1;
        }
        Some(DiffMonomial { factors })
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            let (a, pa) = self.factors[i];
            let (b, pb) = other.factors[j];
            match a.cmp(&b) {
                std::cmp::Ordering::Less => {
                    out.push((a, pa));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((b, pb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a, pa + pb));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.factors[i..]);
        out.extend_from_slice(&other.factors[j..]);
        DiffMonomial { factors: out }
    }

    /// Apply `f` to every factor (the map must be injective to keep the form canonical).
    pub fn map_factors(&self, f: impl Fn(Factor) -> Factor) -> Self {
        let mut m = DiffMonomial::one();
        for (g, p) in &self.factors {
            m = m.times_factor(f(*g), *p);
        }
        m
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let t = text.trim();
        if t == "1" {
            return Ok(DiffMonomial::one());
        }
        let mut m = DiffMonomial::one();
        for part in t.split(" * ") {
            let (f, p) = match part.rsplit_once("}^") {
                Some((f, p)) => (format!("{f}}}"), p.parse::<u8>().map_err(|e| e.to_string())?),
                None => (part.to_string(), 1),
            };
            m = m.times_factor(f.parse()?, p);
        }
        Ok(m)
    }
}

impl fmt::Display for DiffMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (i, (g, p)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" * ")?;
            }
            write!(f, "{g}")?;
            if *p > 1 {
                write!(f, "^{p}")?;
            }
        }
        Ok(())
    }
}
