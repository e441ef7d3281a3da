use std::fmt;

use serde::{Deserialize, Serialize};

/// Which family a field belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FieldKind {
    /// Phase corrections `phi^(j)`.
    Potential,
    /// `varphi^(j) = d_x phi^(j)`.
    Density,
    /// Amplitude corrections `nu^(j)`.
    Amplitude,
}

impl FieldKind {
    fn stem(self) -> &'static str {
        match self {
            FieldKind::Potential => "phi",
            FieldKind::Density => "varphi",
            FieldKind::Amplitude => "nu",
        }
    }
}

/// Grading used to weight monomials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grading {
    Potential,
    Kdv,
}

impl Grading {
    pub fn kind(self) -> FieldKind {
        match self {
            Grading::Potential => FieldKind::Potential,
            Grading::Kdv => FieldKind::Density,
        }
    }

    /// Lowest derivative order a basis factor may carry.
    pub fn min_order(self) -> u8 {
        match self {
            Grading::Potential => 1,
            Grading::Kdv => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Grading::Potential => "potential",
            Grading::Kdv => "kdv",
        }
    }
}

impl std::str::FromStr for Grading {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "potential" => Ok(Grading::Potential),
            "kdv" => Ok(Grading::Kdv),
            other => Err(format!("unknown grading {other:?}")),
        }
    }
}

/// A field `phi^(j)`, `varphi^(j)` or `nu^(j)`, optionally carrying one
/// formal slow-time derivative `d/dt_m` (`time = m`, `0` for none).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldSymbol {
    pub kind: FieldKind,
    pub index: u8,
    pub time: u8,
}

impl FieldSymbol {
    pub fn new(kind: FieldKind, index: u8) -> Self {
        assert!(index >= 1, "field indices start at 1");
        FieldSymbol { kind, index, time: 0 }
    }

    pub fn phi(index: u8) -> Self {
        Self::new(FieldKind::Potential, index)
    }

    pub fn varphi(index: u8) -> Self {
        Self::new(FieldKind::Density, index)
    }

    pub fn nu(index: u8) -> Self {
        Self::new(FieldKind::Amplitude, index)
    }

    pub fn at_time(self, m: u8) -> Self {
        FieldSymbol { time: m, ..self }
    }

    pub fn untimed(self) -> Self {
        FieldSymbol { time: 0, ..self }
    }

    pub fn is_timed(self) -> bool {
        self.time != 0
    }

    /// Degree of the underived field, including the slow-time weight `2m - 1`.
    pub fn base_weight(self) -> u32 {
        let j = self.index as u32;
        let w = match self.kind {
            FieldKind::Potential => 2 * j - 1,
            FieldKind::Density | FieldKind::Amplitude => 2 * j,
        };
        if self.time == 0 {
            w
        } else {
            w + 2 * self.time as u32 - 1
        }
    }
}

impl fmt::Display for FieldSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.stem(), self.index)?;
        if self.time != 0 {
            write!(f, "@t{}", self.time)?;
        }
        Ok(())
    }
}

impl std::str::FromStr for FieldSymbol {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (body, time) = match s.split_once("@t") {
            Some((b, t)) => (b, t.parse::<u8>().map_err(|e| e.to_string())?),
            None => (s, 0),
        };
        let (kind, rest) = if let Some(r) = body.strip_prefix("varphi") {
            (FieldKind::Density, r)
        } else if let Some(r) = body.strip_prefix("phi") {
            (FieldKind::Potential, r)
        } else if let Some(r) = body.strip_prefix("nu") {
            (FieldKind::Amplitude, r)
        } else {
            return Err(format!("unknown field {s:?}"));
        };
        let index: u8 = rest.parse().map_err(|_| format!("bad field index in {s:?}"))?;
        if index == 0 {
            return Err(format!("field index must be positive in {s:?}"));
        }
        Ok(FieldSymbol { kind, index, time })
    }
}

/// `d_x^order` of a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Factor {
    pub symbol: FieldSymbol,
    pub order: u8,
}

impl Factor {
    pub fn new(symbol: FieldSymbol, order: u8) -> Self {
        Factor { symbol, order }
    }

    pub fn weight(self) -> u32 {
        self.symbol.base_weight() + self.order as u32
    }

    pub fn derivative(self) -> Self {
        Factor { order: self.order + 1, ..self }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D[{}]{{{}}}", self.order, self.symbol)
    }
}

impl std::str::FromStr for Factor {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let rest = s.strip_prefix("D[").ok_or_else(|| format!("bad factor {s:?}"))?;
        let (order, rest) = rest.split_once("]{").ok_or_else(|| format!("bad factor {s:?}"))?;
        let sym = rest.strip_suffix('}').ok_or_else(|| format!("bad factor {s:?}"))?;
        Ok(Factor { symbol: sym.parse()?, order: order.parse().map_err(|_| format!("bad order in {s:?}"))? })
    }
}
