//! Polynomial arithmetic over `Z/p^N`.
//!
//! [`MultiPoly`] is sparse in the six variables `x1, x2, x3, z1, z2, x`;
//! [`UniPoly`] is dense in a single variable and is used for level-set
//! normal forms and for point counting over `F_p`.

mod multi;
mod uni;

pub use multi::{ExponentWeights, Monomial, MultiPoly, PolyWire};
pub use uni::UniPoly;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The fixed variable order; exponent vectors compare lexicographically in it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    #[serde(rename = "x1")]
    X1,
    #[serde(rename = "x2")]
    X2,
    #[serde(rename = "x3")]
    X3,
    #[serde(rename = "z1")]
    Z1,
    #[serde(rename = "z2")]
    Z2,
    #[serde(rename = "x")]
    X,
}

pub const NVARS: usize = 6;

impl Var {
    pub const ALL: [Var; NVARS] = [Var::X1, Var::X2, Var::X3, Var::Z1, Var::Z2, Var::X];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X1 => "x1",
            Var::X2 => "x2",
            Var::X3 => "x3",
            Var::Z1 => "z1",
            Var::Z2 => "z2",
            Var::X => "x",
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Var {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Var::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variable {s}"))
    }
}

/// A set of declared variables, kept in the fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct VarSet(u8);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);
    /// `x1, x2, x3`
    pub const SPACE: VarSet = VarSet(0b000111);
    /// `z1, z2`
    pub const BASE: VarSet = VarSet(0b011000);
    /// `z1, z2, x`
    pub const QUARTIC: VarSet = VarSet(0b111000);

    pub fn of(vars: &[Var]) -> Self {
        VarSet(vars.iter().fold(0, |m, v| m | (1 << v.index())))
    }

    pub fn contains(self, v: Var) -> bool {
        self.0 & (1 << v.index()) != 0
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    pub fn without(self, v: Var) -> VarSet {
        VarSet(self.0 & !(1 << v.index()))
    }

    pub fn iter(self) -> impl Iterator<Item = Var> {
        Var::ALL.into_iter().filter(move |v| self.contains(*v))
    }
}
