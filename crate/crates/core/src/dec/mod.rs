//! Discrete exterior calculus on the periodic staggered Cartesian grid.
//!
//! Primal forms live on the vertices, edges and cells of the primal grid;
//! dual (twisted) forms live on the dual grid whose vertices are the primal
//! cell centres. See [`crate::grid`] for the storage convention shared by
//! both grids.
//!
//! Conventions:
//! - the exterior derivative uses one-sided differences: backward on the
//!   primal grid, forward on the dual grid;
//! - the Hodge star is a coefficient re-tagging, `*(a^x, a^y) = (-a^y, a^x)`
//!   for one-forms in both directions, so `**` is `-1` on one-forms;
//! - cell boundaries are oriented counterclockwise.

mod chain;
mod form;
mod wedge;

pub use chain::{boundary, integrate, Chain};
pub use form::{Form, Form0, Form1, Form2};
pub use wedge::{pairing, pairing_via_wedge, wedge};

/// Whether a form or chain lives on the primal or the dual grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Primal,
    Dual,
}

impl Kind {
    pub fn opposite(self) -> Kind {
        match self {
            Kind::Primal => Kind::Dual,
            Kind::Dual => Kind::Primal,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Primal => "primal",
            Kind::Dual => "dual",
        }
    }

    pub(crate) fn expect(self, expected: Kind) -> crate::Result<()> {
        if self == expected {
            Ok(())
        } else {
            Err(crate::Error::KindMismatch {
                expected: expected.name(),
                found: self.name(),
            })
        }
    }
}
