//! Synthesis of weighted marked graphs (WMGs) from labelled transition systems.
//!
//! The crate decides whether a word or a labelled transition system (LTS) is
//! the reachability graph of some weighted marked graph and builds such a net
//! when one exists. Every returned net is certified: its reachability graph
//! is simulated and checked for rooted isomorphism against the input.
//!
//! Modules, bottom-up:
//!
//! - [`word`]: words, projections, primitive roots and Parikh vectors.
//! - [`lts`]: finite LTS, behavioural properties, cycles, distances, isomorphism.
//! - [`net`]: weighted nets, firing, reachability graphs, T-semiflows.
//! - [`binary`]: two-label synthesis (circuits, state counts, infinite candidates).
//! - [`acyclic`]: lattice embedding, convexity and region-based synthesis.
//! - [`cyclic`]: k-ary cyclic words via pairwise circuit merging, plus a brute-force oracle.
//! - [`format`]: text formats for nets and LTS, and DOT rendering.

pub mod acyclic;
pub mod binary;
pub mod cyclic;
pub mod format;
pub mod lts;
pub mod net;
mod rational;
pub mod word;

pub use lts::{Lts, LtsBuilder, LtsError};
pub use net::{Marking, NetError, PlaceDescriptor, System, WeightedNet};
pub use word::{Label, ParikhVector, Word};

/// A yes/no answer that carries a witness when the answer is "no".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Checked<W> {
    pub holds: bool,
    pub witness: Option<W>,
}

impl<W> Checked<W> {
    pub fn yes() -> Self {
        Checked {
            holds: true,
            witness: None,
        }
    }

    pub fn no(witness: W) -> Self {
        Checked {
            holds: false,
            witness: Some(witness),
        }
    }
}
