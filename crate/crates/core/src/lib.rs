//! Uniform-category covering theory on finite metric spaces.
//!
//! A finite space carries a symmetric dissimilarity; thresholding it gives
//! entourages (reflexive symmetric relations), and each entourage gives a
//! Rips complex. On top of that this crate provides
//!
//! * the entourage algebra (composition, images under maps, balls),
//! * Rips 2-skeleta, edge-path presentations and exact integer first homology,
//! * the chain calculus: insert/delete moves, replayable homotopy
//!   certificates and three-valued homotopy decisions,
//! * per-scale checks of every covering predicate for maps between spaces,
//! * homology towers along scale ladders with Mittag-Leffler and
//!   joinability diagnostics.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the CLI and
//! report serialization live in the `ucover` crate.

#![cfg_attr(not(test), no_std)]
// negated float comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod chain;
pub mod cover;
pub mod entourage;
mod error;
pub mod gallery;
pub mod homology;
pub mod lattice;
pub mod rips;
pub mod snf;
pub mod space;
pub mod tower;

pub use chain::{Budget, Chain, HomotopyCertificate, Move, Obstruction, Trivalue};
pub use entourage::Entourage;
pub use error::{Error, Result};
pub use homology::{AbelianGroup, H1Map, Homology};
pub use rips::{Presentation, RipsSkeleton};
pub use space::{Comparison, FiniteSpace, ScaleLadder, SpaceMap};

/// Serde helpers that write big integers as decimal strings.
pub mod bigint_serde {
    use alloc::string::{String, ToString};
    use alloc::vec::Vec;
    use core::str::FromStr;
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> core::result::Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        BigInt::from_str(&s).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> core::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&x.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> core::result::Result<Vec<BigInt>, D::Error> {
            let raw = Vec::<String>::deserialize(d)?;
            raw.iter()
                .map(|s| BigInt::from_str(s).map_err(serde::de::Error::custom))
                .collect()
        }
    }

    pub mod matrix {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(m: &[Vec<BigInt>], s: S) -> core::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(m.len()))?;
            for row in m {
                let row: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                seq.serialize_element(&row)?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> core::result::Result<Vec<Vec<BigInt>>, D::Error> {
            let raw = Vec::<Vec<String>>::deserialize(d)?;
            raw.iter()
                .map(|row| {
                    row.iter()
                        .map(|s| BigInt::from_str(s).map_err(serde::de::Error::custom))
                        .collect()
                })
                .collect()
        }
    }
}
