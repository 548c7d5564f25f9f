//! Avoidability of abelian and additive powers in words.
//!
//! This crate mechanizes a family of avoidance arguments from
//! combinatorics on words:
//!
//! * [`words`] and [`morphism`] — words over integer alphabets, the
//!   σ-vector `[length, letter-sum]`, linear morphisms and their 2×2
//!   matrices, morphic fixed points and their factor sets;
//! * [`detectors`] — brute-force detection of abelian, additive, and
//!   ordinary powers, bounded critical-exponent scans, and exhaustive
//!   search for extremal avoiding words;
//! * [`templates`] — the additive k-template engine: splits, parents,
//!   ancestor closures, and a full decision procedure for whether
//!   `g(f^ω(a))` avoids additive k-powers;
//! * [`growth`] — multi-valued substitutions and growth-rate lower
//!   bounds for abelian-4-power-free binary words.
//!
//! The narrative guide lives in `book/`; its code snippets are compiled
//! as doc-tests below so they cannot drift out of sync.
//!
//! ```
//! use powfree::morphism::LinearMorphism;
//! use powfree::detectors::find_additive_k_power;
//!
//! let f: LinearMorphism = "0->001 1->012 2->212".parse()?;
//! let prefix = f.iterate_prefix(0, 7)?;
//! assert!(find_additive_k_power(&prefix, 4)?.is_none());
//! # Ok::<(), powfree::Error>(())
//! ```

pub mod detectors;
pub mod error;
pub mod growth;
pub mod morphism;
pub mod templates;
pub mod words;

pub use error::{Error, Result};

// Compile the book's code snippets as doc-tests.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub struct $name;
        };
    }
    chapter!(
        WordsAndMorphisms,
        "../../../book/src/words-and-morphisms.md"
    );
    chapter!(DetectingPowers, "../../../book/src/detecting-powers.md");
    chapter!(TemplateAncestry, "../../../book/src/template-ancestry.md");
    chapter!(GrowthRates, "../../../book/src/growth-rates.md");
}
