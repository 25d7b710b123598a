//! Krivine-style abstract machines with bit-level space accounting.
//!
//! The crate evaluates closed lambda-terms to weak head normal form on four
//! machines that share their syntax but differ in how they manage
//! environments and in how machine states are priced:
//!
//! * [`machines::NaiveKam`] — plain closures, environments never shrink,
//!   every code pointer costs `bits(|t0|)`.
//! * [`machines::SpaceKam`] — environments are restricted to the free
//!   variables of the code they close, variables are unchained eagerly, and
//!   code pointers cost the bits of their in-order ("left") address.
//! * [`machines::TimeKam`] — environments and stacks live in a heap of cells
//!   that is never freed; pointer-sized accounting with heap addresses.
//! * [`machines::SpaceLam`] — a right-to-left call-by-value machine with a
//!   dump, space-accounted like the Space KAM.
//!
//! Around the machines sit Scott string/character encodings and the
//! combinators built from them ([`encodings`]), a compiler from Turing
//! machine descriptions to lambda-terms plus its direct simulator
//! ([`tm`]), log-space constructor readback for final states
//! ([`readback`]), and growth-rate classification for measured series
//! ([`growth`], [`experiments`]).

pub mod code;
pub mod encodings;
pub mod experiments;
pub mod families;
pub mod gen;
pub mod growth;
pub mod machine;
pub mod machines;
pub mod readback;
pub mod reduce;
pub mod term;
pub mod tm;

/// Number of bits needed to write `n` in binary: `floor(log2 n) + 1` for
/// `n >= 1`, and 1 for `n = 0` (a degenerate case only reachable through
/// empty-heap address accounting).
pub fn bits(n: u64) -> u64 {
    64 - n.max(1).leading_zeros() as u64
}

#[cfg(test)]
mod tests {
    use super::bits;

    #[test]
    fn bit_widths() {
        assert_eq!(bits(1), 1);
        assert_eq!(bits(2), 2);
        assert_eq!(bits(3), 2);
        assert_eq!(bits(4), 3);
        assert_eq!(bits(5), 3);
        assert_eq!(bits(255), 8);
        assert_eq!(bits(256), 9);
        assert_eq!(bits(0), 1);
    }
}
