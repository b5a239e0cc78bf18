//! Convexity of bitile collections under the order.

use crate::error::{Error, Result};

use super::tile::{le, Bitile, BitileSet};

/// A missing sandwiched bitile: `lower ≤ middle ≤ upper` with the outer two
/// present and `middle` absent.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ConvexityWitness {
    pub lower: Bitile,
    pub middle: Bitile,
    pub upper: Bitile,
}

impl From<ConvexityWitness> for Error {
    fn from(w: ConvexityWitness) -> Self {
        Error::NotConvex {
            lower: w.lower,
            middle: w.middle,
            upper: w.upper,
        }
    }
}

/// The unique bitile `P'` at time scale `scale` with `lower ≤ P' ≤ upper`.
fn intermediate(lower: &Bitile, upper: &Bitile, scale: i32) -> Bitile {
    let time = lower.time.ancestor(scale).expect("scale above lower");
    Bitile::between(time, upper.freq)
}

/// First violation of convexity, if any.
///
/// Between comparable `P < P''` there is exactly one bitile per intermediate
/// time scale, so it suffices to check the one directly above `P`: the rest
/// of the chain follows by induction on the scale gap.
pub fn convexity_witness(s: &BitileSet) -> Option<ConvexityWitness> {
    for upper in s.iter() {
        for lower in s.iter() {
            if lower.time.scale >= upper.time.scale || !le(lower, upper) {
                continue;
            }
            let middle = intermediate(lower, upper, lower.time.scale + 1);
            if !s.contains(&middle) {
                return Some(ConvexityWitness {
                    lower: *lower,
                    middle,
                    upper: *upper,
                });
            }
        }
    }
    None
}

pub fn is_convex(s: &BitileSet) -> bool {
    convexity_witness(s).is_none()
}

pub fn ensure_convex(s: &BitileSet) -> Result<()> {
    match convexity_witness(s) {
        Some(w) => Err(w.into()),
        None => Ok(()),
    }
}

/// Smallest convex superset: every bitile sandwiched between two members.
pub fn convex_hull(s: &BitileSet) -> BitileSet {
    let mut out = s.clone();
    for upper in s.iter() {
        for lower in s.iter() {
            if lower.time.scale < upper.time.scale && le(lower, upper) {
                for scale in lower.time.scale + 1..upper.time.scale {
                    out.insert(intermediate(lower, upper, scale));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_plane::all_bitiles;

    #[test]
    fn examples() {
        assert!(is_convex(&BitileSet::new()));
        for res in 1..=5 {
            assert!(is_convex(&all_bitiles(res)));
        }
        // [0,1/8)x[0,16) < [0,1/4)x[0,8) < [0,1/2)x[0,4) at res 4
        let lo = Bitile::at(3, 0, 0);
        let mid = Bitile::at(2, 0, 0);
        let hi = Bitile::at(1, 0, 0);
        assert!(le(&lo, &mid) && le(&mid, &hi));
        let gap: BitileSet = [lo, hi].into_iter().collect();
        let w = convexity_witness(&gap).unwrap();
        assert_eq!((w.lower, w.middle, w.upper), (lo, mid, hi));
        let hull = convex_hull(&gap);
        assert_eq!(hull, [lo, mid, hi].into_iter().collect());
        assert!(is_convex(&hull));
    }

    /// Brute force over every bitile of the resolution.
    fn convex_by_definition(s: &BitileSet, res: u32) -> bool {
        let all = all_bitiles(res);
        s.iter().all(|a| {
            s.iter().all(|c| {
                !le(a, c) || all.iter().all(|b| !(le(a, b) && le(b, c)) || s.contains(b))
            })
        })
    }

    #[test]
    fn witness_agrees_with_definition() {
        let all: Vec<Bitile> = all_bitiles(3).into_iter().collect();
        // every subset of a 6-element window, several windows
        for start in [0usize, 3, 6] {
            let window = &all[start..start + 6];
            for mask in 0u32..64 {
                let s: BitileSet = (0..6)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| window[i])
                    .collect();
                assert_eq!(is_convex(&s), convex_by_definition(&s, 3));
                assert!(convex_by_definition(&convex_hull(&s), 3));
            }
        }
    }
}
