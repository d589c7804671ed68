//! Exterior algebra over an orthonormal coframe.
//!
//! A [`Coframe`] fixes a chart, the matrix `θ^a_μ` and a diagonal signature.
//! [`MultiForm`] stores components in the frame basis `θ^{a1}∧…∧θ^{ar}`
//! keyed by a bitmask of strictly increasing indices.

mod coframe;
mod multiform;

pub use coframe::{determinant, Chart, Coframe};
pub use multiform::{MultiForm, Side};

/// Index set encoded as a bitmask; bit `a` set means `θ^a` is present.
pub type Blade = u8;

pub fn grade(b: Blade) -> usize {
    b.count_ones() as usize
}

/// Indices of a blade in increasing order.
pub fn indices(b: Blade) -> Vec<usize> {
    (0..8).filter(|i| b & (1 << i) != 0).collect()
}

pub fn blade_of(indices: &[usize]) -> Blade {
    indices.iter().fold(0, |acc, i| acc | (1 << i))
}

/// Sign of `θ^A ∧ θ^B` relative to the sorted blade `θ^{A∪B}`; zero when
/// the blades overlap.
pub fn merge_sign(a: Blade, b: Blade) -> i64 {
    if a & b != 0 {
        return 0;
    }
    let swaps: u32 = indices(b).iter().map(|&j| (a >> (j + 1)).count_ones()).sum();
    if swaps % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `(-1)^{r(r-1)/2}`, the sign picked up when reversing `r` factors.
pub fn reversion_sign(r: usize) -> i64 {
    if (r * r.saturating_sub(1) / 2) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// All blades of dimension `n` with grade `r`, in increasing numeric order.
pub fn blades(n: usize, r: usize) -> Vec<Blade> {
    (0..(1u16 << n)).map(|b| b as Blade).filter(|&b| grade(b) == r).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_signs() {
        assert_eq!(merge_sign(0b01, 0b10), 1);
        assert_eq!(merge_sign(0b10, 0b01), -1);
        assert_eq!(merge_sign(0b01, 0b01), 0);
        // θ^1∧θ^3 ∧ θ^0∧θ^2 = θ^0123 after 3 swaps
        assert_eq!(merge_sign(0b1010, 0b0101), -1);
    }

    #[test]
    fn reversion_signs() {
        let s: Vec<i64> = (0..5).map(reversion_sign).collect();
        assert_eq!(s, vec![1, 1, -1, -1, 1]);
    }

    #[test]
    fn blade_enumeration() {
        assert_eq!(blades(4, 2).len(), 6);
        assert_eq!(indices(0b1011), vec![0, 1, 3]);
        assert_eq!(blade_of(&[3, 0]), 0b1001);
    }
}
