//! Input-independent unmasking order from the 2D Halton sequence (bases 2, 3).

use crate::error::{contract, Result};
use crate::grid::Pos;

/// Digit reversal of `index` in `base`, mirrored below the radix point.
pub fn radical_inverse(index: u64, base: u64) -> Result<f64> {
    if base < 2 {
        return Err(contract(format!(
            "radical inverse base {base} must be >= 2"
        )));
    }
    let b = base as u128;
    let mut n = index as u128;
    let mut reversed: u128 = 0;
    let mut denom: u128 = 1;
    while n > 0 {
        reversed = reversed * b + n % b;
        denom *= b;
        n /= b;
    }
    // Large indices can round up to exactly 1.0 in f64.
    Ok((reversed as f64 / denom as f64).min(1.0 - f64::EPSILON / 2.0))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HaltonOrder {
    pub height: usize,
    pub width: usize,
    pub order: Vec<Pos>,
    /// Sequence indices consumed to cover the grid.
    pub draws: u64,
}

impl HaltonOrder {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Visits Halton points `i = 1, 2, ...`, mapping `x` (base 2) to the column and
/// `y` (base 3) to the row, keeping the first hit of each cell.
pub fn halton_order(height: usize, width: usize) -> Result<HaltonOrder> {
    if height == 0 || width == 0 {
        return Err(contract(format!("empty grid {height}x{width}")));
    }
    let total = height * width;
    let mut seen = vec![false; total];
    let mut order = Vec::with_capacity(total);
    let mut index: u64 = 0;
    while order.len() < total {
        index += 1;
        let x = radical_inverse(index, 2)?;
        let y = radical_inverse(index, 3)?;
        let row = ((y * height as f64) as usize).min(height - 1);
        let col = ((x * width as f64) as usize).min(width - 1);
        let cell = row * width + col;
        if !seen[cell] {
            seen[cell] = true;
            order.push(Pos { row, col });
        }
    }
    Ok(HaltonOrder {
        height,
        width,
        order,
        draws: index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn radical_inverse_hand_values() {
        assert_eq!(radical_inverse(0, 2).unwrap(), 0.0);
        assert_eq!(radical_inverse(1, 2).unwrap(), 0.5);
        assert_eq!(radical_inverse(2, 2).unwrap(), 0.25);
        assert_eq!(radical_inverse(3, 2).unwrap(), 0.75);
        assert_eq!(radical_inverse(1, 3).unwrap(), 1.0 / 3.0);
        assert_eq!(radical_inverse(2, 3).unwrap(), 2.0 / 3.0);
        assert_eq!(radical_inverse(3, 3).unwrap(), 1.0 / 9.0);
        assert!(radical_inverse(5, 1).is_err());
        assert!(radical_inverse(u64::MAX, 2).unwrap() < 1.0);
    }

    #[test]
    fn tiny_grids() {
        assert_eq!(halton_order(1, 1).unwrap().order, vec![Pos::new(0, 0)]);
        let two = halton_order(2, 2).unwrap();
        assert_eq!(
            two.order,
            vec![
                Pos::new(0, 1),
                Pos::new(1, 0),
                Pos::new(0, 0),
                Pos::new(1, 1)
            ]
        );
        assert_eq!(two.draws, 5);
        assert!(halton_order(0, 3).is_err());
    }

    #[test]
    fn prefix_coverage_on_64() {
        let h = halton_order(64, 64).unwrap();
        assert_eq!(h.len(), 4096);
        let rows: BTreeSet<_> = h.order[..64].iter().map(|p| p.row).collect();
        let cols: BTreeSet<_> = h.order[..64].iter().map(|p| p.col).collect();
        assert!(
            rows.len() >= 14 && cols.len() >= 14,
            "{} rows {} cols",
            rows.len(),
            cols.len()
        );
    }

    #[test]
    fn prefix_spread_within_bands() {
        // The first n cells of an n×n order put at most ceil(n/4) cells in
        // any (row band, column band) block of width n/4.
        for n in [8usize, 16, 32, 64] {
            let order = halton_order(n, n).unwrap();
            let band = n / 4;
            let mut counts = [[0usize; 4]; 4];
            for p in &order.order[..n] {
                counts[p.row / band][p.col / band] += 1;
            }
            let cap = n.div_ceil(4);
            assert!(
                counts.iter().flatten().all(|c| *c <= cap),
                "n={n} {counts:?}"
            );
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(halton_order(17, 23).unwrap(), halton_order(17, 23).unwrap());
    }

    proptest! {
        #[test]
        fn order_is_a_permutation(h in 1usize..=128, w in 1usize..=128) {
            let order = halton_order(h, w).unwrap();
            let mut cells: Vec<_> = order.order.iter().map(|p| (p.row, p.col)).collect();
            cells.sort();
            let expected: Vec<_> = (0..h).flat_map(|r| (0..w).map(move |c| (r, c))).collect();
            prop_assert_eq!(cells, expected);
            prop_assert!(order.draws <= 64 * (h * w) as u64);
        }
    }
}
