//! Multi-index helpers.

/// All multi-indices of length `dim` with total order exactly `order`,
/// in lexicographic order (first component largest first).
pub fn exact(dim: usize, order: usize) -> Vec<Vec<usize>> {
    match dim {
        0 => {
            if order == 0 {
                vec![vec![]]
            } else {
                vec![]
            }
        }
        1 => vec![vec![order]],
        _ => {
            let mut out = Vec::new();
            for first in (0..=order).rev() {
                for mut rest in exact(dim - 1, order - first) {
                    rest.insert(0, first);
                    out.push(rest);
                }
            }
            out
        }
    }
}

/// All multi-indices with total order `<= max_order`, grouped by order.
pub fn up_to(dim: usize, max_order: usize) -> Vec<Vec<usize>> {
    (0..=max_order).flat_map(|k| exact(dim, k)).collect()
}

pub fn order(alpha: &[usize]) -> usize {
    alpha.iter().sum()
}

pub fn factorial(alpha: &[usize]) -> f64 {
    alpha
        .iter()
        .map(|&a| (1..=a).map(|k| k as f64).product::<f64>())
        .product()
}

#[cfg(test)]
mod tests {
    #[test]
    fn counts() {
        assert_eq!(super::up_to(2, 2).len(), 6);
        assert_eq!(super::up_to(1, 3).len(), 4);
        assert_eq!(super::exact(2, 3), vec![vec![3, 0], vec![2, 1], vec![1, 2], vec![0, 3]]);
    }
}
